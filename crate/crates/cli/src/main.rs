//! `carland`: command-line driver for the carrier landing simulator.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::json;

use carrier_landing::config::{self, KeyKind, KEYS};
use carrier_landing::sim::{
    compare_controllers, run_scenario, trim_for, CsvSink, RunMetrics, Scenario, ScenarioConfig,
};
use carrier_landing::sweep::{aggregate, map_runs, seed_configs, table_csv, BatchRow};
use carrier_landing::trimlin::{eigenmodes, linearize};
use carrier_landing::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_ABORT: u8 = 3;
const EXIT_GATE: u8 = 4;
const EXIT_IO: u8 = 1;

/// Environment variable naming the default output root.
const OUT_ENV: &str = "CARLAND_OUT";

fn key_args() -> Vec<Arg> {
    KEYS.iter()
        .map(|k| {
            let mut a = Arg::new(k.name)
                .long(k.name)
                .help(k.help)
                .allow_negative_numbers(true)
                .help_heading("Configuration keys");
            a = match k.kind {
                KeyKind::Float => a.value_name("NUM"),
                KeyKind::Int => a.value_name("INT"),
                KeyKind::Bool => a.value_name("on|off"),
                KeyKind::Choice(choices) => a.value_name("NAME").value_parser(PossibleValuesParser::new(choices)),
            };
            if let Some(alias) = k.alias {
                a = a.visible_alias(alias);
            }
            a
        })
        .collect()
}

fn common(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("config")
            .long("config")
            .short('c')
            .value_name("FILE")
            .help("TOML file applied over the defaults"),
    )
    .arg(Arg::new("out").long("out").short('o').value_name("DIR").help(format!(
        "output directory (default: under ${OUT_ENV}, else ./carland_out)"
    )))
    .arg(
        Arg::new("overrides")
            .value_name("KEY=VALUE")
            .num_args(0..)
            .help("inline overrides, applied after the config file"),
    )
    .args(key_args())
}

fn require_settle() -> Arg {
    Arg::new("require-settle")
        .long("require-settle")
        .action(ArgAction::SetTrue)
        .help("exit with status 4 unless the step settles (or the approach touches down)")
}

pub fn cli() -> Command {
    Command::new("carland")
        .about("Closed-loop carrier landing simulation")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(common(Command::new("trim").about("Solve for the trim point")))
        .subcommand(common(
            Command::new("linearize").about("Linearize about trim and report the longitudinal modes"),
        ))
        .subcommand(common(Command::new("run").about("Run one scenario")).arg(require_settle()))
        .subcommand(
            common(Command::new("compare").about("Run both pitch controllers on the same environment"))
                .arg(require_settle()),
        )
        .subcommand(
            common(Command::new("sweep").about("Run a scenario over a range of seeds"))
                .arg(
                    Arg::new("seeds")
                        .long("seeds")
                        .value_name("N")
                        .value_parser(clap::value_parser!(u64).range(1..))
                        .default_value("10")
                        .help("number of seeds"),
                )
                .arg(
                    Arg::new("seed-start")
                        .long("seed-start")
                        .value_name("SEED")
                        .value_parser(clap::value_parser!(u64))
                        .help("first seed (default: the configured seed)"),
                ),
        )
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Abort(String),
    Gate(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::UnknownKey { .. } | Error::InvalidObserver(_) | Error::AeroModel(_) => {
                Failure::Usage(e.to_string())
            }
            Error::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Abort(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn resolve(m: &ArgMatches) -> Result<ScenarioConfig, Failure> {
    let mut layers = Vec::new();
    if let Some(path) = m.get_one::<String>("config") {
        let text = fs::read_to_string(path).map_err(|e| io_err(Path::new(path), e))?;
        layers.push(config::parse_toml(&text).map_err(|e| Failure::Usage(format!("{path}: {e}")))?);
    }
    let inline: Vec<String> = m
        .get_many::<String>("overrides")
        .into_iter()
        .flatten()
        .cloned()
        .collect();
    layers.push(config::parse_overrides(&inline)?);
    let mut flags = Vec::new();
    for key in KEYS {
        if let Some(raw) = m.get_one::<String>(key.name) {
            flags.push((key, config::parse_value(key, raw)?));
        }
    }
    layers.push(flags);
    Ok(config::resolve(&layers)?)
}

fn out_dir(m: &ArgMatches, default_name: String) -> PathBuf {
    if let Some(dir) = m.get_one::<String>("out") {
        return PathBuf::from(dir);
    }
    let root = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("carland_out"));
    root.join(default_name)
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Io(e.to_string()))?;
    s.push('\n');
    write(path, &s)
}

fn prepare(dir: &Path, config: &ScenarioConfig) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write(&dir.join("resolved_config.toml"), &config::snapshot(config))
}

/// One run into `dir`: trace, metrics and config snapshot, or an abort record.
fn run_into(dir: &Path, config: &ScenarioConfig) -> Result<RunMetrics, Failure> {
    prepare(dir, config)?;
    let trace_path = dir.join("trace.csv");
    let file = File::create(&trace_path).map_err(|e| io_err(&trace_path, e))?;
    let mut sink = CsvSink::new(BufWriter::new(file), trace_path.display().to_string())?;
    match run_scenario(config, &mut sink) {
        Ok(report) => {
            write_json(&dir.join("metrics.json"), &report.metrics)?;
            Ok(report.metrics)
        }
        Err(e) => {
            use carrier_landing::sim::TraceSink;
            sink.finish()?;
            let t = match &e {
                Error::Abort { t, .. } => Some(*t),
                _ => None,
            };
            write_json(&dir.join("abort.json"), &json!({ "t": t, "error": e.to_string() }))?;
            Err(e.into())
        }
    }
}

fn settled(m: &RunMetrics, scenario: Scenario) -> bool {
    match scenario {
        Scenario::Approach => m.touchdown_time.is_some(),
        _ => m.settle_time_2pct.is_some(),
    }
}

fn cmd_trim(m: &ArgMatches) -> Result<(), Failure> {
    let config = resolve(m)?;
    let trim = trim_for(&config)?;
    let dir = out_dir(m, "trim".into());
    prepare(&dir, &config)?;
    let report = json!({
        "v_t": trim.v_t_star,
        "alpha_deg": trim.alpha_star.to_degrees(),
        "theta_deg": trim.theta_star.to_degrees(),
        "gamma_deg": trim.gamma_star.to_degrees(),
        "delta_e_deg": trim.delta_e_star.to_degrees(),
        "thrust": trim.thrust_star,
        "max_residual": trim.max_residual(),
        "iterations": trim.iterations,
    });
    write_json(&dir.join("trim.json"), &report)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    Ok(())
}

fn cmd_linearize(m: &ArgMatches) -> Result<(), Failure> {
    let config = resolve(m)?;
    let trim = trim_for(&config)?;
    let lin = linearize(&trim, &config.aircraft, &config.aero)?;
    let modes = match eigenmodes(&lin.a) {
        Ok(modes) => modes
            .iter()
            .map(|(c, label)| json!({ "mode": label.as_str(), "re": c.re, "im": c.im }))
            .collect::<Vec<_>>(),
        Err(e) => e
            .eigenvalues
            .iter()
            .map(|c| json!({ "mode": "unpaired", "re": c.re, "im": c.im }))
            .collect(),
    };
    let report = json!({
        "states": ["v_t", "theta", "alpha", "q"],
        "inputs": ["delta_e_rad", "throttle"],
        "a": lin.a,
        "b": lin.b,
        "eigenvalues": modes,
    });
    let dir = out_dir(m, "linearize".into());
    prepare(&dir, &config)?;
    write_json(&dir.join("linear_model.json"), &report)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    Ok(())
}

fn cmd_run(m: &ArgMatches) -> Result<(), Failure> {
    let config = resolve(m)?;
    let dir = out_dir(
        m,
        format!(
            "{}_{}_seed{}",
            config.scenario.as_str(),
            config.controller.as_str(),
            config.seed
        ),
    );
    let metrics = run_into(&dir, &config)?;
    println!("{}", serde_json::to_string_pretty(&metrics).unwrap_or_default());
    eprintln!("wrote {}", dir.display());
    if m.get_flag("require-settle") && !settled(&metrics, config.scenario) {
        return Err(Failure::Gate(format!("{} did not settle", config.scenario.as_str())));
    }
    Ok(())
}

fn cmd_compare(m: &ArgMatches) -> Result<(), Failure> {
    let config = resolve(m)?;
    let dir = out_dir(m, format!("compare_{}_seed{}", config.scenario.as_str(), config.seed));
    prepare(&dir, &config)?;
    let mut sinks = Vec::new();
    for name in ["opd", "pid"] {
        let sub = dir.join(name);
        fs::create_dir_all(&sub).map_err(|e| io_err(&sub, e))?;
        let path = sub.join("trace.csv");
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        sinks.push(CsvSink::new(BufWriter::new(file), path.display().to_string())?);
    }
    let (a, b) = sinks.split_at_mut(1);
    let cmp = compare_controllers(&config, &mut a[0], &mut b[0])?;
    write_json(&dir.join("opd").join("metrics.json"), &cmp.opd)?;
    write_json(&dir.join("pid").join("metrics.json"), &cmp.pid)?;
    write_json(&dir.join("comparison.json"), &cmp)?;
    println!("{}", serde_json::to_string_pretty(&cmp).unwrap_or_default());
    eprintln!("wrote {}", dir.display());
    if m.get_flag("require-settle") && !settled(&cmp.opd, config.scenario) {
        return Err(Failure::Gate("opd did not settle".into()));
    }
    Ok(())
}

fn cmd_sweep(m: &ArgMatches) -> Result<(), Failure> {
    let base = resolve(m)?;
    let count = *m.get_one::<u64>("seeds").unwrap_or(&10);
    let start = m.get_one::<u64>("seed-start").copied().unwrap_or(base.seed);
    let dir = out_dir(
        m,
        format!("sweep_{}_{}", base.scenario.as_str(), base.controller.as_str()),
    );
    prepare(&dir, &base)?;
    let configs = seed_configs(&base, start, count);
    let results = map_runs(&configs, |_, c| run_into(&dir.join(format!("seed_{}", c.seed)), c));
    let mut rows = Vec::with_capacity(results.len());
    for (c, r) in configs.iter().zip(results) {
        match r {
            Ok(metrics) => rows.push(BatchRow {
                seed: c.seed,
                metrics: Some(metrics),
                error: None,
            }),
            Err(Failure::Abort(msg)) => rows.push(BatchRow {
                seed: c.seed,
                metrics: None,
                error: Some(msg),
            }),
            Err(other) => return Err(other),
        }
    }
    write(&dir.join("aggregate.csv"), &table_csv(&rows))?;
    let agg = aggregate(&rows);
    write_json(&dir.join("aggregate.json"), &agg)?;
    print!("{}", table_csv(&rows));
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match matches.subcommand() {
        Some(("trim", m)) => cmd_trim(m),
        Some(("linearize", m)) => cmd_linearize(m),
        Some(("run", m)) => cmd_run(m),
        Some(("compare", m)) => cmd_compare(m),
        Some(("sweep", m)) => cmd_sweep(m),
        _ => unreachable!("subcommand is required"),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Abort(m) => (EXIT_ABORT, m),
                Failure::Gate(m) => (EXIT_GATE, m),
                Failure::Io(m) => (EXIT_IO, m),
            };
            eprintln!("carland: {msg}");
            ExitCode::from(code)
        }
    }
}
