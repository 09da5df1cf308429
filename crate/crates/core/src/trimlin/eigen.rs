//! Eigenvalues of real nonsymmetric matrices (real Schur form).

use std::fmt;

use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re, -self.im)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = f.precision().unwrap_or(4);
        if self.im < 0.0 {
            write!(f, "{:.*}-{:.*}i", prec, self.re, prec, -self.im)
        } else {
            write!(f, "{:.*}+{:.*}i", prec, self.re, prec, self.im)
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("Schur iteration did not converge")]
pub struct NoConvergence;

/// Eigenvalues of a square matrix given as rows.
pub fn eigenvalues(matrix: &[Vec<f64>]) -> Result<Vec<Complex>, NoConvergence> {
    let n = matrix.len();
    assert!(matrix.iter().all(|r| r.len() == n), "matrix must be square");
    let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
    let schur = m.try_schur(f64::EPSILON, 10_000).ok_or(NoConvergence)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|c| Complex::new(c.re, c.im))
        .collect())
}
