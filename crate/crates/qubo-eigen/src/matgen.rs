//! Random matrix ensembles for experiments, plus Matrix Market loading.
//!
//! All generators draw from the crate's pinned RNG (`crate::rng`), so a
//! `(kind, n, seed)` triple always produces the same matrix.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::rng::Rng;

mod mtx;

pub use mtx::load_matrix_market;

/// Which matrix to generate (or load) for an experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleKind {
    /// Wishart matrix X X^t / m with aspect ratio n/m ~ `ratio`.
    MarchenkoPastur { ratio: f64 },
    /// Haar-conjugated Diag(0, gap, 1, ..., n-2).
    GapSpectrum { gap: f64 },
    /// Gap ensemble at gap 0: the lowest eigenvalue has multiplicity two.
    Degenerate,
    /// Matrix Market file on disk.
    Explicit { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn build(&self) -> Result<SymMatrix> {
        match &self.kind {
            EnsembleKind::MarchenkoPastur { ratio } => marchenko_pastur(self.n, *ratio, self.seed),
            EnsembleKind::GapSpectrum { gap } => gap_matrix(self.n, *gap, self.seed),
            EnsembleKind::Degenerate => gap_matrix(self.n, 0.0, self.seed),
            EnsembleKind::Explicit { path } => load_matrix_market(path),
        }
    }

    /// Short label used in experiment CSVs.
    pub fn label(&self) -> String {
        match &self.kind {
            EnsembleKind::MarchenkoPastur { ratio } => format!("mp(ratio={ratio})"),
            EnsembleKind::GapSpectrum { gap } => format!("gap(g={gap})"),
            EnsembleKind::Degenerate => "gap(g=0)".to_string(),
            EnsembleKind::Explicit { path } => format!("mtx({})", path.display()),
        }
    }
}

/// Number of Wishart columns for a Marchenko-Pastur target ratio.
pub fn wishart_columns(n: usize, ratio: f64) -> usize {
    ((n as f64 / ratio).round() as usize).max(1)
}

/// Samples W = X X^t / m with X an n-by-m standard normal matrix and
/// m = round(n / ratio), so the spectrum follows the Marchenko-Pastur law
/// with parameter `ratio` for large n. The result is symmetric PSD.
pub fn marchenko_pastur(n: usize, ratio: f64, seed: u64) -> Result<SymMatrix> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidOptions(format!(
            "Marchenko-Pastur ratio must lie in (0, 1], got {ratio}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidOptions(
            "matrix dimension must be >= 1".into(),
        ));
    }
    let m = wishart_columns(n, ratio);
    let mut rng = Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.normal()).collect())
        .collect();
    let mut data = vec![0.0; n * n];
    let inv_m = 1.0 / m as f64;
    for i in 0..n {
        for j in i..n {
            let v = crate::matrix::dot(&x[i], &x[j]) * inv_m;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    SymMatrix::from_dense(n, data)
}

/// Haar-distributed random orthogonal matrix (rows returned).
///
/// Implemented as QR of a standard Gaussian matrix with the R-diagonal kept
/// positive (modified Gram-Schmidt yields this form directly), which is the
/// sign correction required for Haar uniformity.
pub fn haar_orthogonal(n: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(n >= 1, "haar_orthogonal needs n >= 1");
    let mut rng = Rng::seed_from_u64(seed);
    loop {
        let mut cols: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.normal()).collect())
            .collect();
        let mut ok = true;
        for k in 0..n {
            for prev in 0..k {
                let proj = crate::matrix::dot(&cols[k], &cols[prev]);
                let (head, tail) = cols.split_at_mut(k);
                for (x, y) in tail[0].iter_mut().zip(&head[prev]) {
                    *x -= proj * y;
                }
            }
            let norm = crate::matrix::norm(&cols[k]);
            if norm < 1e-12 {
                ok = false; // essentially impossible; redraw
                break;
            }
            for v in cols[k].iter_mut() {
                *v /= norm;
            }
        }
        if ok {
            // cols are the orthonormal columns of Q; return rows of Q
            return (0..n)
                .map(|i| (0..n).map(|j| cols[j][i]).collect())
                .collect();
        }
    }
}

/// U^t Diag(0, g, 1, ..., n-2) U with Haar-random U: the spectrum is exactly
/// {0, g, 1, ..., n-2}, so the bottom gap is g (multiplicity two at 0 when
/// g = 0).
pub fn gap_matrix(n: usize, gap: f64, seed: u64) -> Result<SymMatrix> {
    if n < 3 {
        return Err(Error::InvalidOptions(format!(
            "gap ensemble needs n >= 3, got {n}"
        )));
    }
    if gap.is_nan() || gap < 0.0 {
        return Err(Error::InvalidOptions(format!(
            "gap must be >= 0, got {gap}"
        )));
    }
    let mut diag = Vec::with_capacity(n);
    diag.push(0.0);
    diag.push(gap);
    for k in 1..=(n - 2) {
        diag.push(k as f64);
    }
    let u = haar_orthogonal(n, seed);
    let mut data = vec![0.0; n * n];
    for (k, d) in diag.iter().enumerate() {
        if *d == 0.0 {
            continue;
        }
        let row = &u[k];
        for i in 0..n {
            let di = d * row[i];
            for j in i..n {
                data[i * n + j] += di * row[j];
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            data[j * n + i] = data[i * n + j];
        }
    }
    SymMatrix::from_dense(n, data)
}
