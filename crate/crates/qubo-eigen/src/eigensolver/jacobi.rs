//! Classical cyclic Jacobi eigendecomposition, used as the reference oracle
//! for the annealing-based solver and for error instrumentation.

use crate::error::{Error, Result};
use crate::matrix::{normalized, SymMatrix};

/// Dimension guard for the oracle.
pub const JACOBI_MAX_DIM: usize = 2000;

const MAX_SWEEPS: usize = 100;
/// Convergence: off-diagonal Frobenius norm relative to ||A||_F.
const OFF_DIAG_TOL: f64 = 1e-13;

/// Full eigendecomposition, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unit eigenvector paired with `eigenvalues()[k]`.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k]
    }

    pub fn smallest(&self) -> (f64, &[f64]) {
        (self.eigenvalues[0], &self.eigenvectors[0])
    }

    pub fn largest(&self) -> (f64, &[f64]) {
        let k = self.eigenvalues.len() - 1;
        (self.eigenvalues[k], &self.eigenvectors[k])
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Diagonalizes a symmetric matrix by cyclic Jacobi rotations.
///
/// Runs sweeps until the off-diagonal Frobenius norm drops below
/// `1e-13 * ||A||_F`, then returns all eigenpairs sorted ascending.
pub fn jacobi_oracle(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.n();
    if n > JACOBI_MAX_DIM {
        return Err(Error::Capacity {
            context: "jacobi_oracle",
            limit: JACOBI_MAX_DIM,
            got: n,
        });
    }
    if n == 0 {
        return Err(Error::InvalidOptions("empty matrix".into()));
    }

    let mut w: Vec<f64> = a.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro = a.frobenius_norm();
    let threshold = OFF_DIAG_TOL * fro;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * w[p * n + q] * w[p * n + q];
            }
        }
        if off.sqrt() <= threshold {
            converged = true;
            break;
        }

        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = w[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = w[p * n + p];
                let aqq = w[q * n + q];
                let diff = aqq - app;
                let theta = diff / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    // theta^2 would overflow; the rotation angle is ~1/(2 theta)
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                w[p * n + p] = app - t * apq;
                w[q * n + q] = aqq + t * apq;
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let ajp = w[j * n + p];
                    let ajq = w[j * n + q];
                    let new_p = ajp - s * (ajq + tau * ajp);
                    let new_q = ajq + s * (ajp - tau * ajq);
                    w[j * n + p] = new_p;
                    w[p * n + j] = new_p;
                    w[j * n + q] = new_q;
                    w[q * n + j] = new_q;
                }
                for j in 0..n {
                    let vjp = v[j * n + p];
                    let vjq = v[j * n + q];
                    v[j * n + p] = c * vjp - s * vjq;
                    v[j * n + q] = s * vjp + c * vjq;
                }
            }
        }
    }
    if !converged {
        // re-check once more after the final sweep
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * w[p * n + q] * w[p * n + q];
            }
        }
        if off.sqrt() > threshold {
            return Err(Error::OracleFailure);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[i * n + i].total_cmp(&w[j * n + j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| w[k * n + k]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| (0..n).map(|j| v[j * n + k]).collect())
        .collect();

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Solves `A v = lambda B v` for symmetric `A` and positive-definite `B` by
/// reduction to the standard problem on `B^{-1/2} A B^{-1/2}`.
///
/// Returned eigenvectors are Euclidean-normalized.
pub fn generalized_jacobi_oracle(a: &SymMatrix, b: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::Dimension {
            context: "generalized_jacobi_oracle",
            expected: n,
            got: b.n(),
        });
    }
    let b_eig = jacobi_oracle(b)?;
    let d_max = b_eig.eigenvalues()[n - 1];
    if d_max.is_nan() || d_max <= 0.0 || b_eig.eigenvalues()[0] <= 1e-12 * d_max {
        return Err(Error::NotPositiveDefinite {
            context: "B in the generalized eigenproblem",
        });
    }

    // B^{-1/2} = U D^{-1/2} U^t
    let inv_sqrt: Vec<f64> = b_eig.eigenvalues().iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut b_inv_half = vec![0.0; n * n];
    for (k, &w) in inv_sqrt.iter().enumerate() {
        let u = b_eig.eigenvector(k);
        for i in 0..n {
            for j in 0..n {
                b_inv_half[i * n + j] += w * u[i] * u[j];
            }
        }
    }
    let mul = |m1: &[f64], m2: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = m1[i * n + k];
                if x == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += x * m2[k * n + j];
                }
            }
        }
        out
    };
    let c = mul(&mul(&b_inv_half, a.as_slice()), &b_inv_half);
    // symmetrize the roundoff before re-entering the oracle
    let mut c_sym = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            c_sym[i * n + j] = 0.5 * (c[i * n + j] + c[j * n + i]);
        }
    }
    let c_eig = jacobi_oracle(&SymMatrix::from_dense(n, c_sym)?)?;

    let mut eigenvectors = Vec::with_capacity(n);
    for k in 0..n {
        let u = c_eig.eigenvector(k);
        let mut v = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                v[i] += b_inv_half[i * n + j] * u[j];
            }
        }
        eigenvectors.push(normalized(&v)?);
    }

    Ok(EigenDecomposition {
        eigenvalues: c_eig.eigenvalues().to_vec(),
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{dot, eigvec_distance, norm};
    use crate::rng::Rng;

    fn random_sym(rng: &mut Rng, n: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, rng.normal());
            }
        }
        m
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let a = SymMatrix::diagonal(&[3.0, 1.0, 2.0]);
        let eig = jacobi_oracle(&a).unwrap();
        assert_eq!(eig.eigenvalues(), &[1.0, 2.0, 3.0]);
        assert!(eig.eigenvector(0)[1].abs() > 0.999); // e_2 up to sign
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let eig = jacobi_oracle(&a).unwrap();
        assert!((eig.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues()[1] - 3.0).abs() < 1e-12);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert!(eigvec_distance(eig.eigenvector(0), &[inv_sqrt2, -inv_sqrt2]) < 1e-12);
    }

    #[test]
    fn residual_and_orthonormality_random() {
        let mut rng = Rng::seed_from_u64(2);
        let a = random_sym(&mut rng, 10);
        let eig = jacobi_oracle(&a).unwrap();
        let fro = a.frobenius_norm();
        let mut resid_sq = 0.0;
        for k in 0..10 {
            let v = eig.eigenvector(k);
            assert!((norm(v) - 1.0).abs() < 1e-12);
            let av = a.matvec(v);
            for i in 0..10 {
                let r = av[i] - eig.eigenvalues()[k] * v[i];
                resid_sq += r * r;
            }
            for l in (k + 1)..10 {
                assert!(dot(v, eig.eigenvector(l)).abs() < 1e-10);
            }
        }
        assert!(
            resid_sq.sqrt() <= 1e-10 * fro,
            "residual {}",
            resid_sq.sqrt()
        );
    }

    #[test]
    fn zero_matrix_is_fine() {
        let eig = jacobi_oracle(&SymMatrix::zeros(4)).unwrap();
        assert_eq!(eig.eigenvalues(), &[0.0; 4]);
    }

    #[test]
    fn dimension_guard() {
        let a = SymMatrix::zeros(2001);
        assert!(matches!(jacobi_oracle(&a), Err(Error::Capacity { .. })));
    }

    #[test]
    fn generalized_reduces_to_standard_for_identity_b() {
        let mut rng = Rng::seed_from_u64(8);
        let a = random_sym(&mut rng, 6);
        let b = SymMatrix::identity(6);
        let std_eig = jacobi_oracle(&a).unwrap();
        let gen_eig = generalized_jacobi_oracle(&a, &b).unwrap();
        for k in 0..6 {
            assert!((std_eig.eigenvalues()[k] - gen_eig.eigenvalues()[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn generalized_diagonal_pair() {
        let a = SymMatrix::diagonal(&[2.0, 6.0]);
        let b = SymMatrix::diagonal(&[1.0, 2.0]);
        let eig = generalized_jacobi_oracle(&a, &b).unwrap();
        assert!((eig.eigenvalues()[0] - 2.0).abs() < 1e-12);
        assert!((eig.eigenvalues()[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn generalized_rejects_indefinite_b() {
        let a = SymMatrix::identity(2);
        let b = SymMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            generalized_jacobi_oracle(&a, &b),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn generalized_residual_random_spd_pair() {
        let mut rng = Rng::seed_from_u64(21);
        let n = 8;
        // SPD via Gram matrices with a diagonal boost
        let g1 = random_sym(&mut rng, n);
        let g2 = random_sym(&mut rng, n);
        let mut a = SymMatrix::zeros(n);
        let mut b = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let (mut sa, mut sb) = (0.0, 0.0);
                for k in 0..n {
                    sa += g1.get(i, k) * g1.get(j, k);
                    sb += g2.get(i, k) * g2.get(j, k);
                }
                a.set(i, j, sa);
                b.set(i, j, sb + if i == j { n as f64 } else { 0.0 });
            }
        }
        let eig = generalized_jacobi_oracle(&a, &b).unwrap();
        for k in 0..n {
            let v = eig.eigenvector(k);
            let av = a.matvec(v);
            let bv = b.matvec(v);
            let lam = eig.eigenvalues()[k];
            let resid: f64 = av
                .iter()
                .zip(&bv)
                .map(|(x, y)| (x - lam * y) * (x - lam * y))
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-8 * a.frobenius_norm(), "k={k} resid={resid}");
        }
    }
}
