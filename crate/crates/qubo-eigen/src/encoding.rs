//! Fixed-point binary encoding of box-constrained quadratic programs.
//!
//! A real variable in `[-t, t]` is approximated by `b` bits through the
//! precision vector `p = t * (-1, 1/2, 1/4, ..., 1/2^(b-1))`: the value of a
//! bit pattern `x_b` is `p . x_b`. Stacking `n` variables gives a discretized
//! cube of `2^(n*b)` points with per-coordinate spacing `t / 2^(b-1)`, covering
//! `[-t, t * (1 - 1/2^(b-1))]` in each coordinate. Minimizing a quadratic
//! `r^t x + x^t Q x` over that cube is exactly the QUBO with coefficient
//! matrix `Diag(r^t (I_n (x) p)) + Q (x) P`, where `P = p^t p`.

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Number of bits per real variable plus the cube half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Encoding {
    bits: u32,
    scale: f64,
}

impl Encoding {
    pub fn new(bits: u32, scale: f64) -> Result<Self> {
        if bits < 1 {
            return Err(Error::InvalidOptions("encoding needs bits >= 1".into()));
        }
        if scale.is_nan() || scale <= 0.0 || !scale.is_finite() {
            return Err(Error::InvalidOptions(format!(
                "encoding scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Encoding { bits, scale })
    }

    #[inline]
    pub fn bits(&self) -> usize {
        self.bits as usize
    }

    #[inline]
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same bit count at a different cube half-width.
    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Encoding::new(self.bits, scale)
    }

    /// t * (-1, 1/2, 1/4, ..., 1/2^(b-1)).
    pub fn precision_vector(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.bits());
        p.push(-self.scale);
        for k in 1..self.bits {
            p.push(self.scale / (1u64 << k) as f64);
        }
        p
    }

    /// Grid spacing per coordinate: t / 2^(b-1).
    pub fn spacing(&self) -> f64 {
        self.scale / (1u64 << (self.bits - 1)) as f64
    }

    /// Maps `n * b` bits back to the real n-vector `(I_n (x) p) x_b`.
    pub fn decode(&self, x_b: &[u8], n: usize) -> Result<Vec<f64>> {
        let b = self.bits();
        if x_b.len() != n * b {
            return Err(Error::Dimension {
                context: "Encoding::decode",
                expected: n * b,
                got: x_b.len(),
            });
        }
        let p = self.precision_vector();
        let mut out = Vec::with_capacity(n);
        for chunk in x_b.chunks_exact(b) {
            let mut v = 0.0;
            for (bit, pk) in chunk.iter().zip(&p) {
                if *bit != 0 {
                    v += pk;
                }
            }
            out.push(v);
        }
        Ok(out)
    }
}

/// Constrained quadratic objective `r^t x + x^t Q x` over a scaled cube.
#[derive(Debug, Clone)]
pub struct QuadraticProgram {
    linear: Vec<f64>,
    quadratic: SymMatrix,
}

impl QuadraticProgram {
    pub fn new(linear: Vec<f64>, quadratic: SymMatrix) -> Result<Self> {
        if linear.len() != quadratic.n() {
            return Err(Error::Dimension {
                context: "QuadraticProgram::new",
                expected: quadratic.n(),
                got: linear.len(),
            });
        }
        Ok(QuadraticProgram { linear, quadratic })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &SymMatrix {
        &self.quadratic
    }

    /// r^t x + x^t Q x at a real point.
    pub fn objective(&self, x: &[f64]) -> f64 {
        crate::matrix::dot(&self.linear, x) + self.quadratic.quadratic_form(x)
    }
}

/// QUBO over binary variables: energy(x) = x^t C x + offset, C symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    m: usize,
    coeffs: Vec<f64>,
    offset: f64,
}

impl QuboModel {
    pub fn new(m: usize, coeffs: Vec<f64>, offset: f64) -> Result<Self> {
        // reuse the SymMatrix symmetry validation
        let sym = SymMatrix::from_dense(m, coeffs)?;
        Ok(QuboModel {
            m,
            coeffs: sym.as_slice().to_vec(),
            offset,
        })
    }

    pub fn from_sym(coeffs: SymMatrix, offset: f64) -> Self {
        QuboModel {
            m: coeffs.n(),
            coeffs: coeffs.as_slice().to_vec(),
            offset,
        }
    }

    #[inline]
    pub fn num_vars(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i * self.m + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coeffs[i * self.m..(i + 1) * self.m]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn energy(&self, x_b: &[u8]) -> f64 {
        assert_eq!(x_b.len(), self.m, "energy: wrong number of bits");
        let mut e = self.offset;
        for i in 0..self.m {
            if x_b[i] == 0 {
                continue;
            }
            let row = self.row(i);
            for (j, xj) in x_b.iter().enumerate() {
                if *xj != 0 {
                    e += row[j];
                }
            }
        }
        e
    }
}

/// Ising model over spins s in {-1, +1}:
/// energy(s) = h^t s + s^t J s + offset, with J symmetric and zero diagonal
/// (a diagonal only shifts the energy since s_i^2 = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    m: usize,
    h: Vec<f64>,
    couplings: Vec<f64>,
    offset: f64,
}

impl IsingModel {
    /// Builds from a field vector and a symmetric coupling matrix. Any
    /// diagonal of `couplings` is folded into the offset.
    pub fn new(h: Vec<f64>, couplings: &SymMatrix, offset: f64) -> Result<Self> {
        let m = couplings.n();
        if h.len() != m {
            return Err(Error::Dimension {
                context: "IsingModel::new",
                expected: m,
                got: h.len(),
            });
        }
        let mut j = couplings.as_slice().to_vec();
        let mut off = offset;
        for i in 0..m {
            off += j[i * m + i];
            j[i * m + i] = 0.0;
        }
        Ok(IsingModel {
            m,
            h,
            couplings: j,
            offset: off,
        })
    }

    #[inline]
    pub fn num_vars(&self) -> usize {
        self.m
    }

    pub fn field(&self) -> &[f64] {
        &self.h
    }

    #[inline]
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.m + j]
    }

    #[inline]
    pub fn coupling_row(&self, i: usize) -> &[f64] {
        &self.couplings[i * self.m..(i + 1) * self.m]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Energy of a spin configuration, spins given as -1/+1.
    pub fn energy_spins(&self, s: &[i8]) -> f64 {
        assert_eq!(s.len(), self.m, "energy: wrong number of spins");
        let mut e = self.offset;
        for i in 0..self.m {
            let si = s[i] as f64;
            e += self.h[i] * si;
            let row = self.coupling_row(i);
            for (j, sj) in s.iter().enumerate() {
                e += si * (*sj as f64) * row[j];
            }
        }
        e
    }

    /// Energy with spins packed as bits (1 -> +1, 0 -> -1).
    pub fn energy_bits(&self, bits: &[u8]) -> f64 {
        let spins: Vec<i8> = bits.iter().map(|b| if *b != 0 { 1 } else { -1 }).collect();
        self.energy_spins(&spins)
    }
}

/// Encodes `argmin r^t x + x^t Q x` over the scaled cube into a QUBO of
/// `n * b` binary variables: coefficients `Diag(r^t (I_n (x) p)) + Q (x) P`.
pub fn build_qubo(qp: &QuadraticProgram, enc: &Encoding) -> QuboModel {
    let n = qp.n();
    let b = enc.bits();
    let m = n * b;
    let p = enc.precision_vector();
    let mut coeffs = vec![0.0; m * m];

    // Q (x) P
    for i in 0..n {
        let qrow = qp.quadratic().row(i);
        for (j, &q) in qrow.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            for (k, &pk) in p.iter().enumerate() {
                let base = (i * b + k) * m + j * b;
                for (l, &pl) in p.iter().enumerate() {
                    coeffs[base + l] += q * pk * pl;
                }
            }
        }
    }
    // Diag(r^t (I_n (x) p))
    for (i, &ri) in qp.linear().iter().enumerate() {
        if ri == 0.0 {
            continue;
        }
        for (k, &pk) in p.iter().enumerate() {
            let idx = i * b + k;
            coeffs[idx * m + idx] += ri * pk;
        }
    }

    QuboModel {
        m,
        coeffs,
        offset: 0.0,
    }
}

/// Converts a QUBO to the equivalent Ising model under x = (s + 1) / 2.
///
/// Energies agree exactly: ising.energy(s) == qubo.energy(x) for every
/// binary x, so the argmin is preserved under the bijection.
pub fn qubo_to_ising(q: &QuboModel) -> IsingModel {
    let m = q.num_vars();
    let mut h = vec![0.0; m];
    let mut couplings = vec![0.0; m * m];
    let mut offset = q.offset();

    // x^t C x with x = (s+1)/2 expands to
    //   (1/4) s^t C s + (1/2) (C 1)^t s + (1/4) 1^t C 1
    // and the diagonal of (1/4) C contributes (1/4) tr C to the offset.
    for i in 0..m {
        let row = q.row(i);
        let row_sum: f64 = row.iter().sum();
        h[i] = 0.5 * row_sum;
        offset += 0.25 * row_sum; // accumulates (1/4) 1^t C 1
        offset += 0.25 * row[i]; // (1/4) tr C
        for j in 0..m {
            if j != i {
                couplings[i * m + j] = 0.25 * row[j];
            }
        }
    }

    IsingModel {
        m,
        h,
        couplings,
        offset,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    #[test]
    fn precision_vector_two_bits() {
        let enc = Encoding::new(2, 1.0).unwrap();
        assert_eq!(enc.precision_vector(), vec![-1.0, 0.5]);
    }

    #[test]
    fn precision_vector_one_bit() {
        let enc = Encoding::new(1, 1.0).unwrap();
        assert_eq!(enc.precision_vector(), vec![-1.0]);
    }

    #[test]
    fn precision_vector_scaled() {
        let enc = Encoding::new(3, 0.1).unwrap();
        let p = enc.precision_vector();
        approx(p[0], -0.1, 1e-15);
        approx(p[1], 0.05, 1e-15);
        approx(p[2], 0.025, 1e-15);
    }

    #[test]
    fn decode_single_variable() {
        let enc = Encoding::new(2, 1.0).unwrap();
        let x = enc.decode(&[1, 1], 1).unwrap();
        approx(x[0], -0.5, 1e-15);
    }

    #[test]
    fn decode_zero_bits_is_zero_vector() {
        let enc = Encoding::new(3, 2.5).unwrap();
        let x = enc.decode(&[0; 6], 2).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn decode_two_variables() {
        let enc = Encoding::new(2, 1.0).unwrap();
        let x = enc.decode(&[0, 1, 1, 0], 2).unwrap();
        approx(x[0], 0.5, 1e-15);
        approx(x[1], -1.0, 1e-15);
    }

    #[test]
    fn decode_length_mismatch() {
        let enc = Encoding::new(2, 1.0).unwrap();
        assert!(matches!(
            enc.decode(&[0, 1, 1], 2),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn qubo_for_unit_quadratic_is_precision_matrix() {
        let qp = QuadraticProgram::new(vec![0.0], SymMatrix::diagonal(&[1.0])).unwrap();
        let enc = Encoding::new(2, 1.0).unwrap();
        let q = build_qubo(&qp, &enc);
        // P = p^t p for p = (-1, .5)
        approx(q.coeff(0, 0), 1.0, 1e-15);
        approx(q.coeff(0, 1), -0.5, 1e-15);
        approx(q.coeff(1, 0), -0.5, 1e-15);
        approx(q.coeff(1, 1), 0.25, 1e-15);
        assert_eq!(q.offset(), 0.0);
    }

    #[test]
    fn qubo_for_pure_linear_term() {
        let qp = QuadraticProgram::new(vec![1.0], SymMatrix::zeros(1)).unwrap();
        let enc = Encoding::new(1, 1.0).unwrap();
        let q = build_qubo(&qp, &enc);
        assert_eq!(q.num_vars(), 1);
        approx(q.coeff(0, 0), -1.0, 1e-15);
    }

    fn random_program(rng: &mut Rng, n: usize) -> QuadraticProgram {
        let r: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mut q = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                q.set(i, j, rng.normal());
            }
        }
        QuadraticProgram::new(r, q).unwrap()
    }

    /// Exhaustive oracle: QUBO energies must equal the real objective at the
    /// decoded points, for every binary assignment.
    fn check_energy_equivalence(qp: &QuadraticProgram, enc: &Encoding) -> f64 {
        let q = build_qubo(qp, enc);
        let m = q.num_vars();
        let mut worst = 0.0f64;
        for code in 0u64..(1 << m) {
            let bits: Vec<u8> = (0..m).map(|k| ((code >> k) & 1) as u8).collect();
            let x = enc.decode(&bits, qp.n()).unwrap();
            let direct = qp.objective(&x);
            worst = worst.max((q.energy(&bits) - direct).abs());
        }
        worst
    }

    #[test]
    fn qubo_energy_matches_objective_exhaustively() {
        let mut rng = Rng::seed_from_u64(11);
        let enc = Encoding::new(2, 1.0).unwrap();
        let qp = random_program(&mut rng, 2);
        assert!(check_energy_equivalence(&qp, &enc) <= 1e-10);
    }

    #[test]
    fn qubo_energy_matches_objective_scaled_cubes() {
        let mut rng = Rng::seed_from_u64(17);
        for (n, b, t) in [(1, 3, 0.25), (2, 2, 0.1), (3, 2, 2.0), (2, 3, 1.0)] {
            let enc = Encoding::new(b, t).unwrap();
            let qp = random_program(&mut rng, n);
            let worst = check_energy_equivalence(&qp, &enc);
            assert!(worst <= 1e-10, "n={n} b={b} t={t}: {worst}");
        }
    }

    #[test]
    fn ising_single_variable() {
        let q = QuboModel::new(1, vec![3.0], 0.0).unwrap();
        let ising = qubo_to_ising(&q);
        approx(ising.field()[0], 1.5, 1e-15);
        approx(ising.offset(), 1.5, 1e-15);
    }

    #[test]
    fn ising_of_zero_qubo_is_zero() {
        let q = QuboModel::new(2, vec![0.0; 4], 0.0).unwrap();
        let ising = qubo_to_ising(&q);
        assert_eq!(ising.field(), &[0.0, 0.0]);
        assert_eq!(ising.offset(), 0.0);
        assert_eq!(ising.coupling(0, 1), 0.0);
    }

    #[test]
    fn ising_energies_match_qubo_exhaustively() {
        let mut rng = Rng::seed_from_u64(23);
        let m = 4;
        let mut coeffs = SymMatrix::zeros(m);
        for i in 0..m {
            for j in i..m {
                coeffs.set(i, j, rng.normal());
            }
        }
        let q = QuboModel::from_sym(coeffs, 0.7);
        let ising = qubo_to_ising(&q);
        for code in 0u64..(1 << m) {
            let bits: Vec<u8> = (0..m).map(|k| ((code >> k) & 1) as u8).collect();
            approx(ising.energy_bits(&bits), q.energy(&bits), 1e-12);
        }
    }
}
