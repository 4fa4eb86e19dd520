//! Helpers shared by the integration suites.

use qubo_eigen::encoding::QuadraticProgram;
use qubo_eigen::matrix::SymMatrix;
use qubo_eigen::rng::Rng;

pub fn random_sym(rng: &mut Rng, n: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, rng.normal());
        }
    }
    m
}

pub fn random_program(rng: &mut Rng, n: usize) -> QuadraticProgram {
    let r: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    QuadraticProgram::new(r, random_sym(rng, n)).unwrap()
}

/// sup over [-1, 1]^n of ||2 Q x + r||. The norm of an affine map is convex,
/// so the sup over the cube is attained at a vertex; n is small enough to
/// enumerate them all.
pub fn sup_gradient_norm(qp: &QuadraticProgram) -> f64 {
    let n = qp.n();
    let mut sup: f64 = 0.0;
    for code in 0u64..(1 << n) {
        let x: Vec<f64> = (0..n)
            .map(|k| if (code >> k) & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        let qx = qp.quadratic().matvec(&x);
        let g: f64 = qx
            .iter()
            .zip(qp.linear())
            .map(|(q, r)| (2.0 * q + r) * (2.0 * q + r))
            .sum::<f64>()
            .sqrt();
        sup = sup.max(g);
    }
    sup
}

/// Fine grid minimum of the objective over [-1, 1]^2 — the independent
/// stand-in for the continuous cube minimum.
pub fn grid_min_2d(qp: &QuadraticProgram, points_per_axis: usize) -> f64 {
    assert_eq!(qp.n(), 2);
    let step = 2.0 / (points_per_axis - 1) as f64;
    let mut best = f64::INFINITY;
    for i in 0..points_per_axis {
        let x0 = -1.0 + i as f64 * step;
        for j in 0..points_per_axis {
            let x1 = -1.0 + j as f64 * step;
            best = best.min(qp.objective(&[x0, x1]));
        }
    }
    best
}
