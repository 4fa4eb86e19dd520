//! Solver-level integration: oracle spot checks on generated ensembles and
//! the single-bit variant trend.

use qubo_eigen::annealer::SamplerConfig;
use qubo_eigen::eigensolver::{
    initial_guess, jacobi::generalized_jacobi_oracle, jacobi::jacobi_oracle, solve_generalized,
    solve_largest, solve_smallest, solve_smallest_ising, OracleReference, SolveOptions, StopRule,
};
use qubo_eigen::matgen::{haar_orthogonal, marchenko_pastur};
use qubo_eigen::matrix::{eigvec_distance, SymMatrix};

fn opts_with_seed(seed: u64) -> SolveOptions {
    SolveOptions {
        sampler: SamplerConfig {
            seed,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn smallest_matches_oracle_on_mp_10() {
    let a = marchenko_pastur(10, 0.3, 11).unwrap();
    let eig = jacobi_oracle(&a).unwrap();
    let res = solve_smallest(&a, &opts_with_seed(11)).unwrap();
    assert!((res.eigenvalue - eig.smallest().0).abs() <= 1e-8);
    assert!(eigvec_distance(&res.eigenvector, eig.smallest().1) <= 1e-5);
}

#[test]
fn largest_matches_oracle_on_mp() {
    let a = marchenko_pastur(10, 0.3, 12).unwrap();
    let eig = jacobi_oracle(&a).unwrap();
    let res = solve_largest(&a, &opts_with_seed(12)).unwrap();
    assert!((res.eigenvalue - eig.largest().0).abs() <= 1e-8);
    assert!(eigvec_distance(&res.eigenvector, eig.largest().1) <= 1e-5);
}

#[test]
fn guess_phase_error_is_of_order_point_one() {
    // 10x10 MP matrices, b = 4, best response, no bias: the fixed-point
    // guess lands within a distance of order .1 of the true eigenvector
    let mut errs = Vec::new();
    for seed in 0..10u64 {
        let a = marchenko_pastur(10, 0.3, 300 + seed).unwrap();
        let v_true = jacobi_oracle(&a).unwrap().smallest().1.to_vec();
        let (v, _, _) = initial_guess(&a, &opts_with_seed(seed)).unwrap();
        errs.push(eigvec_distance(&v, &v_true));
    }
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    let worst = errs.iter().fold(0.0f64, |m, &e| m.max(e));
    assert!(mean <= 0.25, "mean guess error {mean}");
    assert!(worst <= 0.5, "worst guess error {worst}");
}

/// Generalized eigenpair on a mesh-like 48x48 SPD pair against the
/// reduction oracle.
#[test]
fn generalized_48_spd_pair_matches_reduction_oracle() {
    let n = 48;
    // A: banded stiffness-like SPD matrix conjugated by a random rotation;
    // B: well-conditioned mass-like SPD matrix
    let u = haar_orthogonal(n, 8);
    let mut a_data = vec![0.0; n * n];
    for (k, row) in u.iter().enumerate() {
        let d = 0.1 + k as f64; // spread spectrum
        for i in 0..n {
            for j in 0..n {
                a_data[i * n + j] += d * row[i] * row[j];
            }
        }
    }
    let a = SymMatrix::from_dense(n, a_data).unwrap();
    let mut b = SymMatrix::zeros(n);
    for i in 0..n {
        b.set(i, i, 2.0);
        if i + 1 < n {
            b.set(i, i + 1, 0.5);
        }
    }

    let gen = generalized_jacobi_oracle(&a, &b).unwrap();
    let lam_true = gen.eigenvalues()[0];
    let res = solve_generalized(&a, &b, &opts_with_seed(8), None).unwrap();
    assert!(
        (res.eigenvalue - lam_true).abs() <= 1e-8,
        "generalized eigenvalue {} vs oracle {lam_true}",
        res.eigenvalue
    );
    let av = a.matvec(&res.eigenvector);
    let bv = b.matvec(&res.eigenvector);
    let resid: f64 = av
        .iter()
        .zip(&bv)
        .map(|(x, y)| (x - res.eigenvalue * y) * (x - res.eigenvalue * y))
        .sum::<f64>()
        .sqrt();
    assert!(resid <= 1e-6 * a.frobenius_norm(), "residual {resid}");
}

/// The spin variant needs more iterations than the 2-bit QUBO encoding on
/// average (spin vectors cannot zero a coordinate).
#[test]
fn ising_needs_more_iterations_than_two_bits() {
    let mut ising_iters = Vec::new();
    let mut qubo_iters = Vec::new();
    for seed in 0..10u64 {
        let a = marchenko_pastur(20, 0.3, 400 + seed).unwrap();
        let lam_true = jacobi_oracle(&a).unwrap().smallest().0;
        let mk_opts = |bits: u32| SolveOptions {
            bits,
            stop: StopRule::OracleError,
            oracle: Some(OracleReference::new(lam_true)),
            max_iterations: 3000,
            sampler: SamplerConfig {
                seed,
                num_reads: 16,
                sweeps: 500,
                ..Default::default()
            },
            ..Default::default()
        };
        let ising = solve_smallest_ising(&a, &mk_opts(1)).unwrap();
        let qubo = solve_smallest(&a, &mk_opts(2)).unwrap();
        ising_iters.push(ising.iterations() as f64);
        qubo_iters.push(qubo.iterations() as f64);
    }
    let mi = ising_iters.iter().sum::<f64>() / 10.0;
    let mq = qubo_iters.iter().sum::<f64>() / 10.0;
    assert!(
        mi > mq,
        "ising mean iterations {mi} not above 2-bit mean {mq}"
    );
}
