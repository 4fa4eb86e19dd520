//! Extremal eigenvalues and eigenvectors of dense symmetric matrices,
//! computed to arbitrary precision by solving a sequence of fixed-size QUBOs
//! with a built-in simulated annealer.
//!
//! The pipeline: [`encoding`] turns box-constrained quadratic programs into
//! QUBO / Ising models through a fixed-point binary encoding, [`annealer`]
//! samples low-energy states (with an exact enumeration oracle for small
//! models), and [`eigensolver`] drives the two-phase descent on the Rayleigh
//! quotient — an initial-guess fixed point followed by controlled-precision
//! descent over shrinking cubes. [`matgen`] provides the random ensembles
//! used by the experiment suites and a Matrix Market loader.
//!
//! ```
//! use qubo_eigen::{matrix::SymMatrix, eigensolver};
//!
//! let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
//! let res = eigensolver::solve_smallest(&a, &Default::default()).unwrap();
//! assert!((res.eigenvalue - 1.0).abs() < 1e-8);
//! ```
//!
//! Everything is deterministic for fixed inputs, options and seeds; values
//! are immutable after construction and safe to share across threads.

pub mod annealer;
pub mod encoding;
pub mod error;
pub mod matgen;
pub mod matrix;
pub mod rng;

pub mod eigensolver;

pub use annealer::{
    anneal, brute_force, full_response_combine, SampleSet, SamplerConfig, SamplerMode,
};
pub use eigensolver::{
    deflate, descend, generalized_rayleigh, gershgorin_upper, initial_guess, rayleigh,
    solve_generalized, solve_largest, solve_smallest, solve_smallest_ising, EigenResult,
    SolveOptions,
};
pub use encoding::{build_qubo, qubo_to_ising, Encoding, IsingModel, QuadraticProgram, QuboModel};
pub use error::{Error, Result};
pub use matrix::SymMatrix;
