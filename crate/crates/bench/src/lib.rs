//! Shared fixtures for the benchmarks: the two-dimensional example map and
//! its standard starting point.

use bestprox_core::{make_example1, CyclicMapSpec, Example1Params, Scalar, Vector};

/// Contraction coefficient used by every benchmark scenario.
pub const LAMBDA: f64 = 0.5;

/// The example map on `ℓ_p` in the chosen arithmetic.
pub fn example_map<S: Scalar>(p: f64) -> CyclicMapSpec<S> {
    let params = Example1Params::new(LAMBDA, p).expect("valid example parameters");
    make_example1(params).expect("example map builds")
}

/// The starting point `(1000, 8) ∈ A`.
pub fn example_start<S: Scalar>() -> Vector<S> {
    Vector::new(vec![S::from_f64(1000.0), S::from_f64(8.0)])
}
