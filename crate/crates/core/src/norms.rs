//! ℓ_p norms and the modulus of convexity of the canonical ℓ_p norm.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Finite-dimensional ℓ_p space `ℝ^dim` with the norm `(Σ|v_i|^p)^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpSpace {
    dim: usize,
    p: f64,
}

impl LpSpace {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(invalid(format!("exponent p must satisfy p > 1, got {p}")));
        }
        Ok(LpSpace { dim, p })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn constants(&self) -> PowerTypeConstants {
        power_type_constants(self.p).expect("p > 1 is a space invariant")
    }

    pub fn check_dim<S: Scalar>(&self, v: &Vector<S>) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        Ok(())
    }

    /// `Σ|vᵢ|^p`, without the dimension check.
    pub(crate) fn power_sum_unchecked<S: Scalar>(&self, v: &Vector<S>) -> S {
        v.coords.iter().fold(S::zero(), |acc, c| {
            acc.plus(&c.magnitude().pow_real(self.p))
        })
    }

    /// Norm in the working scalar type, without the dimension check.
    pub(crate) fn norm_unchecked<S: Scalar>(&self, v: &Vector<S>) -> S {
        self.power_sum_unchecked(v).root(self.p)
    }

    pub(crate) fn distance_unchecked<S: Scalar>(&self, a: &Vector<S>, b: &Vector<S>) -> S {
        self.norm_unchecked(&a.minus(b))
    }

    pub fn norm<S: Scalar>(&self, v: &Vector<S>) -> Result<S> {
        self.check_dim(v)?;
        Ok(self.norm_unchecked(v))
    }

    pub fn distance<S: Scalar>(&self, a: &Vector<S>, b: &Vector<S>) -> Result<S> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok(self.distance_unchecked(a, b))
    }
}

/// A point of `ℝ^n`, stored in the scalar type of the computation.
#[derive(Clone, PartialEq)]
pub struct Vector<S = f64> {
    coords: Vec<S>,
}

impl<S: Scalar> Vector<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Vector { coords }
    }

    pub fn from_f64s(coords: &[f64]) -> Self {
        Vector {
            coords: coords.iter().map(|&c| S::from_f64(c)).collect(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Vector {
            coords: vec![S::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.coords.iter().map(Scalar::to_f64).collect()
    }

    pub fn plus(&self, rhs: &Self) -> Self {
        Vector {
            coords: zip_with(&self.coords, &rhs.coords, S::plus),
        }
    }

    pub fn minus(&self, rhs: &Self) -> Self {
        Vector {
            coords: zip_with(&self.coords, &rhs.coords, S::minus),
        }
    }

    pub fn scaled(&self, factor: &S) -> Self {
        Vector {
            coords: self.coords.iter().map(|c| c.times(factor)).collect(),
        }
    }

    pub fn midpoint(&self, rhs: &Self) -> Self {
        self.plus(rhs).scaled(&S::from_f64(0.5))
    }
}

fn zip_with<S>(a: &[S], b: &[S], f: impl Fn(&S, &S) -> S) -> Vec<S> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

impl Vector<f64> {
    pub fn x(&self) -> f64 {
        self.coords[0]
    }
}

impl From<Vec<f64>> for Vector<f64> {
    fn from(coords: Vec<f64>) -> Self {
        Vector { coords }
    }
}

impl<const N: usize> From<[f64; N]> for Vector<f64> {
    fn from(coords: [f64; N]) -> Self {
        Vector {
            coords: coords.to_vec(),
        }
    }
}

impl<S: Scalar> fmt::Debug for Vector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_f64s()).finish()
    }
}

/// Constants `(C, q)` with `δ(ε) ≥ C·ε^q` on `(0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTypeConstants {
    c: f64,
    q: f64,
}

impl PowerTypeConstants {
    pub fn new(c: f64, q: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(format!("C must be positive, got {c}")));
        }
        if !(q.is_finite() && q >= 2.0) {
            return Err(invalid(format!("q must satisfy q >= 2, got {q}")));
        }
        Ok(PowerTypeConstants { c, q })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `C·ε^q`.
    pub fn lower_bound(&self, eps: f64) -> f64 {
        self.c * eps.powf(self.q)
    }
}

/// `ℓ_p` power-type constants: `(1/(p·2^p), p)` for `p ≥ 2`, `((p−1)/8, 2)` below.
pub fn power_type_constants(p: f64) -> Result<PowerTypeConstants> {
    if !(p.is_finite() && p > 1.0) {
        return Err(invalid(format!("exponent p must satisfy p > 1, got {p}")));
    }
    if p >= 2.0 {
        PowerTypeConstants::new(1.0 / (p * 2f64.powf(p)), p)
    } else {
        PowerTypeConstants::new((p - 1.0) / 8.0, 2.0)
    }
}

/// `(Σ|v_i|^p)^{1/p}`.
pub fn lp_norm(space: &LpSpace, v: &Vector<f64>) -> Result<f64> {
    space.norm(v)
}

const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;

/// Modulus of convexity `δ_p(ε)` of the canonical ℓ_p norm.
///
/// For `p ≥ 2` this is the closed form `1 − (1 − (ε/2)^p)^{1/p}`, evaluated
/// through `expm1`/`ln_1p` so that values far below `f64::EPSILON` survive.
/// For `1 < p < 2` it is the unique root in `[0, 1]` of
/// `(1 − δ + ε/2)^p + |1 − δ − ε/2|^p = 2`, found by bisection.
pub fn modulus_of_convexity(p: f64, eps: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(invalid(format!("exponent p must satisfy p > 1, got {p}")));
    }
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(invalid(format!("eps must lie in (0, 2], got {eps}")));
    }
    if p >= 2.0 {
        let t = (eps / 2.0).powf(p);
        return Ok(-((-t).ln_1p() / p).exp_m1());
    }
    if eps == 2.0 {
        // The implicit equation has a double root at δ = 1 here, which
        // bisection would only resolve to about √ulp.
        return Ok(1.0);
    }
    let f = |delta: f64| modulus_residual(p, eps, delta);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if f(lo) <= 0.0 {
        return Ok(lo);
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        // Stop once the bracket is at the resolution of f64; that is well
        // inside BISECTION_TOL.
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= BISECTION_TOL {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::Numerical(format!(
            "bisection for delta_p(eps) with p={p}, eps={eps} did not converge"
        )))
    }
}

/// Left side minus right side of the implicit `1 < p < 2` modulus equation.
/// Strictly decreasing in `delta` on `[0, 1]`.
pub fn modulus_residual(p: f64, eps: f64, delta: f64) -> f64 {
    let h = eps / 2.0;
    (1.0 - delta + h).powf(p) + (1.0 - delta - h).abs().powf(p) - 2.0
}

/// Upper bound `(t/C)^{1/q}` for `δ^{-1}(t)` implied by `δ(ε) ≥ C·ε^q`.
pub fn inverse_modulus_bound(t: f64, consts: &PowerTypeConstants) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!(
            "t must be a finite nonnegative value, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok((t / consts.c()).powf(consts.q().recip()))
}

const CONVEXITY_REL_TOL: f64 = 1e-9;

/// Checks `‖(x+y)/2 − z‖ ≤ (1 − δ_p(r/R))·R` for an admissible configuration
/// (`‖x − z‖ ≤ R`, `‖y − z‖ ≤ R`, `‖x − y‖ ≥ r`, `0 ≤ r ≤ 2R`).
///
/// Returns `Err(Error::Precondition)` when the configuration is not admissible,
/// `Ok(false)` only when the inequality itself fails.
pub fn check_convexity_inequality(
    space: &LpSpace,
    x: &Vector,
    y: &Vector,
    z: &Vector,
    big_r: f64,
    r: f64,
) -> Result<bool> {
    Ok(convexity_inequality_sides(space, x, y, z, big_r, r)?.holds())
}

/// Both sides of the convexity inequality at one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexitySides {
    pub lhs: f64,
    pub rhs: f64,
}

impl ConvexitySides {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + CONVEXITY_REL_TOL * self.rhs.abs().max(self.lhs.abs()).max(1e-300)
    }
}

pub fn convexity_inequality_sides(
    space: &LpSpace,
    x: &Vector,
    y: &Vector,
    z: &Vector,
    big_r: f64,
    r: f64,
) -> Result<ConvexitySides> {
    for v in [x, y, z] {
        space.check_dim(v)?;
    }
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(Error::Precondition(format!(
            "R must be positive, got {big_r}"
        )));
    }
    if !(r >= 0.0 && r <= 2.0 * big_r * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!("r = {r} outside [0, 2R]")));
    }
    let slack = 1e-12 * big_r;
    let dxz = space.distance_unchecked(x, z);
    let dyz = space.distance_unchecked(y, z);
    let dxy = space.distance_unchecked(x, y);
    if dxz > big_r + slack {
        return Err(Error::Precondition(format!(
            "‖x − z‖ = {dxz} > R = {big_r}"
        )));
    }
    if dyz > big_r + slack {
        return Err(Error::Precondition(format!(
            "‖y − z‖ = {dyz} > R = {big_r}"
        )));
    }
    if dxy < r - slack {
        return Err(Error::Precondition(format!("‖x − y‖ = {dxy} < r = {r}")));
    }
    let ratio = (r / big_r).clamp(0.0, 2.0);
    let delta = if ratio == 0.0 {
        0.0
    } else {
        modulus_of_convexity(space.p(), ratio)?
    };
    let lhs = space.distance_unchecked(&x.midpoint(y), z);
    Ok(ConvexitySides {
        lhs,
        rhs: (1.0 - delta) * big_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(dim: usize, p: f64) -> LpSpace {
        LpSpace::new(dim, p).unwrap()
    }

    #[test]
    fn space_rejects_bad_parameters() {
        assert!(LpSpace::new(0, 2.0).is_err());
        assert!(LpSpace::new(2, 1.0).is_err());
        assert!(LpSpace::new(2, f64::NAN).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(lp_norm(&space(2, 2.0), &[3.0, 4.0].into()).unwrap(), 5.0);
        assert_eq!(lp_norm(&space(2, 7.0), &[2.0, 0.0].into()).unwrap(), 2.0);
        assert_eq!(
            lp_norm(&space(3, 1.5), &[0.0, 0.0, 0.0].into()).unwrap(),
            0.0
        );
        // Reference value from 50-digit decimal arithmetic.
        let d = lp_norm(&space(2, 2.0), &[1500.5, 12.0].into()).unwrap();
        assert!((d - 1_500.547_983_238_123_6).abs() < 1e-10, "{d}");
    }

    #[test]
    fn norm_dimension_mismatch() {
        let err = lp_norm(&space(3, 2.0), &[1.0, 2.0].into()).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn modulus_closed_form_examples() {
        assert_eq!(modulus_of_convexity(2.0, 2.0).unwrap(), 1.0);
        let d = modulus_of_convexity(2.0, 1.0).unwrap();
        assert!((d - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
        let d3 = modulus_of_convexity(3.0, 1.0).unwrap();
        assert!((d3 - (1.0 - (7.0f64 / 8.0).cbrt())).abs() < 1e-15);
    }

    /// Independent bisection on a different bracket with a plain midpoint loop.
    fn reference_root(p: f64, eps: f64) -> f64 {
        let (mut lo, mut hi) = (-0.5f64, 1.0f64);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            let h = eps / 2.0;
            let g = (1.0 - mid + h).powf(p) + (1.0 - mid - h).abs().powf(p) - 2.0;
            if g > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn modulus_implicit_branch_matches_reference_root() {
        let d = modulus_of_convexity(1.5, 1.0).unwrap();
        // Frozen from the reference bisection.
        assert!((d - 0.067_122_610_329_016_17).abs() < 1e-12, "{d}");
        assert!((d - reference_root(1.5, 1.0)).abs() < 1e-12);
        for &p in &[1.1, 1.3, 1.5, 1.9] {
            for &eps in &[0.01, 0.5, 1.0, 1.7] {
                let d = modulus_of_convexity(p, eps).unwrap();
                assert!(
                    (d - reference_root(p, eps)).abs() < 1e-12,
                    "p={p} eps={eps}"
                );
                assert!(modulus_residual(p, eps, d).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn modulus_at_two_is_one_for_all_p() {
        for &p in &[1.1, 1.5, 2.0, 3.0, 20.0] {
            let d = modulus_of_convexity(p, 2.0).unwrap();
            assert!((d - 1.0).abs() < 1e-12, "p={p}: {d}");
        }
    }

    #[test]
    fn modulus_rejects_out_of_range_eps() {
        assert!(modulus_of_convexity(2.0, 0.0).is_err());
        assert!(modulus_of_convexity(2.0, 2.5).is_err());
        assert!(modulus_of_convexity(2.0, -1.0).is_err());
        assert!(modulus_of_convexity(1.0, 1.0).is_err());
    }

    #[test]
    fn power_type_examples() {
        let c2 = power_type_constants(2.0).unwrap();
        assert_eq!((c2.c(), c2.q()), (0.125, 2.0));
        let c3 = power_type_constants(3.0).unwrap();
        assert!((c3.c() - 1.0 / 24.0).abs() < 1e-17);
        assert_eq!(c3.q(), 3.0);
        let c15 = power_type_constants(1.5).unwrap();
        assert_eq!((c15.c(), c15.q()), (0.0625, 2.0));
        // Both branches agree at the seam.
        let below = power_type_constants(2.0 - 1e-12).unwrap();
        assert!((below.c() - 0.125).abs() < 1e-12);
        assert!(power_type_constants(1.0).is_err());
    }

    #[test]
    fn inverse_bound_examples() {
        let c = PowerTypeConstants::new(0.125, 2.0).unwrap();
        assert_eq!(inverse_modulus_bound(0.0, &c).unwrap(), 0.0);
        assert!((inverse_modulus_bound(0.125, &c).unwrap() - 1.0).abs() < 1e-15);
        let c3 = PowerTypeConstants::new(1.0 / 24.0, 3.0).unwrap();
        let v = inverse_modulus_bound(0.5, &c3).unwrap();
        assert!((v - 12f64.cbrt()).abs() < 1e-14);
        assert!((v - 2.289_428_485_106_663_7).abs() < 1e-12);
        assert!(inverse_modulus_bound(-1.0, &c).is_err());
    }

    #[test]
    fn convexity_inequality_examples() {
        let s = space(2, 2.0);
        let o: Vector = [0.0, 0.0].into();
        assert!(check_convexity_inequality(&s, &o, &o, &o, 1.0, 0.0).unwrap());
        let sides =
            convexity_inequality_sides(&s, &[1.0, 0.0].into(), &[-1.0, 0.0].into(), &o, 1.0, 2.0)
                .unwrap();
        assert_eq!(sides.lhs, 0.0);
        assert_eq!(sides.rhs, 0.0);
        assert!(sides.holds());
    }

    #[test]
    fn convexity_precondition_is_distinct_from_failure() {
        let s = space(2, 2.0);
        let o: Vector = [0.0, 0.0].into();
        let far: Vector = [5.0, 0.0].into();
        let err = check_convexity_inequality(&s, &far, &o, &o, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let err = check_convexity_inequality(&s, &o, &o, &o, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn tiny_modulus_values_survive_for_large_p() {
        let c = power_type_constants(20.0).unwrap();
        let eps = 0.002;
        let d = modulus_of_convexity(20.0, eps).unwrap();
        assert!(d > 0.0);
        assert!(d >= c.lower_bound(eps));
    }
}
