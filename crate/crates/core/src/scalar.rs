//! Scalar arithmetic backends.
//!
//! Iterating a cyclic contraction drives the displacement `‖x − Tx‖` toward
//! the set distance `d`, and the error bounds depend on the excess
//! `‖x − Tx‖ − d` through a `q`-th root. Once that excess falls below the
//! resolution of `f64` near `d`, double precision reports it as zero and the
//! bounds collapse. [`Extended`] carries enough bits to keep resolving the
//! excess for orbits of several hundred steps.

use std::cell::{Cell, RefCell};
use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode, Word};

/// Minimal real-number interface needed by the orbit machinery.
pub trait Scalar: Clone + fmt::Debug + PartialOrd + Send + Sync + 'static {
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;

    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;
    fn magnitude(&self) -> Self;

    /// Sign with `sign(0) = 0`.
    fn sign(&self) -> Self;

    /// `self^exponent` for `self ≥ 0`.
    fn pow_real(&self, exponent: f64) -> Self;

    /// `self^(1/degree)` for `self ≥ 0`.
    fn root(&self, degree: f64) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn negated(&self) -> Self {
        -self
    }

    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn sign(&self) -> Self {
        if *self > 0.0 {
            1.0
        } else if *self < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    fn pow_real(&self, exponent: f64) -> Self {
        match small_integer(exponent) {
            Some(n) => self.powi(n as i32),
            None => self.powf(exponent),
        }
    }

    fn root(&self, degree: f64) -> Self {
        if degree == 1.0 {
            *self
        } else if degree == 2.0 {
            self.sqrt()
        } else {
            self.powf(degree.recip())
        }
    }
}

/// Default working precision of [`Extended`], in bits.
pub const EXTENDED_PRECISION_BITS: usize = 1280;
/// Smallest precision accepted by [`with_extended_precision`].
pub const MIN_EXTENDED_PRECISION_BITS: usize = 64;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("astro-float constant cache"));
    static PRECISION: Cell<usize> = const { Cell::new(EXTENDED_PRECISION_BITS) };
}

/// Precision used by [`Extended`] operations on the current thread.
pub fn extended_precision() -> usize {
    PRECISION.with(Cell::get)
}

/// Runs `f` with [`Extended`] operations on this thread rounded to `bits`
/// (at least [`MIN_EXTENDED_PRECISION_BITS`]), restoring the previous
/// precision afterwards.
pub fn with_extended_precision<R>(bits: usize, f: impl FnOnce() -> R) -> R {
    struct Restore(usize);
    impl Drop for Restore {
        fn drop(&mut self) {
            PRECISION.with(|c| c.set(self.0));
        }
    }
    let _restore = Restore(PRECISION.with(|c| c.replace(bits.max(MIN_EXTENDED_PRECISION_BITS))));
    f()
}

/// Bits needed to resolve a relative offset `rel` from a value of order one
/// with a further 64-bit margin, capped at [`EXTENDED_PRECISION_BITS`].
pub fn bits_to_resolve(rel: f64) -> usize {
    if !(rel > 0.0) || !rel.is_finite() {
        return EXTENDED_PRECISION_BITS;
    }
    let bits = (-rel.log2()).max(0.0).ceil() as usize + 64;
    bits.clamp(MIN_EXTENDED_PRECISION_BITS, EXTENDED_PRECISION_BITS)
}

/// Binary floating point with [`extended_precision`] bits of mantissa
/// ([`EXTENDED_PRECISION_BITS`] unless overridden).
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Extended(BigFloat);

impl Extended {
    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    fn wrap(v: BigFloat) -> Self {
        debug_assert!(!v.is_nan(), "extended arithmetic produced NaN");
        Extended(v)
    }
}

impl fmt::Debug for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Extended({:e})", self.to_f64())
    }
}

impl Scalar for Extended {
    fn from_f64(v: f64) -> Self {
        Extended(BigFloat::from_f64(v, extended_precision()))
    }

    fn to_f64(&self) -> f64 {
        big_to_f64(&self.0)
    }

    fn plus(&self, rhs: &Self) -> Self {
        Self::wrap(self.0.add(&rhs.0, extended_precision(), RM))
    }

    fn minus(&self, rhs: &Self) -> Self {
        Self::wrap(self.0.sub(&rhs.0, extended_precision(), RM))
    }

    fn times(&self, rhs: &Self) -> Self {
        Self::wrap(self.0.mul(&rhs.0, extended_precision(), RM))
    }

    fn negated(&self) -> Self {
        Extended(self.0.neg())
    }

    fn magnitude(&self) -> Self {
        Extended(self.0.abs())
    }

    fn sign(&self) -> Self {
        if self.0.is_zero() {
            Self::zero()
        } else if self.0.is_negative() {
            Self::from_f64(-1.0)
        } else {
            Self::from_f64(1.0)
        }
    }

    fn pow_real(&self, exponent: f64) -> Self {
        if self.0.is_zero() {
            return if exponent == 0.0 {
                Self::from_f64(1.0)
            } else {
                Self::zero()
            };
        }
        if let Some(n) = small_integer(exponent) {
            return Self::wrap(self.0.powi(n as usize, extended_precision(), RM));
        }
        let e = BigFloat::from_f64(exponent, extended_precision());
        CONSTS.with(|cc| {
            Self::wrap(
                self.0
                    .pow(&e, extended_precision(), RM, &mut cc.borrow_mut()),
            )
        })
    }

    fn root(&self, degree: f64) -> Self {
        if self.0.is_zero() || degree == 1.0 {
            return self.clone();
        }
        if degree == 2.0 {
            return Self::wrap(self.0.sqrt(extended_precision(), RM));
        }
        let e =
            BigFloat::from_f64(degree, extended_precision()).reciprocal(extended_precision(), RM);
        CONSTS.with(|cc| {
            Self::wrap(
                self.0
                    .pow(&e, extended_precision(), RM, &mut cc.borrow_mut()),
            )
        })
    }
}

/// Integer exponents in `1..=64` take the repeated-squaring path.
fn small_integer(e: f64) -> Option<u32> {
    if e.fract() == 0.0 && (1.0..=64.0).contains(&e) {
        Some(e as u32)
    } else {
        None
    }
}

/// Rounds to the nearest `f64` using the leading 64 mantissa bits.
fn big_to_f64(v: &BigFloat) -> f64 {
    if v.is_nan() {
        return f64::NAN;
    }
    if v.is_inf_pos() {
        return f64::INFINITY;
    }
    if v.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, _, exponent, _)) = v.as_raw_parts() else {
        return f64::NAN;
    };
    if v.is_zero() || words.is_empty() {
        return 0.0;
    }
    // Mantissa is 0.m with the most significant word last.
    let bits = Word::BITS as i32;
    let mut top: u64 = 0;
    let mut taken = 0;
    for w in words.iter().rev() {
        if taken + bits > 64 {
            break;
        }
        top = top.checked_shl(bits as u32).unwrap_or(0) | *w;
        taken += bits;
    }
    let mag = scale_by_pow2(top as f64, exponent - taken);
    if v.is_negative() {
        -mag
    } else {
        mag
    }
}

fn scale_by_pow2(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return 0.0;
        }
    }
    x * 2f64.powi(e)
}
