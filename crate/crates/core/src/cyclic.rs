//! Cyclic maps `T : A ∪ B → A ∪ B` with declared contraction data, plus
//! sampling-based audits of those declarations.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::norms::{LpSpace, Vector};
use crate::scalar::Scalar;

pub type MapFn<S> = Arc<dyn Fn(&Vector<S>) -> Vector<S> + Send + Sync>;
pub type Membership<S> = Arc<dyn Fn(&Vector<S>) -> bool + Send + Sync>;

/// Which of the two sets a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    /// Side of the `step`-th iterate of an orbit started in `A`.
    pub fn of_step(step: usize) -> Side {
        if step % 2 == 0 {
            Side::A
        } else {
            Side::B
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

/// Axis-aligned box used for rejection sampling of a set.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SamplingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(invalid(
                "sampling box bounds must have equal, nonzero length",
            ));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite())
        {
            return Err(invalid(
                "sampling box needs finite bounds with lower <= upper",
            ));
        }
        Ok(SamplingBox { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn draw(&self, rng: &mut impl Rng) -> Vector {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| if l == u { l } else { rng.gen_range(l..=u) })
            .collect::<Vec<_>>()
            .into()
    }
}

/// Draws per requested sample before giving up on hitting a set.
const REJECTION_RETRY_CAP: usize = 100_000;

/// A cyclic map with its declared contraction coefficient `k` and set
/// distance `d = dist(A, B)`.
///
/// `k` and `d` are declarations; [`verify_cyclicity`], [`verify_contraction`]
/// and [`lemma21_check`] audit them empirically.
pub struct CyclicMapSpec<S: Scalar = f64> {
    name: String,
    space: LpSpace,
    k: f64,
    d: f64,
    apply: MapFn<S>,
    in_a: Membership<S>,
    in_b: Membership<S>,
    sampling: Option<(SamplingBox, SamplingBox)>,
    best_proximity: Option<Vector<f64>>,
}

impl<S: Scalar> Clone for CyclicMapSpec<S> {
    fn clone(&self) -> Self {
        CyclicMapSpec {
            name: self.name.clone(),
            space: self.space,
            k: self.k,
            d: self.d,
            apply: Arc::clone(&self.apply),
            in_a: Arc::clone(&self.in_a),
            in_b: Arc::clone(&self.in_b),
            sampling: self.sampling.clone(),
            best_proximity: self.best_proximity.clone(),
        }
    }
}

impl<S: Scalar> fmt::Debug for CyclicMapSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CyclicMapSpec")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("k", &self.k)
            .field("d", &self.d)
            .finish_non_exhaustive()
    }
}

impl<S: Scalar> CyclicMapSpec<S> {
    pub fn new(
        name: impl Into<String>,
        space: LpSpace,
        k: f64,
        d: f64,
        apply: impl Fn(&Vector<S>) -> Vector<S> + Send + Sync + 'static,
        in_a: impl Fn(&Vector<S>) -> bool + Send + Sync + 'static,
        in_b: impl Fn(&Vector<S>) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        validate_k(k)?;
        if !(d >= 0.0 && d.is_finite()) {
            return Err(invalid(format!(
                "set distance d must be finite and >= 0, got {d}"
            )));
        }
        Ok(CyclicMapSpec {
            name: name.into(),
            space,
            k,
            d,
            apply: Arc::new(apply),
            in_a: Arc::new(in_a),
            in_b: Arc::new(in_b),
            sampling: None,
            best_proximity: None,
        })
    }

    /// Boxes from which points of `A` and `B` are rejection-sampled.
    pub fn with_sampling(mut self, box_a: SamplingBox, box_b: SamplingBox) -> Result<Self> {
        if box_a.dim() != self.space.dim() || box_b.dim() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                found: box_a.dim().max(box_b.dim()),
            });
        }
        self.sampling = Some((box_a, box_b));
        Ok(self)
    }

    /// Records a known exact best proximity point in `A`.
    pub fn with_best_proximity(mut self, xi: Vector<f64>) -> Result<Self> {
        self.space.check_dim(&xi)?;
        self.best_proximity = Some(xi);
        Ok(self)
    }

    /// Same map with a different declared coefficient. Useful for negative
    /// controls: the audits should reject a wrong declaration.
    pub fn with_declared_k(mut self, k: f64) -> Result<Self> {
        validate_k(k)?;
        self.k = k;
        Ok(self)
    }

    pub fn with_declared_d(mut self, d: f64) -> Result<Self> {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(invalid(format!(
                "set distance d must be finite and >= 0, got {d}"
            )));
        }
        self.d = d;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &LpSpace {
        &self.space
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn sampling(&self) -> Option<&(SamplingBox, SamplingBox)> {
        self.sampling.as_ref()
    }

    pub fn known_best_proximity(&self) -> Option<&Vector<f64>> {
        self.best_proximity.as_ref()
    }

    pub fn in_a(&self, x: &Vector<S>) -> bool {
        x.dim() == self.space.dim() && (self.in_a)(x)
    }

    pub fn in_b(&self, x: &Vector<S>) -> bool {
        x.dim() == self.space.dim() && (self.in_b)(x)
    }

    pub fn side_of(&self, x: &Vector<S>) -> Option<Side> {
        if self.in_a(x) {
            Some(Side::A)
        } else if self.in_b(x) {
            Some(Side::B)
        } else {
            None
        }
    }

    /// `Tx`.
    pub fn apply(&self, x: &Vector<S>) -> Result<Vector<S>> {
        self.space.check_dim(x)?;
        Ok((self.apply)(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Vector<S>) -> Vector<S> {
        (self.apply)(x)
    }

    /// Error unless `d > 0`, which the error bounds need to stay finite.
    pub fn require_positive_distance(&self) -> Result<()> {
        if self.d > 0.0 {
            Ok(())
        } else {
            Err(invalid(format!(
                "the error bounds need dist(A, B) > 0; map '{}' declares d = {}",
                self.name, self.d
            )))
        }
    }

    /// Error unless `x` lies in `A`.
    pub fn require_in_a(&self, x: &Vector<S>) -> Result<()> {
        self.space.check_dim(x)?;
        if self.in_a(x) {
            Ok(())
        } else {
            Err(invalid(format!("start point {x:?} is not in A")))
        }
    }
}

fn validate_k(k: f64) -> Result<()> {
    if k > 0.0 && k < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "contraction coefficient k must lie in (0, 1), got {k}"
        )))
    }
}

/// `Tx` for the given map.
pub fn apply_map<S: Scalar>(map: &CyclicMapSpec<S>, x: &Vector<S>) -> Result<Vector<S>> {
    map.apply(x)
}

/// Parameters of the planar example map
/// `T(x, y) = (−((1 − λ)·sign(x) + λx), −λy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1Params {
    lambda: f64,
    p: f64,
}

impl Example1Params {
    pub fn new(lambda: f64, p: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(invalid(format!("lambda must lie in (0, 1), got {lambda}")));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(invalid(format!("exponent p must satisfy p > 1, got {p}")));
        }
        Ok(Example1Params { lambda, p })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Half-width of the square sampling window for the example sets.
pub const EXAMPLE1_SAMPLING_EXTENT: f64 = 1000.0;

/// The planar example on `ℝ²_p`:
///
/// * `A = {y − x + 1 ≤ 0, y + x − 1 ≥ 0}`, the cone `|y| ≤ x − 1`,
/// * `B = {y − x − 1 ≥ 0, y + x + 1 ≤ 0}`, its mirror image `|y| ≤ −x − 1`,
/// * `dist(A, B) = 2` for every `p`, attained at `e₁ = (1, 0)` and `−e₁`,
/// * `k = λ`, and `e₁` is the best proximity point in `A`.
pub fn make_example1<S: Scalar>(params: Example1Params) -> Result<CyclicMapSpec<S>> {
    let lambda = params.lambda;
    let space = LpSpace::new(2, params.p)?;
    let lam = S::from_f64(lambda);
    let one_minus_lam = S::from_f64(1.0 - lambda);
    let one = S::from_f64(1.0);
    let zero = S::zero();

    let apply = move |v: &Vector<S>| {
        let [x, y] = [&v.coords()[0], &v.coords()[1]];
        let nx = one_minus_lam.times(&x.sign()).plus(&lam.times(x)).negated();
        let ny = lam.times(y).negated();
        Vector::new(vec![nx, ny])
    };
    let (one_a, zero_a) = (one.clone(), zero.clone());
    let in_a = move |v: &Vector<S>| {
        let [x, y] = [&v.coords()[0], &v.coords()[1]];
        y.minus(x).plus(&one_a) <= zero_a && y.plus(x).minus(&one_a) >= zero_a
    };
    let in_b = move |v: &Vector<S>| {
        let [x, y] = [&v.coords()[0], &v.coords()[1]];
        y.minus(x).minus(&one) >= zero && y.plus(x).plus(&one) <= zero
    };

    let e = EXAMPLE1_SAMPLING_EXTENT;
    CyclicMapSpec::new(
        format!("example1(lambda={lambda}, p={})", params.p),
        space,
        lambda,
        2.0,
        apply,
        in_a,
        in_b,
    )?
    .with_sampling(
        SamplingBox::new(vec![1.0, -e], vec![e, e])?,
        SamplingBox::new(vec![-e, -e], vec![-1.0, e])?,
    )?
    .with_best_proximity([1.0, 0.0].into())
}

fn sampler(map: &CyclicMapSpec<f64>) -> Result<&(SamplingBox, SamplingBox)> {
    map.sampling().ok_or_else(|| {
        Error::Configuration(format!(
            "map '{}' has no sampling boxes for A and B",
            map.name()
        ))
    })
}

/// Rejection-samples one point of the requested set.
pub fn sample_point(map: &CyclicMapSpec<f64>, side: Side, rng: &mut impl Rng) -> Result<Vector> {
    let (box_a, box_b) = sampler(map)?;
    let (bx, member): (&SamplingBox, &dyn Fn(&Vector) -> bool) = match side {
        Side::A => (box_a, &|v| map.in_a(v)),
        Side::B => (box_b, &|v| map.in_b(v)),
    };
    for _ in 0..REJECTION_RETRY_CAP {
        let v = bx.draw(rng);
        if member(&v) {
            return Ok(v);
        }
    }
    Err(Error::Configuration(format!(
        "no point of {side} found in {REJECTION_RETRY_CAP} draws from its sampling box"
    )))
}

/// Deterministic `count` points of `side` for the given seed.
pub fn sample_points(
    map: &CyclicMapSpec<f64>,
    side: Side,
    count: usize,
    seed: u64,
) -> Result<Vec<Vector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| sample_point(map, side, &mut rng))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CyclicityViolation {
    pub from: Side,
    pub point: Vector,
    pub image: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CyclicityReport {
    pub samples_per_set: usize,
    pub violations: Vec<CyclicityViolation>,
}

impl CyclicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `A` and `B` and checks `T(A) ⊆ B`, `T(B) ⊆ A`.
pub fn verify_cyclicity(
    map: &CyclicMapSpec<f64>,
    sample_count: usize,
    seed: u64,
) -> Result<CyclicityReport> {
    if sample_count == 0 {
        return Err(invalid("sample_count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for side in [Side::A, Side::B] {
        for _ in 0..sample_count {
            let point = sample_point(map, side, &mut rng)?;
            let image = map.apply_unchecked(&point);
            let lands = match side {
                Side::A => map.in_b(&image),
                Side::B => map.in_a(&image),
            };
            if !lands {
                violations.push(CyclicityViolation {
                    from: side,
                    point,
                    image,
                });
            }
        }
    }
    Ok(CyclicityReport {
        samples_per_set: sample_count,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub pairs: usize,
    /// Largest `‖Tx − Ty‖ − (k‖x − y‖ + (1 − k)d)` over the sampled pairs.
    pub max_violation: f64,
    /// Pair attaining `max_violation`.
    pub worst_pair: Option<(Vector, Vector)>,
    pub failures: usize,
}

impl ContractionReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Excess of `‖Tx − Ty‖` over `k‖x − y‖ + (1 − k)d` for one pair.
pub fn contraction_excess(map: &CyclicMapSpec<f64>, x: &Vector, y: &Vector) -> Result<f64> {
    let space = map.space();
    let lhs = space.distance(&map.apply(x)?, &map.apply(y)?)?;
    let dxy = space.distance(x, y)?;
    Ok(lhs - (map.k() * dxy + (1.0 - map.k()) * map.d()))
}

/// Samples pairs `x ∈ A`, `y ∈ B` and checks the cyclic contraction
/// inequality, with tolerance `1e-9·(1 + ‖x − y‖)`.
pub fn verify_contraction(
    map: &CyclicMapSpec<f64>,
    sample_count: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if sample_count == 0 {
        return Err(invalid("sample_count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ContractionReport {
        pairs: sample_count,
        max_violation: f64::NEG_INFINITY,
        worst_pair: None,
        failures: 0,
    };
    for _ in 0..sample_count {
        let x = sample_point(map, Side::A, &mut rng)?;
        let y = sample_point(map, Side::B, &mut rng)?;
        let excess = contraction_excess(map, &x, &y)?;
        let dxy = map.space().distance_unchecked(&x, &y);
        if excess > 1e-9 * (1.0 + dxy) {
            report.failures += 1;
        }
        if excess > report.max_violation {
            report.max_violation = excess;
            report.worst_pair = Some((x, y));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma21Step {
    pub n: usize,
    /// `ρ(Tⁿx, Tⁿ⁺¹x) − d`.
    pub gap: f64,
    /// `kⁿ(ρ(x, Tx) − d)`.
    pub envelope: f64,
    /// `ρ(Tⁿx, Tⁿ⁺¹x)`.
    pub displacement: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma21Report {
    pub steps: Vec<Lemma21Step>,
}

impl Lemma21Report {
    pub fn passed(&self) -> bool {
        self.steps.iter().all(|s| s.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Lemma21Step> {
        self.steps.iter().filter(|s| !s.holds)
    }
}

/// Checks `ρ(Tⁿx, Tⁿ⁺¹x) − d ≤ kⁿ(ρ(x, Tx) − d)` and `ρ(Tⁿx, Tⁿ⁺¹x) ≥ d`
/// for `n = 0..=n_max` along the orbit of `x0`.
pub fn lemma21_check<S: Scalar>(
    map: &CyclicMapSpec<S>,
    x0: &Vector<S>,
    n_max: usize,
) -> Result<Lemma21Report> {
    map.space().check_dim(x0)?;
    if map.side_of(x0).is_none() {
        return Err(invalid(format!("start point {x0:?} is not in A ∪ B")));
    }
    if n_max == 0 {
        return Err(invalid("n_max must be at least 1"));
    }
    let space = map.space();
    let d = S::from_f64(map.d());
    let k = map.k();
    let mut current = x0.clone();
    let mut next = map.apply_unchecked(&current);
    let initial_gap = space.distance_unchecked(&current, &next).minus(&d).to_f64();
    let mut steps = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let dist = space.distance_unchecked(&current, &next);
        let gap = dist.minus(&d).to_f64();
        let envelope = k.powi(n as i32) * initial_gap;
        let tol = 1e-9 * (map.d() + envelope.abs());
        let holds = gap <= envelope + tol && gap >= -1e-9;
        steps.push(Lemma21Step {
            n,
            gap,
            envelope,
            displacement: dist.to_f64(),
            holds,
        });
        current = next;
        next = map.apply_unchecked(&current);
    }
    Ok(Lemma21Report { steps })
}
