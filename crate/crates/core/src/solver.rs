//! Picard iteration for cyclic contractions together with the a priori and
//! a posteriori error bounds on the even iterates `T^{2n}x`.
//!
//! With `D = ‖x − Tx‖`, `P = ‖T^{2n−1}x − T^{2n}x‖` and power-type constants
//! `(C, q)` of the norm, the distance from `T^{2n}x` to the best proximity
//! point `ξ` is at most
//!
//! ```text
//! a priori:      D / (1 − k^{2/q}) · ((D − d)/(C·d))^{1/q} · k^{2n/q}
//! a posteriori:  P / (1 − k^{2/q}) · ((P − d)/(C·d))^{1/q} · k^{1/q}
//! ```

use thiserror::Error as ThisError;

use crate::cyclic::{CyclicMapSpec, Side};
use crate::error::{invalid, Error, Result};
use crate::norms::{modulus_of_convexity, LpSpace, PowerTypeConstants, Vector};
use crate::scalar::Scalar;

/// Negative excesses `‖u − v‖ − d` down to this multiple of `max(1, d)` are
/// treated as round-off and clamped to zero.
pub const EXCESS_ROUNDOFF: f64 = 1e-12;

/// Contraction data shared by both bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    d: f64,
    k: f64,
    consts: PowerTypeConstants,
}

impl BoundParams {
    pub fn new(d: f64, k: f64, consts: PowerTypeConstants) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(invalid(format!(
                "the error bounds need dist(A, B) = d > 0, got d = {d}"
            )));
        }
        if !(k > 0.0 && k < 1.0) {
            return Err(invalid(format!("k must lie in (0, 1), got {k}")));
        }
        Ok(BoundParams { d, k, consts })
    }

    pub fn for_map<S: Scalar>(map: &CyclicMapSpec<S>) -> Result<Self> {
        map.require_positive_distance()?;
        BoundParams::new(map.d(), map.k(), map.space().constants())
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn consts(&self) -> PowerTypeConstants {
        self.consts
    }

    /// `k^{1/q}`, the per-step rate of the bounds.
    pub fn rate(&self) -> f64 {
        self.k.powf(self.consts.q().recip())
    }

    /// `k^{2/q}`, the ratio between consecutive a priori bounds.
    pub fn even_step_ratio(&self) -> f64 {
        self.k.powf(2.0 / self.consts.q())
    }

    /// `P / (1 − k^{2/q}) · ((P − d)/(C·d))^{1/q}`, shared by both bounds.
    fn prefactor(&self, disp: &Displacement) -> Result<f64> {
        let excess = disp.clamped_excess(self.d)?;
        if excess == 0.0 {
            return Ok(0.0);
        }
        let q = self.consts.q();
        let root = (excess / (self.consts.c() * self.d)).powf(q.recip());
        Ok(disp.value / (1.0 - self.even_step_ratio()) * root)
    }

    /// A priori bound on `‖T^{2n}x − ξ‖` from the initial displacement.
    pub fn apriori(&self, initial: &Displacement, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(invalid("the a priori bound is defined for n >= 1"));
        }
        let pre = self.prefactor(initial)?;
        if pre == 0.0 {
            return Ok(0.0);
        }
        Ok(pre * self.k.powf(2.0 * n as f64 / self.consts.q()))
    }

    /// A posteriori bound on `‖T^{2n}x − ξ‖` from `‖T^{2n−1}x − T^{2n}x‖`.
    pub fn aposteriori(&self, last: &Displacement) -> Result<f64> {
        Ok(self.prefactor(last)? * self.rate())
    }

    /// Excess `P − d` at which the a posteriori bound reaches `eps` when
    /// `P ≈ d`: `C·d·(eps·(1 − k^{2/q}) / (d·k^{1/q}))^q`. Orbits must resolve
    /// excesses of this size to stop at `eps`.
    pub fn excess_at_aposteriori(&self, eps: f64) -> f64 {
        let q = self.consts.q();
        let scaled = eps * (1.0 - self.even_step_ratio()) / (self.d * self.rate());
        self.consts.c() * self.d * scaled.powf(q)
    }

    /// Smallest even `2n ≥ 2` whose a priori bound is `< eps`.
    pub fn apriori_steps(&self, initial: &Displacement, eps: f64) -> Result<usize> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid(format!("eps must be positive, got {eps}")));
        }
        let pre = self.prefactor(initial)?;
        if pre == 0.0 {
            return Ok(2);
        }
        // pre·k^{2n/q} < eps  ⇔  n > q·ln(pre/eps) / (2·ln(1/k))
        let threshold = self.consts.q() * (pre / eps).ln() / (2.0 * self.k.recip().ln());
        if !threshold.is_finite() || threshold > 1e12 {
            return Err(Error::Numerical(format!(
                "a priori step estimate {threshold} is out of range"
            )));
        }
        let mut n = if threshold < 1.0 {
            1
        } else {
            threshold.floor() as usize + 1
        };
        while self.apriori(initial, n)? >= eps {
            n += 1;
        }
        while n > 1 && self.apriori(initial, n - 1)? < eps {
            n -= 1;
        }
        Ok(2 * n)
    }
}

/// Distance between two consecutive iterates together with its excess over
/// the set distance.
///
/// The excess is measured in the working precision of the orbit, so it stays
/// meaningful after `value` itself has rounded to `d` in `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub value: f64,
    pub excess: f64,
}

impl Displacement {
    /// From a plain `f64` distance; the excess is `value − d`.
    pub fn from_value(value: f64, d: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(invalid(format!(
                "displacement must be finite and >= 0, got {value}"
            )));
        }
        Ok(Displacement {
            value,
            excess: value - d,
        })
    }

    /// Measures `‖a − b‖` against `d` through the sums of p-th powers: with
    /// `t = (Σ|aᵢ − bᵢ|^p − d^p)/d^p` formed in the working precision, the
    /// excess is `d·((1 + t)^{1/p} − 1)`, finished in `f64` via `ln_1p` and
    /// `exp_m1`. This keeps the full relative accuracy of the excess without
    /// taking a p-th root in the working precision.
    /// `d_pow` must equal `d^p`; traces compute it once.
    pub(crate) fn measure<S: Scalar>(
        space: &LpSpace,
        a: &Vector<S>,
        b: &Vector<S>,
        d: &S,
        d_pow: &S,
    ) -> Self {
        let p = space.p();
        let d_pow_f = d_pow.to_f64();
        if !(d_pow_f > 0.0 && d_pow_f.is_finite()) {
            let dist = space.distance_unchecked(a, b);
            return Displacement {
                excess: dist.minus(d).to_f64(),
                value: dist.to_f64(),
            };
        }
        let t = space.power_sum_unchecked(&a.minus(b)).minus(d_pow).to_f64() / d_pow_f;
        let d_f = d.to_f64();
        let log_ratio = t.ln_1p() / p;
        Displacement {
            value: d_f * log_ratio.exp(),
            excess: d_f * log_ratio.exp_m1(),
        }
    }

    fn clamped_excess(&self, d: f64) -> Result<f64> {
        if self.excess >= 0.0 {
            Ok(self.excess)
        } else if self.excess >= -EXCESS_ROUNDOFF * d.max(1.0) {
            Ok(0.0)
        } else {
            Err(invalid(format!(
                "displacement {} is below the set distance {d}",
                self.value
            )))
        }
    }
}

/// A priori bound `D/(1 − k^{2/q}) · ((D − d)/(C·d))^{1/q} · k^{2n/q}`.
pub fn apriori_bound(
    initial: f64,
    d: f64,
    k: f64,
    consts: &PowerTypeConstants,
    n: usize,
) -> Result<f64> {
    let params = BoundParams::new(d, k, *consts)?;
    params.apriori(&Displacement::from_value(initial, d)?, n)
}

/// A posteriori bound `P/(1 − k^{2/q}) · ((P − d)/(C·d))^{1/q} · k^{1/q}`.
pub fn aposteriori_bound(last: f64, d: f64, k: f64, consts: &PowerTypeConstants) -> Result<f64> {
    let params = BoundParams::new(d, k, *consts)?;
    params.aposteriori(&Displacement::from_value(last, d)?)
}

/// Smallest even step count `2n` at which the a priori bound drops below `eps`.
pub fn apriori_steps_needed(
    initial: f64,
    d: f64,
    k: f64,
    consts: &PowerTypeConstants,
    eps: f64,
) -> Result<usize> {
    let params = BoundParams::new(d, k, *consts)?;
    params.apriori_steps(&Displacement::from_value(initial, d)?, eps)
}

/// Both bounds at the even step `2n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    pub step: usize,
    pub apriori: f64,
    pub aposteriori: f64,
}

/// Whether a trace keeps every iterate or only the most recent ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMode {
    #[default]
    Full,
    DisplacementsOnly,
}

/// The orbit `x₀, Tx₀, T²x₀, …` with displacements and per-even-step budgets.
#[derive(Debug, Clone)]
pub struct IterationTrace<S: Scalar = f64> {
    space: LpSpace,
    params: BoundParams,
    d: S,
    /// `d^p` in the working precision.
    d_pow: S,
    mode: TraceMode,
    x0: Vector<S>,
    iterates: Vec<Vector<S>>,
    last: Vector<S>,
    displacements: Vec<Displacement>,
    budgets: Vec<ErrorBudget>,
}

impl<S: Scalar> IterationTrace<S> {
    fn start(space: LpSpace, params: BoundParams, x0: Vector<S>, mode: TraceMode) -> Self {
        let iterates = match mode {
            TraceMode::Full => vec![x0.clone()],
            TraceMode::DisplacementsOnly => Vec::new(),
        };
        let d = S::from_f64(params.d());
        IterationTrace {
            space,
            params,
            d_pow: d.pow_real(space.p()),
            d,
            mode,
            last: x0.clone(),
            x0,
            iterates,
            displacements: Vec::new(),
            budgets: Vec::new(),
        }
    }

    fn advance(&mut self, map: &CyclicMapSpec<S>) -> Result<()> {
        let next = map.apply_unchecked(&self.last);
        let disp = Displacement::measure(&self.space, &self.last, &next, &self.d, &self.d_pow);
        self.displacements.push(disp);
        if self.mode == TraceMode::Full {
            self.iterates.push(next.clone());
        }
        self.last = next;
        let step = self.steps();
        if step % 2 == 0 {
            let budget = self.compute_budget(step / 2)?;
            self.budgets.push(budget);
        }
        Ok(())
    }

    fn compute_budget(&self, n: usize) -> Result<ErrorBudget> {
        Ok(ErrorBudget {
            step: 2 * n,
            apriori: self.params.apriori(&self.displacements[0], n)?,
            aposteriori: self.params.aposteriori(&self.displacements[2 * n - 1])?,
        })
    }

    /// Number of map applications performed.
    pub fn steps(&self) -> usize {
        self.displacements.len()
    }

    pub fn mode(&self) -> TraceMode {
        self.mode
    }

    pub fn space(&self) -> &LpSpace {
        &self.space
    }

    pub fn params(&self) -> &BoundParams {
        &self.params
    }

    pub fn x0(&self) -> &Vector<S> {
        &self.x0
    }

    /// The most recent iterate `T^{steps}x₀`.
    pub fn last(&self) -> &Vector<S> {
        &self.last
    }

    /// All iterates `x₀, …, x_steps` (empty in displacement-only mode).
    pub fn iterates(&self) -> &[Vector<S>] {
        &self.iterates
    }

    pub fn iterate(&self, i: usize) -> Option<&Vector<S>> {
        if i == self.steps() {
            return Some(&self.last);
        }
        self.iterates.get(i)
    }

    /// `displacements()[i]` is `‖x_i − x_{i+1}‖`.
    pub fn displacements(&self) -> &[Displacement] {
        &self.displacements
    }

    /// Budgets at the even steps `2, 4, …`.
    pub fn budgets(&self) -> &[ErrorBudget] {
        &self.budgets
    }

    /// `P_{n,m} = ‖Tⁿx − Tᵐx‖`, available in full mode.
    pub fn p_nm(&self, n: usize, m: usize) -> Option<f64> {
        Some(self.distance(n, m)?.to_f64())
    }

    /// `S_{n,m} = ‖Tⁿx − Tᵐx‖ − d`, evaluated in the working precision.
    pub fn s_nm(&self, n: usize, m: usize) -> Option<f64> {
        if m == n + 1 {
            return self.displacements.get(n).map(|disp| disp.excess);
        }
        Some(self.distance(n, m)?.minus(&self.d).to_f64())
    }

    fn distance(&self, n: usize, m: usize) -> Option<S> {
        let a = self.iterate(n)?;
        let b = self.iterate(m)?;
        Some(self.space.distance_unchecked(a, b))
    }
}

/// Runs `steps` Picard iterations from `x0 ∈ A`.
pub fn picard_iterate<S: Scalar>(
    map: &CyclicMapSpec<S>,
    x0: &Vector<S>,
    steps: usize,
) -> Result<IterationTrace<S>> {
    picard_iterate_with(map, x0, steps, TraceMode::Full)
}

pub fn picard_iterate_with<S: Scalar>(
    map: &CyclicMapSpec<S>,
    x0: &Vector<S>,
    steps: usize,
    mode: TraceMode,
) -> Result<IterationTrace<S>> {
    if steps == 0 {
        return Err(invalid("steps must be at least 1"));
    }
    let mut trace = begin(map, x0, mode)?;
    for _ in 0..steps {
        trace.advance(map)?;
    }
    Ok(trace)
}

fn begin<S: Scalar>(
    map: &CyclicMapSpec<S>,
    x0: &Vector<S>,
    mode: TraceMode,
) -> Result<IterationTrace<S>> {
    let params = BoundParams::for_map(map)?;
    map.require_in_a(x0)?;
    Ok(IterationTrace::start(
        *map.space(),
        params,
        x0.clone(),
        mode,
    ))
}

/// Both bounds at step `2n` of an existing trace.
pub fn error_budget_at<S: Scalar>(trace: &IterationTrace<S>, n: usize) -> Result<ErrorBudget> {
    if n == 0 {
        return Err(invalid("budgets are defined for n >= 1"));
    }
    if trace.steps() < 2 * n {
        return Err(invalid(format!(
            "trace has {} steps, step {} requested",
            trace.steps(),
            2 * n
        )));
    }
    trace.compute_budget(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopKind {
    APriori,
    APosteriori,
    MaxSteps,
}

/// When to stop iterating. Stopping tests are strict: `bound < epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    kind: StopKind,
    epsilon: f64,
    max_steps: usize,
}

pub const DEFAULT_MAX_STEPS: usize = 20_000;

impl StopRule {
    pub fn new(kind: StopKind, epsilon: f64, max_steps: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        if max_steps < 2 || max_steps % 2 != 0 {
            return Err(invalid(format!(
                "max_steps must be even and at least 2, got {max_steps}"
            )));
        }
        Ok(StopRule {
            kind,
            epsilon,
            max_steps,
        })
    }

    pub fn apriori(epsilon: f64) -> Result<Self> {
        Self::new(StopKind::APriori, epsilon, DEFAULT_MAX_STEPS)
    }

    pub fn aposteriori(epsilon: f64) -> Result<Self> {
        Self::new(StopKind::APosteriori, epsilon, DEFAULT_MAX_STEPS)
    }

    pub fn kind(&self) -> StopKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }
}

#[derive(Debug, Clone)]
pub struct StopOutcome<S: Scalar = f64> {
    pub approx: Vector<S>,
    pub stopped_at: usize,
    pub trace: IterationTrace<S>,
}

impl<S: Scalar> StopOutcome<S> {
    pub fn final_budget(&self) -> Result<ErrorBudget> {
        error_budget_at(&self.trace, self.stopped_at / 2)
    }
}

#[derive(Debug, ThisError)]
pub enum StopError<S: Scalar = f64> {
    #[error(transparent)]
    Invalid(#[from] Error),

    /// The step cap was reached before the stopping criterion held.
    #[error("step cap {cap} reached before the stopping criterion held{}",
        .needed.map(|n| format!(" (a priori estimate needs {n} steps)")).unwrap_or_default())]
    BudgetExhausted {
        cap: usize,
        needed: Option<usize>,
        trace: Box<IterationTrace<S>>,
    },
}

/// Iterates from `x0 ∈ A` until the stop rule is met, returning `T^{2n}x₀`.
pub fn run_with_stop<S: Scalar>(
    map: &CyclicMapSpec<S>,
    x0: &Vector<S>,
    rule: &StopRule,
) -> Result<StopOutcome<S>, StopError<S>> {
    run_with_stop_mode(map, x0, rule, TraceMode::Full)
}

pub fn run_with_stop_mode<S: Scalar>(
    map: &CyclicMapSpec<S>,
    x0: &Vector<S>,
    rule: &StopRule,
    mode: TraceMode,
) -> Result<StopOutcome<S>, StopError<S>> {
    let mut trace = begin(map, x0, mode)?;
    let cap = rule.max_steps();
    let target = match rule.kind() {
        StopKind::MaxSteps => cap,
        StopKind::APriori => {
            trace.advance(map)?;
            let needed = trace
                .params
                .apriori_steps(&trace.displacements[0], rule.epsilon())?;
            if needed > cap {
                while trace.steps() < cap {
                    trace.advance(map)?;
                }
                return Err(StopError::BudgetExhausted {
                    cap,
                    needed: Some(needed),
                    trace: Box::new(trace),
                });
            }
            needed
        }
        StopKind::APosteriori => {
            let mut step = 0;
            loop {
                if step + 2 > cap {
                    return Err(StopError::BudgetExhausted {
                        cap,
                        needed: None,
                        trace: Box::new(trace),
                    });
                }
                trace.advance(map)?;
                trace.advance(map)?;
                step += 2;
                let bound = trace
                    .budgets
                    .last()
                    .expect("even step has a budget")
                    .aposteriori;
                if bound < rule.epsilon() {
                    break step;
                }
            }
        }
    };
    while trace.steps() < target {
        trace.advance(map)?;
    }
    Ok(StopOutcome {
        approx: trace.last().clone(),
        stopped_at: target,
        trace,
    })
}

/// Checks that even iterates stay in `A` and odd iterates in `B`.
pub fn alternation_holds<S: Scalar>(map: &CyclicMapSpec<S>, trace: &IterationTrace<S>) -> bool {
    trace
        .iterates()
        .iter()
        .enumerate()
        .all(|(i, x)| match Side::of_step(i) {
            Side::A => map.in_a(x),
            Side::B => map.in_b(x),
        })
}

/// Two sides of an inequality evaluated along a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSides {
    pub step: usize,
    pub l: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl ChainSides {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

fn chain_inputs<S: Scalar>(
    trace: &IterationTrace<S>,
    n: usize,
    l: usize,
) -> Result<(f64, Displacement)> {
    if trace.mode() != TraceMode::Full {
        return Err(invalid("proof-chain checks need a trace with all iterates"));
    }
    if n == 0 || l == 0 || l > 2 * n {
        return Err(invalid(format!(
            "need n >= 1 and 1 <= l <= 2n, got n={n}, l={l}"
        )));
    }
    if trace.steps() < 2 * n + 2 {
        return Err(invalid(format!(
            "trace has {} steps, step {} needed",
            trace.steps(),
            2 * n + 2
        )));
    }
    let jump = trace.p_nm(2 * n, 2 * n + 2).expect("full trace");
    Ok((jump, trace.displacements()[2 * n - l]))
}

/// `‖T^{2n}x − T^{2n+2}x‖ ≤ P·((P − d)/(C·d))^{1/q}·k^{l/q}` with
/// `P = ‖T^{2n−l}x − T^{2n+1−l}x‖`.
pub fn jump_bound_sides<S: Scalar>(
    trace: &IterationTrace<S>,
    n: usize,
    l: usize,
) -> Result<ChainSides> {
    let (jump, disp) = chain_inputs(trace, n, l)?;
    let params = trace.params();
    let excess = disp.clamped_excess(params.d())?;
    let q = params.consts().q();
    let rhs = disp.value
        * (excess / (params.consts().c() * params.d())).powf(q.recip())
        * params.k().powf(l as f64 / q);
    Ok(ChainSides {
        step: 2 * n,
        l,
        lhs: jump,
        rhs,
    })
}

/// `δ_p(‖T^{2n}x − T^{2n+2}x‖ / R) ≤ k^l·S / R` with `S = S_{2n−l,2n+1−l}(x)`
/// and `R = d + k^l·S`.
pub fn modulus_chain_sides<S: Scalar>(
    trace: &IterationTrace<S>,
    n: usize,
    l: usize,
) -> Result<ChainSides> {
    let (jump, disp) = chain_inputs(trace, n, l)?;
    let params = trace.params();
    let shrunk = params.k().powi(l as i32) * disp.clamped_excess(params.d())?;
    let radius = params.d() + shrunk;
    let ratio = (jump / radius).clamp(0.0, 2.0);
    let lhs = if ratio == 0.0 {
        0.0
    } else {
        modulus_of_convexity(trace.space().p(), ratio)?
    };
    Ok(ChainSides {
        step: 2 * n,
        l,
        lhs,
        rhs: shrunk / radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::{make_example1, Example1Params};
    use crate::norms::power_type_constants;
    use crate::scalar::Extended;

    fn ex1(lambda: f64, p: f64) -> CyclicMapSpec {
        make_example1(Example1Params::new(lambda, p).unwrap()).unwrap()
    }

    fn c(cst: f64, q: f64) -> PowerTypeConstants {
        PowerTypeConstants::new(cst, q).unwrap()
    }

    #[test]
    fn apriori_examples() {
        let k = c(0.125, 2.0);
        assert_eq!(apriori_bound(2.0, 2.0, 0.3, &k, 5).unwrap(), 0.0);
        // 3/(1 − 1/4) · (1/(1/4))^{1/2} · (1/4)^1 = 4 · 2 · 1/4
        let b = apriori_bound(3.0, 2.0, 0.25, &k, 1).unwrap();
        assert!((b - 2.0).abs() < 1e-14, "{b}");
    }

    #[test]
    fn aposteriori_examples() {
        let k = c(0.125, 2.0);
        assert_eq!(aposteriori_bound(2.0, 2.0, 0.25, &k).unwrap(), 0.0);
        let b = aposteriori_bound(3.0, 2.0, 0.25, &k).unwrap();
        assert!((b - 4.0).abs() < 1e-14, "{b}");
    }

    #[test]
    fn bounds_reject_bad_inputs() {
        let k = c(0.125, 2.0);
        assert!(apriori_bound(3.0, 0.0, 0.5, &k, 1).is_err());
        assert!(apriori_bound(1.0, 2.0, 0.5, &k, 1).is_err());
        assert!(apriori_bound(3.0, 2.0, 1.0, &k, 1).is_err());
        assert!(apriori_bound(3.0, 2.0, 0.5, &k, 0).is_err());
        assert!(aposteriori_bound(1.5, 2.0, 0.5, &k).is_err());
        assert!(apriori_steps_needed(3.0, 2.0, 0.5, &k, 0.0).is_err());
    }

    #[test]
    fn roundoff_below_d_is_clamped() {
        let k = c(0.125, 2.0);
        assert_eq!(aposteriori_bound(2.0 - 4e-16, 2.0, 0.5, &k).unwrap(), 0.0);
        assert_eq!(apriori_bound(2.0 - 1e-13, 2.0, 0.5, &k, 3).unwrap(), 0.0);
    }

    #[test]
    fn excess_at_aposteriori_inverts_the_bound() {
        let params = BoundParams::new(2.0, 0.5, power_type_constants(3.0).unwrap()).unwrap();
        let e = params.excess_at_aposteriori(1e-6);
        let disp = Displacement {
            value: 2.0,
            excess: e,
        };
        let b = params.aposteriori(&disp).unwrap();
        assert!((b - 1e-6).abs() < 1e-12 * 1e-6 * 1e3, "{b}");
    }

    #[test]
    fn steps_needed_examples() {
        let k = c(0.125, 2.0);
        assert_eq!(apriori_steps_needed(2.0, 2.0, 0.25, &k, 1e-9).unwrap(), 2);
        assert_eq!(apriori_steps_needed(3.0, 2.0, 0.25, &k, 3.5).unwrap(), 2);
        // bound(n) = 8·(1/4)^n: 8/4^n < 0.01 first at n = 5.
        assert_eq!(apriori_steps_needed(3.0, 2.0, 0.25, &k, 0.01).unwrap(), 10);
    }

    /// Linear scan oracle for the step predictor.
    fn scan_steps(d0: f64, d: f64, k: f64, cst: &PowerTypeConstants, eps: f64) -> usize {
        (1..)
            .find(|&n| apriori_bound(d0, d, k, cst, n).unwrap() < eps)
            .map(|n| 2 * n)
            .unwrap()
    }

    #[test]
    fn steps_needed_matches_scan() {
        for p in [1.1, 1.5, 2.0, 3.0, 5.0, 20.0] {
            let cst = power_type_constants(p).unwrap();
            for k in [0.1, 0.5, 0.9] {
                for eps in [1e-1, 1e-3, 1e-7, 1e-12] {
                    let got = apriori_steps_needed(1500.0, 2.0, k, &cst, eps).unwrap();
                    assert_eq!(
                        got,
                        scan_steps(1500.0, 2.0, k, &cst, eps),
                        "p={p} k={k} eps={eps}"
                    );
                }
            }
        }
    }

    #[test]
    fn first_two_iterates_of_example() {
        let m = ex1(0.5, 2.0);
        let t = picard_iterate(&m, &[1000.0, 8.0].into(), 2).unwrap();
        assert_eq!(t.iterates()[1].to_f64s(), vec![-500.5, -4.0]);
        assert_eq!(t.iterates()[2].to_f64s(), vec![250.75, 2.0]);
        assert_eq!(t.budgets().len(), 1);
    }

    #[test]
    fn orbit_of_e1_has_zero_budgets() {
        let m = ex1(0.5, 2.0);
        let t = picard_iterate(&m, &[1.0, 0.0].into(), 4).unwrap();
        let xs: Vec<_> = t.iterates().iter().map(|v| v.to_f64s()).collect();
        assert_eq!(
            xs,
            vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![1.0, 0.0]
            ]
        );
        assert!(t.displacements().iter().all(|d| d.value == 2.0));
        assert!(t
            .budgets()
            .iter()
            .all(|b| b.apriori == 0.0 && b.aposteriori == 0.0));
        assert_eq!(error_budget_at(&t, 2).unwrap().apriori, 0.0);
    }

    #[test]
    fn single_step_has_no_budget() {
        let m = ex1(0.5, 2.0);
        let t = picard_iterate(&m, &[1000.0, 8.0].into(), 1).unwrap();
        assert_eq!(t.iterates().len(), 2);
        assert_eq!(t.displacements().len(), 1);
        assert!(t.budgets().is_empty());
        assert!(error_budget_at(&t, 1).is_err());
    }

    #[test]
    fn picard_rejects_bad_start() {
        let m = ex1(0.5, 2.0);
        assert!(picard_iterate(&m, &[-5.0, 0.0].into(), 3).is_err());
        assert!(picard_iterate(&m, &[5.0, 0.0].into(), 0).is_err());
        let degenerate = ex1(0.5, 2.0).with_declared_d(0.0).unwrap();
        assert!(picard_iterate(&degenerate, &[5.0, 0.0].into(), 2).is_err());
    }

    #[test]
    fn geometric_decay_of_apriori() {
        let cst = power_type_constants(3.0).unwrap();
        for n in 1..40 {
            let a = apriori_bound(1500.0, 2.0, 0.5, &cst, n).unwrap();
            let b = apriori_bound(1500.0, 2.0, 0.5, &cst, n + 1).unwrap();
            let ratio = 0.5f64.powf(2.0 / 3.0);
            assert!((b - ratio * a).abs() <= 1e-12 * a, "n={n}");
        }
    }

    #[test]
    fn table_spot_check_p2_aposteriori() {
        let m = ex1(0.5, 2.0);
        let t = picard_iterate(&m, &[1000.0, 8.0].into(), 30).unwrap();
        let at30 = error_budget_at(&t, 15).unwrap();
        let at28 = error_budget_at(&t, 14).unwrap();
        assert!(at30.aposteriori < 1e-2, "{at30:?}");
        assert!(at28.aposteriori > 1e-2, "{at28:?}");
        assert!(at30.apriori > 1e-2);
        let stop = run_with_stop(
            &m,
            &[1000.0, 8.0].into(),
            &StopRule::aposteriori(1e-2).unwrap(),
        )
        .unwrap();
        assert_eq!(stop.stopped_at, 30);
    }

    #[test]
    fn stop_at_e1_is_immediate() {
        let m = ex1(0.5, 2.0);
        let out = run_with_stop(
            &m,
            &[1.0, 0.0].into(),
            &StopRule::aposteriori(1e-6).unwrap(),
        )
        .unwrap();
        assert_eq!(out.stopped_at, 2);
        assert_eq!(out.approx.to_f64s(), vec![1.0, 0.0]);
    }

    #[test]
    fn apriori_rule_runs_predicted_count() {
        let m = ex1(0.5, 3.0);
        let x0: Vector = [1000.0, 8.0].into();
        let out = run_with_stop(&m, &x0, &StopRule::apriori(1e-4).unwrap()).unwrap();
        let d0 = m.space().distance(&x0, &m.apply(&x0).unwrap()).unwrap();
        let cst = m.space().constants();
        assert_eq!(
            out.stopped_at,
            apriori_steps_needed(d0, 2.0, 0.5, &cst, 1e-4).unwrap()
        );
        assert_eq!(out.trace.steps(), out.stopped_at);
        let err = m.space().distance(&out.approx, &[1.0, 0.0].into()).unwrap();
        assert!(err < 1e-4);
    }

    #[test]
    fn step_cap_reports_budget_exhausted() {
        let m = ex1(0.5, 20.0);
        let rule = StopRule::new(StopKind::APosteriori, 1e-10, 10).unwrap();
        match run_with_stop(&m, &[1000.0, 8.0].into(), &rule) {
            Err(StopError::BudgetExhausted { cap, trace, .. }) => {
                assert_eq!(cap, 10);
                assert_eq!(trace.steps(), 10);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
        let rule = StopRule::new(StopKind::APriori, 1e-10, 10).unwrap();
        match run_with_stop(&m, &[1000.0, 8.0].into(), &rule) {
            Err(StopError::BudgetExhausted { needed, trace, .. }) => {
                assert!(needed.unwrap() > 10);
                assert_eq!(trace.steps(), 10);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
        let rule = StopRule::new(StopKind::MaxSteps, 1.0, 10).unwrap();
        let out = run_with_stop(&m, &[1000.0, 8.0].into(), &rule).unwrap();
        assert_eq!(out.stopped_at, 10);
    }

    #[test]
    fn stop_rule_validation() {
        assert!(StopRule::new(StopKind::APosteriori, 0.0, 10).is_err());
        assert!(StopRule::new(StopKind::APosteriori, 1e-3, 7).is_err());
        assert!(StopRule::new(StopKind::APosteriori, 1e-3, 0).is_err());
    }

    #[test]
    fn displacement_only_mode_keeps_budgets() {
        let m = ex1(0.5, 2.0);
        let x0: Vector = [1000.0, 8.0].into();
        let full = picard_iterate(&m, &x0, 20).unwrap();
        let lean = picard_iterate_with(&m, &x0, 20, TraceMode::DisplacementsOnly).unwrap();
        assert!(lean.iterates().is_empty());
        assert_eq!(lean.budgets(), full.budgets());
        assert_eq!(lean.last(), full.last());
        assert!(jump_bound_sides(&lean, 2, 1).is_err());
    }

    #[test]
    fn even_iterates_stay_in_a() {
        let m = ex1(0.3, 1.5);
        let t = picard_iterate(&m, &[40.0, -12.0].into(), 50).unwrap();
        assert!(alternation_holds(&m, &t));
    }

    #[test]
    fn chain_inequalities_along_example() {
        let m = ex1(0.5, 5.0);
        let t = picard_iterate(&m, &[1000.0, 8.0].into(), 62).unwrap();
        for n in 1..=30 {
            for l in [1, 2, 2 * n] {
                let s7 = jump_bound_sides(&t, n, l).unwrap();
                assert!(s7.holds(1e-9), "(7) n={n} l={l}: {s7:?}");
                let s5 = modulus_chain_sides(&t, n, l).unwrap();
                assert!(s5.holds(1e-9), "(5) n={n} l={l}: {s5:?}");
            }
        }
        assert!(jump_bound_sides(&t, 31, 1).is_err());
        assert!(jump_bound_sides(&t, 3, 7).is_err());
    }

    #[test]
    fn extended_trace_resolves_late_excess() {
        let params = Example1Params::new(0.5, 20.0).unwrap();
        let m: CyclicMapSpec<Extended> = make_example1(params).unwrap();
        let x0 = Vector::<Extended>::from_f64s(&[1000.0, 8.0]);
        let t = picard_iterate_with(&m, &x0, 200, TraceMode::DisplacementsOnly).unwrap();
        // x offset is 999·2^{-n}; the excess of the last displacement is
        // about 3·999·2^{-200} and is exactly zero in double precision.
        let last = t.displacements().last().unwrap();
        assert!(last.excess > 0.0);
        let expect = 3.0 * 999.0 * 2f64.powi(-200);
        assert!(
            (last.excess - expect).abs() < 1e-6 * expect,
            "{}",
            last.excess
        );

        let m64 = ex1(0.5, 20.0);
        let t64 = picard_iterate(&m64, &[1000.0, 8.0].into(), 200).unwrap();
        assert_eq!(t64.displacements().last().unwrap().excess, 0.0);
    }
}
