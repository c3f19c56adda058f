//! Expected-utility decision problems over a binary state.

use num_traits::Num;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beliefs::{convex_order_compare, CxOrdering, PosteriorDist};

/// Absolute tolerance for payoff ties in [`optimal_action`].
pub const ACTION_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecideError {
    #[error("belief {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("decision problem has no actions")]
    NoActions,
    #[error("{actions} actions but {rows} payoff rows")]
    ShapeMismatch { actions: usize, rows: usize },
    #[error("payoff entry for action `{0}` is not finite")]
    NonFinitePayoff(String),
    #[error("costs must be strictly positive, got c_fp={c_fp}, c_fn={c_fn}")]
    InvalidCosts { c_fp: f64, c_fn: f64 },
    #[error("regime violation: {0} does not hold")]
    RegimeViolation(&'static str),
    #[error("class weights must be positive, got w0={w0}, w1={w1}")]
    InvalidWeights { w0: f64, w1: f64 },
}

/// Misclassification costs, entered as positive numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostPair {
    pub c_fp: f64,
    pub c_fn: f64,
}

impl CostPair {
    pub fn new(c_fp: f64, c_fn: f64) -> Result<Self, DecideError> {
        if !(c_fp > 0.0 && c_fn > 0.0) || !c_fp.is_finite() || !c_fn.is_finite() {
            return Err(DecideError::InvalidCosts { c_fp, c_fn });
        }
        Ok(Self { c_fp, c_fn })
    }
}

/// `τ = c_fp / (c_fp + c_fn)`.
pub fn threshold(c: &CostPair) -> f64 {
    c.c_fp / (c.c_fp + c.c_fn)
}

/// Finite action set with payoffs `u(a, y)`, stored as `[u(a,0), u(a,1)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionProblem {
    actions: Vec<String>,
    payoffs: Vec<[f64; 2]>,
}

pub const ACT: &str = "act";
pub const DONT_ACT: &str = "dont_act";

impl DecisionProblem {
    pub fn new(actions: Vec<String>, payoffs: Vec<[f64; 2]>) -> Result<Self, DecideError> {
        if actions.is_empty() {
            return Err(DecideError::NoActions);
        }
        if actions.len() != payoffs.len() {
            return Err(DecideError::ShapeMismatch {
                actions: actions.len(),
                rows: payoffs.len(),
            });
        }
        for (a, row) in actions.iter().zip(&payoffs) {
            if row.iter().any(|u| !u.is_finite()) {
                return Err(DecideError::NonFinitePayoff(a.clone()));
            }
        }
        Ok(Self { actions, payoffs })
    }

    /// Binary classification with costs as negative payoffs. `act` is listed
    /// first so the tie at `q = τ` resolves to acting.
    pub fn from_costs(c: &CostPair) -> Self {
        Self {
            actions: vec![ACT.into(), DONT_ACT.into()],
            payoffs: vec![[-c.c_fp, 0.0], [0.0, -c.c_fn]],
        }
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn payoffs(&self) -> &[[f64; 2]] {
        &self.payoffs
    }

    fn payoff_at(&self, i: usize, q: f64) -> f64 {
        let [u0, u1] = self.payoffs[i];
        q * u1 + (1.0 - q) * u0
    }

    fn best_index(&self, q: f64) -> usize {
        let values: Vec<f64> = (0..self.actions.len()).map(|i| self.payoff_at(i, q)).collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        values.iter().position(|&v| v >= max - ACTION_TIE_TOL).unwrap_or(0)
    }

    pub(crate) fn value_unchecked(&self, q: f64) -> f64 {
        (0..self.actions.len())
            .map(|i| self.payoff_at(i, q))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_belief(q: f64) -> Result<(), DecideError> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(DecideError::OutOfRange(q))
    }
}

/// `V(q) = max_a q u(a,1) + (1-q) u(a,0)`.
pub fn indirect_value(dp: &DecisionProblem, q: f64) -> Result<f64, DecideError> {
    check_belief(q)?;
    Ok(dp.value_unchecked(q))
}

/// Bayes-optimal action; ties go to the first-listed action.
pub fn optimal_action(dp: &DecisionProblem, q: f64) -> Result<&str, DecideError> {
    check_belief(q)?;
    Ok(&dp.actions[dp.best_index(q)])
}

/// `E[V(Q)]`.
pub fn welfare(dp: &DecisionProblem, d: &PosteriorDist) -> f64 {
    d.expect(|q| dp.value_unchecked(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineComparison {
    pub w0: f64,
    pub w1: f64,
    pub gap: f64,
    pub cx_relation: CxOrdering,
}

impl PipelineComparison {
    /// Separation: a dominating law never does worse.
    pub fn consistent(&self) -> bool {
        match self.cx_relation {
            CxOrdering::ADominates => self.gap >= -1e-12,
            CxOrdering::BDominates => self.gap <= 1e-12,
            CxOrdering::Equal => self.gap.abs() <= 1e-12,
            CxOrdering::Incomparable | CxOrdering::MeansDiffer => true,
        }
    }
}

pub fn pipeline_compare(dp: &DecisionProblem, q0: &PosteriorDist, q1: &PosteriorDist) -> PipelineComparison {
    let w0 = welfare(dp, q0);
    let w1 = welfare(dp, q1);
    PipelineComparison {
        w0,
        w1,
        gap: w0 - w1,
        cx_relation: convex_order_compare(q0, q1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointGap<T> {
    pub loss_sep: T,
    pub loss_emb: T,
    pub gap: T,
}

/// Expected losses of the separated pipeline (`Q0 = μ ± δ`) and the embedded
/// pipeline (`Q1 = μ ± δ_w`, never crossing `τ`), and the closed-form gap.
///
/// Generic so it can run on exact rationals as well as floats.
pub fn two_point_gap<T>(mu: T, delta: T, delta_w: T, c_fp: T, c_fn: T) -> Result<TwoPointGap<T>, DecideError>
where
    T: Num + PartialOrd + Copy,
{
    let zero = T::zero();
    let one = T::one();
    let half = one / (one + one);
    if !(c_fp > zero && c_fn > zero) {
        return Err(DecideError::RegimeViolation("c_fp > 0 and c_fn > 0"));
    }
    if !(zero < delta_w) {
        return Err(DecideError::RegimeViolation("0 < delta_w"));
    }
    if !(delta_w < delta) {
        return Err(DecideError::RegimeViolation("delta_w < delta"));
    }
    let (lo, hi) = (mu - delta, mu + delta);
    if !(lo >= zero && hi <= one) {
        return Err(DecideError::RegimeViolation("mu ± delta in [0, 1]"));
    }
    let tau = c_fp / (c_fp + c_fn);
    if !(lo < tau) {
        return Err(DecideError::RegimeViolation("mu - delta < tau"));
    }
    if !(tau < hi) {
        return Err(DecideError::RegimeViolation("tau < mu + delta"));
    }
    if !(mu + delta_w < tau) {
        return Err(DecideError::RegimeViolation("mu + delta_w < tau"));
    }
    let loss_sep = half * (lo * c_fn + (one - hi) * c_fp);
    let loss_emb = mu * c_fn;
    let gap = half * (hi * c_fn - (one - hi) * c_fp);
    Ok(TwoPointGap {
        loss_sep,
        loss_emb,
        gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffEquivalence {
    /// Expected payoff of "act iff q >= τ".
    pub u_post: f64,
    /// Expected payoff of "act iff the weighted report is >= 1/2",
    /// i.e. `q >= w0 / (w0 + w1)`.
    pub u_emb: f64,
    pub equal: bool,
    /// `w0 c_fn = w1 c_fp`, under which the two rules coincide for every law.
    pub ratio_matches: bool,
}

pub fn embedded_cutoff_equivalence(
    c: &CostPair,
    w0: f64,
    w1: f64,
    d: &PosteriorDist,
) -> Result<CutoffEquivalence, DecideError> {
    if !(w0 > 0.0 && w1 > 0.0) {
        return Err(DecideError::InvalidWeights { w0, w1 });
    }
    let tau = threshold(c);
    let cutoff = w0 / (w0 + w1);
    let payoff = |act: bool, q: f64| {
        if act {
            -(1.0 - q) * c.c_fp
        } else {
            -q * c.c_fn
        }
    };
    let u_post = d.expect(|q| payoff(q >= tau, q));
    let u_emb = d.expect(|q| payoff(q >= cutoff, q));
    let scale = w0 * c.c_fn + w1 * c.c_fp;
    Ok(CutoffEquivalence {
        u_post,
        u_emb,
        equal: (u_post - u_emb).abs() <= 1e-12,
        ratio_matches: (w0 * c.c_fn - w1 * c.c_fp).abs() <= 1e-12 * scale,
    })
}

/// Random problem for property tests: 1 to 5 actions, payoffs uniform in `[-1, 1]`.
pub fn random_decision_problem<R: Rng + ?Sized>(rng: &mut R) -> DecisionProblem {
    let n = rng.gen_range(1..=5);
    let actions = (0..n).map(|i| format!("a{i}")).collect();
    let payoffs = (0..n)
        .map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
        .collect();
    DecisionProblem { actions, payoffs }
}

/// Scenario-file description: explicit table or cost shorthand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecisionSpec {
    Costs { c_fp: f64, c_fn: f64 },
    Table { actions: Vec<String>, payoffs: Vec<[f64; 2]> },
}

impl DecisionSpec {
    pub fn build(&self) -> Result<DecisionProblem, DecideError> {
        match self {
            DecisionSpec::Costs { c_fp, c_fn } => Ok(DecisionProblem::from_costs(&CostPair::new(*c_fp, *c_fn)?)),
            DecisionSpec::Table { actions, payoffs } => DecisionProblem::new(actions.clone(), payoffs.clone()),
        }
    }
}
