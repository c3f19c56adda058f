//! Binary losses, Bayes-risk curves and curvature diagnostics.
//!
//! Losses may be `+inf` at the boundary (log loss at a confident wrong
//! report). Bayes risks use the `0 log 0 = 0` convention and stay finite on
//! the closed interval so grid searches are total.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beliefs::PosteriorDist;

/// Default grid size for convexity checks.
pub const DEFAULT_CURVATURE_GRID: usize = 2001;
/// Default tolerance on centred second differences.
pub const DEFAULT_CURVATURE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error("argument {name}={value} is outside its domain")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("class weights must be positive, got w0={w0}, w1={w1}")]
    NonpositiveWeight { w0: f64, w1: f64 },
    #[error("grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("cannot normalise a loss whose Bayes risk at 1/2 is {0}")]
    DegenerateScale(f64),
}

/// `x ln x` with the `0 ln 0 = 0` convention.
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Binary entropy in nats.
pub fn binary_entropy(q: f64) -> f64 {
    -xlogx(q) - xlogx(1.0 - q)
}

fn check_unit(name: &'static str, value: f64) -> Result<(), RiskError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(RiskError::OutOfRange { name, value })
    }
}

fn check_weights(w0: f64, w1: f64) -> Result<(), RiskError> {
    if w0 > 0.0 && w1 > 0.0 && w0.is_finite() && w1.is_finite() {
        Ok(())
    } else {
        Err(RiskError::NonpositiveWeight { w0, w1 })
    }
}

/// A binary training loss `L(p, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossFunction {
    Log,
    Brier,
    /// Class-weighted cross-entropy: `L(p,1) = -w1 ln p`, `L(p,0) = -w0 ln(1-p)`.
    WeightedCe { w0: f64, w1: f64 },
    Scaled { base: Box<LossFunction>, scale: f64 },
}

impl LossFunction {
    pub fn weighted_ce(w0: f64, w1: f64) -> Result<Self, RiskError> {
        check_weights(w0, w1)?;
        Ok(LossFunction::WeightedCe { w0, w1 })
    }

    pub fn name(&self) -> String {
        match self {
            LossFunction::Log => "log".into(),
            LossFunction::Brier => "brier".into(),
            LossFunction::WeightedCe { w0, w1 } => format!("weighted_ce(w0={w0},w1={w1})"),
            LossFunction::Scaled { base, scale } => format!("{scale}*{}", base.name()),
        }
    }

    pub fn eval(&self, p: f64, y: bool) -> f64 {
        match self {
            LossFunction::Log => LossFunction::WeightedCe { w0: 1.0, w1: 1.0 }.eval(p, y),
            LossFunction::Brier => {
                let target = if y { 1.0 } else { 0.0 };
                (p - target) * (p - target)
            }
            LossFunction::WeightedCe { w0, w1 } => {
                if y {
                    -w1 * p.ln()
                } else {
                    -w0 * (1.0 - p).ln()
                }
            }
            LossFunction::Scaled { base, scale } => scale * base.eval(p, y),
        }
    }

    /// Whether the truthful report `p = q` is the unique Bayes act.
    pub fn is_strictly_proper(&self) -> bool {
        match self {
            LossFunction::Log | LossFunction::Brier => true,
            LossFunction::WeightedCe { w0, w1 } => w0 == w1,
            LossFunction::Scaled { base, scale } => *scale > 0.0 && base.is_strictly_proper(),
        }
    }

    /// Closed-form Bayes risk.
    pub fn bayes_risk(&self) -> BayesRisk {
        match self {
            LossFunction::Log => BayesRisk::log(),
            LossFunction::Brier => BayesRisk::brier(),
            LossFunction::WeightedCe { w0, w1 } => BayesRisk::weighted_ce_unchecked(*w0, *w1),
            LossFunction::Scaled { base, scale } => base.bayes_risk().scaled(*scale),
        }
    }
}

/// `q L(p,1) + (1-q) L(p,0)`; a zero coefficient annihilates an infinite loss.
pub fn expected_loss(loss: &LossFunction, p: f64, q: f64) -> Result<f64, RiskError> {
    check_unit("p", p)?;
    check_unit("q", q)?;
    Ok(expected_loss_unchecked(loss, p, q))
}

fn expected_loss_unchecked(loss: &LossFunction, p: f64, q: f64) -> f64 {
    let term = |coef: f64, y: bool| if coef == 0.0 { 0.0 } else { coef * loss.eval(p, y) };
    term(q, true) + term(1.0 - q, false)
}

/// Bayes act by grid search over reports, refined by golden section on the
/// cells adjacent to the (smallest) grid minimiser.
pub fn bayes_report(loss: &LossFunction, q: f64, grid_n: usize) -> Result<f64, RiskError> {
    check_unit("q", q)?;
    if grid_n < 2 {
        return Err(RiskError::GridTooSmall { min: 2, got: grid_n });
    }
    let step = 1.0 / (grid_n - 1) as f64;
    let f = |p: f64| expected_loss_unchecked(loss, p, q);
    let mut best = 0;
    let mut best_val = f(0.0);
    for i in 1..grid_n {
        let v = f(i as f64 * step);
        if v < best_val {
            best = i;
            best_val = v;
        }
    }
    let lo = (best as f64 - 1.0).max(0.0) * step;
    let hi = ((best + 1) as f64 * step).min(1.0);
    let refined = golden_section(&f, lo, hi, 1e-12);
    Ok(if f(refined) < best_val {
        refined
    } else {
        best as f64 * step
    })
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Bayes-optimal report of weighted cross-entropy, `w1 q / (w1 q + w0 (1-q))`.
pub fn weighted_ce_report(q: f64, w0: f64, w1: f64) -> Result<f64, RiskError> {
    check_weights(w0, w1)?;
    check_unit("q", q)?;
    Ok(w1 * q / (w1 * q + w0 * (1.0 - q)))
}

/// Closed-form Bayes risk of weighted cross-entropy.
pub fn weighted_ce_bayes_risk(q: f64, w0: f64, w1: f64) -> Result<f64, RiskError> {
    check_weights(w0, w1)?;
    check_unit("q", q)?;
    Ok(weighted_ce_risk_value(q, w0, w1))
}

fn weighted_ce_risk_value(q: f64, w0: f64, w1: f64) -> f64 {
    let a = w1 * q;
    let b = w0 * (1.0 - q);
    -xlogx(a) - xlogx(b) + xlogx(a + b)
}

/// `H_w''(q) = -w0 w1 / (q (1-q) (w0 + q (w1 - w0)))` on `(0, 1)`.
pub fn weighted_ce_second_derivative(q: f64, w0: f64, w1: f64) -> Result<f64, RiskError> {
    check_weights(w0, w1)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(RiskError::OutOfRange { name: "q", value: q });
    }
    Ok(-w0 * w1 / (q * (1.0 - q) * (w0 + q * (w1 - w0))))
}

/// `ρ(q) = w0 w1 / ((1-q) w0 + q w1)`, the ratio `H_w'' / H_log''`.
pub fn curvature_ratio(q: f64, w0: f64, w1: f64) -> Result<f64, RiskError> {
    check_weights(w0, w1)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(RiskError::OutOfRange { name: "q", value: q });
    }
    Ok(w0 * w1 / ((1.0 - q) * w0 + q * w1))
}

type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A Bayes-risk curve `H` on `[0, 1]`, optionally with an analytic `H''`.
#[derive(Clone)]
pub struct BayesRisk {
    name: String,
    eval: CurveFn,
    second: Option<CurveFn>,
}

impl fmt::Debug for BayesRisk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BayesRisk")
            .field("name", &self.name)
            .field("analytic_second_derivative", &self.second.is_some())
            .finish()
    }
}

impl BayesRisk {
    pub fn from_fn<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            second: None,
        }
    }

    pub fn with_second_derivative<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.second = Some(Arc::new(f));
        self
    }

    /// Entropy `h_bin(q)`, the log-loss Bayes risk.
    pub fn log() -> Self {
        Self::from_fn("log", binary_entropy).with_second_derivative(|q| -1.0 / (q * (1.0 - q)))
    }

    /// `q (1 - q)`, the Brier Bayes risk.
    pub fn brier() -> Self {
        Self::from_fn("brier", |q| q * (1.0 - q)).with_second_derivative(|_| -2.0)
    }

    pub fn weighted_ce(w0: f64, w1: f64) -> Result<Self, RiskError> {
        check_weights(w0, w1)?;
        Ok(Self::weighted_ce_unchecked(w0, w1))
    }

    fn weighted_ce_unchecked(w0: f64, w1: f64) -> Self {
        Self::from_fn(format!("weighted_ce(w0={w0},w1={w1})"), move |q| {
            weighted_ce_risk_value(q, w0, w1)
        })
        .with_second_derivative(move |q| -w0 * w1 / (q * (1.0 - q) * (w0 + q * (w1 - w0))))
    }

    /// `H_t(q) = q - (1 - t) q²`.
    pub fn quadratic(t: f64) -> Self {
        Self::from_fn(format!("quadratic(t={t})"), move |q| q - (1.0 - t) * q * q)
            .with_second_derivative(move |_| -2.0 * (1.0 - t))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, q: f64) -> f64 {
        (self.eval)(q)
    }

    pub fn second_derivative(&self, q: f64) -> Option<f64> {
        self.second.as_ref().map(|f| f(q))
    }

    pub fn has_second_derivative(&self) -> bool {
        self.second.is_some()
    }

    /// `c · H`.
    pub fn scaled(&self, c: f64) -> Self {
        let eval = Arc::clone(&self.eval);
        let second = self.second.clone();
        Self {
            name: format!("{c}*{}", self.name),
            eval: Arc::new(move |q| c * eval(q)),
            second: second.map(|s| Arc::new(move |q| c * s(q)) as CurveFn),
        }
    }

    /// `H + a q + b`.
    pub fn plus_affine(&self, a: f64, b: f64) -> Self {
        let eval = Arc::clone(&self.eval);
        Self {
            name: format!("{}+({a}q+{b})", self.name),
            eval: Arc::new(move |q| eval(q) + a * q + b),
            second: self.second.clone(),
        }
    }

    /// `H + c · G`.
    pub fn plus_scaled(&self, other: &BayesRisk, c: f64) -> Self {
        let (f, g) = (Arc::clone(&self.eval), Arc::clone(&other.eval));
        let second = match (&self.second, &other.second) {
            (Some(f2), Some(g2)) => {
                let (f2, g2) = (Arc::clone(f2), Arc::clone(g2));
                Some(Arc::new(move |q| f2(q) + c * g2(q)) as CurveFn)
            }
            _ => None,
        };
        Self {
            name: format!("{}+{c}*{}", self.name, other.name),
            eval: Arc::new(move |q| f(q) + c * g(q)),
            second,
        }
    }
}

/// One-parameter family `t ↦ H_t`, `t ∈ [0, 1]`.
#[derive(Clone)]
pub struct RiskFamily {
    name: String,
    member: Arc<dyn Fn(f64) -> BayesRisk + Send + Sync>,
}

impl fmt::Debug for RiskFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RiskFamily").field("name", &self.name).finish()
    }
}

impl RiskFamily {
    pub fn new<F>(name: impl Into<String>, member: F) -> Self
    where
        F: Fn(f64) -> BayesRisk + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            member: Arc::new(member),
        }
    }

    /// `H_t(q) = q - (1 - t) q²`.
    pub fn quadratic() -> Self {
        Self::new("quadratic", BayesRisk::quadratic)
    }

    /// `H_0 + t (H_1 - H_0)`.
    pub fn interpolate(h0: BayesRisk, h1: BayesRisk) -> Self {
        let increment = h1.plus_scaled(&h0, -1.0);
        Self::additive(h0, increment)
    }

    /// `H_0 + t h`; satisfies diminishing value of information when `h` is convex.
    pub fn additive(h0: BayesRisk, increment: BayesRisk) -> Self {
        let name = format!("{}+t*({})", h0.name(), increment.name());
        Self::new(name, move |t| h0.plus_scaled(&increment, t))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn at(&self, t: f64) -> BayesRisk {
        (self.member)(t)
    }
}

/// Outcome of a convexity check on an increment `h1 - h0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DvVerdict {
    HoldsStrictly,
    Holds,
    FailsAt(f64),
}

impl DvVerdict {
    pub fn holds(self) -> bool {
        !matches!(self, DvVerdict::FailsAt(_))
    }
}

/// Diminishing value of information: is `h1 - h0` convex on `[0, 1]`?
///
/// Uses analytic second derivatives (scaled by `step²`) when both curves
/// carry them; otherwise centred second differences on the grid.
pub fn check_dv(h0: &BayesRisk, h1: &BayesRisk, n: usize, tol: f64) -> Result<DvVerdict, RiskError> {
    let analytic = h0.has_second_derivative() && h1.has_second_derivative();
    check_dv_inner(h0, h1, n, tol, analytic)
}

/// Like [`check_dv`] but always from finite differences.
pub fn check_dv_numeric(h0: &BayesRisk, h1: &BayesRisk, n: usize, tol: f64) -> Result<DvVerdict, RiskError> {
    check_dv_inner(h0, h1, n, tol, false)
}

fn check_dv_inner(
    h0: &BayesRisk,
    h1: &BayesRisk,
    n: usize,
    tol: f64,
    analytic: bool,
) -> Result<DvVerdict, RiskError> {
    let diffs = increment_second_differences(h0, h1, n, analytic)?;
    let mut strict = true;
    for (q, d2) in diffs {
        if d2 < -tol {
            return Ok(DvVerdict::FailsAt(q));
        }
        if d2 < tol {
            strict = false;
        }
    }
    Ok(if strict {
        DvVerdict::HoldsStrictly
    } else {
        DvVerdict::Holds
    })
}

/// `(q_i, Δ(q_{i-1}) - 2Δ(q_i) + Δ(q_{i+1}))` at interior grid points, where
/// `Δ = h1 - h0`.
pub fn increment_second_differences(
    h0: &BayesRisk,
    h1: &BayesRisk,
    n: usize,
    analytic: bool,
) -> Result<Vec<(f64, f64)>, RiskError> {
    if n < 3 {
        return Err(RiskError::GridTooSmall { min: 3, got: n });
    }
    let step = 1.0 / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    if analytic {
        return Ok(grid[1..n - 1]
            .iter()
            .map(|&q| {
                let d2 = h1.second_derivative(q).unwrap() - h0.second_derivative(q).unwrap();
                (q, d2 * step * step)
            })
            .collect());
    }
    let delta: Vec<f64> = grid.iter().map(|&q| h1.eval(q) - h0.eval(q)).collect();
    Ok((1..n - 1)
        .map(|i| (grid[i], delta[i - 1] - 2.0 * delta[i] + delta[i + 1]))
        .collect())
}

/// Concavity order: `HBelow` means `h ⪯ h̃`, i.e. `h̃ - h` is convex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcavityOrdering {
    HBelow,
    HAbove,
    Equal,
    Incomparable,
}

pub fn concavity_order(h: &BayesRisk, h_tilde: &BayesRisk, n: usize) -> Result<ConcavityOrdering, RiskError> {
    let up = check_dv(h, h_tilde, n, DEFAULT_CURVATURE_TOL)?.holds();
    let down = check_dv(h_tilde, h, n, DEFAULT_CURVATURE_TOL)?.holds();
    Ok(match (up, down) {
        (true, true) => ConcavityOrdering::Equal,
        (true, false) => ConcavityOrdering::HBelow,
        (false, true) => ConcavityOrdering::HAbove,
        (false, false) => ConcavityOrdering::Incomparable,
    })
}

/// `H(μ) - E[H(Q)]`.
pub fn value_of_information(h: &BayesRisk, d: &PosteriorDist) -> f64 {
    h.eval(d.mean()) - d.expect(|q| h.eval(q))
}

/// Rescales `loss` so that its Bayes risk at `1/2` equals `reference`.
///
/// Curvature comparisons only make sense at a fixed scale; nothing in the
/// crate applies this implicitly.
pub fn normalize_scale(loss: &LossFunction, reference: f64) -> Result<LossFunction, RiskError> {
    let current = loss.bayes_risk().eval(0.5);
    if !(current.abs() > 0.0) || !current.is_finite() {
        return Err(RiskError::DegenerateScale(current));
    }
    let base = match loss {
        LossFunction::Scaled { base, .. } => base.clone(),
        other => Box::new(other.clone()),
    };
    let base_value = base.bayes_risk().eval(0.5);
    Ok(LossFunction::Scaled {
        base,
        scale: reference / base_value,
    })
}

/// Scenario-file description of a Bayes-risk curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskSpec {
    Log,
    Brier,
    WeightedCe { w0: f64, w1: f64 },
    QuadraticFamily { t: f64 },
}

impl RiskSpec {
    pub fn build(&self) -> Result<BayesRisk, RiskError> {
        match self {
            RiskSpec::Log => Ok(BayesRisk::log()),
            RiskSpec::Brier => Ok(BayesRisk::brier()),
            RiskSpec::WeightedCe { w0, w1 } => BayesRisk::weighted_ce(*w0, *w1),
            RiskSpec::QuadraticFamily { t } => {
                check_unit("t", *t)?;
                Ok(BayesRisk::quadratic(*t))
            }
        }
    }
}

/// Scenario-file description of a risk family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `q - (1 - t) q²`.
    Quadratic,
    /// `H_from + t (H_to - H_from)`.
    Interpolate { from: RiskSpec, to: RiskSpec },
    /// `H_base + t q²`.
    AddSquare { base: RiskSpec },
}

impl FamilySpec {
    pub fn build(&self) -> Result<RiskFamily, RiskError> {
        match self {
            FamilySpec::Quadratic => Ok(RiskFamily::quadratic()),
            FamilySpec::Interpolate { from, to } => Ok(RiskFamily::interpolate(from.build()?, to.build()?)),
            FamilySpec::AddSquare { base } => {
                let square = BayesRisk::from_fn("q^2", |q| q * q).with_second_derivative(|_| 2.0);
                Ok(RiskFamily::additive(base.build()?, square))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn expected_loss_examples() {
        assert!((expected_loss(&LossFunction::Log, 0.5, 0.5).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(expected_loss(&LossFunction::Brier, 0.0, 0.0).unwrap(), 0.0);
        let wce = LossFunction::weighted_ce(1.0, 2.0).unwrap();
        assert!((expected_loss(&wce, 0.5, 0.5).unwrap() - 1.5 * LN_2).abs() < 1e-15);
    }

    #[test]
    fn expected_loss_boundary_conventions() {
        assert_eq!(expected_loss(&LossFunction::Log, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(expected_loss(&LossFunction::Log, 0.0, 0.5).unwrap(), f64::INFINITY);
        assert!(matches!(
            expected_loss(&LossFunction::Log, 1.1, 0.5),
            Err(RiskError::OutOfRange { name: "p", .. })
        ));
    }

    #[test]
    fn bayes_report_examples() {
        let r = bayes_report(&LossFunction::Log, 0.3, 1001).unwrap();
        assert!((r - 0.3).abs() < 1e-6);
        let eq = LossFunction::weighted_ce(3.0, 3.0).unwrap();
        assert!((bayes_report(&eq, 0.7, 1001).unwrap() - 0.7).abs() < 1e-6);
        let skew = LossFunction::weighted_ce(1.0, 2.0).unwrap();
        let oracle = weighted_ce_report(0.5, 1.0, 2.0).unwrap();
        assert!((oracle - 2.0 / 3.0).abs() < 1e-15);
        assert!((bayes_report(&skew, 0.5, 1001).unwrap() - oracle).abs() < 1e-6);
    }

    #[test]
    fn weighted_report_examples() {
        for q in [0.1, 0.45, 0.9] {
            assert!((weighted_ce_report(q, 2.5, 2.5).unwrap() - q).abs() < 1e-15);
        }
        assert_eq!(weighted_ce_report(0.0, 1.0, 4.0).unwrap(), 0.0);
        assert!(matches!(
            weighted_ce_report(0.5, 0.0, 1.0),
            Err(RiskError::NonpositiveWeight { .. })
        ));
    }

    #[test]
    fn weighted_risk_examples() {
        assert!((weighted_ce_bayes_risk(0.5, 1.0, 1.0).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(weighted_ce_bayes_risk(0.0, 1.0, 3.0).unwrap(), 0.0);
        for i in 1..10 {
            let q = i as f64 / 10.0;
            let closed = weighted_ce_bayes_risk(q, 1.0, 1.0).unwrap();
            let p = bayes_report(&LossFunction::Log, q, 2001).unwrap();
            let oracle = expected_loss(&LossFunction::Log, p, q).unwrap();
            assert!((closed - oracle).abs() < 1e-9, "q={q}");
            assert!((closed - binary_entropy(q)).abs() < 1e-15);
        }
    }

    #[test]
    fn curvature_ratio_examples() {
        for q in [0.05, 0.5, 0.95] {
            assert!((curvature_ratio(q, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((curvature_ratio(0.5, 0.5, 0.5).unwrap() - 0.5).abs() < 1e-15);

        // cross-check against finite-difference second derivatives
        let (q, h) = (0.5, 1e-4);
        let fd = |f: &dyn Fn(f64) -> f64| (f(q - h) - 2.0 * f(q) + f(q + h)) / (h * h);
        let hw = fd(&|x| weighted_ce_bayes_risk(x, 0.5, 0.5).unwrap());
        let hl = fd(&binary_entropy);
        assert!((hw / hl - 0.5).abs() < 1e-5);

        for &(w0, w1) in &[(0.2, 1.0), (1.0, 0.7), (0.5, 0.9)] {
            for i in 1..100 {
                assert!(curvature_ratio(i as f64 / 100.0, w0, w1).unwrap() <= 1.0 + 1e-15);
            }
        }
        assert!(curvature_ratio(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn dv_examples() {
        let n = DEFAULT_CURVATURE_GRID;
        let tol = DEFAULT_CURVATURE_TOL;
        let v = check_dv(&BayesRisk::log(), &BayesRisk::brier(), n, tol).unwrap();
        assert_eq!(v, DvVerdict::HoldsStrictly);

        let h0 = BayesRisk::brier();
        let square = BayesRisk::from_fn("q^2", |q| q * q);
        let h1 = h0.plus_scaled(&square, 0.3);
        assert_eq!(check_dv(&h0, &h1, n, tol).unwrap(), DvVerdict::HoldsStrictly);

        let w = BayesRisk::weighted_ce(1.0, 2.0).unwrap();
        assert!(matches!(
            check_dv(&BayesRisk::log(), &w, n, tol).unwrap(),
            DvVerdict::FailsAt(_)
        ));
        assert!(matches!(
            check_dv_numeric(&BayesRisk::log(), &w, n, tol).unwrap(),
            DvVerdict::FailsAt(_)
        ));
        assert!(check_dv(&h0, &h1, 2, tol).is_err());
    }

    #[test]
    fn concavity_order_examples() {
        let n = DEFAULT_CURVATURE_GRID;
        let (log, brier) = (BayesRisk::log(), BayesRisk::brier());
        assert_eq!(concavity_order(&log, &brier, n).unwrap(), ConcavityOrdering::HBelow);
        assert_eq!(concavity_order(&brier, &log, n).unwrap(), ConcavityOrdering::HAbove);
        let shifted = log.plus_affine(0.3, -0.1);
        assert_eq!(concavity_order(&log, &shifted, n).unwrap(), ConcavityOrdering::Equal);
        let w = BayesRisk::weighted_ce(3.0, 0.2).unwrap();
        assert_eq!(concavity_order(&brier, &w, n).unwrap(), ConcavityOrdering::Incomparable);
    }

    #[test]
    fn voi_examples() {
        let pm = PosteriorDist::point_mass(0.3).unwrap();
        assert_eq!(value_of_information(&BayesRisk::log(), &pm), 0.0);
        let coin = PosteriorDist::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!((value_of_information(&BayesRisk::brier(), &coin) - 0.25).abs() < 1e-15);
        assert!((value_of_information(&BayesRisk::log(), &coin) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn normalize_scale_hits_reference() {
        let l = normalize_scale(&LossFunction::Brier, LN_2).unwrap();
        assert!((l.bayes_risk().eval(0.5) - LN_2).abs() < 1e-15);
        let again = normalize_scale(&l, 1.0).unwrap();
        assert!((again.bayes_risk().eval(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn loss_spec_parses() {
        let l: LossFunction = toml::from_str("kind = \"weighted_ce\"\nw0 = 1.0\nw1 = 2.0").unwrap();
        assert_eq!(l, LossFunction::WeightedCe { w0: 1.0, w1: 2.0 });
        let r: RiskSpec = toml::from_str("kind = \"quadratic_family\"\nt = 0.5").unwrap();
        assert!((r.build().unwrap().eval(1.0) - 0.5).abs() < 1e-15);
    }
}
