//! The endogenous learning problem
//!
//! ```text
//!     min_{Q : E[Q] = μ}  E[H(Q)] + C(Q)
//! ```
//!
//! solved exactly for the quadratic risk / dispersion friction pair and by
//! enumeration of two-point laws on a grid otherwise. The extreme points of
//! the mean-constrained simplex of laws have at most two atoms, so the
//! enumeration is exact whenever the whole objective is linear in the law.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beliefs::{convex_order_compare, two_point, BeliefError, CxOrdering, PosteriorDist};
use crate::risk::{binary_entropy, xlogx, BayesRisk, RiskFamily};

/// Default candidate grid (step 0.0025).
pub const DEFAULT_GRID: usize = 401;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("friction `{0}` is not moment-based; two-point enumeration does not apply")]
    UnsupportedObjective(String),
    #[error("sweep parameters must be sorted ascending")]
    UnsortedSweep,
    #[error("pair {0} is not ordered first ⪰cx second (verdict {1:?})")]
    IncomparablePair(usize, CxOrdering),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

type LawFn = Arc<dyn Fn(&PosteriorDist) -> f64 + Send + Sync>;

/// Law-invariant learning friction `C(Q)`.
#[derive(Clone)]
pub enum Friction {
    Zero,
    /// `κ I(Y; Q)`.
    MutualInfo { kappa: f64 },
    /// `(λ/2) (E[Q²] - μ²)²`.
    Dispersion { lambda: f64 },
    Custom {
        name: String,
        eval: LawFn,
        /// Convex in the moments of `Q`, so two-point enumeration is meaningful.
        moment_based: bool,
    },
}

impl fmt::Debug for Friction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Friction::Zero => write!(f, "Zero"),
            Friction::MutualInfo { kappa } => write!(f, "MutualInfo {{ kappa: {kappa} }}"),
            Friction::Dispersion { lambda } => write!(f, "Dispersion {{ lambda: {lambda} }}"),
            Friction::Custom { name, moment_based, .. } => {
                write!(f, "Custom {{ name: {name:?}, moment_based: {moment_based} }}")
            }
        }
    }
}

impl Friction {
    pub fn mutual_info(kappa: f64) -> Result<Self, LearnError> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(LearnError::InvalidParams(format!("kappa must be >= 0, got {kappa}")));
        }
        Ok(Friction::MutualInfo { kappa })
    }

    pub fn dispersion(lambda: f64) -> Result<Self, LearnError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(LearnError::InvalidParams(format!("lambda must be > 0, got {lambda}")));
        }
        Ok(Friction::Dispersion { lambda })
    }

    pub fn custom<F>(name: impl Into<String>, moment_based: bool, eval: F) -> Self
    where
        F: Fn(&PosteriorDist) -> f64 + Send + Sync + 'static,
    {
        Friction::Custom {
            name: name.into(),
            eval: Arc::new(eval),
            moment_based,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Friction::Zero => "zero".into(),
            Friction::MutualInfo { kappa } => format!("mutual_info(kappa={kappa})"),
            Friction::Dispersion { lambda } => format!("dispersion(lambda={lambda})"),
            Friction::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, d: &PosteriorDist) -> f64 {
        match self {
            Friction::Zero => 0.0,
            Friction::MutualInfo { kappa } => kappa * mutual_information(d),
            Friction::Dispersion { lambda } => dispersion_cost(*lambda, d.mean(), d.second_moment()),
            Friction::Custom { eval, .. } => eval(d),
        }
    }

    /// Linear in the law of `Q` (so two-point enumeration is exact).
    pub fn is_law_linear(&self) -> bool {
        matches!(self, Friction::Zero | Friction::MutualInfo { .. })
    }

    fn is_moment_based(&self) -> bool {
        match self {
            Friction::Custom { moment_based, .. } => *moment_based,
            _ => true,
        }
    }
}

fn dispersion_cost(lambda: f64, mu: f64, second_moment: f64) -> f64 {
    let spread = second_moment - mu * mu;
    0.5 * lambda * spread * spread
}

/// `I(Y; Q) = h(μ) - E[h(Q)]` in nats.
pub fn mutual_information(d: &PosteriorDist) -> f64 {
    (binary_entropy(d.mean()) - d.expect(binary_entropy)).max(0.0)
}

/// `κ (h(μ) - E[h(Q)])`.
pub fn friction_mutual_info(d: &PosteriorDist, kappa: f64) -> Result<f64, LearnError> {
    Ok(Friction::mutual_info(kappa)?.eval(d))
}

/// `κ E[KL(Bern(Q) ‖ Bern(μ))]`, the same quantity computed from divergences.
pub fn friction_mutual_info_kl(d: &PosteriorDist, kappa: f64) -> Result<f64, LearnError> {
    Friction::mutual_info(kappa)?;
    let mu = d.mean();
    if d.is_point_mass() {
        return Ok(0.0);
    }
    let kl = |q: f64| xlogx(q) - q * mu.ln() + xlogx(1.0 - q) - (1.0 - q) * (1.0 - mu).ln();
    Ok(kappa * d.expect(kl))
}

/// `(λ/2) (E[Q²] - μ²)²`.
pub fn friction_dispersion(d: &PosteriorDist, lambda: f64) -> Result<f64, LearnError> {
    Ok(Friction::dispersion(lambda)?.eval(d))
}

/// An instance of the learning problem.
#[derive(Debug, Clone)]
pub struct LearningProblem {
    pub risk: BayesRisk,
    pub friction: Friction,
    pub prior_mean: f64,
    pub grid_n: usize,
}

impl LearningProblem {
    pub fn new(risk: BayesRisk, friction: Friction, prior_mean: f64, grid_n: usize) -> Result<Self, LearnError> {
        if !(prior_mean > 0.0 && prior_mean < 1.0) {
            return Err(LearnError::InvalidParams(format!(
                "prior mean must lie in (0, 1), got {prior_mean}"
            )));
        }
        if grid_n < 3 {
            return Err(LearnError::InvalidParams(format!("grid needs >= 3 points, got {grid_n}")));
        }
        Ok(Self {
            risk,
            friction,
            prior_mean,
            grid_n,
        })
    }

    /// `E[H(Q)] + C(Q)`.
    pub fn objective(&self, d: &PosteriorDist) -> f64 {
        d.expect(|q| self.risk.eval(q)) + self.friction.eval(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    ClosedForm,
    /// `exact` is false when the friction is not law-linear: the result is
    /// then optimal among two-point laws and an upper bound overall.
    TwoPointEnumeration { exact: bool },
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub dist: PosteriorDist,
    pub objective_value: f64,
    pub method: SolveMethod,
}

impl Solution {
    /// Top atom of the `{0, q_high}` law with the same mean and second moment.
    pub fn q_high(&self) -> f64 {
        self.dist.second_moment() / self.dist.mean()
    }
}

/// Closed form for `H_t(q) = q - (1-t) q²` with dispersion friction `λ`.
pub fn solve_quadratic_closed_form(mu: f64, lambda: f64, t: f64) -> Result<Solution, LearnError> {
    if !(mu > 0.0 && mu < 1.0) || !(lambda > 0.0) || !(0.0..=1.0).contains(&t) {
        return Err(LearnError::InvalidParams(format!(
            "need mu in (0,1), lambda > 0, t in [0,1]; got mu={mu}, lambda={lambda}, t={t}"
        )));
    }
    let x = (mu * mu + (1.0 - t) / lambda).min(mu);
    let dist = two_point(mu, x / mu)?;
    let objective_value = mu - (1.0 - t) * x + dispersion_cost(lambda, mu, x);
    Ok(Solution {
        dist,
        objective_value,
        method: SolveMethod::ClosedForm,
    })
}

/// Minimises the objective over the point mass at `μ` and every two-point law
/// `{a, b}` with `a < μ < b` drawn from the uniform `grid_n` grid.
///
/// Ties within `1e-12` go to the smaller second moment, then to the smaller
/// lower atom, so moment-only objectives return `{0, q_high}` when it is on
/// the grid.
pub fn solve_two_point(p: &LearningProblem) -> Result<Solution, LearnError> {
    if !p.friction.is_moment_based() {
        return Err(LearnError::UnsupportedObjective(p.friction.name()));
    }
    let mu = p.prior_mean;
    let n = p.grid_n;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let risk: Vec<f64> = grid.iter().map(|&q| p.risk.eval(q)).collect();
    let entropy: Vec<f64> = grid.iter().map(|&q| binary_entropy(q)).collect();

    // (objective, second moment, a-index, b-index); indices None = point mass.
    let point_mass = PosteriorDist::point_mass(mu)?;
    let mut best = (p.objective(&point_mass), mu * mu, None::<(usize, usize)>);

    let lows: Vec<usize> = (0..n).filter(|&i| grid[i] < mu).collect();
    let highs: Vec<usize> = (0..n).filter(|&i| grid[i] > mu).collect();
    for &i in &lows {
        let a = grid[i];
        for &j in &highs {
            let b = grid[j];
            let wb = (mu - a) / (b - a);
            let wa = 1.0 - wb;
            let second = wa * a * a + wb * b * b;
            let expected_risk = wa * risk[i] + wb * risk[j];
            let cost = match &p.friction {
                Friction::Zero => 0.0,
                Friction::MutualInfo { kappa } => {
                    kappa * (binary_entropy(mu) - wa * entropy[i] - wb * entropy[j])
                }
                Friction::Dispersion { lambda } => dispersion_cost(*lambda, mu, second),
                Friction::Custom { eval, .. } => eval(&PosteriorDist::new(&[a, b], &[wa, wb])?),
            };
            let obj = expected_risk + cost;
            // scanning a upwards, keeping the incumbent on a second-moment tie
            // prefers the smaller lower atom
            let better = obj < best.0 - TIE_TOL || (obj <= best.0 + TIE_TOL && second < best.1 - TIE_TOL);
            if better {
                best = (obj, second, Some((i, j)));
            }
        }
    }

    let dist = match best.2 {
        None => point_mass,
        Some((i, j)) => {
            let (a, b) = (grid[i], grid[j]);
            let wb = (mu - a) / (b - a);
            PosteriorDist::new(&[a, b], &[1.0 - wb, wb])?
        }
    };
    let objective_value = p.objective(&dist);
    Ok(Solution {
        dist,
        objective_value,
        method: SolveMethod::TwoPointEnumeration {
            exact: p.friction.is_law_linear(),
        },
    })
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub t: f64,
    pub solution: Solution,
    pub friction_cost: f64,
}

/// Solutions along `t` and the convex-order verdict for each adjacent pair.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    /// `links[i]` compares entry `i` (as A) with entry `i + 1` (as B).
    pub links: Vec<CxOrdering>,
}

impl SweepReport {
    /// Every adjacent pair satisfies `Q_{t_i} ⪰cx Q_{t_{i+1}}`.
    pub fn chain_ok(&self) -> bool {
        self.links.iter().all(|l| l.a_at_least())
    }

    /// Indices `i` where the link `i → i+1` breaks the chain.
    pub fn violations(&self) -> Vec<usize> {
        self.links
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.a_at_least())
            .map(|(i, _)| i)
            .collect()
    }

    /// Whether the chain holds at each entry (the first is vacuously true).
    pub fn link_ok_at(&self, i: usize) -> bool {
        i == 0 || self.links[i - 1].a_at_least()
    }
}

/// Solves along `ts` and checks the contraction chain. A broken link means the
/// family is not comparable at this instance; it is reported, not raised.
pub fn contraction_sweep(
    family: &RiskFamily,
    friction: &Friction,
    mu: f64,
    ts: &[f64],
    grid_n: usize,
) -> Result<SweepReport, LearnError> {
    if ts.windows(2).any(|w| w[0] > w[1]) {
        return Err(LearnError::UnsortedSweep);
    }
    let mut entries = Vec::with_capacity(ts.len());
    for &t in ts {
        let problem = LearningProblem::new(family.at(t), friction.clone(), mu, grid_n)?;
        let solution = solve_two_point(&problem)?;
        let friction_cost = friction.eval(&solution.dist);
        entries.push(SweepEntry {
            t,
            solution,
            friction_cost,
        });
    }
    let links = entries
        .windows(2)
        .map(|w| convex_order_compare(&w[0].solution.dist, &w[1].solution.dist))
        .collect();
    Ok(SweepReport { entries, links })
}

#[derive(Debug, Clone, Default)]
pub struct CostMonotoneReport {
    pub checked: usize,
    /// `(pair index, C(first), C(second))` where `C(first) < C(second) - 1e-12`.
    pub violations: Vec<(usize, f64, f64)>,
}

impl CostMonotoneReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `C(first) >= C(second)` for pairs with `first ⪰cx second`.
pub fn check_cost_monotone(
    friction: &Friction,
    pairs: &[(PosteriorDist, PosteriorDist)],
) -> Result<CostMonotoneReport, LearnError> {
    let mut report = CostMonotoneReport::default();
    for (i, (first, second)) in pairs.iter().enumerate() {
        let verdict = convex_order_compare(first, second);
        if !verdict.a_at_least() {
            return Err(LearnError::IncomparablePair(i, verdict));
        }
        let (c1, c2) = (friction.eval(first), friction.eval(second));
        if c1 < c2 - 1e-12 {
            report.violations.push((i, c1, c2));
        }
        report.checked += 1;
    }
    Ok(report)
}

/// Scenario-file description of a friction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrictionSpec {
    Zero,
    MutualInfo { kappa: f64 },
    Dispersion { lambda: f64 },
}

impl FrictionSpec {
    pub fn build(&self) -> Result<Friction, LearnError> {
        match self {
            FrictionSpec::Zero => Ok(Friction::Zero),
            FrictionSpec::MutualInfo { kappa } => Friction::mutual_info(*kappa),
            FrictionSpec::Dispersion { lambda } => Friction::dispersion(*lambda),
        }
    }
}
