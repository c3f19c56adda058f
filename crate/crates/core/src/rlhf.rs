//! KL-regularised reward maximisation over a finite completion set.
//!
//! The optimum of `E_π[r] - λ KL(π ‖ π₀)` is the exponential tilt
//! `π_R(z) ∝ π₀(z) exp(r(z)/λ)`. Tilting is done in log space with the
//! maximum logit subtracted, so small `λ` does not overflow.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beliefs::{mixture, BeliefError, PosteriorDist, PROB_TOL};

/// Smallest accepted regularisation strength.
pub const MIN_LAMBDA: f64 = 1e-6;
/// Upper end of the search bracket in [`find_lambda_bar`].
pub const MAX_LAMBDA: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RlhfError {
    #[error("lambda must be positive, got {0}")]
    NonpositiveLambda(f64),
    #[error("lambda {0} is below the supported minimum {MIN_LAMBDA}")]
    LambdaTooSmall(f64),
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("invalid reward: {0}")]
    InvalidReward(String),
    #[error("no capability tax: {0}")]
    NoTaxRegime(String),
    #[error("tolerance {eps} is not below the limiting tax {limit}")]
    EpsTooLarge { eps: f64, limit: f64 },
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

fn check_lambda(lambda: f64) -> Result<(), RlhfError> {
    if !(lambda > 0.0) || lambda.is_nan() {
        return Err(RlhfError::NonpositiveLambda(lambda));
    }
    if lambda < MIN_LAMBDA {
        return Err(RlhfError::LambdaTooSmall(lambda));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub label: String,
    pub base_prob: f64,
    /// Criterion-wise acceptability posteriors, each in `[0, 1]`.
    pub quality: Vec<f64>,
    #[serde(default)]
    pub spurious: f64,
}

/// A single-prompt generator `π(· | x)` over finitely many completions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub completions: Vec<Completion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
}

impl Generator {
    pub fn new(completions: Vec<Completion>) -> Result<Self, RlhfError> {
        let g = Self {
            completions,
            prompt: None,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), RlhfError> {
        let first = self
            .completions
            .first()
            .ok_or_else(|| RlhfError::InvalidGenerator("no completions".into()))?;
        let k = first.quality.len();
        if k == 0 {
            return Err(RlhfError::InvalidGenerator("quality vectors are empty".into()));
        }
        let mut total = 0.0;
        for c in &self.completions {
            if c.quality.len() != k {
                return Err(RlhfError::InvalidGenerator(format!(
                    "completion `{}` has {} criteria, expected {k}",
                    c.label,
                    c.quality.len()
                )));
            }
            if !(c.base_prob >= 0.0) {
                return Err(RlhfError::InvalidGenerator(format!(
                    "completion `{}` has negative probability",
                    c.label
                )));
            }
            if c.quality.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return Err(RlhfError::InvalidGenerator(format!(
                    "completion `{}` has quality outside [0, 1]",
                    c.label
                )));
            }
            if !c.spurious.is_finite() {
                return Err(RlhfError::InvalidGenerator(format!(
                    "completion `{}` has a non-finite spurious score",
                    c.label
                )));
            }
            total += c.base_prob;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(RlhfError::InvalidGenerator(format!("probabilities sum to {total}")));
        }
        Ok(())
    }

    /// Three completions: two reasonable outputs and a rare one that scores
    /// high on a spurious feature.
    pub fn goodhart_example() -> Self {
        let mk = |label: &str, p: f64, q: f64, s: f64| Completion {
            label: label.into(),
            base_prob: p,
            quality: vec![q],
            spurious: s,
        };
        Self {
            completions: vec![
                mk("z1", 0.49, 0.9, 0.2),
                mk("z2", 0.49, 0.6, 0.3),
                mk("z3", 0.02, 0.4, 1.0),
            ],
            prompt: Some("goodhart".into()),
        }
    }

    pub fn criteria(&self) -> usize {
        self.completions[0].quality.len()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.completions.iter().map(|c| c.base_prob).collect()
    }

    /// Appends the spurious score as an extra criterion, so a misspecified
    /// reward `α w·q + (1-α) s` becomes the linear scalarisation `(α w, 1-α)`.
    pub fn with_spurious_criterion(&self) -> Result<Self, RlhfError> {
        let mut out = self.clone();
        for c in &mut out.completions {
            if !(0.0..=1.0).contains(&c.spurious) {
                return Err(RlhfError::InvalidGenerator(format!(
                    "spurious score of `{}` is outside [0, 1]",
                    c.label
                )));
            }
            c.quality.push(c.spurious);
        }
        Ok(out)
    }

    fn scalar_quality(&self, w: &[f64]) -> Vec<f64> {
        self.completions.iter().map(|c| dot(w, &c.quality)).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_simplex(w: &[f64], k: usize) -> Result<(), RlhfError> {
    if w.len() != k {
        return Err(RlhfError::InvalidReward(format!("expected {k} weights, got {}", w.len())));
    }
    if w.iter().any(|x| !(*x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > PROB_TOL {
        return Err(RlhfError::InvalidReward(format!("weights {w:?} are not on the simplex")));
    }
    Ok(())
}

/// `r(z) = α (w·q(z)) + (1-α) s(z)`; `α = 1` is an aligned reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec {
    pub weights: Vec<f64>,
    #[serde(default = "one")]
    pub alpha: f64,
}

fn one() -> f64 {
    1.0
}

impl RewardSpec {
    pub fn aligned(weights: Vec<f64>) -> Self {
        Self { weights, alpha: 1.0 }
    }

    pub fn misspecified(weights: Vec<f64>, alpha: f64) -> Self {
        Self { weights, alpha }
    }

    fn validate(&self, g: &Generator) -> Result<(), RlhfError> {
        check_simplex(&self.weights, g.criteria())?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(RlhfError::InvalidReward(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        Ok(())
    }

    pub fn reward(&self, c: &Completion) -> f64 {
        self.alpha * dot(&self.weights, &c.quality) + (1.0 - self.alpha) * c.spurious
    }
}

/// Normalised `p_i ∝ exp(logit_i)` with the max subtracted first.
fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    unnorm.into_iter().map(|u| u / z).collect()
}

fn log_prob(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `π_R(z) = π₀(z) exp(r(z)/λ) / Z_λ`; quality and spurious fields carry over.
pub fn tilt(g: &Generator, r: &RewardSpec, lambda: f64) -> Result<Generator, RlhfError> {
    check_lambda(lambda)?;
    g.validate()?;
    r.validate(g)?;
    let logits: Vec<f64> = g
        .completions
        .iter()
        .map(|c| log_prob(c.base_prob) + r.reward(c) / lambda)
        .collect();
    let probs = softmax(&logits);
    let mut out = g.clone();
    for (c, p) in out.completions.iter_mut().zip(probs) {
        c.base_prob = p;
    }
    Ok(out)
}

/// Law of `w·q(Z)` for `Z ~ π`.
pub fn induced_quality_dist(g: &Generator, w: &[f64]) -> Result<PosteriorDist, RlhfError> {
    check_simplex(w, g.criteria())?;
    let q = g.scalar_quality(w);
    let q: Vec<f64> = q.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
    Ok(PosteriorDist::new(&q, &g.probs())?)
}

/// Mixture over prompts of the per-prompt quality laws.
pub fn mixture_quality_dist(prompts: &[(f64, Generator)], w: &[f64]) -> Result<PosteriorDist, RlhfError> {
    let parts = prompts
        .iter()
        .map(|(p, g)| Ok((*p, induced_quality_dist(g, w)?)))
        .collect::<Result<Vec<_>, RlhfError>>()?;
    Ok(mixture(&parts)?)
}

/// First-order dominance: `P_a(Q >= t) >= P_b(Q >= t) - 1e-12` at every
/// support point of either law.
pub fn fosd_check(a: &PosteriorDist, b: &PosteriorDist) -> bool {
    a.support()
        .iter()
        .chain(b.support())
        .all(|&t| a.survival(t) >= b.survival(t) - PROB_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaxReport {
    pub best_eval: f64,
    pub achieved_eval: f64,
    pub tax: f64,
}

/// Option-value loss from training on `w_train` when deployment scores `w_eval`.
pub fn capability_tax(g: &Generator, w_train: &[f64], w_eval: &[f64], lambda: f64) -> Result<TaxReport, RlhfError> {
    check_simplex(w_eval, g.criteria())?;
    let tilted = tilt(g, &RewardSpec::aligned(w_train.to_vec()), lambda)?;
    Ok(tax_of(g, &tilted, w_eval))
}

fn tax_of(base: &Generator, tilted: &Generator, w_eval: &[f64]) -> TaxReport {
    let best_eval = base
        .scalar_quality(w_eval)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let achieved_eval = tilted
        .completions
        .iter()
        .map(|c| c.base_prob * dot(w_eval, &c.quality))
        .sum::<f64>();
    TaxReport {
        best_eval,
        achieved_eval,
        tax: best_eval - achieved_eval,
    }
}

/// Index of the unique maximiser of `values`, if the maximum is strict.
fn strict_argmax(values: &[f64]) -> Option<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hits: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= max - PROB_TOL).collect();
    (hits.len() == 1).then(|| hits[0])
}

/// Bisects (in `ln λ`) for the boundary `λ̄` below which the capability tax
/// exceeds `eps`. Returns [`MAX_LAMBDA`] if the tax exceeds `eps` across the
/// whole bracket. Assumes the set `{λ : tax(λ) > eps}` is an initial segment.
pub fn find_lambda_bar(g: &Generator, w_train: &[f64], w_eval: &[f64], eps: f64) -> Result<f64, RlhfError> {
    g.validate()?;
    check_simplex(w_train, g.criteria())?;
    check_simplex(w_eval, g.criteria())?;
    // completions with zero base mass cannot be reached by tilting
    let reachable: Vec<&Completion> = g.completions.iter().filter(|c| c.base_prob > 0.0).collect();
    let r_train: Vec<f64> = reachable.iter().map(|c| dot(w_train, &c.quality)).collect();
    let r_eval: Vec<f64> = reachable.iter().map(|c| dot(w_eval, &c.quality)).collect();
    let z_train = strict_argmax(&r_train)
        .ok_or_else(|| RlhfError::NoTaxRegime("training objective has no strict maximiser".into()))?;
    let z_eval = strict_argmax(&r_eval)
        .ok_or_else(|| RlhfError::NoTaxRegime("evaluation objective has no strict maximiser".into()))?;
    if z_train == z_eval {
        return Err(RlhfError::NoTaxRegime("both objectives share the same maximiser".into()));
    }
    let limit = r_eval[z_eval] - r_eval[z_train];
    if eps >= limit {
        return Err(RlhfError::EpsTooLarge { eps, limit });
    }

    let taxed = |lambda: f64| -> Result<bool, RlhfError> { Ok(capability_tax(g, w_train, w_eval, lambda)?.tax > eps) };
    if taxed(MAX_LAMBDA)? {
        return Ok(MAX_LAMBDA);
    }
    let (mut lo, mut hi) = (MIN_LAMBDA.ln(), MAX_LAMBDA.ln());
    if !taxed(MIN_LAMBDA)? {
        return Err(RlhfError::EpsTooLarge { eps, limit });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if taxed(mid.exp())? {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(lo.exp())
}

/// One fibre of the Goodhart tilt factor: `m(q) = E[exp((1-α) S/λ) | Q = q]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltFactor {
    pub q: f64,
    /// Base probability of the fibre `{Q = q}`.
    pub mass: f64,
    pub log_m: f64,
}

impl TiltFactor {
    pub fn m(&self) -> f64 {
        self.log_m.exp()
    }
}

/// Extra tilt factor induced by the spurious component, per distinct value of
/// `Q = w·q`. Completions are grouped into fibres by exact equality of `Q`.
pub fn goodhart_tilt_factor(g: &Generator, r: &RewardSpec, lambda: f64) -> Result<Vec<TiltFactor>, RlhfError> {
    check_lambda(lambda)?;
    g.validate()?;
    r.validate(g)?;
    let mut fibres: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for c in g.completions.iter().filter(|c| c.base_prob > 0.0) {
        let q = dot(&r.weights, &c.quality);
        let term = (c.base_prob, (1.0 - r.alpha) * c.spurious / lambda);
        match fibres.iter_mut().find(|(fq, _)| *fq == q) {
            Some((_, members)) => members.push(term),
            None => fibres.push((q, vec![term])),
        }
    }
    fibres.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(fibres
        .into_iter()
        .map(|(q, members)| {
            let mass: f64 = members.iter().map(|m| m.0).sum();
            let max = members.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = members.iter().map(|(p, e)| p / mass * (e - max).exp()).sum();
            TiltFactor {
                q,
                mass,
                log_m: max + s.ln(),
            }
        })
        .collect())
}

/// Tilted quality law rebuilt from the base quality law, `exp(αQ/λ)` and the
/// fibre factors `m(Q)`.
pub fn goodhart_reconstruct(g: &Generator, r: &RewardSpec, lambda: f64) -> Result<PosteriorDist, RlhfError> {
    let factors = goodhart_tilt_factor(g, r, lambda)?;
    let logits: Vec<f64> = factors
        .iter()
        .map(|f| f.mass.ln() + r.alpha * f.q / lambda + f.log_m)
        .collect();
    let probs = softmax(&logits);
    let points: Vec<f64> = factors.iter().map(|f| f.q.clamp(0.0, 1.0)).collect();
    Ok(PosteriorDist::new(&points, &probs)?)
}

/// Accept/regenerate indirect value `max(q (1 + c) - c, -d)`.
pub fn accept_regenerate_value(q: f64, c: f64, d: f64) -> Result<f64, RlhfError> {
    if !(c > 0.0) || !(d >= 0.0) || !(0.0..=1.0).contains(&q) {
        return Err(RlhfError::InvalidReward(format!(
            "need c > 0, d >= 0, q in [0,1]; got c={c}, d={d}, q={q}"
        )));
    }
    Ok((q * (1.0 + c) - c).max(-d))
}

/// Total variation distance between two generators' completion probabilities.
pub fn total_variation(a: &Generator, b: &Generator) -> f64 {
    0.5 * a
        .completions
        .iter()
        .zip(&b.completions)
        .map(|(x, y)| (x.base_prob - y.base_prob).abs())
        .sum::<f64>()
}

/// `g` re-weighted to the base-probability-proportional law on the maximisers of `r`.
pub fn argmax_law(g: &Generator, r: &RewardSpec) -> Generator {
    let rewards: Vec<f64> = g.completions.iter().map(|c| r.reward(c)).collect();
    let max = g
        .completions
        .iter()
        .zip(&rewards)
        .filter(|(c, _)| c.base_prob > 0.0)
        .map(|(_, r)| *r)
        .fold(f64::NEG_INFINITY, f64::max);
    let on_top = |i: usize| g.completions[i].base_prob > 0.0 && rewards[i] >= max - PROB_TOL;
    let mass: f64 = (0..rewards.len())
        .filter(|&i| on_top(i))
        .map(|i| g.completions[i].base_prob)
        .sum();
    let mut out = g.clone();
    for (i, c) in out.completions.iter_mut().enumerate() {
        c.base_prob = if on_top(i) { c.base_prob / mass } else { 0.0 };
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub achieved_eval: f64,
    pub tax: f64,
    pub mean_quality: f64,
    pub fosd_vs_base: bool,
}

/// Tilts with `reward` at each `λ` and scores the result under `w_eval`.
pub fn lambda_sweep(g: &Generator, reward: &RewardSpec, w_eval: &[f64], lambdas: &[f64]) -> Result<Vec<SweepRow>, RlhfError> {
    let base_law = induced_quality_dist(g, w_eval)?;
    lambdas
        .iter()
        .map(|&lambda| {
            let tilted = tilt(g, reward, lambda)?;
            let law = induced_quality_dist(&tilted, w_eval)?;
            let t = tax_of(g, &tilted, w_eval);
            Ok(SweepRow {
                lambda,
                achieved_eval: t.achieved_eval,
                tax: t.tax,
                mean_quality: law.mean(),
                fosd_vs_base: fosd_check(&law, &base_law),
            })
        })
        .collect()
}

/// Random generator with uniform quality and spurious scores, for property tests.
pub fn random_generator<R: rand::Rng + ?Sized>(rng: &mut R, completions: usize, criteria: usize) -> Generator {
    let raw: Vec<f64> = (0..completions).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut comps: Vec<Completion> = raw
        .iter()
        .enumerate()
        .map(|(i, p)| Completion {
            label: format!("z{}", i + 1),
            base_prob: p / total,
            quality: (0..criteria).map(|_| rng.gen_range(0.0..=1.0)).collect(),
            spurious: rng.gen_range(0.0..=1.0),
        })
        .collect();
    // pin the sum to one exactly
    let rest: f64 = comps[1..].iter().map(|c| c.base_prob).sum();
    comps[0].base_prob = 1.0 - rest;
    Generator {
        completions: comps,
        prompt: None,
    }
}
