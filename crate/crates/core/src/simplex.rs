//! Belief vectors on the probability simplex over `K` outcomes.
//!
//! Convex order for vector laws is decided by a martingale coupling: `A`
//! dominates `B` iff there are joint weights `π(i, j) >= 0` with marginals
//! `a`, `b` and `E[A | B = b_j] = b_j`. This is a linear feasibility problem
//! solved with [`crate::lp::phase_one`]. In `K > 2` the order is genuinely
//! partial, so `Incomparable` verdicts come with a convex witness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beliefs::{CxOrdering, PosteriorDist, MEAN_TOL, PROB_TOL};
use crate::decide::DecisionProblem;
use crate::lp::{phase_one, LpError};

pub const DV_CHORDS: usize = 1000;
pub const DV_SEED: u64 = 0x5eed_d1ce;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplexError {
    #[error("support is empty")]
    EmptySupport,
    #[error("point {0:?} is not on the probability simplex")]
    NotOnSimplex(Vec<f64>),
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{points} points but {weights} weights")]
    LengthMismatch { points: usize, weights: usize },
    #[error("weights must be nonnegative with positive total")]
    InvalidWeights,
    #[error("decision problem needs at least one action")]
    NoActions,
    #[error("payoff table is malformed: {0}")]
    BadPayoffs(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

fn on_simplex(q: &[f64]) -> bool {
    !q.is_empty() && q.iter().all(|x| *x >= -PROB_TOL) && (q.iter().sum::<f64>() - 1.0).abs() <= PROB_TOL
}

fn check_point(q: &[f64], k: usize) -> Result<(), SimplexError> {
    if q.len() != k {
        return Err(SimplexError::DimensionMismatch { expected: k, got: q.len() });
    }
    if !on_simplex(q) {
        return Err(SimplexError::NotOnSimplex(q.to_vec()));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Discrete law of a belief vector. Canonical form: atoms sorted
/// lexicographically, no zero weights, atoms closer than `PROB_TOL` merged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexDist {
    support: Vec<Vec<f64>>,
    weights: Vec<f64>,
    #[serde(skip)]
    mean: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimplexRecord {
    pub support: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl<'de> Deserialize<'de> for SimplexDist {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let r = SimplexRecord::deserialize(de)?;
        SimplexDist::new(&r.support, &r.weights).map_err(serde::de::Error::custom)
    }
}

impl SimplexDist {
    pub fn new(points: &[Vec<f64>], weights: &[f64]) -> Result<Self, SimplexError> {
        if points.len() != weights.len() {
            return Err(SimplexError::LengthMismatch {
                points: points.len(),
                weights: weights.len(),
            });
        }
        let k = points.first().ok_or(SimplexError::EmptySupport)?.len();
        for p in points {
            check_point(p, k)?;
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(SimplexError::InvalidWeights);
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(SimplexError::InvalidWeights);
        }

        let mut atoms: Vec<(Vec<f64>, f64)> = Vec::new();
        for (p, &w) in points.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            let p: Vec<f64> = p.iter().map(|x| x.max(0.0)).collect();
            match atoms.iter_mut().find(|(q, _)| max_abs_diff(q, &p) <= PROB_TOL) {
                Some((q, acc)) => {
                    for (qi, pi) in q.iter_mut().zip(&p) {
                        *qi = (*qi * *acc + pi * w) / (*acc + w);
                    }
                    *acc += w;
                }
                None => atoms.push((p, w)),
            }
        }
        atoms.sort_by(|a, b| {
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let (support, weights): (Vec<_>, Vec<_>) = atoms.into_iter().map(|(p, w)| (p, w / total)).unzip();
        let mut mean = vec![0.0; k];
        for (p, w) in support.iter().zip(&weights) {
            for (m, x) in mean.iter_mut().zip(p) {
                *m += w * x;
            }
        }
        Ok(Self { support, weights, mean })
    }

    pub fn point_mass(q: Vec<f64>) -> Result<Self, SimplexError> {
        Self::new(&[q], &[1.0])
    }

    /// `Q ↦ (1 - Q, Q)`.
    pub fn embed(d: &PosteriorDist) -> Self {
        let support: Vec<Vec<f64>> = d.support().iter().map(|p| vec![1.0 - p, *p]).collect();
        Self::new(&support, d.weights()).expect("embedded scalar law is on the simplex")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn expect<F: Fn(&[f64]) -> f64>(&self, phi: F) -> f64 {
        self.support.iter().zip(&self.weights).map(|(p, w)| w * phi(p)).sum()
    }

    /// `E‖Q - E Q‖²`.
    pub fn dispersion(&self) -> f64 {
        self.expect(|q| q.iter().zip(&self.mean).map(|(x, m)| (x - m) * (x - m)).sum())
    }

    pub fn to_record(&self) -> SimplexRecord {
        SimplexRecord {
            support: self.support.clone(),
            weights: self.weights.clone(),
        }
    }
}

/// Finite decision problem on `K` states: `payoffs[a][y] = u(a, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecisionTableK")]
pub struct DecisionProblemK {
    actions: Vec<String>,
    payoffs: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct DecisionTableK {
    actions: Vec<String>,
    payoffs: Vec<Vec<f64>>,
}

impl TryFrom<DecisionTableK> for DecisionProblemK {
    type Error = SimplexError;

    fn try_from(t: DecisionTableK) -> Result<Self, Self::Error> {
        DecisionProblemK::new(t.actions, t.payoffs)
    }
}

impl DecisionProblemK {
    pub fn new(actions: Vec<String>, payoffs: Vec<Vec<f64>>) -> Result<Self, SimplexError> {
        if actions.is_empty() {
            return Err(SimplexError::NoActions);
        }
        if actions.len() != payoffs.len() {
            return Err(SimplexError::BadPayoffs(format!(
                "{} actions but {} payoff rows",
                actions.len(),
                payoffs.len()
            )));
        }
        let k = payoffs[0].len();
        if k == 0 || payoffs.iter().any(|r| r.len() != k) {
            return Err(SimplexError::BadPayoffs("rows must share a positive length".into()));
        }
        if payoffs.iter().flatten().any(|u| !u.is_finite()) {
            return Err(SimplexError::BadPayoffs("non-finite payoff".into()));
        }
        Ok(Self { actions, payoffs })
    }

    pub fn from_scalar(dp: &DecisionProblem) -> Self {
        Self {
            actions: dp.actions().to_vec(),
            payoffs: dp.payoffs().iter().map(|r| r.to_vec()).collect(),
        }
    }

    /// One action per state paying 1 on a match and 0 otherwise.
    pub fn matching(k: usize) -> Self {
        let payoffs = (0..k)
            .map(|a| (0..k).map(|y| if a == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            actions: (0..k).map(|a| format!("guess_{a}")).collect(),
            payoffs,
        }
    }

    pub fn states(&self) -> usize {
        self.payoffs[0].len()
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn payoffs(&self) -> &[Vec<f64>] {
        &self.payoffs
    }

    fn value_unchecked(&self, q: &[f64]) -> f64 {
        self.payoffs.iter().map(|u| dot(u, q)).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn indirect_value_k(dp: &DecisionProblemK, q: &[f64]) -> Result<f64, SimplexError> {
    check_point(q, dp.states())?;
    Ok(dp.value_unchecked(q))
}

pub fn welfare_k(dp: &DecisionProblemK, d: &SimplexDist) -> Result<f64, SimplexError> {
    if d.dim() != dp.states() {
        return Err(SimplexError::DimensionMismatch {
            expected: dp.states(),
            got: d.dim(),
        });
    }
    Ok(d.expect(|q| dp.value_unchecked(q)))
}

/// `φ(x) = max_j (β_j + γ_j · x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexWitness {
    pub intercepts: Vec<f64>,
    pub slopes: Vec<Vec<f64>>,
}

impl ConvexWitness {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.intercepts
            .iter()
            .zip(&self.slopes)
            .map(|(b, g)| b + dot(g, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `E φ(b) - E φ(a)`; positive means `a` cannot dominate `b`.
    pub fn gap(&self, a: &SimplexDist, b: &SimplexDist) -> f64 {
        b.expect(|x| self.eval(x)) - a.expect(|x| self.eval(x))
    }
}

/// Outcome of one direction of the coupling problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    /// `π[i][j]`, rows indexed by the dominating law.
    Found(Vec<Vec<f64>>),
    Refuted(ConvexWitness),
}

/// Solves for a martingale coupling showing `b` is a mean-preserving
/// contraction of `a`. Infeasibility yields a convex witness built from the
/// Farkas vector.
pub fn martingale_coupling(a: &SimplexDist, b: &SimplexDist) -> Result<Coupling, SimplexError> {
    let k = a.dim();
    if b.dim() != k {
        return Err(SimplexError::DimensionMismatch { expected: k, got: b.dim() });
    }
    let (na, nb) = (a.len(), b.len());
    let var = |i: usize, j: usize| i * nb + j;
    let n = na * nb;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(na + nb + nb * k);
    let mut rhs = Vec::with_capacity(rows.capacity());
    for i in 0..na {
        let mut r = vec![0.0; n];
        for j in 0..nb {
            r[var(i, j)] = 1.0;
        }
        rows.push(r);
        rhs.push(a.weights[i]);
    }
    for j in 0..nb {
        let mut r = vec![0.0; n];
        for i in 0..na {
            r[var(i, j)] = 1.0;
        }
        rows.push(r);
        rhs.push(b.weights[j]);
    }
    for j in 0..nb {
        for y in 0..k {
            let mut r = vec![0.0; n];
            for i in 0..na {
                r[var(i, j)] = a.support[i][y];
            }
            rows.push(r);
            rhs.push(b.weights[j] * b.support[j][y]);
        }
    }

    let sol = phase_one(&rows, &rhs)?;
    if sol.feasible() {
        let plan = (0..na).map(|i| (0..nb).map(|j| sol.x[var(i, j)]).collect()).collect();
        return Ok(Coupling::Found(plan));
    }
    let v = &sol.y[na..na + nb];
    let g = &sol.y[na + nb..];
    Ok(Coupling::Refuted(ConvexWitness {
        intercepts: v.to_vec(),
        slopes: (0..nb).map(|j| g[j * k..(j + 1) * k].to_vec()).collect(),
    }))
}

/// Verdict plus the certificates behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct CxReportK {
    pub ordering: CxOrdering,
    /// Certificate that `a` does not dominate `b`.
    pub a_refuted: Option<ConvexWitness>,
    /// Certificate that `b` does not dominate `a`.
    pub b_refuted: Option<ConvexWitness>,
}

pub fn cx_compare_k_report(a: &SimplexDist, b: &SimplexDist) -> Result<CxReportK, SimplexError> {
    if a.dim() != b.dim() {
        return Err(SimplexError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if max_abs_diff(a.mean(), b.mean()) > MEAN_TOL {
        return Ok(CxReportK {
            ordering: CxOrdering::MeansDiffer,
            a_refuted: None,
            b_refuted: None,
        });
    }
    let refuted = |c: Coupling| match c {
        Coupling::Found(_) => None,
        Coupling::Refuted(w) => Some(w),
    };
    let a_refuted = refuted(martingale_coupling(a, b)?);
    let b_refuted = refuted(martingale_coupling(b, a)?);
    let ordering = match (a_refuted.is_none(), b_refuted.is_none()) {
        (true, true) => CxOrdering::Equal,
        (true, false) => CxOrdering::ADominates,
        (false, true) => CxOrdering::BDominates,
        (false, false) => CxOrdering::Incomparable,
    };
    Ok(CxReportK {
        ordering,
        a_refuted,
        b_refuted,
    })
}

pub fn cx_compare_k(a: &SimplexDist, b: &SimplexDist) -> Result<CxOrdering, SimplexError> {
    Ok(cx_compare_k_report(a, b)?.ordering)
}

/// Two symmetric two-point spreads about the barycentre of the 2-simplex,
/// along different directions and with different lengths.
pub fn incomparable_pair_k3() -> (SimplexDist, SimplexDist) {
    let c = 1.0 / 3.0;
    let spread = |dir: [f64; 3], len: f64| {
        let hi: Vec<f64> = dir.iter().map(|d| c + len * d).collect();
        let lo: Vec<f64> = dir.iter().map(|d| c - len * d).collect();
        SimplexDist::new(&[hi, lo], &[0.5, 0.5]).expect("spread stays inside the simplex")
    };
    (spread([1.0, -1.0, 0.0], 0.2), spread([1.0, 1.0, -2.0], 0.1))
}

/// Midpoint convexity of `h1 - h0` along [`DV_CHORDS`] random chords in the
/// interior of the `K`-simplex plus every chord between two anchors.
pub fn dv_check_k<F0, F1>(h0: F0, h1: F1, anchors: &[Vec<f64>], tol: f64) -> Result<bool, SimplexError>
where
    F0: Fn(&[f64]) -> f64,
    F1: Fn(&[f64]) -> f64,
{
    let k = anchors.first().ok_or(SimplexError::EmptySupport)?.len();
    for a in anchors {
        check_point(a, k)?;
    }
    let g = |x: &[f64]| h1(x) - h0(x);
    let convex_on = |x: &[f64], y: &[f64]| {
        let mid: Vec<f64> = x.iter().zip(y).map(|(p, q)| 0.5 * (p + q)).collect();
        g(&mid) <= 0.5 * (g(x) + g(y)) + tol
    };
    for (i, x) in anchors.iter().enumerate() {
        for y in &anchors[i + 1..] {
            if !convex_on(x, y) {
                return Ok(false);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DV_SEED);
    for _ in 0..DV_CHORDS {
        let x = interior_point(&mut rng, k);
        let y = interior_point(&mut rng, k);
        if !convex_on(&x, &y) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Uniform draw on the simplex, pulled slightly towards the barycentre.
fn interior_point<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| 0.998 * x / s + 0.002 / k as f64).collect()
}

/// `H_t(q) = 1 - (1 - t) Σ q_y²`: multiclass Brier risk plus `t Σ q_y²`.
pub fn quadratic_risk_k(t: f64) -> impl Fn(&[f64]) -> f64 {
    move |q: &[f64]| 1.0 - (1.0 - t) * q.iter().map(|x| x * x).sum::<f64>()
}

/// `C(Q) = (λ/2) (E‖Q - μ‖²)²`.
pub fn dispersion_friction_k(lambda: f64) -> impl Fn(&SimplexDist) -> f64 {
    move |d: &SimplexDist| {
        let v = d.dispersion();
        0.5 * lambda * v * v
    }
}

/// Optimum over two-point laws `{anchor, μ + s(μ - anchor)}` with mean `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RaySolution {
    pub dist: SimplexDist,
    pub s: f64,
    pub objective: f64,
}

fn ray_point(mu: &[f64], anchor: &[f64], s: f64) -> Vec<f64> {
    mu.iter().zip(anchor).map(|(m, a)| m + s * (m - a)).collect()
}

/// Largest `s` keeping `μ + s(μ - anchor)` on the simplex.
fn ray_limit(mu: &[f64], anchor: &[f64]) -> f64 {
    mu.iter()
        .zip(anchor)
        .filter(|(m, a)| *a > *m)
        .map(|(m, a)| m / (a - m))
        .fold(f64::INFINITY, f64::min)
}

fn ray_law(mu: &[f64], anchor: &[f64], s: f64) -> SimplexDist {
    if s == 0.0 {
        return SimplexDist::point_mass(mu.to_vec()).expect("prior is on the simplex");
    }
    let p = s / (1.0 + s);
    let far: Vec<f64> = ray_point(mu, anchor, s).iter().map(|x| x.max(0.0)).collect();
    let total: f64 = far.iter().sum();
    let far: Vec<f64> = far.iter().map(|x| x / total).collect();
    SimplexDist::new(&[anchor.to_vec(), far], &[p, 1.0 - p]).expect("ray stays on the simplex")
}

/// Grid search over `s ∈ [0, s_max]` (ties go to the smaller spread).
pub fn solve_two_point_ray<H, C>(h: H, friction: C, mu: &[f64], anchor: &[f64], grid_n: usize) -> Result<RaySolution, SimplexError>
where
    H: Fn(&[f64]) -> f64,
    C: Fn(&SimplexDist) -> f64,
{
    let k = mu.len();
    check_point(mu, k)?;
    check_point(anchor, k)?;
    if mu.iter().any(|m| *m <= 0.0) {
        return Err(SimplexError::InvalidParams("prior must be in the simplex interior".into()));
    }
    if max_abs_diff(mu, anchor) <= PROB_TOL {
        return Err(SimplexError::InvalidParams("anchor coincides with the prior".into()));
    }
    if grid_n < 2 {
        return Err(SimplexError::InvalidParams(format!("grid needs at least 2 points, got {grid_n}")));
    }
    let s_max = ray_limit(mu, anchor);
    let mut best: Option<RaySolution> = None;
    for i in 0..grid_n {
        let s = s_max * i as f64 / (grid_n - 1) as f64;
        let dist = ray_law(mu, anchor, s);
        let objective = dist.expect(&h) + friction(&dist);
        if best.as_ref().is_none_or(|b| objective < b.objective - 1e-12) {
            best = Some(RaySolution { dist, s, objective });
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// Optima of the quadratic family with dispersion friction across `ts`, and
/// the convex-order verdict between each consecutive pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReportK {
    pub ts: Vec<f64>,
    pub solutions: Vec<RaySolution>,
    pub links: Vec<CxOrdering>,
}

impl ChainReportK {
    /// Every optimum weakly dominates the next one.
    pub fn chain_ok(&self) -> bool {
        self.links.iter().all(|o| o.a_at_least())
    }
}

pub fn quadratic_chain_k(mu: &[f64], anchor: &[f64], lambda: f64, ts: &[f64], grid_n: usize) -> Result<ChainReportK, SimplexError> {
    if !(lambda > 0.0) {
        return Err(SimplexError::InvalidParams(format!("friction scale must be positive, got {lambda}")));
    }
    if ts.windows(2).any(|w| w[1] < w[0]) || ts.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(SimplexError::InvalidParams("ts must be sorted within [0, 1]".into()));
    }
    let solutions = ts
        .iter()
        .map(|&t| solve_two_point_ray(quadratic_risk_k(t), dispersion_friction_k(lambda), mu, anchor, grid_n))
        .collect::<Result<Vec<_>, _>>()?;
    let links = solutions
        .windows(2)
        .map(|w| cx_compare_k(&w[0].dist, &w[1].dist))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChainReportK {
        ts: ts.to_vec(),
        solutions,
        links,
    })
}

/// Random law on the `K`-simplex with 1 to `max_atoms` atoms.
pub fn random_simplex_dist<R: Rng + ?Sized>(rng: &mut R, k: usize, max_atoms: usize) -> SimplexDist {
    let n = rng.gen_range(1..=max_atoms.max(1));
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let s: f64 = e.iter().sum();
            e.iter().map(|x| x / s).collect()
        })
        .collect();
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    SimplexDist::new(&pts, &w).expect("normalised points are on the simplex")
}

/// Garbles `d` with a random row-stochastic kernel; the result is a
/// mean-preserving contraction of `d`.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, d: &SimplexDist, outputs: usize) -> SimplexDist {
    let m = outputs.max(1);
    let kernel: Vec<Vec<f64>> = (0..d.len())
        .map(|_| {
            let r: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let s: f64 = r.iter().sum();
            r.iter().map(|x| x / s).collect()
        })
        .collect();
    let mut pts = Vec::new();
    let mut ws = Vec::new();
    for o in 0..m {
        let mass: f64 = (0..d.len()).map(|i| d.weights[i] * kernel[i][o]).sum();
        let mut p = vec![0.0; d.dim()];
        for i in 0..d.len() {
            for (py, qy) in p.iter_mut().zip(&d.support[i]) {
                *py += d.weights[i] * kernel[i][o] * qy / mass;
            }
        }
        let s: f64 = p.iter().sum();
        pts.push(p.iter().map(|x| x / s).collect::<Vec<f64>>());
        ws.push(mass);
    }
    SimplexDist::new(&pts, &ws).expect("posterior means are on the simplex")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beliefs::convex_order_compare;
    use crate::decide::{indirect_value, welfare, CostPair};

    #[test]
    fn canonical_form() {
        let d = SimplexDist::new(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(d.support(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(d.weights(), &[0.5, 0.5]);
        assert_eq!(d.mean(), &[0.5, 0.5]);
        assert!(matches!(
            SimplexDist::new(&[vec![0.6, 0.6]], &[1.0]),
            Err(SimplexError::NotOnSimplex(_))
        ));
        assert!(matches!(
            SimplexDist::new(&[vec![1.0, 0.0], vec![1.0, 0.0, 0.0]], &[1.0, 1.0]),
            Err(SimplexError::DimensionMismatch { .. })
        ));
        let z = SimplexDist::new(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 0.0]).unwrap();
        assert_eq!(z.len(), 1);
    }

    #[test]
    fn serde_round_trip() {
        let d = SimplexDist::new(&[vec![0.2, 0.3, 0.5], vec![0.6, 0.2, 0.2]], &[0.25, 0.75]).unwrap();
        let s = toml::to_string(&d.to_record()).unwrap();
        let back: SimplexDist = toml::from_str(&s).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn indirect_value_examples() {
        let dp = DecisionProblemK::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0, 0.5], vec![0.0, 2.0, 0.0]],
        )
        .unwrap();
        assert_eq!(indirect_value_k(&dp, &[0.0, 1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(indirect_value_k(&dp, &[0.0, 0.0, 1.0]).unwrap(), 0.5);
        assert!(matches!(indirect_value_k(&dp, &[0.5, 0.6, 0.0]), Err(SimplexError::NotOnSimplex(_))));

        let scalar = DecisionProblem::from_costs(&CostPair::new(3.0, 1.0).unwrap());
        let vk = DecisionProblemK::from_scalar(&scalar);
        for p in [0.0, 0.1, 0.5, 0.75, 0.9, 1.0] {
            let a = indirect_value_k(&vk, &[1.0 - p, p]).unwrap();
            assert!((a - indirect_value(&scalar, p).unwrap()).abs() < 1e-15);
        }

        let single = DecisionProblemK::new(vec!["x".into()], vec![vec![1.0, 2.0, 3.0]]).unwrap();
        assert!((indirect_value_k(&single, &[0.2, 0.3, 0.5]).unwrap() - 2.3).abs() < 1e-15);
    }

    #[test]
    fn welfare_examples() {
        let dp = DecisionProblemK::matching(3);
        let mu = vec![0.2, 0.3, 0.5];
        let pm = SimplexDist::point_mass(mu.clone()).unwrap();
        assert_eq!(welfare_k(&dp, &pm).unwrap(), indirect_value_k(&dp, &mu).unwrap());
        let full = SimplexDist::new(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], &mu).unwrap();
        assert!((welfare_k(&dp, &full).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn point_mass_at_mean_is_dominated() {
        let d = SimplexDist::new(&[vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]], &[0.4, 0.6]).unwrap();
        let pm = SimplexDist::point_mass(d.mean().to_vec()).unwrap();
        assert_eq!(cx_compare_k(&d, &pm).unwrap(), CxOrdering::ADominates);
        assert_eq!(cx_compare_k(&pm, &d).unwrap(), CxOrdering::BDominates);
        assert_eq!(cx_compare_k(&d, &d).unwrap(), CxOrdering::Equal);
    }

    #[test]
    fn embedded_scalar_pairs_agree() {
        let wide = PosteriorDist::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        let narrow = PosteriorDist::new(&[0.25, 0.75], &[0.5, 0.5]).unwrap();
        let a = PosteriorDist::new(&[0.1, 0.9], &[0.5, 0.5]).unwrap();
        let b = PosteriorDist::new(&[0.0, 0.5, 1.0], &[0.25, 0.5, 0.25]).unwrap();
        let shifted = PosteriorDist::new(&[0.2, 0.9], &[0.5, 0.5]).unwrap();
        for (x, y) in [(&wide, &narrow), (&narrow, &wide), (&a, &b), (&a, &shifted), (&b, &b)] {
            let scalar = convex_order_compare(x, y);
            let vector = cx_compare_k(&SimplexDist::embed(x), &SimplexDist::embed(y)).unwrap();
            assert_eq!(scalar, vector, "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn k3_incomparable_with_witnesses() {
        let (a, b) = incomparable_pair_k3();
        assert!(max_abs_diff(a.mean(), b.mean()) < 1e-15);
        let r = cx_compare_k_report(&a, &b).unwrap();
        assert_eq!(r.ordering, CxOrdering::Incomparable);
        assert!(r.a_refuted.unwrap().gap(&a, &b) > 1e-9);
        assert!(r.b_refuted.unwrap().gap(&b, &a) > 1e-9);
    }

    #[test]
    fn means_differ() {
        let a = SimplexDist::point_mass(vec![0.5, 0.5, 0.0]).unwrap();
        let b = SimplexDist::point_mass(vec![0.4, 0.6, 0.0]).unwrap();
        assert_eq!(cx_compare_k(&a, &b).unwrap(), CxOrdering::MeansDiffer);
    }

    #[test]
    fn dv_examples() {
        let zero = |_: &[f64]| 0.0;
        let sq = |q: &[f64]| q.iter().map(|x| x * x).sum::<f64>();
        let anchors = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!(dv_check_k(zero, sq, &anchors, 1e-12).unwrap());
        assert!(!dv_check_k(sq, zero, &anchors, 1e-12).unwrap());
        let negent = |q: &[f64]| q.iter().map(|x| if *x > 0.0 { x * x.ln() } else { 0.0 }).sum::<f64>();
        assert!(dv_check_k(zero, negent, &anchors, 1e-12).unwrap());
    }

    #[test]
    fn quadratic_chain() {
        let mu = vec![0.3, 0.3, 0.4];
        let anchor = vec![1.0, 0.0, 0.0];
        let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
        let r = quadratic_chain_k(&mu, &anchor, 8.0, &ts, 401).unwrap();
        assert!(r.chain_ok(), "{:?}", r.links);
        let spreads: Vec<f64> = r.solutions.iter().map(|s| s.s).collect();
        assert!(spreads.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(spreads[4], 0.0);
        assert!(spreads[0] > 0.0);
    }

    #[test]
    fn garbling_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let d = random_simplex_dist(&mut rng, 3, 4);
            let g = random_contraction(&mut rng, &d, 3);
            assert!(max_abs_diff(d.mean(), g.mean()) < 1e-12);
            assert!(cx_compare_k(&d, &g).unwrap().a_at_least());
            let dp = DecisionProblemK::new(
                vec!["a".into(), "b".into(), "c".into()],
                (0..3).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
            )
            .unwrap();
            assert!(welfare_k(&dp, &d).unwrap() >= welfare_k(&dp, &g).unwrap() - 1e-12);
        }
    }

    #[test]
    fn embedded_welfare_matches_scalar() {
        let dp = DecisionProblem::from_costs(&CostPair::new(1.0, 2.0).unwrap());
        let d = PosteriorDist::new(&[0.1, 0.4, 0.8], &[0.3, 0.3, 0.4]).unwrap();
        let a = welfare_k(&DecisionProblemK::from_scalar(&dp), &SimplexDist::embed(&d)).unwrap();
        assert!((a - welfare(&dp, &d)).abs() < 1e-15);
    }
}
