//! Discrete Bayes-plausible belief distributions on `[0, 1]`.
//!
//! A [`PosteriorDist`] is the law of a posterior `Q = P(Y = 1 | S)` for some
//! signal `S`. Everything here is exact and finite: convex-order comparisons
//! use the stop-loss characterisation evaluated at the kinks of both
//! piecewise-linear transforms, which is exact for finitely supported laws.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Probability-arithmetic tolerance (weights, stop-loss values).
pub const PROB_TOL: f64 = 1e-12;
/// Tolerance used when comparing means.
pub const MEAN_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeliefError {
    #[error("distribution has no support (all weights are zero or no points given)")]
    EmptySupport,
    #[error("belief point {0} is outside [0, 1]")]
    PointOutOfRange(f64),
    #[error("weight {0} is negative or not finite")]
    NegativeWeight(f64),
    #[error("{points} points but {weights} weights")]
    LengthMismatch { points: usize, weights: usize },
    #[error("stop-loss level {0} is outside [0, 1]")]
    KOutOfRange(f64),
    #[error("invalid two-point geometry: need 0 < mu <= q_high <= 1, got mu={mu}, q_high={q_high}")]
    InvalidGeometry { mu: f64, q_high: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("garbling kernel row {row} is not a probability vector")]
    InvalidKernelRow { row: usize },
}

/// Comparison tolerances. Defaults are `PROB_TOL` and `MEAN_TOL`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub prob: f64,
    pub mean: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            prob: PROB_TOL,
            mean: MEAN_TOL,
        }
    }
}

/// Result of a convex-order comparison of two laws `A` and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CxOrdering {
    /// `A` is a mean-preserving spread of `B`.
    ADominates,
    BDominates,
    Equal,
    Incomparable,
    MeansDiffer,
}

impl CxOrdering {
    /// `A ⪰cx B` (strictly or with equality).
    pub fn a_at_least(self) -> bool {
        matches!(self, CxOrdering::ADominates | CxOrdering::Equal)
    }

    pub fn flip(self) -> Self {
        match self {
            CxOrdering::ADominates => CxOrdering::BDominates,
            CxOrdering::BDominates => CxOrdering::ADominates,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CxOrdering::ADominates => "a_dominates",
            CxOrdering::BDominates => "b_dominates",
            CxOrdering::Equal => "equal",
            CxOrdering::Incomparable => "incomparable",
            CxOrdering::MeansDiffer => "means_differ",
        }
    }
}

/// A finitely supported distribution of posterior beliefs.
///
/// Canonical form: support strictly increasing, no zero-weight atoms, weights
/// summing to one. Two laws are equal iff their canonical forms are equal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorDist {
    support: Vec<f64>,
    weights: Vec<f64>,
    #[serde(skip)]
    mean: f64,
}

/// Serialized form `{ support = [...], weights = [...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistRecord {
    pub support: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TryFrom<DistRecord> for PosteriorDist {
    type Error = BeliefError;

    fn try_from(r: DistRecord) -> Result<Self, Self::Error> {
        PosteriorDist::new(&r.support, &r.weights)
    }
}

impl From<&PosteriorDist> for DistRecord {
    fn from(d: &PosteriorDist) -> Self {
        DistRecord {
            support: d.support.clone(),
            weights: d.weights.clone(),
        }
    }
}

impl<'de> Deserialize<'de> for PosteriorDist {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let rec = DistRecord::deserialize(de)?;
        PosteriorDist::try_from(rec).map_err(serde::de::Error::custom)
    }
}

impl PosteriorDist {
    /// Builds the canonical law from raw points and unnormalised weights.
    ///
    /// Points closer than `PROB_TOL` are merged (placed at their weighted
    /// mean, so the overall mean is unchanged); zero-weight atoms are dropped.
    pub fn new(points: &[f64], weights: &[f64]) -> Result<Self, BeliefError> {
        if points.len() != weights.len() {
            return Err(BeliefError::LengthMismatch {
                points: points.len(),
                weights: weights.len(),
            });
        }
        let mut atoms = Vec::with_capacity(points.len());
        for (&q, &w) in points.iter().zip(weights) {
            if !(0.0..=1.0).contains(&q) {
                return Err(BeliefError::PointOutOfRange(q));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(BeliefError::NegativeWeight(w));
            }
            if w > 0.0 {
                atoms.push((q, w));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if atoms.is_empty() || total <= 0.0 {
            return Err(BeliefError::EmptySupport);
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut support: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut mass: Vec<f64> = Vec::with_capacity(atoms.len());
        for (q, w) in atoms {
            match (support.last_mut(), mass.last_mut()) {
                (Some(last_q), Some(last_w)) if q - *last_q <= PROB_TOL => {
                    let merged = *last_w + w;
                    *last_q = ((*last_q * *last_w + q * w) / merged).clamp(0.0, 1.0);
                    *last_w = merged;
                }
                _ => {
                    support.push(q);
                    mass.push(w);
                }
            }
        }
        let weights: Vec<f64> = mass.iter().map(|w| w / total).collect();
        let mean = support.iter().zip(&weights).map(|(q, w)| q * w).sum();
        Ok(Self {
            support,
            weights,
            mean,
        })
    }

    pub fn point_mass(q: f64) -> Result<Self, BeliefError> {
        Self::new(&[q], &[1.0])
    }

    /// Law on the uniform grid `{0, 1/(n-1), ..., 1}` with the given weights.
    pub fn on_uniform_grid(weights: &[f64]) -> Result<Self, BeliefError> {
        let n = weights.len();
        if n < 2 {
            return Err(BeliefError::EmptySupport);
        }
        let points: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        Self::new(&points, weights)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Prior mean `μ = E[Q]`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn is_point_mass(&self) -> bool {
        self.support.len() == 1
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    /// `E[φ(Q)]`.
    pub fn expect<F: Fn(f64) -> f64>(&self, phi: F) -> f64 {
        self.atoms().map(|(q, w)| w * phi(q)).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.expect(|q| q * q)
    }

    pub fn variance(&self) -> f64 {
        (self.second_moment() - self.mean * self.mean).max(0.0)
    }

    /// Survival function `P(Q >= t)`.
    pub fn survival(&self, t: f64) -> f64 {
        self.atoms().filter(|&(q, _)| q >= t).map(|(_, w)| w).sum()
    }

    pub fn to_record(&self) -> DistRecord {
        DistRecord::from(self)
    }
}

/// Stop-loss transform `E[(Q - k)+]`.
pub fn stop_loss(d: &PosteriorDist, k: f64) -> Result<f64, BeliefError> {
    if !(0.0..=1.0).contains(&k) {
        return Err(BeliefError::KOutOfRange(k));
    }
    Ok(stop_loss_unchecked(d, k))
}

pub(crate) fn stop_loss_unchecked(d: &PosteriorDist, k: f64) -> f64 {
    d.atoms().map(|(q, w)| w * (q - k).max(0.0)).sum()
}

/// The kinks of both stop-loss transforms plus the endpoints.
fn comparison_grid(a: &PosteriorDist, b: &PosteriorDist) -> Vec<f64> {
    let mut ks: Vec<f64> = a
        .support()
        .iter()
        .chain(b.support())
        .copied()
        .chain([0.0, 1.0])
        .collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    ks
}

pub fn convex_order_compare(a: &PosteriorDist, b: &PosteriorDist) -> CxOrdering {
    convex_order_compare_with(a, b, Tolerances::default())
}

/// Convex-order comparison via stop-loss transforms on the union support.
pub fn convex_order_compare_with(a: &PosteriorDist, b: &PosteriorDist, tol: Tolerances) -> CxOrdering {
    if (a.mean() - b.mean()).abs() > tol.mean {
        return CxOrdering::MeansDiffer;
    }
    let mut a_above = false;
    let mut b_above = false;
    for k in comparison_grid(a, b) {
        let diff = stop_loss_unchecked(a, k) - stop_loss_unchecked(b, k);
        if diff > tol.prob {
            a_above = true;
        } else if diff < -tol.prob {
            b_above = true;
        }
    }
    match (a_above, b_above) {
        (false, false) => CxOrdering::Equal,
        (true, false) => CxOrdering::ADominates,
        (false, true) => CxOrdering::BDominates,
        (true, true) => CxOrdering::Incomparable,
    }
}

/// Two-point law on `{0, q_high}` with mean `mu`.
pub fn two_point(mu: f64, q_high: f64) -> Result<PosteriorDist, BeliefError> {
    if !(mu > 0.0 && mu <= q_high && q_high <= 1.0) {
        return Err(BeliefError::InvalidGeometry { mu, q_high });
    }
    let upper = mu / q_high;
    PosteriorDist::new(&[0.0, q_high], &[1.0 - upper, upper])
}

/// Row-stochastic garbling kernel: rows are source belief atoms, columns are
/// garbled signal labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarblingKernel {
    rows: Vec<Vec<f64>>,
}

impl GarblingKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, BeliefError> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if cols == 0 {
            return Err(BeliefError::EmptySupport);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(BeliefError::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > PROB_TOL {
                return Err(BeliefError::InvalidKernelRow { row: i });
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { rows }
    }

    /// Every row equal: the garbled signal carries no information.
    pub fn uninformative(n: usize) -> Self {
        Self {
            rows: vec![vec![1.0]; n],
        }
    }

    /// Binary symmetric channel on a two-atom source.
    pub fn symmetric_flip(p: f64) -> Result<Self, BeliefError> {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }
}

/// Posterior law of a garbled signal.
///
/// `d` is read as its canonical signal (`P(S = q_i) = w_i`,
/// `P(Y = 1 | S = q_i) = q_i`); column `j` of the kernel receives mass
/// `Σ_i w_i M(i, j)` and belief `Σ_i w_i q_i M(i, j) / mass`.
pub fn garble(d: &PosteriorDist, kernel: &GarblingKernel) -> Result<PosteriorDist, BeliefError> {
    if kernel.n_rows() != d.len() {
        return Err(BeliefError::DimensionMismatch {
            expected: d.len(),
            got: kernel.n_rows(),
        });
    }
    let mut points = Vec::with_capacity(kernel.n_cols());
    let mut masses = Vec::with_capacity(kernel.n_cols());
    for j in 0..kernel.n_cols() {
        let mut mass = 0.0;
        let mut joint = 0.0;
        for ((q, w), row) in d.atoms().zip(kernel.rows()) {
            mass += w * row[j];
            joint += w * q * row[j];
        }
        if mass > 0.0 {
            points.push((joint / mass).clamp(0.0, 1.0));
            masses.push(mass);
        }
    }
    PosteriorDist::new(&points, &masses)
}

/// Mixture `Σ_x P(x) Q_x` of belief laws (e.g. prompt mixtures).
pub fn mixture(components: &[(f64, PosteriorDist)]) -> Result<PosteriorDist, BeliefError> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (p, d) in components {
        if !(*p >= 0.0) {
            return Err(BeliefError::NegativeWeight(*p));
        }
        for (q, w) in d.atoms() {
            points.push(q);
            weights.push(p * w);
        }
    }
    PosteriorDist::new(&points, &weights)
}
