//! Decision-stage rational inattention with a limited menu.
//!
//! A user either ignores a deployed tool (value `V(μ)`) or processes its
//! output as delivered, paying `λ_cog · I(Y; Q)`. The menu is fixed: no
//! operation here lets the user garble a tool's output.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beliefs::{convex_order_compare, CxOrdering, PosteriorDist, MEAN_TOL};
use crate::decide::{welfare, DecisionProblem};
use crate::learn::mutual_information;

/// Mutual-information differences at or below this count as zero.
pub const ZERO_INFO_TOL: f64 = 1e-12;
/// Welfare differences at or below this are ties.
pub const WELFARE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttentionError {
    #[error("pipelines disagree on the prior mean: {mean0} vs {mean1}")]
    MeanMismatch { mean0: f64, mean1: f64 },
    #[error("embedding saves no attention (ΔMI = {0})")]
    ZeroAttentionSavings(f64),
    #[error("attention price must be >= 0, got {0}")]
    NegativePrice(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyUnit {
    #[default]
    Nats,
    Bits,
}

impl EntropyUnit {
    fn per_nat(self) -> f64 {
        match self {
            EntropyUnit::Nats => 1.0,
            EntropyUnit::Bits => std::f64::consts::LOG2_E,
        }
    }
}

/// `I(Y; Q) = h(μ) - E[h(Q)]` in nats.
pub fn mutual_info(d: &PosteriorDist) -> f64 {
    mutual_information(d)
}

pub fn mutual_info_in(d: &PosteriorDist, unit: EntropyUnit) -> f64 {
    mutual_information(d) * unit.per_nat()
}

/// Which deployed pipeline: preference-free (`Q0`) or embedded (`Q1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Separated,
    Embedded,
}

/// A decision problem plus the posterior laws of both pipelines.
#[derive(Debug, Clone)]
pub struct RiScenario {
    dp: DecisionProblem,
    q0: PosteriorDist,
    q1: PosteriorDist,
    unit: EntropyUnit,
}

impl RiScenario {
    pub fn new(dp: DecisionProblem, q0: PosteriorDist, q1: PosteriorDist) -> Result<Self, AttentionError> {
        if (q0.mean() - q1.mean()).abs() > MEAN_TOL {
            return Err(AttentionError::MeanMismatch {
                mean0: q0.mean(),
                mean1: q1.mean(),
            });
        }
        Ok(Self {
            dp,
            q0,
            q1,
            unit: EntropyUnit::Nats,
        })
    }

    /// Measure information in `unit`; this only rescales every `λ`.
    pub fn with_unit(mut self, unit: EntropyUnit) -> Self {
        self.unit = unit;
        self
    }

    pub fn prior_mean(&self) -> f64 {
        self.q0.mean()
    }

    pub fn decision_problem(&self) -> &DecisionProblem {
        &self.dp
    }

    pub fn law(&self, which: Pipeline) -> &PosteriorDist {
        match which {
            Pipeline::Separated => &self.q0,
            Pipeline::Embedded => &self.q1,
        }
    }

    /// `V(μ)`, the value of ignoring the tool.
    pub fn prior_value(&self) -> f64 {
        self.dp.value_unchecked(self.prior_mean())
    }

    pub fn expected_value(&self, which: Pipeline) -> f64 {
        welfare(&self.dp, self.law(which))
    }

    pub fn information(&self, which: Pipeline) -> f64 {
        mutual_info_in(self.law(which), self.unit)
    }

    /// `Δ_I = E[V(Q0)] - E[V(Q1)]`.
    pub fn information_loss(&self) -> f64 {
        self.expected_value(Pipeline::Separated) - self.expected_value(Pipeline::Embedded)
    }

    /// `Δ_MI = I(Q0) - I(Q1)`.
    pub fn attention_savings(&self) -> f64 {
        self.information(Pipeline::Separated) - self.information(Pipeline::Embedded)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineWelfare {
    pub value: f64,
    /// Using the tool strictly beats ignoring it.
    pub used: bool,
}

/// `W_i = max(V(μ), E[V(Q_i)] - λ_cog I(Y; Q_i))`.
pub fn pipeline_welfare(s: &RiScenario, which: Pipeline, lambda_cog: f64) -> Result<PipelineWelfare, AttentionError> {
    if !(lambda_cog >= 0.0) {
        return Err(AttentionError::NegativePrice(lambda_cog));
    }
    let ignore = s.prior_value();
    let net = s.expected_value(which) - lambda_cog * s.information(which);
    Ok(if net > ignore {
        PipelineWelfare { value: net, used: true }
    } else {
        PipelineWelfare {
            value: ignore,
            used: false,
        }
    })
}

/// `λ̄_i = (E[V(Q_i)] - V(μ)) / I(Y; Q_i)`, or 0 when `I = 0`.
pub fn use_threshold(s: &RiScenario, which: Pipeline) -> f64 {
    let info = s.information(which);
    if info <= ZERO_INFO_TOL {
        return 0.0;
    }
    (s.expected_value(which) - s.prior_value()) / info
}

/// `λ* = Δ_I / Δ_MI`.
pub fn reversal_threshold(s: &RiScenario) -> Result<f64, AttentionError> {
    let savings = s.attention_savings();
    if savings <= ZERO_INFO_TOL {
        return Err(AttentionError::ZeroAttentionSavings(savings));
    }
    Ok(s.information_loss() / savings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SeparationDominates,
    EmbeddingDominatesBothUsed,
    EmbeddingDominatesUptake,
    Tie,
    BothIgnored,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SeparationDominates => "separation_dominates",
            Regime::EmbeddingDominatesBothUsed => "embedding_dominates_both_used",
            Regime::EmbeddingDominatesUptake => "embedding_dominates_uptake",
            Regime::Tie => "tie",
            Regime::BothIgnored => "both_ignored",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimePoint {
    pub lambda_cog: f64,
    pub w0: PipelineWelfare,
    pub w1: PipelineWelfare,
    pub regime: Regime,
    /// `λ_cog` sits on a use threshold, where the strict-use convention decides.
    pub at_use_threshold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    pub points: Vec<RegimePoint>,
    pub cx_relation: CxOrdering,
    /// `Q0 ⪰cx Q1` but `Δ_MI < 0`; would contradict monotonicity of `I` in convex order.
    pub mi_order_violation: bool,
    /// Both-used points whose winner disagrees with the `λ*` rule.
    pub lambda_star_mismatches: Vec<f64>,
}

/// Classifies each attention price by comparing `W_0` and `W_1`.
pub fn reversal_region(s: &RiScenario, lambdas: &[f64]) -> Result<RegionReport, AttentionError> {
    let cx_relation = convex_order_compare(&s.q0, &s.q1);
    let savings = s.attention_savings();
    let mi_order_violation = cx_relation.a_at_least() && savings < -ZERO_INFO_TOL;
    let lambda_star = reversal_threshold(s).ok();
    let bars = [
        use_threshold(s, Pipeline::Separated),
        use_threshold(s, Pipeline::Embedded),
    ];

    let mut points = Vec::with_capacity(lambdas.len());
    let mut lambda_star_mismatches = Vec::new();
    for &lambda_cog in lambdas {
        let w0 = pipeline_welfare(s, Pipeline::Separated, lambda_cog)?;
        let w1 = pipeline_welfare(s, Pipeline::Embedded, lambda_cog)?;
        let diff = w1.value - w0.value;
        let regime = match (w0.used, w1.used) {
            (false, false) => Regime::BothIgnored,
            _ if diff.abs() <= WELFARE_TIE_TOL => Regime::Tie,
            (true, true) if diff > 0.0 => Regime::EmbeddingDominatesBothUsed,
            (false, true) if diff > 0.0 => Regime::EmbeddingDominatesUptake,
            _ => Regime::SeparationDominates,
        };
        if let (true, true, Some(star)) = (w0.used, w1.used, lambda_star) {
            let predicted_embedding = lambda_cog > star;
            let observed_embedding = diff > 0.0;
            if regime != Regime::Tie && predicted_embedding != observed_embedding {
                lambda_star_mismatches.push(lambda_cog);
            }
        }
        let at_use_threshold = bars.iter().any(|b| (lambda_cog - b).abs() <= 1e-12);
        points.push(RegimePoint {
            lambda_cog,
            w0,
            w1,
            regime,
            at_use_threshold,
        });
    }
    Ok(RegionReport {
        points,
        cx_relation,
        mi_order_violation,
        lambda_star_mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decide::CostPair;
    use std::f64::consts::LN_2;

    fn matching() -> DecisionProblem {
        DecisionProblem::from_costs(&CostPair::new(1.0, 1.0).unwrap())
    }

    fn coin() -> PosteriorDist {
        PosteriorDist::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap()
    }

    fn inner() -> PosteriorDist {
        PosteriorDist::new(&[0.25, 0.75], &[0.5, 0.5]).unwrap()
    }

    fn demo() -> RiScenario {
        RiScenario::new(matching(), coin(), inner()).unwrap()
    }

    // hand arithmetic: h(0.75) = -(0.75 ln 0.75 + 0.25 ln 0.25)
    fn h75() -> f64 {
        -(0.75 * 0.75f64.ln() + 0.25 * 0.25f64.ln())
    }

    #[test]
    fn mutual_info_examples() {
        assert_eq!(mutual_info(&PosteriorDist::point_mass(0.3).unwrap()), 0.0);
        assert!((mutual_info(&coin()) - LN_2).abs() < 1e-15);
        assert!((mutual_info(&inner()) - (LN_2 - h75())).abs() < 1e-15);
        assert!((mutual_info_in(&coin(), EntropyUnit::Bits) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pipeline_welfare_examples() {
        let s = demo();
        let w = pipeline_welfare(&s, Pipeline::Separated, 0.0).unwrap();
        assert_eq!(w, PipelineWelfare { value: 0.0, used: true });

        let w = pipeline_welfare(&s, Pipeline::Separated, 1.0).unwrap();
        assert_eq!(w, PipelineWelfare { value: -0.5, used: false });

        let flat = RiScenario::new(matching(), PosteriorDist::point_mass(0.5).unwrap(), coin()).unwrap();
        for lambda in [0.0, 0.5, 10.0] {
            let w = pipeline_welfare(&flat, Pipeline::Separated, lambda).unwrap();
            assert!(!w.used);
            assert_eq!(w.value, -0.5);
        }
        assert!(pipeline_welfare(&s, Pipeline::Separated, -1.0).is_err());
    }

    #[test]
    fn use_threshold_examples() {
        let s = demo();
        assert!((use_threshold(&s, Pipeline::Separated) - 0.5 / LN_2).abs() < 1e-12);
        assert!((use_threshold(&s, Pipeline::Separated) - 0.721348).abs() < 1e-6);
        assert!((use_threshold(&s, Pipeline::Embedded) - 0.25 / (LN_2 - h75())).abs() < 1e-12);
        assert!((use_threshold(&s, Pipeline::Embedded) - 1.911139).abs() < 1e-6);
        let flat = RiScenario::new(matching(), PosteriorDist::point_mass(0.5).unwrap(), coin()).unwrap();
        assert_eq!(use_threshold(&flat, Pipeline::Separated), 0.0);
    }

    #[test]
    fn reversal_threshold_examples() {
        let s = RiScenario::new(matching(), coin(), PosteriorDist::point_mass(0.5).unwrap()).unwrap();
        assert!((reversal_threshold(&s).unwrap() - 0.5 / LN_2).abs() < 1e-12);
        let star = reversal_threshold(&demo()).unwrap();
        assert!((star - 0.25 / h75()).abs() < 1e-12);
        assert!((star - 0.444575).abs() < 1e-6);
        let same = RiScenario::new(matching(), coin(), coin()).unwrap();
        assert!(matches!(
            reversal_threshold(&same),
            Err(AttentionError::ZeroAttentionSavings(_))
        ));
    }

    #[test]
    fn regime_examples() {
        let r = reversal_region(&demo(), &[0.3, 0.6, 1.0, 2.5]).unwrap();
        let regimes: Vec<Regime> = r.points.iter().map(|p| p.regime).collect();
        assert_eq!(
            regimes,
            vec![
                Regime::SeparationDominates,
                Regime::EmbeddingDominatesBothUsed,
                Regime::EmbeddingDominatesUptake,
                Regime::BothIgnored,
            ]
        );
        assert_eq!(r.cx_relation, CxOrdering::ADominates);
        assert!(!r.mi_order_violation);
        assert!(r.lambda_star_mismatches.is_empty());
    }

    #[test]
    fn indifference_at_lambda_star() {
        let s = demo();
        let star = reversal_threshold(&s).unwrap();
        let r = reversal_region(&s, &[star]).unwrap();
        let p = r.points[0];
        assert!((p.w1.value - p.w0.value).abs() <= 1e-9);
        assert_eq!(p.regime, Regime::Tie);
    }

    #[test]
    fn units_rescale_thresholds() {
        let nats = reversal_threshold(&demo()).unwrap();
        let bits = reversal_threshold(&demo().with_unit(EntropyUnit::Bits)).unwrap();
        assert!((bits - nats * LN_2).abs() < 1e-12);
    }

    #[test]
    fn mismatched_means_are_rejected() {
        let err = RiScenario::new(matching(), coin(), PosteriorDist::point_mass(0.4).unwrap()).unwrap_err();
        assert!(matches!(err, AttentionError::MeanMismatch { .. }));
    }
}
