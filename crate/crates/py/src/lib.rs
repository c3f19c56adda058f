//! Python module `infodesign`.
//!
//! Laws, risks and decision problems are exposed as classes; the remaining
//! operations are plain functions returning floats, strings, tuples or dicts.

use std::collections::BTreeMap;
use std::fmt::Display;

use infodesign::{attention, beliefs, decide, learn, rlhf, risk, scenario, selftest, simplex};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "PosteriorDist", frozen, from_py_object)]
#[derive(Clone)]
struct PyPosteriorDist(beliefs::PosteriorDist);

#[pymethods]
impl PyPosteriorDist {
    #[new]
    fn new(points: Vec<f64>, weights: Vec<f64>) -> PyResult<Self> {
        beliefs::PosteriorDist::new(&points, &weights).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn point_mass(q: f64) -> PyResult<Self> {
        beliefs::PosteriorDist::point_mass(q).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn two_point(mu: f64, q_high: f64) -> PyResult<Self> {
        beliefs::two_point(mu, q_high).map(Self).map_err(value_err)
    }

    #[getter]
    fn support(&self) -> Vec<f64> {
        self.0.support().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn variance(&self) -> f64 {
        self.0.variance()
    }

    fn survival(&self, t: f64) -> f64 {
        self.0.survival(t)
    }

    fn stop_loss(&self, k: f64) -> PyResult<f64> {
        beliefs::stop_loss(&self.0, k).map_err(value_err)
    }

    /// Posterior law after passing the signal through a row-stochastic kernel.
    fn garble(&self, kernel: Vec<Vec<f64>>) -> PyResult<Self> {
        let k = beliefs::GarblingKernel::new(kernel).map_err(value_err)?;
        beliefs::garble(&self.0, &k).map(Self).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("PosteriorDist(support={:?}, weights={:?})", self.0.support(), self.0.weights())
    }
}

/// `"a_dominates"`, `"b_dominates"`, `"equal"`, `"incomparable"` or `"means_differ"`.
#[pyfunction]
fn convex_order_compare(a: &PyPosteriorDist, b: &PyPosteriorDist) -> &'static str {
    beliefs::convex_order_compare(&a.0, &b.0).as_str()
}

#[pyfunction]
fn mixture(components: Vec<(f64, PyPosteriorDist)>) -> PyResult<PyPosteriorDist> {
    let parts: Vec<_> = components.into_iter().map(|(p, d)| (p, d.0)).collect();
    beliefs::mixture(&parts).map(PyPosteriorDist).map_err(value_err)
}

#[pyclass(name = "BayesRisk", frozen, from_py_object)]
#[derive(Clone)]
struct PyBayesRisk(risk::BayesRisk);

#[pymethods]
impl PyBayesRisk {
    #[staticmethod]
    fn log() -> Self {
        Self(risk::BayesRisk::log())
    }

    #[staticmethod]
    fn brier() -> Self {
        Self(risk::BayesRisk::brier())
    }

    #[staticmethod]
    fn weighted_ce(w0: f64, w1: f64) -> PyResult<Self> {
        risk::BayesRisk::weighted_ce(w0, w1).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn quadratic(t: f64) -> Self {
        Self(risk::BayesRisk::quadratic(t))
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    fn __call__(&self, q: f64) -> f64 {
        self.0.eval(q)
    }

    fn second_derivative(&self, q: f64) -> Option<f64> {
        self.0.second_derivative(q)
    }

    fn value_of_information(&self, d: &PyPosteriorDist) -> f64 {
        risk::value_of_information(&self.0, &d.0)
    }

    fn __repr__(&self) -> String {
        format!("BayesRisk({})", self.0.name())
    }
}

/// True when `h1 - h0` is convex on a grid of `n` points.
#[pyfunction]
#[pyo3(signature = (h0, h1, n = risk::DEFAULT_CURVATURE_GRID, tol = risk::DEFAULT_CURVATURE_TOL))]
fn check_dv(h0: &PyBayesRisk, h1: &PyBayesRisk, n: usize, tol: f64) -> PyResult<bool> {
    Ok(risk::check_dv(&h0.0, &h1.0, n, tol).map_err(value_err)?.holds())
}

#[pyfunction]
#[pyo3(signature = (h, h_tilde, n = risk::DEFAULT_CURVATURE_GRID))]
fn concavity_order(h: &PyBayesRisk, h_tilde: &PyBayesRisk, n: usize) -> PyResult<&'static str> {
    Ok(match risk::concavity_order(&h.0, &h_tilde.0, n).map_err(value_err)? {
        risk::ConcavityOrdering::HBelow => "h_below",
        risk::ConcavityOrdering::HAbove => "h_above",
        risk::ConcavityOrdering::Equal => "equal",
        risk::ConcavityOrdering::Incomparable => "incomparable",
    })
}

#[pyclass(name = "DecisionProblem", frozen, from_py_object)]
#[derive(Clone)]
struct PyDecisionProblem(decide::DecisionProblem);

#[pymethods]
impl PyDecisionProblem {
    /// `payoffs[a] = (u(a, y=0), u(a, y=1))`.
    #[new]
    fn new(actions: Vec<String>, payoffs: Vec<(f64, f64)>) -> PyResult<Self> {
        let payoffs = payoffs.into_iter().map(|(u0, u1)| [u0, u1]).collect();
        decide::DecisionProblem::new(actions, payoffs).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn from_costs(c_fp: f64, c_fn: f64) -> PyResult<Self> {
        let c = decide::CostPair::new(c_fp, c_fn).map_err(value_err)?;
        Ok(Self(decide::DecisionProblem::from_costs(&c)))
    }

    fn indirect_value(&self, q: f64) -> PyResult<f64> {
        decide::indirect_value(&self.0, q).map_err(value_err)
    }

    fn optimal_action(&self, q: f64) -> PyResult<String> {
        decide::optimal_action(&self.0, q).map(str::to_string).map_err(value_err)
    }

    fn welfare(&self, d: &PyPosteriorDist) -> f64 {
        decide::welfare(&self.0, &d.0)
    }
}

/// `(w0, w1, gap, relation)` for two pipelines feeding the same decision.
#[pyfunction]
fn pipeline_compare(dp: &PyDecisionProblem, q0: &PyPosteriorDist, q1: &PyPosteriorDist) -> (f64, f64, f64, &'static str) {
    let c = decide::pipeline_compare(&dp.0, &q0.0, &q1.0);
    (c.w0, c.w1, c.gap, c.cx_relation.as_str())
}

/// `(loss_sep, loss_emb, gap)` for the symmetric two-point pipelines.
#[pyfunction]
fn two_point_gap(mu: f64, delta: f64, delta_w: f64, c_fp: f64, c_fn: f64) -> PyResult<(f64, f64, f64)> {
    let g = decide::two_point_gap(mu, delta, delta_w, c_fp, c_fn).map_err(value_err)?;
    Ok((g.loss_sep, g.loss_emb, g.gap))
}

fn friction(kind: &str, param: f64) -> PyResult<learn::Friction> {
    match kind {
        "zero" => Ok(learn::Friction::Zero),
        "mutual_info" => learn::Friction::mutual_info(param).map_err(value_err),
        "dispersion" => learn::Friction::dispersion(param).map_err(value_err),
        other => Err(PyValueError::new_err(format!("unknown friction `{other}`"))),
    }
}

/// Optimal law as `(dist, objective)`; `friction` is `zero`, `mutual_info` or `dispersion`.
#[pyfunction]
#[pyo3(signature = (risk, mu, friction_kind, friction_param = 0.0, grid_n = learn::DEFAULT_GRID))]
fn solve_learning(
    risk: &PyBayesRisk,
    mu: f64,
    friction_kind: &str,
    friction_param: f64,
    grid_n: usize,
) -> PyResult<(PyPosteriorDist, f64)> {
    let p = learn::LearningProblem::new(risk.0.clone(), friction(friction_kind, friction_param)?, mu, grid_n)
        .map_err(value_err)?;
    let s = learn::solve_two_point(&p).map_err(value_err)?;
    Ok((PyPosteriorDist(s.dist), s.objective_value))
}

#[pyfunction]
fn solve_quadratic_closed_form(mu: f64, lambda: f64, t: f64) -> PyResult<(PyPosteriorDist, f64)> {
    let s = learn::solve_quadratic_closed_form(mu, lambda, t).map_err(value_err)?;
    Ok((PyPosteriorDist(s.dist), s.objective_value))
}

fn ri_scenario(dp: &PyDecisionProblem, q0: &PyPosteriorDist, q1: &PyPosteriorDist) -> PyResult<attention::RiScenario> {
    attention::RiScenario::new(dp.0.clone(), q0.0.clone(), q1.0.clone()).map_err(value_err)
}

/// `(lambda_bar_0, lambda_bar_1, lambda_star)`; `lambda_star` is None without attention savings.
#[pyfunction]
fn attention_thresholds(
    dp: &PyDecisionProblem,
    q0: &PyPosteriorDist,
    q1: &PyPosteriorDist,
) -> PyResult<(f64, f64, Option<f64>)> {
    let s = ri_scenario(dp, q0, q1)?;
    Ok((
        attention::use_threshold(&s, attention::Pipeline::Separated),
        attention::use_threshold(&s, attention::Pipeline::Embedded),
        attention::reversal_threshold(&s).ok(),
    ))
}

/// Regime name at each attention price.
#[pyfunction]
fn reversal_region(
    dp: &PyDecisionProblem,
    q0: &PyPosteriorDist,
    q1: &PyPosteriorDist,
    lambdas: Vec<f64>,
) -> PyResult<Vec<(f64, &'static str)>> {
    let s = ri_scenario(dp, q0, q1)?;
    let r = attention::reversal_region(&s, &lambdas).map_err(value_err)?;
    Ok(r.points.iter().map(|p| (p.lambda_cog, p.regime.as_str())).collect())
}

#[pyclass(name = "Generator", frozen, from_py_object)]
#[derive(Clone)]
struct PyGenerator(rlhf::Generator);

#[pymethods]
impl PyGenerator {
    /// Each completion is `(label, base_prob, quality, spurious)`.
    #[new]
    fn new(completions: Vec<(String, f64, Vec<f64>, f64)>) -> PyResult<Self> {
        let cs = completions
            .into_iter()
            .map(|(label, base_prob, quality, spurious)| rlhf::Completion {
                label,
                base_prob,
                quality,
                spurious,
            })
            .collect();
        rlhf::Generator::new(cs).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn goodhart_example() -> Self {
        Self(rlhf::Generator::goodhart_example())
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.completions.iter().map(|c| c.label.clone()).collect()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.0.probs()
    }

    /// Reward `alpha * w·q + (1 - alpha) * spurious`, tilted at temperature `lam`.
    #[pyo3(signature = (weights, lam, alpha = 1.0))]
    fn tilt(&self, weights: Vec<f64>, lam: f64, alpha: f64) -> PyResult<Self> {
        let r = rlhf::RewardSpec::misspecified(weights, alpha);
        rlhf::tilt(&self.0, &r, lam).map(Self).map_err(value_err)
    }

    fn quality_dist(&self, weights: Vec<f64>) -> PyResult<PyPosteriorDist> {
        rlhf::induced_quality_dist(&self.0, &weights).map(PyPosteriorDist).map_err(value_err)
    }
}

#[pyfunction]
fn fosd_check(a: &PyPosteriorDist, b: &PyPosteriorDist) -> bool {
    rlhf::fosd_check(&a.0, &b.0)
}

/// `(best_eval, achieved_eval, tax)`.
#[pyfunction]
fn capability_tax(g: &PyGenerator, w_train: Vec<f64>, w_eval: Vec<f64>, lam: f64) -> PyResult<(f64, f64, f64)> {
    let t = rlhf::capability_tax(&g.0, &w_train, &w_eval, lam).map_err(value_err)?;
    Ok((t.best_eval, t.achieved_eval, t.tax))
}

#[pyfunction]
fn find_lambda_bar(g: &PyGenerator, w_train: Vec<f64>, w_eval: Vec<f64>, eps: f64) -> PyResult<f64> {
    rlhf::find_lambda_bar(&g.0, &w_train, &w_eval, eps).map_err(value_err)
}

/// `[(q, mass, log_m)]`, one entry per distinct quality value.
#[pyfunction]
#[pyo3(signature = (g, weights, lam, alpha = 1.0))]
fn goodhart_tilt_factor(g: &PyGenerator, weights: Vec<f64>, lam: f64, alpha: f64) -> PyResult<Vec<(f64, f64, f64)>> {
    let r = rlhf::RewardSpec::misspecified(weights, alpha);
    let fs = rlhf::goodhart_tilt_factor(&g.0, &r, lam).map_err(value_err)?;
    Ok(fs.into_iter().map(|f| (f.q, f.mass, f.log_m)).collect())
}

#[pyfunction]
fn accept_regenerate_value(q: f64, c: f64, d: f64) -> PyResult<f64> {
    rlhf::accept_regenerate_value(q, c, d).map_err(value_err)
}

#[pyclass(name = "SimplexDist", frozen, from_py_object)]
#[derive(Clone)]
struct PySimplexDist(simplex::SimplexDist);

#[pymethods]
impl PySimplexDist {
    #[new]
    fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> PyResult<Self> {
        simplex::SimplexDist::new(&points, &weights).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn embed(d: &PyPosteriorDist) -> Self {
        Self(simplex::SimplexDist::embed(&d.0))
    }

    #[getter]
    fn support(&self) -> Vec<Vec<f64>> {
        self.0.support().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.0.mean().to_vec()
    }
}

#[pyfunction]
fn cx_compare_k(a: &PySimplexDist, b: &PySimplexDist) -> PyResult<&'static str> {
    Ok(simplex::cx_compare_k(&a.0, &b.0).map_err(value_err)?.as_str())
}

/// Gap `E φ(b) - E φ(a)` of the convex witness refuting `a ⪰cx b`, if any.
#[pyfunction]
fn refutation_gap(a: &PySimplexDist, b: &PySimplexDist) -> PyResult<Option<f64>> {
    let rep = simplex::cx_compare_k_report(&a.0, &b.0).map_err(value_err)?;
    Ok(rep.a_refuted.map(|w| w.gap(&a.0, &b.0)))
}

#[pyfunction]
fn incomparable_pair_k3() -> (PySimplexDist, PySimplexDist) {
    let (a, b) = simplex::incomparable_pair_k3();
    (PySimplexDist(a), PySimplexDist(b))
}

#[pyfunction]
fn list_builtins() -> Vec<(&'static str, &'static str)> {
    scenario::BUILTINS.iter().map(|b| (b.name, b.about)).collect()
}

/// Runs a scenario given as TOML text, or `builtin:NAME`; returns `{filename: csv}`.
#[pyfunction]
#[pyo3(signature = (source, name = "scenario"))]
fn run_scenario(source: &str, name: &str) -> PyResult<BTreeMap<String, String>> {
    let s = match source.strip_prefix("builtin:") {
        Some(b) => scenario::load_builtin(b),
        None => scenario::parse_scenario(source, name),
    }
    .map_err(value_err)?;
    let out = scenario::run(&s).map_err(value_err)?;
    Ok(out.render().into_iter().collect())
}

/// One report line per acceptance criterion.
#[pyfunction]
fn run_selftest() -> Vec<String> {
    selftest::run_all().iter().map(|r| r.line()).collect()
}

#[pymodule]
#[pyo3(name = "infodesign")]
fn infodesign_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPosteriorDist>()?;
    m.add_class::<PyBayesRisk>()?;
    m.add_class::<PyDecisionProblem>()?;
    m.add_class::<PyGenerator>()?;
    m.add_class::<PySimplexDist>()?;
    m.add_function(wrap_pyfunction!(convex_order_compare, m)?)?;
    m.add_function(wrap_pyfunction!(mixture, m)?)?;
    m.add_function(wrap_pyfunction!(check_dv, m)?)?;
    m.add_function(wrap_pyfunction!(concavity_order, m)?)?;
    m.add_function(wrap_pyfunction!(pipeline_compare, m)?)?;
    m.add_function(wrap_pyfunction!(two_point_gap, m)?)?;
    m.add_function(wrap_pyfunction!(solve_learning, m)?)?;
    m.add_function(wrap_pyfunction!(solve_quadratic_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(attention_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(reversal_region, m)?)?;
    m.add_function(wrap_pyfunction!(fosd_check, m)?)?;
    m.add_function(wrap_pyfunction!(capability_tax, m)?)?;
    m.add_function(wrap_pyfunction!(find_lambda_bar, m)?)?;
    m.add_function(wrap_pyfunction!(goodhart_tilt_factor, m)?)?;
    m.add_function(wrap_pyfunction!(accept_regenerate_value, m)?)?;
    m.add_function(wrap_pyfunction!(cx_compare_k, m)?)?;
    m.add_function(wrap_pyfunction!(refutation_gap, m)?)?;
    m.add_function(wrap_pyfunction!(incomparable_pair_k3, m)?)?;
    m.add_function(wrap_pyfunction!(list_builtins, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    Ok(())
}
