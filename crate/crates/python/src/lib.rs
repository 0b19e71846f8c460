//! Python bindings: `import multiverse`.
//!
//! Born weights may be passed as floats or exactly, as `int`,
//! `fractions.Fraction` or a `"p/q"` string. Exact inputs produce exact
//! counts, returned as `Fraction`s.

use multiverse_core::analysis::{self, AnalysisError, EmpiricalSummary};
use multiverse_core::branching::{self, BranchConfig, BranchError, Counts, Mode};
use multiverse_core::dynamics::{self, DynamicsError, SplitDiagnostics};
use multiverse_core::spin::{self, SpinError};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyFloat, PyString};

create_exception!(
    multiverse,
    SolverError,
    PyRuntimeError,
    "The wavepacket solver left its valid regime."
);

fn dynamics_err(e: DynamicsError) -> PyErr {
    match e {
        DynamicsError::Boundary { .. } | DynamicsError::GridMismatch { .. } => SolverError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn analysis_err(e: AnalysisError) -> PyErr {
    match e {
        AnalysisError::Dynamics(d) => dynamics_err(d),
        other => value_err(other),
    }
}

fn branch_err(e: BranchError) -> PyErr {
    value_err(e)
}

fn spin_err(e: SpinError) -> PyErr {
    value_err(e)
}

fn fraction<'py>(py: Python<'py>, q: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((q.numer().clone(), q.denom().clone()))
}

enum Weight {
    Float(f64),
    Exact(BigRational),
}

fn extract_weight(obj: &Bound<'_, PyAny>) -> PyResult<Weight> {
    if obj.is_instance_of::<PyFloat>() {
        return Ok(Weight::Float(obj.extract()?));
    }
    if obj.is_instance_of::<PyString>() {
        let s: String = obj.extract()?;
        let (n, d) = s.split_once('/').unwrap_or((&s, "1"));
        let n: BigInt = n.trim().parse().map_err(value_err)?;
        let d: BigInt = d.trim().parse().map_err(value_err)?;
        if d == BigInt::from(0) {
            return Err(PyValueError::new_err("zero denominator"));
        }
        return Ok(Weight::Exact(BigRational::new(n, d)));
    }
    if obj.hasattr("numerator")? && obj.hasattr("denominator")? {
        let n: BigInt = obj.getattr("numerator")?.extract()?;
        let d: BigInt = obj.getattr("denominator")?.extract()?;
        return Ok(Weight::Exact(BigRational::new(n, d)));
    }
    Ok(Weight::Float(obj.extract()?))
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(|e: String| PyValueError::new_err(e))
}

fn branch_config(runs: u32, q: Option<&Bound<'_, PyAny>>, mode: &str) -> PyResult<BranchConfig> {
    let mode = parse_mode(mode)?;
    let config = match (q.map(extract_weight).transpose()?, mode) {
        (None, Mode::Naive) => BranchConfig::naive(runs),
        (None, Mode::Weighted) => return Err(PyValueError::new_err("weighted mode needs q")),
        (Some(Weight::Float(q)), mode) => BranchConfig::new(runs, q, mode),
        (Some(Weight::Exact(q)), mode) => BranchConfig::with_exact_q(runs, q, mode),
    };
    config.map_err(branch_err)
}

/// Physical and numerical parameters of the Stern-Gerlach simulation.
#[pyclass(name = "SgParams", module = "multiverse", from_py_object)]
#[derive(Clone)]
pub struct PySgParams {
    inner: dynamics::SgParams,
}

#[pymethods]
impl PySgParams {
    #[new]
    #[pyo3(signature = (*, mass=None, coupling=None, field=None, gradient=None, sigma0=None,
                        grid_length=None, grid_points=None, dt=None, t_final=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        mass: Option<f64>,
        coupling: Option<f64>,
        field: Option<f64>,
        gradient: Option<f64>,
        sigma0: Option<f64>,
        grid_length: Option<f64>,
        grid_points: Option<usize>,
        dt: Option<f64>,
        t_final: Option<f64>,
    ) -> PyResult<Self> {
        let d = dynamics::SgParams::default();
        let inner = dynamics::SgParams {
            mass: mass.unwrap_or(d.mass),
            coupling: coupling.unwrap_or(d.coupling),
            field: field.unwrap_or(d.field),
            gradient: gradient.unwrap_or(d.gradient),
            sigma0: sigma0.unwrap_or(d.sigma0),
            grid_length: grid_length.unwrap_or(d.grid_length),
            grid_points: grid_points.unwrap_or(d.grid_points),
            dt: dt.unwrap_or(d.dt),
            t_final: t_final.unwrap_or(d.t_final),
        };
        inner.validate().map_err(dynamics_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }
    #[getter]
    fn coupling(&self) -> f64 {
        self.inner.coupling
    }
    #[getter]
    fn field(&self) -> f64 {
        self.inner.field
    }
    #[getter]
    fn gradient(&self) -> f64 {
        self.inner.gradient
    }
    #[getter]
    fn sigma0(&self) -> f64 {
        self.inner.sigma0
    }
    #[getter]
    fn grid_length(&self) -> f64 {
        self.inner.grid_length
    }
    #[getter]
    fn grid_points(&self) -> usize {
        self.inner.grid_points
    }
    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }
    #[getter]
    fn t_final(&self) -> f64 {
        self.inner.t_final
    }

    /// Centre of the plus branch at time `t`; the minus branch mirrors it.
    fn displacement(&self, t: f64) -> f64 {
        self.inner.displacement(t)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "SgParams(mass={}, coupling={}, field={}, gradient={}, sigma0={}, grid_length={}, grid_points={}, dt={}, t_final={})",
            p.mass, p.coupling, p.field, p.gradient, p.sigma0, p.grid_length, p.grid_points, p.dt, p.t_final
        )
    }
}

fn params_or_default(params: Option<PyRef<'_, PySgParams>>) -> dynamics::SgParams {
    params.map(|p| p.inner.clone()).unwrap_or_default()
}

/// Normalized two-component spin state in the measurement basis.
#[pyclass(name = "Spinor", module = "multiverse", from_py_object)]
#[derive(Clone)]
pub struct PySpinor {
    inner: spin::Spinor,
}

#[pymethods]
impl PySpinor {
    #[new]
    fn new(up: Complex64, down: Complex64) -> PyResult<Self> {
        Ok(Self {
            inner: spin::Spinor::new(up, down).map_err(spin_err)?,
        })
    }

    #[getter]
    fn up(&self) -> Complex64 {
        self.inner.up()
    }

    #[getter]
    fn down(&self) -> Complex64 {
        self.inner.down()
    }

    fn __repr__(&self) -> String {
        format!("Spinor(up={}, down={})", self.inner.up(), self.inner.down())
    }
}

/// Spin at angle `theta` (radians) from the measurement axis.
#[pyfunction]
fn make_skew_state(theta: f64) -> PyResult<PySpinor> {
    Ok(PySpinor {
        inner: spin::make_skew_state(theta).map_err(spin_err)?,
    })
}

/// `|up|²`, the probability of the plus result.
#[pyfunction]
fn born_weight(spinor: PyRef<'_, PySpinor>) -> PyResult<f64> {
    spin::born_weight(&spinor.inner).map_err(spin_err)
}

/// `(f, g) = (2q, 2 − 2q)`, the multiplicity factors of the two branches.
#[pyfunction]
fn branch_weights(q: f64) -> PyResult<(f64, f64)> {
    let w = spin::branch_weights(q).map_err(spin_err)?;
    Ok((w.f(), w.g()))
}

/// Multiplicity of histories indexed by the number of plus results.
#[pyclass(name = "HistoryTally", module = "multiverse", frozen)]
pub struct PyHistoryTally {
    inner: branching::HistoryTally,
}

#[pymethods]
impl PyHistoryTally {
    #[getter]
    fn runs(&self) -> u32 {
        self.inner.runs()
    }

    #[getter]
    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    /// Counts as floats (may overflow to `inf` for large N).
    #[getter]
    fn counts(&self) -> Vec<f64> {
        self.inner.counts_f64()
    }

    /// Counts as `Fraction`s, or `None` when the weight was a float.
    #[getter]
    fn exact_counts<'py>(&self, py: Python<'py>) -> PyResult<Option<Vec<Bound<'py, PyAny>>>> {
        match self.inner.counts() {
            Counts::Exact(c) => Ok(Some(c.iter().map(|q| fraction(py, q)).collect::<PyResult<_>>()?)),
            Counts::Float(_) => Ok(None),
        }
    }

    /// Counts divided by `2^N`; sums to one.
    #[getter]
    fn normalized(&self) -> Vec<f64> {
        self.inner.normalized().to_vec()
    }

    /// Total multiplicity, exact when possible.
    #[getter]
    fn total<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        match self.inner.total_exact() {
            Some(t) => fraction(py, &t),
            None => Ok(PyFloat::new(py, self.inner.total_f64()).into_any()),
        }
    }

    #[getter]
    fn peak(&self) -> usize {
        self.inner.peak()
    }

    fn __len__(&self) -> usize {
        self.inner.normalized().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "HistoryTally(runs={}, exact={}, peak={})",
            self.inner.runs(),
            self.inner.is_exact(),
            self.inner.peak()
        )
    }
}

/// Counts from the binomial closed form.
#[pyfunction]
#[pyo3(signature = (runs, q=None, mode="weighted"))]
fn closed_form(runs: u32, q: Option<&Bound<'_, PyAny>>, mode: &str) -> PyResult<PyHistoryTally> {
    let config = branch_config(runs, q, mode)?;
    Ok(PyHistoryTally {
        inner: branching::closed_form(&config),
    })
}

/// Counts from walking every history (runs <= 24).
#[pyfunction]
#[pyo3(signature = (runs, q=None, mode="weighted"))]
fn enumerate_tree(py: Python<'_>, runs: u32, q: Option<&Bound<'_, PyAny>>, mode: &str) -> PyResult<PyHistoryTally> {
    let config = branch_config(runs, q, mode)?;
    let inner = py.detach(|| branching::enumerate_tree(&config)).map_err(branch_err)?;
    Ok(PyHistoryTally { inner })
}

/// Most common number of plus results.
#[pyfunction]
#[pyo3(signature = (runs, q=None, mode="weighted"))]
fn peak(runs: u32, q: Option<&Bound<'_, PyAny>>, mode: &str) -> PyResult<usize> {
    Ok(branching::peak(&branch_config(runs, q, mode)?))
}

/// Histories drawn with per-run plus probability `q`, as `"+-+..."` strings.
#[pyfunction]
#[pyo3(signature = (runs, q, count, seed=0))]
fn sample_histories(runs: u32, q: &Bound<'_, PyAny>, count: usize, seed: u64) -> PyResult<Vec<String>> {
    let config = branch_config(runs, Some(q), "weighted")?;
    let histories = branching::sample_histories(&config, count, seed).map_err(branch_err)?;
    Ok(histories.iter().map(ToString::to_string).collect())
}

fn diagnostics_dict<'py>(py: Python<'py>, d: &SplitDiagnostics) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("mean_y_plus", d.mean_y_plus)?;
    out.set_item("mean_y_minus", d.mean_y_minus)?;
    out.set_item("width_plus", d.width_plus)?;
    out.set_item("width_minus", d.width_minus)?;
    out.set_item("pop_plus", d.pop_plus)?;
    out.set_item("pop_minus", d.pop_minus)?;
    out.set_item("spatial_overlap", d.spatial_overlap)?;
    Ok(out)
}

fn empirical_dict<'py>(py: Python<'py>, e: &EmpiricalSummary) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("samples", e.samples)?;
    out.set_item("seed", e.seed)?;
    out.set_item("distribution", e.distribution.clone())?;
    out.set_item("plus_frequency", e.plus_frequency)?;
    out.set_item("plus_frequency_error", e.plus_frequency_error)?;
    out.set_item("plus_frequency_deviation", e.plus_frequency_deviation)?;
    out.set_item("distribution_error", e.distribution_error.clone())?;
    out.set_item("max_distribution_deviation", e.max_distribution_deviation)?;
    Ok(out)
}

/// Weighted vs naive observer distributions for one spin angle.
#[pyclass(name = "DistributionReport", module = "multiverse", frozen)]
pub struct PyDistributionReport {
    inner: analysis::DistributionReport,
}

#[pymethods]
impl PyDistributionReport {
    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }
    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }
    #[getter]
    fn runs(&self) -> u32 {
        self.inner.runs
    }
    #[getter]
    fn predicted(&self) -> Vec<f64> {
        self.inner.predicted.clone()
    }
    #[getter]
    fn naive(&self) -> Vec<f64> {
        self.inner.naive.clone()
    }
    #[getter]
    fn tv_naive_weighted(&self) -> f64 {
        self.inner.tv_naive_weighted
    }
    #[getter]
    fn peak_weighted(&self) -> usize {
        self.inner.peak_weighted
    }
    #[getter]
    fn peak_naive(&self) -> usize {
        self.inner.peak_naive
    }
    #[getter]
    fn born_peak(&self) -> f64 {
        self.inner.born_peak
    }
    #[getter]
    fn narratives_disagree(&self) -> bool {
        self.inner.narratives_disagree
    }
    /// Sampling summary as a dict, or `None` when nothing was sampled.
    #[getter]
    fn empirical<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyDict>>> {
        self.inner.empirical.as_ref().map(|e| empirical_dict(py, e)).transpose()
    }

    fn __repr__(&self) -> String {
        format!(
            "DistributionReport(runs={}, q={}, peak_weighted={}, peak_naive={}, tv={:.6})",
            self.inner.runs,
            self.inner.q,
            self.inner.peak_weighted,
            self.inner.peak_naive,
            self.inner.tv_naive_weighted
        )
    }
}

#[pyfunction]
fn compare_narratives(runs: u32, theta: f64) -> PyResult<PyDistributionReport> {
    Ok(PyDistributionReport {
        inner: analysis::compare_narratives(runs, theta).map_err(analysis_err)?,
    })
}

/// `compare_narratives` plus `samples` sampled histories.
#[pyfunction]
#[pyo3(signature = (theta, runs, samples, seed=0))]
fn born_convergence(
    py: Python<'_>,
    theta: f64,
    runs: u32,
    samples: usize,
    seed: u64,
) -> PyResult<PyDistributionReport> {
    let inner = py
        .detach(|| analysis::born_convergence(theta, runs, samples, seed))
        .map_err(analysis_err)?;
    Ok(PyDistributionReport { inner })
}

#[pyclass(name = "EndToEndReport", module = "multiverse", frozen)]
pub struct PyEndToEndReport {
    inner: analysis::EndToEndReport,
}

#[pymethods]
impl PyEndToEndReport {
    /// Report built from the simulated Born weight.
    #[getter]
    fn report(&self) -> PyDistributionReport {
        PyDistributionReport {
            inner: self.inner.report.clone(),
        }
    }
    /// Report built from `cos²(θ/2)`.
    #[getter]
    fn analytic(&self) -> PyDistributionReport {
        PyDistributionReport {
            inner: self.inner.analytic.clone(),
        }
    }
    #[getter]
    fn q_numeric(&self) -> f64 {
        self.inner.q_numeric
    }
    #[getter]
    fn q_analytic(&self) -> f64 {
        self.inner.q_analytic
    }
    #[getter]
    fn q_deviation(&self) -> f64 {
        self.inner.q_deviation
    }
    #[getter]
    fn max_distribution_deviation(&self) -> f64 {
        self.inner.max_distribution_deviation
    }
    #[getter]
    fn t_reached(&self) -> f64 {
        self.inner.t_reached
    }
    #[getter]
    fn final_diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        diagnostics_dict(py, &self.inner.final_diagnostics)
    }

    fn __repr__(&self) -> String {
        format!(
            "EndToEndReport(q_numeric={}, q_deviation={:e}, peak={})",
            self.inner.q_numeric, self.inner.q_deviation, self.inner.report.peak_weighted
        )
    }
}

/// Simulate, read the Born weight off the plus population, count branches.
#[pyfunction]
#[pyo3(signature = (theta, runs, params=None, samples=0, seed=0))]
fn end_to_end(
    py: Python<'_>,
    theta: f64,
    runs: u32,
    params: Option<PyRef<'_, PySgParams>>,
    samples: usize,
    seed: u64,
) -> PyResult<PyEndToEndReport> {
    let params = params_or_default(params);
    let inner = py
        .detach(|| analysis::end_to_end(theta, &params, runs, samples, seed))
        .map_err(analysis_err)?;
    Ok(PyEndToEndReport { inner })
}

/// Two-component wavefunction on the periodic grid.
#[pyclass(name = "PacketState", module = "multiverse", frozen)]
pub struct PyPacketState {
    inner: dynamics::PacketState,
}

#[pymethods]
impl PyPacketState {
    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }
    #[getter]
    fn sigma0(&self) -> f64 {
        self.inner.sigma0()
    }
    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }
    #[getter]
    fn positions(&self) -> Vec<f64> {
        self.inner.positions().collect()
    }
    #[getter]
    fn plus(&self) -> Vec<Complex64> {
        self.inner.plus().to_vec()
    }
    #[getter]
    fn minus(&self) -> Vec<Complex64> {
        self.inner.minus().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        diagnostics_dict(py, &dynamics::diagnostics(&self.inner))
    }

    /// `(q_plus, q_minus)`, the populations of the two spin components.
    fn branch_amplitudes(&self) -> (f64, f64) {
        dynamics::extract_branch_amplitudes(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PacketState(points={}, t={})", self.inner.len(), self.inner.time())
    }
}

/// Gaussian packet carrying `spinor`, centred at the origin.
#[pyfunction]
#[pyo3(signature = (spinor, params=None, sigma0=None))]
fn init_packet(
    spinor: PyRef<'_, PySpinor>,
    params: Option<PyRef<'_, PySgParams>>,
    sigma0: Option<f64>,
) -> PyResult<PyPacketState> {
    let params = params_or_default(params);
    let sigma0 = sigma0.unwrap_or(params.sigma0);
    Ok(PyPacketState {
        inner: dynamics::init_packet(&spinor.inner, sigma0, &params).map_err(dynamics_err)?,
    })
}

/// Advances a copy of `state` by `duration` (default: `params.t_final`).
#[pyfunction]
#[pyo3(signature = (state, params=None, duration=None))]
fn evolve(
    py: Python<'_>,
    state: PyRef<'_, PyPacketState>,
    params: Option<PyRef<'_, PySgParams>>,
    duration: Option<f64>,
) -> PyResult<PyPacketState> {
    let params = params_or_default(params);
    let duration = duration.unwrap_or(params.t_final);
    let start = state.inner.clone();
    let inner = py
        .detach(|| dynamics::evolve(start, &params, duration))
        .map_err(dynamics_err)?;
    Ok(PyPacketState { inner })
}

/// Like `evolve`, also returning `[{t, norm, diagnostics}, ...]` sampled
/// every `record_every` time units.
#[pyfunction]
#[pyo3(signature = (state, params=None, duration=None, record_every=0.1))]
fn evolve_recorded<'py>(
    py: Python<'py>,
    state: PyRef<'_, PyPacketState>,
    params: Option<PyRef<'_, PySgParams>>,
    duration: Option<f64>,
    record_every: f64,
) -> PyResult<(PyPacketState, Vec<Bound<'py, PyDict>>)> {
    let params = params_or_default(params);
    let duration = duration.unwrap_or(params.t_final);
    let start = state.inner.clone();
    let (inner, samples) = py
        .detach(|| dynamics::evolve_recorded(start, &params, duration, Some(record_every)))
        .map_err(dynamics_err)?;
    let rows = samples
        .iter()
        .map(|s| {
            let row = PyDict::new(py);
            row.set_item("t", s.t)?;
            row.set_item("norm", s.norm)?;
            row.set_item("diagnostics", diagnostics_dict(py, &s.diagnostics)?)?;
            Ok(row)
        })
        .collect::<PyResult<_>>()?;
    Ok((PyPacketState { inner }, rows))
}

/// `1 − |<projected minus state | evolved minus branch>|²` at `params.t_final`.
#[pyfunction]
#[pyo3(signature = (theta, params=None))]
fn projection_infidelity(py: Python<'_>, theta: f64, params: Option<PyRef<'_, PySgParams>>) -> PyResult<f64> {
    let params = params_or_default(params);
    py.detach(|| dynamics::projection_infidelity(theta, &params))
        .map_err(dynamics_err)
}

#[pymodule]
fn multiverse(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_class::<PySgParams>()?;
    m.add_class::<PySpinor>()?;
    m.add_class::<PyHistoryTally>()?;
    m.add_class::<PyDistributionReport>()?;
    m.add_class::<PyEndToEndReport>()?;
    m.add_class::<PyPacketState>()?;
    m.add_function(wrap_pyfunction!(make_skew_state, m)?)?;
    m.add_function(wrap_pyfunction!(born_weight, m)?)?;
    m.add_function(wrap_pyfunction!(branch_weights, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_tree, m)?)?;
    m.add_function(wrap_pyfunction!(peak, m)?)?;
    m.add_function(wrap_pyfunction!(sample_histories, m)?)?;
    m.add_function(wrap_pyfunction!(compare_narratives, m)?)?;
    m.add_function(wrap_pyfunction!(born_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(end_to_end, m)?)?;
    m.add_function(wrap_pyfunction!(init_packet, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_recorded, m)?)?;
    m.add_function(wrap_pyfunction!(projection_infidelity, m)?)?;
    Ok(())
}
