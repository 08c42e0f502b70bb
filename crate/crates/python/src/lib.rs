//! Python bindings.
//!
//! Subsets are passed as lists of 1-based terminal indices; the relay is `K+1`.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tamarc::bounds::{self, ChannelMode, DmaxRule};
use tamarc::coding;
use tamarc::config::{parse_dmax_rule, parse_toml, SimConfigFile};
use tamarc::model::{self, DelayProfile};
use tamarc::regions::{self, RateRegion};
use tamarc::{Error, LogBase, Subset};

create_exception!(tamarc_py, BudgetError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::Config { .. } | Error::RegimeNotReached(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Budget(_) => BudgetError::new_err(e.to_string()),
        Error::Io { .. } | Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn subset(indices: &[usize]) -> Subset {
    Subset::from_indices(indices.iter().copied())
}

fn base(nats: bool) -> LogBase {
    if nats {
        LogBase::Nats
    } else {
        LogBase::Bits
    }
}

#[pyclass(name = "ChannelParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyChannelParams(model::ChannelParams);

#[pymethods]
impl PyChannelParams {
    #[new]
    fn new(
        k: usize,
        gains_dest: Vec<Complex64>,
        gains_relay: Vec<Complex64>,
        noise_power: f64,
        powers: Vec<f64>,
    ) -> PyResult<Self> {
        model::ChannelParams::new(k, gains_dest, gains_relay, noise_power, powers)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn uniform(k: usize, g_dest: f64, g_relay: f64, power: f64, noise_power: f64) -> PyResult<Self> {
        model::ChannelParams::uniform(k, g_dest, g_relay, power, noise_power)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        model::ChannelParams::from_toml_str(text).map(Self).map_err(to_py)
    }

    fn to_toml(&self) -> String {
        self.0.to_toml_string()
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    #[getter]
    fn gains_dest(&self) -> Vec<Complex64> {
        self.0.gains_dest().to_vec()
    }

    #[getter]
    fn gains_relay(&self) -> Vec<Complex64> {
        self.0.gains_relay().to_vec()
    }

    #[getter]
    fn noise_power(&self) -> f64 {
        self.0.noise_power()
    }

    #[getter]
    fn powers(&self) -> Vec<f64> {
        self.0.powers().to_vec()
    }

    fn with_noise_power(&self, noise_power: f64) -> PyResult<Self> {
        self.0.with_noise_power(noise_power).map(Self).map_err(to_py)
    }

    /// `(hold, violating subsets)`.
    fn gain_conditions(&self) -> (bool, Vec<Vec<usize>>) {
        let g = regions::gain_conditions_hold(&self.0);
        (g.hold, g.violating.iter().map(|s| s.indices().collect()).collect())
    }

    fn __repr__(&self) -> String {
        format!("ChannelParams(K={}, N={})", self.0.k(), self.0.noise_power())
    }
}

#[pyclass(name = "SourceModel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySourceModel(model::SourceModel);

#[pymethods]
impl PySourceModel {
    /// Joint pmf in row-major order over the alphabets, source 1 most significant.
    #[new]
    fn new(alphabets: Vec<usize>, pmf: Vec<f64>) -> PyResult<Self> {
        model::SourceModel::new(alphabets, pmf).map(Self).map_err(to_py)
    }

    /// Doubly symmetric binary source with crossover `p`.
    #[staticmethod]
    fn dsbs(p: f64) -> PyResult<Self> {
        model::SourceModel::dsbs(p).map(Self).map_err(to_py)
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    /// `H(U_S | U_{S^c})` in bits.
    fn conditional_entropy(&self, s: Vec<usize>) -> f64 {
        regions::conditional_entropy(&self.0, subset(&s))
    }
}

/// One exported constraint.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct Constraint {
    subset: Vec<usize>,
    rhs: f64,
    kind: String,
}

#[pymethods]
impl Constraint {
    fn __repr__(&self) -> String {
        format!(
            "Constraint(subset={:?}, rhs={}, kind={})",
            self.subset, self.rhs, self.kind
        )
    }
}

fn constraints(r: &RateRegion) -> Vec<Constraint> {
    r.constraints
        .iter()
        .map(|c| Constraint {
            subset: c.subset.indices().collect(),
            rhs: c.rhs,
            kind: c.kind.as_str().to_string(),
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (params, kappa=1.0))]
fn outer_region(params: &PyChannelParams, kappa: f64) -> PyResult<Vec<Constraint>> {
    regions::outer_region(&params.0, kappa)
        .map(|r| constraints(&r))
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (params, kappa=1.0))]
fn achievable_region(params: &PyChannelParams, kappa: f64) -> PyResult<Vec<Constraint>> {
    regions::achievable_region(&params.0, kappa)
        .map(|r| constraints(&r))
        .map_err(to_py)
}

#[pyfunction]
fn slepian_wolf_region(src: &PySourceModel) -> Vec<Constraint> {
    constraints(&regions::slepian_wolf_region(&src.0))
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct Verdict {
    status: String,
    margin: f64,
    binding: Vec<Vec<usize>>,
    definitive: bool,
}

#[pymethods]
impl Verdict {
    fn __repr__(&self) -> String {
        format!(
            "Verdict(status={}, margin={}, binding={:?}, definitive={})",
            self.status, self.margin, self.binding, self.definitive
        )
    }
}

#[pyfunction]
#[pyo3(signature = (src, params, kappa=1.0))]
fn feasible(src: &PySourceModel, params: &PyChannelParams, kappa: f64) -> PyResult<Verdict> {
    let v = regions::feasible(&src.0, &params.0, kappa).map_err(to_py)?;
    Ok(Verdict {
        status: v.status.as_str().to_string(),
        margin: v.margin,
        binding: v.binding.iter().map(|s| s.indices().collect()).collect(),
        definitive: v.definitive,
    })
}

/// `(strong, constraints, (sum at receiver 1, sum at receiver 2))`.
#[pyfunction]
fn ic_region(
    g11: Complex64,
    g12: Complex64,
    g21: Complex64,
    g22: Complex64,
    p1: f64,
    p2: f64,
    noise_power: f64,
) -> PyResult<(bool, Vec<Constraint>, (f64, f64))> {
    let ic = regions::ic_region(g11, g12, g21, g22, p1, p2, noise_power).map_err(to_py)?;
    Ok((
        ic.strong,
        constraints(&ic.region),
        (ic.sum_constraints[0], ic.sum_constraints[1]),
    ))
}

#[pyfunction]
#[pyo3(signature = (params, s, n, d_max, nats=false))]
fn gamma(params: &PyChannelParams, s: Vec<usize>, n: usize, d_max: usize, nats: bool) -> PyResult<f64> {
    bounds::gamma(&params.0, subset(&s), n, d_max, base(nats)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, d_max, nats=false))]
fn alpha_default(n: usize, d_max: usize, nats: bool) -> PyResult<usize> {
    bounds::alpha_default(n, d_max, base(nats)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (params, s, n, alpha, nats=false))]
fn lambda_bound(params: &PyChannelParams, s: Vec<usize>, n: usize, alpha: usize, nats: bool) -> PyResult<f64> {
    bounds::lambda_bound(&params.0, subset(&s), n, alpha, base(nats)).map_err(to_py)
}

/// `(exact, bound)`.
#[pyfunction]
fn char_fn_magnitude(i: usize, n: usize, d_max: usize) -> PyResult<(f64, f64)> {
    let m = bounds::char_fn_magnitude(i, n, d_max).map_err(to_py)?;
    Ok((m.exact, m.bound))
}

#[pyfunction]
#[pyo3(signature = (params, s, n, d_max, alpha, nats=false))]
fn converse_rhs(
    params: &PyChannelParams,
    s: Vec<usize>,
    n: usize,
    d_max: usize,
    alpha: usize,
    nats: bool,
) -> PyResult<f64> {
    bounds::converse_rhs(&params.0, subset(&s), n, d_max, alpha, base(nats)).map_err(to_py)
}

/// Normalized mutual information of the sliced (or cyclic) channel with Gaussian inputs.
#[pyfunction]
#[pyo3(signature = (params, delays, s, n, cyclic=false, input_powers=None, nats=false))]
#[allow(clippy::too_many_arguments)]
fn gaussian_mi(
    py: Python<'_>,
    params: &PyChannelParams,
    delays: Vec<usize>,
    s: Vec<usize>,
    n: usize,
    cyclic: bool,
    input_powers: Option<Vec<f64>>,
    nats: bool,
) -> PyResult<f64> {
    let d_max = delays.iter().copied().max().unwrap_or(0);
    let profile = DelayProfile::new(delays, d_max).map_err(to_py)?;
    let mode = if cyclic {
        ChannelMode::Cyclic
    } else {
        ChannelMode::Sliced
    };
    py.detach(|| {
        bounds::gaussian_mi(
            &params.0,
            &profile,
            subset(&s),
            n,
            mode,
            input_powers.as_deref(),
            base(nats),
        )
    })
    .map_err(to_py)
}

/// `(n, d_max, max_gap, eps, all_pass)`.
type SummaryRow = (usize, usize, f64, f64, bool);

/// Per-`n` summary rows.
#[pyfunction]
#[pyo3(signature = (params, n_list, trials, seed=0, d_max_rule="sqrt"))]
fn mi_gap_certificate(
    py: Python<'_>,
    params: &PyChannelParams,
    n_list: Vec<usize>,
    trials: usize,
    seed: u64,
    d_max_rule: &str,
) -> PyResult<Vec<SummaryRow>> {
    let rule: DmaxRule = parse_dmax_rule(d_max_rule).map_err(to_py)?;
    let cfg = bounds::CertificateConfig::new(n_list, rule, trials, seed);
    let cert = py
        .detach(|| bounds::mi_gap_certificate(&params.0, &cfg))
        .map_err(to_py)?;
    Ok(cert
        .summaries
        .iter()
        .map(|s| (s.n, s.d_max, s.max_gap, s.eps, s.all_pass))
        .collect())
}

/// Runs a simulation described by a `simulate` TOML document and returns the trials CSV.
#[pyfunction]
fn simulate(py: Python<'_>, config_toml: &str) -> PyResult<String> {
    let file: SimConfigFile = parse_toml(config_toml).map_err(to_py)?;
    let cfg = file.resolve(std::path::Path::new(".")).map_err(to_py)?;
    let report = py.detach(|| coding::monte_carlo_error(&cfg)).map_err(to_py)?;
    let mut out = Vec::new();
    report
        .write_csv(&mut out)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    String::from_utf8(out).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Lower and upper ends of the 95% Wilson interval.
#[pyfunction]
fn wilson_interval(errors: usize, trials: usize) -> (f64, f64) {
    coding::wilson_interval(errors, trials)
}

#[pymodule]
fn tamarc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BudgetError", m.py().get_type::<BudgetError>())?;
    m.add_class::<PyChannelParams>()?;
    m.add_class::<PySourceModel>()?;
    m.add_class::<Constraint>()?;
    m.add_class::<Verdict>()?;
    m.add_function(wrap_pyfunction!(outer_region, m)?)?;
    m.add_function(wrap_pyfunction!(achievable_region, m)?)?;
    m.add_function(wrap_pyfunction!(slepian_wolf_region, m)?)?;
    m.add_function(wrap_pyfunction!(feasible, m)?)?;
    m.add_function(wrap_pyfunction!(ic_region, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_default, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_bound, m)?)?;
    m.add_function(wrap_pyfunction!(char_fn_magnitude, m)?)?;
    m.add_function(wrap_pyfunction!(converse_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_mi, m)?)?;
    m.add_function(wrap_pyfunction!(mi_gap_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(wilson_interval, m)?)?;
    Ok(())
}
