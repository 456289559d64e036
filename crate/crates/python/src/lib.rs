use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ssmlab::dynsys::{self, DatasetOptions, DynSysSpec, SystemKind, SystemParams};
use ssmlab::harness::{self, BoundInputs, ConvergenceRecord, StudyConfig};
use ssmlab::metric::{self, EmbeddingSpec, MetricConfig, SequenceSample};
use ssmlab::signals::{self, Signal};
use ssmlab::ssm::{self, ContinuousSsm, Flavor, Method, C64};
use ssmlab::stagewise::{self, RidgeS4Trainer, StageSchedule, Strategy};

create_exception!(
    ssmlab_py,
    SsmlabError,
    PyValueError,
    "Raised for any error reported by the ssmlab core."
);

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for ssmlab::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(|e| SsmlabError::new_err(e.to_string()))
    }
}

fn parse_method(name: &str) -> PyResult<Method> {
    match name.to_ascii_lowercase().as_str() {
        "zoh" => Ok(Method::Zoh),
        "bilinear" => Ok(Method::Bilinear),
        other => Err(SsmlabError::new_err(format!(
            "unknown method `{other}` (expected zoh or bilinear)"
        ))),
    }
}

fn parse<T: std::str::FromStr<Err = ssmlab::Error>>(name: &str) -> PyResult<T> {
    name.parse::<T>().or_raise()
}

/// Smooth random input signal built from Chebyshev polynomials.
#[pyclass(name = "ChebyshevSignal", frozen)]
struct PySignal(signals::ChebyshevSignal);

#[pymethods]
impl PySignal {
    #[new]
    #[pyo3(signature = (coeffs, scale=1.0))]
    fn new(coeffs: Vec<f64>, scale: f64) -> PyResult<Self> {
        signals::ChebyshevSignal::new(coeffs, scale).or_raise().map(Self)
    }

    #[staticmethod]
    fn sample(seed: u64) -> Self {
        Self(signals::sample_signal(seed))
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.0.coeffs().to_vec()
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.0.scale()
    }

    fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scaled(factor))
    }

    fn eval(&self, t: f64) -> PyResult<f64> {
        self.0.eval(t).or_raise()
    }

    fn hold(&self, tau: f64, t: f64) -> PyResult<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(SsmlabError::new_err(format!("t = {t} outside [0, 1]")));
        }
        Ok(self.0.hold(tau).or_raise()?.value(t))
    }

    fn lipschitz_bound(&self) -> f64 {
        self.0.lipschitz_bound()
    }

    fn amplitude_bound(&self) -> f64 {
        self.0.amplitude_bound()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChebyshevSignal(terms={}, scale={})",
            self.0.coeffs().len(),
            self.0.scale()
        )
    }
}

/// Continuous-time diagonal state-space model, either S4 or S6.
#[pyclass(name = "Ssm", frozen)]
struct PySsm(ContinuousSsm);

#[pymethods]
impl PySsm {
    #[staticmethod]
    #[pyo3(signature = (a, b, c, delta, d=0.0))]
    fn s4(a: Vec<C64>, b: Vec<C64>, c: Vec<C64>, delta: f64, d: f64) -> PyResult<Self> {
        ContinuousSsm::s4(a, b, c, d, delta).or_raise().map(Self)
    }

    #[staticmethod]
    #[pyo3(signature = (a, b, c, w_delta, b_delta, d=0.0))]
    fn s6(a: Vec<C64>, b: Vec<C64>, c: Vec<C64>, w_delta: f64, b_delta: f64, d: f64) -> PyResult<Self> {
        ContinuousSsm::s6(a, b, c, d, w_delta, b_delta).or_raise().map(Self)
    }

    /// Returns the seeded (S4, S6) pair used by the convergence study.
    #[staticmethod]
    #[pyo3(signature = (seed, pair=0, n=8))]
    fn study_pair(seed: u64, pair: usize, n: usize) -> PyResult<(Self, Self)> {
        let (s4, s6, _) = harness::study_case(seed, pair, n).or_raise()?;
        Ok((Self(s4), Self(s6)))
    }

    #[getter]
    fn flavor(&self) -> &'static str {
        self.0.flavor().name()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn a(&self) -> Vec<C64> {
        self.0.a().to_vec()
    }

    #[getter]
    fn b(&self) -> Vec<C64> {
        self.0.b().to_vec()
    }

    #[getter]
    fn c(&self) -> Vec<C64> {
        self.0.c().to_vec()
    }

    fn delta_at(&self, u: f64) -> f64 {
        self.0.delta_at(u)
    }

    /// Fine-step RK4 reference output, returned as `(times, values)`.
    #[pyo3(signature = (signal, tau_fine=harness::REF_TAU))]
    fn simulate(&self, py: Python<'_>, signal: &PySignal, tau_fine: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let traj = py
            .detach(|| ssm::simulate_continuous(&self.0, &signal.0, tau_fine))
            .or_raise()?;
        Ok((traj.times().to_vec(), traj.values().to_vec()))
    }

    /// Discretizes on the grid `kτ` and runs the recurrence over `signal`'s samples.
    #[pyo3(signature = (signal, tau, method="zoh"))]
    fn run_discrete(&self, signal: &PySignal, tau: f64, method: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let method = parse_method(method)?;
        let (times, samples) = harness::grid_samples(&signal.0 as &dyn Signal, tau);
        let dsys = ssm::discretize(&self.0, &samples, tau, method).or_raise()?;
        let traj = ssm::run_discrete(&dsys, &samples).or_raise()?;
        Ok((times, traj.into_values()))
    }

    fn __repr__(&self) -> String {
        format!("Ssm(flavor={}, n={})", self.0.flavor().name(), self.0.n())
    }
}

#[pyfunction]
fn s4d_lin_poles(n: usize) -> Vec<C64> {
    ssm::s4d_lin_poles(n)
}

#[pyfunction]
#[pyo3(signature = (a, step, method="zoh"))]
fn discretize_entry(a: C64, step: f64, method: &str) -> PyResult<(C64, C64)> {
    Ok(ssm::discretize_entry(a, step, parse_method(method)?))
}

#[pyfunction]
#[pyo3(signature = (*, l_u, l_b=0.0, l_c=0.0, l_delta=0.0, m_u=1.0, m_b=1.0, m_c=1.0, m_delta=1.0, a_norm=1.0))]
#[allow(clippy::too_many_arguments)]
fn bound_general(
    l_u: f64,
    l_b: f64,
    l_c: f64,
    l_delta: f64,
    m_u: f64,
    m_b: f64,
    m_c: f64,
    m_delta: f64,
    a_norm: f64,
) -> PyResult<f64> {
    harness::bound_general(&BoundInputs {
        l_u,
        l_b,
        l_c,
        l_delta,
        m_u,
        m_b,
        m_c,
        m_delta,
        a_norm,
    })
    .or_raise()
}

#[pyfunction]
fn bound_s4(sys: &PySsm, l_u: f64) -> PyResult<f64> {
    harness::bound_s4(&sys.0, l_u).or_raise()
}

#[pyfunction]
fn bound_s6(sys: &PySsm, l_u: f64, m_u: f64) -> PyResult<f64> {
    harness::bound_s6(&sys.0, l_u, m_u).or_raise()
}

#[pyfunction]
fn fit_order(taus: Vec<f64>, errors: Vec<f64>) -> PyResult<f64> {
    harness::fit_order(&taus, &errors).or_raise()
}

fn record_dict<'py>(py: Python<'py>, r: &ConvergenceRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("pair_id", r.pair_id)?;
    d.set_item("flavor", r.flavor.name())?;
    d.set_item("method", r.method.name())?;
    d.set_item("tau", r.tau)?;
    d.set_item("scale", r.scale)?;
    d.set_item("rel_max_error", r.rel_max_error)?;
    d.set_item("abs_max_error", r.abs_max_error)?;
    d.set_item("bound", r.bound)?;
    d.set_item("order_fit_group", r.order_fit_group)?;
    d.set_item("diverged", r.diverged)?;
    Ok(d)
}

/// Runs the discretization-error study and returns one dict per record.
#[pyfunction]
#[pyo3(signature = (seed, n_pairs=20, taus=None, scales=None, methods=None, n_states=8))]
fn run_convergence_study<'py>(
    py: Python<'py>,
    seed: u64,
    n_pairs: usize,
    taus: Option<Vec<f64>>,
    scales: Option<Vec<f64>>,
    methods: Option<Vec<String>>,
    n_states: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = StudyConfig::new(seed);
    cfg.n_pairs = n_pairs;
    cfg.n_states = n_states;
    if let Some(taus) = taus {
        cfg.taus = taus;
    }
    if let Some(scales) = scales {
        cfg.scales = scales;
    }
    if let Some(methods) = methods {
        cfg.methods = methods.iter().map(|m| parse_method(m)).collect::<PyResult<_>>()?;
    }
    let records = py.detach(|| harness::run_convergence_study(&cfg)).or_raise()?;
    records.iter().map(|r| record_dict(py, r)).collect()
}

/// Median relative error over pairs for one (flavor, method, τ, scale) cell.
#[pyfunction]
fn median_error(
    records: Vec<Bound<'_, PyDict>>,
    flavor: &str,
    method: &str,
    tau: f64,
    scale: f64,
) -> PyResult<Option<f64>> {
    let method = parse_method(method)?.name();
    let mut errors = Vec::new();
    for r in &records {
        let get = |k: &str| -> PyResult<Bound<'_, PyAny>> {
            r.get_item(k)?
                .ok_or_else(|| SsmlabError::new_err(format!("record missing `{k}`")))
        };
        let hit = get("flavor")?.extract::<String>()? == flavor
            && get("method")?.extract::<String>()? == method
            && get("tau")?.extract::<f64>()? == tau
            && get("scale")?.extract::<f64>()? == scale
            && !get("diverged")?.extract::<bool>()?;
        if hit {
            errors.push(get("rel_max_error")?.extract::<f64>()?);
        }
    }
    Ok(harness::median(&mut errors))
}

fn params_from(kind: SystemKind, values: &Bound<'_, PyDict>) -> PyResult<SystemParams> {
    let get = |k: &str| -> PyResult<f64> {
        values
            .get_item(k)?
            .ok_or_else(|| SsmlabError::new_err(format!("{} needs parameter `{k}`", kind.name())))?
            .extract()
    };
    Ok(match kind {
        SystemKind::VanDerPol => SystemParams::VanDerPol { mu: get("mu")? },
        SystemKind::DampedHarmonic => SystemParams::DampedHarmonic {
            omega: get("omega")?,
            zeta: get("zeta")?,
        },
        SystemKind::OrnsteinUhlenbeck => SystemParams::OrnsteinUhlenbeck {
            theta: get("theta")?,
            sigma: get("sigma")?,
        },
        SystemKind::ForcedDuffing => SystemParams::ForcedDuffing {
            delta: get("delta")?,
            alpha: get("alpha")?,
            beta: get("beta")?,
            gamma: get("gamma")?,
            omega: get("omega")?,
        },
    })
}

/// Integrates one system with explicit parameters; returns `(times, x)`.
#[pyfunction]
#[pyo3(signature = (kind, params, x0=1.0, v0=0.0, horizon=10.0, tau0=0.01, seed=0))]
#[allow(clippy::too_many_arguments)]
fn generate(
    kind: &str,
    params: &Bound<'_, PyDict>,
    x0: f64,
    v0: f64,
    horizon: f64,
    tau0: f64,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let params = params_from(parse(kind)?, params)?;
    let spec = DynSysSpec::new(params, x0, v0).with_grid(horizon, tau0);
    let traj = dynsys::generate(&spec, seed).or_raise()?;
    Ok((traj.times().to_vec(), traj.into_values()))
}

type Sample<'py> = (Vec<f64>, Vec<f64>, Bound<'py, PyDict>);

/// Draws seeded trajectories; each item is `(times, x, params)`.
#[pyfunction]
#[pyo3(signature = (kind, count, seed, horizon=10.0, tau0=0.01, overrides=None))]
fn sample_dataset<'py>(
    py: Python<'py>,
    kind: &str,
    count: usize,
    seed: u64,
    horizon: f64,
    tau0: f64,
    overrides: Option<Vec<(String, f64)>>,
) -> PyResult<Vec<Sample<'py>>> {
    let kind: SystemKind = parse(kind)?;
    let opts = DatasetOptions {
        horizon,
        tau0,
        overrides: overrides.unwrap_or_default(),
    };
    let data = py
        .detach(|| dynsys::sample_dataset(kind, count, seed, &opts))
        .or_raise()?;
    data.into_iter()
        .map(|(traj, params)| {
            let d = PyDict::new(py);
            for (k, v) in params.entries() {
                d.set_item(k, v)?;
            }
            Ok((traj.times().to_vec(), traj.into_values(), d))
        })
        .collect()
}

/// Fixed random direction and orthonormal basis for scalar-to-token embedding.
#[pyclass(name = "EmbeddingSpec", frozen)]
struct PyEmbedding(EmbeddingSpec);

#[pymethods]
impl PyEmbedding {
    #[new]
    fn new(seed: u64) -> Self {
        Self(EmbeddingSpec::random(seed))
    }

    fn embed(&self, u: f64, eta: f64) -> PyResult<Vec<f64>> {
        metric::embed(u, eta, &self.0).or_raise()
    }

    /// Normalizes `values` to [-1, 1] and embeds every sample.
    fn embed_sequence(&self, values: Vec<f64>, eta: f64) -> PyResult<Vec<Vec<f64>>> {
        let traj = ssm::Trajectory::uniform(1.0, values).or_raise()?;
        Ok(metric::embed_trajectory(&traj, eta, &self.0).or_raise()?.into_tokens())
    }
}

#[pyfunction]
fn kernel_cosine(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    if x.len() != y.len() {
        return Err(SsmlabError::new_err("vectors differ in length"));
    }
    Ok(metric::kernel_cosine(&x, &y))
}

/// Continuity score of token sequences; returns `(mu_by_lag, total)`.
#[pyfunction]
#[pyo3(signature = (sequences, seed, max_lag=16, far_pair_samples=10_000, gap=None))]
fn mu_profile(
    py: Python<'_>,
    sequences: Vec<Vec<Vec<f64>>>,
    seed: u64,
    max_lag: usize,
    far_pair_samples: usize,
    gap: Option<usize>,
) -> PyResult<(Vec<f64>, f64)> {
    let data = sequences
        .into_iter()
        .map(SequenceSample::new)
        .collect::<ssmlab::Result<Vec<_>>>()
        .or_raise()?;
    let cfg = MetricConfig {
        max_lag,
        gap,
        far_pair_samples,
        ..Default::default()
    };
    let profile = py.detach(|| metric::mu_profile(&data, &cfg, seed)).or_raise()?;
    Ok((profile.mu_by_lag, profile.total))
}

#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    metric::spearman(&x, &y).or_raise()
}

#[pyfunction]
#[pyo3(signature = (seq, r, strategy="indexing"))]
fn subsample(seq: Vec<f64>, r: usize, strategy: &str) -> PyResult<Vec<f64>> {
    stagewise::subsample(&seq, r, parse::<Strategy>(strategy)?).or_raise()
}

#[pyfunction]
fn delta_schedule(strides: Vec<usize>, delta_init: f64) -> PyResult<Vec<f64>> {
    let sched = StageSchedule::uniform(strides, 1, Strategy::Indexing).or_raise()?;
    stagewise::delta_schedule(&sched, delta_init).or_raise()
}

/// Stage-wise ridge fit on the ω-recovery task; one dict per stage.
#[pyfunction]
#[pyo3(signature = (seed, strides=vec![4, 2, 1], epochs=1, strategy="indexing", delta_init=0.04, count=1000, horizon=2.0, n_states=32, lam=stagewise::DEFAULT_LAMBDA))]
#[allow(clippy::too_many_arguments)]
fn run_stagewise<'py>(
    py: Python<'py>,
    seed: u64,
    strides: Vec<usize>,
    epochs: usize,
    strategy: &str,
    delta_init: f64,
    count: usize,
    horizon: f64,
    n_states: usize,
    lam: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let sched = StageSchedule::uniform(strides, epochs, parse(strategy)?).or_raise()?;
    let reports = py
        .detach(|| {
            let data = stagewise::omega_recovery_dataset(count, horizon, seed)?;
            let mut trainer = RidgeS4Trainer::new(n_states, lam, seed)?;
            stagewise::run_stagewise(&data, &sched, delta_init, &mut trainer, seed)
        })
        .or_raise()?;
    reports
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("stage", r.stage)?;
            d.set_item("stride", r.stride)?;
            d.set_item("delta", r.delta)?;
            d.set_item("epochs", r.epochs)?;
            d.set_item("seq_len", r.seq_len)?;
            d.set_item("cum_wall_time_s", r.cum_wall_time_s)?;
            d.set_item("train_mse", r.train_mse)?;
            d.set_item("val_mse", r.val_mse)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn ssmlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SsmlabError", m.py().get_type::<SsmlabError>())?;
    m.add("S4", Flavor::S4.name())?;
    m.add("S6", Flavor::S6.name())?;
    m.add_class::<PySignal>()?;
    m.add_class::<PySsm>()?;
    m.add_class::<PyEmbedding>()?;
    m.add_function(wrap_pyfunction!(s4d_lin_poles, m)?)?;
    m.add_function(wrap_pyfunction!(discretize_entry, m)?)?;
    m.add_function(wrap_pyfunction!(bound_general, m)?)?;
    m.add_function(wrap_pyfunction!(bound_s4, m)?)?;
    m.add_function(wrap_pyfunction!(bound_s6, m)?)?;
    m.add_function(wrap_pyfunction!(fit_order, m)?)?;
    m.add_function(wrap_pyfunction!(run_convergence_study, m)?)?;
    m.add_function(wrap_pyfunction!(median_error, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(sample_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_cosine, m)?)?;
    m.add_function(wrap_pyfunction!(mu_profile, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(subsample, m)?)?;
    m.add_function(wrap_pyfunction!(delta_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(run_stagewise, m)?)?;
    Ok(())
}
