//! Python bindings for the finite-blocklength rate and simulation library.
//!
//! Scalar formulas come through as plain functions; structured results
//! (estimates, matrices, schedules, simulation reports) cross the
//! boundary as dictionaries mirroring the crate's stable JSON shapes, so
//! a Python caller sees the same field names the CLI emits.

use fbl_gausac::dispersion::{self, PowerAllocation};
use fbl_gausac::mac::{self, CodebookMode, MacConfig};
use fbl_gausac::rac::{self, RacSchedule, ScheduleTarget};
use fbl_gausac::region::{self, RateTuple};
use fbl_gausac::rng::unit_rng;
use fbl_gausac::specfun;
use fbl_gausac::sphere;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

fn to_py_err(e: fbl_gausac::Error) -> PyErr {
    match e {
        fbl_gausac::Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Convert a JSON value into the matching Python object.
fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else if let Some(u) = num.as_u64() {
                u.into_pyobject(py)?.into_any()
            } else {
                num.as_f64()
                    .expect("JSON number is integral or finite")
                    .into_pyobject(py)?
                    .into_any()
            }
        }
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let converted: Vec<_> = items
                .iter()
                .map(|item| json_to_py(py, item))
                .collect::<PyResult<_>>()?;
            PyList::new(py, converted)?.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, value) in map {
                dict.set_item(key, json_to_py(py, value)?)?;
            }
            dict.into_any()
        }
    })
}

fn estimate_dict<'py>(
    py: Python<'py>,
    est: &region::EstimateWithCI,
) -> PyResult<Bound<'py, PyDict>> {
    let obj = json_to_py(py, &est.to_json())?;
    Ok(obj.cast_into::<PyDict>()?)
}

// ---- scalar formulas -----------------------------------------------------

/// Channel capacity `½ ln(1 + P)` in nats.
#[pyfunction]
fn capacity(p: f64) -> PyResult<f64> {
    dispersion::capacity(p).map_err(to_py_err)
}

/// Single-user dispersion `P(P+2) / (2(1+P)²)`.
#[pyfunction]
fn dispersion_v(p: f64) -> PyResult<f64> {
    dispersion::dispersion_v(p).map_err(to_py_err)
}

/// Cross-dispersion of `k` equal-power users.
#[pyfunction]
fn cross_dispersion(k: usize, p: f64) -> PyResult<f64> {
    dispersion::cross_dispersion(k, p).map_err(to_py_err)
}

/// Gaussian upper-tail probability `Q(x)`.
#[pyfunction]
fn gaussian_q(x: f64) -> PyResult<f64> {
    specfun::gaussian_q(x).map_err(to_py_err)
}

/// Inverse of `Q`: the `x` with `Q(x) = p`.
#[pyfunction]
fn gaussian_q_inv(p: f64) -> PyResult<f64> {
    specfun::gaussian_q_inv(p).map_err(to_py_err)
}

/// CDF of the normalized first coordinate of a uniform point on the
/// radius-`√n` sphere.
#[pyfunction]
fn sphere_coord_cdf(q: f64, n: usize) -> PyResult<f64> {
    specfun::sphere_coord_cdf(q, n).map_err(to_py_err)
}

/// Symmetric per-user `ln M` achievable by `k` users of power `p` at
/// blocklength `n` and error budget `eps`.
#[pyfunction]
#[pyo3(signature = (n, k, p, eps, c0 = 0.0))]
fn achievable_logm_symmetric(n: u64, k: usize, p: f64, eps: f64, c0: f64) -> PyResult<f64> {
    region::achievable_logm_symmetric(n, k, p, eps, c0).map_err(to_py_err)
}

/// Smallest admissible first decode time and its gate width, as a dict
/// with keys `n0` and `lambda0`.
#[pyfunction]
fn min_n0(py: Python<'_>, n1: u64, p: f64, eps0: f64) -> PyResult<Py<PyDict>> {
    let gate = region::min_n0(n1, p, eps0).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("n0", gate.n0)?;
    dict.set_item("lambda0", gate.lambda0)?;
    Ok(dict.unbind())
}

/// Total-variation upper bound for the first `k` sphere coordinates vs
/// independent standard normals.
#[pyfunction]
fn stam_bound(n: u64, k: usize) -> PyResult<f64> {
    region::stam_bound(n, k).map_err(to_py_err)
}

/// Probability that at least two of `k` active senders pick the same one
/// of `m` messages.
#[pyfunction]
fn repetition_probability(k: usize, m: u64) -> PyResult<f64> {
    rac::repetition_probability(k, m).map_err(to_py_err)
}

// ---- structured formulas ---------------------------------------------------

/// Per-subset capacity values for arbitrary powers, as the stable JSON
/// shape `{users, entries: {bitmask: value}}`.
#[pyfunction]
fn capacity_vector(py: Python<'_>, powers: Vec<f64>) -> PyResult<Py<PyAny>> {
    let pa = PowerAllocation::new(powers).map_err(to_py_err)?;
    let cv = dispersion::capacity_vector(&pa).map_err(to_py_err)?;
    Ok(json_to_py(py, &cv.to_json())?.unbind())
}

/// Subset-pair dispersion matrix for arbitrary powers, as the stable JSON
/// shape `{users, entries: {bitmask: {bitmask: value}}}`.
#[pyfunction]
fn dispersion_matrix(py: Python<'_>, powers: Vec<f64>) -> PyResult<Py<PyAny>> {
    let pa = PowerAllocation::new(powers).map_err(to_py_err)?;
    let dm = dispersion::dispersion_matrix(&pa).map_err(to_py_err)?;
    Ok(json_to_py(py, &dm.to_json())?.unbind())
}

/// Monte Carlo membership test of a rate tuple (per-user `ln M`) in the
/// achievable region. Returns `{verdict, probability: {…}, thresholds}`.
#[pyfunction]
#[pyo3(signature = (powers, n, log_m, eps, c0 = 0.0, samples = 100_000, seed = 0, confidence = 0.95))]
#[allow(clippy::too_many_arguments)] // mirrors the library call it wraps
fn rate_tuple_achievable(
    py: Python<'_>,
    powers: Vec<f64>,
    n: u64,
    log_m: Vec<f64>,
    eps: f64,
    c0: f64,
    samples: u64,
    seed: u64,
    confidence: f64,
) -> PyResult<Py<PyDict>> {
    let pa = PowerAllocation::new(powers).map_err(to_py_err)?;
    let rates = RateTuple::from_per_user_log_m(log_m).map_err(to_py_err)?;
    let check = py.detach(|| {
        region::rate_tuple_achievable(&pa, n, &rates, eps, c0, samples, seed, confidence)
    });
    let check = check.map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("verdict", format!("{:?}", check.verdict))?;
    dict.set_item("probability", estimate_dict(py, &check.probability)?)?;
    dict.set_item("thresholds", check.thresholds)?;
    Ok(dict.unbind())
}

/// One uniform sample from the sphere of per-symbol power `power`.
#[pyfunction]
#[pyo3(signature = (n, power, seed = 0))]
fn sample_sphere(n: usize, power: f64, seed: u64) -> PyResult<Vec<f64>> {
    let mut rng = unit_rng(seed, 0);
    Ok(sphere::sample_sphere(n, power, &mut rng)
        .map_err(to_py_err)?
        .into_coords())
}

// ---- simulations -----------------------------------------------------------

fn mac_config(
    n: usize,
    powers: Vec<f64>,
    message_counts: Vec<u64>,
    ensemble: bool,
) -> PyResult<MacConfig> {
    let pa = PowerAllocation::new(powers).map_err(to_py_err)?;
    let mode = if ensemble {
        CodebookMode::Ensemble
    } else {
        CodebookMode::Fixed
    };
    MacConfig::new(n, pa, message_counts, mode).map_err(to_py_err)
}

/// Simulate multiple-access transmission with maximum-likelihood decoding.
/// Returns `{error_prob: {…}, errors, trials}`.
#[pyfunction]
#[pyo3(signature = (n, powers, message_counts, trials, seed = 0, ensemble = true, confidence = 0.95))]
#[allow(clippy::too_many_arguments)] // mirrors the library call it wraps
fn simulate_mac(
    py: Python<'_>,
    n: usize,
    powers: Vec<f64>,
    message_counts: Vec<u64>,
    trials: u64,
    seed: u64,
    ensemble: bool,
    confidence: f64,
) -> PyResult<Py<PyDict>> {
    let cfg = mac_config(n, powers, message_counts, ensemble)?;
    let report = py
        .detach(|| mac::simulate_mac(&cfg, trials, seed, confidence))
        .map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("error_prob", estimate_dict(py, &report.error_prob)?)?;
    dict.set_item("errors", report.errors)?;
    dict.set_item("trials", report.trials)?;
    Ok(dict.unbind())
}

/// Monte Carlo random-coding-union error estimate for the same channel.
/// Returns the estimate as `{point, half_width, confidence, samples}`.
#[pyfunction]
#[pyo3(signature = (n, powers, message_counts, outer_samples, inner_samples, seed = 0, confidence = 0.95))]
#[allow(clippy::too_many_arguments)] // mirrors the library call it wraps
fn rcu_mc_estimate(
    py: Python<'_>,
    n: usize,
    powers: Vec<f64>,
    message_counts: Vec<u64>,
    outer_samples: u64,
    inner_samples: u64,
    seed: u64,
    confidence: f64,
) -> PyResult<Py<PyDict>> {
    let cfg = mac_config(n, powers, message_counts, true)?;
    let est = py
        .detach(|| mac::rcu_mc_estimate(&cfg, outer_samples, inner_samples, seed, confidence))
        .map_err(to_py_err)?;
    Ok(estimate_dict(py, &est)?.unbind())
}

// ---- rateless schedules ------------------------------------------------------

/// A rateless decode schedule: times, gate widths, and code parameters.
#[pyclass(name = "RacSchedule", frozen)]
struct PyRacSchedule {
    inner: RacSchedule,
}

#[pymethods]
impl PyRacSchedule {
    /// Construct from explicit times and gate widths.
    #[new]
    #[pyo3(signature = (times, lambdas, messages, power, eps, c0 = 0.0))]
    fn new(
        times: Vec<usize>,
        lambdas: Vec<f64>,
        messages: u64,
        power: f64,
        eps: f64,
        c0: f64,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: RacSchedule::new(times, lambdas, messages, power, eps, c0)
                .map_err(to_py_err)?,
        })
    }

    /// Build a schedule for up to `k_max` senders, targeting either a
    /// message count (`messages=`) or a final decode time (`final_time=`).
    #[staticmethod]
    #[pyo3(signature = (k_max, power, eps, messages = None, final_time = None, c0 = 0.0))]
    fn build(
        k_max: usize,
        power: f64,
        eps: f64,
        messages: Option<u64>,
        final_time: Option<u64>,
        c0: f64,
    ) -> PyResult<Self> {
        let target = match (messages, final_time) {
            (Some(m), None) => ScheduleTarget::Messages(m),
            (None, Some(n)) => ScheduleTarget::FinalTime(n),
            _ => {
                return Err(PyValueError::new_err(
                    "pass exactly one of messages= or final_time=",
                ))
            }
        };
        Ok(Self {
            inner: rac::build_rac_schedule(k_max, power, eps, target, c0).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn times(&self) -> Vec<usize> {
        self.inner.times().to_vec()
    }

    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.inner.lambdas().to_vec()
    }

    #[getter]
    fn message_count(&self) -> u64 {
        self.inner.message_count()
    }

    #[getter]
    fn power(&self) -> f64 {
        self.inner.power()
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps()
    }

    /// The schedule as a plain dict (the crate's JSON shape).
    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        Ok(json_to_py(py, &self.inner.to_json())?.unbind())
    }

    /// Analytical upper bound on decoding at the wrong time with `k`
    /// active senders; `extra_kappas` supplies the constants for k ≥ 3.
    #[pyo3(signature = (k, extra_kappas = Vec::new()))]
    fn wrong_time_bound(&self, k: usize, extra_kappas: Vec<f64>) -> PyResult<f64> {
        rac::wrong_time_bound(&self.inner, k, &extra_kappas).map_err(to_py_err)
    }

    /// Simulate the full protocol with `k_actual` active senders.
    /// Returns `{k_actual, epochs, repetition, wrong_time, wrong_message,
    /// error_prob: {…}}`.
    #[pyo3(signature = (k_actual, epochs, seed = 0, confidence = 0.95))]
    fn simulate(
        &self,
        py: Python<'_>,
        k_actual: usize,
        epochs: u64,
        seed: u64,
        confidence: f64,
    ) -> PyResult<Py<PyDict>> {
        let report = py
            .detach(|| rac::simulate_rac(&self.inner, k_actual, epochs, seed, confidence))
            .map_err(to_py_err)?;
        let dict = PyDict::new(py);
        dict.set_item("k_actual", report.k_actual)?;
        dict.set_item("epochs", report.epochs)?;
        dict.set_item("repetition", report.breakdown.repetition)?;
        dict.set_item("wrong_time", report.breakdown.wrong_time)?;
        dict.set_item("wrong_message", report.breakdown.wrong_message)?;
        dict.set_item("error_prob", estimate_dict(py, &report.error_prob)?)?;
        Ok(dict.unbind())
    }

    fn __repr__(&self) -> String {
        format!(
            "RacSchedule(times={:?}, messages={}, power={}, eps={})",
            self.inner.times(),
            self.inner.message_count(),
            self.inner.power(),
            self.inner.eps()
        )
    }
}

#[pymodule]
fn fbl_gausac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion_v, m)?)?;
    m.add_function(wrap_pyfunction!(cross_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_q, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_q_inv, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_coord_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(achievable_logm_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(min_n0, m)?)?;
    m.add_function(wrap_pyfunction!(stam_bound, m)?)?;
    m.add_function(wrap_pyfunction!(repetition_probability, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_vector, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(rate_tuple_achievable, m)?)?;
    m.add_function(wrap_pyfunction!(sample_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_mac, m)?)?;
    m.add_function(wrap_pyfunction!(rcu_mc_estimate, m)?)?;
    m.add_class::<PyRacSchedule>()?;
    Ok(())
}
