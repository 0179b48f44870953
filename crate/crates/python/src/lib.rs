//! Python bindings for `edgelaw`.
#![allow(non_snake_case)]

use std::collections::HashMap;

use edgelaw::checks::{self, Check, SelftestOptions};
use edgelaw::fredholm::{self, DistEval};
use edgelaw::idpii::{self, PiiState};
use edgelaw::kernels::{KernelSpec, KernelTag};
use edgelaw::mc::{self, McConfig, Reference, Scaling};
use edgelaw::tails::{self, Regime, TailExpansion};
use edgelaw::EdgeError;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: EdgeError) -> PyErr {
    match e {
        EdgeError::InvalidArgument(m) => PyValueError::new_err(m),
        other => PyArithmeticError::new_err(other.to_string()),
    }
}

/// One value of the distribution function.
#[pyclass(name = "DistEval", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyDistEval {
    pub t: f64,
    pub sigma: f64,
    pub value: f64,
    pub ln_value: f64,
    pub complement: f64,
    pub err_est: f64,
    pub complement_bounds: Option<(f64, f64)>,
    pub method: String,
    pub route: String,
    pub meta: HashMap<String, f64>,
}

impl From<DistEval> for PyDistEval {
    fn from(d: DistEval) -> Self {
        PyDistEval {
            t: d.t,
            sigma: d.sigma,
            value: d.value,
            ln_value: d.ln_value,
            complement: d.complement,
            err_est: d.err_est,
            complement_bounds: d.complement_bounds,
            method: d.method.name().to_string(),
            route: d.route.to_string(),
            meta: d.meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

#[pymethods]
impl PyDistEval {
    fn __repr__(&self) -> String {
        format!(
            "DistEval(t={}, sigma={}, value={:e}, err_est={:e}, route='{}')",
            self.t, self.sigma, self.value, self.err_est, self.route
        )
    }
}

/// One evaluation of an asymptotic tail formula.
#[pyclass(name = "TailExpansion", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyTailExpansion {
    pub regime: String,
    pub t: f64,
    pub sigma: f64,
    pub value: f64,
    pub ln_value: f64,
    pub complement: f64,
    pub valid: bool,
    pub window: String,
    pub pieces: HashMap<String, f64>,
}

impl From<TailExpansion> for PyTailExpansion {
    fn from(e: TailExpansion) -> Self {
        PyTailExpansion {
            regime: e.regime.name().to_string(),
            t: e.t,
            sigma: e.sigma,
            value: e.value,
            ln_value: e.ln_value,
            complement: e.complement,
            valid: e.valid,
            window: e.window.to_string(),
            pieces: e.pieces.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

#[pymethods]
impl PyTailExpansion {
    fn __repr__(&self) -> String {
        format!(
            "TailExpansion(regime='{}', t={}, sigma={}, value={:e}, valid={})",
            self.regime, self.t, self.sigma, self.value, self.valid
        )
    }
}

/// Solution of the integro-differential Painleve II system on `[t_min, t0]`.
#[pyclass(name = "PiiState", frozen)]
pub struct PyPiiState(PiiState);

#[pymethods]
impl PyPiiState {
    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma
    }

    #[getter]
    fn t_grid(&self) -> Vec<f64> {
        self.0.t_grid.clone()
    }

    #[getter]
    fn energy(&self) -> Vec<f64> {
        self.0.e.clone()
    }

    /// Distribution function at `t`, interpolated from the solution.
    fn F(&self, t: f64) -> PyResult<PyDistEval> {
        idpii::F_from_idpii(&self.0, t).map(Into::into).map_err(to_py)
    }

    fn stark_residual(&self, t: f64, k: usize) -> PyResult<f64> {
        idpii::stark_residual(&self.0, t, k).map_err(to_py)
    }
}

/// Samples and summary of one Monte Carlo experiment.
#[pyclass(name = "McRun", frozen, get_all)]
pub struct PyMcRun {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub ks: Option<f64>,
    pub reference: String,
    pub containment: Option<f64>,
    pub sigma: f64,
}

/// Outcome of one named check.
#[pyclass(name = "Check", frozen, get_all)]
pub struct PyCheck {
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub line: String,
}

impl From<Check> for PyCheck {
    fn from(c: Check) -> Self {
        PyCheck {
            passed: c.pass(),
            line: c.line(),
            name: c.name,
            seconds: c.seconds,
        }
    }
}

#[pymethods]
impl PyCheck {
    fn __repr__(&self) -> String {
        self.line.clone()
    }
}

#[pyfunction]
#[pyo3(signature = (t, sigma, m=None, L=None))]
fn F_sigma(py: Python<'_>, t: f64, sigma: f64, m: Option<usize>, L: Option<f64>) -> PyResult<PyDistEval> {
    let out = py.detach(|| match (m, L) {
        (None, None) => fredholm::F_sigma(t, sigma),
        (Some(m), Some(l)) => fredholm::F_sigma_with(t, sigma, m, l),
        _ => Err(EdgeError::InvalidArgument("give both m and L or neither".into())),
    });
    out.map(Into::into).map_err(to_py)
}

/// Vectorised evaluation over `(t, sigma)` pairs, in parallel.
#[pyfunction]
fn F_sigma_many(py: Python<'_>, points: Vec<(f64, f64)>) -> PyResult<Vec<PyDistEval>> {
    let out = py.detach(|| fredholm::F_sigma_many(&points, None));
    out.map(|v| v.into_iter().map(Into::into).collect()).map_err(to_py)
}

/// Kernel value at `(a, b)`. `kind` is `airy`, `ft_airy` or `ft_airy_contour`.
#[pyfunction]
#[pyo3(signature = (a, b, t, sigma, kind="ft_airy"))]
fn kernel(a: f64, b: f64, t: f64, sigma: f64, kind: &str) -> PyResult<f64> {
    let tag = match kind {
        "airy" => KernelTag::Airy,
        "ft_airy" => KernelTag::FtAiry,
        "ft_airy_contour" => KernelTag::FtAiryContour,
        "gumbel_ext" => KernelTag::GumbelExt,
        _ => return Err(PyValueError::new_err(format!("unknown kernel '{kind}'"))),
    };
    KernelSpec::new(tag, t, sigma).and_then(|k| k.eval(a, b)).map_err(to_py)
}

/// Asymptotic formula for `regime` in `thm2`, `thm3`, `left`, `gumbel`,
/// `tw-right`, `tw-left`.
#[pyfunction]
#[pyo3(signature = (regime, t, sigma=0.0))]
fn tail(regime: &str, t: f64, sigma: f64) -> PyResult<PyTailExpansion> {
    let e = match regime {
        "thm2" => tails::right_tail_thm2(t, sigma),
        "thm3" => tails::right_tail_thm3(t, sigma),
        "left" => tails::left_tail_cor4(t, sigma),
        "gumbel" => tails::gumbel_tail(t, sigma),
        "tw-right" => tails::tw_right_tail(t),
        "tw-left" => {
            let ln = tails::tw_left_tail_ln(t);
            return Ok(PyTailExpansion {
                regime: Regime::TwLeft.name().to_string(),
                t,
                sigma: 0.0,
                value: ln.exp(),
                ln_value: ln,
                complement: -ln.exp_m1(),
                valid: t <= -4.0,
                window: "t <= -4".to_string(),
                pieces: HashMap::new(),
            });
        }
        _ => return Err(PyValueError::new_err(format!("unknown regime '{regime}'"))),
    };
    e.map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (sigma, t_min=-2.0, t0=8.0, m_h=32, ode_tol=1e-11))]
fn solve_idpii(py: Python<'_>, sigma: f64, t_min: f64, t0: f64, m_h: usize, ode_tol: f64) -> PyResult<PyPiiState> {
    py.detach(|| idpii::solve_idpii(sigma, t_min, t0, m_h, ode_tol))
        .map(PyPiiState)
        .map_err(to_py)
}

/// Rightmost-eigenvalue experiment. `law` is one of `gue`, `ginue`,
/// `ginue-matched`, `weak`, `raw`.
#[pyfunction]
#[pyo3(signature = (n, trials, seed, tau=1.0, law="gue"))]
fn monte_carlo(py: Python<'_>, n: usize, trials: usize, seed: u64, tau: f64, law: &str) -> PyResult<PyMcRun> {
    let (scaling, reference) = match law {
        "gue" => (Scaling::GueEdge, Reference::TracyWidom),
        "ginue" => (Scaling::GinueEdge, Reference::Gumbel),
        "ginue-matched" => (Scaling::GinueMatched, Reference::Gumbel),
        "weak" => (Scaling::GueEdge, Reference::WeakSigma),
        "raw" => (Scaling::Raw, Reference::None),
        _ => return Err(PyValueError::new_err(format!("unknown law '{law}'"))),
    };
    let mut cfg = McConfig::new(n, tau, trials, seed);
    cfg.scaling = scaling;
    cfg.reference = reference;
    let run = py.detach(|| mc::run_experiment(&cfg)).map_err(to_py)?;
    Ok(PyMcRun {
        sigma: run.config.sigma(),
        samples: run.samples,
        mean: run.summary.mean,
        ks: run.summary.ks,
        reference: run.summary.reference.to_string(),
        containment: run.summary.containment,
    })
}

/// Runs the built-in consistency checks, optionally a single group.
#[pyfunction]
#[pyo3(signature = (only=None))]
fn selftest(py: Python<'_>, only: Option<String>) -> PyResult<Vec<PyCheck>> {
    if let Some(g) = &only {
        if !checks::SELFTEST_GROUPS.contains(&g.as_str()) {
            return Err(PyValueError::new_err(format!("unknown group '{g}'")));
        }
    }
    let opts = SelftestOptions {
        only,
        ..Default::default()
    };
    Ok(py.detach(|| checks::selftest(&opts)).into_iter().map(Into::into).collect())
}

#[pymodule]
fn edgelaw_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistEval>()?;
    m.add_class::<PyTailExpansion>()?;
    m.add_class::<PyPiiState>()?;
    m.add_class::<PyMcRun>()?;
    m.add_class::<PyCheck>()?;
    m.add_function(wrap_pyfunction!(F_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(F_sigma_many, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(tail, m)?)?;
    m.add_function(wrap_pyfunction!(solve_idpii, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_eval_conversion_keeps_fields() {
        let d = fredholm::F_sigma(-2.0, 0.0).unwrap();
        let p = PyDistEval::from(d.clone());
        assert_eq!(p.value, d.value);
        assert_eq!(p.route, d.route);
        assert_eq!(p.meta.len(), d.meta.len());
        assert!(p.__repr__().starts_with("DistEval(t=-2"));
    }

    #[test]
    fn tail_conversion_keeps_pieces() {
        let e = tails::gumbel_tail(80.0, 200.0).unwrap();
        let p = PyTailExpansion::from(e.clone());
        assert_eq!(p.regime, "gumbel");
        assert_eq!(p.pieces["c_sigma"], e.piece("c_sigma").unwrap());
    }
}
