//! Python bindings: grids, the nonlinear model, the linear propagator and
//! configuration-driven runs.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use capwave::dynamics::{self, Params, StepperConfig};
use capwave::linear::{self, WindowSpec};
use capwave::runner;
use capwave::spectral;
use capwave::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidGrid(_) | Error::LengthMismatch { .. } | Error::NonFinite | Error::Domain(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(name = "SpectralGrid", module = "capwave_py", frozen)]
struct Grid {
    inner: spectral::SpectralGrid,
}

#[pymethods]
impl Grid {
    #[new]
    #[pyo3(signature = (n, period = std::f64::consts::TAU))]
    fn new(n: usize, period: f64) -> PyResult<Self> {
        Ok(Self {
            inner: spectral::SpectralGrid::new(n, period).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n_points()
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    fn wavenumbers(&self) -> Vec<f64> {
        self.inner.wavenumbers().to_vec()
    }

    fn coefficients(&self, f: Vec<f64>) -> PyResult<Vec<Complex64>> {
        self.inner.validate(&f).map_err(to_py)?;
        Ok(self.inner.coefficients(&f))
    }

    #[pyo3(signature = (f, order = 1))]
    fn derivative(&self, f: Vec<f64>, order: u32) -> PyResult<Vec<f64>> {
        self.inner.derivative(&f, order).map_err(to_py)
    }

    fn hilbert(&self, f: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.hilbert(&f).map_err(to_py)
    }

    fn lambda_pow(&self, f: Vec<f64>, s: f64) -> PyResult<Vec<f64>> {
        self.inner.lambda_pow(&f, s).map_err(to_py)
    }

    #[pyo3(signature = (f, cutoff_fraction = 2.0 / 3.0, floor = 1e-13))]
    fn filter(&self, f: Vec<f64>, cutoff_fraction: f64, floor: f64) -> PyResult<Vec<f64>> {
        self.inner.filter(&f, cutoff_fraction, floor).map_err(to_py)
    }

    fn sobolev_norm(&self, f: Vec<f64>, s: f64) -> PyResult<f64> {
        self.inner.sobolev_norm(&f, s).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("SpectralGrid(n={}, period={})", self.inner.n_points(), self.inner.period())
    }
}

#[pyclass(name = "SurfaceState", module = "capwave_py", frozen)]
struct State {
    inner: dynamics::SurfaceState,
}

#[pymethods]
impl State {
    /// Closed curve from a tangent angle; σ is set by the closure condition.
    #[staticmethod]
    #[pyo3(signature = (grid, theta, gamma, inv_we = 2.0, g = 0.0))]
    fn from_angle(grid: &Grid, theta: Vec<f64>, gamma: Vec<f64>, inv_we: f64, g: f64) -> PyResult<Self> {
        let params = Params { inv_we, gravity: g };
        dynamics::SurfaceState::from_angle(&grid.inner, theta, gamma, params)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.inner.theta.clone()
    }

    #[getter]
    fn gamma(&self) -> Vec<f64> {
        self.inner.gamma.clone()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }

    fn curve(&self, grid: &Grid) -> PyResult<Vec<Complex64>> {
        dynamics::reconstruct_curve(&grid.inner, &self.inner.theta, self.inner.sigma).map_err(to_py)
    }
}

#[pyclass(name = "Model", module = "capwave_py", frozen)]
struct PyModel {
    inner: dynamics::Model,
}

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (grid, dt, q_min = 0.5, cutoff_fraction = 2.0 / 3.0, floor = 1e-13))]
    fn new(grid: &Grid, dt: f64, q_min: f64, cutoff_fraction: f64, floor: f64) -> PyResult<Self> {
        let cfg = StepperConfig {
            dt,
            q_min,
            cutoff_fraction,
            floor,
            ..Default::default()
        };
        Ok(Self {
            inner: dynamics::Model::new(grid.inner.clone(), cfg).map_err(to_py)?,
        })
    }

    /// One step; raises `RuntimeError` naming the termination reason.
    fn step(&self, state: &State) -> PyResult<State> {
        self.inner
            .step(&state.inner)
            .map(|inner| State { inner })
            .map_err(|f| PyRuntimeError::new_err(format!("{}: {}", f.reason.as_str(), f.error)))
    }

    fn validate_state<'py>(&self, py: Python<'py>, state: &State) -> PyResult<Bound<'py, PyDict>> {
        let inv = self.inner.validate_state(&state.inner).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("closure", inv.closure)?;
        d.set_item("chord_arc", inv.chord_arc)?;
        d.set_item("kappa_max", inv.kappa_max)?;
        Ok(d)
    }

    /// Material fields of a state: κ, u, p and the remainders, among others.
    fn derived_fields<'py>(&self, py: Python<'py>, state: &State) -> PyResult<Bound<'py, PyDict>> {
        let f = self.inner.derived_fields(&state.inner).map_err(to_py)?;
        let d = PyDict::new(py);
        for (k, v) in [
            ("q", f.q),
            ("u", f.u),
            ("kappa", f.kappa),
            ("p", f.p),
            ("r_kappa", f.r_kappa),
            ("r_u", f.r_u),
            ("r_p", f.r_p),
            ("theta_t", f.theta_t),
            ("gamma_t", f.gamma_t),
            ("d_theta", f.d_theta),
            ("phi", f.phi),
        ] {
            d.set_item(k, v)?;
        }
        d.set_item("z", f.z)?;
        d.set_item("w", f.w)?;
        d.set_item("sigma_t", f.sigma_t)?;
        d.set_item("gamma_t_iterations", f.gamma_t_iterations)?;
        Ok(d)
    }

    fn energy_e0k(&self, state: &State, k: usize) -> PyResult<f64> {
        let f = self.inner.derived_fields(&state.inner).map_err(to_py)?;
        Ok(self.inner.energy_e0k(&state.inner, &f, k).map_err(to_py)?.value)
    }
}

#[pyclass(name = "LinearSolution", module = "capwave_py", frozen)]
struct Linear {
    inner: linear::LinearSolution,
}

#[pymethods]
impl Linear {
    #[new]
    #[pyo3(signature = (grid, kappa0, kappa1, inv_we = 2.0, g = 0.0, window = None))]
    fn new(
        grid: &Grid,
        kappa0: Vec<f64>,
        kappa1: Vec<f64>,
        inv_we: f64,
        g: f64,
        window: Option<(f64, f64)>,
    ) -> PyResult<Self> {
        let mut inner =
            linear::LinearSolution::from_fields(grid.inner.clone(), &kappa0, &kappa1, inv_we, g).map_err(to_py)?;
        if let Some((radius, taper)) = window {
            let w = WindowSpec::new(radius, taper, grid.inner.period()).map_err(to_py)?;
            inner = inner.with_window(w).map_err(to_py)?;
        }
        Ok(Self { inner })
    }

    fn propagate(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        self.inner.propagate(t)
    }

    fn energy_linear(&self, t: f64) -> f64 {
        self.inner.energy_linear(t)
    }

    fn energy_gamma2(&self, t: f64) -> PyResult<f64> {
        self.inner.energy_gamma2(t).map_err(to_py)
    }

    fn energy_gamma_g(&self, t: f64) -> PyResult<f64> {
        self.inner.energy_gamma_g(t).map_err(to_py)
    }

    fn weighted_gain_norm(&self, t: f64, k: u32) -> PyResult<f64> {
        self.inner.weighted_gain_norm(t, k).map_err(to_py)
    }
}

#[pyfunction]
#[pyo3(signature = (k, inv_we = 2.0, g = 0.0))]
fn omega(k: f64, inv_we: f64, g: f64) -> f64 {
    linear::omega(k, inv_we, g)
}

/// Birkhoff-Rott velocity (conjugate form) on the curve of `state`.
#[pyfunction]
fn birkhoff_rott(grid: &Grid, state: &State) -> PyResult<Vec<Complex64>> {
    let s = &state.inner;
    let z = dynamics::reconstruct_curve(&grid.inner, &s.theta, s.sigma).map_err(to_py)?;
    capwave::singular::birkhoff_rott(&grid.inner, &z, &s.gamma, s.sigma).map_err(to_py)
}

/// Validate a TOML configuration and return its fully-defaulted form.
#[pyfunction]
fn load_config(path: &str) -> PyResult<String> {
    runner::load_config(path)
        .map(|c| runner::emit_config(&c))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Execute a TOML configuration into `output_dir`; returns the manifest JSON.
#[pyfunction]
fn run_config(path: &str, output_dir: &str) -> PyResult<String> {
    let cfg = runner::load_config(path).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let m = runner::run_in(&cfg, std::path::Path::new(output_dir)).map_err(to_py)?;
    serde_json::to_string(&m).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn capwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grid>()?;
    m.add_class::<State>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<Linear>()?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(birkhoff_rott, m)?)?;
    m.add_function(wrap_pyfunction!(load_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
