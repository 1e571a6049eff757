//! Python bindings. Points are passed as lists of `(x, y, z)` tuples.

use logenergy::energy::{self, MathConstants};
use logenergy::lattice;
use logenergy::optimizer::{self, EnergyKind, Schedule};
use logenergy::special::{self, LRoute, QValue, ThetaKind};
use logenergy::spectral;
use logenergy::sphere::{self, ConfigKind};
use logenergy::Error;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

/// A configuration of points on the unit sphere.
#[pyclass(name = "Configuration", module = "logenergy_py")]
struct PyConfiguration {
    inner: logenergy::Configuration,
}

#[pymethods]
impl PyConfiguration {
    #[new]
    fn new(points: Vec<[f64; 3]>) -> PyResult<Self> {
        let inner = logenergy::Configuration::from_coords(&points).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// `kind` is one of random, fibonacci, tetrahedron, antipodal.
    #[staticmethod]
    #[pyo3(signature = (kind, n, seed = 0))]
    fn generate(kind: &str, n: usize, seed: u64) -> PyResult<Self> {
        let kind: ConfigKind = kind.parse().map_err(to_py)?;
        let inner = sphere::generate_configuration(kind, n, seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = sphere::read_configuration(std::path::Path::new(path)).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        sphere::write_configuration(&self.inner, std::path::Path::new(path)).map_err(to_py)
    }

    fn points(&self) -> Vec<[f64; 3]> {
        self.inner.coords()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn log_energy(&self) -> PyResult<f64> {
        energy::log_energy(&self.inner).map_err(to_py)
    }

    fn gaussian_energy(&self, c: f64) -> PyResult<f64> {
        energy::gaussian_energy(&self.inner, c).map_err(to_py)
    }

    /// Terms of the renormalized identity at time `t`.
    #[pyo3(signature = (t, tol = 1e-12))]
    fn renormalized<'py>(&self, py: Python<'py>, t: f64, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let params = spectral::KernelParams::new(t, tol).map_err(to_py)?;
        let b = energy::renormalized_functional(&self.inner, &params).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("n", b.n)?;
        d.set_item("t", b.t)?;
        d.set_item("log_energy", b.log_energy)?;
        d.set_item("interaction", b.interaction)?;
        d.set_item("sobolev", b.sobolev)?;
        d.set_item("x_empirical", b.x_empirical)?;
        d.set_item("x_closed", b.x_closed)?;
        d.set_item("residual", b.residual)?;
        d.set_item("error_budget", b.error_budget)?;
        Ok(d)
    }

    fn nearest_neighbor_stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = optimizer::nearest_neighbor_stats(&self.inner).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("mean_nn", s.mean_nn)?;
        d.set_item("cv_nn", s.cv_nn)?;
        d.set_item("lambda_ref", s.lambda_ref)?;
        Ok(d)
    }

    /// Projected gradient descent; `energy` is "log" or "gaussian".
    #[pyo3(signature = (energy = "log", c = 1.0, max_iter = 5000, grad_tol = 1e-9, initial_step = 1e-3))]
    fn minimize<'py>(
        &self,
        py: Python<'py>,
        energy: &str,
        c: f64,
        max_iter: usize,
        grad_tol: f64,
        initial_step: f64,
    ) -> PyResult<(PyConfiguration, Bound<'py, PyDict>)> {
        let kind = energy_kind(energy, c)?;
        let schedule = Schedule { max_iter, grad_tol, initial_step };
        let state = py
            .detach(|| optimizer::minimize(&self.inner, kind, &schedule))
            .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("energy", state.energy)?;
        d.set_item("iterations", state.iteration)?;
        d.set_item("grad_norm", state.grad_norm)?;
        d.set_item("converged", state.converged)?;
        d.set_item("history", state.history.clone())?;
        Ok((PyConfiguration { inner: state.configuration }, d))
    }

    fn __repr__(&self) -> String {
        format!("Configuration(n={})", self.inner.n())
    }
}

fn energy_kind(name: &str, c: f64) -> PyResult<EnergyKind> {
    match name {
        "log" => Ok(EnergyKind::Log),
        "gaussian" => Ok(EnergyKind::Gaussian { c }),
        other => Err(PyValueError::new_err(format!("unknown energy `{other}`"))),
    }
}

/// Heat, Sobolev and integrated kernels at one diffusion time.
#[pyclass(name = "KernelParams", module = "logenergy_py")]
struct PyKernelParams {
    inner: spectral::KernelParams,
}

#[pymethods]
impl PyKernelParams {
    #[new]
    #[pyo3(signature = (t, tol = 1e-12))]
    fn new(t: f64, tol: f64) -> PyResult<Self> {
        Ok(Self { inner: spectral::KernelParams::new(t, tol).map_err(to_py)? })
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t()
    }

    #[getter]
    fn tol(&self) -> f64 {
        self.inner.tol()
    }

    #[getter]
    fn heat_degree(&self) -> usize {
        self.inner.degree(spectral::KernelKind::Heat)
    }

    #[getter]
    fn sobolev_degree(&self) -> usize {
        self.inner.degree(spectral::KernelKind::Sobolev)
    }

    fn heat(&self, c: f64) -> PyResult<f64> {
        spectral::heat_kernel(c, &self.inner).map_err(to_py)
    }

    fn sobolev(&self, c: f64) -> PyResult<f64> {
        spectral::sobolev_pair_kernel(c, &self.inner).map_err(to_py)
    }

    fn integrated(&self, c: f64) -> PyResult<f64> {
        spectral::integrated_heat_kernel(c, &self.inner).map_err(to_py)
    }

    fn diagonal(&self) -> f64 {
        self.inner.diagonal()
    }
}

#[pyfunction]
fn constants(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    let k = MathConstants::new();
    let d = PyDict::new(py);
    d.set_item("euler_gamma", k.euler_gamma)?;
    d.set_item("gamma_one_third", k.gamma_one_third)?;
    d.set_item("leading", k.leading)?;
    d.set_item("c2", k.c2)?;
    d.set_item("corollary1_bound", k.corollary1_bound)?;
    d.set_item("cbhs", k.cbhs)?;
    d.set_item("hex_improvement", energy::hex_improvement_estimate())?;
    d.set_item("improved_bound", energy::improved_lower_bound())?;
    Ok(d)
}

#[pyfunction]
fn closed_form_x(n: usize, t: f64, tol: f64) -> PyResult<f64> {
    let params = spectral::KernelParams::new(t, tol).map_err(to_py)?;
    energy::closed_form_x(n, &params).map_err(to_py)
}

#[pyfunction]
fn diagonal_green_heat_asymptotic(t: f64) -> PyResult<f64> {
    spectral::diagonal_green_heat_asymptotic(t).map_err(to_py)
}

#[pyfunction]
fn lower_bound(a: f64) -> PyResult<f64> {
    Ok(energy::lower_bound_pipeline(a).map_err(to_py)?.value)
}

#[pyfunction]
fn uninformed_improvement(s: f64) -> PyResult<f64> {
    energy::uninformed_improvement(s).map_err(to_py)
}

#[pyfunction]
fn gamma_lattice_sum(eps: f64, tol: f64) -> PyResult<(f64, u64, f64)> {
    let r = lattice::gamma_lattice_sum(eps, tol).map_err(to_py)?;
    Ok((r.value, r.cutoff_norm, r.tail_bound))
}

#[pyfunction]
fn three_term_expansion(eps: f64) -> PyResult<f64> {
    lattice::three_term_expansion(eps).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (c, tol = 1e-15))]
fn cbhs_from_integral(c: f64, tol: f64) -> PyResult<f64> {
    lattice::cbhs_from_integral(c, tol).map_err(to_py)
}

#[pyfunction]
fn jacobi_theta(kind: u8, q: f64) -> PyResult<f64> {
    let kind = match kind {
        2 => ThetaKind::Theta2,
        3 => ThetaKind::Theta3,
        _ => return Err(PyValueError::new_err("kind must be 2 or 3")),
    };
    Ok(special::jacobi_theta(kind, QValue::new(q).map_err(to_py)?))
}

/// `route` is "direct" or "borwein".
#[pyfunction]
#[pyo3(signature = (q, route = "direct"))]
fn cubic_theta_l(q: f64, route: &str) -> PyResult<f64> {
    let route = match route {
        "direct" => LRoute::Direct,
        "borwein" => LRoute::Borwein,
        other => return Err(PyValueError::new_err(format!("unknown route `{other}`"))),
    };
    special::cubic_theta_l(QValue::new(q).map_err(to_py)?, route).map_err(to_py)
}

#[pyfunction]
fn theta_inequality_margin(c: f64) -> PyResult<f64> {
    special::theta_inequality_margin(c).map_err(to_py)
}

#[pyfunction]
fn exp_integral_gamma0(z: f64) -> PyResult<f64> {
    special::exp_integral_gamma0(z).map_err(to_py)
}

#[pymodule]
fn logenergy_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyKernelParams>()?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_x, m)?)?;
    m.add_function(wrap_pyfunction!(diagonal_green_heat_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(uninformed_improvement, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_lattice_sum, m)?)?;
    m.add_function(wrap_pyfunction!(three_term_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(cbhs_from_integral, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_theta, m)?)?;
    m.add_function(wrap_pyfunction!(cubic_theta_l, m)?)?;
    m.add_function(wrap_pyfunction!(theta_inequality_margin, m)?)?;
    m.add_function(wrap_pyfunction!(exp_integral_gamma0, m)?)?;
    Ok(())
}
