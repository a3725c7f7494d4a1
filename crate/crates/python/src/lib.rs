//! Python bindings for `eqdist`.
//!
//! Complex inputs and outputs are Python `complex` values; matrices are lists
//! of rows. Every library error surfaces as `ValueError`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use eqdist::bergman::{bergman_function, bergman_mass, scaled_l1_error};
use eqdist::ensemble::{concentration_experiment, haar_rotate, mass_statistic, RandomPolynomial};
use eqdist::orthobasis::{build_onb, gram_residual, Basis};
use eqdist::quadrature::{build_rule, QuadratureRule};
use eqdist::randvar::{self, CoeffSpec, Field, Law};
use eqdist::toeplitz::{build_toeplitz, Symbol, ToeplitzMatrix};
use eqdist::weights::{reference_equilibrium, EquilibriumRef, WeightSpec};
use eqdist::zeros::{self, EmpiricalMeasure};

fn py_err(e: eqdist::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spec(law: &str, field: &str) -> PyResult<CoeffSpec> {
    Ok(CoeffSpec::new(Law::parse(law).map_err(py_err)?, Field::parse(field).map_err(py_err)?))
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<DMatrix<Complex64>> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

#[pyclass(name = "Weight", frozen)]
struct PyWeight {
    inner: WeightSpec,
}

#[pymethods]
impl PyWeight {
    /// `|z|^2 / 2` on `C^dim`.
    #[staticmethod]
    #[pyo3(signature = (dim = 1))]
    fn gaussian_half(dim: usize) -> PyResult<Self> {
        Ok(Self { inner: WeightSpec::gaussian_half(dim).map_err(py_err)? })
    }

    /// `|z|^(2p) / 2` on `C^dim`.
    #[staticmethod]
    #[pyo3(signature = (p, dim = 1))]
    fn radial_power(p: u32, dim: usize) -> PyResult<Self> {
        Ok(Self { inner: WeightSpec::radial_power(p, dim).map_err(py_err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_owned()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __call__(&self, z: Vec<Complex64>) -> PyResult<f64> {
        self.inner.eval(&z).map_err(py_err)
    }

    fn support_radius(&self) -> PyResult<f64> {
        Ok(self.equilibrium()?.support_radius())
    }

    fn radial_cdf(&self, r: f64) -> PyResult<f64> {
        Ok(self.equilibrium()?.radial_cdf(r))
    }

    fn __repr__(&self) -> String {
        format!("Weight({}, dim={})", self.inner.name(), self.inner.dim())
    }
}

impl PyWeight {
    fn equilibrium(&self) -> PyResult<EquilibriumRef> {
        reference_equilibrium(&self.inner).map_err(py_err)
    }
}

#[pyclass(name = "Toeplitz", frozen)]
struct PyToeplitz {
    inner: ToeplitzMatrix,
}

#[pymethods]
impl PyToeplitz {
    #[getter]
    fn symbol(&self) -> String {
        self.inner.symbol_id().to_owned()
    }

    fn __len__(&self) -> usize {
        self.inner.dim_n()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn trace_power(&self, k: u32) -> PyResult<f64> {
        self.inner.trace_power(k).map_err(py_err)
    }

    /// Eigenvalues in ascending order.
    fn spectrum(&self) -> PyResult<Vec<f64>> {
        self.inner.spectrum().map_err(py_err)
    }

    fn hs_norm(&self) -> f64 {
        self.inner.hs_norm()
    }

    fn op_norm(&self) -> PyResult<f64> {
        self.inner.op_norm().map_err(py_err)
    }

    fn entries(&self) -> Vec<Vec<Complex64>> {
        let a = self.inner.entries();
        (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
    }
}

#[pyclass(name = "Basis", frozen)]
struct PyBasis {
    weight: WeightSpec,
    rule: QuadratureRule,
    inner: Basis,
}

#[pymethods]
impl PyBasis {
    /// Orthonormal basis of polynomials of degree at most `n` in `L^2(e^{-2n phi})`.
    #[new]
    #[pyo3(signature = (weight, n, tol = 1e-12))]
    fn new(weight: &PyWeight, n: u32, tol: f64) -> PyResult<Self> {
        let w = weight.inner.clone();
        let rule = build_rule(&w, n, n as usize + 2, tol).map_err(py_err)?;
        let inner = build_onb(&w, n, &rule).map_err(py_err)?;
        Ok(Self { weight: w, rule, inner })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn eval(&self, z: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.inner.eval(&z).map_err(py_err)
    }

    fn eval_weighted(&self, z: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.inner.eval_weighted(&z).map_err(py_err)
    }

    fn gram_residual(&self) -> PyResult<f64> {
        gram_residual(&self.inner, &self.rule.refined()).map_err(py_err)
    }

    fn bergman_function(&self, z: Vec<Complex64>) -> PyResult<f64> {
        bergman_function(&self.inner, &z).map_err(py_err)
    }

    fn bergman_mass(&self) -> PyResult<f64> {
        bergman_mass(&self.inner, &self.rule).map_err(py_err)
    }

    fn scaled_l1_error(&self) -> PyResult<f64> {
        let eq = reference_equilibrium(&self.weight).map_err(py_err)?;
        scaled_l1_error(&self.inner, &eq).map_err(py_err)
    }

    /// Toeplitz matrix of a named symbol such as `"abs2"` or `"disk_indicator(0.9)"`.
    fn toeplitz(&self, symbol: &str) -> PyResult<PyToeplitz> {
        let g = Symbol::parse(symbol).map_err(py_err)?;
        Ok(PyToeplitz { inner: build_toeplitz(&self.inner, &g, &self.rule).map_err(py_err)? })
    }

    fn haar_rotate(&self, seed: u64) -> Self {
        Self { weight: self.weight.clone(), rule: self.rule.clone(), inner: haar_rotate(&self.inner, seed) }
    }

    /// Coefficients of one random polynomial in this basis.
    #[pyo3(signature = (law = "gaussian", field = "complex", seed = 0, trial = 0))]
    fn sample(&self, law: &str, field: &str, seed: u64, trial: u64) -> PyResult<Vec<Complex64>> {
        let s = spec(law, field)?;
        Ok(eqdist::ensemble::sample_polynomial_trial(&self.inner, &s, seed, trial).coeffs)
    }

    /// `(X^* A X, direct quadrature)` for the polynomial with coefficients `coeffs`.
    fn mass(&self, coeffs: Vec<Complex64>, symbol: &str) -> PyResult<(f64, f64)> {
        let f = RandomPolynomial::from_coeffs(&self.inner, coeffs).map_err(py_err)?;
        let g = Symbol::parse(symbol).map_err(py_err)?;
        let t = build_toeplitz(&self.inner, &g, &self.rule).map_err(py_err)?;
        let m = mass_statistic(&f, &self.inner, &g, &t, &self.rule).map_err(py_err)?;
        Ok((m.quadratic, m.quadrature))
    }

    fn roots(&self, coeffs: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        let f = RandomPolynomial::from_coeffs(&self.inner, coeffs).map_err(py_err)?;
        Ok(zeros::roots(&f, &self.inner).map_err(py_err)?.roots)
    }

    /// Exceedance statistics of `X / d_n` around `int g dmu_e`.
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (symbol, law, field, trials, eps, seed))]
    fn concentration<'py>(
        &self,
        py: Python<'py>,
        symbol: &str,
        law: &str,
        field: &str,
        trials: usize,
        eps: f64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let g = Symbol::parse(symbol).map_err(py_err)?;
        let eq = reference_equilibrium(&self.weight).map_err(py_err)?;
        let reference = g.equilibrium_moment(&eq, 1).map_err(py_err)?;
        let t = build_toeplitz(&self.inner, &g, &self.rule).map_err(py_err)?;
        let r = concentration_experiment(&self.inner, &t, &spec(law, field)?, trials, eps, seed, reference).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("reference", r.reference)?;
        d.set_item("mean", r.mean)?;
        d.set_item("std_dev", r.std_dev)?;
        d.set_item("exceedance", r.exceedance)?;
        d.set_item("values", r.values)?;
        Ok(d)
    }
}

#[pyfunction]
#[pyo3(signature = (law, field, seed, count))]
fn sample(law: &str, field: &str, seed: u64, count: usize) -> PyResult<Vec<Complex64>> {
    Ok(randvar::sample(&spec(law, field)?, seed, count))
}

#[pyfunction]
fn psi2_norm(law: &str, field: &str) -> PyResult<f64> {
    randvar::psi2_norm(&spec(law, field)?).map_err(py_err)
}

/// Monte Carlo tail of `|X^* A X - E|` against the Hanson-Wright bound.
#[pyfunction]
#[pyo3(signature = (matrix_rows, law, field, trials, t_list, seed))]
fn hw_experiment<'py>(
    py: Python<'py>,
    matrix_rows: Vec<Vec<Complex64>>,
    law: &str,
    field: &str,
    trials: usize,
    t_list: Vec<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let a = matrix(matrix_rows)?;
    let r = randvar::hw_experiment(&a, "python", &spec(law, field)?, trials, &t_list, seed).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("thresholds", r.thresholds)?;
    d.set_item("empirical_tails", r.empirical_tails)?;
    d.set_item("bound_values", r.bound_values)?;
    d.set_item("fitted_c", r.fitted_c)?;
    d.set_item("psi2", r.psi2)?;
    d.set_item("op_norm", r.op_norm)?;
    d.set_item("hs_norm", r.hs_norm)?;
    Ok(d)
}

#[pyfunction]
fn radial_cdf_distance(roots: Vec<Complex64>, weight: &PyWeight) -> PyResult<f64> {
    zeros::radial_cdf_distance(&EmpiricalMeasure::new(roots), &weight.equilibrium()?).map_err(py_err)
}

#[pyfunction]
fn angular_uniformity(roots: Vec<Complex64>) -> PyResult<f64> {
    zeros::angular_uniformity(&EmpiricalMeasure::new(roots)).map_err(py_err)
}

#[pymodule]
fn eqdist_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWeight>()?;
    m.add_class::<PyBasis>()?;
    m.add_class::<PyToeplitz>()?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(psi2_norm, m)?)?;
    m.add_function(wrap_pyfunction!(hw_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(radial_cdf_distance, m)?)?;
    m.add_function(wrap_pyfunction!(angular_uniformity, m)?)?;
    Ok(())
}
