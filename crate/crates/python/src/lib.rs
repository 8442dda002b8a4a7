//! Python bindings: Young functions, weights, norms, operators, condition checks and
//! the experiment catalog.

use orlicz_morrey::conditions::{self, ConditionReport, SampleGrid};
use orlicz_morrey::experiments::{self, default_ball_family};
use orlicz_morrey::norms::{self, MorreyShape};
use orlicz_morrey::operators::{self, CZKernel};
use orlicz_morrey::params::Descriptor;
use orlicz_morrey::weights::{self, MassRule};
use orlicz_morrey::young::{self, TypeBound};
use orlicz_morrey::{Ball, Grid, GridFunction, Weight, YoungFunction};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Grid", module = "orlicz_morrey_py", frozen)]
pub struct PyGrid {
    inner: Grid,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (left = -8.0, right = 8.0, n_points = 8192))]
    fn new(left: f64, right: f64, n_points: usize) -> PyResult<Self> {
        Ok(PyGrid {
            inner: Grid::new(left, right, n_points).map_err(py_err)?,
        })
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.n_points()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }

    /// Sample locations (cell midpoints).
    fn points(&self) -> Vec<f64> {
        self.inner.points().collect()
    }

    fn __repr__(&self) -> String {
        format!("Grid({}, {}, {})", self.inner.left(), self.inner.right(), self.inner.n_points())
    }
}

#[pyclass(name = "Young", module = "orlicz_morrey_py", frozen)]
pub struct PyYoung {
    inner: YoungFunction,
}

#[pymethods]
impl PyYoung {
    /// From a descriptor such as `"power p=2"`, `"identity"`, `"powerlog p=2 a=1"`.
    #[new]
    fn new(descriptor: &str) -> PyResult<Self> {
        Ok(PyYoung {
            inner: YoungFunction::parse(descriptor).map_err(py_err)?,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    fn eval(&self, r: f64) -> PyResult<f64> {
        young::eval(&self.inner, r).map_err(py_err)
    }

    fn inverse(&self, s: f64) -> PyResult<f64> {
        young::inverse(&self.inner, s).map_err(py_err)
    }

    fn complement(&self) -> PyYoung {
        PyYoung {
            inner: young::complement(&self.inner),
        }
    }

    /// `(lower, upper)` dilation indices.
    fn indices(&self) -> (f64, f64) {
        let i = young::dilation_indices(&self.inner);
        (i.lower, i.upper)
    }

    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        let (lower, upper) = self.indices();
        d.set_item("delta2", young::check_delta2(&self.inner).holds)?;
        d.set_item("nabla2", young::check_nabla2(&self.inner).holds)?;
        d.set_item("lower_index", lower)?;
        d.set_item("upper_index", upper)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Young({})", self.inner.label())
    }
}

#[pyclass(name = "Weight", module = "orlicz_morrey_py", frozen)]
pub struct PyWeight {
    inner: Weight,
}

#[pymethods]
impl PyWeight {
    /// From a descriptor such as `"constant c=1"` or `"powerabs alpha=0.5"`.
    #[new]
    fn new(descriptor: &str) -> PyResult<Self> {
        Ok(PyWeight {
            inner: Weight::parse(descriptor).map_err(py_err)?,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    /// `w(B(center, radius))`, in closed form when `grid` is omitted.
    #[pyo3(signature = (center, radius, grid = None))]
    fn mass(&self, center: f64, radius: f64, grid: Option<PyRef<'_, PyGrid>>) -> PyResult<f64> {
        let ball = Ball::new(center, radius).map_err(py_err)?;
        let rule = match grid {
            Some(g) => MassRule::Quadrature(g.inner),
            None => MassRule::Exact,
        };
        weights::ball_mass(&self.inner, &ball, rule).map_err(py_err)
    }

    /// Estimated `A_p` constant over the default ball family of `grid`.
    fn ap_constant(&self, p: f64, grid: PyRef<'_, PyGrid>) -> PyResult<f64> {
        Ok(conditions::ap_report(&self.inner, p, &grid.inner).map_err(py_err)?.sup_constant)
    }

    fn __repr__(&self) -> String {
        format!("Weight({})", self.inner.label())
    }
}

fn sampled(grid: &PyGrid, values: Vec<f64>) -> PyResult<GridFunction> {
    GridFunction::new(grid.inner, values).map_err(py_err)
}

fn shape(text: &str, phi: &YoungFunction, w: &Weight) -> PyResult<MorreyShape> {
    let d = Descriptor::parse(text).map_err(py_err)?;
    MorreyShape::from_descriptor(&d, phi, w).map_err(py_err)
}

/// Luxemburg norm of sampled values; `weak=True` gives the weak Orlicz norm.
#[pyfunction]
#[pyo3(signature = (grid, values, young, weight, weak = false))]
fn orlicz_norm(grid: PyRef<'_, PyGrid>, values: Vec<f64>, young: PyRef<'_, PyYoung>, weight: PyRef<'_, PyWeight>, weak: bool) -> PyResult<f64> {
    let f = sampled(&grid, values)?;
    let r = if weak {
        norms::weak_norm(&f, &young.inner, &weight.inner, None)
    } else {
        norms::luxemburg_norm(&f, &young.inner, &weight.inner, None)
    };
    Ok(r.map_err(py_err)?.value)
}

/// Morrey norm over the default ball family; returns `(value, (center, radius))`.
#[pyfunction]
#[pyo3(signature = (grid, values, young, shape_descriptor, weight, weak = false))]
fn morrey_norm(
    grid: PyRef<'_, PyGrid>,
    values: Vec<f64>,
    young: PyRef<'_, PyYoung>,
    shape_descriptor: &str,
    weight: PyRef<'_, PyWeight>,
    weak: bool,
) -> PyResult<(f64, Option<(f64, f64)>)> {
    let f = sampled(&grid, values)?;
    let s = shape(shape_descriptor, &young.inner, &weight.inner)?;
    let balls = default_ball_family(&grid.inner);
    let r = norms::morrey_norm(&f, &young.inner, &s, &weight.inner, &balls, weak).map_err(py_err)?;
    Ok((r.value, r.achieved_ball.map(|b| (b.center, b.radius))))
}

/// Discrete principal-value Hilbert transform (or another kernel by name).
#[pyfunction]
#[pyo3(signature = (grid, values, kernel = "hilbert"))]
fn apply_cz(grid: PyRef<'_, PyGrid>, values: Vec<f64>, kernel: &str) -> PyResult<Vec<f64>> {
    let k = CZKernel::parse(kernel).map_err(py_err)?;
    Ok(operators::apply_cz(&k, &sampled(&grid, values)?).into_values())
}

/// Centered maximal function over the default radii.
#[pyfunction]
fn maximal(grid: PyRef<'_, PyGrid>, values: Vec<f64>) -> PyResult<Vec<f64>> {
    let radii = operators::default_maximal_radii(&grid.inner);
    Ok(operators::maximal(&sampled(&grid, values)?, &radii).map_err(py_err)?.into_values())
}

/// `b H f - H(b f)`.
#[pyfunction]
fn commutator(grid: PyRef<'_, PyGrid>, b: Vec<f64>, values: Vec<f64>) -> PyResult<Vec<f64>> {
    let (b, f) = (sampled(&grid, b)?, sampled(&grid, values)?);
    Ok(operators::commutator(&CZKernel::hilbert(), &b, &f).map_err(py_err)?.into_values())
}

fn report_dict<'py>(py: Python<'py>, r: &ConditionReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("condition", &r.condition_name)?;
    d.set_item("verdict", r.verdict.to_string())?;
    d.set_item("holds", r.holds())?;
    d.set_item("constant", r.sup_constant)?;
    d.set_item("worst_point", (r.worst_point.x, r.worst_point.r))?;
    d.set_item("detail", &r.detail)?;
    Ok(d)
}

/// Runs a condition checker by name (`condmnec`, `es1`, `wgtcond`, `wgtcondcom`,
/// `supremal`, `integral-orlicz`, `gclass`, `delta2`, `nabla2`, `ap`, `lower-type`,
/// `upper-type`); `p` is used by the last three.
#[pyfunction]
#[pyo3(signature = (name, shape1 = "powerradius beta=0.5", shape2 = None, young = None, weight = None, p = None))]
fn check<'py>(
    py: Python<'py>,
    name: &str,
    shape1: &str,
    shape2: Option<&str>,
    young: Option<PyRef<'_, PyYoung>>,
    weight: Option<PyRef<'_, PyWeight>>,
    p: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let phi = young.map(|y| y.inner.clone()).unwrap_or(YoungFunction::Power { p: 2.0 });
    let w = weight.map(|w| w.inner.clone()).unwrap_or(Weight::Constant { c: 1.0 });
    let s1 = shape(shape1, &phi, &w)?;
    let s2 = shape(shape2.unwrap_or(shape1), &phi, &w)?;
    let samples = SampleGrid::default();
    let p_lower = p.unwrap_or_else(|| young::dilation_indices(&phi).lower);
    let r = match name {
        "condmnec" => conditions::check_pointwise_domination(&s1, &s2, &samples),
        "es1" => conditions::check_doubling_shift(&s1, &s2, &samples),
        "wgtcond" => conditions::check_integral_condition(&s1, &s2, &samples, false),
        "wgtcondcom" => conditions::check_integral_condition(&s1, &s2, &samples, true),
        "supremal" => conditions::check_supremal_condition(&phi, &s1, &s2, &samples),
        "integral-orlicz" => conditions::check_integral_condition_orlicz(&phi, &s1, &s2, &samples),
        "gclass" => conditions::check_g_class(&s1, &phi, &w, &samples),
        "delta2" => Ok(conditions::delta2_report(&phi)),
        "nabla2" => Ok(conditions::nabla2_report(&phi)),
        "ap" => conditions::ap_report(&w, p_lower, &Grid::default()),
        "lower-type" => conditions::type_report(&phi, p_lower, TypeBound::Lower),
        "upper-type" => {
            let p = p.unwrap_or_else(|| young::dilation_indices(&phi).upper);
            conditions::type_report(&phi, p, TypeBound::Upper)
        }
        other => return Err(PyValueError::new_err(format!("unknown condition `{other}`"))),
    }
    .map_err(py_err)?;
    report_dict(py, &r)
}

/// Names of the built-in experiments.
#[pyfunction]
fn catalog() -> Vec<String> {
    experiments::catalog(Grid::default(), 0).into_iter().map(|s| s.name).collect()
}

/// Runs a catalog experiment and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (name, n_points = 8192, seed = 42))]
fn run_experiment<'py>(py: Python<'py>, name: &str, n_points: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let grid = Grid::default().with_points(n_points).map_err(py_err)?;
    let spec = experiments::catalog(grid, seed)
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown experiment `{name}`")))?;
    let report = py.detach(|| experiments::run(&spec)).map_err(py_err)?;
    let text = serde_json::to_string(&report).map_err(py_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
fn orlicz_morrey_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyYoung>()?;
    m.add_class::<PyWeight>()?;
    m.add_function(wrap_pyfunction!(orlicz_norm, m)?)?;
    m.add_function(wrap_pyfunction!(morrey_norm, m)?)?;
    m.add_function(wrap_pyfunction!(apply_cz, m)?)?;
    m.add_function(wrap_pyfunction!(maximal, m)?)?;
    m.add_function(wrap_pyfunction!(commutator, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
