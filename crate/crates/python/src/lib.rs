//! Python bindings: nonlinearities, solvers, Barenblatt profiles, snapshot
//! files and the oscillation diagnostics.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sdpme_core::estimates::fast_geometric_bound;
use sdpme_core::io::render_table;
use sdpme_core::regularity::{
    compute_degiorgi_constants, default_theta, fit_holder_exponent, generate_iterative_scheme, oscillation,
    HolderMode, HolderStatus, DEFAULT_ETA,
};
use sdpme_core::{
    self as core, parse_config, Axis, BoundaryCondition, Cylinder, Field, Grid, SnapshotFile, SolverConfig,
};

create_exception!(sdpme, ValidationError, PyValueError);
create_exception!(sdpme, NumericalError, PyRuntimeError);

fn to_py(err: core::Error) -> PyErr {
    if err.is_numerical() {
        NumericalError::new_err(err.to_string())
    } else {
        ValidationError::new_err(err.to_string())
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn make_grid(lo: &[f64], hi: &[f64], cells: &[usize]) -> PyResult<Grid> {
    if lo.len() != hi.len() || lo.len() != cells.len() {
        return Err(ValidationError::new_err("lo, hi and cells must have equal lengths"));
    }
    let axes = (0..lo.len()).map(|k| Axis::new(lo[k], hi[k], cells[k])).collect::<core::Result<Vec<_>>>().py()?;
    Grid::new(axes).py()
}

fn grid_bounds(grid: &Grid) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let a = grid.axes();
    (a.iter().map(|x| x.lo).collect(), a.iter().map(|x| x.hi).collect(), a.iter().map(|x| x.cells).collect())
}

#[pyclass(name = "Nonlinearity", module = "sdpme", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNonlinearity(core::Nonlinearity);

#[pymethods]
impl PyNonlinearity {
    /// `phi(z) = z^m`.
    #[staticmethod]
    fn power_law(m: f64) -> PyResult<Self> {
        core::Nonlinearity::power_law(m).py().map(Self)
    }

    /// `phi(z) = int_0^z s^b / (1 - s)^a ds`.
    #[staticmethod]
    fn biofilm(a: f64, b: f64) -> PyResult<Self> {
        core::Nonlinearity::biofilm(a, b).py().map(Self)
    }

    /// Monotone interpolation through `(z, phi)` nodes starting at `(0, 0)`.
    #[staticmethod]
    fn tabulated(nodes: Vec<(f64, f64)>) -> PyResult<Self> {
        core::Nonlinearity::tabulated(nodes).py().map(Self)
    }

    fn with_scale(&self, scale: f64) -> PyResult<Self> {
        self.0.clone().with_scale(scale).py().map(Self)
    }

    fn phi(&self, z: f64) -> PyResult<f64> {
        self.0.phi(z).py()
    }

    fn phi_prime(&self, z: f64) -> PyResult<f64> {
        self.0.phi_prime(z).py()
    }

    /// Inverse of `phi`.
    fn beta(&self, v: f64) -> PyResult<f64> {
        self.0.beta(v).py()
    }

    #[getter]
    fn domain_cap(&self) -> f64 {
        self.0.domain_cap()
    }

    #[pyo3(signature = (eps = 0.5, mu = 0.01, samples = 64))]
    fn structural_constants(&self, eps: f64, mu: f64, samples: usize) -> PyResult<PyStructuralConstants> {
        core::fit_structural_constants(&self.0, eps, mu, samples).py().map(PyStructuralConstants)
    }

    /// `(name, passed, margin, detail)` for every hypothesis check.
    fn validate(&self, sc: &PyStructuralConstants) -> Vec<(String, bool, f64, String)> {
        core::validate_hypotheses(&self.0, &sc.0)
            .checks
            .into_iter()
            .map(|c| (c.name, c.passed, c.margin, c.detail))
            .collect()
    }
}

#[pyclass(name = "StructuralConstants", module = "sdpme", frozen)]
struct PyStructuralConstants(core::StructuralConstants);

#[pymethods]
impl PyStructuralConstants {
    #[getter]
    fn c1(&self) -> f64 {
        self.0.c1
    }
    #[getter]
    fn c2(&self) -> f64 {
        self.0.c2
    }
    #[getter]
    fn m(&self) -> f64 {
        self.0.m
    }
    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.lambda
    }
    #[getter]
    fn m_cap(&self) -> f64 {
        self.0.m_cap
    }
    #[getter]
    fn fit_residual(&self) -> f64 {
        self.0.fit_residual
    }

    /// Intrinsic-scaling constants for a reaction with `|f| <= l z^{-m0}`.
    #[pyo3(signature = (dim, l = 0.0, m0 = 0.0, c_struct = 1.0, n0 = 3, n_star = 3, theta = None, eta = DEFAULT_ETA))]
    #[allow(clippy::too_many_arguments)]
    fn degiorgi(
        &self,
        dim: usize,
        l: f64,
        m0: f64,
        c_struct: f64,
        n0: u32,
        n_star: u32,
        theta: Option<f64>,
        eta: f64,
    ) -> PyResult<PyDegiorgi> {
        let rt = if l == 0.0 {
            core::ReactionTerm::zero()
        } else {
            core::ReactionTerm::new(core::ReactionKind::SingularPower { coeff: l, exponent: m0 }, l, m0).py()?
        };
        let theta = theta.unwrap_or_else(|| default_theta(self.0.m));
        compute_degiorgi_constants(&self.0, &rt, dim, c_struct, n0, n_star, theta, eta).py().map(PyDegiorgi)
    }

    fn __repr__(&self) -> String {
        render_table(&self.0)
    }
}

#[pyclass(name = "DeGiorgiConstants", module = "sdpme", frozen)]
struct PyDegiorgi(core::DeGiorgiConstants);

#[pymethods]
impl PyDegiorgi {
    #[getter]
    fn nu0(&self) -> f64 {
        self.0.nu0
    }
    #[getter]
    fn eta0(&self) -> f64 {
        self.0.eta0
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }
    #[getter]
    fn r_max(&self) -> f64 {
        self.0.r_max
    }

    /// `(n, radius, omega)` of the nested sequence starting at `(r0, omega0)`.
    #[pyo3(signature = (r0, omega0, n_max, switch_at = None))]
    fn scheme(&self, r0: f64, omega0: f64, n_max: usize, switch_at: Option<usize>) -> PyResult<Vec<(usize, f64, f64)>> {
        let steps = generate_iterative_scheme(r0, omega0, &self.0, n_max, switch_at).py()?;
        Ok(steps.iter().map(|s| (s.n, s.radius, s.omega)).collect())
    }

    fn __repr__(&self) -> String {
        render_table(&self.0)
    }
}

#[pyclass(name = "Reaction", module = "sdpme", frozen, from_py_object)]
#[derive(Clone)]
struct PyReaction(core::ReactionTerm);

#[pymethods]
impl PyReaction {
    #[staticmethod]
    fn zero() -> Self {
        Self(core::ReactionTerm::zero())
    }

    /// `f = g u`.
    #[staticmethod]
    fn linear(g: f64) -> PyResult<Self> {
        core::ReactionTerm::linear(g).py().map(Self)
    }

    /// Monod uptake with unit nutrient.
    #[staticmethod]
    fn monod(k2: f64, k3: f64, k4: f64) -> PyResult<Self> {
        core::ReactionTerm::monod(k2, k3, k4).py().map(Self)
    }
}

#[pyclass(name = "Barenblatt", module = "sdpme", frozen)]
struct PyBarenblatt(core::Barenblatt);

#[pymethods]
impl PyBarenblatt {
    #[new]
    #[pyo3(signature = (m, mass, dim = 1))]
    fn new(m: f64, mass: f64, dim: usize) -> PyResult<Self> {
        core::Barenblatt::new(m, mass, dim).py().map(Self)
    }

    /// The profile whose maximum is `peak` at time `t`.
    #[staticmethod]
    #[pyo3(signature = (m, peak, t, dim = 1))]
    fn with_peak(m: f64, peak: f64, t: f64, dim: usize) -> PyResult<Self> {
        core::Barenblatt::with_peak(m, peak, t, dim).py().map(Self)
    }

    fn value(&self, x: Vec<f64>, t: f64) -> PyResult<f64> {
        self.0.value(&x, t).py()
    }

    fn support_radius(&self, t: f64) -> f64 {
        self.0.support_radius(t)
    }

    fn peak(&self, t: f64) -> f64 {
        self.0.peak(t)
    }
}

#[pyclass(name = "Trajectory", module = "sdpme", frozen)]
struct PyTrajectory(core::Trajectory);

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times()
    }

    /// `(lo, hi, cells)` per axis.
    #[getter]
    fn grid(&self) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
        grid_bounds(self.0.grid())
    }

    /// Row-major cell values of snapshot `i` (negative indices count from the end).
    fn values(&self, i: isize) -> PyResult<Vec<f64>> {
        let n = self.0.snapshots().len() as isize;
        let k = if i < 0 { n + i } else { i };
        if !(0..n).contains(&k) {
            return Err(pyo3::exceptions::PyIndexError::new_err("snapshot index out of range"));
        }
        Ok(self.0.snapshots()[k as usize].field.values().to_vec())
    }

    fn masses(&self) -> Vec<f64> {
        self.0.snapshots().iter().map(|s| core::total_mass(&s.field)).collect()
    }

    fn __len__(&self) -> usize {
        self.0.snapshots().len()
    }

    /// `mu_minus`, `mu_plus`, `essosc` over the intrinsic cylinder.
    fn oscillation<'py>(
        &self,
        py: Python<'py>,
        center: Vec<f64>,
        t0: f64,
        radius: f64,
        omega: f64,
        m: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cyl = Cylinder::intrinsic(&center, t0, radius, omega, m).py()?;
        let o = oscillation(&self.0, &cyl).py()?;
        let d = PyDict::new(py);
        d.set_item("mu_minus", o.mu_minus)?;
        d.set_item("mu_plus", o.mu_plus)?;
        d.set_item("essosc", o.essosc)?;
        d.set_item("samples", o.sample_count)?;
        Ok(d)
    }

    /// Log-log fit of the oscillation over classical cylinders of the given radii.
    #[pyo3(signature = (center, t0, radii, theta = 1.0))]
    fn holder_exponent<'py>(
        &self,
        py: Python<'py>,
        center: Vec<f64>,
        t0: f64,
        radii: Vec<f64>,
        theta: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let r = fit_holder_exponent(&self.0, &center, t0, &radii, HolderMode::Classical { theta }).py()?;
        let d = PyDict::new(py);
        d.set_item("alpha", r.alpha_hat)?;
        d.set_item("c", r.c_hat)?;
        d.set_item("residual", r.fit_residual)?;
        d.set_item("oscillations", r.oscillations)?;
        d.set_item("flat", r.status == HolderStatus::Flat)?;
        Ok(d)
    }
}

/// Integrate `u_t = Δφ(u) + f(u)` with homogeneous Neumann data.
#[pyfunction]
#[pyo3(signature = (initial, lo, hi, cells, nonlinearity, dt, t_end, t_start = 0.0, reaction = None, snapshot_every = 1))]
#[allow(clippy::too_many_arguments)]
fn run_simulation(
    py: Python<'_>,
    initial: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cells: Vec<usize>,
    nonlinearity: &PyNonlinearity,
    dt: f64,
    t_end: f64,
    t_start: f64,
    reaction: Option<PyReaction>,
    snapshot_every: usize,
) -> PyResult<PyTrajectory> {
    let u0 = Field::new(make_grid(&lo, &hi, &cells)?, initial).py()?;
    let cfg = SolverConfig {
        dt,
        t_end,
        t_start,
        snapshot_every,
        bc: [BoundaryCondition::Neumann; 4],
        ..SolverConfig::default()
    };
    let rt = reaction.map(|r| r.0).unwrap_or_else(core::ReactionTerm::zero);
    let nl = nonlinearity.0.clone();
    py.detach(|| core::run_simulation(&u0, &nl, &rt, &cfg)).py().map(PyTrajectory)
}

/// Run the scalar equation, or the biomass of the coupled system, described
/// by a TOML document.
#[pyfunction]
fn run_config(py: Python<'_>, text: &str) -> PyResult<PyTrajectory> {
    let cfg = parse_config(text).py()?;
    py.detach(|| -> core::Result<core::Trajectory> {
        let solver = cfg.solver_config()?;
        match cfg.equation {
            core::io::Equation::Scalar => {
                core::run_simulation(&cfg.initial_field()?, &cfg.nonlinearity()?, &cfg.reaction_term()?, &solver)
            }
            core::io::Equation::Biofilm => {
                let m = cfg.initial_field()?;
                let c = Field::constant(m.grid().clone(), cfg.biofilm.nutrient);
                let state = core::BiofilmState::new(m, c, solver.t_start)?;
                let bc = cfg.biofilm.nutrient_bc.resolve()?;
                Ok(core::run_biofilm(&state, &cfg.biofilm.params(), &solver, &bc)?.biomass)
            }
        }
    })
    .py()
    .map(PyTrajectory)
}

#[pyfunction]
#[pyo3(signature = (path, values, lo, hi, cells, t = 0.0, name = "u"))]
fn write_snapshot(
    path: &str,
    values: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cells: Vec<usize>,
    t: f64,
    name: &str,
) -> PyResult<()> {
    let field = Field::new(make_grid(&lo, &hi, &cells)?, values).py()?;
    SnapshotFile::new(name, t, field).write(path).py()
}

/// `(name, t, values, lo, hi, cells)` stored in a snapshot file.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn read_snapshot(path: &str) -> PyResult<(String, f64, Vec<f64>, Vec<f64>, Vec<f64>, Vec<usize>)> {
    let s = SnapshotFile::read(path).py()?;
    let (lo, hi, cells) = grid_bounds(s.field.grid());
    Ok((s.name, s.t, s.field.into_values(), lo, hi, cells))
}

/// Sequence `y_{n+1} = c b^n y_n^{1+a}` and its geometric bound.
#[pyfunction]
fn geometric_bound(c: f64, b: f64, a: f64, y0: f64, n_max: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let g = fast_geometric_bound(c, b, a, y0, n_max).py()?;
    Ok((g.values, g.bounds))
}

#[pymodule]
fn sdpme(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNonlinearity>()?;
    m.add_class::<PyStructuralConstants>()?;
    m.add_class::<PyDegiorgi>()?;
    m.add_class::<PyReaction>()?;
    m.add_class::<PyBarenblatt>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(write_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(read_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_bound, m)?)?;
    m.add("ValidationError", m.py().get_type::<ValidationError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    Ok(())
}
