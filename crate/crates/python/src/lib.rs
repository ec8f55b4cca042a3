//! Python bindings. Reports come back as plain dicts and lists.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use stochpump::adiabatic::{analytic_current as analytic, Quadrature};
use stochpump::dynamics::{average_current as average, master_operator as master, SolverOptions};
use stochpump::io::{graph_to_json, parse_graph, parse_protocol, protocol_to_json};
use stochpump::params::{enumerate_top_cells, DEFAULT_CELL_CAP};
use stochpump::sweep::{sweep as run_sweep, Period, SweepOptions};
use stochpump::topo::{
    check_loop_robust as robust, ground_holonomy_probe as probe, topological_current as topological, TopoOptions,
    TwistConvention,
};
use stochpump::trees::{enumerate_spanning_trees, sigma_tree as sigma, DEFAULT_TREE_CAP};
use stochpump::{CycleBasis, DrivingLoop, Error, ParamPoint, TotalEdgeOrder};

create_exception!(stochpump_py, NonRobustError, PyException);
create_exception!(stochpump_py, NumericalError, PyException);

fn to_py(e: Error) -> PyErr {
    let message = e.to_string();
    match e {
        Error::NonRobust { .. } | Error::RefinementLimit { .. } | Error::AmbiguousGrouping { .. } => {
            NonRobustError::new_err(message)
        }
        Error::Overflow { .. }
        | Error::StepFailure { .. }
        | Error::NearSingularMonodromy { .. }
        | Error::Degenerate { .. }
        | Error::CountLimitExceeded { .. }
        | Error::NotConserved { .. }
        | Error::NotZeroSum { .. } => NumericalError::new_err(message),
        _ => PyValueError::new_err(message),
    }
}

/// Serializes through JSON into native Python objects.
fn to_object<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "Graph", frozen)]
struct PyGraph(stochpump::Graph);

#[pymethods]
impl PyGraph {
    #[new]
    fn new(vertices: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        if let Some((a, b)) = edges.iter().find(|(a, b)| a > b) {
            return Err(PyValueError::new_err(format!("edge ({a}, {b}) must list the smaller vertex first")));
        }
        stochpump::Graph::new(vertices, edges).map(PyGraph).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_graph(text).map(PyGraph).map_err(to_py)
    }

    fn to_json(&self) -> String {
        graph_to_json(&self.0)
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.0.vertex_count()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().to_vec()
    }

    fn betti_number(&self) -> usize {
        self.0.betti_number()
    }

    fn boundary(&self, chain: Vec<f64>) -> PyResult<Vec<f64>> {
        let v = self.0.boundary(&chain.into()).map_err(to_py)?;
        Ok(v.iter().copied().collect())
    }

    fn spanning_trees(&self) -> PyResult<Vec<Vec<usize>>> {
        let trees = enumerate_spanning_trees(&self.0, DEFAULT_TREE_CAP).map_err(to_py)?;
        Ok(trees.iter().map(|t| t.edges().to_vec()).collect())
    }

    /// The spanning tree keeping the lowest barriers of `w`.
    fn sigma_tree(&self, w: Vec<f64>) -> PyResult<Vec<usize>> {
        if w.len() != self.0.edge_count() {
            return Err(to_py(Error::DimensionMismatch {
                expected: self.0.edge_count(),
                got: w.len(),
            }));
        }
        Ok(sigma(&self.0, &TotalEdgeOrder::from_values(&w)).edges().to_vec())
    }

    fn cycle_basis(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_object(py, &CycleBasis::new(&self.0))
    }

    fn top_cells(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_object(py, &enumerate_top_cells(&self.0, DEFAULT_CELL_CAP).map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, edges={:?})", self.0.vertex_count(), self.0.edges())
    }
}

#[pyclass(name = "Protocol", frozen)]
struct PyProtocol(stochpump::Protocol);

#[pymethods]
impl PyProtocol {
    #[staticmethod]
    #[pyo3(signature = (text, graph=None))]
    fn from_json(text: &str, graph: Option<&PyGraph>) -> PyResult<Self> {
        parse_protocol(text, graph.map(|g| &g.0)).map(PyProtocol).map_err(to_py)
    }

    #[staticmethod]
    fn constant(e: Vec<f64>, w: Vec<f64>) -> Self {
        PyProtocol(stochpump::Protocol::constant(&ParamPoint { e, w }))
    }

    fn to_json(&self) -> String {
        protocol_to_json(&self.0)
    }

    /// `(E, W, dE/dt, dW/dt)` at `t`.
    #[allow(clippy::type_complexity)]
    fn evaluate(&self, t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let (p, dp) = self.0.evaluate(t);
        (p.e, p.w, dp.e, dp.w)
    }

    fn reversed(&self) -> Self {
        PyProtocol(self.0.reversed())
    }
}

#[pyfunction]
fn master_operator(g: &PyGraph, beta: f64, e: Vec<f64>, w: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let h = master(&g.0, beta, &ParamPoint { e, w }).map_err(to_py)?.matrix();
    Ok(h.row_iter().map(|r| r.iter().copied().collect()).collect())
}

#[pyfunction]
#[pyo3(signature = (g, protocol, beta, tau, tol=1e-8))]
fn average_current(py: Python<'_>, g: &PyGraph, protocol: &PyProtocol, beta: f64, tau: f64, tol: f64) -> PyResult<Py<PyAny>> {
    let opts = SolverOptions {
        tol,
        ..Default::default()
    };
    let r = py.detach(|| average(&g.0, &protocol.0, beta, tau, &opts)).map_err(to_py)?;
    to_object(py, &r)
}

#[pyfunction]
fn analytic_current(py: Python<'_>, g: &PyGraph, protocol: &PyProtocol, beta: f64) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| analytic(&g.0, &protocol.0, beta, &Quadrature::default())).map_err(to_py)?;
    to_object(py, &r)
}

fn topo_options(delta_e: f64, delta_w: f64, samples: usize) -> TopoOptions {
    TopoOptions {
        delta_e,
        delta_w,
        samples,
        ..Default::default()
    }
}

#[pyfunction]
#[pyo3(signature = (g, protocol, delta_e=1e-6, delta_w=1e-6, samples=1024))]
fn topological_current(
    py: Python<'_>,
    g: &PyGraph,
    protocol: &PyProtocol,
    delta_e: f64,
    delta_w: f64,
    samples: usize,
) -> PyResult<Py<PyAny>> {
    let r = topological(&g.0, &protocol.0, &topo_options(delta_e, delta_w, samples)).map_err(to_py)?;
    to_object(py, &r)
}

#[pyfunction]
#[pyo3(signature = (g, protocol, delta_e=1e-6, delta_w=1e-6, samples=1024))]
fn check_loop_robust(
    py: Python<'_>,
    g: &PyGraph,
    protocol: &PyProtocol,
    delta_e: f64,
    delta_w: f64,
    samples: usize,
) -> PyResult<Py<PyAny>> {
    to_object(py, &robust(&g.0, &protocol.0, &topo_options(delta_e, delta_w, samples)))
}

/// Sweep table as CSV; a period of `None` means the adiabatic limit.
#[pyfunction]
#[pyo3(signature = (g, protocol, betas, taus, tol=1e-8))]
fn sweep(py: Python<'_>, g: &PyGraph, protocol: &PyProtocol, betas: Vec<f64>, taus: Vec<Option<f64>>, tol: f64) -> PyResult<String> {
    let periods: Vec<Period> = taus.into_iter().map(|t| t.map_or(Period::Adiabatic, Period::Finite)).collect();
    let opts = SweepOptions {
        solver: SolverOptions {
            tol,
            ..Default::default()
        },
        ..Default::default()
    };
    let r = py.detach(|| run_sweep(&g.0, &protocol.0, &betas, &periods, &opts)).map_err(to_py)?;
    Ok(r.to_csv())
}

#[pyfunction]
#[pyo3(signature = (g, protocol, beta, generator=0, steps=64, magnetic=false))]
fn ground_holonomy_probe(
    py: Python<'_>,
    g: &PyGraph,
    protocol: &PyProtocol,
    beta: f64,
    generator: usize,
    steps: usize,
    magnetic: bool,
) -> PyResult<Py<PyAny>> {
    let conv = if magnetic { TwistConvention::Magnetic } else { TwistConvention::Literal };
    let r = py.detach(|| probe(&g.0, &protocol.0, beta, generator, steps, conv)).map_err(to_py)?;
    to_object(py, &r)
}

#[pymodule]
fn stochpump_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyProtocol>()?;
    m.add("NonRobustError", m.py().get_type::<NonRobustError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_function(wrap_pyfunction!(master_operator, m)?)?;
    m.add_function(wrap_pyfunction!(average_current, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_current, m)?)?;
    m.add_function(wrap_pyfunction!(topological_current, m)?)?;
    m.add_function(wrap_pyfunction!(check_loop_robust, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(ground_holonomy_probe, m)?)?;
    Ok(())
}
