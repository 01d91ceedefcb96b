//! Python bindings: reference operators, interface fluxes, operation counts
//! and whole scenario runs.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use swe_esdg_core::dg::Mode;
use swe_esdg_core::physics::{PhysicsParams, State};
use swe_esdg_core::scenarios::{Scenario, ScenarioId};
use swe_esdg_core::{bench, fluxes, operators1d, SweError};

fn to_py(e: SweError) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// LGL nodes and weights for degree `n`.
#[pyfunction]
fn lgl(n: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    operators1d::lgl_nodes_weights(n).map_err(to_py)
}

/// Lagrange derivative matrix on the LGL nodes, as a list of rows.
#[pyfunction]
fn derivative_matrix(n: usize) -> PyResult<Vec<Vec<f64>>> {
    let (nodes, _) = operators1d::lgl_nodes_weights(n).map_err(to_py)?;
    let d = operators1d::derivative_matrix(&nodes);
    Ok(d.chunks(n + 1).map(|r| r.to_vec()).collect())
}

fn params(g: f64) -> PyResult<PhysicsParams> {
    let p = PhysicsParams::new(g);
    p.validate().map_err(to_py)?;
    Ok(p)
}

fn unit(nx: f64, ny: f64) -> PyResult<(f64, f64)> {
    swe_esdg_core::physics::check_unit((nx, ny)).map_err(to_py)?;
    Ok((nx, ny))
}

/// Entropy stable normal interface flux between states `(h, hu, hv)`.
#[pyfunction]
#[pyo3(signature = (wm, wp, bm, bp, nx, ny, g=9.81))]
fn es_flux(wm: State, wp: State, bm: f64, bp: f64, nx: f64, ny: f64, g: f64) -> PyResult<State> {
    Ok(fluxes::es_surface_flux_normal(&wm, &wp, bm, bp, unit(nx, ny)?, &params(g)?))
}

/// Closed-form mass component of [`es_flux`].
#[pyfunction]
#[pyo3(signature = (wm, wp, bm, bp, nx, ny, g=9.81))]
fn h_flux(wm: State, wp: State, bm: f64, bp: f64, nx: f64, ny: f64, g: f64) -> PyResult<f64> {
    Ok(fluxes::h_flux_compact(&wm, &wp, bm, bp, unit(nx, ny)?, &params(g)?))
}

/// Two-point flux evaluations and FLOPs of both volume kernels.
#[pyfunction]
fn count_ops<'py>(py: Python<'py>, n: usize, k: usize) -> PyResult<Bound<'py, PyDict>> {
    let c = bench::count_ops(n, k).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("dofs", c.dofs)?;
    d.set_item("evals_split", c.evals_split)?;
    d.set_item("evals_standard", c.evals_standard)?;
    d.set_item("flops_split", c.flops_split)?;
    d.set_item("flops_standard", c.flops_standard)?;
    Ok(d)
}

#[pyfunction]
fn scenarios() -> Vec<&'static str> {
    ScenarioId::ALL.iter().map(|s| s.name()).collect()
}

/// Runs a scenario to its final time and returns summary diagnostics.
#[pyfunction]
#[pyo3(signature = (name, n=None, kx=None, ky=None, t_final=None, standard=false, limiter=true))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    name: &str,
    n: Option<usize>,
    kx: Option<usize>,
    ky: Option<usize>,
    t_final: Option<f64>,
    standard: bool,
    limiter: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let id: ScenarioId = name.parse().map_err(to_py)?;
    let mut s = Scenario::new(id);
    if let Some(n) = n {
        s = s.with_degree(n);
    }
    let (kx, ky) = (kx.unwrap_or(s.kx), ky.unwrap_or(s.ky));
    s = s.with_elements(kx, ky);
    if let Some(t) = t_final {
        s.t_final = t;
    }
    let mode = if standard { Mode::Standard } else { Mode::EntropyStable };
    let mut sim = py
        .detach(|| -> swe_esdg_core::Result<_> {
            let mut sim = s.simulation(mode, limiter)?;
            sim.run(|_| Ok(()))?;
            Ok(sim)
        })
        .map_err(to_py)?;
    let first = sim.history[0];
    let last = *sim.history.last().expect("history is never empty");
    let d = PyDict::new(py);
    d.set_item("t", last.t)?;
    d.set_item("steps", last.step)?;
    d.set_item("mass0", first.mass)?;
    d.set_item("mass", last.mass)?;
    d.set_item("entropy0", first.entropy)?;
    d.set_item("entropy", last.entropy)?;
    d.set_item("min_h", sim.min_stage_h)?;
    let entropy: Vec<f64> = sim.history.iter().map(|r| r.entropy).collect();
    d.set_item("entropy_series", entropy)?;
    d.set_item("h", std::mem::take(&mut sim.w).iter().map(|w| w[0]).collect::<Vec<_>>())?;
    Ok(d)
}

#[pymodule]
fn swe_esdg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(lgl, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(es_flux, m)?)?;
    m.add_function(wrap_pyfunction!(h_flux, m)?)?;
    m.add_function(wrap_pyfunction!(count_ops, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
