use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ndcgem::engine::{self, ClearingConfig, ClearingResult};
use ndcgem::gas;
use ndcgem::model::Instance;
use ndcgem::scenario::{self, ScenarioSet};
use ndcgem::solver::{HighsBackend, MipOptions};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A validated joint power and gas system.
#[pyclass(name = "System", module = "ndcgem_py", frozen)]
struct PySystem {
    inst: Arc<Instance>,
}

#[pymethods]
impl PySystem {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inst = Instance::load(path).map_err(value_err)?;
        Ok(Self {
            inst: Arc::new(inst),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let sys = ndcgem::model::JointSystem::from_json(text).map_err(value_err)?;
        let inst = Instance::new(sys).map_err(value_err)?;
        Ok(Self {
            inst: Arc::new(inst),
        })
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inst.horizon()
    }

    #[getter]
    fn units(&self) -> Vec<String> {
        self.inst.sys.units.iter().map(|u| u.id.clone()).collect()
    }

    #[getter]
    fn buses(&self) -> Vec<String> {
        self.inst.sys.buses.iter().map(|b| b.id.clone()).collect()
    }

    #[getter]
    fn gas_loads(&self) -> Vec<String> {
        self.inst.sys.gas_loads.iter().map(|l| l.id.clone()).collect()
    }

    /// Power transfer distribution factors, `[line][bus]`.
    fn ptdf(&self) -> Vec<Vec<f64>> {
        self.inst.ptdf.gamma.clone()
    }

    fn __repr__(&self) -> String {
        let s = &self.inst.sys;
        format!(
            "System(buses={}, units={}, gas_nodes={}, horizon={})",
            s.buses.len(),
            s.units.len(),
            s.gas_nodes.len(),
            s.horizon
        )
    }
}

/// DA wind forecast plus weighted RT scenarios.
#[pyclass(name = "ScenarioSet", module = "ndcgem_py", frozen)]
struct PyScenarioSet {
    inner: ScenarioSet,
}

#[pymethods]
impl PyScenarioSet {
    #[staticmethod]
    fn generate(system: &PySystem, n_samples: usize, n_reduced: usize, seed: u64) -> PyResult<Self> {
        let inner =
            ScenarioSet::generate(&system.inst.sys, n_samples, n_reduced, seed).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(system: &PySystem, text: &str) -> PyResult<Self> {
        let inner = ScenarioSet::from_json(text, &system.inst.sys).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self, system: &PySystem) -> String {
        self.inner.to_json(&system.inst.sys)
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.rt.iter().map(|s| s.weight).collect()
    }

    /// `[farm][hour]` forecast in MW.
    #[getter]
    fn da_forecast(&self) -> Vec<Vec<f64>> {
        self.inner.da_forecast.clone()
    }

    /// `[scenario][farm][hour]` availability in MW.
    #[getter]
    fn profiles(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.rt.iter().map(|s| s.profiles.clone()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.rt.len()
    }
}

/// Outcome of one market clearing.
#[pyclass(name = "ClearingResult", module = "ndcgem_py", frozen)]
struct PyClearingResult {
    inner: ClearingResult,
}

#[pymethods]
impl PyClearingResult {
    #[getter]
    fn mode(&self) -> String {
        self.inner.mode.to_string()
    }

    #[getter]
    fn expected_cost(&self) -> f64 {
        self.inner.expected_cost
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.master.objective
    }

    /// `(iteration, subproblem_iters, unsatisfied_kcf_per_h, cuts_added)`.
    #[getter]
    fn iterations(&self) -> Vec<(usize, usize, f64, usize)> {
        self.inner
            .iterations
            .iter()
            .map(|l| (l.iteration, l.subproblem_iters, l.unsatisfied, l.cuts_added))
            .collect()
    }

    #[getter]
    fn n_cuts(&self) -> usize {
        self.inner.cuts.len()
    }

    #[getter]
    fn unsatisfied(&self) -> f64 {
        self.inner.unsatisfied()
    }

    /// `[unit][hour]` commitment.
    #[getter]
    fn on(&self) -> Vec<Vec<bool>> {
        self.inner.master.on.clone()
    }

    /// `[unit][hour]` DA dispatch in MW.
    #[getter]
    fn dispatch(&self) -> Vec<Vec<f64>> {
        self.inner.master.dispatch[0].p.clone()
    }

    /// `[unit][hour]` booked gas capacity in kcf/h.
    #[getter]
    fn booked(&self) -> Vec<Vec<f64>> {
        self.inner.master.booked.clone()
    }

    /// `[load][hour]` gas-load curtailment in kcf/h.
    #[getter]
    fn curtailment(&self) -> Vec<Vec<f64>> {
        self.inner.total_curtailment()
    }

    /// `[bus][hour]` in $/MWh.
    #[getter]
    fn lmep(&self) -> Vec<Vec<f64>> {
        self.inner.prices.lmep.clone()
    }

    /// `[hour]` in $/kcf.
    #[getter]
    fn gas_price(&self) -> Vec<f64> {
        self.inner.prices.gas_price.clone()
    }

    /// `[unit][hour]` in $/kcf, or `None` for the baseline.
    #[getter]
    fn capacity_price(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.prices.capacity_price.clone()
    }

    #[getter]
    fn zeta(&self) -> Vec<Vec<f64>> {
        self.inner.zeta.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "ClearingResult(mode={}, expected_cost={:.6e}, iterations={}, cuts={})",
            self.inner.mode,
            self.inner.expected_cost,
            self.inner.iterations.len(),
            self.inner.cuts.len()
        )
    }
}

/// Clears the DA market in `"coordinated"` or `"baseline"` mode.
#[pyfunction]
#[pyo3(signature = (system, scenarios, mode = "coordinated", mip_gap = 1e-4))]
fn clear(
    py: Python<'_>,
    system: &PySystem,
    scenarios: &PyScenarioSet,
    mode: &str,
    mip_gap: f64,
) -> PyResult<PyClearingResult> {
    if !(mip_gap > 0.0 && mip_gap < 1.0) {
        return Err(PyValueError::new_err("mip_gap must lie in (0, 1)"));
    }
    let cfg = ClearingConfig {
        mip: MipOptions {
            rel_gap: mip_gap,
            ..MipOptions::default()
        },
        ..ClearingConfig::default()
    };
    let inst = Arc::clone(&system.inst);
    let scen = scenarios.inner.clone();
    let coordinated = match mode {
        "coordinated" => true,
        "baseline" => false,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let res = py.detach(move || {
        let backend = HighsBackend::new();
        if coordinated {
            engine::clear(&inst, &scen, &cfg, &backend)
        } else {
            engine::clear_baseline(&inst, &scen, &cfg, &backend)
        }
    });
    res.map(|inner| PyClearingResult { inner }).map_err(runtime_err)
}

/// Replays a cleared schedule against `n` wind draws. Returns
/// `(mean_cost, mean_lmep, failures)`.
#[pyfunction]
fn simulate_rt(
    py: Python<'_>,
    system: &PySystem,
    result: &PyClearingResult,
    n: usize,
    seed: u64,
) -> PyResult<(f64, Vec<f64>, usize)> {
    let inst = Arc::clone(&system.inst);
    let da = result.inner.clone();
    let rep = py
        .detach(move || engine::simulate_rt(&inst, &da, n, seed, &HighsBackend::new()))
        .map_err(runtime_err)?;
    Ok((rep.mean_cost, rep.mean_lmep, rep.failures))
}

/// Weymouth flow from `m` to `n` for pressures in psia.
#[pyfunction]
fn pipeline_flow(pi_m: f64, pi_n: f64, c: f64) -> f64 {
    gas::pipeline_flow(pi_m, pi_n, c)
}

/// Fast-forward selection; returns kept indices and their weights.
#[pyfunction]
fn fast_forward_reduce(
    samples: Vec<Vec<f64>>,
    weights: Vec<f64>,
    k: usize,
) -> PyResult<(Vec<usize>, Vec<f64>)> {
    let r = scenario::fast_forward_reduce(&samples, &weights, k).map_err(value_err)?;
    Ok((r.selected, r.weights))
}

#[pymodule]
fn ndcgem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_class::<PyScenarioSet>()?;
    m.add_class::<PyClearingResult>()?;
    m.add_function(wrap_pyfunction!(clear, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_rt, m)?)?;
    m.add_function(wrap_pyfunction!(pipeline_flow, m)?)?;
    m.add_function(wrap_pyfunction!(fast_forward_reduce, m)?)?;
    Ok(())
}
