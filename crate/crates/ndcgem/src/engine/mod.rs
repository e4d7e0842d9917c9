//! Benders loop between the master problem and the hourly gas checks,
//! the uncoordinated baseline, and real-time simulation.

mod prices;
mod rt;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::gas::{generate_cut, solve_subproblem, GasError, HourInput, SlpOptions, SubproblemResult};
use crate::master::{
    baseline_master, build_master, FeasibilityCut, MarketMode, MasterError, MasterModel,
    MasterSolution,
};
use crate::model::Instance;
use crate::scenario::{ScenarioError, ScenarioSet};
use crate::solver::{lpfile, Backend, MipOptions};

pub use prices::{extract_prices, marginal_gas_value, PriceResult};
pub use rt::{simulate_rt, RtDraw, RtReport};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Gas(#[from] GasError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("no convergence after {iterations} outer iterations; unsatisfied gas demand {unsatisfied:.6} kcf/h")]
    NotConverged { iterations: usize, unsatisfied: f64 },
    #[error("dual values missing: {0}")]
    MissingDuals(String),
}

#[derive(Debug, Clone, Copy)]
pub struct ClearingConfig {
    pub mip: MipOptions,
    pub slp: SlpOptions,
    pub max_outer: usize,
    /// A sub-problem with G* above this many dollars emits a cut.
    pub cut_threshold: f64,
    /// Lower bound on the value of gas to an online GFU, $/kcf.
    pub zeta_floor: f64,
    /// Change in the compressor draw estimate (kcf/h) that forces another
    /// pass even without cuts.
    pub compressor_tolerance: f64,
    /// Keep the LP text of every master solve.
    pub keep_lp: bool,
}

impl Default for ClearingConfig {
    fn default() -> Self {
        Self {
            mip: MipOptions::default(),
            slp: SlpOptions::default(),
            max_outer: 20,
            cut_threshold: 1e-6,
            zeta_floor: 1e-2,
            compressor_tolerance: 1e-3,
            keep_lp: false,
        }
    }
}

/// One row of the outer-iteration log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    pub subproblem_iters: usize,
    /// kcf/h summed over hours.
    pub unsatisfied: f64,
    pub cuts_added: usize,
    pub master_objective: f64,
}

/// Per-hour sub-problem diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasLogRow {
    pub iteration: usize,
    pub hour: usize,
    pub slp_iterations: usize,
    pub g_star: f64,
    pub unsatisfied: f64,
}

#[derive(Debug, Clone)]
pub struct ClearingResult {
    pub mode: MarketMode,
    pub master: MasterSolution,
    pub prices: PriceResult,
    /// `[unit][hour]`
    pub zeta: Vec<Vec<f64>>,
    pub cuts: Vec<FeasibilityCut>,
    pub iterations: Vec<IterationLog>,
    /// Gas checks of the final schedule, one per hour.
    pub gas: Vec<SubproblemResult>,
    pub gas_log: Vec<GasLogRow>,
    /// Compressor draw assumed in the final master, per hour.
    pub compressor_gas: Vec<f64>,
    pub expected_cost: f64,
    pub wall_time: Duration,
    /// `(name, CPLEX LP text)` of each master solve when requested.
    pub lp_dumps: Vec<(String, String)>,
}

impl ClearingResult {
    /// Gas the network can actually deliver to each GFU, `[unit][hour]`.
    pub fn delivered(&self) -> Vec<Vec<f64>> {
        let nu = self.master.booked.len();
        (0..nu)
            .map(|g| self.gas.iter().map(|r| r.delivered[g]).collect())
            .collect()
    }

    /// DA curtailment plus any the gas check adds, `[load][hour]`.
    pub fn total_curtailment(&self) -> Vec<Vec<f64>> {
        self.master
            .curtailment
            .iter()
            .enumerate()
            .map(|(d, row)| {
                row.iter()
                    .zip(&self.gas)
                    .map(|(c, r)| c + r.extra_curtailment[d])
                    .collect()
            })
            .collect()
    }

    /// Final unsatisfied gas demand, kcf/h summed over hours.
    pub fn unsatisfied(&self) -> f64 {
        self.gas.iter().map(|r| r.unsatisfied).sum()
    }
}

/// Runs every hourly gas check of a schedule in parallel.
fn check_gas(
    inst: &Instance,
    sol: &MasterSolution,
    zeta: &[Vec<f64>],
    backend: &dyn Backend,
    opts: &SlpOptions,
) -> Result<(Vec<SubproblemResult>, Vec<HourColumns>), EngineError> {
    let sys = &inst.sys;
    let cols: Vec<HourColumns> = (0..sys.horizon)
        .map(|t| HourColumns {
            booked: sol.booked.iter().map(|r| r[t]).collect(),
            curtailed: sol.curtailment.iter().map(|r| r[t]).collect(),
            contracts: sol.contracts.iter().map(|r| r[t]).collect(),
            zeta: zeta.iter().map(|r| r[t]).collect(),
        })
        .collect();
    let results: Result<Vec<_>, GasError> = cols
        .par_iter()
        .enumerate()
        .map(|(t, c)| solve_subproblem(inst, &c.input(t), backend, opts))
        .collect();
    Ok((results?, cols))
}

/// Owned per-hour slices of a schedule.
struct HourColumns {
    booked: Vec<f64>,
    curtailed: Vec<f64>,
    contracts: Vec<f64>,
    zeta: Vec<f64>,
}

impl HourColumns {
    fn input(&self, hour: usize) -> HourInput<'_> {
        HourInput {
            hour,
            booked: &self.booked,
            curtailed: &self.curtailed,
            contracts: &self.contracts,
            zeta: &self.zeta,
        }
    }
}

fn gas_rows(iteration: usize, results: &[SubproblemResult]) -> impl Iterator<Item = GasLogRow> + '_ {
    results.iter().map(move |r| GasLogRow {
        iteration,
        hour: r.hour,
        slp_iterations: r.iterations,
        g_star: r.g_star,
        unsatisfied: r.unsatisfied,
    })
}

struct Pass {
    mm: MasterModel,
    sol: MasterSolution,
    prices: PriceResult,
    zeta: Vec<Vec<f64>>,
}

fn solve_pass(
    inst: &Instance,
    mm: MasterModel,
    cuts: &[FeasibilityCut],
    backend: &dyn Backend,
    cfg: &ClearingConfig,
) -> Result<Pass, EngineError> {
    let sol = mm.solve(inst, backend, &cfg.mip)?;
    let lp = mm.fixed_lp(backend, &sol)?;
    let prices = extract_prices(&mm, &lp, inst, cuts)?;
    let zeta = marginal_gas_value(inst, &sol, &prices, cfg.zeta_floor);
    Ok(Pass {
        mm,
        sol,
        prices,
        zeta,
    })
}

/// Coordinated clearing: master solve, pricing, hourly gas checks and
/// cuts until every hour is deliverable.
pub fn clear(
    inst: &Instance,
    scen: &ScenarioSet,
    cfg: &ClearingConfig,
    backend: &dyn Backend,
) -> Result<ClearingResult, EngineError> {
    let start = Instant::now();
    let nt = inst.sys.horizon;
    let ix = &inst.sys.index;
    let mut cuts: Vec<FeasibilityCut> = Vec::new();
    let mut theta = vec![0.0; nt];
    let mut log = Vec::new();
    let mut gas_log = Vec::new();
    let mut lp_dumps = Vec::new();

    for it in 1..=cfg.max_outer {
        let mm = build_master(inst, scen, &cuts, &theta)?;
        if cfg.keep_lp {
            lp_dumps.push((format!("master_{it}"), lpfile::to_lp_string(&mm.model)));
        }
        let pass = solve_pass(inst, mm, &cuts, backend, cfg)?;
        let (results, cols) = check_gas(inst, &pass.sol, &pass.zeta, backend, &cfg.slp)?;
        gas_log.extend(gas_rows(it, &results));

        let mut new_cuts = Vec::new();
        for r in &results {
            if r.g_star > cfg.cut_threshold {
                let input = cols[r.hour].input(r.hour);
                if let Some(c) = generate_cut(r, &input, &ix.unit_gas_node, &ix.load_node, it)? {
                    new_cuts.push(c);
                }
            }
        }
        let theta_new: Vec<f64> = results.iter().map(|r| r.compressor_gas()).collect();
        let drift = theta
            .iter()
            .zip(&theta_new)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let unsatisfied: f64 = results.iter().map(|r| r.unsatisfied).sum();
        log.push(IterationLog {
            iteration: it,
            subproblem_iters: results.iter().map(|r| r.iterations).sum(),
            unsatisfied,
            cuts_added: new_cuts.len(),
            master_objective: pass.sol.objective,
        });
        log::info!(
            "iteration {it}: objective {:.6e}, unsatisfied {unsatisfied:.6} kcf/h, {} cuts",
            pass.sol.objective,
            new_cuts.len()
        );

        if new_cuts.is_empty() && drift <= cfg.compressor_tolerance {
            for (c, &beta) in cuts.iter_mut().zip(&pass.prices.cut_duals) {
                c.dual = beta;
            }
            let expected_cost = pass.sol.costs.expected();
            return Ok(ClearingResult {
                mode: MarketMode::Coordinated,
                master: pass.sol,
                prices: pass.prices,
                zeta: pass.zeta,
                cuts,
                iterations: log,
                gas: results,
                gas_log,
                compressor_gas: pass.mm.compressor_gas,
                expected_cost,
                wall_time: start.elapsed(),
                lp_dumps,
            });
        }
        cuts.extend(new_cuts);
        theta = theta_new;
    }
    Err(EngineError::NotConverged {
        iterations: cfg.max_outer,
        unsatisfied: log.last().map_or(f64::NAN, |l| l.unsatisfied),
    })
}

/// Electricity-only clearing followed by one gas check of the resulting
/// schedule. The check's delivered capacity is what the GFUs can count on
/// in real time.
pub fn clear_baseline(
    inst: &Instance,
    scen: &ScenarioSet,
    cfg: &ClearingConfig,
    backend: &dyn Backend,
) -> Result<ClearingResult, EngineError> {
    let start = Instant::now();
    let theta = vec![0.0; inst.sys.horizon];
    let mm = baseline_master(inst, scen, &theta)?;
    let lp_dumps = if cfg.keep_lp {
        vec![("baseline".to_string(), lpfile::to_lp_string(&mm.model))]
    } else {
        Vec::new()
    };
    let pass = solve_pass(inst, mm, &[], backend, cfg)?;
    let (results, _) = check_gas(inst, &pass.sol, &pass.zeta, backend, &cfg.slp)?;
    let unsatisfied: f64 = results.iter().map(|r| r.unsatisfied).sum();
    let expected_cost = pass.sol.costs.expected();
    Ok(ClearingResult {
        mode: MarketMode::Baseline,
        iterations: vec![IterationLog {
            iteration: 1,
            subproblem_iters: results.iter().map(|r| r.iterations).sum(),
            unsatisfied,
            cuts_added: 0,
            master_objective: pass.sol.objective,
        }],
        gas_log: gas_rows(1, &results).collect(),
        master: pass.sol,
        prices: pass.prices,
        zeta: pass.zeta,
        cuts: Vec::new(),
        gas: results,
        compressor_gas: theta,
        expected_cost,
        wall_time: start.elapsed(),
        lp_dumps,
    })
}
