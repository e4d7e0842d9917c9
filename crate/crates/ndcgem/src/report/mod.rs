//! Run orchestration and CSV reports.

pub mod format;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{
    clear, clear_baseline, simulate_rt, ClearingConfig, ClearingResult, EngineError,
    IterationLog, RtReport,
};
use crate::master::MarketMode;
use crate::model::{Instance, ModelError};
use crate::scenario::{ScenarioError, ScenarioSet};
use crate::solver::{Backend, HighsBackend, MipOptions};

pub use format::{num, write_atomic};
use format::{opt, Table};

/// Curtailment below this is treated as zero in the reports, kcf/h.
const CURTAIL_EPS: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{mode} clearing: {source}")]
    Engine {
        mode: MarketMode,
        source: EngineError,
    },
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl ReportError {
    /// Process exit status: 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Generate {
        n_samples: usize,
        n_reduced: usize,
        seed: u64,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Coordinated,
    Baseline,
    Both,
}

impl RunMode {
    fn modes(self) -> &'static [MarketMode] {
        match self {
            RunMode::Coordinated => &[MarketMode::Coordinated],
            RunMode::Baseline => &[MarketMode::Baseline],
            RunMode::Both => &[MarketMode::Coordinated, MarketMode::Baseline],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RtSim {
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: PathBuf,
    pub scenarios: ScenarioSource,
    pub mode: RunMode,
    pub mip_gap: f64,
    pub rt_sim: Option<RtSim>,
    pub out_dir: PathBuf,
    pub debug_lp: bool,
    pub debug_gas: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ReportError> {
        let bad = |m: String| Err(ReportError::Config(m));
        if !(self.mip_gap > 0.0 && self.mip_gap < 1.0) {
            return bad(format!("mip gap must lie in (0, 1), got {}", self.mip_gap));
        }
        if !self.system.is_file() {
            return bad(format!("system file {} not found", self.system.display()));
        }
        match &self.scenarios {
            ScenarioSource::Generate {
                n_samples,
                n_reduced,
                ..
            } => {
                if *n_reduced == 0 || n_reduced > n_samples {
                    return bad(format!(
                        "cannot reduce {n_samples} samples to {n_reduced} scenarios"
                    ));
                }
            }
            ScenarioSource::File(p) => {
                if !p.is_file() {
                    return bad(format!("scenario file {} not found", p.display()));
                }
            }
        }
        if let Some(rt) = &self.rt_sim {
            if rt.count == 0 {
                return bad("real-time simulation needs at least one draw".into());
            }
        }
        Ok(())
    }

    fn clearing(&self) -> ClearingConfig {
        ClearingConfig {
            mip: MipOptions {
                rel_gap: self.mip_gap,
                ..MipOptions::default()
            },
            keep_lp: self.debug_lp,
            ..ClearingConfig::default()
        }
    }
}

/// One cleared case with its optional real-time replay.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub result: ClearingResult,
    pub rt: Option<RtReport>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scenarios: ScenarioSet,
    pub cases: Vec<CaseResult>,
    pub files: Vec<PathBuf>,
}

/// Loads the inputs, clears every requested mode, optionally replays each
/// against fresh wind draws, and writes the reports.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, ReportError> {
    cfg.validate()?;
    let inst = Instance::load(&cfg.system)?;
    let scen = match &cfg.scenarios {
        ScenarioSource::Generate {
            n_samples,
            n_reduced,
            seed,
        } => ScenarioSet::generate(&inst.sys, *n_samples, *n_reduced, *seed)?,
        ScenarioSource::File(p) => ScenarioSet::load(p, &inst.sys)?,
    };
    let backend = HighsBackend::new();
    let ccfg = cfg.clearing();
    let mut cases = Vec::new();
    for &mode in cfg.mode.modes() {
        let result = run_case(&inst, &scen, &ccfg, &backend, mode)?;
        log::info!(
            "{mode}: expected cost {:.6e} after {} iterations in {:.1?}",
            result.expected_cost,
            result.iterations.len(),
            result.wall_time
        );
        let rt = match cfg.rt_sim {
            Some(sim) => Some(
                simulate_rt(&inst, &result, sim.count, sim.seed, &backend)
                    .map_err(|source| ReportError::Engine { mode, source })?,
            ),
            None => None,
        };
        cases.push(CaseResult { result, rt });
    }
    let files = write_reports(&inst, &scen, &cases, cfg)?;
    Ok(RunOutput {
        scenarios: scen,
        cases,
        files,
    })
}

fn run_case(
    inst: &Instance,
    scen: &ScenarioSet,
    cfg: &ClearingConfig,
    backend: &dyn Backend,
    mode: MarketMode,
) -> Result<ClearingResult, ReportError> {
    let r = match mode {
        MarketMode::Coordinated => clear(inst, scen, cfg, backend),
        MarketMode::Baseline => clear_baseline(inst, scen, cfg, backend),
    };
    r.map_err(|source| ReportError::Engine { mode, source })
}

struct Writer {
    files: Vec<PathBuf>,
}

impl Writer {
    fn put(&mut self, dir: &Path, name: &str, bytes: Vec<u8>) -> Result<(), ReportError> {
        let path = dir.join(name);
        write_atomic(&path, &bytes).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }

    fn mkdir(&self, dir: &Path) -> Result<(), ReportError> {
        fs::create_dir_all(dir).map_err(|source| ReportError::Io {
            path: dir.display().to_string(),
            source,
        })
    }
}

/// Writes every report for the cleared cases. With one case its files go
/// straight into the output directory; with both, each case gets a
/// subdirectory named after its mode and the comparison files stay on top.
pub fn write_reports(
    inst: &Instance,
    scen: &ScenarioSet,
    cases: &[CaseResult],
    cfg: &RunConfig,
) -> Result<Vec<PathBuf>, ReportError> {
    let mut w = Writer { files: Vec::new() };
    let root = &cfg.out_dir;
    w.mkdir(root)?;
    w.put(root, "scenarios.csv", scenarios_csv(inst, scen))?;
    for case in cases {
        let res = &case.result;
        let dir = if cases.len() > 1 {
            root.join(res.mode.to_string())
        } else {
            root.clone()
        };
        w.mkdir(&dir)?;
        w.put(&dir, "schedule.csv", schedule_csv(inst, res))?;
        w.put(&dir, "prices.csv", prices_csv(inst, res))?;
        w.put(&dir, "curtailments.csv", curtailments_csv(inst, res))?;
        w.put(&dir, "iterations.csv", iterations_csv(&res.iterations))?;
        if res.mode == MarketMode::Coordinated {
            w.put(&dir, "cuts.csv", cuts_csv(inst, res))?;
        }
        if cfg.debug_gas {
            w.put(&dir, "gas_debug.csv", gas_debug_csv(res))?;
        }
        if cfg.debug_lp {
            let lp_dir = dir.join("lp");
            w.mkdir(&lp_dir)?;
            for (name, text) in &res.lp_dumps {
                w.put(&lp_dir, &format!("{name}.lp"), text.clone().into_bytes())?;
            }
        }
    }
    let coord = cases
        .iter()
        .find(|c| c.result.mode == MarketMode::Coordinated);
    let base = cases.iter().find(|c| c.result.mode == MarketMode::Baseline);
    if let Some(c) = coord {
        w.put(
            root,
            "booked_vs_demand.csv",
            booked_vs_demand_csv(inst, &c.result, base.map(|b| &b.result)),
        )?;
    }
    w.put(root, "rt_summary.csv", rt_summary_csv(cases))?;
    if cases.iter().any(|c| c.rt.is_some()) {
        w.put(root, "rt_lmep.csv", rt_lmep_csv(cases))?;
    }
    Ok(w.files)
}

pub fn scenarios_csv(inst: &Instance, scen: &ScenarioSet) -> Vec<u8> {
    let mut t = Table::new(&["scenario", "weight", "farm", "hour", "mw"]);
    let rho = inst.sys.economics.da_weight;
    let sets = std::iter::once(("da".to_string(), rho, &scen.da_forecast)).chain(
        scen.rt
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("rt{i}"), s.weight, &s.profiles)),
    );
    for (name, weight, profiles) in sets {
        for (farm, prof) in inst.sys.windfarms.iter().zip(profiles) {
            for (h, &v) in prof.iter().enumerate() {
                t.row([name.clone(), num(weight), farm.id.clone(), h.to_string(), num(v)]);
            }
        }
    }
    t.into_bytes()
}

/// DA commitment and dispatch with booked capacity `x` and DA gas burn `w`.
pub fn schedule_csv(inst: &Instance, res: &ClearingResult) -> Vec<u8> {
    let mut t = Table::new(&["unit", "hour", "on", "p_mw", "x_kcf", "w_kcf"]);
    let sol = &res.master;
    let da = &sol.dispatch[0];
    for (g, u) in inst.sys.units.iter().enumerate() {
        for h in 0..inst.horizon() {
            let w = if u.is_gfu { da.fuel[g][h] } else { 0.0 };
            t.row([
                u.id.clone(),
                h.to_string(),
                (sol.on[g][h] as u8).to_string(),
                num(da.p[g][h]),
                num(sol.booked[g][h]),
                num(w),
            ]);
        }
    }
    t.into_bytes()
}

/// Hourly prices per bus. The capacity price is that of the GFUs at the
/// bus (the largest if several), zero at buses without one; the column is
/// absent for the baseline.
pub fn prices_csv(inst: &Instance, res: &ClearingResult) -> Vec<u8> {
    let sys = &inst.sys;
    let p = &res.prices;
    let cap = p.capacity_price.as_ref();
    let mut header = vec!["hour", "bus", "lmep", "gas_price"];
    if cap.is_some() {
        header.push("gas_capacity_price");
    }
    let mut t = Table::new(&header);
    for h in 0..inst.horizon() {
        for (b, bus) in sys.buses.iter().enumerate() {
            let mut row = vec![h.to_string(), bus.id.clone(), num(p.lmep[b][h]), num(p.gas_price[h])];
            if let Some(cap) = cap {
                let c = sys
                    .units
                    .iter()
                    .enumerate()
                    .filter(|(g, u)| u.is_gfu && sys.index.unit_bus[*g] == b)
                    .map(|(g, _)| cap[g][h])
                    .fold(0.0, f64::max);
                row.push(num(c));
            }
            t.row(row);
        }
    }
    t.into_bytes()
}

/// Nonzero gas-load curtailment, DA plus any added by the final gas check.
pub fn curtailments_csv(inst: &Instance, res: &ClearingResult) -> Vec<u8> {
    let mut t = Table::new(&["gas_node", "load_id", "priority", "hour", "kcf_per_h"]);
    let total = res.total_curtailment();
    for (d, l) in inst.sys.gas_loads.iter().enumerate() {
        for (h, &v) in total[d].iter().enumerate() {
            if v > CURTAIL_EPS {
                t.row([l.node.clone(), l.id.clone(), l.priority.to_string(), h.to_string(), num(v)]);
            }
        }
    }
    t.into_bytes()
}

pub fn iterations_csv(log: &[IterationLog]) -> Vec<u8> {
    let mut t = Table::new(&[
        "iteration",
        "subproblem_iters",
        "unsatisfied_kcf_per_h",
        "cuts_added",
    ]);
    for l in log {
        t.row([
            l.iteration.to_string(),
            l.subproblem_iters.to_string(),
            num(l.unsatisfied),
            l.cuts_added.to_string(),
        ]);
    }
    t.into_bytes()
}

/// One row per cut term; `dual` is the cut's multiplier in the final
/// master.
pub fn cuts_csv(inst: &Instance, res: &ClearingResult) -> Vec<u8> {
    let sys = &inst.sys;
    let mut t = Table::new(&[
        "cut", "iteration", "hour", "g_star", "dual", "term", "id", "coef", "at",
    ]);
    for (k, c) in res.cuts.iter().enumerate() {
        let terms = c
            .booking
            .iter()
            .map(|x| ("booking", &sys.units[x.index].id, x))
            .chain(
                c.curtailment
                    .iter()
                    .map(|x| ("curtailment", &sys.gas_loads[x.index].id, x)),
            );
        for (kind, id, term) in terms {
            t.row([
                k.to_string(),
                c.iteration.to_string(),
                c.hour.to_string(),
                num(c.g_star),
                num(c.dual),
                kind.to_string(),
                id.clone(),
                num(term.coef),
                num(term.at),
            ]);
        }
    }
    t.into_bytes()
}

/// Booked GFU capacity against the largest burn over all scenarios of the
/// schedule cleared without the gas network (the coordinated schedule's
/// own scenarios when no baseline was run).
pub fn booked_vs_demand_csv(
    inst: &Instance,
    coord: &ClearingResult,
    base: Option<&ClearingResult>,
) -> Vec<u8> {
    let mut t = Table::new(&["unit", "hour", "booked_kcf", "max_demand_kcf"]);
    let reference = base.unwrap_or(coord);
    for (g, u) in inst.sys.units.iter().enumerate() {
        if !u.is_gfu {
            continue;
        }
        for h in 0..inst.horizon() {
            let max = reference
                .master
                .dispatch
                .iter()
                .map(|d| d.fuel[g][h])
                .fold(0.0, f64::max);
            t.row([u.id.clone(), h.to_string(), num(coord.master.booked[g][h]), num(max)]);
        }
    }
    t.into_bytes()
}

/// Expected DA cost and simulated real-time mean per case. The reduction
/// is the coordinated case's saving on the baseline's simulated cost, in
/// percent.
pub fn rt_summary_csv(cases: &[CaseResult]) -> Vec<u8> {
    let mut t = Table::new(&["case", "expected_cost", "simulated_mean_cost", "reduction_pct"]);
    let sim = |m: MarketMode| {
        cases
            .iter()
            .find(|c| c.result.mode == m)
            .and_then(|c| c.rt.as_ref())
            .map(|r| r.mean_cost)
    };
    for c in cases {
        let reduction = match (c.result.mode, sim(MarketMode::Coordinated), sim(MarketMode::Baseline)) {
            (MarketMode::Coordinated, Some(co), Some(ba)) if ba != 0.0 => {
                Some(100.0 * (ba - co) / ba)
            }
            _ => None,
        };
        t.row([
            c.result.mode.to_string(),
            num(c.result.expected_cost),
            opt(c.rt.as_ref().map(|r| r.mean_cost)),
            opt(reduction),
        ]);
    }
    t.into_bytes()
}

/// Mean system energy price over the simulated real-time days.
pub fn rt_lmep_csv(cases: &[CaseResult]) -> Vec<u8> {
    let mut t = Table::new(&["case", "hour", "mean_lmep"]);
    for c in cases {
        if let Some(rt) = &c.rt {
            for (h, &v) in rt.mean_lmep.iter().enumerate() {
                t.row([c.result.mode.to_string(), h.to_string(), num(v)]);
            }
        }
    }
    t.into_bytes()
}

pub fn gas_debug_csv(res: &ClearingResult) -> Vec<u8> {
    let mut t = Table::new(&[
        "iteration",
        "hour",
        "slp_iterations",
        "g_star",
        "unsatisfied_kcf_per_h",
    ]);
    for r in &res.gas_log {
        t.row([
            r.iteration.to_string(),
            r.hour.to_string(),
            r.slp_iterations.to_string(),
            num(r.g_star),
            num(r.unsatisfied),
        ]);
    }
    t.into_bytes()
}
