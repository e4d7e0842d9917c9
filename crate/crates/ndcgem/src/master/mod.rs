//! Stochastic unit-commitment master problem.
//!
//! Scenario 0 is the day-ahead forecast, scenarios `1..=n` the weighted
//! real-time wind outcomes. Commitment, gas contracts, booked GFU capacity
//! and gas-load curtailment are shared across scenarios.

mod dispatch;

use thiserror::Error;

use crate::model::Instance;
use crate::scenario::{ScenarioError, ScenarioSet};
use crate::solver::{
    Backend, LinearModel, LpSolution, MipOptions, MipSolution, MipStatus, RowId, Sense,
    SolverError, VarId,
};

pub(crate) use dispatch::{add_dispatch, Commitment};
pub use dispatch::DispatchVars;

/// Objective weight on booked capacity, $/kcf. Only breaks ties between
/// otherwise equal bookings so `x` sits at the largest scheduled burn.
pub const BOOKING_COST: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum MasterError {
    #[error("scenario set does not match the system: {0}")]
    Scenarios(#[from] ScenarioError),
    #[error("{0} has {1} entries, expected {2}")]
    Dimension(&'static str, usize, usize),
    #[error("cut refers to {0} index {1} out of range")]
    CutIndex(&'static str, usize),
    #[error("master problem is infeasible")]
    Infeasible,
    #[error("master problem is unbounded")]
    Unbounded,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarketMode {
    /// Electricity and gas cleared together.
    Coordinated,
    /// Electricity cleared against a copper-plate gas balance.
    Baseline,
}

impl std::fmt::Display for MarketMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MarketMode::Coordinated => "coordinated",
            MarketMode::Baseline => "baseline",
        })
    }
}

/// One term of a cut: `coef * (var - at)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutTerm {
    /// Unit index for booking terms, gas-load index for curtailment terms.
    pub index: usize,
    pub coef: f64,
    pub at: f64,
}

/// Linear feasibility cut from the gas sub-problem of one hour:
/// `g_star + sum(coef * (var - at)) <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityCut {
    pub hour: usize,
    pub iteration: usize,
    pub g_star: f64,
    pub booking: Vec<CutTerm>,
    pub curtailment: Vec<CutTerm>,
    /// Dual of the cut row in the last fixed-integer resolve, sign flipped
    /// so a binding cut has a nonnegative value.
    pub dual: f64,
}

impl FeasibilityCut {
    /// Left side at booked capacity `x[unit]` and curtailment `dl[load]`
    /// for the cut's hour.
    pub fn evaluate(&self, x: &[f64], dl: &[f64]) -> f64 {
        self.g_star
            + self
                .booking
                .iter()
                .map(|c| c.coef * (x[c.index] - c.at))
                .sum::<f64>()
            + self
                .curtailment
                .iter()
                .map(|c| c.coef * (dl[c.index] - c.at))
                .sum::<f64>()
    }

    fn rhs(&self) -> f64 {
        -self.g_star
            + self
                .booking
                .iter()
                .chain(&self.curtailment)
                .map(|c| c.coef * c.at)
                .sum::<f64>()
    }
}

/// Gas-side variables. The baseline has no curtailment or booking.
#[derive(Debug, Clone)]
pub struct GasVars {
    /// `[supplier][hour]`
    pub contract: Vec<Vec<VarId>>,
    /// `[load][hour]`, empty in the baseline.
    pub curtail: Vec<Vec<VarId>>,
    /// `[unit][hour]`, `None` for conventional units and in the baseline.
    pub booked: Vec<Option<Vec<VarId>>>,
    /// `[rt scenario][supplier][hour]`
    pub dev_pos: Vec<Vec<Vec<VarId>>>,
    pub dev_neg: Vec<Vec<Vec<VarId>>>,
    /// System gas balance `[scenario][hour]`, scenario 0 is DA.
    pub balance: Vec<Vec<RowId>>,
}

#[derive(Debug, Clone)]
pub struct MasterModel {
    pub mode: MarketMode,
    pub model: LinearModel,
    /// `[unit][hour]`
    pub v: Vec<Vec<VarId>>,
    pub vu: Vec<Vec<VarId>>,
    pub vd: Vec<Vec<VarId>>,
    /// Scenario 0 is DA.
    pub scenarios: Vec<DispatchVars>,
    /// Objective weight of each scenario's dispatch costs.
    pub weights: Vec<f64>,
    pub gas: GasVars,
    pub cut_rows: Vec<RowId>,
    /// Compressor gas draw assumed in the balances, per hour.
    pub compressor_gas: Vec<f64>,
}

/// Expected-cost components. `expected()` is the out-of-pocket cost
/// compared across modes; `total()` reproduces the model objective.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CostBreakdown {
    pub commitment: f64,
    pub fuel: f64,
    pub gas_purchase: f64,
    pub gas_curtailment: f64,
    pub deviation: f64,
    pub electric_shed: f64,
    /// DA-scenario share: its weighted dispatch cost plus the DA weight
    /// times the first-stage costs.
    pub da_scenario: f64,
    pub booking: f64,
}

impl CostBreakdown {
    pub fn expected(&self) -> f64 {
        self.commitment
            + self.fuel
            + self.gas_purchase
            + self.gas_curtailment
            + self.deviation
            + self.electric_shed
    }

    pub fn total(&self) -> f64 {
        self.expected() + self.da_scenario + self.booking
    }
}

/// Decoded values of one dispatch block, `[entity][hour]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDispatch {
    pub p: Vec<Vec<f64>>,
    /// Fuel cost for conventional units, gas burn for GFUs.
    pub fuel: Vec<Vec<f64>>,
    pub wind: Vec<Vec<f64>>,
    pub shed: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub mode: MarketMode,
    pub status: MipStatus,
    pub objective: f64,
    pub bound: f64,
    /// `[unit][hour]`
    pub on: Vec<Vec<bool>>,
    pub startup: Vec<Vec<bool>>,
    pub shutdown: Vec<Vec<bool>>,
    /// Scenario 0 is DA.
    pub dispatch: Vec<ScenarioDispatch>,
    /// Booked gas capacity `[unit][hour]`; zero for conventional units.
    /// In baseline mode, the largest scheduled burn over all scenarios.
    pub booked: Vec<Vec<f64>>,
    /// DA gas contracts `[supplier][hour]`.
    pub contracts: Vec<Vec<f64>>,
    /// DA gas-load curtailment `[load][hour]`.
    pub curtailment: Vec<Vec<f64>>,
    /// RT supply deviations `[rt scenario][supplier][hour]`.
    pub dev_pos: Vec<Vec<Vec<f64>>>,
    pub dev_neg: Vec<Vec<Vec<f64>>>,
    pub costs: CostBreakdown,
    /// Raw column values, for fixing the integers and re-solving.
    pub values: Vec<f64>,
}

fn check_len(what: &'static str, got: usize, want: usize) -> Result<(), MasterError> {
    if got == want {
        Ok(())
    } else {
        Err(MasterError::Dimension(what, got, want))
    }
}

/// Commitment variables and constraints, shared by both modes.
fn add_commitment(
    m: &mut LinearModel,
    inst: &Instance,
) -> (Vec<Vec<VarId>>, Vec<Vec<VarId>>, Vec<Vec<VarId>>) {
    let sys = &inst.sys;
    let nt = sys.horizon;
    let first = 1.0 + sys.economics.da_weight;
    let (mut v, mut vu, mut vd) = (Vec::new(), Vec::new(), Vec::new());
    for u in &sys.units {
        let vg: Vec<VarId> = (0..nt).map(|t| m.add_binary(format!("v[{},{t}]", u.id))).collect();
        let ug: Vec<VarId> = (0..nt).map(|t| m.add_binary(format!("vu[{},{t}]", u.id))).collect();
        let dg: Vec<VarId> = (0..nt).map(|t| m.add_binary(format!("vd[{},{t}]", u.id))).collect();
        let init = u.initial_state.on;
        let hours = u.initial_state.hours;
        for t in 0..nt {
            m.set_cost(ug[t], first * u.startup_cost);
            m.set_cost(dg[t], first * u.shutdown_cost);
            let mut row = vec![(vg[t], 1.0), (ug[t], -1.0), (dg[t], 1.0)];
            let rhs = if t == 0 {
                init as u8 as f64
            } else {
                row.push((vg[t - 1], -1.0));
                0.0
            };
            m.add_constraint(format!("state[{},{t}]", u.id), row, Sense::Eq, rhs);

            // A start within the last t_on hours keeps the unit on; a stop
            // within the last t_off hours keeps it off.
            let lo = (t + 1).saturating_sub(u.t_on.max(1) as usize);
            let mut row: Vec<(VarId, f64)> = (lo..=t).map(|k| (ug[k], 1.0)).collect();
            row.push((vg[t], -1.0));
            m.add_constraint(format!("minup[{},{t}]", u.id), row, Sense::Le, 0.0);
            let lo = (t + 1).saturating_sub(u.t_off.max(1) as usize);
            let mut row: Vec<(VarId, f64)> = (lo..=t).map(|k| (dg[k], 1.0)).collect();
            row.push((vg[t], 1.0));
            m.add_constraint(format!("mindn[{},{t}]", u.id), row, Sense::Le, 1.0);
        }
        // Carry-over of the minimum time already started before hour 0.
        let (need, value) = if init {
            (u.t_on.saturating_sub(hours), 1.0)
        } else {
            (u.t_off.saturating_sub(hours), 0.0)
        };
        for &var in vg.iter().take(need as usize) {
            m.set_bounds(var, value, value);
        }
        v.push(vg);
        vu.push(ug);
        vd.push(dg);
    }
    (v, vu, vd)
}

/// Adds one dispatch block per scenario; returns blocks and weights.
fn add_scenarios(
    m: &mut LinearModel,
    inst: &Instance,
    scen: &ScenarioSet,
    commit: &Commitment,
) -> (Vec<DispatchVars>, Vec<f64>) {
    let rho = inst.sys.economics.da_weight;
    let mut blocks = vec![add_dispatch(m, inst, "da", &scen.da_forecast, commit, rho)];
    let mut weights = vec![rho];
    for (w, s) in scen.rt.iter().enumerate() {
        let tag = format!("rt{w}");
        blocks.push(add_dispatch(m, inst, &tag, &s.profiles, commit, s.weight));
        weights.push(s.weight);
    }
    (blocks, weights)
}

fn validate_inputs(
    inst: &Instance,
    scen: &ScenarioSet,
    compressor_gas: &[f64],
) -> Result<(), MasterError> {
    scen.validate(&inst.sys)?;
    check_len("compressor gas estimate", compressor_gas.len(), inst.sys.horizon)
}

/// Builds the coordinated master with the given cuts. `compressor_gas` is
/// the per-hour compressor draw assumed in the gas balances.
pub fn build_master(
    inst: &Instance,
    scen: &ScenarioSet,
    cuts: &[FeasibilityCut],
    compressor_gas: &[f64],
) -> Result<MasterModel, MasterError> {
    build(inst, scen, cuts, compressor_gas, MarketMode::Coordinated)
}

/// Electricity-side master without the gas network: gas is bought from
/// the suppliers against a single copper-plate balance, so GFU burn is
/// priced at the supplier cost. No booking, curtailment or cuts.
pub fn baseline_master(
    inst: &Instance,
    scen: &ScenarioSet,
    compressor_gas: &[f64],
) -> Result<MasterModel, MasterError> {
    build(inst, scen, &[], compressor_gas, MarketMode::Baseline)
}

fn build(
    inst: &Instance,
    scen: &ScenarioSet,
    cuts: &[FeasibilityCut],
    compressor_gas: &[f64],
    mode: MarketMode,
) -> Result<MasterModel, MasterError> {
    validate_inputs(inst, scen, compressor_gas)?;
    let coordinated = mode == MarketMode::Coordinated;
    let sys = &inst.sys;
    let nt = sys.horizon;
    let econ = &sys.economics;
    // First-stage costs are paid in the DA scenario as well as in RT.
    let first = 1.0 + econ.da_weight;
    let mut m = LinearModel::new();
    let (v, vu, vd) = add_commitment(&mut m, inst);
    let commit = Commitment::Vars {
        v: &v,
        vu: &vu,
        vd: &vd,
    };
    let (blocks, weights) = add_scenarios(&mut m, inst, scen, &commit);

    let contract: Vec<Vec<VarId>> = sys
        .suppliers
        .iter()
        .map(|s| {
            (0..nt)
                .map(|t| {
                    let x = m.add_var(format!("s0[{},{t}]", s.id), 0.0, s.capacity);
                    m.set_cost(x, first * s.unit_cost);
                    x
                })
                .collect()
        })
        .collect();
    let curtail: Vec<Vec<VarId>> = if coordinated {
        sys.gas_loads
            .iter()
            .map(|l| {
                (0..nt)
                    .map(|t| {
                        let x = m.add_var(format!("dl[{},{t}]", l.id), 0.0, l.profile[t]);
                        m.set_cost(x, first * l.curtail_cost);
                        x
                    })
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    let booked: Vec<Option<Vec<VarId>>> = sys
        .units
        .iter()
        .map(|u| {
            (coordinated && u.is_gfu).then(|| {
                (0..nt)
                    .map(|t| {
                        let x = m.add_var(format!("x[{},{t}]", u.id), 0.0, f64::INFINITY);
                        m.set_cost(x, BOOKING_COST);
                        x
                    })
                    .collect()
            })
        })
        .collect();

    let mut dev_pos = Vec::new();
    let mut dev_neg = Vec::new();
    for (w, s) in scen.rt.iter().enumerate() {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (j, sup) in sys.suppliers.iter().enumerate() {
            let mut pj = Vec::new();
            let mut nj = Vec::new();
            for t in 0..nt {
                let up = m.add_var(format!("dsp[rt{w},{},{t}]", sup.id), 0.0, sup.capacity);
                let dn = m.add_var(format!("dsn[rt{w},{},{t}]", sup.id), 0.0, sup.capacity);
                m.set_cost(up, s.weight * (econ.dev_penalty_pos + sup.unit_cost));
                m.set_cost(dn, s.weight * (econ.dev_penalty_neg - sup.unit_cost));
                m.add_range(
                    format!("supply[rt{w},{},{t}]", sup.id),
                    vec![(contract[j][t], 1.0), (up, 1.0), (dn, -1.0)],
                    0.0,
                    sup.capacity,
                );
                pj.push(up);
                nj.push(dn);
            }
            pos.push(pj);
            neg.push(nj);
        }
        dev_pos.push(pos);
        dev_neg.push(neg);
    }

    let mut balance = Vec::with_capacity(blocks.len());
    for (s, block) in blocks.iter().enumerate() {
        let tag = if s == 0 { "da".to_string() } else { format!("rt{}", s - 1) };
        let mut rows = Vec::with_capacity(nt);
        for t in 0..nt {
            for (g, b) in booked.iter().enumerate() {
                if let Some(b) = b {
                    m.add_constraint(
                        format!("book[{tag},{},{t}]", sys.units[g].id),
                        vec![(block.fuel[g][t], 1.0), (b[t], -1.0)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
            let mut row: Vec<(VarId, f64)> = Vec::new();
            for j in 0..sys.suppliers.len() {
                row.push((contract[j][t], 1.0));
                if s > 0 {
                    row.push((dev_pos[s - 1][j][t], 1.0));
                    row.push((dev_neg[s - 1][j][t], -1.0));
                }
            }
            for (g, u) in sys.units.iter().enumerate() {
                if u.is_gfu {
                    row.push((block.fuel[g][t], -1.0));
                }
            }
            for c in &curtail {
                row.push((c[t], 1.0));
            }
            let rhs = inst.gas_load_total(t) + compressor_gas[t];
            rows.push(m.add_constraint(format!("gbal[{tag},{t}]"), row, Sense::Eq, rhs));
        }
        balance.push(rows);
    }

    let mut cut_rows = Vec::with_capacity(cuts.len());
    for (i, cut) in cuts.iter().enumerate() {
        if cut.hour >= nt {
            return Err(MasterError::CutIndex("hour", cut.hour));
        }
        let mut row = Vec::new();
        for term in &cut.booking {
            match booked.get(term.index) {
                Some(Some(b)) => row.push((b[cut.hour], term.coef)),
                _ => return Err(MasterError::CutIndex("GFU", term.index)),
            }
        }
        for term in &cut.curtailment {
            match curtail.get(term.index) {
                Some(c) => row.push((c[cut.hour], term.coef)),
                None => return Err(MasterError::CutIndex("gas load", term.index)),
            }
        }
        cut_rows.push(m.add_constraint(format!("cut_{i}"), row, Sense::Le, cut.rhs()));
    }

    Ok(MasterModel {
        mode,
        model: m,
        v,
        vu,
        vd,
        scenarios: blocks,
        weights,
        gas: GasVars {
            contract,
            curtail,
            booked,
            dev_pos,
            dev_neg,
            balance,
        },
        cut_rows,
        compressor_gas: compressor_gas.to_vec(),
    })
}

fn values_of(x: &[f64], vars: &[Vec<VarId>]) -> Vec<Vec<f64>> {
    vars.iter()
        .map(|row| row.iter().map(|v| x[v.0]).collect())
        .collect()
}

fn bools_of(x: &[f64], vars: &[Vec<VarId>]) -> Vec<Vec<bool>> {
    vars.iter()
        .map(|row| row.iter().map(|v| x[v.0] > 0.5).collect())
        .collect()
}

impl MasterModel {
    pub fn horizon(&self) -> usize {
        self.v.first().map_or(0, |r| r.len())
    }

    /// Solves the MILP and decodes the schedule.
    pub fn solve(
        &self,
        inst: &Instance,
        backend: &dyn Backend,
        opts: &MipOptions,
    ) -> Result<MasterSolution, MasterError> {
        let mip = backend.solve_mip(&self.model, opts)?;
        match mip.status {
            MipStatus::Infeasible => Err(MasterError::Infeasible),
            MipStatus::Unbounded => Err(MasterError::Unbounded),
            _ => Ok(self.decode(inst, &mip)),
        }
    }

    /// Fixes the commitment of `sol` and re-solves the LP for duals.
    pub fn fixed_lp(
        &self,
        backend: &dyn Backend,
        sol: &MasterSolution,
    ) -> Result<LpSolution, MasterError> {
        let lp = backend.fix_and_resolve(&self.model, &sol.values)?;
        if !lp.is_optimal() {
            return Err(MasterError::Solver(SolverError::NumericalFailure(format!(
                "fixed-commitment resolve returned {:?}",
                lp.status
            ))));
        }
        Ok(lp)
    }

    /// Maps solver output back onto the schedule and recomputes the cost
    /// breakdown from primal values.
    pub fn decode(&self, inst: &Instance, mip: &MipSolution) -> MasterSolution {
        let sys = &inst.sys;
        let x = &mip.x;
        let nt = self.horizon();
        let rho = sys.economics.da_weight;
        let dispatch: Vec<ScenarioDispatch> = self
            .scenarios
            .iter()
            .map(|b| ScenarioDispatch {
                p: values_of(x, &b.p),
                fuel: values_of(x, &b.fuel),
                wind: values_of(x, &b.wind),
                shed: values_of(x, &b.shed),
            })
            .collect();

        let mut costs = CostBreakdown::default();
        for (g, u) in sys.units.iter().enumerate() {
            for t in 0..nt {
                costs.commitment +=
                    u.startup_cost * x[self.vu[g][t].0] + u.shutdown_cost * x[self.vd[g][t].0];
            }
        }
        // Dispatch cost of one scenario: conventional fuel and shed.
        let scenario_cost = |d: &ScenarioDispatch| -> (f64, f64) {
            let fuel: f64 = sys
                .units
                .iter()
                .zip(&d.fuel)
                .filter(|(u, _)| !u.is_gfu)
                .map(|(_, f)| f.iter().sum::<f64>())
                .sum();
            let shed: f64 = sys
                .buses
                .iter()
                .enumerate()
                .map(|(b, bus)| bus.voll * d.shed[b].iter().sum::<f64>())
                .sum();
            (fuel, shed)
        };

        let gas = &self.gas;
        let booked: Vec<Vec<f64>> = gas
            .booked
            .iter()
            .enumerate()
            .map(|(g, b)| match b {
                Some(b) => b.iter().map(|v| x[v.0]).collect(),
                None if sys.units[g].is_gfu => (0..nt)
                    .map(|t| dispatch.iter().map(|d| d.fuel[g][t]).fold(0.0, f64::max))
                    .collect(),
                None => vec![0.0; nt],
            })
            .collect();
        let contracts = values_of(x, &gas.contract);
        let curtailment = if gas.curtail.is_empty() {
            vec![vec![0.0; nt]; sys.gas_loads.len()]
        } else {
            values_of(x, &gas.curtail)
        };
        let dev_pos: Vec<Vec<Vec<f64>>> = gas.dev_pos.iter().map(|d| values_of(x, d)).collect();
        let dev_neg: Vec<Vec<Vec<f64>>> = gas.dev_neg.iter().map(|d| values_of(x, d)).collect();

        let (f, s) = scenario_cost(&dispatch[0]);
        costs.da_scenario = rho * (f + s);
        for (w, d) in dispatch.iter().enumerate().skip(1) {
            let wt = self.weights[w];
            let (f, s) = scenario_cost(d);
            costs.fuel += wt * f;
            costs.electric_shed += wt * s;
            for (j, sup) in sys.suppliers.iter().enumerate() {
                for t in 0..nt {
                    let up = dev_pos[w - 1][j][t];
                    let dn = dev_neg[w - 1][j][t];
                    costs.gas_purchase += wt * sup.unit_cost * (contracts[j][t] + up - dn);
                    costs.deviation += wt
                        * (sys.economics.dev_penalty_pos * up + sys.economics.dev_penalty_neg * dn);
                }
            }
        }
        for (d, load) in sys.gas_loads.iter().enumerate() {
            costs.gas_curtailment += load.curtail_cost * curtailment[d].iter().sum::<f64>();
        }
        let purchase: f64 = sys
            .suppliers
            .iter()
            .zip(&contracts)
            .map(|(sup, c)| sup.unit_cost * c.iter().sum::<f64>())
            .sum();
        costs.da_scenario += rho * (costs.commitment + purchase + costs.gas_curtailment);
        if self.mode == MarketMode::Coordinated {
            costs.booking = BOOKING_COST * booked.iter().flatten().sum::<f64>();
        }

        MasterSolution {
            mode: self.mode,
            status: mip.status,
            objective: mip.objective,
            bound: mip.bound,
            on: bools_of(x, &self.v),
            startup: bools_of(x, &self.vu),
            shutdown: bools_of(x, &self.vd),
            dispatch,
            booked,
            contracts,
            curtailment,
            dev_pos,
            dev_neg,
            costs,
            values: x.clone(),
        }
    }
}
