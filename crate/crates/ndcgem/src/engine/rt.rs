use rayon::prelude::*;

use crate::master::{add_dispatch, Commitment, MarketMode};
use crate::model::Instance;
use crate::scenario::sample_system;
use crate::solver::{Backend, LinearModel, Sense};

use super::{ClearingResult, EngineError};

/// Outcome of one simulated real-time day.
#[derive(Debug, Clone, PartialEq)]
pub struct RtDraw {
    /// Total daily cost with the DA commitment and gas schedule fixed, $.
    pub cost: f64,
    pub shed_mwh: f64,
    /// Sum of supply deviations from the DA contracts, kcf.
    pub gas_deviation: f64,
    /// System energy price per hour, $/MWh.
    pub lmep: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RtReport {
    pub mode: MarketMode,
    /// One entry per draw; failures keep the solver message.
    pub draws: Vec<Result<RtDraw, String>>,
    /// Mean cost over the draws that solved.
    pub mean_cost: f64,
    pub mean_lmep: Vec<f64>,
    pub failures: usize,
}

/// Fixed part of a real-time day: commitment, gas caps and costs that do
/// not depend on the wind draw.
struct Frame {
    on: Vec<Vec<bool>>,
    cap: Vec<Vec<f64>>,
    served_gas: Vec<f64>,
    fixed_cost: f64,
    short_cost: f64,
}

fn frame(inst: &Instance, da: &ClearingResult) -> Frame {
    let sys = &inst.sys;
    let nt = sys.horizon;
    let sol = &da.master;
    let cap = match da.mode {
        MarketMode::Coordinated => sol.booked.clone(),
        MarketMode::Baseline => da.delivered(),
    };
    // A GFU whose gas cap cannot cover its minimum burn cannot stay online.
    let on: Vec<Vec<bool>> = sys
        .units
        .iter()
        .enumerate()
        .map(|(g, u)| {
            (0..nt)
                .map(|t| {
                    sol.on[g][t] && (!u.is_gfu || cap[g][t] + 1e-6 >= u.curve().eval(u.p_min))
                })
                .collect()
        })
        .collect();
    let curtail = da.total_curtailment();
    let served_gas = (0..nt)
        .map(|t| {
            sys.gas_loads
                .iter()
                .enumerate()
                .map(|(d, l)| (l.profile[t] - curtail[d][t]).max(0.0))
                .sum::<f64>()
                + da.gas[t].compressor_gas()
        })
        .collect();
    let mut fixed_cost = sol.costs.commitment;
    for (d, l) in sys.gas_loads.iter().enumerate() {
        fixed_cost += l.curtail_cost * curtail[d].iter().sum::<f64>();
    }
    for (j, s) in sys.suppliers.iter().enumerate() {
        fixed_cost += s.unit_cost * sol.contracts[j].iter().sum::<f64>();
    }
    let short_cost = 10.0
        * sys
            .gas_loads
            .iter()
            .map(|l| l.curtail_cost)
            .chain(sys.buses.iter().map(|b| b.voll))
            .fold(1.0, f64::max);
    Frame {
        on,
        cap,
        served_gas,
        fixed_cost,
        short_cost,
    }
}

fn simulate_day(
    inst: &Instance,
    da: &ClearingResult,
    fr: &Frame,
    wind: &[Vec<f64>],
    backend: &dyn Backend,
) -> Result<RtDraw, String> {
    let sys = &inst.sys;
    let econ = &sys.economics;
    let nt = sys.horizon;
    let mut m = LinearModel::new();
    let block = add_dispatch(&mut m, inst, "rt", wind, &Commitment::Fixed(&fr.on), 1.0);
    for (g, u) in sys.units.iter().enumerate() {
        if u.is_gfu {
            for t in 0..nt {
                m.set_bounds(block.fuel[g][t], 0.0, fr.cap[g][t].max(0.0));
            }
        }
    }
    let mut devs = Vec::new();
    for t in 0..nt {
        let mut row = Vec::new();
        let mut contracted = 0.0;
        for (j, s) in sys.suppliers.iter().enumerate() {
            let s0 = da.master.contracts[j][t];
            contracted += s0;
            let up = m.add_var(format!("dsp[{},{t}]", s.id), 0.0, s.capacity);
            let dn = m.add_var(format!("dsn[{},{t}]", s.id), 0.0, s.capacity);
            m.set_cost(up, s.unit_cost + econ.dev_penalty_pos);
            m.set_cost(dn, econ.dev_penalty_neg - s.unit_cost);
            m.add_range(
                format!("supply[{},{t}]", s.id),
                vec![(up, 1.0), (dn, -1.0)],
                -s0,
                s.capacity - s0,
            );
            row.push((up, 1.0));
            row.push((dn, -1.0));
            devs.push((up, dn));
        }
        let short = m.add_var(format!("gshort[{t}]"), 0.0, f64::INFINITY);
        m.set_cost(short, fr.short_cost);
        row.push((short, 1.0));
        for (g, u) in sys.units.iter().enumerate() {
            if u.is_gfu {
                row.push((block.fuel[g][t], -1.0));
            }
        }
        m.add_constraint(
            format!("gbal[{t}]"),
            row,
            Sense::Eq,
            fr.served_gas[t] - contracted,
        );
    }
    let lp = backend.solve_lp(&m).map_err(|e| e.to_string())?;
    if !lp.is_optimal() {
        return Err(format!("real-time LP returned {:?}", lp.status));
    }
    Ok(RtDraw {
        cost: lp.objective + fr.fixed_cost,
        shed_mwh: block.shed.iter().flatten().map(|v| lp.x[v.0]).sum(),
        gas_deviation: devs.iter().map(|&(u, d)| lp.x[u.0] + lp.x[d.0]).sum(),
        lmep: block.balance.iter().map(|r| lp.row_duals[r.0]).collect(),
    })
}

/// Replays the DA schedule against `n` fresh wind draws. Each day is an
/// LP with the commitment fixed and GFU burn capped by the gas the DA
/// schedule secured.
pub fn simulate_rt(
    inst: &Instance,
    da: &ClearingResult,
    n: usize,
    seed: u64,
    backend: &dyn Backend,
) -> Result<RtReport, EngineError> {
    let draws = sample_system(&inst.sys, n, seed)?;
    let fr = frame(inst, da);
    let results: Vec<Result<RtDraw, String>> = draws
        .par_iter()
        .map(|w| simulate_day(inst, da, &fr, w, backend))
        .collect();
    let ok: Vec<&RtDraw> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let failures = results.len() - ok.len();
    if failures > 0 {
        log::warn!("{failures} of {n} real-time draws failed");
    }
    let k = ok.len().max(1) as f64;
    let mean_cost = ok.iter().map(|d| d.cost).sum::<f64>() / k;
    let mean_lmep = (0..inst.sys.horizon)
        .map(|t| ok.iter().map(|d| d.lmep[t]).sum::<f64>() / k)
        .collect();
    Ok(RtReport {
        mode: da.mode,
        draws: results,
        mean_cost,
        mean_lmep,
        failures,
    })
}
