mod common;

use common::criteria::{
    clear, clear_baseline, curtailment_order, curtailment_toy, load, perturbed_lmep, scenarios,
};
use ndcgem::engine::{simulate_rt, ClearingResult};
use ndcgem::model::Instance;
use ndcgem::scenario::ScenarioSet;
use ndcgem::solver::HighsBackend;

const TOL: f64 = 1e-6;

/// Checks a cleared schedule against the system data without going
/// through the model builder.
fn check_schedule(inst: &Instance, scen: &ScenarioSet, res: &ClearingResult) -> Result<(), String> {
    let sys = &inst.sys;
    let sol = &res.master;
    let nt = sys.horizon;

    for (g, u) in sys.units.iter().enumerate() {
        let on = &sol.on[g];
        // Minimum up and down times, counting the hours held before the horizon.
        let mut state = u.initial_state.on;
        let mut held = u.initial_state.hours as usize;
        for t in 0..nt {
            if on[t] != state {
                let need = if state { u.t_on } else { u.t_off } as usize;
                if held < need {
                    return Err(format!("{} switches at hour {t} after {held} h", u.id));
                }
                state = on[t];
                held = 0;
            }
            held += 1;
        }

        for (s, d) in sol.dispatch.iter().enumerate() {
            let p = &d.p[g];
            for t in 0..nt {
                let (lo, hi) = if on[t] { (u.p_min, u.p_max) } else { (0.0, 0.0) };
                if p[t] < lo - TOL || p[t] > hi + TOL {
                    return Err(format!("{} scenario {s} hour {t}: p {} outside [{lo}, {hi}]", u.id, p[t]));
                }
                if on[t] && u.is_gfu {
                    let need = u.curve().eval(p[t]);
                    if d.fuel[g][t] < need - 1e-6 * need.max(1.0) {
                        return Err(format!("{} hour {t}: burn {} below {need}", u.id, d.fuel[g][t]));
                    }
                    if d.fuel[g][t] > sol.booked[g][t] + 1e-6 * need.max(1.0) {
                        return Err(format!("{} hour {t}: burn above booking", u.id));
                    }
                }
            }
            for t in 0..nt - 1 {
                let step = p[t + 1] - p[t];
                let limit = match (on[t], on[t + 1]) {
                    (true, true) => u.ramp,
                    (false, true) => {
                        if p[t + 1] > u.p_min + TOL {
                            return Err(format!("{} starts above minimum at {}", u.id, t + 1));
                        }
                        continue;
                    }
                    (true, false) => {
                        if p[t] > u.p_min + TOL {
                            return Err(format!("{} stops from above minimum at {t}", u.id));
                        }
                        continue;
                    }
                    (false, false) => continue,
                };
                if step.abs() > limit + TOL {
                    return Err(format!("{} scenario {s} ramps {step} at {t}", u.id));
                }
            }
        }
    }

    for (s, d) in sol.dispatch.iter().enumerate() {
        let avail = if s == 0 {
            &scen.da_forecast
        } else {
            &scen.rt[s - 1].profiles
        };
        for t in 0..nt {
            let supply: f64 = d.p.iter().map(|r| r[t]).sum::<f64>()
                + d.wind.iter().map(|r| r[t]).sum::<f64>()
                + d.shed.iter().map(|r| r[t]).sum::<f64>();
            let load: f64 = sys.buses.iter().map(|b| b.load_profile[t]).sum();
            if (supply - load).abs() > 1e-6 * load.max(1.0) {
                return Err(format!("scenario {s} hour {t}: supply {supply} vs load {load}"));
            }
            for (k, r) in d.wind.iter().enumerate() {
                if r[t] < -TOL || r[t] > avail[k][t] + TOL {
                    return Err(format!("scenario {s} hour {t}: wind {} above {}", r[t], avail[k][t]));
                }
            }
        }
    }
    Ok(())
}

#[test]
fn uncongested_clears_in_one_pass() {
    let inst = load("toy-3bus.json");
    let scen = scenarios(&inst);
    let res = clear(&inst, &scen);
    assert_eq!(res.iterations.len(), 1);
    assert!(res.cuts.is_empty());
    assert!(res.unsatisfied() <= 1e-3);
    check_schedule(&inst, &scen, &res).unwrap();
    let cap = res.prices.capacity_price.as_ref().unwrap();
    assert!(cap.iter().flatten().all(|&c| c == 0.0));
}

#[test]
fn congested_loop_closes_the_gap() {
    let inst = load("toy-congested.json");
    let scen = scenarios(&inst);
    let res = clear(&inst, &scen);
    let log = &res.iterations;
    assert!(log.len() > 1 && log.len() <= 20);
    for w in log.windows(2) {
        assert!(w[1].unsatisfied < w[0].unsatisfied, "{log:?}");
        // More cuts can only raise the master optimum.
        assert!(w[1].master_objective >= w[0].master_objective * (1.0 - 1e-4), "{log:?}");
    }
    assert!(log.last().unwrap().unsatisfied <= 1e-3);
    assert_eq!(log.last().unwrap().cuts_added, 0);
    check_schedule(&inst, &scen, &res).unwrap();

    // Every cut cut off its own generating point and holds at the final
    // deliverable schedule.
    for c in &res.cuts {
        assert!(c.g_star > 0.0);
        let x: Vec<f64> = res.master.booked.iter().map(|r| r[c.hour]).collect();
        let dl: Vec<f64> = res.master.curtailment.iter().map(|r| r[c.hour]).collect();
        let at = c.evaluate(&x, &dl);
        assert!(at <= 1e-6 * c.g_star.max(1.0), "cut at hour {} evaluates to {at}", c.hour);
    }

    let base = clear_baseline(&inst, &scen);
    assert!(base.master.objective <= res.master.objective * (1.0 + 1e-4));
    assert!(base.unsatisfied() > 1.0);
    assert!(base.prices.capacity_price.is_none());
}

#[test]
fn lmep_lies_between_one_sided_load_derivatives() {
    // The gas-constrained toy has hours where the marginal unit sits on a
    // breakpoint, so only a subgradient test is exact there.
    let inst = load("toy-congested.json");
    let scen = scenarios(&inst);
    let res = clear(&inst, &scen);
    for t in [2usize, 12, 19] {
        for bus in 0..inst.sys.buses.len() {
            let up = perturbed_lmep(&inst, &scen, &res, bus, t, 1.0);
            let down = perturbed_lmep(&inst, &scen, &res, bus, t, -1.0);
            let lmep = res.prices.lmep[bus][t];
            assert!(
                down - 1e-4 <= lmep && lmep <= up + 1e-4,
                "bus {bus} hour {t}: {lmep} outside [{down}, {up}]"
            );
        }
    }
}

#[test]
fn low_priority_gas_is_curtailed_first() {
    let inst = curtailment_toy();
    let res = clear(&inst, &scenarios(&inst));
    let hours = curtailment_order(&inst, &res).unwrap();
    assert!(hours > 0);
}

#[test]
fn real_time_replay_is_seeded() {
    let inst = load("toy-congested.json");
    let scen = scenarios(&inst);
    let res = clear(&inst, &scen);
    let be = HighsBackend::new();
    let a = simulate_rt(&inst, &res, 30, 5, &be).unwrap();
    let b = simulate_rt(&inst, &res, 30, 5, &be).unwrap();
    assert_eq!(a.failures, 0);
    assert_eq!(a.mean_cost.to_bits(), b.mean_cost.to_bits());
    let c = simulate_rt(&inst, &res, 30, 6, &be).unwrap();
    assert_ne!(a.mean_cost, c.mean_cost);
    assert_eq!(a.mean_lmep.len(), inst.sys.horizon);
}
