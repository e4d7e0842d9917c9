//! Economic-dispatch block for one wind scenario over the whole horizon.
//! Shared by the master MILP and the real-time simulation LP.

use crate::model::Instance;
use crate::solver::{LinearModel, RowId, Sense, VarId};

/// Commitment seen by a dispatch block: decision variables in the master,
/// constants in real-time simulation.
pub(crate) enum Commitment<'a> {
    Vars {
        v: &'a [Vec<VarId>],
        vu: &'a [Vec<VarId>],
        vd: &'a [Vec<VarId>],
    },
    Fixed(&'a [Vec<bool>]),
}

/// A linear expression `sum(coeff * var) + constant`.
type Affine = (Vec<(VarId, f64)>, f64);

impl Commitment<'_> {
    fn on(&self, g: usize, t: usize) -> Affine {
        match self {
            Commitment::Vars { v, .. } => (vec![(v[g][t], 1.0)], 0.0),
            Commitment::Fixed(on) => (vec![], on[g][t] as u8 as f64),
        }
    }

    fn startup(&self, g: usize, t: usize) -> Affine {
        match self {
            Commitment::Vars { vu, .. } => (vec![(vu[g][t], 1.0)], 0.0),
            Commitment::Fixed(on) => {
                let prev = t > 0 && on[g][t - 1];
                (vec![], (on[g][t] && !prev) as u8 as f64)
            }
        }
    }

    fn shutdown(&self, g: usize, t: usize) -> Affine {
        match self {
            Commitment::Vars { vd, .. } => (vec![(vd[g][t], 1.0)], 0.0),
            Commitment::Fixed(on) => {
                let prev = t > 0 && on[g][t - 1];
                (vec![], (!on[g][t] && prev) as u8 as f64)
            }
        }
    }
}

/// Variables and tagged rows of one dispatch block, indexed `[entity][hour]`.
#[derive(Debug, Clone)]
pub struct DispatchVars {
    pub p: Vec<Vec<VarId>>,
    /// Fuel cost ($/h) for conventional units, gas burn (kcf/h) for GFUs.
    pub fuel: Vec<Vec<VarId>>,
    pub wind: Vec<Vec<VarId>>,
    pub shed: Vec<Vec<VarId>>,
    pub balance: Vec<RowId>,
    /// PTDF limit rows; `None` where the line cannot reach its limit.
    pub lines: Vec<Vec<Option<RowId>>>,
}

/// Adds `a * expr` to `coeffs` and returns the constant part.
fn push_scaled(coeffs: &mut Vec<(VarId, f64)>, a: f64, expr: &Affine) -> f64 {
    coeffs.extend(expr.0.iter().map(|&(v, c)| (v, a * c)));
    a * expr.1
}

/// Upper bound on `|flow|` of line `q` in hour `t` over any dispatch.
fn flow_bound(inst: &Instance, q: usize, t: usize) -> f64 {
    let sys = &inst.sys;
    let ix = &sys.index;
    let row = &inst.ptdf.gamma[q];
    let gen: f64 = sys
        .units
        .iter()
        .enumerate()
        .map(|(g, u)| row[ix.unit_bus[g]].abs() * u.p_max)
        .sum();
    let wind: f64 = sys
        .windfarms
        .iter()
        .enumerate()
        .map(|(k, w)| row[ix.wind_bus[k]].abs() * w.capacity)
        .sum();
    let load: f64 = sys
        .buses
        .iter()
        .enumerate()
        .map(|(m, b)| row[m].abs() * b.load_profile[t])
        .sum();
    gen + wind + load
}

/// Builds the dispatch block for wind `avail[farm][hour]`. Conventional
/// fuel cost and shed enter the objective with `weight`; GFU gas is left
/// for the caller's gas balance to price.
pub(crate) fn add_dispatch(
    m: &mut LinearModel,
    inst: &Instance,
    tag: &str,
    avail: &[Vec<f64>],
    commit: &Commitment,
    weight: f64,
) -> DispatchVars {
    let sys = &inst.sys;
    let ix = &sys.index;
    let nt = sys.horizon;
    let inf = f64::INFINITY;

    let mut p = Vec::with_capacity(sys.units.len());
    let mut fuel = Vec::with_capacity(sys.units.len());
    for (g, u) in sys.units.iter().enumerate() {
        let mut pg = Vec::with_capacity(nt);
        let mut fg = Vec::with_capacity(nt);
        for t in 0..nt {
            let pv = m.add_var(format!("p[{tag},{},{t}]", u.id), 0.0, u.p_max);
            let name = if u.is_gfu { "w" } else { "c" };
            let fv = m.add_var(format!("{name}[{tag},{},{t}]", u.id), 0.0, inf);
            if !u.is_gfu {
                m.set_cost(fv, weight);
            }

            let on = commit.on(g, t);
            let mut hi = vec![(pv, 1.0)];
            let k = push_scaled(&mut hi, -u.p_max, &on);
            m.add_constraint(format!("pmax[{tag},{},{t}]", u.id), hi, Sense::Le, -k);
            let mut lo = vec![(pv, 1.0)];
            let k = push_scaled(&mut lo, -u.p_min, &on);
            m.add_constraint(format!("pmin[{tag},{},{t}]", u.id), lo, Sense::Ge, -k);

            for (s, (slope, icpt)) in u.curve().segments().into_iter().enumerate() {
                let mut row = vec![(fv, 1.0), (pv, -slope)];
                let k = push_scaled(&mut row, -icpt, &on);
                m.add_constraint(format!("epi[{tag},{},{t},{s}]", u.id), row, Sense::Ge, -k);
            }
            pg.push(pv);
            fg.push(fv);
        }
        for t in 0..nt.saturating_sub(1) {
            let mut up = vec![(pg[t + 1], 1.0), (pg[t], -1.0)];
            let mut k = push_scaled(&mut up, -u.ramp, &commit.on(g, t));
            k += push_scaled(&mut up, -u.p_min, &commit.startup(g, t + 1));
            m.add_constraint(format!("rampup[{tag},{},{t}]", u.id), up, Sense::Le, -k);

            let mut down = vec![(pg[t], 1.0), (pg[t + 1], -1.0)];
            let mut k = push_scaled(&mut down, -u.ramp, &commit.on(g, t + 1));
            k += push_scaled(&mut down, -u.p_min, &commit.shutdown(g, t + 1));
            m.add_constraint(format!("rampdn[{tag},{},{t}]", u.id), down, Sense::Le, -k);
        }
        p.push(pg);
        fuel.push(fg);
    }

    let wind: Vec<Vec<VarId>> = sys
        .windfarms
        .iter()
        .enumerate()
        .map(|(k, w)| {
            (0..nt)
                .map(|t| m.add_var(format!("pw[{tag},{},{t}]", w.id), 0.0, avail[k][t].max(0.0)))
                .collect()
        })
        .collect();
    let shed: Vec<Vec<VarId>> = sys
        .buses
        .iter()
        .map(|b| {
            (0..nt)
                .map(|t| {
                    let v = m.add_var(format!("shed[{tag},{},{t}]", b.id), 0.0, b.load_profile[t]);
                    m.set_cost(v, weight * b.voll);
                    v
                })
                .collect()
        })
        .collect();

    // Injection at each bus, excluding the fixed load.
    let injection = |t: usize| -> Vec<(usize, VarId)> {
        let mut terms = Vec::new();
        for g in 0..sys.units.len() {
            terms.push((ix.unit_bus[g], p[g][t]));
        }
        for k in 0..sys.windfarms.len() {
            terms.push((ix.wind_bus[k], wind[k][t]));
        }
        for b in 0..sys.buses.len() {
            terms.push((b, shed[b][t]));
        }
        terms
    };

    let mut balance = Vec::with_capacity(nt);
    let mut lines = vec![vec![None; nt]; sys.lines.len()];
    for t in 0..nt {
        let inj = injection(t);
        let load: f64 = sys.buses.iter().map(|b| b.load_profile[t]).sum();
        let row = inj.iter().map(|&(_, v)| (v, 1.0)).collect();
        balance.push(m.add_constraint(format!("bal[{tag},{t}]"), row, Sense::Eq, load));

        for (q, line) in sys.lines.iter().enumerate() {
            if flow_bound(inst, q, t) <= line.capacity {
                continue;
            }
            let gamma = &inst.ptdf.gamma[q];
            let row: Vec<(VarId, f64)> = inj
                .iter()
                .filter(|&&(b, _)| gamma[b] != 0.0)
                .map(|&(b, v)| (v, gamma[b]))
                .collect();
            let shift: f64 = sys
                .buses
                .iter()
                .enumerate()
                .map(|(b, bus)| gamma[b] * bus.load_profile[t])
                .sum();
            lines[q][t] = Some(m.add_range(
                format!("line[{tag},{},{t}]", line.id),
                row,
                shift - line.capacity,
                shift + line.capacity,
            ));
        }
    }

    DispatchVars {
        p,
        fuel,
        wind,
        shed,
        balance,
        lines,
    }
}
