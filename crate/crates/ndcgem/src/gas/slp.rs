//! Successive linear programming for the hourly gas feasibility check.
//!
//! Squared pressures are scaled by the largest squared pressure bound so
//! the pressure variables live in `[0, 1]`. Each iteration linearizes the
//! pipeline and compressor equations at the incumbent, solves an LP with
//! elastic flow rows inside a trust region and accepts the step when an
//! exact-physics merit function improves.

use crate::model::Instance;
use crate::solver::{Backend, LinearModel, LpSolution, RowId, Sense, SolverError, VarId};

use super::{compressor_gas, GasError, GasState, SubproblemResult};

/// Master-side schedule checked for one hour.
#[derive(Debug, Clone, Copy)]
pub struct HourInput<'a> {
    pub hour: usize,
    /// Booked capacity per unit, kcf/h (ignored for conventional units).
    pub booked: &'a [f64],
    /// DA curtailment per gas load.
    pub curtailed: &'a [f64],
    /// DA contract per supplier.
    pub contracts: &'a [f64],
    /// Value of delivered gas per unit, $/kcf.
    pub zeta: &'a [f64],
}

#[derive(Debug, Clone, Copy)]
pub struct SlpOptions {
    pub max_iterations: usize,
    /// Relative Weymouth residual accepted at convergence.
    pub tolerance: f64,
    /// Initial trust radius as a fraction of each variable's range.
    pub initial_trust: f64,
    pub min_trust: f64,
}

impl Default for SlpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            tolerance: 1e-6,
            initial_trust: 0.1,
            min_trust: 1e-6,
        }
    }
}

/// Largest compressor pressure ratio used, as a share of the ratio at
/// which the flow denominator vanishes.
const RATIO_MARGIN: f64 = 0.95;
/// Objective weight on each unit of scaled pressure movement.
const PROX: f64 = 1e-4;
const POLISH: f64 = 1e-3;
const POLISH_STEPS: usize = 3;

struct Pipe {
    from: usize,
    to: usize,
    /// Weymouth constant in scaled units.
    c: f64,
    eps: f64,
}

struct Comp {
    from: usize,
    to: usize,
    tap: usize,
    sigma: f64,
    h_min: f64,
    h_max: f64,
    k1: f64,
    k2: f64,
    alpha: f64,
    coeffs: [f64; 3],
}

impl Comp {
    fn ends(&self) -> (usize, usize) {
        if self.sigma > 0.0 {
            (self.from, self.to)
        } else {
            (self.to, self.from)
        }
    }

    /// Flow, d/dh, d/dPi_hi, d/dPi_lo at a point. `None` outside the
    /// operating domain.
    fn eval(&self, pi: &[f64], h: f64) -> Option<(f64, f64, f64, f64)> {
        let (hi, lo) = self.ends();
        let (ph, pl) = (pi[hi], pi[lo].max(1e-12));
        let r = (ph / pl).powf(self.alpha / 2.0);
        let d = self.k2 - self.k1 * r;
        if !(d > 0.0) {
            return None;
        }
        let y = self.sigma * h / d;
        let g = self.sigma * h * self.k1 * (self.alpha / 2.0) * r / (d * d);
        Some((y, self.sigma / d, g / ph.max(1e-12), -g / pl))
    }

    fn ratio_limit(&self) -> Option<f64> {
        (self.k1 > 0.0).then(|| (RATIO_MARGIN * self.k2 / self.k1).powf(2.0 / self.alpha))
    }
}

struct Net<'a> {
    inst: &'a Instance,
    hour: usize,
    pi_lo: Vec<f64>,
    pi_hi: Vec<f64>,
    pipes: Vec<Pipe>,
    comps: Vec<Comp>,
    /// Fixed withdrawal per node: gas load net of DA curtailment, minus DA
    /// contracts.
    withdrawal: Vec<f64>,
    s_lo: Vec<f64>,
    s_hi: Vec<f64>,
    dl_hi: Vec<f64>,
    gfus: Vec<usize>,
    x_star: Vec<f64>,
    zeta: Vec<f64>,
    lambda: Vec<f64>,
    penalty: f64,
}

/// Decision point of the sub-problem.
#[derive(Clone, Debug)]
struct Point {
    pi: Vec<f64>,
    h: Vec<f64>,
    s: Vec<f64>,
    dl: Vec<f64>,
    /// Delivered capacity per GFU in `Net::gfus` order.
    x: Vec<f64>,
}

fn weymouth(c: f64, d: f64) -> f64 {
    if d >= 0.0 {
        c * d.sqrt()
    } else {
        -c * (-d).sqrt()
    }
}

fn check_len(hour: usize, what: &'static str, got: usize, want: usize) -> Result<(), GasError> {
    if got == want {
        Ok(())
    } else {
        Err(GasError::Dimension {
            hour,
            what,
            got,
            want,
        })
    }
}

impl<'a> Net<'a> {
    fn new(inst: &'a Instance, input: &HourInput) -> Result<Self, GasError> {
        let sys = &inst.sys;
        let ix = &sys.index;
        let t = input.hour;
        check_len(t, "booked capacity", input.booked.len(), sys.units.len())?;
        check_len(t, "zeta", input.zeta.len(), sys.units.len())?;
        check_len(t, "curtailment", input.curtailed.len(), sys.gas_loads.len())?;
        check_len(t, "contracts", input.contracts.len(), sys.suppliers.len())?;

        let scale = ix
            .pressure
            .iter()
            .map(|&(_, hi)| hi * hi)
            .fold(1.0, f64::max);
        let root = scale.sqrt();
        let pi_lo = ix.pressure.iter().map(|&(lo, _)| lo * lo / scale).collect();
        let pi_hi = ix.pressure.iter().map(|&(_, hi)| hi * hi / scale).collect();
        let pipes = sys
            .pipelines
            .iter()
            .zip(&ix.pipe_ends)
            .map(|(p, &(from, to))| Pipe {
                from,
                to,
                c: p.weymouth_const * root,
                eps: 1e-3 * p.weymouth_const * root,
            })
            .collect();
        let comps = sys
            .compressors
            .iter()
            .enumerate()
            .map(|(c, k)| Comp {
                from: ix.comp_ends[c].0,
                to: ix.comp_ends[c].1,
                tap: ix.comp_tap[c],
                sigma: 1.0,
                h_min: k.h_min,
                h_max: k.h_max,
                k1: k.k1,
                k2: k.k2,
                alpha: k.alpha,
                coeffs: k.gas_coeffs,
            })
            .collect();

        let mut withdrawal = vec![0.0; sys.gas_nodes.len()];
        for (d, l) in sys.gas_loads.iter().enumerate() {
            withdrawal[ix.load_node[d]] += (l.profile[t] - input.curtailed[d]).max(0.0);
        }
        let mut s_lo = Vec::new();
        let mut s_hi = Vec::new();
        for (j, s) in sys.suppliers.iter().enumerate() {
            let s0 = input.contracts[j].clamp(0.0, s.capacity);
            withdrawal[ix.supplier_node[j]] -= s0;
            s_lo.push(-s0);
            s_hi.push(s.capacity - s0);
        }
        let dl_hi = sys
            .gas_loads
            .iter()
            .enumerate()
            .map(|(d, l)| (l.profile[t] - input.curtailed[d]).max(0.0))
            .collect();
        let gfus: Vec<usize> = (0..sys.units.len()).filter(|&g| sys.units[g].is_gfu).collect();
        let x_star = gfus.iter().map(|&g| input.booked[g].max(0.0)).collect();
        let zeta: Vec<f64> = gfus.iter().map(|&g| input.zeta[g].max(0.0)).collect();
        let lambda: Vec<f64> = sys.gas_loads.iter().map(|l| l.curtail_cost).collect();
        let top = zeta
            .iter()
            .chain(&lambda)
            .fold(0.0f64, |a, &b| a.max(b));
        Ok(Self {
            inst,
            hour: t,
            pi_lo,
            pi_hi,
            pipes,
            comps,
            withdrawal,
            s_lo,
            s_hi,
            dl_hi,
            gfus,
            x_star,
            zeta,
            lambda,
            penalty: 10.0 * (1.0 + top),
        })
    }

    fn start(&mut self) -> Result<Point, GasError> {
        let pi: Vec<f64> = self
            .pi_lo
            .iter()
            .zip(&self.pi_hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect();
        for c in &mut self.comps {
            c.sigma = if pi[c.from] >= pi[c.to] { 1.0 } else { -1.0 };
        }
        let h: Vec<f64> = self.comps.iter().map(|c| 0.5 * (c.h_min + c.h_max)).collect();
        for (k, c) in self.comps.iter().enumerate() {
            if c.eval(&pi, h[k]).is_none() {
                let (hi, lo) = c.ends();
                return Err(GasError::CompressorDomain {
                    id: self.inst.sys.compressors[k].id.clone(),
                    ratio: (pi[hi] / pi[lo]).sqrt(),
                });
            }
        }
        Ok(Point {
            pi,
            h,
            s: vec![0.0; self.s_lo.len()],
            dl: vec![0.0; self.dl_hi.len()],
            x: self.x_star.clone(),
        })
    }

    fn cost(&self, z: &Point) -> f64 {
        let curtail: f64 = z.dl.iter().zip(&self.lambda).map(|(d, l)| d * l).sum();
        let short: f64 = z
            .x
            .iter()
            .zip(&self.x_star)
            .zip(&self.zeta)
            .map(|((x, xs), zt)| zt * (xs - x))
            .sum();
        curtail + short
    }

    /// Nodal imbalance under exact physics; `None` outside the compressor
    /// domain.
    fn imbalance(&self, z: &Point) -> Option<Vec<f64>> {
        let ix = &self.inst.sys.index;
        let mut r: Vec<f64> = self.withdrawal.iter().map(|w| -w).collect();
        for p in &self.pipes {
            let y = weymouth(p.c, z.pi[p.from] - z.pi[p.to]);
            r[p.to] += y;
            r[p.from] -= y;
        }
        for (k, c) in self.comps.iter().enumerate() {
            let (y, ..) = c.eval(&z.pi, z.h[k])?;
            r[c.to] += y;
            r[c.from] -= y;
            r[c.tap] -= compressor_gas(z.h[k], &c.coeffs);
        }
        for (j, s) in z.s.iter().enumerate() {
            r[ix.supplier_node[j]] += s;
        }
        for (d, dl) in z.dl.iter().enumerate() {
            r[ix.load_node[d]] += dl;
        }
        for (k, &g) in self.gfus.iter().enumerate() {
            r[ix.unit_gas_node[g].expect("GFU has a gas node")] -= z.x[k];
        }
        Some(r)
    }

    fn merit(&self, z: &Point) -> f64 {
        match self.imbalance(z) {
            Some(r) => self.cost(z) + self.penalty * r.iter().map(|v| v.abs()).sum::<f64>(),
            None => f64::INFINITY,
        }
    }

    /// Holds pressures and compressor power at `z` and re-optimizes the
    /// supply, curtailment and delivery terms against exact flows. Leaves
    /// `z` untouched outside the compressor domain.
    fn repair(&self, z: &mut Point, backend: &dyn Backend) -> Result<(), GasError> {
        let bare = Point {
            s: vec![0.0; z.s.len()],
            dl: vec![0.0; z.dl.len()],
            x: vec![0.0; z.x.len()],
            ..z.clone()
        };
        let Some(r0) = self.imbalance(&bare) else {
            return Ok(());
        };
        let sys = &self.inst.sys;
        let mut m = LinearModel::new();
        let (s, dl, x) = self.adjustment_columns(&mut m);
        let mut rows: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); r0.len()];
        self.balance_terms(&mut rows, &s, &dl, &x);
        for (n, mut row) in rows.into_iter().enumerate() {
            let id = &sys.gas_nodes[n].id;
            let (ep, en) = self.elastic(&mut m, &format!("node[{id}]"));
            row.push((ep, 1.0));
            row.push((en, -1.0));
            m.add_constraint(format!("node[{id}]"), row, Sense::Eq, -r0[n]);
        }
        let lp = optimal(backend.solve_lp(&m)?, self.hour, "repair")?;
        let get = |vs: &[VarId]| vs.iter().map(|v| lp.x[v.0]).collect();
        z.s = get(&s);
        z.dl = get(&dl);
        z.x = get(&x);
        Ok(())
    }

    /// Adds the delivery-side columns and returns them with the nodal
    /// balance coefficient lists to fill in.
    fn adjustment_columns(&self, m: &mut LinearModel) -> (Vec<VarId>, Vec<VarId>, Vec<VarId>) {
        let sys = &self.inst.sys;
        let s = (0..self.s_lo.len())
            .map(|j| m.add_var(format!("shat[{}]", sys.suppliers[j].id), self.s_lo[j], self.s_hi[j]))
            .collect();
        let dl = (0..self.dl_hi.len())
            .map(|d| {
                let v = m.add_var(format!("dlhat[{}]", sys.gas_loads[d].id), 0.0, self.dl_hi[d]);
                m.set_cost(v, self.lambda[d]);
                v
            })
            .collect();
        let x = self
            .gfus
            .iter()
            .enumerate()
            .map(|(k, &g)| {
                let v = m.add_var(format!("xhat[{}]", sys.units[g].id), 0.0, self.x_star[k]);
                m.set_cost(v, -self.zeta[k]);
                v
            })
            .collect();
        (s, dl, x)
    }

    fn balance_terms(
        &self,
        rows: &mut [Vec<(VarId, f64)>],
        s: &[VarId],
        dl: &[VarId],
        x: &[VarId],
    ) {
        let ix = &self.inst.sys.index;
        for (j, &v) in s.iter().enumerate() {
            rows[ix.supplier_node[j]].push((v, 1.0));
        }
        for (d, &v) in dl.iter().enumerate() {
            rows[ix.load_node[d]].push((v, 1.0));
        }
        for (k, &g) in self.gfus.iter().enumerate() {
            rows[ix.unit_gas_node[g].expect("GFU has a gas node")].push((x[k], -1.0));
        }
    }

    /// LP linearized at `z` within trust radius `tr`.
    fn linearized(&self, z: &Point, tr: f64) -> (LinearModel, LpCols) {
        let sys = &self.inst.sys;
        let nn = self.pi_lo.len();
        let mut m = LinearModel::new();
        let pi: Vec<VarId> = (0..nn)
            .map(|n| {
                let range = self.pi_hi[n] - self.pi_lo[n];
                let lo = self.pi_lo[n].max(z.pi[n] - tr * range);
                let hi = self.pi_hi[n].min(z.pi[n] + tr * range);
                m.add_var(format!("Pi[{}]", sys.gas_nodes[n].id), lo, hi)
            })
            .collect();
        // Small cost on pressure moves keeps the vertex from jumping to the
        // trust box corners along directions the objective ignores.
        for n in 0..nn {
            let id = &sys.gas_nodes[n].id;
            let up = m.add_var(format!("dpi+[{id}]"), 0.0, f64::INFINITY);
            let dn = m.add_var(format!("dpi-[{id}]"), 0.0, f64::INFINITY);
            m.set_cost(up, PROX);
            m.set_cost(dn, PROX);
            m.add_constraint(
                format!("move[{id}]"),
                vec![(pi[n], 1.0), (up, -1.0), (dn, 1.0)],
                Sense::Eq,
                z.pi[n],
            );
        }
        let h: Vec<VarId> = self
            .comps
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let range = c.h_max - c.h_min;
                let lo = c.h_min.max(z.h[k] - tr * range);
                let hi = c.h_max.min(z.h[k] + tr * range);
                m.add_var(format!("h[{}]", sys.compressors[k].id), lo, hi)
            })
            .collect();
        let mut rows: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); nn];
        let mut rhs = self.withdrawal.clone();
        let mut flows = Vec::new();
        let mut slack = Vec::new();

        for (k, p) in self.pipes.iter().enumerate() {
            let name = &sys.pipelines[k].id;
            let y = m.add_var(format!("y[{name}]"), f64::NEG_INFINITY, f64::INFINITY);
            let d0 = z.pi[p.from] - z.pi[p.to];
            let y0 = weymouth(p.c, d0);
            let (a, b) = if y0.abs() > p.eps {
                let a = p.c * p.c / (2.0 * y0.abs());
                (a, y0 - a * d0)
            } else {
                let floor = (p.eps / p.c).powi(2);
                (p.c / d0.abs().max(floor).sqrt(), 0.0)
            };
            m.add_constraint(
                format!("flow[{name}]"),
                vec![(y, 1.0), (pi[p.from], -a), (pi[p.to], a)],
                Sense::Eq,
                b,
            );
            rows[p.to].push((y, 1.0));
            rows[p.from].push((y, -1.0));
            flows.push(y);
        }
        for (k, c) in self.comps.iter().enumerate() {
            let name = &sys.compressors[k].id;
            let y = m.add_var(format!("yc[{name}]"), f64::NEG_INFINITY, f64::INFINITY);
            let (hi, lo) = c.ends();
            let (y0, dh, dhi, dlo) = c.eval(&z.pi, z.h[k]).expect("incumbent in domain");
            m.add_constraint(
                format!("cflow[{name}]"),
                vec![(y, 1.0), (h[k], -dh), (pi[hi], -dhi), (pi[lo], -dlo)],
                Sense::Eq,
                y0 - dh * z.h[k] - dhi * z.pi[hi] - dlo * z.pi[lo],
            );
            m.add_constraint(
                format!("csign[{name}]"),
                vec![(pi[hi], 1.0), (pi[lo], -1.0)],
                Sense::Ge,
                0.0,
            );
            if let Some(r) = c.ratio_limit() {
                m.add_constraint(
                    format!("cratio[{name}]"),
                    vec![(pi[hi], 1.0), (pi[lo], -r)],
                    Sense::Le,
                    0.0,
                );
            }
            let [a2, a1, a0] = c.coeffs;
            let slope = 2.0 * a2 * z.h[k] + a1;
            let theta0 = a2 * z.h[k] * z.h[k] + a1 * z.h[k] + a0;
            rows[c.to].push((y, 1.0));
            rows[c.from].push((y, -1.0));
            rows[c.tap].push((h[k], -slope));
            rhs[c.tap] += theta0 - slope * z.h[k];
            flows.push(y);
        }
        let (s, dl, x) = self.adjustment_columns(&mut m);
        self.balance_terms(&mut rows, &s, &dl, &x);
        // Elastic node balances make the LP a local model of the merit.
        let nodes = rows
            .into_iter()
            .enumerate()
            .map(|(n, mut row)| {
                let id = &sys.gas_nodes[n].id;
                let (ep, en) = self.elastic(&mut m, &format!("node[{id}]"));
                row.push((ep, 1.0));
                row.push((en, -1.0));
                slack.push((ep, en));
                m.add_constraint(format!("node[{id}]"), row, Sense::Eq, rhs[n])
            })
            .collect();
        let cols = LpCols {
            pi,
            h,
            flows,
            slack,
            s,
            dl,
            x,
            nodes,
        };
        (m, cols)
    }

    fn elastic(&self, m: &mut LinearModel, tag: &str) -> (VarId, VarId) {
        let ep = m.add_var(format!("ep{tag}"), 0.0, f64::INFINITY);
        let en = m.add_var(format!("en{tag}"), 0.0, f64::INFINITY);
        m.set_cost(ep, self.penalty);
        m.set_cost(en, self.penalty);
        (ep, en)
    }

    /// Largest relative gap between LP flows and exact physics at the LP
    /// point.
    fn residual(&self, lp: &LpSolution, cols: &LpCols, z: &Point) -> f64 {
        let mut worst = 0.0f64;
        for (k, p) in self.pipes.iter().enumerate() {
            let y = lp.x[cols.flows[k].0];
            let exact = weymouth(p.c, z.pi[p.from] - z.pi[p.to]);
            worst = worst.max((y - exact).abs() / exact.abs().max(1.0));
        }
        let np = self.pipes.len();
        for (k, c) in self.comps.iter().enumerate() {
            let y = lp.x[cols.flows[np + k].0];
            match c.eval(&z.pi, z.h[k]) {
                Some((exact, ..)) => worst = worst.max((y - exact).abs() / exact.abs().max(1.0)),
                None => return f64::INFINITY,
            }
        }
        worst
    }
}

struct LpCols {
    pi: Vec<VarId>,
    h: Vec<VarId>,
    flows: Vec<VarId>,
    slack: Vec<(VarId, VarId)>,
    s: Vec<VarId>,
    dl: Vec<VarId>,
    x: Vec<VarId>,
    nodes: Vec<RowId>,
}

impl LpCols {
    fn point(&self, lp: &LpSolution) -> Point {
        let get = |vs: &[VarId]| vs.iter().map(|v| lp.x[v.0]).collect();
        Point {
            pi: get(&self.pi),
            h: get(&self.h),
            s: get(&self.s),
            dl: get(&self.dl),
            x: get(&self.x),
        }
    }

    fn slack(&self, lp: &LpSolution) -> f64 {
        self.slack.iter().map(|&(p, n)| lp.x[p.0] + lp.x[n.0]).sum()
    }
}

fn optimal(lp: LpSolution, hour: usize, what: &str) -> Result<LpSolution, GasError> {
    if lp.is_optimal() {
        Ok(lp)
    } else {
        Err(GasError::Solver(SolverError::NumericalFailure(format!(
            "hour {hour}: {what} LP returned {:?}",
            lp.status
        ))))
    }
}

/// Checks whether the booked capacities, curtailments and contracts of one
/// hour can be delivered through the gas network, and at what penalty.
pub fn solve_subproblem(
    inst: &Instance,
    input: &HourInput,
    backend: &dyn Backend,
    opts: &SlpOptions,
) -> Result<SubproblemResult, GasError> {
    let mut net = Net::new(inst, input)?;
    let mut z = net.start()?;
    net.repair(&mut z, backend)?;
    let mut phi = net.merit(&z);
    let mut tr = opts.initial_trust;
    let mut streak = 0;
    let mut converged = false;
    let mut polish = 0;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    while iterations < opts.max_iterations {
        iterations += 1;
        let (model, cols) = net.linearized(&z, tr);
        let lp = optimal(backend.solve_lp(&model)?, net.hour, "linearized")?;
        let mut cand = cols.point(&lp);
        let slack = cols.slack(&lp);
        let res = net.residual(&lp, &cols, &cand);
        net.repair(&mut cand, backend)?;
        let phi_new = net.merit(&cand);
        let scale = phi.abs().max(1.0);
        log::trace!(
            "hour {} it {iterations}: merit {phi_new:.9e} residual {res:.3e} trust {tr:.2e}",
            net.hour
        );
        if phi_new <= phi + 1e-12 * scale {
            let improved = phi_new < phi - 1e-12 * scale;
            z = cand;
            phi = phi_new;
            residual = res;
            if res <= opts.tolerance && slack <= opts.tolerance {
                converged = true;
                // A few extra steps clear the tolerance-sized shortfall.
                if res <= POLISH * opts.tolerance || polish == POLISH_STEPS {
                    break;
                }
                polish += 1;
            }
            if improved {
                streak += 1;
                if streak >= 2 {
                    tr = (2.0 * tr).min(1.0);
                    streak = 0;
                }
            } else {
                // Flat merit: only a smaller step can shrink the residual.
                streak = 0;
                tr *= 0.5;
                if tr < opts.min_trust {
                    break;
                }
            }
        } else {
            streak = 0;
            tr *= 0.5;
            if tr < opts.min_trust {
                break;
            }
        }
    }
    if !converged {
        log::warn!(
            "hour {}: SLP stopped after {iterations} iterations with residual {residual:.3e}",
            net.hour
        );
    }

    // Pricing LP: the linearization at the final point. Its nodal duals
    // value gas injected at each node. It can return another vertex of the
    // same face, so the primal results stay at the accepted point.
    let (model, cols) = net.linearized(&z, tr.max(opts.min_trust));
    let lp = optimal(backend.solve_lp(&model)?, net.hour, "pricing")?;
    let slack = cols.slack(&lp);
    if slack > opts.tolerance {
        log::warn!("hour {}: node imbalance {slack:.3e} in the pricing LP", net.hour);
    }
    let sys = &inst.sys;
    let mut delivered = vec![0.0; sys.units.len()];
    for (k, &g) in net.gfus.iter().enumerate() {
        delivered[g] = z.x[k];
    }
    let short: f64 = net
        .gfus
        .iter()
        .enumerate()
        .map(|(k, &g)| (net.x_star[k] - delivered[g]).max(0.0))
        .sum();
    let constant: f64 = net.x_star.iter().zip(&net.zeta).map(|(x, z)| x * z).sum();
    let g_star = (lp.objective + constant).max(0.0);
    let node_values = cols.nodes.iter().map(|r| -lp.row_duals[r.0]).collect();

    let comp_gas: Vec<f64> = net
        .comps
        .iter()
        .enumerate()
        .map(|(k, c)| compressor_gas(z.h[k], &c.coeffs))
        .collect();
    let scale = inst
        .sys
        .index
        .pressure
        .iter()
        .map(|&(_, hi)| hi * hi)
        .fold(1.0, f64::max);
    Ok(SubproblemResult {
        hour: net.hour,
        g_star,
        converged,
        iterations,
        node_values: Some(node_values),
        delivered,
        unsatisfied: short + z.dl.iter().sum::<f64>(),
        extra_curtailment: z.dl.clone(),
        supply_adjustment: z.s.clone(),
        max_residual: residual,
        state: GasState {
            pressure: z.pi.iter().map(|p| (p * scale).sqrt()).collect(),
            pipe_flow: net
                .pipes
                .iter()
                .map(|p| weymouth(p.c, z.pi[p.from] - z.pi[p.to]))
                .collect(),
            comp_flow: net
                .comps
                .iter()
                .enumerate()
                .map(|(k, c)| c.eval(&z.pi, z.h[k]).map_or(f64::NAN, |e| e.0))
                .collect(),
            comp_power: z.h.clone(),
            comp_gas,
        },
    })
}
