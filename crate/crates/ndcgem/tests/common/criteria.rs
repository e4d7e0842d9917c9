//! End-to-end checks shared by the acceptance run and the focused tests.
//! Each returns a pass flag with a one-line summary of what it measured.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndcgem::engine::{self, ClearingConfig, ClearingResult};
use ndcgem::gas::{pipeline_flow, solve_subproblem, HourInput, SlpOptions};
use ndcgem::master::build_master;
use ndcgem::model::{Instance, JointSystem, Priority};
use ndcgem::report::{self, RtSim, RunConfig, RunMode, ScenarioSource};
use ndcgem::scenario::{fast_forward_reduce, ScenarioSet};
use ndcgem::solver::{
    Backend, HighsBackend, LinearModel, LpStatus, MipOptions, MipStatus, NativeBackend,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::lp_oracle::{
    exhaustive_mip, kkt_report, random_lp, random_milp, vertex_enumeration, Reference,
};

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

pub const MIP_GAP: f64 = 1e-4;

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn load(name: &str) -> Instance {
    Instance::load(data(name)).unwrap()
}

/// Fixture JSON with `edit` applied before validation.
pub fn variant(name: &str, edit: impl FnOnce(&mut Value)) -> Instance {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(data(name)).unwrap()).unwrap();
    edit(&mut v);
    Instance::new(JointSystem::from_json(&v.to_string()).unwrap()).unwrap()
}

/// Ten RT scenarios out of 200 draws.
pub fn scenarios(inst: &Instance) -> ScenarioSet {
    ScenarioSet::generate(&inst.sys, 200, 10, 7).unwrap()
}

pub fn config() -> ClearingConfig {
    ClearingConfig {
        mip: MipOptions {
            rel_gap: MIP_GAP,
            ..MipOptions::default()
        },
        ..ClearingConfig::default()
    }
}

pub fn clear(inst: &Instance, scen: &ScenarioSet) -> ClearingResult {
    engine::clear(inst, scen, &config(), &HighsBackend::new()).unwrap()
}

pub fn clear_baseline(inst: &Instance, scen: &ScenarioSet) -> ClearingResult {
    engine::clear_baseline(inst, scen, &config(), &HighsBackend::new()).unwrap()
}

fn backends() -> [(&'static str, Box<dyn Backend>); 2] {
    [
        ("native", Box::new(NativeBackend::new())),
        ("highs", Box::new(HighsBackend::new())),
    ]
}

fn lp_matches(m: &LinearModel, b: &dyn Backend) -> Result<(), String> {
    let sol = b.solve_lp(m).map_err(|e| e.to_string())?;
    match (vertex_enumeration(m), sol.status) {
        (Reference::Optimal(o), LpStatus::Optimal) => {
            if (o - sol.objective).abs() > 1e-6 * (1.0 + o.abs()) {
                return Err(format!("objective {} vs {o}", sol.objective));
            }
            Ok(())
        }
        (Reference::Infeasible, LpStatus::Infeasible) => Ok(()),
        (Reference::Unbounded, LpStatus::Unbounded) => Ok(()),
        (r, s) => Err(format!("{s:?} vs {r:?}")),
    }
}

/// 200 random LPs against vertex enumeration and 50 MILPs against
/// exhaustive enumeration, on both backends, in under a minute.
pub fn solver_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    for k in 0..200 {
        let m = random_lp(&mut rng);
        for (name, b) in backends() {
            if let Err(e) = lp_matches(&m, b.as_ref()) {
                failures.push(format!("{name} lp {k}: {e}"));
            }
        }
    }
    let opts = MipOptions {
        rel_gap: 1e-9,
        ..MipOptions::default()
    };
    for k in 0..50 {
        let m = random_milp(&mut rng);
        let reference = exhaustive_mip(&m);
        for (name, b) in backends() {
            let ok = match (b.solve_mip(&m, &opts), reference) {
                (Ok(s), Reference::Optimal(o)) => {
                    s.status == MipStatus::Optimal
                        && (s.objective - o).abs() <= 1e-6 * (1.0 + o.abs())
                }
                (Ok(s), Reference::Infeasible) => s.status == MipStatus::Infeasible,
                (Ok(s), Reference::Unbounded) => s.status == MipStatus::Unbounded,
                (Err(_), _) => false,
            };
            if !ok {
                failures.push(format!("{name} milp {k}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        failures.is_empty() && secs < 60.0,
        format!(
            "{} mismatches in 200 LPs + 50 MILPs x 2 backends, {secs:.1}s {}",
            failures.len(),
            failures.first().map(String::as_str).unwrap_or("")
        ),
    )
}

/// Strong duality and complementary slackness on every optimal random LP
/// and on the fixed-commitment pricing LP of the congested toy.
pub fn duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    let mut worst = 0.0f64;
    let mut optimal = 0;
    for _ in 0..200 {
        let m = random_lp(&mut rng);
        for (_, b) in backends() {
            let s = b.solve_lp(&m).unwrap();
            if s.status == LpStatus::Optimal {
                let k = kkt_report(&m, &s);
                worst = worst.max(k.duality_gap).max(k.complementarity).max(k.dual_infeasibility);
                optimal += 1;
            }
        }
    }
    let inst = load("toy-congested.json");
    let scen = scenarios(&inst);
    let res = clear(&inst, &scen);
    let mm = build_master(&inst, &scen, &res.cuts, &res.compressor_gas).unwrap();
    let be = HighsBackend::new();
    let lp = mm.fixed_lp(&be, &res.master).unwrap();
    let mut fixed = mm.model.clone();
    for v in mm.model.integer_vars() {
        let r = res.master.values[v.0].round();
        fixed.vars[v.0].lower = r;
        fixed.vars[v.0].upper = r;
    }
    let k = kkt_report(&fixed, &lp);
    let pricing = k.duality_gap.max(k.complementarity);
    Outcome::new(
        worst <= 1e-6 && pricing <= 1e-6,
        format!("worst KKT residual {worst:.2e} over {optimal} LPs, pricing LP {pricing:.2e}"),
    )
}

/// Weymouth antisymmetry and magnitude on 1000 random triples, and SLP
/// convergence on the 4-node fixture.
pub fn gas_physics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a: f64 = rng.random_range(50.0..1000.0);
        let b: f64 = rng.random_range(50.0..1000.0);
        let c: f64 = rng.random_range(0.1..50.0);
        let f = pipeline_flow(a, b, c);
        let r = pipeline_flow(b, a, c);
        let mag = c * (a * a - b * b).abs().sqrt();
        worst = worst
            .max((f + r).abs() / mag.max(1.0))
            .max((f.abs() - mag).abs() / mag.max(1.0));
        if (a > b && f < 0.0) || (a < b && f > 0.0) {
            worst = f64::INFINITY;
        }
    }
    let inst = load("gas-4node.json");
    let be = HighsBackend::new();
    let mut slp = Vec::new();
    for (t, booked) in [(0usize, 900.0), (8, 1500.0), (18, 1775.0)] {
        let input = HourInput {
            hour: t,
            booked: &[booked],
            curtailed: &[0.0, 0.0],
            contracts: &[0.0],
            zeta: &[4.0],
        };
        let r = solve_subproblem(&inst, &input, &be, &SlpOptions::default()).unwrap();
        slp.push((r.converged && r.iterations <= 50 && r.max_residual <= 1e-6, r.iterations, r.max_residual));
    }
    Outcome::new(
        worst <= 1e-9 && slp.iter().all(|s| s.0),
        format!(
            "Weymouth worst relative error {worst:.1e}; SLP (iterations, residual) {:?}",
            slp.iter().map(|s| (s.1, s.2)).collect::<Vec<_>>()
        ),
    )
}

/// Congested toy: unsatisfied demand falls every iteration and ends at
/// zero within 20. Uncongested toy: one iteration, no cuts.
pub fn benders() -> Outcome {
    let inst = load("toy-congested.json");
    let res = clear(&inst, &scenarios(&inst));
    let u: Vec<f64> = res.iterations.iter().map(|l| l.unsatisfied).collect();
    let decreasing = u.windows(2).all(|w| w[1] < w[0]);
    let congested = decreasing && u.len() > 1 && u.len() <= 20 && *u.last().unwrap() <= 1e-3;

    let inst = load("toy-3bus.json");
    let easy = clear(&inst, &scenarios(&inst));
    let uncongested = easy.iterations.len() == 1 && easy.cuts.is_empty();
    Outcome::new(
        congested && uncongested,
        format!(
            "congested unsatisfied {:?}; uncongested {} iterations, {} cuts",
            u.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>(),
            easy.iterations.len(),
            easy.cuts.len()
        ),
    )
}

/// Toy with a weak line between buses 1 and 3 so some hours congest.
pub fn congested_line_toy() -> Instance {
    variant("toy-3bus.json", |v| {
        v["lines"][2]["capacity"] = Value::from(25.0);
    })
}

/// Toy where a flat 24 $/MWh unit sets the price and the GFU has a flat
/// heat rate of 8 kcf/MWh.
pub fn zeta_toy() -> Instance {
    variant("toy-3bus.json", |v| {
        v["units"][0]["cost_curve"]["breakpoints"] =
            serde_json::json!([[50.0, 1200.0], [175.0, 4200.0], [300.0, 7200.0]]);
        v["units"][1]["heat_curve"]["breakpoints"] =
            serde_json::json!([[20.0, 160.0], [110.0, 880.0], [200.0, 1600.0]]);
    })
}

/// Change in the fixed-commitment objective per MWh of extra DA load at
/// `bus` in `hour`, in $/MWh.
pub fn perturbed_lmep(
    inst: &Instance,
    scen: &ScenarioSet,
    res: &ClearingResult,
    bus: usize,
    hour: usize,
    delta: f64,
) -> f64 {
    let be = HighsBackend::new();
    let mm = build_master(inst, scen, &res.cuts, &res.compressor_gas).unwrap();
    let base = mm.fixed_lp(&be, &res.master).unwrap().objective;
    let mut up = mm.clone();
    let da = &mm.scenarios[0];
    let row = &mut up.model.rows[da.balance[hour].0];
    row.lower += delta;
    row.upper += delta;
    for (q, lines) in da.lines.iter().enumerate() {
        if let Some(r) = lines[hour] {
            let g = inst.ptdf.gamma[q][bus] * delta;
            let row = &mut up.model.rows[r.0];
            row.lower += g;
            row.upper += g;
        }
    }
    // Room for the extra load in the shed bound as well.
    let shed = da.shed[bus][hour];
    up.model.vars[shed.0].upper += delta;
    let moved = up.fixed_lp(&be, &res.master).unwrap().objective;
    (moved - base) / (delta * mm.weights[0])
}

/// LMEP spread in uncongested hours, the perturbation check, capacity
/// prices without binding cuts, and the value of gas to a GFU.
pub fn pricing() -> Outcome {
    // (a)
    let inst = congested_line_toy();
    let scen = scenarios(&inst);
    let res = clear(&inst, &scen);
    let p = &res.prices;
    let nt = inst.sys.horizon;
    let mut spread_free = 0.0f64;
    let mut congested_hours = 0;
    for t in 0..nt {
        let lo = p.lmep.iter().map(|r| r[t]).fold(f64::INFINITY, f64::min);
        let hi = p.lmep.iter().map(|r| r[t]).fold(f64::NEG_INFINITY, f64::max);
        if p.line_duals.iter().all(|r| r[t].abs() <= 1e-9) {
            spread_free = spread_free.max(hi - lo);
        } else {
            congested_hours += 1;
        }
    }
    let a = spread_free <= 1e-6 && congested_hours > 0 && congested_hours < nt;

    // (b)
    let mut worst_b = 0.0f64;
    for t in [3usize, 10, 18] {
        for bus in 0..inst.sys.buses.len() {
            let fd = perturbed_lmep(&inst, &scen, &res, bus, t, 1.0);
            worst_b = worst_b.max((fd - p.lmep[bus][t]).abs());
        }
    }
    let b = worst_b <= 1e-4;

    // (c)
    let cinst = load("toy-congested.json");
    let cres = clear(&cinst, &scenarios(&cinst));
    let cap = cres.prices.capacity_price.as_ref().unwrap();
    let mut stray = 0.0f64;
    for t in 0..nt {
        let binding = cres
            .cuts
            .iter()
            .zip(&cres.prices.cut_duals)
            .any(|(c, &d)| c.hour == t && d > 0.0);
        if !binding {
            for row in cap {
                stray = stray.max(row[t].abs());
            }
        }
    }
    let free = res.prices.capacity_price.as_ref().unwrap();
    let free_max = free.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let c = stray == 0.0 && res.cuts.is_empty() && free_max == 0.0;

    // (d)
    let zinst = zeta_toy();
    let zres = clear(&zinst, &scenarios(&zinst));
    let gfu = 1;
    let bus = zinst.sys.index.unit_bus[gfu];
    let mut checked = 0;
    let mut worst_d = 0.0f64;
    for t in 0..nt {
        if zres.master.on[gfu][t] && (zres.prices.lmep[bus][t] - 24.0).abs() <= 1e-9 {
            worst_d = worst_d.max((zres.zeta[gfu][t] - 3.0).abs());
            checked += 1;
        }
    }
    let d = checked > 0 && worst_d <= 1e-9;

    Outcome::new(
        a && b && c && d,
        format!(
            "(a) spread {spread_free:.1e} over {} free hours {}; (b) worst |dC - LMEP| {worst_b:.1e} {}; \
             (c) capacity price w/o binding cut {stray:.1e} {}; (d) zeta - 3 = {worst_d:.1e} over {checked} hours {}",
            nt - congested_hours,
            tag(a),
            tag(b),
            tag(c),
            tag(d)
        ),
    )
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

pub struct Economics {
    pub expected: (f64, f64),
    pub simulated: (f64, f64),
}

/// Expected and simulated costs of (coordinated, baseline) over 200 draws.
pub fn economics_of(inst: &Instance) -> Economics {
    let scen = scenarios(inst);
    let be = HighsBackend::new();
    let co = clear(inst, &scen);
    let ba = clear_baseline(inst, &scen);
    let rc = engine::simulate_rt(inst, &co, 200, 11, &be).unwrap();
    let rb = engine::simulate_rt(inst, &ba, 200, 11, &be).unwrap();
    Economics {
        expected: (co.expected_cost, ba.expected_cost),
        simulated: (rc.mean_cost, rb.mean_cost),
    }
}

pub fn economics() -> Outcome {
    let hard = economics_of(&load("toy-congested.json"));
    let (ce, be) = hard.expected;
    let (cs, bs) = hard.simulated;
    let margin = 2.0 * MIP_GAP;
    let congested = ce - be > margin * be.abs() && bs - cs > margin * bs.abs();

    let easy = economics_of(&load("toy-3bus.json"));
    let (ue_c, ue_b) = easy.expected;
    let (us_c, us_b) = easy.simulated;
    let uncongested = (ue_c - ue_b).abs() <= MIP_GAP * ue_b.abs()
        && (us_c - us_b).abs() <= MIP_GAP * us_b.abs();
    Outcome::new(
        congested && uncongested,
        format!(
            "congested expected {ce:.1} vs {be:.1}, simulated {cs:.1} vs {bs:.1}; \
             uncongested expected {ue_c:.1} vs {ue_b:.1}, simulated {us_c:.1} vs {us_b:.1}"
        ),
    )
}

/// Congested toy plus a high-priority load at the GFU's node.
pub fn curtailment_toy() -> Instance {
    variant("toy-congested.json", |v| {
        let mut extra = v["gas_loads"][1].clone();
        extra["id"] = Value::from("d3");
        extra["priority"] = Value::from("high");
        extra["curtail_cost"] = Value::from(100.0);
        let prof: Vec<f64> = extra["profile"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap() * 0.5)
            .collect();
        extra["profile"] = serde_json::json!(prof);
        v["gas_loads"].as_array_mut().unwrap().push(extra);
    })
}

/// Per node and hour: high-priority loads are curtailed only once every
/// low-priority load there is fully curtailed.
pub fn curtailment_order(inst: &Instance, res: &ClearingResult) -> Result<usize, String> {
    let sys = &inst.sys;
    let curt = res.total_curtailment();
    let mut low_hours = 0;
    for t in 0..sys.horizon {
        for n in 0..sys.gas_nodes.len() {
            let at: Vec<usize> = (0..sys.gas_loads.len())
                .filter(|&d| sys.index.load_node[d] == n)
                .collect();
            let high: f64 = at
                .iter()
                .filter(|&&d| sys.gas_loads[d].priority == Priority::High)
                .map(|&d| curt[d][t])
                .sum();
            let low_room: f64 = at
                .iter()
                .filter(|&&d| sys.gas_loads[d].priority == Priority::Low)
                .map(|&d| sys.gas_loads[d].profile[t] - curt[d][t])
                .sum();
            if at
                .iter()
                .any(|&d| sys.gas_loads[d].priority == Priority::Low && curt[d][t] > 1e-6)
            {
                low_hours += 1;
            }
            if high > 1e-6 && low_room > 1e-6 {
                return Err(format!(
                    "hour {t} node {}: {high:.4} high curtailed with {low_room:.4} low left",
                    sys.gas_nodes[n].id
                ));
            }
        }
    }
    Ok(low_hours)
}

pub fn curtailment() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (name, inst) in [
        ("toy-congested", load("toy-congested.json")),
        ("shared-node", curtailment_toy()),
    ] {
        let res = clear(&inst, &scenarios(&inst));
        match curtailment_order(&inst, &res) {
            Ok(n) => {
                pass &= n > 0;
                details.push(format!("{name}: low-priority curtailed in {n} node-hours, order ok"));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{name}: {e}"));
            }
        }
    }
    Outcome::new(pass, details.join("; "))
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Probability-weighted distance of every sample to its nearest kept one.
fn kantorovich(samples: &[Vec<f64>], w: &[f64], kept: &[usize]) -> f64 {
    (0..samples.len())
        .map(|i| {
            w[i] * kept
                .iter()
                .map(|&s| distance(&samples[i], &samples[s]))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Greedy selection by recomputing the full distance for each candidate.
pub fn greedy_reference(samples: &[Vec<f64>], w: &[f64], k: usize) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for _ in 0..k {
        let mut best: Option<(f64, usize)> = None;
        for u in 0..samples.len() {
            if kept.contains(&u) {
                continue;
            }
            let mut trial = kept.clone();
            trial.push(u);
            let d = kantorovich(samples, w, &trial);
            if best.is_none_or(|(b, _)| d < b - 1e-12) {
                best = Some((d, u));
            }
        }
        kept.push(best.unwrap().1);
    }
    kept.sort_unstable();
    kept
}

/// Exhaustive best single scenario.
pub fn best_single(samples: &[Vec<f64>], w: &[f64]) -> (usize, f64) {
    (0..samples.len())
        .map(|u| (u, kantorovich(samples, w, &[u])))
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 - 1e-12 { c } else { b })
}

pub fn random_samples(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let samples = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..100.0)).collect())
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    (samples, raw.iter().map(|x| x / s).collect())
}

fn run_toy(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let cfg = RunConfig {
        system: data("toy-congested.json"),
        scenarios: ScenarioSource::Generate {
            n_samples: 100,
            n_reduced: 5,
            seed: 42,
        },
        mode: RunMode::Both,
        mip_gap: MIP_GAP,
        rt_sim: Some(RtSim { count: 20, seed: 43 }),
        out_dir: dir.to_path_buf(),
        debug_lp: false,
        debug_gas: false,
    };
    let out = report::run(&cfg).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = out
        .files
        .iter()
        .map(|p| {
            (
                p.strip_prefix(dir).unwrap().display().to_string(),
                fs::read(p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

/// Fast-forward against brute force for n <= 12, weight sums, and
/// byte-identical reports from the same seed.
pub fn scenarios_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mismatches = 0;
    let mut worst_sum = 0.0f64;
    let mut trials = 0;
    for n in 2..=12 {
        for _ in 0..5 {
            let (s, w) = random_samples(&mut rng, n, 6);
            let (single, _) = best_single(&s, &w);
            let one = fast_forward_reduce(&s, &w, 1).unwrap();
            if one.selected != vec![single] {
                mismatches += 1;
            }
            for k in 1..=n {
                let r = fast_forward_reduce(&s, &w, k).unwrap();
                if r.selected != greedy_reference(&s, &w, k) {
                    mismatches += 1;
                }
                worst_sum = worst_sum.max((r.weights.iter().sum::<f64>() - 1.0).abs());
                trials += 1;
            }
        }
    }
    let inst = load("medium.json");
    let g = ScenarioSet::generate(&inst.sys, 300, 10, 5).unwrap();
    worst_sum = worst_sum.max((g.rt.iter().map(|s| s.weight).sum::<f64>() - 1.0).abs());

    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let (a, b) = (run_toy(d1.path()), run_toy(d2.path()));
    let identical = a == b && !a.is_empty();
    Outcome::new(
        mismatches == 0 && worst_sum <= 1e-9 && identical,
        format!(
            "{mismatches} selection mismatches over {trials} reductions, weight sum error {worst_sum:.1e}, \
             {} report files {}",
            a.len(),
            if identical { "byte-identical" } else { "DIFFER" }
        ),
    )
}

/// Medium instance through the full pipeline with both modes.
pub fn medium_pipeline() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        system: data("medium.json"),
        scenarios: ScenarioSource::Generate {
            n_samples: 500,
            n_reduced: 10,
            seed: 1,
        },
        mode: RunMode::Both,
        mip_gap: MIP_GAP,
        rt_sim: Some(RtSim { count: 100, seed: 2 }),
        out_dir: dir.path().to_path_buf(),
        debug_lp: false,
        debug_gas: false,
    };
    let start = Instant::now();
    let out = report::run(&cfg);
    let secs = start.elapsed().as_secs_f64();
    match out {
        Ok(out) => {
            let inst = load("medium.json");
            let shape = inst.sys.units.len() == 12
                && inst.sys.buses.len() == 8
                && inst.sys.gas_nodes.len() == 8
                && inst.sys.horizon == 24
                && out.scenarios.rt.len() == 10;
            Outcome::new(
                shape && secs < 300.0,
                format!(
                    "{secs:.1}s, {} files, coordinated {} iterations",
                    out.files.len(),
                    out.cases[0].result.iterations.len()
                ),
            )
        }
        Err(e) => Outcome::new(false, format!("failed after {secs:.1}s: {e}")),
    }
}
