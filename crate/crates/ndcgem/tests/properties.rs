mod common;

use std::collections::VecDeque;

use common::criteria::{best_single, greedy_reference};
use common::lp_oracle::random_lp;
use ndcgem::gas::pipeline_flow;
use ndcgem::model::{compute_ptdf, JointSystem, PiecewiseCurve};
use ndcgem::report::format::num;
use ndcgem::scenario::fast_forward_reduce;
use ndcgem::solver::{Backend, NativeBackend};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Toy system rewired onto `n` buses with the given lines. Every asset
/// sits on bus 0.
fn network(n: usize, lines: &[(usize, usize, f64)], slack: usize) -> JointSystem {
    let mut v: Value = serde_json::from_str(include_str!("../data/toy-3bus.json")).unwrap();
    let profile = v["buses"][0]["load_profile"].clone();
    v["buses"] = (0..n)
        .map(|i| json!({"id": format!("b{i}"), "load_profile": profile, "voll": 1000.0}))
        .collect();
    v["lines"] = lines
        .iter()
        .enumerate()
        .map(|(k, &(a, b, x))| {
            json!({"id": format!("l{k}"), "from_bus": format!("b{a}"), "to_bus": format!("b{b}"),
                   "reactance": x, "capacity": 100.0})
        })
        .collect();
    v["slack_bus"] = json!(format!("b{slack}"));
    for u in v["units"].as_array_mut().unwrap() {
        u["bus"] = json!("b0");
    }
    for w in v["windfarms"].as_array_mut().unwrap() {
        w["bus"] = json!("b0");
    }
    JointSystem::from_json(&v.to_string()).unwrap()
}

/// A spanning tree on `n` buses plus a few extra edges.
fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>, usize)> {
    (2usize..7).prop_flat_map(|n| {
        let tree = (1..n)
            .map(|i| (0..i, 0.05f64..1.0).prop_map(move |(j, x)| (j, i, x)))
            .collect::<Vec<_>>();
        let extra = prop::collection::vec((0..n, 0..n, 0.05f64..1.0), 0..4);
        (Just(n), tree, extra, 0..n).prop_map(|(n, tree, extra, slack)| {
            let mut lines = tree;
            lines.extend(extra.into_iter().filter(|&(a, b, _)| a != b));
            (n, lines, slack)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ptdf_flows_obey_kirchhoff(
        (n, lines, slack) in graph(),
        inj in prop::collection::vec(-50.0f64..50.0, 7),
    ) {
        let sys = network(n, &lines, slack);
        let ptdf = compute_ptdf(&sys).unwrap();
        let mut p = inj[..n].to_vec();
        p[slack] = 0.0;
        p[slack] = -p.iter().sum::<f64>();
        let f = ptdf.flows(&p);
        for q in 0..lines.len() {
            prop_assert_eq!(ptdf.gamma[q][slack], 0.0);
        }
        // Current law at every bus.
        for m in 0..n {
            let mut out = 0.0;
            for (q, &(a, b, _)) in lines.iter().enumerate() {
                if a == m { out += f[q]; }
                if b == m { out -= f[q]; }
            }
            prop_assert!((out - p[m]).abs() <= 1e-8, "bus {}: {} vs {}", m, out, p[m]);
        }
        // Voltage law: angles propagated along a BFS tree reproduce every flow.
        let mut theta = vec![f64::NAN; n];
        theta[slack] = 0.0;
        let mut queue = VecDeque::from([slack]);
        while let Some(m) = queue.pop_front() {
            for (q, &(a, b, x)) in lines.iter().enumerate() {
                if a == m && theta[b].is_nan() {
                    theta[b] = theta[a] - f[q] * x;
                    queue.push_back(b);
                } else if b == m && theta[a].is_nan() {
                    theta[a] = theta[b] + f[q] * x;
                    queue.push_back(a);
                }
            }
        }
        for (q, &(a, b, x)) in lines.iter().enumerate() {
            prop_assert!(((theta[a] - theta[b]) / x - f[q]).abs() <= 1e-7);
        }
    }

    #[test]
    fn weymouth_is_antisymmetric(a in 1.0f64..1500.0, b in 1.0f64..1500.0, c in 0.01f64..100.0) {
        let f = pipeline_flow(a, b, c);
        prop_assert_eq!(f, -pipeline_flow(b, a, c));
        let mag = c * (a * a - b * b).abs().sqrt();
        prop_assert!((f.abs() - mag).abs() <= 1e-9 * mag.max(1.0));
        prop_assert!(f * (a - b) >= 0.0);
    }

    #[test]
    fn reduction_keeps_a_distribution(seed in any::<u64>(), n in 1usize..=12, dim in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, w) = common::criteria::random_samples(&mut rng, n, dim);
        let k = 1 + (seed as usize) % n;
        let r = fast_forward_reduce(&s, &w, k).unwrap();
        prop_assert_eq!(r.selected.len(), k);
        prop_assert!(r.selected.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(r.selected.iter().all(|&i| i < n));
        prop_assert!(r.weights.iter().all(|&x| x > 0.0));
        prop_assert!((r.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert_eq!(&r.selected, &greedy_reference(&s, &w, k));
        let one = fast_forward_reduce(&s, &w, 1).unwrap();
        prop_assert_eq!(one.selected, vec![best_single(&s, &w).0]);
    }

    #[test]
    fn convex_curves_have_rising_slopes(
        x0 in 0.0f64..50.0,
        widths in prop::collection::vec(1.0f64..40.0, 1..5),
        deltas in prop::collection::vec(0.0f64..5.0, 5),
        s0 in 0.0f64..30.0,
        probe in 0.0f64..1.0,
    ) {
        let mut pts = vec![(x0, 100.0)];
        let mut slope = s0;
        for (k, w) in widths.iter().enumerate() {
            slope += deltas[k];
            let (x, y) = *pts.last().unwrap();
            pts.push((x + w, y + slope * w));
        }
        let c = PiecewiseCurve::new(pts.clone());
        let s = c.slopes();
        prop_assert!(s.windows(2).all(|p| p[0] <= p[1] + 1e-12));
        let hi = pts.last().unwrap().0;
        let x = x0 + probe * (hi - x0);
        let max_seg = c.segments().iter().map(|&(a, b)| a * x + b).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((c.eval(x) - max_seg).abs() <= 1e-9 * max_seg.abs().max(1.0));
    }

    #[test]
    fn six_digit_rendering_round_trips(x in -1e9f64..1e9, e in -8i32..8) {
        let v = x * 10f64.powi(e);
        let back: f64 = num(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-6 * v.abs() + 1e-300);
    }

    #[test]
    fn solves_are_deterministic(seed in any::<u64>()) {
        let m = random_lp(&mut ChaCha8Rng::seed_from_u64(seed));
        let b = NativeBackend::new();
        let (s1, s2) = (b.solve_lp(&m).unwrap(), b.solve_lp(&m).unwrap());
        prop_assert_eq!(s1.status, s2.status);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&s1.x), bits(&s2.x));
        prop_assert_eq!(bits(&s1.row_duals), bits(&s2.row_duals));
    }
}
