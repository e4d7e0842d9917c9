//! Brute-force reference solvers for small LPs and MILPs.

use ndcgem::solver::{LinearModel, Sense};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// `G x <= h` plus `E x = f`.
struct Poly {
    n: usize,
    g: Vec<Vec<f64>>,
    h: Vec<f64>,
    e: Vec<Vec<f64>>,
    f: Vec<f64>,
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-9 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    Some(x)
}

/// Row-reduces `[e | f]`, dropping dependent rows. `None` if inconsistent.
fn independent_rows(e: &[Vec<f64>], f: &[f64]) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut rows: Vec<(Vec<f64>, f64)> = e.iter().cloned().zip(f.iter().copied()).collect();
    let n = e.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).max_by(|&i, &j| rows[i].0[col].abs().total_cmp(&rows[j].0[col].abs())) else {
            break;
        };
        if rows[p].0[col].abs() < 1e-9 {
            continue;
        }
        rows.swap(r, p);
        let (pr, pf) = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r {
                let k = row.0[col] / pr[col];
                if k != 0.0 {
                    for j in 0..n {
                        row.0[j] -= k * pr[j];
                    }
                    row.1 -= k * pf;
                }
            }
        }
        r += 1;
    }
    for row in &rows[r..] {
        if row.1.abs() > 1e-9 {
            return None;
        }
    }
    rows.truncate(r);
    Some(rows.into_iter().unzip())
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

impl Poly {
    fn from_model(m: &LinearModel) -> Poly {
        let n = m.num_vars();
        let mut p = Poly {
            n,
            g: vec![],
            h: vec![],
            e: vec![],
            f: vec![],
        };
        for (j, v) in m.vars.iter().enumerate() {
            let mut r = vec![0.0; n];
            if v.lower == v.upper {
                r[j] = 1.0;
                p.e.push(r);
                p.f.push(v.lower);
                continue;
            }
            if v.lower.is_finite() {
                r[j] = -1.0;
                p.g.push(r.clone());
                p.h.push(-v.lower);
            }
            if v.upper.is_finite() {
                r[j] = 1.0;
                p.g.push(r);
                p.h.push(v.upper);
            }
        }
        for row in &m.rows {
            let mut r = vec![0.0; n];
            for &(v, a) in &row.coeffs {
                r[v.0] += a;
            }
            if row.lower == row.upper {
                p.e.push(r);
                p.f.push(row.lower);
                continue;
            }
            if row.upper.is_finite() {
                p.g.push(r.clone());
                p.h.push(row.upper);
            }
            if row.lower.is_finite() {
                p.g.push(r.iter().map(|a| -a).collect());
                p.h.push(-row.lower);
            }
        }
        p
    }

    fn feasible(&self, x: &[f64], tol: f64) -> bool {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        self.g.iter().zip(&self.h).all(|(r, &h)| dot(r) <= h + tol)
            && self.e.iter().zip(&self.f).all(|(r, &f)| (dot(r) - f).abs() <= tol)
    }

    /// Minimizes `c x` over all vertices. Returns `None` if there are none.
    fn best_vertex(&self, c: &[f64]) -> Option<(f64, Vec<f64>)> {
        let n = self.n;
        let (e, f) = independent_rows(&self.e, &self.f)?;
        if e.len() > n {
            return None;
        }
        let k = n - e.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        combinations(self.g.len(), k, &mut |set| {
            let mut a = e.clone();
            let mut b = f.clone();
            for &i in set {
                a.push(self.g[i].clone());
                b.push(self.h[i]);
            }
            if let Some(x) = solve_dense(a, b) {
                let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if self.feasible(&x, 1e-9 * scale) {
                    let obj: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
                    if best.as_ref().is_none_or(|(o, _)| obj < *o) {
                        best = Some((obj, x));
                    }
                }
            }
        });
        best
    }
}

/// Vertex enumeration. Requires a pointed feasible region, which holds when
/// every column has a finite bound.
pub fn vertex_enumeration(m: &LinearModel) -> Reference {
    let p = Poly::from_model(m);
    let Some((obj, _)) = p.best_vertex(&m.objective) else {
        return Reference::Infeasible;
    };
    // Recession cone intersected with sum |d| normalisation: d_j >= 0 for
    // columns bounded below only, <= 0 for columns bounded above only.
    let n = m.num_vars();
    let mut cone = Poly {
        n,
        g: vec![],
        h: vec![],
        e: vec![],
        f: vec![],
    };
    let mut norm = vec![0.0; n];
    for (j, v) in m.vars.iter().enumerate() {
        if v.lower == v.upper {
            // Already an equality of the primal description.
            continue;
        }
        let mut r = vec![0.0; n];
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) => {
                r[j] = 1.0;
                cone.e.push(r);
                cone.f.push(0.0);
            }
            (true, false) => {
                r[j] = -1.0;
                cone.g.push(r);
                cone.h.push(0.0);
                norm[j] = 1.0;
            }
            (false, true) => {
                r[j] = 1.0;
                cone.g.push(r);
                cone.h.push(0.0);
                norm[j] = -1.0;
            }
            (false, false) => panic!("oracle needs every column bounded on one side"),
        }
    }
    for a in &p.g {
        cone.g.push(a.clone());
        cone.h.push(0.0);
    }
    for a in &p.e {
        cone.e.push(a.clone());
        cone.f.push(0.0);
    }
    if norm.iter().any(|&v| v != 0.0) {
        cone.e.push(norm);
        cone.f.push(1.0);
        if let Some((ray, _)) = cone.best_vertex(&m.objective) {
            if ray < -1e-9 {
                return Reference::Unbounded;
            }
        }
    }
    Reference::Optimal(obj + m.objective_offset)
}

/// Enumerates all assignments of the integer columns (each must be boxed)
/// and solves the continuous remainder by vertex enumeration.
pub fn exhaustive_mip(m: &LinearModel) -> Reference {
    let ints: Vec<usize> = m.integer_vars().map(|v| v.0).collect();
    let ranges: Vec<(i64, i64)> = ints
        .iter()
        .map(|&j| (m.vars[j].lower.ceil() as i64, m.vars[j].upper.floor() as i64))
        .collect();
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    let mut best = Reference::Infeasible;
    if ranges.iter().any(|r| r.0 > r.1) {
        return best;
    }
    loop {
        let mut fixed = m.clone();
        for (k, &j) in ints.iter().enumerate() {
            fixed.vars[j].lower = cur[k] as f64;
            fixed.vars[j].upper = cur[k] as f64;
            fixed.vars[j].integer = false;
        }
        match vertex_enumeration(&fixed) {
            Reference::Unbounded => return Reference::Unbounded,
            Reference::Optimal(o) => {
                if !matches!(best, Reference::Optimal(b) if b <= o) {
                    best = Reference::Optimal(o);
                }
            }
            Reference::Infeasible => {}
        }
        let mut k = 0;
        loop {
            if k == ints.len() {
                return best;
            }
            if cur[k] < ranges[k].1 {
                cur[k] += 1;
                break;
            }
            cur[k] = ranges[k].0;
            k += 1;
        }
    }
}

fn small_int(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.random_range(lo..=hi) as f64
}

/// Random LP with at most 8 columns and 6 rows. Columns are bounded below
/// (sometimes also above), so the feasible region is pointed.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LinearModel {
    let n = rng.random_range(1..=8);
    let m_rows = rng.random_range(1..=6);
    let mut m = LinearModel::new();
    let mut x0 = Vec::new();
    for j in 0..n {
        let lo = small_int(rng, -3, 2);
        let hi = if rng.random_bool(0.4) {
            lo + small_int(rng, 0, 6)
        } else {
            f64::INFINITY
        };
        let v = if rng.random_bool(0.1) {
            // Occasionally bounded only above.
            m.add_var(format!("x{j}"), f64::NEG_INFINITY, lo + 4.0)
        } else {
            m.add_var(format!("x{j}"), lo, hi)
        };
        m.set_cost(v, small_int(rng, -5, 5));
        let (l, u) = (m.vars[j].lower, m.vars[j].upper);
        let base = if l.is_finite() { l } else { u - 3.0 };
        let span = if u.is_finite() && l.is_finite() { u - l } else { 3.0 };
        x0.push(base + rng.random::<f64>() * span);
    }
    let mut eqs = 0;
    for i in 0..m_rows {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.6) {
                let a = small_int(rng, -4, 4);
                if a != 0.0 {
                    coeffs.push((ndcgem::solver::VarId(j), a));
                }
            }
        }
        let act: f64 = coeffs.iter().map(|&(v, a)| a * x0[v.0]).sum();
        // Mostly feasible at x0, sometimes cut off.
        let slack = if rng.random_bool(0.85) {
            small_int(rng, 0, 5)
        } else {
            -small_int(rng, 1, 20)
        };
        match rng.random_range(0..10) {
            0 if eqs == 0 && n >= 2 => {
                eqs += 1;
                m.add_constraint(format!("r{i}"), coeffs, Sense::Eq, act.round());
            }
            0..=4 => {
                m.add_constraint(format!("r{i}"), coeffs, Sense::Le, (act + slack).round());
            }
            5..=7 => {
                m.add_constraint(format!("r{i}"), coeffs, Sense::Ge, (act - slack).round());
            }
            _ => {
                let lo = (act - slack).round();
                let hi = lo + small_int(rng, 0, 6);
                m.add_range(format!("r{i}"), coeffs, lo, hi);
            }
        }
    }
    m
}

/// Random MILP with at most 12 binaries and up to 3 bounded continuous
/// columns.
pub fn random_milp(rng: &mut ChaCha8Rng) -> LinearModel {
    let nb = rng.random_range(1..=12);
    let nc = rng.random_range(0..=3);
    let mut m = LinearModel::new();
    for j in 0..nb {
        let v = m.add_binary(format!("b{j}"));
        m.set_cost(v, small_int(rng, -10, 10));
    }
    for j in 0..nc {
        let v = m.add_var(format!("c{j}"), 0.0, small_int(rng, 1, 8));
        m.set_cost(v, small_int(rng, -5, 5));
    }
    let n = nb + nc;
    let rows = rng.random_range(1..=5);
    for i in 0..rows {
        let mut coeffs = Vec::new();
        let mut pos = 0.0;
        for j in 0..n {
            if rng.random_bool(0.7) {
                let a = small_int(rng, -3, 9);
                if a != 0.0 {
                    pos += a.max(0.0);
                    coeffs.push((ndcgem::solver::VarId(j), a));
                }
            }
        }
        let rhs = (pos * rng.random_range(0.2..0.8)).round();
        if rng.random_bool(0.8) {
            m.add_constraint(format!("k{i}"), coeffs, Sense::Le, rhs);
        } else {
            m.add_constraint(format!("k{i}"), coeffs, Sense::Ge, (rhs * 0.3).round());
        }
    }
    m
}

/// Largest violation of dual feasibility, complementary slackness and
/// strong duality, each relative to the problem scale. Assumes the
/// `dual = d objective / d rhs` sign convention.
pub struct KktReport {
    pub duality_gap: f64,
    pub complementarity: f64,
    pub dual_infeasibility: f64,
}

pub fn kkt_report(m: &LinearModel, sol: &ndcgem::solver::LpSolution) -> KktReport {
    let n = m.num_vars();
    let y = &sol.row_duals;
    let x = &sol.x;
    // Reduced costs recomputed from the row duals.
    let mut d = m.objective.clone();
    for (i, row) in m.rows.iter().enumerate() {
        for &(v, a) in &row.coeffs {
            d[v.0] -= y[i] * a;
        }
    }
    let scale = 1.0 + sol.objective.abs();
    let mut dual_obj = m.objective_offset;
    let mut comp = 0.0f64;
    let mut dinf = 0.0f64;
    for (i, row) in m.rows.iter().enumerate() {
        let act = row.activity(x);
        let yi = y[i];
        if yi > 0.0 {
            dinf = dinf.max(if row.lower.is_finite() { 0.0 } else { yi });
            if row.lower.is_finite() {
                dual_obj += yi * row.lower;
                comp = comp.max((yi * (act - row.lower)).abs());
            }
        } else if yi < 0.0 {
            dinf = dinf.max(if row.upper.is_finite() { 0.0 } else { -yi });
            if row.upper.is_finite() {
                dual_obj += yi * row.upper;
                comp = comp.max((yi * (act - row.upper)).abs());
            }
        }
    }
    for j in 0..n {
        let v = &m.vars[j];
        let dj = d[j];
        if dj > 0.0 {
            if v.lower.is_finite() {
                dual_obj += dj * v.lower;
                comp = comp.max((dj * (x[j] - v.lower)).abs());
            } else {
                dinf = dinf.max(dj);
            }
        } else if dj < 0.0 {
            if v.upper.is_finite() {
                dual_obj += dj * v.upper;
                comp = comp.max((dj * (x[j] - v.upper)).abs());
            } else {
                dinf = dinf.max(-dj);
            }
        }
    }
    KktReport {
        duality_gap: (sol.objective - dual_obj).abs() / scale,
        complementarity: comp / scale,
        dual_infeasibility: dinf,
    }
}
