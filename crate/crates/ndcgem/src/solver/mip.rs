//! Best-first branch and bound on top of the dual simplex.
//!
//! Until the first incumbent is found the search dives depth-first, taking
//! the child closer to the fractional value first. Children are re-solved
//! from the parent's basis.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;

use super::model::LinearModel;
use super::simplex::{BasisState, Outcome, Simplex, SimplexOptions};
use super::{MipOptions, MipSolution, MipStatus, SolverError};

struct Node {
    bound: f64,
    seq: usize,
    /// Bounds of the integer columns, parallel to the integer index list.
    lower: Vec<f64>,
    upper: Vec<f64>,
    basis: Rc<BasisState>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Reversed so BinaryHeap pops the smallest bound, oldest first on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn most_fractional(x: &[f64], ints: &[usize], tol: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut best_frac = tol;
    for (k, &j) in ints.iter().enumerate() {
        let v = x[j];
        let f = (v - v.floor()).min(v.ceil() - v);
        if f > best_frac {
            best_frac = f;
            best = Some((k, v));
        }
    }
    best
}

pub(crate) fn branch_and_bound(
    model: &LinearModel,
    opts: &MipOptions,
    sopts: SimplexOptions,
) -> Result<MipSolution, SolverError> {
    let ints: Vec<usize> = model.integer_vars().map(|v| v.0).collect();
    let mut lp = Simplex::new(model, sopts);
    for &j in &ints {
        let (l, u) = lp.var_bounds(j);
        lp.set_var_bounds(j, l.ceil(), u.floor());
    }
    let root_lower: Vec<f64> = ints.iter().map(|&j| lp.var_bounds(j).0).collect();
    let root_upper: Vec<f64> = ints.iter().map(|&j| lp.var_bounds(j).1).collect();
    let n = model.num_vars();
    let empty = |status| MipSolution {
        status,
        objective: f64::NAN,
        bound: f64::NAN,
        x: vec![f64::NAN; n],
        nodes: 0,
        lp_iterations: 0,
    };
    if root_lower.iter().zip(&root_upper).any(|(l, u)| l > u) {
        return Ok(empty(MipStatus::Infeasible));
    }

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut dive: Vec<Node> = Vec::new();
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut seq = 0usize;
    dive.push(Node {
        bound: f64::NEG_INFINITY,
        seq,
        lower: root_lower,
        upper: root_upper,
        basis: Rc::new(lp.basis_state()),
    });
    let mut nodes = 0usize;
    let mut root_bound = f64::NEG_INFINITY;

    let abs_gap = |inc: f64| opts.rel_gap * inc.abs().max(1.0);

    loop {
        let node = if incumbent.is_none() {
            match dive.pop() {
                Some(nd) => nd,
                None => break,
            }
        } else {
            if !dive.is_empty() {
                heap.extend(dive.drain(..));
            }
            match heap.pop() {
                Some(nd) => nd,
                None => break,
            }
        };
        if let Some((inc, _)) = &incumbent {
            if node.bound >= inc - abs_gap(*inc) {
                // Best-first order: every remaining node is pruned too.
                heap.clear();
                break;
            }
        }
        if nodes >= opts.node_limit {
            heap.push(node);
            break;
        }
        nodes += 1;
        if nodes % 500 == 0 {
            log::debug!(
                "node {nodes}: {} open, bound {:.6e}, incumbent {:?}, {} LP iterations",
                heap.len() + dive.len(),
                node.bound,
                incumbent.as_ref().map(|(o, _)| *o),
                lp.iterations
            );
        }

        for (k, &j) in ints.iter().enumerate() {
            lp.set_var_bounds(j, node.lower[k], node.upper[k]);
        }
        lp.set_basis_state(&node.basis);
        let cutoff = incumbent.as_ref().map(|(inc, _)| inc - abs_gap(*inc));
        match lp.solve(cutoff)? {
            Outcome::Infeasible | Outcome::Cutoff => continue,
            Outcome::Unbounded => {
                if nodes == 1 {
                    let mut s = empty(MipStatus::Unbounded);
                    s.nodes = nodes;
                    s.lp_iterations = lp.iterations;
                    return Ok(s);
                }
                return Err(SolverError::NumericalFailure(
                    "unbounded subproblem below a bounded root".into(),
                ));
            }
            Outcome::Optimal => {}
        }
        let obj = lp.objective();
        if nodes == 1 {
            root_bound = obj;
        }
        if let Some((inc, _)) = &incumbent {
            if obj >= inc - abs_gap(*inc) {
                continue;
            }
        }
        let x = lp.primal();
        match most_fractional(&x, &ints, opts.integrality_tol) {
            None => {
                let mut xi = x;
                for &j in &ints {
                    xi[j] = xi[j].round();
                }
                log::debug!("incumbent {obj} at node {nodes}");
                incumbent = Some((obj, xi));
            }
            Some((k, v)) => {
                let basis = Rc::new(lp.basis_state());
                let mut down_upper = node.upper.clone();
                down_upper[k] = v.floor();
                let mut up_lower = node.lower.clone();
                up_lower[k] = v.ceil();
                let down = Node {
                    bound: obj,
                    seq: seq + 1,
                    lower: node.lower.clone(),
                    upper: down_upper,
                    basis: Rc::clone(&basis),
                };
                let up = Node {
                    bound: obj,
                    seq: seq + 2,
                    lower: up_lower,
                    upper: node.upper,
                    basis,
                };
                seq += 2;
                if incumbent.is_none() {
                    // Last pushed is explored first.
                    if v - v.floor() < 0.5 {
                        dive.push(up);
                        dive.push(down);
                    } else {
                        dive.push(down);
                        dive.push(up);
                    }
                } else {
                    heap.push(down);
                    heap.push(up);
                }
            }
        }
    }

    match incumbent {
        None if nodes >= opts.node_limit => Err(SolverError::NodeLimit),
        None => {
            let mut s = empty(MipStatus::Infeasible);
            s.nodes = nodes;
            s.lp_iterations = lp.iterations;
            Ok(s)
        }
        Some((obj, x)) => {
            let open = heap
                .iter()
                .map(|nd| nd.bound)
                .chain(dive.iter().map(|nd| nd.bound))
                .fold(f64::INFINITY, f64::min);
            let bound = open.min(obj).max(root_bound.min(obj));
            let open_gap = nodes >= opts.node_limit && (obj - bound) > abs_gap(obj);
            if open_gap {
                log::warn!(
                    "node limit reached with relative gap {:.3e}",
                    (obj - bound) / obj.abs().max(1.0)
                );
            }
            Ok(MipSolution {
                status: if open_gap {
                    MipStatus::Feasible
                } else {
                    MipStatus::Optimal
                },
                objective: obj,
                bound,
                x,
                nodes,
                lp_iterations: lp.iterations,
            })
        }
    }
}
