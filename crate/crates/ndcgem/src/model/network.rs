use nalgebra::DMatrix;

use super::{JointSystem, ModelError};

/// Shift factors `gamma[line][bus]`: flow on a line per MW injected at a
/// bus and withdrawn at the slack.
#[derive(Debug, Clone, PartialEq)]
pub struct PtdfMatrix {
    pub gamma: Vec<Vec<f64>>,
}

impl PtdfMatrix {
    pub fn get(&self, line: usize, bus: usize) -> f64 {
        self.gamma[line][bus]
    }

    /// Line flows for a balanced injection vector.
    pub fn flows(&self, injection: &[f64]) -> Vec<f64> {
        self.gamma
            .iter()
            .map(|row| row.iter().zip(injection).map(|(g, p)| g * p).sum())
            .collect()
    }
}

/// DC power-flow shift factors with susceptance `1 / reactance`.
pub fn compute_ptdf(sys: &JointSystem) -> Result<PtdfMatrix, ModelError> {
    let n = sys.buses.len();
    let slack = sys.index.slack;
    let red = |b: usize| if b < slack { Some(b) } else if b > slack { Some(b - 1) } else { None };
    let mut bmat = DMatrix::<f64>::zeros(n - 1, n - 1);
    for (l, &(f, t)) in sys.lines.iter().zip(&sys.index.line_ends) {
        let b = 1.0 / l.reactance;
        for (i, si) in [(f, 1.0), (t, -1.0)] {
            for (j, sj) in [(f, 1.0), (t, -1.0)] {
                if let (Some(ri), Some(rj)) = (red(i), red(j)) {
                    bmat[(ri, rj)] += si * sj * b;
                }
            }
        }
    }
    let x = if n > 1 {
        bmat.try_inverse().ok_or(ModelError::SingularSusceptance)?
    } else {
        bmat
    };
    let xv = |i: usize, j: usize| match (red(i), red(j)) {
        (Some(a), Some(b)) => x[(a, b)],
        _ => 0.0,
    };
    let gamma = sys
        .lines
        .iter()
        .zip(&sys.index.line_ends)
        .map(|(l, &(f, t))| {
            let b = 1.0 / l.reactance;
            (0..n).map(|m| b * (xv(f, m) - xv(t, m))).collect()
        })
        .collect();
    Ok(PtdfMatrix { gamma })
}

/// Assets attached to each gas node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GasAdjacency {
    /// Nodes linked by a pipeline or compressor.
    pub neighbors: Vec<Vec<usize>>,
    pub suppliers: Vec<Vec<usize>>,
    pub loads: Vec<Vec<usize>>,
    /// Unit indices of GFUs drawing gas at the node.
    pub gfus: Vec<Vec<usize>>,
    /// Compressors whose gas draw is taken from the node.
    pub compressors: Vec<Vec<usize>>,
}

pub fn gas_adjacency(sys: &JointSystem) -> GasAdjacency {
    let n = sys.gas_nodes.len();
    let ix = &sys.index;
    let mut a = GasAdjacency {
        neighbors: vec![Vec::new(); n],
        suppliers: vec![Vec::new(); n],
        loads: vec![Vec::new(); n],
        gfus: vec![Vec::new(); n],
        compressors: vec![Vec::new(); n],
    };
    for &(f, t) in ix.pipe_ends.iter().chain(&ix.comp_ends) {
        a.neighbors[f].push(t);
        a.neighbors[t].push(f);
    }
    for nb in &mut a.neighbors {
        nb.sort_unstable();
        nb.dedup();
    }
    for (s, &node) in ix.supplier_node.iter().enumerate() {
        a.suppliers[node].push(s);
    }
    for (d, &node) in ix.load_node.iter().enumerate() {
        a.loads[node].push(d);
    }
    for (g, node) in ix.unit_gas_node.iter().enumerate() {
        if let Some(node) = node {
            a.gfus[*node].push(g);
        }
    }
    for (c, &node) in ix.comp_tap.iter().enumerate() {
        a.compressors[node].push(c);
    }
    a
}
