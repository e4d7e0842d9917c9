use rayon::prelude::*;

use super::ScenarioError;

/// Kept scenarios (ascending sample index) and their redistributed weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub selected: Vec<usize>,
    pub weights: Vec<f64>,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Fast-forward selection of `k` out of `samples` under the Euclidean
/// distance. Each step keeps the sample minimizing the probability-weighted
/// distance of the remaining samples to the kept set; dropped samples then
/// pass their weight to the nearest kept sample (lower index on ties).
pub fn fast_forward_reduce(
    samples: &[Vec<f64>],
    weights: &[f64],
    k: usize,
) -> Result<Reduction, ScenarioError> {
    let n = samples.len();
    if k == 0 || k > n || weights.len() != n {
        return Err(ScenarioError::BadReduction { n, k });
    }
    let dist: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|a| samples.iter().map(|b| euclid(a, b)).collect())
        .collect();
    let mut near = vec![f64::INFINITY; n];
    let mut kept = vec![false; n];
    for _ in 0..k {
        let z: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|u| {
                if kept[u] {
                    return f64::INFINITY;
                }
                let mut s = 0.0;
                for i in 0..n {
                    if !kept[i] && i != u {
                        s += weights[i] * near[i].min(dist[i][u]);
                    }
                }
                s
            })
            .collect();
        let mut best = usize::MAX;
        for u in 0..n {
            if !kept[u] && (best == usize::MAX || z[u] < z[best]) {
                best = u;
            }
        }
        kept[best] = true;
        for i in 0..n {
            near[i] = near[i].min(dist[i][best]);
        }
    }
    let selected: Vec<usize> = (0..n).filter(|&i| kept[i]).collect();
    let mut w: Vec<f64> = selected.iter().map(|&s| weights[s]).collect();
    for i in 0..n {
        if kept[i] {
            continue;
        }
        let mut arg = 0;
        for (pos, &s) in selected.iter().enumerate() {
            if dist[i][s] < dist[i][selected[arg]] {
                arg = pos;
            }
        }
        w[arg] += weights[i];
    }
    Ok(Reduction {
        selected,
        weights: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_example() {
        let s = vec![vec![0.0], vec![1.0], vec![10.0]];
        let r = fast_forward_reduce(&s, &[1.0 / 3.0; 3], 1).unwrap();
        assert_eq!(r.selected, vec![1]);
        assert!((r.weights[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_when_keeping_all() {
        let s: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let r = fast_forward_reduce(&s, &[0.2; 5], 5).unwrap();
        assert_eq!(r.selected, vec![0, 1, 2, 3, 4]);
        assert!(r.weights.iter().all(|&w| (w - 0.2).abs() < 1e-15));
    }

    #[test]
    fn rejects_k_above_n() {
        assert!(fast_forward_reduce(&[vec![1.0]], &[1.0], 2).is_err());
    }
}
