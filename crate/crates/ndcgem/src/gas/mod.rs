//! Gas transmission physics and the hourly deliverability check.

mod slp;

use thiserror::Error;

use crate::master::{CutTerm, FeasibilityCut};
use crate::model::Compressor;
use crate::solver::SolverError;

pub use slp::{solve_subproblem, HourInput, SlpOptions};

#[derive(Debug, Error)]
pub enum GasError {
    #[error("compressor {id}: pressure ratio {ratio:.4} leaves a nonpositive denominator")]
    CompressorDomain { id: String, ratio: f64 },
    #[error("hour {hour}: {what} has {got} entries, expected {want}")]
    Dimension {
        hour: usize,
        what: &'static str,
        got: usize,
        want: usize,
    },
    #[error("sub-problem for hour {0} has no duals to build a cut from")]
    MissingDuals(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Weymouth flow from `m` to `n` for pressures in psia.
pub fn pipeline_flow(pi_m: f64, pi_n: f64, c: f64) -> f64 {
    let d = pi_m * pi_m - pi_n * pi_n;
    sgn(d) * c * d.abs().sqrt()
}

/// Flow through a compressor driven with power `h`.
pub fn compressor_flow(pi_m: f64, pi_n: f64, h: f64, comp: &Compressor) -> Result<f64, GasError> {
    let hi = pi_m.max(pi_n);
    let lo = pi_m.min(pi_n);
    let ratio = hi / lo;
    let denom = comp.k2 - comp.k1 * ratio.powf(comp.alpha);
    if !(denom > 0.0) {
        return Err(GasError::CompressorDomain {
            id: comp.id.clone(),
            ratio,
        });
    }
    Ok(sgn(pi_m * pi_m - pi_n * pi_n) * h / denom)
}

/// Gas burned by a compressor at power `h`, from `[a2, a1, a0]`.
pub fn compressor_gas(h: f64, coeffs: &[f64; 3]) -> f64 {
    let [a2, a1, a0] = *coeffs;
    a2 * h * h + a1 * h + a0
}

/// Converged network state of one hour.
#[derive(Debug, Clone, PartialEq)]
pub struct GasState {
    /// Nodal pressure, psia.
    pub pressure: Vec<f64>,
    pub pipe_flow: Vec<f64>,
    pub comp_power: Vec<f64>,
    pub comp_flow: Vec<f64>,
    pub comp_gas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SubproblemResult {
    pub hour: usize,
    /// Penalty cost of the adjustments needed to make the schedule
    /// deliverable, $.
    pub g_star: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Value of injecting one kcf/h at each node ($ per kcf/h); nonpositive
    /// where the network is short. Present when the final LP solved.
    pub node_values: Option<Vec<f64>>,
    /// Delivered capacity per unit; zero for conventional units.
    pub delivered: Vec<f64>,
    /// Extra curtailment per gas load.
    pub extra_curtailment: Vec<f64>,
    pub supply_adjustment: Vec<f64>,
    /// Undelivered booked capacity plus extra curtailment, kcf/h.
    pub unsatisfied: f64,
    /// Largest Weymouth residual of the final linearization, relative to
    /// `max(1, |y|)`.
    pub max_residual: f64,
    pub state: GasState,
}

impl SubproblemResult {
    /// Total compressor gas draw, kcf/h.
    pub fn compressor_gas(&self) -> f64 {
        self.state.comp_gas.iter().sum()
    }
}

/// Linear cut from a sub-problem whose check failed. GFU and load terms
/// take the node value at their node; terms at dual-noise level are
/// dropped. Returns `None` when no term survives.
pub fn generate_cut(
    res: &SubproblemResult,
    input: &HourInput,
    unit_node: &[Option<usize>],
    load_node: &[usize],
    iteration: usize,
) -> Result<Option<FeasibilityCut>, GasError> {
    let values = res
        .node_values
        .as_ref()
        .ok_or(GasError::MissingDuals(res.hour))?;
    let floor = 1e-7 * values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut booking = Vec::new();
    for (g, node) in unit_node.iter().enumerate() {
        if let Some(n) = node {
            let coef = -values[*n];
            if coef.abs() > floor {
                booking.push(CutTerm {
                    index: g,
                    coef,
                    at: input.booked[g],
                });
            }
        }
    }
    let mut curtailment = Vec::new();
    for (d, &n) in load_node.iter().enumerate() {
        let coef = values[n];
        if coef.abs() > floor {
            curtailment.push(CutTerm {
                index: d,
                coef,
                at: input.curtailed[d],
            });
        }
    }
    if booking.is_empty() && curtailment.is_empty() {
        log::warn!(
            "hour {}: G* = {:.6e} but all node values vanish, no cut",
            res.hour,
            res.g_star
        );
        return Ok(None);
    }
    Ok(Some(FeasibilityCut {
        hour: res.hour,
        iteration,
        g_star: res.g_star,
        booking,
        curtailment,
        dual: 0.0,
    }))
}
