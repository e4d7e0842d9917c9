//! Linear and mixed-integer programming.
//!
//! Everything above this module talks to a [`Backend`]. [`HighsBackend`]
//! wraps HiGHS and is the default for market clearing. [`NativeBackend`]
//! is a self-contained sparse bounded dual simplex with best-first branch
//! and bound, fine for small models and used to cross-check HiGHS.

mod highs;
pub mod lpfile;
mod lu;
mod mip;
pub mod model;
mod simplex;

use thiserror::Error;

pub use self::highs::HighsBackend;

pub use model::{Constraint, LinearModel, RowId, Sense, VarId, Variable};
use simplex::{Outcome, Simplex, SimplexOptions};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("iteration limit reached after {0} iterations")]
    IterationLimit(usize),
    #[error("node limit reached without an integer solution")]
    NodeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP solve. Duals follow `dual = d objective / d rhs`: a
/// binding `>=` row in a minimization has a nonnegative dual and a binding
/// `<=` row a nonpositive one.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    fn without_solution(status: LpStatus, n: usize, m: usize, iterations: usize) -> Self {
        Self {
            status,
            objective: f64::NAN,
            x: vec![f64::NAN; n],
            row_duals: vec![f64::NAN; m],
            reduced_costs: vec![f64::NAN; n],
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    /// Proven optimal within the relative gap.
    Optimal,
    /// Node limit hit with an incumbent whose gap is still open.
    Feasible,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct MipSolution {
    pub status: MipStatus,
    pub objective: f64,
    /// Best proven lower bound.
    pub bound: f64,
    pub x: Vec<f64>,
    pub nodes: usize,
    pub lp_iterations: usize,
}

impl MipSolution {
    pub fn gap(&self) -> f64 {
        (self.objective - self.bound).max(0.0) / self.objective.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MipOptions {
    /// Relative optimality gap used for pruning.
    pub rel_gap: f64,
    pub integrality_tol: f64,
    pub node_limit: usize,
}

impl Default for MipOptions {
    fn default() -> Self {
        Self {
            rel_gap: 1e-4,
            integrality_tol: 1e-6,
            node_limit: 200_000,
        }
    }
}

/// Solver interface used by the market-clearing code.
pub trait Backend: Send + Sync {
    fn solve_lp(&self, model: &LinearModel) -> Result<LpSolution, SolverError>;

    fn solve_mip(&self, model: &LinearModel, opts: &MipOptions)
        -> Result<MipSolution, SolverError>;

    /// Fixes every integer column to the rounded entry of `values` and
    /// solves the remaining LP, giving duals for pricing.
    fn fix_and_resolve(
        &self,
        model: &LinearModel,
        values: &[f64],
    ) -> Result<LpSolution, SolverError> {
        let mut fixed = model.clone();
        for v in model.integer_vars() {
            let r = values[v.0].round();
            fixed.vars[v.0].lower = r;
            fixed.vars[v.0].upper = r;
            fixed.vars[v.0].integer = false;
        }
        self.solve_lp(&fixed)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NativeBackend {
    opts: SimplexOptions,
}

impl NativeBackend {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Backend for NativeBackend {
    fn solve_lp(&self, model: &LinearModel) -> Result<LpSolution, SolverError> {
        model.validate()?;
        let mut lp = Simplex::new(model, self.opts);
        let outcome = lp.solve(None)?;
        let (n, m) = (model.num_vars(), model.num_rows());
        Ok(match outcome {
            Outcome::Optimal => LpSolution {
                status: LpStatus::Optimal,
                objective: lp.objective(),
                x: lp.primal(),
                row_duals: lp.row_duals(),
                reduced_costs: lp.reduced_costs(),
                iterations: lp.iterations,
            },
            Outcome::Infeasible => {
                LpSolution::without_solution(LpStatus::Infeasible, n, m, lp.iterations)
            }
            Outcome::Unbounded => {
                LpSolution::without_solution(LpStatus::Unbounded, n, m, lp.iterations)
            }
            Outcome::Cutoff => unreachable!("no cutoff was set"),
        })
    }

    fn solve_mip(
        &self,
        model: &LinearModel,
        opts: &MipOptions,
    ) -> Result<MipSolution, SolverError> {
        model.validate()?;
        mip::branch_and_bound(model, opts, self.opts)
    }
}
