use highs::{HighsModelStatus, Model, RowProblem, Sense as HSense};

use super::{
    Backend, LinearModel, LpSolution, LpStatus, MipOptions, MipSolution, MipStatus, SolverError,
};

/// Backend on the HiGHS dual simplex and branch and cut. Each call builds
/// a fresh single-threaded HiGHS instance, so calls may run in parallel.
#[derive(Debug, Clone, Copy)]
pub struct HighsBackend {
    presolve: bool,
}

impl Default for HighsBackend {
    fn default() -> Self {
        Self { presolve: true }
    }
}

impl HighsBackend {
    pub fn new() -> Self {
        Self::default()
    }

    fn model(&self, lm: &LinearModel, integer: bool, presolve: bool) -> Model {
        let mut pb = RowProblem::default();
        let cols: Vec<_> = lm
            .vars
            .iter()
            .zip(&lm.objective)
            .map(|(v, &c)| {
                let r = v.lower..=v.upper;
                if integer && v.integer {
                    pb.add_integer_column(c, r)
                } else {
                    pb.add_column(c, r)
                }
            })
            .collect();
        for row in &lm.rows {
            let coeffs: Vec<_> = row.coeffs.iter().map(|&(v, a)| (cols[v.0], a)).collect();
            pb.add_row(row.lower..=row.upper, &coeffs);
        }
        let mut model = Model::new(pb);
        model.make_quiet();
        model.set_option("threads", 1);
        model.set_option("primal_feasibility_tolerance", 1e-9);
        model.set_option("dual_feasibility_tolerance", 1e-9);
        if !presolve {
            model.set_option("presolve", "off");
        }
        model.set_sense(HSense::Minimise);
        model
    }

    fn lp(&self, lm: &LinearModel, presolve: bool) -> Result<LpSolution, SolverError> {
        let (n, m) = (lm.num_vars(), lm.num_rows());
        if n == 0 {
            return Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: lm.objective_offset,
                x: Vec::new(),
                row_duals: vec![0.0; m],
                reduced_costs: Vec::new(),
                iterations: 0,
            });
        }
        let solved = self
            .model(lm, false, presolve)
            .try_solve()
            .map_err(|s| SolverError::NumericalFailure(format!("HiGHS returned {s:?}")))?;
        let iterations = solved.simplex_iteration_count().max(0) as usize;
        match solved.status() {
            HighsModelStatus::Optimal => {
                let sol = solved.get_solution();
                Ok(LpSolution {
                    status: LpStatus::Optimal,
                    objective: solved.objective_value() + lm.objective_offset,
                    x: sol.columns().to_vec(),
                    row_duals: sol.dual_rows().to_vec(),
                    reduced_costs: sol.dual_columns().to_vec(),
                    iterations,
                })
            }
            HighsModelStatus::Infeasible => Ok(LpSolution::without_solution(
                LpStatus::Infeasible,
                n,
                m,
                iterations,
            )),
            HighsModelStatus::Unbounded => Ok(LpSolution::without_solution(
                LpStatus::Unbounded,
                n,
                m,
                iterations,
            )),
            // Presolve cannot tell these apart; the simplex can.
            HighsModelStatus::UnboundedOrInfeasible if presolve => self.lp(lm, false),
            other => Err(SolverError::NumericalFailure(format!(
                "HiGHS model status {other:?}"
            ))),
        }
    }
}

impl Backend for HighsBackend {
    fn solve_lp(&self, model: &LinearModel) -> Result<LpSolution, SolverError> {
        model.validate()?;
        self.lp(model, self.presolve)
    }

    fn solve_mip(
        &self,
        lm: &LinearModel,
        opts: &MipOptions,
    ) -> Result<MipSolution, SolverError> {
        lm.validate()?;
        let n = lm.num_vars();
        let empty = |status| MipSolution {
            status,
            objective: f64::NAN,
            bound: f64::NAN,
            x: vec![f64::NAN; n],
            nodes: 0,
            lp_iterations: 0,
        };
        if n == 0 {
            let mut s = empty(MipStatus::Optimal);
            s.objective = lm.objective_offset;
            s.bound = lm.objective_offset;
            s.x = Vec::new();
            return Ok(s);
        }
        let mut model = self.model(lm, true, self.presolve);
        model.set_option("mip_rel_gap", opts.rel_gap);
        model.set_option("mip_feasibility_tolerance", opts.integrality_tol);
        model.set_option("mip_max_nodes", opts.node_limit.min(i32::MAX as usize) as i32);
        let solved = model
            .try_solve()
            .map_err(|s| SolverError::NumericalFailure(format!("HiGHS returned {s:?}")))?;
        let nodes = solved
            .int_info_value(c"mip_node_count")
            .unwrap_or(0)
            .max(0) as usize;
        let lp_iterations = solved.simplex_iteration_count().max(0) as usize;
        let has_solution = solved.primal_solution_status() == highs::HighsSolutionStatus::Feasible;
        let status = match solved.status() {
            HighsModelStatus::Optimal => MipStatus::Optimal,
            HighsModelStatus::Infeasible => MipStatus::Infeasible,
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                MipStatus::Unbounded
            }
            HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
                if has_solution =>
            {
                MipStatus::Feasible
            }
            HighsModelStatus::ReachedSolutionLimit => return Err(SolverError::NodeLimit),
            other => {
                return Err(SolverError::NumericalFailure(format!(
                    "HiGHS model status {other:?}"
                )))
            }
        };
        if !matches!(status, MipStatus::Optimal | MipStatus::Feasible) {
            let mut s = empty(status);
            s.nodes = nodes;
            s.lp_iterations = lp_iterations;
            return Ok(s);
        }
        let mut x = solved.get_solution().columns().to_vec();
        for (v, xv) in lm.vars.iter().zip(x.iter_mut()) {
            if v.integer {
                *xv = xv.round();
            }
        }
        let objective = lm.objective_value(&x);
        let bound = solved
            .double_info_value(c"mip_dual_bound")
            .map(|b| b + lm.objective_offset)
            .unwrap_or(objective)
            .min(objective);
        Ok(MipSolution {
            status,
            objective,
            bound,
            x,
            nodes,
            lp_iterations,
        })
    }
}
