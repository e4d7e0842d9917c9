//! Bounded revised simplex over the computational form `[A | -I] z = 0`,
//! where the logical column of row `i` carries that row's bounds.
//!
//! Cold solves start from the all-logical basis. Dual infeasibilities that
//! cannot be removed by bound flips are absorbed by temporary cost shifts,
//! the dual simplex restores primal feasibility, and a primal phase removes
//! the shifts. Warm starts (branch and bound) re-enter the dual simplex
//! directly.

use super::lu::LuFactor;
use super::model::LinearModel;
use super::SolverError;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub(crate) enum Status {
    Basic = 0,
    AtLower = 1,
    AtUpper = 2,
    /// Nonbasic free column held at zero.
    AtZero = 3,
    Fixed = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    /// Dual objective reached the supplied cutoff.
    Cutoff,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOptions {
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub pivot_tol: f64,
    pub refactor_interval: usize,
    pub max_iterations: usize,
    /// Iterations without objective progress before Bland's rule kicks in.
    pub stall_threshold: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            primal_tol: 1e-7,
            dual_tol: 1e-7,
            pivot_tol: 1e-7,
            refactor_interval: 100,
            max_iterations: 2_000_000,
            stall_threshold: 500,
        }
    }
}

/// Snapshot of nonbasic/basic statuses, sufficient to rebuild a basis.
#[derive(Debug, Clone)]
pub(crate) struct BasisState {
    status: Vec<Status>,
}

pub(crate) struct Simplex {
    n: usize,
    m: usize,
    a_start: Vec<usize>,
    a_idx: Vec<usize>,
    a_val: Vec<f64>,
    r_start: Vec<usize>,
    r_idx: Vec<usize>,
    r_val: Vec<f64>,
    cost: Vec<f64>,
    shift: Vec<f64>,
    shifted: bool,
    lower: Vec<f64>,
    upper: Vec<f64>,
    status: Vec<Status>,
    basis: Vec<usize>,
    x: Vec<f64>,
    d: Vec<f64>,
    y: Vec<f64>,
    dse: Vec<f64>,
    lu: LuFactor,
    opts: SimplexOptions,
    pub iterations: usize,
    offset: f64,
    // scratch
    alpha_row: Vec<f64>,
    touched: Vec<usize>,
    mark: Vec<bool>,
    col_buf: Vec<f64>,
    rho: Vec<f64>,
    tau: Vec<f64>,
}

impl Simplex {
    pub fn new(model: &LinearModel, opts: SimplexOptions) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let mut counts = vec![0usize; n];
        let mut r_start = Vec::with_capacity(m + 1);
        let mut r_idx = Vec::new();
        let mut r_val = Vec::new();
        r_start.push(0);
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for row in &model.rows {
            merged.clear();
            merged.extend(row.coeffs.iter().map(|&(v, a)| (v.0, a)));
            merged.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < merged.len() {
                let j = merged[k].0;
                let mut a = 0.0;
                while k < merged.len() && merged[k].0 == j {
                    a += merged[k].1;
                    k += 1;
                }
                if a != 0.0 {
                    r_idx.push(j);
                    r_val.push(a);
                    counts[j] += 1;
                }
            }
            r_start.push(r_idx.len());
        }
        let mut a_start = vec![0usize; n + 1];
        for j in 0..n {
            a_start[j + 1] = a_start[j] + counts[j];
        }
        let mut fill = a_start.clone();
        let mut a_idx = vec![0usize; r_idx.len()];
        let mut a_val = vec![0.0; r_idx.len()];
        for i in 0..m {
            for q in r_start[i]..r_start[i + 1] {
                let j = r_idx[q];
                a_idx[fill[j]] = i;
                a_val[fill[j]] = r_val[q];
                fill[j] += 1;
            }
        }
        let mut cost = model.objective.clone();
        cost.resize(n + m, 0.0);
        let mut lower: Vec<f64> = model.vars.iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = model.vars.iter().map(|v| v.upper).collect();
        for r in &model.rows {
            lower.push(r.lower);
            upper.push(r.upper);
        }
        let mut s = Simplex {
            n,
            m,
            a_start,
            a_idx,
            a_val,
            r_start,
            r_idx,
            r_val,
            cost,
            shift: vec![0.0; n + m],
            shifted: false,
            lower,
            upper,
            status: vec![Status::AtLower; n + m],
            basis: (n..n + m).collect(),
            x: vec![0.0; n + m],
            d: vec![0.0; n + m],
            y: vec![0.0; m],
            dse: vec![1.0; m],
            lu: LuFactor::default(),
            opts,
            iterations: 0,
            offset: model.objective_offset,
            alpha_row: vec![0.0; n + m],
            touched: Vec::new(),
            mark: vec![false; n + m],
            col_buf: vec![0.0; m],
            rho: vec![0.0; m],
            tau: vec![0.0; m],
        };
        for j in 0..n {
            s.status[j] = s.default_nonbasic(j);
            s.x[j] = s.nonbasic_value(j);
        }
        for i in 0..m {
            s.status[n + i] = Status::Basic;
        }
        s
    }

    fn default_nonbasic(&self, j: usize) -> Status {
        let (l, u) = (self.lower[j], self.upper[j]);
        if l == u {
            Status::Fixed
        } else if l.is_finite() && u.is_finite() {
            if self.cost[j] < 0.0 {
                Status::AtUpper
            } else {
                Status::AtLower
            }
        } else if l.is_finite() {
            Status::AtLower
        } else if u.is_finite() {
            Status::AtUpper
        } else {
            Status::AtZero
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            Status::AtLower | Status::Fixed => self.lower[j],
            Status::AtUpper => self.upper[j],
            Status::AtZero => 0.0,
            Status::Basic => self.x[j],
        }
    }

    /// Coerces a nonbasic status into one consistent with the current bounds.
    fn repair_status(&mut self, j: usize) {
        let (l, u) = (self.lower[j], self.upper[j]);
        let st = self.status[j];
        let ok = match st {
            Status::Basic => true,
            Status::Fixed => l == u,
            Status::AtLower => l.is_finite() && l != u,
            Status::AtUpper => u.is_finite() && l != u,
            Status::AtZero => !l.is_finite() && !u.is_finite(),
        };
        if !ok {
            self.status[j] = if l == u {
                Status::Fixed
            } else if st == Status::AtUpper && l.is_finite() && !u.is_finite() {
                Status::AtLower
            } else if st == Status::AtLower && u.is_finite() && !l.is_finite() {
                Status::AtUpper
            } else {
                self.default_nonbasic(j)
            };
        }
    }

    pub fn set_var_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.status[j] != Status::Basic {
            self.repair_status(j);
            self.x[j] = self.nonbasic_value(j);
        }
    }

    pub fn var_bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn basis_state(&self) -> BasisState {
        BasisState {
            status: self.status.clone(),
        }
    }

    pub fn set_basis_state(&mut self, state: &BasisState) {
        self.status.clone_from(&state.status);
        self.basis.clear();
        for j in 0..self.n + self.m {
            if self.status[j] == Status::Basic {
                self.basis.push(j);
            } else {
                self.repair_status(j);
                self.x[j] = self.nonbasic_value(j);
            }
        }
        // Keep the basis square.
        if self.basis.len() != self.m {
            for i in 0..self.m {
                let j = self.n + i;
                if self.basis.len() < self.m && self.status[j] != Status::Basic {
                    self.status[j] = Status::Basic;
                    self.basis.push(j);
                }
            }
            while self.basis.len() > self.m {
                let j = self.basis.pop().unwrap();
                self.status[j] = self.default_nonbasic(j);
                self.x[j] = self.nonbasic_value(j);
            }
        }
    }

    fn for_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for q in self.a_start[j]..self.a_start[j + 1] {
                f(self.a_idx[q], self.a_val[q]);
            }
        } else {
            f(j - self.n, -1.0);
        }
    }

    fn refactor(&mut self) -> Result<(), SolverError> {
        for _attempt in 0..4 {
            let mut start = Vec::with_capacity(self.m + 1);
            let mut ent = Vec::new();
            start.push(0);
            for p in 0..self.m {
                let j = self.basis[p];
                self.for_col(j, |i, a| ent.push((i, a)));
                start.push(ent.len());
            }
            match LuFactor::factorize(self.m, &start, &ent) {
                Ok(lu) => {
                    self.lu = lu;
                    return Ok(());
                }
                Err(sing) => {
                    log::debug!("repairing singular basis ({} columns)", sing.positions.len());
                    for (&p, &r) in sing.positions.iter().zip(&sing.rows) {
                        let old = self.basis[p];
                        self.status[old] = self.default_nonbasic(old);
                        self.x[old] = self.nonbasic_value(old);
                        let j = self.n + r;
                        self.status[j] = Status::Basic;
                        self.basis[p] = j;
                        self.dse[p] = 1.0;
                    }
                }
            }
        }
        Err(SolverError::NumericalFailure(
            "basis remained singular after repair".into(),
        ))
    }

    fn compute_primal(&mut self) {
        let m = self.m;
        let mut rhs = std::mem::take(&mut self.col_buf);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n + m {
            if self.status[j] == Status::Basic {
                continue;
            }
            let v = self.x[j];
            if v != 0.0 {
                if j < self.n {
                    for q in self.a_start[j]..self.a_start[j + 1] {
                        rhs[self.a_idx[q]] -= self.a_val[q] * v;
                    }
                } else {
                    rhs[j - self.n] += v;
                }
            }
        }
        self.lu.ftran(&mut rhs);
        for p in 0..m {
            self.x[self.basis[p]] = rhs[p];
        }
        self.col_buf = rhs;
    }

    fn compute_duals(&mut self) {
        let m = self.m;
        let mut y = std::mem::take(&mut self.y);
        for p in 0..m {
            let j = self.basis[p];
            y[p] = self.cost[j] + self.shift[j];
        }
        self.lu.btran(&mut y);
        for j in 0..self.n {
            if self.status[j] == Status::Basic {
                self.d[j] = 0.0;
                continue;
            }
            let mut s = self.cost[j] + self.shift[j];
            for q in self.a_start[j]..self.a_start[j + 1] {
                s -= y[self.a_idx[q]] * self.a_val[q];
            }
            self.d[j] = s;
        }
        for i in 0..m {
            let j = self.n + i;
            self.d[j] = if self.status[j] == Status::Basic {
                0.0
            } else {
                self.shift[j] + y[i]
            };
        }
        self.y = y;
    }

    fn objective_internal(&self) -> f64 {
        let mut s = self.offset;
        for j in 0..self.n {
            s += (self.cost[j] + self.shift[j]) * self.x[j];
        }
        s
    }

    pub fn objective(&self) -> f64 {
        let mut s = self.offset;
        for j in 0..self.n {
            s += self.cost[j] * self.x[j];
        }
        s
    }

    pub fn primal(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    /// Row duals with the convention `dual = d objective / d rhs`.
    pub fn row_duals(&self) -> Vec<f64> {
        self.y.clone()
    }

    pub fn reduced_costs(&self) -> Vec<f64> {
        self.d[..self.n].to_vec()
    }

    fn primal_infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lower[j] - self.opts.primal_tol {
            v - self.lower[j]
        } else if v > self.upper[j] + self.opts.primal_tol {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    fn dual_infeasible(&self, j: usize) -> bool {
        let tol = self.opts.dual_tol;
        match self.status[j] {
            Status::Basic | Status::Fixed => false,
            Status::AtLower => self.d[j] < -tol,
            Status::AtUpper => self.d[j] > tol,
            Status::AtZero => self.d[j].abs() > tol,
        }
    }

    /// Flips boxed columns to their dual-feasible bound and shifts the cost
    /// of any column that cannot be flipped. Returns whether primal values
    /// changed.
    fn make_dual_feasible(&mut self) -> bool {
        let mut moved = false;
        for j in 0..self.n + self.m {
            if !self.dual_infeasible(j) {
                continue;
            }
            let (l, u) = (self.lower[j], self.upper[j]);
            match self.status[j] {
                Status::AtLower if u.is_finite() => {
                    self.status[j] = Status::AtUpper;
                    self.x[j] = u;
                    moved = true;
                }
                Status::AtUpper if l.is_finite() => {
                    self.status[j] = Status::AtLower;
                    self.x[j] = l;
                    moved = true;
                }
                _ => {
                    self.shift[j] -= self.d[j];
                    self.d[j] = 0.0;
                    self.shifted = true;
                }
            }
        }
        moved
    }

    fn clear_shifts(&mut self) {
        if self.shifted {
            self.shift.iter_mut().for_each(|s| *s = 0.0);
            self.shifted = false;
        }
    }

    /// Computes the pivot row `alpha_r = e_r^T B^-1 [A | -I]` into
    /// `alpha_row`, recording touched nonbasic indices.
    fn compute_pivot_row(&mut self, r: usize) {
        for &j in &self.touched {
            self.alpha_row[j] = 0.0;
            self.mark[j] = false;
        }
        self.touched.clear();
        let mut rho = std::mem::take(&mut self.rho);
        rho.iter_mut().for_each(|v| *v = 0.0);
        rho[r] = 1.0;
        self.lu.btran(&mut rho);
        for i in 0..self.m {
            let ri = rho[i];
            if ri == 0.0 || ri.abs() < 1e-14 {
                continue;
            }
            for q in self.r_start[i]..self.r_start[i + 1] {
                let j = self.r_idx[q];
                if self.status[j] == Status::Basic {
                    continue;
                }
                if !self.mark[j] {
                    self.mark[j] = true;
                    self.touched.push(j);
                }
                self.alpha_row[j] += ri * self.r_val[q];
            }
            let j = self.n + i;
            if self.status[j] != Status::Basic {
                if !self.mark[j] {
                    self.mark[j] = true;
                    self.touched.push(j);
                }
                self.alpha_row[j] -= ri;
            }
        }
        self.rho = rho;
    }

    fn ftran_column(&mut self, j: usize, out: &mut Vec<f64>) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            for q in self.a_start[j]..self.a_start[j + 1] {
                out[self.a_idx[q]] = self.a_val[q];
            }
        } else {
            out[j - self.n] = -1.0;
        }
        self.lu.ftran(out);
    }

    fn set_basis_member(&mut self, pos: usize, entering: usize, leaving_status: Status) {
        let leaving = self.basis[pos];
        self.status[leaving] = if self.lower[leaving] == self.upper[leaving] {
            Status::Fixed
        } else {
            leaving_status
        };
        self.status[entering] = Status::Basic;
        self.basis[pos] = entering;
    }

    fn refresh(&mut self) -> Result<(), SolverError> {
        self.refactor()?;
        self.compute_primal();
        self.compute_duals();
        Ok(())
    }

    /// Dual simplex from a dual feasible basis.
    fn dual_phase(&mut self, cutoff: Option<f64>) -> Result<Outcome, SolverError> {
        let m = self.m;
        let mut aq = vec![0.0; m];
        let mut stall = 0usize;
        let mut last_obj = f64::NEG_INFINITY;
        let mut bland = false;
        let mut since_check = 0usize;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(SolverError::IterationLimit(self.iterations));
            }
            if self.lu.num_updates() >= self.opts.refactor_interval
                || self.lu.eta_nnz() > 4 * self.lu.factor_nnz() + 10 * m
            {
                self.refresh()?;
                if self.make_dual_feasible() {
                    self.compute_primal();
                }
            }
            since_check += 1;
            if let Some(cut) = cutoff {
                if !self.shifted && since_check >= 10 {
                    since_check = 0;
                    if self.objective_internal() > cut {
                        return Ok(Outcome::Cutoff);
                    }
                }
            }

            // Leaving row.
            let mut r = NONE;
            let mut best = 0.0;
            for p in 0..m {
                let j = self.basis[p];
                let inf = self.primal_infeasibility(j);
                if inf != 0.0 {
                    if bland {
                        if r == NONE || j < self.basis[r] {
                            r = p;
                        }
                    } else {
                        let score = inf * inf / self.dse[p];
                        if score > best {
                            best = score;
                            r = p;
                        }
                    }
                }
            }
            if r == NONE {
                // Confirm with fresh factors before declaring optimality.
                if self.lu.num_updates() > 0 {
                    self.refresh()?;
                    if self.make_dual_feasible() {
                        self.compute_primal();
                    }
                    let any = (0..m).any(|p| self.primal_infeasibility(self.basis[p]) != 0.0);
                    if any {
                        continue;
                    }
                }
                return Ok(Outcome::Optimal);
            }
            let leaving = self.basis[r];
            let delta = self.primal_infeasibility(leaving);
            let s = if delta > 0.0 { 1.0 } else { -1.0 };

            self.compute_pivot_row(r);

            // Harris two-pass ratio test.
            let tol = self.opts.dual_tol;
            let ptol = self.opts.pivot_tol;
            let mut theta_max = f64::INFINITY;
            for &j in &self.touched {
                let a = s * self.alpha_row[j];
                let dj = self.d[j];
                let bound = match self.status[j] {
                    Status::AtLower if a > ptol => (dj + tol) / a,
                    Status::AtUpper if a < -ptol => (dj - tol) / a,
                    Status::AtZero if a.abs() > ptol => tol / a.abs(),
                    _ => continue,
                };
                if bound < theta_max {
                    theta_max = bound;
                }
            }
            if theta_max == f64::INFINITY {
                // Verify the ray against fresh factors once.
                if self.lu.num_updates() > 0 {
                    self.refresh()?;
                    if self.make_dual_feasible() {
                        self.compute_primal();
                    }
                    continue;
                }
                return Ok(Outcome::Infeasible);
            }
            let mut q = NONE;
            let mut qa = 0.0;
            for &j in &self.touched {
                let a = s * self.alpha_row[j];
                let dj = self.d[j];
                let ratio = match self.status[j] {
                    Status::AtLower if a > ptol => dj / a,
                    Status::AtUpper if a < -ptol => dj / a,
                    Status::AtZero if a.abs() > ptol => 0.0,
                    _ => continue,
                };
                if ratio <= theta_max {
                    let better = if bland {
                        q == NONE || j < q
                    } else {
                        a.abs() > qa
                    };
                    if better {
                        q = j;
                        qa = a.abs();
                    }
                }
            }
            debug_assert!(q != NONE);

            self.ftran_column(q, &mut aq);
            let arq = aq[r];
            let alpha_q = self.alpha_row[q];
            if (arq - alpha_q).abs() > 1e-7 * (1.0 + arq.abs()) || arq.abs() < 1e-11 {
                log::debug!("pivot mismatch {arq} vs {alpha_q}; refactoring");
                if self.lu.num_updates() == 0 {
                    return Err(SolverError::NumericalFailure(format!(
                        "unstable pivot {arq:e} vs {alpha_q:e}"
                    )));
                }
                self.refresh()?;
                if self.make_dual_feasible() {
                    self.compute_primal();
                }
                continue;
            }
            let theta_d = self.d[q] / arq;

            // DSE auxiliary vector.
            let mut tau = std::mem::take(&mut self.tau);
            tau.copy_from_slice(&self.rho);
            self.lu.ftran(&mut tau);

            // Primal update.
            let theta_p = delta / arq;
            for p in 0..m {
                let a = aq[p];
                if a != 0.0 {
                    self.x[self.basis[p]] -= theta_p * a;
                }
            }
            self.x[q] += theta_p;
            self.x[leaving] = if s > 0.0 {
                self.upper[leaving]
            } else {
                self.lower[leaving]
            };

            // Dual update.
            for &j in &self.touched {
                self.d[j] -= theta_d * self.alpha_row[j];
            }
            self.d[q] = 0.0;
            self.d[leaving] = -theta_d;

            // Steepest-edge weights.
            let wr = self.dse[r];
            for p in 0..m {
                let a = aq[p];
                if p != r && a != 0.0 {
                    let k = a / arq;
                    let w = self.dse[p] - 2.0 * k * tau[p] + k * k * wr;
                    self.dse[p] = if w.is_finite() { w.clamp(1e-4, 1e12) } else { 1.0 };
                }
            }
            let wq = wr / (arq * arq);
            self.dse[r] = if wq.is_finite() { wq.clamp(1e-8, 1e12) } else { 1.0 };
            self.tau = tau;

            self.set_basis_member(
                r,
                q,
                if s > 0.0 {
                    Status::AtUpper
                } else {
                    Status::AtLower
                },
            );
            self.lu.update(r, &aq);
            self.iterations += 1;

            let obj = self.objective_internal();
            if obj > last_obj + 1e-9 * (1.0 + obj.abs()) {
                last_obj = obj;
                stall = 0;
                bland = false;
            } else {
                stall += 1;
                if stall > self.opts.stall_threshold {
                    bland = true;
                }
            }
        }
    }

    /// Primal simplex from a primal feasible basis.
    fn primal_phase(&mut self) -> Result<Outcome, SolverError> {
        let m = self.m;
        let mut aq = vec![0.0; m];
        let mut stall = 0usize;
        let mut last_obj = f64::INFINITY;
        let mut bland = false;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(SolverError::IterationLimit(self.iterations));
            }
            if self.lu.num_updates() >= self.opts.refactor_interval {
                self.refresh()?;
            }
            // Entering column (Dantzig, or lowest index under Bland).
            let mut q = NONE;
            let mut best = 0.0;
            for j in 0..self.n + m {
                if self.dual_infeasible(j) {
                    if bland {
                        q = j;
                        break;
                    }
                    let v = self.d[j].abs();
                    if v > best {
                        best = v;
                        q = j;
                    }
                }
            }
            if q == NONE {
                if self.lu.num_updates() > 0 {
                    self.refresh()?;
                    if (0..self.n + m).any(|j| self.dual_infeasible(j)) {
                        continue;
                    }
                }
                return Ok(Outcome::Optimal);
            }
            let dir = if self.d[q] < 0.0 { 1.0 } else { -1.0 };
            self.ftran_column(q, &mut aq);

            let tol = self.opts.primal_tol;
            let ptol = self.opts.pivot_tol;
            let mut theta_max = f64::INFINITY;
            for p in 0..m {
                let g = dir * aq[p];
                if g.abs() <= ptol {
                    continue;
                }
                let j = self.basis[p];
                let lim = if g > 0.0 {
                    (self.x[j] - self.lower[j] + tol) / g
                } else {
                    (self.upper[j] - self.x[j] + tol) / -g
                };
                if lim < theta_max {
                    theta_max = lim;
                }
            }
            let span = self.upper[q] - self.lower[q];
            if theta_max == f64::INFINITY && !span.is_finite() {
                return Ok(Outcome::Unbounded);
            }
            let mut r = NONE;
            let mut rg = 0.0;
            let mut r_ratio = 0.0;
            for p in 0..m {
                let g = dir * aq[p];
                if g.abs() <= ptol {
                    continue;
                }
                let j = self.basis[p];
                let ratio = if g > 0.0 {
                    (self.x[j] - self.lower[j]) / g
                } else {
                    (self.upper[j] - self.x[j]) / -g
                }
                .max(0.0);
                if ratio <= theta_max {
                    let better = if bland {
                        r == NONE || j < self.basis[r]
                    } else {
                        g.abs() > rg
                    };
                    if better {
                        r = p;
                        rg = g.abs();
                        r_ratio = ratio;
                    }
                }
            }
            if span.is_finite() && (r == NONE || span <= r_ratio) {
                // Bound flip of the entering column.
                for p in 0..m {
                    let a = aq[p];
                    if a != 0.0 {
                        self.x[self.basis[p]] -= dir * span * a;
                    }
                }
                if dir > 0.0 {
                    self.status[q] = Status::AtUpper;
                    self.x[q] = self.upper[q];
                } else {
                    self.status[q] = Status::AtLower;
                    self.x[q] = self.lower[q];
                }
                self.iterations += 1;
                continue;
            }
            let theta = r_ratio;
            for p in 0..m {
                let a = aq[p];
                if a != 0.0 {
                    self.x[self.basis[p]] -= dir * theta * a;
                }
            }
            self.x[q] += dir * theta;
            let leaving = self.basis[r];
            let g = dir * aq[r];
            let leave_status = if g > 0.0 {
                self.x[leaving] = self.lower[leaving];
                Status::AtLower
            } else {
                self.x[leaving] = self.upper[leaving];
                Status::AtUpper
            };

            self.compute_pivot_row(r);
            let arq = aq[r];
            let theta_d = self.d[q] / arq;
            for &j in &self.touched {
                self.d[j] -= theta_d * self.alpha_row[j];
            }
            self.d[q] = 0.0;
            self.d[leaving] = -theta_d;
            self.set_basis_member(r, q, leave_status);
            self.lu.update(r, &aq);
            self.dse[r] = 1.0;
            self.iterations += 1;

            let obj = self.objective_internal();
            if obj < last_obj - 1e-9 * (1.0 + obj.abs()) {
                last_obj = obj;
                stall = 0;
                bland = false;
            } else {
                stall += 1;
                if stall > self.opts.stall_threshold {
                    bland = true;
                }
            }
        }
    }

    fn max_primal_infeasibility(&self) -> f64 {
        (0..self.m)
            .map(|p| self.primal_infeasibility(self.basis[p]).abs())
            .fold(0.0, f64::max)
    }

    /// Solves from the current basis. With `cutoff`, stops early once the
    /// dual bound exceeds it.
    pub fn solve(&mut self, cutoff: Option<f64>) -> Result<Outcome, SolverError> {
        self.clear_shifts();
        self.refresh()?;
        for _ in 0..6 {
            if self.make_dual_feasible() {
                self.compute_primal();
            }
            match self.dual_phase(cutoff)? {
                Outcome::Optimal => {}
                other => {
                    self.clear_shifts();
                    return Ok(other);
                }
            }
            if self.shifted {
                self.clear_shifts();
                self.compute_duals();
            }
            if let Outcome::Unbounded = self.primal_phase()? {
                return Ok(Outcome::Unbounded);
            }
            self.refresh()?;
            let dual_ok = !(0..self.n + self.m).any(|j| self.dual_infeasible(j));
            if self.max_primal_infeasibility() == 0.0 && dual_ok {
                return Ok(Outcome::Optimal);
            }
        }
        Err(SolverError::NumericalFailure(
            "simplex failed to settle on an optimal basis".into(),
        ))
    }
}
