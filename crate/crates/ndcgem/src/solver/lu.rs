//! Sparse LU factorization of simplex bases.
//!
//! The basis is factored with Markowitz pivot selection under threshold
//! partial pivoting. Basis changes between refactorizations are kept as a
//! product-form eta file.

const NONE: usize = usize::MAX;
/// Threshold for accepting a pivot relative to the largest entry of its column.
const PIVOT_THRESHOLD: f64 = 0.01;
/// Candidate columns/rows inspected before settling on the best Markowitz cost.
const SEARCH_LIMIT: usize = 4;
const DROP_TOL: f64 = 1e-14;
const ABS_PIVOT_TOL: f64 = 1e-11;

/// Basis positions that could not be pivoted, paired with rows left uncovered.
#[derive(Debug, Clone)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

/// Intrusive doubly linked lists of indices bucketed by nonzero count.
struct Buckets {
    head: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    count: Vec<usize>,
}

impl Buckets {
    fn new(n: usize, max_count: usize) -> Self {
        Self {
            head: vec![NONE; max_count + 2],
            next: vec![NONE; n],
            prev: vec![NONE; n],
            count: vec![NONE; n],
        }
    }

    fn insert(&mut self, i: usize, c: usize) {
        if c >= self.head.len() {
            self.head.resize(c + 1, NONE);
        }
        self.count[i] = c;
        self.prev[i] = NONE;
        self.next[i] = self.head[c];
        if self.head[c] != NONE {
            self.prev[self.head[c]] = i;
        }
        self.head[c] = i;
    }

    fn remove(&mut self, i: usize) {
        let c = self.count[i];
        if c == NONE {
            return;
        }
        let (p, n) = (self.prev[i], self.next[i]);
        if p != NONE {
            self.next[p] = n;
        } else {
            self.head[c] = n;
        }
        if n != NONE {
            self.prev[n] = p;
        }
        self.count[i] = NONE;
    }

    fn set(&mut self, i: usize, c: usize) {
        self.remove(i);
        self.insert(i, c);
    }

    fn first(&self, c: usize) -> usize {
        self.head.get(c).copied().unwrap_or(NONE)
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct LuFactor {
    m: usize,
    piv_row: Vec<usize>,
    piv_pos: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_diag: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    eta_pos: Vec<usize>,
    eta_piv: Vec<f64>,
    eta_start: Vec<usize>,
    eta_idx: Vec<usize>,
    eta_val: Vec<f64>,
    work: Vec<f64>,
}

fn lookup(row: &[(usize, f64)], j: usize) -> f64 {
    row.iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
}

fn remove_from(list: &mut Vec<usize>, x: usize) {
    if let Some(k) = list.iter().position(|&y| y == x) {
        list.swap_remove(k);
    }
}

impl LuFactor {
    /// Factors the `m x m` matrix whose column `p` holds the entries
    /// `entries[start[p]..start[p + 1]]` as `(row, value)` pairs.
    pub fn factorize(
        m: usize,
        start: &[usize],
        entries: &[(usize, f64)],
    ) -> Result<LuFactor, Singular> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        for p in 0..m {
            for &(r, v) in &entries[start[p]..start[p + 1]] {
                if v != 0.0 {
                    rows[r].push((p, v));
                    cols[p].push(r);
                }
            }
        }
        let max_count = rows
            .iter()
            .map(Vec::len)
            .chain(cols.iter().map(Vec::len))
            .max()
            .unwrap_or(0);
        let mut colb = Buckets::new(m, max_count);
        let mut rowb = Buckets::new(m, max_count);
        for p in 0..m {
            colb.insert(p, cols[p].len());
        }
        for r in 0..m {
            rowb.insert(r, rows[r].len());
        }

        let mut lu = LuFactor {
            m,
            l_start: vec![0],
            u_start: vec![0],
            eta_start: vec![0],
            work: vec![0.0; m],
            ..Default::default()
        };
        let mut row_done = vec![false; m];
        let mut col_done = vec![false; m];
        let mut bad_pos = Vec::new();
        let mut scatter = vec![NONE; m];
        let mut done = 0usize;

        while done < m {
            // Structurally empty columns cannot be pivoted.
            let mut j = colb.first(0);
            while j != NONE {
                let nx = colb.next[j];
                colb.remove(j);
                col_done[j] = true;
                bad_pos.push(j);
                done += 1;
                j = nx;
            }
            if done >= m {
                break;
            }

            let pivot = Self::find_pivot(&rows, &cols, &colb, &rowb, m);
            let (r, c) = match pivot {
                Some(p) => p,
                None => {
                    // Remaining columns are numerically zero.
                    for p in 0..m {
                        if !col_done[p] {
                            colb.remove(p);
                            col_done[p] = true;
                            bad_pos.push(p);
                        }
                    }
                    break;
                }
            };

            let prow = std::mem::take(&mut rows[r]);
            let a_rc = lookup(&prow, c);
            lu.piv_row.push(r);
            lu.piv_pos.push(c);
            lu.u_diag.push(a_rc);
            for &(j, v) in &prow {
                if j != c {
                    lu.u_idx.push(j);
                    lu.u_val.push(v);
                }
            }
            lu.u_start.push(lu.u_idx.len());
            for &(j, _) in &prow {
                remove_from(&mut cols[j], r);
                if j != c {
                    colb.set(j, cols[j].len());
                }
            }
            row_done[r] = true;
            rowb.remove(r);
            col_done[c] = true;
            colb.remove(c);

            let others = std::mem::take(&mut cols[c]);
            for &i in &others {
                let row_i = &mut rows[i];
                let k = row_i.iter().position(|e| e.0 == c).expect("pattern mismatch");
                let a_ic = row_i.swap_remove(k).1;
                let mult = a_ic / a_rc;
                lu.l_idx.push(i);
                lu.l_val.push(mult);
                for (idx, e) in row_i.iter().enumerate() {
                    scatter[e.0] = idx;
                }
                for &(j, v) in &prow {
                    if j == c {
                        continue;
                    }
                    let s = scatter[j];
                    if s != NONE {
                        row_i[s].1 -= mult * v;
                    } else {
                        scatter[j] = row_i.len();
                        row_i.push((j, -mult * v));
                        cols[j].push(i);
                        colb.set(j, cols[j].len());
                    }
                }
                for e in row_i.iter() {
                    scatter[e.0] = NONE;
                }
                let mut q = 0;
                while q < row_i.len() {
                    if row_i[q].1.abs() < DROP_TOL {
                        let j = row_i[q].0;
                        row_i.swap_remove(q);
                        remove_from(&mut cols[j], i);
                        colb.set(j, cols[j].len());
                    } else {
                        q += 1;
                    }
                }
                rowb.set(i, row_i.len());
            }
            lu.l_start.push(lu.l_idx.len());
            done += 1;
        }

        if !bad_pos.is_empty() {
            let rows_left: Vec<usize> = (0..m).filter(|&r| !row_done[r]).collect();
            return Err(Singular {
                positions: bad_pos,
                rows: rows_left,
            });
        }
        Ok(lu)
    }

    fn find_pivot(
        rows: &[Vec<(usize, f64)>],
        cols: &[Vec<usize>],
        colb: &Buckets,
        rowb: &Buckets,
        m: usize,
    ) -> Option<(usize, usize)> {
        let j = colb.first(1);
        if j != NONE {
            let i = cols[j][0];
            if lookup(&rows[i], j).abs() > ABS_PIVOT_TOL {
                return Some((i, j));
            }
        }
        let mut best: Option<(usize, usize, usize, f64)> = None;
        let mut searched = 0usize;
        let max_c = colb.head.len().max(rowb.head.len());
        for cnt in 1..max_c.min(m + 1) {
            let mut j = colb.first(cnt);
            while j != NONE {
                let cmax = cols[j]
                    .iter()
                    .map(|&i| lookup(&rows[i], j).abs())
                    .fold(0.0f64, f64::max);
                if cmax > ABS_PIVOT_TOL {
                    for &i in &cols[j] {
                        let a = lookup(&rows[i], j).abs();
                        if a >= PIVOT_THRESHOLD * cmax {
                            let cost = (rows[i].len() - 1) * (cnt - 1);
                            if best.map_or(true, |b| cost < b.0 || (cost == b.0 && a > b.3)) {
                                best = Some((cost, i, j, a));
                            }
                        }
                    }
                }
                searched += 1;
                if best.is_some() && searched >= SEARCH_LIMIT {
                    return best.map(|b| (b.1, b.2));
                }
                j = colb.next[j];
            }
            let mut i = rowb.first(cnt);
            while i != NONE {
                for &(j, a) in &rows[i] {
                    let a = a.abs();
                    if a <= ABS_PIVOT_TOL {
                        continue;
                    }
                    let cmax = cols[j]
                        .iter()
                        .map(|&k| lookup(&rows[k], j).abs())
                        .fold(0.0f64, f64::max);
                    if a >= PIVOT_THRESHOLD * cmax {
                        let cost = (cnt - 1) * (cols[j].len() - 1);
                        if best.map_or(true, |b| cost < b.0 || (cost == b.0 && a > b.3)) {
                            best = Some((cost, i, j, a));
                        }
                    }
                }
                searched += 1;
                if best.is_some() && searched >= SEARCH_LIMIT {
                    return best.map(|b| (b.1, b.2));
                }
                i = rowb.next[i];
            }
            if let Some(b) = best {
                if b.0 <= cnt * cnt {
                    return Some((b.1, b.2));
                }
            }
        }
        best.map(|b| (b.1, b.2))
    }

    pub fn num_updates(&self) -> usize {
        self.eta_pos.len()
    }

    pub fn eta_nnz(&self) -> usize {
        self.eta_idx.len()
    }

    pub fn factor_nnz(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() + self.m
    }

    /// Solves `B x = b`. `rhs` is indexed by row on entry and holds the
    /// solution indexed by basis position on exit.
    pub fn ftran(&mut self, rhs: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let t = rhs[self.piv_row[k]];
            if t != 0.0 {
                for q in self.l_start[k]..self.l_start[k + 1] {
                    rhs[self.l_idx[q]] -= self.l_val[q] * t;
                }
            }
        }
        let out = &mut self.work;
        for k in (0..m).rev() {
            let mut z = rhs[self.piv_row[k]];
            for q in self.u_start[k]..self.u_start[k + 1] {
                z -= self.u_val[q] * out[self.u_idx[q]];
            }
            out[self.piv_pos[k]] = z / self.u_diag[k];
        }
        rhs.copy_from_slice(out);
        for e in 0..self.eta_pos.len() {
            let p = self.eta_pos[e];
            let xp = rhs[p] / self.eta_piv[e];
            rhs[p] = xp;
            if xp != 0.0 {
                for q in self.eta_start[e]..self.eta_start[e + 1] {
                    rhs[self.eta_idx[q]] -= self.eta_val[q] * xp;
                }
            }
        }
    }

    /// Solves `B^T y = d`. `rhs` is indexed by basis position on entry and
    /// holds the solution indexed by row on exit.
    pub fn btran(&mut self, rhs: &mut [f64]) {
        let m = self.m;
        for e in (0..self.eta_pos.len()).rev() {
            let p = self.eta_pos[e];
            let mut s = rhs[p];
            for q in self.eta_start[e]..self.eta_start[e + 1] {
                s -= self.eta_val[q] * rhs[self.eta_idx[q]];
            }
            rhs[p] = s / self.eta_piv[e];
        }
        let z = &mut self.work;
        for k in 0..m {
            let zr = rhs[self.piv_pos[k]] / self.u_diag[k];
            z[self.piv_row[k]] = zr;
            if zr != 0.0 {
                for q in self.u_start[k]..self.u_start[k + 1] {
                    rhs[self.u_idx[q]] -= self.u_val[q] * zr;
                }
            }
        }
        rhs.copy_from_slice(z);
        for k in (0..m).rev() {
            let mut s = 0.0;
            for q in self.l_start[k]..self.l_start[k + 1] {
                s += self.l_val[q] * rhs[self.l_idx[q]];
            }
            if s != 0.0 {
                rhs[self.piv_row[k]] -= s;
            }
        }
    }

    /// Records the replacement of basis position `pos` by a column whose
    /// FTRAN image is `alpha` (indexed by position).
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        self.eta_pos.push(pos);
        self.eta_piv.push(alpha[pos]);
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > 1e-13 {
                self.eta_idx.push(i);
                self.eta_val.push(a);
            }
        }
        self.eta_start.push(self.eta_idx.len());
    }
}
