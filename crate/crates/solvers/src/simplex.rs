use crate::error::SolverError;
use crate::lp::LinearProgram;
use crate::report::{SolveReport, Status};

/// Consecutive degenerate pivots before switching to Bland's rule.
const STALL_LIMIT: usize = 50;
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Default)]
pub struct LpOptions {
    /// Pivot limit; `None` means `50 * (rows + columns)`.
    pub max_iter: Option<usize>,
    /// Columns (internal standard-form indices, as returned in
    /// `SolveReport::basis`) to prefer when they price out attractively.
    pub warm_basis: Option<Vec<usize>>,
}

/// Solves `lp` to tolerance `tol` with default options.
pub fn solve_lp(lp: &LinearProgram, tol: f64) -> Result<SolveReport, SolverError> {
    solve_lp_with(lp, tol, &LpOptions::default())
}

pub fn solve_lp_with(
    lp: &LinearProgram,
    tol: f64,
    opts: &LpOptions,
) -> Result<SolveReport, SolverError> {
    if !(tol > 0.0) {
        return Err(SolverError::Tolerance(tol));
    }
    lp.validate()?;
    let sf = StandardForm::build(lp);
    let mut tab = Tableau::new(&sf);
    let max_iter = opts.max_iter.unwrap_or(50 * (tab.m + tab.ncols));
    let preferred = preference_mask(tab.ncols, opts.warm_basis.as_deref());

    // phase 1
    let bscale = 1.0 + sf.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut iters = 0;
    let mut phase1_cost = vec![0.0; tab.ncols];
    for &a in &tab.artificials {
        phase1_cost[a] = 1.0;
    }
    tab.set_costs(&phase1_cost);
    match tab.run(tol, max_iter, &mut iters, &preferred) {
        RunOutcome::Optimal => {}
        RunOutcome::Unbounded => unreachable!("phase 1 objective is bounded below"),
        RunOutcome::MaxIter => return Ok(SolveReport::failed(Status::MaxIter, lp.num_vars(), iters)),
    }
    if -tab.obj[tab.ncols] > tol * bscale {
        return Ok(SolveReport::failed(Status::Infeasible, lp.num_vars(), iters));
    }
    tab.expel_artificials();
    for &a in &tab.artificials {
        tab.barred[a] = true;
    }

    // phase 2
    let mut cost = vec![0.0; tab.ncols];
    for j in 0..sf.nstruct {
        cost[j] = sf.cost[j] * tab.col_sign[j];
    }
    tab.set_costs(&cost);
    match tab.run(tol, max_iter, &mut iters, &preferred) {
        RunOutcome::Optimal => {}
        RunOutcome::Unbounded => {
            return Ok(SolveReport::failed(Status::Unbounded, lp.num_vars(), iters))
        }
        RunOutcome::MaxIter => return Ok(SolveReport::failed(Status::MaxIter, lp.num_vars(), iters)),
    }
    Ok(sf.report(lp, &tab, iters))
}

fn preference_mask(ncols: usize, warm: Option<&[usize]>) -> Vec<bool> {
    let mut mask = vec![false; ncols];
    if let Some(w) = warm {
        for &j in w {
            if j < ncols {
                mask[j] = true;
            }
        }
    }
    mask
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarMap {
    /// x = offset + x'
    Shift(f64),
    /// x = offset - x'
    Mirror(f64),
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RowOrigin {
    Eq(usize),
    Ub(usize),
    Bound(usize),
}

/// `min c'x'  s.t.  rows (= or ≤) , x' ≥ 0 except free columns`.
struct StandardForm {
    nstruct: usize,
    cost: Vec<f64>,
    map: Vec<VarMap>,
    /// Per row: sparse coefficients on structural columns.
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    is_le: Vec<bool>,
    origin: Vec<RowOrigin>,
    /// Constant term of the objective from variable shifts.
    obj_offset: f64,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut map = Vec::with_capacity(n);
        let mut cost = Vec::with_capacity(n);
        let mut obj_offset = 0.0;
        for (j, b) in lp.bounds.iter().enumerate() {
            let c = lp.objective[j];
            if b.lower.is_finite() {
                map.push(VarMap::Shift(b.lower));
                cost.push(c);
                obj_offset += c * b.lower;
            } else if b.upper.is_finite() {
                map.push(VarMap::Mirror(b.upper));
                cost.push(-c);
                obj_offset += c * b.upper;
            } else {
                map.push(VarMap::Free);
                cost.push(c);
            }
        }
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut is_le = Vec::new();
        let mut origin = Vec::new();

        let mut eq_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.a_eq.rows];
        for &(r, c, v) in &lp.a_eq.entries {
            eq_rows[r].push((c, v));
        }
        let mut ub_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.a_ub.rows];
        for &(r, c, v) in &lp.a_ub.entries {
            ub_rows[r].push((c, v));
        }
        let mut push_row = |coeffs: Vec<(usize, f64)>, b: f64, le: bool, o: RowOrigin| {
            let mut shifted = b;
            let mut out = Vec::with_capacity(coeffs.len());
            for (c, v) in coeffs {
                match map[c] {
                    VarMap::Shift(l) => {
                        shifted -= v * l;
                        out.push((c, v));
                    }
                    VarMap::Mirror(u) => {
                        shifted -= v * u;
                        out.push((c, -v));
                    }
                    VarMap::Free => out.push((c, v)),
                }
            }
            rows.push(out);
            rhs.push(shifted);
            is_le.push(le);
            origin.push(o);
        };
        for (i, r) in eq_rows.into_iter().enumerate() {
            push_row(r, lp.b_eq[i], false, RowOrigin::Eq(i));
        }
        for (i, r) in ub_rows.into_iter().enumerate() {
            push_row(r, lp.b_ub[i], true, RowOrigin::Ub(i));
        }
        for (j, b) in lp.bounds.iter().enumerate() {
            if b.lower.is_finite() && b.upper.is_finite() {
                rows.push(vec![(j, 1.0)]);
                rhs.push(b.upper - b.lower);
                is_le.push(true);
                origin.push(RowOrigin::Bound(j));
            }
        }
        StandardForm {
            nstruct: n,
            cost,
            map,
            rows,
            rhs,
            is_le,
            origin,
            obj_offset,
        }
    }

    fn report(&self, lp: &LinearProgram, tab: &Tableau, iters: usize) -> SolveReport {
        let n = self.nstruct;
        let mut xs = vec![0.0; tab.ncols];
        for (i, &b) in tab.basis.iter().enumerate() {
            xs[b] = tab.rhs(i);
        }
        let x: Vec<f64> = (0..n)
            .map(|j| {
                let v = xs[j] * tab.col_sign[j];
                match self.map[j] {
                    VarMap::Shift(l) => l + v,
                    VarMap::Mirror(u) => u - v,
                    VarMap::Free => v,
                }
            })
            .collect();

        // stored-row multipliers from reduced costs of the unit columns
        let mut y_eq = vec![0.0; lp.a_eq.rows];
        let mut y_ub = vec![0.0; lp.a_ub.rows];
        for (i, o) in self.origin.iter().enumerate() {
            let pi = -tab.obj[tab.unit_col[i]] * tab.unit_sign[i];
            let y = pi * tab.row_sign[i];
            match *o {
                RowOrigin::Eq(k) => y_eq[k] = y,
                RowOrigin::Ub(k) => y_ub[k] = -y,
                RowOrigin::Bound(_) => {}
            }
        }

        let primal_value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        // reduced costs on original data
        let at_y = lp.a_eq.tr_mul_vec(&y_eq);
        let at_l = lp.a_ub.tr_mul_vec(&y_ub);
        let mut dual_value: f64 = lp.b_eq.iter().zip(&y_eq).map(|(b, y)| b * y).sum::<f64>()
            - lp.b_ub.iter().zip(&y_ub).map(|(b, l)| b * l).sum::<f64>();
        let mut dual_residual = y_ub.iter().fold(0.0f64, |a, &l| a.max(-l));
        for j in 0..n {
            let r = lp.objective[j] - at_y[j] + at_l[j];
            let b = lp.bounds[j];
            if r > 0.0 {
                if b.lower.is_finite() {
                    dual_value += r * b.lower;
                } else {
                    dual_residual = dual_residual.max(r);
                }
            } else if r < 0.0 {
                if b.upper.is_finite() {
                    dual_value += r * b.upper;
                } else {
                    dual_residual = dual_residual.max(-r);
                }
            }
        }

        let ax = lp.a_eq.mul_vec(&x);
        let mut primal_residual = ax
            .iter()
            .zip(&lp.b_eq)
            .fold(0.0f64, |a, (v, b)| a.max((v - b).abs()));
        let ux = lp.a_ub.mul_vec(&x);
        for (v, b) in ux.iter().zip(&lp.b_ub) {
            primal_residual = primal_residual.max(v - b);
        }
        for (v, b) in x.iter().zip(&lp.bounds) {
            primal_residual = primal_residual.max(b.lower - v).max(v - b.upper);
        }
        debug_assert!((primal_value - (self.obj_offset - tab.obj[tab.ncols])).abs() < 1e-6 * (1.0 + primal_value.abs()));

        SolveReport {
            status: Status::Optimal,
            primal_value,
            dual_value,
            x,
            y_eq,
            y_ub,
            s: Vec::new(),
            primal_residual,
            dual_residual,
            iterations: iters,
            basis: tab.basis.clone(),
        }
    }
}

enum RunOutcome {
    Optimal,
    Unbounded,
    MaxIter,
}

/// Dense tableau `[A | b]` in row-major order plus a reduced-cost row whose
/// last entry holds minus the current objective.
struct Tableau {
    m: usize,
    ncols: usize,
    width: usize,
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    free: Vec<bool>,
    barred: Vec<bool>,
    col_sign: Vec<f64>,
    artificials: Vec<usize>,
    row_sign: Vec<f64>,
    unit_col: Vec<usize>,
    unit_sign: Vec<f64>,
    nz: Vec<usize>,
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let m = sf.rows.len();
        let n = sf.nstruct;
        let nslack = sf.is_le.iter().filter(|&&b| b).count();
        // artificial needed for equality rows and ≤ rows with negative rhs
        let nart = (0..m)
            .filter(|&i| !sf.is_le[i] || sf.rhs[i] < 0.0)
            .count();
        let ncols = n + nslack + nart;
        let width = ncols + 1;
        let mut t = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut row_sign = vec![1.0; m];
        let mut unit_col = vec![0; m];
        let mut unit_sign = vec![1.0; m];
        let mut artificials = Vec::with_capacity(nart);
        let mut free = vec![false; ncols];
        for j in 0..n {
            free[j] = sf.map[j] == VarMap::Free;
        }
        let mut next_slack = n;
        let mut next_art = n + nslack;
        for i in 0..m {
            let sign = if sf.rhs[i] < 0.0 { -1.0 } else { 1.0 };
            row_sign[i] = sign;
            let row = &mut t[i * width..(i + 1) * width];
            for &(c, v) in &sf.rows[i] {
                row[c] += sign * v;
            }
            row[ncols] = sign * sf.rhs[i];
            if sf.is_le[i] {
                row[next_slack] = sign;
                if sign > 0.0 {
                    basis[i] = next_slack;
                    unit_col[i] = next_slack;
                }
                next_slack += 1;
            }
            if !sf.is_le[i] || sign < 0.0 {
                row[next_art] = 1.0;
                basis[i] = next_art;
                unit_col[i] = next_art;
                artificials.push(next_art);
                next_art += 1;
            }
            unit_sign[i] = 1.0;
        }
        let mut is_basic = vec![false; ncols];
        for &b in &basis {
            is_basic[b] = true;
        }
        Tableau {
            m,
            ncols,
            width,
            t,
            obj: vec![0.0; width],
            basis,
            is_basic,
            free,
            barred: vec![false; ncols],
            col_sign: vec![1.0; ncols],
            artificials,
            row_sign,
            unit_col,
            unit_sign,
            nz: Vec::with_capacity(width),
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.ncols)
    }

    /// Reduced costs `d = c - c_Bᵀ B⁻¹A` for the current basis.
    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        self.obj[..self.ncols].copy_from_slice(cost);
        self.obj[self.ncols] = 0.0;
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * w..(i + 1) * w];
                for (o, &v) in self.obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
    }

    fn flip_column(&mut self, j: usize) {
        for i in 0..self.m {
            let v = &mut self.t[i * self.width + j];
            *v = -*v;
        }
        self.obj[j] = -self.obj[j];
        self.col_sign[j] = -self.col_sign[j];
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w = self.width;
        let piv = self.at(r, s);
        self.nz.clear();
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            let inv = 1.0 / piv;
            for (k, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    self.nz.push(k);
                }
            }
            row[s] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let nz = &self.nz;
        let update = |row: &mut [f64]| {
            let f = row[s];
            if f != 0.0 {
                for &k in nz {
                    let v = row[k] - f * prow[k];
                    row[k] = if v.abs() < DROP_TOL { 0.0 } else { v };
                }
                row[s] = 0.0;
            }
        };
        for row in before.chunks_exact_mut(w) {
            update(row);
        }
        for row in after.chunks_exact_mut(w) {
            update(row);
        }
        update(&mut self.obj);
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = s;
        self.is_basic[s] = true;
    }

    fn choose_entering(&mut self, tol: f64, bland: bool, preferred: &[bool]) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut best_val = -tol;
        let mut best_pref: Option<usize> = None;
        let mut best_pref_val = -tol;
        for j in 0..self.ncols {
            if self.is_basic[j] || self.barred[j] {
                continue;
            }
            let mut d = self.obj[j];
            if self.free[j] && d > tol {
                self.flip_column(j);
                d = -d;
            }
            if d < -tol {
                if bland {
                    return Some(j);
                }
                if d < best_val {
                    best_val = d;
                    best = Some(j);
                }
                if preferred[j] && d < best_pref_val {
                    best_pref_val = d;
                    best_pref = Some(j);
                }
            }
        }
        best_pref.or(best)
    }

    fn choose_leaving(&self, s: usize, bland: bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..self.m {
            if self.free[self.basis[i]] {
                continue;
            }
            let a = self.at(i, s);
            if a > PIVOT_TOL {
                let ratio = self.rhs(i).max(0.0) / a;
                let better = match best {
                    None => true,
                    Some(b) => {
                        if ratio < best_ratio - 1e-12 {
                            true
                        } else if ratio <= best_ratio + 1e-12 {
                            if bland {
                                self.basis[i] < self.basis[b]
                            } else {
                                a > self.at(b, s)
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    best = Some(i);
                    best_ratio = best_ratio.min(ratio);
                }
            }
        }
        best
    }

    fn run(&mut self, tol: f64, max_iter: usize, iters: &mut usize, preferred: &[bool]) -> RunOutcome {
        let dtol = tol.min(1e-9);
        let mut stalled = 0usize;
        let mut bland = false;
        loop {
            if *iters >= max_iter {
                return RunOutcome::MaxIter;
            }
            let Some(s) = self.choose_entering(dtol, bland, preferred) else {
                return RunOutcome::Optimal;
            };
            let Some(r) = self.choose_leaving(s, bland) else {
                return RunOutcome::Unbounded;
            };
            let step = self.rhs(r) / self.at(r, s);
            self.pivot(r, s);
            *iters += 1;
            if step.abs() <= 1e-12 {
                stalled += 1;
                if stalled >= STALL_LIMIT {
                    bland = true;
                }
            } else {
                stalled = 0;
                bland = false;
            }
        }
    }

    /// Pivots basic artificials (at zero level) out where possible; rows
    /// with no usable column are redundant and keep their artificial.
    fn expel_artificials(&mut self) {
        let is_art: Vec<bool> = {
            let mut v = vec![false; self.ncols];
            for &a in &self.artificials {
                v[a] = true;
            }
            v
        };
        for r in 0..self.m {
            if !is_art[self.basis[r]] {
                continue;
            }
            let mut best = None;
            let mut best_abs = PIVOT_TOL;
            for j in 0..self.ncols {
                if is_art[j] || self.is_basic[j] {
                    continue;
                }
                let a = self.at(r, j).abs();
                if a > best_abs {
                    best_abs = a;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                self.pivot(r, j);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Bound;

    #[test]
    fn min_x_with_lower_bound_row() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_ge(&[(0, 1.0)], 1.0);
        let rep = solve_lp(&lp, 1e-8).unwrap();
        assert_eq!(rep.status, Status::Optimal);
        assert!((rep.primal_value - 1.0).abs() < 1e-12);
        assert!((rep.dual_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sum_with_equality() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_eq(&[(0, 1.0), (1, 1.0)], 2.0);
        let rep = solve_lp(&lp, 1e-8).unwrap();
        assert_eq!(rep.status, Status::Optimal);
        assert!((rep.primal_value - 2.0).abs() < 1e-12);
        assert!((rep.y_eq[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(&[(0, 1.0)], -1.0);
        let rep = solve_lp(&lp, 1e-8).unwrap();
        assert_eq!(rep.status, Status::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.add_le(&[(0, 1.0), (1, -1.0)], 1.0);
        let rep = solve_lp(&lp, 1e-8).unwrap();
        assert_eq!(rep.status, Status::Unbounded);
    }

    #[test]
    fn free_and_mirrored_variables() {
        // min -x - y  s.t. x + 2y <= 4, x free, y <= 1 (lower -inf)
        // x unbounded below is fine, optimum pushes x up: x = 4 - 2y,
        // objective -4 + y, so y as small as possible -> unbounded.
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.add_le(&[(0, 1.0), (1, 2.0)], 4.0);
        lp.set_bound(0, Bound::FREE);
        lp.set_bound(1, Bound::new(f64::NEG_INFINITY, 1.0));
        assert_eq!(solve_lp(&lp, 1e-8).unwrap().status, Status::Unbounded);

        // with y in [-3, 1]: y = -3, x = 10, value -7
        lp.set_bound(1, Bound::new(-3.0, 1.0));
        let rep = solve_lp(&lp, 1e-8).unwrap();
        assert_eq!(rep.status, Status::Optimal);
        assert!((rep.primal_value + 7.0).abs() < 1e-10, "{}", rep.primal_value);
        assert!((rep.x[0] - 10.0).abs() < 1e-10);
        assert!(rep.gap() < 1e-10);
    }

    #[test]
    fn free_variable_negative_optimum() {
        // min x  s.t.  x >= -5 as a row, x free
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.set_bound(0, Bound::FREE);
        lp.add_ge(&[(0, 1.0)], -5.0);
        let rep = solve_lp(&lp, 1e-8).unwrap();
        assert_eq!(rep.status, Status::Optimal);
        assert!((rep.x[0] + 5.0).abs() < 1e-12);
        assert!(rep.gap() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_eq(&[(0, 1.0), (1, 1.0)], 1.0);
        lp.add_eq(&[(0, 2.0), (1, 2.0)], 2.0);
        let rep = solve_lp(&lp, 1e-8).unwrap();
        assert_eq!(rep.status, Status::Optimal);
        assert!((rep.primal_value - 1.0).abs() < 1e-12);
        assert!(rep.gap() < 1e-10);
    }

    #[test]
    fn cross_polytope_membership() {
        // min Σλ over ±e1, ±e2 with Σλ v = (1,1): ℓ¹ norm = 2
        let verts = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];
        let mut lp = LinearProgram::new(vec![1.0; 4]);
        lp.add_eq(&verts.iter().enumerate().map(|(k, v)| (k, v.0)).collect::<Vec<_>>(), 1.0);
        lp.add_eq(&verts.iter().enumerate().map(|(k, v)| (k, v.1)).collect::<Vec<_>>(), 1.0);
        let rep = solve_lp(&lp, 1e-8).unwrap();
        assert!((rep.primal_value - 2.0).abs() < 1e-12);
        // dual direction: (1,1), support of the cross is 1
        assert!((rep.y_eq[0] - 1.0).abs() < 1e-12 && (rep.y_eq[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warm_basis_gives_same_answer() {
        let mut lp = LinearProgram::new(vec![2.0, 3.0, 1.0]);
        lp.add_ge(&[(0, 1.0), (1, 1.0), (2, 1.0)], 3.0);
        lp.add_le(&[(2, 1.0)], 1.0);
        let first = solve_lp(&lp, 1e-8).unwrap();
        let opts = LpOptions {
            warm_basis: Some(first.basis.clone()),
            ..Default::default()
        };
        let second = solve_lp_with(&lp, 1e-8, &opts).unwrap();
        assert!((first.primal_value - second.primal_value).abs() < 1e-12);
        assert!((first.primal_value - 5.0).abs() < 1e-12);
    }
}
