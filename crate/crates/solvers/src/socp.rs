use nalgebra::{DMatrix, DVector};

use crate::error::SolverError;
use crate::report::{SolveReport, Status};
use crate::sparse::Triplets;

/// One block of the variable vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    Free(usize),
    NonNeg(usize),
    /// Lorentz cone `{(t, u) : ‖u‖ ≤ t}` of total size `k ≥ 2`; the head
    /// coordinate comes first.
    Soc(usize),
}

impl Cone {
    pub fn size(&self) -> usize {
        match *self {
            Cone::Free(k) | Cone::NonNeg(k) | Cone::Soc(k) => k,
        }
    }
}

/// `min cᵀx  s.t.  A x = b,  x ∈ K₁ × … × K_p` with the blocks of `cones`
/// laid out consecutively.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeProgram {
    pub objective: Vec<f64>,
    pub a: Triplets,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
}

impl ConeProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), SolverError> {
        let n = self.num_vars();
        let total: usize = self.cones.iter().map(Cone::size).sum();
        if total != n {
            return Err(SolverError::Cone(format!(
                "cone sizes add up to {total}, expected {n}"
            )));
        }
        if let Some(c) = self.cones.iter().find(|c| matches!(c, Cone::Soc(k) if *k < 2)) {
            return Err(SolverError::Cone(format!("{c:?} is too small")));
        }
        if self.a.cols != n || self.a.rows != self.b.len() {
            return Err(SolverError::Dimension(format!(
                "A is {}x{}, expected {}x{n}",
                self.a.rows,
                self.a.cols,
                self.b.len()
            )));
        }
        if !self.objective.iter().all(|v| v.is_finite()) {
            return Err(SolverError::NonFinite("objective"));
        }
        if !self.a.is_finite() {
            return Err(SolverError::NonFinite("constraint matrix"));
        }
        if !self.b.iter().all(|v| v.is_finite()) {
            return Err(SolverError::NonFinite("right-hand side"));
        }
        Ok(())
    }
}

/// Refinement passes on each Newton solve.
const REFINE_STEPS: usize = 3;

#[derive(Debug, Clone)]
pub struct SocpOptions {
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_factor: f64,
}

impl Default for SocpOptions {
    fn default() -> Self {
        SocpOptions {
            max_iter: 200,
            step_factor: 0.99,
        }
    }
}

pub fn solve_socp(cp: &ConeProgram, tol: f64) -> Result<SolveReport, SolverError> {
    solve_socp_with(cp, tol, &SocpOptions::default())
}

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling
/// and Mehrotra predictor-corrector steps.
pub fn solve_socp_with(
    cp: &ConeProgram,
    tol: f64,
    opts: &SocpOptions,
) -> Result<SolveReport, SolverError> {
    if !(tol > 0.0) {
        return Err(SolverError::Tolerance(tol));
    }
    cp.validate()?;
    let inner = Internal::build(cp);
    let out = inner.solve(tol, opts);
    Ok(match out {
        Outcome::Solved { x, y, iters } => inner.report(cp, &x, &y, iters),
        Outcome::Stalled { x, y, iters } => {
            let mut rep = inner.report(cp, &x, &y, iters);
            rep.status = Status::MaxIter;
            rep
        }
        Outcome::Failed(status, iters) => SolveReport::failed(status, cp.num_vars(), iters),
    })
}

#[derive(Debug, Clone, Copy)]
enum Block {
    NonNeg { off: usize, len: usize },
    Soc { off: usize, len: usize },
}

/// Standard form with free variables split into two nonnegative parts.
struct Internal {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    blocks: Vec<Block>,
    /// For each original variable: (plus index, optional minus index).
    var_map: Vec<(usize, Option<usize>)>,
    degree: usize,
}

enum Outcome {
    Solved {
        x: DVector<f64>,
        y: DVector<f64>,
        iters: usize,
    },
    /// Numerical breakdown or iteration limit; carries the iterate with the
    /// smallest residuals seen.
    Stalled {
        x: DVector<f64>,
        y: DVector<f64>,
        iters: usize,
    },
    Failed(Status, usize),
}

/// Per-block Nesterov-Todd scaling.
enum Scale {
    NonNeg(Vec<f64>),
    Soc { eta: f64, w: Vec<f64> },
}

impl Internal {
    fn build(cp: &ConeProgram) -> Self {
        let m = cp.b.len();
        let mut var_map = Vec::with_capacity(cp.num_vars());
        let mut blocks = Vec::new();
        let mut next = 0;
        let mut orig = 0;
        let mut degree = 0;
        let mut minus_vars = Vec::new();
        for cone in &cp.cones {
            match *cone {
                Cone::Free(k) => {
                    for _ in 0..k {
                        var_map.push((next, None));
                        minus_vars.push(orig);
                        next += 1;
                        orig += 1;
                    }
                    blocks.push(Block::NonNeg { off: next - k, len: k });
                    degree += k;
                }
                Cone::NonNeg(k) => {
                    for _ in 0..k {
                        var_map.push((next, None));
                        next += 1;
                        orig += 1;
                    }
                    blocks.push(Block::NonNeg { off: next - k, len: k });
                    degree += k;
                }
                Cone::Soc(k) => {
                    for _ in 0..k {
                        var_map.push((next, None));
                        next += 1;
                        orig += 1;
                    }
                    blocks.push(Block::Soc { off: next - k, len: k });
                    degree += 1;
                }
            }
        }
        if !minus_vars.is_empty() {
            let off = next;
            for &j in &minus_vars {
                var_map[j].1 = Some(next);
                next += 1;
            }
            blocks.push(Block::NonNeg {
                off,
                len: minus_vars.len(),
            });
            degree += minus_vars.len();
        }
        let n = next;
        let mut a = DMatrix::zeros(m, n);
        for &(r, col, v) in &cp.a.entries {
            let (p, q) = var_map[col];
            a[(r, p)] += v;
            if let Some(q) = q {
                a[(r, q)] -= v;
            }
        }
        let mut c = DVector::zeros(n);
        for (j, &cj) in cp.objective.iter().enumerate() {
            let (p, q) = var_map[j];
            c[p] += cj;
            if let Some(q) = q {
                c[q] -= cj;
            }
        }
        Internal {
            a,
            b: DVector::from_column_slice(&cp.b),
            c,
            blocks,
            var_map,
            degree,
        }
    }

    fn identity(&self) -> DVector<f64> {
        let mut e = DVector::zeros(self.c.len());
        for blk in &self.blocks {
            match *blk {
                Block::NonNeg { off, len } => e.rows_mut(off, len).fill(1.0),
                Block::Soc { off, .. } => e[off] = 1.0,
            }
        }
        e
    }

    fn scalings(&self, x: &DVector<f64>, s: &DVector<f64>) -> Vec<Scale> {
        self.blocks
            .iter()
            .map(|blk| match *blk {
                Block::NonNeg { off, len } => Scale::NonNeg(
                    (off..off + len).map(|i| (s[i] / x[i]).sqrt()).collect(),
                ),
                Block::Soc { off, len } => {
                    let xb = x.as_slice()[off..off + len].to_vec();
                    let sb = s.as_slice()[off..off + len].to_vec();
                    let (eta, w) = nt_soc(&xb, &sb);
                    Scale::Soc { eta, w }
                }
            })
            .collect()
    }

    fn apply_w(&self, sc: &[Scale], v: &DVector<f64>, inverse: bool) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (blk, scale) in self.blocks.iter().zip(sc) {
            match (*blk, scale) {
                (Block::NonNeg { off, len }, Scale::NonNeg(w)) => {
                    for i in 0..len {
                        out[off + i] = if inverse { v[off + i] / w[i] } else { v[off + i] * w[i] };
                    }
                }
                (Block::Soc { off, len }, Scale::Soc { eta, w }) => {
                    let vb = &v.as_slice()[off..off + len];
                    let r = if inverse {
                        let mut jv = vb.to_vec();
                        jflip(&mut jv);
                        let mut t = wbar_mul(w, &jv);
                        jflip(&mut t);
                        t.iter_mut().for_each(|t| *t /= eta);
                        t
                    } else {
                        let mut t = wbar_mul(w, vb);
                        t.iter_mut().for_each(|t| *t *= eta);
                        t
                    };
                    out.as_mut_slice()[off..off + len].copy_from_slice(&r);
                }
                _ => unreachable!(),
            }
        }
        out
    }

    /// `H⁻¹ v` with `H = WᵀW`.
    fn apply_hinv(&self, sc: &[Scale], v: &DVector<f64>) -> DVector<f64> {
        let t = self.apply_w(sc, v, true);
        self.apply_w(sc, &t, true)
    }

    fn normal_matrix(&self, sc: &[Scale]) -> DMatrix<f64> {
        let m = self.a.nrows();
        let mut mm = DMatrix::zeros(m, m);
        for (blk, scale) in self.blocks.iter().zip(sc) {
            match (*blk, scale) {
                (Block::NonNeg { off, len }, Scale::NonNeg(w)) => {
                    for i in 0..len {
                        let col = self.a.column(off + i);
                        let h = 1.0 / (w[i] * w[i]);
                        mm.ger(h, &col, &col, 1.0);
                    }
                }
                (Block::Soc { off, len }, Scale::Soc { eta, w }) => {
                    // H⁻¹ = η⁻² (2 (Jw)(Jw)ᵀ - J)
                    let ab = self.a.columns(off, len);
                    let mut jw = DVector::from_column_slice(w);
                    jw.as_mut_slice()[1..].iter_mut().for_each(|v| *v = -*v);
                    let u = &ab * &jw;
                    let inv2 = 1.0 / (eta * eta);
                    mm.ger(2.0 * inv2, &u, &u, 1.0);
                    let c0 = ab.column(0);
                    mm.ger(-inv2, &c0, &c0, 1.0);
                    for i in 1..len {
                        let ci = ab.column(i);
                        mm.ger(inv2, &ci, &ci, 1.0);
                    }
                }
                _ => unreachable!(),
            }
        }
        mm
    }

    fn solve(&self, tol: f64, opts: &SocpOptions) -> Outcome {
        let m = self.a.nrows();
        let n = self.c.len();
        let nu = self.degree as f64;
        let e = self.identity();
        let mut x = e.clone();
        let mut s = e.clone();
        let mut y = DVector::zeros(m);
        let mut tau = 1.0;
        let mut kappa = 1.0;
        let bnorm = 1.0 + self.b.amax();
        let cnorm = 1.0 + self.c.amax();
        let at = self.a.transpose();
        let mut best: Option<(f64, DVector<f64>, DVector<f64>)> = None;
        let stalled = |best: Option<(f64, DVector<f64>, DVector<f64>)>, it: usize| match best {
            Some((_, x, y)) => Outcome::Stalled { x, y, iters: it },
            None => Outcome::Failed(Status::MaxIter, it),
        };

        for it in 0..=opts.max_iter {
            let rp = &self.a * &x - &self.b * tau;
            let rd = &at * &y + &s - &self.c * tau;
            let cx = self.c.dot(&x);
            let by = self.b.dot(&y);
            let rg = cx - by + kappa;
            let mu = (x.dot(&s) + tau * kappa) / (nu + 1.0);

            let pres = rp.amax() / tau / bnorm;
            let dres = rd.amax() / tau / cnorm;
            let pobj = cx / tau;
            let dobj = by / tau;
            let score = pres.max(dres).max((pobj - dobj).abs() / (1.0 + pobj.abs()));
            if !score.is_finite() {
                return stalled(best, it);
            }
            if pres <= tol && dres <= tol && (pobj - dobj).abs() <= tol * (1.0 + pobj.abs()) {
                return Outcome::Solved {
                    x: x / tau,
                    y: y / tau,
                    iters: it,
                };
            }
            if by > 0.0 && (&at * &y + &s).amax() <= tol * by {
                return Outcome::Failed(Status::Infeasible, it);
            }
            if -cx > 0.0 && (&self.a * &x).amax() <= tol * -cx {
                return Outcome::Failed(Status::Unbounded, it);
            }
            let best_score = best.as_ref().map_or(f64::INFINITY, |b| b.0);
            // rounding has taken over: residuals grow while μ shrinks
            if best_score <= tol.sqrt() && score > 100.0 * best_score {
                return stalled(best, it);
            }
            if score < best_score {
                best = Some((score, &x / tau, &y / tau));
            }
            if it == opts.max_iter {
                break;
            }

            let sc = self.scalings(&x, &s);
            let lambda = self.apply_w(&sc, &x, false);
            let mut mm = self.normal_matrix(&sc);
            let chol = factor(&mut mm);
            let Some(chol) = chol else {
                return stalled(best, it);
            };

            // A dx = p, -H dx + Aᵀ dy = q by the normal equations, refined
            // against the unreduced system
            let kkt = |p: &DVector<f64>, q: &DVector<f64>| {
                let mut dy = chol.solve(&(p + &self.a * self.apply_hinv(&sc, q)));
                let mut dx = self.apply_hinv(&sc, &(&at * &dy - q));
                let size = p.amax().max(q.amax()).max(1e-300);
                let mut last = f64::INFINITY;
                for _ in 0..REFINE_STEPS {
                    let rp = p - &self.a * &dx;
                    let rq = q + self.apply_hinv_inv(&sc, &dx) - &at * &dy;
                    let err = rp.amax().max(rq.amax());
                    if err <= 1e-15 * size || err >= 0.5 * last {
                        break;
                    }
                    last = err;
                    let ey = chol.solve(&(&rp + &self.a * self.apply_hinv(&sc, &rq)));
                    dx += self.apply_hinv(&sc, &(&at * &ey - &rq));
                    dy += ey;
                }
                (dx, dy)
            };

            // second right-hand side is shared by predictor and corrector
            let (dx2, dy2) = kkt(&self.b, &self.c);
            let denom_tail = self.b.dot(&dy2) - self.c.dot(&dx2);

            let direction = |eta: f64, rc: &DVector<f64>, rtau: f64| {
                let qp = -(&rp * eta);
                let qd = -(&rd * eta) - self.apply_w(&sc, rc, false);
                let (dx1, dy1) = kkt(&qp, &qd);
                let dtau = (rtau - tau * (-eta * rg - self.c.dot(&dx1) + self.b.dot(&dy1)))
                    / (kappa + tau * denom_tail);
                let dy = dy1 + &dy2 * dtau;
                let dx = dx1 + &dx2 * dtau;
                let ds = self.apply_w(&sc, rc, false) - self.apply_hinv_inv(&sc, &dx);
                let dkappa = -eta * rg - self.c.dot(&dx) + self.b.dot(&dy);
                (dx, dy, ds, dtau, dkappa)
            };

            // predictor
            let rc_aff = -lambda.clone();
            let (dxa, _dya, dsa, dta, dka) = direction(1.0, &rc_aff, -tau * kappa);
            let alpha_aff = self
                .max_step(&x, &dxa)
                .min(self.max_step(&s, &dsa))
                .min(scalar_step(tau, dta))
                .min(scalar_step(kappa, dka))
                .min(1.0);
            let sigma = (1.0 - alpha_aff).powi(3);

            // corrector
            let wdx = self.apply_w(&sc, &dxa, false);
            let winv_ds = self.apply_w(&sc, &dsa, true);
            let corr = self.jordan(&wdx, &winv_ds);
            let target = &e * (sigma * mu) - corr;
            let rc = -&lambda + self.arrow_solve(&lambda, &target);
            let rtau = -tau * kappa + sigma * mu - dta * dka;
            let (dx, dy, ds, dt, dk) = direction(1.0 - sigma, &rc, rtau);
            let alpha = (opts.step_factor
                * self
                    .max_step(&x, &dx)
                    .min(self.max_step(&s, &ds))
                    .min(scalar_step(tau, dt))
                    .min(scalar_step(kappa, dk)))
            .min(1.0);
            if !(alpha > 0.0) || !alpha.is_finite() {
                return stalled(best, it);
            }
            x += &dx * alpha;
            y += &dy * alpha;
            s += &ds * alpha;
            tau += alpha * dt;
            kappa += alpha * dk;
            debug_assert_eq!(x.len(), n);
        }
        stalled(best, opts.max_iter)
    }

    /// `H v` with `H = WᵀW`.
    fn apply_hinv_inv(&self, sc: &[Scale], v: &DVector<f64>) -> DVector<f64> {
        let t = self.apply_w(sc, v, false);
        self.apply_w(sc, &t, false)
    }

    fn jordan(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(u.len());
        for blk in &self.blocks {
            match *blk {
                Block::NonNeg { off, len } => {
                    for i in off..off + len {
                        out[i] = u[i] * v[i];
                    }
                }
                Block::Soc { off, len } => {
                    let ub = u.rows(off, len);
                    let vb = v.rows(off, len);
                    out[off] = ub.dot(&vb);
                    for i in 1..len {
                        out[off + i] = ub[0] * vb[i] + vb[0] * ub[i];
                    }
                }
            }
        }
        out
    }

    /// Solves `λ ∘ z = r` blockwise.
    fn arrow_solve(&self, lam: &DVector<f64>, r: &DVector<f64>) -> DVector<f64> {
        let mut z = DVector::zeros(r.len());
        for blk in &self.blocks {
            match *blk {
                Block::NonNeg { off, len } => {
                    for i in off..off + len {
                        z[i] = r[i] / lam[i];
                    }
                }
                Block::Soc { off, len } => {
                    let l0 = lam[off];
                    let l1 = lam.rows(off + 1, len - 1);
                    let r0 = r[off];
                    let r1 = r.rows(off + 1, len - 1);
                    let det = l0 * l0 - l1.norm_squared();
                    let z0 = (l0 * r0 - l1.dot(&r1)) / det;
                    z[off] = z0;
                    for i in 1..len {
                        z[off + i] = (r[off + i] - lam[off + i] * z0) / l0;
                    }
                }
            }
        }
        z
    }

    /// Largest `α ≥ 0` keeping `v + α d` in the cone (infinite if unbounded).
    fn max_step(&self, v: &DVector<f64>, d: &DVector<f64>) -> f64 {
        let mut alpha = f64::INFINITY;
        for blk in &self.blocks {
            match *blk {
                Block::NonNeg { off, len } => {
                    for i in off..off + len {
                        if d[i] < 0.0 {
                            alpha = alpha.min(-v[i] / d[i]);
                        }
                    }
                }
                Block::Soc { off, len } => {
                    alpha = alpha.min(soc_step(
                        &v.as_slice()[off..off + len],
                        &d.as_slice()[off..off + len],
                    ));
                }
            }
        }
        alpha
    }

    fn report(&self, cp: &ConeProgram, xi: &DVector<f64>, y: &DVector<f64>, iters: usize) -> SolveReport {
        let x: Vec<f64> = self
            .var_map
            .iter()
            .map(|&(p, q)| xi[p] - q.map_or(0.0, |q| xi[q]))
            .collect();
        let y: Vec<f64> = y.iter().copied().collect();
        let ax = cp.a.mul_vec(&x);
        let aty = cp.a.tr_mul_vec(&y);
        let s: Vec<f64> = cp.objective.iter().zip(&aty).map(|(c, v)| c - v).collect();
        let mut primal_residual = ax
            .iter()
            .zip(&cp.b)
            .fold(0.0f64, |acc, (v, b)| acc.max((v - b).abs()));
        let mut dual_residual = 0.0f64;
        let mut off = 0;
        for cone in &cp.cones {
            let k = cone.size();
            let xb = &x[off..off + k];
            let sb = &s[off..off + k];
            match cone {
                Cone::Free(_) => {
                    dual_residual = sb.iter().fold(dual_residual, |a, v| a.max(v.abs()));
                }
                Cone::NonNeg(_) => {
                    primal_residual = xb.iter().fold(primal_residual, |a, v| a.max(-v));
                    dual_residual = sb.iter().fold(dual_residual, |a, v| a.max(-v));
                }
                Cone::Soc(_) => {
                    primal_residual = primal_residual.max(soc_violation(xb));
                    dual_residual = dual_residual.max(soc_violation(sb));
                }
            }
            off += k;
        }
        let primal_value = cp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        let dual_value = cp.b.iter().zip(&y).map(|(b, v)| b * v).sum();
        SolveReport {
            status: Status::Optimal,
            primal_value,
            dual_value,
            x,
            y_eq: y,
            y_ub: Vec::new(),
            s,
            primal_residual,
            dual_residual,
            iterations: iters,
            basis: Vec::new(),
        }
    }
}

fn soc_violation(v: &[f64]) -> f64 {
    let tail = v[1..].iter().map(|t| t * t).sum::<f64>().sqrt();
    (tail - v[0]).max(0.0)
}

fn scalar_step(v: f64, d: f64) -> f64 {
    if d < 0.0 {
        -v / d
    } else {
        f64::INFINITY
    }
}

/// Cholesky of the normal matrix, adding a growing diagonal shift when the
/// matrix is numerically singular (dependent rows).
fn factor(mm: &mut DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = mm.clone().cholesky() {
        return Some(c);
    }
    let scale = (0..mm.nrows()).fold(1e-300f64, |a, i| a.max(mm[(i, i)].abs()));
    let mut reg = 1e-14 * scale;
    for _ in 0..12 {
        let mut shifted = mm.clone();
        for i in 0..mm.nrows() {
            shifted[(i, i)] += reg;
        }
        if let Some(c) = shifted.cholesky() {
            return Some(c);
        }
        reg *= 100.0;
    }
    None
}

fn jflip(v: &mut [f64]) {
    v[1..].iter_mut().for_each(|t| *t = -*t);
}

/// `W̄ v` for the normalised scaling point `w` (`wᵀJw = 1`).
fn wbar_mul(w: &[f64], v: &[f64]) -> Vec<f64> {
    let w0 = w[0];
    let w1v1: f64 = w[1..].iter().zip(&v[1..]).map(|(a, b)| a * b).sum();
    let mut out = vec![0.0; v.len()];
    out[0] = w0 * v[0] + w1v1;
    let f = v[0] + w1v1 / (1.0 + w0);
    for i in 1..v.len() {
        out[i] = v[i] + f * w[i];
    }
    out
}

fn jnorm2(v: &[f64]) -> f64 {
    v[0] * v[0] - v[1..].iter().map(|t| t * t).sum::<f64>()
}

/// Nesterov-Todd scaling point of a Lorentz block: returns `(η, w̄)` with
/// `W = η W̄`, `W x = W⁻¹ s`.
fn nt_soc(x: &[f64], s: &[f64]) -> (f64, Vec<f64>) {
    let xj = jnorm2(x).max(1e-300).sqrt();
    let sj = jnorm2(s).max(1e-300).sqrt();
    let xb: Vec<f64> = x.iter().map(|v| v / xj).collect();
    let sb: Vec<f64> = s.iter().map(|v| v / sj).collect();
    let dot: f64 = xb.iter().zip(&sb).map(|(a, b)| a * b).sum();
    let gamma = ((1.0 + dot) / 2.0).sqrt();
    let mut w = vec![0.0; x.len()];
    w[0] = (sb[0] + xb[0]) / (2.0 * gamma);
    for i in 1..x.len() {
        w[i] = (sb[i] - xb[i]) / (2.0 * gamma);
    }
    ((sj / xj).sqrt(), w)
}

/// Largest step keeping `v + α d` inside the Lorentz cone, for `v` interior.
fn soc_step(v: &[f64], d: &[f64]) -> f64 {
    let a = jnorm2(d);
    let b = v[0] * d[0] - v[1..].iter().zip(&d[1..]).map(|(p, q)| p * q).sum::<f64>();
    let c = jnorm2(v).max(0.0);
    // q(α) = aα² + 2bα + c, q(0) = c ≥ 0
    let mut best = f64::INFINITY;
    if a.abs() <= 1e-300 {
        if b < 0.0 {
            best = -c / (2.0 * b);
        }
    } else {
        let disc = b * b - a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -(b + b.signum() * sq);
            for r in [q / a, if q != 0.0 { c / q } else { f64::INFINITY }] {
                if r > 0.0 {
                    best = best.min(r);
                }
            }
        }
    }
    if d[0] < 0.0 {
        best = best.min(-v[0] / d[0]);
    }
    best
}
