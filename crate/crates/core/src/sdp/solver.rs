//! Infeasible-start primal-dual path-following method with Nesterov-Todd
//! scaling and Mehrotra predictor-corrector steps.
//!
//! The variable is block diagonal: a dense block for the user matrix and a
//! diagonal block holding one slack per inequality, so every inequality
//! becomes an equality `tr(A_j X) - s_j = b_j`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::problem::{SdpProblem, SdpSolution, SolveStatus, SolverOptions};
use crate::error::Result;

const STEP_FRACTION: f64 = 0.98;
const REGULARIZATION: f64 = 1e-10;

/// Block-diagonal symmetric matrix: dense block plus diagonal block.
#[derive(Debug, Clone)]
struct Block {
    dense: DMatrix<f64>,
    diag: DVector<f64>,
}

impl Block {
    fn zeros(n: usize, p: usize) -> Self {
        Block { dense: DMatrix::zeros(n, n), diag: DVector::zeros(p) }
    }

    fn identity(n: usize, p: usize, scale: f64) -> Self {
        Block {
            dense: DMatrix::identity(n, n) * scale,
            diag: DVector::from_element(p, scale),
        }
    }

    fn inner(&self, other: &Block) -> f64 {
        self.dense.dot(&other.dense) + self.diag.dot(&other.diag)
    }

    fn axpy(&mut self, alpha: f64, other: &Block) {
        self.dense += &other.dense * alpha;
        self.diag.axpy(alpha, &other.diag, 1.0);
    }

    fn norm(&self) -> f64 {
        (self.dense.norm_squared() + self.diag.norm_squared()).sqrt()
    }

    fn symmetrize(&mut self) {
        let t = self.dense.transpose();
        self.dense += t;
        self.dense *= 0.5;
    }
}

/// Constraint row in expanded form: dense entries list both `(i, j)` and `(j, i)`.
#[derive(Debug, Clone)]
struct Row {
    dense: Vec<(usize, usize, f64)>,
    slack: Option<(usize, f64)>,
}

impl Row {
    fn apply(&self, x: &Block) -> f64 {
        let mut s: f64 = self.dense.iter().map(|&(i, j, v)| v * x.dense[(i, j)]).sum();
        if let Some((k, c)) = self.slack {
            s += c * x.diag[k];
        }
        s
    }

    fn add_scaled_to(&self, alpha: f64, out: &mut Block) {
        for &(i, j, v) in &self.dense {
            out.dense[(i, j)] += alpha * v;
        }
        if let Some((k, c)) = self.slack {
            out.diag[k] += alpha * c;
        }
    }

    fn to_block(&self, n: usize, p: usize) -> Block {
        let mut b = Block::zeros(n, p);
        self.add_scaled_to(1.0, &mut b);
        b
    }
}

/// Nesterov-Todd scaling `W = G G^T` with `G^{-1} X G^{-T} = G^T Z G = diag(lambda)`.
struct Scaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    lambda: DVector<f64>,
    diag_w: DVector<f64>,
    diag_lambda: DVector<f64>,
    chol_x: DMatrix<f64>,
    chol_z: DMatrix<f64>,
}

impl Scaling {
    fn new(x: &Block, z: &Block) -> Option<Self> {
        let lx = Cholesky::new(x.dense.clone())?.unpack();
        let lz = Cholesky::new(z.dense.clone())?.unpack();
        let svd = (lz.transpose() * &lx).svd(true, true);
        let u_t = svd.v_t?;
        let q = u_t.transpose();
        let sigma = svd.singular_values;
        if sigma.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return None;
        }
        let inv_sqrt = sigma.map(|s| 1.0 / s.sqrt());
        let sqrt = sigma.map(f64::sqrt);
        let mut g = &lx * &q;
        for (j, f) in inv_sqrt.iter().enumerate() {
            g.column_mut(j).scale_mut(*f);
        }
        // G^{-1} = Sigma^{1/2} Q^T L_X^{-1}
        let lx_inv = lx.solve_lower_triangular(&DMatrix::identity(lx.nrows(), lx.nrows()))?;
        let mut g_inv = q.transpose() * lx_inv;
        for (i, f) in sqrt.iter().enumerate() {
            g_inv.row_mut(i).scale_mut(*f);
        }
        let w = &g * g.transpose();

        if x.diag.iter().chain(z.diag.iter()).any(|v| !(*v > 0.0)) {
            return None;
        }
        let diag_w = x.diag.zip_map(&z.diag, |a, b| (a / b).sqrt());
        let diag_lambda = x.diag.zip_map(&z.diag, |a, b| (a * b).sqrt());
        Some(Scaling { g, g_inv, w, lambda: sigma, diag_w, diag_lambda, chol_x: lx, chol_z: lz })
    }

    /// `G D G^T` where `D` solves `Lambda D + D Lambda = R` blockwise.
    fn lift(&self, r_dense: &DMatrix<f64>, r_diag: &DVector<f64>) -> Block {
        let n = self.lambda.len();
        let d = DMatrix::from_fn(n, n, |i, j| r_dense[(i, j)] / (self.lambda[i] + self.lambda[j]));
        let dense = &self.g * d * self.g.transpose();
        let diag = r_diag.zip_map(&self.diag_lambda, |r, l| r / (2.0 * l)).component_mul(&self.diag_w);
        Block { dense, diag }
    }

    /// `W S W` blockwise.
    fn sandwich(&self, s: &Block) -> Block {
        Block {
            dense: &self.w * &s.dense * &self.w,
            diag: s.diag.component_mul(&self.diag_w).component_mul(&self.diag_w),
        }
    }

    /// Scaled primal direction `G^{-1} dX G^{-T}`.
    fn scale_primal(&self, dx: &Block) -> Block {
        Block {
            dense: &self.g_inv * &dx.dense * self.g_inv.transpose(),
            diag: dx.diag.component_div(&self.diag_w),
        }
    }

    /// Scaled dual direction `G^T dZ G`.
    fn scale_dual(&self, dz: &Block) -> Block {
        Block {
            dense: self.g.transpose() * &dz.dense * &self.g,
            diag: dz.diag.component_mul(&self.diag_w),
        }
    }
}

/// Largest `alpha <= 1/STEP_FRACTION`-limited step keeping `M + alpha dM ⪰ 0`,
/// given the Cholesky factor of `M`.
fn max_step(chol: &DMatrix<f64>, m_diag: &DVector<f64>, d: &Block) -> f64 {
    let mut alpha = f64::INFINITY;
    if chol.nrows() > 0 {
        let half = chol.solve_lower_triangular(&d.dense);
        let scaled = half.and_then(|h| chol.solve_lower_triangular(&h.transpose()));
        match scaled {
            Some(s) => {
                let s = (&s + s.transpose()) * 0.5;
                let min = s.symmetric_eigenvalues().min();
                if min < 0.0 {
                    alpha = alpha.min(-1.0 / min);
                }
            }
            None => return 0.0,
        }
    }
    for (x, dx) in m_diag.iter().zip(d.diag.iter()) {
        if *dx < 0.0 {
            alpha = alpha.min(-x / dx);
        }
    }
    alpha
}

struct Internal {
    n: usize,
    p: usize,
    cost: Block,
    rows: Vec<Row>,
    rhs: DVector<f64>,
    /// Rows with many entries use the dense Schur-complement route.
    dense_rows: Vec<bool>,
}

impl Internal {
    fn from_problem(problem: &SdpProblem, cost_scale: f64) -> Self {
        let n = problem.order();
        let p = problem.inequalities.len();
        let mut rows = Vec::with_capacity(problem.equalities.len() + p);
        let mut rhs = Vec::with_capacity(rows.capacity());
        let expand = |entries: &[(usize, usize, f64)]| {
            let mut out = Vec::with_capacity(2 * entries.len());
            for &(i, j, v) in entries {
                out.push((i, j, v));
                if i != j {
                    out.push((j, i, v));
                }
            }
            out
        };
        for c in &problem.equalities {
            rows.push(Row { dense: expand(&c.matrix.entries), slack: None });
            rhs.push(c.rhs);
        }
        for (k, c) in problem.inequalities.iter().enumerate() {
            rows.push(Row { dense: expand(&c.matrix.entries), slack: Some((k, -1.0)) });
            rhs.push(c.rhs);
        }
        let dense_rows = rows.iter().map(|r| r.dense.len() > 2 * n).collect();
        Internal {
            n,
            p,
            cost: Block { dense: &problem.cost / cost_scale, diag: DVector::zeros(p) },
            rows,
            rhs: DVector::from_vec(rhs),
            dense_rows,
        }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &Block) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.rows.iter().map(|r| r.apply(x)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> Block {
        let mut out = Block::zeros(self.n, self.p);
        for (r, yi) in self.rows.iter().zip(y.iter()) {
            r.add_scaled_to(*yi, &mut out);
        }
        out
    }

    /// `M_ij = <A_i, W A_j W>`.
    fn schur(&self, sc: &Scaling) -> DMatrix<f64> {
        let m = self.m();
        let w = &sc.w;
        let mut mat = DMatrix::zeros(m, m);
        for j in 0..m {
            let rj = &self.rows[j];
            if self.dense_rows[j] {
                let wa = sc.sandwich(&rj.to_block(self.n, self.p));
                for i in 0..m {
                    mat[(i, j)] = self.rows[i].apply(&wa);
                }
                continue;
            }
            for i in 0..=j {
                let ri = &self.rows[i];
                let v = if self.dense_rows[i] {
                    continue;
                } else {
                    let mut s = 0.0;
                    for &(a, b, u) in &ri.dense {
                        for &(c, d, v) in &rj.dense {
                            s += u * v * w[(a, c)] * w[(d, b)];
                        }
                    }
                    if let (Some((ki, ci)), Some((kj, cj))) = (ri.slack, rj.slack) {
                        if ki == kj {
                            s += ci * cj * sc.diag_w[ki] * sc.diag_w[ki];
                        }
                    }
                    s
                };
                mat[(i, j)] = v;
                mat[(j, i)] = v;
            }
        }
        // dense rows filled column-wise; mirror them
        for j in 0..m {
            if self.dense_rows[j] {
                for i in 0..m {
                    mat[(j, i)] = mat[(i, j)];
                }
            }
        }
        mat
    }
}

/// Factorization of the Schur complement after symmetric diagonal
/// equilibration, with iterative refinement against the unregularized matrix.
struct Factor {
    matrix: DMatrix<f64>,
    scale: DVector<f64>,
    inner: FactorKind,
}

enum FactorKind {
    Chol(Cholesky<f64, Dyn>),
    Lu(nalgebra::LU<f64, Dyn, Dyn>),
}

impl Factor {
    fn new(matrix: DMatrix<f64>) -> Option<Self> {
        let scale = matrix.diagonal().map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 });
        let mut eq = DMatrix::from_fn(matrix.nrows(), matrix.ncols(), |i, j| matrix[(i, j)] * scale[i] * scale[j]);
        for i in 0..eq.nrows() {
            eq[(i, i)] += REGULARIZATION;
        }
        let inner = match Cholesky::new(eq.clone()) {
            Some(c) => FactorKind::Chol(c),
            None => {
                let lu = eq.lu();
                if !lu.is_invertible() {
                    return None;
                }
                FactorKind::Lu(lu)
            }
        };
        Some(Factor { matrix, scale, inner })
    }

    fn solve_once(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let r = rhs.component_mul(&self.scale);
        let u = match &self.inner {
            FactorKind::Chol(c) => c.solve(&r),
            FactorKind::Lu(l) => l.solve(&r)?,
        };
        Some(u.component_mul(&self.scale))
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let mut x = self.solve_once(rhs)?;
        for _ in 0..3 {
            let res = rhs - &self.matrix * &x;
            x += self.solve_once(&res)?;
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

struct Direction {
    dx: Block,
    dy: DVector<f64>,
    dz: Block,
}

/// Solves `problem` to the requested tolerance.
///
/// The result is deterministic for identical inputs.
pub fn solve(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let cost_norm = problem.cost.norm();
    let cost_scale = if cost_norm > 0.0 { cost_norm } else { 1.0 };
    let ip = Internal::from_problem(problem, cost_scale);
    let (n, p, m) = (ip.n, ip.p, ip.m());
    let nu = (n + p) as f64;

    let start = 1.0 + ip.rhs.amax();
    let mut x = Block::identity(n, p, start);
    let mut z = Block::identity(n, p, start);
    let mut y = DVector::zeros(m);

    let b_norm_rows: Vec<f64> = ip.rhs.iter().map(|b| 1.0 + b.abs()).collect();
    let cnorm = ip.cost.norm();
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;

    loop {
        let r_p = &ip.rhs - ip.apply(&x);
        let mut r_d = ip.cost.clone();
        r_d.axpy(-1.0, &ip.adjoint(&y));
        r_d.axpy(-1.0, &z);

        let pobj = ip.cost.inner(&x);
        let dobj = ip.rhs.dot(&y);
        let xz = x.inner(&z);
        let pinf = r_p.iter().zip(&b_norm_rows).map(|(r, s)| r.abs() / s).fold(0.0, f64::max);
        let dinf = r_d.norm() / (1.0 + cnorm);
        let gap = (pobj - dobj).abs().max(xz) / (1.0 + pobj.abs());

        if pinf <= opts.tol && dinf <= opts.tol && gap <= opts.tol {
            status = SolveStatus::Optimal;
            break;
        }
        if dobj > 0.0 && y.amax() > 1e8 && infeasibility_certificate(&ip, &y, dobj) {
            status = SolveStatus::Infeasible;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }

        let Some(sc) = Scaling::new(&x, &z) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let Some(factor) = Factor::new(ip.schur(&sc)) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let mu = xz / nu;
        let wrw = sc.sandwich(&r_d);

        let solve_dir = |h: Block| -> Option<Direction> {
            let mut t = h.clone();
            t.axpy(-1.0, &wrw);
            let rhs = &r_p - ip.apply(&t);
            let dy = factor.solve(&rhs)?;
            let mut dz = r_d.clone();
            dz.axpy(-1.0, &ip.adjoint(&dy));
            let mut dx = h;
            dx.axpy(-1.0, &sc.sandwich(&dz));
            dx.symmetrize();
            dz.symmetrize();
            Some(Direction { dx, dy, dz })
        };

        // predictor: D = -Lambda, i.e. H = -X
        let mut neg_x = x.clone();
        neg_x.dense *= -1.0;
        neg_x.diag *= -1.0;
        let Some(aff) = solve_dir(neg_x) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let ap = max_step(&sc.chol_x, &x.diag, &aff.dx).min(1.0);
        let ad = max_step(&sc.chol_z, &z.diag, &aff.dz).min(1.0);
        let mut xa = x.clone();
        xa.axpy(ap, &aff.dx);
        let mut za = z.clone();
        za.axpy(ad, &aff.dz);
        let mu_aff = xa.inner(&za) / nu;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector: Lambda D + D Lambda = 2 sigma mu I - 2 Lambda^2 - (dx~ dz~ + dz~ dx~)
        let sx = sc.scale_primal(&aff.dx);
        let sz = sc.scale_dual(&aff.dz);
        let cross = &sx.dense * &sz.dense;
        let mut r_dense = -(&cross + cross.transpose());
        for i in 0..n {
            r_dense[(i, i)] += 2.0 * sigma * mu - 2.0 * sc.lambda[i] * sc.lambda[i];
        }
        let r_diag = DVector::from_fn(p, |k, _| {
            let l = sc.diag_lambda[k];
            2.0 * sigma * mu - 2.0 * l * l - 2.0 * sx.diag[k] * sz.diag[k]
        });
        let Some(dir) = solve_dir(sc.lift(&r_dense, &r_diag)) else {
            status = SolveStatus::NumericalFailure;
            break;
        };

        let ap = (STEP_FRACTION * max_step(&sc.chol_x, &x.diag, &dir.dx)).min(1.0);
        let ad = (STEP_FRACTION * max_step(&sc.chol_z, &z.diag, &dir.dz)).min(1.0);
        if !(ap > 1e-12 && ad > 1e-12) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        x.axpy(ap, &dir.dx);
        y.axpy(ad, &dir.dy, 1.0);
        z.axpy(ad, &dir.dz);
        x.symmetrize();
        z.symmetrize();
        iterations += 1;
    }

    Ok(finish(problem, &ip, x, y, z, cost_scale, status, iterations))
}

/// Primal infeasibility: `b^T y > 0` with `A*(y) ⪯ 0` after normalizing by `b^T y`.
fn infeasibility_certificate(ip: &Internal, y: &DVector<f64>, dobj: f64) -> bool {
    let ay = ip.adjoint(&(y / dobj));
    let dense_max = if ip.n > 0 {
        SymmetricEigen::new(ay.dense.clone()).eigenvalues.max()
    } else {
        f64::NEG_INFINITY
    };
    let diag_max = ay.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    dense_max.max(diag_max) <= 1e-8
}

#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &SdpProblem,
    ip: &Internal,
    x: Block,
    y: DVector<f64>,
    z: Block,
    cost_scale: f64,
    status: SolveStatus,
    iterations: usize,
) -> SdpSolution {
    let r_p = &ip.rhs - ip.apply(&x);
    let mut r_d = ip.cost.clone();
    r_d.axpy(-1.0, &ip.adjoint(&y));
    r_d.axpy(-1.0, &z);
    let primal_residual = r_p
        .iter()
        .zip(ip.rhs.iter())
        .map(|(r, b)| r.abs() / (1.0 + b.abs()))
        .fold(0.0, f64::max);
    let dual_residual = r_d.norm() / (1.0 + ip.cost.norm());

    let objective = problem.cost.dot(&x.dense);
    let dual = &y * cost_scale;
    let dual_objective = ip.rhs.dot(&dual);
    let duality_gap = (objective - dual_objective).abs().max(x.inner(&z) * cost_scale);

    SdpSolution {
        x: x.dense,
        slacks: x.diag,
        dual,
        objective,
        dual_objective,
        duality_gap,
        primal_residual,
        dual_residual,
        status,
        iterations,
    }
}
