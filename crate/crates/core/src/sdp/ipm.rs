//! Infeasible-start primal-dual path-following with NT scaling and a
//! Mehrotra predictor-corrector, on the real-embedded problem.
//!
//! Internally the solver works with `min <C', X>` where `C' = −C`, so the
//! internal multipliers are the negatives of the reported ones.

use super::{
    real_embed, unembed_hermitian, BlockKind, BlockValue, SdpOptions, SdpProblem, SdpSolution, SdpStatus,
};
use crate::error::Result;
use crate::linalg::{ComplexMatrix, RealMatrix, C64};

const STEP_FRACTION: f64 = 0.98;
const BLOWUP: f64 = 1e10;

#[derive(Clone, Copy)]
enum Slot {
    Dense(usize),
    Lp(usize),
}

/// One constraint row (or the objective) after lowering to real data.
#[derive(Clone, Default)]
struct Row {
    /// `(dense block, r, c, v)` with `r <= c`.
    dense: Vec<(usize, usize, usize, f64)>,
    lp: Vec<(usize, f64)>,
}

struct Lowered {
    dense_dims: Vec<usize>,
    n_lp: usize,
    slots: Vec<Slot>,
    rows: Vec<Row>,
    b: Vec<f64>,
    c: Row,
}

impl Lowered {
    fn new(p: &SdpProblem) -> Self {
        let mut dense_dims = Vec::new();
        let mut n_lp = 0;
        let slots: Vec<Slot> = p
            .blocks
            .iter()
            .map(|k| match *k {
                BlockKind::Real(n) | BlockKind::Complex(n) => {
                    dense_dims.push(n);
                    Slot::Dense(dense_dims.len() - 1)
                }
                BlockKind::Diagonal(n) => {
                    n_lp += n;
                    Slot::Lp(n_lp - n)
                }
            })
            .collect();
        let lower = |op: &super::BlockSparse, sign: f64| -> Row {
            let mut row = Row::default();
            for &(b, r, c, v) in op.entries() {
                match slots[b] {
                    Slot::Dense(k) => row.dense.push((k, r, c, sign * v.re)),
                    Slot::Lp(off) => row.lp.push((off + r, sign * v.re)),
                }
            }
            row
        };
        let rows = p.constraints.iter().map(|(a, _)| lower(a, 1.0)).collect();
        let b = p.constraints.iter().map(|(_, b)| *b).collect();
        let c = lower(&p.objective, -1.0);
        Self {
            dense_dims,
            n_lp,
            slots,
            rows,
            b,
            c,
        }
    }

    fn total_dim(&self) -> f64 {
        (self.dense_dims.iter().sum::<usize>() + self.n_lp) as f64
    }
}

fn row_inner(row: &Row, xs: &[RealMatrix], x: &[f64]) -> f64 {
    let mut s = 0.0;
    for &(k, r, c, v) in &row.dense {
        s += if r == c {
            v * xs[k][(r, r)]
        } else {
            2.0 * v * xs[k][(r, c)]
        };
    }
    for &(i, v) in &row.lp {
        s += v * x[i];
    }
    s
}

fn add_row(row: &Row, scale: f64, xs: &mut [RealMatrix], x: &mut [f64]) {
    for &(k, r, c, v) in &row.dense {
        xs[k][(r, c)] += scale * v;
        if r != c {
            xs[k][(c, r)] += scale * v;
        }
    }
    for &(i, v) in &row.lp {
        x[i] += scale * v;
    }
}

#[derive(Clone)]
struct Point {
    xs: Vec<RealMatrix>,
    zs: Vec<RealMatrix>,
    x: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
}

struct Scaling {
    g: Vec<RealMatrix>,
    w: Vec<RealMatrix>,
    lam: Vec<Vec<f64>>,
    /// `sqrt(x/z)` per LP variable.
    w_lp: Vec<f64>,
    lam_lp: Vec<f64>,
}

fn nt_scaling(pt: &Point) -> Option<Scaling> {
    let mut g = Vec::new();
    let mut w = Vec::new();
    let mut lam = Vec::new();
    for (x, z) in pt.xs.iter().zip(&pt.zs) {
        let l = x.cholesky()?;
        let mut k = l.tmatmul(z).matmul(&l);
        k.symmetrize();
        let (s, v) = k.symmetric_eig();
        if s.iter().any(|&si| !(si > 0.0)) {
            return None;
        }
        let lm: Vec<f64> = s.iter().map(|si| si.sqrt()).collect();
        let n = x.rows();
        let vs = RealMatrix::from_fn(n, n, |r, c| v[(r, c)] / lm[c].sqrt());
        let gi = l.matmul(&vs);
        let mut wi = gi.matmul_t(&gi);
        wi.symmetrize();
        g.push(gi);
        w.push(wi);
        lam.push(lm);
    }
    let w_lp = pt.x.iter().zip(&pt.z).map(|(a, b)| (a / b).sqrt()).collect();
    let lam_lp = pt.x.iter().zip(&pt.z).map(|(a, b)| (a * b).sqrt()).collect();
    Some(Scaling {
        g,
        w,
        lam,
        w_lp,
        lam_lp,
    })
}

/// `W A W` for the dense part of a row, one optional matrix per block.
fn scaled_row(row: &Row, w: &[RealMatrix]) -> Vec<Option<RealMatrix>> {
    let mut out: Vec<Option<RealMatrix>> = vec![None; w.len()];
    for &(k, r, c, v) in &row.dense {
        let wk = &w[k];
        let n = wk.rows();
        let m = out[k].get_or_insert_with(|| RealMatrix::zeros(n, n));
        if r == c {
            for i in 0..n {
                let a = v * wk[(i, r)];
                for j in 0..n {
                    m[(i, j)] += a * wk[(r, j)];
                }
            }
        } else {
            for i in 0..n {
                let a = v * wk[(i, r)];
                let b = v * wk[(i, c)];
                for j in 0..n {
                    m[(i, j)] += a * wk[(c, j)] + b * wk[(r, j)];
                }
            }
        }
    }
    out
}

fn schur(low: &Lowered, sc: &Scaling) -> RealMatrix {
    let m = low.rows.len();
    let mut mat = RealMatrix::zeros(m, m);
    for j in 0..m {
        let bj = scaled_row(&low.rows[j], &sc.w);
        for i in 0..=j {
            let mut s = 0.0;
            for &(k, r, c, v) in &low.rows[i].dense {
                if let Some(b) = &bj[k] {
                    s += if r == c { v * b[(r, r)] } else { 2.0 * v * b[(r, c)] };
                }
            }
            mat[(i, j)] = s;
            mat[(j, i)] = s;
        }
    }
    if low.n_lp > 0 {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); low.n_lp];
        for (i, row) in low.rows.iter().enumerate() {
            for &(k, v) in &row.lp {
                cols[k].push((i, v));
            }
        }
        for (k, col) in cols.iter().enumerate() {
            let d = sc.w_lp[k] * sc.w_lp[k];
            for &(i, a) in col {
                for &(j, b) in col {
                    mat[(i, j)] += d * a * b;
                }
            }
        }
    }
    mat
}

fn factor(mat: &RealMatrix) -> Option<RealMatrix> {
    if let Some(l) = mat.cholesky() {
        return Some(l);
    }
    let n = mat.rows();
    let scale = (0..n).map(|i| mat[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = 1e-14;
    while reg < 1e-4 {
        let mut m = mat.clone();
        for i in 0..n {
            m[(i, i)] += reg * scale;
        }
        if let Some(l) = m.cholesky() {
            return Some(l);
        }
        reg *= 100.0;
    }
    None
}

struct Direction {
    dxs: Vec<RealMatrix>,
    dzs: Vec<RealMatrix>,
    dx: Vec<f64>,
    dz: Vec<f64>,
    dy: Vec<f64>,
}

/// Solves `A dX = rp`, `A^T dy + dZ = Rd`, `dX + W dZ W = Rc`.
fn solve_newton(
    low: &Lowered,
    sc: &Scaling,
    chol: &RealMatrix,
    rp: &[f64],
    rd: &(Vec<RealMatrix>, Vec<f64>),
    rc: &(Vec<RealMatrix>, Vec<f64>),
) -> Direction {
    // T = Rc − W Rd W
    let t_dense: Vec<RealMatrix> = rc
        .0
        .iter()
        .zip(&rd.0)
        .zip(&sc.w)
        .map(|((c, d), w)| {
            let mut t = c.clone();
            t.add_scaled(&w.matmul(d).matmul(w), -1.0);
            t
        })
        .collect();
    let t_lp: Vec<f64> = (0..low.n_lp)
        .map(|k| rc.1[k] - sc.w_lp[k] * sc.w_lp[k] * rd.1[k])
        .collect();
    let rhs: Vec<f64> = low
        .rows
        .iter()
        .zip(rp)
        .map(|(row, p)| p - row_inner(row, &t_dense, &t_lp))
        .collect();
    let dy = RealMatrix::cholesky_solve(chol, &rhs);
    let mut dzs = rd.0.clone();
    let mut dz = rd.1.clone();
    for (row, &yi) in low.rows.iter().zip(&dy) {
        add_row(row, -yi, &mut dzs, &mut dz);
    }
    let dxs = rc
        .0
        .iter()
        .zip(&dzs)
        .zip(&sc.w)
        .map(|((c, dzk), w)| {
            let mut dx = c.clone();
            dx.add_scaled(&w.matmul(dzk).matmul(w), -1.0);
            dx.symmetrize();
            dx
        })
        .collect();
    let dx = (0..low.n_lp)
        .map(|k| rc.1[k] - sc.w_lp[k] * sc.w_lp[k] * dz[k])
        .collect();
    Direction {
        dxs,
        dzs,
        dx,
        dz,
        dy,
    }
}

/// Largest `α` with `X + α dX ⪰ 0` (may be infinite).
fn max_step(xs: &[RealMatrix], dxs: &[RealMatrix], x: &[f64], dx: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xm, dm) in xs.iter().zip(dxs) {
        let Some(l) = xm.cholesky() else {
            return 0.0;
        };
        let li = l.lower_inverse();
        let mut m = li.matmul(dm).matmul_t(&li);
        m.symmetrize();
        let lmin = m.min_eigenvalue();
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    for (&xi, &di) in x.iter().zip(dx) {
        if di < 0.0 {
            alpha = alpha.min(-xi / di);
        }
    }
    alpha
}

fn inner_point(xs: &[RealMatrix], zs: &[RealMatrix], x: &[f64], z: &[f64]) -> f64 {
    xs.iter().zip(zs).map(|(a, b)| a.dot(b)).sum::<f64>()
        + x.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
}

fn stepped(a: &[RealMatrix], da: &[RealMatrix], t: f64) -> Vec<RealMatrix> {
    a.iter()
        .zip(da)
        .map(|(m, d)| {
            let mut m = m.clone();
            m.add_scaled(d, t);
            m
        })
        .collect()
}

fn stepped_vec(a: &[f64], da: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(da).map(|(x, d)| x + t * d).collect()
}

fn row_norm(row: &Row) -> f64 {
    let mut s = 0.0;
    for &(_, r, c, v) in &row.dense {
        s += if r == c { v * v } else { 2.0 * v * v };
    }
    for &(_, v) in &row.lp {
        s += v * v;
    }
    s.sqrt()
}

fn initial_point(low: &Lowered) -> Point {
    let n = low.total_dim();
    let an: Vec<f64> = low.rows.iter().map(row_norm).collect();
    let cn = row_norm(&low.c);
    let mut xi: f64 = 10f64.max(n.sqrt());
    let mut eta: f64 = 10f64.max(n.sqrt()).max(cn);
    for (a, b) in an.iter().zip(&low.b) {
        xi = xi.max(n * (1.0 + b.abs()) / (1.0 + a));
        eta = eta.max(*a);
    }
    Point {
        xs: low
            .dense_dims
            .iter()
            .map(|&d| RealMatrix::scaled_identity(d, xi))
            .collect(),
        zs: low
            .dense_dims
            .iter()
            .map(|&d| RealMatrix::scaled_identity(d, eta))
            .collect(),
        x: vec![xi; low.n_lp],
        z: vec![eta; low.n_lp],
        y: vec![0.0; low.rows.len()],
    }
}

struct Residuals {
    rp: Vec<f64>,
    rd: (Vec<RealMatrix>, Vec<f64>),
    pobj: f64,
    dobj: f64,
}

fn residuals(low: &Lowered, pt: &Point) -> Residuals {
    let rp = low
        .rows
        .iter()
        .zip(&low.b)
        .map(|(row, b)| b - row_inner(row, &pt.xs, &pt.x))
        .collect();
    let mut rdd: Vec<RealMatrix> = pt.zs.iter().map(|z| {
        let mut m = z.clone();
        m.scale(-1.0);
        m
    }).collect();
    let mut rdl: Vec<f64> = pt.z.iter().map(|z| -z).collect();
    add_row(&low.c, 1.0, &mut rdd, &mut rdl);
    for (row, &yi) in low.rows.iter().zip(&pt.y) {
        add_row(row, -yi, &mut rdd, &mut rdl);
    }
    let pobj = row_inner(&low.c, &pt.xs, &pt.x);
    let dobj = low.b.iter().zip(&pt.y).map(|(b, y)| b * y).sum();
    Residuals {
        rp,
        rd: (rdd, rdl),
        pobj,
        dobj,
    }
}

fn norm_pair(m: &(Vec<RealMatrix>, Vec<f64>)) -> f64 {
    (m.0.iter().map(|a| a.dot(a)).sum::<f64>() + m.1.iter().map(|a| a * a).sum::<f64>()).sqrt()
}

/// Solves the problem; malformed input is an error, non-convergence is
/// reported through [`SdpStatus`].
pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let real = real_embed(problem);
    let low = Lowered::new(&real);
    let n = low.total_dim();
    let cnorm = row_norm(&low.c);
    let mut pt = initial_point(&low);
    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let mut res = residuals(&low, &pt);

    for it in 0..opts.max_iter {
        iterations = it;
        let gap = (res.pobj - res.dobj).abs();
        let pinf = res.rp.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let dinf = norm_pair(&res.rd);
        if gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol * (1.0 + cnorm)
        {
            status = SdpStatus::Optimal;
            break;
        }
        let big = pt.xs.iter().map(|a| a.frobenius_norm()).fold(0.0, f64::max)
            + pt.x.iter().fold(0.0f64, |a, v| a.max(v.abs()))
            + pt.y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if big > BLOWUP || !big.is_finite() {
            status = SdpStatus::Infeasible;
            break;
        }
        let mu = inner_point(&pt.xs, &pt.zs, &pt.x, &pt.z) / n;
        let Some(sc) = nt_scaling(&pt) else { break };
        let Some(chol) = factor(&schur(&low, &sc)) else { break };

        // predictor
        let rc_aff = (
            pt.xs
                .iter()
                .map(|x| {
                    let mut m = x.clone();
                    m.scale(-1.0);
                    m
                })
                .collect::<Vec<_>>(),
            pt.x.iter().map(|v| -v).collect::<Vec<_>>(),
        );
        let aff = solve_newton(&low, &sc, &chol, &res.rp, &res.rd, &rc_aff);
        let ap = max_step(&pt.xs, &aff.dxs, &pt.x, &aff.dx).min(1.0);
        let ad = max_step(&pt.zs, &aff.dzs, &pt.z, &aff.dz).min(1.0);
        let mu_aff = inner_point(
            &stepped(&pt.xs, &aff.dxs, ap),
            &stepped(&pt.zs, &aff.dzs, ad),
            &stepped_vec(&pt.x, &aff.dx, ap),
            &stepped_vec(&pt.z, &aff.dz, ad),
        ) / n;
        let sigma = (mu_aff / mu).max(0.0).powi(3).min(1.0);

        // corrector
        let mut rc_dense = Vec::with_capacity(pt.xs.len());
        for (k, g) in sc.g.iter().enumerate() {
            let lam = &sc.lam[k];
            let dim = lam.len();
            let dzt = g.tmatmul(&aff.dzs[k]).matmul(g);
            let mut dxt = dzt.clone();
            dxt.scale(-1.0);
            for i in 0..dim {
                dxt[(i, i)] -= lam[i];
            }
            let prod = dxt.matmul(&dzt);
            let mut d = RealMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    let mut r = -0.5 * (prod[(i, j)] + prod[(j, i)]);
                    if i == j {
                        r += sigma * mu - lam[i] * lam[i];
                    }
                    d[(i, j)] = 2.0 * r / (lam[i] + lam[j]);
                }
            }
            let mut rc = g.matmul(&d).matmul_t(g);
            rc.symmetrize();
            rc_dense.push(rc);
        }
        let rc_lp: Vec<f64> = (0..low.n_lp)
            .map(|k| {
                let (w, l) = (sc.w_lp[k], sc.lam_lp[k]);
                let dzt = w * aff.dz[k];
                let dxt = -l - dzt;
                let r = sigma * mu - l * l - dxt * dzt;
                w * r / l
            })
            .collect();
        let dir = solve_newton(&low, &sc, &chol, &res.rp, &res.rd, &(rc_dense, rc_lp));
        let ap = (STEP_FRACTION * max_step(&pt.xs, &dir.dxs, &pt.x, &dir.dx)).min(1.0);
        let ad = (STEP_FRACTION * max_step(&pt.zs, &dir.dzs, &pt.z, &dir.dz)).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        pt.xs = stepped(&pt.xs, &dir.dxs, ap);
        pt.x = stepped_vec(&pt.x, &dir.dx, ap);
        pt.zs = stepped(&pt.zs, &dir.dzs, ad);
        pt.z = stepped_vec(&pt.z, &dir.dz, ad);
        pt.y = stepped_vec(&pt.y, &dir.dy, ad);
        for m in pt.xs.iter_mut().chain(pt.zs.iter_mut()) {
            m.symmetrize();
        }
        res = residuals(&low, &pt);
        iterations = it + 1;
    }

    let pinf = res.rp.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let dinf = norm_pair(&res.rd);
    let recover = |dense: &[RealMatrix], lp: &[f64]| -> Vec<BlockValue> {
        problem
            .blocks
            .iter()
            .zip(&low.slots)
            .map(|(kind, slot)| match (*kind, *slot) {
                (BlockKind::Complex(_), Slot::Dense(k)) => {
                    BlockValue::Matrix(unembed_hermitian(&dense[k]))
                }
                (_, Slot::Dense(k)) => {
                    let m = &dense[k];
                    BlockValue::Matrix(ComplexMatrix::from_fn(m.rows(), m.cols(), |r, c| {
                        C64::new(m[(r, c)], 0.0)
                    }))
                }
                (kind, Slot::Lp(off)) => BlockValue::Diagonal(lp[off..off + kind.dim()].to_vec()),
            })
            .collect()
    };
    let primal_value = -res.pobj;
    let dual_value = -res.dobj;
    Ok(SdpSolution {
        x: recover(&pt.xs, &pt.x),
        z: recover(&pt.zs, &pt.z),
        y: pt.y.iter().map(|v| -v).collect(),
        primal_value,
        dual_value,
        gap: (primal_value - dual_value).abs(),
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        iterations,
        status,
    })
}
