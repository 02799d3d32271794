//! Choi operators, the half-diamond distance, optimal mixing of unitary
//! channels, and state distances.

pub mod geometry;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    partial_trace, trace_norm, ComplexMatrix, HermitianMatrix, Subsystem, Unitary, C64,
};
use crate::sdp::{solve, BlockKind, BlockSparse, SdpOptions, SdpProblem};

/// Weights tolerated below zero before a distribution is rejected.
const WEIGHT_TOL: f64 = 1e-8;

/// `J(Ξ) = Σ |i⟩⟨j| ⊗ Ξ(|i⟩⟨j|)` on `H1 ⊗ H2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiOperator {
    j: HermitianMatrix,
    dims: (usize, usize),
}

impl ChoiOperator {
    pub fn new(j: HermitianMatrix, dims: (usize, usize)) -> Result<Self> {
        if j.dim() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "Choi operator of size {} does not match dims {dims:?}",
                j.dim()
            )));
        }
        Ok(Self { j, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.j.as_matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.j
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// PSD and trace-preserving within `tol`.
    pub fn is_cptp(&self, tol: f64) -> bool {
        let Ok(marg) = partial_trace(self.matrix(), self.dims, Subsystem::Second) else {
            return false;
        };
        let dev = (&marg - &ComplexMatrix::identity(self.dims.0)).max_abs();
        let min = self.j.eigenvalues().last().copied().unwrap_or(0.0);
        dev <= tol && min >= -tol
    }

    /// `Σ p(x) J_x`.
    pub fn mixture(ops: &[ChoiOperator], p: &ProbabilityDistribution) -> Result<ChoiOperator> {
        let first = ops.first().ok_or(Error::EmptyCandidates)?;
        if ops.len() != p.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} operators but {} weights",
                ops.len(),
                p.len()
            )));
        }
        let n = first.j.dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (op, &w) in ops.iter().zip(p.weights()) {
            if op.dims != first.dims {
                return Err(Error::DimensionMismatch("mixed Choi dimensions".into()));
            }
            if w != 0.0 {
                acc = &acc + &op.matrix().scale_real(w);
            }
        }
        ChoiOperator::new(HermitianMatrix::new_unchecked(acc), first.dims)
    }
}

/// Weights over a finite index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityDistribution {
    weights: Vec<f64>,
}

impl ProbabilityDistribution {
    /// Accepts weights `≥ −1e-8` summing to 1 within `1e-8`; negatives are
    /// clamped to zero and the rest renormalized.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(w) = weights.iter().find(|&&w| w < -WEIGHT_TOL) {
            return Err(Error::InvalidArgument(format!("negative weight {w}")));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {s}")));
        }
        Ok(Self::normalized(weights))
    }

    /// Clamps negatives to zero and rescales to sum exactly 1.
    pub(crate) fn normalized(mut weights: Vec<f64>) -> Self {
        weights.iter_mut().for_each(|w| *w = w.max(0.0));
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        Self { weights }
    }

    pub fn point_mass(n: usize, i: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[i] = 1.0;
        Self { weights }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Choi operator of the channel `ρ ↦ U ρ U^dag`.
pub fn choi(u: &Unitary) -> ChoiOperator {
    let d = u.dim();
    let m = u.as_matrix();
    // J = |φ⟩⟨φ| with φ = Σ_i |i⟩ ⊗ U|i⟩
    let phi: Vec<C64> = (0..d * d).map(|k| m[(k % d, k / d)]).collect();
    let j = ComplexMatrix::outer(&phi, &phi);
    ChoiOperator {
        j: HermitianMatrix::new_unchecked(j),
        dims: (d, d),
    }
}

/// Half-diamond distance between unitary channels:
/// `sqrt(1 − dist(0, conv λ(U^dag V))²)`.
pub fn unitary_distance(u: &Unitary, v: &Unitary) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(format!(
            "unitaries of dimension {} and {}",
            u.dim(),
            v.dim()
        )));
    }
    let w = u.adjoint().compose(v)?;
    let pts: Vec<(f64, f64)> = w.eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    let r = geometry::project_onto_hull(&pts, (0.0, 0.0)).distance.min(1.0);
    Ok((1.0 - r * r).max(0.0).sqrt())
}

/// `(k, l, v)`: one upper-triangle entry per element of an orthonormal basis
/// of `n×n` Hermitian matrices.
fn hermitian_basis(n: usize) -> Vec<(usize, usize, C64)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        out.push((k, k, C64::new(1.0, 0.0)));
        for l in k + 1..n {
            out.push((k, l, C64::new(s, 0.0)));
            out.push((k, l, C64::new(0.0, s)));
        }
    }
    out
}

/// `tr(E M)` for the basis element with upper entry `v` at `(k, l)`.
fn basis_inner(k: usize, l: usize, v: C64, m: &ComplexMatrix) -> f64 {
    if k == l {
        v.re * m[(k, k)].re
    } else {
        2.0 * (v * m[(l, k)]).re
    }
}

fn check_pair(a: &ChoiOperator, b: &ChoiOperator) -> Result<()> {
    if a.dims != b.dims {
        return Err(Error::DimensionMismatch(format!(
            "Choi dims {:?} and {:?}",
            a.dims, b.dims
        )));
    }
    Ok(())
}

/// Lowered SDP for `½‖A − B‖⋄`:
/// `max tr(ΔJ T)  s.t.  T + T' = ρ ⊗ I, tr ρ = 1, T, T', ρ ⪰ 0`.
pub fn diamond_sdp(a: &ChoiOperator, b: &ChoiOperator) -> Result<SdpProblem> {
    check_pair(a, b)?;
    let (d1, d2) = a.dims;
    let n = d1 * d2;
    let mut p = SdpProblem::new(vec![
        BlockKind::Complex(n),
        BlockKind::Complex(n),
        BlockKind::Complex(d1),
    ]);
    p.objective.push_dense(0, &(a.matrix() - b.matrix()), 1.0);
    for (k, l, v) in hermitian_basis(n) {
        let mut row = BlockSparse::new();
        row.push(0, k, l, v);
        row.push(1, k, l, v);
        if k % d2 == l % d2 {
            row.push(2, k / d2, l / d2, -v);
        }
        p.add_constraint(row, 0.0);
    }
    let mut tr = BlockSparse::new();
    for i in 0..d1 {
        tr.push_real(2, i, i, 1.0);
    }
    p.add_constraint(tr, 1.0);
    Ok(p)
}

/// Certified half-diamond distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certified {
    pub value: f64,
    pub gap: f64,
}

pub fn diamond_distance_with(
    a: &ChoiOperator,
    b: &ChoiOperator,
    opts: &SdpOptions,
) -> Result<Certified> {
    for op in [a, b] {
        if !op.is_cptp(1e-8) {
            return Err(Error::InvalidArgument(
                "diamond distance needs Choi operators of channels".into(),
            ));
        }
    }
    let sol = solve(&diamond_sdp(a, b)?, opts)?.require_optimal()?;
    Ok(Certified {
        value: sol.primal_value.max(0.0),
        gap: sol.gap,
    })
}

/// Half-diamond distance `½‖A − B‖⋄` between two channels.
pub fn diamond_distance(a: &ChoiOperator, b: &ChoiOperator) -> Result<f64> {
    Ok(diamond_distance_with(a, b, &SdpOptions::default())?.value)
}

/// Optimal mixture and its half-diamond error.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    pub p: ProbabilityDistribution,
    pub value: f64,
    pub gap: f64,
}

fn check_candidates(target: &ChoiOperator, candidates: &[ChoiOperator]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    candidates.iter().try_for_each(|c| check_pair(target, c))
}

/// Lowering of the mixing problem in its minimization form, over
/// `S, Z2 = S − J + Σ p J_x, Z3 = r I − tr_2 S` and LP variables `[p, r]`,
/// maximizing `−r`. `Σ p = 1` is imposed as an equality.
pub fn mix_dual_sdp(target: &ChoiOperator, candidates: &[ChoiOperator]) -> Result<SdpProblem> {
    check_candidates(target, candidates)?;
    let (d1, d2) = target.dims;
    let n = d1 * d2;
    let m = candidates.len();
    let mut p = SdpProblem::new(vec![
        BlockKind::Complex(n),
        BlockKind::Complex(n),
        BlockKind::Complex(d1),
        BlockKind::Diagonal(m + 1),
    ]);
    p.objective.push_real(3, m, m, -1.0);
    for (k, l, v) in hermitian_basis(n) {
        let mut row = BlockSparse::new();
        row.push(1, k, l, v);
        row.push(0, k, l, -v);
        for (x, c) in candidates.iter().enumerate() {
            row.push_real(3, x, x, -basis_inner(k, l, v, c.matrix()));
        }
        p.add_constraint(row, -basis_inner(k, l, v, target.matrix()));
    }
    for (a, b, v) in hermitian_basis(d1) {
        let mut row = BlockSparse::new();
        row.push(2, a, b, v);
        if a == b {
            row.push_real(3, m, m, -v.re);
        }
        for s in 0..d2 {
            row.push(0, a * d2 + s, b * d2 + s, v);
        }
        p.add_constraint(row, 0.0);
    }
    let mut sum = BlockSparse::new();
    for x in 0..m {
        sum.push_real(3, x, x, 1.0);
    }
    p.add_constraint(sum, 1.0);
    Ok(p)
}

/// Lowering of the maximization form:
/// `max tr(J T) − t  s.t.  T + T' = ρ ⊗ I, tr ρ = 1, tr(J_x T) + s_x = t`,
/// with LP variables `[s, t]`.
pub fn mix_primal_sdp(target: &ChoiOperator, candidates: &[ChoiOperator]) -> Result<SdpProblem> {
    check_candidates(target, candidates)?;
    let (d1, d2) = target.dims;
    let n = d1 * d2;
    let m = candidates.len();
    let mut p = SdpProblem::new(vec![
        BlockKind::Complex(n),
        BlockKind::Complex(n),
        BlockKind::Complex(d1),
        BlockKind::Diagonal(m + 1),
    ]);
    p.objective.push_dense(0, target.matrix(), 1.0);
    p.objective.push_real(3, m, m, -1.0);
    for (k, l, v) in hermitian_basis(n) {
        let mut row = BlockSparse::new();
        row.push(0, k, l, v);
        row.push(1, k, l, v);
        if k % d2 == l % d2 {
            row.push(2, k / d2, l / d2, -v);
        }
        p.add_constraint(row, 0.0);
    }
    let mut tr = BlockSparse::new();
    for i in 0..d1 {
        tr.push_real(2, i, i, 1.0);
    }
    p.add_constraint(tr, 1.0);
    for (x, c) in candidates.iter().enumerate() {
        let mut row = BlockSparse::new();
        row.push_dense(0, c.matrix(), 1.0);
        row.push_real(3, x, x, 1.0);
        row.push_real(3, m, m, -1.0);
        p.add_constraint(row, 0.0);
    }
    Ok(p)
}

pub fn optimal_mix_with(
    target: &ChoiOperator,
    candidates: &[ChoiOperator],
    opts: &SdpOptions,
) -> Result<Mixture> {
    let sol = solve(&mix_dual_sdp(target, candidates)?, opts)?.require_optimal()?;
    let lp = sol.diag(3);
    let m = candidates.len();
    Ok(Mixture {
        p: ProbabilityDistribution::normalized(lp[..m].to_vec()),
        value: (-sol.primal_value).max(0.0),
        gap: sol.gap,
    })
}

/// `min_p ½‖Υ − Σ p(x) Υ_x‖⋄` and a minimizing distribution.
pub fn optimal_mix(target: &ChoiOperator, candidates: &[ChoiOperator]) -> Result<Mixture> {
    optimal_mix_with(target, candidates, &SdpOptions::default())
}

/// Optimal mixing value from the maximization lowering (no distribution).
pub fn optimal_mix_primal(target: &ChoiOperator, candidates: &[ChoiOperator]) -> Result<Certified> {
    let sol = solve(&mix_primal_sdp(target, candidates)?, &SdpOptions::default())?
        .require_optimal()?;
    Ok(Certified {
        value: sol.primal_value.max(0.0),
        gap: sol.gap,
    })
}

/// Validates a density operator: Hermitian, PSD and unit trace within 1e-8.
fn density(rho: &ComplexMatrix) -> Result<HermitianMatrix> {
    let h = HermitianMatrix::new(rho.clone())
        .map_err(|e| Error::NotDensity(e.to_string()))?;
    let t = rho.trace();
    if (t.re - 1.0).abs() > 1e-8 || t.im.abs() > 1e-8 {
        return Err(Error::NotDensity(format!("trace {t}")));
    }
    let min = h.eigenvalues().last().copied().unwrap_or(0.0);
    if min < -1e-8 {
        return Err(Error::NotDensity(format!("eigenvalue {min}")));
    }
    Ok(h)
}

/// Square root of a PSD matrix; eigenvalues below a relative threshold are
/// treated as zero so that pure states are handled exactly.
fn psd_sqrt(h: &HermitianMatrix) -> HermitianMatrix {
    let top = h.eigenvalues().first().copied().unwrap_or(0.0).abs();
    let cut = 1e-13 * top.max(1e-300);
    h.map_spectrum(|l| if l > cut { l.sqrt() } else { 0.0 })
}

/// `(tr sqrt(sqrt(ρ) σ sqrt(ρ)))²`.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let r = density(rho)?;
    let s = density(sigma)?;
    if r.dim() != s.dim() {
        return Err(Error::DimensionMismatch("state dimensions differ".into()));
    }
    let sr = psd_sqrt(&r);
    let m = HermitianMatrix::new_unchecked(&(sr.as_matrix() * s.as_matrix()) * sr.as_matrix());
    let vals = m.eigenvalues();
    let top = vals.first().copied().unwrap_or(0.0).abs();
    let cut = 1e-13 * top.max(1e-300);
    let t: f64 = vals.iter().filter(|&&l| l > cut).map(|l| l.sqrt()).sum();
    Ok((t * t).clamp(0.0, 1.0))
}

/// `½ ‖ρ − σ‖₁`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let r = density(rho)?;
    let s = density(sigma)?;
    if r.dim() != s.dim() {
        return Err(Error::DimensionMismatch("state dimensions differ".into()));
    }
    Ok((0.5 * trace_norm(&(r.as_matrix() - s.as_matrix()))).clamp(0.0, 1.0))
}
