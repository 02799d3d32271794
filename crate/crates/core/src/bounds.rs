//! Worst-case error bounds for probabilistic approximation, the extremal
//! unitary families that attain them, and the axial-rotation geometry.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::geometry::project_onto_hull;
use crate::channels::{choi, optimal_mix_with, unitary_distance, ProbabilityDistribution};
use crate::error::{Error, Result};
use crate::fmt::sig;
use crate::linalg::random::haar_unitary;
use crate::linalg::{ComplexMatrix, Unitary, C64};
use crate::sdp::SdpOptions;

/// Lower and upper bounds on the worst-case mixing error at covering
/// radius `eps` in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundPoint {
    pub eps: f64,
    pub d: usize,
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
    /// The weaker `2ε²/d`.
    pub weak_lower: f64,
}

pub fn theorem1_bounds(eps: f64, d: usize) -> Result<BoundPoint> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside [0, 1]")));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
    }
    let df = d as f64;
    let delta = 1.0 - (1.0 - eps * eps).sqrt();
    Ok(BoundPoint {
        eps,
        d,
        delta,
        lower: 4.0 * delta / df * (1.0 - delta / df),
        upper: eps * eps,
        weak_lower: 2.0 * eps * eps / df,
    })
}

/// Bound rows for every grid value, in input order.
pub fn curve_sweep(d: usize, eps_grid: &[f64]) -> Result<Vec<BoundPoint>> {
    eps_grid.par_iter().map(|&e| theorem1_bounds(e, d)).collect()
}

/// CSV with header `eps,delta,lower,upper`.
pub fn curve_csv(rows: &[BoundPoint]) -> String {
    let mut out = String::from("eps,delta,lower,upper\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig(r.eps),
            sig(r.delta),
            sig(r.lower),
            sig(r.upper)
        ));
    }
    out
}

/// A finite mesh of an extremal family. `slack` bounds how far the mixing
/// value over the mesh can sit from the value over the continuous family;
/// `None` when the mesh is sampled rather than a certified covering.
#[derive(Clone, Debug)]
pub struct Family {
    pub members: Vec<Unitary>,
    pub slack: Option<f64>,
}

impl Family {
    pub fn require_slack(&self, tolerance: f64) -> Result<()> {
        let slack = self.slack.unwrap_or(f64::INFINITY);
        if slack > tolerance {
            return Err(Error::MeshTooCoarse { slack, tolerance });
        }
        Ok(())
    }
}

/// `min |z|` over the convex hull of the eigenvalues of `u`.
pub fn hull_distance(u: &Unitary) -> f64 {
    let pts: Vec<(f64, f64)> = u.eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    project_onto_hull(&pts, (0.0, 0.0)).distance
}

fn check_family_args(eps: f64, d: usize, mesh: f64, max_d: usize) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside (0, 1]")));
    }
    if !(2..=max_d).contains(&d) {
        return Err(Error::InvalidArgument(format!("dimension {d} outside [2, {max_d}]")));
    }
    if !(mesh > 0.0 && mesh.is_finite()) {
        return Err(Error::InvalidArgument(format!("mesh = {mesh} must be positive")));
    }
    Ok(())
}

/// `[-a, a]` with spacing at most `mesh`, symmetric and containing 0.
fn symmetric_grid(a: f64, mesh: f64) -> Vec<f64> {
    let k = (a / mesh).ceil() as i64;
    if k == 0 {
        return vec![0.0];
    }
    let s = a / k as f64;
    (-k..=k).map(|i| i as f64 * s).collect()
}

/// `[0, 2π)` with spacing at most `mesh`.
fn circle_grid(mesh: f64) -> Vec<f64> {
    let n = (TAU / mesh).ceil().max(1.0) as usize;
    (0..n).map(|i| i as f64 * TAU / n as f64).collect()
}

fn tuples(grid: &[f64], len: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                grid.iter().map(move |&g| {
                    let mut t = t.clone();
                    t.push(g);
                    t
                })
            })
            .collect();
    }
    out
}

/// Diagonal members of the lower-bound family: an eigenvalue pair
/// `e^{±iθ₀}` with `sin θ₀ = ε` in slots `(i, j)`, the remaining eigenphases
/// meshed over `[-θ₀, θ₀]` so the hull distance stays `√(1−ε²)`.
pub fn lower_family(eps: f64, d: usize, mesh: f64) -> Result<Family> {
    lower_family_conjugated(eps, d, mesh, 0, 0)
}

/// As [`lower_family`], plus every member conjugated by `conjugations`
/// seeded Haar unitaries.
pub fn lower_family_conjugated(
    eps: f64,
    d: usize,
    mesh: f64,
    conjugations: usize,
    seed: u64,
) -> Result<Family> {
    check_family_args(eps, d, mesh, 4)?;
    let theta0 = eps.asin();
    let grid = symmetric_grid(theta0, mesh);
    let rest = tuples(&grid, d - 2);
    let mut diag = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            for betas in &rest {
                let mut phases = vec![0.0; d];
                phases[i] = theta0;
                phases[j] = -theta0;
                let mut b = betas.iter();
                for (k, ph) in phases.iter_mut().enumerate() {
                    if k != i && k != j {
                        *ph = *b.next().expect("tuple length");
                    }
                }
                diag.push(Unitary::diagonal_phases(&phases));
            }
        }
    }
    let mut members = diag.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..conjugations {
        let q = haar_unitary(d, &mut rng);
        for w in &diag {
            members.push(q.compose(w)?.compose(&q.adjoint())?);
        }
    }
    let step = grid.get(1).map_or(0.0, |g| g - grid[0]);
    // worst eigenphase offset is half a step per free slot
    let slack = match d {
        2 => 0.0,
        3 => (step / 4.0).sin(),
        _ => (step / 2.0).sin(),
    };
    Ok(Family {
        members,
        slack: Some(slack),
    })
}

/// `cos θ, −sin θ; sin θ, cos θ` in the top-left corner of `I_d`.
pub fn rotation_block(theta: f64, d: usize) -> Unitary {
    let (s, c) = theta.sin_cos();
    let m = ComplexMatrix::from_fn(d, d, |r, col| match (r, col) {
        (0, 0) | (1, 1) => C64::new(c, 0.0),
        (0, 1) => C64::new(-s, 0.0),
        (1, 0) => C64::new(s, 0.0),
        _ if r == col => C64::new(1.0, 0.0),
        _ => C64::new(0.0, 0.0),
    });
    Unitary::new(m).expect("rotation is unitary")
}

fn embed_lower(v: &Unitary) -> Unitary {
    let k = v.dim();
    let m = ComplexMatrix::from_fn(k + 1, k + 1, |r, c| match (r, c) {
        (0, 0) => C64::new(1.0, 0.0),
        (0, _) | (_, 0) => C64::new(0.0, 0.0),
        _ => v.as_matrix().data()[(r - 1) * k + (c - 1)],
    });
    Unitary::new(m).expect("block embedding is unitary")
}

/// Target at which the upper-bound family attains `ε²`.
pub fn upper_worst_target(d: usize) -> Unitary {
    rotation_block(PI / 2.0, d)
}

/// Members `diag(1, V₁) (R(θ) ⊕ I) diag(1, V₂)` with `θ` meshed over
/// `[0, arccos ε]`. For `d = 2` the factors are phase grids and the mesh is
/// a certified covering; otherwise they are seeded Haar samples.
pub fn upper_family(eps: f64, d: usize, mesh: f64) -> Result<Family> {
    upper_family_seeded(eps, d, mesh, 0)
}

pub fn upper_family_seeded(eps: f64, d: usize, mesh: f64, seed: u64) -> Result<Family> {
    check_family_args(eps, d, mesh, 4)?;
    let top = eps.acos();
    let n_theta = (top / mesh).ceil() as usize;
    let thetas: Vec<f64> = if n_theta == 0 {
        vec![0.0]
    } else {
        (0..=n_theta).map(|i| top * i as f64 / n_theta as f64).collect()
    };
    let factors: Vec<Unitary> = if d == 2 {
        circle_grid(mesh)
            .iter()
            .map(|&a| Unitary::diagonal_phases(&[a]))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = (TAU / mesh).ceil() as usize;
        std::iter::once(Unitary::identity(d - 1))
            .chain((0..n).map(|_| haar_unitary(d - 1, &mut rng)))
            .collect()
    };
    let factors: Vec<Unitary> = factors.iter().map(embed_lower).collect();
    let mut members = Vec::with_capacity(factors.len() * factors.len() * thetas.len());
    for v1 in &factors {
        for &t in &thetas {
            let left = v1.compose(&rotation_block(t, d))?;
            for v2 in &factors {
                members.push(left.compose(v2)?);
            }
        }
    }
    let slack = (d == 2).then(|| {
        let t_step = if n_theta == 0 { 0.0 } else { top / n_theta as f64 };
        let a_step = TAU / factors.len() as f64;
        let eta = 2.0 * (a_step / 4.0).sin() + (t_step / 2.0).sin();
        (eps + eta).min(1.0).powi(2) - eps * eps
    });
    Ok(Family { members, slack })
}

/// Outcome of mixing over a meshed extremal family.
#[derive(Clone, Debug, Serialize)]
pub struct Sharpness {
    pub eps: f64,
    pub d: usize,
    pub value: f64,
    pub expected: f64,
    pub slack: Option<f64>,
    pub gap: f64,
    pub candidates: usize,
}

/// Optimal mixing value at the identity over [`lower_family`].
pub fn lower_sharpness(eps: f64, d: usize, mesh: f64) -> Result<Sharpness> {
    let fam = lower_family(eps, d, mesh)?;
    let target = choi(&Unitary::identity(d));
    let cands: Vec<_> = fam.members.iter().map(choi).collect();
    let mix = optimal_mix_with(&target, &cands, &SdpOptions::default())?;
    Ok(Sharpness {
        eps,
        d,
        value: mix.value,
        expected: theorem1_bounds(eps, d)?.lower,
        slack: fam.slack,
        gap: mix.gap,
        candidates: cands.len(),
    })
}

/// Optimal mixing value at [`upper_worst_target`] over [`upper_family`].
/// For qubits, members farther than twice the covering radius are dropped
/// before solving; they cannot carry weight.
pub fn upper_sharpness(eps: f64, d: usize, mesh: f64) -> Result<Sharpness> {
    let fam = upper_family(eps, d, mesh)?;
    let target = upper_worst_target(d);
    let members: Vec<&Unitary> = match fam.slack {
        Some(s) if d == 2 => {
            let radius = 2.0 * (eps * eps + s).sqrt() + 1e-9;
            let dist: Vec<f64> = fam
                .members
                .par_iter()
                .map(|u| unitary_distance(&target, u))
                .collect::<Result<_>>()?;
            fam.members
                .iter()
                .zip(dist)
                .filter(|(_, r)| *r <= radius)
                .map(|(u, _)| u)
                .collect()
        }
        _ => fam.members.iter().collect(),
    };
    let cands: Vec<_> = members.into_iter().map(choi).collect();
    let mix = optimal_mix_with(&choi(&target), &cands, &SdpOptions::default())?;
    Ok(Sharpness {
        eps,
        d,
        value: mix.value,
        expected: eps * eps,
        slack: fam.slack,
        gap: mix.gap,
        candidates: cands.len(),
    })
}

/// The axial rotation `diag(1, e^{iθ})`.
pub fn axial_unitary(theta: f64) -> Unitary {
    Unitary::diagonal_phases(&[0.0, theta])
}

/// Optimal mixture of axial rotations by planar projection: half the
/// distance from `e^{iθ̂}` to `conv{e^{iθ_x}}`.
pub fn axial_optimal(target_theta: f64, thetas: &[f64]) -> Result<(ProbabilityDistribution, f64)> {
    if thetas.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if !target_theta.is_finite() || thetas.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("non-finite angle".into()));
    }
    let pts: Vec<(f64, f64)> = thetas.iter().map(|t| (t.cos(), t.sin())).collect();
    let proj = project_onto_hull(&pts, (target_theta.cos(), target_theta.sin()));
    Ok((ProbabilityDistribution::new(proj.weights)?, proj.distance / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_examples() {
        let b = theorem1_bounds(0.0, 3).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        let b = theorem1_bounds(0.6, 4).unwrap();
        assert!((b.delta - 0.2).abs() < 1e-15);
        assert!((b.lower - 0.19).abs() < 1e-15);
        assert!((b.upper - 0.36).abs() < 1e-15);
        assert!(theorem1_bounds(1.1, 2).is_err());
        assert!(theorem1_bounds(0.5, 1).is_err());
    }

    #[test]
    fn qubit_bounds_coincide() {
        for i in 0..=100 {
            let b = theorem1_bounds(i as f64 / 100.0, 2).unwrap();
            assert!((b.lower - b.upper).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_below_upper() {
        for d in 2..8 {
            for i in 1..100 {
                let b = theorem1_bounds(i as f64 / 100.0, d).unwrap();
                assert!(b.lower <= b.upper + 1e-15);
                assert!(b.weak_lower <= b.lower + 1e-15);
                if d > 2 {
                    assert!(b.lower < b.upper);
                }
            }
        }
    }

    #[test]
    fn csv_layout() {
        let rows = curve_sweep(2, &[0.0, 0.5]).unwrap();
        let csv = curve_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("eps,delta,lower,upper"));
        assert_eq!(lines.next(), Some("0,0,0,0"));
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn lower_members_sit_on_the_boundary() {
        let eps = 0.6;
        for d in 2..=4 {
            let fam = lower_family(eps, d, 0.1).unwrap();
            let want = (1.0 - eps * eps).sqrt();
            for w in &fam.members {
                let h = hull_distance(w);
                assert!(h <= want + 1e-9 && h >= want - 0.1, "d {d} hull {h}");
                let r = unitary_distance(&Unitary::identity(d), w).unwrap();
                assert!(r >= eps - 0.1);
            }
        }
    }

    #[test]
    fn lower_sharpness_small() {
        let s = lower_sharpness(0.5, 2, 0.1).unwrap();
        assert!((s.value - 0.25).abs() < 1e-7, "{}", s.value);
        let s = lower_sharpness(0.6, 3, 0.2).unwrap();
        let slack = s.slack.unwrap();
        assert!(s.value >= s.expected - 1e-7);
        assert!(s.value <= s.expected + slack + 1e-7, "{} vs {}", s.value, s.expected);
    }

    #[test]
    fn upper_family_endpoint_hull() {
        let eps: f64 = 0.3;
        let r = rotation_block(eps.acos(), 2);
        assert!((hull_distance(&r) - eps).abs() < 1e-12);
        let fam = upper_family(eps, 2, 0.5).unwrap();
        assert!(fam.slack.is_some());
        assert!(fam.require_slack(1e-6).is_err());
        assert!(upper_family(eps, 3, 1.0).unwrap().slack.is_none());
    }

    #[test]
    fn upper_sharpness_qubit() {
        let s = upper_sharpness(0.3, 2, 0.3).unwrap();
        assert!(s.value >= 0.09 - 1e-7, "{}", s.value);
        assert!(s.value <= 0.09 + s.slack.unwrap() + 1e-7, "{}", s.value);
    }

    #[test]
    fn upper_degenerate_eps_one() {
        let s = upper_sharpness(1.0, 2, 0.5).unwrap();
        assert!((s.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn axial_examples() {
        let thetas: Vec<f64> = (0..6).map(|k| k as f64 * PI / 3.0).collect();
        let (p, v) = axial_optimal(PI / 2.0, &thetas).unwrap();
        assert!((v - (PI / 12.0).sin().powi(2)).abs() < 1e-12);
        assert!((p.weights()[1] - 0.5).abs() < 1e-12);
        assert!((p.weights()[2] - 0.5).abs() < 1e-12);
        let (_, v) = axial_optimal(PI / 3.0, &thetas).unwrap();
        assert!(v.abs() < 1e-12);
        let (p, v) = axial_optimal(PI / 2.0, &[0.0, PI]).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!((p.weights()[0] - 0.5).abs() < 1e-12);
        assert!(axial_optimal(0.0, &[]).is_err());
    }
}
