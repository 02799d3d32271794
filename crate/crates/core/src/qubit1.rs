//! Single-qubit unitaries as real unit 4-vectors in the magic basis.
//!
//! With `Ψ1 = (|00⟩+|11⟩)/√2`, `Ψ2 = i(|00⟩−|11⟩)/√2`, `Ψ3 = i(|01⟩+|10⟩)/√2`
//! and `Ψ4 = (|01⟩−|10⟩)/√2`, the Choi state of `U ∈ SU(2)` is
//! `Σ u_i Ψ_i` for the real unit vector `u` read off
//! `U = [[u1 + i u2, −u4 + i u3], [u4 + i u3, u1 − i u2]]`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channels::ProbabilityDistribution;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, RealMatrix, Unitary, C64};

const UNIT_TOL: f64 = 1e-10;
const KAPPA: f64 = 0.9;

/// Real unit 4-vector, canonical up to sign: the first component of largest
/// magnitude is positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagicVector {
    pub u: [f64; 4],
}

impl MagicVector {
    pub fn new(u: [f64; 4]) -> Result<Self> {
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = dot(&u, &u).sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self::canonical(u))
    }

    /// Normalizes and canonicalizes; the input must be nonzero.
    pub fn normalized(u: [f64; 4]) -> Self {
        let n = dot(&u, &u).sqrt();
        Self::canonical(u.map(|x| x / n))
    }

    fn canonical(u: [f64; 4]) -> Self {
        let top = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let lead = u.iter().find(|x| x.abs() >= top - 1e-12).copied().unwrap_or(1.0);
        let u = if lead < 0.0 { u.map(|x| -x) } else { u };
        Self { u }
    }

    pub fn dot(&self, other: &MagicVector) -> f64 {
        dot(&self.u, &other.u)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let m: MagicVector = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        MagicVector::new(m.u)
    }
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Columns are `Ψ1..Ψ4` in the computational basis `|00⟩,|01⟩,|10⟩,|11⟩`.
pub fn magic_basis() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (r, i, z) = (C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, 0.0));
    ComplexMatrix::from_rows(&[&[r, i, z, z], &[z, z, i, r], &[z, z, i, -r], &[r, -i, z, z]])
}

pub fn magic_embed(u: &Unitary) -> Result<MagicVector> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "magic embedding needs a 2x2 unitary, got dimension {}",
            u.dim()
        )));
    }
    let m = u.as_matrix();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let ph = det.sqrt();
    let a = m[(0, 0)] / ph;
    let c = m[(1, 0)] / ph;
    Ok(MagicVector::normalized([a.re, a.im, c.im, c.re]))
}

/// The `SU(2)` representative of `u`.
pub fn magic_unembed(u: &MagicVector) -> Result<Unitary> {
    let v = MagicVector::new(u.u)?.u;
    let m = ComplexMatrix::from_rows(&[
        &[C64::new(v[0], v[1]), C64::new(-v[3], v[2])],
        &[C64::new(v[3], v[2]), C64::new(v[0], -v[1])],
    ]);
    Unitary::new(m)
}

/// Half-diamond distance `sqrt(1 − (u·w)²)`.
pub fn distance_1q(u: &MagicVector, w: &MagicVector) -> f64 {
    let c = u.dot(w).abs().min(1.0);
    (1.0 - c * c).max(0.0).sqrt()
}

/// Half-diamond distance between `u` and the mixture `Σ p(x) w_x`, as
/// `½ Σ |λ_i(u uᵀ − Σ p(x) w_x w_xᵀ)|`.
pub fn mix_distance_1q(
    target: &MagicVector,
    candidates: &[MagicVector],
    p: &ProbabilityDistribution,
) -> Result<f64> {
    if candidates.len() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} candidates but {} weights",
            candidates.len(),
            p.len()
        )));
    }
    let mut m = RealMatrix::from_fn(4, 4, |r, c| target.u[r] * target.u[c]);
    for (w, &px) in candidates.iter().zip(p.weights()) {
        for r in 0..4 {
            for c in 0..4 {
                m[(r, c)] -= px * w.u[r] * w.u[c];
            }
        }
    }
    let (vals, _) = m.symmetric_eig();
    Ok(0.5 * vals.iter().map(|l| l.abs()).sum::<f64>())
}

/// Indices of candidates within `2 eps` of the target.
pub fn support_filter(
    target: &MagicVector,
    candidates: &[MagicVector],
    eps: f64,
) -> Result<Vec<usize>> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside (0, 1/2)")));
    }
    let radius = 2.0 * eps;
    let keep: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(_, w)| distance_1q(target, w) <= radius + 1e-12)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptySupport { radius });
    }
    Ok(keep)
}

/// Orthonormal basis of the tangent space at `c`.
fn tangent_frame(c: &[f64; 4]) -> [[f64; 4]; 3] {
    let mut basis: Vec<[f64; 4]> = vec![*c];
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        for b in &basis {
            let p = dot(&e, b);
            for i in 0..4 {
                e[i] -= p * b[i];
            }
        }
        let n = dot(&e, &e).sqrt();
        if n > 1e-6 {
            basis.push(e.map(|x| x / n));
        }
        if basis.len() == 4 {
            break;
        }
    }
    [basis[1], basis[2], basis[3]]
}

/// Points of S² such that every unit vector is within angle `gamma` of one.
pub fn sphere_covering(gamma: f64) -> Vec<[f64; 3]> {
    let rings = (std::f64::consts::PI / gamma).ceil() as usize;
    let s = std::f64::consts::PI / rings as f64;
    let target = (gamma / 4.0).sin();
    let mut out = Vec::new();
    for j in 0..=rings {
        let phi = j as f64 * s;
        let sp = phi.sin();
        let count = if sp <= target || j == 0 || j == rings {
            1
        } else {
            let t = 4.0 * (target / sp).asin();
            (2.0 * std::f64::consts::PI / t).ceil() as usize
        };
        for a in 0..count {
            let az = 2.0 * std::f64::consts::PI * a as f64 / count as f64;
            out.push([sp * az.cos(), sp * az.sin(), phi.cos()]);
        }
    }
    out
}

/// A finite set `S` with every `v` at `distance_1q(center, v) ≤ cap` lying
/// within `mesh` of `S`.
///
/// Levels sit at geodesic radii `min(k Δ, asin cap)` with
/// `Δ = 0.9·asin(mesh)`; level `k` uses a sphere covering of angle `1/(2k)`,
/// so the size depends on `asin(cap)/asin(mesh)` only.
pub fn cap_covering(center: &MagicVector, cap: f64, mesh: f64) -> Result<Vec<MagicVector>> {
    if cap == 0.0 && mesh >= 0.0 {
        return Ok(vec![*center]);
    }
    if !(mesh > 0.0 && mesh <= cap && cap <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < mesh <= cap <= 1, got mesh {mesh}, cap {cap}"
        )));
    }
    let psi_max = cap.asin();
    let delta = KAPPA * mesh.asin();
    let levels = (psi_max / delta).ceil() as usize;
    let frame = tangent_frame(&center.u);
    let mut out = vec![*center];
    for k in 1..=levels {
        let psi = (k as f64 * delta).min(psi_max);
        let (cs, sn) = (psi.cos(), psi.sin());
        for n in sphere_covering(0.5 / k as f64) {
            let mut v = center.u.map(|x| cs * x);
            for (t, nt) in frame.iter().zip(n) {
                for i in 0..4 {
                    v[i] += sn * nt * t[i];
                }
            }
            out.push(MagicVector::normalized(v));
        }
    }
    Ok(out)
}

/// Haar-uniform point of S³ (equivalently a Haar-random qubit unitary).
pub fn random_magic<R: Rng + ?Sized>(rng: &mut R) -> MagicVector {
    let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    MagicVector::normalized(v)
}

/// Random point with `distance_1q(center, v) ≤ cap`.
pub fn random_in_cap<R: Rng + ?Sized>(center: &MagicVector, cap: f64, rng: &mut R) -> MagicVector {
    let frame = tangent_frame(&center.u);
    let psi = cap.min(1.0).asin() * rng.random::<f64>().cbrt();
    let mut n: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let nn = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    n.iter_mut().for_each(|x| *x /= nn);
    let mut v = center.u.map(|x| psi.cos() * x);
    for (t, nt) in frame.iter().zip(n) {
        for i in 0..4 {
            v[i] += psi.sin() * nt * t[i];
        }
    }
    MagicVector::normalized(v)
}

/// Largest nearest-point distance from `samples` random cap points to `set`.
pub fn sampled_covering_radius<R: Rng + ?Sized>(
    center: &MagicVector,
    cap: f64,
    set: &[MagicVector],
    samples: usize,
    rng: &mut R,
) -> f64 {
    (0..samples)
        .map(|_| {
            let v = random_in_cap(center, cap, rng);
            set.iter().map(|s| distance_1q(s, &v)).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi, unitary_distance};
    use crate::linalg::random::haar_unitary;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn close(a: &MagicVector, b: [f64; 4], tol: f64) -> bool {
        a.u.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn embed_examples() {
        let id = magic_embed(&Unitary::identity(2)).unwrap();
        assert!(close(&id, [1.0, 0.0, 0.0, 0.0], 1e-15));
        let s = magic_embed(&Unitary::diagonal_phases(&[0.0, PI / 2.0])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(&s, [h, -h, 0.0, 0.0], 1e-12));
        let y = Unitary::new(ComplexMatrix::from_rows(&[
            &[C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            &[C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ]))
        .unwrap();
        assert!(close(&magic_embed(&y).unwrap(), [0.0, 0.0, 0.0, 1.0], 1e-15));
    }

    #[test]
    fn embed_matches_choi_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let basis = magic_basis();
        for _ in 0..50 {
            let u = haar_unitary(2, &mut rng);
            let v = magic_embed(&u).unwrap();
            let psi = basis.apply(&v.u.map(|x| C64::new(x, 0.0)));
            let want = choi(&u).matrix().scale_real(0.5);
            let got = ComplexMatrix::outer(&psi, &psi);
            assert!((&got - &want).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn unembed_examples() {
        let u = magic_unembed(&MagicVector::new([1.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!((u.as_matrix() - &ComplexMatrix::identity(2)).max_abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = magic_unembed(&MagicVector::new([h, -h, 0.0, 0.0]).unwrap()).unwrap();
        let want = Unitary::diagonal_phases(&[0.0, PI / 2.0]);
        assert!(unitary_distance(&s, &want).unwrap() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(MagicVector::new([1.0, 1.0, 0.0, 0.0]), Err(Error::NotUnit { .. })));
        assert!(magic_embed(&Unitary::identity(3)).is_err());
        assert!(MagicVector::from_json_str(r#"{"u":[0.5,0,0,0]}"#).is_err());
        let ok = MagicVector::from_json_str(r#"{"u":[0,0,0,-1]}"#).unwrap();
        assert_eq!(ok.u, [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..1000 {
            let v = random_magic(&mut rng);
            let back = magic_embed(&magic_unembed(&v).unwrap()).unwrap();
            assert!(v.u.iter().zip(back.u).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }

    #[test]
    fn embedding_is_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let u = haar_unitary(2, &mut rng);
            let v = haar_unitary(2, &mut rng);
            let a = distance_1q(&magic_embed(&u).unwrap(), &magic_embed(&v).unwrap());
            let b = unitary_distance(&u, &v).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn phase_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..200 {
            let u = haar_unitary(2, &mut rng);
            let alpha = rng.random::<f64>() * 2.0 * PI;
            let a = magic_embed(&u).unwrap();
            let b = magic_embed(&u.scale_phase(alpha)).unwrap();
            assert!(a.u.iter().zip(b.u).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn magic_representation_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let basis = magic_basis();
        for _ in 0..50 {
            let mut acc = ComplexMatrix::zeros(4, 4);
            for _ in 0..4 {
                let r: f64 = rng.random::<f64>() * 2.0 - 1.0;
                acc = &acc + &choi(&haar_unitary(2, &mut rng)).matrix().scale_real(0.5 * r);
            }
            let m = &(&basis.adjoint() * &acc) * &basis;
            let imag = m.data().iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
            assert!(imag < 1e-10);
            assert!(m.hermitian_deviation() < 1e-10);
        }
    }

    #[test]
    fn distance_examples() {
        let e1 = MagicVector::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        let e4 = MagicVector::new([0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(distance_1q(&e1, &e1), 0.0);
        assert!((distance_1q(&e1, &e4) - 1.0).abs() < 1e-15);
        let a = PI / 12.0;
        let w = MagicVector::new([a.cos(), a.sin(), 0.0, 0.0]).unwrap();
        assert!((distance_1q(&e1, &w) - a.sin()).abs() < 1e-15);
    }

    #[test]
    fn mix_distance_reductions() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let u = random_magic(&mut rng);
        let w = random_magic(&mut rng);
        let cands = [u, w];
        let d0 = mix_distance_1q(&u, &cands, &ProbabilityDistribution::point_mass(2, 0)).unwrap();
        assert!(d0 < 1e-12);
        let d1 = mix_distance_1q(&u, &cands, &ProbabilityDistribution::point_mass(2, 1)).unwrap();
        assert!((d1 - distance_1q(&u, &w)).abs() < 1e-12);
        assert!(mix_distance_1q(&u, &cands, &ProbabilityDistribution::uniform(3)).is_err());
    }

    #[test]
    fn filter_examples() {
        let t = MagicVector::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        let at = |d: f64| MagicVector::new([(1.0 - d * d).sqrt(), d, 0.0, 0.0]).unwrap();
        let cands = [at(0.05), at(0.15), at(0.35), t];
        assert_eq!(support_filter(&t, &cands, 0.1).unwrap(), vec![0, 1, 3]);
        assert!(matches!(
            support_filter(&t, &cands[2..3], 0.1),
            Err(Error::EmptySupport { .. })
        ));
        assert!(support_filter(&t, &cands, 0.6).is_err());
    }

    #[test]
    fn cap_zero_is_center() {
        let c = MagicVector::new([0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(cap_covering(&c, 0.0, 0.0).unwrap(), vec![c]);
        assert!(cap_covering(&c, 0.1, 0.2).is_err());
    }

    #[test]
    fn sphere_covering_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for gamma in [0.5, 0.25, 0.1] {
            let pts = sphere_covering(gamma);
            for _ in 0..5000 {
                let mut n: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let nn = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
                n.iter_mut().for_each(|x| *x /= nn);
                let best = pts
                    .iter()
                    .map(|p| (p[0] * n[0] + p[1] * n[1] + p[2] * n[2]).clamp(-1.0, 1.0).acos())
                    .fold(f64::INFINITY, f64::min);
                assert!(best <= gamma, "gamma {gamma}: {best}");
            }
        }
    }

    #[test]
    fn cap_mesh_equal_covers() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let c = random_magic(&mut rng);
        let set = cap_covering(&c, 0.1, 0.1).unwrap();
        assert!(set.contains(&c));
        let r = sampled_covering_radius(&c, 0.1, &set, 100_000, &mut rng);
        assert!(r <= 0.1, "radius {r}");
    }

    #[test]
    fn cap_count_depends_on_ratio() {
        let c = MagicVector::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        let a = cap_covering(&c, 0.2, 0.05).unwrap().len();
        let b = cap_covering(&c, 0.02, 0.005).unwrap().len();
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let set = cap_covering(&c, 0.2, 0.05).unwrap();
        assert!(sampled_covering_radius(&c, 0.2, &set, 20_000, &mut rng) <= 0.05);
    }

    proptest! {
        #[test]
        fn canonical_sign_is_quotient(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0) {
            prop_assume!(a * a + b * b + c * c + d * d > 1e-3);
            let v = MagicVector::normalized([a, b, c, d]);
            let w = MagicVector::normalized([-a, -b, -c, -d]);
            prop_assert_eq!(v, w);
        }
    }
}
