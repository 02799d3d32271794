//! Single-qubit probabilistic synthesis: gate sets, brute-force sequence
//! enumeration, covering-based mixing, sampling, and the Campbell baseline.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{choi, optimal_mix_with, ProbabilityDistribution};
use crate::error::{Error, Result};
use crate::linalg::{solve_dense, ComplexMatrix, MatrixJson, RealMatrix, Unitary, C64};
use crate::qubit1::{
    cap_covering, distance_1q, magic_embed, mix_distance_1q, support_filter, MagicVector,
};
use crate::sdp::SdpOptions;

/// Default cap on the number of enumerated sequences.
pub const DEFAULT_BUDGET: usize = 5_000_000;

/// Built-in single-qubit gates by name: `I, X, Y, Z, H, S, Sdg, T, Tdg`.
pub fn named_gate(name: &str) -> Option<Unitary> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let m = match name {
        "I" => ComplexMatrix::identity(2),
        "X" => ComplexMatrix::from_rows(&[&[z, one], &[one, z]]),
        "Y" => ComplexMatrix::from_rows(&[&[z, -i], &[i, z]]),
        "Z" => ComplexMatrix::from_rows(&[&[one, z], &[z, -one]]),
        "H" => ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]),
        "S" => ComplexMatrix::from_rows(&[&[one, z], &[z, i]]),
        "Sdg" => ComplexMatrix::from_rows(&[&[one, z], &[z, -i]]),
        "T" => ComplexMatrix::from_rows(&[&[one, z], &[z, C64::new(s, s)]]),
        "Tdg" => ComplexMatrix::from_rows(&[&[one, z], &[z, C64::new(s, -s)]]),
        _ => return None,
    };
    Some(Unitary::new(m).expect("built-in gate is unitary"))
}

/// `Rz(θ) = diag(e^{−iθ/2}, e^{iθ/2})`.
pub fn rz(theta: f64) -> Unitary {
    Unitary::diagonal_phases(&[-theta / 2.0, theta / 2.0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateSet {
    gates: Vec<(String, Unitary)>,
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    label: String,
    matrix: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct GateSetJson {
    gates: Vec<GateJson>,
}

impl GateSet {
    /// Gates are kept sorted by label; labels must be unique and every gate a
    /// 2×2 unitary.
    pub fn new(mut gates: Vec<(String, Unitary)>) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::InvalidArgument("empty gate set".into()));
        }
        gates.sort_by(|a, b| a.0.cmp(&b.0));
        for w in gates.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!("duplicate label {}", w[0].0)));
            }
        }
        if let Some((l, _)) = gates.iter().find(|(_, u)| u.dim() != 2) {
            return Err(Error::DimensionMismatch(format!("gate {l} is not 2x2")));
        }
        Ok(Self { gates })
    }

    /// `{H, T, Tdg, S, Sdg}`.
    pub fn clifford_t() -> Self {
        Self::from_names(&["H", "T", "Tdg", "S", "Sdg"]).expect("built-in gates")
    }

    pub fn from_names(names: &[&str]) -> Result<Self> {
        let gates = names
            .iter()
            .map(|n| {
                named_gate(n)
                    .map(|u| (n.to_string(), u))
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown gate {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(gates)
    }

    pub fn gates(&self) -> &[(String, Unitary)] {
        &self.gates
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: GateSetJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let gates = j
            .gates
            .into_iter()
            .map(|g| Ok((g.label, Unitary::new(ComplexMatrix::try_from(g.matrix)?)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(gates)
    }

    pub fn to_json_string(&self) -> String {
        let j = GateSetJson {
            gates: self
                .gates
                .iter()
                .map(|(l, u)| GateJson {
                    label: l.clone(),
                    matrix: MatrixJson::from(u.as_matrix()),
                })
                .collect(),
        };
        serde_json::to_string(&j).expect("gate set serializes")
    }
}

/// Product of generators; `labels[0]` is the leftmost factor, so the last
/// label acts first.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSequence {
    pub labels: Vec<String>,
    pub realized: Unitary,
    pub magic: MagicVector,
}

impl GateSequence {
    pub fn identity() -> Self {
        let realized = Unitary::identity(2);
        let magic = magic_embed(&realized).expect("2x2");
        Self {
            labels: Vec::new(),
            realized,
            magic,
        }
    }

    /// Builds the sequence for `labels` over `gs`.
    pub fn from_labels(gs: &GateSet, labels: &[&str]) -> Result<Self> {
        let mut seq = Self::identity();
        for l in labels {
            let (name, u) = gs
                .gates
                .iter()
                .find(|(n, _)| n == l)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown gate {l}")))?;
            seq = seq.then(name, u);
        }
        Ok(seq)
    }

    fn then(&self, label: &str, g: &Unitary) -> Self {
        let realized = Unitary::new_unchecked(self.realized.as_matrix() * g.as_matrix());
        let magic = magic_embed(&realized).expect("2x2");
        let mut labels = self.labels.clone();
        labels.push(label.to_string());
        Self {
            labels,
            realized,
            magic,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Spatial hash over magic vectors for near-duplicate detection.
struct MagicIndex {
    cell: f64,
    tol: f64,
    map: HashMap<[i64; 4], Vec<usize>>,
    points: Vec<MagicVector>,
}

impl MagicIndex {
    fn new(tol: f64) -> Self {
        Self {
            cell: (2.0 * tol).max(1e-9),
            tol,
            map: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, u: &[f64; 4]) -> [i64; 4] {
        u.map(|x| (x / self.cell).floor() as i64)
    }

    fn contains_near(&self, v: &MagicVector) -> bool {
        for sign in [1.0, -1.0] {
            let u = v.u.map(|x| sign * x);
            let k = self.key(&u);
            for off in 0..81usize {
                let mut kk = k;
                let mut o = off;
                for c in kk.iter_mut() {
                    *c += (o % 3) as i64 - 1;
                    o /= 3;
                }
                if let Some(ids) = self.map.get(&kk) {
                    if ids.iter().any(|&i| distance_1q(&self.points[i], v) <= self.tol) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, v: MagicVector) {
        let k = self.key(&v.u);
        self.map.entry(k).or_default().push(self.points.len());
        self.points.push(v);
    }
}

/// All products of at most `max_len` generators, one representative per
/// class of channels within `dedup_tol` (shortest first, then lexicographic
/// by labels).
pub fn enumerate_sequences(gs: &GateSet, max_len: usize, dedup_tol: f64) -> Result<Vec<GateSequence>> {
    enumerate_sequences_capped(gs, max_len, dedup_tol, DEFAULT_BUDGET)
}

pub fn enumerate_sequences_capped(
    gs: &GateSet,
    max_len: usize,
    dedup_tol: f64,
    cap: usize,
) -> Result<Vec<GateSequence>> {
    let mut index = MagicIndex::new(dedup_tol.max(0.0));
    let id = GateSequence::identity();
    index.insert(id.magic);
    let mut out = vec![id];
    let mut frontier = 0..1;
    for _ in 0..max_len {
        let start = out.len();
        if (frontier.end - frontier.start) * gs.gates.len() + start > cap {
            return Err(Error::BudgetExceeded { cap });
        }
        let candidates: Vec<GateSequence> = out[frontier.clone()]
            .par_iter()
            .flat_map_iter(|s| gs.gates.iter().map(move |(l, g)| s.then(l, g)))
            .collect();
        for c in candidates {
            if !index.contains_near(&c.magic) {
                index.insert(c.magic);
                out.push(c);
            }
        }
        frontier = start..out.len();
        if frontier.is_empty() {
            break;
        }
    }
    Ok(out)
}

fn better(err: f64, seq: &GateSequence, best_err: f64, best: &GateSequence) -> bool {
    if err < best_err - 1e-12 {
        return true;
    }
    (err - best_err).abs() <= 1e-12
        && (seq.len(), &seq.labels) < (best.len(), &best.labels)
}

/// Index into `pool` of the closest sequence to `target`, and its distance.
pub fn det_synth_magic(target: &MagicVector, pool: &[GateSequence]) -> Result<(usize, f64)> {
    let first = pool.first().ok_or(Error::EmptyPool)?;
    let mut best = (0, distance_1q(target, &first.magic));
    for (i, s) in pool.iter().enumerate().skip(1) {
        let e = distance_1q(target, &s.magic);
        if better(e, s, best.1, &pool[best.0]) {
            best = (i, e);
        }
    }
    Ok(best)
}

/// Closest pool sequence to `target` in half-diamond distance.
pub fn det_synth(target: &Unitary, pool: &[GateSequence]) -> Result<(GateSequence, f64)> {
    let t = magic_embed(target)?;
    let (i, e) = det_synth_magic(&t, pool)?;
    Ok((pool[i].clone(), e))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthParams {
    /// Covering mesh as a fraction of `eps`.
    pub c: f64,
    /// Required deterministic accuracy as a fraction of `eps`.
    pub c_prime: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self { c: 0.5, c_prime: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisResult {
    pub support: Vec<GateSequence>,
    pub p: ProbabilityDistribution,
    /// Smallest distance from the target to a support sequence.
    pub det_error: f64,
    /// Exact half-diamond error of the returned mixture.
    pub prob_error: f64,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    /// Worst deterministic error over the covering points.
    pub covering_radius: f64,
    pub sdp_gap: f64,
}

#[derive(Serialize)]
struct SynthesisJson<'a> {
    eps: f64,
    delta: f64,
    seed: u64,
    det_error: f64,
    prob_error: f64,
    covering_radius: f64,
    sdp_gap: f64,
    support: Vec<&'a [String]>,
    p: &'a [f64],
}

impl SynthesisResult {
    /// JSON with every float rounded to 12 significant digits.
    pub fn to_json(&self) -> serde_json::Value {
        use crate::fmt::round_sig;
        let p: Vec<f64> = self.p.weights().iter().map(|&w| round_sig(w)).collect();
        let j = SynthesisJson {
            eps: round_sig(self.eps),
            delta: round_sig(self.delta),
            seed: self.seed,
            det_error: round_sig(self.det_error),
            prob_error: round_sig(self.prob_error),
            covering_radius: round_sig(self.covering_radius),
            sdp_gap: round_sig(self.sdp_gap),
            support: self.support.iter().map(|s| s.labels.as_slice()).collect(),
            p: &p,
        };
        serde_json::to_value(j).expect("result serializes")
    }
}

/// The covering-based synthesis pipeline over a precomputed pool:
/// cover the `2 eps` cap with mesh `c·eps`, synthesize every covering point
/// deterministically to within `c'·eps`, restrict to the `2 eps` support and
/// solve the mixing SDP.
pub fn prob_synth_with_pool(
    target: &Unitary,
    eps: f64,
    delta: f64,
    pool: &[GateSequence],
    seed: u64,
    params: SynthParams,
) -> Result<SynthesisResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside (0, 1)")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    let SynthParams { c, c_prime } = params;
    if !(c > 0.0 && c_prime > 0.0 && c + c_prime <= 1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "need c, c' > 0 and c + c' <= 1, got {c}, {c_prime}"
        )));
    }
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let t = magic_embed(target)?;
    let cover = cap_covering(&t, (2.0 * eps).min(1.0), (c * eps).min(1.0))?;
    let hits: Vec<(usize, f64)> = cover
        .par_iter()
        .map(|v| det_synth_magic(v, pool))
        .collect::<Result<_>>()?;
    let achieved = hits.iter().fold(0.0f64, |a, h| a.max(h.1));
    let required = c_prime * eps;
    if achieved > required {
        return Err(Error::CoveringUnreachable { achieved, required });
    }
    let mut ids: Vec<usize> = hits.iter().map(|h| h.0).collect();
    ids.sort_unstable();
    ids.dedup();
    let union: Vec<MagicVector> = ids.iter().map(|&i| pool[i].magic).collect();
    let keep = if eps < 0.5 {
        support_filter(&t, &union, eps)?
    } else {
        (0..union.len()).collect()
    };
    let support: Vec<GateSequence> = keep.iter().map(|&k| pool[ids[k]].clone()).collect();
    let magic: Vec<MagicVector> = support.iter().map(|s| s.magic).collect();

    let opts = SdpOptions {
        gap_tol: delta.min(1e-8),
        ..SdpOptions::default()
    };
    let chois: Vec<_> = support.iter().map(|s| choi(&s.realized)).collect();
    let mix = optimal_mix_with(&choi(target), &chois, &opts)?;

    let (best, det_error) = magic
        .iter()
        .enumerate()
        .map(|(i, w)| (i, distance_1q(&t, w)))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let mut p = mix.p;
    let mut prob_error = mix_distance_1q(&t, &magic, &p)?;
    if prob_error > det_error {
        p = ProbabilityDistribution::point_mass(support.len(), best);
        prob_error = det_error;
    }
    Ok(SynthesisResult {
        support,
        p,
        det_error,
        prob_error,
        eps,
        delta,
        seed,
        covering_radius: achieved,
        sdp_gap: mix.gap,
    })
}

/// Enumeration parameters for [`prob_synth`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoolParams {
    pub max_len: usize,
    pub dedup_tol: f64,
    pub budget: usize,
}

impl Default for PoolParams {
    fn default() -> Self {
        Self {
            max_len: 12,
            dedup_tol: 1e-9,
            budget: DEFAULT_BUDGET,
        }
    }
}

pub fn prob_synth(
    target: &Unitary,
    eps: f64,
    delta: f64,
    gs: &GateSet,
    seed: u64,
    params: SynthParams,
    pool_params: PoolParams,
) -> Result<SynthesisResult> {
    let pool = enumerate_sequences_capped(
        gs,
        pool_params.max_len,
        pool_params.dedup_tol,
        pool_params.budget,
    )?;
    prob_synth_with_pool(target, eps, delta, &pool, seed, params)
}

/// `n` i.i.d. indices drawn from `p` with a ChaCha8 stream seeded by `seed`.
pub fn sample(p: &ProbabilityDistribution, seed: u64, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = WeightedIndex::new(p.weights()).expect("valid distribution");
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

/// Campbell mixture: simplex weights minimizing `‖Σ p(x) H_x‖_F`.
#[derive(Clone, Debug, PartialEq)]
pub struct CampbellMix {
    pub p: ProbabilityDistribution,
    pub residual: f64,
}

/// Eigenphases this close to ±π are rejected as ambiguous.
pub const BRANCH_MARGIN: f64 = 1e-6;

/// Traceless `H` with `U^dag V = e^{iα} e^{iH}`, as real coordinates in an
/// orthonormal Hermitian basis.
fn log_generator(u: &Unitary, v: &Unitary) -> Result<Vec<f64>> {
    let w = u.adjoint().compose(v)?;
    let d = w.dim();
    let centre = w.as_matrix().trace().arg();
    let (vals, vecs) = crate::linalg::unitary_eig(&w);
    let mut phases = Vec::with_capacity(d);
    for z in &vals {
        let mut a = z.arg() - centre;
        a -= (a / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI;
        if a.abs() > std::f64::consts::PI - BRANCH_MARGIN {
            return Err(Error::BranchCut { phase: a });
        }
        phases.push(a);
    }
    let mean = phases.iter().sum::<f64>() / d as f64;
    let diag: Vec<C64> = phases.iter().map(|a| C64::new(a - mean, 0.0)).collect();
    let h = &(&vecs * &ComplexMatrix::diag(&diag)) * &vecs.adjoint();
    let s = std::f64::consts::SQRT_2;
    let mut coords = Vec::with_capacity(d * d);
    for k in 0..d {
        coords.push(h[(k, k)].re);
        for l in k + 1..d {
            coords.push(s * h[(k, l)].re);
            coords.push(s * h[(k, l)].im);
        }
    }
    Ok(coords)
}

fn combo(points: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; points[0].len()];
    for (pt, &w) in points.iter().zip(p) {
        if w != 0.0 {
            for (a, b) in v.iter_mut().zip(pt) {
                *a += w * b;
            }
        }
    }
    v
}

fn vdot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimum-norm point of `conv(points)`: Frank-Wolfe with away steps, then
/// an exact active-set (Wolfe) refinement.
pub fn min_norm_point(points: &[Vec<f64>]) -> Vec<f64> {
    const MAX_ITER: usize = 10_000;
    const STOP: f64 = 1e-9;
    let m = points.len();
    let mut p: Vec<f64> = vec![0.0; m];
    let start = (0..m)
        .min_by(|&a, &b| vdot(&points[a], &points[a]).total_cmp(&vdot(&points[b], &points[b])))
        .unwrap_or(0);
    p[start] = 1.0;
    let mut x = points[start].clone();
    for _ in 0..MAX_ITER {
        if vdot(&x, &x).sqrt() <= STOP {
            break;
        }
        let grads: Vec<f64> = points.iter().map(|q| vdot(q, &x)).collect();
        let s = (0..m).min_by(|&a, &b| grads[a].total_cmp(&grads[b])).unwrap();
        let a = (0..m)
            .filter(|&i| p[i] > 0.0)
            .max_by(|&i, &j| grads[i].total_cmp(&grads[j]))
            .unwrap();
        let xx = vdot(&x, &x);
        let fw_gap = xx - grads[s];
        let away_gap = grads[a] - xx;
        if fw_gap.max(away_gap) <= 1e-15 {
            break;
        }
        let (dir, max_step) = if fw_gap >= away_gap {
            let d: Vec<f64> = points[s].iter().zip(&x).map(|(a, b)| a - b).collect();
            (d, 1.0)
        } else {
            let d: Vec<f64> = x.iter().zip(&points[a]).map(|(a, b)| a - b).collect();
            (d, p[a] / (1.0 - p[a]).max(1e-300))
        };
        let dd = vdot(&dir, &dir);
        if dd <= 0.0 {
            break;
        }
        let step = (-vdot(&x, &dir) / dd).clamp(0.0, max_step);
        if fw_gap >= away_gap {
            p.iter_mut().for_each(|w| *w *= 1.0 - step);
            p[s] += step;
        } else {
            p.iter_mut().for_each(|w| *w *= 1.0 + step);
            p[a] -= step;
            if p[a] < 1e-15 {
                p[a] = 0.0;
            }
        }
        x = combo(points, &p);
    }
    wolfe_polish(points, p)
}

/// Wolfe's active-set refinement started from `p`.
fn wolfe_polish(points: &[Vec<f64>], mut p: Vec<f64>) -> Vec<f64> {
    let m = points.len();
    let mut active: Vec<usize> = (0..m).filter(|&i| p[i] > 1e-12).collect();
    for _ in 0..(10 * m + 100) {
        // minor cycle: affine minimizer on the active set
        loop {
            let k = active.len();
            let mut kkt = RealMatrix::zeros(k + 1, k + 1);
            for (r, &i) in active.iter().enumerate() {
                for (c, &j) in active.iter().enumerate() {
                    kkt[(r, c)] = vdot(&points[i], &points[j]);
                }
                kkt[(r, k)] = 1.0;
                kkt[(k, r)] = 1.0;
            }
            let mut rhs = vec![0.0; k + 1];
            rhs[k] = 1.0;
            let Some(sol) = solve_dense(&kkt, &rhs) else {
                return p;
            };
            let w = &sol[..k];
            if w.iter().all(|&v| v > 1e-14) {
                let mut q = vec![0.0; m];
                for (&i, &v) in active.iter().zip(w) {
                    q[i] = v;
                }
                let xq = combo(points, &q);
                let xp = combo(points, &p);
                if vdot(&xq, &xq) <= vdot(&xp, &xp) {
                    p = q;
                }
                break;
            }
            // move toward the affine minimizer until a weight vanishes
            let mut theta = 1.0f64;
            for (&i, &v) in active.iter().zip(w) {
                if v < p[i] {
                    theta = theta.min(p[i] / (p[i] - v));
                }
            }
            for (&i, &v) in active.iter().zip(w) {
                p[i] = (1.0 - theta) * p[i] + theta * v;
            }
            active.retain(|&i| p[i] > 1e-14);
            for i in 0..m {
                if !active.contains(&i) {
                    p[i] = 0.0;
                }
            }
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= s);
        }
        // major cycle: add the most violated vertex
        let x = combo(points, &p);
        let xx = vdot(&x, &x);
        let (best, g) = (0..m)
            .map(|i| (i, vdot(&points[i], &x)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if xx - g <= 1e-14 * (1.0 + xx) || active.contains(&best) {
            break;
        }
        active.push(best);
    }
    p
}

/// Weights over `candidates` minimizing `‖Σ p(x) H_x‖_F` with
/// `U^dag U_x ∝ e^{iH_x}`.
pub fn campbell_mix(target: &Unitary, candidates: &[Unitary]) -> Result<CampbellMix> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let gens: Vec<Vec<f64>> = candidates
        .iter()
        .map(|c| log_generator(target, c))
        .collect::<Result<_>>()?;
    let p = min_norm_point(&gens);
    let p = ProbabilityDistribution::normalized(p);
    let x = combo(&gens, p.weights());
    Ok(CampbellMix {
        residual: vdot(&x, &x).sqrt(),
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::unitary_distance;
    use crate::qubit1::random_magic;

    fn labels(s: &GateSequence) -> Vec<&str> {
        s.labels.iter().map(|x| x.as_str()).collect()
    }

    #[test]
    fn length_zero_is_identity() {
        let seqs = enumerate_sequences(&GateSet::clifford_t(), 0, 1e-9).unwrap();
        assert_eq!(seqs.len(), 1);
        assert!(seqs[0].is_empty());
    }

    #[test]
    fn h_t_length_two() {
        let gs = GateSet::from_names(&["H", "T"]).unwrap();
        let seqs = enumerate_sequences(&gs, 2, 1e-9).unwrap();
        let got: Vec<Vec<&str>> = seqs.iter().map(labels).collect();
        // HH is the identity and is dropped
        let want: Vec<Vec<&str>> = vec![
            vec![],
            vec!["H"],
            vec!["T"],
            vec!["H", "T"],
            vec!["T", "H"],
            vec!["T", "T"],
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn tt_collapses_onto_s() {
        let gs = GateSet::from_names(&["S", "T"]).unwrap();
        let seqs = enumerate_sequences(&gs, 2, 1e-9).unwrap();
        assert!(seqs.iter().any(|s| labels(s) == vec!["S"]));
        assert!(!seqs.iter().any(|s| labels(s) == vec!["T", "T"]));
    }

    #[test]
    fn realized_is_left_to_right_product() {
        let gs = GateSet::clifford_t();
        let seq = GateSequence::from_labels(&gs, &["H", "T"]).unwrap();
        let want = named_gate("H").unwrap().compose(&named_gate("T").unwrap()).unwrap();
        assert!((seq.realized.as_matrix() - want.as_matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn budget_is_enforced() {
        let r = enumerate_sequences_capped(&GateSet::clifford_t(), 10, 1e-9, 100);
        assert_eq!(r, Err(Error::BudgetExceeded { cap: 100 }));
    }

    #[test]
    fn det_synth_examples() {
        let gs = GateSet::from_names(&["H", "T"]).unwrap();
        let pool = enumerate_sequences(&gs, 4, 1e-9).unwrap();
        let (seq, err) = det_synth(&named_gate("T").unwrap(), &pool).unwrap();
        assert!(err < 1e-12);
        assert_eq!(labels(&seq), vec!["T"]);
        assert_eq!(det_synth(&rz(0.1), &[]), Err(Error::EmptyPool));
    }

    #[test]
    fn det_synth_matches_exhaustive_search() {
        let gs = GateSet::from_names(&["H", "T"]).unwrap();
        let target = Unitary::diagonal_phases(&[0.0, std::f64::consts::PI / 8.0]);
        let mut prev = f64::INFINITY;
        for len in 0..=6 {
            let pool = enumerate_sequences(&gs, len, 1e-9).unwrap();
            let (seq, err) = det_synth(&target, &pool).unwrap();
            // every word of length <= len, no deduplication
            let mut words: Vec<Vec<&str>> = vec![vec![]];
            let mut best = unitary_distance(&target, &Unitary::identity(2)).unwrap();
            for _ in 0..len {
                words = words
                    .iter()
                    .flat_map(|w| ["H", "T"].iter().map(move |g| {
                        let mut n = w.clone();
                        n.push(g);
                        n
                    }))
                    .collect();
                for w in &words {
                    let u = GateSequence::from_labels(&gs, w).unwrap().realized;
                    best = best.min(unitary_distance(&target, &u).unwrap());
                }
            }
            assert!((err - best).abs() < 1e-9, "len {len}: {err} vs {best}");
            let re = distance_1q(&magic_embed(&target).unwrap(), &magic_embed(&seq.realized).unwrap());
            assert!((re - err).abs() < 1e-10);
            assert!(err <= prev + 1e-15);
            prev = err;
        }
    }

    #[test]
    fn gate_set_json_round_trip() {
        let gs = GateSet::clifford_t();
        let back = GateSet::from_json_str(&gs.to_json_string()).unwrap();
        assert_eq!(back.gates().len(), 5);
        for ((a, u), (b, v)) in gs.gates().iter().zip(back.gates()) {
            assert_eq!(a, b);
            assert!((u.as_matrix() - v.as_matrix()).max_abs() < 1e-15);
        }
        let bad = r#"{"gates":[{"label":"A","matrix":{"rows":2,"cols":2,"data":[[1,0],[1,0],[0,0],[1,0]]}}]}"#;
        assert!(matches!(GateSet::from_json_str(bad), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn sampling_contract() {
        let pm = ProbabilityDistribution::point_mass(3, 2);
        assert!(sample(&pm, 1, 100).iter().all(|&i| i == 2));
        let half = ProbabilityDistribution::uniform(2);
        let a = sample(&half, 7, 100_000);
        let f = a.iter().filter(|&&i| i == 0).count() as f64 / 1e5;
        assert!((0.49..=0.51).contains(&f), "frequency {f}");
        assert_eq!(a, sample(&half, 7, 100_000));
    }

    #[test]
    fn campbell_symmetric_pair() {
        let t = Unitary::identity(2);
        let c = [rz(0.2), rz(-0.2)];
        let r = campbell_mix(&t, &c).unwrap();
        assert!(r.residual < 1e-12);
        assert!((r.p.weights()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn campbell_target_in_candidates() {
        let t = rz(0.7);
        let c = [rz(0.9), t.clone(), rz(0.1)];
        let r = campbell_mix(&t, &c).unwrap();
        assert!(r.residual < 1e-12);
        assert!((r.p.weights()[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn campbell_branch_cut() {
        let t = Unitary::identity(2);
        let x = named_gate("X").unwrap();
        assert!(matches!(campbell_mix(&t, &[x]), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn min_norm_point_triangle() {
        let pts = vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![0.0, 3.0]];
        let p = min_norm_point(&pts);
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        let pts = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let p = min_norm_point(&pts);
        assert!(p.iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn prob_synth_exact_target() {
        let gs = GateSet::clifford_t();
        let pool = enumerate_sequences(&gs, 8, 1e-9).unwrap();
        let r = prob_synth_with_pool(&named_gate("T").unwrap(), 0.45, 1e-6, &pool, 0, SynthParams {
            c: 0.25,
            c_prime: 0.75,
        })
        .unwrap();
        assert!(r.prob_error < 1e-7);
        assert!(r.det_error < 1e-12);
        assert!(r.prob_error <= r.det_error);
    }

    #[test]
    fn prob_synth_reports_unreachable() {
        let gs = GateSet::clifford_t();
        let pool = enumerate_sequences(&gs, 2, 1e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = crate::qubit1::magic_unembed(&random_magic(&mut rng)).unwrap();
        let r = prob_synth_with_pool(&t, 0.05, 1e-6, &pool, 0, SynthParams::default());
        assert!(matches!(r, Err(Error::CoveringUnreachable { .. })));
    }
}
