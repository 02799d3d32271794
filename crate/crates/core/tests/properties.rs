use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use usynth::bounds::theorem1_bounds;
use usynth::channels::{
    choi, diamond_distance, fidelity, optimal_mix, optimal_mix_primal, trace_distance,
    unitary_distance, ChoiOperator, ProbabilityDistribution,
};
use usynth::linalg::random::{haar_unitary, random_density, random_pure_state};
use usynth::linalg::{ComplexMatrix, Unitary};
use usynth::qubit1::{
    cap_covering, magic_embed, magic_unembed, mix_distance_1q, random_magic, support_filter,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_p(n: usize, r: &mut ChaCha8Rng) -> ProbabilityDistribution {
    let w: Vec<f64> = (0..n).map(|_| r.random::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    ProbabilityDistribution::new(w.iter().map(|x| x / s).collect()).unwrap()
}

/// Unitary near `u`: `u · exp(i t H)` for a random Hermitian direction.
fn nearby(u: &Unitary, t: f64, r: &mut ChaCha8Rng) -> Unitary {
    let h = usynth::linalg::random::random_hermitian(u.dim(), r);
    let e = h.eig();
    let d = u.dim();
    let scale = e.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
    let m = ComplexMatrix::from_fn(d, d, |i, j| {
        (0..d)
            .map(|k| {
                let ph = usynth::linalg::C64::from_polar(1.0, t * e.values[k] / scale);
                e.vectors[(i, k)] * ph * e.vectors[(j, k)].conj()
            })
            .sum()
    });
    u.compose(&Unitary::new(m).unwrap()).unwrap()
}

#[test]
fn unitary_distance_is_a_metric() {
    let mut r = rng(1);
    for d in [2, 3] {
        for _ in 0..50 {
            let (a, b, c) = (haar_unitary(d, &mut r), haar_unitary(d, &mut r), haar_unitary(d, &mut r));
            let ab = unitary_distance(&a, &b).unwrap();
            assert!(unitary_distance(&a, &a).unwrap() < 1e-7);
            assert!((ab - unitary_distance(&b, &a).unwrap()).abs() < 1e-10);
            let ac = unitary_distance(&a, &c).unwrap();
            let cb = unitary_distance(&c, &b).unwrap();
            assert!(ab <= ac + cb + 1e-10);
            let g = haar_unitary(d, &mut r);
            let gab = unitary_distance(&g.compose(&a).unwrap(), &g.compose(&b).unwrap()).unwrap();
            assert!((gab - ab).abs() < 1e-9);
        }
    }
}

#[test]
fn closed_form_matches_diamond_sdp() {
    let mut r = rng(2);
    for d in [2, 3] {
        for _ in 0..10 {
            let (a, b) = (haar_unitary(d, &mut r), haar_unitary(d, &mut r));
            let sdp = diamond_distance(&choi(&a), &choi(&b)).unwrap();
            assert!((sdp - unitary_distance(&a, &b).unwrap()).abs() < 1e-6);
        }
    }
}

#[test]
fn mixing_never_worse_than_best_candidate() {
    let mut r = rng(3);
    for d in [2, 3] {
        for _ in 0..15 {
            let t = haar_unitary(d, &mut r);
            let cands: Vec<Unitary> = (0..5).map(|_| nearby(&t, 0.4, &mut r)).collect();
            let best = cands
                .iter()
                .map(|c| unitary_distance(&t, c).unwrap())
                .fold(f64::INFINITY, f64::min);
            let chois: Vec<ChoiOperator> = cands.iter().map(choi).collect();
            let m = optimal_mix(&choi(&t), &chois).unwrap();
            assert!(m.value <= best + 1e-7, "{} > {}", m.value, best);
            let b = theorem1_bounds(best.min(1.0), d).unwrap();
            assert!(m.value >= b.lower - 1e-7, "{} < lower {}", m.value, b.lower);
        }
    }
}

#[test]
fn covering_sandwich_qubit() {
    let mut r = rng(4);
    let eps = 0.45;
    let net = cap_covering(&random_magic(&mut r), 1.0, eps).unwrap();
    for _ in 0..5 {
        let t = random_magic(&mut r);
        let keep = support_filter(&t, &net, eps).unwrap();
        let cands: Vec<ChoiOperator> = keep
            .iter()
            .map(|&i| choi(&magic_unembed(&net[i]).unwrap()))
            .collect();
        let m = optimal_mix(&choi(&magic_unembed(&t).unwrap()), &cands).unwrap();
        assert!(m.value <= eps * eps + 1e-7, "{} > eps^2", m.value);
    }
}

#[test]
fn magic_path_matches_sdp() {
    let mut r = rng(5);
    for _ in 0..100 {
        let t = haar_unitary(2, &mut r);
        let k = r.random_range(1..5);
        let cands: Vec<Unitary> = (0..k).map(|_| nearby(&t, 0.6, &mut r)).collect();
        let p = random_p(k, &mut r);
        let mags: Vec<_> = cands.iter().map(|c| magic_embed(c).unwrap()).collect();
        let fast = mix_distance_1q(&magic_embed(&t).unwrap(), &mags, &p).unwrap();
        let chois: Vec<ChoiOperator> = cands.iter().map(choi).collect();
        let mix = ChoiOperator::mixture(&chois, &p).unwrap();
        let sdp = diamond_distance(&choi(&t), &mix).unwrap();
        assert!((fast - sdp).abs() < 1e-7, "{fast} vs {sdp}");
    }
}

#[test]
fn primal_and_dual_lowerings_agree() {
    let mut r = rng(6);
    for d in [2, 3] {
        for _ in 0..10 {
            let t = haar_unitary(d, &mut r);
            let cands: Vec<ChoiOperator> =
                (0..4).map(|_| choi(&nearby(&t, 0.5, &mut r))).collect();
            let a = optimal_mix(&choi(&t), &cands).unwrap();
            let b = optimal_mix_primal(&choi(&t), &cands).unwrap();
            assert!((a.value - b.value).abs() < 1e-7, "{} vs {}", a.value, b.value);
        }
    }
}

#[test]
fn every_distribution_is_weakly_dual_bounded() {
    let mut r = rng(7);
    for _ in 0..10 {
        let t = haar_unitary(3, &mut r);
        let cands: Vec<ChoiOperator> = (0..4).map(|_| choi(&nearby(&t, 0.5, &mut r))).collect();
        let opt = optimal_mix(&choi(&t), &cands).unwrap().value;
        for _ in 0..3 {
            let p = random_p(4, &mut r);
            let v = diamond_distance(&choi(&t), &ChoiOperator::mixture(&cands, &p).unwrap()).unwrap();
            assert!(v >= opt - 1e-7, "{v} < {opt}");
        }
    }
}

#[test]
fn candidate_order_does_not_matter() {
    let mut r = rng(8);
    for _ in 0..10 {
        let t = haar_unitary(2, &mut r);
        let mut cands: Vec<ChoiOperator> =
            (0..6).map(|_| choi(&nearby(&t, 0.5, &mut r))).collect();
        let a = optimal_mix(&choi(&t), &cands).unwrap().value;
        cands.shuffle(&mut r);
        let b = optimal_mix(&choi(&t), &cands).unwrap().value;
        assert!((a - b).abs() < 1e-7);
    }
}

#[test]
fn support_restriction_keeps_the_optimum() {
    let mut r = rng(9);
    let eps = 0.4;
    let net = cap_covering(&random_magic(&mut r), 1.0, eps).unwrap();
    let all: Vec<ChoiOperator> = net.iter().map(|m| choi(&magic_unembed(m).unwrap())).collect();
    for _ in 0..3 {
        let t = random_magic(&mut r);
        let tc = choi(&magic_unembed(&t).unwrap());
        let keep = support_filter(&t, &net, eps).unwrap();
        let sub: Vec<ChoiOperator> = keep.iter().map(|&i| all[i].clone()).collect();
        let full = optimal_mix(&tc, &all).unwrap().value;
        let restricted = optimal_mix(&tc, &sub).unwrap().value;
        assert!((full - restricted).abs() < 1e-7, "{full} vs {restricted}");
    }
}

#[test]
fn fuchs_van_de_graaf() {
    let mut r = rng(10);
    for _ in 0..500 {
        let (a, b) = (random_density(2, &mut r), random_density(2, &mut r));
        let f = fidelity(a.as_matrix(), b.as_matrix()).unwrap();
        let t = trace_distance(a.as_matrix(), b.as_matrix()).unwrap();
        assert!(1.0 - f.sqrt() <= t + 1e-12);
        assert!(t <= (1.0 - f).max(0.0).sqrt() + 1e-12);
    }
    for _ in 0..200 {
        let (u, v) = (random_pure_state(2, &mut r), random_pure_state(2, &mut r));
        let (a, b) = (ComplexMatrix::outer(&u, &u), ComplexMatrix::outer(&v, &v));
        let f = fidelity(&a, &b).unwrap();
        let t = trace_distance(&a, &b).unwrap();
        assert!((t - (1.0 - f).max(0.0).sqrt()).abs() < 1e-9);
    }
}
