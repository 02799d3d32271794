use super::{ComplexMatrix, HermitianMatrix, Unitary, C64, ZERO};

const MAX_SWEEPS: usize = 80;

/// Eigendecomposition `M = V diag(values) V^dag` with eigenvalues in
/// descending order and orthonormal eigenvectors as columns of `vectors`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(m: &HermitianMatrix) -> Eigen {
    let a = m.as_matrix();
    let n = a.rows();
    let mut w: Vec<C64> = a.data().to_vec();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if n > 1 && scale > 0.0 {
        let thresh = (1e-15 * scale).powi(2);
        let mut prev = f64::INFINITY;
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += w[p * n + q].norm_sqr();
                }
            }
            // stop once converged or when rounding noise stalls progress
            if off <= thresh || (off < 1e-20 * scale * scale && off >= 0.5 * prev) {
                break;
            }
            prev = off;
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut w, &mut v, n, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| w[i * n + i].re).collect();
    order.sort_by(|&x, &y| diag[y].total_cmp(&diag[x]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Eigen { values, vectors }
}

fn rotate(w: &mut [C64], v: &mut ComplexMatrix, n: usize, p: usize, q: usize) {
    let apq = w[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    // Phase-rotate index q so that the pivot becomes real and positive.
    let ph = apq / r;
    let phc = ph.conj();
    for k in 0..n {
        w[k * n + q] *= phc;
    }
    for k in 0..n {
        w[q * n + k] *= ph;
    }
    for k in 0..n {
        v[(k, q)] *= phc;
    }
    let app = w[p * n + p].re;
    let aqq = w[q * n + q].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        let akp = w[k * n + p];
        let akq = w[k * n + q];
        w[k * n + p] = akp * c - akq * s;
        w[k * n + q] = akp * s + akq * c;
    }
    for k in 0..n {
        let apk = w[p * n + k];
        let aqk = w[q * n + k];
        w[p * n + k] = apk * c - aqk * s;
        w[q * n + k] = apk * s + aqk * c;
    }
    w[p * n + p] = C64::new(app - t * r, 0.0);
    w[q * n + q] = C64::new(aqq + t * r, 0.0);
    w[p * n + q] = ZERO;
    w[q * n + p] = ZERO;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s;
        v[(k, q)] = vkp * s + vkq * c;
    }
}

/// Eigenvalues and eigenvectors of a unitary (normal) matrix.
///
/// Diagonalizes the Hermitian part `(U + U^dag)/2` first; inside each cluster
/// of (nearly) equal eigenvalues it diagonalizes `(U - U^dag)/2i`, which
/// commutes with the first and leaves each cluster invariant. Eigenvalues are
/// read off as normalized Rayleigh quotients.
pub fn unitary_eig(u: &Unitary) -> (Vec<C64>, ComplexMatrix) {
    const CLUSTER_TOL: f64 = 1e-6;
    let m = u.as_matrix();
    let n = m.rows();
    let re = ComplexMatrix::from_fn(n, n, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    let im = ComplexMatrix::from_fn(n, n, |r, c| {
        (m[(r, c)] - m[(c, r)].conj()) * C64::new(0.0, -0.5)
    });
    let e = hermitian_eig(&HermitianMatrix::new_unchecked(re));
    let mut vectors = e.vectors.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && e.values[end - 1] - e.values[end] <= CLUSTER_TOL {
            end += 1;
        }
        let k = end - start;
        if k > 1 {
            let basis = ComplexMatrix::from_fn(n, k, |r, c| e.vectors[(r, start + c)]);
            let restricted = &(&basis.adjoint() * &im) * &basis;
            let sub = hermitian_eig(&HermitianMatrix::new_unchecked(restricted));
            let rotated = &basis * &sub.vectors;
            for r in 0..n {
                for c in 0..k {
                    vectors[(r, start + c)] = rotated[(r, c)];
                }
            }
        }
        start = end;
    }
    let vals = (0..n)
        .map(|k| {
            let col = vectors.column(k);
            let mv = m.apply(&col);
            let z: C64 = col.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum();
            z / z.norm()
        })
        .collect();
    (vals, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{haar_unitary, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigenvectors_orthonormal_on_many_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for d in [2, 3, 4] {
            for _ in 0..1000 {
                let h = random_hermitian(d, &mut rng);
                let e = h.eig();
                let g = &e.vectors.adjoint() * &e.vectors;
                let dev = (&g - &ComplexMatrix::identity(d)).frobenius_norm();
                assert!(dev <= 1e-9, "orthonormality deviation {dev}");
            }
        }
    }

    #[test]
    fn unitary_eigenvalues_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for d in [2, 3, 4] {
            for _ in 0..50 {
                let u = haar_unitary(d, &mut rng);
                let (vals, vecs) = unitary_eig(&u);
                let lam = ComplexMatrix::diag(&vals);
                let rec = &(&vecs * &lam) * &vecs.adjoint();
                assert!((&rec - u.as_matrix()).frobenius_norm() < 1e-9);
            }
        }
    }

    #[test]
    fn unitary_eig_conjugate_pair() {
        // e^{+ia} and e^{-ia} share the same Hermitian part
        let u = Unitary::diagonal_phases(&[0.7, -0.7]);
        let (vals, vecs) = unitary_eig(&u);
        let rec = &(&vecs * &ComplexMatrix::diag(&vals)) * &vecs.adjoint();
        assert!((&rec - u.as_matrix()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn unitary_eig_degenerate() {
        let u = Unitary::diagonal_phases(&[0.3, 0.3, -1.0]);
        let (mut vals, _) = unitary_eig(&u);
        vals.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        assert!((vals[0].arg() + 1.0).abs() < 1e-12);
        assert!((vals[1].arg() - 0.3).abs() < 1e-12);
        assert!((vals[2].arg() - 0.3).abs() < 1e-12);
    }
}
