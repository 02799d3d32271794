//! Seeded random matrices: Haar unitaries, Hermitian and density matrices.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, HermitianMatrix, Unitary, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// `A + A^dag` for Gaussian `A`.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let a = random_matrix(d, d, rng);
    HermitianMatrix::new_unchecked(&a + &a.adjoint())
}

/// Haar-distributed unitary via Gram-Schmidt on a Ginibre matrix with the
/// column phases fixed by the diagonal of R.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Unitary {
    let a = random_matrix(d, d, rng);
    let mut q = ComplexMatrix::zeros(d, d);
    for c in 0..d {
        let mut v = a.column(c);
        for k in 0..c {
            let qk = q.column(k);
            let proj: C64 = qk.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, qi) in v.iter_mut().zip(&qk) {
                *vi -= proj * qi;
            }
        }
        // second pass for numerical orthogonality
        for k in 0..c {
            let qk = q.column(k);
            let proj: C64 = qk.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, qi) in v.iter_mut().zip(&qk) {
                *vi -= proj * qi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (r, vi) in v.iter().enumerate() {
            q[(r, c)] = vi / norm;
        }
    }
    Unitary::new_unchecked(q)
}

/// Haar-random pure state vector.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Hilbert-Schmidt random mixed state `G G^dag / tr(G G^dag)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = random_matrix(d, d, rng);
    let p = &g * &g.adjoint();
    let t = p.trace().re;
    HermitianMatrix::new_unchecked(p.scale_real(1.0 / t))
}
