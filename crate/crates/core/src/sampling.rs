//! Seeded random matrices and vectors.
//!
//! All sampling happens in `f64` and is embedded into the working scalar,
//! so streams are identical across scalar types. Parallel consumers derive
//! one stream per task from `(master_seed, index)`.

use nalgebra::Complex;
use rand::Rng;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{symmetrize, CMatrix, CVector, RVector};
use crate::scalar::{real, Real};

/// Deterministic stream for task `index` under `master_seed`
/// (SplitMix64 mixing).
pub fn stream_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut z = master_seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

pub fn normal<T: Real>(rng: &mut impl Rng) -> T {
    real(rng.sample::<f64, _>(StandardNormal))
}

pub fn cnormal<T: Real>(rng: &mut impl Rng) -> Complex<T> {
    Complex::new(normal(rng), normal(rng))
}

/// GUE-style Hermitian matrix: independent Gaussian entries of standard
/// deviation `scale` (off-diagonal entries complex), then symmetrized.
pub fn random_hermitian<T: Real>(rng: &mut impl Rng, dim: usize, scale: T) -> CMatrix<T> {
    let root_half = real::<T>(std::f64::consts::FRAC_1_SQRT_2);
    let mut m = CMatrix::<T>::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex::new(normal::<T>(rng) * scale, T::zero());
        for j in (i + 1)..dim {
            let z = cnormal::<T>(rng) * Complex::new(root_half * scale, T::zero());
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    symmetrize(&m)
}

/// Random density matrix `G G^H / tr(G G^H)` with Ginibre `G`.
pub fn random_density_matrix<T: Real>(rng: &mut impl Rng, dim: usize) -> CMatrix<T> {
    let g = CMatrix::<T>::from_fn(dim, dim, |_, _| cnormal(rng));
    let k = &g * g.adjoint();
    let tr = k.trace().re;
    k.map(|z| z / Complex::new(tr, T::zero()))
}

/// Normalized complex Gaussian vector (Haar-uniform on the unit sphere).
pub fn random_unit_vector<T: Real>(rng: &mut impl Rng, dim: usize) -> CVector<T> {
    loop {
        let v = CVector::<T>::from_fn(dim, |_, _| cnormal(rng));
        let n = v.norm();
        if n > real(1e-6) {
            return v.map(|z| z / Complex::new(n, T::zero()));
        }
    }
}

/// Haar-random unitary: QR of a Ginibre matrix with the diagonal of `R`
/// rephased to be positive.
pub fn haar_unitary<T: Real>(rng: &mut impl Rng, dim: usize) -> CMatrix<T> {
    let g = CMatrix::<T>::from_fn(dim, dim, |_, _| cnormal(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let a = crate::linalg::cabs(d);
        if a > T::zero() {
            let correction = d / Complex::new(a, T::zero());
            for i in 0..dim {
                q[(i, j)] *= correction;
            }
        }
    }
    q
}

/// Random real vector with standard normal entries.
pub fn random_real_vector<T: Real>(rng: &mut impl Rng, dim: usize, scale: T) -> RVector<T> {
    RVector::from_fn(dim, |_, _| normal::<T>(rng) * scale)
}
