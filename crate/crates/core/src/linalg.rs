//! Dense linear algebra helpers shared by every module.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{approx_f64, real, Real};
use crate::tol;

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;
pub type RMatrix<T> = DMatrix<T>;
pub type RVector<T> = DVector<T>;

/// `e^{i theta}` without going through `num_traits::Float`.
#[inline]
pub fn phase<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

/// Max entrywise modulus.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
}

pub fn max_abs_real<T: Real>(m: &RMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

pub fn frobenius_real<T: Real>(m: &RMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc + *x * *x).sqrt()
}

/// Max entrywise modulus of `M - M^H`.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max(cabs(m[(i, j)] - m[(j, i)].conj()));
        }
    }
    worst
}

/// `(M + M^H)/2`.
pub fn symmetrize<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = Complex::new(real::<T>(0.5), T::zero());
    (m + m.adjoint()).map(|z| z * half)
}

/// `(M + M^T)/2` for real matrices.
pub fn symmetrize_real<T: Real>(m: &RMatrix<T>) -> RMatrix<T> {
    let half = real::<T>(0.5);
    (m + m.transpose()).map(|x| x * half)
}

/// Repair small Hermiticity defects, reject large ones.
///
/// Defects up to [`tol::HERMITICITY_REPAIR`] are absorbed by symmetrizing;
/// anything larger is a user error.
pub fn validate_hermitian<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let defect = hermiticity_defect(m);
    if defect > real(tol::HERMITICITY_REPAIR) {
        return Err(Error::NotHermitian {
            violation: approx_f64(defect),
        });
    }
    Ok(symmetrize(m))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Returns `(values, basis)` with `basis` unitary, columns are eigenvectors.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (RVector<T>, CMatrix<T>) {
    let se = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .expect("eigenvalues must be comparable")
    });
    let values = RVector::from_fn(n, |i, _| se.eigenvalues[order[i]]);
    let basis = CMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    (values, basis)
}

/// Spectral norm (largest |eigenvalue|) of a Hermitian matrix.
pub fn hermitian_spectral_norm<T: Real>(m: &CMatrix<T>) -> T {
    let (vals, _) = hermitian_eigen(m);
    vals.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Group sorted values into clusters closer than `threshold`.
///
/// Returns `(group means, member indices per group)`.
pub fn group_sorted<T: Real>(values: &RVector<T>, threshold: T) -> Vec<(T, Vec<usize>)> {
    let mut groups: Vec<(T, Vec<usize>)> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for i in 0..values.len() {
        if let Some(&last) = current.last() {
            if values[i] - values[last] < threshold {
                current.push(i);
                continue;
            }
            let mean = group_mean(values, &current);
            groups.push((mean, std::mem::take(&mut current)));
        }
        current.push(i);
    }
    if !current.is_empty() {
        let mean = group_mean(values, &current);
        groups.push((mean, current));
    }
    groups
}

fn group_mean<T: Real>(values: &RVector<T>, idx: &[usize]) -> T {
    let sum = idx.iter().fold(T::zero(), |acc, &i| acc + values[i]);
    sum / real(idx.len() as f64)
}

/// Degeneracy-grouping threshold for energies: `1e-8 * max(1, ||H||)`.
pub fn level_threshold<T: Real>(spectral_norm: T) -> T {
    real::<T>(tol::LEVEL_GROUPING_REL) * T::one().max(spectral_norm)
}

/// Column-major vectorization.
pub fn vec_of<T: Real>(m: &CMatrix<T>) -> CVector<T> {
    CVector::from_column_slice(m.as_slice())
}

/// Partial trace over the first factor of `C^{da} (x) C^{db}`.
pub fn partial_trace_first<T: Real>(m: &CMatrix<T>, da: usize, db: usize) -> CMatrix<T> {
    let mut out = CMatrix::zeros(db, db);
    for k in 0..db {
        for l in 0..db {
            let mut acc = Complex::new(T::zero(), T::zero());
            for a in 0..da {
                acc += m[(a * db + k, a * db + l)];
            }
            out[(k, l)] = acc;
        }
    }
    out
}

/// Partial trace over the second factor of `C^{da} (x) C^{db}`.
pub fn partial_trace_second<T: Real>(m: &CMatrix<T>, da: usize, db: usize) -> CMatrix<T> {
    let mut out = CMatrix::zeros(da, da);
    for a in 0..da {
        for b in 0..da {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..db {
                acc += m[(a * db + k, b * db + k)];
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Orthonormal Hermitian basis of `n x n` matrices under `Re tr(AB)`:
/// diagonal units, then symmetric and antisymmetric off-diagonal pairs.
pub fn hermitian_basis<T: Real>(n: usize) -> Vec<CMatrix<T>> {
    let mut basis = Vec::with_capacity(n * n);
    let s = real::<T>(std::f64::consts::FRAC_1_SQRT_2);
    for i in 0..n {
        let mut m = CMatrix::zeros(n, n);
        m[(i, i)] = Complex::new(T::one(), T::zero());
        basis.push(m);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut x = CMatrix::zeros(n, n);
            x[(i, j)] = Complex::new(s, T::zero());
            x[(j, i)] = Complex::new(s, T::zero());
            basis.push(x);
            let mut y = CMatrix::zeros(n, n);
            y[(i, j)] = Complex::new(T::zero(), s);
            y[(j, i)] = Complex::new(T::zero(), -s);
            basis.push(y);
        }
    }
    basis
}

/// Coordinates of a Hermitian matrix in [`hermitian_basis`].
pub fn hermitian_coords<T: Real>(m: &CMatrix<T>) -> RVector<T> {
    let n = m.nrows();
    let basis = hermitian_basis::<T>(n);
    RVector::from_fn(basis.len(), |k, _| {
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += (basis[k][(j, i)] * m[(i, j)]).re;
            }
        }
        acc
    })
}

/// Null-space basis of a real matrix with the global rank rule
/// (singular values below `1e-8 * sigma_max` count as zero).
///
/// Returns `(null-space vectors, rank)`.
pub fn real_nullspace<T: Real>(m: &RMatrix<T>) -> Result<(Vec<RVector<T>>, usize)> {
    let ncols = m.ncols();
    // Compress tall systems through QR first: R has the same right singular
    // vectors and singular values as M, and the SVD then runs on ncols^2.
    let compact: RMatrix<T> = if m.nrows() > ncols {
        m.clone().qr().r()
    } else {
        m.clone()
    };
    let svd = compact.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD did not produce right singular vectors".into()))?;
    let sigma_max = svd
        .singular_values
        .iter()
        .fold(T::zero(), |acc, s| acc.max(*s));
    let cut = real::<T>(tol::RANK_CUT_REL) * sigma_max;
    let mut null = Vec::new();
    let mut rank = 0;
    for i in 0..svd.singular_values.len() {
        if svd.singular_values[i] <= cut {
            null.push(v_t.row(i).transpose());
        } else {
            rank += 1;
        }
    }
    // Rows of V^T not covered by singular values (rank-deficient wide case)
    // are already excluded because the SVD here is square or tall.
    if v_t.nrows() < ncols {
        return Err(Error::Numeric("incomplete right singular basis".into()));
    }
    Ok((null, rank))
}

/// `exp(M)` for a real square matrix by scaling-and-squaring with a Taylor
/// core. Adequate for the small, well-scaled matrices used here.
pub fn real_matrix_exp<T: Real>(m: &RMatrix<T>) -> RMatrix<T> {
    let n = m.nrows();
    let norm = max_abs_real(m) * real(n as f64);
    let mut squarings = 0usize;
    let mut scale = T::one();
    let half = real::<T>(0.5);
    let mut scaled_norm = norm;
    while scaled_norm > half && squarings < 60 {
        scaled_norm *= half;
        scale *= half;
        squarings += 1;
    }
    let a = m.map(|x| x * scale);
    let mut result = RMatrix::identity(n, n);
    let mut term = RMatrix::identity(n, n);
    for k in 1..=20 {
        term = (&term * &a).map(|x| x / real(k as f64));
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tolerance: T) -> T {
    let two = real::<T>(2.0);
    let six = real::<T>(6.0);
    let m = (a + b) / two;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / six * (fa + real::<T>(4.0) * fm + fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tolerance, 24)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tolerance: T,
    depth: usize,
) -> T {
    let two = real::<T>(2.0);
    let six = real::<T>(6.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / six * (fa + real::<T>(4.0) * flm + fm);
    let right = (b - m) / six * (fm + real::<T>(4.0) * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= real::<T>(15.0) * tolerance {
        left + right + delta / real::<T>(15.0)
    } else {
        let half_tol = tolerance / two;
        simpson_recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
            + simpson_recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
    }
}
