//! Euclidean Jordan algebra engine: products, quadratic maps, cones and
//! derivations for spin factors, Hermitian matrix algebras over the reals
//! and complexes, and the exceptional Albert algebra.
//!
//! Every algebra is stored through its structure tensor `c` with
//! `(x o y)_k = sum_ij c_kij x_i y_j` over a fixed ordered real basis.

pub mod octonion;
pub mod suite;

use std::sync::Arc;

use nalgebra::{Complex, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{
    frobenius_real, hermitian_eigen, max_abs_real, real_matrix_exp, real_nullspace, CMatrix,
    RMatrix, RVector,
};
use crate::scalar::{approx_f64, real, Real};
use crate::tol;
use octonion::Octonion;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JordanKind {
    /// Generators `e_1..e_n` with `e_i o e_j = delta_ij 1`; dimension `n+1`.
    Spin(usize),
    /// Real symmetric `n x n` matrices; dimension `n(n+1)/2`.
    HermReal(usize),
    /// Complex Hermitian `n x n` matrices; dimension `n^2`.
    HermComplex(usize),
    /// 3 x 3 octonionic Hermitian matrices; dimension 27.
    Albert,
}

impl JordanKind {
    pub fn dim(&self) -> usize {
        match *self {
            JordanKind::Spin(n) => n + 1,
            JordanKind::HermReal(n) => n * (n + 1) / 2,
            JordanKind::HermComplex(n) => n * n,
            JordanKind::Albert => 27,
        }
    }

    /// Rank: the number of eigenvalues counted with multiplicity.
    pub fn rank(&self) -> usize {
        match *self {
            JordanKind::Spin(_) => 2,
            JordanKind::HermReal(n) | JordanKind::HermComplex(n) => n,
            JordanKind::Albert => 3,
        }
    }
}

#[derive(Debug)]
pub struct JordanAlgebra<T: Real> {
    kind: JordanKind,
    dim: usize,
    /// `c[k*dim*dim + i*dim + j]`, symmetric in `(i, j)`.
    structure: Vec<T>,
}

impl<T: Real> JordanAlgebra<T> {
    pub fn new(kind: JordanKind) -> Result<Arc<Self>> {
        match kind {
            JordanKind::Spin(0) => Err(Error::InvalidInput("spin factor needs n >= 1".into())),
            JordanKind::HermReal(0) | JordanKind::HermComplex(0) => {
                Err(Error::InvalidInput("matrix algebra needs n >= 1".into()))
            }
            _ => Ok(Arc::new(Self::build(kind))),
        }
    }

    pub fn spin(n: usize) -> Arc<Self> {
        Self::new(JordanKind::Spin(n)).expect("n >= 1")
    }

    pub fn herm_real(n: usize) -> Arc<Self> {
        Self::new(JordanKind::HermReal(n)).expect("n >= 1")
    }

    pub fn herm_complex(n: usize) -> Arc<Self> {
        Self::new(JordanKind::HermComplex(n)).expect("n >= 1")
    }

    pub fn albert() -> Arc<Self> {
        Self::new(JordanKind::Albert).expect("fixed kind")
    }

    fn build(kind: JordanKind) -> Self {
        let dim = kind.dim();
        let mut structure = vec![T::zero(); dim * dim * dim];
        {
            let mut set = |k: usize, i: usize, j: usize, v: T| {
                structure[k * dim * dim + i * dim + j] = v;
            };
            match kind {
                JordanKind::Spin(n) => {
                    // basis (1, e_1..e_n): (s,v) o (t,w) = (st + v.w, sw + tv)
                    set(0, 0, 0, T::one());
                    for i in 1..=n {
                        set(0, i, i, T::one());
                        set(i, 0, i, T::one());
                        set(i, i, 0, T::one());
                    }
                }
                JordanKind::HermReal(n) | JordanKind::HermComplex(n) => {
                    let basis = matrix_basis::<T>(n, matches!(kind, JordanKind::HermComplex(_)));
                    let half = Complex::new(real::<T>(0.5), T::zero());
                    for i in 0..dim {
                        for j in i..dim {
                            let prod =
                                (&basis[i] * &basis[j] + &basis[j] * &basis[i]).map(|z| z * half);
                            for k in 0..dim {
                                // orthonormal basis under Re tr(AB)
                                let coeff = re_trace_product(&basis[k], &prod);
                                set(k, i, j, coeff);
                                set(k, j, i, coeff);
                            }
                        }
                    }
                }
                JordanKind::Albert => {
                    for i in 0..27 {
                        let bi = albert_from_coords(&unit_coords::<T>(27, i));
                        for j in i..27 {
                            let bj = albert_from_coords(&unit_coords::<T>(27, j));
                            let prod = oct3_sym_product(&bi, &bj);
                            let coords = albert_to_coords(&prod);
                            for k in 0..27 {
                                set(k, i, j, coords[k]);
                                set(k, j, i, coords[k]);
                            }
                        }
                    }
                }
            }
        }
        JordanAlgebra {
            kind,
            dim,
            structure,
        }
    }

    pub fn kind(&self) -> JordanKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn c(&self, k: usize, i: usize, j: usize) -> T {
        self.structure[k * self.dim * self.dim + i * self.dim + j]
    }

    pub fn element(self: &Arc<Self>, coords: RVector<T>) -> Result<JordanElement<T>> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: coords.len(),
            });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("coordinates must be finite".into()));
        }
        Ok(JordanElement {
            algebra: Arc::clone(self),
            coords,
        })
    }

    pub fn unit(self: &Arc<Self>) -> JordanElement<T> {
        let coords = match self.kind {
            JordanKind::Spin(_) => unit_coords(self.dim, 0),
            JordanKind::HermReal(n) | JordanKind::HermComplex(n) => {
                let mut c = RVector::zeros(self.dim);
                for i in 0..n {
                    c[i] = T::one();
                }
                c
            }
            JordanKind::Albert => {
                let mut c = RVector::zeros(27);
                c[0] = T::one();
                c[1] = T::one();
                c[2] = T::one();
                c
            }
        };
        JordanElement {
            algebra: Arc::clone(self),
            coords,
        }
    }

    /// Multiplication operator `R_x` as a matrix on coordinates.
    pub fn mult_operator(&self, x: &RVector<T>) -> RMatrix<T> {
        let d = self.dim;
        RMatrix::from_fn(d, d, |k, j| {
            let mut acc = T::zero();
            for i in 0..d {
                let xi = x[i];
                if xi != T::zero() {
                    acc += self.c(k, i, j) * xi;
                }
            }
            acc
        })
    }

    /// Trace form `T(x)`: the sum of eigenvalues with multiplicity.
    pub fn trace_form(&self, x: &RVector<T>) -> T {
        match self.kind {
            JordanKind::Spin(_) => x[0] + x[0],
            JordanKind::HermReal(n) | JordanKind::HermComplex(n) => {
                let mut acc = T::zero();
                for i in 0..n {
                    acc += x[i];
                }
                acc
            }
            JordanKind::Albert => x[0] + x[1] + x[2],
        }
    }

    /// Matrix realization for the special matrix kinds (oracle route).
    pub fn to_matrix(&self, x: &RVector<T>) -> Option<CMatrix<T>> {
        match self.kind {
            JordanKind::HermReal(n) | JordanKind::HermComplex(n) => {
                let basis = matrix_basis::<T>(n, matches!(self.kind, JordanKind::HermComplex(_)));
                let mut m = CMatrix::zeros(n, n);
                for (k, b) in basis.iter().enumerate() {
                    m += b.map(|z| z.scale(x[k]));
                }
                Some(m)
            }
            _ => None,
        }
    }

    /// Coordinates of a Hermitian matrix for the special matrix kinds.
    pub fn from_matrix(&self, m: &CMatrix<T>) -> Option<RVector<T>> {
        match self.kind {
            JordanKind::HermReal(n) | JordanKind::HermComplex(n) => {
                let basis = matrix_basis::<T>(n, matches!(self.kind, JordanKind::HermComplex(_)));
                Some(RVector::from_fn(self.dim, |k, _| {
                    re_trace_product(&basis[k], m)
                }))
            }
            _ => None,
        }
    }
}

fn unit_coords<T: Real>(dim: usize, k: usize) -> RVector<T> {
    let mut c = RVector::zeros(dim);
    c[k] = T::one();
    c
}

/// `Re tr(A B)`.
fn re_trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Orthonormal basis of Hermitian (or real symmetric) matrices under
/// `Re tr(AB)`: diagonal units first, then `(E_ij + E_ji)/sqrt2`, and for
/// the complex kind `(iE_ij - iE_ji)/sqrt2` interleaved per pair.
fn matrix_basis<T: Real>(n: usize, complex: bool) -> Vec<CMatrix<T>> {
    let s = real::<T>(std::f64::consts::FRAC_1_SQRT_2);
    let mut basis = Vec::new();
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
            if complex {
                let mut y = CMatrix::zeros(n, n);
                y[(i, j)] = Complex::new(T::zero(), s);
                y[(j, i)] = Complex::new(T::zero(), -s);
                basis.push(y);
            }
        }
    }
    basis
}

// --- octonionic 3x3 Hermitian matrices -------------------------------------

type Oct3<T> = [[Octonion<T>; 3]; 3];

/// Coordinates `[xi0, xi1, xi2, a(8), b(8), c(8)]` fill
/// `[[xi0, a, b], [conj a, xi1, c], [conj b, conj c, xi2]]`.
fn albert_from_coords<T: Real>(coords: &RVector<T>) -> Oct3<T> {
    let oct = |offset: usize| -> Octonion<T> {
        let mut c = [T::zero(); 8];
        for (u, cu) in c.iter_mut().enumerate() {
            *cu = coords[offset + u];
        }
        Octonion { c }
    };
    let a = oct(3);
    let b = oct(11);
    let c = oct(19);
    [
        [Octonion::from_real(coords[0]), a, b],
        [a.conj(), Octonion::from_real(coords[1]), c],
        [b.conj(), c.conj(), Octonion::from_real(coords[2])],
    ]
}

fn albert_to_coords<T: Real>(m: &Oct3<T>) -> RVector<T> {
    let mut coords = RVector::zeros(27);
    coords[0] = m[0][0].re();
    coords[1] = m[1][1].re();
    coords[2] = m[2][2].re();
    for u in 0..8 {
        coords[3 + u] = m[0][1].c[u];
        coords[11 + u] = m[0][2].c[u];
        coords[19 + u] = m[1][2].c[u];
    }
    coords
}

/// `(XY + YX)/2` with octonionic matrix multiplication.
fn oct3_sym_product<T: Real>(x: &Oct3<T>, y: &Oct3<T>) -> Oct3<T> {
    let mut out = [[Octonion::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let mut acc = Octonion::zero();
            for k in 0..3 {
                acc = acc + x[i][k] * y[k][j] + y[i][k] * x[k][j];
            }
            *entry = acc.scale(real(0.5));
        }
    }
    out
}

// --- elements ----------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct JordanElement<T: Real> {
    algebra: Arc<JordanAlgebra<T>>,
    coords: RVector<T>,
}

impl<T: Real> JordanElement<T> {
    pub fn algebra(&self) -> &Arc<JordanAlgebra<T>> {
        &self.algebra
    }

    pub fn coords(&self) -> &RVector<T> {
        &self.coords
    }

    pub fn norm(&self) -> T {
        self.coords.norm()
    }

    fn same_algebra(&self, other: &Self) -> Result<()> {
        if self.algebra.kind() == other.algebra.kind() {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        Ok(JordanElement {
            algebra: Arc::clone(&self.algebra),
            coords: &self.coords + &other.coords,
        })
    }

    pub fn scale(&self, s: T) -> Self {
        JordanElement {
            algebra: Arc::clone(&self.algebra),
            coords: self.coords.map(|x| x * s),
        }
    }
}

/// Bilinear commutative product from the structure tensor.
pub fn jordan_product<T: Real>(
    x: &JordanElement<T>,
    y: &JordanElement<T>,
) -> Result<JordanElement<T>> {
    x.same_algebra(y)?;
    let alg = x.algebra();
    let d = alg.dim();
    let mut out = RVector::zeros(d);
    for i in 0..d {
        let xi = x.coords[i];
        if xi == T::zero() {
            continue;
        }
        for j in 0..d {
            let yj = y.coords[j];
            if yj == T::zero() {
                continue;
            }
            let w = xi * yj;
            for k in 0..d {
                out[k] += alg.c(k, i, j) * w;
            }
        }
    }
    Ok(JordanElement {
        algebra: Arc::clone(alg),
        coords: out,
    })
}

/// Jordan power `x^m` (the subalgebra generated by `x` is associative).
pub fn jordan_power<T: Real>(x: &JordanElement<T>, m: usize) -> Result<JordanElement<T>> {
    match m {
        0 => Ok(x.algebra().unit()),
        _ => {
            let mut acc = x.clone();
            for _ in 1..m {
                acc = jordan_product(&acc, x)?;
            }
            Ok(acc)
        }
    }
}

// --- structural maps ----------------------------------------------------------

#[derive(Debug, Clone)]
pub enum StructuralFactor<T: Real> {
    /// Invertible algebra automorphism, stored by its coordinate matrix.
    Automorphism(RMatrix<T>),
    /// `Q_a`, stored by the coordinates of `a`.
    Quadratic(RVector<T>),
}

#[derive(Debug, Clone)]
pub enum StructuralTag<T: Real> {
    Automorphism,
    Quadratic(RVector<T>),
    /// Factored word of generators; never reduced, so the involution stays
    /// defined generator-wise.
    Composite(Vec<StructuralFactor<T>>),
}

/// Element of the structure semigroup acting on coordinates.
#[derive(Debug, Clone)]
pub struct StructuralMap<T: Real> {
    algebra: Arc<JordanAlgebra<T>>,
    pub matrix: RMatrix<T>,
    pub tag: StructuralTag<T>,
}

impl<T: Real> StructuralMap<T> {
    pub fn automorphism(algebra: &Arc<JordanAlgebra<T>>, matrix: RMatrix<T>) -> Result<Self> {
        if matrix.nrows() != algebra.dim() || matrix.ncols() != algebra.dim() {
            return Err(Error::DimensionMismatch {
                expected: algebra.dim(),
                got: matrix.nrows(),
            });
        }
        Ok(StructuralMap {
            algebra: Arc::clone(algebra),
            matrix,
            tag: StructuralTag::Automorphism,
        })
    }

    pub fn apply(&self, x: &JordanElement<T>) -> Result<JordanElement<T>> {
        if x.algebra().kind() != self.algebra.kind() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(JordanElement {
            algebra: Arc::clone(&self.algebra),
            coords: &self.matrix * &x.coords,
        })
    }

    /// Composition `self after other`; the word is kept factored.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.algebra.kind() != other.algebra.kind() {
            return Err(Error::AlgebraMismatch);
        }
        let mut factors = self.factors();
        factors.extend(other.factors());
        Ok(StructuralMap {
            algebra: Arc::clone(&self.algebra),
            matrix: &self.matrix * &other.matrix,
            tag: StructuralTag::Composite(factors),
        })
    }

    fn factors(&self) -> Vec<StructuralFactor<T>> {
        match &self.tag {
            StructuralTag::Automorphism => {
                vec![StructuralFactor::Automorphism(self.matrix.clone())]
            }
            StructuralTag::Quadratic(a) => vec![StructuralFactor::Quadratic(a.clone())],
            StructuralTag::Composite(f) => f.clone(),
        }
    }

    /// The involution `B -> B^t`: fixes each `Q_a`, inverts each
    /// automorphism, reverses words.
    pub fn transpose(&self) -> Result<Self> {
        let factors = self.factors();
        let mut transposed = Vec::with_capacity(factors.len());
        for f in factors.into_iter().rev() {
            transposed.push(match f {
                StructuralFactor::Automorphism(m) => {
                    let inv = m.clone().try_inverse().ok_or_else(|| {
                        Error::InvalidInput("automorphism factor is not invertible".into())
                    })?;
                    StructuralFactor::Automorphism(inv)
                }
                quad @ StructuralFactor::Quadratic(_) => quad,
            });
        }
        let mut matrix = RMatrix::identity(self.algebra.dim(), self.algebra.dim());
        for f in &transposed {
            let fm = match f {
                StructuralFactor::Automorphism(m) => m.clone(),
                StructuralFactor::Quadratic(a) => quadratic_matrix(&self.algebra, a),
            };
            matrix *= fm;
        }
        let tag = if transposed.len() == 1 {
            match &transposed[0] {
                StructuralFactor::Automorphism(_) => StructuralTag::Automorphism,
                StructuralFactor::Quadratic(a) => StructuralTag::Quadratic(a.clone()),
            }
        } else {
            StructuralTag::Composite(transposed)
        };
        Ok(StructuralMap {
            algebra: Arc::clone(&self.algebra),
            matrix,
            tag,
        })
    }
}

fn quadratic_matrix<T: Real>(alg: &Arc<JordanAlgebra<T>>, a: &RVector<T>) -> RMatrix<T> {
    let r_a = alg.mult_operator(a);
    let a_sq = {
        let el = JordanElement {
            algebra: Arc::clone(alg),
            coords: a.clone(),
        };
        jordan_product(&el, &el).expect("same algebra")
    };
    let r_aa = alg.mult_operator(&a_sq.coords);
    (&r_a * &r_a).map(|x| x * real::<T>(2.0)) - r_aa
}

/// The quadratic representation `Q_a = 2 R_a^2 - R_{a o a}`.
pub fn quadratic_map<T: Real>(a: &JordanElement<T>) -> StructuralMap<T> {
    StructuralMap {
        algebra: Arc::clone(a.algebra()),
        matrix: quadratic_matrix(a.algebra(), &a.coords),
        tag: StructuralTag::Quadratic(a.coords.clone()),
    }
}

/// `Q_a x`.
pub fn quadratic_apply<T: Real>(
    a: &JordanElement<T>,
    x: &JordanElement<T>,
) -> Result<JordanElement<T>> {
    a.same_algebra(x)?;
    quadratic_map(a).apply(x)
}

/// `{a, x, b} = (a o x) o b + (x o b) o a - (a o b) o x`.
pub fn triple_product<T: Real>(
    a: &JordanElement<T>,
    x: &JordanElement<T>,
    b: &JordanElement<T>,
) -> Result<JordanElement<T>> {
    a.same_algebra(x)?;
    a.same_algebra(b)?;
    let ax_b = jordan_product(&jordan_product(a, x)?, b)?;
    let xb_a = jordan_product(&jordan_product(x, b)?, a)?;
    let ab_x = jordan_product(&jordan_product(a, b)?, x)?;
    ax_b.add(&xb_a)?.add(&ab_x.scale(-T::one()))
}

/// Residual of `Q_{Ba} = B Q_a B^t` in Frobenius norm, with the pass
/// threshold `1e-9 * max(1, ||B||_F^2 ||Q_a||_F)`.
#[derive(Debug, Clone)]
pub struct StructuralCheck<T: Real> {
    pub residual: T,
    pub threshold: T,
    pub pass: bool,
}

pub fn structural_identity_check<T: Real>(
    b: &StructuralMap<T>,
    a: &JordanElement<T>,
) -> Result<StructuralCheck<T>> {
    if a.algebra().kind() != b.algebra.kind() {
        return Err(Error::AlgebraMismatch);
    }
    let ba = b.apply(a)?;
    let q_ba = quadratic_matrix(a.algebra(), &ba.coords);
    let q_a = quadratic_matrix(a.algebra(), &a.coords);
    let bt = b.transpose()?;
    let rhs = &b.matrix * &q_a * &bt.matrix;
    let residual = frobenius_real(&(&q_ba - &rhs));
    let scale = frobenius_real(&b.matrix) * frobenius_real(&b.matrix) * frobenius_real(&q_a);
    let threshold = real::<T>(1e-9) * T::one().max(scale);
    Ok(StructuralCheck {
        residual,
        threshold,
        pass: residual <= threshold,
    })
}

// --- spectra and the cone ------------------------------------------------------

/// Eigenvalues sorted ascending, with multiplicity up to the algebra rank.
pub fn spectrum<T: Real>(x: &JordanElement<T>) -> Vec<T> {
    let alg = x.algebra();
    match alg.kind() {
        JordanKind::Spin(_) => {
            let s = x.coords[0];
            let v = x.coords.rows(1, alg.dim() - 1).norm();
            vec![s - v, s + v]
        }
        JordanKind::HermReal(_) | JordanKind::HermComplex(_) => {
            let m = alg.to_matrix(&x.coords).expect("matrix kind");
            let (vals, _) = hermitian_eigen(&m);
            vals.iter().copied().collect()
        }
        JordanKind::Albert => albert_spectrum(x),
    }
}

/// Roots of `lambda^3 - T lambda^2 + S lambda - N` from the Albert trace,
/// quadratic and cubic (determinant) forms; falls back to the restriction
/// of `R_x` to the subalgebra generated by `x` if the cubic is degenerate.
fn albert_spectrum<T: Real>(x: &JordanElement<T>) -> Vec<T> {
    let (t1, s2, n3) = albert_char_forms(&x.coords);
    let scale = T::one().max(x.coords.norm());
    let third = real::<T>(1.0 / 3.0);
    let h = t1 * third;
    let p = s2 - t1 * t1 * third;
    let q = -real::<T>(2.0 / 27.0) * t1 * t1 * t1 + t1 * s2 * third - n3;

    let mut roots = if p >= -real::<T>(1e-13) * scale * scale {
        // nearly (or exactly) a triple root
        vec![h, h, h]
    } else {
        let m = real::<T>(2.0) * (-p * third).sqrt();
        let cos_arg = (real::<T>(3.0) * q / (p * m)).clamp(-T::one(), T::one());
        let phi = cos_arg.acos();
        let two_pi = T::two_pi();
        (0..3)
            .map(|k| h + m * ((phi - two_pi * real::<T>(k as f64)) * third).cos())
            .collect()
    };
    roots.sort_by(|a, b| a.partial_cmp(b).expect("roots comparable"));

    let char_poly = |l: T| ((l - t1) * l + s2) * l - n3;
    let tol_resid = real::<T>(1e-8) * scale * scale * scale;
    if roots.iter().any(|&r| char_poly(r).abs() > tol_resid) {
        if let Some(fallback) = albert_spectrum_via_subalgebra(x, t1) {
            return fallback;
        }
    }
    roots
}

/// Trace, quadratic and cubic (Freudenthal determinant) forms of an Albert
/// element.
fn albert_char_forms<T: Real>(coords: &RVector<T>) -> (T, T, T) {
    let xi0 = coords[0];
    let xi1 = coords[1];
    let xi2 = coords[2];
    let m = albert_from_coords(coords);
    let a = m[0][1];
    let b = m[0][2];
    let c = m[1][2];
    let t1 = xi0 + xi1 + xi2;
    let s2 = xi0 * xi1 + xi1 * xi2 + xi0 * xi2 - a.norm_sqr() - b.norm_sqr() - c.norm_sqr();
    let n3 = xi0 * xi1 * xi2 - xi0 * c.norm_sqr() - xi1 * b.norm_sqr() - xi2 * a.norm_sqr()
        + ((a * c) * b.conj()).re() + ((a * c) * b.conj()).re();
    (t1, s2, n3)
}

/// Eigenvalues of `R_x` restricted to `span{1, x, x^2}` (orthonormalized in
/// the trace form), with multiplicities resolved against the trace.
fn albert_spectrum_via_subalgebra<T: Real>(x: &JordanElement<T>, trace: T) -> Option<Vec<T>> {
    let alg = x.algebra();
    let inner = |u: &JordanElement<T>, v: &JordanElement<T>| -> T {
        alg.trace_form(&jordan_product(u, v).expect("same algebra").coords)
    };
    let mut basis: Vec<JordanElement<T>> = Vec::new();
    for cand in [
        alg.unit(),
        x.clone(),
        jordan_product(x, x).expect("same algebra"),
    ] {
        let mut v = cand;
        for b in &basis {
            let coeff = inner(&v, b);
            v = v.add(&b.scale(-coeff)).expect("same algebra");
        }
        let norm = inner(&v, &v).max(T::zero()).sqrt();
        if norm > real::<T>(1e-10) * T::one().max(x.norm()) {
            basis.push(v.scale(T::one() / norm));
        }
    }
    if basis.is_empty() {
        return None;
    }
    let nb = basis.len();
    let m = RMatrix::<T>::from_fn(nb, nb, |i, j| {
        inner(
            &basis[i],
            &jordan_product(x, &basis[j]).expect("same algebra"),
        )
    });
    let se = SymmetricEigen::new(crate::linalg::symmetrize_real(&m));
    let mut values: Vec<T> = se.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
    // distribute multiplicities (rank 3) to match the trace
    let mut best: Option<(T, Vec<T>)> = None;
    let combos: Vec<Vec<usize>> = match nb {
        1 => vec![vec![3]],
        2 => vec![vec![1, 2], vec![2, 1]],
        _ => vec![vec![1, 1, 1]],
    };
    for combo in combos {
        let mut expanded = Vec::new();
        for (v, &mult) in values.iter().zip(combo.iter()) {
            for _ in 0..mult {
                expanded.push(*v);
            }
        }
        let err = (expanded.iter().fold(T::zero(), |acc, v| acc + *v) - trace).abs();
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, expanded));
        }
    }
    best.map(|(_, mut v)| {
        v.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
        v
    })
}

/// Cone membership: the minimal eigenvalue stays above
/// [`tol::CONE_MEMBER_MIN_EIGENVALUE`].
pub fn cone_member<T: Real>(x: &JordanElement<T>) -> bool {
    spectrum(x)
        .first()
        .map(|&m| m >= real(tol::CONE_MEMBER_MIN_EIGENVALUE))
        .unwrap_or(false)
}

/// Spectral square root via Lagrange interpolation on the distinct
/// eigenvalues (the subalgebra generated by one element is associative).
pub fn sqrt_element<T: Real>(x: &JordanElement<T>) -> Result<JordanElement<T>> {
    let eigs = spectrum(x);
    let min = eigs.first().copied().unwrap_or(T::zero());
    if min < real(tol::CONE_MEMBER_MIN_EIGENVALUE) {
        return Err(Error::NotPositive {
            min_eigenvalue: approx_f64(min),
        });
    }
    let scale = eigs.iter().fold(T::one(), |acc, e| acc.max(e.abs()));
    let mut distinct: Vec<T> = Vec::new();
    for &e in &eigs {
        if distinct
            .last()
            .is_none_or(|&last| e - last > real::<T>(tol::RANK_CUT_REL) * scale)
        {
            distinct.push(e);
        }
    }
    let alg = x.algebra();
    if distinct.len() == 1 {
        return Ok(alg.unit().scale(distinct[0].max(T::zero()).sqrt()));
    }
    let mut out = alg.unit().scale(T::zero());
    for (i, &li) in distinct.iter().enumerate() {
        // Lagrange idempotent c_i = prod_{j != i} (x - l_j)/(l_i - l_j)
        let mut c = alg.unit();
        for (j, &lj) in distinct.iter().enumerate() {
            if i == j {
                continue;
            }
            let shifted = x.add(&alg.unit().scale(-lj))?;
            c = jordan_product(&c, &shifted.scale(T::one() / (li - lj)))?;
        }
        out = out.add(&c.scale(li.max(T::zero()).sqrt()))?;
    }
    Ok(out)
}

// --- derivations ------------------------------------------------------------------

#[derive(Debug)]
pub struct DerivationSpace<T: Real> {
    /// Orthonormal basis of the derivation Lie algebra, as coordinate
    /// matrices.
    pub basis: Vec<RMatrix<T>>,
    pub dimension: usize,
}

/// Solve the Leibniz system `D(e_i o e_j) = De_i o e_j + e_i o De_j` over
/// all basis pairs; the null space under the global rank rule is the
/// derivation algebra.
pub fn derivation_space<T: Real>(alg: &Arc<JordanAlgebra<T>>) -> Result<DerivationSpace<T>> {
    let d = alg.dim();
    let pairs = d * (d + 1) / 2;
    let mut m = RMatrix::<T>::zeros(pairs * d, d * d);
    let mut row_block = 0usize;
    for i in 0..d {
        for j in i..d {
            for k in 0..d {
                let row = row_block * d + k;
                // D(e_i o e_j): columns (k, s) weighted by c_{s,i,j}
                for s in 0..d {
                    m[(row, k * d + s)] += alg.c(s, i, j);
                }
                // -(De_i) o e_j: columns (r, i) weighted by c_{k,r,j}
                for r in 0..d {
                    m[(row, r * d + i)] -= alg.c(k, r, j);
                }
                // -e_i o (De_j): columns (r, j) weighted by c_{k,i,r}
                for r in 0..d {
                    m[(row, r * d + j)] -= alg.c(k, i, r);
                }
            }
            row_block += 1;
        }
    }
    let (null, _) = real_nullspace(&m)?;
    let basis = null
        .iter()
        .map(|v| RMatrix::from_fn(d, d, |r, s| v[r * d + s]))
        .collect::<Vec<_>>();
    Ok(DerivationSpace {
        dimension: basis.len(),
        basis,
    })
}

#[derive(Debug)]
pub struct KernelReport<T: Real> {
    pub basis: Vec<RVector<T>>,
    pub nullity: usize,
}

/// Relative Leibniz residual of a candidate derivation.
pub fn leibniz_residual<T: Real>(alg: &Arc<JordanAlgebra<T>>, d_matrix: &RMatrix<T>) -> T {
    let d = alg.dim();
    let norm = frobenius_real(d_matrix).max(real(1e-300));
    let mut worst = T::zero();
    for i in 0..d {
        let ei = alg.element(unit_coords(d, i)).expect("basis");
        let dei = alg.element(d_matrix * &ei.coords).expect("dims");
        for j in i..d {
            let ej = alg.element(unit_coords(d, j)).expect("basis");
            let dej = alg.element(d_matrix * &ej.coords).expect("dims");
            let lhs = d_matrix * &jordan_product(&ei, &ej).expect("same").coords;
            let rhs = &jordan_product(&dei, &ej).expect("same").coords
                + &jordan_product(&ei, &dej).expect("same").coords;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst / norm
}

/// Kernel of a derivation as a linear map on the algebra.
pub fn derivation_kernel<T: Real>(
    alg: &Arc<JordanAlgebra<T>>,
    d_matrix: &RMatrix<T>,
) -> Result<KernelReport<T>> {
    if d_matrix.nrows() != alg.dim() || d_matrix.ncols() != alg.dim() {
        return Err(Error::DimensionMismatch {
            expected: alg.dim(),
            got: d_matrix.nrows(),
        });
    }
    let residual = leibniz_residual(alg, d_matrix);
    if residual > real(tol::DERIVATION_RESIDUAL) {
        return Err(Error::NotADerivation {
            residual: approx_f64(residual),
        });
    }
    let (basis, _) = real_nullspace(d_matrix)?;
    Ok(KernelReport {
        nullity: basis.len(),
        basis,
    })
}

/// `exp(t D)` as a structural map tagged automorphism.
pub fn exp_derivation<T: Real>(
    alg: &Arc<JordanAlgebra<T>>,
    d_matrix: &RMatrix<T>,
    t: T,
) -> Result<StructuralMap<T>> {
    let residual = leibniz_residual(alg, d_matrix);
    if residual > real(tol::DERIVATION_RESIDUAL) {
        return Err(Error::NotADerivation {
            residual: approx_f64(residual),
        });
    }
    StructuralMap::automorphism(alg, real_matrix_exp(&d_matrix.map(|x| x * t)))
}

// --- automorphism constructors ----------------------------------------------------

/// Conjugation `x -> U x U^H` as a coordinate automorphism of a matrix
/// kind.
pub fn conjugation_automorphism<T: Real>(
    alg: &Arc<JordanAlgebra<T>>,
    u: &CMatrix<T>,
) -> Result<StructuralMap<T>> {
    let n = match alg.kind() {
        JordanKind::HermReal(n) | JordanKind::HermComplex(n) => n,
        _ => {
            return Err(Error::InvalidInput(
                "conjugation automorphisms need a matrix kind".into(),
            ))
        }
    };
    if u.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.nrows(),
        });
    }
    let unitary_defect = crate::linalg::max_abs(&(u.adjoint() * u - CMatrix::<T>::identity(n, n)));
    if unitary_defect > real(1e-9) {
        return Err(Error::InvalidInput(format!(
            "conjugation matrix is not unitary: defect {:.3e}",
            approx_f64(unitary_defect)
        )));
    }
    let d = alg.dim();
    let mut matrix = RMatrix::<T>::zeros(d, d);
    for k in 0..d {
        let b = alg.to_matrix(&unit_coords(d, k)).expect("matrix kind");
        let image = u * b * u.adjoint();
        let coords = alg.from_matrix(&image).expect("matrix kind");
        matrix.set_column(k, &coords);
    }
    StructuralMap::automorphism(alg, matrix)
}

/// Rotation of the vector part of a spin factor.
pub fn spin_rotation<T: Real>(
    alg: &Arc<JordanAlgebra<T>>,
    rotation: &RMatrix<T>,
) -> Result<StructuralMap<T>> {
    let n = match alg.kind() {
        JordanKind::Spin(n) => n,
        _ => return Err(Error::InvalidInput("spin rotations need a spin factor".into())),
    };
    if rotation.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rotation.nrows(),
        });
    }
    let defect = max_abs_real(&(rotation.transpose() * rotation - RMatrix::<T>::identity(n, n)));
    if defect > real(1e-9) {
        return Err(Error::InvalidInput("rotation must be orthogonal".into()));
    }
    let d = alg.dim();
    let mut matrix = RMatrix::<T>::identity(d, d);
    for i in 0..n {
        for j in 0..n {
            matrix[(i + 1, j + 1)] = rotation[(i, j)];
        }
    }
    StructuralMap::automorphism(alg, matrix)
}

// --- sampling -----------------------------------------------------------------------

/// Random element with standard normal coordinates scaled by `scale`.
pub fn random_element<T: Real>(
    alg: &Arc<JordanAlgebra<T>>,
    rng: &mut impl rand::Rng,
    scale: T,
) -> JordanElement<T> {
    let coords = crate::sampling::random_real_vector(rng, alg.dim(), scale);
    alg.element(coords).expect("dims match")
}

/// Random interior cone point `y o y + margin * 1`.
pub fn random_interior_point<T: Real>(
    alg: &Arc<JordanAlgebra<T>>,
    rng: &mut impl rand::Rng,
) -> JordanElement<T> {
    let y = random_element(alg, rng, T::one());
    let sq = jordan_product(&y, &y).expect("same algebra");
    let margin = real::<T>(0.05) * T::one().max(sq.coords.norm());
    sq.add(&alg.unit().scale(margin)).expect("same algebra")
}
