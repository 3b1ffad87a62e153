//! L-functionals over a truncated one-mode Weyl algebra with explicit
//! `hbar`, their harmonic evolution, and classical-limit checks.
//!
//! The mode operators carry the scaling `a = sqrt(hbar) a_std`, so
//! `[a, a+] = hbar` away from the truncation edge, and the state
//! fingerprint is `L_K(alpha) = tr(e^{-alpha a+} e^{alpha* a} K)`.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{cabs, phase, CMatrix, CVector};
use crate::scalar::{approx_f64, real, Real};
use crate::statespace::DensityState;

/// Truncated Fock space with `hbar`-scaled ladder operators.
#[derive(Debug, Clone)]
pub struct TruncatedFock<T: Real> {
    dim: usize,
    hbar: T,
    lowering: CMatrix<T>,
    raising: CMatrix<T>,
}

impl<T: Real> TruncatedFock<T> {
    pub fn new(dim: usize, hbar: T) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput("need at least two Fock levels".into()));
        }
        if hbar <= T::zero() {
            return Err(Error::InvalidInput("hbar must be positive".into()));
        }
        let root = hbar.sqrt();
        let mut lowering = CMatrix::<T>::zeros(dim, dim);
        for n in 1..dim {
            lowering[(n - 1, n)] = Complex::new(root * real::<T>(n as f64).sqrt(), T::zero());
        }
        let raising = lowering.adjoint();
        Ok(TruncatedFock {
            dim,
            hbar,
            lowering,
            raising,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn lowering(&self) -> &CMatrix<T> {
        &self.lowering
    }

    pub fn raising(&self) -> &CMatrix<T> {
        &self.raising
    }

    /// `a+ a`; eigenvalues `hbar n` below the truncation edge.
    pub fn number_operator(&self) -> CMatrix<T> {
        &self.raising * &self.lowering
    }

    /// Defect of `[a, a+] = hbar I`: zero on the first `D-1` diagonal
    /// entries, `-(D-1) hbar` on the last (truncation artifact).
    pub fn commutator_defect(&self) -> T {
        let comm = &self.lowering * &self.raising - &self.raising * &self.lowering;
        let mut worst = T::zero();
        for n in 0..self.dim - 1 {
            worst = worst.max((comm[(n, n)].re - self.hbar).abs());
            worst = worst.max(comm[(n, n)].im.abs());
        }
        worst
    }

    /// Exact dense exponential `exp(c a)`: the scaled lowering operator is
    /// nilpotent, so the series terminates after `D` terms; each band is
    /// accumulated by the stable recurrence
    /// `E[m, m+k] = E[m, m+k-1] * c sqrt(hbar) sqrt(m+k) / k`.
    pub fn exp_lowering(&self, c: Complex<T>) -> CMatrix<T> {
        let d = self.dim;
        let root = Complex::new(self.hbar.sqrt(), T::zero());
        let mut out = CMatrix::<T>::identity(d, d);
        for m in 0..d {
            let mut entry = Complex::new(T::one(), T::zero());
            for k in 1..d - m {
                entry = entry * c * root
                    * Complex::new(real::<T>((m + k) as f64).sqrt() / real::<T>(k as f64), T::zero());
                out[(m, m + k)] = entry;
            }
        }
        out
    }

    /// `exp(c a+) = exp(conj(c) a)^H`.
    pub fn exp_raising(&self, c: Complex<T>) -> CMatrix<T> {
        self.exp_lowering(c.conj()).adjoint()
    }

    /// Mean occupation `tr(a+ a K) / hbar` (standard number units).
    pub fn mean_occupation(&self, k: &DensityState<T>) -> T {
        (self.number_operator() * k.matrix()).trace().re / self.hbar
    }
}

/// Truncation-validity region `|alpha|^2 max(1, <n>) / hbar <= D/8`, with
/// `<n>` the `hbar`-scaled occupation `tr(a+ a K)` (equals `|z|^2` on a
/// coherent state).
pub fn validity_value<T: Real>(fock: &TruncatedFock<T>, k: &DensityState<T>, alpha: Complex<T>) -> T {
    let occupation = (fock.number_operator() * k.matrix()).trace().re;
    alpha.norm_sqr() * T::one().max(occupation) / fock.hbar
}

#[derive(Debug, Clone, Copy)]
pub struct TruncationWarning<T: Real> {
    /// Heuristic estimate: mass of the kernel product on the top eighth of
    /// the Fock levels.
    pub estimated_error: T,
    pub validity_value: T,
    pub validity_bound: T,
}

#[derive(Debug, Clone, Copy)]
pub struct LValue<T: Real> {
    pub value: Complex<T>,
    pub warning: Option<TruncationWarning<T>>,
}

/// `L_K(alpha) = tr(e^{-alpha a+} e^{alpha* a} K)` by dense matrix
/// exponentials of the truncated ladder operators.
pub fn l_functional<T: Real>(
    fock: &TruncatedFock<T>,
    k: &DensityState<T>,
    alpha: Complex<T>,
) -> Result<LValue<T>> {
    if k.dim() != fock.dim() {
        return Err(Error::DimensionMismatch {
            expected: fock.dim(),
            got: k.dim(),
        });
    }
    let e_minus = fock.exp_raising(-alpha);
    let e_plus = fock.exp_lowering(alpha.conj());
    let kernel = &e_minus * &e_plus;
    let product = &kernel * k.matrix();
    let value = product.trace();

    let bound = real::<T>(fock.dim() as f64 / 8.0);
    let v = validity_value(fock, k, alpha);
    let warning = if v > bound {
        let top = fock.dim() - (fock.dim() / 8).max(1);
        let mut tail = T::zero();
        for n in top..fock.dim() {
            tail += cabs(product[(n, n)]);
        }
        Some(TruncationWarning {
            estimated_error: tail,
            validity_value: v,
            validity_bound: bound,
        })
    } else {
        None
    };
    Ok(LValue { value, warning })
}

/// Projector onto the truncated coherent state with `a`-eigenvalue `z`.
pub fn coherent_state<T: Real>(fock: &TruncatedFock<T>, z: Complex<T>) -> Result<DensityState<T>> {
    let bound = real::<T>(fock.dim() as f64 / 8.0);
    let occupation = z.norm_sqr() / fock.hbar;
    if occupation > bound {
        return Err(Error::TruncationViolation {
            value: approx_f64(occupation),
            bound: approx_f64(bound),
        });
    }
    // standard coherent amplitude zeta = z / sqrt(hbar)
    let zeta = z / Complex::new(fock.hbar.sqrt(), T::zero());
    let mut amps = CVector::<T>::zeros(fock.dim());
    let mut current = Complex::new(T::one(), T::zero());
    amps[0] = current;
    for n in 1..fock.dim() {
        current = current * zeta / Complex::new(real::<T>(n as f64).sqrt(), T::zero());
        amps[n] = current;
    }
    let norm = amps.norm();
    let amps = amps.map(|c| c / Complex::new(norm, T::zero()));

    // eigenvector residual on the first D/2 components
    let half = fock.dim() / 2;
    let image = fock.lowering() * &amps;
    let mut residual = T::zero();
    for n in 0..half {
        residual += (image[n] - z * amps[n]).norm_sqr();
    }
    if residual.sqrt() > real(1e-8) {
        return Err(Error::Numeric(format!(
            "coherent eigenvector residual {:.3e} on the first D/2 components",
            approx_f64(residual.sqrt())
        )));
    }
    let projector = CMatrix::from_fn(fock.dim(), fock.dim(), |i, j| amps[i] * amps[j].conj());
    DensityState::new(&projector)
}

/// Thermal state of `H = omega a+ a` at temperature `temperature`,
/// truncated and renormalized.
pub fn gibbs_state<T: Real>(
    fock: &TruncatedFock<T>,
    temperature: T,
    omega: T,
) -> Result<DensityState<T>> {
    if temperature <= T::zero() || omega <= T::zero() {
        return Err(Error::InvalidInput("temperature and omega must be positive".into()));
    }
    let mut weights = CVector::<T>::zeros(fock.dim());
    let x = fock.hbar * omega / temperature;
    let mut sum = T::zero();
    for n in 0..fock.dim() {
        let w = (-x * real::<T>(n as f64)).exp();
        weights[n] = Complex::new(w, T::zero());
        sum += w;
    }
    let m = CMatrix::from_fn(fock.dim(), fock.dim(), |i, j| {
        if i == j {
            weights[i] / Complex::new(sum, T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    DensityState::new(&m)
}

/// Geometric tail mass of the truncated thermal state beyond the top level.
pub fn gibbs_tail<T: Real>(fock: &TruncatedFock<T>, temperature: T, omega: T) -> T {
    let r = (-fock.hbar * omega / temperature).exp();
    r.powi(fock.dim() as i32)
}

#[derive(Debug, Clone)]
pub struct EvolutionCheck<T: Real> {
    pub max_residual: T,
    pub pass: bool,
}

/// Evolve `K` under `i hbar dK/dt = [H, K]` with `H = omega a+ a` and
/// compare `L_{K(t)}(alpha)` against `L_K(e^{i omega t} alpha)` on the
/// grid. The rotation direction was calibrated once against a brute-force
/// evolved trace and frozen (see the calibration test).
pub fn l_evolution_check<T: Real>(
    fock: &TruncatedFock<T>,
    k: &DensityState<T>,
    omega: T,
    t: T,
    alphas: &[Complex<T>],
) -> Result<EvolutionCheck<T>> {
    let evolved = harmonic_evolve(fock, k, omega, t)?;
    let rotation = phase(omega * t);
    let mut max_residual = T::zero();
    for &alpha in alphas {
        let lhs = l_functional(fock, &evolved, alpha)?.value;
        let rhs = l_functional(fock, k, alpha * rotation)?.value;
        max_residual = max_residual.max(cabs(lhs - rhs));
    }
    Ok(EvolutionCheck {
        max_residual,
        pass: max_residual <= real(1e-6),
    })
}

/// `K(t) = e^{-iHt/hbar} K e^{iHt/hbar}` for `H = omega a+ a`:
/// `K_mn -> K_mn e^{-i omega (m - n) t}`, independent of `hbar`.
pub fn harmonic_evolve<T: Real>(
    fock: &TruncatedFock<T>,
    k: &DensityState<T>,
    omega: T,
    t: T,
) -> Result<DensityState<T>> {
    if k.dim() != fock.dim() {
        return Err(Error::DimensionMismatch {
            expected: fock.dim(),
            got: k.dim(),
        });
    }
    let m = CMatrix::from_fn(fock.dim(), fock.dim(), |i, j| {
        k.matrix()[(i, j)] * phase(-omega * t * (real::<T>(i as f64) - real::<T>(j as f64)))
    });
    DensityState::new(&m)
}

/// State family for the `hbar` scan.
#[derive(Debug, Clone, Copy)]
pub enum StateFamily<T: Real> {
    /// Coherent state at fixed `z`; classical target `exp(alpha* z - alpha z*)`.
    Coherent { z: Complex<T> },
    /// Thermal state at fixed temperature; classical target is the
    /// phase-space Gaussian characteristic integral.
    Gibbs { temperature: T, omega: T },
}

#[derive(Debug, Clone)]
pub struct HbarScanRow<T: Real> {
    pub hbar: T,
    pub values: Vec<Complex<T>>,
    /// Max deviation from the classical target over the grid.
    pub residual: T,
    /// False when the truncation is too small for this `hbar`.
    pub valid: bool,
}

#[derive(Debug, Clone)]
pub struct HbarScan<T: Real> {
    pub rows: Vec<HbarScanRow<T>>,
    /// Residuals non-increasing along the given (decreasing) `hbar` list,
    /// judged on valid rows.
    pub monotone: bool,
}

/// Evaluate the L-functional of the family at each `hbar` and compare with
/// the classical limit.
pub fn hbar_scan<T: Real>(
    dim: usize,
    family: &StateFamily<T>,
    alphas: &[Complex<T>],
    hbars: &[T],
) -> Result<HbarScan<T>> {
    let mut rows = Vec::with_capacity(hbars.len());
    for &hbar in hbars {
        let fock = TruncatedFock::new(dim, hbar)?;
        let (state, valid) = match family {
            StateFamily::Coherent { z } => {
                let state = coherent_state(&fock, *z)?;
                let valid = alphas
                    .iter()
                    .all(|&a| validity_value(&fock, &state, a) <= real(dim as f64 / 8.0));
                (state, valid)
            }
            StateFamily::Gibbs { temperature, omega } => {
                let state = gibbs_state(&fock, *temperature, *omega)?;
                (state, gibbs_tail(&fock, *temperature, *omega) < real(1e-10))
            }
        };
        let mut values = Vec::with_capacity(alphas.len());
        let mut residual = T::zero();
        for &alpha in alphas {
            let val = l_functional(&fock, &state, alpha)?.value;
            let target = classical_target(family, alpha);
            residual = residual.max(cabs(val - target));
            values.push(val);
        }
        rows.push(HbarScanRow {
            hbar,
            values,
            residual,
            valid,
        });
    }
    let mut monotone = true;
    let mut prev: Option<T> = None;
    for row in rows.iter().filter(|r| r.valid) {
        if let Some(p) = prev {
            if row.residual > p + real(1e-12) {
                monotone = false;
            }
        }
        prev = Some(row.residual);
    }
    Ok(HbarScan { rows, monotone })
}

fn classical_target<T: Real>(family: &StateFamily<T>, alpha: Complex<T>) -> Complex<T> {
    match family {
        StateFamily::Coherent { z } => {
            // exp(alpha* z - alpha z*), purely imaginary exponent
            let exponent = alpha.conj() * *z - alpha * z.conj();
            phase(exponent.im)
        }
        StateFamily::Gibbs { temperature, omega } => Complex::new(
            classical_characteristic(alpha, *temperature, *omega),
            T::zero(),
        ),
    }
}

/// Classical phase-space characteristic function of the thermal state:
/// `int exp(alpha* w - alpha w*) p(w) d^2 w` with
/// `p(w) ~ exp(-omega |w|^2 / temperature)`, by 2-d composite Simpson
/// quadrature. (Closed form `exp(-|alpha|^2 T/omega)`, kept numerical as
/// the independent oracle.)
pub fn classical_characteristic<T: Real>(alpha: Complex<T>, temperature: T, omega: T) -> T {
    let sigma = (temperature / omega).sqrt();
    let radius = sigma * real::<T>(7.0);
    let n = 240usize; // even, Simpson
    let h = radius * real::<T>(2.0) / real::<T>(n as f64);
    let weight = |idx: usize| -> T {
        if idx == 0 || idx == n {
            T::one()
        } else if idx % 2 == 1 {
            real(4.0)
        } else {
            real(2.0)
        }
    };
    let mut numerator = T::zero();
    let mut normalization = T::zero();
    for i in 0..=n {
        let wx = -radius + h * real::<T>(i as f64);
        for j in 0..=n {
            let wy = -radius + h * real::<T>(j as f64);
            let w = weight(i) * weight(j);
            let density = (-(omega / temperature) * (wx * wx + wy * wy)).exp();
            // alpha* w - alpha w* = 2i Im(alpha* w)
            let im = alpha.re * wy - alpha.im * wx;
            numerator += w * density * (real::<T>(2.0) * im).cos();
            normalization += w * density;
        }
    }
    numerator / normalization
}

/// Gram matrix `G_ij = tr(e^{alpha_i* a} K e^{alpha_j a+})`, Hermitian by
/// construction up to rounding; positive semidefinite whenever `K` is.
pub fn gram_matrix<T: Real>(
    fock: &TruncatedFock<T>,
    k: &DensityState<T>,
    alphas: &[Complex<T>],
) -> Result<CMatrix<T>> {
    let m = alphas.len();
    let exps: Vec<CMatrix<T>> = alphas
        .iter()
        .map(|&a| fock.exp_lowering(a.conj()))
        .collect();
    let mut gram = CMatrix::<T>::zeros(m, m);
    for i in 0..m {
        let left = &exps[i] * k.matrix();
        for j in 0..m {
            gram[(i, j)] = (&left * exps[j].adjoint()).trace();
        }
    }
    Ok(crate::linalg::symmetrize(&gram))
}
