//! Robust zero modes, the projections `P` and `P'`, Monte Carlo decoherence
//! under random adiabatic Hamiltonians, Born probabilities, joint
//! distributions, and entropy-based equilibrium states.
//!
//! In the `H` eigenbasis with spectral projectors `P_n` of dimension `d_n`:
//! the Cesaro projection `P` keeps all kernel components (whole degenerate
//! blocks), while `P'` projects onto `span{f(H)}`, realized as the block
//! trace part `sum_n (tr(P_n K)/d_n) P_n`.

use nalgebra::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    adaptive_simpson, frobenius, hermitian_eigen, max_abs, phase, validate_hermitian, CMatrix,
    RVector,
};
use crate::sampling::{random_hermitian, stream_rng};
use crate::scalar::{approx_f64, real, Real};
use crate::statespace::{
    generator_spectrum, rk4_evolve_with, DensityState, Generator, Observable, SpectralData,
};
use crate::tol;

// ---------------------------------------------------------------------------
// Cesaro projection P and the robust projection P'
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub enum CesaroMode<T> {
    /// Exact projection: zero every eigencomponent with nonzero eigenvalue.
    Analytic,
    /// Quadrature average `(1/T) int_0^T sigma_A(t) x dt`.
    Numeric { horizon: T },
}

#[derive(Debug, Clone)]
pub struct CesaroProjection<T: Real> {
    pub matrix: CMatrix<T>,
    /// Set when nonzero eigenvalue differences fell below the grouping
    /// threshold and were grouped as zero.
    pub grouped_near_degenerate: bool,
}

/// Time average of the flow applied to a Hermitian `x`.
///
/// Analytic mode keeps exactly the degenerate blocks of the `H` eigenbasis;
/// numeric mode approaches it with residual `<= C/T`.
pub fn cesaro_project<T: Real>(
    g: &Generator<T>,
    x: &CMatrix<T>,
    mode: CesaroMode<T>,
) -> Result<CesaroProjection<T>> {
    let x = validate_hermitian(x)?;
    if x.nrows() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: x.nrows(),
        });
    }
    let spec = generator_spectrum(g);
    let tilde = spec.basis.adjoint() * &x * &spec.basis;
    let d = g.dim();
    let averaged = match mode {
        CesaroMode::Analytic => CMatrix::from_fn(d, d, |m, n| {
            if spec.level_of[m] == spec.level_of[n] {
                tilde[(m, n)]
            } else {
                Complex::new(T::zero(), T::zero())
            }
        }),
        CesaroMode::Numeric { horizon } => {
            if horizon <= T::zero() {
                return Err(Error::InvalidInput("averaging horizon must be positive".into()));
            }
            let weights = simpson_phase_averages(&spec, horizon);
            CMatrix::from_fn(d, d, |m, n| tilde[(m, n)] * weights[(m, n)])
        }
    };
    Ok(CesaroProjection {
        matrix: &spec.basis * averaged * spec.basis.adjoint(),
        grouped_near_degenerate: near_degenerate_grouping(&spec),
    })
}

/// Composite-Simpson average of `e^{i(E_m - E_n)t}` over `[0, T]`,
/// entrywise. The node spacing resolves the fastest phase.
fn simpson_phase_averages<T: Real>(spec: &SpectralData<T>, horizon: T) -> CMatrix<T> {
    let d = spec.dim();
    let norm = spec
        .energies
        .iter()
        .fold(T::zero(), |acc, e| acc.max(e.abs()));
    let dt_target = real::<T>(0.025) / T::one().max(norm + norm);
    let mut intervals = (horizon / dt_target)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX)
        .clamp(8, 2_000_000);
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let dt = horizon / real(intervals as f64);
    let mut acc = CMatrix::<T>::zeros(d, d);
    for node in 0..=intervals {
        let w = if node == 0 || node == intervals {
            T::one()
        } else if node % 2 == 1 {
            real(4.0)
        } else {
            real(2.0)
        };
        let t = dt * real(node as f64);
        for m in 0..d {
            for n in 0..d {
                acc[(m, n)] += phase((spec.energies[m] - spec.energies[n]) * t).scale(w);
            }
        }
    }
    let third = dt / real(3.0);
    acc.map(|z| z.scale(third / horizon))
}

fn near_degenerate_grouping<T: Real>(spec: &SpectralData<T>) -> bool {
    let norm = spec
        .energies
        .iter()
        .fold(T::zero(), |acc, e| acc.max(e.abs()));
    let exact = real::<T>(tol::HERMITICITY) * T::one().max(norm);
    let mut start = 0;
    for (level, &deg) in spec.degeneracies.iter().enumerate() {
        let _ = level;
        let spread = spec.energies[start + deg - 1] - spec.energies[start];
        if spread > exact {
            return true;
        }
        start += deg;
    }
    false
}

/// `P' K`: block trace part in the `H` eigenbasis,
/// `sum_n (tr(P_n K)/d_n) P_n` -- the projection onto `span{f(H)}`.
pub fn robust_projector<T: Real>(g: &Generator<T>, k: &DensityState<T>) -> Result<DensityState<T>> {
    if k.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: k.dim(),
        });
    }
    let spec = generator_spectrum(g);
    let tilde = spec.basis.adjoint() * k.matrix() * &spec.basis;
    let projected = block_trace_part(&spec, &tilde);
    let m = &spec.basis * projected * spec.basis.adjoint();
    if k.is_normalized() {
        DensityState::new(&m)
    } else {
        DensityState::new_cone(&m)
    }
}

/// Block trace part in eigenbasis coordinates.
fn block_trace_part<T: Real>(spec: &SpectralData<T>, tilde: &CMatrix<T>) -> CMatrix<T> {
    let d = spec.dim();
    let mut out = CMatrix::<T>::zeros(d, d);
    let mut start = 0;
    for &deg in &spec.degeneracies {
        let mut tr = T::zero();
        for i in start..start + deg {
            tr += tilde[(i, i)].re;
        }
        let share = tr / real(deg as f64);
        for i in start..start + deg {
            out[(i, i)] = Complex::new(share, T::zero());
        }
        start += deg;
    }
    out
}

// ---------------------------------------------------------------------------
// Robustness of zero modes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RobustnessReport<T: Real> {
    pub robust: bool,
    /// Worst ratio `d(eps) gap / (||x|| eps ||V||)` over directions and both
    /// tested perturbation sizes; robust means `score <= 10`.
    pub score: T,
    /// Smallest nonzero |eigenvalue| of the generator action.
    pub gap: T,
}

/// Perturb the generator in `n_dirs` random Hermitian directions and test
/// whether the kernel element `x` survives with linearly shrinking distance.
pub fn robustness_test<T: Real>(
    g: &Generator<T>,
    x: &CMatrix<T>,
    n_dirs: usize,
    eps: T,
    seed: u64,
) -> Result<RobustnessReport<T>> {
    let x = validate_hermitian(x)?;
    let x_norm = frobenius(&x);
    let residual = frobenius(&g.apply(&x));
    if residual > real::<T>(tol::KERNEL_RESIDUAL) * T::one().max(x_norm) {
        return Err(Error::NotInKernel {
            residual: approx_f64(residual),
        });
    }
    let spec = generator_spectrum(g);
    let mut gap = T::zero();
    for i in 0..spec.energy_levels.len() {
        for j in (i + 1)..spec.energy_levels.len() {
            let diff = (spec.energy_levels[i] - spec.energy_levels[j]).abs();
            gap = if gap == T::zero() { diff } else { gap.min(diff) };
        }
    }
    if gap == T::zero() {
        // The action vanishes identically: every element stays in the kernel.
        return Ok(RobustnessReport {
            robust: true,
            score: T::zero(),
            gap,
        });
    }
    let mut score = T::zero();
    for dir in 0..n_dirs {
        let mut rng = stream_rng(seed, dir as u64);
        let v = random_hermitian::<T>(&mut rng, g.dim(), T::one());
        let v_norm = crate::linalg::hermitian_spectral_norm(&v);
        for factor in [T::one(), real(0.5)] {
            let e = eps * factor;
            let perturbed = Generator::new(&(g.hamiltonian() + v.map(|z| z.scale(e))))?;
            let pspec = generator_spectrum(&perturbed);
            let tilde = pspec.basis.adjoint() * &x * &pspec.basis;
            let mut dist_sq = T::zero();
            for m in 0..g.dim() {
                for n in 0..g.dim() {
                    if pspec.level_of[m] != pspec.level_of[n] {
                        dist_sq += tilde[(m, n)].norm_sqr();
                    }
                }
            }
            let dist = dist_sq.sqrt();
            let ratio = dist * gap / (x_norm * e * v_norm);
            score = score.max(ratio);
        }
    }
    Ok(RobustnessReport {
        robust: score <= real(10.0),
        score,
        gap,
    })
}

// ---------------------------------------------------------------------------
// Born probabilities
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BornEntry<T: Real> {
    /// Value of the observable on the mode, `a(z_k)`.
    pub label: T,
    /// Pure robust zero mode `z_k` (normalized spectral projector).
    pub mode: DensityState<T>,
    pub probability: T,
}

#[derive(Debug, Clone)]
pub struct ProbabilityTable<T: Real> {
    pub entries: Vec<BornEntry<T>>,
}

impl<T: Real> ProbabilityTable<T> {
    fn validated(entries: Vec<BornEntry<T>>) -> Result<Self> {
        let mut sum = T::zero();
        for e in &entries {
            if e.probability < real(tol::PSD_MIN_EIGENVALUE) {
                return Err(Error::NotPositive {
                    min_eigenvalue: approx_f64(e.probability),
                });
            }
            sum += e.probability;
        }
        if (sum - T::one()).abs() > real(1e-10) {
            return Err(Error::Numeric(format!(
                "probabilities sum to {:.17}",
                approx_f64(sum)
            )));
        }
        Ok(ProbabilityTable { entries })
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.probability).collect()
    }

    pub fn labels(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.label).collect()
    }

    /// `P' x = sum p_k z_k` reassembled from the table.
    pub fn barycenter(&self) -> CMatrix<T> {
        let d = self.entries[0].mode.dim();
        let mut out = CMatrix::<T>::zeros(d, d);
        for e in &self.entries {
            out += e.mode.matrix().map(|z| z.scale(e.probability));
        }
        out
    }
}

/// Born probabilities of the energy levels: `z_k = P_k/d_k`,
/// `p_k = tr(P_k K)`, labels `E_k`.
pub fn born_probabilities<T: Real>(
    g: &Generator<T>,
    k: &DensityState<T>,
) -> Result<ProbabilityTable<T>> {
    if k.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: k.dim(),
        });
    }
    let spec = generator_spectrum(g);
    born_from_spectrum(&spec, k, None)
}

/// Born probabilities labeled by a commuting observable's functional,
/// `a(z_k) = tr(A z_k)`. Entries whose labels agree within
/// [`tol::FUNCTIONAL_EQUALITY`] are merged by summing probabilities; the
/// merged mode is the probability-weighted mixture.
pub fn born_probabilities_for<T: Real>(
    obs: &Observable<T>,
    k: &DensityState<T>,
) -> Result<ProbabilityTable<T>> {
    if k.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            got: k.dim(),
        });
    }
    let spec = generator_spectrum(obs.generator());
    born_from_spectrum(&spec, k, Some(obs.functional_matrix()))
}

fn born_from_spectrum<T: Real>(
    spec: &SpectralData<T>,
    k: &DensityState<T>,
    functional: Option<&CMatrix<T>>,
) -> Result<ProbabilityTable<T>> {
    let mut raw = Vec::with_capacity(spec.energy_levels.len());
    for (level, &deg) in spec.degeneracies.iter().enumerate() {
        let p_n = spec.level_projector(level);
        let share = real::<T>(1.0 / deg as f64);
        let mode = DensityState::new(&p_n.map(|z| z.scale(share)))?;
        let probability = (&p_n * k.matrix()).trace().re;
        let label = match functional {
            Some(a) => (a * mode.matrix()).trace().re,
            None => spec.energy_levels[level],
        };
        raw.push(BornEntry {
            label,
            mode,
            probability,
        });
    }
    if functional.is_some() {
        raw = merge_by_label(raw)?;
    }
    ProbabilityTable::validated(raw)
}

fn merge_by_label<T: Real>(mut entries: Vec<BornEntry<T>>) -> Result<Vec<BornEntry<T>>> {
    entries.sort_by(|a, b| a.label.partial_cmp(&b.label).expect("labels comparable"));
    let eps = real::<T>(tol::FUNCTIONAL_EQUALITY);
    let mut merged: Vec<BornEntry<T>> = Vec::new();
    for e in entries {
        match merged.last_mut() {
            Some(last) if (last.label - e.label).abs() <= eps => {
                let total = last.probability + e.probability;
                let (wa, wb) = if total > real(1e-14) {
                    (last.probability / total, e.probability / total)
                } else {
                    (real(0.5), real(0.5))
                };
                let mixed = last.mode.matrix().map(|z| z.scale(wa))
                    + e.mode.matrix().map(|z| z.scale(wb));
                last.mode = DensityState::new(&mixed)?;
                last.probability = total;
            }
            _ => merged.push(e),
        }
    }
    Ok(merged)
}

// ---------------------------------------------------------------------------
// Adiabatic families and the decoherence ensemble
// ---------------------------------------------------------------------------

/// Loop profile `s(g)` with `s(0) = s(g0) = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub enum LoopProfile {
    /// `s(g) = sin(pi g / g0)`.
    #[default]
    SinePi,
}

impl LoopProfile {
    pub fn value<T: Real>(&self, g: T, g0: T) -> T {
        match self {
            LoopProfile::SinePi => (T::pi() * g / g0).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdiabaticParams<T: Real> {
    /// Loop endpoint `g0`.
    pub g0: T,
    /// Adiabatic rate `a`; the loop takes wall time `g0 / a`.
    pub rate: T,
    pub profile: LoopProfile,
}

/// Smooth family `H(g) = H + s(g) V` with `H(0) = H(g0) = H`.
#[derive(Debug, Clone)]
pub struct AdiabaticFamily<T: Real> {
    generator: Generator<T>,
    perturbation: CMatrix<T>,
    params: AdiabaticParams<T>,
}

impl<T: Real> AdiabaticFamily<T> {
    pub fn new(
        generator: Generator<T>,
        perturbation: &CMatrix<T>,
        params: AdiabaticParams<T>,
    ) -> Result<Self> {
        let perturbation = validate_hermitian(perturbation)?;
        if perturbation.nrows() != generator.dim() {
            return Err(Error::DimensionMismatch {
                expected: generator.dim(),
                got: perturbation.nrows(),
            });
        }
        if params.g0 <= T::zero() || params.rate <= T::zero() {
            return Err(Error::InvalidInput("g0 and rate must be positive".into()));
        }
        Ok(AdiabaticFamily {
            generator,
            perturbation,
            params,
        })
    }

    pub fn params(&self) -> &AdiabaticParams<T> {
        &self.params
    }

    pub fn hamiltonian_at(&self, g: T) -> CMatrix<T> {
        let s = self.params.profile.value(g, self.params.g0);
        self.generator.hamiltonian() + self.perturbation.map(|z| z.scale(s))
    }

    fn branch_energies(&self, g: T) -> RVector<T> {
        hermitian_eigen(&self.hamiltonian_at(g)).0
    }

    /// Reject the family if adjacent eigenbranches come closer than the
    /// crossing gap anywhere on `[0, g_end]`. Local minima of the gap on a
    /// coarse scan are refined by ternary search, so transversal crossings
    /// between scan nodes are caught while ordinary avoided crossings pass.
    fn crossing_check(&self, g_end: T, scan_points: usize) -> Result<()> {
        let n = scan_points.max(5);
        let min_gap = |g: T| -> T {
            let e = self.branch_energies(g);
            let mut m = T::max_value().unwrap_or(T::one());
            for i in 1..e.len() {
                m = m.min(e[i] - e[i - 1]);
            }
            m
        };
        let threshold = real::<T>(tol::BRANCH_CROSSING_GAP);
        let step = g_end / real((n - 1) as f64);
        let samples: Vec<(T, T)> = (0..n)
            .map(|s| {
                let g = step * real(s as f64);
                (g, min_gap(g))
            })
            .collect();
        for &(g, gap) in &samples {
            if gap < threshold {
                return Err(Error::EigenvalueCrossing {
                    g: approx_f64(g),
                    gap: approx_f64(gap),
                });
            }
        }
        for i in 0..n {
            let is_local_min = (i == 0 || samples[i].1 <= samples[i - 1].1)
                && (i == n - 1 || samples[i].1 <= samples[i + 1].1);
            if !is_local_min {
                continue;
            }
            let mut lo = if i == 0 { T::zero() } else { samples[i - 1].0 };
            let mut hi = if i == n - 1 { g_end } else { samples[i + 1].0 };
            for _ in 0..60 {
                let third = (hi - lo) / real(3.0);
                let a = lo + third;
                let b = hi - third;
                if min_gap(a) < min_gap(b) {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            let g_min = (lo + hi) * real(0.5);
            let gap = min_gap(g_min);
            if gap < threshold {
                return Err(Error::EigenvalueCrossing {
                    g: approx_f64(g_min),
                    gap: approx_f64(gap),
                });
            }
        }
        Ok(())
    }

    /// Accumulated per-branch phase integrals `C_n(g_end) = int_0^{g_end} E_n`.
    fn branch_phase_integrals(&self, g_end: T) -> Vec<T> {
        let d = self.generator.dim();
        (0..d)
            .map(|n| {
                adaptive_simpson(
                    &|g: T| self.branch_energies(g)[n],
                    T::zero(),
                    g_end,
                    real(1e-12),
                )
            })
            .collect()
    }
}

/// Adiabatic evolution: diagonal entries in the instantaneous eigenbasis
/// are unchanged, off-diagonal entries pick up
/// `exp(i (C_m - C_n)(g) / a)` following the equation-of-motion sign.
/// Past the loop end the constant-`H` phases continue.
pub fn adiabatic_evolve<T: Real>(
    fam: &AdiabaticFamily<T>,
    k0: &DensityState<T>,
    t_final: T,
) -> Result<DensityState<T>> {
    if k0.dim() != fam.generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: fam.generator.dim(),
            got: k0.dim(),
        });
    }
    if t_final < T::zero() {
        return Err(Error::InvalidInput("adiabatic evolution needs t >= 0".into()));
    }
    let g_end = (fam.params.rate * t_final).min(fam.params.g0);
    fam.crossing_check(g_end.max(real(1e-12)), 129)?;
    let leftover = (t_final - fam.params.g0 / fam.params.rate).max(T::zero());

    let (e0, u0) = hermitian_eigen(fam.generator.hamiltonian());
    let (_, u_end) = hermitian_eigen(&fam.hamiltonian_at(g_end));
    let u_end = align_columns(&u0, &u_end);
    let c = fam.branch_phase_integrals(g_end);

    let tilde = u0.adjoint() * k0.matrix() * &u0;
    let d = fam.generator.dim();
    let evolved = CMatrix::from_fn(d, d, |m, n| {
        if m == n {
            tilde[(m, n)]
        } else {
            let theta = (c[m] - c[n]) / fam.params.rate + (e0[m] - e0[n]) * leftover;
            tilde[(m, n)] * phase(theta)
        }
    });
    DensityState::new(&(&u_end * evolved * u_end.adjoint()))
}

/// Rephase (and reorder-check) eigenvector columns so overlaps with the
/// reference basis are real positive. Branch order is already fixed by
/// energy sorting under the no-crossing precondition.
fn align_columns<T: Real>(reference: &CMatrix<T>, u: &CMatrix<T>) -> CMatrix<T> {
    let d = u.ncols();
    let mut out = u.clone();
    for j in 0..d {
        let overlap = reference.column(j).dotc(&u.column(j));
        let a = crate::linalg::cabs(overlap);
        if a > real(1e-12) {
            let correction = overlap.conj() / Complex::new(a, T::zero());
            for i in 0..d {
                out[(i, j)] *= correction;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleMode {
    /// Adiabatic phase formula per path.
    AdiabaticFormula,
    /// Full RK4 integration of the time-dependent equation of motion.
    FullOde,
}

#[derive(Debug, Clone, Copy)]
pub struct EnsembleSpec<T: Real> {
    pub n_paths: usize,
    pub perturbation_scale: T,
    pub master_seed: u64,
    pub mode: EnsembleMode,
    /// Run paths on the current thread instead of the rayon pool. Results
    /// are identical either way; aggregation is indexed and order-fixed.
    pub serial: bool,
}

#[derive(Debug, Clone)]
pub struct EnsembleReport<T: Real> {
    /// Ensemble-averaged state in the original basis.
    pub mean: CMatrix<T>,
    /// The same matrix in the `H` eigenbasis. In formula mode its diagonal
    /// equals the initial diagonal bit-for-bit.
    pub mean_eigenbasis: CMatrix<T>,
    /// Mean |entry| over off-diagonal positions of `mean_eigenbasis`.
    pub mean_offdiag_abs: T,
    /// Frobenius distance from `mean` to `P' K0`.
    pub distance_to_projection: T,
    pub n_paths: usize,
    pub rate: T,
    pub master_seed: u64,
}

/// Average the adiabatic flow over Gaussian Hermitian perturbations
/// `V ~ scale * GUE`, each path seeded from `(master_seed, path_index)`.
pub fn ensemble_average<T: Real>(
    generator: &Generator<T>,
    params: &AdiabaticParams<T>,
    spec: &EnsembleSpec<T>,
    k0: &DensityState<T>,
) -> Result<EnsembleReport<T>> {
    if spec.n_paths == 0 {
        return Err(Error::InvalidInput("n_paths must be at least 1".into()));
    }
    if spec.perturbation_scale <= T::zero() {
        return Err(Error::InvalidInput("perturbation scale must be positive".into()));
    }
    if k0.dim() != generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            got: k0.dim(),
        });
    }
    let d = generator.dim();
    let (_, u0) = hermitian_eigen(generator.hamiltonian());
    let tilde0 = u0.adjoint() * k0.matrix() * &u0;
    let t_final = params.g0 / params.rate;

    let run_path = |path: usize| -> Result<CMatrix<T>> {
        let mut rng = stream_rng(spec.master_seed, path as u64);
        let v = random_hermitian::<T>(&mut rng, d, spec.perturbation_scale);
        let fam = AdiabaticFamily::new(generator.clone(), &v, *params)?;
        fam.crossing_check(params.g0, 129).map_err(|e| match e {
            Error::EigenvalueCrossing { g, gap } => Error::Numeric(format!(
                "path {path}: eigenvalue crossing at g = {g:.6} (gap {gap:.3e})"
            )),
            other => other,
        })?;
        match spec.mode {
            EnsembleMode::AdiabaticFormula => {
                let c = fam.branch_phase_integrals(params.g0);
                Ok(CMatrix::from_fn(d, d, |m, n| {
                    if m == n {
                        Complex::new(T::one(), T::zero())
                    } else {
                        phase((c[m] - c[n]) / params.rate)
                    }
                }))
            }
            EnsembleMode::FullOde => {
                let omega = frobenius(generator.hamiltonian()) + frobenius(&v);
                let dt_target = real::<T>(0.05) / T::one().max(omega);
                let steps = (t_final / dt_target)
                    .ceil()
                    .to_usize()
                    .ok_or_else(|| Error::Numeric(format!("path {path}: step count overflow")))?
                    .max(16);
                let h = move |t: T| fam.hamiltonian_at(params.rate * t);
                Ok(rk4_evolve_with(h, k0.matrix(), t_final, steps))
            }
        }
    };

    let per_path: Result<Vec<CMatrix<T>>> = if spec.serial {
        (0..spec.n_paths).map(run_path).collect()
    } else {
        (0..spec.n_paths)
            .into_par_iter()
            .map(run_path)
            .collect::<Result<Vec<_>>>()
    };
    let per_path = per_path?;

    // Indexed serial reduction: identical bits in serial and parallel runs.
    let mut sum = CMatrix::<T>::zeros(d, d);
    for m in &per_path {
        sum += m;
    }
    let inv = real::<T>(1.0 / spec.n_paths as f64);
    let mean_raw = sum.map(|z| z.scale(inv));

    let (mean, mean_eigenbasis) = match spec.mode {
        EnsembleMode::AdiabaticFormula => {
            // mean_raw is the averaged phase matrix; diagonal stays 1 exactly.
            let eig = CMatrix::from_fn(d, d, |m, n| tilde0[(m, n)] * mean_raw[(m, n)]);
            (&u0 * &eig * u0.adjoint(), eig)
        }
        EnsembleMode::FullOde => {
            let eig = u0.adjoint() * &mean_raw * &u0;
            (mean_raw, eig)
        }
    };

    let offdiag_count = d * d - d;
    let mean_offdiag_abs = if offdiag_count == 0 {
        T::zero()
    } else {
        let mut acc = T::zero();
        for m in 0..d {
            for n in 0..d {
                if m != n {
                    acc += crate::linalg::cabs(mean_eigenbasis[(m, n)]);
                }
            }
        }
        acc / real(offdiag_count as f64)
    };

    let spec_data = generator_spectrum(generator);
    let tilde_for_blocks = spec_data.basis.adjoint() * k0.matrix() * &spec_data.basis;
    let projected = block_trace_part(&spec_data, &tilde_for_blocks);
    let projection = &spec_data.basis * projected * spec_data.basis.adjoint();
    let distance_to_projection = frobenius(&(&mean - &projection));

    Ok(EnsembleReport {
        mean,
        mean_eigenbasis,
        mean_offdiag_abs,
        distance_to_projection,
        n_paths: spec.n_paths,
        rate: params.rate,
        master_seed: spec.master_seed,
    })
}

// ---------------------------------------------------------------------------
// Joint distributions of commuting observables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct JointEntry<T: Real> {
    /// One label per observable, `a_i(z)` on the joint eigenspace.
    pub labels: Vec<T>,
    pub probability: T,
}

#[derive(Debug, Clone)]
pub struct JointDistribution<T: Real> {
    pub entries: Vec<JointEntry<T>>,
}

impl<T: Real> JointDistribution<T> {
    /// Marginal of observable `i`: labels merged within
    /// [`tol::FUNCTIONAL_EQUALITY`], sorted by label.
    pub fn marginal(&self, i: usize) -> Vec<(T, T)> {
        let mut pairs: Vec<(T, T)> = self
            .entries
            .iter()
            .map(|e| (e.labels[i], e.probability))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("labels comparable"));
        let eps = real::<T>(tol::FUNCTIONAL_EQUALITY);
        let mut merged: Vec<(T, T)> = Vec::new();
        for (label, p) in pairs {
            match merged.last_mut() {
                Some(last) if (last.0 - label).abs() <= eps => last.1 += p,
                _ => merged.push((label, p)),
            }
        }
        merged
    }
}

/// Joint probabilities of a commuting family over the common spectral
/// projectors. Every pair must commute within [`tol::COMMUTATOR`];
/// the offending pair is named otherwise.
pub fn joint_probabilities<T: Real>(
    observables: &[Observable<T>],
    k: &DensityState<T>,
) -> Result<JointDistribution<T>> {
    if observables.is_empty() {
        return Err(Error::InvalidInput("need at least one observable".into()));
    }
    let d = observables[0].dim();
    if k.dim() != d || observables.iter().any(|o| o.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: k.dim(),
        });
    }
    let eps = real::<T>(tol::COMMUTATOR);
    for i in 0..observables.len() {
        for j in (i + 1)..observables.len() {
            for (a, b) in [
                (
                    observables[i].functional_matrix(),
                    observables[j].functional_matrix(),
                ),
                (
                    observables[i].functional_matrix(),
                    observables[j].generator().hamiltonian(),
                ),
                (
                    observables[i].generator().hamiltonian(),
                    observables[j].functional_matrix(),
                ),
                (
                    observables[i].generator().hamiltonian(),
                    observables[j].generator().hamiltonian(),
                ),
            ] {
                let comm = a * b - b * a;
                let violation = max_abs(&comm);
                if violation > eps {
                    return Err(Error::NotCommuting {
                        first: i,
                        second: j,
                        violation: approx_f64(violation),
                    });
                }
            }
        }
    }

    // Simultaneous diagonalization by recursive block refinement.
    let mut basis = CMatrix::<T>::identity(d, d);
    let mut blocks: Vec<Vec<usize>> = vec![(0..d).collect()];
    for obs in observables {
        let m = basis.adjoint() * obs.generator().hamiltonian() * &basis;
        let mut next_blocks = Vec::new();
        for block in &blocks {
            let nb = block.len();
            let sub = CMatrix::from_fn(nb, nb, |i, j| m[(block[i], block[j])]);
            let (vals, w) = hermitian_eigen(&crate::linalg::symmetrize(&sub));
            // rotate the block columns of the accumulated basis
            let old: Vec<_> = block.iter().map(|&c| basis.column(c).clone_owned()).collect();
            for (local, &col) in block.iter().enumerate() {
                let mut new_col = crate::linalg::CVector::<T>::zeros(d);
                for r in 0..nb {
                    new_col += old[r].map(|z| z * w[(r, local)]);
                }
                basis.set_column(col, &new_col);
            }
            let norm = vals.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
            let groups = crate::linalg::group_sorted(&vals, crate::linalg::level_threshold(norm));
            for (_, members) in groups {
                next_blocks.push(members.iter().map(|&l| block[l]).collect());
            }
        }
        blocks = next_blocks;
    }

    let mut entries = Vec::with_capacity(blocks.len());
    let mut total = T::zero();
    for block in &blocks {
        let mut projector = CMatrix::<T>::zeros(d, d);
        for &c in block {
            let u = basis.column(c);
            for i in 0..d {
                for j in 0..d {
                    projector[(i, j)] += u[i] * u[j].conj();
                }
            }
        }
        let probability = (&projector * k.matrix()).trace().re;
        let share = real::<T>(1.0 / block.len() as f64);
        let labels: Vec<T> = observables
            .iter()
            .map(|o| (o.functional_matrix() * projector.map(|z| z.scale(share))).trace().re)
            .collect();
        total += probability;
        entries.push(JointEntry {
            labels,
            probability,
        });
    }
    if (total - T::one()).abs() > real(1e-10) {
        return Err(Error::Numeric(format!(
            "joint probabilities sum to {:.17}",
            approx_f64(total)
        )));
    }
    Ok(JointDistribution { entries })
}

// ---------------------------------------------------------------------------
// Equilibrium and ground states
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GibbsWeights<T: Real> {
    pub probabilities: Vec<T>,
    /// Inverse temperature; `None` for the minimal-entropy vertex.
    pub beta: Option<T>,
    pub entropy: T,
    pub mean_energy: T,
}

/// Maximum-entropy stationary mixture at fixed mean energy (the Gibbs form
/// `p_k ~ e^{-beta E_k}`, beta by bisection), or the minimal-entropy
/// equilibrium -- the vertex at the lowest energy -- when no target is
/// given.
pub fn equilibrium_and_ground<T: Real>(
    energies: &[T],
    target: Option<T>,
) -> Result<GibbsWeights<T>> {
    if energies.is_empty() {
        return Err(Error::InvalidInput("need at least one energy".into()));
    }
    let e_min = energies.iter().fold(energies[0], |acc, e| acc.min(*e));
    let e_max = energies.iter().fold(energies[0], |acc, e| acc.max(*e));
    let spread = e_max - e_min;

    let Some(target) = target else {
        let mut probabilities = vec![T::zero(); energies.len()];
        let argmin = energies
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("energies comparable"))
            .map(|(i, _)| i)
            .expect("nonempty");
        probabilities[argmin] = T::one();
        return Ok(GibbsWeights {
            probabilities,
            beta: None,
            entropy: T::zero(),
            mean_energy: energies[argmin],
        });
    };

    if target < e_min || target > e_max {
        return Err(Error::InvalidInput(format!(
            "target energy {:.6} outside [{:.6}, {:.6}]",
            approx_f64(target),
            approx_f64(e_min),
            approx_f64(e_max)
        )));
    }
    if spread <= real(1e-15) {
        let n = energies.len();
        let p = real::<T>(1.0 / n as f64);
        let probabilities = vec![p; n];
        let entropy = shannon_entropy(&probabilities);
        return Ok(GibbsWeights {
            probabilities,
            beta: Some(T::zero()),
            entropy,
            mean_energy: e_min,
        });
    }

    let gibbs = |beta: T| -> Vec<T> {
        // shifted for stability; the shift cancels in the normalization
        let weights: Vec<T> = energies.iter().map(|&e| (-beta * (e - e_min)).exp()).collect();
        let z = weights.iter().fold(T::zero(), |acc, w| acc + *w);
        weights.into_iter().map(|w| w / z).collect()
    };
    let mean = |p: &[T]| -> T {
        p.iter()
            .zip(energies.iter())
            .fold(T::zero(), |acc, (w, e)| acc + *w * *e)
    };

    let mut lo = real::<T>(-50.0) / spread;
    let mut hi = real::<T>(50.0) / spread;
    // mean energy is decreasing in beta
    let p_lo = gibbs(lo);
    if target > mean(&p_lo) {
        return Ok(finish(p_lo, lo, energies));
    }
    let p_hi = gibbs(hi);
    if target < mean(&p_hi) {
        return Ok(finish(p_hi, hi, energies));
    }
    for _ in 0..200 {
        let mid = (lo + hi) * real(0.5);
        let p_mid = gibbs(mid);
        let m = mean(&p_mid);
        if (m - target).abs() <= real(1e-12) {
            return Ok(finish(p_mid, mid, energies));
        }
        if m > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = (lo + hi) * real(0.5);
    Ok(finish(gibbs(mid), mid, energies))
}

fn finish<T: Real>(probabilities: Vec<T>, beta: T, energies: &[T]) -> GibbsWeights<T> {
    let mean_energy = probabilities
        .iter()
        .zip(energies.iter())
        .fold(T::zero(), |acc, (w, e)| acc + *w * *e);
    GibbsWeights {
        entropy: shannon_entropy(&probabilities),
        probabilities,
        beta: Some(beta),
        mean_energy,
    }
}

pub fn shannon_entropy<T: Real>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |acc, &w| {
        if w > T::zero() {
            acc - w * w.ln()
        } else {
            acc
        }
    })
}
