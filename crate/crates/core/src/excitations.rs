//! Elementary spaces, translation action through the dispersion matrix,
//! the essential-support decay check, and the endomorphism semiring acting
//! on finite matrix-algebra states.
//!
//! Momentum grid: `k_j = -k_max + j (2 k_max / n_k)`, `j = 0..n_k-1` (FFT
//! layout). Position profiles use the transform
//! `psi(x) = n^{-1/2} sum_j phi(k_j) e^{-i k_j x}`, under which the spatial
//! translation `e^{i a k}` shifts `psi` by `+a` and a wavepacket with
//! dispersion `eps(k)` propagates to `x ~ tau eps'(k)`.

use std::sync::Arc;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::fourier::dft;
use crate::linalg::{cabs, hermitian_eigen, max_abs, phase, validate_hermitian, CMatrix, CVector};
use crate::scalar::{approx_f64, real, Real};
use crate::statespace::DensityState;

/// `m`-component momentum-grid space with Hermitian dispersion `E(k)`.
#[derive(Debug, Clone)]
pub struct ElementarySpace<T: Real> {
    m: usize,
    k_max: T,
    k_grid: Vec<T>,
    dispersion: Vec<CMatrix<T>>,
    reality: bool,
}

impl<T: Real> ElementarySpace<T> {
    pub fn new(
        m: usize,
        n_k: usize,
        k_max: T,
        dispersion: impl Fn(T) -> CMatrix<T>,
        reality: bool,
    ) -> Result<Arc<Self>> {
        if m == 0 || n_k < 4 {
            return Err(Error::InvalidInput("need m >= 1 and n_k >= 4".into()));
        }
        if k_max <= T::zero() {
            return Err(Error::InvalidInput("k_max must be positive".into()));
        }
        let dk = k_max * real::<T>(2.0 / n_k as f64);
        let mut k_grid = Vec::with_capacity(n_k);
        let mut matrices = Vec::with_capacity(n_k);
        for j in 0..n_k {
            let k = -k_max + dk * real::<T>(j as f64);
            let e = dispersion(k);
            if e.nrows() != m || e.ncols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: e.nrows(),
                });
            }
            matrices.push(validate_hermitian(&e)?);
            k_grid.push(k);
        }
        if reality {
            // E(-k) = -E(k); the unpaired edge point j = 0 is skipped
            for j in 1..n_k {
                let partner = n_k - j;
                if partner == n_k {
                    continue;
                }
                let sum = &matrices[j] + &matrices[partner % n_k];
                if max_abs(&sum) > real(1e-12) {
                    return Err(Error::InvalidInput(format!(
                        "reality requires E(-k) = -E(k); defect {:.3e} at k index {j}",
                        approx_f64(max_abs(&sum))
                    )));
                }
            }
        }
        Ok(Arc::new(ElementarySpace {
            m,
            k_max,
            k_grid,
            dispersion: matrices,
            reality,
        }))
    }

    /// One-component space from a scalar dispersion law.
    pub fn scalar(n_k: usize, k_max: T, eps: impl Fn(T) -> T) -> Result<Arc<Self>> {
        Self::new(
            1,
            n_k,
            k_max,
            |k| CMatrix::from_fn(1, 1, |_, _| Complex::new(eps(k), T::zero())),
            false,
        )
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn n_k(&self) -> usize {
        self.k_grid.len()
    }

    pub fn k_grid(&self) -> &[T] {
        &self.k_grid
    }

    pub fn k_max(&self) -> T {
        self.k_max
    }

    pub fn dispersion_at(&self, j: usize) -> &CMatrix<T> {
        &self.dispersion[j]
    }

    pub fn reality(&self) -> bool {
        self.reality
    }

    pub fn grid_step(&self) -> T {
        self.k_max * real::<T>(2.0 / self.n_k() as f64)
    }
}

/// Momentum-grid test function with `m` components per grid point.
#[derive(Debug, Clone)]
pub struct Wavepacket<T: Real> {
    space: Arc<ElementarySpace<T>>,
    values: Vec<CVector<T>>,
}

impl<T: Real> Wavepacket<T> {
    pub fn new(space: &Arc<ElementarySpace<T>>, values: Vec<CVector<T>>) -> Result<Self> {
        if values.len() != space.n_k() {
            return Err(Error::DimensionMismatch {
                expected: space.n_k(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| v.len() != space.components()) {
            return Err(Error::InvalidInput("component count mismatch".into()));
        }
        if space.reality() {
            let n = space.n_k();
            for j in 1..n {
                let partner = n - j;
                for c in 0..space.components() {
                    let defect = cabs(values[j][c].conj() - values[partner % n][c]);
                    if defect > real(1e-10) {
                        return Err(Error::InvalidInput(format!(
                            "reality requires conj(phi(k)) = phi(-k); defect {:.3e}",
                            approx_f64(defect)
                        )));
                    }
                }
            }
        }
        Ok(Wavepacket {
            space: Arc::clone(space),
            values,
        })
    }

    /// Smooth bump `exp(-1/(1 - s^2))` supported on `[k_lo, k_hi]`
    /// (one-component).
    pub fn bump(space: &Arc<ElementarySpace<T>>, k_lo: T, k_hi: T) -> Result<Self> {
        if space.components() != 1 {
            return Err(Error::InvalidInput("bump packets are one-component".into()));
        }
        let center = (k_lo + k_hi) * real::<T>(0.5);
        let width = (k_hi - k_lo) * real::<T>(0.5);
        if width <= T::zero() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        let values = space
            .k_grid()
            .iter()
            .map(|&k| {
                let s = (k - center) / width;
                let amp = if s.abs() < T::one() {
                    (-T::one() / (T::one() - s * s)).exp()
                } else {
                    T::zero()
                };
                CVector::from_fn(1, |_, _| Complex::new(amp, T::zero()))
            })
            .collect();
        Wavepacket::new(space, values)
    }

    pub fn space(&self) -> &Arc<ElementarySpace<T>> {
        &self.space
    }

    pub fn values(&self) -> &[CVector<T>] {
        &self.values
    }

    pub fn norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc + v.norm_squared())
            .sqrt()
    }

    /// Multiply by `e^{i a k}` (spatial translation by `a`).
    pub fn space_translate(&self, a: T) -> Self {
        let values = self
            .space
            .k_grid()
            .iter()
            .zip(self.values.iter())
            .map(|(&k, v)| v.map(|z| z * phase(a * k)))
            .collect();
        Wavepacket {
            space: Arc::clone(&self.space),
            values,
        }
    }
}

/// Apply `e^{i tau E(k)}` per grid point, spectrally.
pub fn time_translate<T: Real>(phi: &Wavepacket<T>, tau: T) -> Wavepacket<T> {
    let space = phi.space();
    let m = space.components();
    let values = (0..space.n_k())
        .map(|j| {
            if m == 1 {
                let eps = space.dispersion_at(j)[(0, 0)].re;
                phi.values()[j].map(|z| z * phase(tau * eps))
            } else {
                let (vals, basis) = hermitian_eigen(space.dispersion_at(j));
                let rotated = CMatrix::from_fn(m, m, |r, c| {
                    if r == c {
                        phase(tau * vals[r])
                    } else {
                        Complex::new(T::zero(), T::zero())
                    }
                });
                &basis * rotated * basis.adjoint() * &phi.values()[j]
            }
        })
        .collect();
    Wavepacket {
        space: Arc::clone(space),
        values,
    }
}

/// Position-space profile `|psi(x)|^2` of a one-component packet, with the
/// signed position grid sorted ascending.
pub fn position_density<T: Real>(phi: &Wavepacket<T>) -> Result<(Vec<T>, Vec<T>)> {
    let space = phi.space();
    if space.components() != 1 {
        return Err(Error::InvalidInput(
            "position profiles need a one-component packet; project a branch first".into(),
        ));
    }
    let n = space.n_k();
    let input: Vec<Complex<T>> = phi.values().iter().map(|v| v[0]).collect();
    // psi(x_l) = n^{-1/2} e^{i k_max x_l} sum_j phi_j e^{-2 pi i j l / n}
    let transformed = dft(&input);
    let dx = T::pi() / space.k_max();
    let mut pairs: Vec<(T, T)> = transformed
        .iter()
        .enumerate()
        .map(|(l, z)| {
            let signed = if l < n / 2 {
                l as f64
            } else {
                l as f64 - n as f64
            };
            let x = dx * real::<T>(signed);
            (x, z.norm_sqr() / real::<T>(n as f64))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("grid comparable"));
    Ok(pairs.into_iter().unzip())
}

#[derive(Debug, Clone)]
pub struct SupportCheck<T: Real> {
    /// Fraction of `|psi|^2` outside the inflated region `tau U_phi`.
    pub outside_mass: T,
    /// Same at `2 tau`.
    pub outside_mass_doubled: T,
    /// `log2(mass(tau) / mass(2 tau))`: super-polynomial decay shows up as
    /// a large exponent.
    pub decay_exponent: T,
    /// Group-velocity window `[min, max]` before inflation.
    pub velocity_window: (T, T),
}

/// Essential-support check: propagate for `tau` and `2 tau`, measure the
/// probability mass outside the inflated classical window
/// `tau * inflate(U_phi)`, and fit the decay exponent between the two.
///
/// `U_phi` is the set of central-difference group velocities on the packet
/// support (threshold `1e-12` relative to the peak); the window is
/// inflated about its center by `inflation`.
pub fn essential_support_check<T: Real>(
    phi: &Wavepacket<T>,
    tau: T,
    inflation: T,
) -> Result<SupportCheck<T>> {
    let space = phi.space();
    if space.components() != 1 {
        return Err(Error::InvalidInput(
            "essential-support checks need a one-component packet; project a branch first".into(),
        ));
    }
    if tau <= T::zero() || inflation < T::one() {
        return Err(Error::InvalidInput("need tau > 0 and inflation >= 1".into()));
    }
    let n = space.n_k();
    let peak = phi
        .values()
        .iter()
        .fold(T::zero(), |acc, v| acc.max(cabs(v[0])));
    let threshold = real::<T>(1e-12) * peak;
    let support: Vec<usize> = (0..n)
        .filter(|&j| cabs(phi.values()[j][0]) > threshold)
        .collect();
    if support.is_empty() {
        return Err(Error::InvalidInput("empty wavepacket".into()));
    }
    if support.contains(&0) || support.contains(&(n - 1)) {
        return Err(Error::SupportTouchesBoundary);
    }
    let dk = space.grid_step();
    let eps = |j: usize| space.dispersion_at(j)[(0, 0)].re;
    let mut v_lo = T::max_value().unwrap_or(T::one());
    let mut v_hi = -v_lo;
    for &j in &support {
        let v = (eps(j + 1) - eps(j - 1)) / (dk + dk);
        v_lo = v_lo.min(v);
        v_hi = v_hi.max(v);
    }
    let center = (v_lo + v_hi) * real::<T>(0.5);
    let half = (v_hi - v_lo) * real::<T>(0.5) * inflation;
    let window = (center - half, center + half);

    let mass_outside = |t: T| -> Result<T> {
        let moved = time_translate(phi, t);
        let (xs, density) = position_density(&moved)?;
        let mut inside = T::zero();
        let mut total = T::zero();
        for (x, p) in xs.iter().zip(density.iter()) {
            total += *p;
            if *x >= t * window.0 && *x <= t * window.1 {
                inside += *p;
            }
        }
        Ok(((total - inside) / total).max(real(1e-300)))
    };
    let m1 = mass_outside(tau)?;
    let m2 = mass_outside(tau + tau)?;
    let decay_exponent = (m1 / m2).ln() / real::<T>(2.0).ln();
    Ok(SupportCheck {
        outside_mass: m1,
        outside_mass_doubled: m2,
        decay_exponent,
        velocity_window: (v_lo, v_hi),
    })
}

/// Result of `Psi_B`: the (unnormalized) cone element `B K B^H` together
/// with its weight `omega(B^H B)`; `zero` marks the valid zero element.
#[derive(Debug, Clone)]
pub struct Excited<T: Real> {
    pub state: DensityState<T>,
    pub weight: T,
    pub zero: bool,
}

/// The endomorphism `Psi_B` on states of the matrix algebra:
/// `K -> B K B^H`.
pub fn psi_endomorphism<T: Real>(omega: &DensityState<T>, b: &CMatrix<T>) -> Result<Excited<T>> {
    if b.nrows() != omega.dim() || b.ncols() != omega.dim() {
        return Err(Error::DimensionMismatch {
            expected: omega.dim(),
            got: b.nrows(),
        });
    }
    let moved = b * omega.matrix() * b.adjoint();
    let weight = moved.trace().re;
    let state = DensityState::new_cone(&moved)?;
    Ok(Excited {
        state,
        weight,
        zero: weight <= real(tol_weight()),
    })
}

fn tol_weight() -> f64 {
    1e-14
}

/// Random word in the endomorphism semiring: compositions, sums, and
/// positive scalings of the generators.
#[derive(Debug, Clone)]
pub enum SemiringWord<T: Real> {
    Generator(usize),
    Sum(Box<SemiringWord<T>>, Box<SemiringWord<T>>),
    Compose(Box<SemiringWord<T>>, Box<SemiringWord<T>>),
    Scale(T, Box<SemiringWord<T>>),
}

impl<T: Real> SemiringWord<T> {
    pub fn random(rng: &mut impl rand::Rng, n_generators: usize, depth: usize) -> Self {
        if depth == 0 {
            return SemiringWord::Generator(rng.gen_range(0..n_generators));
        }
        match rng.gen_range(0..4) {
            0 => SemiringWord::Generator(rng.gen_range(0..n_generators)),
            1 => SemiringWord::Sum(
                Box::new(Self::random(rng, n_generators, depth - 1)),
                Box::new(Self::random(rng, n_generators, depth - 1)),
            ),
            2 => SemiringWord::Compose(
                Box::new(Self::random(rng, n_generators, depth - 1)),
                Box::new(Self::random(rng, n_generators, depth - 1)),
            ),
            _ => SemiringWord::Scale(
                crate::scalar::real(rng.gen_range(0.1..3.0)),
                Box::new(Self::random(rng, n_generators, depth - 1)),
            ),
        }
    }

    pub fn apply(&self, generators: &[CMatrix<T>], k: &CMatrix<T>) -> CMatrix<T> {
        match self {
            SemiringWord::Generator(i) => {
                let b = &generators[*i];
                b * k * b.adjoint()
            }
            SemiringWord::Sum(a, b) => a.apply(generators, k) + b.apply(generators, k),
            SemiringWord::Compose(a, b) => a.apply(generators, &b.apply(generators, k)),
            SemiringWord::Scale(s, w) => w.apply(generators, k).map(|z| z.scale(*s)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SemiringReport<T: Real> {
    pub pass: bool,
    pub worst_min_eigenvalue: T,
    pub words_checked: usize,
}

/// Sampled closure check: random semiring words applied to random cone
/// elements stay in the cone (min eigenvalue above `-1e-10`).
pub fn semiring_closure_check<T: Real>(
    generators: &[CMatrix<T>],
    depth: usize,
    n_words: usize,
    n_states: usize,
    seed: u64,
) -> Result<SemiringReport<T>> {
    if generators.is_empty() {
        return Err(Error::InvalidInput("need at least one generator".into()));
    }
    if depth > 3 {
        return Err(Error::InvalidInput("word depth is capped at 3".into()));
    }
    let dim = generators[0].nrows();
    if generators.iter().any(|g| g.nrows() != dim || g.ncols() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: 0,
        });
    }
    let mut rng = crate::sampling::stream_rng(seed, 0);
    let mut worst = T::max_value().unwrap_or(T::one());
    let mut words_checked = 0;
    for _ in 0..n_words {
        let word = SemiringWord::<T>::random(&mut rng, generators.len(), depth);
        for _ in 0..n_states {
            let k = crate::sampling::random_density_matrix::<T>(&mut rng, dim);
            let image = word.apply(generators, &k);
            let (eigs, _) = hermitian_eigen(&crate::linalg::symmetrize(&image));
            worst = worst.min(eigs[0]);
        }
        words_checked += 1;
    }
    Ok(SemiringReport {
        pass: worst >= real(-1e-10),
        worst_min_eigenvalue: worst,
        words_checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::partial_trace_first;
    use crate::sampling::{random_density_matrix, stream_rng};

    fn free_space(n: usize, k_max: f64) -> Arc<ElementarySpace<f64>> {
        ElementarySpace::scalar(n, k_max, |k| 0.5 * k * k).unwrap()
    }

    #[test]
    fn time_translate_preserves_per_k_norm() {
        let space = ElementarySpace::new(
            2,
            64,
            4.0,
            |k| {
                CMatrix::from_fn(2, 2, |i, j| {
                    if i != j {
                        Complex::new(k, 0.0)
                    } else {
                        Complex::new(0.0, 0.0)
                    }
                })
            },
            false,
        )
        .unwrap();
        let mut rng = stream_rng(71, 0);
        let values: Vec<CVector<f64>> = (0..64)
            .map(|_| CVector::from_fn(2, |_, _| crate::sampling::cnormal(&mut rng)))
            .collect();
        let phi = Wavepacket::new(&space, values).unwrap();
        let moved = time_translate(&phi, 3.7);
        for j in 0..64 {
            assert!((moved.values()[j].norm() - phi.values()[j].norm()).abs() < 1e-12);
        }
        assert!((moved.norm() - phi.norm()).abs() < 1e-12);
    }

    #[test]
    fn two_band_exponential_closed_form() {
        // E(k) = [[0, k], [k, 0]]: e^{i tau E} = cos(k tau) I + i sin(k tau) (offdiag)
        let space = ElementarySpace::new(
            2,
            32,
            2.0,
            |k| {
                CMatrix::from_fn(2, 2, |i, j| {
                    if i != j {
                        Complex::new(k, 0.0)
                    } else {
                        Complex::new(0.0, 0.0)
                    }
                })
            },
            false,
        )
        .unwrap();
        let tau = 1.3;
        // delta packet on a single component at each k
        let values: Vec<CVector<f64>> = (0..32)
            .map(|_| CVector::from_vec(vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]))
            .collect();
        let phi = Wavepacket::new(&space, values).unwrap();
        let moved = time_translate(&phi, tau);
        for (j, &k) in space.k_grid().iter().enumerate() {
            let expected0 = Complex::new((k * tau).cos(), 0.0);
            let expected1 = Complex::new(0.0, (k * tau).sin());
            assert!(cabs(moved.values()[j][0] - expected0) < 1e-12);
            assert!(cabs(moved.values()[j][1] - expected1) < 1e-12);
        }
    }

    #[test]
    fn translation_group_law() {
        let space = free_space(128, 4.0);
        let phi = Wavepacket::bump(&space, 0.5, 1.5).unwrap();
        let a = time_translate(&time_translate(&phi, 0.7), 1.9);
        let b = time_translate(&phi, 2.6);
        for j in 0..128 {
            assert!(cabs(a.values()[j][0] - b.values()[j][0]) < 1e-10);
        }
    }

    #[test]
    fn space_and_time_translations_commute() {
        let space = free_space(128, 4.0);
        let phi = Wavepacket::bump(&space, 0.5, 1.5).unwrap();
        let ab = time_translate(&phi.space_translate(2.0), 1.5);
        let ba = time_translate(&phi, 1.5).space_translate(2.0);
        for j in 0..128 {
            assert!(cabs(ab.values()[j][0] - ba.values()[j][0]) < 1e-12);
        }
    }

    #[test]
    fn reality_is_preserved_by_odd_dispersion() {
        let n = 64;
        let space = ElementarySpace::new(
            1,
            n,
            4.0_f64,
            |k| CMatrix::from_fn(1, 1, |_, _| Complex::new(k, 0.0)),
            true,
        )
        .unwrap();
        // real Gaussian in position space: phi(k) real even
        let values: Vec<CVector<f64>> = space
            .k_grid()
            .iter()
            .map(|&k| CVector::from_fn(1, |_, _| Complex::new((-k * k).exp(), 0.0)))
            .collect();
        let phi = Wavepacket::new(&space, values).unwrap();
        let moved = time_translate(&phi, 2.2);
        for j in 1..n {
            let partner = (n - j) % n;
            if partner == 0 {
                continue;
            }
            let defect = cabs(moved.values()[j][0].conj() - moved.values()[partner][0]);
            assert!(defect < 1e-10);
        }
    }

    #[test]
    fn constant_dispersion_keeps_the_packet_in_place() {
        let space = ElementarySpace::scalar(256, 4.0_f64, |_| 1.0).unwrap();
        let phi = Wavepacket::bump(&space, 0.5, 1.5).unwrap();
        let check = essential_support_check(&phi, 50.0, 1.1).unwrap();
        // |psi| is tau-independent: outside mass equals its tau -> 0 limit
        let baseline = essential_support_check(&phi, 1e-9, 1.1).unwrap();
        assert!((check.outside_mass - baseline.outside_mass).abs() < 1e-12);
        assert!(check.velocity_window.0.abs() < 1e-12);
        assert!(check.velocity_window.1.abs() < 1e-12);
    }

    #[test]
    fn quadratic_dispersion_concentrates_on_the_velocity_window() {
        // A bump with k-support 0.2 has initial position width ~100 at the
        // 1e-3 mass level (its transform decays like exp(-2 sqrt(0.1 x))),
        // so at tau = 200 the window margin 0.02 tau = 4 still intersects
        // the packet's own tail; the mass outside shrinks steadily as tau
        // grows and super-polynomially once the margin dominates the width.
        let space = free_space(4096, 8.0);
        let phi = Wavepacket::bump(&space, 0.9, 1.1).unwrap();
        let check = essential_support_check(&phi, 200.0, 1.2).unwrap();
        assert!((check.velocity_window.0 - 0.9).abs() < 0.05);
        assert!((check.velocity_window.1 - 1.1).abs() < 0.05);
        assert!(check.outside_mass < 0.2, "outside mass {}", check.outside_mass);
        assert!(check.outside_mass_doubled < check.outside_mass);
        assert!(check.decay_exponent > 1.5, "exponent {}", check.decay_exponent);

        // with a generous velocity margin the concentration is sharp
        let wide = essential_support_check(&phi, 200.0, 7.0).unwrap();
        assert!(wide.outside_mass < 1e-3, "outside mass {}", wide.outside_mass);
        assert!(wide.decay_exponent > 4.0, "exponent {}", wide.decay_exponent);
    }

    #[test]
    fn boundary_support_is_rejected() {
        let space = free_space(64, 1.0);
        // constant packet touches the grid edge
        let values: Vec<CVector<f64>> = (0..64)
            .map(|_| CVector::from_fn(1, |_, _| Complex::new(1.0, 0.0)))
            .collect();
        let phi = Wavepacket::new(&space, values).unwrap();
        assert!(matches!(
            essential_support_check(&phi, 10.0, 1.2),
            Err(Error::SupportTouchesBoundary)
        ));
    }

    #[test]
    fn psi_endomorphism_examples() {
        let mut rng = stream_rng(71, 1);
        let k = DensityState::new(&random_density_matrix::<f64>(&mut rng, 3)).unwrap();

        // identity leaves the state alone
        let id = CMatrix::<f64>::identity(3, 3);
        let out = psi_endomorphism(&k, &id).unwrap();
        assert!(max_abs(&(out.state.matrix() - k.matrix())) < 1e-14);
        assert!((out.weight - 1.0).abs() < 1e-12);

        // sigma_x-type flip on |0><0| gives |1><1|
        let mut ground = CMatrix::<f64>::zeros(2, 2);
        ground[(0, 0)] = Complex::new(1.0, 0.0);
        let k0 = DensityState::new(&ground).unwrap();
        let mut flip = CMatrix::<f64>::zeros(2, 2);
        flip[(0, 1)] = Complex::new(1.0, 0.0);
        flip[(1, 0)] = Complex::new(1.0, 0.0);
        let flipped = psi_endomorphism(&k0, &flip).unwrap();
        assert!((flipped.state.matrix()[(1, 1)].re - 1.0).abs() < 1e-14);

        // zero map yields the flagged zero cone element
        let zero = psi_endomorphism(&k, &CMatrix::zeros(3, 3)).unwrap();
        assert!(zero.zero);
        assert!(zero.weight.abs() < 1e-14);
    }

    #[test]
    fn psi_outputs_are_positive() {
        let mut rng = stream_rng(71, 2);
        for _ in 0..50 {
            let k = DensityState::new(&random_density_matrix::<f64>(&mut rng, 4)).unwrap();
            let b = CMatrix::from_fn(4, 4, |_, _| crate::sampling::cnormal(&mut rng));
            let out = psi_endomorphism(&k, &b).unwrap();
            assert!(out.state.eigenvalues()[0] > -1e-12);
        }
    }

    #[test]
    fn composition_matches_the_product_generator() {
        let mut rng = stream_rng(71, 3);
        for _ in 0..10 {
            let b1 = CMatrix::from_fn(3, 3, |_, _| crate::sampling::cnormal::<f64>(&mut rng));
            let b2 = CMatrix::from_fn(3, 3, |_, _| crate::sampling::cnormal::<f64>(&mut rng));
            let product = &b1 * &b2;
            for _ in 0..10 {
                let k = DensityState::new(&random_density_matrix::<f64>(&mut rng, 3)).unwrap();
                let composed = psi_endomorphism(
                    &DensityState::new_cone(
                        psi_endomorphism(&k, &b2).unwrap().state.matrix(),
                    )
                    .unwrap(),
                    &b1,
                )
                .unwrap();
                let direct = &product * k.matrix() * product.adjoint();
                assert!(max_abs(&(composed.state.matrix() - &direct)) < 1e-10);
            }
        }
    }

    #[test]
    fn semiring_words_preserve_the_cone() {
        let mut rng = stream_rng(71, 4);
        let generators: Vec<CMatrix<f64>> = (0..3)
            .map(|_| CMatrix::from_fn(3, 3, |_, _| crate::sampling::cnormal(&mut rng)))
            .collect();
        let report = semiring_closure_check(&generators, 3, 40, 5, 808).unwrap();
        assert!(report.pass, "worst {}", report.worst_min_eigenvalue);
        assert_eq!(report.words_checked, 40);

        // single generator, depth 1
        let single = semiring_closure_check(&generators[..1], 1, 10, 5, 809).unwrap();
        assert!(single.pass);

        // 2 Psi_B + Psi_C stays positive
        let b = &generators[0];
        let c = &generators[1];
        for _ in 0..100 {
            let k = random_density_matrix::<f64>(&mut rng, 3);
            let image = (b * &k * b.adjoint()).map(|z| z.scale(2.0)) + c * &k * c.adjoint();
            let (eigs, _) = hermitian_eigen(&crate::linalg::symmetrize(&image));
            assert!(eigs[0] > -1e-10);
        }
    }

    #[test]
    fn depth_cap_is_enforced() {
        let generators = vec![CMatrix::<f64>::identity(2, 2)];
        assert!(semiring_closure_check(&generators, 4, 1, 1, 0).is_err());
    }

    #[test]
    fn local_excitations_leave_the_far_factor_unchanged() {
        // omega = omega_loc (x) omega_far, B = b (x) I: the reduced state on
        // the far factor is unchanged after normalization
        let mut rng = stream_rng(71, 5);
        let k_loc = random_density_matrix::<f64>(&mut rng, 3);
        let k_far = random_density_matrix::<f64>(&mut rng, 3);
        let omega = DensityState::new(&k_loc.kronecker(&k_far)).unwrap();
        let b_small = CMatrix::from_fn(3, 3, |_, _| crate::sampling::cnormal::<f64>(&mut rng));
        let b = b_small.kronecker(&CMatrix::identity(3, 3));
        let excited = psi_endomorphism(&omega, &b).unwrap();
        let reduced = partial_trace_first(excited.state.matrix(), 3, 3);
        let normalized = reduced.map(|z| z / Complex::new(excited.weight, 0.0));
        assert!(max_abs(&(&normalized - &k_far)) < 1e-12);
    }
}
