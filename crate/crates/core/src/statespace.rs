//! Finite-dimensional state set: density matrices, automorphism-generated
//! evolution, observables, and the generic redundant-state quotient.
//!
//! Sign convention used everywhere in the toolkit:
//! `dK/dt = i(H K - K H)`, solved by `K(t) = e^{iHt} K e^{-iHt}`.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{
    self, group_sorted, hermitian_eigen, level_threshold, max_abs, phase, validate_hermitian,
    CMatrix, CVector, RVector,
};
use crate::scalar::{approx_f64, real, Real};
use crate::tol;

/// Point of the state set `C0` (normalized) or of the cone `C`
/// (`normalized == false`, trace condition dropped).
#[derive(Debug, Clone)]
pub struct DensityState<T: Real> {
    dim: usize,
    matrix: CMatrix<T>,
    normalized: bool,
}

impl<T: Real> DensityState<T> {
    /// Normalized state: Hermitian, positive semidefinite, unit trace.
    pub fn new(matrix: &CMatrix<T>) -> Result<Self> {
        Self::build(matrix, true)
    }

    /// Cone element: Hermitian and positive semidefinite, any trace.
    pub fn new_cone(matrix: &CMatrix<T>) -> Result<Self> {
        Self::build(matrix, false)
    }

    fn build(matrix: &CMatrix<T>, normalized: bool) -> Result<Self> {
        let matrix = validate_hermitian(matrix)?;
        let (eigs, _) = hermitian_eigen(&matrix);
        let min_eig = eigs.iter().fold(T::zero(), |acc, e| acc.min(*e));
        if min_eig < real(tol::PSD_MIN_EIGENVALUE) {
            return Err(Error::NotPositive {
                min_eigenvalue: approx_f64(min_eig),
            });
        }
        if normalized {
            let trace = matrix.trace().re;
            if (trace - T::one()).abs() > real(tol::TRACE_ONE) {
                return Err(Error::TraceNotOne {
                    trace: approx_f64(trace),
                });
            }
        }
        Ok(DensityState {
            dim: matrix.nrows(),
            matrix,
            normalized,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn eigenvalues(&self) -> RVector<T> {
        hermitian_eigen(&self.matrix).0
    }

    /// Convex mixture `lambda self + (1 - lambda) other`.
    pub fn mix(&self, other: &Self, lambda: T) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if lambda < T::zero() || lambda > T::one() {
            return Err(Error::InvalidInput("mixture weight outside [0, 1]".into()));
        }
        let l = Complex::new(lambda, T::zero());
        let r = Complex::new(T::one() - lambda, T::zero());
        let m = self.matrix.map(|z| z * l) + other.matrix.map(|z| z * r);
        Self::build(&m, self.normalized && other.normalized)
    }
}

/// Infinitesimal automorphism `K -> i(H K - K H)` of the quantum state set,
/// specified by its Hermitian `H`.
#[derive(Debug, Clone)]
pub struct Generator<T: Real> {
    dim: usize,
    hamiltonian: CMatrix<T>,
}

impl<T: Real> Generator<T> {
    pub fn new(hamiltonian: &CMatrix<T>) -> Result<Self> {
        let hamiltonian = validate_hermitian(hamiltonian)?;
        Ok(Generator {
            dim: hamiltonian.nrows(),
            hamiltonian,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &CMatrix<T> {
        &self.hamiltonian
    }

    /// `i(H K - K H)`.
    pub fn apply(&self, k: &CMatrix<T>) -> CMatrix<T> {
        let comm = &self.hamiltonian * k - k * &self.hamiltonian;
        comm.map(|z| z * Complex::i())
    }

    /// The action as a `dim^2 x dim^2` matrix on column-major
    /// vectorizations: `i(I (x) H - H^T (x) I)`.
    pub fn superoperator(&self) -> CMatrix<T> {
        let id = CMatrix::<T>::identity(self.dim, self.dim);
        let l = id.kronecker(&self.hamiltonian) - self.hamiltonian.transpose().kronecker(&id);
        l.map(|z| z * Complex::i())
    }

    /// Flow of the equation of motion on an arbitrary Hermitian matrix.
    pub fn evolve_hermitian(&self, m: &CMatrix<T>, t: T) -> Result<CMatrix<T>> {
        if m.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: m.nrows(),
            });
        }
        let (energies, basis) = hermitian_eigen(&self.hamiltonian);
        let propagator = &basis
            * CMatrix::from_fn(self.dim, self.dim, |i, j| {
                if i == j {
                    phase(energies[i] * t)
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            })
            * basis.adjoint();
        Ok(&propagator * m * propagator.adjoint())
    }
}

/// Spectral data of a generator: superoperator eigenbasis
/// `phi_mn = u_m u_n^H` with eigenvalues `i(E_m - E_n)`, plus the grouped
/// energy-level structure of `H`.
#[derive(Debug, Clone)]
pub struct SpectralData<T: Real> {
    /// `i(E_m - E_n)`, pairs `(m, n)` enumerated row-major.
    pub eigenvalues: Vec<Complex<T>>,
    /// Sorted energies, one per basis column.
    pub energies: RVector<T>,
    /// Distinct energy levels (group means).
    pub energy_levels: Vec<T>,
    /// Multiplicity of each level.
    pub degeneracies: Vec<usize>,
    /// Level index of each basis column.
    pub level_of: Vec<usize>,
    /// Unitary whose columns are the `H` eigenvectors, energy-sorted.
    pub basis: CMatrix<T>,
}

impl<T: Real> SpectralData<T> {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Superoperator eigenvector `phi_mn = u_m u_n^H`.
    pub fn eigenvector(&self, m: usize, n: usize) -> CMatrix<T> {
        let um = self.basis.column(m);
        let un = self.basis.column(n);
        CMatrix::from_fn(self.dim(), self.dim(), |i, j| um[i] * un[j].conj())
    }

    /// All `dim^2` eigenvectors, in the same order as `eigenvalues`.
    pub fn eigenvectors(&self) -> Vec<CMatrix<T>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for m in 0..d {
            for n in 0..d {
                out.push(self.eigenvector(m, n));
            }
        }
        out
    }

    /// Spectral projector of level `level`.
    pub fn level_projector(&self, level: usize) -> CMatrix<T> {
        let d = self.dim();
        let mut p = CMatrix::zeros(d, d);
        for (col, &lv) in self.level_of.iter().enumerate() {
            if lv == level {
                let u = self.basis.column(col);
                for i in 0..d {
                    for j in 0..d {
                        p[(i, j)] += u[i] * u[j].conj();
                    }
                }
            }
        }
        p
    }
}

/// Diagonalize the generator: eigenbasis `phi_mn` with
/// `epsilon_mn = i(E_m - E_n)` and the degeneracy structure of `{E_n}`.
pub fn generator_spectrum<T: Real>(g: &Generator<T>) -> SpectralData<T> {
    let (energies, basis) = hermitian_eigen(g.hamiltonian());
    let norm = energies.iter().fold(T::zero(), |acc, e| acc.max(e.abs()));
    let groups = group_sorted(&energies, level_threshold(norm));
    let mut level_of = vec![0usize; energies.len()];
    let mut energy_levels = Vec::with_capacity(groups.len());
    let mut degeneracies = Vec::with_capacity(groups.len());
    for (level, (mean, members)) in groups.iter().enumerate() {
        energy_levels.push(*mean);
        degeneracies.push(members.len());
        for &m in members {
            level_of[m] = level;
        }
    }
    let d = energies.len();
    let mut eigenvalues = Vec::with_capacity(d * d);
    for m in 0..d {
        for n in 0..d {
            eigenvalues.push(Complex::new(T::zero(), energies[m] - energies[n]));
        }
    }
    SpectralData {
        eigenvalues,
        energies,
        energy_levels,
        degeneracies,
        level_of,
        basis,
    }
}

/// Solve `dK/dt = i(H K - K H)` by spectral conjugation.
pub fn evolve_state<T: Real>(k0: &DensityState<T>, g: &Generator<T>, t: T) -> Result<DensityState<T>> {
    if k0.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: k0.dim(),
        });
    }
    let m = g.evolve_hermitian(k0.matrix(), t)?;
    if k0.is_normalized() {
        DensityState::new(&m)
    } else {
        DensityState::new_cone(&m)
    }
}

/// Fixed-step RK4 on `dK/dt = i(H(t) K - K H(t))`; the independent
/// cross-validation route for the spectral solution.
pub fn rk4_evolve_with<T: Real>(
    hamiltonian: impl Fn(T) -> CMatrix<T>,
    k0: &CMatrix<T>,
    t_final: T,
    steps: usize,
) -> CMatrix<T> {
    let rhs = |t: T, k: &CMatrix<T>| -> CMatrix<T> {
        let h = hamiltonian(t);
        (&h * k - k * &h).map(|z| z * Complex::i())
    };
    let dt = t_final / real(steps.max(1) as f64);
    let half = real::<T>(0.5);
    let sixth = real::<T>(1.0 / 6.0);
    let two = real::<T>(2.0);
    let mut k = k0.clone();
    let mut t = T::zero();
    for _ in 0..steps.max(1) {
        let k1 = rhs(t, &k);
        let k2 = rhs(t + dt * half, &(&k + k1.map(|z| z.scale(dt * half))));
        let k3 = rhs(t + dt * half, &(&k + k2.map(|z| z.scale(dt * half))));
        let k4 = rhs(t + dt, &(&k + k3.map(|z| z.scale(dt))));
        let incr = k1 + k2.map(|z| z.scale(two)) + k3.map(|z| z.scale(two)) + k4;
        k += incr.map(|z| z.scale(dt * sixth));
        t += dt;
    }
    k
}

/// RK4 route for a time-independent generator.
pub fn evolve_state_rk4<T: Real>(
    k0: &DensityState<T>,
    g: &Generator<T>,
    t: T,
    steps: usize,
) -> Result<CMatrix<T>> {
    if k0.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: k0.dim(),
        });
    }
    let h = g.hamiltonian().clone();
    Ok(rk4_evolve_with(move |_| h.clone(), k0.matrix(), t, steps))
}

/// Observable: a generator together with an invariant linear functional
/// `a(K) = tr(A K)`, `[A, H] = 0`.
#[derive(Debug, Clone)]
pub struct Observable<T: Real> {
    generator: Generator<T>,
    functional: CMatrix<T>,
}

impl<T: Real> Observable<T> {
    pub fn new(generator: Generator<T>, functional: &CMatrix<T>) -> Result<Self> {
        let functional = validate_hermitian(functional)?;
        if functional.nrows() != generator.dim() {
            return Err(Error::DimensionMismatch {
                expected: generator.dim(),
                got: functional.nrows(),
            });
        }
        let comm = &functional * generator.hamiltonian() - generator.hamiltonian() * &functional;
        let violation = max_abs(&comm);
        if violation > real(tol::COMMUTATOR) {
            return Err(Error::NotCommuting {
                first: 0,
                second: 0,
                violation: approx_f64(violation),
            });
        }
        Ok(Observable {
            generator,
            functional,
        })
    }

    pub fn generator(&self) -> &Generator<T> {
        &self.generator
    }

    pub fn functional_matrix(&self) -> &CMatrix<T> {
        &self.functional
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }
}

/// Expectation value `tr(A K)`; the imaginary part must vanish.
pub fn expectation<T: Real>(obs: &Observable<T>, k: &DensityState<T>) -> Result<T> {
    if obs.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            got: k.dim(),
        });
    }
    let val = (obs.functional_matrix() * k.matrix()).trace();
    if val.im.abs() > real::<T>(tol::HERMITICITY) * T::one().max(val.re.abs()) {
        return Err(Error::Numeric(format!(
            "expectation has imaginary part {:.3e}",
            approx_f64(val.im)
        )));
    }
    Ok(val.re)
}

/// Finite set of extreme-point candidates; the classical model
/// `C~0` of probability distributions over them.
#[derive(Debug, Clone)]
pub struct FiniteConvexStateSet<T: Real> {
    points: Vec<RVector<T>>,
}

impl<T: Real> FiniteConvexStateSet<T> {
    pub fn new(points: Vec<RVector<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("state set needs at least one point".into()));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidInput("points have mixed dimensions".into()));
        }
        Ok(FiniteConvexStateSet { points })
    }

    pub fn points(&self) -> &[RVector<T>] {
        &self.points
    }

    /// Barycenter of a mixture; weights must be a probability vector.
    pub fn mixture(&self, weights: &[T]) -> Result<RVector<T>> {
        if weights.len() != self.points.len() {
            return Err(Error::DimensionMismatch {
                expected: self.points.len(),
                got: weights.len(),
            });
        }
        let sum = weights.iter().fold(T::zero(), |acc, w| acc + *w);
        if weights.iter().any(|w| *w < T::zero()) || (sum - T::one()).abs() > real(tol::TRACE_ONE) {
            return Err(Error::InvalidInput("weights must be a probability vector".into()));
        }
        let mut out = RVector::zeros(self.points[0].len());
        for (w, p) in weights.iter().zip(self.points.iter()) {
            out += p.map(|x| x * *w);
        }
        Ok(out)
    }
}

/// One equivalence class of the redundancy quotient, labeled by its vector
/// of functional values.
#[derive(Debug, Clone)]
pub struct EquivalenceClass<T: Real> {
    /// Representative functional-value vector.
    pub values: RVector<T>,
    /// Indices of the member points.
    pub members: Vec<usize>,
}

/// Partition points by the values of the given linear functionals.
///
/// `x ~ y` iff every functional agrees within [`tol::FUNCTIONAL_EQUALITY`].
/// An empty functional list yields a single class: with no observables,
/// no two states can be distinguished.
pub fn quotient_by_observables<T: Real>(
    set: &FiniteConvexStateSet<T>,
    functionals: &[RVector<T>],
) -> Result<Vec<EquivalenceClass<T>>> {
    let dim = set.points()[0].len();
    for f in functionals {
        if f.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.len(),
            });
        }
    }
    let eps = real::<T>(tol::FUNCTIONAL_EQUALITY);
    let mut classes: Vec<EquivalenceClass<T>> = Vec::new();
    for (idx, p) in set.points().iter().enumerate() {
        let values = RVector::from_fn(functionals.len(), |k, _| functionals[k].dot(p));
        match classes
            .iter_mut()
            .find(|c| (0..functionals.len()).all(|k| (c.values[k] - values[k]).abs() <= eps))
        {
            Some(class) => class.members.push(idx),
            None => classes.push(EquivalenceClass {
                values,
                members: vec![idx],
            }),
        }
    }
    Ok(classes)
}

/// Column-major vectorization of a state, for superoperator checks.
pub fn vectorize<T: Real>(m: &CMatrix<T>) -> CVector<T> {
    linalg::vec_of(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cabs;
    use crate::sampling::{random_density_matrix, random_hermitian, stream_rng};

    fn diag(entries: &[f64]) -> CMatrix<f64> {
        CMatrix::from_fn(entries.len(), entries.len(), |i, j| {
            if i == j {
                Complex::new(entries[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        })
    }

    fn plus_state() -> DensityState<f64> {
        let m = CMatrix::from_fn(2, 2, |_, _| Complex::new(0.5, 0.0));
        DensityState::new(&m).unwrap()
    }

    #[test]
    fn zero_hamiltonian_is_identity_flow() {
        let k0 = plus_state();
        let g = Generator::new(&diag(&[0.0, 0.0])).unwrap();
        let k = evolve_state(&k0, &g, 5.0).unwrap();
        assert!(max_abs(&(k.matrix() - k0.matrix())) < 1e-12);
    }

    #[test]
    fn qubit_off_diagonal_picks_up_e_minus_it() {
        // k01(t) = k01(0) e^{-it}; at t = pi the plus state flips sign off-diagonal
        let k0 = plus_state();
        let g = Generator::new(&diag(&[0.0, 1.0])).unwrap();
        let t = std::f64::consts::PI;
        let k = evolve_state(&k0, &g, t).unwrap();
        let expected = CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex::new(0.5, 0.0)
            } else {
                Complex::new(-0.5, 0.0)
            }
        });
        assert!(max_abs(&(k.matrix() - &expected)) < 1e-12);

        // independent RK4 route
        let rk4 = evolve_state_rk4(&k0, &g, t, 4000).unwrap();
        assert!(max_abs(&(k.matrix() - &rk4)) < 1e-10);
    }

    #[test]
    fn unitary_conjugation_preserves_trace_and_spectrum() {
        let mut rng = stream_rng(11, 0);
        let h = random_hermitian::<f64>(&mut rng, 4, 1.0);
        let g = Generator::new(&h).unwrap();
        let k0 = DensityState::new(&random_density_matrix(&mut rng, 4)).unwrap();
        let k = evolve_state(&k0, &g, 1.0).unwrap();
        assert!((k.matrix().trace().re - 1.0).abs() < 1e-12);
        let before = k0.eigenvalues();
        let after = k.eigenvalues();
        for i in 0..4 {
            assert!((before[i] - after[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_of_two_level_generator() {
        let g = Generator::new(&diag(&[0.0, 1.0])).unwrap();
        let spec = generator_spectrum(&g);
        let mut imag: Vec<f64> = spec.eigenvalues.iter().map(|e| e.im).collect();
        imag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(imag.len(), 4);
        assert!((imag[0] + 1.0).abs() < 1e-12);
        assert!(imag[1].abs() < 1e-12);
        assert!(imag[2].abs() < 1e-12);
        assert!((imag[3] - 1.0).abs() < 1e-12);
        for e in &spec.eigenvalues {
            assert!(e.re.abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_of_scaled_identity_vanishes() {
        let g = Generator::new(&diag(&[0.7, 0.7, 0.7])).unwrap();
        let spec = generator_spectrum(&g);
        assert!(spec.eigenvalues.iter().all(|e| cabs(*e) < 1e-10));
        assert_eq!(spec.energy_levels.len(), 1);
        assert_eq!(spec.degeneracies, vec![3]);
    }

    #[test]
    fn spectrum_level_differences() {
        let g = Generator::new(&diag(&[0.0, 1.0, 3.0])).unwrap();
        let spec = generator_spectrum(&g);
        let mut imag: Vec<f64> = spec.eigenvalues.iter().map(|e| e.im).collect();
        imag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-3.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0];
        for (a, b) in imag.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn superoperator_diagonalizes_on_phi_mn() {
        let mut rng = stream_rng(11, 1);
        let h = random_hermitian::<f64>(&mut rng, 3, 1.0);
        let g = Generator::new(&h).unwrap();
        let spec = generator_spectrum(&g);
        let l = g.superoperator();
        for (idx, v) in spec.eigenvectors().iter().enumerate() {
            let vec = vectorize(v);
            let residual = &l * &vec - vec.map(|z| z * spec.eigenvalues[idx]);
            assert!(residual.iter().all(|z| cabs(*z) < 1e-10));
        }
        // trace preservation of the action
        let x = random_hermitian::<f64>(&mut rng, 3, 1.0);
        assert!(cabs(g.apply(&x).trace()) < 1e-12);
    }

    #[test]
    fn superoperator_eigenvalues_come_in_conjugate_pairs() {
        let mut rng = stream_rng(11, 7);
        let h = random_hermitian::<f64>(&mut rng, 4, 1.0);
        let spec = generator_spectrum(&Generator::new(&h).unwrap());
        let mut values: Vec<f64> = spec.eigenvalues.iter().map(|e| e.im).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = values.len();
        for i in 0..n {
            assert!((values[i] + values[n - 1 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn expectation_examples() {
        let g = Generator::new(&diag(&[0.0, 1.0])).unwrap();
        let identity = Observable::new(g.clone(), &CMatrix::identity(2, 2)).unwrap();
        let k = plus_state();
        assert!((expectation(&identity, &k).unwrap() - 1.0).abs() < 1e-12);

        let number = Observable::new(g, &diag(&[0.0, 1.0])).unwrap();
        assert!((expectation(&number, &k).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn expectation_is_affine_in_the_state() {
        let mut rng = stream_rng(11, 2);
        let h = random_hermitian::<f64>(&mut rng, 3, 1.0);
        let g = Generator::new(&h).unwrap();
        let obs = Observable::new(g, &h).unwrap();
        let k1 = DensityState::new(&random_density_matrix(&mut rng, 3)).unwrap();
        let k2 = DensityState::new(&random_density_matrix(&mut rng, 3)).unwrap();
        let mixed = k1.mix(&k2, 0.5).unwrap();
        let lhs = expectation(&obs, &mixed).unwrap();
        let rhs = 0.5 * expectation(&obs, &k1).unwrap() + 0.5 * expectation(&obs, &k2).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn observable_requires_commuting_functional() {
        let g = Generator::new(&diag(&[0.0, 1.0])).unwrap();
        let sigma_x = CMatrix::from_fn(2, 2, |i, j| {
            if i != j {
                Complex::new(1.0, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        assert!(Observable::new(g, &sigma_x).is_err());
    }

    #[test]
    fn evolution_is_a_one_parameter_group() {
        let mut rng = stream_rng(11, 3);
        let h = random_hermitian::<f64>(&mut rng, 4, 1.0);
        let g = Generator::new(&h).unwrap();
        let k0 = DensityState::new(&random_density_matrix(&mut rng, 4)).unwrap();
        for (t1, t2) in [(0.3, 0.9), (-1.1, 2.4), (5.0, -5.0)] {
            let sequential = evolve_state(&evolve_state(&k0, &g, t1).unwrap(), &g, t2).unwrap();
            let direct = evolve_state(&k0, &g, t1 + t2).unwrap();
            assert!(max_abs(&(sequential.matrix() - direct.matrix())) < 1e-9);
        }
    }

    #[test]
    fn evolution_preserves_convex_mixtures() {
        let mut rng = stream_rng(11, 4);
        let h = random_hermitian::<f64>(&mut rng, 3, 1.0);
        let g = Generator::new(&h).unwrap();
        let k1 = DensityState::new(&random_density_matrix(&mut rng, 3)).unwrap();
        let k2 = DensityState::new(&random_density_matrix(&mut rng, 3)).unwrap();
        let lambda = 0.3;
        let lhs = evolve_state(&k1.mix(&k2, lambda).unwrap(), &g, 0.8).unwrap();
        let rhs = evolve_state(&k1, &g, 0.8)
            .unwrap()
            .mix(&evolve_state(&k2, &g, 0.8).unwrap(), lambda)
            .unwrap();
        assert!(max_abs(&(lhs.matrix() - rhs.matrix())) < 1e-10);
    }

    #[test]
    fn invariant_observable_is_constant_along_the_flow() {
        let mut rng = stream_rng(11, 5);
        let h = random_hermitian::<f64>(&mut rng, 3, 1.0);
        let g = Generator::new(&h).unwrap();
        // any polynomial of H commutes with H
        let functional = &h * &h + &h * Complex::new(0.25, 0.0);
        let obs = Observable::new(g.clone(), &functional).unwrap();
        let k0 = DensityState::new(&random_density_matrix(&mut rng, 3)).unwrap();
        let at0 = expectation(&obs, &k0).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let kt = evolve_state(&k0, &g, t).unwrap();
            assert!((expectation(&obs, &kt).unwrap() - at0).abs() < 1e-9);
        }
    }

    #[test]
    fn quotient_with_no_functionals_is_a_single_class() {
        let set = FiniteConvexStateSet::new(vec![
            RVector::from_vec(vec![1.0, 0.0]),
            RVector::from_vec(vec![0.0, 1.0]),
            RVector::from_vec(vec![0.5, 0.5]),
        ])
        .unwrap();
        let classes = quotient_by_observables(&set, &[]).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].members.len(), 3);
    }

    #[test]
    fn quotient_by_sigma_z_on_bloch_samples() {
        // points are Bloch vectors (x, y, z); Tr(sigma_z rho) reads the z coordinate
        let mut rng = stream_rng(11, 6);
        let mut points = Vec::new();
        for _ in 0..40 {
            let v = crate::sampling::random_real_vector::<f64>(&mut rng, 3, 1.0);
            let n = v.norm();
            points.push(v.map(|x| x / n));
        }
        // inject an exact duplicate z-value
        let mut dup = points[0].clone();
        dup[0] = -dup[0];
        points.push(dup);
        let set = FiniteConvexStateSet::new(points.clone()).unwrap();
        let z_functional = RVector::from_vec(vec![0.0, 0.0, 1.0]);
        let classes = quotient_by_observables(&set, &[z_functional]).unwrap();
        for class in &classes {
            assert!(class.values.len() == 1);
            assert!(class.values[0] >= -1.0 - 1e-9 && class.values[0] <= 1.0 + 1e-9);
            for &m in &class.members {
                assert!((points[m][2] - class.values[0]).abs() <= tol::FUNCTIONAL_EQUALITY);
            }
        }
        let total: usize = classes.iter().map(|c| c.members.len()).sum();
        assert_eq!(total, 41);
        assert!(classes.len() < 41); // the duplicate collapsed
    }
}
