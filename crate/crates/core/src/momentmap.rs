//! Coadjoint orbits of `U(n)`, the moment map, the classical-to-quantum
//! quotient `nu`, and its equivariance and flow consistency: the
//! elimination of redundant classical states.
//!
//! Orbit points are Hermitian matrices with a fixed spectrum; `nu`
//! averages them over a finite ensemble and lands in the convex envelope
//! of the orbit (eigenvalues majorized by the orbit spectrum).

use std::sync::Arc;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{
    frobenius, hermitian_basis, hermitian_eigen, validate_hermitian, CMatrix,
};
use crate::sampling::haar_unitary;
use crate::scalar::{approx_f64, real, Real};
use crate::statespace::Generator;
use crate::tol;

/// `U(n)` coadjoint orbit: Hermitian matrices with eigenvalues
/// `lambda_1 > ... > lambda_r` of multiplicities `k_1, ..., k_r`,
/// homeomorphic to the flag manifold `U(n)/U(k_1) x ... x U(k_r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoadjointOrbit<T: Real> {
    n: usize,
    eigenvalues: Vec<T>,
    multiplicities: Vec<usize>,
}

impl<T: Real> CoadjointOrbit<T> {
    pub fn new(eigenvalues: Vec<T>, multiplicities: Vec<usize>) -> Result<Arc<Self>> {
        if eigenvalues.is_empty() || eigenvalues.len() != multiplicities.len() {
            return Err(Error::InvalidInput(
                "need matching, nonempty eigenvalue and multiplicity lists".into(),
            ));
        }
        for w in eigenvalues.windows(2) {
            if w[0] <= w[1] {
                return Err(Error::InvalidInput(
                    "orbit eigenvalues must be strictly decreasing".into(),
                ));
            }
        }
        if multiplicities.contains(&0) {
            return Err(Error::InvalidInput("multiplicities must be positive".into()));
        }
        let n = multiplicities.iter().sum();
        Ok(Arc::new(CoadjointOrbit {
            n,
            eigenvalues,
            multiplicities,
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Spectrum in descending order with multiplicity, length `n`.
    pub fn spectrum_descending(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n);
        for (l, &k) in self.eigenvalues.iter().zip(self.multiplicities.iter()) {
            for _ in 0..k {
                out.push(*l);
            }
        }
        out
    }

    /// Number of diagonal placements, `n! / (k_1! ... k_r!)`.
    pub fn diagonal_count(&self) -> usize {
        let mut count = factorial(self.n);
        for &k in &self.multiplicities {
            count /= factorial(k);
        }
        count
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product::<usize>().max(1)
}

/// Point on a coadjoint orbit; for matrix orbits the moment map is the
/// identity embedding into the dual Lie algebra.
#[derive(Debug, Clone)]
pub struct OrbitPoint<T: Real> {
    orbit: Arc<CoadjointOrbit<T>>,
    matrix: CMatrix<T>,
}

impl<T: Real> OrbitPoint<T> {
    pub fn new(orbit: &Arc<CoadjointOrbit<T>>, matrix: &CMatrix<T>) -> Result<Self> {
        let matrix = validate_hermitian(matrix)?;
        if matrix.nrows() != orbit.n() {
            return Err(Error::DimensionMismatch {
                expected: orbit.n(),
                got: matrix.nrows(),
            });
        }
        let (eigs, _) = hermitian_eigen(&matrix);
        let mut expected = orbit.spectrum_descending();
        expected.reverse(); // ascending like the eigensolver output
        for (have, want) in eigs.iter().zip(expected.iter()) {
            if (*have - *want).abs() > real(tol::ORBIT_SPECTRUM) {
                return Err(Error::InvalidInput(format!(
                    "matrix spectrum does not match the orbit: {:.6} vs {:.6}",
                    approx_f64(*have),
                    approx_f64(*want)
                )));
            }
        }
        Ok(OrbitPoint {
            orbit: Arc::clone(orbit),
            matrix,
        })
    }

    /// Haar-random orbit point `U diag(spectrum) U^H`.
    pub fn random(orbit: &Arc<CoadjointOrbit<T>>, rng: &mut impl rand::Rng) -> Self {
        let u = haar_unitary::<T>(rng, orbit.n());
        let spectrum = orbit.spectrum_descending();
        let d = CMatrix::from_fn(orbit.n(), orbit.n(), |i, j| {
            if i == j {
                Complex::new(spectrum[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        OrbitPoint {
            orbit: Arc::clone(orbit),
            matrix: &u * d * u.adjoint(),
        }
    }

    pub fn orbit(&self) -> &Arc<CoadjointOrbit<T>> {
        &self.orbit
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }
}

/// Finite-support probability distribution on one orbit.
#[derive(Debug, Clone)]
pub struct ClassicalEnsemble<T: Real> {
    entries: Vec<(T, OrbitPoint<T>)>,
}

impl<T: Real> ClassicalEnsemble<T> {
    pub fn new(entries: Vec<(T, OrbitPoint<T>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("ensemble needs at least one point".into()));
        }
        let orbit = entries[0].1.orbit().clone();
        if entries.iter().any(|(_, p)| **p.orbit() != *orbit) {
            return Err(Error::InvalidInput("all points must lie on one orbit".into()));
        }
        let mut sum = T::zero();
        for (w, _) in &entries {
            if *w < T::zero() {
                return Err(Error::InvalidInput("weights must be nonnegative".into()));
            }
            sum += *w;
        }
        if (sum - T::one()).abs() > real(tol::TRACE_ONE) {
            return Err(Error::InvalidInput(format!(
                "weights sum to {:.17}, expected 1",
                approx_f64(sum)
            )));
        }
        Ok(ClassicalEnsemble { entries })
    }

    pub fn entries(&self) -> &[(T, OrbitPoint<T>)] {
        &self.entries
    }

    pub fn orbit(&self) -> &Arc<CoadjointOrbit<T>> {
        self.entries[0].1.orbit()
    }

    pub fn n(&self) -> usize {
        self.orbit().n()
    }

    /// Pointwise coadjoint flow `K_i(t) = e^{iXt} K_i e^{-iXt}`.
    pub fn evolve(&self, x: &LieAlgebraElement<T>, t: T) -> Result<Self> {
        let g = Generator::new(&x.matrix)?;
        let mut entries = Vec::with_capacity(self.entries.len());
        for (w, p) in &self.entries {
            let moved = g.evolve_hermitian(p.matrix(), t)?;
            entries.push((*w, OrbitPoint::new(p.orbit(), &moved)?));
        }
        Ok(ClassicalEnsemble { entries })
    }
}

/// Element of `u(n)` identified with a Hermitian matrix (the `i`-multiplied
/// skew element); generates the Hamiltonian function `H_X(K) = tr(X K)`.
#[derive(Debug, Clone)]
pub struct LieAlgebraElement<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> LieAlgebraElement<T> {
    pub fn new(matrix: &CMatrix<T>) -> Result<Self> {
        Ok(LieAlgebraElement {
            matrix: validate_hermitian(matrix)?,
        })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }
}

/// `H_X(K) = tr(X K)`.
pub fn hamiltonian_function<T: Real>(x: &LieAlgebraElement<T>, p: &OrbitPoint<T>) -> Result<T> {
    if x.matrix.nrows() != p.matrix().nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.matrix.nrows(),
            got: p.matrix().nrows(),
        });
    }
    Ok((&x.matrix * p.matrix()).trace().re)
}

/// `nu(rho) = sum w_i K_i`; checked to satisfy the majorization constraint
/// of the orbit's convex envelope.
pub fn nu<T: Real>(rho: &ClassicalEnsemble<T>) -> Result<CMatrix<T>> {
    let n = rho.n();
    let mut out = CMatrix::<T>::zeros(n, n);
    for (w, p) in rho.entries() {
        out += p.matrix().map(|z| z.scale(*w));
    }
    let violation = majorization_violation(rho.orbit(), &out);
    if violation > real(tol::ORBIT_SPECTRUM) {
        return Err(Error::Numeric(format!(
            "nu image violates majorization by {:.3e}",
            approx_f64(violation)
        )));
    }
    Ok(out)
}

/// Worst violation of "sorted partial sums of eig(nu) stay below those of
/// the orbit spectrum, with equal totals".
pub fn majorization_violation<T: Real>(orbit: &Arc<CoadjointOrbit<T>>, m: &CMatrix<T>) -> T {
    let (eigs, _) = hermitian_eigen(m);
    let mut descending: Vec<T> = eigs.iter().copied().collect();
    descending.reverse();
    let orbit_desc = orbit.spectrum_descending();
    let mut worst = T::zero();
    let mut partial_m = T::zero();
    let mut partial_o = T::zero();
    for i in 0..descending.len() {
        partial_m += descending[i];
        partial_o += orbit_desc[i];
        if i + 1 < descending.len() {
            worst = worst.max(partial_m - partial_o);
        } else {
            worst = worst.max((partial_m - partial_o).abs());
        }
    }
    worst
}

#[derive(Debug, Clone)]
pub enum Equivalence<T: Real> {
    Equivalent,
    Distinct {
        /// Hermitian basis element with the largest expectation gap.
        witness: CMatrix<T>,
        gap: T,
    },
}

/// Two ensembles are equivalent iff their moment images coincide; a
/// distinguishing `X` is produced otherwise, with the iff verified on the
/// finite Hermitian basis in both directions.
pub fn equivalence_check<T: Real>(
    rho1: &ClassicalEnsemble<T>,
    rho2: &ClassicalEnsemble<T>,
) -> Result<Equivalence<T>> {
    if rho1.n() != rho2.n() {
        return Err(Error::DimensionMismatch {
            expected: rho1.n(),
            got: rho2.n(),
        });
    }
    let nu1 = nu(rho1)?;
    let nu2 = nu(rho2)?;
    let difference = &nu1 - &nu2;
    let ensemble_expectation = |rho: &ClassicalEnsemble<T>, b: &CMatrix<T>| -> T {
        rho.entries()
            .iter()
            .fold(T::zero(), |acc, (w, p)| acc + *w * (b * p.matrix()).trace().re)
    };
    let mut best_gap = T::zero();
    let mut witness: Option<CMatrix<T>> = None;
    for b in hermitian_basis::<T>(rho1.n()) {
        // the two routes must agree: tr(B nu) vs the ensemble average of H_B
        let via_nu = (&b * &difference).trace().re;
        let via_ensemble = ensemble_expectation(rho1, &b) - ensemble_expectation(rho2, &b);
        if (via_nu - via_ensemble).abs() > real(1e-9) {
            return Err(Error::Numeric(
                "moment image and ensemble expectations disagree".into(),
            ));
        }
        if via_nu.abs() > best_gap {
            best_gap = via_nu.abs();
            witness = Some(b);
        }
    }
    if frobenius(&difference) <= real(tol::NU_EQUALITY) {
        Ok(Equivalence::Equivalent)
    } else {
        let witness = witness.ok_or_else(|| Error::Numeric("no witness found".into()))?;
        Ok(Equivalence::Distinct {
            witness,
            gap: best_gap,
        })
    }
}

/// `|| nu(rho(t)) - evolve(nu(rho), X, t) ||_F`: the coadjoint flow and the
/// state-space flow of the moment image must agree (G-equivariance).
pub fn flow_consistency<T: Real>(
    x: &LieAlgebraElement<T>,
    rho: &ClassicalEnsemble<T>,
    t: T,
) -> Result<T> {
    if x.matrix.nrows() != rho.n() {
        return Err(Error::DimensionMismatch {
            expected: rho.n(),
            got: x.matrix.nrows(),
        });
    }
    let moved = rho.evolve(x, t)?;
    let nu_of_moved = nu(&moved)?;
    let g = Generator::new(&x.matrix)?;
    let moved_nu = g.evolve_hermitian(&nu(rho)?, t)?;
    Ok(frobenius(&(&nu_of_moved - &moved_nu)))
}

/// Pure robust zero modes of a regular `X` on the orbit: the orbit points
/// diagonal in the `X` eigenbasis, one per multiset permutation of the
/// orbit spectrum.
pub fn robust_modes_on_orbit<T: Real>(
    x: &LieAlgebraElement<T>,
    orbit: &Arc<CoadjointOrbit<T>>,
) -> Result<Vec<OrbitPoint<T>>> {
    if x.matrix.nrows() != orbit.n() {
        return Err(Error::DimensionMismatch {
            expected: orbit.n(),
            got: x.matrix.nrows(),
        });
    }
    let (eigs, basis) = hermitian_eigen(&x.matrix);
    for w in 0..eigs.len().saturating_sub(1) {
        let gap = eigs[w + 1] - eigs[w];
        if gap < real(tol::SIMPLE_SPECTRUM_GAP) {
            return Err(Error::DegenerateSpectrum {
                gap: approx_f64(gap),
            });
        }
    }
    let spectrum = orbit.spectrum_descending();
    let placements = multiset_permutations(&spectrum);
    let n = orbit.n();
    let mut out = Vec::with_capacity(placements.len());
    for placement in placements {
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(placement[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        out.push(OrbitPoint::new(orbit, &(&basis * d * basis.adjoint()))?);
    }
    Ok(out)
}

/// Distinct permutations of a multiset of reals (values compared exactly;
/// orbit spectra come from exact eigenvalue lists).
fn multiset_permutations<T: Real>(values: &[T]) -> Vec<Vec<T>> {
    let mut distinct: Vec<(T, usize)> = Vec::new();
    for &v in values {
        match distinct.iter_mut().find(|(u, _)| *u == v) {
            Some((_, count)) => *count += 1,
            None => distinct.push((v, 1)),
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(values.len());
    fn recurse<T: Real>(
        distinct: &mut Vec<(T, usize)>,
        current: &mut Vec<T>,
        total: usize,
        out: &mut Vec<Vec<T>>,
    ) {
        if current.len() == total {
            out.push(current.clone());
            return;
        }
        for i in 0..distinct.len() {
            if distinct[i].1 == 0 {
                continue;
            }
            distinct[i].1 -= 1;
            current.push(distinct[i].0);
            recurse(distinct, current, total, out);
            current.pop();
            distinct[i].1 += 1;
        }
    }
    recurse(&mut distinct, &mut current, values.len(), &mut out);
    out
}

/// Alternative exact decomposition of the same moment image: rotate the
/// spectral decomposition by a random isometry (any two decompositions of
/// a density matrix are related this way). Only rank-one orbits admit the
/// construction.
pub fn resampled_decomposition<T: Real>(
    rho: &ClassicalEnsemble<T>,
    parts: usize,
    rng: &mut impl rand::Rng,
) -> Result<ClassicalEnsemble<T>> {
    let orbit = rho.orbit();
    let top_multiplicity = orbit.multiplicities()[0];
    let rank_one = orbit.eigenvalues().len() <= 2
        && top_multiplicity == 1
        && orbit
            .eigenvalues()
            .get(1)
            .is_none_or(|&l| l.abs() < real(1e-14))
        && (orbit.eigenvalues()[0] - T::one()).abs() < real(1e-14);
    if !rank_one {
        return Err(Error::InvalidInput(
            "resampling needs the rank-one projector orbit (spectrum 1, 0, ..., 0)".into(),
        ));
    }
    let n = rho.n();
    let image = nu(rho)?;
    let (eigs, basis) = hermitian_eigen(&image);
    // columns of sqrt(K): sqrt(lambda_i) v_i for the nonzero part
    let kept: Vec<usize> = (0..n).filter(|&i| eigs[i] > real(1e-13)).collect();
    if parts < kept.len() {
        return Err(Error::InvalidInput(format!(
            "need at least {} parts for rank {}",
            kept.len(),
            kept.len()
        )));
    }
    // random isometry: QR of a parts x rank complex Gaussian
    let r = kept.len();
    let iso;
    loop {
        let g = CMatrix::<T>::from_fn(parts, r, |_, _| crate::sampling::cnormal(rng));
        let qr = g.qr();
        let q = qr.q();
        let rr = qr.r();
        if (0..r).all(|i| crate::linalg::cabs(rr[(i, i)]) > real(1e-8)) {
            iso = q;
            break;
        }
    }
    // phases of R's diagonal are irrelevant: any isometry works
    let mut entries = Vec::with_capacity(parts);
    for j in 0..parts {
        let mut vec_j = crate::linalg::CVector::<T>::zeros(n);
        for (col, &i) in kept.iter().enumerate() {
            let coeff = iso[(j, col)].conj() * Complex::new(eigs[i].sqrt(), T::zero());
            vec_j += basis.column(i).map(|z| z * coeff);
        }
        let weight = vec_j.norm_squared();
        if weight < real(1e-14) {
            continue;
        }
        let normalized = vec_j.map(|z| z / Complex::new(weight.sqrt(), T::zero()));
        let projector = CMatrix::from_fn(n, n, |a, b| normalized[a] * normalized[b].conj());
        entries.push((weight, OrbitPoint::new(orbit, &projector)?));
    }
    let total = entries.iter().fold(T::zero(), |acc, (w, _)| acc + *w);
    for (w, _) in entries.iter_mut() {
        *w /= total;
    }
    ClassicalEnsemble::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, RVector};
    use crate::sampling::{random_unit_vector, stream_rng};
    use crate::statespace::{quotient_by_observables, FiniteConvexStateSet};

    fn qubit_pure_orbit() -> Arc<CoadjointOrbit<f64>> {
        CoadjointOrbit::new(vec![1.0, 0.0], vec![1, 1]).unwrap()
    }

    fn projector(v: &crate::linalg::CVector<f64>) -> CMatrix<f64> {
        CMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    fn basis_ket(n: usize, k: usize) -> crate::linalg::CVector<f64> {
        crate::linalg::CVector::from_fn(n, |i, _| {
            if i == k {
                Complex::new(1.0, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn orbit_validation() {
        assert!(CoadjointOrbit::new(vec![0.0_f64, 1.0], vec![1, 1]).is_err()); // increasing
        assert!(CoadjointOrbit::new(vec![1.0_f64], vec![0]).is_err());
        let orbit = CoadjointOrbit::new(vec![2.0_f64, 1.0], vec![1, 2]).unwrap();
        assert_eq!(orbit.n(), 3);
        assert_eq!(orbit.diagonal_count(), 3);
    }

    #[test]
    fn orbit_point_spectrum_is_enforced() {
        let orbit = qubit_pure_orbit();
        let bad = CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex::new(0.5, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        assert!(OrbitPoint::new(&orbit, &bad).is_err());
        let good = projector(&basis_ket(2, 0));
        assert!(OrbitPoint::new(&orbit, &good).is_ok());
    }

    #[test]
    fn hamiltonian_function_examples() {
        let orbit = CoadjointOrbit::new(vec![2.0_f64, 1.0], vec![1, 2]).unwrap();
        let mut rng = stream_rng(51, 0);
        let p = OrbitPoint::random(&orbit, &mut rng);
        let identity = LieAlgebraElement::new(&CMatrix::identity(3, 3)).unwrap();
        // trace is orbit-constant: sum k_i lambda_i = 2 + 1 + 1
        assert!((hamiltonian_function(&identity, &p).unwrap() - 4.0).abs() < 1e-12);

        let orbit2 = qubit_pure_orbit();
        let p0 = OrbitPoint::new(&orbit2, &projector(&basis_ket(2, 0))).unwrap();
        let x = LieAlgebraElement::new(&CMatrix::from_fn(2, 2, |i, j| {
            if i == 0 && j == 0 {
                Complex::new(1.0, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        }))
        .unwrap();
        assert!((hamiltonian_function(&x, &p0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_function_is_linear_in_x() {
        let orbit = qubit_pure_orbit();
        let mut rng = stream_rng(51, 9);
        let p = OrbitPoint::random(&orbit, &mut rng);
        let a = crate::sampling::random_hermitian::<f64>(&mut rng, 2, 1.0);
        let b = crate::sampling::random_hermitian::<f64>(&mut rng, 2, 1.0);
        let xa = LieAlgebraElement::new(&a).unwrap();
        let xb = LieAlgebraElement::new(&b).unwrap();
        let combined = LieAlgebraElement::new(&(a.map(|z| z.scale(0.7)) + b.map(|z| z.scale(-1.3)))).unwrap();
        let lhs = hamiltonian_function(&combined, &p).unwrap();
        let rhs = 0.7 * hamiltonian_function(&xa, &p).unwrap()
            - 1.3 * hamiltonian_function(&xb, &p).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn nu_of_single_point_is_the_point() {
        let orbit = qubit_pure_orbit();
        let p = OrbitPoint::new(&orbit, &projector(&basis_ket(2, 0))).unwrap();
        let rho = ClassicalEnsemble::new(vec![(1.0, p.clone())]).unwrap();
        assert!(max_abs(&(&nu(&rho).unwrap() - p.matrix())) < 1e-14);
    }

    #[test]
    fn two_decompositions_of_the_maximally_mixed_state() {
        let orbit = qubit_pure_orbit();
        let p0 = OrbitPoint::new(&orbit, &projector(&basis_ket(2, 0))).unwrap();
        let p1 = OrbitPoint::new(&orbit, &projector(&basis_ket(2, 1))).unwrap();
        let rho_z = ClassicalEnsemble::new(vec![(0.5, p0), (0.5, p1)]).unwrap();

        let plus = crate::linalg::CVector::from_vec(vec![
            Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let minus = crate::linalg::CVector::from_vec(vec![
            Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let rho_x = ClassicalEnsemble::new(vec![
            (0.5, OrbitPoint::new(&orbit, &projector(&plus)).unwrap()),
            (0.5, OrbitPoint::new(&orbit, &projector(&minus)).unwrap()),
        ])
        .unwrap();

        let half_identity = CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex::new(0.5, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        assert!(max_abs(&(&nu(&rho_z).unwrap() - &half_identity)) < 1e-14);
        assert!(max_abs(&(&nu(&rho_x).unwrap() - &half_identity)) < 1e-14);
        assert!(matches!(
            equivalence_check(&rho_z, &rho_x).unwrap(),
            Equivalence::Equivalent
        ));
    }

    #[test]
    fn haar_average_approaches_the_maximally_mixed_state() {
        let orbit = qubit_pure_orbit();
        let mut rng = stream_rng(51, 1);
        let samples = 10_000;
        let w = 1.0 / samples as f64;
        let entries: Vec<(f64, OrbitPoint<f64>)> = (0..samples)
            .map(|_| {
                let v = random_unit_vector::<f64>(&mut rng, 2);
                (w, OrbitPoint::new(&orbit, &projector(&v)).unwrap())
            })
            .collect();
        let rho = ClassicalEnsemble::new(entries).unwrap();
        let image = nu(&rho).unwrap();
        let half_identity = CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex::new(0.5, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        // 3 standard errors of the Frobenius distance for Haar projectors
        let bound = 3.0 / (2.0 * samples as f64).sqrt();
        assert!(frobenius(&(&image - &half_identity)) <= bound);
    }

    #[test]
    fn nu_is_affine() {
        let orbit = qubit_pure_orbit();
        let mut rng = stream_rng(51, 2);
        let make = |rng: &mut rand_chacha::ChaCha8Rng| {
            let v1 = random_unit_vector::<f64>(rng, 2);
            let v2 = random_unit_vector::<f64>(rng, 2);
            ClassicalEnsemble::new(vec![
                (0.3, OrbitPoint::new(&orbit, &projector(&v1)).unwrap()),
                (0.7, OrbitPoint::new(&orbit, &projector(&v2)).unwrap()),
            ])
            .unwrap()
        };
        let rho1 = make(&mut rng);
        let rho2 = make(&mut rng);
        let lambda = 0.4;
        let mut blended = Vec::new();
        for (w, p) in rho1.entries() {
            blended.push((w * lambda, p.clone()));
        }
        for (w, p) in rho2.entries() {
            blended.push((w * (1.0 - lambda), p.clone()));
        }
        let mixed = ClassicalEnsemble::new(blended).unwrap();
        let expected = nu(&rho1).unwrap().map(|z| z.scale(lambda))
            + nu(&rho2).unwrap().map(|z| z.scale(1.0 - lambda));
        assert!(max_abs(&(&nu(&mixed).unwrap() - &expected)) < 1e-12);
    }

    #[test]
    fn distinct_ensembles_yield_a_witness() {
        let orbit = qubit_pure_orbit();
        let p0 = OrbitPoint::new(&orbit, &projector(&basis_ket(2, 0))).unwrap();
        let plus = crate::linalg::CVector::from_vec(vec![
            Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let pp = OrbitPoint::new(&orbit, &projector(&plus)).unwrap();
        let rho1 = ClassicalEnsemble::new(vec![(1.0, p0)]).unwrap();
        let rho2 = ClassicalEnsemble::new(vec![(1.0, pp)]).unwrap();
        match equivalence_check(&rho1, &rho2).unwrap() {
            Equivalence::Distinct { witness, gap } => {
                assert!(gap > 0.4);
                let d = nu(&rho1).unwrap() - nu(&rho2).unwrap();
                assert!(((&witness * &d).trace().re.abs() - gap).abs() < 1e-12);
            }
            Equivalence::Equivalent => panic!("ensembles are distinct"),
        }
    }

    #[test]
    fn resampled_decompositions_share_the_moment_image() {
        let orbit = CoadjointOrbit::new(vec![1.0_f64, 0.0], vec![1, 2]).unwrap();
        let mut rng = stream_rng(51, 3);
        let entries: Vec<(f64, OrbitPoint<f64>)> = (0..4)
            .map(|_| {
                let v = random_unit_vector::<f64>(&mut rng, 3);
                (0.25, OrbitPoint::new(&orbit, &projector(&v)).unwrap())
            })
            .collect();
        let rho = ClassicalEnsemble::new(entries).unwrap();
        let other = resampled_decomposition(&rho, 5, &mut rng).unwrap();
        assert!(max_abs(&(&nu(&rho).unwrap() - &nu(&other).unwrap())) < 1e-12);
        assert!(matches!(
            equivalence_check(&rho, &other).unwrap(),
            Equivalence::Equivalent
        ));
    }

    #[test]
    fn flow_consistency_examples() {
        // commuting data: residual vanishes and nu is constant
        let orbit = qubit_pure_orbit();
        let p0 = OrbitPoint::new(&orbit, &projector(&basis_ket(2, 0))).unwrap();
        let rho = ClassicalEnsemble::new(vec![(1.0, p0)]).unwrap();
        let x = LieAlgebraElement::new(&CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex::new(i as f64, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        }))
        .unwrap();
        assert!(flow_consistency(&x, &rho, 1.0).unwrap() < 1e-12);

        // plus state under diag(0,1)
        let plus = crate::linalg::CVector::from_vec(vec![
            Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let rho_plus = ClassicalEnsemble::new(vec![(
            1.0,
            OrbitPoint::new(&orbit, &projector(&plus)).unwrap(),
        )])
        .unwrap();
        assert!(flow_consistency(&x, &rho_plus, 1.0).unwrap() < 1e-9);
    }

    #[test]
    fn equivariance_under_random_unitaries() {
        let orbit = qubit_pure_orbit();
        let mut rng = stream_rng(51, 4);
        let v1 = random_unit_vector::<f64>(&mut rng, 2);
        let v2 = random_unit_vector::<f64>(&mut rng, 2);
        let rho = ClassicalEnsemble::new(vec![
            (0.6, OrbitPoint::new(&orbit, &projector(&v1)).unwrap()),
            (0.4, OrbitPoint::new(&orbit, &projector(&v2)).unwrap()),
        ])
        .unwrap();
        let g = crate::sampling::haar_unitary::<f64>(&mut rng, 2);
        let rotated_entries: Vec<(f64, OrbitPoint<f64>)> = rho
            .entries()
            .iter()
            .map(|(w, p)| {
                (
                    *w,
                    OrbitPoint::new(&orbit, &(&g * p.matrix() * g.adjoint())).unwrap(),
                )
            })
            .collect();
        let rotated = ClassicalEnsemble::new(rotated_entries).unwrap();
        let lhs = nu(&rotated).unwrap();
        let rhs = &g * nu(&rho).unwrap() * g.adjoint();
        assert!(max_abs(&(&lhs - &rhs)) < 1e-10);
    }

    #[test]
    fn flow_preserves_the_orbit_spectrum() {
        let orbit = CoadjointOrbit::new(vec![1.0_f64, 0.0], vec![1, 2]).unwrap();
        let mut rng = stream_rng(51, 5);
        let v = random_unit_vector::<f64>(&mut rng, 3);
        let rho = ClassicalEnsemble::new(vec![(
            1.0,
            OrbitPoint::new(&orbit, &projector(&v)).unwrap(),
        )])
        .unwrap();
        let x = LieAlgebraElement::new(&crate::sampling::random_hermitian(&mut rng, 3, 1.0)).unwrap();
        for t in [0.3, 1.0, 3.0] {
            // evolve() revalidates each moved point against the orbit
            assert!(rho.evolve(&x, t).is_ok());
        }
    }

    #[test]
    fn robust_modes_are_the_diagonal_placements() {
        let orbit = qubit_pure_orbit();
        let x = LieAlgebraElement::new(&CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex::new(i as f64, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        }))
        .unwrap();
        let modes = robust_modes_on_orbit(&x, &orbit).unwrap();
        assert_eq!(modes.len(), 2);

        let orbit3 = CoadjointOrbit::new(vec![1.0_f64, 0.0], vec![1, 2]).unwrap();
        let mut rng = stream_rng(51, 6);
        let h = crate::sampling::random_hermitian::<f64>(&mut rng, 3, 1.0);
        let x3 = LieAlgebraElement::new(&h).unwrap();
        let modes3 = robust_modes_on_orbit(&x3, &orbit3).unwrap();
        assert_eq!(modes3.len(), 3);

        // the flow fixes every mode
        for mode in &modes3 {
            let g = Generator::new(&h).unwrap();
            let moved = g.evolve_hermitian(mode.matrix(), 1.7).unwrap();
            assert!(max_abs(&(&moved - mode.matrix())) < 1e-9);
        }
    }

    #[test]
    fn degenerate_x_is_rejected() {
        let orbit = qubit_pure_orbit();
        let x = LieAlgebraElement::new(&CMatrix::identity(2, 2)).unwrap();
        assert!(matches!(
            robust_modes_on_orbit(&x, &orbit),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn quotient_partition_matches_equivalence_check() {
        // encode each ensemble by its barycenter in the Hermitian-basis
        // coordinates; the redundancy quotient by the full functional basis
        // must reproduce the nu-equality partition
        let orbit = qubit_pure_orbit();
        let mut rng = stream_rng(51, 7);
        let mut ensembles = Vec::new();
        for _ in 0..6 {
            let v1 = random_unit_vector::<f64>(&mut rng, 2);
            let v2 = random_unit_vector::<f64>(&mut rng, 2);
            let rho = ClassicalEnsemble::new(vec![
                (0.5, OrbitPoint::new(&orbit, &projector(&v1)).unwrap()),
                (0.5, OrbitPoint::new(&orbit, &projector(&v2)).unwrap()),
            ])
            .unwrap();
            let resampled = resampled_decomposition(&rho, 3, &mut rng).unwrap();
            ensembles.push(rho);
            ensembles.push(resampled);
        }
        let points: Vec<RVector<f64>> = ensembles
            .iter()
            .map(|r| crate::linalg::hermitian_coords(&nu(r).unwrap()))
            .collect();
        let set = FiniteConvexStateSet::new(points).unwrap();
        let functionals: Vec<RVector<f64>> = (0..4)
            .map(|k| {
                let mut f = RVector::zeros(4);
                f[k] = 1.0;
                f
            })
            .collect();
        let classes = quotient_by_observables(&set, &functionals).unwrap();
        // pairs (2i, 2i+1) are equivalent by construction
        for class in &classes {
            for &m in &class.members {
                let partner = if m % 2 == 0 { m + 1 } else { m - 1 };
                assert!(class.members.contains(&partner));
            }
        }
        for (i, a) in ensembles.iter().enumerate() {
            for (j, b) in ensembles.iter().enumerate().skip(i + 1) {
                let same_class = classes
                    .iter()
                    .any(|c| c.members.contains(&i) && c.members.contains(&j));
                let equivalent = matches!(
                    equivalence_check(a, b).unwrap(),
                    Equivalence::Equivalent
                );
                assert_eq!(same_class, equivalent, "pair ({i}, {j})");
            }
        }
    }
}
