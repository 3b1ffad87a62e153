//! Sampled identity checks for a Jordan algebra kind, shared by the
//! `jordan-check` scenario and the acceptance suite.

use std::sync::Arc;

use crate::sampling::stream_rng;
use crate::scalar::{real, Real};
use super::{
    cone_member, jordan_power, jordan_product, quadratic_apply, quadratic_map, random_element,
    random_interior_point, spectrum, sqrt_element, structural_identity_check, JordanAlgebra,
    JordanKind,
};

#[derive(Debug, Clone)]
pub struct SuiteReport<T: Real> {
    pub kind: JordanKind,
    pub samples: usize,
    /// Max of `||[R_x, R_{x o x}] y|| / (||x||^2 ||x o x|| ||y||)`.
    pub max_jordan_identity: T,
    /// Max residual of `(x o x) o x = x o (x o x)` and `x^m o x^n = x^{m+n}`
    /// on unit-normalized samples.
    pub max_power_associativity: T,
    /// Max of `||Q_a 1 - a o a|| / max(1, ||a||^2)`.
    pub max_q_unit: T,
    /// Max of residual/threshold for `Q_{Q_b a} = Q_b Q_a Q_b`.
    pub max_fundamental_ratio: T,
    /// Worst min eigenvalue of `Q_a x` over cone members `x`.
    pub worst_cone_eigenvalue: T,
    /// Max of `||Q_s 1 - a|| / max(1, ||a||)` with `s = sqrt(a)`.
    pub max_homogeneity: T,
    /// Worst violation of `||x o y|| <= ||x|| ||y||` (spectral norms).
    pub max_norm_submult: T,
    /// Worst relative violation of `||x o x|| = ||x||^2`.
    pub max_norm_square: T,
    /// Worst violation of `||x o x|| <= ||x o x + y o y||`.
    pub max_norm_monotone: T,
    pub pass: bool,
}

/// Run all sampled identities on `samples` random pairs.
pub fn identity_suite<T: Real>(
    alg: &Arc<JordanAlgebra<T>>,
    samples: usize,
    seed: u64,
) -> SuiteReport<T> {
    let mut rng = stream_rng(seed, alg.dim() as u64);
    let scale = real::<T>(1.0 / (alg.dim() as f64).sqrt());

    let mut max_jordan_identity = T::zero();
    let mut max_power = T::zero();
    let mut max_q_unit = T::zero();
    let mut max_fundamental_ratio = T::zero();
    let mut worst_cone = T::max_value().unwrap_or(T::one());
    let mut max_homogeneity = T::zero();
    let mut max_submult = T::zero();
    let mut max_square = T::zero();
    let mut max_monotone = T::zero();

    let spectral_norm = |x: &super::JordanElement<T>| -> T {
        spectrum(x)
            .iter()
            .fold(T::zero(), |acc, e| acc.max(e.abs()))
    };

    for _ in 0..samples {
        let x = random_element(alg, &mut rng, scale);
        let y = random_element(alg, &mut rng, scale);

        // Jordan identity via the commutator of multiplication operators
        let xx = jordan_product(&x, &x).expect("same algebra");
        let r_x = alg.mult_operator(x.coords());
        let r_xx = alg.mult_operator(xx.coords());
        let commut = &r_x * &r_xx - &r_xx * &r_x;
        let denom = x.norm() * x.norm() * xx.norm() * y.norm();
        if denom > T::zero() {
            max_jordan_identity = max_jordan_identity.max((&commut * y.coords()).norm() / denom);
        }

        // power associativity on the normalized sample
        let xn = x.scale(T::one() / x.norm().max(real(1e-300)));
        let sq = jordan_product(&xn, &xn).expect("same algebra");
        let left = jordan_product(&sq, &xn).expect("same algebra");
        let right = jordan_product(&xn, &sq).expect("same algebra");
        max_power = max_power.max((left.coords() - right.coords()).norm());
        for (m, n) in [(1usize, 1usize), (1, 2), (2, 2), (1, 3), (2, 3), (1, 4)] {
            let lhs = jordan_product(
                &jordan_power(&xn, m).expect("powers"),
                &jordan_power(&xn, n).expect("powers"),
            )
            .expect("same algebra");
            let rhs = jordan_power(&xn, m + n).expect("powers");
            max_power = max_power.max((lhs.coords() - rhs.coords()).norm());
        }

        // Q_a(1) = a o a
        let q_one = quadratic_apply(&x, &alg.unit()).expect("same algebra");
        let q_unit_resid =
            (q_one.coords() - xx.coords()).norm() / T::one().max(x.norm() * x.norm());
        max_q_unit = max_q_unit.max(q_unit_resid);

        // fundamental identity through the structural check with B = Q_b
        let check = structural_identity_check(&quadratic_map(&y), &x).expect("same algebra");
        max_fundamental_ratio = max_fundamental_ratio.max(check.residual / check.threshold);

        // cone preservation
        let member = jordan_product(&y, &y).expect("same algebra");
        let image = quadratic_apply(&x, &member).expect("same algebra");
        let min_eig = spectrum(&image)
            .first()
            .copied()
            .unwrap_or(T::zero());
        worst_cone = worst_cone.min(min_eig);

        // homogeneity witness on an interior point
        let a = random_interior_point(alg, &mut rng);
        let s = sqrt_element(&a).expect("interior point");
        let back = quadratic_apply(&s, &alg.unit()).expect("same algebra");
        max_homogeneity = max_homogeneity
            .max((back.coords() - a.coords()).norm() / T::one().max(a.norm()));
        debug_assert!(cone_member(&a));

        // JB norm inequalities in the spectral norm
        let nx = spectral_norm(&x);
        let ny = spectral_norm(&y);
        let nxy = spectral_norm(&jordan_product(&x, &y).expect("same algebra"));
        max_submult = max_submult.max(nxy - nx * ny);
        let nxx = spectral_norm(&xx);
        max_square = max_square.max((nxx - nx * nx).abs() / T::one().max(nx * nx));
        let yy = jordan_product(&y, &y).expect("same algebra");
        let sum_sq = spectral_norm(&xx.add(&yy).expect("same algebra"));
        max_monotone = max_monotone.max(nxx - sum_sq);
    }

    let pass = max_jordan_identity <= real(1e-9)
        && max_power <= real(1e-10)
        && max_q_unit <= real(1e-9)
        && max_fundamental_ratio <= T::one()
        && worst_cone >= real(-1e-9)
        && max_homogeneity <= real(1e-9)
        && max_submult <= real(1e-9)
        && max_square <= real(1e-9)
        && max_monotone <= real(1e-9);

    SuiteReport {
        kind: alg.kind(),
        samples,
        max_jordan_identity,
        max_power_associativity: max_power,
        max_q_unit,
        max_fundamental_ratio,
        worst_cone_eigenvalue: worst_cone,
        max_homogeneity,
        max_norm_submult: max_submult,
        max_norm_square: max_square,
        max_norm_monotone: max_monotone,
        pass,
    }
}
