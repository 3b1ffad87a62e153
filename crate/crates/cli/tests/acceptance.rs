//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with the measured values (run with `--nocapture` to see them).
//!
//! Criterion 8 is known to fail as pinned: a bump with k-support width 0.2
//! carries an intrinsic position width far beyond the 0.02*tau window
//! margin at tau = 200, so the outside mass sits near 0.17 instead of
//! 1e-4. The test asserts the stated thresholds anyway and reports the
//! measured numbers.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use statecone::decoherence::{
    born_probabilities, cesaro_project, ensemble_average, AdiabaticParams, CesaroMode,
    EnsembleMode, EnsembleSpec, LoopProfile,
};
use statecone::excitations::{essential_support_check, ElementarySpace, Wavepacket};
use statecone::jordan::{derivation_kernel, derivation_space, suite::identity_suite, JordanAlgebra};
use statecone::lfunc::{
    coherent_state, hbar_scan, l_evolution_check, l_functional, StateFamily, TruncatedFock,
};
use statecone::linalg::{cabs, frobenius, hermitian_basis, hermitian_eigen, phase, CMatrix, CVector, RMatrix};
use statecone::momentmap::{
    equivalence_check, flow_consistency, nu, resampled_decomposition, ClassicalEnsemble,
    CoadjointOrbit, Equivalence, LieAlgebraElement, OrbitPoint,
};
use statecone::sampling::{
    normal, random_density_matrix, random_hermitian, random_unit_vector, stream_rng,
};
use statecone::statespace::{DensityState, Generator};

fn diag(entries: &[f64]) -> CMatrix<f64> {
    CMatrix::from_fn(entries.len(), entries.len(), |i, j| {
        if i == j {
            Complex64::new(entries[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn plus_state() -> DensityState<f64> {
    DensityState::new(&CMatrix::from_fn(2, 2, |_, _| Complex64::new(0.5, 0.0))).unwrap()
}

fn simple_spectrum(rng: &mut statecone::sampling::ChaCha8Rng, dim: usize) -> CMatrix<f64> {
    loop {
        let h = random_hermitian::<f64>(rng, dim, 1.0);
        let (eigs, _) = hermitian_eigen(&h);
        if (1..dim).all(|i| eigs[i] - eigs[i - 1] > 1e-3) {
            return h;
        }
    }
}

#[test]
fn criterion_1_born_rule_recovery() {
    let started = Instant::now();
    let mut worst_diag = 0.0_f64;
    let mut worst_sum = 0.0_f64;
    let mut count = 0;
    'outer: for dim in 2..=6usize {
        for sys in 0..20u64 {
            if count >= 100 {
                break 'outer;
            }
            let mut rng = stream_rng(100 + dim as u64, sys);
            let h = simple_spectrum(&mut rng, dim);
            let g = Generator::new(&h).unwrap();
            let k = DensityState::new(&random_density_matrix(&mut rng, dim)).unwrap();
            let table = born_probabilities(&g, &k).unwrap();
            let probs = table.probabilities();
            worst_sum = worst_sum.max((probs.iter().sum::<f64>() - 1.0).abs());
            // independent route: the diagonal of K in the energy-sorted basis
            let (_, basis) = hermitian_eigen(&h);
            let tilde = basis.adjoint() * k.matrix() * &basis;
            for (level, p) in probs.iter().enumerate() {
                worst_diag = worst_diag.max((tilde[(level, level)].re - p).abs());
            }
            count += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_diag <= 1e-10 && worst_sum <= 1e-10;
    println!(
        "criterion 1 (Born-rule recovery): {} - diag residual {worst_diag:.3e}, sum residual {worst_sum:.3e}, {count} systems, {elapsed:.2} s",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(worst_diag <= 1e-10);
    assert!(worst_sum <= 1e-10);
}

#[test]
fn criterion_2_decoherence_ensemble() {
    let started = Instant::now();
    let g = Generator::new(&diag(&[0.0, 1.0])).unwrap();
    let k0 = plus_state();
    let params = AdiabaticParams {
        g0: 1.0,
        rate: 1e-2,
        profile: LoopProfile::SinePi,
    };
    // master seed 7: documented choice for the two-sample rate comparison
    let spec = EnsembleSpec {
        n_paths: 2000,
        perturbation_scale: 1.0,
        master_seed: 7,
        mode: EnsembleMode::AdiabaticFormula,
        serial: false,
    };
    let formula = ensemble_average(&g, &params, &spec, &k0).unwrap();
    assert!(
        formula.mean_offdiag_abs <= 0.05,
        "mean offdiag {}",
        formula.mean_offdiag_abs
    );

    // diagonals exact in formula mode (bit-for-bit in the eigenbasis)
    let (_, u0) = hermitian_eigen(g.hamiltonian());
    let tilde0 = u0.adjoint() * k0.matrix() * &u0;
    for i in 0..2 {
        assert_eq!(formula.mean_eigenbasis[(i, i)], tilde0[(i, i)]);
    }

    // phase-averaging oracle: same ensemble, independent 2x2 gap formula
    // and fixed-step Simpson quadrature
    let mut phasor_sum = Complex64::new(0.0, 0.0);
    for path in 0..spec.n_paths {
        let mut rng = stream_rng(spec.master_seed, path as u64);
        let v = random_hermitian::<f64>(&mut rng, 2, 1.0);
        let gap = |g_var: f64| -> f64 {
            let s = (std::f64::consts::PI * g_var).sin();
            let m00 = 0.0 + s * v[(0, 0)].re;
            let m11 = 1.0 + s * v[(1, 1)].re;
            let m01 = Complex64::new(s * v[(0, 1)].re, s * v[(0, 1)].im);
            ((m00 - m11).powi(2) + 4.0 * m01.norm_sqr()).sqrt()
        };
        let n = 4000usize;
        let h = 1.0 / n as f64;
        let mut integral = gap(0.0) + gap(1.0);
        for i in 1..n {
            integral += gap(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        integral *= h / 3.0;
        // k_01 evolves by e^{i (C_0 - C_1)/a} = e^{-i integral/a}
        phasor_sum += phase(-integral / 1e-2);
    }
    let oracle_offdiag = 0.5 * cabs(phasor_sum / Complex64::new(spec.n_paths as f64, 0.0));
    let delta = (oracle_offdiag - formula.mean_offdiag_abs).abs();
    assert!(delta <= 1e-9, "oracle disagrees by {delta:.3e}");
    assert!(oracle_offdiag <= 0.05);

    // full-ODE diagonals within 5a of formula mode on a shared 200-path set
    let small = EnsembleSpec {
        n_paths: 200,
        ..spec
    };
    let ode = ensemble_average(
        &g,
        &params,
        &EnsembleSpec {
            mode: EnsembleMode::FullOde,
            ..small
        },
        &k0,
    )
    .unwrap();
    let formula_small = ensemble_average(&g, &params, &small, &k0).unwrap();
    let drift: f64 = (0..2)
        .map(|i| (ode.mean_eigenbasis[(i, i)] - formula_small.mean_eigenbasis[(i, i)]).norm())
        .fold(0.0, f64::max);
    assert!(drift <= 5.0 * params.rate, "ODE drift {drift:.3e}");

    // deviation from P'K0 decreases when a -> a/10 (the two sampled values)
    let slow = ensemble_average(
        &g,
        &AdiabaticParams {
            rate: 1e-3,
            ..params
        },
        &spec,
        &k0,
    )
    .unwrap();
    assert!(
        slow.distance_to_projection < formula.distance_to_projection,
        "deviation did not decrease: {} -> {}",
        formula.distance_to_projection,
        slow.distance_to_projection
    );
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "criterion 2 (decoherence ensemble): PASS - offdiag {:.3e} (oracle {:.3e}), ODE drift {:.3e}, deviation {:.3e} -> {:.3e}, {elapsed:.1} s",
        formula.mean_offdiag_abs, oracle_offdiag, drift,
        formula.distance_to_projection, slow.distance_to_projection
    );
}

#[test]
fn criterion_3_cesaro_projector_decay() {
    let started = Instant::now();
    let horizons = [100.0, 1000.0, 10_000.0];
    let mut constants = [0.0_f64; 3];
    let n_gens = 10;
    for gen_idx in 0..n_gens {
        let mut rng = stream_rng(300, gen_idx);
        let h = random_hermitian::<f64>(&mut rng, 4, 1.0);
        let g = Generator::new(&h).unwrap();
        let x = random_hermitian::<f64>(&mut rng, 4, 1.0);
        let analytic = cesaro_project(&g, &x, CesaroMode::Analytic).unwrap();
        for (slot, &horizon) in horizons.iter().enumerate() {
            let numeric = cesaro_project(&g, &x, CesaroMode::Numeric { horizon }).unwrap();
            constants[slot] += horizon * frobenius(&(&numeric.matrix - &analytic.matrix));
        }
    }
    for c in constants.iter_mut() {
        *c /= n_gens as f64;
    }
    let mean = constants.iter().sum::<f64>() / 3.0;
    let max_dev = constants
        .iter()
        .map(|c| (c - mean).abs() / mean)
        .fold(0.0, f64::max);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = max_dev <= 0.2;
    println!(
        "criterion 3 (Cesaro 1/T decay): {} - fitted C {:?}, spread {max_dev:.3}, {elapsed:.1} s",
        if pass { "PASS" } else { "FAIL" },
        constants
    );
    assert!(max_dev <= 0.2, "constant spread {max_dev}");
}

#[test]
fn criterion_4_jordan_identity_suite() {
    let started = Instant::now();
    let mut kinds: Vec<std::sync::Arc<JordanAlgebra<f64>>> = Vec::new();
    for n in 2..=8 {
        kinds.push(JordanAlgebra::spin(n));
    }
    for n in 2..=4 {
        kinds.push(JordanAlgebra::herm_real(n));
        kinds.push(JordanAlgebra::herm_complex(n));
    }
    kinds.push(JordanAlgebra::albert());

    let mut worst_identity = 0.0_f64;
    let mut worst_q_unit = 0.0_f64;
    let mut worst_fundamental = 0.0_f64;
    let mut worst_cone = f64::INFINITY;
    for alg in &kinds {
        let suite = identity_suite(alg, 1000, 404);
        worst_identity = worst_identity.max(suite.max_jordan_identity);
        worst_q_unit = worst_q_unit.max(suite.max_q_unit);
        worst_fundamental = worst_fundamental.max(suite.max_fundamental_ratio);
        worst_cone = worst_cone.min(suite.worst_cone_eigenvalue);
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_identity <= 1e-9
        && worst_q_unit <= 1e-9
        && worst_fundamental <= 1.0
        && worst_cone >= -1e-9;
    println!(
        "criterion 4 (Jordan identities, {} kinds x 1000 pairs): {} - identity {worst_identity:.3e}, Q_a(1) {worst_q_unit:.3e}, fundamental ratio {worst_fundamental:.3e}, cone min {worst_cone:.3e}, {elapsed:.1} s",
        kinds.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(worst_identity <= 1e-9);
    assert!(worst_q_unit <= 1e-9);
    assert!(worst_fundamental <= 1.0);
    assert!(worst_cone >= -1e-9);
}

#[test]
fn criterion_5_derivation_dimensions() {
    let started = Instant::now();
    for (alg, expected) in [
        (JordanAlgebra::<f64>::herm_complex(2), 3usize),
        (JordanAlgebra::<f64>::herm_complex(3), 8),
    ] {
        let space = derivation_space(&alg).unwrap();
        assert_eq!(space.dimension, expected, "{:?}", alg.kind());
    }
    for n in 3..=6usize {
        let space = derivation_space(&JordanAlgebra::<f64>::spin(n)).unwrap();
        assert_eq!(space.dimension, n * (n - 1) / 2, "spin({n})");
    }
    let albert = JordanAlgebra::<f64>::albert();
    let space = derivation_space(&albert).unwrap();
    assert_eq!(space.dimension, 52);

    // generic derivations have exactly three robust zero modes
    let mut nullity3 = 0;
    let samples = 100;
    for s in 0..samples {
        let mut rng = stream_rng(500, s as u64);
        let mut d = RMatrix::<f64>::zeros(27, 27);
        for b in &space.basis {
            let coefficient = normal::<f64>(&mut rng);
            d += b.map(|x| x * coefficient);
        }
        if derivation_kernel(&albert, &d).unwrap().nullity == 3 {
            nullity3 += 1;
        }
    }
    let fraction = nullity3 as f64 / samples as f64;
    let elapsed = started.elapsed().as_secs_f64();
    let pass = fraction >= 0.95;
    println!(
        "criterion 5 (derivation dimensions): {} - albert 52, nullity-3 fraction {fraction:.2}, {elapsed:.1} s",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(fraction >= 0.95, "nullity-3 fraction {fraction}");
}

#[test]
fn criterion_6_moment_map_equivalence() {
    let started = Instant::now();
    let mut worst_basis_gap = 0.0_f64;
    let mut worst_witness = f64::INFINITY;
    let mut worst_flow = 0.0_f64;
    let mut pair_count = 0;
    for (slot, n) in [(0u64, 2usize), (1, 3)] {
        let orbit = if n == 2 {
            CoadjointOrbit::new(vec![1.0, 0.0], vec![1, 1]).unwrap()
        } else {
            CoadjointOrbit::new(vec![1.0, 0.0], vec![1, n - 1]).unwrap()
        };
        let basis = hermitian_basis::<f64>(n);
        for pair in 0..25u64 {
            let mut rng = stream_rng(600 + slot, pair);
            let projector = |v: &CVector<f64>| {
                CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
            };
            let rho = ClassicalEnsemble::new(vec![
                (
                    0.5,
                    OrbitPoint::new(&orbit, &projector(&random_unit_vector(&mut rng, n))).unwrap(),
                ),
                (
                    0.5,
                    OrbitPoint::new(&orbit, &projector(&random_unit_vector(&mut rng, n))).unwrap(),
                ),
            ])
            .unwrap();
            // exact alternative decomposition: equal nu by construction
            let partner = resampled_decomposition(&rho, 4, &mut rng).unwrap();
            let difference = nu(&rho).unwrap() - nu(&partner).unwrap();
            for b in &basis {
                worst_basis_gap = worst_basis_gap.max((b * &difference).trace().re.abs());
            }
            assert!(matches!(
                equivalence_check(&rho, &partner).unwrap(),
                Equivalence::Equivalent
            ));

            // an independent ensemble must be distinct with a witness
            let other = ClassicalEnsemble::new(vec![
                (
                    0.5,
                    OrbitPoint::new(&orbit, &projector(&random_unit_vector(&mut rng, n))).unwrap(),
                ),
                (
                    0.5,
                    OrbitPoint::new(&orbit, &projector(&random_unit_vector(&mut rng, n))).unwrap(),
                ),
            ])
            .unwrap();
            match equivalence_check(&rho, &other).unwrap() {
                Equivalence::Distinct { gap, .. } => worst_witness = worst_witness.min(gap),
                Equivalence::Equivalent => worst_witness = 0.0,
            }

            let x = LieAlgebraElement::new(&random_hermitian(&mut rng, n, 1.0)).unwrap();
            for t in [0.3, 1.0, 3.0] {
                worst_flow = worst_flow.max(flow_consistency(&x, &rho, t).unwrap());
            }
            pair_count += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_basis_gap <= 1e-12 && worst_witness > 1e-8 && worst_flow <= 1e-9;
    println!(
        "criterion 6 (moment-map equivalence, {pair_count} pairs): {} - equal-nu basis gap {worst_basis_gap:.3e}, min witness {worst_witness:.3e}, flow residual {worst_flow:.3e}, {elapsed:.1} s",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(worst_basis_gap <= 1e-12);
    assert!(worst_witness > 1e-8);
    assert!(worst_flow <= 1e-9);
}

#[test]
fn criterion_7_l_functionals() {
    let started = Instant::now();
    let fock = TruncatedFock::new(40, 1.0).unwrap();
    // grid over the disk |alpha| <= 2 as the criterion states
    let mut alphas = Vec::new();
    for i in 0..7 {
        for j in 0..7 {
            let a = Complex64::new(-2.0 + i as f64 * 2.0 / 3.0, -2.0 + j as f64 * 2.0 / 3.0);
            if a.norm_sqr() <= 4.0 + 1e-12 {
                alphas.push(a);
            }
        }
    }

    let mut vac = CMatrix::<f64>::zeros(40, 40);
    vac[(0, 0)] = Complex64::new(1.0, 0.0);
    let vacuum = DensityState::new(&vac).unwrap();
    let mut worst_vac = 0.0_f64;
    for &a in &alphas {
        worst_vac = worst_vac.max(cabs(
            l_functional(&fock, &vacuum, a).unwrap().value - Complex64::new(1.0, 0.0),
        ));
    }
    assert!(worst_vac <= 1e-10, "vacuum residual {worst_vac:.3e}");

    let mut rng = stream_rng(700, 0);
    let mut worst_coherent = 0.0_f64;
    for _ in 0..5 {
        // uniform over the disk |z| <= 2
        let z = loop {
            let cand = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if cand.norm_sqr() <= 4.0 {
                break cand;
            }
        };
        let state = coherent_state(&fock, z).unwrap();
        for &a in &alphas {
            let value = l_functional(&fock, &state, a).unwrap().value;
            let target = phase((a.conj() * z - a * z.conj()).im);
            worst_coherent = worst_coherent.max(cabs(value - target));
        }
    }
    assert!(worst_coherent <= 1e-8, "coherent residual {worst_coherent:.3e}");

    let state = coherent_state(&fock, Complex64::new(1.0, -0.5)).unwrap();
    let evolution = l_evolution_check(&fock, &state, 1.0, 0.7, &alphas).unwrap();
    assert!(
        evolution.max_residual <= 1e-6,
        "evolution residual {:.3e}",
        evolution.max_residual
    );

    let scan = hbar_scan(
        220,
        &StateFamily::Gibbs {
            temperature: 1.0,
            omega: 1.0,
        },
        &alphas,
        &[1.0, 0.5, 0.25, 0.125],
    )
    .unwrap();
    assert!(scan.rows.iter().all(|r| r.valid));
    assert!(
        scan.monotone,
        "residuals {:?}",
        scan.rows.iter().map(|r| r.residual).collect::<Vec<_>>()
    );
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "criterion 7 (L-functionals): PASS - vacuum {worst_vac:.3e}, coherent {worst_coherent:.3e}, evolution {:.3e}, Gibbs residuals {:?}, {elapsed:.1} s",
        evolution.max_residual,
        scan.rows.iter().map(|r| r.residual).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_8_lemma_dispersion_check() {
    let started = Instant::now();
    let space = ElementarySpace::scalar(4096, 8.0, |k| 0.5 * k * k).unwrap();
    let packet = Wavepacket::bump(&space, 0.9, 1.1).unwrap();
    let check = essential_support_check(&packet, 200.0, 1.2).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let pass =
        check.outside_mass <= 1e-4 && check.decay_exponent >= 4.0 && check.outside_mass_doubled <= check.outside_mass;
    println!(
        "criterion 8 (Lemma-1 dispersion): {} - outside mass {:.3e} (<= 1e-4 required), exponent {:.2} (>= 4 required), doubled {:.3e}, {elapsed:.1} s",
        if pass { "PASS" } else { "FAIL" },
        check.outside_mass,
        check.decay_exponent,
        check.outside_mass_doubled
    );
    println!(
        "criterion 8 note: the packet's intrinsic width (k-support 0.2 => position tails ~exp(-2 sqrt(0.1 x))) exceeds the 0.02*tau window margin at tau = 200; the stated thresholds require a margin ~0.95*tau. See the repository README for the analysis."
    );
    assert!(
        check.outside_mass_doubled <= check.outside_mass,
        "doubling tau must not increase the outside mass"
    );
    assert!(
        check.outside_mass <= 1e-4,
        "outside mass {} exceeds the pinned 1e-4 threshold",
        check.outside_mass
    );
    assert!(
        check.decay_exponent >= 4.0,
        "decay exponent {} below the pinned threshold 4",
        check.decay_exponent
    );
}

#[test]
fn criterion_9_full_suite_determinism() {
    let started = Instant::now();
    let run = |tag: &str| -> (Option<i32>, Vec<u8>) {
        let out = std::env::temp_dir().join(format!(
            "statecone-acceptance-{tag}-{}",
            std::process::id()
        ));
        let _ = std::fs::remove_dir_all(&out);
        std::fs::create_dir_all(&out).unwrap();
        let result = std::process::Command::new(env!("CARGO_BIN_EXE_statecone"))
            .args([
                "full-suite",
                "--serial",
                "--seed",
                "42",
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .expect("binary runs");
        let report = std::fs::read(out.join("report.json")).expect("report written");
        (result.status.code(), report)
    };
    let (code_a, report_a) = run("a");
    let (code_b, report_b) = run("b");
    let elapsed = started.elapsed().as_secs_f64();
    let identical = report_a == report_b;
    println!(
        "criterion 9 (determinism): {} - {} bytes, exit codes {:?}/{:?}, two runs in {elapsed:.1} s",
        if identical { "PASS" } else { "FAIL" },
        report_a.len(),
        code_a,
        code_b
    );
    assert_eq!(code_a, code_b);
    assert!(
        matches!(code_a, Some(0) | Some(1)),
        "full-suite must run to completion"
    );
    assert!(identical, "report.json differs between runs");
}
