//! Scenario implementations binding the toolkit modules into reproducible
//! desk-scale experiments.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use statecone::decoherence::{
    born_probabilities, cesaro_project, ensemble_average, AdiabaticParams, CesaroMode,
    EnsembleMode, EnsembleSpec, LoopProfile,
};
use statecone::excitations::{essential_support_check, position_density, ElementarySpace, Wavepacket};
use statecone::jordan::{derivation_kernel, derivation_space, suite::identity_suite, JordanAlgebra};
use statecone::lfunc::{
    classical_characteristic, coherent_state, gibbs_state, gram_matrix, l_evolution_check,
    l_functional, hbar_scan, StateFamily, TruncatedFock,
};
use statecone::linalg::{cabs, frobenius, hermitian_eigen, phase, CMatrix, CVector};
use statecone::momentmap::{
    equivalence_check, flow_consistency, nu, resampled_decomposition, ClassicalEnsemble,
    CoadjointOrbit, Equivalence, LieAlgebraElement, OrbitPoint,
};
use statecone::sampling::{random_density_matrix, random_hermitian, random_unit_vector, stream_rng};
use statecone::serialize::MatrixJson;
use statecone::statespace::{generator_spectrum, DensityState, Generator};

use crate::matio;
use crate::report::Report;

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub serial: bool,
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    /// `(file name, content)` pairs written next to `report.json`.
    pub files: Vec<(String, String)>,
}

pub const SCENARIOS: &[(&str, &str)] = &[
    ("born", "Born probabilities of the energy levels from the robust projection of a state"),
    ("decohere", "Monte Carlo dephasing under random adiabatic Hamiltonians"),
    ("jordan-check", "sampled Jordan-algebra identities per kind, spin factors to the Albert algebra"),
    ("moment-demo", "coadjoint-orbit moment images, redundancy quotient demonstrations, flow consistency"),
    ("lfunc", "L-functionals on a truncated Weyl algebra with classical-limit residuals"),
    ("dispersion", "wavepacket propagation and the essential-support decay of the group-velocity window"),
    ("full-suite", "every scenario's checks aggregated; fails if any check fails"),
];

pub fn list_scenarios() -> &'static [(&'static str, &'static str)] {
    SCENARIOS
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Outcome, String> {
    match cfg.scenario.as_str() {
        "born" => born(cfg),
        "decohere" => decohere(cfg),
        "jordan-check" => jordan_check(cfg),
        "moment-demo" => moment_demo(cfg),
        "lfunc" => lfunc(cfg),
        "dispersion" => dispersion(cfg),
        "full-suite" => full_suite(cfg),
        other => Err(format!(
            "unknown scenario `{other}`; available: {}",
            SCENARIOS
                .iter()
                .map(|(n, _)| *n)
                .collect::<Vec<_>>()
                .join(", ")
        )),
    }
}

// --- parameter handling ------------------------------------------------------

struct Params<'a> {
    cfg: &'a ScenarioConfig,
}

impl<'a> Params<'a> {
    fn new(cfg: &'a ScenarioConfig, allowed: &[&str]) -> Result<Self, String> {
        for key in cfg.params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(format!(
                    "unknown key `{key}` for scenario `{}`; allowed: {}",
                    cfg.scenario,
                    allowed.join(", ")
                ));
            }
        }
        Ok(Params { cfg })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.cfg.params.get(key).map(String::as_str)
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64, String> {
        match self.get(key) {
            Some(v) => v.parse().map_err(|e| format!("key `{key}`: {e}")),
            None => Ok(default),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize, String> {
        match self.get(key) {
            Some(v) => v.parse().map_err(|e| format!("key `{key}`: {e}")),
            None => Ok(default),
        }
    }

    fn string(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    /// Seed is mandatory for stochastic scenarios.
    fn seed(&self) -> Result<u64, String> {
        if let Some(v) = self.get("seed") {
            return v.parse().map_err(|e| format!("key `seed`: {e}"));
        }
        self.cfg
            .seed
            .ok_or_else(|| format!("scenario `{}` is stochastic: a seed is required", self.cfg.scenario))
    }

    fn read_file(&self, key: &str) -> Result<Option<String>, String> {
        match self.get(key) {
            Some(path) => std::fs::read_to_string(path)
                .map(Some)
                .map_err(|e| format!("key `{key}`: cannot read `{path}`: {e}")),
            None => Ok(None),
        }
    }
}

fn echo_config(cfg: &ScenarioConfig) -> BTreeMap<String, String> {
    let mut echo = cfg.params.clone();
    if let Some(seed) = cfg.seed {
        echo.entry("seed".into()).or_insert_with(|| seed.to_string());
    }
    echo.insert("serial".into(), cfg.serial.to_string());
    echo
}

fn diag_matrix(entries: &[f64]) -> CMatrix<f64> {
    CMatrix::from_fn(entries.len(), entries.len(), |i, j| {
        if i == j {
            Complex64::new(entries[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn uniform_plus_state(dim: usize) -> DensityState<f64> {
    let amp = 1.0 / dim as f64;
    DensityState::new(&CMatrix::from_fn(dim, dim, |_, _| Complex64::new(amp, 0.0)))
        .expect("plus state is a state")
}

// --- born ----------------------------------------------------------------------

fn born(cfg: &ScenarioConfig) -> Result<Outcome, String> {
    let params = Params::new(cfg, &["dim", "hamiltonian", "state", "seed"])?;
    let dim = params.usize("dim", 2)?;
    if dim < 2 {
        return Err("dim must be at least 2".into());
    }
    let hamiltonian = match params.read_file("hamiltonian")? {
        Some(text) => matio::parse_matrix(&text, dim)?,
        None => diag_matrix(&(0..dim).map(|i| i as f64).collect::<Vec<_>>()),
    };
    let state = match params.read_file("state")? {
        Some(text) => {
            DensityState::new(&matio::parse_matrix(&text, dim)?).map_err(|e| e.to_string())?
        }
        None => uniform_plus_state(dim),
    };
    let generator = Generator::new(&hamiltonian).map_err(|e| e.to_string())?;
    let table = born_probabilities(&generator, &state).map_err(|e| e.to_string())?;

    let mut report = Report::new("born", echo_config(cfg));
    let probs = table.probabilities();
    let sum: f64 = probs.iter().sum();
    report.check("sum_one", (sum - 1.0).abs() <= 1e-10, sum, 1.0);
    let min_p = probs.iter().copied().fold(f64::INFINITY, f64::min);
    report.check("nonnegative", min_p >= -1e-12, min_p, -1e-12);

    // diagonal of K in the H eigenbasis, aggregated per level
    let spec = generator_spectrum(&generator);
    let tilde = spec.basis.adjoint() * state.matrix() * &spec.basis;
    let mut worst = 0.0_f64;
    let mut start = 0;
    for (level, &deg) in spec.degeneracies.iter().enumerate() {
        let diag_sum: f64 = (start..start + deg).map(|i| tilde[(i, i)].re).sum();
        worst = worst.max((diag_sum - probs[level]).abs());
        start += deg;
    }
    report.check("matches_eigenbasis_diagonal", worst <= 1e-10, worst, 1e-10);

    report.table("labels", serde_json::json!(table.labels()));
    report.table("probabilities", serde_json::json!(probs));
    Ok(Outcome {
        report,
        files: Vec::new(),
    })
}

// --- decohere --------------------------------------------------------------------

fn decohere(cfg: &ScenarioConfig) -> Result<Outcome, String> {
    let params = Params::new(
        cfg,
        &["dim", "hamiltonian", "state", "a", "g0", "paths", "scale", "mode", "seed"],
    )?;
    let dim = params.usize("dim", 2)?;
    let rate = params.f64("a", 1e-2)?;
    let g0 = params.f64("g0", 1.0)?;
    let n_paths = params.usize("paths", 2000)?;
    let scale = params.f64("scale", 1.0)?;
    let mode_name = params.string("mode", "formula");
    let seed = params.seed()?;

    let hamiltonian = match params.read_file("hamiltonian")? {
        Some(text) => matio::parse_matrix(&text, dim)?,
        None => diag_matrix(&(0..dim).map(|i| i as f64).collect::<Vec<_>>()),
    };
    let state = match params.read_file("state")? {
        Some(text) => {
            DensityState::new(&matio::parse_matrix(&text, dim)?).map_err(|e| e.to_string())?
        }
        None => uniform_plus_state(dim),
    };
    let generator = Generator::new(&hamiltonian).map_err(|e| e.to_string())?;
    let adiabatic = AdiabaticParams {
        g0,
        rate,
        profile: LoopProfile::SinePi,
    };
    let mode = match mode_name.as_str() {
        "formula" => EnsembleMode::AdiabaticFormula,
        "ode" => EnsembleMode::FullOde,
        other => return Err(format!("mode must be formula|ode, got `{other}`")),
    };
    let spec = EnsembleSpec {
        n_paths,
        perturbation_scale: scale,
        master_seed: seed,
        mode,
        serial: cfg.serial,
    };
    let ensemble = ensemble_average(&generator, &adiabatic, &spec, &state).map_err(|e| e.to_string())?;

    let mut report = Report::new("decohere", echo_config(cfg));
    report.check(
        "mean_offdiag_abs",
        ensemble.mean_offdiag_abs <= 0.05,
        ensemble.mean_offdiag_abs,
        0.05,
    );

    let (_, u0) = hermitian_eigen(generator.hamiltonian());
    let tilde0 = u0.adjoint() * state.matrix() * &u0;
    let diag_drift: f64 = (0..dim)
        .map(|i| (ensemble.mean_eigenbasis[(i, i)] - tilde0[(i, i)]).norm())
        .fold(0.0, f64::max);
    match mode {
        EnsembleMode::AdiabaticFormula => {
            report.check("diagonals_exact", diag_drift == 0.0, diag_drift, 0.0);
        }
        EnsembleMode::FullOde => {
            let formula = ensemble_average(
                &generator,
                &adiabatic,
                &EnsembleSpec {
                    mode: EnsembleMode::AdiabaticFormula,
                    ..spec
                },
                &state,
            )
            .map_err(|e| e.to_string())?;
            let drift: f64 = (0..dim)
                .map(|i| (ensemble.mean_eigenbasis[(i, i)] - formula.mean_eigenbasis[(i, i)]).norm())
                .fold(0.0, f64::max);
            report.check("ode_diagonal_drift", drift <= 5.0 * rate, drift, 5.0 * rate);
        }
    }

    report.table("seed", serde_json::json!(seed));
    report.table("n_paths", serde_json::json!(n_paths));
    report.table("a", serde_json::json!(rate));
    report.table("mean_offdiag_abs", serde_json::json!(ensemble.mean_offdiag_abs));
    report.table(
        "distance_to_Pprime",
        serde_json::json!(ensemble.distance_to_projection),
    );
    report.table(
        "per_entry_mean",
        serde_json::to_value(MatrixJson::from_matrix(&ensemble.mean)).expect("matrix json"),
    );
    Ok(Outcome {
        report,
        files: Vec::new(),
    })
}

// --- jordan-check -----------------------------------------------------------------

pub fn parse_kind(text: &str) -> Result<Arc<JordanAlgebra<f64>>, String> {
    if text == "albert" {
        return Ok(JordanAlgebra::albert());
    }
    if let Some(rest) = text.strip_prefix("spin") {
        let n: usize = rest.parse().map_err(|_| format!("bad spin kind `{text}`"))?;
        if n == 0 {
            return Err("spin factor needs n >= 1".into());
        }
        return Ok(JordanAlgebra::spin(n));
    }
    if let Some(rest) = text.strip_prefix("herm") {
        let (num, field) = rest.split_at(rest.len().saturating_sub(1));
        let n: usize = num.parse().map_err(|_| format!("bad herm kind `{text}`"))?;
        if n == 0 {
            return Err("matrix algebra needs n >= 1".into());
        }
        return match field {
            "c" => Ok(JordanAlgebra::herm_complex(n)),
            "r" => Ok(JordanAlgebra::herm_real(n)),
            _ => Err(format!("herm kinds end in c or r, got `{text}`")),
        };
    }
    Err(format!(
        "unknown kind `{text}`; expected spinN, hermNc, hermNr or albert"
    ))
}

fn jordan_check(cfg: &ScenarioConfig) -> Result<Outcome, String> {
    let params = Params::new(cfg, &["kind", "samples", "seed"])?;
    let kind = params.string("kind", "albert");
    let samples = params.usize("samples", 200)?;
    let seed = params.seed()?;
    let algebra = parse_kind(&kind)?;
    let suite = identity_suite(&algebra, samples, seed);

    let mut report = Report::new("jordan-check", echo_config(cfg));
    report.check(
        "jordan_identity",
        suite.max_jordan_identity <= 1e-9,
        suite.max_jordan_identity,
        1e-9,
    );
    report.check(
        "power_associativity",
        suite.max_power_associativity <= 1e-10,
        suite.max_power_associativity,
        1e-10,
    );
    report.check("q_of_unit", suite.max_q_unit <= 1e-9, suite.max_q_unit, 1e-9);
    report.check(
        "fundamental_identity",
        suite.max_fundamental_ratio <= 1.0,
        suite.max_fundamental_ratio,
        1.0,
    );
    report.check(
        "cone_preservation",
        suite.worst_cone_eigenvalue >= -1e-9,
        suite.worst_cone_eigenvalue,
        -1e-9,
    );
    report.check(
        "homogeneity",
        suite.max_homogeneity <= 1e-9,
        suite.max_homogeneity,
        1e-9,
    );
    report.check(
        "jb_norm_inequalities",
        suite.max_norm_submult <= 1e-9
            && suite.max_norm_square <= 1e-9
            && suite.max_norm_monotone <= 1e-9,
        suite
            .max_norm_submult
            .max(suite.max_norm_square)
            .max(suite.max_norm_monotone),
        1e-9,
    );
    report.table("kind", serde_json::json!(kind));
    report.table("samples", serde_json::json!(samples));
    Ok(Outcome {
        report,
        files: Vec::new(),
    })
}

// --- moment-demo --------------------------------------------------------------------

fn parse_orbit(text: &str) -> Result<Arc<CoadjointOrbit<f64>>, String> {
    let mut eigenvalues = Vec::new();
    let mut multiplicities = Vec::new();
    for part in text.split(',') {
        let (l, k) = part
            .split_once(':')
            .ok_or_else(|| format!("orbit entries look like `lambda:k`, got `{part}`"))?;
        eigenvalues.push(l.trim().parse::<f64>().map_err(|e| format!("orbit: {e}"))?);
        multiplicities.push(k.trim().parse::<usize>().map_err(|e| format!("orbit: {e}"))?);
    }
    CoadjointOrbit::new(eigenvalues, multiplicities).map_err(|e| e.to_string())
}

fn moment_demo(cfg: &ScenarioConfig) -> Result<Outcome, String> {
    let params = Params::new(cfg, &["n", "orbit", "pairs", "seed"])?;
    let n = params.usize("n", 2)?;
    let default_orbit = format!("1:1,0:{}", n.saturating_sub(1).max(1));
    let orbit_text = params.string("orbit", &default_orbit);
    let pairs = params.usize("pairs", 8)?;
    let seed = params.seed()?;
    let orbit = parse_orbit(&orbit_text)?;
    if orbit.n() != n {
        return Err(format!(
            "orbit multiplicities sum to {}, but n = {n}",
            orbit.n()
        ));
    }

    let mut rng = stream_rng(seed, 0);
    let projector = |v: &CVector<f64>| {
        CMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    };
    let rank_one = orbit.eigenvalues() == [1.0, 0.0] && orbit.multiplicities()[0] == 1;

    let mut report = Report::new("moment-demo", echo_config(cfg));
    let mut worst_equal_gap = 0.0_f64;
    let mut worst_witness_gap = f64::INFINITY;
    let mut worst_flow = 0.0_f64;
    let mut last_nu: Option<CMatrix<f64>> = None;

    for _ in 0..pairs {
        let make_point = |rng: &mut statecone::sampling::ChaCha8Rng| {
            if rank_one {
                OrbitPoint::new(&orbit, &projector(&random_unit_vector::<f64>(rng, n))).unwrap()
            } else {
                OrbitPoint::random(&orbit, rng)
            }
        };
        let rho = ClassicalEnsemble::new(vec![
            (0.5, make_point(&mut rng)),
            (0.5, make_point(&mut rng)),
        ])
        .map_err(|e| e.to_string())?;

        // an exactly equivalent presentation of the same state
        let partner = if rank_one {
            resampled_decomposition(&rho, 3, &mut rng).map_err(|e| e.to_string())?
        } else {
            let mut entries: Vec<_> = rho.entries().to_vec();
            entries.reverse();
            ClassicalEnsemble::new(entries).map_err(|e| e.to_string())?
        };
        let nu_a = nu(&rho).map_err(|e| e.to_string())?;
        let nu_b = nu(&partner).map_err(|e| e.to_string())?;
        worst_equal_gap = worst_equal_gap.max(frobenius(&(&nu_a - &nu_b)));
        if !matches!(
            equivalence_check(&rho, &partner).map_err(|e| e.to_string())?,
            Equivalence::Equivalent
        ) {
            worst_equal_gap = worst_equal_gap.max(1.0);
        }

        // an independent ensemble is distinct with a witness
        let other = ClassicalEnsemble::new(vec![
            (0.5, make_point(&mut rng)),
            (0.5, make_point(&mut rng)),
        ])
        .map_err(|e| e.to_string())?;
        match equivalence_check(&rho, &other).map_err(|e| e.to_string())? {
            Equivalence::Distinct { gap, .. } => {
                worst_witness_gap = worst_witness_gap.min(gap);
            }
            Equivalence::Equivalent => {
                // random ensembles collide only with vanishing probability;
                // treat a collision as witness failure
                worst_witness_gap = 0.0;
            }
        }

        // flow consistency over the sampled times
        let x = LieAlgebraElement::new(&random_hermitian::<f64>(&mut rng, n, 1.0))
            .map_err(|e| e.to_string())?;
        for t in [0.3, 1.0, 3.0] {
            worst_flow = worst_flow.max(flow_consistency(&x, &rho, t).map_err(|e| e.to_string())?);
        }
        last_nu = Some(nu_a);
    }

    report.check(
        "equal_nu_pairs_equivalent",
        worst_equal_gap <= 1e-10,
        worst_equal_gap,
        1e-10,
    );
    report.check(
        "distinct_pairs_have_witnesses",
        worst_witness_gap > 1e-8,
        worst_witness_gap,
        1e-8,
    );
    report.check("flow_consistency", worst_flow <= 1e-9, worst_flow, 1e-9);
    if let Some(m) = last_nu {
        report.table(
            "nu_example",
            serde_json::to_value(MatrixJson::from_matrix(&m)).expect("matrix json"),
        );
    }
    report.table("orbit", serde_json::json!(orbit_text));
    Ok(Outcome {
        report,
        files: Vec::new(),
    })
}

// --- lfunc ------------------------------------------------------------------------

fn lfunc(cfg: &ScenarioConfig) -> Result<Outcome, String> {
    let params = Params::new(
        cfg,
        &["state", "hbar", "dim", "alpha-grid", "omega", "extent", "seed"],
    )?;
    let state_text = params.string("state", "coherent:1");
    let hbar = params.f64("hbar", 1.0)?;
    let dim = params.usize("dim", 40)?;
    let omega = params.f64("omega", 1.0)?;
    let extent = params.f64("extent", 1.5)?;

    let alphas: Vec<Complex64> = match params.read_file("alpha-grid")? {
        Some(text) => matio::parse_alpha_grid(&text)?,
        None => {
            let mut grid = Vec::new();
            for i in 0..=4 {
                for j in 0..=4 {
                    grid.push(Complex64::new(
                        -extent + 2.0 * extent * i as f64 / 4.0,
                        -extent + 2.0 * extent * j as f64 / 4.0,
                    ));
                }
            }
            grid
        }
    };

    let fock = TruncatedFock::new(dim, hbar).map_err(|e| e.to_string())?;
    let (state, family) = match state_text.split_once(':') {
        Some(("coherent", z_text)) => {
            let z = matio::parse_complex(z_text)?;
            (
                coherent_state(&fock, z).map_err(|e| e.to_string())?,
                StateFamily::Coherent { z },
            )
        }
        Some(("gibbs", t_text)) => {
            let temperature: f64 = t_text
                .trim()
                .parse()
                .map_err(|e| format!("gibbs temperature: {e}"))?;
            (
                gibbs_state(&fock, temperature, omega).map_err(|e| e.to_string())?,
                StateFamily::Gibbs { temperature, omega },
            )
        }
        _ => return Err(format!("state must be coherent:z or gibbs:T, got `{state_text}`")),
    };

    let mut csv = String::from("alpha_re,alpha_im,L_re,L_im,residual\n");
    let mut max_residual = 0.0_f64;
    let mut at_zero = 0.0_f64;
    for &alpha in &alphas {
        let value = l_functional(&fock, &state, alpha).map_err(|e| e.to_string())?.value;
        let target = match &family {
            StateFamily::Coherent { z } => {
                let e = (alpha.conj() * z - alpha * z.conj()).im;
                phase(e)
            }
            StateFamily::Gibbs { temperature, omega } => Complex64::new(
                classical_characteristic(alpha, *temperature, *omega),
                0.0,
            ),
        };
        let residual = cabs(value - target);
        max_residual = max_residual.max(residual);
        if alpha.norm_sqr() == 0.0 {
            at_zero = cabs(value - Complex64::new(1.0, 0.0));
        }
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            alpha.re, alpha.im, value.re, value.im, residual
        ));
    }

    let mut report = Report::new("lfunc", echo_config(cfg));
    let zero_in_grid = alphas.iter().any(|a| a.norm_sqr() == 0.0);
    if zero_in_grid {
        report.check("trace_at_alpha_zero", at_zero <= 1e-10, at_zero, 1e-10);
    }
    if matches!(family, StateFamily::Coherent { .. }) {
        report.check(
            "coherent_closed_form",
            max_residual <= 1e-8,
            max_residual,
            1e-8,
        );
    }
    // positivity fingerprint on a small sub-grid
    let sub: Vec<Complex64> = alphas.iter().copied().take(6).collect();
    let gram = gram_matrix(&fock, &state, &sub).map_err(|e| e.to_string())?;
    let (eigs, _) = hermitian_eigen(&gram);
    report.check("gram_positive", eigs[0] >= -1e-8, eigs[0], -1e-8);
    report.table("max_residual_vs_classical", serde_json::json!(max_residual));
    report.table("hbar", serde_json::json!(hbar));
    report.table("dim", serde_json::json!(dim));

    Ok(Outcome {
        report,
        files: vec![("lfunc.csv".to_string(), csv)],
    })
}

// --- dispersion ----------------------------------------------------------------------

fn dispersion(cfg: &ScenarioConfig) -> Result<Outcome, String> {
    let params = Params::new(
        cfg,
        &["eps", "support", "grid", "kmax", "tau", "inflation", "seed"],
    )?;
    let eps_text = params.string("eps", "k^2/2");
    let support_text = params.string("support", "0.9:1.1");
    let grid = params.usize("grid", 4096)?;
    let kmax = params.f64("kmax", 8.0)?;
    let tau = params.f64("tau", 200.0)?;
    let inflation = params.f64("inflation", 1.2)?;

    let expr = crate::expr::parse(&eps_text)?;
    let (lo_text, hi_text) = support_text
        .split_once(':')
        .ok_or_else(|| format!("support looks like `lo:hi`, got `{support_text}`"))?;
    let k_lo: f64 = lo_text.parse().map_err(|e| format!("support: {e}"))?;
    let k_hi: f64 = hi_text.parse().map_err(|e| format!("support: {e}"))?;

    let space = ElementarySpace::scalar(grid, kmax, |k| expr.eval(k)).map_err(|e| e.to_string())?;
    let packet = Wavepacket::bump(&space, k_lo, k_hi).map_err(|e| e.to_string())?;
    let check = essential_support_check(&packet, tau, inflation).map_err(|e| e.to_string())?;

    let moved = statecone::excitations::time_translate(&packet, tau);
    let (xs, density) = position_density(&moved).map_err(|e| e.to_string())?;
    let mut csv = String::from("x,density\n");
    for (x, p) in xs.iter().zip(density.iter()) {
        csv.push_str(&format!("{x:.16e},{p:.16e}\n"));
    }

    let mut report = Report::new("dispersion", echo_config(cfg));
    report.check(
        "doubling_tau_non_increasing",
        check.outside_mass_doubled <= check.outside_mass,
        check.outside_mass_doubled,
        check.outside_mass,
    );
    report.table("outside_mass", serde_json::json!(check.outside_mass));
    report.table("exponent_fit", serde_json::json!(check.decay_exponent));
    report.table(
        "velocity_window",
        serde_json::json!([check.velocity_window.0, check.velocity_window.1]),
    );
    Ok(Outcome {
        report,
        files: vec![("position_density.csv".to_string(), csv)],
    })
}

// --- full-suite -----------------------------------------------------------------------

fn full_suite(cfg: &ScenarioConfig) -> Result<Outcome, String> {
    let params = Params::new(cfg, &["seed"])?;
    let seed = params.seed()?;
    let mut report = Report::new("full-suite", echo_config(cfg));

    // Born battery on random simple-spectrum systems, dims 2..4
    {
        let mut worst = 0.0_f64;
        let mut worst_sum = 0.0_f64;
        for dim in 2..=4usize {
            for sys in 0..10u64 {
                let mut rng = stream_rng(seed ^ 0xB0B0, dim as u64 * 100 + sys);
                let h = simple_spectrum_hamiltonian(&mut rng, dim);
                let g = Generator::new(&h).map_err(|e| e.to_string())?;
                let k = DensityState::new(&random_density_matrix(&mut rng, dim))
                    .map_err(|e| e.to_string())?;
                let table = born_probabilities(&g, &k).map_err(|e| e.to_string())?;
                let spec = generator_spectrum(&g);
                let tilde = spec.basis.adjoint() * k.matrix() * &spec.basis;
                for (level, p) in table.probabilities().iter().enumerate() {
                    worst = worst.max((tilde[(level, level)].re - p).abs());
                }
                worst_sum = worst_sum.max((table.probabilities().iter().sum::<f64>() - 1.0).abs());
            }
        }
        report.check("born.matches_diagonal", worst <= 1e-10, worst, 1e-10);
        report.check("born.sum_one", worst_sum <= 1e-10, worst_sum, 1e-10);
    }

    // Decoherence ensemble (scaled paths), drift and rate monotonicity
    {
        let g = Generator::new(&diag_matrix(&[0.0, 1.0])).map_err(|e| e.to_string())?;
        let k0 = uniform_plus_state(2);
        let adiabatic = AdiabaticParams {
            g0: 1.0,
            rate: 1e-2,
            profile: LoopProfile::SinePi,
        };
        let base = EnsembleSpec {
            n_paths: 800,
            perturbation_scale: 1.0,
            master_seed: seed ^ 0xDEC0,
            mode: EnsembleMode::AdiabaticFormula,
            serial: cfg.serial,
        };
        let formula = ensemble_average(&g, &adiabatic, &base, &k0).map_err(|e| e.to_string())?;
        report.check(
            "decohere.mean_offdiag_abs",
            formula.mean_offdiag_abs <= 0.05,
            formula.mean_offdiag_abs,
            0.05,
        );
        let ode = ensemble_average(
            &g,
            &adiabatic,
            &EnsembleSpec {
                n_paths: 60,
                mode: EnsembleMode::FullOde,
                ..base
            },
            &k0,
        )
        .map_err(|e| e.to_string())?;
        let formula_small = ensemble_average(
            &g,
            &adiabatic,
            &EnsembleSpec {
                n_paths: 60,
                ..base
            },
            &k0,
        )
        .map_err(|e| e.to_string())?;
        let drift: f64 = (0..2)
            .map(|i| (ode.mean_eigenbasis[(i, i)] - formula_small.mean_eigenbasis[(i, i)]).norm())
            .fold(0.0, f64::max);
        report.check("decohere.ode_diagonal_drift", drift <= 5e-2, drift, 5e-2);

        let slow = ensemble_average(
            &g,
            &AdiabaticParams {
                rate: 1e-3,
                ..adiabatic
            },
            &base,
            &k0,
        )
        .map_err(|e| e.to_string())?;
        report.check(
            "decohere.deviation_decreases_with_rate",
            slow.distance_to_projection < formula.distance_to_projection,
            slow.distance_to_projection,
            formula.distance_to_projection,
        );
    }

    // Cesaro 1/T decay with stable constant
    {
        let horizons = [100.0, 1000.0, 10_000.0];
        let mut c_values = [0.0_f64; 3];
        let n_gens = 10;
        for gen_idx in 0..n_gens {
            let mut rng = stream_rng(seed ^ 0xCE5A, gen_idx);
            let h = random_hermitian::<f64>(&mut rng, 4, 1.0);
            let g = Generator::new(&h).map_err(|e| e.to_string())?;
            let x = random_hermitian::<f64>(&mut rng, 4, 1.0);
            let analytic = cesaro_project(&g, &x, CesaroMode::Analytic).map_err(|e| e.to_string())?;
            for (slot, &horizon) in horizons.iter().enumerate() {
                let numeric = cesaro_project(&g, &x, CesaroMode::Numeric { horizon })
                    .map_err(|e| e.to_string())?;
                c_values[slot] += horizon * frobenius(&(&numeric.matrix - &analytic.matrix));
            }
        }
        for c in c_values.iter_mut() {
            *c /= n_gens as f64;
        }
        let mean_c = c_values.iter().sum::<f64>() / 3.0;
        let max_dev = c_values
            .iter()
            .map(|c| (c - mean_c).abs() / mean_c)
            .fold(0.0, f64::max);
        report.check("cesaro.constant_stable", max_dev <= 0.2, max_dev, 0.2);
    }

    // Jordan identities across kinds
    {
        let mut worst_identity = 0.0_f64;
        let mut worst_fundamental = 0.0_f64;
        let mut worst_cone = f64::INFINITY;
        for kind in ["spin3", "spin6", "herm2r", "herm3r", "herm2c", "herm3c", "albert"] {
            let alg = parse_kind(kind)?;
            let suite = identity_suite(&alg, 150, seed ^ 0x70DA);
            worst_identity = worst_identity.max(suite.max_jordan_identity);
            worst_fundamental = worst_fundamental.max(suite.max_fundamental_ratio);
            worst_cone = worst_cone.min(suite.worst_cone_eigenvalue);
        }
        report.check(
            "jordan.identity",
            worst_identity <= 1e-9,
            worst_identity,
            1e-9,
        );
        report.check(
            "jordan.fundamental",
            worst_fundamental <= 1.0,
            worst_fundamental,
            1.0,
        );
        report.check("jordan.cone", worst_cone >= -1e-9, worst_cone, -1e-9);
    }

    // Derivation dimensions and Albert kernel nullity
    {
        let mut ok = true;
        for (kind, expected) in [("herm2c", 3usize), ("herm3c", 8), ("spin3", 3), ("spin4", 6)] {
            let alg = parse_kind(kind)?;
            let space = derivation_space(&alg).map_err(|e| e.to_string())?;
            ok &= space.dimension == expected;
        }
        report.check("derivations.small_kinds", ok, if ok { 1.0 } else { 0.0 }, 1.0);

        let albert = JordanAlgebra::<f64>::albert();
        let space = derivation_space(&albert).map_err(|e| e.to_string())?;
        report.check(
            "derivations.albert_dimension",
            space.dimension == 52,
            space.dimension as f64,
            52.0,
        );
        let mut nullity3 = 0usize;
        let samples = 20usize;
        for s in 0..samples {
            let mut rng = stream_rng(seed ^ 0xA1B2, s as u64);
            let mut d = statecone::linalg::RMatrix::<f64>::zeros(27, 27);
            for b in &space.basis {
                let coefficient = statecone::sampling::normal::<f64>(&mut rng);
                d += b.map(|x| x * coefficient);
            }
            let kernel = derivation_kernel(&albert, &d).map_err(|e| e.to_string())?;
            if kernel.nullity == 3 {
                nullity3 += 1;
            }
        }
        let fraction = nullity3 as f64 / samples as f64;
        report.check("derivations.albert_nullity3", fraction >= 0.95, fraction, 0.95);
    }

    // Moment-map equivalence and flow
    {
        let sub = moment_demo(&ScenarioConfig {
            scenario: "moment-demo".into(),
            params: BTreeMap::from([
                ("n".to_string(), "2".to_string()),
                ("pairs".to_string(), "6".to_string()),
            ]),
            seed: Some(seed ^ 0x3030),
            serial: cfg.serial,
        })?;
        report.merge_prefixed("moment.qubit", sub.report);
        let sub = moment_demo(&ScenarioConfig {
            scenario: "moment-demo".into(),
            params: BTreeMap::from([
                ("n".to_string(), "3".to_string()),
                ("pairs".to_string(), "6".to_string()),
            ]),
            seed: Some(seed ^ 0x3031),
            serial: cfg.serial,
        })?;
        report.merge_prefixed("moment.qutrit", sub.report);
    }

    // L-functionals: vacuum, coherent closed form, evolution, hbar scan
    {
        let fock = TruncatedFock::new(40, 1.0).map_err(|e| e.to_string())?;
        let mut vac = CMatrix::<f64>::zeros(40, 40);
        vac[(0, 0)] = Complex64::new(1.0, 0.0);
        let vacuum = DensityState::new(&vac).map_err(|e| e.to_string())?;
        let mut alphas = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                alphas.push(Complex64::new(
                    -2.0 + i as f64,
                    -2.0 + j as f64,
                ));
            }
        }
        let mut worst_vac = 0.0_f64;
        for &a in &alphas {
            let v = l_functional(&fock, &vacuum, a).map_err(|e| e.to_string())?.value;
            worst_vac = worst_vac.max(cabs(v - Complex64::new(1.0, 0.0)));
        }
        report.check("lfunc.vacuum_is_one", worst_vac <= 1e-10, worst_vac, 1e-10);

        let z = Complex64::new(1.0, -0.5);
        let coherent = coherent_state(&fock, z).map_err(|e| e.to_string())?;
        let mut worst_coh = 0.0_f64;
        for &a in &alphas {
            let v = l_functional(&fock, &coherent, a).map_err(|e| e.to_string())?.value;
            let target = phase((a.conj() * z - a * z.conj()).im);
            worst_coh = worst_coh.max(cabs(v - target));
        }
        report.check("lfunc.coherent_closed_form", worst_coh <= 1e-8, worst_coh, 1e-8);

        let evolution = l_evolution_check(&fock, &coherent, 1.0, 0.7, &alphas)
            .map_err(|e| e.to_string())?;
        report.check(
            "lfunc.evolution_rotation",
            evolution.max_residual <= 1e-6,
            evolution.max_residual,
            1e-6,
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
        .map_err(|e| e.to_string())?;
        let all_valid = scan.rows.iter().all(|r| r.valid);
        report.check(
            "lfunc.gibbs_scan_monotone",
            scan.monotone && all_valid,
            if scan.monotone && all_valid { 1.0 } else { 0.0 },
            1.0,
        );
    }

    // Dispersion: the pinned thresholds of the decay check
    {
        let space = ElementarySpace::scalar(4096, 8.0, |k| 0.5 * k * k).map_err(|e| e.to_string())?;
        let packet = Wavepacket::bump(&space, 0.9, 1.1).map_err(|e| e.to_string())?;
        let check = essential_support_check(&packet, 200.0, 1.2).map_err(|e| e.to_string())?;
        report.check(
            "dispersion.lemma_outside_mass",
            check.outside_mass <= 1e-4,
            check.outside_mass,
            1e-4,
        );
        report.check(
            "dispersion.lemma_decay_exponent",
            check.decay_exponent >= 4.0,
            check.decay_exponent,
            4.0,
        );
        report.check(
            "dispersion.doubling_non_increasing",
            check.outside_mass_doubled <= check.outside_mass,
            check.outside_mass_doubled,
            check.outside_mass,
        );
    }

    Ok(Outcome {
        report,
        files: Vec::new(),
    })
}

/// Random Hermitian with a guaranteed simple spectrum (resampled until the
/// minimal gap clears 1e-3).
pub fn simple_spectrum_hamiltonian(
    rng: &mut statecone::sampling::ChaCha8Rng,
    dim: usize,
) -> CMatrix<f64> {
    loop {
        let h = random_hermitian::<f64>(rng, dim, 1.0);
        let (eigs, _) = hermitian_eigen(&h);
        let mut ok = true;
        for i in 1..dim {
            if eigs[i] - eigs[i - 1] < 1e-3 {
                ok = false;
            }
        }
        if ok {
            return h;
        }
    }
}
