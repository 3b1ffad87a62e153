//! statecone: scenario runner for the convex-state-cone toolkit.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 input error.

mod config;
mod expr;
mod matio;
mod report;
mod scenarios;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use scenarios::{list_scenarios, run_scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "statecone", version, about = "Physical theories on convex state cones: reproducible desk-scale experiments")]
struct Cli {
    /// INI-style config file with one [scenario] section of key = value lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Scenario name (alternative to a subcommand).
    #[arg(long, global = true)]
    scenario: Option<String>,

    /// Master seed for stochastic scenarios.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for report.json and CSVs.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Force deterministic single-threaded execution.
    #[arg(long, global = true)]
    serial: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Born probabilities of the energy levels for a state.
    Born {
        #[arg(long)]
        dim: Option<usize>,
        /// CSV matrix (rows of re,im pairs).
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        /// CSV density matrix.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Monte Carlo dephasing under random adiabatic Hamiltonians.
    Decohere {
        /// Adiabatic rate.
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        /// Gaussian perturbation scale.
        #[arg(long)]
        scale: Option<f64>,
        /// formula | ode
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        g0: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Sampled Jordan-algebra identity checks.
    JordanCheck {
        /// spinN | hermNc | hermNr | albert
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Moment-map images, equivalence demonstrations, flow residuals.
    MomentDemo {
        #[arg(long)]
        n: Option<usize>,
        /// Orbit spectrum as lambda:k pairs, e.g. `1:1,0:2`.
        #[arg(long)]
        orbit: Option<String>,
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// L-functional grid evaluation with classical-limit residuals.
    Lfunc {
        /// coherent:z | gibbs:T
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        hbar: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
        /// CSV of alpha_re, alpha_im rows.
        #[arg(long, value_name = "FILE")]
        alpha_grid: Option<PathBuf>,
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Wavepacket propagation and the essential-support decay check.
    Dispersion {
        /// Dispersion law in k, e.g. "k^2/2".
        #[arg(long)]
        eps: Option<String>,
        /// Bump support `lo:hi`.
        #[arg(long)]
        support: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        kmax: Option<f64>,
        #[arg(long)]
        inflation: Option<f64>,
    },
    /// Aggregate every scenario's checks.
    FullSuite,
    /// List the scenario registry.
    ListScenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if matches!(cli.command, Some(Command::ListScenarios)) {
        for (name, description) in list_scenarios() {
            println!("{name:<14} {description}");
        }
        return ExitCode::SUCCESS;
    }

    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };

    let started = Instant::now();
    let mut outcome = match run_scenario(&cfg) {
        Ok(outcome) => outcome,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    if !cfg.serial {
        outcome.report.wall_time_s = Some(started.elapsed().as_secs_f64());
    }

    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create output directory: {e}");
        return ExitCode::from(2);
    }
    let report_path = cli.out.join("report.json");
    if let Err(e) = std::fs::write(&report_path, outcome.report.to_json()) {
        eprintln!("error: cannot write {}: {e}", report_path.display());
        return ExitCode::from(2);
    }
    for (name, content) in &outcome.files {
        let path = cli.out.join(name);
        if let Err(e) = std::fs::write(&path, content) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }

    for check in &outcome.report.checks {
        println!(
            "{} {}: value {:.6e} (threshold {:.6e})",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.value,
            check.threshold
        );
    }
    println!(
        "{}: report written to {}",
        if outcome.report.pass { "pass" } else { "FAIL" },
        report_path.display()
    );
    if outcome.report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn build_config(cli: &Cli) -> Result<ScenarioConfig, String> {
    let mut params: BTreeMap<String, String> = BTreeMap::new();
    let mut insert = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            params.insert(key.to_string(), v);
        }
    };
    let path_str = |p: &PathBuf| p.display().to_string();

    let scenario_from_command = match &cli.command {
        None => None,
        Some(Command::ListScenarios) => unreachable!("handled in main"),
        Some(Command::Born {
            dim,
            hamiltonian,
            state,
        }) => {
            insert("dim", dim.map(|v| v.to_string()));
            insert("hamiltonian", hamiltonian.as_ref().map(path_str));
            insert("state", state.as_ref().map(path_str));
            Some("born")
        }
        Some(Command::Decohere {
            a,
            paths,
            scale,
            mode,
            g0,
            dim,
            hamiltonian,
            state,
        }) => {
            insert("a", a.map(|v| v.to_string()));
            insert("paths", paths.map(|v| v.to_string()));
            insert("scale", scale.map(|v| v.to_string()));
            insert("mode", mode.clone());
            insert("g0", g0.map(|v| v.to_string()));
            insert("dim", dim.map(|v| v.to_string()));
            insert("hamiltonian", hamiltonian.as_ref().map(path_str));
            insert("state", state.as_ref().map(path_str));
            Some("decohere")
        }
        Some(Command::JordanCheck { kind, samples }) => {
            insert("kind", kind.clone());
            insert("samples", samples.map(|v| v.to_string()));
            Some("jordan-check")
        }
        Some(Command::MomentDemo { n, orbit, pairs }) => {
            insert("n", n.map(|v| v.to_string()));
            insert("orbit", orbit.clone());
            insert("pairs", pairs.map(|v| v.to_string()));
            Some("moment-demo")
        }
        Some(Command::Lfunc {
            state,
            hbar,
            dim,
            alpha_grid,
            omega,
        }) => {
            insert("state", state.clone());
            insert("hbar", hbar.map(|v| v.to_string()));
            insert("dim", dim.map(|v| v.to_string()));
            insert("alpha-grid", alpha_grid.as_ref().map(path_str));
            insert("omega", omega.map(|v| v.to_string()));
            Some("lfunc")
        }
        Some(Command::Dispersion {
            eps,
            support,
            grid,
            tau,
            kmax,
            inflation,
        }) => {
            insert("eps", eps.clone());
            insert("support", support.clone());
            insert("grid", grid.map(|v| v.to_string()));
            insert("tau", tau.map(|v| v.to_string()));
            insert("kmax", kmax.map(|v| v.to_string()));
            insert("inflation", inflation.map(|v| v.to_string()));
            Some("dispersion")
        }
        Some(Command::FullSuite) => Some("full-suite"),
    };

    let scenario = if let Some(name) = scenario_from_command {
        if let Some(flag_name) = &cli.scenario {
            if flag_name != name {
                return Err(format!(
                    "--scenario {flag_name} conflicts with the `{name}` subcommand"
                ));
            }
        }
        name.to_string()
    } else if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let parsed = config::parse(&text).map_err(|e| e.to_string())?;
        if let Some(flag_name) = &cli.scenario {
            if *flag_name != parsed.scenario {
                return Err(format!(
                    "--scenario {flag_name} conflicts with config section [{}]",
                    parsed.scenario
                ));
            }
        }
        params = parsed.values;
        parsed.scenario
    } else if let Some(name) = &cli.scenario {
        name.clone()
    } else {
        return Err("nothing to run: give a subcommand, --scenario, or --config (see --help)".into());
    };

    Ok(ScenarioConfig {
        scenario,
        params,
        seed: cli.seed,
        serial: cli.serial,
    })
}
