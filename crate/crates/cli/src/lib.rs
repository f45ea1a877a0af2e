//! Command-line front end for `tsvsim`.
//!
//! Exit codes: 0 success, 1 statistical check failed, 2 usage or input error,
//! 3 domain error (impossible post-selection, undefined weak value, ...).

pub mod files;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;
use tsvsim::scenarios::{self, SingleParticleVariant, SingletVariant, ThreeBoxSearch};
use tsvsim::simulate::{self, round_sig12, TimeLabel, DEFAULT_GRID_POINTS};
use tsvsim::stats::{self, FrequencyReport};
use tsvsim::tsvf::{self, FinalWeights};
use tsvsim::{LinearOperator, OutcomeDistribution, Scenario, TwoStateVector};

use report::*;

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

/// Library errors are domain errors unless they describe malformed input.
fn domain(e: tsvsim::Error) -> CliError {
    use tsvsim::Error as E;
    match e {
        E::DimensionMismatch { .. }
        | E::InvalidState(_)
        | E::InvalidOperator(_)
        | E::InvalidArgument(_)
        | E::UnknownVariant(_) => CliError::Usage(e.to_string()),
        _ => CliError::Domain(e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "tsvsim",
    version,
    about = "Pre- and post-selected quantum ensembles: analytic rules and Monte Carlo checks"
)]
pub struct Cli {
    /// Number of simulated trials.
    #[arg(long, global = true, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Master seed; results are reproducible for a given seed.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and compare frequencies with the analytic prediction.
    Run {
        #[command(subcommand)]
        scenario: ScenarioArgs,
        /// Also write the full ensemble, one row per trial.
        #[arg(long, global = true)]
        ensemble_csv: Option<PathBuf>,
    },
    /// Recombine ABL conditionals over final outcomes and compare with Born.
    Decomposition {
        #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
        theta_ab: f64,
        #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
        theta_bc: f64,
        #[arg(long, value_enum, default_value_t = Mode::Corrected)]
        mode: Mode,
    },
    /// Weak measurement of a box projector in the three-box setup.
    Weak {
        #[arg(long, value_enum, default_value_t = WeakOp::Pc)]
        op: WeakOp,
        #[arg(long, default_value_t = 0.05)]
        g_over_sigma: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        /// Write the pointer density as `x,density` rows.
        #[arg(long)]
        pointer_csv: Option<PathBuf>,
    },
    /// ABL probabilities for user-supplied states and observable (JSON files).
    Abl {
        psi1: PathBuf,
        psi2: PathBuf,
        observable: PathBuf,
    },
    /// Show the built-in scenarios.
    ListScenarios,
}

#[derive(Debug, Subcommand)]
pub enum ScenarioArgs {
    /// Spin along a, measured along b, post-selected up along c.
    SharpShanks {
        /// Degrees between a and b.
        #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
        theta_ab: f64,
        /// Degrees between b and c.
        #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
        theta_bc: f64,
    },
    /// Up along z before and after, with a spin measurement at `theta` between.
    SpinCounterexample {
        #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long)]
        no_intermediate: bool,
    },
    /// Three boxes; optionally open one of them at the intermediate time.
    ThreeBox {
        /// none, A, B or C.
        #[arg(long, default_value = "none")]
        search: ThreeBoxSearch,
    },
    /// Spin relations in the singlet state.
    Singlet {
        /// components-x, sums-sequential, two-time or incompatible.
        variant: SingletVariant,
    },
    /// Single particle prepared up along y.
    SingleParticleY {
        /// xx or y.
        variant: SingleParticleVariant,
    },
    /// σx measured twice on a particle prepared up along x.
    DoubleSigmaX,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Corrected,
    SsErroneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeakOp {
    #[value(name = "PA")]
    Pa,
    #[value(name = "PB")]
    Pb,
    #[value(name = "PC")]
    Pc,
    #[value(name = "I")]
    I,
}

/// Rendered report plus the exit code it implies.
#[derive(Debug)]
pub struct Outcome {
    pub document: String,
    pub exit_code: i32,
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Run { scenario, ensemble_csv } => {
            let (scenarios, params) = build_scenarios(scenario);
            run(cli, &scenarios, params, ensemble_csv.as_deref())
        }
        Command::Decomposition {
            theta_ab,
            theta_bc,
            mode,
        } => decomposition(cli, *theta_ab, *theta_bc, *mode),
        Command::Weak {
            op,
            g_over_sigma,
            grid_points,
            pointer_csv,
        } => weak(cli, *op, *g_over_sigma, *grid_points, pointer_csv.as_deref()),
        Command::Abl { psi1, psi2, observable } => abl(cli, psi1, psi2, observable),
        Command::ListScenarios => Ok(Outcome {
            document: render_listing(&listing(), cli.format),
            exit_code: 0,
        }),
    }
}

fn build_scenarios(args: &ScenarioArgs) -> (Vec<Scenario>, serde_json::Value) {
    match args {
        ScenarioArgs::SharpShanks { theta_ab, theta_bc } => (
            vec![scenarios::sharp_shanks(theta_ab.to_radians(), theta_bc.to_radians())],
            json!({ "theta_ab_deg": theta_ab, "theta_bc_deg": theta_bc }),
        ),
        ScenarioArgs::SpinCounterexample { theta, no_intermediate } => (
            vec![scenarios::spin_counterexample(theta.to_radians(), !no_intermediate)],
            json!({ "theta_deg": theta, "intermediate": !no_intermediate }),
        ),
        ScenarioArgs::ThreeBox { search } => {
            let name = match search {
                ThreeBoxSearch::None => "none",
                ThreeBoxSearch::A => "A",
                ThreeBoxSearch::B => "B",
                ThreeBoxSearch::C => "C",
            };
            (vec![scenarios::three_box(*search)], json!({ "search": name }))
        }
        ScenarioArgs::Singlet { variant } => {
            let list = scenarios::singlet_relations(*variant);
            let name = list[0].label().trim_start_matches("singlet:").to_string();
            let name = if list.len() > 1 { "two-time".to_string() } else { name };
            (list, json!({ "variant": name }))
        }
        ScenarioArgs::SingleParticleY { variant } => {
            let s = scenarios::single_particle_y(*variant);
            let name = s.label().rsplit(':').next().unwrap_or_default().to_string();
            (vec![s], json!({ "variant": name }))
        }
        ScenarioArgs::DoubleSigmaX => (vec![scenarios::double_sigma_x()], json!({})),
    }
}

/// `ens.csv` becomes `ens-1.csv`, `ens-2.csv`, ... when a variant has several
/// scenarios.
fn indexed_path(path: &Path, index: usize, count: usize) -> PathBuf {
    if count == 1 {
        return path.to_path_buf();
    }
    let stem = path
        .file_stem()
        .map_or("ensemble".into(), |s| s.to_string_lossy().into_owned());
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{}.{}", index + 1, ext.to_string_lossy()),
        None => format!("{stem}-{}", index + 1),
    };
    path.with_file_name(name)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn run(
    cli: &Cli,
    scenarios: &[Scenario],
    params: serde_json::Value,
    ensemble_csv: Option<&Path>,
) -> Result<Outcome, CliError> {
    let mut reports = Vec::with_capacity(scenarios.len());
    for (i, scenario) in scenarios.iter().enumerate() {
        let rec = simulate::run_ensemble(scenario, cli.trials, cli.seed).map_err(domain)?;
        if let Some(path) = ensemble_csv {
            write_file(&indexed_path(path, i, scenarios.len()), &rec.to_csv())?;
        }
        reports.push(evaluate(scenario, &rec, params.clone(), cli.seed, cli.trials)?);
    }
    let exit_code = if reports.iter().all(|r| r.verdict == Verdict::Pass) {
        0
    } else {
        1
    };
    Ok(Outcome {
        document: render_runs(&reports, cli.format),
        exit_code,
    })
}

/// Compares one simulated ensemble with its analytic prediction.
pub fn evaluate(
    scenario: &Scenario,
    rec: &simulate::EnsembleRecord,
    params: serde_json::Value,
    seed: u64,
    trials: u64,
) -> Result<RunReport, CliError> {
    let mut notes = Vec::new();
    let mut postselection = None;
    let (analytic, observed, check) = if let Some(relation) = scenario.relation() {
        let p = snap(scenario.relation_probability().map_err(domain)?);
        let analytic = OutcomeDistribution::new(format!("[{relation}]"), vec![(0.0, 1.0 - p), (1.0, p)]);
        let indicators = rec.trials.iter().map(|t| {
            let final_outcome = t.outcome(TimeLabel::T2).expect("every trial measures at t2");
            if relation.holds(t.outcome(TimeLabel::T), final_outcome) {
                1.0
            } else {
                0.0
            }
        });
        let observed = stats::tally(indicators).map_err(domain)?;
        (
            analytic,
            observed,
            format!("fraction of trials in which {relation} (outcome 1 = holds)"),
        )
    } else if let Some(target) = scenario.target_final_outcome() {
        let selected = simulate::postselect(rec, target).map_err(domain)?;
        let fraction = selected.len() as f64 / rec.len() as f64;
        postselection = Some(PostSelectionSummary {
            target: round_sig12(target),
            selected: selected.len() as u64,
            total: rec.len() as u64,
            fraction: round_sig12(fraction),
        });
        if selected.is_empty() {
            return Err(CliError::Domain(format!(
                "no trial out of {} passed post-selection on {} = {target}",
                rec.len(),
                scenario.final_observable().label()
            )));
        }
        match scenario.intermediate() {
            Some(obs) => {
                let analytic = scenario.abl_prediction().map_err(domain)?;
                let observed = stats::frequencies(&selected, TimeLabel::T).map_err(domain)?;
                (
                    analytic,
                    observed,
                    format!(
                        "ABL distribution of {} at t in the post-selected sub-ensemble",
                        obs.label()
                    ),
                )
            }
            None => {
                let analytic =
                    tsvf::born_distribution(scenario.pre_state(), scenario.final_observable()).map_err(domain)?;
                let observed = stats::frequencies(rec, TimeLabel::T2).map_err(domain)?;
                if selected.len() == rec.len() {
                    notes.push(
                        "identical ensembles: every trial passed post-selection, so the post-selected ensemble equals the pre-selected one"
                            .to_string(),
                    );
                }
                (
                    analytic,
                    observed,
                    format!("Born distribution of {} at t2", scenario.final_observable().label()),
                )
            }
        }
    } else {
        return Err(CliError::Domain(format!(
            "scenario {} has nothing to check",
            scenario.label()
        )));
    };

    let fitted: FrequencyReport = match stats::chi_square_gof(&observed, &analytic) {
        Ok(f) => f,
        Err(e) => {
            notes.push(format!("chi-square test not applicable: {e}"));
            observed
        }
    };
    let verdict = if fitted.chi_square.is_some() && fitted.agrees_with_reference() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(RunReport {
        scenario: scenario.label().to_string(),
        params,
        seed,
        trials,
        check,
        postselection,
        analytic: analytic_entries(&analytic),
        empirical: empirical_entries(&fitted),
        chi_square: chi_square_summary(&fitted),
        verdict,
        notes,
    })
}

/// Clamps to [0, 1] and removes rounding residue next to the endpoints.
fn snap(p: f64) -> f64 {
    const EDGE: f64 = 1e-12;
    if p <= EDGE {
        0.0
    } else if p >= 1.0 - EDGE {
        1.0
    } else {
        p
    }
}

/// Lhs and rhs must agree to this tolerance in corrected mode.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-10;

fn decomposition(cli: &Cli, theta_ab: f64, theta_bc: f64, mode: Mode) -> Result<Outcome, CliError> {
    let scenario = scenarios::sharp_shanks(theta_ab.to_radians(), theta_bc.to_radians());
    let b = scenario
        .intermediate()
        .expect("sharp-shanks has an intermediate measurement");
    let up = b.index_of(1.0).expect("spin observable has eigenvalue 1");
    let weights = match mode {
        Mode::Corrected => FinalWeights::Corrected,
        Mode::SsErroneous => FinalWeights::SsErroneous,
    };
    let d =
        tsvf::decomposition_check(scenario.pre_state(), b, scenario.final_observable(), up, weights).map_err(domain)?;
    let consistent = d.gap() <= DECOMPOSITION_TOLERANCE;
    let report = DecompositionReport {
        theta_ab_deg: round_sig12(theta_ab),
        theta_bc_deg: round_sig12(theta_bc),
        mode: match mode {
            Mode::Corrected => "corrected".into(),
            Mode::SsErroneous => "ss-erroneous".into(),
        },
        outcome: d.eigenvalue,
        terms: d
            .terms
            .iter()
            .map(|t| TermSummary {
                final_outcome: t.final_outcome,
                weight: round_sig12(t.weight),
                conditional: round_sig12(t.conditional),
            })
            .collect(),
        lhs: round_sig12(d.lhs),
        rhs: round_sig12(d.rhs),
        delta: round_sig12(d.gap()),
        verdict: if consistent { "consistent" } else { "inconsistent" }.into(),
    };
    // The erroneous weights are expected to disagree; reporting that is not a failure.
    let exit_code = if consistent || mode == Mode::SsErroneous { 0 } else { 1 };
    Ok(Outcome {
        document: render_decomposition(&report, cli.format),
        exit_code,
    })
}

fn weak(
    cli: &Cli,
    op: WeakOp,
    g_over_sigma: f64,
    grid_points: usize,
    pointer_csv: Option<&Path>,
) -> Result<Outcome, CliError> {
    let (operator, name) = match op {
        WeakOp::Pa => (scenarios::box_projector(0), "PA"),
        WeakOp::Pb => (scenarios::box_projector(1), "PB"),
        WeakOp::Pc => (scenarios::box_projector(2), "PC"),
        WeakOp::I => (LinearOperator::identity(3), "I"),
    };
    let scenario = scenarios::three_box(ThreeBoxSearch::None);
    let tsv = scenario.two_state_vector().map_err(domain)?;
    let wv = tsvf::weak_value(&tsv, &operator).map_err(domain)?;
    let sigma = 1.0;
    let pointer = simulate::weak_measure_ensemble(&scenario, &operator, g_over_sigma * sigma, sigma, grid_points)
        .map_err(domain)?;
    let density_csv = pointer.to_csv();
    if let Some(path) = pointer_csv {
        write_file(path, &density_csv)?;
    }
    let report = WeakReport {
        scenario: scenario.label().to_string(),
        operator: name.to_string(),
        g_over_sigma: round_sig12(g_over_sigma),
        coupling: round_sig12(pointer.coupling),
        pointer_width: round_sig12(pointer.pointer_width),
        grid_points,
        weak_value: ComplexValue {
            re: round_sig12(wv.re),
            im: round_sig12(wv.im),
        },
        mean_shift: round_sig12(pointer.mean_shift),
        shift_ratio: round_sig12(pointer.shift_ratio()),
        deviation: round_sig12((pointer.shift_ratio() - wv.re).abs()),
    };
    Ok(Outcome {
        document: render_weak(&report, &density_csv, cli.format),
        exit_code: 0,
    })
}

fn abl(cli: &Cli, psi1: &Path, psi2: &Path, observable: &Path) -> Result<Outcome, CliError> {
    let pre = files::load_state(psi1)?;
    let post = files::load_state(psi2)?;
    let obs = files::load_observable(observable)?;
    if pre.dim() != post.dim() || pre.dim() != obs.dim() {
        return Err(CliError::Usage(format!(
            "dimensions disagree: psi1 {}, psi2 {}, observable {}",
            pre.dim(),
            post.dim(),
            obs.dim()
        )));
    }
    let tsv = TwoStateVector::new(pre, post).map_err(domain)?;
    let forward = tsvf::abl_distribution(&tsv, &obs).map_err(domain)?;
    let backward = tsvf::abl_distribution(&tsv.swapped(), &obs).map_err(domain)?;
    let mut notes = Vec::new();
    let outcomes = obs
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &eigenvalue)| {
            let weak_value = match tsvf::weak_value(&tsv, &obs.projector_operator(i)) {
                Ok(w) => Some(ComplexValue {
                    re: round_sig12(w.re),
                    im: round_sig12(w.im),
                }),
                Err(e) => {
                    if notes.is_empty() {
                        notes.push(format!("weak values undefined: {e}"));
                    }
                    None
                }
            };
            AblOutcome {
                eigenvalue,
                abl: round_sig12(forward.entries[i].probability),
                abl_swapped: round_sig12(backward.entries[i].probability),
                weak_value,
            }
        })
        .collect();
    let report = AblReport {
        observable: obs.label().to_string(),
        dim: obs.dim(),
        outcomes,
        swap_max_difference: round_sig12(
            forward
                .probabilities()
                .zip(backward.probabilities())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        ),
        element_of_reality: tsvf::elements_of_reality(&tsv, &obs).map_err(domain)?,
        notes,
    };
    Ok(Outcome {
        document: render_abl(&report, cli.format),
        exit_code: 0,
    })
}

fn listing() -> Vec<ScenarioListing> {
    vec![
        ScenarioListing {
            name: "sharp-shanks",
            arguments: "--theta-ab DEG --theta-bc DEG",
            description: "↑a, measure σb, post-select ↑c; ABL frequencies of σb",
        },
        ScenarioListing {
            name: "spin-counterexample",
            arguments: "--theta DEG [--no-intermediate]",
            description: "↑z before and after, optional σξ in between",
        },
        ScenarioListing {
            name: "three-box",
            arguments: "--search none|A|B|C",
            description: "three boxes, open one at t, post-select the final state",
        },
        ScenarioListing {
            name: "singlet",
            arguments: "components-x|sums-sequential|two-time|incompatible",
            description: "spin relations measured on the singlet",
        },
        ScenarioListing {
            name: "single-particle-y",
            arguments: "xx|y",
            description: "particle prepared ↑y; σx twice, or σy",
        },
        ScenarioListing {
            name: "double-sigma-x",
            arguments: "",
            description: "↑x prepared; σx measured at t and t2",
        },
    ]
}
