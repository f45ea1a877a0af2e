//! Seeded Monte Carlo runs of pre-/post-selection protocols.
//!
//! Each trial prepares the scenario's state (the `t1` event), performs the
//! optional intermediate measurement (`t`) and the final measurement (`t2`)
//! as ideal Lüders measurements. Trials draw from their own ChaCha8 stream
//! seeded with [`trial_seed`], so a run is reproducible bit for bit no
//! matter how many threads execute it.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_dim, spectral_decompose, LinearOperator, Observable, StateVector, C64, EIGENVALUE_CLUSTER_TOLERANCE,
};
use crate::scenarios::Scenario;
use crate::tsvf::ZERO_THRESHOLD;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeLabel {
    T1,
    T,
    T2,
}

impl fmt::Display for TimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeLabel::T1 => "t1",
            TimeLabel::T => "t",
            TimeLabel::T2 => "t2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementEvent {
    pub time: TimeLabel,
    pub observable_label: String,
    pub outcome: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    /// Ordered `t1 < t < t2`, at most one per time label.
    pub events: Vec<MeasurementEvent>,
    pub trial_seed: u64,
}

impl TrialRecord {
    pub fn event(&self, time: TimeLabel) -> Option<&MeasurementEvent> {
        self.events.iter().find(|e| e.time == time)
    }

    pub fn outcome(&self, time: TimeLabel) -> Option<f64> {
        self.event(time).map(|e| e.outcome)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleRecord {
    pub scenario_label: String,
    pub master_seed: u64,
    pub trials: Vec<TrialRecord>,
}

impl EnsembleRecord {
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    /// One line per trial:
    /// `trial_id,t1_outcome,t_observable,t_outcome,t2_outcome,trial_seed`,
    /// with empty `t` columns when there was no intermediate measurement.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "trial_id",
            "t1_outcome",
            "t_observable",
            "t_outcome",
            "t2_outcome",
            "trial_seed",
        ])
        .expect("write to Vec");
        for trial in &self.trials {
            let outcome = |time| trial.outcome(time).map(format_number).unwrap_or_default();
            let t_label = trial
                .event(TimeLabel::T)
                .map(|e| e.observable_label.clone())
                .unwrap_or_default();
            w.write_record([
                trial.trial_id.to_string(),
                outcome(TimeLabel::T1),
                t_label,
                outcome(TimeLabel::T),
                outcome(TimeLabel::T2),
                trial.trial_seed.to_string(),
            ])
            .expect("write to Vec");
        }
        String::from_utf8(w.into_inner().expect("flush to Vec")).expect("utf-8 fields")
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse::<f64>().expect("formatted float parses") + 0.0
}

/// Shortest decimal form of `x` rounded to 12 significant digits.
pub fn format_number(x: f64) -> String {
    round_sig12(x).to_string()
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial_id`: `mix64(master_seed + γ·(trial_id + 1))` with
/// wrapping arithmetic, γ the SplitMix64 increment. Both steps are bijections
/// on `u64`, so distinct trial ids always get distinct seeds.
pub fn trial_seed(master_seed: u64, trial_id: u64) -> u64 {
    mix64(master_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(trial_id.wrapping_add(1))))
}

/// Ideal measurement of `obs` on `state`.
///
/// One uniform variate `u` picks the first outcome, in ascending eigenvalue
/// order, whose cumulative Born probability exceeds `u`. The returned state
/// is the Lüders projection `P_i|ψ⟩ / ‖P_i|ψ⟩‖`.
pub fn ideal_measure<R: Rng + ?Sized>(
    state: &StateVector,
    obs: &Observable,
    rng: &mut R,
) -> Result<(f64, StateVector)> {
    check_dim(state.dim(), obs.dim())?;
    let v = state.as_vector();
    let projected: Vec<_> = obs.projectors().iter().map(|p| p * v).collect();
    let weights: Vec<f64> = projected.iter().map(|w| w.norm_squared()).collect();

    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut chosen = None;
    for (i, &w) in weights.iter().enumerate() {
        cumulative += w;
        if w > 0.0 && u < cumulative {
            chosen = Some(i);
            break;
        }
    }
    // Rounding can leave the total a hair below u.
    let index = chosen
        .or_else(|| weights.iter().rposition(|&w| w > 0.0))
        .ok_or_else(|| Error::InvalidState("state has no weight on any outcome".into()))?;
    let collapsed = StateVector::from_vector(projected[index].clone())
        .ok_or_else(|| Error::InvalidState("collapsed state vanished".into()))?;
    Ok((obs.eigenvalues()[index], collapsed))
}

fn run_trial(scenario: &Scenario, trial_id: u64, master_seed: u64) -> Result<TrialRecord> {
    let seed = trial_seed(master_seed, trial_id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = vec![MeasurementEvent {
        time: TimeLabel::T1,
        observable_label: format!("prepare {}", scenario.pre_label()),
        outcome: 1.0,
    }];
    let mut state = scenario.pre_state().clone();
    if let Some(obs) = scenario.intermediate() {
        let (outcome, collapsed) = ideal_measure(&state, obs, &mut rng)?;
        events.push(MeasurementEvent {
            time: TimeLabel::T,
            observable_label: obs.label().to_string(),
            outcome,
        });
        state = collapsed;
    }
    let final_obs = scenario.final_observable();
    let (outcome, _) = ideal_measure(&state, final_obs, &mut rng)?;
    events.push(MeasurementEvent {
        time: TimeLabel::T2,
        observable_label: final_obs.label().to_string(),
        outcome,
    });
    Ok(TrialRecord {
        trial_id,
        events,
        trial_seed: seed,
    })
}

/// Runs `n_trials` independent trials of `scenario` on the current rayon
/// pool. Results are in trial-id order and depend only on the arguments.
pub fn run_ensemble(scenario: &Scenario, n_trials: u64, master_seed: u64) -> Result<EnsembleRecord> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
    }
    let trials = (0..n_trials)
        .into_par_iter()
        .map(|id| run_trial(scenario, id, master_seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleRecord {
        scenario_label: scenario.label().to_string(),
        master_seed,
        trials,
    })
}

/// Keeps the trials whose `t2` outcome is `final_outcome`, in order.
pub fn postselect(rec: &EnsembleRecord, final_outcome: f64) -> Result<EnsembleRecord> {
    let mut kept = Vec::new();
    for trial in &rec.trials {
        let outcome = trial.outcome(TimeLabel::T2).ok_or_else(|| Error::MissingEvent {
            time: TimeLabel::T2.to_string(),
            trial_id: trial.trial_id,
        })?;
        if (outcome - final_outcome).abs() <= EIGENVALUE_CLUSTER_TOLERANCE {
            kept.push(trial.clone());
        }
    }
    Ok(EnsembleRecord {
        scenario_label: rec.scenario_label.clone(),
        master_seed: rec.master_seed,
        trials: kept,
    })
}

pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Half-width of the pointer grid beyond the extreme shifts, in units of the
/// pointer width.
pub const GRID_HALF_WIDTH: f64 = 8.0;

/// Post-selected pointer distribution after a weak von Neumann coupling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointerReport {
    pub grid: Vec<f64>,
    pub probability_density: Vec<f64>,
    pub mean_shift: f64,
    pub coupling: f64,
    pub pointer_width: f64,
}

impl PointerReport {
    /// `mean_shift / g`, which approaches the real part of the weak value as
    /// the coupling weakens.
    pub fn shift_ratio(&self) -> f64 {
        self.mean_shift / self.coupling
    }

    pub fn total_probability(&self) -> f64 {
        trapezoid(&self.grid, &self.probability_density)
    }

    /// `x,density` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,density\n");
        for (x, d) in self.grid.iter().zip(&self.probability_density) {
            out.push_str(&format!("{},{}\n", format_number(*x), format_number(*d)));
        }
        out
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Exact post-selected pointer state for a von Neumann coupling
/// `exp(−i g A ⊗ p̂)` with a Gaussian pointer of width `sigma_ptr`
/// (standard deviation of `|φ|²`), shifting the pointer position by `g·λ`.
///
/// With `A = Σ λ_i Π_i` and `c_i = ⟨Ψ₂|Π_i|Ψ₁⟩` the final pointer amplitude is
/// `Σ_i c_i φ(x − g λ_i)`, evaluated on `grid_points` uniform points covering
/// `[g·λ_min − 8σ, g·λ_max + 8σ]`. The reported density is normalized by the
/// trapezoidal rule and `mean_shift` is its first moment.
pub fn weak_measure_ensemble(
    scenario: &Scenario,
    op: &LinearOperator,
    g: f64,
    sigma_ptr: f64,
    grid_points: usize,
) -> Result<PointerReport> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidArgument(format!("coupling must be positive, got {g}")));
    }
    if !(sigma_ptr > 0.0 && sigma_ptr.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "pointer width must be positive, got {sigma_ptr}"
        )));
    }
    if grid_points < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 grid points, got {grid_points}"
        )));
    }
    let tsv = scenario.two_state_vector()?;
    check_dim(tsv.dim(), op.dim())?;
    let spectral = spectral_decompose(op, "A")?;

    let bra = tsv.backward().as_vector();
    let ket = tsv.forward().as_vector();
    let branches: Vec<(f64, C64)> = spectral
        .eigenvalues()
        .iter()
        .zip(spectral.projectors())
        .map(|(&value, p)| (g * value, bra.dotc(&(p * ket))))
        .collect();
    let weight: f64 = branches.iter().map(|(_, c)| c.norm_sqr()).sum();
    if weight <= ZERO_THRESHOLD {
        return Err(Error::PostSelectionImpossible { denominator: weight });
    }

    let shift_min = branches.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let shift_max = branches.iter().map(|b| b.0).fold(f64::NEG_INFINITY, f64::max);
    let lo = shift_min - GRID_HALF_WIDTH * sigma_ptr;
    let hi = shift_max + GRID_HALF_WIDTH * sigma_ptr;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|k| lo + step * k as f64).collect();

    let gaussian = |x: f64| (-x * x / (4.0 * sigma_ptr * sigma_ptr)).exp();
    let raw: Vec<f64> = grid
        .iter()
        .map(|&x| {
            branches
                .iter()
                .map(|&(shift, c)| c * gaussian(x - shift))
                .sum::<C64>()
                .norm_sqr()
        })
        .collect();
    let norm = trapezoid(&grid, &raw);
    let probability_density: Vec<f64> = raw.iter().map(|d| d / norm).collect();
    let first_moment: Vec<f64> = grid.iter().zip(&probability_density).map(|(x, d)| x * d).collect();
    let mean_shift = trapezoid(&grid, &first_moment);

    Ok(PointerReport {
        grid,
        probability_density,
        mean_shift,
        coupling: g,
        pointer_width: sigma_ptr,
    })
}
