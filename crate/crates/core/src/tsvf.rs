//! Analytic calculators over pre- and post-selected states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, inner_product, LinearOperator, Observable, StateVector, C64};

/// Raw-quantity threshold below which ABL denominators and weak-value
/// overlaps are treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// An outcome is an element of reality when its ABL probability is at least
/// `1 - CERTAINTY_TOLERANCE`.
pub const CERTAINTY_TOLERANCE: f64 = 1e-10;

/// A pre-selected state `|Ψ₁⟩` together with a post-selected state `⟨Ψ₂|`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStateVector {
    forward: StateVector,
    backward: StateVector,
}

impl TwoStateVector {
    pub fn new(forward: StateVector, backward: StateVector) -> Result<Self> {
        check_dim(forward.dim(), backward.dim())?;
        Ok(Self { forward, backward })
    }

    /// Pre-selected state `|Ψ₁⟩`.
    pub fn forward(&self) -> &StateVector {
        &self.forward
    }

    /// Post-selected state `|Ψ₂⟩`.
    pub fn backward(&self) -> &StateVector {
        &self.backward
    }

    pub fn dim(&self) -> usize {
        self.forward.dim()
    }

    /// Exchanges the roles of the two states.
    pub fn swapped(&self) -> Self {
        Self {
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }

    /// `⟨Ψ₂|P|Ψ₁⟩` for each projector of `obs`.
    fn projected_amplitudes(&self, obs: &Observable) -> Result<Vec<C64>> {
        check_dim(self.dim(), obs.dim())?;
        let bra = self.backward.as_vector();
        let ket = self.forward.as_vector();
        Ok(obs.projectors().iter().map(|p| bra.dotc(&(p * ket))).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeProbability {
    pub eigenvalue: f64,
    pub probability: f64,
}

/// Probabilities of the outcomes of one observable, ascending by eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub observable_label: String,
    pub entries: Vec<OutcomeProbability>,
}

impl OutcomeDistribution {
    pub fn new(observable_label: impl Into<String>, entries: Vec<(f64, f64)>) -> Self {
        Self {
            observable_label: observable_label.into(),
            entries: entries
                .into_iter()
                .map(|(eigenvalue, probability)| OutcomeProbability {
                    eigenvalue,
                    probability,
                })
                .collect(),
        }
    }

    pub fn probability_of(&self, eigenvalue: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| (e.eigenvalue - eigenvalue).abs() <= crate::hilbert::EIGENVALUE_CLUSTER_TOLERANCE)
            .map(|e| e.probability)
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.probability)
    }

    pub fn total(&self) -> f64 {
        self.probabilities().sum()
    }
}

/// `⟨Ψ|P|Ψ⟩` clamped to `[0, 1]` against rounding.
fn projector_weight(state: &StateVector, projector: &crate::hilbert::CMatrix) -> f64 {
    let v = state.as_vector();
    v.dotc(&(projector * v)).re.clamp(0.0, 1.0)
}

/// Standard (pre-selected only) outcome probabilities `⟨Ψ|P_i|Ψ⟩`.
pub fn born_distribution(state: &StateVector, obs: &Observable) -> Result<OutcomeDistribution> {
    check_dim(state.dim(), obs.dim())?;
    let entries = obs
        .eigenvalues()
        .iter()
        .zip(obs.projectors())
        .map(|(&value, p)| (value, projector_weight(state, p)))
        .collect();
    Ok(OutcomeDistribution::new(obs.label(), entries))
}

/// Intermediate-time outcome probabilities for a pre- and post-selected
/// system: `|⟨Ψ₂|P_i|Ψ₁⟩|² / Σ_j |⟨Ψ₂|P_j|Ψ₁⟩|²`.
pub fn abl_distribution(tsv: &TwoStateVector, obs: &Observable) -> Result<OutcomeDistribution> {
    let weights: Vec<f64> = tsv.projected_amplitudes(obs)?.iter().map(|a| a.norm_sqr()).collect();
    let denominator: f64 = weights.iter().sum();
    if denominator <= ZERO_THRESHOLD {
        return Err(Error::PostSelectionImpossible { denominator });
    }
    let entries = obs
        .eigenvalues()
        .iter()
        .zip(&weights)
        .map(|(&value, w)| (value, w / denominator))
        .collect();
    Ok(OutcomeDistribution::new(obs.label(), entries))
}

/// `⟨Ψ₂|A|Ψ₁⟩ / ⟨Ψ₂|Ψ₁⟩`.
pub fn weak_value(tsv: &TwoStateVector, op: &LinearOperator) -> Result<C64> {
    check_dim(tsv.dim(), op.dim())?;
    let overlap = inner_product(tsv.backward(), tsv.forward())?;
    if overlap.norm() <= ZERO_THRESHOLD {
        return Err(Error::WeakValueUndefined {
            overlap: overlap.norm(),
        });
    }
    Ok(op.matrix_element(tsv.backward(), tsv.forward())? / overlap)
}

/// The eigenvalue that an ideal measurement of `obs` would yield with
/// certainty, if there is one.
pub fn elements_of_reality(tsv: &TwoStateVector, obs: &Observable) -> Result<Option<f64>> {
    let dist = abl_distribution(tsv, obs)?;
    Ok(dist
        .entries
        .iter()
        .find(|e| e.probability >= 1.0 - CERTAINTY_TOLERANCE)
        .map(|e| e.eigenvalue))
}

/// One branch of an intermediate-then-final measurement sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct JointOutcome {
    pub intermediate: f64,
    pub final_outcome: f64,
    pub probability: f64,
}

/// Exact joint distribution of `(intermediate, final)` outcomes when both
/// ideal measurements are performed on `psi1` in sequence, with Lüders
/// collapse in between. Zero-probability intermediate branches are omitted.
pub fn sequential_joint_distribution(
    psi1: &StateVector,
    intermediate: &Observable,
    final_obs: &Observable,
) -> Result<Vec<JointOutcome>> {
    check_dim(psi1.dim(), intermediate.dim())?;
    check_dim(psi1.dim(), final_obs.dim())?;
    let mut joint = Vec::new();
    for (&a, p) in intermediate.eigenvalues().iter().zip(intermediate.projectors()) {
        let weight = projector_weight(psi1, p);
        let Some(collapsed) = StateVector::from_vector(p * psi1.as_vector()) else {
            continue;
        };
        if weight == 0.0 {
            continue;
        }
        for (&f, q) in final_obs.eigenvalues().iter().zip(final_obs.projectors()) {
            joint.push(JointOutcome {
                intermediate: a,
                final_outcome: f,
                probability: weight * projector_weight(&collapsed, q),
            });
        }
    }
    Ok(joint)
}

/// Final-outcome probabilities given that `intermediate` was measured:
/// `Prob(f_k) = Σ_j ⟨Ψ₁|P_j|Ψ₁⟩ ⟨ψ_j|Q_k|ψ_j⟩` with `ψ_j` the collapsed state.
pub fn final_outcome_probabilities(
    psi1: &StateVector,
    intermediate: &Observable,
    final_obs: &Observable,
) -> Result<OutcomeDistribution> {
    let joint = sequential_joint_distribution(psi1, intermediate, final_obs)?;
    let entries = final_obs
        .eigenvalues()
        .iter()
        .map(|&f| {
            let p = joint
                .iter()
                .filter(|j| j.final_outcome == f)
                .map(|j| j.probability)
                .sum();
            (f, p)
        })
        .collect();
    Ok(OutcomeDistribution::new(final_obs.label(), entries))
}

/// How the final-outcome weights in the decomposition are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinalWeights {
    /// Weights computed with the intermediate measurement performed.
    Corrected,
    /// Weights computed as if no intermediate measurement took place. This
    /// reproduces the faulty decomposition and does not match the Born rule.
    SsErroneous,
}

/// Both sides of `Prob(a_i) = Σ_k Prob(f_k) Prob(a_i | f_k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub eigenvalue: f64,
    /// `Σ_k Prob(f_k) · ABL(a_i | f_k)`.
    pub lhs: f64,
    /// Born probability of `a_i` on the pre-selected state.
    pub rhs: f64,
    /// `(f_k, Prob(f_k), ABL(a_i | f_k))` for each final outcome that was used.
    pub terms: Vec<DecompositionTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionTerm {
    pub final_outcome: f64,
    pub weight: f64,
    pub conditional: f64,
}

impl Decomposition {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Recombines ABL conditionals over the final outcomes and compares with the
/// Born rule. `outcome_index` indexes `intermediate.eigenvalues()`.
///
/// Final outcomes with zero weight are skipped without evaluating their
/// conditional. The final measurement must be complete.
pub fn decomposition_check(
    psi1: &StateVector,
    intermediate: &Observable,
    final_obs: &Observable,
    outcome_index: usize,
    weights: FinalWeights,
) -> Result<Decomposition> {
    check_dim(psi1.dim(), intermediate.dim())?;
    check_dim(psi1.dim(), final_obs.dim())?;
    let eigenvalue = *intermediate.eigenvalues().get(outcome_index).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "outcome index {outcome_index} out of range for {} outcomes",
            intermediate.num_outcomes()
        ))
    })?;
    if !final_obs.is_complete() {
        return Err(Error::InvalidArgument(
            "decomposition requires a complete (rank-1) final measurement".into(),
        ));
    }
    let final_weights = match weights {
        FinalWeights::Corrected => final_outcome_probabilities(psi1, intermediate, final_obs)?,
        FinalWeights::SsErroneous => born_distribution(psi1, final_obs)?,
    };
    let mut terms = Vec::new();
    for (k, entry) in final_weights.entries.iter().enumerate() {
        if entry.probability <= ZERO_THRESHOLD {
            continue;
        }
        let post = final_obs.eigenvector(k).expect("complete final measurement");
        let tsv = TwoStateVector::new(psi1.clone(), post)?;
        let conditional = abl_distribution(&tsv, intermediate)?.entries[outcome_index].probability;
        terms.push(DecompositionTerm {
            final_outcome: entry.eigenvalue,
            weight: entry.probability,
            conditional,
        });
    }
    let lhs = terms.iter().map(|t| t.weight * t.conditional).sum();
    let rhs = born_distribution(psi1, intermediate)?.entries[outcome_index].probability;
    Ok(Decomposition {
        eigenvalue,
        lhs,
        rhs,
        terms,
    })
}
