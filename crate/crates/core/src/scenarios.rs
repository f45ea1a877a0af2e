//! Canned pre-/intermediate-/post-measurement experiments.
//!
//! Each constructor returns a [`Scenario`]: a prepared state, an optional
//! measurement at the intermediate time `t`, a final measurement at `t2`, and
//! optionally the final outcome to post-select on. Scenarios without a
//! post-selection target carry a [`Relation`] between outcomes instead.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_dim, inner_product, sigma_x, sigma_y, sigma_z, spectral_decompose, spin_observable, spin_state,
    tensor_product, CMatrix, LinearOperator, Observable, StateVector, C64, EIGENVALUE_CLUSTER_TOLERANCE,
};
use crate::tsvf::{
    abl_distribution, born_distribution, sequential_joint_distribution, OutcomeDistribution, TwoStateVector,
};

/// A deterministic relation between the outcomes of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Relation {
    /// The final outcome `v` of a [`joint_spin_observable`] decodes to spins
    /// `(s1, s2)`; holds when `s1 + s2 = 0`.
    OppositeJointSpins,
    /// Intermediate and final outcomes are both zero.
    BothZero,
    /// Intermediate plus final outcome is zero.
    SumZero,
    /// Intermediate and final outcomes are equal.
    Equal,
    /// The final outcome equals the given value.
    FinalIs(f64),
    /// Intermediate and final outcomes both equal the given value.
    BothAre(f64),
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= EIGENVALUE_CLUSTER_TOLERANCE
}

impl Relation {
    pub fn holds(&self, intermediate: Option<f64>, final_outcome: f64) -> bool {
        match *self {
            Relation::OppositeJointSpins => {
                let (s1, s2) = decode_joint_spins(final_outcome);
                same(s1 + s2, 0.0)
            }
            Relation::BothZero => intermediate.is_some_and(|a| same(a, 0.0)) && same(final_outcome, 0.0),
            Relation::SumZero => intermediate.is_some_and(|a| same(a + final_outcome, 0.0)),
            Relation::Equal => intermediate.is_some_and(|a| same(a, final_outcome)),
            Relation::FinalIs(v) => same(final_outcome, v),
            Relation::BothAre(v) => intermediate.is_some_and(|a| same(a, v)) && same(final_outcome, v),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::OppositeJointSpins => write!(f, "{{s1}} + {{s2}} = 0 at t2"),
            Relation::BothZero => write!(f, "{{t}} = 0 and {{t2}} = 0"),
            Relation::SumZero => write!(f, "{{t}} + {{t2}} = 0"),
            Relation::Equal => write!(f, "{{t}} - {{t2}} = 0"),
            Relation::FinalIs(v) => write!(f, "{{t2}} = {v}"),
            Relation::BothAre(v) => write!(f, "{{t}} = {{t2}} = {v}"),
        }
    }
}

/// A pre-selection, optional intermediate measurement and final measurement.
#[derive(Clone, Debug)]
pub struct Scenario {
    label: String,
    pre_state: StateVector,
    pre_label: String,
    intermediate: Option<Observable>,
    final_obs: Observable,
    target_final_outcome: Option<f64>,
    relation: Option<Relation>,
    notes: String,
}

impl Scenario {
    /// When a post-selection target is given, the final measurement must be
    /// complete and the target one of its eigenvalues.
    pub fn new(
        label: impl Into<String>,
        pre_state: StateVector,
        intermediate: Option<Observable>,
        final_obs: Observable,
        target_final_outcome: Option<f64>,
    ) -> Result<Self> {
        let label = label.into();
        check_dim(pre_state.dim(), final_obs.dim())?;
        if let Some(obs) = &intermediate {
            check_dim(pre_state.dim(), obs.dim())?;
        }
        if let Some(target) = target_final_outcome {
            let index = final_obs.index_of(target).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "target {target} is not an eigenvalue of `{}`",
                    final_obs.label()
                ))
            })?;
            if final_obs.rank(index) != 1 {
                return Err(Error::InvalidArgument(format!(
                    "post-selection on `{}` = {target} needs a rank-1 final projector",
                    final_obs.label()
                )));
            }
        }
        Ok(Self {
            pre_label: label.clone(),
            label,
            pre_state,
            intermediate,
            final_obs,
            target_final_outcome,
            relation: None,
            notes: String::new(),
        })
    }

    pub fn with_relation(mut self, relation: Relation) -> Self {
        self.relation = Some(relation);
        self
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn with_pre_label(mut self, pre_label: impl Into<String>) -> Self {
        self.pre_label = pre_label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn pre_state(&self) -> &StateVector {
        &self.pre_state
    }

    /// Name of the prepared state, used for the t1 event.
    pub fn pre_label(&self) -> &str {
        &self.pre_label
    }

    pub fn intermediate(&self) -> Option<&Observable> {
        self.intermediate.as_ref()
    }

    pub fn final_observable(&self) -> &Observable {
        &self.final_obs
    }

    pub fn target_final_outcome(&self) -> Option<f64> {
        self.target_final_outcome
    }

    pub fn relation(&self) -> Option<Relation> {
        self.relation
    }

    pub fn notes(&self) -> &str {
        &self.notes
    }

    pub fn dim(&self) -> usize {
        self.pre_state.dim()
    }

    /// Pre-selected state and the post-selected final eigenvector.
    pub fn two_state_vector(&self) -> Result<TwoStateVector> {
        let target = self
            .target_final_outcome
            .ok_or_else(|| Error::InvalidArgument(format!("scenario `{}` has no post-selection", self.label)))?;
        let index = self.final_obs.index_of(target).expect("validated on construction");
        let post = self.final_obs.eigenvector(index).expect("validated on construction");
        TwoStateVector::new(self.pre_state.clone(), post)
    }

    /// ABL prediction for the intermediate measurement in the post-selected
    /// ensemble.
    pub fn abl_prediction(&self) -> Result<OutcomeDistribution> {
        let obs = self.intermediate.as_ref().ok_or_else(|| {
            Error::InvalidArgument(format!("scenario `{}` has no intermediate measurement", self.label))
        })?;
        abl_distribution(&self.two_state_vector()?, obs)
    }

    /// Exact probability that [`Scenario::relation`] holds in a trial.
    pub fn relation_probability(&self) -> Result<f64> {
        let relation = self
            .relation
            .ok_or_else(|| Error::InvalidArgument(format!("scenario `{}` has no relation", self.label)))?;
        match &self.intermediate {
            Some(obs) => Ok(sequential_joint_distribution(&self.pre_state, obs, &self.final_obs)?
                .iter()
                .filter(|j| relation.holds(Some(j.intermediate), j.final_outcome))
                .map(|j| j.probability)
                .sum()),
            None => Ok(born_distribution(&self.pre_state, &self.final_obs)?
                .entries
                .iter()
                .filter(|e| relation.holds(None, e.eigenvalue))
                .map(|e| e.probability)
                .sum()),
        }
    }
}

/// Three spin measurements in one plane: prepare up along `a`, measure along
/// `b` (at `theta_ab` from `a`), then along `c` (at `theta_bc` from `b`),
/// post-selecting "up" along `c`.
pub fn sharp_shanks(theta_ab: f64, theta_bc: f64) -> Scenario {
    let b = spin_observable(theta_ab, 0.0).with_label("σb");
    let c = spin_observable(theta_ab + theta_bc, 0.0).with_label("σc");
    Scenario::new("sharp-shanks", spin_state(0.0, 0.0), Some(b), c, Some(1.0))
        .expect("spin scenario is well formed")
        .with_pre_label("↑a")
        .with_notes(format!(
            "prepare ↑a; measure σb at θab = {:.6}°; post-select ↑c at θab + θbc = {:.6}°",
            theta_ab.to_degrees(),
            (theta_ab + theta_bc).to_degrees()
        ))
}

/// Pre- and post-selected `|↑z⟩` with an optional spin measurement at angle
/// `theta` in between.
pub fn spin_counterexample(theta: f64, with_intermediate: bool) -> Scenario {
    let xi = with_intermediate.then(|| spin_observable(theta, 0.0).with_label("σξ"));
    let notes = if with_intermediate {
        format!("↑z at t1 and t2; σξ measured at t with θ = {:.6}°", theta.to_degrees())
    } else {
        "↑z at t1 and t2; no intermediate measurement, so every trial passes post-selection".to_string()
    };
    Scenario::new(
        "spin-counterexample",
        StateVector::basis(2, 0),
        xi,
        sigma_z(),
        Some(1.0),
    )
    .expect("spin scenario is well formed")
    .with_pre_label("↑z")
    .with_notes(notes)
}

/// Which box, if any, is opened at the intermediate time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThreeBoxSearch {
    None,
    A,
    B,
    C,
}

impl ThreeBoxSearch {
    fn index(self) -> Option<usize> {
        match self {
            ThreeBoxSearch::None => None,
            ThreeBoxSearch::A => Some(0),
            ThreeBoxSearch::B => Some(1),
            ThreeBoxSearch::C => Some(2),
        }
    }
}

impl FromStr for ThreeBoxSearch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(ThreeBoxSearch::None),
            "a" => Ok(ThreeBoxSearch::A),
            "b" => Ok(ThreeBoxSearch::B),
            "c" => Ok(ThreeBoxSearch::C),
            _ => Err(Error::UnknownVariant(s.to_string())),
        }
    }
}

const BOX_NAMES: [&str; 3] = ["A", "B", "C"];

/// Projector onto box `index` (0 = A, 1 = B, 2 = C).
pub fn box_projector(index: usize) -> LinearOperator {
    let mut m = CMatrix::zeros(3, 3);
    m[(index, index)] = C64::new(1.0, 0.0);
    LinearOperator::new(m).expect("square")
}

/// `(|A⟩+|B⟩+|C⟩)/√3` forward, `(|A⟩+|B⟩−|C⟩)/√3` backward.
pub fn three_box_states() -> TwoStateVector {
    TwoStateVector::new(
        StateVector::from_real(&[1.0, 1.0, 1.0]).expect("non-zero"),
        StateVector::from_real(&[1.0, 1.0, -1.0]).expect("non-zero"),
    )
    .expect("same dimension")
}

/// Complete final measurement whose eigenvalue 1 is `|Ψ₂⟩`; the basis is
/// completed by Gram-Schmidt over `|A⟩, |B⟩` (eigenvalues 2 and 3).
pub fn three_box_final() -> Observable {
    let psi2 = three_box_states().backward().clone();
    let mut basis: Vec<StateVector> = vec![psi2];
    for k in 0..2 {
        let mut v = StateVector::basis(3, k).as_vector().clone();
        for e in &basis {
            let overlap = e.as_vector().dotc(&v);
            v -= e.as_vector() * overlap;
        }
        basis.push(StateVector::from_vector(v).expect("independent"));
    }
    let parts = basis
        .iter()
        .zip([1.0, 2.0, 3.0])
        .map(|(e, value)| (value, e.as_vector() * e.as_vector().adjoint()))
        .collect();
    Observable::from_spectral("Ψ2 basis", parts).expect("orthonormal basis")
}

/// Two-outcome search of one box: 1 = found, 0 = not found.
pub fn box_search(index: usize) -> Observable {
    let p = box_projector(index).matrix().clone();
    let rest = CMatrix::identity(3, 3) - &p;
    Observable::from_spectral(format!("search {}", BOX_NAMES[index]), vec![(0.0, rest), (1.0, p)])
        .expect("projector pair")
}

/// The three-box particle, optionally searched for in one box.
pub fn three_box(search: ThreeBoxSearch) -> Scenario {
    let tsv = three_box_states();
    let intermediate = search.index().map(box_search);
    let notes = match search.index() {
        Some(k) => format!("pre (A+B+C)/√3, post (A+B−C)/√3; open box {} at t", BOX_NAMES[k]),
        None => "pre (A+B+C)/√3, post (A+B−C)/√3; no intermediate measurement".to_string(),
    };
    Scenario::new(
        "three-box",
        tsv.forward().clone(),
        intermediate,
        three_box_final(),
        Some(1.0),
    )
    .expect("three-box scenario is well formed")
    .with_pre_label("(A+B+C)/√3")
    .with_notes(notes)
}

/// `(|↑⟩|↓⟩ − |↓⟩|↑⟩)/√2`.
pub fn singlet() -> StateVector {
    let (up, down) = (StateVector::basis(2, 0), StateVector::basis(2, 1));
    let ud = tensor_product(&up, &down);
    let du = tensor_product(&down, &up);
    StateVector::normalized(
        ud.amplitudes()
            .iter()
            .zip(du.amplitudes())
            .map(|(a, b)| a - b)
            .collect(),
    )
    .expect("non-zero")
}

/// Joint measurement of spin observables on two particles, realised as the
/// complete observable `2·(A ⊗ I) + I ⊗ B`. Outcome `v` encodes
/// `(s1, s2) = (sign v, v − 2·sign v)`; see [`decode_joint_spins`].
pub fn joint_spin_observable(first: &Observable, second: &Observable) -> Observable {
    let a = first.to_operator().kron(&LinearOperator::identity(2));
    let b = LinearOperator::identity(2).kron(&second.to_operator());
    spectral_decompose(&(2.0 * a + b), format!("{}₁⊗{}₂", first.label(), second.label()))
        .expect("sum of Hermitian operators")
}

pub fn decode_joint_spins(value: f64) -> (f64, f64) {
    let s1 = value.signum();
    (s1, value - 2.0 * s1)
}

/// Two-particle singlet experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingletVariant {
    /// σ1x and σ2x measured jointly.
    ComponentsX,
    /// σ1x + σ2x then σ1y + σ2y on the same pair.
    SumsSequential,
    /// σ1x at t with σ2x at t2, and separately σ2y at t with σ1y at t2.
    TwoTime,
    /// σ1x at t, then σ1y and σ2y jointly at t2.
    Incompatible,
}

impl FromStr for SingletVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "components-x" => Ok(SingletVariant::ComponentsX),
            "sums-sequential" => Ok(SingletVariant::SumsSequential),
            "two-time" => Ok(SingletVariant::TwoTime),
            "incompatible" => Ok(SingletVariant::Incompatible),
            _ => Err(Error::UnknownVariant(s.to_string())),
        }
    }
}

fn singlet_scenario(
    label: &str,
    intermediate: Option<Observable>,
    final_obs: Observable,
    relation: Relation,
    notes: &str,
) -> Scenario {
    Scenario::new(label, singlet(), intermediate, final_obs, None)
        .expect("singlet scenario is well formed")
        .with_pre_label("singlet")
        .with_relation(relation)
        .with_notes(notes)
}

/// Returns one scenario, or two for [`SingletVariant::TwoTime`] (the two
/// two-time relations need different measurement orders and cannot share a
/// run).
pub fn singlet_relations(variant: SingletVariant) -> Vec<Scenario> {
    let x1 = sigma_x().embed_left(2).with_label("σ1x");
    let y1 = sigma_y().embed_left(2).with_label("σ1y");
    let x2 = sigma_x().embed_right(2).with_label("σ2x");
    let y2 = sigma_y().embed_right(2).with_label("σ2y");
    match variant {
        SingletVariant::ComponentsX => vec![singlet_scenario(
            "singlet:components-x",
            None,
            joint_spin_observable(&sigma_x(), &sigma_x()),
            Relation::OppositeJointSpins,
            "σ1x and σ2x measured jointly at t2",
        )],
        SingletVariant::SumsSequential => {
            let sum_x = spectral_decompose(&(x1.to_operator() + x2.to_operator()), "σ1x+σ2x").expect("Hermitian");
            let sum_y = spectral_decompose(&(y1.to_operator() + y2.to_operator()), "σ1y+σ2y").expect("Hermitian");
            vec![singlet_scenario(
                "singlet:sums-sequential",
                Some(sum_x),
                sum_y,
                Relation::BothZero,
                "σ1x+σ2x at t, then σ1y+σ2y at t2 on the same pair",
            )]
        }
        SingletVariant::TwoTime => vec![
            singlet_scenario(
                "singlet:two-time-x",
                Some(x1),
                x2,
                Relation::SumZero,
                "σ1x at t, σ2x at t2",
            ),
            singlet_scenario(
                "singlet:two-time-y",
                Some(y2),
                y1,
                Relation::SumZero,
                "σ2y at t, σ1y at t2",
            ),
        ],
        SingletVariant::Incompatible => vec![singlet_scenario(
            "singlet:incompatible",
            Some(x1),
            joint_spin_observable(&sigma_y(), &sigma_y()),
            Relation::OppositeJointSpins,
            "σ1x at t disturbs σ1y; σ1y and σ2y measured jointly at t2",
        )],
    }
}

/// Single spin prepared in `|↑y⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingleParticleVariant {
    /// σx measured twice in a row.
    Xx,
    /// σy measured once.
    Y,
}

impl FromStr for SingleParticleVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xx" => Ok(SingleParticleVariant::Xx),
            "y" => Ok(SingleParticleVariant::Y),
            _ => Err(Error::UnknownVariant(s.to_string())),
        }
    }
}

pub fn single_particle_y(variant: SingleParticleVariant) -> Scenario {
    let up_y = spin_state(FRAC_PI_2, FRAC_PI_2);
    let scenario = match variant {
        SingleParticleVariant::Xx => {
            Scenario::new("single-particle-y:xx", up_y, Some(sigma_x()), sigma_x(), None).map(|s| {
                s.with_relation(Relation::Equal)
                    .with_notes("↑y; σx at t, σx again at t2")
            })
        }
        SingleParticleVariant::Y => Scenario::new("single-particle-y:y", up_y, None, sigma_y(), None)
            .map(|s| s.with_relation(Relation::FinalIs(1.0)).with_notes("↑y; σy at t2")),
    };
    scenario.expect("spin scenario is well formed").with_pre_label("↑y")
}

/// `|↑z⟩` followed by two σx measurements, without post-selection.
pub fn double_sigma_x() -> Scenario {
    Scenario::new(
        "double-sigma-x",
        StateVector::basis(2, 0),
        Some(sigma_x()),
        sigma_x(),
        None,
    )
    .expect("spin scenario is well formed")
    .with_pre_label("↑z")
    .with_relation(Relation::BothAre(1.0))
    .with_notes("↑z; σx at t and again at t2; counts σx(t) = σx(t2) = +1")
}

/// Angle conversion used at the command line.
pub fn degrees(value: f64) -> f64 {
    value * PI / 180.0
}

/// Overlap check used by tests and the CLI: `|⟨a|b⟩|²`.
pub fn transition_probability(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr())
}
