//! Dense finite-dimensional Hilbert-space primitives.
//!
//! Everything here is small (dimension <= 8 in practice) and stored as dense
//! `nalgebra` matrices of [`C64`]. Composite systems use particle-1-major
//! ordering: basis index `i_a * dim_b + i_b`.

use std::ops::{Add, Mul};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Allowed deviation of `Σ|a_k|²` from one.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Entrywise tolerance for projector identities (hermiticity, idempotence,
/// orthogonality, completeness).
pub const PROJECTOR_TOLERANCE: f64 = 1e-10;
/// Eigenvalues closer than this are treated as one degenerate eigenvalue.
pub const EIGENVALUE_CLUSTER_TOLERANCE: f64 = 1e-8;

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    /// Builds a state from amplitudes that are already normalized.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("state has no amplitudes".into()));
        }
        let amplitudes = CVector::from_vec(amplitudes);
        let norm_sqr = norm_sqr(&amplitudes);
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "squared norm {norm_sqr} differs from 1 by more than {NORM_TOLERANCE:e}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Builds a state by rescaling arbitrary non-zero amplitudes.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("state has no amplitudes".into()));
        }
        Self::from_vector(CVector::from_vec(amplitudes))
            .ok_or_else(|| Error::InvalidState("cannot normalize a zero or non-finite vector".into()))
    }

    /// Real amplitudes, rescaled to unit norm.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// Normalizes `v`; `None` when its norm is zero (below 1e-150) or not finite.
    pub(crate) fn from_vector(v: CVector) -> Option<Self> {
        let norm = norm_sqr(&v).sqrt();
        if !norm.is_finite() || norm < 1e-150 {
            return None;
        }
        Some(Self {
            amplitudes: v.unscale(norm),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.amplitudes
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        check_dim(dim, self.dim())
    }
}

fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// `⟨a|b⟩ = Σ_k conj(a_k) b_k`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    check_dim(a.dim(), b.dim())?;
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// Product state `|a⟩ ⊗ |b⟩` in particle-1-major order.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> StateVector {
    let (da, db) = (a.dim(), b.dim());
    let amplitudes = CVector::from_fn(da * db, |k, _| a.amplitudes[k / db] * b.amplitudes[k % db]);
    StateVector { amplitudes }
}

/// An arbitrary square operator.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    matrix: CMatrix,
}

impl LinearOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() == 0 || !matrix.is_square() {
            return Err(Error::InvalidOperator(format!(
                "operator must be a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    /// `entries` holds `dim * dim` values in row-major order.
    pub fn from_row_major(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::InvalidOperator(format!(
                "expected {} matrix entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(CMatrix::from_row_slice(dim, dim, &entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn pauli_x() -> Self {
        Self::real_2x2([0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> Self {
        let (zero, i) = (C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        Self {
            matrix: CMatrix::from_row_slice(2, 2, &[zero, -i, i, zero]),
        }
    }

    pub fn pauli_z() -> Self {
        Self::real_2x2([1.0, 0.0, 0.0, -1.0])
    }

    fn real_2x2(rows: [f64; 4]) -> Self {
        let entries: Vec<C64> = rows.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self {
            matrix: CMatrix::from_row_slice(2, 2, &entries),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &LinearOperator) -> LinearOperator {
        LinearOperator {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        max_abs_diff(&self.matrix, &self.matrix.adjoint()) <= tolerance
    }

    pub fn apply(&self, state: &StateVector) -> Result<CVector> {
        state.check_dim(self.dim())?;
        Ok(&self.matrix * &state.amplitudes)
    }

    /// `⟨bra|A|ket⟩`.
    pub fn matrix_element(&self, bra: &StateVector, ket: &StateVector) -> Result<C64> {
        bra.check_dim(self.dim())?;
        Ok(bra.amplitudes.dotc(&self.apply(ket)?))
    }
}

impl Add for LinearOperator {
    type Output = LinearOperator;

    fn add(self, rhs: LinearOperator) -> LinearOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        LinearOperator {
            matrix: self.matrix + rhs.matrix,
        }
    }
}

impl Mul<LinearOperator> for f64 {
    type Output = LinearOperator;

    fn mul(self, rhs: LinearOperator) -> LinearOperator {
        LinearOperator {
            matrix: rhs.matrix * C64::new(self, 0.0),
        }
    }
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// A Hermitian operator in spectral form: distinct eigenvalues in ascending
/// order, each with the orthogonal projector onto its eigenspace.
#[derive(Clone, Debug)]
pub struct Observable {
    label: String,
    eigenvalues: Vec<f64>,
    projectors: Vec<CMatrix>,
}

impl Observable {
    /// Builds an observable from `(eigenvalue, projector)` pairs and checks
    /// that the projectors form a complete orthogonal resolution of the
    /// identity.
    pub fn from_spectral(label: impl Into<String>, mut parts: Vec<(f64, CMatrix)>) -> Result<Self> {
        let label = label.into();
        if parts.is_empty() {
            return Err(Error::InvalidOperator(format!(
                "observable `{label}` has no eigenvalues"
            )));
        }
        if parts.iter().any(|(value, _)| !value.is_finite()) {
            return Err(Error::InvalidOperator(format!(
                "observable `{label}` has a non-finite eigenvalue"
            )));
        }
        parts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let dim = parts[0].1.nrows();
        for (value, p) in &parts {
            if !p.is_square() || p.nrows() != dim || dim == 0 {
                return Err(Error::InvalidOperator(format!(
                    "projector for eigenvalue {value} of `{label}` is {}x{}, expected {dim}x{dim}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            if max_abs_diff(p, &p.adjoint()) > PROJECTOR_TOLERANCE {
                return Err(Error::InvalidOperator(format!(
                    "projector for eigenvalue {value} of `{label}` is not Hermitian"
                )));
            }
            if max_abs_diff(&(p * p), p) > PROJECTOR_TOLERANCE {
                return Err(Error::InvalidOperator(format!(
                    "projector for eigenvalue {value} of `{label}` is not idempotent"
                )));
            }
        }
        for pair in parts.windows(2) {
            if pair[1].0 - pair[0].0 <= EIGENVALUE_CLUSTER_TOLERANCE {
                return Err(Error::InvalidOperator(format!(
                    "eigenvalues {} and {} of `{label}` are not distinct",
                    pair[0].0, pair[1].0
                )));
            }
        }
        let zero = CMatrix::zeros(dim, dim);
        for (i, (vi, pi)) in parts.iter().enumerate() {
            for (vj, pj) in &parts[i + 1..] {
                if max_abs_diff(&(pi * pj), &zero) > PROJECTOR_TOLERANCE {
                    return Err(Error::InvalidOperator(format!(
                        "projectors for eigenvalues {vi} and {vj} of `{label}` are not orthogonal"
                    )));
                }
            }
        }
        let total = parts.iter().fold(zero, |acc, (_, p)| acc + p);
        if max_abs_diff(&total, &CMatrix::identity(dim, dim)) > PROJECTOR_TOLERANCE {
            return Err(Error::InvalidOperator(format!(
                "projectors of `{label}` do not sum to the identity"
            )));
        }
        let (eigenvalues, projectors) = parts.into_iter().unzip();
        Ok(Self {
            label,
            eigenvalues,
            projectors,
        })
    }

    /// The trivial observable with the single outcome 1.
    pub fn identity(dim: usize) -> Self {
        Self {
            label: "I".into(),
            eigenvalues: vec![1.0],
            projectors: vec![CMatrix::identity(dim, dim)],
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    /// Distinct eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn num_outcomes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Index of `eigenvalue`, matched within the clustering tolerance.
    pub fn index_of(&self, eigenvalue: f64) -> Option<usize> {
        self.eigenvalues
            .iter()
            .position(|&v| (v - eigenvalue).abs() <= EIGENVALUE_CLUSTER_TOLERANCE)
    }

    pub fn rank(&self, index: usize) -> usize {
        self.projectors[index].trace().re.round() as usize
    }

    /// True when every eigenspace is one-dimensional.
    pub fn is_complete(&self) -> bool {
        (0..self.num_outcomes()).all(|i| self.rank(i) == 1)
    }

    /// Unit vector spanning a rank-1 eigenspace (phase unspecified).
    pub fn eigenvector(&self, index: usize) -> Option<StateVector> {
        if self.rank(index) != 1 {
            return None;
        }
        let p = &self.projectors[index];
        let column = (0..p.ncols()).max_by(|&a, &b| p.column(a).norm().total_cmp(&p.column(b).norm()))?;
        StateVector::from_vector(p.column(column).into_owned())
    }

    pub fn projector_operator(&self, index: usize) -> LinearOperator {
        LinearOperator {
            matrix: self.projectors[index].clone(),
        }
    }

    /// `Σ_i λ_i P_i`.
    pub fn to_operator(&self) -> LinearOperator {
        let dim = self.dim();
        let matrix = self
            .eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(dim, dim), |acc, (&v, p)| acc + p * C64::new(v, 0.0));
        LinearOperator { matrix }
    }

    /// `self ⊗ I_right`: the same measurement acting on the first factor.
    pub fn embed_left(&self, dim_right: usize) -> Observable {
        let id = CMatrix::identity(dim_right, dim_right);
        self.map_projectors(|p| p.kronecker(&id))
    }

    /// `I_left ⊗ self`: the same measurement acting on the second factor.
    pub fn embed_right(&self, dim_left: usize) -> Observable {
        let id = CMatrix::identity(dim_left, dim_left);
        self.map_projectors(|p| id.kronecker(p))
    }

    fn map_projectors(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Observable {
        Observable {
            label: self.label.clone(),
            eigenvalues: self.eigenvalues.clone(),
            projectors: self.projectors.iter().map(f).collect(),
        }
    }
}

/// Spectral form of a Hermitian operator.
///
/// Eigenvalues within [`EIGENVALUE_CLUSTER_TOLERANCE`] of their neighbour are
/// merged into one degenerate eigenvalue whose projector spans all of the
/// cluster's eigenvectors. Cluster means are rounded to 10 decimal places so
/// that integer spectra come out exact.
pub fn spectral_decompose(op: &LinearOperator, label: impl Into<String>) -> Result<Observable> {
    if !op.is_hermitian(PROJECTOR_TOLERANCE) {
        return Err(Error::InvalidOperator(
            "spectral decomposition requires a Hermitian operator".into(),
        ));
    }
    let dim = op.dim();
    let hermitian = (op.matrix() + op.matrix().adjoint()) * C64::new(0.5, 0.0);
    let eigen = hermitian.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(cluster)
                if eigen.eigenvalues[k] - eigen.eigenvalues[*cluster.last().unwrap()]
                    <= EIGENVALUE_CLUSTER_TOLERANCE =>
            {
                cluster.push(k)
            }
            _ => clusters.push(vec![k]),
        }
    }

    let parts = clusters
        .iter()
        .map(|cluster| {
            let mean = cluster.iter().map(|&k| eigen.eigenvalues[k]).sum::<f64>() / cluster.len() as f64;
            let value = (mean * 1e10).round() / 1e10 + 0.0;
            let projector = cluster.iter().fold(CMatrix::zeros(dim, dim), |acc, &k| {
                let v = eigen.eigenvectors.column(k);
                acc + v * v.adjoint()
            });
            (value, projector)
        })
        .collect();
    Observable::from_spectral(label, parts)
}

/// Spin-up state along the direction with polar angle `theta` and azimuth
/// `phi`: `cos(θ/2)|↑z⟩ + e^{iφ} sin(θ/2)|↓z⟩`, with the global phase chosen
/// so that the `|↑z⟩` amplitude is real and non-negative.
pub fn spin_state(theta: f64, phi: f64) -> StateVector {
    let (mut up, mut down) = (
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    );
    if up.re < 0.0 {
        up = -up;
        down = -down;
    }
    StateVector {
        amplitudes: CVector::from_vec(vec![up, down]),
    }
}

/// Spin component along `(theta, phi)` with eigenvalues ±1.
pub fn spin_observable(theta: f64, phi: f64) -> Observable {
    let up = spin_state(theta, phi);
    let p_up = up.as_vector() * up.as_vector().adjoint();
    let p_down = CMatrix::identity(2, 2) - &p_up;
    Observable {
        label: format!("σ(θ={:.6}, φ={:.6})", theta.to_degrees(), phi.to_degrees()),
        eigenvalues: vec![-1.0, 1.0],
        projectors: vec![p_down, p_up],
    }
}

pub fn sigma_x() -> Observable {
    spin_observable(std::f64::consts::FRAC_PI_2, 0.0).with_label("σx")
}

pub fn sigma_y() -> Observable {
    spin_observable(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2).with_label("σy")
}

pub fn sigma_z() -> Observable {
    spin_observable(0.0, 0.0).with_label("σz")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn up() -> StateVector {
        StateVector::basis(2, 0)
    }

    fn down() -> StateVector {
        StateVector::basis(2, 1)
    }

    fn assert_matrix_close(a: &CMatrix, b: &CMatrix, tol: f64) {
        assert!(max_abs_diff(a, b) <= tol, "{a} vs {b}");
    }

    #[test]
    fn inner_products_of_basis_states() {
        assert_eq!(inner_product(&up(), &up()).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(inner_product(&up(), &down()).unwrap(), C64::new(0.0, 0.0));
        let overlap = inner_product(&spin_state(60f64.to_radians(), 0.0), &up()).unwrap();
        assert_abs_diff_eq!(overlap.norm_sqr(), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn inner_product_dimension_mismatch() {
        let err = inner_product(&up(), &StateVector::basis(3, 0)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, actual: 3 });
    }

    #[test]
    fn state_rejects_unnormalized_amplitudes() {
        assert!(StateVector::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
        assert!(StateVector::new(vec![]).is_err());
        assert!(StateVector::normalized(vec![C64::new(0.0, 0.0)]).is_err());
        let s = StateVector::from_real(&[3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.6, epsilon = 1e-15);
    }

    #[test]
    fn tensor_product_is_particle_one_major() {
        let s = tensor_product(&up(), &down());
        let expected = [0.0, 1.0, 0.0, 0.0];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert_eq!(*a, C64::new(e, 0.0));
        }
    }

    #[test]
    fn singlet_amplitudes() {
        let ud = tensor_product(&up(), &down());
        let du = tensor_product(&down(), &up());
        let raw: Vec<C64> = ud
            .amplitudes()
            .iter()
            .zip(du.amplitudes())
            .map(|(a, b)| a - b)
            .collect();
        let singlet = StateVector::normalized(raw).unwrap();
        let expected = [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0];
        for (a, e) in singlet.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn spin_state_conventions() {
        assert_eq!(spin_state(0.0, 0.0), up());
        let flipped = spin_state(PI, 0.0);
        assert_abs_diff_eq!(flipped.amplitudes()[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(flipped.amplitudes()[1].re, 1.0, epsilon = 1e-15);
        // Past θ = π the up amplitude is flipped back to non-negative.
        let s = spin_state(1.5 * PI, 0.3);
        assert!(s.amplitudes()[0].re >= 0.0 && s.amplitudes()[0].im == 0.0);
    }

    #[test]
    fn spin_observables_match_pauli_matrices() {
        assert_matrix_close(
            sigma_z().to_operator().matrix(),
            LinearOperator::pauli_z().matrix(),
            1e-15,
        );
        assert_matrix_close(
            sigma_x().to_operator().matrix(),
            LinearOperator::pauli_x().matrix(),
            1e-15,
        );
        assert_matrix_close(
            spin_observable(FRAC_PI_2, FRAC_PI_2).to_operator().matrix(),
            LinearOperator::pauli_y().matrix(),
            1e-15,
        );
    }

    #[test]
    fn decompose_sigma_z_and_identity() {
        let z = spectral_decompose(&LinearOperator::pauli_z(), "σz").unwrap();
        assert_eq!(z.eigenvalues(), &[-1.0, 1.0]);
        assert!(z.is_complete());
        assert_matrix_close(
            &z.projectors()[1],
            &(up().as_vector() * up().as_vector().adjoint()),
            1e-12,
        );

        let id = spectral_decompose(&LinearOperator::identity(3), "I").unwrap();
        assert_eq!(id.eigenvalues(), &[1.0]);
        assert_matrix_close(&id.projectors()[0], &CMatrix::identity(3, 3), 1e-12);
    }

    #[test]
    fn decompose_sum_of_x_components() {
        // Independent route: σ1x+σ2x has eigenvalues λ where det(M - λ) = 0;
        // for each candidate the kernel dimension (4 - rank) gives the multiplicity.
        let x = LinearOperator::pauli_x();
        let id = LinearOperator::identity(2);
        let sum = x.kron(&id) + id.kron(&x);
        let obs = spectral_decompose(&sum, "σ1x+σ2x").unwrap();
        assert_eq!(obs.eigenvalues(), &[-2.0, 0.0, 2.0]);
        let ranks: Vec<usize> = (0..3).map(|i| obs.rank(i)).collect();
        assert_eq!(ranks, vec![1, 2, 1]);
        for (value, expected_rank) in [(-2.0, 1), (0.0, 2), (2.0, 1)] {
            let shifted = sum.matrix() - CMatrix::identity(4, 4) * C64::new(value, 0.0);
            let rank = shifted.map(|z| z.re).rank(1e-9);
            assert_eq!(4 - rank, expected_rank);
        }
        assert_matrix_close(obs.to_operator().matrix(), sum.matrix(), 1e-8);
    }

    #[test]
    fn decompose_rejects_non_hermitian() {
        let op = LinearOperator::from_row_major(
            2,
            vec![
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            spectral_decompose(&op, "raise"),
            Err(Error::InvalidOperator(_))
        ));
    }

    #[test]
    fn from_spectral_validates() {
        let p = up().as_vector() * up().as_vector().adjoint();
        // Incomplete.
        assert!(Observable::from_spectral("bad", vec![(1.0, p.clone())]).is_err());
        // Repeated eigenvalue.
        let q = CMatrix::identity(2, 2) - &p;
        assert!(Observable::from_spectral("bad", vec![(1.0, p.clone()), (1.0, q.clone())]).is_err());
        // Not orthogonal.
        let plus = spin_state(FRAC_PI_2, 0.0);
        let px = plus.as_vector() * plus.as_vector().adjoint();
        assert!(Observable::from_spectral("bad", vec![(1.0, p.clone()), (2.0, px)]).is_err());
        // Sorted ascending on success.
        let ok = Observable::from_spectral("ok", vec![(3.0, p), (-1.0, q)]).unwrap();
        assert_eq!(ok.eigenvalues(), &[-1.0, 3.0]);
    }

    #[test]
    fn embedded_observables_act_on_one_factor() {
        let x1 = sigma_x().embed_left(2);
        let x2 = sigma_x().embed_right(2);
        let x = LinearOperator::pauli_x();
        let id = LinearOperator::identity(2);
        assert_matrix_close(x1.to_operator().matrix(), x.kron(&id).matrix(), 1e-15);
        assert_matrix_close(x2.to_operator().matrix(), id.kron(&x).matrix(), 1e-15);
        assert_eq!(x1.rank(0), 2);
    }

    #[test]
    fn eigenvector_of_rank_one_projector() {
        let obs = spin_observable(1.0, 0.4);
        let v = obs.eigenvector(1).unwrap();
        let overlap = inner_product(&v, &spin_state(1.0, 0.4)).unwrap();
        assert_abs_diff_eq!(overlap.norm(), 1.0, epsilon = 1e-12);
        assert!(sigma_x().embed_left(2).eigenvector(0).is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_state(dim: usize) -> impl Strategy<Value = StateVector> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map("non-zero", |v| {
                StateVector::normalized(v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).ok()
            })
        }

        fn arb_hermitian(dim: usize) -> impl Strategy<Value = LinearOperator> {
            proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), dim * dim).prop_map(move |v| {
                let m = CMatrix::from_fn(dim, dim, |r, c| C64::new(v[r * dim + c].0, v[r * dim + c].1));
                let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
                LinearOperator::new(h).unwrap()
            })
        }

        proptest! {
            #[test]
            fn inner_product_is_conjugate_symmetric(a in arb_state(3), b in arb_state(3)) {
                let ab = inner_product(&a, &b).unwrap();
                let ba = inner_product(&b, &a).unwrap();
                prop_assert!((ab - ba.conj()).norm() < 1e-14);
            }

            #[test]
            fn tensor_product_is_normalized_and_associative(a in arb_state(2), b in arb_state(2), c in arb_state(2)) {
                let left = tensor_product(&tensor_product(&a, &b), &c);
                let right = tensor_product(&a, &tensor_product(&b, &c));
                let norm: f64 = left.amplitudes().iter().map(|z| z.norm_sqr()).sum();
                prop_assert!((norm - 1.0).abs() < 1e-12);
                for (x, y) in left.amplitudes().iter().zip(right.amplitudes()) {
                    prop_assert!((x - y).norm() < 1e-15);
                }
            }

            #[test]
            fn spectral_decomposition_reconstructs(m in (2usize..=4).prop_flat_map(arb_hermitian)) {
                let obs = spectral_decompose(&m, "M").unwrap();
                prop_assert!(max_abs_diff(obs.to_operator().matrix(), m.matrix()) < 1e-8);
                let total: usize = (0..obs.num_outcomes()).map(|i| obs.rank(i)).sum();
                prop_assert_eq!(total, m.dim());
            }

            #[test]
            fn spin_observables_are_valid(theta in 0.0f64..(2.0 * PI), phi in 0.0f64..(2.0 * PI)) {
                let obs = spin_observable(theta, phi);
                let rebuilt = Observable::from_spectral(
                    "check",
                    obs.eigenvalues().iter().copied().zip(obs.projectors().iter().cloned()).collect(),
                );
                prop_assert!(rebuilt.is_ok());
                prop_assert!(obs.is_complete());
            }
        }
    }
}
