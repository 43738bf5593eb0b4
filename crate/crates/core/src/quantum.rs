//! Dense complex linear algebra and state primitives for one or two spins.
//!
//! Every two-spin matrix uses the basis order `|a,b⟩ = |00⟩, |01⟩, |10⟩, |11⟩`
//! with spin `a` as the most significant factor. `|0⟩` is spin up (`Iz = +1/2`).

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_SLACK: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Spin label. `A` is the carbon (most significant), `B` the proton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    A,
    B,
}

impl Spin {
    pub fn other(self) -> Spin {
        match self {
            Spin::A => Spin::B,
            Spin::B => Spin::A,
        }
    }

    /// Bit position of this spin inside a two-spin basis index.
    pub(crate) fn bit(self) -> usize {
        match self {
            Spin::A => 1,
            Spin::B => 0,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spin::A => f.write_str("a"),
            Spin::B => f.write_str("b"),
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 2 || d == 4 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

fn is_diagonal(m: &CMatrix) -> bool {
    m.iter().enumerate().all(|(k, z)| k % m.nrows() == k / m.nrows() || *z == ZERO)
}

/// `exp(-i h t)` for Hermitian `h`.
pub(crate) fn hermitian_propagator(h: &CMatrix, t: f64) -> CMatrix {
    let n = h.nrows();
    if is_diagonal(h) {
        return CMatrix::from_fn(n, n, |r, c| if r == c { C64::from_polar(1.0, -h[(r, r)].re * t) } else { ZERO });
    }
    let (values, vectors) = hermitian_eigen(h);
    let phases = CMatrix::from_fn(n, n, |r, c| if r == c { C64::from_polar(1.0, -values[r] * t) } else { ZERO });
    &vectors * phases * vectors.adjoint()
}

/// Partial trace of a two-spin matrix, keeping `keep`. Works on any 4x4
/// matrix, not just states, so channels can use it on matrix units.
pub(crate) fn partial_trace_matrix(m: &CMatrix, keep: Spin) -> CMatrix {
    let mut out = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = ZERO;
            for k in 0..2 {
                let (r, c) = match keep {
                    Spin::A => (2 * i + k, 2 * j + k),
                    Spin::B => (2 * k + i, 2 * k + j),
                };
                acc += m[(r, c)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Pure state of one or two spins.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: CVector,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let amps = CVector::from_vec(amplitudes);
        let dev = (amps.norm_squared() - 1.0).abs();
        if dev > NORM_TOL {
            return Err(Error::NotNormalized(dev));
        }
        Ok(StateVector { amps })
    }

    /// Builds a state from unnormalized amplitudes.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let v = CVector::from_vec(amplitudes);
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter("zero or non-finite state vector".into()));
        }
        Ok(StateVector { amps: v.unscale(n) })
    }

    pub(crate) fn from_vector_unchecked(amps: CVector) -> Self {
        StateVector { amps }
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} >= {dim}")));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = ONE;
        Ok(StateVector { amps })
    }

    /// `|0⟩` (spin up).
    pub fn up() -> Self {
        StateVector { amps: CVector::from_vec(vec![ONE, ZERO]) }
    }

    /// `|1⟩` (spin down).
    pub fn down() -> Self {
        StateVector { amps: CVector::from_vec(vec![ZERO, ONE]) }
    }

    /// `(|0⟩ + e^{iφ}|1⟩)/√2`.
    pub fn equator(phi: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector { amps: CVector::from_vec(vec![C64::new(s, 0.0), C64::from_polar(s, phi)]) }
    }

    /// Single-spin state with Bloch polar angle `theta` and azimuth `phi`.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        StateVector { amps: CVector::from_vec(vec![C64::new(c, 0.0), C64::from_polar(s, phi)]) }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn apply(&self, op: &Operator) -> Result<StateVector> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        Ok(StateVector { amps: op.matrix() * &self.amps })
    }

    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    /// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a single-spin state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim() });
        }
        let (a, b) = (self.amps[0], self.amps[1]);
        let cross = a.conj() * b;
        Ok([2.0 * cross.re, 2.0 * cross.im, a.norm_sqr() - b.norm_sqr()])
    }

    /// Smallest `‖self − e^{iα} other‖` over global phases.
    pub fn phase_distance(&self, other: &StateVector) -> Result<f64> {
        let ov = other.inner(self)?;
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
        Ok((&self.amps - other.amps.scale(1.0) * phase).norm())
    }
}

/// Mixed state of one or two spins.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidParameter("density matrix must be square".into()));
        }
        check_dim(matrix.nrows())?;
        let herm = hermitian_deviation(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne(tr.re));
        }
        let lo = min_eigenvalue(&matrix);
        if lo < -POSITIVITY_SLACK {
            return Err(Error::NotPositive(lo));
        }
        Ok(DensityOperator { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityOperator { matrix }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        DensityOperator { matrix: state.projector() }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(DensityOperator { matrix: CMatrix::identity(dim, dim).unscale(dim as f64) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    pub fn evolve(&self, op: &Operator) -> Result<DensityOperator> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        Ok(DensityOperator { matrix: op.matrix() * &self.matrix * op.matrix().adjoint() })
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let (values, _) = hermitian_eigen(&(&self.matrix - &other.matrix));
        Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
    }
}

/// Square operator on one or two spins.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    unitary: bool,
}

impl Operator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidParameter("operator must be square".into()));
        }
        check_dim(matrix.nrows())?;
        Ok(Operator { matrix, unitary: false })
    }

    /// Builds an operator and verifies `U†U = I`.
    pub fn unitary(matrix: CMatrix) -> Result<Self> {
        let mut op = Operator::new(matrix)?;
        let dev = op.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        op.unitary = true;
        Ok(op)
    }

    pub(crate) fn unitary_unchecked(matrix: CMatrix) -> Self {
        Operator { matrix, unitary: true }
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Operator { matrix, unitary: false }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Operator { matrix: CMatrix::identity(dim, dim), unitary: true })
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("ragged operator rows".into()));
        }
        Operator::new(CMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        let n = entries.len();
        Operator::new(CMatrix::from_fn(n, n, |r, c| if r == c { entries[r] } else { ZERO }))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(n, n)))
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }

    pub fn adjoint(&self) -> Operator {
        Operator { matrix: self.matrix.adjoint(), unitary: self.unitary }
    }

    /// Operator product `self · rhs`.
    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rhs.dim() });
        }
        Ok(Operator { matrix: &self.matrix * &rhs.matrix, unitary: self.unitary && rhs.unitary })
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            matrix: self.matrix.map(|z| z * factor),
            unitary: self.unitary && (factor.norm() - 1.0).abs() < 1e-15,
        }
    }

    pub fn add(&self, rhs: &Operator) -> Result<Operator> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rhs.dim() });
        }
        Ok(Operator::from_matrix_unchecked(&self.matrix + &rhs.matrix))
    }

    /// `self · x · self†`.
    pub fn conjugate(&self, x: &Operator) -> Result<Operator> {
        if self.dim() != x.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        Ok(Operator::from_matrix_unchecked(&self.matrix * &x.matrix * self.matrix.adjoint()))
    }

    /// `exp(-i H t)` for this (Hermitian) operator.
    pub fn propagator(&self, t: f64) -> Result<Operator> {
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL * self.norm_scale() {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Operator::unitary_unchecked(hermitian_propagator(&self.matrix, t)))
    }

    fn norm_scale(&self) -> f64 {
        max_abs(&self.matrix).max(1.0)
    }

    /// Largest element-wise difference.
    pub fn distance(&self, other: &Operator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(max_abs(&(&self.matrix - &other.matrix)))
    }

    /// Element-wise distance after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &Operator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let overlap = (other.matrix.adjoint() * &self.matrix).trace();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        Ok(max_abs(&(&self.matrix - other.matrix.map(|z| z * phase))))
    }

    /// Element-wise distance after fixing the global phase so that the
    /// `(index, index)` entries agree in argument.
    pub fn distance_fixing_entry(&self, other: &Operator, index: usize) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        if index >= self.dim() {
            return Err(Error::InvalidParameter(format!("entry index {index} out of range")));
        }
        let (a, b) = (self.matrix[(index, index)], other.matrix[(index, index)]);
        if a.norm() < 1e-12 || b.norm() < 1e-12 {
            return Err(Error::InvalidParameter("reference entry vanishes".into()));
        }
        let phase = (a / a.norm()) / (b / b.norm());
        Ok(max_abs(&(&self.matrix - other.matrix.map(|z| z * phase))))
    }
}

/// Kronecker product over the declared basis order.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl Tensor for Operator {
    fn tensor(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != 2 || other.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim().max(other.dim()) });
        }
        Ok(Operator { matrix: self.matrix.kronecker(&other.matrix), unitary: self.unitary && other.unitary })
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        if self.dim() != 2 || other.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim().max(other.dim()) });
        }
        Ok(StateVector { amps: self.amps.kronecker(&other.amps) })
    }
}

impl Tensor for DensityOperator {
    fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        if self.dim() != 2 || other.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim().max(other.dim()) });
        }
        Ok(DensityOperator { matrix: self.matrix.kronecker(&other.matrix) })
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// Anything an observable can be measured on.
pub trait Observable {
    fn dim(&self) -> usize;
    fn expectation_complex(&self, obs: &CMatrix) -> C64;
}

impl Observable for StateVector {
    fn dim(&self) -> usize {
        self.amps.len()
    }
    fn expectation_complex(&self, obs: &CMatrix) -> C64 {
        self.amps.dotc(&(obs * &self.amps))
    }
}

impl Observable for DensityOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn expectation_complex(&self, obs: &CMatrix) -> C64 {
        (&self.matrix * obs).trace()
    }
}

/// `Tr(ρ · obs)` for a Hermitian observable.
pub fn expectation<S: Observable>(state: &S, obs: &Operator) -> Result<f64> {
    if state.dim() != obs.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: obs.dim() });
    }
    let dev = obs.hermitian_deviation();
    if dev > HERMITIAN_TOL * obs.norm_scale() {
        return Err(Error::NotHermitian(dev));
    }
    let value = state.expectation_complex(obs.matrix());
    if value.im.abs() >= 1e-10 {
        return Err(Error::NotHermitian(value.im.abs()));
    }
    Ok(value.re)
}

/// Reduced state of `keep` from a two-spin density operator.
pub fn partial_trace(rho: &DensityOperator, keep: Spin) -> Result<DensityOperator> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.dim() });
    }
    Ok(DensityOperator { matrix: partial_trace_matrix(rho.matrix(), keep) })
}

/// `⟨ψ|ρ|ψ⟩`, clamped into `[0, 1]`.
pub fn fidelity_state(ideal: &StateVector, actual: &DensityOperator) -> Result<f64> {
    if ideal.dim() != actual.dim() {
        return Err(Error::DimensionMismatch { expected: ideal.dim(), found: actual.dim() });
    }
    Ok(actual.expectation_complex_vec(ideal).re.clamp(0.0, 1.0))
}

impl DensityOperator {
    fn expectation_complex_vec(&self, psi: &StateVector) -> C64 {
        psi.amps.dotc(&(&self.matrix * &psi.amps))
    }
}

/// Single-spin and two-spin angular momentum operators (`I = σ/2`).
pub mod spin_ops {
    use super::*;

    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub enum Axis {
        X,
        Y,
        Z,
    }

    pub fn pauli(axis: Option<Axis>) -> CMatrix {
        let m = match axis {
            None => [ONE, ZERO, ZERO, ONE],
            Some(Axis::X) => [ZERO, ONE, ONE, ZERO],
            Some(Axis::Y) => [ZERO, -I, I, ZERO],
            Some(Axis::Z) => [ONE, ZERO, ZERO, -ONE],
        };
        CMatrix::from_row_slice(2, 2, &m)
    }

    /// Single-spin `I_axis`.
    pub fn single(axis: Axis) -> Operator {
        Operator::from_matrix_unchecked(pauli(Some(axis)).scale(0.5))
    }

    /// Two-spin operator acting as `local` on `spin`, identity on the other.
    pub fn embed(local: &CMatrix, spin: Spin) -> CMatrix {
        let id = CMatrix::identity(2, 2);
        match spin {
            Spin::A => local.kronecker(&id),
            Spin::B => id.kronecker(local),
        }
    }

    /// Two-spin `I_axis^spin`.
    pub fn on(spin: Spin, axis: Axis) -> Operator {
        Operator::from_matrix_unchecked(embed(&pauli(Some(axis)).scale(0.5), spin))
    }

    /// `I_z^a I_z^b`.
    pub fn zz() -> Operator {
        Operator::from_matrix_unchecked(pauli(Some(Axis::Z)).kronecker(&pauli(Some(Axis::Z))).scale(0.25))
    }
}

#[cfg(test)]
mod tests {
    use super::spin_ops::{self, Axis};
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_unitary(params: [f64; 4]) -> Operator {
        // SU(2) from a (not necessarily uniform) quaternion
        let n = params.iter().map(|p| p * p).sum::<f64>().sqrt().max(1e-9);
        let [a, b, cc, d] = params.map(|p| p / n);
        Operator::unitary(CMatrix::from_row_slice(2, 2, &[c(a, b), c(cc, d), c(-cc, d), c(a, -b)])).unwrap()
    }

    #[test]
    fn tensor_identity_and_basis() {
        let id = Operator::identity(2).unwrap();
        assert_eq!(id.tensor(&id).unwrap(), Operator::identity(4).unwrap());
        let v = StateVector::up().tensor(&StateVector::up()).unwrap();
        assert_eq!(v.amplitudes().as_slice(), &[ONE, ZERO, ZERO, ZERO]);
    }

    #[test]
    fn tensor_sigma_z_pair() {
        let z = Operator::new(spin_ops::pauli(Some(Axis::Z))).unwrap();
        let zz = z.tensor(&z).unwrap();
        let expected = Operator::diagonal(&[ONE, -ONE, -ONE, ONE]).unwrap();
        assert_eq!(zz, expected);
    }

    #[test]
    fn tensor_rejects_four_dim_factor() {
        let id4 = Operator::identity(4).unwrap();
        let id2 = Operator::identity(2).unwrap();
        assert!(matches!(id4.tensor(&id2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn expectation_examples() {
        let iz = spin_ops::single(Axis::Z);
        let ix = spin_ops::single(Axis::X);
        assert_abs_diff_eq!(expectation(&StateVector::up(), &iz).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(expectation(&StateVector::equator(0.0), &ix).unwrap(), 0.5, epsilon = 1e-15);
        let mixed = DensityOperator::maximally_mixed(2).unwrap();
        assert_abs_diff_eq!(expectation(&mixed, &ix).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(expectation(&mixed, &iz).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let raising = Operator::from_rows(&[&[ZERO, ONE], &[ZERO, ZERO]]).unwrap();
        assert!(matches!(expectation(&StateVector::up(), &raising), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn partial_trace_examples() {
        let rho00 = DensityOperator::from_pure(&StateVector::basis(4, 0).unwrap());
        let a = partial_trace(&rho00, Spin::A).unwrap();
        assert_eq!(a, DensityOperator::from_pure(&StateVector::up()));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]).unwrap();
        let a = partial_trace(&DensityOperator::from_pure(&bell), Spin::A).unwrap();
        assert!(max_abs(&(a.matrix() - DensityOperator::maximally_mixed(2).unwrap().matrix())) < 1e-15);

        let prod = StateVector::equator(0.0).tensor(&StateVector::down()).unwrap();
        let b = partial_trace(&DensityOperator::from_pure(&prod), Spin::B).unwrap();
        assert!(max_abs(&(b.matrix() - StateVector::down().projector())) < 1e-15);
    }

    #[test]
    fn partial_trace_needs_two_spins() {
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        assert!(partial_trace(&rho, Spin::A).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let up = StateVector::up();
        assert_abs_diff_eq!(fidelity_state(&up, &DensityOperator::from_pure(&up)).unwrap(), 1.0);
        assert_abs_diff_eq!(fidelity_state(&up, &DensityOperator::from_pure(&StateVector::down())).unwrap(), 0.0);
        assert_abs_diff_eq!(fidelity_state(&up, &DensityOperator::maximally_mixed(2).unwrap()).unwrap(), 0.5);
        assert!(fidelity_state(&up, &DensityOperator::maximally_mixed(4).unwrap()).is_err());
    }

    #[test]
    fn density_validation() {
        let bad_trace = CMatrix::identity(2, 2);
        assert!(matches!(DensityOperator::new(bad_trace), Err(Error::TraceNotOne(_))));
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(matches!(DensityOperator::new(neg), Err(Error::NotPositive(_))));
        let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), ONE, ZERO, c(0.5, 0.0)]);
        assert!(matches!(DensityOperator::new(non_herm), Err(Error::NotHermitian(_))));
        assert!(matches!(StateVector::new(vec![ONE, ONE]), Err(Error::NotNormalized(_))));
        assert!(matches!(StateVector::new(vec![ONE, ZERO, ZERO]), Err(Error::UnsupportedDimension(3))));
    }

    #[test]
    fn propagator_of_iz_is_z_rotation() {
        let u = spin_ops::single(Axis::Z).propagator(std::f64::consts::PI).unwrap();
        let expected = Operator::diagonal(&[-I, I]).unwrap();
        assert!(u.distance(&expected).unwrap() < 1e-15);
        let ux = spin_ops::single(Axis::X).propagator(std::f64::consts::PI).unwrap();
        let out = StateVector::up().apply(&ux).unwrap();
        assert!(
            max_abs(&CMatrix::from_column_slice(2, 1, &[out.amplitudes()[0] - ZERO, out.amplitudes()[1] + I])) < 1e-15
        );
    }

    proptest! {
        #[test]
        fn mixed_product_property(p in prop::array::uniform4(-1.0f64..1.0), q in prop::array::uniform4(-1.0f64..1.0),
                                  r in prop::array::uniform4(-1.0f64..1.0), s in prop::array::uniform4(-1.0f64..1.0)) {
            let (a, b, cc, d) = (random_unitary(p), random_unitary(q), random_unitary(r), random_unitary(s));
            let lhs = a.tensor(&b).unwrap().compose(&cc.tensor(&d).unwrap()).unwrap();
            let rhs = a.compose(&cc).unwrap().tensor(&b.compose(&d).unwrap()).unwrap();
            prop_assert!(lhs.distance(&rhs).unwrap() < 1e-10);
        }

        #[test]
        fn partial_trace_recovers_factors(t1 in 0.0f64..PI, p1 in 0.0f64..TAU, t2 in 0.0f64..PI, p2 in 0.0f64..TAU) {
            let (x, y) = (StateVector::from_bloch(t1, p1), StateVector::from_bloch(t2, p2));
            let rho = DensityOperator::from_pure(&x.tensor(&y).unwrap());
            let ra = partial_trace(&rho, Spin::A).unwrap();
            let rb = partial_trace(&rho, Spin::B).unwrap();
            prop_assert!(max_abs(&(ra.matrix() - x.projector())) < 1e-12);
            prop_assert!(max_abs(&(rb.matrix() - y.projector())) < 1e-12);
        }

        #[test]
        fn fidelity_ignores_global_phase(t in 0.0f64..PI, p in 0.0f64..TAU, g in -PI..PI, t2 in 0.0f64..PI) {
            let psi = StateVector::from_bloch(t, p);
            let rotated = StateVector::new(psi.amplitudes().iter().map(|z| z * C64::from_polar(1.0, g)).collect()).unwrap();
            let rho = DensityOperator::from_pure(&StateVector::from_bloch(t2, 0.3));
            let f1 = fidelity_state(&psi, &rho).unwrap();
            let f2 = fidelity_state(&rotated, &rho).unwrap();
            prop_assert!((f1 - f2).abs() < 1e-12);
        }
    }
}
