//! Ideal gates, channels, tomography and gate-fidelity metrics.

mod channel;
mod fidelity;
mod tomography;

pub use channel::{Channel, DephasingChannel, ProgramChannel, ReducedChannel, UnitaryChannel};
pub use fidelity::{
    average_gate_fidelity, axial_states, haar_fidelity_monte_carlo, haar_fidelity_unitary, random_dephasing,
    random_unitary, FidelityReport, MonteCarloEstimate,
};
pub use tomography::{process_tomography, state_tomography, tomography_inputs, ChoiMatrix, ProcessTomographyResult};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{CMatrix, Operator, StateVector, C64, I};

/// Eigenvector tolerance for [`gate_eigenphase_check`].
pub const EIGENVECTOR_TOL: f64 = 1e-8;

/// Parameters `(γ, χ, φ)` of a single-qubit cyclic gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub gamma: f64,
    pub chi: f64,
    pub phi: f64,
}

impl GateSpec {
    pub fn new(gamma: f64, chi: f64, phi: f64) -> Result<Self> {
        if !gamma.is_finite() || !(0.0..=PI).contains(&chi) || !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "gate spec needs finite gamma, chi in [0, pi], phi in [0, 2pi); got ({gamma}, {chi}, {phi})"
            )));
        }
        Ok(GateSpec { gamma, chi, phi })
    }

    pub fn u1() -> Self {
        GateSpec { gamma: -PI / 2.0, chi: 0.0, phi: 0.0 }
    }

    pub fn u2() -> Self {
        GateSpec { gamma: -PI / 2.0, chi: PI / 4.0, phi: 0.0 }
    }
}

/// `e^{iγ}|ψ+⟩⟨ψ+| + e^{−iγ}|ψ−⟩⟨ψ−|` written out entrywise.
pub fn make_gate(spec: &GateSpec) -> Operator {
    let GateSpec { gamma, chi, phi } = *spec;
    let (c2, s2) = ((chi / 2.0).cos().powi(2), (chi / 2.0).sin().powi(2));
    let plus = C64::from_polar(1.0, gamma);
    let minus = C64::from_polar(1.0, -gamma);
    let off = I * gamma.sin() * chi.sin();
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            plus * c2 + minus * s2,
            off * C64::from_polar(1.0, -phi),
            off * C64::from_polar(1.0, phi),
            plus * s2 + minus * c2,
        ],
    );
    Operator::unitary_unchecked(m)
}

/// `(|ψ+⟩, |ψ−⟩)` with `|ψ+⟩ = e^{−iφ/2}cos(χ/2)|↑⟩ + e^{iφ/2}sin(χ/2)|↓⟩`.
pub fn cyclic_states(chi: f64, phi: f64) -> (StateVector, StateVector) {
    let (s, c) = (chi / 2.0).sin_cos();
    let em = C64::from_polar(1.0, -phi / 2.0);
    let ep = C64::from_polar(1.0, phi / 2.0);
    (
        StateVector::from_vector_unchecked(vec![em * c, ep * s].into()),
        StateVector::from_vector_unchecked(vec![-em * s, ep * c].into()),
    )
}

/// `diag(−i, i, 1, 1)`: phase `∓π/2` on spin `b` when `a` is up.
pub fn make_controlled_gate() -> Operator {
    Operator::unitary_unchecked(CMatrix::from_diagonal(&vec![-I, I, C64::new(1.0, 0.0), C64::new(1.0, 0.0)].into()))
}

/// Eigenphases of `u` on `cyclic_states(chi, phi)`.
pub fn gate_eigenphase_check(u: &Operator, chi: f64, phi: f64) -> Result<(f64, f64)> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: u.dim() });
    }
    if !u.is_unitary() {
        return Err(Error::NotUnitary(u.unitarity_deviation()));
    }
    let (p, m) = cyclic_states(chi, phi);
    let phase_of = |psi: &StateVector| -> Result<f64> {
        let out = psi.apply(u)?;
        let lambda = psi.inner(&out)?;
        let dev = (out.amplitudes() - psi.amplitudes() * lambda).norm();
        if dev > EIGENVECTOR_TOL {
            return Err(Error::NotEigenvector(dev));
        }
        Ok(lambda.arg())
    };
    Ok((phase_of(&p)?, phase_of(&m)?))
}
