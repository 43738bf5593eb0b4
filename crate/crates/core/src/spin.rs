//! Two-spin physical model: Hamiltonian, rotating frames, hard pulses,
//! free-evolution delays with T2 phase damping, and gradient crushers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::spin_ops::{self, Axis};
use crate::quantum::{CMatrix, DensityOperator, Operator, Spin, StateVector, C64, I, ZERO};

/// Default thermal polarization scale.
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Thermal-state weight of the proton relative to the carbon.
pub const THERMAL_RATIO: f64 = 4.0;

/// Physical constants of the two-spin sample. Frequencies in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    pub omega_a: f64,
    pub omega_b: f64,
    /// Scalar coupling in Hz.
    pub j_coupling: f64,
    pub t2_a: f64,
    pub t2_b: f64,
}

impl Default for SpinSystem {
    /// 13C-labelled chloroform: carbon ~100 MHz, proton ~400 MHz,
    /// J = 214.5 Hz, T2 = 0.35 s (C) and 3.3 s (H).
    fn default() -> Self {
        SpinSystem { omega_a: 2.0 * PI * 100e6, omega_b: 2.0 * PI * 400e6, j_coupling: 214.5, t2_a: 0.35, t2_b: 3.3 }
    }
}

impl SpinSystem {
    pub fn new(omega_a: f64, omega_b: f64, j_coupling: f64, t2_a: f64, t2_b: f64) -> Result<Self> {
        let sys = SpinSystem { omega_a, omega_b, j_coupling, t2_a, t2_b };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_a, self.omega_b, self.j_coupling, self.t2_a, self.t2_b];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("spin system values must be finite".into()));
        }
        if self.j_coupling <= 0.0 {
            return Err(Error::InvalidParameter(format!("J must be positive, got {}", self.j_coupling)));
        }
        if self.t2_a <= 0.0 || self.t2_b <= 0.0 {
            return Err(Error::InvalidParameter("T2 values must be positive".into()));
        }
        let ratio = (self.omega_b - self.omega_a).abs() / (2.0 * PI * self.j_coupling);
        if ratio < 100.0 {
            log::warn!("weak-coupling assumption is marginal: |omega_b - omega_a| / (2 pi J) = {ratio:.1}");
        }
        Ok(())
    }

    pub fn t2(&self, spin: Spin) -> f64 {
        match spin {
            Spin::A => self.t2_a,
            Spin::B => self.t2_b,
        }
    }

    pub fn with_j(&self, j_coupling: f64) -> Result<Self> {
        SpinSystem::new(self.omega_a, self.omega_b, j_coupling, self.t2_a, self.t2_b)
    }

    /// Same system with both T2 values multiplied by `factor`.
    pub fn with_t2_scaled(&self, factor: f64) -> Result<Self> {
        SpinSystem::new(self.omega_a, self.omega_b, self.j_coupling, self.t2_a * factor, self.t2_b * factor)
    }
}

/// Rotating frame, stored as the offset of each channel's carrier below the
/// spin's Larmor frequency (`detuning = ω − carrier`, rad/s). Storing the
/// offset avoids cancellation between two ~10⁹ rad/s numbers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub detuning_a: f64,
    pub detuning_b: f64,
}

impl FrameSpec {
    pub fn from_detunings(detuning_a: f64, detuning_b: f64) -> Result<Self> {
        if !detuning_a.is_finite() || !detuning_b.is_finite() {
            return Err(Error::InvalidParameter("frame offsets must be finite".into()));
        }
        Ok(FrameSpec { detuning_a, detuning_b })
    }

    pub fn from_carriers(sys: &SpinSystem, carrier_a: f64, carrier_b: f64) -> Result<Self> {
        FrameSpec::from_detunings(sys.omega_a - carrier_a, sys.omega_b - carrier_b)
    }

    /// Both carriers on resonance: only the coupling term survives.
    pub fn on_resonance() -> Self {
        FrameSpec { detuning_a: 0.0, detuning_b: 0.0 }
    }

    /// Proton carrier at `ω_b − πJ`: the proton sees `2πJ I_z^b` when the
    /// carbon is up and nothing when it is down.
    pub fn conditional_b(sys: &SpinSystem) -> Self {
        FrameSpec { detuning_a: 0.0, detuning_b: PI * sys.j_coupling }
    }

    /// Carbon carrier at `ω_a − 4πJ`, proton on resonance: `H_a = 4πJ I_z^a`.
    pub fn single_qubit_a(sys: &SpinSystem) -> Self {
        FrameSpec { detuning_a: 4.0 * PI * sys.j_coupling, detuning_b: 0.0 }
    }

    pub fn carrier_a(&self, sys: &SpinSystem) -> f64 {
        sys.omega_a - self.detuning_a
    }

    pub fn carrier_b(&self, sys: &SpinSystem) -> f64 {
        sys.omega_b - self.detuning_b
    }

    pub fn detuning(&self, spin: Spin) -> f64 {
        match spin {
            Spin::A => self.detuning_a,
            Spin::B => self.detuning_b,
        }
    }

    /// Operator `R(t)` mapping a state in this frame at time `t` to the same
    /// state seen from `other`: `ρ_other = R ρ_self R†`.
    pub fn change_to(&self, other: &FrameSpec, t: f64) -> Operator {
        let shift_a = self.detuning_a - other.detuning_a;
        let shift_b = self.detuning_b - other.detuning_b;
        let diag: Vec<C64> = (0..4)
            .map(|k| {
                let za = if k & 2 == 0 { 0.5 } else { -0.5 };
                let zb = if k & 1 == 0 { 0.5 } else { -0.5 };
                C64::from_polar(1.0, (shift_a * za + shift_b * zb) * t)
            })
            .collect();
        Operator::unitary_unchecked(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
    }
}

/// `H = δ_a I_z^a + δ_b I_z^b + 2πJ I_z^a I_z^b` in rad/s.
pub fn frame_hamiltonian(sys: &SpinSystem, frame: &FrameSpec) -> Operator {
    let m = spin_ops::on(Spin::A, Axis::Z).matrix().scale(frame.detuning_a)
        + spin_ops::on(Spin::B, Axis::Z).matrix().scale(frame.detuning_b)
        + spin_ops::zz().matrix().scale(2.0 * PI * sys.j_coupling);
    Operator::from_matrix_unchecked(m)
}

/// One instantaneous or timed element of a compiled pulse program.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PulseEvent {
    /// Rotation by `angle` about the transverse axis at azimuth `phase`.
    HardPulse {
        target: Spin,
        phase: f64,
        angle: f64,
    },
    Delay {
        duration: f64,
    },
    GradientCrusher,
}

impl PulseEvent {
    pub fn pulse(target: Spin, phase: f64, angle: f64) -> Result<Self> {
        if !(angle > -2.0 * PI && angle <= 2.0 * PI) || !phase.is_finite() {
            return Err(Error::AngleOutOfRange(angle));
        }
        Ok(PulseEvent::HardPulse { target, phase, angle })
    }

    pub fn delay(duration: f64) -> Result<Self> {
        if duration < 0.0 || !duration.is_finite() {
            return Err(Error::NegativeDuration(duration));
        }
        Ok(PulseEvent::Delay { duration })
    }
}

/// Optional imperfections applied during execution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub enabled: bool,
    /// Fractional over/under-rotation of every hard pulse.
    pub pulse_amplitude_error: f64,
    /// T2 phase damping during delays.
    pub dephasing_enabled: bool,
}

impl NoiseConfig {
    pub fn none() -> Self {
        NoiseConfig::default()
    }

    pub fn dephasing() -> Self {
        NoiseConfig { enabled: true, pulse_amplitude_error: 0.0, dephasing_enabled: true }
    }

    pub fn new(enabled: bool, pulse_amplitude_error: f64, dephasing_enabled: bool) -> Result<Self> {
        let cfg = NoiseConfig { enabled, pulse_amplitude_error, dephasing_enabled };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pulse_amplitude_error.is_nan() || self.pulse_amplitude_error.abs() >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "pulse amplitude error {} must satisfy |e| < 0.5",
                self.pulse_amplitude_error
            )));
        }
        Ok(())
    }

    pub fn dephases(&self) -> bool {
        self.enabled && self.dephasing_enabled
    }

    pub fn effective_angle(&self, angle: f64) -> f64 {
        if self.enabled {
            angle * (1.0 + self.pulse_amplitude_error)
        } else {
            angle
        }
    }
}

/// `exp(−i·angle·(cos φ I_x + sin φ I_y))` on a single spin.
pub(crate) fn rotation_2x2(phase: f64, angle: f64) -> CMatrix {
    let (s, c) = (angle / 2.0).sin_cos();
    let (sp, cp) = phase.sin_cos();
    // −i sin(θ/2) (cos φ σx + sin φ σy)
    let off_01 = -I * s * C64::new(cp, -sp);
    let off_10 = -I * s * C64::new(cp, sp);
    CMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), off_01, off_10, C64::new(c, 0.0)])
}

/// Pulse propagator acting on a state of dimension `dim`. On a single-spin
/// state the pulse acts on the lone spin whatever its label.
pub(crate) fn pulse_matrix(target: Spin, phase: f64, angle: f64, dim: usize) -> CMatrix {
    let local = rotation_2x2(phase, angle);
    if dim == 2 {
        local
    } else {
        spin_ops::embed(&local, target)
    }
}

/// Pulse generator `cos φ I_x + sin φ I_y` on a single spin.
pub(crate) fn pulse_generator_2x2(phase: f64) -> CMatrix {
    let (sp, cp) = phase.sin_cos();
    spin_ops::pauli(Some(Axis::X)).scale(0.5 * cp) + spin_ops::pauli(Some(Axis::Y)).scale(0.5 * sp)
}

/// Multiplies every coherence by `exp(−t/T2)` per differing spin.
pub(crate) fn dephase_matrix(m: &mut CMatrix, sys: &SpinSystem, duration: f64) -> Result<()> {
    if m.nrows() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: m.nrows() });
    }
    let fa = (-duration / sys.t2_a).exp();
    let fb = (-duration / sys.t2_b).exp();
    for r in 0..4 {
        for c in 0..4 {
            let mut f = 1.0;
            if (r ^ c) & 2 != 0 {
                f *= fa;
            }
            if (r ^ c) & 1 != 0 {
                f *= fb;
            }
            m[(r, c)] *= f;
        }
    }
    Ok(())
}

pub(crate) fn crush_matrix(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| if r == c { m[(r, c)] } else { ZERO })
}

/// States that pulse programs can act on.
pub trait Evolve: Sized {
    fn dim(&self) -> usize;
    fn unitary_step(&self, u: &CMatrix) -> Self;
    fn dephase(&self, sys: &SpinSystem, duration: f64) -> Result<Self>;
    fn crush(&self) -> Result<Self>;
}

impl Evolve for StateVector {
    fn dim(&self) -> usize {
        self.amplitudes().len()
    }
    fn unitary_step(&self, u: &CMatrix) -> Self {
        StateVector::from_vector_unchecked(u * self.amplitudes())
    }
    fn dephase(&self, _sys: &SpinSystem, _duration: f64) -> Result<Self> {
        Err(Error::NonUnitaryEvent)
    }
    fn crush(&self) -> Result<Self> {
        Err(Error::NonUnitaryEvent)
    }
}

impl Evolve for DensityOperator {
    fn dim(&self) -> usize {
        self.matrix().nrows()
    }
    fn unitary_step(&self, u: &CMatrix) -> Self {
        DensityOperator::from_matrix_unchecked(u * self.matrix() * u.adjoint())
    }
    fn dephase(&self, sys: &SpinSystem, duration: f64) -> Result<Self> {
        let mut m = self.matrix().clone();
        dephase_matrix(&mut m, sys, duration)?;
        Ok(DensityOperator::from_matrix_unchecked(m))
    }
    fn crush(&self) -> Result<Self> {
        Ok(apply_crusher(self))
    }
}

pub fn apply_hard_pulse<S: Evolve>(state: &S, event: &PulseEvent, noise: &NoiseConfig) -> Result<S> {
    match *event {
        PulseEvent::HardPulse { target, phase, angle } => {
            let u = pulse_matrix(target, phase, noise.effective_angle(angle), state.dim());
            Ok(state.unitary_step(&u))
        }
        _ => Err(Error::InvalidParameter("apply_hard_pulse needs a HardPulse event".into())),
    }
}

/// Free evolution under `hamiltonian` for `duration` seconds, then T2 phase
/// damping when enabled.
pub fn apply_delay<S: Evolve>(
    state: &S,
    duration: f64,
    hamiltonian: &Operator,
    sys: &SpinSystem,
    noise: &NoiseConfig,
) -> Result<S> {
    if duration < 0.0 || !duration.is_finite() {
        return Err(Error::NegativeDuration(duration));
    }
    if hamiltonian.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: hamiltonian.dim() });
    }
    let u = hamiltonian.propagator(duration)?;
    let evolved = state.unitary_step(u.matrix());
    if noise.dephases() {
        evolved.dephase(sys, duration)
    } else {
        Ok(evolved)
    }
}

/// Ideal z-gradient: removes every off-diagonal element.
pub fn apply_crusher(rho: &DensityOperator) -> DensityOperator {
    DensityOperator::from_matrix_unchecked(crush_matrix(rho.matrix()))
}

/// `I/4 + ε (I_z^a + 4 I_z^b)`.
pub fn thermal_state(epsilon: f64) -> Result<DensityOperator> {
    if !(0.0..=0.1).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} must lie in [0, 0.1] for a positive thermal state"
        )));
    }
    let deviation =
        spin_ops::on(Spin::A, Axis::Z).matrix() + spin_ops::on(Spin::B, Axis::Z).matrix().scale(THERMAL_RATIO);
    let m = CMatrix::identity(4, 4).scale(0.25) + deviation.scale(epsilon);
    DensityOperator::new(m)
}

/// Thermal deviation `I_z^a + 4 I_z^b` as an operator.
pub fn thermal_deviation() -> Operator {
    Operator::from_matrix_unchecked(
        spin_ops::on(Spin::A, Axis::Z).matrix() + spin_ops::on(Spin::B, Axis::Z).matrix().scale(THERMAL_RATIO),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{expectation, max_abs, partial_trace};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn iz(s: Spin) -> CMatrix {
        spin_ops::on(s, Axis::Z).matrix().clone()
    }

    #[test]
    fn conditional_frame_blocks() {
        let sys = SpinSystem::default();
        let h = frame_hamiltonian(&sys, &FrameSpec::conditional_b(&sys));
        let two_pi_j = 2.0 * PI * sys.j_coupling;
        // a = up block (rows 0,1): 2πJ Iz^b; a = down block: 0
        assert_abs_diff_eq!(h.matrix()[(0, 0)].re, two_pi_j * 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(h.matrix()[(1, 1)].re, -two_pi_j * 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(h.matrix()[(2, 2)].re, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(h.matrix()[(3, 3)].re, 0.0, epsilon = 1e-9);
        assert!(h.hermitian_deviation() == 0.0);
    }

    #[test]
    fn conditional_frame_from_absolute_carriers() {
        let sys = SpinSystem::default();
        let f = FrameSpec::from_carriers(&sys, sys.omega_a, sys.omega_b - PI * sys.j_coupling).unwrap();
        let exact = FrameSpec::conditional_b(&sys);
        // 400 MHz carriers only keep ~1e-6 rad/s of absolute precision
        assert!((f.detuning_b - exact.detuning_b).abs() < 1e-5);
        assert_abs_diff_eq!(f.carrier_b(&sys), sys.omega_b - PI * sys.j_coupling, epsilon = 1e-5);
    }

    #[test]
    fn on_resonance_frame_is_pure_coupling() {
        let sys = SpinSystem::default();
        let h = frame_hamiltonian(&sys, &FrameSpec::on_resonance());
        let expected = spin_ops::zz().matrix().scale(2.0 * PI * sys.j_coupling);
        assert!(max_abs(&(h.matrix() - expected)) < 1e-12);
    }

    #[test]
    fn single_qubit_frame() {
        let sys = SpinSystem::default();
        let h = frame_hamiltonian(&sys, &FrameSpec::single_qubit_a(&sys));
        let j = sys.j_coupling;
        let expected = iz(Spin::A).scale(4.0 * PI * j) + spin_ops::zz().matrix().scale(2.0 * PI * j);
        assert!(max_abs(&(h.matrix() - expected)) < 1e-12);
        assert_abs_diff_eq!(
            FrameSpec::single_qubit_a(&sys).carrier_a(&sys),
            sys.omega_a - 4.0 * PI * j,
            epsilon = 1e-6
        );
    }

    #[test]
    fn hard_pulse_examples() {
        let none = NoiseConfig::none();
        let flip = PulseEvent::pulse(Spin::B, 0.0, PI).unwrap();
        let out = apply_hard_pulse(&StateVector::up(), &flip, &none).unwrap();
        assert!((out.amplitudes()[0]).norm() < 1e-15);
        assert!((out.amplitudes()[1] + I).norm() < 1e-15);

        let ry = PulseEvent::pulse(Spin::B, PI / 2.0, PI / 2.0).unwrap();
        let out = apply_hard_pulse(&StateVector::up(), &ry, &none).unwrap();
        assert!(out.phase_distance(&StateVector::equator(0.0)).unwrap() < 1e-15);
    }

    #[test]
    fn hard_pulse_conjugates_iz() {
        let u = Operator::unitary(rotation_2x2(0.0, PI / 3.0)).unwrap();
        let rotated = u.conjugate(&spin_ops::single(Axis::Z)).unwrap();
        let expected = spin_ops::single(Axis::Z).matrix().scale((PI / 3.0).cos())
            - spin_ops::single(Axis::Y).matrix().scale((PI / 3.0).sin());
        assert!(max_abs(&(rotated.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn pulse_amplitude_error_scales_angle() {
        let noise = NoiseConfig::new(true, 0.1, false).unwrap();
        let p = PulseEvent::pulse(Spin::A, 0.0, PI / 2.0).unwrap();
        let out = apply_hard_pulse(&StateVector::up(), &p, &noise).unwrap();
        let expected = StateVector::new(rotation_2x2(0.0, 0.55 * PI).column(0).iter().copied().collect()).unwrap();
        assert!(out.phase_distance(&expected).unwrap() < 1e-15);
        assert!(NoiseConfig::new(true, 0.5, false).is_err());
    }

    #[test]
    fn pulse_event_invariants() {
        assert!(PulseEvent::pulse(Spin::A, 0.0, 2.0 * PI).is_ok());
        assert!(matches!(PulseEvent::pulse(Spin::A, 0.0, -2.0 * PI), Err(Error::AngleOutOfRange(_))));
        assert!(matches!(PulseEvent::delay(-1e-3), Err(Error::NegativeDuration(_))));
        let none = NoiseConfig::none();
        let d = PulseEvent::delay(1.0).unwrap();
        assert!(apply_hard_pulse(&StateVector::up(), &d, &none).is_err());
    }

    #[test]
    fn delay_quarter_turn_under_single_qubit_frame() {
        let sys = SpinSystem::default();
        let h = Operator::new(spin_ops::single(Axis::Z).matrix().scale(4.0 * PI * sys.j_coupling)).unwrap();
        let out = apply_delay(&StateVector::equator(0.0), 1.0 / (8.0 * sys.j_coupling), &h, &sys, &NoiseConfig::none())
            .unwrap();
        // z-rotation by π/2 moves +x to +y
        assert!(out.phase_distance(&StateVector::equator(PI / 2.0)).unwrap() < 1e-12);
    }

    #[test]
    fn delay_zero_is_identity_and_negative_fails() {
        let sys = SpinSystem::default();
        let h = frame_hamiltonian(&sys, &FrameSpec::on_resonance());
        let psi = StateVector::from_bloch(0.3, 1.1).tensor_with(&StateVector::from_bloch(2.0, -0.4));
        let out = apply_delay(&psi, 0.0, &h, &sys, &NoiseConfig::none()).unwrap();
        assert_eq!(out, psi);
        assert!(matches!(apply_delay(&psi, -1.0, &h, &sys, &NoiseConfig::none()), Err(Error::NegativeDuration(_))));
    }

    #[test]
    fn coupling_converts_in_phase_to_antiphase() {
        let sys = SpinSystem::default();
        let h = Operator::new(spin_ops::zz().matrix().scale(2.0 * PI * sys.j_coupling)).unwrap();
        let t = 1.0 / (2.0 * sys.j_coupling);
        // oracle: conjugate the deviation directly with the matrix exponential
        let u = h.propagator(t).unwrap();
        let iy_b = spin_ops::on(Spin::B, Axis::Y);
        let out = u.conjugate(&iy_b).unwrap();
        let expected = (spin_ops::on(Spin::B, Axis::X).matrix() * iz(Spin::A)).scale(-2.0);
        assert!(max_abs(&(out.matrix() - expected)) < 1e-12);
    }

    #[test]
    fn dephasing_factor_is_exact() {
        let sys = SpinSystem::default();
        let noise = NoiseConfig::dephasing();
        let rho = DensityOperator::from_pure(&StateVector::equator(0.0).tensor_with(&StateVector::up()));
        let zero = Operator::new(CMatrix::zeros(4, 4)).unwrap();
        let t = 0.05;
        let out = apply_delay(&rho, t, &zero, &sys, &noise).unwrap();
        let ratio = out.matrix()[(0, 2)].re / rho.matrix()[(0, 2)].re;
        assert_abs_diff_eq!(ratio, (-t / sys.t2_a).exp(), epsilon = 1e-12);

        let both = DensityOperator::from_pure(&StateVector::equator(0.0).tensor_with(&StateVector::equator(0.0)));
        let out = apply_delay(&both, t, &zero, &sys, &noise).unwrap();
        let ratio = out.matrix()[(0, 3)].re / both.matrix()[(0, 3)].re;
        assert_abs_diff_eq!(ratio, (-t / sys.t2_a).exp() * (-t / sys.t2_b).exp(), epsilon = 1e-12);
        assert!(apply_delay(&StateVector::up().tensor_with(&StateVector::up()), t, &zero, &sys, &noise).is_err());
    }

    #[test]
    fn crusher_examples() {
        let plus = DensityOperator::from_pure(&StateVector::equator(0.0));
        let out = apply_crusher(&plus);
        assert!(max_abs(&(out.matrix() - DensityOperator::maximally_mixed(2).unwrap().matrix())) < 1e-15);
        let diag = thermal_state(1e-3).unwrap();
        assert_eq!(apply_crusher(&diag), diag);
    }

    #[test]
    fn crusher_after_first_pulse_of_preparation() {
        // Rx^b(π/3) then Gz: 4 cos(π/3) Iz^b = 2 Iz^b survives
        let eps = 1e-3;
        let rho = thermal_state(eps).unwrap();
        let p = PulseEvent::pulse(Spin::B, 0.0, PI / 3.0).unwrap();
        let out = apply_crusher(&apply_hard_pulse(&rho, &p, &NoiseConfig::none()).unwrap());
        let expected = CMatrix::identity(4, 4).scale(0.25) + (iz(Spin::A) + iz(Spin::B).scale(2.0)).scale(eps);
        assert!(max_abs(&(out.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn thermal_state_examples() {
        let eps = 1e-5;
        let rho = thermal_state(eps).unwrap();
        // diag(Iz^a + 4 Iz^b) = (1/2+2, 1/2−2, −1/2+2, −1/2−2)
        let dev = [2.5, -1.5, 1.5, -2.5];
        for (k, d) in dev.iter().enumerate() {
            assert_abs_diff_eq!(rho.matrix()[(k, k)].re, 0.25 + eps * d, epsilon = 1e-16);
        }
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-15);
        assert_eq!(thermal_state(0.0).unwrap(), DensityOperator::maximally_mixed(4).unwrap());
        assert!(thermal_state(0.2).is_err());
        assert!(thermal_state(-1e-6).is_err());
    }

    #[test]
    fn invalid_systems() {
        assert!(SpinSystem::new(1.0, 2.0, 0.0, 1.0, 1.0).is_err());
        assert!(SpinSystem::new(1.0, 2.0, 1.0, -1.0, 1.0).is_err());
        assert!(SpinSystem::new(f64::NAN, 2.0, 1.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn noiseless_delay_preserves_purity(t in 0.0f64..0.02, th in 0.0f64..PI, ph in 0.0f64..TAU, th2 in 0.0f64..PI) {
            let sys = SpinSystem::default();
            let h = frame_hamiltonian(&sys, &FrameSpec::single_qubit_a(&sys));
            let psi = StateVector::from_bloch(th, ph).tensor_with(&StateVector::from_bloch(th2, 0.7));
            let rho = DensityOperator::from_pure(&psi);
            let out = apply_delay(&rho, t, &h, &sys, &NoiseConfig::none()).unwrap();
            prop_assert!((out.purity() - 1.0).abs() < 1e-12);
            let v = apply_delay(&psi, t, &h, &sys, &NoiseConfig::none()).unwrap();
            prop_assert!((v.amplitudes().norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn crusher_idempotent_trace_preserving(th in 0.0f64..PI, ph in 0.0f64..TAU, th2 in 0.0f64..PI, ph2 in 0.0f64..TAU) {
            let rho = DensityOperator::from_pure(&StateVector::from_bloch(th, ph).tensor_with(&StateVector::from_bloch(th2, ph2)));
            let once = apply_crusher(&rho);
            let twice = apply_crusher(&once);
            prop_assert!(max_abs(&(once.matrix() - twice.matrix())) < 1e-12);
            prop_assert!((once.trace() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn frame_change_consistency(t in 0.0f64..0.01, da in -5e3f64..5e3, db in -5e3f64..5e3) {
            let sys = SpinSystem::default();
            let f1 = FrameSpec::conditional_b(&sys);
            let f2 = FrameSpec::from_detunings(da, db).unwrap();
            let u1 = frame_hamiltonian(&sys, &f1).propagator(t).unwrap();
            let u2 = frame_hamiltonian(&sys, &f2).propagator(t).unwrap();
            let via = f1.change_to(&f2, t).compose(&u1).unwrap();
            prop_assert!(via.distance(&u2).unwrap() < 1e-10);
        }

        #[test]
        fn pulses_on_b_leave_a_untouched(th in 0.0f64..PI, ph in 0.0f64..TAU, phase in 0.0f64..TAU, angle in -6.0f64..6.0) {
            let rho = DensityOperator::from_pure(&StateVector::from_bloch(th, ph).tensor_with(&StateVector::from_bloch(1.0, 2.0)));
            let p = PulseEvent::pulse(Spin::B, phase, angle).unwrap();
            let out = apply_hard_pulse(&rho, &p, &NoiseConfig::none()).unwrap();
            let before = partial_trace(&rho, Spin::A).unwrap();
            let after = partial_trace(&out, Spin::A).unwrap();
            prop_assert!(max_abs(&(before.matrix() - after.matrix())) < 1e-12);
            let iz_a = spin_ops::on(Spin::A, Axis::Z);
            prop_assert!((expectation(&rho, &iz_a).unwrap() - expectation(&out, &iz_a).unwrap()).abs() < 1e-12);
        }
    }

    trait TensorWith {
        fn tensor_with(&self, other: &StateVector) -> StateVector;
    }

    impl TensorWith for StateVector {
        fn tensor_with(&self, other: &StateVector) -> StateVector {
            use crate::quantum::Tensor;
            self.tensor(other).unwrap()
        }
    }
}
