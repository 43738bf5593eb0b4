use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{CMatrix, Operator};
use crate::spin::{
    crush_matrix, dephase_matrix, frame_hamiltonian, pulse_matrix, Evolve, FrameSpec, NoiseConfig, PulseEvent,
    SpinSystem,
};

use super::expr::Expr;
use super::parser::{DelaySpec, Item, SequenceAst};

/// Executable event list with every duration resolved to seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledProgram {
    events: Vec<PulseEvent>,
    frame: FrameSpec,
    total_duration: f64,
}

fn eval_angle(e: &Expr, sys: &SpinSystem, bindings: &HashMap<String, f64>) -> Result<f64> {
    if e.depends_on_j() {
        return Err(Error::InvalidExpression(format!("angle `{e}` must not depend on J")));
    }
    e.eval(sys.j_coupling, bindings)
}

/// Resolves symbols and delays of `ast` into a program in `frame`.
///
/// `d(expr)` is a duration in seconds with `J` in Hz; `d(zrot: χ)` lasts
/// `χ / (2πJ)`, the time the conditional generator `2πJ I_z` needs to turn
/// by `χ`.
pub fn compile_sequence(
    ast: &SequenceAst,
    sys: &SpinSystem,
    frame: &FrameSpec,
    bindings: &HashMap<String, f64>,
) -> Result<CompiledProgram> {
    sys.validate()?;
    let mut events = Vec::with_capacity(ast.items.len());
    for item in &ast.items {
        let event = match item {
            Item::Pulse { spin, axis, angle } => {
                PulseEvent::pulse(*spin, axis.phase(), eval_angle(angle, sys, bindings)?)?
            }
            Item::Delay(DelaySpec::Duration(e)) => PulseEvent::delay(e.eval(sys.j_coupling, bindings)?)?,
            Item::Delay(DelaySpec::ZRotation(e)) => {
                let chi = eval_angle(e, sys, bindings)?;
                PulseEvent::delay(chi / (2.0 * PI * sys.j_coupling))?
            }
            Item::Crusher => PulseEvent::GradientCrusher,
        };
        events.push(event);
    }
    CompiledProgram::from_events(events, *frame)
}

impl CompiledProgram {
    pub fn from_events(events: Vec<PulseEvent>, frame: FrameSpec) -> Result<Self> {
        let mut total_duration = 0.0;
        for e in &events {
            match *e {
                PulseEvent::Delay { duration } => {
                    PulseEvent::delay(duration)?;
                    total_duration += duration;
                }
                PulseEvent::HardPulse { target, phase, angle } => {
                    PulseEvent::pulse(target, phase, angle)?;
                }
                PulseEvent::GradientCrusher => {}
            }
        }
        Ok(CompiledProgram { events, frame, total_duration })
    }

    pub fn events(&self) -> &[PulseEvent] {
        &self.events
    }

    pub fn frame(&self) -> &FrameSpec {
        &self.frame
    }

    /// Sum of delay durations, s.
    pub fn total_duration(&self) -> f64 {
        self.total_duration
    }

    pub fn has_crusher(&self) -> bool {
        self.events.iter().any(|e| matches!(e, PulseEvent::GradientCrusher))
    }

    pub fn hamiltonian(&self, sys: &SpinSystem) -> Operator {
        frame_hamiltonian(sys, &self.frame)
    }

    /// `self` then `other`; both must share a frame.
    pub fn concat(&self, other: &CompiledProgram) -> Result<CompiledProgram> {
        if self.frame != other.frame {
            return Err(Error::InvalidParameter("cannot concatenate programs compiled in different frames".into()));
        }
        let mut events = self.events.clone();
        events.extend_from_slice(&other.events);
        CompiledProgram::from_events(events, self.frame)
    }

    /// Ordered product of event propagators. Crushers and T2 damping are not
    /// unitary and are refused; the pulse amplitude error is honoured.
    pub fn net_unitary(&self, sys: &SpinSystem, noise: &NoiseConfig) -> Result<Operator> {
        if self.has_crusher() || noise.dephases() {
            return Err(Error::NonUnitaryEvent);
        }
        let h = self.hamiltonian(sys);
        let mut u = CMatrix::identity(4, 4);
        for e in &self.events {
            let step = match *e {
                PulseEvent::HardPulse { target, phase, angle } => {
                    pulse_matrix(target, phase, noise.effective_angle(angle), 4)
                }
                PulseEvent::Delay { duration } => h.propagator(duration)?.matrix().clone(),
                PulseEvent::GradientCrusher => unreachable!("checked above"),
            };
            u = step * u;
        }
        Operator::unitary(u)
    }

    /// Runs the program on a two-spin state vector or density operator.
    pub fn run<S: Evolve>(&self, state: &S, sys: &SpinSystem, noise: &NoiseConfig) -> Result<S> {
        if state.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: state.dim() });
        }
        let h = self.hamiltonian(sys);
        let mut s = state.unitary_step(&CMatrix::identity(4, 4));
        for e in &self.events {
            s = match *e {
                PulseEvent::HardPulse { target, phase, angle } => {
                    s.unitary_step(&pulse_matrix(target, phase, noise.effective_angle(angle), 4))
                }
                PulseEvent::Delay { duration } => {
                    let next = s.unitary_step(h.propagator(duration)?.matrix());
                    if noise.dephases() {
                        next.dephase(sys, duration)?
                    } else {
                        next
                    }
                }
                PulseEvent::GradientCrusher => s.crush()?,
            };
        }
        Ok(s)
    }

    /// The program as a linear map on arbitrary 4×4 operators, used to build
    /// channel representations from matrix units.
    pub fn run_matrix(&self, m: &CMatrix, sys: &SpinSystem, noise: &NoiseConfig) -> Result<CMatrix> {
        if m.nrows() != 4 || m.ncols() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: m.nrows() });
        }
        let h = self.hamiltonian(sys);
        let mut out = m.clone();
        for e in &self.events {
            match *e {
                PulseEvent::HardPulse { target, phase, angle } => {
                    let u = pulse_matrix(target, phase, noise.effective_angle(angle), 4);
                    out = &u * out * u.adjoint();
                }
                PulseEvent::Delay { duration } => {
                    let u = h.propagator(duration)?;
                    out = u.matrix() * out * u.matrix().adjoint();
                    if noise.dephases() {
                        dephase_matrix(&mut out, sys, duration)?;
                    }
                }
                PulseEvent::GradientCrusher => out = crush_matrix(&out),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{DensityOperator, StateVector, C64};
    use crate::sequence::parse_sequence;

    fn compile(text: &str, frame: FrameSpec, bindings: &[(&str, f64)]) -> Result<CompiledProgram> {
        let sys = SpinSystem::default();
        let map = bindings.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        compile_sequence(&parse_sequence(text).unwrap(), &sys, &frame, &map)
    }

    fn delay_of(p: &CompiledProgram) -> f64 {
        match p.events()[0] {
            PulseEvent::Delay { duration } => duration,
            _ => panic!("not a delay"),
        }
    }

    #[test]
    fn delay_resolution() {
        let f = FrameSpec::on_resonance();
        let p = compile("d(1/(8J))", f, &[]).unwrap();
        assert!((delay_of(&p) - 1.0 / (8.0 * 214.5)).abs() < 1e-18);
        assert!((delay_of(&p) - 5.8275e-4).abs() < 1e-7);
        let p = compile("d(zrot: pi)", f, &[]).unwrap();
        assert!((delay_of(&p) - 1.0 / (2.0 * 214.5)).abs() < 1e-15);
        assert!((p.total_duration() - 2.331e-3).abs() < 1e-6);
        assert_eq!(delay_of(&compile("d(zrot: 0)", f, &[]).unwrap()), 0.0);
    }

    #[test]
    fn compile_errors() {
        let f = FrameSpec::on_resonance();
        assert!(matches!(compile("Rx(a, theta)", f, &[]), Err(Error::UnboundSymbol(_))));
        assert!(matches!(compile("d(zrot: pi - theta)", f, &[("theta", 4.0)]), Err(Error::NegativeDuration(_))));
        assert!(matches!(compile("d(-1/J)", f, &[]), Err(Error::NegativeDuration(_))));
        assert!(matches!(compile("Rx(a, J)", f, &[]), Err(Error::InvalidExpression(_))));
        assert!(matches!(compile("Rx(a, 3pi)", f, &[]), Err(Error::AngleOutOfRange(_))));
    }

    #[test]
    fn empty_program_is_identity() {
        let p = compile("", FrameSpec::on_resonance(), &[]).unwrap();
        let u = p.net_unitary(&SpinSystem::default(), &NoiseConfig::none()).unwrap();
        assert!(u.distance(&Operator::identity(4).unwrap()).unwrap() < 1e-15);
        assert_eq!(p.total_duration(), 0.0);
    }

    #[test]
    fn crusher_refuses_unitary_and_pure_states() {
        let sys = SpinSystem::default();
        let p = compile("Rx(a, pi/2) - Gz", FrameSpec::on_resonance(), &[]).unwrap();
        assert!(matches!(p.net_unitary(&sys, &NoiseConfig::none()), Err(Error::NonUnitaryEvent)));
        let psi = StateVector::basis(4, 0).unwrap();
        assert!(matches!(p.run(&psi, &sys, &NoiseConfig::none()), Err(Error::NonUnitaryEvent)));
        let rho = p.run(&DensityOperator::from_pure(&psi), &sys, &NoiseConfig::none()).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!(rho.matrix()[(0, 2)].norm() < 1e-15);
    }

    #[test]
    fn run_agrees_with_net_unitary_and_run_matrix() {
        let sys = SpinSystem::default();
        let p =
            compile("Rx(a, pi/3) - d(1/(4J)) - Rmy(b, pi/5) - d(3e-4)", FrameSpec::conditional_b(&sys), &[]).unwrap();
        let u = p.net_unitary(&sys, &NoiseConfig::none()).unwrap();
        let psi = StateVector::normalized(vec![
            C64::new(0.3, 0.1),
            C64::new(-0.2, 0.5),
            C64::new(0.7, 0.0),
            C64::new(0.1, -0.3),
        ])
        .unwrap();
        let out = p.run(&psi, &sys, &NoiseConfig::none()).unwrap();
        let direct = psi.apply(&u).unwrap();
        assert!((out.inner(&direct).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!((out.inner(&direct).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
        let m = p.run_matrix(&psi.projector(), &sys, &NoiseConfig::dephasing()).unwrap();
        let rho = p.run(&DensityOperator::from_pure(&psi), &sys, &NoiseConfig::dephasing()).unwrap();
        assert!(crate::quantum::max_abs(&(m - rho.matrix())) < 1e-14);
    }

    #[test]
    fn concatenation_composes_unitaries() {
        let sys = SpinSystem::default();
        let f = FrameSpec::single_qubit_a(&sys);
        let a = compile("Rx(a, pi/4) - d(1/(8J))", f, &[]).unwrap();
        let b = compile("Rx(b, pi) - d(1/(8J)) - Rmx(b, pi)", f, &[]).unwrap();
        let ab = a.concat(&b).unwrap();
        let n = NoiseConfig::none();
        let prod = b.net_unitary(&sys, &n).unwrap().compose(&a.net_unitary(&sys, &n).unwrap()).unwrap();
        assert!(ab.net_unitary(&sys, &n).unwrap().distance(&prod).unwrap() < 1e-10);
        assert!((ab.total_duration() - a.total_duration() - b.total_duration()).abs() < 1e-18);
        assert!(a.concat(&compile("Gz", FrameSpec::on_resonance(), &[]).unwrap()).is_err());
    }
}
