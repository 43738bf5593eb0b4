use crate::error::{Error, Result};
use crate::quantum::{partial_trace_matrix, spin_ops, CMatrix, Operator, Spin};
use crate::sequence::CompiledProgram;
use crate::spin::{NoiseConfig, SpinSystem};

/// A linear map on `dim × dim` matrices. Implementations must accept any
/// matrix, not only density operators, so that channels can be probed on
/// matrix units.
pub trait Channel: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, m: &CMatrix) -> Result<CMatrix>;

    fn check_input(&self, m: &CMatrix) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: m.nrows() });
        }
        Ok(())
    }
}

/// `ρ ↦ UρU†`.
#[derive(Clone, Debug)]
pub struct UnitaryChannel(pub Operator);

impl Channel for UnitaryChannel {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_input(m)?;
        Ok(self.0.matrix() * m * self.0.matrix().adjoint())
    }
}

/// Two-spin channel realised by executing a compiled program.
#[derive(Clone, Debug)]
pub struct ProgramChannel {
    pub program: CompiledProgram,
    pub system: SpinSystem,
    pub noise: NoiseConfig,
}

impl Channel for ProgramChannel {
    fn dim(&self) -> usize {
        4
    }
    fn apply(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_input(m)?;
        self.program.run_matrix(m, &self.system, &self.noise)
    }
}

/// Single-spin channel on `keep`: the other spin starts in `|0⟩` and is
/// traced out afterwards.
#[derive(Clone, Debug)]
pub struct ReducedChannel<C> {
    pub inner: C,
    pub keep: Spin,
}

impl<C: Channel> Channel for ReducedChannel<C> {
    fn dim(&self) -> usize {
        2
    }
    fn apply(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_input(m)?;
        let mut ancilla = CMatrix::zeros(2, 2);
        ancilla[(0, 0)] = crate::quantum::ONE;
        let joint = match self.keep {
            Spin::A => m.kronecker(&ancilla),
            Spin::B => ancilla.kronecker(m),
        };
        Ok(partial_trace_matrix(&self.inner.apply(&joint)?, self.keep))
    }
}

/// Single-spin dephasing along the Bloch axis `n`:
/// `ρ ↦ (1 − p)ρ + p (n·σ) ρ (n·σ)`.
#[derive(Clone, Debug)]
pub struct DephasingChannel {
    axis: CMatrix,
    pub p: f64,
}

impl DephasingChannel {
    pub fn new(n: [f64; 3], p: f64) -> Result<Self> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if !(0.0..=1.0).contains(&p) || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("dephasing needs p in [0, 1] and a nonzero axis".into()));
        }
        use spin_ops::{pauli, Axis};
        let axis = pauli(Some(Axis::X)).scale(n[0] / norm)
            + pauli(Some(Axis::Y)).scale(n[1] / norm)
            + pauli(Some(Axis::Z)).scale(n[2] / norm);
        Ok(DephasingChannel { axis, p })
    }
}

impl Channel for DephasingChannel {
    fn dim(&self) -> usize {
        2
    }
    fn apply(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_input(m)?;
        Ok(m.scale(1.0 - self.p) + (&self.axis * m * &self.axis).scale(self.p))
    }
}

impl<C: Channel + ?Sized> Channel for &C {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, m: &CMatrix) -> Result<CMatrix> {
        (**self).apply(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{DensityOperator, StateVector};
    use crate::sequence::{compile_sequence, parse_sequence};
    use crate::spin::FrameSpec;
    use std::collections::HashMap;

    #[test]
    fn program_channel_matches_unitary() {
        let sys = SpinSystem::default();
        let ast = parse_sequence("Rx(a, pi/3) - d(1/(4J)) - Ry(b, pi/2)").unwrap();
        let prog = compile_sequence(&ast, &sys, &FrameSpec::on_resonance(), &HashMap::new()).unwrap();
        let u = prog.net_unitary(&sys, &NoiseConfig::none()).unwrap();
        let pc = ProgramChannel { program: prog, system: sys, noise: NoiseConfig::none() };
        let uc = UnitaryChannel(u);
        let m = CMatrix::from_fn(4, 4, |r, c| crate::quantum::C64::new(r as f64, c as f64 - 1.0));
        let d = pc.apply(&m).unwrap() - uc.apply(&m).unwrap();
        assert!(crate::quantum::max_abs(&d) < 1e-12);
    }

    #[test]
    fn reduced_channel_of_local_gate() {
        let local = Operator::diagonal(&[crate::quantum::I, -crate::quantum::I]).unwrap();
        let joint = Operator::unitary(spin_ops::embed(local.matrix(), Spin::A)).unwrap();
        let rc = ReducedChannel { inner: UnitaryChannel(joint), keep: Spin::A };
        let rho = DensityOperator::from_pure(&StateVector::equator(0.4));
        let out = rc.apply(rho.matrix()).unwrap();
        let direct = UnitaryChannel(local).apply(rho.matrix()).unwrap();
        assert!(crate::quantum::max_abs(&(out - direct)) < 1e-15);
    }

    #[test]
    fn dephasing_kills_transverse_coherence() {
        let ch = DephasingChannel::new([0.0, 0.0, 1.0], 0.5).unwrap();
        let rho = DensityOperator::from_pure(&StateVector::equator(0.0));
        let out = ch.apply(rho.matrix()).unwrap();
        assert!(out[(0, 1)].norm() < 1e-15);
        assert!(DephasingChannel::new([0.0; 3], 0.1).is_err());
        assert!(ch.apply(&CMatrix::zeros(4, 4)).is_err());
    }
}
