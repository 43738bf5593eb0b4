//! Pulse programs used by the experiments, in the sequence DSL.

use std::collections::HashMap;

use crate::error::Result;
use crate::sequence::{compile_sequence, parse_sequence, CompiledProgram};
use crate::spin::{FrameSpec, SpinSystem};

/// Turns the thermal state into the effective pure `|00⟩`.
pub const PREP: &str = "Rx(b, pi/3) - Gz - Rx(b, pi/4) - d(1/(2J)) - Rmy(b, pi/4) - Gz";

/// Conditional loop on spin `b`: a polar excursion of `theta` on each
/// side of a `pi` azimuthal swing. The net gate is `diag(-i, i, 1, 1)`.
pub const INTERFEROMETER: &str =
    "Ry(b, -pi/2) - d(zrot: theta) - Ry(b, pi/2) - d(zrot: pi) - Ry(b, -pi/2) - d(zrot: theta) - Ry(b, pi/2)";

/// Single-spin loop N-A-B-N on `a` at `θ = π/4`.
pub const PROCEDURE_U1: &str = "Rx(a, pi/4) - d(1/(8J)) - Rx(b, pi) - d(1/(8J)) - Rmx(b, pi) - Rx(a, pi/4)";

/// Single-spin loop E-F-N-E on `a`.
pub const PROCEDURE_U2: &str = "d(1/(8J)) - Rx(b, pi) - d(1/(8J)) - Rmx(b, pi) - Ry(a, pi/2)";

/// Polar angle of the loop used for the controlled gate.
pub const UC_THETA: f64 = std::f64::consts::FRAC_PI_4;

fn compile(text: &str, sys: &SpinSystem, frame: FrameSpec, bindings: &[(&str, f64)]) -> Result<CompiledProgram> {
    let ast = parse_sequence(text)?;
    let map: HashMap<String, f64> = bindings.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    compile_sequence(&ast, sys, &frame, &map)
}

pub fn prep_program(sys: &SpinSystem) -> Result<CompiledProgram> {
    compile(PREP, sys, FrameSpec::on_resonance(), &[])
}

/// The conditional loop with polar angle `theta`, in the frame where `b`
/// precesses only while `a` is up.
pub fn interferometer_program(sys: &SpinSystem, theta: f64) -> Result<CompiledProgram> {
    compile(INTERFEROMETER, sys, FrameSpec::conditional_b(sys), &[("theta", theta)])
}

pub fn u1_program(sys: &SpinSystem) -> Result<CompiledProgram> {
    compile(PROCEDURE_U1, sys, FrameSpec::single_qubit_a(sys), &[])
}

pub fn u2_program(sys: &SpinSystem) -> Result<CompiledProgram> {
    compile(PROCEDURE_U2, sys, FrameSpec::single_qubit_a(sys), &[])
}

pub fn uc_program(sys: &SpinSystem) -> Result<CompiledProgram> {
    interferometer_program(sys, UC_THETA)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations() {
        let sys = SpinSystem::default();
        let j = sys.j_coupling;
        assert!((u1_program(&sys).unwrap().total_duration() - 1.0 / (4.0 * j)).abs() < 1e-15);
        assert!((u2_program(&sys).unwrap().total_duration() - 1.0 / (4.0 * j)).abs() < 1e-15);
        assert!((uc_program(&sys).unwrap().total_duration() - 3.0 / (4.0 * j)).abs() < 1e-15);
        assert!((prep_program(&sys).unwrap().total_duration() - 1.0 / (2.0 * j)).abs() < 1e-15);
    }
}
