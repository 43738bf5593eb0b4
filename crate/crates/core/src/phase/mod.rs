//! Cyclic evolutions on the Bloch sphere and their phase decomposition.

mod fit;
mod loops;
mod trajectory;

pub use fit::{fit_unconventional, UnconventionalFit};
pub use loops::{solid_angle, BlochLoop, LoopVariant};
pub use trajectory::{
    angle_distance, dynamic_phase, evolve_cyclic, geometric_phase, pulse_phase, total_phase, trace,
    trajectory_solid_angle, wrap_phase, Branch, PhaseReport, Segment, SegmentKind, Trajectory, TrajectorySample,
    CLOSURE_TOL, DEFAULT_SAMPLES_PER_EVENT, QUADRATURE_TOL,
};
