use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{hermitian_propagator, CMatrix, CVector, Operator, Spin, StateVector, C64};
use crate::sequence::CompiledProgram;
use crate::spin::{frame_hamiltonian, pulse_generator_2x2, rotation_2x2, PulseEvent, SpinSystem};

/// A trajectory reopening by more than this is not cyclic.
pub const CLOSURE_TOL: f64 = 1e-8;

/// Quadrature error budget per trajectory.
pub const QUADRATURE_TOL: f64 = 1e-7;

pub const DEFAULT_SAMPLES_PER_EVENT: usize = 64;

/// Which spin moves and which basis state the other one sits in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub active: Spin,
    /// `false` for up (`|0⟩`), `true` for down.
    pub passive_down: bool,
}

impl Branch {
    pub fn new(active: Spin, passive_down: bool) -> Self {
        Branch { active, passive_down }
    }

    /// Spin `b` moving while `a` is up.
    pub fn conditional_b() -> Self {
        Branch::new(Spin::B, false)
    }

    /// Spin `a` moving while `b` is up.
    pub fn single_a() -> Self {
        Branch::new(Spin::A, false)
    }

    fn index(&self, active_bit: usize, passive_bit: usize) -> usize {
        (active_bit << self.active.bit()) | (passive_bit << self.active.other().bit())
    }

    /// The 2×2 block of a two-spin diagonal Hamiltonian seen by the active
    /// spin, including the constant offset from the passive spin.
    fn block(&self, h: &CMatrix, passive_bit: usize) -> CMatrix {
        CMatrix::from_fn(2, 2, |r, c| h[(self.index(r, passive_bit), self.index(c, passive_bit))])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub time: f64,
    pub state: StateVector,
    /// Instantaneous generator (rad/s for delays, per radian for pulse arcs).
    pub hamiltonian: Operator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    Delay,
    PulseArc,
}

/// A run of samples `start..=end` produced by one event. `span` is the
/// duration of a delay or the rotation angle of a pulse arc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
    pub span: f64,
}

/// Sampled single-spin evolution with the generator in force at each sample.
///
/// Sample times never decrease; pulse arcs are instantaneous, so all of
/// their samples share one timestamp.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub segments: Vec<Segment>,
    pub closed: bool,
    pub closing_distance: f64,
}

impl Trajectory {
    pub fn initial(&self) -> &StateVector {
        &self.samples[0].state
    }

    pub fn last(&self) -> &StateVector {
        &self.samples[self.samples.len() - 1].state
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].time
    }

    /// Bloch vectors of every sample.
    pub fn bloch_points(&self) -> Vec<[f64; 3]> {
        self.samples.iter().map(|s| s.state.bloch_vector().expect("single-spin sample")).collect()
    }

    fn require_closed(&self) -> Result<()> {
        if self.closed {
            Ok(())
        } else {
            Err(Error::OpenTrajectory { distance: self.closing_distance })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum PulseRole {
    /// Opens a refocused pair; the partner undoes it up to a phase.
    Open,
    Close(C64),
    Arc,
}

/// Scalar `c` with `m = c·I`, if any.
fn scalar_multiple(m: &CMatrix) -> Option<C64> {
    let c = m[(0, 0)];
    let off = m[(0, 1)].norm().max(m[(1, 0)].norm());
    (off < 1e-12 && (m[(1, 1)] - c).norm() < 1e-12).then_some(c)
}

/// Pairs consecutive active-spin pulses `P_i, P_j` with `P_j·P_i ∝ I`.
/// Between such a pair the evolution is followed in the frame toggled by
/// `P_i`, where the pair itself does nothing and the delays in between act
/// through `P_i† H P_i`.
fn classify_pulses(events: &[PulseEvent], active: Spin) -> Vec<Option<PulseRole>> {
    let mut roles = vec![None; events.len()];
    let mut pending: Option<(usize, CMatrix)> = None;
    for (k, e) in events.iter().enumerate() {
        if let PulseEvent::HardPulse { target, phase, angle } = *e {
            if target != active {
                continue;
            }
            let p = rotation_2x2(phase, angle);
            match pending.take() {
                Some((i, pi)) => match scalar_multiple(&(&p * &pi)) {
                    Some(c) => {
                        roles[i] = Some(PulseRole::Open);
                        roles[k] = Some(PulseRole::Close(c));
                    }
                    None => {
                        roles[i] = Some(PulseRole::Arc);
                        pending = Some((k, p));
                    }
                },
                None => pending = Some((k, p)),
            }
        }
    }
    if let Some((i, _)) = pending {
        roles[i] = Some(PulseRole::Arc);
    }
    roles
}

/// Effect of a pulse on the passive spin sitting in a basis state: the new
/// basis bit and the amplitude picked up.
fn passive_action(phase: f64, angle: f64, bit: usize) -> Result<(usize, C64)> {
    let r = rotation_2x2(phase, angle);
    let stay = r[(bit, bit)];
    let flip = r[(1 - bit, bit)];
    if flip.norm() < 1e-12 {
        Ok((bit, stay))
    } else if stay.norm() < 1e-12 {
        Ok((1 - bit, flip))
    } else {
        Err(Error::PassiveSpinPulse(angle))
    }
}

fn samples_count(samples_per_event: usize) -> Result<usize> {
    if samples_per_event < 8 {
        return Err(Error::InsufficientSamples(samples_per_event));
    }
    Ok(samples_per_event.div_ceil(4) * 4)
}

/// Follows `initial` (a single-spin state of the active spin) through `prog`
/// on `branch` and records a sampled trajectory.
///
/// Unpaired pulses are sampled as rotation arcs with their generator
/// recorded; refocused pulse pairs are handled in the toggling frame.
/// Fails with `OpenTrajectory` unless the final state equals the initial one
/// up to a global phase.
pub fn evolve_cyclic(
    initial: &StateVector,
    prog: &CompiledProgram,
    sys: &SpinSystem,
    branch: Branch,
    samples_per_event: usize,
) -> Result<Trajectory> {
    let traj = trace(initial, prog, sys, branch, samples_per_event)?;
    traj.require_closed()?;
    Ok(traj)
}

/// Like [`evolve_cyclic`] but returns open trajectories too.
pub fn trace(
    initial: &StateVector,
    prog: &CompiledProgram,
    sys: &SpinSystem,
    branch: Branch,
    samples_per_event: usize,
) -> Result<Trajectory> {
    if initial.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: initial.dim() });
    }
    let n = samples_count(samples_per_event)?;
    let h4 = frame_hamiltonian(sys, prog.frame());
    let events = prog.events();
    let roles = classify_pulses(events, branch.active);

    let mut passive = usize::from(branch.passive_down);
    let mut psi: CVector = initial.amplitudes().clone();
    let mut time = 0.0;
    let mut toggle: Option<CMatrix> = None;
    let mut samples = vec![TrajectorySample {
        time,
        state: initial.clone(),
        hamiltonian: Operator::from_matrix_unchecked(branch.block(h4.matrix(), passive)),
    }];
    let mut segments = Vec::new();

    for (k, event) in events.iter().enumerate() {
        match *event {
            PulseEvent::GradientCrusher => return Err(Error::NonUnitaryEvent),
            PulseEvent::HardPulse { target, phase, angle } if target != branch.active => {
                let (bit, amp) = passive_action(phase, angle, passive)?;
                passive = bit;
                psi *= amp;
            }
            PulseEvent::HardPulse { phase, angle, .. } => match roles[k] {
                Some(PulseRole::Open) => toggle = Some(rotation_2x2(phase, angle)),
                Some(PulseRole::Close(c)) => {
                    toggle = None;
                    psi *= c;
                }
                _ => {
                    let start = samples.len() - 1;
                    let generator = Operator::from_matrix_unchecked(pulse_generator_2x2(phase));
                    let psi0 = psi.clone();
                    for s in 1..=n {
                        psi = rotation_2x2(phase, angle * s as f64 / n as f64) * &psi0;
                        samples.push(TrajectorySample {
                            time,
                            state: StateVector::from_vector_unchecked(psi.clone()),
                            hamiltonian: generator.clone(),
                        });
                    }
                    segments.push(Segment { kind: SegmentKind::PulseArc, start, end: samples.len() - 1, span: angle });
                }
            },
            PulseEvent::Delay { duration } => {
                if duration == 0.0 {
                    continue;
                }
                let block = branch.block(h4.matrix(), passive);
                let h = match &toggle {
                    Some(p) => p.adjoint() * block * p,
                    None => block,
                };
                let start = samples.len() - 1;
                let generator = Operator::from_matrix_unchecked(h.clone());
                let psi0 = psi.clone();
                for s in 1..=n {
                    let t = duration * s as f64 / n as f64;
                    psi = hermitian_propagator(&h, t) * &psi0;
                    samples.push(TrajectorySample {
                        time: time + t,
                        state: StateVector::from_vector_unchecked(psi.clone()),
                        hamiltonian: generator.clone(),
                    });
                }
                time += duration;
                segments.push(Segment { kind: SegmentKind::Delay, start, end: samples.len() - 1, span: duration });
            }
        }
    }

    // pair phases and passive flips may leave a last global factor
    let final_state = StateVector::from_vector_unchecked(psi);
    let last = samples.len() - 1;
    samples[last].state = final_state.clone();
    let closing_distance = final_state.phase_distance(initial)?;
    Ok(Trajectory { samples, segments, closed: closing_distance <= CLOSURE_TOL, closing_distance })
}

pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// `arg⟨ψ(0)|ψ(τ)⟩` in `(−π, π]`.
pub fn total_phase(traj: &Trajectory) -> Result<f64> {
    traj.require_closed()?;
    let ov = traj.initial().inner(traj.last())?;
    Ok(wrap_phase(ov.arg()))
}

/// Composite Simpson over `f` sampled on `n` equal intervals (n even), with
/// an error estimate from the half-resolution rule.
fn simpson_with_error(f: &[f64], h: f64) -> (f64, f64) {
    let simpson = |g: &[f64], h: f64| {
        let m = g.len() - 1;
        let mut acc = g[0] + g[m];
        for (i, v) in g.iter().enumerate().take(m).skip(1) {
            acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        acc * h / 3.0
    };
    let fine = simpson(f, h);
    let coarse_pts: Vec<f64> = f.iter().step_by(2).copied().collect();
    let coarse = simpson(&coarse_pts, 2.0 * h);
    (fine, (fine - coarse).abs() / 15.0)
}

fn integrate_segments(
    traj: &Trajectory,
    kind: SegmentKind,
    integrand: impl Fn(usize, &Segment) -> Result<f64>,
) -> Result<f64> {
    let mut total = 0.0;
    let mut err = 0.0;
    for seg in traj.segments.iter().filter(|s| s.kind == kind) {
        let values = (seg.start..=seg.end).map(|i| integrand(i, seg)).collect::<Result<Vec<_>>>()?;
        let h = seg.span / (values.len() - 1) as f64;
        let (v, e) = simpson_with_error(&values, h);
        total += v;
        err += e;
    }
    if err > QUADRATURE_TOL {
        return Err(Error::QuadratureNotConverged(err));
    }
    Ok(total)
}

fn generator_expectation(traj: &Trajectory, i: usize, seg: &Segment) -> f64 {
    // the generator of sample `i` belongs to the segment, except the shared
    // first sample which carries the previous one
    let h = traj.samples[seg.end].hamiltonian.matrix();
    let psi = traj.samples[i].state.amplitudes();
    psi.dotc(&(h * psi)).re
}

/// `γ_d = −∫⟨ψ|H|ψ⟩dt` over the delays (ħ = 1).
pub fn dynamic_phase(traj: &Trajectory) -> Result<f64> {
    traj.require_closed()?;
    integrate_segments(traj, SegmentKind::Delay, |i, seg| Ok(-generator_expectation(traj, i, seg)))
}

/// `−∫⟨G⟩dα` over the pulse arcs. Zero when every arc runs along a great
/// circle through the generator's poles.
pub fn pulse_phase(traj: &Trajectory) -> Result<f64> {
    integrate_segments(traj, SegmentKind::PulseArc, |i, seg| Ok(-generator_expectation(traj, i, seg)))
}

/// Total minus dynamic phase, wrapped to `(−π, π]`.
pub fn geometric_phase(traj: &Trajectory) -> Result<f64> {
    Ok(wrap_phase(total_phase(traj)? - dynamic_phase(traj)?))
}

/// Rotation vector `ω` of a single-spin generator `H = ω·I`.
fn rotation_vector(h: &CMatrix) -> [f64; 3] {
    [2.0 * h[(1, 0)].re, 2.0 * h[(1, 0)].im, (h[(0, 0)] - h[(1, 1)]).re]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

const GAUGE_AXES: [[f64; 3]; 6] =
    [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]];

/// Axis `n` for the line integral `∮(1 − r·n)dφ_n`, which is singular only
/// at `−n`. The `+z` axis is kept whenever the path stays clear of the south
/// pole, so that the result reads as `∮(1 − cos χ)dφ`.
pub(crate) fn choose_gauge(points: &[[f64; 3]]) -> [f64; 3] {
    let clearance = |n: [f64; 3]| points.iter().map(|r| 1.0 + dot(*r, n)).fold(f64::INFINITY, f64::min);
    for n in &GAUGE_AXES[..2] {
        if clearance(*n) > 0.1 {
            return *n;
        }
    }
    *GAUGE_AXES.iter().max_by(|a, b| clearance(**a).total_cmp(&clearance(**b))).expect("non-empty")
}

/// Signed solid angle enclosed by the trajectory, from Simpson quadrature of
/// `n·(r × ṙ)/(1 + r·n)` along every segment, with `ṙ = ω × r`.
pub fn trajectory_solid_angle(traj: &Trajectory) -> Result<f64> {
    traj.require_closed()?;
    let points = traj.bloch_points();
    let n = choose_gauge(&points);
    let integrand = |i: usize, seg: &Segment| -> Result<f64> {
        let omega = rotation_vector(traj.samples[seg.end].hamiltonian.matrix());
        let r = points[i];
        let rdot = cross(omega, r);
        Ok(dot(n, cross(r, rdot)) / (1.0 + dot(r, n)))
    };
    let delays = integrate_segments(traj, SegmentKind::Delay, integrand)?;
    let arcs = integrate_segments(traj, SegmentKind::PulseArc, integrand)?;
    Ok(delays + arcs)
}

/// Phase decomposition of one cyclic evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub gamma_total: f64,
    pub gamma_dynamic: f64,
    pub gamma_geometric: f64,
    pub solid_angle: f64,
    /// Would-be dynamic phase along pulse arcs; expected to vanish.
    pub pulse_phase: f64,
}

impl PhaseReport {
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        Ok(PhaseReport {
            gamma_total: total_phase(traj)?,
            gamma_dynamic: dynamic_phase(traj)?,
            gamma_geometric: geometric_phase(traj)?,
            solid_angle: trajectory_solid_angle(traj)?,
            pulse_phase: pulse_phase(traj)?,
        })
    }
}

/// Shortest distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}
