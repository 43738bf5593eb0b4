use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{
    angle_distance, evolve_cyclic, fit_unconventional, wrap_phase, Branch, PhaseReport, UnconventionalFit,
};
use crate::quantum::{partial_trace, tensor, DensityOperator, Spin, StateVector};

use super::config::ExperimentConfig;
use super::sequences::interferometer_program;

/// Agreement required between the detector reading and `γd + γg` when the
/// run is noiseless.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariant {
    /// `b` starts up and loops around the north pole.
    Up,
    /// `b` starts down and runs the reflected loop.
    Mirror,
}

impl SweepVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariant::Up => "up",
            SweepVariant::Mirror => "mirror",
        }
    }
}

impl fmt::Display for SweepVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "up" => Ok(SweepVariant::Up),
            "mirror" => Ok(SweepVariant::Mirror),
            other => Err(Error::InvalidParameter(format!("unknown loop variant `{other}`"))),
        }
    }
}

/// One interferometer run. Angles in radians, phases wrapped to `(−π, π]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub theta: f64,
    pub phase_measured: f64,
    pub gamma_dynamic: f64,
    pub gamma_geometric: f64,
    pub loop_variant: SweepVariant,
}

/// Phase of `⟨↑|ρ_a|↓⟩`.
fn coherence_phase(rho: &DensityOperator) -> Result<f64> {
    let a = partial_trace(rho, Spin::A)?;
    Ok(a.matrix()[(0, 1)].arg())
}

/// Auxiliary spin `a` in `|+⟩`, loop spin `b` at its start.
fn initial_state(b_start: &StateVector) -> Result<DensityOperator> {
    Ok(DensityOperator::from_pure(&tensor(&StateVector::equator(0.0), b_start)?))
}

/// Runs the conditional loop with `a` as the phase probe.
///
/// The dynamic phase comes from the noiseless trajectory of `b` on the
/// `a = ↑` branch. Without noise the geometric phase is taken from the same
/// trajectory and checked against the detector; with noise it is the part
/// of the measured phase the dynamic phase does not explain.
pub fn run_interferometer(theta: f64, variant: SweepVariant, cfg: &ExperimentConfig) -> Result<SweepRecord> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta {theta} outside [0, pi]")));
    }
    let sys = &cfg.system;
    let (bound, b_start) = match variant {
        SweepVariant::Up => (theta, StateVector::up()),
        SweepVariant::Mirror => (PI - theta, StateVector::down()),
    };
    let prog = interferometer_program(sys, bound)?;
    let traj = evolve_cyclic(&b_start, &prog, sys, Branch::new(Spin::B, false), cfg.samples_per_event)?;
    let report = PhaseReport::from_trajectory(&traj)?;

    let rho0 = initial_state(&b_start)?;
    let rho1 = prog.run(&rho0, sys, &cfg.noise)?;
    let phase_measured = wrap_phase(coherence_phase(&rho1)? - coherence_phase(&rho0)?);

    let gamma_geometric = if cfg.noise.enabled {
        wrap_phase(phase_measured - report.gamma_dynamic)
    } else {
        let gap = angle_distance(phase_measured, report.gamma_dynamic + report.gamma_geometric);
        if gap > DECOMPOSITION_TOL {
            return Err(Error::CheckFailed(format!(
                "detector phase {phase_measured} differs from gamma_d + gamma_g by {gap:e} at theta = {theta}"
            )));
        }
        report.gamma_geometric
    };
    Ok(SweepRecord {
        theta,
        phase_measured,
        gamma_dynamic: report.gamma_dynamic,
        gamma_geometric,
        loop_variant: variant,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Up records then mirror records, θ ascending within each.
    pub records: Vec<SweepRecord>,
    /// Line fit of `γd` against `γg` over the up records.
    pub fit: UnconventionalFit,
}

/// All grid points for both variants, in output order.
pub fn sweep_points(cfg: &ExperimentConfig) -> Vec<(f64, SweepVariant)> {
    let up = cfg.sweep.up_thetas().into_iter().map(|t| (t, SweepVariant::Up));
    let mirror = cfg.sweep.mirror_thetas().into_iter().map(|t| (t, SweepVariant::Mirror));
    up.chain(mirror).collect()
}

/// Runs every grid point in parallel and fits the up-loop phases.
pub fn run_fig3_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let records = sweep_points(cfg)
        .into_par_iter()
        .map(|(theta, variant)| run_interferometer(theta, variant, cfg))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.loop_variant == SweepVariant::Up)
        .map(|r| (r.gamma_dynamic, r.gamma_geometric))
        .collect();
    let fit = fit_unconventional(&pairs)?;
    Ok(SweepResult { records, fit })
}
