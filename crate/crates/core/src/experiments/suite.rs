use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{
    average_gate_fidelity, make_controlled_gate, make_gate, process_tomography, Channel, FidelityReport, GateSpec,
    ProgramChannel, ReducedChannel,
};
use crate::quantum::{spin_ops, Operator, Spin};
use crate::sequence::CompiledProgram;

use super::config::ExperimentConfig;
use super::sequences::{u1_program, u2_program, uc_program};

/// Noiseless compiled-vs-ideal tolerance, on matrix entries and on
/// `1 − F`.
pub const GATE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    U1,
    U2,
    Uc,
}

impl GateKind {
    pub const ALL: [GateKind; 3] = [GateKind::U1, GateKind::U2, GateKind::Uc];

    pub fn as_str(self) -> &'static str {
        match self {
            GateKind::U1 => "u1",
            GateKind::U2 => "u2",
            GateKind::Uc => "uc",
        }
    }

    pub fn program(self, cfg: &ExperimentConfig) -> Result<CompiledProgram> {
        match self {
            GateKind::U1 => u1_program(&cfg.system),
            GateKind::U2 => u2_program(&cfg.system),
            GateKind::Uc => uc_program(&cfg.system),
        }
    }

    /// Target gate: single-spin for U1/U2, two-spin for Uc.
    pub fn ideal(self) -> Operator {
        match self {
            GateKind::U1 => make_gate(&GateSpec::u1()),
            GateKind::U2 => make_gate(&GateSpec::u2()),
            GateKind::Uc => make_controlled_gate(),
        }
    }

    /// The compiled program as a channel on the gate's own space.
    pub fn channel(self, cfg: &ExperimentConfig) -> Result<Box<dyn Channel>> {
        let inner = ProgramChannel { program: self.program(cfg)?, system: cfg.system, noise: cfg.noise };
        Ok(match self {
            GateKind::Uc => Box::new(inner),
            _ => Box::new(ReducedChannel { inner, keep: Spin::A }),
        })
    }

    /// Distance of the noiseless compiled unitary from the target. Single
    /// spin gates are compared as `U ⊗ I` up to a global phase; Uc with the
    /// phase fixed at the `|11⟩` entry.
    pub fn compiled_distance(self, cfg: &ExperimentConfig) -> Result<f64> {
        let u = self.program(cfg)?.net_unitary(&cfg.system, &crate::spin::NoiseConfig::none())?;
        match self {
            GateKind::Uc => u.distance_fixing_entry(&self.ideal(), 3),
            _ => {
                let embedded = Operator::unitary(spin_ops::embed(self.ideal().matrix(), Spin::A))?;
                u.distance_up_to_phase(&embedded)
            }
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u1" => Ok(GateKind::U1),
            "u2" => Ok(GateKind::U2),
            "uc" => Ok(GateKind::Uc),
            other => Err(Error::InvalidParameter(format!("unknown gate `{other}` (u1, u2 or uc)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSuiteEntry {
    pub gate: GateKind,
    pub duration: f64,
    /// Noiseless compiled-vs-ideal distance.
    pub unitary_distance: f64,
    pub fidelity: FidelityReport,
}

/// Compiles the three procedures and reports their fidelities. Without
/// noise every gate must match its target within [`GATE_TOL`].
pub fn run_gate_suite(cfg: &ExperimentConfig) -> Result<Vec<GateSuiteEntry>> {
    cfg.validate()?;
    GateKind::ALL
        .par_iter()
        .map(|&gate| {
            let duration = gate.program(cfg)?.total_duration();
            let unitary_distance = gate.compiled_distance(cfg)?;
            let fidelity = average_gate_fidelity(&gate.ideal(), gate.channel(cfg)?.as_ref())?;
            if !cfg.noise.enabled {
                let worst = fidelity.six_state.min(fidelity.haar).min(fidelity.process);
                if unitary_distance > GATE_TOL || 1.0 - worst > GATE_TOL {
                    return Err(Error::CheckFailed(format!(
                        "{gate}: compiled gate misses target (distance {unitary_distance:e}, fidelity {worst})"
                    )));
                }
            }
            Ok(GateSuiteEntry { gate, duration, unitary_distance, fidelity })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyReport {
    pub gate: GateKind,
    pub process_fidelity: f64,
    pub average_fidelity: f64,
    pub trace_preservation_error: f64,
    pub min_eigenvalue: f64,
    pub inputs_used: Vec<String>,
}

/// Process tomography of one compiled procedure against its target.
pub fn run_tomography(gate: GateKind, cfg: &ExperimentConfig) -> Result<TomographyReport> {
    cfg.validate()?;
    let channel = gate.channel(cfg)?;
    let res = process_tomography(channel.as_ref())?;
    let ideal = gate.ideal();
    let f_pro = res.choi.process_fidelity(&ideal)?;
    let d = ideal.dim() as f64;
    Ok(TomographyReport {
        gate,
        process_fidelity: f_pro,
        average_fidelity: ((d * f_pro + 1.0) / (d + 1.0)).clamp(0.0, 1.0),
        trace_preservation_error: res.choi.trace_preservation_error(),
        min_eigenvalue: res.choi.min_eigenvalue(),
        inputs_used: res.inputs_used,
    })
}
