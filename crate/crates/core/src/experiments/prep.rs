use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{CMatrix, DensityOperator, ONE};
use crate::sequence::CompiledProgram;
use crate::spin::thermal_state;

use super::config::ExperimentConfig;
use super::sequences::prep_program;

/// Largest tolerated Frobenius norm of the part of ρ outside
/// `λI/4 + μ|00⟩⟨00|`.
pub const PREP_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepReport {
    pub lambda: f64,
    pub mu: f64,
    pub residual: f64,
    /// Real parts of the final density matrix, row-major.
    pub final_state: Vec<Vec<f64>>,
}

/// Best `λ`, `μ` and the residual norm for `ρ ≈ λI/4 + μ|00⟩⟨00|`.
pub fn pseudo_pure_decomposition(rho: &DensityOperator) -> PrepReport {
    let m = rho.matrix();
    let quarter_lambda = (m[(1, 1)].re + m[(2, 2)].re + m[(3, 3)].re) / 3.0;
    let mu = m[(0, 0)].re - quarter_lambda;
    let mut model = CMatrix::identity(4, 4).scale(quarter_lambda);
    model[(0, 0)] += ONE.scale(mu);
    let residual = (m - model).norm();
    let final_state = (0..4).map(|r| (0..4).map(|c| m[(r, c)].re).collect()).collect();
    PrepReport { lambda: 4.0 * quarter_lambda, mu, residual, final_state }
}

/// Runs `prog` on the thermal state and checks the effective-pure form.
pub fn check_prep_program(prog: &CompiledProgram, cfg: &ExperimentConfig) -> Result<PrepReport> {
    let rho = prog.run(&thermal_state(cfg.epsilon)?, &cfg.system, &cfg.noise)?;
    let report = pseudo_pure_decomposition(&rho);
    if report.residual > PREP_RESIDUAL_TOL {
        return Err(Error::CheckFailed(format!(
            "prepared state is not of pseudo-pure form (residual {:e})",
            report.residual
        )));
    }
    if cfg.epsilon > 0.0 && report.mu <= 0.0 {
        return Err(Error::CheckFailed(format!("pseudo-pure weight mu = {:e} is not positive", report.mu)));
    }
    Ok(report)
}

pub fn run_prep_check(cfg: &ExperimentConfig) -> Result<PrepReport> {
    check_prep_program(&prep_program(&cfg.system)?, cfg)
}
