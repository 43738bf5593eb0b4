use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line `γ_d = α_g + η·γ_g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnconventionalFit {
    pub alpha_g: f64,
    pub eta: f64,
    /// Largest absolute residual over the input points, rad.
    pub max_residual: f64,
}

/// Fits `(gamma_dynamic, gamma_geometric)` pairs from a sweep.
pub fn fit_unconventional(points: &[(f64, f64)]) -> Result<UnconventionalFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|(d, g)| !d.is_finite() || !g.is_finite()) {
        return Err(Error::DegenerateFit("non-finite phase in sweep".into()));
    }
    let n = points.len() as f64;
    let mean_g = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_d = points.iter().map(|p| p.0).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.1 - mean_g).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.1 - mean_g) * (p.0 - mean_d)).sum();
    let spread = points.iter().map(|p| (p.1 - mean_g).abs()).fold(0.0, f64::max);
    if spread < 1e-9 {
        return Err(Error::DegenerateFit("all geometric phases are equal".into()));
    }
    let eta = sxy / sxx;
    let alpha_g = mean_d - eta * mean_g;
    let max_residual = points.iter().map(|(d, g)| (d - alpha_g - eta * g).abs()).fold(0.0, f64::max);
    Ok(UnconventionalFit { alpha_g, eta, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_line_is_recovered() {
        let pts: Vec<_> = (0..7).map(|k| k as f64 * 0.2 - 0.5).map(|g| (0.3 - 2.0 * g, g)).collect();
        let fit = fit_unconventional(&pts).unwrap();
        assert!((fit.alpha_g - 0.3).abs() < 1e-14);
        assert!((fit.eta + 2.0).abs() < 1e-14);
        assert!(fit.max_residual < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_unconventional(&[(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(matches!(fit_unconventional(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn residual_is_reported() {
        let fit = fit_unconventional(&[(0.0, 0.0), (1.0, 1.0), (0.0, 2.0)]).unwrap();
        assert!(fit.max_residual > 0.1);
    }
}
