use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::trajectory::{choose_gauge, wrap_phase, Trajectory};

const ON_SPHERE_TOL: f64 = 1e-10;
const CLOSED_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoopVariant {
    /// N → down a meridian to polar angle θ → along the latitude by Δφ →
    /// back up to N.
    North,
    /// S → up a meridian to polar angle θ (measured from N) → along the
    /// latitude by Δφ → back down to S.
    SouthMirror,
    /// E on the latitude θ → along it by Δφ to F → up to N → down to E.
    Efn,
    /// Points taken from a simulated trajectory.
    Traced,
}

/// Closed path on the Bloch sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochLoop {
    pub theta: f64,
    pub delta_phi: f64,
    pub variant: LoopVariant,
    pub points: Vec<[f64; 3]>,
}

fn on_sphere(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn arc(out: &mut Vec<[f64; 3]>, n: usize, f: impl Fn(f64) -> [f64; 3]) {
    for k in 1..=n {
        out.push(f(k as f64 / n as f64));
    }
}

impl BlochLoop {
    pub fn north(theta: f64, delta_phi: f64, samples: usize) -> Self {
        let n = samples.max(2);
        let mut pts = vec![[0.0, 0.0, 1.0]];
        arc(&mut pts, n, |s| on_sphere(theta * s, 0.0));
        arc(&mut pts, n, |s| on_sphere(theta, delta_phi * s));
        arc(&mut pts, n, |s| on_sphere(theta * (1.0 - s), delta_phi));
        BlochLoop { theta, delta_phi, variant: LoopVariant::North, points: pts }
    }

    pub fn south_mirror(theta: f64, delta_phi: f64, samples: usize) -> Self {
        let n = samples.max(2);
        let mut pts = vec![[0.0, 0.0, -1.0]];
        arc(&mut pts, n, |s| on_sphere(PI - (PI - theta) * s, 0.0));
        arc(&mut pts, n, |s| on_sphere(theta, delta_phi * s));
        arc(&mut pts, n, |s| on_sphere(theta + (PI - theta) * s, delta_phi));
        BlochLoop { theta, delta_phi, variant: LoopVariant::SouthMirror, points: pts }
    }

    pub fn efn(theta: f64, delta_phi: f64, samples: usize) -> Self {
        let n = samples.max(2);
        let mut pts = vec![on_sphere(theta, 0.0)];
        arc(&mut pts, n, |s| on_sphere(theta, delta_phi * s));
        arc(&mut pts, n, |s| on_sphere(theta * (1.0 - s), delta_phi));
        arc(&mut pts, n, |s| on_sphere(theta * s, 0.0));
        BlochLoop { theta, delta_phi, variant: LoopVariant::Efn, points: pts }
    }

    pub fn from_trajectory(traj: &Trajectory) -> Self {
        BlochLoop { theta: f64::NAN, delta_phi: f64::NAN, variant: LoopVariant::Traced, points: traj.bloch_points() }
    }

    /// Closed form `Δφ(1 − cos θ)` for the north and EFN variants and
    /// `−Δφ(1 + cos θ)` for the south mirror.
    pub fn closed_form(&self) -> Option<f64> {
        match self.variant {
            LoopVariant::North | LoopVariant::Efn => Some(self.delta_phi * (1.0 - self.theta.cos())),
            LoopVariant::SouthMirror => Some(-self.delta_phi * (1.0 + self.theta.cos())),
            LoopVariant::Traced => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::OpenLoop(f64::INFINITY));
        }
        for p in &self.points {
            let dev = ((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs();
            if dev > ON_SPHERE_TOL {
                return Err(Error::InvalidParameter(format!("loop point off the unit sphere by {dev:e}")));
            }
        }
        let (a, b) = (self.points[0], self.points[self.points.len() - 1]);
        let gap = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        if gap > CLOSED_TOL {
            return Err(Error::OpenLoop(gap));
        }
        Ok(())
    }
}

/// Azimuth of `r` about the gauge axis `n` (±z only), or `None` at a pole.
fn azimuth(r: [f64; 3], n: [f64; 3]) -> Option<f64> {
    let rho = r[0].hypot(r[1]);
    (rho > 1e-12).then(|| r[1].atan2(r[0]) * n[2].signum())
}

/// Signed solid angle `∮(1 − r·n) dφ` with `n = ±z` chosen to avoid the
/// pole the loop passes through.
///
/// Each step contributes `(1 − r̄·n)Δφ` with `r̄·n` averaged over its ends,
/// which is exact on latitudes and meridians; a step touching a pole has no
/// azimuth change in the gauge that regularises it.
pub fn solid_angle(lp: &BlochLoop) -> Result<f64> {
    lp.validate()?;
    let mut n = choose_gauge(&lp.points);
    if n[2] == 0.0 {
        // loops through both poles: keep the pole with the larger clearance
        let clear = |s: f64| lp.points.iter().map(|r| 1.0 + s * r[2]).fold(f64::INFINITY, f64::min);
        n = if clear(1.0) >= clear(-1.0) { [0.0, 0.0, 1.0] } else { [0.0, 0.0, -1.0] };
    }
    let mut total = 0.0;
    for w in lp.points.windows(2) {
        let (Some(p0), Some(p1)) = (azimuth(w[0], n), azimuth(w[1], n)) else {
            continue;
        };
        let dphi = wrap_phase(p1 - p0);
        let height = 0.5 * (w[0][2] + w[1][2]) * n[2];
        total += (1.0 - height) * dphi;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn north_loop_closed_form() {
        for &(theta, dphi) in &[(PI / 2.0, PI), (PI / 3.0, PI), (0.3, 1.1), (PI / 4.0, -PI)] {
            let lp = BlochLoop::north(theta, dphi, 64);
            let omega = solid_angle(&lp).unwrap();
            assert!((omega - lp.closed_form().unwrap()).abs() < 1e-12, "{theta} {dphi}: {omega}");
        }
        assert!((solid_angle(&BlochLoop::north(PI / 2.0, PI, 64)).unwrap() - PI).abs() < 1e-12);
        assert_eq!(solid_angle(&BlochLoop::north(0.0, PI, 16)).unwrap(), 0.0);
    }

    #[test]
    fn south_mirror_is_opposite() {
        let lp = BlochLoop::south_mirror(PI / 2.0, PI, 64);
        assert!((solid_angle(&lp).unwrap() + PI).abs() < 1e-12);
        let lp = BlochLoop::south_mirror(2.0 * PI / 3.0, PI, 64);
        assert!((solid_angle(&lp).unwrap() - lp.closed_form().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn efn_matches_north_geometry() {
        let a = solid_angle(&BlochLoop::efn(PI / 4.0, PI, 32)).unwrap();
        let b = solid_angle(&BlochLoop::north(PI / 4.0, PI, 32)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn open_or_off_sphere_loops_fail() {
        let mut lp = BlochLoop::north(1.0, 1.0, 8);
        lp.points.pop();
        assert!(matches!(solid_angle(&lp), Err(Error::OpenLoop(_))));
        let mut lp = BlochLoop::north(1.0, 1.0, 8);
        lp.points[3][0] *= 1.1;
        assert!(solid_angle(&lp).is_err());
    }
}
