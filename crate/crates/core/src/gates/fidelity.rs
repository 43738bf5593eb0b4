use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{CMatrix, CVector, Operator, StateVector, C64, ZERO};

use super::channel::{Channel, DephasingChannel};
use super::tomography::{process_tomography, ChoiMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// Mean over the axial input states (products of them for two spins).
    pub six_state: f64,
    /// Haar average from the exact channel.
    pub haar: f64,
    /// Haar average from the tomographically reconstructed channel.
    pub process: f64,
    pub per_state: Vec<(String, f64)>,
}

fn axial_single() -> Vec<(&'static str, StateVector)> {
    use std::f64::consts::{FRAC_PI_2, PI};
    vec![
        ("0", StateVector::up()),
        ("1", StateVector::down()),
        ("+", StateVector::equator(0.0)),
        ("-", StateVector::equator(PI)),
        ("+i", StateVector::equator(FRAC_PI_2)),
        ("-i", StateVector::equator(-FRAC_PI_2)),
    ]
}

/// The six axial Bloch states, or their 36 products for two spins.
pub fn axial_states(dim: usize) -> Result<Vec<(String, StateVector)>> {
    let singles = axial_single();
    match dim {
        2 => Ok(singles.into_iter().map(|(l, s)| (l.to_string(), s)).collect()),
        4 => {
            let mut out = Vec::with_capacity(36);
            for (la, a) in &singles {
                for (lb, b) in &singles {
                    out.push((format!("{la},{lb}"), crate::quantum::tensor(a, b)?));
                }
            }
            Ok(out)
        }
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// `⟨Uψ| E(|ψ⟩⟨ψ|) |Uψ⟩`.
fn state_fidelity(ideal: &Operator, actual: &dyn Channel, psi: &StateVector) -> Result<f64> {
    let out = actual.apply(&psi.projector())?;
    let target = ideal.matrix() * psi.amplitudes();
    Ok(target.dotc(&(out * &target)).re)
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// `(d·F_pro + 1)/(d + 1)`.
fn average_from_process(d: usize, f_pro: f64) -> f64 {
    let d = d as f64;
    (d * f_pro + 1.0) / (d + 1.0)
}

/// Six-state, exact Haar and tomographic averages of `actual` against `ideal`.
pub fn average_gate_fidelity(ideal: &Operator, actual: &dyn Channel) -> Result<FidelityReport> {
    let d = ideal.dim();
    if actual.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: actual.dim() });
    }
    let states = axial_states(d)?;
    let per_state = states
        .par_iter()
        .map(|(label, psi)| Ok((label.clone(), clamp_unit(state_fidelity(ideal, actual, psi)?))))
        .collect::<Result<Vec<_>>>()?;
    let six_state = per_state.iter().map(|(_, f)| f).sum::<f64>() / per_state.len() as f64;
    let exact = ChoiMatrix::from_channel(actual)?;
    let haar = clamp_unit(average_from_process(d, exact.process_fidelity(ideal)?));
    let tomo = process_tomography(actual)?;
    let process = clamp_unit(average_from_process(d, tomo.choi.process_fidelity(ideal)?));
    Ok(FidelityReport { six_state, haar, process, per_state })
}

/// Closed-form Haar average `(d + |Tr(U†V)|²)/(d(d+1))` for a unitary `V`.
pub fn haar_fidelity_unitary(ideal: &Operator, actual: &Operator) -> Result<f64> {
    if ideal.dim() != actual.dim() {
        return Err(Error::DimensionMismatch { expected: ideal.dim(), found: actual.dim() });
    }
    let d = ideal.dim() as f64;
    let overlap = (ideal.matrix().adjoint() * actual.matrix()).trace().norm_sqr();
    Ok((d + overlap) / (d * (d + 1.0)))
}

fn gaussian_vector<R: Rng>(d: usize, rng: &mut R) -> CVector {
    CVector::from_fn(d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn haar_state<R: Rng>(d: usize, rng: &mut R) -> StateVector {
    loop {
        let v = gaussian_vector(d, rng);
        let n = v.norm();
        if n > 1e-12 {
            return StateVector::from_vector_unchecked(v.unscale(n));
        }
    }
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase of `R`'s
/// diagonal absorbed).
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> Operator {
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            ZERO
        }
    });
    Operator::unitary_unchecked(q * phases)
}

/// Dephasing along a uniformly random axis with strength in `[0, 1)`.
pub fn random_dephasing<R: Rng>(rng: &mut R) -> DephasingChannel {
    loop {
        let n: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        if let Ok(ch) = DephasingChannel::new(n, rng.gen::<f64>()) {
            return ch;
        }
    }
}

/// Monte-Carlo estimate of the Haar-averaged fidelity with its standard
/// error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

const MC_CHUNK: usize = 1000;

/// Averages the fidelity over Haar-random inputs. Each chunk of samples
/// draws from its own ChaCha stream, so results do not depend on thread
/// scheduling.
pub fn haar_fidelity_monte_carlo(
    ideal: &Operator,
    actual: &dyn Channel,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples < 2 {
        return Err(Error::InvalidParameter("Monte-Carlo needs at least 2 samples".into()));
    }
    let d = ideal.dim();
    let chunks = samples.div_ceil(MC_CHUNK);
    let sums = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut s = (0.0, 0.0);
            for _ in 0..count {
                let f = state_fidelity(ideal, actual, &haar_state(d, &mut rng))?;
                s.0 += f;
                s.1 += f * f;
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let (sum, sum_sq) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(MonteCarloEstimate { mean, std_error: (var / n).sqrt(), samples })
}
