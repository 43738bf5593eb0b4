use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantum::{
    min_eigenvalue, spin_ops, CMatrix, CVector, DensityOperator, Operator, StateVector, C64, ONE, ZERO,
};

use super::channel::Channel;

const CHOI_POSITIVITY_SLACK: f64 = 1e-8;
const CHOI_TP_TOL: f64 = 1e-8;

fn pauli_basis(dim: usize) -> Result<Vec<CMatrix>> {
    let singles: Vec<CMatrix> = [None, Some(spin_ops::Axis::X), Some(spin_ops::Axis::Y), Some(spin_ops::Axis::Z)]
        .into_iter()
        .map(spin_ops::pauli)
        .collect();
    match dim {
        2 => Ok(singles),
        4 => Ok(singles.iter().flat_map(|a| singles.iter().map(move |b| a.kronecker(b))).collect()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Linear inversion from Pauli-product expectation values:
/// `ρ = (1/d) Σ_P Tr(ρP) P`.
fn reconstruct(m: &CMatrix) -> Result<CMatrix> {
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, d);
    for p in pauli_basis(d)? {
        let expectation = (m * &p).trace().re;
        out += p.scale(expectation / d as f64);
    }
    Ok(out)
}

/// Reconstructs `rho_true` from its noiseless Pauli-product readout.
pub fn state_tomography(rho_true: &DensityOperator) -> Result<DensityOperator> {
    let m = reconstruct(rho_true.matrix())?;
    let lowest = min_eigenvalue(&m);
    if lowest < -1e-10 {
        return Err(Error::TomographyNotPositive(-lowest));
    }
    DensityOperator::new(m)
}

fn single_inputs() -> Vec<(&'static str, StateVector)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        ("0", StateVector::up()),
        ("1", StateVector::down()),
        ("+", StateVector::from_vector_unchecked(CVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)]))),
        ("+i", StateVector::from_vector_unchecked(CVector::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, s)]))),
    ]
}

/// The informationally complete inputs `{|0⟩, |1⟩, |+⟩, |+i⟩}^⊗n`.
pub fn tomography_inputs(dim: usize) -> Result<Vec<(String, StateVector)>> {
    let singles = single_inputs();
    match dim {
        2 => Ok(singles.into_iter().map(|(l, s)| (l.to_string(), s)).collect()),
        4 => {
            let mut out = Vec::with_capacity(16);
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

/// `J = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, trace `d`, with `Tr_out J = I` for a
/// trace-preserving channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: CMatrix,
}

fn unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

impl ChoiMatrix {
    fn from_images(d: usize, image: impl Fn(usize, usize) -> CMatrix) -> Self {
        let mut matrix = CMatrix::from_element(d * d, d * d, ZERO);
        for i in 0..d {
            for j in 0..d {
                let e = image(i, j);
                for r in 0..d {
                    for s in 0..d {
                        matrix[(i * d + r, j * d + s)] = e[(r, s)];
                    }
                }
            }
        }
        ChoiMatrix { dim: d, matrix }
    }

    /// Exact Choi matrix from the channel's action on matrix units.
    pub fn from_channel(channel: &dyn Channel) -> Result<Self> {
        let d = channel.dim();
        let images =
            (0..d * d).into_par_iter().map(|k| channel.apply(&unit(d, k / d, k % d))).collect::<Result<Vec<_>>>()?;
        Ok(ChoiMatrix::from_images(d, |i, j| images[i * d + j].clone()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `⟨⟨U|J|U⟩⟩ / d²` with `|U⟩⟩ = Σ_i |i⟩ ⊗ U|i⟩`.
    pub fn process_fidelity(&self, ideal: &Operator) -> Result<f64> {
        let d = self.dim;
        if ideal.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: ideal.dim() });
        }
        let v = CVector::from_fn(d * d, |k, _| ideal.matrix()[(k % d, k / d)]);
        Ok(v.dotc(&(&self.matrix * &v)).re / (d * d) as f64)
    }

    /// `max |Tr_out J − I|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let acc: C64 = (0..d).map(|k| self.matrix[(i * d + k, j * d + k)]).sum();
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    pub fn validate(&self) -> Result<()> {
        let lowest = self.min_eigenvalue();
        if lowest < -CHOI_POSITIVITY_SLACK {
            return Err(Error::CheckFailed(format!("Choi matrix has eigenvalue {lowest:e}")));
        }
        let tp = self.trace_preservation_error();
        if tp > CHOI_TP_TOL {
            return Err(Error::CheckFailed(format!("channel is not trace preserving (error {tp:e})")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ProcessTomographyResult {
    pub choi: ChoiMatrix,
    pub inputs_used: Vec<String>,
}

/// Reconstructs the channel from state tomography of its outputs on
/// [`tomography_inputs`], then expresses it on matrix units.
pub fn process_tomography(channel: &dyn Channel) -> Result<ProcessTomographyResult> {
    let d = channel.dim();
    let inputs = tomography_inputs(d)?;
    let outputs = inputs
        .par_iter()
        .map(|(_, psi)| {
            let out = channel.apply(&psi.projector())?;
            let rho = DensityOperator::new(out)?;
            state_tomography(&rho).map(DensityOperator::into_matrix)
        })
        .collect::<Result<Vec<_>>>()?;

    // columns are the vectorised input states
    let n = d * d;
    let a = CMatrix::from_fn(n, n, |row, col| {
        let rho = inputs[col].1.projector();
        rho[(row % d, row / d)]
    });
    let lu = a.lu();
    let image = |i: usize, j: usize| -> Result<CMatrix> {
        let target = CVector::from_fn(n, |row, _| if row % d == i && row / d == j { ONE } else { ZERO });
        let coeffs =
            lu.solve(&target).ok_or_else(|| Error::CheckFailed("tomography inputs are not complete".into()))?;
        let mut e = CMatrix::zeros(d, d);
        for (k, out) in outputs.iter().enumerate() {
            e += out * coeffs[k];
        }
        Ok(e)
    };
    let mut images = Vec::with_capacity(n);
    for k in 0..n {
        images.push(image(k / d, k % d)?);
    }
    let choi = ChoiMatrix::from_images(d, |i, j| images[i * d + j].clone());
    choi.validate()?;
    Ok(ProcessTomographyResult { choi, inputs_used: inputs.into_iter().map(|(l, _)| l).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{make_controlled_gate, DephasingChannel, UnitaryChannel};
    use crate::quantum::{tensor, I};

    #[test]
    fn state_tomography_is_exact() {
        let zero = DensityOperator::from_pure(&StateVector::up());
        assert!(state_tomography(&zero).unwrap().trace_distance(&zero).unwrap() < 1e-10);
        let mixed = DensityOperator::maximally_mixed(4).unwrap();
        assert!(state_tomography(&mixed).unwrap().trace_distance(&mixed).unwrap() < 1e-10);
        let plus = StateVector::equator(0.0);
        let pp = tensor(&plus, &plus).unwrap();
        let out = DensityOperator::from_pure(&pp).evolve(&make_controlled_gate()).unwrap();
        let direct = DensityOperator::from_pure(&pp.apply(&make_controlled_gate()).unwrap());
        assert!(state_tomography(&out).unwrap().trace_distance(&direct).unwrap() < 1e-10);
    }

    #[test]
    fn identity_and_uc_process_fidelity() {
        let id = Operator::identity(4).unwrap();
        let res = process_tomography(&UnitaryChannel(id.clone())).unwrap();
        assert_eq!(res.inputs_used.len(), 16);
        assert!((res.choi.process_fidelity(&id).unwrap() - 1.0).abs() < 1e-10);
        let uc = make_controlled_gate();
        let res = process_tomography(&UnitaryChannel(uc.clone())).unwrap();
        assert!((res.choi.process_fidelity(&uc).unwrap() - 1.0).abs() < 1e-9);
        let exact = ChoiMatrix::from_channel(&UnitaryChannel(uc)).unwrap();
        assert!(crate::quantum::max_abs(&(exact.matrix() - res.choi.matrix())) < 1e-12);
        assert!((exact.matrix().trace().re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn dephasing_choi_is_valid_and_imperfect() {
        let ch = DephasingChannel::new([0.3, -0.2, 0.9], 0.2).unwrap();
        let res = process_tomography(&ch).unwrap();
        assert!(res.choi.trace_preservation_error() < 1e-12);
        assert!(res.choi.min_eigenvalue() > -1e-12);
        assert!(res.choi.process_fidelity(&Operator::identity(2).unwrap()).unwrap() < 1.0 - 1e-3);
        let u1 = Operator::diagonal(&[-I, I]).unwrap();
        let exact = ChoiMatrix::from_channel(&UnitaryChannel(u1.clone())).unwrap();
        assert!((exact.process_fidelity(&u1).unwrap() - 1.0).abs() < 1e-14);
    }
}
