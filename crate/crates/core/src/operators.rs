//! Projectors, frames (decompositions of the identity) and the named gates.

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};
use crate::DEFAULT_TOL;

/// Hermitian idempotent operator with an outcome label.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    label: String,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if !matrix.is_hermitian(DEFAULT_TOL) {
            return Err(Error::NotProjector { label, reason: "not Hermitian".into() });
        }
        if !matrix.is_idempotent(DEFAULT_TOL) {
            return Err(Error::NotProjector { label, reason: "not idempotent".into() });
        }
        Ok(Self { matrix, label })
    }

    /// Skips the projector checks; [`Frame::violations`] reports any problems.
    pub fn new_unchecked(matrix: ComplexMatrix, label: impl Into<String>) -> Self {
        Self { matrix, label: label.into() }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }
}

/// Ordered set of mutually orthogonal, nonzero projectors summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    dim: usize,
    projectors: Vec<Projector>,
    label: String,
}

impl Frame {
    pub fn new(projectors: Vec<Projector>, label: impl Into<String>) -> Result<Self> {
        let frame = Self::new_unchecked(projectors, label)?;
        let problems = frame.violations(DEFAULT_TOL);
        if let Some(first) = problems.into_iter().next() {
            return Err(Error::InvalidFrame { label: frame.label, reason: first });
        }
        Ok(frame)
    }

    /// Builds the frame without the completeness and orthogonality checks.
    /// Only the projector dimensions must agree.
    pub fn new_unchecked(projectors: Vec<Projector>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let dim = match projectors.first() {
            Some(p) => p.dim(),
            None => return Err(Error::InvalidFrame { label, reason: "no projectors".into() }),
        };
        if let Some(p) = projectors.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: p.dim() });
        }
        Ok(Self { dim, projectors, label })
    }

    /// Every frame invariant that fails at tolerance `tol`, as readable messages.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for p in &self.projectors {
            if !seen.insert(p.label()) {
                out.push(format!("duplicate outcome label `{}`", p.label()));
            }
            if !p.matrix().is_hermitian(tol) {
                out.push(format!("projector `{}` is not Hermitian", p.label()));
            }
            if !p.matrix().is_idempotent(tol) {
                out.push(format!("projector `{}` is not idempotent", p.label()));
            }
            if p.matrix().max_abs() <= tol {
                out.push(format!("projector `{}` is zero", p.label()));
            }
        }
        for (i, a) in self.projectors.iter().enumerate() {
            for b in &self.projectors[i + 1..] {
                if (a.matrix() * b.matrix()).max_abs() > tol {
                    out.push(format!("projectors `{}` and `{}` are not orthogonal", a.label(), b.label()));
                }
            }
        }
        let sum = self
            .projectors
            .iter()
            .skip(1)
            .fold(self.projectors[0].matrix().clone(), |acc, p| &acc + p.matrix());
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(self.dim)).unwrap_or(f64::INFINITY);
        if dev > tol {
            out.push(format!("projectors do not sum to the identity (deviation {dev:.3e})"));
        }
        out
    }

    /// Frame containing only the identity, for times with no measurement alternatives.
    pub fn trivial(dim: usize) -> Self {
        let p = Projector::new_unchecked(ComplexMatrix::identity(dim), "I");
        Self { dim, projectors: vec![p], label: "trivial".into() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Projector> {
        self.projectors.get(index)
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.projectors.iter().position(|p| p.label() == label)
    }

    /// Same outcome labels in the same order with matching matrices.
    pub fn same_outcomes(&self, other: &Frame, tol: f64) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self.projectors.iter().zip(&other.projectors).all(|(a, b)| {
                a.label() == b.label() && a.matrix().approx_eq(b.matrix(), tol).unwrap_or(false)
            })
    }

    /// Index of the member matching `p` by matrix.
    pub fn find_projector(&self, p: &Projector, tol: f64) -> Option<usize> {
        self.projectors
            .iter()
            .position(|q| q.matrix().approx_eq(p.matrix(), tol).unwrap_or(false))
    }
}

pub fn gate_h() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    ComplexMatrix::from_real(2, &[s, s, s, -s]).expect("static gate")
}

pub fn gate_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("static gate")
}

pub fn gate_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("static gate")
}

/// Control on the first (leftmost) qubit.
pub fn gate_cnot() -> ComplexMatrix {
    #[rustfmt::skip]
    let data = [
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 1.0, 0.0,
    ];
    ComplexMatrix::from_real(4, &data).expect("static gate")
}

/// Bitstring of `index` over `num_qubits` bits, most significant first.
pub fn bitstring(index: usize, num_qubits: u32) -> String {
    (0..num_qubits)
        .rev()
        .map(|b| if (index >> b) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Rank-1 projectors on all `2^n` basis states, labelled by bitstring.
pub fn computational_frame(num_qubits: u32) -> Result<Frame> {
    if num_qubits == 0 {
        return Err(Error::Argument("computational frame needs at least one qubit".into()));
    }
    if num_qubits > 12 {
        return Err(Error::Argument(format!("{num_qubits} qubits exceeds the dense size limit")));
    }
    let dim = 1usize << num_qubits;
    let projectors = (0..dim)
        .map(|b| {
            let v = StateVector::basis(dim, b).expect("index in range");
            let m = ComplexMatrix::outer(&v, &v).expect("same dims");
            Projector::new_unchecked(m, bitstring(b, num_qubits))
        })
        .collect();
    Frame::new_unchecked(projectors, format!("comp({num_qubits})"))
}

/// Lifts `frame`, acting on subsystem `position` of a product space with
/// subsystem dimensions `dims`, to the full space: `I ⊗ … ⊗ P ⊗ … ⊗ I`.
pub fn subsystem_frame(frame: &Frame, position: usize, dims: &[usize]) -> Result<Frame> {
    let Some(&local) = dims.get(position) else {
        return Err(Error::Argument(format!(
            "subsystem position {position} out of range for {} subsystems",
            dims.len()
        )));
    };
    if local != frame.dim() {
        return Err(Error::DimensionMismatch { left: frame.dim(), right: local });
    }
    if dims.contains(&0) {
        return Err(Error::EmptyDimension);
    }
    let before: usize = dims[..position].iter().product();
    let after: usize = dims[position + 1..].iter().product();
    let projectors = frame
        .projectors()
        .iter()
        .map(|p| {
            let lifted = ComplexMatrix::identity(before)
                .tensor(p.matrix())
                .tensor(&ComplexMatrix::identity(after));
            Projector::new_unchecked(lifted, p.label())
        })
        .collect();
    let label = if dims.len() == 1 {
        frame.label().to_string()
    } else {
        format!("lift({}, {position})", frame.label())
    };
    Frame::new(projectors, label)
}

/// `|v><v|` for a normalized vector.
pub fn state_projector(v: &StateVector, label: impl Into<String>) -> Result<Projector> {
    if v.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let label = label.into();
    if !v.is_normalized(crate::TOL_NORM) {
        return Err(Error::NotProjector { label, reason: format!("state has norm {}", v.norm()) });
    }
    Ok(Projector::new_unchecked(ComplexMatrix::outer(v, v)?, label))
}

/// `{P, I - P}`, labelled `label` and `~label`.
pub fn binary_frame(p: &Projector) -> Result<Frame> {
    if !p.matrix().is_idempotent(DEFAULT_TOL) || !p.matrix().is_hermitian(DEFAULT_TOL) {
        return Err(Error::NotProjector { label: p.label().into(), reason: "not idempotent".into() });
    }
    let complement = &ComplexMatrix::identity(p.dim()) - p.matrix();
    if complement.max_abs() <= DEFAULT_TOL || p.matrix().max_abs() <= DEFAULT_TOL {
        return Err(Error::InvalidFrame {
            label: format!("binary({})", p.label()),
            reason: "zero projectors are not allowed in a frame".into(),
        });
    }
    let projectors = vec![
        p.clone(),
        Projector::new_unchecked(complement, format!("~{}", p.label())),
    ];
    Frame::new(projectors, format!("binary({})", p.label()))
}
