//! Time-sliced propagation on a finite coordinate grid.
//!
//! Inserting a coordinate frame at every slice time turns the history operator
//! into a finite sum over grid paths `q_start → q_1 → … → q_n`, the discrete
//! counterpart of the Feynman path integral. Only finite grids and finite
//! numbers of slices are computed; the continuum limit, the Lagrangian
//! `L = p q̇ - H` and the action `S(q_0, q_n)` have no discrete counterpart here.
//!
//! Units are arbitrary with ħ = 1.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::experiment::{BoundaryState, Schedule, Slot};
use crate::histories::chain_sum_with;
use crate::linalg::{Complex, ComplexMatrix, StateVector};
use crate::operators::{Frame, Projector};
use crate::DEFAULT_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSystem {
    n_points: usize,
    spacing: f64,
    hamiltonian: ComplexMatrix,
}

impl GridSystem {
    pub fn new(hamiltonian: ComplexMatrix, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Argument(format!("grid spacing must be positive, got {spacing}")));
        }
        if !hamiltonian.is_hermitian(DEFAULT_TOL) {
            return Err(Error::Argument("Hamiltonian is not Hermitian".into()));
        }
        Ok(Self { n_points: hamiltonian.dim(), spacing, hamiltonian })
    }

    /// `H = -(1/2) ∇²` with the periodic three-point Laplacian (m = 1).
    pub fn free_particle(n_points: usize, spacing: f64) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::EmptyDimension);
        }
        let k = 1.0 / (2.0 * spacing * spacing);
        let mut data = vec![Complex::new(0.0, 0.0); n_points * n_points];
        for i in 0..n_points {
            data[i * n_points + i] += 2.0 * k;
            data[i * n_points + (i + 1) % n_points] -= k;
            data[i * n_points + (i + n_points - 1) % n_points] -= k;
        }
        Self::new(ComplexMatrix::new(n_points, data)?, spacing)
    }

    /// Free particle plus `q²/2`, with the grid centred on `q = 0`.
    pub fn harmonic_oscillator(n_points: usize, spacing: f64) -> Result<Self> {
        let free = Self::free_particle(n_points, spacing)?;
        let center = (n_points as f64 - 1.0) / 2.0;
        let potential: Vec<Complex> = (0..n_points)
            .map(|i| {
                let q = (i as f64 - center) * spacing;
                Complex::new(0.5 * q * q, 0.0)
            })
            .collect();
        let h = &free.hamiltonian + &ComplexMatrix::diagonal(&potential)?;
        Self::new(h, spacing)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    fn basis(&self, q: usize) -> Result<StateVector> {
        if q >= self.n_points {
            return Err(Error::Argument(format!("grid index {q} out of range (N = {})", self.n_points)));
        }
        StateVector::basis(self.n_points, q)
    }
}

/// `t0 < t1 < … < tn` with equal steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSlicing {
    t0: f64,
    tn: f64,
    n_slices: usize,
}

impl TimeSlicing {
    pub fn new(t0: f64, tn: f64, n_slices: usize) -> Result<Self> {
        if !(t0.is_finite() && tn.is_finite()) || tn < t0 {
            return Err(Error::Argument(format!("invalid time interval [{t0}, {tn}]")));
        }
        if n_slices == 0 {
            return Err(Error::Argument("at least one time slice is required".into()));
        }
        Ok(Self { t0, tn, n_slices })
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn dt(&self) -> f64 {
        (self.tn - self.t0) / self.n_slices as f64
    }

    pub fn duration(&self) -> f64 {
        self.tn - self.t0
    }
}

fn grid_label(q: usize) -> String {
    format!("q{q}")
}

/// Rank-1 projectors on the grid points, labelled `q0 … q{N-1}`.
pub fn coordinate_frame(g: &GridSystem) -> Frame {
    let projectors = (0..g.n_points)
        .map(|q| {
            let v = StateVector::basis(g.n_points, q).expect("index in range");
            Projector::new_unchecked(ComplexMatrix::outer(&v, &v).expect("same dims"), grid_label(q))
        })
        .collect();
    Frame::new_unchecked(projectors, "coordinates").expect("nonempty frame")
}

/// `exp(-i H dt)`.
pub fn step_unitary(g: &GridSystem, dt: f64) -> Result<ComplexMatrix> {
    if !dt.is_finite() {
        return Err(Error::Argument(format!("time step must be finite, got {dt}")));
    }
    g.hamiltonian.hermitian_exp(dt)
}

/// One slot per time slice, each evolving by `exp(-i H Δt)` and inserting the
/// coordinate frame; initial state `|q_start>`, optionally post-selected on `|q_end>`.
pub fn build_schedule(g: &GridSystem, ts: &TimeSlicing, q_start: usize, q_end: Option<usize>) -> Result<Schedule> {
    let initial = BoundaryState::new(g.basis(q_start)?, grid_label(q_start));
    let final_state = match q_end {
        Some(q) => Some(BoundaryState::new(g.basis(q)?, grid_label(q))),
        None => None,
    };
    let u = step_unitary(g, ts.dt())?;
    let frame = coordinate_frame(g);
    let slots = (0..ts.n_slices).map(|_| Slot::new(u.clone(), frame.clone())).collect();
    Schedule::validated(initial, slots, final_state)
}

/// Probabilities of arriving at every grid point, from the sum over all
/// coordinate paths of the time-sliced history operator.
pub fn propagation_distribution(g: &GridSystem, ts: &TimeSlicing, q_start: usize) -> Result<Vec<f64>> {
    propagation_distribution_with(g, ts, q_start, Execution::default())
}

pub fn propagation_distribution_with(
    g: &GridSystem,
    ts: &TimeSlicing,
    q_start: usize,
    exec: Execution,
) -> Result<Vec<f64>> {
    let s = build_schedule(g, ts, q_start, None)?;
    let ket = chain_sum_with(&s, exec)?;
    let norm = ket.norm_sqr();
    if norm <= DEFAULT_TOL {
        return Err(Error::ZeroNorm { norm });
    }
    Ok(ket.entries().iter().map(|z| z.norm_sqr() / norm).collect())
}

/// `|<q_end| U(tn, t0) |q_start>|²`, evaluated through the path sum.
pub fn propagation_probability(g: &GridSystem, ts: &TimeSlicing, q_start: usize, q_end: usize) -> Result<f64> {
    g.basis(q_end)?;
    Ok(propagation_distribution(g, ts, q_start)?[q_end])
}
