//! Test-only reference code: a textbook project-and-renormalize simulator,
//! a Taylor-series matrix exponential and seeded random schedules.
//!
//! Nothing here calls the engine's chain, history or probability code; only
//! the schedule accessors and raw matrix entries are shared.
#![allow(dead_code)]

use std::collections::BTreeMap;

use histq_core::experiment::{BoundaryState, Schedule, Slot};
use histq_core::linalg::{Complex, ComplexMatrix, StateVector};
use histq_core::operators::{Frame, Projector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Vector = Vec<Complex>;

fn zero() -> Complex {
    Complex::new(0.0, 0.0)
}

pub fn matvec(m: &ComplexMatrix, v: &[Complex]) -> Vector {
    let n = m.dim();
    let a = m.as_slice();
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * v[j]).fold(zero(), |s, x| s + x)).collect()
}

fn norm_sqr(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// One step of a measurement sequence.
#[derive(Debug, Clone)]
pub struct BranchStep {
    pub label: String,
    pub probability: f64,
    pub state: Vector,
}

/// Evolves, projects and renormalizes slot by slot; stops at the first
/// zero-probability branch.
pub fn branch_trace(s: &Schedule, outcomes: &[usize]) -> Vec<BranchStep> {
    let mut state: Vector = s.initial().state.entries().to_vec();
    let mut trace = Vec::new();
    for (slot, &o) in s.slots().iter().zip(outcomes) {
        let evolved = matvec(&slot.unitary, &state);
        let p = &slot.frame.projectors()[o];
        let projected = matvec(p.matrix(), &evolved);
        let prob = norm_sqr(&projected);
        if prob <= 1e-300 {
            trace.push(BranchStep { label: p.label().into(), probability: 0.0, state: projected });
            return trace;
        }
        let scale = 1.0 / prob.sqrt();
        state = projected.iter().map(|z| z * scale).collect();
        trace.push(BranchStep { label: p.label().into(), probability: prob, state: state.clone() });
    }
    trace
}

/// Joint probability of `outcomes` (one per slot), times the post-selection
/// overlap when the schedule has a final state.
pub fn sequential_simulate(s: &Schedule, outcomes: &[usize]) -> f64 {
    let trace = branch_trace(s, outcomes);
    let mut p: f64 = trace.iter().map(|b| b.probability).product();
    if trace.len() < outcomes.len() || p == 0.0 {
        return 0.0;
    }
    if let Some(f) = s.final_state() {
        let last = &trace.last().expect("at least one slot").state;
        let overlap = f.state.entries().iter().zip(last).fold(zero(), |acc, (a, b)| acc + a.conj() * b);
        p *= overlap.norm_sqr();
    }
    p
}

/// Every outcome tuple allowed by the records, with its oracle probability.
pub fn exhaustive_distribution(s: &Schedule) -> Result<BTreeMap<Vec<String>, f64>, String> {
    let sizes: Vec<usize> = s.slots().iter().map(|sl| if sl.recorded.is_some() { 1 } else { sl.frame.len() }).collect();
    let count: u128 = sizes.iter().map(|&n| n as u128).product();
    if count > histq_core::HISTORY_BUDGET as u128 {
        return Err(format!("{count} histories exceed the budget"));
    }
    let mut out = BTreeMap::new();
    for index in 0..count as usize {
        let mut rest = index;
        let mut outcomes = vec![0; sizes.len()];
        for k in (0..sizes.len()).rev() {
            outcomes[k] = rest % sizes[k];
            rest /= sizes[k];
        }
        for (k, sl) in s.slots().iter().enumerate() {
            if let Some(r) = sl.recorded {
                outcomes[k] = r;
            }
        }
        let labels = s.slots().iter().zip(&outcomes).map(|(sl, &o)| sl.frame.projectors()[o].label().to_string()).collect();
        out.insert(labels, sequential_simulate(s, &outcomes));
    }
    Ok(out)
}

/// `exp(-i H t)` by Taylor series with scaling and squaring.
pub fn expm_taylor(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let n = h.dim();
    let a = h.scale(Complex::new(0.0, -t));
    let norm = a.as_slice().iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let a = a.scale(Complex::new(1.0 / 2f64.powi(squarings), 0.0));
    let mut term = ComplexMatrix::identity(n);
    let mut sum = ComplexMatrix::identity(n);
    for k in 1..30 {
        term = (&term * &a).scale(Complex::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(r: &mut impl Rng) -> Complex {
    Complex::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

pub fn random_matrix(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::new(n, (0..n * n).map(|_| random_complex(r)).collect()).unwrap()
}

pub fn random_hermitian(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    let a = random_matrix(r, n);
    (&a + &a.adjoint()).scale(Complex::new(0.5, 0.0))
}

pub fn random_unitary(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    expm_taylor(&random_hermitian(r, n), r.gen_range(0.3..2.5))
}

pub fn random_state(r: &mut impl Rng, n: usize) -> StateVector {
    StateVector::new((0..n).map(|_| random_complex(r)).collect()).unwrap().normalize().unwrap()
}

/// Orthogonal projectors of mixed rank: the columns of a random unitary are
/// dealt into between 1 and `n` nonempty groups.
pub fn random_frame(r: &mut impl Rng, n: usize) -> Frame {
    let v = random_unitary(r, n);
    let groups = r.gen_range(1..=n);
    let mut owner: Vec<usize> = (0..n).map(|j| if j < groups { j } else { r.gen_range(0..groups) }).collect();
    for i in (1..n).rev() {
        owner.swap(i, r.gen_range(0..=i));
    }
    let projectors = (0..groups)
        .map(|g| {
            let mut m = ComplexMatrix::zeros(n);
            for col in (0..n).filter(|&c| owner[c] == g) {
                let ket = StateVector::new((0..n).map(|row| v.get(row, col)).collect()).unwrap();
                m = &m + &ComplexMatrix::outer(&ket, &ket).unwrap();
            }
            Projector::new(m, format!("f{g}")).unwrap()
        })
        .collect();
    Frame::new(projectors, "random").unwrap()
}

/// Dimension 2..=`max_dim`, 1..=`max_slots` slots, optionally a final state.
pub fn random_schedule(seed: u64, max_dim: usize, max_slots: usize, with_final: bool) -> Schedule {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_dim);
    let slots = (0..r.gen_range(1..=max_slots))
        .map(|_| Slot::new(random_unitary(&mut r, n), random_frame(&mut r, n)))
        .collect();
    let final_state = with_final.then(|| BoundaryState::new(random_state(&mut r, n), "phi"));
    Schedule::validated(BoundaryState::new(random_state(&mut r, n), "psi"), slots, final_state)
        .unwrap_or_else(|e| panic!("seed {seed}: random schedule invalid: {e}"))
}

/// Schedules of every shipped scenario.
pub fn golden_schedules() -> Vec<(&'static str, Schedule)> {
    histq_core::scenario::golden_scenarios()
        .into_iter()
        .map(|(name, doc)| (name, histq_core::scenario::compile(&doc).unwrap().schedule))
        .collect()
}
