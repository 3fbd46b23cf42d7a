//! Histories, chain operators and the history operator.
//!
//! Because the initial state enters every chain through the rank-1 projector
//! `|ψ><ψ|`, each chain operator is itself rank one: `C_α = |C_α ψ><ψ|`.
//! Chains are therefore stored as the image ket `C_α |ψ>` plus the initial
//! bra, and the dense matrix is materialized only on request.

use std::fmt;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::experiment::Schedule;
use crate::linalg::{Complex, ComplexMatrix, StateVector, ZERO};
use crate::{DEFAULT_TOL, HISTORY_BUDGET, PRUNE_TOL};

/// One outcome index per slot, with the matching projector labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History {
    outcomes: Vec<usize>,
    labels: Vec<String>,
}

impl History {
    pub fn new(s: &Schedule, outcomes: Vec<usize>) -> Result<Self> {
        if outcomes.len() != s.slots().len() {
            return Err(Error::InvalidHistory(format!(
                "history has {} outcomes for {} slots",
                outcomes.len(),
                s.slots().len()
            )));
        }
        let mut labels = Vec::with_capacity(outcomes.len());
        for (k, (&o, slot)) in outcomes.iter().zip(s.slots()).enumerate() {
            let Some(p) = slot.frame.get(o) else {
                return Err(Error::InvalidHistory(format!(
                    "outcome {o} is not in frame `{}` at slot {}",
                    slot.frame.label(),
                    k + 1
                )));
            };
            if let Some(r) = slot.recorded {
                if r != o {
                    return Err(Error::InvalidHistory(format!(
                        "slot {} recorded `{}` but history has `{}`",
                        k + 1,
                        slot.frame.projectors()[r].label(),
                        p.label()
                    )));
                }
            }
            labels.push(p.label().to_string());
        }
        Ok(Self { outcomes, labels })
    }

    pub fn from_labels<S: AsRef<str>>(s: &Schedule, labels: &[S]) -> Result<Self> {
        if labels.len() != s.slots().len() {
            return Err(Error::InvalidHistory(format!(
                "history has {} labels for {} slots",
                labels.len(),
                s.slots().len()
            )));
        }
        let outcomes = labels
            .iter()
            .zip(s.slots())
            .enumerate()
            .map(|(k, (l, slot))| {
                slot.frame.position(l.as_ref()).ok_or_else(|| {
                    Error::InvalidHistory(format!(
                        "`{}` is not an outcome of frame `{}` at slot {}",
                        l.as_ref(),
                        slot.frame.label(),
                        k + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(s, outcomes)
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Initial label, slot labels, and the final label when post-selected.
    pub fn path(&self, s: &Schedule) -> Vec<String> {
        let mut out = Vec::with_capacity(self.labels.len() + 2);
        out.push(s.initial().label.clone());
        out.extend(self.labels.iter().cloned());
        if let Some(f) = s.final_state() {
            out.push(f.label.clone());
        }
        out
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels.join(" → "))
    }
}

/// `C_α = P_φ P_αn U_n ⋯ P_α1 U_1 P_ψ`, kept in rank-1 form.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOperator {
    history: History,
    ket: StateVector,
    bra: StateVector,
}

impl ChainOperator {
    pub fn history(&self) -> &History {
        &self.history
    }

    /// `C_α |ψ>`.
    pub fn ket(&self) -> &StateVector {
        &self.ket
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.ket, &self.bra).expect("chain ket and bra share a dimension")
    }

    /// `Tr(C† C)` evaluated as `<ψ|C†C|ψ>`.
    pub fn norm_sqr(&self) -> f64 {
        self.ket.norm_sqr() * self.bra.norm_sqr()
    }
}

/// `Tr(C† C)` of a chain, computed through the dense trace.
pub fn weight(c: &ChainOperator) -> Result<f64> {
    trace_weight(&c.matrix())
}

pub(crate) fn trace_weight(m: &ComplexMatrix) -> Result<f64> {
    let tr = m.hs_inner(m)?;
    if tr.im.abs() > DEFAULT_TOL {
        return Err(Error::Consistency(format!("Tr(C†C) has imaginary part {:e}", tr.im)));
    }
    Ok(tr.re)
}

/// Per-slot step matrices `P_α U_k`, shared by every chain of a schedule.
struct Stepper<'a> {
    schedule: &'a Schedule,
    steps: Vec<Vec<ComplexMatrix>>,
}

impl<'a> Stepper<'a> {
    fn new(schedule: &'a Schedule) -> Self {
        let steps = schedule
            .slots()
            .iter()
            .map(|slot| {
                slot.frame
                    .projectors()
                    .iter()
                    .map(|p| p.matrix() * &slot.unitary)
                    .collect()
            })
            .collect();
        Self { schedule, steps }
    }

    /// Applies slots `from..` with the given outcomes to `v`, then the final projector.
    fn run(&self, from: usize, outcomes: &[usize], mut v: Vec<Complex>) -> Vec<Complex> {
        for (k, &o) in outcomes.iter().enumerate().skip(from) {
            v = self.steps[k][o].apply_slice(&v);
        }
        self.project_final(v)
    }

    fn project_final(&self, v: Vec<Complex>) -> Vec<Complex> {
        match self.schedule.final_state() {
            Some(f) => {
                let phi = f.state.entries();
                let overlap: Complex = phi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                phi.iter().map(|a| a * overlap).collect()
            }
            None => v,
        }
    }

    /// `prefix[k]`: the initial state evolved through slots `0..k`, with every
    /// unrecorded frame summed out and recorded ones projected.
    fn summed_prefixes(&self) -> Vec<Vec<Complex>> {
        let mut v = self.schedule.initial().state.entries().to_vec();
        let mut out = vec![v.clone()];
        for (k, slot) in self.schedule.slots().iter().enumerate() {
            v = match slot.recorded {
                Some(r) => self.steps[k][r].apply_slice(&v),
                None => slot.unitary.apply_slice(&v),
            };
            out.push(v.clone());
        }
        out
    }

    fn outcomes_for(&self, mut index: u128) -> Vec<usize> {
        let slots = self.schedule.slots();
        let mut outcomes = vec![0; slots.len()];
        for (k, slot) in slots.iter().enumerate().rev() {
            let b = slot.branching() as u128;
            let digit = (index % b) as usize;
            index /= b;
            outcomes[k] = slot.recorded.unwrap_or(digit);
        }
        outcomes
    }
}

fn check_budget(s: &Schedule) -> Result<usize> {
    let count = s.history_count();
    if count > HISTORY_BUDGET as u128 {
        return Err(Error::BudgetExceeded { requested: count, limit: HISTORY_BUDGET });
    }
    Ok(count as usize)
}

fn to_state(v: Vec<Complex>) -> StateVector {
    StateVector::new(v).expect("finite arithmetic on finite inputs")
}

fn build_chain(s: &Schedule, stepper: &Stepper<'_>, outcomes: Vec<usize>) -> ChainOperator {
    let ket = stepper.run(0, &outcomes, s.initial().state.entries().to_vec());
    let labels = outcomes
        .iter()
        .zip(s.slots())
        .map(|(&o, slot)| slot.frame.projectors()[o].label().to_string())
        .collect();
    ChainOperator {
        history: History { outcomes, labels },
        ket: to_state(ket),
        bra: s.initial().state.clone(),
    }
}

/// Every history compatible with the records, pruned or not, in enumeration order.
pub fn all_histories(s: &Schedule) -> Result<Vec<History>> {
    s.ensure_valid()?;
    let total = check_budget(s)?;
    let stepper = Stepper::new(s);
    (0..total)
        .map(|i| History::new(s, stepper.outcomes_for(i as u128)))
        .collect()
}

/// Dense product `P_φ P_αn U_n ⋯ P_α1 U_1 P_ψ`, multiplied out matrix by matrix.
pub fn chain_matrix(s: &Schedule, h: &History) -> Result<ComplexMatrix> {
    s.ensure_valid()?;
    let h = History::new(s, h.outcomes.clone())?;
    let psi = &s.initial().state;
    let mut m = ComplexMatrix::outer(psi, psi)?;
    for (slot, &o) in s.slots().iter().zip(&h.outcomes) {
        m = slot.unitary.matmul(&m)?;
        m = slot.frame.projectors()[o].matrix().matmul(&m)?;
    }
    if let Some(f) = s.final_state() {
        m = ComplexMatrix::outer(&f.state, &f.state)?.matmul(&m)?;
    }
    Ok(m)
}

pub fn chain_operator(s: &Schedule, h: &History) -> Result<ChainOperator> {
    s.ensure_valid()?;
    let h = History::new(s, h.outcomes.clone())?;
    Ok(build_chain(s, &Stepper::new(s), h.outcomes))
}

/// Chains with weight above the pruning tolerance, in enumeration order.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub chains: Vec<ChainOperator>,
    /// Number of histories compatible with the records, pruned ones included.
    pub total: usize,
    pub pruned: usize,
}

pub fn enumerate_histories(s: &Schedule) -> Result<Enumeration> {
    enumerate_histories_with(s, Execution::default())
}

/// Lexicographic in outcome indices, earliest slot varying slowest.
pub fn enumerate_histories_with(s: &Schedule, exec: Execution) -> Result<Enumeration> {
    s.ensure_valid()?;
    let total = check_budget(s)?;
    let stepper = Stepper::new(s);
    let all = exec.map_range(0, total, |i| build_chain(s, &stepper, stepper.outcomes_for(i as u128)));
    let chains: Vec<_> = all.into_iter().filter(|c| c.norm_sqr() > PRUNE_TOL).collect();
    let pruned = total - chains.len();
    Ok(Enumeration { chains, total, pruned })
}

/// `Σ_α C_α P_ψ` over all histories compatible with the recorded outcomes.
#[derive(Debug, Clone)]
pub struct HistoryOperator {
    schedule: Schedule,
    matrix: ComplexMatrix,
    ket: StateVector,
    content: Vec<ChainOperator>,
    total: usize,
}

impl HistoryOperator {
    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `C |ψ>`.
    pub fn ket(&self) -> &StateVector {
        &self.ket
    }

    /// Surviving histories: nonzero chain weight and not cancelled by
    /// interference (see [`history_operator`]).
    pub fn content(&self) -> &[ChainOperator] {
        &self.content
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// `Tr(C† C)`.
    pub fn norm_sqr(&self) -> f64 {
        self.ket.norm_sqr() * self.schedule.initial().state.norm_sqr()
    }

    pub fn histories(&self) -> impl Iterator<Item = &History> {
        self.content.iter().map(|c| c.history())
    }
}

pub fn history_operator(s: &Schedule) -> Result<HistoryOperator> {
    history_operator_with(s, Execution::default())
}

const CHUNK: usize = 4096;

/// Builds the history operator by summing every compatible chain.
///
/// The content keeps a history when, for every slot `k`, the part of the
/// history operator passing through its outcomes at slots `k..n` (earlier
/// slots summed, or fixed where recorded) has weight above the pruning
/// tolerance. At `k = 1` that part is the chain itself; at later `k` it is
/// zero exactly when the history is cancelled by destructive interference
/// with the histories that differ from it only before `k`.
pub fn history_operator_with(s: &Schedule, exec: Execution) -> Result<HistoryOperator> {
    s.ensure_valid()?;
    let total = check_budget(s)?;
    let stepper = Stepper::new(s);
    let prefixes = stepper.summed_prefixes();
    let mut sum = vec![ZERO; s.dim()];
    let mut content = Vec::new();
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let batch = exec.map_range(start, end, |i| {
            let chain = build_chain(s, &stepper, stepper.outcomes_for(i as u128));
            let survives = chain.norm_sqr() > PRUNE_TOL
                && (1..s.slots().len()).all(|k| {
                    let tail = stepper.run(k, chain.history.outcomes(), prefixes[k].clone());
                    tail.iter().map(|z| z.norm_sqr()).sum::<f64>() > PRUNE_TOL
                });
            (chain, survives)
        });
        for (chain, survives) in batch {
            for (acc, z) in sum.iter_mut().zip(chain.ket.entries()) {
                *acc += z;
            }
            if survives {
                content.push(chain);
            }
        }
        start = end;
    }
    let ket = to_state(sum);
    let matrix = ComplexMatrix::outer(&ket, &s.initial().state)?;
    Ok(HistoryOperator { schedule: s.clone(), matrix, ket, content, total })
}

/// `Σ_α C_α |ψ>` accumulated chain by chain in enumeration order, without
/// building the history content.
pub fn chain_sum_with(s: &Schedule, exec: Execution) -> Result<StateVector> {
    s.ensure_valid()?;
    let total = check_budget(s)?;
    let stepper = Stepper::new(s);
    let mut sum = vec![ZERO; s.dim()];
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let batch = exec.map_range(start, end, |i| {
            stepper.run(0, &stepper.outcomes_for(i as u128), s.initial().state.entries().to_vec())
        });
        for ket in batch {
            for (acc, z) in sum.iter_mut().zip(&ket) {
                *acc += z;
            }
        }
        start = end;
    }
    Ok(to_state(sum))
}

/// `C |ψ>` computed by direct forward evolution, without enumerating histories.
pub fn history_ket(s: &Schedule) -> Result<StateVector> {
    s.ensure_valid()?;
    let stepper = Stepper::new(s);
    let mut prefixes = stepper.summed_prefixes();
    let last = prefixes.pop().expect("at least the initial state");
    Ok(to_state(stepper.project_final(last)))
}

/// Amplitude `A` with `C_{ψ,α,φ} = |φ> A <ψ|`; requires a post-selected final state.
pub fn amplitude(s: &Schedule, h: &History) -> Result<Complex> {
    s.ensure_valid()?;
    let Some(f) = s.final_state() else {
        return Err(Error::Argument("amplitude needs a post-selected final state".into()));
    };
    let h = History::new(s, h.outcomes.clone())?;
    let stepper = Stepper::new(s);
    let mut v = s.initial().state.entries().to_vec();
    for (k, &o) in h.outcomes.iter().enumerate() {
        v = stepper.steps[k][o].apply_slice(&v);
    }
    Ok(f.state.entries().iter().zip(&v).map(|(a, b)| a.conj() * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{total_unitary, BoundaryState, Slot};
    use crate::linalg::ONE;
    use crate::operators::{binary_frame, computational_frame, gate_cnot, gate_h, state_projector, Frame};

    fn entangler() -> Schedule {
        let hi = gate_h().tensor(&ComplexMatrix::identity(2));
        let comp = computational_frame(2).unwrap();
        Schedule::new(
            BoundaryState::new(StateVector::basis(4, 0).unwrap(), "00"),
            vec![Slot::new(hi, comp.clone()), Slot::new(gate_cnot(), comp)],
            None,
        )
    }

    fn mach_zehnder() -> Schedule {
        let comp = computational_frame(1).unwrap();
        Schedule::new(
            BoundaryState::new(StateVector::basis(2, 0).unwrap(), "0"),
            vec![Slot::new(gate_h(), comp.clone()), Slot::new(gate_h(), comp)],
            None,
        )
    }

    fn three_box(frame: Frame) -> Schedule {
        let r = 1.0 / 3f64.sqrt();
        Schedule::new(
            BoundaryState::new(StateVector::from_real(&[r, r, r]).unwrap(), "psi"),
            vec![Slot::new(ComplexMatrix::identity(3), frame)],
            Some(BoundaryState::new(StateVector::from_real(&[r, r, -r]).unwrap(), "phi")),
        )
    }

    fn box_a() -> Frame {
        binary_frame(&state_projector(&StateVector::basis(3, 0).unwrap(), "A").unwrap()).unwrap()
    }

    #[test]
    fn entangler_chain_10_11() {
        let s = entangler();
        let h = History::from_labels(&s, &["10", "11"]).unwrap();
        let c = chain_operator(&s, &h).unwrap();
        let out = c.matrix().apply(&StateVector::basis(4, 0).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.entries()[3].re - r).abs() < 1e-15);
        assert!(out.entries()[..3].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn trivial_frames_give_total_unitary() {
        let s = Schedule::new(
            BoundaryState::new(StateVector::basis(4, 1).unwrap(), "01"),
            vec![
                Slot::new(gate_h().tensor(&gate_h()), Frame::trivial(4)),
                Slot::new(gate_cnot(), Frame::trivial(4)),
            ],
            None,
        );
        let c = chain_operator(&s, &History::new(&s, vec![0, 0]).unwrap()).unwrap();
        let psi = &s.initial().state;
        let expected = total_unitary(&s).unwrap().matmul(&ComplexMatrix::outer(psi, psi).unwrap()).unwrap();
        assert!(c.matrix().approx_eq(&expected, 1e-14).unwrap());
    }

    #[test]
    fn mach_zehnder_cancelled_chain_is_nonzero() {
        let s = mach_zehnder();
        let c = chain_operator(&s, &History::from_labels(&s, &["0", "1"]).unwrap()).unwrap();
        assert!((weight(&c).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn weights() {
        let s = entangler();
        let c = chain_operator(&s, &History::from_labels(&s, &["00", "00"]).unwrap()).unwrap();
        assert!((weight(&c).unwrap() - 0.5).abs() < 1e-15);

        let s = three_box(box_a());
        let c = chain_operator(&s, &History::from_labels(&s, &["~A"]).unwrap()).unwrap();
        assert!(weight(&c).unwrap() < 1e-30);

        let s = mach_zehnder();
        let c = chain_operator(&s, &History::from_labels(&s, &["0", "0"]).unwrap()).unwrap();
        assert!((weight(&c).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn enumeration_counts() {
        let e = enumerate_histories(&entangler()).unwrap();
        let labels: Vec<_> = e.chains.iter().map(|c| c.history().labels().to_vec()).collect();
        assert_eq!(labels, [vec!["00", "00"], vec!["10", "11"]]);
        assert_eq!((e.total, e.pruned), (16, 14));

        let e = enumerate_histories(&mach_zehnder()).unwrap();
        assert_eq!(e.chains.len(), 4);
        assert!(e.chains.iter().all(|c| (c.norm_sqr() - 0.25).abs() < 1e-15));
    }

    #[test]
    fn mach_zehnder_operator_and_content() {
        let op = history_operator(&mach_zehnder()).unwrap();
        let p0 = ComplexMatrix::outer(&StateVector::basis(2, 0).unwrap(), &StateVector::basis(2, 0).unwrap()).unwrap();
        assert!(op.matrix().approx_eq(&p0, 1e-15).unwrap());
        let labels: Vec<_> = op.histories().map(|h| h.to_string()).collect();
        assert_eq!(labels, ["0 → 0", "1 → 0"]);
    }

    #[test]
    fn recorded_outcome_restricts_content() {
        let s = entangler().with_record(1, Some(3)).unwrap();
        let op = history_operator(&s).unwrap();
        assert_eq!(op.content().len(), 1);
        assert_eq!(op.content()[0].history().path(&s), ["00", "10", "11"]);
        let out = op.ket();
        assert!(out.entries()[..3].iter().all(|z| z.norm() < 1e-15));
        assert!(out.entries()[3].norm() > 0.7);
    }

    #[test]
    fn history_ket_matches_sum() {
        for s in [entangler(), mach_zehnder(), three_box(box_a())] {
            let op = history_operator(&s).unwrap();
            let direct = history_ket(&s).unwrap();
            for (a, b) in op.ket().entries().iter().zip(direct.entries()) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn amplitudes() {
        let s = three_box(box_a());
        let a = amplitude(&s, &History::from_labels(&s, &["A"]).unwrap()).unwrap();
        // <φ|P_A|ψ> = (1/√3)(1/√3)
        assert!((a - Complex::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let c = chain_operator(&s, &History::from_labels(&s, &["A"]).unwrap()).unwrap();
        assert!((a.norm_sqr() - c.norm_sqr()).abs() < 1e-15);
        let not_a = amplitude(&s, &History::from_labels(&s, &["~A"]).unwrap()).unwrap();
        assert!(not_a.norm() < 1e-15);

        let v = StateVector::basis(2, 1).unwrap();
        let s = Schedule::new(
            BoundaryState::new(v.clone(), "v"),
            vec![Slot::new(ComplexMatrix::identity(2), Frame::trivial(2))],
            Some(BoundaryState::new(v, "v")),
        );
        let a = amplitude(&s, &History::new(&s, vec![0]).unwrap()).unwrap();
        assert!((a - ONE).norm() < 1e-15);

        assert!(amplitude(&mach_zehnder(), &History::new(&mach_zehnder(), vec![0, 0]).unwrap()).is_err());
    }

    #[test]
    fn invalid_histories() {
        let s = entangler();
        assert!(History::new(&s, vec![0]).is_err());
        assert!(History::new(&s, vec![0, 4]).is_err());
        assert!(History::from_labels(&s, &["00", "zz"]).is_err());
        let recorded = s.with_record(0, Some(2)).unwrap();
        assert!(History::new(&recorded, vec![0, 0]).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let comp = computational_frame(4).unwrap();
        let slots = (0..5).map(|_| Slot::new(ComplexMatrix::identity(16), comp.clone())).collect();
        let s = Schedule::new(BoundaryState::new(StateVector::basis(16, 0).unwrap(), "0"), slots, None);
        assert!(matches!(enumerate_histories(&s), Err(Error::BudgetExceeded { requested: 1048576, .. })));
        assert!(matches!(history_operator(&s), Err(Error::BudgetExceeded { .. })));
    }
}
