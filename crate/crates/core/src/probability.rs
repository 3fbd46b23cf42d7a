//! Probabilities derived from chain and history operators: joint,
//! conditional-next, intermediate-time and two-vector, plus the decoherence
//! and sum-rule diagnostics.
//!
//! Traces of the form `Tr(C† P C)` with a rank-1 initial projector are
//! evaluated as sandwiches `<ψ|C† P C|ψ>`. The `*_by_trace` variants keep the
//! full dense-trace route for cross-checking.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::experiment::Schedule;
use crate::histories::{self, all_histories, chain_operator, enumerate_histories_with, history_ket, History};
use crate::linalg::{Complex, ComplexMatrix, StateVector};
use crate::operators::{Frame, Projector};
use crate::DEFAULT_TOL;

/// `p(ψ, α) = Tr(C_{ψ,α}† C_{ψ,α})`.
pub fn joint_probability(s: &Schedule, h: &History) -> Result<f64> {
    Ok(chain_operator(s, h)?.norm_sqr())
}

/// Joint probability through the dense product and trace.
pub fn joint_probability_by_trace(s: &Schedule, h: &History) -> Result<f64> {
    histories::trace_weight(&histories::chain_matrix(s, h)?)
}

fn sandwich(v: &StateVector, p: &ComplexMatrix) -> Result<f64> {
    Ok(v.inner(&p.apply(v)?)?.re)
}

/// Probability of outcome `p` measured right after the last slot, given the
/// records of `s`: `Tr(C† P C) / Tr(C† C)`.
pub fn conditional_next(s: &Schedule, p: &Projector) -> Result<f64> {
    if p.dim() != s.dim() {
        return Err(Error::DimensionMismatch { left: s.dim(), right: p.dim() });
    }
    let ket = history_ket(s)?;
    let norm = ket.norm_sqr();
    if norm <= DEFAULT_TOL {
        return Err(Error::ZeroNorm { norm });
    }
    Ok(sandwich(&ket, p.matrix())? / norm)
}

pub fn conditional_next_by_trace(s: &Schedule, p: &Projector) -> Result<f64> {
    let c = histories::history_operator(s)?.matrix().clone();
    let norm = c.hs_inner(&c)?.re;
    if norm <= DEFAULT_TOL {
        return Err(Error::ZeroNorm { norm });
    }
    let pc = p.matrix().matmul(&c)?;
    Ok(c.hs_inner(&pc)?.re / norm)
}

/// Weights `Tr(C† C)` of the history operator with slot `slot` fixed to each
/// outcome of its frame in turn (other slots as in `s`).
fn slot_weights(s: &Schedule, slot: usize) -> Result<Vec<f64>> {
    let n = s.slot(slot)?.frame.len();
    (0..n)
        .map(|g| Ok(history_ket(&s.with_record(slot, Some(g))?)?.norm_sqr()))
        .collect()
}

/// Distribution over the outcomes of `slot`, conditioned on everything else
/// in `s` (records and post-selection).
pub fn intermediate_distribution(s: &Schedule, slot: usize) -> Result<Vec<f64>> {
    let weights = slot_weights(s, slot)?;
    let total: f64 = weights.iter().sum();
    if total <= DEFAULT_TOL {
        return Err(Error::ZeroNorm { norm: total });
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// `p(β at slot | rest) = Tr(C†_{α←β} C_{α←β}) / Σ_γ Tr(C†_{α←γ} C_{α←γ})`.
///
/// Slots other than `slot` contribute their recorded outcome, or are summed
/// inside the history operator when unrecorded.
pub fn intermediate_probability(s: &Schedule, slot: usize, beta: usize) -> Result<f64> {
    let dist = intermediate_distribution(s, slot)?;
    dist.get(beta)
        .copied()
        .ok_or_else(|| Error::Argument(format!("outcome {beta} out of range at slot {}", slot + 1)))
}

/// Symmetric pre- and post-selected rule
/// `|<ψ(t1)|P_β|φ(t1)>|² / Σ_γ |<ψ(t1)|P_γ|φ(t1)>|²` with
/// `|ψ(t1)> = U1|ψ>` and `|φ(t1)> = U2†|φ>`.
pub fn two_vector_probability(
    psi: &StateVector,
    u1: &ComplexMatrix,
    frame: &Frame,
    u2: &ComplexMatrix,
    phi: &StateVector,
    beta: usize,
) -> Result<f64> {
    for u in [u1, u2] {
        if !u.is_unitary(DEFAULT_TOL) {
            return Err(Error::Argument("two-vector evolution operators must be unitary".into()));
        }
    }
    if beta >= frame.len() {
        return Err(Error::Argument(format!("outcome {beta} out of range for frame `{}`", frame.label())));
    }
    let forward = u1.apply(psi)?;
    let backward = u2.adjoint().apply(phi)?;
    let weights = frame
        .projectors()
        .iter()
        .map(|p| Ok(forward.inner(&p.matrix().apply(&backward)?)?.norm_sqr()))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = weights.iter().sum();
    if total <= DEFAULT_TOL {
        return Err(Error::ZeroNorm { norm: total });
    }
    Ok(weights[beta] / total)
}

/// Pairwise overlaps of the non-pruned histories of a schedule.
#[derive(Debug, Clone)]
pub struct DecoherenceReport {
    pub histories: Vec<History>,
    /// `gram[a][b] = Tr(C_b P_ψ C_a†)`.
    pub gram: Vec<Vec<Complex>>,
    /// Decoherence condition: `Re gram[a][b] = 0` for all `a ≠ b`.
    pub consistent: bool,
    /// Stronger condition: `gram[a][b] = 0` for all `a ≠ b`.
    pub orthogonal: bool,
    /// Largest `|Tr(C_b P_ψ C_a†) + c.c.|` over distinct pairs.
    pub worst_violation: f64,
}

impl DecoherenceReport {
    pub fn entry(&self, a: &History, b: &History) -> Option<Complex> {
        let i = self.histories.iter().position(|h| h == a)?;
        let j = self.histories.iter().position(|h| h == b)?;
        Some(self.gram[i][j])
    }

    /// The decoherence functional `Tr(C_b P_ψ C_a†) + c.c.` for a pair.
    pub fn interference(&self, a: &History, b: &History) -> Option<f64> {
        self.entry(a, b).map(|z| 2.0 * z.re)
    }
}

pub fn decoherence_report(s: &Schedule) -> Result<DecoherenceReport> {
    decoherence_report_with(s, Execution::default())
}

pub fn decoherence_report_with(s: &Schedule, exec: Execution) -> Result<DecoherenceReport> {
    let chains = enumerate_histories_with(s, exec)?.chains;
    let bra_norm = s.initial().state.norm_sqr();
    let gram: Vec<Vec<Complex>> = exec.map_range(0, chains.len(), |a| {
        chains
            .iter()
            .map(|cb| chains[a].ket().inner(cb.ket()).expect("same dimension") * bra_norm)
            .collect()
    });
    let mut worst_re = 0.0f64;
    let mut worst_abs = 0.0f64;
    for (a, row) in gram.iter().enumerate() {
        for (b, z) in row.iter().enumerate() {
            if a != b {
                worst_re = worst_re.max(z.re.abs());
                worst_abs = worst_abs.max(z.norm());
            }
        }
    }
    Ok(DecoherenceReport {
        histories: chains.into_iter().map(|c| c.history().clone()).collect(),
        gram,
        consistent: worst_re <= DEFAULT_TOL,
        orthogonal: worst_abs <= DEFAULT_TOL,
        worst_violation: 2.0 * worst_re,
    })
}

/// One coarse-grained history of a sum-rule audit.
#[derive(Debug, Clone, PartialEq)]
pub struct SumRuleRow {
    /// Labels at every slot except the audited one.
    pub coarse: Vec<String>,
    /// `Σ_γ p(…, γ, …)` over the audited slot's frame.
    pub lhs: f64,
    /// The joint probability with no measurement at the audited slot.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumRuleAudit {
    pub slot: usize,
    pub rows: Vec<SumRuleRow>,
    pub holds: bool,
}

/// Compares `Σ_γ p(…, γ_slot, …)` with the probability of the same record
/// when slot `slot` carries no measurement (trivial frame).
pub fn sum_rule_audit(s: &Schedule, slot: usize) -> Result<SumRuleAudit> {
    s.ensure_valid()?;
    let fine = s.with_record(slot, None)?;
    let coarse = s.with_frame(slot, Frame::trivial(s.dim()))?;
    let n = fine.slot(slot)?.frame.len();
    let mut rows = Vec::new();
    for h in all_histories(&coarse)? {
        let rhs = joint_probability(&coarse, &h)?;
        let mut lhs = 0.0;
        for g in 0..n {
            let mut outcomes = h.outcomes().to_vec();
            outcomes[slot] = g;
            lhs += joint_probability(&fine, &History::new(&fine, outcomes)?)?;
        }
        let mut labels = h.labels().to_vec();
        labels.remove(slot);
        rows.push(SumRuleRow { coarse: labels, lhs, rhs });
    }
    let holds = rows.iter().all(|r| (r.lhs - r.rhs).abs() <= DEFAULT_TOL);
    Ok(SumRuleAudit { slot, rows, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{BoundaryState, Slot};
    use crate::operators::{
        binary_frame, computational_frame, gate_cnot, gate_h, state_projector, subsystem_frame,
    };

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

    fn box_frame() -> Frame {
        let projectors = ["A", "B", "C"]
            .iter()
            .enumerate()
            .map(|(i, l)| state_projector(&StateVector::basis(3, i).unwrap(), *l).unwrap())
            .collect();
        Frame::new(projectors, "boxes").unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn joint_probabilities() {
        let s = mach_zehnder();
        let h = History::from_labels(&s, &["0", "1"]).unwrap();
        assert!(close(joint_probability(&s, &h).unwrap(), 0.25));
        assert!(close(joint_probability_by_trace(&s, &h).unwrap(), 0.25));

        let t = Schedule::new(
            BoundaryState::new(StateVector::basis(2, 1).unwrap(), "1"),
            vec![Slot::new(gate_h(), Frame::trivial(2))],
            None,
        );
        assert!(close(joint_probability(&t, &History::new(&t, vec![0]).unwrap()).unwrap(), 1.0));
        assert!(joint_probability(&s, &History::new(&entangler(), vec![0, 3]).unwrap()).is_err());
    }

    #[test]
    fn conditional_next_cases() {
        let s = entangler();
        let p11 = computational_frame(2).unwrap().projectors()[3].clone();
        assert!(close(conditional_next(&s, &p11).unwrap(), 0.5));
        assert!(close(conditional_next_by_trace(&s, &p11).unwrap(), 0.5));
        let alice = subsystem_frame(&computational_frame(1).unwrap(), 0, &[2, 2]).unwrap();
        assert!(close(conditional_next(&s, &alice.projectors()[1]).unwrap(), 0.5));

        let mz = mach_zehnder();
        let p1 = computational_frame(1).unwrap().projectors()[1].clone();
        assert!(conditional_next(&mz, &p1).unwrap().abs() < 1e-15);
        assert!(matches!(conditional_next(&mz, &p11), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn conditional_next_on_impossible_record() {
        // Mach-Zehnder with outcome 1 recorded at t2 has zero probability.
        let s = mach_zehnder().with_record(1, Some(1)).unwrap();
        let p0 = computational_frame(1).unwrap().projectors()[0].clone();
        assert!(matches!(conditional_next(&s, &p0), Err(Error::ZeroNorm { .. })));
    }

    #[test]
    fn three_box_intermediate() {
        let a = binary_frame(&state_projector(&StateVector::basis(3, 0).unwrap(), "A").unwrap()).unwrap();
        let s = three_box(a.clone());
        assert!(close(intermediate_probability(&s, 0, 0).unwrap(), 1.0));
        let full = three_box(box_frame());
        for b in 0..3 {
            assert!(close(intermediate_probability(&full, 0, b).unwrap(), 1.0 / 3.0));
        }
        let trivial = three_box(Frame::trivial(3));
        assert!(close(intermediate_probability(&trivial, 0, 0).unwrap(), 1.0));
        assert!(intermediate_probability(&s, 0, 2).is_err());

        let r = 1.0 / 3f64.sqrt();
        let psi = StateVector::from_real(&[r, r, r]).unwrap();
        let phi = StateVector::from_real(&[r, r, -r]).unwrap();
        let id = ComplexMatrix::identity(3);
        assert!(close(two_vector_probability(&psi, &id, &a, &id, &phi, 0).unwrap(), 1.0));
    }

    #[test]
    fn two_vector_projector_matching() {
        // φ = |1>, β picks |1><1|: probability 1 whenever ψ has support there.
        let psi = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let phi = StateVector::basis(2, 1).unwrap();
        let frame = computational_frame(1).unwrap();
        let id = ComplexMatrix::identity(2);
        assert!(close(two_vector_probability(&psi, &id, &frame, &id, &phi, 1).unwrap(), 1.0));
        let bad = ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(two_vector_probability(&psi, &bad, &frame, &id, &phi, 1).is_err());
        let orth = StateVector::basis(2, 0).unwrap();
        let psi1 = StateVector::basis(2, 1).unwrap();
        assert!(matches!(
            two_vector_probability(&psi1, &id, &frame, &id, &orth, 0),
            Err(Error::ZeroNorm { .. })
        ));
    }

    #[test]
    fn decoherence_cases() {
        let r = decoherence_report(&entangler()).unwrap();
        assert_eq!(r.histories.len(), 2);
        assert!(r.consistent && r.orthogonal);

        let s = mach_zehnder();
        let r = decoherence_report(&s).unwrap();
        assert!(!r.consistent);
        let h000 = History::from_labels(&s, &["0", "0"]).unwrap();
        let h010 = History::from_labels(&s, &["1", "0"]).unwrap();
        assert!(close(r.entry(&h000, &h010).unwrap().re, 0.25));
        assert!(close(r.interference(&h000, &h010).unwrap(), 0.5));
        assert!(close(r.worst_violation, 0.5));

        let single = Schedule::new(
            BoundaryState::new(StateVector::basis(2, 0).unwrap(), "0"),
            vec![Slot::new(gate_h(), Frame::trivial(2))],
            None,
        );
        assert!(decoherence_report(&single).unwrap().consistent);
    }

    #[test]
    fn gram_is_hermitian() {
        let r = decoherence_report(&three_box(box_frame()).without_final()).unwrap();
        for (a, row) in r.gram.iter().enumerate() {
            for (b, z) in row.iter().enumerate() {
                assert!((z - r.gram[b][a].conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sum_rules() {
        let audit = sum_rule_audit(&mach_zehnder(), 0).unwrap();
        assert!(!audit.holds);
        let row0 = audit.rows.iter().find(|r| r.coarse == ["0"]).unwrap();
        assert!(close(row0.lhs, 0.5) && close(row0.rhs, 1.0));

        assert!(sum_rule_audit(&entangler(), 0).unwrap().holds);
        assert!(sum_rule_audit(&mach_zehnder(), 1).unwrap().holds);
        assert!(sum_rule_audit(&entangler(), 1).unwrap().holds);
    }
}
