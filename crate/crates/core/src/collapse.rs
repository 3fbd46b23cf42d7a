//! Measurement as left multiplication of the history operator by a projector,
//! `C -> P C`, with the resulting change in history content.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::experiment::Slot;
use crate::histories::{history_operator_with, History, HistoryOperator};
use crate::linalg::ComplexMatrix;
use crate::operators::{Frame, Projector};
use crate::DEFAULT_TOL;

#[derive(Debug, Clone)]
pub struct CollapseResult {
    pub before: HistoryOperator,
    pub after: HistoryOperator,
    /// `Tr(C'† C') / Tr(C† C)`.
    pub probability: f64,
    /// Histories of `before` no longer present after the measurement.
    pub removed: Vec<History>,
    /// Histories present after the measurement but absent before it,
    /// truncated to the slots of `before`.
    pub added: Vec<History>,
}

/// Applies the measurement outcome `p` (a member of `extend_frame`) to `c`.
///
/// The outcome is recorded at the last slot when that slot is unrecorded and
/// carries the same frame; otherwise a new slot with identity evolution and
/// `extend_frame` is appended. The input operator is left untouched.
pub fn collapse(c: &HistoryOperator, p: &Projector, extend_frame: &Frame) -> Result<CollapseResult> {
    collapse_with(c, p, extend_frame, Execution::default())
}

pub fn collapse_with(
    c: &HistoryOperator,
    p: &Projector,
    extend_frame: &Frame,
    exec: Execution,
) -> Result<CollapseResult> {
    let s = c.schedule();
    if extend_frame.dim() != s.dim() {
        return Err(Error::DimensionMismatch { left: s.dim(), right: extend_frame.dim() });
    }
    let outcome = extend_frame.find_projector(p, DEFAULT_TOL).ok_or_else(|| {
        Error::Argument(format!("projector `{}` is not a member of frame `{}`", p.label(), extend_frame.label()))
    })?;
    if s.final_state().is_some() {
        return Err(Error::Argument("cannot measure after a post-selected final state".into()));
    }
    let norm = c.norm_sqr();
    if norm <= DEFAULT_TOL {
        return Err(Error::ZeroNorm { norm });
    }
    let last = s.slots().len() - 1;
    let last_slot = &s.slots()[last];
    let extended = if last_slot.recorded.is_none() && last_slot.frame.same_outcomes(extend_frame, DEFAULT_TOL) {
        s.with_record(last, Some(outcome))?
    } else {
        s.with_slot(Slot::new(ComplexMatrix::identity(s.dim()), extend_frame.clone()).recorded(outcome))
    };
    let after = history_operator_with(&extended, exec)?;
    let probability = after.norm_sqr() / norm;
    let (removed, added) = content_diff(c, &after)?;
    Ok(CollapseResult { before: c.clone(), after, probability, removed, added })
}

/// Collapses `c` on every outcome of `frame`, one result per outcome.
pub fn explore_frame(c: &HistoryOperator, frame: &Frame) -> Result<Vec<CollapseResult>> {
    let exec = Execution::default();
    exec.map_range(0, frame.len(), |i| collapse_with(c, &frame.projectors()[i], frame, Execution::Sequential))
        .into_iter()
        .collect()
}

fn truncated(h: &History, n: usize) -> Vec<String> {
    h.labels()[..n].to_vec()
}

/// Label-sequence differences `(removed, added)` between two history operators,
/// comparing histories truncated to the slots of `before`.
///
/// `after` must extend `before`: same initial state, at least as many slots,
/// matching frames on the common slots, and every record of `before` kept.
pub fn content_diff(before: &HistoryOperator, after: &HistoryOperator) -> Result<(Vec<History>, Vec<History>)> {
    let (sb, sa) = (before.schedule(), after.schedule());
    let n = sb.slots().len();
    let compatible = sa.slots().len() >= n
        && sa.initial().state == sb.initial().state
        && sb.slots().iter().zip(sa.slots()).all(|(x, y)| {
            x.frame.same_outcomes(&y.frame, DEFAULT_TOL) && (x.recorded.is_none() || x.recorded == y.recorded)
        });
    if !compatible {
        return Err(Error::Argument("history operators do not share a schedule prefix".into()));
    }
    let after_set: HashSet<Vec<String>> = after.histories().map(|h| truncated(h, n)).collect();
    let before_set: HashSet<Vec<String>> = before.histories().map(|h| truncated(h, n)).collect();
    let removed = before
        .histories()
        .filter(|h| !after_set.contains(&truncated(h, n)))
        .cloned()
        .collect();
    let mut seen = HashSet::new();
    let mut added = Vec::new();
    for h in after.histories() {
        let key = truncated(h, n);
        if !before_set.contains(&key) && seen.insert(key) {
            added.push(History::new(sb, h.outcomes()[..n].to_vec())?);
        }
    }
    Ok((removed, added))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{BoundaryState, Schedule};
    use crate::histories::history_operator;
    use crate::linalg::StateVector;
    use crate::operators::{computational_frame, gate_cnot, gate_h};

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

    fn paths(hs: &[History], s: &Schedule) -> Vec<String> {
        hs.iter().map(|h| h.path(s)[..h.len() + 1].join("→")).collect()
    }

    #[test]
    fn entangler_history_reduction() {
        let c = history_operator(&entangler()).unwrap();
        let comp = computational_frame(2).unwrap();
        let r = collapse(&c, &comp.projectors()[3], &comp).unwrap();
        assert!((r.probability - 0.5).abs() < 1e-12);
        assert_eq!(r.before.content().len(), 2);
        assert_eq!(r.after.content().len(), 1);
        assert_eq!(paths(&r.removed, c.schedule()), ["00→00→00"]);
        assert!(r.added.is_empty());
        let expected = comp.projectors()[3].matrix() * c.matrix();
        assert!(r.after.matrix().approx_eq(&expected, 1e-12).unwrap());
    }

    #[test]
    fn mach_zehnder_history_restoration() {
        let unmeasured = history_operator(&mach_zehnder()).unwrap();
        let measured = history_operator(&mach_zehnder().with_record(0, Some(0)).unwrap()).unwrap();
        let (_, added) = content_diff(&unmeasured, &measured).unwrap();
        assert_eq!(paths(&added, unmeasured.schedule()), ["0→0→1"]);

        let comp = computational_frame(1).unwrap();
        let r = collapse(&measured, &comp.projectors()[1], &comp).unwrap();
        let surviving: Vec<_> = r.after.histories().map(|h| h.path(r.after.schedule()).join("→")).collect();
        assert_eq!(surviving, ["0→0→1"]);
        let (removed, added) = content_diff(&unmeasured, &r.after).unwrap();
        assert_eq!(paths(&added, unmeasured.schedule()), ["0→0→1"]);
        assert_eq!(removed.len(), 2);
    }

    #[test]
    fn identity_collapse_changes_nothing() {
        let c = history_operator(&entangler()).unwrap();
        let trivial = Frame::trivial(4);
        let r = collapse(&c, &trivial.projectors()[0], &trivial).unwrap();
        assert!((r.probability - 1.0).abs() < 1e-12);
        assert!(r.removed.is_empty() && r.added.is_empty());
        assert_eq!(r.after.schedule().slots().len(), 3);
        assert!(r.after.matrix().approx_eq(c.matrix(), 1e-12).unwrap());
    }

    #[test]
    fn collapse_errors() {
        let c = history_operator(&entangler()).unwrap();
        let comp1 = computational_frame(1).unwrap();
        assert!(collapse(&c, &comp1.projectors()[0], &comp1).is_err());
        let comp = computational_frame(2).unwrap();
        let stranger = crate::operators::Projector::new_unchecked(
            ComplexMatrix::outer(&StateVector::from_real(&[0.5, 0.5, 0.5, 0.5]).unwrap(), &StateVector::from_real(&[0.5, 0.5, 0.5, 0.5]).unwrap()).unwrap(),
            "plus",
        );
        assert!(collapse(&c, &stranger, &comp).is_err());

        let dead = history_operator(&mach_zehnder().with_record(1, Some(1)).unwrap()).unwrap();
        let f = computational_frame(1).unwrap();
        assert!(matches!(collapse(&dead, &f.projectors()[0], &f), Err(Error::ZeroNorm { .. })));
    }

    #[test]
    fn full_frame_probabilities_sum_to_one() {
        let c = history_operator(&entangler()).unwrap();
        let alice = crate::operators::subsystem_frame(&computational_frame(1).unwrap(), 0, &[2, 2]).unwrap();
        let total: f64 = explore_frame(&c, &alice).unwrap().iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incompatible_diff_rejected() {
        let a = history_operator(&entangler()).unwrap();
        let b = history_operator(&mach_zehnder()).unwrap();
        assert!(content_diff(&a, &b).is_err());
    }
}
