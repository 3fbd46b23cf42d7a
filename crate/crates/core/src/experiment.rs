//! Schedules: an initial state, a sequence of evolve-then-measure slots and an
//! optional post-selected final state.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};
use crate::operators::{Frame, Projector};
use crate::{DEFAULT_TOL, TOL_NORM};

/// One time step: `unitary` evolves the system into this slot's time, then
/// `frame` lists the measurement alternatives there.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub unitary: ComplexMatrix,
    pub frame: Frame,
    pub recorded: Option<usize>,
}

impl Slot {
    pub fn new(unitary: ComplexMatrix, frame: Frame) -> Self {
        Self { unitary, frame, recorded: None }
    }

    pub fn recorded(mut self, outcome: usize) -> Self {
        self.recorded = Some(outcome);
        self
    }

    /// Number of outcomes a history may take at this slot.
    pub fn branching(&self) -> usize {
        if self.recorded.is_some() {
            1
        } else {
            self.frame.len()
        }
    }

    pub fn recorded_projector(&self) -> Option<&Projector> {
        self.recorded.and_then(|i| self.frame.get(i))
    }
}

/// A boundary state together with the label used when printing histories.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryState {
    pub state: StateVector,
    pub label: String,
}

impl BoundaryState {
    pub fn new(state: StateVector, label: impl Into<String>) -> Self {
        Self { state, label: label.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    initial: BoundaryState,
    slots: Vec<Slot>,
    final_state: Option<BoundaryState>,
}

/// A failed schedule invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Zero-based slot index, or `None` for schedule-level problems.
    pub slot: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slot {
            Some(i) => write!(f, "slot {}: {}", i + 1, self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl Schedule {
    /// Assembles a schedule without checking it; see [`validate`].
    pub fn new(initial: BoundaryState, slots: Vec<Slot>, final_state: Option<BoundaryState>) -> Self {
        Self { initial, slots, final_state }
    }

    /// Assembles a schedule and fails on the first invariant violation.
    pub fn validated(initial: BoundaryState, slots: Vec<Slot>, final_state: Option<BoundaryState>) -> Result<Self> {
        let s = Self::new(initial, slots, final_state);
        s.ensure_valid()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.initial.state.dim()
    }

    pub fn initial(&self) -> &BoundaryState {
        &self.initial
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot(&self, index: usize) -> Result<&Slot> {
        self.slots
            .get(index)
            .ok_or_else(|| Error::Argument(format!("slot index {index} out of range ({} slots)", self.slots.len())))
    }

    pub fn final_state(&self) -> Option<&BoundaryState> {
        self.final_state.as_ref()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        match validate(self).into_iter().next() {
            Some(v) => Err(Error::InvalidSchedule(v.to_string())),
            None => Ok(()),
        }
    }

    /// Copy with `outcome` recorded at `slot` (replacing any earlier record).
    pub fn with_record(&self, slot: usize, outcome: Option<usize>) -> Result<Self> {
        let target = self.slot(slot)?;
        if let Some(o) = outcome {
            if o >= target.frame.len() {
                return Err(Error::Argument(format!("outcome {o} out of range at slot {}", slot + 1)));
            }
        }
        let mut out = self.clone();
        out.slots[slot].recorded = outcome;
        Ok(out)
    }

    /// Copy with the frame at `slot` replaced (and its record cleared).
    pub fn with_frame(&self, slot: usize, frame: Frame) -> Result<Self> {
        self.slot(slot)?;
        let mut out = self.clone();
        out.slots[slot].frame = frame;
        out.slots[slot].recorded = None;
        Ok(out)
    }

    /// Copy with an extra slot appended after the last one.
    pub fn with_slot(&self, slot: Slot) -> Self {
        let mut out = self.clone();
        out.slots.push(slot);
        out
    }

    pub fn without_final(&self) -> Self {
        let mut out = self.clone();
        out.final_state = None;
        out
    }

    pub fn with_final(&self, final_state: BoundaryState) -> Self {
        let mut out = self.clone();
        out.final_state = Some(final_state);
        out
    }

    /// Number of histories compatible with the records.
    pub fn history_count(&self) -> u128 {
        self.slots.iter().map(|s| s.branching() as u128).product()
    }
}

/// All invariant violations of `s`; empty iff the schedule is valid.
pub fn validate(s: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    let dim = s.dim();
    let schedule_level = |message: String| Violation { slot: None, message };
    if !s.initial.state.is_normalized(TOL_NORM) {
        out.push(schedule_level(format!("initial state has norm {:.12}", s.initial.state.norm())));
    }
    if let Some(f) = &s.final_state {
        if f.state.dim() != dim {
            out.push(schedule_level(format!("final state has dimension {}, expected {dim}", f.state.dim())));
        }
        if !f.state.is_normalized(TOL_NORM) {
            out.push(schedule_level(format!("final state has norm {:.12}", f.state.norm())));
        }
    }
    if s.slots.is_empty() {
        out.push(schedule_level("schedule has no slots".into()));
    }
    for (i, slot) in s.slots.iter().enumerate() {
        let mut push = |message: String| out.push(Violation { slot: Some(i), message });
        if slot.unitary.dim() != dim {
            push(format!("unitary has dimension {}, expected {dim}", slot.unitary.dim()));
        } else if !slot.unitary.is_unitary(DEFAULT_TOL) {
            push("unitary matrix is not unitary".into());
        }
        if slot.frame.dim() != dim {
            push(format!("frame `{}` has dimension {}, expected {dim}", slot.frame.label(), slot.frame.dim()));
        } else {
            for problem in slot.frame.violations(DEFAULT_TOL) {
                push(format!("frame `{}`: {problem}", slot.frame.label()));
            }
        }
        if let Some(r) = slot.recorded {
            if r >= slot.frame.len() {
                push(format!("recorded outcome {r} is not an outcome of frame `{}`", slot.frame.label()));
            }
        }
    }
    out
}

/// Product of the slot unitaries, latest leftmost.
pub fn total_unitary(s: &Schedule) -> Result<ComplexMatrix> {
    s.ensure_valid()?;
    Ok(s.slots
        .iter()
        .fold(ComplexMatrix::identity(s.dim()), |acc, slot| &slot.unitary * &acc))
}
