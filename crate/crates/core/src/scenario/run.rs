use super::compile::{Action, CompiledQuery, Scenario};
use super::output::{Entry, HistoryRow, Num, QueryResult, Value};
use crate::collapse::collapse;
use crate::error::Result;
use crate::experiment::Schedule;
use crate::histories::{amplitude, history_operator, HistoryOperator};
use crate::linalg::ComplexMatrix;
use crate::probability::{
    conditional_next, decoherence_report, intermediate_distribution, joint_probability, sum_rule_audit,
    two_vector_probability,
};

fn rows(op: &HistoryOperator) -> Vec<HistoryRow> {
    op.content()
        .iter()
        .map(|c| HistoryRow { labels: c.history().path(op.schedule()), weight: Num(c.norm_sqr()) })
        .collect()
}

fn outcome_entries(s: &Schedule, slot: usize, dist: &[f64]) -> Vec<Entry> {
    s.slots()[slot]
        .frame
        .projectors()
        .iter()
        .zip(dist)
        .map(|(p, &x)| Entry::new(p.label(), Value::real(x)))
        .collect()
}

fn unitary_range(s: &Schedule, range: std::ops::Range<usize>) -> ComplexMatrix {
    s.slots()[range]
        .iter()
        .fold(ComplexMatrix::identity(s.dim()), |acc, slot| &slot.unitary * &acc)
}

/// Evaluates one compiled query against the scenario's schedule.
pub fn run_query(s: &Schedule, q: &CompiledQuery) -> Result<QueryResult> {
    let mut r = QueryResult::new(q.text.clone(), q.kind, q.inputs.clone());
    match &q.action {
        Action::Histories => {
            let op = history_operator(s)?;
            r.value = Some(Value::real(op.content().len() as f64));
            r.histories = Some(rows(&op));
        }
        Action::Operator => {
            let op = history_operator(s)?;
            r.value = Some(Value::real(op.norm_sqr()));
            r.matrix = Some(op.matrix().rows().map(|row| row.iter().map(|&z| Value::complex(z)).collect()).collect());
        }
        Action::Joint(h) => r.value = Some(Value::real(joint_probability(s, h)?)),
        Action::Next { projector } => r.value = Some(Value::real(conditional_next(s, projector)?)),
        Action::At { schedule, slot, outcome } => {
            let dist = intermediate_distribution(schedule, *slot)?;
            r.value = Some(Value::real(dist[*outcome]));
            r.values = outcome_entries(schedule, *slot, &dist);
        }
        Action::TwoVector { slot, outcome } => {
            let phi = &s.final_state().expect("checked at compile time").state;
            let u1 = unitary_range(s, 0..slot + 1);
            let u2 = unitary_range(s, slot + 1..s.slots().len());
            let frame = &s.slots()[*slot].frame;
            let dist = (0..frame.len())
                .map(|b| two_vector_probability(&s.initial().state, &u1, frame, &u2, phi, b))
                .collect::<Result<Vec<f64>>>()?;
            r.value = Some(Value::real(dist[*outcome]));
            r.values = outcome_entries(s, *slot, &dist);
        }
        Action::Amplitude(h) => {
            let a = amplitude(s, h)?;
            r.value = Some(Value::complex(a));
            r.values = vec![Entry::new("weight", Value::real(a.norm_sqr()))];
        }
        Action::Consistent => {
            let rep = decoherence_report(s)?;
            r.value = Some(Value::Bool(rep.consistent));
            r.values = vec![
                Entry::new("worst_violation", Value::real(rep.worst_violation)),
                Entry::new("orthogonal", Value::Bool(rep.orthogonal)),
                Entry::new("histories", Value::real(rep.histories.len() as f64)),
            ];
        }
        Action::SumRule(slot) => {
            let audit = sum_rule_audit(s, *slot)?;
            r.value = Some(Value::Bool(audit.holds));
            r.values = audit
                .rows
                .iter()
                .map(|row| Entry {
                    label: row.coarse.join(" → "),
                    value: Value::real(row.lhs),
                    unmeasured: Some(Num(row.rhs)),
                })
                .collect();
        }
        Action::Collapse { projector, frame } => {
            let before = history_operator(s)?;
            let res = collapse(&before, projector, frame)?;
            r.value = Some(Value::real(res.probability));
            r.histories = Some(rows(&res.after));
            r.removed = Some(res.removed.iter().map(|h| h.path(s)).collect());
            r.added = Some(res.added.iter().map(|h| h.path(s)).collect());
        }
    }
    Ok(r)
}

/// Runs every query of `sc` in order, stopping at the first engine error.
pub fn run_scenario(sc: &Scenario) -> std::result::Result<Vec<QueryResult>, (usize, crate::Error)> {
    sc.queries
        .iter()
        .enumerate()
        .map(|(i, q)| run_query(&sc.schedule, q).map_err(|e| (i, e)))
        .collect()
}
