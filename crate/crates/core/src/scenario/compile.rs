//! Semantic pass: evaluates definitions, builds the schedule and resolves
//! query labels against the frames they refer to.

use std::collections::HashMap;

use super::ast::*;
use super::render::{render_expr, render_query};
use super::Diagnostic;
use crate::experiment::{validate, BoundaryState, Schedule, Slot};
use crate::histories::History;
use crate::linalg::{Complex, ComplexMatrix, StateVector, I, ONE};
use crate::operators::{
    binary_frame, computational_frame, gate_cnot, gate_h, gate_x, gate_z, state_projector, subsystem_frame, Frame,
    Projector,
};

/// Largest Hilbert-space dimension a document may build.
pub const MAX_DIM: usize = 1024;

#[derive(Debug, Clone)]
enum Value {
    Scalar(Complex),
    Ket(StateVector),
    Matrix(ComplexMatrix),
    Frame(Frame),
    List(Vec<Value>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "a scalar",
            Value::Ket(_) => "a state",
            Value::Matrix(_) => "an operator",
            Value::Frame(_) => "a frame",
            Value::List(_) => "a list",
        }
    }
}

/// `Err(None)` marks an error already reported elsewhere (a failed definition).
type EResult<T> = Result<T, Option<Diagnostic>>;

fn fail<T>(pos: Pos, msg: impl Into<String>) -> EResult<T> {
    Err(Some(Diagnostic::new(pos, msg)))
}

fn engine<T>(pos: Pos, r: crate::Result<T>) -> EResult<T> {
    r.map_err(|e| Some(Diagnostic::new(pos, e.to_string())))
}

/// A query ready to run against the compiled schedule.
#[derive(Debug, Clone)]
pub enum Action {
    Histories,
    Operator,
    Joint(History),
    Next { projector: Projector },
    At { schedule: Schedule, slot: usize, outcome: usize },
    TwoVector { slot: usize, outcome: usize },
    Amplitude(History),
    Consistent,
    SumRule(usize),
    Collapse { projector: Projector, frame: Frame },
}

#[derive(Debug, Clone)]
pub struct CompiledQuery {
    pub pos: Pos,
    /// Canonical query text.
    pub text: String,
    pub kind: &'static str,
    pub inputs: Vec<String>,
    pub action: Action,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub schedule: Schedule,
    pub queries: Vec<CompiledQuery>,
}

struct Compiler {
    dim: usize,
    env: HashMap<String, Option<Value>>,
    errors: Vec<Diagnostic>,
}

/// Label used for a state in frames and history paths: its name, the digits of
/// a bare ket, or else the expression text.
fn state_label(e: &Node) -> String {
    match &e.node {
        Expr::Ident(name) => name.clone(),
        Expr::Ket(k) => k.clone(),
        other => render_expr(other),
    }
}

impl Compiler {
    fn report(&mut self, r: EResult<()>) {
        if let Err(Some(d)) = r {
            self.errors.push(d);
        }
    }

    fn ket(&self, digits: &str, pos: Pos) -> EResult<StateVector> {
        if self.dim.is_power_of_two() && digits.chars().all(|c| c == '0' || c == '1') {
            if digits.len() > 10 {
                return fail(pos, format!("ket |{digits}> exceeds the size limit"));
            }
            let index = usize::from_str_radix(digits, 2).expect("binary digits");
            return engine(pos, StateVector::basis(1 << digits.len(), index));
        }
        match digits.parse::<usize>() {
            Ok(i) if i < self.dim => engine(pos, StateVector::basis(self.dim, i)),
            _ => fail(pos, format!("ket |{digits}> is not a basis state of dimension {}", self.dim)),
        }
    }

    fn eval(&self, e: &Node) -> EResult<Value> {
        let pos = e.pos;
        Ok(match &e.node {
            Expr::Number(x) => Value::Scalar(Complex::new(*x, 0.0)),
            Expr::Imag => Value::Scalar(I),
            Expr::Ket(k) => Value::Ket(self.ket(k, pos)?),
            Expr::Ident(name) => match name.as_str() {
                "H" => Value::Matrix(gate_h()),
                "X" => Value::Matrix(gate_x()),
                "Z" => Value::Matrix(gate_z()),
                "CNOT" => Value::Matrix(gate_cnot()),
                "trivial" => Value::Frame(Frame::trivial(self.dim)),
                _ => match self.env.get(name) {
                    Some(Some(v)) => v.clone(),
                    Some(None) => return Err(None),
                    None => return fail(pos, format!("undefined name `{name}`")),
                },
            },
            Expr::Call(f, args) => self.call(f, args, pos)?,
            Expr::List(items) => Value::List(items.iter().map(|x| self.eval(x)).collect::<EResult<_>>()?),
            Expr::FrameSet(items) => {
                let mut projectors = Vec::new();
                for item in items {
                    let v = self.operand(item)?;
                    let Value::Ket(k) = v else {
                        return fail(item.pos, format!("frame elements must be states, found {}", v.kind()));
                    };
                    projectors.push(engine(item.pos, state_projector(&k, state_label(item)))?);
                }
                Value::Frame(engine(pos, Frame::new(projectors, render_expr(&e.node)))?)
            }
            Expr::Neg(inner) => match self.operand(inner)? {
                Value::Scalar(z) => Value::Scalar(-z),
                Value::Ket(k) => Value::Ket(k.scale(-ONE)),
                Value::Matrix(m) => Value::Matrix(m.scale(-ONE)),
                other => return fail(pos, format!("cannot negate {}", other.kind())),
            },
            Expr::Binary(op, l, r) => {
                let (a, b) = (self.operand(l)?, self.operand(r)?);
                self.binary(*op, a, b, pos)?
            }
        })
    }

    /// Evaluates and settles list literals into matrices or column vectors.
    fn operand(&self, e: &Node) -> EResult<Value> {
        match self.eval(e)? {
            Value::List(items) => self.settle(items, e.pos),
            v => Ok(v),
        }
    }

    fn scalars(&self, items: &[Value], pos: Pos) -> EResult<Vec<Complex>> {
        items
            .iter()
            .map(|v| match v {
                Value::Scalar(z) => Ok(*z),
                other => fail(pos, format!("expected numbers in list, found {}", other.kind())),
            })
            .collect()
    }

    fn settle(&self, items: Vec<Value>, pos: Pos) -> EResult<Value> {
        if items.is_empty() {
            return fail(pos, "empty list");
        }
        if items.iter().all(|v| matches!(v, Value::List(_))) {
            let rows = items
                .iter()
                .map(|v| match v {
                    Value::List(row) => self.scalars(row, pos),
                    _ => unreachable!(),
                })
                .collect::<EResult<Vec<_>>>()?;
            return Ok(Value::Matrix(engine(pos, ComplexMatrix::from_rows(rows))?));
        }
        Ok(Value::Ket(engine(pos, StateVector::new(self.scalars(&items, pos)?))?))
    }

    fn binary(&self, op: BinOp, a: Value, b: Value, pos: Pos) -> EResult<Value> {
        use Value::*;
        let size_ok = |d: usize| if d > MAX_DIM { fail(pos, format!("dimension {d} exceeds the limit {MAX_DIM}")) } else { Ok(()) };
        Ok(match (op, a, b) {
            (BinOp::Add, Scalar(x), Scalar(y)) => Scalar(x + y),
            (BinOp::Sub, Scalar(x), Scalar(y)) => Scalar(x - y),
            (BinOp::Mul, Scalar(x), Scalar(y)) => Scalar(x * y),
            (BinOp::Add | BinOp::Sub, Ket(x), Ket(y)) => {
                let y = if op == BinOp::Sub { y.scale(-ONE) } else { y };
                Ket(engine(pos, x.add(&y))?)
            }
            (BinOp::Add | BinOp::Sub, Matrix(x), Matrix(y)) => {
                if x.dim() != y.dim() {
                    return fail(pos, format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
                }
                Matrix(if op == BinOp::Add { &x + &y } else { &x - &y })
            }
            (BinOp::Mul, Scalar(z), Ket(k)) | (BinOp::Mul, Ket(k), Scalar(z)) => Ket(k.scale(z)),
            (BinOp::Mul, Scalar(z), Matrix(m)) | (BinOp::Mul, Matrix(m), Scalar(z)) => Matrix(m.scale(z)),
            (BinOp::Mul, Matrix(x), Matrix(y)) => Matrix(engine(pos, x.matmul(&y))?),
            (BinOp::Mul, Matrix(m), Ket(k)) => Ket(engine(pos, m.apply(&k))?),
            (BinOp::Div, x, Scalar(z)) => {
                if z.norm() == 0.0 {
                    return fail(pos, "division by zero");
                }
                let inv = ONE / z;
                match x {
                    Scalar(x) => Scalar(x * inv),
                    Ket(k) => Ket(k.scale(inv)),
                    Matrix(m) => Matrix(m.scale(inv)),
                    other => return fail(pos, format!("cannot divide {}", other.kind())),
                }
            }
            (BinOp::Tensor, Ket(x), Ket(y)) => {
                size_ok(x.dim() * y.dim())?;
                Ket(x.tensor(&y))
            }
            (BinOp::Tensor, Matrix(x), Matrix(y)) => {
                size_ok(x.dim() * y.dim())?;
                Matrix(x.tensor(&y))
            }
            (op, a, b) => {
                return fail(pos, format!("cannot apply `{}` to {} and {}", op.symbol(), a.kind(), b.kind()));
            }
        })
    }

    fn arity(&self, f: &str, args: &[Node], n: usize, pos: Pos) -> EResult<()> {
        if args.len() != n {
            return fail(pos, format!("`{f}` takes {n} argument(s), found {}", args.len()));
        }
        Ok(())
    }

    fn count(&self, e: &Node) -> EResult<usize> {
        match self.operand(e)? {
            Value::Scalar(z) if z.im == 0.0 && z.re >= 0.0 && z.re.fract() == 0.0 && z.re <= 1e6 => Ok(z.re as usize),
            other => fail(e.pos, format!("expected a non-negative integer, found {}", other.kind())),
        }
    }

    fn call(&self, f: &str, args: &[Node], pos: Pos) -> EResult<Value> {
        match f {
            "sqrt" => {
                self.arity(f, args, 1, pos)?;
                match self.operand(&args[0])? {
                    Value::Scalar(z) => Ok(Value::Scalar(z.sqrt())),
                    other => fail(args[0].pos, format!("sqrt needs a scalar, found {}", other.kind())),
                }
            }
            "I" => {
                self.arity(f, args, 1, pos)?;
                let n = self.count(&args[0])?;
                if n == 0 || n > MAX_DIM {
                    return fail(args[0].pos, format!("identity dimension must be in 1..={MAX_DIM}"));
                }
                Ok(Value::Matrix(ComplexMatrix::identity(n)))
            }
            "comp" => {
                self.arity(f, args, 1, pos)?;
                let n = self.count(&args[0])?;
                Ok(Value::Frame(engine(args[0].pos, computational_frame(n.min(u32::MAX as usize) as u32))?))
            }
            "binary" => {
                self.arity(f, args, 1, pos)?;
                match self.operand(&args[0])? {
                    Value::Ket(k) => {
                        let p = engine(args[0].pos, state_projector(&k, state_label(&args[0])))?;
                        Ok(Value::Frame(engine(pos, binary_frame(&p))?))
                    }
                    other => fail(args[0].pos, format!("binary needs a state, found {}", other.kind())),
                }
            }
            "lift" => {
                self.arity(f, args, 3, pos)?;
                let frame = match self.operand(&args[0])? {
                    Value::Frame(fr) => fr,
                    other => return fail(args[0].pos, format!("lift needs a frame, found {}", other.kind())),
                };
                let position = self.count(&args[1])?;
                let Expr::List(items) = &args[2].node else {
                    return fail(args[2].pos, "lift needs a list of subsystem dimensions");
                };
                let dims = items.iter().map(|x| self.count(x)).collect::<EResult<Vec<_>>>()?;
                let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
                if total > MAX_DIM {
                    return fail(args[2].pos, format!("dimension {total} exceeds the limit {MAX_DIM}"));
                }
                Ok(Value::Frame(engine(pos, subsystem_frame(&frame, position, &dims))?))
            }
            _ => fail(pos, format!("unknown function `{f}`")),
        }
    }

    fn boundary(&self, e: &Node, what: &str) -> EResult<BoundaryState> {
        match self.operand(e)? {
            Value::Ket(k) if k.dim() == self.dim => Ok(BoundaryState::new(k, state_label(e))),
            Value::Ket(k) => fail(e.pos, format!("{what} state has dimension {}, expected {}", k.dim(), self.dim)),
            other => fail(e.pos, format!("{what} must be a state, found {}", other.kind())),
        }
    }

    fn unitary(&self, e: &Node) -> EResult<ComplexMatrix> {
        match self.operand(e)? {
            Value::Matrix(m) if m.dim() == self.dim => Ok(m),
            Value::Matrix(m) => fail(e.pos, format!("unitary has dimension {}, expected {}", m.dim(), self.dim)),
            other => fail(e.pos, format!("unitary must be an operator, found {}", other.kind())),
        }
    }

    fn frame(&self, e: &Node) -> EResult<Frame> {
        match self.operand(e)? {
            Value::Frame(f) if f.dim() == self.dim => Ok(f),
            Value::Frame(f) => fail(e.pos, format!("frame has dimension {}, expected {}", f.dim(), self.dim)),
            other => fail(e.pos, format!("expected a frame, found {}", other.kind())),
        }
    }
}

fn outcome(frame: &Frame, label: &Label) -> EResult<usize> {
    frame.position(&label.node).ok_or_else(|| {
        let known: Vec<&str> = frame.projectors().iter().map(|p| p.label()).collect();
        Some(Diagnostic::new(
            label.pos,
            format!("`{}` is not an outcome of frame `{}` (outcomes: {})", label.node, frame.label(), known.join(", ")),
        ))
    })
}

fn slot_of(s: &Schedule, slot: &Spanned<usize>) -> EResult<usize> {
    if slot.node == 0 || slot.node > s.slots().len() {
        return fail(slot.pos, format!("slot {} out of range (1..={})", slot.node, s.slots().len()));
    }
    Ok(slot.node - 1)
}

fn history(s: &Schedule, labels: &[Label], pos: Pos) -> EResult<History> {
    if labels.len() != s.slots().len() {
        return fail(pos, format!("expected {} outcome labels, found {}", s.slots().len(), labels.len()));
    }
    let mut outcomes = Vec::new();
    for (slot, l) in s.slots().iter().zip(labels) {
        let o = outcome(&slot.frame, l)?;
        if slot.recorded.is_some_and(|r| r != o) {
            return fail(l.pos, format!("`{}` contradicts the outcome recorded at this slot", l.node));
        }
        outcomes.push(o);
    }
    engine(pos, History::new(s, outcomes))
}

fn names(ls: &[Label]) -> Vec<String> {
    ls.iter().map(|l| l.node.clone()).collect()
}

impl Compiler {
    fn query(&self, q: &Query, pos: Pos, s: &Schedule) -> EResult<CompiledQuery> {
        let last_frame = || s.slots().last().expect("at least one slot").frame.clone();
        let no_final = |what: &str| -> EResult<()> {
            if s.final_state().is_some() {
                return fail(pos, format!("`{what}` is undefined after a post-selected final state"));
            }
            Ok(())
        };
        let (action, inputs) = match q {
            Query::Histories => (Action::Histories, vec![]),
            Query::Operator => (Action::Operator, vec![]),
            Query::Consistent => (Action::Consistent, vec![]),
            Query::Joint(ls) => (Action::Joint(history(s, ls, pos)?), names(ls)),
            Query::Amplitude(ls) => {
                if s.final_state().is_none() {
                    return fail(pos, "`amplitude` needs a final state");
                }
                (Action::Amplitude(history(s, ls, pos)?), names(ls))
            }
            Query::Next { label, frame } | Query::Collapse { label, frame } => {
                let is_next = matches!(q, Query::Next { .. });
                no_final(q.kind())?;
                let frame = match frame {
                    Some(f) => self.frame(f)?,
                    None => last_frame(),
                };
                let projector = frame.projectors()[outcome(&frame, label)?].clone();
                let inputs = vec![label.node.clone(), frame.label().to_string()];
                if is_next {
                    (Action::Next { projector }, inputs)
                } else {
                    (Action::Collapse { projector, frame }, inputs)
                }
            }
            Query::At { slot, label, given } => {
                let k = slot_of(s, slot)?;
                let o = outcome(&s.slots()[k].frame, label)?;
                let mut conditioned = s.clone();
                let mut inputs = vec![slot.node.to_string(), label.node.clone()];
                for (gs, gl) in given {
                    let j = slot_of(s, gs)?;
                    if j == k {
                        return fail(gs.pos, "cannot condition on the queried slot");
                    }
                    let go = outcome(&s.slots()[j].frame, gl)?;
                    if s.slots()[j].recorded.is_some_and(|r| r != go) {
                        return fail(gl.pos, format!("`{}` contradicts the outcome recorded at slot {}", gl.node, gs.node));
                    }
                    conditioned = engine(gs.pos, conditioned.with_record(j, Some(go)))?;
                    inputs.push(format!("{}={}", gs.node, gl.node));
                }
                (Action::At { schedule: conditioned, slot: k, outcome: o }, inputs)
            }
            Query::TwoVector { slot, label } => {
                if s.final_state().is_none() {
                    return fail(pos, "`prob twovector` needs a final state");
                }
                let k = slot_of(s, slot)?;
                let o = outcome(&s.slots()[k].frame, label)?;
                (Action::TwoVector { slot: k, outcome: o }, vec![slot.node.to_string(), label.node.clone()])
            }
            Query::SumRule(slot) => (Action::SumRule(slot_of(s, slot)?), vec![slot.node.to_string()]),
        };
        Ok(CompiledQuery { pos, text: render_query(q), kind: q.kind(), inputs, action })
    }
}

/// Full semantic check of a document.
pub fn compile(doc: &Document) -> Result<Scenario, Vec<Diagnostic>> {
    let mut c = Compiler { dim: 0, env: HashMap::new(), errors: Vec::new() };
    let mut initial: Option<BoundaryState> = None;
    let mut final_state: Option<(Pos, BoundaryState)> = None;
    let mut slots: Vec<(Pos, Slot)> = Vec::new();
    let mut queries = Vec::new();
    let mut init_pos = None;
    let mut failed_slot = false;

    for stmt in &doc.statements {
        let pos = stmt.pos;
        if c.dim == 0 && !matches!(stmt.node, Statement::Dim(_)) {
            c.errors.push(Diagnostic::new(pos, "missing dim declaration"));
            return Err(c.errors);
        }
        match &stmt.node {
            Statement::Dim(n) => {
                if c.dim != 0 {
                    c.errors.push(Diagnostic::new(pos, "duplicate dim declaration"));
                } else if *n == 0 || *n > MAX_DIM {
                    c.errors.push(Diagnostic::new(pos, format!("dimension must be in 1..={MAX_DIM}")));
                    return Err(c.errors);
                } else {
                    c.dim = *n;
                }
            }
            Statement::State { name, expr } | Statement::Op { name, expr } | Statement::Frame { name, expr } => {
                if c.env.contains_key(&name.node) {
                    c.errors.push(Diagnostic::new(name.pos, format!("`{}` is already defined", name.node)));
                    continue;
                }
                let value = c.operand(expr).and_then(|v| {
                    let ok = matches!(
                        (&stmt.node, &v),
                        (Statement::State { .. }, Value::Ket(_))
                            | (Statement::Op { .. }, Value::Matrix(_))
                            | (Statement::Frame { .. }, Value::Frame(_))
                    );
                    if ok {
                        Ok(v)
                    } else {
                        let want = match &stmt.node {
                            Statement::State { .. } => "a state",
                            Statement::Op { .. } => "an operator",
                            _ => "a frame",
                        };
                        fail(expr.pos, format!("`{}` must be {want}, found {}", name.node, v.kind()))
                    }
                });
                match value {
                    Ok(v) => {
                        c.env.insert(name.node.clone(), Some(v));
                    }
                    Err(e) => {
                        c.env.insert(name.node.clone(), None);
                        c.report(Err(e));
                    }
                }
            }
            Statement::Init(e) => {
                if init_pos.is_some() {
                    c.errors.push(Diagnostic::new(pos, "duplicate init declaration"));
                    continue;
                }
                init_pos = Some(pos);
                match c.boundary(e, "initial") {
                    Ok(b) => initial = Some(b),
                    Err(e) => c.report(Err(e)),
                }
            }
            Statement::Final(e) => {
                if final_state.is_some() {
                    c.errors.push(Diagnostic::new(pos, "duplicate final declaration"));
                    continue;
                }
                match c.boundary(e, "final") {
                    Ok(b) => final_state = Some((pos, b)),
                    Err(e) => c.report(Err(e)),
                }
            }
            Statement::Slot { unitary, frame, record } => {
                let built = (|| {
                    let u = c.unitary(unitary)?;
                    let f = c.frame(frame)?;
                    let mut slot = Slot::new(u, f);
                    if let Some(r) = record {
                        let o = outcome(&slot.frame, r)?;
                        slot = slot.recorded(o);
                    }
                    Ok(slot)
                })();
                match built {
                    Ok(slot) => slots.push((pos, slot)),
                    Err(e) => {
                        failed_slot = true;
                        c.report(Err(e));
                    }
                }
            }
            Statement::Query(q) => queries.push((pos, q)),
        }
    }

    if c.dim == 0 {
        let pos = doc.statements.first().map(|s| s.pos).unwrap_or(Pos { line: 1, col: 1 });
        c.errors.push(Diagnostic::new(pos, "missing dim declaration"));
        return Err(c.errors);
    }
    if init_pos.is_none() {
        c.errors.push(Diagnostic::new(Pos { line: 1, col: 1 }, "missing init declaration"));
    }
    if slots.is_empty() && !failed_slot {
        c.errors.push(Diagnostic::new(Pos { line: 1, col: 1 }, "schedule needs at least one slot"));
    }
    let (Some(initial), false, true) = (initial, failed_slot, c.errors.is_empty()) else {
        return Err(sorted(c.errors));
    };

    let slot_pos: Vec<Pos> = slots.iter().map(|(p, _)| *p).collect();
    let final_pos = final_state.as_ref().map(|(p, _)| *p);
    let schedule = Schedule::new(initial, slots.into_iter().map(|(_, s)| s).collect(), final_state.map(|(_, b)| b));
    for v in validate(&schedule) {
        let pos = match v.slot {
            Some(k) => slot_pos[k],
            None if v.message.starts_with("final") => final_pos.unwrap_or_default(),
            None => init_pos.unwrap_or_default(),
        };
        c.errors.push(Diagnostic::new(pos, v.message));
    }
    if !c.errors.is_empty() {
        return Err(sorted(c.errors));
    }

    let mut compiled = Vec::new();
    for (pos, q) in queries {
        match c.query(q, pos, &schedule) {
            Ok(cq) => compiled.push(cq),
            Err(e) => c.report(Err(e)),
        }
    }
    if !c.errors.is_empty() {
        return Err(sorted(c.errors));
    }
    Ok(Scenario { schedule, queries: compiled })
}

fn sorted(mut errors: Vec<Diagnostic>) -> Vec<Diagnostic> {
    errors.sort_by_key(|e| e.pos);
    errors
}
