//! Canonical text for documents: one statement per line, single spaces,
//! `*` for every product and the fewest parentheses that parse back to the
//! same tree.

use std::fmt::Write;

use super::ast::*;

pub fn render(doc: &Document) -> String {
    let mut out = String::new();
    for s in &doc.statements {
        out.push_str(&render_statement(&s.node));
        out.push('\n');
    }
    out
}

pub fn render_statement(s: &Statement) -> String {
    match s {
        Statement::Dim(n) => format!("dim {n}"),
        Statement::State { name, expr } => format!("state {} = {}", name.node, render_expr(&expr.node)),
        Statement::Op { name, expr } => format!("op {} = {}", name.node, render_expr(&expr.node)),
        Statement::Frame { name, expr } => format!("frame {} = {}", name.node, render_expr(&expr.node)),
        Statement::Init(e) => format!("init {}", render_expr(&e.node)),
        Statement::Final(e) => format!("final {}", render_expr(&e.node)),
        Statement::Slot { unitary, frame, record } => {
            let mut line = format!("slot unitary={} frame={}", render_expr(&unitary.node), render_expr(&frame.node));
            if let Some(r) = record {
                write!(line, " record={}", r.node).unwrap();
            }
            line
        }
        Statement::Query(q) => format!("query {}", render_query(q)),
    }
}

fn labels(ls: &[Label]) -> String {
    ls.iter().map(|l| l.node.as_str()).collect::<Vec<_>>().join(" ")
}

fn in_frame(frame: &Option<Node>) -> String {
    frame.as_ref().map(|f| format!(" in {}", render_expr(&f.node))).unwrap_or_default()
}

pub fn render_query(q: &Query) -> String {
    match q {
        Query::Histories | Query::Operator | Query::Consistent => q.kind().to_string(),
        Query::Joint(ls) | Query::Amplitude(ls) => format!("{} {}", q.kind(), labels(ls)),
        Query::Next { label, frame } | Query::Collapse { label, frame } => {
            format!("{} {}{}", q.kind(), label.node, in_frame(frame))
        }
        Query::At { slot, label, given } => {
            let mut s = format!("prob at {} {}", slot.node, label.node);
            if !given.is_empty() {
                s.push_str(" given");
                for (k, l) in given {
                    write!(s, " {}={}", k.node, l.node).unwrap();
                }
            }
            s
        }
        Query::TwoVector { slot, label } => format!("prob twovector {} {}", slot.node, label.node),
        Query::SumRule(slot) => format!("sumrule {}", slot.node),
    }
}

fn list(items: &[Node]) -> String {
    items.iter().map(|e| render_expr(&e.node)).collect::<Vec<_>>().join(", ")
}

fn wrapped(e: &Expr, min: u8) -> String {
    if e.precedence() < min {
        format!("({})", render_expr(e))
    } else {
        render_expr(e)
    }
}

pub fn render_expr(e: &Expr) -> String {
    match e {
        Expr::Number(x) => format!("{x}"),
        Expr::Imag => "i".into(),
        Expr::Ket(k) => format!("|{k}>"),
        Expr::Ident(name) => name.clone(),
        Expr::Call(name, args) => format!("{name}({})", list(args)),
        Expr::List(items) => format!("[{}]", list(items)),
        Expr::FrameSet(items) => format!("frame{{{}}}", list(items)),
        Expr::Neg(inner) => format!("-{}", wrapped(&inner.node, 4)),
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            format!("{} {} {}", wrapped(&l.node, p), op.symbol(), wrapped(&r.node, p + 1))
        }
    }
}
