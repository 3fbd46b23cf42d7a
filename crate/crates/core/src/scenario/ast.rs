//! Syntax tree of a scenario document.
//!
//! Every node carries its source position, but positions take no part in
//! equality: two documents are equal when they say the same thing.

use std::fmt;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub node: T,
    pub pos: Pos,
}

impl<T> Spanned<T> {
    pub fn new(node: T, pos: Pos) -> Self {
        Self { node, pos }
    }

    /// Positionless node, for documents built in code.
    pub fn bare(node: T) -> Self {
        Self { node, pos: Pos::default() }
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

pub type Node = Spanned<Expr>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Tensor,
}

impl BinOp {
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Tensor => 2,
            BinOp::Mul | BinOp::Div => 3,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Tensor => "(x)",
        }
    }
}

/// Expressions for scalars, states, operators and frames alike; the kind is
/// settled when the document is compiled.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    /// The imaginary unit `i`.
    Imag,
    /// Digits between `|` and `>`.
    Ket(String),
    Ident(String),
    Call(String, Vec<Node>),
    /// `[a, b, ...]`; a list of lists is a matrix literal.
    List(Vec<Node>),
    /// `frame{a, b, ...}`.
    FrameSet(Vec<Node>),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

impl Expr {
    pub fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Neg(_) => 4,
            _ => 5,
        }
    }
}

/// A measurement outcome named by its projector label.
pub type Label = Spanned<String>;

#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    Histories,
    Operator,
    Joint(Vec<Label>),
    Next { label: Label, frame: Option<Node> },
    /// 1-based slot, with optional extra records `slot=label`.
    At { slot: Spanned<usize>, label: Label, given: Vec<(Spanned<usize>, Label)> },
    TwoVector { slot: Spanned<usize>, label: Label },
    Amplitude(Vec<Label>),
    Consistent,
    SumRule(Spanned<usize>),
    Collapse { label: Label, frame: Option<Node> },
}

impl Query {
    pub fn kind(&self) -> &'static str {
        match self {
            Query::Histories => "histories",
            Query::Operator => "operator",
            Query::Joint(_) => "prob joint",
            Query::Next { .. } => "prob next",
            Query::At { .. } => "prob at",
            Query::TwoVector { .. } => "prob twovector",
            Query::Amplitude(_) => "amplitude",
            Query::Consistent => "consistent?",
            Query::SumRule(_) => "sumrule",
            Query::Collapse { .. } => "collapse",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Dim(usize),
    State { name: Spanned<String>, expr: Node },
    Op { name: Spanned<String>, expr: Node },
    Frame { name: Spanned<String>, expr: Node },
    Init(Node),
    Slot { unitary: Node, frame: Node, record: Option<Label> },
    Final(Node),
    Query(Query),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub statements: Vec<Spanned<Statement>>,
}

impl Document {
    pub fn slot_count(&self) -> usize {
        self.statements.iter().filter(|s| matches!(s.node, Statement::Slot { .. })).count()
    }

    pub fn queries(&self) -> impl Iterator<Item = &Spanned<Statement>> {
        self.statements.iter().filter(|s| matches!(s.node, Statement::Query(_)))
    }
}
