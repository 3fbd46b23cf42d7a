//! Recursive-descent parser. Errors are collected per statement; after an
//! error the parser skips to the next line and carries on.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::Diagnostic;

/// Words that end an expression or cannot name a definition.
pub const RESERVED: &[&str] = &[
    "dim", "state", "op", "frame", "init", "slot", "final", "query", "unitary", "record", "in", "given", "i", "x",
];

/// Built-in names usable in expressions.
pub const BUILTINS: &[&str] = &["H", "X", "Z", "CNOT", "I", "comp", "lift", "binary", "trivial", "sqrt"];

const CALLS: &[&str] = &["I", "comp", "lift", "binary", "sqrt"];

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

/// Syntax-only parse: no name resolution or dimension checks.
pub fn parse_syntax(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let (toks, mut errors) = tokenize(text);
    let mut p = Parser { toks, at: 0 };
    let mut doc = Document::default();
    loop {
        while p.peek() == &Tok::Newline {
            p.bump();
        }
        if p.peek() == &Tok::Eof {
            break;
        }
        match p.statement() {
            Ok(s) => doc.statements.push(s),
            Err(e) => {
                if !errors.iter().any(|x: &Diagnostic| x.pos.line == e.pos.line) {
                    errors.push(e);
                }
                p.skip_line();
            }
        }
    }
    if errors.is_empty() {
        Ok(doc)
    } else {
        errors.sort_by_key(|e| e.pos);
        Err(errors)
    }
}

pub fn is_identifier(w: &str) -> bool {
    let mut chars = w.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
        && !RESERVED.contains(&w)
}

fn is_number_word(w: &str) -> bool {
    w.starts_with(|c: char| c.is_ascii_digit() || c == '.')
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn skip_line(&mut self) {
        while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
            self.bump();
        }
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        Err(Diagnostic::new(self.pos(), format!("expected {wanted}, found {}", self.peek().describe())))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn word(&mut self, wanted: &str) -> PResult<Spanned<String>> {
        match self.peek().clone() {
            Tok::Word(w) => Ok(Spanned::new(w, self.bump().pos)),
            _ => self.unexpected(wanted),
        }
    }

    fn at_word(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w == kw)
    }

    fn end_of_statement(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline | Tok::Eof => Ok(()),
            _ => self.unexpected("end of line"),
        }
    }

    fn name(&mut self) -> PResult<Spanned<String>> {
        let w = self.word("a name")?;
        if !is_identifier(&w.node) {
            return Err(Diagnostic::new(w.pos, format!("`{}` cannot be used as a name", w.node)));
        }
        if BUILTINS.contains(&w.node.as_str()) {
            return Err(Diagnostic::new(w.pos, format!("`{}` is a built-in and cannot be redefined", w.node)));
        }
        Ok(w)
    }

    fn count(&mut self, what: &str) -> PResult<Spanned<usize>> {
        let w = self.word(what)?;
        match w.node.parse::<usize>() {
            Ok(n) => Ok(Spanned::new(n, w.pos)),
            Err(_) => Err(Diagnostic::new(w.pos, format!("expected {what}, found `{}`", w.node))),
        }
    }

    fn slot_index(&mut self) -> PResult<Spanned<usize>> {
        let n = self.count("a slot number")?;
        if n.node == 0 {
            return Err(Diagnostic::new(n.pos, "slots are numbered from 1"));
        }
        Ok(n)
    }

    fn label(&mut self) -> PResult<Label> {
        match self.peek().clone() {
            Tok::Word(w) => Ok(Spanned::new(w, self.bump().pos)),
            Tok::Ket(k) => Ok(Spanned::new(k, self.bump().pos)),
            _ => self.unexpected("an outcome label"),
        }
    }

    fn labels(&mut self) -> PResult<Vec<Label>> {
        let mut out = Vec::new();
        while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
            out.push(self.label()?);
        }
        if out.is_empty() {
            return self.unexpected("at least one outcome label");
        }
        Ok(out)
    }

    fn statement(&mut self) -> PResult<Spanned<Statement>> {
        let kw = self.word("a statement keyword")?;
        let stmt = match kw.node.as_str() {
            "dim" => Statement::Dim(self.count("a dimension")?.node),
            "state" | "op" | "frame" => {
                let name = self.name()?;
                self.expect(Tok::Eq)?;
                let expr = self.expr()?;
                match kw.node.as_str() {
                    "state" => Statement::State { name, expr },
                    "op" => Statement::Op { name, expr },
                    _ => Statement::Frame { name, expr },
                }
            }
            "init" => Statement::Init(self.expr()?),
            "final" => Statement::Final(self.expr()?),
            "slot" => self.slot(kw.pos)?,
            "query" => Statement::Query(self.query()?),
            other => {
                return Err(Diagnostic::new(kw.pos, format!("unknown statement `{other}`")));
            }
        };
        self.end_of_statement()?;
        Ok(Spanned::new(stmt, kw.pos))
    }

    fn slot(&mut self, start: Pos) -> PResult<Statement> {
        let (mut unitary, mut frame, mut record) = (None, None, None);
        while let Tok::Word(key) = self.peek().clone() {
            let pos = self.bump().pos;
            self.expect(Tok::Eq)?;
            let fresh = match key.as_str() {
                "unitary" => unitary.replace(self.expr()?).is_none(),
                "frame" => frame.replace(self.expr()?).is_none(),
                "record" => record.replace(self.label()?).is_none(),
                _ => return Err(Diagnostic::new(pos, format!("unknown slot field `{key}`"))),
            };
            if !fresh {
                return Err(Diagnostic::new(pos, format!("slot field `{key}` given twice")));
            }
        }
        match (unitary, frame) {
            (Some(unitary), Some(frame)) => Ok(Statement::Slot { unitary, frame, record }),
            (None, _) => Err(Diagnostic::new(start, "slot needs `unitary=`")),
            (_, None) => Err(Diagnostic::new(start, "slot needs `frame=`")),
        }
    }

    fn optional_frame(&mut self) -> PResult<Option<Node>> {
        if self.at_word("in") {
            self.bump();
            Ok(Some(self.expr()?))
        } else {
            Ok(None)
        }
    }

    fn query(&mut self) -> PResult<Query> {
        let kind = self.word("a query kind")?;
        Ok(match kind.node.as_str() {
            "histories" => Query::Histories,
            "operator" => Query::Operator,
            "consistent?" => Query::Consistent,
            "amplitude" => Query::Amplitude(self.labels()?),
            "sumrule" => Query::SumRule(self.slot_index()?),
            "collapse" => {
                let label = self.label()?;
                Query::Collapse { label, frame: self.optional_frame()? }
            }
            "prob" => {
                let sub = self.word("`joint`, `next`, `at` or `twovector`")?;
                match sub.node.as_str() {
                    "joint" => Query::Joint(self.labels()?),
                    "next" => {
                        let label = self.label()?;
                        Query::Next { label, frame: self.optional_frame()? }
                    }
                    "at" => {
                        let slot = self.slot_index()?;
                        let label = self.label()?;
                        let mut given = Vec::new();
                        if self.at_word("given") {
                            self.bump();
                            loop {
                                let s = self.slot_index()?;
                                self.expect(Tok::Eq)?;
                                given.push((s, self.label()?));
                                if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                                    break;
                                }
                            }
                        }
                        Query::At { slot, label, given }
                    }
                    "twovector" => {
                        let slot = self.slot_index()?;
                        Query::TwoVector { slot, label: self.label()? }
                    }
                    other => {
                        return Err(Diagnostic::new(sub.pos, format!("unknown probability query `{other}`")));
                    }
                }
            }
            other => return Err(Diagnostic::new(kind.pos, format!("unknown query `{other}`"))),
        })
    }

    pub fn expr(&mut self) -> PResult<Node> {
        let mut lhs = self.tensor()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.bump().pos;
            let rhs = self.tensor()?;
            lhs = Spanned::new(Expr::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
    }

    fn tensor(&mut self) -> PResult<Node> {
        let mut lhs = self.product()?;
        while self.peek() == &Tok::Tensor {
            let pos = self.bump().pos;
            let rhs = self.product()?;
            lhs = Spanned::new(Expr::Binary(BinOp::Tensor, Box::new(lhs), Box::new(rhs)), pos);
        }
        Ok(lhs)
    }

    /// Whether the next token may start a juxtaposed factor.
    fn starts_factor(&self) -> bool {
        match self.peek() {
            Tok::Ket(_) | Tok::LParen | Tok::LBracket => true,
            Tok::Word(w) if w == "frame" => self.peek_at(1) == &Tok::LBrace,
            Tok::Word(_) if self.peek_at(1) == &Tok::Eq => false,
            Tok::Word(w) => !matches!(w.as_str(), "unitary" | "record" | "in" | "given"),
            _ => false,
        }
    }

    fn product(&mut self) -> PResult<Node> {
        let mut lhs = self.unary()?;
        loop {
            let (op, pos) = match self.peek() {
                Tok::Star => (BinOp::Mul, self.bump().pos),
                Tok::Slash => (BinOp::Div, self.bump().pos),
                _ if self.starts_factor() => (BinOp::Mul, self.pos()),
                _ => return Ok(lhs),
            };
            let rhs = self.unary()?;
            lhs = Spanned::new(Expr::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
    }

    fn unary(&mut self) -> PResult<Node> {
        if self.peek() == &Tok::Minus {
            let pos = self.bump().pos;
            let inner = self.unary()?;
            return Ok(Spanned::new(Expr::Neg(Box::new(inner)), pos));
        }
        self.atom()
    }

    fn list(&mut self, close: Tok) -> PResult<Vec<Node>> {
        let mut items = Vec::new();
        if *self.peek() != close {
            loop {
                items.push(self.expr()?);
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(close)?;
        Ok(items)
    }

    fn atom(&mut self) -> PResult<Node> {
        let pos = self.pos();
        let expr = match self.peek().clone() {
            Tok::Ket(k) => {
                self.bump();
                Expr::Ket(k)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(inner);
            }
            Tok::LBracket => {
                self.bump();
                Expr::List(self.list(Tok::RBracket)?)
            }
            Tok::Word(w) if w == "frame" && self.peek_at(1) == &Tok::LBrace => {
                self.bump();
                self.bump();
                Expr::FrameSet(self.list(Tok::RBrace)?)
            }
            Tok::Word(w) if is_number_word(&w) => {
                self.bump();
                match w.parse::<f64>() {
                    Ok(x) if x.is_finite() => Expr::Number(x),
                    _ => return Err(Diagnostic::new(pos, format!("invalid number `{w}`"))),
                }
            }
            Tok::Word(w) if w == "i" => {
                self.bump();
                Expr::Imag
            }
            Tok::Word(w) if CALLS.contains(&w.as_str()) && self.peek_at(1) == &Tok::LParen => {
                self.bump();
                self.bump();
                Expr::Call(w, self.list(Tok::RParen)?)
            }
            Tok::Word(w) if is_identifier(&w) => {
                self.bump();
                Expr::Ident(w)
            }
            _ => return self.unexpected("an expression"),
        };
        Ok(Spanned::new(expr, pos))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_expr(src: &str) -> Expr {
        let doc = parse_syntax(&format!("init {src}")).unwrap();
        match &doc.statements[0].node {
            Statement::Init(e) => e.node.clone(),
            _ => unreachable!(),
        }
    }

    fn num(x: f64) -> Box<Node> {
        Box::new(Spanned::bare(Expr::Number(x)))
    }

    #[test]
    fn juxtaposition_binds_like_product() {
        let e = one_expr("1/sqrt(2) |00> + |11>");
        let Expr::Binary(BinOp::Add, lhs, _) = e else { panic!("{e:?}") };
        let Expr::Binary(BinOp::Mul, scale, ket) = &lhs.node else { panic!() };
        assert_eq!(ket.node, Expr::Ket("00".into()));
        assert_eq!(
            scale.node,
            Expr::Binary(BinOp::Div, num(1.0), Box::new(Spanned::bare(Expr::Call("sqrt".into(), vec![*num(2.0)]))))
        );
    }

    #[test]
    fn tensor_is_looser_than_product() {
        let e = one_expr("2 H (x) X");
        assert!(matches!(e, Expr::Binary(BinOp::Tensor, ..)));
    }

    #[test]
    fn slot_fields_end_expressions() {
        let doc = parse_syntax("slot unitary=H X frame=comp(1) record=0").unwrap();
        let Statement::Slot { unitary, frame, record } = &doc.statements[0].node else { panic!() };
        assert!(matches!(unitary.node, Expr::Binary(BinOp::Mul, ..)));
        assert_eq!(frame.node, Expr::Call("comp".into(), vec![*num(1.0)]));
        assert_eq!(record.as_ref().unwrap().node, "0");
    }

    #[test]
    fn queries() {
        let doc = parse_syntax("query prob at 1 A given 2=phi\nquery prob next 1 in alice\nquery consistent?").unwrap();
        let Statement::Query(Query::At { slot, label, given }) = &doc.statements[0].node else { panic!() };
        assert_eq!((slot.node, label.node.as_str(), given.len()), (1, "A", 1));
        assert!(matches!(&doc.statements[1].node, Statement::Query(Query::Next { frame: Some(_), .. })));
        assert_eq!(doc.statements[2].node, Statement::Query(Query::Consistent));
    }

    #[test]
    fn errors_recover_per_line() {
        let errs = parse_syntax("dim 2\nstate = |0>\nop H = X\nquery prob sideways 1\nslot unitary=H").unwrap_err();
        let lines: Vec<_> = errs.iter().map(|e| e.pos.line).collect();
        assert_eq!(lines, [2, 3, 4, 5]);
        assert!(errs[1].message.contains("built-in"));
        assert_eq!(errs[0].pos.col, 7);
    }

    #[test]
    fn frame_definition_vs_frame_set() {
        let doc = parse_syntax("frame f = frame{|0>, |1>}").unwrap();
        let Statement::Frame { expr, .. } = &doc.statements[0].node else { panic!() };
        assert!(matches!(&expr.node, Expr::FrameSet(items) if items.len() == 2));
    }
}
