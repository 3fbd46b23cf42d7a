use super::ast::Pos;
use super::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Names, numbers and labels: a run of letters, digits, `_ . ~ ? '`.
    Word(String),
    Ket(String),
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Tensor,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Newline,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Ket(k) => format!("`|{k}>`"),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Tensor => "`(x)`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '~' | '?' | '\'')
}

/// Splits `text` into tokens. Lexical errors are collected and the offending
/// character skipped, so one pass reports every bad character.
pub fn tokenize(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let mut width = 1;
        let tok = match c {
            '\n' => Some(Tok::Newline),
            '#' => {
                while i + width < chars.len() && chars[i + width] != '\n' {
                    width += 1;
                }
                None
            }
            c if c.is_whitespace() => None,
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '⊗' => Some(Tok::Tensor),
            '(' if chars.get(i + 1) == Some(&'x') && chars.get(i + 2) == Some(&')') => {
                width = 3;
                Some(Tok::Tensor)
            }
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            '|' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                match chars.get(j) {
                    Some('>') | Some('⟩') if j > i + 1 => {
                        width = j + 1 - i;
                        Some(Tok::Ket(chars[i + 1..j].iter().collect()))
                    }
                    _ => {
                        errors.push(Diagnostic::new(pos, "malformed ket: expected digits followed by `>`"));
                        width = j - i;
                        None
                    }
                }
            }
            c if is_word_char(c) => {
                while i + width < chars.len() && is_word_char(chars[i + width]) {
                    width += 1;
                }
                Some(Tok::Word(chars[i..i + width].iter().collect()))
            }
            other => {
                errors.push(Diagnostic::new(pos, format!("unexpected character `{other}`")));
                None
            }
        };
        if let Some(tok) = tok {
            tokens.push(Token { tok, pos });
        }
        for &ch in &chars[i..i + width] {
            if ch == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        i += width;
    }
    tokens.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    (tokens, errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).0.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn kets_and_tensors() {
        assert_eq!(
            toks("|01> (x) |1⟩ ⊗ (H)"),
            [
                Tok::Ket("01".into()),
                Tok::Tensor,
                Tok::Ket("1".into()),
                Tok::Tensor,
                Tok::LParen,
                Tok::Word("H".into()),
                Tok::RParen,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_and_comments() {
        let (t, e) = tokenize("dim 2 # two\n  slot");
        assert!(e.is_empty());
        assert_eq!(t[2].tok, Tok::Newline);
        assert_eq!(t[3].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn lexical_errors_are_positioned() {
        let (_, e) = tokenize("state a = |0\nop b = $");
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].pos, Pos { line: 1, col: 11 });
        assert_eq!(e[1].pos, Pos { line: 2, col: 8 });
    }
}
