//! Tokenizer and expression parser shared by term and grammar syntax.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(u32),
    Dot,
    Bar2,
    LParen,
    RParen,
    Caret,
    Arrow,
    Colon,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("`{n}`"),
            Tok::Dot => "`.`".into(),
            Tok::Bar2 => "`||`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Colon => "`:`".into(),
        }
    }
}

pub(crate) fn syntax_err(pos: Pos, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

/// Tokenizes `text`, reporting positions relative to `first_line`.
/// `#` starts a comment running to the end of the line.
pub(crate) fn tokenize(text: &str, first_line: usize) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos {
                line: first_line + li,
                col: i + 1,
            };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let tok = match c {
                '.' => Tok::Dot,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '^' => Tok::Caret,
                ':' => Tok::Colon,
                '|' if chars.get(i + 1) == Some(&'|') => {
                    i += 1;
                    Tok::Bar2
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    i += 1;
                    Tok::Arrow
                }
                c if c.is_ascii_digit() => {
                    let start = i;
                    while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                        i += 1;
                    }
                    let digits: String = chars[start..=i].iter().collect();
                    let n = digits
                        .parse()
                        .map_err(|_| syntax_err(pos, format!("number `{digits}` out of range")))?;
                    Tok::Number(n)
                }
                c if is_ident_start(c) => {
                    let start = i;
                    while i + 1 < chars.len() && is_ident_char(chars[i + 1]) {
                        i += 1;
                    }
                    Tok::Ident(chars[start..=i].iter().collect())
                }
                other => return Err(syntax_err(pos, format!("unexpected character `{other}`"))),
            };
            out.push((tok, pos));
            i += 1;
        }
    }
    Ok(out)
}

/// Untyped expression tree: atoms are identifiers with an optional exponent.
#[derive(Debug, Clone)]
pub(crate) enum Expr {
    Atom {
        name: String,
        exp: Option<u32>,
        pos: Pos,
    },
    Serial(Box<Expr>, Box<Expr>),
    Parallel(Box<Expr>, Box<Expr>),
}

pub(crate) struct ExprParser<'a> {
    toks: &'a [(Tok, Pos)],
    i: usize,
    end: Pos,
}

impl<'a> ExprParser<'a> {
    pub fn new(toks: &'a [(Tok, Pos)], end: Pos) -> Self {
        ExprParser { toks, i: 0, end }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|(_, p)| *p).unwrap_or(self.end)
    }

    /// Parses a complete expression and rejects trailing tokens.
    pub fn parse_all(mut self) -> Result<Expr> {
        let e = self.parse_par()?;
        if let Some((t, p)) = self.toks.get(self.i) {
            return Err(syntax_err(*p, format!("unexpected {}", t.describe())));
        }
        Ok(e)
    }

    fn parse_par(&mut self) -> Result<Expr> {
        let mut left = self.parse_ser()?;
        while self.peek() == Some(&Tok::Bar2) {
            self.i += 1;
            let right = self.parse_ser()?;
            left = Expr::Parallel(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_ser(&mut self) -> Result<Expr> {
        let mut left = self.parse_atom()?;
        while self.peek() == Some(&Tok::Dot) {
            self.i += 1;
            let right = self.parse_atom()?;
            left = Expr::Serial(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.toks.get(self.i).map(|(t, _)| t.clone()) {
            Some(Tok::Ident(name)) => {
                self.i += 1;
                let mut exp = None;
                if self.peek() == Some(&Tok::Caret) {
                    self.i += 1;
                    match self.toks.get(self.i) {
                        Some((Tok::Number(n), _)) if *n >= 1 => {
                            exp = Some(*n);
                            self.i += 1;
                        }
                        _ => return Err(syntax_err(self.pos(), "expected a positive exponent")),
                    }
                }
                Ok(Expr::Atom { name, exp, pos })
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let e = self.parse_par()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(syntax_err(self.pos(), "expected `)`"));
                }
                self.i += 1;
                Ok(e)
            }
            Some(t) => Err(syntax_err(pos, format!("unexpected {}", t.describe()))),
            None => Err(syntax_err(pos, "unexpected end of input")),
        }
    }
}

pub(crate) fn end_pos(text: &str, first_line: usize) -> Pos {
    let lines = text.lines().count().max(1);
    let last = text.lines().last().map(|l| l.chars().count()).unwrap_or(0);
    Pos {
        line: first_line + lines - 1,
        col: last + 1,
    }
}
