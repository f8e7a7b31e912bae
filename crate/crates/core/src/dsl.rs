//! A small expression language for Borel codes.
//!
//! ```text
//! expr := "cyl" "(" bits ")" | "set" "(" bits {"," bits} ")"
//!       | "empty" | "full"
//!       | "union" "(" [expr {"," expr}] ")" | "inter" "(" [expr {"," expr}] ")"
//!       | "compl" "(" expr ")" | "reloc" "(" nat "," expr ")"
//!       | "bigunion" "(" ident "," nat "," nat "," expr ")"
//! nat  := digits | "$" ident
//! ```
//!
//! `bigunion(n, a, b, e)` is the union of `e` with `$n` bound to `a..=b`,
//! expanded at parse time. The grammar is LL(1).

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::borel::{BorelCode, Node};
use crate::cantor::{Bits, ClopenSet};

/// Largest number of instances a single `bigunion` may expand to.
pub const MAX_EXPANSION: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{pos}: expected {}, found {found}", expected.join(" or "))]
    Syntax { pos: Pos, expected: Vec<String>, found: String },
    #[error("{pos}: unbound variable ${name}")]
    Unbound { pos: Pos, name: String },
    #[error("{pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::Unbound { pos, .. } | ParseError::Invalid { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Var(String),
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn show(&self) -> String {
        match self {
            Tok::Word(w) => format!("{w:?}"),
            Tok::Var(v) => format!("\"${v}\""),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::Comma => "\",\"".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let word = |chars: &mut std::iter::Peekable<std::str::Chars>, col: &mut usize| {
            let mut w = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    w.push(d);
                    chars.next();
                    *col += 1;
                } else {
                    break;
                }
            }
            w
        };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '(' | ')' | ',' => {
                chars.next();
                col += 1;
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    _ => Tok::Comma,
                };
                out.push((t, pos));
            }
            '$' => {
                chars.next();
                col += 1;
                let w = word(&mut chars, &mut col);
                if w.is_empty() {
                    return Err(ParseError::Syntax {
                        pos: Pos { line, col },
                        expected: vec!["variable name".into()],
                        found: chars.peek().map(|c| format!("{c:?}")).unwrap_or("end of input".into()),
                    });
                }
                out.push((Tok::Var(w), pos));
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let w = word(&mut chars, &mut col);
                out.push((Tok::Word(w), pos));
            }
            other => {
                return Err(ParseError::Syntax {
                    pos,
                    expected: vec!["expression".into()],
                    found: format!("{other:?}"),
                })
            }
        }
    }
    out.push((Tok::End, Pos { line, col }));
    Ok(out)
}

#[derive(Clone, Debug)]
enum Nat {
    Lit(usize),
    Var(String, Pos),
}

#[derive(Clone, Debug)]
enum Expr {
    Set(Vec<Bits>),
    Empty,
    Full,
    Union(Vec<Expr>),
    Inter(Vec<Expr>),
    Compl(Box<Expr>),
    Reloc(Nat, Box<Expr>),
    Big { var: String, lo: Nat, hi: Nat, body: Box<Expr>, pos: Pos },
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

const HEADS: [&str; 9] = ["cyl", "set", "empty", "full", "union", "inter", "compl", "reloc", "bigunion"];

impl Parser {
    fn peek(&self) -> &(Tok, Pos) {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let (t, pos) = self.peek();
        Err(ParseError::Syntax {
            pos: *pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.show(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if self.peek().0 == want {
            self.bump();
            Ok(())
        } else {
            self.fail(&[&want.show()])
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.peek().clone();
        let Tok::Word(head) = tok else {
            let expected: Vec<String> = HEADS.iter().map(|h| format!("{h:?}")).collect();
            let refs: Vec<&str> = expected.iter().map(String::as_str).collect();
            return self.fail(&refs);
        };
        match head.as_str() {
            "empty" => {
                self.bump();
                Ok(Expr::Empty)
            }
            "full" => {
                self.bump();
                Ok(Expr::Full)
            }
            "cyl" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let b = self.bits(true)?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Set(vec![b]))
            }
            "set" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let mut gens = vec![self.bits(true)?];
                while self.peek().0 == Tok::Comma {
                    self.bump();
                    gens.push(self.bits(true)?);
                }
                self.expect(Tok::RParen)?;
                Ok(Expr::Set(gens))
            }
            "union" | "inter" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let mut args = Vec::new();
                if self.peek().0 != Tok::RParen {
                    args.push(self.expr()?);
                    while self.peek().0 == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                }
                if self.peek().0 != Tok::RParen {
                    return self.fail(&["\",\"", "\")\""]);
                }
                self.bump();
                Ok(if head == "union" { Expr::Union(args) } else { Expr::Inter(args) })
            }
            "compl" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Compl(Box::new(e)))
            }
            "reloc" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let n = self.nat()?;
                self.expect(Tok::Comma)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Reloc(n, Box::new(e)))
            }
            "bigunion" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let var = match self.peek().0.clone() {
                    Tok::Word(w) if w.chars().next().is_some_and(|c| !c.is_ascii_digit()) => {
                        self.bump();
                        w
                    }
                    _ => return self.fail(&["identifier"]),
                };
                self.expect(Tok::Comma)?;
                let lo = self.nat()?;
                self.expect(Tok::Comma)?;
                let hi = self.nat()?;
                self.expect(Tok::Comma)?;
                let body = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Big { var, lo, hi, body: Box::new(body), pos })
            }
            _ => {
                let expected: Vec<String> = HEADS.iter().map(|h| format!("{h:?}")).collect();
                let refs: Vec<&str> = expected.iter().map(String::as_str).collect();
                self.fail(&refs)
            }
        }
    }

    /// A binary string; `allow_empty` accepts `cyl()` for the empty string.
    fn bits(&mut self, allow_empty: bool) -> Result<Bits, ParseError> {
        match self.peek().0.clone() {
            Tok::Word(w) if w.chars().all(|c| c == '0' || c == '1') => {
                self.bump();
                Ok(Bits::from(w.as_str()))
            }
            Tok::RParen if allow_empty => Ok(Bits::empty()),
            _ => self.fail(&["binary string"]),
        }
    }

    fn nat(&mut self) -> Result<Nat, ParseError> {
        let (tok, pos) = self.peek().clone();
        match tok {
            Tok::Word(w) if w.chars().all(|c| c.is_ascii_digit()) => {
                self.bump();
                w.parse()
                    .map(Nat::Lit)
                    .map_err(|_| ParseError::Invalid { pos, msg: format!("number {w} too large") })
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Nat::Var(v, pos))
            }
            _ => self.fail(&["number", "\"$\" variable"]),
        }
    }
}

fn resolve(n: &Nat, env: &BTreeMap<String, usize>) -> Result<usize, ParseError> {
    match n {
        Nat::Lit(v) => Ok(*v),
        Nat::Var(name, pos) => env
            .get(name)
            .copied()
            .ok_or_else(|| ParseError::Unbound { pos: *pos, name: name.clone() }),
    }
}

fn expand(e: &Expr, env: &mut BTreeMap<String, usize>) -> Result<BorelCode, ParseError> {
    Ok(match e {
        Expr::Set(gens) => BorelCode::leaf(ClopenSet::normalize(gens.iter().cloned())),
        Expr::Empty => BorelCode::empty(),
        Expr::Full => BorelCode::full(),
        Expr::Union(args) => BorelCode::union(args.iter().map(|a| expand(a, env)).collect::<Result<_, _>>()?),
        Expr::Inter(args) => BorelCode::inter(args.iter().map(|a| expand(a, env)).collect::<Result<_, _>>()?),
        Expr::Compl(a) => BorelCode::compl(expand(a, env)?),
        Expr::Reloc(n, a) => expand(a, env)?.relocate(resolve(n, env)?),
        Expr::Big { var, lo, hi, body, pos } => {
            let (lo, hi) = (resolve(lo, env)?, resolve(hi, env)?);
            if hi >= lo && hi - lo >= MAX_EXPANSION {
                return Err(ParseError::Invalid {
                    pos: *pos,
                    msg: format!("bigunion expands to more than {MAX_EXPANSION} terms"),
                });
            }
            let saved = env.get(var).copied();
            let mut parts = Vec::new();
            for v in lo..=hi {
                env.insert(var.clone(), v);
                parts.push(expand(body, env)?);
            }
            match saved {
                Some(s) => env.insert(var.clone(), s),
                None => env.remove(var),
            };
            BorelCode::union(parts)
        }
    })
}

pub fn parse(text: &str) -> Result<BorelCode, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let e = p.expr()?;
    if p.peek().0 != Tok::End {
        return p.fail(&["end of input"]);
    }
    expand(&e, &mut BTreeMap::new())
}

/// Canonical text of a code. Child indices and ranks are not part of the
/// surface syntax and are dropped.
pub fn print(c: &BorelCode) -> String {
    let mut s = String::new();
    write_code(c, &mut s);
    s
}

fn write_code(c: &BorelCode, s: &mut String) {
    let list = |name: &str, ch: &crate::borel::Children, s: &mut String| {
        s.push_str(name);
        s.push('(');
        for (k, child) in ch.values().enumerate() {
            if k > 0 {
                s.push(',');
            }
            write_code(child, s);
        }
        s.push(')');
    };
    match c.node() {
        Node::Leaf(set) if set.is_empty() => s.push_str("empty"),
        Node::Leaf(set) if set.is_full() => s.push_str("full"),
        Node::Leaf(set) => {
            let gens = set.generators();
            s.push_str(if gens.len() == 1 { "cyl(" } else { "set(" });
            for (k, g) in gens.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                s.push_str(&g.to_string());
            }
            s.push(')');
        }
        Node::Union(ch) => list("union", ch, s),
        Node::Inter(ch) => list("inter", ch, s),
        Node::Compl(a) => {
            s.push_str("compl(");
            write_code(a, s);
            s.push(')');
        }
    }
}
