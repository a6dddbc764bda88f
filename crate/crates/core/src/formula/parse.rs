//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := binder | or
//! binder  := ("mu" | "nu") IDENT "." formula | "fix" "(" NUMBER ")" IDENT "." formula
//! or      := and { ("\/" | "max") and }
//! and     := prefix { ("/\" | "min") prefix }
//! prefix  := "<" IDENT ">" prefix | "[" IDENT "]" prefix | "{" IDENT "}" prefix | atom
//! atom    := IDENT | "(" formula ")" | "if" IDENT "then" formula "else" formula
//! ```
//!
//! Binder bodies extend as far right as possible. Binders are renamed apart
//! while parsing, so every binder in the result has a distinct name.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use super::{is_variable_name, FixKind, Formula};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    Lexical(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("fix parameter {0} is not a number in [0,1]")]
    BadFixParameter(String),
    #[error("binder name `{0}` is not a variable (use an upper-case letter, optionally followed by digits or `_`)")]
    BinderNotVariable(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Mu,
    Nu,
    Fix,
    If,
    Then,
    Else,
    Or,
    And,
    Dot,
    LParen,
    RParen,
    LAngle,
    RAngle,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::Mu => f.write_str("`mu`"),
            Tok::Nu => f.write_str("`nu`"),
            Tok::Fix => f.write_str("`fix`"),
            Tok::If => f.write_str("`if`"),
            Tok::Then => f.write_str("`then`"),
            Tok::Else => f.write_str("`else`"),
            Tok::Or => f.write_str("`\\/`"),
            Tok::And => f.write_str("`/\\`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LAngle => f.write_str("`<`"),
            Tok::RAngle => f.write_str("`>`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, column);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            column += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        let simple = match c {
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '<' => Some(Tok::LAngle),
            '>' => Some(Tok::RAngle),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            _ => None,
        };
        let tok = if let Some(t) = simple {
            advance(1, &mut i);
            t
        } else if c == '\\' && chars.get(i + 1) == Some(&'/') {
            advance(2, &mut i);
            Tok::Or
        } else if c == '/' && chars.get(i + 1) == Some(&'\\') {
            advance(2, &mut i);
            Tok::And
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                advance(1, &mut i);
            }
            Tok::Number(chars[start..i].iter().collect())
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i);
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "mu" => Tok::Mu,
                "nu" => Tok::Nu,
                "fix" => Tok::Fix,
                "if" => Tok::If,
                "then" => Tok::Then,
                "else" => Tok::Else,
                "max" => Tok::Or,
                "min" => Tok::And,
                _ => Tok::Ident(word),
            }
        } else {
            return Err(ParseError {
                line: l0,
                column: c0,
                kind: ParseErrorKind::Lexical(c),
            });
        };
        out.push(Spanned {
            tok,
            line: l0,
            column: c0,
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    scope: Vec<(String, String)>,
    used: HashSet<String>,
}

/// Parses a formula of the full language. Junction sites are numbered and
/// binders renamed apart.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        scope: Vec::new(),
        used: HashSet::new(),
    };
    let f = p.formula()?;
    p.expect(Tok::End, "end of input")?;
    Ok(f.numbered())
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            line: t.line,
            column: t.column,
            kind,
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_here(ParseErrorKind::Unexpected {
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Spanned), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump())),
            _ => Err(self.unexpected(what)),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Mu | Tok::Nu | Tok::Fix => self.binder(),
            _ => self.or(),
        }
    }

    fn binder(&mut self) -> Result<Formula, ParseError> {
        let kind = match self.bump().tok {
            Tok::Mu => FixKind::Mu,
            Tok::Nu => FixKind::Nu,
            Tok::Fix => {
                self.expect(Tok::LParen, "`(`")?;
                let here = self.toks[self.pos].clone();
                let x = match self.bump().tok {
                    Tok::Number(s) => match s.parse::<f64>() {
                        Ok(x) if (0.0..=1.0).contains(&x) => x,
                        _ => {
                            return Err(ParseError {
                                line: here.line,
                                column: here.column,
                                kind: ParseErrorKind::BadFixParameter(s),
                            })
                        }
                    },
                    other => {
                        return Err(ParseError {
                            line: here.line,
                            column: here.column,
                            kind: ParseErrorKind::Unexpected {
                                expected: "number".into(),
                                found: other.to_string(),
                            },
                        })
                    }
                };
                self.expect(Tok::RParen, "`)`")?;
                FixKind::Fix(x)
            }
            _ => unreachable!("binder() called on a non-binder token"),
        };
        let (name, at) = self.ident("variable name")?;
        if !is_variable_name(&name) {
            return Err(ParseError {
                line: at.line,
                column: at.column,
                kind: ParseErrorKind::BinderNotVariable(name),
            });
        }
        self.expect(Tok::Dot, "`.`")?;
        let unique = self.fresh(&name);
        self.scope.push((name, unique.clone()));
        let body = self.formula();
        self.scope.pop();
        Ok(Formula::fixpoint(kind, unique, body?))
    }

    fn fresh(&mut self, name: &str) -> String {
        if self.used.insert(name.to_string()) {
            return name.to_string();
        }
        (1..)
            .map(|i| format!("{name}_{i}"))
            .find(|c| self.used.insert(c.clone()))
            .expect("unbounded search")
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let right = self.and()?;
            left = Formula::max(left, right);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.prefix()?;
        while *self.peek() == Tok::And {
            self.bump();
            let right = self.prefix()?;
            left = Formula::min(left, right);
        }
        Ok(left)
    }

    fn prefix(&mut self) -> Result<Formula, ParseError> {
        let close = match self.peek() {
            Tok::LAngle => Tok::RAngle,
            Tok::LBracket => Tok::RBracket,
            Tok::LBrace => Tok::RBrace,
            _ => return self.atom(),
        };
        let open = self.bump().tok;
        let (name, _) = self.ident("transition symbol")?;
        self.expect(close, "closing delimiter")?;
        let body = self.prefix()?;
        Ok(match open {
            Tok::LAngle => Formula::angelic(name, body),
            Tok::LBracket => Formula::demonic(name, body),
            _ => Formula::modal(name, body),
        })
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                if is_variable_name(&name) {
                    let bound = self
                        .scope
                        .iter()
                        .rev()
                        .find(|(src, _)| *src == name)
                        .map(|(_, u)| u.clone());
                    match bound {
                        Some(u) => {
                            self.bump();
                            Ok(Formula::Var(u))
                        }
                        None => Err(self.error_here(ParseErrorKind::UnboundVariable(name))),
                    }
                } else {
                    self.bump();
                    Ok(Formula::Const(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::If => {
                self.bump();
                let (g, _) = self.ident("predicate symbol")?;
                self.expect(Tok::Then, "`then`")?;
                let then = self.formula()?;
                self.expect(Tok::Else, "`else`")?;
                let otherwise = self.formula()?;
                Ok(Formula::cond(g, then, otherwise))
            }
            Tok::Mu | Tok::Nu | Tok::Fix => Err(self.unexpected("formula (parenthesise nested binders)")),
            _ => Err(self.unexpected("formula")),
        }
    }
}
