//! Ground disjunctive programs with weak constraints: the fragment of
//! ASP-Core-2 the exporter emits.
//!
//! ```text
//! program    := statement*
//! statement  := head [":-" body] "."
//!             | ":~" body "." "[" int "@" int "]"
//! head       := atom ("v" atom)*
//! body       := literal ("," literal)*
//! literal    := ["not"] atom
//! atom       := name ["(" term ("," term)* ")"]
//! term       := name | "\"" chars "\"" | int
//! ```
//!
//! `%` starts a comment. Names begin with a lowercase letter; variables
//! (uppercase names) are rejected because the subset is ground.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Str(String),
    Int(i64),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) => f.write_str(s),
            Term::Str(s) => write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
            Term::Int(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Self {
            predicate: predicate.to_string(),
            args,
        }
    }

    pub fn signature(&self) -> (&str, usize) {
        (&self.predicate, self.args.len())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub negated: bool,
    pub atom: Atom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    /// More than one atom means a disjunctive head.
    pub head: Vec<Atom>,
    pub body: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakConstraint {
    pub body: Vec<Literal>,
    pub weight: i64,
    pub level: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub weak: Vec<WeakConstraint>,
    /// `% key: value` comment lines, in order.
    pub annotations: Vec<(String, String)>,
}

impl Program {
    pub fn annotation(&self, key: &str) -> Option<&str> {
        self.annotations
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Str(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    If,
    Weak,
    LBracket,
    RBracket,
    At,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
    annotations: Vec<(String, String)>,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line,
            column,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<(Vec<(Tok, usize, usize)>, Vec<(String, String)>), SyntaxError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let (line, column) = (self.line, self.column);
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == '%' {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                if let Some((k, v)) = text[1..].split_once(':') {
                    let k = k.trim();
                    if !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        self.annotations.push((k.to_string(), v.trim().to_string()));
                    }
                }
                continue;
            }
            self.bump();
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '@' => Tok::At,
                ':' => match self.bump() {
                    Some('-') => Tok::If,
                    Some('~') => Tok::Weak,
                    _ => return Err(self.err(line, column, "expected `:-` or `:~`")),
                },
                '"' => {
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            None | Some('\n') => return Err(self.err(line, column, "unterminated string")),
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some(e @ ('"' | '\\')) => s.push(e),
                                _ => return Err(self.err(line, column, "bad escape in string")),
                            },
                            Some(ch) => s.push(ch),
                        }
                    }
                    Tok::Str(s)
                }
                c if c.is_ascii_digit() || c == '-' => {
                    let mut s = String::from(c);
                    while let Some(&d) = self.chars.peek() {
                        if !d.is_ascii_digit() {
                            break;
                        }
                        s.push(d);
                        self.bump();
                    }
                    Tok::Int(
                        s.parse()
                            .map_err(|_| self.err(line, column, format!("bad integer `{s}`")))?,
                    )
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut s = String::from(c);
                    while let Some(&d) = self.chars.peek() {
                        if !(d.is_ascii_alphanumeric() || d == '_') {
                            break;
                        }
                        s.push(d);
                        self.bump();
                    }
                    if c.is_ascii_lowercase() {
                        Tok::Name(s)
                    } else {
                        Tok::Var(s)
                    }
                }
                other => return Err(self.err(line, column, format!("unexpected character `{other}`"))),
            };
            out.push((tok, line, column));
        }
        Ok((out, self.annotations))
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        let (line, column) = self.toks.get(self.pos).map_or(self.end, |t| (t.1, t.2));
        SyntaxError {
            line,
            column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn int(&mut self) -> Result<i64, SyntaxError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected an integer")),
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let t = match self.peek() {
            Some(Tok::Name(s)) => Term::Const(s.clone()),
            Some(Tok::Str(s)) => Term::Str(s.clone()),
            Some(Tok::Int(n)) => Term::Int(*n),
            Some(Tok::Var(v)) => return Err(self.err(format!("variable `{v}` in a ground program"))),
            _ => return Err(self.err("expected a term")),
        };
        self.pos += 1;
        Ok(t)
    }

    fn atom(&mut self) -> Result<Atom, SyntaxError> {
        let predicate = match self.peek() {
            Some(Tok::Name(s)) if s != "not" && s != "v" => s.clone(),
            Some(Tok::Var(v)) => return Err(self.err(format!("variable `{v}` in a ground program"))),
            _ => return Err(self.err("expected an atom")),
        };
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected `,` or `)`")),
                }
            }
        }
        Ok(Atom { predicate, args })
    }

    fn body(&mut self) -> Result<Vec<Literal>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            let negated = matches!(self.peek(), Some(Tok::Name(s)) if s == "not");
            if negated {
                self.pos += 1;
            }
            out.push(Literal {
                negated,
                atom: self.atom()?,
            });
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn program(&mut self, annotations: Vec<(String, String)>) -> Result<Program, SyntaxError> {
        let mut program = Program {
            annotations,
            ..Program::default()
        };
        while self.peek().is_some() {
            if self.peek() == Some(&Tok::Weak) {
                self.pos += 1;
                let body = self.body()?;
                self.expect(Tok::Dot, "`.`")?;
                self.expect(Tok::LBracket, "`[`")?;
                let weight = self.int()?;
                self.expect(Tok::At, "`@`")?;
                let level = self.int()?;
                self.expect(Tok::RBracket, "`]`")?;
                program.weak.push(WeakConstraint { body, weight, level });
                continue;
            }
            let mut head = vec![self.atom()?];
            while matches!(self.peek(), Some(Tok::Name(s)) if s == "v") {
                self.pos += 1;
                head.push(self.atom()?);
            }
            let body = if self.peek() == Some(&Tok::If) {
                self.pos += 1;
                self.body()?
            } else {
                Vec::new()
            };
            self.expect(Tok::Dot, "`.`")?;
            program.rules.push(Rule { head, body });
        }
        Ok(program)
    }
}

/// Parses and checks a ground program.
pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let lexer = Lexer {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
        annotations: Vec::new(),
    };
    let end = (
        text.lines().count().max(1),
        text.lines().last().map_or(1, |l| l.chars().count() + 1),
    );
    let (toks, annotations) = lexer.tokens()?;
    Parser { toks, pos: 0, end }.program(annotations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statements() {
        let p = parse_program(
            "% scale: 6\nsat(g).\nsat(a) v sat(\"B\") :- sat(g).\nlc(s,1,0,-1) :- lc(s,0,0,0), not sat(a).\n:~ lc(s,1,0,-1). [12@1]\n",
        )
        .unwrap();
        assert_eq!(p.rules.len(), 3);
        assert_eq!(p.rules[1].head.len(), 2);
        assert_eq!(p.rules[1].head[1].args[0], Term::Str("B".into()));
        assert!(p.rules[2].body[1].negated);
        assert_eq!(p.weak[0].weight, 12);
        assert_eq!(p.annotation("scale"), Some("6"));
    }

    #[test]
    fn rejects() {
        for bad in ["sat(X).", "sat(a)", "sat(a) :- .", ":~ sat(a). [1]", "Sat(a).", "sat(a,)."] {
            assert!(parse_program(bad).is_err(), "{bad}");
        }
    }
}
