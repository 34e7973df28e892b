use super::{Code, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    Semi,
    Comma,
    Eq,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(_) => "a string".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub column: usize,
}

/// Tokens of one source line.
#[derive(Debug)]
pub(crate) struct Line<'a> {
    pub file: &'a str,
    pub number: usize,
    pub tokens: Vec<Token>,
    /// Column just past the last character, for "expected ... at end" errors.
    pub end_column: usize,
}

impl<'a> Line<'a> {
    pub fn span(&self, column: usize) -> SourceSpan {
        SourceSpan::new(self.file, self.number, column)
    }
}

/// Splits `text` into lines of tokens. Blank and comment-only lines are
/// dropped. Lexical errors are pushed to `diags`; the offending line is
/// skipped.
pub(crate) fn lex<'a>(file: &'a str, text: &str, diags: &mut Vec<Diagnostic>) -> Vec<Line<'a>> {
    let mut out = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let number = idx + 1;
        match lex_line(raw) {
            Ok(tokens) if tokens.is_empty() => {}
            Ok(tokens) => out.push(Line {
                file,
                number,
                tokens,
                end_column: raw.chars().count() + 1,
            }),
            Err((column, message)) => diags.push(Diagnostic::error(
                Code::Syntax,
                SourceSpan::new(file, number, column),
                message,
            )),
        }
    }
    out
}

fn lex_line(line: &str) -> Result<Vec<Token>, (usize, String)> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let single = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            tokens.push(Token { tok, column });
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                return Err((column, "identifiers cannot start with a digit".into()));
            }
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse::<i64>()
                .map_err(|_| (column, format!("integer `{text}` is out of range")))?;
            tokens.push(Token {
                tok: Tok::Int(n),
                column,
            });
            continue;
        }
        if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err((column, "unterminated string".into())),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            _ => return Err((i + 1, "unknown escape sequence".into())),
                        }
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            tokens.push(Token {
                tok: Tok::Str(s),
                column,
            });
            continue;
        }
        return Err((column, format!("unexpected character `{}`", c.escape_debug())));
    }
    Ok(tokens)
}

/// Cursor over the tokens of one line.
pub(crate) struct Cursor<'l, 'a> {
    pub line: &'l Line<'a>,
    pos: usize,
}

impl<'l, 'a> Cursor<'l, 'a> {
    pub fn new(line: &'l Line<'a>) -> Self {
        Self { line, pos: 0 }
    }

    pub fn peek(&self) -> Option<&'l Token> {
        self.line.tokens.get(self.pos)
    }

    pub fn next(&mut self) -> Option<&'l Token> {
        let t = self.line.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.line.tokens.len()
    }

    /// Span of the next token, or of the end of line.
    pub fn here(&self) -> SourceSpan {
        self.line
            .span(self.peek().map_or(self.line.end_column, |t| t.column))
    }

    pub fn error(&self, expected: &str) -> Diagnostic {
        let found = self
            .peek()
            .map_or_else(|| "end of line".to_string(), |t| t.tok.describe());
        Diagnostic::error(Code::Syntax, self.here(), format!("expected {expected}, found {found}"))
    }

    pub fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), Diagnostic> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s),
                column,
            }) => {
                let span = self.line.span(*column);
                self.pos += 1;
                Ok((s.clone(), span))
            }
            _ => Err(self.error(what)),
        }
    }

    pub fn keyword(&mut self, kw: &str) -> Result<SourceSpan, Diagnostic> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s),
                column,
            }) if s == kw => {
                let span = self.line.span(*column);
                self.pos += 1;
                Ok(span)
            }
            _ => Err(self.error(&format!("`{kw}`"))),
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == kw)
    }

    pub fn punct(&mut self, want: Tok) -> Result<SourceSpan, Diagnostic> {
        match self.peek() {
            Some(t) if t.tok == want => {
                let span = self.line.span(t.column);
                self.pos += 1;
                Ok(span)
            }
            _ => Err(self.error(&want.describe())),
        }
    }

    pub fn is_punct(&self, want: &Tok) -> bool {
        self.peek().is_some_and(|t| &t.tok == want)
    }

    pub fn end(&self) -> Result<(), Diagnostic> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("end of line"))
        }
    }

    /// `{ ident+ }` (whitespace separated) or `{ ident (, ident)* }` when
    /// `commas` is set.
    pub fn ident_block(&mut self, what: &str, commas: bool) -> Result<Vec<(String, SourceSpan)>, Diagnostic> {
        self.punct(Tok::LBrace)?;
        let mut items = vec![self.ident(what)?];
        loop {
            if self.is_punct(&Tok::RBrace) {
                self.pos += 1;
                return Ok(items);
            }
            if commas {
                self.punct(Tok::Comma)?;
            }
            items.push(self.ident(what)?);
        }
    }
}
