//! Line-oriented text formats.
//!
//! | extension | content            |
//! |-----------|--------------------|
//! | `.gm`     | goal model         |
//! | `.ctx`    | context schema     |
//! | `.prefs`  | preference catalogue |
//! | `.sit`    | situation          |
//! | `.rank`   | ranking output     |
//!
//! Every parser reports all problems it finds as [`Diagnostic`]s carrying a
//! [`SourceSpan`]; none of them panics on malformed input.

mod catalogue;
mod lexer;
mod model;
mod rank;
mod schema;
mod situation;

use std::fmt;

use goalrank_core::{BindDiagnostic, BindError, BoundCatalogue, ModelRule};

pub use catalogue::{parse_catalogue, parse_catalogue_spanned, serialize_catalogue, SpannedCatalogue};
pub use model::{parse_goal_model, serialize_goal_model};
pub use rank::{ranking_doc, serialize_ranking, Doc};
pub use schema::{parse_context_schema, serialize_context_schema};
pub use situation::{parse_situation, serialize_situation};

/// 1-based position in a source file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn new(file: &str, line: usize, column: usize) -> Self {
        Self {
            file: file.to_string(),
            line,
            column,
        }
    }

    pub fn start(file: &str) -> Self {
        Self::new(file, 1, 1)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    InvalidUtf8,
    Syntax,
    UndeclaredId,
    DuplicateDeclaration,
    MissingRoot,
    Model(ModelRule),
    DuplicateElement,
    DuplicateValue,
    ReservedToken,
    ScoreOutOfRange,
    RepeatedElement,
    MixedWildcard,
    DuplicatePreference,
    UnknownContextElement,
    UnknownContextValue,
    VerbKindMismatch,
    UnknownTarget,
    MissingElement,
    UnknownElement,
    UnknownValue,
    WildcardForbidden,
    UnknownSolution,
    Rank,
    Io,
    Usage,
}

impl Code {
    pub fn name(self) -> &'static str {
        match self {
            Code::InvalidUtf8 => "InvalidUtf8",
            Code::Syntax => "Syntax",
            Code::UndeclaredId => "UndeclaredId",
            Code::DuplicateDeclaration => "DuplicateDeclaration",
            Code::MissingRoot => "MissingRoot",
            Code::Model(rule) => rule.name(),
            Code::DuplicateElement => "DuplicateElement",
            Code::DuplicateValue => "DuplicateValue",
            Code::ReservedToken => "ReservedToken",
            Code::ScoreOutOfRange => "ScoreOutOfRange",
            Code::RepeatedElement => "RepeatedElement",
            Code::MixedWildcard => "MixedWildcard",
            Code::DuplicatePreference => "DuplicatePreference",
            Code::UnknownContextElement => "UnknownContextElement",
            Code::UnknownContextValue => "UnknownContextValue",
            Code::VerbKindMismatch => "VerbKindMismatch",
            Code::UnknownTarget => "UnknownTarget",
            Code::MissingElement => "MissingElement",
            Code::UnknownElement => "UnknownElement",
            Code::UnknownValue => "UnknownValue",
            Code::WildcardForbidden => "WildcardForbidden",
            Code::UnknownSolution => "UnknownSolution",
            Code::Rank => "Rank",
            Code::Io => "Io",
            Code::Usage => "Usage",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn error(code: Code, span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: Code, span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            code,
            message: message.into(),
            span,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}[{}]: {}", self.span, self.code, self.message)
    }
}

/// A non-empty list of diagnostics returned by a failed parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn codes(&self) -> Vec<Code> {
        self.0.iter().map(|d| d.code).collect()
    }

    pub fn has(&self, code: Code) -> bool {
        self.0.iter().any(|d| d.code == code)
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

impl From<Vec<Diagnostic>> for Diagnostics {
    fn from(v: Vec<Diagnostic>) -> Self {
        Self(v)
    }
}

/// Decodes bytes as UTF-8, reporting the first invalid byte.
pub fn decode<'a>(file: &str, bytes: &'a [u8]) -> Result<&'a str, Diagnostics> {
    std::str::from_utf8(bytes).map_err(|e| {
        let valid = &bytes[..e.valid_up_to()];
        let line = valid.iter().filter(|b| **b == b'\n').count() + 1;
        let col = valid.iter().rev().take_while(|b| **b != b'\n').count() + 1;
        Diagnostics(vec![Diagnostic::error(
            Code::InvalidUtf8,
            SourceSpan::new(file, line, col),
            "input is not valid UTF-8",
        )])
    })
}

/// Attaches preference spans to binding errors.
pub fn bind_diagnostics(spans: &[SourceSpan], file: &str, errors: &[BindDiagnostic]) -> Vec<Diagnostic> {
    errors
        .iter()
        .map(|e| {
            let code = match e.error {
                BindError::UnknownContextElement { .. } => Code::UnknownContextElement,
                BindError::UnknownContextValue { .. } => Code::UnknownContextValue,
                BindError::VerbKindMismatch { .. } => Code::VerbKindMismatch,
            };
            let span = spans
                .get(e.preference_index)
                .cloned()
                .unwrap_or_else(|| SourceSpan::start(file));
            Diagnostic::error(code, span, e.error.to_string())
        })
        .collect()
}

/// Binding warnings as diagnostics.
pub fn bind_warnings(catalogue: &SpannedCatalogue, bound: &BoundCatalogue) -> Vec<Diagnostic> {
    bound
        .warnings()
        .iter()
        .map(|w| {
            let span = catalogue
                .span_of(w.preference.as_str())
                .cloned()
                .unwrap_or_else(|| SourceSpan::start(&catalogue.file));
            Diagnostic::warning(Code::UnknownTarget, span, w.to_string())
        })
        .collect()
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
