use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use goalrank_core::{
    Action, CombinedAssertion, ContextualPreference, NodeId, PreferenceCatalogue, PreferenceId, Score, Verb, ALL,
};

use super::lexer::{lex, Cursor, Tok};
use super::{Code, Diagnostic, Diagnostics, SourceSpan};

/// A parsed catalogue together with the span of each `pref` statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpannedCatalogue {
    pub file: String,
    pub catalogue: PreferenceCatalogue,
    /// Parallel to `catalogue.preferences()`.
    pub spans: Vec<SourceSpan>,
}

impl SpannedCatalogue {
    pub fn span_of(&self, id: &str) -> Option<&SourceSpan> {
        let idx = self.catalogue.preferences().iter().position(|p| p.id == id)?;
        self.spans.get(idx)
    }
}

pub fn parse_catalogue(file: &str, text: &str) -> Result<PreferenceCatalogue, Diagnostics> {
    parse_catalogue_spanned(file, text).map(|c| c.catalogue)
}

/// Parses a `.prefs` document, one preference per line:
///
/// ```text
/// pref p1 { perform t1; perform t5 } when patient_illness in {dementia} score 9
/// pref p7 { satisfy sg1 } when true score 6
/// ```
pub fn parse_catalogue_spanned(file: &str, text: &str) -> Result<SpannedCatalogue, Diagnostics> {
    let mut diags = Vec::new();
    let lines = lex(file, text, &mut diags);
    let mut prefs = Vec::new();
    let mut spans = Vec::new();
    let mut ids: HashMap<String, SourceSpan> = HashMap::new();

    for line in &lines {
        let mut c = Cursor::new(line);
        match parse_pref(&mut c) {
            Err(d) => diags.push(d),
            Ok(Err(semantic)) => diags.extend(semantic),
            Ok(Ok((pref, span))) => {
                if let Some(prev) = ids.get(pref.id.as_str()) {
                    diags.push(Diagnostic::error(
                        Code::DuplicatePreference,
                        span,
                        format!("preference `{}` is already defined at {prev}", pref.id),
                    ));
                    continue;
                }
                ids.insert(pref.id.to_string(), span.clone());
                prefs.push(pref);
                spans.push(span);
            }
        }
    }
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    let catalogue = PreferenceCatalogue::new(prefs)
        .map_err(|e| Diagnostics(vec![Diagnostic::error(Code::DuplicatePreference, SourceSpan::start(file), e.to_string())]))?;
    Ok(SpannedCatalogue {
        file: file.to_string(),
        catalogue,
        spans,
    })
}

type PrefResult = Result<(ContextualPreference, SourceSpan), Vec<Diagnostic>>;

/// Outer error: syntax. Inner error: well-formed but invalid statement.
fn parse_pref(c: &mut Cursor<'_, '_>) -> Result<PrefResult, Diagnostic> {
    let span = c.keyword("pref")?;
    let (id, _) = c.ident("a preference id")?;
    let mut problems = Vec::new();

    c.punct(Tok::LBrace)?;
    let mut actions = Vec::new();
    loop {
        let verb = if c.is_keyword("perform") {
            Verb::Perform
        } else if c.is_keyword("satisfy") {
            Verb::Satisfy
        } else {
            return Err(c.error("`perform` or `satisfy`"));
        };
        c.next();
        let (target, _) = c.ident("a node id")?;
        actions.push(Action {
            verb,
            target: NodeId::new_unchecked(target),
        });
        if c.is_punct(&Tok::Semi) {
            c.next();
            continue;
        }
        c.punct(Tok::RBrace)?;
        break;
    }

    c.keyword("when")?;
    let mut con = CombinedAssertion::always();
    if c.is_keyword("true") {
        c.next();
    } else {
        let mut seen = HashSet::new();
        loop {
            let (element, espan) = c.ident("a context element or `true`")?;
            c.keyword("in")?;
            let values = c.ident_block("a value", true)?;
            let distinct: HashSet<&str> = values.iter().map(|(v, _)| v.as_str()).collect();
            if distinct.contains(ALL) && distinct.len() > 1 {
                problems.push(Diagnostic::error(
                    Code::MixedWildcard,
                    espan.clone(),
                    format!("`{ALL}` cannot be combined with other values of `{element}`"),
                ));
            }
            if !seen.insert(element.clone()) {
                problems.push(Diagnostic::error(
                    Code::RepeatedElement,
                    espan,
                    format!("`{element}` is asserted more than once"),
                ));
            } else {
                con.assert(&element, values.into_iter().map(|(v, _)| v));
            }
            if c.is_keyword("and") {
                c.next();
                continue;
            }
            break;
        }
    }

    c.keyword("score")?;
    let score_span = c.here();
    let raw = match c.next().map(|t| &t.tok) {
        Some(Tok::Int(n)) => *n,
        _ => {
            return Err(Diagnostic::error(
                Code::Syntax,
                score_span,
                "expected an integer score",
            ))
        }
    };
    c.end()?;
    let score = Score::new(raw);
    if score.is_none() {
        problems.push(Diagnostic::error(
            Code::ScoreOutOfRange,
            score_span,
            format!("score {raw} is outside 0..=10"),
        ));
    }
    if !problems.is_empty() {
        return Ok(Err(problems));
    }
    Ok(Ok((
        ContextualPreference {
            id: PreferenceId::new_unchecked(id),
            actions,
            con,
            score: score.expect("checked above"),
        },
        span,
    )))
}

pub fn serialize_catalogue(catalogue: &PreferenceCatalogue) -> String {
    let mut out = String::new();
    for p in catalogue.preferences() {
        let actions: Vec<String> = p
            .actions
            .iter()
            .map(|a| format!("{} {}", a.verb.keyword(), a.target))
            .collect();
        let when = if p.con.is_always() {
            "true".to_string()
        } else {
            p.con
                .iter()
                .map(|(el, vs)| {
                    let vs: Vec<&str> = vs.iter().map(String::as_str).collect();
                    format!("{el} in {{{}}}", vs.join(", "))
                })
                .collect::<Vec<_>>()
                .join(" and ")
        };
        let _ = writeln!(
            out,
            "pref {} {{ {} }} when {when} score {}",
            p.id,
            actions.join("; "),
            p.score.get()
        );
    }
    out
}
