use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use goalrank_core::{ContextElement, ContextSchema, ALL};

use super::lexer::{lex, Cursor};
use super::{Code, Diagnostic, Diagnostics};

/// Parses a `.ctx` document. Element order in the file is tuple order.
pub fn parse_context_schema(file: &str, text: &str) -> Result<ContextSchema, Diagnostics> {
    let mut diags = Vec::new();
    let lines = lex(file, text, &mut diags);
    let mut elements = Vec::new();
    let mut seen = HashMap::new();

    for line in &lines {
        let mut c = Cursor::new(line);
        let parsed = (|| {
            c.keyword("element")?;
            let (name, span) = c.ident("an element name")?;
            let values = c.ident_block("a value", false)?;
            c.end()?;
            Ok::<_, Diagnostic>((name, span, values))
        })();
        let (name, span, values) = match parsed {
            Ok(v) => v,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        if let Some(prev) = seen.get(&name) {
            diags.push(Diagnostic::error(
                Code::DuplicateElement,
                span,
                format!("element `{name}` is already declared at {prev}"),
            ));
            continue;
        }
        seen.insert(name.clone(), span);
        let mut domain = Vec::new();
        let mut in_domain = HashSet::new();
        for (v, vspan) in values {
            if v == ALL {
                diags.push(Diagnostic::error(
                    Code::ReservedToken,
                    vspan,
                    format!("`{ALL}` is reserved and cannot be a value of `{name}`"),
                ));
            } else if !in_domain.insert(v.clone()) {
                diags.push(Diagnostic::error(
                    Code::DuplicateValue,
                    vspan,
                    format!("value `{v}` appears twice in `{name}`"),
                ));
            } else {
                domain.push(v);
            }
        }
        elements.push(ContextElement { name, domain });
    }

    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    // Remaining failures (e.g. an empty domain) cannot be produced by the
    // grammar, but surface them rather than panic.
    ContextSchema::new(elements).map_err(|e| {
        Diagnostics(vec![Diagnostic::error(
            Code::Syntax,
            super::SourceSpan::start(file),
            e.to_string(),
        )])
    })
}

pub fn serialize_context_schema(schema: &ContextSchema) -> String {
    let mut out = String::new();
    for e in schema.elements() {
        let _ = writeln!(out, "element {} {{ {} }}", e.name, e.domain.join(" "));
    }
    out
}
