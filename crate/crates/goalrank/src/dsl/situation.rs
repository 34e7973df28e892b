use std::collections::HashMap;

use goalrank_core::{ContextSchema, Situation, ALL};

use super::lexer::{lex, Cursor, Tok};
use super::{Code, Diagnostic, Diagnostics, SourceSpan};

/// Parses `<elem>=<value>` pairs separated by whitespace or newlines.
pub fn parse_situation(file: &str, text: &str, schema: &ContextSchema) -> Result<Situation, Diagnostics> {
    let mut diags = Vec::new();
    let lines = lex(file, text, &mut diags);
    let mut given: HashMap<String, (String, SourceSpan)> = HashMap::new();
    let mut order = Vec::new();
    let mut last = SourceSpan::start(file);

    for line in &lines {
        let mut c = Cursor::new(line);
        while !c.at_end() {
            let parsed = (|| {
                let (el, span) = c.ident("a context element")?;
                c.punct(Tok::Eq)?;
                let (val, vspan) = c.ident("a value")?;
                Ok::<_, Diagnostic>((el, span, val, vspan))
            })();
            let (el, span, val, vspan) = match parsed {
                Ok(v) => v,
                Err(d) => {
                    diags.push(d);
                    break;
                }
            };
            last = line.span(line.end_column);
            let Some(element) = schema.element(&el) else {
                diags.push(Diagnostic::error(
                    Code::UnknownElement,
                    span,
                    format!("unknown context element `{el}`"),
                ));
                continue;
            };
            if val == ALL {
                diags.push(Diagnostic::error(
                    Code::WildcardForbidden,
                    vspan,
                    format!("a situation cannot use `{ALL}` (element `{el}`)"),
                ));
                continue;
            }
            if !element.has_value(&val) {
                diags.push(Diagnostic::error(
                    Code::UnknownValue,
                    vspan,
                    format!("`{val}` is not in the domain of `{el}`"),
                ));
                continue;
            }
            if given.contains_key(&el) {
                diags.push(Diagnostic::error(
                    Code::RepeatedElement,
                    span,
                    format!("`{el}` is given more than once"),
                ));
                continue;
            }
            order.push(el.clone());
            given.insert(el, (val, span));
        }
    }

    for e in schema.elements() {
        if !given.contains_key(&e.name) {
            diags.push(Diagnostic::error(
                Code::MissingElement,
                last.clone(),
                format!("situation has no value for `{}`", e.name),
            ));
        }
    }
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    let pairs: Vec<(&str, &str)> = order
        .iter()
        .map(|e| (e.as_str(), given[e].0.as_str()))
        .collect();
    Situation::from_pairs(schema, &pairs)
        .map_err(|e| Diagnostics(vec![Diagnostic::error(Code::Syntax, SourceSpan::start(file), e.to_string())]))
}

/// One `elem=value` per line, in schema order.
pub fn serialize_situation(situation: &Situation) -> String {
    let mut out = String::new();
    for (e, v) in situation.entries() {
        out.push_str(e);
        out.push('=');
        out.push_str(v);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use goalrank_core::ContextElement;

    fn schema() -> ContextSchema {
        ContextSchema::new(vec![
            ContextElement {
                name: "illness".into(),
                domain: vec!["dementia".into(), "normal".into()],
            },
            ContextElement {
                name: "weather".into(),
                domain: vec!["bad".into(), "good".into()],
            },
        ])
        .unwrap()
    }

    #[test]
    fn pairs_in_any_order() {
        let s = parse_situation("s.sit", "weather=good\nillness = dementia", &schema()).unwrap();
        assert_eq!(s.to_string(), "(dementia, good)");
        assert_eq!(parse_situation("s.sit", &serialize_situation(&s), &schema()).unwrap(), s);
    }

    #[test]
    fn errors() {
        let d = parse_situation("s.sit", "illness=dementia", &schema()).unwrap_err();
        assert_eq!(d.codes(), [Code::MissingElement]);
        assert!(d.0[0].message.contains("weather"));
        let d = parse_situation("s.sit", "illness=All weather=good", &schema()).unwrap_err();
        assert!(d.has(Code::WildcardForbidden));
        let d = parse_situation("s.sit", "illness=flu weather=good", &schema()).unwrap_err();
        assert!(d.has(Code::UnknownValue));
    }
}
