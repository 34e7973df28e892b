use std::collections::BTreeMap;

use goalrank_core::{format_rational, Rational, RankingReport, ScoredSolution};
use serde_json::Value;

/// A structured document: what a `.rank` file and the service's JSON
/// bodies are both rendered from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Doc {
    Int(i64),
    Str(String),
    Rational(Rational),
    List(Vec<Doc>),
    Map(BTreeMap<String, Doc>),
}

impl Doc {
    pub fn map<K: Into<String>>(entries: impl IntoIterator<Item = (K, Doc)>) -> Doc {
        Doc::Map(entries.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn str(s: impl Into<String>) -> Doc {
        Doc::Str(s.into())
    }

    pub fn strs<S: ToString>(items: impl IntoIterator<Item = S>) -> Doc {
        Doc::List(items.into_iter().map(|s| Doc::Str(s.to_string())).collect())
    }

    fn is_inline(&self) -> bool {
        match self {
            Doc::List(items) => items.iter().all(Doc::is_inline),
            Doc::Map(m) => m.is_empty(),
            _ => true,
        }
    }

    /// Block text with sorted keys and `\n` line endings.
    pub fn render(&self) -> String {
        let mut out = String::new();
        match self {
            Doc::Map(m) if !m.is_empty() => render_map(m, 0, &mut out),
            other => {
                out.push_str(&inline(other));
                out.push('\n');
            }
        }
        out
    }

    /// JSON with rationals as exact strings.
    pub fn to_json(&self) -> Value {
        match self {
            Doc::Int(n) => Value::from(*n),
            Doc::Str(s) => Value::from(s.as_str()),
            Doc::Rational(r) => Value::from(format_rational(r)),
            Doc::List(items) => Value::Array(items.iter().map(Doc::to_json).collect()),
            Doc::Map(m) => Value::Object(m.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()),
        }
    }
}

fn scalar_str(s: &str) -> String {
    let bare = !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '/' | '+'));
    if bare {
        s.to_string()
    } else {
        serde_json::to_string(s).expect("strings always serialize")
    }
}

fn inline(doc: &Doc) -> String {
    match doc {
        Doc::Int(n) => n.to_string(),
        Doc::Str(s) => scalar_str(s),
        Doc::Rational(r) => format_rational(r),
        Doc::List(items) => {
            let parts: Vec<String> = items.iter().map(inline).collect();
            format!("[{}]", parts.join(", "))
        }
        Doc::Map(m) => {
            let parts: Vec<String> = m.iter().map(|(k, v)| format!("{}: {}", scalar_str(k), inline(v))).collect();
            format!("{{{}}}", parts.join(", "))
        }
    }
}

fn render_map(m: &BTreeMap<String, Doc>, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    for (k, v) in m {
        let key = scalar_str(k);
        if v.is_inline() {
            out.push_str(&format!("{pad}{key}: {}\n", inline(v)));
            continue;
        }
        out.push_str(&format!("{pad}{key}:\n"));
        match v {
            Doc::Map(inner) => render_map(inner, indent + 2, out),
            Doc::List(items) => {
                for item in items {
                    match item {
                        Doc::Map(inner) if !inner.is_empty() => {
                            let mut block = String::new();
                            render_map(inner, indent + 4, &mut block);
                            // Swap the first line's indentation for a list marker.
                            let marker = format!("{pad}  - ");
                            out.push_str(&marker);
                            out.push_str(&block[marker.len()..]);
                        }
                        other => out.push_str(&format!("{pad}  - {}\n", inline(other))),
                    }
                }
            }
            _ => unreachable!("scalars are inline"),
        }
    }
}

fn solution_doc(rank: usize, s: &ScoredSolution) -> Doc {
    let per_softgoal = s
        .per_softgoal
        .iter()
        .map(|(sg, t)| (sg.to_string(), Doc::Rational(t.contrib)));
    let links = s.per_softgoal.iter().map(|(sg, t)| {
        (
            sg.to_string(),
            Doc::map([
                ("make", Doc::Int(i64::from(t.makes))),
                ("break", Doc::Int(i64::from(t.breaks))),
                ("score", Doc::Int(i64::from(t.score))),
            ]),
        )
    });
    let per_hardgoal = s.per_hardgoal.iter().map(|(hg, v)| (hg.to_string(), Doc::Int(*v)));
    Doc::map([
        ("rank", Doc::Int(rank as i64)),
        ("tasks", Doc::strs(s.solution.tasks.iter())),
        ("per_softgoal", Doc::map(per_softgoal)),
        ("per_hardgoal", Doc::map(per_hardgoal)),
        ("links", Doc::map(links)),
        ("sps", Doc::Rational(s.sps)),
        ("hps", Doc::Int(s.hps)),
        ("psd", Doc::Rational(s.psd)),
    ])
}

pub fn ranking_doc(report: &RankingReport) -> Doc {
    let situation = report
        .situation
        .entries()
        .iter()
        .map(|(e, v)| (e.clone(), Doc::str(v.as_str())));
    let scores = |m: &BTreeMap<goalrank_core::NodeId, u8>| {
        Doc::map(m.iter().map(|(k, v)| (k.to_string(), Doc::Int(i64::from(*v)))))
    };
    Doc::map([
        ("situation", Doc::map(situation)),
        ("mode", Doc::str(report.mode.name())),
        ("relevant", Doc::strs(report.relevant.iter())),
        ("overshadowed", Doc::strs(report.overshadowed.iter())),
        (
            "effective",
            Doc::map([
                ("softgoal", scores(&report.effective.softgoal)),
                ("hardgoal", scores(&report.effective.hardgoal)),
            ]),
        ),
        ("warnings", Doc::strs(report.warnings.iter())),
        (
            "solutions",
            Doc::List(
                report
                    .solutions
                    .iter()
                    .enumerate()
                    .map(|(i, s)| solution_doc(i + 1, s))
                    .collect(),
            ),
        ),
    ])
}

/// Renders a ranking report as a `.rank` document.
pub fn serialize_ranking(report: &RankingReport) -> String {
    ranking_doc(report).render()
}
