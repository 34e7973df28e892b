use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use goalrank_core::{
    validate_model, ContributionLink, Decomposition, GoalModel, GoalNode, ModelDiagnostic, ModelRule, NodeId,
    NodeKind, Operator, Polarity,
};

use super::lexer::{lex, Cursor, Tok};
use super::{quote, Code, Diagnostic, Diagnostics, SourceSpan};

#[derive(Default)]
struct Spans {
    decl: HashMap<String, SourceSpan>,
    root: Option<SourceSpan>,
    decomposition: HashMap<String, SourceSpan>,
    child: HashMap<String, SourceSpan>,
    links: HashMap<(String, String, Polarity), Vec<SourceSpan>>,
}

/// Parses a `.gm` document and validates the resulting model.
pub fn parse_goal_model(file: &str, text: &str) -> Result<GoalModel, Diagnostics> {
    let mut diags = Vec::new();
    let lines = lex(file, text, &mut diags);

    let mut spans = Spans::default();
    let mut nodes: BTreeMap<NodeId, GoalNode> = BTreeMap::new();
    let mut root: Option<(String, SourceSpan)> = None;
    let mut decompositions: BTreeMap<NodeId, Decomposition> = BTreeMap::new();
    let mut links = Vec::new();
    let mut refs: Vec<(String, SourceSpan)> = Vec::new();

    for line in &lines {
        let mut c = Cursor::new(line);
        let result: Result<(), Diagnostic> = (|| {
            let (kw, kw_span) = c.ident("a statement keyword")?;
            match kw.as_str() {
                "goal" | "softgoal" | "task" => {
                    let kind = match kw.as_str() {
                        "goal" => NodeKind::Hardgoal,
                        "softgoal" => NodeKind::Softgoal,
                        _ => NodeKind::Task,
                    };
                    let (id, span) = c.ident("a node id")?;
                    let label = match c.peek() {
                        Some(t) => match &t.tok {
                            Tok::Str(s) => {
                                c.next();
                                s.clone()
                            }
                            _ => return Err(c.error("a quoted label")),
                        },
                        None => String::new(),
                    };
                    c.end()?;
                    if let Some(prev) = spans.decl.get(&id) {
                        return Err(Diagnostic::error(
                            Code::DuplicateDeclaration,
                            span,
                            format!("`{id}` is already declared at {prev}"),
                        ));
                    }
                    spans.decl.insert(id.clone(), span);
                    let nid = NodeId::new_unchecked(id);
                    nodes.insert(
                        nid.clone(),
                        GoalNode {
                            id: nid,
                            kind,
                            label,
                        },
                    );
                }
                "root" => {
                    let (id, span) = c.ident("a node id")?;
                    c.end()?;
                    if let Some(prev) = &spans.root {
                        return Err(Diagnostic::error(
                            Code::DuplicateDeclaration,
                            kw_span,
                            format!("root is already declared at {prev}"),
                        ));
                    }
                    spans.root = Some(kw_span);
                    refs.push((id.clone(), span.clone()));
                    root = Some((id, span));
                }
                "and" | "or" => {
                    let operator = if kw == "and" { Operator::And } else { Operator::Or };
                    let (parent, span) = c.ident("a node id")?;
                    let children = c.ident_block("a child id", false)?;
                    c.end()?;
                    if let Some(prev) = spans.decomposition.get(&parent) {
                        return Err(Diagnostic::error(
                            Code::Model(ModelRule::MultipleDecompositions),
                            kw_span,
                            format!("`{parent}` is already decomposed at {prev}"),
                        ));
                    }
                    spans.decomposition.insert(parent.clone(), kw_span);
                    refs.push((parent.clone(), span));
                    for (child, cspan) in &children {
                        spans.child.insert(child.clone(), cspan.clone());
                        refs.push((child.clone(), cspan.clone()));
                    }
                    decompositions.insert(
                        NodeId::new_unchecked(parent),
                        Decomposition {
                            operator,
                            children: children.into_iter().map(|(c, _)| NodeId::new_unchecked(c)).collect(),
                        },
                    );
                }
                "make" | "break" => {
                    let polarity = if kw == "make" { Polarity::Make } else { Polarity::Break };
                    let (source, sspan) = c.ident("a contribution source")?;
                    let (target, tspan) = c.ident("a softgoal id")?;
                    c.end()?;
                    spans
                        .links
                        .entry((source.clone(), target.clone(), polarity))
                        .or_default()
                        .push(kw_span);
                    refs.push((source.clone(), sspan));
                    refs.push((target.clone(), tspan));
                    links.push(ContributionLink {
                        source: NodeId::new_unchecked(source),
                        target: NodeId::new_unchecked(target),
                        polarity,
                    });
                }
                other => {
                    return Err(Diagnostic::error(
                        Code::Syntax,
                        kw_span,
                        format!("unknown statement `{other}`"),
                    ))
                }
            }
            Ok(())
        })();
        if let Err(d) = result {
            diags.push(d);
        }
    }

    for (id, span) in &refs {
        if !spans.decl.contains_key(id) {
            diags.push(Diagnostic::error(
                Code::UndeclaredId,
                span.clone(),
                format!("`{id}` is not declared"),
            ));
        }
    }
    if root.is_none() {
        diags.push(Diagnostic::error(
            Code::MissingRoot,
            SourceSpan::start(file),
            "model has no `root` statement",
        ));
    }
    if !diags.is_empty() {
        diags.sort_by(|a, b| a.span.cmp(&b.span));
        return Err(Diagnostics(diags));
    }

    let (root, _) = root.expect("checked above");
    let model = GoalModel::from_parts(nodes, NodeId::new_unchecked(root), decompositions, links);
    let problems = validate_model(&model);
    if problems.is_empty() {
        return Ok(model);
    }
    let mut out: Vec<Diagnostic> = problems
        .iter()
        .map(|p| Diagnostic::error(Code::Model(p.rule), locate(file, &spans, p), p.message.clone()))
        .collect();
    out.sort_by(|a, b| a.span.cmp(&b.span));
    out.dedup();
    Err(Diagnostics(out))
}

fn locate(file: &str, spans: &Spans, p: &ModelDiagnostic) -> SourceSpan {
    if let Some(link) = &p.link {
        let key = (link.source.to_string(), link.target.to_string(), link.polarity);
        if let Some(v) = spans.links.get(&key) {
            let pick = if p.rule == ModelRule::DuplicateContribution { v.last() } else { v.first() };
            return pick.cloned().unwrap_or_else(|| SourceSpan::start(file));
        }
    }
    let node = p.node.as_ref().map(|n| n.as_str());
    let found = match p.rule {
        ModelRule::MissingRoot | ModelRule::UnknownRoot | ModelRule::RootNotHardgoal => spans.root.clone(),
        ModelRule::DecomposedLeaf | ModelRule::MultipleDecompositions | ModelRule::EmptyDecomposition => {
            node.and_then(|n| spans.decomposition.get(n)).cloned()
        }
        ModelRule::ChildIsSoftgoal | ModelRule::SharedChild | ModelRule::UnknownChild => {
            node.and_then(|n| spans.child.get(n)).cloned()
        }
        _ => None,
    };
    found
        .or_else(|| node.and_then(|n| spans.decl.get(n)).cloned())
        .unwrap_or_else(|| SourceSpan::start(file))
}

/// Writes a model back as `.gm` text in a canonical statement order.
pub fn serialize_goal_model(model: &GoalModel) -> String {
    let mut out = String::new();
    for kind in [NodeKind::Hardgoal, NodeKind::Softgoal, NodeKind::Task] {
        for node in model.nodes_of_kind(kind) {
            let _ = writeln!(out, "{} {} {}", kind.keyword(), node.id, quote(&node.label));
        }
    }
    let _ = writeln!(out, "root {}", model.root());
    for (parent, d) in model.decompositions() {
        let kw = match d.operator {
            Operator::And => "and",
            Operator::Or => "or",
        };
        let children: Vec<&str> = d.children.iter().map(|c| c.as_str()).collect();
        let _ = writeln!(out, "{kw} {parent} {{ {} }}", children.join(" "));
    }
    for l in model.contributions() {
        let _ = writeln!(out, "{} {} {}", l.polarity.keyword(), l.source, l.target);
    }
    out
}
