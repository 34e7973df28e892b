//! Goal model types and structural validation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ident::{is_identifier, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Hardgoal,
    Softgoal,
    Task,
}

impl NodeKind {
    /// Hardgoals and tasks (tasks are leaf-level hardgoals).
    pub fn is_hard(self) -> bool {
        !matches!(self, NodeKind::Softgoal)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            NodeKind::Hardgoal => "goal",
            NodeKind::Softgoal => "softgoal",
            NodeKind::Task => "task",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Hardgoal => "hardgoal",
            NodeKind::Softgoal => "softgoal",
            NodeKind::Task => "task",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operator {
    And,
    Or,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::And => "AND",
            Operator::Or => "OR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub operator: Operator,
    pub children: Vec<NodeId>,
}

impl Decomposition {
    /// OR nodes with at least two children offer a real choice.
    pub fn is_variability_point(&self) -> bool {
        self.operator == Operator::Or && self.children.len() >= 2
    }
}

/// `Make` is a `++` link, `Break` a `--` link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Make,
    Break,
}

impl Polarity {
    pub fn keyword(self) -> &'static str {
        match self {
            Polarity::Make => "make",
            Polarity::Break => "break",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContributionLink {
    pub source: NodeId,
    pub target: NodeId,
    pub polarity: Polarity,
}

/// An AND/OR goal model with contribution links.
///
/// Contribution links are kept sorted by `(source, target, polarity)`, so
/// two models built from the same statements in different orders compare
/// equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalModel {
    nodes: BTreeMap<NodeId, GoalNode>,
    root: NodeId,
    decompositions: BTreeMap<NodeId, Decomposition>,
    contributions: Vec<ContributionLink>,
}

impl GoalModel {
    /// Assembles a model without checking any invariant.
    pub fn from_parts(
        nodes: BTreeMap<NodeId, GoalNode>,
        root: NodeId,
        decompositions: BTreeMap<NodeId, Decomposition>,
        mut contributions: Vec<ContributionLink>,
    ) -> Self {
        contributions.sort();
        Self {
            nodes,
            root,
            decompositions,
            contributions,
        }
    }

    /// Assembles a model and runs [`validate_model`] on it.
    pub fn new(
        nodes: BTreeMap<NodeId, GoalNode>,
        root: NodeId,
        decompositions: BTreeMap<NodeId, Decomposition>,
        contributions: Vec<ContributionLink>,
    ) -> Result<Self, Vec<ModelDiagnostic>> {
        let model = Self::from_parts(nodes, root, decompositions, contributions);
        let diags = validate_model(&model);
        if diags.is_empty() {
            Ok(model)
        } else {
            Err(diags)
        }
    }

    pub fn root(&self) -> &NodeId {
        &self.root
    }

    pub fn nodes(&self) -> &BTreeMap<NodeId, GoalNode> {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<&GoalNode> {
        self.nodes.get(id)
    }

    pub fn kind(&self, id: &str) -> Option<NodeKind> {
        self.nodes.get(id).map(|n| n.kind)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn decompositions(&self) -> &BTreeMap<NodeId, Decomposition> {
        &self.decompositions
    }

    pub fn decomposition(&self, id: &str) -> Option<&Decomposition> {
        self.decompositions.get(id)
    }

    pub fn contributions(&self) -> &[ContributionLink] {
        &self.contributions
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &GoalNode> + '_ {
        self.nodes.values().filter(move |n| n.kind == kind)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.nodes_of_kind(NodeKind::Task).map(|n| &n.id)
    }

    pub fn softgoals(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.nodes_of_kind(NodeKind::Softgoal).map(|n| &n.id)
    }

    /// Number of hardgoals, tasks included.
    pub fn hardgoal_count(&self) -> usize {
        self.nodes.values().filter(|n| n.kind.is_hard()).count()
    }

    /// OR-decomposed nodes with at least two children, in id order.
    pub fn variability_points(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.decompositions
            .iter()
            .filter(|(_, d)| d.is_variability_point())
            .map(|(id, _)| id)
    }
}

/// Convenience builder. Identifiers are checked by [`GoalModelBuilder::build`].
#[derive(Debug, Default, Clone)]
pub struct GoalModelBuilder {
    nodes: Vec<GoalNode>,
    root: Option<String>,
    decompositions: Vec<(String, Decomposition)>,
    contributions: Vec<ContributionLink>,
}

impl GoalModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, id: &str, kind: NodeKind, label: &str) -> Self {
        self.nodes.push(GoalNode {
            id: NodeId::new_unchecked(id),
            kind,
            label: label.into(),
        });
        self
    }

    pub fn hardgoal(self, id: &str, label: &str) -> Self {
        self.node(id, NodeKind::Hardgoal, label)
    }

    pub fn softgoal(self, id: &str, label: &str) -> Self {
        self.node(id, NodeKind::Softgoal, label)
    }

    pub fn task(self, id: &str, label: &str) -> Self {
        self.node(id, NodeKind::Task, label)
    }

    pub fn root(mut self, id: &str) -> Self {
        self.root = Some(id.into());
        self
    }

    pub fn decompose(mut self, parent: &str, operator: Operator, children: &[&str]) -> Self {
        self.decompositions.push((
            parent.into(),
            Decomposition {
                operator,
                children: children.iter().map(|c| NodeId::new_unchecked(*c)).collect(),
            },
        ));
        self
    }

    pub fn and(self, parent: &str, children: &[&str]) -> Self {
        self.decompose(parent, Operator::And, children)
    }

    pub fn or(self, parent: &str, children: &[&str]) -> Self {
        self.decompose(parent, Operator::Or, children)
    }

    pub fn link(mut self, source: &str, target: &str, polarity: Polarity) -> Self {
        self.contributions.push(ContributionLink {
            source: NodeId::new_unchecked(source),
            target: NodeId::new_unchecked(target),
            polarity,
        });
        self
    }

    pub fn make(self, source: &str, target: &str) -> Self {
        self.link(source, target, Polarity::Make)
    }

    pub fn breaks(self, source: &str, target: &str) -> Self {
        self.link(source, target, Polarity::Break)
    }

    /// Builds without validation. Later duplicates of a node or a
    /// decomposition overwrite earlier ones.
    pub fn build_unchecked(self) -> GoalModel {
        let nodes = self.nodes.into_iter().map(|n| (n.id.clone(), n)).collect();
        let decompositions = self
            .decompositions
            .into_iter()
            .map(|(p, d)| (NodeId::new_unchecked(p), d))
            .collect();
        let root = NodeId::new_unchecked(self.root.unwrap_or_default());
        GoalModel::from_parts(nodes, root, decompositions, self.contributions)
    }

    pub fn build(self) -> Result<GoalModel, Vec<ModelDiagnostic>> {
        let mut diags = Vec::new();
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.clone()) {
                diags.push(ModelDiagnostic::new(
                    ModelRule::DuplicateNode,
                    Some(&n.id),
                    format!("node `{}` declared more than once", n.id),
                ));
            }
        }
        let mut parents = BTreeSet::new();
        for (p, _) in &self.decompositions {
            if !parents.insert(p.clone()) {
                diags.push(ModelDiagnostic::new(
                    ModelRule::MultipleDecompositions,
                    Some(&NodeId::new_unchecked(p.as_str())),
                    format!("node `{p}` has more than one decomposition"),
                ));
            }
        }
        if self.root.is_none() {
            diags.push(ModelDiagnostic::new(
                ModelRule::MissingRoot,
                None,
                "model has no root".into(),
            ));
        }
        let model = self.build_unchecked();
        if diags.is_empty() {
            diags = validate_model(&model);
        } else {
            diags.extend(
                validate_model(&model)
                    .into_iter()
                    .filter(|d| d.rule != ModelRule::UnknownRoot),
            );
        }
        if diags.is_empty() {
            Ok(model)
        } else {
            Err(diags)
        }
    }
}

/// Name of the violated structural rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelRule {
    InvalidIdentifier,
    DuplicateNode,
    MissingRoot,
    UnknownRoot,
    RootNotHardgoal,
    MultipleDecompositions,
    DecompositionOfUnknownNode,
    DecomposedLeaf,
    EmptyDecomposition,
    UnknownChild,
    ChildIsSoftgoal,
    SharedChild,
    Cycle,
    Unreachable,
    UnknownContributionNode,
    ContributionSourceNotHardgoal,
    ContributionTargetNotSoftgoal,
    DuplicateContribution,
}

impl ModelRule {
    pub fn name(self) -> &'static str {
        match self {
            ModelRule::InvalidIdentifier => "InvalidIdentifier",
            ModelRule::DuplicateNode => "DuplicateNode",
            ModelRule::MissingRoot => "MissingRoot",
            ModelRule::UnknownRoot => "UnknownRoot",
            ModelRule::RootNotHardgoal => "RootNotHardgoal",
            ModelRule::MultipleDecompositions => "MultipleDecompositions",
            ModelRule::DecompositionOfUnknownNode => "DecompositionOfUnknownNode",
            ModelRule::DecomposedLeaf => "DecomposedLeaf",
            ModelRule::EmptyDecomposition => "EmptyDecomposition",
            ModelRule::UnknownChild => "UnknownChild",
            ModelRule::ChildIsSoftgoal => "ChildIsSoftgoal",
            ModelRule::SharedChild => "SharedChild",
            ModelRule::Cycle => "Cycle",
            ModelRule::Unreachable => "Unreachable",
            ModelRule::UnknownContributionNode => "UnknownContributionNode",
            ModelRule::ContributionSourceNotHardgoal => "ContributionSourceNotHardgoal",
            ModelRule::ContributionTargetNotSoftgoal => "ContributionTargetNotSoftgoal",
            ModelRule::DuplicateContribution => "DuplicateContribution",
        }
    }
}

impl fmt::Display for ModelRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDiagnostic {
    pub rule: ModelRule,
    pub node: Option<NodeId>,
    /// Set for rules about a specific contribution link.
    pub link: Option<ContributionLink>,
    pub message: String,
}

impl ModelDiagnostic {
    fn new(rule: ModelRule, node: Option<&NodeId>, message: String) -> Self {
        Self {
            rule,
            node: node.cloned(),
            link: None,
            message,
        }
    }

    fn for_link(rule: ModelRule, node: &NodeId, link: &ContributionLink, message: String) -> Self {
        Self {
            rule,
            node: Some(node.clone()),
            link: Some(link.clone()),
            message,
        }
    }
}

impl fmt::Display for ModelDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

/// Checks every structural invariant of a goal model.
///
/// Returns one diagnostic per violation; an empty list means the model is
/// well formed.
pub fn validate_model(model: &GoalModel) -> Vec<ModelDiagnostic> {
    let mut out = Vec::new();
    let d = ModelDiagnostic::new;

    for node in model.nodes.values() {
        if !is_identifier(node.id.as_str()) {
            out.push(d(
                ModelRule::InvalidIdentifier,
                Some(&node.id),
                format!("`{}` is not a valid identifier", node.id),
            ));
        }
    }

    let root_kind = model.kind(model.root.as_str());
    match root_kind {
        None if model.root.as_str().is_empty() => {
            out.push(d(ModelRule::MissingRoot, None, "model has no root".into()))
        }
        None => out.push(d(
            ModelRule::UnknownRoot,
            Some(&model.root),
            format!("root `{}` is not a declared node", model.root),
        )),
        Some(NodeKind::Softgoal) => out.push(d(
            ModelRule::RootNotHardgoal,
            Some(&model.root),
            format!("root `{}` is a softgoal", model.root),
        )),
        Some(_) => {}
    }

    let mut parent_of: BTreeMap<&NodeId, &NodeId> = BTreeMap::new();
    for (parent, dec) in &model.decompositions {
        match model.kind(parent.as_str()) {
            None => out.push(d(
                ModelRule::DecompositionOfUnknownNode,
                Some(parent),
                format!("decomposition of undeclared node `{parent}`"),
            )),
            Some(NodeKind::Hardgoal) => {}
            Some(kind) => out.push(d(
                ModelRule::DecomposedLeaf,
                Some(parent),
                format!("{kind} `{parent}` cannot be decomposed"),
            )),
        }
        if dec.children.is_empty() {
            out.push(d(
                ModelRule::EmptyDecomposition,
                Some(parent),
                format!("decomposition of `{parent}` has no children"),
            ));
        }
        for child in &dec.children {
            match model.kind(child.as_str()) {
                None => {
                    out.push(d(
                        ModelRule::UnknownChild,
                        Some(parent),
                        format!("`{parent}` decomposes into undeclared node `{child}`"),
                    ));
                    continue;
                }
                Some(NodeKind::Softgoal) => out.push(d(
                    ModelRule::ChildIsSoftgoal,
                    Some(child),
                    format!("softgoal `{child}` appears as a child of `{parent}`"),
                )),
                Some(_) => {}
            }
            if let Some(prev) = parent_of.insert(child, parent) {
                out.push(d(
                    ModelRule::SharedChild,
                    Some(child),
                    format!("`{child}` has more than one parent (`{prev}` and `{parent}`)"),
                ));
            }
        }
    }

    if root_kind.is_some_and(NodeKind::is_hard) {
        let mut visited = BTreeSet::new();
        let mut on_path = BTreeSet::new();
        let mut reported = BTreeSet::new();
        // Iterative DFS; `Exit` pops a node off the current path.
        enum Step<'a> {
            Enter(&'a NodeId),
            Exit(&'a NodeId),
        }
        let mut stack = alloc::vec![Step::Enter(&model.root)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Exit(id) => {
                    on_path.remove(id);
                }
                Step::Enter(id) => {
                    if on_path.contains(id) {
                        if reported.insert(id) {
                            out.push(d(
                                ModelRule::Cycle,
                                Some(id),
                                format!("decomposition cycle through `{id}`"),
                            ));
                        }
                        continue;
                    }
                    if !visited.insert(id) {
                        continue;
                    }
                    on_path.insert(id);
                    stack.push(Step::Exit(id));
                    if let Some(dec) = model.decompositions.get(id) {
                        for child in dec.children.iter().rev() {
                            if model.contains(child.as_str()) {
                                stack.push(Step::Enter(child));
                            }
                        }
                    }
                }
            }
        }
        for node in model.nodes.values() {
            if node.kind.is_hard() && !visited.contains(&node.id) {
                out.push(d(
                    ModelRule::Unreachable,
                    Some(&node.id),
                    format!("{} `{}` is not reachable from the root", node.kind, node.id),
                ));
            }
        }
    }

    let mut pairs = BTreeSet::new();
    for link in &model.contributions {
        let mut known = true;
        for end in [&link.source, &link.target] {
            if !model.contains(end.as_str()) {
                known = false;
                out.push(ModelDiagnostic::for_link(
                    ModelRule::UnknownContributionNode,
                    end,
                    link,
                    format!("contribution link mentions undeclared node `{end}`"),
                ));
            }
        }
        if known {
            if model.kind(link.source.as_str()) == Some(NodeKind::Softgoal) {
                out.push(ModelDiagnostic::for_link(
                    ModelRule::ContributionSourceNotHardgoal,
                    &link.source,
                    link,
                    format!("contribution source `{}` is a softgoal", link.source),
                ));
            }
            if let Some(kind) = model.kind(link.target.as_str()) {
                if kind != NodeKind::Softgoal {
                    out.push(ModelDiagnostic::for_link(
                        ModelRule::ContributionTargetNotSoftgoal,
                        &link.target,
                        link,
                        format!("contribution target `{}` is a {kind}", link.target),
                    ));
                }
            }
        }
        if !pairs.insert((&link.source, &link.target)) {
            out.push(ModelDiagnostic::for_link(
                ModelRule::DuplicateContribution,
                &link.source,
                link,
                format!(
                    "more than one contribution link from `{}` to `{}`",
                    link.source, link.target
                ),
            ));
        }
    }

    out
}
