//! Propositional view of a goal model and candidate-solution enumeration.
//!
//! A candidate solution picks exactly one alternative at every OR node it
//! reaches and takes every child of every AND node it reaches; its tasks
//! are the leaves reached this way. Contribution links play no part in
//! admissibility, they only affect scoring.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::ident::NodeId;
use crate::model::{GoalModel, NodeKind, Operator, Polarity};

/// Default upper bound on eagerly materialised solutions.
pub const DEFAULT_SOLUTION_CAP: usize = 1_000_000;

/// Largest task count accepted by [`oracle_enumerate`].
pub const ORACLE_MAX_TASKS: usize = 20;

/// AND/OR formula over task literals.
///
/// An empty `Or` is false; it stands for a hardgoal with no decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Task(NodeId),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn eval(&self, holds: &dyn Fn(&NodeId) -> bool) -> bool {
        match self {
            Formula::Task(t) => holds(t),
            Formula::And(fs) => fs.iter().all(|f| f.eval(holds)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(holds)),
        }
    }

    /// Task literals in left-to-right order.
    pub fn tasks(&self) -> Vec<&NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                Formula::Task(t) => out.push(t),
                Formula::And(fs) | Formula::Or(fs) => stack.extend(fs.iter().rev()),
            }
        }
        out
    }

    fn fmt_nested(&self, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
        let (parts, sep) = match self {
            Formula::Task(t) => return write!(f, "{t}"),
            Formula::Or(fs) if fs.is_empty() => return f.write_str("false"),
            Formula::And(fs) => (fs, " AND "),
            Formula::Or(fs) => (fs, " OR "),
        };
        if parts.len() == 1 {
            return parts[0].fmt_nested(f, nested);
        }
        if nested {
            f.write_str("(")?;
        }
        for (i, p) in parts.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            p.fmt_nested(f, true)?;
        }
        if nested {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_nested(f, false)
    }
}

/// Consequent of a contribution conjunct: `sg` for make, `¬sg` for break.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SignedSoftgoal {
    pub softgoal: NodeId,
    pub positive: bool,
}

impl fmt::Display for SignedSoftgoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.positive { '+' } else { '-' };
        write!(f, "{sign}{}", self.softgoal)
    }
}

/// `G ≡ T_g ∧ Q_g` in structured form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledModel {
    /// AND/OR structure rewritten down to task literals.
    pub tg: Formula,
    /// One `(antecedent, ±softgoal)` conjunct per contribution link.
    pub qg: Vec<(NodeId, SignedSoftgoal)>,
    pub variability_points: Vec<NodeId>,
}

/// Compiles a validated model into its propositional form.
pub fn compile(model: &GoalModel) -> CompiledModel {
    CompiledModel {
        tg: formula_of(model, model.root()),
        qg: model
            .contributions()
            .iter()
            .map(|l| {
                (
                    l.source.clone(),
                    SignedSoftgoal {
                        softgoal: l.target.clone(),
                        positive: l.polarity == Polarity::Make,
                    },
                )
            })
            .collect(),
        variability_points: model.variability_points().cloned().collect(),
    }
}

/// Formula for the subtree under `id`.
pub fn formula_of(model: &GoalModel, id: &NodeId) -> Formula {
    if model.kind(id.as_str()) == Some(NodeKind::Task) {
        return Formula::Task(id.clone());
    }
    match model.decomposition(id.as_str()) {
        None => Formula::Or(Vec::new()),
        Some(d) => {
            let parts = d.children.iter().map(|c| formula_of(model, c)).collect();
            match d.operator {
                Operator::And => Formula::And(parts),
                Operator::Or => Formula::Or(parts),
            }
        }
    }
}

/// A candidate solution: a set of tasks.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Solution {
    pub tasks: BTreeSet<NodeId>,
}

impl Solution {
    pub fn new(tasks: impl IntoIterator<Item = NodeId>) -> Self {
        Self {
            tasks: tasks.into_iter().collect(),
        }
    }

    /// Builds a solution from raw ids without checking the identifier
    /// pattern.
    pub fn of(tasks: &[&str]) -> Self {
        Self::new(tasks.iter().map(|t| NodeId::new_unchecked(*t)))
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn contains(&self, task: &str) -> bool {
        self.tasks.contains(task)
    }

    /// Canonical ranking tie-break: fewer tasks first, then lexicographic.
    pub fn tie_break_cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.cmp(other))
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.tasks.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("]")
    }
}

/// Index-based view of the decomposition tree.
#[derive(Debug, Clone)]
pub(crate) struct Tree {
    pub ids: Vec<NodeId>,
    pub kinds: Vec<NodeKind>,
    pub index: BTreeMap<NodeId, usize>,
    ops: Vec<Option<Operator>>,
    children: Vec<Vec<usize>>,
    /// Children that can be satisfied at all, per node.
    viable_children: Vec<Vec<usize>>,
    viable: Vec<bool>,
    /// Decomposed nodes reachable from the root, children before parents.
    post_order: Vec<usize>,
    pub root: usize,
}

impl Tree {
    pub fn new(model: &GoalModel) -> Self {
        let ids: Vec<NodeId> = model.nodes().keys().cloned().collect();
        let index: BTreeMap<NodeId, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let kinds = model.nodes().values().map(|n| n.kind).collect();
        let mut ops = vec![None; ids.len()];
        let mut children = vec![Vec::new(); ids.len()];
        for (parent, dec) in model.decompositions() {
            if let Some(&p) = index.get(parent) {
                ops[p] = Some(dec.operator);
                children[p] = dec
                    .children
                    .iter()
                    .filter_map(|c| index.get(c).copied())
                    .collect();
            }
        }
        let root = index.get(model.root()).copied().unwrap_or(0);
        let mut tree = Tree {
            ids,
            kinds,
            index,
            ops,
            children,
            viable_children: Vec::new(),
            viable: Vec::new(),
            post_order: Vec::new(),
            root,
        };
        tree.post_order = tree.compute_post_order();
        tree.compute_viability();
        tree
    }

    fn compute_post_order(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut seen = vec![false; self.ids.len()];
        let mut stack = vec![(self.root, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                out.push(n);
                continue;
            }
            if seen[n] {
                continue;
            }
            seen[n] = true;
            stack.push((n, true));
            for &c in self.children[n].iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }

    fn compute_viability(&mut self) {
        let n = self.ids.len();
        self.viable = vec![false; n];
        self.viable_children = vec![Vec::new(); n];
        for &i in &self.post_order {
            let ok = match (self.kinds[i], self.ops[i]) {
                (NodeKind::Task, _) => true,
                (_, None) => false,
                (_, Some(Operator::And)) => self.children[i].iter().all(|&c| self.viable[c]),
                (_, Some(Operator::Or)) => self.children[i].iter().any(|&c| self.viable[c]),
            };
            self.viable[i] = ok;
            self.viable_children[i] = self.children[i]
                .iter()
                .copied()
                .filter(|&c| self.viable[c])
                .collect();
        }
    }

    pub fn count(&self) -> u128 {
        let mut counts = vec![0u128; self.ids.len()];
        for &i in &self.post_order {
            counts[i] = match (self.kinds[i], self.ops[i]) {
                (NodeKind::Task, _) => 1,
                (_, None) => 0,
                (_, Some(Operator::And)) => self.children[i]
                    .iter()
                    .fold(1u128, |acc, &c| acc.saturating_mul(counts[c])),
                (_, Some(Operator::Or)) => self.children[i]
                    .iter()
                    .fold(0u128, |acc, &c| acc.saturating_add(counts[c])),
            };
        }
        counts[self.root]
    }

    /// Evaluates which reachable nodes are satisfied when exactly the tasks
    /// flagged in `tasks` are performed.
    pub fn satisfied_into(&self, performed: &[bool], out: &mut Vec<bool>) {
        out.clear();
        out.resize(self.ids.len(), false);
        for &i in &self.post_order {
            out[i] = match (self.kinds[i], self.ops[i]) {
                (NodeKind::Task, _) => performed[i],
                (_, None) => false,
                (_, Some(Operator::And)) => self.children[i].iter().all(|&c| out[c]),
                (_, Some(Operator::Or)) => self.children[i].iter().any(|&c| out[c]),
            };
        }
    }

    pub fn performed_mask(&self, sol: &Solution) -> Vec<bool> {
        let mut mask = vec![false; self.ids.len()];
        for t in &sol.tasks {
            if let Some(&i) = self.index.get(t) {
                if self.kinds[i] == NodeKind::Task {
                    mask[i] = true;
                }
            }
        }
        mask
    }
}

/// Lazy enumeration of candidate solutions.
///
/// Walks the OR choices like an odometer over the OR nodes that are active
/// under the current choices, in depth-first pre-order. Solutions come out
/// in generation order, not canonical order; distinct choice vectors yield
/// distinct task sets because the model is a tree.
#[derive(Debug, Clone)]
pub struct SolutionIter {
    tree: Tree,
    /// `(or_node, index into its viable children)` in pre-order.
    choices: Vec<(usize, usize)>,
    started: bool,
    done: bool,
}

impl SolutionIter {
    fn new(tree: Tree) -> Self {
        let done = !tree.viable.get(tree.root).copied().unwrap_or(false);
        Self {
            tree,
            choices: Vec::new(),
            started: false,
            done,
        }
    }

    fn current(&mut self) -> Solution {
        let tree = &self.tree;
        let mut tasks = BTreeSet::new();
        let mut k = 0;
        let mut stack = vec![tree.root];
        while let Some(n) = stack.pop() {
            match (tree.kinds[n], tree.ops[n]) {
                (NodeKind::Task, _) => {
                    tasks.insert(tree.ids[n].clone());
                }
                (_, Some(Operator::And)) => stack.extend(tree.children[n].iter().rev()),
                (_, Some(Operator::Or)) => {
                    if k == self.choices.len() {
                        self.choices.push((n, 0));
                    }
                    let pick = self.choices[k].1;
                    k += 1;
                    stack.push(tree.viable_children[n][pick]);
                }
                (_, None) => {}
            }
        }
        Solution { tasks }
    }

    /// Advances the odometer; false when exhausted.
    fn advance(&mut self) -> bool {
        while let Some(&(node, pick)) = self.choices.last() {
            if pick + 1 < self.tree.viable_children[node].len() {
                self.choices.last_mut().unwrap().1 += 1;
                return true;
            }
            self.choices.pop();
        }
        false
    }
}

impl Iterator for SolutionIter {
    type Item = Solution;

    fn next(&mut self) -> Option<Solution> {
        if self.done {
            return None;
        }
        if self.started {
            if !self.advance() {
                self.done = true;
                return None;
            }
        } else {
            self.started = true;
        }
        Some(self.current())
    }
}

/// Streams the candidate solutions of a validated model.
pub fn solutions(model: &GoalModel) -> SolutionIter {
    SolutionIter::new(Tree::new(model))
}

/// Number of candidate solutions (saturating).
pub fn solution_count(model: &GoalModel) -> u128 {
    Tree::new(model).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("model has {count} candidate solutions, more than the cap of {cap}")]
pub struct CapExceeded {
    pub count: u128,
    pub cap: usize,
}

/// All candidate solutions in canonical order, up to [`DEFAULT_SOLUTION_CAP`].
pub fn enumerate_solutions(model: &GoalModel) -> Result<Vec<Solution>, CapExceeded> {
    enumerate_solutions_capped(model, DEFAULT_SOLUTION_CAP)
}

pub fn enumerate_solutions_capped(
    model: &GoalModel,
    cap: usize,
) -> Result<Vec<Solution>, CapExceeded> {
    let tree = Tree::new(model);
    let count = tree.count();
    if count > cap as u128 {
        return Err(CapExceeded { count, cap });
    }
    let mut out: Vec<Solution> = SolutionIter::new(tree).collect();
    out.sort_unstable();
    Ok(out)
}

/// True iff the AND/OR structure holds when exactly `sol`'s tasks are
/// performed. Supersets of a solution are admissible too; use
/// [`is_solution`] for an exact match.
pub fn is_admissible(model: &GoalModel, sol: &Solution) -> bool {
    compile_tg(model).eval(&|t| sol.tasks.contains(t))
}

/// True iff `sol` is one of the candidate solutions: admissible, and no
/// task can be dropped without breaking the AND/OR structure.
pub fn is_solution(model: &GoalModel, sol: &Solution) -> bool {
    if sol
        .tasks
        .iter()
        .any(|t| model.kind(t.as_str()) != Some(NodeKind::Task))
    {
        return false;
    }
    let tg = compile_tg(model);
    tg.eval(&|t| sol.tasks.contains(t))
        && sol
            .tasks
            .iter()
            .all(|dropped| !tg.eval(&|t| t != dropped && sol.tasks.contains(t)))
}

fn compile_tg(model: &GoalModel) -> Formula {
    formula_of(model, model.root())
}

/// Hardgoals and tasks satisfied by `sol`.
///
/// A task is satisfied iff it is in the solution; an AND goal iff all its
/// children are; an OR goal iff at least one child is.
pub fn satisfied_goals(model: &GoalModel, sol: &Solution) -> BTreeSet<NodeId> {
    let tree = Tree::new(model);
    let mut sat = Vec::new();
    tree.satisfied_into(&tree.performed_mask(sol), &mut sat);
    sat.iter()
        .enumerate()
        .filter(|(_, s)| **s)
        .map(|(i, _)| tree.ids[i].clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("model has {0} tasks; the brute-force oracle accepts at most {max}", max = ORACLE_MAX_TASKS)]
    TooManyTasks(usize),
}

enum MaskFormula {
    Lit(u32),
    And(Vec<MaskFormula>),
    Or(Vec<MaskFormula>),
}

impl MaskFormula {
    fn from(f: &Formula, bit: &BTreeMap<&NodeId, u32>) -> Self {
        match f {
            Formula::Task(t) => MaskFormula::Lit(bit[t]),
            Formula::And(fs) => MaskFormula::And(fs.iter().map(|f| Self::from(f, bit)).collect()),
            Formula::Or(fs) => MaskFormula::Or(fs.iter().map(|f| Self::from(f, bit)).collect()),
        }
    }

    fn eval(&self, mask: u32) -> bool {
        match self {
            MaskFormula::Lit(b) => mask & b != 0,
            MaskFormula::And(fs) => fs.iter().all(|f| f.eval(mask)),
            MaskFormula::Or(fs) => fs.iter().any(|f| f.eval(mask)),
        }
    }
}

/// Brute-force enumeration over every subset of tasks, used as a test
/// oracle for [`enumerate_solutions`].
///
/// Keeps the subsets that satisfy `T_g` and are minimal: dropping any one
/// task falsifies `T_g`. Since `T_g` is monotone, single-task removal
/// suffices for minimality.
pub fn oracle_enumerate(model: &GoalModel) -> Result<Vec<Solution>, OracleError> {
    let tasks: Vec<&NodeId> = model.tasks().collect();
    if tasks.len() > ORACLE_MAX_TASKS {
        return Err(OracleError::TooManyTasks(tasks.len()));
    }
    let bit: BTreeMap<&NodeId, u32> = tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (*t, 1u32 << i))
        .collect();
    let tg = MaskFormula::from(&compile_tg(model), &bit);
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << tasks.len()) {
        if !tg.eval(mask) {
            continue;
        }
        let minimal = (0..tasks.len())
            .filter(|i| mask & (1 << i) != 0)
            .all(|i| !tg.eval(mask & !(1 << i)));
        if minimal {
            out.push(Solution::new(
                (0..tasks.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| tasks[i].clone()),
            ));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Renders `T_g` for display, e.g. `t1 OR (t2 AND t3 AND t4)`.
pub fn describe_tg(model: &GoalModel, id: &NodeId) -> String {
    alloc::format!("{}", formula_of(model, id))
}
