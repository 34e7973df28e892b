//! Export of a ranking problem as a disjunctive logic program with weak
//! constraints, plus a small evaluator for checking the exported text.
//!
//! The program has one answer set per candidate solution. Its cost is
//! `offset - scale * psd`, so the optimal answer sets are the top-ranked
//! solutions. Both numbers are recorded as `% scale:` and `% offset:`
//! comments.

pub mod solve;
pub mod syntax;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use goalrank_core::{
    bind, resolve, validate_model, BoundCatalogue, ContextSchema, EffectiveScores, GoalModel, NodeId, NodeKind,
    Operator, Polarity, PreferenceCatalogue, RankError, ScoringMode, Situation, Solution,
};
use num_integer::Integer;

use solve::{answer_sets, AnswerSet, SolveError};
use syntax::{parse_program, Atom, Program, SyntaxError, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AspProgram {
    pub text: String,
    /// Weights are `scale` times the exact scores, so that fractional
    /// contributions become integers.
    pub scale: i64,
    /// `cost = offset - scale * psd`.
    pub offset: i64,
}

/// Renders an identifier as an ASP constant, quoting it when it does not
/// start with a lowercase letter or collides with a keyword.
pub fn asp_term(id: &str) -> String {
    let bare = id.chars().next().is_some_and(|c| c.is_ascii_lowercase()) && id != "not" && id != "v";
    if bare {
        id.to_string()
    } else {
        format!("\"{id}\"")
    }
}

/// Validates, binds and exports.
pub fn export_asp(
    model: &GoalModel,
    catalogue: &PreferenceCatalogue,
    schema: &ContextSchema,
    situation: &Situation,
    mode: ScoringMode,
) -> Result<AspProgram, RankError> {
    let diags = validate_model(model);
    if !diags.is_empty() {
        return Err(RankError::Model(diags));
    }
    let bound = bind(catalogue, model, schema).map_err(RankError::Bind)?;
    Ok(export_bound(model, &bound, situation, mode))
}

fn lcm_upto(n: usize) -> i64 {
    (1..=n as i64).fold(1, |acc, k| acc.lcm(&k))
}

/// Scaled contribution of a softgoal with `p` fired makes and `n` breaks.
fn scaled_contrib(p: i64, n: i64, score: i64, scale: i64, mode: ScoringMode) -> i64 {
    if p + n == 0 {
        return 0;
    }
    match mode {
        ScoringMode::Proportional => scale / (p + n) * (p - n) * score,
        ScoringMode::Dominance => match (p > 0, n > 0) {
            (true, false) => scale * score,
            (false, true) => -scale * score,
            _ => 0,
        },
    }
}

pub fn export_bound(model: &GoalModel, bound: &BoundCatalogue, situation: &Situation, mode: ScoringMode) -> AspProgram {
    let (relevant, _, effective) = resolve(model, bound, situation);
    export_with(model, &relevant, &effective, situation, mode)
}

fn export_with(
    model: &GoalModel,
    relevant: &[goalrank_core::PreferenceId],
    effective: &EffectiveScores,
    situation: &Situation,
    mode: ScoringMode,
) -> AspProgram {
    let mut links: BTreeMap<&NodeId, Vec<(&NodeId, Polarity)>> = BTreeMap::new();
    for l in model.contributions() {
        links.entry(&l.target).or_default().push((&l.source, l.polarity));
    }
    let max_links = links.values().map(Vec::len).max().unwrap_or(0);
    let scale = lcm_upto(max_links.max(1));

    let hard_targets: Vec<(&NodeId, i64)> = effective
        .hardgoal
        .iter()
        .filter(|(id, _)| model.kind(id.as_str()).is_some_and(NodeKind::is_hard))
        .map(|(id, s)| (id, i64::from(*s)))
        .collect();
    let offset = scale
        * (effective.softgoal.values().map(|s| i64::from(*s)).sum::<i64>()
            + hard_targets.iter().map(|(_, s)| s).sum::<i64>());

    let t = |id: &NodeId| asp_term(id.as_str());
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "% situation: {situation}");
    let _ = writeln!(w, "% mode: {}", mode.name());
    let _ = writeln!(w, "% scale: {scale}");
    let _ = writeln!(w, "% offset: {offset}");
    let _ = writeln!(w, "% cost = offset - scale * psd");
    let _ = writeln!(w);

    let _ = writeln!(w, "% nodes");
    for n in model.nodes().values() {
        let _ = writeln!(w, "node({},{}).", t(&n.id), n.kind.keyword());
    }
    for (e, v) in situation.entries() {
        let _ = writeln!(w, "situation({},{}).", asp_term(e), asp_term(v));
    }
    for p in relevant {
        let _ = writeln!(w, "relevant({}).", asp_term(p.as_str()));
    }
    for l in model.contributions() {
        let _ = writeln!(w, "contrib({},{},{}).", t(&l.source), t(&l.target), l.polarity.keyword());
    }
    for (sg, s) in &effective.softgoal {
        let _ = writeln!(w, "softgoal_score({},{s}).", t(sg));
    }
    for (hg, s) in &hard_targets {
        let _ = writeln!(w, "hardgoal_score({},{s}).", t(hg));
    }

    let _ = writeln!(w, "\n% AND/OR structure");
    let _ = writeln!(w, "sat({}).", t(model.root()));
    for (parent, d) in model.decompositions() {
        match d.operator {
            Operator::And => {
                for c in &d.children {
                    let _ = writeln!(w, "sat({}) :- sat({}).", t(c), t(parent));
                }
            }
            Operator::Or => {
                let heads: Vec<String> = d.children.iter().map(|c| format!("sat({})", t(c))).collect();
                let _ = writeln!(w, "{} :- sat({}).", heads.join(" v "), t(parent));
            }
        }
    }

    for (sg, &score) in &effective.softgoal {
        let score = i64::from(score);
        let sg_links = links.get(sg).map(Vec::as_slice).unwrap_or_default();
        let name = t(sg);
        let _ = writeln!(w, "\n% fired links of {sg}: lc(sg, step, makes, breaks)");
        let _ = writeln!(w, "lc({name},0,0,0).");
        let mut states: BTreeSet<(i64, i64)> = BTreeSet::from([(0, 0)]);
        for (i, (src, pol)) in sg_links.iter().enumerate() {
            let mut next = BTreeSet::new();
            for &(p, n) in &states {
                let fired = match pol {
                    Polarity::Make => (p + 1, n),
                    Polarity::Break => (p, n + 1),
                };
                let body = format!("lc({name},{i},{p},{n})");
                let _ = writeln!(w, "lc({name},{},{},{}) :- {body}, sat({}).", i + 1, fired.0, fired.1, t(src));
                let _ = writeln!(w, "lc({name},{},{p},{n}) :- {body}, not sat({}).", i + 1, t(src));
                next.insert(fired);
                next.insert((p, n));
            }
            states = next;
        }
        let last = sg_links.len();
        for (p, n) in states {
            let weight = scale * score - scaled_contrib(p, n, score, scale, mode);
            if weight != 0 {
                let _ = writeln!(w, ":~ lc({name},{last},{p},{n}). [{weight}@1]");
            }
        }
    }

    if !hard_targets.is_empty() {
        let _ = writeln!(w, "\n% preferred tasks and hardgoals");
    }
    for (hg, s) in &hard_targets {
        let weight = scale * s;
        if weight != 0 {
            let _ = writeln!(w, ":~ not sat({}). [{weight}@1]", t(hg));
        }
    }

    AspProgram { text: out, scale, offset }
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("missing or malformed `% {0}:` annotation")]
    Annotation(&'static str),
}

/// A parsed and solved export.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub program: Program,
    pub scale: i64,
    pub offset: i64,
    pub answer_sets: Vec<AnswerSet>,
}

impl Evaluated {
    /// Tasks made true by an answer set.
    pub fn tasks_of(&self, set: &AnswerSet) -> Solution {
        let tasks: BTreeSet<String> = self
            .program
            .rules
            .iter()
            .filter(|r| r.body.is_empty() && r.head.len() == 1 && r.head[0].predicate == "node")
            .filter_map(|r| match r.head[0].args.as_slice() {
                [id, Term::Const(k)] if k == "task" => Some(id.clone()),
                _ => None,
            })
            .filter(|id| set.contains(&Atom::new("sat", vec![id.clone()])))
            .map(|id| match id {
                Term::Const(s) | Term::Str(s) => s,
                Term::Int(n) => n.to_string(),
            })
            .collect();
        Solution::new(tasks.into_iter().map(NodeId::new_unchecked))
    }

    /// Level-1 cost of the answer set whose tasks are `sol`.
    pub fn cost_of(&self, sol: &Solution) -> Option<i64> {
        self.answer_sets
            .iter()
            .find(|a| &self.tasks_of(a) == sol)
            .map(|a| a.cost_at(1))
    }

    /// `(offset - cost) / scale`, i.e. the psd encoded by a cost.
    pub fn psd_of_cost(&self, cost: i64) -> goalrank_core::Rational {
        goalrank_core::Rational::new(self.offset - cost, self.scale)
    }
}

/// Parses an exported program, checks its annotations and computes all of
/// its answer sets.
pub fn evaluate(text: &str) -> Result<Evaluated, CheckError> {
    let program = parse_program(text)?;
    let num = |key: &'static str| {
        program
            .annotation(key)
            .and_then(|v| v.parse::<i64>().ok())
            .ok_or(CheckError::Annotation(key))
    };
    let scale = num("scale")?;
    let offset = num("offset")?;
    if scale <= 0 {
        return Err(CheckError::Annotation("scale"));
    }
    let answer_sets = answer_sets(&program)?;
    Ok(Evaluated {
        program,
        scale,
        offset,
        answer_sets,
    })
}

/// Checks `-scale * psd == cost - offset` for each ranked solution and
/// that answer sets correspond one-to-one to solutions. Returns the
/// mismatching solutions.
pub fn closed_loop_mismatches(program: &AspProgram, report: &goalrank_core::RankingReport) -> Result<Vec<String>, CheckError> {
    let ev = evaluate(&program.text)?;
    let mut bad = Vec::new();
    if ev.answer_sets.len() != report.solutions.len() {
        bad.push(format!(
            "{} answer sets for {} solutions",
            ev.answer_sets.len(),
            report.solutions.len()
        ));
    }
    for s in &report.solutions {
        match ev.cost_of(&s.solution) {
            None => bad.push(format!("{}: no answer set", s.solution)),
            Some(cost) => {
                let expected = -s.psd * goalrank_core::Rational::from_integer(ev.scale);
                let got = goalrank_core::Rational::from_integer(cost - ev.offset);
                if expected != got {
                    bad.push(format!("{}: cost - offset = {got}, expected {expected}", s.solution));
                }
            }
        }
    }
    Ok(bad)
}
