//! Answer sets of stratified ground disjunctive programs.
//!
//! Predicates are split into strata so that negation only looks at lower
//! strata. Each stratum is solved by branching on the disjunctive heads and
//! keeping the minimal models, which for such programs are exactly the
//! answer sets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::syntax::{Atom, Literal, Program, Rule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerSet {
    pub atoms: BTreeSet<Atom>,
    /// Total weight per priority level.
    pub cost: BTreeMap<i64, i64>,
}

impl AnswerSet {
    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    /// Cost at a level, 0 if nothing was paid there.
    pub fn cost_at(&self, level: i64) -> i64 {
        self.cost.get(&level).copied().unwrap_or(0)
    }

    /// Higher levels first, lower cost wins.
    pub fn cost_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let levels: BTreeSet<i64> = self.cost.keys().chain(other.cost.keys()).copied().collect();
        for l in levels.into_iter().rev() {
            match self.cost_at(l).cmp(&other.cost_at(l)) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("program is not stratified: `{0}` depends negatively on itself")]
    NotStratified(String),
    #[error("more than {0} candidate models; the program is too large for this evaluator")]
    TooLarge(usize),
}

/// Upper bound on intermediate models kept while branching.
pub const MODEL_LIMIT: usize = 200_000;

fn strata(program: &Program) -> Result<Vec<Vec<&Rule>>, SolveError> {
    let mut level: HashMap<(&str, usize), usize> = HashMap::new();
    for r in &program.rules {
        for a in r.head.iter().chain(r.body.iter().map(|l| &l.atom)) {
            level.entry(a.signature()).or_insert(0);
        }
    }
    for w in &program.weak {
        for l in &w.body {
            level.entry(l.atom.signature()).or_insert(0);
        }
    }
    let n = level.len();
    let mut changed = true;
    while changed {
        changed = false;
        for r in &program.rules {
            let mut need = r.head.iter().map(|h| level[&h.signature()]).max().unwrap_or(0);
            for l in &r.body {
                let b = level[&l.atom.signature()];
                need = need.max(if l.negated { b + 1 } else { b });
            }
            for h in &r.head {
                let e = level.get_mut(&h.signature()).expect("collected above");
                if *e < need {
                    if need > n {
                        return Err(SolveError::NotStratified(h.predicate.clone()));
                    }
                    *e = need;
                    changed = true;
                }
            }
        }
    }
    let top = level.values().copied().max().unwrap_or(0);
    let mut out = vec![Vec::new(); top + 1];
    for r in &program.rules {
        out[level[&r.head[0].signature()]].push(r);
    }
    Ok(out)
}

fn holds(lit: &Literal, base: &BTreeSet<Atom>, local: &BTreeSet<Atom>) -> bool {
    let present = base.contains(&lit.atom) || local.contains(&lit.atom);
    present != lit.negated
}

/// All minimal models of `rules` on top of the fixed interpretation `base`.
fn minimal_models(rules: &[&Rule], base: &BTreeSet<Atom>) -> Result<Vec<BTreeSet<Atom>>, SolveError> {
    let mut done: Vec<BTreeSet<Atom>> = Vec::new();
    let mut stack = vec![BTreeSet::new()];
    while let Some(mut local) = stack.pop() {
        // Propagate definite rules to a fixpoint, then branch on the first
        // violated disjunction.
        let branch = loop {
            let mut grew = false;
            let mut pending = None;
            for r in rules {
                if !r.body.iter().all(|l| holds(l, base, &local)) {
                    continue;
                }
                if r.head.iter().any(|h| base.contains(h) || local.contains(h)) {
                    continue;
                }
                if r.head.len() == 1 {
                    local.insert(r.head[0].clone());
                    grew = true;
                } else if pending.is_none() {
                    pending = Some(*r);
                }
            }
            if !grew {
                break pending;
            }
        };
        match branch {
            None => done.push(local),
            Some(rule) => {
                for h in &rule.head {
                    let mut next = local.clone();
                    next.insert(h.clone());
                    stack.push(next);
                }
            }
        }
        if done.len() + stack.len() > MODEL_LIMIT {
            return Err(SolveError::TooLarge(MODEL_LIMIT));
        }
    }
    done.sort();
    done.dedup();
    let minimal = done
        .iter()
        .filter(|m| !done.iter().any(|o| o != *m && o.is_subset(m)))
        .cloned()
        .collect();
    Ok(minimal)
}

/// Every answer set of a stratified program, with weak-constraint costs.
pub fn answer_sets(program: &Program) -> Result<Vec<AnswerSet>, SolveError> {
    let mut models = vec![BTreeSet::new()];
    for stratum in strata(program)? {
        if stratum.is_empty() {
            continue;
        }
        let mut next = Vec::new();
        for base in &models {
            for local in minimal_models(&stratum, base)? {
                let mut m = base.clone();
                m.extend(local);
                next.push(m);
            }
            if next.len() > MODEL_LIMIT {
                return Err(SolveError::TooLarge(MODEL_LIMIT));
            }
        }
        models = next;
    }
    let empty = BTreeSet::new();
    Ok(models
        .into_iter()
        .map(|atoms| {
            let mut cost = BTreeMap::new();
            for w in &program.weak {
                if w.body.iter().all(|l| holds(l, &atoms, &empty)) {
                    *cost.entry(w.level).or_insert(0) += w.weight;
                }
            }
            AnswerSet { atoms, cost }
        })
        .collect())
}

/// Answer sets of minimum cost.
pub fn optimal_answer_sets(program: &Program) -> Result<Vec<AnswerSet>, SolveError> {
    let all = answer_sets(program)?;
    let Some(best) = all.iter().min_by(|a, b| a.cost_cmp(b)).cloned() else {
        return Ok(all);
    };
    Ok(all
        .into_iter()
        .filter(|a| a.cost_cmp(&best).is_eq())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::syntax::parse_program;
    use super::*;

    fn atom(s: &str) -> Atom {
        parse_program(&format!("{s}.")).unwrap().rules[0].head[0].clone()
    }

    #[test]
    fn disjunction_gives_one_model_per_branch() {
        let p = parse_program("r. a v b :- r. c :- a.").unwrap();
        let sets = answer_sets(&p).unwrap();
        assert_eq!(sets.len(), 2);
        assert!(sets.iter().any(|s| s.contains(&atom("c"))));
    }

    #[test]
    fn minimality_filters_supersets() {
        // {a} is a model; {b, a} reached via b is not minimal.
        let p = parse_program("a v b. a :- b.").unwrap();
        let sets = answer_sets(&p).unwrap();
        assert_eq!(sets.len(), 1);
        assert!(sets[0].contains(&atom("a")));
        assert!(!sets[0].contains(&atom("b")));
    }

    #[test]
    fn negation_and_costs() {
        let p = parse_program("a v b. c :- not a. :~ c. [5@1] :~ a. [3@1]").unwrap();
        let best = optimal_answer_sets(&p).unwrap();
        assert_eq!(best.len(), 1);
        assert!(best[0].contains(&atom("a")));
        assert_eq!(best[0].cost_at(1), 3);
    }

    #[test]
    fn unstratified_rejected() {
        let p = parse_program("a :- not b. b :- not a.").unwrap();
        assert!(matches!(answer_sets(&p), Err(SolveError::NotStratified(_))));
    }
}
