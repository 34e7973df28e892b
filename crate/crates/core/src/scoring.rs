//! Softgoal and hardgoal preference scores and the ranking of solutions.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_traits::Zero;

use crate::context::{relevant, ContextSchema, Situation};
use crate::ident::{NodeId, PreferenceId};
use crate::model::{validate_model, GoalModel, ModelDiagnostic, NodeKind, Polarity};
use crate::preference::{
    bind, BindDiagnostic, BindWarning, BoundCatalogue, ContextualPreference, PreferenceCatalogue,
    Verb,
};
use crate::rational::Rational;
use crate::semantics::{
    enumerate_solutions_capped, satisfied_goals, CapExceeded, Solution, Tree, DEFAULT_SOLUTION_CAP,
};

/// How fired make/break links are turned into a softgoal contribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum ScoringMode {
    /// `(makes - breaks) / (makes + breaks) * score`.
    #[default]
    Proportional,
    /// `+score` with only makes, `-score` with only breaks, else 0.
    Dominance,
}

impl ScoringMode {
    pub fn name(self) -> &'static str {
        match self {
            ScoringMode::Proportional => "proportional",
            ScoringMode::Dominance => "dominance",
        }
    }
}

impl fmt::Display for ScoringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown scoring mode `{0}` (expected proportional or dominance)")]
pub struct UnknownMode(pub alloc::string::String);

impl FromStr for ScoringMode {
    type Err = UnknownMode;
    fn from_str(s: &str) -> Result<Self, UnknownMode> {
        match s {
            "proportional" => Ok(ScoringMode::Proportional),
            "dominance" => Ok(ScoringMode::Dominance),
            other => Err(UnknownMode(other.into())),
        }
    }
}

/// One resolved score per preferred target: the highest score among the
/// relevant preferences that mention it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EffectiveScores {
    pub softgoal: BTreeMap<NodeId, u8>,
    /// Tasks (`perform`) and hardgoals (`satisfy`).
    pub hardgoal: BTreeMap<NodeId, u8>,
}

impl EffectiveScores {
    pub fn is_empty(&self) -> bool {
        self.softgoal.is_empty() && self.hardgoal.is_empty()
    }
}

/// Resolves relevant preferences into per-target scores.
///
/// `satisfy` on a softgoal feeds the softgoal map; `perform` and every
/// other `satisfy` feed the hardgoal map. Combined actions give their score
/// to each listed target. Targets absent from `model` are skipped.
pub fn effective_scores<'a, I>(relevant: I, model: &GoalModel) -> EffectiveScores
where
    I: IntoIterator<Item = &'a ContextualPreference>,
{
    let mut out = EffectiveScores::default();
    for p in relevant {
        for a in p.actions.iter().filter(|a| model.contains(a.target.as_str())) {
            let to_softgoal = a.verb == Verb::Satisfy
                && model.kind(a.target.as_str()) == Some(NodeKind::Softgoal);
            let map = if to_softgoal {
                &mut out.softgoal
            } else {
                &mut out.hardgoal
            };
            let e = map.entry(a.target.clone()).or_insert(0);
            *e = (*e).max(p.score.get());
        }
    }
    out
}

/// Contribution of one solution to one preferred softgoal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoftgoalTerm {
    /// Fired make links.
    pub makes: u32,
    /// Fired break links.
    pub breaks: u32,
    pub score: u8,
    pub contrib: Rational,
}

fn term(makes: u32, breaks: u32, score: u8, mode: ScoringMode) -> SoftgoalTerm {
    let s = i64::from(score);
    let contrib = match mode {
        _ if makes + breaks == 0 => Rational::zero(),
        ScoringMode::Proportional => Rational::new(
            (i64::from(makes) - i64::from(breaks)) * s,
            i64::from(makes + breaks),
        ),
        ScoringMode::Dominance => match (makes > 0, breaks > 0) {
            (true, false) => Rational::from_integer(s),
            (false, true) => Rational::from_integer(-s),
            _ => Rational::zero(),
        },
    };
    SoftgoalTerm {
        makes,
        breaks,
        score,
        contrib,
    }
}

/// Like [`contrib`], with the fired link counts.
///
/// A link fires when its source (task or hardgoal) is satisfied by `sol`.
pub fn contrib_detail(
    model: &GoalModel,
    sol: &Solution,
    softgoal: &NodeId,
    score: u8,
    mode: ScoringMode,
) -> SoftgoalTerm {
    let sat = satisfied_goals(model, sol);
    let (mut makes, mut breaks) = (0, 0);
    for l in model.contributions() {
        if &l.target == softgoal && sat.contains(&l.source) {
            match l.polarity {
                Polarity::Make => makes += 1,
                Polarity::Break => breaks += 1,
            }
        }
    }
    term(makes, breaks, score, mode)
}

pub fn contrib(
    model: &GoalModel,
    sol: &Solution,
    softgoal: &NodeId,
    score: u8,
    mode: ScoringMode,
) -> Rational {
    contrib_detail(model, sol, softgoal, score, mode).contrib
}

/// Softgoal preference score: the sum of contributions over every
/// softgoal with an effective score.
pub fn sps(
    model: &GoalModel,
    sol: &Solution,
    effective: &EffectiveScores,
    mode: ScoringMode,
) -> Rational {
    effective
        .softgoal
        .iter()
        .map(|(sg, &score)| contrib(model, sol, sg, score, mode))
        .fold(Rational::zero(), |a, b| a + b)
}

/// Hardgoal preference score: the sum of effective scores of the preferred
/// tasks and hardgoals that `sol` satisfies.
pub fn hps(model: &GoalModel, sol: &Solution, effective: &EffectiveScores) -> i64 {
    let sat = satisfied_goals(model, sol);
    effective
        .hardgoal
        .iter()
        .filter(|(hg, _)| sat.contains(*hg))
        .map(|(_, &s)| i64::from(s))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredSolution {
    pub solution: Solution,
    pub per_softgoal: BTreeMap<NodeId, SoftgoalTerm>,
    /// Preferred targets satisfied by the solution, with their scores.
    pub per_hardgoal: BTreeMap<NodeId, i64>,
    pub sps: Rational,
    pub hps: i64,
    /// `sps + hps`.
    pub psd: Rational,
}

impl ScoredSolution {
    /// Best first: higher psd, then fewer tasks, then lexicographic.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .psd
            .cmp(&self.psd)
            .then_with(|| self.solution.tie_break_cmp(&other.solution))
    }
}

/// Scores solutions against fixed effective scores.
///
/// Precomputes node indices once so that scoring a solution is a single
/// bottom-up pass over the decomposition tree.
#[derive(Debug, Clone)]
pub struct Ranker {
    tree: Tree,
    mode: ScoringMode,
    softgoals: Vec<(NodeId, u8, Vec<(usize, Polarity)>)>,
    hardgoals: Vec<(NodeId, Option<usize>, u8)>,
}

impl Ranker {
    pub fn new(model: &GoalModel, effective: &EffectiveScores, mode: ScoringMode) -> Self {
        let tree = Tree::new(model);
        let softgoals = effective
            .softgoal
            .iter()
            .map(|(sg, &score)| {
                let links = model
                    .contributions()
                    .iter()
                    .filter(|l| &l.target == sg)
                    .filter_map(|l| tree.index.get(&l.source).map(|&i| (i, l.polarity)))
                    .collect();
                (sg.clone(), score, links)
            })
            .collect();
        let hardgoals = effective
            .hardgoal
            .iter()
            .map(|(hg, &score)| (hg.clone(), tree.index.get(hg).copied(), score))
            .collect();
        Self {
            tree,
            mode,
            softgoals,
            hardgoals,
        }
    }

    pub fn mode(&self) -> ScoringMode {
        self.mode
    }

    pub fn score(&self, solution: Solution) -> ScoredSolution {
        let mut sat = Vec::new();
        self.tree
            .satisfied_into(&self.tree.performed_mask(&solution), &mut sat);

        let mut per_softgoal = BTreeMap::new();
        let mut sps = Rational::zero();
        for (sg, score, links) in &self.softgoals {
            let (mut makes, mut breaks) = (0, 0);
            for &(src, pol) in links {
                if sat[src] {
                    match pol {
                        Polarity::Make => makes += 1,
                        Polarity::Break => breaks += 1,
                    }
                }
            }
            let t = term(makes, breaks, *score, self.mode);
            sps += t.contrib;
            per_softgoal.insert(sg.clone(), t);
        }

        let mut per_hardgoal = BTreeMap::new();
        let mut hps = 0i64;
        for (hg, idx, score) in &self.hardgoals {
            if idx.is_some_and(|i| sat[i]) {
                hps += i64::from(*score);
                per_hardgoal.insert(hg.clone(), i64::from(*score));
            }
        }

        ScoredSolution {
            solution,
            per_softgoal,
            per_hardgoal,
            sps,
            hps,
            psd: sps + Rational::from_integer(hps),
        }
    }

    /// Sorts into rank order.
    pub fn sort(scored: &mut [ScoredSolution]) {
        scored.sort_by(ScoredSolution::rank_cmp);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingReport {
    pub situation: Situation,
    pub mode: ScoringMode,
    /// Relevant preference ids in catalogue order.
    pub relevant: Vec<PreferenceId>,
    /// Relevant preferences whose every target is outscored by another.
    pub overshadowed: Vec<PreferenceId>,
    pub effective: EffectiveScores,
    pub warnings: Vec<BindWarning>,
    /// In rank order.
    pub solutions: Vec<ScoredSolution>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RankError {
    #[error("goal model is invalid ({} problems)", .0.len())]
    Model(Vec<ModelDiagnostic>),
    #[error("preference catalogue does not bind ({} problems)", .0.len())]
    Bind(Vec<BindDiagnostic>),
    #[error(transparent)]
    CapExceeded(#[from] CapExceeded),
    #[error("goal model has no candidate solutions")]
    EmptyModel,
}

/// Validates, binds, and ranks every candidate solution.
pub fn rank(
    model: &GoalModel,
    catalogue: &PreferenceCatalogue,
    schema: &ContextSchema,
    situation: &Situation,
    mode: ScoringMode,
) -> Result<RankingReport, RankError> {
    let diags = validate_model(model);
    if !diags.is_empty() {
        return Err(RankError::Model(diags));
    }
    let bound = bind(catalogue, model, schema).map_err(RankError::Bind)?;
    rank_bound(model, &bound, situation, mode, DEFAULT_SOLUTION_CAP)
}

/// Relevant ids, overshadowed ids and effective scores for a situation.
pub fn resolve(
    model: &GoalModel,
    bound: &BoundCatalogue,
    situation: &Situation,
) -> (Vec<PreferenceId>, Vec<PreferenceId>, EffectiveScores) {
    let rel = relevant(bound, situation, model);
    let ids = rel.iter().map(|r| r.preference.id.clone()).collect();
    let overshadowed = rel
        .iter()
        .filter(|r| !r.effective)
        .map(|r| r.preference.id.clone())
        .collect();
    let effective = effective_scores(rel.iter().map(|r| r.preference), model);
    (ids, overshadowed, effective)
}

/// Ranks an already validated model with a bound catalogue.
pub fn rank_bound(
    model: &GoalModel,
    bound: &BoundCatalogue,
    situation: &Situation,
    mode: ScoringMode,
    cap: usize,
) -> Result<RankingReport, RankError> {
    let sols = enumerate_solutions_capped(model, cap)?;
    if sols.is_empty() {
        return Err(RankError::EmptyModel);
    }
    let (relevant, overshadowed, effective) = resolve(model, bound, situation);
    let ranker = Ranker::new(model, &effective, mode);
    let mut solutions: Vec<ScoredSolution> = sols.into_iter().map(|s| ranker.score(s)).collect();
    Ranker::sort(&mut solutions);
    Ok(RankingReport {
        situation: situation.clone(),
        mode,
        relevant,
        overshadowed,
        effective,
        warnings: bound.warnings().to_vec(),
        solutions,
    })
}
