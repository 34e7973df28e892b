//! Reasoning core for contextual preferences over AND/OR goal models.
//!
//! A [`GoalModel`] is a tree of hardgoals and tasks joined by AND/OR
//! decompositions, plus make/break contribution links into softgoals. Its
//! candidate solutions are the task sets obtained by choosing exactly one
//! branch at every reachable OR node. A [`PreferenceCatalogue`] attaches
//! integer scores to `satisfy`/`perform` actions under context assertions;
//! given a concrete [`Situation`], the relevant preferences are selected,
//! resolved to one score per target (highest wins), and every solution is
//! scored by its softgoal and hardgoal preference scores.
//!
//! The crate is `no_std` and only needs `alloc`. Text formats, the ASP
//! exporter, benchmarks, the CLI and the HTTP service live in the `goalrank`
//! crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod context;
pub mod ident;
pub mod model;
pub mod preference;
pub mod rational;
pub mod scoring;
pub mod semantics;

pub use context::{
    expand_assertion, implies, relevant, CombinedAssertion, ContextElement, ContextError,
    ContextInstance, ContextSchema, ContextValue, RelevantPreference, Situation, ALL,
};
pub use ident::{is_identifier, IdentError, NodeId, PreferenceId};
pub use model::{
    validate_model, ContributionLink, Decomposition, GoalModel, GoalModelBuilder, GoalNode,
    ModelDiagnostic, ModelRule, NodeKind, Operator, Polarity,
};
pub use preference::{
    bind, Action, BindDiagnostic, BindError, BindWarning, BoundCatalogue, CatalogueError,
    ContextualPreference, PreferenceCatalogue, Score, Verb,
};
pub use rational::{format_rational, format_signed, Rational};
pub use scoring::{
    contrib, contrib_detail, effective_scores, hps, rank, rank_bound, resolve, sps,
    EffectiveScores, RankError, Ranker, RankingReport, ScoredSolution, ScoringMode, SoftgoalTerm,
    UnknownMode,
};
pub use semantics::{
    compile, describe_tg, enumerate_solutions, enumerate_solutions_capped, formula_of,
    is_admissible, is_solution, oracle_enumerate, satisfied_goals, solution_count, solutions,
    CapExceeded, CompiledModel, Formula, OracleError, SignedSoftgoal, Solution, SolutionIter,
    DEFAULT_SOLUTION_CAP, ORACLE_MAX_TASKS,
};
