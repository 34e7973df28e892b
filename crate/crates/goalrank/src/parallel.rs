//! Multi-threaded ranking.

use goalrank_core::{
    enumerate_solutions_capped, resolve, BoundCatalogue, CapExceeded, GoalModel, Ranker, ScoredSolution, ScoringMode,
    Situation,
};
use rayon::prelude::*;

/// Same result as [`goalrank_core::rank_bound`]'s solution list, with
/// scoring and sorting spread over the rayon pool.
pub fn rank_parallel(
    model: &GoalModel,
    bound: &BoundCatalogue,
    situation: &Situation,
    mode: ScoringMode,
    cap: usize,
) -> Result<Vec<ScoredSolution>, CapExceeded> {
    let sols = enumerate_solutions_capped(model, cap)?;
    let (_, _, effective) = resolve(model, bound, situation);
    let ranker = Ranker::new(model, &effective, mode);
    let mut scored: Vec<ScoredSolution> = sols.into_par_iter().map(|s| ranker.score(s)).collect();
    scored.par_sort_by(|a, b| a.rank_cmp(b));
    Ok(scored)
}
