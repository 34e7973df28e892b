//! Model cloning and the timing harness.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use goalrank_core::{
    enumerate_solutions_capped, resolve, solution_count, solutions, Action, BoundCatalogue, CapExceeded,
    ContextualPreference, ContributionLink, Decomposition, GoalModel, GoalNode, NodeId, NodeKind, Operator,
    PreferenceCatalogue, Ranker, ScoredSolution, ScoringMode, Situation, DEFAULT_SOLUTION_CAP,
};

use crate::dsl::Doc;

/// `k` disjoint copies of `model` (ids suffixed `_1..=k`) under a fresh AND
/// root, and the catalogue duplicated once per copy with remapped targets.
pub fn clone_model(model: &GoalModel, catalogue: &PreferenceCatalogue, k: usize) -> (GoalModel, PreferenceCatalogue) {
    assert!(k >= 1, "clone_model needs k >= 1");
    let mut nodes = BTreeMap::new();
    let mut decompositions = BTreeMap::new();
    let mut links = Vec::new();
    let mut prefs = Vec::new();
    let mut root = NodeId::new_unchecked("root");
    let mut roots = Vec::new();
    for i in 1..=k {
        let s = |id: &NodeId| id.suffixed(i);
        for n in model.nodes().values() {
            let id = s(&n.id);
            nodes.insert(
                id.clone(),
                GoalNode {
                    id,
                    kind: n.kind,
                    label: n.label.clone(),
                },
            );
        }
        for (parent, d) in model.decompositions() {
            decompositions.insert(
                s(parent),
                Decomposition {
                    operator: d.operator,
                    children: d.children.iter().map(s).collect(),
                },
            );
        }
        links.extend(model.contributions().iter().map(|l| ContributionLink {
            source: s(&l.source),
            target: s(&l.target),
            polarity: l.polarity,
        }));
        prefs.extend(catalogue.preferences().iter().map(|p| ContextualPreference {
            id: p.id.suffixed(i),
            actions: p
                .actions
                .iter()
                .map(|a| Action {
                    verb: a.verb,
                    target: s(&a.target),
                })
                .collect(),
            con: p.con.clone(),
            score: p.score,
        }));
        roots.push(s(model.root()));
    }
    while nodes.contains_key(&root) {
        root = NodeId::new_unchecked(format!("{root}_"));
    }
    nodes.insert(
        root.clone(),
        GoalNode {
            id: root.clone(),
            kind: NodeKind::Hardgoal,
            label: String::new(),
        },
    );
    decompositions.insert(
        root.clone(),
        Decomposition {
            operator: Operator::And,
            children: roots,
        },
    );
    let model = GoalModel::from_parts(nodes, root, decompositions, links);
    let catalogue = PreferenceCatalogue::new(prefs).expect("suffixed ids stay unique");
    (model, catalogue)
}

#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    pub k_max: usize,
    /// Measured runs per size; one extra warm-up run is discarded.
    pub runs: usize,
    pub mode: ScoringMode,
    /// Also time the multi-threaded ranking path.
    pub parallel: bool,
    pub cap: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            k_max: 5,
            runs: 20,
            mode: ScoringMode::Proportional,
            parallel: false,
            cap: DEFAULT_SOLUTION_CAP,
        }
    }
}

/// One size of the cloned family. Times are mean seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub k: usize,
    pub n_hardgoals: usize,
    pub n_softgoals: usize,
    pub n_contrib_links: usize,
    pub n_var_points: usize,
    /// Single-action preferences after splitting combined actions.
    pub n_prefs: usize,
    pub n_solutions: u128,
    pub t_enumerate: f64,
    /// `t_rank_all - t_enumerate`.
    pub t_preference_reasoning: f64,
    pub t_rank_all: f64,
    pub t_first_solution: f64,
    /// Completion of a full ranking pass.
    pub t_optimal: f64,
    /// Completion of a streaming best-so-far pass.
    pub t_optimal_streaming: f64,
    pub t_rank_parallel: Option<f64>,
    /// Top-ranked solution, for sanity checks.
    pub best: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub runs: usize,
    pub mode: ScoringMode,
    pub rows: Vec<BenchRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    CapExceeded(#[from] CapExceeded),
    #[error("k_max and runs must be at least 1")]
    BadOptions,
    #[error("preference catalogue does not bind ({} problems)", .0.len())]
    Bind(Vec<goalrank_core::BindDiagnostic>),
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Rank every solution of `model` for `situation` on the current thread,
/// returning `(enumeration time, total time, ranking)`.
fn timed_rank(
    model: &GoalModel,
    bound: &BoundCatalogue,
    situation: &Situation,
    mode: ScoringMode,
    cap: usize,
) -> Result<(Duration, Duration, Vec<ScoredSolution>), CapExceeded> {
    let start = Instant::now();
    let sols = enumerate_solutions_capped(model, cap)?;
    let enumerated = start.elapsed();
    let (_, _, effective) = resolve(model, bound, situation);
    let ranker = Ranker::new(model, &effective, mode);
    let mut scored: Vec<ScoredSolution> = sols.into_iter().map(|s| ranker.score(s)).collect();
    Ranker::sort(&mut scored);
    Ok((enumerated, start.elapsed(), scored))
}

fn first_solution(model: &GoalModel, bound: &BoundCatalogue, situation: &Situation, mode: ScoringMode) -> Duration {
    let start = Instant::now();
    let (_, _, effective) = resolve(model, bound, situation);
    let ranker = Ranker::new(model, &effective, mode);
    if let Some(s) = solutions(model).next() {
        std::hint::black_box(ranker.score(s));
    }
    start.elapsed()
}

fn streaming_best(model: &GoalModel, bound: &BoundCatalogue, situation: &Situation, mode: ScoringMode) -> Duration {
    let start = Instant::now();
    let (_, _, effective) = resolve(model, bound, situation);
    let ranker = Ranker::new(model, &effective, mode);
    let mut best: Option<ScoredSolution> = None;
    for s in solutions(model) {
        let scored = ranker.score(s);
        if best.as_ref().map_or(true, |b| scored.rank_cmp(b).is_lt()) {
            best = Some(scored);
        }
    }
    std::hint::black_box(best);
    start.elapsed()
}

/// Times ranking on the original model (row 1) and its `k`-fold clones for
/// `k = 2..=k_max`.
pub fn run_bench(
    model: &GoalModel,
    catalogue: &PreferenceCatalogue,
    schema: &goalrank_core::ContextSchema,
    situation: &Situation,
    opts: BenchOptions,
) -> Result<BenchReport, BenchError> {
    if opts.k_max == 0 || opts.runs == 0 {
        return Err(BenchError::BadOptions);
    }
    let mut rows = Vec::new();
    for k in 1..=opts.k_max {
        let (m, c) = if k == 1 {
            (model.clone(), catalogue.clone())
        } else {
            clone_model(model, catalogue, k)
        };
        let bound = goalrank_core::bind(&c, &m, schema).map_err(BenchError::Bind)?;
        let mut sum = [0f64; 5];
        let mut best = Vec::new();
        for run in 0..=opts.runs {
            let (te, ta, ranked) = timed_rank(&m, &bound, situation, opts.mode, opts.cap)?;
            let tf = first_solution(&m, &bound, situation, opts.mode);
            let ts = streaming_best(&m, &bound, situation, opts.mode);
            let tp = if opts.parallel {
                let start = Instant::now();
                std::hint::black_box(crate::parallel::rank_parallel(&m, &bound, situation, opts.mode, opts.cap)?);
                secs(start.elapsed())
            } else {
                0.0
            };
            if run == 0 {
                best = ranked[0].solution.tasks.iter().map(|t| t.to_string()).collect();
                continue;
            }
            for (acc, v) in sum.iter_mut().zip([secs(te), secs(ta), secs(tf), secs(ts), tp]) {
                *acc += v;
            }
        }
        let n = opts.runs as f64;
        let [te, ta, tf, ts, tp] = sum.map(|v| v / n);
        rows.push(BenchRow {
            k,
            n_hardgoals: m.hardgoal_count(),
            n_softgoals: m.softgoals().count(),
            n_contrib_links: m.contributions().len(),
            n_var_points: m.variability_points().count(),
            n_prefs: c.action_count(),
            n_solutions: solution_count(&m),
            t_enumerate: te,
            t_preference_reasoning: ta - te,
            t_rank_all: ta,
            t_first_solution: tf,
            t_optimal: ta,
            t_optimal_streaming: ts,
            t_rank_parallel: opts.parallel.then_some(tp),
            best,
        });
    }
    Ok(BenchReport {
        runs: opts.runs,
        mode: opts.mode,
        rows,
    })
}

impl BenchReport {
    /// Aligned text table, one row per size.
    pub fn table(&self) -> String {
        let parallel = self.rows.iter().any(|r| r.t_rank_parallel.is_some());
        let mut header = vec![
            "k", "N_HG", "N_SG", "N_CL", "N_VP", "N_CP", "N_Sol", "T_NS", "T_PR", "T_OS", "T_FNS", "T_FOS", "T_FOS_stream",
        ];
        if parallel {
            header.push("T_OS_par");
        }
        let mut rows: Vec<Vec<String>> = Vec::new();
        for r in &self.rows {
            let t = |v: f64| format!("{v:.3}");
            let mut row = vec![
                r.k.to_string(),
                r.n_hardgoals.to_string(),
                r.n_softgoals.to_string(),
                r.n_contrib_links.to_string(),
                r.n_var_points.to_string(),
                r.n_prefs.to_string(),
                r.n_solutions.to_string(),
                t(r.t_enumerate),
                t(r.t_preference_reasoning),
                t(r.t_rank_all),
                t(r.t_first_solution),
                t(r.t_optimal),
                t(r.t_optimal_streaming),
            ];
            if parallel {
                row.push(r.t_rank_parallel.map_or_else(|| "-".into(), t));
            }
            rows.push(row);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let line = |cells: Vec<&str>, out: &mut String| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(header.clone(), &mut out);
        for r in &rows {
            line(r.iter().map(String::as_str).collect(), &mut out);
        }
        let _ = writeln!(out, "times in seconds, mean of {} runs", self.runs);
        out
    }

    pub fn doc(&self) -> Doc {
        let ms = |v: f64| Doc::str(format!("{v:.3}"));
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut entries = vec![
                    ("k", Doc::Int(r.k as i64)),
                    ("n_hardgoals", Doc::Int(r.n_hardgoals as i64)),
                    ("n_softgoals", Doc::Int(r.n_softgoals as i64)),
                    ("n_contrib_links", Doc::Int(r.n_contrib_links as i64)),
                    ("n_var_points", Doc::Int(r.n_var_points as i64)),
                    ("n_prefs", Doc::Int(r.n_prefs as i64)),
                    ("n_solutions", Doc::str(r.n_solutions.to_string())),
                    ("t_enumerate", ms(r.t_enumerate)),
                    ("t_preference_reasoning", ms(r.t_preference_reasoning)),
                    ("t_rank_all", ms(r.t_rank_all)),
                    ("t_first_solution", ms(r.t_first_solution)),
                    ("t_optimal", ms(r.t_optimal)),
                    ("t_optimal_streaming", ms(r.t_optimal_streaming)),
                    ("best", Doc::strs(r.best.iter())),
                ];
                if let Some(p) = r.t_rank_parallel {
                    entries.push(("t_rank_parallel", ms(p)));
                }
                Doc::map(entries)
            })
            .collect();
        Doc::map([
            ("runs", Doc::Int(self.runs as i64)),
            ("mode", Doc::str(self.mode.name())),
            ("rows", Doc::List(rows)),
        ])
    }
}
