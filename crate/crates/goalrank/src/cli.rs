//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when inputs fail validation, 2 on I/O or
//! usage errors. Tables go to standard output, diagnostics to standard
//! error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use goalrank_core::{
    format_rational, format_signed, is_solution, rank_bound, resolve, BoundCatalogue, ContextSchema, GoalModel,
    NodeId, Ranker, RankError, RankingReport, ScoringMode, Situation, Solution, DEFAULT_SOLUTION_CAP,
};

use crate::asp::export_bound;
use crate::bench::{run_bench, BenchOptions};
use crate::dsl::{bind_warnings, serialize_ranking, Code, Diagnostic, SourceSpan, SpannedCatalogue};
use crate::load::{bind_spanned, read_catalogue, read_model, read_schema, read_situation, LoadError};
use crate::service::{self, Store};

#[derive(Debug, Parser)]
#[command(name = "goalrank", version, about = "Rank goal model solutions by contextual preferences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Goal model (`.gm`).
    #[arg(long)]
    pub model: PathBuf,
    /// Context schema (`.ctx`).
    #[arg(long)]
    pub schema: PathBuf,
    /// Preference catalogue (`.prefs`).
    #[arg(long)]
    pub catalogue: PathBuf,
    /// Situation (`.sit`).
    #[arg(long)]
    pub situation: PathBuf,
    #[arg(long, env = "GOALRANK_MODE", default_value = "proportional")]
    pub mode: ScoringMode,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank every candidate solution.
    Rank {
        #[command(flatten)]
        inputs: Inputs,
        /// Show only the best N solutions.
        #[arg(long)]
        top: Option<usize>,
        /// Also write the ranking as a `.rank` document.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Break down the scores of one solution.
    Explain {
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated task ids, e.g. `t5,t7,t9`.
        #[arg(long)]
        solution: String,
    },
    /// Check a model, and optionally a schema and catalogue against it.
    Validate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, requires = "catalogue")]
        schema: Option<PathBuf>,
        #[arg(long, requires = "schema")]
        catalogue: Option<PathBuf>,
    },
    /// Write the ranking problem as a disjunctive logic program.
    ExportAsp {
        #[command(flatten)]
        inputs: Inputs,
        /// Output `.dl` file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time enumeration and ranking on clones of the model.
    Bench {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 5)]
        kmax: usize,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        /// Also time the multi-threaded ranking path.
        #[arg(long)]
        parallel: bool,
        /// Also write the report as a structured document.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Preload each subdirectory holding model.gm, schema.ctx and
        /// catalogue.prefs as a workspace.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

/// How a command failed.
#[derive(Debug)]
enum Failure {
    Invalid(Vec<Diagnostic>),
    Io(Vec<Diagnostic>),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
        }
    }

    fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            Failure::Invalid(d) | Failure::Io(d) => d,
        }
    }

    fn io(path: &Path, message: impl std::fmt::Display) -> Self {
        Failure::Io(vec![Diagnostic::error(
            Code::Io,
            SourceSpan::start(&path.display().to_string()),
            message.to_string(),
        )])
    }

    fn rank(file: &Path, err: RankError) -> Self {
        Failure::Invalid(vec![Diagnostic::error(
            Code::Rank,
            SourceSpan::start(&file.display().to_string()),
            err.to_string(),
        )])
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { path, source } => Failure::io(&path, source),
            LoadError::Invalid(d) => Failure::Invalid(d.0),
        }
    }
}

struct Loaded {
    model: GoalModel,
    schema: ContextSchema,
    catalogue: SpannedCatalogue,
    bound: BoundCatalogue,
    situation: Situation,
}

/// Loads all four inputs, collecting diagnostics from every file before
/// giving up.
fn load(inputs: &Inputs, err: &mut dyn Write) -> Result<Loaded, Failure> {
    let model = read_model(&inputs.model);
    let schema = read_schema(&inputs.schema);
    let catalogue = read_catalogue(&inputs.catalogue);
    let situation = match &schema {
        Ok(s) => Some(read_situation(&inputs.situation, s)),
        Err(_) => None,
    };
    let mut io = Vec::new();
    let mut invalid = Vec::new();
    let mut note = |e: LoadError| match Failure::from(e) {
        Failure::Io(d) => io.extend(d),
        Failure::Invalid(d) => invalid.extend(d),
    };
    let model = model.map_err(&mut note).ok();
    let schema = schema.map_err(&mut note).ok();
    let catalogue = catalogue.map_err(&mut note).ok();
    let situation = situation.and_then(|s| s.map_err(&mut note).ok());
    if !io.is_empty() {
        io.extend(invalid);
        return Err(Failure::Io(io));
    }
    let (Some(model), Some(schema), Some(catalogue), Some(situation)) = (model, schema, catalogue, situation) else {
        return Err(Failure::Invalid(invalid));
    };
    let bound = bind_spanned(&catalogue, &model, &schema).map_err(|d| Failure::Invalid(d.0))?;
    for w in bind_warnings(&catalogue, &bound) {
        let _ = writeln!(err, "{w}");
    }
    Ok(Loaded {
        model,
        schema,
        catalogue,
        bound,
        situation,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}

/// The human-readable ranking table.
pub fn ranking_table(report: &RankingReport) -> String {
    let mut rows = vec![["rank".to_string(), "tasks".into(), "sps".into(), "hps".into(), "psd".into()]];
    for (i, s) in report.solutions.iter().enumerate() {
        rows.push([
            (i + 1).to_string(),
            s.solution.to_string(),
            format_rational(&s.sps),
            s.hps.to_string(),
            format_rational(&s.psd),
        ]);
    }
    let widths: Vec<usize> = (0..5).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in &rows {
        let _ = writeln!(
            out,
            "{:>w0$}  {:<w1$}  {:>w2$}  {:>w3$}  {:>w4$}",
            r[0],
            r[1],
            r[2],
            r[3],
            r[4],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2],
            w3 = widths[3],
            w4 = widths[4]
        );
    }
    out
}

fn cmd_rank(inputs: &Inputs, top: Option<usize>, out_path: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let l = load(inputs, err)?;
    let mut report =
        rank_bound(&l.model, &l.bound, &l.situation, inputs.mode, DEFAULT_SOLUTION_CAP).map_err(|e| Failure::rank(&inputs.model, e))?;
    if let Some(n) = top {
        report.solutions.truncate(n);
    }
    let _ = write!(out, "{}", ranking_table(&report));
    if let Some(p) = out_path {
        write_file(p, &serialize_ranking(&report))?;
    }
    Ok(())
}

fn parse_solution(text: &str) -> Solution {
    Solution::new(
        text.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(NodeId::new_unchecked),
    )
}

fn joined<'a>(items: impl IntoIterator<Item = (&'a NodeId, i64)>) -> String {
    let parts: Vec<String> = items.into_iter().map(|(k, v)| format!("{k}: {v}")).collect();
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join(", ")
    }
}

/// Score breakdown of one solution.
pub fn explain_text(model: &GoalModel, bound: &BoundCatalogue, situation: &Situation, mode: ScoringMode, sol: Solution) -> String {
    let (relevant, overshadowed, effective) = resolve(model, bound, situation);
    let scored = Ranker::new(model, &effective, mode).score(sol);
    let ids = |v: &[goalrank_core::PreferenceId]| {
        if v.is_empty() {
            "-".to_string()
        } else {
            v.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(", ")
        }
    };
    let mut out = String::new();
    let _ = writeln!(out, "solution: {}", scored.solution);
    let _ = writeln!(out, "situation: {situation}");
    let _ = writeln!(out, "mode: {mode}");
    let _ = writeln!(out, "relevant: {}", ids(&relevant));
    let _ = writeln!(out, "overshadowed: {}", ids(&overshadowed));
    let _ = writeln!(
        out,
        "effective softgoal scores: {}",
        joined(effective.softgoal.iter().map(|(k, v)| (k, i64::from(*v))))
    );
    let _ = writeln!(
        out,
        "effective hardgoal scores: {}",
        joined(effective.hardgoal.iter().map(|(k, v)| (k, i64::from(*v))))
    );
    let _ = writeln!(out, "softgoals:");
    for (sg, t) in &scored.per_softgoal {
        let _ = writeln!(
            out,
            "  {sg}: {} ({} make, {} break)",
            format_signed(&t.contrib),
            t.makes,
            t.breaks
        );
    }
    let _ = writeln!(out, "hardgoals: {}", joined(scored.per_hardgoal.iter().map(|(k, v)| (k, *v))));
    let _ = writeln!(out, "sps: {}", format_rational(&scored.sps));
    let _ = writeln!(out, "hps: {}", scored.hps);
    let _ = writeln!(out, "psd: {}", format_rational(&scored.psd));
    out
}

fn cmd_explain(inputs: &Inputs, solution: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let l = load(inputs, err)?;
    let sol = parse_solution(solution);
    if !is_solution(&l.model, &sol) {
        return Err(Failure::Invalid(vec![Diagnostic::error(
            Code::UnknownSolution,
            SourceSpan::start("--solution"),
            format!("{sol} is not a candidate solution of the model"),
        )]));
    }
    let _ = write!(out, "{}", explain_text(&l.model, &l.bound, &l.situation, inputs.mode, sol));
    Ok(())
}

fn cmd_validate(
    model: &Path,
    schema: Option<&Path>,
    catalogue: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let m = read_model(model);
    let s = schema.map(read_schema);
    let c = catalogue.map(read_catalogue);
    let mut io = Vec::new();
    let mut invalid = Vec::new();
    let mut note = |e: LoadError| match Failure::from(e) {
        Failure::Io(d) => io.extend(d),
        Failure::Invalid(d) => invalid.extend(d),
    };
    let m = m.map_err(&mut note).ok();
    let s: Option<ContextSchema> = s.and_then(|r| r.map_err(&mut note).ok());
    let c = c.and_then(|r| r.map_err(&mut note).ok());
    if !io.is_empty() {
        io.extend(invalid);
        return Err(Failure::Io(io));
    }
    if let (Some(m), Some(s), Some(c)) = (&m, &s, &c) {
        match bind_spanned(c, m, s) {
            Ok(bound) => {
                for w in bind_warnings(c, &bound) {
                    let _ = writeln!(err, "{w}");
                }
            }
            Err(d) => invalid.extend(d.0),
        }
    }
    if !invalid.is_empty() {
        return Err(Failure::Invalid(invalid));
    }
    let m = m.expect("no diagnostics means the model parsed");
    let _ = write!(
        out,
        "ok: {} hardgoals, {} softgoals, {} contribution links, {} variability points",
        m.hardgoal_count(),
        m.softgoals().count(),
        m.contributions().len(),
        m.variability_points().count()
    );
    if let Some(c) = &c {
        let _ = write!(out, ", {} preferences", c.catalogue.len());
    }
    let _ = writeln!(out);
    Ok(())
}

fn cmd_export(inputs: &Inputs, out_path: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let l = load(inputs, err)?;
    let program = export_bound(&l.model, &l.bound, &l.situation, inputs.mode);
    match out_path {
        Some(p) => write_file(p, &program.text),
        None => {
            let _ = out.write_all(program.text.as_bytes());
            Ok(())
        }
    }
}

fn cmd_bench(
    inputs: &Inputs,
    opts: BenchOptions,
    out_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let l = load(inputs, err)?;
    let report = run_bench(&l.model, &l.catalogue.catalogue, &l.schema, &l.situation, opts).map_err(|e| {
        Failure::Invalid(vec![Diagnostic::error(
            Code::Rank,
            SourceSpan::start(&inputs.model.display().to_string()),
            e.to_string(),
        )])
    })?;
    let _ = write!(out, "{}", report.table());
    if let Some(p) = out_path {
        write_file(p, &report.doc().render())?;
    }
    Ok(())
}

fn cmd_serve(host: &str, port: u16, fixtures: Option<&Path>, err: &mut dyn Write) -> Result<(), Failure> {
    let store = Arc::new(Store::new());
    if let Some(dir) = fixtures {
        let ids = store.load_fixtures(dir)?;
        let _ = writeln!(err, "loaded workspaces: {}", ids.join(", "));
    }
    let addr = format!("{host}:{port}");
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::io(Path::new(&addr), e))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Failure::io(Path::new(&addr), e))?;
        let _ = writeln!(err, "listening on http://{addr}");
        service::serve(listener, store)
            .await
            .map_err(|e| Failure::io(Path::new(&addr), e))
    })
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                let _ = writeln!(
                    err,
                    "<command line>:1:1: error[Usage]: {}",
                    e.kind().as_str().unwrap_or("invalid arguments")
                );
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Rank { inputs, top, out: path } => cmd_rank(inputs, *top, path.as_deref(), out, err),
        Command::Explain { inputs, solution } => cmd_explain(inputs, solution, out, err),
        Command::Validate {
            model,
            schema,
            catalogue,
        } => cmd_validate(model, schema.as_deref(), catalogue.as_deref(), out, err),
        Command::ExportAsp { inputs, out: path } => cmd_export(inputs, path.as_deref(), out, err),
        Command::Bench {
            inputs,
            kmax,
            runs,
            parallel,
            out: path,
        } => {
            let opts = BenchOptions {
                k_max: *kmax,
                runs: *runs,
                mode: inputs.mode,
                parallel: *parallel,
                ..BenchOptions::default()
            };
            cmd_bench(inputs, opts, path.as_deref(), out, err)
        }
        Command::Serve { port, host, fixtures } => cmd_serve(host, *port, fixtures.as_deref(), err),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            for d in f.diagnostics() {
                let _ = writeln!(err, "{d}");
            }
            f.code()
        }
    }
}
