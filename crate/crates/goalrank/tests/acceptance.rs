//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use goalrank::asp::{closed_loop_mismatches, evaluate, export_bound};
use goalrank::bench::{clone_model, run_bench, BenchOptions};
use goalrank::dsl::{parse_catalogue, parse_goal_model, parse_situation, serialize_catalogue, serialize_goal_model};
use goalrank::load::{bundled, Fixture};
use goalrank_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ranked(f: &Fixture, situation: &str, mode: ScoringMode) -> RankingReport {
    let s = f.situation(situation).unwrap();
    rank_bound(&f.model, &f.bind().unwrap(), &s, mode, DEFAULT_SOLUTION_CAP).unwrap()
}

const ABCD: [&[&str]; 4] = [&["t5", "t7", "t9"], &["t5", "t8", "t9"], &["t6", "t7", "t9"], &["t6", "t8", "t9"]];

/// Extracts one column for solutions a..d.
fn column<T: Clone>(r: &RankingReport, get: impl Fn(&ScoredSolution) -> T) -> Vec<T> {
    ABCD.iter()
        .map(|s| get(r.solutions.iter().find(|x| x.solution == Solution::of(s)).expect("solution present")))
        .collect()
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&n| Rational::from_integer(n)).collect()
}

fn show(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(",")
}

fn sps_table() -> Check {
    let r = ranked(&bundled::fragment(), bundled::DEMENTIA, ScoringMode::Proportional);
    let got = column(&r, |s| s.sps);
    ensure(got == ints(&[6, -2, 2, -6]), || format!("sps = {}", show(&got)))
}

fn hps_table() -> Check {
    let r = ranked(&bundled::fragment(), bundled::DEMENTIA, ScoringMode::Proportional);
    let got = column(&r, |s| s.hps);
    ensure(got == [18, 16, 9, 7], || format!("hps = {got:?}"))
}

fn scenarios() -> Check {
    let f = bundled::fragment();
    let two = bundled::fragment_option_two();
    let cases = [
        ("dementia", &f, bundled::DEMENTIA, [24, 14, 11, 1]),
        ("normal", &f, bundled::NORMAL, [6, 5, 2, 1]),
        ("normal, bad weather", &f, bundled::NORMAL_BAD_WEATHER, [6, -2, 2, -6]),
        ("option two, normal", &two, bundled::NORMAL, [-2, 5, 2, 9]),
    ];
    for (name, fx, sit, want) in cases {
        let r = ranked(fx, sit, ScoringMode::Proportional);
        let got = column(&r, |s| s.psd);
        ensure(got == ints(&want), || format!("{name}: psd = {}", show(&got)))?;
    }
    let r = ranked(&two, bundled::NORMAL, ScoringMode::Proportional);
    ensure(r.solutions[0].solution == Solution::of(&["t6", "t8", "t9"]), || {
        format!("option two top = {}", r.solutions[0].solution)
    })
}

fn max_rule() -> Check {
    let f = bundled::medication();
    let sit = "patient_activity=idle patient_location=near_dispenser patient_illness=normal weather=good body_condition=normal accompanying_people=caregiver";
    let r = ranked(&f, sit, ScoringMode::Proportional);
    let ids: Vec<&str> = r.relevant.iter().map(|p| p.as_str()).collect();
    ensure(ids.contains(&"p4") && ids.contains(&"p5"), || format!("relevant = {ids:?}"))?;
    let g3 = r.effective.hardgoal.get("g3").copied();
    ensure(g3 == Some(8), || format!("score(g3) = {g3:?}"))?;
    ensure(r.overshadowed.iter().any(|p| p == "p5"), || format!("overshadowed = {:?}", r.overshadowed))
}

fn relevance_sets() -> Check {
    let cases = [
        ("full model", bundled::medication(), bundled::DEMENTIA, vec!["p1", "p5", "p6", "p7", "p8", "p9"]),
        ("fragment", bundled::fragment(), bundled::DEMENTIA, vec!["p1", "p6", "p7", "p8", "p9"]),
        ("fragment, normal", bundled::fragment(), bundled::NORMAL, vec!["p6", "p7", "p8", "p9"]),
    ];
    for (name, f, sit, want) in cases {
        let s = f.situation(sit).unwrap();
        let bound = f.bind().unwrap();
        let got: Vec<&str> = relevant(&bound, &s, &f.model).iter().map(|r| r.preference.id.as_str()).collect();
        ensure(got == want, || format!("{name}: {got:?}"))?;
    }
    Ok(())
}

fn enumeration_counts() -> Check {
    let frag = enumerate_solutions(&bundled::fragment().model).unwrap().len();
    ensure(frag == 4, || format!("fragment: {frag}"))?;
    let f = bundled::medication();
    let full = enumerate_solutions(&f.model).unwrap().len();
    ensure(full == 8, || format!("full: {full}"))?;
    for k in 1..=5u32 {
        let (m, _) = clone_model(&f.model, f.prefs(), k as usize);
        let n = enumerate_solutions(&m).unwrap().len() as u128;
        ensure(n == 8u128.pow(k) && solution_count(&m) == n, || format!("k={k}: {n}"))?;
    }
    Ok(())
}

fn full_optimum() -> Check {
    let r = ranked(&bundled::medication(), bundled::BUSY_TIRED, ScoringMode::Proportional);
    ensure(r.solutions.len() == 8, || format!("{} solutions", r.solutions.len()))?;
    let ids: Vec<&str> = r.relevant.iter().map(|p| p.as_str()).collect();
    ensure(ids == ["p1", "p2", "p5", "p6", "p7", "p8", "p9"], || format!("relevant = {ids:?}"))?;
    let top = &r.solutions[0];
    ensure(top.solution == Solution::of(&["t1", "t5", "t7", "t9"]), || format!("top = {}", top.solution))?;
    ensure(r.solutions[1].psd < top.psd, || "top solution is tied".into())
}

fn performance() -> Check {
    let f = bundled::medication();
    let sit = f.situation(bundled::BUSY_TIRED).unwrap();
    let (m, c) = clone_model(&f.model, f.prefs(), 5);
    let bound = bind(&c, &m, &f.schema).unwrap();
    let start = Instant::now();
    let r = rank_bound(&m, &bound, &sit, ScoringMode::Proportional, DEFAULT_SOLUTION_CAP).unwrap();
    let full = start.elapsed().as_secs_f64();
    ensure(r.solutions.len() == 32768, || format!("{} solutions", r.solutions.len()))?;
    let opts = BenchOptions {
        k_max: 5,
        runs: 3,
        ..BenchOptions::default()
    };
    let report = run_bench(&f.model, f.prefs(), &f.schema, &sit, opts).map_err(|e| e.to_string())?;
    let row = &report.rows[4];
    ensure(full <= 5.0 && row.t_rank_all <= 5.0, || {
        format!("k=5 full rank {full:.3}s (bench mean {:.3}s)", row.t_rank_all)
    })?;
    ensure(row.t_first_solution <= 0.5, || format!("first solution {:.3}s", row.t_first_solution))
}

/// Random decomposition tree with at most `max_tasks` tasks.
fn random_model(rng: &mut ChaCha8Rng, max_tasks: usize) -> GoalModel {
    fn grow(rng: &mut ChaCha8Rng, b: GoalModelBuilder, depth: u32, budget: &mut usize, n: &mut (usize, usize), ids: &mut Vec<String>) -> (GoalModelBuilder, String) {
        if depth == 0 || *budget <= 1 || (depth < 4 && rng.gen_bool(0.35)) {
            *budget = budget.saturating_sub(1);
            let id = format!("t{}", n.1);
            n.1 += 1;
            ids.push(id.clone());
            return (b.task(&id, ""), id);
        }
        let id = format!("g{}", n.0);
        n.0 += 1;
        ids.push(id.clone());
        let mut b = b.hardgoal(&id, "");
        let mut kids = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            if *budget == 0 {
                break;
            }
            let (nb, k) = grow(rng, b, depth - 1, budget, n, ids);
            b = nb;
            kids.push(k);
        }
        let refs: Vec<&str> = kids.iter().map(String::as_str).collect();
        (if rng.gen_bool(0.5) { b.and(&id, &refs) } else { b.or(&id, &refs) }, id)
    }
    let mut budget = rng.gen_range(1..=max_tasks);
    let mut ids = Vec::new();
    let (mut b, root) = grow(rng, GoalModelBuilder::new().hardgoal("top", ""), 4, &mut budget, &mut (0, 0), &mut ids);
    b = b.and("top", &[&root]).root("top");
    b = b.softgoal("sa", "").softgoal("sb", "");
    let mut seen = BTreeSet::new();
    for _ in 0..rng.gen_range(0..8) {
        let src = ids[rng.gen_range(0..ids.len())].clone();
        let sg = if rng.gen_bool(0.5) { "sa" } else { "sb" };
        if seen.insert((src.clone(), sg)) {
            b = if rng.gen_bool(0.5) { b.make(&src, sg) } else { b.breaks(&src, sg) };
        }
    }
    b.build().expect("random model is valid")
}

fn random_catalogue(rng: &mut ChaCha8Rng, model: &GoalModel, schema: &ContextSchema, max_score: i64) -> PreferenceCatalogue {
    let nodes: Vec<&GoalNode> = model.nodes().values().collect();
    let prefs = (0..rng.gen_range(0..8))
        .map(|i| {
            let n = nodes[rng.gen_range(0..nodes.len())];
            let action = if n.kind == NodeKind::Task {
                Action::perform(n.id.clone())
            } else {
                Action::satisfy(n.id.clone())
            };
            let mut con = CombinedAssertion::always();
            for el in schema.elements() {
                if rng.gen_bool(0.3) {
                    let vals: Vec<&String> = el.domain.iter().filter(|_| rng.gen_bool(0.5)).collect();
                    if !vals.is_empty() {
                        con.assert(&el.name, vals.into_iter().cloned());
                    }
                }
            }
            ContextualPreference {
                id: PreferenceId::new(format!("p{i}")).unwrap(),
                actions: vec![action],
                con,
                score: Score::new(rng.gen_range(0..=max_score)).unwrap(),
            }
        })
        .collect();
    PreferenceCatalogue::new(prefs).unwrap()
}

fn random_situation(rng: &mut ChaCha8Rng, schema: &ContextSchema) -> Situation {
    let vals: Vec<&str> = schema
        .elements()
        .iter()
        .map(|el| el.domain[rng.gen_range(0..el.domain.len())].as_str())
        .collect();
    Situation::new(schema, &vals).unwrap()
}

fn random_instance(rng: &mut ChaCha8Rng, schema: &ContextSchema) -> ContextInstance {
    ContextInstance(
        schema
            .elements()
            .iter()
            .map(|el| {
                if rng.gen_bool(0.4) {
                    ContextValue::All
                } else {
                    ContextValue::Is(el.domain[rng.gen_range(0..el.domain.len())].clone())
                }
            })
            .collect(),
    )
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let schema = bundled::medication().schema;

    for i in 0..200 {
        let m = random_model(&mut rng, 20);
        let fast: BTreeSet<Solution> = enumerate_solutions(&m).unwrap().into_iter().collect();
        let slow: BTreeSet<Solution> = oracle_enumerate(&m).unwrap().into_iter().collect();
        ensure(fast == slow, || format!("oracle mismatch on tree {i}"))?;
    }

    for i in 0..1000 {
        let (a, b, c) = (
            random_instance(&mut rng, &schema),
            random_instance(&mut rng, &schema),
            random_instance(&mut rng, &schema),
        );
        let imp = |x: &ContextInstance, y: &ContextInstance| implies(x, y).unwrap();
        ensure(imp(&a, &a), || format!("reflexivity, pair {i}"))?;
        ensure(!(imp(&a, &b) && imp(&b, &a)) || a == b, || format!("antisymmetry, pair {i}"))?;
        ensure(!(imp(&a, &b) && imp(&b, &c)) || imp(&a, &c), || format!("transitivity, pair {i}"))?;
    }

    for i in 0..200 {
        let m = random_model(&mut rng, 12);
        let c = random_catalogue(&mut rng, &m, &schema, 3);
        let s = random_situation(&mut rng, &schema);
        let full = rank(&m, &c, &schema, &s, ScoringMode::Proportional).unwrap();

        let kept: Vec<_> = c.preferences().iter().filter(|p| p.con.matches(&s)).cloned().collect();
        let pruned = rank(&m, &PreferenceCatalogue::new(kept).unwrap(), &schema, &s, ScoringMode::Proportional).unwrap();
        ensure(pruned.solutions == full.solutions, || format!("irrelevant deletion changed case {i}"))?;

        let k = rng.gen_range(1..=3u8);
        let scaled: Vec<_> = c
            .preferences()
            .iter()
            .map(|p| ContextualPreference {
                score: Score::new(i64::from(p.score.get() * k)).unwrap(),
                ..p.clone()
            })
            .collect();
        let big = rank(&m, &PreferenceCatalogue::new(scaled).unwrap(), &schema, &s, ScoringMode::Proportional).unwrap();
        let same = full
            .solutions
            .iter()
            .zip(&big.solutions)
            .all(|(a, b)| a.solution == b.solution && a.psd * Rational::from_integer(i64::from(k)) == b.psd);
        ensure(same, || format!("scaling by {k} changed case {i}"))?;

        for x in &full.solutions {
            ensure(x.psd == x.sps + Rational::from_integer(x.hps), || format!("psd identity, case {i}"))?;
        }

        let text = serialize_goal_model(&m);
        ensure(parse_goal_model("m.gm", &text).as_ref() == Ok(&m), || format!("model round trip, case {i}"))?;
        let ctext = serialize_catalogue(&c);
        ensure(parse_catalogue("c.prefs", &ctext).as_ref() == Ok(&c), || format!("catalogue round trip, case {i}"))?;
    }

    for f in bundled::all() {
        for sit in [bundled::DEMENTIA, bundled::NORMAL, bundled::NORMAL_BAD_WEATHER, bundled::BUSY_TIRED] {
            for x in &ranked(&f, sit, ScoringMode::Proportional).solutions {
                ensure(x.psd == x.sps + Rational::from_integer(x.hps), || format!("psd identity on {}", f.name))?;
            }
        }
    }

    let alphabet: Vec<&str> = vec![
        "goal ", "task ", "root ", "and ", "or ", "make ", "pref ", "perform ", "when ", "score ", "in ", "{", "}", ";",
        ",", "=", "\n", "\"", "#", "12", "-3", "x1 ", "All ", "é", "\\",
    ];
    let result = std::panic::catch_unwind(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let text: String = (0..rng.gen_range(0..30)).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
            let _ = parse_goal_model("f.gm", &text);
            let _ = parse_catalogue("f.prefs", &text);
            let _ = parse_situation("f.sit", &text, &schema);
            let _ = goalrank::asp::syntax::parse_program(&text);
        }
    });
    ensure(result.is_ok(), || "a parser panicked on fuzz input".into())
}

fn asp_closed_loop() -> Check {
    for f in bundled::all() {
        let bound = f.bind().unwrap();
        for sit in [bundled::DEMENTIA, bundled::NORMAL, bundled::NORMAL_BAD_WEATHER, bundled::BUSY_TIRED] {
            let s = f.situation(sit).unwrap();
            for mode in [ScoringMode::Proportional, ScoringMode::Dominance] {
                let report = rank_bound(&f.model, &bound, &s, mode, DEFAULT_SOLUTION_CAP).unwrap();
                let program = export_bound(&f.model, &bound, &s, mode);
                let bad = closed_loop_mismatches(&program, &report).map_err(|e| e.to_string())?;
                ensure(bad.is_empty(), || format!("{} ({mode}): {bad:?}", f.name))?;
                let ev = evaluate(&program.text).map_err(|e| e.to_string())?;
                let best = goalrank::asp::solve::optimal_answer_sets(&ev.program).map_err(|e| e.to_string())?;
                let top: BTreeSet<Solution> = report
                    .solutions
                    .iter()
                    .take_while(|x| x.psd == report.solutions[0].psd)
                    .map(|x| x.solution.clone())
                    .collect();
                let opt: BTreeSet<Solution> = best.iter().map(|a| ev.tasks_of(a)).collect();
                ensure(opt == top, || format!("{} ({mode}): optimum differs", f.name))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("softgoal preference scores of a..d are 6, -2, 2, -6", sps_table),
        ("hardgoal preference scores of a..d are 18, 16, 9, 7", hps_table),
        ("scenario suite psd lists", scenarios),
        ("max rule gives score(g3) = 8", max_rule),
        ("relevance sets", relevance_sets),
        ("enumeration counts 4, 8 and 8^k for k = 1..5", enumeration_counts),
        ("full-model optimum is [t1, t5, t7, t9]", full_optimum),
        ("k=5 full rank <= 5 s, first solution <= 0.5 s", performance),
        ("property suites", property_suites),
        ("ASP closed loop on every fixture", asp_closed_loop),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(())) => println!("PASS  {name}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL  {name}: panicked");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
