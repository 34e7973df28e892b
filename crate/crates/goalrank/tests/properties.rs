use std::collections::BTreeSet;

use goalrank::asp::{closed_loop_mismatches, export_bound, syntax::parse_program};
use goalrank::bench::clone_model;
use goalrank::dsl::*;
use goalrank::load::bundled;
use goalrank_core::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
enum Shape {
    Task,
    Goal(bool, Vec<Shape>),
}

fn shape(depth: u32, size: u32) -> impl Strategy<Value = Shape> {
    Just(Shape::Task).prop_recursive(depth, size, 3, |inner| {
        (any::<bool>(), prop::collection::vec(inner, 1..4)).prop_map(|(and, cs)| Shape::Goal(and, cs))
    })
}

fn label() -> impl Strategy<Value = String> {
    prop_oneof![Just(String::new()), "[ -~]{0,12}", "[a-z\"\\\\\n\t]{0,6}"]
}

/// A valid random model: a decomposition tree, up to three softgoals and
/// some contribution links.
fn model(depth: u32, size: u32) -> impl Strategy<Value = GoalModel> {
    (
        shape(depth, size),
        prop::collection::vec((0usize..64, 0usize..3, any::<bool>()), 0..8),
        1usize..4,
        prop::collection::vec(label(), 64),
    )
        .prop_map(|(shape, links, softgoals, labels)| {
            fn walk(s: &Shape, b: GoalModelBuilder, n: &mut (usize, usize), ids: &mut Vec<String>, labels: &[String]) -> (GoalModelBuilder, String) {
                let label = &labels[ids.len() % labels.len()];
                match s {
                    Shape::Task => {
                        let id = format!("t{}", n.1);
                        n.1 += 1;
                        ids.push(id.clone());
                        (b.task(&id, label), id)
                    }
                    Shape::Goal(and, cs) => {
                        let id = format!("g{}", n.0);
                        n.0 += 1;
                        ids.push(id.clone());
                        let mut b = b.hardgoal(&id, label);
                        let mut kids = Vec::new();
                        for c in cs {
                            let (nb, k) = walk(c, b, n, ids, labels);
                            b = nb;
                            kids.push(k);
                        }
                        let refs: Vec<&str> = kids.iter().map(String::as_str).collect();
                        (if *and { b.and(&id, &refs) } else { b.or(&id, &refs) }, id)
                    }
                }
            }
            let top = match shape {
                Shape::Task => Shape::Goal(true, vec![Shape::Task]),
                s => s,
            };
            let mut ids = Vec::new();
            let (mut b, root) = walk(&top, GoalModelBuilder::new(), &mut (0, 0), &mut ids, &labels);
            b = b.root(&root);
            for i in 0..softgoals {
                b = b.softgoal(&format!("sg{i}"), &labels[(i + 7) % labels.len()]);
            }
            let mut seen = BTreeSet::new();
            for (src, sg, make) in links {
                let src = &ids[src % ids.len()];
                let sg = format!("sg{}", sg % softgoals);
                if seen.insert((src.clone(), sg.clone())) {
                    b = if make { b.make(src, &sg) } else { b.breaks(src, &sg) };
                }
            }
            b.build().expect("generated model is valid")
        })
}

fn schema() -> ContextSchema {
    parse_context_schema("s.ctx", bundled::SCHEMA).unwrap()
}

fn catalogue_for(model: &GoalModel) -> impl Strategy<Value = PreferenceCatalogue> {
    let nodes: Vec<(NodeId, NodeKind)> = model
        .nodes()
        .values()
        .map(|n| (n.id.clone(), n.kind))
        .collect();
    let schema = schema();
    let pref = (
        prop::collection::vec(0usize..64, 1..3),
        prop::collection::vec(prop::option::weighted(0.3, 1u8..32), 6),
        0i64..=10,
    );
    prop::collection::vec(pref, 0..8).prop_map(move |specs| {
        let prefs = specs
            .into_iter()
            .enumerate()
            .map(|(i, (targets, con, score))| {
                let mut actions: Vec<Action> = targets
                    .iter()
                    .map(|t| {
                        let (id, kind) = &nodes[t % nodes.len()];
                        if *kind == NodeKind::Task {
                            Action::perform(id.clone())
                        } else {
                            Action::satisfy(id.clone())
                        }
                    })
                    .collect();
                actions.sort();
                actions.dedup();
                let mut c = CombinedAssertion::always();
                for (el, mask) in schema.elements().iter().zip(con) {
                    if let Some(mask) = mask {
                        let vals: Vec<&str> = el
                            .domain
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, v)| v.as_str())
                            .collect();
                        if !vals.is_empty() {
                            c.assert(&el.name, vals);
                        }
                    }
                }
                ContextualPreference {
                    id: PreferenceId::new(format!("p{i}")).unwrap(),
                    actions,
                    con: c,
                    score: Score::new(score).unwrap(),
                }
            })
            .collect();
        PreferenceCatalogue::new(prefs).unwrap()
    })
}

fn situation() -> impl Strategy<Value = Situation> {
    prop::collection::vec(0usize..5, 6).prop_map(|picks| {
        let schema = schema();
        let vals: Vec<&str> = schema
            .elements()
            .iter()
            .zip(&picks)
            .map(|(el, i)| el.domain[i % el.domain.len()].as_str())
            .collect();
        Situation::new(&schema, &vals).unwrap()
    })
}

fn problem(depth: u32, size: u32) -> impl Strategy<Value = (GoalModel, PreferenceCatalogue, Situation)> {
    model(depth, size).prop_flat_map(|m| (Just(m.clone()), catalogue_for(&m), situation()))
}

/// Tokens and fragments that exercise every parser's error paths.
fn noise() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        Just("goal ".to_string()),
        Just("task ".to_string()),
        Just("softgoal ".to_string()),
        Just("root ".to_string()),
        Just("and ".to_string()),
        Just("or ".to_string()),
        Just("make ".to_string()),
        Just("break ".to_string()),
        Just("pref ".to_string()),
        Just("perform ".to_string()),
        Just("satisfy ".to_string()),
        Just("when ".to_string()),
        Just("true ".to_string()),
        Just("score ".to_string()),
        Just("element ".to_string()),
        Just(" in ".to_string()),
        Just("All ".to_string()),
        Just("{".to_string()),
        Just("}".to_string()),
        Just(";".to_string()),
        Just(",".to_string()),
        Just("=".to_string()),
        Just("\n".to_string()),
        Just("\"".to_string()),
        Just("#".to_string()),
        Just(":-".to_string()),
        Just(":~".to_string()),
        Just("[".to_string()),
        Just("@".to_string()),
        Just(" v ".to_string()),
        Just(". ".to_string()),
        Just("not ".to_string()),
        Just("%".to_string()),
        "[a-z][a-z0-9_]{0,3} ",
        "-?[0-9]{1,20}",
        "[\\PC]{1,3}",
    ];
    prop::collection::vec(piece, 0..40).prop_map(|v| v.concat())
}

fn check_spans(d: &Diagnostics, text: &str) {
    assert!(!d.0.is_empty());
    let lines = text.split('\n').count();
    for diag in &d.0 {
        assert!(diag.span.line >= 1 && diag.span.line <= lines, "{diag} in {lines} lines");
        assert!(diag.span.column >= 1, "{diag}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn model_round_trip(m in model(4, 24)) {
        let text = serialize_goal_model(&m);
        let back = parse_goal_model("m.gm", &text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(serialize_goal_model(&back), text);
    }

    #[test]
    fn model_statement_order_is_irrelevant(m in model(4, 24), seed in any::<u64>()) {
        let text = serialize_goal_model(&m);
        let mut lines: Vec<&str> = text.lines().collect();
        lines.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = lines.join("\n");
        prop_assert_eq!(parse_goal_model("m.gm", &shuffled).unwrap(), m);
    }

    #[test]
    fn catalogue_round_trip((_, c, s) in problem(3, 12)) {
        let text = serialize_catalogue(&c);
        let back = parse_catalogue("c.prefs", &text).unwrap();
        prop_assert_eq!(&back, &c);
        let schema = schema();
        let sit = serialize_situation(&s);
        prop_assert_eq!(parse_situation("s.sit", &sit, &schema).unwrap(), s);
        prop_assert_eq!(parse_context_schema("s.ctx", &serialize_context_schema(&schema)).unwrap(), schema);
    }

    #[test]
    fn parsers_never_panic(text in noise()) {
        let schema = schema();
        if let Err(d) = parse_goal_model("f.gm", &text) { check_spans(&d, &text); }
        if let Err(d) = parse_catalogue("f.prefs", &text) { check_spans(&d, &text); }
        if let Err(d) = parse_context_schema("f.ctx", &text) { check_spans(&d, &text); }
        if let Err(d) = parse_situation("f.sit", &text, &schema) { check_spans(&d, &text); }
        let _ = parse_program(&text);
    }

    #[test]
    fn parsers_never_panic_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        match decode("f.gm", &bytes) {
            Ok(text) => {
                let _ = parse_goal_model("f.gm", text);
                let _ = parse_catalogue("f.prefs", text);
            }
            Err(d) => prop_assert!(d.has(Code::InvalidUtf8)),
        }
    }

    #[test]
    fn mutated_fixture_text_never_panics(cut in 0usize..2000, insert in noise()) {
        for text in [bundled::MEDICATION_MODEL, bundled::CATALOGUE] {
            let mut at = cut % (text.len() + 1);
            while !text.is_char_boundary(at) { at -= 1; }
            let mutated = format!("{}{}{}", &text[..at], insert, &text[at..]);
            if let Err(d) = parse_goal_model("m.gm", &mutated) { check_spans(&d, &mutated); }
            if let Err(d) = parse_catalogue("c.prefs", &mutated) { check_spans(&d, &mutated); }
        }
    }

    #[test]
    fn asp_closed_loop_on_random_problems((m, c, s) in problem(3, 10), dominance in any::<bool>()) {
        let mode = if dominance { ScoringMode::Dominance } else { ScoringMode::Proportional };
        let bound = bind(&c, &m, &schema()).unwrap();
        let report = rank_bound(&m, &bound, &s, mode, DEFAULT_SOLUTION_CAP).unwrap();
        let program = export_bound(&m, &bound, &s, mode);
        let bad = closed_loop_mismatches(&program, &report).unwrap();
        prop_assert!(bad.is_empty(), "{:?}\n{}", bad, program.text);
    }

    #[test]
    fn parallel_ranking_matches_sequential((m, c, s) in problem(4, 24)) {
        let bound = bind(&c, &m, &schema()).unwrap();
        let seq = rank_bound(&m, &bound, &s, ScoringMode::Proportional, DEFAULT_SOLUTION_CAP).unwrap();
        let par = goalrank::parallel::rank_parallel(&m, &bound, &s, ScoringMode::Proportional, DEFAULT_SOLUTION_CAP).unwrap();
        prop_assert_eq!(seq.solutions, par);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn clone_psd_is_additive((m, c, s) in problem(3, 10), k in 2usize..4) {
        prop_assume!(solution_count(&m).pow(k as u32) <= 4096);
        let bound = bind(&c, &m, &schema()).unwrap();
        let one = rank_bound(&m, &bound, &s, ScoringMode::Proportional, DEFAULT_SOLUTION_CAP).unwrap();
        let (mk, ck) = clone_model(&m, &c, k);
        prop_assert!(validate_model(&mk).is_empty());
        let bk = bind(&ck, &mk, &schema()).unwrap();
        let many = rank_bound(&mk, &bk, &s, ScoringMode::Proportional, DEFAULT_SOLUTION_CAP).unwrap();
        prop_assert_eq!(many.solutions.len() as u128, solution_count(&m).pow(k as u32));
        for sol in &one.solutions {
            let copied = Solution::new((1..=k).flat_map(|i| sol.solution.tasks.iter().map(move |t| t.suffixed(i))));
            let found = many.solutions.iter().find(|x| x.solution == copied).unwrap();
            prop_assert_eq!(found.psd, sol.psd * Rational::from_integer(k as i64));
        }
    }
}

#[test]
fn psd_identity_on_all_fixtures() {
    let situations = [bundled::DEMENTIA, bundled::NORMAL, bundled::NORMAL_BAD_WEATHER, bundled::BUSY_TIRED];
    for f in bundled::all() {
        let bound = f.bind().unwrap();
        for sit in situations {
            let s = f.situation(sit).unwrap();
            for mode in [ScoringMode::Proportional, ScoringMode::Dominance] {
                let r = rank_bound(&f.model, &bound, &s, mode, DEFAULT_SOLUTION_CAP).unwrap();
                for x in &r.solutions {
                    assert_eq!(x.psd, x.sps + Rational::from_integer(x.hps), "{} {}", f.name, x.solution);
                }
            }
        }
    }
}

/// A `satisfy` preference on the root applies to every solution, so it
/// shifts every psd by its score without changing the order.
#[test]
fn root_preference_shifts_uniformly() {
    let f = bundled::medication();
    let s = f.situation(bundled::BUSY_TIRED).unwrap();
    let base = rank_bound(&f.model, &f.bind().unwrap(), &s, ScoringMode::Proportional, DEFAULT_SOLUTION_CAP).unwrap();
    let text = format!("{}pref root_pref {{ satisfy {} }} when true score 4\n", bundled::CATALOGUE, f.model.root());
    let c = parse_catalogue("c.prefs", &text).unwrap();
    let shifted = rank(&f.model, &c, &f.schema, &s, ScoringMode::Proportional).unwrap();
    assert_eq!(base.solutions.len(), shifted.solutions.len());
    for (a, b) in base.solutions.iter().zip(&shifted.solutions) {
        assert_eq!(a.solution, b.solution);
        assert_eq!(a.psd + Rational::from_integer(4), b.psd);
    }
}

#[test]
fn fixture_texts_round_trip() {
    for f in bundled::all() {
        let m = serialize_goal_model(&f.model);
        assert_eq!(parse_goal_model("m.gm", &m).unwrap(), f.model);
        let c = serialize_catalogue(f.prefs());
        assert_eq!(&parse_catalogue("c.prefs", &c).unwrap(), f.prefs());
    }
}
