use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use transduce::eval::Classifier;
use transduce::induce::function_family;
use transduce::{
    canonical_derive, classify_error, classify_run, colors, combination_key, consistency_metrics, enumerate_outputs,
    fixtures, generate_episode, overlap_count, read_run, score_run, words, write_run, Alphabet, Color, ErrorLabel,
    GenConfig, Grammar, LabelKind, ParsePolicy, Response, Rule, RuleShape, RunRecord, SearchBudget, SlotKind, Word,
};

fn grammar(id: &str) -> Grammar {
    fixtures::get(id).unwrap().episode().grammar.unwrap()
}

fn label(id: &str, input: &str, out: &str) -> ErrorLabel {
    classify_error(&grammar(id), &words(input), &Response::Colors(colors(out)), &SearchBudget::default()).unwrap()
}

fn thrice(s: &RuleShape) -> bool {
    s.repetition() == Some(3)
}

#[test]
fn fixture_scores() {
    let per_query = |id: &str| -> Vec<usize> {
        let f = fixtures::get(id).unwrap();
        score_run(&f.episode(), &f.run()).unwrap().per_query.iter().map(|q| q.correct).collect()
    };
    assert_eq!(per_query("133"), vec![0, 0, 1, 0, 2, 1, 10, 9, 8, 10]);

    for (id, correct, total) in [("133", 41, 100), ("32", 52, 100), ("122", 50, 100), ("1", 8, 110)] {
        let f = fixtures::get(id).unwrap();
        let e = f.episode();
        let r = f.run();
        let s = score_run(&e, &r).unwrap();
        let by_hand: usize = e
            .query
            .iter()
            .zip(&r.responses)
            .map(|(q, rs)| rs.iter().filter(|x| x.colors() == q.target.as_ref()).count())
            .sum();
        assert_eq!((s.correct, s.total), (correct, total), "{id}");
        assert_eq!(by_hand, correct);
        match f.reported_rate {
            Some(p) if id == "122" => assert!(s.discrepancy(p).unwrap().contains("54")),
            Some(p) => assert_eq!(s.discrepancy(p), None),
            None => {}
        }
    }
}

#[test]
fn perfect_runs_score_full() {
    let a = Arc::new(Alphabet::standard());
    for seed in 0..40 {
        let e = generate_episode(&a, &GenConfig::default(), seed).unwrap();
        let r = RunRecord {
            episode: e.id.clone(),
            samples_per_query: 3,
            responses: e
                .query
                .iter()
                .map(|q| vec![Response::Colors(q.target.clone().unwrap()); 3])
                .collect(),
            model: Some("oracle".into()),
        };
        let s = score_run(&e, &r).unwrap();
        assert_eq!(s.rate, 1.0);
        let labels = classify_run(&e, &r, &SearchBudget::default()).unwrap();
        assert_eq!(labels.count(LabelKind::Correct), labels.total());
        assert_eq!(consistency_metrics(&r, Some(&labels)).non_systematic_rate, 0.0);
    }
}

#[test]
fn misaligned_runs() {
    let f = fixtures::get("133").unwrap();
    let mut r = f.run();
    r.responses.pop();
    assert_eq!(score_run(&f.episode(), &r).unwrap_err().kind(), "QueryMismatch");
    let mut r = f.run();
    r.episode = "32".into();
    assert_eq!(score_run(&f.episode(), &r).unwrap_err().kind(), "QueryMismatch");
}

#[test]
fn run_files_round_trip() {
    for f in fixtures::all() {
        let r = f.run();
        assert_eq!(read_run(&write_run(&r)).unwrap(), r);
    }
}

#[test]
fn classification_examples() {
    let l = label("133", "wif fep", "BLUE BLUE BLUE");
    assert_eq!(l.kind(), LabelKind::RuleSubstitution);
    assert!(l.names(&Word::from("fep"), thrice));

    let l = label("133", "wif zup kiki fep", "BLUE PINK BLUE PINK BLUE PINK");
    assert_eq!(l.kind(), LabelKind::AltParseWithSubstitution);
    assert!(l.names(&Word::from("fep"), thrice));
    let ErrorLabel::AltParseWithSubstitution { derivation, .. } = &l else { unreachable!() };
    assert_eq!(derivation, "((wif zup kiki) fep)");

    assert_eq!(label("133", "wif zup kiki fep", "BLUE YELLOW PINK YELLOW").kind(), LabelKind::NonSystematic);
    assert_eq!(label("133", "wif zup kiki fep", "BLUE PINK PINK"), ErrorLabel::Correct);
    assert_eq!(label("133", "wif zup kiki fep", "BLUE PINK BLUE PINK").kind(), LabelKind::AltParse);
    assert_eq!(
        label("133", "wif fep", "BLUE BLUE BLUE BLUE BLUE BLUE BLUE BLUE BLUE"),
        ErrorLabel::CapViolation { length: 9 }
    );
    let raw = classify_error(&grammar("133"), &words("wif fep"), &Response::Raw("?".into()), &SearchBudget::default());
    assert_eq!(raw.unwrap(), ErrorLabel::NonSystematic { budget_exhausted: false });
    let untranslatable = classify_error(&grammar("133"), &words("zup wif"), &Response::Colors(vec![]), &SearchBudget::default());
    assert_eq!(untranslatable.unwrap_err().kind(), "NotTranslatable");
}

#[test]
fn priority_can_prefer_substitution() {
    let g = grammar("133");
    let input = words("wif zup kiki fep");
    let out = Response::Colors(colors("BLUE PINK BLUE PINK"));
    let mut c = Classifier::new(g.clone(), SearchBudget::default());
    assert_eq!(c.classify(&input, &out).unwrap().kind(), LabelKind::AltParse);
    let mut c = Classifier::new(g, SearchBudget::default()).substitution_first(true);
    let l = c.classify(&input, &out).unwrap();
    assert_eq!(l.kind(), LabelKind::RuleSubstitution);
}

#[test]
fn tiny_budget_flags_non_systematic() {
    let b = SearchBudget {
        max_expansions: 1,
        ..SearchBudget::default()
    };
    let l = classify_error(&grammar("133"), &words("wif zup kiki fep"), &Response::Colors(colors("BLUE YELLOW")), &b);
    assert_eq!(l.unwrap(), ErrorLabel::NonSystematic { budget_exhausted: true });
}

#[test]
fn consistency_examples() {
    let r = fixtures::get("133").unwrap().run();
    let m = consistency_metrics(&r, None);
    assert_eq!(m.per_query[5].modal_share, 0.4);
    assert_eq!(m.per_query[5].distinct, 7);
    assert_eq!(m.per_query[6].modal_share, 1.0);
    assert_eq!(m.per_query[6].distinct, 1);

    for f in fixtures::all() {
        let e = f.episode();
        let labels = classify_run(&e, &f.run(), &SearchBudget::default()).unwrap();
        let m = consistency_metrics(&f.run(), Some(&labels));
        let expected = labels.count(LabelKind::NonSystematic) as f64 / labels.total() as f64;
        assert!((m.non_systematic_rate - expected).abs() < 1e-12);
        assert!(m.non_systematic_rate > 0.0, "{}", f.id);
    }
}

/// Grammar with four fixed primitives and the given function shapes.
fn with_shapes(shapes: &[RuleShape]) -> Grammar {
    let mut rules = vec![
        Rule::primitive("dax", "RED"),
        Rule::primitive("kiki", "BLUE"),
        Rule::primitive("lug", "GREEN"),
        Rule::primitive("wif", "PINK"),
    ];
    for (w, s) in ["fep", "tufa", "zup"].iter().zip(shapes) {
        rules.push(Rule::function(*w, s.clone()));
    }
    Grammar::new(Arc::new(Alphabet::standard()), rules)
}

/// Twenty combinations with pairwise different keys.
fn distinct_pool() -> Vec<Grammar> {
    let shapes: Vec<RuleShape> = (2..=7).map(|n| RuleShape::repeat(SlotKind::String, n)).collect();
    let mut out = Vec::new();
    for i in 0..6 {
        for j in i + 1..6 {
            for k in j + 1..6 {
                out.push(with_shapes(&[shapes[i].clone(), shapes[j].clone(), shapes[k].clone()]));
            }
        }
    }
    out
}

fn relabel(g: &Grammar, words: &[&str], cs: &[&str]) -> Grammar {
    let std = Alphabet::standard();
    let w = |x: &Word| Word::from(words[std.word_index(x).unwrap() as usize]);
    let c = |x: &Color| Color::from(cs[std.color_index(x).unwrap() as usize]);
    let rules = g
        .rules()
        .iter()
        .map(|r| match r {
            Rule::Primitive { word, color } => Rule::primitive(w(word), c(color)),
            Rule::Function(f) => Rule::function(w(&f.word), f.shape.clone()),
        })
        .collect();
    Grammar::new(g.alphabet().clone(), rules)
}

#[test]
fn overlap_basics() {
    let pool = distinct_pool();
    let keys: BTreeSet<_> = pool.iter().map(|g| combination_key(g).unwrap()).collect();
    assert_eq!(keys.len(), 20);
    assert_eq!(overlap_count(&pool, &pool[..7]).unwrap().k, 7);
    let r = overlap_count(&pool[..10], &pool[10..]).unwrap();
    assert_eq!((r.k, r.n), (0, 10));
    let two = with_shapes(&[RuleShape::repeat(SlotKind::String, 2), RuleShape::repeat(SlotKind::String, 3)]);
    assert_eq!(overlap_count(&pool, &[two]).unwrap_err().kind(), "WrongFunctionCount");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_counts_planted_keys(
        order in Just((0..20usize).collect::<Vec<_>>()).prop_shuffle(),
        shared in 0usize..=6,
        train_only in 0usize..=7,
        val_only in 0usize..=7,
        words in Just(transduce::symbols::DEFAULT_WORDS.to_vec()).prop_shuffle(),
        cs in Just(transduce::symbols::DEFAULT_COLORS.to_vec()).prop_shuffle(),
    ) {
        let pool = distinct_pool();
        let pick = |r: std::ops::Range<usize>| -> Vec<Grammar> { order[r].iter().map(|&i| pool[i].clone()).collect() };
        let mut train = pick(0..shared);
        train.extend(pick(shared..shared + train_only));
        let mut val = pick(shared + train_only..shared + train_only + val_only);
        val.extend(pick(0..shared));
        let r = overlap_count(&train, &val).unwrap();
        prop_assert_eq!(r.k, shared);
        prop_assert_eq!(r.n, val.len());
        prop_assert!(r.k <= r.n);

        let moved: Vec<Grammar> = val.iter().map(|g| relabel(g, &words, &cs)).collect();
        prop_assert_eq!(overlap_count(&train, &moved).unwrap().k, shared);
    }

    #[test]
    fn labels_are_sound(
        id in prop::sample::select(vec!["133", "1", "32", "122"]),
        q in any::<prop::sample::Index>(),
        pick in any::<prop::sample::Index>(),
    ) {
        let e = fixtures::get(id).unwrap().episode();
        let g = e.grammar.clone().unwrap();
        let input = e.query[q.index(e.query.len())].input.clone();
        let policy = ParsePolicy::default();
        let target = canonical_derive(&g, &input, &policy).unwrap();
        let all = enumerate_outputs(&g, &input, Some(policy.caps)).unwrap();
        let out = all[pick.index(all.len())].clone();
        let l = classify_error(&g, &input, &Response::Colors(out.clone()), &SearchBudget::default()).unwrap();
        if out == target {
            prop_assert_eq!(l, ErrorLabel::Correct);
        } else {
            prop_assert_eq!(l.kind(), LabelKind::AltParse);
        }
    }

    #[test]
    fn substitutions_reproduce(
        id in prop::sample::select(vec!["133", "1", "32", "122"]),
        q in any::<prop::sample::Index>(),
        f in any::<prop::sample::Index>(),
        s in any::<prop::sample::Index>(),
    ) {
        let e = fixtures::get(id).unwrap().episode();
        let g = e.grammar.clone().unwrap();
        let input = e.query[q.index(e.query.len())].input.clone();
        let present: Vec<Word> = g.functions().map(|f| f.word.clone()).filter(|w| input.contains(w)).collect();
        prop_assume!(!present.is_empty());
        let word = present[f.index(present.len())].clone();
        let family = function_family(8);
        let shape = family[s.index(family.len())].clone();
        let policy = ParsePolicy::default();
        let swapped = g.with_function(&word, shape.clone());
        let Ok(out) = canonical_derive(&swapped, &input, &policy) else { return Ok(()) };
        let l = classify_error(&g, &input, &Response::Colors(out.clone()), &SearchBudget::default()).unwrap();
        let target = canonical_derive(&g, &input, &policy).unwrap();
        let alts = enumerate_outputs(&g, &input, Some(policy.caps)).unwrap();
        match l.kind() {
            LabelKind::Correct => prop_assert_eq!(&out, &target),
            LabelKind::AltParse => prop_assert!(alts.contains(&out) && out != target),
            LabelKind::RuleSubstitution => {
                prop_assert!(!alts.contains(&out));
                prop_assert!(l.names(&word, |x| *x == shape));
                for sub in l.substitutions() {
                    let h = g.with_function(&sub.word, sub.shape.clone());
                    prop_assert_eq!(canonical_derive(&h, &input, &policy).unwrap(), out.clone());
                }
            }
            other => return Err(TestCaseError::fail(format!("{other:?}"))),
        }
    }
}
