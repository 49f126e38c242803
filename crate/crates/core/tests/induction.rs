mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use proptest::prelude::*;
use transduce::{
    canonical_derive, fixtures, identification_witness, induce_grammars, is_identifying, refine, sample_episode,
    sample_grammar, words, Ambiguity, Assignment, Error, GenConfig, Hypothesis, Pair, ParsePolicy, Refinement,
    RuleShape, SearchBudget, SlotKind, Word,
};

fn support(id: &str) -> Vec<Pair> {
    fixtures::get(id).unwrap().episode().support
}

fn pair(input: &str, output: &str) -> Pair {
    Pair {
        input: words(input),
        output: transduce::colors(output),
    }
}

fn twice() -> Assignment {
    Assignment::Function(RuleShape::repeat(SlotKind::String, 2))
}

#[test]
fn fixture_supports_match_brute_force() {
    for f in fixtures::all() {
        let e = f.episode();
        let t = Instant::now();
        let ind = induce_grammars(&e.support, &fixtures::alphabet(), &SearchBudget::default()).unwrap();
        let fast = t.elapsed();
        assert!(ind.complete);
        let t = Instant::now();
        let oracle = common::brute_force_induce(&e.support, &fixtures::alphabet(), 8);
        eprintln!("{}: {} grammars in {:?}, oracle {} in {:?}", f.id, ind.grammars.len(), fast, oracle.len(), t.elapsed());
        assert_eq!(common::as_set(&ind.grammars), oracle);
    }
}

#[test]
fn induced_grammars_reproduce_support_and_contain_the_printed_grammar() {
    let policy = ParsePolicy::default();
    for f in fixtures::all() {
        let e = f.episode();
        let grammars = induce_grammars(&e.support, &fixtures::alphabet(), &SearchBudget::default())
            .unwrap()
            .into_result()
            .unwrap();
        for g in &grammars {
            for p in &e.support {
                assert_eq!(canonical_derive(g, &p.input, &policy).unwrap(), p.output);
            }
        }
        let vocab: BTreeSet<Word> = e.support.iter().flat_map(|p| p.input.clone()).collect();
        let printed = e.grammar.as_ref().unwrap().restricted_to(&vocab);
        assert!(grammars.iter().any(|g| g.assignments() == printed.assignments()), "{}", f.id);
    }
}

#[test]
fn fep_is_pinned_in_133() {
    let grammars = induce_grammars(&support("133"), &fixtures::alphabet(), &SearchBudget::default())
        .unwrap()
        .into_result()
        .unwrap();
    assert_eq!(grammars.len(), 2);
    for g in &grammars {
        assert_eq!(g.assignments()[&Word::from("fep")], twice());
    }
}

#[test]
fn support_with_queries_pins_122() {
    let e = fixtures::get("122").unwrap().episode();
    let mut pairs = e.support.clone();
    pairs.extend(e.query.iter().map(|q| Pair {
        input: q.input.clone(),
        output: q.target.clone().unwrap(),
    }));
    let grammars = induce_grammars(&pairs, &fixtures::alphabet(), &SearchBudget::default())
        .unwrap()
        .into_result()
        .unwrap();
    assert_eq!(grammars.len(), 1);
    let fep = grammars[0].function(&Word::from("fep")).unwrap();
    assert_eq!(fep.shape.render("fep"), "u1 fep x2 -> x2 u1 u1 x2");
}

#[test]
fn support_alone_leaves_fep_unary_in_122() {
    let grammars = induce_grammars(&support("122"), &fixtures::alphabet(), &SearchBudget::default())
        .unwrap()
        .into_result()
        .unwrap();
    let unary = grammars
        .iter()
        .filter(|g| g.function(&Word::from("fep")).is_some_and(|f| f.shape.arity() == 1))
        .count();
    assert!(unary > 0);
    assert!(grammars.iter().any(|g| g.function(&Word::from("fep")).is_some_and(|f| f.shape.arity() == 2)));
}

#[test]
fn primitive_only_support() {
    let s = vec![pair("wif", "BLUE"), pair("lug", "PURPLE"), pair("wif lug", "BLUE PURPLE")];
    let ind = induce_grammars(&s, &fixtures::alphabet(), &SearchBudget::default()).unwrap();
    assert!(ind.complete);
    assert_eq!(ind.grammars.len(), 1);
    assert_eq!(ind.grammars[0].functions().count(), 0);
}

#[test]
fn inconsistent_support_is_empty() {
    let s = vec![pair("wif", "BLUE"), pair("wif", "RED")];
    let ind = induce_grammars(&s, &fixtures::alphabet(), &SearchBudget::default()).unwrap();
    assert!(ind.complete && ind.grammars.is_empty());
    assert!(ind.contradiction.is_some());
}

#[test]
fn tiny_budget_reports_incomplete() {
    let b = SearchBudget {
        max_expansions: 10,
        ..SearchBudget::default()
    };
    let ind = induce_grammars(&support("32"), &fixtures::alphabet(), &b).unwrap();
    assert!(!ind.complete);
    assert!(matches!(ind.into_result(), Err(Error::BudgetExhausted { .. })));
}

#[test]
fn bad_inputs() {
    assert!(induce_grammars(&[], &fixtures::alphabet(), &SearchBudget::default()).is_err());
    let b = SearchBudget {
        max_rhs_len: 0,
        ..SearchBudget::default()
    };
    assert!(matches!(b.validate(), Err(Error::Config(_))));
    let s = vec![pair("wif", "BLUE"), pair("nope", "BLUE")];
    assert!(matches!(
        induce_grammars(&s, &fixtures::alphabet(), &SearchBudget::default()),
        Err(Error::UnknownWord(_))
    ));
}

fn lug_gazzer() -> Hypothesis {
    let a = fixtures::alphabet();
    let ws = words("lug gazzer fep");
    Hypothesis::new(a, &ws, 8)
        .unwrap()
        .assume(&Word::from("lug"), &Assignment::Primitive("PURPLE".into()))
        .unwrap()
        .assume(&Word::from("gazzer"), &Assignment::Function(RuleShape::repeat(SlotKind::String, 3)))
        .unwrap()
}

#[test]
fn refine_pins_fep() {
    let p = pair("lug gazzer fep", "PURPLE PURPLE PURPLE PURPLE PURPLE PURPLE");
    let Refinement::Refined(h) = refine(&lug_gazzer(), &p).unwrap() else {
        panic!("contradiction")
    };
    assert_eq!(h.domain(&Word::from("fep")).unwrap(), vec![twice()]);
    assert_eq!(h.provenance(&Word::from("fep")), &[0]);
    assert_eq!(h.checked(), std::slice::from_ref(&p));

    let again = refine(&h, &p).unwrap();
    assert_eq!(again, Refinement::Refined(h));
}

#[test]
fn refine_names_fep() {
    let h = lug_gazzer()
        .assume(&Word::from("fep"), &Assignment::Function(RuleShape::repeat(SlotKind::String, 3)))
        .unwrap();
    let p = pair("lug gazzer fep", "PURPLE PURPLE PURPLE PURPLE PURPLE PURPLE");
    let Refinement::Contradiction(report) = refine(&h, &p).unwrap() else {
        panic!("refined")
    };
    assert_eq!(report.pair, p);
    assert!(report.culprits.contains(&vec![Word::from("fep")]));
    assert!(report.culprits.iter().all(|c| c.len() == 1));
}

#[test]
fn identifying_examples() {
    let b = SearchBudget::default();
    let g1 = fixtures::get("1").unwrap().episode().grammar.unwrap();
    assert!(is_identifying(&support("1"), &g1, &b).unwrap());

    let g133 = fixtures::get("133").unwrap().episode().grammar.unwrap();
    let without_fep: Vec<Pair> = support("133")
        .into_iter()
        .filter(|p| !p.input.contains(&Word::from("fep")))
        .collect();
    assert!(!is_identifying(&without_fep, &g133, &b).unwrap());
    assert_eq!(
        identification_witness(&without_fep, &g133, &b, 6).unwrap(),
        Some(Ambiguity::Unseen(Word::from("fep")))
    );

    let g32 = fixtures::get("32").unwrap().episode().grammar.unwrap();
    assert_eq!(
        identification_witness(&support("32"), &g32, &b, 6).unwrap(),
        Some(Ambiguity::Unseen(Word::from("wif")))
    );

    let wrong = g1.with_function(&Word::from("fep"), RuleShape::repeat(SlotKind::String, 4));
    assert_eq!(identification_witness(&support("1"), &wrong, &b, 6).unwrap(), Some(Ambiguity::Inconsistent));
}

/// The 133 support leaves the slot kind of `zup`'s left argument open, and
/// the two readings disagree on an input of five words.
#[test]
fn support_133_is_not_identifying() {
    let b = SearchBudget::default();
    let g = fixtures::get("133").unwrap().episode().grammar.unwrap();
    let Some(Ambiguity::Differs { grammar, input }) = identification_witness(&support("133"), &g, &b, 6).unwrap() else {
        panic!("identifying")
    };
    let policy = ParsePolicy::default();
    let mine = canonical_derive(&g, &input, &policy).ok();
    let theirs = canonical_derive(&grammar, &input, &policy).ok();
    assert_ne!(mine, theirs);

    let oracle = common::brute_force_induce(&support("133"), &fixtures::alphabet(), 8);
    assert_eq!(oracle.len(), 2);
    let zups: BTreeSet<String> = oracle
        .iter()
        .map(|g| {
            let (_, m) = g.iter().find(|(w, _)| w.as_str() == "zup").unwrap();
            match m {
                Assignment::Function(s) => s.render("zup"),
                other => panic!("{other:?}"),
            }
        })
        .collect();
    assert_eq!(
        zups,
        BTreeSet::from(["u1 zup x2 -> u1 x2".to_string(), "x1 zup x2 -> x1 x2".to_string()])
    );
    assert!(!is_identifying(&support("133"), &g, &b).unwrap());
}

fn small_cfg() -> GenConfig {
    GenConfig {
        support_size: 10,
        query_size: 2,
        ..GenConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_supports_match_brute_force(seed in any::<u64>()) {
        let a = fixtures::alphabet();
        let cfg = small_cfg();
        let Ok(g) = sample_grammar(&a, &cfg, seed) else { return Ok(()) };
        let Ok(e) = sample_episode(&g, &cfg, seed) else { return Ok(()) };
        let ind = induce_grammars(&e.support, &a, &SearchBudget::default()).unwrap();
        prop_assert!(ind.complete);
        let oracle = common::brute_force_induce(&e.support, &a, 8);
        prop_assert_eq!(common::as_set(&ind.grammars), oracle);
        let vocab: BTreeSet<Word> = e.support.iter().flat_map(|p| p.input.clone()).collect();
        let printed = g.restricted_to(&vocab);
        prop_assert!(ind.grammars.iter().any(|h| h.assignments() == printed.assignments()));
    }

    #[test]
    fn refine_is_monotone(seed in any::<u64>(), picks in prop::collection::vec(any::<prop::sample::Index>(), 16)) {
        let a = fixtures::alphabet();
        let cfg = small_cfg();
        let Ok(g) = sample_grammar(&a, &cfg, seed) else { return Ok(()) };
        let Ok(e) = sample_episode(&g, &cfg, seed) else { return Ok(()) };
        let vocab: BTreeSet<Word> = e.support.iter().flat_map(|p| p.input.clone()).collect();
        let mut h = Hypothesis::new(a.clone(), &vocab, 8).unwrap();
        let mut remaining = e.support.clone();
        let mut seen: BTreeSet<Word> = BTreeSet::new();
        for pick in &picks {
            if remaining.is_empty() {
                break;
            }
            let fresh = |p: &Pair| p.input.iter().filter(|w| !seen.contains(*w)).collect::<BTreeSet<_>>().len();
            let least = remaining.iter().map(fresh).min().unwrap();
            let ties: Vec<usize> = (0..remaining.len()).filter(|&i| fresh(&remaining[i]) == least).collect();
            let p = remaining.remove(ties[pick.index(ties.len())]);
            seen.extend(p.input.iter().cloned());

            let before: Vec<usize> = vocab.iter().map(|w| h.domain_size(w).unwrap()).collect();
            let Refinement::Refined(next) = refine(&h, &p).unwrap() else {
                return Err(TestCaseError::fail("contradiction on a consistent support"));
            };
            let after: Vec<usize> = vocab.iter().map(|w| next.domain_size(w).unwrap()).collect();
            prop_assert!(before.iter().zip(&after).all(|(b, a)| a <= b));
            for w in &vocab {
                let old = h.domain(w).unwrap();
                prop_assert!(next.domain(w).unwrap().iter().all(|m| old.contains(m)));
                prop_assert!(next.domain(w).unwrap().contains(&g.assignments()[w]));
            }
            prop_assert_eq!(refine(&next, &p).unwrap(), Refinement::Refined(next.clone()));
            h = next;
        }
    }
}
