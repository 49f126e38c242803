use transduce::fixtures::{self, ErratumKind, ERRATA};
use transduce::{
    canonical_derivation, canonical_derive, colors, enumerate_derivations, enumerate_outputs, is_translatable,
    validate_grammar, words, yield_of, Derivation, Error, FunctionRule, Grammar, ParsePolicy, RuleShape, SlotKind,
    Span, Word,
};

fn grammar(id: &str) -> Grammar {
    fixtures::get(id).unwrap().episode().grammar.unwrap()
}

fn interpret(id: &str, input: &str) -> String {
    transduce::join(&canonical_derive(&grammar(id), &words(input), &ParsePolicy::default()).unwrap())
}

#[test]
fn every_support_and_query_pair_is_canonical() {
    let policy = ParsePolicy::default();
    let mut checked = 0;
    for f in fixtures::all() {
        let e = f.episode();
        let g = e.grammar.as_ref().unwrap();
        assert!(validate_grammar(g).is_empty(), "{}", f.id);
        for p in &e.support {
            assert_eq!(canonical_derive(g, &p.input, &policy).unwrap(), p.output, "{} {:?}", f.id, p.input);
            assert!(enumerate_outputs(g, &p.input, Some(policy.caps)).unwrap().contains(&p.output));
            checked += 1;
        }
        for q in &e.query {
            let t = q.target.as_ref().unwrap();
            assert_eq!(&canonical_derive(g, &q.input, &policy).unwrap(), t, "{} {:?}", f.id, q.input);
            checked += 1;
        }
    }
    assert_eq!(checked, 4 * 14 + 10 + 10 + 10 + 11);
}

#[test]
fn printed_target_errata_are_underivable() {
    for err in ERRATA.iter().filter(|e| e.kind == ErratumKind::Target) {
        let f = fixtures::get(err.episode).unwrap();
        let e = f.episode();
        let q = &e.query[err.index];
        assert_eq!(transduce::join(q.target.as_ref().unwrap()), err.stored);
        let g = e.grammar.as_ref().unwrap();
        let all = enumerate_outputs(g, &q.input, None).unwrap();
        assert!(!all.contains(&colors(err.printed)));
    }
}

#[test]
fn printed_rule_errata_do_not_parse() {
    for err in ERRATA.iter().filter(|e| e.kind == ErratumKind::Rule) {
        assert!(transduce::parse_rule(err.printed).is_err(), "{}", err.printed);
        let g = grammar(err.episode);
        assert_eq!(g.rules()[err.index].to_string(), err.stored);
    }
}

#[test]
fn interpretation_examples() {
    assert_eq!(interpret("133", "lug gazzer fep"), "PURPLE PURPLE PURPLE PURPLE PURPLE PURPLE");
    assert_eq!(interpret("133", "kiki zup wif zup tufa fep"), "PINK BLUE RED RED");
    assert_eq!(interpret("133", "wif zup tufa gazzer"), "BLUE RED RED RED");
    assert_eq!(interpret("1", "fep kiki wif lug zup"), "RED BLUE RED PURPLE RED BLUE RED PURPLE");
}

#[test]
fn translatability() {
    let g = grammar("133");
    assert!(is_translatable(&g, &words("wif")).unwrap());
    assert!(!is_translatable(&g, &words("zup wif")).unwrap());
    assert!(!is_translatable(&g, &[]).unwrap());
    assert!(matches!(is_translatable(&g, &words("wif nope")), Err(Error::UnknownWord(_))));
    assert!(matches!(
        canonical_derive(&g, &words("zup wif"), &ParsePolicy::default()),
        Err(Error::NotTranslatable { .. })
    ));
}

#[test]
fn enumeration_examples() {
    let g = grammar("133");
    let outs = enumerate_outputs(&g, &words("wif zup kiki fep"), Some(Default::default())).unwrap();
    assert_eq!(outs, vec![colors("BLUE PINK BLUE PINK"), colors("BLUE PINK PINK")]);
    let ds = enumerate_derivations(&g, &words("wif"), None).unwrap();
    assert_eq!(ds.len(), 1);
    assert_eq!(ds[0].1, colors("BLUE"));

    let g1 = grammar("1");
    let outs = enumerate_outputs(&g1, &words("fep gazzer kiki wif lug"), Some(Default::default())).unwrap();
    assert_eq!(outs, vec![colors("RED RED RED BLUE RED RED RED PURPLE")]);
}

#[test]
fn bracketings_are_named() {
    let g = grammar("133");
    let ds = enumerate_derivations(&g, &words("wif zup kiki fep"), None).unwrap();
    let mut shown: Vec<String> = ds.iter().map(|(d, _)| d.to_string()).collect();
    shown.sort();
    assert_eq!(shown, vec!["((wif zup kiki) fep)", "(wif zup (kiki fep))"]);
    let canon = canonical_derivation(&g, &words("wif zup kiki fep"), &ParsePolicy::default()).unwrap();
    assert_eq!(canon.to_string(), "(wif zup (kiki fep))");
    assert_eq!(canon.words(), words("wif zup kiki fep"));
}

#[test]
fn yields() {
    let leaf = |w: &str, c: &str, at: usize| {
        std::sync::Arc::new(Derivation::Leaf {
            span: Span::new(at, at + 1),
            word: Word::from(w),
            color: c.into(),
        })
    };
    assert_eq!(yield_of(&leaf("wif", "BLUE", 0)), colors("BLUE"));
    let thrice = Derivation::Apply {
        span: Span::new(0, 2),
        rule: FunctionRule::new("gazzer", RuleShape::repeat(SlotKind::String, 3)),
        args: vec![leaf("wif", "BLUE", 0)],
    };
    assert_eq!(yield_of(&thrice), colors("BLUE BLUE BLUE"));
    let concat = Derivation::Concat {
        span: Span::new(0, 2),
        left: leaf("kiki", "PINK", 0),
        right: leaf("tufa", "RED", 1),
    };
    assert_eq!(yield_of(&concat), colors("PINK RED"));
}

#[test]
fn caps() {
    let g = grammar("133");
    let policy = ParsePolicy::default();
    match canonical_derive(&g, &words("kiki tufa gazzer fep"), &policy) {
        Err(Error::CapExceeded { actual: 12, limit: 8, .. }) => {}
        other => panic!("{other:?}"),
    }
    let y = canonical_derive(&g, &words("kiki tufa gazzer fep"), &policy.without_caps()).unwrap();
    assert_eq!(y.len(), 12);
    let capped = enumerate_outputs(&g, &words("kiki tufa gazzer fep"), Some(policy.caps)).unwrap();
    assert!(!capped.contains(&y));
    assert!(capped.contains(&colors("PINK RED RED RED RED RED RED")));
    assert!(capped.iter().all(|o| o.len() <= 8));
    assert!(enumerate_outputs(&g, &words("kiki tufa gazzer fep"), None).unwrap().contains(&y));
    let long = words("wif wif wif wif wif wif wif wif wif wif wif");
    assert!(matches!(canonical_derive(&g, &long, &policy), Err(Error::CapExceeded { .. })));
}

#[test]
fn longest_prefix_policy_misses_a_target() {
    let g = grammar("122");
    let input = words("blicket blicket fep zup lug");
    let shortest = canonical_derive(&g, &input, &ParsePolicy::default()).unwrap();
    let longest = canonical_derive(&g, &input, &ParsePolicy::named("longest-prefix").unwrap()).unwrap();
    assert_eq!(shortest, colors("RED YELLOW BLUE RED RED YELLOW BLUE"));
    assert_ne!(longest, shortest);
}
