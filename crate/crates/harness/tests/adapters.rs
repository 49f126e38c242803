use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::time::{Duration, Instant};

use transduce::{
    classify_run, consistency_metrics, fixtures, generate_episode, score_run, words, Alphabet, GenConfig, LabelKind,
    Response, RuleShape, SearchBudget, SlotKind, Word,
};
use transduce_harness::{
    run_adapter, run_model, simulate, Adapter, AdapterSpec, HttpAdapter, Request, SimulatedTransducer, StdioAdapter,
    Stub, StubMode, Transport,
};

fn exe() -> String {
    env!("CARGO_BIN_EXE_transduce").to_string()
}

fn request(query: &str) -> Request {
    Request {
        support: fixtures::get("133").unwrap().episode().support,
        query: words(query),
        sample: 0,
    }
}

#[test]
fn stdio_oracle_scores_everything() {
    let e = fixtures::get("133").unwrap().episode();
    let mut a = StdioAdapter::spawn(&[exe(), "serve".into(), "--fixture".into(), "133".into()], Duration::from_secs(10))
        .unwrap();
    let run = run_adapter(&mut a, &e, 4, Some("oracle".into())).unwrap();
    let s = score_run(&e, &run).unwrap();
    assert_eq!((s.correct, s.total), (40, 40));
    assert_eq!(run.model.as_deref(), Some("oracle"));
}

#[test]
fn substituted_stub_triples_fep() {
    let command = vec![
        exe(),
        "serve".into(),
        "--fixture".into(),
        "133".into(),
        "--substitute".into(),
        "x1 fep -> x1 x1 x1".into(),
    ];
    let mut a = StdioAdapter::spawn(&command, Duration::from_secs(10)).unwrap();
    let r = a.transduce(&request("wif fep")).unwrap();
    assert_eq!(r, Response::Colors(transduce::colors("BLUE BLUE BLUE")));
}

#[test]
fn http_stub_in_process() {
    let g = fixtures::get("32").unwrap().episode().grammar.unwrap();
    let server = Stub::new(StubMode::Oracle(g)).serve_http("127.0.0.1:0").unwrap();
    let e = fixtures::get("32").unwrap().episode();
    for concurrent in [false, true] {
        let spec = AdapterSpec {
            concurrent,
            samples: 3,
            ..AdapterSpec::new(Transport::Http { url: server.url.clone() })
        };
        let run = run_model(&spec, &e).unwrap();
        let s = score_run(&e, &run).unwrap();
        assert_eq!((s.correct, s.total), (30, 30));
    }
    let wrong = ureq::post(&format!("{}/elsewhere", server.url)).send_string("{}");
    assert!(matches!(wrong, Err(ureq::Error::Status(404, _))));
}

#[test]
fn unreachable_server_times_out() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut a = HttpAdapter::new(&format!("http://127.0.0.1:{port}"), Duration::from_millis(500));
    let err = a.transduce(&request("wif")).unwrap_err();
    assert_eq!(err.kind(), "AdapterTimeout");
}

#[test]
fn silent_program_times_out() {
    let started = Instant::now();
    let mut a = StdioAdapter::spawn(&["sleep".into(), "30".into()], Duration::from_millis(300)).unwrap();
    let err = a.transduce(&request("wif")).unwrap_err();
    assert_eq!(err.kind(), "AdapterTimeout");
    assert!(started.elapsed() < Duration::from_secs(10));

    let err = StdioAdapter::spawn(&["/definitely/not/here".into()], Duration::from_millis(300))
        .and_then(|mut a| a.transduce(&request("wif")))
        .unwrap_err();
    assert_eq!(err.kind(), "AdapterTimeout");
}

#[test]
fn malformed_replies_are_protocol_errors() {
    let mut a = StdioAdapter::spawn(&["cat".into()], Duration::from_secs(5)).unwrap();
    let err = a.transduce(&request("wif")).unwrap_err();
    assert_eq!(err.kind(), "ProtocolError");
}

#[test]
fn echo_responses_are_kept_and_labelled_nonsystematic() {
    let e = fixtures::get("133").unwrap().episode();
    let server = Stub::new(StubMode::Echo).serve_http("127.0.0.1:0").unwrap();
    let mut a = HttpAdapter::new(&server.url, Duration::from_secs(5));
    let run = run_adapter(&mut a, &e, 2, None).unwrap();
    assert_eq!(run.responses[0][0], Response::Colors(e.query[0].input.iter().map(|w| w.as_str().into()).collect()));
    let labels = classify_run(&e, &run, &SearchBudget::default()).unwrap();
    assert_eq!(labels.count(LabelKind::NonSystematic), labels.total());
}

#[test]
fn wire_lines_are_one_per_request() {
    let mut child = std::process::Command::new(exe())
        .args(["serve", "--fixture", "133"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let mut stdout = BufReader::new(child.stdout.take().unwrap());
    for q in ["wif fep", "lug gazzer", "not json"] {
        let line = if q == "not json" { q.to_string() } else { request(q).to_line() };
        writeln!(stdin, "{line}").unwrap();
        let mut reply = String::new();
        stdout.read_line(&mut reply).unwrap();
        let v: serde_json::Value = serde_json::from_str(&reply).unwrap();
        assert!(v.get("out").is_some() || v.get("error").is_some());
    }
    drop(stdin);
    assert!(child.wait().unwrap().success());
}

fn grammar133() -> transduce::Grammar {
    fixtures::get("133").unwrap().episode().grammar.unwrap()
}

#[test]
fn zero_probabilities_give_the_oracle() {
    let e = fixtures::get("133").unwrap().episode();
    let run = simulate(&SimulatedTransducer::oracle(grammar133(), 3), &e).unwrap();
    assert_eq!(score_run(&e, &run).unwrap().correct, 100);
    assert_eq!(run.model.as_deref(), Some("simulated-3"));
}

#[test]
fn simulation_is_seeded() {
    let e = fixtures::get("133").unwrap().episode();
    let mut t = SimulatedTransducer::oracle(grammar133(), 11);
    t.p_noise = 0.3;
    t.p_alt_parse = 0.3;
    assert_eq!(simulate(&t, &e).unwrap(), simulate(&t, &e).unwrap());
    let other = SimulatedTransducer { seed: 12, ..t.clone() };
    assert_ne!(simulate(&t, &e).unwrap(), simulate(&other, &e).unwrap());
}

#[test]
fn alt_parse_mode_on_unambiguous_queries_is_canonical() {
    let e = fixtures::get("1").unwrap().episode();
    let g = e.grammar.clone().unwrap();
    let mut t = SimulatedTransducer::oracle(g.clone(), 5);
    t.p_alt_parse = 1.0;
    let run = simulate(&t, &e).unwrap();
    let policy = transduce::ParsePolicy::default();
    for (q, row) in e.query.iter().zip(&run.responses) {
        let outs = transduce::enumerate_outputs(&g, &q.input, Some(policy.caps)).unwrap();
        let target = transduce::canonical_derive(&g, &q.input, &policy).unwrap();
        for r in row {
            let c = r.colors().unwrap();
            assert!(outs.contains(c));
            if outs.len() == 1 {
                assert_eq!(c, &target);
            } else {
                assert_ne!(c, &target);
            }
        }
    }
}

#[test]
fn noise_is_nonsystematic() {
    let e = fixtures::get("133").unwrap().episode();
    let mut t = SimulatedTransducer::oracle(grammar133(), 2);
    t.p_noise = 1.0;
    let run = simulate(&t, &e).unwrap();
    let labels = classify_run(&e, &run, &SearchBudget::default()).unwrap();
    let m = consistency_metrics(&run, Some(&labels));
    assert!(m.non_systematic_rate >= 0.9, "{}", m.non_systematic_rate);
}

#[test]
fn planted_substitution_is_recovered() {
    let e = fixtures::get("133").unwrap().episode();
    let thrice = RuleShape::repeat(SlotKind::String, 3);
    let t = SimulatedTransducer::oracle(grammar133(), 8).with_substitution(Word::from("fep"), thrice.clone(), 1.0);
    let run = simulate(&t, &e).unwrap();
    let labels = classify_run(&e, &run, &SearchBudget::default()).unwrap();
    for (q, row) in e.query.iter().zip(&labels.labels) {
        let visible = q.input.contains(&Word::from("fep"));
        for l in row {
            if visible {
                assert!(l.names(&Word::from("fep"), |s| *s == thrice), "{:?} {l:?}", q.input);
            } else {
                assert_eq!(l.kind(), LabelKind::Correct);
            }
        }
    }
}

#[test]
fn invalid_settings_are_rejected() {
    let g = grammar133();
    let e = fixtures::get("133").unwrap().episode();
    let mut t = SimulatedTransducer::oracle(g.clone(), 0);
    t.p_noise = 0.7;
    t.p_alt_parse = 0.7;
    assert_eq!(simulate(&t, &e).unwrap_err().kind(), "InvalidConfig");
    let t = SimulatedTransducer::oracle(g, 0).with_substitution(Word::from("wif"), RuleShape::repeat(SlotKind::Token, 2), 1.0);
    assert_eq!(simulate(&t, &e).unwrap_err().kind(), "InvalidConfig");
    let spec = AdapterSpec {
        samples: 0,
        ..AdapterSpec::new(Transport::Http { url: "http://127.0.0.1:1".into() })
    };
    assert_eq!(run_model(&spec, &e).unwrap_err().kind(), "InvalidConfig");
}

#[test]
fn generated_episodes_through_the_http_oracle() {
    let a = std::sync::Arc::new(Alphabet::standard());
    let cfg = GenConfig::default();
    for seed in 0..5 {
        let e = generate_episode(&a, &cfg, seed).unwrap();
        let server = Stub::new(StubMode::Oracle(e.grammar.clone().unwrap())).serve_http("127.0.0.1:0").unwrap();
        let spec = AdapterSpec {
            samples: 2,
            ..AdapterSpec::new(Transport::Http { url: server.url.clone() })
        };
        let run = run_model(&spec, &e).unwrap();
        let s = score_run(&e, &run).unwrap();
        assert_eq!(s.correct, s.total);
    }
}
