use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use transduce::fixtures::{self, Fixture, ERRATA};
use transduce::{
    canonical_derivation, check_consistency, classify_run, combination_key, consistency_metrics, enumerate_derivations,
    generate_episode, identification_witness, induce_grammars, join, make_probe_queries, overlap_count,
    parse_grammar_text, read_episode, read_run, score_run, write_episode, write_grammar, write_run, Alphabet, Ambiguity,
    Episode, GenConfig, Grammar, LabelKind, Pair, ParsePolicy, ProbeFamily, Rule, RunRecord, SearchBudget,
};

use crate::adapter::{run_model, AdapterSpec, Transport};
use crate::error::{HarnessError, Result};
use crate::report::{render, Format, Table};
use crate::simulate::{simulate, SimulatedTransducer};
use crate::stub::{Stub, StubMode};

#[derive(Parser, Debug)]
#[command(name = "transduce", version, about = "Interpret, generate, induce and audit transduction grammar episodes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Where to write the report (a directory for `generate`, the run file
    /// for `simulate` and `run`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Source {
    /// Built-in episode id: 133, 1, 32 or 122.
    #[arg(long, conflicts_with_all = ["episode", "grammar"])]
    pub fixture: Option<String>,

    /// Episode file.
    #[arg(long, conflicts_with = "grammar")]
    pub episode: Option<PathBuf>,

    /// Grammar file with one rule per line.
    #[arg(long)]
    pub grammar: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Args, Debug, Clone)]
pub struct Parsing {
    /// Parse policy: default, longest-prefix, rightmost or rightmost-longest.
    #[arg(long, default_value = "default")]
    pub policy: String,

    /// Enforce the input and output length caps.
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub caps: Switch,
}

impl Parsing {
    fn policy(&self) -> Result<ParsePolicy> {
        let p = ParsePolicy::named(&self.policy).ok_or_else(|| {
            HarnessError::Config(format!(
                "unknown policy `{}`; expected one of {}",
                self.policy,
                ParsePolicy::NAMES.join(", ")
            ))
        })?;
        Ok(match self.caps {
            Switch::On => p,
            Switch::Off => p.without_caps(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Oracle,
    Echo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Wire {
    Stdio,
    Http,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write seeded episodes to the `--out` directory.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        episodes: u64,
        /// JSON file overriding generator settings.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Canonical output of one input.
    Interpret {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        parsing: Parsing,
        /// Space-separated input words.
        input: String,
    },
    /// Every derivation of one input and its output.
    Enumerate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        parsing: Parsing,
        input: String,
    },
    /// Every grammar reproducing an episode's support.
    Induce {
        #[command(flatten)]
        source: Source,
        /// Also require the queries' stored targets.
        #[arg(long)]
        with_queries: bool,
        #[arg(long)]
        max_expansions: Option<u64>,
    },
    /// Exact-match scores of a run.
    Evaluate {
        #[command(flatten)]
        source: Source,
        /// Run file; defaults to the fixture's transcribed run.
        #[arg(long)]
        run: Option<PathBuf>,
    },
    /// Error labels and consistency of a run.
    Classify {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        run: Option<PathBuf>,
        /// Try rule substitutions before other parses.
        #[arg(long)]
        substitution_first: bool,
        #[arg(long)]
        max_expansions: Option<u64>,
    },
    /// Validation episodes whose operation combination occurs in training.
    Overlap {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: PathBuf,
    },
    /// Check the built-in episodes.
    Fixtures,
    /// Structure-sensitivity probe queries.
    Probe {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "unary-binary")]
        family: ProbeFamily,
    },
    /// Run a seeded simulated model on an episode.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Replacement rule, e.g. "x1 fep -> x1 x1 x1".
        #[arg(long)]
        substitute: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        p_substitution: f64,
        #[arg(long, default_value_t = 0.0)]
        p_alt_parse: f64,
        #[arg(long, default_value_t = 0.0)]
        p_noise: f64,
    },
    /// Query an external model over the wire protocol.
    Run {
        #[command(flatten)]
        source: Source,
        /// Adapter program, split on whitespace.
        #[arg(long, conflicts_with = "url")]
        command: Option<String>,
        /// Adapter base URL.
        #[arg(long)]
        url: Option<String>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 30_000)]
        timeout_ms: u64,
        /// Send requests for different queries in parallel (HTTP only).
        #[arg(long)]
        concurrent: bool,
        #[arg(long)]
        model: Option<String>,
    },
    /// Answer wire-protocol requests.
    Serve {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Mode::Oracle)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Wire::Stdio)]
        transport: Wire,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        substitute: Option<String>,
        #[arg(long, default_value = "default")]
        policy: String,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path.display(), e))
}

fn alphabet() -> Arc<Alphabet> {
    fixtures::alphabet()
}

fn fixture(id: &str) -> Result<&'static Fixture> {
    fixtures::get(id).ok_or_else(|| HarnessError::Config(format!("no built-in episode `{id}`")))
}

impl Source {
    fn episode(&self) -> Result<Episode> {
        if let Some(id) = &self.fixture {
            return Ok(fixture(id)?.episode());
        }
        match &self.episode {
            Some(path) => Ok(read_episode(&read(path)?, alphabet())?),
            None => Err(HarnessError::Config("an episode is required: pass --fixture or --episode".into())),
        }
    }

    fn grammar(&self) -> Result<Grammar> {
        if let Some(path) = &self.grammar {
            return Ok(parse_grammar_text(&read(path)?, alphabet())?);
        }
        self.episode()?
            .grammar
            .ok_or_else(|| HarnessError::Config("the episode carries no grammar".into()))
    }

    fn run(&self, path: Option<&Path>) -> Result<RunRecord> {
        match (path, &self.fixture) {
            (Some(p), _) => Ok(read_run(&read(p)?)?),
            (None, Some(id)) => Ok(fixture(id)?.run()),
            (None, None) => Err(HarnessError::Config("a run is required: pass --run".into())),
        }
    }
}

fn substituted(g: Grammar, rule: Option<&str>) -> Result<Grammar> {
    let Some(rule) = rule else { return Ok(g) };
    match transduce::text::parse_rule_in(rule, g.alphabet())? {
        Rule::Function(f) if g.function(&f.word).is_some() => Ok(g.with_function(&f.word, f.shape)),
        _ => Err(HarnessError::Config(format!("`{rule}` does not replace a function rule of the grammar"))),
    }
}

fn budget(max_expansions: Option<u64>) -> SearchBudget {
    let mut b = SearchBudget::default();
    if let Some(m) = max_expansions {
        b.max_expansions = m;
    }
    b
}

fn percent(correct: usize, total: usize) -> String {
    format!("{}/{} ({:.1}%)", correct, total, 100.0 * correct as f64 / total.max(1) as f64)
}

fn emit(cli: &Cli, json: Value, table: Table) -> Result<()> {
    let text = render(cli.format, &json, &table);
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| HarnessError::io(path.display(), e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| HarnessError::io("stdout", e))
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate { seed, episodes, config } => generate(cli, *seed, *episodes, config.as_deref()),
        Command::Interpret { source, parsing, input } => interpret(cli, source, parsing, input),
        Command::Enumerate { source, parsing, input } => enumerate(cli, source, parsing, input),
        Command::Induce {
            source,
            with_queries,
            max_expansions,
        } => induce(cli, source, *with_queries, budget(*max_expansions)),
        Command::Evaluate { source, run } => evaluate(cli, source, run.as_deref()),
        Command::Classify {
            source,
            run,
            substitution_first,
            max_expansions,
        } => classify(cli, source, run.as_deref(), *substitution_first, budget(*max_expansions)),
        Command::Overlap { train, val } => overlap(cli, train, val),
        Command::Fixtures => verify_fixtures(cli),
        Command::Probe { source, family } => probe(cli, source, *family),
        Command::Simulate {
            source,
            seed,
            samples,
            substitute,
            p_substitution,
            p_alt_parse,
            p_noise,
        } => {
            let e = source.episode()?;
            let g = e
                .grammar
                .clone()
                .ok_or_else(|| HarnessError::Config("simulation needs an episode with a grammar".into()))?;
            let mut t = SimulatedTransducer::oracle(g.clone(), *seed);
            if let Some(rule) = substitute {
                let swapped = substituted(g.clone(), Some(rule))?;
                let f = swapped
                    .functions()
                    .find(|f| g.function(&f.word) != Some(f))
                    .or_else(|| swapped.functions().next())
                    .expect("substituted grammar has a function rule")
                    .clone();
                t = t.with_substitution(f.word, f.shape, *p_substitution);
            } else {
                t.p_substitution = *p_substitution;
            }
            t.p_alt_parse = *p_alt_parse;
            t.p_noise = *p_noise;
            t.samples = *samples;
            let run = simulate(&t, &e)?;
            emit_run(cli, &e, run)
        }
        Command::Run {
            source,
            command,
            url,
            samples,
            timeout_ms,
            concurrent,
            model,
        } => {
            let e = source.episode()?;
            let transport = match (command, url) {
                (Some(c), None) => Transport::Stdio {
                    command: c.split_whitespace().map(String::from).collect(),
                },
                (None, Some(u)) => Transport::Http { url: u.clone() },
                _ => return Err(HarnessError::Config("pass exactly one of --command or --url".into())),
            };
            let spec = AdapterSpec {
                transport,
                samples: *samples,
                timeout: Duration::from_millis(*timeout_ms),
                concurrent: *concurrent,
                model: model.clone(),
            };
            let run = run_model(&spec, &e)?;
            emit_run(cli, &e, run)
        }
        Command::Serve {
            source,
            mode,
            transport,
            host,
            port,
            substitute,
            policy,
        } => {
            let mode = match mode {
                Mode::Echo => StubMode::Echo,
                Mode::Oracle => StubMode::Oracle(substituted(source.grammar()?, substitute.as_deref())?),
            };
            let mut stub = Stub::new(mode);
            stub.policy = Parsing {
                policy: policy.clone(),
                caps: Switch::On,
            }
            .policy()?;
            match transport {
                Wire::Stdio => stub
                    .serve_lines(std::io::stdin().lock(), std::io::stdout().lock())
                    .map_err(|e| HarnessError::io("stdio", e)),
                Wire::Http => {
                    let server = stub.serve_http(&format!("{host}:{port}"))?;
                    println!("listening on {}", server.url);
                    let _ = std::io::stdout().flush();
                    server.join();
                    Ok(())
                }
            }
        }
    }
}

fn generate(cli: &Cli, seed: u64, episodes: u64, config: Option<&Path>) -> Result<()> {
    let cfg: GenConfig = match config {
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))?,
        None => GenConfig::default(),
    };
    cfg.validate()?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("episodes"));
    fs::create_dir_all(&dir).map_err(|e| HarnessError::io(dir.display(), e))?;
    let a = Arc::new(Alphabet::standard());
    let mut table = Table::new(["episode", "file", "support", "query", "ambiguous"]);
    let mut files = Vec::new();
    for s in seed..seed + episodes {
        let e = generate_episode(&a, &cfg, s)?;
        let path = dir.join(format!("{}.json", e.id));
        fs::write(&path, write_episode(&e)).map_err(|err| HarnessError::io(path.display(), err))?;
        let ambiguous = e.query.iter().filter(|q| q.ambiguous == Some(true)).count();
        table.row([
            e.id.clone(),
            path.display().to_string(),
            e.support.len().to_string(),
            e.query.len().to_string(),
            ambiguous.to_string(),
        ]);
        files.push(json!({"id": e.id, "file": path.display().to_string(), "ambiguous": ambiguous}));
    }
    let text = render(cli.format, &json!({ "episodes": files }), &table);
    print!("{text}");
    Ok(())
}

fn interpret(cli: &Cli, source: &Source, parsing: &Parsing, input: &str) -> Result<()> {
    let g = source.grammar()?;
    let s = transduce::words(input);
    let d = canonical_derivation(&g, &s, &parsing.policy()?)?;
    let out = transduce::yield_of(&d);
    let mut table = Table::new(["input", "output", "derivation"]);
    table.row([join(&s), join(&out), d.to_string()]);
    let json = json!({ "input": s, "output": out, "derivation": d.to_string() });
    if cli.format == Format::Text {
        let text = format!("{}\n", join(&out));
        return match &cli.out {
            Some(p) => fs::write(p, text).map_err(|e| HarnessError::io(p.display(), e)),
            None => {
                print!("{text}");
                Ok(())
            }
        };
    }
    emit(cli, json, table)
}

fn enumerate(cli: &Cli, source: &Source, parsing: &Parsing, input: &str) -> Result<()> {
    let g = source.grammar()?;
    let s = transduce::words(input);
    let policy = parsing.policy()?;
    let caps = (parsing.caps == Switch::On).then_some(policy.caps);
    let all = enumerate_derivations(&g, &s, caps)?;
    let canonical = transduce::canonical_derive(&g, &s, &policy).ok();
    let mut table = Table::new(["derivation", "output", "canonical"]);
    let mut items = Vec::new();
    for (d, out) in &all {
        let is_canonical = canonical.as_ref() == Some(out);
        table.row([d.to_string(), join(out), if is_canonical { "yes".into() } else { String::new() }]);
        items.push(json!({ "derivation": d.to_string(), "output": out, "canonical": is_canonical }));
    }
    let distinct: std::collections::BTreeSet<_> = all.iter().map(|(_, o)| o).collect();
    table.note(format!("{} derivations, {} distinct outputs", all.len(), distinct.len()));
    emit(cli, json!({ "input": s, "derivations": items, "distinct_outputs": distinct.len() }), table)
}

fn induce(cli: &Cli, source: &Source, with_queries: bool, b: SearchBudget) -> Result<()> {
    let e = source.episode()?;
    let mut pairs = e.support.clone();
    if with_queries {
        pairs.extend(e.query.iter().filter_map(|q| {
            q.target.as_ref().map(|t| Pair {
                input: q.input.clone(),
                output: t.clone(),
            })
        }));
    }
    let ind = induce_grammars(&pairs, &alphabet(), &b)?;
    let mut table = Table::new(["#", "rules"]);
    for (i, g) in ind.grammars.iter().enumerate() {
        table.row([(i + 1).to_string(), write_grammar(g).join("; ")]);
    }
    table.note(format!(
        "{} grammars, {} after {} expansions",
        ind.grammars.len(),
        if ind.complete { "complete" } else { "INCOMPLETE (budget exhausted)" },
        ind.expansions
    ));
    let mut identifying = Value::Null;
    if let (Some(g), false) = (&e.grammar, with_queries) {
        if ind.complete {
            let w = identification_witness(&e.support, g, &b, transduce::induce::IDENTIFY_LEN)?;
            let why = match &w {
                None => "the support identifies the episode grammar".to_string(),
                Some(Ambiguity::Unseen(word)) => format!("`{word}` never occurs in the support"),
                Some(Ambiguity::Inconsistent) => "the episode grammar does not reproduce its support".to_string(),
                Some(Ambiguity::Differs { input, .. }) => {
                    format!("another consistent grammar answers `{}` differently", join(input))
                }
            };
            table.note(why.clone());
            identifying = json!({ "identifying": w.is_none(), "reason": why });
        }
    }
    let json = json!({
        "complete": ind.complete,
        "expansions": ind.expansions,
        "grammars": ind.grammars.iter().map(write_grammar).collect::<Vec<_>>(),
        "contradiction": ind.contradiction,
        "identification": identifying,
    });
    emit(cli, json, table)
}

fn evaluate(cli: &Cli, source: &Source, run: Option<&Path>) -> Result<()> {
    let e = source.episode()?;
    let r = source.run(run)?;
    let score = score_run(&e, &r)?;
    let targets = transduce::eval::query_targets(&e, &ParsePolicy::default())?;
    let mut table = Table::new(["query", "input", "target", "correct"]);
    for (i, (q, s)) in e.query.iter().zip(&score.per_query).enumerate() {
        table.row([i.to_string(), join(&q.input), join(&targets[i]), format!("{}/{}", s.correct, s.samples)]);
    }
    table.note(format!("episode {}: {}", e.id, percent(score.correct, score.total)));
    let reported = source.fixture.as_deref().and_then(|id| fixtures::get(id)).and_then(|f| f.reported_rate);
    let discrepancy = reported.and_then(|p| score.discrepancy(p));
    if let Some(d) = &discrepancy {
        table.note(format!("DISCREPANCY: {d}"));
    }
    emit(cli, json!({ "score": score, "reported_percent": reported, "discrepancy": discrepancy }), table)
}

fn classify(cli: &Cli, source: &Source, run: Option<&Path>, substitution_first: bool, b: SearchBudget) -> Result<()> {
    let e = source.episode()?;
    let r = source.run(run)?;
    let labels = if substitution_first {
        let g = e
            .grammar
            .clone()
            .ok_or_else(|| HarnessError::Config("the episode carries no grammar".into()))?;
        let mut c = transduce::eval::Classifier::new(g, b).substitution_first(true);
        let rows = e
            .query
            .iter()
            .zip(&r.responses)
            .map(|(q, samples)| samples.iter().map(|s| c.classify(&q.input, s)).collect::<transduce::Result<Vec<_>>>())
            .collect::<transduce::Result<Vec<_>>>()?;
        transduce::RunLabels {
            episode: e.id.clone(),
            labels: rows,
        }
    } else {
        classify_run(&e, &r, &b)?
    };
    let metrics = consistency_metrics(&r, Some(&labels));
    let mut headers = vec!["query".to_string(), "input".to_string()];
    headers.extend(LabelKind::ALL.iter().map(|k| k.name().to_string()));
    headers.extend(["modal".to_string(), "distinct".to_string()]);
    let mut table = Table::new(headers);
    for (i, (q, row)) in e.query.iter().zip(&labels.labels).enumerate() {
        let mut cells = vec![i.to_string(), join(&q.input)];
        cells.extend(
            LabelKind::ALL
                .iter()
                .map(|k| row.iter().filter(|l| l.kind() == *k).count().to_string()),
        );
        cells.push(format!("{:.2}", metrics.per_query[i].modal_share));
        cells.push(metrics.per_query[i].distinct.to_string());
        table.row(cells);
    }
    let counts: serde_json::Map<String, Value> = LabelKind::ALL
        .iter()
        .map(|k| (k.name().to_string(), json!(labels.count(*k))))
        .collect();
    let mut totals = vec!["total".to_string(), String::new()];
    totals.extend(LabelKind::ALL.iter().map(|k| labels.count(*k).to_string()));
    table.row(totals);
    table.note(format!("non-systematic rate: {:.3}", metrics.non_systematic_rate));
    emit(cli, json!({ "counts": counts, "labels": labels, "consistency": metrics }), table)
}

fn pool(dir: &Path) -> Result<Vec<(String, Grammar)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir.display(), e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let e = read_episode(&read(&p)?, alphabet())
            .map_err(|err| HarnessError::Config(format!("{}: {err}", p.display())))?;
        let g = e
            .grammar
            .ok_or_else(|| HarnessError::Config(format!("{}: episode carries no grammar", p.display())))?;
        out.push((p.display().to_string(), g));
    }
    Ok(out)
}

fn overlap(cli: &Cli, train: &Path, val: &Path) -> Result<()> {
    let train = pool(train)?;
    let val = pool(val)?;
    let train_g: Vec<Grammar> = train.into_iter().map(|(_, g)| g).collect();
    let val_g: Vec<Grammar> = val.iter().map(|(_, g)| g.clone()).collect();
    let report = overlap_count(&train_g, &val_g)?;
    let mut table = Table::new(["episode", "combination", "in training"]);
    for ((path, g), (key, hit)) in val.iter().zip(&report.keys) {
        debug_assert_eq!(&combination_key(g)?, key);
        table.row([path.clone(), key.to_string(), if *hit { "yes".into() } else { "no".to_string() }]);
    }
    table.note(format!("{}/{} validation episodes reuse a training combination", report.k, report.n));
    emit(cli, serde_json::to_value(&report).expect("report serializes"), table)
}

fn verify_fixtures(cli: &Cli) -> Result<()> {
    let policy = ParsePolicy::default();
    let mut table = Table::new(["episode", "support", "query", "score", "reported", "status"]);
    let mut rows = Vec::new();
    let mut failed = 0;
    for f in fixtures::all() {
        let e = f.episode();
        let consistent = check_consistency(&e, &policy);
        let score = score_run(&e, &f.run())?;
        let discrepancy = f.reported_rate.and_then(|p| score.discrepancy(p));
        let status = match (&consistent, &discrepancy) {
            (Err(err), _) => {
                failed += 1;
                format!("FAILED: {err}")
            }
            (Ok(()), Some(_)) => "verified; rate differs from reported".to_string(),
            (Ok(()), None) => "verified".to_string(),
        };
        let reported = f.reported_rate.map(|p| format!("{p}%")).unwrap_or_else(|| "-".into());
        table.row([
            f.id.to_string(),
            e.support.len().to_string(),
            e.query.len().to_string(),
            percent(score.correct, score.total),
            reported,
            status.clone(),
        ]);
        rows.push(json!({
            "episode": f.id,
            "support": e.support.len(),
            "query": e.query.len(),
            "correct": score.correct,
            "total": score.total,
            "reported_percent": f.reported_rate,
            "discrepancy": discrepancy,
            "status": status,
        }));
    }
    for err in ERRATA {
        table.note(format!("erratum {} #{}: {}", err.episode, err.index, err.note));
    }
    emit(cli, json!({ "fixtures": rows }), table)?;
    if failed > 0 {
        return Err(HarnessError::Config(format!("{failed} built-in episodes failed verification")));
    }
    Ok(())
}

fn probe(cli: &Cli, source: &Source, family: ProbeFamily) -> Result<()> {
    let g = source.grammar()?;
    let probes = make_probe_queries(&g, family)?;
    let mut table = Table::new(["input", "target", "alternatives"]);
    for p in &probes {
        let others: Vec<String> = p.alts.iter().filter(|a| **a != p.target).map(|a| join(a)).collect();
        table.row([join(&p.input), join(&p.target), others.join(" | ")]);
    }
    table.note(format!("{} probe queries ({family})", probes.len()));
    emit(cli, serde_json::to_value(&probes).expect("probes serialize"), table)
}

fn emit_run(cli: &Cli, e: &Episode, run: RunRecord) -> Result<()> {
    if let Some(path) = &cli.out {
        fs::write(path, write_run(&run)).map_err(|err| HarnessError::io(path.display(), err))?;
    }
    let score = score_run(e, &run)?;
    let mut table = Table::new(["query", "input", "correct"]);
    for (i, (q, s)) in e.query.iter().zip(&score.per_query).enumerate() {
        table.row([i.to_string(), join(&q.input), format!("{}/{}", s.correct, s.samples)]);
    }
    table.note(format!("episode {}: {}", e.id, percent(score.correct, score.total)));
    let json = json!({ "run": run, "score": score });
    print!("{}", render(cli.format, &json, &table));
    Ok(())
}
