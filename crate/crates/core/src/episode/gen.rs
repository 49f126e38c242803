use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_consistency, Episode, Pair, QueryPair};
use crate::derive::{canonical_derivation, enumerate_outputs, yield_of, ParsePolicy};
use crate::error::{Error, Result};
use crate::grammar::{FunctionRule, Grammar, GrammarShape, Rule, RuleShape, SlotKind, MAX_RHS_LEN};
use crate::symbols::{join, Alphabet, Caps, InputSequence, OutputSequence, Word};

/// Name of the generator recorded in episode files: ChaCha with 8 rounds,
/// seeded from a 64-bit integer. Grammars draw from stream 0 and episodes
/// from stream 1 of the same seed.
pub const RNG_NAME: &str = "chacha8-u64";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub shape: GrammarShape,
    pub support_size: usize,
    pub query_size: usize,
    pub caps: Caps,
    /// Inclusive range of unary repetition counts.
    pub repeat: (usize, usize),
    /// Inclusive range of binary right-hand side lengths.
    pub binary_len: (usize, usize),
    /// Deepest nesting of applications in generated inputs.
    pub max_depth: usize,
    /// Minimum nesting of applications in a query's canonical derivation.
    pub query_depth: usize,
    pub allow_ambiguous: bool,
    /// Rejection rounds per required pair before giving up.
    pub rounds: usize,
    /// Fresh grammars tried by [`generate_episode`] before giving up.
    pub grammar_attempts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            shape: GrammarShape::default(),
            support_size: 14,
            query_size: 10,
            caps: Caps::default(),
            repeat: (2, 8),
            binary_len: (2, 6),
            max_depth: 3,
            query_depth: 2,
            allow_ambiguous: true,
            rounds: 400,
            grammar_attempts: 64,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.support_size < self.shape.primitives + self.shape.functions {
            return bad("support size must be at least primitives + functions");
        }
        if self.shape.primitives == 0 {
            return bad("at least one primitive rule is needed");
        }
        if self.caps.input == 0 || self.caps.output == 0 {
            return bad("caps must be positive");
        }
        let (lo, hi) = self.repeat;
        if lo == 0 || lo > hi || hi > MAX_RHS_LEN {
            return bad("repetition range must satisfy 1 <= lo <= hi <= 8");
        }
        let (lo, hi) = self.binary_len;
        if lo < 2 || lo > hi || hi > MAX_RHS_LEN {
            return bad("binary length range must satisfy 2 <= lo <= hi <= 8");
        }
        if self.rounds == 0 || self.grammar_attempts == 0 {
            return bad("rounds and attempts must be positive");
        }
        Ok(())
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_kind(rng: &mut ChaCha8Rng) -> SlotKind {
    if rng.gen_bool(0.5) {
        SlotKind::Token
    } else {
        SlotKind::String
    }
}

/// Arity is a fair coin. Unary rules draw the repetition count uniformly;
/// binary rules draw a length uniformly, then a slot sequence uniformly
/// among those using both slots.
fn sample_shape(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> RuleShape {
    if rng.gen_bool(0.5) {
        let kind = sample_kind(rng);
        RuleShape::repeat(kind, rng.gen_range(cfg.repeat.0..=cfg.repeat.1))
    } else {
        let kinds = [sample_kind(rng), sample_kind(rng)];
        let len = rng.gen_range(cfg.binary_len.0..=cfg.binary_len.1);
        loop {
            let rhs: Vec<u8> = (0..len).map(|_| rng.gen_range(1..=2)).collect();
            if rhs.contains(&1) && rhs.contains(&2) {
                return RuleShape::binary(kinds[0], kinds[1], &rhs);
            }
        }
    }
}

pub fn sample_grammar(a: &Arc<Alphabet>, cfg: &GenConfig, seed: u64) -> Result<Grammar> {
    cfg.validate()?;
    let needed = cfg.shape.primitives + cfg.shape.functions;
    if a.words().len() < needed {
        return Err(Error::AlphabetTooSmall {
            what: "input words",
            needed,
            available: a.words().len(),
        });
    }
    if a.colors().len() < cfg.shape.primitives {
        return Err(Error::AlphabetTooSmall {
            what: "colors",
            needed: cfg.shape.primitives,
            available: a.colors().len(),
        });
    }
    let mut rng = rng_for(seed, 0);
    let mut words = a.words().to_vec();
    words.shuffle(&mut rng);
    let mut colors = a.colors().to_vec();
    colors.shuffle(&mut rng);
    let mut rules = Vec::with_capacity(needed);
    for (w, c) in words.iter().zip(&colors).take(cfg.shape.primitives) {
        rules.push(Rule::primitive(w.clone(), c.clone()));
    }
    for w in &words[cfg.shape.primitives..needed] {
        rules.push(Rule::function(w.clone(), sample_shape(&mut rng, cfg)));
    }
    Ok(Grammar::new(a.clone(), rules))
}

struct Sampler<'g> {
    primitives: Vec<&'g Word>,
    functions: Vec<&'g FunctionRule>,
}

impl<'g> Sampler<'g> {
    fn primitive(&self, rng: &mut ChaCha8Rng) -> Word {
        (*self.primitives.choose(rng).expect("grammar has primitives")).clone()
    }

    fn unit(&self, rng: &mut ChaCha8Rng, depth: usize, out: &mut InputSequence) {
        if depth == 0 || self.functions.is_empty() || rng.gen_bool(0.4) {
            out.push(self.primitive(rng));
        } else {
            let f = *self.functions.choose(rng).expect("non-empty");
            self.apply(rng, f, depth, out);
        }
    }

    fn string(&self, rng: &mut ChaCha8Rng, depth: usize, out: &mut InputSequence) {
        let units = if rng.gen_bool(0.75) { 1 } else { 2 };
        for _ in 0..units {
            self.unit(rng, depth, out);
        }
    }

    fn arg(&self, rng: &mut ChaCha8Rng, kind: SlotKind, depth: usize, out: &mut InputSequence) {
        match kind {
            SlotKind::Token => out.push(self.primitive(rng)),
            SlotKind::String => self.string(rng, depth, out),
        }
    }

    fn apply(&self, rng: &mut ChaCha8Rng, f: &FunctionRule, depth: usize, out: &mut InputSequence) {
        let inner = depth.saturating_sub(1);
        self.arg(rng, f.shape.kinds[0], inner, out);
        out.push(f.word.clone());
        if let Some(&k) = f.shape.kinds.get(1) {
            self.arg(rng, k, inner, out);
        }
    }
}

/// Canonical target and application depth when `input` is usable under the caps.
fn accept(g: &Grammar, input: &[Word], policy: &ParsePolicy) -> Option<(OutputSequence, usize)> {
    if input.len() > policy.caps.input {
        return None;
    }
    let d = canonical_derivation(g, input, policy).ok()?;
    Some((yield_of(&d), d.depth()))
}

fn exhausted(what: String, rounds: usize) -> Error {
    Error::GenerationExhausted(format!("{what} after {rounds} rounds"))
}

pub fn sample_episode(g: &Grammar, cfg: &GenConfig, seed: u64) -> Result<Episode> {
    cfg.validate()?;
    let violations = crate::grammar::validate_grammar(g);
    if !violations.is_empty() {
        return Err(Error::InvalidGrammar(violations));
    }
    let policy = ParsePolicy {
        caps: cfg.caps,
        ..ParsePolicy::default()
    };
    let mut rng = rng_for(seed, 1);
    let sampler = Sampler {
        primitives: g.primitives().map(|(w, _)| w).collect(),
        functions: g.functions().collect(),
    };
    let mut seen: BTreeSet<InputSequence> = BTreeSet::new();
    let mut support: Vec<Pair> = Vec::with_capacity(cfg.support_size);

    for (w, c) in g.primitives() {
        seen.insert(vec![w.clone()]);
        support.push(Pair {
            input: vec![w.clone()],
            output: vec![c.clone()],
        });
    }
    let draw = |rng: &mut ChaCha8Rng,
                    seen: &mut BTreeSet<InputSequence>,
                    what: String,
                    gen: &dyn Fn(&mut ChaCha8Rng, &mut InputSequence),
                    ok: &dyn Fn(usize) -> bool|
     -> Result<Pair> {
        for _ in 0..cfg.rounds {
            let mut input = Vec::new();
            gen(rng, &mut input);
            if seen.contains(&input) {
                continue;
            }
            if let Some((output, depth)) = accept(g, &input, &policy) {
                if ok(depth) {
                    seen.insert(input.clone());
                    return Ok(Pair { input, output });
                }
            }
        }
        Err(exhausted(what, cfg.rounds))
    };

    for f in &sampler.functions {
        let pair = draw(
            &mut rng,
            &mut seen,
            format!("cannot cover `{}`", f.word),
            &|rng, out| sampler.apply(rng, f, 1, out),
            &|_| true,
        )?;
        support.push(pair);
    }
    if !sampler.functions.is_empty() {
        let pair = draw(
            &mut rng,
            &mut seen,
            "no support pair composing two functions".into(),
            &|rng, out| {
                let f = *sampler.functions.choose(rng).expect("non-empty");
                sampler.apply(rng, f, 2, out)
            },
            &|d| d >= 2,
        )?;
        support.push(pair);
    }
    while support.len() < cfg.support_size {
        let pair = draw(
            &mut rng,
            &mut seen,
            "support set cannot be filled".into(),
            &|rng, out| sampler.string(rng, 2, out),
            &|_| true,
        )?;
        support.push(pair);
    }
    let primitives = g.primitives().count();
    support[primitives..].sort_by_key(|p| p.input.len());

    let mut query = Vec::with_capacity(cfg.query_size);
    let mut tries = 0;
    while query.len() < cfg.query_size {
        let pair = draw(
            &mut rng,
            &mut seen,
            "query set cannot be filled".into(),
            &|rng, out| sampler.string(rng, cfg.max_depth, out),
            &|d| d >= cfg.query_depth,
        )?;
        let alts = enumerate_outputs(g, &pair.input, Some(cfg.caps))?;
        let ambiguous = alts.len() > 1;
        if ambiguous && !cfg.allow_ambiguous {
            tries += 1;
            if tries > cfg.rounds {
                return Err(exhausted("no unambiguous queries".into(), cfg.rounds));
            }
            continue;
        }
        query.push(QueryPair {
            input: pair.input,
            target: Some(pair.output),
            alts: Some(alts),
            ambiguous: Some(ambiguous),
        });
    }

    Ok(Episode {
        id: format!("gen-{seed}"),
        seed: Some(seed),
        grammar: Some(g.clone()),
        support,
        query,
        decode: None,
    })
}

fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    seed ^ (attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Samples a grammar and an episode for it, resampling the grammar when the
/// caps make coverage infeasible.
pub fn generate_episode(a: &Arc<Alphabet>, cfg: &GenConfig, seed: u64) -> Result<Episode> {
    let mut last = None;
    for attempt in 0..cfg.grammar_attempts {
        let g = sample_grammar(a, cfg, attempt_seed(seed, attempt))?;
        match sample_episode(&g, cfg, seed) {
            Ok(e) => return Ok(e),
            Err(e @ Error::GenerationExhausted(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| exhausted("no grammar".into(), 0)))
}

/// Problems found when re-checking a generated episode; empty when sound.
pub fn revalidate(e: &Episode, cfg: &GenConfig) -> Vec<String> {
    let mut out = Vec::new();
    let Some(g) = &e.grammar else {
        out.push("episode has no grammar".to_string());
        return out;
    };
    let policy = ParsePolicy {
        caps: cfg.caps,
        ..ParsePolicy::default()
    };
    if let Err(err) = check_consistency(e, &policy) {
        out.push(err.to_string());
    }
    let inputs = e.support.iter().map(|p| &p.input).chain(e.query.iter().map(|q| &q.input));
    for input in inputs {
        if input.len() > cfg.caps.input {
            out.push(format!("`{}` exceeds the input cap", join(input)));
        }
    }
    let outputs = e.support.iter().map(|p| &p.output).chain(e.query.iter().filter_map(|q| q.target.as_ref()));
    for output in outputs {
        if output.len() > cfg.caps.output {
            out.push(format!("`{}` exceeds the output cap", join(output)));
        }
    }
    let used: BTreeSet<&Word> = e.support.iter().flat_map(|p| p.input.iter()).collect();
    for w in g.vocabulary() {
        if !used.contains(&w) {
            out.push(format!("`{w}` never appears in support"));
        }
    }
    let depth = |input: &[Word]| canonical_derivation(g, input, &policy).map(|d| d.depth()).unwrap_or(0);
    if g.functions().next().is_some() && !e.support.iter().any(|p| depth(&p.input) >= 2) {
        out.push("no support pair composes two functions".to_string());
    }
    let support: BTreeSet<&InputSequence> = e.support.iter().map(|p| &p.input).collect();
    for q in &e.query {
        if support.contains(&q.input) {
            out.push(format!("query `{}` repeats a support input", join(&q.input)));
        }
        if depth(&q.input) < cfg.query_depth {
            out.push(format!("query `{}` is too shallow", join(&q.input)));
        }
        if let Some(alts) = &q.alts {
            match enumerate_outputs(g, &q.input, Some(cfg.caps)) {
                Ok(all) if &all == alts => {}
                _ => out.push(format!("query `{}` lists wrong alternatives", join(&q.input))),
            }
            if q.target.as_ref().is_some_and(|t| !alts.contains(t)) {
                out.push(format!("query `{}` target missing from alternatives", join(&q.input)));
            }
            if q.ambiguous.is_some_and(|a| a != (alts.len() > 1)) {
                out.push(format!("query `{}` has a wrong ambiguity flag", join(&q.input)));
            }
        }
    }
    out
}
