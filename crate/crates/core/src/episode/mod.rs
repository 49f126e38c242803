//! Episodes: a hidden grammar with its SUPPORT and QUERY pairs, the episode
//! file format, the seeded generator and structure probes.

mod gen;
mod probe;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::derive::{canonical_derive, ParsePolicy};
use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::symbols::{join, Alphabet, InputSequence, OutputSequence, Word};
use crate::text::{parse_rule, write_grammar};

pub use gen::{generate_episode, revalidate, sample_episode, sample_grammar, GenConfig, RNG_NAME};
pub use probe::{make_probe_queries, ProbeFamily, ProbeQuery};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    #[serde(rename = "in")]
    pub input: InputSequence,
    #[serde(rename = "out")]
    pub output: OutputSequence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryPair {
    #[serde(rename = "in")]
    pub input: InputSequence,
    #[serde(rename = "out", default, skip_serializing_if = "Option::is_none")]
    pub target: Option<OutputSequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alts: Option<Vec<OutputSequence>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambiguous: Option<bool>,
}

impl QueryPair {
    pub fn new(input: InputSequence, target: Option<OutputSequence>) -> Self {
        QueryPair {
            input,
            target,
            alts: None,
            ambiguous: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Episode {
    pub id: String,
    pub seed: Option<u64>,
    pub grammar: Option<Grammar>,
    pub support: Vec<Pair>,
    pub query: Vec<QueryPair>,
    /// Display names for function words, e.g. `fep -> twice`.
    pub decode: Option<BTreeMap<Word, String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpisodeFile {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grammar: Option<Vec<String>>,
    support: Vec<Pair>,
    query: Vec<QueryPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decode: Option<BTreeMap<Word, String>>,
}

/// 1-based line and column of the first occurrence of `needle` in `text`.
fn locate(text: &str, needle: &str) -> Option<(usize, usize)> {
    text.lines()
        .enumerate()
        .find_map(|(i, l)| l.find(needle).map(|b| (i + 1, l[..b].chars().count() + 1)))
}

fn check_words(a: &Alphabet, input: &[Word]) -> Result<()> {
    a.encode_input(input).map(|_| ())
}

pub fn read_episode(text: &str, alphabet: Arc<Alphabet>) -> Result<Episode> {
    let file: EpisodeFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if let Some(rng) = &file.rng {
        if rng != RNG_NAME {
            let (line, column) = locate(text, "\"rng\"").unwrap_or((1, 1));
            return Err(Error::Parse {
                line,
                column,
                message: format!("unsupported rng `{rng}`, expected `{RNG_NAME}`"),
            });
        }
    }
    let grammar = match &file.grammar {
        None => None,
        Some(lines) => {
            let mut rules = Vec::with_capacity(lines.len());
            for l in lines {
                let rule = parse_rule(l).map_err(|e| {
                    let (line, col) = locate(text, &format!("\"{l}\"")).unwrap_or((1, 0));
                    match e {
                        Error::RuleSyntax { column, message } => Error::Parse {
                            line,
                            column: col + column,
                            message,
                        },
                        other => other,
                    }
                })?;
                rules.push(rule);
            }
            let g = Grammar::new(alphabet.clone(), rules);
            let violations = crate::grammar::validate_grammar(&g);
            if !violations.is_empty() {
                return Err(Error::InvalidGrammar(violations));
            }
            Some(g)
        }
    };
    for p in &file.support {
        check_words(&alphabet, &p.input)?;
    }
    for q in &file.query {
        check_words(&alphabet, &q.input)?;
    }
    let e = Episode {
        id: file.id,
        seed: file.seed,
        grammar,
        support: file.support,
        query: file.query,
        decode: file.decode,
    };
    check_consistency(&e, &ParsePolicy::default())?;
    Ok(e)
}

/// Every pair with an output must match the grammar's canonical output.
pub fn check_consistency(e: &Episode, policy: &ParsePolicy) -> Result<()> {
    let Some(g) = &e.grammar else {
        return Ok(());
    };
    let pairs = e
        .support
        .iter()
        .enumerate()
        .map(|(i, p)| ("support", i, &p.input, Some(&p.output)))
        .chain(
            e.query
                .iter()
                .enumerate()
                .map(|(i, q)| ("query", i, &q.input, q.target.as_ref())),
        );
    for (section, index, input, expected) in pairs {
        let Some(expected) = expected else {
            continue;
        };
        let actual = match canonical_derive(g, input, policy) {
            Ok(y) => y,
            Err(err) => {
                return Err(Error::Consistency {
                    section,
                    index,
                    input: join(input),
                    expected: join(expected),
                    actual: format!("<{}>", err.kind()),
                })
            }
        };
        if &actual != expected {
            return Err(Error::Consistency {
                section,
                index,
                input: join(input),
                expected: join(expected),
                actual: join(&actual),
            });
        }
    }
    Ok(())
}

pub fn write_episode(e: &Episode) -> String {
    let file = EpisodeFile {
        id: e.id.clone(),
        seed: e.seed,
        rng: e.seed.map(|_| RNG_NAME.to_string()),
        grammar: e.grammar.as_ref().map(write_grammar),
        support: e.support.clone(),
        query: e.query.clone(),
        decode: e.decode.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("episode serializes");
    s.push('\n');
    s
}
