//! Scoring repeated model responses, labeling errors and auditing overlap
//! between episode pools.

mod classify;
mod overlap;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::derive::{canonical_derive, ParsePolicy};
use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::symbols::{join, OutputSequence};

pub use classify::{classify_error, classify_run, Classifier, ErrorLabel, LabelKind, RunLabels, Substitution};
pub use overlap::{overlap_count, OverlapReport};

/// One sampled answer. Anything that is not a list of strings is kept verbatim.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Response {
    Colors(OutputSequence),
    Raw(String),
}

impl Response {
    pub fn colors(&self) -> Option<&OutputSequence> {
        match self {
            Response::Colors(c) => Some(c),
            Response::Raw(_) => None,
        }
    }
}

impl std::fmt::Display for Response {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Response::Colors(c) => f.write_str(&join(c)),
            Response::Raw(s) => write!(f, "<raw {s:?}>"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub episode: String,
    pub samples_per_query: usize,
    /// Outer index follows the episode's query order.
    pub responses: Vec<Vec<Response>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

impl RunRecord {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_query == 0 {
            return Err(Error::Config("samples_per_query must be at least 1".into()));
        }
        for (i, r) in self.responses.iter().enumerate() {
            if r.len() != self.samples_per_query {
                return Err(Error::Config(format!(
                    "query {i} has {} samples, expected {}",
                    r.len(),
                    self.samples_per_query
                )));
            }
        }
        Ok(())
    }
}

pub fn read_run(text: &str) -> Result<RunRecord> {
    let r: RunRecord = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    r.validate()?;
    Ok(r)
}

pub fn write_run(r: &RunRecord) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("run serializes");
    s.push('\n');
    s
}

/// Target for each query: the stored one, else the canonical output.
pub fn query_targets(e: &Episode, policy: &ParsePolicy) -> Result<Vec<OutputSequence>> {
    e.query
        .iter()
        .map(|q| match (&q.target, &e.grammar) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(g)) => canonical_derive(g, &q.input, policy),
            (None, None) => Err(Error::QueryMismatch(format!(
                "query `{}` has no target and the episode has no grammar",
                join(&q.input)
            ))),
        })
        .collect()
}

fn check_alignment(e: &Episode, r: &RunRecord) -> Result<()> {
    if r.episode != e.id {
        return Err(Error::QueryMismatch(format!("run is for episode `{}`, not `{}`", r.episode, e.id)));
    }
    if r.responses.len() != e.query.len() {
        return Err(Error::QueryMismatch(format!(
            "run has {} queries, episode has {}",
            r.responses.len(),
            e.query.len()
        )));
    }
    r.validate().map_err(|e| Error::QueryMismatch(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryScore {
    pub correct: usize,
    pub samples: usize,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Score {
    pub episode: String,
    pub per_query: Vec<QueryScore>,
    pub correct: usize,
    pub total: usize,
    pub rate: f64,
}

impl Score {
    /// Describes a mismatch with an externally reported rate, in whole percent.
    pub fn discrepancy(&self, reported_percent: u32) -> Option<String> {
        let expected = reported_percent as usize * self.total;
        if self.correct * 100 == expected {
            None
        } else {
            Some(format!(
                "episode {}: responses give {}/{} correct but {}% was reported",
                self.episode, self.correct, self.total, reported_percent
            ))
        }
    }
}

/// Exact-match success per query and over the whole run.
pub fn score_run(e: &Episode, r: &RunRecord) -> Result<Score> {
    check_alignment(e, r)?;
    let targets = query_targets(e, &ParsePolicy::default())?;
    let mut per_query = Vec::with_capacity(targets.len());
    let (mut correct, mut total) = (0, 0);
    for (target, samples) in targets.iter().zip(&r.responses) {
        let c = samples.iter().filter(|s| s.colors() == Some(target)).count();
        per_query.push(QueryScore {
            correct: c,
            samples: samples.len(),
            rate: c as f64 / samples.len() as f64,
        });
        correct += c;
        total += samples.len();
    }
    Ok(Score {
        episode: e.id.clone(),
        per_query,
        correct,
        total,
        rate: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryConsistency {
    pub modal_share: f64,
    pub distinct: usize,
    pub non_systematic: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyMetrics {
    pub per_query: Vec<QueryConsistency>,
    pub non_systematic_rate: f64,
}

/// Modal share and distinct count per query; the non-systematic rate needs labels.
pub fn consistency_metrics(r: &RunRecord, labels: Option<&RunLabels>) -> ConsistencyMetrics {
    let mut per_query = Vec::with_capacity(r.responses.len());
    let (mut bad, mut total) = (0, 0);
    for (qi, samples) in r.responses.iter().enumerate() {
        let mut counts: HashMap<&Response, usize> = HashMap::new();
        for s in samples {
            *counts.entry(s).or_default() += 1;
        }
        let modal = counts.values().copied().max().unwrap_or(0);
        let non_systematic = labels
            .and_then(|l| l.labels.get(qi))
            .map(|ls| ls.iter().filter(|l| l.kind() == LabelKind::NonSystematic).count())
            .unwrap_or(0);
        bad += non_systematic;
        total += samples.len();
        per_query.push(QueryConsistency {
            modal_share: if samples.is_empty() { 0.0 } else { modal as f64 / samples.len() as f64 },
            distinct: counts.len(),
            non_systematic,
        });
    }
    ConsistencyMetrics {
        per_query,
        non_systematic_rate: if total == 0 { 0.0 } else { bad as f64 / total as f64 },
    }
}
