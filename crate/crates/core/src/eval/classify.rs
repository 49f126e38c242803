use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{check_alignment, Response, RunRecord};
use crate::derive::{canonical_encoded, enumerate_derivations, outputs_encoded, Canonical, ParsePolicy, Role};
use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::grammar::{Grammar, RuleShape};
use crate::induce::{function_family, SearchBudget};
use crate::symbols::{InputSequence, Word};

/// Replacing the rule of `word` by `shape`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Substitution {
    pub word: Word,
    #[serde(skip)]
    pub shape: RuleShape,
    pub rule: String,
}

impl Substitution {
    fn new(word: &Word, shape: &RuleShape) -> Self {
        Substitution {
            word: word.clone(),
            shape: shape.clone(),
            rule: shape.render(word.as_str()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "label")]
pub enum ErrorLabel {
    Correct,
    /// Output of another derivation under the true grammar.
    AltParse { derivation: String },
    /// Canonical output of every listed single-rule substitution.
    RuleSubstitution { substitutions: Vec<Substitution> },
    /// Output of some derivation under each listed substitution; the
    /// derivation shown is for the first.
    AltParseWithSubstitution {
        substitutions: Vec<Substitution>,
        derivation: String,
    },
    CapViolation { length: usize },
    NonSystematic { budget_exhausted: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LabelKind {
    Correct,
    AltParse,
    RuleSubstitution,
    AltParseWithSubstitution,
    CapViolation,
    NonSystematic,
}

impl LabelKind {
    pub const ALL: [LabelKind; 6] = [
        LabelKind::Correct,
        LabelKind::AltParse,
        LabelKind::RuleSubstitution,
        LabelKind::AltParseWithSubstitution,
        LabelKind::CapViolation,
        LabelKind::NonSystematic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LabelKind::Correct => "Correct",
            LabelKind::AltParse => "AltParse",
            LabelKind::RuleSubstitution => "RuleSubstitution",
            LabelKind::AltParseWithSubstitution => "AltParseWithSubstitution",
            LabelKind::CapViolation => "CapViolation",
            LabelKind::NonSystematic => "NonSystematic",
        }
    }

    pub fn is_systematic(self) -> bool {
        !matches!(self, LabelKind::NonSystematic | LabelKind::CapViolation)
    }
}

impl ErrorLabel {
    pub fn kind(&self) -> LabelKind {
        match self {
            ErrorLabel::Correct => LabelKind::Correct,
            ErrorLabel::AltParse { .. } => LabelKind::AltParse,
            ErrorLabel::RuleSubstitution { .. } => LabelKind::RuleSubstitution,
            ErrorLabel::AltParseWithSubstitution { .. } => LabelKind::AltParseWithSubstitution,
            ErrorLabel::CapViolation { .. } => LabelKind::CapViolation,
            ErrorLabel::NonSystematic { .. } => LabelKind::NonSystematic,
        }
    }

    pub fn substitutions(&self) -> &[Substitution] {
        match self {
            ErrorLabel::RuleSubstitution { substitutions } | ErrorLabel::AltParseWithSubstitution { substitutions, .. } => {
                substitutions
            }
            _ => &[],
        }
    }

    /// Whether some listed substitution gives `word` a rule satisfying `pred`.
    pub fn names(&self, word: &Word, pred: impl Fn(&RuleShape) -> bool) -> bool {
        self.substitutions().iter().any(|s| &s.word == word && pred(&s.shape))
    }
}

/// Labels responses to queries of one grammar, caching by (input, response).
pub struct Classifier {
    grammar: Grammar,
    policy: ParsePolicy,
    budget: SearchBudget,
    family: Arc<Vec<RuleShape>>,
    substitution_first: bool,
    cache: HashMap<(InputSequence, Response), ErrorLabel>,
}

impl Classifier {
    pub fn new(grammar: Grammar, budget: SearchBudget) -> Self {
        let family = Arc::new(function_family(budget.max_rhs_len));
        Classifier {
            grammar,
            policy: ParsePolicy::default(),
            budget,
            family,
            substitution_first: false,
            cache: HashMap::new(),
        }
    }

    /// Tries single-rule substitutions before other parses of the true
    /// grammar, swapping the `AltParse` and `RuleSubstitution` priorities.
    pub fn substitution_first(mut self, yes: bool) -> Self {
        self.substitution_first = yes;
        self.cache.clear();
        self
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn classify(&mut self, input: &[Word], response: &Response) -> Result<ErrorLabel> {
        let key = (input.to_vec(), response.clone());
        if let Some(l) = self.cache.get(&key) {
            return Ok(l.clone());
        }
        let label = self.compute(input, response)?;
        self.cache.insert(key, label.clone());
        Ok(label)
    }

    /// Candidate replacements for `current`: same slot kinds first, then by
    /// right-hand side length, then in family order.
    fn candidates(&self, current: &RuleShape) -> Vec<&RuleShape> {
        let mut c: Vec<&RuleShape> = self.family.iter().filter(|s| *s != current).collect();
        c.sort_by_key(|s| (s.kinds != current.kinds, s.rhs.len()));
        c
    }

    fn compute(&self, input: &[Word], response: &Response) -> Result<ErrorLabel> {
        let g = &self.grammar;
        let a = g.alphabet();
        let enc_in = a.encode_input(input)?;
        let roles = g.roles();
        let target = match canonical_encoded(&roles, &enc_in, &self.policy) {
            Canonical::Yield(t) => t,
            _ => return Err(Error::NotTranslatable { input: crate::symbols::join(input) }),
        };
        let Some(out) = response.colors().and_then(|c| a.encode_output(c)) else {
            return Ok(ErrorLabel::NonSystematic { budget_exhausted: false });
        };
        if out == target {
            return Ok(ErrorLabel::Correct);
        }
        let caps = Some(self.policy.caps);
        let out_colors = a.decode_output(&out);
        let alt_parse = || -> Result<Option<ErrorLabel>> {
            Ok(enumerate_derivations(g, input, caps)?
                .into_iter()
                .find(|(_, y)| *y == out_colors)
                .map(|(d, _)| ErrorLabel::AltParse {
                    derivation: d.to_string(),
                }))
        };
        if !self.substitution_first {
            if let Some(l) = alt_parse()? {
                return Ok(l);
            }
        }

        let spent = AtomicU64::new(0);
        let limit = self.budget.max_expansions;
        let mut exhausted = false;
        let in_query: Vec<&Word> = g.functions().map(|f| &f.word).filter(|w| input.contains(w)).collect();
        let plans: Vec<(usize, &Word, Vec<&RuleShape>)> = in_query
            .iter()
            .map(|&w| {
                let pos = a.word_index(w).expect("grammar word in alphabet") as usize;
                (pos, w, self.candidates(&g.function(w).expect("function word").shape))
            })
            .collect();

        fn with<'a>(roles: &[Option<Role<'a>>], pos: usize, s: &'a RuleShape) -> Vec<Option<Role<'a>>> {
            let mut r = roles.to_vec();
            r[pos] = Some(Role::Function(s));
            r
        }

        let mut canonical = Vec::new();
        for (pos, w, cands) in &plans {
            spent.fetch_add(cands.len() as u64, Ordering::Relaxed);
            let hits: Vec<&RuleShape> = cands
                .par_iter()
                .copied()
                .filter(|s| matches!(canonical_encoded(&with(&roles, *pos, s), &enc_in, &self.policy), Canonical::Yield(y) if y == out))
                .collect();
            canonical.extend(hits.into_iter().map(|s| Substitution::new(w, s)));
        }
        if !canonical.is_empty() {
            return Ok(ErrorLabel::RuleSubstitution {
                substitutions: canonical,
            });
        }
        if self.substitution_first {
            if let Some(l) = alt_parse()? {
                return Ok(l);
            }
        }
        if spent.load(Ordering::Relaxed) > limit {
            exhausted = true;
        }

        let mut alt = Vec::new();
        if !exhausted {
            for (pos, w, cands) in &plans {
                spent.fetch_add(cands.len() as u64, Ordering::Relaxed);
                let hits: Vec<&RuleShape> = cands
                    .par_iter()
                    .copied()
                    .filter(|s| outputs_encoded(&with(&roles, *pos, s), &enc_in, Some(self.policy.caps.output)).contains(&out))
                    .collect();
                alt.extend(hits.into_iter().map(|s| Substitution::new(w, s)));
            }
            exhausted = spent.load(Ordering::Relaxed) > limit;
        }
        if let Some(first) = alt.first() {
            let g2 = g.with_function(&first.word, first.shape.clone());
            let derivation = enumerate_derivations(&g2, input, caps)?
                .into_iter()
                .find(|(_, y)| *y == out_colors)
                .map(|(d, _)| d.to_string())
                .unwrap_or_default();
            return Ok(ErrorLabel::AltParseWithSubstitution {
                substitutions: alt,
                derivation,
            });
        }
        if out.len() > self.policy.caps.output {
            return Ok(ErrorLabel::CapViolation { length: out.len() });
        }
        Ok(ErrorLabel::NonSystematic {
            budget_exhausted: exhausted,
        })
    }
}

/// Label of `out` as a response to `q` under the true grammar `g`.
pub fn classify_error(g: &Grammar, q: &[Word], out: &Response, b: &SearchBudget) -> Result<ErrorLabel> {
    Classifier::new(g.clone(), b.clone()).classify(q, out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunLabels {
    pub episode: String,
    /// Aligned with the run's responses.
    pub labels: Vec<Vec<ErrorLabel>>,
}

impl RunLabels {
    pub fn count(&self, kind: LabelKind) -> usize {
        self.labels.iter().flatten().filter(|l| l.kind() == kind).count()
    }

    pub fn total(&self) -> usize {
        self.labels.iter().map(|l| l.len()).sum()
    }
}

pub fn classify_run(e: &Episode, r: &RunRecord, b: &SearchBudget) -> Result<RunLabels> {
    check_alignment(e, r)?;
    let g = e
        .grammar
        .as_ref()
        .ok_or_else(|| Error::QueryMismatch(format!("episode `{}` has no grammar to classify against", e.id)))?;
    let mut c = Classifier::new(g.clone(), b.clone());
    let mut labels = Vec::with_capacity(r.responses.len());
    for (q, samples) in e.query.iter().zip(&r.responses) {
        let row = samples.iter().map(|s| c.classify(&q.input, s)).collect::<Result<Vec<_>>>()?;
        labels.push(row);
    }
    Ok(RunLabels {
        episode: e.id.clone(),
        labels,
    })
}
