//! Seeded stand-ins for a model, producing runs with known error modes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transduce::{
    canonical_derive, enumerate_outputs, Episode, Grammar, ParsePolicy, Response, RuleShape, RunRecord, Word,
};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug)]
pub struct SimulatedTransducer {
    pub grammar: Grammar,
    /// Rule replaced when the substitution mode fires.
    pub substitution: Option<(Word, RuleShape)>,
    pub p_substitution: f64,
    pub p_alt_parse: f64,
    pub p_noise: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Oracle,
    Substitution,
    AltParse,
    Noise,
}

impl SimulatedTransducer {
    /// Always answers with the canonical output.
    pub fn oracle(grammar: Grammar, seed: u64) -> Self {
        SimulatedTransducer {
            grammar,
            substitution: None,
            p_substitution: 0.0,
            p_alt_parse: 0.0,
            p_noise: 0.0,
            samples: 10,
            seed,
        }
    }

    pub fn with_substitution(mut self, word: Word, shape: RuleShape, p: f64) -> Self {
        self.substitution = Some((word, shape));
        self.p_substitution = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ps = [self.p_substitution, self.p_alt_parse, self.p_noise];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(HarnessError::Config("probabilities must lie in [0, 1]".into()));
        }
        if ps.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(HarnessError::Config("error-mode probabilities sum to more than 1".into()));
        }
        if self.samples == 0 {
            return Err(HarnessError::Config("samples must be at least 1".into()));
        }
        match &self.substitution {
            Some((w, _)) if self.grammar.function(w).is_none() => Err(HarnessError::Config(format!(
                "`{w}` is not a function word of the grammar"
            ))),
            None if self.p_substitution > 0.0 => {
                Err(HarnessError::Config("substitution probability set without a substitution".into()))
            }
            _ => Ok(()),
        }
    }

    fn mode(&self, rng: &mut ChaCha8Rng) -> Mode {
        let u: f64 = rng.gen();
        let mut edge = self.p_substitution;
        if u < edge {
            return Mode::Substitution;
        }
        edge += self.p_alt_parse;
        if u < edge {
            return Mode::AltParse;
        }
        edge += self.p_noise;
        if u < edge {
            return Mode::Noise;
        }
        Mode::Oracle
    }

    /// Answer for sample `s` of query `q`. Every (query, sample) pair reads
    /// its own ChaCha stream, so answers do not depend on evaluation order.
    pub fn sample(&self, input: &[Word], q: usize, s: usize) -> Result<Response> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((q as u64) << 32) | s as u64);
        let policy = ParsePolicy::default();
        let target = canonical_derive(&self.grammar, input, &policy)?;
        let out = match self.mode(&mut rng) {
            Mode::Oracle => target,
            Mode::Substitution => {
                let (w, shape) = self.substitution.as_ref().expect("validated");
                let swapped = self.grammar.with_function(w, shape.clone());
                canonical_derive(&swapped, input, &policy).unwrap_or(target)
            }
            Mode::AltParse => {
                let others: Vec<_> = enumerate_outputs(&self.grammar, input, Some(policy.caps))?
                    .into_iter()
                    .filter(|o| *o != target)
                    .collect();
                others.choose(&mut rng).cloned().unwrap_or(target)
            }
            Mode::Noise => {
                let palette = self.grammar.alphabet().colors();
                let len = rng.gen_range(1..=policy.caps.output);
                (0..len).map(|_| palette.choose(&mut rng).expect("colors").clone()).collect()
            }
        };
        Ok(Response::Colors(out))
    }
}

pub fn simulate(t: &SimulatedTransducer, e: &Episode) -> Result<RunRecord> {
    t.validate()?;
    let responses = e
        .query
        .iter()
        .enumerate()
        .map(|(q, pair)| (0..t.samples).map(|s| t.sample(&pair.input, q, s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(RunRecord {
        episode: e.id.clone(),
        samples_per_query: t.samples,
        responses,
        model: Some(format!("simulated-{}", t.seed)),
    })
}
