use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::derive::{canonical_derive, enumerate_outputs, ParsePolicy};
use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::symbols::{InputSequence, OutputSequence, Word};

/// Structure-sensitivity templates over three primitive tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProbeFamily {
    /// `u1 UNARY BINARY u2 u3`
    UnaryBinary,
    /// `u1 BINARY u2 u3 UNARY`
    BinaryUnary,
}

impl ProbeFamily {
    pub const ALL: [ProbeFamily; 2] = [ProbeFamily::UnaryBinary, ProbeFamily::BinaryUnary];

    pub fn name(self) -> &'static str {
        match self {
            ProbeFamily::UnaryBinary => "unary-binary",
            ProbeFamily::BinaryUnary => "binary-unary",
        }
    }

    fn instantiate(self, unary: &Word, binary: &Word, u: [&Word; 3]) -> InputSequence {
        let [a, b, c] = u.map(|w| w.clone());
        match self {
            ProbeFamily::UnaryBinary => vec![a, unary.clone(), binary.clone(), b, c],
            ProbeFamily::BinaryUnary => vec![a, binary.clone(), b, c, unary.clone()],
        }
    }
}

impl fmt::Display for ProbeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProbeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProbeFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown probe family `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeQuery {
    #[serde(rename = "in")]
    pub input: InputSequence,
    #[serde(rename = "out")]
    pub target: OutputSequence,
    /// Every output of every derivation, sorted; always contains the target.
    pub alts: Vec<OutputSequence>,
}

/// Instantiates `family` for every unary and binary function word and every
/// triple of primitive words, repeats included. Instances without a
/// canonical output under the default caps are skipped.
pub fn make_probe_queries(g: &Grammar, family: ProbeFamily) -> Result<Vec<ProbeQuery>> {
    let unary: Vec<&Word> = g.functions().filter(|f| f.shape.arity() == 1).map(|f| &f.word).collect();
    let binary: Vec<&Word> = g.functions().filter(|f| f.shape.arity() == 2).map(|f| &f.word).collect();
    if unary.is_empty() || binary.is_empty() {
        return Err(Error::TemplateInapplicable(format!(
            "{family} needs a unary and a binary rule; grammar has {} and {}",
            unary.len(),
            binary.len()
        )));
    }
    let prims: Vec<&Word> = g.primitives().map(|(w, _)| w).collect();
    let policy = ParsePolicy::default();
    let mut out = Vec::new();
    for &un in &unary {
        for &bi in &binary {
            for &a in &prims {
                for &b in &prims {
                    for &c in &prims {
                        let input = family.instantiate(un, bi, [a, b, c]);
                        let Ok(target) = canonical_derive(g, &input, &policy) else {
                            continue;
                        };
                        let alts = enumerate_outputs(g, &input, Some(policy.caps))?;
                        out.push(ProbeQuery { input, target, alts });
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::TemplateInapplicable(format!("no instance of {family} is translatable")));
    }
    Ok(out)
}
