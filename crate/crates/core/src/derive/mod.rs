//! Translatability, derivation enumeration and canonical interpretation.

mod chart;
mod forest;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CapKind, Error, Result};
use crate::grammar::{FunctionRule, Grammar, RuleShape};
use crate::symbols::{join, Caps, Color, OutputSequence, Word};

pub(crate) use chart::{canonical_encoded, Canonical, Chart};
pub(crate) use forest::{outputs_encoded, Forest};

/// What a word does during a derivation, with symbols already encoded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role<'a> {
    Primitive(u8),
    Function(&'a RuleShape),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanOrder {
    LeftmostFirst,
    RightmostFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitPreference {
    ShortestPrefix,
    LongestPrefix,
}

/// Deterministic rule for picking one derivation out of many.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsePolicy {
    pub scan: ScanOrder,
    pub split: SplitPreference,
    pub caps: Caps,
    pub enforce_caps: bool,
}

impl Default for ParsePolicy {
    fn default() -> Self {
        ParsePolicy {
            scan: ScanOrder::LeftmostFirst,
            split: SplitPreference::ShortestPrefix,
            caps: Caps::default(),
            enforce_caps: true,
        }
    }
}

impl ParsePolicy {
    pub const NAMES: [&'static str; 4] = ["default", "longest-prefix", "rightmost", "rightmost-longest"];

    pub fn named(name: &str) -> Option<Self> {
        let (scan, split) = match name {
            "default" => (ScanOrder::LeftmostFirst, SplitPreference::ShortestPrefix),
            "longest-prefix" => (ScanOrder::LeftmostFirst, SplitPreference::LongestPrefix),
            "rightmost" => (ScanOrder::RightmostFirst, SplitPreference::ShortestPrefix),
            "rightmost-longest" => (ScanOrder::RightmostFirst, SplitPreference::LongestPrefix),
            _ => return None,
        };
        Some(ParsePolicy {
            scan,
            split,
            ..ParsePolicy::default()
        })
    }

    pub fn name(&self) -> &'static str {
        match (self.scan, self.split) {
            (ScanOrder::LeftmostFirst, SplitPreference::ShortestPrefix) => "default",
            (ScanOrder::LeftmostFirst, SplitPreference::LongestPrefix) => "longest-prefix",
            (ScanOrder::RightmostFirst, SplitPreference::ShortestPrefix) => "rightmost",
            (ScanOrder::RightmostFirst, SplitPreference::LongestPrefix) => "rightmost-longest",
        }
    }

    pub fn without_caps(self) -> Self {
        ParsePolicy {
            enforce_caps: false,
            ..self
        }
    }

    pub(crate) fn output_cap(&self) -> Option<usize> {
        self.enforce_caps.then_some(self.caps.output)
    }
}

/// Half-open range of input positions covered by a derivation node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    Leaf {
        span: Span,
        word: Word,
        color: Color,
    },
    Apply {
        span: Span,
        rule: FunctionRule,
        args: Vec<Arc<Derivation>>,
    },
    Concat {
        span: Span,
        left: Arc<Derivation>,
        right: Arc<Derivation>,
    },
}

impl Derivation {
    pub fn span(&self) -> Span {
        match self {
            Derivation::Leaf { span, .. } | Derivation::Apply { span, .. } | Derivation::Concat { span, .. } => *span,
        }
    }

    /// Words at the leaves, left to right, with function labels interleaved
    /// where they occur in the input.
    pub fn words(&self) -> Vec<Word> {
        let mut out = Vec::new();
        self.collect_words(&mut out);
        out
    }

    fn collect_words(&self, out: &mut Vec<Word>) {
        match self {
            Derivation::Leaf { word, .. } => out.push(word.clone()),
            Derivation::Apply { rule, args, .. } => {
                args[0].collect_words(out);
                out.push(rule.word.clone());
                if let Some(r) = args.get(1) {
                    r.collect_words(out);
                }
            }
            Derivation::Concat { left, right, .. } => {
                left.collect_words(out);
                right.collect_words(out);
            }
        }
    }

    /// Deepest nesting of function applications.
    pub fn depth(&self) -> usize {
        match self {
            Derivation::Leaf { .. } => 0,
            Derivation::Apply { args, .. } => 1 + args.iter().map(|a| a.depth()).max().unwrap_or(0),
            Derivation::Concat { left, right, .. } => left.depth().max(right.depth()),
        }
    }

    /// Function words applied anywhere in the tree.
    pub fn applied(&self) -> Vec<Word> {
        let mut out = Vec::new();
        self.visit(&mut |d| {
            if let Derivation::Apply { rule, .. } = d {
                out.push(rule.word.clone());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Derivation)) {
        f(self);
        match self {
            Derivation::Leaf { .. } => {}
            Derivation::Apply { args, .. } => args.iter().for_each(|a| a.visit(f)),
            Derivation::Concat { left, right, .. } => {
                left.visit(f);
                right.visit(f);
            }
        }
    }
}

/// Bracketed rendering: every application is wrapped in parentheses.
impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Derivation::Leaf { word, .. } => write!(f, "{word}"),
            Derivation::Apply { rule, args, .. } => match &args[..] {
                [x] => write!(f, "({x} {})", rule.word),
                [x, y] => write!(f, "({x} {} {y})", rule.word),
                _ => write!(f, "({})", rule.word),
            },
            Derivation::Concat { left, right, .. } => write!(f, "{left} {right}"),
        }
    }
}

/// Recursive yield of a derivation tree.
pub fn yield_of(d: &Derivation) -> OutputSequence {
    let mut out = Vec::new();
    push_yield(d, &mut out);
    out
}

fn push_yield(d: &Derivation, out: &mut OutputSequence) {
    match d {
        Derivation::Leaf { color, .. } => out.push(color.clone()),
        Derivation::Apply { rule, args, .. } => {
            let parts: Vec<OutputSequence> = args.iter().map(|a| yield_of(a)).collect();
            for &s in &rule.shape.rhs {
                out.extend(parts[s as usize - 1].iter().cloned());
            }
        }
        Derivation::Concat { left, right, .. } => {
            push_yield(left, out);
            push_yield(right, out);
        }
    }
}

/// True iff some derivation of `s` exists. Length caps are not applied.
pub fn is_translatable(g: &Grammar, s: &[Word]) -> Result<bool> {
    let input = g.alphabet().encode_input(s)?;
    if input.is_empty() {
        return Ok(false);
    }
    let roles = g.roles();
    Ok(Chart::new(&roles, &input, ScanOrder::LeftmostFirst, SplitPreference::ShortestPrefix).translatable())
}

/// Every distinct derivation of `s` with its yield.
///
/// Concatenation is associative, so only right-nested chains are produced:
/// the left child of a `Concat` is never itself a `Concat`. When `caps` is
/// given, inputs over the input cap have no derivations and derivations in
/// which any node yields more than the output cap are dropped.
pub fn enumerate_derivations(
    g: &Grammar,
    s: &[Word],
    caps: Option<Caps>,
) -> Result<Vec<(Arc<Derivation>, OutputSequence)>> {
    let input = g.alphabet().encode_input(s)?;
    if input.is_empty() || caps.is_some_and(|c| input.len() > c.input) {
        return Ok(Vec::new());
    }
    let roles = g.roles();
    let mut forest = Forest::new(&roles, &input, caps.map(|c| c.output));
    let trees = forest.derivations(g, s);
    let a = g.alphabet();
    Ok(trees
        .iter()
        .map(|(d, y)| (d.clone(), a.decode_output(y)))
        .collect())
}

/// Distinct outputs over all derivations of `s`, sorted.
pub fn enumerate_outputs(g: &Grammar, s: &[Word], caps: Option<Caps>) -> Result<Vec<OutputSequence>> {
    let input = g.alphabet().encode_input(s)?;
    if input.is_empty() || caps.is_some_and(|c| input.len() > c.input) {
        return Ok(Vec::new());
    }
    let roles = g.roles();
    let set = outputs_encoded(&roles, &input, caps.map(|c| c.output));
    Ok(set.iter().map(|y| g.alphabet().decode_output(y)).collect())
}

fn check_input(s: &[Word], p: &ParsePolicy) -> Result<()> {
    if p.enforce_caps && s.len() > p.caps.input {
        return Err(Error::CapExceeded {
            kind: CapKind::Input,
            limit: p.caps.input,
            actual: s.len(),
        });
    }
    Ok(())
}

fn canonical_error(s: &[Word], p: &ParsePolicy, c: Canonical) -> Error {
    match c {
        Canonical::Untranslatable => Error::NotTranslatable { input: join(s) },
        Canonical::TooLong(actual) => Error::CapExceeded {
            kind: CapKind::Output,
            limit: p.caps.output,
            actual,
        },
        Canonical::Yield(_) => unreachable!(),
    }
}

/// Output of the derivation selected by `p`.
pub fn canonical_derive(g: &Grammar, s: &[Word], p: &ParsePolicy) -> Result<OutputSequence> {
    let input = g.alphabet().encode_input(s)?;
    check_input(s, p)?;
    let roles = g.roles();
    match canonical_encoded(&roles, &input, p) {
        Canonical::Yield(y) => Ok(g.alphabet().decode_output(&y)),
        other => Err(canonical_error(s, p, other)),
    }
}

/// The derivation selected by `p`.
pub fn canonical_derivation(g: &Grammar, s: &[Word], p: &ParsePolicy) -> Result<Arc<Derivation>> {
    let input = g.alphabet().encode_input(s)?;
    check_input(s, p)?;
    let roles = g.roles();
    match canonical_encoded(&roles, &input, p) {
        Canonical::Yield(_) => {
            let mut chart = Chart::new(&roles, &input, p.scan, p.split);
            Ok(chart.tree(g, s))
        }
        other => Err(canonical_error(s, p, other)),
    }
}
