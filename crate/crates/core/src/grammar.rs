//! Rules, grammars and grammar validation.
//!
//! A grammar maps each input word to at most one rule. Primitive rules emit a
//! single color. Function rules are either unary postfix (`x1 w -> x1 x1`)
//! or binary infix (`u1 w x2 -> x2 u1`); their right-hand side is a sequence
//! of slot references, and each slot is either a single primitive token or a
//! whole translatable substring.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::derive::Role;
use crate::symbols::{Alphabet, Color, Word};

/// Longest right-hand side allowed for any function rule.
pub const MAX_RHS_LEN: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SlotKind {
    /// Matches exactly one primitive word.
    Token,
    /// Matches any non-empty translatable substring.
    String,
}

impl SlotKind {
    pub fn letter(self) -> char {
        match self {
            SlotKind::Token => 'u',
            SlotKind::String => 'x',
        }
    }
}

/// The label-free body of a function rule: slot kinds in left-hand-side
/// order and the right-hand side as 1-based slot references.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleShape {
    pub kinds: Vec<SlotKind>,
    pub rhs: Vec<u8>,
}

impl RuleShape {
    pub fn new(kinds: Vec<SlotKind>, rhs: Vec<u8>) -> Self {
        RuleShape { kinds, rhs }
    }

    /// `x1 w -> x1 ... x1` with `n` copies.
    pub fn repeat(kind: SlotKind, n: usize) -> Self {
        RuleShape {
            kinds: vec![kind],
            rhs: vec![1; n],
        }
    }

    pub fn binary(left: SlotKind, right: SlotKind, rhs: &[u8]) -> Self {
        RuleShape {
            kinds: vec![left, right],
            rhs: rhs.to_vec(),
        }
    }

    pub fn arity(&self) -> usize {
        self.kinds.len()
    }

    /// Repetition count when this is a unary repetition.
    pub fn repetition(&self) -> Option<usize> {
        (self.arity() == 1 && self.rhs.iter().all(|&s| s == 1)).then_some(self.rhs.len())
    }

    pub(crate) fn slot_name(&self, slot: u8) -> String {
        format!("{}{}", self.kinds[slot as usize - 1].letter(), slot)
    }

    /// Renders the rule with `word` as its label.
    pub fn render(&self, word: &str) -> String {
        let lhs = match self.arity() {
            1 => format!("{} {word}", self.slot_name(1)),
            _ => format!("{} {word} {}", self.slot_name(1), self.slot_name(2)),
        };
        let rhs: Vec<String> = self.rhs.iter().map(|&s| self.slot_name(s)).collect();
        format!("{lhs} -> {}", rhs.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunctionRule {
    pub word: Word,
    pub shape: RuleShape,
}

impl FunctionRule {
    pub fn new(word: impl Into<Word>, shape: RuleShape) -> Self {
        FunctionRule {
            word: word.into(),
            shape,
        }
    }
}

impl fmt::Display for FunctionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.shape.render(self.word.as_str()))
    }
}

/// What a word means under some grammar.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assignment {
    Primitive(Color),
    Function(RuleShape),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Primitive { word: Word, color: Color },
    Function(FunctionRule),
}

impl Rule {
    pub fn primitive(word: impl Into<Word>, color: impl Into<Color>) -> Self {
        Rule::Primitive {
            word: word.into(),
            color: color.into(),
        }
    }

    pub fn function(word: impl Into<Word>, shape: RuleShape) -> Self {
        Rule::Function(FunctionRule::new(word, shape))
    }

    pub fn word(&self) -> &Word {
        match self {
            Rule::Primitive { word, .. } => word,
            Rule::Function(f) => &f.word,
        }
    }

    pub fn assignment(&self) -> Assignment {
        match self {
            Rule::Primitive { color, .. } => Assignment::Primitive(color.clone()),
            Rule::Function(f) => Assignment::Function(f.shape.clone()),
        }
    }

    pub fn from_assignment(word: Word, a: Assignment) -> Self {
        match a {
            Assignment::Primitive(color) => Rule::Primitive { word, color },
            Assignment::Function(shape) => Rule::Function(FunctionRule { word, shape }),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Primitive { word, color } => write!(f, "{word} -> {color}"),
            Rule::Function(r) => r.fmt(f),
        }
    }
}

/// A set of rules over an alphabet. Construction never fails; use
/// [`validate_grammar`] to check the invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    alphabet: Arc<Alphabet>,
    rules: Vec<Rule>,
}

impl Grammar {
    pub fn new(alphabet: Arc<Alphabet>, rules: Vec<Rule>) -> Self {
        Grammar { alphabet, rules }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn primitives(&self) -> impl Iterator<Item = (&Word, &Color)> {
        self.rules.iter().filter_map(|r| match r {
            Rule::Primitive { word, color } => Some((word, color)),
            Rule::Function(_) => None,
        })
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunctionRule> {
        self.rules.iter().filter_map(|r| match r {
            Rule::Function(f) => Some(f),
            Rule::Primitive { .. } => None,
        })
    }

    pub fn rule_for(&self, word: &Word) -> Option<&Rule> {
        self.rules.iter().find(|r| r.word() == word)
    }

    pub fn function(&self, word: &Word) -> Option<&FunctionRule> {
        self.functions().find(|f| &f.word == word)
    }

    pub fn is_function_word(&self, word: &Word) -> bool {
        self.function(word).is_some()
    }

    /// Words that carry a rule.
    pub fn vocabulary(&self) -> BTreeSet<Word> {
        self.rules.iter().map(|r| r.word().clone()).collect()
    }

    /// Word-to-meaning map; the order-insensitive identity of a grammar.
    pub fn assignments(&self) -> BTreeMap<Word, Assignment> {
        self.rules
            .iter()
            .map(|r| (r.word().clone(), r.assignment()))
            .collect()
    }

    /// Same grammar with the rule for `word` replaced by the function rule
    /// `shape` (or added when absent).
    pub fn with_function(&self, word: &Word, shape: RuleShape) -> Grammar {
        let mut rules = self.rules.clone();
        let new = Rule::function(word.clone(), shape);
        match rules.iter().position(|r| r.word() == word) {
            Some(i) => rules[i] = new,
            None => rules.push(new),
        }
        Grammar::new(self.alphabet.clone(), rules)
    }

    /// Keeps only the rules for the given words.
    pub fn restricted_to(&self, words: &BTreeSet<Word>) -> Grammar {
        let rules = self
            .rules
            .iter()
            .filter(|r| words.contains(r.word()))
            .cloned()
            .collect();
        Grammar::new(self.alphabet.clone(), rules)
    }

    /// Rules sorted with primitives first, each group in alphabet order.
    pub fn normalized(&self) -> Grammar {
        let mut rules = self.rules.clone();
        let a = &self.alphabet;
        rules.sort_by_key(|r| {
            let group = matches!(r, Rule::Function(_)) as u8;
            (group, a.word_index(r.word()).unwrap_or(u8::MAX), r.word().clone())
        });
        Grammar::new(self.alphabet.clone(), rules)
    }

    /// Per-word lookup table indexed by alphabet position. The first rule
    /// wins for duplicated words; rules naming unknown symbols are skipped.
    pub(crate) fn roles(&self) -> Vec<Option<Role<'_>>> {
        let mut table = vec![None; self.alphabet.words().len()];
        for rule in &self.rules {
            let Some(w) = self.alphabet.word_index(rule.word()) else {
                continue;
            };
            if table[w as usize].is_some() {
                continue;
            }
            table[w as usize] = match rule {
                Rule::Primitive { color, .. } => self.alphabet.color_index(color).map(Role::Primitive),
                Rule::Function(f) => Some(Role::Function(&f.shape)),
            };
        }
        table
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rules.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Expected number of primitive and function rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarShape {
    pub primitives: usize,
    pub functions: usize,
}

impl Default for GrammarShape {
    fn default() -> Self {
        GrammarShape {
            primitives: 4,
            functions: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnknownWord(Word),
    UnknownColor { word: Word, color: Color },
    DuplicateRule(Word),
    TwoRoles(Word),
    BadArity { word: Word, arity: usize },
    EmptyRhs(Word),
    SlotOutOfRange { word: Word, slot: u8 },
    NotRepetition(Word),
    RepetitionTooLong { word: Word, n: usize },
    RhsTooLong { word: Word, len: usize },
    Shape { expected: GrammarShape, primitives: usize, functions: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownWord(w) => write!(f, "`{w}`: word not in alphabet"),
            Violation::UnknownColor { word, color } => {
                write!(f, "`{word}`: color `{color}` not in alphabet")
            }
            Violation::DuplicateRule(w) => write!(f, "`{w}`: more than one rule for word"),
            Violation::TwoRoles(w) => write!(f, "`{w}`: word has two roles"),
            Violation::BadArity { word, arity } => {
                write!(f, "`{word}`: arity {arity} not supported (1 or 2)")
            }
            Violation::EmptyRhs(w) => write!(f, "`{w}`: empty right-hand side"),
            Violation::SlotOutOfRange { word, slot } => {
                write!(f, "`{word}`: right-hand side references missing slot {slot}")
            }
            Violation::NotRepetition(w) => {
                write!(f, "`{w}`: unary right-hand side must repeat slot 1")
            }
            Violation::RepetitionTooLong { word, n } => {
                write!(f, "`{word}`: repetition exceeds n≤{MAX_RHS_LEN} (n={n})")
            }
            Violation::RhsTooLong { word, len } => {
                write!(f, "`{word}`: right-hand side longer than {MAX_RHS_LEN} (len={len})")
            }
            Violation::Shape {
                expected,
                primitives,
                functions,
            } => write!(
                f,
                "expected {} primitives and {} functions, found {primitives} and {functions}",
                expected.primitives, expected.functions
            ),
        }
    }
}

/// Checks every structural invariant; an empty result means the grammar is valid.
pub fn validate_grammar(g: &Grammar) -> Vec<Violation> {
    let mut out = Vec::new();
    let a = g.alphabet();
    let mut seen: BTreeMap<&Word, bool> = BTreeMap::new();
    let mut reported: BTreeSet<&Word> = BTreeSet::new();
    for rule in g.rules() {
        let word = rule.word();
        if a.word_index(word).is_none() {
            out.push(Violation::UnknownWord(word.clone()));
        }
        let is_fn = matches!(rule, Rule::Function(_));
        if let Some(&prev) = seen.get(word) {
            if reported.insert(word) {
                out.push(if prev != is_fn {
                    Violation::TwoRoles(word.clone())
                } else {
                    Violation::DuplicateRule(word.clone())
                });
            }
        } else {
            seen.insert(word, is_fn);
        }
        match rule {
            Rule::Primitive { color, .. } => {
                if a.color_index(color).is_none() {
                    out.push(Violation::UnknownColor {
                        word: word.clone(),
                        color: color.clone(),
                    });
                }
            }
            Rule::Function(f) => out.extend(shape_violations(word, &f.shape)),
        }
    }
    out
}

pub(crate) fn shape_violations(word: &Word, shape: &RuleShape) -> Vec<Violation> {
    let mut out = Vec::new();
    let arity = shape.arity();
    if !(1..=2).contains(&arity) {
        out.push(Violation::BadArity {
            word: word.clone(),
            arity,
        });
        return out;
    }
    if shape.rhs.is_empty() {
        out.push(Violation::EmptyRhs(word.clone()));
        return out;
    }
    if let Some(&slot) = shape.rhs.iter().find(|&&s| s == 0 || s as usize > arity) {
        out.push(Violation::SlotOutOfRange {
            word: word.clone(),
            slot,
        });
    }
    if arity == 1 {
        if shape.rhs.iter().any(|&s| s != 1) {
            out.push(Violation::NotRepetition(word.clone()));
        } else if shape.rhs.len() > MAX_RHS_LEN {
            out.push(Violation::RepetitionTooLong {
                word: word.clone(),
                n: shape.rhs.len(),
            });
        }
    } else if shape.rhs.len() > MAX_RHS_LEN {
        out.push(Violation::RhsTooLong {
            word: word.clone(),
            len: shape.rhs.len(),
        });
    }
    out
}

/// [`validate_grammar`] plus a check of the primitive/function counts.
pub fn validate_with_shape(g: &Grammar, shape: GrammarShape) -> Vec<Violation> {
    let mut out = validate_grammar(g);
    let primitives = g.primitives().count();
    let functions = g.functions().count();
    if primitives != shape.primitives || functions != shape.functions {
        out.push(Violation::Shape {
            expected: shape,
            primitives,
            functions,
        });
    }
    out
}
