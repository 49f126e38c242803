//! Recovering grammars from support pairs by search over the rule family.
//!
//! Each support word gets a domain of candidate meanings: every color and
//! every function rule shape up to the budget's right-hand side length.
//! [`refine`] narrows domains one pair at a time and reports the smallest sets
//! of words to blame when a pair cannot be reproduced. [`induce_grammars`]
//! refines the cheapest pairs first and then enumerates every joint
//! assignment that reproduces the whole support.

mod family;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::derive::{canonical_encoded, Canonical, ParsePolicy, Role};
use crate::episode::Pair;
use crate::error::{Error, Result};
use crate::grammar::{Assignment, Grammar, Rule, MAX_RHS_LEN};
use crate::symbols::{Alphabet, InputSequence, Word};

pub use family::function_family;
pub(crate) use family::{Cand, Family};

/// Length of the inputs enumerated when comparing two grammars' behavior.
pub const IDENTIFY_LEN: usize = 6;

/// Pairs whose domain product exceeds this are left to the final search.
const REFINE_LIMIT: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    /// Candidate checks allowed across refinement and search.
    pub max_expansions: u64,
    pub max_rhs_len: usize,
    /// Advisory; checked between expansions.
    pub wall_clock: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_expansions: 2_000_000_000,
            max_rhs_len: MAX_RHS_LEN,
            wall_clock: None,
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_expansions == 0 || self.max_rhs_len == 0 || self.wall_clock.is_some_and(|d| d.is_zero()) {
            return Err(Error::Config("search budget bounds must be positive".into()));
        }
        Ok(())
    }
}

struct Meter {
    used: AtomicU64,
    limit: u64,
    deadline: Option<Instant>,
    stopped: AtomicBool,
}

impl Meter {
    fn new(b: &SearchBudget) -> Self {
        Meter {
            used: AtomicU64::new(0),
            limit: b.max_expansions,
            deadline: b.wall_clock.map(|d| Instant::now() + d),
            stopped: AtomicBool::new(false),
        }
    }

    /// Records `n` expansions; false once the budget is spent.
    fn spend(&self, n: u64) -> bool {
        if self.stopped.load(Ordering::Relaxed) {
            return false;
        }
        let used = self.used.fetch_add(n, Ordering::Relaxed) + n;
        let late = self.deadline.is_some_and(|d| used % 4096 < n && Instant::now() > d);
        if used > self.limit || late {
            self.stopped.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    fn exhausted(&self) -> bool {
        self.stopped.load(Ordering::Relaxed)
    }
}

/// A support pair in alphabet indices.
struct Encoded {
    input: Vec<u8>,
    /// `None` when the output names a color outside the alphabet.
    output: Option<Vec<u8>>,
    /// Distinct word indices occurring in the input.
    words: Vec<u8>,
}

impl Encoded {
    fn new(a: &Alphabet, p: &Pair) -> Result<Self> {
        let input = a.encode_input(&p.input)?;
        let words: BTreeSet<u8> = input.iter().copied().collect();
        Ok(Encoded {
            output: a.encode_output(&p.output),
            input,
            words: words.into_iter().collect(),
        })
    }

    fn reproduced(&self, roles: &[Option<Role<'_>>], policy: &ParsePolicy) -> bool {
        match (&self.output, canonical_encoded(roles, &self.input, policy)) {
            (Some(want), Canonical::Yield(got)) => *want == got,
            _ => false,
        }
    }
}

/// For each variable, which of its candidates occur in at least one
/// assignment of the variables that reproduces `pair`.
fn project(
    family: &Family,
    width: usize,
    pair: &Encoded,
    vars: &[(u8, &[Cand])],
    policy: &ParsePolicy,
    meter: &Meter,
) -> Vec<Vec<bool>> {
    let total: u64 = vars.iter().map(|(_, d)| d.len() as u64).product();
    let empty = || -> (Vec<Vec<bool>>, Vec<Option<Role<'_>>>) {
        (vars.iter().map(|(_, d)| vec![false; d.len()]).collect(), vec![None; width])
    };
    if pair.output.is_none() || total == 0 {
        return empty().0;
    }
    meter.spend(total);
    let chunk = 4096u64;
    (0..total.div_ceil(chunk))
        .into_par_iter()
        .fold(empty, |(mut marks, mut roles), c| {
            let mut picks = vec![0usize; vars.len()];
            for t in c * chunk..((c + 1) * chunk).min(total) {
                let mut rest = t;
                for (i, (_, d)) in vars.iter().enumerate() {
                    picks[i] = (rest % d.len() as u64) as usize;
                    rest /= d.len() as u64;
                }
                if picks.iter().enumerate().all(|(i, &p)| marks[i][p]) {
                    continue;
                }
                for (i, (w, d)) in vars.iter().enumerate() {
                    roles[*w as usize] = Some(family.role(d[picks[i]]));
                }
                if pair.reproduced(&roles, policy) {
                    for (i, &p) in picks.iter().enumerate() {
                        marks[i][p] = true;
                    }
                }
            }
            (marks, roles)
        })
        .map(|(m, _)| m)
        .reduce(
            || vars.iter().map(|(_, d)| vec![false; d.len()]).collect(),
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for (p, q) in x.iter_mut().zip(y) {
                        *p |= q;
                    }
                }
                a
            },
        )
}

/// Whether some assignment of the variables reproduces `pair`.
fn satisfiable(family: &Family, width: usize, pair: &Encoded, vars: &[(u8, &[Cand])], policy: &ParsePolicy, meter: &Meter) -> bool {
    let total: u64 = vars.iter().map(|(_, d)| d.len() as u64).product();
    if pair.output.is_none() || total == 0 {
        return false;
    }
    meter.spend(total);
    (0..total).into_par_iter().any(|t| {
        let mut roles = vec![None; width];
        let mut rest = t;
        for (w, d) in vars {
            roles[*w as usize] = Some(family.role(d[(rest % d.len() as u64) as usize]));
            rest /= d.len() as u64;
        }
        pair.reproduced(&roles, policy)
    })
}

/// Per-word candidate domains narrowed by the pairs checked so far.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    alphabet: Arc<Alphabet>,
    family: Arc<Family>,
    policy: ParsePolicy,
    /// Indexed by alphabet word position; `None` for words not yet seen.
    domains: Vec<Option<Vec<Cand>>>,
    provenance: Vec<Vec<usize>>,
    checked: Vec<Pair>,
}

impl PartialEq for Hypothesis {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.domains == other.domains
            && self.provenance == other.provenance
            && self.checked == other.checked
    }
}

impl Hypothesis {
    /// Every word in `words` starts unconstrained.
    pub fn new<'w>(alphabet: Arc<Alphabet>, words: impl IntoIterator<Item = &'w Word>, max_rhs_len: usize) -> Result<Self> {
        let family = Arc::new(Family::new(&alphabet, max_rhs_len));
        let n = alphabet.words().len();
        let mut h = Hypothesis {
            alphabet,
            family,
            policy: ParsePolicy::default(),
            domains: vec![None; n],
            provenance: vec![Vec::new(); n],
            checked: Vec::new(),
        };
        for w in words {
            let i = h.index(w)?;
            h.domains[i] = Some(h.family.all());
        }
        Ok(h)
    }

    fn index(&self, w: &Word) -> Result<usize> {
        self.alphabet
            .word_index(w)
            .map(|i| i as usize)
            .ok_or_else(|| Error::UnknownWord(w.clone()))
    }

    /// Fixes `word` to a single meaning, as an unproven assumption.
    pub fn assume(mut self, word: &Word, meaning: &Assignment) -> Result<Self> {
        let i = self.index(word)?;
        let c = self
            .family
            .find(&self.alphabet, meaning)
            .ok_or_else(|| Error::Config(format!("`{word}` cannot take a meaning outside the rule family")))?;
        self.domains[i] = Some(vec![c]);
        Ok(self)
    }

    pub fn words(&self) -> Vec<Word> {
        self.domains
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_some())
            .map(|(i, _)| self.alphabet.word(i as u8).clone())
            .collect()
    }

    /// Remaining meanings for `word`; `None` when the word is not tracked.
    pub fn domain(&self, word: &Word) -> Option<Vec<Assignment>> {
        let i = self.alphabet.word_index(word)? as usize;
        let d = self.domains[i].as_ref()?;
        Some(d.iter().map(|&c| self.family.assignment(&self.alphabet, c)).collect())
    }

    pub fn domain_size(&self, word: &Word) -> Option<usize> {
        let i = self.alphabet.word_index(word)? as usize;
        self.domains[i].as_ref().map(|d| d.len())
    }

    /// Number of joint assignments still allowed, saturating.
    pub fn size(&self) -> u128 {
        self.domains
            .iter()
            .flatten()
            .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
    }

    pub fn checked(&self) -> &[Pair] {
        &self.checked
    }

    /// Indices into [`Hypothesis::checked`] of the pairs that narrowed `word`.
    pub fn provenance(&self, word: &Word) -> &[usize] {
        match self.alphabet.word_index(word) {
            Some(i) => &self.provenance[i as usize],
            None => &[],
        }
    }

    fn ensure(&mut self, words: &[u8]) {
        for &w in words {
            if self.domains[w as usize].is_none() {
                self.domains[w as usize] = Some(self.family.all());
            }
        }
    }

    fn vars<'s>(&'s self, words: &[u8], relaxed: &[u8], full: &'s [Cand]) -> Vec<(u8, &'s [Cand])> {
        words
            .iter()
            .map(|&w| {
                let d: &[Cand] = if relaxed.contains(&w) {
                    full
                } else {
                    self.domains[w as usize].as_deref().unwrap_or(full)
                };
                (w, d)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContradictionReport {
    pub pair: Pair,
    /// Smallest word sets whose relaxation to the whole family lets the pair
    /// be reproduced, least established first. Empty when no set of one or
    /// two words suffices.
    pub culprits: Vec<Vec<Word>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Refinement {
    Refined(Hypothesis),
    Contradiction(ContradictionReport),
}

fn refine_metered(h: &Hypothesis, pair: &Pair, meter: &Meter) -> Result<Refinement> {
    if h.checked.contains(pair) {
        return Ok(Refinement::Refined(h.clone()));
    }
    let enc = Encoded::new(&h.alphabet, pair)?;
    let mut next = h.clone();
    next.ensure(&enc.words);
    let width = h.alphabet.words().len();
    let full = next.family.all();
    let vars = next.vars(&enc.words, &[], &full);
    let marks = project(&next.family, width, &enc, &vars, &next.policy, meter);
    if marks.iter().all(|m| m.iter().any(|&b| b)) {
        let narrowed: Vec<(u8, Vec<Cand>)> = vars
            .iter()
            .zip(&marks)
            .map(|((w, d), m)| (*w, d.iter().zip(m).filter(|(_, &b)| b).map(|(&c, _)| c).collect()))
            .collect();
        let index = next.checked.len();
        next.checked.push(pair.clone());
        for (w, d) in narrowed {
            let slot = &mut next.domains[w as usize];
            if slot.as_ref().map(|x| x.len()) != Some(d.len()) {
                next.provenance[w as usize].push(index);
            }
            *slot = Some(d);
        }
        return Ok(Refinement::Refined(next));
    }
    Ok(Refinement::Contradiction(ContradictionReport {
        pair: pair.clone(),
        culprits: culprits(&next, &enc, &full, meter),
    }))
}

fn culprits(h: &Hypothesis, enc: &Encoded, full: &[Cand], meter: &Meter) -> Vec<Vec<Word>> {
    let width = h.alphabet.words().len();
    let words = &enc.words;
    let mut sets: Vec<Vec<u8>> = Vec::new();
    for size in 1..=2.min(words.len()) {
        let candidates: Vec<Vec<u8>> = if size == 1 {
            words.iter().map(|&w| vec![w]).collect()
        } else {
            let mut out = Vec::new();
            for (i, &a) in words.iter().enumerate() {
                for &b in &words[i + 1..] {
                    out.push(vec![a, b]);
                }
            }
            out
        };
        for set in candidates {
            let vars = h.vars(words, &set, full);
            if satisfiable(&h.family, width, enc, &vars, &h.policy, meter) {
                sets.push(set);
            }
        }
        if !sets.is_empty() {
            break;
        }
    }
    let weight = |s: &Vec<u8>| -> usize { s.iter().map(|&w| h.provenance[w as usize].len()).sum() };
    sets.sort_by_key(|s| (weight(s), s.clone()));
    sets.into_iter()
        .map(|s| s.into_iter().map(|w| h.alphabet.word(w).clone()).collect())
        .collect()
}

/// Narrows `h` so that `pair` is reproduced, or explains why it cannot be.
pub fn refine(h: &Hypothesis, pair: &Pair) -> Result<Refinement> {
    let meter = Meter::new(&SearchBudget::default());
    refine_metered(h, pair, &meter)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Induction {
    /// Grammars over the support vocabulary reproducing every pair, in
    /// candidate order.
    pub grammars: Vec<Grammar>,
    /// False when the budget ran out before the search finished.
    pub complete: bool,
    pub expansions: u64,
    pub contradiction: Option<ContradictionReport>,
}

impl Induction {
    pub fn into_result(self) -> Result<Vec<Grammar>> {
        if self.complete {
            Ok(self.grammars)
        } else {
            Err(Error::BudgetExhausted {
                expansions: self.expansions,
            })
        }
    }
}

fn vocabulary(support: &[Pair]) -> BTreeSet<Word> {
    support.iter().flat_map(|p| p.input.iter().cloned()).collect()
}

/// Every grammar in the rule family that reproduces all of `support` under
/// the default parse policy. Rules are given only for words that occur in
/// the support.
pub fn induce_grammars(support: &[Pair], a: &Arc<Alphabet>, b: &SearchBudget) -> Result<Induction> {
    b.validate()?;
    if support.is_empty() {
        return Err(Error::Config("support set is empty".into()));
    }
    let vocab = vocabulary(support);
    let mut h = Hypothesis::new(a.clone(), vocab.iter(), b.max_rhs_len)?;
    let meter = Meter::new(b);
    let encoded: Vec<Encoded> = support.iter().map(|p| Encoded::new(a, p)).collect::<Result<_>>()?;

    let mut pending: Vec<usize> = (0..support.len()).collect();
    while !pending.is_empty() && !meter.exhausted() {
        let cost = |i: usize| -> u64 {
            encoded[i]
                .words
                .iter()
                .map(|&w| h.domains[w as usize].as_ref().map_or(1, |d| d.len() as u64))
                .fold(1u64, |x, y| x.saturating_mul(y))
        };
        let (pos, best) = pending
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| (cost(i), i))
            .map(|(p, &i)| (p, i))
            .expect("non-empty");
        if cost(best) > REFINE_LIMIT {
            break;
        }
        pending.remove(pos);
        match refine_metered(&h, &support[best], &meter)? {
            Refinement::Refined(next) => h = next,
            Refinement::Contradiction(report) => {
                return Ok(Induction {
                    grammars: Vec::new(),
                    complete: !meter.exhausted(),
                    expansions: meter.used(),
                    contradiction: Some(report),
                })
            }
        }
    }

    let grammars = if meter.exhausted() {
        Vec::new()
    } else {
        search(&h, &encoded, &meter)
    };
    Ok(Induction {
        grammars,
        complete: !meter.exhausted(),
        expansions: meter.used(),
        contradiction: None,
    })
}

/// Backtracking over the refined domains, smallest first, checking each
/// pair as soon as all of its words are assigned.
fn search(h: &Hypothesis, pairs: &[Encoded], meter: &Meter) -> Vec<Grammar> {
    let mut order: Vec<u8> = (0..h.domains.len() as u8).filter(|&w| h.domains[w as usize].is_some()).collect();
    order.sort_by_key(|&w| (h.domains[w as usize].as_ref().map_or(0, |d| d.len()), w));
    if order.is_empty() {
        return if pairs.is_empty() {
            vec![Grammar::new(h.alphabet.clone(), Vec::new())]
        } else {
            Vec::new()
        };
    }
    let level_of: BTreeMap<u8, usize> = order.iter().enumerate().map(|(l, &w)| (w, l)).collect();
    let mut due: Vec<Vec<&Encoded>> = vec![Vec::new(); order.len()];
    for p in pairs {
        let level = p.words.iter().map(|w| level_of[w]).max().expect("non-empty input");
        due[level].push(p);
    }
    let domains: Vec<&[Cand]> = order
        .iter()
        .map(|&w| h.domains[w as usize].as_deref().expect("tracked"))
        .collect();
    let width = h.alphabet.words().len();
    let ctx = SearchCtx {
        family: &h.family,
        policy: &h.policy,
        order: &order,
        domains: &domains,
        due: &due,
        meter,
    };

    let found: Vec<Vec<Vec<Cand>>> = domains[0]
        .par_iter()
        .map(|&c| {
            let mut roles = vec![None; width];
            let mut picks = Vec::with_capacity(order.len());
            let mut out = Vec::new();
            ctx.descend(0, c, &mut roles, &mut picks, &mut out);
            out
        })
        .collect();
    if meter.exhausted() {
        return Vec::new();
    }
    found
        .into_iter()
        .flatten()
        .map(|picks| {
            let rules = order
                .iter()
                .zip(&picks)
                .map(|(&w, &c)| Rule::from_assignment(h.alphabet.word(w).clone(), h.family.assignment(&h.alphabet, c)))
                .collect();
            Grammar::new(h.alphabet.clone(), rules).normalized()
        })
        .collect()
}

struct SearchCtx<'s> {
    family: &'s Family,
    policy: &'s ParsePolicy,
    order: &'s [u8],
    domains: &'s [&'s [Cand]],
    due: &'s [Vec<&'s Encoded>],
    meter: &'s Meter,
}

impl<'s> SearchCtx<'s> {
    fn descend(
        &self,
        level: usize,
        c: Cand,
        roles: &mut Vec<Option<Role<'s>>>,
        picks: &mut Vec<Cand>,
        out: &mut Vec<Vec<Cand>>,
    ) {
        let w = self.order[level] as usize;
        roles[w] = Some(self.family.role(c));
        picks.push(c);
        let checks = self.due[level].len() as u64;
        if (checks == 0 || self.meter.spend(checks))
            && self.due[level].iter().all(|p| p.reproduced(roles, self.policy)) {
                if level + 1 == self.order.len() {
                    out.push(picks.clone());
                } else {
                    for &next in self.domains[level + 1] {
                        if self.meter.exhausted() {
                            break;
                        }
                        self.descend(level + 1, next, roles, picks, out);
                    }
                }
            }
        picks.pop();
        roles[w] = None;
    }
}

/// Why a grammar is not the only one consistent with a support set.
#[derive(Clone, Debug, PartialEq)]
pub enum Ambiguity {
    /// A rule word never occurs in the support.
    Unseen(Word),
    /// The grammar does not reproduce the support under the canonical policy.
    Inconsistent,
    /// Another consistent grammar disagrees with this one on `input`.
    Differs { grammar: Grammar, input: InputSequence },
}

fn comparable(c: Canonical) -> Canonical {
    match c {
        Canonical::TooLong(_) => Canonical::TooLong(0),
        other => other,
    }
}

fn all_inputs(vocab: &[u8], max_len: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * vocab.len());
        for s in &layer {
            for &w in vocab {
                let mut t = s.clone();
                t.push(w);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// First input of length at most `max_len` on which `a` and `b` disagree
/// under the default policy, ignoring how far past the output cap they go.
pub fn distinguishing_input(a: &Grammar, b: &Grammar, vocab: &BTreeSet<Word>, max_len: usize) -> Option<InputSequence> {
    let alphabet = a.alphabet();
    let ids: Vec<u8> = vocab.iter().filter_map(|w| alphabet.word_index(w)).collect();
    let (ra, rb) = (a.roles(), b.roles());
    let policy = ParsePolicy::default();
    let inputs = all_inputs(&ids, max_len);
    inputs
        .par_iter()
        .find_first(|s| comparable(canonical_encoded(&ra, s, &policy)) != comparable(canonical_encoded(&rb, s, &policy)))
        .map(|s| s.iter().map(|&w| alphabet.word(w).clone()).collect())
}

/// `None` when `g` is the only grammar consistent with `support` up to
/// behavior on inputs of length at most `max_len` within the caps.
pub fn identification_witness(support: &[Pair], g: &Grammar, b: &SearchBudget, max_len: usize) -> Result<Option<Ambiguity>> {
    let vocab = vocabulary(support);
    if let Some(w) = g.vocabulary().into_iter().find(|w| !vocab.contains(w)) {
        return Ok(Some(Ambiguity::Unseen(w)));
    }
    let grammars = induce_grammars(support, g.alphabet(), b)?.into_result()?;
    let target = g.restricted_to(&vocab);
    if !grammars.iter().any(|h| h.assignments() == target.assignments()) {
        return Ok(Some(Ambiguity::Inconsistent));
    }
    for h in grammars {
        if h.assignments() == target.assignments() {
            continue;
        }
        if let Some(input) = distinguishing_input(&target, &h, &vocab, max_len) {
            return Ok(Some(Ambiguity::Differs { grammar: h, input }));
        }
    }
    Ok(None)
}

pub fn is_identifying(support: &[Pair], g: &Grammar, b: &SearchBudget) -> Result<bool> {
    Ok(identification_witness(support, g, b, IDENTIFY_LEN)?.is_none())
}
