#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use transduce::induce::function_family;
use transduce::{canonical_derive, Alphabet, Assignment, Grammar, Pair, ParsePolicy, Rule, Word};

pub fn meanings(a: &Alphabet, max_len: usize) -> Vec<Assignment> {
    let mut out: Vec<Assignment> = a.colors().iter().cloned().map(Assignment::Primitive).collect();
    out.extend(function_family(max_len).into_iter().map(Assignment::Function));
    out
}

fn build(a: &Arc<Alphabet>, words: &[Word], picks: &[Assignment]) -> Grammar {
    let rules = words
        .iter()
        .zip(picks)
        .map(|(w, m)| Rule::from_assignment(w.clone(), m.clone()))
        .collect();
    Grammar::new(a.clone(), rules)
}

/// Plain backtracking over the whole family for every word, in a fixed
/// order: repeatedly the pair with the fewest words not yet ordered.
pub fn brute_force_induce(support: &[Pair], a: &Arc<Alphabet>, max_len: usize) -> BTreeSet<Vec<(Word, Assignment)>> {
    let family = meanings(a, max_len);
    let mut order: Vec<Word> = Vec::new();
    let mut remaining: Vec<&Pair> = support.iter().collect();
    let mut due: Vec<Vec<&Pair>> = Vec::new();
    while !remaining.is_empty() {
        let fresh = |p: &Pair| -> BTreeSet<Word> { p.input.iter().filter(|w| !order.contains(w)).cloned().collect() };
        let (i, _) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(i, p)| (fresh(p).len(), *i))
            .unwrap();
        let p = remaining.remove(i);
        for w in fresh(p) {
            order.push(w);
            due.push(Vec::new());
        }
        let level = p.input.iter().map(|w| order.iter().position(|x| x == w).unwrap()).max().unwrap();
        due[level].push(p);
    }
    let policy = ParsePolicy::default();
    let mut out = BTreeSet::new();
    let mut picks: Vec<Assignment> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn go(
        level: usize,
        order: &[Word],
        due: &[Vec<&Pair>],
        family: &[Assignment],
        a: &Arc<Alphabet>,
        policy: &ParsePolicy,
        picks: &mut Vec<Assignment>,
        out: &mut BTreeSet<Vec<(Word, Assignment)>>,
    ) {
        if level == order.len() {
            let mut g: Vec<(Word, Assignment)> = order.iter().cloned().zip(picks.iter().cloned()).collect();
            g.sort();
            out.insert(g);
            return;
        }
        for m in family {
            picks.push(m.clone());
            let g = build(a, &order[..=level], picks);
            if due[level].iter().all(|p| canonical_derive(&g, &p.input, policy).ok().as_ref() == Some(&p.output)) {
                go(level + 1, order, due, family, a, policy, picks, out);
            }
            picks.pop();
        }
    }
    go(0, &order, &due, &family, a, &policy, &mut picks, &mut out);
    out
}

pub fn as_set(grammars: &[Grammar]) -> BTreeSet<Vec<(Word, Assignment)>> {
    grammars.iter().map(|g| g.assignments().into_iter().collect()).collect()
}
