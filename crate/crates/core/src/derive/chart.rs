use std::sync::Arc;

use super::{Derivation, ParsePolicy, Role, ScanOrder, Span, SplitPreference};
use crate::grammar::{FunctionRule, Grammar, SlotKind};
use crate::symbols::Word;

#[derive(Clone, Copy, Debug)]
enum Choice {
    Leaf(u8),
    Apply(usize),
    Split(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Canonical {
    Yield(Vec<u8>),
    Untranslatable,
    /// Some node's yield exceeded the output cap; carries its length.
    TooLong(usize),
}

/// Memoized policy choice per span of one input.
pub(crate) struct Chart<'r, 'a> {
    roles: &'r [Option<Role<'a>>],
    input: &'r [u8],
    scan: ScanOrder,
    split: SplitPreference,
    width: usize,
    memo: Vec<Option<Option<Choice>>>,
}

impl<'r, 'a> Chart<'r, 'a> {
    pub(crate) fn new(roles: &'r [Option<Role<'a>>], input: &'r [u8], scan: ScanOrder, split: SplitPreference) -> Self {
        let width = input.len() + 1;
        Chart {
            roles,
            input,
            scan,
            split,
            width,
            memo: vec![None; width * width],
        }
    }

    fn role(&self, pos: usize) -> Option<Role<'a>> {
        self.roles.get(self.input[pos] as usize).copied().flatten()
    }

    fn primitive(&self, pos: usize) -> Option<u8> {
        match self.role(pos) {
            Some(Role::Primitive(c)) => Some(c),
            _ => None,
        }
    }

    pub(crate) fn translatable(&mut self) -> bool {
        let n = self.input.len();
        n > 0 && self.choose(0, n).is_some()
    }

    fn fits(&mut self, kind: SlotKind, i: usize, j: usize) -> bool {
        match kind {
            SlotKind::Token => j - i == 1 && self.primitive(i).is_some(),
            SlotKind::String => j > i && self.choose(i, j).is_some(),
        }
    }

    fn applies(&mut self, k: usize, i: usize, j: usize) -> bool {
        let Some(Role::Function(shape)) = self.role(k) else {
            return false;
        };
        match shape.kinds[..] {
            [x] => k + 1 == j && self.fits(x, i, k),
            [x, y] => k > i && k + 1 < j && self.fits(x, i, k) && self.fits(y, k + 1, j),
            _ => false,
        }
    }

    fn choose(&mut self, i: usize, j: usize) -> Option<Choice> {
        let slot = i * self.width + j;
        if let Some(c) = self.memo[slot] {
            return c;
        }
        let c = self.decide(i, j);
        self.memo[slot] = Some(c);
        c
    }

    fn decide(&mut self, i: usize, j: usize) -> Option<Choice> {
        if j - i == 1 {
            return self.primitive(i).map(Choice::Leaf);
        }
        for step in 0..j - i {
            let k = match self.scan {
                ScanOrder::LeftmostFirst => i + step,
                ScanOrder::RightmostFirst => j - 1 - step,
            };
            if self.applies(k, i, j) {
                return Some(Choice::Apply(k));
            }
        }
        for step in 1..j - i {
            let m = match self.split {
                SplitPreference::ShortestPrefix => i + step,
                SplitPreference::LongestPrefix => j - step,
            };
            if self.choose(i, m).is_some() && self.choose(m, j).is_some() {
                return Some(Choice::Split(m));
            }
        }
        None
    }

    /// Appends the yield of span `[i, j)` to `out`. Fails with the offending
    /// length when a node's yield exceeds `cap`.
    fn emit(&mut self, i: usize, j: usize, cap: Option<usize>, out: &mut Vec<u8>) -> Result<(), usize> {
        let start = out.len();
        match self.choose(i, j).expect("span was checked translatable") {
            Choice::Leaf(c) => out.push(c),
            Choice::Split(m) => {
                self.emit(i, m, cap, out)?;
                self.emit(m, j, cap, out)?;
            }
            Choice::Apply(k) => {
                let Some(Role::Function(shape)) = self.role(k) else {
                    unreachable!()
                };
                let mut ranges = [(0, 0); 2];
                let spans = [(i, k), (k + 1, j)];
                for (slot, range) in ranges.iter_mut().enumerate().take(shape.arity()) {
                    let (a, b) = spans[slot];
                    let from = out.len();
                    self.emit(a, b, cap, out)?;
                    *range = (from, out.len());
                }
                let total: usize = shape.rhs.iter().map(|&s| {
                    let (a, b) = ranges[s as usize - 1];
                    b - a
                }).sum();
                if cap.is_some_and(|c| total > c) {
                    return Err(total);
                }
                let args_end = out.len();
                for &s in &shape.rhs {
                    let (a, b) = ranges[s as usize - 1];
                    out.extend_from_within(a..b);
                }
                out.drain(start..args_end);
            }
        }
        let len = out.len() - start;
        match cap {
            Some(c) if len > c => Err(len),
            _ => Ok(()),
        }
    }

    pub(crate) fn tree(&mut self, g: &Grammar, words: &[Word]) -> Arc<Derivation> {
        let n = self.input.len();
        self.build(g, words, 0, n)
    }

    fn build(&mut self, g: &Grammar, words: &[Word], i: usize, j: usize) -> Arc<Derivation> {
        let span = Span::new(i, j);
        Arc::new(match self.choose(i, j).expect("span was checked translatable") {
            Choice::Leaf(c) => Derivation::Leaf {
                span,
                word: words[i].clone(),
                color: g.alphabet().color(c).clone(),
            },
            Choice::Split(m) => Derivation::Concat {
                span,
                left: self.build(g, words, i, m),
                right: self.build(g, words, m, j),
            },
            Choice::Apply(k) => {
                let Some(Role::Function(shape)) = self.role(k) else {
                    unreachable!()
                };
                let mut args = vec![self.build(g, words, i, k)];
                if shape.arity() == 2 {
                    args.push(self.build(g, words, k + 1, j));
                }
                Derivation::Apply {
                    span,
                    rule: FunctionRule::new(words[k].clone(), shape.clone()),
                    args,
                }
            }
        })
    }
}

pub(crate) fn canonical_encoded(roles: &[Option<Role<'_>>], input: &[u8], p: &ParsePolicy) -> Canonical {
    let mut chart = Chart::new(roles, input, p.scan, p.split);
    if !chart.translatable() {
        return Canonical::Untranslatable;
    }
    let mut out = Vec::with_capacity(p.caps.output);
    match chart.emit(0, input.len(), p.output_cap(), &mut out) {
        Ok(()) => Canonical::Yield(out),
        Err(len) => Canonical::TooLong(len),
    }
}
