use crate::derive::Role;
use crate::grammar::{Assignment, RuleShape, SlotKind};
use crate::symbols::Alphabet;

pub(crate) type Cand = u16;

const KINDS: [SlotKind; 2] = [SlotKind::Token, SlotKind::String];

/// Every function rule shape with right-hand side length at most `max_len`:
/// unary repetitions first, then binary rules by length, kinds and slot
/// sequence.
pub fn function_family(max_len: usize) -> Vec<RuleShape> {
    let mut out = Vec::new();
    for kind in KINDS {
        for n in 1..=max_len {
            out.push(RuleShape::repeat(kind, n));
        }
    }
    for len in 1..=max_len {
        for a in KINDS {
            for b in KINDS {
                for bits in 0u32..1 << len {
                    let rhs: Vec<u8> = (0..len).rev().map(|i| 1 + ((bits >> i) & 1) as u8).collect();
                    out.push(RuleShape::binary(a, b, &rhs));
                }
            }
        }
    }
    out
}

/// Candidate meanings for a single word: each color, then each function shape.
#[derive(Debug)]
pub(crate) struct Family {
    colors: usize,
    shapes: Vec<RuleShape>,
}

impl Family {
    pub(crate) fn new(a: &Alphabet, max_len: usize) -> Self {
        Family {
            colors: a.colors().len(),
            shapes: function_family(max_len),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.colors + self.shapes.len()
    }

    pub(crate) fn all(&self) -> Vec<Cand> {
        (0..self.len() as Cand).collect()
    }

    pub(crate) fn role(&self, c: Cand) -> Role<'_> {
        let c = c as usize;
        if c < self.colors {
            Role::Primitive(c as u8)
        } else {
            Role::Function(&self.shapes[c - self.colors])
        }
    }

    pub(crate) fn assignment(&self, a: &Alphabet, c: Cand) -> Assignment {
        match self.role(c) {
            Role::Primitive(k) => Assignment::Primitive(a.color(k).clone()),
            Role::Function(s) => Assignment::Function(s.clone()),
        }
    }

    pub(crate) fn find(&self, a: &Alphabet, x: &Assignment) -> Option<Cand> {
        match x {
            Assignment::Primitive(c) => a.color_index(c).map(|k| k as Cand),
            Assignment::Function(s) => self
                .shapes
                .iter()
                .position(|t| t == s)
                .map(|i| (i + self.colors) as Cand),
        }
    }
}
