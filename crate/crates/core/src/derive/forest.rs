use std::collections::BTreeSet;
use std::rc::Rc;
use std::sync::Arc;

use super::{Derivation, Role, Span};
use crate::grammar::{FunctionRule, Grammar, RuleShape, SlotKind};
use crate::symbols::Word;

type Outputs = Rc<BTreeSet<Vec<u8>>>;
type Trees = Rc<Vec<(Arc<Derivation>, Vec<u8>)>>;

/// Span-memoized enumeration. `units` holds leaves and applications only;
/// `all` adds right-nested concatenations of a unit and a remainder.
pub(crate) struct Forest<'r, 'a> {
    roles: &'r [Option<Role<'a>>],
    input: &'r [u8],
    cap: Option<usize>,
    width: usize,
    units: Vec<Option<Outputs>>,
    all: Vec<Option<Outputs>>,
    unit_trees: Vec<Option<Trees>>,
    all_trees: Vec<Option<Trees>>,
}

fn substitute(shape: &RuleShape, args: &[&[u8]]) -> Vec<u8> {
    let mut out = Vec::new();
    for &s in &shape.rhs {
        out.extend_from_slice(args[s as usize - 1]);
    }
    out
}

impl<'r, 'a> Forest<'r, 'a> {
    pub(crate) fn new(roles: &'r [Option<Role<'a>>], input: &'r [u8], cap: Option<usize>) -> Self {
        let width = input.len() + 1;
        let cells = width * width;
        Forest {
            roles,
            input,
            cap,
            width,
            units: vec![None; cells],
            all: vec![None; cells],
            unit_trees: vec![None; cells],
            all_trees: vec![None; cells],
        }
    }

    fn role(&self, pos: usize) -> Option<Role<'a>> {
        self.roles.get(self.input[pos] as usize).copied().flatten()
    }

    fn fits_cap(&self, y: &[u8]) -> bool {
        self.cap.is_none_or(|c| y.len() <= c)
    }

    /// Function words whose left-hand side can cover exactly `[i, j)`, as
    /// (position, shape).
    fn applications(&self, i: usize, j: usize) -> Vec<(usize, &'a RuleShape)> {
        let mut out = Vec::new();
        for k in i..j {
            if let Some(Role::Function(shape)) = self.role(k) {
                let ok = match shape.arity() {
                    1 => k > i && k + 1 == j,
                    2 => k > i && k + 1 < j,
                    _ => false,
                };
                if ok {
                    out.push((k, shape));
                }
            }
        }
        out
    }

    fn arg_outputs(&mut self, kind: SlotKind, i: usize, j: usize) -> Outputs {
        match kind {
            SlotKind::Token => match (j - i, self.role(i)) {
                (1, Some(Role::Primitive(c))) => Rc::new(BTreeSet::from([vec![c]])),
                _ => Rc::new(BTreeSet::new()),
            },
            SlotKind::String => self.all(i, j),
        }
    }

    fn units(&mut self, i: usize, j: usize) -> Outputs {
        let cell = i * self.width + j;
        if let Some(s) = &self.units[cell] {
            return s.clone();
        }
        let mut set = BTreeSet::new();
        if j - i == 1 {
            if let Some(Role::Primitive(c)) = self.role(i) {
                set.insert(vec![c]);
            }
        }
        for (k, shape) in self.applications(i, j) {
            let left = self.arg_outputs(shape.kinds[0], i, k);
            if shape.arity() == 1 {
                for a in left.iter() {
                    let y = substitute(shape, &[a]);
                    if self.fits_cap(&y) {
                        set.insert(y);
                    }
                }
            } else {
                let right = self.arg_outputs(shape.kinds[1], k + 1, j);
                for a in left.iter() {
                    for b in right.iter() {
                        let y = substitute(shape, &[a, b]);
                        if self.fits_cap(&y) {
                            set.insert(y);
                        }
                    }
                }
            }
        }
        let set = Rc::new(set);
        self.units[cell] = Some(set.clone());
        set
    }

    fn all(&mut self, i: usize, j: usize) -> Outputs {
        let cell = i * self.width + j;
        if let Some(s) = &self.all[cell] {
            return s.clone();
        }
        let mut set = (*self.units(i, j)).clone();
        for m in i + 1..j {
            let head = self.units(i, m);
            if head.is_empty() {
                continue;
            }
            let tail = self.all(m, j);
            for a in head.iter() {
                for b in tail.iter() {
                    if self.cap.is_none_or(|c| a.len() + b.len() <= c) {
                        let mut y = a.clone();
                        y.extend_from_slice(b);
                        set.insert(y);
                    }
                }
            }
        }
        let set = Rc::new(set);
        self.all[cell] = Some(set.clone());
        set
    }

    pub(crate) fn outputs(&mut self) -> BTreeSet<Vec<u8>> {
        let n = self.input.len();
        if n == 0 {
            return BTreeSet::new();
        }
        (*self.all(0, n)).clone()
    }

    fn arg_trees(&mut self, g: &Grammar, words: &[Word], kind: SlotKind, i: usize, j: usize) -> Trees {
        match kind {
            SlotKind::Token => {
                let units = self.unit_trees(g, words, i, j);
                match (j - i, self.role(i)) {
                    (1, Some(Role::Primitive(_))) => units,
                    _ => Rc::new(Vec::new()),
                }
            }
            SlotKind::String => self.all_trees(g, words, i, j),
        }
    }

    fn unit_trees(&mut self, g: &Grammar, words: &[Word], i: usize, j: usize) -> Trees {
        let cell = i * self.width + j;
        if let Some(t) = &self.unit_trees[cell] {
            return t.clone();
        }
        let span = Span::new(i, j);
        let mut out = Vec::new();
        if j - i == 1 {
            if let Some(Role::Primitive(c)) = self.role(i) {
                let leaf = Derivation::Leaf {
                    span,
                    word: words[i].clone(),
                    color: g.alphabet().color(c).clone(),
                };
                out.push((Arc::new(leaf), vec![c]));
            }
        }
        for (k, shape) in self.applications(i, j) {
            let rule = FunctionRule::new(words[k].clone(), shape.clone());
            let left = self.arg_trees(g, words, shape.kinds[0], i, k);
            let right = if shape.arity() == 2 {
                Some(self.arg_trees(g, words, shape.kinds[1], k + 1, j))
            } else {
                None
            };
            for (ld, ly) in left.iter() {
                match &right {
                    None => {
                        let y = substitute(shape, &[ly]);
                        if self.fits_cap(&y) {
                            let d = Derivation::Apply {
                                span,
                                rule: rule.clone(),
                                args: vec![ld.clone()],
                            };
                            out.push((Arc::new(d), y));
                        }
                    }
                    Some(right) => {
                        for (rd, ry) in right.iter() {
                            let y = substitute(shape, &[ly, ry]);
                            if self.fits_cap(&y) {
                                let d = Derivation::Apply {
                                    span,
                                    rule: rule.clone(),
                                    args: vec![ld.clone(), rd.clone()],
                                };
                                out.push((Arc::new(d), y));
                            }
                        }
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.unit_trees[cell] = Some(out.clone());
        out
    }

    fn all_trees(&mut self, g: &Grammar, words: &[Word], i: usize, j: usize) -> Trees {
        let cell = i * self.width + j;
        if let Some(t) = &self.all_trees[cell] {
            return t.clone();
        }
        let mut out = (*self.unit_trees(g, words, i, j)).clone();
        for m in i + 1..j {
            let head = self.unit_trees(g, words, i, m);
            if head.is_empty() {
                continue;
            }
            let tail = self.all_trees(g, words, m, j);
            for (ld, ly) in head.iter() {
                for (rd, ry) in tail.iter() {
                    if self.cap.is_none_or(|c| ly.len() + ry.len() <= c) {
                        let mut y = ly.clone();
                        y.extend_from_slice(ry);
                        let d = Derivation::Concat {
                            span: Span::new(i, j),
                            left: ld.clone(),
                            right: rd.clone(),
                        };
                        out.push((Arc::new(d), y));
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.all_trees[cell] = Some(out.clone());
        out
    }

    pub(crate) fn derivations(&mut self, g: &Grammar, words: &[Word]) -> Vec<(Arc<Derivation>, Vec<u8>)> {
        let n = self.input.len();
        if n == 0 {
            return Vec::new();
        }
        (*self.all_trees(g, words, 0, n)).clone()
    }
}

pub(crate) fn outputs_encoded(roles: &[Option<Role<'_>>], input: &[u8], cap: Option<usize>) -> BTreeSet<Vec<u8>> {
    Forest::new(roles, input, cap).outputs()
}
