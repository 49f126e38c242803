//! Label-free operation signatures and the per-grammar combination key.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grammar::{FunctionRule, Grammar, RuleShape, SlotKind};

/// The shape of a function rule with its word and all colors abstracted away.
///
/// Slot indices stay positional: `x1 w x2 -> x1 x2` and `x1 w x2 -> x2 x1`
/// are different operations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperationSignature {
    pub arity: usize,
    pub kinds: Vec<SlotKind>,
    pub rhs: Vec<u8>,
}

impl OperationSignature {
    pub fn of_shape(shape: &RuleShape) -> Self {
        OperationSignature {
            arity: shape.arity(),
            kinds: shape.kinds.clone(),
            rhs: shape.rhs.clone(),
        }
    }
}

pub fn signature_of(rule: &FunctionRule) -> OperationSignature {
    OperationSignature::of_shape(&rule.shape)
}

impl fmt::Display for OperationSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, k) in self.kinds.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(match k {
                SlotKind::Token => "T",
                SlotKind::String => "S",
            })?;
        }
        f.write_str(")[")?;
        for (i, s) in self.rhs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

impl Serialize for OperationSignature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Sorted multiset of the three operation signatures of a grammar.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct CombinationKey(Vec<OperationSignature>);

impl CombinationKey {
    pub fn signatures(&self) -> &[OperationSignature] {
        &self.0
    }
}

impl fmt::Display for CombinationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

pub const COMBINATION_SIZE: usize = 3;

pub fn combination_key(g: &Grammar) -> Result<CombinationKey> {
    let mut sigs: Vec<OperationSignature> = g.functions().map(signature_of).collect();
    if sigs.len() != COMBINATION_SIZE {
        return Err(Error::WrongFunctionCount { found: sigs.len() });
    }
    sigs.sort();
    Ok(CombinationKey(sigs))
}
