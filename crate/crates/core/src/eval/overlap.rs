use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::Result;
use crate::grammar::Grammar;
use crate::signature::{combination_key, CombinationKey};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapReport {
    /// Validation grammars whose key occurs in the training pool.
    pub k: usize,
    pub n: usize,
    /// Per validation grammar: its key, and whether training contains it.
    pub keys: Vec<(CombinationKey, bool)>,
}

/// Counts validation grammars whose combination of operations already
/// occurs somewhere in the training pool.
pub fn overlap_count(train: &[Grammar], val: &[Grammar]) -> Result<OverlapReport> {
    let seen: BTreeSet<CombinationKey> = train.iter().map(combination_key).collect::<Result<_>>()?;
    let keys: Vec<(CombinationKey, bool)> = val
        .iter()
        .map(|g| combination_key(g).map(|k| {
            let hit = seen.contains(&k);
            (k, hit)
        }))
        .collect::<Result<_>>()?;
    Ok(OverlapReport {
        k: keys.iter().filter(|(_, hit)| *hit).count(),
        n: keys.len(),
        keys,
    })
}
