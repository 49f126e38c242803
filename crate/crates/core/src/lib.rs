//! Compositional transduction grammars over pseudoword inputs and color
//! outputs: interpretation, derivation enumeration, episode generation,
//! grammar induction from examples, and auditing of model responses.

pub mod derive;
pub mod episode;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod grammar;
pub mod induce;
pub mod signature;
pub mod symbols;
pub mod text;

pub use derive::{
    canonical_derivation, canonical_derive, enumerate_derivations, enumerate_outputs, is_translatable, yield_of,
    Derivation, ParsePolicy, ScanOrder, Span, SplitPreference,
};
pub use error::{CapKind, Error, Result};
pub use grammar::{
    validate_grammar, validate_with_shape, Assignment, FunctionRule, Grammar, GrammarShape, Rule, RuleShape, SlotKind,
    Violation, MAX_RHS_LEN,
};
pub use signature::{combination_key, signature_of, CombinationKey, OperationSignature};
pub use symbols::{colors, join, words, Alphabet, Caps, Color, InputSequence, OutputSequence, Word};
pub use text::{parse_grammar, parse_grammar_text, parse_rule, write_grammar};
pub use episode::{
    check_consistency, generate_episode, make_probe_queries, read_episode, revalidate, sample_episode, sample_grammar, write_episode, Episode,
    GenConfig, Pair, ProbeFamily, ProbeQuery, QueryPair,
};
pub use eval::{
    classify_error, classify_run, consistency_metrics, overlap_count, read_run, score_run, write_run, ErrorLabel,
    LabelKind, OverlapReport, Response, RunLabels, RunRecord, Score,
};
pub use induce::{
    identification_witness, induce_grammars, is_identifying, refine, Ambiguity, ContradictionReport, Hypothesis,
    Induction, Refinement, SearchBudget,
};
