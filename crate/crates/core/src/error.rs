use thiserror::Error;

use crate::grammar::Violation;
use crate::symbols::{Color, Word};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("unknown word `{0}`")]
    UnknownWord(Word),

    #[error("unknown color `{0}`")]
    UnknownColor(Color),

    #[error("rule syntax error at column {column}: {message}")]
    RuleSyntax { column: usize, message: String },

    #[error("invalid grammar: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGrammar(Vec<Violation>),

    #[error("expected exactly 3 function rules, found {found}")]
    WrongFunctionCount { found: usize },

    #[error("`{input}` is not translatable")]
    NotTranslatable { input: String },

    #[error("{kind} length {actual} exceeds cap {limit}")]
    CapExceeded {
        kind: CapKind,
        limit: usize,
        actual: usize,
    },

    #[error("alphabet too small: need {needed} {what}, have {available}")]
    AlphabetTooSmall {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("generation exhausted: {0}")]
    GenerationExhausted(String),

    #[error("probe template inapplicable: {0}")]
    TemplateInapplicable(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{section} pair {index} (`{input}`) expects `{expected}` but the grammar derives `{actual}`")]
    Consistency {
        section: &'static str,
        index: usize,
        input: String,
        expected: String,
        actual: String,
    },

    #[error("search budget exhausted after {expansions} expansions")]
    BudgetExhausted { expansions: u64 },

    #[error("run does not match episode: {0}")]
    QueryMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapKind {
    Input,
    Output,
}

impl std::fmt::Display for CapKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CapKind::Input => f.write_str("input"),
            CapKind::Output => f.write_str("output"),
        }
    }
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidAlphabet(_) => "InvalidAlphabet",
            Error::UnknownWord(_) => "UnknownWord",
            Error::UnknownColor(_) => "UnknownColor",
            Error::RuleSyntax { .. } => "RuleSyntax",
            Error::InvalidGrammar(_) => "InvalidGrammar",
            Error::WrongFunctionCount { .. } => "WrongFunctionCount",
            Error::NotTranslatable { .. } => "NotTranslatable",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::AlphabetTooSmall { .. } => "AlphabetTooSmall",
            Error::GenerationExhausted(_) => "GenerationExhausted",
            Error::TemplateInapplicable(_) => "TemplateInapplicable",
            Error::Parse { .. } => "ParseError",
            Error::Consistency { .. } => "ConsistencyError",
            Error::BudgetExhausted { .. } => "BudgetExhausted",
            Error::QueryMismatch(_) => "QueryMismatch",
            Error::Config(_) => "InvalidConfig",
        }
    }
}
