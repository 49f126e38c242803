//! Input words, output colors and the alphabet they are drawn from.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A pseudoword of the input language.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(String);

/// An output color token.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Color(String);

macro_rules! symbol_impls {
    ($ty:ident) => {
        impl $ty {
            pub fn new(s: impl Into<String>) -> Self {
                $ty(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl AsRef<str> for $ty {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $ty {
            fn from(s: &str) -> Self {
                $ty(s.to_string())
            }
        }
    };
}

symbol_impls!(Word);
symbol_impls!(Color);

pub type InputSequence = Vec<Word>;
pub type OutputSequence = Vec<Color>;

/// Parse a whitespace separated list of words.
pub fn words(s: &str) -> InputSequence {
    s.split_whitespace().map(Word::from).collect()
}

/// Parse a whitespace separated list of colors.
pub fn colors(s: &str) -> OutputSequence {
    s.split_whitespace().map(Color::from).collect()
}

pub fn join<T: fmt::Display>(seq: &[T]) -> String {
    let mut out = String::new();
    for (i, t) in seq.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t.to_string());
    }
    out
}

/// Productivity caps on sequence length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub input: usize,
    pub output: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            input: 10,
            output: 8,
        }
    }
}

pub const DEFAULT_WORDS: [&str; 8] = ["dax", "fep", "gazzer", "kiki", "lug", "tufa", "wif", "zup"];
pub const DEFAULT_COLORS: [&str; 6] = ["RED", "BLUE", "GREEN", "YELLOW", "PURPLE", "PINK"];

/// The ordered input word set and color set every sequence draws from.
///
/// Words and colors are addressed internally by their position, so both sets
/// are limited to 255 entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    words: Vec<Word>,
    colors: Vec<Color>,
}

impl Alphabet {
    pub fn new(words: Vec<Word>, colors: Vec<Color>) -> Result<Self> {
        if words.is_empty() || colors.is_empty() {
            return Err(Error::InvalidAlphabet("word and color sets must be non-empty".into()));
        }
        if words.len() > 255 || colors.len() > 255 {
            return Err(Error::InvalidAlphabet("at most 255 words and 255 colors".into()));
        }
        for (i, w) in words.iter().enumerate() {
            if words[..i].contains(w) {
                return Err(Error::InvalidAlphabet(format!("duplicate word `{w}`")));
            }
            if w.as_str().split_whitespace().count() != 1 {
                return Err(Error::InvalidAlphabet(format!("word `{w}` is not a single token")));
            }
        }
        for (i, c) in colors.iter().enumerate() {
            if colors[..i].contains(c) {
                return Err(Error::InvalidAlphabet(format!("duplicate color `{c}`")));
            }
            if words.iter().any(|w| w.as_str() == c.as_str()) {
                return Err(Error::InvalidAlphabet(format!("`{c}` is both a word and a color")));
            }
        }
        Ok(Alphabet { words, colors })
    }

    /// The eight pseudowords used for generated episodes plus six colors.
    pub fn standard() -> Self {
        Alphabet {
            words: DEFAULT_WORDS.iter().map(|&w| Word::from(w)).collect(),
            colors: DEFAULT_COLORS.iter().map(|&c| Color::from(c)).collect(),
        }
    }

    /// The standard alphabet plus `blicket`; the published episodes draw
    /// their words from these nine.
    pub fn extended() -> Self {
        let mut a = Self::standard();
        a.words.push(Word::from("blicket"));
        a
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn word_index(&self, w: &Word) -> Option<u8> {
        self.words.iter().position(|x| x == w).map(|i| i as u8)
    }

    pub fn color_index(&self, c: &Color) -> Option<u8> {
        self.colors.iter().position(|x| x == c).map(|i| i as u8)
    }

    pub fn word(&self, i: u8) -> &Word {
        &self.words[i as usize]
    }

    pub fn color(&self, i: u8) -> &Color {
        &self.colors[i as usize]
    }

    pub fn encode_input(&self, seq: &[Word]) -> Result<Vec<u8>> {
        seq.iter()
            .map(|w| self.word_index(w).ok_or_else(|| Error::UnknownWord(w.clone())))
            .collect()
    }

    /// Encodes colors; `None` when some token is not a color of this alphabet.
    pub fn encode_output(&self, seq: &[Color]) -> Option<Vec<u8>> {
        seq.iter().map(|c| self.color_index(c)).collect()
    }

    pub fn decode_output(&self, seq: &[u8]) -> OutputSequence {
        seq.iter().map(|&c| self.color(c).clone()).collect()
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::standard()
    }
}
