//! The four published episodes and their transcribed response distributions.
//!
//! Grammars are stored with two printed typos corrected; each correction and
//! every other transcription note is listed in [`ERRATA`].

use std::sync::Arc;
use std::sync::OnceLock;

use crate::episode::{read_episode, Episode};
use crate::eval::{read_run, RunRecord};
use crate::symbols::Alphabet;

#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub id: &'static str,
    pub episode_json: &'static str,
    pub run_json: &'static str,
    /// Episode success rate printed alongside the tables, in percent.
    pub reported_rate: Option<u32>,
}

impl Fixture {
    pub fn episode(&self) -> Episode {
        read_episode(self.episode_json, alphabet()).expect("built-in fixture parses")
    }

    pub fn run(&self) -> RunRecord {
        read_run(self.run_json).expect("built-in run parses")
    }
}

pub const FIXTURES: [Fixture; 4] = [
    Fixture {
        id: "133",
        episode_json: include_str!("../fixtures/episode_133.json"),
        run_json: include_str!("../fixtures/run_133.json"),
        reported_rate: Some(41),
    },
    Fixture {
        id: "1",
        episode_json: include_str!("../fixtures/episode_1.json"),
        run_json: include_str!("../fixtures/run_1.json"),
        reported_rate: None,
    },
    Fixture {
        id: "32",
        episode_json: include_str!("../fixtures/episode_32.json"),
        run_json: include_str!("../fixtures/run_32.json"),
        reported_rate: Some(52),
    },
    Fixture {
        id: "122",
        episode_json: include_str!("../fixtures/episode_122.json"),
        run_json: include_str!("../fixtures/run_122.json"),
        reported_rate: Some(54),
    },
];

pub fn all() -> &'static [Fixture] {
    &FIXTURES
}

pub fn get(id: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.id == id)
}

/// The published episodes use `blicket` in addition to the standard eight words.
pub fn alphabet() -> Arc<Alphabet> {
    static A: OnceLock<Arc<Alphabet>> = OnceLock::new();
    A.get_or_init(|| Arc::new(Alphabet::extended())).clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErratumKind {
    /// A printed rule that is not well formed.
    Rule,
    /// A printed target that no derivation produces.
    Target,
    /// A response distribution whose counts do not add up.
    Counts,
}

#[derive(Clone, Copy, Debug)]
pub struct Erratum {
    pub episode: &'static str,
    pub kind: ErratumKind,
    /// Query index for targets and counts, rule index for rules.
    pub index: usize,
    pub printed: &'static str,
    pub stored: &'static str,
    pub note: &'static str,
}

pub const ERRATA: [Erratum; 4] = [
    Erratum {
        episode: "1",
        kind: ErratumKind::Rule,
        index: 4,
        printed: "u1 gazzer -> x1 x1 x1",
        stored: "x1 gazzer -> x1 x1 x1",
        note: "right-hand slot unbound; the support pair `fep fep gazzer` needs a string slot",
    },
    Erratum {
        episode: "122",
        kind: ErratumKind::Rule,
        index: 5,
        printed: "x1 fep x1 -> x1 u1 u1 x1",
        stored: "u1 fep x2 -> x2 u1 u1 x2",
        note: "slot bound twice; stored rule is the one induction recovers from support plus targets",
    },
    Erratum {
        episode: "32",
        kind: ErratumKind::Target,
        index: 8,
        printed: "PURPLE PURPLE GREEN YELLOW YELLOW PURPLE",
        stored: "PURPLE PURPLE YELLOW YELLOW YELLOW PURPLE",
        note: "printed cell is not derivable; stored target is the canonical output",
    },
    Erratum {
        episode: "122",
        kind: ErratumKind::Counts,
        index: 9,
        printed: "6 counts for 5 listed outputs",
        stored: "one sample kept as the raw response `?`",
        note: "sample total restored to 10",
    },
];
