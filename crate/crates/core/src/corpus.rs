//! The calculus files shipped in `corpus/`.

use crate::error::Result;
use crate::schema::Calculus;

/// A shipped calculus: its short name and file text.
#[derive(Debug, Clone, Copy)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub file: &'static str,
    pub text: &'static str,
}

macro_rules! entry {
    ($name:literal) => {
        CorpusEntry {
            name: $name,
            file: concat!("corpus/", $name, ".pts"),
            text: include_str!(concat!("../corpus/", $name, ".pts")),
        }
    };
}

pub const ENTRIES: &[CorpusEntry] = &[
    entry!("ipl"),
    entry!("cpl"),
    entry!("s4"),
    entry!("s4-frame"),
    entry!("s5"),
    entry!("s5-frame"),
    entry!("tonk"),
    entry!("ipl-tonk"),
    entry!("top"),
    entry!("ipl-times"),
    entry!("ipl-T-t"),
];

pub fn entry(name: &str) -> Option<&'static CorpusEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

/// Parses the named corpus calculus. Panics on an unknown name.
pub fn load(name: &str) -> Result<Calculus> {
    let e = entry(name).unwrap_or_else(|| panic!("no corpus entry `{name}`"));
    Calculus::parse(e.text)
}
