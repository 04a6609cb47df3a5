#![allow(dead_code)]

pub mod cutoff;
pub mod nf;

use std::collections::BTreeSet;
use std::path::PathBuf;

use sprec::grammar::{parse_grammar, Grammar};
use sprec::spgraph::{canonicalize, parse_term, Label, SPGraph};

pub const REGULAR_FIXTURES: &[&str] = &["univ_ab", "ga", "gb", "gab", "paths", "ladders", "period3"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.spg"))
}

pub fn fixture(name: &str) -> Grammar {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    parse_grammar(&text).expect("fixture parses")
}

pub fn graph(t: &str) -> SPGraph {
    canonicalize(&parse_term(t).expect("term parses"))
}

pub fn sigma(labels: &[&str]) -> BTreeSet<Label> {
    labels.iter().map(|a| Label::new(a).unwrap()).collect()
}

/// Seeds of random grammars used by the cross-checks.
pub fn seeds(count: u64) -> impl Iterator<Item = u64> {
    (0..count).map(|i| 1000 + i)
}
