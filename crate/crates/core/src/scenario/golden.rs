//! Scenario files shipped with the library.

use super::ast::Document;
use super::parse;

macro_rules! golden {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../scenarios/", $name, ".hq")))),*]
    };
}

/// `(name, source)` for every shipped scenario.
pub const GOLDEN: &[(&str, &str)] = golden!(
    "entangler",
    "mach-zehnder",
    "teleportation",
    "teleportation-00",
    "teleportation-01",
    "teleportation-10",
    "teleportation-11",
    "three-box-a",
    "three-box-b",
    "three-box-full",
    "three-box-full-frame",
);

pub fn golden_source(name: &str) -> Option<&'static str> {
    GOLDEN.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Every shipped scenario, parsed and checked.
pub fn golden_scenarios() -> Vec<(&'static str, Document)> {
    GOLDEN
        .iter()
        .map(|(name, src)| {
            let doc = parse(src).unwrap_or_else(|e| panic!("golden scenario {name} is invalid: {e:?}"));
            (*name, doc)
        })
        .collect()
}
