#![allow(dead_code)]

use seqopt::seed::splitmix64;
use seqopt::{DesignSpace, ElementTag, FieldTag, VariableSpec};

const ELEMENTS: [ElementTag; 4] = [
    ElementTag::Geometry,
    ElementTag::Fabric,
    ElementTag::Hvac,
    ElementTag::Controls,
];
const FIELDS: [FieldTag; 2] = [FieldTag::Architecture, FieldTag::Engineering];

/// Seeded space with 3..=7 variables of 1..=6 options and at most `max` combinations.
pub fn random_space(seed: u64, max: u128) -> DesignSpace {
    let mut s = seed;
    let mut next = move || {
        s = splitmix64(s);
        s
    };
    loop {
        let n = 3 + (next() % 5) as usize;
        let vars: Vec<VariableSpec> = (0..n)
            .map(|i| {
                let m = 1 + (next() % 6) as usize;
                VariableSpec::new(
                    format!("v{i}"),
                    (0..m).map(|o| format!("o{o}")),
                    ELEMENTS[(next() % 4) as usize],
                    FIELDS[(next() % 2) as usize],
                )
            })
            .collect();
        let space = DesignSpace::new(vars).unwrap();
        if space.combination_count() <= max && space.combination_count() >= 8 {
            return space;
        }
    }
}
