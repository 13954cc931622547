mod common;

use proptest::prelude::*;
use seqopt::space::PartialAssignment;
use seqopt::DesignVector;

/// Nested-loop oracle: odometer over the given positions, last position fastest.
fn nested(cards: &[usize], base: &[u16], group: &[usize]) -> Vec<DesignVector> {
    let mut out = Vec::new();
    let total: usize = group.iter().map(|&g| cards[g]).product();
    for mut k in 0..total {
        let mut v = base.to_vec();
        for &g in group.iter().rev() {
            v[g] = (k % cards[g]) as u16;
            k /= cards[g];
        }
        out.push(DesignVector::new(v));
    }
    out
}

proptest! {
    #[test]
    fn full_enumeration_matches_nested_loops(seed in any::<u64>()) {
        let space = common::random_space(seed, 3000);
        let cards = space.cardinalities();
        let all: Vec<usize> = (0..cards.len()).collect();
        let got: Vec<DesignVector> = space.enumerate_all().collect();
        prop_assert_eq!(got.len() as u128, space.combination_count());
        prop_assert_eq!(got, nested(&cards, &vec![0; cards.len()], &all));
    }

    #[test]
    fn stage_enumeration_keeps_fixed_values(seed in any::<u64>(), mask in any::<u8>()) {
        let space = common::random_space(seed, 3000);
        let cards = space.cardinalities();
        let group: Vec<usize> = (0..cards.len()).filter(|i| mask & (1 << i) != 0).collect();
        prop_assume!(!group.is_empty());
        let base: Vec<u16> = cards.iter().map(|&m| (m - 1) as u16).collect();
        let fixed = PartialAssignment::from_vector_except(&DesignVector::new(base.clone()), &group);
        let got: Vec<DesignVector> = space.enumerate_stage(&group, &fixed).unwrap().collect();
        prop_assert_eq!(got.len() as u128, space.group_count(&group));
        prop_assert_eq!(got, nested(&cards, &base, &group));
    }
}
