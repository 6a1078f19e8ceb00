mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use saneat::neat::{compatibility_distance, CompatCoefficients, Genome, NetworkShape};

/// Aligns genes as sets keyed by innovation number.
fn oracle(a: &Genome, b: &Genome, c: CompatCoefficients) -> f64 {
    let wa: BTreeMap<u64, f64> = a.connections().iter().map(|g| (g.innovation, g.weight)).collect();
    let wb: BTreeMap<u64, f64> = b.connections().iter().map(|g| (g.innovation, g.weight)).collect();
    let ka: BTreeSet<u64> = wa.keys().copied().collect();
    let kb: BTreeSet<u64> = wb.keys().copied().collect();
    let unmatched = ka.symmetric_difference(&kb).count();
    let shared: Vec<u64> = ka.intersection(&kb).copied().collect();
    let mut sum = 0.0;
    for i in &shared {
        sum += (wa[i] - wb[i]).abs();
    }
    let mean = if shared.is_empty() { 0.0 } else { sum / shared.len() as f64 };
    c.c1 * unmatched as f64 + c.c2 * mean
}

#[test]
fn hand_computed_pair() {
    let a: Genome = "genome 3 2\nnode 0 input\nnode 1 bias\nnode 2 output\nconn 0 0 2 1.0 1\nconn 1 1 2 -1.0 1\n"
        .parse()
        .unwrap();
    let b: Genome = "genome 4 4\nnode 0 input\nnode 1 bias\nnode 2 output\nnode 3 hidden\n\
                     conn 0 0 2 0.5 1\nconn 1 1 2 -1.0 0\nconn 2 0 3 1.0 1\nconn 3 3 2 1.0 1\n"
        .parse()
        .unwrap();
    // two unmatched genes, matching weight gaps 0.5 and 0.0
    assert_eq!(compatibility_distance(&a, &b, CompatCoefficients::default()), 2.25);
    assert_eq!(compatibility_distance(&a, &b, CompatCoefficients { c1: 0.5, c2: 2.0 }), 1.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_set_oracle(seed in any::<u64>(), c1 in 0.0f64..3.0, c2 in 0.0f64..3.0) {
        let c = CompatCoefficients { c1, c2 };
        let g = common::family(seed, NetworkShape::new(3, 2), 12, 6);
        for a in &g {
            for b in &g {
                prop_assert_eq!(compatibility_distance(a, b, c), oracle(a, b, c));
            }
        }
    }

    #[test]
    fn symmetric_and_zero_on_self(seed in any::<u64>()) {
        let c = CompatCoefficients::default();
        let g = common::family(seed, NetworkShape::new(2, 1), 10, 8);
        for a in &g {
            prop_assert_eq!(compatibility_distance(a, a, c), 0.0);
            for b in &g {
                prop_assert_eq!(compatibility_distance(a, b, c), compatibility_distance(b, a, c));
                prop_assert!(compatibility_distance(a, b, c) >= 0.0);
            }
        }
    }
}
