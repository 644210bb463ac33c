mod common;

use bnpsched::{price, reduced_cost, PredecessorSets};
use common::{enumerate_min_reduced_cost, pricing_case};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn dp_minimum_matches_enumeration(seed in any::<u64>()) {
        let (inst, duals, horizon) = pricing_case(seed);
        let out = price(&inst, &PredecessorSets::unrestricted(&inst), &duals, horizon);
        let oracle = enumerate_min_reduced_cost(&inst, &duals, horizon);
        if oracle.is_finite() {
            prop_assert!((out.min - oracle).abs() <= 1e-9, "dp {} oracle {}", out.min, oracle);
        } else {
            prop_assert!(out.min.is_infinite() && out.argmin.is_none());
        }
    }

    #[test]
    fn argmin_schedule_has_the_minimum_reduced_cost(seed in any::<u64>()) {
        let (inst, duals, horizon) = pricing_case(seed);
        let out = price(&inst, &PredecessorSets::unrestricted(&inst), &duals, horizon);
        if let Some((k, j, t)) = out.argmin {
            let seq = out.table.backtrack(&inst, k, j, t);
            let col = bnpsched::evaluate(&inst, k, &seq).unwrap();
            prop_assert_eq!(col.makespan(), t as u64);
            prop_assert!((reduced_cost(&col, &duals) - out.min).abs() <= 1e-9);
        }
    }
}
