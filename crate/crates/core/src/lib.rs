//! # bnpsched
//!
//! Scheduling jobs on unrelated parallel machines with sequence- and
//! machine-dependent setup times, machine eligibility, and a total weighted
//! completion time objective.
//!
//! The main solver is a lazy depth-first branch-and-price heuristic: each
//! node's linear relaxation over machine schedules is solved by column
//! generation with an exact dynamic-programming pricer, the search dives on
//! the deepest node, and it stops at the first integral relaxation. The
//! bound left on the active list at that point certifies how far the
//! answer can be from optimal.
//!
//! ```
//! use bnpsched::{generate, sched, solve_dfs, verify, GenConfig, SearchParams};
//!
//! let inst = generate(&GenConfig::standard(20, 4, 7)).unwrap();
//! let result = solve_dfs(&inst, &SearchParams::default()).unwrap();
//! assert_eq!(verify(&inst, &result.incumbent), Ok(result.objective));
//! assert!(result.lower_bound <= result.objective as f64);
//! assert!(result.objective <= sched(&inst).objective());
//! ```
//!
//! The `book/` directory next to the crates walks through the model and
//! each algorithm; its code listings are compiled as doctests of this crate.

pub mod baseline;
pub mod colgen;
pub mod column;
pub mod instance;
pub mod lp;
pub mod metrics;
pub mod pricing;
pub mod tree;

pub use baseline::{brute_force, brute_force_capped, sched};
pub use colgen::{solve_relaxation, ColGenParams, PhaseTimes, RelaxationResult, RelaxationStatus};
pub use column::{evaluate, reduced_cost, satisfies, verify, Column, FullSolution, Violation};
pub use instance::{generate, horizon, validate, GenConfig, Instance, InstanceError, JobId, MachineId};
pub use metrics::{amdahl, amdahl_limit, gap_lb, gap_sched, GapReport, SpeedupRecord};
pub use pricing::{extract_columns, price, DualPrices, PredecessorSets, Pricer, PricingOutcome, PricingTable};
pub use tree::{
    branch, flows, is_integer, select_edge, solve_dfs, solve_dfs_observed, solve_dfs_pool, Edge, FlowMatrix, Node,
    NodeConstraints, SearchError, SearchParams, SearchResult,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/column-generation.md")]
    mod column_generation {}
    #[doc = include_str!("../../../book/src/pricing.md")]
    mod pricing {}
    #[doc = include_str!("../../../book/src/branching.md")]
    mod branching {}
    #[doc = include_str!("../../../book/src/parallel.md")]
    mod parallel {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
}
