//! Condorcet-consistent participatory budgeting.
//!
//! Voters rank budget items (linear orders, ordered partitions with ties,
//! partial orders, or quantity-aware partitions). Those ballots are lifted to
//! preferences over whole budgets, and the Smith-consistent budgeting
//! algorithm picks a budget from the Smith set of the budgets graph without
//! ever enumerating it: rank items by iterated Schwartz sets of the majority
//! graph, then prune the ranking against the limit.
//!
//! ```
//! use dembudget::{sba, LinearOrder, Profile, Proposal, PruningOptions};
//!
//! let p = Proposal::unit([("a", 1), ("b", 2), ("c", 4)]).unwrap();
//! let profile = Profile::new(vec![
//!     LinearOrder::new(&p, ["a", "b", "c"]).unwrap().into(),
//!     LinearOrder::new(&p, ["c", "a", "b"]).unwrap().into(),
//! ])
//! .unwrap();
//! let b = sba::sba(&p, &profile, 3, &p.empty_budget(), PruningOptions::default()).unwrap();
//! assert_eq!(p.selected_ids(&b), ["a", "b"]);
//! ```

pub mod ballot;
pub mod election;
pub mod error;
pub mod format;
pub mod hierarchy;
pub mod majority;
pub mod model;
pub mod oracle;
pub mod sba;

pub use ballot::{Ballot, LinearOrder, OrderedPartition, PartialOrder, Profile};
pub use election::{Election, HierarchyOutcome};
pub use error::{Error, Result};
pub use format::{emit_budget, load_election, parse_election, to_canonical_json, ElectionFile};
pub use majority::{build_majority_graph, Digraph, MajorityGraph, VertexKey};
pub use model::{Budget, CostFunction, Item, ItemId, Mode, Proposal};
pub use sba::{Outcome, PruningOptions, RankedPartition, TieBreakPolicy};
