//! The special instances: SMTs with a prescribed topology, tight-gap
//! instances, critical three-terminal SMTs in polygon norms, and the
//! Z-packed canonical form of Euclidean MSPTs.

pub mod critical;
pub mod sprout;
pub mod tight;
pub mod zpacked;

pub use sprout::{build_smt_with_topology, sprout, sprout_labeled, sprout_plan, topology_margin, SproutPlan, SproutStep};
pub use tight::{tight_instance, tight_instance_with, TightInstance, TightOptions};
pub use critical::{critical_smt3, critical_smt3_with, CriticalInstance, CRITICAL_INTEGER_PART, CRITICAL_MAX_TRIALS};
pub use zpacked::{canonicalize_zpacked, canonicalize_zpacked_with, ZPackOptions, ZPackStep, ZPackedTree};
