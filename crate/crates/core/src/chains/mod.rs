//! Stage-bounded norm accounting, almost norm-maximizing children, chain partitions and chain
//! limits.

mod bounds;
mod limit;
mod partition;
mod source;

pub use bounds::{node_bounds, q_value, stage_bounds, BoundsReport, NodeBounds, StageBounds};
pub use limit::{chain_limit, ChainLimit, LimitStatus};
pub use partition::{find_anm_child, partition_chains, AnmChild, Chain, ChainBudget, ChainPartition};
pub use source::{dyadic_fixture, DisintegrationSource, FiniteSource, FnSource};
