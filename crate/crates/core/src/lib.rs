//! Dynamics in the hyperspace of compact sets.
//!
//! Compact subsets of a bounded metric space are approximated by finite,
//! canonically ordered nets ([`CompactSet`]). On top of that the crate
//! provides the Hausdorff metric (several algorithms), multivalued maps and
//! their Hutchinson operators, attractor search, basin classification, an
//! ε–δ stability probe, non-contraction witnesses and a contraction-metric
//! probe, plus a catalog of reference scenarios.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod hyperspace;
pub mod index;
pub mod metric_space;
pub mod render;
pub mod report;
pub mod scenarios;

pub use dynamics::{
    evaluate, hutchinson_apply, iterate, Branch, HyperspaceOperator, LeafMap, MultiMap,
    OperatorOrigin, Orbit, Trajectory,
};
pub use error::{Error, Result};
pub use hyperspace::{
    dilation_covers, directed_hausdorff, directed_hausdorff_indexed, hausdorff,
    hausdorff_bisection, hausdorff_indexed, snap_to_grid, CompactSet,
};
pub use metric_space::{grid_net, Exclusion, MetricKind, Point, Space};
