//! Reference scenarios: classic contractive IFS baselines and small
//! constructions that exercise attractors, basins, stability and
//! non-contractivity.

mod catalog;
mod interval;
mod sampler;

pub use catalog::{build_scenario, custom_scenario, rotation_angle, scenario_names, Scenario, ScenarioDefaults, ScenarioOperator};
pub use interval::{
    g_map, interval_embed, interval_net, leaf_coordinates, leaf_index, leaf_point,
    projective_translate, q_retraction, IntervalPoint, IntervalShiftOperator, POLE,
};
pub use sampler::{random_pairs, random_set, SetSampler};
