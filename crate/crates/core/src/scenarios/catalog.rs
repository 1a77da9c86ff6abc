use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::interval::{interval_net, IntervalPoint, IntervalShiftOperator};
use super::sampler::SetSampler;
use crate::analysis::PerturbationSampler;
use crate::dynamics::{Branch, HyperspaceOperator, MultiMap};
use crate::error::{Error, Result};
use crate::hyperspace::CompactSet;
use crate::metric_space::{grid_net, Exclusion, Point, Space};

/// Either a Hutchinson operator of a multivalued map, or an operator that
/// is only defined on whole sets.
#[derive(Clone)]
pub enum ScenarioOperator {
    Map(MultiMap),
    SetLevel(Arc<dyn HyperspaceOperator>),
}

impl ScenarioOperator {
    pub fn as_operator(&self) -> &dyn HyperspaceOperator {
        match self {
            ScenarioOperator::Map(m) => m,
            ScenarioOperator::SetLevel(op) => op.as_ref(),
        }
    }

    pub fn multimap(&self) -> Option<&MultiMap> {
        match self {
            ScenarioOperator::Map(m) => Some(m),
            ScenarioOperator::SetLevel(_) => None,
        }
    }
}

/// Run parameters a scenario ships with; the CLI may override them.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioDefaults {
    pub h: f64,
    pub tol: f64,
    pub n_max: usize,
    pub horizon: usize,
    pub samples: usize,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub basin_samples: usize,
    pub basin_n_max: usize,
    pub witness_trials: usize,
    pub witness_target: f64,
    pub janos_c: f64,
    pub janos_horizon: usize,
    pub janos_h: f64,
    pub janos_pairs: usize,
}

#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub space: Arc<Space>,
    pub operator: ScenarioOperator,
    /// Starting set for the attractor search.
    pub start: CompactSet,
    pub expected_attractors: Vec<CompactSet>,
    /// `basin_samplers[i]` draws sets expected to land on
    /// `expected_attractors[i]`.
    pub basin_samplers: Vec<SetSampler>,
    /// Set to probe for stability; `None` means the attractor found from
    /// `start`.
    pub stability_target: Option<CompactSet>,
    pub perturbation: PerturbationSampler,
    /// Whether the stability probe is expected to find no instability.
    pub expect_stable: bool,
    /// Largest branch Lipschitz constant when it is below one.
    pub contraction_ratio: Option<f64>,
    /// A found attractor matches an expected one when `d_H` is at most this.
    pub attractor_tolerance: f64,
    /// Whether a pair with expansion ratio at least the witness target
    /// should exist. `None` for operators without a point map.
    pub expect_witness: Option<bool>,
    /// Expected verdict of the truncated sup-metric probe.
    pub expect_geometric: Option<bool>,
    pub defaults: ScenarioDefaults,
    pub notes: String,
}

impl Scenario {
    pub fn operator(&self) -> &dyn HyperspaceOperator {
        self.operator.as_operator()
    }

    /// `per_class` sets from each basin sampler, tagged with the index of
    /// the attractor they are expected to reach. Reproducible from `seed`.
    pub fn draw_basin_samples(&self, per_class: usize, seed: u64) -> Result<Vec<(usize, CompactSet)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(per_class * self.basin_samplers.len());
        for (class, sampler) in self.basin_samplers.iter().enumerate() {
            for _ in 0..per_class {
                out.push((class, sampler.sample(&self.space, &mut rng)?));
            }
        }
        Ok(out)
    }
}

/// A scenario around a user-supplied map. Starts from the lattice net of
/// the whole domain unless `start` is given.
pub fn custom_scenario(space: Space, branches: Vec<Branch>, start: Option<CompactSet>) -> Result<Scenario> {
    let space = Arc::new(space);
    let map = MultiMap::new(space.clone(), branches)?;
    let defaults = base_defaults(if space.dimension() == 1 { 1e-3 } else { 1e-2 });
    let start = match start {
        Some(s) => s,
        None => grid_net(&space, defaults.h)?,
    };
    Ok(Scenario {
        name: "custom".into(),
        start,
        expected_attractors: vec![],
        basin_samplers: vec![],
        stability_target: None,
        perturbation: PerturbationSampler::default(),
        expect_stable: true,
        contraction_ratio: map.lipschitz_bound().filter(|l| *l < 1.0),
        attractor_tolerance: defaults.tol,
        expect_witness: None,
        expect_geometric: None,
        operator: ScenarioOperator::Map(map),
        space,
        defaults,
        notes: "user-supplied multivalued map".into(),
    })
}

const NAMES: [&str; 5] = ["cantor", "sierpinski", "cube-root", "circle-rotation", "interval-g"];

pub fn scenario_names() -> &'static [&'static str] {
    &NAMES
}

pub fn build_scenario(name: &str) -> Result<Scenario> {
    match name {
        "cantor" => cantor(),
        "sierpinski" => sierpinski(),
        "cube-root" => cube_root(),
        "circle-rotation" => circle_rotation(),
        "interval-g" => interval_g(),
        other => Err(Error::NotFound(format!("no scenario named {other:?}"))),
    }
}

fn base_defaults(h: f64) -> ScenarioDefaults {
    ScenarioDefaults {
        h,
        tol: 1e-3,
        n_max: 200,
        horizon: 500,
        samples: 50,
        epsilons: vec![0.05, 0.1, 0.2],
        deltas: vec![0.05, 0.02, 0.01],
        basin_samples: 0,
        basin_n_max: 50,
        witness_trials: 10_000,
        witness_target: 0.999,
        janos_c: 0.5,
        janos_horizon: 16,
        janos_h: h,
        janos_pairs: 20,
    }
}

fn singleton(space: &Arc<Space>, coords: Vec<f64>) -> Result<CompactSet> {
    CompactSet::singleton(space.clone(), Point::new(coords)?)
}

/// Endpoints of the `2^level` intervals of the level-`level` middle-thirds
/// construction.
pub(crate) fn cantor_prefractal(space: &Arc<Space>, level: u32) -> Result<CompactSet> {
    let denom = 3u64.pow(level);
    let mut raw = Vec::with_capacity(2usize << level);
    for code in 0..(1u64 << level) {
        let mut num = 0u64;
        for i in 0..level {
            if code >> (level - 1 - i) & 1 == 1 {
                num += 2 * 3u64.pow(level - 1 - i);
            }
        }
        raw.push(num as f64 / denom as f64);
        raw.push((num + 1) as f64 / denom as f64);
    }
    CompactSet::from_coords(space.clone(), 0.0, raw)
}

fn cantor() -> Result<Scenario> {
    let space = Arc::new(Space::interval(0.0, 1.0)?);
    let map = MultiMap::new(
        space.clone(),
        vec![Branch::scale(1.0 / 3.0, 0.0), Branch::scale(1.0 / 3.0, 2.0 / 3.0)],
    )?;
    let mut defaults = base_defaults(1e-4);
    defaults.n_max = 100;
    defaults.witness_target = 0.9;
    defaults.janos_h = 1e-5;
    Ok(Scenario {
        name: "cantor".into(),
        start: grid_net(&space, defaults.h)?,
        expected_attractors: vec![cantor_prefractal(&space, 8)?],
        basin_samplers: vec![SetSampler::in_range(0.0, 1.0)],
        stability_target: None,
        perturbation: PerturbationSampler::default(),
        expect_stable: true,
        contraction_ratio: map.lipschitz_bound(),
        attractor_tolerance: 2e-3,
        expect_witness: Some(false),
        expect_geometric: Some(true),
        operator: ScenarioOperator::Map(map),
        space,
        defaults,
        notes: "Middle-thirds IFS x/3, x/3 + 2/3 on [0,1]. Both branches contract at 1/3, so the \
                Hutchinson operator contracts d_H at 1/3 and its attractor, the Cantor set, is \
                globally attracting and stable. The expected attractor is the set of endpoints \
                of the level-8 construction."
            .into(),
    })
}

fn sierpinski() -> Result<Scenario> {
    let space = Arc::new(Space::euclidean(vec![0.0, 0.0], vec![1.0, 1.0])?);
    let top = (0.5, 3f64.sqrt() / 2.0);
    let half = |ox: f64, oy: f64| Branch::Affine {
        matrix: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
        offset: vec![ox, oy],
    };
    let map = MultiMap::new(
        space.clone(),
        vec![half(0.0, 0.0), half(0.5, 0.0), half(0.5 * top.0, 0.5 * top.1)],
    )?;
    let mut defaults = base_defaults(2e-3);
    defaults.n_max = 60;
    defaults.samples = 4;
    defaults.horizon = 50;
    defaults.deltas = vec![0.05, 0.01];
    defaults.janos_c = 0.7;
    defaults.janos_horizon = 8;
    defaults.janos_pairs = 5;
    defaults.witness_target = 0.9;
    Ok(Scenario {
        name: "sierpinski".into(),
        start: singleton(&space, vec![0.0, 0.0])?,
        expected_attractors: vec![],
        basin_samplers: vec![],
        stability_target: None,
        perturbation: PerturbationSampler::default(),
        expect_stable: true,
        contraction_ratio: map.lipschitz_bound(),
        attractor_tolerance: 1e-2,
        expect_witness: Some(false),
        expect_geometric: Some(true),
        operator: ScenarioOperator::Map(map),
        space,
        defaults,
        notes: "Three halving maps toward the corners (0,0), (1,0), (1/2, √3/2) of an \
                equilateral triangle in the unit square. A contractive IFS whose attractor is \
                the Sierpinski gasket."
            .into(),
    })
}

fn cube_root() -> Result<Scenario> {
    let space = Arc::new(Space::interval(-1.0, 1.0)?);
    let map = MultiMap::new(space.clone(), vec![Branch::Power { exponent: 1.0 / 3.0 }])?;
    let mu = 1e-3;
    let mut defaults = base_defaults(1e-4);
    defaults.tol = 1e-4;
    defaults.n_max = 50;
    defaults.basin_samples = 100;
    defaults.janos_c = 0.9;
    let minus = singleton(&space, vec![-1.0])?;
    let plus = singleton(&space, vec![1.0])?;
    let both = minus.union(&plus)?;
    Ok(Scenario {
        name: "cube-root".into(),
        start: singleton(&space, vec![-0.5])?,
        expected_attractors: vec![minus, plus, both.clone()],
        basin_samplers: vec![
            SetSampler::in_range(-1.0, -mu),
            SetSampler::in_range(mu, 1.0),
            SetSampler {
                ranges: vec![(-1.0, -mu), (mu, 1.0)],
                min_points: 2,
                max_points: 6,
                each_range: true,
            },
        ],
        stability_target: Some(both),
        perturbation: PerturbationSampler::avoiding(vec![Exclusion::ball(vec![0.0], 0.05)]),
        expect_stable: true,
        contraction_ratio: None,
        attractor_tolerance: 1e-3,
        expect_witness: Some(true),
        expect_geometric: None,
        operator: ScenarioOperator::Map(map),
        space,
        defaults,
        notes: "x ↦ x^(1/3) (sign preserving) on [-1,1]. The fixed sets {-1}, {1} and {-1,1} \
                are attractors with basins: sets inside [-1,0), sets inside (0,1], and sets \
                meeting both sides while avoiding 0. Basin samples keep a margin of 1e-3 from \
                the fixed point 0."
            .into(),
    })
}

/// Rotation angle `π(√5 − 1)`; `α/π` is irrational.
pub fn rotation_angle() -> f64 {
    PI * (5f64.sqrt() - 1.0)
}

fn circle_rotation() -> Result<Scenario> {
    let space = Arc::new(Space::circle());
    let map = MultiMap::new(
        space.clone(),
        vec![Branch::Identity, Branch::Rotation { angle: rotation_angle() }],
    )?;
    let mut defaults = base_defaults(0.01);
    defaults.tol = 1e-3;
    defaults.n_max = 2000;
    defaults.horizon = 200;
    defaults.samples = 10;
    defaults.janos_c = 0.9;
    defaults.janos_horizon = 64;
    defaults.janos_h = 0.0;
    defaults.janos_pairs = 5;
    let full = grid_net(&space, defaults.h)?;
    Ok(Scenario {
        name: "circle-rotation".into(),
        start: singleton(&space, vec![0.0])?,
        expected_attractors: vec![full.clone()],
        basin_samplers: vec![],
        stability_target: Some(full),
        perturbation: PerturbationSampler::default(),
        expect_stable: true,
        contraction_ratio: None,
        attractor_tolerance: 0.02,
        expect_witness: Some(true),
        expect_geometric: Some(false),
        operator: ScenarioOperator::Map(map),
        space,
        defaults,
        notes: "x ↦ {x, x + α} on the unit circle with chord metric, α = π(√5 − 1). Orbits of \
                any point are dense, so every nonempty set is attracted to the whole circle. \
                Rotation is an isometry, so the operator is not a contraction for any metric \
                induced by the circle's metric."
            .into(),
    })
}

fn interval_g() -> Result<Scenario> {
    let op = IntervalShiftOperator::new();
    let space = op.space().clone();
    let mut defaults = base_defaults(0.01);
    defaults.n_max = 2000;
    defaults.epsilons = vec![0.2];
    defaults.tol = 1e-5;
    let full = grid_net(&space, defaults.h)?;
    Ok(Scenario {
        name: "interval-g".into(),
        start: interval_net(&space, IntervalPoint { a: 0.3, b: 0.6 }, defaults.h)?,
        expected_attractors: vec![full.clone()],
        basin_samplers: vec![],
        stability_target: Some(full),
        perturbation: PerturbationSampler::default(),
        expect_stable: false,
        contraction_ratio: None,
        attractor_tolerance: 0.02,
        expect_witness: None,
        expect_geometric: None,
        operator: ScenarioOperator::SetLevel(Arc::new(op)),
        space,
        defaults,
        notes: "F = G∘Q on compact subsets of [0,1]. Q replaces a set by its enclosing interval, \
                an interval [a,b] is the point (a,b) of the triangle 0 ≤ a ≤ b ≤ 1, and G moves \
                points along a foliation of the triangle by triangular loops through [0,1], \
                conjugate on each loop to x ↦ x + 1 on the projective line. Every orbit tends \
                to [0,1], but intervals just past [0,1] on a large loop travel far away first, \
                so [0,1] is attracting and not stable. F is defined on whole sets and is not \
                the Hutchinson operator of any multivalued map. The loops are boundaries of \
                triangles with corners [0,1], (α(1+α)/2, 1−α(1−α)/2) and its mirror image, \
                parameterised by arc length."
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_complete() {
        for name in scenario_names() {
            let s = build_scenario(name).unwrap();
            assert_eq!(&s.name, name);
            for a in &s.expected_attractors {
                assert!(a.points().all(|p| s.space.contains(p)));
            }
        }
        assert!(matches!(build_scenario("nope"), Err(Error::NotFound(_))));
    }

    #[test]
    fn cube_root_expectations() {
        let s = build_scenario("cube-root").unwrap();
        let raw: Vec<Vec<f64>> = s.expected_attractors.iter().map(|a| a.raw().to_vec()).collect();
        assert_eq!(raw, vec![vec![-1.0], vec![1.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn cantor_ratio_and_prefractal() {
        let s = build_scenario("cantor").unwrap();
        assert!((s.contraction_ratio.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let c = &s.expected_attractors[0];
        assert_eq!(c.len(), 512);
        assert_eq!(c.raw()[1], 1.0 / 6561.0);
        assert!(matches!(s.operator, ScenarioOperator::Map(_)));
        let g = build_scenario("interval-g").unwrap();
        assert!(g.operator.multimap().is_none());
    }
}
