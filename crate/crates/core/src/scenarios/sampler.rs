use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::random_points;
use crate::error::{invalid, Result};
use crate::hyperspace::CompactSet;
use crate::metric_space::Space;
use std::sync::Arc;

/// Random finite subsets of a line with points drawn uniformly from given
/// closed ranges.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetSampler {
    pub ranges: Vec<(f64, f64)>,
    pub min_points: usize,
    pub max_points: usize,
    /// Put at least one point in every range.
    pub each_range: bool,
}

impl SetSampler {
    pub fn in_range(lo: f64, hi: f64) -> Self {
        SetSampler {
            ranges: vec![(lo, hi)],
            min_points: 1,
            max_points: 5,
            each_range: false,
        }
    }

    pub fn sample<R: Rng>(&self, space: &Arc<Space>, rng: &mut R) -> Result<CompactSet> {
        if self.ranges.is_empty() || self.min_points == 0 || self.max_points < self.min_points {
            return invalid("sampler needs ranges and 1 ≤ min_points ≤ max_points");
        }
        let n = rng.gen_range(self.min_points..=self.max_points);
        let mut raw = Vec::with_capacity(n + self.ranges.len());
        if self.each_range {
            for &(lo, hi) in &self.ranges {
                raw.push(rng.gen_range(lo..=hi));
            }
        }
        while raw.len() < n {
            let (lo, hi) = self.ranges[rng.gen_range(0..self.ranges.len())];
            raw.push(rng.gen_range(lo..=hi));
        }
        CompactSet::from_coords(space.clone(), 0.0, raw)
    }
}

/// A random finite set of `1..=max_points` points drawn uniformly from the
/// domain.
pub fn random_set<R: Rng>(space: &Arc<Space>, max_points: usize, rng: &mut R) -> Result<CompactSet> {
    if max_points == 0 {
        return invalid("max_points must be at least 1");
    }
    let n = rng.gen_range(1..=max_points);
    let mut raw = Vec::new();
    let mut tries = 0;
    while raw.len() < n * space.coord_len() && tries < 100 {
        tries += 1;
        for p in random_points(space, n, rng) {
            if raw.len() < n * space.coord_len() {
                raw.extend(p);
            }
        }
    }
    CompactSet::from_coords(space.clone(), 0.0, raw)
}

/// `count` pairs of random finite sets with at most `max_points` points
/// each, reproducible from `seed`.
pub fn random_pairs(
    space: &Arc<Space>,
    count: usize,
    max_points: usize,
    seed: u64,
) -> Result<Vec<(CompactSet, CompactSet)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Ok((random_set(space, max_points, &mut rng)?, random_set(space, max_points, &mut rng)?)))
        .collect()
}
