use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{evaluate, random_points, MultiMap};
use crate::error::{invalid, Result};
use crate::hyperspace::hausdorff;
use crate::metric_space::{normalize_angle, Point, Space};

/// A pair of points whose images are not pulled together:
/// `d_H(F(x), F(x')) ≥ ratio · d(x, x')`.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub x: Point,
    pub x_prime: Point,
    pub point_distance: f64,
    pub image_distance: f64,
    pub ratio: f64,
}

const STEPS: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

fn nudge<R: Rng>(space: &Space, x: &[f64], eta: f64, rng: &mut R) -> Vec<f64> {
    match space {
        Space::Circle => {
            let s = if rng.gen_bool(0.5) { eta } else { -eta };
            vec![normalize_angle(x[0] + s)]
        }
        _ => {
            let dir: Vec<f64> = x.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            x.iter().zip(&dir).map(|(c, d)| c + eta * d / norm).collect()
        }
    }
}

/// Searches for a pair with expansion ratio at least `target`, mixing
/// nearby pairs `x' = x + η·u` over a ladder of `η` with independent random
/// pairs. Returns the best pair found if it reaches `target`.
pub fn find_noncontraction_witness(
    map: &MultiMap,
    trials: usize,
    target: f64,
    seed: u64,
) -> Result<Option<Witness>> {
    if !(target > 0.0) || !target.is_finite() {
        return invalid("target ratio must be positive");
    }
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let space = map.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Witness> = None;
    let mut done = 0;
    while done < trials {
        let xs = random_points(space, 2, &mut rng);
        if xs.len() < 2 {
            continue;
        }
        done += 1;
        let x = &xs[0];
        let y = if done % 2 == 1 {
            let eta = STEPS[(done / 2) % STEPS.len()];
            let y = nudge(space, x, eta, &mut rng);
            if !space.in_domain(&Point::new(y.clone())?) {
                continue;
            }
            y
        } else {
            xs[1].clone()
        };
        let d = space.dist(x, &y);
        if !(d > 0.0) {
            continue;
        }
        let (px, py) = (Point::new(x.clone())?, Point::new(y)?);
        let img = hausdorff(&evaluate(map, &px)?, &evaluate(map, &py)?)?;
        let ratio = img / d;
        if best.as_ref().map_or(true, |b| ratio > b.ratio) {
            best = Some(Witness {
                x: px,
                x_prime: py,
                point_distance: d,
                image_distance: img,
                ratio,
            });
        }
    }
    Ok(best.filter(|w| w.ratio >= target))
}
