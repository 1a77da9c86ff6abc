use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RepeatWindow, REPEAT_WINDOW};
use crate::dynamics::{HyperspaceOperator, OperatorOrigin};
use crate::error::{invalid, Error, Result};
use crate::hyperspace::{collect_snapped, hausdorff_indexed, CompactSet};
use crate::index::NearestIndex;
use crate::metric_space::{normalize_angle, Exclusion, Space};

/// Grid of tolerances and budgets for [`probe_stability`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Orbit length `N` checked for each perturbed start.
    pub horizon: usize,
    /// Perturbed starts `M` drawn per `δ`.
    pub samples: usize,
    pub resolution: f64,
    pub seed: u64,
}

/// Draws finite sets `B` with `d_H(B, A) < δ` around a target set `A`: every
/// point of `A` is jittered by less than `δ/2`, a random subset is dropped,
/// extra jittered copies are added, and dropped points are restored where
/// needed to keep `A` covered.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSampler {
    /// Regions that perturbed points must stay out of. A zero radius
    /// excludes just the center.
    #[serde(default)]
    pub avoid: Vec<Exclusion>,
    pub drop_probability: f64,
    /// Extra points, as a fraction of `|A|` (at least one may be added).
    pub extra_fraction: f64,
}

impl Default for PerturbationSampler {
    fn default() -> Self {
        PerturbationSampler {
            avoid: Vec::new(),
            drop_probability: 0.3,
            extra_fraction: 0.25,
        }
    }
}

const JITTER_TRIES: usize = 64;

impl PerturbationSampler {
    pub fn avoiding(avoid: Vec<Exclusion>) -> Self {
        PerturbationSampler {
            avoid,
            ..Default::default()
        }
    }

    fn admissible(&self, space: &Space, p: &[f64]) -> bool {
        space.contains(p)
            && self.avoid.iter().all(|ex| {
                let d = space.dist(p, &ex.center);
                !(d < ex.radius || d == 0.0)
            })
    }

    /// A point within `r` of `p`, rejecting candidates outside the domain
    /// or inside an avoided region. Falls back to `p` itself.
    fn jitter<R: Rng>(&self, space: &Space, p: &[f64], r: f64, rng: &mut R, out: &mut Vec<f64>) {
        for _ in 0..JITTER_TRIES {
            let start = out.len();
            match space {
                Space::Circle => out.push(normalize_angle(p[0] + rng.gen_range(-r..r))),
                Space::Euclidean(_) => {
                    let s = r / (p.len() as f64).sqrt();
                    out.extend(p.iter().map(|c| c + rng.gen_range(-s..s)));
                }
                Space::Chebyshev(_) => out.extend(p.iter().map(|c| c + rng.gen_range(-r..r))),
            }
            if self.admissible(space, &out[start..]) {
                return;
            }
            out.truncate(start);
        }
        out.extend_from_slice(p);
    }

    pub fn sample<R: Rng>(&self, a: &CompactSet, delta: f64, rng: &mut R) -> Result<CompactSet> {
        if !(delta > 0.0) {
            return invalid("delta must be positive");
        }
        let space = a.space_arc();
        let r = 0.5 * delta;
        let n = a.len();
        let mut raw = Vec::with_capacity(a.raw().len() * 2);
        let mut dropped = Vec::new();
        for (i, p) in a.points().enumerate() {
            if rng.gen_bool(self.drop_probability) {
                dropped.push(i);
            } else {
                self.jitter(space, p, r, rng, &mut raw);
            }
        }
        let max_extra = ((n as f64 * self.extra_fraction).floor() as usize).max(1);
        let extra = rng.gen_range(0..=max_extra);
        let ids: Vec<usize> = (0..n).collect();
        for _ in 0..extra {
            let &i = ids.choose(rng).expect("nonempty set");
            self.jitter(space, a.point(i), r, rng, &mut raw);
        }
        if !raw.is_empty() {
            let b = collect_snapped(space, raw.clone(), 0.0)?;
            let index = NearestIndex::build(&b);
            for &i in &dropped {
                let p = a.point(i);
                if !(index.nearest_distance(p) < delta) {
                    self.jitter(space, p, r, rng, &mut raw);
                }
            }
        } else {
            for &i in &dropped {
                self.jitter(space, a.point(i), r, rng, &mut raw);
            }
        }
        let b = collect_snapped(space, raw, 0.0)?;
        let d = hausdorff_indexed(&b, a)?;
        if !(d < delta) {
            return Err(Error::InvalidArgument(format!(
                "perturbation drifted to d_H = {d} >= {delta}"
            )));
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRow {
    pub epsilon: f64,
    /// Largest grid `δ` for which every sampled orbit stayed within `ε`.
    pub delta: Option<f64>,
    pub horizon: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub delta: f64,
    /// `max_m max_{n ≤ N} d_H(F^n B_m, A)`, cut short once it passes the
    /// largest `ε`.
    pub worst_excursion: f64,
    pub worst_sample: usize,
    pub worst_step: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstabilityWitness {
    pub epsilon: f64,
    pub delta: f64,
    pub initial: CompactSet,
    /// `d_H(F^n B, A)` for `n = 0..=exit_step`.
    pub distances: Vec<f64>,
    pub exit_step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    StableOnEvidence,
    InstabilityWitness,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub operator: String,
    pub origin: OperatorOrigin,
    pub target_size: usize,
    pub rows: Vec<StabilityRow>,
    pub deltas: Vec<DeltaRow>,
    pub verdict: StabilityVerdict,
    pub witness: Option<InstabilityWitness>,
    pub assumptions: Vec<String>,
}

impl StabilityReport {
    /// `epsilon,delta,horizon,samples`, with `none` where no grid `δ` works.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,delta,horizon,samples\n");
        for r in &self.rows {
            let d = r.delta.map(|d| d.to_string()).unwrap_or_else(|| "none".into());
            s.push_str(&format!("{},{d},{},{}\n", r.epsilon, r.horizon, r.samples));
        }
        s
    }

    pub fn text_table(&self) -> String {
        let mut s = format!("{:>12} {:>12} {:>8} {:>8}\n", "epsilon", "delta", "horizon", "samples");
        for r in &self.rows {
            let d = r.delta.map(|d| format!("{d:12}")).unwrap_or_else(|| format!("{:>12}", "none"));
            s.push_str(&format!("{:12} {d} {:8} {:8}\n", r.epsilon, r.horizon, r.samples));
        }
        s.push_str(&format!("verdict: {:?}\n", self.verdict));
        if let Some(w) = &self.witness {
            s.push_str(&format!(
                "witness: eps={} delta={} d_H(B,A)={:.4e} exits at step {}\n",
                w.epsilon, w.delta, w.distances[0], w.exit_step
            ));
        }
        s
    }
}

struct Excursion {
    max: f64,
    argmax: usize,
}

/// Follows `F^n b` for `n ≤ horizon`, stopping once the distance to
/// `target` reaches `cap` or the orbit repeats exactly.
fn excursion(
    op: &dyn HyperspaceOperator,
    b: &CompactSet,
    target: &CompactSet,
    cap: f64,
    horizon: usize,
    h: f64,
    trace: Option<&mut Vec<f64>>,
) -> Result<Excursion> {
    let mut local = Vec::new();
    let trace = trace.unwrap_or(&mut local);
    let mut cur = b.clone();
    let mut d = hausdorff_indexed(&cur, target)?;
    trace.push(d);
    let mut ex = Excursion { max: d, argmax: 0 };
    let mut window = RepeatWindow::new(REPEAT_WINDOW);
    window.push(0, &cur);
    for n in 1..=horizon {
        if d >= cap {
            break;
        }
        cur = op.apply(&cur, h)?;
        d = hausdorff_indexed(&cur, target)?;
        trace.push(d);
        if d > ex.max {
            ex = Excursion { max: d, argmax: n };
        }
        if window.push(n, &cur).is_some() {
            break;
        }
    }
    Ok(ex)
}

fn sample_rng(seed: u64, di: usize, m: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((di as u64) << 32) | m as u64);
    rng
}

/// Estimates, for each `ε`, the largest grid `δ` such that every sampled
/// start within `δ` of `target` keeps its orbit within `ε` for `horizon`
/// steps. The same perturbed starts are reused across all `ε`.
pub fn probe_stability(
    op: &dyn HyperspaceOperator,
    target: &CompactSet,
    config: &StabilityConfig,
    sampler: &PerturbationSampler,
) -> Result<StabilityReport> {
    let c = config;
    if c.epsilons.is_empty() || c.deltas.is_empty() {
        return invalid("epsilon and delta grids must be nonempty");
    }
    if c.epsilons.iter().chain(&c.deltas).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return invalid("epsilon and delta values must be positive and finite");
    }
    let eps_min = c.epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
    let eps_max = c.epsilons.iter().cloned().fold(0.0, f64::max);
    if c.deltas.iter().any(|&d| d > eps_min) {
        return invalid("every delta must be at most the smallest epsilon");
    }
    if c.horizon == 0 || c.samples == 0 {
        return invalid("horizon and samples must be at least 1");
    }
    if !(0.0..1.0).contains(&sampler.drop_probability) {
        return invalid("drop probability must lie in [0, 1)");
    }
    let mut epsilons = c.epsilons.clone();
    epsilons.sort_by(f64::total_cmp);
    epsilons.dedup();
    let mut deltas = c.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    deltas.dedup();

    let jobs: Vec<(usize, usize)> = (0..deltas.len())
        .flat_map(|di| (0..c.samples).map(move |m| (di, m)))
        .collect();
    let outcomes: Vec<Excursion> = jobs
        .par_iter()
        .map(|&(di, m)| {
            let mut rng = sample_rng(c.seed, di, m);
            let b = sampler.sample(target, deltas[di], &mut rng)?;
            excursion(op, &b, target, eps_max, c.horizon, c.resolution, None)
        })
        .collect::<Result<_>>()?;
    let per_delta = |di: usize| &outcomes[di * c.samples..(di + 1) * c.samples];

    let delta_rows: Vec<DeltaRow> = deltas
        .iter()
        .enumerate()
        .map(|(di, &delta)| {
            let (worst_sample, w) = per_delta(di)
                .iter()
                .enumerate()
                .fold((0, &per_delta(di)[0]), |acc, (m, e)| if e.max > acc.1.max { (m, e) } else { acc });
            DeltaRow {
                delta,
                worst_excursion: w.max,
                worst_sample,
                worst_step: w.argmax,
            }
        })
        .collect();
    let rows: Vec<StabilityRow> = epsilons
        .iter()
        .map(|&eps| StabilityRow {
            epsilon: eps,
            delta: delta_rows.iter().find(|r| r.worst_excursion < eps).map(|r| r.delta),
            horizon: c.horizon,
            samples: c.samples,
        })
        .collect();

    let failing = rows.iter().find(|r| r.delta.is_none());
    let witness = match failing {
        None => None,
        Some(row) => {
            let di = deltas.len() - 1;
            let m = per_delta(di)
                .iter()
                .position(|e| e.max >= row.epsilon)
                .expect("a failing row has a failing sample at every delta");
            let mut rng = sample_rng(c.seed, di, m);
            let initial = sampler.sample(target, deltas[di], &mut rng)?;
            let mut distances = Vec::new();
            excursion(op, &initial, target, row.epsilon, c.horizon, c.resolution, Some(&mut distances))?;
            Some(InstabilityWitness {
                epsilon: row.epsilon,
                delta: deltas[di],
                exit_step: distances.len() - 1,
                initial,
                distances,
            })
        }
    };

    let mut assumptions = vec![
        "continuity of the operator is assumed, not checked".to_string(),
        format!(
            "evidence covers {} sampled starts per delta over {} steps at resolution {}",
            c.samples, c.horizon, c.resolution
        ),
    ];
    if op.origin() == OperatorOrigin::SetLevel {
        assumptions.push("set-level operator: monotonicity under inclusion is not assumed".into());
    }
    Ok(StabilityReport {
        operator: op.name(),
        origin: op.origin(),
        target_size: target.len(),
        verdict: if witness.is_some() {
            StabilityVerdict::InstabilityWitness
        } else {
            StabilityVerdict::StableOnEvidence
        },
        rows,
        deltas: delta_rows,
        witness,
        assumptions,
    })
}
