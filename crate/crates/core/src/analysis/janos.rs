use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::HyperspaceOperator;
use crate::error::{invalid, Result};
use crate::hyperspace::{hausdorff_indexed, CompactSet};

/// The truncated sup-metric `D_c^N(A, B) = max_{0≤k≤N} c^{-k} d_H(F^k A,
/// F^k B)` evaluated at horizons `N` and `2N` for one pair.
#[derive(Debug, Clone, Serialize)]
pub struct JanosPair {
    pub value: f64,
    pub argmax: usize,
    pub value_doubled: f64,
    pub argmax_doubled: usize,
    /// `d_H(F^k A, F^k B)` for `k = 0..=2N`.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JanosVerdict {
    /// Maxima are attained early and do not move when `N` doubles.
    Geometric,
    NonGeometric,
}

#[derive(Debug, Clone, Serialize)]
pub struct JanosDiagnosis {
    pub c: f64,
    pub horizon: usize,
    /// Distances at or below this are treated as unresolved by the lattice
    /// and left out of the maximum (except at `k = 0`).
    pub resolution_floor: f64,
    pub pairs: Vec<JanosPair>,
    pub verdict: JanosVerdict,
}

impl JanosDiagnosis {
    pub fn text_table(&self) -> String {
        let mut s = format!(
            "c = {}, N = {}, floor = {:.3e}, verdict {:?}\n{:>5} {:>14} {:>7} {:>14} {:>7}\n",
            self.c, self.horizon, self.resolution_floor, self.verdict, "pair", "D(N)", "k*", "D(2N)", "k*"
        );
        for (i, p) in self.pairs.iter().enumerate() {
            s.push_str(&format!(
                "{i:5} {:14.6e} {:7} {:14.6e} {:7}\n",
                p.value, p.argmax, p.value_doubled, p.argmax_doubled
            ));
        }
        s
    }
}

fn truncated_max(d: &[f64], c: f64, n: usize, floor: f64) -> (f64, usize) {
    let mut best = (d[0], 0);
    let mut w = 1.0;
    for (k, &dk) in d.iter().enumerate().take(n + 1).skip(1) {
        w /= c;
        if dk > floor {
            let v = w * dk;
            if v > best.0 {
                best = (v, k);
            }
        }
    }
    best
}

/// Evaluates the truncated sup-metric on each pair at horizons `n` and
/// `2n`. The verdict is geometric when every maximiser sits below `n/2` and
/// the value is unchanged by doubling the horizon.
pub fn janos_metric_probe(
    op: &dyn HyperspaceOperator,
    c: f64,
    pairs: &[(CompactSet, CompactSet)],
    n: usize,
    h: f64,
) -> Result<JanosDiagnosis> {
    if !(c > 0.0 && c < 1.0) {
        return invalid("c must lie in (0, 1)");
    }
    if n == 0 || pairs.is_empty() {
        return invalid("horizon and pair list must be nonempty");
    }
    let dim = op.space().dimension() as f64;
    let floor = 2.0 * h * dim.sqrt();
    let out: Vec<JanosPair> = pairs
        .par_iter()
        .map(|(a, b)| {
            let (mut a, mut b) = (a.clone(), b.clone());
            let mut distances = Vec::with_capacity(2 * n + 1);
            distances.push(hausdorff_indexed(&a, &b)?);
            for _ in 0..2 * n {
                a = op.apply(&a, h)?;
                b = op.apply(&b, h)?;
                distances.push(hausdorff_indexed(&a, &b)?);
            }
            let (value, argmax) = truncated_max(&distances, c, n, floor);
            let (value_doubled, argmax_doubled) = truncated_max(&distances, c, 2 * n, floor);
            Ok(JanosPair {
                value,
                argmax,
                value_doubled,
                argmax_doubled,
                distances,
            })
        })
        .collect::<Result<_>>()?;
    let geometric = out
        .iter()
        .all(|p| 2 * p.argmax < n && p.value_doubled <= p.value * (1.0 + 1e-9));
    Ok(JanosDiagnosis {
        c,
        horizon: n,
        resolution_floor: floor,
        pairs: out,
        verdict: if geometric {
            JanosVerdict::Geometric
        } else {
            JanosVerdict::NonGeometric
        },
    })
}
