use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::find_attractor;
use crate::dynamics::HyperspaceOperator;
use crate::error::{invalid, Result};
use crate::hyperspace::{hausdorff_indexed, CompactSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasinLabel {
    /// Index into the candidate list.
    Attractor(usize),
    /// The orbit did not settle within the iteration budget.
    Divergent,
    /// The orbit settled, but not within `tol` of exactly one candidate.
    Ambiguous,
}

impl fmt::Display for BasinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasinLabel::Attractor(i) => write!(f, "{i}"),
            BasinLabel::Divergent => f.write_str("divergent"),
            BasinLabel::Ambiguous => f.write_str("ambiguous"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BasinOutcome {
    pub label: BasinLabel,
    pub steps: usize,
    pub fixed_point_defect: f64,
    /// `d_H` from the settled set to each candidate.
    pub distances: Vec<f64>,
}

/// Runs every sample to its limit and labels it by the candidate attractor
/// it lands within `tol` of.
pub fn classify_basins(
    op: &dyn HyperspaceOperator,
    candidates: &[CompactSet],
    samples: &[CompactSet],
    tol: f64,
    n_max: usize,
    h: f64,
) -> Result<Vec<BasinOutcome>> {
    if candidates.is_empty() {
        return invalid("at least one candidate attractor is required");
    }
    samples
        .par_iter()
        .map(|b| {
            let rep = find_attractor(op, b, tol, n_max, h)?;
            if !rep.converged {
                return Ok(BasinOutcome {
                    label: BasinLabel::Divergent,
                    steps: rep.steps,
                    fixed_point_defect: rep.fixed_point_defect,
                    distances: Vec::new(),
                });
            }
            let distances = candidates
                .iter()
                .map(|c| hausdorff_indexed(&rep.attractor, c))
                .collect::<Result<Vec<_>>>()?;
            let hits: Vec<usize> = (0..distances.len()).filter(|&i| distances[i] <= tol).collect();
            let label = match hits.as_slice() {
                [i] => BasinLabel::Attractor(*i),
                _ => BasinLabel::Ambiguous,
            };
            Ok(BasinOutcome {
                label,
                steps: rep.steps,
                fixed_point_defect: rep.fixed_point_defect,
                distances,
            })
        })
        .collect()
}

/// `index,label,steps` rows.
pub fn basin_csv(outcomes: &[BasinOutcome]) -> String {
    let mut s = String::from("index,label,steps\n");
    for (i, o) in outcomes.iter().enumerate() {
        s.push_str(&format!("{i},{},{}\n", o.label, o.steps));
    }
    s
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dynamics::{Branch, MultiMap};
    use crate::metric_space::{Point, Space};

    #[test]
    fn contraction_sends_everything_to_its_fixed_point() {
        let s = Arc::new(Space::interval(0.0, 1.0).unwrap());
        let m = MultiMap::new(s.clone(), vec![Branch::scale(0.5, 0.0)]).unwrap();
        let zero = CompactSet::singleton(s.clone(), Point::scalar(0.0).unwrap()).unwrap();
        let one = CompactSet::singleton(s.clone(), Point::scalar(1.0).unwrap()).unwrap();
        let samples = vec![
            CompactSet::singleton(s.clone(), Point::scalar(0.9).unwrap()).unwrap(),
            CompactSet::singleton(s, Point::scalar(0.1).unwrap()).unwrap(),
        ];
        let out = classify_basins(&m, &[zero, one], &samples, 1e-4, 200, 1e-5).unwrap();
        assert!(out.iter().all(|o| o.label == BasinLabel::Attractor(0)));
        assert!(basin_csv(&out).starts_with("index,label,steps\n0,0,"));
    }

    #[test]
    fn non_settling_orbits_are_divergent() {
        let s = Arc::new(Space::interval(0.0, 1.0).unwrap());
        let m = MultiMap::new(s.clone(), vec![Branch::scale(-1.0, 1.0)]).unwrap();
        let c = CompactSet::singleton(s.clone(), Point::scalar(0.5).unwrap()).unwrap();
        let b = CompactSet::singleton(s, Point::scalar(0.2).unwrap()).unwrap();
        let out = classify_basins(&m, &[c], &[b], 1e-6, 50, 0.0).unwrap();
        assert_eq!(out[0].label, BasinLabel::Divergent);
        assert!(classify_basins(&m, &[], &[], 1e-6, 50, 0.0).is_err());
    }
}
