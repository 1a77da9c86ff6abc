use serde::Serialize;

use super::{RepeatWindow, REPEAT_WINDOW};
use crate::dynamics::HyperspaceOperator;
use crate::error::{invalid, Result};
use crate::hyperspace::{hausdorff_indexed, CompactSet};

/// Number of consecutive small residuals required before declaring
/// convergence.
const SETTLE_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AttractorStatus {
    Converged,
    MaxIterations,
    CycleDetected { period: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractorReport {
    pub attractor: CompactSet,
    /// Last residual `d_H(A_{n-1}, A_n)`.
    pub residual: f64,
    pub steps: usize,
    pub converged: bool,
    pub status: AttractorStatus,
    /// `d_H(F(A_n), A_n)` for the returned set.
    pub fixed_point_defect: f64,
    pub residuals: Vec<f64>,
    pub resolution: f64,
    pub operator: String,
}

impl AttractorReport {
    pub fn text_table(&self) -> String {
        let status = match &self.status {
            AttractorStatus::Converged => "converged".to_string(),
            AttractorStatus::MaxIterations => "max iterations".to_string(),
            AttractorStatus::CycleDetected { period } => format!("cycle (period {period})"),
        };
        format!(
            "operator          {}\nstatus            {status}\nsteps             {}\npoints            {}\nresidual          {:.6e}\nfixed-point defect {:.6e}\nresolution        {}\n",
            self.operator,
            self.steps,
            self.attractor.len(),
            self.residual,
            self.fixed_point_defect,
            self.resolution
        )
    }
}

/// Iterates `op` from `b0` until `SETTLE_STEPS` consecutive residuals are at
/// most `tol`, an exact repeat of an earlier set shows up, or `n_max` steps
/// have been taken.
pub fn find_attractor(
    op: &dyn HyperspaceOperator,
    b0: &CompactSet,
    tol: f64,
    n_max: usize,
    h: f64,
) -> Result<AttractorReport> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    if n_max == 0 {
        return invalid("n_max must be at least 1");
    }
    let mut window = RepeatWindow::new(REPEAT_WINDOW);
    window.push(0, b0);
    let mut cur = b0.clone();
    let mut residuals = Vec::new();
    let mut small = 0;
    let mut status = AttractorStatus::MaxIterations;
    for step in 1..=n_max {
        let next = op.apply(&cur, h)?;
        let r = hausdorff_indexed(&cur, &next)?;
        residuals.push(r);
        cur = next;
        if r <= tol {
            small += 1;
            if small >= SETTLE_STEPS {
                status = AttractorStatus::Converged;
                break;
            }
        } else {
            small = 0;
        }
        if let Some(period) = window.push(step, &cur) {
            if r > tol {
                status = AttractorStatus::CycleDetected { period };
                break;
            }
        }
    }
    let fixed_point_defect = hausdorff_indexed(&op.apply(&cur, h)?, &cur)?;
    Ok(AttractorReport {
        residual: *residuals.last().expect("at least one step"),
        steps: residuals.len(),
        converged: status == AttractorStatus::Converged,
        status,
        fixed_point_defect,
        residuals,
        resolution: h,
        operator: op.name(),
        attractor: cur,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dynamics::{Branch, MultiMap};
    use crate::metric_space::{Point, Space};

    #[test]
    fn identity_converges_immediately() {
        let s = Arc::new(Space::interval(0.0, 1.0).unwrap());
        let m = MultiMap::new(s.clone(), vec![Branch::Identity]).unwrap();
        let b0 = CompactSet::singleton(s, Point::scalar(0.3).unwrap()).unwrap();
        let rep = find_attractor(&m, &b0, 1e-9, 10, 0.0).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.steps, 3);
        assert_eq!(rep.fixed_point_defect, 0.0);
    }

    #[test]
    fn swap_is_a_two_cycle() {
        let s = Arc::new(Space::interval(0.0, 1.0).unwrap());
        let m = MultiMap::new(s.clone(), vec![Branch::scale(-1.0, 1.0)]).unwrap();
        let b0 = CompactSet::singleton(s, Point::scalar(0.25).unwrap()).unwrap();
        let rep = find_attractor(&m, &b0, 1e-6, 100, 0.0).unwrap();
        assert_eq!(rep.status, AttractorStatus::CycleDetected { period: 2 });
        assert!(!rep.converged);
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = Arc::new(Space::interval(0.0, 1.0).unwrap());
        let m = MultiMap::new(s.clone(), vec![Branch::Identity]).unwrap();
        let b0 = CompactSet::singleton(s, Point::scalar(0.3).unwrap()).unwrap();
        assert!(find_attractor(&m, &b0, 0.0, 10, 0.0).is_err());
        assert!(find_attractor(&m, &b0, 1e-3, 0, 0.0).is_err());
    }
}
