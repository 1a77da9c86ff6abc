//! Numerical diagnostics for hyperspace operators: attractor search, basin
//! labelling, stability probing, non-contraction witnesses and the truncated
//! sup-metric probe.

mod attractor;
mod basins;
mod janos;
mod stability;
mod witness;

pub use attractor::{find_attractor, AttractorReport, AttractorStatus};
pub use basins::{basin_csv, classify_basins, BasinLabel, BasinOutcome};
pub use janos::{janos_metric_probe, JanosDiagnosis, JanosPair, JanosVerdict};
pub use stability::{
    probe_stability, DeltaRow, InstabilityWitness, PerturbationSampler, StabilityConfig,
    StabilityReport, StabilityRow, StabilityVerdict,
};
pub use witness::{find_noncontraction_witness, Witness};

use std::collections::VecDeque;

use crate::hyperspace::CompactSet;

/// Sliding window of recent sets, used to spot exact repeats of snapped
/// orbits.
pub(crate) struct RepeatWindow {
    cap: usize,
    recent: VecDeque<(u64, usize, CompactSet)>,
}

impl RepeatWindow {
    pub(crate) fn new(cap: usize) -> Self {
        RepeatWindow {
            cap,
            recent: VecDeque::with_capacity(cap),
        }
    }

    /// Records `set` as the state at `step`; returns the period if it equals
    /// a set already in the window.
    pub(crate) fn push(&mut self, step: usize, set: &CompactSet) -> Option<usize> {
        let h = set.content_hash();
        let hit = self
            .recent
            .iter()
            .rev()
            .find(|(hh, _, s)| *hh == h && s == set)
            .map(|(_, k, _)| step - k);
        if self.recent.len() == self.cap {
            self.recent.pop_front();
        }
        self.recent.push_back((h, step, set.clone()));
        hit
    }
}

pub(crate) const REPEAT_WINDOW: usize = 20;
