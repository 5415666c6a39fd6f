//! Greedy maximization of a set function under a cardinality budget.
//!
//! Each round evaluates the marginal gain of every unselected element and
//! adds the best one. There is no lazy evaluation: the objectives handled
//! here are not submodular, so stale gains are not upper bounds.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Schedule;

/// Gains within this absolute distance of the best are treated as ties and
/// resolved towards the smallest index.
pub const TIE_TOL: f64 = 1e-12;

/// Gains below `−MONOTONICITY_TOL · max(1, scale)` abort the run.
pub const MONOTONICITY_TOL: f64 = 1e-9;

/// A set function over the ground set `{0, …, ground_size() − 1}`.
pub trait SetFunction: Sync {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &Schedule) -> f64;

    /// `f(base ∪ {ω}) − f(base)` for each candidate, in candidate order.
    /// Implementations may evaluate candidates concurrently.
    fn gains(&self, base: &Schedule, candidates: &[usize]) -> Vec<f64> {
        let base_value = self.value(base);
        candidates
            .par_iter()
            .map(|&omega| self.value(&base.with(omega)) - base_value)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep {
    pub chosen: usize,
    pub gain: f64,
    /// Objective after adding `chosen`, relative to `f(∅)`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    pub schedule: Schedule,
}

impl GreedyTrace {
    pub fn gains(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.gain).collect()
    }

    /// The schedule after the first `d` selections. Greedy runs are nested,
    /// so this equals the result of a run with budget `d`.
    pub fn prefix(&self, d: usize) -> Schedule {
        let mut s = Schedule::empty();
        for step in self.steps.iter().take(d) {
            s = s.with(step.chosen);
        }
        s
    }
}

/// Index of the largest value, preferring the earliest index among values
/// within [`TIE_TOL`] of the maximum.
fn argmax_first(values: &[f64]) -> Option<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v >= best - TIE_TOL)
}

/// Runs `min(d, N)` greedy rounds.
pub fn greedy_schedule<F: SetFunction + ?Sized>(f: &F, d: usize) -> Result<GreedyTrace> {
    let ground = f.ground_size();
    let rounds = d.min(ground);
    let mut schedule = Schedule::empty();
    let mut steps = Vec::with_capacity(rounds);
    let mut value = 0.0_f64;

    for _ in 0..rounds {
        let candidates: Vec<usize> = (0..ground).filter(|w| !schedule.contains(*w)).collect();
        let gains = f.gains(&schedule, &candidates);
        let best = argmax_first(&gains).expect("at least one candidate remains");
        let (chosen, gain) = (candidates[best], gains[best]);

        let scale = value.abs().max(1.0);
        if gain < -MONOTONICITY_TOL * scale {
            return Err(Error::Monotonicity {
                omega: chosen,
                gain,
            });
        }
        schedule = schedule.with(chosen);
        value += gain;
        steps.push(GreedyStep {
            chosen,
            gain,
            value,
        });
    }
    Ok(GreedyTrace { steps, schedule })
}
