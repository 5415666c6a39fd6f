//! Comparison policies: best of `k` uniformly random schedules, and
//! actuating during the first `d` instants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lqr_cost::CostModel;
use crate::model::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Greedy,
    RandomBest,
    FirstD,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Greedy => "greedy",
            Policy::RandomBest => "random_best",
            Policy::FirstD => "first_d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyResult {
    pub policy: Policy,
    pub schedule: Schedule,
    pub cost: f64,
    pub objective: f64,
    pub trials: usize,
    pub seed: Option<u64>,
}

/// RNG for trial `index` of a run seeded with `seed`. Each trial owns a
/// ChaCha stream, so results do not depend on evaluation order.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A uniformly random `d`-subset of `{0, …, horizon − 1}` by partial
/// Fisher–Yates.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, horizon: usize, d: usize) -> Schedule {
    let d = d.min(horizon);
    let mut pool: Vec<usize> = (0..horizon).collect();
    for i in 0..d {
        let j = rng.random_range(i..horizon);
        pool.swap(i, j);
    }
    pool.truncate(d);
    Schedule::new(pool, horizon).expect("distinct indices below the horizon")
}

/// Draws `trials` random `d`-subsets and keeps the cheapest one (earliest
/// trial on exact ties).
pub fn random_best(cm: &CostModel, d: usize, trials: usize, seed: u64) -> Result<PolicyResult> {
    if trials == 0 {
        return Err(Error::Config("random baseline needs at least one trial".into()));
    }
    let horizon = cm.horizon();
    let (schedule, cost) = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = random_subset(&mut trial_rng(seed, t), horizon, d);
            let j = cm.cost(&s);
            (t, s, j)
        })
        .reduce_with(|a, b| match a.2.total_cmp(&b.2) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal => {
                if a.0 <= b.0 {
                    a
                } else {
                    b
                }
            }
        })
        .map(|(_, s, j)| (s, j))
        .expect("trials ≥ 1");
    Ok(PolicyResult {
        policy: Policy::RandomBest,
        objective: cm.empty_cost() - cost,
        schedule,
        cost,
        trials,
        seed: Some(seed),
    })
}

/// Actuate at `0, …, d − 1`.
pub fn first_d(cm: &CostModel, d: usize) -> PolicyResult {
    let schedule = Schedule::first(d.min(cm.horizon()));
    let cost = cm.cost(&schedule);
    PolicyResult {
        policy: Policy::FirstD,
        objective: cm.empty_cost() - cost,
        schedule,
        cost,
        trials: 1,
        seed: None,
    }
}

#[cfg(test)]
mod tests {
    use nalgebra::{DMatrix, DVector};

    use super::*;
    use crate::lifted::build_lifted;
    use crate::model::{InitialCondition, Instance};

    fn unit_scalar(horizon: usize) -> CostModel {
        let inst = Instance::time_invariant(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            InitialCondition::State(DVector::from_element(1, 1.0)),
            horizon,
            1,
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        CostModel::new(&build_lifted(&inst).unwrap(), &inst)
    }

    #[test]
    fn random_subsets_are_valid_and_reproducible() {
        for t in 0..50 {
            let a = random_subset(&mut trial_rng(7, t), 10, 4);
            let b = random_subset(&mut trial_rng(7, t), 10, 4);
            assert_eq!(a, b);
            assert_eq!(a.len(), 4);
            assert!(a.span() <= 10);
        }
    }

    #[test]
    fn single_trial_matches_its_draw() {
        let cm = unit_scalar(6);
        let drawn = random_subset(&mut trial_rng(11, 0), 6, 2);
        let res = random_best(&cm, 2, 1, 11).unwrap();
        assert_eq!(res.schedule, drawn);
        assert_eq!(res.cost, cm.cost(&drawn));
    }

    #[test]
    fn full_budget_always_draws_everything() {
        let cm = unit_scalar(4);
        let res = random_best(&cm, 4, 10, 3).unwrap();
        assert_eq!(res.schedule, Schedule::full(4));
        assert_eq!(res.cost, cm.cost(&Schedule::full(4)));
        assert_eq!(first_d(&cm, 4).schedule, Schedule::full(4));
    }

    #[test]
    fn first_d_prefix() {
        let cm = unit_scalar(50);
        assert_eq!(first_d(&cm, 3).schedule.indices(), &[0, 1, 2]);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(random_best(&unit_scalar(2), 1, 0, 0).is_err());
    }

    #[test]
    fn best_of_more_trials_is_never_worse() {
        let cm = unit_scalar(8);
        let mut prev = f64::INFINITY;
        for trials in [1, 2, 5, 10, 40] {
            let j = random_best(&cm, 3, trials, 99).unwrap().cost;
            assert!(j <= prev);
            prev = j;
        }
    }
}
