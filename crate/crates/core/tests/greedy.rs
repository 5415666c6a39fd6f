mod common;

use rand::seq::SliceRandom;
use sparse_lqr::baselines::{first_d, random_best, trial_rng};
use sparse_lqr::guarantees::approximation_factor;
use sparse_lqr::{
    brute_force_optimum, build_lifted, certificate, exact_metrics, greedy_schedule, CostModel,
    Schedule, SetFunction,
};

use common::{seeded_instance, unit_scalar};

fn model(inst: &sparse_lqr::Instance) -> CostModel {
    CostModel::new(&build_lifted(inst).unwrap(), inst)
}

/// Evaluates candidates one at a time in a shuffled order.
struct Shuffled<'a> {
    inner: &'a CostModel,
    seed: u64,
}

impl SetFunction for Shuffled<'_> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn value(&self, set: &Schedule) -> f64 {
        self.inner.value(set)
    }

    fn gains(&self, base: &Schedule, candidates: &[usize]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.shuffle(&mut trial_rng(self.seed, base.len() as u64));
        let mut out = vec![0.0; candidates.len()];
        for i in order {
            out[i] = self.inner.marginal_gain(base, candidates[i]).unwrap();
        }
        out
    }
}

/// Plain sequential greedy on `J`, smallest index on exact ties.
fn naive_greedy(cm: &CostModel, d: usize) -> Schedule {
    let mut s = Schedule::empty();
    for _ in 0..d.min(cm.horizon()) {
        let mut best: Option<(usize, f64)> = None;
        for w in (0..cm.horizon()).filter(|w| !s.contains(*w)) {
            let j = cm.cost(&s.with(w));
            if best.is_none_or(|(_, bj)| j < bj - 1e-12) {
                best = Some((w, j));
            }
        }
        s = s.with(best.unwrap().0);
    }
    s
}

#[test]
fn two_step_scalar_picks_first_instant() {
    let cm = model(&unit_scalar(2, 1));
    let trace = greedy_schedule(&cm, 1).unwrap();
    assert_eq!(trace.schedule.indices(), &[0]);
    assert!((trace.steps[0].gain - 4.0 / 3.0).abs() < 1e-14);
    let (opt, value) = brute_force_optimum(&cm, 1).unwrap();
    assert_eq!(opt.indices(), &[0]);
    assert!((value - 4.0 / 3.0).abs() < 1e-14);
}

#[test]
fn matches_naive_greedy_and_shuffled_evaluation() {
    for i in 0..40 {
        let inst = seeded_instance(51, i, 3, 2, 1..=8);
        let cm = model(&inst);
        let d = inst.budget();
        let trace = greedy_schedule(&cm, d).unwrap();
        assert_eq!(trace.schedule, naive_greedy(&cm, d));
        let shuffled = greedy_schedule(&Shuffled { inner: &cm, seed: i }, d).unwrap();
        assert_eq!(shuffled.schedule, trace.schedule);
        assert_eq!(trace.schedule.len(), d);
        for k in 0..=d {
            assert_eq!(greedy_schedule(&cm, k).unwrap().schedule, trace.prefix(k));
        }
    }
}

#[test]
fn greedy_bounded_by_optimum_and_guarantee() {
    for i in 0..40 {
        let inst = seeded_instance(52, i, 3, 2, 1..=7);
        let cm = model(&inst);
        let d = inst.budget();
        let greedy = cm.value(&greedy_schedule(&cm, d).unwrap().schedule);
        let (_, opt) = brute_force_optimum(&cm, d).unwrap();
        let slack = 1e-9 * cm.empty_cost().max(1.0);
        assert!(greedy <= opt + slack);

        let exact = exact_metrics(&cm).unwrap();
        let cert = certificate(&cm);
        let exact_factor = approximation_factor(exact.gamma, exact.alpha);
        assert!(greedy >= exact_factor * opt - slack, "exact factor {exact_factor}");
        if let Some(factor) = cert.factor {
            assert!(greedy >= factor * opt - slack);
        }
    }
}

#[test]
fn certificate_ratio_bound_holds() {
    for i in 0..100 {
        let inst = seeded_instance(53, i, 3, 2, 1..=6);
        let cm = model(&inst);
        let exact = exact_metrics(&cm).unwrap();
        let cert = certificate(&cm);
        assert!((0.0..=1.0).contains(&exact.gamma));
        assert!((0.0..=1.0).contains(&exact.alpha));
        let g = cert.gamma_lb.unwrap();
        assert!(g <= exact.gamma + 1e-9, "{g} > {}", exact.gamma);
    }
}

#[test]
fn curvature_can_exceed_certified_bound() {
    // n = 2, m = 1, N = 2. With S = {1}, Ω = {0}: the gain of instant 1
    // drops from J(∅) − J({1}) ≈ 1.48e-4 to J({0}) − J({0,1}) ≈ 1.40e-6,
    // so α ≈ 0.9905 while 1 − γ̲ ≈ 0.9869.
    let inst = seeded_instance(1, 60, 3, 2, 1..=6);
    assert_eq!((inst.state_dim(), inst.input_dim(), inst.horizon()), (2, 1, 2));
    let cm = model(&inst);
    let j = |mask| common::qp_oracle(&inst, &Schedule::from_mask(mask)).1;
    let from_oracle = 1.0 - (j(0b01) - j(0b11)) / (j(0b00) - j(0b10));
    let exact = exact_metrics(&cm).unwrap();
    assert!((exact.alpha - from_oracle).abs() < 1e-9);
    assert!((exact.alpha - 0.990547).abs() < 1e-6);

    let cert = certificate(&cm);
    assert!(exact.alpha > cert.alpha_ub.unwrap() + 1e-3);

    // The greedy guarantee itself still holds here.
    let greedy = cm.value(&greedy_schedule(&cm, 1).unwrap().schedule);
    let (_, opt) = brute_force_optimum(&cm, 1).unwrap();
    assert!(greedy >= cert.factor.unwrap() * opt);
}

#[test]
fn baselines_never_beat_optimum() {
    for i in 0..30 {
        let inst = seeded_instance(54, i, 2, 2, 1..=7);
        let cm = model(&inst);
        let d = inst.budget();
        let (_, opt) = brute_force_optimum(&cm, d).unwrap();
        let j_opt = cm.empty_cost() - opt;
        let slack = 1e-9 * cm.empty_cost().max(1.0);
        assert!(first_d(&cm, d).cost >= j_opt - slack);
        assert!(random_best(&cm, d, 20, i).unwrap().cost >= j_opt - slack);
    }
}

#[test]
fn enough_random_trials_find_scalar_optimum() {
    let cm = model(&unit_scalar(2, 1));
    let best = random_best(&cm, 1, 50, 7).unwrap();
    let (opt, _) = brute_force_optimum(&cm, 1).unwrap();
    assert_eq!(best.schedule, opt);
    assert!((best.cost - 5.0 / 3.0).abs() < 1e-14);
}
