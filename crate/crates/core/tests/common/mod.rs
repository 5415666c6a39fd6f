//! Reference computations that avoid the library's lifted/closed-form path.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use sparse_lqr::baselines::trial_rng;
use sparse_lqr::generate::{random_instance, Shape};
use sparse_lqr::{Instance, LiftedSystem, Schedule};

/// `x_{k+1} = A x_k + B u_k` from `x0`, returning `x_0..x_N`.
pub fn rollout(inst: &Instance, x0: &DVector<f64>, inputs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut xs = vec![x0.clone()];
    for u in inputs {
        let x = xs.last().unwrap();
        xs.push(inst.a() * x + inst.b() * u);
    }
    xs
}

fn state_cost(inst: &Instance, xs: &[DVector<f64>]) -> f64 {
    xs.iter()
        .enumerate()
        .map(|(k, x)| x.dot(&(inst.q(k) * x)))
        .sum()
}

/// Minimizes the finite-horizon cost over the inputs allowed by `sched`
/// by forming the normal equations from unit-input responses and solving
/// them with LU. Returns the minimizing inputs and the minimum.
pub fn qp_oracle(inst: &Instance, sched: &Schedule) -> (Vec<DVector<f64>>, f64) {
    let x0 = inst.x0().expect("deterministic instance").clone();
    let horizon = inst.horizon();
    let m = inst.input_dim();
    let zero_inputs = vec![DVector::zeros(m); horizon];
    let free = rollout(inst, &x0, &zero_inputs);

    // One column per free scalar input: (time, component).
    let coords: Vec<(usize, usize)> = sched
        .iter()
        .flat_map(|t| (0..m).map(move |a| (t, a)))
        .collect();
    let zero_state = DVector::zeros(inst.state_dim());
    let responses: Vec<Vec<DVector<f64>>> = coords
        .iter()
        .map(|&(t, a)| {
            let mut u = zero_inputs.clone();
            u[t][a] = 1.0;
            rollout(inst, &zero_state, &u)
        })
        .collect();

    let p = coords.len();
    let mut hessian = DMatrix::zeros(p, p);
    let mut linear = DVector::zeros(p);
    for i in 0..p {
        for j in 0..p {
            let mut h: f64 = (0..=horizon)
                .map(|k| responses[i][k].dot(&(inst.q(k) * &responses[j][k])))
                .sum();
            let ((ti, ai), (tj, aj)) = (coords[i], coords[j]);
            if ti == tj {
                h += inst.r(ti)[(ai, aj)];
            }
            hessian[(i, j)] = h;
        }
        linear[i] = (0..=horizon)
            .map(|k| responses[i][k].dot(&(inst.q(k) * &free[k])))
            .sum();
    }

    let z = if p == 0 {
        DVector::zeros(0)
    } else {
        -hessian.lu().solve(&linear).expect("positive definite Hessian")
    };
    let mut inputs = zero_inputs;
    for (i, &(t, a)) in coords.iter().enumerate() {
        inputs[t][a] = z[i];
    }
    let xs = rollout(inst, &x0, &inputs);
    let cost = state_cost(inst, &xs)
        + inputs
            .iter()
            .enumerate()
            .map(|(k, u)| u.dot(&(inst.r(k) * u)))
            .sum::<f64>();
    (inputs, cost)
}

/// `K(S) = Q̄^{1/2} Φ B̄ SᵀS R̄⁻¹ SᵀS B̄ᵀ Φᵀ Q̄^{1/2}` from the selection matrix.
pub fn direct_k(lift: &LiftedSystem, sched: &Schedule) -> DMatrix<f64> {
    let s = sparse_lqr::selection_matrix(sched, lift.horizon(), lift.input_dim());
    let sts = s.transpose() * &s;
    let left = lift.qbar_half() * lift.phi() * lift.bbar();
    &left * &sts * lift.rbar_inv() * &sts * left.transpose()
}

/// `tr[L (I + K)⁻¹]` with an explicit inverse.
pub fn trace_explicit(l: &DMatrix<f64>, k: &DMatrix<f64>) -> f64 {
    let z = DMatrix::identity(k.nrows(), k.ncols()) + k;
    (l * z.try_inverse().expect("I + K invertible")).trace()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn random_shape<R: Rng>(rng: &mut R, max_n: usize, max_m: usize, horizons: std::ops::RangeInclusive<usize>) -> Shape {
    let horizon = rng.random_range(horizons);
    Shape {
        state_dim: rng.random_range(1..=max_n),
        input_dim: rng.random_range(1..=max_m),
        horizon,
        budget: rng.random_range(1..=horizon),
    }
}

/// Instance `index` of a seeded family.
pub fn seeded_instance(seed: u64, index: u64, max_n: usize, max_m: usize, horizons: std::ops::RangeInclusive<usize>) -> Instance {
    let mut rng = trial_rng(seed, index);
    let shape = random_shape(&mut rng, max_n, max_m, horizons);
    random_instance(&mut rng, shape)
}

pub fn random_schedule<R: Rng>(rng: &mut R, horizon: usize) -> Schedule {
    let mask: u64 = rng.random_range(0..1u64 << horizon);
    Schedule::from_mask(mask)
}

/// `n = m = 1`, `A = B = 1`, unit weights, `x_0 = 1`.
pub fn unit_scalar(horizon: usize, budget: usize) -> Instance {
    Instance::time_invariant(
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
        sparse_lqr::InitialCondition::State(DVector::from_element(1, 1.0)),
        horizon,
        budget,
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
    )
    .unwrap()
}
