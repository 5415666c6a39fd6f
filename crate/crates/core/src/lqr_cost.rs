//! Closed-form optimal cost for a fixed schedule, optimal input recovery and
//! trajectory simulation.
//!
//! With `G` a factor of `L = G Gᵀ`, the optimal cost is
//! `J(S) = tr[Gᵀ (I + K(S))⁻¹ G] + c`, evaluated by a Cholesky factorization
//! of `I + K(S)` and triangular solves against the columns of `G`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greedy::SetFunction;
use crate::lifted::{selection_matrix, sum_atoms, LiftedSystem};
use crate::linalg::psd_sqrt;
use crate::model::{InitialCondition, Instance, Schedule};

/// Everything needed to evaluate `J(S)` for any schedule.
#[derive(Debug, Clone)]
pub struct CostModel {
    horizon: usize,
    lifted_dim: usize,
    lfactor: DMatrix<f64>,
    c: f64,
    atoms: Vec<DMatrix<f64>>,
    atom_traces: Vec<f64>,
    empty_cost: f64,
}

impl CostModel {
    /// For a known `x_0`, `G = Q̄^{1/2} Ψ x_0` and `c = x_0ᵀ Q_0 x_0`. For a
    /// covariance `Σ`, `G = Q̄^{1/2} Ψ Σ^{1/2}` and `c = tr(Q_0 Σ)`, which gives
    /// the expected cost.
    pub fn new(lift: &LiftedSystem, inst: &Instance) -> Self {
        let q0 = inst.q(0);
        let (lfactor, c) = match inst.init() {
            InitialCondition::State(x0) => {
                let g = lift.qbar_half() * (lift.psi() * x0);
                (DMatrix::from_column_slice(g.len(), 1, g.as_slice()), x0.dot(&(q0 * x0)))
            }
            InitialCondition::Covariance(sigma) => {
                let g = lift.qbar_half() * lift.psi() * psd_sqrt(sigma);
                (g, (q0 * sigma).trace())
            }
        };
        Self::from_parts(lift.atoms().to_vec(), lfactor, c)
    }

    /// Builds a model from raw atoms, a factor `G` of `L` and the constant.
    pub fn from_parts(atoms: Vec<DMatrix<f64>>, lfactor: DMatrix<f64>, c: f64) -> Self {
        let lifted_dim = lfactor.nrows();
        let atom_traces = atoms
            .par_iter()
            .map(|k| lfactor.dot(&(k * &lfactor)))
            .collect();
        let empty_cost = lfactor.norm_squared() + c;
        CostModel {
            horizon: atoms.len(),
            lifted_dim,
            lfactor,
            c,
            atoms,
            atom_traces,
            empty_cost,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn lifted_dim(&self) -> usize {
        self.lifted_dim
    }

    /// `G` with `L = G Gᵀ`.
    pub fn lfactor(&self) -> &DMatrix<f64> {
        &self.lfactor
    }

    pub fn l_matrix(&self) -> DMatrix<f64> {
        &self.lfactor * self.lfactor.transpose()
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn atoms(&self) -> &[DMatrix<f64>] {
        &self.atoms
    }

    /// `tr[L K({ω})]` for every `ω`.
    pub fn atom_traces(&self) -> &[f64] {
        &self.atom_traces
    }

    pub fn k_matrix(&self, sched: &Schedule) -> DMatrix<f64> {
        sum_atoms(&self.atoms, self.lifted_dim, sched)
    }

    /// `J(∅) = tr L + c`.
    pub fn empty_cost(&self) -> f64 {
        self.empty_cost
    }

    /// Optimal cost `J(S)`.
    ///
    /// Panics if `I + K(S)` fails to factor, which cannot happen for finite
    /// PSD atoms.
    pub fn cost(&self, sched: &Schedule) -> f64 {
        if sched.is_empty() {
            return self.empty_cost;
        }
        self.cost_of_k(self.k_matrix(sched))
    }

    fn cost_of_k(&self, mut z: DMatrix<f64>) -> f64 {
        for i in 0..self.lifted_dim {
            z[(i, i)] += 1.0;
        }
        let chol = z
            .cholesky()
            .expect("I + K(S) must be symmetric positive definite");
        let y = chol.solve(&self.lfactor);
        self.lfactor.dot(&y) + self.c
    }

    /// `f(S) = J(∅) − J(S)`.
    pub fn objective(&self, sched: &Schedule) -> f64 {
        self.empty_cost - self.cost(sched)
    }

    /// `f(S ∪ {ω}) − f(S)`, computed as `J(S) − J(S ∪ {ω})`.
    pub fn marginal_gain(&self, base: &Schedule, omega: usize) -> Result<f64> {
        if omega >= self.horizon {
            return Err(Error::Schedule(format!(
                "time index {omega} outside horizon {}",
                self.horizon
            )));
        }
        if base.contains(omega) {
            return Err(Error::AlreadyScheduled { omega });
        }
        Ok(self.cost(base) - self.cost(&base.with(omega)))
    }
}

impl SetFunction for CostModel {
    fn ground_size(&self) -> usize {
        self.horizon
    }

    fn value(&self, set: &Schedule) -> f64 {
        self.objective(set)
    }

    fn gains(&self, base: &Schedule, candidates: &[usize]) -> Vec<f64> {
        let base_k = self.k_matrix(base);
        let base_cost = if base.is_empty() {
            self.empty_cost
        } else {
            self.cost_of_k(base_k.clone())
        };
        candidates
            .par_iter()
            .map(|&omega| base_cost - self.cost_of_k(&base_k + &self.atoms[omega]))
            .collect()
    }
}

/// Result of scheduling and solving one instance.
#[derive(Debug, Clone)]
pub struct ScheduleReport {
    pub schedule: Schedule,
    pub cost: f64,
    pub objective: f64,
    /// `u_0, …, u_{N−1}`; `None` for covariance instances.
    pub inputs: Option<Vec<DVector<f64>>>,
    /// Marginal gains in selection order (empty unless produced by greedy).
    pub gains: Vec<f64>,
}

impl ScheduleReport {
    pub fn new(
        cm: &CostModel,
        lift: &LiftedSystem,
        inst: &Instance,
        schedule: Schedule,
        gains: Vec<f64>,
    ) -> Result<Self> {
        let cost = cm.cost(&schedule);
        let inputs = match inst.init() {
            InitialCondition::State(_) => Some(optimal_inputs(lift, inst, &schedule)?),
            InitialCondition::Covariance(_) => None,
        };
        Ok(ScheduleReport {
            objective: cm.empty_cost() - cost,
            schedule,
            cost,
            inputs,
            gains,
        })
    }
}

/// Optimal inputs for a fixed schedule; off-schedule inputs are exactly zero.
///
/// Solves `(S R̄ Sᵀ + S B̄ᵀ Φᵀ Q̄ Φ B̄ Sᵀ) SU = −S B̄ᵀ Φᵀ Q̄ Ψ x_0`.
pub fn optimal_inputs(
    lift: &LiftedSystem,
    inst: &Instance,
    sched: &Schedule,
) -> Result<Vec<DVector<f64>>> {
    let x0 = inst.x0().ok_or(Error::UnsupportedInit)?;
    let horizon = lift.horizon();
    let m = lift.input_dim();
    if sched.span() > horizon {
        return Err(Error::Schedule(format!(
            "schedule {sched} exceeds horizon {horizon}"
        )));
    }
    let mut inputs = vec![DVector::zeros(m); horizon];
    if sched.is_empty() {
        return Ok(inputs);
    }

    let sel = selection_matrix(sched, horizon, m);
    // H = Q̄^{1/2} Φ B̄ Sᵀ, so S B̄ᵀ Φᵀ Q̄ Φ B̄ Sᵀ = Hᵀ H.
    let h = lift.qbar_half() * lift.phi() * lift.bbar() * sel.transpose();
    let hessian = &sel * lift.rbar() * sel.transpose() + h.transpose() * &h;
    let free = lift.qbar_half() * (lift.psi() * x0);
    let rhs = -(h.transpose() * free);
    let chol = hessian
        .cholesky()
        .ok_or(Error::NonFinite("reduced input Hessian"))?;
    let su = chol.solve(&rhs);

    for (i, t) in sched.iter().enumerate() {
        inputs[t].copy_from(&su.rows(i * m, m));
    }
    Ok(inputs)
}

/// Open-loop trajectory and its cost.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `x_0, …, x_N`.
    pub states: Vec<DVector<f64>>,
    pub cost: f64,
}

/// Runs `x_{k+1} = A x_k + B u_k` from `x_0` and accumulates
/// `x_Nᵀ Q_N x_N + Σ_k (x_kᵀ Q_k x_k + u_kᵀ R_k u_k)`.
pub fn simulate(inst: &Instance, inputs: &[DVector<f64>]) -> Result<Trajectory> {
    let x0 = inst.x0().ok_or(Error::UnsupportedInit)?;
    let horizon = inst.horizon();
    if inputs.len() != horizon {
        return Err(Error::Dimension(format!(
            "expected {horizon} input vectors, got {}",
            inputs.len()
        )));
    }
    if let Some((k, u)) = inputs
        .iter()
        .enumerate()
        .find(|(_, u)| u.len() != inst.input_dim())
    {
        return Err(Error::Dimension(format!(
            "u_{k} has length {}, expected {}",
            u.len(),
            inst.input_dim()
        )));
    }

    let mut states = Vec::with_capacity(horizon + 1);
    states.push(x0.clone());
    let mut cost = 0.0;
    for (k, u) in inputs.iter().enumerate() {
        let x = &states[k];
        cost += x.dot(&(inst.q(k) * x)) + u.dot(&(inst.r(k) * u));
        let next = inst.a() * x + inst.b() * u;
        states.push(next);
    }
    let xn = &states[horizon];
    cost += xn.dot(&(inst.q(horizon) * xn));
    Ok(Trajectory { states, cost })
}
