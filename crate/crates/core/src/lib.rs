//! Sparsity-constrained finite-horizon LQR.
//!
//! Given a linear plant `x_{k+1} = A x_k + B u_k`, a quadratic cost and a
//! budget of `d` actuation instants out of a horizon of `N`, this crate
//! computes greedy actuation schedules, the closed-form optimal inputs and
//! costs for a fixed schedule, and a-priori lower bounds on how close the
//! greedy schedule is to the best one (via bounds on the submodularity
//! ratio and curvature of the cost reduction).
//!
//! The pipeline is:
//!
//! 1. [`model::Instance`] describes the plant, weights, horizon and budget.
//! 2. [`lifted::LiftedSystem`] stacks the whole trajectory into batch form
//!    and caches the per-instant contributions `K({ω})`.
//! 3. [`lqr_cost::CostModel`] evaluates `J(S) = tr[L (I + K(S))⁻¹] + c`.
//! 4. [`greedy::greedy_schedule`] picks instants one at a time.
//! 5. [`guarantees::certificate`] bounds the greedy/optimal ratio.

pub mod baselines;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod greedy;
pub mod guarantees;
pub mod lifted;
pub(crate) mod linalg;
pub mod lqr_cost;
pub mod model;

pub use error::{Error, Result};
pub use greedy::{greedy_schedule, GreedyTrace, SetFunction};
pub use guarantees::{brute_force_optimum, certificate, exact_metrics, Certificate};
pub use lifted::{build_lifted, selection_matrix, LiftedSystem};
pub use lqr_cost::{optimal_inputs, simulate, CostModel, ScheduleReport};
pub use model::{load_instance, save_instance, validate, InitialCondition, Instance, Schedule};
