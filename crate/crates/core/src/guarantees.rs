//! Performance certificates for the greedy schedule.
//!
//! [`certificate`] computes the polynomial-time lower bound `γ̲` on the
//! submodularity ratio and the matching upper bound `ᾱ = 1 − γ̲` on the
//! curvature, and from them the guarantee `f(S^g) ≥ (1/ᾱ)(1 − e^{−ᾱγ̲}) f(S*)`.
//! [`exact_metrics`] and [`brute_force_optimum`] enumerate subsets and are
//! only meant for small horizons (tests, sanity checks).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greedy::SetFunction;
use crate::linalg::{max_eigenvalue, min_eigenvalue};
use crate::lqr_cost::CostModel;
use crate::model::Schedule;

/// Atom traces at or below this make the certificate undefined.
pub const UNDEFINED_TRACE: f64 = 1e-14;

/// Constraints of the ratio/curvature definitions with a denominator below
/// this are skipped.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Below this curvature the factor is replaced by its `α → 0` limit `γ`.
pub const SMALL_CURVATURE: f64 = 1e-8;

pub const MAX_EXACT_HORIZON: usize = 12;
pub const MAX_BRUTE_FORCE_HORIZON: usize = 20;
pub const MAX_BRUTE_FORCE_SUBSETS: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ingredients {
    /// `min_ω tr[L K({ω})]`
    pub min_trace: f64,
    /// `max_ω tr[L K({ω})]`
    pub max_trace: f64,
    /// `min_ω λ_min[I + K({ω})]`
    pub min_atom_eigenvalue: f64,
    /// `λ_max[I + K(𝒯)]`
    pub max_full_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub gamma_lb: Option<f64>,
    pub alpha_ub: Option<f64>,
    pub factor: Option<f64>,
    pub ingredients: Ingredients,
}

impl Certificate {
    /// False when every atom trace vanishes (e.g. `A x_0 = 0`).
    pub fn defined(&self) -> bool {
        self.factor.is_some()
    }
}

/// `(1/α)(1 − e^{−αγ})`, the greedy guarantee for a monotone function with
/// submodularity ratio `γ` and curvature `α`.
pub fn approximation_factor(gamma: f64, alpha: f64) -> f64 {
    if alpha < SMALL_CURVATURE {
        gamma
    } else {
        -(-alpha * gamma).exp_m1() / alpha
    }
}

pub fn certificate(cm: &CostModel) -> Certificate {
    let traces = cm.atom_traces();
    let min_trace = traces.iter().copied().fold(f64::INFINITY, f64::min);
    let max_trace = traces.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_atom_eigenvalue = 1.0
        + cm.atoms()
            .par_iter()
            .map(min_eigenvalue)
            .reduce(|| f64::INFINITY, f64::min);
    let full = cm.k_matrix(&Schedule::full(cm.horizon()));
    let max_full_eigenvalue = 1.0 + max_eigenvalue(&full);

    let ingredients = Ingredients {
        min_trace,
        max_trace,
        min_atom_eigenvalue,
        max_full_eigenvalue,
    };
    // Also catches NaN traces.
    if max_trace.partial_cmp(&UNDEFINED_TRACE) != Some(std::cmp::Ordering::Greater) {
        return Certificate {
            gamma_lb: None,
            alpha_ub: None,
            factor: None,
            ingredients,
        };
    }
    let gamma = (min_trace * min_atom_eigenvalue.powi(2))
        / (max_trace * max_full_eigenvalue.powi(2));
    let gamma = gamma.clamp(0.0, 1.0);
    let alpha = 1.0 - gamma;
    Certificate {
        gamma_lb: Some(gamma),
        alpha_ub: Some(alpha),
        factor: Some(approximation_factor(gamma, alpha)),
        ingredients,
    }
}

/// Submodularity ratio and curvature computed from their definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMetrics {
    pub gamma: f64,
    pub alpha: f64,
}

fn all_values<F: SetFunction + ?Sized>(f: &F, ground: usize) -> Vec<f64> {
    (0..1u64 << ground)
        .into_par_iter()
        .map(|mask| f.value(&Schedule::from_mask(mask)))
        .collect()
}

/// Iterates the submasks of `mask`, including `0` and `mask` itself.
fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// Exact `γ` and `α` by enumerating every `(Ω, S)` pair.
///
/// Both definitions only depend on `Ω` through `Ω ∖ S`, so the enumeration
/// runs over `S` and `D ⊆ 𝒯 ∖ S`. Results are clamped to `[0, 1]`; with no
/// active constraint `γ = 1` and `α = 0`.
pub fn exact_metrics<F: SetFunction + ?Sized>(f: &F) -> Result<ExactMetrics> {
    let ground = f.ground_size();
    if ground > MAX_EXACT_HORIZON {
        return Err(Error::Guard(format!(
            "exact metrics enumerate 3^N subset pairs; N = {ground} exceeds {MAX_EXACT_HORIZON}"
        )));
    }
    let v = all_values(f, ground);
    let all = (1u64 << ground) - 1;

    let (gamma, alpha) = (0..=all)
        .into_par_iter()
        .map(|s| {
            let mut gamma = f64::INFINITY;
            let mut alpha = f64::NEG_INFINITY;
            let rest = all & !s;
            for d in submasks(rest) {
                let union = s | d;
                if d != 0 {
                    let joint = v[union as usize] - v[s as usize];
                    if joint > DENOMINATOR_FLOOR {
                        let singles: f64 = bits(d)
                            .map(|w| v[(s | 1 << w) as usize] - v[s as usize])
                            .sum();
                        gamma = gamma.min(singles / joint);
                    }
                }
                for j in bits(s) {
                    let without = s & !(1 << j);
                    let base = v[s as usize] - v[without as usize];
                    if base > DENOMINATOR_FLOOR {
                        let ctx = v[union as usize] - v[(without | d) as usize];
                        alpha = alpha.max(1.0 - ctx / base);
                    }
                }
            }
            (gamma, alpha)
        })
        .reduce(
            || (f64::INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.min(b.0), a.1.max(b.1)),
        );

    Ok(ExactMetrics {
        gamma: if gamma.is_finite() { gamma.clamp(0.0, 1.0) } else { 1.0 },
        alpha: if alpha.is_finite() { alpha.clamp(0.0, 1.0) } else { 0.0 },
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Exact maximizer of `f` over `|S| ≤ d`. Ties go to the lexicographically
/// smallest index list.
pub fn brute_force_optimum<F: SetFunction + ?Sized>(f: &F, d: usize) -> Result<(Schedule, f64)> {
    let ground = f.ground_size();
    if ground > MAX_BRUTE_FORCE_HORIZON {
        return Err(Error::Guard(format!(
            "brute force limited to N ≤ {MAX_BRUTE_FORCE_HORIZON}, got {ground}"
        )));
    }
    let d = d.min(ground);
    let count: u64 = (0..=d as u64).map(|k| binomial(ground as u64, k)).sum();
    if count > MAX_BRUTE_FORCE_SUBSETS {
        return Err(Error::Guard(format!(
            "{count} feasible subsets exceed the limit of {MAX_BRUTE_FORCE_SUBSETS}"
        )));
    }
    let best = (0..1u64 << ground)
        .into_par_iter()
        .filter(|m| m.count_ones() as usize <= d)
        .map(|m| {
            let s = Schedule::from_mask(m);
            let value = f.value(&s);
            (s, value)
        })
        .reduce_with(|a, b| {
            match a.1.total_cmp(&b.1) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => {
                    if a.0.indices() <= b.0.indices() {
                        a
                    } else {
                        b
                    }
                }
            }
        })
        .expect("the empty set is always feasible");
    Ok(best)
}
