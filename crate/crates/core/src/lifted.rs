//! Batch ("lifted") form of the finite-horizon problem.
//!
//! Stacking `X = [x_1; …; x_N]` and `U = [u_0; …; u_{N−1}]` gives
//! `X = Φ B̄ U + Ψ x_0`. With the weight square root `Q̄^{1/2}` this yields,
//! for every time instant `ω`, a PSD matrix
//!
//! ```text
//! K({ω}) = Q̄^{1/2} Φ B̄ (e_ω e_ωᵀ ⊗ R_ω⁻¹) B̄ᵀ Φᵀ Q̄^{1/2}
//! ```
//!
//! and `K(S) = Σ_{ω∈S} K({ω})`. The atoms are computed once here.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{block_diag, psd_sqrt, symmetrize};
use crate::model::{Instance, Schedule};

#[derive(Debug, Clone)]
pub struct LiftedSystem {
    horizon: usize,
    state_dim: usize,
    input_dim: usize,
    phi: DMatrix<f64>,
    psi: DMatrix<f64>,
    bbar: DMatrix<f64>,
    qbar_half: DMatrix<f64>,
    rbar: DMatrix<f64>,
    rbar_inv: DMatrix<f64>,
    /// `Q̄^{1/2} Φ B̄` restricted to the columns of instant `ω`, one per `ω`.
    input_maps: Vec<DMatrix<f64>>,
    atoms: Vec<DMatrix<f64>>,
}

impl LiftedSystem {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Size `N·n` of the stacked state.
    pub fn lifted_dim(&self) -> usize {
        self.horizon * self.state_dim
    }

    /// Block-lower-triangular `Φ` with `(i, j)` block `A^{i−j}`.
    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// `[A; A²; …; A^N]`.
    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    /// `I_N ⊗ B`.
    pub fn bbar(&self) -> &DMatrix<f64> {
        &self.bbar
    }

    /// PSD square root of `diag{Q_1, …, Q_N}`.
    pub fn qbar_half(&self) -> &DMatrix<f64> {
        &self.qbar_half
    }

    /// `diag{R_0, …, R_{N−1}}`.
    pub fn rbar(&self) -> &DMatrix<f64> {
        &self.rbar
    }

    pub fn rbar_inv(&self) -> &DMatrix<f64> {
        &self.rbar_inv
    }

    /// `Q̄^{1/2} Φ B̄ (e_ω ⊗ I_m)`, an `Nn × m` matrix.
    pub fn input_map(&self, omega: usize) -> &DMatrix<f64> {
        &self.input_maps[omega]
    }

    /// The PSD contribution `K({ω})` of a single actuation instant.
    pub fn k_atom(&self, omega: usize) -> &DMatrix<f64> {
        &self.atoms[omega]
    }

    pub fn atoms(&self) -> &[DMatrix<f64>] {
        &self.atoms
    }

    /// `K(S)` as the sum of cached atoms.
    pub fn k_matrix(&self, sched: &Schedule) -> DMatrix<f64> {
        sum_atoms(&self.atoms, self.lifted_dim(), sched)
    }
}

pub(crate) fn sum_atoms(atoms: &[DMatrix<f64>], dim: usize, sched: &Schedule) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(dim, dim);
    for omega in sched.iter() {
        k += &atoms[omega];
    }
    k
}

/// Assembles the lifted matrices and all `K({ω})` atoms.
///
/// Only `Q_1..Q_N` enter `Q̄`; `Q_0` contributes the constant term of the cost.
pub fn build_lifted(inst: &Instance) -> Result<LiftedSystem> {
    let n = inst.state_dim();
    let m = inst.input_dim();
    let horizon = inst.horizon();
    let a = inst.a();
    let b = inst.b();
    let nn = horizon * n;

    let mut powers = Vec::with_capacity(horizon + 1);
    powers.push(DMatrix::<f64>::identity(n, n));
    for k in 1..=horizon {
        let next = a * &powers[k - 1];
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("powers of A"));
        }
        powers.push(next);
    }

    let mut phi = DMatrix::zeros(nn, nn);
    for i in 0..horizon {
        for j in 0..=i {
            phi.view_mut((i * n, j * n), (n, n))
                .copy_from(&powers[i - j]);
        }
    }
    let mut psi = DMatrix::zeros(nn, n);
    for i in 0..horizon {
        psi.view_mut((i * n, 0), (n, n)).copy_from(&powers[i + 1]);
    }

    let bbar = block_diag(&vec![b.clone(); horizon]);
    let q_half: Vec<_> = (1..=horizon).map(|k| psd_sqrt(inst.q(k))).collect();
    let qbar_half = block_diag(&q_half);
    let rbar = block_diag(inst.input_weights());
    let r_inv: Vec<DMatrix<f64>> = inst
        .input_weights()
        .iter()
        .map(|r| {
            let inv = r
                .clone()
                .cholesky()
                .expect("validated input weights are positive definite")
                .inverse();
            symmetrize(&inv)
        })
        .collect();
    let rbar_inv = block_diag(&r_inv);

    // Column block ω of Φ B̄ is Φ[:, ω·n..] · B; rows above block ω vanish.
    let input_maps: Vec<DMatrix<f64>> = (0..horizon)
        .into_par_iter()
        .map(|omega| {
            let mut g = DMatrix::zeros(nn, m);
            for i in omega..horizon {
                let block = &q_half[i] * &powers[i - omega] * b;
                g.view_mut((i * n, 0), (n, m)).copy_from(&block);
            }
            g
        })
        .collect();
    let atoms: Vec<DMatrix<f64>> = input_maps
        .par_iter()
        .zip(r_inv.par_iter())
        .map(|(g, ri)| symmetrize(&(g * ri * g.transpose())))
        .collect();

    for (what, mat) in [("Phi", &phi), ("Psi", &psi), ("Q^1/2", &qbar_half)] {
        if mat.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(what));
        }
    }
    if atoms.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("K atoms"));
    }

    Ok(LiftedSystem {
        horizon,
        state_dim: n,
        input_dim: m,
        phi,
        psi,
        bbar,
        qbar_half,
        rbar,
        rbar_inv,
        input_maps,
        atoms,
    })
}

/// The `|S|·m × N·m` 0/1 matrix whose block row `i` extracts `u_{t_i}` from
/// the stacked input vector.
pub fn selection_matrix(sched: &Schedule, horizon: usize, m: usize) -> DMatrix<f64> {
    debug_assert!(sched.span() <= horizon);
    let mut s = DMatrix::zeros(sched.len() * m, horizon * m);
    for (i, t) in sched.iter().enumerate() {
        for a in 0..m {
            s[(i * m + a, t * m + a)] = 1.0;
        }
    }
    s
}
