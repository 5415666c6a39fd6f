//! Seeded random instance generators used by the experiments and tests.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::model::{InitialCondition, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub state_dim: usize,
    pub input_dim: usize,
    pub horizon: usize,
    pub budget: usize,
}

fn uniform_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, half: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-half..=half))
}

/// `M Mᵀ` for a random `dim × rank` factor, symmetrized exactly.
fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DMatrix<f64> {
    let f = uniform_matrix(rng, dim, rank, 1.0);
    let p = &f * f.transpose();
    (&p + p.transpose()) * 0.5
}

/// Dense random plant with possibly rank-deficient state weights and
/// well-conditioned input weights. Entries of `A` are scaled so the
/// spectral radius stays moderate over short horizons.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> Instance {
    let Shape {
        state_dim: n,
        input_dim: m,
        horizon,
        budget,
    } = shape;
    let a = uniform_matrix(rng, n, n, 1.2 / (n as f64).sqrt());
    let b = uniform_matrix(rng, n, m, 1.0);
    let x0 = DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
    let q = (0..=horizon)
        .map(|_| {
            let rank = rng.random_range(1..=n);
            random_psd(rng, n, rank)
        })
        .collect();
    let r = (0..horizon)
        .map(|_| random_psd(rng, m, m) + DMatrix::identity(m, m) * 0.2)
        .collect();
    Instance::new(a, b, InitialCondition::State(x0), horizon, budget, q, r)
        .expect("generator produces valid instances")
}

/// Same as [`random_instance`] but with a random full-rank covariance.
pub fn random_covariance_instance<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> Instance {
    let base = random_instance(rng, shape);
    let sigma = random_psd(rng, shape.state_dim, shape.state_dim)
        + DMatrix::identity(shape.state_dim, shape.state_dim) * 0.1;
    base.with_init(InitialCondition::Covariance(sigma))
        .expect("generator produces valid instances")
}

/// One draw of the diagonal two-state ensemble: `A = diag{a₁, a₂}` with
/// `a_i` uniform on `[−1.5, 1.5]`, `x_0` uniform on `[−10, 10]²`,
/// `B = 0.1 I`, `N = 5`, `Q_k = 0.1 I`, `R_0 = 10 I`, `R_k = 10/k² I`.
#[derive(Debug, Clone)]
pub struct DiagonalDraw {
    pub diag: [f64; 2],
    pub x0: DVector<f64>,
}

impl DiagonalDraw {
    pub const HORIZON: usize = 5;

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let diag = [rng.random_range(-1.5..=1.5), rng.random_range(-1.5..=1.5)];
        let x0 = DVector::from_fn(2, |_, _| rng.random_range(-10.0..=10.0));
        DiagonalDraw { diag, x0 }
    }

    /// `‖A‖₂`, which for a diagonal `A` is the largest `|a_i|`.
    pub fn spectral_norm(&self) -> f64 {
        self.diag[0].abs().max(self.diag[1].abs())
    }

    pub fn instance(&self, init: InitialCondition) -> Instance {
        let horizon = Self::HORIZON;
        let eye = DMatrix::<f64>::identity(2, 2);
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&self.diag));
        let q = vec![&eye * 0.1; horizon + 1];
        let r = (0..horizon)
            .map(|k| if k == 0 { &eye * 10.0 } else { &eye * (10.0 / (k * k) as f64) })
            .collect();
        Instance::new(a, &eye * 0.1, init, horizon, 1, q, r)
            .expect("ensemble instances are valid")
    }

    pub fn deterministic(&self) -> Instance {
        self.instance(InitialCondition::State(self.x0.clone()))
    }
}
