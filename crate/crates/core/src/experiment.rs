//! Reproducible experiment sweeps and their CSV output.
//!
//! * `fig2`: greedy vs. best-of-random vs. first-`d` cost on the bundled
//!   five-state bidiagonal plant, swept over `d`.
//! * `fig3`: certificate factor against `‖A‖` over random diagonal two-state
//!   plants with a known initial state.
//! * `stochastic`: the same ensemble, additionally certified for a zero-mean
//!   initial state with covariance `σ I`.
//!
//! Realizations use per-index ChaCha streams and rows are collected in index
//! order, so output is byte-identical for a given seed regardless of thread
//! count.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::baselines::{first_d, random_best, trial_rng};
use crate::error::{Error, Result};
use crate::generate::DiagonalDraw;
use crate::greedy::greedy_schedule;
use crate::guarantees::{certificate, Certificate};
use crate::lifted::build_lifted;
use crate::lqr_cost::CostModel;
use crate::model::{parse_instance, InitialCondition, Instance, Schedule};

pub const FIG2_INSTANCE_JSON: &str = include_str!("../data/fig2_instance.json");

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_REALIZATIONS: usize = 1000;
pub const DEFAULT_FIG2_GRID: &[usize] = &[1, 2, 3, 4, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50];

/// Summary bins for the certificate-vs-norm plot: 14 equal bins on `[0.1, 1.5]`.
pub const NORM_BIN_LO: f64 = 0.1;
pub const NORM_BIN_HI: f64 = 1.5;
pub const NORM_BINS: usize = 14;

/// The five-state bidiagonal plant with `N = 50`, shipped with the crate.
pub fn fig2_instance() -> Instance {
    parse_instance(FIG2_INSTANCE_JSON).expect("bundled instance is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Fig2,
    Fig3,
    Stochastic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Random-policy trials per `d` (fig2 only).
    pub trials: usize,
    /// Budgets to sweep (fig2 only).
    pub d_grid: Vec<usize>,
    /// Ensemble size (fig3 and stochastic).
    pub realizations: usize,
    /// Covariance is `sigma_scale · I` (stochastic only).
    pub sigma_scale: f64,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            d_grid: DEFAULT_FIG2_GRID.to_vec(),
            realizations: DEFAULT_REALIZATIONS,
            sigma_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ExperimentKind::Fig2 => {
                if self.d_grid.is_empty() {
                    return Err(Error::Config("budget grid is empty".into()));
                }
                if self.trials == 0 {
                    return Err(Error::Config("trial count must be at least 1".into()));
                }
            }
            ExperimentKind::Fig3 | ExperimentKind::Stochastic => {
                if self.realizations == 0 {
                    return Err(Error::Config("realization count must be at least 1".into()));
                }
                if !(self.sigma_scale >= 0.0 && self.sigma_scale.is_finite()) {
                    return Err(Error::Config("sigma scale must be finite and nonnegative".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Row {
    pub d: usize,
    pub greedy: f64,
    pub random_best: f64,
    pub first_d: f64,
}

/// Costs of the three policies for every `d` in `grid`.
///
/// Greedy runs once to the largest budget; smaller budgets are its prefixes.
pub fn run_fig2(inst: &Instance, grid: &[usize], trials: usize, seed: u64) -> Result<Vec<Fig2Row>> {
    if grid.is_empty() {
        return Err(Error::Config("budget grid is empty".into()));
    }
    let horizon = inst.horizon();
    if let Some(&bad) = grid.iter().find(|&&d| d > horizon) {
        return Err(Error::Config(format!("budget {bad} exceeds horizon {horizon}")));
    }
    let lift = build_lifted(inst)?;
    let cm = CostModel::new(&lift, inst);
    let d_max = grid.iter().copied().max().unwrap_or(0);
    let trace = greedy_schedule(&cm, d_max)?;

    grid.iter()
        .map(|&d| {
            if d == 0 {
                let j = cm.empty_cost();
                return Ok(Fig2Row {
                    d,
                    greedy: j,
                    random_best: j,
                    first_d: j,
                });
            }
            Ok(Fig2Row {
                d,
                greedy: cm.cost(&trace.prefix(d)),
                random_best: random_best(&cm, d, trials, seed)?.cost,
                first_d: first_d(&cm, d).cost,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Row {
    pub realization: usize,
    pub spectral_norm: f64,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticRow {
    pub realization: usize,
    pub spectral_norm: f64,
    /// Certificate for the drawn `x_0`.
    pub certificate: Certificate,
    /// Certificate for `x_0 ~ (0, σ I)`.
    pub covariance_certificate: Certificate,
}

fn certify(inst: &Instance) -> Result<Certificate> {
    let lift = build_lifted(inst)?;
    Ok(certificate(&CostModel::new(&lift, inst)))
}

pub fn draw(seed: u64, realization: usize) -> DiagonalDraw {
    DiagonalDraw::sample(&mut trial_rng(seed, realization as u64))
}

pub fn run_fig3(realizations: usize, seed: u64) -> Result<Vec<Fig3Row>> {
    (0..realizations)
        .into_par_iter()
        .map(|i| {
            let d = draw(seed, i);
            Ok(Fig3Row {
                realization: i,
                spectral_norm: d.spectral_norm(),
                certificate: certify(&d.deterministic())?,
            })
        })
        .collect()
}

pub fn run_stochastic(realizations: usize, seed: u64, sigma_scale: f64) -> Result<Vec<StochasticRow>> {
    (0..realizations)
        .into_par_iter()
        .map(|i| {
            let d = draw(seed, i);
            let sigma = DMatrix::identity(2, 2) * sigma_scale;
            Ok(StochasticRow {
                realization: i,
                spectral_norm: d.spectral_norm(),
                certificate: certify(&d.deterministic())?,
                covariance_certificate: certify(&d.instance(InitialCondition::Covariance(sigma)))?,
            })
        })
        .collect()
}

/// Mean of the defined factors, `None` if there are none.
pub fn mean_factor<'a>(certs: impl IntoIterator<Item = &'a Certificate>) -> Option<f64> {
    let (sum, count) = certs
        .into_iter()
        .filter_map(|c| c.factor)
        .fold((0.0, 0usize), |(s, n), f| (s + f, n + 1));
    (count > 0).then(|| sum / count as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinStat {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation; `None` with fewer than two points.
    pub std: Option<f64>,
}

/// Per-bin mean and standard deviation of `(norm, factor)` points over
/// equal-width bins on `[lo, hi]`. The last bin is closed; points outside
/// the range are ignored.
pub fn bin_summary(points: &[(f64, f64)], lo: f64, hi: f64, bins: usize) -> Vec<BinStat> {
    let width = (hi - lo) / bins as f64;
    let mut groups = vec![Vec::new(); bins];
    for &(x, y) in points {
        if x < lo || x > hi {
            continue;
        }
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        groups[idx].push(y);
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(i, ys)| {
            let count = ys.len();
            let mean = (count > 0).then(|| ys.iter().sum::<f64>() / count as f64);
            let std = mean.filter(|_| count > 1).map(|mu| {
                (ys.iter().map(|y| (y - mu).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
            });
            BinStat {
                lo: lo + i as f64 * width,
                hi: lo + (i + 1) as f64 * width,
                count,
                mean,
                std,
            }
        })
        .collect()
}

/// `(‖A‖, factor)` for every row with a defined certificate.
pub fn norm_factor_points(rows: &[Fig3Row]) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|r| r.certificate.factor.map(|f| (r.spectral_norm, f)))
        .collect()
}

/// 17 significant digits, so every value round-trips.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()
        .map_err(|e| Error::io("<csv output>", e))
}

pub fn write_fig2_csv<W: Write>(rows: &[Fig2Row], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["d", "J_greedy", "J_random_best", "J_first_d"])?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            fmt_f64(r.greedy),
            fmt_f64(r.random_best),
            fmt_f64(r.first_d),
        ])?;
    }
    finish(w)
}

const FIG3_HEADER: [&str; 6] = [
    "realization",
    "spectral_norm_A",
    "gamma_lb",
    "alpha_ub",
    "factor",
    "defined",
];

fn certificate_fields(c: &Certificate) -> [String; 4] {
    [
        fmt_opt(c.gamma_lb),
        fmt_opt(c.alpha_ub),
        fmt_opt(c.factor),
        c.defined().to_string(),
    ]
}

pub fn write_fig3_csv<W: Write>(rows: &[Fig3Row], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(FIG3_HEADER)?;
    for r in rows {
        let mut rec = vec![r.realization.to_string(), fmt_f64(r.spectral_norm)];
        rec.extend(certificate_fields(&r.certificate));
        w.write_record(&rec)?;
    }
    finish(w)
}

pub fn write_stochastic_csv<W: Write>(rows: &[StochasticRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    let mut header: Vec<&str> = FIG3_HEADER.to_vec();
    header.extend(["gamma_lb_sigma", "alpha_ub_sigma", "factor_sigma", "defined_sigma"]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.realization.to_string(), fmt_f64(r.spectral_norm)];
        rec.extend(certificate_fields(&r.certificate));
        rec.extend(certificate_fields(&r.covariance_certificate));
        w.write_record(&rec)?;
    }
    finish(w)
}

pub fn write_bin_summary_csv<W: Write>(bins: &[BinStat], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["norm_lo", "norm_hi", "count", "mean_factor", "std_factor"])?;
    for b in bins {
        w.write_record([
            fmt_f64(b.lo),
            fmt_f64(b.hi),
            b.count.to_string(),
            fmt_opt(b.mean),
            fmt_opt(b.std),
        ])?;
    }
    finish(w)
}

/// One-row report for a schedule run on an instance file.
pub fn write_schedule_csv<W: Write>(
    d: usize,
    schedule: &Schedule,
    cost: f64,
    objective: f64,
    empty_cost: f64,
    out: W,
) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["d", "schedule", "J", "f", "J_empty"])?;
    let sched = schedule
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    w.write_record([
        d.to_string(),
        sched,
        fmt_f64(cost),
        fmt_f64(objective),
        fmt_f64(empty_cost),
    ])?;
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_instance_shape() {
        let inst = fig2_instance();
        assert_eq!(inst.state_dim(), 5);
        assert_eq!(inst.input_dim(), 5);
        assert_eq!(inst.horizon(), 50);
        assert_eq!(inst.a()[(0, 1)], 1.0);
        assert_eq!(inst.a()[(4, 4)], 1.1);
        assert_eq!(inst.b()[(2, 2)], 0.1);
        assert_eq!(inst.q(50)[(3, 3)], 0.1);
        assert_eq!(inst.r(0)[(1, 1)], 1.0);
    }

    #[test]
    fn binning() {
        let pts = [(0.05, 9.0), (0.1, 1.0), (0.15, 3.0), (1.5, 2.0), (0.95, 4.0)];
        let bins = bin_summary(&pts, 0.1, 1.5, 14);
        assert_eq!(bins.len(), 14);
        assert_eq!(bins[0].count, 2);
        assert_eq!(bins[0].mean, Some(2.0));
        assert!((bins[0].std.unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(bins[8].count, 1);
        assert_eq!(bins[8].std, None);
        assert_eq!(bins[13].mean, Some(2.0));
        assert_eq!(bins[5].mean, None);
    }

    #[test]
    fn csv_format() {
        let rows = vec![Fig2Row {
            d: 3,
            greedy: 1.0,
            random_best: 0.1,
            first_d: 2.5,
        }];
        let mut buf = Vec::new();
        write_fig2_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "d,J_greedy,J_random_best,J_first_d\n\
             3,1.0000000000000000e0,1.0000000000000001e-1,2.5000000000000000e0\n"
        );
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::new(ExperimentKind::Fig2);
        assert!(c.validate().is_ok());
        c.d_grid.clear();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(ExperimentKind::Fig3);
        c.realizations = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn grid_beyond_horizon_rejected() {
        assert!(run_fig2(&fig2_instance(), &[51], 1, 0).is_err());
    }

    #[test]
    fn zero_covariance_is_never_certified() {
        let rows = run_stochastic(20, 4, 0.0).unwrap();
        assert!(rows.iter().all(|r| !r.covariance_certificate.defined()));
    }
}
