use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sparse_lqr::experiment::{
    self, bin_summary, fig2_instance, mean_factor, norm_factor_points, ExperimentConfig,
    ExperimentKind, NORM_BINS, NORM_BIN_HI, NORM_BIN_LO,
};
use sparse_lqr::guarantees::{exact_metrics, MAX_EXACT_HORIZON};
use sparse_lqr::{
    brute_force_optimum, build_lifted, certificate, greedy_schedule, load_instance, CostModel,
    Error, Instance, ScheduleReport,
};

#[derive(Debug, Parser)]
#[command(name = "sparse-lqr", version, about = "Greedy actuation scheduling for sparse LQR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Greedy schedule, optimal cost and inputs for an instance file.
    Schedule(InstanceArgs),
    /// Submodularity-ratio/curvature certificate for an instance file.
    Certify(InstanceArgs),
    /// Exhaustive optimum compared against greedy (small horizons only).
    Oracle(InstanceArgs),
    /// Reproducible experiment sweeps.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Instance JSON file.
    instance: PathBuf,
    /// Override the budget stored in the file.
    #[arg(long)]
    d: Option<usize>,
    /// Write a CSV report here.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum ExperimentCommand {
    /// Greedy vs. best-of-random vs. first-d cost over a budget grid.
    Fig2(Fig2Args),
    /// Certificate factor against the spectral norm of A.
    Fig3(EnsembleArgs),
    /// Fig3 ensemble with a zero-mean random initial state.
    Stochastic(EnsembleArgs),
}

#[derive(Debug, Args)]
struct Fig2Args {
    /// Instance file; defaults to the bundled five-state plant.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = experiment::DEFAULT_SEED)]
    seed: u64,
    /// Random schedules drawn per budget.
    #[arg(long, default_value_t = experiment::DEFAULT_TRIALS)]
    trials: usize,
    /// Budgets, e.g. `5,10,15` or `1-50`.
    #[arg(long, value_parser = parse_grid)]
    d: Option<Grid>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    #[arg(long, default_value_t = experiment::DEFAULT_SEED)]
    seed: u64,
    /// Number of random plants.
    #[arg(long, alias = "trials", default_value_t = experiment::DEFAULT_REALIZATIONS)]
    realizations: usize,
    /// Covariance scale for the stochastic initial state.
    #[arg(long, default_value_t = 1.0)]
    sigma_scale: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-norm-bin summary CSV; defaults to `<output>_summary.csv`.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// Aliased so clap parses the whole list from one `--d` value.
type Grid = Vec<usize>;

fn parse_grid(s: &str) -> Result<Grid, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                let hi: usize = hi.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                if lo > hi {
                    return Err(format!("empty range {part}"));
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|e| format!("{part}: {e}"))?),
        }
    }
    if out.is_empty() {
        return Err("budget grid is empty".into());
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// CSV goes to `path` when given, stdout otherwise.
fn with_output(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> Result<(), Error>,
) -> Result<(), Error> {
    match path {
        Some(p) => f(&mut create(p)?),
        None => f(&mut io::stdout().lock()),
    }
}

fn load_with_budget(args: &InstanceArgs) -> Result<Instance, Error> {
    let inst = load_instance(&args.instance)?;
    match args.d {
        Some(d) => inst.with_budget(d),
        None => Ok(inst),
    }
}

fn cmd_schedule(args: &InstanceArgs) -> Result<(), Error> {
    let inst = load_with_budget(args)?;
    let lift = build_lifted(&inst)?;
    let cm = CostModel::new(&lift, &inst);
    let trace = greedy_schedule(&cm, inst.budget())?;
    let report = ScheduleReport::new(&cm, &lift, &inst, trace.schedule.clone(), trace.gains())?;

    println!("schedule: {}", report.schedule);
    println!("J(S)    = {}", experiment::fmt_f64(report.cost));
    println!("J(empty)= {}", experiment::fmt_f64(cm.empty_cost()));
    println!("f(S)    = {}", experiment::fmt_f64(report.objective));
    for (i, step) in trace.steps.iter().enumerate() {
        println!(
            "  step {:>3}: t = {:>4}  gain = {}  f = {}",
            i + 1,
            step.chosen,
            experiment::fmt_f64(step.gain),
            experiment::fmt_f64(step.value)
        );
    }
    if let Some(inputs) = &report.inputs {
        for t in report.schedule.iter() {
            let u: Vec<String> = inputs[t].iter().map(|x| format!("{x:.6e}")).collect();
            println!("  u_{t} = [{}]", u.join(", "));
        }
    }
    if let Some(path) = &args.output {
        experiment::write_schedule_csv(
            inst.budget(),
            &report.schedule,
            report.cost,
            report.objective,
            cm.empty_cost(),
            create(path)?,
        )?;
    }
    Ok(())
}

fn cmd_certify(args: &InstanceArgs) -> Result<(), Error> {
    let inst = load_with_budget(args)?;
    let cm = CostModel::new(&build_lifted(&inst)?, &inst);
    let cert = certificate(&cm);
    let ing = cert.ingredients;
    println!("min tr[L K]        = {}", experiment::fmt_f64(ing.min_trace));
    println!("max tr[L K]        = {}", experiment::fmt_f64(ing.max_trace));
    println!("min lmin[I + K(w)] = {}", experiment::fmt_f64(ing.min_atom_eigenvalue));
    println!("lmax[I + K(T)]     = {}", experiment::fmt_f64(ing.max_full_eigenvalue));
    match (cert.gamma_lb, cert.alpha_ub, cert.factor) {
        (Some(g), Some(a), Some(f)) => {
            println!("gamma_lb = {}", experiment::fmt_f64(g));
            println!("alpha_ub = {}", experiment::fmt_f64(a));
            println!("factor   = {}", experiment::fmt_f64(f));
        }
        _ => println!("certificate undefined: every tr[L K(w)] vanishes"),
    }
    if let Some(path) = &args.output {
        let row = experiment::Fig3Row {
            realization: 0,
            spectral_norm: inst.spectral_norm(),
            certificate: cert,
        };
        experiment::write_fig3_csv(&[row], create(path)?)?;
    }
    Ok(())
}

fn cmd_oracle(args: &InstanceArgs) -> Result<(), Error> {
    let inst = load_with_budget(args)?;
    let cm = CostModel::new(&build_lifted(&inst)?, &inst);
    let d = inst.budget();
    let greedy = greedy_schedule(&cm, d)?;
    let (best, f_best) = brute_force_optimum(&cm, d)?;
    let f_greedy = cm.objective(&greedy.schedule);
    let cert = certificate(&cm);

    println!("greedy  : {}  f = {}", greedy.schedule, experiment::fmt_f64(f_greedy));
    println!("optimum : {}  f = {}", best, experiment::fmt_f64(f_best));
    if f_best > 0.0 {
        println!("ratio   = {}", experiment::fmt_f64(f_greedy / f_best));
    }
    match cert.factor {
        Some(f) => println!("certified factor = {}", experiment::fmt_f64(f)),
        None => println!("certified factor undefined"),
    }
    if inst.horizon() <= MAX_EXACT_HORIZON {
        let m = exact_metrics(&cm)?;
        println!("exact gamma = {}", experiment::fmt_f64(m.gamma));
        println!("exact alpha = {}", experiment::fmt_f64(m.alpha));
    }
    if let Some(path) = &args.output {
        experiment::write_schedule_csv(d, &best, cm.cost(&best), f_best, cm.empty_cost(), create(path)?)?;
    }
    Ok(())
}

fn summary_path(args: &EnsembleArgs) -> Option<PathBuf> {
    args.summary.clone().or_else(|| {
        args.output.as_ref().map(|p| {
            let stem = p.file_stem().unwrap_or_default().to_string_lossy();
            p.with_file_name(format!("{stem}_summary.csv"))
        })
    })
}

fn cmd_fig2(args: &Fig2Args) -> Result<(), Error> {
    let mut config = ExperimentConfig::new(ExperimentKind::Fig2);
    config.seed = args.seed;
    config.trials = args.trials;
    if let Some(grid) = &args.d {
        config.d_grid = grid.clone();
    }
    config.validate()?;
    let inst = match &args.instance {
        Some(p) => load_instance(p)?,
        None => fig2_instance(),
    };
    let rows = experiment::run_fig2(&inst, &config.d_grid, config.trials, config.seed)?;
    with_output(args.output.as_deref(), |w| experiment::write_fig2_csv(&rows, w))
}

fn cmd_ensemble(kind: ExperimentKind, args: &EnsembleArgs) -> Result<(), Error> {
    let mut config = ExperimentConfig::new(kind);
    config.seed = args.seed;
    config.realizations = args.realizations;
    config.sigma_scale = args.sigma_scale;
    config.validate()?;

    let (points, mean) = if kind == ExperimentKind::Fig3 {
        let rows = experiment::run_fig3(config.realizations, config.seed)?;
        with_output(args.output.as_deref(), |w| experiment::write_fig3_csv(&rows, w))?;
        (norm_factor_points(&rows), mean_factor(rows.iter().map(|r| &r.certificate)))
    } else {
        let rows = experiment::run_stochastic(config.realizations, config.seed, config.sigma_scale)?;
        with_output(args.output.as_deref(), |w| experiment::write_stochastic_csv(&rows, w))?;
        let points = rows
            .iter()
            .filter_map(|r| r.covariance_certificate.factor.map(|f| (r.spectral_norm, f)))
            .collect();
        (points, mean_factor(rows.iter().map(|r| &r.covariance_certificate)))
    };

    if let Some(path) = summary_path(args) {
        let bins = bin_summary(&points, NORM_BIN_LO, NORM_BIN_HI, NORM_BINS);
        experiment::write_bin_summary_csv(&bins, create(&path)?)?;
    }
    match mean {
        Some(m) => eprintln!("mean factor over {} defined realizations: {m:.6}", points.len()),
        None => eprintln!("no realization has a defined certificate"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Schedule(a) => cmd_schedule(&a),
        Command::Certify(a) => cmd_certify(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Experiment(ExperimentCommand::Fig2(a)) => cmd_fig2(&a),
        Command::Experiment(ExperimentCommand::Fig3(a)) => cmd_ensemble(ExperimentKind::Fig3, &a),
        Command::Experiment(ExperimentCommand::Stochastic(a)) => {
            cmd_ensemble(ExperimentKind::Stochastic, &a)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
