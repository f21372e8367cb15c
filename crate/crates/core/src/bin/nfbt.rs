use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nfbt::baselines::Method;
use nfbt::beamspace::{expected_sparsity, sparsity_monte_carlo};
use nfbt::harness::{
    persist, persist_traces, run_ablation, run_sweep, run_trial_detailed, PersistOptions,
    SimConfig, SweepAxis, SweepReport,
};
use nfbt::rng::stream;
use nfbt::validation::{reference_array, reference_prior, run_all, SuiteSizes};
use nfbt::Error;

/// Amplitude-only near-field beam training simulator.
#[derive(Parser)]
#[command(name = "nfbt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file; defaults to the desk-scale setup
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// worker threads for the trial pool; defaults to all cores
    #[arg(long)]
    threads: Option<usize>,
    /// 128x16 array, 500 trials, 10..80 m distance grid
    #[arg(long)]
    full_scale: bool,
}

#[derive(Args, Clone)]
struct Outputs {
    /// also write trials.csv with one row per trial
    #[arg(long)]
    trials_csv: bool,
    /// also write plot_data.dat with one block per method
    #[arg(long)]
    plot_data: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Snr,
    Paths,
    Distance,
}

#[derive(Subcommand)]
enum Command {
    /// Mean correlation versus SNR for every configured method
    SweepSnr {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Mean correlation versus the number of paths
    SweepPaths {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Mean correlation versus the user range
    SweepDistance {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Proposed method with the denoising and kernel switches toggled
    Ablate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        outputs: Outputs,
        #[arg(long, value_enum, default_value = "snr")]
        axis: AxisArg,
    },
    /// Closed-form expected beamspace sparsity and its Monte-Carlo estimate
    Sparsity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// use the 128x16 array with r in [r_F, r_R/20] instead of the config
        #[arg(long)]
        reference: bool,
    },
    /// Runs the invariant suites
    Validate {
        #[command(flatten)]
        common: Common,
        /// smaller sample sizes
        #[arg(long)]
        quick: bool,
    },
    /// One seeded trial with Stage I and Stage II traces
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "lse_r_sparta")]
        method: Method,
        #[arg(long, default_value_t = 0.0)]
        snr_db: f64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
}

fn load(common: &Common) -> Result<SimConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => SimConfig::from_file(p)?,
        None => SimConfig::desk(),
    };
    if common.full_scale {
        cfg.make_full_scale();
    }
    if let Some(s) = common.seed {
        cfg.global_seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Error> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn axis_of(a: AxisArg) -> SweepAxis {
    match a {
        AxisArg::Snr => SweepAxis::SnrDb,
        AxisArg::Paths => SweepAxis::NumPaths,
        AxisArg::Distance => SweepAxis::DistanceM,
    }
}

fn print_report(report: &SweepReport) {
    println!(
        "{:>10} {:<24} {:>9} {:>9} {:>5}",
        report.axis.name(),
        "method",
        "mean_rho",
        "stderr",
        "n"
    );
    for p in &report.points {
        println!(
            "{:>10} {:<24} {:>9.4} {:>9.4} {:>5}",
            p.axis, p.method, p.mean_rho, p.stderr, p.n
        );
    }
}

fn finish_sweep(
    report: &SweepReport,
    cfg: &SimConfig,
    common: &Common,
    outputs: &Outputs,
) -> Result<ExitCode, Error> {
    let opts = PersistOptions {
        trials_csv: outputs.trials_csv,
        plot_data: outputs.plot_data,
    };
    persist(report, cfg, &common.out, opts)?;
    print_report(report);
    println!("wrote {}", common.out.join("report.csv").display());
    let frac = report.failure_fraction();
    if frac > 0.1 {
        eprintln!(
            "{} of {} trials failed",
            report.failures(),
            report.results.len()
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(
    common: &Common,
    outputs: &Outputs,
    axis: SweepAxis,
    ablate: bool,
) -> Result<ExitCode, Error> {
    let mut cfg = load(common)?;
    cfg.sweep.axis = axis;
    cfg.validate()?;
    let report = with_pool(common.threads, || {
        if ablate {
            run_ablation(&cfg)
        } else {
            run_sweep(&cfg)
        }
    })??;
    finish_sweep(&report, &cfg, common, outputs)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::SweepSnr { common, outputs } => sweep(&common, &outputs, SweepAxis::SnrDb, false),
        Command::SweepPaths { common, outputs } => {
            sweep(&common, &outputs, SweepAxis::NumPaths, false)
        }
        Command::SweepDistance { common, outputs } => {
            sweep(&common, &outputs, SweepAxis::DistanceM, false)
        }
        Command::Ablate {
            common,
            outputs,
            axis,
        } => sweep(&common, &outputs, axis_of(axis), true),
        Command::Sparsity {
            common,
            samples,
            reference,
        } => {
            let cfg = load(&common)?;
            let (array, prior) = if reference {
                let a = reference_array();
                let p = reference_prior(&a);
                (a, p)
            } else {
                (cfg.array, cfg.prior.resolve(&cfg.array)?)
            };
            let est = expected_sparsity(&array, &prior)?;
            let (mc, se) =
                sparsity_monte_carlo(&array, &prior, samples, &mut stream(&[cfg.global_seed]))?;
            println!("n_y = {}", array.n_y);
            println!("n_z = {}", array.n_z);
            println!("r_range = [{}, {}]", prior.r_range[0], prior.r_range[1]);
            println!("num_paths = {}", prior.num_paths);
            println!("expected_k = {}", est.expected_k);
            println!("xi_r = {}", est.xi_r);
            println!("xi_vs = {}", est.xi_vs);
            println!("mu2 = {}", est.mu2);
            println!("mu4 = {}", est.mu4);
            println!("nu2 = {}", est.nu2);
            println!("monte_carlo_k = {mc}");
            println!("monte_carlo_stderr = {se}");
            println!("monte_carlo_samples = {samples}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { common, quick } => {
            let cfg = load(&common)?;
            let sizes = if quick {
                SuiteSizes::quick()
            } else {
                SuiteSizes::full()
            };
            let checks = run_all(&sizes, cfg.global_seed)?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} passed, {failed} failed", checks.len() - failed);
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Trace {
            common,
            method,
            snr_db,
            trial,
        } => {
            let mut cfg = load(&common)?;
            cfg.sweep.axis = SweepAxis::SnrDb;
            let d = run_trial_detailed(&cfg, method, snr_db, trial)?;
            persist_traces(&d, &common.out)?;
            let r = &d.result;
            println!("method = {}", r.method);
            println!("snr_db = {snr_db}");
            println!("trial = {trial}");
            println!("rho = {}", r.rho);
            println!("probes_used = {}", r.probes_used);
            println!("support_size = {}", r.support_size);
            println!("stage1_steps = {}", r.stage1_steps);
            println!("stage2_iters = {}", r.stage2_iters);
            println!("wrote {}", common.out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
