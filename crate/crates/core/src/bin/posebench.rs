use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pose_coreset::bench::{
    run_error_trial, run_timing_trial, run_tracking_loop, Layout, ReportFormat, TimingTrialConfig,
    TrajectorySpec, TrialConfig,
};
use pose_coreset::geometry::{centroid, estimate_pose, PointSet};
use pose_coreset::pose_coreset::PoseCoresetBuilder;
use pose_coreset::Error;

/// Benchmarks and one-shot solvers for exact pose-estimation coresets.
#[derive(Parser)]
#[command(name = "posebench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TrialArgs {
    /// Marker layout: planar10 | random | file:PATH
    #[arg(long, default_value = "planar10")]
    layout: String,
    /// Marker count (random layout).
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Dimension (random layout).
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Noise standard deviation, marker units.
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 3000)]
    frames: usize,
    /// Comma-separated calculation cycles.
    #[arg(long, default_value = "1,5,10,15", value_delimiter = ',')]
    cycles: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rotation rate, degrees per frame.
    #[arg(long, default_value_t = 1.0)]
    rot_rate: f64,
    /// Translation rate, units per frame.
    #[arg(long, default_value_t = 0.002)]
    trans_rate: f64,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json | csv
    #[arg(long, default_value = "json")]
    format: String,
}

impl TrialArgs {
    fn build(&self) -> Result<(TrialConfig, ReportFormat), Error> {
        let layout = Layout::parse(&self.layout, self.n, self.d)?;
        let cfg = TrialConfig {
            layout,
            sigma: self.sigma,
            frames: self.frames,
            cycles: self.cycles.clone(),
            seed: self.seed,
            trajectory: TrajectorySpec {
                rot_deg_per_frame: self.rot_rate,
                trans_per_frame: self.trans_rate,
            },
        };
        cfg.validate()?;
        let format: ReportFormat = self.format.parse()?;
        Ok((cfg, format))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Coreset vs uniform-sample rotation error across calculation cycles.
    ErrorTrial(TrialArgs),
    /// Pose time from a precomputed coreset vs the full set, over n and d.
    TimingTrial {
        /// Comma-separated n sweep at fixed d.
        #[arg(long, default_value = "1000,10000,100000,1000000", value_delimiter = ',')]
        n_sweep: Vec<usize>,
        /// Fixed d for the n sweep.
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Comma-separated d sweep at fixed n.
        #[arg(long, default_value = "3,10,30,100", value_delimiter = ',')]
        d_sweep: Vec<usize>,
        /// Fixed n for the d sweep.
        #[arg(long, default_value_t = 10000)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        repetitions: usize,
        #[arg(long, default_value_t = 5)]
        warmup: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Two-cadence tracking emulation: slow coreset recomputation, fast
    /// per-frame pose from the latest published snapshot.
    TrackingLoop {
        #[command(flatten)]
        trial: TrialArgs,
        /// Run the slow task on a real thread (same report).
        #[arg(long)]
        threaded: bool,
        /// Include wall-clock latency (nondeterministic field).
        #[arg(long)]
        include_latency: bool,
    },
    /// One-shot pose: two CSV files of matched rows -> rigid motion JSON.
    Pose {
        p: PathBuf,
        q: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-shot coreset: two CSV files -> coreset JSON.
    Coreset {
        p: PathBuf,
        q: PathBuf,
        /// Center both sets before building (required for reuse under
        /// translated frames).
        #[arg(long)]
        center: bool,
        /// Rescale weights to sum to one.
        #[arg(long)]
        normalize: bool,
        /// Relative singular-value threshold for the rank decision.
        #[arg(long, default_value_t = 1e-9)]
        rank_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::ErrorTrial(args) => {
            let (cfg, format) = args.build()?;
            let report = run_error_trial(&cfg)?;
            report.emit(args.out.as_deref(), format)
        }
        Command::TimingTrial {
            n_sweep,
            d,
            d_sweep,
            n,
            repetitions,
            warmup,
            seed,
            out,
            format,
        } => {
            let cfg = TimingTrialConfig {
                n_list: n_sweep,
                d_fixed: d,
                d_list: d_sweep,
                n_fixed: n,
                repetitions,
                warmup,
                seed,
            };
            let report = run_timing_trial(&cfg)?;
            report.emit(out.as_deref(), format.parse()?)
        }
        Command::TrackingLoop {
            trial,
            threaded,
            include_latency,
        } => {
            let (cfg, format) = trial.build()?;
            let report = run_tracking_loop(&cfg, threaded, include_latency)?;
            report.emit(trial.out.as_deref(), format)
        }
        Command::Pose { p, q, out } => {
            let pset = PointSet::from_csv_path(&p)?;
            let qset = PointSet::from_csv_path(&q)?;
            let motion = estimate_pose(&pset, &qset, None)?;
            let mut text = serde_json::to_string_pretty(&motion.to_json_value())
                .map_err(Error::from)?;
            text.push('\n');
            write_out(out.as_ref(), &text)
        }
        Command::Coreset {
            p,
            q,
            center,
            normalize,
            rank_tol,
            out,
        } => {
            let mut pset = PointSet::from_csv_path(&p)?;
            let mut qset = PointSet::from_csv_path(&q)?;
            if center {
                pset = pset.translated(&centroid(&pset, None)?)?;
                qset = qset.translated(&centroid(&qset, None)?)?;
            }
            let coreset = PoseCoresetBuilder::new()
                .rank_tolerance(rank_tol)
                .normalize(normalize)
                .build(&pset, &qset)?;
            let mut text = coreset.to_json()?;
            if !text.ends_with('\n') {
                text.push('\n');
            }
            write_out(out.as_ref(), &text)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
