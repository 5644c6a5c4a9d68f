//! `seqweak` — simulate and analyze sequential weak polarization
//! measurements from the command line.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use seqweak::weakform::approximation_error_scan;
use seqweak_cli::emit::{render_table, write_result, EmitFormat};
use seqweak_cli::frames::{load_frames, save_frames};
use seqweak_cli::harness::{
    analyze_frames, run_point, run_sweep, simulate_frames, ExperimentSpec, Mode, RowStatus,
    SweepRow,
};
use seqweak_cli::specfile::load_spec;

#[derive(Parser)]
#[command(
    name = "seqweak",
    about = "Sequential weak-measurement simulator: two weak polarization projectors, \
             post-selection, pixelated detection, weak-value recovery",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Analytic,
    Exact,
    Sampled,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Analytic => Mode::Analytic,
            ModeArg::Exact => Mode::Exact,
            ModeArg::Sampled => Mode::Sampled,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Plotdata,
}

impl From<FormatArg> for EmitFormat {
    fn from(f: FormatArg) -> EmitFormat {
        match f {
            FormatArg::Table => EmitFormat::Table,
            FormatArg::Plotdata => EmitFormat::PlotData,
        }
    }
}

/// Flags shared by every spec-driven subcommand.
#[derive(Args)]
struct SpecArgs {
    /// Experiment spec file (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Override the spec's simulation mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Override the detector seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl SpecArgs {
    fn load(&self) -> anyhow::Result<ExperimentSpec> {
        let mut spec = load_spec(&self.spec)
            .with_context(|| format!("loading spec {}", self.spec.display()))?;
        if let Some(mode) = self.mode {
            spec.mode = mode.into();
        }
        if let Some(seed) = self.seed {
            if let Some(det) = spec.detector.as_mut() {
                det.seed = seed;
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full θ sweep of a spec and emit the result.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output directory; results print to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output flavor.
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
    },
    /// Run a single measurement angle and print the recovered weak values.
    Point {
        #[command(flatten)]
        spec: SpecArgs,
        /// Measurement angle θ in radians.
        #[arg(long)]
        theta: f64,
    },
    /// Simulate detector frames at one angle and write them as files.
    Frames {
        #[command(flatten)]
        spec: SpecArgs,
        /// Measurement angle θ in radians.
        #[arg(long)]
        theta: f64,
        /// Directory for frame_0000.txt, frame_0001.txt, …
        #[arg(long)]
        out: PathBuf,
    },
    /// Ingest frame files, estimate moments, and recover weak values.
    Analyze {
        #[command(flatten)]
        spec: SpecArgs,
        /// Measurement angle θ the frames were taken at, in radians.
        #[arg(long)]
        theta: f64,
        /// Directory of frame files.
        #[arg(long)]
        frames: PathBuf,
    },
    /// Scan the first-order approximation error over coupling ratios.
    Scan {
        #[command(flatten)]
        spec: SpecArgs,
        /// Measurement angle θ in radians (default: midpoint of the grid).
        #[arg(long)]
        theta: Option<f64>,
        /// Comma-separated g/σ ratios.
        #[arg(long, default_value = "0.3,0.15,0.075,0.0375", value_delimiter = ',')]
        ratios: Vec<f64>,
    },
}

fn print_row(row: &SweepRow) {
    println!("theta            = {:.6}", row.theta);
    if row.status == RowStatus::Degenerate {
        println!(
            "status           = degenerate (post-selection orthogonal; weak values undefined)"
        );
        return;
    }
    let fmt = |m: seqweak::weakform::Measured| {
        if m.stderr > 0.0 {
            format!("{:+.6} ± {:.6}", m.value, m.stderr)
        } else {
            format!("{:+.6}", m.value)
        }
    };
    println!(
        "Re<Pi_psi>_w     = {}   (analytic {:+.6})",
        fmt(row.pi_psi),
        row.analytic.pi_psi
    );
    println!(
        "Re<Pi_V>_w       = {}   (analytic {:+.6})",
        fmt(row.pi_v),
        row.analytic.pi_v
    );
    println!(
        "Re<Pi_psi Pi_V>_w= {}   (analytic {:+.6})",
        fmt(row.seq),
        row.analytic.seq
    );
    if row.postselect_prob.is_finite() {
        println!("postselect prob  = {:.6}", row.postselect_prob);
    }
    let anomalous = [row.pi_psi.value, row.pi_v.value, row.seq.value]
        .iter()
        .any(|v| v.abs() > 1.0);
    if anomalous {
        println!("note: at least one weak value lies outside [0, 1] (anomalous)");
    }
}

fn warn_if_strong(spec: &ExperimentSpec) {
    if let Some(w) = spec.weakness_warning() {
        eprintln!("warning: {w}");
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep { spec, out, format } => {
            let spec = spec.load()?;
            warn_if_strong(&spec);
            let result = run_sweep(&spec)?;
            eprintln!(
                "sweep: {} points ({} degenerate), max |measured - analytic|: \
                 pi_psi {:.3e}, pi_v {:.3e}, seq {:.3e}",
                result.rows.len(),
                result.summary.degenerate_rows,
                result.summary.max_dev_pi_psi,
                result.summary.max_dev_pi_v,
                result.summary.max_dev_seq,
            );
            match out {
                None => print!("{}", render_table(&result)?),
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let name = match format {
                        FormatArg::Table => "sweep.csv",
                        FormatArg::Plotdata => "sweep.dat",
                    };
                    let path = dir.join(name);
                    write_result(&result, format.into(), &path)?;
                    println!("{}", path.display());
                }
            }
        }
        Command::Point { spec, theta } => {
            let spec = spec.load()?;
            warn_if_strong(&spec);
            let row = run_point(&spec, theta)?;
            print_row(&row);
        }
        Command::Frames { spec, theta, out } => {
            let spec = spec.load()?;
            let frames = simulate_frames(&spec, theta)?;
            let paths = save_frames(&out, &frames)?;
            println!("wrote {} frames to {}", paths.len(), out.display());
        }
        Command::Analyze {
            spec,
            theta,
            frames,
        } => {
            let spec = spec.load()?;
            warn_if_strong(&spec);
            let loaded = load_frames(&frames)?;
            eprintln!(
                "analyzing {} frames from {}",
                loaded.len(),
                frames.display()
            );
            let cfg = spec.coupling_config(theta);
            let row = analyze_frames(&cfg, &loaded)?;
            print_row(&row);
        }
        Command::Scan {
            spec,
            theta,
            ratios,
        } => {
            let spec = spec.load()?;
            if ratios.is_empty() {
                bail!("need at least one coupling ratio");
            }
            let theta = theta.unwrap_or_else(|| {
                let g = &spec.theta_grid;
                g[g.len() / 2]
            });
            let cfg = spec.coupling_config(theta);
            let report = approximation_error_scan(&cfg, &ratios)?;
            println!("ratio        dev_pi_psi   dev_pi_v     dev_seq");
            for row in &report.rows {
                println!(
                    "{:<12.6} {:<12.3e} {:<12.3e} {:<12.3e}",
                    row.ratio, row.dev_pi_psi, row.dev_pi_v, row.dev_seq
                );
            }
            let slope = |s: Option<f64>| match s {
                Some(v) => format!("{v:.3}"),
                None => "n/a (deviation at exact-arithmetic floor)".to_string(),
            };
            println!("log-log slope pi_psi: {}", slope(report.slope_pi_psi));
            println!("log-log slope pi_v  : {}", slope(report.slope_pi_v));
            println!("log-log slope seq   : {}", slope(report.slope_seq));
            println!(
                "first-order deviation consistent with quadratic order: {}",
                if report.order_ok { "yes" } else { "no" }
            );
        }
    }
    Ok(())
}
