use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use smtmvt::eval::{default_thresholds, emit_plot, read_curves_csv, success_curve, write_curves_csv, NamedCurve};
use smtmvt::io::{
    load_sequence, read_config, read_ground_truth, scale_boxes, write_synth, Metrics, RunConfig, RunManifest,
    SequenceSource, SynthConfig,
};
use smtmvt::solver::{read_problem_file, solve, write_problem_file, SolverConfig, StepSize};
use smtmvt::tracker::track_sequence_with;

#[derive(Parser)]
#[command(name = "smtmvt", version, about = "Multi-task multi-view sparse particle-filter tracker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track one sequence and write a run manifest.
    Track {
        /// Frame directory, or an OTB sequence directory containing img/.
        #[arg(long)]
        seq: PathBuf,
        /// Ground-truth file; defaults to groundtruth_rect.txt in --seq.
        #[arg(long)]
        gt: Option<PathBuf>,
        /// key = value config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Sequence name stored in the manifest.
        #[arg(long)]
        name: Option<String>,
        /// Save the sparse-coding problem of the last frame.
        #[arg(long)]
        dump_problem: Option<PathBuf>,
        /// Print one line per frame.
        #[arg(long)]
        verbose: bool,
    },
    /// Score a manifest: average overlap, AUC and the success-curve CSV.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        /// Ground truth at source resolution; overrides the one in the manifest.
        #[arg(long)]
        gt: Option<PathBuf>,
        /// Curve CSV path; defaults to <manifest>.curve.csv.
        #[arg(long)]
        curve_out: Option<PathBuf>,
    },
    /// Render curve CSVs into <out>.csv and <out>.svg.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        curves: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the solver on a saved problem and print its objective trace.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 0.25)]
        gamma: f64,
        /// "auto" or a positive step size.
        #[arg(long, default_value = "auto")]
        sigma: StepSize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
    },
    /// Write the synthetic benchmark sequence.
    Synth {
        #[arg(long, default_value_t = 100)]
        frames: usize,
        /// First occluded frame (0-based); defaults to the middle frame.
        #[arg(long)]
        occlude_at: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Track {
            seq,
            gt,
            config,
            seed,
            out,
            name,
            dump_problem,
            verbose,
        } => track(seq, gt, config, seed, &out, name, dump_problem, verbose),
        Command::Eval { manifest, gt, curve_out } => eval(&manifest, gt, curve_out),
        Command::Plot { curves, out } => plot(&curves, &out),
        Command::Solve {
            problem,
            lambda,
            gamma,
            sigma,
            tol,
            max_iter,
        } => {
            let cfg = SolverConfig {
                lambda,
                gamma,
                sigma,
                tol,
                max_iter,
                ..SolverConfig::default()
            };
            solve_cmd(&problem, &cfg)
        }
        Command::Synth {
            frames,
            occlude_at,
            noise,
            seed,
            out,
        } => {
            let cfg = SynthConfig {
                frames,
                occlude_at: Some(occlude_at.unwrap_or(frames / 2)),
                noise,
                seed,
                ..SynthConfig::default()
            };
            write_synth(&cfg, &out).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {frames} frames to {}", out.display());
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn track(
    seq: PathBuf,
    gt: Option<PathBuf>,
    config: Option<PathBuf>,
    seed: u64,
    out: &Path,
    name: Option<String>,
    dump_problem: Option<PathBuf>,
    verbose: bool,
) -> Result<()> {
    let run_cfg = match &config {
        Some(p) => read_config(p).with_context(|| format!("reading config {}", p.display()))?,
        None => RunConfig::default(),
    };
    let src = SequenceSource {
        frames: seq,
        ground_truth: gt,
        name,
    };
    let sequence = load_sequence(&src, run_cfg.working).context("loading sequence")?;
    for w in &sequence.warnings {
        eprintln!("warning: {w}");
    }
    let (record, tracker) = track_sequence_with(
        sequence.frames(),
        sequence.ground_truth[0],
        &run_cfg.tracker,
        seed,
        |i, o| {
            if verbose {
                eprintln!(
                    "frame {:>5}  box {:.2} {:.2} {:.2} {:.2}  likelihood {:.3e}{}",
                    i + 1,
                    o.bbox.x,
                    o.bbox.y,
                    o.bbox.w,
                    o.bbox.h,
                    o.likelihood,
                    if o.degenerate { "  (held)" } else { "" }
                );
            }
        },
    )?;
    if let Some(path) = dump_problem {
        match tracker.last_problem() {
            Some(p) => write_problem_file(&path, p)?,
            None => eprintln!("warning: single-frame sequence, no problem to dump"),
        }
    }
    let held = record.degenerate.iter().filter(|d| **d).count();
    let manifest = RunManifest::new(
        sequence.name.clone(),
        seed,
        run_cfg,
        sequence.source_size,
        sequence.scale,
        record,
        Some(sequence.ground_truth.clone()),
    )?;
    manifest.write(out).with_context(|| format!("writing {}", out.display()))?;
    println!("tracked {} frames ({held} held) -> {}", manifest.boxes.len(), out.display());
    if let Some(m) = manifest.metrics {
        println!("average_overlap {:.4}", m.average_overlap);
        println!("auc {:.4}", m.auc);
    }
    Ok(())
}

fn eval(manifest_path: &Path, gt: Option<PathBuf>, curve_out: Option<PathBuf>) -> Result<()> {
    let manifest = RunManifest::read(manifest_path).with_context(|| format!("reading {}", manifest_path.display()))?;
    let truth = match gt {
        Some(p) => {
            let raw = read_ground_truth(&p)?;
            scale_boxes(&raw, manifest.scale.0, manifest.scale.1)
        }
        None => match manifest.ground_truth.clone() {
            Some(g) => g,
            None => bail!("manifest has no ground truth; pass --gt"),
        },
    };
    let n = manifest.boxes.len().min(truth.len());
    if n != manifest.boxes.len() || n != truth.len() {
        eprintln!(
            "warning: {} tracked boxes but {} ground-truth boxes; scoring the first {n}",
            manifest.boxes.len(),
            truth.len()
        );
    }
    let (boxes, truth) = (&manifest.boxes[..n], &truth[..n]);
    let metrics = Metrics::compute(boxes, truth)?;
    let curve = success_curve(boxes, truth, &default_thresholds())?;
    let path = curve_out.unwrap_or_else(|| {
        let mut s = manifest_path.as_os_str().to_owned();
        s.push(".curve.csv");
        PathBuf::from(s)
    });
    let named = NamedCurve {
        name: manifest.sequence.clone(),
        curve,
    };
    let file = std::fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    write_curves_csv(std::io::BufWriter::new(file), &[named])?;
    println!("average_overlap {:.4}", metrics.average_overlap);
    println!("auc {:.4}", metrics.auc);
    println!("curve {}", path.display());
    Ok(())
}

fn plot(curve_files: &[PathBuf], out: &Path) -> Result<()> {
    let mut curves = Vec::new();
    for path in curve_files {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        curves.extend(read_curves_csv(&text, path)?);
    }
    let (csv, svg) = emit_plot(&curves, out)?;
    for c in smtmvt::eval::sorted_by_auc(&curves) {
        println!("{}", smtmvt::eval::legend_label(c));
    }
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}

fn solve_cmd(problem: &Path, cfg: &SolverConfig) -> Result<()> {
    let p = read_problem_file(problem).with_context(|| format!("reading {}", problem.display()))?;
    let sol = solve(&p, cfg)?;
    let mut out = std::io::BufWriter::new(std::io::stdout().lock());
    writeln!(out, "iteration,objective")?;
    for (i, f) in sol.objective_trace.iter().enumerate() {
        writeln!(out, "{i},{f:?}")?;
    }
    out.flush()?;
    eprintln!(
        "best objective {:?} after {} iterations (converged: {}, step {:e})",
        sol.best_objective, sol.iterations, sol.converged, sol.step
    );
    Ok(())
}
