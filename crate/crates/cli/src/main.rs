use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use lineage_ilp::eval::EvalConfig;
use lineage_ilp::io;
use lineage_ilp::pipeline::{self, Annotated, PipelineConfig};
use lineage_ilp::proposals::{Frame, Proposal};
use lineage_ilp::sim::simulate;
use lineage_ilp::solve::{Backend, Status};
use lineage_ilp::Error;

/// Joint cell detection and lineage tracking by exact proposal selection.
#[derive(Parser)]
#[command(name = "lineage-ilp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic annotated dataset to OUT.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate proposals for a dataset into OUT/proposals.jsonl.
    Propose {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the classifiers on an annotated dataset into OUT/model.json.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Proposals to label; generated from the config when absent.
        #[arg(long)]
        proposals: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Track a dataset into OUT/tracks.txt and OUT/seg/.
    Track {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        proposals: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a tracking result against a dataset's annotation.
    Eval {
        /// Only the `eval` section is used.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        /// Directory holding tracks.txt and seg/.
        #[arg(long)]
        result: PathBuf,
        /// Also score detection on these proposals.
        #[arg(long)]
        proposals: Option<PathBuf>,
        /// Also report graph recall (requires --proposals).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Where report.json and report.txt go; defaults to the result directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate, propose, train, track and evaluate in one run.
    E2e {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the tracking graph and write OUT/graph.json.
    DumpGraph {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        proposals: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (0 = all cores); overrides the config.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) => 2,
            Error::Io { .. } | Error::MissingGroundTruth(_) => 3,
            Error::Format { .. } | Error::Version { .. } | Error::Json(_) | Error::Tracks(_) => 4,
            Error::NoIncumbent => 5,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn load_config(path: &Path) -> CliResult<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    PipelineConfig::from_json(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())).into(),
        e => e.into(),
    })
}

fn setup(common: &Common) -> CliResult<PipelineConfig> {
    let mut cfg = load_config(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(n) = common.threads {
        cfg.threads = n;
    }
    cfg.validate()?;
    init_threads(cfg.threads)?;
    Ok(cfg)
}

#[cfg(feature = "parallel")]
fn init_threads(n: usize) -> CliResult<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure {
            code: 1,
            message: format!("thread pool: {e}"),
        })
}

#[cfg(not(feature = "parallel"))]
fn init_threads(n: usize) -> CliResult<()> {
    if n > 1 {
        log::warn!("built without the parallel feature; ignoring threads = {n}");
    }
    Ok(())
}

fn model_path(dir: &Path) -> PathBuf {
    dir.join("model.json")
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.into(),
        source: e,
    })?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    Ok(())
}

/// Proposals from a file, or from the configured generator.
fn proposals_for(
    cfg: &PipelineConfig,
    data: &io::Dataset,
    file: Option<&Path>,
    training: bool,
) -> CliResult<Vec<Proposal>> {
    Ok(match file {
        Some(path) => io::read_proposals(path)?,
        None if training => pipeline::propose(
            cfg,
            &data.frames,
            data.gt.as_ref(),
            &cfg.sim.training_corruption,
            "train-corrupt/0",
        )?,
        None => pipeline::propose(cfg, &data.frames, data.gt.as_ref(), &cfg.sim.corruption, "corrupt")?,
    })
}

fn dims(frames: &[Frame]) -> (usize, usize) {
    frames.first().map_or((0, 0), |f| (f.width, f.height))
}

fn graph_for(
    common: &Common,
    data: &Path,
    model: &Path,
    proposals: Option<&Path>,
) -> CliResult<(
    PipelineConfig,
    io::Dataset,
    Vec<Proposal>,
    lineage_ilp::graph::TrackingGraph,
)> {
    let cfg = setup(common)?;
    let dataset = io::read_dataset(data)?;
    let props = proposals_for(&cfg, &dataset, proposals, false)?;
    let models = io::read_model(model_path(model))?;
    let g = pipeline::build(&cfg, &models, &dataset.frames, &props)?;
    Ok((cfg, dataset, props, g))
}

/// Exit code 5 when the exact search stopped at a limit with a known gap.
fn check_status(cfg: &PipelineConfig, status: Status) -> CliResult<()> {
    match status {
        Status::Feasible { gap: Some(gap) } if cfg.solve.backend == Backend::Exact => Err(Failure {
            code: 5,
            message: format!("solver stopped at its limit; outputs hold the incumbent with gap {gap:.6}"),
        }),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { common, out } => {
            let cfg = setup(&common)?;
            let (frames, gt) = simulate(&cfg.sim_config())?;
            io::write_dataset(&out, &frames, Some(&gt))?;
            info!(
                "{} frames, {} tracks written to {}",
                frames.len(),
                gt.tracks.len(),
                out.display()
            );
        }
        Command::Propose { common, data, out } => {
            let cfg = setup(&common)?;
            let dataset = io::read_dataset(&data)?;
            let props = proposals_for(&cfg, &dataset, None, false)?;
            create_dir(&out)?;
            io::write_proposals(out.join("proposals.jsonl"), &props)?;
        }
        Command::Train {
            common,
            data,
            proposals,
            out,
        } => {
            let cfg = setup(&common)?;
            let dataset = io::read_dataset(&data)?;
            let gt = dataset
                .gt
                .as_ref()
                .ok_or_else(|| Error::MissingGroundTruth(format!("{} has no gt/ directory", data.display())))?;
            let props = proposals_for(&cfg, &dataset, proposals.as_deref(), true)?;
            let models = pipeline::train(
                &cfg,
                &[Annotated {
                    frames: &dataset.frames,
                    gt,
                    props: &props,
                }],
            )?;
            create_dir(&out)?;
            io::write_model(model_path(&out), &models)?;
        }
        Command::Track {
            common,
            data,
            model,
            proposals,
            out,
        } => {
            let (cfg, dataset, props, g) = graph_for(&common, &data, &model, proposals.as_deref())?;
            let (w, h) = dims(&dataset.frames);
            let tracked = pipeline::solve(&g, &cfg.solve, &props, w, h)?;
            io::write_result(&out, &tracked.result)?;
            check_status(&cfg, tracked.solution.status)?;
        }
        Command::Eval {
            config,
            data,
            result,
            proposals,
            graph,
            out,
        } => {
            let eval_cfg = match &config {
                Some(path) => load_config(path)?.eval,
                None => EvalConfig::default(),
            };
            let dataset = io::read_dataset(&data)?;
            let gt = dataset
                .gt
                .ok_or_else(|| Error::MissingGroundTruth(format!("{} has no gt/ directory", data.display())))?;
            let res = io::read_result(&result)?;
            let props = proposals.as_deref().map(io::read_proposals).transpose()?;
            let g = graph.as_deref().map(io::read_graph).transpose()?;
            if g.is_some() && props.is_none() {
                return Err(Error::Config("--graph needs --proposals".into()).into());
            }
            let report = pipeline::evaluate(&eval_cfg, &gt, props.as_deref(), g.as_ref(), Some(&res))?;
            let out = out.unwrap_or(result);
            create_dir(&out)?;
            io::write_report(out.join("report.json"), &report)?;
            let text = report.to_text();
            write_text(&out.join("report.txt"), &text)?;
            print!("{text}");
        }
        Command::E2e { common, out } => {
            let cfg = setup(&common)?;
            let run = pipeline::e2e(&cfg)?;
            io::write_dataset(out.join("data"), &run.frames, Some(&run.gt))?;
            io::write_proposals(out.join("proposals.jsonl"), &run.props)?;
            io::write_model(model_path(&out), &run.models)?;
            io::write_graph(out.join("graph.json"), &run.graph)?;
            io::write_result(&out, &run.tracked.result)?;
            io::write_report(out.join("report.json"), &run.report)?;
            let text = run.report.to_text();
            write_text(&out.join("report.txt"), &text)?;
            print!("{text}");
            check_status(&cfg, run.tracked.solution.status)?;
        }
        Command::DumpGraph {
            common,
            data,
            model,
            proposals,
            out,
        } => {
            let (_, _, _, g) = graph_for(&common, &data, &model, proposals.as_deref())?;
            create_dir(&out)?;
            io::write_graph(out.join("graph.json"), &g)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LINEAGE_ILP_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
