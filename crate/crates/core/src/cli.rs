//! Command-line front end: generate, run, train, eval, serve and replay.

use std::fs;
use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::RunConfig;
use crate::envserver;
use crate::harness::{
    self, eval_policy, eval_suite, format_table, parse_jsonl, plot_csv, render_step_table,
    render_svg, run_episode, write_jsonl, EpisodeMeta,
};
use crate::planner::PlannerRef;
use crate::scenegraph::Site;
use crate::trainer::train;
use crate::world::{generate_scene_run, scene_task, Cell, HouseSpec, Task};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn config(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "scenesearch",
    version,
    about = "Seedable object-search simulator with planners, reward model, trainer and evaluation harness"
)]
pub struct Cli {
    /// Log progress to stderr
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a house and write it as canonical JSON
    Generate(GenerateArgs),
    /// Run a single episode and print its step table
    Run(RunArgs),
    /// Train a student policy (few-shot SFT, then interleaved PPO and SFT)
    Train(TrainArgs),
    /// Evaluate a planner over the test suite
    Eval(EvalArgs),
    /// Serve the reset/step environment protocol
    Serve(ServeArgs),
    /// Render a recorded episode log
    Replay(ReplayArgs),
}

/// Flags shared by every subcommand that reads a run configuration.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// TOML run configuration
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Weight of the distance penalty
    #[arg(long, value_name = "LAMBDA", allow_negative_numbers = true)]
    pub lambda_efficiency: Option<f64>,
    /// Step budget per episode (evaluation and training rollouts)
    #[arg(long, value_name = "N")]
    pub max_steps: Option<u32>,
}

impl Overrides {
    fn resolve_with(&self, planner: &Option<PlannerRef>) -> Result<RunConfig, CliError> {
        let mut cfg = self.resolve()?;
        if let Some(p) = planner {
            cfg.planner = p.clone();
        }
        Ok(cfg)
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path).map_err(config)?,
            None => RunConfig::default(),
        };
        if let Some(l) = self.lambda_efficiency {
            cfg.reward.lambda_efficiency = l;
        }
        if let Some(n) = self.max_steps {
            cfg.max_steps = n;
            cfg.train.max_steps = n;
        }
        cfg.validate().map_err(config)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scene seed
    #[arg(long)]
    pub seed: u64,
    /// Object placement run (0 is the base house)
    #[arg(long, default_value_t = 0)]
    pub run: u64,
    /// TOML run configuration (only the [profile] section is used)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file (stdout if omitted)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the navigation graph as Graphviz DOT
    #[arg(long, value_name = "FILE")]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scene seed
    #[arg(long, default_value_t = 1001)]
    pub seed: u64,
    /// Run index within the scene
    #[arg(long, default_value_t = 0)]
    pub run: u64,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Planner: oracle, greedy, random[:seed], student:<ckpt> or remote:<host:port>
    #[arg(long)]
    pub planner: Option<PlannerRef>,
    /// Use this house file instead of generating one (needs --goal and --start)
    #[arg(long, value_name = "FILE", requires_all = ["goal", "start"])]
    pub house: Option<PathBuf>,
    /// Goal category for --house
    #[arg(long)]
    pub goal: Option<String>,
    /// Start cell "x,y" for --house
    #[arg(long, value_parser = parse_cell)]
    pub start: Option<Cell>,
    /// Append the episode record to this JSONL log
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Training seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for checkpoints, metrics and the config echo
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Evaluate the initial and trained policies on the test suite afterwards
    #[arg(long)]
    pub evaluate: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Planner: oracle, greedy, random[:seed], student:<ckpt> or remote:<host:port>
    #[arg(long)]
    pub planner: Option<PlannerRef>,
    /// Episode log (JSONL); the resolved config is echoed next to it
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Write per-episode CSV for plotting
    #[arg(long, value_name = "FILE")]
    pub emit_plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// TCP address to listen on
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub addr: String,
    /// Serve a single connection on stdin/stdout instead of TCP
    #[arg(long)]
    pub stdio: bool,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Episode log (JSONL)
    pub log: PathBuf,
    /// Index of the episode to render (all episodes if omitted)
    #[arg(long)]
    pub episode: Option<usize>,
    /// Write per-episode CSV for plotting
    #[arg(long, value_name = "FILE")]
    pub emit_plot_data: Option<PathBuf>,
    /// Write an SVG map trace of the selected episode (default: the first)
    #[arg(long, value_name = "FILE")]
    pub render_trace: Option<PathBuf>,
    /// House file for the trace background, for logs of hand-made houses
    #[arg(long, value_name = "FILE")]
    pub house: Option<PathBuf>,
}

fn parse_cell(s: &str) -> Result<Cell, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<i32>().map_err(|e| format!("{v:?}: {e}"));
    Ok(Cell(p(x)?, p(y)?))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn read_house(path: &Path) -> Result<HouseSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    HouseSpec::from_json(&text).map_err(config)
}

fn echo_path(log: &Path) -> PathBuf {
    log.with_extension("config.toml")
}

/// Runs a parsed command line, writing human output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| runtime(e);
    match cli.command {
        Command::Generate(a) => {
            let cfg = Overrides {
                config: a.config,
                ..Default::default()
            }
            .resolve()?;
            let house = generate_scene_run(a.seed, a.run, &cfg.profile).map_err(runtime)?;
            let json = house.to_canonical_json() + "\n";
            match &a.out {
                Some(p) => write_file(p, &json)?,
                None => out.write_all(json.as_bytes()).map_err(io)?,
            }
            if let Some(p) = &a.dot {
                let site = Site::new(house).map_err(runtime)?;
                write_file(p, &site.nav().to_dot(Some(&site.house)))?;
            }
        }
        Command::Run(a) => {
            let cfg = a.overrides.resolve_with(&a.planner)?;
            let (house, task, meta) = match &a.house {
                Some(path) => {
                    let house = read_house(path)?;
                    let task = Task {
                        goal: a.goal.clone().unwrap_or_default(),
                        start_cell: a.start.unwrap_or(Cell(0, 0)),
                    };
                    let meta = EpisodeMeta {
                        scene_seed: house.seed,
                        run: 0,
                        profile: None,
                    };
                    (house, task, meta)
                }
                None => {
                    let (house, task) = scene_task(a.seed, a.run, &cfg.profile).map_err(runtime)?;
                    let meta = EpisodeMeta {
                        scene_seed: a.seed,
                        run: a.run,
                        profile: Some(cfg.profile.clone()),
                    };
                    (house, task, meta)
                }
            };
            let site = Site::new(house).map_err(config)?;
            let mut planner = cfg.planner.build().map_err(config)?;
            let record =
                run_episode(planner.as_mut(), site, &task, &cfg.episode(), &meta).map_err(|e| match e {
                    harness::HarnessError::Unreachable { .. } | harness::HarnessError::Config(_) => config(e),
                    other => runtime(other),
                })?;
            out.write_all(render_step_table(&record).as_bytes()).map_err(io)?;
            if let Some(p) = &a.out {
                let mut f = fs::OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .map_err(|e| runtime(format!("{}: {e}", p.display())))?;
                f.write_all(write_jsonl(std::slice::from_ref(&record)).as_bytes())
                    .map_err(io)?;
            }
            if let Some(f) = &record.fault {
                return Err(runtime(format!("episode aborted: {f}")));
            }
        }
        Command::Train(a) => {
            let mut cfg = a.overrides.resolve()?;
            if let Some(seed) = a.seed {
                cfg.train.seed = seed;
            }
            let clock = Instant::now();
            let outcome = train(&cfg.train, &cfg.reward, &cfg.profile).map_err(runtime)?;
            write_file(&a.out.join("policy.json"), &outcome.policy.to_checkpoint())?;
            write_file(&a.out.join("initial.json"), &outcome.initial.to_checkpoint())?;
            write_file(&a.out.join("metrics.csv"), &outcome.metrics_csv())?;
            write_file(&a.out.join("config.toml"), &cfg.to_toml())?;
            writeln!(
                out,
                "trained in {:.1} s\ncheckpoint {} (digest {})\ndataset digest {}",
                clock.elapsed().as_secs_f64(),
                a.out.join("policy.json").display(),
                outcome.policy.digest(),
                outcome.dataset_digest.as_deref().unwrap_or("none")
            )
            .map_err(io)?;
            if a.evaluate {
                let suite = cfg.suite();
                let rows = [
                    eval_policy(&outcome.initial, "untrained", &suite).map_err(runtime)?.0,
                    eval_policy(&outcome.policy, "trained", &suite).map_err(runtime)?.0,
                ];
                out.write_all(format_table(&rows).as_bytes()).map_err(io)?;
            }
        }
        Command::Eval(a) => {
            let cfg = a.overrides.resolve_with(&a.planner)?;
            let (summary, records) = eval_suite(&cfg.planner, &cfg.suite()).map_err(|e| match e {
                harness::HarnessError::Planner(_) | harness::HarnessError::Config(_) => config(e),
                other => runtime(other),
            })?;
            out.write_all(format_table(&[summary]).as_bytes()).map_err(io)?;
            if let Some(p) = &a.out {
                write_file(p, &write_jsonl(&records))?;
                write_file(&echo_path(p), &cfg.to_toml())?;
            }
            if let Some(p) = &a.emit_plot_data {
                write_file(p, &plot_csv(&records))?;
            }
            let faults = records.iter().filter(|r| r.fault.is_some()).count();
            if faults > 0 {
                return Err(runtime(format!("{faults} episodes aborted by planner faults")));
            }
        }
        Command::Serve(a) => {
            if a.stdio {
                envserver::serve_stdio().map_err(io)?;
            } else {
                let listener = TcpListener::bind(&a.addr).map_err(|e| config(format!("{}: {e}", a.addr)))?;
                log::info!("listening on {}", listener.local_addr().map_err(io)?);
                envserver::serve_listener(listener).map_err(io)?;
            }
        }
        Command::Replay(a) => {
            let text = fs::read_to_string(&a.log).map_err(|e| config(format!("{}: {e}", a.log.display())))?;
            let records = parse_jsonl(&text).map_err(config)?;
            if records.is_empty() {
                return Err(config(format!("{} holds no episodes", a.log.display())));
            }
            let selected: Vec<_> = match a.episode {
                Some(i) => vec![records
                    .get(i)
                    .ok_or_else(|| config(format!("episode {i} out of range (log has {})", records.len())))?],
                None => records.iter().collect(),
            };
            for r in &selected {
                out.write_all(render_step_table(r).as_bytes()).map_err(io)?;
            }
            if let Some(p) = &a.emit_plot_data {
                let owned: Vec<_> = selected.iter().map(|r| (*r).clone()).collect();
                write_file(p, &plot_csv(&owned))?;
            }
            if let Some(p) = &a.render_trace {
                let r = selected[0];
                let house = match (&a.house, &r.profile) {
                    (Some(path), _) => Some(read_house(path)?),
                    (None, Some(profile)) => Some(generate_scene_run(r.scene_seed, r.run, profile).map_err(runtime)?),
                    (None, None) => None,
                };
                write_file(p, &render_svg(r, house.as_ref()))?;
            }
        }
    }
    Ok(())
}
