//! `hvacrl` — benchmark CLI for setpoint-based HVAC control agents.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 runtime
//! error (for example a tile layout that exceeds the Q-table memory cap).

use clap::{Args, Parser, Subcommand};
use hvacrl::config::{parse_weather_source, ConfigError, ConfigFile};
use hvacrl::env::{BuildingKind, Environment, ObsSource};
use hvacrl::harness::{
    self, AgentKind, ExperimentConfig, HarnessError, Metrics, ResultRecord, WeatherSource,
};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        let code = match &e {
            HarnessError::Io { .. } => EXIT_IO,
            HarnessError::Precondition(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hvacrl",
    version,
    about = "Benchmark tabular Q-learning and DQN setpoint control on simulated buildings",
    after_help = "Weather sources: a path to an .epw file, synthetic:hot, synthetic:cool, \
or synthetic:<profile>:<hours>. Results land under --out, the HVACRL_OUT \
variable, or ./runs, in a fresh run-<timestamp> directory."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the experiment commands; each overrides the matching
/// config-file field.
#[derive(Args)]
struct Overrides {
    /// JSON experiment config; omitted means all defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed [default: from config file, else 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Agent: fixed, random, qlearning, or dqn [default: from config file]
    #[arg(long)]
    agent: Option<String>,
    /// Weather source [default: from config file, else synthetic:hot]
    #[arg(long)]
    weather: Option<String>,
    /// Building: warehouse or datacenter [default: from config file]
    #[arg(long)]
    building: Option<String>,
    /// Training episodes [default: from config file, else 50]
    #[arg(long)]
    episodes: Option<u32>,
    /// Output root [default: $HVACRL_OUT, else ./runs]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Roll a constant action and write a per-step trace CSV.
    Simulate {
        /// Building: warehouse or datacenter.
        #[arg(long = "env", default_value = "warehouse")]
        env: String,
        /// Weather source.
        #[arg(long, default_value = "synthetic:hot")]
        weather: String,
        /// Constant action index, 0-9.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=9))]
        action: u8,
        /// Horizon in hours.
        #[arg(long, default_value_t = 24)]
        hours: u32,
        /// Control timestep in seconds.
        #[arg(long, default_value_t = 900.0)]
        dt: f64,
        /// Random seed for the initial zone temperatures.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace CSV path [default: <out-root>/run-<timestamp>/trace.csv]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train an agent, evaluate it on the held-out split, write results.
    Train {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate a saved agent artifact on the held-out split.
    Evaluate {
        /// Artifact written by `train` (qtable.json or dqn.ckpt).
        #[arg(long = "agent-artifact")]
        agent_artifact: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one of the ablation suites.
    Ablate {
        /// Suite: obs, reward, or tiles.
        #[arg(long)]
        suite: String,
        /// Parallel workers, each running one configuration.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Aggregate results.csv files under a directory into one table.
    Report {
        /// Directory to scan recursively.
        #[arg(long)]
        dir: PathBuf,
    },
    /// Print the default config file with every key and default value.
    Schema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            env,
            weather,
            action,
            hours,
            dt,
            seed,
            out,
        } => cmd_simulate(&env, &weather, action as usize, hours, dt, seed, out),
        Command::Train { overrides } => cmd_train(&overrides),
        Command::Evaluate {
            agent_artifact,
            overrides,
        } => cmd_evaluate(&agent_artifact, &overrides),
        Command::Ablate {
            suite,
            jobs,
            overrides,
        } => cmd_ablate(&suite, jobs, &overrides),
        Command::Report { dir } => cmd_report(&dir),
        Command::Schema => {
            println!("{}", ConfigFile::schema_json());
            Ok(())
        }
    }
}

/// Output root: --out flag, then HVACRL_OUT, then ./runs.
fn out_root(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os("HVACRL_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn run_dir(root: &Path) -> Result<PathBuf, CliError> {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .unwrap_or_default();
    let dir = root.join(format!("run-{}-{:09}", now.as_secs(), now.subsec_nanos()));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn parse_building(s: &str) -> Result<BuildingKind, CliError> {
    match s {
        "warehouse" => Ok(BuildingKind::Warehouse),
        "datacenter" => Ok(BuildingKind::Datacenter),
        other => Err(CliError::config(format!(
            "unknown building {other:?}; use warehouse or datacenter"
        ))),
    }
}

fn parse_agent(s: &str) -> Result<AgentKind, CliError> {
    match s {
        "fixed" => Ok(AgentKind::Fixed),
        "random" => Ok(AgentKind::Random),
        "qlearning" => Ok(AgentKind::QLearning),
        "dqn" => Ok(AgentKind::Dqn),
        other => Err(CliError::config(format!(
            "unknown agent {other:?}; use fixed, random, qlearning, or dqn"
        ))),
    }
}

/// Loads the config file and applies flag overrides (flags win).
fn resolve_config(overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut file = match &overrides.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
            ConfigFile::from_json(&text)?
        }
        None => ConfigFile::default(),
    };
    if let Some(seed) = overrides.seed {
        file.seed = seed;
    }
    if let Some(agent) = &overrides.agent {
        file.agent = parse_agent(agent)?;
    }
    if let Some(weather) = &overrides.weather {
        file.weather = weather.clone();
    }
    if let Some(building) = &overrides.building {
        file.building = parse_building(building)?;
    }
    if let Some(episodes) = overrides.episodes {
        file.episodes = episodes;
    }
    Ok(file.to_experiment()?)
}

fn config_out_dir(overrides: &Overrides) -> Result<Option<PathBuf>, CliError> {
    Ok(match &overrides.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
            ConfigFile::from_json(&text)?.out_dir
        }
        None => None,
    })
}

fn cmd_simulate(
    env_name: &str,
    weather: &str,
    action: usize,
    hours: u32,
    dt: f64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let building = parse_building(env_name)?;
    let source = parse_weather_source(weather)?;
    // The horizon needs hours+1 hourly records; synthetic sources are
    // generated to exactly that length.
    let series = match source {
        WeatherSource::Synthetic { profile, .. } => WeatherSource::Synthetic {
            profile,
            hours: hours as usize + 1,
        }
        .load(seed)?,
        epw @ WeatherSource::Epw { .. } => {
            let series = epw.load(seed)?;
            if series.len() < hours as usize + 1 {
                return Err(CliError::config(format!(
                    "weather file has {} hourly records but the horizon needs {}",
                    series.len(),
                    hours + 1
                )));
            }
            series
        }
    };
    let mut env = Environment::new(
        building,
        series,
        hvacrl::env::RewardParams::default(),
        dt,
        seed,
    )
    .map_err(|e| CliError {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    })?;
    env.action_table().decode(action).map_err(|e| CliError::config(e.to_string()))?;

    let trace_path = match out {
        Some(p) => p,
        None => run_dir(&out_root(None))?.join("trace.csv"),
    };
    if let Some(parent) = trace_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::io(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    let mut f = std::fs::File::create(&trace_path)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", trace_path.display())))?;

    let spec = env.spec().clone();
    let temp_cols: Vec<(usize, String)> = spec
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v.source, ObsSource::ZoneTemp(_)))
        .map(|(i, v)| (i, v.name.clone()))
        .collect();
    let sp_cols: Vec<(usize, String)> = spec
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| {
            matches!(
                v.source,
                ObsSource::HeatingSetpoint(_) | ObsSource::CoolingSetpoint(_)
            )
        })
        .map(|(i, v)| (i, v.name.clone()))
        .collect();

    let mut header = vec!["time_s".to_string(), "t_out".to_string()];
    header.extend(temp_cols.iter().map(|(_, n)| n.clone()));
    header.extend(sp_cols.iter().map(|(_, n)| n.clone()));
    header.push("p_total".to_string());
    header.push("reward".to_string());
    let write_err =
        |e: std::io::Error| CliError::io(format!("cannot write {}: {e}", trace_path.display()));
    writeln!(f, "{}", header.join(",")).map_err(write_err)?;

    let t_out_idx = spec
        .vars()
        .iter()
        .position(|v| v.name == "t_out")
        .expect("specs carry t_out");
    let steps = ((hours as f64) * 3600.0 / dt).floor() as usize;
    for _ in 0..steps.min(env.episode_len()) {
        let r = env.step(action).map_err(|e| CliError {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        })?;
        let mut row = vec![
            format!("{}", r.info.sim_time),
            format!("{:.4}", r.observation.values[t_out_idx]),
        ];
        for (i, _) in &temp_cols {
            row.push(format!("{:.4}", r.observation.values[*i]));
        }
        for (i, _) in &sp_cols {
            row.push(format!("{}", r.observation.values[*i]));
        }
        row.push(format!("{:.3}", r.info.p_total));
        row.push(format!("{:.6}", r.reward));
        writeln!(f, "{}", row.join(",")).map_err(write_err)?;
    }
    println!("wrote {}", trace_path.display());
    Ok(())
}

fn print_metrics(label: &str, m: &Metrics) {
    println!(
        "{label}: energy {:.2} kWh, violations {:.2} %, mean reward {:.4}",
        m.energy_kwh, m.violation_pct, m.mean_eval_reward
    );
}

fn finalize(records: &[ResultRecord], overrides: &Overrides) -> Result<PathBuf, CliError> {
    let file_out = config_out_dir(overrides)?;
    let root = overrides
        .out
        .clone()
        .or(file_out)
        .unwrap_or_else(|| out_root(None));
    let dir = run_dir(&root)?;
    harness::write_results(records, &dir)?;
    Ok(dir)
}

fn cmd_train(overrides: &Overrides) -> Result<(), CliError> {
    let cfg = resolve_config(overrides)?;
    let (artifact, curve) = match cfg.agent {
        AgentKind::Fixed => (
            harness::AgentArtifact::Fixed {
                action: cfg.fixed_action,
            },
            Vec::new(),
        ),
        AgentKind::Random => (harness::AgentArtifact::Random, Vec::new()),
        AgentKind::QLearning | AgentKind::Dqn => harness::train(&cfg)?,
    };
    let mut metrics = harness::evaluate(&artifact, &cfg)?;
    metrics.episode_returns = curve;
    let record = ResultRecord {
        config: cfg.clone(),
        metrics: metrics.clone(),
        seed: cfg.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_s: 0.0,
    };
    let dir = finalize(std::slice::from_ref(&record), overrides)?;
    if matches!(cfg.agent, AgentKind::QLearning | AgentKind::Dqn) {
        let path = harness::save_artifact(&artifact, &dir)?;
        println!("artifact {}", path.display());
    }
    print_metrics(&cfg.agent.to_string(), &metrics);
    println!("results {}", dir.display());
    Ok(())
}

fn cmd_evaluate(artifact_path: &Path, overrides: &Overrides) -> Result<(), CliError> {
    let cfg = resolve_config(overrides)?;
    let artifact = harness::load_artifact(artifact_path, &cfg)?;
    let metrics = harness::evaluate(&artifact, &cfg)?;
    let record = ResultRecord {
        config: cfg.clone(),
        metrics: metrics.clone(),
        seed: cfg.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_s: 0.0,
    };
    let dir = finalize(std::slice::from_ref(&record), overrides)?;
    print_metrics(&cfg.agent.to_string(), &metrics);
    println!("results {}", dir.display());
    Ok(())
}

fn cmd_ablate(suite: &str, jobs: usize, overrides: &Overrides) -> Result<(), CliError> {
    let mut cfg = resolve_config(overrides)?;
    let records = match suite {
        "obs" => harness::ablate_observations(&cfg, jobs)?,
        "reward" => {
            if overrides.agent.is_none() {
                cfg.agent = AgentKind::Dqn;
            }
            harness::ablate_reward_weights(&cfg, jobs)?
        }
        "tiles" => {
            if overrides.agent.is_none() {
                cfg.agent = AgentKind::QLearning;
            }
            harness::ablate_tile_density(&cfg, jobs)?
        }
        other => {
            return Err(CliError::config(format!(
                "unknown suite {other:?}; use obs, reward, or tiles"
            )))
        }
    };
    let dir = finalize(&records, overrides)?;
    for r in &records {
        let label = format!(
            "{} omega={} groups={} width={}",
            r.config.agent,
            r.config.reward.omega,
            r.config
                .obs_groups
                .iter()
                .map(|g| g.to_string())
                .collect::<Vec<_>>()
                .join("+"),
            r.config.tile_temp_width
        );
        print_metrics(&label, &r.metrics);
    }
    println!("results {}", dir.display());
    Ok(())
}

fn cmd_report(dir: &Path) -> Result<(), CliError> {
    let mut rows = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = std::fs::read_dir(&d)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", d.display())))?;
        for entry in entries {
            let entry =
                entry.map_err(|e| CliError::io(format!("cannot read {}: {e}", d.display())))?;
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == "results.csv") {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
                for (i, line) in text.lines().enumerate() {
                    if i == 0 {
                        continue;
                    }
                    rows.push(line.split(',').map(str::to_string).collect::<Vec<_>>());
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::io(format!(
            "no results.csv files under {}",
            dir.display()
        )));
    }
    rows.sort();
    let header = [
        "agent", "building", "omega", "groups", "width", "seed", "energy_kwh", "viol_pct",
    ];
    println!(
        "{:<10} {:<10} {:>5} {:>22} {:>5} {:>6} {:>12} {:>9}",
        header[0], header[1], header[2], header[3], header[4], header[5], header[6], header[7]
    );
    let report_path = dir.join("report.csv");
    let mut f = std::fs::File::create(&report_path)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", report_path.display())))?;
    writeln!(f, "{}", header.join(","))
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", report_path.display())))?;
    for row in &rows {
        if row.len() < 9 {
            continue;
        }
        println!(
            "{:<10} {:<10} {:>5} {:>22} {:>5} {:>6} {:>12} {:>9}",
            row[1], row[2], row[3], row[4], row[5], row[6], row[7], row[8]
        );
        writeln!(f, "{}", row[1..].join(","))
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", report_path.display())))?;
    }
    println!("wrote {}", report_path.display());
    Ok(())
}
