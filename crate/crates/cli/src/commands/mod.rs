use std::path::{Path, PathBuf};
use std::str::FromStr;

use omma::algorithms::{RefitSchedule, ScheduleReading};
use omma::dataio::SynthParams;
use omma::{AlgorithmConfig, AlgorithmKind, Metric, TaskKind};

use crate::args::{Command, LearnerArgs, ModelArgs};
use crate::error::{CliError, CliResult};
use crate::settings::ConfigFile;

mod adversarial;
mod metrics;
mod regret;
mod run;
mod synth;

/// Seed indices reserved for auxiliary samples. Run `r` uses index `r`.
pub const OPTIMUM_STREAM: u64 = 1 << 32;
pub const FIT_STREAM: u64 = (1 << 32) + 1;
pub const NOISE_STREAM: u64 = (1 << 32) + 2;

pub const COMMON_KEYS: &[&str] = &["jobs", "seed", "runs"];
pub const LEARNER_KEYS: &[&str] = &[
    "metric",
    "alg",
    "lambda",
    "epsilon",
    "budget",
    "sparse-k",
    "fw-iterations",
    "schedule",
    "deterministic-mixture",
];
pub const MODEL_KEYS: &[&str] = &["model", "task", "m", "d", "model-seed", "prior-low", "prior-high", "weight-scale"];

pub fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Run(a) => run::run(a),
        Command::Synth(a) => synth::synth(a),
        Command::Adversarial(a) => adversarial::adversarial(a),
        Command::Regret(a) => regret::regret(a),
        Command::Metrics => metrics::metrics(),
    }
}

/// Loads the config file with every key the subcommand accepts.
pub fn load_config(path: Option<&Path>, groups: &[&[&str]]) -> CliResult<ConfigFile> {
    let keys: Vec<&str> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    ConfigFile::load(path, &keys)
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
pub fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    match jobs {
        None => f(),
        Some(0) => Err(CliError::config("--jobs must be positive")),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| CliError::Internal(format!("cannot start {j} threads: {e}")))?
            .install(f),
    }
}

fn parse_named<T: FromStr<Err = omma::Error>>(text: &str) -> CliResult<T> {
    text.parse().map_err(CliError::from)
}

pub fn parse_task(kind: &str, m: usize) -> CliResult<TaskKind> {
    let task = match kind {
        "multilabel" => TaskKind::multilabel(m),
        "multiclass" => TaskKind::multiclass(m),
        other => return Err(CliError::config(format!("unknown task `{other}`; use multilabel or multiclass"))),
    };
    Ok(task?)
}

/// Builds the learner configuration for `task` from flags and config file.
pub fn learner_config(cfg: &ConfigFile, a: &LearnerArgs, task: TaskKind) -> CliResult<AlgorithmConfig> {
    let name: String = cfg.require(a.metric.clone(), "metric")?;
    let mut metric = Metric::parse(&name)?;
    if let Some(eps) = cfg.pick(a.epsilon, "epsilon")? {
        metric = metric.with_epsilon(eps)?;
    }
    let kind: AlgorithmKind = parse_named(&cfg.pick_or(a.alg.clone(), "alg", "omma".to_string())?)?;
    let mut config = AlgorithmConfig::new(kind, metric, task)
        .with_lambda(cfg.pick_or(a.lambda, "lambda", 0.0)?)
        .with_budget(cfg.pick(a.budget, "budget")?)
        .with_sparse(cfg.pick(a.sparse_k, "sparse-k")?);
    config.fw_iterations = cfg.pick_or(a.fw_iterations, "fw-iterations", config.fw_iterations)?;
    let reading = match cfg.pick_or(a.schedule.clone(), "schedule", "interval".to_string())?.as_str() {
        "interval" => ScheduleReading::Interval,
        "cumulative" => ScheduleReading::Cumulative,
        other => return Err(CliError::config(format!("unknown schedule `{other}`; use interval or cumulative"))),
    };
    config.schedule = RefitSchedule { reading, ..RefitSchedule::default() };
    config.deterministic_mixture = cfg.switch(a.deterministic_mixture, "deterministic-mixture")?;
    // Catch bad combinations before any data is read.
    config.setup()?;
    Ok(config)
}

/// Synthetic model parameters, if any were given.
pub fn model_params(cfg: &ConfigFile, a: &ModelArgs) -> CliResult<Option<SynthParams>> {
    let file: Option<PathBuf> = cfg.pick(a.model.clone(), "model")?;
    let m: Option<usize> = cfg.pick(a.m, "m")?;
    let task: Option<String> = cfg.pick(a.task.clone(), "task")?;
    let mut p = match (&file, m) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read model file {}: {e}", path.display())))?;
            SynthParams::from_key_values(&text)?
        }
        (None, Some(m)) => SynthParams::multilabel(m),
        (None, None) => return Ok(None),
    };
    if m.is_some() || task.is_some() {
        let kind = task.unwrap_or_else(|| if p.task.is_multiclass() { "multiclass" } else { "multilabel" }.into());
        p.task = parse_task(&kind, m.unwrap_or(p.task.num_labels()))?;
    }
    p.d = cfg.pick_or(a.d, "d", p.d)?;
    p.seed = cfg.pick_or(a.model_seed, "model-seed", p.seed)?;
    p.prior_low = cfg.pick_or(a.prior_low, "prior-low", p.prior_low)?;
    p.prior_high = cfg.pick_or(a.prior_high, "prior-high", p.prior_high)?;
    p.weight_scale = cfg.pick_or(a.weight_scale, "weight-scale", p.weight_scale)?;
    Ok(Some(p))
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::output(path, e))
}
