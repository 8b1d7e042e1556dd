use std::path::{Path, PathBuf};
use std::sync::Arc;

use omma::dataio::{InstanceStream, SynthModel};
use omma::eval::regret::mean_std;
use omma::eval::report::{trace_csv, RunReport};
use omma::eval::{derive_seed, estimate_optimal, run_online, OptimalMethod, RunTrace};
use omma::{AlgorithmKind, TaskKind};
use rayon::prelude::*;

use super::{
    create_dir, in_pool, learner_config, load_config, model_params, parse_task, write_file, COMMON_KEYS, FIT_STREAM,
    LEARNER_KEYS, MODEL_KEYS, OPTIMUM_STREAM,
};
use crate::args::RunArgs;
use crate::error::{CliError, CliResult};

const RUN_KEYS: &[&str] = &["labels", "probs", "fit-labels", "fit-probs", "n", "n-opt", "stride", "out"];

enum Source {
    Files(InstanceStream),
    Synthetic { model: SynthModel, n: usize },
}

impl Source {
    fn task(&self) -> TaskKind {
        match self {
            Source::Files(s) => s.task,
            Source::Synthetic { model, .. } => model.task(),
        }
    }

    fn stream(&self, seed: u64) -> InstanceStream {
        match self {
            Source::Files(s) => s.shuffled(seed),
            Source::Synthetic { model, n } => model.generate_with_seed(*n, seed),
        }
    }
}

/// Largest label index mentioned in a labels or estimates file, plus one.
fn infer_num_labels(paths: &[&Path]) -> CliResult<usize> {
    let mut max = None;
    for path in paths {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        for token in text.split(|c: char| c == ',' || c.is_whitespace()) {
            let index = token.split(':').next().unwrap_or("");
            if let Ok(j) = index.parse::<usize>() {
                max = max.max(Some(j));
            }
        }
    }
    max.map(|j| j + 1)
        .ok_or_else(|| CliError::Data("no label indices found; pass --m".into()))
}

fn read_files(labels: &Path, probs: &Path, kind: &str, m: Option<usize>) -> CliResult<InstanceStream> {
    let m = match m {
        Some(m) => m,
        None => infer_num_labels(&[labels, probs])?,
    };
    let task = parse_task(kind, m)?;
    Ok(InstanceStream::read(labels, probs, task)?)
}

pub fn run(a: RunArgs) -> CliResult<()> {
    let cfg = load_config(a.common.config.as_deref(), &[COMMON_KEYS, LEARNER_KEYS, MODEL_KEYS, RUN_KEYS])?;
    let seed = cfg.pick_or(a.common.seed, "seed", 0)?;
    let runs = cfg.pick_or(a.common.runs, "runs", 1)?;
    if runs == 0 {
        return Err(CliError::config("--runs must be positive"));
    }
    let stride = cfg.pick_or(a.stride, "stride", 100)?;
    if stride == 0 {
        return Err(CliError::config("--stride must be positive"));
    }
    let out: PathBuf = cfg.require(a.out.clone(), "out")?;
    let jobs = cfg.pick(a.common.jobs, "jobs")?;
    // Validate the metric before touching any data.
    omma::Metric::parse(&cfg.require::<String>(a.learner.metric.clone(), "metric")?)?;

    let labels: Option<PathBuf> = cfg.pick(a.labels.clone(), "labels")?;
    let probs: Option<PathBuf> = cfg.pick(a.probs.clone(), "probs")?;
    let source = match (labels, probs) {
        (Some(l), Some(p)) => {
            let kind = cfg.pick_or(a.model.task.clone(), "task", "multilabel".to_string())?;
            Source::Files(read_files(&l, &p, &kind, cfg.pick(a.model.m, "m")?)?)
        }
        (Some(_), None) | (None, Some(_)) => {
            return Err(CliError::config("--labels and --probs must be given together"))
        }
        (None, None) => {
            let params = model_params(&cfg, &a.model)?
                .ok_or_else(|| CliError::config("give --labels and --probs, or a synthetic model with --model or --m"))?;
            let n = cfg.require(a.n, "n")?;
            if n == 0 {
                return Err(CliError::config("--n must be positive"));
            }
            Source::Synthetic { model: SynthModel::new(params)?, n }
        }
    };
    if source.stream(0).is_empty() {
        return Err(CliError::Data("the input stream is empty".into()));
    }

    let mut config = learner_config(&cfg, &a.learner, source.task())?;
    if config.kind == AlgorithmKind::OfflineFw {
        let fit = match (&source, cfg.pick::<PathBuf>(a.fit_labels.clone(), "fit-labels")?) {
            (Source::Files(s), Some(fl)) => {
                let fp: PathBuf = cfg.require(a.fit_probs.clone(), "fit-probs")?;
                InstanceStream::read(&fl, &fp, s.task)?
            }
            (Source::Files(_), None) => return Err(CliError::config("offline-fw needs --fit-labels and --fit-probs")),
            (Source::Synthetic { model, n }, _) => model.generate_with_seed(*n, derive_seed(seed, FIT_STREAM)),
        };
        config.offline_sample = Some(Arc::new((fit.estimates, fit.labels)));
    }
    let n_opt = cfg.pick_or(a.n_opt, "n-opt", 100_000)?;

    let (traces, psi_star) = in_pool(jobs, || {
        let traces = (0..runs)
            .into_par_iter()
            .map(|r| {
                let run_seed = derive_seed(seed, r as u64);
                run_online(&source.stream(run_seed), &config.clone().with_seed(run_seed), stride)
            })
            .collect::<Result<Vec<RunTrace>, _>>()?;
        let psi_star = match &source {
            Source::Synthetic { model, .. } => {
                let method = OptimalMethod::Both { iterations: config.fw_iterations };
                Some(estimate_optimal(&config.metric, model, method, n_opt, derive_seed(seed, OPTIMUM_STREAM))?)
            }
            Source::Files(_) => None,
        };
        Ok((traces, psi_star))
    })?;

    create_dir(&out)?;
    for (r, trace) in traces.iter().enumerate() {
        write_file(&out.join(format!("trace_run{r}.csv")), &trace_csv(trace))?;
    }
    let finals: Vec<f64> = traces.iter().map(|t| t.final_psi).collect();
    let (mean, std) = mean_std(&finals);
    let report = RunReport {
        algorithm: config.kind.name().into(),
        averaging: config.metric.averaging.to_string(),
        budget_k: config.budget.or(config.metric.budget_k),
        epsilon: config.metric.epsilon,
        lambda: config.lambda,
        metric: config.metric.name(),
        n: traces[0].checkpoints.last().map_or(0, |c| c.0),
        psi_final_mean: mean,
        psi_final_std: std,
        psi_star,
        regret_hat: psi_star.map(|s| s - mean),
        runs,
        seed,
    };
    write_file(&out.join("report.json"), &report.to_json())?;
    println!(
        "{} {}: mean final utility {mean:.6} over {runs} run(s) of {} instances; wrote {}",
        report.algorithm,
        report.metric,
        report.n,
        out.display()
    );
    Ok(())
}
