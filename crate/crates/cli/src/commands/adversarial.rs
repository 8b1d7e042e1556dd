use omma::eval::adversarial::min_metric;
use omma::eval::adversarial_run;
use omma::{AlgorithmConfig, AlgorithmKind, TaskKind};

use super::{in_pool, load_config, parse_named, COMMON_KEYS};
use crate::args::AdversarialArgs;
use crate::error::{CliError, CliResult};

pub fn adversarial(a: AdversarialArgs) -> CliResult<()> {
    let cfg = load_config(a.common.config.as_deref(), &[COMMON_KEYS, &["alg", "lambda", "n"]])?;
    let kind: AlgorithmKind = parse_named(&cfg.pick_or(a.alg, "alg", "omma".to_string())?)?;
    let config = AlgorithmConfig::new(kind, min_metric(), TaskKind::Multilabel(1))
        .with_lambda(cfg.pick_or(a.lambda, "lambda", 0.0)?);
    let n = cfg.pick_or(a.n, "n", 32_400)?;
    let runs = cfg.pick_or(a.common.runs, "runs", 20)?;
    let seed = cfg.pick_or(a.common.seed, "seed", 0)?;
    let report = in_pool(cfg.pick(a.common.jobs, "jobs")?, || Ok(adversarial_run(&config, n, runs, seed)?))?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    println!("{json}");
    Ok(())
}
