use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use omma::dataio::formats::format_significant;
use omma::dataio::SynthModel;
use omma::eval::{derive_seed, estimate_optimal, measure_regret, OptimalMethod};
use omma::AlgorithmKind;

use super::{
    in_pool, learner_config, load_config, model_params, write_file, COMMON_KEYS, FIT_STREAM, LEARNER_KEYS,
    MODEL_KEYS, OPTIMUM_STREAM,
};
use crate::args::RegretArgs;
use crate::error::{CliError, CliResult};
use crate::settings::parse_list;

const REGRET_KEYS: &[&str] = &["n-grid", "lambda-grid", "n-opt", "psi-star", "out"];

pub const SUMMARY_HEADER: &str = "lambda,n,runs,psi_final_mean,psi_final_std,psi_star,regret_hat,ratio";

pub fn regret(a: RegretArgs) -> CliResult<()> {
    let cfg = load_config(a.common.config.as_deref(), &[COMMON_KEYS, LEARNER_KEYS, MODEL_KEYS, REGRET_KEYS])?;
    let params = model_params(&cfg, &a.model)?
        .ok_or_else(|| CliError::config("regret needs a synthetic model: give --model or --m"))?;
    let model = SynthModel::new(params)?;
    let mut config = learner_config(&cfg, &a.learner, model.task())?;
    let n_grid: Vec<usize> = parse_list(&cfg.pick_or(a.n_grid, "n-grid", "1000,4000,16000".to_string())?, "n")?;
    if n_grid.contains(&0) {
        return Err(CliError::config("horizons must be positive"));
    }
    let lambdas: Vec<f64> = match cfg.pick::<String>(a.lambda_grid, "lambda-grid")? {
        Some(text) => parse_list(&text, "lambda")?,
        None => vec![config.lambda],
    };
    let runs = cfg.pick_or(a.common.runs, "runs", 20)?;
    let seed = cfg.pick_or(a.common.seed, "seed", 0)?;
    let n_opt = cfg.pick_or(a.n_opt, "n-opt", 200_000)?;
    let psi_star: Option<f64> = cfg.pick(a.psi_star, "psi-star")?;
    let out: Option<PathBuf> = cfg.pick(a.out, "out")?;
    if config.kind == AlgorithmKind::OfflineFw {
        let n_fit = *n_grid.iter().max().expect("nonempty grid");
        let fit = model.generate_with_seed(n_fit, derive_seed(seed, FIT_STREAM));
        config.offline_sample = Some(Arc::new((fit.estimates, fit.labels)));
    }

    let csv = in_pool(cfg.pick(a.common.jobs, "jobs")?, || {
        let psi_star = match psi_star {
            Some(v) => v,
            None => {
                let method = OptimalMethod::Both { iterations: config.fw_iterations };
                estimate_optimal(&config.metric, &model, method, n_opt, derive_seed(seed, OPTIMUM_STREAM))?
            }
        };
        let mut csv = format!("{SUMMARY_HEADER}\n");
        for &lambda in &lambdas {
            let c = config.clone().with_lambda(lambda);
            for r in measure_regret(&model, &c, &n_grid, runs, seed, psi_star)? {
                let f = |x: f64| format_significant(x, 10);
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    f(lambda),
                    r.n,
                    r.runs,
                    f(r.psi_final_mean),
                    f(r.psi_final_std),
                    f(r.psi_star),
                    f(r.regret_hat),
                    f(r.ratio)
                )
                .unwrap();
            }
        }
        Ok(csv)
    })?;
    match out {
        Some(path) => {
            write_file(&path, &csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
