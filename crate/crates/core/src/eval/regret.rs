use rayon::prelude::*;
use serde::Serialize;

use super::derive_seed;
use super::runner::{run_online, RunTrace};
use crate::algorithms::AlgorithmConfig;
use crate::dataio::SynthModel;
use crate::error::{Error, Result};

/// Utility gap to the approximate optimum at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub n: usize,
    pub runs: usize,
    pub psi_final_mean: f64,
    pub psi_final_std: f64,
    pub psi_star: f64,
    pub regret_hat: f64,
    /// `regret_hat * n / ln n`, roughly flat when regret decays like `ln n / n`.
    pub ratio: f64,
}

impl RegretReport {
    /// Standard error of `regret_hat` (the optimum is treated as exact).
    pub fn standard_error(&self) -> f64 {
        self.psi_final_std / (self.runs as f64).sqrt()
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `config` on `runs` fresh streams of length `n` drawn from `model`.
///
/// Run `r` uses stream seed and learner seed `derive_seed(seed, r)`. Runs
/// execute in parallel; results come back in run order.
pub fn seeded_runs(
    model: &SynthModel,
    config: &AlgorithmConfig,
    n: usize,
    runs: usize,
    seed: u64,
) -> Result<Vec<RunTrace>> {
    if runs == 0 {
        return Err(Error::invalid("need at least one run"));
    }
    (0..runs)
        .into_par_iter()
        .map(|r| {
            let run_seed = derive_seed(seed, r as u64);
            let stream = model.generate_with_seed(n, run_seed);
            let config = config.clone().with_seed(run_seed);
            run_online(&stream, &config, n)
        })
        .collect()
}

/// Estimated regret of `config` against `psi_star` at every horizon in
/// `n_grid`, from `runs` seeded runs each.
pub fn measure_regret(
    model: &SynthModel,
    config: &AlgorithmConfig,
    n_grid: &[usize],
    runs: usize,
    seed: u64,
    psi_star: f64,
) -> Result<Vec<RegretReport>> {
    n_grid
        .iter()
        .map(|&n| {
            let finals: Vec<f64> = seeded_runs(model, config, n, runs, seed)?.iter().map(|t| t.final_psi).collect();
            let (mean, std) = mean_std(&finals);
            let regret = psi_star - mean;
            Ok(RegretReport {
                n,
                runs,
                psi_final_mean: mean,
                psi_final_std: std,
                psi_star,
                regret_hat: regret,
                ratio: regret * n as f64 / (n as f64).ln(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::AlgorithmKind;
    use crate::dataio::SynthParams;
    use crate::eval::{estimate_optimal, OptimalMethod};
    use crate::metrics::Metric;

    #[test]
    fn mean_and_std() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }

    #[test]
    fn linear_metric_regret_is_noise() {
        let model = SynthModel::new(SynthParams { seed: 4, ..SynthParams::multilabel(3) }).unwrap();
        let metric = Metric::parse("macro-accuracy").unwrap();
        let psi_star = estimate_optimal(&metric, &model, OptimalMethod::ThresholdGrid, 100_000, 99).unwrap();
        let config = AlgorithmConfig::new(AlgorithmKind::Omma, metric, model.task());
        let (n, runs) = (2000, 8);
        let reports = measure_regret(&model, &config, &[n], runs, 1, psi_star).unwrap();
        let r = &reports[0];
        assert!(r.regret_hat.abs() <= 2.0 / ((n * runs) as f64).sqrt() + 5e-3, "{r:?}");
        assert_eq!(reports, measure_regret(&model, &config, &[n], runs, 1, psi_star).unwrap());
    }
}
