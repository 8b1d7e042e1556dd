use crate::algorithms::{fw_fit, Setup};
use crate::confusion::TaskKind;
use crate::dataio::SynthModel;
use crate::error::{Error, Result};
use crate::metrics::{Averaging, Metric};
use crate::policy::ProbEstimate;

/// Number of evenly spaced thresholds scanned per label.
pub const GRID_SIZE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalMethod {
    /// Frank-Wolfe on the expected confusion of an oracle sample.
    FrankWolfe { iterations: usize },
    /// Best per-label threshold on the true probabilities.
    ThresholdGrid,
    /// The larger of the two (the grid is skipped where it does not apply).
    Both { iterations: usize },
}

/// Approximates the best achievable utility on a synthetic task by
/// optimizing over `n_opt` oracle instances drawn with `seed`.
pub fn estimate_optimal(
    metric: &Metric,
    model: &SynthModel,
    method: OptimalMethod,
    n_opt: usize,
    seed: u64,
) -> Result<f64> {
    let sample = model.generate_with_seed(n_opt, seed);
    let truth = sample.truth.as_ref().expect("synthetic streams carry the truth");
    optimal_from_truth(metric, model.task(), truth, method)
}

/// [`estimate_optimal`] on a given sample of true probabilities.
pub fn optimal_from_truth(
    metric: &Metric,
    task: TaskKind,
    truth: &[ProbEstimate],
    method: OptimalMethod,
) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::invalid("optimum estimation needs a nonempty sample"));
    }
    match method {
        OptimalMethod::FrankWolfe { iterations } => fw_optimum(metric, task, truth, iterations),
        OptimalMethod::ThresholdGrid => grid_optimum(metric, task, truth),
        OptimalMethod::Both { iterations } => {
            let fw = fw_optimum(metric, task, truth, iterations)?;
            Ok(match grid_optimum(metric, task, truth) {
                Ok(grid) => fw.max(grid),
                Err(_) => fw,
            })
        }
    }
}

fn fw_optimum(metric: &Metric, task: TaskKind, truth: &[ProbEstimate], iterations: usize) -> Result<f64> {
    let setup = Setup::new(task, metric, None)?;
    let mix = fw_fit(truth, None, metric, setup, iterations, 0.0)?;
    metric.value(&mix.confusion)
}

/// Best predict-if-`η_j ≥ τ` rule per label, scored on the expected
/// per-label confusion. Only meaningful for metrics that decompose per label.
pub fn grid_optimum(metric: &Metric, task: TaskKind, truth: &[ProbEstimate]) -> Result<f64> {
    let decomposes = match metric.averaging {
        Averaging::Macro => true,
        Averaging::BinaryDirect => task == TaskKind::Multilabel(1),
        _ => false,
    };
    if !decomposes || task.is_multiclass() || metric.budget_k.is_some() {
        return Err(Error::UnsupportedMetric(format!(
            "the threshold grid needs an unbudgeted macro-averaged multilabel metric, got {}",
            metric.name()
        )));
    }
    let m = task.num_labels();
    let best: f64 = (0..m).map(|j| best_threshold(metric, truth, j).1).sum();
    Ok(best / m as f64)
}

/// `(threshold, value)` of the best grid threshold for label `j`.
pub fn best_threshold(metric: &Metric, truth: &[ProbEstimate], j: usize) -> (f64, f64) {
    let mut eta: Vec<f64> = truth.iter().map(|e| e.get(j)).collect();
    eta.sort_by(f64::total_cmp);
    let n = eta.len() as f64;
    // prefix[i] = sum of the i smallest probabilities.
    let mut prefix = Vec::with_capacity(eta.len() + 1);
    prefix.push(0.0);
    for e in &eta {
        prefix.push(prefix.last().unwrap() + e);
    }
    let total = *prefix.last().unwrap();
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=GRID_SIZE {
        let tau = i as f64 / GRID_SIZE as f64;
        // Instances below the threshold are predicted negative.
        let below = eta.partition_point(|&e| e < tau);
        let (neg_mass, pos_mass) = (prefix[below], total - prefix[below]);
        let above = eta.len() - below;
        let block = [
            (below as f64 - neg_mass) / n,
            (above as f64 - pos_mass) / n,
            neg_mass / n,
            pos_mass / n,
        ];
        let v = metric.binary_value(block);
        if v > best.1 {
            best = (tau, v);
        }
    }
    best
}
