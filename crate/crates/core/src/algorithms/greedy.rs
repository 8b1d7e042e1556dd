use super::{check_estimate, AlgorithmConfig, AlgorithmKind, OnlineLearner, Pending, Setup};
use crate::confusion::{ConfusionState, LabelSet, LabelVector, Prediction, TaskKind, FN, FP, TN, TP};
use crate::error::{Error, Result};
use crate::metrics::{Averaging, Metric};
use crate::policy::{decide_multilabel, ProbEstimate};

/// Maximizes, label by label, the expected metric after the current instance.
///
/// Label `j` is scored by `E[psi(S_j + Δ(y_j, ŷ_j)) / (t + 1)]` over
/// `y_j ~ Bernoulli(η̂_j)`, where `S_j` is the unnormalized block. This only
/// decomposes for macro-averaged (or single-label binary) metrics.
#[derive(Debug, Clone)]
pub struct Greedy {
    metric: Metric,
    setup: Setup,
    state: ConfusionState,
    pending: Pending<Prediction>,
}

impl Greedy {
    pub(crate) fn new(config: &AlgorithmConfig, setup: Setup) -> Result<Self> {
        let decomposes = match config.metric.averaging {
            Averaging::Macro => true,
            Averaging::BinaryDirect => setup.view == TaskKind::Multilabel(1),
            Averaging::Micro | Averaging::MulticlassNative => false,
        };
        if !decomposes {
            return Err(Error::UnsupportedMetric(format!(
                "greedy needs a macro-averaged metric, got {}",
                config.metric.name()
            )));
        }
        Ok(Greedy {
            metric: config.metric,
            setup,
            state: ConfusionState::new(setup.view, config.lambda)?,
            pending: Pending::default(),
        })
    }

    pub fn state(&self) -> &ConfusionState {
        &self.state
    }

    /// Expected per-label metric after predicting `yhat` for label `j`.
    pub fn label_gain(&self, j: usize, eta: f64, yhat: bool) -> f64 {
        let s = self.state.block_counts(j);
        let t1 = (self.state.t() + 1) as f64;
        let outcome = |y: bool| {
            let mut b = s;
            b[match (y, yhat) {
                (false, false) => TN,
                (false, true) => FP,
                (true, false) => FN,
                (true, true) => TP,
            }] += 1.0;
            self.metric.binary_value(b.map(|x| x / t1))
        };
        eta * outcome(true) + (1.0 - eta) * outcome(false)
    }

    /// `label_gain(j, 1) - label_gain(j, 0)` for every label.
    pub fn gain_differences(&self, est: &ProbEstimate) -> Vec<f64> {
        (0..self.setup.view.num_labels())
            .map(|j| {
                let eta = est.get(j);
                self.label_gain(j, eta, true) - self.label_gain(j, eta, false)
            })
            .collect()
    }
}

impl OnlineLearner for Greedy {
    fn step(&mut self, est: &ProbEstimate) -> Result<Prediction> {
        self.pending.check_free()?;
        check_estimate(est, self.setup.task)?;
        let diffs = self.gain_differences(est);
        let yhat = match self.setup.budget {
            Some(_) => decide_multilabel(&diffs, self.setup.budget)?,
            // A tie predicts the label, as in OMMA.
            None => LabelSet::from_sorted((0..diffs.len()).filter(|&j| diffs[j] >= 0.0).collect())?,
        };
        self.pending.begin(yhat.clone())?;
        Ok(yhat)
    }

    fn observe(&mut self, y: &LabelVector) -> Result<()> {
        let yhat = self.pending.finish()?;
        y.check(self.setup.task, "label")?;
        self.state.update(y, &yhat)
    }

    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::Greedy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn greedy(metric: &str, m: usize, budget: Option<usize>) -> Result<Greedy> {
        let config = AlgorithmConfig::new(AlgorithmKind::Greedy, Metric::parse(metric).unwrap(), TaskKind::Multilabel(m))
            .with_budget(budget);
        Greedy::new(&config, config.setup()?)
    }

    fn est(p: &[f64]) -> ProbEstimate {
        ProbEstimate::from_dense(p).unwrap()
    }

    #[test]
    fn first_step_examples() {
        let mut g = greedy("macro-f1", 1, None).unwrap();
        assert!((g.label_gain(0, 0.6, true) - 0.6).abs() < 1e-9);
        assert_eq!(g.label_gain(0, 0.6, false), 0.0);
        assert_eq!(g.step(&est(&[0.6])).unwrap().indices(), &[0]);

        let mut g = greedy("macro-f1", 1, None).unwrap();
        assert_eq!(g.label_gain(0, 0.0, true), 0.0);
        assert_eq!(g.label_gain(0, 0.0, false), 0.0);
        assert_eq!(g.step(&est(&[0.0])).unwrap().indices(), &[0]);

        let mut g = greedy("macro-f1", 2, Some(1)).unwrap();
        assert_eq!(g.step(&est(&[0.4, 0.4])).unwrap().indices(), &[0]);
    }

    #[test]
    fn rejects_non_decomposable_metrics() {
        assert!(matches!(greedy("micro-f1", 3, None), Err(Error::UnsupportedMetric(_))));
        let config = AlgorithmConfig::new(AlgorithmKind::Greedy, Metric::parse("mc-accuracy").unwrap(), TaskKind::Multiclass(3));
        assert!(matches!(Greedy::new(&config, config.setup().unwrap()), Err(Error::UnsupportedMetric(_))));
    }
}
