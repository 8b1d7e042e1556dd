use super::{check_estimate, AlgorithmConfig, AlgorithmKind, CostTensor, OnlineLearner, Pending, Setup};
use crate::confusion::{ConfusionState, LabelVector, Prediction};
use crate::error::Result;
use crate::metrics::{Averaging, Metric};
use crate::policy::{decide_sparse, CostCoefficients, ProbEstimate};

/// Predicts the maximizer of the metric linearized at the current state.
///
/// With `use_labels = false` (the `omma-eta` variant) the state is updated
/// with the expected confusion under the estimate, and observed labels are
/// ignored.
#[derive(Debug, Clone)]
pub struct Omma {
    metric: Metric,
    setup: Setup,
    state: ConfusionState,
    sparse_k: Option<usize>,
    use_labels: bool,
    pending: Pending<(ProbEstimate, Prediction)>,
}

impl Omma {
    pub(crate) fn new(config: &AlgorithmConfig, setup: Setup) -> Result<Self> {
        Ok(Omma {
            metric: config.metric,
            setup,
            state: ConfusionState::new(setup.view, config.lambda)?,
            sparse_k: config.sparse_k,
            use_labels: config.kind != AlgorithmKind::OmmaEta,
            pending: Pending::default(),
        })
    }

    pub fn state(&self) -> &ConfusionState {
        &self.state
    }

    /// Linear costs at the current state: `gradient(metric, normalized(state))`.
    pub fn cost_tensor(&self) -> Result<CostTensor> {
        CostTensor::from_gradient(self.metric.gradient(&self.state.normalized())?)
    }

    fn predict(&self, est: &ProbEstimate) -> Result<Prediction> {
        if self.setup.is_native() || self.sparse_k.is_none() {
            return self.cost_tensor()?.decide(est, self.setup.budget);
        }
        // Only the blocks of listed labels are differentiated.
        let m = self.setup.view.num_labels();
        let mean = match self.metric.averaging {
            Averaging::Micro => self.state.normalized().mean_block().to_array(),
            _ => [0.0; 4],
        };
        let coeffs = |j| {
            let g = self.metric.block_gradient(m, self.state.normalized_block(j), mean);
            CostCoefficients::from_block(g)
        };
        decide_sparse(coeffs, est, self.setup.budget)
    }
}

impl OnlineLearner for Omma {
    fn step(&mut self, est: &ProbEstimate) -> Result<Prediction> {
        self.pending.check_free()?;
        check_estimate(est, self.setup.task)?;
        let est = match self.sparse_k {
            Some(k) => est.top_k(k),
            None => est.clone(),
        };
        let yhat = self.predict(&est)?;
        self.pending.begin((est, yhat.clone()))?;
        Ok(yhat)
    }

    fn observe(&mut self, y: &LabelVector) -> Result<()> {
        let (est, yhat) = self.pending.finish()?;
        if self.use_labels {
            y.check(self.setup.task, "label")?;
            self.state.update(y, &yhat)
        } else {
            self.state.update_semi(&est, &yhat)
        }
    }

    fn kind(&self) -> AlgorithmKind {
        if self.use_labels {
            AlgorithmKind::Omma
        } else {
            AlgorithmKind::OmmaEta
        }
    }
}
