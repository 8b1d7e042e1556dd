use std::time::{Duration, Instant};

use crate::algorithms::{AlgorithmConfig, OnlineLearner};
use crate::confusion::{ConfusionMatrix, ConfusionState, Prediction};
use crate::dataio::InstanceStream;
use crate::error::{Error, Result};
use crate::metrics::Metric;

/// Running utility of one pass over a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// `(t, psi(C_t))` at every checkpoint, strictly increasing in `t`.
    pub checkpoints: Vec<(usize, f64)>,
    pub final_psi: f64,
    /// Unregularized empirical confusion after the last instance.
    pub final_confusion: ConfusionMatrix,
    /// Every prediction, when requested.
    pub predictions: Option<Vec<Prediction>>,
    pub elapsed: Duration,
}

/// Options for [`run_learner`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Record `psi` every `stride` instances (and after the last one).
    pub stride: usize,
    pub keep_predictions: bool,
}

impl RunOptions {
    pub fn stride(stride: usize) -> Self {
        RunOptions {
            stride,
            keep_predictions: false,
        }
    }
}

/// Builds the configured learner and runs it over the stream.
pub fn run_online(stream: &InstanceStream, config: &AlgorithmConfig, stride: usize) -> Result<RunTrace> {
    let mut learner = config.build()?;
    run_learner(stream, learner.as_mut(), &config.metric, RunOptions::stride(stride))
}

/// Feeds the stream through `learner` in order.
///
/// The reported utility is always computed on the plain empirical confusion
/// of the predictions, whatever regularization the learner uses internally.
pub fn run_learner(
    stream: &InstanceStream,
    learner: &mut dyn OnlineLearner,
    metric: &Metric,
    options: RunOptions,
) -> Result<RunTrace> {
    if stream.is_empty() {
        return Err(Error::invalid("cannot run on an empty stream"));
    }
    if options.stride == 0 {
        return Err(Error::invalid("checkpoint stride must be positive"));
    }
    metric.check_task(stream.task)?;
    let start = Instant::now();
    let mut eval = ConfusionState::new(stream.task, 0.0)?;
    let mut checkpoints = Vec::new();
    let mut predictions = options.keep_predictions.then(|| Vec::with_capacity(stream.len()));
    let n = stream.len();
    for (i, (est, y)) in stream.estimates.iter().zip(&stream.labels).enumerate() {
        let yhat = learner.step(est)?;
        learner.observe(y)?;
        eval.update(y, &yhat)?;
        if let Some(p) = predictions.as_mut() {
            p.push(yhat);
        }
        let t = i + 1;
        if t % options.stride == 0 || t == n {
            checkpoints.push((t, metric.value(&eval.normalized())?));
        }
    }
    let final_confusion = eval.normalized();
    let final_psi = metric.value(&final_confusion)?;
    Ok(RunTrace {
        checkpoints,
        final_psi,
        final_confusion,
        predictions,
        elapsed: start.elapsed(),
    })
}
