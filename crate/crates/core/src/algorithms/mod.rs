//! Online learners sharing the protocol `step(η̂) -> ŷ`, then `observe(y)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::confusion::{LabelVector, Prediction, TaskKind};
use crate::error::{Error, Result};
use crate::metrics::{Averaging, Metric};
use crate::policy::{cost_coefficients, decide_multiclass, decide_multilabel, gains, CostCoefficients, ProbEstimate};
use crate::GradientTensor;

mod baseline;
mod frank_wolfe;
mod greedy;
mod omma;

pub use baseline::{Baseline, BaselineRule};
pub use frank_wolfe::{fw_fit, Component, MixtureClassifier, OfflineFw, OnlineFw, RefitSchedule, ScheduleReading};
pub use greedy::Greedy;
pub use omma::Omma;

/// An online learner.
///
/// Calls must alternate: one `observe` after every `step`. Anything else is
/// reported as [`Error::Protocol`].
pub trait OnlineLearner: Send {
    fn step(&mut self, est: &ProbEstimate) -> Result<Prediction>;
    fn observe(&mut self, y: &LabelVector) -> Result<()>;
    fn kind(&self) -> AlgorithmKind;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    Omma,
    /// OMMA updating its state with expected instead of observed counts.
    OmmaEta,
    Greedy,
    OnlineFw,
    /// Online Frank-Wolfe fitted on expected confusions, ignoring labels.
    OnlineFwEta,
    OfflineFw,
    TopK,
    Threshold05,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 8] = [
        AlgorithmKind::Omma,
        AlgorithmKind::OmmaEta,
        AlgorithmKind::Greedy,
        AlgorithmKind::OnlineFw,
        AlgorithmKind::OnlineFwEta,
        AlgorithmKind::OfflineFw,
        AlgorithmKind::TopK,
        AlgorithmKind::Threshold05,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::Omma => "omma",
            AlgorithmKind::OmmaEta => "omma-eta",
            AlgorithmKind::Greedy => "greedy",
            AlgorithmKind::OnlineFw => "ofw",
            AlgorithmKind::OnlineFwEta => "ofw-eta",
            AlgorithmKind::OfflineFw => "offline-fw",
            AlgorithmKind::TopK => "topk",
            AlgorithmKind::Threshold05 => "thresh05",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown algorithm `{s}`")))
    }
}

/// Everything needed to build a learner.
#[derive(Debug, Clone)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    pub metric: Metric,
    pub task: TaskKind,
    pub lambda: f64,
    /// Exactly this many labels per prediction. Overrides the metric's `@k`.
    pub budget: Option<usize>,
    /// Keep only the `k'` most probable labels of each estimate (OMMA only).
    pub sparse_k: Option<usize>,
    /// Frank-Wolfe iterations per fit.
    pub fw_iterations: usize,
    pub schedule: RefitSchedule,
    /// Between refits, always use the newest mixture component instead of
    /// sampling one.
    pub deterministic_mixture: bool,
    pub seed: u64,
    /// Fitting sample for [`AlgorithmKind::OfflineFw`].
    pub offline_sample: Option<Arc<(Vec<ProbEstimate>, Vec<LabelVector>)>>,
}

impl AlgorithmConfig {
    pub fn new(kind: AlgorithmKind, metric: Metric, task: TaskKind) -> Self {
        AlgorithmConfig {
            kind,
            metric,
            task,
            lambda: 0.0,
            budget: None,
            sparse_k: None,
            fw_iterations: 100,
            schedule: RefitSchedule::default(),
            deterministic_mixture: false,
            seed: 0,
            offline_sample: None,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_budget(mut self, k: Option<usize>) -> Self {
        self.budget = k;
        self
    }

    pub fn with_sparse(mut self, k: Option<usize>) -> Self {
        self.sparse_k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Resolves how predictions are formed for this metric and task.
    pub fn setup(&self) -> Result<Setup> {
        Setup::new(self.task, &self.metric, self.budget)
    }

    pub fn build(&self) -> Result<Box<dyn OnlineLearner>> {
        let setup = self.setup()?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if self.sparse_k.is_some() && !matches!(self.kind, AlgorithmKind::Omma | AlgorithmKind::OmmaEta) {
            return Err(Error::invalid(format!("{} has no sparse mode", self.kind)));
        }
        if self.fw_iterations == 0 {
            return Err(Error::invalid("Frank-Wolfe needs at least one iteration"));
        }
        Ok(match self.kind {
            AlgorithmKind::Omma | AlgorithmKind::OmmaEta => Box::new(Omma::new(self, setup)?),
            AlgorithmKind::Greedy => Box::new(Greedy::new(self, setup)?),
            AlgorithmKind::OnlineFw | AlgorithmKind::OnlineFwEta => Box::new(OnlineFw::new(self, setup)?),
            AlgorithmKind::OfflineFw => Box::new(OfflineFw::new(self, setup)?),
            AlgorithmKind::TopK => Box::new(Baseline::new(BaselineRule::TopK, setup)?),
            AlgorithmKind::Threshold05 => Box::new(Baseline::new(BaselineRule::Threshold05, setup)?),
        })
    }
}

/// How a metric turns into predictions on a given task.
///
/// Multiclass tasks scored with macro- or micro-averaged metrics are handled
/// in the one-vs-rest multilabel view with a budget (one class by default).
/// Multiclass-native metrics, and binary metrics on two classes, use the
/// `m × m` rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Setup {
    /// Shape of the learner's own confusion state.
    pub view: TaskKind,
    /// Shape of the labels in the stream.
    pub task: TaskKind,
    pub budget: Option<usize>,
}

impl Setup {
    pub fn new(task: TaskKind, metric: &Metric, budget: Option<usize>) -> Result<Self> {
        task.validate()?;
        metric.check_task(task)?;
        let budget = match (budget, metric.budget_k) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::invalid(format!(
                    "budget {a} conflicts with the metric's @{b}"
                )))
            }
            (a, b) => a.or(b),
        };
        let m = task.num_labels();
        if let Some(k) = budget {
            if k == 0 || k > m {
                return Err(Error::invalid(format!("budget {k} must be in 1..={m}")));
            }
        }
        let setup = match task {
            TaskKind::Multilabel(_) => Setup { view: task, task, budget },
            TaskKind::Multiclass(m) => match metric.averaging {
                Averaging::Macro | Averaging::Micro => Setup {
                    view: TaskKind::Multilabel(m),
                    task,
                    budget: Some(budget.unwrap_or(1)),
                },
                _ => {
                    if budget.is_some_and(|k| k != 1) {
                        return Err(Error::invalid(
                            "multiclass-native metrics predict exactly one class; use macro- or micro-averaging for top-k",
                        ));
                    }
                    Setup { view: task, task, budget: None }
                }
            },
        };
        Ok(setup)
    }

    /// Whether predictions come from the `m × m` rule.
    pub fn is_native(&self) -> bool {
        self.view.is_multiclass()
    }
}

/// A fixed linear cost: either per-label coefficients or an `m × m` tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum CostTensor {
    Labels(CostCoefficients),
    Classes(GradientTensor),
}

impl CostTensor {
    pub fn from_gradient(g: GradientTensor) -> Result<Self> {
        if g.task().is_multiclass() {
            Ok(CostTensor::Classes(g))
        } else {
            Ok(CostTensor::Labels(cost_coefficients(&g)?))
        }
    }

    pub fn decide(&self, est: &ProbEstimate, budget: Option<usize>) -> Result<Prediction> {
        match self {
            CostTensor::Labels(c) => decide_multilabel(&gains(c, est)?, budget),
            CostTensor::Classes(g) => decide_multiclass(g, est),
        }
    }
}

/// Step/observe alternation guard holding what `step` left for `observe`.
#[derive(Debug, Clone)]
pub(crate) struct Pending<T>(Option<T>);

impl<T> Default for Pending<T> {
    fn default() -> Self {
        Pending(None)
    }
}

impl<T> Pending<T> {
    pub(crate) fn begin(&mut self, value: T) -> Result<()> {
        if self.0.is_some() {
            return Err(Error::Protocol("step called twice without observe".into()));
        }
        self.0 = Some(value);
        Ok(())
    }

    pub(crate) fn check_free(&self) -> Result<()> {
        if self.0.is_some() {
            return Err(Error::Protocol("step called twice without observe".into()));
        }
        Ok(())
    }

    pub(crate) fn finish(&mut self) -> Result<T> {
        self.0
            .take()
            .ok_or_else(|| Error::Protocol("observe called without a pending step".into()))
    }
}

pub(crate) fn check_estimate(est: &ProbEstimate, task: TaskKind) -> Result<()> {
    if est.num_labels() != task.num_labels() {
        return Err(Error::invalid(format!(
            "estimate over {} labels for a task with {}",
            est.num_labels(),
            task.num_labels()
        )));
    }
    Ok(())
}
