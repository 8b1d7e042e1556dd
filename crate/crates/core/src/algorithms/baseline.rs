use super::{check_estimate, AlgorithmKind, OnlineLearner, Pending, Setup};
use crate::confusion::{LabelSet, LabelVector, Prediction};
use crate::error::{Error, Result};
use crate::policy::ProbEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineRule {
    /// The `k` most probable labels (`k` = budget, or 1).
    TopK,
    /// Every label with estimate strictly above one half.
    Threshold05,
}

/// Metric-agnostic prediction rules that ignore feedback.
#[derive(Debug, Clone)]
pub struct Baseline {
    rule: BaselineRule,
    setup: Setup,
    pending: Pending<()>,
}

impl Baseline {
    pub fn new(rule: BaselineRule, setup: Setup) -> Result<Self> {
        if rule == BaselineRule::Threshold05 && setup.task.is_multiclass() {
            return Err(Error::invalid(
                "thresh05 can predict zero or several classes; use topk on multiclass tasks",
            ));
        }
        Ok(Baseline {
            rule,
            setup,
            pending: Pending::default(),
        })
    }

    pub fn predict(&self, est: &ProbEstimate) -> Result<Prediction> {
        match self.rule {
            BaselineRule::Threshold05 => LabelSet::from_sorted(
                est.entries().iter().filter(|e| e.1 > 0.5).map(|e| e.0).collect(),
            ),
            BaselineRule::TopK => {
                let k = self.setup.budget.unwrap_or(1);
                let mut idx: Vec<usize> = est.top_k(k).entries().iter().map(|e| e.0).collect();
                // A sparse estimate may list fewer than k labels; the rest
                // are the smallest unlisted indices.
                let mut j = 0;
                while idx.len() < k {
                    if est.entries().binary_search_by_key(&j, |e| e.0).is_err() {
                        idx.push(j);
                    }
                    j += 1;
                }
                LabelSet::from_unsorted(idx)
            }
        }
    }
}

impl OnlineLearner for Baseline {
    fn step(&mut self, est: &ProbEstimate) -> Result<Prediction> {
        self.pending.check_free()?;
        check_estimate(est, self.setup.task)?;
        let yhat = self.predict(est)?;
        self.pending.begin(())?;
        Ok(yhat)
    }

    fn observe(&mut self, y: &LabelVector) -> Result<()> {
        self.pending.finish()?;
        y.check(self.setup.task, "label")
    }

    fn kind(&self) -> AlgorithmKind {
        match self.rule {
            BaselineRule::TopK => AlgorithmKind::TopK,
            BaselineRule::Threshold05 => AlgorithmKind::Threshold05,
        }
    }
}
