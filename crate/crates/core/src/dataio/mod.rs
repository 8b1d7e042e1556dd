//! Instance streams: file formats, synthetic generation, noise and shuffling.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::confusion::{LabelVector, TaskKind};
use crate::error::{Error, Result};
use crate::policy::ProbEstimate;

pub mod formats;
pub mod synth;

pub use formats::{read_estimates, read_labels, write_estimates, write_labels};
pub use synth::{SynthModel, SynthParams};

/// Aligned labels and estimates, optionally with the true probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceStream {
    pub task: TaskKind,
    pub labels: Vec<LabelVector>,
    pub estimates: Vec<ProbEstimate>,
    pub truth: Option<Vec<ProbEstimate>>,
}

impl InstanceStream {
    pub fn new(
        task: TaskKind,
        labels: Vec<LabelVector>,
        estimates: Vec<ProbEstimate>,
        truth: Option<Vec<ProbEstimate>>,
    ) -> Result<Self> {
        task.validate()?;
        if labels.len() != estimates.len() {
            return Err(Error::Data(format!(
                "{} label lines but {} estimate lines",
                labels.len(),
                estimates.len()
            )));
        }
        if truth.as_ref().is_some_and(|t| t.len() != labels.len()) {
            return Err(Error::Data("truth and labels differ in length".into()));
        }
        for (i, (y, e)) in labels.iter().zip(&estimates).enumerate() {
            y.check(task, "label").map_err(|err| Error::Data(format!("instance {}: {err}", i + 1)))?;
            if e.num_labels() != task.num_labels() {
                return Err(Error::Data(format!("instance {}: estimate has the wrong label count", i + 1)));
            }
        }
        Ok(InstanceStream { task, labels, estimates, truth })
    }

    /// Reads a labels file and a probabilities file line by line.
    pub fn read(labels: &Path, probs: &Path, task: TaskKind) -> Result<Self> {
        InstanceStream::new(task, read_labels(labels, task)?, read_estimates(probs, task)?, None)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The same instances in a seeded random order.
    pub fn shuffled(&self, seed: u64) -> InstanceStream {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let pick = |v: &[ProbEstimate]| order.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
        InstanceStream {
            task: self.task,
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            estimates: pick(&self.estimates),
            truth: self.truth.as_deref().map(pick),
        }
    }

    /// Replaces the estimates by `clip(truth + N(0, sigma^2), 0, 1)` and
    /// returns the mean L2 distance between estimate and truth. Multiclass
    /// estimates are renormalized after clipping.
    pub fn perturbed(&self, sigma: f64, seed: u64) -> Result<(InstanceStream, f64)> {
        let truth = self
            .truth
            .as_ref()
            .ok_or_else(|| Error::Data("perturbing estimates needs the true probabilities".into()))?;
        let noise = Normal::new(0.0, sigma).map_err(|_| Error::invalid(format!("bad noise level {sigma}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = self.task.num_labels();
        let mut total_error = 0.0;
        let mut estimates = Vec::with_capacity(truth.len());
        for eta in truth {
            let eta = eta.dense();
            let mut est: Vec<f64> = eta.iter().map(|e| (e + noise.sample(&mut rng)).clamp(0.0, 1.0)).collect();
            if self.task.is_multiclass() {
                let s: f64 = est.iter().sum();
                if s > 0.0 {
                    est.iter_mut().for_each(|p| *p /= s);
                } else {
                    est.fill(1.0 / m as f64);
                }
            }
            total_error += eta.iter().zip(&est).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            estimates.push(ProbEstimate::from_dense(&est)?);
        }
        let mean_error = if truth.is_empty() { 0.0 } else { total_error / truth.len() as f64 };
        let stream = InstanceStream {
            task: self.task,
            labels: self.labels.clone(),
            estimates,
            truth: self.truth.clone(),
        };
        Ok((stream, mean_error))
    }
}

/// Parses flat `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("line {}: expected key=value, got `{line}`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
