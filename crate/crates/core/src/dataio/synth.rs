//! A synthetic data source with known conditional probabilities.
//!
//! Each label `j` has a prior `p_j` and a weight vector `w_j` in `R^d`. For
//! an instance `x ~ N(0, I_d)`, `η_j(x) = sigmoid(logit(p_j) + w_j · x)`.
//! Multilabel labels are independent Bernoulli draws; multiclass tasks
//! normalize `η` and draw one class.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};

use super::{parse_key_values, InstanceStream};
use crate::confusion::{LabelSet, TaskKind};
use crate::error::{Error, Result};
use crate::policy::ProbEstimate;

/// RNG stream for the model parameters; instance streams use others.
const PARAMETER_STREAM: u64 = 0;
const INSTANCE_STREAM: u64 = 1;

/// Parameters of a [`SynthModel`], as stored in a `key=value` model file.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub task: TaskKind,
    pub d: usize,
    pub seed: u64,
    pub prior_low: f64,
    pub prior_high: f64,
    pub weight_scale: f64,
}

impl SynthParams {
    pub fn multilabel(m: usize) -> Self {
        SynthParams {
            task: TaskKind::Multilabel(m),
            d: 4,
            seed: 0,
            prior_low: 0.05,
            prior_high: 0.5,
            weight_scale: 1.0,
        }
    }

    /// Reads `m, d, seed, prior_low, prior_high, weight_scale` and the
    /// optional `task` (`multilabel` or `multiclass`). Missing keys other
    /// than `m` take the defaults of [`SynthParams::multilabel`].
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut m = None;
        let mut multiclass = false;
        let mut p = SynthParams::multilabel(1);
        for (key, value) in parse_key_values(text)? {
            let bad = || Error::invalid(format!("bad value `{value}` for `{key}`"));
            match key.as_str() {
                "m" => m = Some(value.parse().map_err(|_| bad())?),
                "d" => p.d = value.parse().map_err(|_| bad())?,
                "seed" => p.seed = value.parse().map_err(|_| bad())?,
                "prior_low" => p.prior_low = value.parse().map_err(|_| bad())?,
                "prior_high" => p.prior_high = value.parse().map_err(|_| bad())?,
                "weight_scale" => p.weight_scale = value.parse().map_err(|_| bad())?,
                "task" => {
                    multiclass = match value.as_str() {
                        "multilabel" => false,
                        "multiclass" => true,
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(Error::invalid(format!("unknown model key `{key}`"))),
            }
        }
        let m = m.ok_or_else(|| Error::invalid("model file must set `m`"))?;
        p.task = if multiclass { TaskKind::multiclass(m)? } else { TaskKind::multilabel(m)? };
        Ok(p)
    }

    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let kind = if self.task.is_multiclass() { "multiclass" } else { "multilabel" };
        writeln!(s, "task={kind}").unwrap();
        writeln!(s, "m={}", self.task.num_labels()).unwrap();
        writeln!(s, "d={}", self.d).unwrap();
        writeln!(s, "seed={}", self.seed).unwrap();
        writeln!(s, "prior_low={}", self.prior_low).unwrap();
        writeln!(s, "prior_high={}", self.prior_high).unwrap();
        writeln!(s, "weight_scale={}", self.weight_scale).unwrap();
        s
    }
}

/// Known-`η` data source.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthModel {
    pub params: SynthParams,
    pub priors: Vec<f64>,
    /// `m` rows of `d` weights.
    pub weights: Vec<Vec<f64>>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl SynthModel {
    pub fn new(params: SynthParams) -> Result<Self> {
        params.task.validate()?;
        let SynthParams { prior_low: lo, prior_high: hi, .. } = params;
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return Err(Error::invalid(format!("priors need 0 < prior_low <= prior_high < 1, got [{lo}, {hi}]")));
        }
        if !(params.weight_scale >= 0.0 && params.weight_scale.is_finite()) {
            return Err(Error::invalid("weight_scale must be nonnegative"));
        }
        let m = params.task.num_labels();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(PARAMETER_STREAM);
        let prior_dist = Uniform::new_inclusive(lo, hi).map_err(|e| Error::invalid(e.to_string()))?;
        let priors: Vec<f64> = (0..m).map(|_| prior_dist.sample(&mut rng)).collect();
        let weight_dist = Normal::new(0.0, params.weight_scale).map_err(|e| Error::invalid(e.to_string()))?;
        let weights = (0..m)
            .map(|_| (0..params.d).map(|_| weight_dist.sample(&mut rng)).collect())
            .collect();
        Ok(SynthModel { params, priors, weights })
    }

    pub fn task(&self) -> TaskKind {
        self.params.task
    }

    /// Conditional probabilities at `x`.
    pub fn eta(&self, x: &[f64]) -> Vec<f64> {
        let mut eta: Vec<f64> = self
            .priors
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| {
                let z = (p / (1.0 - p)).ln() + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                sigmoid(z)
            })
            .collect();
        if self.task().is_multiclass() {
            let s: f64 = eta.iter().sum();
            eta.iter_mut().for_each(|e| *e /= s);
        }
        eta
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, LabelSet) {
        let x: Vec<f64> = (0..self.params.d).map(|_| rng.sample(StandardNormal)).collect();
        let eta = self.eta(&x);
        let y = if self.task().is_multiclass() {
            let class = WeightedIndex::new(&eta).expect("positive probabilities");
            LabelSet::single(class.sample(rng))
        } else {
            LabelSet::from_sorted(
                eta.iter().enumerate().filter(|(_, e)| rng.random::<f64>() < **e).map(|(j, _)| j).collect(),
            )
            .expect("increasing")
        };
        (eta, y)
    }

    fn instance_rng(&self, seed: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(INSTANCE_STREAM);
        rng
    }

    /// `n` instances drawn with the model's own seed; estimates are exact.
    pub fn generate(&self, n: usize) -> InstanceStream {
        self.generate_with_seed(n, self.params.seed)
    }

    /// `n` instances whose draws depend only on the model and `seed`.
    pub fn generate_with_seed(&self, n: usize, seed: u64) -> InstanceStream {
        let mut rng = self.instance_rng(seed);
        let m = self.task().num_labels();
        let mut labels = Vec::with_capacity(n);
        let mut truth = Vec::with_capacity(n);
        for _ in 0..n {
            let (eta, y) = self.draw(&mut rng);
            labels.push(y);
            truth.push(ProbEstimate::new(m, eta.into_iter().enumerate().collect()).expect("valid probabilities"));
        }
        InstanceStream {
            task: self.task(),
            labels,
            estimates: truth.clone(),
            truth: Some(truth),
        }
    }

    /// Like [`SynthModel::generate_with_seed`] but each estimate keeps only
    /// its `k` most probable labels, and the dense truth is not stored.
    pub fn generate_sparse(&self, n: usize, k: usize, seed: u64) -> InstanceStream {
        let mut rng = self.instance_rng(seed);
        let m = self.task().num_labels();
        let mut labels = Vec::with_capacity(n);
        let mut estimates = Vec::with_capacity(n);
        for _ in 0..n {
            let (eta, y) = self.draw(&mut rng);
            labels.push(y);
            let full = ProbEstimate::new(m, eta.into_iter().enumerate().collect()).expect("valid probabilities");
            estimates.push(full.top_k(k));
        }
        InstanceStream {
            task: self.task(),
            labels,
            estimates,
            truth: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let model = SynthModel::new(SynthParams { seed: 3, ..SynthParams::multilabel(4) }).unwrap();
        assert_eq!(model.generate(50), model.generate(50));
        assert_ne!(model.generate_with_seed(50, 1).labels, model.generate_with_seed(50, 2).labels);
        let again = SynthModel::new(SynthParams { seed: 3, ..SynthParams::multilabel(4) }).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn label_frequencies_match_eta() {
        let model = SynthModel::new(SynthParams { seed: 11, ..SynthParams::multilabel(3) }).unwrap();
        let n = 100_000;
        let s = model.generate(n);
        let truth = s.truth.as_ref().unwrap();
        for j in 0..3 {
            let freq = s.labels.iter().filter(|y| y.contains(j)).count() as f64 / n as f64;
            let mean_eta = truth.iter().map(|e| e.get(j)).sum::<f64>() / n as f64;
            let sd = (mean_eta * (1.0 - mean_eta) / n as f64).sqrt();
            assert!((freq - mean_eta).abs() <= 3.0 * sd, "label {j}: {freq} vs {mean_eta}");
        }
    }

    #[test]
    fn zero_dimensions_give_constant_eta() {
        let model = SynthModel::new(SynthParams { d: 0, seed: 5, ..SynthParams::multilabel(3) }).unwrap();
        for est in model.generate(20).estimates {
            for j in 0..3 {
                assert!((est.get(j) - model.priors[j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn multiclass_estimates_are_distributions() {
        let params = SynthParams { task: TaskKind::Multiclass(4), ..SynthParams::multilabel(4) };
        let model = SynthModel::new(params).unwrap();
        let s = model.generate(100);
        assert!(s.estimates.iter().all(|e| e.is_distribution()));
        assert!(s.labels.iter().all(|y| y.len() == 1));
    }

    #[test]
    fn model_file_round_trip() {
        let params = SynthParams { d: 2, seed: 9, prior_low: 0.1, prior_high: 0.3, weight_scale: 1.5, ..SynthParams::multilabel(7) };
        assert_eq!(SynthParams::from_key_values(&params.to_key_values()).unwrap(), params);
        let p = SynthParams::from_key_values("m=5\n# comment\n\nd = 3\n").unwrap();
        assert_eq!((p.task, p.d), (TaskKind::Multilabel(5), 3));
        assert!(SynthParams::from_key_values("d=3").is_err());
        assert!(SynthParams::from_key_values("m=3\ncolor=red").is_err());
        assert!(SynthModel::new(SynthParams { prior_low: 0.0, ..SynthParams::multilabel(2) }).is_err());
    }

    #[test]
    fn sparse_generation_truncates() {
        let model = SynthModel::new(SynthParams::multilabel(100)).unwrap();
        let s = model.generate_sparse(10, 5, 1);
        assert!(s.estimates.iter().all(|e| e.support_len() == 5));
        assert!(s.truth.is_none());
        assert_eq!(s.labels, model.generate_with_seed(10, 1).labels);
    }
}
