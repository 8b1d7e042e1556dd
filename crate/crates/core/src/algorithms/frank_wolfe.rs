//! Batch Frank-Wolfe over achievable confusion matrices, and the online and
//! offline learners built on it.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::baseline::{Baseline, BaselineRule};
use super::{check_estimate, AlgorithmConfig, AlgorithmKind, CostTensor, OnlineLearner, Pending, Setup};
use crate::confusion::{ConfusionMatrix, ConfusionState, LabelSet, LabelVector, Prediction, TaskKind};
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::policy::ProbEstimate;

/// Instances per parallel chunk. Fixed so sums do not depend on the thread
/// count.
const CHUNK: usize = 1024;

/// One cost-sensitive classifier of a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub cost: CostTensor,
}

/// A randomized classifier: each prediction uses one component drawn with
/// probability equal to its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureClassifier {
    pub components: Vec<Component>,
    /// Confusion matrix of the mixture on the fitting sample.
    pub confusion: ConfusionMatrix,
    budget: Option<usize>,
}

impl MixtureClassifier {
    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Predicts with component `i`.
    pub fn predict_with(&self, i: usize, est: &ProbEstimate) -> Result<Prediction> {
        self.components[i].cost.decide(est, self.budget)
    }

    pub fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(self.weights()).expect("mixture weights are nonnegative and sum to one")
    }
}

/// Fits a mixture maximizing `metric` on a sample by Frank-Wolfe.
///
/// With `labels` the confusion of each candidate classifier is measured
/// against them; without, its expected confusion under the estimates is used.
/// `lambda` is added to every accumulated entry before normalizing, as in
/// [`ConfusionState`].
///
/// The first iterate is the all-negative classifier (multilabel), top-k by
/// estimate (budgeted), or a uniformly random class (multiclass). Its weight
/// vanishes after the first step, so the mixture holds one component per
/// iteration.
pub fn fw_fit(
    estimates: &[ProbEstimate],
    labels: Option<&[LabelVector]>,
    metric: &Metric,
    setup: Setup,
    iterations: usize,
    lambda: f64,
) -> Result<MixtureClassifier> {
    if estimates.is_empty() {
        return Err(Error::invalid("Frank-Wolfe needs a nonempty sample"));
    }
    if iterations == 0 {
        return Err(Error::invalid("Frank-Wolfe needs at least one iteration"));
    }
    if let Some(y) = labels {
        if y.len() != estimates.len() {
            return Err(Error::invalid("labels and estimates differ in length"));
        }
    }
    for est in estimates {
        check_estimate(est, setup.task)?;
    }

    let mut current = initial_confusion(estimates, labels, setup, lambda)?;
    let mut components: Vec<Component> = Vec::with_capacity(iterations);
    for q in 0..iterations {
        let gamma = 2.0 / (q as f64 + 2.0);
        let cost = CostTensor::from_gradient(metric.gradient(&current)?)?;
        let c_q = sample_confusion(estimates, labels, setup, lambda, |est| cost.decide(est, setup.budget))?;
        current = current.lerp(&c_q, gamma);
        for c in &mut components {
            c.weight *= 1.0 - gamma;
        }
        components.push(Component { weight: gamma, cost });
    }
    Ok(MixtureClassifier {
        components,
        confusion: current,
        budget: setup.budget,
    })
}

fn initial_confusion(
    estimates: &[ProbEstimate],
    labels: Option<&[LabelVector]>,
    setup: Setup,
    lambda: f64,
) -> Result<ConfusionMatrix> {
    match (setup.view, setup.budget) {
        (TaskKind::Multiclass(m), _) => {
            // Every class predicted with probability 1/m: each row's mass is
            // spread evenly over the columns.
            let mut rows = vec![0.0; m];
            for (i, est) in estimates.iter().enumerate() {
                match labels {
                    Some(y) => rows[y[i].indices()[0]] += 1.0,
                    None => {
                        for &(j, p) in est.entries() {
                            rows[j] += p;
                        }
                    }
                }
            }
            let n = estimates.len() as f64;
            let data = (0..m * m).map(|i| (lambda + rows[i / m] / m as f64) / n).collect();
            ConfusionMatrix::from_flat(setup.view, data)
        }
        (_, Some(_)) => {
            let top_k = Baseline::new(BaselineRule::TopK, setup)?;
            sample_confusion(estimates, labels, setup, lambda, |est| top_k.predict(est))
        }
        (_, None) => sample_confusion(estimates, labels, setup, lambda, |_| Ok(LabelSet::empty())),
    }
}

/// Normalized confusion of a classifier over the sample.
fn sample_confusion(
    estimates: &[ProbEstimate],
    labels: Option<&[LabelVector]>,
    setup: Setup,
    lambda: f64,
    classify: impl Fn(&ProbEstimate) -> Result<Prediction> + Sync,
) -> Result<ConfusionMatrix> {
    let partial: Vec<Result<ConfusionState>> = estimates
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut state = ConfusionState::new(setup.view, 0.0)?;
            for (i, est) in chunk.iter().enumerate() {
                let yhat = classify(est)?;
                match labels {
                    Some(y) => state.update(&y[c * CHUNK + i], &yhat)?,
                    None => state.update_semi(est, &yhat)?,
                }
            }
            Ok(state)
        })
        .collect();
    let mut total = vec![lambda; setup.view.num_entries()];
    for state in partial {
        for (t, a) in total.iter_mut().zip(state?.accumulator()) {
            *t += a;
        }
    }
    let n = estimates.len() as f64;
    ConfusionMatrix::from_flat(setup.view, total.into_iter().map(|x| x / n).collect())
}

/// How the refit points grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScheduleReading {
    /// Successive refits are `base * ratio^i` instances apart.
    #[default]
    Interval,
    /// Refit when the buffer holds `base * ratio^i` instances.
    Cumulative,
}

/// Buffer sizes at which Online-FW refits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefitSchedule {
    pub base: f64,
    pub ratio: f64,
    pub reading: ScheduleReading,
}

impl Default for RefitSchedule {
    fn default() -> Self {
        RefitSchedule {
            base: 10.0,
            ratio: 1.1,
            reading: ScheduleReading::Interval,
        }
    }
}

impl RefitSchedule {
    /// Strictly increasing refit points (buffer sizes).
    pub fn points(&self) -> impl Iterator<Item = usize> {
        let RefitSchedule { base, ratio, reading } = *self;
        let mut i = 0i32;
        let mut sum = 0.0;
        let mut last = 0usize;
        std::iter::from_fn(move || loop {
            let term = base * ratio.powi(i);
            i += 1;
            let x = match reading {
                ScheduleReading::Interval => {
                    sum += term;
                    sum
                }
                ScheduleReading::Cumulative => term,
            };
            // The slack absorbs rounding in sums that are integral in exact
            // arithmetic.
            let point = ((x + 1e-9).floor() as usize).max(1);
            if point > last {
                last = point;
                return Some(point);
            }
        })
    }
}

/// Frank-Wolfe refitted on everything seen so far at the schedule's points.
pub struct OnlineFw {
    kind: AlgorithmKind,
    metric: Metric,
    setup: Setup,
    lambda: f64,
    iterations: usize,
    deterministic: bool,
    schedule: Box<dyn Iterator<Item = usize> + Send>,
    next_refit: usize,
    estimates: Vec<ProbEstimate>,
    labels: Vec<LabelVector>,
    mixture: Option<(MixtureClassifier, WeightedIndex<f64>)>,
    fallback: Baseline,
    rng: ChaCha8Rng,
    pending: Pending<ProbEstimate>,
}

impl OnlineFw {
    pub(crate) fn new(config: &AlgorithmConfig, setup: Setup) -> Result<Self> {
        let mut schedule = Box::new(config.schedule.points());
        let next_refit = schedule.next().expect("schedule is infinite");
        Ok(OnlineFw {
            kind: config.kind,
            metric: config.metric,
            setup,
            lambda: config.lambda,
            iterations: config.fw_iterations,
            deterministic: config.deterministic_mixture,
            schedule,
            next_refit,
            estimates: Vec::new(),
            labels: Vec::new(),
            mixture: None,
            fallback: Baseline::new(fallback_rule(setup), setup)?,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            pending: Pending::default(),
        })
    }

    pub fn mixture(&self) -> Option<&MixtureClassifier> {
        self.mixture.as_ref().map(|m| &m.0)
    }

    fn refit(&mut self) -> Result<()> {
        let labels = (self.kind == AlgorithmKind::OnlineFw).then_some(self.labels.as_slice());
        let mix = fw_fit(&self.estimates, labels, &self.metric, self.setup, self.iterations, self.lambda)?;
        let sampler = mix.sampler();
        self.mixture = Some((mix, sampler));
        Ok(())
    }
}

fn fallback_rule(setup: Setup) -> BaselineRule {
    if setup.budget.is_some() || setup.is_native() {
        BaselineRule::TopK
    } else {
        BaselineRule::Threshold05
    }
}

fn mixture_predict(
    mixture: &(MixtureClassifier, WeightedIndex<f64>),
    deterministic: bool,
    rng: &mut ChaCha8Rng,
    est: &ProbEstimate,
) -> Result<Prediction> {
    let (mix, sampler) = mixture;
    let i = if deterministic { mix.len() - 1 } else { sampler.sample(rng) };
    mix.predict_with(i, est)
}

impl OnlineLearner for OnlineFw {
    fn step(&mut self, est: &ProbEstimate) -> Result<Prediction> {
        self.pending.check_free()?;
        check_estimate(est, self.setup.task)?;
        let yhat = match &self.mixture {
            Some(m) => mixture_predict(m, self.deterministic, &mut self.rng, est)?,
            None => self.fallback.predict(est)?,
        };
        self.pending.begin(est.clone())?;
        Ok(yhat)
    }

    fn observe(&mut self, y: &LabelVector) -> Result<()> {
        let est = self.pending.finish()?;
        y.check(self.setup.task, "label")?;
        self.estimates.push(est);
        self.labels.push(y.clone());
        if self.estimates.len() == self.next_refit {
            self.refit()?;
            self.next_refit = self.schedule.next().expect("schedule is infinite");
        }
        Ok(())
    }

    fn kind(&self) -> AlgorithmKind {
        self.kind
    }
}

/// Frank-Wolfe mixture fitted once on a separate labeled sample.
pub struct OfflineFw {
    setup: Setup,
    deterministic: bool,
    mixture: (MixtureClassifier, WeightedIndex<f64>),
    rng: ChaCha8Rng,
    pending: Pending<()>,
}

impl OfflineFw {
    pub(crate) fn new(config: &AlgorithmConfig, setup: Setup) -> Result<Self> {
        let sample = config
            .offline_sample
            .as_ref()
            .ok_or_else(|| Error::invalid("offline-fw needs a fitting sample"))?;
        let (estimates, labels) = &**sample;
        for y in labels {
            y.check(setup.task, "label")?;
        }
        let mix = fw_fit(estimates, Some(labels), &config.metric, setup, config.fw_iterations, config.lambda)?;
        let sampler = mix.sampler();
        Ok(OfflineFw {
            setup,
            deterministic: config.deterministic_mixture,
            mixture: (mix, sampler),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            pending: Pending::default(),
        })
    }

    pub fn mixture(&self) -> &MixtureClassifier {
        &self.mixture.0
    }
}

impl OnlineLearner for OfflineFw {
    fn step(&mut self, est: &ProbEstimate) -> Result<Prediction> {
        self.pending.check_free()?;
        check_estimate(est, self.setup.task)?;
        let yhat = mixture_predict(&self.mixture, self.deterministic, &mut self.rng, est)?;
        self.pending.begin(())?;
        Ok(yhat)
    }

    fn observe(&mut self, y: &LabelVector) -> Result<()> {
        self.pending.finish()?;
        y.check(self.setup.task, "label")
    }

    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::OfflineFw
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Metric;
    use rand::Rng;

    fn setup(metric: &Metric, task: TaskKind, budget: Option<usize>) -> Setup {
        Setup::new(task, metric, budget).unwrap()
    }

    fn random_sample(m: usize, n: usize, seed: u64) -> Vec<ProbEstimate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| ProbEstimate::from_dense(&(0..m).map(|_| rng.random::<f64>().powi(2)).collect::<Vec<_>>()).unwrap())
            .collect()
    }

    #[test]
    fn schedule_points() {
        let interval: Vec<usize> = RefitSchedule::default().points().take(4).collect();
        assert_eq!(interval, vec![10, 21, 33, 46]);
        let cumulative: Vec<usize> = RefitSchedule { reading: ScheduleReading::Cumulative, ..Default::default() }
            .points()
            .take(6)
            .collect();
        assert_eq!(cumulative, vec![10, 11, 12, 13, 14, 16]);
        let long: Vec<usize> = RefitSchedule::default().points().take(200).collect();
        assert!(long.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn linear_metric_needs_one_component() {
        let metric = Metric::parse("macro-accuracy").unwrap();
        let sample = random_sample(3, 200, 1);
        let mix = fw_fit(&sample, None, &metric, setup(&metric, TaskKind::Multilabel(3), None), 1, 0.0).unwrap();
        assert_eq!(mix.weights(), vec![1.0]);
        for est in &sample {
            let want: Vec<usize> = (0..3).filter(|&j| est.get(j) >= 0.5).collect();
            assert_eq!(mix.predict_with(0, est).unwrap().indices(), want.as_slice());
        }
    }

    #[test]
    fn weights_follow_step_sizes() {
        let metric = Metric::parse("macro-f1").unwrap();
        let sample = random_sample(4, 300, 2);
        let k = 12;
        let mix = fw_fit(&sample, None, &metric, setup(&metric, TaskKind::Multilabel(4), None), k, 0.0).unwrap();
        let w = mix.weights();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let gamma = |q: usize| 2.0 / (q as f64 + 2.0);
        for (q, wq) in w.iter().enumerate() {
            let want = gamma(q) * ((q + 1)..k).map(|r| 1.0 - gamma(r)).product::<f64>();
            assert!((wq - want).abs() < 1e-12, "{q}: {wq} vs {want}");
        }
    }

    #[test]
    fn converges_on_hmean() {
        let metric = Metric::parse("macro-hmean").unwrap();
        let sample = random_sample(5, 2000, 3);
        let s = setup(&metric, TaskKind::Multilabel(5), None);
        let a = fw_fit(&sample, None, &metric, s, 50, 0.0).unwrap();
        let b = fw_fit(&sample, None, &metric, s, 100, 0.0).unwrap();
        let (va, vb) = (metric.value(&a.confusion).unwrap(), metric.value(&b.confusion).unwrap());
        assert!((va - vb).abs() <= 1e-3, "{va} vs {vb}");
    }

    #[test]
    fn budgeted_and_multiclass_fits() {
        let metric = Metric::parse("macro-f1").unwrap();
        let sample = random_sample(5, 100, 4);
        let s = setup(&metric, TaskKind::Multilabel(5), Some(2));
        let mix = fw_fit(&sample, None, &metric, s, 5, 0.0).unwrap();
        for i in 0..mix.len() {
            assert!(sample.iter().all(|e| mix.predict_with(i, e).unwrap().len() == 2));
        }

        let metric = Metric::parse("mc-gmean").unwrap();
        let task = TaskKind::Multiclass(3);
        let sample: Vec<ProbEstimate> = random_sample(3, 100, 5)
            .iter()
            .map(|e| {
                let s = e.sum();
                ProbEstimate::from_dense(&e.dense().iter().map(|p| p / s).collect::<Vec<_>>()).unwrap()
            })
            .collect();
        let mix = fw_fit(&sample, None, &metric, setup(&metric, task, None), 10, 0.0).unwrap();
        assert!((mix.confusion.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_is_rejected() {
        let metric = Metric::parse("macro-f1").unwrap();
        assert!(fw_fit(&[], None, &metric, setup(&metric, TaskKind::Multilabel(2), None), 5, 0.0).is_err());
    }

    #[test]
    fn online_fw_is_deterministic_and_falls_back() {
        let metric = Metric::parse("macro-f1").unwrap();
        let task = TaskKind::Multilabel(3);
        let sample = random_sample(3, 60, 6);
        let run = |seed| {
            let config = AlgorithmConfig::new(AlgorithmKind::OnlineFw, metric, task).with_seed(seed);
            let mut alg = config.build().unwrap();
            let mut out = Vec::new();
            for (i, est) in sample.iter().enumerate() {
                out.push(alg.step(est).unwrap());
                alg.observe(&LabelSet::from_sorted(vec![i % 3]).unwrap()).unwrap();
            }
            out
        };
        let a = run(9);
        assert_eq!(a, run(9));
        for (est, p) in sample.iter().zip(&a).take(10) {
            let want: Vec<usize> = (0..3).filter(|&j| est.get(j) > 0.5).collect();
            assert_eq!(p.indices(), want.as_slice());
        }
    }
}
