//! Brute-force reference implementations shared by the integration tests and
//! the acceptance suite. Nothing here calls the library's decision rules.

#![allow(dead_code)]

use omma::confusion::{expected_instance_confusion, instance_confusion, multiclass_to_multilabel, TN, TP};
use omma::metrics::registered_metrics;
use omma::{Averaging, Base, ConfusionMatrix, LabelSet, Metric, ProbEstimate, TaskKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Relative error used for gradient checks: `|a - b| / max(|a|, 1)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

/// Shapes a metric is checked on.
pub fn tasks_for(metric: &Metric) -> Vec<TaskKind> {
    match metric.averaging {
        Averaging::BinaryDirect => vec![TaskKind::Multilabel(1), TaskKind::Multiclass(2)],
        Averaging::Macro | Averaging::Micro => vec![TaskKind::Multilabel(4), TaskKind::Multiclass(3)],
        Averaging::MulticlassNative => vec![TaskKind::Multiclass(2), TaskKind::Multiclass(4)],
    }
}

/// A confusion matrix with every entry at least `floor` (before scaling).
/// Multilabel blocks sum to one each, multiclass matrices in total.
pub fn random_interior(rng: &mut ChaCha8Rng, task: TaskKind, floor: f64) -> ConfusionMatrix {
    let mut data: Vec<f64> = (0..task.num_entries()).map(|_| rng.random_range(floor..1.0)).collect();
    match task {
        TaskKind::Multilabel(_) => {
            for b in data.chunks_exact_mut(4) {
                let s: f64 = b.iter().sum();
                b.iter_mut().for_each(|x| *x /= s);
            }
        }
        TaskKind::Multiclass(_) => {
            let s: f64 = data.iter().sum();
            data.iter_mut().for_each(|x| *x /= s);
        }
    }
    ConfusionMatrix::from_flat(task, data).unwrap()
}

/// Smallest `|tn - tp|` over the per-label blocks the metric sees.
fn min_tie_gap(metric: &Metric, c: &ConfusionMatrix) -> f64 {
    let blocks = match (metric.averaging, c.task()) {
        (_, TaskKind::Multilabel(_)) => c.clone(),
        (Averaging::BinaryDirect, TaskKind::Multiclass(_)) => {
            let d = c.data();
            ConfusionMatrix::from_flat(TaskKind::Multilabel(1), d.to_vec()).unwrap()
        }
        _ => multiclass_to_multilabel(c).unwrap(),
    };
    let m = blocks.task().num_labels();
    let mut gap = f64::INFINITY;
    for j in 0..m {
        let b = blocks.block_array(j);
        gap = gap.min((b[TN] - b[TP]).abs());
    }
    if metric.averaging == Averaging::Micro {
        let mb = blocks.mean_block();
        gap = gap.min((mb.tn - mb.tp).abs());
    }
    gap
}

/// Largest relative error between the analytic gradient and central
/// differences with step `h` at `c`.
pub fn fd_max_error(metric: &Metric, c: &ConfusionMatrix, h: f64) -> f64 {
    let g = metric.gradient(c).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..c.data().len() {
        let shifted = |d: f64| {
            let mut v = c.data().to_vec();
            v[i] += d;
            metric.value(&ConfusionMatrix::from_flat(c.task(), v).unwrap()).unwrap()
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        worst = worst.max(rel_err(g.data()[i], fd));
    }
    worst
}

/// Runs the finite-difference check on `cases` random interior matrices per
/// shape. Returns `(checked, worst relative error, name of the worst metric)`.
pub fn fd_suite(rng: &mut ChaCha8Rng, cases: usize, h: f64) -> (usize, f64, String) {
    let mut checked = 0;
    let mut worst = (0.0, String::new());
    for metric in registered_metrics() {
        for task in tasks_for(&metric) {
            let mut done = 0;
            while done < cases {
                let c = random_interior(rng, task, 0.05);
                // The minimum is differentiable only away from ties.
                if metric.base == Base::MinTnTp && min_tie_gap(&metric, &c) < 100.0 * h {
                    continue;
                }
                let e = fd_max_error(&metric, &c, h);
                if e > worst.0 {
                    worst = (e, format!("{} on {:?}", metric.name(), task));
                }
                done += 1;
                checked += 1;
            }
        }
    }
    (checked, worst.0, worst.1)
}

/// Two matrices with the same row sums (per block for multilabel tasks).
pub fn same_rows_pair(rng: &mut ChaCha8Rng, task: TaskKind) -> (ConfusionMatrix, ConfusionMatrix) {
    match task {
        TaskKind::Multilabel(m) => {
            let priors: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..0.95)).collect();
            let make = |rng: &mut ChaCha8Rng| {
                let mut data = Vec::with_capacity(4 * m);
                for &p in &priors {
                    let (u, v): (f64, f64) = (rng.random(), rng.random());
                    let (tp, fp) = (u * p, v * (1.0 - p));
                    data.extend([1.0 - p - fp, fp, p - tp, tp]);
                }
                ConfusionMatrix::from_flat(task, data).unwrap()
            };
            (make(rng), make(rng))
        }
        TaskKind::Multiclass(m) => {
            let rows: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = rows.iter().sum();
            let make = |rng: &mut ChaCha8Rng| {
                let mut data = Vec::with_capacity(m * m);
                for &r in &rows {
                    let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
                    let s: f64 = w.iter().sum();
                    data.extend(w.iter().map(|x| x / s * r / total));
                }
                ConfusionMatrix::from_flat(task, data).unwrap()
            };
            (make(rng), make(rng))
        }
    }
}

/// `psi(mid) - mean(psi(a), psi(b))` at the midpoint of a random pair.
pub fn chord_gap(rng: &mut ChaCha8Rng, metric: &Metric, task: TaskKind) -> f64 {
    let (a, b) = same_rows_pair(rng, task);
    let mid = a.lerp(&b, 0.5);
    let v = |c: &ConfusionMatrix| metric.value(c).unwrap();
    v(&mid) - 0.5 * (v(&a) + v(&b))
}

/// Every subset of `0..m`, or every subset of size `k`.
pub fn subsets(m: usize, k: Option<usize>) -> Vec<LabelSet> {
    (0u32..1 << m)
        .filter(|mask| k.is_none_or(|k| mask.count_ones() as usize == k))
        .map(|mask| LabelSet::from_sorted((0..m).filter(|j| mask >> j & 1 == 1).collect()).unwrap())
        .collect()
}

/// Candidate predictions for a task: single classes or label subsets.
pub fn candidates(task: TaskKind, budget: Option<usize>) -> Vec<LabelSet> {
    match task {
        TaskKind::Multiclass(m) => (0..m).map(LabelSet::single).collect(),
        TaskKind::Multilabel(m) => subsets(m, budget),
    }
}

/// Value of the metric linearized at `at`, evaluated at the expected confusion
/// of predicting `yhat` under `est` (constant terms included).
pub fn linearized(metric: &Metric, at: &ConfusionMatrix, est: &ProbEstimate, yhat: &LabelSet) -> f64 {
    let g = metric.gradient(at).unwrap();
    g.dot(&expected_instance_confusion(at.task(), est, yhat).unwrap())
}

/// Best linearized value over all candidates.
pub fn linearized_max(metric: &Metric, at: &ConfusionMatrix, est: &ProbEstimate, budget: Option<usize>) -> f64 {
    candidates(at.task(), budget)
        .iter()
        .map(|c| linearized(metric, at, est, c))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Expected metric value after one more instance, `y` drawn label-wise
/// independently from `est`, with `acc` the unnormalized counts so far.
pub fn expected_next_value(
    metric: &Metric,
    task: TaskKind,
    acc: &[f64],
    t: u64,
    est: &ProbEstimate,
    yhat: &LabelSet,
) -> f64 {
    let m = task.num_labels();
    let eta = est.dense();
    let mut total = 0.0;
    for y in subsets(m, None) {
        let p: f64 = (0..m).map(|j| if y.contains(j) { eta[j] } else { 1.0 - eta[j] }).product();
        if p == 0.0 {
            continue;
        }
        let inst = instance_confusion(task, &y, yhat).unwrap();
        let data: Vec<f64> = acc.iter().zip(inst.data()).map(|(a, b)| (a + b) / (t + 1) as f64).collect();
        total += p * metric.value(&ConfusionMatrix::from_flat(task, data).unwrap()).unwrap();
    }
    total
}

/// A random label-marginal vector with some exact zeros and ones.
pub fn random_marginals(rng: &mut ChaCha8Rng, m: usize) -> ProbEstimate {
    let p: Vec<f64> = (0..m)
        .map(|_| match rng.random_range(0..10) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random(),
        })
        .collect();
    ProbEstimate::from_dense(&p).unwrap()
}

/// A random class distribution, sometimes with zero entries.
pub fn random_distribution(rng: &mut ChaCha8Rng, m: usize) -> ProbEstimate {
    let w: Vec<f64> = (0..m).map(|_| if rng.random_range(0..5) == 0 { 0.0 } else { rng.random() }).collect();
    let s: f64 = w.iter().sum();
    if s == 0.0 {
        let mut p = vec![0.0; m];
        p[rng.random_range(0..m)] = 1.0;
        return ProbEstimate::from_dense(&p).unwrap();
    }
    let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
    // Make the sum exactly representable as 1 within the library's tolerance.
    let drift: f64 = 1.0 - p.iter().sum::<f64>();
    let last = p.iter().rposition(|&x| x > 0.0).unwrap();
    p[last] = (p[last] + drift).clamp(0.0, 1.0);
    ProbEstimate::from_dense(&p).unwrap()
}

/// Draws a label vector from marginals (independent labels) or a class from a
/// distribution.
pub fn draw_labels(rng: &mut ChaCha8Rng, task: TaskKind, est: &ProbEstimate) -> LabelSet {
    let p = est.dense();
    match task {
        TaskKind::Multilabel(m) => {
            LabelSet::from_sorted((0..m).filter(|&j| rng.random::<f64>() < p[j]).collect()).unwrap()
        }
        TaskKind::Multiclass(m) => {
            let mut u: f64 = rng.random();
            for (j, &pj) in p.iter().enumerate() {
                if u < pj {
                    return LabelSet::single(j);
                }
                u -= pj;
            }
            LabelSet::single(p.iter().rposition(|&x| x > 0.0).unwrap_or(m - 1))
        }
    }
}

/// Metrics that can score a task, each with its registered averaging.
pub fn metrics_for(task: TaskKind) -> Vec<Metric> {
    registered_metrics().into_iter().filter(|m| m.check_task(task).is_ok()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionSetting {
    Multiclass,
    Multilabel,
    Budgeted,
}

/// Outcome of a batch of oracle comparisons.
#[derive(Debug, Clone, Default)]
pub struct OracleTally {
    pub cases: usize,
    pub mismatches: usize,
    pub first_failure: Option<String>,
}

impl OracleTally {
    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.mismatches += 1;
            self.first_failure.get_or_insert_with(describe);
        }
    }
}

/// Compares OMMA's prediction after a random history with the exhaustive
/// maximizer of the linearized metric, `cases` times.
///
/// Multiclass tasks scored by macro- or micro-averaged metrics are checked
/// in the `m × m` space (with `lambda = 0`, where the two views coincide).
pub fn decision_suite(rng: &mut ChaCha8Rng, setting: DecisionSetting, cases: usize) -> OracleTally {
    use omma::{AlgorithmConfig, AlgorithmKind, ConfusionState};
    let mut tally = OracleTally::default();
    for _ in 0..cases {
        let (task, budget) = match setting {
            DecisionSetting::Multiclass => (TaskKind::Multiclass(rng.random_range(2..=10)), None),
            DecisionSetting::Multilabel => (TaskKind::Multilabel(rng.random_range(1..=10)), None),
            DecisionSetting::Budgeted => {
                let m = rng.random_range(2..=10);
                (TaskKind::Multilabel(m), Some(rng.random_range(1..=3.min(m))))
            }
        };
        let pool = metrics_for(task);
        let metric = pool[rng.random_range(0..pool.len())];
        let mut lambda = [0.0, 1e-3, 0.1][rng.random_range(0..3)];
        if task.is_multiclass() && matches!(metric.averaging, Averaging::Macro | Averaging::Micro) {
            lambda = 0.0;
        }
        let config = AlgorithmConfig::new(AlgorithmKind::Omma, metric, task)
            .with_lambda(lambda)
            .with_budget(budget);
        let mut learner = config.build().unwrap();
        let mut state = ConfusionState::new(task, lambda).unwrap();
        let estimate = |rng: &mut ChaCha8Rng| match task {
            TaskKind::Multiclass(m) => random_distribution(rng, m),
            TaskKind::Multilabel(m) => random_marginals(rng, m),
        };
        for _ in 0..rng.random_range(0..=30) {
            let est = estimate(rng);
            let yhat = learner.step(&est).unwrap();
            let y = draw_labels(rng, task, &est);
            learner.observe(&y).unwrap();
            state.update(&y, &yhat).unwrap();
        }
        let est = estimate(rng);
        let yhat = learner.step(&est).unwrap();
        let at = state.normalized();
        let best = linearized_max(&metric, &at, &est, budget);
        let got = linearized(&metric, &at, &est, &yhat);
        let ok = got >= best - 1e-12 * best.abs().max(1.0) && budget.is_none_or(|k| yhat.len() == k);
        tally.record(ok, || {
            format!("{} on {task:?}, budget {budget:?}, lambda {lambda}: got {got}, best {best}", metric.name())
        });
    }
    tally
}

/// Compares Greedy with the exhaustive maximizer of the expected next-step
/// metric on `streams` random streams of up to `max_t` instances and up to
/// `max_m` labels.
pub fn greedy_suite(rng: &mut ChaCha8Rng, metric: Metric, streams: usize, max_m: usize, max_t: usize) -> OracleTally {
    use omma::{AlgorithmConfig, AlgorithmKind, ConfusionState};
    let mut tally = OracleTally::default();
    for _ in 0..streams {
        let m = rng.random_range(1..=max_m);
        let task = TaskKind::Multilabel(m);
        let lambda = [0.0, 1e-3][rng.random_range(0..2)];
        let mut learner = AlgorithmConfig::new(AlgorithmKind::Greedy, metric, task)
            .with_lambda(lambda)
            .build()
            .unwrap();
        let mut state = ConfusionState::new(task, lambda).unwrap();
        for _ in 0..rng.random_range(1..=max_t) {
            let est = random_marginals(rng, m);
            let yhat = learner.step(&est).unwrap();
            let score = |c: &LabelSet| expected_next_value(&metric, task, state.accumulator(), state.t(), &est, c);
            let best = subsets(m, None).iter().map(score).fold(f64::NEG_INFINITY, f64::max);
            let got = score(&yhat);
            tally.record(got >= best - 1e-12, || {
                format!("{} m={m} t={} lambda {lambda}: got {got}, best {best}", metric.name(), state.t())
            });
            let y = draw_labels(rng, task, &est);
            learner.observe(&y).unwrap();
            state.update(&y, &yhat).unwrap();
        }
    }
    tally
}
