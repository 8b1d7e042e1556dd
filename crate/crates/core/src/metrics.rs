//! Utilities of a confusion matrix, their gradients, and the name registry.
//!
//! Every formula adds `epsilon` to each of its denominators so that values and
//! gradients stay finite on degenerate matrices (including the all-zero one).
//! Root-based metrics put `epsilon` on the quantities under the root instead:
//! the geometric mean is taken over `recall + epsilon`, and the Q-mean radicand
//! and each Matthews factor get `+ epsilon`. Gradients are the exact
//! derivatives of these stabilized expressions.
//!
//! Binary formulas are written over a 2×2 block `[tn, fp, fn, tp]`, which is
//! the row-major layout of `[[C00, C01], [C10, C11]]`. The recall-based metrics
//! (balanced accuracy, G-, H- and Q-mean) share one implementation over an
//! `m × m` matrix; the binary versions are its `m = 2` case.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::confusion::{multiclass_to_multilabel, ConfusionMatrix, GradientTensor, TaskKind, FN, FP, TN, TP};
use crate::error::{Error, Result};

/// Denominator stabilizer used unless configured otherwise.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Entries of `min(C00, C11)` closer than this share the supergradient.
const MIN_TIE_TOLERANCE: f64 = 1e-12;

/// Underlying binary (or multiclass) utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Base {
    Accuracy,
    BalancedAccuracy,
    Recall,
    Precision,
    FBeta(f64),
    Jaccard,
    GMean,
    HMean,
    QMean,
    Matthews,
    /// `min(tn, tp)`: concave but not smooth; differentiated by supergradient.
    MinTnTp,
}

/// How a metric is applied to a confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Averaging {
    /// The binary formula on a single 2×2 matrix (`m = 1` multilabel or
    /// `m = 2` multiclass).
    BinaryDirect,
    /// Mean of the per-label metric values.
    Macro,
    /// Metric of the mean per-label block.
    Micro,
    /// The `m × m` formula on a multiclass matrix.
    MulticlassNative,
}

impl Averaging {
    pub const ALL: [Averaging; 4] = [
        Averaging::BinaryDirect,
        Averaging::Macro,
        Averaging::Micro,
        Averaging::MulticlassNative,
    ];

    /// Prefix used in metric names.
    pub fn prefix(&self) -> &'static str {
        match self {
            Averaging::BinaryDirect => "bin",
            Averaging::Macro => "macro",
            Averaging::Micro => "micro",
            Averaging::MulticlassNative => "mc",
        }
    }

    fn from_prefix(p: &str) -> Option<Self> {
        Averaging::ALL.into_iter().find(|a| a.prefix() == p)
    }
}

impl fmt::Display for Averaging {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Averaging::BinaryDirect => "binary",
            Averaging::Macro => "macro",
            Averaging::Micro => "micro",
            Averaging::MulticlassNative => "multiclass",
        })
    }
}

impl Base {
    /// Bases with an `m × m` formula.
    pub fn has_native_multiclass(&self) -> bool {
        matches!(
            self,
            Base::Accuracy | Base::BalancedAccuracy | Base::GMean | Base::HMean | Base::QMean
        )
    }

    /// Concave on the set of confusion matrices with fixed label marginals.
    pub fn is_concave(&self) -> bool {
        !matches!(self, Base::Precision | Base::FBeta(_) | Base::Jaccard | Base::Matthews)
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, Base::MinTnTp)
    }

    pub fn name(&self) -> String {
        match *self {
            Base::Accuracy => "accuracy".into(),
            Base::BalancedAccuracy => "balanced-acc".into(),
            Base::Recall => "recall".into(),
            Base::Precision => "precision".into(),
            Base::FBeta(1.0) => "f1".into(),
            Base::FBeta(b) => format!("fbeta:{b}"),
            Base::Jaccard => "jaccard".into(),
            Base::GMean => "gmean".into(),
            Base::HMean => "hmean".into(),
            Base::QMean => "qmean".into(),
            Base::Matthews => "matthews".into(),
            Base::MinTnTp => "min-tn-tp".into(),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        let base = match s {
            "accuracy" | "acc" => Base::Accuracy,
            "balanced-acc" | "balanced-accuracy" => Base::BalancedAccuracy,
            "recall" => Base::Recall,
            "precision" => Base::Precision,
            "f1" => Base::FBeta(1.0),
            "jaccard" => Base::Jaccard,
            "gmean" => Base::GMean,
            "hmean" => Base::HMean,
            "qmean" => Base::QMean,
            "matthews" | "mcc" => Base::Matthews,
            "min-tn-tp" => Base::MinTnTp,
            other => match other.strip_prefix("fbeta:") {
                Some(b) => {
                    let beta: f64 = b
                        .parse()
                        .map_err(|_| Error::UnsupportedMetric(format!("bad beta in `{other}`")))?;
                    if !(beta > 0.0 && beta.is_finite()) {
                        return Err(Error::UnsupportedMetric(format!(
                            "beta must be positive in `{other}`"
                        )));
                    }
                    Base::FBeta(beta)
                }
                None => return Err(Error::UnsupportedMetric(format!("unknown metric `{s}`"))),
            },
        };
        Ok(base)
    }
}

/// A utility `psi` of a confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub base: Base,
    pub averaging: Averaging,
    pub epsilon: f64,
    /// Number of labels each prediction must contain, if budgeted.
    pub budget_k: Option<usize>,
}

impl Metric {
    pub fn new(base: Base, averaging: Averaging) -> Result<Self> {
        if let Base::FBeta(b) = base {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::invalid(format!("beta must be positive, got {b}")));
            }
        }
        if averaging == Averaging::MulticlassNative && !base.has_native_multiclass() {
            return Err(Error::UnsupportedMetric(format!(
                "{} has no multiclass form; use macro- or micro-averaging",
                base.name()
            )));
        }
        Ok(Metric {
            base,
            averaging,
            epsilon: DEFAULT_EPSILON,
            budget_k: None,
        })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_budget(mut self, k: Option<usize>) -> Result<Self> {
        if k == Some(0) {
            return Err(Error::invalid("budget k must be positive"));
        }
        self.budget_k = k;
        Ok(self)
    }

    /// Parses `[<avg>-]<base>[@k]`, e.g. `macro-f1@3`, `mc-gmean`,
    /// `micro-fbeta:2`. A missing prefix means macro-averaging.
    pub fn parse(name: &str) -> Result<Self> {
        let (body, budget) = match name.rsplit_once('@') {
            Some((body, k)) => {
                let k: usize = k
                    .parse()
                    .ok()
                    .filter(|&k| k > 0)
                    .ok_or_else(|| Error::UnsupportedMetric(format!("bad budget in `{name}`")))?;
                (body, Some(k))
            }
            None => (name, None),
        };
        let (averaging, base) = match body.split_once('-') {
            Some((p, rest)) if Averaging::from_prefix(p).is_some() => {
                (Averaging::from_prefix(p).unwrap(), rest)
            }
            _ => (Averaging::Macro, body),
        };
        let base = Base::parse(base).map_err(|e| match e {
            Error::UnsupportedMetric(_) => Error::UnsupportedMetric(format!("unknown metric `{name}`")),
            e => e,
        })?;
        Metric::new(base, averaging)?.with_budget(budget)
    }

    /// Canonical name, the inverse of [`Metric::parse`].
    pub fn name(&self) -> String {
        let mut s = format!("{}-{}", self.averaging.prefix(), self.base.name());
        if let Some(k) = self.budget_k {
            s.push_str(&format!("@{k}"));
        }
        s
    }

    /// Checks that the metric can be evaluated on a matrix of this shape.
    pub fn check_task(&self, task: TaskKind) -> Result<()> {
        let ok = match (self.averaging, task) {
            (Averaging::BinaryDirect, TaskKind::Multilabel(1) | TaskKind::Multiclass(2)) => true,
            (Averaging::BinaryDirect, _) => false,
            (Averaging::Macro | Averaging::Micro, _) => true,
            (Averaging::MulticlassNative, TaskKind::Multiclass(_)) => true,
            (Averaging::MulticlassNative, TaskKind::Multilabel(_)) => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{} cannot be evaluated on a {:?} confusion matrix",
                self.name(),
                task
            )))
        }
    }

    pub fn value(&self, c: &ConfusionMatrix) -> Result<f64> {
        self.check_task(c.task())?;
        Ok(self.evaluate(c, false).0)
    }

    pub fn gradient(&self, c: &ConfusionMatrix) -> Result<GradientTensor> {
        self.check_task(c.task())?;
        let (_, g) = self.evaluate(c, true);
        Ok(GradientTensor::from_flat(c.task(), g).expect("gradient shape matches"))
    }

    /// Value of the base formula on one 2×2 block.
    pub fn binary_value(&self, block: [f64; 4]) -> f64 {
        binary(self.base, block, self.epsilon, false).0
    }

    /// Value and gradient of the base formula on one 2×2 block.
    pub fn binary_value_and_gradient(&self, block: [f64; 4]) -> (f64, [f64; 4]) {
        let (v, g) = binary(self.base, block, self.epsilon, true);
        (v, [g[0], g[1], g[2], g[3]])
    }

    /// Gradient block of one label given that label's normalized block and
    /// the mean block over all `m` labels (only read for micro-averaging).
    /// Matches the corresponding block of [`Metric::gradient`] bit for bit.
    pub fn block_gradient(&self, m: usize, block: [f64; 4], mean: [f64; 4]) -> [f64; 4] {
        let inv = 1.0 / m as f64;
        match self.averaging {
            Averaging::Macro => self.binary_value_and_gradient(block).1.map(|g| g * inv),
            Averaging::Micro => self.binary_value_and_gradient(mean).1.map(|g| g * inv),
            _ => self.binary_value_and_gradient(block).1,
        }
    }

    fn evaluate(&self, c: &ConfusionMatrix, want_grad: bool) -> (f64, Vec<f64>) {
        let eps = self.epsilon;
        match (self.averaging, c.task()) {
            (Averaging::BinaryDirect, _) => {
                let d = c.data();
                binary(self.base, [d[0], d[1], d[2], d[3]], eps, want_grad)
            }
            (Averaging::MulticlassNative, TaskKind::Multiclass(m)) => native(self.base, c.data(), m, eps, want_grad),
            (Averaging::Macro | Averaging::Micro, TaskKind::Multilabel(_)) => self.averaged(c, want_grad),
            (Averaging::Macro | Averaging::Micro, TaskKind::Multiclass(m)) => {
                let blocks = multiclass_to_multilabel(c).expect("square matrix");
                let (v, g) = self.averaged(&blocks, want_grad);
                if !want_grad {
                    return (v, Vec::new());
                }
                (v, pull_back_one_vs_rest(&g, m))
            }
            (Averaging::MulticlassNative, TaskKind::Multilabel(_)) => unreachable!("checked by check_task"),
        }
    }

    fn averaged(&self, c: &ConfusionMatrix, want_grad: bool) -> (f64, Vec<f64>) {
        let m = c.task().num_labels();
        let inv = 1.0 / m as f64;
        let eps = self.epsilon;
        match self.averaging {
            Averaging::Macro => {
                let mut total = 0.0;
                let mut grad = Vec::with_capacity(if want_grad { 4 * m } else { 0 });
                for j in 0..m {
                    let (v, g) = binary(self.base, c.block_array(j), eps, want_grad);
                    total += v;
                    grad.extend(g.iter().map(|x| x * inv));
                }
                (total * inv, grad)
            }
            Averaging::Micro => {
                let (v, g) = binary(self.base, c.mean_block().to_array(), eps, want_grad);
                let grad = if want_grad {
                    let g: Vec<f64> = g.iter().map(|x| x * inv).collect();
                    g.repeat(m)
                } else {
                    Vec::new()
                };
                (v, grad)
            }
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Chain rule through the multiclass to one-vs-rest conversion.
fn pull_back_one_vs_rest(g: &[f64], m: usize) -> Vec<f64> {
    let gtn_total: f64 = (0..m).map(|j| g[4 * j + TN]).sum();
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for l in 0..m {
            out[i * m + l] = if i == l {
                gtn_total - g[4 * i + TN] + g[4 * i + TP]
            } else {
                gtn_total + (g[4 * l + FP] - g[4 * l + TN]) + (g[4 * i + FN] - g[4 * i + TN])
            };
        }
    }
    out
}

/// Base formula on a 2×2 block. Returns the value and, if requested, the four
/// partial derivatives in block order.
fn binary(base: Base, a: [f64; 4], eps: f64, want_grad: bool) -> (f64, Vec<f64>) {
    let [tn, fp, fn_, tp] = a;
    let mut g = [0.0; 4];
    let v = match base {
        Base::Accuracy | Base::BalancedAccuracy | Base::GMean | Base::HMean | Base::QMean => {
            return native(base, &a, 2, eps, want_grad);
        }
        Base::Recall => {
            let d = tp + fn_ + eps;
            g[TP] = (fn_ + eps) / (d * d);
            g[FN] = -tp / (d * d);
            tp / d
        }
        Base::Precision => {
            let d = tp + fp + eps;
            g[TP] = (fp + eps) / (d * d);
            g[FP] = -tp / (d * d);
            tp / d
        }
        Base::FBeta(beta) => {
            let b2 = beta * beta;
            let d = (1.0 + b2) * tp + b2 * fn_ + fp + eps;
            let d2 = d * d;
            g[TP] = (1.0 + b2) * (b2 * fn_ + fp + eps) / d2;
            g[FN] = -(1.0 + b2) * tp * b2 / d2;
            g[FP] = -(1.0 + b2) * tp / d2;
            (1.0 + b2) * tp / d
        }
        Base::Jaccard => {
            let d = tp + fp + fn_ + eps;
            g[TP] = (fp + fn_ + eps) / (d * d);
            g[FP] = -tp / (d * d);
            g[FN] = -tp / (d * d);
            tp / d
        }
        Base::Matthews => {
            let num = tp * tn - fp * fn_;
            let f = [tp + fp + eps, tp + fn_ + eps, tn + fp + eps, tn + fn_ + eps];
            let den = (f[0] * f[1] * f[2] * f[3]).sqrt();
            let v = num / den;
            // d log(den) / d entry is half the sum of the inverse factors it
            // appears in.
            g[TP] = tn / den - v * 0.5 * (1.0 / f[0] + 1.0 / f[1]);
            g[TN] = tp / den - v * 0.5 * (1.0 / f[2] + 1.0 / f[3]);
            g[FP] = -fn_ / den - v * 0.5 * (1.0 / f[0] + 1.0 / f[2]);
            g[FN] = -fp / den - v * 0.5 * (1.0 / f[1] + 1.0 / f[3]);
            v
        }
        Base::MinTnTp => {
            if (tn - tp).abs() <= MIN_TIE_TOLERANCE {
                g[TN] = 0.5;
                g[TP] = 0.5;
            } else if tn < tp {
                g[TN] = 1.0;
            } else {
                g[TP] = 1.0;
            }
            tn.min(tp)
        }
    };
    (v, if want_grad { g.to_vec() } else { Vec::new() })
}

/// `m × m` formulas: accuracy and the recall-based family.
fn native(base: Base, c: &[f64], m: usize, eps: f64, want_grad: bool) -> (f64, Vec<f64>) {
    if base == Base::Accuracy {
        let v = (0..m).map(|i| c[i * m + i]).sum();
        let g = if want_grad {
            let mut g = vec![0.0; m * m];
            for i in 0..m {
                g[i * m + i] = 1.0;
            }
            g
        } else {
            Vec::new()
        };
        return (v, g);
    }

    // Per-class recall r_j = C_jj / (R_j + eps) with row sums R_j.
    let rows: Vec<f64> = (0..m).map(|j| c[j * m..(j + 1) * m].iter().sum::<f64>() + eps).collect();
    let r: Vec<f64> = (0..m).map(|j| c[j * m + j] / rows[j]).collect();
    let mf = m as f64;

    // Value and d(psi)/d(r_j).
    let (v, dr): (f64, Vec<f64>) = match base {
        Base::BalancedAccuracy => (r.iter().sum::<f64>() / mf, vec![1.0 / mf; m]),
        Base::GMean => {
            let log_mean = r.iter().map(|x| (x + eps).ln()).sum::<f64>() / mf;
            let v = log_mean.exp();
            (v, r.iter().map(|x| v / (mf * (x + eps))).collect())
        }
        Base::HMean => {
            let s: f64 = r.iter().map(|x| 1.0 / (x + eps)).sum();
            let v = mf / s;
            (v, r.iter().map(|x| mf / (s * s * (x + eps) * (x + eps))).collect())
        }
        Base::QMean => {
            let rad = r.iter().map(|x| (1.0 - x) * (1.0 - x)).sum::<f64>() / mf + eps;
            let root = rad.sqrt();
            (1.0 - root, r.iter().map(|x| (1.0 - x) / (mf * root)).collect())
        }
        _ => unreachable!("not a recall-based metric"),
    };
    if !want_grad {
        return (v, Vec::new());
    }
    let mut g = vec![0.0; m * m];
    for j in 0..m {
        let d2 = rows[j] * rows[j];
        let diag = c[j * m + j];
        for l in 0..m {
            g[j * m + l] = if l == j {
                dr[j] * (rows[j] - diag) / d2
            } else {
                -dr[j] * diag / d2
            };
        }
    }
    (v, g)
}

/// Registry row: one base metric with its admissible averagings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricInfo {
    pub name: String,
    pub base: Base,
    pub averagings: Vec<Averaging>,
    pub concave: bool,
    pub smooth: bool,
}

const REGISTERED: [Base; 11] = [
    Base::Accuracy,
    Base::BalancedAccuracy,
    Base::Recall,
    Base::Precision,
    Base::FBeta(1.0),
    Base::Jaccard,
    Base::GMean,
    Base::HMean,
    Base::QMean,
    Base::Matthews,
    Base::MinTnTp,
];

/// All registered metrics, in a fixed order.
pub fn list_metrics() -> Vec<MetricInfo> {
    REGISTERED
        .iter()
        .map(|&base| MetricInfo {
            name: base.name(),
            base,
            averagings: Averaging::ALL
                .into_iter()
                .filter(|&a| a != Averaging::MulticlassNative || base.has_native_multiclass())
                .collect(),
            concave: base.is_concave(),
            smooth: base.is_smooth(),
        })
        .collect()
}

/// Every registered `(base, averaging)` pair as a metric with default epsilon.
pub fn registered_metrics() -> Vec<Metric> {
    list_metrics()
        .into_iter()
        .flat_map(|info| {
            info.averagings
                .into_iter()
                .map(move |a| Metric::new(info.base, a).expect("registered pair is valid"))
        })
        .collect()
}

/// A parsed metric together with its registry flags.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricEntry {
    pub metric: Metric,
    pub concave: bool,
    pub smooth: bool,
}

/// Resolves a metric name, see [`Metric::parse`] for the grammar.
pub fn lookup(name: &str) -> Result<MetricEntry> {
    let metric = Metric::parse(name)?;
    Ok(MetricEntry {
        concave: metric.base.is_concave(),
        smooth: metric.base.is_smooth(),
        metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confusion::BinaryConfusion;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn m(name: &str) -> Metric {
        Metric::parse(name).unwrap().with_epsilon(0.0).unwrap()
    }

    fn bin(tn: f64, fp: f64, fn_: f64, tp: f64) -> ConfusionMatrix {
        ConfusionMatrix::from_blocks(&[BinaryConfusion::new(tn, fp, fn_, tp)]).unwrap()
    }

    #[test]
    fn value_examples() {
        assert!(close(m("bin-f1").value(&bin(0.5, 0.1, 0.1, 0.3)).unwrap(), 0.75, 1e-15));
        let c = ConfusionMatrix::from_rows(&[vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
        assert!(close(m("mc-accuracy").value(&c).unwrap(), 0.7, 1e-15));
        assert!(close(m("bin-gmean").value(&bin(0.5, 0.0, 0.0, 0.5)).unwrap(), 1.0, 1e-15));
        let b = BinaryConfusion::new(0.5, 0.1, 0.1, 0.3);
        let two = ConfusionMatrix::from_blocks(&[b, b]).unwrap();
        assert!(close(m("macro-f1").value(&two).unwrap(), 0.75, 1e-15));
    }

    #[test]
    fn gradient_examples() {
        let g = m("bin-f1").gradient(&bin(0.25, 0.25, 0.25, 0.25)).unwrap();
        let want = [0.0, -0.5, -0.5, 1.0];
        for (a, b) in g.data().iter().zip(want) {
            assert!(close(*a, b, 1e-15), "{:?}", g.data());
        }

        let g = m("bin-precision").gradient(&bin(0.3, 0.1, 0.3, 0.3)).unwrap();
        assert!(close(g.data()[TP], 0.625, 1e-12));
        assert!(close(g.data()[FP], -1.875, 1e-12));
        assert_eq!((g.data()[TN], g.data()[FN]), (0.0, 0.0));

        let c = ConfusionMatrix::from_rows(&[vec![0.2, 0.1, 0.0], vec![0.1, 0.3, 0.1], vec![0.0, 0.1, 0.1]]).unwrap();
        let g = m("mc-accuracy").gradient(&c).unwrap();
        for j in 0..3 {
            for l in 0..3 {
                assert_eq!(g.get(j, l), if j == l { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn epsilon_keeps_values_finite_on_zero_matrix() {
        for metric in registered_metrics() {
            let task = match metric.averaging {
                Averaging::BinaryDirect => TaskKind::Multilabel(1),
                Averaging::MulticlassNative => TaskKind::Multiclass(3),
                _ => TaskKind::Multilabel(3),
            };
            let zero = ConfusionMatrix::zeros(task);
            let v = metric.value(&zero).unwrap();
            assert!(v.is_finite(), "{}", metric.name());
            assert!(metric.gradient(&zero).unwrap().data().iter().all(|g| g.is_finite()), "{}", metric.name());
        }
    }

    #[test]
    fn min_supergradient() {
        let metric = m("bin-min-tn-tp");
        let g = metric.gradient(&bin(0.3, 0.2, 0.2, 0.3)).unwrap();
        assert_eq!(g.data(), &[0.5, 0.0, 0.0, 0.5]);
        let g = metric.gradient(&bin(0.2, 0.2, 0.2, 0.4)).unwrap();
        assert_eq!(g.data(), &[1.0, 0.0, 0.0, 0.0]);
        let g = metric.gradient(&bin(0.4, 0.2, 0.2, 0.2)).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn parse_names() {
        let metric = Metric::parse("macro-f1@3").unwrap();
        assert_eq!(metric.base, Base::FBeta(1.0));
        assert_eq!(metric.averaging, Averaging::Macro);
        assert_eq!(metric.budget_k, Some(3));
        assert_eq!(metric.name(), "macro-f1@3");

        let metric = Metric::parse("micro-fbeta:2").unwrap();
        assert_eq!(metric.base, Base::FBeta(2.0));
        assert_eq!(metric.name(), "micro-fbeta:2");

        assert_eq!(Metric::parse("mc-gmean").unwrap().averaging, Averaging::MulticlassNative);
        assert_eq!(Metric::parse("bin-min-tn-tp").unwrap().base, Base::MinTnTp);
        assert_eq!(Metric::parse("min-tn-tp").unwrap().averaging, Averaging::Macro);

        for bad in ["macro-f2", "mc-f1", "fbeta:-1", "macro-f1@0", "macro-f1@x", ""] {
            assert!(Metric::parse(bad).is_err(), "{bad}");
        }
        assert!(matches!(Metric::parse("nope"), Err(Error::UnsupportedMetric(msg)) if msg.contains("nope")));
    }

    #[test]
    fn lookup_flags() {
        let e = lookup("macro-f1").unwrap();
        assert_eq!(e.metric.base, Base::FBeta(1.0));
        assert_eq!(e.metric.averaging, Averaging::Macro);
        assert!(!lookup("micro-f1").unwrap().concave);
        let e = lookup("balanced-accuracy").unwrap();
        assert!(e.concave && e.smooth);
        assert!(!lookup("bin-min-tn-tp").unwrap().smooth);
    }

    #[test]
    fn registry_is_stable_and_complete() {
        let a = list_metrics();
        assert_eq!(a, list_metrics());
        assert_eq!(a.len(), 11);
        assert_eq!(a[0].name, "accuracy");
        let natives = a.iter().filter(|i| i.averagings.contains(&Averaging::MulticlassNative)).count();
        assert_eq!(natives, 5);
        assert_eq!(registered_metrics().len(), 11 * 3 + 5);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        assert!(m("bin-f1").value(&ConfusionMatrix::zeros(TaskKind::Multilabel(2))).is_err());
        assert!(m("mc-gmean").value(&ConfusionMatrix::zeros(TaskKind::Multilabel(2))).is_err());
        assert!(m("mc-gmean").value(&ConfusionMatrix::zeros(TaskKind::Multiclass(3))).is_ok());
        assert!(m("macro-f1").value(&ConfusionMatrix::zeros(TaskKind::Multiclass(3))).is_ok());
    }
}
