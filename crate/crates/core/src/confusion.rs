//! Confusion matrices and the running confusion state.
//!
//! Two shapes are supported. A multiclass problem with `m` classes uses an
//! `m × m` matrix whose entry `[j][l]` is the fraction of instances of true
//! class `j` predicted as `l`. A multilabel problem with `m` labels uses `m`
//! independent 2×2 blocks, stored flat in the order `tn, fp, fn, tp`
//! (index `2u + v` for true value `u` and predicted value `v`).
//!
//! [`ConfusionState`] keeps *unnormalized* counts. It starts from `λ` in every
//! entry and adds one instance matrix per update; the normalized matrix is the
//! accumulator divided by the number of updates. Storing counts instead of
//! applying `C_t = (t-1)/t C_{t-1} + C(y_t, ŷ_t)/t` recursively keeps the
//! regularization mass at exactly `λ/t` per entry after `t` updates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::ProbEstimate;

/// Offsets of the four entries inside one flat 2×2 block.
pub const TN: usize = 0;
pub const FP: usize = 1;
pub const FN: usize = 2;
pub const TP: usize = 3;

/// Label space of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    /// One-hot labels over `m` classes.
    Multiclass(usize),
    /// Arbitrary subsets of `m` labels.
    Multilabel(usize),
}

impl TaskKind {
    /// Multiclass task; requires at least two classes.
    pub fn multiclass(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!(
                "multiclass task needs at least 2 classes, got {m}"
            )));
        }
        Ok(TaskKind::Multiclass(m))
    }

    /// Multilabel task; a single label is allowed and gives the binary case.
    pub fn multilabel(m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::invalid("multilabel task needs at least 1 label"));
        }
        Ok(TaskKind::Multilabel(m))
    }

    pub fn num_labels(&self) -> usize {
        match *self {
            TaskKind::Multiclass(m) | TaskKind::Multilabel(m) => m,
        }
    }

    /// Number of real entries in a confusion matrix of this shape.
    pub fn num_entries(&self) -> usize {
        match *self {
            TaskKind::Multiclass(m) => m * m,
            TaskKind::Multilabel(m) => 4 * m,
        }
    }

    pub fn is_multiclass(&self) -> bool {
        matches!(self, TaskKind::Multiclass(_))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            TaskKind::Multiclass(m) => TaskKind::multiclass(m).map(|_| ()),
            TaskKind::Multilabel(m) => TaskKind::multilabel(m).map(|_| ()),
        }
    }
}

/// A sorted set of label indices, used both for true labels and predictions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LabelSet(Vec<usize>);

/// True label vector `y`.
pub type LabelVector = LabelSet;
/// Predicted label vector `ŷ`.
pub type Prediction = LabelSet;

impl LabelSet {
    pub fn empty() -> Self {
        LabelSet(Vec::new())
    }

    pub fn single(index: usize) -> Self {
        LabelSet(vec![index])
    }

    /// Builds a set from strictly increasing indices.
    pub fn from_sorted(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "label indices must be strictly increasing: {indices:?}"
            )));
        }
        Ok(LabelSet(indices))
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        LabelSet(indices)
    }

    /// Sorts the indices; duplicates are rejected.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate label index {}", w[0])));
        }
        Ok(LabelSet(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// Dense 0/1 indicator of length `m`.
    pub fn indicator(&self, m: usize) -> Vec<bool> {
        let mut out = vec![false; m];
        for &j in &self.0 {
            out[j] = true;
        }
        out
    }

    /// Checks the set against a task: indices in range, exactly one index for
    /// multiclass.
    pub fn check(&self, task: TaskKind, what: &str) -> Result<()> {
        let m = task.num_labels();
        if let Some(&last) = self.0.last() {
            if last >= m {
                return Err(Error::invalid(format!(
                    "{what} index {last} out of range for {m} labels"
                )));
            }
        }
        if task.is_multiclass() && self.0.len() != 1 {
            return Err(Error::invalid(format!(
                "multiclass {what} must contain exactly one class, got {:?}",
                self.0
            )));
        }
        Ok(())
    }
}

impl From<LabelSet> for Vec<usize> {
    fn from(set: LabelSet) -> Self {
        set.0
    }
}

/// A single 2×2 confusion block.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BinaryConfusion {
    pub tn: f64,
    pub fp: f64,
    pub fn_: f64,
    pub tp: f64,
}

impl BinaryConfusion {
    pub fn new(tn: f64, fp: f64, fn_: f64, tp: f64) -> Self {
        BinaryConfusion { tn, fp, fn_, tp }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        BinaryConfusion::new(a[TN], a[FP], a[FN], a[TP])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.tn, self.fp, self.fn_, self.tp]
    }

    pub fn sum(&self) -> f64 {
        self.tn + self.fp + self.fn_ + self.tp
    }
}

/// Flat storage shared by confusion matrices and gradients.
macro_rules! shaped_tensor {
    ($name:ident) => {
        impl $name {
            pub fn zeros(task: TaskKind) -> Self {
                $name::filled(task, 0.0)
            }

            pub fn filled(task: TaskKind, value: f64) -> Self {
                $name {
                    task,
                    data: vec![value; task.num_entries()],
                }
            }

            /// Wraps flat data (row-major for multiclass, `tn, fp, fn, tp`
            /// blocks for multilabel).
            pub fn from_flat(task: TaskKind, data: Vec<f64>) -> Result<Self> {
                task.validate()?;
                if data.len() != task.num_entries() {
                    return Err(Error::invalid(format!(
                        "expected {} entries for {:?}, got {}",
                        task.num_entries(),
                        task,
                        data.len()
                    )));
                }
                Ok($name { task, data })
            }

            /// Square matrix given by rows.
            pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
                let m = rows.len();
                if rows.iter().any(|r| r.len() != m) {
                    return Err(Error::invalid("matrix must be square"));
                }
                let task = TaskKind::multiclass(m)?;
                Ok($name {
                    task,
                    data: rows.iter().flatten().copied().collect(),
                })
            }

            /// Stack of 2×2 blocks.
            pub fn from_blocks(blocks: &[BinaryConfusion]) -> Result<Self> {
                let task = TaskKind::multilabel(blocks.len())?;
                Ok($name {
                    task,
                    data: blocks.iter().flat_map(|b| b.to_array()).collect(),
                })
            }

            pub fn task(&self) -> TaskKind {
                self.task
            }

            pub fn data(&self) -> &[f64] {
                &self.data
            }

            pub fn into_data(self) -> Vec<f64> {
                self.data
            }

            /// Multiclass entry `[j][l]`.
            pub fn get(&self, j: usize, l: usize) -> f64 {
                let m = self.task.num_labels();
                debug_assert!(self.task.is_multiclass());
                self.data[j * m + l]
            }

            /// Multilabel block `j`.
            pub fn block(&self, j: usize) -> BinaryConfusion {
                debug_assert!(!self.task.is_multiclass());
                let b = &self.data[4 * j..4 * j + 4];
                BinaryConfusion::new(b[TN], b[FP], b[FN], b[TP])
            }

            pub fn block_array(&self, j: usize) -> [f64; 4] {
                let b = &self.data[4 * j..4 * j + 4];
                [b[0], b[1], b[2], b[3]]
            }

            pub fn rows(&self) -> Vec<Vec<f64>> {
                let m = self.task.num_labels();
                self.data.chunks(m).map(<[f64]>::to_vec).collect()
            }

            pub fn sum(&self) -> f64 {
                self.data.iter().sum()
            }

            pub fn scaled(&self, c: f64) -> Self {
                $name {
                    task: self.task,
                    data: self.data.iter().map(|x| x * c).collect(),
                }
            }
        }
    };
}

/// A (possibly regularized) confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    task: TaskKind,
    data: Vec<f64>,
}

/// Partial derivatives of a metric, shaped like the matrix it was taken at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientTensor {
    task: TaskKind,
    data: Vec<f64>,
}

shaped_tensor!(ConfusionMatrix);
shaped_tensor!(GradientTensor);

impl ConfusionMatrix {
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Mean of the multilabel blocks.
    pub fn mean_block(&self) -> BinaryConfusion {
        let m = self.task.num_labels();
        let mut acc = [0.0; 4];
        for b in self.data.chunks_exact(4) {
            for (a, x) in acc.iter_mut().zip(b) {
                *a += x;
            }
        }
        BinaryConfusion::from_array(acc.map(|a| a / m as f64))
    }

    /// Convex combination `(1 - gamma) * self + gamma * other`.
    pub fn lerp(&self, other: &ConfusionMatrix, gamma: f64) -> ConfusionMatrix {
        debug_assert_eq!(self.task, other.task);
        ConfusionMatrix {
            task: self.task,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (1.0 - gamma) * a + gamma * b)
                .collect(),
        }
    }
}

impl GradientTensor {
    /// Tensor dot product with a confusion matrix of the same shape.
    pub fn dot(&self, c: &ConfusionMatrix) -> f64 {
        debug_assert_eq!(self.task, c.task);
        self.data.iter().zip(c.data()).map(|(g, x)| g * x).sum()
    }
}

/// Confusion matrix of a single instance.
pub fn instance_confusion(task: TaskKind, y: &LabelVector, yhat: &Prediction) -> Result<ConfusionMatrix> {
    let mut out = ConfusionMatrix::zeros(task);
    add_instance(task, out.data_mut(), y, yhat, 1.0)?;
    Ok(out)
}

/// Expected single-instance confusion when `y` is drawn with marginals `est`.
pub fn expected_instance_confusion(
    task: TaskKind,
    est: &ProbEstimate,
    yhat: &Prediction,
) -> Result<ConfusionMatrix> {
    let mut out = ConfusionMatrix::zeros(task);
    add_expected(task, out.data_mut(), est, yhat)?;
    Ok(out)
}

fn add_instance(task: TaskKind, acc: &mut [f64], y: &LabelVector, yhat: &Prediction, w: f64) -> Result<()> {
    task.validate()?;
    y.check(task, "label")?;
    yhat.check(task, "prediction")?;
    match task {
        TaskKind::Multiclass(m) => {
            acc[y.indices()[0] * m + yhat.indices()[0]] += w;
        }
        TaskKind::Multilabel(m) => {
            // Walk both sorted index lists; every label not mentioned is a
            // true negative.
            let (ys, ps) = (y.indices(), yhat.indices());
            let (mut a, mut b) = (0, 0);
            for j in 0..m {
                let u = a < ys.len() && ys[a] == j;
                let v = b < ps.len() && ps[b] == j;
                a += u as usize;
                b += v as usize;
                acc[4 * j + 2 * u as usize + v as usize] += w;
            }
        }
    }
    Ok(())
}

fn add_expected(task: TaskKind, acc: &mut [f64], est: &ProbEstimate, yhat: &Prediction) -> Result<()> {
    task.validate()?;
    yhat.check(task, "prediction")?;
    if est.num_labels() != task.num_labels() {
        return Err(Error::invalid(format!(
            "estimate has {} labels, task has {}",
            est.num_labels(),
            task.num_labels()
        )));
    }
    match task {
        TaskKind::Multiclass(m) => {
            let l = yhat.indices()[0];
            for &(j, p) in est.entries() {
                acc[j * m + l] += p;
            }
        }
        TaskKind::Multilabel(m) => {
            let entries = est.entries();
            let ps = yhat.indices();
            let (mut a, mut b) = (0, 0);
            for j in 0..m {
                let p = if a < entries.len() && entries[a].0 == j {
                    a += 1;
                    entries[a - 1].1
                } else {
                    0.0
                };
                let v = b < ps.len() && ps[b] == j;
                b += v as usize;
                let block = &mut acc[4 * j..4 * j + 4];
                if v {
                    block[TP] += p;
                    block[FP] += 1.0 - p;
                } else {
                    block[FN] += p;
                    block[TN] += 1.0 - p;
                }
            }
        }
    }
    Ok(())
}

/// Converts an `m × m` multiclass matrix into `m` one-vs-rest blocks.
pub fn multiclass_to_multilabel(c: &ConfusionMatrix) -> Result<ConfusionMatrix> {
    let TaskKind::Multiclass(m) = c.task() else {
        return Err(Error::invalid("expected a square multiclass matrix"));
    };
    let total = c.sum();
    let row: Vec<f64> = (0..m).map(|j| (0..m).map(|l| c.get(j, l)).sum()).collect();
    let col: Vec<f64> = (0..m).map(|l| (0..m).map(|j| c.get(j, l)).sum()).collect();
    let blocks: Vec<BinaryConfusion> = (0..m)
        .map(|j| {
            let tp = c.get(j, j);
            let fp = col[j] - tp;
            let fn_ = row[j] - tp;
            let tn = total - row[j] - col[j] + tp;
            BinaryConfusion::new(tn, fp, fn_, tp)
        })
        .collect();
    ConfusionMatrix::from_blocks(&blocks)
}

/// Running, optionally regularized, confusion counts of an online learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionState {
    task: TaskKind,
    acc: Vec<f64>,
    t: u64,
    lambda: f64,
}

impl ConfusionState {
    /// Fresh state with every accumulator entry equal to `lambda`.
    pub fn new(task: TaskKind, lambda: f64) -> Result<Self> {
        task.validate()?;
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::invalid(format!(
                "lambda must be a finite nonnegative number, got {lambda}"
            )));
        }
        Ok(ConfusionState {
            task,
            acc: vec![lambda; task.num_entries()],
            t: 0,
            lambda,
        })
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    /// Number of updates so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Unnormalized counts including the initial `lambda` fill.
    pub fn accumulator(&self) -> &[f64] {
        &self.acc
    }

    /// Unnormalized counts of multilabel block `j`.
    pub fn block_counts(&self, j: usize) -> [f64; 4] {
        let b = &self.acc[4 * j..4 * j + 4];
        [b[0], b[1], b[2], b[3]]
    }

    /// Block `j` of [`ConfusionState::normalized`], without normalizing the
    /// other blocks.
    pub fn normalized_block(&self, j: usize) -> [f64; 4] {
        let b = self.block_counts(j);
        if self.t == 0 {
            b
        } else {
            let t = self.t as f64;
            b.map(|a| a / t)
        }
    }

    /// Adds the confusion of one observed instance.
    pub fn update(&mut self, y: &LabelVector, yhat: &Prediction) -> Result<()> {
        add_instance(self.task, &mut self.acc, y, yhat, 1.0)?;
        self.t += 1;
        Ok(())
    }

    /// Adds the expected confusion under `est` instead of an observed label.
    pub fn update_semi(&mut self, est: &ProbEstimate, yhat: &Prediction) -> Result<()> {
        add_expected(self.task, &mut self.acc, est, yhat)?;
        self.t += 1;
        Ok(())
    }

    /// `accumulator / t`, or the raw accumulator before the first update.
    pub fn normalized(&self) -> ConfusionMatrix {
        let data = if self.t == 0 {
            self.acc.clone()
        } else {
            let t = self.t as f64;
            // Divide rather than multiply by 1/t so integral counts give
            // correctly rounded quotients.
            self.acc.iter().map(|a| a / t).collect()
        };
        ConfusionMatrix {
            task: self.task,
            data,
        }
    }
}
