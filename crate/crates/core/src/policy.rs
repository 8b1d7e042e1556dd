//! From a gradient and a probability estimate to a prediction.
//!
//! Every rule here maximizes the linearized utility `G · E[C(y, ŷ)]` over the
//! admissible predictions. Ties are always broken towards the smaller label
//! index, and a multilabel gain of exactly zero predicts the label.

use std::cmp::Ordering;

use crate::confusion::{GradientTensor, LabelSet, Prediction, TaskKind, FN, FP, TN, TP};
use crate::error::{Error, Result};

/// Sparse estimate of the label probabilities for one instance.
///
/// Unlisted labels have probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbEstimate {
    m: usize,
    entries: Vec<(usize, f64)>,
}

impl ProbEstimate {
    /// Entries must have strictly increasing indices below `m` and
    /// probabilities in `[0, 1]`.
    pub fn new(m: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut prev = None;
        for &(j, p) in &entries {
            if j >= m {
                return Err(Error::invalid(format!("label {j} out of range for m = {m}")));
            }
            if prev.is_some_and(|q| j <= q) {
                return Err(Error::invalid("label indices must be strictly increasing"));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("probability {p} of label {j} is outside [0, 1]")));
            }
            prev = Some(j);
        }
        Ok(ProbEstimate { m, entries })
    }

    /// Dense estimate listing every label.
    pub fn from_dense(probs: &[f64]) -> Result<Self> {
        ProbEstimate::new(probs.len(), probs.iter().copied().enumerate().collect())
    }

    pub fn num_labels(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    /// Number of listed labels.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, j: usize) -> f64 {
        match self.entries.binary_search_by_key(&j, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for &(j, p) in &self.entries {
            out[j] = p;
        }
        out
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Keeps the `k` most probable labels (ties to the smaller index).
    pub fn top_k(&self, k: usize) -> ProbEstimate {
        if k >= self.entries.len() {
            return self.clone();
        }
        let mut kept = self.entries.clone();
        kept.select_nth_unstable_by(k - 1, |a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        kept.truncate(k);
        kept.sort_unstable_by_key(|e| e.0);
        ProbEstimate { m: self.m, entries: kept }
    }

    /// Rescales to sum to one, provided the sum is already within `tol` of it.
    pub fn renormalized(&self, tol: f64) -> Result<ProbEstimate> {
        let s = self.sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::Data(format!(
                "multiclass probabilities sum to {s}, not 1"
            )));
        }
        Ok(ProbEstimate {
            m: self.m,
            entries: self.entries.iter().map(|&(j, p)| (j, (p / s).min(1.0))).collect(),
        })
    }

    /// Multiclass check: the probabilities sum to one within `1e-6`.
    pub fn is_distribution(&self) -> bool {
        (self.sum() - 1.0).abs() <= 1e-6
    }
}

/// Per-label linear costs: predicting label `j` gains `alpha_j * eta_j - beta_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCoefficients {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl CostCoefficients {
    pub fn num_labels(&self) -> usize {
        self.alpha.len()
    }

    /// Coefficients of one gradient block.
    pub fn from_block(g: [f64; 4]) -> (f64, f64) {
        (g[TP] + g[TN] - g[FN] - g[FP], g[TN] - g[FP])
    }
}

pub fn cost_coefficients(g: &GradientTensor) -> Result<CostCoefficients> {
    let TaskKind::Multilabel(m) = g.task() else {
        return Err(Error::invalid("cost coefficients need a multilabel gradient"));
    };
    let (alpha, beta) = (0..m).map(|j| CostCoefficients::from_block(g.block_array(j))).unzip();
    Ok(CostCoefficients { alpha, beta })
}

/// Dense gains `alpha_j * eta_j - beta_j`; unlisted labels get `-beta_j`.
pub fn gains(coeffs: &CostCoefficients, est: &ProbEstimate) -> Result<Vec<f64>> {
    if coeffs.num_labels() != est.num_labels() {
        return Err(Error::invalid(format!(
            "{} coefficients for an estimate over {} labels",
            coeffs.num_labels(),
            est.num_labels()
        )));
    }
    let mut g: Vec<f64> = coeffs.beta.iter().map(|b| -b).collect();
    for &(j, p) in est.entries() {
        g[j] += coeffs.alpha[j] * p;
    }
    Ok(g)
}

/// Larger gain first, then smaller index.
fn by_gain(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

fn top_k_indices(mut scored: Vec<(usize, f64)>, k: usize) -> Prediction {
    if k == 0 {
        return LabelSet::empty();
    }
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, by_gain);
        scored.truncate(k);
    }
    LabelSet::from_unsorted(scored.into_iter().map(|e| e.0).collect()).expect("distinct indices")
}

/// Predicts every label with nonnegative gain, or exactly the `k` best.
pub fn decide_multilabel(gains: &[f64], budget: Option<usize>) -> Result<Prediction> {
    match budget {
        None => Ok(LabelSet::from_sorted_unchecked(
            gains.iter().enumerate().filter(|(_, g)| **g >= 0.0).map(|(j, _)| j).collect(),
        )),
        Some(k) if k > gains.len() => Err(Error::invalid(format!(
            "budget {k} exceeds the {} labels",
            gains.len()
        ))),
        Some(k) => Ok(top_k_indices(gains.iter().copied().enumerate().collect(), k)),
    }
}

/// Column scores `sum_j G[j][l] * eta_j` of a multiclass gradient.
pub fn multiclass_scores(g: &GradientTensor, est: &ProbEstimate) -> Result<Vec<f64>> {
    let TaskKind::Multiclass(m) = g.task() else {
        return Err(Error::invalid("multiclass decision needs an m × m gradient"));
    };
    if est.num_labels() != m {
        return Err(Error::invalid(format!(
            "estimate over {} labels for {m} classes",
            est.num_labels()
        )));
    }
    let data = g.data();
    let mut scores = vec![0.0; m];
    for &(j, p) in est.entries() {
        for (s, gj) in scores.iter_mut().zip(&data[j * m..(j + 1) * m]) {
            *s += gj * p;
        }
    }
    Ok(scores)
}

/// Predicts the class with the largest expected linearized gain.
pub fn decide_multiclass(g: &GradientTensor, est: &ProbEstimate) -> Result<Prediction> {
    let scores = multiclass_scores(g, est)?;
    let mut best = 0;
    for (l, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = l;
        }
    }
    Ok(LabelSet::single(best))
}

/// Multilabel rule restricted to the support of a sparse estimate.
///
/// `coeffs(j)` returns `(alpha_j, beta_j)` and is only called for listed
/// labels. Unlisted labels are never predicted, even when their gain `-beta_j`
/// would be nonnegative.
pub fn decide_sparse(
    mut coeffs: impl FnMut(usize) -> (f64, f64),
    est: &ProbEstimate,
    budget: Option<usize>,
) -> Result<Prediction> {
    let scored: Vec<(usize, f64)> = est
        .entries()
        .iter()
        .map(|&(j, p)| {
            let (a, b) = coeffs(j);
            (j, a * p - b)
        })
        .collect();
    match budget {
        None => Ok(LabelSet::from_sorted_unchecked(
            scored.into_iter().filter(|e| e.1 >= 0.0).map(|e| e.0).collect(),
        )),
        Some(k) if k > scored.len() => Err(Error::invalid(format!(
            "budget {k} exceeds the {} listed labels",
            scored.len()
        ))),
        Some(k) => Ok(top_k_indices(scored, k)),
    }
}
