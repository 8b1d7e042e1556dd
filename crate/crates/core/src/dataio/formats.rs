//! Line-oriented label and probability files.
//!
//! A labels file holds one instance per line: comma-separated label indices,
//! or an empty line for no positives. A probabilities file holds
//! space-separated `index:probability` pairs per line; unlisted labels have
//! probability zero. Probabilities are written with 6 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::confusion::{LabelSet, LabelVector, TaskKind};
use crate::error::{Error, Result};
use crate::policy::ProbEstimate;

/// Multiclass lines whose probabilities sum to within this of one are
/// rescaled; lines further off are rejected.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-3;

/// Sums this close to one are kept as written.
const EXACT_TOLERANCE: f64 = 1e-6;

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Iterates over the lines of a file as `(line number, text)`.
fn lines(path: &Path) -> Result<impl Iterator<Item = Result<(usize, String)>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let owned: PathBuf = path.to_path_buf();
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(move |(i, l)| l.map(|l| (i + 1, l)).map_err(|e| Error::io(&owned, e))))
}

/// Parses one labels line.
pub fn parse_labels_line(text: &str, task: TaskKind) -> Result<LabelVector, String> {
    let text = text.trim();
    let mut idx = Vec::new();
    if !text.is_empty() {
        for part in text.split(',') {
            let part = part.trim();
            let j: usize = part.parse().map_err(|_| format!("bad label index `{part}`"))?;
            if j >= task.num_labels() {
                return Err(format!("label {j} out of range for m = {}", task.num_labels()));
            }
            idx.push(j);
        }
    }
    let set = LabelSet::from_unsorted(idx).map_err(|e| e.to_string())?;
    if task.is_multiclass() && set.len() != 1 {
        return Err(format!("a multiclass line needs exactly one label, found {}", set.len()));
    }
    Ok(set)
}

/// Streams the labels of a file.
pub fn labels_reader(path: &Path, task: TaskKind) -> Result<impl Iterator<Item = Result<LabelVector>>> {
    let owned = path.to_path_buf();
    Ok(lines(path)?.map(move |l| {
        let (n, text) = l?;
        parse_labels_line(&text, task).map_err(|msg| parse_error(&owned, n, msg))
    }))
}

pub fn read_labels(path: &Path, task: TaskKind) -> Result<Vec<LabelVector>> {
    labels_reader(path, task)?.collect()
}

/// Parses one probabilities line. Multiclass lines are checked to sum to one
/// and rescaled if slightly off.
pub fn parse_estimate_line(text: &str, task: TaskKind) -> Result<ProbEstimate, String> {
    let m = task.num_labels();
    let mut entries = Vec::new();
    for pair in text.split_whitespace() {
        let (j, p) = pair.split_once(':').ok_or_else(|| format!("expected `index:prob`, got `{pair}`"))?;
        let j: usize = j.parse().map_err(|_| format!("bad label index in `{pair}`"))?;
        let p: f64 = p.parse().map_err(|_| format!("bad probability in `{pair}`"))?;
        if j >= m {
            return Err(format!("label {j} out of range for m = {m}"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(format!("probability {p} of label {j} is outside [0, 1]"));
        }
        entries.push((j, p));
    }
    entries.sort_by_key(|e| e.0);
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(format!("duplicate label index {}", w[0].0));
    }
    let est = ProbEstimate::new(m, entries).map_err(|e| e.to_string())?;
    if task.is_multiclass() && (est.sum() - 1.0).abs() > EXACT_TOLERANCE {
        return est.renormalized(RENORMALIZE_TOLERANCE).map_err(|e| e.to_string());
    }
    Ok(est)
}

/// Streams the estimates of a file.
pub fn estimates_reader(path: &Path, task: TaskKind) -> Result<impl Iterator<Item = Result<ProbEstimate>>> {
    let owned = path.to_path_buf();
    Ok(lines(path)?.map(move |l| {
        let (n, text) = l?;
        parse_estimate_line(&text, task).map_err(|msg| parse_error(&owned, n, msg))
    }))
}

pub fn read_estimates(path: &Path, task: TaskKind) -> Result<Vec<ProbEstimate>> {
    estimates_reader(path, task)?.collect()
}

/// Formats a probability with 6 significant digits and no trailing zeros.
pub fn format_prob(p: f64) -> String {
    format_significant(p, 6)
}

/// Fixed-point rendering of `x` rounded to `digits` significant digits,
/// without trailing zeros.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

pub fn format_labels_line(y: &LabelVector) -> String {
    y.indices().iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")
}

pub fn format_estimate_line(est: &ProbEstimate) -> String {
    est.entries()
        .iter()
        .map(|&(j, p)| format!("{j}:{}", format_prob(p)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_lines<T>(path: &Path, items: &[T], format: impl Fn(&T) -> String) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        writeln!(w, "{}", format(item)).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_labels(path: &Path, labels: &[LabelVector]) -> Result<()> {
    write_lines(path, labels, format_labels_line)
}

pub fn write_estimates(path: &Path, estimates: &[ProbEstimate]) -> Result<()> {
    write_lines(path, estimates, format_estimate_line)
}
