//! Neuron-class assignment and the population decoders.
//!
//! Given training responses `r` (spike counts of N output neurons) with
//! labels, each neuron is assigned the class whose stimuli drew the largest
//! summed response from it:
//!
//! ```text
//! M[n][c] = sum of r_n over stimuli of class c
//! Z[n]    = argmax_c M[n][c]
//! ```
//!
//! Decoders then map a fresh response vector to a class:
//!
//! * winner-take-all: the class of the most active neuron;
//! * population vector: the class with the largest summed response;
//! * class average: the class with the largest mean response per assigned neuron;
//! * firing average: like population vector, after subtracting each
//!   neuron's mean training response `F`;
//! * logistic: an online logistic regression on the raw counts.
//!
//! Every tie is broken toward the lowest index.

mod io;
mod logistic;

use thiserror::Error;

use crate::spike_codec::ResponseVector;

pub use io::{read_assignment_csv, read_response_csv, write_assignment_csv, write_response_csv};
pub use logistic::{sigmoid, LogisticModel, RunningStandardizer};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("no responses to decode from")]
    EmptyResponses,
    #[error("every neuron was silent; the decoder abstains")]
    AllZeroResponse,
    #[error("response has {found} neurons, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("label {label} is outside {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("malformed {kind} file: {reason}")]
    Malformed { kind: &'static str, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DecodeError>;

/// Spike counts of `|S|` stimuli by `N` neurons, with the stimulus labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseMatrix {
    num_neurons: usize,
    num_classes: usize,
    counts: Vec<u32>,
    labels: Vec<usize>,
}

impl ResponseMatrix {
    pub fn new(num_neurons: usize, num_classes: usize, rows: Vec<Vec<u32>>, labels: Vec<usize>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(DecodeError::Malformed {
                kind: "response matrix",
                reason: format!("{} rows but {} labels", rows.len(), labels.len()),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(DecodeError::LabelOutOfRange { label, num_classes });
        }
        let mut counts = Vec::with_capacity(rows.len() * num_neurons);
        for row in rows {
            if row.len() != num_neurons {
                return Err(DecodeError::LengthMismatch {
                    expected: num_neurons,
                    found: row.len(),
                });
            }
            counts.extend(row);
        }
        Ok(Self {
            num_neurons,
            num_classes,
            counts,
            labels,
        })
    }

    pub fn from_responses(num_classes: usize, responses: Vec<ResponseVector>, labels: Vec<usize>) -> Result<Self> {
        let n = responses.first().map_or(0, ResponseVector::len);
        Self::new(
            n,
            num_classes,
            responses.into_iter().map(|r| r.counts).collect(),
            labels,
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_neurons(&self) -> usize {
        self.num_neurons
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.counts[i * self.num_neurons..(i + 1) * self.num_neurons]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        (0..self.len()).map(|i| self.row(i))
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut counts = Vec::with_capacity(indices.len() * self.num_neurons);
        for &i in indices {
            counts.extend_from_slice(self.row(i));
        }
        Self {
            num_neurons: self.num_neurons,
            num_classes: self.num_classes,
            counts,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Preferred class of every neuron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentVector {
    pub z: Vec<usize>,
    /// Number of neurons assigned to each class.
    pub class_counts: Vec<usize>,
    /// Class-split response sums, `N x C` row-major.
    pub m: Vec<u64>,
}

impl AssignmentVector {
    /// Build from an explicit assignment; `m` is left empty.
    pub fn from_z(z: Vec<usize>, num_classes: usize) -> Result<Self> {
        let mut class_counts = vec![0; num_classes];
        for &c in &z {
            if c >= num_classes {
                return Err(DecodeError::LabelOutOfRange { label: c, num_classes });
            }
            class_counts[c] += 1;
        }
        Ok(Self {
            z,
            class_counts,
            m: Vec::new(),
        })
    }

    pub fn num_neurons(&self) -> usize {
        self.z.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_counts.len()
    }

    /// Every neuron carries the same class.
    pub fn mode_collapsed(&self) -> bool {
        self.class_counts.iter().filter(|&&c| c > 0).count() <= 1
    }

    /// Smallest over largest class tally; 0 under mode collapse.
    pub fn alpha(&self) -> f64 {
        let max = self.class_counts.iter().copied().max().unwrap_or(0);
        let min = self.class_counts.iter().copied().min().unwrap_or(0);
        if max == 0 {
            0.0
        } else {
            min as f64 / max as f64
        }
    }

    fn check(&self, r: &ResponseVector) -> Result<()> {
        if r.len() != self.num_neurons() {
            return Err(DecodeError::LengthMismatch {
                expected: self.num_neurons(),
                found: r.len(),
            });
        }
        Ok(())
    }
}

/// Per-neuron mean training response, kept as exact totals so that decoder
/// scores compare without rounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiringAverage {
    /// Summed training response of each neuron.
    pub totals: Vec<u64>,
    /// Number of training stimuli behind the totals.
    pub stimuli: u64,
}

impl FiringAverage {
    pub fn len(&self) -> usize {
        self.totals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.totals.is_empty()
    }

    /// The means `F_j`.
    pub fn means(&self) -> Vec<f64> {
        self.totals.iter().map(|&t| t as f64 / self.stimuli as f64).collect()
    }
}

fn argmax_lowest(scores: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

pub fn build_assignment(r: &ResponseMatrix) -> Result<AssignmentVector> {
    if r.is_empty() {
        return Err(DecodeError::EmptyResponses);
    }
    let (n, c) = (r.num_neurons, r.num_classes);
    let mut m = vec![0u64; n * c];
    for (row, &label) in r.rows().zip(&r.labels) {
        for (j, &count) in row.iter().enumerate() {
            m[j * c + label] += count as u64;
        }
    }
    let z: Vec<usize> = (0..n)
        .map(|j| argmax_lowest(m[j * c..(j + 1) * c].iter().map(|&v| v as f64)).unwrap_or(0))
        .collect();
    let mut assignment = AssignmentVector::from_z(z, c)?;
    assignment.m = m;
    Ok(assignment)
}

fn class_sums(r: &ResponseVector, z: &AssignmentVector) -> Vec<f64> {
    let mut sums = vec![0.0; z.num_classes()];
    for (&count, &c) in r.counts.iter().zip(&z.z) {
        sums[c] += count as f64;
    }
    sums
}

fn require_activity(r: &ResponseVector) -> Result<()> {
    if r.counts.iter().all(|&c| c == 0) {
        return Err(DecodeError::AllZeroResponse);
    }
    Ok(())
}

/// Class of the most active neuron.
pub fn decode_wta(r: &ResponseVector, z: &AssignmentVector) -> Result<usize> {
    z.check(r)?;
    require_activity(r)?;
    let winner = argmax_lowest(r.counts.iter().map(|&c| c as f64)).expect("non-empty response");
    Ok(z.z[winner])
}

/// Class with the largest summed response of its assigned neurons.
pub fn decode_population_vector(r: &ResponseVector, z: &AssignmentVector) -> Result<usize> {
    z.check(r)?;
    require_activity(r)?;
    Ok(argmax_lowest(class_sums(r, z)).unwrap_or(0))
}

/// Class with the largest mean response per assigned neuron. Classes with
/// no assigned neuron are skipped.
pub fn decode_class_average(r: &ResponseVector, z: &AssignmentVector) -> Result<usize> {
    z.check(r)?;
    require_activity(r)?;
    let sums = class_sums(r, z);
    let means = sums
        .iter()
        .zip(&z.class_counts)
        .map(|(&s, &k)| if k == 0 { f64::NEG_INFINITY } else { s / k as f64 });
    Ok(argmax_lowest(means).unwrap_or(0))
}

pub fn compute_firing_average(r: &ResponseMatrix) -> Result<FiringAverage> {
    if r.is_empty() {
        return Err(DecodeError::EmptyResponses);
    }
    let mut totals = vec![0u64; r.num_neurons];
    for row in r.rows() {
        for (acc, &c) in totals.iter_mut().zip(row) {
            *acc += c as u64;
        }
    }
    Ok(FiringAverage {
        totals,
        stimuli: r.len() as u64,
    })
}

/// Class with the largest summed response after subtracting each neuron's
/// training mean. Defined for silent responses too. Scores are compared
/// scaled by the training stimulus count, in integers.
pub fn decode_firing_average(r: &ResponseVector, z: &AssignmentVector, f: &FiringAverage) -> Result<usize> {
    z.check(r)?;
    if f.len() != r.len() {
        return Err(DecodeError::LengthMismatch {
            expected: r.len(),
            found: f.len(),
        });
    }
    if f.stimuli == 0 {
        return Err(DecodeError::EmptyResponses);
    }
    let s = f.stimuli as i128;
    let mut scores = vec![0i128; z.num_classes()];
    for ((&count, &c), &total) in r.counts.iter().zip(&z.z).zip(&f.totals) {
        scores[c] += s * count as i128 - total as i128;
    }
    let mut best = 0;
    for (c, &v) in scores.iter().enumerate() {
        if v > scores[best] {
            best = c;
        }
    }
    Ok(best)
}

/// The decoders compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoderKind {
    Wta,
    PopulationVector,
    ClassAverage,
    FiringAverage,
    Logistic,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 5] = [
        DecoderKind::Wta,
        DecoderKind::PopulationVector,
        DecoderKind::ClassAverage,
        DecoderKind::FiringAverage,
        DecoderKind::Logistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Wta => "wta",
            DecoderKind::PopulationVector => "population_vector",
            DecoderKind::ClassAverage => "class_average",
            DecoderKind::FiringAverage => "firing_average",
            DecoderKind::Logistic => "logistic",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == name)
    }

    /// Whether the decoder reads the neuron-class assignment.
    pub fn uses_assignment(self) -> bool {
        !matches!(self, DecoderKind::Logistic)
    }
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl serde::Serialize for DecoderKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for DecoderKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        DecoderKind::parse(&name).ok_or_else(|| {
            serde::de::Error::custom(format!(
                "unknown decoder {name:?}; expected one of wta, population_vector, class_average, firing_average, logistic"
            ))
        })
    }
}

/// Everything a decoder may need, fitted on training responses.
#[derive(Debug, Clone)]
pub struct FittedDecoders {
    pub assignment: AssignmentVector,
    pub firing_average: FiringAverage,
    pub logistic: Option<LogisticModel>,
}

impl FittedDecoders {
    pub fn decode(&self, kind: DecoderKind, r: &ResponseVector) -> Result<usize> {
        match kind {
            DecoderKind::Wta => decode_wta(r, &self.assignment),
            DecoderKind::PopulationVector => decode_population_vector(r, &self.assignment),
            DecoderKind::ClassAverage => decode_class_average(r, &self.assignment),
            DecoderKind::FiringAverage => decode_firing_average(r, &self.assignment, &self.firing_average),
            DecoderKind::Logistic => match &self.logistic {
                Some(m) => Ok(m.predict(&r.counts)?.1),
                None => Err(DecodeError::Malformed {
                    kind: "decoder set",
                    reason: "no logistic model was trained".into(),
                }),
            },
        }
    }
}
