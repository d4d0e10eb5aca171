//! Score profiles: one row of exact scores per model, one column per label.

use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::labels::LabelSet;
use crate::rational::{self, Rational};

/// Model rows are tracked in `u64` masks.
pub const MAX_MODELS: usize = 64;

/// The element `z` of `S(Y)`: `m` rows (models) by `|Y|` columns (labels).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoreProfile {
    labels: Arc<LabelSet>,
    models: usize,
    scores: Vec<Rational>,
}

impl ScoreProfile {
    pub fn new(labels: Arc<LabelSet>, rows: Vec<Vec<Rational>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Profile("a profile needs at least one model".into()));
        }
        if rows.len() > MAX_MODELS {
            return Err(Error::Profile(format!("at most {MAX_MODELS} models supported")));
        }
        let k = labels.len();
        let mut scores = Vec::with_capacity(rows.len() * k);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Profile(format!(
                    "row {} has {} entries, expected {k}",
                    j + 1,
                    row.len()
                )));
            }
            scores.extend(row.iter().cloned());
        }
        Ok(Self { labels, models: rows.len(), scores })
    }

    /// Builds a profile from small integer rows.
    pub fn from_ints(labels: Arc<LabelSet>, rows: &[&[i64]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| rational::int(v)).collect())
            .collect();
        Self::new(labels, rows)
    }

    pub fn label_set(&self) -> &Arc<LabelSet> {
        &self.labels
    }

    pub fn models(&self) -> usize {
        self.models
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    /// Row `j` (zero-based).
    pub fn row(&self, j: usize) -> &[Rational] {
        let k = self.labels.len();
        &self.scores[j * k..(j + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.scores.chunks(self.labels.len())
    }

    pub fn score(&self, j: usize, label: usize) -> &Rational {
        &self.scores[j * self.labels.len() + label]
    }

    pub fn cmp_in_row(&self, j: usize, a: usize, b: usize) -> Ordering {
        self.score(j, a).cmp(self.score(j, b))
    }

    /// `z_{j,d(a)} > z_{j,d(b)}`.
    pub fn prefers(&self, j: usize, a: usize, b: usize) -> bool {
        self.cmp_in_row(j, a, b) == Ordering::Greater
    }

    /// Every model strictly scores `a` above `b`.
    pub fn unanimous(&self, a: usize, b: usize) -> bool {
        (0..self.models).all(|j| self.prefers(j, a, b))
    }

    /// Bitmask of the models that strictly score `a` above `b`.
    pub fn preference_mask(&self, a: usize, b: usize) -> u64 {
        (0..self.models)
            .filter(|&j| self.prefers(j, a, b))
            .fold(0u64, |m, j| m | (1 << j))
    }

    pub fn same_shape(&self, other: &ScoreProfile) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::Shape(format!(
                "label sets differ: {} vs {}",
                self.labels, other.labels
            )));
        }
        if self.models != other.models {
            return Err(Error::Shape(format!(
                "model counts differ: {} vs {}",
                self.models, other.models
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows()
            .map(|r| Value::Array(r.iter().map(rational_to_json).collect()))
            .collect();
        json!({ "labels": self.labels.labels(), "scores": rows })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("profile must be a JSON object".into()))?;
        let labels = obj
            .get("labels")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("profile.labels must be an array".into()))?
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(Error::Parse(format!("profile.labels[{i}] must be a string"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = obj
            .get("scores")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("profile.scores must be an array".into()))?
            .iter()
            .enumerate()
            .map(|(j, row)| {
                row.as_array()
                    .ok_or_else(|| Error::Parse(format!("profile.scores[{j}] must be an array")))?
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        rational_from_json(v)
                            .map_err(|e| Error::Parse(format!("profile.scores[{j}][{i}]: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(LabelSet::new(labels)?.shared(), rows)
    }
}

/// Integers become JSON numbers, everything else an exact string.
pub fn rational_to_json(value: &Rational) -> Value {
    if value.is_integer() {
        if let Some(i) = value.numer().to_i64() {
            return Value::from(i);
        }
    }
    Value::String(rational::format(value))
}

pub fn rational_from_json(value: &Value) -> Result<Rational> {
    match value {
        Value::Number(n) => rational::parse(&n.to_string()),
        Value::String(s) => rational::parse(s),
        other => Err(Error::Parse(format!("expected a number, got {other}"))),
    }
}
