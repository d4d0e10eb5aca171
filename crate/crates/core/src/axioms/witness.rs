//! Self-verifying records of axiom violations.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::aggregator::Aggregator;
use crate::error::{Error, Result};
use crate::labels::{LabelSet, LabelSubset};
use crate::profile::ScoreProfile;

use super::predicates;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    Unanimity,
    Mcr,
    Transitivity,
    Idc,
    Nondegeneracy,
    Decisiveness,
    Lemma2,
    Lemma3,
}

impl Axiom {
    pub const ALL: [Axiom; 8] = [
        Axiom::Unanimity,
        Axiom::Mcr,
        Axiom::Transitivity,
        Axiom::Idc,
        Axiom::Nondegeneracy,
        Axiom::Decisiveness,
        Axiom::Lemma2,
        Axiom::Lemma3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Axiom::Unanimity => "unanimity",
            Axiom::Mcr => "mcr",
            Axiom::Transitivity => "transitivity",
            Axiom::Idc => "idc",
            Axiom::Nondegeneracy => "nondegeneracy",
            Axiom::Decisiveness => "decisiveness",
            Axiom::Lemma2 => "lemma2",
            Axiom::Lemma3 => "lemma3",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown axiom {s:?}")))
    }
}

/// A concrete violation: the profiles, menus and labels involved plus the
/// choice sets that exhibit it. [`Witness::reproduces`] re-runs the named
/// predicate on exactly these fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub axiom: Axiom,
    pub aggregator: Aggregator,
    pub profiles: Vec<ScoreProfile>,
    pub subsets: Vec<LabelSubset>,
    pub labels: Vec<usize>,
    pub choices: Vec<LabelSubset>,
    /// 1-based model index, for nondegeneracy and decisiveness.
    pub model: Option<usize>,
    /// Which strengthened transitivity implication failed (1..=3).
    pub part: Option<u8>,
    pub narrative: String,
}

impl Witness {
    pub(crate) fn new(axiom: Axiom, aggregator: &Aggregator) -> Self {
        Self {
            axiom,
            aggregator: aggregator.clone(),
            profiles: Vec::new(),
            subsets: Vec::new(),
            labels: Vec::new(),
            choices: Vec::new(),
            model: None,
            part: None,
            narrative: String::new(),
        }
    }

    pub fn label_set(&self) -> Option<&LabelSet> {
        self.profiles.first().map(|p| &**p.label_set())
    }

    fn name(&self, i: usize) -> String {
        self.label_set().map(|l| l.name(i).to_string()).unwrap_or_else(|| format!("#{i}"))
    }

    pub(crate) fn describe(mut self) -> Self {
        self.narrative = self.compose_narrative();
        self
    }

    fn set(&self, s: LabelSubset) -> String {
        match self.label_set() {
            Some(l) => format!("{{{}}}", l.names(s).join(",")),
            None => format!("{s:?}"),
        }
    }

    fn compose_narrative(&self) -> String {
        let n = |i: usize| self.labels.get(i).map(|&l| self.name(l)).unwrap_or_default();
        let c = |i: usize| self.choices.get(i).map(|&s| self.set(s)).unwrap_or_default();
        let s = |i: usize| self.subsets.get(i).map(|&x| self.set(x)).unwrap_or_default();
        let agg = &self.aggregator;
        match self.axiom {
            Axiom::Unanimity => format!(
                "{agg}: every model scores {} above {} yet C({}) = {}",
                n(0), n(1), s(0), c(0)
            ),
            Axiom::Mcr => format!(
                "{agg}: on {} the choice moves from {} to {}, {} lost to {}, and no model reverses {} vs {}",
                s(0), c(0), c(1), n(1), n(0), n(0), n(1)
            ),
            Axiom::Transitivity => format!(
                "{agg}: {} in C({}), {} in C({}), but C({}) = {}",
                n(0), s(0), n(1), s(1), s(2), c(2)
            ),
            Axiom::Lemma3 => format!(
                "{agg}: strengthened transitivity part {} fails on ({}, {}, {}); choices {} {} {}",
                self.part.unwrap_or(0), n(0), n(1), n(2), c(0), c(1), c(2)
            ),
            Axiom::Idc => format!(
                "{agg}: C({}) = {} but C({}) ∩ {} = {}",
                s(0), c(0), s(1), s(0), self.set(self.subsets[0].intersect(self.choices[1]))
            ),
            Axiom::Nondegeneracy => format!(
                "{agg}: model {} dictates every binary choice across the {} checked profiles",
                self.model.unwrap_or(0), self.profiles.len()
            ),
            Axiom::Decisiveness => format!(
                "{agg}: model {} scores {} above {} but C({}) = {}",
                self.model.unwrap_or(0), n(0), n(1), s(0), c(0)
            ),
            Axiom::Lemma2 => format!(
                "{agg}: every model keeps its pairwise comparisons on {} yet the choice moves from {} to {}",
                s(0), c(0), c(1)
            ),
        }
    }

    /// Re-evaluates the named predicate on this witness's own fields,
    /// including the recorded choice sets.
    pub fn reproduces(&self) -> Result<bool> {
        predicates::reproduces(self)
    }

    pub fn to_json(&self) -> Value {
        let labels = self.label_set();
        let names = |s: LabelSubset| -> Value {
            match labels {
                Some(l) => json!(l.names(s)),
                None => json!([]),
            }
        };
        let mut obj = Map::new();
        obj.insert("axiom".into(), json!(self.axiom.as_str()));
        obj.insert("aggregator".into(), json!(self.aggregator.to_string()));
        obj.insert(
            "profiles".into(),
            Value::Array(self.profiles.iter().map(ScoreProfile::to_json).collect()),
        );
        obj.insert("subsets".into(), Value::Array(self.subsets.iter().map(|&s| names(s)).collect()));
        obj.insert(
            "labels".into(),
            Value::Array(self.labels.iter().map(|&l| json!(self.name(l))).collect()),
        );
        obj.insert("choices".into(), Value::Array(self.choices.iter().map(|&s| names(s)).collect()));
        if let Some(m) = self.model {
            obj.insert("model".into(), json!(m));
        }
        if let Some(p) = self.part {
            obj.insert("part".into(), json!(p));
        }
        obj.insert("narrative".into(), json!(self.narrative));
        Value::Object(obj)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let field = |k: &str| {
            value
                .get(k)
                .ok_or_else(|| Error::Parse(format!("witness.{k} is missing")))
        };
        let axiom: Axiom = field("axiom")?
            .as_str()
            .ok_or_else(|| Error::Parse("witness.axiom must be a string".into()))?
            .parse()?;
        let aggregator: Aggregator = field("aggregator")?
            .as_str()
            .ok_or_else(|| Error::Parse("witness.aggregator must be a string".into()))?
            .parse()?;
        let profiles = field("profiles")?
            .as_array()
            .ok_or_else(|| Error::Parse("witness.profiles must be an array".into()))?
            .iter()
            .map(ScoreProfile::from_json)
            .collect::<Result<Vec<_>>>()?;
        let label_set = profiles
            .first()
            .map(|p| p.label_set().clone())
            .ok_or_else(|| Error::Parse("witness needs at least one profile".into()))?;
        let str_list = |v: &Value, what: &str| -> Result<Vec<String>> {
            v.as_array()
                .ok_or_else(|| Error::Parse(format!("{what} must be an array")))?
                .iter()
                .map(|x| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::Parse(format!("{what} entries must be strings")))
                })
                .collect()
        };
        let subset_list = |k: &str| -> Result<Vec<LabelSubset>> {
            field(k)?
                .as_array()
                .ok_or_else(|| Error::Parse(format!("witness.{k} must be an array")))?
                .iter()
                .map(|s| {
                    let names = str_list(s, &format!("witness.{k}[]"))?;
                    label_set.subset(names.iter().map(String::as_str))
                })
                .collect()
        };
        let subsets = subset_list("subsets")?;
        let choices = subset_list("choices")?;
        let labels = str_list(field("labels")?, "witness.labels")?
            .iter()
            .map(|n| label_set.index(n))
            .collect::<Result<Vec<_>>>()?;
        let model = match value.get("model") {
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| Error::Parse("witness.model must be an integer".into()))?
                    as usize,
            ),
            None => None,
        };
        let part = match value.get("part") {
            Some(v) => Some(
                v.as_u64()
                    .filter(|p| (1..=3).contains(p))
                    .ok_or_else(|| Error::Parse("witness.part must be 1, 2 or 3".into()))?
                    as u8,
            ),
            None => None,
        };
        let narrative = value
            .get("narrative")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        Ok(Self { axiom, aggregator, profiles, subsets, labels, choices, model, part, narrative })
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.axiom, self.narrative)
    }
}
