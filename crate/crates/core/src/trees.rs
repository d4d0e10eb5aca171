//! One-dimensional toy decision trees: interval leaves holding label counts,
//! scored by leaf label frequencies. Enough to realize the motivating
//! two-point instability from concrete feature values.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::aggregator::{soft_vote_scores, Aggregator};
use crate::axioms::{check_mcr_pair, Witness};
use crate::error::{Error, Result};
use crate::labels::{LabelSet, LabelSubset};
use crate::profile::{rational_from_json, rational_to_json, ScoreProfile};
use crate::rational::{self, int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    /// Training label counts, indexed like the label set.
    pub counts: Vec<u64>,
}

impl Leaf {
    pub fn size(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// A partition of `[edges[0], edges[last]]` into intervals `[e_i, e_{i+1})`
/// (the last one closed), each with its leaf contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyTree {
    labels: Arc<LabelSet>,
    edges: Vec<Rational>,
    leaves: Vec<Leaf>,
}

fn check_edges(edges: &[Rational]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::Invalid("need at least two edges".into()));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("edges must be strictly increasing".into()));
    }
    Ok(())
}

impl ToyTree {
    pub fn new(labels: Arc<LabelSet>, edges: Vec<Rational>, leaves: Vec<Leaf>) -> Result<Self> {
        check_edges(&edges)?;
        if leaves.len() + 1 != edges.len() {
            return Err(Error::Invalid(format!("{} edges need {} leaves, got {}", edges.len(), edges.len() - 1, leaves.len())));
        }
        for (i, leaf) in leaves.iter().enumerate() {
            if leaf.counts.len() != labels.len() {
                return Err(Error::Shape(format!("leaf {i} has {} counts for {} labels", leaf.counts.len(), labels.len())));
            }
            if leaf.size() == 0 {
                return Err(Error::Invalid(format!("leaf {i} is empty")));
            }
        }
        Ok(Self { labels, edges, leaves })
    }

    pub fn label_set(&self) -> &Arc<LabelSet> {
        &self.labels
    }

    pub fn edges(&self) -> &[Rational] {
        &self.edges
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn bounds(&self) -> (&Rational, &Rational) {
        (&self.edges[0], &self.edges[self.edges.len() - 1])
    }

    /// Index of the leaf containing `x`.
    pub fn leaf_index(&self, x: &Rational) -> Result<usize> {
        let (lo, hi) = self.bounds();
        if x < lo || x > hi {
            return Err(Error::Invalid(format!(
                "feature {} outside [{}, {}]",
                rational::format(x),
                rational::format(lo),
                rational::format(hi)
            )));
        }
        // number of interior edges at or below x
        let i = self.edges[1..self.edges.len() - 1].partition_point(|e| e <= x);
        Ok(i)
    }

    pub fn to_json(&self) -> Value {
        let leaves: Vec<Value> = self
            .leaves
            .iter()
            .map(|leaf| {
                let counts: Map<String, Value> = self
                    .labels
                    .labels()
                    .iter()
                    .zip(&leaf.counts)
                    .map(|(l, &c)| (l.clone(), json!(c)))
                    .collect();
                json!({ "counts": counts })
            })
            .collect();
        json!({
            "edges": self.edges.iter().map(rational_to_json).collect::<Vec<_>>(),
            "leaves": leaves,
        })
    }

    /// Reads a tree; labels missing from a leaf's counts count zero.
    pub fn from_json(value: &Value, labels: Arc<LabelSet>) -> Result<Self> {
        let edges = value
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("tree.edges must be an array".into()))?
            .iter()
            .map(rational_from_json)
            .collect::<Result<Vec<_>>>()?;
        let leaves = value
            .get("leaves")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("tree.leaves must be an array".into()))?
            .iter()
            .enumerate()
            .map(|(i, leaf)| {
                let counts = leaf
                    .get("counts")
                    .and_then(Value::as_object)
                    .ok_or_else(|| Error::Parse(format!("tree.leaves[{i}].counts must be an object")))?;
                let mut out = vec![0u64; labels.len()];
                for (name, c) in counts {
                    let c = c
                        .as_u64()
                        .ok_or_else(|| Error::Parse(format!("tree.leaves[{i}].counts.{name} must be a count")))?;
                    out[labels.index(name)?] = c;
                }
                Ok(Leaf { counts: out })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, edges, leaves)
    }
}

/// Label frequencies in the leaf containing `x`.
pub fn tree_score(tree: &ToyTree, x: &Rational) -> Result<Vec<Rational>> {
    let leaf = &tree.leaves[tree.leaf_index(x)?];
    let size = leaf.size() as i64;
    Ok(leaf.counts.iter().map(|&c| ratio(c as i64, size)).collect())
}

/// One row per tree.
pub fn ensemble_tree_scores(trees: &[ToyTree], x: &Rational) -> Result<ScoreProfile> {
    let first = trees.first().ok_or_else(|| Error::Invalid("need at least one tree".into()))?;
    if trees.iter().any(|t| t.labels != first.labels) {
        return Err(Error::Shape("trees use different label sets".into()));
    }
    let rows = trees.iter().map(|t| tree_score(t, x)).collect::<Result<Vec<_>>>()?;
    ScoreProfile::new(first.labels.clone(), rows)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    labels: Arc<LabelSet>,
    pub examples: Vec<(Rational, usize)>,
    pub bounds: (Rational, Rational),
}

impl LabeledDataset {
    pub fn new(labels: Arc<LabelSet>, examples: Vec<(Rational, usize)>, bounds: (Rational, Rational)) -> Result<Self> {
        if bounds.0 >= bounds.1 {
            return Err(Error::Invalid("feature bounds must satisfy lo < hi".into()));
        }
        for (i, (x, y)) in examples.iter().enumerate() {
            if *y >= labels.len() {
                return Err(Error::Invalid(format!("example {i} has label index {y} outside the label set")));
            }
            if *x < bounds.0 || *x > bounds.1 {
                return Err(Error::Invalid(format!("example {i} lies outside the feature bounds")));
            }
        }
        Ok(Self { labels, examples, bounds })
    }

    pub fn label_set(&self) -> &Arc<LabelSet> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// `feature,label` lines under a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,label\n");
        for (x, y) in &self.examples {
            out.push_str(&format!("{},{}\n", rational::format(x), self.labels.name(*y)));
        }
        out
    }

    pub fn from_csv(text: &str, labels: Arc<LabelSet>, bounds: (Rational, Rational)) -> Result<Self> {
        let mut examples = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.eq_ignore_ascii_case("feature,label")) {
                continue;
            }
            let (x, y) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected feature,label", n + 1)))?;
            let x = rational::parse(x.trim()).map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
            examples.push((x, labels.index(y.trim())?));
        }
        Self::new(labels, examples, bounds)
    }
}

/// One leaf per interval of `edges`, holding the labels that fall inside.
/// An empty interval takes the contents of the nearest nonempty one (the
/// left one on a tie).
pub fn fit_toy_tree(data: &LabeledDataset, edges: &[Rational]) -> Result<ToyTree> {
    if data.is_empty() {
        return Err(Error::Invalid("cannot fit a tree without data".into()));
    }
    check_edges(edges)?;
    if edges[0] > data.bounds.0 || edges[edges.len() - 1] < data.bounds.1 {
        return Err(Error::Invalid("edges must span the feature bounds".into()));
    }
    let k = data.labels.len();
    let bins = edges.len() - 1;
    let mut counts = vec![vec![0u64; k]; bins];
    for (x, y) in &data.examples {
        let i = edges[1..bins].partition_point(|e| e <= x);
        counts[i][*y] += 1;
    }
    let filled: Vec<usize> = (0..bins).filter(|&i| counts[i].iter().any(|&c| c > 0)).collect();
    let leaves = (0..bins)
        .map(|i| {
            let src = *filled
                .iter()
                .min_by_key(|&&f| (f.abs_diff(i), f))
                .expect("at least one example");
            Leaf { counts: counts[src].clone() }
        })
        .collect();
    ToyTree::new(data.labels.clone(), edges.to_vec(), leaves)
}

#[derive(Debug, Clone)]
pub struct Table1Fixture {
    pub trees: Vec<ToyTree>,
    pub x1: Rational,
    pub x2: Rational,
}

/// Three trees on `[0, 1]` with labels `1, 2, 3`. Tree 1 splits at 1/2 and
/// puts the two points in different leaves; trees 2 and 3 are single leaves.
pub fn build_table1_fixture() -> Table1Fixture {
    let labels = LabelSet::numbered(3).expect("three labels").shared();
    let leaf = |c: [u64; 3]| Leaf { counts: c.to_vec() };
    let unit = || vec![int(0), int(1)];
    let trees = vec![
        ToyTree::new(labels.clone(), vec![int(0), ratio(1, 2), int(1)], vec![leaf([40, 34, 26]), leaf([40, 36, 24])]),
        ToyTree::new(labels.clone(), unit(), vec![leaf([8, 7, 5])]),
        ToyTree::new(labels, unit(), vec![leaf([4, 5, 1])]),
    ]
    .into_iter()
    .collect::<Result<Vec<_>>>()
    .expect("fixture trees are valid");
    Table1Fixture { trees, x1: ratio(1, 4), x2: ratio(3, 4) }
}

#[derive(Debug, Clone)]
pub struct Table1Report {
    pub labels: Arc<LabelSet>,
    pub profiles: [ScoreProfile; 2],
    pub aggregates: [Vec<Rational>; 2],
    pub choices: [LabelSubset; 2],
    pub witness: Option<Witness>,
}

impl Table1Report {
    pub fn rounded_aggregates(&self, places: usize) -> [Vec<String>; 2] {
        self.aggregates
            .clone()
            .map(|a| a.iter().map(|v| rational::round_decimal(v, places)).collect())
    }

    pub fn to_json(&self) -> Value {
        let point = |i: usize, x: &str| {
            let rows: Vec<Vec<String>> = self.profiles[i]
                .rows()
                .map(|r| r.iter().map(rational::format).collect())
                .collect();
            json!({
                "x": x,
                "tree_scores": rows,
                "aggregate": self.aggregates[i].iter().map(rational::format).collect::<Vec<_>>(),
                "aggregate_rounded": self.rounded_aggregates(4)[i],
                "choice": self.labels.names(self.choices[i]),
            })
        };
        json!({
            "aggregator": Aggregator::SoftVoting.to_string(),
            "labels": self.labels.labels(),
            "points": [point(0, "x1"), point(1, "x2")],
            "witness": self.witness.as_ref().map(Witness::to_json),
        })
    }
}

/// Scores, soft-voting aggregates and choices of the fixture at both points,
/// plus the model choice reversal witness between them.
pub fn table1_report(fixture: &Table1Fixture) -> Result<Table1Report> {
    let z1 = ensemble_tree_scores(&fixture.trees, &fixture.x1)?;
    let z2 = ensemble_tree_scores(&fixture.trees, &fixture.x2)?;
    let labels = z1.label_set().clone();
    let all = labels.all();
    let agg = Aggregator::SoftVoting;
    let aggregates = [soft_vote_scores(&z1, None)?, soft_vote_scores(&z2, None)?];
    let choices = [agg.choose(all, &z1)?, agg.choose(all, &z2)?];
    let witness = check_mcr_pair(&agg, &z1, &z2, all)?.into_witness();
    Ok(Table1Report { labels, profiles: [z1, z2], aggregates, choices, witness })
}
