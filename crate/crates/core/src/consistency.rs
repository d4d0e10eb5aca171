//! Synthetic classification problems with known conditional label
//! distributions, histogram score estimators fitted to samples from them,
//! and the experiment tracking how disagreement with the truth and the
//! model choice reversal rate of the ensemble shrink as the sample grows.
//!
//! Features live in `[0, 1]`. Sampled features are dyadic rationals, so
//! every score is exact and axiom checks never see rounding.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::aggregator::Aggregator;
use crate::axioms::{check_mcr_pair, common_strict_order};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::labels::LabelSet;
use crate::profile::{rational_from_json, rational_to_json, ScoreProfile};
use crate::rational::{self, int, ratio, Rational};
use crate::trees::{tree_score, LabeledDataset, ToyTree};

/// Anything that scores every label at a feature point.
pub trait ScoreModel: Sync {
    fn label_set(&self) -> &Arc<LabelSet>;
    fn scores(&self, x: &Rational) -> Result<Vec<Rational>>;
}

impl ScoreModel for ToyTree {
    fn label_set(&self) -> &Arc<LabelSet> {
        ToyTree::label_set(self)
    }

    fn scores(&self, x: &Rational) -> Result<Vec<Rational>> {
        tree_score(self, x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    /// Upper end of the cell; the lower end is the previous cell's.
    pub hi: Rational,
    pub p: Vec<Rational>,
}

/// Piecewise-constant `p(y|x)` on `[0, 1]` with a uniform feature density.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticProblem {
    labels: Arc<LabelSet>,
    cells: Vec<Cell>,
}

impl SyntheticProblem {
    pub fn new(labels: Arc<LabelSet>, cells: Vec<Cell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Invalid("a problem needs at least one cell".into()));
        }
        let mut lo = Rational::zero();
        for (i, c) in cells.iter().enumerate() {
            if c.hi <= lo {
                return Err(Error::Invalid(format!("cell {i} ends at or before where it starts")));
            }
            lo = c.hi.clone();
            if c.p.len() != labels.len() {
                return Err(Error::Shape(format!("cell {i} has {} probabilities for {} labels", c.p.len(), labels.len())));
            }
            if c.p.iter().any(|v| *v < Rational::zero()) || c.p.iter().sum::<Rational>() != Rational::one() {
                return Err(Error::Invalid(format!("cell {i} probabilities must be nonnegative and sum to 1")));
            }
            let mut sorted = c.p.clone();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Invalid(format!("cell {i} has tied label probabilities")));
            }
        }
        if lo != Rational::one() {
            return Err(Error::Invalid("cells must cover [0, 1]".into()));
        }
        Ok(Self { labels, cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Cell boundaries `0 = e_0 < ... < e_B = 1`.
    pub fn edges(&self) -> Vec<Rational> {
        std::iter::once(Rational::zero()).chain(self.cells.iter().map(|c| c.hi.clone())).collect()
    }

    pub fn cell_of(&self, x: &Rational) -> Result<usize> {
        if *x < Rational::zero() || *x > Rational::one() {
            return Err(Error::Invalid(format!("feature {} outside [0, 1]", rational::format(x))));
        }
        Ok(self.cells.partition_point(|c| c.hi <= *x).min(self.cells.len() - 1))
    }

    pub fn truth(&self, x: &Rational) -> Result<&[Rational]> {
        Ok(&self.cells[self.cell_of(x)?].p)
    }

    pub fn to_json(&self) -> Value {
        let cells: Vec<Value> = self
            .cells
            .iter()
            .map(|c| {
                let p: Map<String, Value> = self
                    .labels
                    .labels()
                    .iter()
                    .zip(&c.p)
                    .map(|(l, v)| (l.clone(), rational_to_json(v)))
                    .collect();
                json!({"hi": rational_to_json(&c.hi), "p": p})
            })
            .collect();
        json!({"labels": self.labels.labels(), "cells": cells})
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let names: Vec<String> = value
            .get("labels")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("problem.labels must be an array".into()))?
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| Error::Parse("problem.labels entries must be strings".into())))
            .collect::<Result<_>>()?;
        let labels = LabelSet::new(names)?.shared();
        let cells = value
            .get("cells")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("problem.cells must be an array".into()))?
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let hi = rational_from_json(c.get("hi").ok_or_else(|| Error::Parse(format!("problem.cells[{i}].hi is missing")))?)?;
                let p = c
                    .get("p")
                    .and_then(Value::as_object)
                    .ok_or_else(|| Error::Parse(format!("problem.cells[{i}].p must be an object")))?;
                let mut probs = vec![Rational::zero(); labels.len()];
                for (name, v) in p {
                    probs[labels.index(name)?] = rational_from_json(v)?;
                }
                Ok(Cell { hi, p: probs })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, cells)
    }
}

impl ScoreModel for SyntheticProblem {
    fn label_set(&self) -> &Arc<LabelSet> {
        &self.labels
    }

    fn scores(&self, x: &Rational) -> Result<Vec<Rational>> {
        Ok(self.truth(x)?.to_vec())
    }
}

/// Four cells, three labels, every probability gap at least 0.1.
pub fn four_cell_problem() -> SyntheticProblem {
    let labels = LabelSet::alphabetic(3).expect("labels").shared();
    let cell = |hi: Rational, p: [i64; 3]| Cell { hi, p: p.iter().map(|&v| ratio(v, 100)).collect() };
    SyntheticProblem::new(
        labels,
        vec![
            cell(ratio(1, 4), [60, 30, 10]),
            cell(ratio(1, 2), [20, 50, 30]),
            cell(ratio(3, 4), [15, 25, 60]),
            cell(int(1), [45, 35, 20]),
        ],
    )
    .expect("valid fixture")
}

/// Independent streams keyed by purpose, all derived from one seed.
fn stream(seed: u64, purpose: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose << 56 ^ a << 20 ^ b);
    rng
}

const DATA: u64 = 1;
const JITTER: u64 = 2;
const MC: u64 = 3;
const PAIRS: u64 = 4;

/// Uniform on `[0, 1)` with 53 random bits, as an exact rational.
fn unit(rng: &mut ChaCha8Rng) -> Rational {
    let k = rng.gen::<u64>() >> 11;
    Rational::new(BigInt::from(k), BigInt::from(1u64 << 53))
}

fn draw_label(rng: &mut ChaCha8Rng, p: &[Rational]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, v) in p.iter().enumerate() {
        acc += rational::to_f64(v);
        if u < acc {
            return i;
        }
    }
    // rounding can leave u above the float total; take the last positive label
    p.iter().rposition(|v| !v.is_zero()).unwrap_or(p.len() - 1)
}

/// `n` draws: `x` uniform, `y ~ p(.|x)`.
pub fn sample_dataset(problem: &SyntheticProblem, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::Invalid("sample size must be at least 1".into()));
    }
    let mut rng = stream(seed, DATA, n as u64, 0);
    let examples = (0..n)
        .map(|_| {
            let x = unit(&mut rng);
            let y = draw_label(&mut rng, problem.truth(&x).expect("x in [0, 1)"));
            (x, y)
        })
        .collect();
    LabeledDataset::new(problem.labels.clone(), examples, (Rational::zero(), Rational::one()))
}

/// Per-bin smoothed label frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramEstimator {
    labels: Arc<LabelSet>,
    edges: Vec<Rational>,
    bins: Vec<Vec<Rational>>,
}

impl HistogramEstimator {
    pub fn edges(&self) -> &[Rational] {
        &self.edges
    }

    pub fn bins(&self) -> &[Vec<Rational>] {
        &self.bins
    }

    fn bin_of(&self, x: &Rational) -> Result<usize> {
        let last = self.edges.len() - 1;
        if *x < self.edges[0] || *x > self.edges[last] {
            return Err(Error::Invalid(format!("feature {} outside the estimator's range", rational::format(x))));
        }
        Ok(self.edges[1..last].partition_point(|e| e <= x))
    }
}

impl ScoreModel for HistogramEstimator {
    fn label_set(&self) -> &Arc<LabelSet> {
        &self.labels
    }

    fn scores(&self, x: &Rational) -> Result<Vec<Rational>> {
        Ok(self.bins[self.bin_of(x)?].clone())
    }
}

/// Bin frequencies `(count + alpha) / (bin_n + alpha |Y|)`.
pub fn fit_histogram_estimator(data: &LabeledDataset, edges: &[Rational], alpha: &Rational) -> Result<HistogramEstimator> {
    if data.is_empty() {
        return Err(Error::Invalid("cannot fit an estimator without data".into()));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("edges must be strictly increasing".into()));
    }
    if edges[0] > data.bounds.0 || edges[edges.len() - 1] < data.bounds.1 {
        return Err(Error::Invalid("edges must span the feature bounds".into()));
    }
    if *alpha < Rational::zero() {
        return Err(Error::Invalid("pseudocount must be nonnegative".into()));
    }
    let k = data.label_set().len();
    let nb = edges.len() - 1;
    let mut counts = vec![vec![0u64; k]; nb];
    for (x, y) in &data.examples {
        counts[edges[1..nb].partition_point(|e| e <= x)][*y] += 1;
    }
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let total = int(c.iter().sum::<u64>() as i64) + alpha * int(k as i64);
            if total.is_zero() {
                return Err(Error::Invalid(format!("bin {i} is empty and the pseudocount is zero")));
            }
            Ok(c.iter().map(|&v| (int(v as i64) + alpha) / &total).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HistogramEstimator { labels: data.label_set().clone(), edges: edges.to_vec(), bins })
}

/// Splits every truth cell into `parts` sub-bins whose inner boundaries
/// are moved by up to 30% of a sub-bin width, differently per `model`.
pub fn jittered_edges(problem: &SyntheticProblem, parts: usize, seed: u64, model: usize) -> Vec<Rational> {
    let parts = parts.max(1);
    let mut rng = stream(seed, JITTER, model as u64, parts as u64);
    let cell_edges = problem.edges();
    let mut out = vec![cell_edges[0].clone()];
    for w in cell_edges.windows(2) {
        let width = &w[1] - &w[0];
        for i in 1..parts {
            let shift: i64 = rng.gen_range(-300..=300);
            let frac = ratio(1000 * i as i64 + shift, 1000 * parts as i64);
            out.push(&w[0] + &width * frac);
        }
        out.push(w[1].clone());
    }
    out
}

/// Monte Carlo estimate of the share of ordered label pairs the model
/// ranks against the truth: `p(y|x) > p(y'|x)` but `s(y) <= s(y')`.
pub fn disagreement_metric(model: &dyn ScoreModel, problem: &SyntheticProblem, n_mc: usize, seed: u64) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::Invalid("need at least one Monte Carlo draw".into()));
    }
    let k = problem.labels.len();
    let mut rng = stream(seed, MC, n_mc as u64, 0);
    let mut bad = 0u64;
    for _ in 0..n_mc {
        let x = unit(&mut rng);
        let p = problem.truth(&x)?;
        let s = model.scores(&x)?;
        for a in 0..k {
            for b in 0..k {
                if a != b && p[a] > p[b] && s[a] <= s[b] {
                    bad += 1;
                }
            }
        }
    }
    Ok(bad as f64 / (n_mc * k * (k - 1)) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct McrCounts {
    pub pairs: u64,
    pub violations: u64,
    /// Pairs where each point's rows share one strict order.
    pub common_order_pairs: u64,
    pub common_order_violations: u64,
}

impl McrCounts {
    pub fn rate(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.violations as f64 / self.pairs as f64
        }
    }
}

fn profile_at(models: &[&dyn ScoreModel], x: &Rational) -> Result<ScoreProfile> {
    let labels = models
        .first()
        .ok_or_else(|| Error::Invalid("need at least one model".into()))?
        .label_set()
        .clone();
    if models.iter().any(|m| **m.label_set() != *labels) {
        return Err(Error::Shape("models use different label sets".into()));
    }
    let rows = models.iter().map(|m| m.scores(x)).collect::<Result<Vec<_>>>()?;
    ScoreProfile::new(labels, rows)
}

/// Model choice reversal between `s(x)` and `s(x')` on the full label set,
/// for each given pair.
pub fn mcr_counts_on(models: &[&dyn ScoreModel], agg: &Aggregator, pairs: &[(Rational, Rational)]) -> Result<McrCounts> {
    let mut counts = McrCounts::default();
    for (x, x2) in pairs {
        let z = profile_at(models, x)?;
        let z2 = profile_at(models, x2)?;
        let violated = !check_mcr_pair(agg, &z, &z2, z.label_set().all())?.holds();
        counts.pairs += 1;
        counts.violations += violated as u64;
        if common_strict_order(&z).is_some() && common_strict_order(&z2).is_some() {
            counts.common_order_pairs += 1;
            counts.common_order_violations += violated as u64;
        }
    }
    Ok(counts)
}

/// `n_pairs` random pairs: independent uniform points, or with `nearby`
/// set, `x'` within `delta` of `x` (clamped to `[0, 1]`).
pub fn sample_pairs(n_pairs: usize, seed: u64, nearby: Option<&Rational>) -> Vec<(Rational, Rational)> {
    let mut rng = stream(seed, PAIRS, n_pairs as u64, 0);
    (0..n_pairs)
        .map(|_| {
            let x = unit(&mut rng);
            let u = unit(&mut rng);
            let x2 = match nearby {
                None => u,
                Some(delta) => {
                    let moved = &x + delta * (u * int(2) - int(1));
                    moved.clamp(Rational::zero(), Rational::one())
                }
            };
            (x, x2)
        })
        .collect()
}

pub fn mcr_violation_rate(
    models: &[&dyn ScoreModel],
    agg: &Aggregator,
    n_pairs: usize,
    seed: u64,
    nearby: Option<&Rational>,
) -> Result<McrCounts> {
    if n_pairs == 0 {
        return Err(Error::Invalid("need at least one pair".into()));
    }
    mcr_counts_on(models, agg, &sample_pairs(n_pairs, seed, nearby))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorKind {
    #[default]
    Histogram,
    /// Every model is the true conditional distribution.
    Truth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_schedule: Vec<usize>,
    pub models: usize,
    pub seeds: Vec<u64>,
    pub n_mc: usize,
    pub n_pairs: usize,
    /// Sub-bins per truth cell.
    pub parts: usize,
    pub alpha: Rational,
    pub nearby: Option<Rational>,
    pub estimators: EstimatorKind,
    pub exec: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_schedule: vec![100, 1_000, 10_000, 100_000],
            models: 3,
            seeds: (0..5).collect(),
            n_mc: 2_000,
            n_pairs: 2_000,
            parts: 3,
            alpha: int(1),
            nearby: None,
            estimators: EstimatorKind::Histogram,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub n: usize,
    pub seed: u64,
    /// Mean over the models.
    pub disagreement: f64,
    /// `None` for a single model, where reversal is not about aggregation.
    pub mcr: Option<McrCounts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub mean_disagreement: f64,
    pub se_disagreement: f64,
    pub mean_mcr_rate: Option<f64>,
    pub se_mcr_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    pub runs: Vec<RunRow>,
    pub summary: Vec<SummaryRow>,
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"))
}

impl ExperimentTable {
    /// `n,seed,disagreement,mcr_rate`, one line per run.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,seed,disagreement,mcr_rate\n");
        for r in &self.runs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.n,
                r.seed,
                fmt_metric(Some(r.disagreement)),
                fmt_metric(r.mcr.map(|c| c.rate()))
            ));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("n,mean_disagreement,se_disagreement,mean_mcr_rate,se_mcr_rate\n");
        for s in &self.summary {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.n,
                fmt_metric(Some(s.mean_disagreement)),
                fmt_metric(Some(s.se_disagreement)),
                fmt_metric(s.mean_mcr_rate),
                fmt_metric(s.se_mcr_rate)
            ));
        }
        out
    }

    pub fn summary_for(&self, n: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.n == n)
    }
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One run per `(n, seed)`: sample, fit the models, measure both metrics
/// with soft voting.
pub fn convergence_experiment(problem: &SyntheticProblem, config: &ExperimentConfig) -> Result<ExperimentTable> {
    if config.n_schedule.is_empty() || config.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("sample sizes must be strictly increasing".into()));
    }
    if config.models == 0 || config.seeds.is_empty() {
        return Err(Error::Invalid("need at least one model and one seed".into()));
    }
    let runs: Vec<(usize, u64)> = config
        .n_schedule
        .iter()
        .flat_map(|&n| config.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results = exec::map_range(config.exec, runs.len(), |i| run_once(problem, config, runs[i].0, runs[i].1));
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = config
        .n_schedule
        .iter()
        .map(|&n| {
            let rows: Vec<&RunRow> = runs.iter().filter(|r| r.n == n).collect();
            let dis: Vec<f64> = rows.iter().map(|r| r.disagreement).collect();
            let (mean_disagreement, se_disagreement) = mean_se(&dis);
            let mcr: Option<Vec<f64>> = rows.iter().map(|r| r.mcr.map(|c| c.rate())).collect();
            let (mean_mcr_rate, se_mcr_rate) = match mcr {
                Some(v) => {
                    let (m, s) = mean_se(&v);
                    (Some(m), Some(s))
                }
                None => (None, None),
            };
            SummaryRow { n, mean_disagreement, se_disagreement, mean_mcr_rate, se_mcr_rate }
        })
        .collect();
    Ok(ExperimentTable { runs, summary })
}

fn run_once(problem: &SyntheticProblem, config: &ExperimentConfig, n: usize, seed: u64) -> Result<RunRow> {
    let fitted: Vec<HistogramEstimator> = match config.estimators {
        EstimatorKind::Truth => Vec::new(),
        EstimatorKind::Histogram => {
            let data = sample_dataset(problem, n, seed)?;
            (0..config.models)
                .map(|j| fit_histogram_estimator(&data, &jittered_edges(problem, config.parts, seed, j), &config.alpha))
                .collect::<Result<_>>()?
        }
    };
    let models: Vec<&dyn ScoreModel> = match config.estimators {
        EstimatorKind::Truth => vec![problem as &dyn ScoreModel; config.models],
        EstimatorKind::Histogram => fitted.iter().map(|e| e as &dyn ScoreModel).collect(),
    };
    let mut dis = 0.0;
    for m in &models {
        dis += disagreement_metric(*m, problem, config.n_mc, seed)?;
    }
    let mcr = if config.models < 2 {
        None
    } else {
        Some(mcr_violation_rate(&models, &Aggregator::SoftVoting, config.n_pairs, seed, config.nearby.as_ref())?)
    };
    Ok(RunRow { n, seed, disagreement: dis / models.len() as f64, mcr })
}
