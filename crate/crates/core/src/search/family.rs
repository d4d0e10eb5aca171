//! Finite, randomly addressable families of score profiles.
//!
//! A family fixes the label set, the number of models and a per-row
//! generator. Profiles are ordered lexicographically by their tuple of row
//! orders, then by their tuple of score rows, and `profile_at(i)` decodes
//! index `i` directly, so scans can split the index range across workers.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::labels::LabelSet;
use crate::order::OrderOnLabels;
use crate::profile::{ScoreProfile, MAX_MODELS};
use crate::rational::{int, Rational};

/// Largest family `enumerate_family` will index.
pub const MAX_FAMILY_SIZE: u128 = 1 << 32;
pub const MAX_GRID: u32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    /// One canonical row per strict order.
    CanonicalStrict,
    /// Every strictly ordered row of distinct integers from `1..=G`.
    Grid(u32),
    /// One canonical row per weak order.
    WeakCanonical,
    /// All rows share one strict order; each row is the canonical row, its
    /// double, or its square.
    CommonStrict,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::CanonicalStrict => f.write_str("canonical"),
            Generator::Grid(g) => write!(f, "grid:{g}"),
            Generator::WeakCanonical => f.write_str("weak"),
            Generator::CommonStrict => f.write_str("common"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "canonical" | "canonical_strict" => return Ok(Generator::CanonicalStrict),
            "weak" | "weak_canonical" => return Ok(Generator::WeakCanonical),
            "common" | "common_strict" => return Ok(Generator::CommonStrict),
            _ => {}
        }
        let g = s
            .strip_prefix("grid:")
            .or_else(|| s.strip_prefix("grid"))
            .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))?;
        let g = g
            .trim_start_matches(['(', ':'])
            .trim_end_matches(')')
            .parse()
            .map_err(|_| Error::Parse(format!("bad grid size in {s:?}")))?;
        Ok(Generator::Grid(g))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub labels: Arc<LabelSet>,
    pub models: usize,
    pub generator: Generator,
}

impl FamilySpec {
    pub fn new(labels: Arc<LabelSet>, models: usize, generator: Generator) -> Self {
        Self { labels, models, generator }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} family, |Y|={}, m={}", self.generator, self.labels.len(), self.models)
    }
}

#[derive(Debug, Clone)]
pub struct ProfileFamily {
    spec: FamilySpec,
    orders: Vec<OrderOnLabels>,
    /// Score rows consistent with each order, sorted lexicographically.
    rows: Vec<Vec<Vec<Rational>>>,
    len: usize,
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base))
}

fn fubini(k: usize) -> u128 {
    // ordered set partitions: a(n) = sum_i C(n,i) a(n-i)
    let mut a = vec![1u128; k + 1];
    for n in 1..=k {
        a[n] = (1..=n).map(|i| binomial(n as u128, i as u128) * a[n - i]).sum();
    }
    a[k]
}

/// Closed-form family size, or `None` on overflow.
pub fn family_size(spec: &FamilySpec) -> Option<u128> {
    let k = spec.labels.len();
    let fact: u128 = (1..=k as u128).product();
    match spec.generator {
        Generator::CanonicalStrict => checked_pow(fact, spec.models),
        Generator::Grid(g) => checked_pow(fact * binomial(g as u128, k as u128), spec.models),
        Generator::WeakCanonical => checked_pow(fubini(k), spec.models),
        Generator::CommonStrict => checked_pow(3, spec.models).and_then(|p| p.checked_mul(fact)),
    }
}

fn too_large(required: Option<u128>, limit: u128) -> Error {
    Error::FamilyTooLarge { required: required.unwrap_or(u128::MAX), limit }
}

/// Strictly decreasing `k`-tuples from `1..=g`, in lexicographic order.
fn decreasing_tuples(g: u32, k: usize) -> Vec<Vec<u32>> {
    fn rec(max: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in left as u32..=max {
            cur.push(v);
            rec(v - 1, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(g, k, &mut Vec::new(), &mut out);
    out
}

fn rows_for(order: &OrderOnLabels, generator: Generator) -> Vec<Vec<Rational>> {
    let canon = order.canonical_row();
    let mut rows = match generator {
        Generator::CanonicalStrict | Generator::WeakCanonical => vec![canon],
        Generator::CommonStrict => vec![
            canon.clone(),
            canon.iter().map(|v| v * int(2)).collect(),
            canon.iter().map(|v| v * v).collect(),
        ],
        Generator::Grid(g) => {
            let k = canon.len();
            // level L - r gets the r-th largest value
            let top = order.num_levels();
            decreasing_tuples(g, k)
                .into_iter()
                .map(|vals| {
                    order
                        .levels()
                        .iter()
                        .map(|&l| int(vals[(top - l) as usize] as i64))
                        .collect()
                })
                .collect()
        }
    };
    rows.sort();
    rows
}

/// Builds the family, refusing sizes past the generator's guard.
pub fn enumerate_family(spec: &FamilySpec) -> Result<ProfileFamily> {
    let k = spec.labels.len();
    let m = spec.models;
    if m == 0 || m > MAX_MODELS {
        return Err(Error::Invalid(format!("model count must be in 1..={MAX_MODELS}, got {m}")));
    }
    let size = family_size(spec);
    match spec.generator {
        Generator::CanonicalStrict if k > 5 || m > 4 => {
            let fact: u128 = (1..=k.min(5) as u128).product();
            return Err(too_large(size, fact.pow(m.min(4) as u32)));
        }
        Generator::Grid(g) if g > MAX_GRID => {
            return Err(Error::Invalid(format!("grid size must be at most {MAX_GRID}, got {g}")));
        }
        Generator::Grid(g) if (g as usize) < k => {
            return Err(Error::Invalid(format!("grid of {g} values cannot order {k} labels strictly")));
        }
        _ => {}
    }
    let len = match size {
        Some(n) if n <= MAX_FAMILY_SIZE => n as usize,
        _ => return Err(too_large(size, MAX_FAMILY_SIZE)),
    };
    let orders = match spec.generator {
        Generator::WeakCanonical => OrderOnLabels::all_weak(&spec.labels),
        _ => OrderOnLabels::all_strict(&spec.labels),
    };
    let rows = orders.iter().map(|o| rows_for(o, spec.generator)).collect();
    Ok(ProfileFamily { spec: spec.clone(), orders, rows, len })
}

impl ProfileFamily {
    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn orders(&self) -> &[OrderOnLabels] {
        &self.orders
    }

    fn rows_per_order(&self) -> usize {
        self.rows[0].len()
    }

    /// Row orders (as indices into [`Self::orders`]) and score-row choices of profile `i`.
    fn decode(&self, i: usize) -> (Vec<usize>, Vec<usize>) {
        let m = self.spec.models;
        let r = self.rows_per_order();
        let per_tuple = r.pow(m as u32);
        let (mut ot, mut st) = (i / per_tuple, i % per_tuple);
        let mut orders = vec![0; m];
        let mut picks = vec![0; m];
        for j in (0..m).rev() {
            picks[j] = st % r;
            st /= r;
        }
        if self.spec.generator == Generator::CommonStrict {
            orders.fill(ot);
        } else {
            let n = self.orders.len();
            for j in (0..m).rev() {
                orders[j] = ot % n;
                ot /= n;
            }
        }
        (orders, picks)
    }

    /// The `i`-th profile in enumeration order.
    pub fn profile_at(&self, i: usize) -> ScoreProfile {
        assert!(i < self.len, "profile index {i} out of range for family of {}", self.len);
        let (orders, picks) = self.decode(i);
        let rows = orders
            .iter()
            .zip(&picks)
            .map(|(&o, &p)| self.rows[o][p].clone())
            .collect();
        ScoreProfile::new(self.spec.labels.clone(), rows).expect("generated rows are well formed")
    }

    pub fn iter(&self) -> impl Iterator<Item = ScoreProfile> + '_ {
        (0..self.len).map(|i| self.profile_at(i))
    }

    /// All profiles, if there are at most `limit`.
    pub fn materialize(&self, limit: usize) -> Result<Vec<ScoreProfile>> {
        if self.len > limit {
            return Err(Error::FamilyTooLarge { required: self.len as u128, limit: limit as u128 });
        }
        Ok(self.iter().collect())
    }
}
