//! Weak and strict orders on a label set, and the score sets `W(Y,R)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::labels::LabelSet;
use crate::profile::ScoreProfile;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderKind {
    Weak,
    Strict,
}

/// A complete, transitive relation on `Y`, stored as one level per label.
/// Higher level means preferred; equal levels are ties. Levels are kept
/// normalized to `1..=L` so equal orders compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderOnLabels {
    labels: Arc<LabelSet>,
    levels: Vec<u32>,
}

impl OrderOnLabels {
    /// Any integer levels; only their relative order matters.
    pub fn from_levels(labels: Arc<LabelSet>, levels: &[i64]) -> Result<Self> {
        if levels.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} levels for {} labels",
                levels.len(),
                labels.len()
            )));
        }
        Ok(Self { levels: dense_ranks(levels), labels })
    }

    /// Strict order from a top-to-bottom sequence of label indices.
    pub fn strict(labels: Arc<LabelSet>, top_down: &[usize]) -> Result<Self> {
        let k = labels.len();
        let mut seen = vec![false; k];
        if top_down.len() != k {
            return Err(Error::Invalid(format!("a strict order must rank all {k} labels")));
        }
        let mut levels = vec![0i64; k];
        for (pos, &label) in top_down.iter().enumerate() {
            if label >= k || seen[label] {
                return Err(Error::Invalid(format!("bad label index {label} in strict order")));
            }
            seen[label] = true;
            levels[label] = (k - pos) as i64;
        }
        Self::from_levels(labels, &levels)
    }

    pub fn label_set(&self) -> &Arc<LabelSet> {
        &self.labels
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn num_levels(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    pub fn kind(&self) -> OrderKind {
        if self.num_levels() as usize == self.levels.len() {
            OrderKind::Strict
        } else {
            OrderKind::Weak
        }
    }

    pub fn is_strict(&self) -> bool {
        self.kind() == OrderKind::Strict
    }

    /// `a R b`: `a` is at least as good as `b`.
    pub fn weakly_prefers(&self, a: usize, b: usize) -> bool {
        self.levels[a] >= self.levels[b]
    }

    /// The canonical score row: a label on the k-th level from the top
    /// scores `L - k + 1`.
    pub fn canonical_row(&self) -> Vec<Rational> {
        self.levels.iter().map(|&l| rational::int(l as i64)).collect()
    }

    /// Every strict order on `labels`, lexicographic in the top-down sequence.
    pub fn all_strict(labels: &Arc<LabelSet>) -> Vec<OrderOnLabels> {
        permutations(labels.len())
            .into_iter()
            .map(|p| OrderOnLabels::strict(labels.clone(), &p).expect("valid permutation"))
            .collect()
    }

    /// Every weak order on `labels`, lexicographic in the level vector.
    pub fn all_weak(labels: &Arc<LabelSet>) -> Vec<OrderOnLabels> {
        let k = labels.len();
        let mut out = Vec::new();
        let mut levels = vec![1u32; k];
        loop {
            let top = levels.iter().copied().max().unwrap_or(0);
            if (1..=top).all(|l| levels.contains(&l)) {
                out.push(OrderOnLabels { labels: labels.clone(), levels: levels.clone() });
            }
            // odometer over {1..k}^k
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if levels[i] < k as u32 {
                    levels[i] += 1;
                    for l in &mut levels[i + 1..] {
                        *l = 1;
                    }
                    break;
                }
            }
        }
    }
}

impl fmt::Display for OrderOnLabels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut groups: Vec<(u32, Vec<&str>)> = Vec::new();
        for level in (1..=self.num_levels()).rev() {
            let names = (0..self.levels.len())
                .filter(|&i| self.levels[i] == level)
                .map(|i| self.labels.name(i))
                .collect();
            groups.push((level, names));
        }
        let parts: Vec<String> = groups.into_iter().map(|(_, g)| g.join(" ~ ")).collect();
        write!(f, "{}", parts.join(" > "))
    }
}

fn dense_ranks<T: Ord>(values: &[T]) -> Vec<u32> {
    let mut sorted: Vec<&T> = values.iter().collect();
    sorted.sort();
    sorted.dedup();
    values
        .iter()
        .map(|v| sorted.binary_search(&v).expect("present") as u32 + 1)
        .collect()
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..k).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..k).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..k).rev().find(|&j| current[j] > current[i - 1]).expect("pivot");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// The unique weak order `R` with `row ∈ W(Y,R)`.
pub fn order_of(labels: Arc<LabelSet>, row: &[Rational]) -> Result<OrderOnLabels> {
    if row.len() != labels.len() {
        return Err(Error::Shape(format!("row of {} for {} labels", row.len(), labels.len())));
    }
    Ok(OrderOnLabels { levels: dense_ranks(row), labels })
}

/// Membership of `row` in `W(Y,R)`; for a strict `R` this is `W̄(Y,P)`.
pub fn in_w(row: &[Rational], order: &OrderOnLabels) -> bool {
    let k = order.levels.len();
    if row.len() != k {
        return false;
    }
    (0..k).all(|a| (0..k).all(|b| order.weakly_prefers(a, b) == (row[a] >= row[b])))
}

/// One canonical row per order.
pub fn profile_from_orders(orders: &[OrderOnLabels]) -> Result<ScoreProfile> {
    let first = orders
        .first()
        .ok_or_else(|| Error::Profile("need at least one order".into()))?;
    let labels = first.labels.clone();
    if orders.iter().any(|o| o.labels != labels) {
        return Err(Error::Shape("orders use different label sets".into()));
    }
    ScoreProfile::new(labels, orders.iter().map(OrderOnLabels::canonical_row).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse;

    fn y3() -> Arc<LabelSet> {
        LabelSet::alphabetic(3).unwrap().shared()
    }

    fn row(v: &[&str]) -> Vec<Rational> {
        v.iter().map(|s| parse(s).unwrap()).collect()
    }

    #[test]
    fn order_of_table1_tree_is_strict() {
        let labels = LabelSet::numbered(3).unwrap().shared();
        let o = order_of(labels.clone(), &row(&["0.40", "0.34", "0.26"])).unwrap();
        assert!(o.is_strict());
        assert_eq!(o, OrderOnLabels::strict(labels, &[0, 1, 2]).unwrap());
    }

    #[test]
    fn order_of_total_tie_and_mixed() {
        let o = order_of(y3(), &row(&["1", "1", "1"])).unwrap();
        assert_eq!(o.kind(), OrderKind::Weak);
        assert_eq!(o.num_levels(), 1);
        let o = order_of(y3(), &row(&["2", "5", "2"])).unwrap();
        assert_eq!(o.to_string(), "b > a ~ c");
    }

    #[test]
    fn membership_in_w() {
        let strict = OrderOnLabels::strict(y3(), &[0, 1, 2]).unwrap();
        assert!(in_w(&row(&["3", "2", "1"]), &strict));
        assert!(!in_w(&row(&["3", "3", "1"]), &strict));
        let weak = OrderOnLabels::from_levels(y3(), &[2, 2, 1]).unwrap();
        assert!(in_w(&row(&["3", "3", "1"]), &weak));
        assert!(!in_w(&row(&["3", "2", "1"]), &weak));
    }

    #[test]
    fn canonical_profiles() {
        let abc = OrderOnLabels::strict(y3(), &[0, 1, 2]).unwrap();
        let cba = OrderOnLabels::strict(y3(), &[2, 1, 0]).unwrap();
        let tie = OrderOnLabels::from_levels(y3(), &[5, 5, 0]).unwrap();
        let z = profile_from_orders(std::slice::from_ref(&abc)).unwrap();
        assert_eq!(z.row(0), &row(&["3", "2", "1"])[..]);
        let z = profile_from_orders(&[tie]).unwrap();
        assert_eq!(z.row(0), &row(&["2", "2", "1"])[..]);
        let z = profile_from_orders(&[abc, cba]).unwrap();
        assert_eq!(z.row(1), &row(&["1", "2", "3"])[..]);
    }

    #[test]
    fn enumerations_have_closed_form_sizes() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(OrderOnLabels::all_weak(&y3()).len(), 13);
        let y4 = LabelSet::alphabetic(4).unwrap().shared();
        assert_eq!(OrderOnLabels::all_weak(&y4).len(), 75);
        let strict = OrderOnLabels::all_strict(&y3());
        assert_eq!(strict[1].to_string(), "a > c > b");
    }

    #[test]
    fn mismatched_label_sets_rejected() {
        let a = OrderOnLabels::strict(y3(), &[0, 1, 2]).unwrap();
        let other = LabelSet::numbered(3).unwrap().shared();
        let b = OrderOnLabels::strict(other, &[0, 1, 2]).unwrap();
        assert!(profile_from_orders(&[a, b]).is_err());
    }
}
