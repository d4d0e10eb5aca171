//! The response set `Y` and subsets of it.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest label set supported; subsets are stored as `u32` bitmasks.
pub const MAX_LABELS: usize = 16;

/// An ordered set of distinct labels. The position of a label is its index
/// `d(y)` into every score row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::LabelSet(format!(
                "need at least 2 labels, got {}",
                labels.len()
            )));
        }
        if labels.len() > MAX_LABELS {
            return Err(Error::LabelSet(format!(
                "at most {MAX_LABELS} labels supported, got {}",
                labels.len()
            )));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::LabelSet(format!("duplicate label {a:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// Labels `a, b, c, ...`.
    pub fn alphabetic(k: usize) -> Result<Self> {
        if k > 26 {
            return Err(Error::LabelSet(format!("no alphabetic labels for k={k}")));
        }
        Self::new((0..k).map(|i| ((b'a' + i as u8) as char).to_string()))
    }

    /// Labels `1, 2, 3, ...`.
    pub fn numbered(k: usize) -> Result<Self> {
        Self::new((1..=k).map(|i| i.to_string()))
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn name(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn all(&self) -> LabelSubset {
        LabelSubset::full(self.len())
    }

    pub fn subset<'a, I>(&self, names: I) -> Result<LabelSubset>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut s = LabelSubset::EMPTY;
        for n in names {
            s = s.with(self.index(n)?);
        }
        Ok(s)
    }

    pub fn names(&self, subset: LabelSubset) -> Vec<String> {
        subset.iter().map(|i| self.labels[i].clone()).collect()
    }

    /// Every subset of at least `min_size` labels, in increasing bitmask order.
    pub fn subsets(&self, min_size: usize) -> Vec<LabelSubset> {
        (1u32..(1u32 << self.len()))
            .map(LabelSubset)
            .filter(|s| s.len() >= min_size)
            .collect()
    }

    /// Checks that `subset` is nonempty and only names labels of this set.
    pub fn check_subset(&self, subset: LabelSubset) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        if !subset.is_subset_of(self.all()) {
            let stray = subset.iter().find(|&i| i >= self.len()).unwrap_or(0);
            return Err(Error::UnknownLabel(format!("#{stray}")));
        }
        Ok(())
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(","))
    }
}

/// A subset `Y*` of a label set, as a bitmask over label indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LabelSubset(pub u32);

impl LabelSubset {
    pub const EMPTY: LabelSubset = LabelSubset(0);

    pub fn full(k: usize) -> Self {
        LabelSubset(((1u64 << k) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        LabelSubset(1 << i)
    }

    pub fn pair(a: usize, b: usize) -> Self {
        LabelSubset((1 << a) | (1 << b))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        it.into_iter().fold(Self::EMPTY, |s, i| s.with(i))
    }

    pub fn with(self, i: usize) -> Self {
        LabelSubset(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Self {
        LabelSubset(self.0 & !(1 << i))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: LabelSubset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(self, other: LabelSubset) -> Self {
        LabelSubset(self.0 & other.0)
    }

    pub fn union(self, other: LabelSubset) -> Self {
        LabelSubset(self.0 | other.0)
    }

    pub fn minus(self, other: LabelSubset) -> Self {
        LabelSubset(self.0 & !other.0)
    }

    /// The single member, if this is a singleton.
    pub fn only(self) -> Option<usize> {
        (self.len() == 1).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |i| bits & (1 << i) != 0)
    }

    /// Nonempty subsets of `self`, in increasing bitmask order.
    pub fn nonempty_subsets(self) -> impl Iterator<Item = LabelSubset> {
        let full = self.0;
        // Enumerate submasks in increasing order.
        let mut out = Vec::new();
        let mut sub = full;
        while sub != 0 {
            out.push(LabelSubset(sub));
            sub = (sub - 1) & full;
        }
        out.reverse();
        out.into_iter()
    }
}

impl fmt::Debug for LabelSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_set_rejects_duplicates_and_tiny_sets() {
        assert!(LabelSet::new(["a"]).is_err());
        assert!(LabelSet::new(["a", "b", "a"]).is_err());
        assert!(LabelSet::new(["a", "b"]).is_ok());
    }

    #[test]
    fn index_and_unknown_labels() {
        let y = LabelSet::numbered(3).unwrap();
        assert_eq!(y.index("2").unwrap(), 1);
        assert!(matches!(y.index("9"), Err(Error::UnknownLabel(_))));
        assert!(y.check_subset(LabelSubset::EMPTY).is_err());
        assert!(y.check_subset(LabelSubset::singleton(5)).is_err());
    }

    #[test]
    fn subset_algebra() {
        let s = LabelSubset::from_indices([0, 2]);
        assert_eq!(s.len(), 2);
        assert!(s.contains(2) && !s.contains(1));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(LabelSubset::singleton(3).only(), Some(3));
        assert_eq!(s.only(), None);
        let subs: Vec<_> = LabelSubset::full(3).nonempty_subsets().collect();
        assert_eq!(subs.len(), 7);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
    }
}
