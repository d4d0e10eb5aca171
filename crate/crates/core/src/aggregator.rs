//! Ensemble choice aggregators `C(Y*, z)`.
//!
//! Every aggregator here is set-valued: ties are returned, never broken.
//! Score-maximizing rules compute one aggregate vector over the whole label
//! set and take its argmax restricted to `Y*`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::labels::LabelSubset;
use crate::profile::ScoreProfile;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Aggregator {
    /// Argmax of the mean score across models.
    SoftVoting,
    /// Argmax of the number of models whose top set contains the label.
    HardVoting,
    /// Argmax of `Σ_j w_j z_j`.
    WeightedVoting(Vec<Rational>),
    /// Argmax of one model's row (1-based model index).
    Dictator(usize),
    Borda,
    /// Pairwise majority: unbeaten members of `Y*`, or all of `Y*` on a cycle.
    PairwiseMajority,
}

impl Aggregator {
    /// Weighted voting with every weight `1/m`: soft voting written as a
    /// stacked combiner. Used as the action-value (Q) voting variant.
    pub fn uniform_weights(models: usize) -> Self {
        Aggregator::WeightedVoting(vec![rational::ratio(1, models as i64); models])
    }

    /// True for rules that choose the argmax of one aggregate score vector.
    pub fn is_score_maximizing(&self) -> bool {
        !matches!(self, Aggregator::PairwiseMajority)
    }

    pub fn prepare(&self, z: &ScoreProfile) -> Result<Prepared> {
        Ok(match self {
            Aggregator::SoftVoting => Prepared::Scores(soft_vote_scores(z, None)?),
            Aggregator::WeightedVoting(w) => Prepared::Scores(soft_vote_scores(z, Some(w))?),
            Aggregator::HardVoting => Prepared::Scores(
                hard_vote_tallies(z).into_iter().map(|t| rational::int(t as i64)).collect(),
            ),
            Aggregator::Borda => Prepared::Scores(borda_scores(z)),
            Aggregator::Dictator(j) => {
                check_model(*j, z.models())?;
                Prepared::Scores(z.row(j - 1).to_vec())
            }
            Aggregator::PairwiseMajority => Prepared::Majority(MajorityTable::new(z)),
        })
    }

    /// `C(Y*, z)`.
    pub fn choose(&self, subset: LabelSubset, z: &ScoreProfile) -> Result<LabelSubset> {
        z.label_set().check_subset(subset)?;
        Ok(self.prepare(z)?.choose(subset))
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

fn check_model(j: usize, models: usize) -> Result<()> {
    if j == 0 || j > models {
        return Err(Error::ModelIndex { index: j, models });
    }
    Ok(())
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregator::SoftVoting => write!(f, "soft_voting"),
            Aggregator::HardVoting => write!(f, "hard_voting"),
            Aggregator::WeightedVoting(w) => {
                let w: Vec<String> = w.iter().map(rational::format).collect();
                write!(f, "weighted_voting:{}", w.join(","))
            }
            Aggregator::Dictator(j) => write!(f, "dictator:{j}"),
            Aggregator::Borda => write!(f, "borda"),
            Aggregator::PairwiseMajority => write!(f, "pairwise_majority"),
        }
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    /// `soft_voting`, `hard_voting`, `weighted_voting:3,1,1`, `dictator:2`,
    /// `borda`, `pairwise_majority`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let no_params = |agg: Aggregator| match params {
            None => Ok(agg),
            Some(_) => Err(Error::Parse(format!("{name} takes no parameters"))),
        };
        match name {
            "soft_voting" | "soft" => no_params(Aggregator::SoftVoting),
            "hard_voting" | "hard" => no_params(Aggregator::HardVoting),
            "borda" => no_params(Aggregator::Borda),
            "pairwise_majority" | "majority" => no_params(Aggregator::PairwiseMajority),
            "dictator" => {
                let j: usize = params
                    .ok_or_else(|| Error::Parse("dictator needs a model index, e.g. dictator:1".into()))?
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad dictator index in {s:?}")))?;
                if j == 0 {
                    return Err(Error::Parse("model indices start at 1".into()));
                }
                Ok(Aggregator::Dictator(j))
            }
            "weighted_voting" | "weighted" => {
                let p = params.ok_or_else(|| {
                    Error::Parse("weighted_voting needs weights, e.g. weighted_voting:3,1,1".into())
                })?;
                let w = p.split(',').map(rational::parse).collect::<Result<Vec<_>>>()?;
                if w.is_empty() {
                    return Err(Error::Parse("empty weight vector".into()));
                }
                Ok(Aggregator::WeightedVoting(w))
            }
            other => Err(Error::Parse(format!("unknown aggregator {other:?}"))),
        }
    }
}

/// An aggregator evaluated on one profile, ready to answer `C(Y*, ·)` for
/// any `Y*`.
#[derive(Debug, Clone)]
pub enum Prepared {
    Scores(Vec<Rational>),
    Majority(MajorityTable),
}

impl Prepared {
    /// `subset` must be nonempty; checked by [`Aggregator::choose`].
    pub fn choose(&self, subset: LabelSubset) -> LabelSubset {
        match self {
            Prepared::Scores(s) => argmax_over(s, subset),
            Prepared::Majority(t) => t.choose(subset),
        }
    }
}

/// The full argmax set of `scores` over the labels in `subset`.
pub fn argmax_over<T: Ord>(scores: &[T], subset: LabelSubset) -> LabelSubset {
    let mut best: Option<&T> = None;
    let mut chosen = LabelSubset::EMPTY;
    for i in subset.iter() {
        match best {
            Some(b) if scores[i] < *b => {}
            Some(b) if scores[i] == *b => chosen = chosen.with(i),
            _ => {
                best = Some(&scores[i]);
                chosen = LabelSubset::singleton(i);
            }
        }
    }
    chosen
}

/// `Σ_j w_j z_{j,d(y)}` per label; `None` means `w_j = 1/m`.
pub fn soft_vote_scores(z: &ScoreProfile, weights: Option<&[Rational]>) -> Result<Vec<Rational>> {
    let m = z.models();
    let mut totals = vec![Rational::zero(); z.num_labels()];
    match weights {
        Some(w) => {
            if w.len() != m {
                return Err(Error::WeightLength { expected: m, got: w.len() });
            }
            for (row, wj) in z.rows().zip(w) {
                for (t, s) in totals.iter_mut().zip(row) {
                    *t += wj * s;
                }
            }
        }
        None => {
            for row in z.rows() {
                for (t, s) in totals.iter_mut().zip(row) {
                    *t += s;
                }
            }
            let inv = Rational::one() / rational::int(m as i64);
            for t in &mut totals {
                *t *= &inv;
            }
        }
    }
    Ok(totals)
}

/// Each model casts one vote for every label in its (possibly tied) argmax.
pub fn hard_vote_tallies(z: &ScoreProfile) -> Vec<u32> {
    let mut tallies = vec![0u32; z.num_labels()];
    let all = z.label_set().all();
    for row in z.rows() {
        for i in argmax_over(row, all).iter() {
            tallies[i] += 1;
        }
    }
    tallies
}

/// Per row: one point per label strictly beaten, half a point per tie.
pub fn borda_scores(z: &ScoreProfile) -> Vec<Rational> {
    let k = z.num_labels();
    let mut doubled = vec![0i64; k];
    for row in z.rows() {
        for a in 0..k {
            for b in 0..k {
                if a != b {
                    doubled[a] += match row[a].cmp(&row[b]) {
                        std::cmp::Ordering::Greater => 2,
                        std::cmp::Ordering::Equal => 1,
                        std::cmp::Ordering::Less => 0,
                    };
                }
            }
        }
    }
    doubled.into_iter().map(|d| rational::ratio(d, 2)).collect()
}

/// Argmax of model `j`'s row (1-based) over `subset`.
pub fn dictator_choice(j: usize, subset: LabelSubset, z: &ScoreProfile) -> Result<LabelSubset> {
    Aggregator::Dictator(j).choose(subset, z)
}

pub fn pairwise_majority_choice(subset: LabelSubset, z: &ScoreProfile) -> Result<LabelSubset> {
    Aggregator::PairwiseMajority.choose(subset, z)
}

/// Strict pairwise majority relation of a profile.
#[derive(Debug, Clone)]
pub struct MajorityTable {
    /// `beaten_by[y]`: labels that a strict majority of rows score above `y`.
    beaten_by: Vec<LabelSubset>,
}

impl MajorityTable {
    pub fn new(z: &ScoreProfile) -> Self {
        let k = z.num_labels();
        let mut beaten_by = vec![LabelSubset::EMPTY; k];
        for a in 0..k {
            for (b, beaten) in beaten_by.iter_mut().enumerate() {
                if a == b {
                    continue;
                }
                let for_a = (0..z.models()).filter(|&j| z.prefers(j, a, b)).count();
                let for_b = (0..z.models()).filter(|&j| z.prefers(j, b, a)).count();
                if for_a > for_b {
                    *beaten = beaten.with(a);
                }
            }
        }
        Self { beaten_by }
    }

    pub fn beats(&self, a: usize, b: usize) -> bool {
        self.beaten_by[b].contains(a)
    }

    pub fn choose(&self, subset: LabelSubset) -> LabelSubset {
        let unbeaten = LabelSubset::from_indices(
            subset.iter().filter(|&y| self.beaten_by[y].intersect(subset).is_empty()),
        );
        if unbeaten.is_empty() {
            subset
        } else {
            unbeaten
        }
    }
}
