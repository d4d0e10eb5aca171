//! The raw predicates behind every checker, shared with witness replay.

use crate::aggregator::Prepared;
use crate::error::{Error, Result};
use crate::labels::LabelSubset;
use crate::profile::ScoreProfile;

use super::witness::{Axiom, Witness};

/// Some model strictly prefers `y` to `y2` in `z` and strictly prefers `y2`
/// to `y` in `z2`.
pub fn some_model_reverses(z: &ScoreProfile, z2: &ScoreProfile, y: usize, y2: usize) -> bool {
    z.preference_mask(y, y2) & z2.preference_mask(y2, y) != 0
}

/// The model choice reversal violation pattern on one `(y, y')`.
pub fn mcr_violated(
    z: &ScoreProfile,
    z2: &ScoreProfile,
    chosen: LabelSubset,
    chosen2: LabelSubset,
    y: usize,
    y2: usize,
) -> bool {
    chosen.contains(y)
        && !chosen.contains(y2)
        && chosen2.contains(y2)
        && !some_model_reverses(z, z2, y, y2)
}

/// Every model's strict comparisons between members of `subset` agree.
pub fn same_strict_pattern(z: &ScoreProfile, z2: &ScoreProfile, subset: LabelSubset) -> bool {
    subset.iter().all(|a| {
        subset
            .iter()
            .all(|b| a == b || z.preference_mask(a, b) == z2.preference_mask(a, b))
    })
}

/// Choices on the three binary menus of a triple `(y, y', y'')`.
#[derive(Debug, Clone, Copy)]
pub struct TripleChoices {
    pub first: LabelSubset,
    pub second: LabelSubset,
    pub closing: LabelSubset,
}

impl TripleChoices {
    pub fn of(prep: &Prepared, y: usize, y1: usize, y2: usize) -> Self {
        Self {
            first: prep.choose(LabelSubset::pair(y, y1)),
            second: prep.choose(LabelSubset::pair(y1, y2)),
            closing: prep.choose(LabelSubset::pair(y, y2)),
        }
    }

    pub fn transitivity_fails(&self, y: usize, y1: usize) -> bool {
        self.first.contains(y) && self.second.contains(y1) && !self.closing.contains(y)
    }

    /// Part `p` of the strengthened transitivity implications.
    pub fn lemma3_fails(&self, part: u8, y: usize, y1: usize) -> bool {
        let only_y = self.first == LabelSubset::singleton(y);
        let only_y1 = self.second == LabelSubset::singleton(y1);
        let premise = match part {
            1 => self.first.contains(y) && only_y1,
            2 => only_y && self.second.contains(y1),
            3 => only_y && only_y1,
            _ => false,
        };
        premise && self.closing != LabelSubset::singleton(y)
    }
}

pub fn idc_fails(
    small: LabelSubset,
    large: LabelSubset,
    chosen_small: LabelSubset,
    chosen_large: LabelSubset,
) -> bool {
    let kept = small.intersect(chosen_large);
    small.is_subset_of(large) && !kept.is_empty() && chosen_small != kept
}

fn arity(w: &Witness, profiles: usize, subsets: usize, labels: usize, choices: usize) -> Result<()> {
    if w.profiles.len() < profiles
        || w.subsets.len() < subsets
        || w.labels.len() < labels
        || w.choices.len() < choices
    {
        return Err(Error::Invalid(format!("{} witness is missing fields", w.axiom)));
    }
    for p in &w.profiles[1..] {
        w.profiles[0].same_shape(p)?;
    }
    let k = w.profiles[0].num_labels();
    if w.labels.iter().any(|&l| l >= k) {
        return Err(Error::Invalid("witness label out of range".into()));
    }
    for &s in &w.subsets {
        w.profiles[0].label_set().check_subset(s)?;
    }
    Ok(())
}

pub fn reproduces(w: &Witness) -> Result<bool> {
    if w.profiles.is_empty() {
        return Err(Error::Invalid("witness has no profiles".into()));
    }
    let agg = &w.aggregator;
    match w.axiom {
        Axiom::Unanimity => {
            arity(w, 1, 0, 2, 1)?;
            let (y, y2) = (w.labels[0], w.labels[1]);
            let z = &w.profiles[0];
            let pair = LabelSubset::pair(y, y2);
            let c = agg.choose(pair, z)?;
            Ok(z.unanimous(y, y2) && c != LabelSubset::singleton(y) && c == w.choices[0])
        }
        Axiom::Mcr => {
            arity(w, 2, 1, 2, 2)?;
            let (z, z2, s) = (&w.profiles[0], &w.profiles[1], w.subsets[0]);
            let (c, c2) = (agg.choose(s, z)?, agg.choose(s, z2)?);
            let (y, y2) = (w.labels[0], w.labels[1]);
            Ok(s.contains(y)
                && s.contains(y2)
                && mcr_violated(z, z2, c, c2, y, y2)
                && [c, c2] == w.choices[..2])
        }
        Axiom::Transitivity | Axiom::Lemma3 => {
            arity(w, 1, 0, 3, 3)?;
            let (y, y1, y2) = (w.labels[0], w.labels[1], w.labels[2]);
            if y == y1 || y1 == y2 || y == y2 {
                return Ok(false);
            }
            let t = TripleChoices::of(&agg.prepare(&w.profiles[0])?, y, y1, y2);
            let fails = match (w.axiom, w.part) {
                (Axiom::Transitivity, _) => t.transitivity_fails(y, y1),
                (_, Some(p)) => t.lemma3_fails(p, y, y1),
                (_, None) => (1..=3).any(|p| t.lemma3_fails(p, y, y1)),
            };
            Ok(fails && [t.first, t.second, t.closing] == w.choices[..3])
        }
        Axiom::Idc => {
            arity(w, 1, 2, 0, 2)?;
            let z = &w.profiles[0];
            let (small, large) = (w.subsets[0], w.subsets[1]);
            let prep = agg.prepare(z)?;
            let (cs, cl) = (prep.choose(small), prep.choose(large));
            Ok(idc_fails(small, large, cs, cl) && [cs, cl] == w.choices[..2])
        }
        Axiom::Nondegeneracy => {
            arity(w, 1, 0, 0, 0)?;
            let j = w.model.ok_or_else(|| Error::Invalid("nondegeneracy witness needs a model".into()))?;
            let m = w.profiles[0].models();
            if j == 0 || j > m {
                return Err(Error::ModelIndex { index: j, models: m });
            }
            for z in &w.profiles {
                let prep = agg.prepare(z)?;
                let k = z.num_labels();
                for a in 0..k {
                    for b in 0..k {
                        if a != b
                            && z.prefers(j - 1, a, b)
                            && prep.choose(LabelSubset::pair(a, b)) != LabelSubset::singleton(a)
                        {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
        Axiom::Decisiveness => {
            arity(w, 1, 0, 2, 1)?;
            let j = w.model.ok_or_else(|| Error::Invalid("decisiveness witness needs a model".into()))?;
            let z = &w.profiles[0];
            if j == 0 || j > z.models() {
                return Err(Error::ModelIndex { index: j, models: z.models() });
            }
            let (y, y2) = (w.labels[0], w.labels[1]);
            let c = agg.choose(LabelSubset::pair(y, y2), z)?;
            Ok(z.prefers(j - 1, y, y2) && c != LabelSubset::singleton(y) && c == w.choices[0])
        }
        Axiom::Lemma2 => {
            arity(w, 2, 1, 0, 2)?;
            let (z, z2, s) = (&w.profiles[0], &w.profiles[1], w.subsets[0]);
            let (c, c2) = (agg.choose(s, z)?, agg.choose(s, z2)?);
            Ok(same_strict_pattern(z, z2, s) && c != c2 && [c, c2] == w.choices[..2])
        }
    }
}
