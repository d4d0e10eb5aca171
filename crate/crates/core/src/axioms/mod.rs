//! Decidable checks for the aggregator axioms and the lemmas relating them.
//!
//! Every check runs over explicit profiles (or an explicit family) and
//! returns a [`Verdict`]: the property holds on what was checked, a
//! self-verifying [`Witness`] of a violation, or "not applicable" when a
//! conditional statement's hypothesis is unmet.

pub mod predicates;
mod witness;

pub use witness::{Axiom, Witness};

use crate::aggregator::{Aggregator, Prepared};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::labels::LabelSubset;
use crate::order::{in_w, order_of};
use crate::profile::ScoreProfile;

use predicates::{idc_fails, mcr_violated, same_strict_pattern, TripleChoices};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated(Box<Witness>),
    NotApplicable(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Violated(w) => Some(w),
            _ => None,
        }
    }

    pub fn into_witness(self) -> Option<Witness> {
        match self {
            Verdict::Violated(w) => Some(*w),
            _ => None,
        }
    }

    fn from_option(w: Option<Witness>) -> Self {
        match w {
            Some(w) => Verdict::Violated(Box::new(w)),
            None => Verdict::Holds,
        }
    }
}

/// Ensemble unanimity on one profile.
pub fn check_unanimity(agg: &Aggregator, z: &ScoreProfile) -> Result<Verdict> {
    let prep = agg.prepare(z)?;
    Ok(Verdict::from_option(unanimity_witness(agg, &prep, z)))
}

pub(crate) fn unanimity_witness(agg: &Aggregator, prep: &Prepared, z: &ScoreProfile) -> Option<Witness> {
    let k = z.num_labels();
    for y in 0..k {
        for y2 in 0..k {
            if y == y2 || !z.unanimous(y, y2) {
                continue;
            }
            let pair = LabelSubset::pair(y, y2);
            let c = prep.choose(pair);
            if c != LabelSubset::singleton(y) {
                let mut w = Witness::new(Axiom::Unanimity, agg);
                w.profiles = vec![z.clone()];
                w.subsets = vec![pair];
                w.labels = vec![y, y2];
                w.choices = vec![c];
                return Some(w.describe());
            }
        }
    }
    None
}

/// Model choice reversal between `z` and `z2` on the menu `subset`.
pub fn check_mcr_pair(
    agg: &Aggregator,
    z: &ScoreProfile,
    z2: &ScoreProfile,
    subset: LabelSubset,
) -> Result<Verdict> {
    z.same_shape(z2)?;
    z.label_set().check_subset(subset)?;
    let (p, p2) = (agg.prepare(z)?, agg.prepare(z2)?);
    Ok(Verdict::from_option(mcr_witness_on(agg, z, z2, &p, &p2, subset)))
}

/// Model choice reversal between `z` and `z2` on every menu of two or more labels.
pub fn check_mcr_all_menus(agg: &Aggregator, z: &ScoreProfile, z2: &ScoreProfile) -> Result<Verdict> {
    z.same_shape(z2)?;
    let (p, p2) = (agg.prepare(z)?, agg.prepare(z2)?);
    Ok(Verdict::from_option(
        z.label_set()
            .subsets(2)
            .into_iter()
            .find_map(|s| mcr_witness_on(agg, z, z2, &p, &p2, s)),
    ))
}

pub(crate) fn mcr_witness_on(
    agg: &Aggregator,
    z: &ScoreProfile,
    z2: &ScoreProfile,
    p: &Prepared,
    p2: &Prepared,
    subset: LabelSubset,
) -> Option<Witness> {
    let (c, c2) = (p.choose(subset), p2.choose(subset));
    for y in c.iter() {
        for y2 in subset.minus(c).iter() {
            if mcr_violated(z, z2, c, c2, y, y2) {
                let mut w = Witness::new(Axiom::Mcr, agg);
                w.profiles = vec![z.clone(), z2.clone()];
                w.subsets = vec![subset];
                w.labels = vec![y, y2];
                w.choices = vec![c, c2];
                return Some(w.describe());
            }
        }
    }
    None
}

/// Transitivity of binary choices, then the three strengthened forms.
pub fn check_transitivity(agg: &Aggregator, z: &ScoreProfile) -> Result<Verdict> {
    let k = z.num_labels();
    if k < 3 {
        return Err(Error::Invalid(format!("transitivity needs at least 3 labels, got {k}")));
    }
    let prep = agg.prepare(z)?;
    Ok(Verdict::from_option(transitivity_witness(agg, &prep, z)))
}

fn triples(k: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..k).flat_map(move |a| {
        (0..k).flat_map(move |b| (0..k).map(move |c| (a, b, c)))
    })
    .filter(|&(a, b, c)| a != b && b != c && a != c)
}

fn triple_witness(
    agg: &Aggregator,
    z: &ScoreProfile,
    axiom: Axiom,
    part: Option<u8>,
    (y, y1, y2): (usize, usize, usize),
    t: TripleChoices,
) -> Witness {
    let mut w = Witness::new(axiom, agg);
    w.profiles = vec![z.clone()];
    w.subsets = vec![LabelSubset::pair(y, y1), LabelSubset::pair(y1, y2), LabelSubset::pair(y, y2)];
    w.labels = vec![y, y1, y2];
    w.choices = vec![t.first, t.second, t.closing];
    w.part = part;
    w.describe()
}

pub(crate) fn transitivity_witness(agg: &Aggregator, prep: &Prepared, z: &ScoreProfile) -> Option<Witness> {
    let k = z.num_labels();
    for triple @ (y, y1, y2) in triples(k) {
        let t = TripleChoices::of(prep, y, y1, y2);
        if t.transitivity_fails(y, y1) {
            return Some(triple_witness(agg, z, Axiom::Transitivity, None, triple, t));
        }
    }
    for part in 1..=3u8 {
        for triple @ (y, y1, y2) in triples(k) {
            let t = TripleChoices::of(prep, y, y1, y2);
            if t.lemma3_fails(part, y, y1) {
                return Some(triple_witness(agg, z, Axiom::Lemma3, Some(part), triple, t));
            }
        }
    }
    None
}

/// One strengthened transitivity implication (`part` 1..=3) on one triple.
/// Not applicable when the premise does not hold.
pub fn check_lemma3(
    agg: &Aggregator,
    z: &ScoreProfile,
    part: u8,
    (y, y1, y2): (usize, usize, usize),
) -> Result<Verdict> {
    let k = z.num_labels();
    if !(1..=3).contains(&part) {
        return Err(Error::Invalid(format!("part must be 1, 2 or 3, got {part}")));
    }
    if y.max(y1).max(y2) >= k || y == y1 || y1 == y2 || y == y2 {
        return Err(Error::Invalid("need three distinct labels".into()));
    }
    let t = TripleChoices::of(&agg.prepare(z)?, y, y1, y2);
    let (only_y, only_y1) = (t.first == LabelSubset::singleton(y), t.second == LabelSubset::singleton(y1));
    let premise = match part {
        1 => t.first.contains(y) && only_y1,
        2 => only_y && t.second.contains(y1),
        _ => only_y && only_y1,
    };
    if !premise {
        return Ok(Verdict::NotApplicable(format!("premise of part {part} does not hold")));
    }
    Ok(Verdict::from_option(
        t.lemma3_fails(part, y, y1)
            .then(|| triple_witness(agg, z, Axiom::Lemma3, Some(part), (y, y1, y2), t)),
    ))
}

/// Insertion/deletion consistency over every pair of menus `Y1* ⊆ Y2*`.
pub fn check_idc(agg: &Aggregator, z: &ScoreProfile) -> Result<Verdict> {
    let prep = agg.prepare(z)?;
    Ok(Verdict::from_option(idc_witness(agg, &prep, z)))
}

pub(crate) fn idc_witness(agg: &Aggregator, prep: &Prepared, z: &ScoreProfile) -> Option<Witness> {
    let menus = z.label_set().subsets(1);
    let choices: Vec<LabelSubset> = menus.iter().map(|&s| prep.choose(s)).collect();
    // menus are all nonempty subsets in bitmask order, so menu s sits at s-1
    let chosen = |s: LabelSubset| choices[s.0 as usize - 1];
    for &large in &menus {
        for small in large.nonempty_subsets() {
            if idc_fails(small, large, chosen(small), chosen(large)) {
                let mut w = Witness::new(Axiom::Idc, agg);
                w.profiles = vec![z.clone()];
                w.subsets = vec![small, large];
                w.choices = vec![chosen(small), chosen(large)];
                return Some(w.describe());
            }
        }
    }
    None
}

/// Whether model `j` (1-based) dictates every binary choice on `family`.
/// Nondegeneracy holds on the family iff no model does.
pub fn check_nondegenerate(agg: &Aggregator, family: &[ScoreProfile]) -> Result<Verdict> {
    let first = family
        .first()
        .ok_or_else(|| Error::Invalid("nondegeneracy needs a nonempty family".into()))?;
    for z in family {
        first.same_shape(z)?;
    }
    let m = first.models();
    let prepared = family.iter().map(|z| agg.prepare(z)).collect::<Result<Vec<_>>>()?;
    for j in 1..=m {
        let overruled = family.iter().zip(&prepared).any(|(z, p)| model_overruled(z, p, j));
        if !overruled {
            let mut w = Witness::new(Axiom::Nondegeneracy, agg);
            w.profiles = family.to_vec();
            w.model = Some(j);
            return Ok(Verdict::Violated(Box::new(w.describe())));
        }
    }
    Ok(Verdict::Holds)
}

/// Some strict preference of model `j` is not the ensemble's binary choice.
pub(crate) fn model_overruled(z: &ScoreProfile, prep: &Prepared, j: usize) -> bool {
    let k = z.num_labels();
    (0..k).any(|a| {
        (0..k).any(|b| {
            a != b
                && z.prefers(j - 1, a, b)
                && prep.choose(LabelSubset::pair(a, b)) != LabelSubset::singleton(a)
        })
    })
}

/// First profile in `family` on which model `j` prefers `y` to `y2` but the
/// ensemble does not choose `{y}` from `{y, y2}`.
pub fn decisiveness_counterexample(
    agg: &Aggregator,
    j: usize,
    y: usize,
    y2: usize,
    family: &[ScoreProfile],
) -> Result<Option<Witness>> {
    if y == y2 {
        return Err(Error::Invalid("decisiveness needs two distinct labels".into()));
    }
    let pair = LabelSubset::pair(y, y2);
    for z in family {
        if j == 0 || j > z.models() {
            return Err(Error::ModelIndex { index: j, models: z.models() });
        }
        if !z.prefers(j - 1, y, y2) {
            continue;
        }
        let c = agg.choose(pair, z)?;
        if c != LabelSubset::singleton(y) {
            let mut w = Witness::new(Axiom::Decisiveness, agg);
            w.profiles = vec![z.clone()];
            w.subsets = vec![pair];
            w.labels = vec![y, y2];
            w.choices = vec![c];
            w.model = Some(j);
            return Ok(Some(w.describe()));
        }
    }
    Ok(None)
}

/// Model `j` is decisive for `y` over `y2` on every profile of `family`.
pub fn is_decisive(agg: &Aggregator, j: usize, y: usize, y2: usize, family: &[ScoreProfile]) -> Result<bool> {
    Ok(decisiveness_counterexample(agg, j, y, y2, family)?.is_none())
}

/// Identical strict comparisons within `subset` force identical choices.
/// Not applicable when the comparisons differ.
pub fn check_lemma2(
    agg: &Aggregator,
    z: &ScoreProfile,
    z2: &ScoreProfile,
    subset: LabelSubset,
) -> Result<Verdict> {
    z.same_shape(z2)?;
    z.label_set().check_subset(subset)?;
    if !same_strict_pattern(z, z2, subset) {
        return Ok(Verdict::NotApplicable(
            "models do not keep the same strict comparisons on the menu".into(),
        ));
    }
    let (c, c2) = (agg.choose(subset, z)?, agg.choose(subset, z2)?);
    if c == c2 {
        return Ok(Verdict::Holds);
    }
    let mut w = Witness::new(Axiom::Lemma2, agg);
    w.profiles = vec![z.clone(), z2.clone()];
    w.subsets = vec![subset];
    w.choices = vec![c, c2];
    Ok(Verdict::Violated(Box::new(w.describe())))
}

/// A model choice reversal witness behind a failed [`check_lemma2`]: with
/// identical strict comparisons on `subset` but different choices, one of
/// the two directions must break MCR.
pub fn mcr_behind_lemma2(
    agg: &Aggregator,
    z: &ScoreProfile,
    z2: &ScoreProfile,
    subset: LabelSubset,
) -> Result<Option<Witness>> {
    z.same_shape(z2)?;
    let (p, p2) = (agg.prepare(z)?, agg.prepare(z2)?);
    Ok(mcr_witness_on(agg, z, z2, &p, &p2, subset).or_else(|| mcr_witness_on(agg, z2, z, &p2, &p, subset)))
}

/// The strict order shared by every row of `z`, if there is one.
pub fn common_strict_order(z: &ScoreProfile) -> Option<crate::order::OrderOnLabels> {
    let order = order_of(z.label_set().clone(), z.row(0)).ok()?;
    (order.is_strict() && z.rows().all(|r| in_w(r, &order))).then_some(order)
}

/// Under the restriction that each profile's rows share one strict order,
/// unanimity implies model choice reversal. Scans all ordered pairs and all
/// menus of two or more labels. Not applicable when the aggregator already
/// fails unanimity on the family.
pub fn check_unanimity_implies_mcr_restricted(
    agg: &Aggregator,
    family: &[ScoreProfile],
    exec: Execution,
) -> Result<Verdict> {
    let first = family
        .first()
        .ok_or_else(|| Error::Invalid("empty family".into()))?;
    for (i, z) in family.iter().enumerate() {
        first.same_shape(z)?;
        if common_strict_order(z).is_none() {
            return Err(Error::Invalid(format!(
                "profile {i} does not have a common strict order across its rows"
            )));
        }
    }
    let prepared = family.iter().map(|z| agg.prepare(z)).collect::<Result<Vec<_>>>()?;
    if let Some(w) = family
        .iter()
        .zip(&prepared)
        .find_map(|(z, p)| unanimity_witness(agg, p, z))
    {
        return Ok(Verdict::NotApplicable(format!(
            "aggregator fails unanimity on the family: {}",
            w.narrative
        )));
    }
    let menus = first.label_set().subsets(2);
    let n = family.len();
    let found = exec::find_map_first(exec, n, |i| {
        (0..n).filter(|&i2| i2 != i).find_map(|i2| {
            menus.iter().find_map(|&s| {
                mcr_witness_on(agg, &family[i], &family[i2], &prepared[i], &prepared[i2], s)
            })
        })
    });
    Ok(Verdict::from_option(found))
}

/// Replays a witness: it must reproduce and the checker its axiom names
/// must report a violation on the recorded profiles.
pub fn replay(w: &Witness) -> Result<bool> {
    if !w.reproduces()? {
        return Ok(false);
    }
    let agg = &w.aggregator;
    let z = &w.profiles[0];
    let violated = |v: Verdict| matches!(v, Verdict::Violated(_));
    Ok(match w.axiom {
        Axiom::Unanimity => violated(check_unanimity(agg, z)?),
        Axiom::Mcr => violated(check_mcr_pair(agg, z, &w.profiles[1], w.subsets[0])?),
        Axiom::Transitivity => violated(check_transitivity(agg, z)?),
        Axiom::Idc => violated(check_idc(agg, z)?),
        Axiom::Lemma3 => {
            let t = (w.labels[0], w.labels[1], w.labels[2]);
            match w.part {
                Some(p) => violated(check_lemma3(agg, z, p, t)?),
                None => (1..=3).map(|p| check_lemma3(agg, z, p, t)).collect::<Result<Vec<_>>>()?.into_iter().any(violated),
            }
        }
        Axiom::Nondegeneracy => violated(check_nondegenerate(agg, &w.profiles)?),
        Axiom::Decisiveness => {
            let j = w.model.unwrap_or(0);
            !is_decisive(agg, j, w.labels[0], w.labels[1], &w.profiles)?
        }
        Axiom::Lemma2 => violated(check_lemma2(agg, z, &w.profiles[1], w.subsets[0])?),
    })
}
