//! Witness search over a profile family.

use std::collections::HashMap;

use crate::aggregator::Aggregator;
use crate::axioms::{self, Axiom, Verdict, Witness};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::labels::LabelSubset;

use super::family::ProfileFamily;

/// Families beyond this size are not pair-scanned.
pub const MAX_SCAN_PROFILES: usize = 1 << 22;
/// Nondegeneracy witnesses carry the whole family.
pub const MAX_NONDEGENERACY_PROFILES: usize = 1 << 16;

const BLOCK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MenuScope {
    /// Only the full label set.
    #[default]
    Full,
    /// Every menu of two or more labels.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    /// Witnesses kept per axiom.
    pub budget: usize,
    pub exec: Execution,
    pub menus: MenuScope,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { budget: 1, exec: Execution::default(), menus: MenuScope::default() }
    }
}

/// Everything the model choice reversal predicate reads from one profile.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Signature {
    choices: Vec<u32>,
    /// `prefs[a * k + b]`: models strictly preferring `a` to `b`.
    prefs: Vec<u64>,
}

impl Signature {
    fn breaks_mcr_with(&self, other: &Signature, menus: &[LabelSubset], k: usize) -> bool {
        menus.iter().enumerate().any(|(mi, &menu)| {
            let c = LabelSubset(self.choices[mi]);
            let gained = menu.minus(c).intersect(LabelSubset(other.choices[mi]));
            !gained.is_empty()
                && c.iter().any(|y| {
                    gained
                        .iter()
                        .any(|y2| self.prefs[y * k + y2] & other.prefs[y2 * k + y] == 0)
                })
        })
    }
}

/// Distinct signatures in order of first appearance, with their members.
struct SignatureClasses {
    of: Vec<usize>,
    members: Vec<Vec<usize>>,
    sigs: Vec<Signature>,
}

fn signatures(
    agg: &Aggregator,
    family: &ProfileFamily,
    menus: &[LabelSubset],
    exec: Execution,
) -> Result<SignatureClasses> {
    let k = family.spec().labels.len();
    let sigs = exec::map_range(exec, family.len(), |i| -> Result<Signature> {
        let z = family.profile_at(i);
        let prep = agg.prepare(&z)?;
        let choices = menus.iter().map(|&s| prep.choose(s).0).collect();
        let prefs = (0..k * k).map(|ab| z.preference_mask(ab / k, ab % k)).collect();
        Ok(Signature { choices, prefs })
    });
    let mut index: HashMap<Signature, usize> = HashMap::new();
    let mut classes = SignatureClasses { of: Vec::with_capacity(sigs.len()), members: Vec::new(), sigs: Vec::new() };
    for (i, sig) in sigs.into_iter().enumerate() {
        let sig = sig?;
        let next = classes.sigs.len();
        let c = *index.entry(sig.clone()).or_insert(next);
        if c == next {
            classes.sigs.push(sig);
            classes.members.push(Vec::new());
        }
        classes.members[c].push(i);
        classes.of.push(c);
    }
    Ok(classes)
}

fn mcr_witnesses(agg: &Aggregator, family: &ProfileFamily, opts: &ScanOptions) -> Result<Vec<Witness>> {
    if family.len() > MAX_SCAN_PROFILES {
        return Err(Error::FamilyTooLarge { required: family.len() as u128, limit: MAX_SCAN_PROFILES as u128 });
    }
    let labels = &family.spec().labels;
    let k = labels.len();
    let menus = match opts.menus {
        MenuScope::Full => vec![labels.all()],
        MenuScope::All => labels.subsets(2),
    };
    let classes = signatures(agg, family, &menus, opts.exec)?;
    let n_classes = classes.sigs.len();
    // partners[c]: classes c' such that (c, c') breaks MCR
    let partners: Vec<Vec<usize>> = exec::map_range(opts.exec, n_classes, |c| {
        (0..n_classes)
            .filter(|&c2| classes.sigs[c].breaks_mcr_with(&classes.sigs[c2], &menus, k))
            .collect()
    });
    let witness_for = |i: usize, i2: usize| -> Result<Witness> {
        let (z, z2) = (family.profile_at(i), family.profile_at(i2));
        let v = menus
            .iter()
            .map(|&s| axioms::check_mcr_pair(agg, &z, &z2, s))
            .find(|v| !matches!(v, Ok(Verdict::Holds)))
            .unwrap_or(Ok(Verdict::Holds))?;
        v.into_witness()
            .ok_or_else(|| Error::Invalid(format!("signature scan flagged profiles {i},{i2} but no witness replays")))
    };
    let mut found = Vec::new();
    for i in 0..family.len() {
        if found.len() >= opts.budget {
            break;
        }
        let p = &partners[classes.of[i]];
        if p.is_empty() {
            continue;
        }
        let mut second: Vec<usize> = p.iter().flat_map(|&c| classes.members[c].iter().copied()).collect();
        second.sort_unstable();
        for i2 in second.into_iter().take(opts.budget - found.len()) {
            found.push(witness_for(i, i2)?);
        }
    }
    Ok(found)
}

fn single_profile_witnesses(
    agg: &Aggregator,
    family: &ProfileFamily,
    axiom: Axiom,
    opts: &ScanOptions,
) -> Result<Vec<Witness>> {
    let check = |i: usize| -> Result<Option<Witness>> {
        let z = family.profile_at(i);
        let v = match axiom {
            Axiom::Unanimity => axioms::check_unanimity(agg, &z)?,
            Axiom::Idc => axioms::check_idc(agg, &z)?,
            _ => axioms::check_transitivity(agg, &z)?,
        };
        Ok(v.into_witness())
    };
    let hits = exec::collect_until(opts.exec, family.len(), opts.budget, BLOCK, |i| match check(i) {
        Ok(None) => vec![],
        other => vec![other],
    });
    let mut out = Vec::new();
    for h in hits.into_iter().take(opts.budget) {
        out.extend(h?);
    }
    Ok(out)
}

/// Scans `family` for violations of each requested axiom.
///
/// Unanimity, transitivity (with its strengthened forms, requested as either
/// `transitivity` or `lemma3`) and IDC are checked profile by profile; model
/// choice reversal over ordered profile pairs; nondegeneracy over the whole
/// family. Up to `opts.budget` witnesses are kept per axiom, in axiom order,
/// then by profile index. The result is independent of `opts.exec`.
pub fn find_witnesses(
    agg: &Aggregator,
    family: &ProfileFamily,
    requested: &[Axiom],
    opts: &ScanOptions,
) -> Result<Vec<Witness>> {
    let mut axioms: Vec<Axiom> = requested
        .iter()
        .map(|&a| if a == Axiom::Lemma3 { Axiom::Transitivity } else { a })
        .collect();
    axioms.sort();
    axioms.dedup();
    let mut out = Vec::new();
    if opts.budget == 0 {
        return Ok(out);
    }
    for axiom in axioms {
        match axiom {
            Axiom::Unanimity | Axiom::Idc => {
                out.extend(single_profile_witnesses(agg, family, axiom, opts)?);
            }
            // needs three labels
            Axiom::Transitivity if family.spec().labels.len() < 3 => {}
            Axiom::Transitivity => out.extend(single_profile_witnesses(agg, family, axiom, opts)?),
            Axiom::Mcr => out.extend(mcr_witnesses(agg, family, opts)?),
            Axiom::Nondegeneracy => {
                let profiles = family.materialize(MAX_NONDEGENERACY_PROFILES)?;
                out.extend(axioms::check_nondegenerate(agg, &profiles)?.into_witness());
            }
            Axiom::Decisiveness | Axiom::Lemma2 | Axiom::Lemma3 => {
                return Err(Error::Invalid(format!("{axiom} is not a family scan")));
            }
        }
    }
    Ok(out)
}
