//! Profile families, witness search and the pivot argument.

pub mod family;
pub mod pivot;
mod scan;

use std::borrow::Borrow;
use std::collections::HashSet;
use std::sync::Arc;

use serde_json::{json, Value};

pub use family::{enumerate_family, family_size, FamilySpec, Generator, ProfileFamily};
pub use pivot::{pivot_witnesses_from_json, run_pivot_proof, Conclusion, PivotReport, StepOutcome};
pub use scan::{find_witnesses, MenuScope, ScanOptions, MAX_NONDEGENERACY_PROFILES, MAX_SCAN_PROFILES};

use crate::aggregator::Aggregator;
use crate::axioms::{Axiom, Witness};
use crate::error::{Error, Result};
use crate::labels::LabelSet;
use crate::order::{order_of, OrderOnLabels};
use crate::profile::ScoreProfile;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnconstrainedReport {
    pub holds: bool,
    /// Weak orders no profile's row realizes.
    pub missing: Vec<OrderOnLabels>,
}

/// Whether model `j` (1-based) realizes every weak order on the labels
/// somewhere in `profiles`.
pub fn check_unconstrained_family<I>(labels: &Arc<LabelSet>, profiles: I, j: usize) -> Result<UnconstrainedReport>
where
    I: IntoIterator,
    I::Item: Borrow<ScoreProfile>,
{
    let mut seen = HashSet::new();
    for z in profiles {
        let z = z.borrow();
        if **z.label_set() != **labels {
            return Err(Error::Shape("profile uses a different label set".into()));
        }
        if j == 0 || j > z.models() {
            return Err(Error::ModelIndex { index: j, models: z.models() });
        }
        seen.insert(order_of(labels.clone(), z.row(j - 1))?);
    }
    let missing: Vec<_> = OrderOnLabels::all_weak(labels)
        .into_iter()
        .filter(|o| !seen.contains(o))
        .collect();
    Ok(UnconstrainedReport { holds: missing.is_empty(), missing })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorollaryOutcome {
    Found(Box<Witness>),
    NoWitness,
    NotApplicable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorollaryEntry {
    pub rule: &'static str,
    pub aggregator: Aggregator,
    pub models: usize,
    pub outcome: CorollaryOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorollaryReport {
    pub grid: u32,
    pub labels: Arc<LabelSet>,
    pub entries: Vec<CorollaryEntry>,
}

impl CorollaryReport {
    /// Every applicable configuration produced a witness.
    pub fn all_found(&self) -> bool {
        self.entries.iter().all(|e| match e.outcome {
            CorollaryOutcome::Found(_) => true,
            CorollaryOutcome::NoWitness => false,
            CorollaryOutcome::NotApplicable(_) => true,
        })
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                let mut v = json!({"rule": e.rule, "aggregator": e.aggregator.to_string(), "models": e.models});
                match &e.outcome {
                    CorollaryOutcome::Found(w) => {
                        v["status"] = json!("witness");
                        v["witness"] = w.to_json();
                    }
                    CorollaryOutcome::NoWitness => v["status"] = json!("none"),
                    CorollaryOutcome::NotApplicable(why) => {
                        v["status"] = json!("not_applicable");
                        v["reason"] = json!(why);
                    }
                }
                v
            })
            .collect();
        json!({"grid": self.grid, "labels": self.labels.labels(), "entries": entries})
    }
}

/// Hard voting, soft voting, and soft voting written as uniform weights
/// over action values, each scanned for a model choice reversal witness on
/// the `grid` family for every model count in `models`.
pub fn corollary_suite(
    labels: Arc<LabelSet>,
    models: &[usize],
    grid: u32,
    opts: &ScanOptions,
) -> Result<CorollaryReport> {
    let mut entries = Vec::new();
    for &m in models {
        let rules: [(&'static str, Aggregator); 3] = [
            ("hard voting", Aggregator::HardVoting),
            ("soft voting", Aggregator::SoftVoting),
            ("uniform-weight action values", Aggregator::uniform_weights(m.max(1))),
        ];
        for (rule, agg) in rules {
            let outcome = if m < 2 {
                CorollaryOutcome::NotApplicable(
                    "a single model cannot change the choice without reversing itself".into(),
                )
            } else {
                let family = enumerate_family(&FamilySpec::new(labels.clone(), m, Generator::Grid(grid)))?;
                let opts = ScanOptions { budget: 1, ..*opts };
                match find_witnesses(&agg, &family, &[Axiom::Mcr], &opts)?.into_iter().next() {
                    Some(w) => CorollaryOutcome::Found(Box::new(w)),
                    None => CorollaryOutcome::NoWitness,
                }
            };
            entries.push(CorollaryEntry { rule, aggregator: agg, models: m, outcome });
        }
    }
    Ok(CorollaryReport { grid, labels, entries })
}
