//! The `audit` subcommand: input detection and the per-axiom report.

use anyhow::{anyhow, bail, Context, Result};
use ensemble_instability::axioms::{
    check_idc, check_mcr_all_menus, check_mcr_pair, check_nondegenerate, check_transitivity, check_unanimity, replay,
};
use ensemble_instability::search::{find_witnesses, pivot_witnesses_from_json, ProfileFamily};
use ensemble_instability::{Aggregator, Axiom, ScoreProfile, Verdict, Witness};
use serde_json::{json, Value};

use crate::{Outcome, ScanArgs};

pub const DEFAULT_AXIOMS: [Axiom; 5] = [Axiom::Unanimity, Axiom::Mcr, Axiom::Transitivity, Axiom::Idc, Axiom::Nondegeneracy];

#[derive(Debug)]
pub enum Status {
    Holds,
    Witnesses(Vec<Witness>),
    NotApplicable(String),
}

#[derive(Debug)]
pub struct AuditReport {
    aggregator: Option<Aggregator>,
    input: String,
    results: Vec<(Axiom, Status)>,
}

impl AuditReport {
    pub fn outcome(&self) -> Outcome {
        if self.results.iter().any(|(_, s)| matches!(s, Status::Witnesses(_))) {
            Outcome::Witness
        } else {
            Outcome::Clean
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(a) = &self.aggregator {
            out.push_str(&format!("aggregator: {a}\n"));
        }
        out.push_str(&format!("input: {}\n", self.input));
        for (axiom, status) in &self.results {
            match status {
                Status::Holds => out.push_str(&format!("{:<14} holds\n", axiom.as_str())),
                Status::NotApplicable(r) => out.push_str(&format!("{:<14} not applicable: {r}\n", axiom.as_str())),
                Status::Witnesses(ws) => {
                    out.push_str(&format!("{:<14} {} witness(es)\n", axiom.as_str(), ws.len()));
                    for w in ws {
                        out.push_str(&format!("  {w}\n"));
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let results: Vec<Value> = self
            .results
            .iter()
            .map(|(axiom, status)| match status {
                Status::Holds => json!({"axiom": axiom.as_str(), "status": "holds"}),
                Status::NotApplicable(r) => json!({"axiom": axiom.as_str(), "status": "not_applicable", "reason": r}),
                Status::Witnesses(ws) => json!({
                    "axiom": axiom.as_str(),
                    "status": "witness",
                    "witnesses": ws.iter().map(Witness::to_json).collect::<Vec<_>>(),
                }),
            })
            .collect();
        json!({
            "aggregator": self.aggregator.as_ref().map(ToString::to_string),
            "input": self.input,
            "results": results,
            "exit_code": self.outcome().code(),
        })
    }
}

fn has(v: &Value, key: &str) -> bool {
    v.get(key).is_some()
}

pub fn audit_file(value: &Value, agg: Option<&Aggregator>, scan: &ScanArgs) -> Result<AuditReport> {
    let parse_profiles = |items: &[Value]| -> Result<Vec<ScoreProfile>> {
        items
            .iter()
            .enumerate()
            .map(|(i, p)| ScoreProfile::from_json(p).with_context(|| format!("profile {i}")))
            .collect()
    };
    let parse_witnesses = |items: &[Value]| -> Result<Vec<Witness>> {
        items
            .iter()
            .enumerate()
            .map(|(i, w)| Witness::from_json(w).with_context(|| format!("witness {i}")))
            .collect()
    };
    match value {
        Value::Array(items) if items.is_empty() => bail!("empty input list"),
        Value::Array(items) if items.iter().all(|v| has(v, "axiom")) => audit_witnesses(parse_witnesses(items)?, "witness list"),
        Value::Array(items) if items.iter().all(|v| has(v, "scores")) => {
            audit_profiles(need_agg(agg)?, &parse_profiles(items)?, scan)
        }
        Value::Object(_) if has(value, "axiom") => audit_witnesses(vec![Witness::from_json(value)?], "witness"),
        Value::Object(_) if has(value, "steps") && has(value, "conclusion") => {
            audit_witnesses(pivot_witnesses_from_json(value)?, "pivot report")
        }
        Value::Object(_) if has(value, "points") => {
            let ws = match value.get("witness") {
                Some(Value::Null) | None => Vec::new(),
                Some(w) => vec![Witness::from_json(w)?],
            };
            audit_witnesses(ws, "table1 report")
        }
        Value::Object(_) if has(value, "results") => {
            let mut ws = Vec::new();
            for r in value["results"].as_array().ok_or_else(|| anyhow!("results must be an array"))? {
                if let Some(Value::Array(items)) = r.get("witnesses") {
                    ws.extend(parse_witnesses(items)?);
                }
            }
            audit_witnesses(ws, "audit report")
        }
        Value::Object(_) if has(value, "profiles") => {
            let items = value["profiles"].as_array().ok_or_else(|| anyhow!("profiles must be an array"))?;
            audit_profiles(need_agg(agg)?, &parse_profiles(items)?, scan)
        }
        Value::Object(_) if has(value, "scores") => audit_profiles(need_agg(agg)?, &[ScoreProfile::from_json(value)?], scan),
        _ => bail!("unrecognized input: expected a profile, profile list, witness, witness list or pivot report"),
    }
}

fn need_agg(agg: Option<&Aggregator>) -> Result<&Aggregator> {
    agg.ok_or_else(|| anyhow!("--agg is required when auditing profiles"))
}

/// Replays recorded witnesses; one that does not reproduce is an error.
fn audit_witnesses(witnesses: Vec<Witness>, kind: &str) -> Result<AuditReport> {
    let mut results: Vec<(Axiom, Status)> = Vec::new();
    for (i, w) in witnesses.into_iter().enumerate() {
        if !replay(&w).with_context(|| format!("witness {i}"))? {
            bail!("witness {i} ({}) does not reproduce", w.axiom);
        }
        match results.iter_mut().find(|(a, _)| *a == w.axiom) {
            Some((_, Status::Witnesses(ws))) => ws.push(w),
            _ => results.push((w.axiom, Status::Witnesses(vec![w]))),
        }
    }
    let aggregator = results.iter().find_map(|(_, s)| match s {
        Status::Witnesses(ws) => Some(ws[0].aggregator.clone()),
        _ => None,
    });
    Ok(AuditReport { aggregator, input: kind.to_string(), results })
}

fn check_axiom(axiom: Axiom) -> Result<()> {
    if DEFAULT_AXIOMS.contains(&axiom) {
        Ok(())
    } else {
        bail!("{axiom} is not an audit axiom (use unanimity, mcr, transitivity, idc, nondegeneracy)")
    }
}

fn audit_profiles(agg: &Aggregator, profiles: &[ScoreProfile], scan: &ScanArgs) -> Result<AuditReport> {
    if profiles.is_empty() {
        bail!("no profiles to audit");
    }
    for z in &profiles[1..] {
        profiles[0].same_shape(z)?;
    }
    let budget = scan.budget.max(1);
    let k = profiles[0].num_labels();
    let mut results = Vec::new();
    for axiom in scan.axioms() {
        check_axiom(axiom)?;
        let mut found = Vec::new();
        let mut keep = |v: Verdict| {
            if found.len() < budget {
                found.extend(v.into_witness());
            }
        };
        let status = match axiom {
            Axiom::Transitivity if k < 3 => Status::NotApplicable("needs at least three labels".into()),
            Axiom::Nondegeneracy if profiles.len() < 2 => Status::NotApplicable("needs at least two profiles".into()),
            Axiom::Nondegeneracy => {
                keep(check_nondegenerate(agg, profiles)?);
                status_of(found)
            }
            Axiom::Mcr => {
                for (i, z) in profiles.iter().enumerate() {
                    for (i2, z2) in profiles.iter().enumerate() {
                        if i != i2 {
                            keep(if scan.all_menus {
                                check_mcr_all_menus(agg, z, z2)?
                            } else {
                                check_mcr_pair(agg, z, z2, z.label_set().all())?
                            });
                        }
                    }
                }
                status_of(found)
            }
            _ => {
                for z in profiles {
                    keep(match axiom {
                        Axiom::Unanimity => check_unanimity(agg, z)?,
                        Axiom::Transitivity => check_transitivity(agg, z)?,
                        _ => check_idc(agg, z)?,
                    });
                }
                status_of(found)
            }
        };
        results.push((axiom, status));
    }
    let input = match profiles.len() {
        1 => "1 profile".to_string(),
        n => format!("{n} profiles"),
    };
    Ok(AuditReport { aggregator: Some(agg.clone()), input, results })
}

fn status_of(found: Vec<Witness>) -> Status {
    if found.is_empty() {
        Status::Holds
    } else {
        Status::Witnesses(found)
    }
}

pub fn audit_family(agg: &Aggregator, family: &ProfileFamily, scan: &ScanArgs) -> Result<AuditReport> {
    let axioms = scan.axioms();
    for &a in &axioms {
        check_axiom(a)?;
    }
    let found = find_witnesses(agg, family, &axioms, &scan.options())?;
    let k = family.spec().labels.len();
    let results = axioms
        .iter()
        .map(|&axiom| {
            let status = if axiom == Axiom::Transitivity && k < 3 {
                Status::NotApplicable("needs at least three labels".into())
            } else {
                status_of(found.iter().filter(|w| w.axiom == axiom).cloned().collect())
            };
            (axiom, status)
        })
        .collect();
    let spec = family.spec();
    let input = format!("{} family, |Y|={}, m={} ({} profiles)", spec.generator, k, spec.models, family.len());
    Ok(AuditReport { aggregator: Some(agg.clone()), input, results })
}
