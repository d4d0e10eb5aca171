//! The critical-model argument, replayed step by step against a concrete
//! aggregator.
//!
//! A ladder of profiles moves models one at a time from preferring `y` over
//! `y'` to the reverse; the first model whose move flips the ensemble choice
//! is the candidate dictator `j*`. The later steps build schema profiles and
//! derive that `j*` is decisive for every ordered pair, using only three
//! facts: equal strict comparisons force equal choices, unanimity, and
//! strengthened transitivity. Each application is checked on
//! the actual aggregator; the first one that fails is reported with a
//! witness. Each derived decisiveness claim is then closed over the
//! canonical strict family, with failures turned into model choice reversal
//! witnesses against the matching schema profile.
//!
//! Schema rows list the constrained labels top-down; every other label goes
//! below them in index order. Scores are canonical (top gets `|Y|`).

use std::collections::HashMap;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::aggregator::Aggregator;
use crate::axioms::{self, Verdict, Witness};
use crate::error::{Error, Result};
use crate::labels::{LabelSet, LabelSubset};
use crate::profile::ScoreProfile;
use crate::rational::{int, Rational};

use super::family::{enumerate_family, family_size, FamilySpec, Generator};

pub const MAX_PIVOT_MODELS: usize = 12;
/// Decisiveness claims are closed over the canonical strict family when it
/// has at most this many profiles.
pub const CLOSURE_LIMIT: u128 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub step: u8,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conclusion {
    /// 1-based model index.
    DictatorFound(usize),
    AxiomViolation { step: u8, witness: Box<Witness> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotReport {
    pub aggregator: Aggregator,
    pub labels: Arc<LabelSet>,
    pub models: usize,
    pub pair: (usize, usize),
    pub ladder: Vec<LabelSubset>,
    /// 1-based; `None` when the ladder endpoints already fail unanimity.
    pub j_star: Option<usize>,
    pub steps: Vec<StepOutcome>,
    pub conclusion: Conclusion,
    /// Whether decisiveness claims were closed over the canonical family.
    pub closed_over_family: bool,
}

impl PivotReport {
    pub fn dictator(&self) -> Option<usize> {
        match self.conclusion {
            Conclusion::DictatorFound(j) => Some(j),
            Conclusion::AxiomViolation { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.conclusion {
            Conclusion::AxiomViolation { witness, .. } => Some(witness),
            Conclusion::DictatorFound(_) => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let names = |s: LabelSubset| json!(self.labels.names(s));
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                let mut v = json!({
                    "step": s.step,
                    "status": if s.passed { "pass" } else { "fail" },
                    "detail": s.detail,
                });
                if let Some(w) = &s.witness {
                    v["witness"] = w.to_json();
                }
                v
            })
            .collect();
        let conclusion = match &self.conclusion {
            Conclusion::DictatorFound(j) => json!({"type": "dictator_found", "model": j}),
            Conclusion::AxiomViolation { step, witness } => {
                json!({"type": "axiom_violation", "step": step, "witness": witness.to_json()})
            }
        };
        json!({
            "aggregator": self.aggregator.to_string(),
            "labels": self.labels.labels(),
            "models": self.models,
            "pair": [self.labels.name(self.pair.0), self.labels.name(self.pair.1)],
            "ladder": self.ladder.iter().map(|&s| names(s)).collect::<Vec<_>>(),
            "j_star": self.j_star,
            "steps": steps,
            "conclusion": conclusion,
            "closed_over_family": self.closed_over_family,
        })
    }
}

/// Every witness recorded in a pivot report's JSON.
pub fn pivot_witnesses_from_json(value: &Value) -> Result<Vec<Witness>> {
    let mut out = Vec::new();
    if let Some(steps) = value.get("steps").and_then(Value::as_array) {
        for s in steps {
            if let Some(w) = s.get("witness") {
                out.push(Witness::from_json(w)?);
            }
        }
    }
    if let Some(w) = value.get("conclusion").and_then(|c| c.get("witness")) {
        let w = Witness::from_json(w)?;
        if !out.contains(&w) {
            out.push(w);
        }
    }
    Ok(out)
}

/// A derived "model j* is decisive for `a` over `b`" with its schema
/// profiles, one per pattern of `a` vs `b` in the other rows.
struct Claim {
    a: usize,
    b: usize,
    reps: Vec<ScoreProfile>,
}

struct Engine<'a> {
    agg: &'a Aggregator,
    labels: Arc<LabelSet>,
    k: usize,
    m: usize,
    /// 0-based row of the critical model.
    js: usize,
    ladder: Vec<ScoreProfile>,
    closure: Option<Vec<ScoreProfile>>,
    claims: HashMap<(usize, usize), Claim>,
}

type Check = Result<Option<Witness>>;

macro_rules! check {
    ($e:expr) => {
        if let Some(w) = $e? {
            return Ok(Some(w));
        }
    };
}

fn internal(what: &str) -> Error {
    Error::Invalid(format!("pivot schema inconsistency: {what}"))
}

fn schema_row(k: usize, top: &[usize]) -> Vec<Rational> {
    let mut order: Vec<usize> = top.to_vec();
    order.extend((0..k).filter(|l| !top.contains(l)));
    let mut row = vec![int(0); k];
    for (pos, &l) in order.iter().enumerate() {
        row[l] = int((k - pos) as i64);
    }
    row
}

impl Engine<'_> {
    fn profile(&self, row: impl Fn(usize) -> Vec<usize>) -> ScoreProfile {
        let rows = (0..self.m).map(|r| schema_row(self.k, &row(r))).collect();
        ScoreProfile::new(self.labels.clone(), rows).expect("schema rows are well formed")
    }

    fn bit(&self, bits: usize, r: usize) -> bool {
        let pos = if r < self.js { r } else { r - 1 };
        bits >> pos & 1 == 1
    }

    fn choose(&self, s: LabelSubset, z: &ScoreProfile) -> Result<LabelSubset> {
        self.agg.choose(s, z)
    }

    fn lemma2(&self, z: &ScoreProfile, known: &ScoreProfile, menu: LabelSubset) -> Check {
        match axioms::check_lemma2(self.agg, z, known, menu)? {
            Verdict::Holds => Ok(None),
            Verdict::Violated(w) => Ok(Some(axioms::mcr_behind_lemma2(self.agg, z, known, menu)?.unwrap_or(*w))),
            Verdict::NotApplicable(_) => Err(internal("schema profiles do not share strict comparisons on the menu")),
        }
    }

    fn unanimity(&self, z: &ScoreProfile, top: usize, bottom: usize) -> Check {
        if !z.unanimous(top, bottom) {
            return Err(internal("unanimity premise does not hold"));
        }
        if self.choose(LabelSubset::pair(top, bottom), z)? == LabelSubset::singleton(top) {
            return Ok(None);
        }
        Ok(axioms::check_unanimity(self.agg, z)?.into_witness())
    }

    fn lemma3(&self, z: &ScoreProfile, part: u8, triple: (usize, usize, usize)) -> Check {
        match axioms::check_lemma3(self.agg, z, part, triple)? {
            Verdict::Holds => Ok(None),
            Verdict::Violated(w) => Ok(Some(*w)),
            Verdict::NotApplicable(_) => {
                // an earlier application should have fixed the premise
                Ok(axioms::check_transitivity(self.agg, z)?.into_witness())
            }
        }
    }

    /// Checks an already established claim on `z`.
    fn decisive(&self, z: &ScoreProfile, a: usize, b: usize) -> Check {
        let claim = self.claims.get(&(a, b)).ok_or_else(|| internal("claim used before it was derived"))?;
        if !z.prefers(self.js, a, b) {
            return Err(internal("decisiveness premise does not hold"));
        }
        self.claim_counterexample(claim, z)
    }

    fn claim_counterexample(&self, claim: &Claim, z: &ScoreProfile) -> Check {
        let (a, b) = (claim.a, claim.b);
        let pair = LabelSubset::pair(a, b);
        if !z.prefers(self.js, a, b) || self.choose(pair, z)? == LabelSubset::singleton(a) {
            return Ok(None);
        }
        let mut bits = 0;
        let mut strict = true;
        for r in (0..self.m).filter(|&r| r != self.js) {
            let pos = if r < self.js { r } else { r - 1 };
            if z.prefers(r, b, a) {
                bits |= 1 << pos;
            } else if !z.prefers(r, a, b) {
                strict = false;
            }
        }
        let rep = &claim.reps[bits];
        if strict {
            if let Some(w) = axioms::mcr_behind_lemma2(self.agg, rep, z, pair)? {
                return Ok(Some(w));
            }
        }
        axioms::decisiveness_counterexample(self.agg, self.js + 1, a, b, std::slice::from_ref(z))
    }

    /// Builds the schema profiles for "j* decisive for `a` over `b`", runs
    /// `chain` on each, then closes the claim over the family.
    fn derive(
        &mut self,
        a: usize,
        b: usize,
        row: impl Fn(usize, bool) -> Vec<usize>,
        chain: impl Fn(&Self, &ScoreProfile) -> Check,
    ) -> Check {
        let pair = LabelSubset::pair(a, b);
        let mut reps = Vec::with_capacity(1 << (self.m - 1));
        for bits in 0..1usize << (self.m - 1) {
            let z = self.profile(|r| row(r, r != self.js && self.bit(bits, r)));
            debug_assert!((0..self.m).all(|r| {
                let flipped = r != self.js && self.bit(bits, r);
                z.prefers(r, a, b) != flipped
            }));
            check!(chain(self, &z));
            if self.choose(pair, &z)? != LabelSubset::singleton(a) {
                return Err(internal("derivation chain passed but the claim fails"));
            }
            reps.push(z);
        }
        let claim = Claim { a, b, reps };
        if let Some(family) = &self.closure {
            for z in family {
                check!(self.claim_counterexample(&claim, z));
            }
        }
        self.claims.insert((a, b), claim);
        Ok(None)
    }

    fn name(&self, l: usize) -> &str {
        self.labels.name(l)
    }
}

/// Replays the critical-model argument for the pair `(y, y2)`.
pub fn run_pivot_proof(
    agg: &Aggregator,
    labels: Arc<LabelSet>,
    m: usize,
    y: usize,
    y2: usize,
) -> Result<PivotReport> {
    let k = labels.len();
    if k < 3 {
        return Err(Error::Invalid(format!("the pivot argument needs at least 3 labels, got {k}")));
    }
    if !(2..=MAX_PIVOT_MODELS).contains(&m) {
        return Err(Error::Invalid(format!("model count must be in 2..={MAX_PIVOT_MODELS}, got {m}")));
    }
    if y >= k || y2 >= k || y == y2 {
        return Err(Error::Invalid("need two distinct labels from the label set".into()));
    }
    let spec = FamilySpec::new(labels.clone(), m, Generator::CanonicalStrict);
    let closure = match family_size(&spec) {
        Some(n) if n <= CLOSURE_LIMIT && k <= 5 && m <= 4 => Some(enumerate_family(&spec)?.iter().collect()),
        _ => None,
    };
    let mut e = Engine {
        agg,
        labels: labels.clone(),
        k,
        m,
        js: 0,
        ladder: Vec::new(),
        closure,
        claims: HashMap::new(),
    };
    let (yy, p) = (y, y2);
    let menu = LabelSubset::pair(yy, p);
    e.ladder = (0..=m)
        .map(|j| e.profile(|r| if r < j { vec![p, yy] } else { vec![yy, p] }))
        .collect();
    let ladder = e.ladder.iter().map(|z| agg.choose(menu, z)).collect::<Result<Vec<_>>>()?;
    let mut report = PivotReport {
        aggregator: agg.clone(),
        labels: labels.clone(),
        models: m,
        pair: (y, y2),
        ladder: ladder.clone(),
        j_star: None,
        steps: Vec::new(),
        conclusion: Conclusion::DictatorFound(0),
        closed_over_family: e.closure.is_some(),
    };
    for (idx, expect) in [(0, yy), (m, p)] {
        if ladder[idx] != LabelSubset::singleton(expect) {
            let w = axioms::check_unanimity(agg, &e.ladder[idx])?
                .into_witness()
                .ok_or_else(|| internal("ladder endpoint fails but unanimity holds"))?;
            report.conclusion = Conclusion::AxiomViolation { step: 1, witness: Box::new(w) };
            return Ok(report);
        }
    }
    let j_star = (1..=m).find(|&j| ladder[j].contains(p)).expect("endpoint holds");
    report.j_star = Some(j_star);
    e.js = j_star - 1;

    let others: Vec<usize> = (0..k).filter(|&l| l != yy && l != p).collect();
    type StepFn = fn(&mut Engine, usize, usize, usize) -> Check;
    let per_label: [(u8, StepFn); 4] = [(2, step2), (3, step3), (4, step4), (5, step5)];
    for (step, f) in per_label {
        for &q in &others {
            if let Some(w) = f(&mut e, yy, p, q)? {
                return Ok(fail(report, step, w));
            }
        }
        let detail = match step {
            2 => format!("model {j_star} decisive for {} over every other label", e.name(p)),
            3 => format!("model {j_star} decisive for {} over every other label", e.name(yy)),
            4 => format!("model {j_star} decisive for every other label over {}", e.name(yy)),
            _ => format!("model {j_star} decisive for every other label over {}", e.name(p)),
        };
        report.steps.push(StepOutcome { step, passed: true, detail, witness: None });
    }
    if let Some(w) = step6(&mut e, yy, p, others[0])? {
        return Ok(fail(report, 6, w));
    }
    report.steps.push(StepOutcome {
        step: 6,
        passed: true,
        detail: format!("model {j_star} decisive between {} and {} both ways", e.name(yy), e.name(p)),
        witness: None,
    });
    for &a in &others {
        for &b in &others {
            if a != b {
                if let Some(w) = step7(&mut e, yy, a, b)? {
                    return Ok(fail(report, 7, w));
                }
            }
        }
    }
    debug_assert_eq!(e.claims.len(), k * (k - 1));
    report.steps.push(StepOutcome {
        step: 7,
        passed: true,
        detail: format!("model {j_star} decisive for every ordered pair"),
        witness: None,
    });
    report.conclusion = Conclusion::DictatorFound(j_star);
    Ok(report)
}

fn fail(mut report: PivotReport, step: u8, w: Witness) -> PivotReport {
    report.steps.push(StepOutcome {
        step,
        passed: false,
        detail: w.narrative.clone(),
        witness: Some(w.clone()),
    });
    report.conclusion = Conclusion::AxiomViolation { step, witness: Box::new(w) };
    report
}

// In the step functions `y` is the ladder's first label, `p` the second and
// `q` a third label.

fn step2(e: &mut Engine, y: usize, p: usize, q: usize) -> Check {
    let js = e.js;
    let z3 = e.profile(|r| if r < js { vec![p, q, y] } else { vec![y, p, q] });
    check!(e.lemma2(&z3, &e.ladder[js], LabelSubset::pair(y, p)));
    check!(e.unanimity(&z3, p, q));
    check!(e.lemma3(&z3, 1, (y, p, q)));
    e.derive(
        p,
        q,
        |r, flip| match (r.cmp(&js), flip) {
            (std::cmp::Ordering::Equal, _) => vec![p, y, q],
            (std::cmp::Ordering::Less, false) => vec![p, q, y],
            (std::cmp::Ordering::Less, true) => vec![q, p, y],
            (std::cmp::Ordering::Greater, false) => vec![y, p, q],
            (std::cmp::Ordering::Greater, true) => vec![y, q, p],
        },
        |e, z| {
            check!(e.lemma2(z, &e.ladder[e.js + 1], LabelSubset::pair(y, p)));
            check!(e.lemma2(z, &z3, LabelSubset::pair(y, q)));
            e.lemma3(z, 1, (p, y, q))
        },
    )
}

fn step3(e: &mut Engine, y: usize, p: usize, q: usize) -> Check {
    let js = e.js;
    e.derive(
        y,
        q,
        |r, flip| match (r == js, flip) {
            (true, _) => vec![y, p, q],
            (false, false) => vec![y, q, p],
            (false, true) => vec![q, y, p],
        },
        |e, z| {
            check!(e.decisive(z, p, q));
            check!(e.unanimity(z, y, p));
            e.lemma3(z, 3, (y, p, q))
        },
    )
}

fn step4(e: &mut Engine, y: usize, p: usize, q: usize) -> Check {
    let js = e.js;
    let z6 = e.profile(|r| if r < js { vec![p, q, y] } else { vec![q, y, p] });
    check!(e.lemma2(&z6, &e.ladder[js], LabelSubset::pair(y, p)));
    check!(e.unanimity(&z6, q, y));
    check!(e.lemma3(&z6, 2, (q, y, p)));
    e.derive(
        q,
        y,
        |r, flip| match (r.cmp(&js), flip) {
            (std::cmp::Ordering::Equal, _) => vec![q, p, y],
            (std::cmp::Ordering::Less, false) => vec![p, q, y],
            (std::cmp::Ordering::Less, true) => vec![p, y, q],
            (std::cmp::Ordering::Greater, false) => vec![q, y, p],
            (std::cmp::Ordering::Greater, true) => vec![y, q, p],
        },
        |e, z| {
            check!(e.lemma2(z, &e.ladder[e.js + 1], LabelSubset::pair(y, p)));
            check!(e.lemma2(z, &z6, LabelSubset::pair(p, q)));
            e.lemma3(z, 2, (q, p, y))
        },
    )
}

fn step5(e: &mut Engine, y: usize, p: usize, q: usize) -> Check {
    let js = e.js;
    e.derive(
        q,
        p,
        |r, flip| match (r == js, flip) {
            (true, _) => vec![q, y, p],
            (false, false) => vec![y, q, p],
            (false, true) => vec![y, p, q],
        },
        |e, z| {
            check!(e.decisive(z, q, y));
            check!(e.unanimity(z, y, p));
            e.lemma3(z, 3, (q, y, p))
        },
    )
}

fn step6(e: &mut Engine, y: usize, p: usize, q: usize) -> Check {
    let js = e.js;
    check!(e.derive(
        y,
        p,
        |r, flip| match (r == js, flip) {
            (true, _) | (false, false) => vec![y, q, p],
            (false, true) => vec![p, q, y],
        },
        |e, z| {
            check!(e.decisive(z, y, q));
            check!(e.decisive(z, q, p));
            e.lemma3(z, 3, (y, q, p))
        },
    ));
    e.derive(
        p,
        y,
        |r, flip| match (r == js, flip) {
            (true, _) | (false, false) => vec![p, q, y],
            (false, true) => vec![y, q, p],
        },
        |e, z| {
            check!(e.decisive(z, p, q));
            check!(e.decisive(z, q, y));
            e.lemma3(z, 3, (p, q, y))
        },
    )
}

/// Decisiveness between two labels outside the ladder pair, through `y`.
fn step7(e: &mut Engine, y: usize, a: usize, b: usize) -> Check {
    let js = e.js;
    e.derive(
        a,
        b,
        |r, flip| match (r == js, flip) {
            (true, _) => vec![a, y, b],
            (false, false) => vec![a, b, y],
            (false, true) => vec![b, a, y],
        },
        |e, z| {
            check!(e.decisive(z, a, y));
            check!(e.decisive(z, y, b));
            e.lemma3(z, 3, (a, y, b))
        },
    )
}
