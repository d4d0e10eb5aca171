//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ensemble_instability::axioms::{check_idc, check_transitivity, check_unanimity_implies_mcr_restricted, replay};
use ensemble_instability::consistency::{convergence_experiment, four_cell_problem, ExperimentConfig};
use ensemble_instability::rational::{parse, ratio};
use ensemble_instability::search::{
    corollary_suite, enumerate_family, find_witnesses, pivot_witnesses_from_json, run_pivot_proof, Conclusion,
    CorollaryOutcome, FamilySpec, Generator, ScanOptions,
};
use ensemble_instability::trees::{build_table1_fixture, table1_report};
use ensemble_instability::{Aggregator, Axiom, Execution, LabelSet, LabelSubset, ScoreProfile, Verdict, Witness};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_ensemble-instability");

type Check = Result<String, String>;

/// Witnesses gathered across criteria for the replay criterion.
#[derive(Default)]
struct Emitted {
    witnesses: Vec<(String, Witness)>,
}

impl Emitted {
    fn add(&mut self, source: &str, w: &Witness) {
        self.witnesses.push((source.to_string(), w.clone()));
    }
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, format!("{what} took {elapsed:?}, limit {limit:?}"))
}

fn labels(k: usize) -> std::sync::Arc<LabelSet> {
    LabelSet::alphabetic(k).unwrap().shared()
}

fn table1(emitted: &mut Emitted) -> Check {
    let start = Instant::now();
    let report = table1_report(&build_table1_fixture()).map_err(|e| e.to_string())?;
    let expected_scores = [
        [["0.40", "0.34", "0.26"], ["0.40", "0.35", "0.25"], ["0.40", "0.5", "0.1"]],
        [["0.40", "0.36", "0.24"], ["0.40", "0.35", "0.25"], ["0.40", "0.5", "0.1"]],
    ];
    for (p, rows) in expected_scores.iter().enumerate() {
        for (j, row) in rows.iter().enumerate() {
            let want: Vec<_> = row.iter().map(|v| parse(v).unwrap()).collect();
            ensure(report.profiles[p].row(j) == want.as_slice(), format!("point {} tree {} scores differ", p + 1, j + 1))?;
        }
    }
    let rounded = report.rounded_aggregates(4);
    ensure(rounded[0] == ["0.4000", "0.3967", "0.2033"], format!("x1 aggregates {:?}", rounded[0]))?;
    ensure(rounded[1] == ["0.4000", "0.4033", "0.1967"], format!("x2 aggregates {:?}", rounded[1]))?;
    ensure(report.aggregates[0][1] == ratio(119, 300), "x1 aggregate for class 2 is not exactly 119/300")?;
    ensure(
        report.choices == [LabelSubset::singleton(0), LabelSubset::singleton(1)],
        "choices are not {1} then {2}",
    )?;
    let w = report.witness.as_ref().ok_or("no reversal witness")?;
    ensure(w.axiom == Axiom::Mcr && w.labels == [0, 1], format!("unexpected witness {w}"))?;
    emitted.add("table1", w);
    within(start.elapsed(), Duration::from_secs(1), "table1")?;
    Ok(format!("scores, aggregates and choices exact; witness (1,2); {:?}", start.elapsed()))
}

fn corollary(emitted: &mut Emitted) -> Check {
    let start = Instant::now();
    let report = corollary_suite(labels(3), &[2, 3], 5, &ScanOptions::default()).map_err(|e| e.to_string())?;
    let mut rules = Vec::new();
    for e in &report.entries {
        match &e.outcome {
            CorollaryOutcome::Found(w) => {
                ensure(w.axiom == Axiom::Mcr, format!("{} m={} gave a {} witness", e.rule, e.models, w.axiom))?;
                emitted.add("corollary", w);
                rules.push(format!("{}@m={}", e.rule, e.models));
            }
            other => return Err(format!("{} m={}: {other:?}", e.rule, e.models)),
        }
    }
    ensure(report.entries.len() == 6, format!("expected 6 entries, got {}", report.entries.len()))?;
    within(start.elapsed(), Duration::from_secs(60), "corollary suite")?;
    Ok(format!("MCR witnesses for {}; {:?}", rules.join(", "), start.elapsed()))
}

fn fixture_aggregators(m: usize) -> Vec<Aggregator> {
    let mut weights = vec![ratio(1, 1); m];
    weights[0] = ratio(m as i64, 1);
    vec![
        Aggregator::SoftVoting,
        Aggregator::HardVoting,
        Aggregator::WeightedVoting(weights),
        Aggregator::Dictator(1),
        Aggregator::Borda,
        Aggregator::PairwiseMajority,
    ]
}

/// Majority cycle among three labels, counted directly from the rows.
fn has_majority_cycle(z: &ScoreProfile) -> bool {
    let beats = |a: usize, b: usize| {
        let for_a = (0..z.models()).filter(|&j| z.score(j, a) > z.score(j, b)).count();
        2 * for_a > z.models()
    };
    (beats(0, 1) && beats(1, 2) && beats(2, 0)) || (beats(1, 0) && beats(2, 1) && beats(0, 2))
}

fn transitivity_idc(emitted: &mut Emitted) -> Check {
    let start = Instant::now();
    let family = enumerate_family(&FamilySpec::new(labels(3), 3, Generator::CanonicalStrict)).map_err(|e| e.to_string())?;
    ensure(family.len() == 216, format!("family has {} profiles", family.len()))?;
    let mut cycles = 0;
    for z in family.iter() {
        let cycle = has_majority_cycle(&z);
        cycles += cycle as usize;
        for agg in fixture_aggregators(3) {
            let t = check_transitivity(&agg, &z).map_err(|e| e.to_string())?;
            let i = check_idc(&agg, &z).map_err(|e| e.to_string())?;
            ensure(t.holds() == i.holds(), format!("{agg}: transitivity {t:?} but idc {i:?}"))?;
            let should_fail = agg == Aggregator::PairwiseMajority && cycle;
            ensure(t.holds() != should_fail, format!("{agg}: transitivity verdict wrong on {z:?}"))?;
            for v in [t, i] {
                if let Verdict::Violated(w) = v {
                    emitted.add("transitivity/idc", &w);
                }
            }
        }
    }
    ensure(cycles == 12, format!("expected 12 cyclic profiles, found {cycles}"))?;
    within(start.elapsed(), Duration::from_secs(30), "transitivity/idc sweep")?;
    Ok(format!("216 profiles x 6 aggregators; majority fails exactly on the {cycles} cyclic profiles; {:?}", start.elapsed()))
}

fn pivot(emitted: &mut Emitted) -> Check {
    let mut notes = Vec::new();
    for m in [2, 3] {
        let mut cases: Vec<(Aggregator, Option<usize>)> = (1..=m).map(|j| (Aggregator::Dictator(j), Some(j))).collect();
        let mut weights = vec![ratio(1, 1); m];
        weights[0] = ratio(m as i64, 1);
        for agg in [Aggregator::SoftVoting, Aggregator::HardVoting, Aggregator::Borda, Aggregator::WeightedVoting(weights)] {
            cases.push((agg, None));
        }
        for (agg, dictator) in cases {
            let start = Instant::now();
            let report = run_pivot_proof(&agg, labels(3), m, 0, 1).map_err(|e| e.to_string())?;
            within(start.elapsed(), Duration::from_secs(10), &format!("pivot {agg} m={m}"))?;
            match (&report.conclusion, dictator) {
                (Conclusion::DictatorFound(j), Some(want)) => {
                    ensure(*j == want, format!("{agg} m={m}: dictator {j}, expected {want}"))?
                }
                (Conclusion::AxiomViolation { step, witness }, None) => {
                    ensure(replay(witness).unwrap_or(false), format!("{agg} m={m}: witness does not replay"))?;
                    emitted.add("pivot", witness);
                    for w in pivot_witnesses_from_json(&report.to_json()).map_err(|e| e.to_string())? {
                        emitted.add("pivot json", &w);
                    }
                    notes.push(format!("{agg}@m={m}:step{step}"));
                }
                (c, _) => return Err(format!("{agg} m={m}: unexpected conclusion {c:?}")),
            }
        }
    }
    Ok(format!("dictators found for m=2,3; violations {}", notes.join(" ")))
}

fn restricted_lemma() -> Check {
    let start = Instant::now();
    let family = enumerate_family(&FamilySpec::new(labels(3), 3, Generator::CommonStrict))
        .and_then(|f| f.materialize(usize::MAX))
        .map_err(|e| e.to_string())?;
    ensure(family.len() == 162, format!("family has {} profiles", family.len()))?;
    let mut checked = Vec::new();
    let mut excluded = Vec::new();
    for agg in fixture_aggregators(3).into_iter().chain((2..=3).map(Aggregator::Dictator)) {
        match check_unanimity_implies_mcr_restricted(&agg, &family, Execution::Parallel).map_err(|e| e.to_string())? {
            Verdict::Holds => checked.push(agg.to_string()),
            Verdict::NotApplicable(_) => excluded.push(agg.to_string()),
            Verdict::Violated(w) => return Err(format!("{agg}: {w}")),
        }
    }
    ensure(checked.contains(&"soft_voting".to_string()), "soft voting was not checked")?;
    within(start.elapsed(), Duration::from_secs(30), "restricted lemma")?;
    Ok(format!(
        "zero witnesses over 162x161 pairs for {}; excluded (fail unanimity): {}; {:?}",
        checked.join(", "),
        excluded.join(", "),
        start.elapsed()
    ))
}

fn consistency() -> Check {
    let start = Instant::now();
    let table = convergence_experiment(&four_cell_problem(), &ExperimentConfig::default()).map_err(|e| e.to_string())?;
    let first = table.summary_for(100).ok_or("no n=100 row")?;
    let last = table.summary_for(100_000).ok_or("no n=100000 row")?;
    let (d0, d1) = (first.mean_disagreement, last.mean_disagreement);
    let (r0, r1) = (first.mean_mcr_rate.ok_or("no rate")?, last.mean_mcr_rate.ok_or("no rate")?);
    ensure(d1 < 0.02 && d1 < d0, format!("disagreement {d0} -> {d1}"))?;
    ensure(r1 < 0.01 && r1 < r0, format!("mcr rate {r0} -> {r1}"))?;
    for r in &table.runs {
        let c = r.mcr.ok_or("missing counts")?;
        ensure(c.common_order_violations == 0, format!("n={} seed={}: reversal under a common order", r.n, r.seed))?;
    }
    within(start.elapsed(), Duration::from_secs(300), "convergence experiment")?;
    Ok(format!("disagreement {d0:.4} -> {d1:.4}, mcr rate {r0:.4} -> {r1:.4}; {:?}", start.elapsed()))
}

fn cli(dir: &Path, args: &[&str]) -> Result<i32, String> {
    let out = Command::new(BIN).args(args).current_dir(dir).output().map_err(|e| e.to_string())?;
    out.status.code().ok_or_else(|| format!("{args:?} was killed"))
}

fn read(dir: &Path, name: &str) -> Result<Vec<u8>, String> {
    std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))
}

fn witnesses_in_file(dir: &Path, name: &str) -> Result<Vec<Witness>, String> {
    let v: Value = serde_json::from_slice(&read(dir, name)?).map_err(|e| e.to_string())?;
    let parse = |w: &Value| Witness::from_json(w).map_err(|e| e.to_string());
    if let Some(items) = v.as_array() {
        return items.iter().map(parse).collect();
    }
    if v.get("conclusion").is_some() {
        return pivot_witnesses_from_json(&v).map_err(|e| e.to_string());
    }
    if let Some(w) = v.get("witness").filter(|w| !w.is_null()) {
        return Ok(vec![parse(w)?]);
    }
    let mut out = Vec::new();
    for r in v["results"].as_array().into_iter().flatten() {
        for w in r["witnesses"].as_array().into_iter().flatten() {
            out.push(parse(w)?);
        }
    }
    Ok(out)
}

/// CLI runs whose outputs feed both the replay and the determinism criteria.
const RUNS: [(&str, &[&str]); 8] = [
    ("search.json", &["search", "--agg", "hard_voting", "--family", "canonical", "--Y", "3", "--m", "3", "--axiom", "mcr", "--budget", "5"]),
    ("search_grid.json", &["search", "--agg", "borda", "--family", "grid:4", "--m", "2", "--budget", "3"]),
    ("search_weak.json", &["search", "--agg", "dictator:1", "--family", "weak", "--m", "2", "--budget", "3"]),
    ("pivot_soft.json", &["pivot", "--agg", "soft_voting", "--Y", "3", "--m", "3"]),
    ("pivot_dictator.json", &["pivot", "--agg", "dictator:2", "--Y", "3", "--m", "3"]),
    ("table1.json", &["table1"]),
    ("audit.json", &["audit", "--agg", "pairwise_majority", "--family", "canonical", "--m", "3", "--budget", "4"]),
    ("sim.csv", &["simulate", "--n-schedule", "100,1000", "--seeds", "2", "--seed", "7", "--n-mc", "300", "--pairs", "300"]),
];

fn run_all(dir: &Path) -> Result<(), String> {
    for (out, args) in RUNS {
        let mut args = args.to_vec();
        args.extend(["--out", out]);
        let code = cli(dir, &args)?;
        ensure(code == 0 || code == 2, format!("{args:?} exited {code}"))?;
    }
    Ok(())
}

fn self_verification(emitted: &mut Emitted, dir: &Path) -> Check {
    for (file, _) in RUNS.iter().filter(|(f, _)| f.ends_with(".json")) {
        for w in witnesses_in_file(dir, file)? {
            emitted.add(file, &w);
        }
        let code = cli(dir, &["audit", file])?;
        let expect_witness = !witnesses_in_file(dir, file)?.is_empty();
        ensure(code == if expect_witness { 2 } else { 0 }, format!("audit {file} exited {code}"))?;
    }
    // a broad library scan adds every axiom and aggregator
    let family = enumerate_family(&FamilySpec::new(labels(3), 2, Generator::Grid(4))).map_err(|e| e.to_string())?;
    let axioms = [Axiom::Unanimity, Axiom::Mcr, Axiom::Transitivity, Axiom::Idc, Axiom::Nondegeneracy];
    let opts = ScanOptions { budget: 3, ..ScanOptions::default() };
    let aggs = fixture_aggregators(2).into_iter().chain([Aggregator::WeightedVoting(vec![ratio(-1, 1), ratio(1, 1)])]);
    for agg in aggs {
        for w in find_witnesses(&agg, &family, &axioms, &opts).map_err(|e| e.to_string())? {
            emitted.add("scan", &w);
        }
    }
    let total = emitted.witnesses.len();
    let mut bad = Vec::new();
    for (source, w) in &emitted.witnesses {
        let back = Witness::from_json(&w.to_json()).map_err(|e| e.to_string())?;
        if !replay(w).unwrap_or(false) || !replay(&back).unwrap_or(false) {
            bad.push(format!("{source}: {w}"));
        }
    }
    ensure(bad.is_empty(), format!("{} of {total} witnesses fail to replay: {}", bad.len(), bad.join("; ")))?;
    ensure(total > 50, format!("only {total} witnesses collected"))?;
    let mut axioms_seen: Vec<&str> = emitted.witnesses.iter().map(|(_, w)| w.axiom.as_str()).collect();
    axioms_seen.sort();
    axioms_seen.dedup();
    Ok(format!("{total}/{total} witnesses replay (axioms: {})", axioms_seen.join(", ")))
}

fn determinism(first: &Path, second: &Path) -> Check {
    run_all(second)?;
    for (file, _) in RUNS {
        ensure(read(first, file)? == read(second, file)?, format!("{file} differs between runs"))?;
    }
    // worker count must not matter either
    let seq = ["search", "--agg", "hard_voting", "--family", "canonical", "--axiom", "mcr", "--budget", "5", "--sequential"];
    cli(second, &[&seq[..], &["--out", "search_seq.json"]].concat())?;
    ensure(read(first, "search.json")? == read(second, "search_seq.json")?, "sequential search output differs")?;
    Ok(format!("{} output files byte-identical across runs and worker modes", RUNS.len()))
}

fn main() {
    let mut emitted = Emitted::default();
    let first = tempfile::tempdir().expect("tempdir");
    let second = tempfile::tempdir().expect("tempdir");
    let prepared = run_all(first.path());
    let results: Vec<(u8, &str, Check)> = vec![
        (1, "three-tree example", table1(&mut emitted)),
        (2, "corollary coverage", corollary(&mut emitted)),
        (3, "transitivity iff idc", transitivity_idc(&mut emitted)),
        (4, "pivot proof", pivot(&mut emitted)),
        (5, "unanimity implies mcr under a common order", restricted_lemma()),
        (6, "consistency at desk scale", consistency()),
        (7, "witness self-verification", prepared.clone().and_then(|_| self_verification(&mut emitted, first.path()))),
        (8, "determinism", prepared.and_then(|_| determinism(first.path(), second.path()))),
    ];
    let mut failed = 0;
    for (n, name, result) in &results {
        match result {
            Ok(detail) => println!("criterion {n} ({name}): PASS - {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL - {why}");
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
