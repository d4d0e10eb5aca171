//! `ensemble-instability`: audits, witness searches, the pivot argument,
//! the three-tree demo and the consistency simulation.
//!
//! Exit codes: 0 when every check holds, 2 when a witness was found, 1 on
//! any error (bad flags, malformed input, a family over the size limit).

mod audit;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ensemble_instability::consistency::{
    convergence_experiment, four_cell_problem, EstimatorKind, ExperimentConfig, SyntheticProblem,
};
use ensemble_instability::rational::{self, round_decimal};
use ensemble_instability::search::{
    enumerate_family, find_witnesses, run_pivot_proof, Conclusion, FamilySpec, Generator, MenuScope, ProfileFamily,
    ScanOptions,
};
use ensemble_instability::trees::{build_table1_fixture, table1_report};
use ensemble_instability::{Aggregator, Axiom, Execution, LabelSet, Witness};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "ensemble-instability", version, about = "Stability axioms for ensemble choice aggregators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every axiom on a profile, witness or pivot report file, or on a family.
    Audit(AuditArgs),
    /// Search a profile family for axiom witnesses.
    Search(SearchArgs),
    /// Run the critical-model argument on a label pair.
    Pivot(PivotArgs),
    /// Rebuild the three-tree example and its choice reversal.
    Table1(Table1Args),
    /// Consistency experiment with histogram estimators.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    /// Number of labels.
    #[arg(long = "Y", default_value_t = 3)]
    labels: usize,
    /// Number of models.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// canonical | grid:G | weak | common
    #[arg(long, default_value = "canonical")]
    family: Generator,
}

impl FamilyArgs {
    fn label_set(&self) -> Result<Arc<LabelSet>> {
        Ok(LabelSet::alphabetic(self.labels)?.shared())
    }

    fn enumerate(&self) -> Result<ProfileFamily> {
        let spec = FamilySpec::new(self.label_set()?, self.m, self.family);
        Ok(enumerate_family(&spec)?)
    }
}

#[derive(Args, Debug, Clone)]
struct ScanArgs {
    /// Comma-separated axioms: unanimity, mcr, transitivity, idc, nondegeneracy.
    #[arg(long, value_delimiter = ',')]
    axiom: Vec<Axiom>,
    /// Witnesses kept per axiom.
    #[arg(long, default_value_t = 1)]
    budget: usize,
    /// Check model choice reversal on every menu, not only the full label set.
    #[arg(long)]
    all_menus: bool,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

impl ScanArgs {
    fn axioms(&self) -> Vec<Axiom> {
        if self.axiom.is_empty() {
            audit::DEFAULT_AXIOMS.to_vec()
        } else {
            self.axiom.clone()
        }
    }

    fn options(&self) -> ScanOptions {
        ScanOptions {
            budget: self.budget,
            exec: if self.sequential { Execution::Sequential } else { Execution::Parallel },
            menus: if self.all_menus { MenuScope::All } else { MenuScope::Full },
        }
    }
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// NAME[:params], e.g. soft_voting, weighted_voting:3,1,1, dictator:1.
    /// Witness and pivot report inputs carry their own aggregator.
    #[arg(long)]
    agg: Option<Aggregator>,
    /// Profile, profile list, witness, witness list or pivot report JSON.
    /// Without it the family flags select what to audit.
    input: Option<PathBuf>,
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    scan: ScanArgs,
    /// JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    agg: Aggregator,
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    scan: ScanArgs,
    /// Witness list JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PivotArgs {
    #[arg(long)]
    agg: Aggregator,
    #[arg(long = "Y", default_value_t = 3)]
    labels: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// The two labels of the ladder, e.g. a,b.
    #[arg(long, value_delimiter = ',')]
    pair: Option<Vec<String>>,
    /// Pivot report JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Table1Args {
    /// Report JSON with exact scores and the witness.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Problem JSON; the built-in four-cell problem otherwise.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
    n_schedule: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Runs per sample size, seeded `seed, seed+1, ...`.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo draws for the disagreement integral.
    #[arg(long, default_value_t = 2000)]
    n_mc: usize,
    /// Point pairs for the reversal rate.
    #[arg(long, default_value_t = 2000)]
    pairs: usize,
    /// Sub-bins per truth cell.
    #[arg(long, default_value_t = 3)]
    parts: usize,
    /// Pseudocount.
    #[arg(long, default_value = "1")]
    alpha: String,
    /// Draw x' within DELTA of x instead of independently.
    #[arg(long)]
    nearby: Option<String>,
    /// Use the true distribution as every estimator.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    sequential: bool,
    /// Per-run CSV: n,seed,disagreement,mcr_rate.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-n means and standard errors CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
}

/// What a successful command found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Clean,
    Witness,
}

impl Outcome {
    fn code(self) -> u8 {
        match self {
            Outcome::Clean => 0,
            Outcome::Witness => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(o) => ExitCode::from(o.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Audit(a) => run_audit(a),
        Command::Search(a) => run_search(a),
        Command::Pivot(a) => run_pivot(a),
        Command::Table1(a) => run_table1(a),
        Command::Simulate(a) => run_simulate(a),
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_json(path: Option<&Path>, value: &Value) -> Result<()> {
    if let Some(p) = path {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        write_atomic(p, text.as_bytes())?;
    }
    Ok(())
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}: malformed JSON", path.display()))
}

fn run_audit(args: AuditArgs) -> Result<Outcome> {
    let report = match &args.input {
        Some(path) => audit::audit_file(&read_json(path)?, args.agg.as_ref(), &args.scan)?,
        None => {
            let Some(agg) = &args.agg else { bail!("--agg is required when auditing a family") };
            audit::audit_family(agg, &args.family.enumerate()?, &args.scan)?
        }
    };
    print!("{}", report.render());
    write_json(args.out.as_deref(), &report.to_json())?;
    Ok(report.outcome())
}

fn run_search(args: SearchArgs) -> Result<Outcome> {
    let family = args.family.enumerate()?;
    let found = find_witnesses(&args.agg, &family, &args.scan.axioms(), &args.scan.options())?;
    println!("{} on {} ({} profiles): {} witness(es)", args.agg, family.spec().generator, family.len(), found.len());
    for w in &found {
        println!("  {w}");
    }
    write_json(args.out.as_deref(), &Value::Array(found.iter().map(Witness::to_json).collect()))?;
    Ok(if found.is_empty() { Outcome::Clean } else { Outcome::Witness })
}

fn run_pivot(args: PivotArgs) -> Result<Outcome> {
    let labels = LabelSet::alphabetic(args.labels)?.shared();
    let (y, y2) = match &args.pair {
        Some(p) if p.len() == 2 => (labels.index(&p[0])?, labels.index(&p[1])?),
        Some(_) => bail!("--pair takes two labels, e.g. a,b"),
        None => (0, 1),
    };
    let report = run_pivot_proof(&args.agg, labels.clone(), args.m, y, y2)?;
    println!("{} with {} models on ({}, {})", args.agg, args.m, labels.name(y), labels.name(y2));
    let ladder: Vec<String> = report.ladder.iter().map(|&s| format!("{{{}}}", labels.names(s).join(","))).collect();
    println!("ladder: {}", ladder.join(" "));
    match report.j_star {
        Some(j) => println!("critical model: {j}"),
        None => println!("critical model: none"),
    }
    for s in &report.steps {
        println!("step {} {}: {}", s.step, if s.passed { "pass" } else { "FAIL" }, s.detail);
    }
    let outcome = match &report.conclusion {
        Conclusion::DictatorFound(j) => {
            println!("conclusion: dictator_found({j})");
            Outcome::Clean
        }
        Conclusion::AxiomViolation { step, witness } => {
            println!("conclusion: axiom_violation at step {step}");
            println!("  {witness}");
            Outcome::Witness
        }
    };
    write_json(args.out.as_deref(), &report.to_json())?;
    Ok(outcome)
}

fn run_table1(args: Table1Args) -> Result<Outcome> {
    let report = table1_report(&build_table1_fixture())?;
    let labels = &report.labels;
    let header: Vec<String> = labels.labels().iter().map(|l| format!("{l:>8}")).collect();
    println!("{:<12}{}", "", header.join(""));
    for (i, point) in ["x1", "x2"].iter().enumerate() {
        println!("scores for {point}");
        for (j, row) in report.profiles[i].rows().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| format!("{:>8}", round_decimal(v, 4))).collect();
            println!("{:<12}{}", format!("  tree {}", j + 1), cells.join(""));
        }
        let agg: Vec<String> = report.rounded_aggregates(4)[i].iter().map(|v| format!("{v:>8}")).collect();
        println!("{:<12}{}", "  agg. score", agg.join(""));
        println!("{:<12}{{{}}}", "  choice", labels.names(report.choices[i]).join(","));
    }
    if let Some(w) = &report.witness {
        println!("{w}");
    }
    write_json(args.out.as_deref(), &report.to_json())?;
    Ok(Outcome::Clean)
}

fn run_simulate(args: SimulateArgs) -> Result<Outcome> {
    let problem = match &args.problem {
        Some(p) => SyntheticProblem::from_json(&read_json(p)?).with_context(|| format!("{}", p.display()))?,
        None => four_cell_problem(),
    };
    if args.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let config = ExperimentConfig {
        n_schedule: args.n_schedule.clone(),
        models: args.m,
        seeds: (0..args.seeds).map(|i| args.seed.wrapping_add(i)).collect(),
        n_mc: args.n_mc,
        n_pairs: args.pairs,
        parts: args.parts,
        alpha: rational::parse(&args.alpha).context("--alpha")?,
        nearby: args.nearby.as_deref().map(rational::parse).transpose().context("--nearby")?,
        estimators: if args.oracle { EstimatorKind::Truth } else { EstimatorKind::Histogram },
        exec: if args.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let table = convergence_experiment(&problem, &config)?;
    print!("{}", table.summary_csv());
    if let Some(p) = &args.out {
        write_atomic(p, table.to_csv().as_bytes())?;
    }
    if let Some(p) = &args.summary {
        write_atomic(p, table.summary_csv().as_bytes())?;
    }
    Ok(Outcome::Clean)
}
