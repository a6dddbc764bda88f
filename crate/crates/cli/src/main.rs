use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qmu::examples::{futures_formula, futures_model, futures_tables, vardi_model, TABLE_NAMES};
use qmu::io::{model_from_json, model_to_json};
use qmu::oracle::{crosscheck, kozen, SizeBounds};
use qmu::strategy::{strategy_from_json, strategy_to_json, StrategyError};
use qmu::{
    estimate, evaluate, evaluate_fix, parse, reduce, synthesize, EvalConfig, EvalError, EvalReport, Expectation,
    Formula, Model,
};

/// Model checker for the quantitative mu-calculus over probabilistic game structures.
#[derive(Parser)]
#[command(name = "qmu", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula over a model.
    Eval(EvalArgs),
    /// Synthesize memoriless strategies for both players.
    Synthesize(SynthesizeArgs),
    /// Estimate a game value by sampling playouts.
    Simulate(SimulateArgs),
    /// Compare the evaluator against brute-force minimax on random tiny instances.
    Crosscheck(CrosscheckArgs),
    /// Emit a built-in model, its formula, or its result tables.
    Example(ExampleArgs),
}

#[derive(Args)]
struct Input {
    /// Model file (qmu-model/1 JSON).
    model: PathBuf,
    /// Formula file, or the formula text itself.
    formula: String,
}

#[derive(Args)]
struct Tuning {
    /// Convergence tolerance in sup norm.
    #[arg(long, default_value_t = EvalConfig::default().tolerance)]
    tol: f64,
    /// Iteration limit per fixed-point solve.
    #[arg(long, default_value_t = EvalConfig::default().max_iterations)]
    max_iters: usize,
}

impl Tuning {
    fn config(&self) -> EvalConfig {
        EvalConfig {
            tolerance: self.tol,
            max_iterations: self.max_iters,
            ..EvalConfig::default()
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    tuning: Tuning,
    /// Report only this state (by label).
    #[arg(long, conflicts_with = "all_states")]
    state: Option<String>,
    /// Report every state (the default).
    #[arg(long)]
    all_states: bool,
    /// Also print values multiplied by 10.
    #[arg(long)]
    dollars: bool,
    /// Iterate fix(x) binders even when their bodies contain choices.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    tuning: Tuning,
    /// Where to write the strategy file; printed to stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: Input,
    /// Strategy file from `synthesize`.
    #[arg(long, conflicts_with = "synthesize", required_unless_present = "synthesize")]
    strategy: Option<PathBuf>,
    /// Synthesize the strategies first.
    #[arg(long)]
    synthesize: bool,
    /// Initial state label.
    #[arg(long)]
    state: String,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Re-entries of one colour before a playout is cut off.
    #[arg(long, default_value_t = 200)]
    max_depth: usize,
    /// Also print the bracket multiplied by 10.
    #[arg(long)]
    dollars: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CrosscheckArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Instance bounds as `states=N,min=N,max=N,binders=N`; omitted keys keep their defaults.
    #[arg(long, value_parser = parse_bounds)]
    size: Option<SizeBounds>,
    /// Directory for counterexample files.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Swap every max and min junction before evaluating, to exercise failure reporting.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleName {
    Futures,
    Vardi,
}

#[derive(Args)]
struct ExampleArgs {
    name: ExampleName,
    /// Print a result table instead of the model.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(TABLE_NAMES))]
    table: Option<String>,
    /// Print the table as JSON records instead of CSV.
    #[arg(long, requires = "table")]
    json: bool,
    /// Directory to write `<name>.json` and `<name>.qmu` into.
    #[arg(long, conflicts_with = "table")]
    out: Option<PathBuf>,
}

fn parse_bounds(text: &str) -> Result<SizeBounds, String> {
    let mut b = SizeBounds::default();
    for part in text.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
        let value: usize = value.parse().map_err(|_| format!("`{value}` is not a count"))?;
        match key.trim() {
            "states" => b.max_states = value,
            "min" => b.max_min_sites = value,
            "max" => b.max_max_sites = value,
            "binders" => b.max_binders = value,
            other => return Err(format!("unknown bound `{other}`")),
        }
    }
    Ok(b)
}

enum Failure {
    Input(String),
    NonConvergence(String),
    Property(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::NonConvergence(_) => 2,
            Failure::Property(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::NonConvergence(m) | Failure::Property(m) => m,
        }
    }
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Divergence { .. } => Failure::NonConvergence(e.to_string()),
            _ => input(e),
        }
    }
}

impl From<StrategyError> for Failure {
    fn from(e: StrategyError) -> Self {
        match e {
            StrategyError::NotConverged(_) => Failure::NonConvergence(e.to_string()),
            StrategyError::Eval(e) => e.into(),
            _ => input(e),
        }
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(inp: &Input) -> Result<(Model, Formula), Failure> {
    let model = model_from_json(&read(&inp.model)?).map_err(|e| input(format!("{}: {e}", inp.model.display())))?;
    let path = Path::new(&inp.formula);
    let (text, origin) = if path.is_file() {
        (read(path)?, format!("{}:", path.display()))
    } else {
        (inp.formula.clone(), String::new())
    };
    let full = parse(text.trim()).map_err(|e| input(format!("{origin}{e}")))?;
    let phi = reduce(&full, &model.valuation).map_err(input)?;
    Ok((model, phi))
}

fn state_index(model: &Model, label: &str) -> Result<usize, Failure> {
    model.space.index_of(label).map_err(input)
}

fn stats_lines(report: &EvalReport) -> String {
    report
        .fixpoints
        .iter()
        .map(|f| {
            format!(
                "# {} {:?}: {} solves, {} iterations (max {}), residual {:.3e}{}\n",
                f.binder,
                f.kind,
                f.solves,
                f.total_iterations,
                f.max_iterations,
                f.worst_residual,
                if f.converged { "" } else { ", not converged" }
            )
        })
        .collect()
}

fn stats_json(report: &EvalReport) -> Value {
    report
        .fixpoints
        .iter()
        .map(|f| {
            json!({
                "binder": f.binder,
                "kind": format!("{:?}", f.kind),
                "solves": f.solves,
                "total_iterations": f.total_iterations,
                "max_iterations": f.max_iterations,
                "final_residual": f.final_residual,
                "worst_residual": f.worst_residual,
                "converged": f.converged,
            })
        })
        .collect()
}

fn cmd_eval(a: &EvalArgs) -> Outcome {
    let (model, phi) = load(&a.input)?;
    let cfg = a.tuning.config();
    let report = if a.force {
        evaluate_fix(&phi, &model, &cfg, true)?
    } else {
        evaluate(&phi, &model, &cfg)?
    };
    let states: Vec<usize> = match &a.state {
        Some(label) => vec![state_index(&model, label)?],
        None => (0..model.size()).collect(),
    };
    let labels = model.space.labels();
    let out = if a.json {
        let values: serde_json::Map<String, Value> = states
            .iter()
            .map(|&s| (labels[s].clone(), json!(report.result.get(s))))
            .collect();
        let mut doc = json!({ "values": values, "converged": report.converged, "fixpoints": stats_json(&report) });
        if a.dollars {
            doc["dollars"] = states
                .iter()
                .map(|&s| (labels[s].clone(), json!(10.0 * report.result.get(s))))
                .collect::<serde_json::Map<_, _>>()
                .into();
        }
        format!("{doc:#}\n")
    } else {
        let mut out = String::new();
        for &s in &states {
            let v = report.result.get(s);
            out += &format!("{} {v:.6}", labels[s]);
            if a.dollars {
                out += &format!(" {:.2}", 10.0 * v);
            }
            out.push('\n');
        }
        out + &stats_lines(&report)
    };
    if report.converged {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure::NonConvergence("evaluation did not converge".into()))
    }
}

fn cmd_synthesize(a: &SynthesizeArgs) -> Outcome {
    let (model, phi) = load(&a.input)?;
    let syn = synthesize(&phi, &model, &a.tuning.config())?;
    let file = strategy_to_json(&syn.strategy, &phi);
    let mut out = String::new();
    match &a.out {
        Some(path) => fs::write(path, &file).map_err(|e| input(format!("{}: {e}", path.display())))?,
        None => out += &file,
    }
    if syn.repaired > 0 {
        eprintln!("{} tied choices repaired", syn.repaired);
    }
    if a.out.is_some() {
        for (label, v) in model.space.labels().iter().zip(syn.value.values()) {
            out += &format!("{label} {v:.6}\n");
        }
    }
    Ok(out)
}

fn cmd_simulate(a: &SimulateArgs) -> Outcome {
    let (model, phi) = load(&a.input)?;
    let s0 = state_index(&model, &a.state)?;
    let strategy = match &a.strategy {
        Some(path) => strategy_from_json(&read(path)?, &phi, model.size())?,
        None => synthesize(&phi, &model, &EvalConfig::default())?.strategy,
    };
    let est = estimate(
        &phi,
        &model,
        s0,
        &strategy.min_side(),
        &strategy.max_side(),
        a.paths,
        a.max_depth,
        a.seed,
    )
    .map_err(input)?;
    if a.json {
        let mut doc = json!({
            "state": a.state,
            "paths": est.n_paths,
            "seed": a.seed,
            "max_depth": a.max_depth,
            "mean_low": est.mean_low,
            "mean_high": est.mean_high,
            "std_error": est.std_error,
            "truncated": est.n_truncated,
        });
        if a.dollars {
            doc["dollars"] = json!([10.0 * est.mean_low, 10.0 * est.mean_high]);
        }
        return Ok(format!("{doc:#}\n"));
    }
    let mut out = format!(
        "mean [{:.6}, {:.6}] se {:.6} truncated {}/{}\n",
        est.mean_low, est.mean_high, est.std_error, est.n_truncated, est.n_paths
    );
    if a.dollars {
        out += &format!("dollars [{:.2}, {:.2}]\n", 10.0 * est.mean_low, 10.0 * est.mean_high);
    }
    Ok(out)
}

fn swap_junctions(phi: &Formula) -> Formula {
    let go = |f: &Formula| Box::new(swap_junctions(f));
    match phi {
        Formula::MaxJ { site, left, right } => Formula::MinJ {
            site: *site,
            left: go(left),
            right: go(right),
        },
        Formula::MinJ { site, left, right } => Formula::MaxJ {
            site: *site,
            left: go(left),
            right: go(right),
        },
        Formula::Modal { transition, body } => Formula::Modal {
            transition: transition.clone(),
            body: go(body),
        },
        Formula::Cond {
            predicate,
            then,
            otherwise,
        } => Formula::Cond {
            predicate: predicate.clone(),
            then: go(then),
            otherwise: go(otherwise),
        },
        Formula::Fixpoint { kind, var, body } => Formula::Fixpoint {
            kind: *kind,
            var: var.clone(),
            body: go(body),
        },
        other => other.clone(),
    }
}

fn faulty(phi: &Formula, model: &Model, cfg: &EvalConfig) -> Result<Expectation, EvalError> {
    kozen(&swap_junctions(phi).numbered(), model, cfg)
}

fn cmd_crosscheck(a: &CrosscheckArgs) -> Outcome {
    let bounds = a.size.unwrap_or_default();
    if let Some(dir) = &a.dump {
        fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    }
    let evaluator: &qmu::oracle::Evaluator = if a.inject_fault { &faulty } else { &kozen };
    let cfg = EvalConfig::default();
    let report = crosscheck(a.count, a.seed, &bounds, &cfg, 1e-6, evaluator, a.dump.as_deref()).map_err(input)?;
    let mut out = report.summary() + "\n";
    for c in &report.failures {
        out += &format!("seed {} gap {:.3e}: {}\n", c.seed, c.gap, c.instance.phi);
        for f in &c.files {
            out += &format!("  wrote {}\n", f.display());
        }
    }
    if report.passed() {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure::Property(format!("{} of {} checks failed", report.failures.len(), report.checks)))
    }
}

fn cmd_example(a: &ExampleArgs) -> Outcome {
    let (name, model, phi) = match a.name {
        ExampleName::Futures => ("futures", futures_model(), futures_formula()),
        ExampleName::Vardi => {
            let (m, f) = vardi_model();
            ("vardi", m, f)
        }
    };
    if let Some(table) = &a.table {
        if matches!(a.name, ExampleName::Vardi) {
            return Err(input("tables are only defined for the futures example"));
        }
        let tables = futures_tables(&EvalConfig::default(), &[table.as_str()]).map_err(input)?;
        let t = &tables[0];
        return Ok(if a.json { format!("{:#}\n", t.to_json()) } else { t.to_csv() });
    }
    let Some(dir) = &a.out else {
        return Ok(model_to_json(&model));
    };
    fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    let mut out = String::new();
    for (file, body) in [
        (format!("{name}.json"), model_to_json(&model)),
        (format!("{name}.qmu"), format!("{phi}\n")),
    ] {
        let path = dir.join(file);
        fs::write(&path, body).map_err(|e| input(format!("{}: {e}", path.display())))?;
        out += &format!("wrote {}\n", path.display());
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Crosscheck(a) => cmd_crosscheck(a),
        Command::Example(a) => cmd_example(a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_parse_partially() {
        let b = parse_bounds("states=2,binders=1").unwrap();
        assert_eq!((b.max_states, b.max_binders), (2, 1));
        assert_eq!(b.max_min_sites, SizeBounds::default().max_min_sites);
        assert!(parse_bounds("depth=3").is_err());
        assert!(parse_bounds("states").is_err());
    }

    #[test]
    fn fault_swaps_every_junction() {
        let phi = parse("mu X . {k} a \\/ ({k} X /\\ b)").unwrap();
        assert_eq!(swap_junctions(&phi).to_string(), "mu X . {k} a /\\ ({k} X \\/ b)");
    }
}
