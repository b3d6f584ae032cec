use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use symwcet::analysis::{Analysis, AnalysisError};
use symwcet::cfg::ProgramDoc;
use symwcet::oracle::{check_path_inclusion, check_soundness, Budget, OracleError};
use symwcet::symbolic::{evaluate, Bindings, Simplifier, SymbolicError, Value, DEFAULT_FUEL};
use symwcet::{Awcet, Cycles, WcetFormula};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Validate the document and its loop structure.
    Check,
    /// Print the control-flow tree.
    Tree,
    /// Print the simplified WCET formula.
    Formula,
    /// Evaluate the WCET under complete bindings.
    Wcet,
    /// Evaluate the WCET over a range of one parameter.
    Sweep,
    /// Cross-check the analysis against path enumeration.
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Parametric WCET analysis of reducible control-flow graphs.
#[derive(Debug, Parser)]
#[command(name = "symwcet", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Program document (JSON).
    #[arg(long, short)]
    input: PathBuf,
    /// Bind an identifier: an integer, a WCET such as `(l=TOP,[5|2])`, or a loop header.
    #[arg(long = "bind", value_name = "ID=VALUE")]
    bindings: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Path budget for the oracle.
    #[arg(long, value_name = "N", default_value_t = 1_000_000)]
    max_paths: usize,
    /// Rewrite steps allowed per simplification.
    #[arg(long, value_name = "N", env = "SYMWCET_FUEL", default_value_t = DEFAULT_FUEL)]
    fuel: usize,
    /// Parameter range for `sweep`, inclusive.
    #[arg(long, value_name = "ID=LO..HI")]
    sweep: Option<String>,
    /// Also evaluate the unsimplified formula and compare.
    #[arg(long)]
    self_check: bool,
    /// Report operand counts before and after simplification.
    #[arg(long)]
    stats: bool,
}

/// A failed consistency check, reported with exit code 4.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<CheckFailed>() {
            return 4;
        }
        if let Some(e) = cause.downcast_ref::<AnalysisError>() {
            if e.is_irreducible() {
                return 2;
            }
        }
        if matches!(
            cause.downcast_ref::<OracleError>(),
            Some(OracleError::PathBudgetExceeded { .. })
        ) || matches!(
            cause.downcast_ref::<SymbolicError>(),
            Some(SymbolicError::FuelExhausted(_))
        ) {
            return 3;
        }
    }
    1
}

fn parse_binding(text: &str) -> Result<(String, Value<Cycles>)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| anyhow!("binding `{text}` is not of the form ID=VALUE"))?;
    let (k, v) = (k.trim().trim_start_matches('$'), v.trim());
    if k.is_empty() || v.is_empty() {
        bail!("binding `{text}` is not of the form ID=VALUE");
    }
    let value = if let Ok(n) = v.parse::<u64>() {
        Value::Int(n)
    } else if v.starts_with('(') {
        Value::Wcet(
            v.parse::<Awcet>()
                .with_context(|| format!("invalid WCET in binding `{text}`"))?,
        )
    } else {
        Value::Loop(v.to_string())
    };
    Ok((k.to_string(), value))
}

fn parse_sweep(text: &str) -> Result<(String, u64, u64)> {
    let bad = || anyhow!("sweep `{text}` is not of the form ID=LO..HI");
    let (id, range) = text.split_once('=').ok_or_else(bad)?;
    let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
    let (lo, hi): (u64, u64) = (
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    );
    if id.trim().is_empty() {
        return Err(bad());
    }
    if lo > hi {
        bail!("sweep range {lo}..{hi} is empty");
    }
    Ok((id.trim().to_string(), lo, hi))
}

struct Session {
    cli: Cli,
    text: String,
    bindings: Bindings<Cycles>,
}

impl Session {
    fn analysis(&self) -> Result<Analysis> {
        Ok(Analysis::parse(&self.text)?)
    }

    fn simplify(&self, analysis: &Analysis, w: &WcetFormula) -> Result<(WcetFormula, usize)> {
        let mut s = Simplifier::new(&analysis.forest, self.cli.fuel);
        let out = s.normalize(w)?;
        Ok((out, s.steps()))
    }

    fn emit(&self, text: impl FnOnce() -> String, value: serde_json::Value) {
        match self.cli.format {
            Format::Text => println!("{}", text()),
            Format::Json => println!("{value}"),
        }
    }

    fn check(&self) -> Result<()> {
        let a = self.analysis()?;
        let g = &a.program.cfg;
        let loops: Vec<_> = a
            .forest
            .loops()
            .iter()
            .map(|l| {
                let bound = a
                    .program
                    .loop_bounds
                    .get(&l.header_id)
                    .map(|b| b.to_string());
                json!({"header": l.header_id, "blocks": l.body.len(), "bound": bound})
            })
            .collect();
        self.emit(
            || {
                format!(
                    "ok: {}: {} blocks, {} edges, {} loops",
                    a.program.name,
                    g.len(),
                    g.edges().len(),
                    loops.len()
                )
            },
            json!({"name": a.program.name, "valid": true, "reducible": true, "blocks": g.len(),
                   "edges": g.edges().len(), "loops": loops}),
        );
        Ok(())
    }

    fn tree(&self) -> Result<()> {
        let a = self.analysis()?;
        let s = a.tree.to_sexpr();
        self.emit(
            || s.clone(),
            json!({"tree": s, "labels": a.tree.to_sexpr_labels()}),
        );
        Ok(())
    }

    fn formula(&self) -> Result<()> {
        let a = self.analysis()?;
        let raw: WcetFormula = a.raw_formula()?;
        let bound = symwcet::symbolic::substitute(&raw, &self.bindings)?;
        let (w, steps) = self.simplify(&a, &bound)?;
        let (initial, fin) = (raw.operand_count(), w.operand_count());
        self.emit(
            || {
                if self.cli.stats {
                    format!("{w}\ninitial operands: {initial}\nfinal operands: {fin}\nrewrite steps: {steps}")
                } else {
                    w.to_string()
                }
            },
            json!({"formula": w.to_string(), "initial_operands": initial, "final_operands": fin, "steps": steps}),
        );
        Ok(())
    }

    /// Evaluates the simplified formula, and under `--self-check` the raw one too.
    fn instantiate(
        &self,
        a: &Analysis,
        simplified: &WcetFormula,
        raw: &WcetFormula,
        rho: &Bindings<Cycles>,
    ) -> Result<Cycles> {
        let v = *evaluate(simplified, rho, &a.forest)?.wcet();
        if self.cli.self_check {
            let r = *evaluate(raw, rho, &a.forest)?.wcet();
            if r != v {
                return Err(CheckFailed(format!(
                    "simplified formula gives {v}, unsimplified formula gives {r}"
                ))
                .into());
            }
        }
        Ok(v)
    }

    fn wcet(&self) -> Result<()> {
        let a = self.analysis()?;
        let raw: WcetFormula = a.raw_formula()?;
        let (w, _) = self.simplify(&a, &raw)?;
        let v = self.instantiate(&a, &w, &raw, &self.bindings)?;
        let rho: BTreeMap<&str, String> = self
            .bindings
            .iter()
            .map(|(k, v)| (k.as_str(), v.to_string()))
            .collect();
        self.emit(
            || v.to_string(),
            json!({"wcet": v, "bindings": rho, "self_check": self.cli.self_check}),
        );
        Ok(())
    }

    fn sweep(&self) -> Result<()> {
        let spec = self
            .cli
            .sweep
            .as_deref()
            .ok_or_else(|| anyhow!("`sweep` needs --sweep ID=LO..HI"))?;
        let (id, lo, hi) = parse_sweep(spec)?;
        let a = self.analysis()?;
        let raw: WcetFormula = a.raw_formula()?;
        let (w, _) = self.simplify(&a, &raw)?;
        let rows = (lo..=hi)
            .into_par_iter()
            .map(|n| {
                let mut rho = self.bindings.clone();
                rho.insert(id.clone(), Value::Int(n));
                Ok((n, self.instantiate(&a, &w, &raw, &rho)?))
            })
            .collect::<Result<Vec<_>>>()?;
        match self.cli.format {
            Format::Text => {
                println!("{id},wcet");
                for (n, v) in &rows {
                    println!("{n},{v}");
                }
            }
            Format::Json => {
                let rows: Vec<_> = rows
                    .iter()
                    .map(|(n, v)| json!({"value": n, "wcet": v}))
                    .collect();
                println!("{}", json!({"parameter": id, "rows": rows}));
            }
        }
        Ok(())
    }

    fn oracle(&self) -> Result<()> {
        let mut doc: ProgramDoc =
            serde_json::from_str(&self.text).context("reading the program document")?;
        let ints: BTreeMap<String, u64> = self
            .bindings
            .iter()
            .filter_map(|(k, v)| match v {
                Value::Int(n) => Some((k.clone(), *n)),
                _ => None,
            })
            .collect();
        doc.bind(&ints);
        let program = symwcet::cfg::Program::from_doc(doc).map_err(AnalysisError::from)?;
        let a = Analysis::new(program)?;
        let budget = Budget {
            max_paths: self.cli.max_paths,
            max_nodes: self.cli.max_paths.saturating_mul(10),
        };
        let inclusion = check_path_inclusion(&a.program.cfg, &a.forest, &a.base_tree, budget)?;
        let soundness = check_soundness(&a.tree, &a.forest, budget)?;
        let passed = inclusion.passed() && soundness.passed();
        println!(
            "{}",
            json!({"name": a.program.name, "passed": passed, "budget": budget,
                   "inclusion": inclusion, "soundness": soundness})
        );
        if !passed {
            return Err(CheckFailed("oracle check failed".into()).into());
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    let text = fs::read_to_string(&cli.input)
        .with_context(|| format!("reading {}", cli.input.display()))?;
    let bindings = cli
        .bindings
        .iter()
        .map(|b| parse_binding(b))
        .collect::<Result<Bindings<Cycles>>>()?;
    let session = Session {
        cli,
        text,
        bindings,
    };
    match session.cli.command {
        Command::Check => session.check(),
        Command::Tree => session.tree(),
        Command::Formula => session.formula(),
        Command::Wcet => session.wcet(),
        Command::Sweep => session.sweep(),
        Command::Oracle => session.oracle(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
