//! Command-line pipeline: read, normalize, analyze, encode, solve, decode.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{dump_analysis, relevant_values, LookupTables};
use crate::encoder::{encode, CnfDocument, EncodeOptions, VarMap};
use crate::frontend::{emit_facts, normalize_comparisons, parse_facts, parse_native};
use crate::model::{Assignment, Instance, Val};
use crate::oracle::check;
use crate::solver::{decode, enumerate, parse_model, solve, write_dimacs, Heuristic, SolveResult, SolverConfig};

pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_PIPELINE: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Native,
    Facts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeuristicArg {
    Activity,
    Fixed,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "ordcsp", version, about = "Order-encoding CSP compiler and solver")]
pub struct RunConfig {
    #[command(subcommand)]
    pub mode: Mode,
    /// Input format
    #[arg(long, value_enum, default_value = "native", global = true)]
    pub format: Format,
    /// Pigeon-hole counters for alldifferent
    #[arg(long, value_enum, default_value = "on", global = true)]
    pub ph: Switch,
    #[arg(long, value_enum, default_value = "activity", global = true)]
    pub heuristic: HeuristicArg,
    /// Seed for solver tie-breaking
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Give up after this many conflicts per solver call
    #[arg(long, global = true)]
    pub conflict_limit: Option<u64>,
    /// Write the main output here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Input {
    pub input: PathBuf,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Mode {
    /// Print one solution or UNSAT
    Solve(Input),
    /// Print solutions separated by blank lines
    Enumerate {
        #[command(flatten)]
        input: Input,
        #[arg(long, conflicts_with = "limit")]
        all: bool,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Write the CNF in DIMACS format
    EncodeOnly(Input),
    /// Print the normalized instance as facts
    EmitFacts(Input),
    /// Print the lookup tables of the value analysis
    DumpAnalysis(Input),
    /// Check an assignment file (`NAME = VALUE` lines)
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        assignment: PathBuf,
    },
    /// Decode a model of the DIMACS encoding produced by an external solver
    Decode {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        model: PathBuf,
    },
}

impl Mode {
    fn input(&self) -> &Input {
        match self {
            Mode::Solve(i) | Mode::EncodeOnly(i) | Mode::EmitFacts(i) | Mode::DumpAnalysis(i) => i,
            Mode::Enumerate { input, .. } | Mode::Check { input, .. } | Mode::Decode { input, .. } => {
                input
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure(i32, String);

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(EXIT_IO, format!("{}: {e}", path.display())))
}

fn parse_assignment(text: &str) -> Result<Assignment, Failure> {
    let mut a = Assignment::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let bad = || Failure(EXIT_PARSE, format!("assignment line {}: expected `NAME = VALUE`", i + 1));
        let (name, value) = line.split_once('=').ok_or_else(bad)?;
        let value = match value.trim() {
            "true" => Val::Bool(true),
            "false" => Val::Bool(false),
            v => Val::Int(v.parse().map_err(|_| bad())?),
        };
        a.set(name.trim(), value);
    }
    Ok(a)
}

struct Compiled {
    original: Instance,
    normalized: Instance,
    cnf: CnfDocument,
    map: VarMap,
}

struct Pipeline<'a> {
    cfg: &'a RunConfig,
    stderr: String,
}

impl Pipeline<'_> {
    fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let r = f();
        let _ = writeln!(self.stderr, "{phase}: {:.6} s", start.elapsed().as_secs_f64());
        r
    }

    fn load(&mut self) -> Result<(Instance, Instance), Failure> {
        let text = read(&self.cfg.mode.input().input)?;
        let format = self.cfg.format;
        self.timed("convert", || {
            let inst = match format {
                Format::Native => parse_native(&text),
                Format::Facts => parse_facts(&text),
            }
            .map_err(|e| Failure(EXIT_PARSE, e.to_string()))?;
            let normalized = normalize_comparisons(&inst).map_err(|e| Failure(EXIT_PIPELINE, e.to_string()))?;
            Ok((inst, normalized))
        })
    }

    fn analyze(&mut self, inst: &Instance) -> Result<LookupTables, Failure> {
        self.timed("analyze", || relevant_values(inst).map_err(|e| Failure(EXIT_PIPELINE, e.to_string())))
    }

    fn compile(&mut self) -> Result<Compiled, Failure> {
        let (original, normalized) = self.load()?;
        let tables = self.analyze(&normalized)?;
        let opts = EncodeOptions {
            ph: self.cfg.ph == Switch::On,
        };
        let (cnf, map) = self.timed("encode", || {
            encode(&normalized, &tables, opts).map_err(|e| Failure(EXIT_PIPELINE, e.to_string()))
        })?;
        Ok(Compiled {
            original,
            normalized,
            cnf,
            map,
        })
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            heuristic: match self.cfg.heuristic {
                HeuristicArg::Activity => Heuristic::Activity,
                HeuristicArg::Fixed => Heuristic::Fixed,
            },
            conflict_limit: self.cfg.conflict_limit,
            seed: self.cfg.seed,
            ..SolverConfig::default()
        }
    }
}

/// Restricts a solution to the variables of the input instance.
fn project(a: &Assignment, inst: &Instance) -> Assignment {
    let mut out = Assignment::new();
    for (name, val) in a.iter() {
        if inst.variables.contains_key(name) {
            out.set(name.clone(), *val);
        }
    }
    out
}

fn execute(cfg: &RunConfig, p: &mut Pipeline<'_>) -> Result<(i32, String), Failure> {
    match &cfg.mode {
        Mode::EmitFacts(_) => {
            let (_, normalized) = p.load()?;
            let facts = emit_facts(&normalized).map_err(|e| Failure(EXIT_PIPELINE, e.to_string()))?;
            Ok((0, facts))
        }
        Mode::DumpAnalysis(_) => {
            let (_, normalized) = p.load()?;
            let tables = p.analyze(&normalized)?;
            Ok((0, dump_analysis(&tables)))
        }
        Mode::Check { assignment, .. } => {
            let (original, _) = p.load()?;
            let a = parse_assignment(&read(assignment)?)?;
            let report = check(&original, &a).map_err(|e| Failure(EXIT_PIPELINE, e.to_string()))?;
            let mut out = String::new();
            for (id, ok) in &report.clauses {
                let _ = writeln!(out, "{id}: {}", if *ok { "satisfied" } else { "violated" });
                for (lit, val) in report.failing.get(id).into_iter().flatten() {
                    let _ = writeln!(out, "  {lit}: {val}");
                }
            }
            let _ = writeln!(out, "overall: {}", report.overall);
            Ok((if report.overall { 0 } else { EXIT_VIOLATED }, out))
        }
        Mode::EncodeOnly(_) => {
            let c = p.compile()?;
            Ok((0, write_dimacs(&c.cnf)))
        }
        Mode::Decode { model, .. } => {
            let c = p.compile()?;
            let m = parse_model(&read(model)?, c.cnf.num_vars).map_err(|e| Failure(EXIT_PARSE, e.to_string()))?;
            let a = decode(&m, &c.map, &c.normalized).map_err(|e| Failure(EXIT_PIPELINE, e.to_string()))?;
            Ok((0, project(&a, &c.original).to_string()))
        }
        Mode::Solve(_) => {
            let c = p.compile()?;
            let scfg = p.solver_config();
            let result = p.timed("solve", || solve(&c.cnf, &scfg));
            match result {
                SolveResult::Sat(m) => {
                    let a = decode(&m, &c.map, &c.normalized).map_err(|e| Failure(EXIT_PIPELINE, e.to_string()))?;
                    Ok((EXIT_SAT, project(&a, &c.original).to_string()))
                }
                SolveResult::Unsat => Ok((EXIT_UNSAT, "UNSAT\n".into())),
                SolveResult::Unknown => Ok((0, "UNKNOWN\n".into())),
            }
        }
        Mode::Enumerate { limit, .. } => {
            let c = p.compile()?;
            let scfg = p.solver_config();
            let extra = c.normalized.variables.len() != c.original.variables.len();
            let inner_limit = if extra { None } else { *limit };
            let sols = p
                .timed("solve", || enumerate(&c.cnf, &c.map, &c.normalized, inner_limit, &scfg))
                .map_err(|e| Failure(EXIT_PIPELINE, e.to_string()))?;
            let mut seen = BTreeSet::new();
            let mut parts = Vec::new();
            for s in &sols {
                let s = project(s, &c.original);
                if limit.is_some_and(|l| parts.len() >= l) {
                    break;
                }
                if seen.insert(s.clone()) {
                    parts.push(s.to_string());
                }
            }
            if parts.is_empty() {
                return Ok((EXIT_UNSAT, "UNSAT\n".into()));
            }
            Ok((EXIT_SAT, parts.join("\n")))
        }
    }
}

/// Runs one command. Output destined for `--out` is written there.
pub fn run(cfg: &RunConfig) -> RunOutput {
    let mut p = Pipeline {
        cfg,
        stderr: String::new(),
    };
    let (code, main) = match execute(cfg, &mut p) {
        Ok(r) => r,
        Err(Failure(code, msg)) => {
            let _ = writeln!(p.stderr, "error: {msg}");
            return RunOutput {
                code,
                stdout: String::new(),
                stderr: p.stderr,
            };
        }
    };
    let mut out = RunOutput {
        code,
        stdout: String::new(),
        stderr: p.stderr,
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &main) {
                let _ = writeln!(out.stderr, "error: {}: {e}", path.display());
                out.code = EXIT_IO;
            }
        }
        None => out.stdout = main,
    }
    out
}

/// Parses `args` (program name first) and runs the command.
pub fn run_args<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                RunOutput {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                RunOutput {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            }
        }
    }
}
