//! `plausim`: command-line front end for the plausibility-model toolkit.
//!
//! Every subcommand maps onto one library operation, takes models either
//! from a JSON file or by fixture reference (`fixture:MC`, `fixture:MK?k=3`),
//! and produces deterministic output. `--format json` wraps results in an
//! envelope; the envelope shapes are published in docs/cli-output.schema.json.
//! Model-producing commands also accept `--format dot`.
//!
//! Exit codes: 0 success (verdicts like "false" or "not bisimilar" are
//! successes), 1 usage error, 2 input validation/parse error, 3 semantic
//! error (unknown world, bisimilar worlds passed to `distinguish`),
//! 4 exhaustive-search bound exceeded.

use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use plausim::bisim::{
    contract, largest_autobisimulation, maximal_cross_bisimulation, normalize, EngineError,
};
use plausim::distinguish::{distinguishing_formula, DistinguishError};
use plausim::fixtures::{fixture_model, FixtureError, FixtureId};
use plausim::model::{load_model, parse_model_json, ModelError};
use plausim::oracle::{
    oracle_largest_bounded, random_model, ModelBounds, OracleError, DEFAULT_ORACLE_BOUND,
};
use plausim::parser::{parse, ParseError};
use plausim::semantics::{extension, satisfies, SemError};
use plausim::translate::{cond_to_degrees, cond_to_safe, expand_knowledge, TranslateError};
use plausim::{PlausibilityModel, SemanticsMode, WorldId};

#[derive(Parser)]
#[command(
    name = "plausim",
    version,
    about = "Plausibility models: model checking, bisimulation, and belief-language translations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a model against the plausibility invariants
    Validate {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Decide a formula at one world
    Check {
        #[command(flatten)]
        model: ModelArg,
        /// World to evaluate at
        #[arg(long)]
        world: String,
        /// Formula text, e.g. "B[a | ~B[b] q] K[b] ~q"
        #[arg(long)]
        formula: String,
        #[command(flatten)]
        semantics: SemanticsArg,
        #[command(flatten)]
        format: FormatArg,
    },
    /// List the worlds where a formula holds
    Extension {
        #[command(flatten)]
        model: ModelArg,
        /// Formula text
        #[arg(long)]
        formula: String,
        #[command(flatten)]
        semantics: SemanticsArg,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Decide whether two pointed models are bisimilar
    Bisim {
        #[command(flatten)]
        model: ModelArg,
        /// Distinguished world of the first model
        #[arg(long)]
        world: String,
        /// Second model (file or fixture reference)
        #[arg(long)]
        model2: String,
        /// Distinguished world of the second model
        #[arg(long)]
        world2: String,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Quotient a model by its largest autobisimulation
    Contract {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Replace each plausibility relation by its normal refinement
    Normalize {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Translate a formula between the belief languages
    Translate {
        /// Translation direction
        #[arg(long, value_enum)]
        direction: Direction,
        /// Formula text (required except for the no-translation directions)
        #[arg(long)]
        formula: Option<String>,
        /// Context model for cond-to-degrees
        #[arg(long)]
        model: Option<String>,
        /// Context world for cond-to-degrees
        #[arg(long)]
        world: Option<String>,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Print a named example model
    Fixture {
        /// Fixture id: ML, MC, MR, P, Pprime, EXP_CD_M, EXP_CD_Mprime,
        /// EXP_S_M, EXP_S_Mprime, MK?k=N, NK?k=N, DEMEY_CHAIN?k=N
        id: String,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Exhaustive reference computations
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Construct a formula telling two worlds of one model apart
    Distinguish {
        #[command(flatten)]
        model: ModelArg,
        /// World the formula must satisfy
        #[arg(long)]
        world: String,
        /// World the formula must refute
        #[arg(long)]
        world2: String,
        #[command(flatten)]
        format: FormatArg,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Largest autobisimulation by exhaustive partition search
    Largest {
        #[command(flatten)]
        model: ModelArg,
        /// World-count cap on the exhaustive search
        #[arg(long = "max-brute", default_value_t = DEFAULT_ORACLE_BOUND)]
        max_brute: usize,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Compare engine and oracle over a stream of seeded random models
    Fuzz {
        /// How many models to try
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// First seed of the stream
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        format: FormatArg,
    },
}

#[derive(Args)]
struct ModelArg {
    /// Model JSON file, or fixture reference like fixture:MC or fixture:MK?k=3
    #[arg(long)]
    model: String,
}

#[derive(Args)]
struct FormatArg {
    /// Output format
    #[arg(long, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Json,
    Dot,
}

#[derive(Args)]
struct SemanticsArg {
    /// Plausibility reading: the normal relation, or the raw one
    #[arg(long, value_enum, default_value_t = Semantics::Normal)]
    semantics: Semantics,
}

#[derive(Copy, Clone, ValueEnum)]
enum Semantics {
    Normal,
    Raw,
}

impl Semantics {
    fn mode(self) -> SemanticsMode {
        match self {
            Semantics::Normal => SemanticsMode::Normal,
            Semantics::Raw => SemanticsMode::Raw,
        }
    }
    fn name(self) -> &'static str {
        match self {
            Semantics::Normal => "normal",
            Semantics::Raw => "raw",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Direction {
    /// Conditional belief to safe belief (model-free)
    #[value(name = "cond-to-safe", alias = "c2s")]
    CondToSafe,
    /// Conditional belief to degrees of belief (needs --model and --world)
    #[value(name = "cond-to-degrees", alias = "c2d")]
    CondToDegrees,
    /// Rewrite every knowledge operator as conditional belief
    #[value(name = "expand-knowledge", alias = "kexp")]
    ExpandKnowledge,
    /// Degrees of belief to conditional belief
    #[value(name = "degrees-to-cond", alias = "d2c")]
    DegreesToCond,
    /// Safe belief to conditional belief
    #[value(name = "safe-to-cond", alias = "s2c")]
    SafeToCond,
}

impl Direction {
    fn name(self) -> &'static str {
        match self {
            Direction::CondToSafe => "cond-to-safe",
            Direction::CondToDegrees => "cond-to-degrees",
            Direction::ExpandKnowledge => "expand-knowledge",
            Direction::DegreesToCond => "degrees-to-cond",
            Direction::SafeToCond => "safe-to-cond",
        }
    }
}

/// Successful command output: the text for stdout plus the process exit code
/// (nonzero only for `validate` on an invalid model, where the verdict itself
/// is the output).
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }
}

enum CliError {
    Usage(String),
    Input(String),
    Semantic(String),
    Bound(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Semantic(_) => 3,
            CliError::Bound(_) => 4,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Semantic(m) | CliError::Bound(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match &e {
            // names that parsed but do not denote anything in the model
            ModelError::UnknownWorld(_) | ModelError::UnknownAgent(_) | ModelError::MultiClass(_, _) => {
                CliError::Semantic(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<FixtureError> for CliError {
    fn from(e: FixtureError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SemError> for CliError {
    fn from(e: SemError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

impl From<TranslateError> for CliError {
    fn from(e: TranslateError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

impl From<DistinguishError> for CliError {
    fn from(e: DistinguishError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::DomainTooLarge { .. } => CliError::Bound(e.to_string()),
            OracleError::NoLargest => CliError::Semantic(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cmd: Cmd) -> Result<Outcome, CliError> {
    match cmd {
        Cmd::Validate { model, format } => run_validate(&model.model, format.format),
        Cmd::Check { model, world, formula, semantics, format } => {
            no_dot(format.format, "check")?;
            let m = load(&model.model)?;
            let w = world_id(&world)?;
            let f = parse(&formula)?;
            let value = satisfies(&m, &w, &f, semantics.semantics.mode())?;
            Ok(Outcome::ok(match format.format {
                OutFormat::Text => format!("{value}\n"),
                _ => pretty(&json!({
                    "command": "check",
                    "model": model.model,
                    "world": world,
                    "formula": f.to_string(),
                    "semantics": semantics.semantics.name(),
                    "value": value,
                })),
            }))
        }
        Cmd::Extension { model, formula, semantics, format } => {
            no_dot(format.format, "extension")?;
            let m = load(&model.model)?;
            let f = parse(&formula)?;
            let ext = extension(&m, &f, semantics.semantics.mode())?;
            // model order, not set order, so output lines up with the input document
            let worlds: Vec<&WorldId> = m.worlds().iter().filter(|w| ext.contains(w)).collect();
            Ok(Outcome::ok(match format.format {
                OutFormat::Text => {
                    let mut s = String::new();
                    for w in worlds {
                        let _ = writeln!(s, "{w}");
                    }
                    s
                }
                _ => pretty(&json!({
                    "command": "extension",
                    "model": model.model,
                    "formula": f.to_string(),
                    "semantics": semantics.semantics.name(),
                    "worlds": worlds.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                })),
            }))
        }
        Cmd::Bisim { model, world, model2, world2, format } => {
            no_dot(format.format, "bisim")?;
            let m1 = load(&model.model)?;
            let m2 = load(&model2)?;
            let w1 = require_world(&m1, &world)?;
            let w2 = require_world(&m2, &world2)?;
            let relation = maximal_cross_bisimulation(&m1, &m2)?;
            let verdict = relation.contains(&(w1, w2));
            Ok(Outcome::ok(match format.format {
                OutFormat::Text => {
                    if verdict {
                        let mut s = String::from("bisimilar\n");
                        for (x, y) in &relation {
                            let _ = writeln!(s, "{x} {y}");
                        }
                        s
                    } else {
                        "not bisimilar\n".to_owned()
                    }
                }
                _ => {
                    let mut env = json!({
                        "command": "bisim",
                        "model": model.model,
                        "world": world,
                        "model2": model2,
                        "world2": world2,
                        "bisimilar": verdict,
                    });
                    if verdict {
                        env["relation"] = relation
                            .iter()
                            .map(|(x, y)| json!([x.to_string(), y.to_string()]))
                            .collect();
                    }
                    pretty(&env)
                }
            }))
        }
        Cmd::Contract { model, format } => {
            let m = load(&model.model)?;
            let (c, map) = contract(&m)?;
            Ok(Outcome::ok(match format.format {
                OutFormat::Text => c.to_json(),
                OutFormat::Dot => dot(&c),
                OutFormat::Json => {
                    let map: serde_json::Map<String, Value> = map
                        .iter()
                        .map(|(from, to)| (from.to_string(), Value::String(to.to_string())))
                        .collect();
                    pretty(&json!({
                        "command": "contract",
                        "model": model.model,
                        "result": model_value(&c),
                        "map": map,
                    }))
                }
            }))
        }
        Cmd::Normalize { model, format } => {
            let m = load(&model.model)?;
            let n = normalize(&m)?;
            Ok(Outcome::ok(match format.format {
                OutFormat::Text => n.to_json(),
                OutFormat::Dot => dot(&n),
                OutFormat::Json => pretty(&json!({
                    "command": "normalize",
                    "model": model.model,
                    "result": model_value(&n),
                })),
            }))
        }
        Cmd::Translate { direction, formula, model, world, format } => {
            run_translate(direction, formula, model, world, format.format)
        }
        Cmd::Fixture { id, format } => {
            let parsed = FixtureId::parse(&id)?;
            let m = fixture_model(parsed)?;
            Ok(Outcome::ok(match format.format {
                OutFormat::Text => m.to_json(),
                OutFormat::Dot => dot(&m),
                OutFormat::Json => pretty(&json!({
                    "command": "fixture",
                    "id": parsed.to_string(),
                    "result": model_value(&m),
                })),
            }))
        }
        Cmd::Oracle { cmd } => run_oracle(cmd),
        Cmd::Distinguish { model, world, world2, format } => {
            no_dot(format.format, "distinguish")?;
            let m = load(&model.model)?;
            let w = world_id(&world)?;
            let v = world_id(&world2)?;
            let f = distinguishing_formula(&m, &w, &v)?;
            Ok(Outcome::ok(match format.format {
                OutFormat::Text => format!("{f}\n"),
                _ => pretty(&json!({
                    "command": "distinguish",
                    "model": model.model,
                    "world": world,
                    "world2": world2,
                    "formula": f.to_string(),
                })),
            }))
        }
    }
}

fn run_validate(model: &str, format: OutFormat) -> Result<Outcome, CliError> {
    no_dot(format, "validate")?;
    // parse without the validity gate so violations are reported, not erred
    let m = match model.strip_prefix("fixture:") {
        Some(id) => fixture_model(FixtureId::parse(id)?)?,
        None => parse_model_json(&read(model)?)?,
    };
    let violations: Vec<String> = m.validate().iter().map(|v| v.to_string()).collect();
    let valid = violations.is_empty();
    let text = match format {
        OutFormat::Text => {
            if valid {
                "valid\n".to_owned()
            } else {
                let mut s = String::from("invalid:\n");
                for v in &violations {
                    let _ = writeln!(s, "  {v}");
                }
                s
            }
        }
        _ => pretty(&json!({
            "command": "validate",
            "model": model,
            "valid": valid,
            "violations": violations,
        })),
    };
    Ok(Outcome { text, code: if valid { 0 } else { 2 } })
}

fn run_translate(
    direction: Direction,
    formula: Option<String>,
    model: Option<String>,
    world: Option<String>,
    format: OutFormat,
) -> Result<Outcome, CliError> {
    no_dot(format, "translate")?;
    if matches!(direction, Direction::DegreesToCond | Direction::SafeToCond) {
        let note = "no general translation exists";
        return Ok(Outcome::ok(match format {
            OutFormat::Text => format!("{note}\n"),
            _ => pretty(&json!({
                "command": "translate",
                "direction": direction.name(),
                "exists": false,
                "note": note,
            })),
        }));
    }
    let text = formula.ok_or_else(|| {
        CliError::Usage(format!("--direction {} requires --formula", direction.name()))
    })?;
    let f = parse(&text)?;
    let mut env = json!({
        "command": "translate",
        "direction": direction.name(),
        "exists": true,
        "input": f.to_string(),
    });
    let out = match direction {
        Direction::CondToSafe => cond_to_safe(&f)?,
        Direction::ExpandKnowledge => expand_knowledge(&f),
        Direction::CondToDegrees => {
            let (model, world) = match (model, world) {
                (Some(m), Some(w)) => (m, w),
                _ => {
                    return Err(CliError::Usage(
                        "--direction cond-to-degrees requires --model and --world".to_owned(),
                    ))
                }
            };
            let m = load(&model)?;
            let w = require_world(&m, &world)?;
            env["model"] = Value::String(model);
            env["world"] = Value::String(world);
            cond_to_degrees(&m, &w, &f)?
        }
        Direction::DegreesToCond | Direction::SafeToCond => unreachable!("handled above"),
    };
    Ok(Outcome::ok(match format {
        OutFormat::Text => format!("{out}\n"),
        _ => {
            env["output"] = Value::String(out.to_string());
            pretty(&env)
        }
    }))
}

fn run_oracle(cmd: OracleCmd) -> Result<Outcome, CliError> {
    match cmd {
        OracleCmd::Largest { model, max_brute, format } => {
            no_dot(format.format, "oracle largest")?;
            let m = load(&model.model)?;
            let blocks = oracle_largest_bounded(&m, max_brute)?;
            Ok(Outcome::ok(match format.format {
                OutFormat::Text => {
                    let mut s = String::new();
                    for b in &blocks {
                        let line: Vec<&str> = b.iter().map(|w| w.as_str()).collect();
                        let _ = writeln!(s, "{}", line.join(" "));
                    }
                    s
                }
                _ => pretty(&json!({
                    "command": "oracle",
                    "subcommand": "largest",
                    "model": model.model,
                    "blocks": blocks
                        .iter()
                        .map(|b| b.iter().map(|w| w.to_string()).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                })),
            }))
        }
        OracleCmd::Fuzz { seeds, seed, format } => {
            no_dot(format.format, "oracle fuzz")?;
            let bounds = ModelBounds::default();
            let mut disagreements = Vec::new();
            for s in seed..seed.saturating_add(seeds) {
                let m = random_model(s, &bounds);
                let engine = largest_autobisimulation(&m)
                    .map(blocks_strings)
                    .unwrap_or_else(|e| vec![vec![format!("error: {e}")]]);
                let oracle = oracle_largest_bounded(&m, bounds.max_worlds.max(1))
                    .map(blocks_strings)
                    .unwrap_or_else(|e| vec![vec![format!("error: {e}")]]);
                if engine != oracle {
                    disagreements.push(json!({
                        "seed": s,
                        "engine": engine,
                        "oracle": oracle,
                    }));
                }
            }
            Ok(Outcome::ok(match format.format {
                OutFormat::Text => {
                    if disagreements.is_empty() {
                        format!("checked {seeds} models from seed {seed}: no disagreements\n")
                    } else {
                        let mut s = format!(
                            "checked {seeds} models from seed {seed}: {} disagreements\n",
                            disagreements.len()
                        );
                        for d in &disagreements {
                            let _ = writeln!(s, "  seed {}", d["seed"]);
                        }
                        s
                    }
                }
                _ => pretty(&json!({
                    "command": "oracle",
                    "subcommand": "fuzz",
                    "start": seed,
                    "seeds": seeds,
                    "disagreements": disagreements,
                })),
            }))
        }
    }
}

fn blocks_strings(blocks: Vec<std::collections::BTreeSet<WorldId>>) -> Vec<Vec<String>> {
    blocks
        .iter()
        .map(|b| b.iter().map(|w| w.to_string()).collect())
        .collect()
}

/// Load a model from a file path or a `fixture:` reference, fully validated.
fn load(arg: &str) -> Result<PlausibilityModel, CliError> {
    match arg.strip_prefix("fixture:") {
        Some(id) => Ok(fixture_model(FixtureId::parse(id)?)?),
        None => Ok(load_model(&read(arg)?)?),
    }
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))
}

fn world_id(s: &str) -> Result<WorldId, CliError> {
    Ok(WorldId::new(s)?)
}

fn require_world(m: &PlausibilityModel, s: &str) -> Result<WorldId, CliError> {
    let w = world_id(s)?;
    if m.worlds().contains(&w) {
        Ok(w)
    } else {
        Err(CliError::Semantic(format!("unknown world {w}")))
    }
}

fn no_dot(format: OutFormat, cmd: &str) -> Result<(), CliError> {
    if format == OutFormat::Dot {
        return Err(CliError::Usage(format!(
            "--format dot is only available for model-producing commands (fixture, contract, normalize), not {cmd}"
        )));
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn model_value(m: &PlausibilityModel) -> Value {
    serde_json::from_str(&m.to_json()).expect("emitted model JSON parses")
}

/// GraphViz rendering: one node per world labelled with its valuation, one
/// edge per agent and non-reflexive plausibility pair (x -> y when x >= y,
/// so arrows point toward more plausible worlds).
fn dot(m: &PlausibilityModel) -> String {
    let mut s = String::from("digraph model {\n  node [shape=box];\n");
    for w in m.worlds() {
        let val = m.valuation(w).expect("declared world");
        let mut label = w.to_string();
        if !val.is_empty() {
            let props: Vec<&str> = val.iter().map(|p| p.as_str()).collect();
            label.push_str("\\n");
            label.push_str(&props.join(" "));
        }
        let _ = writeln!(s, "  \"{w}\" [label=\"{label}\"];");
    }
    for a in m.agents() {
        for x in m.worlds() {
            for y in m.worlds() {
                if x != y && m.ge(a, x, y).expect("declared worlds") {
                    let _ = writeln!(s, "  \"{x}\" -> \"{y}\" [label=\"{a}\"];");
                }
            }
        }
    }
    s.push_str("}\n");
    s
}
