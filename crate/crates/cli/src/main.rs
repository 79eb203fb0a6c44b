//! Thin shell around prov-core: reads a structure file and a formula,
//! runs one analysis, and prints `key: value` report lines. Exit codes
//! sort failures by kind: 1 malformed input, 2 capability mismatch,
//! 3 a size cap was hit, 4 the question does not apply.

use clap::{Args, Parser, Subcommand, ValueEnum};
use prov_core::*;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "prov",
    version,
    about = "Semiring provenance for first-order sentences over finite structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a sentence: classification, circuit, expanded provenance
    Eval(EvalArgs),
    /// List the justifications of a sentence that holds
    Explain(WhyArgs),
    /// List the causes of failure of a sentence that does not hold
    Whynot(WhyArgs),
    /// Minimal ways of changing the structure so the sentence holds
    Repairs(RepairsArgs),
    /// Provenance after a batch of insertions and deletions
    Update(UpdateArgs),
    /// Number of proof trees justifying the sentence
    Count(CountArgs),
    /// Evaluate the provenance polynomial under a token assignment
    Score(ScoreArgs),
    /// List proof trees up to a limit
    Trees(TreesArgs),
}

#[derive(Args)]
struct Common {
    /// Structure file: universe, relations, semiring, annotations
    #[arg(long, value_name = "FILE")]
    structure: PathBuf,

    #[command(flatten)]
    source: FormulaSource,

    /// Semiring to use instead of the one the file declares; for
    /// `score`, the target of the evaluation
    #[arg(long, value_name = "NAME")]
    semiring: Option<String>,

    /// Accept implication and equivalence connectives
    #[arg(long)]
    extended: bool,

    /// Largest expansion, in monomials, before giving up
    #[arg(long, value_name = "N", env = "PROV_EXPANSION_CAP")]
    cap: Option<usize>,

    /// Report style
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FormulaSource {
    /// The formula itself
    #[arg(long, value_name = "TEXT")]
    formula: Option<String>,

    /// File containing the formula
    #[arg(long, value_name = "FILE")]
    formula_file: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Output {
    /// Report lines with blank lines between blocks
    Text,
    /// Strictly one `key: value` pair per line
    Lines,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    /// Read repairs off the monomials of the expanded provenance
    Monomials,
    /// Solve the factored circuit and show the resulting and-or tree
    Equation,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Specialize a model-compatible file to these ground facts first
    #[arg(long, value_name = "FACTS")]
    model: Option<String>,
    /// Stop after the circuit; never expand
    #[arg(long)]
    circuit_only: bool,
    /// Evaluate by the flattening rules instead of building a circuit
    #[arg(long)]
    flattening: bool,
}

#[derive(Args)]
struct WhyArgs {
    #[command(flatten)]
    common: Common,
    /// The structure the question is about, as ground facts; defaults
    /// to the model the file defines
    #[arg(long, value_name = "FACTS")]
    model: Option<String>,
    /// Keep only the inclusion-minimal answers
    #[arg(long)]
    minimal: bool,
}

#[derive(Args)]
struct RepairsArgs {
    #[command(flatten)]
    common: Common,
    /// The structure to repair, as ground facts; defaults to the model
    /// the file defines
    #[arg(long, value_name = "FACTS")]
    model: Option<String>,
    #[arg(long, value_enum, default_value_t = Method::Monomials)]
    method: Method,
    /// Price file (`insert = N`, `delete = N`, `token t = N`) enabling
    /// ranked output
    #[arg(long, value_name = "FILE")]
    cost_model: Option<PathBuf>,
}

#[derive(Args)]
struct UpdateArgs {
    #[command(flatten)]
    common: Common,
    /// Ground facts to insert
    #[arg(long, value_name = "FACTS", default_value = "")]
    insert: String,
    /// Ground facts to delete
    #[arg(long, value_name = "FACTS", default_value = "")]
    delete: String,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    common: Common,
    /// Specialize a model-compatible file to these ground facts first
    #[arg(long, value_name = "FACTS")]
    model: Option<String>,
}

#[derive(Args)]
struct TreesArgs {
    #[command(flatten)]
    common: Common,
    /// Specialize a model-compatible file to these ground facts first
    #[arg(long, value_name = "FACTS")]
    model: Option<String>,
    /// Stop enumerating after this many trees
    #[arg(long, value_name = "N", default_value_t = 100)]
    tree_limit: usize,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    common: Common,
    /// Specialize a model-compatible file to these ground facts first
    #[arg(long, value_name = "FACTS")]
    model: Option<String>,
    /// Token assignment file, lines of `token = value`
    #[arg(long, value_name = "FILE")]
    assign: PathBuf,
    /// Report the most confident single monomial instead of the
    /// homomorphic image
    #[arg(long)]
    maximize: bool,
}

type CliResult<T> = std::result::Result<T, Failure>;

enum Failure {
    Io(String),
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Core(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(msg) | Failure::Usage(msg) => f.write_str(msg),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Core(e) => match e {
                Error::Syntax { .. } | Error::FreeVariable(_) | Error::ExtendedOnly { .. } => 1,
                Error::UnknownSemiring(_)
                | Error::Unsupported { .. }
                | Error::Carrier { .. }
                | Error::TagMismatch { .. } => 2,
                Error::CapExceeded { .. } | Error::TreeLimitExceeded { .. } => 3,
                _ => 4,
            },
        }
    }
}

/// Collects `key: value` lines; in text mode blocks may be separated by
/// blank lines, in lines mode gaps are dropped so every line is a pair.
struct Report {
    lines: Vec<String>,
    gaps: bool,
}

impl Report {
    fn new(output: Output) -> Report {
        Report {
            lines: Vec::new(),
            gaps: output == Output::Text,
        }
    }

    fn push(&mut self, key: &str, value: impl fmt::Display) {
        self.lines.push(format!("{key}: {value}"));
    }

    fn gap(&mut self) {
        if self.gaps {
            self.lines.push(String::new());
        }
    }

    fn finish(self) -> String {
        self.lines.join("\n")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            // Tolerate a reader that hangs up early (`prov ... | head`).
            let mut out = io::stdout().lock();
            let _ = writeln!(out, "{report}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn run(cmd: Cmd) -> CliResult<String> {
    match cmd {
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Explain(args) => cmd_why(args, false),
        Cmd::Whynot(args) => cmd_why(args, true),
        Cmd::Repairs(args) => cmd_repairs(args),
        Cmd::Update(args) => cmd_update(args),
        Cmd::Count(args) => cmd_count(args),
        Cmd::Score(args) => cmd_score(args),
        Cmd::Trees(args) => cmd_trees(args),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Loads the structure file and the formula. When `retarget` is set and
/// `--semiring` was given, the file's semiring declaration is replaced
/// before parsing, so its values must fit the chosen carrier.
fn load(common: &Common, retarget: bool) -> CliResult<(Interpretation, Formula)> {
    let mut text = read(&common.structure)?;
    if retarget {
        if let Some(name) = &common.semiring {
            Semiring::from_name(name)?;
            text = override_semiring(&text, name);
        }
    }
    let pi = parse_interpretation(&text)?;
    let formula_text = match (&common.source.formula, &common.source.formula_file) {
        (Some(t), None) => t.clone(),
        (None, Some(p)) => read(p)?,
        _ => unreachable!("clap enforces exactly one formula source"),
    };
    let f = parse_formula(&formula_text, pi.vocab(), pi.universe(), common.extended)?
        .rewrite_implies();
    Ok((pi, f))
}

fn override_semiring(text: &str, name: &str) -> String {
    let mut out = Vec::new();
    let mut replaced = false;
    for raw in text.lines() {
        let body = raw.find('#').map_or(raw, |i| &raw[..i]).trim();
        let key = body
            .split(|c: char| c == ':' || c.is_whitespace())
            .next()
            .unwrap_or("");
        if key == "semiring" {
            out.push(format!("semiring: {name}"));
            replaced = true;
        } else {
            out.push(raw.to_string());
        }
    }
    if !replaced {
        out.push(format!("semiring: {name}"));
    }
    out.join("\n")
}

fn parse_facts(
    text: &str,
    vocab: &Vocabulary,
    universe: &Universe,
) -> CliResult<Vec<GroundFact>> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        out.push(parse_ground_fact(chunk, vocab, universe)?);
    }
    Ok(out)
}

fn structure_from(text: &str, pi: &Interpretation) -> CliResult<Structure> {
    let mut a = Structure::new(pi.universe().clone(), pi.vocab().clone());
    for fact in parse_facts(text, pi.vocab(), pi.universe())? {
        a.insert(&fact)?;
    }
    Ok(a)
}

/// The structure a question is asked about: `--model` if given, else the
/// model the file defines.
fn question_structure(model: &Option<String>, pi: &Interpretation) -> CliResult<Structure> {
    match model {
        Some(text) => structure_from(text, pi),
        None => Ok(pi.defined_model()?),
    }
}

/// Pins a model-compatible interpretation to the `--model` facts, if any.
fn focus(pi: Interpretation, model: &Option<String>) -> CliResult<Interpretation> {
    match model {
        Some(text) => {
            let a = structure_from(text, &pi)?;
            Ok(pi.specialize(&a)?)
        }
        None => Ok(pi),
    }
}

fn push_value(rep: &mut Report, v: &Value) {
    match v {
        Value::Poly(p) => {
            rep.push("expanded", p);
            rep.push("monomials", p.monomial_count());
        }
        other => rep.push("value", other),
    }
}

fn cmd_eval(args: EvalArgs) -> CliResult<String> {
    let (pi, f) = load(&args.common, true)?;
    let pi = focus(pi, &args.model)?;
    let mut rep = Report::new(args.common.output);
    rep.push("semiring", pi.semiring().name());
    rep.push("classification", pi.classify()?);
    if args.flattening {
        let v = evaluate_with_flattening(&pi, &f)?;
        push_value(&mut rep, &v);
        return Ok(rep.finish());
    }
    if pi.semiring().poly_tag().is_none() {
        rep.push("value", evaluate(&pi, &f)?);
        return Ok(rep.finish());
    }
    let circuit = evaluate_circuit(&pi, &f)?;
    rep.push("circuit", &circuit);
    rep.push("circuit-size", circuit.size());
    if !args.circuit_only {
        let tag = pi.semiring().poly_tag().expect("checked above");
        let cap = args.common.cap.unwrap_or(DEFAULT_EXPANSION_CAP);
        let poly = circuit.expand(tag, cap)?;
        rep.push("expanded", &poly);
        rep.push("monomials", poly.monomial_count());
    }
    Ok(rep.finish())
}

fn cmd_why(args: WhyArgs, whynot: bool) -> CliResult<String> {
    let (pi, f) = load(&args.common, true)?;
    let a = question_structure(&args.model, &pi)?;
    let found = if whynot {
        why_not(&pi, &a, &f, args.minimal)?
    } else {
        explanations(&pi, &a, &f, args.minimal)?
    };
    let mut rep = Report::new(args.common.output);
    rep.push("explanations", found.len());
    for e in &found {
        rep.push("explanation", e);
    }
    Ok(rep.finish())
}

/// Derives which facts may move: tracked facts present in `base` may be
/// deleted, tracked facts absent from it may be inserted.
fn plan_against(pi: &Interpretation, base: &Structure) -> CliResult<UpdatePlan> {
    let mut insertable = BTreeSet::new();
    let mut deletable = BTreeSet::new();
    for lit in pi.tracked_literals()?.values() {
        let fact = lit.fact.clone();
        if base.holds(&fact) {
            deletable.insert(fact);
        } else {
            insertable.insert(fact);
        }
    }
    Ok(UpdatePlan::new(insertable, deletable, BTreeSet::new())?)
}

fn cmd_repairs(args: RepairsArgs) -> CliResult<String> {
    let (pi, f) = load(&args.common, true)?;
    // A model-defining file is generalized first so its tracked facts
    // may move; a model-compatible file needs --model to fix the base.
    let (open, base) = if pi.is_model_defining()? {
        let base = pi.defined_model()?;
        if let Some(text) = &args.model {
            let given = structure_from(text, &pi)?;
            if given != base {
                return Err(Failure::Usage(
                    "--model must match the model the file defines".into(),
                ));
            }
        }
        let (general, _) = generalized_interpretation(&pi)?;
        (general, base)
    } else {
        let base = question_structure(&args.model, &pi)?;
        (pi, base)
    };

    let mut rep = Report::new(args.common.output);
    let repairs = match args.method {
        Method::Monomials => {
            let plan = plan_against(&open, &base)?;
            repairs_from_monomials(&open, &f, &plan)?
        }
        Method::Equation => {
            let solved = repairs_by_equation(&open, &base, &f)?;
            if let Some(tree) = &solved.tree {
                rep.push("tree", tree);
            }
            for set in &solved.solutions {
                let names: Vec<String> = set.iter().map(|t| t.to_string()).collect();
                rep.push("solution", names.join(", "));
            }
            if let Some(notice) = &solved.notice {
                rep.push("notice", notice);
            }
            solved.repairs
        }
    };

    match &args.cost_model {
        Some(path) => {
            let cost = CostModel::parse(&read(path)?)?;
            let ranked = rank_repairs(&repairs, &open, &base, &f, &cost)?;
            for (i, r) in ranked.iter().enumerate() {
                if i > 0 {
                    rep.gap();
                }
                rep.push("repair", &r.repair);
                rep.push("provenance", &r.provenance);
                rep.push("cost", Value::Real(r.cost));
            }
        }
        None => {
            rep.push("repairs", repairs.len());
            for r in &repairs {
                rep.push("repair", r);
            }
        }
    }
    Ok(rep.finish())
}

fn cmd_update(args: UpdateArgs) -> CliResult<String> {
    let (beta, f) = load(&args.common, true)?;
    let inserts = parse_facts(&args.insert, beta.vocab(), beta.universe())?;
    let deletes = parse_facts(&args.delete, beta.vocab(), beta.universe())?;
    let (_, skeleton) = generalized_interpretation(&beta)?;
    for fact in &inserts {
        if !skeleton.insertable.contains(fact) {
            return Err(Failure::Core(Error::InvalidUpdate(format!(
                "{fact} cannot be inserted: it is not a tracked absent fact"
            ))));
        }
    }
    for fact in &deletes {
        if !skeleton.deletable.contains(fact) {
            return Err(Failure::Core(Error::InvalidUpdate(format!(
                "{fact} cannot be deleted: it is not a tracked present fact"
            ))));
        }
    }
    let chosen: BTreeSet<GroundFact> = inserts.into_iter().chain(deletes).collect();
    let plan = skeleton.with_chosen(chosen)?;
    let updated = update_provenance(&beta, &plan, &f)?;
    let mut rep = Report::new(args.common.output);
    rep.push("provenance", &updated);
    rep.push("monomials", updated.monomial_count());
    Ok(rep.finish())
}

fn cmd_count(args: CountArgs) -> CliResult<String> {
    let (pi, f) = load(&args.common, true)?;
    let pi = focus(pi, &args.model)?;
    let mut rep = Report::new(args.common.output);
    rep.push("proof-trees", count_proof_trees(&pi, &f)?);
    Ok(rep.finish())
}

fn cmd_trees(args: TreesArgs) -> CliResult<String> {
    let (pi, f) = load(&args.common, true)?;
    let pi = focus(pi, &args.model)?;
    let total = count_proof_trees(&pi, &f)?;
    let listed = enumerate_proof_trees(&pi, &f, args.tree_limit)?;
    let mut rep = Report::new(args.common.output);
    rep.push("proof-trees", total);
    rep.push("shown", listed.trees.len());
    rep.push("truncated", listed.truncated);
    for t in &listed.trees {
        if args.common.output == Output::Lines {
            rep.push("tree", tree_line(t));
        } else {
            rep.push("tree", t);
        }
    }
    Ok(rep.finish())
}

/// One-line tree rendering for machine-readable output; children sit
/// in braces under their parent.
fn tree_line(t: &ProofTree) -> String {
    let (formula, parts) = match t {
        ProofTree::Leaf { formula, value, .. } => return format!("{formula} [{value}]"),
        ProofTree::Or { formula, child, .. } | ProofTree::Exists { formula, child, .. } => {
            (formula, vec![tree_line(child)])
        }
        ProofTree::And {
            formula,
            left,
            right,
        } => (formula, vec![tree_line(left), tree_line(right)]),
        ProofTree::Forall { formula, children } => {
            (formula, children.iter().map(tree_line).collect())
        }
    };
    format!("{formula} {{ {} }}", parts.join("; "))
}

fn cmd_score(args: ScoreArgs) -> CliResult<String> {
    let (pi, f) = load(&args.common, false)?;
    let pi = focus(pi, &args.model)?;
    let poly = match evaluate(&pi, &f)? {
        Value::Poly(p) => p,
        _ => {
            return Err(Failure::Core(Error::Unsupported {
                semiring: pi.semiring().name(),
                op: "scoring; the file must carry polynomial provenance",
            }))
        }
    };
    let mut rep = Report::new(args.common.output);
    if args.maximize {
        let conf = parse_confidences(&read(&args.assign)?)?;
        let best = maximize_confidence(&poly, &conf)?;
        rep.push("monomial", &best.monomial);
        rep.push("confidence", best.confidence);
        rep.push(INCONSISTENT_AGGREGATE, best.aggregate);
        rep.push("sketch", &best.sketch);
    } else {
        let name = args.common.semiring.as_deref().ok_or_else(|| {
            Failure::Usage("score needs --semiring NAME to pick the target".into())
        })?;
        let target = Semiring::from_name(name)?;
        let assign = parse_assignment(&read(&args.assign)?, &target)?;
        rep.push("score", score(&poly, &target, &assign)?);
    }
    Ok(rep.finish())
}

fn assignment_entries(text: &str) -> CliResult<Vec<(Token, String)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let syntax = |msg: String| {
            Failure::Core(Error::Syntax {
                line: li + 1,
                col: 1,
                msg,
            })
        };
        let line = raw.find('#').map_or(raw, |i| &raw[..i]).trim();
        if line.is_empty() {
            continue;
        }
        let (token_text, value_text) = line
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected `token = value`, got `{line}`")))?;
        let token = Token::parse(token_text.trim())?;
        if !seen.insert(token) {
            return Err(syntax(format!("{token} is assigned twice")));
        }
        out.push((token, value_text.trim().to_string()));
    }
    Ok(out)
}

fn parse_assignment(text: &str, target: &Semiring) -> CliResult<HashMap<Token, Value>> {
    let mut out = HashMap::new();
    for (token, value_text) in assignment_entries(text)? {
        out.insert(token, target.parse_value(&value_text)?);
    }
    Ok(out)
}

fn parse_confidences(text: &str) -> CliResult<HashMap<Token, f64>> {
    let mut out = HashMap::new();
    for (token, value_text) in assignment_entries(text)? {
        let value: f64 = value_text.parse().map_err(|_| {
            Failure::Core(Error::Carrier {
                semiring: "confidence".into(),
                value: value_text.clone(),
                reason: "expected a number in [0, 1]".into(),
            })
        })?;
        out.insert(token, value);
    }
    Ok(out)
}
