use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qualgebra::algebra::StructureJson;
use qualgebra::builtins::{builtin_structure, builtin_structure_names};
use qualgebra::classify::{enumerate_qualgebras, enumerate_squandles, property_report, DEFAULT_BUDGET_SECONDS};
use qualgebra::cohomology::{cocycle_basis, second_cohomology, MAX_COHOMOLOGY_SIZE};
use qualgebra::coloring::{count_colorings, enumerate_colorings, modes_for};
use qualgebra::diagram::{builtin_diagram, BUILTIN_DIAGRAMS};
use qualgebra::freeqa::{
    bounded_equivalence, reduce_term, relation_sides, tail_invariant_check, to_free_group, Equivalence, LdTerm,
    ProductForm,
};
use qualgebra::invariants::{default_mode, weight_multiset_in};
use qualgebra::moves::random_move;
use qualgebra::{CocyclePair, Coeff, Diagram, Kind, Mode, Structure, WeightMultiset};

#[derive(Parser, Debug)]
#[command(name = "qualgebra-lab", version, about = "Qualgebras, squandles and invariants of trivalent graph diagrams")]
struct Cli {
    /// Print the names of the built-in structures and diagrams.
    #[arg(long)]
    list_builtins: bool,

    /// Time cap for enumerations.
    #[arg(long, global = true, env = "QUALGEBRA_LAB_BUDGET", default_value_t = DEFAULT_BUDGET_SECONDS)]
    budget_seconds: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Qualgebra,
    Squandle,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Non-isomorphic qualgebras or squandles of a given size.
    Classify {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        size: usize,
        /// Skip structures over the trivial quandle.
        #[arg(long)]
        nontrivial: bool,
        /// Also write the JSON result to this file.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Print a structure in the JSON structure format.
    Show(StructureArg),
    /// Count (and optionally list) colorings of a diagram.
    Color {
        #[command(flatten)]
        structure: StructureArg,
        #[arg(long)]
        diagram: String,
        /// qualgebra, isosceles or squandle; defaults to the structure's kind.
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        list: bool,
    },
    /// Second cohomology of a structure.
    Cohomology {
        #[command(flatten)]
        structure: StructureArg,
        /// z, z2, z3, ...
        #[arg(long, default_value = "z")]
        coeff: Coeff,
        /// Include one cocycle per generator of H².
        #[arg(long)]
        representatives: bool,
    },
    /// Weight multiset of a diagram under a 2-cocycle.
    Invariant {
        #[command(flatten)]
        structure: StructureArg,
        #[arg(long)]
        diagram: String,
        /// A cocycle JSON file, `basis:K` (K-th vector of a Z² basis) or `rep:K`
        /// (K-th H² representative).
        #[arg(long)]
        cocycle: String,
        #[arg(long)]
        mode: Option<Mode>,
        /// Also render the multiset as a Laurent polynomial in t.
        #[arg(long)]
        polynomial: bool,
    },
    /// Free associative qualgebra terms.
    Freeqa {
        #[command(subcommand)]
        command: FreeqaCommand,
    },
    /// Diagram utilities.
    Diagram {
        #[command(subcommand)]
        command: DiagramCommand,
    },
    /// Apply seeded random moves and compare counts and weights before and after.
    FuzzMoves {
        #[command(flatten)]
        structure: StructureArg,
        #[arg(long)]
        diagram: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        steps: usize,
    },
}

#[derive(Args, Debug)]
struct StructureArg {
    /// `builtin:NAME` or a path to a structure JSON file.
    #[arg(long)]
    structure: String,
    /// How a `group` table is read.
    #[arg(long, value_enum, default_value_t = KindArg::Qualgebra)]
    group_as: KindArg,
}

#[derive(Subcommand, Debug)]
enum FreeqaCommand {
    /// Compare the two sides of b⊲a ◇ a⊲b = a⊲̃b⊲a ◇ b.
    CheckRelation {
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Reduced form of a ⊲-term such as `a<+b<-b`.
    Reduce { term: String },
    /// Search for a shift sequence between two product forms such as `a * b<+a`.
    Equiv {
        lhs: String,
        rhs: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
}

#[derive(Subcommand, Debug)]
enum DiagramCommand {
    /// Validate a diagram JSON file.
    Validate { path: PathBuf },
    /// Print a built-in diagram.
    Builtin {
        name: String,
        /// Same as `--format json`.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug)]
enum CliError {
    Core(qualgebra::Error),
    Io(String),
    Invariance(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io(_) => "Io",
            CliError::Invariance(_) => "InvarianceFailure",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_internal() => 1,
            CliError::Core(_) | CliError::Io(_) => 2,
            CliError::Invariance(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Invariance(m) => f.write_str(m),
        }
    }
}

impl From<qualgebra::Error> for CliError {
    fn from(e: qualgebra::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// JSON result plus a human rendering.
struct Output {
    json: Value,
    text: String,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn group_kind(k: KindArg) -> Kind {
    match k {
        KindArg::Qualgebra => Kind::Qualgebra,
        KindArg::Squandle => Kind::Squandle,
    }
}

fn load_structure(arg: &StructureArg) -> Result<Structure> {
    if let Some(name) = arg.structure.strip_prefix("builtin:") {
        return Ok(builtin_structure(name)?);
    }
    let text = read(Path::new(&arg.structure))?;
    let j: StructureJson =
        serde_json::from_str(&text).map_err(|e| qualgebra::Error::Parse(format!("{}: {e}", arg.structure)))?;
    Ok(j.into_structure(group_kind(arg.group_as))?)
}

fn load_diagram(source: &str) -> Result<Diagram> {
    match source.strip_prefix("builtin:") {
        Some(name) => Ok(builtin_diagram(name)?),
        None => Ok(Diagram::from_json(&read(Path::new(source))?)?),
    }
}

fn load_cocycle(source: &str, s: &Structure) -> Result<CocyclePair> {
    let index = |rest: &str| {
        rest.parse::<usize>()
            .map_err(|_| qualgebra::Error::Parse(format!("bad cocycle index in {source}")))
    };
    let pick = |v: Vec<CocyclePair>, k: usize| {
        let len = v.len();
        v.into_iter()
            .nth(k)
            .ok_or(qualgebra::Error::PositionOutOfRange { pos: k, len })
    };
    let cp = if let Some(rest) = source.strip_prefix("basis:") {
        pick(cocycle_basis(s)?, index(rest)?)?
    } else if let Some(rest) = source.strip_prefix("rep:") {
        pick(second_cohomology(s, Coeff::Z)?.representatives, index(rest)?)?
    } else {
        let text = read(Path::new(source))?;
        serde_json::from_str(&text).map_err(|e| qualgebra::Error::Parse(format!("{source}: {e}")))?
    };
    cp.check_shape(s)?;
    Ok(cp)
}

fn weights_json(ms: &WeightMultiset) -> Value {
    Value::Array(ms.counts.iter().map(|(w, c)| json!({ "weight": w, "count": c })).collect())
}

fn classify(kind: KindArg, size: usize, nontrivial: bool, out: Option<&Path>, budget: u64) -> Result<Output> {
    let res = match kind {
        KindArg::Qualgebra => enumerate_qualgebras(size, nontrivial, budget)?,
        KindArg::Squandle => enumerate_squandles(size, nontrivial, budget)?,
    };
    let mut reps = Vec::new();
    for s in &res.representatives {
        let mut entry = json!({ "structure": s });
        if let Structure::Qualgebra(q) = s {
            entry["properties"] = json!(property_report(q));
        }
        reps.push(entry);
    }
    let value = json!({
        "size": res.size,
        "kind": res.kind,
        "trivial_count": res.trivial_count,
        "nontrivial_count": res.nontrivial_count,
        "representatives": reps,
    });
    if let Some(path) = out {
        let body = serde_json::to_string_pretty(&value).expect("json");
        std::fs::write(path, body + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let text = format!(
        "{} {}s of size {}: {} representatives ({} non-trivial{})",
        if nontrivial { "non-trivial" } else { "all" },
        res.kind,
        res.size,
        res.representatives.len(),
        res.nontrivial_count,
        res.trivial_count.map(|t| format!(", {t} over the trivial quandle")).unwrap_or_default(),
    );
    Ok(Output { json: value, text })
}

fn color(s: &Structure, d: &Diagram, mode: Option<Mode>, list: bool) -> Result<Output> {
    let mode = mode.unwrap_or(default_mode(s.kind()));
    let count = count_colorings(s, d, mode)?;
    let mut value = json!({ "count": count });
    let mut text = format!("{count} {mode} colorings");
    if list {
        let cs = enumerate_colorings(s, d, mode, None)?;
        for c in &cs {
            let parts: Vec<String> = c.assignment.iter().map(|(a, &e)| format!("{a}={}", s.carrier().name(e))).collect();
            text.push_str(&format!("\n{}", parts.join(" ")));
        }
        value["colorings"] = json!(cs);
    }
    Ok(Output { json: value, text })
}

fn cohomology(s: &Structure, coeff: Coeff, representatives: bool) -> Result<Output> {
    let h = second_cohomology(s, coeff)?;
    let gens = |g: &qualgebra::AbelianGroupPresentation| g.free_rank + g.torsion.len();
    let mut value = json!({
        "coeff": h.coeff,
        "z2_rank": gens(&h.z2),
        "b2_rank": gens(&h.b2),
        "h2": h.h2,
    });
    let mut text = format!("Z² = {}\nB² = {}\nH² = {}", h.z2, h.b2, h.h2);
    if representatives {
        for r in &h.representatives {
            text.push_str(&format!("\n{}", serde_json::to_string(r).expect("json")));
        }
        value["representatives"] = json!(h.representatives);
    }
    Ok(Output { json: value, text })
}

fn invariant(s: &Structure, d: &Diagram, cp: &CocyclePair, mode: Option<Mode>, polynomial: bool) -> Result<Output> {
    let mode = mode.unwrap_or(default_mode(cp.kind));
    let ms = weight_multiset_in(s, cp, d, mode)?;
    let mut value = json!({ "mode": mode, "total": ms.total(), "weights": weights_json(&ms) });
    if polynomial {
        value["polynomial"] = json!(ms.polynomial());
    }
    let text = ms
        .counts
        .iter()
        .map(|(w, c)| format!("weight {w}: {c}"))
        .chain(polynomial.then(|| format!("polynomial: {}", ms.polynomial())))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Output { json: value, text })
}

fn equivalence_json(e: &Equivalence) -> Value {
    match e {
        Equivalence::Equivalent(steps) => json!({ "equivalent": true, "steps": steps }),
        Equivalence::DistinctAtDepth(d) => json!({ "equivalent": false, "depth": d }),
    }
}

fn equivalence_text(e: &Equivalence) -> String {
    match e {
        Equivalence::Equivalent(steps) => format!("equivalent in {} shifts", steps.len()),
        Equivalence::DistinctAtDepth(d) => format!("not equivalent within {d} shifts"),
    }
}

fn freeqa(cmd: &FreeqaCommand) -> Result<Output> {
    match cmd {
        FreeqaCommand::CheckRelation { depth } => {
            let (lhs, rhs) = relation_sides();
            let (gl, gr) = (to_free_group(&lhs), to_free_group(&rhs));
            let eq = bounded_equivalence(&lhs, &rhs, *depth);
            let tail = tail_invariant_check(&lhs, "b", *depth)?;
            let text = format!(
                "{lhs}  ->  {gl}\n{rhs}  ->  {gr}\nshifts: {}\ntail check: {}",
                equivalence_text(&eq),
                if tail.ok { "ok".to_string() } else { tail.failure.clone().unwrap_or_default() }
            );
            Ok(Output {
                json: json!({
                    "lhs": lhs.to_string(),
                    "rhs": rhs.to_string(),
                    "lhs_group": gl.to_string(),
                    "rhs_group": gr.to_string(),
                    "same_group_image": gl == gr,
                    "shift_search": equivalence_json(&eq),
                    "tail_check": tail,
                }),
                text,
            })
        }
        FreeqaCommand::Reduce { term } => {
            let t: LdTerm = term.parse()?;
            let r = reduce_term(&t);
            Ok(Output {
                json: json!({ "term": t.to_string(), "reduced": r.to_string() }),
                text: r.to_string(),
            })
        }
        FreeqaCommand::Equiv { lhs, rhs, depth } => {
            let (p, q): (ProductForm, ProductForm) = (lhs.parse()?, rhs.parse()?);
            let eq = bounded_equivalence(&p, &q, *depth);
            let (gp, gq) = (to_free_group(&p), to_free_group(&q));
            let mut value = equivalence_json(&eq);
            value["same_group_image"] = json!(gp == gq);
            Ok(Output {
                json: value,
                text: equivalence_text(&eq),
            })
        }
    }
}

fn diagram(cmd: &DiagramCommand, format: &mut Format) -> Result<Output> {
    match cmd {
        DiagramCommand::Validate { path } => {
            let d = Diagram::from_json(&read(path)?)?;
            let report = d.validate()?;
            Ok(Output {
                text: format!(
                    "{} arcs, {} crossings, {} zips, {} unzips, {} free loops",
                    report.arcs, report.crossings, report.zips, report.unzips, report.free_loops
                ),
                json: json!(report),
            })
        }
        DiagramCommand::Builtin { name, json } => {
            if *json {
                *format = Format::Json;
            }
            let d = builtin_diagram(name)?;
            let text = d.to_json();
            Ok(Output {
                json: serde_json::from_str(&text).expect("diagram json"),
                text,
            })
        }
    }
}

fn fuzz_moves(s: &Structure, d0: &Diagram, seed: u64, steps: usize) -> Result<Output> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // quandles only color classical diagrams consistently
    let vertex_moves = s.kind() != Kind::Quandle;
    let cocycle = if s.n() <= MAX_COHOMOLOGY_SIZE {
        let basis = cocycle_basis(s)?;
        let mut acc = CocyclePair::zero(s.kind(), s.n());
        for b in &basis {
            acc = acc.checked_add(&b.scaled(rng.gen_range(-2..=2))?)?;
        }
        Some(acc)
    } else {
        None
    };
    let mut d = d0.clone();
    let mut applied = Vec::new();
    for _ in 0..steps {
        if let Some((next, m)) = random_move(&d, &mut rng, vertex_moves) {
            d = next;
            applied.push(m);
        }
    }
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for mode in modes_for(s) {
        let (before, after) = (count_colorings(s, d0, mode)?, count_colorings(s, &d, mode)?);
        let mut entry = json!({ "mode": mode, "count_before": before, "count_after": after });
        if before != after {
            failures.push(format!("{mode}: {before} colorings before, {after} after"));
        }
        if let Some(cp) = &cocycle {
            let (wb, wa) = (weight_multiset_in(s, cp, d0, mode)?, weight_multiset_in(s, cp, &d, mode)?);
            if wb != wa {
                failures.push(format!("{mode}: weights {wb} before, {wa} after"));
            }
            entry["weights_before"] = weights_json(&wb);
            entry["weights_after"] = weights_json(&wa);
        }
        checks.push(entry);
    }
    if !failures.is_empty() {
        return Err(CliError::Invariance(failures.join("; ")));
    }
    let text = format!(
        "seed {seed}: {} moves applied, counts{} unchanged",
        applied.len(),
        if cocycle.is_some() { " and weights" } else { "" }
    );
    Ok(Output {
        json: json!({ "seed": seed, "moves": applied, "checks": checks, "ok": true }),
        text,
    })
}

fn list_builtins() -> Output {
    let structures = builtin_structure_names();
    let text = format!("structures: {}\ndiagrams: {}", structures.join(" "), BUILTIN_DIAGRAMS.join(" "));
    Output {
        json: json!({ "structures": structures, "diagrams": BUILTIN_DIAGRAMS }),
        text,
    }
}

fn run(cli: &Cli, format: &mut Format) -> Result<Output> {
    if cli.list_builtins {
        return Ok(list_builtins());
    }
    let Some(cmd) = &cli.command else {
        return Err(CliError::Io("no subcommand given; see --help".into()));
    };
    match cmd {
        Command::Classify { kind, size, nontrivial, json } => {
            classify(*kind, *size, *nontrivial, json.as_deref(), cli.budget_seconds)
        }
        Command::Show(arg) => {
            let s = load_structure(arg)?;
            let text = serde_json::to_string(&s).expect("json");
            Ok(Output { json: json!(s), text })
        }
        Command::Color { structure, diagram, mode, list } => {
            color(&load_structure(structure)?, &load_diagram(diagram)?, *mode, *list)
        }
        Command::Cohomology { structure, coeff, representatives } => {
            cohomology(&load_structure(structure)?, *coeff, *representatives)
        }
        Command::Invariant { structure, diagram, cocycle, mode, polynomial } => {
            let s = load_structure(structure)?;
            let cp = load_cocycle(cocycle, &s)?;
            invariant(&s, &load_diagram(diagram)?, &cp, *mode, *polynomial)
        }
        Command::Freeqa { command } => freeqa(command),
        Command::Diagram { command } => diagram(command, format),
        Command::FuzzMoves { structure, diagram, seed, steps } => {
            fuzz_moves(&load_structure(structure)?, &load_diagram(diagram)?, *seed, *steps)
        }
    }
}

/// Writes a line to stdout; a closed pipe is not an error.
fn emit(body: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{body}").and_then(|()| out.flush());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut format = cli.format;
    match run(&cli, &mut format) {
        Ok(out) => {
            let body = match format {
                Format::Json => serde_json::to_string(&out.json).expect("json"),
                Format::Text => out.text,
            };
            emit(&body);
            ExitCode::SUCCESS
        }
        Err(e) => {
            emit(&json!({ "error": { "code": e.code(), "message": e.to_string() } }).to_string());
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
