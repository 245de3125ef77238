//! `tensor-sde`: scaling reports, large-N solves, correlator evaluation,
//! graph queries and the exact verification suite.

mod output;
mod verify;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num::BigRational;
use serde_json::{json, Value};

use tensor_sde::colored_graph::{catalog, classify, BoundaryClass, Classification, ColoredGraph};
use tensor_sde::grid::{Grid, Momentum};
use tensor_sde::perturbation::{check_finite_n_expansion, check_wti_identity, WickOracle};
use tensor_sde::scaling::{build_exponent_system, solve, verify_assignment, Var};
use tensor_sde::sde_core::{
    eval_g4_connected, eval_g4_limit, eval_g6, solve_g2, solve_g4_disconnected, G6Class, Sector, SolveOptions,
};
use tensor_sde::{Error, Result};

use output::{document, rational, to_value};

#[derive(Parser, Debug)]
#[command(name = "tensor-sde", version, about = "Large-N Schwinger-Dyson equations for a rank-3 tensor field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args, Debug, Clone)]
struct SolverArgs {
    /// Grid points per axis.
    #[arg(long = "n", value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    /// Rescaled coupling.
    #[arg(long = "lambda", allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 10_000)]
    max_iter: usize,
    /// Picard damping in (0, 1]; 1 falls back to 1/2 on oscillation.
    #[arg(long, default_value_t = 1.0)]
    relaxation: f64,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions { tol: self.tol, max_iter: self.max_iter, relaxation: self.relaxation }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum G4Kind {
    Connected,
    Limit,
    Disconnected,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exponent assignment for a source scaling beta, with constraint slacks.
    Scaling {
        /// Rational, e.g. `0` or `-1/2`.
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
    },
    /// Solves the large-N 2-point equation on the grid.
    Solve {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Destination of the table; the convergence report then goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 4-point function of the pillow (or disconnected) sector.
    G4 {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        /// Pillow color.
        #[arg(long, default_value_t = 1)]
        color: usize,
        #[arg(long, value_enum, default_value_t = G4Kind::Connected)]
        kind: G4Kind,
    },
    /// Connected 6-point functions with algebraic large-N equations.
    G6 {
        #[command(flatten)]
        solver: SolverArgs,
        /// `G1`..`G3`, `F1`..`F3`, `K`, or a class name such as `F_{1;23}`.
        #[arg(long)]
        class: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        z: String,
    },
    /// Colored-graph queries on a JSON graph file.
    Graph {
        #[command(subcommand)]
        op: GraphOp,
    },
    /// Exact residual checks against the Wick oracle.
    PerturbCheck {
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long = "n-small", default_value_t = 2)]
        n_small: u32,
    },
    /// Full verification suite; exit 0 iff every check passes.
    Verify,
}

#[derive(Subcommand, Debug)]
enum GraphOp {
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    Boundary {
        #[arg(long = "in")]
        input: PathBuf,
    },
    Swap {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        color: usize,
        /// Vertex ids; default to the first two white vertices.
        #[arg(long)]
        u: Option<usize>,
        #[arg(long)]
        v: Option<usize>,
    },
    Aut {
        #[arg(long = "in")]
        input: PathBuf,
    },
    Genus {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

/// Result of a subcommand: the document to print and whether every check
/// it ran passed.
struct Outcome {
    doc: Option<Value>,
    text: Option<String>,
    pass: bool,
}

impl Outcome {
    fn json(doc: serde_json::Map<String, Value>, pass: bool) -> Self {
        Outcome { doc: Some(Value::Object(doc)), text: None, pass }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let num: num::BigInt = digits.parse().map_err(|_| Error::Parse(format!("bad rational '{s}'")))?;
        let den = num::pow(num::BigInt::from(10), frac.len());
        let q = BigRational::new(num, den);
        return Ok(if neg { -q } else { q });
    }
    t.parse().map_err(|_| Error::Parse(format!("bad rational '{s}'")))
}

fn read_graph(path: &PathBuf) -> Result<ColoredGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))?;
    ColoredGraph::from_json(&text)
}

fn classification_json(c: &Classification) -> Value {
    match c {
        Classification::Known { class, iso } => json!({ "class": class.name(), "iso": iso }),
        Classification::Unclassified { vertices, components, genus } => {
            json!({ "class": Value::Null, "vertices": vertices, "components": components, "genus": genus })
        }
    }
}

fn scaling(beta: &str) -> Result<Outcome> {
    let beta = parse_rational(beta)?;
    let a = solve(&build_exponent_system(), &beta)?;
    let report = verify_assignment(&a, catalog())?;
    let mut doc = document("scaling");
    doc.insert("beta".into(), rational(&beta));
    for v in Var::ALL {
        if v != Var::Beta {
            doc.insert(v.key().into(), rational(&a.get(v)));
        }
    }
    doc.insert("feasible".into(), report.feasible.into());
    doc.insert("conjecture_consistent".into(), report.conjecture_consistent.into());
    doc.insert("constraints".into(), to_value(&report.constraints));
    doc.insert("classes".into(), to_value(&report.classes));
    let pass = report.feasible && report.conjecture_consistent;
    Ok(Outcome::json(doc, pass))
}

fn momentum_json(grid: Grid, m: &Momentum) -> Value {
    json!([grid.component(m.0[0]), grid.component(m.0[1]), grid.component(m.0[2])])
}

fn solve_cmd(args: &SolverArgs, format: Format, out: Option<&PathBuf>) -> Result<Outcome> {
    let grid = Grid::new(args.n)?;
    let table = solve_g2(grid, args.lambda, args.options())?;
    let mut report = document("solve");
    report.insert("N".into(), args.n.into());
    report.insert("lambda".into(), args.lambda.into());
    report.insert("convergence".into(), to_value(&table.report));
    match format {
        Format::Csv => {
            let csv = table.to_csv();
            match out {
                Some(path) => {
                    fs::write(path, csv).map_err(|e| Error::Argument(format!("cannot write {}: {e}", path.display())))?;
                    Ok(Outcome::json(report, true))
                }
                None => {
                    eprintln!("{}", output::to_string(&Value::Object(report)));
                    Ok(Outcome { doc: None, text: Some(csv), pass: true })
                }
            }
        }
        Format::Json => {
            let values: Vec<Value> = grid
                .points()
                .zip(table.values())
                .map(|(p, v)| json!({ "x": momentum_json(grid, &p), "value": v }))
                .collect();
            report.insert("values".into(), values.into());
            match out {
                Some(path) => {
                    let text = output::to_string(&Value::Object(report.clone()));
                    fs::write(path, text).map_err(|e| Error::Argument(format!("cannot write {}: {e}", path.display())))?;
                    let mut short = document("solve");
                    short.insert("convergence".into(), to_value(&table.report));
                    Ok(Outcome::json(short, true))
                }
                None => Ok(Outcome::json(report, true)),
            }
        }
    }
}

fn g4(args: &SolverArgs, x: &str, y: &str, color: usize, kind: G4Kind) -> Result<Outcome> {
    let grid = Grid::new(args.n)?;
    let (x, y) = (grid.parse_momentum(x)?, grid.parse_momentum(y)?);
    let table = solve_g2(grid, args.lambda, args.options())?;
    let value = match kind {
        G4Kind::Connected => eval_g4_connected(&table, color, &x, &y)?,
        G4Kind::Limit => eval_g4_limit(&table, color, &x, &y)?,
        G4Kind::Disconnected => solve_g4_disconnected(&table, &y, args.options())?.value(&x),
    };
    let mut doc = document("g4");
    doc.insert("N".into(), args.n.into());
    doc.insert("lambda".into(), args.lambda.into());
    doc.insert("kind".into(), format!("{kind:?}").to_lowercase().into());
    if kind != G4Kind::Disconnected {
        doc.insert("color".into(), color.into());
    }
    doc.insert("x".into(), momentum_json(grid, &x));
    doc.insert("y".into(), momentum_json(grid, &y));
    doc.insert("value".into(), value.into());
    Ok(Outcome::json(doc, true))
}

fn parse_g6_class(s: &str) -> Result<G6Class> {
    let bad = || Error::Argument(format!("unknown 6-point class '{s}' (expected one of the G, F or K classes)"));
    let t = s.trim();
    if let Ok(c) = t.parse::<BoundaryClass>() {
        return G6Class::from_boundary(c).ok_or_else(bad);
    }
    let (head, tail) = t.split_at(1);
    let a: usize = tail.parse().map_err(|_| bad())?;
    if !(1..=3).contains(&a) {
        return Err(bad());
    }
    match head {
        "G" => Ok(G6Class::G(a)),
        "F" => Ok(G6Class::F(a)),
        _ => Err(bad()),
    }
}

fn g6(args: &SolverArgs, class: &str, x: &str, y: &str, z: &str) -> Result<Outcome> {
    let grid = Grid::new(args.n)?;
    let class = parse_g6_class(class)?;
    let (x, y, z) = (grid.parse_momentum(x)?, grid.parse_momentum(y)?, grid.parse_momentum(z)?);
    let table = solve_g2(grid, args.lambda, args.options())?;
    let value = eval_g6(&table, class, &x, &y, &z)?;
    let mut doc = document("g6");
    doc.insert("N".into(), args.n.into());
    doc.insert("lambda".into(), args.lambda.into());
    doc.insert("class".into(), class.boundary_class().name().into());
    doc.insert("x".into(), momentum_json(grid, &x));
    doc.insert("y".into(), momentum_json(grid, &y));
    doc.insert("z".into(), momentum_json(grid, &z));
    doc.insert("value".into(), value.into());
    Ok(Outcome::json(doc, true))
}

fn graph(op: &GraphOp) -> Result<Outcome> {
    let mut doc = document(match op {
        GraphOp::Classify { .. } => "graph classify",
        GraphOp::Boundary { .. } => "graph boundary",
        GraphOp::Swap { .. } => "graph swap",
        GraphOp::Aut { .. } => "graph aut",
        GraphOp::Genus { .. } => "graph genus",
    });
    match op {
        GraphOp::Classify { input } => {
            let g = read_graph(input)?;
            let c = classify(&g)?;
            doc.extend(classification_json(&c).as_object().cloned().unwrap_or_default());
        }
        GraphOp::Boundary { input } => {
            let b = read_graph(input)?.boundary()?;
            let c = classify(&b)?;
            doc.insert("class".into(), c.class().map(|c| c.name()).into());
            doc.insert("graph".into(), to_value(&b));
        }
        GraphOp::Swap { input, color, u, v } => {
            let g = read_graph(input)?;
            let whites: Vec<usize> = g.whites().iter().map(|&p| g.vertices()[p].id).collect();
            let u = u.or_else(|| whites.first().copied()).ok_or_else(|| Error::Argument("graph has no white vertex".into()))?;
            let v = v.or_else(|| whites.get(1).copied()).ok_or_else(|| Error::Argument("graph needs two white vertices".into()))?;
            let s = g.swap(*color, u, v)?;
            let c = classify(&s)?;
            doc.insert("color".into(), (*color).into());
            doc.insert("u".into(), u.into());
            doc.insert("v".into(), v.into());
            doc.insert("class".into(), c.class().map(|c| c.name()).into());
            doc.insert("graph".into(), to_value(&s));
        }
        GraphOp::Aut { input } => {
            let g = read_graph(input)?;
            doc.insert("automorphisms".into(), g.count_automorphisms().into());
        }
        GraphOp::Genus { input } => {
            let g = read_graph(input)?;
            doc.insert("genus".into(), g.genus()?.into());
            doc.insert("components".into(), g.connected_components().into());
        }
    }
    Ok(Outcome::json(doc, true))
}

fn perturb_check(order: usize, n_small: u32) -> Result<Outcome> {
    let mut reports = Vec::new();
    let mut pass = true;
    for sector in Sector::ALL {
        let r = check_finite_n_expansion(sector, n_small, order)?;
        pass &= r.pass;
        reports.push(to_value(&r));
    }
    let wti_order = order.min(1);
    let oracle = WickOracle::large_n(n_small, wti_order)?;
    let wti = check_wti_identity(&oracle, oracle.assignment())?;
    pass &= wti.pass;
    let mut doc = document("perturb-check");
    doc.insert("order".into(), order.into());
    doc.insert("N".into(), n_small.into());
    doc.insert("sectors".into(), reports.into());
    doc.insert("wti".into(), to_value(&wti));
    doc.insert("pass".into(), pass.into());
    Ok(Outcome::json(doc, pass))
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Scaling { beta } => scaling(beta),
        Command::Solve { solver, format, out } => solve_cmd(solver, *format, out.as_ref()),
        Command::G4 { solver, x, y, color, kind } => g4(solver, x, y, *color, *kind),
        Command::G6 { solver, class, x, y, z } => g6(solver, class, x, y, z),
        Command::Graph { op } => graph(op),
        Command::PerturbCheck { order, n_small } => perturb_check(*order, *n_small),
        Command::Verify => verify::run().map(|(doc, pass)| Outcome::json(doc, pass)),
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Structural(_) => "structural",
        Error::Argument(_) => "argument",
        Error::Coincident(_) => "coincident",
        Error::NoConvergence { .. } => "no_convergence",
        Error::Infeasible(_) => "infeasible",
        Error::Budget(_) => "budget",
        Error::MissingSector(_) => "missing_sector",
        Error::Parse(_) => "parse",
    }
}

fn configure_threads() {
    if let Ok(s) = std::env::var("TENSOR_SDE_THREADS") {
        match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                // only fails if a pool already exists, which cannot happen this early
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("ignoring TENSOR_SDE_THREADS={s}: expected a positive integer"),
        }
    }
}

/// Writes to stdout; a closed pipe downstream is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(&cli) {
        Ok(out) => {
            if let Some(text) = out.text {
                emit(&text);
            }
            if let Some(doc) = out.doc {
                emit(&format!("{}\n", output::to_string(&doc)));
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let mut doc = document("error");
            doc.insert("error".into(), json!({ "kind": error_kind(&e), "message": e.to_string() }));
            emit(&format!("{}\n", output::to_string(&Value::Object(doc))));
            ExitCode::from(1)
        }
    }
}
