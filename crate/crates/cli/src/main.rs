//! Command-line driver: RSK, crystal graphs, spectral flow campaigns and
//! cell computations, all reporting JSON.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use gaudin_rsk::cmcells::{default_cell_points, left_cells, right_cells, two_sided_cells, CellKind, CellOptions};
use gaudin_rsk::combinatorics::{rsk, rsk_inverse, NatMatrix, Partition, SemistandardTableau};
use gaudin_rsk::crystals::{crystal_graph, rsk_crystal_map, verify_isomorphism, CrystalElement};
use gaudin_rsk::liealg::basis_for;
use gaudin_rsk::spectralflow::{bounded_corpus, verify_main_theorem, BlockSpec, FlowOptions, PathKind};
use gaudin_rsk::Error;
use serde::Serialize;
use serde_json::{json, Value};

const OK: u8 = 0;
const MISMATCH: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser, Serialize, Debug)]
#[command(name = "gaudin-rsk", version, about = "RSK, crystals, Gaudin spectral flow and cells", args_override_self = true)]
struct Cli {
    /// Optional key=value file; flags on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for generic coefficients and jitter.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize, Debug)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Insertion and recording tableaux of a matrix, or the inverse map.
    Rsk(RskArgs),
    /// Crystal graph of a set of matrices or tableaux.
    Crystal(CrystalArgs),
    /// Track Gaudin eigenlines and compare the extracted tableaux with RSK.
    Flow(FlowArgs),
    /// Cells of the symmetric group from endpoint coalescence.
    Cells(CellArgs),
}

#[derive(clap::Args, Serialize, Debug)]
struct RskArgs {
    /// Matrix as a JSON array of rows.
    #[arg(long)]
    matrix: Option<String>,
    /// File holding the matrix as JSON.
    #[arg(long)]
    matrix_file: Option<PathBuf>,
    /// Recover the matrix from --p and --q.
    #[arg(long)]
    inverse: bool,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// Rows of the recovered matrix (default: largest entry of Q).
    #[arg(long)]
    rows: Option<usize>,
    /// Columns of the recovered matrix (default: largest entry of P).
    #[arg(long)]
    cols: Option<usize>,
    /// Run the bijection and transpose suite on all matrices with
    /// rows * cols <= max-dim and entries <= max-entry.
    #[arg(long)]
    check: bool,
    #[arg(long, default_value_t = 4)]
    max_dim: usize,
    #[arg(long, default_value_t = 2)]
    max_entry: u32,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CrystalKind {
    Matrix,
    Tableau,
}

#[derive(clap::Args, Serialize, Debug)]
struct CrystalArgs {
    #[arg(long, value_enum, default_value_t = CrystalKind::Matrix)]
    kind: CrystalKind,
    /// Number of rows (the crystal rank) for matrices.
    #[arg(long, default_value_t = 2)]
    rows: usize,
    /// Column sums of the matrices.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u32, 1])]
    col_sums: Vec<u32>,
    /// Shape for the tableau crystal.
    #[arg(long, value_delimiter = ',')]
    shape: Vec<u32>,
    /// Alphabet bound for the tableau crystal.
    #[arg(long, default_value_t = 3)]
    rank: usize,
    /// Also check that RSK commutes with the crystal operators (matrices).
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PathArg {
    Collision,
    CollisionUnit,
    Straight,
}

impl From<PathArg> for PathKind {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Collision => PathKind::Collision,
            PathArg::CollisionUnit => PathKind::CollisionUnit,
            PathArg::Straight => PathKind::StraightToZero,
        }
    }
}

#[derive(clap::Args, Serialize, Debug)]
struct FlowArgs {
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Check every matrix with entries <= bound.
    #[arg(long, default_value_t = 2)]
    bound: u32,
    /// Run a single block with these column sums instead.
    #[arg(long, value_delimiter = ',')]
    k: Vec<u32>,
    /// Restrict the single block to this gl_r weight (row sums).
    #[arg(long, value_delimiter = ',')]
    weight: Vec<u32>,
    /// Evaluation points, strictly increasing, length n.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    z: Vec<f64>,
    /// Twist parameters, strictly increasing, length r.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    q: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    cluster_tol: f64,
    #[arg(long, default_value_t = 1e3)]
    gap_ratio: f64,
    #[arg(long, default_value_t = 16)]
    points_per_decade: usize,
    #[arg(long, value_enum, default_value_t = PathArg::Collision)]
    z_path: PathArg,
    #[arg(long, value_enum, default_value_t = PathArg::Collision)]
    q_path: PathArg,
    /// Largest block dimension allowed.
    #[arg(long, default_value_t = 2000)]
    max_dim: usize,
    /// CSV file for eigenvalue traces.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KindArg {
    Right,
    Left,
    TwoSided,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CellPathArg {
    CmGamma,
    Collision,
    CollisionUnit,
}

#[derive(clap::Args, Serialize, Debug)]
struct CellArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Right)]
    kind: KindArg,
    /// Coalescence radius.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1e3)]
    gap_ratio: f64,
    #[arg(long, value_enum, default_value_t = CellPathArg::CmGamma)]
    path: CellPathArg,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    z: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    q: Vec<f64>,
    /// Largest n allowed.
    #[arg(long, default_value_t = 6)]
    max_n: usize,
}

/// A failed run: exit code and message.
struct Fail(u8, String);

fn usage(msg: impl Into<String>) -> Fail {
    Fail(USAGE, msg.into())
}

fn from_core(e: Error) -> Fail {
    Fail(if e.is_numerical() { INCONCLUSIVE } else { USAGE }, e.to_string())
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    match run(argv) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(argv: Vec<OsString>) -> Result<u8, Fail> {
    let argv = merge_config(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => OK,
                _ => USAGE,
            };
            let _ = e.print();
            return Ok(code);
        }
    };
    let (body, code) = match &cli.command {
        Command::Rsk(a) => cmd_rsk(a)?,
        Command::Crystal(a) => cmd_crystal(a)?,
        Command::Flow(a) => cmd_flow(a, cli.seed)?,
        Command::Cells(a) => cmd_cells(a, cli.seed)?,
    };
    let mut report = serde_json::Map::new();
    report.insert("seed".into(), json!(cli.seed));
    report.insert("config".into(), serde_json::to_value(&cli).map_err(|e| usage(e.to_string()))?);
    report.insert("exit_code".into(), json!(code));
    if let Value::Object(m) = body {
        report.extend(m);
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(report)).map_err(|e| usage(e.to_string()))?;
    text.push('\n');
    match &cli.out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| usage(e.to_string()))?,
    }
    Ok(code)
}

/// Inserts `--key=value` flags from the config file right after the
/// subcommand, so that later command-line flags override them.
fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, Fail> {
    let args: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if a == "--config" {
            path = args.get(i + 1).cloned();
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
    let cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let Some(pos) = args.iter().position(|a| names.contains(a)) else { return Ok(argv) };
    let sub = cmd.find_subcommand(&args[pos]).expect("known subcommand");
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{path}:{}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| usage(format!("{path}:{}: unknown key {key}", lineno + 1)))?;
        if key == "config" {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(OsString::from(format!("--{key}={value}")));
        } else {
            match value {
                "true" => extra.push(OsString::from(format!("--{key}"))),
                "false" => {}
                _ => return Err(usage(format!("{path}:{}: {key} expects true or false", lineno + 1))),
            }
        }
    }
    let mut out = argv;
    out.splice(pos + 1..pos + 1, extra);
    Ok(out)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Fail> {
    let name = path.file_name().ok_or_else(|| usage(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| usage(format!("cannot write {}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, Fail> {
    serde_json::from_str(text).map_err(|e| usage(format!("malformed {what}: {e}")))
}

fn cmd_rsk(a: &RskArgs) -> Result<(Value, u8), Fail> {
    if a.check {
        return rsk_check(a.max_dim, a.max_entry);
    }
    if a.inverse {
        let p: SemistandardTableau = parse_json("P", a.p.as_deref().ok_or_else(|| usage("--inverse needs --p"))?)?;
        let q: SemistandardTableau = parse_json("Q", a.q.as_deref().ok_or_else(|| usage("--inverse needs --q"))?)?;
        let rows = a.rows.unwrap_or(q.max_entry() as usize);
        let cols = a.cols.unwrap_or(p.max_entry() as usize);
        let m = rsk_inverse(&p, &q, rows, cols).map_err(from_core)?;
        return Ok((json!({ "P": p, "Q": q, "matrix": m }), OK));
    }
    let text = match (&a.matrix, &a.matrix_file) {
        (Some(m), None) => m.clone(),
        (None, Some(f)) => fs::read_to_string(f).map_err(|e| usage(format!("cannot read {}: {e}", f.display())))?,
        _ => return Err(usage("give exactly one of --matrix, --matrix-file, --inverse or --check")),
    };
    let m: NatMatrix = parse_json("matrix", &text)?;
    let (p, q) = rsk(&m);
    Ok((json!({ "matrix": m, "P": p, "Q": q }), OK))
}

fn rsk_check(max_dim: usize, max_entry: u32) -> Result<(Value, u8), Fail> {
    let mut cases = 0usize;
    let mut failures = Vec::new();
    for r in 1..=max_dim {
        for n in 1..=max_dim / r {
            for m in NatMatrix::all_bounded(r, n, max_entry) {
                cases += 1;
                let (p, q) = rsk(&m);
                let ok = p.shape() == q.shape()
                    && p.content(n) == m.col_sums()
                    && q.content(r) == m.row_sums()
                    && rsk(&m.transpose()) == (q.clone(), p.clone())
                    && rsk_inverse(&p, &q, r, n).as_ref() == Ok(&m);
                if !ok && failures.len() < 10 {
                    failures.push(m);
                }
            }
        }
    }
    let status = if failures.is_empty() { "ok" } else { "mismatch" };
    let summary = format!("{status}, {cases} cases");
    let code = if failures.is_empty() { OK } else { MISMATCH };
    Ok((json!({ "status": status, "cases": cases, "summary": summary, "failures": failures }), code))
}

fn cmd_crystal(a: &CrystalArgs) -> Result<(Value, u8), Fail> {
    let elements: Vec<CrystalElement> = match a.kind {
        CrystalKind::Matrix => {
            if a.rows == 0 {
                return Err(usage("--rows must be positive"));
            }
            NatMatrix::all_with_col_sums(a.rows, &a.col_sums, None)
                .into_iter()
                .map(|matrix| CrystalElement::Matrix { matrix })
                .collect()
        }
        CrystalKind::Tableau => {
            let shape = Partition::new(a.shape.clone()).map_err(from_core)?;
            SemistandardTableau::all_of_shape(&shape, a.rank as u32)
                .into_iter()
                .map(|t| CrystalElement::tableau(t, a.rank))
                .collect::<Result<_, _>>()
                .map_err(from_core)?
        }
    };
    let edges = crystal_graph(&elements).map_err(from_core)?;
    let mut body = json!({ "elements": elements, "edges": edges });
    let mut code = OK;
    if a.check {
        if !matches!(a.kind, CrystalKind::Matrix) {
            return Err(usage("--check applies to the matrix crystal"));
        }
        let rep = verify_isomorphism(&rsk_crystal_map(), &elements);
        if !rep.passed {
            code = MISMATCH;
        }
        body["rsk_isomorphism"] = json!(rep);
    }
    Ok((body, code))
}

fn default_point(len: usize, scale: f64, shift: f64) -> Vec<f64> {
    (0..len).map(|i| (1.0 + i as f64 + 0.37 * (i * i) as f64) * scale + shift).collect()
}

fn cmd_flow(a: &FlowArgs, seed: u64) -> Result<(Value, u8), Fail> {
    if a.r == 0 || a.n == 0 {
        return Err(usage("r and n must be positive"));
    }
    let blocks = if a.k.is_empty() {
        if !a.weight.is_empty() {
            return Err(usage("--weight needs --k"));
        }
        bounded_corpus(a.r, a.n, a.bound)
    } else {
        vec![BlockSpec { k: a.k.clone(), weight: (!a.weight.is_empty()).then(|| a.weight.clone()) }]
    };
    for b in &blocks {
        let basis = basis_for(a.r, a.n, &b.k, b.weight.as_deref()).map_err(from_core)?;
        if basis.dim() > a.max_dim {
            return Err(from_core(Error::Budget(format!(
                "block k = {:?} has dimension {} > max-dim {}",
                b.k,
                basis.dim(),
                a.max_dim
            ))));
        }
    }
    let z = if a.z.is_empty() { default_point(a.n, 1.0, 0.0) } else { a.z.clone() };
    let q = if a.q.is_empty() { default_point(a.r, 0.9, -0.4) } else { a.q.clone() };
    let opts = FlowOptions {
        seed,
        points_per_decade: a.points_per_decade,
        cluster_tol: a.cluster_tol,
        gap_ratio: a.gap_ratio,
        z_path: a.z_path.into(),
        q_path: a.q_path.into(),
        record_traces: a.trace.is_some(),
        ..FlowOptions::default()
    };
    let bound = a.k.is_empty().then_some(a.bound);
    let report = verify_main_theorem(a.r, a.n, &blocks, bound, Some(&z), Some(&q), &opts).map_err(from_core)?;

    let mut branches = Vec::new();
    let mut classes = Vec::new();
    let mut grid = Vec::new();
    let mut csv = String::from("block,leg,param,branch,operator,value\n");
    for (idx, b) in report.blocks.iter().enumerate() {
        let Some(res) = &b.flow else { continue };
        branches.extend(res.branches.iter().filter(|br| bound.is_none_or(|m| br.label_matrix.entries().iter().all(|&x| x <= m))));
        classes.extend(res.classes.iter().cloned());
        grid.push(json!({ "k": b.k, "weight": b.weight, "legs": res.diagnostics.legs }));
        for t in &res.traces {
            let _ = writeln!(csv, "{idx},{},{:e},{},{},{:e}", t.leg, t.param, t.branch, t.operator, t.value);
        }
    }
    if let Some(path) = &a.trace {
        write_atomic(path, csv.as_bytes())?;
    }
    let code = if !report.mismatches.is_empty() || report.blocks.iter().any(|b| b.failure.is_some() && !b.inconclusive) {
        MISMATCH
    } else if report.inconclusive() {
        INCONCLUSIVE
    } else {
        OK
    };
    let body = json!({
        "params": { "r": a.r, "n": a.n, "z": z, "q": q, "options": opts },
        "grid": grid,
        "branches": branches,
        "classes": classes,
        "rsk_agreement": report.all_agree(),
        "summary": report,
    });
    Ok((body, code))
}

fn cmd_cells(a: &CellArgs, seed: u64) -> Result<(Value, u8), Fail> {
    if a.n == 0 || a.n > a.max_n {
        return Err(from_core(Error::Budget(format!("n = {} is outside 1..={}", a.n, a.max_n))));
    }
    let (dz, dq) = default_cell_points(a.n);
    let z = if a.z.is_empty() { dz } else { a.z.clone() };
    let q = if a.q.is_empty() { dq } else { a.q.clone() };
    let opts = CellOptions {
        flow: FlowOptions { seed, cluster_tol: a.tol, gap_ratio: a.gap_ratio, ..FlowOptions::default() },
        path: match a.path {
            CellPathArg::CmGamma => PathKind::CmGamma,
            CellPathArg::Collision => PathKind::Collision,
            CellPathArg::CollisionUnit => PathKind::CollisionUnit,
        },
    };
    let rep = match a.kind {
        KindArg::Right => right_cells(a.n, &z, &q, &opts),
        KindArg::Left => left_cells(a.n, &z, &q, &opts),
        KindArg::TwoSided => two_sided_cells(a.n, &z, &q, &opts),
    }
    .map_err(from_core)?;
    let kind = match rep.kind {
        CellKind::Right => "right",
        CellKind::Left => "left",
        CellKind::TwoSided => "two-sided",
    };
    let code = if rep.matches_kl { OK } else { MISMATCH };
    let body = json!({
        "n": rep.n,
        "kind": kind,
        "z": z,
        "q": q,
        "blocks": rep.partition.blocks,
        "block_sizes": rep.partition.sizes(),
        "expected_class_count": rep.expected_class_count,
        "matches_kl": rep.matches_kl,
        "branches": rep.branches,
        "diagnostics": rep.diagnostics,
    });
    Ok((body, code))
}
