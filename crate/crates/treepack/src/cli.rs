//! Command-line front end: instance generation, the solvers and
//! checkers behind one flag-driven binary, and an experiment harness.
//!
//! Every run writes a single text document to stdout (or `--out`) that
//! starts with a JSON metadata object `{version, seed, argv}` — as a
//! field of the JSON body, or as a `#`/`//` comment line in csv and dot
//! mode — so results stay reproducible from the file alone. Exit codes:
//! 0 on verified success or a pass verdict, 1 on a verified negative
//! outcome (infeasible, failed, fail verdict), 2 on usage errors.

use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::cycles::{check_cycle_list, decompose_long_cycles, CycleDecompParams};
use crate::diagnostics::{
    check_dense, check_quasi_random, check_regular_pair, check_robust_expander, DenseParams,
    ExpanderParams, QuasiRandomParams, RegularityParams,
};
use crate::graph::{
    gen, graph_to_text, parse_graph_text, BipartitionView, SimpleGraph, VertexId,
};
use crate::orient::{orient_with_fallback, InfeasibleWitness, OrientError, OrientMethod, OrientParams};
use crate::packer::{
    pack_exact, pack_heuristic, verify_certificate, Assignment, HeuristicConfig,
    HeuristicOutcome, PackError, PackMode, PackOutcome, PackingCertificate, Verdict,
};
use crate::tree::{forests_to_json, gen_gl_sequence, gen_random_tree, parse_forest_json, RootedForest};
use crate::walk::{walk_embed_tree, CycleBlowup, WalkEmbedOutcome, WalkEmbedParams};

#[derive(Parser)]
#[command(
    name = "treepack",
    version,
    about = "Tree packing and decomposition toolkit",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

/// Flags shared by every subcommand. Each one uses the subset that is
/// meaningful for it; the seed is always recorded in the metadata.
#[derive(Args)]
struct Common {
    /// Seed for every random choice, recorded in the output metadata.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (default json; bench defaults to csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Node budget for exact searches.
    #[arg(long)]
    budget: Option<u64>,
    /// Retry budget: restarts or fresh-seed attempts, where applicable.
    #[arg(long)]
    retries: Option<usize>,
    /// Slack multiplier for tolerance windows, where applicable.
    #[arg(long)]
    slack: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphKind {
    Complete,
    Gnp,
    Regular,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TreeKind {
    /// One tree of every order 1..=n, each with maximum degree ≤ delta.
    Gl,
    /// `count` independent random trees on n vertices.
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    QuasiRandom,
    Dense,
    RegularPair,
    RobustExpander,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Pack,
    Decompose,
}

impl From<ModeArg> for PackMode {
    fn from(m: ModeArg) -> PackMode {
        match m {
            ModeArg::Pack => PackMode::Pack,
            ModeArg::Decompose => PackMode::Decompose,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchSuite {
    /// Degree-bounded spanning sequences heuristically packed into cliques.
    Gl,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a host graph (complete, G(n,p), or random regular).
    GenGraph {
        /// Which generator to run.
        #[arg(long, value_enum)]
        kind: GraphKind,
        /// Number of vertices.
        #[arg(long)]
        n: usize,
        /// Edge probability (gnp only).
        #[arg(long)]
        p: Option<f64>,
        /// Degree (regular only).
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a tree sequence in the forest JSON format.
    GenTrees {
        #[arg(long, value_enum, default_value_t = TreeKind::Gl)]
        kind: TreeKind,
        /// Largest order (gl) or the order of every tree (random).
        #[arg(long)]
        n: usize,
        /// Maximum degree bound.
        #[arg(long, default_value_t = 3)]
        delta: usize,
        /// Number of trees (random only).
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run a structural check on a graph file and report the verdict.
    Diagnose {
        /// Host graph file (text or JSON).
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        check: CheckKind,
        /// Density reference; defaults to the graph's own edge density.
        #[arg(long)]
        p: Option<f64>,
        /// Window width for quasi-random and regular-pair checks.
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Set-size fraction (dense check).
        #[arg(long)]
        beta: Option<f64>,
        /// Density threshold (dense check).
        #[arg(long)]
        alpha: Option<f64>,
        /// Robustness fraction (robust-expander check).
        #[arg(long)]
        nu: Option<f64>,
        /// Set-size fraction bounds (robust-expander check).
        #[arg(long)]
        tau: Option<f64>,
        /// Density reference for the regular-pair check.
        #[arg(long)]
        d: Option<f64>,
        /// Also require every cross-degree within the window.
        #[arg(long, default_value_t = false)]
        super_regular: bool,
        /// First side, comma-separated vertices (regular-pair check).
        #[arg(long)]
        part_a: Option<String>,
        /// Second side, comma-separated vertices (regular-pair check).
        #[arg(long)]
        part_b: Option<String>,
        /// Sample count for checks that sample above their exhaustive cap.
        #[arg(long)]
        samples: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Embed a degree-bounded tree into an odd-cycle blow-up by random walks.
    WalkEmbed {
        /// Odd cycle length of the blow-up.
        #[arg(long)]
        ell: usize,
        /// Cluster size and per-cluster capacity.
        #[arg(long)]
        m: usize,
        /// Tree order, when generating the tree.
        #[arg(long)]
        n: Option<usize>,
        /// Maximum degree for the generated tree.
        #[arg(long, default_value_t = 3)]
        delta: usize,
        /// Embed the first tree of this forest file instead of generating.
        #[arg(long)]
        trees: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Peel long odd cycles from a dense odd-order graph.
    CycleDecomp {
        #[arg(long)]
        graph: PathBuf,
        /// Parts per fair partition; larger keeps cycles longer.
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Orient every edge so that all out-degrees equal the average degree.
    Orient {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustively pack or decompose; complete and honest on small hosts.
    PackExact {
        #[arg(long)]
        graph: PathBuf,
        /// Forest JSON file; assignments refer to trees by file position.
        #[arg(long)]
        trees: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Decompose)]
        mode: ModeArg,
        #[command(flatten)]
        common: Common,
    },
    /// Staged randomized packer with restarts and certificates.
    PackHeuristic {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        trees: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Decompose)]
        mode: ModeArg,
        /// Nested vortex levels to steer around (0 disables steering).
        #[arg(long, default_value_t = 0)]
        levels: usize,
        /// Level shrinkage factor.
        #[arg(long, default_value_t = 0.3)]
        gamma: f64,
        /// Vortex window width.
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Check a packing certificate against its host and tree list.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        trees: PathBuf,
        /// Certificate file, bare or as the `certificate` field of a run.
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a suite of instances and tabulate verified outcomes.
    Bench {
        #[arg(value_enum)]
        suite: BenchSuite,
        /// Host and sequence order per instance.
        #[arg(long)]
        n: usize,
        /// Number of instances; instance i uses seed `seed + i`.
        #[arg(long)]
        instances: usize,
        /// Maximum degree bound for the tree sequences.
        #[arg(long, default_value_t = 3)]
        delta: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Parse argv, run the requested subcommand, and write its output to
/// stdout or the `--out` file. Returns the process exit code: 0 on
/// success or a pass verdict, 1 on a verified negative outcome, 2 on
/// usage errors.
pub fn cli_dispatch(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    // The metadata argv reproduces the run's content; the output
    // destination does not affect content, so --out is not recorded
    // and the same command is byte-identical wherever it lands.
    let mut meta_args: Vec<String> = Vec::new();
    let mut skip = false;
    for a in argv.get(1..).unwrap_or(&[]) {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            meta_args.push(a.clone());
        }
    }
    let (common, outcome) = run(cli.cmd, &meta_args);
    match outcome {
        Ok((text, code)) => {
            let wrote = match &common {
                Some(path) => std::fs::write(path, &text).map_err(|e| e.to_string()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match wrote {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("error: cannot write output: {e}");
                    2
                }
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

/// Dispatch one parsed subcommand. Returns the `--out` path alongside
/// the rendered output and exit code, or a usage error message.
fn run(cmd: Cmd, args: &[String]) -> (Option<PathBuf>, Result<(String, i32), String>) {
    match cmd {
        Cmd::GenGraph {
            kind,
            n,
            p,
            d,
            common,
        } => (common.out.clone(), gen_graph(kind, n, p, d, &common, args)),
        Cmd::GenTrees {
            kind,
            n,
            delta,
            count,
            common,
        } => (
            common.out.clone(),
            gen_trees(kind, n, delta, count, &common, args),
        ),
        Cmd::Diagnose {
            graph,
            check,
            p,
            epsilon,
            beta,
            alpha,
            nu,
            tau,
            d,
            super_regular,
            part_a,
            part_b,
            samples,
            common,
        } => {
            let flags = DiagnoseFlags {
                p,
                epsilon,
                beta,
                alpha,
                nu,
                tau,
                d,
                super_regular,
                part_a,
                part_b,
                samples,
            };
            (common.out.clone(), diagnose(&graph, check, &flags, &common, args))
        }
        Cmd::WalkEmbed {
            ell,
            m,
            n,
            delta,
            trees,
            common,
        } => (
            common.out.clone(),
            walk_embed(ell, m, n, delta, trees.as_deref(), &common, args),
        ),
        Cmd::CycleDecomp { graph, r, common } => {
            (common.out.clone(), cycle_decomp(&graph, r, &common, args))
        }
        Cmd::Orient { graph, common } => (common.out.clone(), orient(&graph, &common, args)),
        Cmd::PackExact {
            graph,
            trees,
            mode,
            common,
        } => (
            common.out.clone(),
            pack_exact_cmd(&graph, &trees, mode.into(), &common, args),
        ),
        Cmd::PackHeuristic {
            graph,
            trees,
            mode,
            levels,
            gamma,
            epsilon,
            common,
        } => (
            common.out.clone(),
            pack_heuristic_cmd(&graph, &trees, mode.into(), levels, gamma, epsilon, &common, args),
        ),
        Cmd::Verify {
            graph,
            trees,
            cert,
            common,
        } => (common.out.clone(), verify(&graph, &trees, &cert, &common, args)),
        Cmd::Bench {
            suite,
            n,
            instances,
            delta,
            common,
        } => (
            common.out.clone(),
            bench(suite, n, instances, delta, &common, args),
        ),
    }
}

// ---------------------------------------------------------------------
// Output plumbing.

/// The metadata object included in every output.
fn meta(args: &[String], seed: u64) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "argv": args,
    })
}

/// A JSON body with the metadata merged in as a `meta` field.
fn json_doc(meta: Value, mut body: Value) -> String {
    let obj = body.as_object_mut().expect("json bodies are objects");
    obj.insert("meta".into(), meta);
    let mut s = serde_json::to_string_pretty(&body).expect("documents serialize");
    s.push('\n');
    s
}

/// A comment line carrying the metadata, for csv and dot outputs.
fn comment_header(prefix: &str, meta: &Value) -> String {
    format!(
        "{prefix} {}\n",
        serde_json::to_string(meta).expect("metadata serializes")
    )
}

fn format_of(common: &Common, default: Format) -> Format {
    common.format.unwrap_or(default)
}

/// Distinct edge colors for decomposition drawings, recycled as needed.
const PALETTE: [&str; 12] = [
    "#e6194b", "#3cb44b", "#ffb000", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6",
    "#9a6324", "#800000", "#008080", "#000075",
];

/// Render a host graph and a list of embedded trees as a DOT document,
/// each tree's image in its own color, unclaimed edges gray.
fn decomposition_dot(
    header: &str,
    g: &SimpleGraph,
    trees: &[RootedForest],
    assignments: &[Assignment],
) -> String {
    let n = g.n();
    let mut owner: Vec<Option<usize>> = vec![None; n * n];
    for a in assignments {
        for (u, v) in trees[a.tree_id].edges() {
            let (x, y) = (a.map[u].min(a.map[v]), a.map[u].max(a.map[v]));
            owner[x * n + y] = Some(a.tree_id);
        }
    }
    let mut s = String::from(header);
    s.push_str("graph decomposition {\n  node [shape=circle];\n");
    for v in 0..n {
        s.push_str(&format!("  {v};\n"));
    }
    for (u, v) in g.edges() {
        match owner[u * n + v] {
            Some(id) => s.push_str(&format!(
                "  {u} -- {v} [color=\"{}\", tooltip=\"tree {id}\"];\n",
                PALETTE[id % PALETTE.len()]
            )),
            None => s.push_str(&format!("  {u} -- {v} [color=gray, style=dashed];\n")),
        }
    }
    s.push_str("}\n");
    s
}

// ---------------------------------------------------------------------
// File loading.

fn read_file(path: &std::path::Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

/// Drop `#` and `//` comment lines so metadata headers round-trip.
fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| {
            let t = l.trim_start();
            !t.starts_with('#') && !t.starts_with("//")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Load a host graph from the text format (`n m` header plus `u v`
/// lines) or from a JSON object with `n` and `edges` fields.
fn load_graph(path: &std::path::Path) -> Result<SimpleGraph, String> {
    let body = strip_comments(&read_file(path)?);
    if body.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&body)
            .map_err(|e| format!("{}: invalid JSON: {e}", path.display()))?;
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| format!("{}: missing numeric field \"n\"", path.display()))?;
        let edges: Vec<(VertexId, VertexId)> = v
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| format!("{}: missing array field \"edges\"", path.display()))?
            .iter()
            .map(|e| {
                let pair = e.as_array().filter(|p| p.len() == 2);
                match pair.and_then(|p| Some((p[0].as_u64()?, p[1].as_u64()?))) {
                    Some((u, v)) => Ok((u as VertexId, v as VertexId)),
                    None => Err(format!("{}: malformed edge entry {e}", path.display())),
                }
            })
            .collect::<Result<_, _>>()?;
        SimpleGraph::from_edges(n as usize, &edges).map_err(|e| format!("{}: {e}", path.display()))
    } else {
        parse_graph_text(&body).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Load a tree list from the forest JSON format, in file order.
fn load_trees(path: &std::path::Path) -> Result<Vec<RootedForest>, String> {
    let body = strip_comments(&read_file(path)?);
    let pairs = parse_forest_json(&body).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(pairs.into_iter().map(|(_, t)| t).collect())
}

/// Load a certificate: either a bare certificate object or any JSON
/// document with a `certificate` field (the packers' own output).
fn load_cert(path: &std::path::Path) -> Result<PackingCertificate, String> {
    let body = strip_comments(&read_file(path)?);
    let v: Value = serde_json::from_str(&body)
        .map_err(|e| format!("{}: invalid JSON: {e}", path.display()))?;
    let cert_value = v.get("certificate").cloned().unwrap_or(v);
    serde_json::from_value(cert_value).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_vertex_list(s: &str, what: &str) -> Result<Vec<VertexId>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<VertexId>()
                .map_err(|_| format!("{what}: \"{t}\" is not a vertex index"))
        })
        .collect()
}

// ---------------------------------------------------------------------
// Subcommands.

fn gen_graph(
    kind: GraphKind,
    n: usize,
    p: Option<f64>,
    d: Option<usize>,
    common: &Common,
    args: &[String],
) -> Result<(String, i32), String> {
    let g = match kind {
        GraphKind::Complete => gen::complete(n),
        GraphKind::Gnp => {
            let p = p.ok_or("gnp requires --p")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("--p must lie in [0, 1], got {p}"));
            }
            gen::gnp(n, p, common.seed)
        }
        GraphKind::Regular => {
            let d = d.ok_or("regular requires --d")?;
            if d >= n.max(1) {
                return Err(format!("--d must be below n, got d={d} n={n}"));
            }
            if n * d % 2 != 0 {
                return Err(format!("no {d}-regular graph on {n} vertices: n·d is odd"));
            }
            gen::random_regular(n, d, common.seed)
        }
    };
    let m = meta(args, common.seed);
    let text = match format_of(common, Format::Json) {
        Format::Json => json_doc(m, json!({ "n": g.n(), "m": g.m(), "edges": g.edges() })),
        Format::Csv => format!("{}{}", comment_header("#", &m), graph_to_text(&g)),
        Format::Dot => {
            let mut s = comment_header("//", &m);
            s.push_str("graph g {\n");
            for v in 0..g.n() {
                s.push_str(&format!("  {v};\n"));
            }
            for (u, v) in g.edges() {
                s.push_str(&format!("  {u} -- {v};\n"));
            }
            s.push_str("}\n");
            s
        }
    };
    Ok((text, 0))
}

fn gen_trees(
    kind: TreeKind,
    n: usize,
    delta: usize,
    count: usize,
    common: &Common,
    args: &[String],
) -> Result<(String, i32), String> {
    let trees: Vec<(u64, RootedForest)> = match kind {
        TreeKind::Gl => gen_gl_sequence(n, delta, common.seed)
            .map_err(|e| e.to_string())?
            .into_iter()
            .enumerate()
            .map(|(i, t)| (i as u64, t))
            .collect(),
        TreeKind::Random => (0..count)
            .map(|i| {
                gen_random_tree(n, delta, common.seed.wrapping_add(i as u64))
                    .map(|t| (i as u64, t))
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?,
    };
    let m = meta(args, common.seed);
    let text = match format_of(common, Format::Json) {
        Format::Json => {
            let refs: Vec<(u64, &RootedForest)> = trees.iter().map(|(i, t)| (*i, t)).collect();
            let file: Value = serde_json::from_str(&forests_to_json(&refs, Some(delta)))
                .expect("forest files are valid JSON");
            json_doc(m, file)
        }
        Format::Csv => {
            let mut s = comment_header("#", &m);
            s.push_str("id,n,m,delta\n");
            for (i, t) in &trees {
                s.push_str(&format!("{i},{},{},{}\n", t.n(), t.edges().len(), t.delta()));
            }
            s
        }
        Format::Dot => {
            let mut s = comment_header("//", &m);
            for (i, t) in &trees {
                s.push_str(&format!("graph tree_{i} {{\n"));
                for v in 0..t.n() {
                    s.push_str(&format!("  t{i}_{v} [label={v}];\n"));
                }
                for (u, v) in t.edges() {
                    s.push_str(&format!("  t{i}_{u} -- t{i}_{v};\n"));
                }
                s.push_str("}\n");
            }
            s
        }
    };
    Ok((text, 0))
}

struct DiagnoseFlags {
    p: Option<f64>,
    epsilon: f64,
    beta: Option<f64>,
    alpha: Option<f64>,
    nu: Option<f64>,
    tau: Option<f64>,
    d: Option<f64>,
    super_regular: bool,
    part_a: Option<String>,
    part_b: Option<String>,
    samples: Option<u64>,
}

fn diagnose(
    graph: &std::path::Path,
    check: CheckKind,
    flags: &DiagnoseFlags,
    common: &Common,
    args: &[String],
) -> Result<(String, i32), String> {
    let g = load_graph(graph)?;
    let density = |g: &SimpleGraph| -> f64 {
        let n = g.n();
        if n < 2 {
            0.0
        } else {
            2.0 * g.m() as f64 / (n as f64 * (n - 1) as f64)
        }
    };
    let report = match check {
        CheckKind::QuasiRandom => {
            let p = flags.p.unwrap_or_else(|| density(&g));
            check_quasi_random(
                &g,
                QuasiRandomParams {
                    epsilon: flags.epsilon,
                    p,
                },
            )
        }
        CheckKind::Dense => {
            let beta = flags.beta.ok_or("dense requires --beta")?;
            let alpha = flags.alpha.ok_or("dense requires --alpha")?;
            let mut params = DenseParams::new(beta, alpha);
            params.seed = common.seed;
            if let Some(s) = flags.samples {
                params.samples = s;
            }
            check_dense(&g, &params)
        }
        CheckKind::RegularPair => {
            let a = parse_vertex_list(
                flags.part_a.as_deref().ok_or("regular-pair requires --part-a")?,
                "--part-a",
            )?;
            let b = parse_vertex_list(
                flags.part_b.as_deref().ok_or("regular-pair requires --part-b")?,
                "--part-b",
            )?;
            let view = BipartitionView::new(&g, &a, &b).map_err(|e| e.to_string())?;
            let d = flags.d.ok_or("regular-pair requires --d")?;
            let mut params = RegularityParams::new(flags.epsilon, d);
            params.super_regular = flags.super_regular;
            params.seed = common.seed;
            if let Some(s) = flags.samples {
                params.samples = s;
            }
            check_regular_pair(&view, &params)
        }
        CheckKind::RobustExpander => {
            let nu = flags.nu.ok_or("robust-expander requires --nu")?;
            let tau = flags.tau.ok_or("robust-expander requires --tau")?;
            let mut params = ExpanderParams::new(nu, tau);
            params.seed = common.seed;
            if let Some(s) = flags.samples {
                params.samples = s;
            }
            check_robust_expander(&g, &params)
        }
    }
    .map_err(|e| e.to_string())?;
    let pass = report.verdict == crate::diagnostics::Verdict::Pass;
    let m = meta(args, common.seed);
    let text = match format_of(common, Format::Json) {
        Format::Json => json_doc(
            m,
            json!({ "report": serde_json::to_value(&report).expect("reports serialize") }),
        ),
        Format::Csv => {
            let mut s = comment_header("#", &m);
            s.push_str("check,verdict,mode,samples\n");
            s.push_str(&format!(
                "{},{},{:?},{}\n",
                report.check,
                if pass { "pass" } else { "fail" },
                report.mode,
                report.samples.map_or(String::new(), |x| x.to_string()),
            ));
            s
        }
        Format::Dot => return Err("diagnose has no dot rendering".into()),
    };
    Ok((text, if pass { 0 } else { 1 }))
}

fn walk_embed(
    ell: usize,
    cap: usize,
    n: Option<usize>,
    delta: usize,
    trees: Option<&std::path::Path>,
    common: &Common,
    args: &[String],
) -> Result<(String, i32), String> {
    let tree = match trees {
        Some(path) => load_trees(path)?
            .into_iter()
            .next()
            .ok_or_else(|| format!("{}: empty tree list", path.display()))?,
        None => {
            let n = n.ok_or("walk-embed requires --n or --trees")?;
            gen_random_tree(n, delta, common.seed).map_err(|e| e.to_string())?
        }
    };
    let blowup = CycleBlowup::new(ell, cap).map_err(|e| e.to_string())?;
    let mut params = WalkEmbedParams::new(ell, cap, common.seed);
    if let Some(r) = common.retries {
        params.retry_limit = r;
    }
    let outcome = walk_embed_tree(&tree, &blowup, &params).map_err(|e| e.to_string())?;
    let m = meta(args, common.seed);
    match outcome {
        WalkEmbedOutcome::Embedded(pe) => {
            let map: Vec<VertexId> = (0..tree.n())
                .map(|v| pe.image(v).expect("verified embeddings are total"))
                .collect();
            let text = match format_of(common, Format::Json) {
                Format::Json => json_doc(
                    m,
                    json!({
                        "outcome": "embedded",
                        "ell": ell,
                        "cluster_size": cap,
                        "tree_order": tree.n(),
                        "map": map,
                    }),
                ),
                Format::Csv => {
                    let mut s = comment_header("#", &m);
                    s.push_str("vertex,image,cluster\n");
                    for (v, &img) in map.iter().enumerate() {
                        s.push_str(&format!("{v},{img},{}\n", blowup.cluster_of(img)));
                    }
                    s
                }
                Format::Dot => return Err("walk-embed has no dot rendering".into()),
            };
            Ok((text, 0))
        }
        WalkEmbedOutcome::CapacityFailure(f) => {
            let text = match format_of(common, Format::Json) {
                Format::Json => json_doc(
                    m,
                    json!({
                        "outcome": "capacity-failure",
                        "attempts": f.attempts,
                        "capacity": f.capacity,
                        "best_max_load": f.best_max_load,
                        "best_max_pair_load": f.best_max_pair_load,
                    }),
                ),
                Format::Csv => {
                    let mut s = comment_header("#", &m);
                    s.push_str("outcome,attempts,capacity,best_max_load,best_max_pair_load\n");
                    s.push_str(&format!(
                        "capacity-failure,{},{},{},{}\n",
                        f.attempts, f.capacity, f.best_max_load, f.best_max_pair_load
                    ));
                    s
                }
                Format::Dot => return Err("walk-embed has no dot rendering".into()),
            };
            Ok((text, 1))
        }
    }
}

fn cycle_decomp(
    graph: &std::path::Path,
    r: usize,
    common: &Common,
    args: &[String],
) -> Result<(String, i32), String> {
    let g = load_graph(graph)?;
    let mut params = CycleDecompParams::new(r, common.seed);
    if let Some(rr) = common.retries {
        params.hamilton_restarts = rr;
    }
    let m = meta(args, common.seed);
    match decompose_long_cycles(&g, &params) {
        Ok((list, leftover)) => {
            check_cycle_list(&g, &list).expect("returned cycle lists are edge-disjoint");
            let text = match format_of(common, Format::Json) {
                Format::Json => json_doc(
                    m,
                    json!({
                        "outcome": "decomposed",
                        "cycles": list.cycles,
                        "hamilton_flags": list.hamilton_flags,
                        "leftover": { "n": leftover.n(), "m": leftover.m(), "edges": leftover.edges() },
                    }),
                ),
                Format::Csv => {
                    let mut s = comment_header("#", &m);
                    s.push_str("cycle,hamilton,length,vertices\n");
                    for (i, c) in list.cycles.iter().enumerate() {
                        let verts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                        s.push_str(&format!(
                            "{i},{},{},{}\n",
                            list.hamilton_flags[i],
                            c.len(),
                            verts.join(" ")
                        ));
                    }
                    s
                }
                Format::Dot => {
                    let mut s = comment_header("//", &m);
                    s.push_str("graph cycles {\n  node [shape=circle];\n");
                    for v in 0..g.n() {
                        s.push_str(&format!("  {v};\n"));
                    }
                    for (i, c) in list.cycles.iter().enumerate() {
                        let color = PALETTE[i % PALETTE.len()];
                        for k in 0..c.len() {
                            let (u, v) = (c[k], c[(k + 1) % c.len()]);
                            s.push_str(&format!(
                                "  {u} -- {v} [color=\"{color}\", tooltip=\"cycle {i}\"];\n"
                            ));
                        }
                    }
                    for (u, v) in leftover.edges() {
                        s.push_str(&format!("  {u} -- {v} [color=gray, style=dashed];\n"));
                    }
                    s.push_str("}\n");
                    s
                }
            };
            Ok((text, 0))
        }
        Err(e) => {
            let text = match format_of(common, Format::Json) {
                Format::Json => json_doc(m, json!({ "outcome": "error", "error": e.to_string() })),
                Format::Csv => {
                    let mut s = comment_header("#", &m);
                    s.push_str("outcome,error\n");
                    s.push_str(&format!("error,{e}\n"));
                    s
                }
                Format::Dot => return Err("no dot rendering for a failed decomposition".into()),
            };
            Ok((text, 1))
        }
    }
}

fn orient(
    graph: &std::path::Path,
    common: &Common,
    args: &[String],
) -> Result<(String, i32), String> {
    let g = load_graph(graph)?;
    let mut params = OrientParams::new(common.seed);
    if let Some(r) = common.retries {
        params.loop_attempts = r;
    }
    let m = meta(args, common.seed);
    match orient_with_fallback(&g, &params) {
        Ok((o, method)) => {
            let dbar = if g.n() == 0 { 0 } else { g.m() / g.n() };
            o.verify_out_regular(&g, dbar)
                .expect("returned orientations are out-regular");
            let method = match method {
                OrientMethod::Peeling => "peeling",
                OrientMethod::Oracle => "oracle",
            };
            let arcs = o.arcs();
            let text = match format_of(common, Format::Json) {
                Format::Json => json_doc(
                    m,
                    json!({ "outcome": "oriented", "dbar": dbar, "method": method, "arcs": arcs }),
                ),
                Format::Csv => {
                    let mut s = comment_header("#", &m);
                    s.push_str("tail,head\n");
                    for (t, h) in arcs {
                        s.push_str(&format!("{t},{h}\n"));
                    }
                    s
                }
                Format::Dot => {
                    let mut s = comment_header("//", &m);
                    s.push_str("digraph oriented {\n  node [shape=circle];\n");
                    for v in 0..g.n() {
                        s.push_str(&format!("  {v};\n"));
                    }
                    for (t, h) in arcs {
                        s.push_str(&format!("  {t} -> {h};\n"));
                    }
                    s.push_str("}\n");
                    s
                }
            };
            Ok((text, 0))
        }
        Err(e) => {
            let witness = match &e {
                OrientError::Infeasible { witness } => Some(match witness {
                    InfeasibleWitness::EdgeCountMismatch { m, needed } => {
                        json!({ "kind": "edge-count", "m": m, "needed": needed })
                    }
                    InfeasibleWitness::OverfullSet {
                        vertices,
                        inside_edges,
                        capacity,
                    } => json!({
                        "kind": "overfull-set",
                        "vertices": vertices,
                        "inside_edges": inside_edges,
                        "capacity": capacity,
                    }),
                }),
                _ => None,
            };
            let text = match format_of(common, Format::Json) {
                Format::Json => json_doc(
                    m,
                    json!({ "outcome": "error", "error": e.to_string(), "witness": witness }),
                ),
                Format::Csv => {
                    let mut s = comment_header("#", &m);
                    s.push_str("outcome,error\n");
                    s.push_str(&format!("error,{e}\n"));
                    s
                }
                Format::Dot => return Err("no dot rendering for a failed orientation".into()),
            };
            Ok((text, 1))
        }
    }
}

/// Shared by both packers: the edge-count feasibility screen, reported
/// with the reason `edge-count`.
fn edge_count_screen(
    g: &SimpleGraph,
    trees: &[RootedForest],
    mode: PackMode,
) -> Option<(usize, usize)> {
    let total: usize = trees.iter().map(|t| t.edges().len()).sum();
    let impossible = match mode {
        PackMode::Decompose => total != g.m(),
        PackMode::Pack => total > g.m(),
    };
    impossible.then_some((total, g.m()))
}

fn mode_str(mode: PackMode) -> &'static str {
    match mode {
        PackMode::Pack => "pack",
        PackMode::Decompose => "decompose",
    }
}

/// Render a packing result in the requested format.
fn packing_output(
    m: Value,
    fmt: Format,
    g: &SimpleGraph,
    trees: &[RootedForest],
    cert: &PackingCertificate,
    report: Option<Value>,
) -> String {
    match fmt {
        Format::Json => {
            let mut body = json!({
                "outcome": "packed",
                "certificate": serde_json::to_value(cert).expect("certificates serialize"),
            });
            if let Some(r) = report {
                body.as_object_mut()
                    .expect("body is an object")
                    .insert("report".into(), r);
            }
            json_doc(m, body)
        }
        Format::Csv => {
            let mut s = comment_header("#", &m);
            s.push_str("tree_id,map\n");
            for a in &cert.assignments {
                let images: Vec<String> = a.map.iter().map(|v| v.to_string()).collect();
                s.push_str(&format!("{},{}\n", a.tree_id, images.join(" ")));
            }
            s
        }
        Format::Dot => decomposition_dot(&comment_header("//", &m), g, trees, &cert.assignments),
    }
}

fn pack_exact_cmd(
    graph: &std::path::Path,
    trees_path: &std::path::Path,
    mode: PackMode,
    common: &Common,
    args: &[String],
) -> Result<(String, i32), String> {
    let g = load_graph(graph)?;
    let trees = load_trees(trees_path)?;
    let m = meta(args, common.seed);
    let fmt = format_of(common, Format::Json);
    if let Some((have, need)) = edge_count_screen(&g, &trees, mode) {
        let text = negative_output(
            m,
            fmt,
            json!({ "outcome": "infeasible", "reason": "edge-count", "have": have, "need": need }),
        )?;
        return Ok((text, 1));
    }
    let budget = common.budget.unwrap_or(10_000_000);
    match pack_exact(&g, &trees, mode, budget) {
        PackOutcome::Packed(cert) => {
            assert!(
                verify_certificate(&g, &trees, &cert).is_pass(),
                "exact packer returned an invalid certificate"
            );
            Ok((packing_output(m, fmt, &g, &trees, &cert, None), 0))
        }
        PackOutcome::Infeasible => {
            let text = negative_output(
                m,
                fmt,
                json!({ "outcome": "infeasible", "mode": mode_str(mode) }),
            )?;
            Ok((text, 1))
        }
        PackOutcome::Exhausted { expanded } => {
            let text = negative_output(
                m,
                fmt,
                json!({ "outcome": "exhausted", "expanded": expanded, "budget": budget }),
            )?;
            Ok((text, 1))
        }
    }
}

/// Render a negative packing outcome (no certificate to draw or list).
fn negative_output(m: Value, fmt: Format, body: Value) -> Result<String, String> {
    match fmt {
        Format::Json => Ok(json_doc(m, body)),
        Format::Csv => {
            let mut s = comment_header("#", &m);
            let obj = body.as_object().expect("outcome bodies are objects");
            let keys: Vec<&String> = obj.keys().collect();
            let vals: Vec<String> = obj
                .values()
                .map(|v| match v {
                    Value::String(x) => x.clone(),
                    other => other.to_string(),
                })
                .collect();
            s.push_str(&format!(
                "{}\n{}\n",
                keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(","),
                vals.join(",")
            ));
            Ok(s)
        }
        Format::Dot => Err("no dot rendering for a negative outcome".into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn pack_heuristic_cmd(
    graph: &std::path::Path,
    trees_path: &std::path::Path,
    mode: PackMode,
    levels: usize,
    gamma: f64,
    epsilon: f64,
    common: &Common,
    args: &[String],
) -> Result<(String, i32), String> {
    let g = load_graph(graph)?;
    let trees = load_trees(trees_path)?;
    let m = meta(args, common.seed);
    let fmt = format_of(common, Format::Json);
    let mut config = HeuristicConfig::new(common.seed);
    config.mode = mode;
    config.vortex_levels = levels;
    config.gamma = gamma;
    config.epsilon = epsilon;
    if let Some(s) = common.slack {
        config.slack = s;
    }
    if let Some(r) = common.retries {
        config.restarts = r;
    }
    if let Some(b) = common.budget {
        config.node_budget = b as usize;
    }
    match pack_heuristic(&g, &trees, &config) {
        Ok(HeuristicOutcome::Packed {
            certificate,
            report,
        }) => {
            let report = serde_json::to_value(&report).expect("reports serialize");
            Ok((
                packing_output(m, fmt, &g, &trees, &certificate, Some(report)),
                0,
            ))
        }
        Ok(HeuristicOutcome::Failed { report }) => {
            let text = negative_output(
                m,
                fmt,
                json!({
                    "outcome": "failed",
                    "failed_phase": report.failed_phase,
                    "residual_edges": report.residual_edges,
                    "restarts_used": report.restarts_used,
                }),
            )?;
            Ok((text, 1))
        }
        Err(PackError::EdgeCountMismatch { have, need }) => {
            let text = negative_output(
                m,
                fmt,
                json!({ "outcome": "infeasible", "reason": "edge-count", "have": have, "need": need }),
            )?;
            Ok((text, 1))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn verify(
    graph: &std::path::Path,
    trees_path: &std::path::Path,
    cert_path: &std::path::Path,
    common: &Common,
    args: &[String],
) -> Result<(String, i32), String> {
    let g = load_graph(graph)?;
    let trees = load_trees(trees_path)?;
    let cert = load_cert(cert_path)?;
    let m = meta(args, common.seed);
    let verdict = verify_certificate(&g, &trees, &cert);
    let pass = verdict.is_pass();
    let text = match format_of(common, Format::Json) {
        Format::Json => {
            let violation = match &verdict {
                Verdict::Pass => Value::Null,
                Verdict::Fail(v) => serde_json::to_value(v).expect("violations serialize"),
            };
            json_doc(
                m,
                json!({
                    "verdict": if pass { "pass" } else { "fail" },
                    "violation": violation,
                }),
            )
        }
        Format::Csv => {
            let mut s = comment_header("#", &m);
            s.push_str("verdict,violation\n");
            match &verdict {
                Verdict::Pass => s.push_str("pass,\n"),
                Verdict::Fail(v) => s.push_str(&format!("fail,{v:?}\n")),
            }
            s
        }
        Format::Dot => {
            if !pass {
                return Err("no dot rendering for a failing certificate".into());
            }
            decomposition_dot(&comment_header("//", &m), &g, &trees, &cert.assignments)
        }
    };
    Ok((text, if pass { 0 } else { 1 }))
}

struct BenchRow {
    instance: usize,
    seed: u64,
    n: usize,
    m: usize,
    outcome: &'static str,
    restarts: usize,
    verdict: &'static str,
}

fn bench(
    suite: BenchSuite,
    n: usize,
    instances: usize,
    delta: usize,
    common: &Common,
    args: &[String],
) -> Result<(String, i32), String> {
    let BenchSuite::Gl = suite;
    if n < 1 {
        return Err("--n must be at least 1".into());
    }
    let host = gen::complete(n);
    let run_one = |i: usize| -> Result<BenchRow, String> {
        let seed = common.seed.wrapping_add(i as u64);
        let trees = gen_gl_sequence(n, delta, seed).map_err(|e| e.to_string())?;
        let mut config = HeuristicConfig::new(seed);
        if let Some(r) = common.retries {
            config.restarts = r;
        }
        if let Some(b) = common.budget {
            config.node_budget = b as usize;
        }
        let (outcome, restarts, verdict) =
            match pack_heuristic(&host, &trees, &config).map_err(|e| e.to_string())? {
                HeuristicOutcome::Packed {
                    certificate,
                    report,
                } => {
                    let pass = verify_certificate(&host, &trees, &certificate).is_pass();
                    ("packed", report.restarts_used, if pass { "pass" } else { "fail" })
                }
                HeuristicOutcome::Failed { report } => ("failed", report.restarts_used, "fail"),
            };
        Ok(BenchRow {
            instance: i,
            seed,
            n,
            m: host.m(),
            outcome,
            restarts,
            verdict,
        })
    };

    // Fan the instances across workers; per-instance seeds keep every
    // row deterministic regardless of the worker count.
    let workers = std::thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1)
        .min(instances.max(1));
    let mut rows: Vec<Option<BenchRow>> = Vec::with_capacity(instances);
    rows.resize_with(instances, || None);
    let mut first_err: Option<String> = None;
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let run_one = &run_one;
            handles.push(scope.spawn(move || {
                let mut part: Vec<(usize, Result<BenchRow, String>)> = Vec::new();
                let mut i = w;
                while i < instances {
                    part.push((i, run_one(i)));
                    i += workers;
                }
                part
            }));
        }
        for h in handles {
            for (i, res) in h.join().expect("bench workers do not panic") {
                match res {
                    Ok(row) => rows[i] = Some(row),
                    Err(e) => first_err = first_err.take().or(Some(e)),
                }
            }
        }
    });
    if let Some(e) = first_err {
        return Err(e);
    }
    let rows: Vec<BenchRow> = rows
        .into_iter()
        .map(|r| r.expect("every instance ran"))
        .collect();
    let all_pass = rows.iter().all(|r| r.verdict == "pass");
    let m = meta(args, common.seed);
    let text = match format_of(common, Format::Csv) {
        Format::Json => json_doc(
            m,
            json!({
                "suite": "gl",
                "rows": rows
                    .iter()
                    .map(|r| json!({
                        "instance": r.instance,
                        "seed": r.seed,
                        "n": r.n,
                        "m": r.m,
                        "outcome": r.outcome,
                        "restarts": r.restarts,
                        "verdict": r.verdict,
                    }))
                    .collect::<Vec<_>>(),
            }),
        ),
        Format::Csv => {
            let mut s = comment_header("#", &m);
            s.push_str("instance,seed,n,m,outcome,restarts,verdict\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.instance, r.seed, r.n, r.m, r.outcome, r.restarts, r.verdict
                ));
            }
            s
        }
        Format::Dot => return Err("bench has no dot rendering".into()),
    };
    Ok((text, if all_pass { 0 } else { 1 }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dispatch(args: &[&str]) -> i32 {
        let argv: Vec<String> = std::iter::once("treepack")
            .chain(args.iter().copied())
            .map(String::from)
            .collect();
        cli_dispatch(&argv)
    }

    fn run_to_string(args: &[&str]) -> (String, i32) {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out.txt");
        let mut full: Vec<&str> = args.to_vec();
        let out_str = out.to_str().unwrap().to_string();
        full.push("--out");
        full.push(&out_str);
        let code = dispatch(&full);
        let text = std::fs::read_to_string(&out).unwrap_or_default();
        (text, code)
    }

    #[test]
    fn unknown_flags_exit_with_usage() {
        assert_eq!(dispatch(&["gen-graph", "--kind", "complete", "--n", "5", "--frobnicate"]), 2);
        assert_eq!(dispatch(&["no-such-command"]), 2);
    }

    #[test]
    fn complete_graph_has_all_edges() {
        let (text, code) = run_to_string(&["gen-graph", "--kind", "complete", "--n", "5"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n"], 5);
        assert_eq!(v["m"], 10);
        assert_eq!(v["meta"]["seed"], 0);
        assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn regular_generator_rejects_odd_degree_sums() {
        let (_, code) = run_to_string(&["gen-graph", "--kind", "regular", "--n", "5", "--d", "3"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn gnp_is_deterministic_per_seed() {
        let a = run_to_string(&["gen-graph", "--kind", "gnp", "--n", "40", "--p", "0.5", "--seed", "7"]);
        let b = run_to_string(&["gen-graph", "--kind", "gnp", "--n", "40", "--p", "0.5", "--seed", "7"]);
        assert_eq!(a, b);
        let c = run_to_string(&["gen-graph", "--kind", "gnp", "--n", "40", "--p", "0.5", "--seed", "8"]);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn csv_graph_output_round_trips_through_the_text_parser() {
        let (text, code) = run_to_string(&[
            "gen-graph", "--kind", "regular", "--n", "6", "--d", "3", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        assert!(text.starts_with("# {"));
        let g = parse_graph_text(&text).unwrap();
        assert_eq!((g.n(), g.m()), (6, 9));
        assert!((0..6).all(|v| g.degree(v) == 3));
    }

    #[test]
    fn pipeline_generates_packs_and_verifies() {
        let dir = tempfile::tempdir().unwrap();
        let graph = dir.path().join("g.txt");
        let trees = dir.path().join("t.json");
        let cert = dir.path().join("c.json");
        assert_eq!(
            dispatch(&[
                "gen-graph", "--kind", "complete", "--n", "7", "--format", "csv",
                "--out", graph.to_str().unwrap(),
            ]),
            0
        );
        assert_eq!(
            dispatch(&[
                "gen-trees", "--n", "7", "--seed", "3",
                "--out", trees.to_str().unwrap(),
            ]),
            0
        );
        assert_eq!(
            dispatch(&[
                "pack-heuristic",
                "--graph", graph.to_str().unwrap(),
                "--trees", trees.to_str().unwrap(),
                "--out", cert.to_str().unwrap(),
            ]),
            0
        );
        assert_eq!(
            dispatch(&[
                "verify",
                "--graph", graph.to_str().unwrap(),
                "--trees", trees.to_str().unwrap(),
                "--cert", cert.to_str().unwrap(),
            ]),
            0
        );
        // A dot rendering colors every covered edge.
        let (dot, code) = {
            let out = dir.path().join("d.dot");
            let code = dispatch(&[
                "verify",
                "--graph", graph.to_str().unwrap(),
                "--trees", trees.to_str().unwrap(),
                "--cert", cert.to_str().unwrap(),
                "--format", "dot",
                "--out", out.to_str().unwrap(),
            ]);
            (std::fs::read_to_string(&out).unwrap(), code)
        };
        assert_eq!(code, 0);
        assert!(dot.starts_with("// {"));
        assert_eq!(dot.matches("color=\"#").count(), 21);
    }

    #[test]
    fn mismatched_edge_counts_report_the_reason() {
        let dir = tempfile::tempdir().unwrap();
        let graph = dir.path().join("g.txt");
        let trees = dir.path().join("t.json");
        assert_eq!(
            dispatch(&[
                "gen-graph", "--kind", "complete", "--n", "6", "--format", "csv",
                "--out", graph.to_str().unwrap(),
            ]),
            0
        );
        assert_eq!(
            dispatch(&["gen-trees", "--n", "4", "--out", trees.to_str().unwrap()]),
            0
        );
        let out = dir.path().join("r.json");
        let code = dispatch(&[
            "pack-exact",
            "--mode", "decompose",
            "--graph", graph.to_str().unwrap(),
            "--trees", trees.to_str().unwrap(),
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 1);
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(v["outcome"], "infeasible");
        assert_eq!(v["reason"], "edge-count");
    }

    #[test]
    fn bench_emits_one_csv_row_per_instance() {
        let (text, code) = run_to_string(&["bench", "gl", "--n", "6", "--instances", "4", "--seed", "1"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# {"));
        assert_eq!(lines[1], "instance,seed,n,m,outcome,restarts,verdict");
        assert_eq!(lines.len(), 2 + 4);
        for (i, row) in lines[2..].iter().enumerate() {
            assert!(row.starts_with(&format!("{i},{},6,15,packed,", i as u64 + 1)));
            assert!(row.ends_with(",pass"));
        }
    }

    #[test]
    fn orient_csv_lists_every_edge_once() {
        let dir = tempfile::tempdir().unwrap();
        let graph = dir.path().join("g.txt");
        assert_eq!(
            dispatch(&[
                "gen-graph", "--kind", "complete", "--n", "5", "--format", "csv",
                "--out", graph.to_str().unwrap(),
            ]),
            0
        );
        let out = dir.path().join("o.csv");
        let code = dispatch(&[
            "orient",
            "--graph", graph.to_str().unwrap(),
            "--format", "csv",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 2 + 10);
    }

    #[test]
    fn diagnose_passes_a_clique_and_fails_a_star() {
        let dir = tempfile::tempdir().unwrap();
        let clique = dir.path().join("k.txt");
        assert_eq!(
            dispatch(&[
                "gen-graph", "--kind", "complete", "--n", "20", "--format", "csv",
                "--out", clique.to_str().unwrap(),
            ]),
            0
        );
        let (text, code) = run_to_string(&[
            "diagnose", "--graph", clique.to_str().unwrap(), "--check", "quasi-random",
        ]);
        assert_eq!(code, 0, "clique must pass its own density window: {text}");
        let star = dir.path().join("s.txt");
        std::fs::write(&star, "5 4\n0 1\n0 2\n0 3\n0 4\n").unwrap();
        let (_, code) = run_to_string(&[
            "diagnose", "--graph", star.to_str().unwrap(), "--check", "quasi-random",
            "--epsilon", "0.2",
        ]);
        assert_eq!(code, 1);
    }
}
