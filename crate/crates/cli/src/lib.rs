//! Command-line driver: graph generation, embeddings, closed-form theory and
//! the Monte-Carlo / flip / NDCG / JL experiments.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, out-of-domain
//! arguments), 2 on data, I/O or numeric errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use rpnodesim::experiments::{
    flip_rate, jl_violation_study, jl_violation_study_vectors, monte_carlo_similarity, ndcg_experiment,
    ExperimentReport, FlipConfig, JlBound, JlConfig, MonteCarloConfig, NdcgConfig,
};
use rpnodesim::graph::{
    generate_with_limit, load_matrix_market, write_matrix_market_with_comments, GeneratorKind, DEFAULT_MAX_NODES,
};
use rpnodesim::projection::{
    embed, write_embedding, write_embedding_csv, Family, ProjectionConfig, DEFAULT_ZERO_THRESHOLD,
};
use rpnodesim::theory::{self, BoundSource, NormalParams, Side};
use rpnodesim::{Error, SimilarityKind, SparseGraph};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "rpnodesim", version, about = "Random-projection node similarity toolkit")]
struct Cli {
    /// Master seed for every random choice; echoed in output metadata.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads; output does not depend on this. Defaults to all cores.
    #[arg(long, global = true, env = "RPNODESIM_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic graph as a Matrix Market file.
    #[command(long_about = "Generate a synthetic graph.\n\nOutput: Matrix Market coordinate file \
        (pattern field, general storage) with `%` comment lines echoing the generator and seed.")]
    Gen(GenArgs),
    /// Embed a graph: X = p(M) R^T.
    #[command(long_about = "Embed every node of a graph as X = p(M) R^T with M = A or T.\n\n\
        Output: binary RPNE file (magic \"RPNE\", version, n, q, normalized flag, zero rows, n*q \
        little-endian f64) or CSV with header `node,x0,...` preceded by `#` metadata lines.")]
    Embed(EmbedArgs),
    /// Evaluate a closed-form prediction; prints one JSON line.
    #[command(long_about = "Evaluate one closed-form quantity.\n\n\
        Output: one JSON line {\"name\", \"inputs\", \"value\"}. Asymptotic laws give \
        {mean, variance, std_dev}; bounds give {bound, vacuous, side, source}.")]
    Theory(TheoryArgs),
    /// Monte-Carlo check of a projected similarity against its normal law.
    #[command(long_about = "Repeat the projection of one node pair with per-trial seeds.\n\n\
        Output: CSV `experiment,seed,trial,trial_seed,value` with `#` lines giving the exact \
        value, predicted and empirical moments and the KS statistic.")]
    Mc(McArgs),
    /// Measure how often the projection reverses rel(w,u) > rel(w,v).
    #[command(
        long_about = "Count order reversals of rel(w,u) and rel(w,v) over projection draws.\n\n\
        Output: CSV `experiment,seed,trial,trial_seed,projected_u,projected_v,flipped` with `#` \
        lines giving the empirical rate, its standard error and the predicted rate."
    )]
    Flip(FlipArgs),
    /// Stratified NDCG comparison of exact and projected rankings.
    #[command(long_about = "Sample m nodes per degree third and score top-K rankings.\n\n\
        Output: per-node CSV `experiment,seed,stratum,node,degree,log2_degree,kind,K,eta,dcg,dcg_approx` \
        and a summary CSV `experiment,seed,stratum,kind,K,count,mean_eta,std_eta,mean_log2_degree,\
        std_log2_degree,isolated`, both with `#` metadata lines.")]
    Ndcg(NdcgArgs),
    /// Fraction of projection draws violating a JL-type guarantee.
    #[command(long_about = "Project a vector set at the minimum dimension of a JL-type bound.\n\n\
        Input: --graph (rows of T for the dot bound, rows of A for the cosine bound) or \
        --vectors (CSV, one vector per line, `#` comments allowed).\n\
        Output: CSV `experiment,seed,draw,draw_seed,violating_pairs,max_scaled_deviation,violated`.")]
    Jl(JlArgs),
}

#[derive(Args, Debug)]
struct GraphInput {
    /// Matrix Market input file.
    #[arg(long)]
    graph: PathBuf,
    /// Mirror every off-diagonal entry (for files storing one triangle).
    #[arg(long)]
    symmetrize: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GenKind {
    #[value(name = "power_law")]
    PowerLaw,
    #[value(name = "erdos_renyi")]
    ErdosRenyi,
    #[value(name = "flip_gadget")]
    FlipGadget,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Generator.
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Number of nodes (power_law, erdos_renyi).
    #[arg(long)]
    n: Option<usize>,
    /// Degree exponent (power_law).
    #[arg(long, default_value_t = 2.5)]
    exponent: f64,
    /// Edge probability (erdos_renyi).
    #[arg(long)]
    p: Option<f64>,
    /// Leaves of hub u (flip_gadget).
    #[arg(long)]
    du: Option<usize>,
    /// Leaves of hub v (flip_gadget).
    #[arg(long)]
    dv: Option<usize>,
    /// Refuse to build graphs with more nodes than this.
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum EmbedFormat {
    Bin,
    Csv,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Matrix family: A (adjacency) or T (transition).
    #[arg(long, default_value = "A", value_parser = parse_family)]
    family: Family,
    /// Projection dimension.
    #[arg(long)]
    q: usize,
    /// Polynomial coefficients a1,a2,... of M, M^2, ...
    #[arg(long, default_value = "1", value_delimiter = ',')]
    coeffs: Vec<f64>,
    /// Scale rows to unit norm (zero rows stay zero).
    #[arg(long)]
    normalize: bool,
    /// Output format; `bin` needs --out.
    #[arg(long, value_enum, default_value_t = EmbedFormat::Bin)]
    format: EmbedFormat,
    /// Output file; standard output when absent (csv only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
#[value(rename_all = "snake_case")]
enum TheoryOp {
    StudentTSf,
    NormalSf,
    DotAsymptotic,
    DotTAsymptotic,
    DotAAsymptotic,
    CosineAsymptotic,
    JlMinQDot,
    JlMinQCosine,
    JlMinQClassic,
    FlipProbability,
    SignChangeProbability,
    DotTailBound,
    CosineConcentrationBound,
    CosinePriorBound,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    /// Quantity to evaluate.
    #[arg(long, value_enum)]
    op: TheoryOp,
    /// Argument of student_t_sf / normal_sf.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// Projection dimension (degrees of freedom for student_t_sf).
    #[arg(long)]
    q: Option<u64>,
    /// Cosine of the original vectors.
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// cos(P_w, P_u - P_v) for flip_probability.
    #[arg(long, allow_hyphen_values = true)]
    cos: Option<f64>,
    /// Accuracy epsilon.
    #[arg(long)]
    eps: Option<f64>,
    /// Failure probability delta.
    #[arg(long)]
    delta: Option<f64>,
    /// Number of vectors.
    #[arg(long)]
    k: Option<u64>,
    /// Unnormalized deviation t (rotation_dot source).
    #[arg(long)]
    t: Option<f64>,
    /// Tail side: upper, lower or two_sided.
    #[arg(long, default_value = "upper")]
    side: String,
    /// Bound source id for dot_tail_bound.
    #[arg(long, default_value = "rotation_dot_rho_free")]
    source: String,
    /// 2-hop count n_uu.
    #[arg(long)]
    n_uu: Option<u64>,
    /// 2-hop count n_vv.
    #[arg(long)]
    n_vv: Option<u64>,
    /// 2-hop count n_uv.
    #[arg(long)]
    n_uv: Option<u64>,
    /// Degree of u.
    #[arg(long)]
    du: Option<u64>,
    /// Degree of v.
    #[arg(long)]
    dv: Option<u64>,
    /// Squared norm of the first vector (dot_asymptotic).
    #[arg(long)]
    nu2: Option<f64>,
    /// Squared norm of the second vector (dot_asymptotic).
    #[arg(long)]
    nv2: Option<f64>,
    /// Dot product of the vectors (dot_asymptotic).
    #[arg(long, allow_hyphen_values = true)]
    dot: Option<f64>,
    /// Add the interval mean +- k_sigma * std_dev to asymptotic laws.
    #[arg(long)]
    k_sigma: Option<f64>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    input: GraphInput,
    /// First node (0-based).
    #[arg(long)]
    u: usize,
    /// Second node (0-based).
    #[arg(long)]
    v: usize,
    /// Similarity: dotA, dotT or cosine.
    #[arg(long, value_parser = parse_kind)]
    kind: SimilarityKind,
    /// Projection dimension.
    #[arg(long)]
    q: usize,
    /// Number of projection draws (at least 100).
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Polynomial coefficients a1,a2,...
    #[arg(long, default_value = "1", value_delimiter = ',')]
    coeffs: Vec<f64>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FlipArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Reference node; defaults to --u.
    #[arg(long)]
    w: Option<usize>,
    /// First candidate.
    #[arg(long, default_value_t = 0)]
    u: usize,
    /// Second candidate.
    #[arg(long, default_value_t = 1)]
    v: usize,
    /// Similarity: dotA, dotT or cosine.
    #[arg(long, value_parser = parse_kind)]
    kind: SimilarityKind,
    /// Projection dimension.
    #[arg(long)]
    q: usize,
    /// Number of projection draws.
    #[arg(long, default_value_t = 20_000)]
    trials: usize,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NdcgArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Projection dimension.
    #[arg(long, default_value_t = 256)]
    q: usize,
    /// Ranking cutoff.
    #[arg(long = "K", visible_alias = "k", default_value_t = 10)]
    k: usize,
    /// Nodes sampled per stratum.
    #[arg(long, default_value_t = 300)]
    m: usize,
    /// Similarities to score.
    #[arg(long, value_delimiter = ',', value_parser = parse_kind, default_value = "dotA,dotT,cosine")]
    kinds: Vec<SimilarityKind>,
    /// Stratum boundaries b1,b2 in the degree-sorted node list; equal thirds when absent.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    strata: Option<Vec<usize>>,
    /// Per-node CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary CSV; written after the per-node CSV on standard output when absent.
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["graph", "vectors"])))]
struct JlArgs {
    /// Matrix Market input file.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Mirror every off-diagonal entry of --graph.
    #[arg(long)]
    symmetrize: bool,
    /// CSV of dense vectors, one per line.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Guarantee to test: dot or cosine.
    #[arg(long, value_parser = parse_bound)]
    bound: JlBound,
    /// Accuracy epsilon.
    #[arg(long)]
    eps: f64,
    /// Failure probability delta.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Independent projection draws.
    #[arg(long, default_value_t = 100)]
    draws: usize,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<SimilarityKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_bound(s: &str) -> Result<JlBound, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    match s {
        "A" | "a" => Ok(Family::A),
        "T" | "t" => Ok(Family::T),
        _ => Err(format!("unknown family `{s}` (expected A or T)")),
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

/// Attaches the flag or input at fault to a library error.
fn ctx(what: impl std::fmt::Display) -> impl FnOnce(Error) -> Failure {
    move |e| Failure {
        code: match e {
            Error::Configuration(_) | Error::Domain(_) => EXIT_USAGE,
            Error::Io(ref io) if io.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
            _ => EXIT_DATA,
        },
        message: format!("{what}: {e}"),
    }
}

/// Like [`ctx`] for errors caused by node ids given on the command line.
fn node_ctx(what: impl std::fmt::Display) -> impl FnOnce(Error) -> Failure {
    move |e| match e {
        Error::Bounds { .. } => Failure::usage(format!("{what}: {e}")),
        e => ctx(what)(e),
    }
}

fn io_ctx(what: impl std::fmt::Display) -> impl FnOnce(io::Error) -> Failure {
    move |e| Failure {
        code: if e.kind() == io::ErrorKind::BrokenPipe {
            EXIT_OK
        } else {
            EXIT_DATA
        },
        message: format!("{what}: {e}"),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0) as usize)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: --threads: {e}");
            return EXIT_DATA;
        }
    };
    match pool.install(|| dispatch(&cli, out)) {
        Ok(()) => EXIT_OK,
        Err(f) if f.code == EXIT_OK => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Runs with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stdout = BufWriter::new(io::stdout());
    let code = run_with(args, &mut stdout, &mut io::stderr());
    match stdout.flush() {
        Ok(()) => code,
        Err(_) if code != EXIT_OK => code,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("error: standard output: {e}");
            EXIT_DATA
        }
    }
}

fn dispatch(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<(), Failure> {
    let seed = cli.seed;
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, seed, out),
        Command::Embed(a) => cmd_embed(a, seed, out),
        Command::Theory(a) => cmd_theory(a, out),
        Command::Mc(a) => cmd_mc(a, seed, out),
        Command::Flip(a) => cmd_flip(a, seed, out),
        Command::Ndcg(a) => cmd_ndcg(a, seed, out),
        Command::Jl(a) => cmd_jl(a, seed, out),
    }
}

fn load_graph(path: &Path, symmetrize: bool) -> Result<SparseGraph, Failure> {
    load_matrix_market(path, symmetrize).map_err(ctx(format!("--graph {}", path.display())))
}

/// Writes through `f` to `path`, or to `out` when `path` is `None`.
fn emit(
    path: Option<&Path>,
    flag: &str,
    out: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> rpnodesim::Result<()>,
) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let what = format!("{flag} {}", p.display());
            let file = File::create(p).map_err(io_ctx(&what))?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(ctx(&what))?;
            w.flush().map_err(io_ctx(&what))
        }
        None => f(out).map_err(ctx("standard output")),
    }
}

fn emit_report(report: &ExperimentReport, path: Option<&Path>, flag: &str, out: &mut dyn Write) -> Result<(), Failure> {
    emit(path, flag, out, |w| report.write_csv(w))
}

fn need<T: Copy>(value: Option<T>, flag: &str, what: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("{flag} is required for {what}")))
}

fn cmd_gen(a: &GenArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let kind = match a.kind {
        GenKind::PowerLaw => GeneratorKind::PowerLaw {
            n: need(a.n, "--n", "power_law")?,
            exponent: a.exponent,
        },
        GenKind::ErdosRenyi => GeneratorKind::ErdosRenyi {
            n: need(a.n, "--n", "erdos_renyi")?,
            p: need(a.p, "--p", "erdos_renyi")?,
        },
        GenKind::FlipGadget => GeneratorKind::FlipGadget {
            d_u: need(a.du, "--du", "flip_gadget")?,
            d_v: need(a.dv, "--dv", "flip_gadget")?,
        },
    };
    let g = generate_with_limit(kind, seed, a.max_nodes).map_err(ctx(format!("--kind {kind:?}")))?;
    let comments = vec![
        format!("generator: {kind:?}"),
        format!("seed: {seed}"),
        format!("version: {}", env!("CARGO_PKG_VERSION")),
    ];
    emit(a.out.as_deref(), "--out", out, |w| {
        write_matrix_market_with_comments(&g, w, &comments)
    })
}

fn cmd_embed(a: &EmbedArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    if a.format == EmbedFormat::Bin && a.out.is_none() {
        return Err(Failure::usage(
            "--format bin needs --out (binary output is not written to a terminal stream)",
        ));
    }
    let g = load_graph(&a.input.graph, a.input.symmetrize)?;
    let cfg = ProjectionConfig::new(a.family, a.coeffs.clone(), a.q, seed).map_err(ctx("--q/--coeffs"))?;
    let mut x = embed(&g, &cfg).map_err(ctx(format!("--graph {}", a.input.graph.display())))?;
    if a.normalize {
        x = x.normalize_rows(DEFAULT_ZERO_THRESHOLD);
    }
    match a.format {
        EmbedFormat::Bin => emit(a.out.as_deref(), "--out", out, |w| write_embedding(&x, w)),
        EmbedFormat::Csv => emit(a.out.as_deref(), "--out", out, |w| {
            writeln!(w, "# experiment: embed")?;
            writeln!(w, "# seed: {seed}")?;
            writeln!(w, "# family: {}", a.family.name())?;
            writeln!(w, "# coeffs: {:?}", a.coeffs)?;
            writeln!(w, "# q: {}", a.q)?;
            writeln!(w, "# normalized: {}", a.normalize)?;
            write_embedding_csv(&x, w)
        }),
    }
}

fn law(p: NormalParams, k_sigma: Option<f64>) -> Result<Value, Failure> {
    let mut v = json!({"mean": p.mean, "variance": p.variance, "std_dev": p.std_dev()});
    if let Some(k) = k_sigma {
        let (lo, hi) = theory::sigma_interval(&p, k).map_err(ctx("--k-sigma"))?;
        v["interval"] = json!([lo, hi]);
    }
    Ok(v)
}

fn cmd_theory(a: &TheoryArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let op =
        a.op.to_possible_value()
            .expect("every op has a name")
            .get_name()
            .to_string();
    let mut inputs = Map::new();
    macro_rules! arg {
        ($field:ident, $flag:literal) => {{
            let v = need(a.$field, $flag, &op)?;
            inputs.insert(stringify!($field).to_string(), json!(v));
            v
        }};
    }
    let here = ctx(format!("--op {op}"));
    let value = match a.op {
        TheoryOp::StudentTSf => {
            let (x, q) = (arg!(x, "--x"), arg!(q, "--q"));
            json!(theory::student_t_sf(x, q).map_err(here)?)
        }
        TheoryOp::NormalSf => json!(theory::normal_sf(arg!(x, "--x"))),
        TheoryOp::DotAsymptotic => {
            let (nu2, nv2, dot, q) = (
                arg!(nu2, "--nu2"),
                arg!(nv2, "--nv2"),
                arg!(dot, "--dot"),
                arg!(q, "--q"),
            );
            law(theory::dot_asymptotic(nu2, nv2, dot, q).map_err(here)?, a.k_sigma)?
        }
        TheoryOp::DotTAsymptotic => {
            let (n_uu, n_vv, n_uv) = (arg!(n_uu, "--n-uu"), arg!(n_vv, "--n-vv"), arg!(n_uv, "--n-uv"));
            let (du, dv, q) = (arg!(du, "--du"), arg!(dv, "--dv"), arg!(q, "--q"));
            law(
                theory::dot_t_asymptotic(n_uu, n_vv, n_uv, du, dv, q).map_err(here)?,
                a.k_sigma,
            )?
        }
        TheoryOp::DotAAsymptotic => {
            let (n_uu, n_vv, n_uv) = (arg!(n_uu, "--n-uu"), arg!(n_vv, "--n-vv"), arg!(n_uv, "--n-uv"));
            law(
                theory::dot_a_asymptotic(n_uu, n_vv, n_uv, arg!(q, "--q")).map_err(here)?,
                a.k_sigma,
            )?
        }
        TheoryOp::CosineAsymptotic => {
            let (rho, q) = (arg!(rho, "--rho"), arg!(q, "--q"));
            law(theory::cosine_asymptotic(rho, q).map_err(here)?, a.k_sigma)?
        }
        TheoryOp::JlMinQDot => {
            let (eps, delta, k) = (arg!(eps, "--eps"), arg!(delta, "--delta"), arg!(k, "--k"));
            json!(theory::jl_min_q_dot(eps, delta, k).map_err(here)?)
        }
        TheoryOp::JlMinQCosine => {
            let (eps, delta, k) = (arg!(eps, "--eps"), arg!(delta, "--delta"), arg!(k, "--k"));
            json!(theory::jl_min_q_cosine(eps, delta, k).map_err(here)?)
        }
        TheoryOp::JlMinQClassic => {
            let (eps, delta, k) = (arg!(eps, "--eps"), arg!(delta, "--delta"), arg!(k, "--k"));
            json!(theory::jl_min_q_classic(eps, delta, k).map_err(here)?)
        }
        TheoryOp::FlipProbability => {
            let (cos, q) = (arg!(cos, "--cos"), arg!(q, "--q"));
            let p = theory::flip_probability(cos, q).map_err(here)?;
            json!({"probability": p.probability, "saturated": p.saturated})
        }
        TheoryOp::SignChangeProbability => {
            let (rho, q) = (arg!(rho, "--rho"), arg!(q, "--q"));
            let p = theory::sign_change_probability(rho, q).map_err(here)?;
            json!({"probability": p.probability, "saturated": p.saturated})
        }
        TheoryOp::DotTailBound => {
            let source: BoundSource = a.source.parse().map_err(ctx("--source"))?;
            let side: Side = a.side.parse().map_err(ctx("--side"))?;
            inputs.insert("source".into(), json!(source.id()));
            inputs.insert("side".into(), json!(side.name()));
            let arg = if source == BoundSource::RotationDot {
                arg!(t, "--t")
            } else {
                arg!(eps, "--eps")
            };
            let rho = if source == BoundSource::RotationDot {
                arg!(rho, "--rho")
            } else {
                a.rho.unwrap_or(0.0)
            };
            let b = theory::dot_tail_bound(rho, arg, arg!(q, "--q"), side, source).map_err(here)?;
            json!({"bound": b.bound, "vacuous": b.vacuous, "side": b.side.name(), "source": b.source.id()})
        }
        TheoryOp::CosineConcentrationBound | TheoryOp::CosinePriorBound => {
            let (eps, q) = (arg!(eps, "--eps"), arg!(q, "--q"));
            let b = if a.op == TheoryOp::CosineConcentrationBound {
                theory::cosine_concentration_bound(eps, q)
            } else {
                theory::cosine_prior_bound(eps, q)
            }
            .map_err(here)?;
            json!({"bound": b.bound, "vacuous": b.vacuous, "side": b.side.name(), "source": b.source.id()})
        }
    };
    let line = json!({"name": op, "inputs": Value::Object(inputs), "value": value});
    writeln!(out, "{line}").map_err(io_ctx("standard output"))
}

fn cmd_mc(a: &McArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let g = load_graph(&a.input.graph, a.input.symmetrize)?;
    let mut cfg = MonteCarloConfig::new(a.kind, a.q, a.trials, seed);
    cfg.coeffs = a.coeffs.clone();
    let res = monte_carlo_similarity(&g, a.u, a.v, &cfg).map_err(node_ctx(format!("mc --u {} --v {}", a.u, a.v)))?;
    emit_report(&res.report, a.out.as_deref(), "--out", out)
}

fn cmd_flip(a: &FlipArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let g = load_graph(&a.input.graph, a.input.symmetrize)?;
    let w = a.w.unwrap_or(a.u);
    let cfg = FlipConfig::new(a.kind, a.q, a.trials, seed);
    let res = flip_rate(&g, w, a.u, a.v, &cfg).map_err(node_ctx(format!("flip --w {w} --u {} --v {}", a.u, a.v)))?;
    emit_report(&res.report, a.out.as_deref(), "--out", out)
}

fn cmd_ndcg(a: &NdcgArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let boundaries = match a.strata.as_deref() {
        None => None,
        Some(&[b1, b2]) => Some((b1, b2)),
        Some(_) => return Err(Failure::usage("--strata takes exactly two boundaries b1,b2")),
    };
    let g = load_graph(&a.input.graph, a.input.symmetrize)?;
    let mut cfg = NdcgConfig::new(a.k, a.q, a.m, a.kinds.clone(), seed);
    cfg.boundaries = boundaries;
    let res = ndcg_experiment(&g, &cfg).map_err(ctx("ndcg --K/--m/--strata"))?;
    emit_report(&res.report, a.out.as_deref(), "--out", out)?;
    match (&a.summary_out, &a.out) {
        (Some(p), _) => emit_report(&res.summary_report, Some(p), "--summary-out", out),
        (None, Some(_)) => emit_report(&res.summary_report, None, "--summary-out", out),
        (None, None) => {
            writeln!(out).map_err(io_ctx("standard output"))?;
            emit_report(&res.summary_report, None, "--summary-out", out)
        }
    }
}

fn read_vectors(path: &Path) -> Result<Vec<Vec<f64>>, Failure> {
    let what = format!("--vectors {}", path.display());
    let file = File::open(path).map_err(io_ctx(&what))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_ctx(&what))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| Failure {
                code: EXIT_DATA,
                message: format!("{what}: line {}: {e}", i + 1),
            })?;
        rows.push(row);
    }
    if let Some(first) = rows.first() {
        if let Some(bad) = rows.iter().position(|r| r.len() != first.len()) {
            return Err(Failure {
                code: EXIT_DATA,
                message: format!(
                    "{what}: vector {bad} has {} entries, expected {}",
                    rows[bad].len(),
                    first.len()
                ),
            });
        }
    }
    Ok(rows)
}

fn cmd_jl(a: &JlArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = JlConfig::new(a.bound, a.eps, a.delta, a.draws, seed);
    let here = ctx("jl --eps/--delta/--draws");
    let res = match (&a.graph, &a.vectors) {
        (Some(path), _) => jl_violation_study(&load_graph(path, a.symmetrize)?, &cfg).map_err(here)?,
        (None, Some(path)) => jl_violation_study_vectors(&read_vectors(path)?, &cfg).map_err(here)?,
        (None, None) => unreachable!("clap requires --graph or --vectors"),
    };
    emit_report(&res.report, a.out.as_deref(), "--out", out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(
            std::iter::once("rpnodesim").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn student_t_at_zero() {
        let (code, out, _) = run_capture(&["theory", "--op", "student_t_sf", "--x", "0", "--q", "50"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["value"], json!(0.5));
        assert_eq!(v["name"], json!("student_t_sf"));
        assert_eq!(v["inputs"]["q"], json!(50));
    }

    #[test]
    fn missing_operand_is_usage_error() {
        let (code, _, err) = run_capture(&["theory", "--op", "student_t_sf", "--x", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--q"), "{err}");
    }

    #[test]
    fn domain_error_names_the_op() {
        let (code, _, err) = run_capture(&[
            "theory",
            "--op",
            "jl_min_q_cosine",
            "--eps",
            "0.2",
            "--delta",
            "0.1",
            "--k",
            "5",
        ]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("jl_min_q_cosine"), "{err}");
    }

    #[test]
    fn unknown_flag_rejected() {
        let (code, _, _) = run_capture(&["theory", "--op", "normal_sf", "--x", "1", "--bogus", "2"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn help_succeeds_for_every_subcommand() {
        for sub in ["gen", "embed", "theory", "mc", "flip", "ndcg", "jl"] {
            let (code, out, _) = run_capture(&[sub, "--help"]);
            assert_eq!(code, 0);
            assert!(out.contains("--seed") && out.contains("--threads"), "{sub}");
        }
    }
}
