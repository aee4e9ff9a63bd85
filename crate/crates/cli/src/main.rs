mod cache;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use relflow::baselines::{pagesim, simrank, PageSimParams};
use relflow::eval::{parse_judgments, parse_runs, precision_table, table_to_text, MissingJudgment};
use relflow::format::sig;
use relflow::subnet::build_all;
use relflow::webgraph::{load_edge_list, LoadOptions};
use relflow::{BuildOptions, HitsOptions, Relation, ScoreParams, Scorer};

/// Relationship scores between Web pages from keyword subnetwork flows.
#[derive(Parser)]
#[command(name = "relflow", version)]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and cache one capacitated subnetwork per keyword.
    Build(BuildArgs),
    /// Print SeekRel, FactRel and SurfRel in both directions for two pages.
    Score(ScoreArgs),
    /// Rank the pages related to a target page.
    Rank(RankArgs),
    /// Dump a SimRank or PageSim similarity matrix.
    Baseline(BaselineArgs),
    /// Precision-at-r table from ranked runs and relevance judgments.
    Eval(EvalArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// `id<TAB>url` lines.
    #[arg(long)]
    nodes: PathBuf,
    /// `src dst` lines.
    #[arg(long)]
    edges: PathBuf,
    /// `keyword<TAB>page_id[<TAB>gamma]` lines.
    #[arg(long)]
    keywords: PathBuf,
    /// Cache directory to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    inlink_cap: usize,
    #[arg(long, default_value_t = 5)]
    sibling_window: usize,
    /// Drop links between pages on the same host.
    #[arg(long)]
    drop_intra_host: bool,
    /// HITS convergence tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// HITS sweep limit.
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
}

#[derive(Args)]
struct ScoreOptions {
    /// Cache directory from `relflow build`.
    #[arg(long, env = "RELFLOW_CACHE")]
    cache: PathBuf,
    /// Witness search depth.
    #[arg(short = 'd', long = "depth", default_value_t = 3)]
    depth: u32,
    /// Shared keywords used per pair.
    #[arg(short = 'k', long = "topk", default_value_t = 5)]
    topk: usize,
}

#[derive(Args)]
struct ScoreArgs {
    u_url: String,
    v_url: String,
    #[command(flatten)]
    options: ScoreOptions,
    /// Multiply scores by 1000 × maxwt of the leading keyword.
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    Seek,
    Fact,
    SurfForward,
    SurfBackward,
}

impl From<RelationArg> for Relation {
    fn from(r: RelationArg) -> Self {
        match r {
            RelationArg::Seek => Relation::Seek,
            RelationArg::Fact => Relation::Fact,
            RelationArg::SurfForward => Relation::SurfForward,
            RelationArg::SurfBackward => Relation::SurfBackward,
        }
    }
}

#[derive(Args)]
struct RankArgs {
    target_url: String,
    #[arg(long, value_enum)]
    relation: RelationArg,
    /// Number of results.
    #[arg(short = 'n', long, default_value_t = 10)]
    n: usize,
    #[command(flatten)]
    options: ScoreOptions,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Simrank,
    Pagesim,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(value_enum)]
    algorithm: Algorithm,
    #[arg(long)]
    nodes: PathBuf,
    #[arg(long)]
    edges: PathBuf,
    /// SimRank decay (default 1) or PageSim per-hop decay (default 0.5).
    #[arg(long)]
    decay: Option<f64>,
    /// SimRank iterations.
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    /// PageSim propagation radius.
    #[arg(long, default_value_t = 3)]
    radius: usize,
    /// PageRank damping for PageSim.
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// `target<TAB>algorithm<TAB>rank<TAB>result` lines.
    #[arg(long)]
    runs: PathBuf,
    /// `target<TAB>result<TAB>question<TAB>yes<TAB>total` lines.
    #[arg(long)]
    judgments: PathBuf,
    #[arg(long, default_value_t = 10)]
    r_max: usize,
    /// Fail on results without a judgment instead of counting them as 0.
    #[arg(long)]
    strict: bool,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => cache::write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build(args: BuildArgs) -> Result<()> {
    let load = LoadOptions {
        drop_intra_host: args.drop_intra_host,
    };
    let web = load_edge_list(&args.nodes, &args.edges, Some(&args.keywords), load)?;
    info!("loaded {} pages, {} links", web.node_count(), web.edge_count());
    let options = BuildOptions {
        inlink_cap: args.inlink_cap,
        sibling_window: args.sibling_window,
        hits: HitsOptions {
            tolerance: args.tolerance,
            max_iterations: args.max_iterations,
        },
        ..BuildOptions::default()
    };
    let subnets = build_all(&web, &options)?;
    cache::store(&args.out, web.urls(), web.keywords(), &subnets)?;
    for net in subnets.values() {
        info!(
            "`{}`: {} pages, {} links, maxwt {}",
            net.keyword(),
            net.node_count(),
            net.edge_count(),
            net.maxwt()
        );
    }
    Ok(())
}

fn params(options: &ScoreOptions) -> ScoreParams {
    ScoreParams {
        k: options.topk,
        d: options.depth,
    }
}

fn score(args: ScoreArgs) -> Result<()> {
    let cache = cache::load(&args.options.cache)?;
    let scorer = Scorer::new(&cache.subnets, &cache.keywords, params(&args.options))?;
    let u = cache.urls.lookup(&args.u_url)?;
    let v = cache.urls.lookup(&args.v_url)?;
    let mut scores = scorer.scores(u, v)?;
    if args.paper_scale {
        scores = scores.scaled(scorer.display_scale(u, v)?);
    }
    println!("{}", scores.to_line(&args.u_url, &args.v_url));
    Ok(())
}

fn rank(args: RankArgs) -> Result<()> {
    let cache = cache::load(&args.options.cache)?;
    let scorer = Scorer::new(&cache.subnets, &cache.keywords, params(&args.options))?;
    let target = cache.urls.lookup(&args.target_url)?;
    let ranked = scorer.rank_related(target, args.relation.into(), args.n)?;
    let mut text = String::new();
    for (i, (page, s)) in ranked.iter().enumerate() {
        let url = cache.urls.url(*page).expect("cached pages have urls");
        text.push_str(&format!("{}\t{url}\t{}\n", i + 1, sig(*s, 6)));
    }
    print!("{text}");
    Ok(())
}

fn baseline(args: BaselineArgs) -> Result<()> {
    let web = load_edge_list(&args.nodes, &args.edges, None, LoadOptions::default())?;
    let matrix = match args.algorithm {
        Algorithm::Simrank => simrank(web.graph(), args.decay.unwrap_or(1.0), args.iterations)?,
        Algorithm::Pagesim => pagesim(
            web.graph(),
            PageSimParams {
                damping: args.damping,
                decay: args.decay.unwrap_or(0.5),
                radius: args.radius,
            },
        )?,
    };
    emit(args.out.as_deref(), &matrix.to_text())
}

fn eval(args: EvalArgs) -> Result<()> {
    let runs = parse_runs(&read(&args.runs)?, &args.runs.display().to_string())?;
    let judgments = parse_judgments(&read(&args.judgments)?, &args.judgments.display().to_string())?;
    let missing = if args.strict {
        MissingJudgment::Error
    } else {
        MissingJudgment::Zero
    };
    let rows = precision_table(&runs, &judgments, args.r_max, missing)?;
    emit(args.out.as_deref(), &table_to_text(&rows))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("setting up the worker pool")?;
    }
    match cli.command {
        Command::Build(args) => build(args),
        Command::Score(args) => score(args),
        Command::Rank(args) => rank(args),
        Command::Baseline(args) => baseline(args),
        Command::Eval(args) => eval(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
