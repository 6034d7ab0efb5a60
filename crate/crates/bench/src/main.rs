use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{ensure, Context};
use clap::{Args, Parser, Subcommand};
use sphtree::datagen::uniform_default_target;
use sphtree::{
    brute_force_neighbors, build_tree, compute_root_box, find_neighbors_all, save_snapshot,
    tree_stats, BuildPolicy, GenKind, GenSpec, Schedule, SearchConfig, TreeParams,
};
use sphtree_bench::experiment::{count_mismatches, timed_build};
use sphtree_bench::record::{median, write_summary};
use sphtree_bench::{
    export_walk_slice, run_beta_sweep, run_bucket_sweep, run_config, run_scaling, summarize,
    write_records, BenchRecord, Dataset, RunConfig, DEFAULT_BETAS, DEFAULT_BUCKET_SIZES,
};

#[derive(Parser)]
#[command(name = "sphtree", version, about = "Adaptive tree neighbor search: data, timing and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic snapshot.
    Gen(GenArgs),
    /// Build the tree and print its shape and build time.
    Build(RunArgs),
    /// Time build plus all-particle neighbor search.
    Find(RunArgs),
    /// Both policies over a list of thread counts.
    Scale {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        thread_counts: Vec<usize>,
    },
    /// Both policies over a list of bucket sizes.
    SweepBucket {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',')]
        s_values: Option<Vec<usize>>,
    },
    /// Adaptive policy over a list of β values.
    SweepBeta {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',')]
        beta_values: Option<Vec<f64>>,
    },
    /// Export the leaves cut by an axis-aligned plane as CSV and SVG.
    Viz {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 2)]
        axis: usize,
        /// Plane position; defaults to the center of the root box.
        #[arg(long)]
        coord: Option<f64>,
        /// Leaves per color band.
        #[arg(long, default_value_t = 8)]
        block: usize,
    },
    /// Compare every neighbor list against the brute-force oracle.
    Validate(RunArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "uniform")]
    kind: GenKind,
    /// Particle count, or points per side for a lattice.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Target neighbor count for the smoothing lengths.
    #[arg(long)]
    target: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "adaptive")]
    policy: BuildPolicy,
    #[arg(long, default_value_t = 8)]
    s: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value = "static")]
    schedule: Schedule,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output (stdout when absent); base path for `viz`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn params(&self) -> TreeParams {
        TreeParams {
            bucket_size: self.s,
            alpha: self.alpha,
            beta: self.beta,
            policy: self.policy,
            ..TreeParams::default()
        }
    }

    fn config(&self) -> RunConfig {
        RunConfig {
            params: self.params(),
            threads: self.threads,
            schedule: self.schedule,
            reps: self.reps,
            seed: self.seed,
        }
    }

    fn dataset(&self) -> anyhow::Result<Dataset> {
        Dataset::load(&self.dataset)
    }
}

fn emit(records: &[BenchRecord], out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_records(records, BufWriter::new(f))?;
        }
        None => write_records(records, io::stdout().lock())?,
    }
    write_summary(&summarize(records), io::stderr().lock())?;
    Ok(())
}

fn gen(args: &GenArgs) -> anyhow::Result<()> {
    let target = args.target.unwrap_or_else(|| match args.kind {
        GenKind::Lattice => 6,
        _ => uniform_default_target(args.n),
    });
    let base = match args.kind {
        GenKind::Lattice => GenSpec::lattice(args.n, target),
        GenKind::UniformRandom => GenSpec::uniform(args.n, target, args.seed),
        GenKind::CenterClustered => GenSpec::clustered(args.n, target, args.seed),
    };
    let spec = GenSpec {
        dim: args.dim,
        bbox: sphtree::BoundingBox::cube(args.dim, 0.0, 1.0)?,
        ..base
    };
    let particles = spec.generate()?;
    save_snapshot(&particles, &args.out)?;
    eprintln!("wrote {} particles to {}", particles.len(), args.out.display());
    Ok(())
}

fn build(args: &RunArgs) -> anyhow::Result<()> {
    ensure!(args.reps >= 1, "reps must be at least 1");
    let data = args.dataset()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build()?;
    let params = args.params();
    let mut times = Vec::new();
    let mut last = None;
    for _ in 0..=args.reps {
        let (tree, t) = timed_build(&data.particles, &params, &pool)?;
        times.push(t);
        last = Some(tree);
    }
    times.remove(0);
    let d = tree_stats(&last.expect("at least one build"));
    let mut out = io::stdout().lock();
    writeln!(out, "dataset        {} (n = {})", data.name, data.particles.len())?;
    writeln!(out, "policy         {}", params.policy.name())?;
    writeln!(out, "build median   {:.6} s over {} reps", median(&times), args.reps)?;
    writeln!(out, "max depth      {}", d.max_depth)?;
    writeln!(out, "nodes          {} ({} leaves, {} capped)", d.total_nodes, d.total_leaves, d.capped_leaves)?;
    writeln!(out, "halving rounds {}", d.total_redistribution_rounds())?;
    writeln!(out, "branching      {:?}", d.branching_histogram)?;
    Ok(())
}

fn viz(run: &RunArgs, axis: usize, coord: Option<f64>, block: usize) -> anyhow::Result<()> {
    let data = run.dataset()?;
    let out = run.out.clone().context("viz needs --out")?;
    let bbox = compute_root_box(&data.particles)?;
    let (tree, _) = build_tree(&data.particles, &bbox, &run.params())?;
    let coord = coord.unwrap_or_else(|| bbox.center()[axis.min(2)]);
    let s = export_walk_slice(&tree, axis, coord, block, &out)?;
    eprintln!(
        "{} cells over {} depths -> {} / {}",
        s.cells,
        s.distinct_depths,
        out.with_extension("csv").display(),
        out.with_extension("svg").display()
    );
    Ok(())
}

fn validate(run: &RunArgs) -> anyhow::Result<()> {
    let data = run.dataset()?;
    let p = &data.particles;
    let bbox = compute_root_box(p)?;
    let (tree, _) = build_tree(p, &bbox, &run.params())?;
    let t = Instant::now();
    let lists = find_neighbors_all(&tree, p, &SearchConfig::new(run.threads, run.schedule))?;
    let search = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let oracle_total = brute_force_neighbors(p).total();
    let brute = t.elapsed().as_secs_f64();
    let bad = count_mismatches(p, &lists, 0..p.len(), false);
    println!(
        "{}: {} queries, {} neighbors (oracle {}), tree {search:.3} s, oracle {brute:.3} s",
        data.name,
        p.len(),
        lists.total(),
        oracle_total
    );
    ensure!(bad == 0, "{bad} neighbor lists differ from the oracle");
    println!("all lists match");
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Gen(args) => gen(args),
        Command::Build(args) => build(args),
        Command::Find(run) => emit(&run_config("find", &run.dataset()?, &run.config())?, run.out.as_deref()),
        Command::Scale { run, thread_counts } => {
            emit(&run_scaling(&run.dataset()?, thread_counts, &run.config())?, run.out.as_deref())
        }
        Command::SweepBucket { run, s_values } => {
            let sizes = s_values.clone().unwrap_or_else(|| DEFAULT_BUCKET_SIZES.to_vec());
            emit(&run_bucket_sweep(&run.dataset()?, &sizes, &run.config())?, run.out.as_deref())
        }
        Command::SweepBeta { run, beta_values } => {
            let betas = beta_values.clone().unwrap_or_else(|| DEFAULT_BETAS.to_vec());
            emit(&run_beta_sweep(&run.dataset()?, &betas, &run.config())?, run.out.as_deref())
        }
        Command::Viz { run, axis, coord, block } => viz(run, *axis, *coord, *block),
        Command::Validate(run) => validate(run),
    }
}
