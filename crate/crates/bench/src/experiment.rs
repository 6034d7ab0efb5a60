//! Timed build/find runs and the parameter sweeps built on them.

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context};
use sphtree::datagen::UnitStream;
use sphtree::oracle::brute_force_one;
use sphtree::{
    build_tree, compute_root_box, find_neighbors_all, load_snapshot, tree_stats, BuildPolicy,
    NeighborLists, ParticleSet, Schedule, SearchConfig, Tree, TreeParams,
};

use crate::record::BenchRecord;

/// Above this size the per-run oracle check is skipped.
pub const VALIDATION_LIMIT: usize = 100_000;

pub const DEFAULT_BUCKET_SIZES: [usize; 6] = [2, 4, 8, 16, 32, 64];
pub const DEFAULT_BETAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub particles: ParticleSet,
}

impl Dataset {
    pub fn new(name: impl Into<String>, particles: ParticleSet) -> Self {
        Self { name: name.into(), particles }
    }

    /// Reads a snapshot; the dataset is named after the file stem.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let particles =
            load_snapshot(path).with_context(|| format!("loading {}", path.display()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        Ok(Self { name, particles })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub params: TreeParams,
    pub threads: usize,
    pub schedule: Schedule,
    pub reps: usize,
    /// Seeds the validation sample.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: TreeParams::default(),
            threads: 1,
            schedule: Schedule::Static,
            reps: 5,
            seed: 0,
        }
    }
}

fn pool(threads: usize) -> anyhow::Result<rayon::ThreadPool> {
    ensure!(threads >= 1, "thread count must be at least 1");
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

/// Root box plus tree, inside the given pool.
pub fn timed_build(
    particles: &ParticleSet,
    params: &TreeParams,
    pool: &rayon::ThreadPool,
) -> anyhow::Result<(Tree, f64)> {
    let t = Instant::now();
    let tree = pool.install(|| -> sphtree::Result<Tree> {
        let bbox = compute_root_box(particles)?;
        Ok(build_tree(particles, &bbox, params)?.0)
    })?;
    Ok((tree, t.elapsed().as_secs_f64()))
}

pub fn timed_find(
    tree: &Tree,
    particles: &ParticleSet,
    config: &SearchConfig,
) -> anyhow::Result<(NeighborLists, f64)> {
    let t = Instant::now();
    let lists = find_neighbors_all(tree, particles, config)?;
    Ok((lists, t.elapsed().as_secs_f64()))
}

/// Indices of a reproducible 1% sample, at least one.
pub fn sample_queries(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = UnitStream::new(seed);
    let mut picked: Vec<usize> = (0..n.div_ceil(100))
        .map(|_| ((rng.next_f64() * n as f64) as usize).min(n - 1))
        .collect();
    picked.sort_unstable();
    picked.dedup();
    picked
}

/// Compares the listed queries against the oracle. Returns the number of
/// mismatching lists.
pub fn count_mismatches(
    particles: &ParticleSet,
    lists: &NeighborLists,
    queries: impl IntoIterator<Item = usize>,
    include_self: bool,
) -> usize {
    let mut bad = 0;
    for q in queries {
        let mut got = lists.get(q).to_vec();
        got.sort_unstable();
        let mut want = brute_force_one(particles, q, include_self);
        want.sort_unstable();
        if lists.query_id(q) != particles.ids()[q] || got != want {
            bad += 1;
        }
    }
    bad
}

/// One warm-up run (discarded, but checked against the oracle on a sample)
/// followed by `reps` timed build + find repetitions.
pub fn run_config(experiment: &str, data: &Dataset, cfg: &RunConfig) -> anyhow::Result<Vec<BenchRecord>> {
    ensure!(cfg.reps >= 1, "reps must be at least 1");
    cfg.params.validate()?;
    let particles = &data.particles;
    let n = particles.len();
    let pool = pool(cfg.threads)?;
    let search = SearchConfig::new(cfg.threads, cfg.schedule);

    let (tree, _) = timed_build(particles, &cfg.params, &pool)?;
    let (lists, _) = timed_find(&tree, particles, &search)?;
    let validation = if n <= VALIDATION_LIMIT {
        let bad = count_mismatches(particles, &lists, sample_queries(n, cfg.seed), false);
        if bad > 0 {
            bail!("{bad} sampled neighbor lists differ from the oracle ({experiment}, {})", data.name);
        }
        "passed"
    } else {
        "skipped"
    };
    drop((tree, lists));

    let mut out = Vec::with_capacity(cfg.reps);
    for rep in 0..cfg.reps {
        let (tree, build_time_s) = timed_build(particles, &cfg.params, &pool)?;
        let (lists, find_time_s) = timed_find(&tree, particles, &search)?;
        let d = tree_stats(&tree);
        out.push(BenchRecord {
            experiment: experiment.into(),
            dataset: data.name.clone(),
            n,
            policy: cfg.params.policy.name().into(),
            s: cfg.params.bucket_size,
            alpha: cfg.params.alpha,
            beta: cfg.params.beta,
            threads: cfg.threads,
            schedule: cfg.schedule.name().into(),
            rep,
            build_time_s,
            find_time_s,
            max_depth: d.max_depth,
            total_nodes: d.total_nodes,
            mean_neighbors: lists.mean_count(),
            redistribution_rounds: d.total_redistribution_rounds(),
            mean_branching: d.mean_branching().unwrap_or(0.0),
            validation: validation.into(),
        });
    }
    Ok(out)
}

const POLICIES: [BuildPolicy; 2] = [BuildPolicy::Adaptive, BuildPolicy::FixedOctree];

/// Both policies at every thread count.
pub fn run_scaling(data: &Dataset, thread_counts: &[usize], base: &RunConfig) -> anyhow::Result<Vec<BenchRecord>> {
    ensure!(!thread_counts.is_empty(), "no thread counts given");
    let mut out = Vec::new();
    for policy in POLICIES {
        for &threads in thread_counts {
            let cfg = RunConfig {
                params: base.params.with_policy(policy),
                threads,
                ..*base
            };
            out.extend(run_config("scaling", data, &cfg)?);
        }
    }
    Ok(out)
}

/// Both policies at every bucket size.
pub fn run_bucket_sweep(data: &Dataset, sizes: &[usize], base: &RunConfig) -> anyhow::Result<Vec<BenchRecord>> {
    ensure!(!sizes.is_empty(), "no bucket sizes given");
    if let Some(&s) = sizes.iter().find(|&&s| s < 1) {
        bail!("bucket size must be at least 1, got {s}");
    }
    let mut out = Vec::new();
    for &s in sizes {
        for policy in POLICIES {
            let cfg = RunConfig {
                params: base.params.with_bucket_size(s).with_policy(policy),
                ..*base
            };
            out.extend(run_config("bucket_sweep", data, &cfg)?);
        }
    }
    Ok(out)
}

/// Adaptive policy only; β must lie in (0, 1].
pub fn run_beta_sweep(data: &Dataset, betas: &[f64], base: &RunConfig) -> anyhow::Result<Vec<BenchRecord>> {
    ensure!(!betas.is_empty(), "no beta values given");
    if let Some(&b) = betas.iter().find(|&&b| !(b > 0.0 && b <= 1.0)) {
        bail!("beta must lie in (0, 1], got {b}");
    }
    let mut out = Vec::new();
    for &beta in betas {
        let cfg = RunConfig {
            params: base.params.with_beta(beta).with_policy(BuildPolicy::Adaptive),
            ..*base
        };
        out.extend(run_config("beta_sweep", data, &cfg)?);
    }
    Ok(out)
}
