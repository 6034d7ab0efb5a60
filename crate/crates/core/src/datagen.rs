//! Synthetic particle sets: a regular lattice, a uniform random cloud, and a
//! centrally condensed cloud, plus smoothing lengths tuned to a target
//! neighbor count.
//!
//! Random sets are reproducible across platforms: the generator is ChaCha8
//! (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`), and every uniform double
//! is `(next_u64() >> 11) * 2^-53`, in `[0, 1)`.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{compute_root_box, BoundingBox, ParticleSet};
use crate::search::Packed;
use crate::tree::{build_tree, TreeParams};

/// Relative gap used to tell a clean k-th neighbor distance from a tie.
const TIE_EPS: f64 = 1e-9;
/// Relative widening of the k-th neighbor distance so rounding in the
/// distance test never drops the k-th neighbor.
const INCLUDE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenKind {
    Lattice,
    UniformRandom,
    CenterClustered,
}

impl GenKind {
    pub fn name(self) -> &'static str {
        match self {
            GenKind::Lattice => "lattice",
            GenKind::UniformRandom => "uniform",
            GenKind::CenterClustered => "clustered",
        }
    }
}

impl std::str::FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lattice" => Ok(GenKind::Lattice),
            "uniform" => Ok(GenKind::UniformRandom),
            "clustered" => Ok(GenKind::CenterClustered),
            other => Err(Error::InvalidParams(format!("unknown distribution {other:?}"))),
        }
    }
}

/// Full description of a generated data set. The same spec always yields
/// the same particles.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    /// Particle count, or points per side for [`GenKind::Lattice`].
    pub size: usize,
    pub dim: usize,
    pub seed: u64,
    pub target_neighbors: usize,
    pub bbox: BoundingBox,
}

impl GenSpec {
    /// Centrally condensed cloud in the unit cube (the non-uniform regime).
    pub fn clustered(n: usize, target_neighbors: usize, seed: u64) -> Self {
        Self {
            kind: GenKind::CenterClustered,
            size: n,
            dim: 3,
            seed,
            target_neighbors,
            bbox: BoundingBox::cube(3, 0.0, 1.0).expect("unit cube"),
        }
    }

    /// Uniform random cloud in the unit cube (the near-uniform regime).
    pub fn uniform(n: usize, target_neighbors: usize, seed: u64) -> Self {
        Self {
            kind: GenKind::UniformRandom,
            ..Self::clustered(n, target_neighbors, seed)
        }
    }

    /// `m^3` lattice in the unit cube.
    pub fn lattice(m: usize, target_neighbors: usize) -> Self {
        Self {
            kind: GenKind::Lattice,
            ..Self::clustered(m, target_neighbors, 0)
        }
    }

    /// Positions only, with placeholder smoothing lengths.
    pub fn positions(&self) -> Result<ParticleSet> {
        match self.kind {
            GenKind::Lattice => gen_lattice(self.size, self.dim, &self.bbox),
            GenKind::UniformRandom => gen_uniform_random(self.size, self.dim, &self.bbox, self.seed),
            GenKind::CenterClustered => {
                gen_center_clustered(self.size, self.dim, &self.bbox, self.seed)
            }
        }
    }

    /// Positions with smoothing lengths for `target_neighbors`.
    pub fn generate(&self) -> Result<ParticleSet> {
        assign_smoothing_lengths(&self.positions()?, self.target_neighbors)
    }
}

/// Default target neighbor count for the uniform regime at `n` particles.
pub fn uniform_default_target(n: usize) -> usize {
    if n >= 1_000_000 {
        500
    } else {
        100
    }
}

/// Portable uniform doubles in `[0, 1)`.
pub struct UnitStream(ChaCha8Rng);

impl UnitStream {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn mean_spacing(bbox: &BoundingBox, n: usize) -> f64 {
    (bbox.volume() / n.max(1) as f64).powf(1.0 / bbox.dim() as f64)
}

/// `m^k` particles at the centers of a regular `m`-per-side grid over `bbox`,
/// first dimension fastest. Smoothing lengths are set to the smallest
/// lattice spacing.
pub fn gen_lattice(m: usize, k: usize, bbox: &BoundingBox) -> Result<ParticleSet> {
    crate::model::check_dim(k)?;
    if bbox.dim() != k {
        return Err(Error::InvalidBox("box dimension differs from k".into()));
    }
    if m < 2 {
        return Err(Error::InvalidParams("lattice side must be at least 2".into()));
    }
    let n = m
        .checked_pow(k as u32)
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| Error::Overflow(format!("{m}^{k}")))?;
    let mut coords = vec![Vec::with_capacity(n); k];
    for i in 0..n {
        let mut rest = i;
        for (l, col) in coords.iter_mut().enumerate() {
            let c = rest % m;
            rest /= m;
            col.push(bbox.min()[l] + (c as f64 + 0.5) / m as f64 * bbox.side(l));
        }
    }
    let spacing = (0..k).map(|l| bbox.side(l) / m as f64).fold(f64::INFINITY, f64::min);
    ParticleSet::new(coords, vec![spacing; n], (0..n as u32).collect())
}

/// `n` independent uniform points in `bbox`.
pub fn gen_uniform_random(n: usize, k: usize, bbox: &BoundingBox, seed: u64) -> Result<ParticleSet> {
    crate::model::check_dim(k)?;
    if bbox.dim() != k {
        return Err(Error::InvalidBox("box dimension differs from k".into()));
    }
    if n == 0 {
        return Err(Error::EmptyParticleSet);
    }
    let mut rng = UnitStream::new(seed);
    let mut coords = vec![Vec::with_capacity(n); k];
    for _ in 0..n {
        for (l, col) in coords.iter_mut().enumerate() {
            col.push(bbox.min()[l] + rng.next_f64() * bbox.side(l));
        }
    }
    ParticleSet::new(coords, vec![mean_spacing(bbox, n); n], (0..n as u32).collect())
}

/// `n` points in the sphere (disk in 2D) inscribed in `bbox`, with density
/// falling off as `1/r` from the center and uniform directions.
///
/// In 3D the radial CDF is `(r/R)^2`, sampled as `r = R sqrt(u)`; in 2D it is
/// `r/R`, sampled as `r = R u`.
pub fn gen_center_clustered(
    n: usize,
    k: usize,
    bbox: &BoundingBox,
    seed: u64,
) -> Result<ParticleSet> {
    crate::model::check_dim(k)?;
    if bbox.dim() != k {
        return Err(Error::InvalidBox("box dimension differs from k".into()));
    }
    if n == 0 {
        return Err(Error::EmptyParticleSet);
    }
    let center = bbox.center();
    let radius = 0.5 * (0..k).map(|l| bbox.side(l)).fold(f64::INFINITY, f64::min);
    let mut rng = UnitStream::new(seed);
    let mut coords = vec![Vec::with_capacity(n); k];
    for _ in 0..n {
        let mut dir = [0.0; 3];
        let r = if k == 3 {
            let z = 2.0 * rng.next_f64() - 1.0;
            let phi = 2.0 * PI * rng.next_f64();
            let s = (1.0 - z * z).max(0.0).sqrt();
            dir = [s * phi.cos(), s * phi.sin(), z];
            radius * rng.next_f64().sqrt()
        } else {
            let phi = 2.0 * PI * rng.next_f64();
            dir[0] = phi.cos();
            dir[1] = phi.sin();
            radius * rng.next_f64()
        };
        for (l, col) in coords.iter_mut().enumerate() {
            col.push(center[l] + r * dir[l]);
        }
    }
    ParticleSet::new(coords, vec![mean_spacing(bbox, n); n], (0..n as u32).collect())
}

/// Sets each `h_i` to half the distance to particle `i`'s
/// `target_neighbors`-th nearest neighbor, so the `2h` neighborhood holds
/// exactly `target_neighbors` particles.
///
/// When the next-nearest particle ties with the k-th (within a relative
/// `1e-9`), the whole tied shell is excluded and the radius shrinks to just
/// below it; lattice-like inputs then get slightly fewer neighbors than
/// requested instead of an ambiguous boundary.
pub fn assign_smoothing_lengths(particles: &ParticleSet, target_neighbors: usize) -> Result<ParticleSet> {
    let n = particles.len();
    if target_neighbors == 0 || n <= target_neighbors {
        return Err(Error::TooFewParticles {
            n,
            target: target_neighbors,
        });
    }
    let bbox = compute_root_box(particles)?;
    let (tree, _) = build_tree(particles, &bbox, &TreeParams::default())?;
    // Candidates needed: the k-th neighbor plus the next one for tie detection.
    let need = (target_neighbors + 1).min(n - 1);
    let unit_ball = if particles.dim() == 3 { 4.0 / 3.0 * PI } else { PI };
    let first_guess = (1.5 * need as f64 * bbox.volume() / (n as f64 * unit_ball))
        .powf(1.0 / particles.dim() as f64);

    let packed = Packed::new(&tree, particles);
    let order = tree.walk_order();
    let mut h = vec![0.0; n];
    let chunks: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .step_by(512)
        .map(|start| -> Result<Vec<(u32, f64)>> {
            let mut guess = first_guess;
            let mut cand = Vec::new();
            let mut out = Vec::with_capacity(512);
            for me in start..(start + 512).min(n) {
                let i = order[me];
                let x = particles.position(i as usize);
                let (radius, used) = kth_radius(&tree, &packed, &x, me, target_neighbors, need, guess, &mut cand)
                    .map_err(|_| Error::CoincidentParticles(i as usize))?;
                guess = used;
                out.push((i, 0.5 * radius));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    for (i, hi) in chunks.into_iter().flatten() {
        h[i as usize] = hi;
    }
    particles.with_smoothing_lengths(h)
}

/// Neighborhood radius for the particle at walk position `me` and the search
/// radius that found it.
#[allow(clippy::too_many_arguments)]
fn kth_radius(
    tree: &crate::tree::Tree,
    packed: &Packed,
    x: &[f64],
    me: usize,
    k: usize,
    need: usize,
    guess: f64,
    cand: &mut Vec<f64>,
) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut r = guess;
    for round in 0.. {
        cand.clear();
        packed.within(tree, x, r, &mut |q, d2| {
            if q != me {
                cand.push(d2);
            }
        });
        if cand.len() < need {
            lo = r;
            r = if hi.is_finite() { (lo * hi).sqrt() } else { 1.25 * r };
        } else if cand.len() > 8 * need && round < 100 && (lo == 0.0 || r > 1.01 * lo) {
            hi = r;
            r = if lo > 0.0 { (lo * hi).sqrt() } else { 0.8 * r };
        } else {
            break;
        }
    }

    let (left, &mut dk2, right) = cand.select_nth_unstable_by(k - 1, f64::total_cmp);
    let dk = dk2.sqrt();
    let next = right.iter().copied().fold(f64::INFINITY, f64::min).sqrt();
    let radius = if next <= dk * (1.0 + TIE_EPS) {
        let shell = left
            .iter()
            .map(|d2| d2.sqrt())
            .filter(|&d| d >= dk * (1.0 - TIE_EPS))
            .fold(dk, f64::min);
        shell * (1.0 - TIE_EPS)
    } else {
        dk * (1.0 + INCLUDE_EPS)
    };
    if radius <= 0.0 {
        return Err(Error::CoincidentParticles(me));
    }
    Ok((radius, r))
}
