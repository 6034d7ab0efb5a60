//! Exact fixed-radius neighbor search over a built tree.
//!
//! A query at `x` with radius `2h` does not test sub-cells one by one. At each
//! internal node it maps the interval `[x_l - 2h, x_l + 2h]` of every axis to
//! an inclusive range of sub-cell indices with the same formula used to place
//! particles, then walks the Cartesian product of those ranges. Non-empty
//! sub-cells in the block are recursed into; leaves are scanned with a squared
//! distance test. Corner cells of the block may lie outside the sphere, which
//! costs distance checks but never correctness.

use crate::error::{Error, Result};
use crate::model::{boundary_tolerance, BoundingBox, ParticleSet, MAX_DIM};
use crate::neighbors::{NeighborList, NeighborLists};
use crate::schedule::{run_chunked, Schedule};
use std::ops::Range;

use crate::tree::{cell_1d, Tree, TreeNode, NO_CHILD};

/// Relative widening of query intervals before they are mapped to sub-cell
/// ranges. Covers rounding in `x ± 2h` so a particle at exactly `2h` is never
/// pruned by the range walk.
const RANGE_PAD: f64 = 1e-12;

/// Inclusive per-axis sub-cell ranges to visit inside one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisitRange {
    dim: usize,
    lo: [u32; MAX_DIM],
    hi: [u32; MAX_DIM],
}

impl VisitRange {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `[min, max]` sub-cell indices along axis `l`.
    pub fn axis(&self, l: usize) -> (u32, u32) {
        (self.lo[l], self.hi[l])
    }

    /// Number of sub-cells in the block.
    pub fn cell_count(&self) -> u64 {
        (0..self.dim)
            .map(|l| u64::from(self.hi[l] - self.lo[l] + 1))
            .product()
    }
}

/// Sub-cell ranges of `bbox` (cut `b` ways) covering `[p_l - radius, p_l + radius]`
/// on every axis, clamped into `[0, b - 1]`.
pub fn visit_range(p: &[f64], radius: f64, bbox: &BoundingBox, b: u32) -> VisitRange {
    let dim = bbox.dim();
    let mut lo = [0u32; MAX_DIM];
    let mut hi = [0u32; MAX_DIM];
    for l in 0..dim {
        lo[l] = cell_1d(p[l] - radius, bbox.min()[l], bbox.side(l), b);
        hi[l] = cell_1d(p[l] + radius, bbox.min()[l], bbox.side(l), b);
    }
    VisitRange { dim, lo, hi }
}

/// Work counters for a search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Tree nodes entered by range walks, the root included.
    pub node_visits: u64,
    /// Leaves whose particles were distance-checked.
    pub leaf_scans: u64,
    pub distance_checks: u64,
}

impl std::ops::AddAssign for SearchStats {
    fn add_assign(&mut self, o: Self) {
        self.node_visits += o.node_visits;
        self.leaf_scans += o.leaf_scans;
        self.distance_checks += o.distance_checks;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub threads: usize,
    pub schedule: Schedule,
    /// Report the query particle as its own neighbor.
    pub include_self: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            threads: 1,
            schedule: Schedule::Static,
            include_self: false,
        }
    }
}

impl SearchConfig {
    pub fn new(threads: usize, schedule: Schedule) -> Self {
        Self {
            threads,
            schedule,
            ..Self::default()
        }
    }
}

/// Query intervals `[lo, hi]` per axis, already padded.
#[derive(Clone, Copy)]
struct Interval<const D: usize> {
    lo: [f64; D],
    hi: [f64; D],
}

impl<const D: usize> Interval<D> {
    fn around(p: &[f64; D], radius: f64) -> Self {
        let mut lo = [0.0; D];
        let mut hi = [0.0; D];
        for l in 0..D {
            let pad = RANGE_PAD * (p[l].abs() + radius);
            lo[l] = p[l] - radius - pad;
            hi[l] = p[l] + radius + pad;
        }
        Self { lo, hi }
    }

    fn empty() -> Self {
        Self {
            lo: [f64::INFINITY; D],
            hi: [f64::NEG_INFINITY; D],
        }
    }

    fn union(&mut self, o: &Self) {
        for l in 0..D {
            self.lo[l] = self.lo[l].min(o.lo[l]);
            self.hi[l] = self.hi[l].max(o.hi[l]);
        }
    }

    fn overlaps(&self, bbox: &BoundingBox) -> bool {
        (0..D).all(|l| {
            let tol = boundary_tolerance(bbox.min()[l], bbox.max()[l]);
            bbox.max()[l] + tol >= self.lo[l] && bbox.min()[l] - tol <= self.hi[l]
        })
    }
}

/// Range walk over the sub-cell block of the query at each level. Leaf
/// children met along one row of the block are handed to `visit` together,
/// with the walk-order positions they cover: they are consecutive siblings,
/// so their particles are contiguous. Every node entered counts as one visit.
fn walk<'t, const D: usize>(
    node: &'t TreeNode,
    q: &Interval<D>,
    stats: &mut SearchStats,
    visit: &mut impl FnMut(&'t [TreeNode], Range<usize>, &mut SearchStats),
) {
    stats.node_visits += 1;
    let Some((b, slots, children)) = node.child_table() else {
        visit(std::slice::from_ref(node), node.start()..node.start() + node.count(), stats);
        return;
    };
    let bbox = node.bbox();
    let mut lo = [0u32; MAX_DIM];
    let mut hi = [0u32; MAX_DIM];
    for l in 0..D {
        lo[l] = cell_1d(q.lo[l], bbox.min()[l], bbox.side(l), b);
        hi[l] = cell_1d(q.hi[l], bbox.min()[l], bbox.side(l), b);
    }
    let (z_lo, z_hi) = if D == 3 { (lo[2], hi[2]) } else { (0, 0) };
    for z in z_lo..=z_hi {
        for y in lo[1]..=hi[1] {
            let row = (b * (y + b * z)) as usize;
            // Children index range and positions of the pending leaf run.
            let mut run: Option<(usize, usize, usize, usize)> = None;
            for slot in &slots[row + lo[0] as usize..=row + hi[0] as usize] {
                if slot.child == NO_CHILD {
                    continue;
                }
                let i = slot.child as usize;
                if slot.leaf {
                    stats.node_visits += 1;
                    let end = (slot.start + slot.count) as usize;
                    run = Some(run.map_or((i, i, slot.start as usize, end), |(a, _, s, _)| (a, i, s, end)));
                } else {
                    if let Some((a, e, s, t)) = run.take() {
                        visit(&children[a..=e], s..t, stats);
                    }
                    walk(&children[i], q, stats, visit);
                }
            }
            if let Some((a, e, s, t)) = run {
                visit(&children[a..=e], s..t, stats);
            }
        }
    }
}

/// Walk-order positions covered by a single leaf.
#[inline]
fn span(leaf: &TreeNode) -> Range<usize> {
    leaf.start()..leaf.start() + leaf.count()
}

fn columns<const D: usize>(particles: &ParticleSet) -> [&[f64]; D] {
    std::array::from_fn(|l| particles.coord(l))
}

#[inline]
fn point<const D: usize>(cols: &[&[f64]; D], i: usize) -> [f64; D] {
    std::array::from_fn(|l| cols[l][i])
}

/// Distance-checks every particle of `bucket` against `p`.
#[inline]
fn scan_bucket<const D: usize>(
    cols: &[&[f64]; D],
    p: &[f64; D],
    r2: f64,
    tree: &Tree,
    leaves: usize,
    range: Range<usize>,
    stats: &mut SearchStats,
    mut hit: impl FnMut(u32, f64),
) {
    let bucket = &tree.walk_order()[range];
    stats.leaf_scans += leaves as u64;
    stats.distance_checks += bucket.len() as u64;
    for &q in bucket {
        let qi = q as usize;
        let mut d2 = 0.0;
        for l in 0..D {
            let d = cols[l][qi] - p[l];
            d2 += d * d;
        }
        if d2 <= r2 {
            hit(q, d2);
        }
    }
}

fn check_sizes(tree: &Tree, particles: &ParticleSet) -> Result<()> {
    if tree.len() != particles.len() || tree.dim() != particles.dim() {
        return Err(Error::MalformedParticleSet(format!(
            "tree covers {} particles in {}D, set has {} in {}D",
            tree.len(),
            tree.dim(),
            particles.len(),
            particles.dim()
        )));
    }
    Ok(())
}

/// Neighbors of particle `p` within `2 * h_p`, the particle itself excluded.
pub fn find_neighbors_one(
    tree: &Tree,
    particles: &ParticleSet,
    p: usize,
    h_p: f64,
) -> Result<NeighborList> {
    find_neighbors_one_with_stats(tree, particles, p, h_p, false).map(|(l, _)| l)
}

pub fn find_neighbors_one_with_stats(
    tree: &Tree,
    particles: &ParticleSet,
    p: usize,
    h_p: f64,
    include_self: bool,
) -> Result<(NeighborList, SearchStats)> {
    check_sizes(tree, particles)?;
    if p >= particles.len() {
        return Err(Error::UnknownParticle(p));
    }
    if !(h_p.is_finite() && h_p > 0.0) {
        return Err(Error::InvalidSmoothingLength { index: p, value: h_p });
    }
    let mut out = NeighborLists::with_capacity(1, 64);
    let mut stats = SearchStats::default();
    match particles.dim() {
        2 => query_into::<2>(tree, particles, p, h_p, include_self, &mut out, &mut stats),
        _ => query_into::<3>(tree, particles, p, h_p, include_self, &mut out, &mut stats),
    }
    Ok((out.list(0), stats))
}

fn query_into<const D: usize>(
    tree: &Tree,
    particles: &ParticleSet,
    p: usize,
    h_p: f64,
    include_self: bool,
    out: &mut NeighborLists,
    stats: &mut SearchStats,
) {
    let cols = columns::<D>(particles);
    let ids = particles.ids();
    let x = point(&cols, p);
    let radius = 2.0 * h_p;
    let r2 = radius * radius;
    let q = Interval::around(&x, radius);
    walk(tree.root(), &q, stats, &mut |run, range, stats| {
        scan_bucket(&cols, &x, r2, tree, run.len(), range, stats, |qi, _| {
            if include_self || qi as usize != p {
                out.push_neighbor(ids[qi as usize]);
            }
        });
    });
    out.close_list(ids[p]);
}

/// Neighbor lists of every particle; entry `i` belongs to particle `i`.
pub fn find_neighbors_all(
    tree: &Tree,
    particles: &ParticleSet,
    config: &SearchConfig,
) -> Result<NeighborLists> {
    find_neighbors_all_with_stats(tree, particles, config).map(|(l, _)| l)
}

pub fn find_neighbors_all_with_stats(
    tree: &Tree,
    particles: &ParticleSet,
    config: &SearchConfig,
) -> Result<(NeighborLists, SearchStats)> {
    check_sizes(tree, particles)?;
    Ok(match particles.dim() {
        2 => all_queries::<2>(tree, particles, config),
        _ => all_queries::<3>(tree, particles, config),
    })
}

/// Particle coordinates copied into walk order, `dim` values per position,
/// so the particles of a leaf sit side by side in memory.
pub(crate) struct Packed {
    dim: usize,
    pos: Vec<f64>,
    /// Particle ids in the same order.
    ids: Vec<u32>,
}

impl Packed {
    pub(crate) fn new(tree: &Tree, particles: &ParticleSet) -> Self {
        let dim = particles.dim();
        let mut pos = Vec::with_capacity(dim * particles.len());
        for &i in tree.walk_order() {
            for l in 0..dim {
                pos.push(particles.coord(l)[i as usize]);
            }
        }
        let ids = tree.walk_order().iter().map(|&i| particles.ids()[i as usize]).collect();
        Self { dim, pos, ids }
    }

    #[inline]
    fn at<const D: usize>(&self, position: usize) -> [f64; D] {
        let row = &self.pos[D * position..D * position + D];
        std::array::from_fn(|l| row[l])
    }

    /// Calls `f(position, squared distance)` for every particle within
    /// `radius` of `x`.
    pub(crate) fn within(&self, tree: &Tree, x: &[f64], radius: f64, f: &mut impl FnMut(usize, f64)) {
        let mut stats = SearchStats::default();
        match self.dim {
            2 => self.within_d::<2>(tree, &[x[0], x[1]], radius, &mut stats, f),
            _ => self.within_d::<3>(tree, &[x[0], x[1], x[2]], radius, &mut stats, f),
        }
    }

    fn within_d<const D: usize>(
        &self,
        tree: &Tree,
        x: &[f64; D],
        radius: f64,
        stats: &mut SearchStats,
        f: &mut impl FnMut(usize, f64),
    ) {
        let r2 = radius * radius;
        walk(tree.root(), &Interval::around(x, radius), stats, &mut |run, range, stats| {
            self.scan::<D>(x, r2, run.len(), range, stats, &mut *f)
        });
    }

    /// Same test as [`scan_bucket`], over the walk-order positions of a run
    /// of leaves.
    #[inline]
    fn scan<const D: usize>(
        &self,
        p: &[f64; D],
        r2: f64,
        leaves: usize,
        range: Range<usize>,
        stats: &mut SearchStats,
        mut hit: impl FnMut(usize, f64),
    ) {
        stats.leaf_scans += leaves as u64;
        stats.distance_checks += range.len() as u64;
        let start = range.start;
        let rows = self.pos[D * start..D * range.end].chunks_exact(D);
        for (k, row) in rows.enumerate() {
            let mut d2 = 0.0;
            for l in 0..D {
                let d = row[l] - p[l];
                d2 += d * d;
            }
            if d2 <= r2 {
                hit(start + k, d2);
            }
        }
    }
}

impl Packed {
    /// Appends the ids of every particle of `run` within `sqrt(r2)` of `p`,
    /// except the one at position `skip`. Same comparison as [`Packed::scan`],
    /// written without a data-dependent branch.
    #[inline]
    fn scan_into<const D: usize>(
        &self,
        p: &[f64; D],
        r2: f64,
        leaves: usize,
        range: Range<usize>,
        skip: usize,
        stats: &mut SearchStats,
        out: &mut Vec<u32>,
    ) {
        stats.leaf_scans += leaves as u64;
        stats.distance_checks += range.len() as u64;
        let mut w = out.len();
        out.resize(w + range.len(), 0);
        let rows = self.pos[D * range.start..D * range.end].chunks_exact(D);
        for ((row, &id), at) in rows.zip(&self.ids[range.clone()]).zip(range) {
            let mut d2 = 0.0;
            for l in 0..D {
                let d = row[l] - p[l];
                d2 += d * d;
            }
            out[w] = id;
            w += usize::from((d2 <= r2) & (at != skip));
        }
        out.truncate(w);
    }
}

/// Queries per output segment; bounds the memory held twice while segments
/// are moved into the final index-ordered lists.
const SEGMENT: usize = 8192;

/// Lists for a run of consecutive walk-order positions starting at `.0`.
type Segment = (usize, NeighborLists);

fn all_queries<const D: usize>(
    tree: &Tree,
    particles: &ParticleSet,
    config: &SearchConfig,
) -> (NeighborLists, SearchStats) {
    // Queries run in walk order: consecutive queries share most of their
    // candidate leaves, which then stay in cache.
    let packed = Packed::new(tree, particles);
    let order = tree.walk_order();
    let ids = particles.ids();
    let h = particles.h();
    let chunks = run_chunked(particles.len(), config.threads, config.schedule, |range| {
        let mut segments: Vec<Segment> = Vec::new();
        let mut stats = SearchStats::default();
        let mut pos = range.start;
        while pos < range.end {
            let end = (pos + SEGMENT).min(range.end);
            let mut out = NeighborLists::with_capacity(end - pos, (end - pos) * 32);
            for me in pos..end {
                let p = order[me] as usize;
                let x = packed.at::<D>(me);
                let radius = 2.0 * h[p];
                let r2 = radius * radius;
                let skip = if config.include_self { usize::MAX } else { me };
                let buf = out.open_buffer();
                walk(tree.root(), &Interval::around(&x, radius), &mut stats, &mut |run, range, stats| {
                    packed.scan_into::<D>(&x, r2, run.len(), range, skip, stats, buf)
                });
                out.close_list(ids[p]);
            }
            segments.push((pos, out));
            pos = end;
        }
        (segments, stats)
    });
    let mut stats = SearchStats::default();
    let mut segments = Vec::new();
    for (_, (seg, s)) in chunks {
        segments.extend(seg);
        stats += s;
    }
    (into_index_order(order, segments), stats)
}

/// Moves walk-order segments into one set of lists where entry `i` belongs
/// to particle `i`. Segments are released as soon as they are copied.
fn into_index_order(order: &[u32], segments: Vec<Segment>) -> NeighborLists {
    let n = order.len();
    let mut offsets = vec![0usize; n + 1];
    for (start, lists) in &segments {
        for k in 0..lists.len() {
            offsets[order[start + k] as usize + 1] = lists.get(k).len();
        }
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut query_ids = vec![0u32; n];
    let mut neighbors = vec![0u32; offsets[n]];
    for (start, lists) in segments {
        for k in 0..lists.len() {
            let i = order[start + k] as usize;
            query_ids[i] = lists.query_id(k);
            neighbors[offsets[i]..offsets[i + 1]].copy_from_slice(lists.get(k));
        }
    }
    NeighborLists::from_parts(query_ids, offsets, neighbors)
}

/// A bijection between two particle orderings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

impl Permutation {
    /// From `forward[new] = old`.
    pub fn from_forward(forward: Vec<u32>) -> Result<Self> {
        let mut inverse = vec![u32::MAX; forward.len()];
        for (new, &old) in forward.iter().enumerate() {
            match inverse.get_mut(old as usize) {
                Some(slot) if *slot == u32::MAX => *slot = new as u32,
                _ => {
                    return Err(Error::MalformedParticleSet(
                        "permutation is not a bijection".into(),
                    ))
                }
            }
        }
        Ok(Self { forward, inverse })
    }

    /// `forward()[new] = old`.
    pub fn forward(&self) -> &[u32] {
        &self.forward
    }

    /// `inverse()[old] = new`.
    pub fn inverse(&self) -> &[u32] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &o)| i as u32 == o)
    }

    /// Moves `data` from the old order into the new one.
    pub fn apply<T: Copy>(&self, data: &[T]) -> Vec<T> {
        self.forward.iter().map(|&old| data[old as usize]).collect()
    }

    /// Moves `data` from the new order back into the old one.
    pub fn unapply<T: Copy>(&self, data: &[T]) -> Vec<T> {
        self.inverse.iter().map(|&new| data[new as usize]).collect()
    }
}

/// Reorders particles into the tree's depth-first walk order. Particle ids
/// travel with the particles, so neighbor lists of the reordered set can be
/// compared with the original by id.
///
/// Building a tree over the reordered set reproduces the same cells with an
/// identity walk order.
pub fn reorder_particles(tree: &Tree, particles: &ParticleSet) -> Result<(ParticleSet, Permutation)> {
    check_sizes(tree, particles)?;
    let perm = Permutation::from_forward(tree.walk_order().to_vec())?;
    let reordered = particles.permuted(perm.forward())?;
    Ok((reordered, perm))
}

/// Same result as [`find_neighbors_all`], computed block by block: the leaves
/// are cut into groups of `block` consecutive leaves in walk order, the tree
/// is walked once per group with the union of its queries' intervals, and
/// every query of the group is then checked against that shared candidate
/// set. Intended for particles already in walk order (see
/// [`reorder_particles`]), where a group's queries and candidates are
/// contiguous in memory.
pub fn find_neighbors_blocked(
    tree: &Tree,
    particles: &ParticleSet,
    block: usize,
    config: &SearchConfig,
) -> Result<NeighborLists> {
    find_neighbors_blocked_with_stats(tree, particles, block, config).map(|(l, _)| l)
}

pub fn find_neighbors_blocked_with_stats(
    tree: &Tree,
    particles: &ParticleSet,
    block: usize,
    config: &SearchConfig,
) -> Result<(NeighborLists, SearchStats)> {
    check_sizes(tree, particles)?;
    if block == 0 {
        return Err(Error::InvalidParams("block size must be at least 1".into()));
    }
    Ok(match particles.dim() {
        2 => blocked::<2>(tree, particles, block, config),
        _ => blocked::<3>(tree, particles, block, config),
    })
}

fn blocked<const D: usize>(
    tree: &Tree,
    particles: &ParticleSet,
    block: usize,
    config: &SearchConfig,
) -> (NeighborLists, SearchStats) {
    let packed = Packed::new(tree, particles);
    let ids = particles.ids();
    let h = particles.h();
    let order = tree.walk_order();
    let leaves = tree.leaves();
    let groups: Vec<&[&TreeNode]> = leaves.chunks(block).collect();

    let chunks = run_chunked(groups.len(), config.threads, config.schedule, |range| {
        let mut segments: Vec<Segment> = Vec::new();
        let mut stats = SearchStats::default();
        let mut candidates: Vec<&TreeNode> = Vec::new();
        for group in &groups[range] {
            let first = group[0].start();
            let last = group[group.len() - 1];
            let queries = first..last.start() + last.count();

            let mut union = Interval::<D>::empty();
            for me in queries.clone() {
                let p = order[me] as usize;
                union.union(&Interval::around(&packed.at::<D>(me), 2.0 * h[p]));
            }
            candidates.clear();
            walk(tree.root(), &union, &mut stats, &mut |run, _, _| candidates.extend(run));

            let mut out = NeighborLists::with_capacity(queries.len(), queries.len() * 32);
            for me in queries {
                let p = order[me] as usize;
                let x = packed.at::<D>(me);
                let radius = 2.0 * h[p];
                let r2 = radius * radius;
                let q = Interval::around(&x, radius);
                let skip = if config.include_self { usize::MAX } else { me };
                let buf = out.open_buffer();
                for leaf in &candidates {
                    if q.overlaps(leaf.bbox()) {
                        packed.scan_into::<D>(&x, r2, 1, span(leaf), skip, &mut stats, buf);
                    }
                }
                out.close_list(ids[p]);
            }
            segments.push((first, out));
        }
        (segments, stats)
    });
    let mut stats = SearchStats::default();
    let mut segments = Vec::new();
    for (_, (seg, s)) in chunks {
        segments.extend(seg);
        stats += s;
    }
    (into_index_order(order, segments), stats)
}

/// Calls `f(index, squared distance)` for every particle within `radius`
/// of `x`, including any particle sitting at `x` itself.
pub fn for_each_within(
    tree: &Tree,
    particles: &ParticleSet,
    x: &[f64],
    radius: f64,
    mut f: impl FnMut(u32, f64),
) {
    let mut stats = SearchStats::default();
    match particles.dim() {
        2 => {
            let cols = columns::<2>(particles);
            let p = [x[0], x[1]];
            within::<2>(tree, &cols, &p, radius, &mut stats, &mut f);
        }
        _ => {
            let cols = columns::<3>(particles);
            let p = [x[0], x[1], x[2]];
            within::<3>(tree, &cols, &p, radius, &mut stats, &mut f);
        }
    }
}

fn within<const D: usize>(
    tree: &Tree,
    cols: &[&[f64]; D],
    p: &[f64; D],
    radius: f64,
    stats: &mut SearchStats,
    f: &mut impl FnMut(u32, f64),
) {
    let r2 = radius * radius;
    let q = Interval::around(p, radius);
    walk(tree.root(), &q, stats, &mut |run, range, stats| {
        scan_bucket(cols, p, r2, tree, run.len(), range, stats, &mut *f);
    });
}

/// Leaves reached by the range walk for a query at `x` with radius `radius`.
pub fn leaves_in_range<'t>(tree: &'t Tree, x: &[f64], radius: f64) -> Vec<&'t TreeNode> {
    fn go<'t, const D: usize>(tree: &'t Tree, x: &[f64], radius: f64) -> Vec<&'t TreeNode> {
        let p: [f64; D] = std::array::from_fn(|l| x[l]);
        let mut out = Vec::new();
        let mut stats = SearchStats::default();
        walk(tree.root(), &Interval::around(&p, radius), &mut stats, &mut |run, _, _| {
            out.extend(run)
        });
        out
    }
    match tree.dim() {
        2 => go::<2>(tree, x, radius),
        _ => go::<3>(tree, x, radius),
    }
}
