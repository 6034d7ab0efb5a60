//! Adaptive branching-factor tree construction.
//!
//! A node holding more than `s` particles is cut into `b^k` equal sub-cells,
//! where `b` is first chosen as if the particles were uniformly spread
//! (`b = ceil((n / s)^(1/k))`). If too many of the resulting sub-cells hold at
//! most `alpha * s` particles, `b` is halved and the particles redistributed,
//! down to `b = 2`, where the node degenerates to an octree (or quadtree)
//! split. Only non-empty sub-cells are stored.
//!
//! Particles are never copied into the tree. The tree owns a permutation of
//! particle indices laid out in depth-first walk order, and every node refers
//! to the contiguous slice of that permutation holding its particles.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BoundingBox, CellCoords, ParticleSet, MAX_DIM};

/// Nodes with at least this many particles distribute them in parallel and
/// build their children as parallel tasks.
const PARALLEL_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuildPolicy {
    /// Branching factor from particle count, halved while too many sub-cells are underfull.
    Adaptive,
    /// `b = 2` at every node: the classical octree (quadtree in 2D).
    FixedOctree,
}

impl BuildPolicy {
    pub fn name(self) -> &'static str {
        match self {
            BuildPolicy::Adaptive => "adaptive",
            BuildPolicy::FixedOctree => "octree",
        }
    }
}

impl std::str::FromStr for BuildPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adaptive" => Ok(BuildPolicy::Adaptive),
            "octree" => Ok(BuildPolicy::FixedOctree),
            other => Err(Error::InvalidParams(format!("unknown policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// Bucket size `s`: a node with more particles than this is subdivided.
    pub bucket_size: usize,
    /// Fraction of the bucket size below which a sub-cell counts as underfull.
    pub alpha: f64,
    /// Largest tolerated fraction of underfull sub-cells.
    pub beta: f64,
    pub policy: BuildPolicy,
    /// Nodes at this depth become leaves whatever their count.
    pub depth_cap: u32,
    /// Upper bound on the per-dimension branching factor. `None` picks the
    /// largest `b` with `b^k` sub-cell ids fitting a `u32`.
    pub b_cap: Option<u32>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            bucket_size: 8,
            alpha: 0.5,
            beta: 0.5,
            policy: BuildPolicy::Adaptive,
            depth_cap: 64,
            b_cap: None,
        }
    }
}

impl TreeParams {
    pub fn octree() -> Self {
        Self {
            policy: BuildPolicy::FixedOctree,
            ..Self::default()
        }
    }

    pub fn with_policy(self, policy: BuildPolicy) -> Self {
        Self { policy, ..self }
    }

    pub fn with_bucket_size(self, bucket_size: usize) -> Self {
        Self { bucket_size, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bucket_size < 1 {
            return Err(Error::InvalidParams("bucket size must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParams(format!("alpha {} not in (0, 1]", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidParams(format!("beta {} not in (0, 1]", self.beta)));
        }
        if self.depth_cap < 1 {
            return Err(Error::InvalidParams("depth cap must be at least 1".into()));
        }
        if matches!(self.b_cap, Some(c) if c < 2) {
            return Err(Error::InvalidParams("branching cap must be at least 2".into()));
        }
        Ok(())
    }

    /// Branching cap actually applied in `dim` dimensions.
    pub fn effective_b_cap(&self, dim: usize) -> u32 {
        let max = default_b_cap(dim);
        self.b_cap.map_or(max, |c| c.min(max))
    }
}

/// Largest `b` such that every sub-cell id in `0..b^dim` fits a `u32`.
pub fn default_b_cap(dim: usize) -> u32 {
    let limit = u128::from(u32::MAX) + 1;
    let mut b: u128 = (limit as f64).powf(1.0 / dim as f64) as u128 + 2;
    while b.pow(dim as u32) > limit {
        b -= 1;
    }
    b as u32
}

/// `b = ceil((n / s)^(1/k))`, clamped to `[2, default_b_cap(k)]`.
pub fn compute_branching_factor(n: usize, s: usize, k: usize) -> Result<u32> {
    branching_factor(n, s, k, default_b_cap(k))
}

fn branching_factor(n: usize, s: usize, k: usize, b_cap: u32) -> Result<u32> {
    crate::model::check_dim(k)?;
    if s == 0 {
        return Err(Error::InvalidParams("bucket size must be at least 1".into()));
    }
    if n <= s {
        return Err(Error::NoSubdivisionNeeded { n, s });
    }
    // The float root can land just below an exact integer, so settle on the
    // smallest b with b^k * s >= n in integer arithmetic.
    let fits = |b: u64| u128::from(b).pow(k as u32) * s as u128 >= n as u128;
    let mut b = ((n as f64 / s as f64).powf(1.0 / k as f64).ceil() as u64).max(1);
    while b > 1 && fits(b - 1) {
        b -= 1;
    }
    while !fits(b) {
        b += 1;
    }
    Ok(b.clamp(2, u64::from(b_cap)) as u32)
}

/// Sub-cell index of `x` along one axis, clamped into `[0, b - 1]`.
#[inline]
pub(crate) fn cell_1d(x: f64, min: f64, width: f64, b: u32) -> u32 {
    let v = ((x - min) / width * f64::from(b)).floor();
    if v >= f64::from(b) {
        b - 1
    } else if v > 0.0 {
        v as u32
    } else {
        0
    }
}

/// Sub-cell coordinates `floor((x_l - min_l) / (max_l - min_l) * b)` of a
/// point inside `bbox`. A point on the maximum face maps to `b - 1`.
pub fn subcell_coords(x: &[f64], bbox: &BoundingBox, b: u32) -> Result<CellCoords> {
    let dim = bbox.dim();
    if x.len() < dim {
        return Err(Error::InvalidCoordinates { index: 0 });
    }
    if b == 0 {
        return Err(Error::InvalidParams("branching factor must be positive".into()));
    }
    if !bbox.contains_loose(x) {
        return Err(Error::ParticleOutsideCell);
    }
    let mut c = [0u32; MAX_DIM];
    for l in 0..dim {
        c[l] = cell_1d(x[l], bbox.min()[l], bbox.side(l), b);
    }
    Ok(CellCoords::from_array(dim, c))
}

/// Linear sub-cell id `c_1 + c_2 b + c_3 b^2` (first dimension fastest).
pub fn subcell_index(c: &CellCoords, b: u32) -> Result<u64> {
    let mut j = 0u64;
    let mut stride = 1u64;
    for &cl in c.as_slice() {
        if cl >= b {
            return Err(Error::CellCoordOutOfRange { coord: cl, b });
        }
        j += u64::from(cl) * stride;
        stride *= u64::from(b);
    }
    Ok(j)
}

#[inline]
fn coords_of(j: u32, b: u32, dim: usize) -> CellCoords {
    let mut c = [0u32; MAX_DIM];
    let mut rest = j;
    for slot in c.iter_mut().take(dim) {
        *slot = rest % b;
        rest /= b;
    }
    CellCoords::from_array(dim, c)
}

/// Fraction of sub-cells holding at most `alpha * s` particles, kept as an
/// exact ratio of counts. Empty sub-cells count as underfull.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistributionRatio {
    pub underfull: u64,
    pub total: u64,
}

impl DistributionRatio {
    pub fn value(&self) -> f64 {
        self.underfull as f64 / self.total as f64
    }
}

/// Distribution ratio from the occupied sub-cells of a node cut into `b^k`
/// cells. `counts` maps sub-cell id to particle count; missing ids are empty.
pub fn distribution_ratio<I>(counts: I, b: u32, k: usize, alpha: f64, s: usize) -> DistributionRatio
where
    I: IntoIterator<Item = (u64, usize)>,
{
    let total = u64::from(b).pow(k as u32);
    let threshold = alpha * s as f64;
    let full = counts
        .into_iter()
        .filter(|&(j, nj)| {
            debug_assert!(j < total);
            nj as f64 > threshold
        })
        .count() as u64;
    DistributionRatio {
        underfull: total - full,
        total,
    }
}

fn dense_ratio(counts: &[u32], threshold: f64) -> DistributionRatio {
    let full = counts.iter().filter(|&&c| f64::from(c) > threshold).count() as u64;
    DistributionRatio {
        underfull: counts.len() as u64 - full,
        total: counts.len() as u64,
    }
}

/// Result of distributing a set of particles into the sub-cells of one box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    /// `(sub-cell id, count)` for every non-empty sub-cell, ascending by id.
    pub counts: Vec<(u64, usize)>,
    /// Particle indices per non-empty sub-cell, aligned with `counts`, each
    /// in input order.
    pub cells: Vec<Vec<u32>>,
}

/// Assigns every listed particle to its sub-cell of `bbox` cut `b` ways.
pub fn distribute_once(
    indices: &[u32],
    particles: &ParticleSet,
    bbox: &BoundingBox,
    b: u32,
) -> Result<Distribution> {
    if b < 1 || u64::from(b).pow(bbox.dim() as u32) > u64::from(u32::MAX) + 1 {
        return Err(Error::InvalidParams(format!("branching factor {b} out of range")));
    }
    let cells = assign_cells(indices, particles, bbox, b)?;
    let mut map: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (&idx, &j) in indices.iter().zip(&cells) {
        map.entry(j).or_default().push(idx);
    }
    let counts = map.iter().map(|(&j, v)| (u64::from(j), v.len())).collect();
    Ok(Distribution {
        counts,
        cells: map.into_values().collect(),
    })
}

/// Sub-cell id of every particle in `indices`.
fn assign_cells(
    indices: &[u32],
    particles: &ParticleSet,
    bbox: &BoundingBox,
    b: u32,
) -> Result<Vec<u32>> {
    let dim = bbox.dim();
    let cols: Vec<&[f64]> = (0..dim).map(|l| particles.coord(l)).collect();
    let mins = bbox.min();
    let widths: Vec<f64> = (0..dim).map(|l| bbox.side(l)).collect();
    let one = |&i: &u32| -> Result<u32> {
        let i = i as usize;
        let mut x = [0.0; MAX_DIM];
        for l in 0..dim {
            x[l] = cols[l][i];
        }
        if !bbox.contains_loose(&x) {
            return Err(Error::ParticleOutsideCell);
        }
        let mut j = 0u32;
        let mut stride = 1u32;
        for l in 0..dim {
            j += cell_1d(x[l], mins[l], widths[l], b) * stride;
            stride = stride.wrapping_mul(b);
        }
        Ok(j)
    };
    if indices.len() >= PARALLEL_THRESHOLD {
        indices.par_iter().with_min_len(4096).map(one).collect()
    } else {
        indices.iter().map(one).collect()
    }
}

/// Interior node payload.
#[derive(Debug, Clone)]
pub struct Internal {
    b: u32,
    initial_b: u32,
    rounds: u32,
    ratio: DistributionRatio,
    child_ids: Vec<u32>,
    /// One entry per sub-cell, so the range walk can index sub-cells
    /// directly and skip leaves without loading their nodes.
    slots: Vec<Slot>,
    children: Vec<TreeNode>,
}

pub(crate) const NO_CHILD: u32 = u32::MAX;

/// Sub-cell entry: child index (or [`NO_CHILD`]) and a copy of the child's
/// walk-order range.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Slot {
    pub child: u32,
    pub start: u32,
    pub count: u32,
    pub leaf: bool,
}

const EMPTY_SLOT: Slot = Slot {
    child: NO_CHILD,
    start: 0,
    count: 0,
    leaf: false,
};

#[derive(Debug, Clone)]
pub enum NodeKind {
    Leaf {
        /// Set when the node kept more than `s` particles because the depth
        /// cap was reached or the box became too small to split.
        capped: bool,
    },
    Internal(Box<Internal>),
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    bbox: BoundingBox,
    depth: u32,
    start: u32,
    count: u32,
    kind: NodeKind,
}

impl TreeNode {
    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of particles under this node.
    pub fn count(&self) -> usize {
        self.count as usize
    }

    /// Offset of this node's particles in the tree's walk order.
    pub fn start(&self) -> usize {
        self.start as usize
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn is_capped(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { capped: true })
    }

    /// Branching factor used at this node; `None` for leaves.
    pub fn branching(&self) -> Option<u32> {
        self.internal().map(|n| n.b)
    }

    /// Branching factor before any halving.
    pub fn initial_branching(&self) -> Option<u32> {
        self.internal().map(|n| n.initial_b)
    }

    /// Number of halvings (and redistributions) performed at this node.
    pub fn redistribution_rounds(&self) -> u32 {
        self.internal().map_or(0, |n| n.rounds)
    }

    /// Distribution ratio accepted at this node.
    pub fn ratio(&self) -> Option<DistributionRatio> {
        self.internal().map(|n| n.ratio)
    }

    /// Non-empty children with their sub-cell ids, ascending by id.
    pub fn children(&self) -> impl Iterator<Item = (u32, &TreeNode)> {
        self.internal()
            .into_iter()
            .flat_map(|n| n.child_ids.iter().copied().zip(n.children.iter()))
    }

    /// Child in sub-cell `j`, if that sub-cell is non-empty.
    pub fn child(&self, j: u32) -> Option<&TreeNode> {
        let n = self.internal()?;
        match n.slots.get(j as usize) {
            Some(slot) if slot.child != NO_CHILD => Some(&n.children[slot.child as usize]),
            _ => None,
        }
    }

    pub(crate) fn internal(&self) -> Option<&Internal> {
        match &self.kind {
            NodeKind::Internal(n) => Some(n),
            NodeKind::Leaf { .. } => None,
        }
    }

    /// Branching factor, sub-cell slots and children.
    pub(crate) fn child_table(&self) -> Option<(u32, &[Slot], &[TreeNode])> {
        self.internal()
            .map(|n| (n.b, n.slots.as_slice(), n.children.as_slice()))
    }
}

/// A built tree: the node hierarchy plus the walk-order permutation of
/// particle indices its leaves point into.
#[derive(Debug, Clone)]
pub struct Tree {
    root: TreeNode,
    order: Vec<u32>,
    params: TreeParams,
}

impl Tree {
    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.root.bbox.dim()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Particle indices in depth-first walk order (children by ascending
    /// sub-cell id, buckets by ascending index).
    pub fn walk_order(&self) -> &[u32] {
        &self.order
    }

    /// Particle indices under `node`; the bucket when `node` is a leaf.
    pub fn particles_of(&self, node: &TreeNode) -> &[u32] {
        &self.order[node.start()..node.start() + node.count()]
    }

    /// Leaves in depth-first walk order.
    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.visit_dfs(|node| {
            if node.is_leaf() {
                out.push(node);
            }
        });
        out
    }

    /// Pre-order depth-first traversal, children by ascending sub-cell id.
    pub fn visit_dfs<'a>(&'a self, mut f: impl FnMut(&'a TreeNode)) {
        fn rec<'a>(node: &'a TreeNode, f: &mut impl FnMut(&'a TreeNode)) {
            f(node);
            for (_, child) in node.children() {
                rec(child, f);
            }
        }
        rec(&self.root, &mut f);
    }
}

/// Tree shape summary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BuildDiagnostics {
    pub max_depth: u32,
    pub total_nodes: u64,
    pub total_leaves: u64,
    pub capped_leaves: u64,
    /// `rounds_histogram[r]` is the number of internal nodes that halved
    /// their branching factor `r` times.
    pub rounds_histogram: Vec<u64>,
    /// Distribution ratio accepted at each internal node, in walk order.
    pub final_ratios: Vec<f64>,
    /// Internal node count per branching factor.
    pub branching_histogram: BTreeMap<u32, u64>,
}

impl BuildDiagnostics {
    pub fn internal_nodes(&self) -> u64 {
        self.total_nodes - self.total_leaves
    }

    pub fn total_redistribution_rounds(&self) -> u64 {
        self.rounds_histogram
            .iter()
            .enumerate()
            .map(|(r, &c)| r as u64 * c)
            .sum()
    }

    /// Mean branching factor over internal nodes; `None` for a single leaf.
    pub fn mean_branching(&self) -> Option<f64> {
        let nodes: u64 = self.branching_histogram.values().sum();
        (nodes > 0).then(|| {
            self.branching_histogram
                .iter()
                .map(|(&b, &c)| f64::from(b) * c as f64)
                .sum::<f64>()
                / nodes as f64
        })
    }
}

/// Walks the tree and reports its depth, node counts and redistribution work.
pub fn tree_stats(tree: &Tree) -> BuildDiagnostics {
    let mut d = BuildDiagnostics::default();
    tree.visit_dfs(|node| {
        d.total_nodes += 1;
        d.max_depth = d.max_depth.max(node.depth);
        match &node.kind {
            NodeKind::Leaf { capped } => {
                d.total_leaves += 1;
                d.capped_leaves += u64::from(*capped);
            }
            NodeKind::Internal(n) => {
                let r = n.rounds as usize;
                if d.rounds_histogram.len() <= r {
                    d.rounds_histogram.resize(r + 1, 0);
                }
                d.rounds_histogram[r] += 1;
                d.final_ratios.push(n.ratio.value());
                *d.branching_histogram.entry(n.b).or_default() += 1;
            }
        }
    });
    d
}

struct BuildContext<'a> {
    particles: &'a ParticleSet,
    params: TreeParams,
    b_cap: u32,
    dim: usize,
}

/// Builds the tree over all particles inside `bbox`.
pub fn build_tree(
    particles: &ParticleSet,
    bbox: &BoundingBox,
    params: &TreeParams,
) -> Result<(Tree, BuildDiagnostics)> {
    params.validate()?;
    if particles.is_empty() {
        return Err(Error::EmptyParticleSet);
    }
    if particles.dim() != bbox.dim() {
        return Err(Error::InvalidBox(format!(
            "box has {} dimensions, particles have {}",
            bbox.dim(),
            particles.dim()
        )));
    }
    for i in 0..particles.len() {
        if !bbox.contains_loose(&particles.position(i)) {
            return Err(Error::ParticleOutsideCell);
        }
    }
    let ctx = BuildContext {
        particles,
        params: *params,
        b_cap: params.effective_b_cap(particles.dim()),
        dim: particles.dim(),
    };
    let mut order: Vec<u32> = (0..particles.len() as u32).collect();
    let root = build_node(&ctx, *bbox, 0, 0, &mut order)?;
    let tree = Tree {
        root,
        order,
        params: *params,
    };
    let diagnostics = tree_stats(&tree);
    Ok((tree, diagnostics))
}

fn leaf(bbox: BoundingBox, depth: u32, start: u32, count: usize, capped: bool) -> TreeNode {
    TreeNode {
        bbox,
        depth,
        start,
        count: count as u32,
        kind: NodeKind::Leaf { capped },
    }
}

fn build_node(
    ctx: &BuildContext<'_>,
    bbox: BoundingBox,
    depth: u32,
    start: u32,
    slice: &mut [u32],
) -> Result<TreeNode> {
    let n = slice.len();
    let s = ctx.params.bucket_size;
    if n <= s {
        return Ok(leaf(bbox, depth, start, n, false));
    }
    if depth >= ctx.params.depth_cap || !bbox.is_splittable() {
        return Ok(leaf(bbox, depth, start, n, true));
    }

    let mut b = match ctx.params.policy {
        BuildPolicy::Adaptive => branching_factor(n, s, ctx.dim, ctx.b_cap)?,
        BuildPolicy::FixedOctree => 2,
    };
    let initial_b = b;
    let mut rounds = 0;
    let threshold = ctx.params.alpha * s as f64;
    let (cells, counts, ratio) = loop {
        let cells = assign_cells(slice, ctx.particles, &bbox, b)?;
        let mut counts = vec![0u32; (b as usize).pow(ctx.dim as u32)];
        for &j in &cells {
            counts[j as usize] += 1;
        }
        let ratio = dense_ratio(&counts, threshold);
        let halve = ctx.params.policy == BuildPolicy::Adaptive
            && b > 2
            && ratio.value() >= ctx.params.beta;
        if !halve {
            break (cells, counts, ratio);
        }
        b = (b / 2).max(2);
        rounds += 1;
    };

    // Stable counting sort: sub-cells in ascending id, indices keep their order.
    let mut offsets = Vec::with_capacity(counts.len());
    let mut acc = 0u32;
    for &c in &counts {
        offsets.push(acc);
        acc += c;
    }
    let mut sorted = vec![0u32; n];
    for (&idx, &j) in slice.iter().zip(&cells) {
        let slot = &mut offsets[j as usize];
        sorted[*slot as usize] = idx;
        *slot += 1;
    }
    slice.copy_from_slice(&sorted);
    drop(sorted);
    drop(cells);

    let mut child_ids = Vec::new();
    let mut slots = vec![EMPTY_SLOT; counts.len()];
    let mut jobs = Vec::new();
    let mut rest = slice;
    let mut child_start = start;
    for (j, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let (head, tail) = rest.split_at_mut(c as usize);
        rest = tail;
        slots[j] = Slot {
            child: child_ids.len() as u32,
            start: child_start,
            count: c,
            leaf: false,
        };
        child_ids.push(j as u32);
        let child_box = bbox.sub_box(&coords_of(j as u32, b, ctx.dim), b);
        jobs.push((child_box, child_start, head));
        child_start += c;
    }

    let make = |(child_box, child_start, part): (BoundingBox, u32, &mut [u32])| {
        build_node(ctx, child_box, depth + 1, child_start, part)
    };
    let children: Vec<TreeNode> = if n >= PARALLEL_THRESHOLD {
        jobs.into_par_iter().map(make).collect::<Result<_>>()?
    } else {
        jobs.into_iter().map(make).collect::<Result<_>>()?
    };
    for slot in slots.iter_mut().filter(|s| s.child != NO_CHILD) {
        slot.leaf = children[slot.child as usize].is_leaf();
    }

    Ok(TreeNode {
        bbox,
        depth,
        start,
        count: n as u32,
        kind: NodeKind::Internal(Box::new(Internal {
            b,
            initial_b,
            rounds,
            ratio,
            child_ids,
            slots,
            children,
        })),
    })
}
