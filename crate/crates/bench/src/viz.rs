//! Leaves cut by an axis-aligned plane, in walk order, as CSV and SVG.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, ensure};
use serde::Serialize;
use sphtree::{Tree, TreeNode};

/// One leaf meeting the slice plane. `u` and `v` are the two in-plane axes
/// in ascending order (for 2D sets, axes 0 and 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceCell {
    /// Pre-order index of the node among all tree nodes.
    pub cell_id: usize,
    pub depth: u32,
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Position of the leaf among all leaves in walk order.
    pub visit: usize,
    /// `visit / block_size`: leaves sharing a block are searched together.
    pub block: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceSummary {
    pub cells: usize,
    pub distinct_depths: usize,
}

fn in_plane_axes(dim: usize, axis: usize) -> (usize, usize) {
    match (dim, axis) {
        (2, _) => (0, 1),
        (_, 0) => (1, 2),
        (_, 1) => (0, 2),
        _ => (0, 1),
    }
}

/// Leaves whose box meets the plane `x[axis] = coord`, using half-open
/// `[min, max)` extents so a plane on a shared face picks one side; the root's
/// upper face counts as inside. For 2D sets every leaf is returned.
pub fn walk_slice(tree: &Tree, axis: usize, coord: f64, block_size: usize) -> anyhow::Result<Vec<SliceCell>> {
    ensure!(block_size >= 1, "block size must be at least 1");
    let dim = tree.dim();
    let root = tree.root().bbox();
    if dim == 3 {
        ensure!(axis < 3, "axis must be 0, 1 or 2");
        if !(coord >= root.min()[axis] && coord <= root.max()[axis]) {
            bail!(
                "slice coordinate {coord} outside the root box [{}, {}]",
                root.min()[axis],
                root.max()[axis]
            );
        }
    }
    let (u, v) = in_plane_axes(dim, axis);
    let top = root.max()[axis.min(dim - 1)];
    let cuts = |node: &TreeNode| {
        if dim == 2 {
            return true;
        }
        let (lo, hi) = (node.bbox().min()[axis], node.bbox().max()[axis]);
        lo <= coord && (coord < hi || (hi == top && coord == top))
    };

    let mut out = Vec::new();
    let mut node_id = 0;
    let mut leaf_id = 0;
    tree.visit_dfs(|node| {
        if node.is_leaf() {
            if cuts(node) {
                let b = node.bbox();
                out.push(SliceCell {
                    cell_id: node_id,
                    depth: node.depth(),
                    u_min: b.min()[u],
                    u_max: b.max()[u],
                    v_min: b.min()[v],
                    v_max: b.max()[v],
                    visit: leaf_id,
                    block: leaf_id / block_size,
                });
            }
            leaf_id += 1;
        }
        node_id += 1;
    });
    Ok(out)
}

pub fn summarize_slice(cells: &[SliceCell]) -> SliceSummary {
    let depths: BTreeSet<u32> = cells.iter().map(|c| c.depth).collect();
    SliceSummary { cells: cells.len(), distinct_depths: depths.len() }
}

pub fn write_slice_csv<W: Write>(cells: &[SliceCell], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if cells.is_empty() {
        w.write_record(["cell_id", "depth", "u_min", "u_max", "v_min", "v_max", "visit", "block"])?;
    }
    for c in cells {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Rectangles for every cell and the walk as a polyline through cell
/// centers, one colored segment run per block.
pub fn write_slice_svg<W: Write>(cells: &[SliceCell], mut out: W) -> anyhow::Result<()> {
    const SIZE: f64 = 800.0;
    const MARGIN: f64 = 10.0;
    let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in cells {
        u0 = u0.min(c.u_min);
        u1 = u1.max(c.u_max);
        v0 = v0.min(c.v_min);
        v1 = v1.max(c.v_max);
    }
    let scale = if cells.is_empty() { 1.0 } else { (SIZE - 2.0 * MARGIN) / (u1 - u0).max(v1 - v0) };
    let px = |u: f64| MARGIN + (u - u0) * scale;
    let py = |v: f64| SIZE - MARGIN - (v - v0) * scale;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )?;
    writeln!(svg, r#"<g fill="none" stroke="dimgray" stroke-width="0.5">"#)?;
    for c in cells {
        writeln!(
            svg,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" data-depth="{}"/>"#,
            px(c.u_min),
            py(c.v_max),
            (c.u_max - c.u_min) * scale,
            (c.v_max - c.v_min) * scale,
            c.depth
        )?;
    }
    writeln!(svg, "</g>")?;

    let center = |c: &SliceCell| (px(0.5 * (c.u_min + c.u_max)), py(0.5 * (c.v_min + c.v_max)));
    let mut i = 0;
    while i < cells.len() {
        let block = cells[i].block;
        let mut points = String::new();
        // Start at the previous block's last center so the line stays connected.
        let from = i.saturating_sub(1);
        let mut j = i;
        while j < cells.len() && cells[j].block == block {
            j += 1;
        }
        for c in &cells[from..j] {
            let (x, y) = center(c);
            write!(points, "{x:.3},{y:.3} ")?;
        }
        writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            points.trim_end(),
            PALETTE[block % PALETTE.len()]
        )?;
        i = j;
    }
    writeln!(svg, "</svg>")?;
    out.write_all(svg.as_bytes())?;
    Ok(())
}

/// Writes `<out>.csv` and `<out>.svg` for the slice `x[axis] = coord`.
pub fn export_walk_slice(
    tree: &Tree,
    axis: usize,
    coord: f64,
    block_size: usize,
    out: &Path,
) -> anyhow::Result<SliceSummary> {
    let cells = walk_slice(tree, axis, coord, block_size)?;
    write_slice_csv(&cells, std::fs::File::create(out.with_extension("csv"))?)?;
    write_slice_svg(&cells, std::io::BufWriter::new(std::fs::File::create(out.with_extension("svg"))?))?;
    Ok(summarize_slice(&cells))
}
