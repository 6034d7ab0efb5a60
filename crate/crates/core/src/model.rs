//! Particle storage and the axis-aligned boxes the tree is built from.
//!
//! Positions are stored columnar, one array per dimension, so the distance
//! loops in the search read contiguous memory once particles are reordered.

use crate::error::{Error, Result};

/// Largest supported dimension count.
pub const MAX_DIM: usize = 3;

/// Columnar store of `n` particles in `k` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    coords: Vec<Vec<f64>>,
    h: Vec<f64>,
    ids: Vec<u32>,
}

impl ParticleSet {
    /// Builds a set from per-dimension coordinate columns, smoothing lengths
    /// and stable ids. All invariants are checked.
    pub fn new(coords: Vec<Vec<f64>>, h: Vec<f64>, ids: Vec<u32>) -> Result<Self> {
        let dim = coords.len();
        check_dim(dim)?;
        let n = h.len();
        if u32::try_from(n).is_err() {
            return Err(Error::Overflow(format!("{n} particles")));
        }
        if coords.iter().any(|c| c.len() != n) || ids.len() != n {
            return Err(Error::MalformedParticleSet(
                "coordinate, smoothing length and id arrays differ in length".into(),
            ));
        }
        for (i, &hi) in h.iter().enumerate() {
            if !(hi.is_finite() && hi > 0.0) {
                return Err(Error::InvalidSmoothingLength { index: i, value: hi });
            }
        }
        for col in &coords {
            if let Some(i) = col.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidCoordinates { index: i });
            }
        }
        let mut seen = vec![false; n];
        for &id in &ids {
            match seen.get_mut(id as usize) {
                Some(slot) if !*slot => *slot = true,
                _ => {
                    return Err(Error::MalformedParticleSet(
                        "ids are not a permutation of 0..n".into(),
                    ))
                }
            }
        }
        Ok(Self { coords, h, ids })
    }

    /// Builds a set from row-major points with ids `0..n`.
    pub fn from_points<const D: usize>(points: &[[f64; D]], h: Vec<f64>) -> Result<Self> {
        let coords = (0..D)
            .map(|l| points.iter().map(|p| p[l]).collect())
            .collect();
        let ids = (0..points.len() as u32).collect();
        Self::new(coords, h, ids)
    }

    /// Same as [`ParticleSet::from_points`] with one smoothing length for all.
    pub fn from_points_uniform_h<const D: usize>(points: &[[f64; D]], h: f64) -> Result<Self> {
        Self::from_points(points, vec![h; points.len()])
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate column for dimension `l`.
    pub fn coord(&self, l: usize) -> &[f64] {
        &self.coords[l]
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    /// Position of particle `i`; entries past `dim()` are zero.
    pub fn position(&self, i: usize) -> [f64; MAX_DIM] {
        let mut p = [0.0; MAX_DIM];
        for (l, col) in self.coords.iter().enumerate() {
            p[l] = col[i];
        }
        p
    }

    /// Returns a copy with new smoothing lengths.
    pub fn with_smoothing_lengths(&self, h: Vec<f64>) -> Result<Self> {
        Self::new(self.coords.clone(), h, self.ids.clone())
    }

    /// Returns the particles in the order given by `order`, where
    /// `order[new] = old`. Ids travel with their particle.
    pub fn permuted(&self, order: &[u32]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::MalformedParticleSet(format!(
                "permutation has length {} for {} particles",
                order.len(),
                self.len()
            )));
        }
        let gather = |src: &[f64]| order.iter().map(|&i| src[i as usize]).collect::<Vec<_>>();
        let coords = self.coords.iter().map(|c| gather(c)).collect();
        let h = gather(&self.h);
        let ids = order.iter().map(|&i| self.ids[i as usize]).collect();
        Self::new(coords, h, ids)
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// Axis-aligned box with `max[l] > min[l]` in every used dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    dim: usize,
    min: [f64; MAX_DIM],
    max: [f64; MAX_DIM],
}

impl BoundingBox {
    pub fn new(min: &[f64], max: &[f64]) -> Result<Self> {
        check_dim(min.len())?;
        if min.len() != max.len() {
            return Err(Error::InvalidBox("min and max differ in dimension".into()));
        }
        let mut b = Self {
            dim: min.len(),
            min: [0.0; MAX_DIM],
            max: [0.0; MAX_DIM],
        };
        for l in 0..min.len() {
            if !(min[l].is_finite() && max[l].is_finite() && max[l] > min[l]) {
                return Err(Error::InvalidBox(format!(
                    "dimension {l}: [{}, {}]",
                    min[l], max[l]
                )));
            }
            b.min[l] = min[l];
            b.max[l] = max[l];
        }
        Ok(b)
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(&vec![lo; dim], &vec![hi; dim])
    }

    pub(crate) fn from_arrays_unchecked(
        dim: usize,
        min: [f64; MAX_DIM],
        max: [f64; MAX_DIM],
    ) -> Self {
        Self { dim, min, max }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn min(&self) -> &[f64] {
        &self.min[..self.dim]
    }

    pub fn max(&self) -> &[f64] {
        &self.max[..self.dim]
    }

    pub fn side(&self, l: usize) -> f64 {
        self.max[l] - self.min[l]
    }

    pub fn center(&self) -> [f64; MAX_DIM] {
        let mut c = [0.0; MAX_DIM];
        for l in 0..self.dim {
            c[l] = 0.5 * (self.min[l] + self.max[l]);
        }
        c
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|l| self.side(l)).product()
    }

    /// Closed containment test.
    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|l| x[l] >= self.min[l] && x[l] <= self.max[l])
    }

    /// Containment with every face pushed outward by a few ulps of the
    /// box's magnitude. Child boxes are computed in floating point, so a
    /// particle assigned to a sub-cell can sit a rounding error outside it.
    pub fn contains_loose(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|l| {
            let tol = boundary_tolerance(self.min[l], self.max[l]);
            x[l] >= self.min[l] - tol && x[l] <= self.max[l] + tol
        })
    }

    /// Box of sub-cell `cell` when this box is cut into `b` slices per dimension.
    pub fn sub_box(&self, cell: &CellCoords, b: u32) -> Self {
        let mut min = [0.0; MAX_DIM];
        let mut max = [0.0; MAX_DIM];
        let bf = f64::from(b);
        for l in 0..self.dim {
            let c = cell.get(l);
            let w = self.side(l);
            min[l] = if c == 0 {
                self.min[l]
            } else {
                self.min[l] + w * (f64::from(c) / bf)
            };
            max[l] = if c + 1 == b {
                self.max[l]
            } else {
                self.min[l] + w * (f64::from(c + 1) / bf)
            };
        }
        Self::from_arrays_unchecked(self.dim, min, max)
    }

    /// True when every side is still wide enough to be cut in two.
    pub(crate) fn is_splittable(&self) -> bool {
        (0..self.dim).all(|l| {
            let mid = self.min[l] + 0.5 * self.side(l);
            mid > self.min[l] && mid < self.max[l]
        })
    }
}

pub(crate) fn boundary_tolerance(min: f64, max: f64) -> f64 {
    8.0 * f64::EPSILON * min.abs().max(max.abs()).max(max - min)
}

/// Integer sub-cell coordinates inside a node cut into `b` slices per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellCoords {
    dim: usize,
    c: [u32; MAX_DIM],
}

impl CellCoords {
    pub fn new(c: &[u32]) -> Result<Self> {
        check_dim(c.len())?;
        let mut out = [0; MAX_DIM];
        out[..c.len()].copy_from_slice(c);
        Ok(Self { dim: c.len(), c: out })
    }

    pub(crate) fn from_array(dim: usize, c: [u32; MAX_DIM]) -> Self {
        Self { dim, c }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, l: usize) -> u32 {
        self.c[l]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.c[..self.dim]
    }
}

/// Bounding box of all particles, expanded so that every particle lies
/// strictly inside, including those on the maximum face.
///
/// Each side grows by `1e-9` of its length on both ends, with a floor of
/// `1e-12` (and of a few ulps for far-from-origin coordinates) so
/// degenerate extents still produce a valid box.
pub fn compute_root_box(particles: &ParticleSet) -> Result<BoundingBox> {
    if particles.is_empty() {
        return Err(Error::EmptyParticleSet);
    }
    let dim = particles.dim();
    let mut min = [0.0; MAX_DIM];
    let mut max = [0.0; MAX_DIM];
    for l in 0..dim {
        let col = particles.coord(l);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (i, &x) in col.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidCoordinates { index: i });
            }
            lo = lo.min(x);
            hi = hi.max(x);
        }
        let side = hi - lo;
        let ulps = 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
        let pad = (1e-9 * side).max(1e-12).max(ulps);
        min[l] = lo - pad;
        max[l] = hi + pad;
    }
    Ok(BoundingBox::from_arrays_unchecked(dim, min, max))
}
