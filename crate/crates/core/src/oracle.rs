//! Brute-force neighbor lists: every pair checked directly, no spatial
//! structure. Ground truth for the tree search; never a benchmark contender.

use crate::model::ParticleSet;
use crate::neighbors::NeighborLists;

/// For every particle `p`, all `q != p` with `|x_q - x_p| <= 2 h_p`.
pub fn brute_force_neighbors(particles: &ParticleSet) -> NeighborLists {
    brute_force_neighbors_with(particles, false)
}

pub fn brute_force_neighbors_with(particles: &ParticleSet, include_self: bool) -> NeighborLists {
    let mut out = NeighborLists::with_capacity(particles.len(), 0);
    for p in 0..particles.len() {
        let list = brute_force_one(particles, p, include_self);
        out.push(particles.ids()[p], &list);
    }
    out
}

/// Neighbor ids of particle `p`, ascending by particle index.
pub fn brute_force_one(particles: &ParticleSet, p: usize, include_self: bool) -> Vec<u32> {
    let k = particles.dim();
    let radius = 2.0 * particles.h()[p];
    let r2 = radius * radius;
    let mut out = Vec::new();
    for q in 0..particles.len() {
        if q == p && !include_self {
            continue;
        }
        let mut d2 = 0.0;
        for l in 0..k {
            let col = particles.coord(l);
            let d = col[q] - col[p];
            d2 += d * d;
        }
        if d2 <= r2 {
            out.push(particles.ids()[q]);
        }
    }
    out
}
