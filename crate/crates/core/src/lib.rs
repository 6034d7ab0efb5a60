//! Exact fixed-radius neighbor search for particle simulations with an
//! adaptive branching-factor tree.
//!
//! Each node of the tree cuts its box into `b^k` equal sub-cells, with `b`
//! chosen from the node's particle count and reduced when the particles turn
//! out too unevenly spread. Uniform inputs give a tree one level deep; highly
//! clustered inputs fall back to an octree. A plain octree policy, a
//! brute-force oracle, synthetic data sets and a parallel query driver are
//! included for benchmarking and validation.
//!
//! ```
//! use sphtree::{
//!     build_tree, compute_root_box, find_neighbors_all, GenSpec, SearchConfig, TreeParams,
//! };
//!
//! let particles = GenSpec::uniform(2_000, 30, 7).generate().unwrap();
//! let bbox = compute_root_box(&particles).unwrap();
//! let (tree, stats) = build_tree(&particles, &bbox, &TreeParams::default()).unwrap();
//! assert!(stats.max_depth <= 3);
//!
//! let lists = find_neighbors_all(&tree, &particles, &SearchConfig::default()).unwrap();
//! assert_eq!(lists.mean_count(), 30.0);
//! ```

pub mod datagen;
pub mod error;
pub mod model;
pub mod neighbors;
pub mod oracle;
pub mod schedule;
pub mod search;
pub mod snapshot;
pub mod tree;

pub use datagen::{
    assign_smoothing_lengths, gen_center_clustered, gen_lattice, gen_uniform_random, GenKind,
    GenSpec,
};
pub use error::{Error, Result};
pub use model::{compute_root_box, BoundingBox, CellCoords, ParticleSet};
pub use neighbors::{NeighborList, NeighborLists};
pub use oracle::brute_force_neighbors;
pub use schedule::Schedule;
pub use search::{
    find_neighbors_all, find_neighbors_blocked, find_neighbors_one, reorder_particles,
    visit_range, Permutation, SearchConfig, SearchStats, VisitRange,
};
pub use snapshot::{load_snapshot, save_snapshot};
pub use tree::{
    build_tree, compute_branching_factor, distribute_once, distribution_ratio, subcell_coords,
    subcell_index, tree_stats, BuildDiagnostics, BuildPolicy, Tree, TreeNode, TreeParams,
};
