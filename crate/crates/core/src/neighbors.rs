//! Neighbor-list containers shared by the tree search and the oracle.

use std::io::{BufWriter, Write};

use crate::error::Result;

/// Neighbors of one query particle, by particle id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborList {
    pub query: u32,
    pub neighbors: Vec<u32>,
}

impl NeighborList {
    /// Sorts neighbors into the canonical ascending-id order.
    pub fn canonicalize(&mut self) {
        self.neighbors.sort_unstable();
    }
}

/// Neighbor lists of many queries stored back to back.
///
/// Entry `i` belongs to query particle `query_ids[i]`. Lists come out of the
/// search in traversal order; call [`NeighborLists::canonicalize`] before
/// comparing or serializing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NeighborLists {
    query_ids: Vec<u32>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl NeighborLists {
    pub fn new() -> Self {
        Self {
            query_ids: Vec::new(),
            offsets: vec![0],
            neighbors: Vec::new(),
        }
    }

    pub fn with_capacity(queries: usize, neighbors: usize) -> Self {
        let mut offsets = Vec::with_capacity(queries + 1);
        offsets.push(0);
        Self {
            query_ids: Vec::with_capacity(queries),
            offsets,
            neighbors: Vec::with_capacity(neighbors),
        }
    }

    pub fn push(&mut self, query: u32, neighbors: &[u32]) {
        self.query_ids.push(query);
        self.neighbors.extend_from_slice(neighbors);
        self.offsets.push(self.neighbors.len());
    }

    pub(crate) fn from_parts(query_ids: Vec<u32>, offsets: Vec<usize>, neighbors: Vec<u32>) -> Self {
        debug_assert_eq!(offsets.len(), query_ids.len() + 1);
        debug_assert_eq!(offsets.last(), Some(&neighbors.len()));
        Self { query_ids, offsets, neighbors }
    }

    /// Appends a list whose neighbors were already pushed with [`Self::push_neighbor`].
    pub(crate) fn close_list(&mut self, query: u32) {
        self.query_ids.push(query);
        self.offsets.push(self.neighbors.len());
    }

    /// Neighbor buffer of the list being filled, for bulk writes.
    #[inline]
    pub(crate) fn open_buffer(&mut self) -> &mut Vec<u32> {
        &mut self.neighbors
    }

    #[inline]
    pub(crate) fn push_neighbor(&mut self, id: u32) {
        self.neighbors.push(id);
    }

    /// Appends every list of `other`.
    pub fn append(&mut self, other: &NeighborLists) {
        let base = self.neighbors.len();
        self.query_ids.extend_from_slice(&other.query_ids);
        self.neighbors.extend_from_slice(&other.neighbors);
        self.offsets
            .extend(other.offsets[1..].iter().map(|&o| o + base));
    }

    pub fn len(&self) -> usize {
        self.query_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.query_ids.is_empty()
    }

    pub fn query_id(&self, i: usize) -> u32 {
        self.query_ids[i]
    }

    pub fn query_ids(&self) -> &[u32] {
        &self.query_ids
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn list(&self, i: usize) -> NeighborList {
        NeighborList {
            query: self.query_ids[i],
            neighbors: self.get(i).to_vec(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &[u32])> {
        (0..self.len()).map(move |i| (self.query_ids[i], self.get(i)))
    }

    /// Total number of neighbor entries over all queries.
    pub fn total(&self) -> usize {
        self.neighbors.len()
    }

    pub fn mean_count(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.total() as f64 / self.len() as f64
        }
    }

    /// Sorts every list by ascending id.
    pub fn canonicalize(&mut self) {
        for w in self.offsets.windows(2) {
            self.neighbors[w[0]..w[1]].sort_unstable();
        }
    }

    /// Lists reordered by ascending query id, each list canonical.
    pub fn by_query_id(&self) -> NeighborLists {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by_key(|&i| self.query_ids[i]);
        let mut out = NeighborLists::with_capacity(self.len(), self.total());
        for i in idx {
            out.push(self.query_ids[i], self.get(i));
        }
        out.canonicalize();
        out
    }

    /// Writes one line per query, `id count q1 ... qcount`, queries and
    /// neighbors in ascending id order.
    pub fn write_dump<W: Write>(&self, out: W) -> Result<()> {
        let sorted = self.by_query_id();
        let mut w = BufWriter::new(out);
        for (id, list) in sorted.iter() {
            write!(w, "{id} {}", list.len())?;
            for q in list {
                write!(w, " {q}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }
}
