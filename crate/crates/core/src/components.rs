//! Connected components of the occupied-site subgraph.
//!
//! The census never walks edges. Every axis-parallel line is a clique, so
//! joining consecutive occupied vertices along each line yields the same
//! partition as the full adjacency, in `O(d · occupied · α)` after the scan.
//!
//! The two cluster-discovery procedures reveal one component at a time while
//! tracking removed/active/unseen sets; they exist as oracles and as a way to
//! compare exploration against the branching-process bound.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dsu::DisjointSets;
use crate::error::{Error, Result};
use crate::sampler::SiteConfig;
use crate::torus::{TorusSpec, VertexId};

const NO_VERTEX: usize = usize::MAX;

/// Census of the components of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    /// Component sizes, descending.
    pub component_sizes: Vec<u64>,
    pub largest: u64,
    /// Zero when there are fewer than two components.
    pub second_largest: u64,
    pub isolated_count: u64,
    pub component_count: u64,
    pub occupied_count: u64,
    /// True when there is at most one component (vacuously for no occupied sites).
    pub is_connected: bool,
}

/// The scalar part of a census, for JSON export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusSummary {
    pub largest: u64,
    pub second_largest: u64,
    pub isolated_count: u64,
    pub component_count: u64,
    pub occupied_count: u64,
    pub is_connected: bool,
}

impl ComponentStats {
    pub fn from_sizes(mut sizes: Vec<u64>) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let occupied_count = sizes.iter().sum();
        let component_count = sizes.len() as u64;
        ComponentStats {
            largest: sizes.first().copied().unwrap_or(0),
            second_largest: sizes.get(1).copied().unwrap_or(0),
            isolated_count: sizes.iter().filter(|&&s| s == 1).count() as u64,
            component_count,
            occupied_count,
            is_connected: component_count <= 1,
            component_sizes: sizes,
        }
    }

    pub fn summary(&self) -> CensusSummary {
        CensusSummary {
            largest: self.largest,
            second_largest: self.second_largest,
            isolated_count: self.isolated_count,
            component_count: self.component_count,
            occupied_count: self.occupied_count,
            is_connected: self.is_connected,
        }
    }

    /// `(size, count)` pairs, ascending by size.
    pub fn histogram(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = Vec::new();
        for &s in self.component_sizes.iter().rev() {
            match out.last_mut() {
                Some((size, count)) if *size == s => *count += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }

    /// Writes the histogram as CSV with header `size,count`.
    pub fn write_histogram_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "size,count")?;
        for (size, count) in self.histogram() {
            writeln!(out, "{size},{count}")?;
        }
        Ok(())
    }

    /// True when every component is a singleton or the largest one.
    pub fn isolated_or_giant(&self) -> bool {
        self.component_sizes.iter().skip(1).all(|&s| s == 1)
    }
}

/// Maps occupied vertices to dense ids `0..occupied_count` (ascending index order).
#[derive(Debug, Clone)]
enum DenseIndex {
    /// Sparse configurations: binary search in the sorted occupied list.
    Sorted,
    /// Dense configurations: a direct table over all of `V`.
    Table(Vec<usize>),
}

/// Component labelling of a configuration.
#[derive(Debug, Clone)]
pub struct Clustering {
    spec: TorusSpec,
    occupied: Vec<VertexId>,
    index: DenseIndex,
    sets: DisjointSets,
}

impl Clustering {
    /// Labels all components with line sweeps.
    pub fn new(config: &SiteConfig) -> Self {
        let spec = config.spec().clone();
        let occupied: Vec<VertexId> = config.occupied().collect();
        let mut sets = DisjointSets::new(occupied.len());

        for k in 0..spec.d() {
            let stride = spec.strides()[k];
            let block = stride * spec.sides()[k];
            let mut last_on_line = vec![NO_VERTEX; spec.volume() / spec.sides()[k]];
            // Ascending index order is ascending coordinate along every line,
            // so the previous hit on a line is its previous occupied vertex.
            for (id, v) in occupied.iter().enumerate() {
                let line = (v.0 / block) * stride + v.0 % stride;
                let prev = last_on_line[line];
                if prev != NO_VERTEX {
                    sets.union(prev, id);
                }
                last_on_line[line] = id;
            }
        }

        let index = if occupied.len() < spec.volume() / 8 {
            DenseIndex::Sorted
        } else {
            let mut table = vec![NO_VERTEX; spec.volume()];
            for (id, v) in occupied.iter().enumerate() {
                table[v.0] = id;
            }
            DenseIndex::Table(table)
        };

        Clustering {
            spec,
            occupied,
            index,
            sets,
        }
    }

    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    fn dense_id(&self, v: VertexId) -> Option<usize> {
        match &self.index {
            DenseIndex::Sorted => self.occupied.binary_search(&v).ok(),
            DenseIndex::Table(t) => t.get(v.0).copied().filter(|&id| id != NO_VERTEX),
        }
    }

    /// Representative label of `v`'s component, `None` if unoccupied.
    pub fn label(&self, v: VertexId) -> Option<usize> {
        self.dense_id(v).map(|id| self.sets.find_const(id))
    }

    /// Vertices of the component containing `v`, ascending; empty if `v` is unoccupied.
    pub fn component_of(&self, v: VertexId) -> Vec<VertexId> {
        let Some(root) = self.label(v) else {
            return Vec::new();
        };
        self.occupied
            .iter()
            .enumerate()
            .filter(|&(id, _)| self.sets.find_const(id) == root)
            .map(|(_, &w)| w)
            .collect()
    }

    /// Size of the component containing `v` (0 if unoccupied).
    pub fn component_size(&mut self, v: VertexId) -> usize {
        match self.dense_id(v) {
            Some(id) => self.sets.set_size(id),
            None => 0,
        }
    }

    pub fn stats(&self) -> ComponentStats {
        ComponentStats::from_sizes(
            self.sets
                .set_sizes()
                .into_iter()
                .map(|s| s as u64)
                .collect(),
        )
    }
}

/// Exact component census of the occupied-site subgraph.
pub fn connected_components(config: &SiteConfig) -> ComponentStats {
    Clustering::new(config).stats()
}

/// Snapshot of a discovery run after `step` retirements.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryTrace {
    pub removed: Vec<VertexId>,
    pub active: Vec<VertexId>,
    pub unseen: Vec<VertexId>,
    pub step: usize,
}

/// The cluster-discovering process started from one vertex.
///
/// Each step retires the lexicographically smallest active vertex, activates
/// its occupied unseen neighbors and drops its whole neighborhood from the
/// unseen set. In the modified variant, unseen vertices adjacent to two
/// distinct active vertices are also dropped at that point.
#[derive(Debug, Clone)]
pub struct Discovery<'a> {
    config: &'a SiteConfig,
    modified: bool,
    removed: Vec<VertexId>,
    active: BTreeSet<VertexId>,
    unseen: Vec<u64>,
    /// Modified rule only: number of active neighbors of each vertex.
    active_hits: Vec<u32>,
    step: usize,
    extra_removed: usize,
}

impl<'a> Discovery<'a> {
    pub fn new(config: &'a SiteConfig, start: VertexId, modified: bool) -> Result<Self> {
        let volume = config.spec().volume();
        if start.0 >= volume {
            return Err(Error::CoordinateOutOfRange(format!(
                "vertex index {} >= {volume}",
                start.0
            )));
        }
        let mut unseen = vec![u64::MAX; volume.div_ceil(64)];
        if !volume.is_multiple_of(64) {
            *unseen.last_mut().unwrap() = (1u64 << (volume % 64)) - 1;
        }
        let mut discovery = Discovery {
            config,
            modified,
            removed: Vec::new(),
            active: BTreeSet::new(),
            unseen,
            active_hits: if modified {
                vec![0; volume]
            } else {
                Vec::new()
            },
            step: 0,
            extra_removed: 0,
        };
        if config.is_occupied(start) {
            discovery.forget(start);
            discovery.activate(start, &mut Vec::new());
        }
        Ok(discovery)
    }

    /// Adds `v` to the active set; under the modified rule, records vertices
    /// that just gained a second active neighbor.
    fn activate(&mut self, v: VertexId, shared: &mut Vec<VertexId>) {
        self.active.insert(v);
        if self.modified {
            for w in self.config.spec().neighbors(v) {
                self.active_hits[w.0] += 1;
                if self.active_hits[w.0] == 2 {
                    shared.push(w);
                }
            }
        }
    }

    #[inline]
    fn is_unseen(&self, v: VertexId) -> bool {
        (self.unseen[v.0 / 64] >> (v.0 % 64)) & 1 == 1
    }

    #[inline]
    fn forget(&mut self, v: VertexId) {
        self.unseen[v.0 / 64] &= !(1 << (v.0 % 64));
    }

    pub fn is_finished(&self) -> bool {
        self.active.is_empty()
    }

    /// Number of unseen vertices dropped by the modified rule so far.
    pub fn extra_removed(&self) -> usize {
        self.extra_removed
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    /// Retires one active vertex; returns it, or `None` once the process has ended.
    pub fn step(&mut self) -> Option<VertexId> {
        let current = self.active.pop_first()?;
        let spec = self.config.spec();
        let neighbors: Vec<VertexId> = spec.neighbors(current).collect();
        if self.modified {
            for w in &neighbors {
                self.active_hits[w.0] -= 1;
            }
        }
        let mut shared = Vec::new();
        for w in neighbors {
            if self.is_unseen(w) {
                self.forget(w);
                if self.config.is_occupied(w) {
                    self.activate(w, &mut shared);
                }
            }
        }
        // every unseen vertex with two active neighbors reached that count
        // during this step, since earlier ones were dropped when they did
        for w in shared {
            if self.is_unseen(w) && self.active_hits[w.0] >= 2 {
                self.forget(w);
                self.extra_removed += 1;
            }
        }
        self.removed.push(current);
        self.step += 1;
        Some(current)
    }

    /// Runs to completion and returns the discovered set, ascending.
    pub fn run(mut self) -> Vec<VertexId> {
        while self.step().is_some() {}
        self.removed.sort_unstable();
        self.removed
    }

    pub fn trace(&self) -> DiscoveryTrace {
        let volume = self.config.spec().volume();
        DiscoveryTrace {
            removed: self.removed.clone(),
            active: self.active.iter().copied().collect(),
            unseen: (0..volume)
                .map(VertexId)
                .filter(|&v| self.is_unseen(v))
                .collect(),
            step: self.step,
        }
    }
}

/// The component of `v` revealed by cluster discovery (empty if `v` is unoccupied).
pub fn cluster_discovery(config: &SiteConfig, v: VertexId) -> Result<Vec<VertexId>> {
    Ok(Discovery::new(config, v, false)?.run())
}

/// Discovery with the extra step-4 removals; always a subset of the component of `v`.
pub fn modified_cluster_discovery(config: &SiteConfig, v: VertexId) -> Result<Vec<VertexId>> {
    Ok(Discovery::new(config, v, true)?.run())
}

/// Maximum number of occupied vertices in any axis-aligned plane obtained by
/// fixing `k` of the `d` coordinates.
pub fn plane_occupancy_max(config: &SiteConfig, k: usize) -> Result<u64> {
    let spec = config.spec();
    let d = spec.d();
    if k == 0 || k >= d {
        return Err(Error::InvalidParameter(format!(
            "plane codimension k = {k} must lie in 1..={}",
            d.saturating_sub(1)
        )));
    }
    let occupied: Vec<VertexId> = config.occupied().collect();
    let mut best = 0u64;
    for axes in combinations(d, k) {
        let cells: usize = axes.iter().map(|&i| spec.sides()[i]).product();
        let mut counts = vec![0u64; cells];
        for &v in &occupied {
            let key = axes
                .iter()
                .fold(0, |acc, &i| acc * spec.sides()[i] + spec.coord(v, i) - 1);
            counts[key] += 1;
        }
        best = best.max(counts.into_iter().max().unwrap_or(0));
    }
    Ok(best)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}
