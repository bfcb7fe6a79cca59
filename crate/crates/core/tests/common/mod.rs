//! Brute-force census over explicit adjacency, independent of the library's
//! indexing and line sweep.

#![allow(dead_code)]

use std::collections::VecDeque;

use htpc_core::{SiteConfig, VertexId};

/// Mixed-radix decode with the last coordinate fastest, 0-based.
pub fn decode(sides: &[usize], mut v: usize) -> Vec<usize> {
    let mut c = vec![0; sides.len()];
    for i in (0..sides.len()).rev() {
        c[i] = v % sides[i];
        v /= sides[i];
    }
    c
}

/// Adjacency lists of the occupied subgraph, built by comparing all pairs.
pub fn adjacency(config: &SiteConfig) -> Vec<Vec<usize>> {
    let sides = config.spec().sides().to_vec();
    let volume: usize = sides.iter().product();
    let coords: Vec<Vec<usize>> = (0..volume).map(|v| decode(&sides, v)).collect();
    let occ: Vec<bool> = (0..volume)
        .map(|v| config.is_occupied(VertexId(v)))
        .collect();
    let mut adj = vec![Vec::new(); volume];
    for u in 0..volume {
        if !occ[u] {
            continue;
        }
        for w in 0..volume {
            if w == u || !occ[w] {
                continue;
            }
            let diff = coords[u]
                .iter()
                .zip(&coords[w])
                .filter(|(x, y)| x != y)
                .count();
            if diff == 1 {
                adj[u].push(w);
            }
        }
    }
    adj
}

/// Component label of every occupied vertex (`usize::MAX` if unoccupied) and
/// the component sizes sorted descending.
pub fn bfs_census(config: &SiteConfig) -> (Vec<usize>, Vec<u64>) {
    let adj = adjacency(config);
    let volume = adj.len();
    let mut label = vec![usize::MAX; volume];
    let mut sizes = Vec::new();
    for s in 0..volume {
        if !config.is_occupied(VertexId(s)) || label[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0u64;
        let mut queue = VecDeque::from([s]);
        label[s] = id;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &w in &adj[u] {
                if label[w] == usize::MAX {
                    label[w] = id;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|x, y| y.cmp(x));
    (label, sizes)
}

/// Members of the BFS component containing `v`, ascending.
pub fn component_members(labels: &[usize], v: usize) -> Vec<usize> {
    (0..labels.len())
        .filter(|&w| labels[w] == labels[v])
        .collect()
}
