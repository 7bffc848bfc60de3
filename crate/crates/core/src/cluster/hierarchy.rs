//! Density hierarchy over weighted distinct points.
//!
//! Distances between 0/1 vectors are square roots of Hamming counts, so every
//! core distance and mutual-reachability distance is `sqrt(level)` for an
//! integer level in `0..=20`. The single-linkage hierarchy is built one level
//! at a time: every merge at a level is applied together. The components at a
//! threshold are unique whichever spanning tree is found, so the condensed
//! tree and the final partition do not depend on tie-breaking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{FeatureVector, CATEGORY_COUNT};

pub const MAX_LEVEL: u32 = CATEGORY_COUNT as u32;

/// Lambda assigned to level 0: identical vectors are treated as being at a
/// distance of 0.5, half the smallest nonzero distance.
pub const ZERO_LEVEL_LAMBDA: f64 = 2.0;

/// `1 / distance` for a Hamming level.
pub fn level_lambda(level: u32) -> f64 {
    if level == 0 {
        ZERO_LEVEL_LAMBDA
    } else {
        1.0 / f64::from(level).sqrt()
    }
}

/// Core level of each weighted point: the smallest level at which the
/// cumulative weight within that level (the point's own copies included)
/// reaches `min_samples`.
pub fn core_levels(vectors: &[FeatureVector], weights: &[u64], min_samples: u64) -> Vec<u32> {
    vectors
        .par_iter()
        .map(|&v| core_level_of(v, 0, vectors, weights, min_samples))
        .collect()
}

/// Core level of `v` against weighted points, with `self_weight` extra copies
/// of `v` counted at level 0. Returns `MAX_LEVEL` if the total weight is short.
pub fn core_level_of(
    v: FeatureVector,
    self_weight: u64,
    vectors: &[FeatureVector],
    weights: &[u64],
    min_samples: u64,
) -> u32 {
    let mut hist = [0u64; CATEGORY_COUNT + 1];
    hist[0] = self_weight;
    for (u, &w) in vectors.iter().zip(weights) {
        hist[v.hamming(*u) as usize] += w;
    }
    let mut cum = 0;
    for (level, h) in hist.iter().enumerate() {
        cum += h;
        if cum >= min_samples {
            return level as u32;
        }
    }
    MAX_LEVEL
}

pub fn mutual_reachability(a: FeatureVector, b: FeatureVector, core_a: u32, core_b: u32) -> u32 {
    a.hamming(b).max(core_a).max(core_b)
}

/// Minimum spanning tree under mutual reachability (dense Prim). Edges are
/// `(level, a, b)` with `a < b`; the next vertex is the one with the lowest
/// (level, index).
pub fn spanning_tree(vectors: &[FeatureVector], cores: &[u32]) -> Vec<(u32, usize, usize)> {
    let n = vectors.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![(u32::MAX, usize::MAX); n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let (cv, cc) = (vectors[current], cores[current]);
        let next = best
            .par_iter_mut()
            .enumerate()
            .filter_map(|(j, slot)| {
                if in_tree[j] {
                    return None;
                }
                let d = mutual_reachability(cv, vectors[j], cc, cores[j]);
                if d < slot.0 {
                    *slot = (d, current);
                }
                Some((slot.0, j))
            })
            .min()
            .expect("vertices remain outside the tree");
        let (level, j) = next;
        let from = best[j].1;
        edges.push((level, from.min(j), from.max(j)));
        in_tree[j] = true;
        current = j;
    }
    edges
}

/// A component of the level-batched single-linkage hierarchy, formed at
/// `level`. `loose` lists points whose copies first join each other at this
/// level; `children` are components formed at lower levels.
#[derive(Debug, Clone)]
struct MergeNode {
    level: u32,
    children: Vec<usize>,
    loose: Vec<usize>,
    size: u64,
    first: usize,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the lower index as root
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

fn merge_tree(
    weights: &[u64],
    cores: &[u32],
    edges: &[(u32, usize, usize)],
) -> (Vec<MergeNode>, usize) {
    let n = weights.len();
    let mut uf = UnionFind::new(n);
    let mut node_of_root: Vec<Option<usize>> = vec![None; n];
    let mut nodes: Vec<MergeNode> = Vec::new();
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); MAX_LEVEL as usize + 1];
    for (i, &c) in cores.iter().enumerate() {
        by_level[c as usize].push(i);
    }
    let mut edges_by_level: Vec<Vec<(usize, usize)>> = vec![Vec::new(); MAX_LEVEL as usize + 1];
    for &(l, a, b) in edges {
        edges_by_level[l as usize].push((a, b));
    }
    let mut last_root = 0;
    for level in 0..=MAX_LEVEL {
        let fresh = &by_level[level as usize];
        let level_edges = &edges_by_level[level as usize];
        if fresh.is_empty() && level_edges.is_empty() {
            continue;
        }
        // participants before merging: existing components and fresh points
        let mut old_roots: Vec<usize> = Vec::new();
        for &(a, b) in level_edges {
            for x in [a, b] {
                let r = uf.find(x);
                if node_of_root[r].is_some() {
                    old_roots.push(r);
                }
            }
        }
        old_roots.sort_unstable();
        old_roots.dedup();
        let old: Vec<(usize, usize)> = old_roots
            .iter()
            .map(|&r| (r, node_of_root[r].take().expect("component has a node")))
            .collect();
        for &(a, b) in level_edges {
            uf.union(a, b);
        }
        let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> =
            Default::default();
        for &(r, node) in &old {
            groups.entry(uf.find(r)).or_default().0.push(node);
        }
        for &i in fresh {
            groups.entry(uf.find(i)).or_default().1.push(i);
        }
        for (root, (mut children, loose)) in groups {
            children.sort_by_key(|&c| nodes[c].first);
            let size = children.iter().map(|&c| nodes[c].size).sum::<u64>()
                + loose.iter().map(|&i| weights[i]).sum::<u64>();
            let first = children
                .iter()
                .map(|&c| nodes[c].first)
                .chain(loose.iter().copied())
                .min()
                .expect("non-empty group");
            nodes.push(MergeNode {
                level,
                children,
                loose,
                size,
                first,
            });
            node_of_root[root] = Some(nodes.len() - 1);
            last_root = root;
        }
    }
    let root = node_of_root[uf.find(last_root)].expect("hierarchy has a root");
    (nodes, root)
}

/// One row of the condensed tree. Points are numbered `0..n_points` and
/// clusters `n_points..`, the root being `n_points`; `size` is
/// the child's weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensedRow {
    pub parent: usize,
    pub child: usize,
    pub lambda: f64,
    pub size: u64,
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub rows: Vec<CondensedRow>,
    /// Parent cluster of each condensed cluster (root: `None`).
    pub cluster_parent: Vec<Option<usize>>,
    pub cluster_birth: Vec<f64>,
    /// Condensed cluster each point falls out of, and the lambda at which it does.
    pub point_cluster: Vec<usize>,
    pub point_lambda: Vec<f64>,
}

fn collect_points(nodes: &[MergeNode], node: usize, out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        out.extend_from_slice(&nodes[n].loose);
        stack.extend(nodes[n].children.iter().copied());
    }
}

pub fn condense(
    weights: &[u64],
    cores: &[u32],
    edges: &[(u32, usize, usize)],
    min_cluster_size: u64,
) -> Hierarchy {
    let n = weights.len();
    let (nodes, root) = merge_tree(weights, cores, edges);
    let mut h = Hierarchy {
        rows: Vec::new(),
        cluster_parent: vec![None],
        cluster_birth: vec![0.0],
        point_cluster: vec![usize::MAX; n],
        point_lambda: vec![0.0; n],
    };
    let mut work = vec![(root, 0usize)];
    while let Some((start, cluster)) = work.pop() {
        let mut node = start;
        loop {
            let lambda = level_lambda(nodes[node].level);
            let (big, small): (Vec<usize>, Vec<usize>) = nodes[node]
                .children
                .iter()
                .partition(|&&c| nodes[c].size >= min_cluster_size);
            let mut falling = nodes[node].loose.clone();
            for &c in &small {
                collect_points(&nodes, c, &mut falling);
            }
            falling.sort_unstable();
            for p in falling {
                h.rows.push(CondensedRow {
                    parent: n + cluster,
                    child: p,
                    lambda,
                    size: weights[p],
                });
                h.point_cluster[p] = cluster;
                h.point_lambda[p] = lambda;
            }
            match big.len() {
                0 => break,
                1 => node = big[0],
                _ => {
                    let mut spawned = Vec::new();
                    for &c in &big {
                        let id = h.cluster_parent.len();
                        h.cluster_parent.push(Some(cluster));
                        h.cluster_birth.push(lambda);
                        h.rows.push(CondensedRow {
                            parent: n + cluster,
                            child: n + id,
                            lambda,
                            size: nodes[c].size,
                        });
                        spawned.push((c, id));
                    }
                    // reversed so the first child is condensed next
                    work.extend(spawned.into_iter().rev());
                    break;
                }
            }
        }
    }
    h
}

/// Excess-of-mass selection. The root is a candidate only when it has no
/// child clusters.
pub fn select_eom(h: &Hierarchy, n_points: usize) -> Vec<bool> {
    let k = h.cluster_parent.len();
    let mut stability = vec![0.0; k];
    let mut has_children = vec![false; k];
    for row in &h.rows {
        let c = row.parent - n_points;
        stability[c] += row.size as f64 * (row.lambda - h.cluster_birth[c]);
        if row.child >= n_points {
            has_children[c] = true;
        }
    }
    let mut selected = vec![false; k];
    let mut subtree = vec![0.0; k];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
    for c in 1..k {
        children[h.cluster_parent[c].expect("non-root has a parent")].push(c);
    }
    // clusters are numbered parents-first
    for c in (0..k).rev() {
        let child_sum: f64 = children[c].iter().map(|&x| subtree[x]).sum();
        if c == 0 && has_children[0] {
            continue;
        }
        if children[c].is_empty() || stability[c] >= child_sum {
            selected[c] = true;
            subtree[c] = stability[c];
            let mut stack = children[c].clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(children[d].iter().copied());
            }
        } else {
            subtree[c] = child_sum;
        }
    }
    selected
}
