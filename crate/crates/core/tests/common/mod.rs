#![allow(dead_code)]

//! Graph enumeration and small utilities shared by the integration tests.
//! Graphs on `n <= 8` nodes are edge bitmasks over the pairs `(i, j)`,
//! `i < j`, in row order.

use std::collections::BTreeSet;

use covnet::LabeledGraph;
use rand::Rng;

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

pub fn adjacency(n: usize, mask: u64) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for (bit, (i, j)) in pairs(n).into_iter().enumerate() {
        if mask >> bit & 1 == 1 {
            a[i][j] = true;
            a[j][i] = true;
        }
    }
    a
}

pub fn connected(a: &[Vec<bool>]) -> bool {
    let n = a.len();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            if a[v][w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

pub fn label(i: usize) -> String {
    format!("v{i}")
}

/// Labels `v0..`; single-digit indices keep label order equal to index order.
pub fn to_graph(a: &[Vec<bool>]) -> LabeledGraph {
    let n = a.len();
    assert!(n <= 10);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if a[i][j] {
                edges.push((label(i), label(j)));
            }
        }
    }
    LabeledGraph::from_parts((0..n).map(label), edges).unwrap()
}

/// Every labeled connected graph on `n` nodes.
pub fn connected_labeled(n: usize) -> Vec<Vec<Vec<bool>>> {
    let m = n * (n.saturating_sub(1)) / 2;
    (0..1u64 << m)
        .map(|mask| adjacency(n, mask))
        .filter(|a| connected(a))
        .collect()
}

pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Canonical code: minimum edge mask over all relabelings that list nodes
/// by nondecreasing degree. Equal codes iff isomorphic.
fn canonical(a: &[Vec<bool>]) -> u64 {
    let n = a.len();
    let deg: Vec<usize> = a.iter().map(|r| r.iter().filter(|&&x| x).count()).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| deg[v]);
    for v in order {
        match classes.last_mut() {
            Some(c) if deg[c[0]] == deg[v] => c.push(v),
            _ => classes.push(vec![v]),
        }
    }
    let class_perms: Vec<Vec<Vec<usize>>> = classes.iter().map(|c| permutations(c)).collect();
    let pair_list = pairs(n);
    let mut best = u64::MAX;
    let mut idx = vec![0; classes.len()];
    loop {
        // new position -> old node
        let order: Vec<usize> = class_perms
            .iter()
            .zip(&idx)
            .flat_map(|(ps, &k)| ps[k].iter().copied())
            .collect();
        let mut code = 0u64;
        for (bit, &(i, j)) in pair_list.iter().enumerate() {
            if a[order[i]][order[j]] {
                code |= 1 << bit;
            }
        }
        best = best.min(code);
        let mut c = 0;
        loop {
            if c == idx.len() {
                return best;
            }
            idx[c] += 1;
            if idx[c] < class_perms[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// One representative per isomorphism class of connected graphs on `n`
/// nodes, grown vertex by vertex from the classes on `n - 1` nodes (every
/// graph on `n` nodes is a graph on `n - 1` nodes plus one vertex).
pub fn connected_classes(n: usize) -> Vec<Vec<Vec<bool>>> {
    let mut all: Vec<Vec<Vec<bool>>> = vec![vec![]];
    for size in 1..=n {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for g in &all {
            for nbrs in 0..1u32 << (size - 1) {
                let mut a = vec![vec![false; size]; size];
                for i in 0..size - 1 {
                    for j in 0..size - 1 {
                        a[i][j] = g[i][j];
                    }
                    if nbrs >> i & 1 == 1 {
                        a[i][size - 1] = true;
                        a[size - 1][i] = true;
                    }
                }
                if seen.insert(canonical(&a)) {
                    next.push(a);
                }
            }
        }
        all = next;
    }
    all.into_iter().filter(|a| connected(a)).collect()
}

/// G(n, p) with labels `v0..`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                a[i][j] = true;
                a[j][i] = true;
            }
        }
    }
    a
}

pub fn padded(i: usize) -> String {
    format!("n{i:03}")
}

/// Labels padded so that lexicographic order matches index order for any n.
pub fn to_graph_padded(a: &[Vec<bool>]) -> LabeledGraph {
    let n = a.len();
    let name = padded;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if a[i][j] {
                edges.push((name(i), name(j)));
            }
        }
    }
    LabeledGraph::from_parts((0..n).map(name), edges).unwrap()
}

pub mod oracles;
