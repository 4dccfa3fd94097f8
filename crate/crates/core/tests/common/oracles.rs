//! Slow, direct reference implementations.

use nalgebra::{DMatrix, SymmetricEigen};

/// All-pairs hop distances by Floyd-Warshall; `usize::MAX` when unreachable.
pub fn distances(a: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = a.len();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if a[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Walks every shortest s-t path explicitly, adding 1 to `through[v]` for
/// each interior node. Returns the number of paths.
fn walk(
    a: &[Vec<bool>],
    d: &[Vec<usize>],
    cur: usize,
    t: usize,
    path: &mut Vec<usize>,
    through: &mut [u64],
) -> u64 {
    if cur == t {
        for &v in &path[1..path.len() - 1] {
            through[v] += 1;
        }
        return 1;
    }
    let mut count = 0;
    for w in 0..a.len() {
        if a[cur][w] && d[w][t] + 1 == d[cur][t] {
            path.push(w);
            count += walk(a, d, w, t, path, through);
            path.pop();
        }
    }
    count
}

/// Normalized betweenness by enumerating every shortest path.
pub fn brute_betweenness(a: &[Vec<bool>]) -> Vec<f64> {
    let n = a.len();
    let d = distances(a);
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let mut through = vec![0u64; n];
            let total = walk(a, &d, s, t, &mut vec![s], &mut through);
            for v in 0..n {
                score[v] += through[v] as f64 / total as f64;
            }
        }
    }
    let norm = 2.0 / ((n - 1) * (n - 2)) as f64;
    score.iter().map(|x| x * norm).collect()
}

/// `L = D_B - B` with `B_ij = A_ij (w_i + w_j - 1)`.
pub fn cost_laplacian(a: &[Vec<bool>], w: &[f64]) -> DMatrix<f64> {
    let n = a.len();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if a[i][j] {
                let b = w[i] + w[j] - 1.0;
                l[(i, j)] = -b;
                l[(i, i)] += b;
            }
        }
    }
    l
}

pub struct DenseFiedler {
    pub value: f64,
    /// Orthonormal basis of the eigenspace of `value`.
    pub basis: Vec<Vec<f64>>,
}

/// Second-smallest eigenvalue and its eigenspace from a dense solver.
pub fn dense_fiedler(l: DMatrix<f64>, multiplicity_tol: f64) -> DenseFiedler {
    let eig = SymmetricEigen::new(l);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let value = eig.eigenvalues[order[1]];
    let basis = order[1..]
        .iter()
        .filter(|&&k| (eig.eigenvalues[k] - value).abs() <= multiplicity_tol)
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    DenseFiedler { value, basis }
}

/// Cosine between `v` and its projection onto the span of `basis`; the
/// absolute cosine with the eigenvector when the eigenvalue is simple.
pub fn eigenspace_cosine(v: &[f64], basis: &[Vec<f64>]) -> f64 {
    let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let proj2: f64 = basis
        .iter()
        .map(|b| v.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().powi(2))
        .sum();
    proj2.sqrt() / vn
}

/// Greedy cover of `star` edges by largest `k / h` with floating-point
/// ratios, scanning nodes in index order and keeping the first maximum.
pub fn greedy_cover(star: &[Vec<bool>], host: &[Vec<bool>]) -> Vec<usize> {
    let n = star.len();
    let mut star: Vec<Vec<bool>> = star.to_vec();
    let mut host: Vec<Vec<bool>> = host.to_vec();
    let deg = |m: &[Vec<bool>], v: usize| m[v].iter().filter(|&&x| x).count();
    let mut picks = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for v in 0..n {
            let k = deg(&star, v);
            if k == 0 {
                continue;
            }
            let ratio = k as f64 / deg(&host, v) as f64;
            if best.is_none_or(|(_, r)| ratio > r) {
                best = Some((v, ratio));
            }
        }
        let Some((v, _)) = best else {
            return picks;
        };
        picks.push(v);
        for w in 0..n {
            star[v][w] = false;
            star[w][v] = false;
            host[v][w] = false;
            host[w][v] = false;
        }
    }
}
