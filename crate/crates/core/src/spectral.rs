//! Cost-weighted Laplacians, Fiedler vectors and sign bisection.
//!
//! With a diagonal cost matrix `W` and adjacency `A`, the weighted adjacency
//! is `B = AW + WA - A`, i.e. `B_ij = A_ij (w_i + w_j - 1)`, and the weighted
//! Laplacian is `L = D_B - B`. The eigenvector of the second-smallest
//! eigenvalue of `L` is split by sign into two node sets; edges crossing the
//! split form the subgraph handed to the vertex cover.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{LabeledGraph, NodeSet};

pub const FIEDLER_TOL: f64 = 1e-9;
pub const FIEDLER_MAX_ITER: usize = 50_000;
/// Below this the second eigenvalue is treated as zero (disconnected input).
pub const DISCONNECTED_EIGENVALUE: f64 = 1e-10;
/// Fiedler components at most this large in magnitude count as zero.
pub const ZERO_COMPONENT: f64 = 1e-10;

const START_SEED: u64 = 0x5eed_f1ed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("no cost given for node {0:?}")]
    MissingCost(String),
    #[error("cost for {0:?} is negative or not finite")]
    InvalidCost(String),
    #[error("cost vector has no positive entry")]
    AllZeroCost,
    #[error("matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("matrix has a nonzero diagonal at {0}")]
    NonzeroDiagonal(usize),
    #[error("need at least 2 nodes, got {0}")]
    TooSmall(usize),
    #[error("second eigenvalue {0:e} is zero: graph is disconnected")]
    Disconnected(f64),
    #[error(
        "Fiedler iteration did not converge in {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no Fiedler component for node {0:?}")]
    MissingComponent(String),
    #[error("degenerate bisection: every node falls on one side")]
    Degenerate,
}

/// Removal cost per node.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector(BTreeMap<String, f64>);

impl CostVector {
    pub fn new(costs: BTreeMap<String, f64>) -> Result<Self, SpectralError> {
        if let Some((label, _)) = costs.iter().find(|(_, c)| !c.is_finite() || **c < 0.0) {
            return Err(SpectralError::InvalidCost(label.clone()));
        }
        if !costs.values().any(|&c| c > 0.0) {
            return Err(SpectralError::AllZeroCost);
        }
        Ok(CostVector(costs))
    }

    /// Cost of every node equal to its degree in `g`.
    pub fn degrees(g: &LabeledGraph) -> Result<Self, SpectralError> {
        Self::new(
            g.degrees()
                .into_iter()
                .map(|(l, d)| (l, d as f64))
                .collect(),
        )
    }

    pub fn uniform(g: &LabeledGraph, cost: f64) -> Result<Self, SpectralError> {
        Self::new(g.labels().iter().map(|l| (l.clone(), cost)).collect())
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.0.get(label).copied()
    }
}

/// Dense symmetric matrix whose rows and columns are indexed by node labels.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMatrix {
    labels: Vec<String>,
    data: Vec<f64>,
}

impl NodeMatrix {
    pub fn zeros(labels: Vec<String>) -> Self {
        let n = labels.len();
        NodeMatrix {
            labels,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(labels);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let n = self.len();
        self.data[i * n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn check_symmetric(&self) -> Result<(), SpectralError> {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(SpectralError::Asymmetric(i, j));
                }
            }
        }
        Ok(())
    }
}

/// Weighted adjacency `B = AW + WA - A` with `W = diag(costs)`.
pub fn cost_matrix_b(g: &LabeledGraph, costs: &CostVector) -> Result<NodeMatrix, SpectralError> {
    let w: Vec<f64> = g
        .labels()
        .iter()
        .map(|l| {
            costs
                .get(l)
                .ok_or_else(|| SpectralError::MissingCost(l.clone()))
        })
        .collect::<Result<_, _>>()?;
    let mut b = NodeMatrix::zeros(g.labels().to_vec());
    for (i, nbrs) in g.adjacency().iter().enumerate() {
        for &j in nbrs {
            b.set(i, j, w[i] + w[j] - 1.0);
        }
    }
    Ok(b)
}

/// `L = D_B - B`, where `D_B` holds the row sums of `B`.
pub fn weighted_laplacian(b: &NodeMatrix) -> Result<NodeMatrix, SpectralError> {
    b.check_symmetric()?;
    let n = b.len();
    if let Some(i) = (0..n).find(|&i| b.get(i, i) != 0.0) {
        return Err(SpectralError::NonzeroDiagonal(i));
    }
    let mut l = NodeMatrix::zeros(b.labels.clone());
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            let v = b.get(i, j);
            row_sum += v;
            l.set(i, j, -v);
        }
        l.set(i, i, row_sum);
    }
    Ok(l)
}

/// Second-smallest eigenpair of a weighted Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct FiedlerPair {
    pub value: f64,
    pub vector: BTreeMap<String, f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn deflate_and_normalize(v: &mut [f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let len = norm(v);
    if len > 0.0 {
        v.iter_mut().for_each(|x| *x /= len);
    }
    len
}

/// Fiedler pair by power iteration on `sigma I - L`, `sigma = max_i 2 L_ii`,
/// projecting out the constant vector every step. Converged once
/// `|L v - lambda v|_2 <= tol`. The returned vector has unit norm and its
/// first nonzero component (in label order) is positive.
pub fn fiedler(l: &NodeMatrix, tol: f64, max_iter: usize) -> Result<FiedlerPair, SpectralError> {
    let n = l.len();
    if n < 2 {
        return Err(SpectralError::TooSmall(n));
    }
    let sigma = (0..n).map(|i| 2.0 * l.get(i, i)).fold(0.0, f64::max);
    if sigma <= 0.0 {
        return Err(SpectralError::Disconnected(0.0));
    }

    // A fixed pseudo-random start. Arithmetic sequences such as i * phi mod 1
    // are orthogonal to eigenvectors that are antisymmetric under index
    // reflection, which symmetric graphs produce.
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    deflate_and_normalize(&mut v);
    let mut lv = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut lambda = 0.0;
    let mut converged = false;
    for _ in 0..max_iter {
        l.mul_vec(&v, &mut lv);
        lambda = v.iter().zip(&lv).map(|(a, b)| a * b).sum();
        residual = lv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            converged = true;
            break;
        }
        let mut next: Vec<f64> = v.iter().zip(&lv).map(|(x, y)| sigma * x - y).collect();
        if deflate_and_normalize(&mut next) == 0.0 {
            break;
        }
        v = next;
    }
    if !converged {
        return Err(SpectralError::NoConvergence {
            iterations: max_iter,
            residual,
        });
    }
    if lambda < DISCONNECTED_EIGENVALUE {
        return Err(SpectralError::Disconnected(lambda));
    }
    if let Some(first) = v.iter().find(|x| x.abs() > ZERO_COMPONENT) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(FiedlerPair {
        value: lambda,
        vector: l.labels.iter().cloned().zip(v).collect(),
    })
}

/// Two-way split of a graph by the sign pattern of a Fiedler vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBisection {
    pub part_m: NodeSet,
    pub part_m_bar: NodeSet,
    pub fiedler_value: f64,
    pub fiedler_vector: BTreeMap<String, f64>,
}

/// Nodes with a nonnegative component (zeros included) go to `part_m`.
pub fn bisect(g: &LabeledGraph, pair: &FiedlerPair) -> Result<SpectralBisection, SpectralError> {
    let mut part_m = NodeSet::new();
    let mut part_m_bar = NodeSet::new();
    for label in g.labels() {
        let c = pair
            .vector
            .get(label)
            .ok_or_else(|| SpectralError::MissingComponent(label.clone()))?;
        if *c >= -ZERO_COMPONENT {
            part_m.insert(label.clone());
        } else {
            part_m_bar.insert(label.clone());
        }
    }
    if part_m.is_empty() || part_m_bar.is_empty() {
        return Err(SpectralError::Degenerate);
    }
    Ok(SpectralBisection {
        part_m,
        part_m_bar,
        fiedler_value: pair.value,
        fiedler_vector: pair.vector.clone(),
    })
}

/// Edges of `g` with one endpoint on each side; nodes are their endpoints.
pub fn crossing_subgraph(g: &LabeledGraph, bis: &SpectralBisection) -> LabeledGraph {
    let crossing: Vec<(&str, &str)> = g
        .edges()
        .filter(|(a, b)| bis.part_m.contains(a) != bis.part_m.contains(b))
        .collect();
    LabeledGraph::from_edges(crossing).expect("edges of a simple graph stay simple")
}

/// Cost matrix, Laplacian, Fiedler pair and bisection in one call.
pub fn spectral_bisection(
    g: &LabeledGraph,
    costs: &CostVector,
) -> Result<SpectralBisection, SpectralError> {
    let b = cost_matrix_b(g, costs)?;
    let l = weighted_laplacian(&b)?;
    let pair = fiedler(&l, FIEDLER_TOL, FIEDLER_MAX_ITER)?;
    bisect(g, &pair)
}
