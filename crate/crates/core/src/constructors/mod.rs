//! Deterministic generators for the complex families used throughout.

mod fibration;
mod hypercube;
mod named;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use fibration::{build_fibration, construct_h0_filling, construct_h1_cofilling, leray_serre_check, EdgeImage, GraphFibration, InequalityCheck, LeraySerreReport};
pub use hypercube::{hypercube_skeleton, Hypercube, MAX_HYPERCUBE_CELLS};
pub use named::{lens_cw, named_complex, zn_presentation, FixtureInfo, FIXTURES};

use crate::complex::{build_simplicial, CellComplex, ComplexParts, SparseMatrix};
use crate::error::{Error, Result};

/// Boundary of the n-simplex, a triangulated S^{n−1}.
pub fn simplex_boundary(n: usize) -> Result<CellComplex> {
    if n == 0 {
        return Err(Error::Argument("simplex_boundary needs n ≥ 1".into()));
    }
    let facets: Vec<Vec<usize>> = (0..=n).map(|skip| (0..=n).filter(|&v| v != skip).collect()).collect();
    let mut x = build_simplicial(&facets)?;
    x.set_name(format!("simplex-boundary({n})"));
    Ok(x)
}

/// All k-subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Linial–Meshulam style complex: the full (dim−1)-skeleton of Δ^{n−1}
/// plus each dim-simplex independently with probability p.
pub fn random_complex(n: usize, dim: usize, p: f64, seed: u64) -> Result<CellComplex> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("probability {p} outside [0, 1]")));
    }
    if dim == 0 || n < dim {
        return Err(Error::Argument(format!("random_complex needs 1 ≤ dim ≤ n (got n={n}, dim={dim})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut facets = combinations(n, dim);
    for s in combinations(n, dim + 1) {
        if rng.random::<f64>() < p {
            facets.push(s);
        }
    }
    let mut x = build_simplicial(&facets)?;
    x.set_name(format!("random(n={n},dim={dim},p={p},seed={seed})"));
    Ok(x)
}

/// Connected random graph on n vertices: a random recursive tree plus each
/// remaining pair as an edge with probability p.
pub fn random_connected_graph(n: usize, p: f64, seed: u64) -> Result<CellComplex> {
    if n == 0 {
        return Err(Error::Argument("graph needs at least one vertex".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.insert((u, v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !edges.contains(&(u, v)) && rng.random::<f64>() < p {
                edges.insert((u, v));
            }
        }
    }
    let mut x = graph(n, &edges.into_iter().collect::<Vec<_>>())?;
    x.set_name(format!("random-graph(n={n},p={p},seed={seed})"));
    Ok(x)
}

/// Graph complex on vertices 0..n with the given (tail, head) edges, kept
/// in the given order.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> Result<CellComplex> {
    let cols = edges
        .iter()
        .map(|&(a, b)| {
            if a == b || a >= n || b >= n {
                return Err(Error::InvalidComplex(format!("bad edge ({a}, {b})")));
            }
            Ok(vec![(a, -1), (b, 1)])
        })
        .collect::<Result<Vec<_>>>()?;
    CellComplex::from_parts(ComplexParts {
        name: "graph".into(),
        augmented: true,
        cells: vec![(0..n).map(|v| v.to_string()).collect(), edges.iter().map(|(a, b)| format!("{a}-{b}")).collect()],
        boundaries: if n > 0 { vec![SparseMatrix::from_columns(n, cols)] } else { vec![] },
        labels: None,
        loops: BTreeMap::new(),
        allow_closed: false,
    })
}

/// Cycle graph C_n (n ≥ 3).
pub fn cycle_graph(n: usize) -> Result<CellComplex> {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n))).collect();
    let mut x = graph(n, &edges)?;
    x.set_name(format!("cycle({n})"));
    Ok(x)
}
