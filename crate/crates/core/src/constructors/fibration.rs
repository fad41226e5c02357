//! Graph fibrations π: E → B with connected fibers, and an exact check of
//! the two comparison inequalities between Cheeger constants of E, B and
//! the fibers, including the constructive fillings behind them.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{graph, random_connected_graph};
use crate::arith::{q, Magnitude, Q};
use crate::chain::{Norm, QChain};
use crate::complex::{CellComplex, SparseMatrix};
use crate::error::{Error, Result};
use crate::filling::{cheeger, CheegerOptions, FillingEngine, Method, Side, Variant};

/// Image of an edge of E: a vertex of B (edge inside a fiber) or an edge
/// of B with orientation sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeImage {
    Vertex(usize),
    Edge(usize, i64),
}

#[derive(Clone, Debug)]
pub struct GraphFibration {
    pub kind: String,
    pub e: CellComplex,
    pub b: CellComplex,
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<EdgeImage>,
    pub fibers: Vec<Vec<usize>>,
    /// Largest fiber size.
    pub c: usize,
}

fn endpoints(x: &CellComplex) -> Result<Vec<(usize, usize)>> {
    (0..x.num_cells(1)).map(|e| x.edge_endpoints(e)).collect()
}

impl GraphFibration {
    /// Derives the edge map from the vertex map and checks that π is a
    /// surjective simplicial map with connected fibers.
    pub fn new(kind: &str, e: CellComplex, b: CellComplex, vertex_map: Vec<usize>) -> Result<GraphFibration> {
        if e.dims() != 1 || b.dims() != 1 {
            return Err(Error::Precondition("fibrations are maps between graphs".into()));
        }
        let (nb, ne) = (b.num_cells(0), e.num_cells(0));
        if vertex_map.len() != ne || vertex_map.iter().any(|&v| v >= nb) {
            return Err(Error::Precondition("vertex map has the wrong shape".into()));
        }
        let b_edges: BTreeMap<(usize, usize), usize> = endpoints(&b)?.into_iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut edge_map = Vec::new();
        let mut hit = vec![false; b.num_cells(1)];
        let mut fiber_adj = vec![Vec::new(); ne];
        for (k, (s, t)) in endpoints(&e)?.into_iter().enumerate() {
            let (u, w) = (vertex_map[s], vertex_map[t]);
            if u == w {
                edge_map.push(EdgeImage::Vertex(u));
                fiber_adj[s].push(t);
                fiber_adj[t].push(s);
            } else if let Some(&j) = b_edges.get(&(u, w)) {
                hit[j] = true;
                edge_map.push(EdgeImage::Edge(j, 1));
            } else if let Some(&j) = b_edges.get(&(w, u)) {
                hit[j] = true;
                edge_map.push(EdgeImage::Edge(j, -1));
            } else {
                return Err(Error::Precondition(format!("edge {k} of E does not map to an edge of B")));
            }
        }
        let mut fibers = vec![Vec::new(); nb];
        for (v, &u) in vertex_map.iter().enumerate() {
            fibers[u].push(v);
        }
        if fibers.iter().any(Vec::is_empty) || hit.iter().any(|h| !h) {
            return Err(Error::Precondition("π is not surjective".into()));
        }
        for (u, f) in fibers.iter().enumerate() {
            let mut seen = vec![false; ne];
            let mut stack = vec![f[0]];
            seen[f[0]] = true;
            while let Some(v) = stack.pop() {
                for &w in &fiber_adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            if f.iter().any(|&v| !seen[v]) {
                return Err(Error::Precondition(format!("fiber over vertex {u} is disconnected")));
            }
        }
        let c = fibers.iter().map(Vec::len).max().unwrap_or(0);
        Ok(GraphFibration { kind: kind.into(), e, b, vertex_map, edge_map, fibers, c })
    }

    /// Maximum vertex degree over E and B.
    pub fn max_degree(&self) -> usize {
        [&self.e, &self.b]
            .iter()
            .map(|x| {
                let mut deg = vec![0usize; x.num_cells(0)];
                for (r, _, _) in x.boundary_or_zero(1).triplets() {
                    deg[r] += 1;
                }
                deg.into_iter().max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// The fiber over u as a graph, with the E-indices of its vertices and
    /// edges.
    pub fn fiber(&self, u: usize) -> Result<(CellComplex, Vec<usize>, Vec<usize>)> {
        let verts = self.fibers[u].clone();
        let local: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let ends = endpoints(&self.e)?;
        let edges: Vec<usize> = (0..self.edge_map.len()).filter(|&k| self.edge_map[k] == EdgeImage::Vertex(u)).collect();
        let pairs: Vec<(usize, usize)> = edges.iter().map(|&k| (local[&ends[k].0], local[&ends[k].1])).collect();
        let mut g = graph(verts.len(), &pairs)?;
        g.set_name(format!("fiber({u})"));
        Ok((g, verts, edges))
    }
}

/// Triangular prism over a triangle, fibers the vertical edges.
fn prism() -> Result<GraphFibration> {
    let tri = [(0, 1), (1, 2), (0, 2)];
    let mut edges: Vec<(usize, usize)> = tri.to_vec();
    edges.extend(tri.iter().map(|&(a, b)| (a + 3, b + 3)));
    edges.extend((0..3).map(|i| (i, i + 3)));
    let e = graph(6, &edges)?;
    let b = graph(3, &tri)?;
    GraphFibration::new("prism", e, b, vec![0, 1, 2, 0, 1, 2])
}

/// Cartesian product B □ F projected onto B.
fn product(b: CellComplex, f: &CellComplex) -> Result<GraphFibration> {
    let (nb, nf) = (b.num_cells(0), f.num_cells(0));
    let mut edges = Vec::new();
    for (s, t) in endpoints(&b)? {
        for w in 0..nf {
            edges.push((s * nf + w, t * nf + w));
        }
    }
    for (s, t) in endpoints(f)? {
        for u in 0..nb {
            edges.push((u * nf + s, u * nf + t));
        }
    }
    let e = graph(nb * nf, &edges)?;
    GraphFibration::new("product", e, b, (0..nb * nf).map(|v| v / nf).collect())
}

/// Quotient of a connected graph by a partition into connected blocks
/// grown from random seeds.
fn collapse(e: CellComplex, blocks: usize, seed: u64) -> Result<GraphFibration> {
    let n = e.num_cells(0);
    let adj = e.adjacency()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut owner = vec![usize::MAX; n];
    let mut frontier = Vec::new();
    let mut count = 0;
    while count < blocks.min(n) {
        let v = rng.random_range(0..n);
        if owner[v] == usize::MAX {
            owner[v] = count;
            frontier.push(v);
            count += 1;
        }
    }
    while let Some(pos) = (!frontier.is_empty()).then(|| rng.random_range(0..frontier.len())) {
        let v = frontier[pos];
        let free: Vec<usize> = adj[v].iter().map(|&(w, _)| w).filter(|&w| owner[w] == usize::MAX).collect();
        if free.is_empty() {
            frontier.swap_remove(pos);
        } else {
            let w = free[rng.random_range(0..free.len())];
            owner[w] = owner[v];
            frontier.push(w);
        }
    }
    let mut quotient = std::collections::BTreeSet::new();
    for (s, t) in endpoints(&e)? {
        let (u, w) = (owner[s], owner[t]);
        if u != w {
            quotient.insert((u.min(w), u.max(w)));
        }
    }
    let b = graph(count, &quotient.into_iter().collect::<Vec<_>>())?;
    GraphFibration::new("collapse", e, b, owner)
}

/// Named fibration families: "prism", "identity", "point", "product",
/// "collapse". `size` and `seed` parametrize the random ones.
pub fn build_fibration(kind: &str, size: usize, seed: u64) -> Result<GraphFibration> {
    match kind {
        "prism" => prism(),
        "identity" => {
            let b = random_connected_graph(size.max(2), 0.4, seed)?;
            GraphFibration::new("identity", b.clone(), b, (0..size.max(2)).collect())
        }
        "point" => {
            let e = random_connected_graph(size.max(2), 0.4, seed)?;
            let n = e.num_cells(0);
            GraphFibration::new("point", e, graph(1, &[])?, vec![0; n])
        }
        "product" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_connected_graph(rng.random_range(2..=size.max(2)), 0.5, rng.random())?;
            let f = random_connected_graph(rng.random_range(1..=3), 0.5, rng.random())?;
            product(b, &f)
        }
        "collapse" => {
            let e = random_connected_graph(size.max(3), 0.3, seed)?;
            collapse(e, size.max(3) / 2, seed)
        }
        _ => Err(Error::UnknownName(format!("fibration kind {kind:?} (expected prism, identity, point, product, collapse)"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityCheck {
    /// 1/h for E.
    pub lhs: Magnitude,
    pub base: Magnitude,
    /// max over fibers of 1/h.
    pub fiber_max: Magnitude,
    /// Right-hand side of the displayed inequality.
    pub rhs: f64,
    pub holds: bool,
    pub witnesses_checked: usize,
    pub witnesses_valid: bool,
    /// max ‖constructed filling‖ / ‖α‖ over the tested α.
    pub witness_ratio: f64,
    pub witness_within_rhs: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeraySerreReport {
    pub kind: String,
    pub norm: Norm,
    pub e_cells: [usize; 2],
    pub b_cells: [usize; 2],
    pub d: usize,
    pub c: usize,
    pub h0: InequalityCheck,
    pub h1_coexact: InequalityCheck,
    pub holds: bool,
}

const SLACK: f64 = 1e-9;

fn le(a: &Magnitude, rhs: f64) -> bool {
    match a {
        Magnitude::Infinite => false,
        _ => a.to_f64() <= rhs * (1.0 + SLACK) + SLACK,
    }
}

fn rational_norm(v: &[Q], p: Norm) -> f64 {
    match p {
        Norm::L1 => crate::arith::q_to_f64(&v.iter().fold(Q::zero(), |a, x| a + x.abs())),
        Norm::LInf => crate::arith::q_to_f64(&v.iter().map(Signed::abs).max().unwrap_or_else(Q::zero)),
        Norm::L2 => crate::arith::q_to_f64(&v.iter().fold(Q::zero(), |a, x| a + x * x)).sqrt(),
    }
}

fn inv(x: &CellComplex, i: usize, p: Norm, side: Side, variant: Variant, opts: &CheegerOptions) -> Result<(Magnitude, Option<QChain>)> {
    let v = cheeger(x, i, p, side, variant, Method::Brute, opts)?;
    Ok((v.inverse, v.witness_cycle))
}

fn mag_max(xs: impl Iterator<Item = Magnitude>) -> Magnitude {
    xs.fold(Magnitude::zero(), |a, b| if b.to_f64() > a.to_f64() || b.is_infinite() { b } else { a })
}

fn min_fill(b: &SparseMatrix, alpha: &[Q], p: Norm) -> Result<Vec<Q>> {
    FillingEngine::new(b, p)
        .solve(alpha, true)
        .map(|(beta, _, _)| beta)
        .ok_or_else(|| Error::Invariant("constructive step found no filling".into()))
}

/// Sparse submatrix on the given rows and columns.
fn restrict(m: &SparseMatrix, rows: &[usize], cols: &[usize]) -> SparseMatrix {
    m.select_columns(cols).select_rows(rows)
}

/// Filling of a 0-cycle α of E: lift of a minimal filling of π(α) plus
/// minimal fiberwise corrections.
pub fn construct_h0_filling(f: &GraphFibration, alpha: &[Q], p: Norm) -> Result<Vec<Q>> {
    let (ne1, nb1) = (f.e.num_cells(1), f.b.num_cells(1));
    let mut pushed = vec![Q::zero(); f.b.num_cells(0)];
    for (v, a) in alpha.iter().enumerate() {
        pushed[f.vertex_map[v]] += a;
    }
    let eta = min_fill(&f.b.boundary_or_zero(1), &pushed, p)?;
    let mut lift = vec![None; nb1];
    for (k, img) in f.edge_map.iter().enumerate() {
        if let EdgeImage::Edge(j, s) = *img {
            lift[j].get_or_insert((k, s));
        }
    }
    let mut out = vec![Q::zero(); ne1];
    for (j, c) in eta.iter().enumerate() {
        if let Some((k, s)) = lift[j] {
            out[k] += c * q(s);
        }
    }
    let d1 = f.e.boundary_or_zero(1);
    let lifted = QChain::from_dense(1, &out).apply_matrix(&d1, 0, 0.0).to_dense(alpha.len());
    let rest: Vec<Q> = alpha.iter().zip(&lifted).map(|(a, l)| a - l).collect();
    for u in 0..f.fibers.len() {
        let (_, verts, edges) = f.fiber(u)?;
        let local: Vec<Q> = verts.iter().map(|&v| rest[v].clone()).collect();
        if local.iter().all(Zero::is_zero) {
            continue;
        }
        let beta = min_fill(&restrict(&d1, &verts, &edges), &local, p)?;
        for (k, c) in edges.iter().zip(beta) {
            out[*k] += c;
        }
    }
    Ok(out)
}

/// Cofilling of a coexact 1-cochain α of E: fiberwise cofillings, then the
/// pullback of a minimal cofilling of the induced cochain on B.
pub fn construct_h1_cofilling(f: &GraphFibration, alpha: &[Q], p: Norm) -> Result<Vec<Q>> {
    let d1 = f.e.boundary_or_zero(1);
    let d0 = d1.transpose();
    let mut out = vec![Q::zero(); f.e.num_cells(0)];
    for u in 0..f.fibers.len() {
        let (_, verts, edges) = f.fiber(u)?;
        if edges.is_empty() {
            continue;
        }
        let local: Vec<Q> = edges.iter().map(|&k| alpha[k].clone()).collect();
        let beta = min_fill(&restrict(&d0, &edges, &verts), &local, p)?;
        for (v, c) in verts.iter().zip(beta) {
            out[*v] = c;
        }
    }
    let corrected = QChain::from_dense(0, &out).apply_matrix(&d0, 1, 0.0).to_dense(alpha.len());
    let mut gamma: Vec<Option<Q>> = vec![None; f.b.num_cells(1)];
    for (k, img) in f.edge_map.iter().enumerate() {
        let r = &alpha[k] - &corrected[k];
        match *img {
            EdgeImage::Vertex(_) if !r.is_zero() => return Err(Error::Invariant("corrected cochain is nonzero on a fiber edge".into())),
            EdgeImage::Edge(j, s) => {
                let val = r * q(s);
                match &gamma[j] {
                    Some(g) if *g != val => return Err(Error::Invariant("corrected cochain differs between lifts".into())),
                    _ => gamma[j] = Some(val),
                }
            }
            _ => {}
        }
    }
    let gamma: Vec<Q> = gamma.into_iter().map(Option::unwrap_or_default).collect();
    if gamma.iter().any(|g| !g.is_zero()) {
        let eta = min_fill(&f.b.boundary_or_zero(1).transpose(), &gamma, p)?;
        for (v, o) in out.iter_mut().enumerate() {
            *o += &eta[f.vertex_map[v]];
        }
    }
    Ok(out)
}

fn test_cycles(witness: Option<QChain>, n: usize, len: usize, seed: u64, make: impl Fn(&mut ChaCha8Rng) -> Vec<Q>) -> Vec<Vec<Q>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<Q>> = witness.map(|w| w.to_dense(n)).into_iter().collect();
    out.extend((0..len).map(|_| make(&mut rng)).filter(|v| v.iter().any(|x| !x.is_zero())));
    out
}

/// Exact Cheeger values of E, B and every fiber, both inequalities with
/// D = max degree and C = max fiber size, and the constructive fillings
/// checked on the extremal cycle plus seeded random ones.
pub fn leray_serre_check(f: &GraphFibration, p: Norm, opts: &CheegerOptions) -> Result<LeraySerreReport> {
    let d = f.max_degree();
    let fibers: Vec<CellComplex> = (0..f.fibers.len()).map(|u| f.fiber(u).map(|t| t.0)).collect::<Result<_>>()?;
    let d1 = f.e.boundary_or_zero(1);
    let (ne0, ne1) = (f.e.num_cells(0), f.e.num_cells(1));

    let (e0, w0) = inv(&f.e, 0, p, Side::Chain, Variant::Plain, opts)?;
    let (b0, _) = inv(&f.b, 0, p, Side::Chain, Variant::Plain, opts)?;
    let fib0 = mag_max(fibers.iter().map(|g| inv(g, 0, p, Side::Chain, Variant::Plain, opts).map(|r| r.0)).collect::<Result<Vec<_>>>()?.into_iter());
    let rhs0 = 2.0 * d as f64 * (b0.to_f64() + 1.0) * (fib0.to_f64() + 1.0);
    let cycles = test_cycles(w0, ne0, 8, 17, |rng| {
        let mut v = vec![Q::zero(); ne0];
        v[rng.random_range(0..ne0)] += Q::one();
        v[rng.random_range(0..ne0)] -= Q::one();
        v
    });
    let mut ok0 = true;
    let mut ratio0: f64 = 0.0;
    for a in &cycles {
        let fill = construct_h0_filling(f, a, p)?;
        ok0 &= QChain::from_dense(1, &fill).apply_matrix(&d1, 0, 0.0) == QChain::from_dense(0, a);
        ratio0 = ratio0.max(rational_norm(&fill, p) / rational_norm(a, p));
    }
    let h0 = InequalityCheck {
        holds: le(&e0, rhs0),
        lhs: e0,
        base: b0,
        fiber_max: fib0,
        rhs: rhs0,
        witnesses_checked: cycles.len(),
        witnesses_valid: ok0,
        witness_within_rhs: ratio0 <= rhs0 * (1.0 + SLACK) + SLACK,
        witness_ratio: ratio0,
    };

    let (e1, w1) = inv(&f.e, 1, p, Side::Cochain, Variant::Coexact, opts)?;
    let (b1, _) = inv(&f.b, 1, p, Side::Cochain, Variant::Coexact, opts)?;
    let fib1 = mag_max(fibers.iter().map(|g| inv(g, 1, p, Side::Cochain, Variant::Coexact, opts).map(|r| r.0)).collect::<Result<Vec<_>>>()?.into_iter());
    let rhs1 = f.c as f64 * (b1.to_f64() + 1.0) * (fib1.to_f64() + 1.0);
    let d0 = d1.transpose();
    let cochains = test_cycles(w1, ne1, 8, 23, |rng| {
        let phi: Vec<Q> = (0..ne0).map(|_| q(rng.random_range(-2..=2))).collect();
        QChain::from_dense(0, &phi).apply_matrix(&d0, 1, 0.0).to_dense(ne1)
    });
    let mut ok1 = true;
    let mut ratio1: f64 = 0.0;
    for a in &cochains {
        let cof = construct_h1_cofilling(f, a, p)?;
        ok1 &= QChain::from_dense(0, &cof).apply_matrix(&d0, 1, 0.0) == QChain::from_dense(1, a);
        ratio1 = ratio1.max(rational_norm(&cof, p) / rational_norm(a, p));
    }
    let h1 = InequalityCheck {
        holds: le(&e1, rhs1),
        lhs: e1,
        base: b1,
        fiber_max: fib1,
        rhs: rhs1,
        witnesses_checked: cochains.len(),
        witnesses_valid: ok1,
        witness_within_rhs: ratio1 <= rhs1 * (1.0 + SLACK) + SLACK,
        witness_ratio: ratio1,
    };
    Ok(LeraySerreReport {
        kind: f.kind.clone(),
        norm: p,
        e_cells: [ne0, ne1],
        b_cells: [f.b.num_cells(0), f.b.num_cells(1)],
        d,
        c: f.c,
        holds: h0.holds && h1.holds && h0.witnesses_valid && h1.witnesses_valid && h0.witness_within_rhs && h1.witness_within_rhs,
        h0,
        h1_coexact: h1,
    })
}
