use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::{homology, snf, HomologyGroup};
use crate::complex::{CellComplex, ComplexParts, SparseMatrix};
use crate::error::{Error, Result};

/// Largest total cell count a cover may have.
pub const MAX_COVER_CELLS: usize = 4_000_000;

/// Offset pattern of a lifted cell: the boundary of (c, 0) as
/// (face, group offset, coefficient) triples.
type Pattern = Vec<(usize, usize, i64)>;

/// Universal abelian cover of a finite complex with finite H_1.
///
/// Cell (c, g) of the total space has index `c·|G| + g`, where g indexes the
/// group elements in mixed-radix order. The deck group acts by translation
/// in the second coordinate.
#[derive(Clone, Debug)]
pub struct CoverComplex {
    pub base: CellComplex,
    /// Invariant factors of the deck group (all > 1).
    pub group: Vec<u64>,
    /// Deck-group element per base edge; zero on the spanning tree.
    pub edge_labels: Vec<Vec<u64>>,
    pub tree_edges: Vec<usize>,
    pub total: CellComplex,
}

/// Outcome of the exact structural checks on a cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverChecks {
    pub free: bool,
    pub transitive_on_fibers: bool,
    pub equivariant_boundary: bool,
    pub euler_multiplicative: bool,
    pub quotient_recovery: bool,
}

impl CoverChecks {
    pub fn all(&self) -> bool {
        self.free && self.transitive_on_fibers && self.equivariant_boundary && self.euler_multiplicative && self.quotient_recovery
    }
}

struct Group {
    factors: Vec<u64>,
    order: usize,
}

impl Group {
    fn element(&self, mut idx: usize) -> Vec<u64> {
        let mut out = vec![0; self.factors.len()];
        for k in (0..self.factors.len()).rev() {
            let d = self.factors[k] as usize;
            out[k] = (idx % d) as u64;
            idx /= d;
        }
        out
    }

    fn index(&self, g: &[u64]) -> usize {
        g.iter().zip(&self.factors).fold(0usize, |acc, (&x, &d)| acc * d as usize + (x % d) as usize)
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.element(a), self.element(b));
        self.index(&x.iter().zip(&y).zip(&self.factors).map(|((p, q), d)| (p + q) % d).collect::<Vec<_>>())
    }

    fn neg(&self, a: usize) -> usize {
        let x = self.element(a);
        self.index(&x.iter().zip(&self.factors).map(|(p, d)| (d - p) % d).collect::<Vec<_>>())
    }
}

fn group_label(g: &[u64]) -> String {
    if g.is_empty() {
        "0".into()
    } else {
        g.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
    }
}

/// Spanning tree of the 1-skeleton by BFS from vertex 0, neighbors taken in
/// edge order. Returns per-edge tree membership.
fn bfs_tree(x: &CellComplex) -> Result<Vec<bool>> {
    let n0 = x.num_cells(0);
    let n1 = x.num_cells(1);
    let adj = x.adjacency()?;
    let mut in_tree = vec![false; n1];
    let mut seen = vec![false; n0];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        let mut nbrs = adj[v].clone();
        nbrs.sort_by_key(|&(_, e)| e);
        for (w, e) in nbrs {
            if !seen[w] {
                seen[w] = true;
                in_tree[e] = true;
                queue.push_back(w);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Disconnected);
    }
    Ok(in_tree)
}

/// Lifts a 2-cell by walking an Eulerian circuit of its boundary multigraph.
fn lift_two_cell(x: &CellComplex, grp: &Group, labels: &[usize], f: usize) -> Result<Pattern> {
    let col = x.boundary_matrix(2)?.col(f);
    // arcs: (edge, forward?, from, to)
    let mut arcs = Vec::new();
    for &(e, m) in col {
        let (t, h) = x.edge_endpoints(e)?;
        for _ in 0..m.unsigned_abs() {
            arcs.push(if m > 0 { (e, true, t, h) } else { (e, false, h, t) });
        }
    }
    if arcs.is_empty() {
        return Ok(Vec::new());
    }
    let mut out_arcs: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, a) in arcs.iter().enumerate() {
        out_arcs.entry(a.2).or_default().push(k);
    }
    for list in out_arcs.values_mut() {
        list.reverse();
    }
    // Hierholzer
    let mut stack = vec![(arcs[0].2, None::<usize>)];
    let mut circuit = Vec::new();
    while let Some(&(v, via)) = stack.last() {
        match out_arcs.get_mut(&v).and_then(Vec::pop) {
            Some(k) => stack.push((arcs[k].3, Some(k))),
            None => {
                stack.pop();
                if let Some(k) = via {
                    circuit.push(k);
                }
            }
        }
    }
    circuit.reverse();
    if circuit.len() != arcs.len() {
        return Err(Error::InvalidComplex(format!("boundary of 2-cell {f} is not a single closed walk")));
    }
    let mut cur = 0usize;
    let mut pattern = Vec::new();
    for k in circuit {
        let (e, forward, _, _) = arcs[k];
        if forward {
            pattern.push((e, cur, 1));
            cur = grp.add(cur, labels[e]);
        } else {
            cur = grp.add(cur, grp.neg(labels[e]));
            pattern.push((e, cur, -1));
        }
    }
    if cur != 0 {
        return Err(Error::Invariant(format!("boundary labels of 2-cell {f} do not sum to zero")));
    }
    Ok(pattern)
}

/// Lifts a cell of dimension ≥ 3 by propagating face offsets across shared
/// codimension-2 faces, then checks that the lifted boundary is closed.
fn lift_higher_cell(x: &CellComplex, grp: &Group, d: usize, c: usize, prev: &[Pattern]) -> Result<Pattern> {
    let col = x.boundary_matrix(d)?.col(c);
    if col.is_empty() {
        return Ok(Vec::new());
    }
    let mut holders: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (k, &(f, _)) in col.iter().enumerate() {
        for &(y, off, _) in &prev[f] {
            holders.entry(y).or_default().push((k, off));
        }
    }
    let mut phi: Vec<Option<usize>> = vec![None; col.len()];
    for start in 0..col.len() {
        if phi[start].is_some() {
            continue;
        }
        phi[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            let pk = phi[k].unwrap();
            let f = col[k].0;
            for &(y, off, _) in &prev[f] {
                for &(k2, off2) in &holders[&y] {
                    if phi[k2].is_none() {
                        phi[k2] = Some(grp.add(grp.add(pk, off), grp.neg(off2)));
                        queue.push_back(k2);
                    }
                }
            }
        }
    }
    let pattern: Pattern = col.iter().zip(&phi).map(|(&(f, m), p)| (f, p.unwrap(), m)).collect();
    let mut bd: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for &(f, p, m) in &pattern {
        for &(y, off, v) in &prev[f] {
            *bd.entry((y, grp.add(p, off))).or_insert(0) += m * v;
        }
    }
    if bd.values().any(|&v| v != 0) {
        return Err(Error::InvalidComplex(format!("{d}-cell {c} has no closed lift to the abelian cover")));
    }
    Ok(pattern)
}

/// Builds the universal abelian cover. Requires a connected complex with
/// finite H_1.
pub fn universal_abelian_cover(x: &CellComplex) -> Result<CoverComplex> {
    if x.dims() >= 1 && !x.is_connected()? {
        return Err(Error::Disconnected);
    }
    if x.dims() == 0 && x.num_cells(0) != 1 {
        return Err(Error::Disconnected);
    }
    let h1 = if x.dims() >= 1 { homology(x, 1)? } else { HomologyGroup::trivial() };
    if h1.betti > 0 {
        return Err(Error::InfiniteCover(h1.betti));
    }
    let n1 = x.num_cells(1);
    let in_tree = if x.dims() >= 1 { bfs_tree(x)? } else { Vec::new() };
    let non_tree: Vec<usize> = (0..n1).filter(|&e| !in_tree[e]).collect();
    let n2 = x.num_cells(2);
    let pres: Vec<Vec<BigInt>> = if x.dims() >= 2 {
        let b2 = x.boundary_matrix(2)?;
        non_tree.iter().map(|&e| (0..n2).map(|f| BigInt::from(b2.get(e, f))).collect()).collect()
    } else {
        non_tree.iter().map(|_| Vec::new()).collect()
    };
    let s = snf(&pres);
    let diag = s.diagonal();
    let mut coords = Vec::new();
    for k in 0..non_tree.len() {
        match diag.get(k) {
            Some(dk) if dk.is_zero() => return Err(Error::InfiniteCover(1)),
            None => return Err(Error::InfiniteCover(1)),
            Some(dk) if *dk > BigInt::from(1) => coords.push(k),
            _ => {}
        }
    }
    let factors: Vec<u64> = coords
        .iter()
        .map(|&k| diag[k].to_u64().ok_or_else(|| Error::Size("deck group factor too large".into())))
        .collect::<Result<_>>()?;
    if factors.iter().map(|&f| BigInt::from(f)).collect::<Vec<_>>() != h1.torsion {
        return Err(Error::Invariant(format!("presentation gives {factors:?}, homology gives {h1}")));
    }
    let order = factors.iter().try_fold(1usize, |acc, &f| acc.checked_mul(f as usize));
    let order = match order {
        Some(o) if o.saturating_mul(x.total_cells()) <= MAX_COVER_CELLS => o,
        _ => return Err(Error::Size(format!("cover of {} with deck group {factors:?} exceeds {MAX_COVER_CELLS} cells", x.name()))),
    };
    let grp = Group { factors: factors.clone(), order };
    let mut edge_labels = vec![vec![0u64; factors.len()]; n1];
    for (j, &e) in non_tree.iter().enumerate() {
        edge_labels[e] = coords
            .iter()
            .zip(&factors)
            .map(|(&k, &d)| s.u[k][j].mod_floor(&BigInt::from(d)).to_u64().unwrap())
            .collect();
    }
    let label_idx: Vec<usize> = edge_labels.iter().map(|g| grp.index(g)).collect();

    let elements: Vec<String> = (0..order).map(|g| group_label(&grp.element(g))).collect();
    let cells: Vec<Vec<String>> = (0..=x.dims())
        .map(|d| x.cell_ids(d).iter().flat_map(|id| elements.iter().map(move |g| format!("{id}@{g}"))).collect())
        .collect();

    let mut patterns: Vec<Vec<Pattern>> = Vec::new();
    let mut boundaries = Vec::new();
    let mut loops = BTreeMap::new();
    for d in 1..=x.dims() {
        let count = x.num_cells(d as isize);
        let pats: Vec<Pattern> = match d {
            1 => (0..count)
                .map(|e| {
                    let (t, h) = x.edge_endpoints(e)?;
                    Ok(if t == h && label_idx[e] == 0 { Vec::new() } else { vec![(h, label_idx[e], 1), (t, 0, -1)] })
                })
                .collect::<Result<_>>()?,
            2 => (0..count).map(|f| lift_two_cell(x, &grp, &label_idx, f)).collect::<Result<_>>()?,
            _ => (0..count).map(|c| lift_higher_cell(x, &grp, d, c, &patterns[d - 2])).collect::<Result<_>>()?,
        };
        let mut cols = Vec::with_capacity(count * order);
        for (c, pat) in pats.iter().enumerate() {
            for g in 0..order {
                if d == 1 && pat.is_empty() {
                    loops.insert(c * order + g, x.edge_endpoints(c)?.0 * order + g);
                }
                cols.push(pat.iter().map(|&(y, off, v)| (y * order + grp.add(g, off), v)).collect());
            }
        }
        boundaries.push(SparseMatrix::from_columns(x.num_cells(d as isize - 1) * order, cols));
        patterns.push(pats);
    }
    let total = CellComplex::from_parts(ComplexParts {
        name: format!("abelian-cover({})", x.name()),
        augmented: x.augmented(),
        cells,
        boundaries,
        labels: None,
        loops,
        allow_closed: x.allow_closed(),
    })?;
    Ok(CoverComplex {
        base: x.clone(),
        group: factors,
        edge_labels,
        tree_edges: (0..n1).filter(|&e| in_tree[e]).collect(),
        total,
    })
}

impl CoverComplex {
    pub fn order(&self) -> usize {
        self.group.iter().product::<u64>() as usize
    }

    fn grp(&self) -> Group {
        Group { factors: self.group.clone(), order: self.order() }
    }

    /// Image of total cell `cell` under deck element `g`.
    pub fn act(&self, g: usize, cell: usize) -> usize {
        let n = self.order();
        (cell / n) * n + self.grp().add(cell % n, g)
    }

    /// Base cell under total cell `cell`.
    pub fn project(&self, cell: usize) -> usize {
        cell / self.order()
    }

    /// Deck permutations: tables[g][d][cell].
    pub fn deck_tables(&self) -> Vec<Vec<Vec<usize>>> {
        let grp = self.grp();
        let n = grp.order;
        (0..n)
            .map(|g| {
                (0..=self.total.dims())
                    .map(|d| (0..self.total.num_cells(d as isize)).map(|c| (c / n) * n + grp.add(c % n, g)).collect())
                    .collect()
            })
            .collect()
    }

    /// Exact structural checks: free and fiber-transitive deck action,
    /// equivariance of ∂, χ(total) = |G|·χ(base), and cell-level quotient
    /// recovery π(∂(c, g)) = ∂c.
    pub fn verify(&self) -> CoverChecks {
        let n = self.order();
        let tables = self.deck_tables();
        let dims = self.total.dims();
        let mut free = true;
        let mut transitive = true;
        for d in 0..=dims {
            for c in 0..self.base.num_cells(d as isize) {
                let mut hit = vec![false; n];
                for (g, table) in tables.iter().enumerate() {
                    let img = table[d][c * n];
                    if g != 0 && (0..n).any(|h| table[d][c * n + h] == c * n + h) {
                        free = false;
                    }
                    if img / n != c {
                        transitive = false;
                    } else {
                        hit[img % n] = true;
                    }
                }
                transitive &= hit.iter().all(|&h| h);
            }
        }
        let mut equivariant = true;
        let mut quotient = true;
        for d in 1..=dims {
            let tb = self.total.boundary_matrix(d).unwrap();
            let bb = self.base.boundary_matrix(d).unwrap();
            for j in 0..tb.ncols() {
                let col = tb.col(j);
                let mut proj: BTreeMap<usize, i64> = BTreeMap::new();
                for &(r, v) in col {
                    *proj.entry(r / n).or_insert(0) += v;
                }
                proj.retain(|_, v| *v != 0);
                let expect: BTreeMap<usize, i64> = bb.col(j / n).iter().copied().collect();
                quotient &= proj == expect;
                for table in tables.iter().skip(1) {
                    let moved = tb.col(table[d][j]);
                    let mut image: Vec<(usize, i64)> = col.iter().map(|&(r, v)| (table[d - 1][r], v)).collect();
                    image.sort();
                    equivariant &= moved == image.as_slice();
                }
            }
        }
        let euler = self.total.euler_characteristic() == n as i64 * self.base.euler_characteristic();
        CoverChecks {
            free,
            transitive_on_fibers: transitive,
            equivariant_boundary: equivariant,
            euler_multiplicative: euler,
            quotient_recovery: quotient,
        }
    }

    /// Complex JSON of the total space, with the deck data as provenance.
    pub fn to_json(&self) -> String {
        let prov = serde_json::json!({
            "base": self.base.name(),
            "base_hash": self.base.content_hash(),
            "deck_group": self.group,
            "edge_labels": self.edge_labels,
            "tree_edges": self.tree_edges,
        });
        self.total.to_json_pretty(Some(prov))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsDiameterRow {
    pub name: String,
    pub h1_order: u64,
    pub diam_base: usize,
    pub diam_cover: usize,
    /// diam X̃ / diam X (absent when diam X = 0).
    pub ratio: Option<f64>,
    /// diam X̃ / (diam X + 1).
    pub normalized_ratio: f64,
    /// normalized_ratio ≤ |H_1|.
    pub within_fiber_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsDiameterReport {
    pub rows: Vec<TorsDiameterRow>,
    /// Least-squares slope of log(normalized ratio) against log |H_1| over
    /// rows with |H_1| > 1.
    pub loglog_slope: Option<f64>,
    pub all_within_fiber_bound: bool,
}

/// Diameters of each complex and of its universal abelian cover.
///
/// Every row is checked against diam X̃ ≤ |H_1|·(2·diam X + 1) − 1, which
/// always holds for a connected cover; a failure is an invariant error.
pub fn torsdiameter_report(xs: &[CellComplex]) -> Result<TorsDiameterReport> {
    let mut rows = Vec::new();
    for x in xs {
        let cov = universal_abelian_cover(x)?;
        let order = cov.order();
        let diam_base = x.diameter()?;
        let diam_cover = cov.total.diameter()?;
        if diam_cover + 1 > order * (2 * diam_base + 1) {
            return Err(Error::Invariant(format!("cover diameter {diam_cover} of {} exceeds the fiber bound", x.name())));
        }
        let normalized = diam_cover as f64 / (diam_base + 1) as f64;
        rows.push(TorsDiameterRow {
            name: x.name().to_string(),
            h1_order: order as u64,
            diam_base,
            diam_cover,
            ratio: (diam_base > 0).then(|| diam_cover as f64 / diam_base as f64),
            normalized_ratio: normalized,
            within_fiber_bound: diam_cover <= order * (diam_base + 1),
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.h1_order > 1 && r.diam_cover > 0)
        .map(|r| ((r.h1_order as f64).ln(), r.normalized_ratio.ln()))
        .collect();
    let loglog_slope = (pts.len() >= 2)
        .then(|| {
            let n = pts.len() as f64;
            let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            (sxx > 0.0).then(|| sxy / sxx)
        })
        .flatten();
    let all = rows.iter().all(|r| r.within_fiber_bound);
    Ok(TorsDiameterReport { rows, loglog_slope, all_within_fiber_bound: all })
}
