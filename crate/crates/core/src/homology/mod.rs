//! Integer homology via Smith normal form, universal abelian covers and the
//! chain-contraction probe.

mod cover;
mod probe;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::complex::{CellComplex, SparseMatrix};
use crate::error::{Error, Result};
use crate::linalg::{det_int, int_mat_mul};

pub use cover::{torsdiameter_report, universal_abelian_cover, CoverComplex, TorsDiameterRow, TorsDiameterReport};
pub use probe::{chain_contraction_probe, ProbeReport, TetProbe};

pub type IntMat = Vec<Vec<BigInt>>;

/// U·M·V = D with U, V unimodular and d₁ | d₂ | … on the diagonal of D.
#[derive(Clone, Debug, PartialEq)]
pub struct SnfResult {
    pub u: IntMat,
    pub v: IntMat,
    pub d: IntMat,
}

impl SnfResult {
    /// Diagonal entries d₁, d₂, … (zeros included), length min(rows, cols).
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.len().min(self.v.len())).map(|k| self.d[k][k].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }

    /// Exact check of U·M·V = D, unimodularity, diagonal shape and divisibility.
    pub fn verify(&self, m: &IntMat) -> bool {
        let rows = self.u.len();
        let cols = self.v.len();
        if m.len() != rows || m.iter().any(|r| r.len() != cols) {
            return false;
        }
        if rows > 0 && cols > 0 && int_mat_mul(&int_mat_mul(&self.u, m), &self.v) != self.d {
            return false;
        }
        if !det_int(&self.u).abs().is_one() || !det_int(&self.v).abs().is_one() {
            return false;
        }
        for (i, row) in self.d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i != j && !x.is_zero() {
                    return false;
                }
            }
        }
        let diag = self.diagonal();
        if diag.iter().any(|x| x.is_negative()) {
            return false;
        }
        diag.windows(2).all(|w| if w[0].is_zero() { w[1].is_zero() } else { (&w[1] % &w[0]).is_zero() })
    }
}

fn identity(n: usize) -> IntMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

fn row_axpy(m: &mut IntMat, target: usize, src: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    let (a, b) = if target < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[target], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(target);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in a.iter_mut().zip(b.iter()) {
        if !y.is_zero() {
            *x += f * y;
        }
    }
}

fn col_axpy(m: &mut IntMat, target: usize, src: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        if !row[src].is_zero() {
            let t = f * &row[src];
            row[target] += t;
        }
    }
}

fn swap_cols(m: &mut IntMat, a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

/// Smith normal form with unimodular transforms. Pivots are chosen as the
/// smallest-magnitude nonzero entry of the remaining block.
pub fn snf(m: &IntMat) -> SnfResult {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a = m.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(t) {
                for (j, x) in row.iter().enumerate().skip(t) {
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.magnitude() < a[bi][bj].magnitude()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return SnfResult { u, v, d: a };
            };
            a.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut a, t, pj);
            swap_cols(&mut v, t, pj);
            let mut clean = true;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let f = -a[i][t].div_floor(&a[t][t]);
                    row_axpy(&mut a, i, t, &f);
                    row_axpy(&mut u, i, t, &f);
                    clean &= a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let f = -a[t][j].div_floor(&a[t][t]);
                    col_axpy(&mut a, j, t, &f);
                    col_axpy(&mut v, j, t, &f);
                    clean &= a[t][j].is_zero();
                }
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    row_axpy(&mut a, t, i, &BigInt::one());
                    row_axpy(&mut u, t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut().chain(u[t].iter_mut()) {
                *x = -x.clone();
            }
        }
    }
    SnfResult { u, v, d: a }
}

/// Nonzero invariant factors of a sparse integer matrix, in divisibility
/// order. Unit pivots are eliminated sparsely (Markowitz order); whatever
/// remains goes through the dense Smith form.
pub fn invariant_factors(m: &SparseMatrix) -> Vec<BigInt> {
    let mut rows: Vec<BTreeMap<usize, BigInt>> = vec![BTreeMap::new(); m.nrows()];
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.ncols()];
    for (r, c, v) in m.triplets() {
        rows[r].insert(c, BigInt::from(v));
        cols[c].insert(r);
    }
    let mut row_alive = vec![true; m.nrows()];
    let mut units = 0usize;
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        'scan: for (r, row) in rows.iter().enumerate() {
            if !row_alive[r] {
                continue;
            }
            for (&c, v) in row {
                if v.magnitude().is_one() {
                    let cost = (row.len() - 1) * (cols[c].len() - 1);
                    if best.is_none_or(|b| cost < b.2) {
                        best = Some((r, c, cost));
                        if cost == 0 {
                            break 'scan;
                        }
                    }
                }
            }
        }
        let Some((r, c, _)) = best else { break };
        let pivot_row = std::mem::take(&mut rows[r]);
        let u = pivot_row[&c].clone();
        let others: Vec<usize> = cols[c].iter().copied().filter(|&i| i != r).collect();
        for i in others {
            let f = &rows[i][&c] * &u;
            for (&j, x) in &pivot_row {
                let entry = rows[i].entry(j).or_insert_with(BigInt::zero);
                *entry -= &f * x;
                if entry.is_zero() {
                    rows[i].remove(&j);
                    cols[j].remove(&i);
                } else {
                    cols[j].insert(i);
                }
            }
        }
        for &j in pivot_row.keys() {
            cols[j].remove(&r);
        }
        cols[c].clear();
        row_alive[r] = false;
        units += 1;
    }
    let live_rows: Vec<usize> = (0..rows.len()).filter(|&r| row_alive[r] && !rows[r].is_empty()).collect();
    let live_cols: Vec<usize> = (0..cols.len()).filter(|&c| !cols[c].is_empty()).collect();
    let col_pos: BTreeMap<usize, usize> = live_cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let dense: IntMat = live_rows
        .iter()
        .map(|&r| {
            let mut row = vec![BigInt::zero(); live_cols.len()];
            for (c, v) in &rows[r] {
                row[col_pos[c]] = v.clone();
            }
            row
        })
        .collect();
    let mut out = vec![BigInt::one(); units];
    if !dense.is_empty() && !live_cols.is_empty() {
        out.extend(snf_diagonal(dense).into_iter().filter(|x| !x.is_zero()));
    }
    out
}

/// Diagonal of the Smith form without tracking transforms.
fn snf_diagonal(m: IntMat) -> Vec<BigInt> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a = m;
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(t) {
                for (j, x) in row.iter().enumerate().skip(t) {
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.magnitude() < a[bi][bj].magnitude()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return diag;
            };
            a.swap(t, pi);
            swap_cols(&mut a, t, pj);
            let mut clean = true;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let f = -a[i][t].div_floor(&a[t][t]);
                    row_axpy(&mut a, i, t, &f);
                    clean &= a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let f = -a[t][j].div_floor(&a[t][t]);
                    col_axpy(&mut a, j, t, &f);
                    clean &= a[t][j].is_zero();
                }
            }
            if !clean {
                continue;
            }
            match (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero())) {
                Some(i) => row_axpy(&mut a, t, i, &BigInt::one()),
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag
}

/// Rank over ℚ of a sparse integer matrix.
pub fn rank_q(m: &SparseMatrix) -> usize {
    invariant_factors(m).len()
}

fn serialize_bigints<S: Serializer>(xs: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        match x.to_u64() {
            Some(v) => seq.serialize_element(&v)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

/// ℤ^betti ⊕ ⊕ ℤ/t_k with t₁ | t₂ | … and every t_k > 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub betti: usize,
    #[serde(serialize_with = "serialize_bigints")]
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn trivial() -> Self {
        HomologyGroup { betti: 0, torsion: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.betti == 0
    }

    /// |torsion subgroup| = product of invariant factors.
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().fold(BigInt::one(), |acc, t| acc * t)
    }

    /// Least common multiple of element orders (the last invariant factor).
    pub fn exponent(&self) -> BigInt {
        self.torsion.last().cloned().unwrap_or_else(BigInt::one)
    }

    pub fn from_factors(betti: usize, factors: &[BigInt]) -> Self {
        HomologyGroup { betti, torsion: factors.iter().filter(|x| !x.is_one() && !x.is_zero()).map(|x| x.abs()).collect() }
    }
}

impl std::fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// H_i(X; ℤ) of the (possibly augmented) chain complex.
pub fn homology(x: &CellComplex, i: usize) -> Result<HomologyGroup> {
    if i > x.dims() {
        return Err(Error::Dimension { dim: i as isize, dims: x.dims() });
    }
    let rank_in = rank_q(x.boundary_matrix(i)?);
    let factors = invariant_factors(&x.boundary_or_zero(i as isize + 1));
    let betti = x.num_cells(i as isize) - rank_in - factors.len();
    Ok(HomologyGroup::from_factors(betti, &factors))
}

/// H_0 … H_dims, sharing one elimination per boundary map.
pub fn homology_all(x: &CellComplex) -> Vec<HomologyGroup> {
    let factors: Vec<Vec<BigInt>> = (0..=x.dims() + 1).map(|i| invariant_factors(&x.boundary_or_zero(i as isize))).collect();
    (0..=x.dims())
        .map(|i| {
            let betti = x.num_cells(i as isize) - factors[i].len() - factors[i + 1].len();
            HomologyGroup::from_factors(betti, &factors[i + 1])
        })
        .collect()
}

/// Rational betti numbers b_0 … b_dims.
pub fn betti_numbers(x: &CellComplex) -> Vec<usize> {
    let ranks: Vec<usize> = (0..=x.dims() + 1).map(|i| rank_q(&x.boundary_or_zero(i as isize))).collect();
    (0..=x.dims()).map(|i| x.num_cells(i as isize) - ranks[i] - ranks[i + 1]).collect()
}

pub fn int_rows(m: &[Vec<i64>]) -> IntMat {
    m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}
