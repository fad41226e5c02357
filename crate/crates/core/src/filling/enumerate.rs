//! Exhaustive enumeration of extreme cycles: circuits of a kernel (the
//! vertices of the L¹ unit ball of ker M) and vertices of ker M ∩ [−1, 1]ⁿ.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::arith::Q;
use crate::error::{Error, Result};
use crate::linalg::{self, QMat};

struct Echelon {
    vec: Vec<Q>,
    pivot: usize,
    comb: BTreeMap<usize, Q>,
}

struct CircuitSearch<'a> {
    cols: Vec<Vec<Q>>,
    rank: usize,
    work: u128,
    limit: u128,
    out: &'a mut Vec<Vec<Q>>,
}

impl CircuitSearch<'_> {
    fn tick(&mut self) -> Result<()> {
        self.work += 1;
        if self.work > self.limit {
            return Err(Error::WorkLimit { found: self.work, limit: self.limit });
        }
        Ok(())
    }

    /// Writes column j as residual + Σ coef_k v_k over the current basis.
    fn reduce(&self, j: usize, basis: &[Echelon]) -> (Vec<Q>, BTreeMap<usize, Q>) {
        let mut r = self.cols[j].clone();
        let mut coef: BTreeMap<usize, Q> = BTreeMap::new();
        for e in basis {
            if r[e.pivot].is_zero() {
                continue;
            }
            let f = &r[e.pivot] / &e.vec[e.pivot];
            for (x, y) in r.iter_mut().zip(&e.vec) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            for (k, c) in &e.comb {
                let v = coef.entry(*k).or_insert_with(Q::zero);
                *v += &f * c;
            }
        }
        coef.retain(|_, v| !v.is_zero());
        (r, coef)
    }

    fn dfs(&mut self, set: &mut Vec<usize>, basis: &mut Vec<Echelon>) -> Result<()> {
        let start = set.last().map_or(0, |&l| l + 1);
        for j in start..self.cols.len() {
            self.tick()?;
            let (r, coef) = self.reduce(j, basis);
            match r.iter().position(|x| !x.is_zero()) {
                None => {
                    if coef.len() == set.len() {
                        let mut v = vec![Q::zero(); self.cols.len()];
                        for (k, c) in coef {
                            v[k] = c;
                        }
                        v[j] = -Q::one();
                        self.out.push(primitive(&v));
                    }
                }
                Some(pivot) => {
                    if set.len() < self.rank {
                        let mut comb: BTreeMap<usize, Q> = coef.into_iter().map(|(k, c)| (k, -c)).collect();
                        comb.insert(j, Q::one());
                        basis.push(Echelon { vec: r, pivot, comb });
                        set.push(j);
                        self.dfs(set, basis)?;
                        set.pop();
                        basis.pop();
                    }
                }
            }
        }
        Ok(())
    }
}

fn primitive(v: &[Q]) -> Vec<Q> {
    let mut w: Vec<Q> = linalg::primitive_integer(v).into_iter().map(Q::from_integer).collect();
    if w.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        w.iter_mut().for_each(|x| *x = -x.clone());
    }
    w
}

/// All circuits (support-minimal nonzero vectors) of ker M, each as a
/// primitive integer vector with positive leading entry. Every circuit is
/// found exactly once, as the dependency closing its independent prefix.
pub fn elementary_vectors(m: &QMat, ncols: usize, work_limit: u128) -> Result<Vec<Vec<Q>>> {
    let mut r = m.clone();
    let pivots = linalg::rref(&mut r, ncols);
    r.truncate(pivots.len());
    let cols: Vec<Vec<Q>> = (0..ncols).map(|j| r.iter().map(|row| row[j].clone()).collect()).collect();
    let mut out = Vec::new();
    let mut search = CircuitSearch { cols, rank: pivots.len(), work: 0, limit: work_limit, out: &mut out };
    search.dfs(&mut Vec::new(), &mut Vec::new())?;
    Ok(out)
}

/// Vertices of the polytope ker M ∩ [−1, 1]ⁿ, one representative per ±
/// pair. A vertex has k = dim ker M coordinates at ±1 on which the basis
/// restriction is invertible.
pub fn cube_vertices(m: &QMat, ncols: usize, work_limit: u128) -> Result<Vec<Vec<Q>>> {
    let basis = linalg::kernel_basis(m, ncols);
    let k = basis.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut found: BTreeSet<Vec<Q>> = BTreeSet::new();
    let mut work: u128 = 0;
    for rows in crate::constructors::combinations(ncols, k) {
        work += 1 + (1u128 << (k - 1));
        if work > work_limit {
            return Err(Error::WorkLimit { found: work, limit: work_limit });
        }
        let sub: QMat = rows.iter().map(|&r| basis.iter().map(|b| b[r].clone()).collect()).collect();
        let Some(inv) = inverse(&sub, k) else { continue };
        for mask in 0..(1u64 << (k - 1)) {
            let s: Vec<Q> = (0..k)
                .map(|t| if t > 0 && mask >> (t - 1) & 1 == 1 { -Q::one() } else { Q::one() })
                .collect();
            let c = linalg::mat_vec(&inv, &s);
            let x: Vec<Q> = (0..ncols).map(|l| basis.iter().zip(&c).fold(Q::zero(), |acc, (b, ci)| acc + &b[l] * ci)).collect();
            if x.iter().all(|v| v.abs() <= Q::one()) {
                let lead_neg = x.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative());
                found.insert(if lead_neg { x.iter().map(|v| -v).collect() } else { x });
            }
        }
    }
    Ok(found.into_iter().collect())
}

fn inverse(a: &QMat, k: usize) -> Option<QMat> {
    let mut aug: QMat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = linalg::rref(&mut aug, 2 * k);
    if pivots.len() < k || pivots[k - 1] >= k {
        return None;
    }
    Some(aug.into_iter().map(|r| r[k..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;

    fn qm(rows: &[&[i64]]) -> QMat {
        rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()
    }

    #[test]
    fn circuits_of_a_triangle_with_chord() {
        // Graph with edges 01, 12, 02, 23, 13: three cycles.
        let m = qm(&[&[-1, 0, -1, 0, 0], &[1, -1, 0, 0, -1], &[0, 1, 1, -1, 0], &[0, 0, 0, 1, 1]]);
        let c = elementary_vectors(&m, 5, 1_000).unwrap();
        assert_eq!(c.len(), 3);
        for v in &c {
            assert!(linalg::mat_vec(&m, v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn circuits_of_full_kernel() {
        let c = elementary_vectors(&Vec::new(), 3, 1_000).unwrap();
        assert_eq!(c, vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]]);
    }

    #[test]
    fn work_limit_trips() {
        let m = qm(&[&[1, 1, 1, 1, 1, 1, 1, 1]]);
        assert!(matches!(elementary_vectors(&m, 8, 5), Err(Error::WorkLimit { .. })));
        // circuits of a single all-ones row: every pair, 28 of them
        assert_eq!(elementary_vectors(&m, 8, 100_000).unwrap().len(), 28);
    }

    #[test]
    fn cube_vertices_of_a_line_and_a_plane() {
        let m = qm(&[&[1, -2]]);
        assert_eq!(cube_vertices(&m, 2, 100).unwrap(), vec![vec![q(1), crate::arith::qf(1, 2)]]);
        let m = qm(&[&[1, 1, 1]]);
        // hexagon: six vertices, three ± pairs
        assert_eq!(cube_vertices(&m, 3, 100).unwrap().len(), 3);
    }
}
