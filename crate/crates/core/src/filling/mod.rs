//! Minimal fillings by exact linear programming, and the L^p Cheeger
//! constants built on them.

mod cheeger;
mod enumerate;
mod tilde;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{Magnitude, Q};
use crate::chain::{Norm, QChain};
use crate::complex::{CellComplex, SparseMatrix};
use crate::error::{Error, Result};
use crate::homology::rank_q;
use crate::linalg::{self, QMat};
use crate::lp::{LpOutcome, Simplex};

pub use cheeger::{cheeger, CheegerOptions, CheegerValue, Method, Side, Variant};
pub use enumerate::{cube_vertices, elementary_vectors};
pub use tilde::{tilde_h2, tilde_h2_decompose, Decomposition, TildeValue};

/// Result of min ‖β‖_p subject to ∂β = α.
#[derive(Clone, Debug, Serialize)]
pub struct FillingResult {
    pub norm: Norm,
    pub value: Magnitude,
    #[serde(serialize_with = "ser_opt_chain")]
    pub witness: Option<QChain>,
    pub feasible: bool,
    /// The LP optimum carried an exact primal-dual certificate (p ∈ {1, ∞}).
    pub certified: bool,
}

pub(crate) fn ser_chain<S: serde::Serializer>(c: &QChain, s: S) -> std::result::Result<S::Ok, S::Error> {
    c.to_record().serialize(s)
}

pub(crate) fn ser_opt_chain<S: serde::Serializer>(c: &Option<QChain>, s: S) -> std::result::Result<S::Ok, S::Error> {
    c.as_ref().map(QChain::to_record).serialize(s)
}

/// Exact ratio of two magnitudes of the same kind.
pub(crate) fn mag_div(a: &Magnitude, b: &Magnitude) -> Magnitude {
    match (a, b) {
        (_, m) if m.is_zero() => Magnitude::Infinite,
        (Magnitude::Infinite, _) => Magnitude::Infinite,
        (Magnitude::Rational(x), Magnitude::Rational(y)) => Magnitude::Rational(x / y),
        (Magnitude::SqrtOf(x), Magnitude::SqrtOf(y)) => Magnitude::SqrtOf(x / y),
        _ => Magnitude::Float(a.to_f64() / b.to_f64()),
    }
}

/// Whether α lies in the column span of `b`, by exact rank comparison of
/// [B | α] against B.
pub fn is_boundary(b: &SparseMatrix, alpha: &[Q]) -> bool {
    if alpha.iter().all(Zero::is_zero) {
        return true;
    }
    if b.ncols() == 0 {
        return false;
    }
    let l = alpha.iter().fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Option<Vec<(usize, i64)>> = alpha
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(r, x)| (x * Q::from_integer(l.clone())).to_integer().to_i64().map(|v| (r, v)))
        .collect();
    match scaled {
        Some(col) => {
            let mut cols = b.columns().to_vec();
            cols.push(col);
            rank_q(&SparseMatrix::from_columns(b.nrows(), cols)) == rank_q(b)
        }
        None => linalg::solve(&b.to_q_rows(), b.ncols(), alpha).is_some(),
    }
}

/// Reusable solver for fillings through one boundary map. For p ∈ {1, ∞}
/// the LP basis is kept between calls (warm start).
pub struct FillingEngine {
    norm: Norm,
    b: SparseMatrix,
    lp: Option<Simplex>,
    dense: Option<QMat>,
}

impl FillingEngine {
    pub fn new(b: &SparseMatrix, norm: Norm) -> FillingEngine {
        let lp = (b.ncols() > 0 && norm != Norm::L2).then(|| Self::build_lp(b, norm));
        let dense = (norm == Norm::L2).then(|| b.to_q_rows());
        FillingEngine { norm, b: b.clone(), lp, dense }
    }

    fn build_lp(b: &SparseMatrix, norm: Norm) -> Simplex {
        let (m, n) = (b.nrows(), b.ncols());
        let col = |j: usize, s: i64| -> Vec<(usize, Q)> { b.col(j).iter().map(|&(r, v)| (r, crate::arith::q(s * v))).collect() };
        match norm {
            Norm::L1 => {
                let cols = (0..n).map(|j| col(j, 1)).chain((0..n).map(|j| col(j, -1))).collect();
                Simplex::from_columns(m, cols, vec![Q::one(); 2 * n])
            }
            Norm::LInf => {
                let mut cols = Vec::with_capacity(3 * n + 1);
                let mut cost = Vec::with_capacity(3 * n + 1);
                for s in [1, -1] {
                    for j in 0..n {
                        let mut c = col(j, s);
                        c.push((m + j, Q::one()));
                        cols.push(c);
                        cost.push(Q::zero());
                    }
                }
                cols.push((0..n).map(|j| (m + j, -Q::one())).collect());
                cost.push(Q::one());
                for j in 0..n {
                    cols.push(vec![(m + j, Q::one())]);
                    cost.push(Q::zero());
                }
                Simplex::from_columns(m + n, cols, cost)
            }
            Norm::L2 => unreachable!("L2 fillings use least norm solutions"),
        }
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    fn rhs(&self, alpha: &[Q]) -> Vec<Q> {
        let mut b = alpha.to_vec();
        if self.norm == Norm::LInf {
            b.extend(std::iter::repeat_n(Q::zero(), self.b.ncols()));
        }
        b
    }

    /// Minimal filling of α (dense over the rows of ∂). `None` when the LP or
    /// the normal equations report infeasibility.
    pub fn solve(&mut self, alpha: &[Q], cold: bool) -> Option<(Vec<Q>, Magnitude, bool)> {
        let n = self.b.ncols();
        if alpha.iter().all(Zero::is_zero) {
            return Some((vec![Q::zero(); n], Magnitude::zero(), true));
        }
        match self.norm {
            Norm::L2 => {
                let beta = linalg::least_norm(self.dense.as_ref().unwrap(), n, alpha)?;
                let sq = beta.iter().fold(Q::zero(), |acc, x| acc + x * x);
                Some((beta, Magnitude::SqrtOf(sq), true))
            }
            _ => {
                let rhs = self.rhs(alpha);
                let lp = self.lp.as_mut()?;
                let out = if cold { lp.solve_cold(&rhs) } else { lp.solve(&rhs) };
                let LpOutcome::Optimal(sol) = out else { return None };
                let certified = lp.certify(&rhs, &sol);
                let beta: Vec<Q> = (0..n).map(|j| &sol.x[j] - &sol.x[n + j]).collect();
                let value = match self.norm {
                    Norm::L1 => beta.iter().fold(Q::zero(), |acc, x| acc + x.abs()),
                    _ => beta.iter().map(Signed::abs).max().unwrap_or_else(Q::zero),
                };
                if value != sol.objective {
                    return None;
                }
                Some((beta, Magnitude::Rational(value), certified))
            }
        }
    }

    pub fn value(&mut self, alpha: &[Q]) -> Option<Magnitude> {
        self.solve(alpha, false).map(|(_, v, _)| v)
    }
}

/// min ‖β‖_p over (i+1)-chains β with ∂β = α. Infeasibility is decided by
/// an exact rank test, never by the LP alone.
pub fn min_filling(x: &CellComplex, alpha: &QChain, p: Norm) -> Result<FillingResult> {
    let i = alpha.dim();
    let lo = if x.augmented() { -1 } else { 0 };
    if i < lo || i > x.dims() as isize {
        return Err(Error::Dimension { dim: i, dims: x.dims() });
    }
    let m = x.num_cells(i);
    if alpha.iter().any(|(c, _)| c >= m) {
        return Err(Error::InvalidComplex(format!("chain refers to a cell outside dimension {i}")));
    }
    let b = x.boundary_or_zero(i + 1);
    let dense = alpha.to_dense(m);
    if !is_boundary(&b, &dense) {
        return Ok(FillingResult { norm: p, value: Magnitude::Infinite, witness: None, feasible: false, certified: true });
    }
    let mut engine = FillingEngine::new(&b, p);
    let (beta, value, certified) = engine
        .solve(&dense, true)
        .ok_or_else(|| Error::Invariant("filling solver failed on a boundary".into()))?;
    let witness = QChain::from_dense(i + 1, &beta);
    if witness.apply_matrix(&b, i, 0.0) != *alpha || witness.norm_exact(p) != value {
        return Err(Error::Invariant("filling witness does not verify".into()));
    }
    Ok(FillingResult { norm: p, value, witness: Some(witness), feasible: true, certified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qf};
    use crate::build_simplicial;
    use crate::constructors::simplex_boundary;

    #[test]
    fn triangle_boundary_filled_by_triangle() {
        let x = build_simplicial(&[vec![0, 1, 2]]).unwrap();
        let alpha = QChain::from_pairs(1, [(0, q(1)), (1, q(-1)), (2, q(1))]);
        for p in Norm::ALL {
            let r = min_filling(&x, &alpha, p).unwrap();
            assert!(r.feasible && r.certified);
            assert_eq!(r.value.to_f64(), 1.0);
            assert_eq!(r.witness.unwrap(), QChain::unit(2, 0));
        }
    }

    #[test]
    fn zero_chain_and_infeasible() {
        let x = simplex_boundary(2).unwrap();
        let r = min_filling(&x, &QChain::zero(0), Norm::L1).unwrap();
        assert!(r.value.is_zero());
        let cyc = QChain::from_pairs(1, [(0, q(1)), (1, q(-1)), (2, q(1))]);
        let r = min_filling(&x, &cyc, Norm::L1).unwrap();
        assert!(!r.feasible && r.value.is_infinite());
    }

    #[test]
    fn tetrahedron_face_prefers_itself() {
        let x = simplex_boundary(3).unwrap();
        let face = QChain::unit(2, 0);
        let alpha = x.apply_boundary(&face, 0.0).unwrap();
        let r = min_filling(&x, &alpha, Norm::L1).unwrap();
        assert_eq!(r.value, Magnitude::Rational(q(1)));
        let r = min_filling(&x, &alpha, Norm::LInf).unwrap();
        assert_eq!(r.value, Magnitude::Rational(qf(1, 2)));
        let r = min_filling(&x, &alpha, Norm::L2).unwrap();
        // β = face − t·(2-cycle): minimized at t = 1/4 with ‖β‖² = 9/16 + 3/16
        assert_eq!(r.value, Magnitude::SqrtOf(qf(3, 4)));
    }

    #[test]
    fn zero_cycle_filled_by_path() {
        let x = crate::constructors::graph(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let alpha = QChain::from_pairs(0, [(0, q(-1)), (3, q(1))]);
        let r = min_filling(&x, &alpha, Norm::L1).unwrap();
        assert_eq!(r.value, Magnitude::Rational(q(3)));
        let aug = QChain::unit(0, 2);
        let r = min_filling(&x, &aug, Norm::L1).unwrap();
        assert!(!r.feasible);
        let star = QChain::unit(-1, 0);
        let r = min_filling(&x, &star, Norm::L1).unwrap();
        assert_eq!(r.value, Magnitude::Rational(q(1)));
    }
}
