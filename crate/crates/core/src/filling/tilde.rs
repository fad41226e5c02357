//! The decomposition constant h̃²: every 2-chain α splits as dβ + γ with γ
//! closed, and h̃² measures the cheapest such split.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::cheeger::{cheeger, CheegerOptions, Method, Side, Variant};
use super::{ser_chain, ser_opt_chain};
use crate::arith::{q, Magnitude, Q};
use crate::chain::{Norm, QChain};
use crate::complex::{CellComplex, SparseMatrix};
use crate::error::{Error, Result};
use crate::homology::rank_q;
use crate::linalg;
use crate::lp::{LpOutcome, Simplex};
use crate::par;

/// α = dβ + γ with ∂γ = 0 and its cost ‖β‖_p + ‖γ‖_p.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub norm: Norm,
    #[serde(serialize_with = "ser_chain")]
    pub beta: QChain,
    #[serde(serialize_with = "ser_chain")]
    pub gamma: QChain,
    pub cost: Magnitude,
    /// For p ∈ {1, ∞}: the LP optimum carried an exact certificate.
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TildeValue {
    pub norm: Norm,
    pub method: Method,
    pub value: Magnitude,
    pub inverse: Magnitude,
    pub cohomology_nonzero: bool,
    pub upper_bound: bool,
    pub candidates: usize,
    #[serde(serialize_with = "ser_opt_chain")]
    pub witness: Option<QChain>,
    pub decomposition: Option<Decomposition>,
}

/// LP over (β⁺, β⁻, γ⁺, γ⁻[, t_β, t_γ, slacks]) with dβ + γ = α, ∂γ = 0.
struct DecompLp {
    n1: usize,
    n2: usize,
    lp: Simplex,
}

impl DecompLp {
    fn new(d2: &SparseMatrix, norm: Norm) -> DecompLp {
        let (n1, n2) = (d2.nrows(), d2.ncols());
        let rows = d2.row_lists();
        let qi = |v: i64| q(v);
        let mut cols: Vec<Vec<(usize, Q)>> = Vec::new();
        let linf = norm == Norm::LInf;
        // β_j enters the α rows through row j of ∂₂ (dβ = ∂₂ᵀβ).
        for s in [1, -1] {
            for (j, row) in rows.iter().enumerate() {
                let mut c: Vec<(usize, Q)> = row.iter().map(|&(k, v)| (k, qi(s * v))).collect();
                if linf {
                    c.push((n2 + n1 + j, Q::one()));
                }
                cols.push(c);
            }
        }
        for s in [1, -1] {
            for k in 0..n2 {
                let mut c = vec![(k, qi(s))];
                c.extend(d2.col(k).iter().map(|&(r, v)| (n2 + r, qi(s * v))));
                if linf {
                    c.push((n2 + 2 * n1 + k, Q::one()));
                }
                cols.push(c);
            }
        }
        let mut cost = vec![if linf { Q::zero() } else { Q::one() }; cols.len()];
        let mut m = n2 + n1;
        if linf {
            cols.push((0..n1).map(|j| (n2 + n1 + j, -Q::one())).collect());
            cols.push((0..n2).map(|k| (n2 + 2 * n1 + k, -Q::one())).collect());
            cost.extend([Q::one(), Q::one()]);
            for r in 0..n1 + n2 {
                cols.push(vec![(n2 + n1 + r, Q::one())]);
                cost.push(Q::zero());
            }
            m += n1 + n2;
        }
        DecompLp { n1, n2, lp: Simplex::from_columns(m, cols, cost) }
    }

    fn solve(&mut self, alpha: &[Q], cold: bool) -> Option<(Vec<Q>, Vec<Q>, Q, bool)> {
        let mut rhs = alpha.to_vec();
        rhs.resize(self.lp.rows(), Q::zero());
        let out = if cold { self.lp.solve_cold(&rhs) } else { self.lp.solve(&rhs) };
        let LpOutcome::Optimal(sol) = out else { return None };
        let certified = self.lp.certify(&rhs, &sol);
        let (n1, n2) = (self.n1, self.n2);
        let beta = (0..n1).map(|j| &sol.x[j] - &sol.x[n1 + j]).collect();
        let gamma = (0..n2).map(|k| &sol.x[2 * n1 + k] - &sol.x[2 * n1 + n2 + k]).collect();
        Some((beta, gamma, sol.objective, certified))
    }
}

fn check_dims(x: &CellComplex) -> Result<()> {
    if x.dims() < 2 {
        return Err(Error::Dimension { dim: 2, dims: x.dims() });
    }
    Ok(())
}

fn finish(x: &CellComplex, alpha: &QChain, p: Norm, beta: Vec<Q>, gamma: Vec<Q>, certified: bool) -> Result<Decomposition> {
    let beta = QChain::from_dense(1, &beta);
    let gamma = QChain::from_dense(2, &gamma);
    let d2 = x.boundary_or_zero(2);
    let dbeta = beta.apply_matrix(&d2.transpose(), 2, 0.0);
    if dbeta.plus(&gamma)? != *alpha || !gamma.apply_matrix(&d2, 1, 0.0).is_empty() {
        return Err(Error::Invariant("decomposition does not reassemble α".into()));
    }
    let cost = match p {
        Norm::L2 => Magnitude::Float(beta.norm_f64(p) + gamma.norm_f64(p)),
        _ => Magnitude::Rational(rational_norm(&beta, p) + rational_norm(&gamma, p)),
    };
    Ok(Decomposition { norm: p, beta, gamma, cost, certified })
}

fn rational_norm(c: &QChain, p: Norm) -> Q {
    match p {
        Norm::LInf => c.norm_linf(),
        _ => c.norm_l1(),
    }
}

/// Cheapest split α = dβ + γ with ∂γ = 0. For p ∈ {1, ∞} an exact LP; for
/// p = 2 the orthogonal split of C₂ into im d ⊕ ker ∂ with the least-norm β.
pub fn tilde_h2_decompose(x: &CellComplex, alpha: &QChain, p: Norm) -> Result<Decomposition> {
    check_dims(x)?;
    if alpha.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: alpha.dim() });
    }
    let n2 = x.num_cells(2);
    let d2 = x.boundary_or_zero(2);
    let a = alpha.to_dense(n2);
    match p {
        Norm::L2 => {
            let (beta, _) = orthogonal_split(&d2, &a);
            let dbeta = QChain::from_dense(1, &beta).apply_matrix(&d2.transpose(), 2, 0.0).to_dense(n2);
            let gamma: Vec<Q> = a.iter().zip(&dbeta).map(|(x, y)| x - y).collect();
            finish(x, alpha, p, beta, gamma, true)
        }
        _ => {
            let (beta, gamma, obj, certified) =
                DecompLp::new(&d2, p).solve(&a, true).ok_or_else(|| Error::Invariant("decomposition LP infeasible".into()))?;
            let d = finish(x, alpha, p, beta, gamma, certified)?;
            if d.cost != Magnitude::Rational(obj) {
                return Err(Error::Invariant("decomposition cost disagrees with LP objective".into()));
            }
            Ok(d)
        }
    }
}

/// Least-norm β with dβ the orthogonal projection of α onto im d.
fn orthogonal_split(d2: &SparseMatrix, a: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let n1 = d2.nrows();
    // A = dᵀ as rows over C₁ coordinates: A = ∂₂ᵀ is n2 × n1.
    let at = d2.transpose().to_q_rows();
    let normal = linalg::mat_mul(&linalg::transpose(&at, n1), &at, n1);
    let rhs = linalg::mat_vec(&linalg::transpose(&at, n1), a);
    let y = linalg::least_norm(&normal, n1, &rhs).unwrap_or_else(|| vec![Q::zero(); n1]);
    let dbeta = linalg::mat_vec(&at, &y);
    (y, dbeta)
}

/// h̃²(X, p): the infimum over 2-chains of ‖α‖/cost(α). The cost is a norm
/// on C₂, so the ratio is extremal at vertices of the unit ball: unit cells
/// for p = 1 and sign vectors for p = ∞. For p = 2 it is computed from the
/// orthogonal split, 1/h̃² = √(a² + [ker ∂₂ ≠ 0]) with a = 1/h²_coexact.
pub fn tilde_h2(x: &CellComplex, p: Norm, method: Method, opts: &CheegerOptions) -> Result<TildeValue> {
    let n2 = x.num_cells(2);
    let d2 = x.boundary_or_zero(2);
    let d3 = x.boundary_or_zero(3);
    let cocycle_dim = n2 - rank_q(&d3);
    let cohomology_nonzero = cocycle_dim > rank_q(&d2);
    let base = TildeValue {
        norm: p,
        method,
        value: Magnitude::Infinite,
        inverse: Magnitude::zero(),
        cohomology_nonzero,
        upper_bound: method == Method::Heuristic,
        candidates: 0,
        witness: None,
        decomposition: None,
    };
    if n2 == 0 {
        return Ok(base);
    }
    if method == Method::Brute && n2 > opts.cap {
        return Err(Error::CapExceeded { what: "2-cells for brute enumeration (use lp-enum or heuristic)".into(), found: n2, cap: opts.cap });
    }
    if p == Norm::L2 && method != Method::Heuristic {
        let h = cheeger(x, 2, Norm::L2, Side::Cochain, Variant::Coexact, method, opts)?;
        let a = h.inverse.to_f64();
        let closed = n2 > rank_q(&d2);
        let inv = (a * a + if closed { 1.0 } else { 0.0 }).sqrt();
        return Ok(TildeValue {
            value: Magnitude::Float(1.0 / inv),
            inverse: Magnitude::Float(inv),
            candidates: h.candidates,
            ..base
        });
    }
    let candidates: Vec<Vec<Q>> = match (method, p) {
        (Method::Heuristic, _) => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut out: Vec<Vec<Q>> = (0..n2).map(|k| unit(n2, k)).collect();
            while out.len() < opts.samples.max(n2) {
                let v: Vec<Q> = (0..n2).map(|_| q(rng.random_range(-2..=2))).collect();
                if v.iter().any(|c| !c.is_zero()) {
                    out.push(v);
                }
            }
            out
        }
        (_, Norm::L1) => (0..n2).map(|k| unit(n2, k)).collect(),
        _ => {
            let count = 1u128 << (n2 - 1).min(127);
            if n2 > 100 || count > opts.work_limit {
                return Err(Error::WorkLimit { found: count, limit: opts.work_limit });
            }
            (0..count as u64)
                .map(|mask| (0..n2).map(|k| if k > 0 && mask >> (k - 1) & 1 == 1 { -Q::one() } else { Q::one() }).collect())
                .collect()
        }
    };
    let ratios = par::map_init(
        opts.exec,
        &candidates,
        || (p != Norm::L2).then(|| DecompLp::new(&d2, p)),
        |lp, a| -> Option<Magnitude> {
            let norm_a = match p {
                Norm::L1 => a.iter().fold(Q::zero(), |s, v| s + v.abs()),
                Norm::LInf => a.iter().map(Signed::abs).max().unwrap_or_else(Q::zero),
                Norm::L2 => {
                    let (beta, dbeta) = orthogonal_split(&d2, a);
                    let sq = |v: &[Q]| v.iter().fold(Q::zero(), |s, x| s + x * x);
                    let gamma: Vec<Q> = a.iter().zip(&dbeta).map(|(x, y)| x - y).collect();
                    let cost = crate::arith::q_to_f64(&sq(&beta)).sqrt() + crate::arith::q_to_f64(&sq(&gamma)).sqrt();
                    return Some(Magnitude::Float(cost / crate::arith::q_to_f64(&sq(a)).sqrt()));
                }
            };
            let (_, _, obj, _) = lp.as_mut()?.solve(a, false)?;
            Some(Magnitude::Rational(obj / norm_a))
        },
    );
    let mut best: Option<(usize, Magnitude)> = None;
    for (k, r) in ratios.into_iter().enumerate() {
        let r = r.ok_or_else(|| Error::Invariant("decomposition LP failed".into()))?;
        let better = best.as_ref().is_none_or(|(_, b)| {
            r.exact_cmp(b).unwrap_or_else(|| r.to_f64().total_cmp(&b.to_f64())) == Ordering::Greater
        });
        if better {
            best = Some((k, r));
        }
    }
    let (k, inverse) = best.expect("nonempty candidates");
    let witness = QChain::from_dense(2, &candidates[k]);
    let decomposition = tilde_h2_decompose(x, &witness, p)?;
    Ok(TildeValue {
        value: inverse.recip(),
        inverse,
        candidates: candidates.len(),
        witness: Some(witness),
        decomposition: Some(decomposition),
        ..base
    })
}

fn unit(n: usize, k: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[k] = Q::one();
    v
}
