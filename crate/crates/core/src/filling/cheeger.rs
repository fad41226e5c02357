//! Cheeger constants h_i, h^i and their exact/coexact variants.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use super::{enumerate, is_boundary, mag_div, ser_opt_chain, FillingEngine};
use crate::arith::{q_to_f64, Magnitude, Q};
use crate::chain::{FChain, Norm, QChain};
use crate::complex::{CellComplex, SparseMatrix};
use crate::error::{Error, Result};
use crate::homology::rank_q;
use crate::linalg::{self, QMat};
use crate::par::{self, Execution};

macro_rules! string_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::Argument(format!("unknown {} {s:?}", stringify!($name).to_lowercase()))),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }
    };
}

string_enum!(Side { Chain => "chain", Cochain => "cochain" });
string_enum!(Variant { Plain => "plain", Exact => "exact", Coexact => "coexact" });
string_enum!(Method { Brute => "brute", LpEnum => "lp-enum", Heuristic => "heuristic" });

#[derive(Clone, Debug)]
pub struct CheegerOptions {
    /// Cell cap for `Method::Brute`.
    pub cap: usize,
    /// Enumeration work budget (candidate extensions examined).
    pub work_limit: u128,
    /// Random cycles drawn by `Method::Heuristic`.
    pub samples: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for CheegerOptions {
    fn default() -> Self {
        CheegerOptions { cap: 30, work_limit: 10_000_000, samples: 256, seed: 0, exec: Execution::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheegerValue {
    pub side: Side,
    pub dim: usize,
    pub norm: Norm,
    pub variant: Variant,
    pub method: Method,
    /// h, the infimum of ‖α‖/min‖β‖.
    pub value: Magnitude,
    /// 1/h, the supremum of min‖β‖/‖α‖.
    pub inverse: Magnitude,
    pub homology_nonzero: bool,
    /// `value` is only an upper bound on h (sampled candidates).
    pub upper_bound: bool,
    pub candidates: usize,
    #[serde(serialize_with = "ser_opt_chain")]
    pub witness_cycle: Option<QChain>,
    #[serde(serialize_with = "ser_opt_chain")]
    pub witness_filling: Option<QChain>,
    #[serde(serialize_with = "ser_opt_fchain")]
    pub witness_cycle_float: Option<FChain>,
}

fn ser_opt_fchain<S: Serializer>(c: &Option<FChain>, s: S) -> std::result::Result<S::Ok, S::Error> {
    c.as_ref().map(FChain::to_record).serialize(s)
}

struct Core {
    value: Magnitude,
    inverse: Magnitude,
    homology_nonzero: bool,
    candidates: usize,
    cycle: Option<Vec<Q>>,
    filling: Option<Vec<Q>>,
    cycle_float: Option<Vec<f64>>,
}

/// Cheeger constant of `x` in dimension `i`. The cochain side runs the chain
/// machinery on the transposed complex, where coexact cochains become exact
/// chains.
pub fn cheeger(x: &CellComplex, i: usize, p: Norm, side: Side, variant: Variant, method: Method, opts: &CheegerOptions) -> Result<CheegerValue> {
    if i > x.dims() {
        return Err(Error::Dimension { dim: i as isize, dims: x.dims() });
    }
    let restrict = match (side, variant) {
        (_, Variant::Plain) => false,
        (Side::Chain, Variant::Exact) | (Side::Cochain, Variant::Coexact) => true,
        _ => return Err(Error::Argument(format!("variant {variant} does not apply to the {side} side"))),
    };
    let transposed;
    let (y, j) = match side {
        Side::Chain => (x, i),
        Side::Cochain => {
            transposed = x.transpose();
            (&transposed, x.dims() - i)
        }
    };
    let core = chain_core(y, j, p, restrict, method, opts)?;
    let (cycle_dim, fill_dim) = match side {
        Side::Chain => (i as isize, i as isize + 1),
        Side::Cochain => (i as isize, i as isize - 1),
    };
    Ok(CheegerValue {
        side,
        dim: i,
        norm: p,
        variant,
        method,
        value: core.value,
        inverse: core.inverse,
        homology_nonzero: core.homology_nonzero,
        upper_bound: method == Method::Heuristic,
        candidates: core.candidates,
        witness_cycle: core.cycle.map(|v| QChain::from_dense(cycle_dim, &v)),
        witness_filling: core.filling.map(|v| QChain::from_dense(fill_dim, &v)),
        witness_cycle_float: core.cycle_float.map(|v| FChain::from_dense(cycle_dim, &v)),
    })
}

fn norm_of(v: &[Q], p: Norm) -> Magnitude {
    match p {
        Norm::L1 => Magnitude::Rational(v.iter().fold(Q::zero(), |a, x| a + x.abs())),
        Norm::LInf => Magnitude::Rational(v.iter().map(Signed::abs).max().unwrap_or_else(Q::zero)),
        Norm::L2 => Magnitude::SqrtOf(v.iter().fold(Q::zero(), |a, x| a + x * x)),
    }
}

fn cmp_mag(a: &Magnitude, b: &Magnitude) -> Ordering {
    a.exact_cmp(b).unwrap_or_else(|| a.to_f64().total_cmp(&b.to_f64()))
}

fn chain_core(y: &CellComplex, j: usize, p: Norm, restrict: bool, method: Method, opts: &CheegerOptions) -> Result<Core> {
    let n = y.num_cells(j as isize);
    if method == Method::Brute && n > opts.cap {
        return Err(Error::CapExceeded { what: format!("{j}-cells for brute enumeration (use lp-enum or heuristic)"), found: n, cap: opts.cap });
    }
    let cyc = y.boundary_or_zero(j as isize);
    let fill = y.boundary_or_zero(j as isize + 1);
    let rank_fill = rank_q(&fill);
    let nullity = n - rank_q(&cyc);
    let homology_nonzero = nullity > rank_fill;
    let empty = |value: Magnitude, inverse: Magnitude, cycle: Option<Vec<Q>>| Core {
        value,
        inverse,
        homology_nonzero,
        candidates: 0,
        cycle,
        filling: None,
        cycle_float: None,
    };
    if homology_nonzero && !restrict {
        let witness = linalg::kernel_basis(&cyc.to_q_rows(), n).into_iter().find(|v| !is_boundary(&fill, v));
        return Ok(empty(Magnitude::zero(), Magnitude::Infinite, witness));
    }
    if rank_fill == 0 {
        return Ok(empty(Magnitude::Infinite, Magnitude::zero(), None));
    }
    // The domain is W = im ∂_{j+1}: ker ∂_j for the plain variant (H_j = 0
    // here), the left kernel of ∂_{j+1} for the restricted one.
    let domain: QMat = if restrict { linalg::kernel_basis(&fill.transpose().to_q_rows(), n) } else { cyc.to_q_rows() };
    let candidates = match (method, p) {
        (Method::Heuristic, _) => sample_cycles(&linalg::kernel_basis(&domain, n), opts),
        (_, Norm::L1) => enumerate::elementary_vectors(&domain, n, opts.work_limit)?,
        (_, Norm::LInf) => enumerate::cube_vertices(&domain, n, opts.work_limit)?,
        (_, Norm::L2) => return l2_operator(&fill, n, homology_nonzero),
    };
    let best = best_ratio(&fill, p, &candidates, opts.exec)?;
    let alpha = &candidates[best.0];
    let (beta, _, _) = FillingEngine::new(&fill, p)
        .solve(alpha, true)
        .ok_or_else(|| Error::Invariant("witness cycle has no filling".into()))?;
    Ok(Core {
        value: best.1.recip(),
        inverse: best.1,
        homology_nonzero,
        candidates: candidates.len(),
        cycle: Some(alpha.clone()),
        filling: Some(beta),
        cycle_float: None,
    })
}

/// Index and value of the largest filling ratio; the first index wins ties.
fn best_ratio(fill: &SparseMatrix, p: Norm, candidates: &[Vec<Q>], exec: Execution) -> Result<(usize, Magnitude)> {
    let ratios = par::map_init(
        exec,
        candidates,
        || FillingEngine::new(fill, p),
        |eng, alpha| eng.value(alpha).map(|f| mag_div(&f, &norm_of(alpha, p))),
    );
    let mut best: Option<(usize, Magnitude)> = None;
    for (k, r) in ratios.into_iter().enumerate() {
        let r = r.ok_or_else(|| Error::Invariant(format!("candidate cycle {k} has no filling")))?;
        if best.as_ref().is_none_or(|(_, b)| cmp_mag(&r, b) == Ordering::Greater) {
            best = Some((k, r));
        }
    }
    best.ok_or_else(|| Error::Invariant("no candidate cycles".into()))
}

fn sample_cycles(basis: &[Vec<Q>], opts: &CheegerOptions) -> Vec<Vec<Q>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = basis.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<Q>> = basis.to_vec();
    while out.len() < opts.samples.max(basis.len()) {
        let mut v = vec![Q::zero(); n];
        for b in basis {
            let c: i64 = rng.random_range(-2..=2);
            if c != 0 {
                let c = Q::from_integer(c.into());
                for (x, y) in v.iter_mut().zip(b) {
                    *x += &c * y;
                }
            }
        }
        if v.iter().any(|x| !x.is_zero()) {
            out.push(v);
        }
    }
    out
}

/// Solves (A Aᵀ) Y = R for several right-hand sides with one elimination.
fn least_norm_many(a: &QMat, ncols: usize, rhs: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let m = a.len();
    let at = linalg::transpose(a, ncols);
    let gram = linalg::mat_mul(a, &at, m);
    let k = rhs.len();
    let mut aug: QMat = (0..m)
        .map(|r| {
            let mut row = gram[r].clone();
            row.extend(rhs.iter().map(|v| v[r].clone()));
            row
        })
        .collect();
    let pivots = linalg::rref(&mut aug, m + k);
    if pivots.iter().any(|&c| c >= m) {
        return None;
    }
    Some(
        (0..k)
            .map(|t| {
                let mut y = vec![Q::zero(); m];
                for (r, &c) in pivots.iter().enumerate() {
                    y[c] = aug[r][m + t].clone();
                }
                linalg::mat_vec(&at, &y)
            })
            .collect(),
    )
}

/// L² constant as an operator norm: 1/h² is the top generalized eigenvalue
/// of (FK)ᵀ(FK) against KᵀK, where the columns of K span im ∂ and F is the
/// exact least-norm filling map.
fn l2_operator(fill: &SparseMatrix, n: usize, homology_nonzero: bool) -> Result<Core> {
    let dense = fill.to_q_rows();
    let mut echelon = dense.clone();
    let cols: Vec<Vec<Q>> = linalg::rref(&mut echelon, fill.ncols())
        .into_iter()
        .map(|j| dense.iter().map(|row| row[j].clone()).collect())
        .collect();
    let k = cols.len();
    let fillings = least_norm_many(&dense, fill.ncols(), &cols).ok_or_else(|| Error::Invariant("least-norm system inconsistent".into()))?;
    let dot = |a: &[Q], b: &[Q]| a.iter().zip(b).fold(Q::zero(), |s, (x, y)| s + x * y);
    let g = DMatrix::from_fn(k, k, |r, c| q_to_f64(&dot(&cols[r], &cols[c])));
    let a = DMatrix::from_fn(k, k, |r, c| q_to_f64(&dot(&fillings[r], &fillings[c])));
    let chol = g.clone().cholesky().ok_or_else(|| Error::Invariant("cycle Gram matrix not positive definite".into()))?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or_else(|| Error::Invariant("singular Cholesky factor".into()))?;
    let mut m = &linv * &a * linv.transpose();
    m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    let (top, &lambda) = eig.eigenvalues.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap();
    let coeff = linv.transpose() * eig.eigenvectors.column(top);
    let alpha: Vec<f64> = (0..n).map(|r| (0..k).map(|c| q_to_f64(&cols[c][r]) * coeff[c]).sum()).collect();
    let scale = alpha.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let inverse = lambda.max(0.0).sqrt();
    Ok(Core {
        value: if inverse > 0.0 { Magnitude::Float(1.0 / inverse) } else { Magnitude::Infinite },
        inverse: Magnitude::Float(inverse),
        homology_nonzero,
        candidates: k,
        cycle: None,
        filling: None,
        cycle_float: Some(alpha.iter().map(|v| v / scale).collect()),
    })
}
