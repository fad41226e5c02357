//! Sparse chains and cochains with exact or floating coefficients.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{q_to_f64, Q};
use crate::complex::{CellComplex, SparseMatrix};
use crate::error::{Error, Result};

/// The L^p norm used for chains: p ∈ {1, 2, ∞}. The mass norm is L¹.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Norm {
    #[serde(rename = "1")]
    L1,
    #[serde(rename = "2")]
    L2,
    #[serde(rename = "inf")]
    LInf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::LInf];

    /// 1/p, with 1/∞ = 0.
    pub fn inverse_exponent(self) -> f64 {
        match self {
            Norm::L1 => 1.0,
            Norm::L2 => 0.5,
            Norm::LInf => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Norm::L1 => "1",
            Norm::L2 => "2",
            Norm::LInf => "inf",
        }
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Norm> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "l1" | "mass" => Ok(Norm::L1),
            "2" | "l2" => Ok(Norm::L2),
            "inf" | "infinity" | "linf" | "∞" => Ok(Norm::LInf),
            other => Err(Error::Argument(format!("unsupported norm p={other}; use 1, 2 or inf"))),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coefficient ring for chains: exact rationals or f64.
pub trait Coefficient: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero_coeff(&self) -> bool;
    /// self += m·x
    fn add_scaled(&mut self, x: &Self, m: i64);
    fn abs_f64(&self) -> f64;
    fn negligible(&self, tol: f64) -> bool;
}

impl Coefficient for Q {
    fn zero() -> Self {
        <Q as Zero>::zero()
    }
    fn from_i64(v: i64) -> Self {
        crate::arith::q(v)
    }
    fn is_zero_coeff(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_scaled(&mut self, x: &Self, m: i64) {
        match m {
            1 => *self += x,
            -1 => *self -= x,
            m => *self += x * crate::arith::q(m),
        }
    }
    fn abs_f64(&self) -> f64 {
        q_to_f64(&self.abs())
    }
    fn negligible(&self, _tol: f64) -> bool {
        Zero::is_zero(self)
    }
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_zero_coeff(&self) -> bool {
        *self == 0.0
    }
    fn add_scaled(&mut self, x: &Self, m: i64) {
        *self += x * m as f64;
    }
    fn abs_f64(&self) -> f64 {
        self.abs()
    }
    fn negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

/// Sparse coefficient vector on the cells of one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain<K: Coefficient> {
    dim: isize,
    coeffs: BTreeMap<usize, K>,
}

pub type QChain = Chain<Q>;
pub type FChain = Chain<f64>;

impl<K: Coefficient> Chain<K> {
    pub fn zero(dim: isize) -> Self {
        Chain { dim, coeffs: BTreeMap::new() }
    }

    pub fn unit(dim: isize, cell: usize) -> Self {
        Self::from_pairs(dim, [(cell, K::from_i64(1))])
    }

    pub fn from_pairs(dim: isize, pairs: impl IntoIterator<Item = (usize, K)>) -> Self {
        let mut c = Chain::zero(dim);
        for (i, v) in pairs {
            c.add_at(i, &v);
        }
        c
    }

    pub fn from_dense(dim: isize, v: &[K]) -> Self {
        Self::from_pairs(dim, v.iter().cloned().enumerate())
    }

    pub fn dim(&self) -> isize {
        self.dim
    }

    pub fn get(&self, i: usize) -> K {
        self.coeffs.get(&i).cloned().unwrap_or_else(K::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &K)> {
        self.coeffs.iter().map(|(&i, v)| (i, v))
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_dense(&self, n: usize) -> Vec<K> {
        let mut v = vec![K::zero(); n];
        for (&i, x) in &self.coeffs {
            v[i] = x.clone();
        }
        v
    }

    /// self[i] += m·x, keeping stored entries nonzero.
    pub fn add_scaled_at(&mut self, i: usize, x: &K, m: i64) {
        let e = self.coeffs.entry(i).or_insert_with(K::zero);
        e.add_scaled(x, m);
        if e.is_zero_coeff() {
            self.coeffs.remove(&i);
        }
    }

    pub fn add_at(&mut self, i: usize, x: &K) {
        self.add_scaled_at(i, x, 1);
    }

    /// self += m·other.
    pub fn add_scaled(&mut self, other: &Chain<K>, m: i64) -> Result<()> {
        if other.dim != self.dim && !other.is_empty() {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        for (&i, x) in &other.coeffs {
            self.add_scaled_at(i, x, m);
        }
        Ok(())
    }

    pub fn plus(&self, other: &Chain<K>) -> Result<Chain<K>> {
        let mut c = self.clone();
        c.add_scaled(other, 1)?;
        Ok(c)
    }

    pub fn minus(&self, other: &Chain<K>) -> Result<Chain<K>> {
        let mut c = self.clone();
        c.add_scaled(other, -1)?;
        Ok(c)
    }

    pub fn negate(&self) -> Chain<K> {
        let mut c = Chain::zero(self.dim);
        for (&i, x) in &self.coeffs {
            c.add_scaled_at(i, x, -1);
        }
        c
    }

    pub fn prune(&mut self, tol: f64) {
        self.coeffs.retain(|_, v| !v.negligible(tol));
    }

    pub fn norm_f64(&self, p: Norm) -> f64 {
        let abs = self.coeffs.values().map(Coefficient::abs_f64);
        match p {
            Norm::L1 => abs.sum(),
            Norm::L2 => abs.map(|a| a * a).sum::<f64>().sqrt(),
            Norm::LInf => abs.fold(0.0, f64::max),
        }
    }

    /// Applies a sparse integer matrix whose columns index this chain's cells.
    pub fn apply_matrix(&self, m: &SparseMatrix, out_dim: isize, tol: f64) -> Chain<K> {
        let mut out = Chain::zero(out_dim);
        for (&j, x) in &self.coeffs {
            for &(r, v) in m.col(j) {
                out.add_scaled_at(r, x, v);
            }
        }
        out.prune(tol);
        out
    }
}

impl QChain {
    pub fn norm_l1(&self) -> Q {
        self.coeffs.values().fold(<Q as Zero>::zero(), |acc, v| acc + v.abs())
    }

    pub fn norm_linf(&self) -> Q {
        self.coeffs.values().map(|v| v.abs()).max().unwrap_or_else(<Q as Zero>::zero)
    }

    pub fn norm_l2_squared(&self) -> Q {
        self.coeffs.values().fold(<Q as Zero>::zero(), |acc, v| acc + v * v)
    }

    /// Exact norm: rational for p ∈ {1, ∞}, square root of a rational for p = 2.
    pub fn norm_exact(&self, p: Norm) -> crate::arith::Magnitude {
        use crate::arith::Magnitude;
        match p {
            Norm::L1 => Magnitude::Rational(self.norm_l1()),
            Norm::LInf => Magnitude::Rational(self.norm_linf()),
            Norm::L2 => Magnitude::SqrtOf(self.norm_l2_squared()),
        }
    }

    pub fn scale(&self, s: &Q) -> QChain {
        if Zero::is_zero(s) {
            return Chain::zero(self.dim);
        }
        Chain { dim: self.dim, coeffs: self.coeffs.iter().map(|(&i, v)| (i, v * s)).collect() }
    }

    pub fn to_f64(&self) -> FChain {
        Chain { dim: self.dim, coeffs: self.coeffs.iter().map(|(&i, v)| (i, q_to_f64(v))).collect() }
    }

    /// Serializable form with coefficients written as "num/den".
    pub fn to_record(&self) -> ChainRecord {
        ChainRecord {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|(&i, v)| (i, v.to_string())).collect(),
        }
    }

    pub fn from_record(r: &ChainRecord) -> Result<QChain> {
        let mut c = Chain::zero(r.dim);
        for (i, s) in &r.coeffs {
            let v = crate::arith::parse_q(s).ok_or_else(|| Error::Parse(format!("bad coefficient {s:?}")))?;
            c.add_at(*i, &v);
        }
        Ok(c)
    }
}

impl FChain {
    pub fn to_record(&self) -> FloatChainRecord {
        FloatChainRecord {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|(&i, &v)| (i, crate::arith::sig12(v))).collect(),
        }
    }
}

/// JSON form of an exact chain: {"dim": i, "coeffs": [[cell, "a/b"], ...]}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub dim: isize,
    pub coeffs: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloatChainRecord {
    pub dim: isize,
    pub coeffs: Vec<(usize, f64)>,
}

impl CellComplex {
    fn check_chain_dim<K: Coefficient>(&self, c: &Chain<K>) -> Result<()> {
        let d = c.dim();
        let lo = if self.augmented() { -1 } else { 0 };
        if d < lo || d > self.dims() as isize {
            return Err(Error::Dimension { dim: d, dims: self.dims() });
        }
        if let Some((&i, _)) = c.coeffs.iter().next_back() {
            if i >= self.num_cells(d) {
                return Err(Error::InvalidComplex(format!("chain refers to cell {i} in dimension {d}")));
            }
        }
        Ok(())
    }

    /// ∂c; entries with |x| ≤ `tol` are dropped (exact mode drops only zeros).
    pub fn apply_boundary<K: Coefficient>(&self, c: &Chain<K>, tol: f64) -> Result<Chain<K>> {
        self.check_chain_dim(c)?;
        if c.dim() < 0 {
            return Err(Error::Dimension { dim: c.dim() - 1, dims: self.dims() });
        }
        Ok(c.apply_matrix(self.boundary_matrix(c.dim() as usize)?, c.dim() - 1, tol))
    }

    /// dc for a cochain c of dimension i (i < dims).
    pub fn apply_coboundary<K: Coefficient>(&self, c: &Chain<K>, tol: f64) -> Result<Chain<K>> {
        self.check_chain_dim(c)?;
        if c.dim() >= self.dims() as isize {
            return Err(Error::Dimension { dim: c.dim() + 1, dims: self.dims() });
        }
        let m = self.coboundary_matrix(c.dim());
        Ok(c.apply_matrix(&m, c.dim() + 1, tol))
    }
}

/// chain_norm(c, p) as a float.
pub fn chain_norm<K: Coefficient>(c: &Chain<K>, p: Norm) -> f64 {
    c.norm_f64(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;
    use crate::complex::build_simplicial;

    #[test]
    fn norms() {
        let c = QChain::from_pairs(1, [(0, q(3)), (1, q(-4))]);
        assert_eq!(c.norm_l1(), q(7));
        assert_eq!(c.norm_linf(), q(4));
        assert_eq!(c.norm_f64(Norm::L2), 5.0);
        let u = QChain::unit(0, 2);
        for p in Norm::ALL {
            assert_eq!(u.norm_f64(p), 1.0);
        }
    }

    #[test]
    fn boundary_of_triangle() {
        let x = build_simplicial(&[vec![0, 1, 2]]).unwrap();
        let t = QChain::unit(2, 0);
        let b = x.apply_boundary(&t, 0.0).unwrap();
        assert_eq!(b.norm_l1(), q(3));
        let bb = x.apply_boundary(&b, 0.0).unwrap();
        assert!(bb.is_empty());
        let z = x.apply_coboundary(&QChain::zero(0), 0.0).unwrap();
        assert!(z.is_empty() && z.dim() == 1);
    }

    #[test]
    fn dimension_checks() {
        let x = build_simplicial(&[vec![0, 1]]).unwrap();
        assert!(x.apply_boundary(&QChain::unit(2, 0), 0.0).is_err());
        assert!(x.apply_coboundary(&QChain::unit(1, 0), 0.0).is_err());
        let aug = x.apply_boundary(&QChain::unit(0, 1), 0.0).unwrap();
        assert_eq!(aug.dim(), -1);
        assert_eq!(aug.get(0), q(1));
    }

    #[test]
    fn parse_norms() {
        assert_eq!("inf".parse::<Norm>().unwrap(), Norm::LInf);
        assert!("3".parse::<Norm>().is_err());
    }

    #[test]
    fn record_round_trip() {
        let c = QChain::from_pairs(1, [(0, crate::arith::qf(1, 3)), (4, q(-2))]);
        assert_eq!(QChain::from_record(&c.to_record()).unwrap(), c);
    }
}
