//! Homology of simultaneous slope-q surgery on a framed link in S³, from its
//! linking matrix.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{q, serialize_q, Q};
use crate::error::{Error, Result};
use crate::homology::{snf, HomologyGroup};
use crate::linalg::det_int;
use crate::par::{self, Execution};

/// Linking matrix of an n-component framed link; the diagonal holds the
/// framing self-linking lk(λ_i, L_i).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramedLink {
    pub lk: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl FramedLink {
    pub fn new(lk: Vec<Vec<i64>>) -> Result<FramedLink> {
        let link = FramedLink { lk, names: None };
        link.validate()?;
        Ok(link)
    }

    pub fn unknot() -> FramedLink {
        FramedLink { lk: vec![vec![0]], names: None }
    }

    pub fn hopf() -> FramedLink {
        FramedLink { lk: vec![vec![0, 1], vec![1, 0]], names: None }
    }

    pub fn n(&self) -> usize {
        self.lk.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        for (i, row) in self.lk.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse(format!("linking matrix row {} has {} entries, expected {n}", i + 1, row.len())));
            }
            for j in 0..i {
                if row[j] != self.lk[j][i] {
                    return Err(Error::Parse(format!("linking matrix is not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        if let Some(names) = &self.names {
            if names.len() != n {
                return Err(Error::Parse(format!("{} names for {n} components", names.len())));
            }
        }
        Ok(())
    }

    /// Reads either JSON ({"lk": [[...]], "names": [...]}) or a CSV matrix.
    pub fn parse(text: &str) -> Result<FramedLink> {
        let trimmed = text.trim_start();
        let link = if trimmed.starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("link JSON: {e}")))?
        } else {
            let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
            let mut lk = Vec::new();
            for (line, rec) in reader.records().enumerate() {
                let rec = rec.map_err(|e| Error::Parse(format!("link CSV line {}: {e}", line + 1)))?;
                let row = rec
                    .iter()
                    .map(|s| s.parse::<i64>().map_err(|_| Error::Parse(format!("link CSV line {}: bad integer {s:?}", line + 1))))
                    .collect::<Result<Vec<_>>>()?;
                lk.push(row);
            }
            FramedLink { lk, names: None }
        };
        if link.n() == 0 {
            return Err(Error::Parse("empty linking matrix".into()));
        }
        link.validate()?;
        Ok(link)
    }

    /// max_i Σ_j |Lk_ij|.
    pub fn max_row_sum(&self) -> i64 {
        self.lk.iter().map(|r| r.iter().map(|x| x.abs()).sum()).max().unwrap_or(0)
    }
}

/// q·I + Lk.
pub fn presentation_matrix(link: &FramedLink, slope: i64) -> Vec<Vec<i64>> {
    link.lk
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().map(|(j, &x)| if i == j { x + slope } else { x }).collect())
        .collect()
}

fn big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SurgeryHomology {
    pub slope: i64,
    pub h1: HomologyGroup,
    #[serde(serialize_with = "ser_big")]
    pub determinant: BigInt,
    pub rational_homology_sphere: bool,
}

fn ser_big<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// H₁ as the cokernel of the presentation matrix.
pub fn surgery_h1(link: &FramedLink, slope: i64) -> SurgeryHomology {
    let m = big(&presentation_matrix(link, slope));
    let s = snf(&m);
    let diag = s.diagonal();
    let betti = link.n() - diag.iter().filter(|x| !x.is_zero()).count();
    let determinant = det_int(&m);
    SurgeryHomology {
        slope,
        h1: HomologyGroup::from_factors(betti, &diag),
        rational_homology_sphere: !determinant.is_zero(),
        determinant,
    }
}

/// Smallest q ≥ 1 making q·I + Lk strictly diagonally dominant with
/// positive diagonal.
pub fn min_dominant_slope(link: &FramedLink) -> i64 {
    link.lk
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let off: i64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.abs()).sum();
            (off - row[i] + 1).max(1 - row[i])
        })
        .fold(1, i64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct MeridianContraction {
    pub slope: i64,
    pub iterates: Vec<Vec<String>>,
    /// ‖a_{k+1}‖₁ / ‖a_k‖₁ per step.
    #[serde(serialize_with = "ser_qs")]
    pub ratios: Vec<Q>,
    /// (max row sum of |Lk|) / |q|.
    #[serde(serialize_with = "serialize_q")]
    pub factor: Q,
    pub factor_bounds_ratios: bool,
    pub halving: bool,
    pub contracting: bool,
    pub converged: bool,
}

fn ser_qs<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
}

fn l1(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |a, x| a + x.abs())
}

/// Iterates a ↦ −(1/q)·Lk·a, the meridian representative of the class of a
/// after sliding each meridian across its surgery solid torus.
pub fn meridian_contraction(link: &FramedLink, slope: i64, a: &[Q], tol: &Q, max_iter: usize) -> Result<MeridianContraction> {
    if slope == 0 {
        return Err(Error::Argument("slope q must be nonzero".into()));
    }
    if a.len() != link.n() {
        return Err(Error::DimensionMismatch { expected: link.n() as isize, found: a.len() as isize });
    }
    let factor = q(link.max_row_sum()) / q(slope.abs());
    let inv = -(q(1) / q(slope));
    let mut cur = a.to_vec();
    let mut iterates = vec![cur.clone()];
    let mut ratios = Vec::new();
    while l1(&cur) >= *tol && l1(&cur) > Q::zero() && ratios.len() < max_iter {
        let next: Vec<Q> = link.lk.iter().map(|row| row.iter().zip(&cur).fold(Q::zero(), |s, (&l, x)| s + q(l) * x) * &inv).collect();
        ratios.push(l1(&next) / l1(&cur));
        iterates.push(next.clone());
        cur = next;
    }
    Ok(MeridianContraction {
        slope,
        factor_bounds_ratios: ratios.iter().all(|r| *r <= factor),
        halving: factor <= crate::arith::qf(1, 2),
        contracting: factor < q(1),
        converged: l1(&cur) < *tol || l1(&cur).is_zero(),
        iterates: iterates.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect(),
        ratios,
        factor,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionRow {
    pub slope: i64,
    pub h1: String,
    /// |H₁| when finite, else "inf".
    pub order: String,
    #[serde(serialize_with = "ser_big")]
    pub determinant: BigInt,
    pub rhs_flag: bool,
    pub dominant: bool,
}

pub fn torsion_growth_table(link: &FramedLink, slopes: std::ops::RangeInclusive<i64>, exec: Execution) -> Vec<TorsionRow> {
    let qs: Vec<i64> = slopes.collect();
    let threshold = min_dominant_slope(link);
    par::map(exec, &qs, |&s| {
        let h = surgery_h1(link, s);
        TorsionRow {
            slope: s,
            order: if h.h1.is_finite() { h.h1.torsion_order().to_string() } else { "inf".into() },
            h1: h.h1.to_string(),
            determinant: h.determinant,
            rhs_flag: h.rational_homology_sphere,
            dominant: s >= threshold,
        }
    })
}

/// A seeded random symmetric matrix with entries in [−bound, bound].
pub fn random_link(n: usize, bound: i64, seed: u64) -> FramedLink {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut lk = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-bound..=bound);
            lk[i][j] = v;
            lk[j][i] = v;
        }
    }
    FramedLink { lk, names: None }
}
