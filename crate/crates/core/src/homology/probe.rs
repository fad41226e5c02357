//! Empirical chain contraction of a rational homology 3-sphere: H with
//! ∂H + H∂ = id built skeleton by skeleton from L¹-minimal fillings, and the
//! multiples of the fundamental class left over on each 3-cell.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use super::{betti_numbers, homology_all};
use crate::arith::{q_to_f64, Q};
use crate::chain::{Norm, QChain};
use crate::complex::{CellComplex, SparseMatrix};
use crate::error::{Error, Result};
use crate::filling::FillingEngine;
use crate::linalg;

/// Per 3-cell outcome: r − H∂r = multiple·[X].
#[derive(Clone, Debug, Serialize)]
pub struct TetProbe {
    pub cell: usize,
    #[serde(serialize_with = "crate::arith::serialize_q")]
    pub multiple: Q,
    /// Orientation sign of the cell in the fundamental class.
    pub orientation: i64,
    pub residual_norm_l1: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub name: String,
    pub cells: Vec<usize>,
    /// Lowest vertex, the image of the augmentation cell under H.
    pub base_point: usize,
    /// Least common multiple of torsion orders in H_*(X; ℤ).
    #[serde(serialize_with = "ser_bigint")]
    pub torsion_lcm: BigInt,
    /// Least common multiple of all denominators in the H-chains.
    #[serde(serialize_with = "ser_bigint")]
    pub denominator_lcm: BigInt,
    pub denominators_divide_torsion_lcm: bool,
    pub fundamental_class_unit: bool,
    /// max ‖Hc‖₁ over cells c of dimension 0, 1, 2.
    pub max_norms: Vec<f64>,
    pub tets: Vec<TetProbe>,
    pub nonzero_multiples: usize,
    /// Σ_r ε_r (r − H∂r) equals [X] exactly.
    pub sum_check: bool,
    pub homotopy_check: bool,
    /// 3-cell count divided by the torsion lcm.
    pub volume_over_n: f64,
    pub lp_solves: usize,
    pub partial: bool,
}

fn ser_bigint<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn apply_h(h: &[QChain], c: &QChain, out_dim: isize) -> QChain {
    let mut out = QChain::zero(out_dim);
    for (i, v) in c.iter() {
        for (j, w) in h[i].iter() {
            out.add_at(j, &(v * w));
        }
    }
    out
}

fn boundary(x: &CellComplex, c: &QChain) -> QChain {
    c.apply_matrix(&x.boundary_or_zero(c.dim()), c.dim() - 1, 0.0)
}

struct Builder<'a> {
    x: &'a CellComplex,
    solves: usize,
    cap: usize,
}

impl Builder<'_> {
    /// H on cells of dimension d (d ∈ {1, 2}): the minimal filling of
    /// c − H∂c through ∂_{d+1}.
    fn level(&mut self, d: usize, lower: &[QChain]) -> Result<Option<Vec<QChain>>> {
        let b: SparseMatrix = self.x.boundary_or_zero(d as isize + 1);
        let mut engine = FillingEngine::new(&b, Norm::L1);
        let mut out = Vec::with_capacity(self.x.num_cells(d as isize));
        for c in 0..self.x.num_cells(d as isize) {
            if self.solves >= self.cap {
                return Ok(None);
            }
            let cell = QChain::unit(d as isize, c);
            let z = cell.minus(&apply_h(lower, &boundary(self.x, &cell), d as isize))?;
            let dense = z.to_dense(self.x.num_cells(d as isize));
            self.solves += 1;
            let (beta, _, _) = engine
                .solve(&dense, false)
                .ok_or_else(|| Error::Invariant(format!("{d}-cell {c}: cycle c − H∂c has no filling")))?;
            let beta = QChain::from_dense(d as isize + 1, &beta);
            if boundary(self.x, &beta) != z {
                return Err(Error::Invariant(format!("{d}-cell {c}: filling does not verify")));
            }
            out.push(beta);
        }
        Ok(Some(out))
    }
}

/// Builds the chain contraction and reports the 3-cell residues. `lp_cap`
/// bounds the number of filling LPs; past it the report is partial.
pub fn chain_contraction_probe(x: &CellComplex, lp_cap: usize) -> Result<ProbeReport> {
    if x.dims() != 3 {
        return Err(Error::Precondition(format!("probe needs a 3-complex, got dimension {}", x.dims())));
    }
    let x = &x.with_augmentation(true);
    let betti = betti_numbers(x);
    if betti != [0, 0, 0, 1] {
        return Err(Error::Precondition(format!("not a rational homology 3-sphere (betti {betti:?})")));
    }
    let d3 = x.boundary_or_zero(3);
    let n3 = x.num_cells(3);
    let fundamental = linalg::primitive_integer(&linalg::kernel_basis(&d3.to_q_rows(), n3).remove(0));
    let fundamental_class_unit = fundamental.iter().all(|v| v.abs().is_one());
    let fclass = QChain::from_dense(3, &fundamental.iter().cloned().map(Q::from_integer).collect::<Vec<_>>());

    let torsion_lcm = homology_all(x).iter().flat_map(|g| g.torsion.iter().cloned()).fold(BigInt::one(), |a, t| a.lcm(&t));

    // H on vertices: BFS paths from the base point.
    let n0 = x.num_cells(0);
    let adj = x.adjacency()?;
    let base_point = 0;
    let mut h0: Vec<Option<QChain>> = vec![None; n0];
    h0[base_point] = Some(QChain::zero(1));
    let mut queue = VecDeque::from([base_point]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if h0[w].is_none() {
                let sign = x.boundary_or_zero(1).get(w, e);
                let mut path = h0[v].clone().unwrap();
                path.add_scaled_at(e, &Q::one(), sign);
                h0[w] = Some(path);
                queue.push_back(w);
            }
        }
    }
    let h0: Vec<QChain> = h0.into_iter().collect::<Option<_>>().ok_or(Error::Disconnected)?;

    let mut builder = Builder { x, solves: 0, cap: lp_cap };
    let mut partial = false;
    let h1 = builder.level(1, &h0)?;
    let h2 = match &h1 {
        Some(h1) => builder.level(2, h1)?,
        None => None,
    };
    let mut max_norms = vec![h0.iter().map(|c| q_to_f64(&c.norm_l1())).fold(0.0, f64::max)];
    let mut denominator_lcm = BigInt::one();
    let mut track = |hs: &[QChain]| {
        for c in hs {
            for (_, v) in c.iter() {
                denominator_lcm = denominator_lcm.lcm(v.denom());
            }
        }
    };
    track(&h0);
    let mut tets = Vec::new();
    let mut sum_check = false;
    let mut homotopy_check = false;
    match (&h1, &h2) {
        (Some(h1), Some(h2)) => {
            track(h1);
            track(h2);
            max_norms.push(h1.iter().map(|c| q_to_f64(&c.norm_l1())).fold(0.0, f64::max));
            max_norms.push(h2.iter().map(|c| q_to_f64(&c.norm_l1())).fold(0.0, f64::max));
            let pivot = (0..n3).find(|&k| !fundamental[k].is_zero()).expect("nonzero fundamental class");
            let mut total = QChain::zero(3);
            for r in 0..n3 {
                let cell = QChain::unit(3, r);
                let z = cell.minus(&apply_h(h2, &boundary(x, &cell), 3))?;
                if !boundary(x, &z).is_empty() {
                    return Err(Error::Invariant(format!("3-cell {r}: residue is not a cycle")));
                }
                let multiple = z.get(pivot) / Q::from_integer(fundamental[pivot].clone());
                if fclass.scale(&multiple) != z {
                    return Err(Error::Invariant(format!("3-cell {r}: residue is not a multiple of [X]")));
                }
                let orientation: i64 = if fundamental[r].is_negative() { -1 } else { 1 };
                total.add_scaled(&z, orientation)?;
                tets.push(TetProbe { cell: r, residual_norm_l1: q_to_f64(&z.norm_l1()), multiple, orientation });
            }
            sum_check = fundamental_class_unit && total == fclass;
            homotopy_check = check_homotopy(x, &h0, h1, h2)?;
        }
        _ => partial = true,
    }
    Ok(ProbeReport {
        name: x.name().to_string(),
        cells: (0..=3).map(|d| x.num_cells(d)).collect(),
        base_point,
        denominators_divide_torsion_lcm: torsion_lcm.is_multiple_of(&denominator_lcm),
        torsion_lcm: torsion_lcm.clone(),
        denominator_lcm,
        fundamental_class_unit,
        max_norms,
        nonzero_multiples: tets.iter().filter(|t| !t.multiple.is_zero()).count(),
        tets,
        sum_check,
        homotopy_check,
        volume_over_n: n3 as f64 / q_to_f64(&Q::from_integer(torsion_lcm)),
        lp_solves: builder.solves,
        partial,
    })
}

/// ∂Hc + H∂c = c on every cell of dimensions −1 … 2.
fn check_homotopy(x: &CellComplex, h0: &[QChain], h1: &[QChain], h2: &[QChain]) -> Result<bool> {
    let hs: [&[QChain]; 3] = [h0, h1, h2];
    if !boundary(x, &h0[0]).is_empty() {
        return Ok(false);
    }
    for d in 0..3usize {
        for c in 0..x.num_cells(d as isize) {
            let cell = QChain::unit(d as isize, c);
            let lower = if d == 0 {
                // H(*) is the base point.
                let star = boundary(x, &cell);
                QChain::from_pairs(0, star.iter().map(|(_, v)| (0usize, v.clone())))
            } else {
                apply_h(hs[d - 1], &boundary(x, &cell), d as isize)
            };
            let lhs = boundary(x, &hs[d][c]).plus(&lower)?;
            if lhs != cell {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
