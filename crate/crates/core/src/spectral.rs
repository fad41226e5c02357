//! Hodge Laplacians, their spectral gaps, and L² Cheeger constants.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::{CellComplex, SparseMatrix};
use crate::error::{Error, Result};
use crate::homology::rank_q;

/// Dense eigensolves are used up to this many cells; Lanczos above.
pub const DENSE_LIMIT: usize = 2000;
pub const ZERO_TOLERANCE: f64 = 1e-9;
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub dim: usize,
    pub cells: usize,
    /// Smallest nonzero eigenvalue of ∂d on i-cycles (None when ∂d = 0).
    pub gap_exact: Option<f64>,
    /// Smallest nonzero eigenvalue of d∂ on i-cocycles (None when d∂ = 0).
    pub gap_coexact: Option<f64>,
    /// Smallest nonzero eigenvalue of Δ_i.
    pub hodge_gap: Option<f64>,
    /// Rational betti number b_i from exact ranks.
    pub betti_check: usize,
    /// Eigenvalues of Δ_i below the zero tolerance (dense solver only).
    pub zero_multiplicity: Option<usize>,
    pub zero_detection_agrees: bool,
    pub tolerance: f64,
    pub solver: &'static str,
    pub max_residual: f64,
    pub residual_ok: bool,
    /// h_i(X, ‖·‖₂) and h^i(X, ‖·‖₂).
    #[serde(serialize_with = "crate::arith::serialize_f64")]
    pub cheeger_down: f64,
    #[serde(serialize_with = "crate::arith::serialize_f64")]
    pub cheeger_up: f64,
    /// h_{i,exact} and h^i_coexact: the same operators without the homology test.
    #[serde(serialize_with = "crate::arith::serialize_f64")]
    pub cheeger_down_exact: f64,
    #[serde(serialize_with = "crate::arith::serialize_f64")]
    pub cheeger_up_coexact: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TildeL2 {
    #[serde(serialize_with = "crate::arith::serialize_f64")]
    pub value: f64,
    #[serde(serialize_with = "crate::arith::serialize_f64")]
    pub inverse: f64,
    /// h²(X, ‖·‖₂).
    #[serde(serialize_with = "crate::arith::serialize_f64")]
    pub h2: f64,
    pub cohomology_nonzero: bool,
    pub sandwich_holds: bool,
}

fn dense(m: &SparseMatrix) -> DMatrix<f64> {
    m.to_dense()
}

/// Δ_i = ∂_iᵀ∂_i + ∂_{i+1}∂_{i+1}ᵀ, with the augmentation term in Δ_0.
pub fn hodge_laplacian(x: &CellComplex, i: usize) -> Result<DMatrix<f64>> {
    let (down, up) = split_laplacian(x, i)?;
    Ok(down + up)
}

/// (∂d, d∂) on C_i, the exact and coexact halves of Δ_i.
pub fn split_laplacian(x: &CellComplex, i: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if i > x.dims() {
        return Err(Error::Dimension { dim: i as isize, dims: x.dims() });
    }
    let b_in = dense(&x.boundary_or_zero(i as isize));
    let b_out = dense(&x.boundary_or_zero(i as isize + 1));
    Ok((&b_out * b_out.transpose(), b_in.transpose() * &b_in))
}

pub fn matrix_norm_l1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

struct Spectrum {
    values: Vec<f64>,
    max_residual: f64,
}

fn eigen(m: &DMatrix<f64>) -> Spectrum {
    if m.nrows() == 0 {
        return Spectrum { values: Vec::new(), max_residual: 0.0 };
    }
    let e = SymmetricEigen::new(m.clone());
    let mut max_residual: f64 = 0.0;
    for (k, &lambda) in e.eigenvalues.iter().enumerate() {
        let v = e.eigenvectors.column(k);
        max_residual = max_residual.max((m * v - v * lambda).norm());
    }
    let mut values: Vec<f64> = e.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Spectrum { values, max_residual }
}

/// The k-th smallest eigenvalue counted from a known zero multiplicity.
fn gap_from(values: &[f64], zeros: usize) -> Option<f64> {
    values.get(zeros).map(|v| v.max(0.0))
}

fn spmv(m: &SparseMatrix, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows()];
    for (j, col) in m.columns().iter().enumerate() {
        if v[j] != 0.0 {
            for &(r, x) in col {
                out[r] += x as f64 * v[j];
            }
        }
    }
    out
}

fn spmv_t(m: &SparseMatrix, v: &[f64]) -> Vec<f64> {
    m.columns().iter().map(|col| col.iter().map(|&(r, x)| x as f64 * v[r]).sum()).collect()
}

/// Smallest eigenvalue of a symmetric operator on the Krylov space of
/// `start`, by Lanczos with full reorthogonalization. Returns (λ, residual).
pub fn lanczos_smallest(apply: &dyn Fn(&[f64]) -> Vec<f64>, start: Vec<f64>, max_steps: usize, tol: f64) -> Option<(f64, f64)> {
    let n = start.len();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let s = norm(&start);
    if s == 0.0 {
        return None;
    }
    let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / s).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut best = None;
    for step in 0..max_steps.min(n) {
        let q = &basis[step];
        let mut w = apply(q);
        let a: f64 = w.iter().zip(q).map(|(x, y)| x * y).sum();
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bnorm = norm(&w);
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let e = SymmetricEigen::new(t);
        let (idx, &lambda) = e.eigenvalues.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap();
        let residual = (bnorm * e.eigenvectors[(k - 1, idx)]).abs();
        best = Some((lambda, residual));
        if residual <= tol || bnorm <= tol {
            break;
        }
        beta.push(bnorm);
        basis.push(w.iter().map(|x| x / bnorm).collect());
    }
    best
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Spectral report for Δ_i with exact-rank zero counting.
pub fn spectral_report(x: &CellComplex, i: usize, full_spectrum: bool) -> Result<SpectralReport> {
    if i > x.dims() {
        return Err(Error::Dimension { dim: i as isize, dims: x.dims() });
    }
    let n = x.num_cells(i as isize);
    let b_in = x.boundary_or_zero(i as isize);
    let b_out = x.boundary_or_zero(i as isize + 1);
    let r_in = rank_q(&b_in);
    let r_out = rank_q(&b_out);
    let betti = n - r_in - r_out;
    let homology_nonzero = n - r_in > r_out;
    let cohomology_nonzero = n - r_out > r_in;
    if n <= DENSE_LIMIT {
        let (down, up) = split_laplacian(x, i)?;
        let delta = &down + &up;
        let scale = matrix_norm_l1(&delta).max(1.0);
        let tol = ZERO_TOLERANCE * scale;
        let sd = eigen(&down);
        let su = eigen(&up);
        let sl = eigen(&delta);
        let gap_exact = (r_out > 0).then(|| gap_from(&sd.values, n - r_out)).flatten();
        let gap_coexact = (r_in > 0).then(|| gap_from(&su.values, n - r_in)).flatten();
        let hodge_gap = gap_from(&sl.values, betti);
        let zeros = sl.values.iter().filter(|&&v| v.abs() < tol).count();
        let agrees = zeros == betti
            && sd.values.iter().filter(|&&v| v.abs() < tol).count() == n - r_out
            && su.values.iter().filter(|&&v| v.abs() < tol).count() == n - r_in;
        let max_residual = sd.max_residual.max(su.max_residual).max(sl.max_residual);
        Ok(SpectralReport {
            dim: i,
            cells: n,
            gap_exact,
            gap_coexact,
            hodge_gap,
            betti_check: betti,
            zero_multiplicity: Some(zeros),
            zero_detection_agrees: agrees,
            tolerance: tol,
            solver: "dense",
            residual_ok: max_residual <= RESIDUAL_TOLERANCE * scale,
            max_residual,
            cheeger_down: cheeger_from(homology_nonzero, n - r_in, gap_exact),
            cheeger_up: cheeger_from(cohomology_nonzero, n - r_out, gap_coexact),
            cheeger_down_exact: cheeger_from(false, r_out, gap_exact),
            cheeger_up_coexact: cheeger_from(false, r_in, gap_coexact),
            spectrum: full_spectrum.then_some(sl.values),
        })
    } else {
        let scale = (b_in.norm_l1().pow(2) + b_out.norm_l1().pow(2)).max(1) as f64;
        let tol = RESIDUAL_TOLERANCE * scale;
        let steps = 400;
        let down = |v: &[f64]| spmv(&b_out, &spmv_t(&b_out, v));
        let up = |v: &[f64]| spmv_t(&b_in, &spmv(&b_in, v));
        let gd = (r_out > 0)
            .then(|| lanczos_smallest(&down, spmv(&b_out, &random_vector(b_out.ncols(), 1)), steps, tol))
            .flatten();
        let gu = (r_in > 0)
            .then(|| lanczos_smallest(&up, spmv_t(&b_in, &random_vector(b_in.nrows(), 2)), steps, tol))
            .flatten();
        let max_residual = gd.map_or(0.0, |g| g.1).max(gu.map_or(0.0, |g| g.1));
        let gap_exact = gd.map(|g| g.0.max(0.0));
        let gap_coexact = gu.map(|g| g.0.max(0.0));
        let hodge_gap = match (gap_exact, gap_coexact) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Ok(SpectralReport {
            dim: i,
            cells: n,
            gap_exact,
            gap_coexact,
            hodge_gap,
            betti_check: betti,
            zero_multiplicity: None,
            zero_detection_agrees: true,
            tolerance: tol,
            solver: "lanczos",
            residual_ok: max_residual <= tol,
            max_residual,
            cheeger_down: cheeger_from(homology_nonzero, n - r_in, gap_exact),
            cheeger_up: cheeger_from(cohomology_nonzero, n - r_out, gap_coexact),
            cheeger_down_exact: cheeger_from(false, r_out, gap_exact),
            cheeger_up_coexact: cheeger_from(false, r_in, gap_coexact),
            spectrum: None,
        })
    }
}

fn cheeger_from(nonzero: bool, domain_dim: usize, gap: Option<f64>) -> f64 {
    if nonzero {
        0.0
    } else if domain_dim == 0 {
        f64::INFINITY
    } else {
        gap.map_or(f64::INFINITY, f64::sqrt)
    }
}

/// h_i(X, ‖·‖₂, ℝ): √λ_min of ∂d on i-cycles, 0 when H_i ≠ 0.
pub fn cheeger_l2_down(x: &CellComplex, i: usize) -> Result<f64> {
    Ok(spectral_report(x, i, false)?.cheeger_down)
}

/// h^i(X, ‖·‖₂, ℝ): √λ_min of d∂ on i-cocycles, 0 when H^i ≠ 0.
pub fn cheeger_l2_up(x: &CellComplex, i: usize) -> Result<f64> {
    Ok(spectral_report(x, i, false)?.cheeger_up)
}

/// h^i_coexact(X, ‖·‖₂, ℝ): √λ_min of d∂ on coexact i-cochains.
pub fn cheeger_l2_up_coexact(x: &CellComplex, i: usize) -> Result<f64> {
    Ok(spectral_report(x, i, false)?.cheeger_up_coexact)
}

/// h_{i,exact}(X, ‖·‖₂, ℝ): √λ_min of ∂d on exact i-chains.
pub fn cheeger_l2_down_exact(x: &CellComplex, i: usize) -> Result<f64> {
    Ok(spectral_report(x, i, false)?.cheeger_down_exact)
}

/// h̃²(X, ‖·‖₂) from the orthogonal split C₂ = im d ⊕ ker ∂: the ratio
/// (‖β‖ + ‖γ‖)/‖α‖ is maximized at √(a² + 1) with a = 1/h², or at a when
/// there are no closed 2-chains.
pub fn tilde_h2_l2(x: &CellComplex) -> Result<TildeL2> {
    if x.dims() < 2 || x.num_cells(2) == 0 {
        return Ok(TildeL2 { value: f64::INFINITY, inverse: 0.0, h2: f64::INFINITY, cohomology_nonzero: false, sandwich_holds: true });
    }
    let r = spectral_report(x, 2, false)?;
    let n2 = x.num_cells(2);
    let cohomology_nonzero = n2 - rank_q(&x.boundary_or_zero(3)) > rank_q(&x.boundary_or_zero(2));
    if cohomology_nonzero {
        return Ok(TildeL2 { value: 0.0, inverse: f64::INFINITY, h2: 0.0, cohomology_nonzero, sandwich_holds: true });
    }
    let a = 1.0 / r.cheeger_up;
    let closed = n2 > rank_q(&x.boundary_or_zero(2));
    let inverse = (a * a + if closed { 1.0 } else { 0.0 }).sqrt();
    let eps = 1e-12 * (1.0 + a);
    Ok(TildeL2 {
        value: 1.0 / inverse,
        inverse,
        h2: r.cheeger_up,
        cohomology_nonzero,
        sandwich_holds: a <= inverse + eps && inverse <= a + 1.0 + eps,
    })
}

/// Rayleigh quotient oracle: λ_min of `op` restricted to the column span of
/// `basis`, via Cholesky of the Gram matrix.
pub fn restricted_min_eigenvalue(op: &DMatrix<f64>, basis: &DMatrix<f64>) -> Option<f64> {
    if basis.ncols() == 0 {
        return None;
    }
    let g = basis.transpose() * basis;
    let a = basis.transpose() * op * basis;
    let l = g.cholesky()?.l();
    let linv = l.try_inverse()?;
    let m = &linv * a * linv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    SymmetricEigen::new(m).eigenvalues.iter().copied().min_by(f64::total_cmp)
}

pub fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{cycle_graph, graph, hypercube_skeleton, simplex_boundary};

    #[test]
    fn c3_laplacian_is_three_identity() {
        let x = cycle_graph(3).unwrap();
        let d = hodge_laplacian(&x, 0).unwrap();
        assert_eq!(d, DMatrix::identity(3, 3) * 3.0);
        assert!((cheeger_l2_down(&x, 0).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!((cheeger_l2_up_coexact(&x, 1).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(cheeger_l2_up(&x, 1).unwrap(), 0.0);
        assert_eq!(cheeger_l2_down(&x, 1).unwrap(), 0.0);
    }

    #[test]
    fn single_edge_delta1() {
        let x = graph(2, &[(0, 1)]).unwrap();
        assert_eq!(hodge_laplacian(&x, 1).unwrap(), DMatrix::from_element(1, 1, 2.0));
    }

    #[test]
    fn hypercube_square_diagonal() {
        let x = hypercube_skeleton(3, 2).unwrap();
        let d = hodge_laplacian(&x, 2).unwrap();
        assert!((0..d.nrows()).all(|k| d[(k, k)] == 4.0));
    }

    #[test]
    fn hodge_gap_is_min_of_halves() {
        let x = simplex_boundary(3).unwrap();
        for i in 0..=2 {
            let r = spectral_report(&x, i, true).unwrap();
            assert!(r.zero_detection_agrees && r.residual_ok);
            if r.betti_check == 0 {
                let m = r.cheeger_down.min(r.cheeger_up);
                assert!((r.hodge_gap.unwrap() - m * m).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lanczos_matches_dense() {
        let x = hypercube_skeleton(5, 2).unwrap();
        let dense = spectral_report(&x, 1, false).unwrap();
        let b_out = x.boundary_or_zero(2);
        let down = |v: &[f64]| spmv(&b_out, &spmv_t(&b_out, v));
        let (l, _) = lanczos_smallest(&down, spmv(&b_out, &random_vector(b_out.ncols(), 7)), 400, 1e-10).unwrap();
        assert!((l - dense.gap_exact.unwrap()).abs() < 1e-8);
    }

    #[test]
    fn tilde_sandwich_on_tetrahedron_boundary() {
        let x = simplex_boundary(3).unwrap();
        let t = tilde_h2_l2(&x).unwrap();
        assert!(t.cohomology_nonzero);
        let y = crate::build_simplicial(&[vec![0, 1, 2], vec![0, 2, 3]]).unwrap();
        let t = tilde_h2_l2(&y).unwrap();
        assert!(t.sandwich_holds && t.value > 0.0);
    }
}
