//! Dense exact linear algebra over ℚ and ℤ.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::Q;

/// Row-major dense rational matrix.
pub type QMat = Vec<Vec<Q>>;

/// Reduces `m` in place to reduced row echelon form and returns the pivot
/// columns. Pivot rows occupy the first `pivots.len()` rows afterwards.
pub fn rref(m: &mut QMat, ncols: usize) -> Vec<usize> {
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut().skip(c) {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = m[r].clone();
        let nz: Vec<usize> = (c..ncols).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..nrows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for &j in &nz {
                let t = &f * &pivot_row[j];
                m[i][j] -= t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &QMat, ncols: usize) -> usize {
    let mut a = m.clone();
    rref(&mut a, ncols).len()
}

/// Basis of the right kernel, one vector per free column.
pub fn kernel_basis(m: &QMat, ncols: usize) -> Vec<Vec<Q>> {
    let mut a = m.clone();
    let pivots = rref(&mut a, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for f in (0..ncols).filter(|&j| !is_pivot[j]) {
        let mut v = vec![Q::zero(); ncols];
        v[f] = Q::one();
        for (k, &p) in pivots.iter().enumerate() {
            if !a[k][f].is_zero() {
                v[p] = -a[k][f].clone();
            }
        }
        basis.push(v);
    }
    basis
}

/// Some solution of `m x = b` (free variables set to zero), or `None`.
pub fn solve(m: &QMat, ncols: usize, b: &[Q]) -> Option<Vec<Q>> {
    let mut a: QMat = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut a, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (k, &p) in pivots.iter().enumerate() {
        x[p] = a[k][ncols].clone();
    }
    Some(x)
}

/// The least-norm solution x = Aᵀy of `a x = b`, where A Aᵀ y = b.
pub fn least_norm(a: &QMat, ncols: usize, b: &[Q]) -> Option<Vec<Q>> {
    let at = transpose(a, ncols);
    let gram = mat_mul(a, &at, a.len());
    let y = solve(&gram, a.len(), b)?;
    Some(mat_vec(&at, &y))
}

pub fn transpose(m: &QMat, ncols: usize) -> QMat {
    (0..ncols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_vec(m: &QMat, v: &[Q]) -> Vec<Q> {
    m.iter()
        .map(|row| {
            row.iter().zip(v).filter(|(a, b)| !a.is_zero() && !b.is_zero()).fold(Q::zero(), |acc, (a, b)| acc + a * b)
        })
        .collect()
}

pub fn mat_mul(a: &QMat, b: &QMat, bcols: usize) -> QMat {
    a.iter()
        .map(|row| {
            (0..bcols)
                .map(|j| {
                    row.iter()
                        .enumerate()
                        .filter(|(k, x)| !x.is_zero() && !b[*k][j].is_zero())
                        .fold(Q::zero(), |acc, (k, x)| acc + x * &b[k][j])
                })
                .collect()
        })
        .collect()
}

/// Determinant of a square integer matrix by fraction-free Bareiss elimination.
pub fn det_int(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

pub fn int_mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let inner = b.len();
    let bcols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..bcols)
                .map(|j| (0..inner).filter(|&k| !row[k].is_zero()).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

pub fn q_from_int_rows(m: &[Vec<BigInt>]) -> QMat {
    m.iter().map(|r| r.iter().map(|x| Q::from_integer(x.clone())).collect()).collect()
}

/// Scales a rational vector to a primitive integer vector whose first
/// nonzero entry is positive.
pub fn primitive_integer(v: &[Q]) -> Vec<BigInt> {
    use num_integer::Integer;
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let first_neg = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if first_neg { -g } else { g };
    ints.into_iter().map(|x| x / &g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qf};

    fn m(rows: &[&[i64]]) -> QMat {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn rank_and_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&a, 3), 2);
        let k = kernel_basis(&a, 3);
        assert_eq!(k.len(), 1);
        assert!(mat_vec(&a, &k[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn solve_consistent_and_not() {
        let a = m(&[&[1, 1], &[2, 2]]);
        assert!(solve(&a, 2, &[q(1), q(2)]).is_some());
        assert!(solve(&a, 2, &[q(1), q(3)]).is_none());
        let x = solve(&m(&[&[2, 0], &[0, 4]]), 2, &[q(1), q(1)]).unwrap();
        assert_eq!(x, vec![qf(1, 2), qf(1, 4)]);
    }

    #[test]
    fn bareiss() {
        let d = |r: &[&[i64]]| det_int(&r.iter().map(|x| x.iter().map(|&v| BigInt::from(v)).collect()).collect::<Vec<_>>());
        assert_eq!(d(&[&[2, 4], &[6, 8]]), BigInt::from(-8));
        assert_eq!(d(&[&[0, 1], &[1, 0]]), BigInt::from(-1));
        assert_eq!(d(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]), BigInt::from(-3));
        assert_eq!(d(&[&[1, 2], &[2, 4]]), BigInt::zero());
    }

    #[test]
    fn primitive_scaling() {
        let v = primitive_integer(&[qf(-1, 2), q(1), qf(3, 2)]);
        assert_eq!(v, vec![BigInt::from(1), BigInt::from(-2), BigInt::from(-3)]);
    }
}
