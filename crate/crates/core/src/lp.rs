//! Exact rational simplex method for `min cᵀx  s.t.  Ax = b, x ≥ 0`.
//!
//! Two-phase primal simplex with Bland's rule on a dense tableau. After an
//! optimal basis is found, later right-hand sides are re-solved from that
//! basis with the dual simplex (reduced costs do not depend on b), also
//! under a Bland-type rule. The artificial block of the tableau carries the
//! basis inverse, which gives dual values for optimality certificates.

use num_traits::{One, Signed, Zero};

use crate::arith::Q;
use crate::complex::SparseMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Q>,
    pub objective: Q,
    /// Dual values y with Aᵀy ≤ c and bᵀy = cᵀx.
    pub dual: Vec<Q>,
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Simplex {
    m: usize,
    n: usize,
    a: Vec<Vec<(usize, Q)>>,
    cost: Vec<Q>,
    tab: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    red: Vec<Q>,
    sign: Vec<bool>,
    warm: bool,
    pivots: usize,
}

impl Simplex {
    pub fn new(a: &SparseMatrix, cost: Vec<Q>) -> Simplex {
        let cols = a.columns().iter().map(|c| c.iter().map(|&(r, v)| (r, crate::arith::q(v))).collect()).collect();
        Self::from_columns(a.nrows(), cols, cost)
    }

    /// Columns as sparse `(row, value)` lists.
    pub fn from_columns(m: usize, a: Vec<Vec<(usize, Q)>>, cost: Vec<Q>) -> Simplex {
        assert_eq!(a.len(), cost.len(), "one cost per column");
        let n = a.len();
        Simplex {
            m,
            n,
            a,
            cost,
            tab: Vec::new(),
            rhs: Vec::new(),
            basis: Vec::new(),
            red: Vec::new(),
            sign: Vec::new(),
            warm: false,
            pivots: 0,
        }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    /// Forgets the stored basis; the next solve starts from phase I.
    pub fn reset(&mut self) {
        self.warm = false;
    }

    pub fn solve_cold(&mut self, b: &[Q]) -> LpOutcome {
        self.reset();
        self.solve(b)
    }

    pub fn solve(&mut self, b: &[Q]) -> LpOutcome {
        assert_eq!(b.len(), self.m, "right-hand side length");
        self.pivots = 0;
        if self.warm {
            if let Some(out) = self.warm_solve(b) {
                return out;
            }
        }
        self.cold_solve(b)
    }

    fn cold_solve(&mut self, b: &[Q]) -> LpOutcome {
        let (m, n) = (self.m, self.n);
        self.sign = b.iter().map(|x| x.is_negative()).collect();
        self.tab = vec![vec![Q::zero(); n + m]; m];
        for (j, col) in self.a.iter().enumerate() {
            for (r, v) in col {
                self.tab[*r][j] = if self.sign[*r] { -v.clone() } else { v.clone() };
            }
        }
        for r in 0..m {
            self.tab[r][n + r] = Q::one();
        }
        self.rhs = b.iter().map(|x| x.abs()).collect();
        self.basis = (n..n + m).collect();
        self.warm = false;

        // phase I: minimize the sum of artificials
        self.red = vec![Q::zero(); n + m];
        for j in 0..n {
            let s = (0..m).fold(Q::zero(), |acc, r| acc + &self.tab[r][j]);
            self.red[j] = -s;
        }
        if !self.primal_loop() {
            unreachable!("phase I is bounded");
        }
        let infeasible = (0..m).any(|r| self.basis[r] >= n && !self.rhs[r].is_zero());
        if infeasible {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out where a structural pivot exists
        for r in 0..m {
            if self.basis[r] >= n {
                if let Some(j) = (0..n).find(|&j| !self.tab[r][j].is_zero()) {
                    self.pivot(r, j);
                }
            }
        }
        // phase II
        self.red = vec![Q::zero(); n + m];
        for j in 0..n + m {
            let mut v = if j < n { self.cost[j].clone() } else { Q::zero() };
            for r in 0..m {
                let bj = self.basis[r];
                if bj < n && !self.cost[bj].is_zero() && !self.tab[r][j].is_zero() {
                    v -= &self.cost[bj] * &self.tab[r][j];
                }
            }
            self.red[j] = v;
        }
        if !self.primal_loop() {
            return LpOutcome::Unbounded;
        }
        self.warm = true;
        LpOutcome::Optimal(self.extract())
    }

    fn warm_solve(&mut self, b: &[Q]) -> Option<LpOutcome> {
        let (m, n) = (self.m, self.n);
        let sb: Vec<Q> = b.iter().zip(&self.sign).map(|(x, &s)| if s { -x.clone() } else { x.clone() }).collect();
        for r in 0..m {
            let mut v = Q::zero();
            for (k, x) in sb.iter().enumerate() {
                if !x.is_zero() && !self.tab[r][n + k].is_zero() {
                    v += x * &self.tab[r][n + k];
                }
            }
            self.rhs[r] = v;
        }
        if (0..m).any(|r| self.basis[r] >= n && !self.rhs[r].is_zero()) {
            return Some(LpOutcome::Infeasible);
        }
        loop {
            let leave = (0..m).filter(|&r| self.rhs[r].is_negative()).min_by_key(|&r| self.basis[r]);
            let Some(r) = leave else { break };
            let mut best: Option<(usize, Q)> = None;
            for j in 0..n {
                if self.tab[r][j].is_negative() {
                    let ratio = &self.red[j] / (-&self.tab[r][j]);
                    if best.as_ref().is_none_or(|(_, b)| ratio < *b) {
                        best = Some((j, ratio));
                    }
                }
            }
            let Some((j, _)) = best else {
                self.warm = false;
                return Some(LpOutcome::Infeasible);
            };
            self.pivot(r, j);
        }
        Some(LpOutcome::Optimal(self.extract()))
    }

    /// Primal simplex with Bland's rule on the current reduced costs.
    /// Returns false when unbounded.
    fn primal_loop(&mut self) -> bool {
        let (m, n) = (self.m, self.n);
        loop {
            let Some(j) = (0..n).find(|&j| self.red[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for r in 0..m {
                if self.tab[r][j].is_positive() {
                    let ratio = &self.rhs[r] / &self.tab[r][j];
                    let better = match &best {
                        None => true,
                        Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, j);
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        self.pivots += 1;
        let width = self.n + self.m;
        let inv = self.tab[r][j].recip();
        if !inv.is_one() {
            for x in self.tab[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let nz: Vec<usize> = (0..width).filter(|&k| !self.tab[r][k].is_zero()).collect();
        let (pivot_row, pivot_rhs) = (self.tab[r].clone(), self.rhs[r].clone());
        for i in 0..self.m {
            if i == r || self.tab[i][j].is_zero() {
                continue;
            }
            let f = self.tab[i][j].clone();
            for &k in &nz {
                let t = &f * &pivot_row[k];
                self.tab[i][k] -= t;
            }
            if !pivot_rhs.is_zero() {
                self.rhs[i] -= &f * &pivot_rhs;
            }
        }
        if !self.red[j].is_zero() {
            let f = self.red[j].clone();
            for &k in &nz {
                let t = &f * &pivot_row[k];
                self.red[k] -= t;
            }
        }
        self.basis[r] = j;
    }

    fn extract(&self) -> LpSolution {
        let n = self.n;
        let mut x = vec![Q::zero(); n];
        for (r, &bj) in self.basis.iter().enumerate() {
            if bj < n {
                x[bj] = self.rhs[r].clone();
            }
        }
        let objective = x.iter().zip(&self.cost).filter(|(v, _)| !v.is_zero()).fold(Q::zero(), |acc, (v, c)| acc + v * c);
        let dual = (0..self.m)
            .map(|k| {
                let y = -self.red[n + k].clone();
                if self.sign[k] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        LpSolution { x, objective, dual, pivots: self.pivots }
    }

    /// Independent exact optimality check: primal feasibility, dual
    /// feasibility and equal objectives.
    pub fn certify(&self, b: &[Q], sol: &LpSolution) -> bool {
        if sol.x.iter().any(|v| v.is_negative()) || sol.x.len() != self.n || sol.dual.len() != self.m {
            return false;
        }
        let mut ax = vec![Q::zero(); self.m];
        let mut primal_obj = Q::zero();
        for (j, col) in self.a.iter().enumerate() {
            let xj = &sol.x[j];
            if !xj.is_zero() {
                primal_obj += xj * &self.cost[j];
                for (r, v) in col {
                    ax[*r] += v * xj;
                }
            }
            let aty = col.iter().fold(Q::zero(), |acc, (r, v)| acc + v * &sol.dual[*r]);
            if aty > self.cost[j] {
                return false;
            }
        }
        let dual_obj = b.iter().zip(&sol.dual).fold(Q::zero(), |acc, (bi, yi)| acc + bi * yi);
        ax.as_slice() == b && primal_obj == sol.objective && dual_obj == primal_obj
    }
}
