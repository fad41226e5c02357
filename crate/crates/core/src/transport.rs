//! Transport certificates: cycles moved to smaller cycles by explicit
//! cobounding chains, the geometric-series filling scheme built on them, and
//! the two hypercube filling algorithms.

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{q, serialize_q, Q};
use crate::chain::{ChainRecord, Norm, QChain};
use crate::complex::SparseMatrix;
use crate::constructors::Hypercube;
use crate::error::{Error, Result};

fn ser_chain<S: serde::Serializer>(c: &QChain, s: S) -> std::result::Result<S::Ok, S::Error> {
    c.to_record().serialize(s)
}

fn de_chain<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<QChain, D::Error> {
    let r = ChainRecord::deserialize(d)?;
    QChain::from_record(&r).map_err(serde::de::Error::custom)
}

fn de_q<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
    let s = String::deserialize(d)?;
    crate::arith::parse_q(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
}

fn de_qs<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
    let v = Vec::<String>::deserialize(d)?;
    v.iter().map(|s| crate::arith::parse_q(s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))).collect()
}

fn ser_qs<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
}

/// One move: `from` is carried to `to` by `chain`, with map(chain) = to − from
/// and ‖chain‖ ≤ cost·‖from‖.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransportStep {
    #[serde(serialize_with = "ser_chain", deserialize_with = "de_chain")]
    pub from: QChain,
    #[serde(serialize_with = "ser_chain", deserialize_with = "de_chain")]
    pub to: QChain,
    #[serde(serialize_with = "ser_chain", deserialize_with = "de_chain")]
    pub chain: QChain,
    #[serde(serialize_with = "serialize_q", deserialize_with = "de_q")]
    pub cost: Q,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransportCertificate {
    pub norm: Norm,
    pub steps: Vec<TransportStep>,
    /// Σ‖chain_k‖ / ‖from_0‖.
    #[serde(serialize_with = "serialize_q", deserialize_with = "de_q")]
    pub total_cost: Q,
    /// ‖from_0‖, then ‖to_k‖ after each step.
    #[serde(serialize_with = "ser_qs", deserialize_with = "de_qs")]
    pub norm_trace: Vec<Q>,
}

pub fn rational_norm(v: &QChain, p: Norm) -> Result<Q> {
    match p {
        Norm::L1 => Ok(v.norm_l1()),
        Norm::LInf => Ok(v.norm_linf()),
        Norm::L2 => Err(Error::Argument("transport certificates use the L¹ or L∞ norm".into())),
    }
}

impl TransportCertificate {
    pub fn new(norm: Norm, start: &QChain) -> Result<Self> {
        Ok(TransportCertificate { norm, steps: Vec::new(), total_cost: Q::zero(), norm_trace: vec![rational_norm(start, norm)?] })
    }

    pub fn start_norm(&self) -> &Q {
        &self.norm_trace[0]
    }

    fn push(&mut self, step: TransportStep) -> Result<()> {
        let n0 = self.start_norm().clone();
        if !n0.is_zero() {
            self.total_cost += rational_norm(&step.chain, self.norm)? / n0;
        }
        self.norm_trace.push(rational_norm(&step.to, self.norm)?);
        self.steps.push(step);
        Ok(())
    }

    /// Σ chain_k, which carries the first cycle to the last.
    pub fn total_chain(&self) -> QChain {
        let dim = self.steps.first().map_or(0, |s| s.chain.dim());
        let mut out = QChain::zero(dim);
        for s in &self.steps {
            for (i, v) in s.chain.iter() {
                out.add_at(i, v);
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub ok: bool,
    pub steps_checked: usize,
    pub failures: Vec<String>,
}

/// Independent exact check of every step equation, cost inequality,
/// continuity between steps, the norm trace and the total cost.
pub fn verify_certificate(cert: &TransportCertificate, map: &SparseMatrix) -> VerificationReport {
    use std::collections::BTreeMap;
    let mut failures = Vec::new();
    let dense = |c: &QChain| -> BTreeMap<usize, Q> { c.iter().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i, v.clone())).collect() };
    let norm = |m: &BTreeMap<usize, Q>| -> Q {
        match cert.norm {
            Norm::LInf => m.values().map(Signed::abs).max().unwrap_or_else(Q::zero),
            _ => m.values().fold(Q::zero(), |a, v| a + v.abs()),
        }
    };
    let mut total = Q::zero();
    let n0 = cert.steps.first().map(|s| norm(&dense(&s.from)));
    for (k, s) in cert.steps.iter().enumerate() {
        let mut image: BTreeMap<usize, Q> = BTreeMap::new();
        for (j, v) in s.chain.iter() {
            if j >= map.ncols() {
                failures.push(format!("step {k}: chain index {j} out of range"));
                continue;
            }
            for &(r, x) in map.col(j) {
                *image.entry(r).or_insert_with(Q::zero) += v * q(x);
            }
        }
        image.retain(|_, v| !v.is_zero());
        let mut diff = dense(&s.to);
        for (i, v) in dense(&s.from) {
            *diff.entry(i).or_insert_with(Q::zero) -= v;
        }
        diff.retain(|_, v| !v.is_zero());
        if image != diff {
            failures.push(format!("step {k}: boundary of chain is not to − from"));
        }
        let from_norm = norm(&dense(&s.from));
        let chain_norm = norm(&dense(&s.chain));
        if chain_norm > &s.cost * &from_norm {
            failures.push(format!("step {k}: chain norm {chain_norm} exceeds cost {} × {from_norm}", s.cost));
        }
        if k > 0 && dense(&cert.steps[k - 1].to) != dense(&s.from) {
            failures.push(format!("step {k}: does not start where step {} ended", k - 1));
        }
        if cert.norm_trace.get(k + 1) != Some(&norm(&dense(&s.to))) {
            failures.push(format!("step {k}: norm trace mismatch"));
        }
        if let Some(n0) = &n0 {
            if !n0.is_zero() {
                total += chain_norm / n0;
            }
        }
    }
    if total != cert.total_cost {
        failures.push(format!("total cost {} does not match recomputed {total}", cert.total_cost));
    }
    VerificationReport { ok: failures.is_empty(), steps_checked: cert.steps.len(), failures }
}

/// Arithmetic of the composition law for two consecutive certificates of
/// costs x and y, where ρ = ‖c′‖/‖c‖. The combined cost is at most x + yρ;
/// the bound xy + x follows when ρ ≤ x.
#[derive(Clone, Debug, Serialize)]
pub struct CompositionCheck {
    #[serde(serialize_with = "serialize_q")]
    pub x: Q,
    #[serde(serialize_with = "serialize_q")]
    pub y: Q,
    #[serde(serialize_with = "serialize_q")]
    pub rho: Q,
    #[serde(serialize_with = "serialize_q")]
    pub total: Q,
    pub within_x_plus_y_rho: bool,
    pub rho_at_most_x: bool,
    pub within_xy_plus_x: bool,
}

pub fn compose(first: &TransportCertificate, second: &TransportCertificate) -> Result<(TransportCertificate, CompositionCheck)> {
    if first.norm != second.norm {
        return Err(Error::Argument("certificates use different norms".into()));
    }
    let end = first.steps.last().map(|s| &s.to);
    let start = second.steps.first().map(|s| &s.from);
    if let (Some(a), Some(b)) = (end, start) {
        if a != b {
            return Err(Error::Argument("second certificate does not start where the first ends".into()));
        }
    }
    let n0 = first.start_norm().clone();
    let n1 = second.start_norm().clone();
    let rho = if n0.is_zero() { Q::zero() } else { &n1 / &n0 };
    let mut out = first.clone();
    for s in &second.steps {
        out.push(s.clone())?;
    }
    let (x, y) = (first.total_cost.clone(), second.total_cost.clone());
    let check = CompositionCheck {
        within_x_plus_y_rho: out.total_cost <= &x + &y * &rho,
        rho_at_most_x: rho <= x,
        within_xy_plus_x: out.total_cost <= &x * &y + &x,
        total: out.total_cost.clone(),
        x,
        y,
        rho,
    };
    Ok((out, check))
}

/// Produces, for a cycle c, a smaller cycle c′ and a chain C with
/// map(C) = c′ − c.
pub trait StepOracle {
    fn step(&mut self, c: &QChain) -> Result<(QChain, QChain)>;
}

impl<F: FnMut(&QChain) -> Result<(QChain, QChain)>> StepOracle for F {
    fn step(&mut self, c: &QChain) -> Result<(QChain, QChain)> {
        self(c)
    }
}

#[derive(Clone, Debug)]
pub struct ExpFillParams {
    pub norm: Norm,
    /// Contraction ratio a ∈ (0, 1).
    pub a: Q,
    /// Per-step cost x.
    pub x: Q,
    /// Stop once ‖c‖ ≤ tol.
    pub tol: Q,
    pub max_steps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpFillResult {
    pub certificate: TransportCertificate,
    /// −Σ C_k, so map(filling) = α − residual.
    #[serde(serialize_with = "ser_chain")]
    pub filling: QChain,
    #[serde(serialize_with = "ser_chain")]
    pub residual: QChain,
    /// (x / (1 − a))·‖α‖.
    #[serde(serialize_with = "serialize_q")]
    pub bound: Q,
    #[serde(serialize_with = "serialize_q")]
    pub filling_norm: Q,
    pub within_bound: bool,
}

/// Repeatedly applies the oracle, checking its contract at every step, and
/// sums the cobounding chains into a filling.
pub fn expfill(oracle: &mut dyn StepOracle, map: &SparseMatrix, alpha: &QChain, params: &ExpFillParams) -> Result<ExpFillResult> {
    if !(params.a.is_positive() && params.a < Q::one()) {
        return Err(Error::Argument("contraction ratio must lie in (0, 1)".into()));
    }
    let p = params.norm;
    let mut cert = TransportCertificate::new(p, alpha)?;
    let mut c = alpha.clone();
    let mut step = 0;
    while rational_norm(&c, p)? > params.tol {
        if step >= params.max_steps {
            return Err(Error::OracleViolation { step, reason: format!("no convergence within {} steps", params.max_steps) });
        }
        let (next, chain) = oracle.step(&c)?;
        let image = chain.apply_matrix(map, c.dim(), 0.0);
        if image != next.minus(&c)? {
            return Err(Error::OracleViolation { step, reason: "returned chain does not carry c to c′".into() });
        }
        let n = rational_norm(&c, p)?;
        if rational_norm(&next, p)? > &params.a * &n {
            return Err(Error::OracleViolation { step, reason: format!("‖c′‖ exceeds {} ‖c‖", params.a) });
        }
        if rational_norm(&chain, p)? > &params.x * &n {
            return Err(Error::OracleViolation { step, reason: format!("‖C‖ exceeds {} ‖c‖", params.x) });
        }
        cert.push(TransportStep { from: c.clone(), to: next.clone(), chain, cost: params.x.clone() })?;
        c = next;
        step += 1;
    }
    let filling = cert.total_chain().negate();
    let filling_norm = rational_norm(&filling, p)?;
    let bound = &params.x / (Q::one() - &params.a) * cert.start_norm();
    Ok(ExpFillResult { within_bound: filling_norm <= bound, certificate: cert, filling, residual: c, bound, filling_norm })
}

/// An edge loop at the origin of {0,1}^deg: letter (c, ±1) moves along
/// coordinate c, up for +1 and down for −1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypercubeWord {
    pub deg: usize,
    pub letters: Vec<(usize, i8)>,
}

impl HypercubeWord {
    /// Builds a word from coordinates alone, signs following the walk.
    pub fn from_coords(deg: usize, coords: &[usize]) -> HypercubeWord {
        let mut v = 0u32;
        let letters = coords
            .iter()
            .map(|&c| {
                let s = if v >> c & 1 == 0 { 1 } else { -1 };
                v ^= 1 << c;
                (c, s)
            })
            .collect();
        HypercubeWord { deg, letters }
    }

    /// Checks coordinates, sign consistency with the walk, and closure.
    pub fn validate(&self) -> Result<()> {
        let mut v = 0u32;
        for (k, &(c, s)) in self.letters.iter().enumerate() {
            if c >= self.deg {
                return Err(Error::Argument(format!("letter {k}: coordinate {c} ≥ deg {}", self.deg)));
            }
            let expected = if v >> c & 1 == 0 { 1 } else { -1 };
            if s != expected {
                return Err(Error::Argument(format!("letter {k}: sign {s} leaves the cube")));
            }
            v ^= 1 << c;
        }
        if v != 0 {
            return Err(Error::Argument("word does not close".into()));
        }
        Ok(())
    }

    pub fn closes(&self) -> bool {
        self.validate().is_ok()
    }

    /// Random closed word of even length: each coordinate drawn an even
    /// number of times, shuffled.
    pub fn random_closed(deg: usize, len: usize, seed: u64) -> HypercubeWord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coords: Vec<usize> = (0..len / 2).flat_map(|_| {
            let c = rng.random_range(0..deg);
            [c, c]
        }).collect();
        coords.shuffle(&mut rng);
        HypercubeWord::from_coords(deg, &coords)
    }

    pub fn coords(&self) -> Vec<usize> {
        self.letters.iter().map(|l| l.0).collect()
    }
}

/// The 1-cycle traced by a word.
pub fn word_cycle(h: &Hypercube, coords: &[usize]) -> QChain {
    let mut out = QChain::zero(1);
    let mut v = 0u32;
    for &c in coords {
        let s = if v >> c & 1 == 0 { 1 } else { -1 };
        out.add_scaled_at(h.edge(v, c), &Q::one(), s);
        v ^= 1 << c;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct WordContraction {
    pub deg: usize,
    pub length: usize,
    /// 2-chain F with ∂F = cycle(w).
    #[serde(serialize_with = "ser_chain")]
    pub filling: QChain,
    pub squares: usize,
    pub cancellations: usize,
    pub max_length: usize,
    /// squares / (deg · length).
    pub measured_constant: f64,
    pub certificate: TransportCertificate,
}

/// Contracts a closed word: repeatedly finds the leftmost pair of letters on
/// the same coordinate (at most deg apart), commutes the right one leftward
/// one square at a time, and cancels the adjacent pair.
pub fn hypercube_contract_word(h: &Hypercube, w: &HypercubeWord) -> Result<WordContraction> {
    if h.deg != w.deg || h.complex.dims() < 2 {
        return Err(Error::Argument("word degree must match a hypercube with 2-cells".into()));
    }
    w.validate()?;
    let d2 = h.complex.boundary_or_zero(2);
    let mut letters = w.coords();
    let start = word_cycle(h, &letters);
    let mut cycle = start.clone();
    let mut cert = TransportCertificate::new(Norm::L1, &start)?;
    let (mut squares, mut cancellations) = (0, 0);
    let mut filled = start.is_empty();
    let length = letters.len();
    while !letters.is_empty() {
        let mut last = vec![None; h.deg];
        let mut pair = None;
        for (j, &c) in letters.iter().enumerate() {
            if let Some(i) = last[c] {
                pair = Some((i, j));
                break;
            }
            last[c] = Some(j);
        }
        let (i, j) = pair.ok_or_else(|| Error::Invariant("closed word without a repeated coordinate".into()))?;
        for k in (i + 1..j).rev() {
            let v = letters[..k].iter().fold(0u32, |v, &c| v ^ 1 << c);
            let (a, b) = (letters[k], letters[k + 1]);
            letters.swap(k, k + 1);
            let sq = h.square(v, a, b);
            let mut delta = QChain::zero(1);
            let sign = |v: u32, c: usize| if v >> c & 1 == 0 { 1 } else { -1 };
            delta.add_scaled_at(h.edge(v, b), &Q::one(), sign(v, b));
            delta.add_scaled_at(h.edge(v ^ 1 << b, a), &Q::one(), sign(v ^ 1 << b, a));
            delta.add_scaled_at(h.edge(v, a), &Q::one(), -sign(v, a));
            delta.add_scaled_at(h.edge(v ^ 1 << a, b), &Q::one(), -sign(v ^ 1 << a, b));
            let unit = QChain::unit(2, sq);
            let chain = if unit.apply_matrix(&d2, 1, 0.0) == delta { unit } else { unit.negate() };
            let next = cycle.plus(&delta)?;
            // Once the cycle first vanishes the remaining squares add up to a
            // 2-cycle and are left out of the certificate.
            if !filled {
                let cost = Q::one() / cycle.norm_l1();
                cert.push(TransportStep { from: cycle.clone(), to: next.clone(), chain, cost })?;
            }
            cycle = next;
            filled |= cycle.is_empty();
            squares += 1;
        }
        letters.drain(i..i + 2);
        cancellations += 1;
    }
    if !cycle.is_empty() || cert.steps.last().is_some_and(|s| !s.to.is_empty()) {
        return Err(Error::Invariant("contraction did not reach the empty cycle".into()));
    }
    let filling = cert.total_chain().negate();
    let filling = if filling.dim() == 2 { filling } else { QChain::zero(2) };
    if filling.apply_matrix(&d2, 1, 0.0) != start {
        return Err(Error::Invariant("word filling does not bound the word".into()));
    }
    Ok(WordContraction {
        deg: h.deg,
        length,
        filling,
        squares,
        cancellations,
        max_length: length,
        measured_constant: if length == 0 { 0.0 } else { squares as f64 / (h.deg * length) as f64 },
        certificate: cert,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionRound {
    #[serde(serialize_with = "serialize_q")]
    pub norm_before: Q,
    #[serde(serialize_with = "serialize_q")]
    pub norm_after: Q,
    #[serde(serialize_with = "serialize_q")]
    pub ratio: Q,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypercubeDecomposition {
    pub deg: usize,
    /// c = d x + y + residual with ∂y = 0.
    #[serde(serialize_with = "ser_chain")]
    pub x: QChain,
    #[serde(serialize_with = "ser_chain")]
    pub y: QChain,
    #[serde(serialize_with = "ser_chain")]
    pub residual: QChain,
    pub rounds: Vec<DecompositionRound>,
    /// ‖x‖₁ + ‖y‖₁.
    #[serde(serialize_with = "serialize_q")]
    pub cost: Q,
    /// cost / (deg² ‖c‖₁).
    pub measured_constant: f64,
    pub certificate: TransportCertificate,
}

/// The map (x, y) ↦ d x + y from C₁ ⊕ C₂ to C₂.
pub fn decomposition_map(h: &Hypercube) -> SparseMatrix {
    let d2 = h.complex.boundary_or_zero(2);
    let n2 = d2.ncols();
    let mut cols: Vec<Vec<(usize, i64)>> = d2.row_lists();
    cols.extend((0..n2).map(|k| vec![(k, 1)]));
    SparseMatrix::from_columns(n2, cols)
}

/// Splits a 2-chain of the 3-skeleton into coexact and closed parts by
/// iterating c = (d∂c + ∂dc)/(deg+2) + (1/(deg+2))Σ_{c′∥c} c′.
pub fn hypercube_decompose(h: &Hypercube, c: &QChain, tol: &Q, max_rounds: usize) -> Result<HypercubeDecomposition> {
    let deg = h.deg;
    if deg < 3 || h.complex.dims() < 3 {
        return Err(Error::Precondition("decomposition needs the 3-skeleton of a cube with deg ≥ 3".into()));
    }
    if c.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: c.dim() });
    }
    let d2 = h.complex.boundary_or_zero(2);
    let d3 = h.complex.boundary_or_zero(3);
    let d3t = d3.transpose();
    let d2t = d2.transpose();
    let n1 = d2.nrows();
    let scale = Q::one() / q(deg as i64 + 2);
    let a = q(deg as i64 - 2) * &scale;
    let step_cost = q(4 + 6 * (deg as i64 - 2)) * &scale;
    let mut cert = TransportCertificate::new(Norm::L1, c)?;
    let mut x = QChain::zero(1);
    let mut y = QChain::zero(2);
    let mut cur = c.clone();
    let mut rounds = Vec::new();
    while cur.norm_l1() > *tol {
        if rounds.len() >= max_rounds {
            return Err(Error::Invariant(format!("no convergence within {max_rounds} rounds")));
        }
        let xk = cur.apply_matrix(&d2, 1, 0.0).scale(&scale);
        let yk = cur.apply_matrix(&d3t, 3, 0.0).apply_matrix(&d3, 2, 0.0).scale(&scale);
        let next = cur.minus(&xk.apply_matrix(&d2t, 2, 0.0))?.minus(&yk)?;
        let (before, after) = (cur.norm_l1(), next.norm_l1());
        let ratio = &after / &before;
        if ratio > a {
            return Err(Error::Invariant(format!("residual ratio {ratio} exceeds (deg−2)/(deg+2)")));
        }
        let mut piece = QChain::zero(2);
        for (i, v) in xk.iter() {
            piece.add_at(i, &-v);
        }
        for (k, v) in yk.iter() {
            piece.add_at(n1 + k, &-v);
        }
        cert.push(TransportStep { from: cur.clone(), to: next.clone(), chain: piece, cost: step_cost.clone() })?;
        x = x.plus(&xk)?;
        y = y.plus(&yk)?;
        rounds.push(DecompositionRound { norm_before: before, norm_after: after, ratio });
        cur = next;
    }
    if !y.apply_matrix(&d2, 1, 0.0).is_empty() {
        return Err(Error::Invariant("closed part has nonzero boundary".into()));
    }
    if x.apply_matrix(&d2t, 2, 0.0).plus(&y)?.plus(&cur)? != *c {
        return Err(Error::Invariant("decomposition does not reassemble c".into()));
    }
    let cost = x.norm_l1() + y.norm_l1();
    let n = c.norm_l1();
    let measured_constant = if n.is_zero() { 0.0 } else { crate::arith::q_to_f64(&(&cost / &n)) / (deg * deg) as f64 };
    Ok(HypercubeDecomposition { deg, x, y, residual: cur, rounds, cost, measured_constant, certificate: cert })
}

/// Per-round contraction ratio and cost of the Laplacian step, as used by
/// expfill.
pub fn decomposition_params(deg: usize, tol: Q) -> ExpFillParams {
    let scale = Q::one() / q(deg as i64 + 2);
    ExpFillParams {
        norm: Norm::L1,
        a: q(deg as i64 - 2) * &scale,
        x: q(4 + 6 * (deg as i64 - 2)) * &scale,
        tol,
        max_steps: 10_000,
    }
}

/// The Laplacian round as a step oracle over C₁ ⊕ C₂.
pub fn laplacian_oracle(h: &Hypercube) -> impl FnMut(&QChain) -> Result<(QChain, QChain)> + '_ {
    let d2 = h.complex.boundary_or_zero(2);
    let d3 = h.complex.boundary_or_zero(3);
    let (d2t, d3t) = (d2.transpose(), d3.transpose());
    let n1 = d2.nrows();
    let scale = Q::one() / q(h.deg as i64 + 2);
    move |cur: &QChain| {
        let xk = cur.apply_matrix(&d2, 1, 0.0).scale(&scale);
        let yk = cur.apply_matrix(&d3t, 3, 0.0).apply_matrix(&d3, 2, 0.0).scale(&scale);
        let next = cur.minus(&xk.apply_matrix(&d2t, 2, 0.0))?.minus(&yk)?;
        let mut piece = QChain::zero(2);
        for (i, v) in xk.iter() {
            piece.add_at(i, &-v);
        }
        for (k, v) in yk.iter() {
            piece.add_at(n1 + k, &-v);
        }
        Ok((next, piece))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qf;
    use crate::constructors::graph;

    #[test]
    fn trivial_and_single_square_words() {
        let h = Hypercube::new(3, 2).unwrap();
        let w = HypercubeWord { deg: 3, letters: vec![(0, 1), (0, -1)] };
        let r = hypercube_contract_word(&h, &w).unwrap();
        assert_eq!((r.squares, r.filling.len()), (0, 0));
        let w = HypercubeWord { deg: 3, letters: vec![(0, 1), (1, 1), (0, -1), (1, -1)] };
        let r = hypercube_contract_word(&h, &w).unwrap();
        assert_eq!(r.squares, 1);
        assert_eq!(r.filling.len(), 1);
        assert!(verify_certificate(&r.certificate, &h.complex.boundary_or_zero(2)).ok);
    }

    #[test]
    fn bad_words_rejected() {
        let h = Hypercube::new(3, 2).unwrap();
        assert!(hypercube_contract_word(&h, &HypercubeWord { deg: 3, letters: vec![(0, 1)] }).is_err());
        assert!(hypercube_contract_word(&h, &HypercubeWord { deg: 3, letters: vec![(0, 1), (0, 1)] }).is_err());
    }

    #[test]
    fn random_word_contracts() {
        let h = Hypercube::new(5, 2).unwrap();
        let w = HypercubeWord::random_closed(5, 40, 3);
        assert!(w.closes());
        let r = hypercube_contract_word(&h, &w).unwrap();
        assert!(r.filling.norm_l1() <= q(2 * 5 * 40));
        assert!(r.squares <= 5 * 40);
    }

    #[test]
    fn expfill_zero_oracle_and_geometric_bound() {
        let x = graph(2, &[(0, 1)]).unwrap();
        let map = x.boundary_or_zero(1);
        let alpha = QChain::from_pairs(0, [(0, q(-1)), (1, q(1))]);
        let mut zero = |c: &QChain| -> Result<(QChain, QChain)> { Ok((QChain::zero(0), QChain::unit(1, 0).scale(&-c.get(1)))) };
        let params = ExpFillParams { norm: Norm::L1, a: qf(1, 2), x: q(1), tol: Q::zero(), max_steps: 10 };
        let r = expfill(&mut zero, &map, &alpha, &params).unwrap();
        assert_eq!(r.certificate.steps.len(), 1);
        assert!(r.certificate.total_cost <= q(1));
        assert_eq!(r.bound, q(4));
        assert!(verify_certificate(&r.certificate, &map).ok);

        let mut half = |c: &QChain| -> Result<(QChain, QChain)> {
            let h = c.scale(&qf(1, 2));
            Ok((h.clone(), QChain::unit(1, 0).scale(&-h.get(1))))
        };
        let params = ExpFillParams { norm: Norm::L1, a: qf(1, 2), x: q(1), tol: qf(1, 1000), max_steps: 100 };
        let r = expfill(&mut half, &map, &alpha, &params).unwrap();
        assert!(r.within_bound);
        assert!(r.certificate.total_cost <= q(2));
    }

    #[test]
    fn oracle_violation_reported() {
        let x = graph(2, &[(0, 1)]).unwrap();
        let map = x.boundary_or_zero(1);
        let alpha = QChain::from_pairs(0, [(0, q(-1)), (1, q(1))]);
        let mut lazy = |c: &QChain| -> Result<(QChain, QChain)> { Ok((c.clone(), QChain::zero(1))) };
        let params = ExpFillParams { norm: Norm::L1, a: qf(1, 2), x: q(1), tol: Q::zero(), max_steps: 10 };
        assert!(matches!(expfill(&mut lazy, &map, &alpha, &params), Err(Error::OracleViolation { step: 0, .. })));
    }

    #[test]
    fn laplacian_structure_deg3() {
        let h = Hypercube::new(3, 3).unwrap();
        let d2 = h.complex.boundary_or_zero(2);
        let d3 = h.complex.boundary_or_zero(3);
        let lap = d2.transpose().mul(&d2);
        let lap2 = d3.mul(&d3.transpose());
        for s in 0..d2.ncols() {
            for t in 0..d2.ncols() {
                let v = lap.get(s, t) + lap2.get(s, t);
                let (ms, bs) = h.cell_data(2, s);
                let (mt, bt) = h.cell_data(2, t);
                let parallel = ms == mt && (bs ^ bt).count_ones() == 1;
                let expected = if s == t { 5 } else if parallel { -1 } else { 0 };
                assert_eq!(v, expected, "squares {s} {t}");
            }
        }
    }

    #[test]
    fn decomposition_of_unit_square() {
        let h = Hypercube::new(6, 3).unwrap();
        let c = QChain::unit(2, 0);
        let tol = qf(1, 1_000_000_000);
        let r = hypercube_decompose(&h, &c, &tol, 200).unwrap();
        let max_rounds = (1e9f64.ln() / (8.0f64 / 4.0).ln()).ceil() as usize;
        assert!(r.rounds.len() <= max_rounds);
        assert!(r.rounds.iter().all(|k| k.ratio <= qf(4, 8)));
        assert!(verify_certificate(&r.certificate, &decomposition_map(&h)).ok);
        let zero = hypercube_decompose(&h, &QChain::zero(2), &tol, 10).unwrap();
        assert!(zero.rounds.is_empty() && zero.x.is_empty() && zero.y.is_empty());
    }

    #[test]
    fn expfill_with_laplacian_oracle() {
        let h = Hypercube::new(4, 3).unwrap();
        let c = QChain::unit(2, 3);
        let params = decomposition_params(4, qf(1, 1000));
        let mut oracle = laplacian_oracle(&h);
        let r = expfill(&mut oracle, &decomposition_map(&h), &c, &params).unwrap();
        assert!(r.within_bound);
        assert!(r.filling_norm <= q(10 * 16));
    }

    #[test]
    fn composition_law_arithmetic() {
        let h = Hypercube::new(3, 3).unwrap();
        let c = QChain::unit(2, 0);
        let map = decomposition_map(&h);
        let mut oracle = laplacian_oracle(&h);
        let p1 = ExpFillParams { max_steps: 1, tol: Q::zero(), ..decomposition_params(3, Q::zero()) };
        let first = expfill(&mut oracle, &map, &c, &p1).err();
        assert!(first.is_some());
        let p = decomposition_params(3, qf(1, 10));
        let r = expfill(&mut oracle, &map, &c, &p).unwrap();
        let n = r.certificate.steps.len();
        assert!(n >= 2);
        let mut a = r.certificate.clone();
        a.steps.truncate(1);
        a.norm_trace.truncate(2);
        a.total_cost = rational_norm(&a.steps[0].chain, Norm::L1).unwrap() / a.start_norm();
        let mut b = TransportCertificate::new(Norm::L1, &a.steps[0].to).unwrap();
        for s in &r.certificate.steps[1..] {
            b.push(s.clone()).unwrap();
        }
        let (joined, check) = compose(&a, &b).unwrap();
        assert_eq!(joined.total_cost, r.certificate.total_cost);
        assert!(check.within_x_plus_y_rho);
    }
}
