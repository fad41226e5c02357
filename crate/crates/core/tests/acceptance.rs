//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Each criterion checks library output against oracles computed
//! here from the raw boundary matrices.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use hdx_core::arith::{q, qf, q_to_f64, Magnitude, Q};
use hdx_core::constructors::{
    build_fibration, construct_h0_filling, construct_h1_cofilling, graph, hypercube_skeleton, named_complex, random_complex, random_connected_graph,
    simplex_boundary, zn_presentation, GraphFibration, Hypercube, FIXTURES,
};
use hdx_core::filling::{cheeger, CheegerOptions, Method, Side, Variant};
use hdx_core::homology::{betti_numbers, chain_contraction_probe, homology, homology_all, snf, torsdiameter_report, universal_abelian_cover};
use hdx_core::spectral::{spectral_report, tilde_h2_l2};
use hdx_core::surgery::{meridian_contraction, min_dominant_slope, random_link, surgery_h1, FramedLink};
use hdx_core::transport::{hypercube_contract_word, hypercube_decompose, HypercubeWord};
use hdx_core::{CellComplex, Norm, QChain, SparseMatrix};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- oracles

type Vecq = BTreeMap<usize, Q>;

fn apply(m: &SparseMatrix, v: &Vecq) -> Vecq {
    let mut cols: HashMap<usize, Vec<(usize, i64)>> = HashMap::new();
    for (r, c, x) in m.triplets() {
        cols.entry(c).or_default().push((r, x));
    }
    let mut out = Vecq::new();
    for (j, a) in v {
        for &(r, x) in cols.get(j).map(Vec::as_slice).unwrap_or(&[]) {
            *out.entry(r).or_insert_with(Q::zero) += a * q(x);
        }
    }
    out.retain(|_, x| !x.is_zero());
    out
}

fn apply_t(m: &SparseMatrix, v: &Vecq) -> Vecq {
    let mut rows: HashMap<usize, Vec<(usize, i64)>> = HashMap::new();
    for (r, c, x) in m.triplets() {
        rows.entry(r).or_default().push((c, x));
    }
    let mut out = Vecq::new();
    for (i, a) in v {
        for &(c, x) in rows.get(i).map(Vec::as_slice).unwrap_or(&[]) {
            *out.entry(c).or_insert_with(Q::zero) += a * q(x);
        }
    }
    out.retain(|_, x| !x.is_zero());
    out
}

fn vq(c: &QChain) -> Vecq {
    c.iter().map(|(i, x)| (i, x.clone())).collect()
}

fn l1(v: &Vecq) -> Q {
    v.values().fold(Q::zero(), |a, x| a + x.abs())
}

fn dense(m: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (r, c, x) in m.triplets() {
        d[(r, c)] += x as f64;
    }
    d
}

fn rational_rows(m: &SparseMatrix) -> Vec<Vec<Q>> {
    let mut d = vec![vec![Q::zero(); m.ncols()]; m.nrows()];
    for (r, c, x) in m.triplets() {
        d[r][c] += q(x);
    }
    d
}

/// Reduced row echelon form; returns pivot columns.
fn rref(a: &mut [Vec<Q>]) -> Vec<usize> {
    let (rows, cols) = (a.len(), a.first().map_or(0, Vec::len));
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = Q::one() / &a[r][c];
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..cols {
                    let t = &f * &a[r][k];
                    a[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn rank(m: &SparseMatrix) -> usize {
    rref(&mut rational_rows(m)).len()
}

fn kernel(m: &SparseMatrix) -> Vec<Vec<Q>> {
    let n = m.ncols();
    let mut a = rational_rows(m);
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); n];
            v[f] = Q::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Real homology H_i vanishes, by exact ranks.
fn acyclic(x: &CellComplex, i: usize) -> bool {
    x.num_cells(i as isize) - rank(&x.boundary_or_zero(i as isize)) == rank(&x.boundary_or_zero(i as isize + 1))
}

/// Smallest nonzero singular value, selecting the exact rank.
fn min_singular(m: &SparseMatrix) -> f64 {
    let r = rank(m);
    if r == 0 {
        return f64::INFINITY;
    }
    let mut s: Vec<f64> = dense(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s[r - 1]
}

/// min over unit i-cycles z of ‖∂_{i+1}ᵀ z‖, by Rayleigh quotient on an
/// orthonormalized exact basis of ker ∂_i.
fn rayleigh(x: &CellComplex, i: usize) -> f64 {
    let n = x.num_cells(i as isize);
    let ker = kernel(&x.boundary_or_zero(i as isize));
    if ker.is_empty() {
        return f64::INFINITY;
    }
    let basis = DMatrix::from_fn(n, ker.len(), |r, c| q_to_f64(&ker[c][r]));
    let qm = basis.qr().q();
    let up = dense(&x.boundary_or_zero(i as isize + 1));
    let op = qm.transpose() * &up * up.transpose() * &qm;
    let l = op.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    l.max(0.0).sqrt()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a.is_infinite() && b.is_infinite() && a.signum() == b.signum()) || (a - b).abs() <= tol
}

fn edges_of(x: &CellComplex) -> Result<Vec<(usize, usize)>, String> {
    (0..x.num_cells(1)).map(|e| ok(x.edge_endpoints(e))).collect()
}

fn bfs_diameter(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut best = 0;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        best = best.max(dist.into_iter().max().unwrap_or(0));
    }
    best
}

fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        BigInt::one()
    } else {
        sign * &a[n - 1][n - 1]
    }
}

fn int_matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter().map(|row| (0..cols).map(|j| (0..inner).fold(BigInt::zero(), |s, k| s + &row[k] * &b[k][j])).collect()).collect()
}

fn mag(m: &Magnitude) -> Result<Q, String> {
    match m {
        Magnitude::Rational(x) => Ok(x.clone()),
        other => Err(format!("expected an exact rational, got {}", other.render())),
    }
}

/// Every fixture, with parametrized entries at small parameters.
fn fixture_instances() -> Result<Vec<CellComplex>, String> {
    let mut out = Vec::new();
    for f in FIXTURES {
        match f.name.split_once('(') {
            Some((stem, _)) => {
                for k in [2, 3, 5] {
                    out.push(ok(named_complex(&format!("{stem}({k})")))?);
                }
            }
            None => out.push(ok(named_complex(f.name))?),
        }
    }
    Ok(out)
}

fn euler(x: &CellComplex) -> i64 {
    (0..=x.dims()).map(|d| if d % 2 == 0 { 1 } else { -1 } * x.num_cells(d as isize) as i64).sum()
}

// ------------------------------------------------------------- criteria

fn c01_chain_complex_soundness() -> Outcome {
    let mut xs = Vec::new();
    for deg in 1..=8 {
        xs.push(ok(hypercube_skeleton(deg, deg.min(3)))?);
    }
    for n in 1..=5 {
        xs.push(ok(simplex_boundary(n))?);
    }
    xs.extend(fixture_instances()?);
    for s in 0..50u64 {
        xs.push(ok(random_complex(5 + (s % 5) as usize, 1 + (s % 3) as usize, 0.5, s))?);
    }
    let mut products = 0;
    for x in &xs {
        for d in 1..=x.dims() as isize {
            let lower = x.boundary_or_zero(d - 1);
            let upper = x.boundary_or_zero(d);
            for j in 0..upper.ncols() {
                let col = apply(&upper, &Vecq::from([(j, Q::one())]));
                ensure!(apply(&lower, &col).is_empty(), "∂∂ ≠ 0 on {}-cell {j} of {}", d, x.name());
            }
            products += 1;
        }
    }
    Ok(format!("{} complexes, {products} composites", xs.len()))
}

/// Random 2-complexes shared by criteria 2 to 4.
fn spectral_suite() -> Result<Vec<CellComplex>, String> {
    (0..20u64).map(|k| ok(random_complex(6 + (k % 3) as usize, 2, 0.6, 7000 + k))).collect()
}

fn c02_full_spectrum() -> Outcome {
    let mut pairs = 0;
    for x in spectral_suite()? {
        for i in 0..=x.dims() {
            if x.num_cells(i as isize) == 0 || !acyclic(&x, i) {
                continue;
            }
            let r = ok(spectral_report(&x, i, false))?;
            let down = dense(&x.boundary_or_zero(i as isize));
            let up = dense(&x.boundary_or_zero(i as isize + 1));
            let delta = down.transpose() * &down + &up * up.transpose();
            let norm = (0..delta.ncols()).map(|c| delta.column(c).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
            let gap_oracle = delta.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            let h_i = min_singular(&x.boundary_or_zero(i as isize + 1));
            let h_up = min_singular(&x.boundary_or_zero(i as isize));
            let gap = r.hodge_gap.ok_or_else(|| format!("{} dim {i}: no Hodge gap", x.name()))?;
            let target = r.cheeger_down.min(r.cheeger_up).powi(2);
            ensure!((gap - target).abs() <= 1e-9 * norm, "{} dim {i}: gap {gap} vs min(h_i, h^i)² = {target}", x.name());
            ensure!((gap - gap_oracle).abs() <= 1e-9 * norm, "{} dim {i}: gap {gap} vs eigen oracle {gap_oracle}", x.name());
            ensure!(close(r.cheeger_down, h_i, 1e-9) && close(r.cheeger_up, h_up, 1e-9), "{} dim {i}: constants disagree with singular values", x.name());
            let ray = rayleigh(&x, i);
            ensure!(close(r.cheeger_down, ray, 1e-9), "{} dim {i}: h_i = {} but Rayleigh gives {ray}", x.name(), r.cheeger_down);
            pairs += 1;
        }
    }
    ensure!(pairs >= 20, "only {pairs} acyclic (complex, dim) pairs");
    Ok(format!("{pairs} acyclic (complex, dim) pairs"))
}

fn c03_l2easy0() -> Outcome {
    let mut pairs = 0;
    for x in spectral_suite()? {
        for i in 0..x.dims() {
            if !(acyclic(&x, i) && acyclic(&x, i + 1)) {
                continue;
            }
            let a = ok(spectral_report(&x, i, false))?.cheeger_down;
            let b = ok(spectral_report(&x, i + 1, false))?.cheeger_up;
            ensure!(close(a, b, 1e-9), "{} dim {i}: h_i = {a}, h^(i+1) = {b}", x.name());
            pairs += 1;
        }
    }
    ensure!(pairs > 0, "no pair with H_i = H_(i+1) = 0");
    Ok(format!("{pairs} pairs"))
}

fn c04_sandwich() -> Outcome {
    let mut xs = spectral_suite()?;
    xs.push(ok(named_complex("rp2-6"))?);
    xs.extend((2..=6).map(zn_presentation).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?);
    let mut tested = 0;
    for x in &xs {
        if x.dims() < 2 || x.num_cells(2) == 0 || rank(&x.boundary_or_zero(2)) != x.num_cells(2) {
            continue;
        }
        let t = ok(tilde_h2_l2(x))?;
        ensure!(!t.cohomology_nonzero, "{}: H² = 0 by exact rank but reported nonzero", x.name());
        let h2 = min_singular(&x.boundary_or_zero(2));
        ensure!(close(t.h2, h2, 1e-9), "{}: h² = {} vs singular value {h2}", x.name(), t.h2);
        let (inv_h, inv_t) = (1.0 / t.h2, 1.0 / t.value);
        ensure!(inv_h <= inv_t + 1e-9 && inv_t <= inv_h + 1.0 + 1e-9, "{}: 1/h² = {inv_h}, 1/h̃² = {inv_t}", x.name());
        tested += 1;
    }
    ensure!(tested > 0, "no complex with H² = 0");
    Ok(format!("{tested} complexes"))
}

fn c05_h0_identity() -> Outcome {
    let opts = CheegerOptions { cap: 40, ..CheegerOptions::default() };
    let mut sizes = Vec::new();
    for k in 0..20u64 {
        let n = 6 + (k as usize * 34) / 19;
        let x = ok(random_connected_graph(n, 3.0 / n as f64, 500 + k))?;
        ensure!(x.augmented(), "graph {k} is not augmented");
        let diam = bfs_diameter(x.num_cells(0), &edges_of(&x)?);
        let v = ok(cheeger(&x, 0, Norm::L1, Side::Chain, Variant::Plain, Method::Brute, &opts))?;
        ensure!(mag(&v.value)? == qf(2, diam as i64), "graph {k} ({n} vertices): h₀ = {} but 2/diam = 2/{diam}", v.value.render());
        sizes.push(n);
    }
    Ok(format!("20 graphs on {}..{} vertices", sizes[0], sizes[19]))
}

fn word_cycle_oracle(h: &Hypercube, coords: &[usize]) -> Result<Vecq, String> {
    let mut by_ends: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, (a, b)) in edges_of(&h.complex)?.into_iter().enumerate() {
        by_ends.insert((a, b), e);
    }
    let vertex = |v: u32| h.cell(0, v).ok_or_else(|| format!("no vertex {v}"));
    let mut out = Vecq::new();
    let mut v = 0u32;
    for &c in coords {
        let w = v ^ 1 << c;
        let (a, b) = (vertex(v)?, vertex(w)?);
        let (e, s) = match (by_ends.get(&(a, b)), by_ends.get(&(b, a))) {
            (Some(&e), _) => (e, 1),
            (_, Some(&e)) => (e, -1),
            _ => return Err(format!("no edge between {v} and {w}")),
        };
        *out.entry(e).or_insert_with(Q::zero) += q(s);
        v = w;
    }
    out.retain(|_, x| !x.is_zero());
    Ok(out)
}

fn c06_word_contraction() -> Outcome {
    let mut words = 0;
    let mut worst: f64 = 0.0;
    for deg in 3..=7 {
        let h = ok(Hypercube::new(deg, 2))?;
        let d2 = h.complex.boundary_or_zero(2);
        for k in 0..20u64 {
            let len = 2 * (1 + (k as usize % 20));
            let w = HypercubeWord::random_closed(deg, len, 100 * deg as u64 + k);
            ensure!(w.letters.len() <= 40, "word longer than 40");
            let r = ok(hypercube_contract_word(&h, &w))?;
            let f = vq(&r.filling);
            ensure!(apply(&d2, &f) == word_cycle_oracle(&h, &w.coords())?, "deg {deg} word {k}: ∂F ≠ cycle(w)");
            let bound = q((2 * deg * w.letters.len()) as i64);
            ensure!(l1(&f) <= bound, "deg {deg} word {k}: ‖F‖₁ = {} > {bound}", l1(&f));
            worst = worst.max(q_to_f64(&l1(&f)) / (deg * w.letters.len()) as f64);
            words += 1;
        }
    }
    Ok(format!("{words} words, max ‖F‖₁/(deg·len) = {worst:.3}"))
}

fn c07_hypercube_decomposition() -> Outcome {
    let tol = qf(1, 1_000_000_000);
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for deg in 3..=7usize {
        let h = ok(Hypercube::new(deg, 3))?;
        let n2 = h.complex.num_cells(2);
        let d2 = h.complex.boundary_or_zero(2);
        let a = qf(deg as i64 - 2, deg as i64 + 2);
        let mut inputs: Vec<QChain> = [0, n2 / 2, n2 - 1].iter().map(|&k| QChain::unit(2, k)).collect();
        for _ in 0..2 {
            let mut c = QChain::zero(2);
            for _ in 0..4 {
                c.add_scaled_at(rng.random_range(0..n2), &Q::one(), rng.random_range(-3..=3));
            }
            if c.is_empty() {
                c = QChain::unit(2, 1);
            }
            inputs.push(c);
        }
        for c in inputs {
            let r = ok(hypercube_decompose(&h, &c, &tol, 100_000))?;
            for (k, round) in r.rounds.iter().enumerate() {
                ensure!(round.norm_after <= &a * &round.norm_before, "deg {deg} round {k}: ratio {} > {a}", round.ratio);
            }
            let cv = vq(&c);
            let mut rebuilt = apply_t(&d2, &vq(&r.x));
            for (i, v) in vq(&r.y).into_iter().chain(vq(&r.residual)) {
                *rebuilt.entry(i).or_insert_with(Q::zero) += v;
            }
            rebuilt.retain(|_, v| !v.is_zero());
            ensure!(rebuilt == cv, "deg {deg}: c ≠ dx + y + residual");
            let boundary_y = apply(&h.complex.boundary_or_zero(2), &vq(&r.y));
            ensure!(boundary_y.is_empty(), "deg {deg}: ∂y ≠ 0");
            ensure!(l1(&vq(&r.residual)) <= &tol * l1(&cv), "deg {deg}: residual above tolerance");
            let cost = l1(&vq(&r.x)) + l1(&vq(&r.y));
            let bound = q(10 * (deg * deg) as i64) * l1(&cv);
            ensure!(cost <= bound, "deg {deg}: ‖x‖₁ + ‖y‖₁ = {cost} > 10·deg²·‖c‖₁ = {bound}");
            worst = worst.max(q_to_f64(&(cost / l1(&cv))) / (deg * deg) as f64);
            runs += 1;
        }
    }
    Ok(format!("{runs} decompositions, max cost/(deg²‖c‖₁) = {worst:.4}"))
}

fn c08_snf_torsion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for t in 0..200 {
        let (rows, cols) = (rng.random_range(1..=7), rng.random_range(1..=7));
        let m: Vec<Vec<BigInt>> = (0..rows).map(|_| (0..cols).map(|_| BigInt::from(rng.random_range(-9..=9))).collect()).collect();
        let s = snf(&m);
        ensure!(int_matmul(&int_matmul(&s.u, &m), &s.v) == s.d, "matrix {t}: U·M·V ≠ D");
        ensure!(bareiss_det(s.u.clone()).abs().is_one() && bareiss_det(s.v.clone()).abs().is_one(), "matrix {t}: U or V not unimodular");
        let diag: Vec<BigInt> = (0..rows.min(cols)).map(|i| s.d[i][i].clone()).collect();
        for i in 0..rows {
            for j in 0..cols {
                ensure!(i == j || s.d[i][j].is_zero(), "matrix {t}: D not diagonal");
            }
        }
        ensure!(diag.iter().all(|x| !x.is_negative()), "matrix {t}: negative invariant factor");
        for w in diag.windows(2) {
            ensure!(w[1].is_zero() || (!w[0].is_zero() && (&w[1] % &w[0]).is_zero()), "matrix {t}: {} does not divide {}", w[0], w[1]);
        }
    }
    let rp2 = ok(homology(&ok(named_complex("rp2-6"))?, 1))?;
    ensure!(rp2.betti == 0 && rp2.torsion == vec![BigInt::from(2)], "H₁(rp2-6) = {rp2}");
    for n in 1..=64usize {
        let g = ok(homology(&ok(zn_presentation(n))?, 1))?;
        let expect: Vec<BigInt> = if n == 1 { vec![] } else { vec![BigInt::from(n)] };
        ensure!(g.betti == 0 && g.torsion == expect, "H₁(zn-presentation({n})) = {g}");
    }
    let hc = ok(hypercube_skeleton(4, 2))?;
    let b2 = homology_all(&hc)[2].betti;
    ensure!(b2 == 7, "betti₂ of the 2-skeleton of the 4-cube is {b2}");
    ensure!(euler(&hc) - 1 == b2 as i64, "Euler characteristic disagrees with betti₂");
    Ok("200 matrices, rp2-6, zn-presentation(1..64), hypercube(4,2)".into())
}

fn det_oracle(lk: &[Vec<i64>], s: i64) -> BigInt {
    bareiss_det(lk.iter().enumerate().map(|(i, r)| r.iter().enumerate().map(|(j, &x)| BigInt::from(if i == j { x + s } else { x })).collect()).collect())
}

fn c09_surgery() -> Outcome {
    let mut checked = 0;
    for k in 0..50u64 {
        let l = random_link(1 + (k % 6) as usize, 3, 9000 + k);
        ensure!(l.lk.iter().flatten().all(|x| x.abs() <= 3), "entries out of range");
        let row = l.lk.iter().map(|r| r.iter().map(|x| x.abs()).sum::<i64>()).max().unwrap_or(0);
        let m = min_dominant_slope(&l);
        for s in m..=m + 10 {
            let h = surgery_h1(&l, s);
            let det = det_oracle(&l.lk, s);
            ensure!(!det.is_zero() && h.h1.is_finite() && h.h1.torsion_order() == det.abs(), "link {k}, q = {s}: |H₁| = {} vs |det| = {}", h.h1, det.abs());
            let a: Vec<Q> = (0..l.n()).map(|i| q(1 + i as i64)).collect();
            let r = ok(meridian_contraction(&l, s, &a, &qf(1, 1_000_000), 30))?;
            let mut cur = a.clone();
            for (step, ratio) in r.ratios.iter().enumerate() {
                let next: Vec<Q> = l.lk.iter().map(|row| row.iter().zip(&cur).fold(Q::zero(), |acc, (&x, y)| acc + q(x) * y) * qf(-1, s)).collect();
                let norm = |v: &[Q]| v.iter().fold(Q::zero(), |acc, x| acc + x.abs());
                let own = norm(&next) / norm(&cur);
                ensure!(&own == ratio, "link {k}, q = {s}, step {step}: ratio {ratio} vs {own}");
                ensure!(own <= qf(row, s), "link {k}, q = {s}: step factor {own} > {row}/{s}");
                cur = next;
            }
            if s == 2 * row && row > 0 {
                ensure!(r.ratios.iter().all(|x| *x <= qf(1, 2)), "link {k}: factor above 1/2 at q = 2·{row}");
            }
            checked += 1;
        }
        if row > 0 && 2 * row < m {
            let r = ok(meridian_contraction(&l, 2 * row, &vec![q(1); l.n()], &qf(1, 1_000_000), 30))?;
            ensure!(r.ratios.iter().all(|x| *x <= qf(1, 2)), "link {k}: factor above 1/2 at q = 2·{row}");
        }
    }
    for s in (-12i64..=12).filter(|&s| s != 0) {
        let u = surgery_h1(&FramedLink::unknot(), s).h1;
        ensure!(u.betti == 0 && u.torsion_order() == BigInt::from(s.abs()), "unknot q = {s}: {u}");
        let hopf = surgery_h1(&FramedLink::hopf(), s);
        let expect = (s * s - 1).abs();
        if expect == 0 {
            ensure!(!hopf.h1.is_finite(), "Hopf q = {s} should have infinite H₁");
        } else {
            ensure!(hopf.h1.torsion_order() == BigInt::from(expect), "Hopf q = {s}: {}", hopf.h1);
        }
    }
    Ok(format!("{checked} (link, slope) pairs, unknot and Hopf for |q| ≤ 12"))
}

fn c10_covers() -> Outcome {
    let mut covered = 0;
    for x in fixture_instances()? {
        if !homology(&x, 1).map_err(|e| e.to_string())?.is_finite() {
            continue;
        }
        let c = ok(universal_abelian_cover(&x))?;
        let checks = c.verify();
        ensure!(checks.free && checks.euler_multiplicative && checks.quotient_recovery, "{}: {checks:?}", x.name());
        let g = c.order();
        ensure!(euler(&c.total) == g as i64 * euler(&x), "{}: χ(cover) ≠ |H₁|·χ", x.name());
        for cell in 0..c.total.num_cells(0) {
            for h in 1..g {
                ensure!(c.act(h, cell) != cell, "{}: deck element {h} fixes vertex {cell}", x.name());
            }
        }
        covered += 1;
    }
    let rp2 = ok(universal_abelian_cover(&ok(named_complex("rp2-6"))?))?;
    ensure!(betti_numbers(&rp2.total) == [0, 0, 1] && homology_all(&rp2.total).iter().all(|h| h.torsion.is_empty()), "RP² cover is not a homology sphere");
    let mut xs = Vec::new();
    for n in 2..=16usize {
        let x = ok(zn_presentation(n))?;
        let c = ok(universal_abelian_cover(&x))?;
        let d = bfs_diameter(c.total.num_cells(0), &edges_of(&c.total)?);
        ensure!(d == n / 2, "zn-presentation({n}) cover diameter {d} ≠ {}", n / 2);
        xs.push(x);
    }
    xs.push(ok(named_complex("rp2-6"))?);
    xs.push(ok(named_complex("moore-z2"))?);
    let r = ok(torsdiameter_report(&xs))?;
    ensure!(r.rows.len() == xs.len() && r.all_within_fiber_bound, "torsdiameter table incomplete or out of bound");
    for row in &r.rows {
        ensure!(row.diam_cover as u64 <= row.h1_order * (row.diam_base as u64 + 1), "{}: diam ratio above |H₁|", row.name);
    }
    Ok(format!("{covered} fixtures, {} table rows, log-log slope {:?}", r.rows.len(), r.loglog_slope))
}

fn inverse(x: &CellComplex, i: usize, p: Norm, side: Side, variant: Variant) -> Result<Q, String> {
    let opts = CheegerOptions { cap: 64, ..CheegerOptions::default() };
    mag(&ok(cheeger(x, i, p, side, variant, Method::Brute, &opts))?.inverse)
}

fn norm_p(v: &[Q], p: Norm) -> Q {
    match p {
        Norm::LInf => v.iter().map(Signed::abs).max().unwrap_or_else(Q::zero),
        _ => v.iter().fold(Q::zero(), |a, x| a + x.abs()),
    }
}

fn leray_serre(f: &GraphFibration, p: Norm, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let ee = edges_of(&f.e)?;
    let be = edges_of(&f.b)?;
    let degree = |n: usize, es: &[(usize, usize)]| (0..n).map(|v| es.iter().filter(|&&(a, b)| a == v || b == v).count()).max().unwrap_or(0);
    let d = degree(f.e.num_cells(0), &ee).max(degree(f.b.num_cells(0), &be)) as i64;
    let mut sizes = vec![0usize; f.b.num_cells(0)];
    for &u in &f.vertex_map {
        sizes[u] += 1;
    }
    let c = *sizes.iter().max().unwrap_or(&0) as i64;
    let mut fib0 = Q::zero();
    let mut fib1 = Q::zero();
    for u in 0..f.b.num_cells(0) {
        let verts: Vec<usize> = (0..f.e.num_cells(0)).filter(|&v| f.vertex_map[v] == u).collect();
        let local: Vec<(usize, usize)> = ee
            .iter()
            .filter(|&&(a, b)| f.vertex_map[a] == u && f.vertex_map[b] == u)
            .map(|&(a, b)| (verts.iter().position(|&v| v == a).unwrap(), verts.iter().position(|&v| v == b).unwrap()))
            .collect();
        let g = ok(graph(verts.len(), &local))?;
        fib0 = fib0.max(inverse(&g, 0, p, Side::Chain, Variant::Plain)?);
        if !local.is_empty() {
            fib1 = fib1.max(inverse(&g, 1, p, Side::Cochain, Variant::Coexact)?);
        }
    }
    let rhs0 = q(2 * d) * (inverse(&f.b, 0, p, Side::Chain, Variant::Plain)? + q(1)) * (fib0 + q(1));
    let lhs0 = inverse(&f.e, 0, p, Side::Chain, Variant::Plain)?;
    ensure!(lhs0 <= rhs0, "{} {p:?}: 1/h₀(E) = {lhs0} > {rhs0}", f.kind);
    let b1 = if be.is_empty() { Q::zero() } else { inverse(&f.b, 1, p, Side::Cochain, Variant::Coexact)? };
    let rhs1 = q(c) * (b1 + q(1)) * (fib1 + q(1));
    let lhs1 = inverse(&f.e, 1, p, Side::Cochain, Variant::Coexact)?;
    ensure!(lhs1 <= rhs1, "{} {p:?}: 1/h¹(E) = {lhs1} > {rhs1}", f.kind);

    let ne = f.e.num_cells(0);
    let d1 = f.e.boundary_or_zero(1);
    for a in 0..ne {
        for b in a + 1..ne {
            let mut alpha = vec![Q::zero(); ne];
            alpha[a] = q(1);
            alpha[b] = q(-1);
            let fill = ok(construct_h0_filling(f, &alpha, p))?;
            let image = apply(&d1, &fill.iter().cloned().enumerate().filter(|(_, x)| !x.is_zero()).collect());
            let target: Vecq = alpha.iter().cloned().enumerate().filter(|(_, x)| !x.is_zero()).collect();
            ensure!(image == target, "{}: constructed filling of v{a} − v{b} is wrong", f.kind);
            ensure!(norm_p(&fill, p) <= &rhs0 * norm_p(&alpha, p), "{}: constructed filling too large", f.kind);
        }
    }
    for _ in 0..12 {
        let phi: Vecq = (0..ne).map(|v| (v, q(rng.random_range(-3..=3)))).filter(|(_, x)| !x.is_zero()).collect();
        let alpha_map = apply_t(&d1, &phi);
        if alpha_map.is_empty() {
            continue;
        }
        let alpha: Vec<Q> = (0..f.e.num_cells(1)).map(|e| alpha_map.get(&e).cloned().unwrap_or_else(Q::zero)).collect();
        let cof = ok(construct_h1_cofilling(f, &alpha, p))?;
        let image = apply_t(&d1, &cof.iter().cloned().enumerate().filter(|(_, x)| !x.is_zero()).collect());
        ensure!(image == alpha_map, "{}: constructed cofilling is wrong", f.kind);
        ensure!(norm_p(&cof, p) <= &rhs1 * norm_p(&alpha, p), "{}: constructed cofilling too large", f.kind);
    }
    Ok(())
}

fn c11_leray_serre() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut fibrations = vec![ok(build_fibration("prism", 3, 0))?, ok(build_fibration("identity", 5, 1))?];
    for s in 0..5 {
        fibrations.push(ok(build_fibration("product", 4, 40 + s))?);
    }
    for f in &fibrations {
        for p in [Norm::L1, Norm::LInf] {
            leray_serre(f, p, &mut rng)?;
        }
    }
    Ok(format!("{} fibrations in L¹ and L∞", fibrations.len()))
}

fn c12_contraction_probe() -> Outcome {
    let x = ok(simplex_boundary(4))?;
    let r = ok(chain_contraction_probe(&x, 1_000_000))?;
    ensure!(!r.partial, "probe stopped early");
    ensure!(r.sum_check && r.homotopy_check, "probe identities failed");
    let fundamental: Vecq = r.tets.iter().map(|t| (t.cell, q(t.orientation))).collect();
    ensure!(fundamental.len() == x.num_cells(3), "not every 3-cell probed");
    ensure!(apply(&x.boundary_or_zero(3), &fundamental).is_empty(), "orientations do not form a cycle");
    let total = r.tets.iter().fold(Q::zero(), |a, t| a + q(t.orientation) * &t.multiple);
    ensure!(total == q(1), "Σ ε_r m_r = {total}, expected 1");
    let nonzero = r.tets.iter().filter(|t| !t.multiple.is_zero()).count();
    ensure!(nonzero >= 1, "no 3-cell carries a multiple of [X]");
    Ok(format!("{nonzero} of {} tetrahedra carry a nonzero multiple", r.tets.len()))
}

fn permuted(x: &CellComplex, rng: &mut ChaCha8Rng) -> Result<CellComplex, String> {
    let mut y = x.clone();
    for d in 0..=x.dims() {
        let mut perm: Vec<usize> = (0..x.num_cells(d as isize)).collect();
        for k in (1..perm.len()).rev() {
            perm.swap(k, rng.random_range(0..=k));
        }
        y = ok(y.permute_cells(d, &perm))?;
    }
    Ok(y)
}

fn c13_cross_method() -> Outcome {
    let opts = CheegerOptions::default();
    let mut xs = vec![ok(simplex_boundary(2))?, ok(simplex_boundary(3))?, ok(hypercube_skeleton(3, 2))?, ok(zn_presentation(3))?];
    xs.extend((0..30u64).filter_map(|s| random_complex(5 + (s % 2) as usize, 2, 0.5, 600 + s).ok()).filter(|x| x.total_cells() <= 30).take(8));
    let mut compared = 0;
    for x in &xs {
        ensure!(x.total_cells() <= 30, "{} too large", x.name());
        for i in 0..=x.dims() {
            let r = ok(spectral_report(x, i, false))?;
            if i < x.dims() {
                let brute = ok(cheeger(x, i, Norm::L2, Side::Chain, Variant::Plain, Method::Brute, &opts))?.value.to_f64();
                ensure!(close(brute, r.cheeger_down, 1e-7), "{} h_{i}: brute {brute} vs spectral {}", x.name(), r.cheeger_down);
                compared += 1;
            }
            if i > 0 {
                let brute = ok(cheeger(x, i, Norm::L2, Side::Cochain, Variant::Plain, Method::Brute, &opts))?.value.to_f64();
                ensure!(close(brute, r.cheeger_up, 1e-7), "{} h^{i}: brute {brute} vs spectral {}", x.name(), r.cheeger_up);
                compared += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut reorders = 0;
    for x in &xs {
        let y = permuted(x, &mut rng)?;
        for i in 0..=x.dims() {
            for side in [Side::Chain, Side::Cochain] {
                let a = ok(cheeger(x, i, Norm::L1, side, Variant::Plain, Method::Brute, &opts))?.value;
                let b = ok(cheeger(&y, i, Norm::L1, side, Variant::Plain, Method::Brute, &opts))?.value;
                ensure!(a == b, "{} {side} dim {i}: {} changed to {} under reordering", x.name(), a.render(), b.render());
                reorders += 1;
            }
        }
    }
    Ok(format!("{compared} L² comparisons on {} complexes, {reorders} reordered L¹ values", xs.len()))
}

// --------------------------------------------------------------- driver

struct Criterion {
    id: &'static str,
    limit_s: f64,
    run: fn() -> Outcome,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: "c01_chain_complex_soundness", limit_s: 10.0, run: c01_chain_complex_soundness },
    Criterion { id: "c02_full_spectrum", limit_s: 60.0, run: c02_full_spectrum },
    Criterion { id: "c03_l2easy0", limit_s: 60.0, run: c03_l2easy0 },
    Criterion { id: "c04_sandwich", limit_s: 60.0, run: c04_sandwich },
    Criterion { id: "c05_h0_identity", limit_s: 60.0, run: c05_h0_identity },
    Criterion { id: "c06_word_contraction", limit_s: 30.0, run: c06_word_contraction },
    Criterion { id: "c07_hypercube_decomposition", limit_s: 60.0, run: c07_hypercube_decomposition },
    Criterion { id: "c08_snf_torsion", limit_s: 30.0, run: c08_snf_torsion },
    Criterion { id: "c09_surgery", limit_s: 30.0, run: c09_surgery },
    Criterion { id: "c10_covers", limit_s: 60.0, run: c10_covers },
    Criterion { id: "c11_leray_serre", limit_s: 60.0, run: c11_leray_serre },
    Criterion { id: "c12_contraction_probe", limit_s: 120.0, run: c12_contraction_probe },
    Criterion { id: "c13_cross_method", limit_s: 60.0, run: c13_cross_method },
];

/// Every acceptance reference in the verification manifest names a criterion.
fn manifest_references() -> Outcome {
    let manifest: serde_json::Value = ok(serde_json::from_str(include_str!("../verify_manifest.json")))?;
    let mut refs = 0;
    for entry in manifest.as_array().ok_or("manifest is not an array")? {
        for t in entry["tests"].as_array().ok_or("entry without tests")? {
            let t = t.as_str().unwrap_or_default();
            if let Some(id) = t.strip_prefix("acceptance::") {
                ensure!(CRITERIA.iter().any(|c| c.id == id), "manifest names unknown criterion {id}");
                refs += 1;
            }
            if let Some(id) = t.strip_prefix("invariants::") {
                ensure!(include_str!("invariants.rs").contains(&format!("fn {id}(")), "manifest names unknown invariant {id}");
                refs += 1;
            }
        }
    }
    Ok(format!("{refs} references resolved"))
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    for c in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| c.id.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let result = result.and_then(|d| if secs <= c.limit_s { Ok(d) } else { Err(format!("{d}; runtime {secs:.1}s exceeds {}s", c.limit_s)) });
        match result {
            Ok(detail) => println!("PASS {} ({secs:.2}s): {detail}", c.id),
            Err(why) => {
                failed += 1;
                println!("FAIL {} ({secs:.2}s): {why}", c.id);
            }
        }
    }
    std::panic::set_hook(hook);
    if filters.is_empty() {
        match manifest_references() {
            Ok(d) => println!("PASS manifest: {d}"),
            Err(why) => {
                failed += 1;
                println!("FAIL manifest: {why}");
            }
        }
    }
    println!("{} of {ran} criteria passed", ran - failed.min(ran));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
