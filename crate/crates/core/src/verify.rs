//! Batch re-checking of module invariants with counterexample dumps.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{q, q_to_f64, qf, Magnitude, Q};
use crate::chain::{Norm, QChain};
use crate::complex::CellComplex;
use crate::constructors::{
    build_fibration, hypercube_skeleton, leray_serre_check, named_complex, random_complex, random_connected_graph, simplex_boundary, zn_presentation,
    Hypercube,
};
use crate::error::{Error, Result};
use crate::filling::{cheeger, CheegerOptions, Method, Side, Variant};
use crate::homology::{homology, homology_all, int_rows, rank_q, snf, torsdiameter_report, universal_abelian_cover, chain_contraction_probe};
use crate::linalg;
use crate::par::{self, Execution};
use crate::spectral::{hodge_laplacian, matrix_norm_l1, restricted_min_eigenvalue, spectral_report, split_laplacian, tilde_h2_l2};
use crate::surgery::{meridian_contraction, min_dominant_slope, presentation_matrix, random_link, surgery_h1};
use crate::transport::{
    decomposition_map, decomposition_params, expfill, hypercube_contract_word, hypercube_decompose, laplacian_oracle, verify_certificate, word_cycle,
    HypercubeWord,
};

pub const SUITES: &[&str] = &["spectral", "filling", "transport", "homology", "surgery", "fibration"];

/// invariant → check id table, kept next to the crate manifest.
pub const MANIFEST: &str = include_str!("../verify_manifest.json");

#[derive(Clone, Debug, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub suite: String,
    pub invariant: String,
    pub tests: Vec<String>,
}

pub fn manifest() -> Vec<ManifestEntry> {
    serde_json::from_str(MANIFEST).expect("manifest is valid JSON")
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub suite: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

struct Outcome {
    passed: bool,
    detail: String,
    counterexample: Option<Value>,
}

impl Outcome {
    fn pass(detail: impl Into<String>) -> Result<Outcome> {
        Ok(Outcome { passed: true, detail: detail.into(), counterexample: None })
    }
}

fn fail(detail: impl Into<String>, cx: Value) -> Result<Outcome> {
    Ok(Outcome { passed: false, detail: detail.into(), counterexample: Some(cx) })
}

type CheckFn = fn() -> Result<Outcome>;

pub struct Check {
    pub id: &'static str,
    pub suite: &'static str,
    run: CheckFn,
}

macro_rules! checks {
    ($($id:literal, $suite:literal, $f:ident;)*) => {
        pub const CHECKS: &[Check] = &[$(Check { id: $id, suite: $suite, run: $f },)*];
    };
}

checks! {
    "complex.boundary_squared", "homology", boundary_squared;
    "spectral.fullspectrum", "spectral", fullspectrum;
    "spectral.l2easy0", "spectral", l2easy0;
    "spectral.sandwich", "spectral", sandwich;
    "spectral.zero_detection", "spectral", zero_detection;
    "filling.h0_diameter", "filling", h0_diameter;
    "filling.l2_cross_method", "filling", l2_cross_method;
    "filling.reorder_invariance", "filling", reorder_invariance;
    "filling.witnesses", "filling", witnesses;
    "filling.heuristic_upper_bound", "filling", heuristic_upper_bound;
    "transport.word_contraction", "transport", word_contraction;
    "transport.decomposition", "transport", decomposition;
    "transport.expfill", "transport", expfill_bound;
    "homology.snf", "homology", snf_random;
    "homology.fixtures", "homology", fixture_groups;
    "homology.covers", "homology", covers;
    "homology.torsdiameter", "homology", torsdiameter;
    "homology.probe", "homology", probe;
    "surgery.determinant", "surgery", surgery_determinant;
    "surgery.dominance", "surgery", surgery_dominance;
    "surgery.meridian", "surgery", surgery_meridian;
    "surgery.roundtrip", "surgery", surgery_roundtrip;
    "fibration.leray_serre", "fibration", fibration_inequalities;
}

/// Runs every check of `suite` ("all" for everything), in parallel across
/// checks.
pub fn run_suite(suite: &str, exec: Execution) -> Result<VerifyReport> {
    if suite != "all" && !SUITES.contains(&suite) {
        return Err(Error::Argument(format!("unknown suite {suite:?} (expected all or one of {})", SUITES.join(", "))));
    }
    let selected: Vec<&Check> = CHECKS.iter().filter(|c| suite == "all" || c.suite == suite).collect();
    let checks = par::map(exec, &selected, |c| {
        let (passed, detail, counterexample) = match (c.run)() {
            Ok(o) => (o.passed, o.detail, o.counterexample),
            Err(e) => (false, e.to_string(), None),
        };
        CheckResult { id: c.id, suite: c.suite, passed, detail, counterexample }
    });
    Ok(VerifyReport { suite: suite.into(), passed: checks.iter().all(|c| c.passed), checks })
}

fn complex_json(x: &CellComplex) -> Value {
    serde_json::from_str(&x.to_json()).unwrap_or(Value::Null)
}

/// Random augmented 2-complexes on 6–7 vertices.
pub fn random_two_complexes(count: usize, seed: u64) -> Vec<CellComplex> {
    (0..count as u64).map(|k| random_complex(6 + (k % 2) as usize, 2, 0.6, seed + k).expect("valid parameters")).collect()
}

fn float_basis(vs: &[Vec<Q>], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, vs.len(), |r, c| q_to_f64(&vs[c][r]))
}

/// h_i(L²) by direct Rayleigh minimization of ∂d over an exact basis of
/// ker ∂_i (equal to the cycle space when H_i = 0).
pub fn rayleigh_h(x: &CellComplex, i: usize) -> Result<Option<f64>> {
    let n = x.num_cells(i as isize);
    let kernel = linalg::kernel_basis(&x.boundary_or_zero(i as isize).to_q_rows(), n);
    let (down, _) = split_laplacian(x, i)?;
    Ok(restricted_min_eigenvalue(&down, &float_basis(&kernel, n)).map(|l| l.max(0.0).sqrt()))
}

fn homology_vanishes(x: &CellComplex, i: usize) -> bool {
    let n = x.num_cells(i as isize);
    n - rank_q(&x.boundary_or_zero(i as isize)) == rank_q(&x.boundary_or_zero(i as isize + 1))
}

fn boundary_squared() -> Result<Outcome> {
    let mut xs: Vec<CellComplex> = Vec::new();
    for deg in 1..=6 {
        for k in 1..=deg.min(3) {
            xs.push(hypercube_skeleton(deg, k)?);
        }
    }
    for n in 1..=5 {
        xs.push(simplex_boundary(n)?);
    }
    for name in ["rp2-6", "klein-8", "torus-7", "moore-z2", "zn-presentation(7)", "lens-cw(5)"] {
        xs.push(named_complex(name)?);
    }
    xs.extend((0..10).map(|s| random_complex(7, 2 + (s % 2) as usize, 0.5, s).expect("valid parameters")));
    for x in &xs {
        for d in 1..=x.dims() as isize {
            if !x.boundary_or_zero(d - 1).mul(&x.boundary_or_zero(d)).is_zero() {
                return fail(format!("∂∂ ≠ 0 in dimension {d} of {}", x.name()), complex_json(x));
            }
        }
    }
    Outcome::pass(format!("{} complexes", xs.len()))
}

fn fullspectrum() -> Result<Outcome> {
    let mut tested = 0;
    for x in random_two_complexes(8, 100) {
        for i in 0..=1 {
            if !homology_vanishes(&x, i) {
                continue;
            }
            let r = spectral_report(&x, i, false)?;
            let delta = hodge_laplacian(&x, i)?;
            let target = r.cheeger_down.min(r.cheeger_up).powi(2);
            let gap = r.hodge_gap.unwrap_or(f64::INFINITY);
            if (gap - target).abs() > 1e-9 * matrix_norm_l1(&delta).max(1.0) {
                return fail(format!("dim {i}: gap {gap} vs min(h_i, h^i)² = {target}"), complex_json(&x));
            }
            if let Some(rh) = rayleigh_h(&x, i)? {
                if (rh - r.cheeger_down).abs() > 1e-9 {
                    return fail(format!("dim {i}: Rayleigh {rh} vs spectral {}", r.cheeger_down), complex_json(&x));
                }
            }
            tested += 1;
        }
    }
    Outcome::pass(format!("{tested} (complex, dim) pairs"))
}

fn l2easy0() -> Result<Outcome> {
    let mut tested = 0;
    for x in random_two_complexes(8, 200) {
        for i in 0..x.dims() {
            if homology_vanishes(&x, i) && homology_vanishes(&x, i + 1) {
                let a = spectral_report(&x, i, false)?.cheeger_down;
                let b = spectral_report(&x, i + 1, false)?.cheeger_up;
                if !(a == b || (a - b).abs() <= 1e-9) {
                    return fail(format!("dim {i}: h_i = {a}, h^(i+1) = {b}"), complex_json(&x));
                }
                tested += 1;
            }
        }
    }
    Outcome::pass(format!("{tested} (complex, dim) pairs"))
}

fn sandwich() -> Result<Outcome> {
    let mut tested = 0;
    let mut xs = random_two_complexes(8, 300);
    xs.push(simplex_boundary(3)?.with_augmentation(true));
    xs.push(hypercube_skeleton(3, 2)?);
    for x in xs {
        let t = tilde_h2_l2(&x)?;
        if x.dims() >= 2 && x.num_cells(2) > 0 && !t.cohomology_nonzero {
            if !t.sandwich_holds {
                return fail("1/h² ≤ 1/h̃² ≤ 1/h² + 1 fails", complex_json(&x));
            }
            tested += 1;
        }
    }
    Outcome::pass(format!("{tested} complexes"))
}

fn zero_detection() -> Result<Outcome> {
    for x in random_two_complexes(6, 400) {
        for i in 0..=x.dims() {
            let r = spectral_report(&x, i, false)?;
            if !r.zero_detection_agrees || !r.residual_ok {
                return fail(format!("dim {i}: zero count disagrees with exact betti {}", r.betti_check), complex_json(&x));
            }
        }
    }
    Outcome::pass("zero eigenvalue counts match exact ranks")
}

fn h0_diameter() -> Result<Outcome> {
    let opts = CheegerOptions::default();
    for seed in 0..8 {
        let x = random_connected_graph(6 + seed as usize, 0.25, seed)?;
        let v = cheeger(&x, 0, Norm::L1, Side::Chain, Variant::Plain, Method::Brute, &opts)?;
        let expect = Magnitude::Rational(qf(2, x.diameter()? as i64));
        if v.value != expect {
            return fail(format!("h₀ = {} but 2/diam = {}", v.value.render(), expect.render()), complex_json(&x));
        }
    }
    Outcome::pass("8 graphs")
}

fn l2_cross_method() -> Result<Outcome> {
    let opts = CheegerOptions::default();
    let mut xs = vec![simplex_boundary(3)?, hypercube_skeleton(3, 2)?];
    xs.extend(random_two_complexes(4, 500).into_iter().filter(|x| x.total_cells() <= 30));
    for x in &xs {
        for i in 0..x.dims() {
            let brute = cheeger(x, i, Norm::L2, Side::Chain, Variant::Plain, Method::Brute, &opts)?.value.to_f64();
            let spec = spectral_report(x, i, false)?.cheeger_down;
            let agree = (brute.is_infinite() && spec.is_infinite()) || (brute - spec).abs() <= 1e-7;
            if !agree {
                return fail(format!("dim {i}: brute {brute} vs spectral {spec}"), complex_json(x));
            }
        }
    }
    Outcome::pass(format!("{} complexes", xs.len()))
}

fn reorder_invariance() -> Result<Outcome> {
    let opts = CheegerOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for x in [simplex_boundary(3)?, hypercube_skeleton(3, 2)?, random_complex(6, 2, 0.4, 3)?] {
        for d in 0..=x.dims() {
            let mut perm: Vec<usize> = (0..x.num_cells(d as isize)).collect();
            for k in (1..perm.len()).rev() {
                perm.swap(k, rng.random_range(0..=k));
            }
            let y = x.permute_cells(d, &perm)?;
            for i in 0..x.dims() {
                let a = cheeger(&x, i, Norm::L1, Side::Chain, Variant::Plain, Method::Brute, &opts)?.value;
                let b = cheeger(&y, i, Norm::L1, Side::Chain, Variant::Plain, Method::Brute, &opts)?.value;
                if a != b {
                    return fail(format!("h_{i} changed from {} to {} after permuting {d}-cells", a.render(), b.render()), complex_json(&x));
                }
            }
        }
    }
    Outcome::pass("3 complexes, every dimension permuted")
}

fn witnesses() -> Result<Outcome> {
    let opts = CheegerOptions::default();
    for x in [simplex_boundary(3)?, hypercube_skeleton(3, 2)?, random_complex(6, 2, 0.5, 8)?] {
        for i in 0..x.dims() {
            for p in [Norm::L1, Norm::LInf] {
                let v = cheeger(&x, i, p, Side::Chain, Variant::Plain, Method::Brute, &opts)?;
                if let (Some(c), Some(f)) = (&v.witness_cycle, &v.witness_filling) {
                    let b = f.apply_matrix(&x.boundary_or_zero(i as isize + 1), i as isize, 0.0);
                    let ratio = crate::filling::mag_div(&c.norm_exact(p), &f.norm_exact(p));
                    if &b != c || ratio != v.value {
                        return fail(format!("dim {i} {p:?}: witness does not realize the value"), complex_json(&x));
                    }
                }
            }
        }
    }
    Outcome::pass("witness fillings bound their cycles and realize the value")
}

fn heuristic_upper_bound() -> Result<Outcome> {
    let opts = CheegerOptions { samples: 64, ..CheegerOptions::default() };
    for x in [simplex_boundary(3)?, random_complex(6, 2, 0.5, 4)?] {
        for i in 0..x.dims() {
            let b = cheeger(&x, i, Norm::L1, Side::Chain, Variant::Plain, Method::Brute, &opts)?.value;
            let h = cheeger(&x, i, Norm::L1, Side::Chain, Variant::Plain, Method::Heuristic, &opts)?.value;
            if h.to_f64() < b.to_f64() - 1e-12 {
                return fail(format!("dim {i}: heuristic {} below exact {}", h.render(), b.render()), complex_json(&x));
            }
        }
    }
    Outcome::pass("heuristic values bound the exact value from above")
}

fn word_contraction() -> Result<Outcome> {
    for deg in 3..=6 {
        let h = Hypercube::new(deg, 2)?;
        let d2 = h.complex.boundary_or_zero(2);
        for seed in 0..5 {
            let w = HypercubeWord::random_closed(deg, 2 * (4 + seed as usize * 4), seed);
            let r = hypercube_contract_word(&h, &w)?;
            let cx = || serde_json::to_value(&w).unwrap_or(Value::Null);
            if r.filling.apply_matrix(&d2, 1, 0.0) != word_cycle(&h, &w.coords()) {
                return fail("∂F ≠ cycle(w)", cx());
            }
            if r.filling.norm_l1() > q((2 * deg * w.letters.len()) as i64) {
                return fail("‖F‖₁ > 2·deg·len", cx());
            }
            let v = verify_certificate(&r.certificate, &d2);
            if !v.ok {
                return fail(format!("certificate rejected: {}", v.failures.join("; ")), cx());
            }
        }
    }
    Outcome::pass("20 words, certificates independently verified")
}

fn decomposition() -> Result<Outcome> {
    let tol = qf(1, 1_000_000);
    for deg in 3..=5 {
        let h = Hypercube::new(deg, 3)?;
        let map = decomposition_map(&h);
        let c = QChain::unit(2, 0);
        let r = hypercube_decompose(&h, &c, &tol, 1000)?;
        let bound = q(10 * (deg * deg) as i64) * c.norm_l1();
        if r.cost > bound {
            return fail(format!("deg {deg}: cost {} exceeds 10·deg²", r.cost), json!({"deg": deg, "cell": 0}));
        }
        let v = verify_certificate(&r.certificate, &map);
        if !v.ok {
            return fail(format!("deg {deg}: certificate rejected: {}", v.failures.join("; ")), json!({"deg": deg, "cell": 0}));
        }
    }
    Outcome::pass("unit squares for deg 3..5: ratios, reconstruction and certificates exact")
}

fn expfill_bound() -> Result<Outcome> {
    let h = Hypercube::new(4, 3)?;
    let mut oracle = laplacian_oracle(&h);
    let r = expfill(&mut oracle, &decomposition_map(&h), &QChain::unit(2, 1), &decomposition_params(4, qf(1, 1000)))?;
    if !r.within_bound {
        return fail(format!("filling norm {} exceeds x/(1−a)·‖α‖ = {}", r.filling_norm, r.bound), json!({"deg": 4, "cell": 1}));
    }
    Outcome::pass(format!("{} steps, filling norm {} ≤ {}", r.certificate.steps.len(), r.filling_norm, r.bound))
}

fn snf_random() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let (r, c) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let m: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.random_range(-5..=5)).collect()).collect();
        let im = int_rows(&m);
        if !snf(&im).verify(&im) {
            return fail("U·M·V = D check failed", json!(m));
        }
    }
    Outcome::pass("40 matrices")
}

fn fixture_groups() -> Result<Outcome> {
    let rp2 = homology(&named_complex("rp2-6")?, 1)?;
    if rp2.to_string() != "Z/2" {
        return fail(format!("H₁(rp2-6) = {rp2}"), json!("rp2-6"));
    }
    for n in 2..=16 {
        let g = homology(&zn_presentation(n)?, 1)?;
        if g.torsion != vec![BigInt::from(n)] || g.betti != 0 {
            return fail(format!("H₁(zn-presentation({n})) = {g}"), json!(n));
        }
    }
    let b = homology_all(&hypercube_skeleton(4, 2)?);
    if b[2].betti != 7 {
        return fail(format!("hypercube(4, 2) betti₂ = {}", b[2].betti), json!({"deg": 4, "k": 2}));
    }
    Outcome::pass("rp2-6, zn-presentation(2..16), hypercube(4, 2)")
}

fn covers() -> Result<Outcome> {
    for name in ["rp2-6", "moore-z2", "zn-presentation(5)", "lens-cw(3)"] {
        let x = named_complex(name)?;
        let c = universal_abelian_cover(&x)?;
        let checks = c.verify();
        if !checks.all() {
            return fail(format!("{name}: {checks:?}"), complex_json(&x));
        }
    }
    Outcome::pass("4 fixtures")
}

fn torsdiameter() -> Result<Outcome> {
    let xs: Vec<CellComplex> = (2..=9).map(zn_presentation).collect::<Result<_>>()?;
    let r = torsdiameter_report(&xs)?;
    if !r.all_within_fiber_bound {
        return fail("ratio exceeds |H₁|", serde_json::to_value(&r).unwrap_or(Value::Null));
    }
    Outcome::pass(format!("{} rows", r.rows.len()))
}

fn probe() -> Result<Outcome> {
    let r = chain_contraction_probe(&simplex_boundary(4)?, 10_000)?;
    if !(r.sum_check && r.homotopy_check && r.nonzero_multiples >= 1) {
        return fail("probe checks failed on ∂Δ⁴", serde_json::to_value(&r).unwrap_or(Value::Null));
    }
    Outcome::pass(format!("{} nonzero multiples", r.nonzero_multiples))
}

fn surgery_determinant() -> Result<Outcome> {
    for seed in 0..15 {
        let l = random_link(1 + seed as usize % 5, 3, seed);
        let m = min_dominant_slope(&l);
        for s in m..=m + 5 {
            let h = surgery_h1(&l, s);
            if h.determinant.is_zero() || h.h1.torsion_order() != h.determinant.abs() {
                return fail(format!("q = {s}: |H₁| = {} vs det {}", h.h1.torsion_order(), h.determinant), json!(l.lk));
            }
        }
    }
    Outcome::pass("15 links × 6 slopes")
}

fn surgery_dominance() -> Result<Outcome> {
    for seed in 0..30 {
        let l = random_link(1 + seed as usize % 6, 3, 1000 + seed);
        let m = min_dominant_slope(&l);
        let p = presentation_matrix(&l, m);
        let dominant = p.iter().enumerate().all(|(i, r)| r[i] > r.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.abs()).sum());
        if !dominant || surgery_h1(&l, m).determinant.is_zero() {
            return fail(format!("slope {m} not dominant or singular"), json!(l.lk));
        }
        if m > 1 && presentation_matrix(&l, m - 1).iter().enumerate().all(|(i, r)| r[i] > r.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.abs()).sum()) {
            return fail(format!("slope {} is already dominant", m - 1), json!(l.lk));
        }
    }
    Outcome::pass("30 links")
}

fn surgery_meridian() -> Result<Outcome> {
    for seed in 0..10 {
        let l = random_link(2 + seed as usize % 4, 3, 2000 + seed);
        let s = (2 * l.max_row_sum()).max(1);
        let a: Vec<Q> = (0..l.n()).map(|k| q(k as i64 - 1)).collect();
        let r = meridian_contraction(&l, s, &a, &qf(1, 1_000_000), 200)?;
        if !(r.factor_bounds_ratios && r.halving && r.converged) {
            return fail("meridian contraction certificate failed", json!({"lk": l.lk, "q": s}));
        }
    }
    Outcome::pass("10 links at q = 2·max row sum")
}

fn surgery_roundtrip() -> Result<Outcome> {
    for seed in 0..10 {
        let l = random_link(1 + seed as usize % 6, 3, 3000 + seed);
        let s = seed as i64 - 4;
        let p = presentation_matrix(&l, s);
        let back: Vec<Vec<i64>> = p.iter().enumerate().map(|(i, r)| r.iter().enumerate().map(|(j, &x)| if i == j { x - s } else { x }).collect()).collect();
        if back != l.lk {
            return fail("presentation − q·I ≠ Lk", json!(l.lk));
        }
    }
    Outcome::pass("10 links")
}

fn fibration_inequalities() -> Result<Outcome> {
    let opts = CheegerOptions::default();
    let mut kinds: Vec<(String, u64)> = vec![("prism".into(), 0), ("identity".into(), 1), ("point".into(), 2)];
    kinds.extend((0..3).map(|s| ("product".to_string(), s)));
    let mut seen = BTreeSet::new();
    for (kind, seed) in kinds {
        let f = build_fibration(&kind, 4, seed)?;
        for p in [Norm::L1, Norm::LInf] {
            let r = leray_serre_check(&f, p, &opts)?;
            if !r.holds {
                return fail(format!("{kind} (seed {seed}, {p:?}) fails"), serde_json::to_value(&r).unwrap_or(Value::Null));
            }
        }
        seen.insert(kind);
    }
    Outcome::pass(format!("{} fibration kinds in L¹ and L∞", seen.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_covers_every_check() {
        let m = manifest();
        let ids: BTreeSet<&str> = m.iter().map(|e| e.id.as_str()).collect();
        let registered: BTreeSet<&str> = CHECKS.iter().map(|c| c.id).collect();
        assert_eq!(ids, registered);
        for e in &m {
            let c = CHECKS.iter().find(|c| c.id == e.id).unwrap();
            assert_eq!(c.suite, e.suite);
            assert!(!e.invariant.is_empty() && !e.tests.is_empty());
        }
    }

    #[test]
    fn surgery_suite_passes() {
        let r = run_suite("surgery", Execution::Sequential).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(run_suite("bogus", Execution::Sequential).is_err());
    }
}
