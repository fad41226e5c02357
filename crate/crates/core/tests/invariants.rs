use hdx_core::arith::q;
use hdx_core::constructors::{random_complex, Hypercube};
use hdx_core::filling::{cheeger, CheegerOptions, Method, Side, Variant};
use hdx_core::homology::snf;
use hdx_core::surgery::{surgery_h1, FramedLink};
use hdx_core::transport::{hypercube_contract_word, verify_certificate, word_cycle, HypercubeWord};
use hdx_core::Norm;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn det(m: &[Vec<i64>]) -> BigInt {
    // Laplace expansion; matrices here are at most 4×4.
    let n = m.len();
    if n == 0 {
        return BigInt::from(1);
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> = m[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect()).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            BigInt::from(sign * m[0][j]) * det(&minor)
        })
        .sum()
}

fn symmetric(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(-3i64..=3, n * (n + 1) / 2).prop_map(move |v| {
        let mut lk = vec![vec![0; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                lk[i][j] = v[k];
                lk[j][i] = v[k];
                k += 1;
            }
        }
        lk
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cheeger_reorder_invariant(seed in 0u64..10_000, perm_seed in any::<u64>(), d in 0usize..=2) {
        let x = random_complex(5, 2, 0.5, seed).unwrap();
        let n = x.num_cells(d as isize);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = perm_seed;
        for k in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(k, (s >> 33) as usize % (k + 1));
        }
        let y = x.permute_cells(d, &perm).unwrap();
        let opts = CheegerOptions::default();
        for i in 0..x.dims() {
            let a = cheeger(&x, i, Norm::L1, Side::Chain, Variant::Plain, Method::Brute, &opts).unwrap().value;
            let b = cheeger(&y, i, Norm::L1, Side::Chain, Variant::Plain, Method::Brute, &opts).unwrap().value;
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn word_contraction_certified(deg in 3usize..=6, half in 0usize..=12, seed in any::<u64>()) {
        let h = Hypercube::new(deg, 2).unwrap();
        let w = HypercubeWord::random_closed(deg, 2 * half, seed);
        let r = hypercube_contract_word(&h, &w).unwrap();
        let d2 = h.complex.boundary_or_zero(2);
        prop_assert_eq!(r.filling.apply_matrix(&d2, 1, 0.0), word_cycle(&h, &w.coords()));
        prop_assert!(r.filling.norm_l1() <= q((2 * deg * w.letters.len()) as i64));
        prop_assert!(verify_certificate(&r.certificate, &d2).ok);
    }

    #[test]
    fn snf_certified(m in prop::collection::vec(prop::collection::vec(-20i64..=20, 1..=5), 1..=5)) {
        let cols = m[0].len();
        let m: Vec<Vec<BigInt>> = m.into_iter().map(|r| (0..cols).map(|j| BigInt::from(*r.get(j).unwrap_or(&0))).collect()).collect();
        let s = snf(&m);
        prop_assert!(s.verify(&m));
        let diag = s.diagonal();
        prop_assert!(diag.iter().all(|x| !x.is_negative()));
        for w in diag.windows(2) {
            prop_assert!(w[1].is_zero() || (&w[1] % &w[0]).is_zero());
        }
    }

    #[test]
    fn surgery_det_matches_snf(lk in (1usize..=4).prop_flat_map(symmetric), slope in -8i64..=8) {
        let shifted: Vec<Vec<i64>> = lk.iter().enumerate().map(|(i, r)| r.iter().enumerate().map(|(j, &x)| if i == j { x + slope } else { x }).collect()).collect();
        let d = det(&shifted);
        let h = surgery_h1(&FramedLink::new(lk).unwrap(), slope);
        prop_assert_eq!(&h.determinant, &d);
        if d.is_zero() {
            prop_assert!(h.h1.betti > 0);
        } else {
            prop_assert_eq!(h.h1.torsion_order(), d.abs());
        }
    }
}
