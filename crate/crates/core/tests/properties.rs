use margolis_core::margolis::{duality_check, ext_q, kunneth_check, les_check, margolis_homology};
use margolis_core::qmod::{QModule, QModuleFile};
use margolis_core::random::{random_qmodule, random_ses, RandomModuleParams};
use margolis_core::resolution::ext_by_resolution;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> impl Strategy<Value = (u64, RandomModuleParams)> {
    (any::<u64>(), prop::sample::select(vec![2u64, 3, 5, 7]), prop::sample::select(vec![1i64, 3, 5, 7]), 0usize..30, 8i64..24)
        .prop_map(|(seed, p, qdeg, max_dim, width)| (seed, RandomModuleParams { p, qdeg, max_dim, width }))
}

fn module(seed: u64, params: RandomModuleParams) -> QModule {
    random_qmodule(&mut ChaCha8Rng::seed_from_u64(seed), params).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn random_modules_square_to_zero((seed, pr) in params()) {
        prop_assert!(module(seed, pr).validate().valid);
    }

    #[test]
    fn ext_matches_resolution((seed, pr) in params(), s in 0u32..6) {
        let m = module(seed, pr);
        let fast = ext_q(&m, s).unwrap();
        for (d, n) in ext_by_resolution(&m, s).unwrap() {
            if fast.knows(d) {
                prop_assert_eq!(fast.dim_or_zero(d), n, "degree {}", d);
            }
        }
    }

    #[test]
    fn dual_homology_is_dual((seed, pr) in params()) {
        let r = duality_check(&module(seed, pr)).unwrap();
        prop_assert!(r.holds, "{:?}", r.table);
    }

    #[test]
    fn double_dual_and_suspension((seed, pr) in params(), n in -9i64..9) {
        let m = module(seed, pr);
        let h = margolis_homology(&m).unwrap();
        let hdd = margolis_homology(&m.dual().dual()).unwrap();
        let hs = margolis_homology(&m.suspend(n)).unwrap();
        for d in h.valid_window.degrees() {
            prop_assert_eq!(h.dim(d), hdd.dim(d));
            prop_assert_eq!(h.dim(d), hs.dim(d + n));
        }
    }

    #[test]
    fn decomposition_reassembles((seed, pr) in params()) {
        let m = module(seed, pr);
        let dec = m.cyclic_decompose().unwrap();
        let h = margolis_homology(&m).unwrap();
        prop_assert!(m.decomposition_is_basis(&dec));
        for d in dec.valid_window.degrees() {
            prop_assert_eq!(dec.reassembled_dim(d, m.qdeg()), m.space().dim_or_zero(d));
            prop_assert_eq!(dec.trivial_dim(d), h.dim(d));
        }
    }

    #[test]
    fn long_exact_sequence_is_exact((seed, pr) in params()) {
        let ses = random_ses(&mut ChaCha8Rng::seed_from_u64(seed), pr).unwrap();
        let r = les_check(&ses).unwrap();
        prop_assert!(r.exact, "{:?}", r.failures);
    }

    #[test]
    fn kunneth_for_pairs((seed, pr) in params(), seed2 in any::<u64>()) {
        let a = module(seed, pr);
        let b = module(seed2, RandomModuleParams { max_dim: 12, ..pr });
        let r = kunneth_check(&a, &b).unwrap();
        prop_assert!(r.holds, "{:?}", r.table);
    }

    #[test]
    fn tensor_with_free_is_free((seed, pr) in params(), top in -5i64..5) {
        let m = module(seed, pr);
        let f = QModule::free(pr.p, pr.qdeg, top).unwrap();
        let t = QModule::tensor(&m, &f).unwrap();
        prop_assert!(margolis_homology(&t).unwrap().is_zero());
    }

    #[test]
    fn explicit_json_round_trip((seed, pr) in params()) {
        let m = module(seed, pr);
        let text = QModuleFile::explicit_json(&m).to_string();
        let back = QModuleFile::from_json(&text).unwrap().build().unwrap();
        let (h1, h2) = (margolis_homology(&m).unwrap(), margolis_homology(&back).unwrap());
        prop_assert_eq!(m.space().window(), back.space().window());
        for d in m.window().degrees() {
            prop_assert_eq!(m.space().dim_or_zero(d), back.space().dim_or_zero(d));
            prop_assert_eq!(m.q_block(d), back.q_block(d));
            prop_assert_eq!(h1.dim(d), h2.dim(d));
        }
    }
}

#[test]
fn ext_of_k_and_free_up_to_ten() {
    for p in [2, 3, 5] {
        for q in [1, 3, 5, 7] {
            let k = QModule::k(p, q, 0).unwrap();
            let f = QModule::free(p, q, 0).unwrap();
            for s in 0..=10u32 {
                let e = ext_q(&k, s).unwrap();
                let nz: Vec<(i64, usize)> = e.support().map(|(d, l)| (d, l.len())).collect();
                assert_eq!(nz, vec![(-(s as i64) * q, 1)]);
                if s > 0 {
                    assert!(ext_q(&f, s).unwrap().is_zero());
                }
            }
        }
    }
}
