use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use udg_core::brown_words::{adjoint, antipode, coproduct, counit, flip, Leg, Letter, Word, WordPoly};
use udg_core::convolutions::{convolve, eval_free_product_oracle, eval_product_state, ProductKind};
use udg_core::haar_traces::{
    eval_free_haar, eval_tensor_haar, eval_tensor_haar_oracle, FreeHaarTrace, TensorHaarTrace,
};
use udg_core::matrix_lab::{mc_estimate, sample_haar_unitary, Source};
use udg_core::noncrossing::{
    enumerate_nc_on, is_noncrossing, kreweras_is_maximal_brute_force, kreweras_relative, NCPartition,
};
use udg_core::nonexistence::{phi1, phi2};
use udg_core::states::{gram_psd_check, CharacterState};
use udg_core::{SharedState, StateEvaluator, C64};

const KINDS: [ProductKind; 5] = [
    ProductKind::Free,
    ProductKind::Tensor,
    ProductKind::Boolean,
    ProductKind::Monotone,
    ProductKind::AntiMonotone,
];

fn letter(n: usize) -> impl Strategy<Value = Letter> {
    (1..=n, 1..=n, any::<bool>()).prop_map(|(row, col, star)| Letter { row, col, star })
}

fn word(n: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(letter(n), 0..=max_len).prop_map(move |ls| Word::new(n, ls).unwrap())
}

fn sized_word(max_n: usize, max_len: usize) -> impl Strategy<Value = Word> {
    (1..=max_n).prop_flat_map(move |n| word(n, max_len))
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

fn haar_character(n: usize, seed: u64) -> CharacterState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CharacterState::new(sample_haar_unitary(n, &mut rng)).unwrap()
}

fn state_zoo(n: usize, seed: u64) -> Vec<SharedState> {
    vec![
        Arc::new(FreeHaarTrace::new(n)),
        Arc::new(TensorHaarTrace::new(n)),
        Arc::new(CharacterState::counit(n)),
        Arc::new(haar_character(n, seed)),
        Arc::new(phi2(n)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counit_is_a_two_sided_unit(w in sized_word(3, 5)) {
        let target = WordPoly::from_word(&w, C64::new(1.0, 0.0));
        for leg in [Leg::One, Leg::Two] {
            let mut acc = WordPoly::zero(w.dim());
            for bw in coproduct(&w).unwrap() {
                let c = counit(&bw.leg_word(leg));
                acc.add_term(bw.leg_word(leg.other()).letters().to_vec(), c);
            }
            prop_assert!(acc.approx_eq(&target, 1e-12), "{leg:?}: {w}");
        }
    }

    #[test]
    fn coproduct_multiplies_characters(w in sized_word(3, 5), s in any::<u64>()) {
        let n = w.dim();
        let a = haar_character(n, s);
        let b = haar_character(n, s.wrapping_add(1));
        let ab = CharacterState::new(a.matrix().matmul(b.matrix())).unwrap();
        let conv = convolve(ProductKind::Tensor, Arc::new(a), Arc::new(b)).unwrap();
        prop_assert!(close(conv.eval(&w).unwrap(), ab.eval(&w).unwrap(), 1e-10));
    }

    #[test]
    fn convolution_is_associative(w in word(2, 3), s in any::<u64>(), pick in prop::array::uniform3(0usize..5), k in 0usize..5) {
        let zoo = state_zoo(2, s);
        let (a, b, c) = (zoo[pick[0]].clone(), zoo[pick[1]].clone(), zoo[pick[2]].clone());
        let kind = KINDS[k];
        let left = convolve(kind, Arc::new(convolve(kind, a.clone(), b.clone()).unwrap()), c.clone()).unwrap();
        let right = convolve(kind, a, Arc::new(convolve(kind, b, c).unwrap())).unwrap();
        prop_assert!(close(left.eval(&w).unwrap(), right.eval(&w).unwrap(), 1e-10), "{kind} on {w}");
    }

    #[test]
    fn flip_swaps_tensor_and_free_factors(w in word(2, 3), s in any::<u64>(), i in 0usize..5, j in 0usize..5) {
        let zoo = state_zoo(2, s);
        for kind in [ProductKind::Tensor, ProductKind::Free, ProductKind::Boolean] {
            for bw in coproduct(&w).unwrap() {
                let x = eval_product_state(kind, zoo[i].as_ref(), zoo[j].as_ref(), &flip(&bw)).unwrap();
                let y = eval_product_state(kind, zoo[j].as_ref(), zoo[i].as_ref(), &bw).unwrap();
                prop_assert!(close(x, y, 1e-12), "{kind} on {bw}");
            }
        }
    }

    #[test]
    fn monotone_flips_to_anti_monotone(w in word(2, 3), s in any::<u64>(), i in 0usize..5, j in 0usize..5) {
        let zoo = state_zoo(2, s);
        for bw in coproduct(&w).unwrap() {
            let x = eval_product_state(ProductKind::Monotone, zoo[i].as_ref(), zoo[j].as_ref(), &flip(&bw)).unwrap();
            let y = eval_product_state(ProductKind::AntiMonotone, zoo[j].as_ref(), zoo[i].as_ref(), &bw).unwrap();
            prop_assert!(close(x, y, 1e-12), "{bw}");
        }
    }

    #[test]
    fn free_recursion_matches_cumulant_oracle(w in word(2, 4), s in any::<u64>(), i in 0usize..5, j in 0usize..5) {
        let zoo = state_zoo(2, s);
        for bw in coproduct(&w).unwrap() {
            let fast = eval_product_state(ProductKind::Free, zoo[i].as_ref(), zoo[j].as_ref(), &bw).unwrap();
            let oracle = eval_free_product_oracle(zoo[i].as_ref(), zoo[j].as_ref(), &bw).unwrap();
            prop_assert!(close(fast, oracle, 1e-12), "{bw}");
        }
    }

    #[test]
    fn tensor_haar_matches_oracle(w in sized_word(3, 8)) {
        prop_assert!(close(eval_tensor_haar(&w).unwrap(), eval_tensor_haar_oracle(&w).unwrap(), 1e-12), "{w}");
    }

    #[test]
    fn haar_traces_respect_adjoint_and_antipode(w in sized_word(3, 8)) {
        for f in [eval_free_haar as fn(&Word) -> udg_core::Result<C64>, eval_tensor_haar] {
            let v = f(&w).unwrap();
            prop_assert!(close(f(&adjoint(&w)).unwrap(), v.conj(), 1e-12), "{w}");
            prop_assert!(close(f(&antipode(&w)).unwrap(), v, 1e-12), "{w}");
        }
    }

    #[test]
    fn haar_absorbs_characters(w in word(2, 4), s in any::<u64>(), k in 0usize..2) {
        let haar: SharedState = if k == 0 { Arc::new(FreeHaarTrace::new(2)) } else { Arc::new(TensorHaarTrace::new(2)) };
        let kind = if k == 0 { ProductKind::Free } else { ProductKind::Tensor };
        let chi: SharedState = Arc::new(haar_character(2, s));
        let direct = haar.eval(&w).unwrap();
        for conv in [convolve(kind, haar.clone(), chi.clone()).unwrap(), convolve(kind, chi.clone(), haar.clone()).unwrap()] {
            prop_assert!(close(conv.eval(&w).unwrap(), direct, 1e-10), "{w}");
        }
    }

    #[test]
    fn nc_partitions_round_trip(ground in prop::collection::btree_set(1usize..20, 1..=7), pick in any::<prop::sample::Index>()) {
        let ground: Vec<usize> = ground.into_iter().collect();
        let all = enumerate_nc_on(&ground).unwrap();
        let p = pick.get(&all);
        let rebuilt = NCPartition::new(p.ground().to_vec(), p.blocks().to_vec()).unwrap();
        prop_assert_eq!(&rebuilt, p);
        prop_assert!(is_noncrossing(p.blocks()));
    }

    #[test]
    fn kreweras_complement_is_maximal(m in 2usize..=7, mask in any::<u16>(), pick in any::<prop::sample::Index>()) {
        let (e, f): (Vec<usize>, Vec<usize>) = (1..=m).partition(|i| mask & (1 << i) != 0);
        prop_assume!(!e.is_empty() && !f.is_empty());
        let sigmas = enumerate_nc_on(&e).unwrap();
        let sigma = pick.get(&sigmas);
        let k = kreweras_relative(sigma, &f).unwrap();
        let mut joint = sigma.blocks().to_vec();
        joint.extend(k.blocks().iter().cloned());
        prop_assert!(is_noncrossing(&joint));
        prop_assert!(kreweras_is_maximal_brute_force(sigma, &k));
    }

    #[test]
    fn display_parse_round_trip(w in sized_word(9, 6)) {
        prop_assert_eq!(Word::parse(w.dim(), &w.to_string()).unwrap(), w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn products_of_states_have_psd_gram(s in any::<u64>(), i in 0usize..5, j in 0usize..5, k in 0usize..5) {
        let zoo = state_zoo(2, s);
        let conv = convolve(KINDS[k], zoo[i].clone(), zoo[j].clone()).unwrap();
        let words = udg_core::brown_words::words_up_to(2, 1);
        let rep = gram_psd_check(&conv, &words, 1e-9).unwrap();
        prop_assert!(rep.positive, "{} {rep:?}", KINDS[k]);
    }

    #[test]
    fn mc_is_thread_count_independent(seed in any::<u64>(), w in word(2, 3)) {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_estimate(&Source::Haar, &w, 2, 8, 24, seed).unwrap())
        };
        let a = run(1);
        let b = run(5);
        prop_assert_eq!(a.mean, b.mean);
        prop_assert_eq!(a.stderr, b.stderr);
    }
}

#[test]
fn phi1_and_phi2_are_states() {
    let words = udg_core::brown_words::words_up_to(2, 2);
    for s in [phi1(2), phi2(2)] {
        let rep = gram_psd_check(&s, &words, 1e-9).unwrap();
        assert!(rep.positive, "{rep:?}");
    }
}
