use std::collections::BTreeSet;

use nsmac::affine::{
    beta_sequence, canonical_word, factorized_word, hw_algebra_char, hw_algebra_char_gl, hw_algebra_char_sl, translation_reduced_word,
    AffinePerm, HwMode, ReducedWord, WeightData, WordKind,
};
use nsmac::characters::{ch_iwahori_functions, ch_weyl_ratio_check, char_module, CharKind, Weight};
use nsmac::exact::q_pochhammer_inv;
use nsmac::macdonald::norm_a_q;
use nsmac::series::TruncationPolicy;
use nsmac::weights::{all_permutations, compositions_up_to, order_geq, SlWeight};
use proptest::prelude::*;

/// Inversions `(i, j)`, `1 <= i <= n`, `i < j`, `f(i) > f(j)`, counted over a range of `j` wide
/// enough to contain all of them.
fn brute_length(f: &AffinePerm) -> usize {
    let n = f.n() as i64;
    let w = f.window();
    let spread = w.iter().max().unwrap() - w.iter().min().unwrap();
    let reach = spread + 2 * n;
    let mut l = 0;
    for i in 1..=n {
        for j in i + 1..=i + reach {
            if f.apply(i) > f.apply(j) {
                l += 1;
            }
        }
    }
    l
}

fn sl_weights(rank: usize, bound: i64) -> Vec<SlWeight> {
    let mut out = vec![Vec::new()];
    for _ in 0..rank {
        out = out.into_iter().flat_map(|v: Vec<i64>| (-bound..=bound).map(move |c| [v.clone(), vec![c]].concat())).collect();
    }
    out.into_iter().map(SlWeight).collect()
}

fn affine_word() -> impl Strategy<Value = ReducedWord> {
    (2usize..=4).prop_flat_map(|n| {
        (Just(n), -3i64..=3, prop::collection::vec(0..n, 0..10)).prop_map(|(n, pi, letters)| ReducedWord { n, pi, letters })
    })
}

#[test]
fn order_is_a_partial_order() {
    let all = compositions_up_to(3, 3);
    for a in &all {
        assert!(order_geq(a, a));
        for b in &all {
            if a != b && order_geq(a, b) {
                assert!(!order_geq(b, a), "{a} {b}");
                for c in &all {
                    if order_geq(b, c) {
                        assert!(order_geq(a, c), "{a} {b} {c}");
                    }
                }
            }
        }
    }
}

#[test]
fn sorting_permutation_is_minimal() {
    for n in 1..=4 {
        for l in compositions_up_to(n, 4) {
            let v = l.sorting_permutation();
            assert_eq!(l.act(&v), l.antidominant());
            let best = all_permutations(n).into_iter().filter(|p| l.act(p) == l.antidominant()).map(|p| p.length()).min();
            assert_eq!(Some(v.length()), best, "{l}");
        }
    }
}

#[test]
fn antidominant_weight_is_top_of_its_orbit() {
    for l in compositions_up_to(3, 4) {
        let top = l.antidominant();
        assert!(order_geq(&top, &l), "{l}");
    }
}

#[test]
fn restriction_forgets_full_columns() {
    for l in compositions_up_to(3, 4) {
        for m in 0..3 {
            assert_eq!(l.restrict(), l.add_ones(m).restrict());
        }
        let (stripped, m) = l.strip_ones();
        assert_eq!(stripped.add_ones(m), l);
        assert!(stripped.has_zero());
        assert_eq!(l.restrict().representative(), stripped);
        assert_eq!(l.cells().len() as u32, l.size());
    }
}

#[test]
fn sl_representative_round_trip() {
    for w in sl_weights(3, 2) {
        let r = w.representative();
        assert!(r.has_zero());
        assert_eq!(r.restrict(), w);
        assert_eq!(w.neg().neg(), w);
    }
}

proptest! {
    #[test]
    fn length_counts_inversions(w in affine_word()) {
        let f = w.evaluate();
        prop_assert_eq!(f.length(), brute_length(&f));
        prop_assert!(f.length() <= w.len());
        prop_assert_eq!(f.length() % 2, w.len() % 2);
        prop_assert_eq!(f.inverse().length(), f.length());
        prop_assert_eq!(f.compose(&f.inverse()), AffinePerm::identity(w.n));
    }

    #[test]
    fn canonical_word_is_reduced(w in affine_word()) {
        let f = w.evaluate();
        let c = canonical_word(&f);
        prop_assert_eq!(c.evaluate(), f.clone());
        prop_assert!(c.is_reduced());
        prop_assert_eq!(c.len(), f.length());
        // the coroots of a reduced word are distinct
        let betas: BTreeSet<_> = beta_sequence(&c).into_iter().map(|b| (b.finite_part, b.degree)).collect();
        prop_assert_eq!(betas.len(), c.len());
    }

    #[test]
    fn translation_length(mu in prop::collection::vec(-3i64..=3, 2..=4)) {
        let t = AffinePerm::translation(&mu);
        let expect: i64 = (0..mu.len()).flat_map(|i| (i + 1..mu.len()).map(move |j| (i, j))).map(|(i, j)| (mu[i] - mu[j]).abs()).sum();
        prop_assert_eq!(t.length() as i64, expect);
    }
}

#[test]
fn translation_word_coroots_are_negative() {
    // every coroot of a reduced word of an antidominant translation has negative finite part
    for w in sl_weights(2, 3).into_iter().filter(|w| w.is_antidominant()) {
        let mu: Vec<i64> = w.antidominant_rep().parts().iter().map(|&x| x as i64).collect();
        let word = translation_reduced_word(&mu).unwrap();
        for b in beta_sequence(&word) {
            assert!(b.negative_of().is_some(), "{w}: {:?}", b);
            assert!(b.degree > 0);
        }
    }
}

#[test]
fn factorized_words_in_rank_four() {
    for w in sl_weights(3, 2) {
        let data = WeightData::from_sl(&w);
        assert!(data.sigma_is_maximal());
        let t = AffinePerm::translation(&data.antidominant);
        for kind in [WordKind::D, WordKind::U] {
            let (word, plen) = factorized_word(&data, kind).unwrap();
            assert!(word.is_reduced(), "{w}");
            assert!(word.evaluate().eq_mod_center(&t), "{w}");
            assert_eq!(plen, data.prefix_len(kind), "{w} {kind:?}");
            let at_prefix = hw_algebra_char(&data, &HwMode::AtM(plen, word.clone())).unwrap();
            let closed = hw_algebra_char(&data, &if kind == WordKind::D { HwMode::D } else { HwMode::U }).unwrap();
            assert_eq!(at_prefix, closed, "{w} {kind:?}");
            for m in [0, plen, word.len()] {
                assert!(ch_weyl_ratio_check(&data, m, &word).unwrap().passed());
            }
        }
    }
}

#[test]
fn antidominant_weights_have_empty_prefix() {
    for w in sl_weights(3, 2).into_iter().filter(|w| w.is_antidominant()) {
        let data = WeightData::from_sl(&w);
        assert_eq!(data.prefix_len(WordKind::D), 0, "{w}");
    }
}

#[test]
fn highest_weight_algebra_is_the_norm() {
    for n in 2..=4 {
        for l in compositions_up_to(n, 5) {
            let gl = hw_algebra_char_gl(&l, WordKind::D).unwrap();
            assert_eq!(gl.to_qseries(15), norm_a_q(&l, 15), "{l}");
        }
    }
}

#[test]
fn duality_between_the_two_algebras() {
    for w in sl_weights(3, 3) {
        let u = hw_algebra_char_sl(&w, WordKind::U).unwrap();
        let d = hw_algebra_char_sl(&w.neg(), WordKind::D).unwrap();
        assert_eq!(u, d, "{w}");
    }
}

#[test]
fn rank_one_degrees() {
    // the generator degrees of a free algebra count partitions with parts in that multiset
    let h = hw_algebra_char_sl(&SlWeight(vec![-3]), WordKind::D).unwrap();
    assert_eq!(h.to_qseries(10), q_pochhammer_inv(3, 10));
}

#[test]
fn characters_are_positive() {
    let policy = TruncationPolicy::degree(4, Some(6));
    for l in compositions_up_to(3, 3) {
        for kind in [CharKind::D, CharKind::Uo, CharKind::T, CharKind::AD, CharKind::AU] {
            let c = char_module(kind, &Weight::Gl(l.clone()), policy).unwrap();
            assert!(c.is_positive(), "{kind:?} {l}");
        }
    }
    for w in sl_weights(2, 2) {
        let c = char_module(CharKind::T, &Weight::Sl(w.clone()), policy).unwrap();
        assert!(c.is_positive(), "T {w}");
    }
    assert!(ch_iwahori_functions(2, policy).unwrap().is_positive());
}

#[test]
fn total_character_factorizes() {
    let policy = TruncationPolicy::degree(5, Some(6));
    for l in compositions_up_to(2, 3) {
        let w = Weight::Gl(l.clone());
        let part = |k| char_module(k, &w, policy).unwrap().series;
        let product = part(CharKind::AD).mul(&part(CharKind::D)).unwrap().mul(&part(CharKind::Uo)).unwrap();
        assert_eq!(part(CharKind::T), product, "{l}");
        let ad = part(CharKind::AD);
        let unit = ad.terms().values().next().unwrap().clone();
        assert_eq!(unit, norm_a_q(&l, 6), "{l}");
    }
}

#[test]
fn norm_of_a_gl_weight_splits_off_full_columns() {
    for l in compositions_up_to(3, 3) {
        let m = l.min_part();
        let sl = hw_algebra_char_sl(&l.restrict(), WordKind::D).unwrap().with_gl_factor(m);
        assert_eq!(sl.to_qseries(12), norm_a_q(&l, 12), "{l}");
    }
}
