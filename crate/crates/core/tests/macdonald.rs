use std::collections::BTreeMap;

use nsmac::exact::{q_binomial, rat, LimitDirection, QTRational, Rational};
use nsmac::macdonald::{
    compute_e, compute_e_fillings, e_specialized, norm_a_q, norm_a_q_alt, norm_a_qt, restrict_to_sl, sl2_closed_forms,
    specialized_fillings, Specialization,
};
use nsmac::weights::{all_permutations, compositions, compositions_up_to, order_geq, Composition, SlWeight};
use proptest::prelude::*;

type IntPoly = BTreeMap<Vec<u32>, i64>;

fn add(p: &mut IntPoly, m: Vec<u32>, c: i64) {
    let e = p.entry(m.clone()).or_insert(0);
    *e += c;
    if *e == 0 {
        p.remove(&m);
    }
}

/// Isobaric divided difference `(x_i f - x_{i+1} s_i f) / (x_i - x_{i+1})`, minus `f` when `bar`.
fn demazure(f: &IntPoly, i: usize, bar: bool) -> IntPoly {
    let mut out = IntPoly::new();
    for (m, &c) in f {
        let (p, r) = (m[i], m[i + 1]);
        let mut put = |k: u32, sign: i64| {
            let mut mm = m.clone();
            mm[i] = k;
            mm[i + 1] = p + r - k;
            add(&mut out, mm, sign * c);
        };
        if p >= r {
            for k in r..=p {
                put(k, 1);
            }
        } else {
            for k in p + 1..r {
                put(k, -1);
            }
        }
        if bar {
            add(&mut out, m.clone(), -c);
        }
    }
    out
}

/// Key polynomial (`bar = false`) or Demazure atom (`bar = true`): `x^lambda` at dominant
/// `lambda`, then one operator per ascent.
fn key_or_atom(lambda: &[u32], bar: bool) -> IntPoly {
    if let Some(i) = (0..lambda.len() - 1).find(|&i| lambda[i] < lambda[i + 1]) {
        let mut mu = lambda.to_vec();
        mu.swap(i, i + 1);
        demazure(&key_or_atom(&mu, bar), i, bar)
    } else {
        IntPoly::from([(lambda.to_vec(), 1)])
    }
}

fn as_ints(l: &Composition, spec: Specialization) -> IntPoly {
    e_specialized(l, spec)
        .unwrap()
        .terms
        .iter()
        .map(|(m, c)| {
            let r = c.as_rational().expect("constant coefficient");
            assert!(r.is_integer());
            (m.clone(), r.to_integer().try_into().unwrap())
        })
        .collect()
}

fn small_composition() -> impl Strategy<Value = Composition> {
    prop::collection::vec(0u32..=2, 1..=3).prop_map(Composition::new)
}

#[test]
fn two_variable_hand_values() {
    let x1 = compute_e(&Composition::new(vec![1, 0])).unwrap();
    assert_eq!(x1.terms.len(), 1);
    assert!(x1.coeff(&[1, 0]).is_one());

    let e = compute_e(&Composition::new(vec![0, 1])).unwrap();
    let c = QTRational::one_minus(rat(1), 0, 1).div(&QTRational::one_minus(rat(1), 1, 1)).unwrap();
    assert!(e.coeff(&[0, 1]).is_one());
    assert_eq!(e.coeff(&[1, 0]), c);
    assert_eq!(e.terms.len(), 2);
}

#[test]
fn key_polynomials_at_q_and_t_zero() {
    for n in 1..=3 {
        for l in compositions_up_to(n, 4) {
            assert_eq!(as_ints(&l, Specialization::Q0T0), key_or_atom(l.parts(), false), "{l}");
        }
    }
}

fn reversed(p: &IntPoly) -> IntPoly {
    p.iter().map(|(m, c)| (m.iter().rev().copied().collect(), *c)).collect()
}

#[test]
fn demazure_atoms_at_q_and_t_infinity() {
    // E_lambda(x; inf, inf) is the atom of the reversed weight in the reversed variables
    for n in 1..=3 {
        for l in compositions_up_to(n, 4) {
            let rev: Vec<u32> = l.parts().iter().rev().copied().collect();
            assert_eq!(as_ints(&l, Specialization::QinfTinf), reversed(&key_or_atom(&rev, true)), "{l}");
        }
    }
}

#[test]
fn atoms_sum_to_keys() {
    // the key of an antidominant weight is the Schur polynomial, the sum of the atoms over its orbit
    for lambda in [vec![0, 1, 2], vec![0, 0, 2], vec![0, 1, 1, 2]] {
        let lambda = Composition::new(lambda);
        let key = as_ints(&lambda, Specialization::Q0T0);
        let mut sum = IntPoly::new();
        let mut seen = std::collections::BTreeSet::new();
        for w in all_permutations(lambda.n()) {
            let mu = lambda.act(&w);
            if seen.insert(mu.clone()) {
                let rev = Composition::new(mu.parts().iter().rev().copied().collect());
                for (m, c) in reversed(&as_ints(&rev, Specialization::QinfTinf)) {
                    add(&mut sum, m, c);
                }
            }
        }
        assert_eq!(sum, key, "{lambda}");
    }
}

#[test]
fn specialized_fillings_match_limits() {
    let k = 12;
    for n in 1..=3 {
        for l in compositions_up_to(n, 4) {
            for spec in [Specialization::T0, Specialization::QinvTinf] {
                let limit = e_specialized(&l, spec).unwrap().qpoly_terms().unwrap();
                let fill = specialized_fillings(&l, spec, k);
                let fill: BTreeMap<_, _> = fill.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                assert_eq!(fill.len(), limit.len(), "{l} {spec}");
                for (m, p) in &limit {
                    assert_eq!(fill[m].to_qpoly(), p.truncate(k as usize), "{l} {spec} {m:?}");
                }
            }
        }
    }
}

#[test]
fn sl2_closed_forms_match_restriction() {
    for lam in -5i64..=5 {
        let w = SlWeight(vec![lam]);
        let rep = w.representative();
        let forms = sl2_closed_forms(lam);
        let t0 = restrict_to_sl(&e_specialized(&rep, Specialization::T0).unwrap().qpoly_terms().unwrap());
        let ti = restrict_to_sl(&e_specialized(&rep, Specialization::QinvTinf).unwrap().qpoly_terms().unwrap());
        let key = |m: &BTreeMap<i64, nsmac::exact::QPoly>| m.iter().map(|(e, c)| (vec![*e], c.clone())).collect::<BTreeMap<_, _>>();
        assert_eq!(t0, key(&forms.e_t0), "E(X;q,0) at {lam}");
        assert_eq!(ti, key(&forms.e_qinv_tinf), "E(Y;q^-1,inf) at {lam}");
        assert_eq!(norm_a_q(&rep, 10), nsmac::exact::q_pochhammer_inv(forms.norm_pochhammer, 10));
    }
}

#[test]
fn t_zero_coefficients_of_a_one_column_weight() {
    // E_{(0,..,0,1)}(x; q, 0) = x_1 + .. + x_n
    for n in 1..=4 {
        let mut parts = vec![0; n];
        parts[n - 1] = 1;
        let e = as_ints(&Composition::new(parts), Specialization::T0);
        assert_eq!(e.len(), n);
        assert!(e.values().all(|&c| c == 1));
    }
}

#[test]
fn rank_one_is_a_monomial() {
    for k in 0..6 {
        let e = compute_e(&Composition::new(vec![k])).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert!(e.coeff(&[k]).is_one());
        assert_eq!(norm_a_q(&Composition::new(vec![k]), 8), nsmac::exact::q_pochhammer_inv(k, 8));
    }
}

#[test]
fn gaussian_binomials_in_rank_two() {
    // E_{(0,m)}(x; q, 0) restricted to sl_2 is the Rogers-Szego polynomial
    for m in 0..5u32 {
        let forms = sl2_closed_forms(-(m as i64));
        for a in 0..=m {
            assert_eq!(forms.e_t0[&(m as i64 - 2 * a as i64)], q_binomial(m, a));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recursion_and_fillings_agree(l in small_composition()) {
        prop_assert_eq!(&compute_e(&l).unwrap().terms, &compute_e_fillings(&l).terms);
    }

    #[test]
    fn homogeneous_and_monic(l in small_composition()) {
        let e = compute_e(&l).unwrap();
        prop_assert!(e.is_homogeneous());
        prop_assert!(e.coeff(l.parts()).is_one());
        // every other monomial is a rearrangement-below term
        for m in e.terms.keys() {
            let mu = Composition::new(m.clone());
            prop_assert!(order_geq(&l, &mu) || mu == l, "{} has {}", l, mu);
        }
    }

    #[test]
    fn stability_under_full_columns(l in small_composition(), k in 1u32..=2) {
        let e = compute_e(&l).unwrap();
        let f = compute_e(&l.add_ones(k)).unwrap();
        let shifted: BTreeMap<Vec<u32>, QTRational> =
            e.terms.iter().map(|(m, c)| (m.iter().map(|x| x + k).collect(), c.clone())).collect();
        prop_assert_eq!(shifted, f.terms.clone());
    }

    #[test]
    fn specializations_are_positive(l in small_composition()) {
        for spec in [Specialization::T0, Specialization::QinvTinf] {
            let terms = e_specialized(&l, spec).unwrap().qpoly_terms().unwrap();
            for p in terms.values() {
                prop_assert!(p.coeffs().iter().all(|c| c.is_integer() && *c >= Rational::from_integer(0.into())));
            }
        }
    }

    #[test]
    fn norms_agree(parts in prop::collection::vec(0u32..=3, 1..=4)) {
        let l = Composition::new(parts);
        let direct = norm_a_q(&l, 10);
        prop_assert_eq!(&direct, &norm_a_q_alt(&l, 10));
        let limit = norm_a_qt(&l).limit_t(LimitDirection::Zero).unwrap().to_qseries(10).unwrap();
        prop_assert_eq!(&direct, &limit);
    }

    #[test]
    fn q_and_t_inversion_is_an_involution(l in small_composition()) {
        let e = compute_e(&l).unwrap();
        let inv = e_specialized(&l, Specialization::QtInv).unwrap();
        for (m, c) in &inv.terms {
            prop_assert_eq!(&c.invert_q(true), &e.coeff(m));
        }
    }
}

#[test]
fn composition_counts() {
    // stars and bars
    assert_eq!(compositions(3, 4).len(), 15);
    assert_eq!(compositions_up_to(2, 3).len(), 10);
}
