use nsmac::exact::{q_binomial, q_pochhammer, q_pochhammer_inv, rat, BiPoly, LimitDirection, QPoly, QSeries, QTRational, Rational};
use nsmac::series::{
    inverse_pochhammer_series, pochhammer_series, Monomial, TruncatedSeries, TruncationPolicy, VarSet,
};
use proptest::prelude::*;

fn qpoly() -> impl Strategy<Value = QPoly> {
    prop::collection::vec(-4i64..=4, 0..5).prop_map(|c| QPoly::from_ints(&c))
}

fn bipoly() -> impl Strategy<Value = BiPoly> {
    prop::collection::vec(qpoly(), 0..3).prop_map(BiPoly::from_coeffs)
}

/// Nonzero denominators built from factors `1 - c q^a t^b`.
fn denominator() -> impl Strategy<Value = BiPoly> {
    prop::collection::vec((1i64..=3, 0usize..3, 0usize..2), 0..3).prop_map(|fs| {
        fs.into_iter().fold(BiPoly::one(), |acc, (c, a, b)| {
            let f = if a == 0 && b == 0 { BiPoly::monomial(rat(c + 1), 0, 0) } else { &BiPoly::one() - &BiPoly::monomial(rat(c), a, b) };
            &acc * &f
        })
    })
}

fn qtrat() -> impl Strategy<Value = QTRational> {
    (bipoly(), denominator()).prop_map(|(n, d)| QTRational::new(n, d).unwrap())
}

fn series(cap: u32) -> impl Strategy<Value = QSeries> {
    prop::collection::vec(-5i64..=5, 0..8).prop_map(move |c| QSeries::from_ints(&c, Some(cap)))
}

proptest! {
    #[test]
    fn qpoly_ring_axioms(a in qpoly(), b in qpoly(), c in qpoly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert!(a.coeffs().last().is_none_or(|x| *x != rat(0)));
    }

    #[test]
    fn qpoly_division(a in qpoly(), b in qpoly()) {
        prop_assume!(!b.is_zero());
        let (quo, rem) = a.div_rem(&b).unwrap();
        prop_assert_eq!(&(&quo * &b) + &rem, a.clone());
        prop_assert!(rem.degree().is_none_or(|d| d < b.degree().unwrap()));
        prop_assert_eq!((&a * &b).div_exact(&b), a);
    }

    #[test]
    fn qt_field_axioms(a in qtrat(), b in qtrat(), c in qtrat()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!((&a * &b).div(&b).unwrap(), a);
        }
    }

    #[test]
    fn qt_canonical_form(n in bipoly(), d in denominator(), k in denominator()) {
        // the same fraction with a common factor inserted has the same canonical form
        let x = QTRational::new(n.clone(), d.clone()).unwrap();
        let y = QTRational::new(&n * &k, &d * &k).unwrap();
        prop_assert_eq!(&x, &y);
        if !x.is_zero() {
            prop_assert!(x.numerator().gcd(x.denominator()).is_constant());
            prop_assert_eq!(x.denominator().lex_leading(), rat(1));
        }
    }

    #[test]
    fn qt_eval_is_a_homomorphism(a in qtrat(), b in qtrat(), q in -3i64..=3, t in 4i64..=9) {
        // t >= 4 avoids the zeros of the generated denominators
        let (q, t) = (rat(q) / rat(7), rat(t));
        let ea = a.eval(&q, &t).unwrap();
        let eb = b.eval(&q, &t).unwrap();
        prop_assert_eq!((&a * &b).eval(&q, &t).unwrap(), &ea * &eb);
        prop_assert_eq!((&a + &b).eval(&q, &t).unwrap(), ea + eb);
    }

    #[test]
    fn limit_t_zero_is_substitution(a in qtrat(), q in -3i64..=3) {
        let q = rat(q) / rat(5);
        let lim = a.limit_t(LimitDirection::Zero).unwrap();
        prop_assert!(lim.is_t_free());
        prop_assert_eq!(lim.eval(&q, &rat(0)).unwrap(), a.eval(&q, &rat(0)).unwrap());
    }

    #[test]
    fn limit_t_infinity_matches_reversal(a in qtrat()) {
        // t -> infinity of f(t) is t -> 0 of f(1/t)
        let inverted = a.invert_q(true).invert_q(false);
        if let (Ok(x), Ok(y)) = (a.limit_t(LimitDirection::Infinity), inverted.limit_t(LimitDirection::Zero)) {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn truncation_is_a_homomorphism(a in series(9), b in series(9), k in 0u32..9) {
        let lhs = (&a * &b).with_cap(Some(k));
        let rhs = &a.with_cap(Some(k)) * &b.with_cap(Some(k));
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!((&a + &b).with_cap(Some(k)), &a.with_cap(Some(k)) + &b.with_cap(Some(k)));
    }

    #[test]
    fn series_inverse(a in series(10), c0 in 1i64..4) {
        let a = &a.shift(1) + &QSeries::constant(rat(c0));
        let inv = a.inverse().unwrap();
        prop_assert_eq!(&a * &inv, QSeries::one().with_cap(Some(10)));
    }

    #[test]
    fn pochhammer_recursion(m in 0u32..12) {
        let next = &q_pochhammer(m) * &(&QPoly::one() - &QPoly::monomial(rat(1), m as usize + 1));
        prop_assert_eq!(q_pochhammer(m + 1), next);
        prop_assert_eq!(&q_pochhammer_inv(m, 15) * &QSeries::from_qpoly(&q_pochhammer(m), Some(15)), QSeries::one().with_cap(Some(15)));
    }

    #[test]
    fn q_binomial_pascal(m in 1u32..10, a in 1u32..10) {
        prop_assume!(a <= m);
        let pascal = &q_binomial(m - 1, a - 1) + &q_binomial(m - 1, a).shift(a as usize);
        prop_assert_eq!(q_binomial(m, a), pascal);
    }

    #[test]
    fn inverse_truncated_is_inverse(c in prop::collection::vec(-3i64..=3, 8), d in 1u32..5) {
        let vars = VarSet::gl(2);
        let policy = TruncationPolicy::degree(d, Some(6));
        let mut f = TruncatedSeries::<QSeries>::one(vars, policy);
        let monos = [([1, 0], [0, 0]), ([0, 1], [0, 0]), ([0, 0], [1, 0]), ([1, 0], [0, 1]), ([0, 1], [1, 1]), ([2, 0], [0, 0]), ([0, 0], [0, 2]), ([1, 1], [1, 0])];
        for ((x, y), k) in monos.iter().zip(&c) {
            f.add_term(Monomial::new(x.to_vec(), y.to_vec()), QSeries::from_ints(&[0, *k], Some(6))).unwrap();
        }
        let g = f.inverse_truncated().unwrap();
        prop_assert_eq!(f.mul(&g).unwrap(), TruncatedSeries::one(vars, policy));
    }

    #[test]
    fn series_truncation_coherence(d in 1u32..6, e in 1u32..6) {
        // truncating a product equals the product of truncations
        let vars = VarSet::gl(2);
        let big = TruncationPolicy::degree(6, Some(8));
        let small = TruncationPolicy::degree(d.min(e), Some(5));
        let one = QSeries::one();
        let f = inverse_pochhammer_series(vars, big, &one, &Monomial::new(vec![1, 0], vec![0, 1])).unwrap();
        let g = pochhammer_series(vars, big, &one, &Monomial::new(vec![0, 1], vec![1, 0]), None).unwrap();
        let lhs = f.mul(&g).unwrap().truncate(&small);
        let rhs = f.truncate(&small).mul(&g.truncate(&small)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

/// Number of multisets of `m` nonnegative integers summing to `k`.
fn partitions_at_most(m: usize, k: usize) -> u64 {
    // p[j][s]: partitions of s into parts <= j, equivalently at most j parts
    let mut p = vec![vec![0u64; k + 1]; m + 1];
    for row in p.iter_mut() {
        row[0] = 1;
    }
    for j in 1..=m {
        for s in 1..=k {
            p[j][s] = p[j - 1][s] + if s >= j { p[j][s - j] } else { 0 };
        }
    }
    p[m][k]
}

#[test]
fn q_binomial_theorem_counts_partitions() {
    let (d, cap) = (7u32, 12u32);
    let vars = VarSet::gl(1);
    let policy = TruncationPolicy::new(d, 0, Some(cap));
    let z = Monomial::new(vec![1], vec![0]);
    let s = inverse_pochhammer_series(vars, policy, &QSeries::one(), &z).unwrap();
    for m in 0..=d as usize {
        let c = s.coeff(&Monomial::new(vec![m as i64], vec![0]));
        for k in 0..=cap as usize {
            assert_eq!(c.coeff(k), rat(partitions_at_most(m, k) as i64), "z^{m} q^{k}");
        }
    }
}

#[test]
fn euler_product_inverts_q_binomial_series() {
    let vars = VarSet::gl(1);
    let policy = TruncationPolicy::new(8, 0, Some(10));
    let z = Monomial::new(vec![1], vec![0]);
    let c = QSeries::from_ints(&[2, -1], None);
    let f = pochhammer_series(vars, policy, &c, &z, None).unwrap();
    let g = inverse_pochhammer_series(vars, policy, &c, &z).unwrap();
    assert_eq!(f.mul(&g).unwrap(), TruncatedSeries::one(vars, policy));
}

#[test]
fn finite_pochhammer_with_constant_letter() {
    let vars = VarSet::gl(1);
    let policy = TruncationPolicy::new(0, 0, Some(6));
    let one = Monomial::new(vec![0], vec![0]);
    let s = pochhammer_series(vars, policy, &QSeries::q_power(1, Some(6)), &one, None).unwrap();
    let expect = QSeries::from_qpoly(&q_pochhammer(7), Some(6));
    assert_eq!(s.coeff(&one), expect);
}

#[test]
fn rational_helpers() {
    let half: Rational = "1/2".parse().unwrap();
    assert_eq!(&half + &half, rat(1));
    let r = QTRational::one_minus(rat(1), 1, 1).inv().unwrap();
    assert!(r.limit_t(LimitDirection::Zero).unwrap().is_one());
    assert!(r.limit_t(LimitDirection::Infinity).unwrap().is_zero());
}
