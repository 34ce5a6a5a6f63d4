//! Sparse truncated series in two blocks of letter variables with exact coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{q_pochhammer, ExactError, QPoly, QSeries, QTRational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("variable set mismatch")]
    VarMismatch,
    #[error("series not invertible")]
    NotInvertible,
    #[error("divergent Pochhammer")]
    DivergentPochhammer,
    #[error("negative exponent in a non-Laurent variable set")]
    NegativeExponent,
    #[error("exponent vector has length {0}, expected {1}")]
    BadLength(usize, usize),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Coefficient ring of a [`TruncatedSeries`].
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rational(r: Rational) -> Self;
    fn from_qpoly(p: &QPoly, cap: Option<u32>) -> Self;
    /// Multiplicative inverse, truncated to `cap` where relevant.
    fn inverse(&self, cap: Option<u32>) -> Result<Self, ExactError>;
    fn truncate_q(&self, cap: Option<u32>) -> Self;
    fn to_json(&self) -> Value;
    /// Lowest power of `q` present, when the scalar is a series in `q`.
    fn q_valuation(&self) -> Option<u32>;

    fn q_power(k: u32, cap: Option<u32>) -> Self {
        Self::from_qpoly(&QPoly::monomial(Rational::one(), k as usize), cap)
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

fn rational_json(r: &Rational) -> Value {
    Value::String(r.to_string())
}

impl Scalar for QSeries {
    fn zero() -> Self {
        QSeries::zero()
    }
    fn one() -> Self {
        QSeries::one()
    }
    fn is_zero(&self) -> bool {
        QSeries::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rational(r: Rational) -> Self {
        QSeries::constant(r)
    }
    fn from_qpoly(p: &QPoly, cap: Option<u32>) -> Self {
        QSeries::from_qpoly(p, cap)
    }
    fn inverse(&self, cap: Option<u32>) -> Result<Self, ExactError> {
        self.with_cap(cap).inverse()
    }
    fn truncate_q(&self, cap: Option<u32>) -> Self {
        self.with_cap(cap)
    }
    fn to_json(&self) -> Value {
        Value::Array(self.coeffs().iter().map(rational_json).collect())
    }
    fn q_valuation(&self) -> Option<u32> {
        self.valuation().map(|v| v as u32)
    }
}

impl Scalar for QTRational {
    fn zero() -> Self {
        QTRational::zero()
    }
    fn one() -> Self {
        QTRational::one()
    }
    fn is_zero(&self) -> bool {
        QTRational::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rational(r: Rational) -> Self {
        QTRational::from_rational(r)
    }
    fn from_qpoly(p: &QPoly, _cap: Option<u32>) -> Self {
        QTRational::from_qpoly(p.clone())
    }
    fn inverse(&self, _cap: Option<u32>) -> Result<Self, ExactError> {
        self.inv()
    }
    fn truncate_q(&self, _cap: Option<u32>) -> Self {
        self.clone()
    }
    fn to_json(&self) -> Value {
        let grid = |b: &crate::exact::BiPoly| -> Value {
            let d = b.t_degree().map_or(0, |d| d + 1);
            Value::Array(
                (0..d)
                    .map(|k| Value::Array(b.t_coeff(k).coeffs().iter().map(rational_json).collect()))
                    .collect(),
            )
        };
        json!({"num": grid(self.numerator()), "den": grid(self.denominator())})
    }
    fn q_valuation(&self) -> Option<u32> {
        None
    }
}

/// Which letters a series is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    /// `x_1..x_n, y_1..y_n`, nonnegative exponents.
    Gl,
    /// `X, Y` on the `sl_n` weight lattice (fundamental-weight coordinates), Laurent.
    Sl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarSet {
    pub n: usize,
    pub kind: VarKind,
}

impl VarSet {
    pub fn gl(n: usize) -> Self {
        VarSet { n, kind: VarKind::Gl }
    }

    pub fn sl(n: usize) -> Self {
        VarSet { n, kind: VarKind::Sl }
    }

    /// Exponent vector length per block.
    pub fn block_len(&self) -> usize {
        match self.kind {
            VarKind::Gl => self.n,
            VarKind::Sl => self.n - 1,
        }
    }

    pub fn is_laurent(&self) -> bool {
        self.kind == VarKind::Sl
    }
}

/// `x^a y^b`. Ordered by x-degree, x-exponents, y-degree, y-exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub x: Vec<i64>,
    pub y: Vec<i64>,
}

impl Monomial {
    pub fn new(x: Vec<i64>, y: Vec<i64>) -> Self {
        Monomial { x, y }
    }

    pub fn one(vars: &VarSet) -> Self {
        let l = vars.block_len();
        Monomial { x: vec![0; l], y: vec![0; l] }
    }

    pub fn from_gl(x: &[u32], y: &[u32]) -> Self {
        Monomial {
            x: x.iter().map(|&e| e as i64).collect(),
            y: y.iter().map(|&e| e as i64).collect(),
        }
    }

    pub fn x_degree(&self) -> i64 {
        self.x.iter().sum()
    }

    pub fn y_degree(&self) -> i64 {
        self.y.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.x.iter().chain(&self.y).all(|&e| e == 0)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial {
            x: self.x.iter().zip(&o.x).map(|(a, b)| a + b).collect(),
            y: self.y.iter().zip(&o.y).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Monomial {
        let k = k as i64;
        Monomial { x: self.x.iter().map(|a| a * k).collect(), y: self.y.iter().map(|a| a * k).collect() }
    }

    pub fn exps(&self) -> Vec<i64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    fn check(&self, vars: &VarSet) -> Result<(), SeriesError> {
        let l = vars.block_len();
        for b in [&self.x, &self.y] {
            if b.len() != l {
                return Err(SeriesError::BadLength(b.len(), l));
            }
        }
        if !vars.is_laurent() && self.x.iter().chain(&self.y).any(|&e| e < 0) {
            return Err(SeriesError::NegativeExponent);
        }
        Ok(())
    }

    fn fmt_block(f: &mut fmt::Formatter<'_>, letter: &str, e: &[i64], first: &mut bool) -> fmt::Result {
        for (i, &a) in e.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if !*first {
                write!(f, "*")?;
            }
            *first = false;
            write!(f, "{letter}{}", i + 1)?;
            if a != 1 {
                write!(f, "^{a}")?;
            }
        }
        Ok(())
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.x_degree()
            .cmp(&o.x_degree())
            .then_with(|| self.x.cmp(&o.x))
            .then_with(|| self.y_degree().cmp(&o.y_degree()))
            .then_with(|| self.y.cmp(&o.y))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Degree caps. `None` is unbounded; combination takes the componentwise minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct TruncationPolicy {
    pub max_x_degree: Option<u32>,
    pub max_y_degree: Option<u32>,
    pub max_q_degree: Option<u32>,
}

fn min_opt(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl TruncationPolicy {
    pub fn new(max_x: u32, max_y: u32, max_q: Option<u32>) -> Self {
        TruncationPolicy { max_x_degree: Some(max_x), max_y_degree: Some(max_y), max_q_degree: max_q }
    }

    /// Same degree cap `d` in both blocks.
    pub fn degree(d: u32, max_q: Option<u32>) -> Self {
        Self::new(d, d, max_q)
    }

    pub fn unbounded() -> Self {
        Self::default()
    }

    pub fn meet(&self, o: &Self) -> Self {
        TruncationPolicy {
            max_x_degree: min_opt(self.max_x_degree, o.max_x_degree),
            max_y_degree: min_opt(self.max_y_degree, o.max_y_degree),
            max_q_degree: min_opt(self.max_q_degree, o.max_q_degree),
        }
    }

    pub fn admits(&self, m: &Monomial) -> bool {
        self.max_x_degree.is_none_or(|d| m.x_degree() <= d as i64)
            && self.max_y_degree.is_none_or(|d| m.y_degree() <= d as i64)
    }

    pub fn to_json(&self) -> Value {
        json!({"max_x_degree": self.max_x_degree, "max_y_degree": self.max_y_degree, "max_q_degree": self.max_q_degree})
    }
}

impl fmt::Display for TruncationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |o: Option<u32>| o.map_or("inf".to_string(), |d| d.to_string());
        write!(f, "Dx={} Dy={} K={}", s(self.max_x_degree), s(self.max_y_degree), s(self.max_q_degree))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<S> {
    vars: VarSet,
    policy: TruncationPolicy,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> TruncatedSeries<S> {
    pub fn zero(vars: VarSet, policy: TruncationPolicy) -> Self {
        TruncatedSeries { vars, policy, terms: BTreeMap::new() }
    }

    pub fn one(vars: VarSet, policy: TruncationPolicy) -> Self {
        Self::monomial(vars, policy, Monomial::one(&vars), S::one()).expect("unit monomial")
    }

    pub fn monomial(vars: VarSet, policy: TruncationPolicy, m: Monomial, c: S) -> Result<Self, SeriesError> {
        let mut s = Self::zero(vars, policy);
        s.add_term(m, c)?;
        Ok(s)
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, S)>>(
        vars: VarSet,
        policy: TruncationPolicy,
        terms: I,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::zero(vars, policy);
        for (m, c) in terms {
            s.add_term(m, c)?;
        }
        Ok(s)
    }

    /// Adds `c * m`, dropping it when out of policy.
    pub fn add_term(&mut self, m: Monomial, c: S) -> Result<(), SeriesError> {
        m.check(&self.vars)?;
        if !self.policy.admits(&m) {
            return Ok(());
        }
        let c = c.truncate_q(self.policy.max_q_degree);
        if c.is_zero() {
            return Ok(());
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = v.add(&c);
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
        Ok(())
    }

    pub fn vars(&self) -> VarSet {
        self.vars
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, S> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, S> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    /// Re-truncate to a (smaller) policy.
    pub fn truncate(&self, policy: &TruncationPolicy) -> Self {
        let policy = self.policy.meet(policy);
        let mut s = Self::zero(self.vars, policy);
        for (m, c) in &self.terms {
            s.add_term(m.clone(), c.clone()).expect("same variables");
        }
        s
    }

    fn same_vars(&self, o: &Self) -> Result<(), SeriesError> {
        if self.vars == o.vars {
            Ok(())
        } else {
            Err(SeriesError::VarMismatch)
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self, SeriesError> {
        self.same_vars(o)?;
        let mut s = self.truncate(&o.policy);
        for (m, c) in &o.terms {
            s.add_term(m.clone(), c.clone())?;
        }
        Ok(s)
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries {
            vars: self.vars,
            policy: self.policy,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self, SeriesError> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut s = Self::zero(self.vars, self.policy);
        for (m, v) in &self.terms {
            s.add_term(m.clone(), v.mul(c)).expect("same variables");
        }
        s
    }

    /// Product with out-of-policy terms discarded; policy is the meet of both.
    pub fn mul(&self, o: &Self) -> Result<Self, SeriesError> {
        self.same_vars(o)?;
        let policy = self.policy.meet(&o.policy);
        let mut acc: BTreeMap<Monomial, S> = BTreeMap::new();
        let bx = policy.max_x_degree.map(|d| d as i64);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                if let Some(d) = bx {
                    // terms of `o` are sorted by x-degree first
                    if !self.vars.is_laurent() && ma.x_degree() + mb.x_degree() > d {
                        break;
                    }
                }
                let m = ma.mul(mb);
                if !policy.admits(&m) {
                    continue;
                }
                let c = ca.mul(cb).truncate_q(policy.max_q_degree);
                if c.is_zero() {
                    continue;
                }
                match acc.get_mut(&m) {
                    Some(v) => *v = v.add(&c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(TruncatedSeries { vars: self.vars, policy, terms: acc })
    }

    /// `g` with `f * g = 1` under the policy of `f`. The constant term must be a unit
    /// and both letter degrees must be capped.
    pub fn inverse_truncated(&self) -> Result<Self, SeriesError> {
        if self.policy.max_x_degree.is_none() || self.policy.max_y_degree.is_none() || self.vars.is_laurent() {
            return Err(SeriesError::NotInvertible);
        }
        let one = Monomial::one(&self.vars);
        let c0 = self.coeff(&one);
        if c0.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let inv0 = c0.inverse(self.policy.max_q_degree).map_err(|_| SeriesError::NotInvertible)?;
        let mut h = self.scale(&inv0.neg());
        h.terms.remove(&one);
        // f = c0 (1 - h), so 1/f = c0^{-1} sum_k h^k; h^k vanishes once k exceeds the degree caps
        let mut acc = Self::one(self.vars, self.policy);
        let mut power = Self::one(self.vars, self.policy);
        loop {
            power = power.mul(&h)?;
            if power.is_empty() {
                break;
            }
            acc = acc.add(&power)?;
        }
        Ok(acc.scale(&inv0))
    }

    /// Total degree `(x, y)` of the largest stored monomial.
    pub fn max_degrees(&self) -> (i64, i64) {
        self.terms.keys().fold((0, 0), |(a, b), m| (a.max(m.x_degree()), b.max(m.y_degree())))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| json!({"exps": m.exps(), "coeff": c.to_json()}))
                .collect(),
        )
    }
}

impl<S: Scalar> fmt::Display for TruncatedSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let (lx, ly) = match self.vars.kind {
            VarKind::Gl => ("x", "y"),
            VarKind::Sl => ("X", "Y"),
        };
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[")?;
            let mut first = true;
            Monomial::fmt_block(f, lx, &m.x, &mut first)?;
            Monomial::fmt_block(f, ly, &m.y, &mut first)?;
            if first {
                write!(f, "1")?;
            }
            write!(f, "] {c}")?;
        }
        Ok(())
    }
}

/// `1 / (q; q)_k` as a scalar.
fn inv_q_pochhammer<S: Scalar>(k: u32, cap: Option<u32>) -> S {
    S::from_qpoly(&q_pochhammer(k), cap).inverse(cap).expect("constant term 1")
}

/// `(a; q)_k = prod_{i<k} (1 - a q^i)` as a scalar.
pub fn scalar_pochhammer<S: Scalar>(a: &S, k: u32, cap: Option<u32>) -> S {
    let mut acc = S::one();
    for i in 0..k {
        acc = acc.mul(&S::one().sub(&a.mul(&S::q_power(i, cap)))).truncate_q(cap);
    }
    acc
}

/// `prod_{i<m} (1 - q^i c x^a)` for finite `count = Some(m)`, or `(c x^a; q)_infinity`.
///
/// The infinite product is expanded with Euler's identity
/// `(z; q)_inf = sum_k (-1)^k q^{k(k-1)/2} z^k / (q; q)_k`, so the monomial must have
/// positive degree unless the coefficient has positive `q`-valuation under a finite cap.
pub fn pochhammer_series<S: Scalar>(
    vars: VarSet,
    policy: TruncationPolicy,
    c: &S,
    a: &Monomial,
    count: Option<u32>,
) -> Result<TruncatedSeries<S>, SeriesError> {
    let cap = policy.max_q_degree;
    match count {
        Some(m) => {
            let mut acc = TruncatedSeries::one(vars, policy);
            for i in 0..m {
                let mut f = TruncatedSeries::one(vars, policy);
                f.add_term(a.clone(), c.mul(&S::q_power(i, cap)).neg())?;
                acc = acc.mul(&f)?;
            }
            Ok(acc)
        }
        None if a.is_one() => {
            let Some(k) = cap else { return Err(SeriesError::DivergentPochhammer) };
            if !c.truncate_q(Some(0)).is_zero() {
                return Err(SeriesError::DivergentPochhammer);
            }
            // factors 1 - c q^i with i > k are 1 modulo q^{k+1}
            pochhammer_series(vars, policy, c, a, Some(k + 1))
        }
        None => {
            let last = max_power(vars, policy, c, a)?;
            let mut acc = TruncatedSeries::zero(vars, policy);
            let mut k = 0u32;
            loop {
                let m = a.pow(k);
                if !policy.admits(&m) || last.is_some_and(|l| k > l) {
                    break;
                }
                let sign = if k.is_multiple_of(2) { S::one() } else { S::one().neg() };
                let coef = sign
                    .mul(&S::q_power(k * k.saturating_sub(1) / 2, cap))
                    .mul(&c.pow(k))
                    .mul(&inv_q_pochhammer::<S>(k, cap));
                acc.add_term(m, coef)?;
                k += 1;
            }
            Ok(acc)
        }
    }
}

/// `1 / (c x^a; q)_infinity = sum_k c^k x^{ka} / (q; q)_k` (q-binomial theorem).
pub fn inverse_pochhammer_series<S: Scalar>(
    vars: VarSet,
    policy: TruncationPolicy,
    c: &S,
    a: &Monomial,
) -> Result<TruncatedSeries<S>, SeriesError> {
    q_binomial_series(vars, policy, &S::zero(), c, a)
}

/// `(b c x^a; q)_inf / (c x^a; q)_inf = sum_k (b; q)_k / (q; q)_k c^k x^{ka}`.
pub fn q_binomial_series<S: Scalar>(
    vars: VarSet,
    policy: TruncationPolicy,
    b: &S,
    c: &S,
    a: &Monomial,
) -> Result<TruncatedSeries<S>, SeriesError> {
    let cap = policy.max_q_degree;
    let last = max_power(vars, policy, c, a)?;
    let mut acc = TruncatedSeries::zero(vars, policy);
    let mut k = 0u32;
    loop {
        let m = a.pow(k);
        if !policy.admits(&m) || last.is_some_and(|l| k > l) {
            break;
        }
        let coef = scalar_pochhammer(b, k, cap).mul(&c.pow(k)).mul(&inv_q_pochhammer::<S>(k, cap));
        acc.add_term(m, coef)?;
        k += 1;
    }
    Ok(acc)
}

/// Largest power of `c x^a` that can survive truncation, `None` when the letter degree caps decide.
fn max_power<S: Scalar>(vars: VarSet, policy: TruncationPolicy, c: &S, a: &Monomial) -> Result<Option<u32>, SeriesError> {
    let bounded_by_degree = !vars.is_laurent()
        && ((policy.max_x_degree.is_some() && a.x_degree() > 0) || (policy.max_y_degree.is_some() && a.y_degree() > 0));
    if bounded_by_degree {
        return Ok(None);
    }
    match (policy.max_q_degree, c.q_valuation()) {
        (Some(k), Some(v)) if v > 0 => Ok(Some(k / v)),
        (_, None) if c.is_zero() => Ok(Some(0)),
        _ => Err(SeriesError::DivergentPochhammer),
    }
}

/// Geometric series `1 / (1 - c x^a)`.
pub fn geometric_series<S: Scalar>(
    vars: VarSet,
    policy: TruncationPolicy,
    c: &S,
    a: &Monomial,
) -> Result<TruncatedSeries<S>, SeriesError> {
    let mut f = TruncatedSeries::one(vars, policy);
    f.add_term(a.clone(), c.neg())?;
    f.inverse_truncated()
}

/// `x_i y_j` in gl letters (0-based).
pub fn xy(n: usize, i: usize, j: usize) -> Monomial {
    let mut x = vec![0; n];
    let mut y = vec![0; n];
    x[i] = 1;
    y[j] = 1;
    Monomial { x, y }
}

/// `x_1...x_n y_1...y_n`.
pub fn full_product(n: usize) -> Monomial {
    Monomial { x: vec![1; n], y: vec![1; n] }
}

/// Rational constant as a scalar.
pub fn scalar_int<S: Scalar>(k: i64) -> S {
    S::from_rational(Rational::from_integer(k.into()))
}
