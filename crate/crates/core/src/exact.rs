//! Exact scalars: rationals, polynomials in `q`, rational functions in `(q, t)`
//! and `q`-power series truncated at a fixed order.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("divergent limit")]
    DivergentLimit,
    #[error("element is not a unit")]
    NotAUnit,
    #[error("expected a polynomial in q, got {0}")]
    NotAPolynomial(String),
    #[error("expected a rational function of q alone, got {0}")]
    DependsOnT(String),
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------------------
// QPoly
// ---------------------------------------------------------------------------

/// Dense univariate polynomial in `q` with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QPoly {
    c: Vec<Rational>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(r: Rational) -> Self {
        Self::from_coeffs(vec![r])
    }

    /// `coef * q^deg`
    pub fn monomial(coef: Rational, deg: usize) -> Self {
        let mut c = vec![Rational::zero(); deg + 1];
        c[deg] = coef;
        Self::from_coeffs(c)
    }

    pub fn q() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn from_coeffs(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::from_coeffs(c.iter().map(|&x| rat(x)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.c.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_one()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn leading(&self) -> Rational {
        self.c.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        QPoly { c: self.c.iter().map(|x| x * r).collect() }
    }

    /// Multiply by `q^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Rational::zero(); k];
        c.extend(self.c.iter().cloned());
        QPoly { c }
    }

    /// Divide by `q^k`; the caller guarantees divisibility.
    pub fn unshift(&self, k: usize) -> Self {
        debug_assert!(self.c.iter().take(k).all(|x| x.is_zero()));
        Self::from_coeffs(self.c.iter().skip(k).cloned().collect())
    }

    pub fn truncate(&self, max_deg: usize) -> Self {
        Self::from_coeffs(self.c.iter().take(max_deg + 1).cloned().collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let l = self.leading();
        self.scale(&(Rational::one() / l))
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.c.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// `p(1/q) * q^deg(p)`
    pub fn reversed(&self) -> Self {
        let mut c = self.c.clone();
        c.reverse();
        Self::from_coeffs(c)
    }

    pub fn div_rem(&self, d: &QPoly) -> Result<(QPoly, QPoly), ExactError> {
        let dd = d.degree().ok_or(ExactError::DivisionByZero)?;
        let lead_inv = Rational::one() / d.leading();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return Ok((QPoly::zero(), self.clone()));
        }
        let mut quot = vec![Rational::zero(); r.len() - dd];
        for k in (0..quot.len()).rev() {
            let f = &r[k + dd] * &lead_inv;
            if f.is_zero() {
                continue;
            }
            for (i, dc) in d.c.iter().enumerate() {
                r[k + i] -= &f * dc;
            }
            quot[k] = f;
        }
        r.truncate(dd);
        Ok((QPoly::from_coeffs(quot), QPoly::from_coeffs(r)))
    }

    pub fn div_exact(&self, d: &QPoly) -> QPoly {
        let (quot, r) = self.div_rem(d).expect("nonzero divisor");
        debug_assert!(r.is_zero(), "inexact polynomial division");
        quot
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Power series inverse modulo `q^(cap + 1)`.
    pub fn series_inverse(&self, cap: usize) -> Result<Vec<Rational>, ExactError> {
        let c0 = self.coeff(0);
        if c0.is_zero() {
            return Err(ExactError::NotAUnit);
        }
        let inv0 = Rational::one() / c0;
        let mut out: Vec<Rational> = Vec::with_capacity(cap + 1);
        out.push(inv0.clone());
        for k in 1..=cap {
            let mut s = Rational::zero();
            for j in 1..=k.min(self.c.len().saturating_sub(1)) {
                s += &self.c[j] * &out[k - j];
            }
            out.push(-s * &inv0);
        }
        Ok(out)
    }

    fn fmt_var(&self, f: &mut fmt::Formatter<'_>, var: &str) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            write_term(f, c, &mon_str(&[(var, k as i64)]), first)?;
            first = false;
        }
        Ok(())
    }
}

fn mon_str(parts: &[(&str, i64)]) -> String {
    let mut s = String::new();
    for (v, e) in parts {
        match *e {
            0 => {}
            1 => {
                if !s.is_empty() {
                    s.push('*');
                }
                s.push_str(v);
            }
            e => {
                if !s.is_empty() {
                    s.push('*');
                }
                s.push_str(&format!("{v}^{e}"));
            }
        }
    }
    s
}

fn write_term(f: &mut fmt::Formatter<'_>, c: &Rational, mon: &str, first: bool) -> fmt::Result {
    let neg = c.is_negative();
    let a = c.abs();
    if first {
        if neg {
            write!(f, "-")?;
        }
    } else if neg {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    if mon.is_empty() {
        write!(f, "{a}")
    } else if a.is_one() {
        write!(f, "{mon}")
    } else {
        write!(f, "{a}*{mon}")
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_var(f, "q")
    }
}

impl<'a> Add<&'a QPoly> for &'a QPoly {
    type Output = QPoly;
    fn add(self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for k in 0..n {
            match (self.c.get(k), o.c.get(k)) {
                (Some(a), Some(b)) => c.push(a + b),
                (Some(a), None) => c.push(a.clone()),
                (None, Some(b)) => c.push(b.clone()),
                (None, None) => unreachable!(),
            }
        }
        QPoly::from_coeffs(c)
    }
}

impl<'a> Sub<&'a QPoly> for &'a QPoly {
    type Output = QPoly;
    fn sub(self, o: &QPoly) -> QPoly {
        self + &(-o)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly { c: self.c.iter().map(|x| -x).collect() }
    }
}

impl<'a> Mul<&'a QPoly> for &'a QPoly {
    type Output = QPoly;
    fn mul(self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![Rational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(c)
    }
}

macro_rules! forward_owned {
    ($t:ty, $tr:ident, $m:ident) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, o: $t) -> $t {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(QPoly, Add, add);
forward_owned!(QPoly, Sub, sub);
forward_owned!(QPoly, Mul, mul);

// ---------------------------------------------------------------------------
// BiPoly: polynomials in t with QPoly coefficients
// ---------------------------------------------------------------------------

/// Polynomial in `(q, t)`, stored as a polynomial in `t` over `Q[q]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BiPoly {
    c: Vec<QPoly>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_qpoly(QPoly::one())
    }

    pub fn from_qpoly(p: QPoly) -> Self {
        Self::from_coeffs(vec![p])
    }

    pub fn from_coeffs(mut c: Vec<QPoly>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        BiPoly { c }
    }

    /// `coef * q^a * t^b`
    pub fn monomial(coef: Rational, a: usize, b: usize) -> Self {
        let mut c = vec![QPoly::zero(); b + 1];
        c[b] = QPoly::monomial(coef, a);
        Self::from_coeffs(c)
    }

    pub fn coeffs(&self) -> &[QPoly] {
        &self.c
    }

    /// Coefficient of `t^k`.
    pub fn t_coeff(&self, k: usize) -> QPoly {
        self.c.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn t_degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn t_valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn q_degree(&self) -> Option<usize> {
        self.c.iter().filter_map(|p| p.degree()).max()
    }

    pub fn q_valuation(&self) -> Option<usize> {
        self.c.iter().filter_map(|p| p.valuation()).min()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1 && self.c.first().is_none_or(|p| p.c.len() <= 1)
    }

    fn leading_t(&self) -> &QPoly {
        self.c.last().expect("nonzero polynomial")
    }

    /// Leading coefficient for lex order with `q < t`.
    pub fn lex_leading(&self) -> Rational {
        self.c.last().map(|p| p.leading()).unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        BiPoly { c: self.c.iter().map(|p| p.scale(r)).collect() }
    }

    pub fn mul_qpoly(&self, p: &QPoly) -> Self {
        Self::from_coeffs(self.c.iter().map(|x| x * p).collect())
    }

    pub fn div_qpoly_exact(&self, p: &QPoly) -> Self {
        Self::from_coeffs(self.c.iter().map(|x| x.div_exact(p)).collect())
    }

    /// Multiply by `q^a t^b`.
    pub fn shift(&self, a: usize, b: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![QPoly::zero(); b];
        c.extend(self.c.iter().map(|p| p.shift(a)));
        BiPoly { c }
    }

    /// Divide by `q^a t^b`; caller guarantees divisibility.
    pub fn unshift(&self, a: usize, b: usize) -> Self {
        Self::from_coeffs(self.c.iter().skip(b).map(|p| p.unshift(a)).collect())
    }

    /// Monic gcd of the `Q[q]` coefficients.
    pub fn content(&self) -> QPoly {
        let mut g = QPoly::zero();
        for p in &self.c {
            g = g.gcd(p);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let g = self.content();
        if g.is_one() {
            self.clone()
        } else {
            self.div_qpoly_exact(&g)
        }
    }

    fn prem(&self, d: &BiPoly) -> BiPoly {
        let dd = d.t_degree().expect("nonzero divisor");
        let ld = d.leading_t().clone();
        let mut r = self.clone();
        while let Some(rd) = r.t_degree() {
            if rd < dd {
                break;
            }
            let lr = r.leading_t().clone();
            let a = r.mul_qpoly(&ld);
            let b = d.mul_qpoly(&lr).shift(0, rd - dd);
            r = &a - &b;
        }
        r
    }

    /// Greatest common divisor in `Q[q, t]`, normalized with lex leading coefficient 1.
    pub fn gcd(&self, other: &BiPoly) -> BiPoly {
        if self.is_zero() {
            return other.normalized();
        }
        if other.is_zero() {
            return self.normalized();
        }
        let cont = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.t_degree() < b.t_degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            if b.t_degree() == Some(0) {
                a = BiPoly::one();
                break;
            }
            let r = a.prem(&b);
            a = b;
            b = r.primitive_part();
        }
        let g = if a.t_degree() == Some(0) { BiPoly::one() } else { a.primitive_part() };
        g.mul_qpoly(&cont).normalized()
    }

    fn normalized(&self) -> BiPoly {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(&(Rational::one() / self.lex_leading()))
    }

    /// Exact division in `Q[q][t]`; panics in debug builds if inexact.
    pub fn div_exact(&self, d: &BiPoly) -> BiPoly {
        let dd = d.t_degree().expect("nonzero divisor");
        if dd == 0 {
            return self.div_qpoly_exact(&d.c[0]);
        }
        let ld = d.leading_t().clone();
        let mut r = self.clone();
        let top = match r.t_degree() {
            Some(k) if k >= dd => k - dd,
            _ => {
                debug_assert!(r.is_zero(), "inexact bivariate division");
                return BiPoly::zero();
            }
        };
        let mut quot = vec![QPoly::zero(); top + 1];
        while let Some(rd) = r.t_degree() {
            if rd < dd {
                break;
            }
            let f = r.leading_t().div_exact(&ld);
            r = &r - &d.mul_qpoly(&f).shift(0, rd - dd);
            quot[rd - dd] = f;
        }
        debug_assert!(r.is_zero(), "inexact bivariate division");
        BiPoly::from_coeffs(quot)
    }

    /// `q^{deg_q} * p(1/q, t)`
    pub fn reverse_q(&self, deg: usize) -> BiPoly {
        BiPoly::from_coeffs(
            self.c
                .iter()
                .map(|p| match p.degree() {
                    Some(pd) => p.reversed().shift(deg - pd),
                    None => QPoly::zero(),
                })
                .collect(),
        )
    }

    /// `t^{deg_t} * p(q, 1/t)`
    pub fn reverse_t(&self, deg: usize) -> BiPoly {
        let mut c = self.c.clone();
        c.resize(deg + 1, QPoly::zero());
        c.reverse();
        BiPoly::from_coeffs(c)
    }

    /// Substitute `t = 0`.
    pub fn at_t_zero(&self) -> QPoly {
        self.t_coeff(0)
    }

    fn fmt_qt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (b, p) in self.c.iter().enumerate() {
            for (a, c) in p.c.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                write_term(f, c, &mon_str(&[("q", a as i64), ("t", b as i64)]), first)?;
                first = false;
            }
        }
        Ok(())
    }

    fn term_count(&self) -> usize {
        self.c.iter().map(|p| p.c.iter().filter(|x| !x.is_zero()).count()).sum()
    }
}

impl<'a> Add<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn add(self, o: &BiPoly) -> BiPoly {
        let n = self.c.len().max(o.c.len());
        let z = QPoly::zero();
        BiPoly::from_coeffs((0..n).map(|k| self.c.get(k).unwrap_or(&z) + o.c.get(k).unwrap_or(&z)).collect())
    }
}

impl<'a> Sub<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn sub(self, o: &BiPoly) -> BiPoly {
        let n = self.c.len().max(o.c.len());
        let z = QPoly::zero();
        BiPoly::from_coeffs((0..n).map(|k| self.c.get(k).unwrap_or(&z) - o.c.get(k).unwrap_or(&z)).collect())
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly { c: self.c.iter().map(|p| -p).collect() }
    }
}

impl<'a> Mul<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn mul(self, o: &BiPoly) -> BiPoly {
        if self.is_zero() || o.is_zero() {
            return BiPoly::zero();
        }
        let mut c = vec![QPoly::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] = &c[i + j] + &(a * b);
                }
            }
        }
        BiPoly::from_coeffs(c)
    }
}

forward_owned!(BiPoly, Add, add);
forward_owned!(BiPoly, Sub, sub);
forward_owned!(BiPoly, Mul, mul);

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_qt(f)
    }
}

// ---------------------------------------------------------------------------
// QTRational
// ---------------------------------------------------------------------------

/// Element of `Q(q, t)` in canonical form: numerator and denominator coprime,
/// denominator with lex leading coefficient 1 (order `q < t`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QTRational {
    num: BiPoly,
    den: BiPoly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitDirection {
    Zero,
    Infinity,
}

impl QTRational {
    pub fn zero() -> Self {
        QTRational { num: BiPoly::zero(), den: BiPoly::one() }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        QTRational { num: BiPoly::from_qpoly(QPoly::constant(r)), den: BiPoly::one() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat(n))
    }

    pub fn from_qpoly(p: QPoly) -> Self {
        QTRational { num: BiPoly::from_qpoly(p), den: BiPoly::one() }
    }

    pub fn from_bipoly(p: BiPoly) -> Self {
        QTRational { num: p, den: BiPoly::one() }
    }

    pub fn q() -> Self {
        Self::from_qpoly(QPoly::q())
    }

    pub fn t() -> Self {
        Self::from_bipoly(BiPoly::monomial(Rational::one(), 0, 1))
    }

    /// `coef * q^a * t^b` for arbitrary integer exponents.
    pub fn monomial(coef: Rational, a: i64, b: i64) -> Self {
        let num = BiPoly::monomial(Rational::one(), a.max(0) as usize, b.max(0) as usize).scale(&coef);
        let den = BiPoly::monomial(Rational::one(), (-a).max(0) as usize, (-b).max(0) as usize);
        QTRational { num, den }
    }

    /// `1 - coef * q^a * t^b` with `a, b >= 0`.
    pub fn one_minus(coef: Rational, a: usize, b: usize) -> Self {
        Self::from_bipoly(&BiPoly::one() - &BiPoly::monomial(coef, a, b))
    }

    pub fn new(num: BiPoly, den: BiPoly) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: BiPoly, den: BiPoly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = num.gcd(&den);
            if g.is_constant() {
                (num, den)
            } else {
                (num.div_exact(&g), den.div_exact(&g))
            }
        };
        let l = Rational::one() / den.lex_leading();
        QTRational { num: num.scale(&l), den: den.scale(&l) }
    }

    pub fn numerator(&self) -> &BiPoly {
        &self.num
    }

    pub fn denominator(&self) -> &BiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn is_t_free(&self) -> bool {
        self.num.t_degree().unwrap_or(0) == 0 && self.den.t_degree() == Some(0)
    }

    /// The value as a polynomial in `q`, if it is one.
    pub fn as_qpoly(&self) -> Option<QPoly> {
        if !self.is_t_free() || !self.den.is_constant() {
            return None;
        }
        let d = self.den.t_coeff(0).coeff(0);
        Some(self.num.t_coeff(0).scale(&(Rational::one() / d)))
    }

    pub fn as_rational(&self) -> Option<Rational> {
        let p = self.as_qpoly()?;
        match p.degree() {
            None => Some(Rational::zero()),
            Some(0) => Some(p.coeff(0)),
            _ => None,
        }
    }

    pub fn inv(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Self::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &Self) -> Result<Self, ExactError> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self, ExactError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Substitute `q -> 1/q`, and also `t -> 1/t` when `also_t`.
    pub fn invert_q(&self, also_t: bool) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let qd = self.num.q_degree().unwrap_or(0).max(self.den.q_degree().unwrap_or(0));
        let mut num = self.num.reverse_q(qd);
        let mut den = self.den.reverse_q(qd);
        if also_t {
            let td = self.num.t_degree().unwrap_or(0).max(self.den.t_degree().unwrap_or(0));
            num = num.reverse_t(td);
            den = den.reverse_t(td);
        }
        Self::reduce(num, den)
    }

    /// Limit as `t -> 0` or `t -> infinity`; the result is free of `t`.
    pub fn limit_t(&self, dir: LimitDirection) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let (n, d) = match dir {
            LimitDirection::Zero => {
                let vn = self.num.t_valuation().unwrap();
                let vd = self.den.t_valuation().unwrap();
                match vn.cmp(&vd) {
                    Ordering::Less => return Err(ExactError::DivergentLimit),
                    Ordering::Greater => return Ok(Self::zero()),
                    Ordering::Equal => (self.num.t_coeff(vn), self.den.t_coeff(vd)),
                }
            }
            LimitDirection::Infinity => {
                let dn = self.num.t_degree().unwrap();
                let dd = self.den.t_degree().unwrap();
                match dn.cmp(&dd) {
                    Ordering::Greater => return Err(ExactError::DivergentLimit),
                    Ordering::Less => return Ok(Self::zero()),
                    Ordering::Equal => (self.num.t_coeff(dn), self.den.t_coeff(dd)),
                }
            }
        };
        Ok(Self::reduce(BiPoly::from_qpoly(n), BiPoly::from_qpoly(d)))
    }

    /// Expansion in `q` up to `q^cap`; requires a value free of `t` that is regular at `q = 0`.
    pub fn to_qseries(&self, cap: u32) -> Result<QSeries, ExactError> {
        if !self.is_t_free() {
            return Err(ExactError::DependsOnT(self.to_string()));
        }
        let n = self.num.t_coeff(0);
        let d = self.den.t_coeff(0);
        let inv = d.series_inverse(cap as usize).map_err(|_| ExactError::DivergentLimit)?;
        let s = QSeries::new(inv, Some(cap));
        Ok(&QSeries::from_qpoly(&n, Some(cap)) * &s)
    }

    /// Exact evaluation at rational `q`, `t`.
    pub fn eval(&self, q: &Rational, t: &Rational) -> Result<Rational, ExactError> {
        let ev = |p: &BiPoly| {
            let mut acc = Rational::zero();
            for c in p.c.iter().rev() {
                acc = acc * t + c.eval(q);
            }
            acc
        };
        let d = ev(&self.den);
        if d.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(ev(&self.num) / d)
    }

    pub fn size(&self) -> usize {
        self.num.term_count() + self.den.term_count()
    }
}

impl<'a> Add<&'a QTRational> for &'a QTRational {
    type Output = QTRational;
    fn add(self, o: &QTRational) -> QTRational {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return QTRational::reduce(&self.num + &o.num, self.den.clone());
        }
        let num = &(&self.num * &o.den) + &(&o.num * &self.den);
        QTRational::reduce(num, &self.den * &o.den)
    }
}

impl<'a> Sub<&'a QTRational> for &'a QTRational {
    type Output = QTRational;
    fn sub(self, o: &QTRational) -> QTRational {
        self + &(-o)
    }
}

impl Neg for &QTRational {
    type Output = QTRational;
    fn neg(self) -> QTRational {
        QTRational { num: -&self.num, den: self.den.clone() }
    }
}

impl<'a> Mul<&'a QTRational> for &'a QTRational {
    type Output = QTRational;
    fn mul(self, o: &QTRational) -> QTRational {
        if self.is_zero() || o.is_zero() {
            return QTRational::zero();
        }
        if self.den.is_constant() && o.den.is_constant() {
            return QTRational::reduce(&self.num * &o.num, &self.den * &o.den);
        }
        // cross-cancel before multiplying to keep sizes down
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let (n1, d2) = if g1.is_constant() { (self.num.clone(), o.den.clone()) } else { (self.num.div_exact(&g1), o.den.div_exact(&g1)) };
        let (n2, d1) = if g2.is_constant() { (o.num.clone(), self.den.clone()) } else { (o.num.div_exact(&g2), self.den.div_exact(&g2)) };
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let l = Rational::one() / den.lex_leading();
        QTRational { num: num.scale(&l), den: den.scale(&l) }
    }
}

forward_owned!(QTRational, Add, add);
forward_owned!(QTRational, Sub, sub);
forward_owned!(QTRational, Mul, mul);

impl fmt::Display for QTRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() && self.den.lex_leading().is_one() {
            return self.num.fmt_qt(f);
        }
        write!(f, "(")?;
        self.num.fmt_qt(f)?;
        write!(f, ")/(")?;
        self.den.fmt_qt(f)?;
        write!(f, ")")
    }
}

// ---------------------------------------------------------------------------
// QSeries
// ---------------------------------------------------------------------------

/// Power series in `q` known modulo `q^(cap + 1)`. `cap = None` marks an exact polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSeries {
    c: Vec<Rational>,
    cap: Option<u32>,
}

fn min_cap(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl QSeries {
    pub fn new(mut c: Vec<Rational>, cap: Option<u32>) -> Self {
        if let Some(k) = cap {
            c.truncate(k as usize + 1);
        }
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QSeries { c, cap }
    }

    pub fn zero() -> Self {
        QSeries { c: Vec::new(), cap: None }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(r: Rational) -> Self {
        Self::new(vec![r], None)
    }

    pub fn from_qpoly(p: &QPoly, cap: Option<u32>) -> Self {
        Self::new(p.coeffs().to_vec(), cap)
    }

    pub fn from_ints(c: &[i64], cap: Option<u32>) -> Self {
        Self::new(c.iter().map(|&x| rat(x)).collect(), cap)
    }

    /// `q^k`, zero when `k` exceeds the cap.
    pub fn q_power(k: u32, cap: Option<u32>) -> Self {
        let mut c = vec![Rational::zero(); k as usize + 1];
        c[k as usize] = Rational::one();
        Self::new(c, cap)
    }

    pub fn cap(&self) -> Option<u32> {
        self.cap
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.c.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn with_cap(&self, cap: Option<u32>) -> Self {
        Self::new(self.c.clone(), min_cap(self.cap, cap))
    }

    pub fn to_qpoly(&self) -> QPoly {
        QPoly::from_coeffs(self.c.clone())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::new(self.c.iter().map(|x| x * r).collect(), self.cap)
    }

    /// Multiply by `q^k`.
    pub fn shift(&self, k: u32) -> Self {
        let mut c = vec![Rational::zero(); k as usize];
        c.extend(self.c.iter().cloned());
        Self::new(c, self.cap)
    }

    /// Multiplicative inverse; needs a finite cap unless the series is constant.
    pub fn inverse(&self) -> Result<Self, ExactError> {
        let c0 = self.coeff(0);
        if c0.is_zero() {
            return Err(ExactError::NotAUnit);
        }
        match self.cap {
            Some(k) => Ok(Self::new(self.to_qpoly().series_inverse(k as usize)?, Some(k))),
            None if self.c.len() == 1 => Ok(Self::constant(Rational::one() / c0)),
            None => Err(ExactError::NotAUnit),
        }
    }

    /// All coefficients are nonnegative integers.
    pub fn is_nonneg_integral(&self) -> bool {
        self.c.iter().all(|x| x.is_integer() && !x.is_negative())
    }
}

impl<'a> Add<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn add(self, o: &QSeries) -> QSeries {
        let n = self.c.len().max(o.c.len());
        let z = Rational::zero();
        QSeries::new(
            (0..n).map(|k| self.c.get(k).unwrap_or(&z) + o.c.get(k).unwrap_or(&z)).collect(),
            min_cap(self.cap, o.cap),
        )
    }
}

impl<'a> Sub<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn sub(self, o: &QSeries) -> QSeries {
        self + &(-o)
    }
}

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries { c: self.c.iter().map(|x| -x).collect(), cap: self.cap }
    }
}

impl<'a> Mul<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn mul(self, o: &QSeries) -> QSeries {
        let cap = min_cap(self.cap, o.cap);
        if self.is_zero() || o.is_zero() {
            return QSeries { c: Vec::new(), cap };
        }
        let mut len = self.c.len() + o.c.len() - 1;
        if let Some(k) = cap {
            len = len.min(k as usize + 1);
        }
        let mut c = vec![Rational::zero(); len];
        for (i, a) in self.c.iter().enumerate() {
            if i >= len {
                break;
            }
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                c[i + j] += a * b;
            }
        }
        QSeries::new(c, cap)
    }
}

forward_owned!(QSeries, Add, add);
forward_owned!(QSeries, Sub, sub);
forward_owned!(QSeries, Mul, mul);

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        QPoly::from_coeffs(self.c.clone()).fmt_var(f, "q")?;
        if let Some(k) = self.cap {
            write!(f, " + O(q^{})", k + 1)?;
        }
        Ok(())
    }
}

/// `(q; q)_m` as a polynomial.
pub fn q_pochhammer(m: u32) -> QPoly {
    let mut acc = QPoly::one();
    for i in 1..=m as usize {
        acc = &acc * &(&QPoly::one() - &QPoly::monomial(Rational::one(), i));
    }
    acc
}

/// `1 / (q; q)_m` expanded to order `cap`.
pub fn q_pochhammer_inv(m: u32, cap: u32) -> QSeries {
    QSeries::from_qpoly(&q_pochhammer(m), Some(cap)).inverse().expect("constant term 1")
}

/// Gaussian binomial `[m choose a]_q`.
pub fn q_binomial(m: u32, a: u32) -> QPoly {
    if a > m {
        return QPoly::zero();
    }
    let num = q_pochhammer(m);
    let den = &q_pochhammer(a) * &q_pochhammer(m - a);
    num.div_exact(&den)
}
