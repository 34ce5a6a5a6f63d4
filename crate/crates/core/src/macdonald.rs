//! Nonsymmetric Macdonald polynomials `E_lambda(x; q, t)` of type `GL_n`.
//!
//! The defining computation is the intertwiner recursion: swaps `E_{s_i mu} = (T_i + c) E_mu`
//! and the affine raising step `E_lambda = q^{mu_n} x_1 E_mu(x_2, .., x_n, x_1 / q)`.
//! The Haglund–Haiman–Loehr sum over non-attacking fillings is an independent second path.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{q_pochhammer, BiPoly, ExactError, LimitDirection, QPoly, QSeries, QTRational, Rational};
use crate::weights::{Cell, Composition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MacdonaldError {
    #[error("empty composition")]
    Empty,
    #[error("coefficient of {monomial:?} under {spec}: {source}")]
    Specialization { monomial: Vec<u32>, spec: Specialization, source: ExactError },
}

/// Which parameters the coefficients are evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Specialization {
    /// `E(x; q, t)`
    Generic,
    /// `E(x; q, 0)`
    T0,
    /// `E(x; q^{-1}, infinity)`
    QinvTinf,
    /// `E(x; q^{-1}, t^{-1})`
    QtInv,
    /// `E(x; 0, 0)`, the key polynomial
    Q0T0,
    /// `E(x; infinity, infinity)`, the Demazure atom
    QinfTinf,
}

impl Specialization {
    pub fn name(&self) -> &'static str {
        match self {
            Specialization::Generic => "generic",
            Specialization::T0 => "t0",
            Specialization::QinvTinf => "qinv_tinf",
            Specialization::QtInv => "qt_inv",
            Specialization::Q0T0 => "q0_t0",
            Specialization::QinfTinf => "qinf_tinf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "generic" => Specialization::Generic,
            "t0" => Specialization::T0,
            "qinv_tinf" | "qinv-tinf" => Specialization::QinvTinf,
            "qt_inv" | "qt-inv" => Specialization::QtInv,
            "q0_t0" | "q0-t0" => Specialization::Q0T0,
            "qinf_tinf" | "qinf-tinf" => Specialization::QinfTinf,
            _ => return None,
        })
    }
}

impl fmt::Display for Specialization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub type Terms = BTreeMap<Vec<u32>, QTRational>;

/// `E_lambda` under some specialization, as a map from exponent vectors to coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacdonaldPolynomial {
    pub lambda: Composition,
    pub spec: Specialization,
    pub terms: Terms,
}

impl MacdonaldPolynomial {
    pub fn n(&self) -> usize {
        self.lambda.n()
    }

    pub fn coeff(&self, exps: &[u32]) -> QTRational {
        self.terms.get(exps).cloned().unwrap_or_else(QTRational::zero)
    }

    /// Coefficients as polynomials in `q`; fails if some coefficient is not one.
    pub fn qpoly_terms(&self) -> Result<BTreeMap<Vec<u32>, QPoly>, ExactError> {
        self.terms
            .iter()
            .map(|(m, c)| c.as_qpoly().map(|p| (m.clone(), p)).ok_or_else(|| ExactError::NotAPolynomial(c.to_string())))
            .collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.lambda.size();
        self.terms.keys().all(|m| m.iter().sum::<u32>() == d)
    }
}

impl fmt::Display for MacdonaldPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mon: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
                .collect();
            let mon = if mon.is_empty() { "1".to_string() } else { mon.join("*") };
            if c.is_one() {
                write!(f, "{mon}")?;
            } else {
                write!(f, "({c})*{mon}")?;
            }
        }
        Ok(())
    }
}

fn add_term(terms: &mut Terms, m: Vec<u32>, c: QTRational) {
    if c.is_zero() {
        return;
    }
    match terms.get_mut(&m) {
        Some(old) => {
            let s = &*old + &c;
            if s.is_zero() {
                terms.remove(&m);
            } else {
                *old = s;
            }
        }
        None => {
            terms.insert(m, c);
        }
    }
}

/// `x_{i+1} (f - s_i f) / (x_i - x_{i+1})` on a monomial, with integer coefficients.
pub(crate) fn lowered_divided_difference(e: &[u32], i: usize) -> Vec<(Vec<u32>, i64)> {
    let (a, b) = (e[i], e[i + 1]);
    let mut out = Vec::new();
    if a == b {
        return out;
    }
    let (lo, hi, sign) = if a > b { (b, a, 1) } else { (a, b, -1) };
    for k in 0..hi - lo {
        let mut m = e.to_vec();
        m[i] = lo + k;
        m[i + 1] = hi - k;
        out.push((m, sign));
    }
    out
}

/// Demazure–Lusztig operator `T_i = t s_i + (1 - t) x_{i+1} (1 - s_i) / (x_i - x_{i+1})`.
pub fn apply_t(terms: &Terms, i: usize) -> Terms {
    let t = QTRational::t();
    let one_minus_t = QTRational::one_minus(Rational::one(), 0, 1);
    let mut swapped: BTreeMap<Vec<u32>, QTRational> = BTreeMap::new();
    let mut dd: BTreeMap<Vec<u32>, QTRational> = BTreeMap::new();
    for (m, c) in terms {
        let mut s = m.clone();
        s.swap(i, i + 1);
        add_term(&mut swapped, s, c.clone());
        for (mm, sign) in lowered_divided_difference(m, i) {
            let cc = if sign > 0 { c.clone() } else { -c };
            add_term(&mut dd, mm, cc);
        }
    }
    let mut out = Terms::new();
    for (m, c) in swapped {
        add_term(&mut out, m, &t * &c);
    }
    for (m, c) in dd {
        add_term(&mut out, m, &one_minus_t * &c);
    }
    out
}

/// The `r_i` of the spectral vector `q^{mu_i} t^{-r_i}`.
pub fn spectral_rank(mu: &[u32], i: usize) -> i64 {
    let before = mu[..i].iter().filter(|&&m| m > mu[i]).count();
    let after = mu[i + 1..].iter().filter(|&&m| m >= mu[i]).count();
    (before + after) as i64
}

/// `(q, t)` exponents of `y_i(mu) / y_{i+1}(mu)` for a swap at `i` with `mu_i > mu_{i+1}`.
pub fn swap_exponents(mu: &[u32], i: usize) -> (u32, u32) {
    let a = mu[i] - mu[i + 1];
    let b = spectral_rank(mu, i + 1) - spectral_rank(mu, i);
    debug_assert!(b > 0);
    (a, b as u32)
}

/// How `E_lambda` is reached from a smaller index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Base,
    /// `E_lambda = (T_i + c) E_mu` with `mu = s_i lambda`
    Swap { i: usize, mu: Composition },
    /// `E_lambda = q^{mu_n} x_1 E_mu(x_2, .., x_n, x_1 / q)`
    Raise { mu: Composition },
}

pub fn recursion_step(lambda: &Composition) -> Step {
    let l = lambda.parts();
    if l.iter().all(|&x| x == 0) {
        return Step::Base;
    }
    for i in 0..l.len() - 1 {
        if l[i] < l[i + 1] {
            return Step::Swap { i, mu: lambda.swap(i) };
        }
    }
    let mut mu: Vec<u32> = l[1..].to_vec();
    mu.push(l[0] - 1);
    Step::Raise { mu: Composition(mu) }
}

type Cache = RwLock<HashMap<Composition, Arc<MacdonaldPolynomial>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Number of memoized generic polynomials.
pub fn cache_len() -> usize {
    cache().read().unwrap().len()
}

/// Insert a value computed elsewhere (insert-once: an existing entry wins).
pub fn cache_insert(p: MacdonaldPolynomial) -> Arc<MacdonaldPolynomial> {
    let mut w = cache().write().unwrap();
    w.entry(p.lambda.clone()).or_insert_with(|| Arc::new(p)).clone()
}

pub fn cache_snapshot() -> Vec<Arc<MacdonaldPolynomial>> {
    let mut v: Vec<_> = cache().read().unwrap().values().cloned().collect();
    v.sort_by(|a, b| a.lambda.cmp(&b.lambda));
    v
}

/// `E_lambda(x; q, t)` via the intertwiner recursion (memoized).
pub fn compute_e(lambda: &Composition) -> Result<Arc<MacdonaldPolynomial>, MacdonaldError> {
    if lambda.n() == 0 {
        return Err(MacdonaldError::Empty);
    }
    if let Some(p) = cache().read().unwrap().get(lambda) {
        return Ok(p.clone());
    }
    let terms = match recursion_step(lambda) {
        Step::Base => {
            let mut t = Terms::new();
            t.insert(vec![0; lambda.n()], QTRational::one());
            t
        }
        Step::Swap { i, mu } => {
            let prev = compute_e(&mu)?;
            let (a, b) = swap_exponents(mu.parts(), i);
            let c = QTRational::one_minus(Rational::one(), 0, 1)
                .div(&QTRational::one_minus(Rational::one(), a as usize, b as usize))
                .expect("nonzero denominator");
            let mut out = apply_t(&prev.terms, i);
            for (m, v) in &prev.terms {
                add_term(&mut out, m.clone(), &c * v);
            }
            out
        }
        Step::Raise { mu } => {
            let prev = compute_e(&mu)?;
            let n = lambda.n();
            let mun = mu.parts()[n - 1] as i64;
            let mut out = Terms::new();
            for (e, v) in &prev.terms {
                let mut m = Vec::with_capacity(n);
                m.push(1 + e[n - 1]);
                m.extend_from_slice(&e[..n - 1]);
                let f = QTRational::monomial(Rational::one(), mun - e[n - 1] as i64, 0);
                add_term(&mut out, m, &f * v);
            }
            out
        }
    };
    Ok(cache_insert(MacdonaldPolynomial { lambda: lambda.clone(), spec: Specialization::Generic, terms }))
}

// ---------------------------------------------------------------------------
// Haglund–Haiman–Loehr fillings
// ---------------------------------------------------------------------------

/// A non-attacking filling with basement `i` under column `i`; `rows[r][i]` for `r >= 1`.
#[derive(Clone, Debug)]
pub struct Filling {
    /// `values[i][j]` is the entry of cell `(i+1, j)`, with `values[i][0] = i`.
    pub values: Vec<Vec<usize>>,
}

/// Enumerate the non-attacking fillings of the column diagram of `lambda` with entries in `0..n`.
pub fn nonattacking_fillings(lambda: &Composition) -> Vec<Filling> {
    let n = lambda.n();
    let l = lambda.parts();
    let rows = l.iter().copied().max().unwrap_or(0) as usize;
    let mut out = Vec::new();
    let mut values: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    fn rec(r: usize, rows: usize, l: &[u32], values: &mut Vec<Vec<usize>>, out: &mut Vec<Filling>) {
        if r > rows {
            out.push(Filling { values: values.clone() });
            return;
        }
        let cols: Vec<usize> = (0..l.len()).filter(|&i| l[i] as usize >= r).collect();
        let mut used = vec![false; l.len()];
        fill_row(0, &cols, r, rows, l, values, &mut used, out);
    }

    #[allow(clippy::too_many_arguments)]
    fn fill_row(
        idx: usize,
        cols: &[usize],
        r: usize,
        rows: usize,
        l: &[u32],
        values: &mut Vec<Vec<usize>>,
        used: &mut Vec<bool>,
        out: &mut Vec<Filling>,
    ) {
        if idx == cols.len() {
            rec(r + 1, rows, l, values, out);
            return;
        }
        let i = cols[idx];
        let n = l.len();
        for v in 0..n {
            if used[v] {
                continue;
            }
            // attacks the cell one row down in any column to the right
            if (i + 1..n).any(|k| values[k].len() > r - 1 && values[k][r - 1] == v) {
                continue;
            }
            used[v] = true;
            values[i].push(v);
            fill_row(idx + 1, cols, r, rows, l, values, used, out);
            values[i].pop();
            used[v] = false;
        }
    }

    rec(1, rows, l, &mut values, &mut out);
    out
}

/// Statistics of one filling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillingStats {
    pub monomial: Vec<u32>,
    pub maj: u32,
    pub coinv: u32,
    /// `(arm, leg)` of each cell whose entry differs from the one below.
    pub unequal_cells: Vec<(u32, u32)>,
    /// Inversion triples whose top cell differs from the one below.
    pub unequal_inversions: u32,
}

fn triple_is_inversion(a: usize, b: usize, c: usize) -> bool {
    // a is the upper cell; ties a == b count a as smaller
    let va = if a == b { 2 * a as i64 - 1 } else { 2 * a as i64 };
    let vals = [va, 2 * b as i64, 2 * c as i64];
    let m = (0..3).min_by_key(|&k| vals[k]).unwrap();
    vals[m] < vals[(m + 1) % 3] && vals[(m + 1) % 3] < vals[(m + 2) % 3]
}

pub fn filling_stats(lambda: &Composition, f: &Filling) -> FillingStats {
    let n = lambda.n();
    let l = lambda.parts();
    let mut monomial = vec![0u32; n];
    let mut maj = 0;
    let mut unequal_cells = Vec::new();
    let mut unequal_top = vec![Vec::new(); n];
    for i in 0..n {
        unequal_top[i] = vec![false; l[i] as usize + 1];
        for j in 1..=l[i] as usize {
            let v = f.values[i][j];
            monomial[v] += 1;
            let (arm, leg) = lambda.arm_leg(Cell { col: i + 1, row: j }).expect("cell in diagram");
            if v > f.values[i][j - 1] {
                maj += leg + 1;
            }
            if v != f.values[i][j - 1] {
                unequal_cells.push((arm, leg));
                unequal_top[i][j] = true;
            }
        }
    }
    let mut triples = 0;
    let mut inversions = 0;
    let mut unequal_inversions = 0;
    let mut count = |i: usize, ra: usize, k: usize, rc: usize| {
        let a = f.values[i][ra];
        let b = f.values[i][ra - 1];
        let c = f.values[k][rc];
        triples += 1;
        if triple_is_inversion(a, b, c) {
            inversions += 1;
            if unequal_top[i][ra] {
                unequal_inversions += 1;
            }
        }
    };
    for i in 0..n {
        for k in i + 1..n {
            if l[i] > l[k] {
                for r in 0..=l[k] as usize {
                    count(i, r + 1, k, r);
                }
            }
        }
    }
    for k in 0..n {
        for i in k + 1..n {
            if l[k] <= l[i] {
                for r in 1..=l[k] as usize {
                    count(i, r, k, r);
                }
            }
        }
    }
    FillingStats { monomial, maj, coinv: triples - inversions, unequal_cells, unequal_inversions }
}

/// `E_lambda(x; q, t)` as a sum over non-attacking fillings.
pub fn compute_e_fillings(lambda: &Composition) -> MacdonaldPolynomial {
    let mut terms = Terms::new();
    let mut grouped: BTreeMap<(Vec<u32>, u32, u32, Vec<(u32, u32)>), i64> = BTreeMap::new();
    for f in nonattacking_fillings(lambda) {
        let s = filling_stats(lambda, &f);
        let mut cells = s.unequal_cells.clone();
        cells.sort_unstable();
        *grouped.entry((s.monomial, s.maj, s.coinv, cells)).or_insert(0) += 1;
    }
    // sum each monomial over the common denominator prod (1 - q^{leg+1} t^{arm+1})^k, reduce once
    let mut by_monomial: BTreeMap<Vec<u32>, Vec<(u32, u32, Vec<(u32, u32)>, i64)>> = BTreeMap::new();
    for ((m, maj, coinv, cells), mult) in grouped {
        by_monomial.entry(m).or_default().push((maj, coinv, cells, mult));
    }
    let one_minus_t = BiPoly::from_coeffs(vec![QPoly::one(), QPoly::constant(-Rational::one())]);
    let factor = |(arm, leg): (u32, u32)| &BiPoly::one() - &BiPoly::monomial(Rational::one(), leg as usize + 1, arm as usize + 1);
    for (m, groups) in by_monomial {
        let mut need: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for (_, _, cells, _) in &groups {
            let mut count: BTreeMap<(u32, u32), usize> = BTreeMap::new();
            for &c in cells {
                *count.entry(c).or_insert(0) += 1;
            }
            for (c, k) in count {
                let e = need.entry(c).or_insert(0);
                *e = (*e).max(k);
            }
        }
        let den = need.iter().fold(BiPoly::one(), |acc, (&c, &k)| (0..k).fold(acc, |a, _| &a * &factor(c)));
        let mut num = BiPoly::zero();
        for (maj, coinv, cells, mult) in groups {
            let mut w = BiPoly::monomial(Rational::from_integer(mult.into()), maj as usize, coinv as usize);
            let mut left = need.clone();
            for c in &cells {
                w = &w * &one_minus_t;
                *left.get_mut(c).unwrap() -= 1;
            }
            for (c, k) in left {
                for _ in 0..k {
                    w = &w * &factor(c);
                }
            }
            num = &num + &w;
        }
        let c = QTRational::new(num, den).expect("nonzero denominator");
        if !c.is_zero() {
            terms.insert(m, c);
        }
    }
    MacdonaldPolynomial { lambda: lambda.clone(), spec: Specialization::Generic, terms }
}

/// `E_lambda` at `t = 0` or at `(q^{-1}, t = infinity)` as a sum over non-attacking fillings,
/// keeping only coefficients of `q^k` with `k <= max_q`.
///
/// At `t = 0` only fillings with no coinversion triple survive, with weight `q^maj`.
/// At `t = infinity` only fillings whose cells differing from the cell below carry no
/// inversion triple survive, with weight `q^w`, `w` the sum of `leg + 1` over cells whose
/// entry is smaller than the one below.
pub fn specialized_fillings(
    lambda: &Composition,
    spec: Specialization,
    max_q: u32,
) -> BTreeMap<Vec<u32>, QSeries> {
    assert!(matches!(spec, Specialization::T0 | Specialization::QinvTinf));
    let n = lambda.n();
    let l = lambda.parts().to_vec();
    let rows = l.iter().copied().max().unwrap_or(0) as usize;
    let arm_leg: Vec<Vec<(u32, u32)>> = (0..n)
        .map(|i| {
            (0..=l[i] as usize)
                .map(|j| if j == 0 { (0, 0) } else { lambda.arm_leg(Cell { col: i + 1, row: j }).unwrap() })
                .collect()
        })
        .collect();
    let mut acc: BTreeMap<Vec<u32>, Vec<i64>> = BTreeMap::new();
    let mut st = FillState {
        l,
        rows,
        spec,
        max_q,
        arm_leg,
        values: (0..n).map(|i| vec![i]).collect(),
        content: vec![0; n],
        used: vec![false; n],
    };
    st.row(1, 0, &mut acc);
    acc.into_iter()
        .filter_map(|(m, c)| {
            let s = QSeries::new(c.into_iter().map(|x| Rational::from_integer(x.into())).collect(), Some(max_q));
            (!s.is_zero()).then_some((m, s))
        })
        .collect()
}

struct FillState {
    l: Vec<u32>,
    rows: usize,
    spec: Specialization,
    max_q: u32,
    arm_leg: Vec<Vec<(u32, u32)>>,
    values: Vec<Vec<usize>>,
    content: Vec<u32>,
    used: Vec<bool>,
}

impl FillState {
    fn row(&mut self, r: usize, weight: u32, acc: &mut BTreeMap<Vec<u32>, Vec<i64>>) {
        if r > self.rows {
            let e = acc.entry(self.content.clone()).or_insert_with(|| vec![0; self.max_q as usize + 1]);
            e[weight as usize] += 1;
            return;
        }
        self.used.iter_mut().for_each(|u| *u = false);
        self.cell(r, 0, weight, acc);
    }

    fn cell(&mut self, r: usize, start: usize, weight: u32, acc: &mut BTreeMap<Vec<u32>, Vec<i64>>) {
        let n = self.l.len();
        let Some(i) = (start..n).find(|&i| self.l[i] as usize >= r) else {
            let saved = self.used.clone();
            self.row(r + 1, weight, acc);
            self.used = saved;
            return;
        };
        let below = self.values[i][r - 1];
        let (_, leg) = self.arm_leg[i][r];
        for v in 0..n {
            if self.used[v] {
                continue;
            }
            if (i + 1..n).any(|k| self.values[k].len() > r - 1 && self.values[k][r - 1] == v) {
                continue;
            }
            let w = match self.spec {
                Specialization::T0 if v > below => weight + leg + 1,
                Specialization::QinvTinf if v < below => weight + leg + 1,
                _ => weight,
            };
            if w > self.max_q {
                continue;
            }
            self.values[i].push(v);
            let ok = v == below || self.triples_ok(i, r);
            if ok {
                self.used[v] = true;
                self.content[v] += 1;
                self.cell(r, i + 1, w, acc);
                self.content[v] -= 1;
                self.used[v] = false;
            }
            self.values[i].pop();
        }
    }

    /// Triples with top cell `(i, r)`: all inversions at `t = 0`, none at `t = infinity`.
    fn triples_ok(&self, i: usize, r: usize) -> bool {
        let want_inversion = self.spec == Specialization::T0;
        let a = self.values[i][r];
        let b = self.values[i][r - 1];
        let l = &self.l;
        for k in 0..l.len() {
            let c = if k < i && l[k] <= l[i] && r <= l[k] as usize {
                self.values[k][r]
            } else if k > i && l[k] < l[i] && r <= l[k] as usize + 1 {
                self.values[k][r - 1]
            } else {
                continue;
            };
            if triple_is_inversion(a, b, c) != want_inversion {
                return false;
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Specializations
// ---------------------------------------------------------------------------

fn map_coeffs(
    e: &MacdonaldPolynomial,
    spec: Specialization,
    f: impl Fn(&QTRational) -> Result<QTRational, ExactError>,
) -> Result<MacdonaldPolynomial, MacdonaldError> {
    let mut terms = Terms::new();
    for (m, c) in &e.terms {
        let v = f(c).map_err(|source| MacdonaldError::Specialization { monomial: m.clone(), spec, source })?;
        if !v.is_zero() {
            terms.insert(m.clone(), v);
        }
    }
    Ok(MacdonaldPolynomial { lambda: e.lambda.clone(), spec, terms })
}

fn at_q_zero(c: &QTRational) -> Result<QTRational, ExactError> {
    let p = c.as_qpoly().ok_or_else(|| ExactError::NotAPolynomial(c.to_string()))?;
    Ok(QTRational::from_rational(p.coeff(0)))
}

/// Specialize a generic `E_lambda` coefficientwise through exact limits.
pub fn specialize_e(e: &MacdonaldPolynomial, spec: Specialization) -> Result<MacdonaldPolynomial, MacdonaldError> {
    assert_eq!(e.spec, Specialization::Generic, "specialize a generic polynomial");
    match spec {
        Specialization::Generic => Ok(e.clone()),
        Specialization::T0 => map_coeffs(e, spec, |c| c.limit_t(LimitDirection::Zero)),
        Specialization::QinvTinf => map_coeffs(e, spec, |c| c.invert_q(false).limit_t(LimitDirection::Infinity)),
        Specialization::QtInv => map_coeffs(e, spec, |c| Ok(c.invert_q(true))),
        Specialization::Q0T0 => map_coeffs(e, spec, |c| at_q_zero(&c.limit_t(LimitDirection::Zero)?)),
        Specialization::QinfTinf => {
            map_coeffs(e, spec, |c| at_q_zero(&c.invert_q(false).limit_t(LimitDirection::Infinity)?))
        }
    }
}

/// `compute_e` followed by `specialize_e`.
pub fn e_specialized(lambda: &Composition, spec: Specialization) -> Result<MacdonaldPolynomial, MacdonaldError> {
    specialize_e(&*compute_e(lambda)?, spec)
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// `a_lambda(q, t) = prod over cells (1 - q^{leg+1} t^{arm}) / (1 - q^{leg+1} t^{arm+1})`.
pub fn norm_a_qt(lambda: &Composition) -> QTRational {
    let mut acc = QTRational::one();
    for cell in lambda.cells() {
        let (arm, leg) = lambda.arm_leg(cell).unwrap();
        let num = QTRational::one_minus(Rational::one(), leg as usize + 1, arm as usize + 1);
        let den = QTRational::one_minus(Rational::one(), leg as usize + 1, arm as usize);
        acc = &acc * &num.div(&den).expect("nonzero");
    }
    acc
}

/// `a_lambda(q) = a_lambda(q, 0)`: the product over arm-zero cells of `1 / (1 - q^{leg+1})`.
pub fn norm_a_q(lambda: &Composition, cap: u32) -> QSeries {
    let mut den = QPoly::one();
    for cell in lambda.cells() {
        let (arm, leg) = lambda.arm_leg(cell).unwrap();
        if arm == 0 {
            den = &den * &(&QPoly::one() - &QPoly::monomial(Rational::one(), leg as usize + 1));
        }
    }
    QSeries::from_qpoly(&den, Some(cap)).inverse().expect("constant term 1")
}

/// The exponents `m` with `a_lambda(q) = prod_m 1/(q;q)_m`, via the antidominant form.
pub fn norm_a_q_alt_exponents(lambda: &Composition) -> Vec<u32> {
    let lm = lambda.antidominant();
    let l = lm.parts();
    let vinv = lambda.sorting_permutation().inverse();
    let mut out = vec![l[0]];
    for j in 0..l.len() - 1 {
        let k = l[j + 1] - l[j];
        let negative = vinv.apply(j) > vinv.apply(j + 1);
        out.push(if negative { k - 1 } else { k });
    }
    out
}

/// `a_lambda(q)` from the antidominant form and the minimal sorting permutation.
pub fn norm_a_q_alt(lambda: &Composition, cap: u32) -> QSeries {
    let mut den = QPoly::one();
    for m in norm_a_q_alt_exponents(lambda) {
        den = &den * &q_pochhammer(m);
    }
    QSeries::from_qpoly(&den, Some(cap)).inverse().expect("constant term 1")
}

/// Rogers–Szegő polynomial `r_m(X, q) = sum_a [m, a]_q X^{m - 2a}`, as `(exponent, coefficient)` pairs.
pub fn rogers_szego(m: u32) -> BTreeMap<i64, QPoly> {
    let mut out = BTreeMap::new();
    for a in 0..=m {
        out.insert(m as i64 - 2 * a as i64, crate::exact::q_binomial(m, a));
    }
    out
}

/// Closed forms for `sl_2` at weight `lambda`: `E(X; q, 0)`, `E(Y; q^-1, inf)` as
/// `X`-exponent maps, and `k` with `a_lambda(q) = 1/(q)_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sl2ClosedForms {
    pub e_t0: BTreeMap<i64, QPoly>,
    pub e_qinv_tinf: BTreeMap<i64, QPoly>,
    pub norm_pochhammer: u32,
}

pub fn sl2_closed_forms(lambda: i64) -> Sl2ClosedForms {
    let mut e_t0 = BTreeMap::new();
    let mut e_qinv_tinf = BTreeMap::new();
    if lambda <= 0 {
        let m = (-lambda) as u32;
        e_t0 = rogers_szego(m);
        for a in 0..=m {
            let c = crate::exact::q_binomial(m, a).shift(a as usize);
            e_qinv_tinf.insert(2 * a as i64 - m as i64, c);
        }
        Sl2ClosedForms { e_t0, e_qinv_tinf, norm_pochhammer: m }
    } else {
        let m = (lambda - 1) as u32;
        for a in 0..=m {
            let c = crate::exact::q_binomial(m, a).shift(a as usize);
            e_t0.insert(1 + m as i64 - 2 * a as i64, c);
        }
        for (e, c) in rogers_szego(m) {
            e_qinv_tinf.insert(e + 1, c);
        }
        Sl2ClosedForms { e_t0, e_qinv_tinf, norm_pochhammer: m }
    }
}

/// Sum of coefficients over each `sl_n` class: `x^a -> X^{(a_j - a_{j+1})_j}`.
pub fn restrict_to_sl(terms: &BTreeMap<Vec<u32>, QPoly>) -> BTreeMap<Vec<i64>, QPoly> {
    let mut out: BTreeMap<Vec<i64>, QPoly> = BTreeMap::new();
    for (e, c) in terms {
        let k = Composition(e.clone()).restrict().0;
        let v = out.entry(k).or_default();
        *v = &*v + c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}
