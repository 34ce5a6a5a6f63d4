//! Extended affine Weyl group of type A as affine permutations.
//!
//! An affine permutation is a bijection `f` of `Z` with `f(i + n) = f(i) + n`, stored by its
//! window `f(1), .., f(n)`. The translation `t_mu` is `i -> i + n mu_i`, the length-zero
//! generator `pi` is `i -> i + 1`, `s_j` swaps the classes of `j` and `j + 1` (`s_0` swaps `0`
//! and `1`). The pair `(a, b)` of integers with `a != b mod n` encodes the affine root
//! `e_{a mod n} - e_{b mod n} + k delta`, `k = ((b - b mod n) - (a - a mod n)) / n`, residues
//! taken in `1..=n`; an affine permutation acts on roots through pairs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::QSeries;
use crate::weights::{Composition, Permutation, SlWeight};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AffineError {
    #[error("weight {0:?} is not antidominant")]
    NotAntidominant(Vec<i64>),
    #[error("rank must be at least 2")]
    RankTooSmall,
    #[error("factorization is not reduced")]
    NotReduced,
    #[error("m = {0} exceeds word length {1}")]
    OutOfRange(usize, usize),
    #[error("sigma is not maximal in its stabilizer coset")]
    NotMaximal,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffinePerm {
    window: Vec<i64>,
}

fn residue(i: i64, n: i64) -> (i64, i64) {
    // i = r + k n with r in 1..=n
    let k = (i - 1).div_euclid(n);
    (i - k * n, k)
}

impl AffinePerm {
    pub fn from_window(window: Vec<i64>) -> Self {
        AffinePerm { window }
    }

    pub fn identity(n: usize) -> Self {
        AffinePerm { window: (1..=n as i64).collect() }
    }

    pub fn pi(n: usize, k: i64) -> Self {
        AffinePerm { window: (1..=n as i64).map(|i| i + k).collect() }
    }

    /// `s_j`, `j in 0..n`.
    pub fn simple(n: usize, j: usize) -> Self {
        let mut w: Vec<i64> = (1..=n as i64).collect();
        if j == 0 {
            w[0] = 0;
            w[n - 1] = n as i64 + 1;
        } else {
            w.swap(j - 1, j);
        }
        AffinePerm { window: w }
    }

    pub fn translation(mu: &[i64]) -> Self {
        let n = mu.len() as i64;
        AffinePerm { window: mu.iter().enumerate().map(|(i, m)| i as i64 + 1 + n * m).collect() }
    }

    pub fn finite(w: &Permutation) -> Self {
        AffinePerm { window: w.0.iter().map(|&i| i as i64 + 1).collect() }
    }

    pub fn n(&self) -> usize {
        self.window.len()
    }

    pub fn window(&self) -> &[i64] {
        &self.window
    }

    pub fn apply(&self, i: i64) -> i64 {
        let n = self.n() as i64;
        let (r, k) = residue(i, n);
        self.window[(r - 1) as usize] + k * n
    }

    /// `(self o other)(i) = self(other(i))`
    pub fn compose(&self, other: &AffinePerm) -> AffinePerm {
        AffinePerm { window: other.window.iter().map(|&i| self.apply(i)).collect() }
    }

    pub fn inverse(&self) -> AffinePerm {
        let n = self.n() as i64;
        let mut w = vec![0; self.n()];
        for (i, &v) in self.window.iter().enumerate() {
            let (r, k) = residue(v, n);
            w[(r - 1) as usize] = i as i64 + 1 - k * n;
        }
        AffinePerm { window: w }
    }

    /// `sum_i (f(i) - i) / n`: the power of `pi` in `f`.
    pub fn shift(&self) -> i64 {
        let n = self.n() as i64;
        self.window.iter().enumerate().map(|(i, v)| v - i as i64 - 1).sum::<i64>() / n
    }

    /// Number of positive affine roots sent to negative roots.
    pub fn length(&self) -> usize {
        let n = self.n() as i64;
        let mut l = 0i64;
        for a in 1..=n {
            for r in 1..=n {
                if r == a {
                    continue;
                }
                let kmin = if r > a { 0 } else { 1 };
                let d = self.apply(a) - self.apply(r);
                // count k >= kmin with f(r) + k n < f(a)
                let kmax = (d + n - 1).div_euclid(n) - 1;
                if kmax >= kmin {
                    l += kmax - kmin + 1;
                }
            }
        }
        l as usize
    }

    /// `l(s_j f) < l(f)`
    pub fn is_left_descent(&self, j: usize) -> bool {
        let inv = self.inverse();
        let (a, b) = if j == 0 { (0, 1) } else { (j as i64, j as i64 + 1) };
        inv.apply(a) > inv.apply(b)
    }

    /// Equal up to a power of `pi^n` (a central translation).
    pub fn eq_mod_center(&self, o: &AffinePerm) -> bool {
        let n = self.n() as i64;
        let d = self.window[0] - o.window[0];
        d.rem_euclid(n) == 0 && self.window.iter().zip(&o.window).all(|(a, b)| a - b == d)
    }
}

/// `pi^pi s_{l_1} ... s_{l_k}`; for `sl_n` words `pi` is read modulo `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedWord {
    pub n: usize,
    pub pi: i64,
    pub letters: Vec<usize>,
}

impl ReducedWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn evaluate(&self) -> AffinePerm {
        self.letters
            .iter()
            .fold(AffinePerm::pi(self.n, self.pi), |acc, &j| acc.compose(&AffinePerm::simple(self.n, j)))
    }

    pub fn is_reduced(&self) -> bool {
        self.evaluate().length() == self.len()
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pi^{}", self.pi)?;
        for j in &self.letters {
            write!(f, " s{j}")?;
        }
        Ok(())
    }
}

/// Canonical word: `pi^k` times the greedy smallest-left-descent word of `pi^{-k} f`.
pub fn canonical_word(f: &AffinePerm) -> ReducedWord {
    let n = f.n();
    let k = f.shift();
    let mut u = AffinePerm::pi(n, -k).compose(f);
    let mut letters = Vec::new();
    while u.length() > 0 {
        let j = (0..n).find(|&j| u.is_left_descent(j)).expect("nontrivial element has a descent");
        letters.push(j);
        u = AffinePerm::simple(n, j).compose(&u);
    }
    ReducedWord { n, pi: k, letters }
}

fn check_rank(n: usize) -> Result<(), AffineError> {
    if n < 2 {
        Err(AffineError::RankTooSmall)
    } else {
        Ok(())
    }
}

/// Reduced word for `t_mu`, `mu` weakly increasing.
pub fn translation_reduced_word(mu: &[i64]) -> Result<ReducedWord, AffineError> {
    check_rank(mu.len())?;
    if mu.windows(2).any(|w| w[0] > w[1]) {
        return Err(AffineError::NotAntidominant(mu.to_vec()));
    }
    let mut w = canonical_word(&AffinePerm::translation(mu));
    w.pi = w.pi.rem_euclid(mu.len() as i64);
    Ok(w)
}

/// `beta_bar + degree delta`, `finite_part` in `e`-coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineCoroot {
    pub finite_part: Vec<i64>,
    pub degree: i64,
}

impl AffineCoroot {
    fn from_pair(n: usize, a: i64, b: i64) -> Self {
        let nn = n as i64;
        let (ra, ka) = residue(a, nn);
        let (rb, kb) = residue(b, nn);
        let mut finite_part = vec![0; n];
        finite_part[(ra - 1) as usize] += 1;
        finite_part[(rb - 1) as usize] -= 1;
        AffineCoroot { finite_part, degree: kb - ka }
    }

    /// `e_i - e_j` with `i < j` when the finite part is minus a positive root.
    pub fn negative_of(&self) -> Option<(usize, usize)> {
        let i = self.finite_part.iter().position(|&x| x == -1)?;
        let j = self.finite_part.iter().position(|&x| x == 1)?;
        (i < j).then_some((i, j))
    }

    /// Index `j` (1-based) when the finite part is `-alpha_j`.
    pub fn negative_simple(&self) -> Option<usize> {
        self.negative_of().and_then(|(i, j)| (j == i + 1).then_some(i + 1))
    }
}

fn simple_pair(j: usize) -> (i64, i64) {
    if j == 0 {
        (0, 1)
    } else {
        (j as i64, j as i64 + 1)
    }
}

/// `beta_l = alpha_{j_l}`, `beta_{l-1} = s_{j_l} alpha_{j_{l-1}}`, ...
pub fn beta_sequence(w: &ReducedWord) -> Vec<AffineCoroot> {
    let n = w.n;
    let l = w.len();
    let mut out = vec![None; l];
    let mut tail = AffinePerm::identity(n);
    for k in (0..l).rev() {
        let (a, b) = simple_pair(w.letters[k]);
        out[k] = Some(AffineCoroot::from_pair(n, tail.apply(a), tail.apply(b)));
        tail = tail.compose(&AffinePerm::simple(n, w.letters[k]));
    }
    out.into_iter().map(|x| x.expect("filled")).collect()
}

/// Weight data `lambda = sigma(lambda_-)`. `sigma` is maximal in `sigma stab(lambda_-)`,
/// `sigma_min` minimal; the `D` side is read off `sigma_min`, the `U` side off `sigma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightData {
    pub lambda: Vec<i64>,
    pub antidominant: Vec<i64>,
    pub sigma: Permutation,
    pub sigma_min: Permutation,
}

impl WeightData {
    pub fn new(lambda: &[i64]) -> Self {
        let n = lambda.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by_key(|&i| lambda[i]);
        let anti: Vec<i64> = idx.iter().map(|&i| lambda[i]).collect();
        // minimal sigma: position r of lambda_- goes to idx[r]
        let sigma_min = Permutation(idx.clone());
        let mut wj: Vec<usize> = (0..n).collect();
        let mut s = 0;
        while s < n {
            let mut e = s;
            while e + 1 < n && anti[e + 1] == anti[s] {
                e += 1;
            }
            wj[s..=e].reverse();
            s = e + 1;
        }
        let sigma = sigma_min.compose(&Permutation(wj));
        WeightData { lambda: lambda.to_vec(), antidominant: anti, sigma, sigma_min }
    }

    pub fn from_sl(w: &SlWeight) -> Self {
        let rep = w.representative();
        Self::new(&rep.parts().iter().map(|&x| x as i64).collect::<Vec<_>>())
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// `-<lambda_-, alpha_j>` for `j = 1..n-1`.
    pub fn neg_pairings(&self) -> Vec<i64> {
        self.antidominant.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `delta_{j, sigma} = 1` iff `sigma(alpha_j) > 0`.
    pub fn delta(&self, j: usize) -> bool {
        self.sigma.0[j - 1] < self.sigma.0[j]
    }

    /// `delta_{j, sigma_min}`.
    pub fn delta_min(&self, j: usize) -> bool {
        self.sigma_min.0[j - 1] < self.sigma_min.0[j]
    }

    /// True iff `sigma` and `sigma_min` are the longest and shortest elements of one coset.
    pub fn sigma_is_maximal(&self) -> bool {
        let maps = |s: &Permutation| (0..self.n()).all(|i| self.lambda[s.0[i]] == self.antidominant[i]);
        let tied = |j: usize| self.antidominant[j - 1] == self.antidominant[j];
        maps(&self.sigma)
            && maps(&self.sigma_min)
            && (1..self.n()).all(|j| !tied(j) || (!self.delta(j) && self.delta_min(j)))
    }

    /// Prefix length of the word of `kind`.
    pub fn prefix_len(&self, kind: WordKind) -> usize {
        match kind {
            WordKind::D => self.sigma_min.length(),
            WordKind::U => Permutation::longest(self.n()).length() - self.sigma.length(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WordKind {
    /// prefix `sigma^{-1} w_0`
    U,
    /// prefix `sigma_min^{-1}`
    D,
}

/// Reduced word for `t_{lambda_-}` whose first letters spell the prefix (conjugated past `pi`),
/// together with the prefix length.
pub fn factorized_word(data: &WeightData, kind: WordKind) -> Result<(ReducedWord, usize), AffineError> {
    let n = data.n();
    check_rank(n)?;
    if !data.sigma_is_maximal() {
        return Err(AffineError::NotMaximal);
    }
    let prefix = match kind {
        WordKind::D => data.sigma_min.inverse(),
        WordKind::U => data.sigma.inverse().compose(&Permutation::longest(n)),
    };
    let t = AffinePerm::translation(&data.antidominant);
    let rest = AffinePerm::finite(&prefix.inverse()).compose(&t);
    if rest.length() + prefix.length() != t.length() {
        return Err(AffineError::NotReduced);
    }
    let tail = canonical_word(&rest);
    let k = tail.pi;
    let nn = n as i64;
    let mut letters: Vec<usize> =
        prefix.reduced_word().iter().map(|&a| (a as i64 - k).rem_euclid(nn) as usize).collect();
    let plen = letters.len();
    letters.extend(tail.letters);
    let word = ReducedWord { n, pi: k, letters };
    if !word.evaluate().eq_mod_center(&t) || !word.is_reduced() {
        return Err(AffineError::NotReduced);
    }
    Ok((ReducedWord { pi: k.rem_euclid(nn), ..word }, plen))
}

/// `l_{alpha, m} = -<lambda_-, alpha> - #{j <= m : beta_bar_j = -alpha}` for `alpha = e_i - e_j`, `i < j` (0-based).
pub fn char_l(antidominant: &[i64], w: &ReducedWord, alpha: (usize, usize), m: usize) -> Result<i64, AffineError> {
    if m > w.len() {
        return Err(AffineError::OutOfRange(m, w.len()));
    }
    let (i, j) = alpha;
    let count = beta_sequence(w)[..m].iter().filter(|b| b.negative_of() == Some((i, j))).count() as i64;
    Ok(antidominant[j] - antidominant[i] - count)
}

/// `omega(m)` in fundamental-weight coordinates.
pub fn omega(w: &ReducedWord, m: usize) -> Vec<i64> {
    let mut out = vec![0; w.n - 1];
    for b in &beta_sequence(w)[..m] {
        if let Some(j) = b.negative_simple() {
            out[j - 1] += 1;
        }
    }
    out
}

/// Free polynomial algebra with generators in the listed degrees.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HwAlgebraChar {
    pub generator_degrees: Vec<u32>,
}

impl HwAlgebraChar {
    fn from_counts(counts: &[i64]) -> Self {
        let mut d: Vec<u32> = counts.iter().flat_map(|&c| 1..=c.max(0) as u32).collect();
        d.sort_unstable();
        HwAlgebraChar { generator_degrees: d }
    }

    /// `prod 1/(1 - q^d)` modulo `q^{cap+1}`.
    pub fn to_qseries(&self, cap: u32) -> QSeries {
        let mut acc = QSeries::one().with_cap(Some(cap));
        for &d in &self.generator_degrees {
            let mut geo = vec![0i64; cap as usize + 1];
            for k in (0..=cap as usize).step_by(d as usize) {
                geo[k] = 1;
            }
            acc = &acc * &QSeries::from_ints(&geo, Some(cap));
        }
        acc
    }

    /// Extra generators `1..m` of the `gl_n` lift.
    pub fn with_gl_factor(&self, m: u32) -> Self {
        let mut d = self.generator_degrees.clone();
        d.extend(1..=m);
        d.sort_unstable();
        HwAlgebraChar { generator_degrees: d }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HwMode {
    D,
    U,
    /// Counts from the first `m` coroots of the given word.
    AtM(usize, ReducedWord),
}

/// Generator degrees of the highest weight algebra at `lambda = sigma(lambda_-)`.
pub fn hw_algebra_char(data: &WeightData, mode: &HwMode) -> Result<HwAlgebraChar, AffineError> {
    if !data.sigma_is_maximal() {
        return Err(AffineError::NotMaximal);
    }
    let neg = data.neg_pairings();
    let counts: Vec<i64> = match mode {
        HwMode::D => (1..data.n()).map(|j| neg[j - 1] - 1 + data.delta_min(j) as i64).collect(),
        HwMode::U => (1..data.n()).map(|j| neg[j - 1] - data.delta(j) as i64).collect(),
        HwMode::AtM(m, w) => {
            if *m > w.len() {
                return Err(AffineError::OutOfRange(*m, w.len()));
            }
            let om = omega(w, *m);
            neg.iter().zip(&om).map(|(a, b)| a - b).collect()
        }
    };
    Ok(HwAlgebraChar::from_counts(&counts))
}

/// `A^D` of an `sl_n` weight.
pub fn hw_algebra_char_sl(w: &SlWeight, kind: WordKind) -> Result<HwAlgebraChar, AffineError> {
    let mode = match kind {
        WordKind::D => HwMode::D,
        WordKind::U => HwMode::U,
    };
    hw_algebra_char(&WeightData::from_sl(w), &mode)
}

/// `gl_n` lift: the `sl_n` algebra of the restriction times `1/(q)_{lambda_min}`.
pub fn hw_algebra_char_gl(lambda: &Composition, kind: WordKind) -> Result<HwAlgebraChar, AffineError> {
    Ok(hw_algebra_char_sl(&lambda.restrict(), kind)?.with_gl_factor(lambda.min_part()))
}

/// `1/(q)_{lambda_- + omega(m)}` read as `prod_j 1/(q)_{-<lambda_- + omega(m), alpha_j>}`.
pub fn weyl_ratio_degrees(data: &WeightData, w: &ReducedWord, m: usize) -> HwAlgebraChar {
    let om = omega(w, m);
    let counts: Vec<i64> = data.neg_pairings().iter().zip(&om).map(|(a, b)| a - b).collect();
    HwAlgebraChar::from_counts(&counts)
}
