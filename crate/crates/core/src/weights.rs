//! Compositions, `sl_n` weights, finite permutations and the Macdonald partial order.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("expected a weight of length {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("cell ({0}, {1}) is not in the diagram")]
    NotInDiagram(usize, usize),
}

/// A `gl_n` weight with nonnegative entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Composition(pub Vec<u32>);

impl Composition {
    pub fn new(parts: Vec<u32>) -> Self {
        Composition(parts)
    }

    pub fn zero(n: usize) -> Self {
        Composition(vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn min_part(&self) -> u32 {
        self.0.iter().copied().min().unwrap_or(0)
    }

    /// Some coordinate is zero.
    pub fn has_zero(&self) -> bool {
        self.0.contains(&0)
    }

    /// Weakly increasing rearrangement.
    pub fn antidominant(&self) -> Composition {
        let mut v = self.0.clone();
        v.sort_unstable();
        Composition(v)
    }

    pub fn is_antidominant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_dominant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Minimal-length `v` with `v . lambda` weakly increasing.
    pub fn sorting_permutation(&self) -> Permutation {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by_key(|&i| self.0[i]);
        // idx[r] = position holding the r-th smallest entry; v sends that position to r
        let mut p = vec![0; self.n()];
        for (r, &i) in idx.iter().enumerate() {
            p[i] = r;
        }
        Permutation(p)
    }

    /// Cells `(i, j)` with `1 <= j <= lambda_i`, columns in order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for (i, &l) in self.0.iter().enumerate() {
            for j in 1..=l as usize {
                out.push(Cell { col: i + 1, row: j });
            }
        }
        out
    }

    /// Arm and leg of a cell of the column diagram.
    pub fn arm_leg(&self, cell: Cell) -> Result<(u32, u32), WeightError> {
        let (i, j) = (cell.col, cell.row as u32);
        if i == 0 || i > self.n() || j == 0 || j > self.0[i - 1] {
            return Err(WeightError::NotInDiagram(cell.col, cell.row));
        }
        let li = self.0[i - 1];
        let leg = li - j;
        let mut arm = 0;
        for (k, &lk) in self.0.iter().enumerate() {
            let k = k + 1;
            if (k < i && j <= lk && lk <= li) || (k > i && j <= lk + 1 && lk < li) {
                arm += 1;
            }
        }
        Ok((arm, leg))
    }

    /// Restriction to `sl_n`: coordinates on fundamental weights.
    pub fn restrict(&self) -> SlWeight {
        SlWeight(self.0.windows(2).map(|w| w[0] as i64 - w[1] as i64).collect())
    }

    pub fn add_ones(&self, m: u32) -> Composition {
        Composition(self.0.iter().map(|x| x + m).collect())
    }

    /// Componentwise `lambda - min(lambda)`.
    pub fn strip_ones(&self) -> (Composition, u32) {
        let m = self.min_part();
        (Composition(self.0.iter().map(|x| x - m).collect()), m)
    }

    pub fn act(&self, w: &Permutation) -> Composition {
        Composition(w.act(&self.0))
    }

    pub fn swap(&self, i: usize) -> Composition {
        let mut v = self.0.clone();
        v.swap(i, i + 1);
        Composition(v)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// A box of a column diagram: column `col` (1-based), row `row` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

/// An `sl_n` weight in fundamental-weight coordinates (length `n - 1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlWeight(pub Vec<i64>);

impl SlWeight {
    pub fn rank(&self) -> usize {
        self.0.len() + 1
    }

    /// Unique representative in `(Z>=0)^n` with some zero coordinate.
    pub fn representative(&self) -> Composition {
        let n = self.rank();
        let mut v = vec![0i64; n];
        for j in (0..n - 1).rev() {
            v[j] = v[j + 1] + self.0[j];
        }
        let m = *v.iter().min().unwrap();
        Composition(v.into_iter().map(|x| (x - m) as u32).collect())
    }

    /// Weakly increasing `gl_n` representative with first entry 0.
    pub fn antidominant_rep(&self) -> Composition {
        self.representative().antidominant()
    }

    pub fn is_antidominant(&self) -> bool {
        self.0.iter().all(|&a| a <= 0)
    }

    pub fn neg(&self) -> SlWeight {
        SlWeight(self.0.iter().map(|x| -x).collect())
    }
}

impl fmt::Display for SlWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", s.join(","))
    }
}

/// Permutation of `{0, .., n-1}` in one-line notation: `w(i) = self.0[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Longest element `i -> n - 1 - i`.
    pub fn longest(n: usize) -> Self {
        Permutation((0..n).rev().collect())
    }

    /// Simple transposition swapping `j - 1` and `j` (letter `j` in `1..n`).
    pub fn simple(n: usize, j: usize) -> Self {
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(j - 1, j);
        Permutation(p)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `(self * other)(i) = self(other(i))`
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut p = vec![0; self.n()];
        for (i, &w) in self.0.iter().enumerate() {
            p[w] = i;
        }
        Permutation(p)
    }

    pub fn length(&self) -> usize {
        let mut l = 0;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                if self.0[i] > self.0[j] {
                    l += 1;
                }
            }
        }
        l
    }

    /// `(w . v)_{w(i)} = v_i`
    pub fn act<T: Clone>(&self, v: &[T]) -> Vec<T> {
        let mut out = v.to_vec();
        for (i, x) in v.iter().enumerate() {
            out[self.0[i]] = x.clone();
        }
        out
    }

    /// `l(s_j w) < l(w)`, letter `j` in `1..n`.
    pub fn is_left_descent(&self, j: usize) -> bool {
        let inv = self.inverse();
        inv.0[j - 1] > inv.0[j]
    }

    /// `l(w s_j) < l(w)`
    pub fn is_right_descent(&self, j: usize) -> bool {
        self.0[j - 1] > self.0[j]
    }

    /// Lexicographically smallest reduced word (letters `1..n-1`), `w = s_{a_1} ... s_{a_l}`.
    pub fn reduced_word(&self) -> Vec<usize> {
        let mut w = self.clone();
        let mut out = Vec::new();
        'outer: loop {
            for j in 1..w.n() {
                if w.is_left_descent(j) {
                    out.push(j);
                    w = Permutation::simple(w.n(), j).compose(&w);
                    continue 'outer;
                }
            }
            break;
        }
        out
    }

    pub fn from_word(n: usize, word: &[usize]) -> Permutation {
        word.iter().fold(Permutation::identity(n), |acc, &j| acc.compose(&Permutation::simple(n, j)))
    }

    /// Bruhat order via the subword property of a fixed reduced word of `other`.
    pub fn bruhat_leq(&self, other: &Permutation) -> bool {
        let lu = self.length();
        let word = other.reduced_word();
        if lu > word.len() {
            return false;
        }
        if lu == word.len() {
            return self == other;
        }
        fn search(word: &[usize], start: usize, cur: &Permutation, remaining: usize, target: &Permutation) -> bool {
            if remaining == 0 {
                return cur == target;
            }
            for k in start..word.len() {
                if word.len() - k < remaining {
                    break;
                }
                let next = cur.compose(&Permutation::simple(cur.n(), word[k]));
                if next.length() == cur.length() + 1 && search(word, k + 1, &next, remaining - 1, target) {
                    return true;
                }
            }
            false
        }
        search(&word, 0, &Permutation::identity(self.n()), lu, self)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|x| (x + 1).to_string()).collect();
        write!(f, "[{}]", s.join(" "))
    }
}

/// `mu - lambda` lies in the positive root cone (partial sums nonnegative, total zero).
pub fn in_positive_cone(diff: &[i64]) -> bool {
    let mut s = 0i64;
    for &d in diff {
        s += d;
        if s < 0 {
            return false;
        }
    }
    s == 0
}

/// The partial order `lambda >= mu` on compositions of equal length.
pub fn order_geq(lambda: &Composition, mu: &Composition) -> bool {
    let l = lambda.antidominant();
    let m = mu.antidominant();
    if l == m {
        return lambda.sorting_permutation().bruhat_leq(&mu.sorting_permutation());
    }
    let diff: Vec<i64> = m.0.iter().zip(&l.0).map(|(a, b)| *a as i64 - *b as i64).collect();
    in_positive_cone(&diff)
}

/// A total order refining `order_geq` (greater first sorts last).
pub fn linear_extension_key(lambda: &Composition) -> (Vec<i64>, usize) {
    let l = lambda.antidominant();
    let mut s = 0i64;
    let partial: Vec<i64> = l.0.iter().map(|&x| {
        s += x as i64;
        -s
    }).collect();
    (partial, usize::MAX - lambda.sorting_permutation().length())
}

pub fn compare_linear(a: &Composition, b: &Composition) -> Ordering {
    linear_extension_key(a).cmp(&linear_extension_key(b))
}

/// All compositions of `size` into `n` parts, lexicographically decreasing.
pub fn compositions(n: usize, size: u32) -> Vec<Composition> {
    fn rec(n: usize, size: u32, prefix: &mut Vec<u32>, out: &mut Vec<Composition>) {
        if n == 1 {
            prefix.push(size);
            out.push(Composition(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in (0..=size).rev() {
            prefix.push(a);
            rec(n - 1, size - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, size, &mut Vec::new(), &mut out);
    out
}

/// All compositions with `|lambda| <= max_size`.
pub fn compositions_up_to(n: usize, max_size: u32) -> Vec<Composition> {
    (0..=max_size).flat_map(|d| compositions(n, d)).collect()
}

/// Permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Permutation>) {
        let n = used.len();
        if cur.len() == n {
            out.push(Permutation(cur.clone()));
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}
