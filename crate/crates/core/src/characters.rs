//! Characters of the modules attached to a weight, read off the Macdonald side.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::affine::{self, AffineError, HwMode, ReducedWord, WeightData, WordKind};
use crate::exact::{QPoly, QSeries};
use crate::macdonald::{e_specialized, restrict_to_sl, MacdonaldError, Specialization};
use crate::series::{
    full_product, inverse_pochhammer_series, pochhammer_series, xy, Monomial, SeriesError,
    TruncatedSeries, TruncationPolicy, VarSet,
};
use crate::weights::{Composition, SlWeight};

#[derive(Debug, Error)]
pub enum CharacterError {
    #[error(transparent)]
    Macdonald(#[from] MacdonaldError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error("coefficients are not polynomials in q")]
    NotPolynomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CharKind {
    D,
    Uo,
    T,
    AD,
    AU,
}

impl CharKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "D" => CharKind::D,
            "Uo" => CharKind::Uo,
            "T" => CharKind::T,
            "A-D" => CharKind::AD,
            "A-U" => CharKind::AU,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CharKind::D => "D",
            CharKind::Uo => "Uo",
            CharKind::T => "T",
            CharKind::AD => "A-D",
            CharKind::AU => "A-U",
        }
    }
}

/// A weight given as a `gl_n` composition or an `sl_n` weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Weight {
    Gl(Composition),
    Sl(SlWeight),
}

impl Weight {
    pub fn n(&self) -> usize {
        match self {
            Weight::Gl(c) => c.n(),
            Weight::Sl(w) => w.rank(),
        }
    }

    fn representative(&self) -> Composition {
        match self {
            Weight::Gl(c) => c.clone(),
            Weight::Sl(w) => w.representative(),
        }
    }

    fn vars(&self) -> VarSet {
        match self {
            Weight::Gl(c) => VarSet::gl(c.n()),
            Weight::Sl(w) => VarSet::sl(w.rank()),
        }
    }
}

/// Character as a truncated series with `q`-series coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BimoduleCharacter {
    pub series: TruncatedSeries<QSeries>,
}

impl BimoduleCharacter {
    /// Every coefficient is a nonnegative integer.
    pub fn is_positive(&self) -> bool {
        self.series.terms().values().all(|c| c.is_nonneg_integral())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Block {
    X,
    Y,
}

fn polynomial_series(
    vars: VarSet,
    policy: TruncationPolicy,
    terms: BTreeMap<Vec<i64>, QPoly>,
    block: Block,
) -> Result<TruncatedSeries<QSeries>, SeriesError> {
    let zero = vec![0; vars.block_len()];
    TruncatedSeries::from_terms(
        vars,
        policy,
        terms.into_iter().map(|(e, c)| {
            let m = match block {
                Block::X => Monomial::new(e, zero.clone()),
                Block::Y => Monomial::new(zero.clone(), e),
            };
            (m, QSeries::from_qpoly(&c, policy.max_q_degree))
        }),
    )
}

fn e_series(weight: &Weight, spec: Specialization, policy: TruncationPolicy, block: Block) -> Result<TruncatedSeries<QSeries>, CharacterError> {
    let rep = weight.representative();
    let terms = e_specialized(&rep, spec)?.qpoly_terms().map_err(|_| CharacterError::NotPolynomial)?;
    let terms = match weight {
        Weight::Gl(_) => terms.into_iter().map(|(e, c)| (e.into_iter().map(i64::from).collect(), c)).collect(),
        Weight::Sl(_) => restrict_to_sl(&terms),
    };
    Ok(polynomial_series(weight.vars(), policy, terms, block)?)
}

fn algebra_char(weight: &Weight, kind: WordKind) -> Result<affine::HwAlgebraChar, AffineError> {
    match weight {
        Weight::Gl(c) => affine::hw_algebra_char_gl(c, kind),
        Weight::Sl(w) => affine::hw_algebra_char_sl(w, kind),
    }
}

fn constant(weight: &Weight, policy: TruncationPolicy, c: QSeries) -> TruncatedSeries<QSeries> {
    let vars = weight.vars();
    TruncatedSeries::monomial(vars, policy, Monomial::one(&vars), c).expect("unit monomial")
}

/// `D`: `E(X; q, 0)`. `Uo`: `E(Y; q^-1, inf)`. `A-D`, `A-U`: highest weight algebras
/// (with `1/(q)_{lambda_min}` for `gl_n`). `T`: `A-D * D * Uo`.
pub fn char_module(kind: CharKind, weight: &Weight, policy: TruncationPolicy) -> Result<BimoduleCharacter, CharacterError> {
    let cap = policy.max_q_degree.unwrap_or(0);
    let series = match kind {
        CharKind::D => e_series(weight, Specialization::T0, policy, Block::X)?,
        CharKind::Uo => e_series(weight, Specialization::QinvTinf, policy, Block::Y)?,
        CharKind::AD => constant(weight, policy, algebra_char(weight, WordKind::D)?.to_qseries(cap)),
        CharKind::AU => constant(weight, policy, algebra_char(weight, WordKind::U)?.to_qseries(cap)),
        CharKind::T => {
            let a = char_module(CharKind::AD, weight, policy)?.series;
            let d = char_module(CharKind::D, weight, policy)?.series;
            let u = char_module(CharKind::Uo, weight, policy)?.series;
            a.mul(&d)?.mul(&u)?
        }
    };
    Ok(BimoduleCharacter { series })
}

/// `(x_1..x_n y_1..y_n; q)_inf prod_{i<=j} 1/(x_i y_j; q)_inf prod_{i>j} 1/(q x_i y_j; q)_inf`.
pub fn ch_iwahori_functions(n: usize, policy: TruncationPolicy) -> Result<BimoduleCharacter, CharacterError> {
    let vars = VarSet::gl(n);
    let cap = policy.max_q_degree;
    let mut acc = pochhammer_series(vars, policy, &QSeries::one(), &full_product(n), None)?;
    for i in 0..n {
        for j in 0..n {
            let c = if i <= j { QSeries::one() } else { QSeries::q_power(1, cap) };
            acc = acc.mul(&inverse_pochhammer_series(vars, policy, &c, &xy(n, i, j))?)?;
        }
    }
    Ok(BimoduleCharacter { series: acc })
}

/// Outcome of comparing the highest weight algebra degrees from the coroot counts with
/// those of `(q)_{lambda_- + omega(m)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylRatioCheck {
    pub from_counts: Vec<u32>,
    pub from_omega: Vec<u32>,
}

impl WeylRatioCheck {
    pub fn passed(&self) -> bool {
        self.from_counts == self.from_omega
    }
}

pub fn ch_weyl_ratio_check(data: &WeightData, m: usize, w: &ReducedWord) -> Result<WeylRatioCheck, CharacterError> {
    let counts = affine::hw_algebra_char(data, &HwMode::AtM(m, w.clone()))?;
    let neg = data.neg_pairings();
    // count -beta_bar_i = alpha_j directly, independent of omega
    let betas = affine::beta_sequence(w);
    let mut direct = neg.clone();
    for b in &betas[..m] {
        if let Some(j) = b.negative_simple() {
            direct[j - 1] -= 1;
        }
    }
    let mut from_counts: Vec<u32> = direct.iter().flat_map(|&c| 1..=c.max(0) as u32).collect();
    from_counts.sort_unstable();
    debug_assert_eq!(from_counts, counts.generator_degrees);
    let from_omega = affine::weyl_ratio_degrees(data, w, m).generator_degrees;
    Ok(WeylRatioCheck { from_counts, from_omega })
}
