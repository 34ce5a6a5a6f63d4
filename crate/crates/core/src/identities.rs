//! Exact verification of the Cauchy-type identities under truncation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::affine::{hw_algebra_char_sl, AffineError, WordKind};
use crate::characters::{ch_iwahori_functions, CharacterError};
use crate::exact::{rat, ExactError, QPoly, QSeries, QTRational};
use crate::macdonald::{
    e_specialized, norm_a_q, norm_a_qt, restrict_to_sl, sl2_closed_forms, specialized_fillings, MacdonaldError,
    Specialization,
};
use crate::series::{
    full_product, geometric_series, inverse_pochhammer_series, pochhammer_series, q_binomial_series, xy, Monomial,
    Scalar, SeriesError, TruncatedSeries, TruncationPolicy, VarSet,
};
use crate::weights::{compositions_up_to, Composition, SlWeight};

#[derive(Debug, Error)]
pub enum IdentityError {
    #[error(transparent)]
    Macdonald(#[from] MacdonaldError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error("window exceeds certified bound: needs degree {needed}, series has {available}")]
    WindowExceedsBound { needed: u32, available: u32 },
    #[error("outside the cost cap: {0}")]
    CostCap(String),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdentityVariant {
    GlQt,
    GlT0,
    GlSlform,
    SlProjected,
    ClassicalQ0,
    IwahoriChar,
    Sl2Appendix,
}

impl IdentityVariant {
    pub const ALL: [IdentityVariant; 7] = [
        IdentityVariant::GlQt,
        IdentityVariant::GlT0,
        IdentityVariant::GlSlform,
        IdentityVariant::SlProjected,
        IdentityVariant::ClassicalQ0,
        IdentityVariant::IwahoriChar,
        IdentityVariant::Sl2Appendix,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            IdentityVariant::GlQt => "gl-qt",
            IdentityVariant::GlT0 => "gl-t0",
            IdentityVariant::GlSlform => "gl-slform",
            IdentityVariant::SlProjected => "sl",
            IdentityVariant::ClassicalQ0 => "classical-q0",
            IdentityVariant::IwahoriChar => "iwahori-char",
            IdentityVariant::Sl2Appendix => "sl2-appendix",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.tag() == s)
    }
}

impl fmt::Display for IdentityVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Pass,
    Fail { stage: String, monomial: Vec<i64>, lhs: Value, rhs: Value },
}

impl Outcome {
    pub fn passed(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    fn to_json(&self) -> Value {
        match self {
            Outcome::Pass => json!("pass"),
            Outcome::Fail { stage, monomial, lhs, rhs } => {
                json!({"fail": {"stage": stage, "monomial": monomial, "lhs": lhs, "rhs": rhs}})
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub variant: IdentityVariant,
    pub n: usize,
    pub policy: TruncationPolicy,
    pub outcome: Outcome,
    pub lambda_count: usize,
    pub elapsed: Duration,
    /// Extra facts (window size, certified degree), in insertion order.
    pub details: Vec<(String, Value)>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.outcome.passed()
    }

    /// Stable record; `elapsed` is left out so repeated runs are byte-identical.
    pub fn to_json(&self) -> Value {
        let details: serde_json::Map<String, Value> = self.details.iter().cloned().collect();
        json!({
            "variant": self.variant.tag(),
            "n": self.n,
            "policy": self.policy.to_json(),
            "outcome": self.outcome.to_json(),
            "lambda_count": self.lambda_count,
            "details": details,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "variant: {}\nn: {}\npolicy: {}\nlambda_count: {}\n",
            self.variant, self.n, self.policy, self.lambda_count
        );
        for (k, v) in &self.details {
            s += &format!("{k}: {v}\n");
        }
        match &self.outcome {
            Outcome::Pass => s += "outcome: pass\n",
            Outcome::Fail { stage, monomial, lhs, rhs } => {
                s += &format!("outcome: fail\nstage: {stage}\nmonomial: {monomial:?}\nlhs: {lhs}\nrhs: {rhs}\n");
            }
        }
        s
    }
}

/// Subtract and report the first nonzero term.
pub fn compare<S: Scalar>(lhs: &TruncatedSeries<S>, rhs: &TruncatedSeries<S>, stage: &str) -> Result<Outcome, IdentityError> {
    let diff = lhs.sub(rhs)?;
    Ok(match diff.terms().keys().next() {
        None => Outcome::Pass,
        Some(m) => Outcome::Fail {
            stage: stage.to_string(),
            monomial: m.exps(),
            lhs: lhs.coeff(m).to_json(),
            rhs: rhs.coeff(m).to_json(),
        },
    })
}

fn check_policy(variant: IdentityVariant, policy: &TruncationPolicy) -> Result<(), IdentityError> {
    let finite = policy.max_x_degree.is_some() && policy.max_y_degree.is_some();
    let needs_q = !matches!(variant, IdentityVariant::GlQt | IdentityVariant::ClassicalQ0);
    if !finite || (needs_q && policy.max_q_degree.is_none()) {
        return Err(IdentityError::Invalid(format!("{variant} needs finite degree caps")));
    }
    Ok(())
}

fn q(cap: Option<u32>) -> QSeries {
    QSeries::q_power(1, cap)
}

/// Left-hand side in `gl_n` letters with `q`-series coefficients.
pub fn lhs_series(variant: IdentityVariant, n: usize, policy: TruncationPolicy) -> Result<TruncatedSeries<QSeries>, IdentityError> {
    check_policy(variant, &policy)?;
    let vars = VarSet::gl(n);
    let cap = policy.max_q_degree;
    let one = QSeries::one();
    let mut acc = TruncatedSeries::one(vars, policy);
    match variant {
        IdentityVariant::ClassicalQ0 => {
            for i in 0..n {
                for j in i..n {
                    acc = acc.mul(&geometric_series(vars, policy, &one, &xy(n, i, j))?)?;
                }
            }
        }
        IdentityVariant::GlT0 | IdentityVariant::GlSlform => {
            if variant == IdentityVariant::GlSlform {
                acc = pochhammer_series(vars, policy, &one, &full_product(n), None)?;
            }
            for i in 0..n {
                for j in i..n {
                    acc = acc.mul(&geometric_series(vars, policy, &one, &xy(n, i, j))?)?;
                }
            }
            for i in 0..n {
                for j in 0..n {
                    acc = acc.mul(&inverse_pochhammer_series(vars, policy, &q(cap), &xy(n, i, j))?)?;
                }
            }
        }
        IdentityVariant::IwahoriChar => acc = ch_iwahori_functions(n, policy)?.series,
        _ => return Err(IdentityError::Invalid(format!("{variant} has no q-series left-hand side"))),
    }
    Ok(acc)
}

/// Left-hand side of the `(q, t)` identity with exact rational-function coefficients.
pub fn lhs_series_qt(n: usize, policy: TruncationPolicy) -> Result<TruncatedSeries<QTRational>, IdentityError> {
    check_policy(IdentityVariant::GlQt, &policy)?;
    let policy = TruncationPolicy { max_q_degree: None, ..policy };
    let vars = VarSet::gl(n);
    let one = QTRational::one();
    let t = QTRational::t();
    let mut acc = TruncatedSeries::one(vars, policy);
    for i in 0..n {
        for j in i..n {
            let m = xy(n, i, j);
            acc = acc.mul(&geometric_series(vars, policy, &one, &m)?)?;
            if i < j {
                let mut f = TruncatedSeries::one(vars, policy);
                f.add_term(m, t.neg())?;
                acc = acc.mul(&f)?;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            acc = acc.mul(&q_binomial_series(vars, policy, &t, &QTRational::q(), &xy(n, i, j))?)?;
        }
    }
    Ok(acc)
}

fn summand_series<S: Scalar>(
    vars: VarSet,
    policy: TruncationPolicy,
    coef: &S,
    ex: &[(Vec<u32>, S)],
    ey: &[(Vec<u32>, S)],
) -> Result<TruncatedSeries<S>, SeriesError> {
    let mut s = TruncatedSeries::zero(vars, policy);
    for (a, ca) in ex {
        let c = coef.mul(ca);
        for (b, cb) in ey {
            s.add_term(Monomial::from_gl(a, b), c.mul(cb))?;
        }
    }
    Ok(s)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, IdentityError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| IdentityError::Pool(e.to_string()))
}

/// Evaluate summands in parallel, then add them in the order given.
fn parallel_sum<S, F>(
    vars: VarSet,
    policy: TruncationPolicy,
    lambdas: &[Composition],
    jobs: usize,
    summand: F,
) -> Result<TruncatedSeries<S>, IdentityError>
where
    S: Scalar,
    F: Fn(&Composition) -> Result<TruncatedSeries<S>, IdentityError> + Sync + Send,
{
    let parts: Vec<Result<TruncatedSeries<S>, IdentityError>> =
        pool(jobs)?.install(|| lambdas.par_iter().map(&summand).collect());
    let mut acc = TruncatedSeries::zero(vars, policy);
    for p in parts {
        acc = acc.add(&p?)?;
    }
    Ok(acc)
}

fn qseries_terms(lambda: &Composition, spec: Specialization, cap: Option<u32>) -> Result<Vec<(Vec<u32>, QSeries)>, IdentityError> {
    let p = e_specialized(lambda, spec)?;
    let terms = p.qpoly_terms().map_err(IdentityError::Exact)?;
    Ok(terms.into_iter().map(|(m, c)| (m, QSeries::from_qpoly(&c, cap))).collect())
}

/// Compositions summed on the right-hand side: `|lambda| <= min(Dx, Dy)`.
pub fn rhs_lambdas(variant: IdentityVariant, n: usize, policy: &TruncationPolicy) -> Vec<Composition> {
    let d = policy.max_x_degree.unwrap_or(0).min(policy.max_y_degree.unwrap_or(0));
    compositions_up_to(n, d)
        .into_iter()
        .filter(|c| !matches!(variant, IdentityVariant::GlSlform | IdentityVariant::IwahoriChar) || c.has_zero())
        .collect()
}

/// Right-hand side with `q`-series coefficients and the number of summands.
pub fn rhs_series(
    variant: IdentityVariant,
    n: usize,
    policy: TruncationPolicy,
    jobs: usize,
) -> Result<(TruncatedSeries<QSeries>, usize), IdentityError> {
    check_policy(variant, &policy)?;
    let vars = VarSet::gl(n);
    let cap = policy.max_q_degree;
    let lambdas = rhs_lambdas(variant, n, &policy);
    let (sx, sy) = match variant {
        IdentityVariant::ClassicalQ0 => (Specialization::Q0T0, Specialization::QinfTinf),
        IdentityVariant::GlT0 | IdentityVariant::GlSlform | IdentityVariant::IwahoriChar => {
            (Specialization::T0, Specialization::QinvTinf)
        }
        _ => return Err(IdentityError::Invalid(format!("{variant} has no q-series right-hand side"))),
    };
    let sum = parallel_sum(vars, policy, &lambdas, jobs, |l| {
        let a = norm_a_q(l, cap.unwrap_or(0));
        let ex = qseries_terms(l, sx, cap)?;
        let ey = qseries_terms(l, sy, cap)?;
        Ok(summand_series(vars, policy, &a, &ex, &ey)?)
    })?;
    Ok((sum, lambdas.len()))
}

/// Right-hand side of the `(q, t)` identity.
pub fn rhs_series_qt(n: usize, policy: TruncationPolicy, jobs: usize) -> Result<(TruncatedSeries<QTRational>, usize), IdentityError> {
    check_policy(IdentityVariant::GlQt, &policy)?;
    let policy = TruncationPolicy { max_q_degree: None, ..policy };
    let vars = VarSet::gl(n);
    let lambdas = rhs_lambdas(IdentityVariant::GlQt, n, &policy);
    let sum = parallel_sum(vars, policy, &lambdas, jobs, |l| {
        let a = norm_a_qt(l);
        let ex: Vec<_> = e_specialized(l, Specialization::Generic)?.terms.into_iter().collect();
        let ey: Vec<_> = e_specialized(l, Specialization::QtInv)?.terms.into_iter().collect();
        Ok(summand_series(vars, policy, &a, &ex, &ey)?)
    })?;
    Ok((sum, lambdas.len()))
}

const QT_MAX_RANK: usize = 2;
const QT_MAX_DEGREE: u32 = 4;

/// Run one identity at `n` under `policy`.
pub fn verify_identity(
    variant: IdentityVariant,
    n: usize,
    policy: TruncationPolicy,
    jobs: usize,
) -> Result<VerificationReport, IdentityError> {
    let start = Instant::now();
    if n == 0 {
        return Err(IdentityError::Invalid("rank must be positive".into()));
    }
    let mut details = Vec::new();
    let (outcome, lambda_count, policy) = match variant {
        IdentityVariant::GlQt => {
            let d = policy.max_x_degree.unwrap_or(u32::MAX).max(policy.max_y_degree.unwrap_or(u32::MAX));
            if n > QT_MAX_RANK || d > QT_MAX_DEGREE {
                return Err(IdentityError::CostCap(format!("gl-qt runs need n <= {QT_MAX_RANK} and D <= {QT_MAX_DEGREE}")));
            }
            let policy = TruncationPolicy { max_q_degree: None, ..policy };
            let lhs = lhs_series_qt(n, policy)?;
            let (rhs, count) = rhs_series_qt(n, policy, jobs)?;
            (compare(&lhs, &rhs, "lhs-vs-rhs")?, count, policy)
        }
        IdentityVariant::ClassicalQ0 => {
            let policy = TruncationPolicy { max_q_degree: Some(0), ..policy };
            let lhs = lhs_series(variant, n, policy)?;
            let (rhs, count) = rhs_series(variant, n, policy, jobs)?;
            let mut outcome = compare(&lhs, &rhs, "lhs-vs-rhs")?;
            if outcome.passed() {
                if let Some(l) = rhs_lambdas(variant, n, &policy).into_iter().find(|l| norm_a_q(l, 0) != QSeries::one().with_cap(Some(0))) {
                    outcome = Outcome::Fail {
                        stage: "norm-at-q0".into(),
                        monomial: l.parts().iter().map(|&x| x as i64).collect(),
                        lhs: norm_a_q(&l, 0).to_json(),
                        rhs: json!(["1"]),
                    };
                }
            }
            (outcome, count, policy)
        }
        IdentityVariant::GlT0 | IdentityVariant::GlSlform | IdentityVariant::IwahoriChar => {
            let lhs = lhs_series(variant, n, policy)?;
            let (rhs, count) = rhs_series(variant, n, policy, jobs)?;
            (compare(&lhs, &rhs, "lhs-vs-rhs")?, count, policy)
        }
        IdentityVariant::SlProjected => {
            let d = policy.max_x_degree.unwrap_or(0).min(policy.max_y_degree.unwrap_or(0));
            let k = policy
                .max_q_degree
                .ok_or_else(|| IdentityError::Invalid("sl needs a q cap".into()))?;
            let r = verify_sl(n, d, k, jobs)?;
            details = r.details;
            (r.outcome, r.lambda_count, r.policy)
        }
        IdentityVariant::Sl2Appendix => {
            if n != 2 {
                return Err(IdentityError::Invalid("sl2-appendix needs n = 2".into()));
            }
            let range = policy.max_x_degree.unwrap_or(0) as i64;
            let k = policy.max_q_degree.unwrap_or(0);
            return Ok(VerificationReport { elapsed: start.elapsed(), ..verify_sl2_appendix(-range, range, k)? });
        }
    };
    Ok(VerificationReport { variant, n, policy, outcome, lambda_count, elapsed: start.elapsed(), details })
}

// ---------------------------------------------------------------------------
// gl -> sl projection
// ---------------------------------------------------------------------------

/// Restriction of a `gl_n` exponent vector to `sl_n` coordinates.
pub fn class_of(a: &[i64]) -> Vec<i64> {
    a.windows(2).map(|w| w[0] - w[1]).collect()
}

fn class_of_u32(a: &[u32]) -> Vec<i64> {
    a.windows(2).map(|w| w[0] as i64 - w[1] as i64).collect()
}

/// Classes `a-bar` of all `a` in `(Z>=0)^n` with `|a| <= d`.
pub fn reachable_classes(n: usize, d: u32) -> BTreeSet<Vec<i64>> {
    compositions_up_to(n, d).iter().map(|c| class_of_u32(c.parts())).collect()
}

/// Finite set of class pairs `(X-class, Y-class)` with a `q`-cap and the `gl` degree up to
/// which every fiber contributor of the left-hand side lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlWindow {
    pub n: usize,
    pub x_classes: BTreeSet<Vec<i64>>,
    pub y_classes: BTreeSet<Vec<i64>>,
    pub max_q: u32,
    pub certified_degree: u32,
}

impl SlWindow {
    pub fn contains(&self, x: &[i64], y: &[i64]) -> bool {
        self.x_classes.contains(x) && self.y_classes.contains(y)
    }

    pub fn pair_count(&self) -> usize {
        self.x_classes.len() * self.y_classes.len()
    }
}

/// `sum_{lambda, mu} c X^{lambda-bar} Y^{mu-bar}` over terms of `f` whose classes lie in the window.
/// `f` must have been computed to at least the certified degree in both blocks.
pub fn project_to_sl(f: &TruncatedSeries<QSeries>, window: &SlWindow) -> Result<TruncatedSeries<QSeries>, IdentityError> {
    let p = f.policy();
    for cap in [p.max_x_degree, p.max_y_degree] {
        if let Some(avail) = cap {
            if avail < window.certified_degree {
                return Err(IdentityError::WindowExceedsBound { needed: window.certified_degree, available: avail });
            }
        }
    }
    let policy = TruncationPolicy { max_q_degree: Some(window.max_q), ..Default::default() };
    let mut out = TruncatedSeries::zero(VarSet::sl(window.n), policy);
    for (m, c) in f.terms() {
        let (x, y) = (class_of(&m.x), class_of(&m.y));
        if window.contains(&x, &y) {
            out.add_term(Monomial::new(x, y), c.clone())?;
        }
    }
    Ok(out)
}

/// `gl_n` vector with zero sum whose class is `c`, if `c` lies in the root lattice.
fn root_lift(c: &[i64]) -> Option<Vec<i64>> {
    let n = c.len() as i64 + 1;
    let weighted: i64 = c.iter().enumerate().map(|(k, &x)| (k as i64 + 1) * x).sum();
    if weighted.rem_euclid(n) != 0 {
        return None;
    }
    let mut v = vec![0i64; n as usize];
    v[n as usize - 1] = -weighted / n;
    for j in (0..c.len()).rev() {
        v[j] = v[j + 1] + c[j];
    }
    Some(v)
}

/// All `m_{ij} >= 0` (`i < j`, row-major) with `sum m_{ij} (e_i - e_j) = beta`.
pub fn kostant_partitions(beta: &[i64]) -> Vec<Vec<u32>> {
    let n = beta.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    let mut m = vec![0u32; pairs.len()];
    fn rec(i: usize, n: usize, beta: &[i64], pairs: &[(usize, usize)], m: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == n {
            out.push(m.clone());
            return;
        }
        let incoming: i64 = pairs.iter().zip(m.iter()).filter(|((_, j), _)| *j == i).map(|(_, &v)| v as i64).sum();
        let s = beta[i] + incoming;
        if s < 0 {
            return;
        }
        let slots: Vec<usize> = pairs.iter().enumerate().filter(|(_, (a, _))| *a == i).map(|(k, _)| k).collect();
        if slots.is_empty() {
            if s == 0 {
                rec(i + 1, n, beta, pairs, m, out);
            }
            return;
        }
        fn distribute(
            k: usize,
            left: i64,
            slots: &[usize],
            i: usize,
            n: usize,
            beta: &[i64],
            pairs: &[(usize, usize)],
            m: &mut Vec<u32>,
            out: &mut Vec<Vec<u32>>,
        ) {
            if k + 1 == slots.len() {
                m[slots[k]] = left as u32;
                rec(i + 1, n, beta, pairs, m, out);
                m[slots[k]] = 0;
                return;
            }
            for v in 0..=left {
                m[slots[k]] = v as u32;
                distribute(k + 1, left - v, slots, i, n, beta, pairs, m, out);
            }
            m[slots[k]] = 0;
        }
        distribute(0, s, &slots, i, n, beta, pairs, m, out);
    }
    rec(0, n, beta, &pairs, &mut m, &mut out);
    out
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `(q P; q)_inf prod_{i,j} 1/(q x_i y_j; q)_inf`, the factor of the `sl` form that is
/// polynomial in each `q`-degree.
pub fn polynomial_factor(n: usize, k: u32) -> Result<TruncatedSeries<QSeries>, IdentityError> {
    let d = n as u32 * k;
    let policy = TruncationPolicy::degree(d, Some(k));
    let vars = VarSet::gl(n);
    let qq = q(Some(k));
    let mut acc = pochhammer_series(vars, policy, &qq, &full_product(n), None)?;
    for i in 0..n {
        for j in 0..n {
            acc = acc.mul(&inverse_pochhammer_series(vars, policy, &qq, &xy(n, i, j))?)?;
        }
    }
    Ok(acc)
}

/// One `(nu, m)` term of `(1 - P)/prod(1 - x_i y_i) prod_{i<j} 1/(1 - x_i y_j)` in the class pair
/// `(a, b)`: the `gl` exponents `(x, y)`.
fn kostant_terms(n: usize, a: &[i64], b: &[i64]) -> Vec<(Vec<i64>, Vec<i64>)> {
    let Some(beta) = root_lift(&sub(a, b)) else { return Vec::new() };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let base: Vec<i64> = SlWeight(a.to_vec()).representative().parts().iter().map(|&x| x as i64).collect();
    kostant_partitions(&beta)
        .into_iter()
        .map(|m| {
            let mut xs = vec![0i64; n];
            let mut ys = vec![0i64; n];
            for ((i, j), &v) in pairs.iter().zip(&m) {
                xs[*i] += v as i64;
                ys[*j] += v as i64;
            }
            let nu_class = class_of(&sub(&base, &xs));
            let nu: Vec<i64> = SlWeight(nu_class).representative().parts().iter().map(|&x| x as i64).collect();
            let x: Vec<i64> = nu.iter().zip(&xs).map(|(p, q)| p + q).collect();
            let y: Vec<i64> = nu.iter().zip(&ys).map(|(p, q)| p + q).collect();
            (x, y)
        })
        .collect()
}

/// Left-hand side of the `sl` form restricted to the `gl` fibers over the window, together
/// with the largest `gl` degree of any contributor.
fn lhs_on_fibers(
    n: usize,
    x_classes: &BTreeSet<Vec<i64>>,
    y_classes: &BTreeSet<Vec<i64>>,
    k: u32,
) -> Result<(Vec<(Monomial, QSeries)>, u32), IdentityError> {
    let g = polynomial_factor(n, k)?;
    let mut terms = Vec::new();
    let mut bound = 0u32;
    for (gm, c) in g.terms() {
        let (gx, gy) = (class_of(&gm.x), class_of(&gm.y));
        for a in x_classes {
            for b in y_classes {
                for (x, y) in kostant_terms(n, &sub(a, &gx), &sub(b, &gy)) {
                    let m = Monomial::new(x, y).mul(gm);
                    bound = bound.max(m.x_degree().max(m.y_degree()) as u32);
                    terms.push((m, c.clone()));
                }
            }
        }
    }
    Ok((terms, bound))
}

/// Window of all class pairs reachable at `gl` degree `<= d`, certified for `q`-degree `<= k`.
pub fn certify_window(n: usize, d: u32, k: u32) -> Result<SlWindow, IdentityError> {
    let classes = reachable_classes(n, d);
    let (_, bound) = lhs_on_fibers(n, &classes, &classes, k)?;
    Ok(SlWindow { n, x_classes: classes.clone(), y_classes: classes, max_q: k, certified_degree: bound })
}

/// `E_nu(x; q, 0)` and `E_nu(y; q^-1, inf)` keeping monomials whose class is in the window.
type FiberTerms = (Vec<(Vec<u32>, QSeries)>, Vec<(Vec<u32>, QSeries)>);

fn e_pair_on_window(nu: &Composition, w: &SlWindow) -> FiberTerms {
    let keep = |spec, classes: &BTreeSet<Vec<i64>>| -> Vec<(Vec<u32>, QSeries)> {
        specialized_fillings(nu, spec, w.max_q)
            .into_iter()
            .filter(|(e, _)| classes.contains(&class_of_u32(e)))
            .collect()
    };
    (keep(Specialization::T0, &w.x_classes), keep(Specialization::QinvTinf, &w.y_classes))
}

/// `sum_{lambda in P} X^lambda Y^lambda (q;q)_inf^{1-n} prod_{i<j} 1/(1 - X^{e_i} Y^{e_j})
/// prod_{i != j} 1/(q X^{e_i} Y^{e_j}; q)_inf` on the window, assembled in `sl_n` letters.
pub fn sl_lhs_on_window(w: &SlWindow) -> Result<TruncatedSeries<QSeries>, IdentityError> {
    let n = w.n;
    let k = w.max_q;
    let vars = VarSet::sl(n);
    let policy = TruncationPolicy { max_q_degree: Some(k), ..Default::default() };
    let eps: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut e = vec![0u32; n];
            e[i] = 1;
            class_of_u32(&e)
        })
        .collect();
    let mut h = TruncatedSeries::one(vars, policy);
    let inv_euler = QSeries::from_qpoly(&crate::exact::q_pochhammer(k), Some(k)).inverse()?;
    for _ in 1..n {
        h = h.scale(&inv_euler);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let m = Monomial::new(eps[i].clone(), eps[j].clone());
                h = h.mul(&inverse_pochhammer_series(vars, policy, &q(Some(k)), &m)?)?;
            }
        }
    }
    let mut out = TruncatedSeries::zero(vars, policy);
    for a in &w.x_classes {
        for b in &w.y_classes {
            for (hm, c) in h.terms() {
                let count = root_lift(&sub(&sub(a, &hm.x), &sub(b, &hm.y)))
                    .map_or(0, |beta| kostant_partitions(&beta).len());
                if count > 0 {
                    out.add_term(Monomial::new(a.clone(), b.clone()), c.scale(&rat(count as i64)))?;
                }
            }
        }
    }
    Ok(out)
}

/// The four sides of the `sl_n` identity on a window.
pub struct SlSides {
    pub window: SlWindow,
    pub projected_lhs: TruncatedSeries<QSeries>,
    pub projected_rhs: TruncatedSeries<QSeries>,
    pub sl_rhs: TruncatedSeries<QSeries>,
    pub sl_lhs: TruncatedSeries<QSeries>,
    /// Window terms of the summed right-hand side just above the certified degree (must be zero).
    pub audit: TruncatedSeries<QSeries>,
    pub nu_count: usize,
}

pub fn sl_sides(n: usize, d: u32, k: u32, jobs: usize) -> Result<SlSides, IdentityError> {
    if n < 2 {
        return Err(IdentityError::Invalid("sl needs n >= 2".into()));
    }
    let classes = reachable_classes(n, d);
    let (lhs_terms, bound) = lhs_on_fibers(n, &classes, &classes, k)?;
    let window = SlWindow { n, x_classes: classes.clone(), y_classes: classes, max_q: k, certified_degree: bound };
    let gl_policy = TruncationPolicy::degree(bound, Some(k));
    let vars = VarSet::gl(n);
    let lhs_gl = TruncatedSeries::from_terms(vars, gl_policy, lhs_terms)?;
    let projected_lhs = project_to_sl(&lhs_gl, &window)?;

    let audit_top = bound + n as u32;
    let nus: Vec<Composition> = compositions_up_to(n, audit_top).into_iter().filter(|c| c.has_zero()).collect();
    let fibers: Vec<FiberTerms> = pool(jobs)?.install(|| nus.par_iter().map(|nu| e_pair_on_window(nu, &window)).collect());

    let sl_vars = VarSet::sl(n);
    let sl_policy = TruncationPolicy { max_q_degree: Some(k), ..Default::default() };
    let mut rhs_gl = TruncatedSeries::zero(vars, gl_policy);
    let mut sl_rhs = TruncatedSeries::zero(sl_vars, sl_policy);
    let mut audit = TruncatedSeries::zero(vars, TruncationPolicy::degree(audit_top, Some(k)));
    let mut nu_count = 0;
    for (nu, (ex, ey)) in nus.iter().zip(&fibers) {
        if nu.size() > bound {
            if !ex.is_empty() && !ey.is_empty() {
                audit = audit.add(&summand_series(vars, audit.policy(), &norm_a_q(nu, k), ex, ey)?)?;
            }
            continue;
        }
        nu_count += 1;
        if ex.is_empty() || ey.is_empty() {
            continue;
        }
        let a = norm_a_q(nu, k);
        for (e, t) in summand_series(vars, gl_policy, &a, ex, ey)?.into_terms() {
            rhs_gl.add_term(e, t)?;
        }
        let hw = hw_algebra_char_sl(&nu.restrict(), WordKind::D)?.to_qseries(k);
        for (xa, ca) in ex {
            let c = &hw * ca;
            for (yb, cb) in ey {
                sl_rhs.add_term(Monomial::new(class_of_u32(xa), class_of_u32(yb)), &c * cb)?;
            }
        }
    }
    let projected_rhs = project_to_sl(&rhs_gl, &window)?;
    let sl_lhs = sl_lhs_on_window(&window)?;
    Ok(SlSides { window, projected_lhs, projected_rhs, sl_rhs, sl_lhs, audit, nu_count })
}

/// Largest `|nu|` at which the specialized fillings are cross-checked against the limits of
/// the recursion inside an `sl` run.
const SL_CROSS_CHECK_SIZE: u32 = 4;

fn verify_sl(n: usize, d: u32, k: u32, jobs: usize) -> Result<VerificationReport, IdentityError> {
    let start = Instant::now();
    let sides = sl_sides(n, d, k, jobs)?;
    let w = &sides.window;
    let mut outcome = Outcome::Pass;
    if let Some((m, c)) = sides.audit.terms().iter().next() {
        outcome = Outcome::Fail {
            stage: "certificate-audit".into(),
            monomial: m.exps(),
            lhs: c.to_json(),
            rhs: json!([]),
        };
    }
    if outcome.passed() {
        outcome = fillings_cross_check(n, SL_CROSS_CHECK_SIZE.min(w.certified_degree), k)?;
    }
    for (a, b, stage) in [
        (&sides.projected_lhs, &sides.projected_rhs, "projected-lhs-vs-projected-rhs"),
        (&sides.projected_rhs, &sides.sl_rhs, "projected-rhs-vs-sl-rhs"),
        (&sides.projected_lhs, &sides.sl_lhs, "projected-lhs-vs-sl-lhs"),
    ] {
        if outcome.passed() {
            outcome = compare(a, b, stage)?;
        }
    }
    let details = vec![
        ("window_degree".to_string(), json!(d)),
        ("window_pairs".to_string(), json!(w.pair_count())),
        ("certified_degree".to_string(), json!(w.certified_degree)),
        ("nonzero_window_terms".to_string(), json!(sides.sl_rhs.len())),
    ];
    Ok(VerificationReport {
        variant: IdentityVariant::SlProjected,
        n,
        policy: TruncationPolicy::degree(w.certified_degree, Some(k)),
        outcome,
        lambda_count: sides.nu_count,
        elapsed: start.elapsed(),
        details,
    })
}

/// Specialized fillings against the limits of the recursion for all `|nu| <= size`.
fn fillings_cross_check(n: usize, size: u32, k: u32) -> Result<Outcome, IdentityError> {
    for nu in compositions_up_to(n, size) {
        for spec in [Specialization::T0, Specialization::QinvTinf] {
            let direct = specialized_fillings(&nu, spec, k);
            let lim: BTreeMap<Vec<u32>, QSeries> = qseries_terms(&nu, spec, Some(k))?
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .collect();
            if direct != lim {
                let m = direct.keys().chain(lim.keys()).find(|m| direct.get(*m) != lim.get(*m)).cloned().unwrap_or_default();
                return Ok(Outcome::Fail {
                    stage: format!("fillings-vs-limit {spec} {nu}"),
                    monomial: m.iter().map(|&x| x as i64).collect(),
                    lhs: direct.get(&m).map_or(json!(null), |c| c.to_json()),
                    rhs: lim.get(&m).map_or(json!(null), |c| c.to_json()),
                });
            }
        }
    }
    Ok(Outcome::Pass)
}

// ---------------------------------------------------------------------------
// sl_2 closed forms
// ---------------------------------------------------------------------------

fn laurent_json(p: &BTreeMap<i64, QPoly>, e: i64) -> Value {
    p.get(&e).map_or(json!([]), |c| QSeries::from_qpoly(c, None).to_json())
}

fn first_difference(a: &BTreeMap<i64, QPoly>, b: &BTreeMap<i64, QPoly>) -> Option<i64> {
    a.keys().chain(b.keys()).copied().collect::<BTreeSet<_>>().into_iter().find(|e| a.get(e) != b.get(e))
}

/// Restricted specializations and norms against the Rogers–Szegő closed forms for every
/// weight in `lo..=hi`, norms truncated at `k`.
pub fn verify_sl2_appendix(lo: i64, hi: i64, k: u32) -> Result<VerificationReport, IdentityError> {
    let start = Instant::now();
    let mut outcome = Outcome::Pass;
    for lambda in lo..=hi {
        let rep = SlWeight(vec![lambda]).representative();
        let closed = sl2_closed_forms(lambda);
        let restrict = |spec| -> Result<BTreeMap<i64, QPoly>, IdentityError> {
            let p = e_specialized(&rep, spec)?;
            let t = p.qpoly_terms().map_err(IdentityError::Exact)?;
            Ok(restrict_to_sl(&t).into_iter().map(|(e, c)| (e[0], c)).collect())
        };
        for (spec, want, stage) in [
            (Specialization::T0, &closed.e_t0, "E(X;q,0)"),
            (Specialization::QinvTinf, &closed.e_qinv_tinf, "E(Y;q^-1,inf)"),
        ] {
            let got = restrict(spec)?;
            if let Some(e) = first_difference(&got, want) {
                outcome = Outcome::Fail {
                    stage: format!("{stage} at {lambda}"),
                    monomial: vec![e],
                    lhs: laurent_json(&got, e),
                    rhs: laurent_json(want, e),
                };
                break;
            }
        }
        if !outcome.passed() {
            break;
        }
        let want = crate::exact::q_pochhammer_inv(closed.norm_pochhammer, k);
        for (got, stage) in [
            (norm_a_q(&rep, k), "a(q)"),
            (hw_algebra_char_sl(&SlWeight(vec![lambda]), WordKind::D)?.to_qseries(k), "ch A^D"),
        ] {
            if got != want {
                outcome = Outcome::Fail {
                    stage: format!("{stage} at {lambda}"),
                    monomial: vec![lambda],
                    lhs: got.to_json(),
                    rhs: want.to_json(),
                };
                break;
            }
        }
        if !outcome.passed() {
            break;
        }
    }
    Ok(VerificationReport {
        variant: IdentityVariant::Sl2Appendix,
        n: 2,
        policy: TruncationPolicy { max_x_degree: Some(hi.unsigned_abs().max(lo.unsigned_abs()) as u32), max_y_degree: None, max_q_degree: Some(k) },
        outcome,
        lambda_count: (hi - lo + 1).max(0) as usize,
        elapsed: start.elapsed(),
        details: vec![("weights".to_string(), json!([lo, hi]))],
    })
}
