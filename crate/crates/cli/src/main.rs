use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nsmac::characters::{char_module, CharKind, Weight};
use nsmac::exact::{QSeries, QTRational};
use nsmac::identities::{verify_identity, verify_sl2_appendix, IdentityVariant, VerificationReport};
use nsmac::macdonald::{
    e_specialized, norm_a_q, norm_a_q_alt, norm_a_qt, restrict_to_sl, sl2_closed_forms, MacdonaldPolynomial,
    Specialization,
};
use nsmac::persist::{load_cache, save_cache};
use nsmac::series::{Scalar, TruncationPolicy};
use nsmac::weights::Composition;

const MAX_RANK: usize = 6;
const DEFAULT_MAX_Q: u32 = 10;

#[derive(Parser)]
#[command(name = "nsmac", version, about = "Nonsymmetric Macdonald polynomials and their Cauchy identities")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpecArg {
    Qt,
    T0,
    QinvTinf,
    Q0,
    QinfTinf,
    QtInv,
}

impl SpecArg {
    fn spec(self) -> Specialization {
        match self {
            SpecArg::Qt => Specialization::Generic,
            SpecArg::T0 => Specialization::T0,
            SpecArg::QinvTinf => Specialization::QinvTinf,
            SpecArg::Q0 => Specialization::Q0T0,
            SpecArg::QinfTinf => Specialization::QinfTinf,
            SpecArg::QtInv => Specialization::QtInv,
        }
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Print E_lambda under a specialization.
    Macdonald {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, value_enum, default_value = "qt")]
        spec: SpecArg,
        #[arg(long)]
        max_q: Option<u32>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the norm factor a_lambda.
    Norm {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        qt: bool,
        #[arg(long)]
        alt: bool,
        #[arg(long)]
        max_q: Option<u32>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print a module character.
    Char {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Read lambda as the representative of an sl_n weight.
        #[arg(long)]
        sl: bool,
        #[arg(long)]
        max_deg: u32,
        #[arg(long)]
        max_q: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Verify an identity under truncation.
    Verify {
        #[arg(long)]
        identity: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        max_deg: u32,
        #[arg(long)]
        max_q: Option<u32>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Tabulate the rank-one closed forms and check them.
    Appendix {
        #[arg(long, default_value_t = 6)]
        range: u32,
        #[arg(long, default_value_t = 12)]
        max_q: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

struct Usage(String);

enum Done {
    Success(String),
    Failure(String),
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Usage> {
    Err(Usage(msg.into()))
}

fn check_rank(n: usize) -> Result<(), Usage> {
    if n == 0 || n > MAX_RANK {
        return usage(format!("rank {n} out of range 1..={MAX_RANK}"));
    }
    Ok(())
}

fn parse_lambda(n: usize, s: &str) -> Result<Composition, Usage> {
    check_rank(n)?;
    let parts: Result<Vec<u32>, _> = s.split(',').map(|p| p.trim().parse::<u32>()).collect();
    match parts {
        Ok(p) if p.len() == n => Ok(Composition::new(p)),
        Ok(p) => usage(format!("lambda has {} entries, expected {n}", p.len())),
        Err(_) => usage(format!("malformed lambda {s:?}: expected nonnegative integers separated by commas")),
    }
}

fn emit(format: Format, text: String, value: Value) -> String {
    match format {
        Format::Text => text,
        Format::Json => serde_json::to_string(&value).expect("json"),
    }
}

fn polynomial_terms(p: &MacdonaldPolynomial, cap: Option<u32>) -> Result<Vec<(Vec<u32>, Value, String)>, Usage> {
    let mut out = Vec::new();
    for (m, c) in p.terms.iter() {
        match (p.spec, cap) {
            (Specialization::Generic | Specialization::QtInv, _) => out.push((m.clone(), c.to_json(), c.to_string())),
            (_, cap) => {
                let poly = c.as_qpoly().ok_or_else(|| Usage(format!("coefficient {c} is not a polynomial in q")))?;
                let s = QSeries::from_qpoly(&poly, cap);
                if !s.is_zero() {
                    out.push((m.clone(), Scalar::to_json(&s), s.to_string()));
                }
            }
        }
    }
    Ok(out)
}

fn monomial_text(m: &[u32]) -> String {
    let mon: Vec<String> = m
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
        .collect();
    if mon.is_empty() {
        "1".into()
    } else {
        mon.join("*")
    }
}

fn run_macdonald(n: usize, lambda: &str, spec: SpecArg, max_q: Option<u32>, format: Format) -> Result<Done, Usage> {
    let lambda = parse_lambda(n, lambda)?;
    let spec = spec.spec();
    if max_q.is_some() && matches!(spec, Specialization::Generic | Specialization::QtInv) {
        return usage("--max-q applies only to q-specializations");
    }
    let p = e_specialized(&lambda, spec).map_err(|e| Usage(e.to_string()))?;
    let terms = polynomial_terms(&p, max_q)?;
    let text = if max_q.is_none() {
        p.to_string()
    } else if terms.is_empty() {
        "0".into()
    } else {
        terms.iter().rev().map(|(m, _, c)| format!("({c})*{}", monomial_text(m))).collect::<Vec<_>>().join(" + ")
    };
    let value = json!({
        "variant": format!("E[{}]", spec.name()),
        "policy": TruncationPolicy { max_x_degree: Some(lambda.size()), max_y_degree: Some(0), max_q_degree: max_q }.to_json(),
        "lambda": lambda.parts(),
        "terms": terms.iter().map(|(m, c, _)| json!({"exps": m, "coeff": c})).collect::<Vec<_>>(),
    });
    Ok(Done::Success(emit(format, text, value)))
}

fn run_norm(n: usize, lambda: &str, qt: bool, alt: bool, max_q: Option<u32>, format: Format) -> Result<Done, Usage> {
    let lambda = parse_lambda(n, lambda)?;
    if qt && max_q.is_some() {
        return usage("--qt gives an exact rational function and cannot be combined with --max-q");
    }
    if qt && alt {
        return usage("--alt is a formula for a_lambda(q) and cannot be combined with --qt");
    }
    let (text, coeff, policy) = if qt {
        let a: QTRational = norm_a_qt(&lambda);
        (a.to_string(), a.to_json(), TruncationPolicy::unbounded())
    } else {
        let k = max_q.unwrap_or(DEFAULT_MAX_Q);
        let a = if alt { norm_a_q_alt(&lambda, k) } else { norm_a_q(&lambda, k) };
        (a.to_string(), Scalar::to_json(&a), TruncationPolicy { max_q_degree: Some(k), ..TruncationPolicy::unbounded() })
    };
    let variant = match (qt, alt) {
        (true, _) => "a[qt]",
        (false, true) => "a[q,alt]",
        (false, false) => "a[q]",
    };
    let value = json!({
        "variant": variant,
        "policy": policy.to_json(),
        "lambda": lambda.parts(),
        "terms": [{"exps": Vec::<u32>::new(), "coeff": coeff}],
    });
    Ok(Done::Success(emit(format, text, value)))
}

fn run_char(kind: &str, n: usize, lambda: &str, sl: bool, max_deg: u32, max_q: u32, format: Format) -> Result<Done, Usage> {
    let kind = CharKind::parse(kind).ok_or_else(|| Usage(format!("unknown character kind {kind:?}: use D, Uo, T, A-D or A-U")))?;
    let lambda = parse_lambda(n, lambda)?;
    if sl && n < 2 {
        return usage("sl weights need n >= 2");
    }
    let weight = if sl { Weight::Sl(lambda.restrict()) } else { Weight::Gl(lambda) };
    let policy = TruncationPolicy::degree(max_deg, Some(max_q));
    let ch = char_module(kind, &weight, policy).map_err(|e| Usage(e.to_string()))?;
    let value = json!({
        "variant": format!("ch[{}]", kind.name()),
        "policy": policy.to_json(),
        "terms": ch.series.to_json(),
    });
    Ok(Done::Success(emit(format, ch.series.to_string(), value)))
}

fn run_verify(identity: &str, n: usize, max_deg: u32, max_q: Option<u32>, jobs: usize, format: Format) -> Result<Done, Usage> {
    let variant = IdentityVariant::parse(identity).ok_or_else(|| {
        Usage(format!(
            "unknown identity {identity:?}: use one of {}",
            IdentityVariant::ALL.iter().map(|v| v.tag()).collect::<Vec<_>>().join(", ")
        ))
    })?;
    check_rank(n)?;
    if jobs == 0 {
        return usage("--jobs must be positive");
    }
    let max_q = match (variant, max_q) {
        (IdentityVariant::GlQt, Some(_)) => return usage("gl-qt uses exact coefficients and takes no --max-q"),
        (IdentityVariant::GlQt | IdentityVariant::ClassicalQ0, q) => q,
        (_, Some(q)) => Some(q),
        (_, None) => return usage(format!("{identity} needs --max-q")),
    };
    let start = Instant::now();
    let report = verify_identity(variant, n, TruncationPolicy::degree(max_deg, max_q), jobs)
        .map_err(|e| Usage(e.to_string()))?;
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    Ok(finish(report, format))
}

fn finish(report: VerificationReport, format: Format) -> Done {
    let out = emit(format, report.to_text().trim_end().to_string(), report.to_json());
    if report.passed() {
        Done::Success(out)
    } else {
        Done::Failure(out)
    }
}

fn run_appendix(range: u32, max_q: u32, format: Format) -> Result<Done, Usage> {
    let r = range as i64;
    let mut rows = Vec::new();
    let mut text = Vec::new();
    for lambda in -r..=r {
        let rep = nsmac::weights::SlWeight(vec![lambda]).representative();
        let restricted = |spec| -> Result<Value, Usage> {
            let p = e_specialized(&rep, spec).map_err(|e| Usage(e.to_string()))?;
            let t = p.qpoly_terms().map_err(|e| Usage(e.to_string()))?;
            Ok(Value::Array(
                restrict_to_sl(&t)
                    .into_iter()
                    .map(|(e, c)| json!({"exps": e, "coeff": Scalar::to_json(&QSeries::from_qpoly(&c, None))}))
                    .collect(),
            ))
        };
        let closed = sl2_closed_forms(lambda);
        let a = norm_a_q(&rep, max_q);
        text.push(format!("{lambda:>3}  a = 1/(q)_{}  a(q) = {a}", closed.norm_pochhammer));
        rows.push(json!({
            "lambda": lambda,
            "e_t0": restricted(Specialization::T0)?,
            "e_qinv_tinf": restricted(Specialization::QinvTinf)?,
            "norm": Scalar::to_json(&a),
        }));
    }
    let report = verify_sl2_appendix(-r, r, max_q).map_err(|e| Usage(e.to_string()))?;
    text.push(report.to_text().trim_end().to_string());
    let value = json!({"variant": "sl2-appendix", "rows": rows, "report": report.to_json()});
    let out = emit(format, text.join("\n"), value);
    Ok(if report.passed() { Done::Success(out) } else { Done::Failure(out) })
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("MACDONALD_CACHE_DIR").filter(|s| !s.is_empty()).map(PathBuf::from)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let head: Vec<&str> = text.lines().take_while(|l| !l.trim().is_empty()).map(str::trim).collect();
            eprintln!("{}", head.join(" "));
            return ExitCode::from(2);
        }
    };
    let dir = cache_dir();
    let mut cache_ok = false;
    if let Some(d) = &dir {
        match load_cache(d) {
            Ok(_) => cache_ok = true,
            Err(e) => eprintln!("warning: ignoring cache: {e}"),
        }
    }
    let result = match cli.verb {
        Verb::Macdonald { n, lambda, spec, max_q, format } => run_macdonald(n, &lambda, spec, max_q, format),
        Verb::Norm { n, lambda, qt, alt, max_q, format } => run_norm(n, &lambda, qt, alt, max_q, format),
        Verb::Char { kind, n, lambda, sl, max_deg, max_q, format } => run_char(&kind, n, &lambda, sl, max_deg, max_q, format),
        Verb::Verify { identity, n, max_deg, max_q, jobs, format } => run_verify(&identity, n, max_deg, max_q, jobs, format),
        Verb::Appendix { range, max_q, format } => run_appendix(range, max_q, format),
    };
    if let (Some(d), true) = (&dir, cache_ok) {
        if let Err(e) = save_cache(d) {
            eprintln!("warning: cache not saved: {e}");
        }
    }
    match result {
        Ok(Done::Success(out)) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Ok(Done::Failure(out)) => {
            println!("{out}");
            ExitCode::from(1)
        }
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
