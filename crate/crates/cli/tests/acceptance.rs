//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use nsmac::affine::{
    factorized_word, hw_algebra_char, hw_algebra_char_sl, HwMode, WeightData, WordKind,
};
use nsmac::characters::ch_weyl_ratio_check;
use nsmac::exact::LimitDirection;
use nsmac::macdonald::{
    compute_e, compute_e_fillings, e_specialized, norm_a_q, norm_a_q_alt, norm_a_qt, Specialization,
};
use nsmac::weights::{compositions_up_to, SlWeight};

type Check = Result<String, String>;

struct Run {
    code: i32,
    stdout: String,
    elapsed: Duration,
}

fn nsmac(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_nsmac")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        elapsed: start.elapsed(),
    }
}

fn verify(identity: &str, n: usize, d: u32, k: Option<u32>, limit: Option<Duration>) -> Check {
    let (n_s, d_s) = (n.to_string(), d.to_string());
    let k_s = k.map(|k| k.to_string());
    let mut args = vec!["verify", "--identity", identity, "--n", &n_s, "--max-deg", &d_s];
    if let Some(k) = &k_s {
        args.extend(["--max-q", k]);
    }
    let r = nsmac(&args);
    let tag = format!("{identity} n={n} D={d} K={}", k.map_or("-".into(), |k| k.to_string()));
    if r.code != 0 || !r.stdout.contains("outcome: pass") {
        return Err(format!("{tag}: exit {} {}", r.code, r.stdout.replace('\n', "; ")));
    }
    if let Some(limit) = limit {
        if r.elapsed > limit {
            return Err(format!("{tag}: {:.1}s exceeds {}s", r.elapsed.as_secs_f64(), limit.as_secs()));
        }
    }
    Ok(format!("{tag} {:.1}s", r.elapsed.as_secs_f64()))
}

fn all(checks: Vec<Check>) -> Check {
    let mut ok = Vec::new();
    for c in checks {
        ok.push(c?);
    }
    Ok(ok.join(", "))
}

fn mins(m: u64) -> Option<Duration> {
    Some(Duration::from_secs(60 * m))
}

fn ac1() -> Check {
    all(vec![verify("gl-t0", 2, 6, Some(10), mins(2)), verify("gl-t0", 3, 4, Some(8), mins(10))])
}

fn ac2() -> Check {
    verify("gl-qt", 2, 3, None, mins(10))
}

fn ac3() -> Check {
    all(vec![verify("gl-slform", 2, 6, Some(10), None), verify("gl-slform", 3, 4, Some(8), None)])
}

fn ac4() -> Check {
    let mut out = Vec::new();
    for (n, d, k) in [(2usize, 5u32, 8u32), (3, 3, 6)] {
        let r = nsmac(&["verify", "--identity", "sl", "--n", &n.to_string(), "--max-deg", &d.to_string(), "--max-q", &k.to_string()]);
        let window = format!("window_degree: {d}");
        if r.code != 0 || !r.stdout.contains("outcome: pass") || !r.stdout.contains(&window) {
            return Err(format!("sl n={n}: exit {} {}", r.code, r.stdout.replace('\n', "; ")));
        }
        let cert = r.stdout.lines().find(|l| l.starts_with("certified_degree")).unwrap_or("").to_string();
        out.push(format!("sl n={n} d={d} K={k} {cert} {:.1}s", r.elapsed.as_secs_f64()));
    }
    Ok(out.join(", "))
}

fn ac5() -> Check {
    verify("iwahori-char", 2, 5, Some(8), None)
}

fn ac6() -> Check {
    let mut checks: Vec<Check> = (1..=3).map(|n| verify("classical-q0", n, 5, None, None)).collect();
    let mut count = 0;
    for n in 1..=3 {
        for l in compositions_up_to(n, 5) {
            count += 1;
            if !norm_a_q(&l, 0).coeffs().iter().eq([nsmac::exact::rat(1)].iter()) {
                checks.push(Err(format!("a_{l}(0) != 1")));
            }
        }
    }
    checks.push(Ok(format!("a(0)=1 for {count} compositions")));
    all(checks)
}

fn ac7() -> Check {
    let start = Instant::now();
    let k = 12;
    let mut count = 0;
    for n in 1..=4 {
        for l in compositions_up_to(n, 6) {
            let a = norm_a_q(&l, k);
            let b = norm_a_q_alt(&l, k);
            let c = norm_a_qt(&l)
                .limit_t(LimitDirection::Zero)
                .and_then(|v| v.to_qseries(k))
                .map_err(|e| format!("{l}: {e}"))?;
            if a != b || a != c {
                return Err(format!("{l}: {a} | {b} | {c}"));
            }
            count += 1;
        }
    }
    let el = start.elapsed();
    if el > Duration::from_secs(60) {
        return Err(format!("{count} cases took {:.1}s", el.as_secs_f64()));
    }
    Ok(format!("{count} compositions, {:.1}s", el.as_secs_f64()))
}

fn ac8() -> Check {
    let mut count = 0;
    for n in 2..=3 {
        for l in compositions_up_to(n, 6).into_iter().filter(|c| c.has_zero()) {
            let h = hw_algebra_char_sl(&l.restrict(), WordKind::D).map_err(|e| e.to_string())?;
            if h.to_qseries(20) != norm_a_q(&l, 20) {
                return Err(format!("{l}: degrees {:?}", h.generator_degrees));
            }
            count += 1;
        }
    }
    Ok(format!("{count} weights at K=20"))
}

fn ac9() -> Check {
    let mut count = 0;
    for n in 1..=3 {
        for l in compositions_up_to(n, 5) {
            let a = compute_e(&l).map_err(|e| e.to_string())?;
            if a.terms != compute_e_fillings(&l).terms {
                return Err(format!("paths differ at {l}"));
            }
            count += 1;
        }
    }
    Ok(format!("{count} compositions"))
}

fn ac10() -> Check {
    let r = nsmac(&["verify", "--identity", "sl2-appendix", "--n", "2", "--max-deg", "6", "--max-q", "12"]);
    if r.code != 0 || !r.stdout.contains("outcome: pass") || !r.stdout.contains("lambda_count: 13") {
        return Err(format!("exit {} {}", r.code, r.stdout.replace('\n', "; ")));
    }
    Ok("weights -6..6 at K=12".into())
}

fn ac11() -> Check {
    let mut count = 0;
    for n in 1..=3 {
        for l in compositions_up_to(n, 5) {
            let e = compute_e(&l).map_err(|e| e.to_string())?;
            if !e.is_homogeneous() || !e.coeff(l.parts()).is_one() {
                return Err(format!("{l}: not homogeneous or not monic"));
            }
            for spec in [Specialization::T0, Specialization::QinvTinf] {
                let s = e_specialized(&l, spec).map_err(|e| e.to_string())?;
                let terms = s.qpoly_terms().map_err(|e| format!("{l} {spec}: {e}"))?;
                let positive = terms
                    .values()
                    .all(|p| p.coeffs().iter().all(|c| c.is_integer() && *c >= nsmac::exact::rat(0)));
                if !positive {
                    return Err(format!("{l} {spec}: negative or fractional coefficient"));
                }
            }
            count += 1;
        }
        for l in compositions_up_to(n, 4) {
            let e = compute_e(&l).map_err(|e| e.to_string())?;
            for m in 1..=2 {
                let shifted = compute_e(&l.add_ones(m)).map_err(|e| e.to_string())?;
                let expect: Vec<(Vec<u32>, String)> =
                    e.terms.iter().map(|(x, c)| (x.iter().map(|v| v + m).collect(), c.to_string())).collect();
                let got: Vec<(Vec<u32>, String)> = shifted.terms.iter().map(|(x, c)| (x.clone(), c.to_string())).collect();
                if expect != got {
                    return Err(format!("stability fails at {l} + {m}"));
                }
            }
        }
    }
    Ok(format!("{count} compositions"))
}

fn sl_weights(rank: usize, bound: i64) -> Vec<SlWeight> {
    let mut out = vec![Vec::new()];
    for _ in 0..rank {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (-bound..=bound).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out.into_iter().map(SlWeight).collect()
}

fn ac12() -> Check {
    let mut count = 0;
    for rank in 1..=2 {
        for w in sl_weights(rank, 4) {
            let data = WeightData::from_sl(&w);
            for (kind, mode) in [(WordKind::D, HwMode::D), (WordKind::U, HwMode::U)] {
                let (word, plen) = factorized_word(&data, kind).map_err(|e| format!("{w}: {e}"))?;
                if plen != data.prefix_len(kind) {
                    return Err(format!("{w} {kind:?}: prefix {plen}"));
                }
                let closed = hw_algebra_char(&data, &mode).map_err(|e| e.to_string())?;
                let at_m = hw_algebra_char(&data, &HwMode::AtM(plen, word.clone())).map_err(|e| e.to_string())?;
                if closed != at_m {
                    return Err(format!("{w} {kind:?}: {:?} vs {:?}", closed.generator_degrees, at_m.generator_degrees));
                }
                for m in 0..=word.len() {
                    let c = ch_weyl_ratio_check(&data, m, &word).map_err(|e| e.to_string())?;
                    if !c.passed() {
                        return Err(format!("{w} {kind:?} m={m}: {:?} vs {:?}", c.from_counts, c.from_omega));
                    }
                }
            }
            let u = hw_algebra_char_sl(&w, WordKind::U).map_err(|e| e.to_string())?;
            let d = hw_algebra_char_sl(&w.neg(), WordKind::D).map_err(|e| e.to_string())?;
            if u != d {
                return Err(format!("duality fails at {w}"));
            }
            count += 1;
        }
    }
    Ok(format!("{count} weights of sl2/sl3"))
}

fn ac13() -> Check {
    let base = ["verify", "--identity", "gl-t0", "--n", "2", "--max-deg", "5", "--max-q", "8", "--jobs"];
    let one = nsmac(&[&base[..], &["1"]].concat());
    let eight = nsmac(&[&base[..], &["8"]].concat());
    for fmt in ["text", "json"] {
        let a = nsmac(&[&base[..], &["1", "--format", fmt]].concat());
        let b = nsmac(&[&base[..], &["8", "--format", fmt]].concat());
        if a.stdout != b.stdout || a.code != 0 {
            return Err(format!("{fmt} output differs"));
        }
    }
    if one.stdout != eight.stdout || one.code != 0 || eight.code != 0 {
        return Err("reports differ".into());
    }
    Ok(format!("{} bytes identical", one.stdout.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 13] = [
        ("t=0 Cauchy identity", ac1),
        ("full (q,t) Cauchy identity", ac2),
        ("sl form before projection", ac3),
        ("sl_n identity on certified windows", ac4),
        ("Iwahori character", ac5),
        ("classical q=0 limit", ac6),
        ("three norm formulas agree", ac7),
        ("highest weight algebra equals norm", ac8),
        ("recursion equals fillings", ac9),
        ("rank one closed forms", ac10),
        ("positivity, homogeneity, stability", ac11),
        ("affine consistency", ac12),
        ("determinism across --jobs", ac13),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("AC{:<2} PASS  {name} [{detail}] ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("AC{:<2} FAIL  {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
