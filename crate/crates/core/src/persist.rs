//! On-disk persistence of the memo table of generic `E_lambda`.
//!
//! One JSON file per polynomial, named by rank, composition and a hash of the
//! conventions in force, so a table written under other conventions is ignored.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{BiPoly, QPoly, QTRational, Rational};
use crate::macdonald::{cache_insert, cache_snapshot, compute_e_fillings, MacdonaldPolynomial, Specialization, Terms};
use crate::weights::Composition;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("cache io: {0}")]
    Io(#[from] io::Error),
    #[error("cache record {file}: {reason}")]
    Malformed { file: String, reason: String },
    #[error("cache entry for {0} disagrees with recomputation")]
    Corrupted(Composition),
}

type Grid = Vec<Vec<String>>;

#[derive(Serialize, Deserialize)]
struct TermRecord {
    exps: Vec<u32>,
    num: Grid,
    den: Grid,
}

#[derive(Serialize, Deserialize)]
struct Record {
    n: usize,
    lambda: Vec<u32>,
    anchor: String,
    terms: Vec<TermRecord>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf29ce484222325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

/// Hash of a few small polynomials, so any change of normalization changes the key.
pub fn anchor_hash() -> String {
    let text: String = [vec![1, 0], vec![0, 1], vec![0, 2, 1]]
        .into_iter()
        .map(|l| compute_e_fillings(&Composition::new(l)).to_string())
        .collect::<Vec<_>>()
        .join(";");
    format!("{:016x}", fnv1a(text.as_bytes()))
}

fn grid(b: &BiPoly) -> Grid {
    let d = b.t_degree().map_or(0, |d| d + 1);
    (0..d).map(|k| b.t_coeff(k).coeffs().iter().map(|r| r.to_string()).collect()).collect()
}

fn ungrid(g: &Grid) -> Result<BiPoly, String> {
    let rows = g
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| s.parse::<Rational>().map_err(|e| format!("bad rational {s:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()
                .map(QPoly::from_coeffs)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BiPoly::from_coeffs(rows))
}

fn file_name(lambda: &Composition, anchor: &str) -> String {
    let parts: Vec<String> = lambda.parts().iter().map(|p| p.to_string()).collect();
    format!("e-n{}-{}-{}.json", lambda.n(), parts.join("_"), anchor)
}

fn to_record(p: &MacdonaldPolynomial, anchor: &str) -> Record {
    Record {
        n: p.n(),
        lambda: p.lambda.parts().to_vec(),
        anchor: anchor.to_string(),
        terms: p
            .terms
            .iter()
            .map(|(e, c)| TermRecord { exps: e.clone(), num: grid(c.numerator()), den: grid(c.denominator()) })
            .collect(),
    }
}

fn from_record(r: Record) -> Result<MacdonaldPolynomial, String> {
    if r.lambda.len() != r.n {
        return Err("rank does not match composition".into());
    }
    let mut terms = Terms::new();
    for t in r.terms {
        if t.exps.len() != r.n {
            return Err("exponent length does not match rank".into());
        }
        let c = QTRational::new(ungrid(&t.num)?, ungrid(&t.den)?).map_err(|e| e.to_string())?;
        terms.insert(t.exps, c);
    }
    Ok(MacdonaldPolynomial { lambda: Composition::new(r.lambda), spec: Specialization::Generic, terms })
}

/// Summary of a load.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadReport {
    pub loaded: usize,
    pub verified: Option<Composition>,
}

/// Read all records for the current conventions, re-verify the smallest one against the
/// fillings formula, and only then fill the memo table.
pub fn load_cache(dir: &Path) -> Result<LoadReport, PersistError> {
    if !dir.exists() {
        return Ok(LoadReport { loaded: 0, verified: None });
    }
    let anchor = anchor_hash();
    let suffix = format!("-{anchor}.json");
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|f| f.to_str()).is_some_and(|f| f.starts_with("e-n") && f.ends_with(&suffix)))
        .collect();
    paths.sort();
    let mut polys = Vec::with_capacity(paths.len());
    for path in &paths {
        let malformed = |reason: String| PersistError::Malformed { file: path.display().to_string(), reason };
        let text = fs::read_to_string(path)?;
        let rec: Record = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
        if rec.anchor != anchor {
            return Err(malformed("anchor mismatch".into()));
        }
        polys.push(from_record(rec).map_err(malformed)?);
    }
    polys.sort_by(|a, b| (a.lambda.size(), &a.lambda).cmp(&(b.lambda.size(), &b.lambda)));
    let verified = match polys.first() {
        None => None,
        Some(p) => {
            if compute_e_fillings(&p.lambda).terms != p.terms {
                return Err(PersistError::Corrupted(p.lambda.clone()));
            }
            Some(p.lambda.clone())
        }
    };
    let loaded = polys.len();
    for p in polys {
        cache_insert(p);
    }
    Ok(LoadReport { loaded, verified })
}

/// Write every memoized polynomial that has no file yet. Returns the number written.
pub fn save_cache(dir: &Path) -> Result<usize, PersistError> {
    fs::create_dir_all(dir)?;
    let anchor = anchor_hash();
    let mut written = 0;
    for p in cache_snapshot() {
        let path = dir.join(file_name(&p.lambda, &anchor));
        if path.exists() {
            continue;
        }
        let tmp = path.with_extension("tmp");
        let text = serde_json::to_string(&to_record(&p, &anchor)).expect("records serialize");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        written += 1;
    }
    Ok(written)
}
