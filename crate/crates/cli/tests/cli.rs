use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn nsmac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsmac")).args(args).env_remove("MACDONALD_CACHE_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn constant_polynomial() {
    let o = nsmac(&["macdonald", "--n", "2", "--lambda", "0,0", "--spec", "t0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn norm_expansion() {
    // 1/((1-q)(1-q^2)) counts partitions into parts 1 and 2
    let o = nsmac(&["norm", "--n", "2", "--lambda", "0,2", "--max-q", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("1 + q + 2*q^2 + 2*q^3 + 3*q^4"), "{}", stdout(&o));
    let alt = nsmac(&["norm", "--n", "2", "--lambda", "0,2", "--max-q", "4", "--alt"]);
    assert_eq!(stdout(&o), stdout(&alt));
}

#[test]
fn verification_passes() {
    let o = nsmac(&["verify", "--identity", "gl-t0", "--n", "2", "--max-deg", "4", "--max-q", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("outcome: pass"));
    assert!(stderr(&o).contains("elapsed"));
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    for args in [
        vec!["macdonald", "--n", "2", "--lambda", "0,x"],
        vec!["macdonald", "--n", "3", "--lambda", "0,1"],
        vec!["norm", "--n", "2", "--lambda", "0,2", "--qt", "--max-q", "3"],
        vec!["norm", "--lambda", "0,2"],
        vec!["verify", "--identity", "nope", "--n", "2", "--max-deg", "2", "--max-q", "2"],
        vec!["verify", "--identity", "gl-qt", "--n", "3", "--max-deg", "2"],
        vec!["verify", "--identity", "gl-t0", "--n", "99", "--max-deg", "2", "--max-q", "2"],
        vec!["char", "--kind", "Z", "--n", "2", "--lambda", "0,1", "--max-deg", "2", "--max-q", "2"],
        vec!["frobnicate"],
        vec!["verify", "--unknown-flag"],
    ] {
        let o = nsmac(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr(&o).trim_end().lines().count(), 1, "{args:?}: {}", stderr(&o));
        assert!(stdout(&o).is_empty(), "{args:?}");
    }
}

#[test]
fn json_round_trips() {
    for args in [
        vec!["macdonald", "--n", "3", "--lambda", "0,2,1", "--format", "json"],
        vec!["macdonald", "--n", "2", "--lambda", "1,2", "--spec", "t0", "--max-q", "3", "--format", "json"],
        vec!["char", "--kind", "T", "--n", "2", "--lambda", "0,1", "--max-deg", "2", "--max-q", "3", "--format", "json"],
        vec!["verify", "--identity", "sl", "--n", "2", "--max-deg", "2", "--max-q", "3", "--format", "json"],
    ] {
        let o = nsmac(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let text = stdout(&o);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&v).unwrap(), text.trim_end(), "{args:?}");
    }
}

#[test]
fn json_record_shape() {
    let o = nsmac(&["macdonald", "--n", "2", "--lambda", "0,1", "--spec", "t0", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["variant"].is_string());
    assert!(v["policy"].is_object());
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    for t in terms {
        assert!(t["exps"].is_array() && t.get("coeff").is_some());
    }
}

#[test]
fn output_is_independent_of_jobs() {
    for format in ["text", "json"] {
        let run = |j: &str| nsmac(&["verify", "--identity", "gl-t0", "--n", "3", "--max-deg", "3", "--max-q", "4", "--jobs", j, "--format", format]);
        let (a, b) = (run("1"), run("6"));
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn appendix_table() {
    let o = nsmac(&["appendix", "--range", "3", "--max-q", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn cache_directory_is_used_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let with_cache = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_nsmac")).args(args).env("MACDONALD_CACHE_DIR", dir.path()).output().unwrap()
    };
    let args = ["macdonald", "--n", "3", "--lambda", "1,0,2"];
    let first = with_cache(&args);
    assert_eq!(first.status.code(), Some(0));
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!files.is_empty());
    let second = with_cache(&args);
    assert_eq!(first.stdout, second.stdout);
    assert!(stderr(&second).is_empty(), "{}", stderr(&second));

    // tamper with every stored record; the startup check notices and the cache is ignored
    for f in &files {
        let text = fs::read_to_string(f).unwrap();
        fs::write(f, text.replacen("[[\"1\"]]", "[[\"7\"]]", 1)).unwrap();
    }
    let third = with_cache(&args);
    assert_eq!(third.status.code(), Some(0));
    assert_eq!(first.stdout, third.stdout);
    assert!(stderr(&third).contains("ignoring cache"), "{}", stderr(&third));
}
