use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_invbanach"))
}

fn corpus() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn corpus_is_byte_identical_across_runs() {
    let files = corpus();
    assert!(files.len() >= 10);
    for f in files {
        let p = f.to_str().unwrap();
        let a = run(&["--scenario", p]);
        let b = run(&["--scenario", p]);
        assert_eq!(a, b, "{p}");
        let expected = if p.ends_with("separate_obstruction.json") { 1 } else { 0 };
        assert_eq!(a.0, expected, "{p}: {}", a.1);
    }
}

#[test]
fn obstruction_reports_point_not_invariant() {
    let f = corpus().into_iter().find(|p| p.ends_with("separate_obstruction.json")).unwrap();
    let (code, out) = run(&["--scenario", f.to_str().unwrap()]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["error"]["kind"], "PointNotInvariant");
}

#[test]
fn seed_override_is_recorded() {
    let f = corpus().into_iter().find(|p| p.ends_with("gallery_dstar.json")).unwrap();
    let (code, out) = run(&["--scenario", f.to_str().unwrap(), "--seed", "42"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["seed"], 42);
}

#[test]
fn csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = corpus().into_iter().find(|p| p.ends_with("gallery_xw.json")).unwrap();
    let out = dir.path().join("g.csv");
    let (code, _) = run(&["--scenario", g.to_str().unwrap(), "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("construction,n,cutoff,certified_bound,empirical_min\nxw,6,3,"));

    let l = corpus().into_iter().find(|p| p.ends_with("perturb_lindenstrauss.json")).unwrap();
    let (code, text) = run(&["--scenario", l.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(text.starts_with("k,eps_k,norm_Tk,defect_k\n1,0.0375,"));

    let s = corpus().into_iter().find(|p| p.ends_with("separate_invariant.json")).unwrap();
    let (_, text) = run(&["--scenario", s.to_str().unwrap(), "--format", "csv"]);
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("/report/margin,"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"command":"orbits","params":{"group":{"degree":"three"}}}"#).unwrap();
    let (code, out) = run(&["--scenario", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["error"]["path"], "/params/group/degree");

    std::fs::write(&bad, r#"{"command":"nope"}"#).unwrap();
    assert_eq!(run(&["--scenario", bad.to_str().unwrap()]).0, 2);

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["--scenario", missing.to_str().unwrap()]).0, 2);

    let f = corpus().into_iter().next().unwrap();
    let out = dir.path().join("no/such/dir/out.json");
    assert_eq!(run(&["--scenario", f.to_str().unwrap(), "--out", out.to_str().unwrap()]).0, 2);
}

#[test]
fn thread_cap_does_not_change_output() {
    let f = corpus().into_iter().find(|p| p.ends_with("gallery_c0.json")).unwrap();
    let a = bin().args(["--scenario", f.to_str().unwrap()]).env("INVBANACH_THREADS", "1").output().unwrap();
    let b = bin().args(["--scenario", f.to_str().unwrap()]).env("INVBANACH_THREADS", "4").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}
