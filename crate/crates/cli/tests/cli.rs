use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ces-ge")).args(args).output().expect("spawn ces-ge")
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, n: usize, seed: u64, noise: f64) -> PathBuf {
    let out = dir.join(format!("bundle_{n}_{seed}_{noise}"));
    ok(&["synth", "--n", &n.to_string(), "--seed", &seed.to_string(), "--noise", &noise.to_string(), "--out", s(&out)]);
    out
}

fn estimate(bundle: &Path, out: &Path, extra: &[&str]) -> Output {
    let p0 = bundle.join("period0.manifest");
    let p1 = bundle.join("period1.manifest");
    let mut args = vec!["estimate", "--period0", s(&p0), "--period1", s(&p1), "--seed", "11", "--out", s(out)];
    args.extend_from_slice(extra);
    run(&args)
}

/// CSV as a list of header-keyed rows.
fn table(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let t = TempDir::new().unwrap();
    let a = t.path().join("a");
    let b = t.path().join("b");
    for d in [&a, &b] {
        ok(&["synth", "--n", "12", "--seed", "7", "--noise", "0.02", "--out", s(d)]);
    }
    assert_eq!(files(&a), files(&b));
    let c = t.path().join("c");
    ok(&["synth", "--n", "12", "--seed", "8", "--noise", "0.02", "--out", s(&c)]);
    assert_ne!(files(&a), files(&c));
}

#[test]
fn one_sector_bundle_validates() {
    let t = TempDir::new().unwrap();
    let b = synth(t.path(), 1, 3, 0.0);
    let truth = table(&b.join("truth.csv"));
    assert_eq!(truth.len(), 1);
    // a one-sector economy has two factors, too few to estimate
    let out = estimate(&b, &t.path().join("e"), &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn noiseless_roundtrip_through_files() {
    let t = TempDir::new().unwrap();
    let b = synth(t.path(), 20, 5, 0.0);
    let e = t.path().join("e");
    let out = estimate(&b, &e, &["--bootstrap-reps", "50"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let truth = table(&b.join("truth.csv"));
    let est = table(&e.join("estimates.csv"));
    assert_eq!(truth.len(), est.len());
    for (tr, er) in truth.iter().zip(&est) {
        assert_eq!(er["accepted_null"], "false");
        assert!((num(er, "gamma") - num(tr, "gamma")).abs() <= 1e-8, "sector {}", er["sector"]);
        assert!((num(er, "tfpg") - num(tr, "ln_z")).abs() <= 1e-8, "sector {}", er["sector"]);
        assert!((num(er, "ci_hi") - num(er, "ci_lo")).abs() <= 1e-9);
    }
    let agree = table(&e.join("agreement.csv"));
    assert_eq!(
        agree.iter().map(|r| r["subset"].as_str()).collect::<Vec<_>>(),
        ["slope", "slope-only", "slope-and-constant", "bootstrap"]
    );
}

#[test]
fn estimate_reruns_are_byte_identical_in_any_execution_mode() {
    let t = TempDir::new().unwrap();
    let b = synth(t.path(), 15, 2, 0.05);
    let outs: Vec<PathBuf> = ["r1", "r2", "r3"].iter().map(|n| t.path().join(n)).collect();
    assert!(estimate(&b, &outs[0], &["--json"]).status.success());
    assert!(estimate(&b, &outs[1], &["--json"]).status.success());
    assert!(estimate(&b, &outs[2], &["--json", "--sequential"]).status.success());
    assert_eq!(files(&outs[0]), files(&outs[1]));
    assert_eq!(files(&outs[0]), files(&outs[2]));
    let names: Vec<String> = files(&outs[0]).into_iter().map(|f| f.0).collect();
    for n in names.iter().filter(|n| n.ends_with(".csv")) {
        assert!(names.contains(&n.replace(".csv", ".json")), "{n} lacks a JSON twin");
    }
}

#[test]
fn noisy_bundle_accepts_some_nulls() {
    let t = TempDir::new().unwrap();
    let b = synth(t.path(), 30, 1, 0.5);
    let e = t.path().join("e");
    let out = estimate(&b, &e, &["--alpha", "0.1", "--bootstrap-reps", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let est = table(&e.join("estimates.csv"));
    let nulls: Vec<_> = est.iter().filter(|r| r["accepted_null"] == "true").collect();
    assert!(!nulls.is_empty());
    for r in nulls {
        assert_eq!(num(r, "sigma"), 1.0);
        assert_eq!(num(r, "gamma"), 0.0);
        assert!(r["tfpg"].is_empty());
    }
}

#[test]
fn input_errors_exit_2() {
    let t = TempDir::new().unwrap();
    let b = synth(t.path(), 5, 1, 0.0);
    fs::remove_file(b.join("deflators.csv")).unwrap();
    let out = estimate(&b, &t.path().join("e"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("deflators.csv"));

    let b = synth(t.path(), 5, 2, 0.0);
    let missing = t.path().join("nope.manifest");
    let out = run(&["estimate", "--period0", s(&missing), "--period1", s(&b.join("period1.manifest")), "--out", s(t.path())]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(b.join("A_2000.csv"), fs::read_to_string(b.join("A_2000.csv")).unwrap().replacen("0.", "-0.", 1)).unwrap();
    let out = estimate(&b, &t.path().join("e2"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative coefficient"));

    let econ = b.join("economy.manifest");
    for bad in ["sector=6,factor=2", "sector=1,factor=0", "sector=S1"] {
        let out = run(&["shock", "--economy", s(&econ), "--method", "leontief", "--shock", bad, "--out", s(t.path())]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
    }
    let out = run(&["shock", "--economy", s(&econ), "--method", "bogus", "--shock", "sector=1,factor=2", "--out", s(t.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn no_estimable_sectors_exit_3() {
    let t = TempDir::new().unwrap();
    let b = synth(t.path(), 2, 4, 0.0);
    let out = estimate(&b, &t.path().join("e"), &["--exclude-diagonal"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(estimate(&b, &t.path().join("e2"), &[]).status.success());
}

#[test]
fn identity_shock_saves_nothing_under_every_method() {
    let t = TempDir::new().unwrap();
    let b = synth(t.path(), 10, 6, 0.0);
    let e = t.path().join("e");
    assert!(estimate(&b, &e, &["--bootstrap-reps", "0"]).status.success());
    let sh = t.path().join("s");
    ok(&[
        "shock", "--economy", s(&b.join("economy.manifest")), "--estimates", s(&e.join("estimates.csv")),
        "--method", "leontief,cobb-douglas,ces,ces-all,ces-paper-closed-form", "--shock", "sector=4,factor=1.0",
        "--out", s(&sh), "--json",
    ]);
    let summary = table(&sh.join("shock_summary.csv"));
    assert_eq!(summary.len(), 5);
    for r in &summary {
        assert!(num(r, "scs_total").abs() <= 1e-10, "{}", r["method"]);
    }
    for r in table(&sh.join("shock_result.csv")) {
        assert!((num(&r, "pi") - 1.0).abs() <= 1e-10);
        assert!((num(&r, "v") - num(&r, "v_prime")).abs() <= 1e-10);
    }
    assert!(sh.join("shock_summary.json").exists());
}

#[test]
fn one_sector_leontief_doubling_saves_two_thirds_of_demand() {
    let t = TempDir::new().unwrap();
    let d = t.path();
    fs::write(d.join("labels.csv"), "label\nconcrete\n").unwrap();
    fs::write(d.join("A.csv"), "concrete\n0.5\n").unwrap();
    fs::write(d.join("a0.csv"), "concrete\n0.5\n").unwrap();
    fs::write(d.join("d.csv"), "d\n3\n").unwrap();
    fs::write(d.join("e.manifest"), "year = 2000\nA = A.csv\na0 = a0.csv\nd = d.csv\nlabels = labels.csv\n").unwrap();
    let out = d.join("out");
    ok(&["shock", "--economy", s(&d.join("e.manifest")), "--method", "leontief", "--shock", "sector=concrete,factor=2", "--out", s(&out)]);
    let summary = table(&out.join("shock_summary.csv"));
    assert!((num(&summary[0], "scs_total") - 2.0).abs() < 1e-12);
}

#[test]
fn upstream_doubling_saves_about_half_its_output() {
    let t = TempDir::new().unwrap();
    let b = synth(t.path(), 30, 9, 0.0);
    let out = t.path().join("s");
    ok(&["shock", "--economy", s(&b.join("economy.manifest")), "--method", "leontief", "--shock", "sector=17,factor=2", "--out", s(&out)]);
    let r = &table(&out.join("shock_summary.csv"))[0];
    let ratio = num(r, "scs_total") / num(r, "shocked_output");
    assert!((ratio - 0.5).abs() <= 0.05, "ratio {ratio}");
}

#[test]
fn missing_estimates_for_ces_is_an_input_error() {
    let t = TempDir::new().unwrap();
    let b = synth(t.path(), 4, 1, 0.0);
    let out = run(&["shock", "--economy", s(&b.join("economy.manifest")), "--method", "ces", "--shock", "sector=1,factor=2", "--out", s(t.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn proposition_reports() {
    let t = TempDir::new().unwrap();
    let b = synth(t.path(), 8, 3, 0.0);
    let econ = b.join("economy.manifest");
    for dir in ["up", "down"] {
        let out = t.path().join(dir);
        ok(&["proposition", "--economy", s(&econ), "--direction", dir, "--trials", "40", "--out", s(&out)]);
        let rows = table(&out.join("proposition_report.csv"));
        assert!(rows.len() >= 6);
        for r in rows.iter().filter(|r| r["kind"] == "uniform") {
            assert_eq!(r["holds"], "true", "gamma {}", r["gamma"]);
        }
        let remark: Vec<_> = rows.iter().filter(|r| r["kind"] == "remark-witness").collect();
        assert!(!remark.is_empty());
        assert!(remark.iter().all(|r| r["holds"] == "false" || r["note"].starts_with("none found")));
    }

    let out = t.path().join("flat");
    ok(&["proposition", "--economy", s(&econ), "--shock", "sector=1,factor=1", "--trials", "5", "--out", s(&out)]);
    let scs = table(&out.join("proposition_scs.csv"));
    assert_eq!(scs.len(), 5 * 8);
    assert!(scs.iter().all(|r| num(r, "scs").abs() <= 1e-12));

    let out = run(&["proposition", "--economy", s(&econ), "--gamma-grid", "0,1.5", "--out", s(t.path())]);
    assert_eq!(out.status.code(), Some(2));
}
