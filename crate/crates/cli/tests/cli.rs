use std::path::Path;
use std::process::{Command, Output};

fn nsopt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsopt"))
        .args(args)
        .current_dir(dir)
        .env("NSOPT_THREADS", "2")
        .output()
        .unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn gen_is_deterministic_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a.json", "b.json"] {
        let o = nsopt(d, &["gen", "lasso", "--n", "30", "--m", "30", "--seed", "42", "--norm", "l1", "--out", out]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(d.join("a.json")).unwrap(), std::fs::read(d.join("b.json")).unwrap());

    let o = nsopt(d, &["gen", "maxcut", "--n", "10", "--reg", "l1", "--eta", "1", "--seed", "7", "--out", "m.json"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("dim 10"));

    let o = nsopt(d, &["gen", "lasso", "--n", "0", "--out", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.join("bad.json").exists());
}

#[test]
fn gen_reads_libsvm_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.txt"), "1 1:1 2:0.5\n-1 2:2\n0.5 1:-1\n").unwrap();
    let o = nsopt(dir.path(), &["gen", "libsvm", "--input", "d.txt", "--out", "l.json"]);
    assert!(o.status.success());
    std::fs::write(dir.path().join("bad.txt"), "1 1:1\n2 3:1 2:1\n").unwrap();
    let o = nsopt(dir.path(), &["gen", "libsvm", "--input", "bad.txt", "--out", "x.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn solve_writes_a_reproducible_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(nsopt(d, &["gen", "lasso", "--n", "20", "--m", "20", "--out", "p.json"]).status.success());
    let run = |out: &str| nsopt(d, &["solve", "--problem", "p.json", "--alg", "alg1", "--iters", "1000", "--out", out]);
    assert!(run("t1.csv").status.success());
    assert!(d.join("p.ref.json").exists());
    assert!(run("t2.csv").status.success());

    let t1 = std::fs::read_to_string(d.join("t1.csv")).unwrap();
    let t2 = std::fs::read_to_string(d.join("t2.csv")).unwrap();
    assert!(t1.contains("# start_seed: 1000"));
    assert!(t1.contains("# config: {"));
    assert!(t1.contains("# reference_f: 13.0433835135"));
    assert!(t1.lines().any(|l| l == "iter,elapsed_ms,objective,gap,mu,beta,stepsize,grad_map_norm"));
    let (r1, r2) = (data_rows(&t1), data_rows(&t2));
    assert_eq!(r1.len(), 1000);
    for (a, b) in r1.iter().zip(&r2) {
        let drop_elapsed = |l: &str| l.split(',').enumerate().filter(|(i, _)| *i != 1).map(|(_, v)| v.to_string()).collect::<Vec<_>>();
        assert_eq!(drop_elapsed(a), drop_elapsed(b));
    }
    let gap: f64 = r1[999].split(',').nth(3).unwrap().parse().unwrap();
    assert!((0.0..1.0).contains(&gap));
}

#[test]
fn solve_without_reference_falls_back() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(nsopt(d, &["gen", "lasso", "--n", "10", "--m", "10", "--out", "p.json"]).status.success());
    let o = nsopt(d, &["solve", "--problem", "p.json", "--iters", "50", "--no-reference", "--out", "t.csv"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("falling back to 1.0"));
    let t = std::fs::read_to_string(d.join("t.csv")).unwrap();
    assert!(t.contains("# mu0: 1 (auto fallback"));
    assert!(t.contains("# reference_f: none"));
    assert_eq!(data_rows(&t)[0].split(',').nth(3), Some("nan"));
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(nsopt(d, &["gen", "mpc", "--out", "mpc.json"]).status.success());
    let o = nsopt(d, &["solve", "--problem", "mpc.json", "--alg", "cp", "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported: multiple nonsmooth terms"));

    let o = nsopt(d, &["solve", "--problem", "missing.json", "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(3));

    assert!(nsopt(d, &["gen", "lasso", "--n", "5", "--m", "5", "--out", "p.json"]).status.success());
    let o = nsopt(
        d,
        &["solve", "--problem", "p.json", "--alg", "sgd", "--step-scale", "1e20", "--iters", "10", "--no-reference", "--out", "t.csv"],
    );
    assert_eq!(o.status.code(), Some(4));

    let o = nsopt(d, &["solve", "--problem", "p.json", "--iters", "10", "--checkpoints", "1", "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_writes_traces_report_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = nsopt(d, &["bench", "--suite", "lasso-l1", "--n", "20", "--iters", "300", "--out-dir", "b"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = d.join("b");
    for alg in ["alg1", "td", "nes", "sgd", "cp", "admm"] {
        let t = std::fs::read_to_string(b.join(format!("{alg}.csv"))).unwrap();
        assert_eq!(data_rows(&t).len(), 300, "{alg}");
    }
    let admm = std::fs::read_to_string(b.join("admm.csv")).unwrap();
    assert!(["# rho: 0.1", "# rho: 1", "# rho: 10"].iter().any(|r| admm.lines().any(|l| l == *r)));

    let report = std::fs::read_to_string(b.join("report.csv")).unwrap();
    let rows = data_rows(&report);
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert_eq!(row.split(',').count(), 5 + 10);
        assert!(row.split(',').skip(5).all(|g| g.parse::<f64>().unwrap() >= 0.0));
    }
    assert!(report.contains("gap_30,") && report.contains("gap_300\n"));
    let svg = std::fs::read_to_string(b.join("gaps.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 6);
}

#[test]
fn bench_records_unsupported_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let o = nsopt(dir.path(), &["bench", "--suite", "mpc", "--algs", "alg1,cp", "--iters", "50", "--out-dir", "b"]);
    assert!(o.status.success());
    let report = std::fs::read_to_string(dir.path().join("b/report.csv")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("cp,failed: unsupported")));
    assert!(!dir.path().join("b/cp.csv").exists());

    let o = nsopt(dir.path(), &["bench", "--suite", "mpc", "--algs", "cp", "--iters", "50", "--out-dir", "c"]);
    assert_eq!(o.status.code(), Some(2));
    let o = nsopt(dir.path(), &["bench", "--suite", "nope", "--out-dir", "c"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn audit_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = nsopt(dir.path(), &["audit", "--suite", "schedule", "--seed", "7"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);

    let o = nsopt(dir.path(), &["audit", "--suite", "bound7", "--seed", "7"]);
    assert!(o.status.success());

    // The empirical tail-rate threshold is not met (see the README).
    let o = nsopt(dir.path(), &["audit", "--suite", "tail-rate", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("FAIL"));
}
