use std::path::Path;
use std::process::{Command, Output};

use sparchsim::matrix::load_matrix_market;
use sparchsim::scheduler::{huffman_schedule, leaf_weights, plan_cost, MergePlan};
use sparchsim::CsrMatrixI64;

fn sparchsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparchsim")).args(args).output().unwrap()
}

fn with_threads(threads: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparchsim")).env("SPARCHSIM_THREADS", threads).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_writes_full_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("stats.json");
    let o = sparchsim(&["run", "--rmat", "scale=9,ef=8", "--seed", "1", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out);
    for key in [
        "cycles",
        "seconds",
        "gflops",
        "multiplies",
        "adds",
        "partial_matrices",
        "rounds",
        "hit_rate",
        "bandwidth_utilization",
        "result_nnz",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["left", "right", "partial", "final"] {
        assert!(v["dram_read_bytes"][key].is_u64(), "missing read {key}");
    }
    for key in ["partial", "final"] {
        assert!(v["dram_write_bytes"][key].is_u64(), "missing write {key}");
    }
}

#[test]
fn prefetch_off_reads_more_right_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.mtx");
    assert_eq!(code(&sparchsim(&["gen", "--rmat", "scale=9,ef=8", "--seed", "4", "--out", p(&m)])), 0);
    let on = dir.path().join("on.json");
    let off = dir.path().join("off.json");
    assert_eq!(code(&sparchsim(&["run", "--a", p(&m), "--out", p(&on)])), 0);
    assert_eq!(code(&sparchsim(&["run", "--a", p(&m), "--flags", "no-prefetch", "--out", p(&off)])), 0);
    let right = |f: &Path| json(f)["dram_read_bytes"]["right"].as_u64().unwrap();
    assert!(right(&off) >= right(&on));
}

#[test]
fn dumped_plan_cost_matches_scheduler() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.mtx");
    let plan_path = dir.path().join("plan.json");
    sparchsim(&["gen", "--rmat", "scale=8,ef=8", "--seed", "2", "--out", p(&m)]);
    let o = sparchsim(&[
        "run",
        "--a",
        p(&m),
        "--hw",
        "tree_layers=3",
        "--dump-plan",
        p(&plan_path),
        "--out",
        p(&dir.path().join("s.json")),
    ]);
    assert_eq!(code(&o), 0);
    let plan: MergePlan = serde_json::from_value(json(&plan_path)).unwrap();
    let a: CsrMatrixI64 = load_matrix_market(&m).unwrap();
    let expected = huffman_schedule(&leaf_weights(&a, &a).unwrap(), 8);
    assert_eq!(plan_cost(&plan), plan_cost(&expected));
    assert_eq!(plan.way, 8);
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hw.json");
    std::fs::write(&cfg, r#"{ "tree_layers": 4, "multipliers": 8 }"#).unwrap();
    let plan_path = dir.path().join("plan.json");
    let way = |extra: &[&str]| {
        let mut args = vec!["run", "--rmat", "scale=6", "--dump-plan", p(&plan_path), "--out", "/dev/null"];
        args.extend_from_slice(extra);
        assert_eq!(code(&sparchsim(&args)), 0);
        json(&plan_path)["way"].as_u64().unwrap()
    };
    assert_eq!(way(&[]), 64);
    assert_eq!(way(&["--config", p(&cfg)]), 16);
    assert_eq!(way(&["--config", p(&cfg), "--hw", "tree_layers=5"]), 32);
    std::fs::write(&cfg, r#"{ "tree_layer": 4 }"#).unwrap();
    assert_eq!(code(&sparchsim(&["run", "--rmat", "scale=6", "--config", p(&cfg)])), 1);
}

#[test]
fn csv_stats_header_is_stable() {
    let o = sparchsim(&["run", "--rmat", "scale=6", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "cycles,seconds,gflops,read_left,read_right,read_partial,read_final,write_partial,write_final,\
         multiplies,adds,partial_matrices,rounds,hit_rate,bandwidth_utilization,result_nnz"
    );
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn verify_identity_and_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let id = dir.path().join("id.mtx");
    sparchsim::matrix::write_matrix_market(&CsrMatrixI64::identity(64), &id).unwrap();
    assert_eq!(code(&sparchsim(&["verify", "--a", p(&id)])), 0);
    assert_eq!(code(&sparchsim(&["verify", "--a", p(&id), "--value-type", "real", "--all-flags"])), 0);
    let o = sparchsim(&["verify", "--rmat", "scale=7,ef=8", "--matrices", "100"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("100 products"));
}

#[test]
fn verify_reports_injected_fault() {
    let o = sparchsim(&["verify", "--rmat", "scale=5", "--inject-fault"]);
    assert_eq!(code(&o), 3);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("first difference at ("), "{text}");
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["run"],
        vec!["run", "--rmat", "scale=5", "--a", "x.mtx"],
        vec!["run", "--rmat", "scale=5", "--flags", "no-such-flag"],
        vec!["run", "--rmat", "scale=5", "--hw", "warp_drive=9"],
        vec!["run", "--rmat", "scale=5", "--hw", "tree_layers=many"],
        vec!["run", "--rmat", "size=5"],
        vec!["run", "--a", "/nonexistent/m.mtx"],
        vec!["run", "--unknown"],
        vec!["sweep", "--rmat", "scale=5", "--axis", "tree_layers", "--values", ""],
        vec!["sweep", "--rmat", "scale=5", "--axis", "tree_layers", "--values", "9"],
        vec!["sweep", "--rmat", "scale=5", "--axis", "colour", "--values", "3"],
        vec!["model", "--n", "100", "--w", "1"],
        vec!["model", "--n", "100", "--hit-rate", "1.5"],
    ] {
        assert_eq!(code(&sparchsim(&args)), 1, "{args:?}");
    }
    assert_eq!(code(&with_threads("0", &["sweep", "--rmat", "scale=5", "--axis", "tree_layers", "--values", "3"])), 1);
}

#[test]
fn mismatched_dimensions_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.mtx");
    sparchsim::matrix::write_matrix_market(&CsrMatrixI64::identity(3), &b).unwrap();
    assert_eq!(code(&sparchsim(&["run", "--rmat", "scale=4", "--b", p(&b)])), 1);
}

fn sweep_csv(threads: &str, axis: &str, values: &str) -> Vec<csv::StringRecord> {
    let args = ["sweep", "--rmat", "scale=9,ef=8", "--matrices", "3", "--axis", axis, "--values", values];
    let o = with_threads(threads, &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    csv::Reader::from_reader(o.stdout.as_slice()).records().map(|r| r.unwrap()).collect()
}

fn column(rows: &[csv::StringRecord], idx: usize, value: &str) -> f64 {
    rows.iter().filter(|r| &r[2] == value).map(|r| r[idx].parse::<f64>().unwrap()).sum()
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let args = ["sweep", "--rmat", "scale=7", "--matrices", "3", "--axis", "buffer_lines", "--values", "256,1024"];
    let one = with_threads("1", &args);
    let four = with_threads("4", &args);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(String::from_utf8_lossy(&one.stdout).lines().count(), 7);
}

#[test]
fn tree_layer_gains_diminish() {
    let rows = sweep_csv("4", "tree_layers", "3,4,5,6,7,8");
    assert_eq!(rows.len(), 18);
    let gflops = |l: &str| column(&rows, 4, l);
    let early = gflops("6") - gflops("4");
    let late = gflops("8") - gflops("6");
    assert!(early > 0.0);
    assert!(late < early, "4->6 gained {early}, 6->8 gained {late}");
}

#[test]
fn longer_lines_never_add_traffic() {
    let rows = sweep_csv("4", "line_elements", "24,36,48,60");
    for m in 0..3 {
        let bytes: Vec<u64> = rows.iter().skip(m * 4).take(4).map(|r| r[5].parse().unwrap()).collect();
        assert!(bytes.windows(2).all(|w| w[1] <= w[0]), "{bytes:?}");
    }
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = (dir.path().join("x.mtx"), dir.path().join("y.mtx"));
    sparchsim(&["gen", "--rmat", "scale=8,ef=4", "--seed", "9", "--out", p(&x)]);
    sparchsim(&["gen", "--rmat", "scale=8,ef=4", "--seed", "9", "--out", p(&y)]);
    assert_eq!(std::fs::read(&x).unwrap(), std::fs::read(&y).unwrap());
    let m: CsrMatrixI64 = load_matrix_market(&x).unwrap();
    assert_eq!(m.num_rows(), 256);
}

#[test]
fn model_reports_traffic_steps() {
    let o = sparchsim(&["model", "--n", "140000", "--w", "64"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let close = |k: &str, want: f64| {
        let got = v[k].as_f64().unwrap();
        assert!((got / want - 1.0).abs() <= 0.05, "{k}: {got} vs {want}");
    };
    close("traffic_unoptimized", 13.9);
    close("traffic_condensed_total", 2.5);
    close("traffic_scheduled_total", 1.5);
    assert!((v["reread_factor"].as_f64().unwrap() - 6.7).abs() <= 0.15);

    let o = sparchsim(&["model", "--n", "50", "--w", "64", "--m", "1000"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rereads_exact"].as_f64().unwrap(), 0.0);
    assert_eq!(v["m"].as_f64().unwrap(), 1000.0);
}
