use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("convexlab-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convexlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn solve_writes_dump_and_respects_force() {
    let out = scratch("solve");
    let args = ["solve", "--domain", &fixture("disc.json"), "--h", "0.03125"];
    assert_eq!(run(&args, &out).status.code(), Some(0));
    let dump = read(out.join("solution.csv"));
    assert!(dump.starts_with("# {") && dump.contains("i,j,x,y,u,hB11,hB12,hB22,kappa"));
    assert!(read(out.join("residuals.csv")).starts_with("iteration,residual_sup"));
    let again = run(&args, &out);
    assert_eq!(again.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&again.stderr).contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(run(&forced, &out).status.code(), Some(0));
    assert_eq!(read(out.join("solution.csv")), dump);
}

#[test]
fn compare_is_seeded_and_reproducible() {
    let (a, b) = (scratch("cmp-a"), scratch("cmp-b"));
    let args = [
        "compare",
        "--domain",
        &fixture("square.json"),
        "--pairs",
        "200",
        "--seed",
        "7",
    ];
    assert_eq!(run(&args, &a).status.code(), Some(0));
    assert_eq!(run(&args, &b).status.code(), Some(0));
    let csv = read(a.join("audit.csv"));
    assert!(csv.starts_with("# seed=7 "));
    assert_eq!(csv.lines().count(), 202);
    assert_eq!(csv, read(b.join("audit.csv")));
    assert!(!csv.contains(",false"));
}

#[test]
fn compare_json_format() {
    let out = scratch("cmp-json");
    let args = [
        "compare",
        "--domain",
        &fixture("triangle.json"),
        "--pairs",
        "20",
        "--seed",
        "3",
        "--h",
        "0.03125",
        "--format",
        "json",
    ];
    assert_eq!(run(&args, &out).status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&read(out.join("audit.json"))).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["rows"].as_array().unwrap().len(), 20);
}

#[test]
fn spectrum_of_limit_set() {
    let out = scratch("spec");
    let o = run(
        &[
            "spectrum",
            "--generators",
            &fixture("triangle_diag.json"),
            "--depth",
            "6",
        ],
        &out,
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = read(out.join("spectrum.csv"));
    assert!(csv
        .lines()
        .any(|l| l == "word,l_H_eig,l_H_dyn,l_B_upper,pass"));
    let a = csv.lines().find(|l| l.starts_with("a,")).unwrap();
    let l: f64 = a.split(',').nth(1).unwrap().parse().unwrap();
    assert!((l - 4f64.ln()).abs() < 1e-9);
}

#[test]
fn spectrum_on_a_given_domain() {
    let out = scratch("spec-dom");
    let args = [
        "spectrum",
        "--generators",
        &fixture("triangle_t.json"),
        "--domain",
        &fixture("triangle.json"),
    ];
    assert_eq!(run(&args, &out).status.code(), Some(0));
    let csv = read(out.join("spectrum.csv"));
    assert!(csv.lines().filter(|l| l.ends_with(",true")).count() == 4);
}

#[test]
fn failed_audit_exits_with_two() {
    // Boost whose axis passes far from the base point: the orbit average at
    // n = 200 still exceeds the translation length by more than the tolerance.
    let out = scratch("spec-fail");
    let args = [
        "spectrum",
        "--generators",
        &data("offaxis_boost.json"),
        "--domain",
        &fixture("disc.json"),
        "--h",
        "0.03125",
    ];
    assert_eq!(run(&args, &out).status.code(), Some(2));
    assert!(read(out.join("spectrum.csv"))
        .lines()
        .any(|l| l.starts_with("g,") && l.ends_with(",false")));
}

#[test]
fn generators_must_preserve_the_domain() {
    let out = scratch("spec-inv");
    let args = [
        "spectrum",
        "--generators",
        &fixture("triangle_t.json"),
        "--domain",
        &fixture("square.json"),
    ];
    let o = run(&args, &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not preserve"));
}

#[test]
fn entropy_csv_and_plot() {
    let out = scratch("ent");
    let args = [
        "entropy",
        "--domain",
        &fixture("disc.json"),
        "--R",
        "0.5,1,1.5",
        "--seed",
        "11",
    ];
    assert_eq!(run(&args, &out).status.code(), Some(0));
    let csv = read(out.join("entropy.csv"));
    assert!(csv.starts_with("# seed=11\n"));
    assert!(csv.contains("R,volume,log_volume,slope_window\n"));
    assert!(read(out.join("entropy.svg")).starts_with("<svg"));
    let too_far = run(
        &["entropy", "--domain", &fixture("disc.json"), "--R", "1,2,5"],
        &scratch("ent-far"),
    );
    assert_eq!(too_far.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&too_far.stderr).contains("R_max"));
}

#[test]
fn chord_metrics_and_plots() {
    let (out, met, plot) = (scratch("chord"), scratch("metrics"), scratch("plot"));
    let tri = fixture("triangle.json");
    assert_eq!(
        run(
            &["chord", "--domain", &tri, "--h", "0.03125", "--chords", "3"],
            &out
        )
        .status
        .code(),
        Some(0)
    );
    assert_eq!(read(out.join("chords.csv")).lines().count(), 5);
    assert!(
        read(out.join("chord_2.svg")).contains("alpha&#39;&#39;")
            || read(out.join("chord_2.svg")).contains("alpha''")
    );
    assert_eq!(
        run(
            &["metrics", "--domain", &tri, "--h", "0.03125", "--format", "json"],
            &met
        )
        .status
        .code(),
        Some(0)
    );
    let m: serde_json::Value = serde_json::from_str(&read(met.join("metrics.json"))).unwrap();
    assert!(m["metrics"]["c_est"].as_f64().unwrap() > 1.0);
    assert_eq!(
        run(&["plot", "--domain", &tri, "--h", "0.03125"], &plot)
            .status
            .code(),
        Some(0)
    );
    for f in ["glyphs.svg", "alpha_profile.svg", "volumes.svg"] {
        assert!(read(plot.join(f)).ends_with("</svg>\n"));
    }
}

#[test]
fn operational_errors_exit_with_one() {
    let dir = scratch("errs");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"type": "ellipse", "center": [0, 0]}"#).unwrap();
    let o = run(
        &["solve", "--domain", bad.to_str().unwrap()],
        &dir.join("out"),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("semi_axes"));
    assert_eq!(run(&["solve"], &dir.join("out")).status.code(), Some(1));
    let nc = run(
        &[
            "solve",
            "--domain",
            &fixture("square.json"),
            "--h",
            "0.0625",
            "--tol",
            "1e-30",
        ],
        &dir.join("nc"),
    );
    assert_eq!(nc.status.code(), Some(1));
    assert!(read(dir.join("nc/residual_trace.csv")).starts_with("iteration,residual_sup\n"));
}
