use std::process::Command;

fn duelsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_duelsim")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = duelsim(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().trim().to_string()
}

#[test]
fn bounds_print_single_values() {
    assert_eq!(stdout(&["bounds", "n-schedule", "--m", "1", "--T", "200000", "--mean-delay", "100"]), "893");
    assert_eq!(
        stdout(&["bounds", "n-schedule", "--m", "1", "--T", "200000", "--mean-delay", "100", "--aggregated"]),
        "2114"
    );
    let c: f64 = stdout(&["bounds", "c-delta", "--alpha", "1", "--window", "1000", "--k", "6", "--delta", "0.1"])
        .parse()
        .unwrap();
    assert!((c - 900_900.0).abs() < 1e-6);
    let gap: f64 = stdout(&["bounds", "lower-bound", "--k", "10", "--T", "100000", "--gap"]).parse().unwrap();
    assert!((gap - 8.385e-4).abs() < 1e-6);
    let mrr: f64 = stdout(&["bounds", "mrr", "--dataset", "arithmetic", "--T", "200000", "--mean-delay", "100"])
        .parse()
        .unwrap();
    assert!(mrr > 0.0);
    let rucb: f64 = stdout(&[
        "bounds", "rucb-delay", "--gaps", "0.1,0.2", "--alpha", "2", "--window", "10", "--T", "10000",
    ])
    .parse()
    .unwrap();
    assert!(rucb > 0.0);
}

#[test]
fn errors_are_one_line_and_nonzero() {
    for args in [
        &["bounds", "rucb-delay", "--gaps", "0.1", "--alpha", "1", "--window", "10", "--T", "100"][..],
        &["run", "--dataset", "chess", "--policy", "rucb-delay"][..],
        &["run", "--dataset", "arithmetic", "--policy", "thompson"][..],
        &["run", "--dataset", "arithmetic", "--policy", "rucb-delay", "--aggregated", "--T", "10"][..],
    ] {
        let out = duelsim(args);
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim().lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "));
    }
}

#[test]
fn datasets_list_names_every_builtin() {
    let listing = stdout(&["datasets", "list"]);
    for name in ["six-rankers", "mslr", "tennis", "arithmetic", "car", "sushi"] {
        assert!(listing.contains(name));
    }
    assert_eq!(listing.lines().count(), 6);
}

#[test]
fn run_writes_outputs_and_flags_override_paper_scale() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let line = stdout(&[
        "run", "--dataset", "arithmetic:5", "--policy", "rucb-baseline", "--paper-scale", "--T", "1000", "--runs",
        "2", "--stride", "100", "--out", out.to_str().unwrap(),
    ]);
    assert!(line.contains("T = 1000"), "{line}");
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 11);
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 21);
}
