use std::process::{Command, Output};

use entperc::lattice::LatticeKind;
use entperc::report::COLUMNS;
use entperc::series::theta_series;

fn entperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entperc"))
        .args(args)
        .env_remove("ENTPERC_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn records(text: &str) -> Vec<csv::StringRecord> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), COLUMNS);
    rd.records().map(|r| r.unwrap()).collect()
}

#[test]
fn series_prints_the_enumerated_polynomial() {
    let text = stdout(&entperc(&["series", "--lattice", "hexagonal", "--order", "6"]));
    let want = theta_series(LatticeKind::Hexagonal, 6).unwrap();
    assert_eq!(text.trim_end(), want.to_string());
    assert!(text.starts_with("1 - 1*q^3 - 3*q^4 - 6*q^5 - "));
    assert!(text.trim_end().ends_with("(order 6)"));

    let published = stdout(&entperc(&["series", "--lattice", "square", "--published"]));
    assert_eq!(published.trim_end(), "1 - 1*q^4 - 4*q^6 (order 6)");
}

#[test]
fn scp_values() {
    assert_eq!(stdout(&entperc(&["scp", "--distill", "0.75,0.75"])), "0.875\n");
    assert_eq!(stdout(&entperc(&["scp", "--alpha0", "0.75"])), "0.5\n");
    let sat = (2.0 - 2f64.sqrt()).to_string();
    assert_eq!(stdout(&entperc(&["scp", "--cep2", &sat])), "1\n");
    assert_eq!(entperc(&["scp"]).status.code(), Some(2));
    assert_eq!(entperc(&["scp", "--alpha0", "0.3"]).status.code(), Some(2));
}

#[test]
fn theta_at_full_density() {
    let text = stdout(&entperc(&["theta", "--lattice", "square", "--p", "1.0", "--L", "8", "--n", "1"]));
    assert!(text.starts_with("# schema=1\n"));
    assert!(text.lines().any(|l| l.starts_with("# generated=")));
    let rows = records(&text);
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!((&r[0], &r[1], &r[4], &r[5]), ("theta", "square", "8", "1"));
    assert_eq!(r[6].parse::<f64>().unwrap(), 1.0);
    assert_eq!(r[7].parse::<f64>().unwrap(), 0.0);
    assert_eq!(&r[8], "1");
}

#[test]
fn density_lists_give_one_row_each() {
    let text = stdout(&entperc(&[
        "pi", "--lattice", "triangular", "--p", "0.3,0.6", "--nodes", "0,0;1,-1", "--L", "8", "--n", "10",
        "--no-timestamp",
    ]));
    let rows = records(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows.iter().map(|r| r[2].to_string()).collect::<Vec<_>>(), ["0.3", "0.6"]);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocked = dir.path().join("missing").join("out.csv");
    for args in [
        vec!["theta", "--bogus"],
        vec!["frobnicate"],
        vec!["theta", "--lattice", "square", "--p", "1.5"],
        vec!["theta", "--lattice", "square", "--p", "0.5", "--L", "0"],
        vec!["theta", "--lattice", "octagonal", "--p", "0.5"],
        vec!["theta", "--lattice", "asym", "--p", "0.5"],
        vec!["theta", "--lattice", "dhex", "--p", "0.5", "--L", "7"],
        vec!["theta", "--lattice", "square", "--p", "0.5", "--out", blocked.to_str().unwrap()],
        vec!["phase-diagram", "--resolution", "5"],
        vec!["compare", "kagome", "--crossover", "--grid", "0.7"],
        vec!["compare", "kagome", "--grid", "0.7,0.6"],
        vec!["theta", "--lattice", "square", "--p", "0.5", "--threads", "0"],
    ] {
        let out = entperc(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn statistical_failures_exit_with_three() {
    // Square bonds alone span the patch, so there is nothing to bracket.
    let out = entperc(&["pc", "--lattice", "asym", "--p2", "1", "--L", "8", "--n", "20"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_runs_leave_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pc.csv");
    let p = path.to_str().unwrap();
    let out = entperc(&["pc", "--lattice", "asym", "--p2", "1", "--L", "8", "--n", "20", "--out", p]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!path.exists());

    let out = entperc(&["theta", "--lattice", "kagome", "--p", "0.7", "--L", "8", "--n", "4", "--out", p]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(records(&std::fs::read_to_string(&path).unwrap()).len(), 1);
}

#[test]
fn command_line_overrides_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "lattice = \"kagome\"\np = [0.6, 0.8]\nL = 8\nn = 16\nseed = 5\nno_timestamp = true\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();

    let from_file = stdout(&entperc(&["theta", "--config", c]));
    assert!(!from_file.contains("# generated="));
    let rows = records(&from_file);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| &r[1] == "kagome" && &r[4] == "8" && &r[5] == "16" && &r[8] == "5"));

    let overridden = stdout(&entperc(&["theta", "--config", c, "--seed", "7", "--p", "0.9"]));
    let rows = records(&overridden);
    assert_eq!(rows.len(), 1);
    assert_eq!((&rows[0][2], &rows[0][8]), ("0.9", "7"));
    assert!(overridden.contains("# seed=7\n"));

    std::fs::write(&cfg, "lattice = \"kagome\"\nsede = 5\n").unwrap();
    assert_eq!(entperc(&["theta", "--config", c, "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(entperc(&["theta", "--config", "/nonexistent.toml"]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "compare", "dhex", "--grid", "0.5,0.7", "--L", "24", "--n", "40", "--seed", "3", "--no-timestamp",
    ];
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_entperc"))
            .args(args)
            .env("ENTPERC_THREADS", threads)
            .output()
            .unwrap();
        stdout(&out)
    };
    let one = run("1");
    assert_eq!(run("3"), one);
    assert_eq!(entperc(&["theta", "--lattice", "square", "--p", "0.5"]).status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_entperc"))
        .args(["scp", "--alpha0", "0.6"])
        .env("ENTPERC_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
