use std::path::Path;
use std::process::{Command, Output};

fn aoi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoi"))
        .args(args)
        .output()
        .expect("spawn aoi")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header and rows, comments stripped.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn assert_finite(rows: &[Vec<String>]) {
    for row in rows {
        for cell in row {
            if let Ok(x) = cell.parse::<f64>() {
                assert!(x.is_finite(), "{cell}");
            }
            assert!(!cell.eq_ignore_ascii_case("nan") && !cell.contains("inf"));
        }
    }
}

#[test]
fn analytic_schema() {
    let text = stdout(&aoi(&[
        "analytic", "--n", "20", "--lambda", "1", "--mu", "5",
    ]));
    assert!(text.starts_with("# pull-aoi"));
    assert!(text.contains("# response: exponential mu=5"));
    let (header, rows) = table(&text);
    assert_eq!(
        header,
        ["k", "expected_wait", "expected_min_age", "expected_aoi"]
    );
    assert_eq!(rows.len(), 20);
    let aoi8: f64 = rows[7][3].parse().unwrap();
    assert!((aoi8 - 0.22391).abs() < 1e-4);
    assert_finite(&rows);
}

#[test]
fn analytic_uniform_and_subset() {
    let text = stdout(&aoi(&[
        "analytic", "--n", "20", "--lambda", "1", "--a", "0.1", "--h", "0.2",
    ]));
    let (_, rows) = table(&text);
    let first: f64 = rows[0][3].parse().unwrap();
    assert!((first - 1.109524).abs() < 1e-5);

    let text = stdout(&aoi(&[
        "analytic", "--n", "50", "--m", "20", "--lambda", "1", "--mu", "5",
    ]));
    let (_, rows) = table(&text);
    assert_eq!(rows.len(), 20);
    let aoi8: f64 = rows[7][3].parse().unwrap();
    assert!((aoi8 - 0.22391).abs() < 1e-4);
}

#[test]
fn analytic_rejects_erlang() {
    let out = aoi(&[
        "analytic", "--n", "20", "--lambda", "1", "--r", "5", "--theta", "0.04",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no closed form"), "{err}");
}

#[test]
fn optimal_k_schema() {
    let text = stdout(&aoi(&[
        "optimal-k",
        "--n",
        "20",
        "--lambda",
        "100",
        "--mu",
        "2",
    ]));
    let (header, rows) = table(&text);
    assert_eq!(
        header,
        [
            "k_prime",
            "k_star",
            "tie",
            "aoi_at_kstar",
            "improvement_ratio",
            "lambda_high",
            "lambda_low"
        ]
    );
    assert_eq!(rows[0][1], "1");
    assert_eq!(rows[0][4], "1");

    let text = stdout(&aoi(&[
        "optimal-k",
        "--n",
        "20",
        "--lambda",
        "1",
        "--h",
        "0.2",
        "--a",
        "0.1",
    ]));
    let (_, rows) = table(&text);
    assert_eq!(rows[0][1], "10");
}

#[test]
fn simulate_schema_and_erlang_without_closed_form() {
    let text = stdout(&aoi(&[
        "simulate", "--n", "20", "--lambda", "1", "--r", "5", "--mu", "5", "--trials", "2000",
        "--seed", "9",
    ]));
    assert!(text.contains("# curve_shape: "));
    let (header, rows) = table(&text);
    assert_eq!(
        header,
        ["k", "mean_aoi", "std_error", "trials", "analytic_aoi"]
    );
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[3] == "2000" && r[4].is_empty()));
    assert_finite(&rows);
}

#[test]
fn simulate_tracks_closed_form() {
    let text = stdout(&aoi(&[
        "simulate", "--n", "20", "--lambda", "1", "--mu", "5", "--trials", "10000", "--seed", "5",
    ]));
    let (_, rows) = table(&text);
    for row in rows {
        let mean: f64 = row[1].parse().unwrap();
        let se: f64 = row[2].parse().unwrap();
        let exact: f64 = row[4].parse().unwrap();
        assert!(
            (mean - exact).abs() <= (3.0 * se).max(0.01 * exact),
            "{row:?}"
        );
    }
}

#[test]
fn sweep_schema_and_trends() {
    let text = stdout(&aoi(&[
        "sweep", "--n", "20", "--lambda", "1", "--axis", "mu",
    ]));
    assert!(text.contains("# axis: mu"));
    let (header, rows) = table(&text);
    assert_eq!(
        header,
        [
            "axis_name",
            "axis_value",
            "k_star_analytic",
            "k_star_empirical",
            "improvement_ratio"
        ]
    );
    assert_eq!(rows.len(), 200);
    let k: Vec<usize> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(k.windows(2).all(|w| w[0] <= w[1]));
    assert!(rows.iter().all(|r| r[3].is_empty()));

    let text = stdout(&aoi(&[
        "sweep", "--lambda", "1", "--mu", "10", "--axis", "n", "--values", "2,10,20", "--trials",
        "10000",
    ]));
    let (_, rows) = table(&text);
    for row in rows {
        let analytic: usize = row[2].parse().unwrap();
        let empirical: usize = row[3].parse().unwrap();
        assert!(analytic.abs_diff(empirical) <= 1, "{row:?}");
    }
}

#[test]
fn sweep_rejects_bad_values_before_computing() {
    let out = aoi(&[
        "sweep", "--n", "20", "--mu", "1", "--axis", "lambda", "--values", "1,0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = aoi(&[
        "sweep", "--n", "20", "--lambda", "1", "--axis", "speed", "--mu", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parameter_errors_exit_2() {
    for args in [
        &["analytic", "--n", "20", "--lambda", "1"][..],
        &["analytic", "--n", "20", "--lambda", "-1", "--mu", "1"],
        &[
            "analytic", "--n", "20", "--m", "30", "--lambda", "1", "--mu", "1",
        ],
        &[
            "simulate", "--n", "5", "--lambda", "1", "--mu", "1", "--trials", "0",
        ],
        &[
            "simulate",
            "--n",
            "5",
            "--lambda",
            "1",
            "--mu",
            "1",
            "--age-mode",
            "fast",
        ],
        &["analytic", "--bogus"],
    ] {
        assert_eq!(aoi(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_errors_exit_3() {
    let out = aoi(&[
        "analytic",
        "--n",
        "2",
        "--lambda",
        "1",
        "--mu",
        "1",
        "--out",
        "/no/such/dir/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/dir/x.csv"));
    let out = aoi(&["analytic", "--config", "/no/such/config.toml"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "n = 20\nlambda = 1.0\nmu = 5.0\ntrials = 500\nseed = 4\nage_mode = \"trajectory\"\n",
    )
    .unwrap();
    let out_path = dir.path().join("sim.csv");
    let out = aoi(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "8",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("# seed: 8"));
    assert!(text.contains("# age_mode: trajectory"));
    assert!(text.contains("# trials: 500"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let out = aoi(&[
            "simulate",
            "--n",
            "30",
            "--m",
            "12",
            "--lambda",
            "2",
            "--a",
            "0",
            "--h",
            "1",
            "--trials",
            "3000",
            "--seed",
            "77",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read(Path::new(&path)).unwrap()
    };
    assert_eq!(run("a.csv", "1"), run("b.csv", "3"));
}
