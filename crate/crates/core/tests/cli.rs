use std::fs;
use std::io::Write;
use std::process::{Command, Output, Stdio};

fn rho_lite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rho-lite"))
        .args(args)
        .env_remove("RHO_LITE_SEED")
        .output()
        .unwrap()
}

fn with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rho-lite"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn estimate_of(csv: &str, name: &str) -> f64 {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{name},")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn generate_validates_and_resolves_coverage() {
    let out = stdout(&rho_lite(&[
        "--seed", "7", "generate", "--rho", "0", "--sigma", "1", "-n", "5",
    ]));
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().all(|l| l.parse::<f64>().is_ok()));

    let bad = rho_lite(&["generate", "--rho", "1.0", "--sigma", "1", "-n", "5"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("|rho| < 1"));

    let a = stdout(&rho_lite(&[
        "generate",
        "--rho",
        "0",
        "--coverage",
        "0.9",
        "-n",
        "20000",
    ]));
    let xs: Vec<f64> = a.lines().map(|l| l.parse().unwrap()).collect();
    let inside = xs.iter().filter(|x| x.abs() <= 1.0).count() as f64 / xs.len() as f64;
    assert!((inside - 0.9).abs() < 0.01, "{inside}");
}

#[test]
fn seed_comes_from_environment_when_flag_absent() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_rho-lite"));
        c.env_remove("RHO_LITE_SEED");
        if let Some(e) = env {
            c.env("RHO_LITE_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        c.args(["generate", "--rho", "0.3", "--sigma", "1", "-n", "4"]);
        c.output().unwrap().stdout
    };
    assert_eq!(run(Some("42"), None), run(None, Some("42")));
    assert_ne!(run(Some("42"), None), run(None, None));
    assert_eq!(run(Some("42"), Some("1")), run(None, Some("1")));
}

#[test]
fn estimate_batch_examples() {
    let acf = stdout(&with_stdin(
        &["estimate", "--estimator", "acf"],
        b"1\n-1\n1\n-1\n",
    ));
    assert_eq!(estimate_of(&acf, "acf"), -0.75);
    let kedem = stdout(&with_stdin(
        &["estimate", "--estimator", "kedem"],
        b"0.2 0.4 0.1 0.9 0.3",
    ));
    assert_eq!(estimate_of(&kedem, "kedem"), 1.0);

    let series = stdout(&rho_lite(&[
        "--seed",
        "4",
        "generate",
        "--rho",
        "0.4",
        "--coverage",
        "0.9",
        "-n",
        "512",
    ]));
    let all = stdout(&with_stdin(&["estimate"], series.as_bytes()));
    assert_eq!(all.lines().count(), 5);
    let gap = (estimate_of(&all, "proposed") - estimate_of(&all, "kedem")).abs();
    // the reference coefficients are off by up to 2.2e-2 near lambda 0.3 and 0.7
    assert!(gap < 2.2e-2, "{gap}");
}

#[test]
fn estimate_errors_map_to_exit_codes() {
    assert_eq!(
        rho_lite(&["estimate", "--input", "/nonexistent/samples"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(with_stdin(&["estimate"], b"0 0 0 0").status.code(), Some(4));
    assert_eq!(with_stdin(&["estimate"], b"1 two 3").status.code(), Some(2));
    assert_eq!(with_stdin(&["estimate"], b"1").status.code(), Some(4));
    assert_eq!(
        rho_lite(&["estimate", "--estimator", "pearson"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(rho_lite(&["--help"]).status.code(), Some(0));
}

#[test]
fn streaming_rows_start_after_warmup() {
    let input = "0.5\n".repeat(20);
    let out = stdout(&with_stdin(
        &[
            "estimate",
            "--streaming",
            "--window",
            "8",
            "--estimator",
            "all",
        ],
        input.as_bytes(),
    ));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "sample_index,acf,kedem,proposed-dyadic");
    assert_eq!(lines.len(), 1 + 13);
    assert!(lines[1].starts_with("7,"));
    for l in &lines[1..] {
        let cells: Vec<f64> = l.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells[0], 0.875);
        assert!((cells[1] - 1.0).abs() < 2e-3);
        assert_eq!(cells[2], 1.0);
    }

    let warm = stdout(&with_stdin(
        &[
            "estimate",
            "--streaming",
            "--window",
            "8",
            "--estimator",
            "acf",
            "--emit-warmup",
        ],
        input.as_bytes(),
    ));
    assert_eq!(warm.lines().count(), 21);
}

#[test]
fn raw16_input_matches_decimal_input() {
    let words: [i16; 6] = [256, -128, 64, 300, -511, 10];
    let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
    let text: String = words
        .iter()
        .map(|w| format!("{}\n", *w as f64 / 256.0))
        .collect();
    let raw = stdout(&with_stdin(
        &[
            "estimate",
            "--raw16",
            "--fixed-point",
            "10",
            "--estimator",
            "acf",
        ],
        &bytes,
    ));
    let dec = stdout(&with_stdin(
        &["estimate", "--fixed-point", "10", "--estimator", "acf"],
        text.as_bytes(),
    ));
    assert_eq!(raw, dec);
    assert_eq!(
        with_stdin(&["estimate", "--raw16"], &bytes[..3])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn fit_outputs_and_model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.csv");
    let out = stdout(&rho_lite(&[
        "fit",
        "--segments",
        "5",
        "--dyadic-caps",
        "32",
        "63",
        "--model-out",
        model.to_str().unwrap(),
    ]));
    let fit_err: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(fit_err < 1.4e-2, "{fit_err}");
    let reference: Vec<&str> = out
        .lines()
        .filter(|l| l.starts_with("reference-dyadic,"))
        .collect();
    let constants: Vec<(&str, &str)> = reference
        .iter()
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[4], c[5])
        })
        .collect();
    assert_eq!(
        constants,
        vec![
            ("-1", "5/8"),
            ("-5/4", "63/32"),
            ("-3/2", "3"),
            ("-3/4", "63/32"),
            ("3/8", "5/8")
        ]
    );

    let saved = fs::read_to_string(&model).unwrap();
    assert!(saved.starts_with("segment,lo,hi,intercept,slope\n"));
    assert_eq!(saved.lines().count(), 6);
    let est = stdout(&with_stdin(
        &[
            "estimate",
            "--estimator",
            "proposed",
            "--model",
            model.to_str().unwrap(),
        ],
        b"1 1 1 1",
    ));
    assert!((estimate_of(&est, "proposed") - 1.0).abs() < 1.4e-2);

    assert_eq!(
        rho_lite(&["fit", "--dyadic-caps", "30", "63"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        rho_lite(&["fit", "--grid-size", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn complexity_table_shape() {
    let out = stdout(&rho_lite(&["complexity", "--n", "512"]));
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][..3], ["estimator", "n", "mult"]);
    assert_eq!(
        rows[1][..8],
        ["acf", "512", "1024", "1024", "1", "1", "1022", "1022"]
    );
    assert_eq!(
        rows[2][..8],
        ["kedem", "512", "1", "1", "1", "1", "540", "540"]
    );
    assert_eq!(
        rows[3][..8],
        ["proposed", "512", "0", "0", "0", "1", "513", "513"]
    );
    let table = stdout(&rho_lite(&["complexity", "--format", "table"]));
    assert!(table.lines().nth(1).unwrap().starts_with('-'));
}

#[test]
fn experiment_config_file_flags_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "replicates=30\nseries_length=128\nrho_grid=-0.5,0.5\nseed=3\n",
    )
    .unwrap();
    let plots = dir.path().join("plots");
    let out_file = dir.path().join("bias.csv");
    let o = rho_lite(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--replicates",
        "40",
        "--plot-dir",
        plots.to_str().unwrap(),
        "--output",
        out_file.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = fs::read_to_string(&out_file).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert_eq!(csv, fs::read_to_string(plots.join("bias.csv")).unwrap());
    assert!(fs::read_to_string(plots.join("bias.gp"))
        .unwrap()
        .contains("multiplot"));

    let via_flags = stdout(&rho_lite(&[
        "--seed",
        "3",
        "experiment",
        "--replicates",
        "40",
        "-n",
        "128",
        "--grid",
        "-0.5,0.5",
    ]));
    assert_eq!(csv, via_flags);

    let strict = stdout(&rho_lite(&[
        "experiment",
        "--replicates",
        "2",
        "-n",
        "16",
        "--grid",
        "closed",
    ]));
    assert_eq!(strict.lines().count(), 1 + 3 * 51);

    assert_eq!(
        rho_lite(&["experiment", "--grid", "0,1.0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        rho_lite(&["experiment", "--config", "/nonexistent.cfg"])
            .status
            .code(),
        Some(3)
    );
}
