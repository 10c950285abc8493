use super::*;

fn cmd(name: &str, params: serde_json::Value) -> Command {
    let serde_json::Value::Object(m) = params else { panic!("object expected") };
    Command::from_params(name, m).unwrap()
}

fn table(o: &Outcome, i: usize) -> &Table {
    o.artifacts[i].table().expect("table artifact")
}

#[test]
fn ranges_and_lists_parse() {
    assert_eq!("2..10".parse::<IntRange>().unwrap(), IntRange::new(2, 10));
    assert_eq!("2..=10".parse::<IntRange>().unwrap(), IntRange::new(2, 10));
    assert_eq!("-5..5".parse::<IntRange>().unwrap(), IntRange::new(-5, 5));
    assert_eq!("4".parse::<IntRange>().unwrap(), IntRange::new(4, 4));
    assert!("5..2".parse::<IntRange>().is_err());
    assert!("a..b".parse::<IntRange>().is_err());
    let r: IntRange = serde_json::from_str("[1, 3]").unwrap();
    assert_eq!(r, IntRange::new(1, 3));
    assert_eq!(serde_json::to_string(&r).unwrap(), "\"1..3\"");
    assert_eq!("0,0.25, 0.4".parse::<FloatList>().unwrap(), FloatList(vec![0.0, 0.25, 0.4]));
    let l: FloatList = serde_json::from_str("0.5").unwrap();
    assert_eq!(l, FloatList(vec![0.5]));
}

#[test]
fn flags_override_config_file() {
    let file = ConfigFile::parse(
        r#"{"command": "counterexample", "seed": 3, "format": "json", "n": "2..4", "theta": [0.0, 0.4]}"#,
    )
    .unwrap();
    let flags = Overrides {
        command: Some(Command::Counterexample(CounterexampleArgs { n: Some(IntRange::new(5, 6)), theta: None })),
        seed: Some(9),
        ..Default::default()
    };
    let c = resolve(Some(file.clone()), flags).unwrap();
    assert_eq!(c.seed, 9);
    assert_eq!(c.format, Format::Json);
    assert_eq!(c.out, PathBuf::from(DEFAULT_OUT));
    let Command::Counterexample(a) = &c.command else { panic!() };
    assert_eq!(a.n, Some(IntRange::new(5, 6)));
    assert_eq!(a.theta, Some(FloatList(vec![0.0, 0.4])));
    // The file alone suffices.
    let c = resolve(Some(file), Overrides::default()).unwrap();
    assert_eq!(c.seed, 3);
    // Mismatched command names and unknown keys are argument errors.
    let other = Overrides { command: Some(Command::Lorentz(Default::default())), ..Default::default() };
    let f = ConfigFile::parse(r#"{"command": "counterexample"}"#).unwrap();
    assert!(matches!(resolve(Some(f), other), Err(Error::Argument(_))));
    let f = ConfigFile::parse(r#"{"command": "counterexample", "bogus": 1}"#).unwrap();
    assert!(matches!(resolve(Some(f), Overrides::default()), Err(Error::Argument(_))));
    assert!(matches!(resolve(None, Overrides::default()), Err(Error::Argument(_))));
    assert!(Command::from_params("nope", Map::new()).is_err());
}

#[test]
fn command_params_round_trip() {
    let c = cmd("vr-decay", serde_json::json!({"r": "-2..2", "points": 256}));
    assert_eq!(c.name(), "vr-decay");
    assert_eq!(Command::from_params(c.name(), c.params()).unwrap(), c);
    for name in Command::NAMES {
        assert_eq!(cmd(name, serde_json::json!({})).name(), name);
    }
}

#[test]
fn counterexample_rows_match_targets() {
    let (o, err) = compute(&cmd("counterexample", serde_json::json!({"n": "2..4", "theta": "0,0.25"})), 7);
    assert!(err.is_none() && o.failure.is_none());
    let t = table(&o, 0);
    assert_eq!(t.columns, ["N", "theta", "ratio", "target", "match"]);
    assert_eq!(t.rows.len(), 6);
    assert!(t.column("match").unwrap().iter().all(|c| **c == Cell::Bool(true)));
}

#[test]
fn h_estimate_of_zero_matrix() {
    let (o, err) = compute(&cmd("h-estimate", serde_json::json!({"entries": "0,0;0,0"})), 0);
    assert!(err.is_none());
    assert_eq!(table(&o, 0).floats("lower_bound").unwrap(), [0.0]);
    let (_, err) = compute(&cmd("h-estimate", serde_json::json!({})), 0);
    assert!(matches!(err, Some(Error::Argument(_))));
}

#[test]
fn oracle_check_agrees() {
    let (o, err) = compute(&cmd("oracle-check", serde_json::json!({"trials": 4})), 1);
    assert!(err.is_none() && o.failure.is_none(), "{:?}", o.failure);
    assert!(table(&o, 0).floats("abs_error").unwrap().iter().all(|e| *e <= 1e-6));
}

#[test]
fn empty_table_is_header_only() {
    let t = Table::new(&["size", "H_est", "mult_cert", "ratio"]);
    assert_eq!(t.to_csv().unwrap(), b"size,H_est,mult_cert,ratio\n");
    assert_eq!(t.to_json().unwrap(), b"[]\n");
}

#[test]
fn csv_reemits_identically_and_json_mirrors() {
    let mut t = Table::new(&["a", "b", "c", "d"]);
    t.push(vec![Cell::Float(0.1 + 0.2), Cell::Empty, Cell::Text("x,\"y\"".into()), Cell::Float(f64::INFINITY)]);
    t.push(vec![Cell::Int(-3), Cell::Bool(false), Cell::Float(1e-300), Cell::Float(f64::NAN)]);
    let csv = t.to_csv().unwrap();
    assert_eq!(reemit_csv(&csv).unwrap(), csv);
    let v: serde_json::Value = serde_json::from_slice(&t.to_json().unwrap()).unwrap();
    assert_eq!(v[0]["a"].as_f64().unwrap(), 0.1 + 0.2);
    assert!(v[0]["b"].is_null());
    assert_eq!(v[0]["d"], "inf");
    assert_eq!(v[1]["c"].as_f64().unwrap(), 1e-300);
}

#[test]
fn runs_are_byte_identical_and_failures_are_marked() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::new(cmd("counterexample", serde_json::json!({"n": "2..3"})), dir.path().join("a"));
    config.seed = 7;
    let first = run(&config).unwrap();
    assert_eq!(first.exit_code(), exit::SUCCESS);
    assert_eq!(Manifest::load(&config.out).unwrap(), first.manifest);
    config.out = dir.path().join("b");
    let second = run(&config).unwrap();
    assert_eq!(first.manifest.files, second.manifest.files);
    let bytes = std::fs::read(config.out.join("counterexample.csv")).unwrap();
    assert_eq!(reemit_csv(&bytes).unwrap(), bytes);

    // N = 15 exceeds the verification budget after two rows were computed.
    let bad = ExperimentConfig::new(cmd("counterexample", serde_json::json!({"n": "13..15"})), dir.path().join("c"));
    let r = run(&bad).unwrap();
    assert_eq!(r.manifest.status, RunStatus::Failed);
    assert_eq!(r.exit_code(), exit::INVALID_ARGUMENTS);
    assert!(bad.out.join(FAILURE_MARKER).exists());
    assert_eq!(table(&r.outcome, 0).rows.len(), 2);
    // A later successful run into the same directory clears the marker.
    let good = ExperimentConfig { command: cmd("counterexample", serde_json::json!({"n": 2})), ..bad };
    assert_eq!(run(&good).unwrap().exit_code(), exit::SUCCESS);
    assert!(!good.out.join(FAILURE_MARKER).exists());
}

#[test]
fn exit_codes_follow_error_kind() {
    assert_eq!(exit_code(&Error::Argument(String::new())), 2);
    assert_eq!(exit_code(&Error::Numerical(String::new())), 3);
    assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 4);
}

#[test]
fn grid_artifacts_emit_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::new(
        cmd("bilinear-apply", serde_json::json!({"points": 16, "period": 1.0})),
        dir.path(),
    );
    let r = run(&config).unwrap();
    assert_eq!(r.manifest.files[0].name, "bilinear.csv");
    config.format = Format::Json;
    let r = run(&config).unwrap();
    let w = crate::harmonic::GridFunction::from_json(&std::fs::read_to_string(dir.path().join("bilinear.json")).unwrap())
        .unwrap();
    let f = random_function(w.grid(), 0, 0);
    let g = random_function(w.grid(), 0, 1);
    // σ ≡ 1 gives the pointwise product.
    assert!(w.sup_distance(&f.mul(&g).unwrap()).unwrap() < 1e-10);
    assert_eq!(r.manifest.status, RunStatus::Ok);
}
