use std::process::Command;

use rankwave_cli::{cmd_conditions, cmd_list, cmd_sample, cmd_verify, exit, Format, RunArgs, RunConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rankwave"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn config(args: RunArgs) -> RunConfig {
    RunConfig::resolve(&args).unwrap()
}

fn family_args(family: &str) -> RunArgs {
    RunArgs {
        family: Some(family.into()),
        ..RunArgs::default()
    }
}

const SMALL_GRID: &str = "t=0:0.2:3,x1=-2:-1:3,x2=-0.5:0.5:3,x3=0:0:1";

#[test]
fn list_json_has_every_family() {
    let out = cmd_list(Format::Json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert_eq!(ids.len(), 14);
    assert!(ids.contains(&"RK_TIME_A") && ids.contains(&"R2_E1E2"));
}

#[test]
fn sample_csv_header_and_rows() {
    let out = cmd_sample(&config(RunArgs {
        grid: Some(SMALL_GRID.into()),
        ..family_args("R1_E")
    }))
    .unwrap();
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "t,x1,x2,x3,r1,a,u1,u2,u3,cond_det,status");
    assert_eq!(lines.len(), 1 + 27);
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")), "{}", out.stdout);
}

#[test]
fn sample_is_byte_identical_across_runs() {
    let args = ["sample", "--family", "R2_E1E2", "--grid", SMALL_GRID];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert!(a.lines().count() == 28);
}

#[test]
fn sample_writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.csv");
    let (code, stdout, _) = run(&["sample", "--family", "R1_E", "--grid", SMALL_GRID, "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("wrote "));
    let (_, direct, _) = run(&["sample", "--family", "R1_E", "--grid", SMALL_GRID]);
    assert_eq!(std::fs::read_to_string(path).unwrap(), direct);
}

#[test]
fn verify_json_has_the_report_fields() {
    let out = cmd_verify(&config(family_args("R2_E1E2"))).unwrap();
    assert_eq!(out.status, exit::PASS);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    for key in ["family", "params", "grid", "method", "h", "residuals", "skipped", "runtime_ms", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for eq in ["eq1", "eq2", "eq3", "eq4"] {
        assert!(v["residuals"][eq]["max"].as_f64().unwrap() <= 1e-8);
    }
}

#[test]
fn verify_fd_passes_and_a_tiny_threshold_fails() {
    let args = RunArgs {
        method: Some(rankwave_cli::MethodChoice::Fd),
        ..family_args("R1_E")
    };
    assert_eq!(cmd_verify(&config(args.clone())).unwrap().status, exit::PASS);
    let strict = RunArgs {
        threshold: Some(1e-14),
        ..args
    };
    assert_eq!(cmd_verify(&config(strict)).unwrap().status, exit::FAIL);
}

#[test]
fn flagged_variant_fails_verification() {
    let (code, stdout, _) = run(&["verify", "--family", "R3_E1S2S3_v1", "--set", "variant=algebraic"]);
    assert_eq!(code, exit::FAIL, "{stdout}");
}

#[test]
fn conditions_pass_for_a_registered_pair_and_fail_off_the_angle() {
    let ok = cmd_conditions(&config(RunArgs {
        samples: Some(10),
        ..family_args("R2_E1E2")
    }))
    .unwrap();
    assert_eq!(ok.status, exit::PASS, "{}", ok.stdout);
    let bad = cmd_conditions(&config(RunArgs {
        samples: Some(5),
        waves: vec!["potential:1,0,0".into(), "potential:0,1,0".into()],
        ..RunArgs::default()
    }))
    .unwrap();
    assert_eq!(bad.status, exit::FAIL);
}

#[test]
fn conditions_single_wave_reports_the_vacuous_orders() {
    let out = cmd_conditions(&config(RunArgs {
        samples: Some(5),
        format: Some(Format::Text),
        ..family_args("R1_S")
    }))
    .unwrap();
    assert_eq!(out.status, exit::PASS);
    assert!(out.stdout.contains("identically satisfied"), "{}", out.stdout);
}

#[test]
fn catastrophe_reports_the_predicted_time() {
    let (code, stdout, _) = run(&["catastrophe", "--family", "R1_E"]);
    assert_eq!(code, 0, "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let t = &v["report"]["times"][0];
    assert!(t["relative_gap"].as_f64().unwrap() < 1e-6);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, format!("family = \"R1_E\"\ngrid = \"{SMALL_GRID}\"\n[set]\nA1 = 0.5\n")).unwrap();
    let (code, from_file, _) = run(&["sample", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (_, explicit, _) = run(&["sample", "--family", "R1_E", "--grid", SMALL_GRID, "--set", "A1=0.5"]);
    assert_eq!(from_file, explicit);
    let (_, overridden, _) = run(&["sample", "--config", path.to_str().unwrap(), "--set", "A1=0.25"]);
    assert_ne!(overridden, from_file);
}

#[test]
fn malformed_inputs_map_to_exit_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let bad_config = dir.path().join("bad.toml");
    std::fs::write(&bad_config, "famly = \"R1_E\"\n").unwrap();
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["verify", "--family", "NOPE"], exit::USAGE),
        (vec!["verify", "--family", "R1_E", "--grid", "t=0:1:3"], exit::USAGE),
        (vec!["verify", "--family", "R1_E", "--grid", "t=0:1:x,x1=0:1:2,x2=0:0:1,x3=0:0:1"], exit::USAGE),
        (vec!["verify", "--family", "R1_E", "--set", "bogus=1"], exit::USAGE),
        (vec!["verify", "--family", "R1_E", "--set", "A1=abc"], exit::USAGE),
        (vec!["verify", "--unknown-flag"], exit::USAGE),
        (vec!["verify"], exit::USAGE),
        (vec!["verify", "--config", bad_config.to_str().unwrap()], exit::USAGE),
        (vec!["verify", "--family", "R2_E1E2", "--set", "e2=0,0,1"], exit::CONSTRAINT),
        (vec!["verify", "--family", "R1_E", "--set", "gamma=1"], exit::CONSTRAINT),
        (
            vec!["verify", "--family", "R1_E", "--grid", "t=0:0.1:2,x1=0:1:2,x2=0:0:1,x3=0:0:1"],
            exit::EMPTY,
        ),
    ];
    for (args, expected) in cases {
        let (code, _, stderr) = run(&args);
        assert_eq!(code, expected, "{args:?}: {stderr}");
        assert!(!stderr.is_empty(), "{args:?} printed no diagnostic");
    }
}
