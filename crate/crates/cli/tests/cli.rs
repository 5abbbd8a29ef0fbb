//! Black-box tests of the `snvsim` binary: exit codes, determinism, and
//! the file formats on its external surface.

use std::path::Path;
use std::process::Output;

fn snvsim(args: &[&str], cwd: &Path) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_snvsim"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SNVSIM_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

#[test]
fn power_budget_runs_with_zero_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let out = snvsim(&["sim", "power-budget"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS]"), "{stdout}");
    assert!(dir.path().join("out/power-budget/summary.json").exists());
    assert!(dir.path().join("out/power-budget/power.csv").exists());
}

#[test]
fn unknown_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = snvsim(&["sim", "warp-drive"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_config_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"version\": 1}").unwrap();
    let out = snvsim(
        &["sim", "power-budget", "--config", "bad.json"],
        dir.path(),
    );
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let out = snvsim(
        &["sim", "power-budget", "--config", "missing.json"],
        dir.path(),
    );
    assert_eq!(code(&out), 3);

    // version mismatch
    std::fs::write(dir.path().join("v9.json"), "{\"version\": 9}").unwrap();
    let out = snvsim(&["sim", "power-budget", "--config", "v9.json"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));
}

#[test]
fn config_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("device.json");
    std::fs::write(
        &config_path,
        snvsim::config::DeviceConfig::default().to_json_string(),
    )
    .unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_snvsim"))
        .args(["sim", "power-budget"])
        .current_dir(dir.path())
        .env("SNVSIM_CONFIG", &config_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn overrides_change_behavior_and_bad_keys_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = snvsim(
        &[
            "sim",
            "power-budget",
            "--set",
            "scenarios.power_budget.v_hold=30",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/power-budget/summary.json")).unwrap(),
    )
    .unwrap();
    // 30 V hold: quarter of the 60 V power
    let hold = summary["metrics"]["hold_power_w"].as_f64().unwrap();
    assert!((hold - 0.25e-9).abs() < 1e-15);

    let out = snvsim(
        &["sim", "power-budget", "--set", "nope.nope=1"],
        dir.path(),
    );
    assert_eq!(code(&out), 3);

    let out = snvsim(&["sim", "power-budget", "--set", "garbage"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        let out = snvsim(
            &[
                "sim",
                "dc-tuning",
                "--seed",
                "41",
                "--out",
                sub,
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0);
    }
    let read = |sub: &str, f: &str| std::fs::read(dir.path().join(sub).join("dc-tuning").join(f)).unwrap();
    for f in ["dc_tuning.csv", "susceptibility_snv1.csv", "summary.json"] {
        assert_eq!(read("a", f), read("b", f), "{f} not reproducible");
    }
}

#[test]
fn fit_subcommand_round_trips_a_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    // synthesize a line through the library, fit through the binary
    let grid = snvsim::spectroscopy::uniform_grid(-1.5, 1.5, 401);
    let spec = snvsim::spectroscopy::synth_static(0.05, 0.12, 800.0, 10.0, &grid);
    std::fs::write(dir.path().join("line.csv"), spec.to_csv()).unwrap();

    let out = snvsim(
        &["fit", "lorentzian", "--in", "line.csv", "--out", "fit.json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let fit: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fit.json")).unwrap(),
    )
    .unwrap();
    assert!((fit["fwhm_ghz"].as_f64().unwrap() - 0.12).abs() < 1e-6);
    assert!((fit["center_ghz"].as_f64().unwrap() - 0.05).abs() < 1e-6);

    // sideband fit requires the drive frequency
    let comb = snvsim::spectroscopy::synth_sidebands(0.0, 0.1, 1.2, 1.0, 10, &grid).unwrap();
    std::fs::write(dir.path().join("comb.csv"), comb.to_csv()).unwrap();
    let out = snvsim(&["fit", "sideband", "--in", "comb.csv"], dir.path());
    assert_eq!(code(&out), 2);
    let out = snvsim(
        &[
            "fit",
            "sideband",
            "--in",
            "comb.csv",
            "--omega-d-mhz",
            "1000",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let fit: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert!((fit["beta"].as_f64().unwrap() - 1.2).abs() < 1e-3);
}

#[test]
fn fit_linear_reads_xy_sigma() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("xy.csv"),
        "x,y,sigma\n0,1.0,0.1\n1,3.1,0.1\n2,4.9,0.1\n3,7.0,0.1\n",
    )
    .unwrap();
    let out = snvsim(&["fit", "linear", "--in", "xy.csv"], dir.path());
    assert_eq!(code(&out), 0);
    let fit: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert!((fit["slope"].as_f64().unwrap() - 2.0).abs() < 0.05);
}

#[test]
fn fit_on_flat_data_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("detuning_ghz,signal\n");
    for i in 0..64 {
        csv.push_str(&format!("{},5\n", i as f64 * 0.01));
    }
    std::fs::write(dir.path().join("flat.csv"), csv).unwrap();
    let out = snvsim(&["fit", "lorentzian", "--in", "flat.csv"], dir.path());
    assert_eq!(code(&out), 4);
}

#[test]
fn report_aggregates_and_empty_dir_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    for scenario in ["power-budget", "resonance-enhancement"] {
        let out = snvsim(&["sim", scenario], dir.path());
        assert_eq!(code(&out), 0);
    }
    let out = snvsim(&["report", "--out", "report.json"], dir.path());
    assert_eq!(code(&out), 0);
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("power-budget"));
    assert!(table.contains("checks passed"));
    assert!(dir.path().join("report.json").exists());

    let empty = tempfile::tempdir().unwrap();
    let out = snvsim(&["report"], empty.path());
    assert_eq!(code(&out), 2);
}
