use std::path::Path;
use std::process::Command;

use softguide::resonance::ResonanceSystem;
use softguide_cli::commands::{self, ModeRow, SweepRow};
use softguide_cli::error::exit;
use softguide_cli::{CliError, RunConfig};

const BASE: &str = r#"
[strip]
width = 1.0

[[strip.layers]]
thickness = 1.0
depth = 5.0

[trap]
beta = 3.0

[trap.geometry.area]
shape = "disk"
center = [0.0, 0.0]
radius = 1.0

[placement]
rho = 2.5

[numerics]
order = 6

[sweep]
rho_min = 2.5
rho_max = 4.0
points = 4
"#;

fn config(extra: &str) -> RunConfig {
    RunConfig::from_toml(&format!("{BASE}{extra}")).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_softguide"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn config_round_trip() {
    let c = config("");
    assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    let curve = RunConfig::from_toml(&BASE.replace(
        "[trap.geometry.area]\nshape = \"disk\"\ncenter = [0.0, 0.0]\nradius = 1.0",
        "[trap.geometry.curve]\nshape = \"segment\"\nfrom = [0.0, 0.0]\nto = [1.0, 0.5]",
    ))
    .unwrap();
    assert_eq!(RunConfig::from_toml(&curve.to_toml()).unwrap(), curve);
    assert!((softguide::measure::distance_to_strip(&curve.measure().unwrap(), 1.0).unwrap() - 2.5).abs() < 1e-12);
}

#[test]
fn invalid_configs_are_config_errors() {
    for bad in [
        BASE.replace("[numerics]", "[numerics]\nspeed = 3"),
        BASE.replace("rho = 2.5", "rho = 2.5\ncenter = [0.0, 3.0]"),
        BASE.replace("rho = 2.5", "center = [0.0, 1.5]"),
        BASE.replace("order = 6", "order = 6\ntrap_tol = 0.0"),
        BASE.replace("rho_min = 2.5", "rho_min = -1.0"),
        BASE.replace("thickness = 1.0", "thickness = 0.5"),
    ] {
        let err = RunConfig::from_toml(&bad).unwrap_err();
        assert_eq!(err.exit_code(), exit::CONFIG, "{err}");
    }
}

#[test]
fn exit_codes_are_distinct() {
    let codes = [exit::OK, exit::IO, exit::USAGE, exit::CONFIG, exit::REGIME, exit::SOLVER, exit::ACCURACY, exit::DOMAIN];
    for (i, a) in codes.iter().enumerate() {
        assert!(codes[i + 1..].iter().all(|b| b != a));
    }
    let e: CliError = softguide::Error::Regime("x".into()).into();
    assert_eq!(e.exit_code(), exit::REGIME);
    let e: CliError = softguide::Error::Solver("x".into()).into();
    assert_eq!(e.exit_code(), exit::SOLVER);
    let e: CliError = softguide::Error::Accuracy("x".into()).into();
    assert_eq!(e.exit_code(), exit::ACCURACY);
    let e: CliError = softguide::Error::Threshold("x".into()).into();
    assert_eq!(e.exit_code(), exit::DOMAIN);
}

#[test]
fn mode_table_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE.replace("width = 1.0", "width = 2.0").replace("thickness = 1.0", "thickness = 2.0");
    let cfg = write_config(dir.path(), &text);
    let out = bin().args(["modes", "--out"]).arg(dir.path()).arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let from_csv: Vec<ModeRow> = csv::Reader::from_path(dir.path().join("modes.csv"))
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap();
    let from_json: Vec<ModeRow> = serde_json::from_str(&std::fs::read_to_string(dir.path().join("modes.json")).unwrap()).unwrap();
    assert_eq!(from_csv.len(), 2);
    assert_eq!(from_csv, from_json);

    let free = write_config(dir.path(), &BASE.replace("depth = 5.0", "depth = 0.0"));
    let out = bin().args(["modes", "--format", "csv", "--config"]).arg(&free).arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "");
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning"));
}

#[test]
fn trap_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let run = || bin().args(["trap", "--format", "json", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    let (a, b) = (run(), run());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rows: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 1);
}

#[test]
fn pole_matches_library_call() {
    let cfg = config("");
    let pole = commands::pole(&cfg, 1).unwrap();
    let sys = ResonanceSystem::new(&cfg.measure().unwrap(), &cfg.profile().unwrap(), 3.0, 1, cfg.numerics.trap_tol).unwrap();
    let direct = sys.find_pole(&cfg.pole_options()).unwrap();
    assert_eq!(pole, direct);
    assert!(pole.z.im <= 0.0 && pole.newton_residual <= cfg.numerics.newton_tol);
}

#[test]
fn regime_violation_exits_with_its_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BASE.replace("rho = 2.5", "rho = 0.05").replace("order = 6", "order = 6\nregime_limit = 1e-3"));
    let out = bin().args(["pole", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::REGIME as i32));
    assert!(String::from_utf8(out.stderr).unwrap().contains("rho"));
}

#[test]
fn golden_rule_routes_and_channels() {
    let g = commands::golden_rule(&config(""), 1).unwrap();
    assert!(g.rel_diff.iter().all(|d| *d <= 1e-6));
    let sum: f64 = g.channels.iter().map(|c| c.overlap).sum();
    assert!((sum - g.overlap).abs() <= 1e-15 * g.overlap.abs());

    let deep = RunConfig::from_toml(&BASE.replace("beta = 3.0", "beta = 8.0")).unwrap();
    let g = commands::golden_rule(&deep, 1).unwrap();
    assert_eq!(g.segment, 0);
    assert_eq!((g.overlap, g.cosine, g.g_imag), (0.0, 0.0, 0.0));
}

#[test]
fn missing_level_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let out = bin().args(["goldenrule", "--n", "3", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::CONFIG as i32));
}

fn read_rows(path: &Path) -> Vec<SweepRow> {
    csv::Reader::from_path(path).unwrap().deserialize().collect::<Result<_, _>>().unwrap()
}

#[test]
fn sweep_is_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("");
    let first = commands::sweep(&cfg, 1, dir.path()).unwrap();
    assert_eq!(first.report.rows, 4);
    assert_eq!(first.report.resumed, 0);
    assert!(first.report.self_test.pass);
    assert!(first.report.gamma.is_some() && first.report.shift.is_some());
    let full = std::fs::read(&first.results).unwrap();
    let rows = read_rows(&first.results);
    assert_eq!(rows.iter().map(|r| r.rho).collect::<Vec<_>>(), cfg.sweep.grid());
    assert!(rows.iter().all(|r| r.im_z <= 0.0));

    let again = commands::sweep(&cfg, 1, dir.path()).unwrap();
    assert_eq!(again.report.resumed, 4);
    assert_eq!(std::fs::read(&again.results).unwrap(), full);

    // drop the last row and leave half a line behind, as an interrupted run would
    let text = String::from_utf8(full.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let mut cut = lines[..lines.len() - 1].join("\n");
    cut.push('\n');
    cut.push_str("4.0,-0.96");
    std::fs::write(&first.results, cut).unwrap();
    let resumed = commands::sweep(&cfg, 1, dir.path()).unwrap();
    assert_eq!(resumed.report.resumed, 3);
    assert_eq!(std::fs::read(&resumed.results).unwrap(), full);

    let mut other = config("");
    other.numerics.order = 5;
    assert_ne!(other.sweep_hash(1), cfg.sweep_hash(1));
    assert_eq!(cfg.sweep_hash(1), config("").sweep_hash(1));
}

#[test]
fn sweep_through_binary_with_worker_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BASE.replace("points = 4", "points = 2"));
    let out = bin()
        .env(softguide_cli::WORKERS_ENV, "2")
        .args(["sweep", "--format", "csv", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("rho,re_z,im_z,gamma_leading,gamma,residual,iters\n"));
    assert_eq!(stdout.lines().count(), 3);

    let bad = bin()
        .env(softguide_cli::WORKERS_ENV, "zero")
        .args(["trap", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(exit::CONFIG as i32));
}
