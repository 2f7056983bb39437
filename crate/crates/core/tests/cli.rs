use std::path::Path;
use std::process::Command;

use sonine::cli::config::RunConfig;
use sonine::cli::run_config;
use sonine::cli::summary::Status;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sonine"))
}

fn config(dir: &Path, body: &str) -> RunConfig {
    let text = format!("output_dir = {:?}\nseed = 11\n{body}", dir.display().to_string());
    RunConfig::parse(&text).unwrap()
}

#[test]
fn sonine_check_writes_a_passing_summary_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "[[experiment]]\nname = \"sonine-check\"\nkernel = { family = \"power_law\", alpha = 0.5 }\nparams = { alphas = [0.5], samples = 5 }\n",
    );
    let summary = run_config(&cfg).unwrap();
    assert_eq!(summary.records.len(), 1);
    let r = &summary.records[0];
    assert_eq!(r.name, "sonine_residual_max[alpha=0.5]");
    assert_eq!(r.status, Status::Pass);
    assert!(r.metric <= 1e-6);
    let csv = std::fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert!(csv.starts_with("experiment,check,status,metric,threshold,note\n"));
    assert!(csv.contains("sonine-check,sonine_residual_max[alpha=0.5],pass,"));
    assert!(tmp.path().join("00-sonine-check/sonine.csv").exists());
}

#[test]
fn equivalence_is_only_ever_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg =
        config(tmp.path(), "[[experiment]]\nname = \"equivalence\"\ngrid = { x_min = -20.0, x_max = 20.0, n = 256 }\n");
    let summary = run_config(&cfg).unwrap();
    assert!(summary.records.iter().all(|r| r.status == Status::Reported));
    assert!(summary.records.iter().any(|r| r.name == "l2_rel"));
    assert!(summary.records.iter().any(|r| r.name.starts_with("symbol_gap")));
    assert_eq!(summary.exit_code(), 0);
}

#[test]
fn expansive_run_aborts_on_the_growth_guard() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "[[experiment]]\nname = \"evolve\"\ngrid = { x_min = -40.0, x_max = 40.0, n = 256 }\n\
         params = { horizon = 50.0, dt = 0.5, sign = 1.0, allow_expansive = true, form = \"weyl\" }\n",
    );
    let summary = run_config(&cfg).unwrap();
    assert_eq!(summary.records.len(), 1);
    assert_eq!(summary.records[0].status, Status::Fail);
    assert!(summary.records[0].note.contains("growth guard"), "{}", summary.records[0].note);
    assert_eq!(summary.exit_code(), 1);
}

#[test]
fn expansive_sign_without_the_flag_is_a_configuration_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "[[experiment]]\nname = \"evolve\"\ngrid = { x_min = -20.0, x_max = 20.0, n = 128 }\nparams = { sign = 1.0 }\n",
    );
    let summary = run_config(&cfg).unwrap();
    assert_eq!(summary.fail_count(), 1);
    assert!(summary.records[0].note.contains("configuration error"));
}

#[test]
fn identical_config_and_seed_give_identical_csvs() {
    let body = "[[experiment]]\nname = \"sonine-check\"\nparams = { alphas = [0.3], samples = 4 }\n\
                [[experiment]]\nname = \"evolve\"\ngrid = { x_min = -20.0, x_max = 20.0, n = 128 }\n\
                params = { horizon = 0.2, dt = 0.01, snapshot_every = 10 }\n";
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_config(&config(a.path(), body)).unwrap();
    run_config(&config(b.path(), body)).unwrap();
    for rel in
        ["summary.csv", "00-sonine-check/sonine.csv", "01-evolve/trace.csv", "01-evolve/trace_snapshot_000010.csv"]
    {
        let x = std::fs::read(a.path().join(rel)).unwrap();
        let y = std::fs::read(b.path().join(rel)).unwrap();
        assert_eq!(x, y, "{rel}");
    }
    let trace = std::fs::read_to_string(a.path().join("01-evolve/trace.csv")).unwrap();
    assert!(trace.starts_with("tau,l2,h1,sup_weighted,envelope_margin\n"));
}

#[test]
fn binary_exit_status_counts_failures_and_honours_the_env_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        "output_dir = \"ignored\"\n[[experiment]]\nname = \"evolve\"\ngrid = { x_min = -20.0, x_max = 20.0, n = 128 }\n\
         params = { sign = 1.0 }\n[[experiment]]\nname = \"sonine-check\"\nparams = { alphas = [0.5], samples = 2 }\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let status = bin().arg("run").arg(&cfg_path).env("SONINE_OUTPUT_DIR", &out_dir).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert!(out_dir.join("summary.csv").exists());
    assert!(!tmp.path().join("ignored").exists());
}

#[test]
fn parse_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("bad.toml");
    std::fs::write(&cfg_path, "[[experiment]]\nname = \"evolve\"\nunknown_key = 3\n").unwrap();
    let out = bin().arg("run").arg(&cfg_path).output().unwrap();
    assert_ne!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown_key") && err.contains("line 3"), "{err}");
}

#[test]
fn list_names_the_anchors() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = |name: &str| text.lines().find(|l| l.starts_with(name)).unwrap().to_string();
    assert!(row("neutralization").contains("Topological neutralization of memory kernels"));
    assert!(row("inversion").contains("Fundamental Inversion Theorem"));
    assert!(row("envelope").contains("Physical envelopes and pointwise decay"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn plot_writes_svg_and_refuses_empty_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("profile.csv");
    let mut body = String::from("s,g\n");
    for i in 1..=20 {
        let s = i as f64;
        body.push_str(&format!("{s:.16e},{:.16e}\n", (-0.7 * s).exp()));
    }
    std::fs::write(&csv, body).unwrap();
    let out = bin().args(["plot"]).arg(&csv).args(["--x", "s", "--y", "g", "--logy"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(tmp.path().join("profile.svg")).unwrap();
    assert!(svg.contains("<polyline") && svg.contains("= -0.7000"));
    assert!(svg.contains("s [operational time, dimensionless]"));

    let empty = tmp.path().join("empty.csv");
    std::fs::write(&empty, "tau,l2\n").unwrap();
    let out = bin().args(["plot"]).arg(&empty).args(["--x", "tau", "--y", "l2"]).output().unwrap();
    assert!(!out.status.success());
    assert!(!tmp.path().join("empty.svg").exists());
}
