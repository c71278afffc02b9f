use std::path::Path;
use std::process::{Command, Output};

use building_dmpc::sim::build_paper_scenario;

fn bdmpc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdmpc")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn short_scenario(dir: &Path, seconds: f64) -> String {
    let mut s = build_paper_scenario();
    s.duration = seconds;
    let p = dir.join("short.json");
    std::fs::write(&p, s.to_json().unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn help_matches_golden() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/help.txt");
    let actual = building_dmpc::cli::full_help();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &actual).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).unwrap();
    assert_eq!(actual, expected, "help text changed; rerun with UPDATE_GOLDEN=1 after review");
    for flag in [
        "--model", "--scenario", "--controller", "--horizon-p", "--horizon-m", "--coordination", "--no-preview", "--out",
        "--jobs", "--seed", "--config", "--check",
    ] {
        assert!(actual.contains(flag), "{flag} undocumented");
    }
}

#[test]
fn run_both_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let sc = short_scenario(dir.path(), 40.0);
    let o = bdmpc(&["run", "--scenario", &sc, "--out", "res"], dir.path());
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("res/report.txt")).unwrap();
    assert!(report.contains("forecast: preview"));
    assert!(report.contains("cmpc") && report.contains("dmpc"));
    for f in ["trace_cmpc.csv", "trace_dmpc.csv", "metrics.csv"] {
        assert!(dir.path().join("res").join(f).is_file());
    }
}

#[test]
fn no_preview_recorded_in_report() {
    let dir = tempfile::tempdir().unwrap();
    let sc = short_scenario(dir.path(), 20.0);
    let o = bdmpc(&["run", "--scenario", &sc, "--controller", "distributed", "--no-preview", "--out", "np"], dir.path());
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("np/report.txt")).unwrap();
    assert!(report.starts_with("scenario: day-24h\nforecast: persistence\n"), "{report}");
}

#[test]
fn missing_model_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = bdmpc(&["run", "--model", "absent.json"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(text(&o.stderr).contains("absent.json"));
}

#[test]
fn certify_default_and_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = bdmpc(&["certify", "--out", "cert"], dir.path());
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let doc = building_dmpc::matrix_text::MatrixDoc::parse(&text(&o.stdout)).unwrap();
    assert!(doc.scalar("bound").unwrap() >= 1.0);
    assert!(doc.scalar("residual").unwrap() < 1e-8);
    let o = bdmpc(&["certify", "--check", "cert/certificate.txt"], dir.path());
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("residual"));
}

#[test]
fn tampered_certificate_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bdmpc(&["certify", "--controller", "centralized", "--out", "c"], dir.path())), 0);
    let path = dir.path().join("c/certificate.txt");
    let mut doc = building_dmpc::matrix_text::MatrixDoc::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let p = doc.matrix("P").unwrap() * 1.5;
    for (name, e) in doc.entries.iter_mut() {
        if name == "P" {
            *e = building_dmpc::matrix_text::Entry::Matrix(p.clone());
        }
    }
    std::fs::write(&path, doc.to_text()).unwrap();
    assert_eq!(code(&bdmpc(&["certify", "--check", "c/certificate.txt"], dir.path())), 4);
}

#[test]
fn identity_matrix_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("id.txt"), "matrix A 2 2\n1 0\n0 1\n").unwrap();
    let o = bdmpc(&["certify", "--matrix", "id.txt"], dir.path());
    assert_eq!(code(&o), 4);
    assert!(text(&o.stderr).contains("spectral radius 1"), "{}", text(&o.stderr));
}

#[test]
fn dump_config_round_trip_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let sc = short_scenario(dir.path(), 20.0);
    let o = bdmpc(&["dump-config", "--scenario", &sc, "--horizon-p", "8", "--horizon-m", "2", "--out", "a"], dir.path());
    assert_eq!(code(&o), 0);
    std::fs::write(dir.path().join("cfg.json"), &o.stdout).unwrap();
    let again = bdmpc(&["dump-config", "--config", "cfg.json"], dir.path());
    assert_eq!(again.stdout, o.stdout);

    assert_eq!(code(&bdmpc(&["run", "--scenario", &sc, "--horizon-p", "8", "--horizon-m", "2", "--out", "a"], dir.path())), 0);
    assert_eq!(code(&bdmpc(&["run", "--config", "cfg.json", "--out", "b"], dir.path())), 0);
    for f in ["trace_cmpc.csv", "trace_dmpc.csv"] {
        let strip = |p: &Path| -> Vec<String> {
            std::fs::read_to_string(p).unwrap().lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
        };
        assert_eq!(strip(&dir.path().join("a").join(f)), strip(&dir.path().join("b").join(f)), "{f}");
    }
}

#[test]
fn scenario_gen_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let o = bdmpc(&["scenario-gen", "--seed", "5", "--out", "s.json"], dir.path());
    assert_eq!(code(&o), 0);
    let s = building_dmpc::sim::Scenario::load(&dir.path().join("s.json")).unwrap();
    assert_eq!(s.seed, 5);
    let sc = short_scenario(dir.path(), 15.0);
    assert_eq!(code(&bdmpc(&["run", "--scenario", &sc, "--controller", "centralized", "--out", "m"], dir.path())), 0);
    let o = bdmpc(&["metrics", "m/trace_cmpc.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let out = text(&o.stdout);
    assert!(out.starts_with("controller,metric,zone,value\n"));
    assert!(out.contains("cmpc,control_area,,"));
}

#[test]
fn malformed_trace_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "k,t,x1,u1,d,ref1,solve_ms\n0,0,1,2,x,4,5\n").unwrap();
    let o = bdmpc(&["metrics", "bad.csv"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(text(&o.stderr).contains("line 2"));
}
