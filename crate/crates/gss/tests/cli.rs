use std::path::Path;
use std::process::{Command, Output};

use gss::container::{load_expansion, save_expansion};
use gss::csvio::{parse_table, read_trajectory};

const DUFFING: &str = "n = 1\nmass = [[1.0]]\ndamping = [[0.2]]\nstiffness = [[1.0]]\n\n[[terms]]\nexponents = [3, 0]\ntarget_dof = 0\ncoefficient = 0.5\n";
const LINEAR: &str = "n = 2\nmass = [[1.0, 0.0], [0.0, 2.0]]\ndamping = [[0.3, -0.1], [-0.1, 0.2]]\nstiffness = [[2.0, -1.0], [-1.0, 3.0]]\n";

fn gss(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gss")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = gss(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("duffing.toml"), DUFFING).unwrap();
    std::fs::write(dir.path().join("linear.toml"), LINEAR).unwrap();
    dir
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    parse_table(&std::fs::read_to_string(path).unwrap()).unwrap().rows
}

#[test]
fn malformed_system_is_a_config_error() {
    let dir = setup();
    std::fs::write(dir.path().join("bad.toml"), "n = 2\nmass = [[1.0]]\n").unwrap();
    std::fs::write(dir.path().join("f.csv"), "0.0\n1.0\n").unwrap();
    let out = gss(dir.path(), &["compute", "--system", "bad.toml", "--forcing", "f.csv", "--dt", "0.1", "--out", "z.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: ConfigError"));
    let out = gss(dir.path(), &["compute", "--system", "missing.toml", "--forcing", "f.csv", "--dt", "0.1", "--out", "z.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cutoff_above_nyquist_exits_with_config_code() {
    let dir = setup();
    let out = gss(
        dir.path(),
        &["generate", "--duration", "1", "--dt", "0.01", "--delta", "1", "--out", "g.csv", "gaussian", "--sigma", "1", "--cutoff", "80"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("InvalidCutoff"));
}

#[test]
fn near_resonant_frc_point_is_flagged_not_fatal() {
    let dir = setup();
    std::fs::write(dir.path().join("light.toml"), DUFFING.replace("[[0.2]]", "[[2e-9]]")).unwrap();
    let report = ok(
        dir.path(),
        &["frc", "--system", "light.toml", "--omega-min", "0.5", "--omega-max", "1.0", "--points", "2", "--delta", "0.1", "--order", "3", "--out", "frc.csv"],
    );
    assert!(report.contains("near_resonance: 1"));
    let text = std::fs::read_to_string(dir.path().join("frc.csv")).unwrap();
    assert!(text.lines().nth(2).unwrap().contains("near_resonance"));
}

#[test]
fn linear_system_output_does_not_depend_on_order() {
    let dir = setup();
    ok(dir.path(), &["generate", "--duration", "10", "--dt", "0.01", "--delta", "0.8", "--n", "2", "--dofs", "0,1", "--out", "f.csv", "chirp", "--omega0", "0.2"]);
    let base = ["compute", "--system", "linear.toml", "--forcing", "f.csv", "--dt", "0.01"];
    ok(dir.path(), &[&base[..], &["--order", "1", "--out", "o1.csv"]].concat());
    ok(dir.path(), &[&base[..], &["--order", "5", "--out", "o5.csv"]].concat());
    let (a, b) = (rows(&dir.path().join("o1.csv")), rows(&dir.path().join("o5.csv")));
    assert_eq!(a.len(), 1001);
    assert_eq!(a[0].len(), 5);
    assert_eq!(a, b);
}

#[test]
fn padding_is_cut_from_the_output() {
    let dir = setup();
    std::fs::write(dir.path().join("f.csv"), "t,g\n0.0,0.0\n0.5,1.0\n1.0,0.5\n1.5,0.0\n").unwrap();
    ok(dir.path(), &["compute", "--system", "duffing.toml", "--forcing", "f.csv", "--pad", "2", "--out", "z.csv"]);
    let r = rows(&dir.path().join("z.csv"));
    assert_eq!(r.len(), 4);
    assert_eq!(r[0][0], 0.0);
    assert!(r[0][1].abs() < 1e-15 && r[1][1] > 0.0);
}

#[test]
fn saved_expansion_round_trips_exactly() {
    let dir = setup();
    ok(dir.path(), &["generate", "--duration", "20", "--dt", "0.05", "--delta", "0.4", "--out", "f.csv", "two-tone", "--omega1", "0.6", "--omega2", "1.3"]);
    ok(
        dir.path(),
        &["compute", "--system", "duffing.toml", "--forcing", "f.csv", "--dt", "0.05", "--order", "6", "--out", "z.csv", "--expansion-out", "exp"],
    );
    let e = load_expansion(&dir.path().join("exp")).unwrap();
    assert_eq!(e.order(), 6);
    save_expansion(&dir.path().join("again"), &e).unwrap();
    let f = load_expansion(&dir.path().join("again")).unwrap();
    for nu in 1..=6 {
        assert_eq!(e.coeffs.order(nu).unwrap(), f.coeffs.order(nu).unwrap());
    }
    assert_eq!(e.eigenvalues, f.eigenvalues);
    assert_eq!(e.delta_ref.to_bits(), f.delta_ref.to_bits());
    // summing the saved expansion reproduces the written trajectory
    let (_, z) = read_trajectory(&dir.path().join("z.csv"), 2).unwrap();
    assert_eq!(&e.evaluate_at_amplitude(e.delta_ref), &z);

    // at small amplitude the resummation stays on the Taylor sum
    ok(
        dir.path(),
        &["compute", "--system", "duffing.toml", "--forcing", "f.csv", "--dt", "0.05", "--order", "6", "--delta", "0.04", "--out", "z4.csv"],
    );
    ok(dir.path(), &["pade", "--expansion", "exp", "--pade", "3:3", "--delta", "0.04", "--out", "p.csv"]);
    let (p, s) = (rows(&dir.path().join("p.csv")), rows(&dir.path().join("z4.csv")));
    let peak = s.iter().map(|r| r[1].abs()).fold(0.0, f64::max);
    let gap = p.iter().zip(&s).map(|(a, b)| (a[1] - b[1]).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-5 * peak, "{gap} vs {peak}");
    let out = gss(dir.path(), &["pade", "--expansion", "exp", "--pade", "4:3", "--out", "p.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_on_zero_forcing_is_exact() {
    let dir = setup();
    std::fs::write(dir.path().join("f.csv"), "0.0\n0.0\n0.0\n0.0\n").unwrap();
    let report = ok(dir.path(), &["compare", "--system", "duffing.toml", "--forcing", "f.csv", "--dt", "0.1", "--out", "c.csv"]);
    assert!(report.contains("nmte: 0e0"), "{report}");
    let r = rows(&dir.path().join("c.csv"));
    assert_eq!(r[0].len(), 5);
    assert!(r.iter().all(|row| row[1..].iter().all(|&v| v == 0.0)));
}

#[test]
fn generators_are_deterministic() {
    let dir = setup();
    for name in ["a.csv", "b.csv"] {
        ok(dir.path(), &["generate", "--duration", "5", "--dt", "0.01", "--delta", "1", "--out", name, "rossler", "--seed", "7"]);
    }
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(dir.path().join("b.csv")).unwrap());
    assert_eq!(rows(&dir.path().join("a.csv")).len(), 501);
}

#[test]
fn diagnose_reports_the_spectrum() {
    let dir = setup();
    let report = ok(dir.path(), &["diagnose", "--system", "duffing.toml", "--ball", "0.05", "--delta", "0.001", "--dt", "0.01"]);
    assert!(report.contains("damping: structural"));
    assert!(report.contains("satisfied: true"));
    // lambda = -0.1 +- i sqrt(0.99)
    assert!(report.contains("-1.0000000000e-1 +9.9498743711e-1i"), "{report}");
}
