use std::path::Path;
use std::process::{Command, Output};

fn ftn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftn")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_base(dir: &Path) -> String {
    let path = dir.join("base.toml");
    std::fs::write(&path, "M = 4\ntau = 0.9\nN = 6\nL = 50\nseed = 3\n").unwrap();
    path.to_str().unwrap().to_string()
}

fn column<'a>(csv: &'a str, name: &str) -> Vec<&'a str> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let at = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(at).unwrap()).collect()
}

#[test]
fn simulate_override_reaches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let base = write_base(dir.path());
    let out = dir.path().join("ber.csv");
    let o = ftn(&[
        "simulate", "--config", &base, "--override", "tau=0.85", "--snr-grid", "4:8:4", "--trials", "32",
        "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(column(&csv, "tau"), ["0.85", "0.85"]);
    assert_eq!(column(&csv, "M"), ["4", "4"]);
    assert_eq!(column(&csv, "snr_db"), ["4", "8"]);
}

#[test]
fn simulate_is_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let base = write_base(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = ftn(&[
            "simulate", "--config", &base, "--detector", "sdr-psk,mlse", "--snr-grid", "6:10:4", "--trials", "64",
            "--output", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let csv = std::fs::read_to_string(&out).unwrap();
        csv.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>()
    };
    let a = run("a.csv");
    assert_eq!(a.len(), 5);
    assert_eq!(a, run("b.csv"));
}

#[test]
fn sweep_se_values() {
    let o = ftn(&["sweep-se", "--M", "8", "--beta", "0.3", "--tau", "0.75,0.8,0.85"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let se: Vec<f64> = column(&text, "se_bits_per_s_per_hz").iter().map(|s| s.parse().unwrap()).collect();
    for (got, want) in se.iter().zip([3.0769, 2.8846, 2.7149]) {
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    }
    let gain: f64 = column(&text, "gain_vs_nyquist_pct")[2].parse().unwrap();
    assert!((gain - 17.647).abs() < 1e-3);
}

#[test]
fn verify_covariance_summary() {
    let o = ftn(&["verify-covariance", "--N", "8", "--tau", "0.8", "--sigma2", "1", "--trials", "100000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    let rel: f64 = line
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("frobenius_relative_error="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rel < 0.05, "{line}");
}

#[test]
fn detect_recovers_noiseless_block() {
    // QPSK, N = 1 at tau = 1: the whitened channel is the scalar 1.
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("rx.txt");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    std::fs::write(&input, format!("# one sample\n{} {}\n", -s, s)).unwrap();
    for detector in ["sdr-psk", "mlse"] {
        let o = ftn(&["detect", "--M", "4", "--tau", "1", "--detector", detector, "--input", input.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o).trim(), "1");
    }
}

#[test]
fn exit_codes_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let usage = ftn(&["simulate", "--bogus"]);
    assert_eq!(usage.status.code(), Some(2));
    assert!(stderr(&usage).starts_with("error kind=usage code=2 "));
    assert_eq!(stderr(&usage).lines().count(), 1);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "tau = [").unwrap();
    let config = ftn(&["sweep-se", "--config", bad.to_str().unwrap()]);
    assert_eq!(config.status.code(), Some(3));
    assert!(stderr(&config).starts_with("error kind=config code=3 "));

    let missing = ftn(&["sweep-se", "--config", dir.path().join("none.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(3));

    let unwritable = dir.path().join("no/such/dir/out.csv");
    let output = ftn(&["sweep-se", "--output", unwritable.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(4));
    assert!(stderr(&output).starts_with("error kind=output code=4 "));

    let runtime = ftn(&["simulate", "--M", "8", "--N", "9", "--detector", "mlse", "--snr-grid", "5:5:1"]);
    assert_eq!(runtime.status.code(), Some(1));
    assert!(stderr(&runtime).starts_with("error kind=runtime code=1 "));
}
