use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "\
grid.dim: 1
grid.points: 256
grid.box_length: 320
interaction.kind: linear_localized
interaction.v0: 1
interaction.sigma: 5
initial.q0: 1
initial.packets: 1
initial.packet0.width: 1
time.dt: 0.125
time.t_end: 9
schedule.stride: 1
schedule.store_every: 4
probes.list: ledger,duhamel,weak_vanishing
probes.window: 2:8
";

fn quartic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quartic")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "good.txt", SMALL);
    assert_eq!(quartic(&["validate", &good]).status.code(), Some(0));

    let bad = write_config(dir.path(), "bad.txt", &format!("{SMALL}scattering.alpha: 0.3\n"));
    let out = quartic(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));

    let unknown = write_config(dir.path(), "unknown.txt", &format!("{SMALL}grid.colour: red\n"));
    assert_eq!(quartic(&["validate", &unknown]).status.code(), Some(1));
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.txt", &SMALL.replace("box_length: 320", "box_length: 20"));
    let out_dir = dir.path().join("run");
    let out = quartic(&["simulate", &bad, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());
}

#[test]
fn stop_and_resume_matches_uninterrupted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.txt", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let full = quartic(&["simulate", &cfg, "--out", a.to_str().unwrap()]);
    assert!(matches!(full.status.code(), Some(0 | 3)), "{}", String::from_utf8_lossy(&full.stderr));

    let part = quartic(&["simulate", &cfg, "--out", b.to_str().unwrap(), "--stop-after", "20"]);
    assert_eq!(part.status.code(), Some(0));
    let m = fs::read_to_string(b.join("manifest.txt")).unwrap();
    assert!(m.contains("status: incomplete"));
    assert!(!b.join("summary.json").exists());

    let res = quartic(&["resume", b.join("manifest.txt").to_str().unwrap()]);
    assert_eq!(res.status.code(), full.status.code());
    for name in ["psi_0000000064.bin", "summary.json", "probes.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn fit_reads_probe_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("decay,-1.5,none\nt,value\n");
    for k in 0..12 {
        let t = 2f64.powi(k);
        csv.push_str(&format!("{t},{}\n", 3.0 * t.powf(-1.5)));
    }
    let p = write_config(dir.path(), "p.csv", &csv);
    let out = quartic(&["fit", &p, "--window", "1:2048"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("exponent -1.5000"));

    let broken = write_config(dir.path(), "b.csv", "decay,none,none\nt,value\n1,x\n");
    assert_eq!(quartic(&["fit", &broken, "--window", "1:2"]).status.code(), Some(1));
}

#[test]
fn analyze_rejects_unknown_probe() {
    let dir = tempfile::tempdir().unwrap();
    let out = quartic(&["analyze", dir.path().to_str().unwrap(), "--probes", "wave,nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}
