use std::path::Path;
use std::process::{Command, Output};

fn mdfield(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdfield"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SMALL: &str = r#"
name = "small-product"
seed = 11
replicates = 300
window = [24, 24]

[field]
kind = "product_iid"

[[laws]]
mode = "ks"
tolerance = 0.25
reference = { law = "product_of_normals", d = 2 }
"#;

#[test]
fn single_replicate_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", &SMALL.replace("replicates = 300", "replicates = 1"));
    let out = mdfield(&["run", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("replicates must be >= 2"), "{err}");
}

#[test]
fn unknown_spec_and_missing_output_dir_parent() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", &SMALL.replace("product_iid", "brownian_sheet"));
    assert_eq!(mdfield(&["run", "--config", &cfg], tmp.path()).status.code(), Some(1));
    let blocker = write(tmp.path(), "file", "");
    let cfg = write(tmp.path(), "ok.toml", SMALL);
    let out = mdfield(&["run", "--config", &cfg, "--out", &format!("{blocker}/sub")], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(mdfield(&["run", "--preset", "nope"], tmp.path()).status.code(), Some(1));
    assert_eq!(mdfield(&["run"], tmp.path()).status.code(), Some(1));
}

#[test]
fn reports_are_reproducible_and_verdicts_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out = mdfield(&["run", "--config", &cfg, "--out", a.to_str().unwrap(), "--threads", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let out = mdfield(&["run", "--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "3"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    for f in ["report.json", "samples.csv", "ecdf.csv", "ecf.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["R"], 300);
    assert!(report.get("timestamp_unix").is_none());
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("meta.json")).unwrap()).unwrap();
    assert!(meta["timestamp_unix"].is_u64());
    let samples = std::fs::read_to_string(a.join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 301);

    // A different seed changes the samples; an impossible tolerance fails with 2.
    let c = tmp.path().join("c");
    mdfield(&["run", "--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "12"], tmp.path());
    assert_ne!(std::fs::read(a.join("samples.csv")).unwrap(), std::fs::read(c.join("samples.csv")).unwrap());
    let strict = write(tmp.path(), "strict.toml", &SMALL.replace("tolerance = 0.25", "tolerance = 0.0001"));
    let out = mdfield(&["run", "--config", &strict, "--out", c.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: fail"));
}

#[test]
fn exactcheck_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mdfield(&["exactcheck"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("torus parity"));

    let broken = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/broken");
    let out = mdfield(&["exactcheck", "--fixtures", broken], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("witness"));

    let bundled = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/exact");
    assert_eq!(mdfield(&["exactcheck", "--fixtures", bundled], tmp.path()).status.code(), Some(0));

    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = mdfield(&["exactcheck", "--fixtures", empty.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));

    write(&empty, "garbage.toml", "name = 3");
    let out = mdfield(&["exactcheck", "--fixtures", empty.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn presets_listing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mdfield(&["presets"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["bessel", "normal-baseline", "product-iid-2d", "product-iid-3d", "chaos-2term", "eta-squared", "convolution"] {
        assert!(text.contains(name), "{name}");
    }
    let out = mdfield(&["presets", "bessel"], tmp.path());
    assert!(String::from_utf8_lossy(&out.stdout).contains("kind = \"sign_flip\""));
}
