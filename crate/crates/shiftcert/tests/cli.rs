use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shiftcert"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn code(cmd: &mut Command) -> (i32, String) {
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr))
}

fn certify(cfg: &Path, out: &Path) -> (i32, String) {
    code(bin().arg("certify").arg("--config").arg(cfg).arg("--out").arg(out).args(["--threads", "2"]))
}

#[test]
fn certify_inspect_export() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let (c, text) = certify(&config("affine.json"), &run);
    assert_eq!(c, 0, "{text}");
    assert!(text.contains("Verified"));
    assert!(run.join("certificate.json").exists());
    let (c, text) = code(bin().arg("inspect").arg(run.join("maps").join("composite.bin")));
    assert_eq!(c, 0);
    assert!(text.contains("cubes: 36864"), "{text}");
    let (c, text) = code(bin().args(["export", "--plots"]).arg(dir.path().join("plots")).arg("--from").arg(&run));
    assert_eq!(c, 0, "{text}");
    for f in ["n.csv", "core.csv", "exit.csv", "inv.csv", "return_map.csv", "certificate.json"] {
        assert!(dir.path().join("plots").join(f).exists(), "{f}");
    }
    // resume from the stored stage maps gives the same certificate
    let again = dir.path().join("again");
    let (c, _) = code(bin().arg("certify").arg("--config").arg(config("affine.json")).arg("--out").arg(&again).arg("--resume").arg(run.join("maps")));
    assert_eq!(c, 0);
    let a = shiftcert::ChaosCertificate::read(&run.join("certificate.json")).unwrap();
    let b = shiftcert::ChaosCertificate::read(&again.join("certificate.json")).unwrap();
    assert_eq!(a.canonical_json(), b.canonical_json());
}

#[test]
fn exit_codes_separate_negative_from_broken() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(config("affine_tight.json")).unwrap()).unwrap();
    cfg["refine"]["max_halvings"] = 0.into();
    let undecided = dir.path().join("undecided.json");
    std::fs::write(&undecided, cfg.to_string()).unwrap();
    assert_eq!(certify(&undecided, &dir.path().join("a")).0, 10);

    cfg["grid"]["eta"] = 0.3.into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, cfg.to_string()).unwrap();
    assert_eq!(certify(&bad, &dir.path().join("b")).0, 20);

    cfg["grid"]["eta"] = 0.0625.into();
    cfg["system"]["lift"] = serde_json::json!([[22, 3], [22, 3]]);
    let escapes = dir.path().join("escapes.json");
    std::fs::write(&escapes, cfg.to_string()).unwrap();
    assert_eq!(certify(&escapes, &dir.path().join("c")).0, 21);

    let (c, text) = certify(&dir.path().join("missing.json"), &dir.path().join("d"));
    assert_eq!(c, 22);
    assert!(text.contains("missing.json"));

    let junk = dir.path().join("junk.bin");
    std::fs::write(&junk, [0u8; 100]).unwrap();
    assert_eq!(code(bin().arg("inspect").arg(&junk)).0, 23);
}
