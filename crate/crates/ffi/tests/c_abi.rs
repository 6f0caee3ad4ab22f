use std::path::PathBuf;
use std::process::Command;

use affordance_core::sim_env::{start_mock_thing, MockThingConfig};

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/affordance.h")).unwrap();
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| {
            l.trim_start()
                .strip_prefix("pub unsafe extern \"C\" fn ")
                .or_else(|| l.trim_start().strip_prefix("pub extern \"C\" fn "))
        })
        .map(|l| l.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct AffMap AffMap;"));
    assert!(header.contains("AFF_STATUS_SCHEMA_MISMATCH = 9"));
}

#[test]
fn c_program_drives_the_room() {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.join("libaffordance_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is installed");
    assert!(status.success());

    let room = start_mock_thing(MockThingConfig::room()).unwrap();
    let td = tmp.path().join("room.td.json");
    std::fs::write(&td, room.td.to_string()).unwrap();
    let out = Command::new(&exe)
        .arg(&td)
        .arg(tmp.path().join("map.json"))
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        out.status.success(),
        "{stdout}\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout.contains("\"name\":\"setTemperature\""), "{stdout}");
    assert!(stdout.contains("\"value\":19.5"), "{stdout}");
    assert!(stdout.contains("mismatch 9 schema mismatch"), "{stdout}");
    assert!(stdout.contains("versions 1 1"), "{stdout}");
    assert!(stdout.contains("pam 1"), "{stdout}");
    assert_eq!(room.property("thermostat"), Some(serde_json::json!(19.5)));
}
