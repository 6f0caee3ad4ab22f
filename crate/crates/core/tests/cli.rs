mod common;

use std::path::Path;
use std::process::{Command, Output};

use affordance_core::sim_env::{
    start_mock_directory, start_mock_thing, start_page_server, MockThingConfig, PageServerConfig,
};
use serde_json::{json, Value};

fn affordance(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affordance"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(rel: &str) -> String {
    common::fixtures().join(rel).to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn transduce_emits_a_page_model() {
    let o = affordance(&[
        "transduce",
        "--input",
        &fixture("pages/01_hotel_booking.html"),
        "--task",
        "book a hotel room",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let pam = stdout_json(&o);
    let links = pam["affordances"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["kind"] == "link")
        .count();
    assert!(links > 0);

    let o = affordance(&[
        "transduce",
        "--input",
        &fixture("pages/01_hotel_booking.html"),
        "--task",
        "book",
        "--emit",
        "stats",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["reduction_ratio"].is_f64());

    let o = affordance(&[
        "transduce",
        "--input",
        &fixture("pages/01_hotel_booking.html"),
        "--task",
        "book",
        "--emit",
        "compact",
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("html>"));
}

#[test]
fn transduce_input_and_config_errors() {
    let o = affordance(&["transduce", "--input", "/definitely/missing.html", "--task", "x"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("missing.html"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "budget = \"lots\"\n").unwrap();
    let o = affordance(&[
        "transduce",
        "--input",
        &fixture("pages/02_news_article.html"),
        "--task",
        "x",
        "--config",
        s(&cfg),
    ]);
    assert_eq!(code(&o), 3);
    assert!(o.stdout.is_empty());

    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"budget": 40}"#).unwrap();
    let o = affordance(&[
        "transduce",
        "--input",
        &fixture("pages/02_news_article.html"),
        "--task",
        "x",
        "--config",
        s(&good),
        "--emit",
        "stats",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn parse_td_modes() {
    let o = affordance(&["parse-td", "--input", &fixture("td/05_combined.td.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout_json(&o)["actions"]["setTemperature"].is_object());

    let o = affordance(&[
        "parse-td",
        "--input",
        &fixture("td/07_read_only_conflict.td.json"),
        "--strict",
    ]);
    assert_eq!(code(&o), 4);
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("read_write_conflict"));

    let o = affordance(&["parse-td", "--input", &fixture("td/07_read_only_conflict.td.json")]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning"));

    let o = affordance(&["parse-td", "--input", &fixture("td/12_malformed.td.json")]);
    assert_eq!(code(&o), 4);

    let room = start_mock_thing(MockThingConfig::room()).unwrap();
    let o = affordance(&["parse-td", "--input", room.td_url().as_str(), "--strict"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout_json(&o)["fetched_from"], room.td_url().as_str());
}

#[test]
fn discover_from_directory() {
    let lamp = |id: &str| {
        json!({"@context": "https://www.w3.org/2022/wot/td/v1.1", "id": id, "title": id,
               "security": "nosec_sc", "securityDefinitions": {"nosec_sc": {"scheme": "nosec"}},
               "actions": {"toggle": {"forms": [{"href": "http://lamp.test/toggle"}]}}})
    };
    let dir = start_mock_directory(vec![lamp("urn:t:a"), lamp("urn:t:b")], 0).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let map = tmp.path().join("map.json");
    let o = affordance(&[
        "discover",
        "--directory",
        dir.server.base_url.as_str(),
        "--map",
        s(&map),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = stdout_json(&o);
    assert_eq!(summary["things_found"], 2);
    assert_eq!(summary["affordances_added"], 2);

    let o = affordance(&["map", "show", "--map", s(&map)]);
    assert_eq!(stdout_json(&o).as_array().unwrap().len(), 2);

    drop(dir);
    let o = affordance(&["discover", "--directory", "http://127.0.0.1:9/", "--map", s(&map)]);
    assert_eq!(code(&o), 5);
    assert!(stderr(&o).contains("network error"));
}

#[test]
fn hotel_flow_through_the_command_line() {
    let room = start_mock_thing(MockThingConfig::room()).unwrap();
    let pages = start_page_server(
        PageServerConfig::new(common::fixtures().join("site")).var("room_td", room.td_url().as_str()),
    )
    .unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let (pam, map) = (tmp.path().join("pam.json"), tmp.path().join("map.json"));

    let o = affordance(&[
        "transduce",
        "--input",
        pages.url("booking.html").as_str(),
        "--task",
        "book a hotel room",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    std::fs::write(&pam, &o.stdout).unwrap();

    let o = affordance(&["discover", "--from-pam", s(&pam), "--map", s(&map), "--strict"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = stdout_json(&o);
    assert_eq!(summary["things_found"], 1);
    assert_eq!(summary["upserted"][0]["thing_id"], "urn:dev:hotel:room-101");

    let o = affordance(&["map", "query", "--map", s(&map), "--text", "temperature"]);
    let lines: Vec<Value> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["name"], "setTemperature");

    let thing = "urn:dev:hotel:room-101";
    let o = affordance(&[
        "invoke",
        "--map",
        s(&map),
        "--thing",
        thing,
        "--action",
        "setTemperature",
        "--input",
        "19.5",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout_json(&o)["status"], "ok");

    let o = affordance(&["read", "--map", s(&map), "--thing", thing, "--property", "thermostat"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["value"], 19.5);

    let o = affordance(&[
        "write",
        "--map",
        s(&map),
        "--thing",
        thing,
        "--property",
        "thermostat",
        "--input",
        "22",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(room.property("thermostat"), Some(json!(22)));

    let o = affordance(&[
        "invoke",
        "--map",
        s(&map),
        "--thing",
        "urn:nobody",
        "--action",
        "setTemperature",
    ]);
    assert_eq!(code(&o), 6);
    let o = affordance(&["invoke", "--map", s(&map), "--thing", thing, "--action", "fly"]);
    assert_eq!(code(&o), 6);
    let o = affordance(&[
        "invoke",
        "--map",
        s(&map),
        "--thing",
        thing,
        "--action",
        "setTemperature",
        "--input",
        "\"warm\"",
    ]);
    assert_eq!(code(&o), 7);
    assert!(stderr(&o).contains("schema mismatch"));
    let o = affordance(&[
        "invoke",
        "--map",
        s(&map),
        "--thing",
        thing,
        "--action",
        "setTemperature",
        "--input",
        "{oops",
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(room.property("thermostat"), Some(json!(22)));
}

#[test]
fn map_file_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.json");
    std::fs::write(&empty, r#"{"schema_version": 1, "version": 0, "entries": {}}"#).unwrap();
    let o = affordance(&["map", "show", "--map", s(&empty)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o), json!([]));

    let o = affordance(&["map", "query", "--map", s(&empty), "--kind", "action"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());

    let corrupt = tmp.path().join("corrupt.json");
    std::fs::write(&corrupt, r#"{"schema_version": 1, "version": 0, "entr"#).unwrap();
    let o = affordance(&["map", "show", "--map", s(&corrupt)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("corrupt map file at byte"));

    let o = affordance(&["map", "query", "--map", s(&empty)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&affordance(&["transduce"])), 2);
    assert_eq!(code(&affordance(&["no-such-command"])), 2);
    assert_eq!(code(&affordance(&["--help"])), 0);
}
