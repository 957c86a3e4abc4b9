use std::path::PathBuf;

use serde_json::{json, Value};

use hyperview_cli::api::handle;
use hyperview_cli::cli::run;
use hyperview_cli::session::Store;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn hyperview(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("hyperview").chain(args.iter().copied());
    let code = run(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn applied_rule_line() {
    let wbc = data("wbc.csv");
    let (code, out) = hyperview(&["rules", &wbc, "--apply", "X6 < 3 → B"]);
    assert_eq!(code, 0);
    assert_eq!(out, "X6 < 3 → B (623/683 = 91.22%)\n");
}

#[test]
fn unknown_flag_fails() {
    let wbc = data("wbc.csv");
    assert_ne!(hyperview(&["rules", &wbc, "--frobnicate"]).0, 0);
    assert_ne!(hyperview(&["frobnicate"]).0, 0);
    assert_ne!(hyperview(&[]).0, 0);
    assert_eq!(hyperview(&["--help"]).0, 0);
}

#[test]
fn missing_file_fails() {
    assert_eq!(hyperview(&["load", "/nonexistent.csv"]).0, 1);
}

#[test]
fn render_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let wbc = data("wbc.csv");
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for p in [&a, &b] {
        let (code, _) = hyperview(&[
            "render",
            &wbc,
            "--view",
            "polylines",
            "--svg",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let a = std::fs::read(a).unwrap();
    assert!(a.starts_with(b"<svg"));
    assert_eq!(a, std::fs::read(b).unwrap());
}

#[test]
fn cli_and_http_agree_byte_for_byte() {
    let wbc = data("wbc.csv");
    let store = Store::default();
    let csv = std::fs::read_to_string(&wbc).unwrap();
    let r = handle(
        &store,
        "POST",
        "/sessions",
        "",
        json!({ "csv": csv }).to_string().as_bytes(),
    );
    let id = serde_json::from_str::<Value>(&r.body).unwrap()["id"]
        .as_str()
        .unwrap()
        .to_string();

    for view in ["polylines", "frequency"] {
        let (code, cli) = hyperview(&["render", &wbc, "--view", view]);
        assert_eq!(code, 0);
        let http = handle(
            &store,
            "GET",
            &format!("/sessions/{id}/scene"),
            &format!("view={view}"),
            b"",
        );
        assert_eq!(cli.trim_end(), http.body, "{view}");
    }

    let (_, cli) = hyperview(&["describe", &wbc, "--json"]);
    let http = handle(
        &store,
        "GET",
        &format!("/sessions/{id}/linguistic"),
        "",
        b"",
    );
    assert_eq!(cli.trim_end(), http.body);

    handle(
        &store,
        "POST",
        &format!("/sessions/{id}/hyperblocks"),
        "",
        b"{\"half_length\": 0.2}",
    );
    for view in ["heat", "sidebyside"] {
        let (_, cli) = hyperview(&["render", &wbc, "--view", view, "--half-length", "0.2"]);
        let http = handle(
            &store,
            "GET",
            &format!("/sessions/{id}/scene"),
            &format!("view={view}"),
            b"",
        );
        assert_eq!(cli.trim_end(), http.body, "{view}");
    }
}

#[test]
fn crossval_assert_sets_exit_code() {
    let wbc = data("wbc.csv");
    let (code, out) = hyperview(&[
        "crossval",
        &wbc,
        "--folds",
        "3",
        "--variant",
        "N2",
        "--assert",
        "90",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("average"));
    let (code, _) = hyperview(&[
        "crossval",
        &wbc,
        "--folds",
        "3",
        "--variant",
        "N2",
        "--assert",
        "99.99",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn model_bundle_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let wbc = data("wbc.csv");
    let model = dir.path().join("model.json");
    let m = model.to_str().unwrap();
    assert_eq!(hyperview(&["learn", &wbc, "--model", m]).0, 0);
    let point = "X1=1,X2=1,X3=1,X4=1,X5=1,X6=1,X7=1,X8=1,X9=1";
    let (_, saved) = hyperview(&["classify", &wbc, "--model", m, "--point", point]);
    let (_, fresh) = hyperview(&["classify", &wbc, "--point", point]);
    assert_eq!(saved, fresh);
    let v: Value = serde_json::from_str(&saved).unwrap();
    assert_eq!(v["class"], "B");
}

#[test]
fn ecv_tokens_survive_render() {
    let dir = tempfile::tempdir().unwrap();
    let ecv = data("ecv_missing.csv");
    let json = dir.path().join("scene.json");
    let (code, _) = hyperview(&["render", &ecv, "--json", json.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(json).unwrap();
    for token in [
        "did not record",
        "?",
        "Empty",
        "n/c",
        "in other place",
        "n/a",
    ] {
        assert!(text.contains(&format!("\"token\":\"{token}\"")), "{token}");
    }
}
