use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn hdx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdx")).args(args).output().expect("hdx runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hdx-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn total_cells(doc: &Value) -> usize {
    doc["cells"].as_array().unwrap().iter().map(|d| d.as_array().unwrap().len()).sum()
}

#[test]
fn generate_hypercube_counts() {
    let doc = json(&hdx(&["generate", "--hypercube", "4", "--skeleton", "2"]));
    assert_eq!(total_cells(&doc), 16 + 32 + 24);
    assert_eq!(doc["provenance"]["schema_version"], 1);
}

#[test]
fn generated_complex_round_trips_through_analyze() {
    let doc = json(&hdx(&["generate", "--simplex-boundary", "3"]));
    let p = scratch("tetra.json", &doc.to_string());
    let out = json(&hdx(&["analyze", p.to_str().unwrap(), "--no-spectral"]));
    assert_eq!(out["command"], "analyze");
    assert_eq!(out["result"]["homology"]["betti"], serde_json::json!([0, 0, 1]));
}

#[test]
fn empty_input_is_an_input_error() {
    let p = scratch("empty.json", "");
    let out = hdx(&["analyze", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn missing_file_and_bad_flags() {
    assert_eq!(hdx(&["analyze", "/nonexistent/x.json"]).status.code(), Some(3));
    assert_eq!(hdx(&["analyze", "rp2-6", "--p", "7"]).status.code(), Some(2));
    assert_eq!(hdx(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hdx(&["verify", "nope"]).status.code(), Some(2));
}

#[test]
fn cap_exceeded_names_alternatives() {
    let out = hdx(&["cheeger", "hypercube(4,2)", "--dim", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("heuristic or lp-enum"));
}

#[test]
fn surgery_table_as_csv() {
    let p = scratch("hopf.csv", "0,1\n1,0\n");
    let out = hdx(&["surgery", "--matrix", p.to_str().unwrap(), "--q-range", "2:10", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let header = rows.headers().unwrap().clone();
    let qi = header.iter().position(|h| h == "q").unwrap();
    let di = header.iter().position(|h| h == "determinant").unwrap();
    let recs: Vec<_> = rows.records().map(Result::unwrap).collect();
    assert_eq!(recs.len(), 9);
    for r in recs {
        let q: i64 = r[qi].parse().unwrap();
        assert_eq!(r[di].parse::<i64>().unwrap(), q * q - 1);
    }
}

#[test]
fn verify_surgery_passes() {
    let out = hdx(&["verify", "surgery"]);
    let doc = json(&out);
    assert_eq!(doc["result"]["passed"], true);
}

#[test]
fn output_is_deterministic() {
    let a = hdx(&["analyze", "rp2-6", "--p", "1,inf"]);
    let b = hdx(&["--threads", "1", "analyze", "rp2-6", "--p", "1,inf"]);
    let c = hdx(&["--sequential", "analyze", "rp2-6", "--p", "1,inf"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn cover_doubles_rp2() {
    let base = json(&hdx(&["generate", "--named", "rp2-6"]));
    let cover = json(&hdx(&["cover", "--input", "rp2-6"]));
    assert_eq!(total_cells(&cover), 2 * total_cells(&base));
    let p = scratch("rp2-cover.json", &cover.to_string());
    let h = json(&hdx(&["homology", p.to_str().unwrap()]));
    assert_eq!(h["result"]["display"], serde_json::json!(["0", "0", "Z"]));
}

#[test]
fn hypercube_certificates_verify() {
    let doc = json(&hdx(&["hypercube", "contract", "--random-length", "10", "--deg", "4", "--seed", "7", "--emit-certificate"]));
    assert_eq!(doc["result"]["certificate_verified"]["ok"], true);
    assert!(doc["result"]["certificate"]["steps"].is_array());
    let doc = json(&hdx(&["hypercube", "decompose", "--deg", "3", "--cell", "1"]));
    assert_eq!(doc["result"]["certificate_verified"]["ok"], true);
    assert!(doc["result"].get("certificate").is_none());
}

#[test]
fn fill_reads_chain_files() {
    let p = scratch("chain.json", r#"{"dim": 0, "coeffs": [[0, "1"], [3, "-1"]]}"#);
    let doc = json(&hdx(&["fill", "cycle(6)", "--chain", p.to_str().unwrap()]));
    assert_eq!(doc["command"], "fill");
    let csv_out = hdx(&["fill", "cycle(6)", "--chain", p.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(csv_out.status.code(), Some(2));
}

#[test]
fn output_file_and_human_format() {
    let dir = std::env::temp_dir().join(format!("hdx-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("h.txt");
    let out = hdx(&["homology", "klein-8", "--format", "human", "-o", p.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(p).unwrap();
    assert!(text.contains("Z + Z/2"));
}

#[test]
fn timings_only_on_request() {
    let plain = json(&hdx(&["spectral", "torus-7"]));
    assert!(plain.get("timings").is_none());
    let timed = json(&hdx(&["--timings", "spectral", "torus-7"]));
    assert!(timed["timings"].is_array());
}
