use hdx_core::constructors::{named_complex, FIXTURES};
use hdx_core::homology::homology;
use serde_json::Value;

fn manifest() -> Value {
    serde_json::from_str(include_str!("../../../fixtures/manifest.json")).unwrap()
}

#[test]
fn manifest_lists_every_fixture() {
    let m = manifest();
    let entries = m["fixtures"].as_array().unwrap();
    assert_eq!(entries.len(), FIXTURES.len());
    for (e, f) in entries.iter().zip(FIXTURES) {
        assert_eq!(e["name"], f.name);
        assert_eq!(e["description"], f.description);
        assert_eq!(e["h1"], f.h1);
    }
}

#[test]
fn manifest_examples_build_with_documented_h1() {
    for e in manifest()["fixtures"].as_array().unwrap() {
        let pattern = e["h1"].as_str().unwrap();
        for ex in e["examples"].as_array().unwrap() {
            let name = ex.as_str().unwrap();
            let x = named_complex(name).unwrap();
            let h1 = homology(&x, 1).unwrap().to_string();
            let expect = match name.split_once('(') {
                Some((_, arg)) => pattern.replace(['n', 'p'], arg.trim_end_matches(')')),
                None => pattern.to_string(),
            };
            assert_eq!(h1, expect, "{name}");
        }
    }
}
