use std::fs;
use std::path::PathBuf;

use conik::cli::{parse_cone_spec, parse_vector};
use conik::ipm::ConicProgram;
use conik::{Cone, ConeDescriptor};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn cone_spec_seeds() {
    let mut accepted = 0;
    for (_, data) in seeds("cone_spec") {
        if let Ok(text) = std::str::from_utf8(&data) {
            accepted += parse_cone_spec(text).is_ok() as usize;
        }
    }
    assert!(accepted >= 10);
}

#[test]
fn cone_json_seeds() {
    for (name, data) in seeds("cone_json") {
        let built = serde_json::from_slice::<ConeDescriptor>(&data)
            .map_err(|e| e.to_string())
            .and_then(|d| Cone::new(d).map_err(|e| e.to_string()));
        let invalid = matches!(name.as_str(), "asymmetric.json" | "empty_soc.json");
        assert_eq!(built.is_err(), invalid, "{name}: {:?}", built.err());
    }
}

#[test]
fn instance_json_seeds() {
    for (name, data) in seeds("instance_json") {
        let parsed = std::str::from_utf8(&data)
            .map_err(|e| e.to_string())
            .and_then(|t| ConicProgram::from_json(t).map_err(|e| e.to_string()));
        assert_eq!(parsed.is_err(), name == "truncated.json", "{name}: {:?}", parsed.err());
    }
}

#[test]
fn vector_spec_seeds() {
    let parsed: Vec<_> = seeds("vector_spec")
        .into_iter()
        .map(|(_, d)| parse_vector(std::str::from_utf8(&d).unwrap()).is_ok())
        .collect();
    assert!(parsed.iter().any(|&ok| ok) && parsed.iter().any(|&ok| !ok));
}
