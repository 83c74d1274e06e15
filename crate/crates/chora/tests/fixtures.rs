use std::path::PathBuf;

use chora::catalog::fixture_files;
use chora::diagram::Diagram;
use chora::rewrite::{census, normalize_choroi};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn fixture_files_match_the_catalog() {
    for (rel, text) in fixture_files() {
        let on_disk = std::fs::read_to_string(root().join(&rel))
            .unwrap_or_else(|e| panic!("{rel}: {e}; regenerate with `cargo run -p chora --example gen_fixtures`"));
        assert_eq!(on_disk, text, "{rel} is stale");
    }
}

#[test]
fn diagram_fixtures_are_valid_and_stable() {
    for (rel, text) in fixture_files() {
        if rel.starts_with("atlas/") {
            continue;
        }
        let d = Diagram::from_json(&text).unwrap();
        assert!(d.is_valid(), "{rel}: {:?}", d.validate());
        assert_eq!(d.to_json() + "\n", text);
    }
}

#[test]
fn nested_corpus_normalizes() {
    let nested: Vec<_> = fixture_files().into_iter().filter(|(r, _)| r.starts_with("nested/")).collect();
    assert!(nested.len() >= 10);
    for (rel, text) in nested {
        let n = normalize_choroi(&Diagram::from_json(&text).unwrap()).unwrap();
        assert!(census(&n).is_normal(), "{rel}: {}", census(&n));
    }
}
