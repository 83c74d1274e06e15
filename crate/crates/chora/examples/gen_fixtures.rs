//! Writes the catalog to `fixtures/` at the workspace root, or to the
//! directory given as the first argument.

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    for (rel, text) in chora::catalog::fixture_files() {
        let path = root.join(rel);
        std::fs::create_dir_all(path.parent().unwrap())?;
        std::fs::write(&path, text)?;
        println!("{}", path.display());
    }
    Ok(())
}
