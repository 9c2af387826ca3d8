//! Regenerates the bundled fixture: `cargo run -p textcurate-core --example make_fixture -- <dir>`.

use std::path::PathBuf;

use textcurate_core::fixture::Fixture;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| "crates/cli/tests/fixtures".into());
    std::fs::create_dir_all(&dir)?;
    let f = Fixture::bundled()?;
    for p in f.write(&dir)? {
        println!("{}", p.display());
    }
    Ok(())
}
