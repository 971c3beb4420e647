//! Regenerates the shipped synthetic weather and grid fixtures.
//!
//! Usage: `cargo run -p stockgrid-core --example gen_fixtures -- <data-dir>`

use std::path::PathBuf;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"));
    if let Err(e) = stockgrid::synthetic::write_fixture_set(&dir) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
