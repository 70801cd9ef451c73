//! Runs every CLI verb into a scratch directory, as `szilard <verb>` would.
//!
//! ```bash
//! cargo run --release --example figure_pipeline -- /tmp/szilard-out
//! ```

use std::path::PathBuf;

fn main() -> szilard_battery::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("szilard-figures"));
    let out_arg = out.display().to_string();

    for verb in ["simulate", "figure4", "calibrate", "jarzynski", "emit-plots"] {
        let files = szilard_battery::cli::run(["szilard", verb, "--out", &out_arg, "--shots", "4000"])?;
        println!("{verb}:");
        for f in files {
            println!("  {}", f.display());
        }
    }
    Ok(())
}
