//! Drives a subcommand from a TOML file, as the binary does.
//!
//! `cargo run --example config_run -- examples/configs/small.toml`

use std::path::PathBuf;

use tdhfb::cli::{run, Command, Overrides};
use tdhfb::config::parse_config;

fn main() -> tdhfb::Result<()> {
    let path: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/small.toml").into())
        .into();
    let cfg = parse_config(&path)?;
    let out = std::env::temp_dir().join("tdhfb-config-run");
    let ov = Overrides {
        out: Some(out),
        ..Default::default()
    };
    let report = run(Command::Simulate, &cfg, &ov)?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    for (k, v) in &report.summary {
        println!("{k} = {v:e}");
    }
    Ok(())
}
