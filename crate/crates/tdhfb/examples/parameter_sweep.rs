//! Norms of the reference-style run for several N, through the sweep driver.

use std::path::Path;

use tdhfb::cli::sweep_cell;
use tdhfb::config::parse_config_str;

const CONFIG: &str = r#"
[grid]
half_length = 8.0
points = 64

[potential]
profile = "gaussian"
beta = 0.5
n = 16.0
discretization = "band_limited"

[stepper]
dt = 4e-3
t_final = 0.2
snapshot_stride = 2
"#;

fn main() -> tdhfb::Result<()> {
    let cfg = parse_config_str(CONFIG, Path::new("."))?;
    for n in [4.0, 16.0, 64.0] {
        let cell = sweep_cell(&cfg, n, 0.5)?;
        println!(
            "N = {n:>4}: n_total {:.5}, energy drift {:.2e}",
            cell["n_total"], cell["energy_drift"]
        );
    }
    Ok(())
}
