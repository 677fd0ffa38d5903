//! Sweeps all four bounds and the time-sharing curves for the binary
//! example and prints the table.
//!
//! ```bash
//! cargo run --release --example binary_sweep -- 0.2 0.1
//! ```

use std::time::Instant;

use jidas::binary::{default_grid, sweep_curves, BinaryExampleParams};
use jidas::bounds::SolverConfig;

fn main() -> jidas::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (p_s, p_n) = (args.first().copied().unwrap_or(0.2), args.get(1).copied().unwrap_or(0.1));
    let params = BinaryExampleParams::new(p_s, p_n)?;
    let start = Instant::now();
    let sweep = sweep_curves(&params, &default_grid(), &SolverConfig::default())?;
    println!("p_S = {p_s}, p_N = {p_n}  ({:.2?})", start.elapsed());
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "D", "rif_lo", "rif_up", "dif_lo", "dif_up", "ts_lo", "ts_up");
    for r in sweep.rows.iter().filter(|r| r.feasible) {
        println!(
            "{:>6.3} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}{}",
            r.d,
            r.rif_lower,
            r.rif_upper,
            r.dif_lower,
            r.dif_upper,
            r.ts_lower,
            r.ts_upper,
            if r.possibly_suboptimal { "  *" } else { "" }
        );
    }
    Ok(())
}
