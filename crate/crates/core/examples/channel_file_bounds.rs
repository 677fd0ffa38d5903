//! Loads a channel from the text format and evaluates the four bounds at a
//! few budgets. Without an argument a ternary-output channel is built inline.
//!
//! ```bash
//! cargo run --release --example channel_file_bounds -- my_channel.txt
//! ```

use jidas::bounds::{BoundContext, SolverConfig};
use jidas::io::{load_channel, parse_channel};
use jidas::sensing::optimal_estimator;

const INLINE: &str = "\
x = 2
s = 2
y = 3
z = 2
prior = 0.7 0.3
forward 0 0 = 0.8 0.1 0.1
forward 0 1 = 0.1 0.1 0.8
forward 1 0 = 0.2 0.6 0.2
forward 1 1 = 0.2 0.2 0.6
feedback 0 = 0.9 0.1
feedback 1 = 0.5 0.5
feedback 2 = 0.1 0.9
";

fn main() -> jidas::Result<()> {
    let spec = match std::env::args().nth(1) {
        Some(path) => load_channel(path.as_ref())?,
        None => parse_channel(INLINE)?,
    };
    let est = optimal_estimator(&spec.channel, &spec.distortion)?;
    let ctx = BoundContext::new(&spec.channel, &est)?;
    let dstars: Vec<f64> = (0..spec.channel.x().size()).map(|x| est.dstar(x)).collect();
    println!("d*(x) = {dstars:?}");
    let cfg = SolverConfig::default();
    let lo = dstars.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = dstars.iter().copied().fold(0.0, f64::max);
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "D", "dif_lo", "dif_up", "rif_lo", "rif_up");
    for k in 0..=4 {
        let d = lo + (hi - lo) * k as f64 / 4.0;
        println!(
            "{d:>8.4} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            ctx.dif_lower(d, &cfg)?.value,
            ctx.dif_upper(d, &cfg)?.value,
            ctx.rif_lower(d, &cfg)?.value,
            ctx.rif_upper(d, &cfg)?.value
        );
    }
    Ok(())
}
