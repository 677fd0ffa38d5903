//! Runs the deterministic scheme on the binary example and compares the
//! Monte Carlo error rates with exact enumeration.
//!
//! ```bash
//! cargo run --release --example dif_protocol -- 8
//! ```

use jidas::binary::{build_binary_channel, example_context, BinaryExampleParams};
use jidas::bounds::SolverConfig;
use jidas::sim::exact::EXACT_N_MAX;
use jidas::sim::{choose_dif_aux, exact_dif_errors, DifPlan, ProtocolConfig};

fn main() -> jidas::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    let params = BinaryExampleParams::new(0.2, 0.1)?;
    let (ctx, est) = example_context(&params)?;
    let (ch, d) = build_binary_channel(&params)?;
    let cfg = ProtocolConfig { n, trials: 5000, ..ProtocolConfig::default() };
    let aux = choose_dif_aux(&ctx, &cfg, &SolverConfig::default())?;
    println!("x* = {}, |U| = {}", aux.x_star, aux.nu);
    let plan = DifPlan::new(&ch, &d, &est, aux, &cfg)?;
    let stats = plan.run()?;
    println!("blocklength {}", plan.blocklength());
    println!("lambda1 = {:.4} +- {:.4}", stats.lambda1.mean, stats.lambda1.half_width);
    println!("lambda2 = {:.4} +- {:.4}", stats.lambda2.mean, stats.lambda2.half_width);
    if n <= EXACT_N_MAX {
        let exact = exact_dif_errors(&plan)?;
        println!("exact lambda1 = {:.4}, lambda2 = {:.4}", exact.lambda1, exact.lambda2);
    }
    for (t, e) in stats.distortion.iter().enumerate() {
        println!("t = {t:>3}: distortion {:.4} +- {:.4}", e.mean, e.half_width);
    }
    Ok(())
}
