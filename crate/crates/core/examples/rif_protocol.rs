//! Runs the randomized scheme on the binary example and prints the error
//! rates together with the resynchronization profile.
//!
//! ```bash
//! cargo run --release --example rif_protocol
//! ```

use jidas::binary::{build_binary_channel, example_context, BinaryExampleParams};
use jidas::bounds::SolverConfig;
use jidas::sim::{ProtocolConfig, RifAux, RifPlan};

fn main() -> jidas::Result<()> {
    let params = BinaryExampleParams::new(0.2, 0.1)?;
    let (ctx, est) = example_context(&params)?;
    let (ch, d) = build_binary_channel(&params)?;
    let cfg = ProtocolConfig { trials: 2000, ..ProtocolConfig::default() };
    let aux = RifAux::from_bounds(&ctx, &cfg, &SolverConfig::default())?;
    let plan = RifPlan::new(&ch, &d, &est, aux, &cfg)?;
    let r = plan.run()?;
    println!("blocklength {}, base code {}, {} bins", plan.blocklength(), r.base_size, r.bins);
    println!("lambda1 = {:.4} +- {:.4}", r.stats.lambda1.mean, r.stats.lambda1.half_width);
    println!("lambda2 = {:.4} +- {:.4}", r.stats.lambda2.mean, r.stats.lambda2.half_width);
    println!("first desynchronized block: {:?}", r.desync);
    let u = &r.uniformity;
    println!(
        "uniformity: chi-square {:.2} vs {:.2}, KS {:.4} vs DKW band {:.4}, passed {}",
        u.chi_square,
        u.chi_square_critical,
        u.ks_statistic,
        u.dkw_band,
        u.passed()
    );
    Ok(())
}
