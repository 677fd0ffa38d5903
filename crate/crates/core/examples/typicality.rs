//! Growth of the conditional typical set with the blocklength and the
//! probability that the auxiliary sequence lands in it.
//!
//! ```bash
//! cargo run --release --example typicality
//! ```

use jidas::binary::{example_context, BinaryExampleParams};
use jidas::bounds::SolverConfig;
use jidas::sim::{choose_dif_aux, lemma_checks, Convention, LemmaTarget, ProtocolConfig};

fn main() -> jidas::Result<()> {
    let params = BinaryExampleParams::new(0.2, 0.1)?;
    let (ctx, _) = example_context(&params)?;
    let cfg = ProtocolConfig::default();
    let aux = choose_dif_aux(&ctx, &cfg, &SolverConfig::default())?;
    let target = LemmaTarget::dif(ctx.averaged(), &aux);
    let report = lemma_checks(&target, &[6, 8, 10, 12, 14, 16], 0.05, Convention::Conditional, 2000, 1)?;
    println!("target rate {:.4} bits", report.target);
    for row in &report.rows {
        println!("n = {:>2}: exact rate {:.4}, sampled {:.4}, coverage {:.4}", row.n, row.exact_rate, row.rate.mean, row.coverage);
    }
    Ok(())
}
