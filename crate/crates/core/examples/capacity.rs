//! Blahut-Arimoto capacity of a binary symmetric channel, with the
//! bracketing certificate and the iteration count.
//!
//! ```bash
//! cargo run --release --example capacity -- 0.11
//! ```

use jidas::info::{binary_entropy, blahut_arimoto_capacity};
use jidas::prob::{Alphabet, CondKernel};

fn main() -> jidas::Result<()> {
    let p: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.11);
    let k = CondKernel::new(vec![Alphabet::new("X", 2)?], Alphabet::new("Y", 2)?, vec![1.0 - p, p, p, 1.0 - p])?;
    let c = blahut_arimoto_capacity(&k, 1e-12, 100_000)?;
    println!("C = {:.12} bits in [{:.12}, {:.12}] after {} iterations", c.capacity, c.lower, c.upper, c.iterations);
    println!("1 - h(p) = {:.12}", 1.0 - binary_entropy(p));
    println!("argmax = {:?}", c.argmax.probs());
    Ok(())
}
