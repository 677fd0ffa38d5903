//! Pairwise collision rate of the keyed hash family over a domain of keys,
//! with identical maps as a negative control.
//!
//! ```bash
//! cargo run --release --example hash_collisions -- 16
//! ```

use jidas::sim::{hash_collision_check, HashFamily};

fn main() -> jidas::Result<()> {
    let range: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(16);
    let domain: Vec<u64> = (0..200).collect();
    for (label, family) in [
        ("independent", HashFamily::new(1000, range, 3)?),
        ("identical", HashFamily::new(1000, range, 3)?.with_identical_maps()),
    ] {
        let r = hash_collision_check(&family, &domain, 5000, 0.5, 3)?;
        println!(
            "{label:>11}: mean {:.5} (ideal {:.5}), tail {:.4}, passed {}",
            r.mean,
            r.expected,
            r.tail_fraction,
            r.passed()
        );
    }
    Ok(())
}
