//! Capacity-distortion bounds and protocol simulation for identification
//! over state-dependent channels with noisy feedback, where the sender also
//! estimates the channel state from that feedback.
//!
//! The pipeline runs from a channel law ([`channel`]) through the Bayes state
//! estimator ([`sensing`]) and information measures ([`info`]) to the four
//! rate bounds and the time-sharing baseline ([`bounds`]). [`sim`] builds and
//! runs the deterministic and randomized schemes, and [`binary`] holds the
//! binary example. [`cli`] backs the `jidas` binary.
//!
//! Runnable examples live in `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `binary_sweep` | all curves of the binary example over the budget grid |
//! | `channel_file_bounds` | bounds for a channel given in the text format |
//! | `capacity` | Blahut-Arimoto with its certificate |
//! | `dif_protocol` | deterministic scheme, Monte Carlo against exact errors |
//! | `rif_protocol` | randomized scheme and its uniformity checks |
//! | `typicality` | typical-set growth and coverage |
//! | `hash_collisions` | collision rate of the keyed hash family |

pub mod binary;
pub mod bounds;
pub mod channel;
pub mod cli;
pub mod error;
pub mod info;
pub mod io;
pub mod output;
pub mod prob;
pub mod rng;
pub mod sensing;
pub mod sim;
pub mod simplex;

pub use error::{Error, Result};
