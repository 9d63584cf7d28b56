//! Construction, transformation and statistics of s-adic digit expansions.
//!
//! A number `x ∈ [0, 1)` is handled through its digit sequence
//! `x = Σ α_k s^{-k}`, represented lazily as a [`DigitStream`]. Sources in
//! [`generators`] produce streams, [`transforms`] maps streams to streams,
//! and [`stats`] measures relative digit frequencies `N_i(x, n)/n` and the
//! running digit mean `r_n = (1/n) Σ α_k` along checkpoints.
//!
//! ```
//! use sadic::dsl;
//! use sadic::stats::run_stats;
//!
//! let stream = dsl::build("uniform(3, 42) | seven").unwrap();
//! let trace = run_stats(&stream, &[100_000]).unwrap();
//! assert!((trace.last().mean() - 1.0).abs() < 0.02);
//! ```

pub mod digits;
pub mod dsl;
pub mod error;
pub mod experiment;
pub mod freq;
pub mod generators;
pub mod stats;
pub mod stream;
pub mod transforms;
pub mod verify;

pub use digits::{Alphabet, Digit, DigitWord, PeriodicWord, Rational};
pub use error::{Error, Result};
pub use freq::FrequencyVector;
pub use stream::{expand_rational, prefix, Cursor, DigitStream, Frequencies, StreamMeta};
pub use transforms::Transform;
