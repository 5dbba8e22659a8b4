//! Multi-population bounded-confidence opinion dynamics on `[-1, 1]`.
//!
//! The crate covers agent-level simulation ([`micro`]), the mean-field
//! continuity equation ([`meanfield`]), the 1-Wasserstein distances coupling
//! sub-populations ([`distributions`]) and declarative scenarios
//! ([`scenarios`]).

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod kernels;
pub mod meanfield;
pub mod micro;
pub mod scenarios;

#[cfg(any(test, feature = "oracles"))]
pub mod oracles;

/// Stream-splitting for per-population seeds: `derive_seed(base, k)` gives
/// independent, reproducible seeds for each stream `k`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
