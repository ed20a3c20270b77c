//! Counter-based random streams.
//!
//! Every draw is addressed by `(seed, stream, index)`, so any subset of grid
//! points can be generated in any order and still reproduce the same values.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 32-bit words reserved per index: eight `u64` draws.
const WORDS_PER_INDEX: u128 = 16;

/// Eight uniform `u64` values for one grid index.
fn block(seed: u64, stream: u64, index: usize) -> [u64; 8] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(index as u128 * WORDS_PER_INDEX);
    let mut out = [0u64; 8];
    for v in &mut out {
        *v = rng.next_u64();
    }
    out
}

/// Uniform in (0, 1].
fn unit_open_closed(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in [0, 1).
pub fn unit_uniform(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Box-Muller on two words: one standard complex normal sample scaled to
/// independent N(0, 1) real and imaginary parts.
fn normal_pair(u: u64, v: u64) -> Complex64 {
    let radius = (-2.0 * unit_open_closed(u).ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * unit_uniform(v);
    Complex64::new(radius * angle.cos(), radius * angle.sin())
}

/// Four complex samples with N(0, sigma^2) real and imaginary parts.
pub fn complex_normals(seed: u64, stream: u64, index: usize, sigma: f64) -> [Complex64; 4] {
    let b = block(seed, stream, index);
    [
        normal_pair(b[0], b[1]) * sigma,
        normal_pair(b[2], b[3]) * sigma,
        normal_pair(b[4], b[5]) * sigma,
        normal_pair(b[6], b[7]) * sigma,
    ]
}

/// Eight uniforms in [0, 1).
pub fn uniforms(seed: u64, stream: u64, index: usize) -> [f64; 8] {
    block(seed, stream, index).map(unit_uniform)
}
