//! Seed derivation and per-stream random number generators.
//!
//! Every random stream is a ChaCha8 generator whose key depends only on the
//! master seed and the stream kind, and whose 64-bit stream id is the site or
//! edge coordinate. The block counter does the rest, so streams are
//! addressable independently and adding a stream never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream kinds. The discriminant is part of the derived key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamKind {
    Death = 1,
    Link = 2,
    WalkerClock = 3,
    Auxiliary = 4,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `(parent, tag, index)`; a pure function.
pub fn split_seed(parent: u64, tag: u64, index: u64) -> u64 {
    let a = mix64(parent.wrapping_add(GOLDEN));
    let b = mix64(a ^ tag.wrapping_mul(GOLDEN).wrapping_add(0x632b_e59b_d9b4_e019));
    mix64(b ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93).wrapping_add(GOLDEN))
}

/// Zig-zag map so negative coordinates get distinct stream ids.
#[inline]
pub fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

fn key(master: u64, kind: u64) -> [u8; 32] {
    let mut state = split_seed(master, kind, 0);
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    out
}

/// Generator for one stream of a Harris system.
pub fn stream_rng(master: u64, kind: StreamKind, coordinate: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(master, kind as u64));
    rng.set_stream(zigzag(coordinate));
    rng
}

/// General purpose generator for a derived seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, StreamKind::Auxiliary as u64));
    rng.set_stream(0);
    rng
}
