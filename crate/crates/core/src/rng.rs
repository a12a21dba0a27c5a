//! Seeded randomness. Every sampler takes an explicit seed; independent
//! purposes draw from independent streams derived from `(seed, tag)`.

use dashu_int::{IBig, UBig};
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Rational;

pub type Rng = ChaCha8Rng;

/// Deterministic stream for `(seed, tag)`, stable across platforms.
pub fn stream(seed: u64, tag: &str) -> Rng {
    // FNV-1a over the tag, mixed with the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&h.to_le_bytes());
    key[16..24].copy_from_slice(&(seed ^ h.rotate_left(17)).to_le_bytes());
    Rng::from_seed(key)
}

/// Child stream for the `index`-th item drawn from a parent stream.
pub fn child(rng: &mut Rng) -> Rng {
    let mut key = [0u8; 32];
    rng.fill(&mut key);
    Rng::from_seed(key)
}

/// Rational `p/q` with `|p| <= height`, `1 <= q <= height`.
pub fn rational(rng: &mut Rng, height: u64) -> Rational {
    let h = height.max(1) as i64;
    let p = rng.gen_range(-h..=h);
    let q = rng.gen_range(1..=h) as u64;
    Rational::from_parts(IBig::from(p), UBig::from(q))
}

/// Nonzero rational with the same height bound.
pub fn nonzero_rational(rng: &mut Rng, height: u64) -> Rational {
    loop {
        let r = rational(rng, height);
        if r != Rational::ZERO {
            return r;
        }
    }
}

pub fn integer(rng: &mut Rng, bound: i64) -> Rational {
    Rational::from(rng.gen_range(-bound..=bound))
}

/// Random integer vector with entries in `[-bound, bound]`, not identically zero.
pub fn integer_vector(rng: &mut Rng, len: usize, bound: i64) -> Vec<Rational> {
    loop {
        let v: Vec<Rational> = (0..len).map(|_| integer(rng, bound)).collect();
        if v.iter().any(|x| *x != Rational::ZERO) {
            return v;
        }
    }
}
