//! Stable seed derivation for independent RNG streams.

/// Derives a child seed from a master seed and a list of stream tags.
///
/// Uses splitmix64 mixing so that nearby tags produce unrelated streams.
/// The result is a pure function of its inputs on every platform, which is
/// what keeps multi-stream runs (strategy × replicate fan-out) reproducible.
pub fn mix_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master ^ 0x9e37_79b9_7f4a_7c15;
    for &t in tags {
        state = splitmix64(state.wrapping_add(t).wrapping_mul(0xbf58_476d_1ce4_e5b9));
    }
    splitmix64(state)
}

/// Tag helper: hashes a string label into a stream tag.
pub fn tag(label: &str) -> u64 {
    // FNV-1a, 64-bit.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
