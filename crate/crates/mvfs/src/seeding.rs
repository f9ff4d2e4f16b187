//! Derivation of per-component RNG seeds from a single master seed.
//!
//! Every random choice in the crate (masking, k-means restarts, synthetic
//! data) draws from its own named stream so components can be re-seeded
//! independently without perturbing each other.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic seed for the sub-stream `label` of `master`.
pub fn stream_seed(master: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with the master seed.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    splitmix64(master ^ h)
}
