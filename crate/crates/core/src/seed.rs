/// SplitMix64 step for deriving independent substream seeds from a base
/// seed. Deterministic and scheduling-independent.
pub(crate) fn derive(base: u64, stream: u64) -> u64 {
    let mut z = base.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
