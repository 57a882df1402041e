use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Counter-keyed generator: stream `case` of the ChaCha key derived from `seed`.
/// Distinct cases never share a keystream, so trials can run in any order.
pub fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case);
    rng
}
