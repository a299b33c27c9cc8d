use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// Entity-level split: returns `(train, test)`, each sorted by id.
///
/// The test side gets `round(n * test_fraction)` entities, kept in `1..n`.
pub fn split_by_entity(
    entities: &[String],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<String>, Vec<String>)> {
    if entities.len() < 2 {
        return Err(invalid("need at least two entities to split"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(invalid("test_fraction must lie in (0, 1)"));
    }
    let mut ids = entities.to_vec();
    ids.sort();
    ids.dedup();
    let n = ids.len();
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let mut test = ids.split_off(n - n_test);
    ids.sort();
    test.sort();
    Ok((ids, test))
}
