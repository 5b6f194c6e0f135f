use std::collections::HashSet;

use rand::Rng;

use crate::graph::{EntityId, Side, Triple};

/// Resampling attempts in filtered mode before a collision is accepted.
pub const MAX_RETRIES: usize = 32;

/// Corrupts head or tail (probability 1/2 each) with a uniformly drawn
/// entity. With `known`, draws that hit a known triple are redrawn up to
/// [`MAX_RETRIES`] times. The relation is never changed.
pub fn sample_negative<R: Rng>(
    triple: Triple,
    entity_count: usize,
    known: Option<&HashSet<Triple>>,
    rng: &mut R,
) -> Triple {
    debug_assert!(entity_count >= 2);
    let side = if rng.random_bool(0.5) { Side::Head } else { Side::Tail };
    let draw = |rng: &mut R| triple.with_side(side, EntityId(rng.random_range(0..entity_count as u32)));
    let mut candidate = draw(rng);
    if let Some(known) = known {
        for _ in 0..MAX_RETRIES {
            if !known.contains(&candidate) {
                break;
            }
            candidate = draw(rng);
        }
    }
    candidate
}
