//! Hashed tile coding in the style of the classic `tiles3` software.
//!
//! Each tiling quantises the (pre-scaled) coordinates on a grid displaced by
//! an asymmetric offset: dimension `d` of tiling `i` is shifted by
//! `i * (2d + 1) / num_tilings` of a tile width. The integer coordinate tuple
//! `(i, c_0, .., c_{n-1}, ints..)` is then mapped to a dense index by an
//! [`IndexHashTable`].

use std::collections::HashMap;

/// Assigns consecutive indices to coordinate tuples in order of first
/// appearance. When all `size` slots are taken, further unseen tuples fall
/// back to a fixed hash modulo `size` and are counted as overflows.
#[derive(Debug, Clone, Default)]
pub struct IndexHashTable {
    size: usize,
    slots: HashMap<Vec<i64>, usize>,
    overflow_count: u64,
}

impl IndexHashTable {
    pub fn new(size: usize) -> Self {
        assert!(size > 0, "index hash table needs at least one slot");
        Self {
            size,
            slots: HashMap::new(),
            overflow_count: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of distinct tuples holding a dedicated slot.
    pub fn count(&self) -> usize {
        self.slots.len()
    }

    pub fn overflow_count(&self) -> u64 {
        self.overflow_count
    }

    pub fn index(&mut self, coords: &[i64]) -> usize {
        if let Some(&i) = self.slots.get(coords) {
            return i;
        }
        let count = self.slots.len();
        if count >= self.size {
            self.overflow_count += 1;
            return (fnv1a(coords) % self.size as u64) as usize;
        }
        self.slots.insert(coords.to_vec(), count);
        count
    }
}

// FNV-1a over little-endian words: stable across platforms and runs.
fn fnv1a(coords: &[i64]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for c in coords {
        for byte in c.to_le_bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
    }
    hash
}

/// Quantises `floats` to `floor(x * num_tilings)`. Tile indices depend on the
/// floats only through these values.
pub(crate) fn quantize(floats: &[f64], num_tilings: usize) -> Vec<i64> {
    floats
        .iter()
        .map(|f| (f * num_tilings as f64).floor() as i64)
        .collect()
}

pub(crate) fn tiles_quantized(
    iht: &mut IndexHashTable,
    num_tilings: usize,
    quantized: &[i64],
    ints: &[i64],
) -> Vec<usize> {
    let n = num_tilings as i64;
    let mut coords = Vec::with_capacity(1 + quantized.len() + ints.len());
    (0..n)
        .map(|tiling| {
            coords.clear();
            coords.push(tiling);
            let mut offset = tiling;
            for q in quantized {
                coords.push((q + offset).div_euclid(n));
                offset += 2 * tiling;
            }
            coords.extend_from_slice(ints);
            iht.index(&coords)
        })
        .collect()
}

/// Active tile indices for `floats` (scaled so one unit is one tile width),
/// one per tiling. `ints` are appended to every coordinate tuple unchanged.
pub fn tiles(iht: &mut IndexHashTable, num_tilings: usize, floats: &[f64], ints: &[i64]) -> Vec<usize> {
    tiles_quantized(iht, num_tilings, &quantize(floats, num_tilings), ints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eight_tilings_give_eight_indices() {
        let mut iht = IndexHashTable::new(4096);
        let active = tiles(&mut iht, 8, &[3.3, 5.1], &[]);
        assert_eq!(active.len(), 8);
        // A fresh table hands out slots in order.
        assert_eq!(active, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn repeated_queries_are_stable() {
        let mut a = IndexHashTable::new(512);
        let mut b = IndexHashTable::new(512);
        let inputs = [[0.1, 0.2], [7.9, 3.3], [0.1, 0.2], [4.0, 4.0]];
        for x in inputs {
            assert_eq!(tiles(&mut a, 8, &x, &[1]), tiles(&mut b, 8, &x, &[1]));
        }
        assert_eq!(
            tiles(&mut a, 8, &[7.9, 3.3], &[1]),
            tiles(&mut b, 8, &[7.9, 3.3], &[1])
        );
    }

    #[test]
    fn overflow_is_counted_and_stays_in_range() {
        let mut iht = IndexHashTable::new(16);
        for i in 0..40 {
            for idx in tiles(&mut iht, 4, &[i as f64, 0.5], &[]) {
                assert!(idx < 16);
            }
        }
        assert_eq!(iht.count(), 16);
        assert!(iht.overflow_count() > 0);
    }

    #[test]
    fn ints_separate_tilings_per_action() {
        let mut iht = IndexHashTable::new(4096);
        let a0 = tiles(&mut iht, 8, &[2.5, 2.5], &[0]);
        let a1 = tiles(&mut iht, 8, &[2.5, 2.5], &[1]);
        assert!(a0.iter().all(|i| !a1.contains(i)));
    }

    proptest! {
        #[test]
        fn always_one_index_per_tiling(
            n in 1usize..16,
            x in proptest::collection::vec(-100.0f64..100.0, 0..4),
        ) {
            let mut iht = IndexHashTable::new(64);
            let active = tiles(&mut iht, n, &x, &[]);
            prop_assert_eq!(active.len(), n);
            prop_assert!(active.iter().all(|i| *i < 64));
        }
    }
}
