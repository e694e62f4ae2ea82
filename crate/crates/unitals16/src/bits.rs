//! Fixed-width bitset rows.
//!
//! Every block of an incidence structure keeps a dense bit-row over the point
//! set, sized to `ceil(v/64)` machine words. Intersection cardinalities —
//! the inner loop of unital checking and of the orbit-union search — reduce
//! to word-wise AND plus popcount.

/// A bitset over a fixed universe `0..len`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    /// Empty set over a universe of `len` points.
    pub fn zero(len: usize) -> Self {
        BitRow {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Build from a slice of member indices.
    pub fn from_indices(len: usize, indices: &[u32]) -> Self {
        let mut row = BitRow::zero(len);
        for &i in indices {
            row.set(i as usize);
        }
        row
    }

    /// Universe size (number of addressable bits).
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when no bit is set.
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn clear(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn test(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Number of set bits.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// |self ∩ other| without materializing the intersection.
    pub fn intersection_count(&self, other: &BitRow) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// True when the two sets share no element.
    pub fn is_disjoint(&self, other: &BitRow) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// True when `self` is a subset of `other`.
    pub fn is_subset(&self, other: &BitRow) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    /// Ascending iterator over member indices.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Members collected as ascending `u32` indices.
    pub fn to_indices(&self) -> Vec<u32> {
        self.iter().map(|i| i as u32).collect()
    }
}

impl std::fmt::Debug for BitRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitRow{:?}", self.to_indices())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_test_count_roundtrip() {
        let mut row = BitRow::zero(130);
        for i in [0, 63, 64, 65, 127, 128, 129] {
            row.set(i);
            assert!(row.test(i));
        }
        assert_eq!(row.count(), 7);
        assert_eq!(row.to_indices(), vec![0, 63, 64, 65, 127, 128, 129]);
        row.clear(64);
        assert!(!row.test(64));
        assert_eq!(row.count(), 6);
    }

    #[test]
    fn intersection_and_subset() {
        let a = BitRow::from_indices(273, &[1, 5, 100, 200, 272]);
        let b = BitRow::from_indices(273, &[5, 100, 201]);
        assert_eq!(a.intersection_count(&b), 2);
        assert!(!b.is_subset(&a));
        let c = BitRow::from_indices(273, &[5, 100]);
        assert!(c.is_subset(&a));
        assert!(c.is_subset(&b));
        assert!(!a.is_disjoint(&b));
        assert!(BitRow::from_indices(273, &[7]).is_disjoint(&b));
    }
}
