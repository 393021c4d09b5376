//! Packed bit vectors over F2, used for edge sets, vertex sets and binary
//! check/error vectors.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

const WORD: usize = 64;

/// A set of small indices (equivalently, a binary vector) packed into `u64`
/// words. Comparison order is lexicographic on the ascending index sequence,
/// which is the canonical tie-break key used throughout the crate.
#[derive(Clone, Default)]
pub struct Bits {
    words: Vec<u64>,
}

impl Bits {
    pub fn new() -> Self {
        Bits { words: Vec::new() }
    }

    pub fn with_capacity(nbits: usize) -> Self {
        Bits {
            words: alloc::vec![0; nbits.div_ceil(WORD)],
        }
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        let mut b = Bits::new();
        for &i in indices {
            b.insert(i);
        }
        b
    }

    pub fn get(&self, i: usize) -> bool {
        self.words
            .get(i / WORD)
            .is_some_and(|w| w >> (i % WORD) & 1 == 1)
    }

    pub fn insert(&mut self, i: usize) {
        let w = i / WORD;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        if let Some(w) = self.words.get_mut(i / WORD) {
            *w &= !(1 << (i % WORD));
        }
    }

    pub fn flip(&mut self, i: usize) {
        let w = i / WORD;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] ^= 1 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= b;
        }
    }

    pub fn or_assign(&mut self, other: &Bits) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of the AND with `other`, i.e. the F2 inner product.
    pub fn dot_parity(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    fn word(&self, i: usize) -> u64 {
        self.words.get(i).copied().unwrap_or(0)
    }
}

impl PartialEq for Bits {
    fn eq(&self, other: &Self) -> bool {
        let n = self.words.len().max(other.words.len());
        (0..n).all(|i| self.word(i) == other.word(i))
    }
}

impl Eq for Bits {}

impl Ord for Bits {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter_ones().cmp(other.iter_ones())
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl core::hash::Hash for Bits {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        let mut n = self.words.len();
        while n > 0 && self.words[n - 1] == 0 {
            n -= 1;
        }
        self.words[..n].hash(state);
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter_ones()).finish()
    }
}

impl FromIterator<usize> for Bits {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut b = Bits::new();
        for i in iter {
            b.insert(i);
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order_on_index_sequences() {
        let a = Bits::from_indices(&[0, 5]);
        let b = Bits::from_indices(&[1, 2]);
        assert!(a < b);
        let c = Bits::from_indices(&[1]);
        let d = Bits::from_indices(&[1, 2]);
        assert!(c < d);
        assert_eq!(
            Bits::from_indices(&[3, 7]).cmp(&Bits::from_indices(&[3, 7])),
            Ordering::Equal
        );
    }

    #[test]
    fn equality_ignores_capacity() {
        let mut a = Bits::with_capacity(200);
        a.insert(3);
        let b = Bits::from_indices(&[3]);
        assert_eq!(a, b);
        assert_eq!(a.cmp(&b), Ordering::Equal);
    }

    #[test]
    fn xor_and_parity() {
        let mut a = Bits::from_indices(&[1, 2, 70]);
        a.xor_assign(&Bits::from_indices(&[2, 3]));
        assert_eq!(a.to_indices(), std::vec![1, 3, 70]);
        assert!(a.dot_parity(&Bits::from_indices(&[3])));
        assert!(!a.dot_parity(&Bits::from_indices(&[1, 3])));
        assert_eq!(a.count(), 3);
    }
}
