use alloc::vec;
use alloc::vec::Vec;

const WORD: usize = 64;

/// Fixed-length bit vector over machine words.
///
/// Bits past `len` in the last word are always zero; the counting kernels
/// rely on that.
#[derive(Clone, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl core::fmt::Debug for BitSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BitSet")
            .field("len", &self.len)
            .field("ones", &self.count_ones())
            .finish()
    }
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < self.len, "bit {index} outside length {}", self.len);
        self.words[index / WORD] |= 1 << (index % WORD);
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.len && self.words[index / WORD] >> (index % WORD) & 1 == 1
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + bit)
            })
        })
    }

    /// ORs `src` into `self` with bit `i` of `src` landing on bit `offset + i`.
    pub fn or_shifted(&mut self, src: &BitSet, offset: usize) {
        assert!(
            offset + src.len <= self.len,
            "shifted copy of {} bits at {offset} overruns {}",
            src.len,
            self.len
        );
        let wo = offset / WORD;
        let bo = offset % WORD;
        if bo == 0 {
            for (dst, &s) in self.words[wo..].iter_mut().zip(&src.words) {
                *dst |= s;
            }
        } else {
            for (i, &s) in src.words.iter().enumerate() {
                if s == 0 {
                    continue;
                }
                self.words[wo + i] |= s << bo;
                let hi = s >> (WORD - bo);
                if hi != 0 {
                    self.words[wo + i + 1] |= hi;
                }
            }
        }
    }

    /// Counts `p` with `self[p]` and `other[p + shift]` both set.
    ///
    /// Both sets index the same universe; positions shifted outside `other`
    /// simply do not count.
    pub fn overlap_shifted(&self, other: &BitSet, shift: i64) -> u64 {
        if shift < 0 {
            return other.overlap_shifted(self, -shift);
        }
        let shift = shift as usize;
        if shift >= other.len {
            return 0;
        }
        let wo = shift / WORD;
        let bo = shift % WORD;
        let ow = &other.words;
        let n = self.words.len().min(ow.len() - wo);
        let mut total = 0u64;
        if bo == 0 {
            for (a, b) in self.words[..n].iter().zip(&ow[wo..wo + n]) {
                total += u64::from((a & b).count_ones());
            }
        } else {
            let inv = WORD - bo;
            for i in 0..n {
                let lo = ow[wo + i] >> bo;
                let hi = ow.get(wo + i + 1).map_or(0, |w| w << inv);
                total += u64::from((self.words[i] & (lo | hi)).count_ones());
            }
        }
        total
    }
}
