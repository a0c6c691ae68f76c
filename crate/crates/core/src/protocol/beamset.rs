use crate::geometry::BeamIndex;

/// Fixed-size set of beam indices backed by a bitmap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BeamSet {
    words: Vec<u64>,
    len: usize,
}

impl BeamSet {
    pub fn new(total_beams: usize) -> Self {
        Self {
            words: vec![0; total_beams.div_ceil(64)],
            len: total_beams,
        }
    }

    pub fn from_beams(total_beams: usize, beams: impl IntoIterator<Item = BeamIndex>) -> Self {
        let mut s = Self::new(total_beams);
        for b in beams {
            s.insert(b);
        }
        s
    }

    /// Number of beams the set ranges over.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, beam: BeamIndex) -> bool {
        assert!(beam < self.len, "beam {beam} out of range {}", self.len);
        let (w, bit) = (beam / 64, 1u64 << (beam % 64));
        let fresh = self.words[w] & bit == 0;
        self.words[w] |= bit;
        fresh
    }

    pub fn contains(&self, beam: BeamIndex) -> bool {
        beam < self.len && self.words[beam / 64] & (1 << (beam % 64)) != 0
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &BeamSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = BeamIndex> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + tz)
            })
        })
    }

    /// `B`-bit bitmap, beam 0 in the most significant bit of the first byte.
    pub fn to_bitmap(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for b in self.iter() {
            out[b / 8] |= 0x80 >> (b % 8);
        }
        out
    }
}
