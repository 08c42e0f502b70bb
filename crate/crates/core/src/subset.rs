use std::fmt;

/// A subset of terminal indices `1..=K+1`, stored as a bitmask (bit `l-1` ↔ index `l`).
///
/// Index `K+1` is the relay.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(pub u32);

/// Largest number of terminals a [`Subset`] can address.
pub const MAX_TERMINALS: usize = 31;

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut mask = 0u32;
        for l in indices {
            assert!((1..=MAX_TERMINALS).contains(&l), "terminal index {l} out of range");
            mask |= 1 << (l - 1);
        }
        Subset(mask)
    }

    /// `{1, ..., count}`.
    pub fn full(count: usize) -> Self {
        assert!(count <= MAX_TERMINALS);
        if count == 0 {
            Subset(0)
        } else {
            Subset(u32::MAX >> (32 - count))
        }
    }

    pub fn singleton(l: usize) -> Self {
        Self::from_indices([l])
    }

    pub fn contains(self, l: usize) -> bool {
        (1..=MAX_TERMINALS).contains(&l) && self.0 & (1 << (l - 1)) != 0
    }

    pub fn insert(self, l: usize) -> Self {
        Subset(self.0 | Self::singleton(l).0)
    }

    pub fn remove(self, l: usize) -> Self {
        Subset(self.0 & !Self::singleton(l).0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: Subset) -> Self {
        Subset(self.0 | other.0)
    }

    pub fn intersect(self, other: Subset) -> Self {
        Subset(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Complement within `{1, ..., count}`.
    pub fn complement(self, count: usize) -> Self {
        Subset(Self::full(count).0 & !self.0)
    }

    /// Ascending member indices.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (1..=MAX_TERMINALS).filter(move |&l| mask & (1 << (l - 1)) != 0)
    }

    /// Every subset of `{1, ..., count}` in increasing mask order, including the empty set.
    pub fn all(count: usize) -> impl Iterator<Item = Subset> {
        assert!(count < 32);
        (0u32..(1u32 << count)).map(Subset)
    }

    /// Subsets of `{1, ..., K+1}` that contain the relay index `K+1`.
    pub fn with_relay(k: usize) -> impl Iterator<Item = Subset> {
        Self::all(k).map(move |s| s.insert(k + 1))
    }

    /// Nonempty subsets of the source encoders `{1, ..., K}`.
    pub fn nonempty_encoders(k: usize) -> impl Iterator<Item = Subset> {
        Self::all(k).filter(|s| !s.is_empty())
    }

    /// Binary rendering with the highest index first, padded to `width` digits.
    pub fn to_bitstring(self, width: usize) -> String {
        format!("0b{:0width$b}", self.0, width = width)
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.indices().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relay_subsets_count() {
        let subsets: Vec<_> = Subset::with_relay(2).collect();
        assert_eq!(subsets.len(), 4);
        assert!(subsets.iter().all(|s| s.contains(3)));
        assert_eq!(subsets[0], Subset::singleton(3));
        assert_eq!(subsets[3], Subset::full(3));
    }

    #[test]
    fn complement_and_display() {
        let s = Subset::from_indices([1, 3]);
        assert_eq!(s.complement(3), Subset::singleton(2));
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(s.to_bitstring(3), "0b101");
        assert_eq!(Subset::EMPTY.to_string(), "{}");
    }
}
