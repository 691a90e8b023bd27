//! Code descriptions: information sets, minimum information sets, and
//! reliability total orders.
//!
//! Indices of synthetic channels use the LSB-first binary expansion
//! throughout: bit `l` of index `i` is `(i >> l) & 1`. All block lengths
//! are powers of two with `N = 2^n` and `n <= 8`.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::upo;

/// Largest supported `n` (so index sets fit in a 256-bit mask).
pub const MAX_N: usize = 8;

/// A polar code design: block length `N = 2^n` and the set of channel
/// indices that carry information bits.
///
/// Stored as a 256-bit mask; serialized as `{"n": int, "info": [ints]}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct InformationSet {
    n: u8,
    mask: [u64; 4],
}

impl InformationSet {
    /// The empty (K = 0) code of length `2^n`.
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_N, "n = {n} exceeds MAX_N");
        Self { n: n as u8, mask: [0; 4] }
    }

    /// The full-rate (K = N) code of length `2^n`.
    pub fn full(n: usize) -> Self {
        let mut set = Self::empty(n);
        for i in 0..set.block_len() as u16 {
            set.insert(i);
        }
        set
    }

    pub(crate) fn from_mask(n: usize, mask: [u64; 4]) -> Self {
        debug_assert!(n <= MAX_N);
        Self { n: n as u8, mask }
    }

    pub(crate) fn words(&self) -> &[u64; 4] {
        &self.mask
    }

    pub fn from_indices(n: usize, indices: &[u16]) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::InvalidArgument(format!("n = {n} exceeds {MAX_N}")));
        }
        let mut set = Self::empty(n);
        for &i in indices {
            if (i as usize) >= set.block_len() {
                return Err(Error::InvalidArgument(format!(
                    "index {i} out of range for N = {}",
                    set.block_len()
                )));
            }
            set.insert(i);
        }
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Block length `N = 2^n`.
    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    /// Code dimension `K` (before any zero-padding).
    pub fn len(&self) -> usize {
        self.mask.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.mask == [0; 4]
    }

    pub fn contains(&self, i: u16) -> bool {
        debug_assert!((i as usize) < self.block_len());
        self.mask[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: u16) {
        debug_assert!((i as usize) < self.block_len());
        self.mask[(i / 64) as usize] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: u16) {
        self.mask[(i / 64) as usize] &= !(1 << (i % 64));
    }

    /// Indices in ascending order.
    pub fn indices(&self) -> Vec<u16> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = u16> + '_ {
        let n = self.block_len() as u16;
        (0..n).filter(move |&i| self.contains(i))
    }

    /// The frozen set (complement within `[0, N)`).
    pub fn complement(&self) -> Self {
        let mut out = Self::empty(self.n());
        for i in 0..self.block_len() as u16 {
            if !self.contains(i) {
                out.insert(i);
            }
        }
        out
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.n == other.n
            && self
                .mask
                .iter()
                .zip(other.mask.iter())
                .all(|(a, b)| a & !b == 0)
    }

    /// Indices in `self` but not in `other`.
    pub fn difference(&self, other: &Self) -> Vec<u16> {
        self.iter().filter(|&i| !other.contains(i)).collect()
    }

    pub fn is_upo_compliant(&self) -> bool {
        upo::is_upo_compliant(self)
    }

    /// Restriction `I ∩ [0, limit)` kept at the same `n`.
    pub fn restrict_below(&self, limit: u16) -> Self {
        let mut out = Self::empty(self.n());
        for i in self.iter().take_while(|&i| i < limit) {
            out.insert(i);
        }
        out
    }
}

/// Lexicographic order on the ascending index list (shorter prefix first),
/// the tie-break order used by the design search.
impl Ord for InformationSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for InformationSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for InformationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InformationSet(n={}, {:?})", self.n, self.indices())
    }
}

#[derive(Serialize, Deserialize)]
struct InfoSetRepr {
    n: u8,
    info: Vec<u16>,
}

impl Serialize for InformationSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InfoSetRepr { n: self.n, info: self.indices() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for InformationSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = InfoSetRepr::deserialize(d)?;
        InformationSet::from_indices(repr.n as usize, &repr.info)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// The unique antichain of UPO-minimal generators of a UPO-compliant
/// information set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinInfoSet {
    pub n: u8,
    /// Sorted, pairwise UPO-incomparable indices.
    pub generators: Vec<u16>,
}

impl MinInfoSet {
    pub fn new(n: usize, mut generators: Vec<u16>) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::InvalidArgument(format!("n = {n} exceeds {MAX_N}")));
        }
        generators.sort_unstable();
        generators.dedup();
        for &g in &generators {
            if (g as usize) >= (1 << n) {
                return Err(Error::InvalidArgument(format!("generator {g} out of range")));
            }
        }
        for (a, &i) in generators.iter().enumerate() {
            for &j in &generators[a + 1..] {
                if upo::upo_leq(i, j, n) || upo::upo_leq(j, i, n) {
                    return Err(Error::InvalidArgument(format!(
                        "generators {i} and {j} are comparable"
                    )));
                }
            }
        }
        Ok(Self { n: n as u8, generators })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }
}

/// A permutation of `[0, 2^n)` listing channel indices in ascending
/// reliability (least reliable first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalOrder {
    pub n: u8,
    pub q: Vec<u16>,
}

impl TotalOrder {
    pub fn new(n: usize, q: Vec<u16>) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::InvalidArgument(format!("n = {n} exceeds {MAX_N}")));
        }
        let len = 1usize << n;
        if q.len() != len {
            return Err(Error::InvalidArgument(format!(
                "order has {} entries, expected {len}",
                q.len()
            )));
        }
        let mut seen = vec![false; len];
        for &x in &q {
            if (x as usize) >= len || seen[x as usize] {
                return Err(Error::InvalidArgument(format!(
                    "order is not a permutation of [0, {len}): bad entry {x}"
                )));
            }
            seen[x as usize] = true;
        }
        Ok(Self { n: n as u8, q })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    /// The subsequence of entries below `limit`, order preserved.
    pub fn restrict_below(&self, limit: u16) -> Vec<u16> {
        self.q.iter().copied().filter(|&x| x < limit).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct TotalOrderRepr {
    n: u8,
    q: Vec<u16>,
}

impl Serialize for TotalOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TotalOrderRepr { n: self.n, q: self.q.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TotalOrder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = TotalOrderRepr::deserialize(d)?;
        TotalOrder::new(repr.n as usize, repr.q).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Low and high nested subcodes of half the block length:
/// `I_low = {i in I : i < N/2}` and `I_high = {i - N/2 : i in I, i >= N/2}`.
pub fn nested_subcodes(info: &InformationSet) -> Result<(InformationSet, InformationSet)> {
    if info.n() == 0 {
        return Err(Error::InvalidArgument("cannot split a length-1 code".into()));
    }
    let half = (info.block_len() / 2) as u16;
    let mut low = InformationSet::empty(info.n() - 1);
    let mut high = InformationSet::empty(info.n() - 1);
    for i in info.iter() {
        if i < half {
            low.insert(i);
        } else {
            high.insert(i - half);
        }
    }
    Ok((low, high))
}

/// The length-`2^t * N` code generated by the same minimum information
/// set: the UPO closure of the generators in the larger index range.
pub fn supercode(gens: &MinInfoSet, t: usize) -> Result<InformationSet> {
    let n = gens.n() + t;
    if n > MAX_N {
        return Err(Error::InvalidArgument(format!(
            "supercode length 2^{n} exceeds 2^{MAX_N}"
        )));
    }
    Ok(upo::closure_of(n, &gens.generators))
}

/// Select a code from a reliability order: keep entries below `N`, then
/// take the last `K` (most reliable) as the information set.
pub fn code_from_order(order: &TotalOrder, block_len: usize, k: usize) -> Result<InformationSet> {
    if !block_len.is_power_of_two() || block_len > order.block_len() {
        return Err(Error::InvalidArgument(format!(
            "block length {block_len} must be a power of two <= {}",
            order.block_len()
        )));
    }
    if k > block_len {
        return Err(Error::InvalidArgument(format!("K = {k} exceeds N = {block_len}")));
    }
    let sub = order.restrict_below(block_len as u16);
    let n = block_len.trailing_zeros() as usize;
    InformationSet::from_indices(n, &sub[block_len - k..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_round_trip() {
        let set = InformationSet::from_indices(3, &[3, 5, 6, 7]).unwrap();
        assert_eq!(set.indices(), vec![3, 5, 6, 7]);
        assert_eq!(set.len(), 4);
        assert_eq!(set.block_len(), 8);
        assert!(set.contains(5));
        assert!(!set.contains(4));
        assert_eq!(set.complement().indices(), vec![0, 1, 2, 4]);
    }

    #[test]
    fn out_of_range_index_rejected() {
        assert!(InformationSet::from_indices(2, &[4]).is_err());
        assert!(InformationSet::from_indices(9, &[0]).is_err());
    }

    #[test]
    fn lex_order_on_index_lists() {
        let a = InformationSet::from_indices(3, &[0, 1]).unwrap();
        let b = InformationSet::from_indices(3, &[0, 5]).unwrap();
        let c = InformationSet::from_indices(3, &[1]).unwrap();
        assert!(a < b);
        assert!(b < c); // [0,5] < [1] lexicographically
        let prefix = InformationSet::from_indices(3, &[0, 1]).unwrap();
        let longer = InformationSet::from_indices(3, &[0, 1, 2]).unwrap();
        assert!(prefix < longer);
    }

    #[test]
    fn json_shape() {
        let set = InformationSet::from_indices(3, &[3, 5, 6, 7]).unwrap();
        let s = serde_json::to_string(&set).unwrap();
        assert_eq!(s, r#"{"n":3,"info":[3,5,6,7]}"#);
        let back: InformationSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn nested_split_shifts_high_half() {
        // direct set split and shift
        let set = InformationSet::from_indices(3, &[3, 5, 6, 7]).unwrap();
        let (low, high) = nested_subcodes(&set).unwrap();
        assert_eq!(low.indices(), vec![3]);
        assert_eq!(high.indices(), vec![1, 2, 3]);

        let full = InformationSet::full(3);
        let (low, high) = nested_subcodes(&full).unwrap();
        assert_eq!(low, InformationSet::full(2));
        assert_eq!(high, InformationSet::full(2));

        assert!(nested_subcodes(&InformationSet::empty(0)).is_err());
    }

    #[test]
    fn min_info_set_rejects_comparable_generators() {
        assert!(MinInfoSet::new(3, vec![3, 4]).is_ok());
        assert!(MinInfoSet::new(3, vec![1, 3]).is_err()); // 1 precedes 3
    }

    #[test]
    fn total_order_validation() {
        assert!(TotalOrder::new(2, vec![0, 1, 2, 3]).is_ok());
        assert!(TotalOrder::new(2, vec![0, 1, 2]).is_err());
        assert!(TotalOrder::new(2, vec![0, 1, 2, 2]).is_err());
    }

    #[test]
    fn code_from_order_takes_most_reliable_suffix() {
        let q = TotalOrder::new(2, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(code_from_order(&q, 4, 0).unwrap(), InformationSet::empty(2));
        assert_eq!(code_from_order(&q, 4, 4).unwrap(), InformationSet::full(2));
        assert_eq!(code_from_order(&q, 4, 1).unwrap().indices(), vec![3]);
        // restriction drops entries >= N before selecting
        let q = TotalOrder::new(2, vec![0, 2, 1, 3]).unwrap();
        assert_eq!(code_from_order(&q, 2, 1).unwrap().indices(), vec![1]);
        assert!(code_from_order(&q, 4, 5).is_err());
        assert!(code_from_order(&q, 8, 1).is_err());
    }
}
