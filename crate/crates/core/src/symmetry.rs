//! Symmetries of UPO-compliant polar codes: block profiles of the
//! stabilizer, brute-force stabilizer computation, sampling of
//! block-lower-triangular affine (BLTA) automorphisms, and their action
//! on indices and codewords.
//!
//! An affine permutation maps index `i` to `j` with `j_hat = A * i_hat +
//! b` over GF(2), on LSB-first expansions. The stabilizer of a
//! UPO-compliant information set is a block permutation group: bit
//! positions are only permuted within contiguous blocks, whose sizes
//! (from the least significant position upward) form the block profile.

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::code::InformationSet;
use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::transform;

/// An invertible affine index map `i -> A * i_hat + b` on `[0, 2^n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffinePermutation {
    n: u8,
    a: Gf2Matrix,
    b: u16,
}

impl AffinePermutation {
    pub fn new(n: usize, a: Gf2Matrix, b: u16) -> Result<Self> {
        if a.size != n {
            return Err(Error::InvalidArgument(format!(
                "matrix size {} does not match n = {n}",
                a.size
            )));
        }
        if !a.is_invertible() {
            return Err(Error::InvalidArgument("matrix is singular".into()));
        }
        if n < 16 && b >= 1 << n {
            return Err(Error::InvalidArgument("offset out of range".into()));
        }
        Ok(Self { n: n as u8, a, b })
    }

    pub fn identity(n: usize) -> Self {
        Self { n: n as u8, a: Gf2Matrix::identity(n), b: 0 }
    }

    pub fn is_identity(&self) -> bool {
        self.b == 0 && self.a == Gf2Matrix::identity(self.n())
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn matrix(&self) -> &Gf2Matrix {
        &self.a
    }

    pub fn offset(&self) -> u16 {
        self.b
    }

    /// Image of an index.
    pub fn apply(&self, i: u16) -> u16 {
        debug_assert!((i as usize) < (1 << self.n));
        self.a.apply(i) ^ self.b
    }

    /// Inverse map: `i = A^-1 * (j + b)`.
    pub fn inverse(&self) -> Self {
        let inv = self.a.inverse().expect("invertible by construction");
        let b = inv.apply(self.b);
        Self { n: self.n, a: inv, b }
    }
}

#[derive(Serialize, Deserialize)]
struct AffineRepr {
    n: u8,
    #[serde(rename = "A")]
    a: Vec<u16>,
    b: u16,
}

impl Serialize for AffinePermutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AffineRepr { n: self.n, a: self.a.rows.clone(), b: self.b }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffinePermutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = AffineRepr::deserialize(d)?;
        AffinePermutation::new(repr.n as usize, Gf2Matrix::from_rows(repr.a), repr.b)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Permute a vector of per-position values: `out[perm(i)] = v[i]`.
pub fn permute_vector<T: Copy + Default>(perm: &AffinePermutation, v: &[T]) -> Result<Vec<T>> {
    if v.len() != 1 << perm.n() {
        return Err(Error::InvalidArgument(format!(
            "vector length {} does not match N = {}",
            v.len(),
            1 << perm.n()
        )));
    }
    let mut out = vec![T::default(); v.len()];
    for (i, &x) in v.iter().enumerate() {
        out[perm.apply(i as u16) as usize] = x;
    }
    Ok(out)
}

/// A permutation of the n bit positions of an index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitPermutation {
    /// `sigma[l]` is the new position of bit `l`.
    pub sigma: Vec<u8>,
}

impl BitPermutation {
    pub fn identity(n: usize) -> Self {
        Self { sigma: (0..n as u8).collect() }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    /// Swap of two bit positions.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(n);
        p.sigma.swap(a, b);
        p
    }

    /// Apply to an index: bit `l` of `i` moves to position `sigma[l]`.
    pub fn apply(&self, i: u16) -> u16 {
        let mut out = 0;
        for (l, &t) in self.sigma.iter().enumerate() {
            out |= (i >> l & 1) << t;
        }
        out
    }

    /// Image of a whole index set.
    pub fn apply_set(&self, set: &InformationSet) -> InformationSet {
        let mut out = InformationSet::empty(set.n());
        for i in set.iter() {
            out.insert(self.apply(i));
        }
        out
    }

    /// `true` iff the permuted set stays inside the set (equality, since
    /// the map is a bijection on a finite set).
    pub fn stabilizes(&self, set: &InformationSet) -> bool {
        set.iter().all(|i| set.contains(self.apply(i)))
    }

    /// The same map as an affine permutation (permutation matrix, b = 0).
    pub fn to_affine(&self) -> AffinePermutation {
        let n = self.n();
        let mut rows = vec![0u16; n];
        for (l, &t) in self.sigma.iter().enumerate() {
            rows[t as usize] = 1 << l;
        }
        AffinePermutation::new(n, Gf2Matrix::from_rows(rows), 0).expect("permutation matrix")
    }
}

/// Sizes of the contiguous bit-position blocks stabilizing an
/// information set, least significant block first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockProfile(pub Vec<usize>);

impl BlockProfile {
    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }

    /// Internal block boundaries as prefix sums (excluding 0 and n).
    pub fn cuts(&self) -> Vec<usize> {
        let mut acc = 0;
        self.0[..self.0.len() - 1]
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect()
    }

    /// `true` iff this profile's permutation group contains the block
    /// group of `other`, i.e. every block of `other` lies inside one
    /// block of `self`.
    pub fn contains(&self, other: &BlockProfile) -> bool {
        debug_assert_eq!(self.n(), other.n());
        let coarse = self.cuts();
        let fine = other.cuts();
        coarse.iter().all(|c| fine.contains(c))
    }

    /// The profile guaranteed for both nested subcodes: the most
    /// significant block shrinks by one.
    pub fn subcode_bound(&self) -> BlockProfile {
        let mut s = self.0.clone();
        let last = s.last_mut().expect("nonempty profile");
        *last -= 1;
        if *last == 0 {
            s.pop();
        }
        BlockProfile(s)
    }

    /// The profile guaranteed for a `2^t`-times-longer code built from
    /// the same generators: the most significant block grows by `t`.
    pub fn supercode_bound(&self, t: usize) -> BlockProfile {
        let mut s = self.0.clone();
        *s.last_mut().expect("nonempty profile") += t;
        BlockProfile(s)
    }
}

/// Block profile of the stabilizer, by greedy merging: adjacent bit
/// positions share a block exactly when their transposition stabilizes
/// the set. Trivial codes (K = 0 or K = N) get the fully symmetric
/// profile `[n]`.
pub fn block_profile(info: &InformationSet) -> BlockProfile {
    let n = info.n();
    if info.is_empty() || info.len() == info.block_len() {
        return BlockProfile(vec![n]);
    }
    debug_assert!(info.is_upo_compliant());
    let mut sizes = vec![1usize];
    for l in 0..n - 1 {
        if BitPermutation::transposition(n, l, l + 1).stabilizes(info) {
            *sizes.last_mut().unwrap() += 1;
        } else {
            sizes.push(1);
        }
    }
    BlockProfile(sizes)
}

/// Maximum n for the exhaustive stabilizer search.
pub const STABILIZER_BRUTE_MAX_N: usize = 6;

/// All bit permutations stabilizing the set, by exhaustive search over
/// the symmetric group (oracle use; n <= 6 keeps it at 720 candidates).
pub fn stabilizer_brute(info: &InformationSet) -> Result<Vec<BitPermutation>> {
    let n = info.n();
    if n > STABILIZER_BRUTE_MAX_N {
        return Err(Error::Resource(format!(
            "exhaustive stabilizer search limited to n <= {STABILIZER_BRUTE_MAX_N}, got {n}"
        )));
    }
    Ok(all_permutations(n)
        .into_iter()
        .filter(|p| p.stabilizes(info))
        .collect())
}

fn all_permutations(n: usize) -> Vec<BitPermutation> {
    let mut out = Vec::new();
    let mut sigma: Vec<u8> = (0..n as u8).collect();
    permute_rec(&mut sigma, 0, &mut out);
    out
}

fn permute_rec(sigma: &mut Vec<u8>, k: usize, out: &mut Vec<BitPermutation>) {
    if k == sigma.len() {
        out.push(BitPermutation { sigma: sigma.clone() });
        return;
    }
    for i in k..sigma.len() {
        sigma.swap(k, i);
        permute_rec(sigma, k + 1, out);
        sigma.swap(k, i);
    }
}

/// All members of the block permutation group of a profile (products of
/// per-block permutations).
pub fn block_group(profile: &BlockProfile) -> Vec<BitPermutation> {
    let n = profile.n();
    let mut members = vec![BitPermutation::identity(n)];
    let mut offset = 0;
    for &s in &profile.0 {
        let block: Vec<u8> = (offset as u8..(offset + s) as u8).collect();
        let mut next = Vec::new();
        for base in &members {
            let mut arrangement = block.clone();
            heap_for_each(&mut arrangement, &mut |arr| {
                let mut sigma = base.sigma.clone();
                for (k, &target) in arr.iter().enumerate() {
                    sigma[offset + k] = target;
                }
                next.push(BitPermutation { sigma });
            });
        }
        members = next;
        offset += s;
    }
    members
}

fn heap_for_each(items: &mut Vec<u8>, f: &mut impl FnMut(&[u8])) {
    fn rec(items: &mut Vec<u8>, k: usize, f: &mut impl FnMut(&[u8])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            rec(items, k + 1, f);
            items.swap(k, i);
        }
    }
    rec(items, 0, f);
}

/// Number of elements of the BLTA group of a profile.
pub fn blta_group_order(profile: &BlockProfile) -> u128 {
    let n = profile.n();
    let mut order: u128 = 1 << n; // offsets
    let mut below = 0u32;
    let mut seen = 0;
    for &s in &profile.0 {
        // |GL(s, F2)| = prod_{i<s} (2^s - 2^i)
        for i in 0..s {
            order *= (1u128 << s) - (1u128 << i);
        }
        below += (seen * s) as u32;
        seen += s;
    }
    order << below
}

/// Draw a uniform member of the BLTA group of the profile: invertible
/// diagonal blocks by rejection, uniform entries below the block
/// diagonal, zero above, uniform offset.
pub fn sample_blta(profile: &BlockProfile, rng: &mut impl Rng) -> AffinePermutation {
    let n = profile.n();
    let mut rows = vec![0u16; n];
    let mut offset = 0;
    for &s in &profile.0 {
        let block = loop {
            let rows: Vec<u16> = (0..s).map(|_| rng.random_range(0..1u16 << s)).collect();
            let m = Gf2Matrix::from_rows(rows);
            if m.is_invertible() {
                break m;
            }
        };
        for r in 0..s {
            let sub_diagonal = if offset == 0 { 0 } else { rng.random_range(0..1u16 << offset) };
            rows[offset + r] = sub_diagonal | (block.rows[r] << offset);
        }
        offset += s;
    }
    let b = if n == 0 { 0 } else { rng.random_range(0..1u16 << n) };
    AffinePermutation::new(n, Gf2Matrix::from_rows(rows), b).expect("invertible by construction")
}

/// Automorphism test: every generator-matrix row must map back into the
/// code (membership checked through the inverse transform).
pub fn is_automorphism(perm: &AffinePermutation, info: &InformationSet) -> bool {
    if perm.n() != info.n() {
        return false;
    }
    let k = info.len();
    for pos in 0..k {
        let mut msg = vec![0u8; k];
        msg[pos] = 1;
        let row = transform::encode(info, &msg).expect("lengths match");
        let permuted = permute_vector(perm, &row).expect("lengths match");
        if !transform::is_codeword(info, &permuted) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::upo;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn affine_examples() {
        let id = AffinePermutation::identity(3);
        for i in 0..8 {
            assert_eq!(id.apply(i), i);
        }

        // offset on the LSB swaps even and odd positions
        let lsb = AffinePermutation::new(3, Gf2Matrix::identity(3), 1).unwrap();
        for i in 0..8 {
            assert_eq!(lsb.apply(i), i ^ 1);
        }

        // permutation matrix swapping bit positions 0 and 2
        let swap = BitPermutation::transposition(3, 0, 2).to_affine();
        assert_eq!(swap.apply(1), 4);
        assert_eq!(swap.apply(4), 1);
        assert_eq!(swap.apply(2), 2);
    }

    #[test]
    fn apply_is_a_bijection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let profile = BlockProfile(vec![2, 3]);
            let perm = sample_blta(&profile, &mut rng);
            let mut seen = [false; 32];
            for i in 0..32 {
                let j = perm.apply(i) as usize;
                assert!(!seen[j]);
                seen[j] = true;
            }
        }
    }

    #[test]
    fn permute_then_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let profile = BlockProfile(vec![1, 2, 2]);
        for _ in 0..20 {
            let perm = sample_blta(&profile, &mut rng);
            let inv = perm.inverse();
            let v: Vec<f64> = (0..32).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w = permute_vector(&perm, &v).unwrap();
            let back = permute_vector(&inv, &w).unwrap();
            assert_eq!(v, back);
            for i in 0..32 {
                assert_eq!(inv.apply(perm.apply(i)), i);
            }
        }
        let id = AffinePermutation::identity(5);
        let v: Vec<u8> = (0..32).map(|i| (i % 2) as u8).collect();
        assert_eq!(permute_vector(&id, &v).unwrap(), v);
        assert!(permute_vector(&id, &v[..8]).is_err());
    }

    #[test]
    fn block_profile_examples() {
        // Reed-Muller-type code: invariant under all bit permutations.
        let rm = upo::closure_of(3, &[3]);
        assert_eq!(block_profile(&rm).0, vec![3]);

        let c = upo::closure_of(3, &[2]);
        assert_eq!(c.indices(), vec![2, 3, 4, 5, 6, 7]);
        assert_eq!(block_profile(&c).0, vec![1, 2]);

        let rm25 = upo::closure_of(5, &[7]);
        assert_eq!(block_profile(&rm25).n(), 5);
        assert_eq!(block_profile(&rm25).0, vec![5]);

        // trivial codes by convention
        assert_eq!(block_profile(&InformationSet::empty(4)).0, vec![4]);
        assert_eq!(block_profile(&InformationSet::full(4)).0, vec![4]);
    }

    #[test]
    fn stabilizer_brute_examples() {
        let rm = upo::closure_of(3, &[3]);
        assert_eq!(stabilizer_brute(&rm).unwrap().len(), 6);

        let c = upo::closure_of(3, &[2]);
        let stab = stabilizer_brute(&c).unwrap();
        assert_eq!(stab.len(), 2);
        assert!(stab.iter().all(|p| p.sigma[0] == 0));

        assert!(stabilizer_brute(&InformationSet::empty(7)).is_err());
    }

    #[test]
    fn profile_group_matches_brute_stabilizer_n4() {
        for info in upo::enumerate_upo_codes(4, None).unwrap() {
            if info.is_empty() || info.len() == info.block_len() {
                continue;
            }
            let profile = block_profile(&info);
            let mut group: Vec<Vec<u8>> =
                block_group(&profile).into_iter().map(|p| p.sigma).collect();
            let mut brute: Vec<Vec<u8>> =
                stabilizer_brute(&info).unwrap().into_iter().map(|p| p.sigma).collect();
            group.sort();
            brute.sort();
            assert_eq!(group, brute, "info={:?}", info.indices());
        }
    }

    #[test]
    fn fully_asymmetric_code_has_identity_stabilizer() {
        // n=5 is the smallest length with all-singleton profiles; check
        // the stabilizer really is trivial there.
        let mut found = false;
        for info in upo::enumerate_upo_codes(5, None).unwrap() {
            if block_profile(&info).0 == vec![1, 1, 1, 1, 1] {
                found = true;
                let stab = stabilizer_brute(&info).unwrap();
                assert_eq!(stab.len(), 1);
                assert_eq!(stab[0], BitPermutation::identity(5));
            }
        }
        assert!(found, "no profile-[1,1,1,1,1] code among n=5 UPO codes");
    }

    #[test]
    fn blta_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // no entry above the block diagonal, ever
        let profile = BlockProfile(vec![2, 2]);
        for _ in 0..10_000 {
            let perm = sample_blta(&profile, &mut rng);
            let rows = &perm.matrix().rows;
            for r in 0..2 {
                assert_eq!(rows[r] >> 2, 0, "entry above the block diagonal");
            }
        }
        // profile [1,1,...,1] gives a unit lower-triangular matrix
        let lta = BlockProfile(vec![1; 5]);
        for _ in 0..1000 {
            let perm = sample_blta(&lta, &mut rng);
            let rows = &perm.matrix().rows;
            for r in 0..5 {
                assert_eq!(rows[r] >> (r + 1), 0, "upper entry set");
                assert_eq!(rows[r] >> r & 1, 1, "unit diagonal");
            }
        }
        // full profile: always invertible (checked in the constructor),
        // exercised many times
        let full = BlockProfile(vec![4]);
        for _ in 0..1000 {
            let perm = sample_blta(&full, &mut rng);
            assert!(perm.matrix().is_invertible());
        }
    }

    #[test]
    fn group_orders() {
        // |GL(2,F2)| = 6, so BLTA([2]) has 6 * 2^2 = 24 members.
        assert_eq!(blta_group_order(&BlockProfile(vec![2])), 24);
        // LTA on 2 bits: 1 free sub-diagonal entry and 4 offsets.
        assert_eq!(blta_group_order(&BlockProfile(vec![1, 1])), 8);
        assert_eq!(blta_group_order(&BlockProfile(vec![1, 2])), 6 * 4 * 8);
    }

    #[test]
    fn blta_samples_are_automorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for gens in [vec![3u16], vec![2], vec![5], vec![3, 4]] {
            let info = upo::closure_of(3, &gens);
            let profile = block_profile(&info);
            for _ in 0..25 {
                let perm = sample_blta(&profile, &mut rng);
                assert!(is_automorphism(&perm, &info), "gens {gens:?}");
            }
        }
    }

    #[test]
    fn cross_block_swap_is_not_an_automorphism() {
        // profile [1,2] code: swapping bit 0 with bit 1 crosses the block
        // boundary and must break the code.
        let info = upo::closure_of(3, &[2]);
        assert_eq!(block_profile(&info).0, vec![1, 2]);
        let swap = BitPermutation::transposition(3, 0, 1).to_affine();
        assert!(!is_automorphism(&swap, &info));
        assert!(is_automorphism(&AffinePermutation::identity(3), &info));
    }

    #[test]
    fn profile_cover_relation() {
        let coarse = BlockProfile(vec![3, 2]);
        let fine = BlockProfile(vec![1, 2, 2]);
        assert!(coarse.contains(&fine));
        assert!(!fine.contains(&coarse));
        assert!(coarse.contains(&coarse));
        assert_eq!(BlockProfile(vec![2, 1]).subcode_bound().0, vec![2]);
        assert_eq!(BlockProfile(vec![2, 2]).subcode_bound().0, vec![2, 1]);
        assert_eq!(BlockProfile(vec![2, 1]).supercode_bound(2).0, vec![2, 3]);
    }
}
