//! The universal partial order (UPO) on synthetic channel indices and the
//! enumeration of all information sets that respect it.
//!
//! The order is generated by two rules on the LSB-first binary expansions:
//! moving a single `1` bit to a more significant position never decreases
//! reliability, and adding `1` bits never decreases reliability. Their
//! transitive closure admits a direct test: `i <= j` iff `weight(i) <=
//! weight(j)` and, pairing the set bits of both indices from most
//! significant downward, every bit of `i` sits at a position no higher
//! than its partner in `j`.

use crate::code::{InformationSet, MinInfoSet, MAX_N};
use crate::error::{Error, Result};

/// Guard for unrestricted enumeration.
pub const ENUMERATION_CEILING: usize = 5_000_000;

/// `true` iff `i` precedes-or-equals `j` in the universal partial order
/// (channel `j` is always at least as reliable as channel `i`).
pub fn upo_leq(i: u16, j: u16, n: usize) -> bool {
    debug_assert!((i as usize) < (1 << n) && (j as usize) < (1 << n));
    if i.count_ones() > j.count_ones() {
        return false;
    }
    // Pair set bits from the most significant end; each bit of i must not
    // outrank its partner in j.
    let mut bi = i;
    let mut bj = j;
    while bi != 0 {
        let pi = 15 - bi.leading_zeros();
        let pj = 15 - bj.leading_zeros();
        if pi > pj {
            return false;
        }
        bi &= !(1 << pi);
        bj &= !(1 << pj);
    }
    true
}

/// The up-closure `{j : exists g in gens with g <= j}` inside `[0, 2^n)`.
pub fn closure_of(n: usize, gens: &[u16]) -> InformationSet {
    let mut out = InformationSet::empty(n);
    for j in 0..(1u16 << n) {
        if gens.iter().any(|&g| upo_leq(g, j, n)) {
            out.insert(j);
        }
    }
    out
}

/// The up-closure of a minimum information set.
pub fn upo_closure(gens: &MinInfoSet) -> InformationSet {
    closure_of(gens.n(), &gens.generators)
}

/// `true` iff every index of `info` carries all more reliable indices
/// with it.
pub fn is_upo_compliant(info: &InformationSet) -> bool {
    let n = info.n();
    info.iter().all(|i| {
        (0..(1u16 << n)).all(|j| !upo_leq(i, j, n) || info.contains(j))
    })
}

/// The UPO-minimal elements of a UPO-compliant information set.
pub fn min_info_set(info: &InformationSet) -> Result<MinInfoSet> {
    if !is_upo_compliant(info) {
        return Err(Error::Contract(
            "min_info_set requires a UPO-compliant information set".into(),
        ));
    }
    let n = info.n();
    let gens: Vec<u16> = info
        .iter()
        .filter(|&i| !info.iter().any(|j| j != i && upo_leq(j, i, n)))
        .collect();
    MinInfoSet::new(n, gens)
}

/// Strict-upper-set masks: `up[i]` has bit `j` set iff `i < j` strictly.
fn strict_up_masks(n: usize) -> Vec<[u64; 4]> {
    let len = 1usize << n;
    let mut up = vec![[0u64; 4]; len];
    for i in 0..len as u16 {
        for j in 0..len as u16 {
            if i != j && upo_leq(i, j, n) {
                up[i as usize][(j / 64) as usize] |= 1 << (j % 64);
            }
        }
    }
    up
}

/// Every UPO-compliant information set of length `2^n`, i.e. every
/// up-closed subset of the order, in canonical order (by dimension, then
/// lexicographically on the index list). `max_generators` restricts to
/// sets whose minimum information set has at most that many elements.
///
/// The trivial K = 0 and K = N codes are always included.
pub fn enumerate_upo_codes(n: usize, max_generators: Option<usize>) -> Result<Vec<InformationSet>> {
    if n > MAX_N {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds {MAX_N}")));
    }
    if max_generators.is_none() && n > 7 {
        return Err(Error::Resource(format!(
            "unrestricted enumeration is limited to n <= 7 (got n = {n})"
        )));
    }
    let mut out = match max_generators {
        Some(g) => enumerate_antichains(n, g)?,
        None => enumerate_upsets(n)?,
    };
    out.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Depth-first enumeration over elements in reverse topological order
/// (most reliable first): an element may be included only when everything
/// strictly above it already is.
fn enumerate_upsets(n: usize) -> Result<Vec<InformationSet>> {
    let len = 1usize << n;
    let up = strict_up_masks(n);
    let mut order: Vec<u16> = (0..len as u16).collect();
    order.sort_unstable_by(|&a, &b| {
        b.count_ones().cmp(&a.count_ones()).then_with(|| b.cmp(&a))
    });

    let mut out = Vec::new();
    let mut current = [0u64; 4];
    dfs_upsets(n, &order, &up, 0, &mut current, &mut out)?;
    Ok(out)
}

fn dfs_upsets(
    n: usize,
    order: &[u16],
    up: &[[u64; 4]],
    depth: usize,
    current: &mut [u64; 4],
    out: &mut Vec<InformationSet>,
) -> Result<()> {
    if depth == order.len() {
        if out.len() >= ENUMERATION_CEILING {
            return Err(Error::Resource(format!(
                "enumeration exceeds ceiling of {ENUMERATION_CEILING} sets"
            )));
        }
        out.push(InformationSet::from_mask(n, *current));
        return Ok(());
    }
    let e = order[depth];
    // Exclude e.
    dfs_upsets(n, order, up, depth + 1, current, out)?;
    // Include e only when its strict upper set is already present.
    let above = &up[e as usize];
    let allowed = (0..4).all(|w| above[w] & !current[w] == 0);
    if allowed {
        current[(e / 64) as usize] |= 1 << (e % 64);
        dfs_upsets(n, order, up, depth + 1, current, out)?;
        current[(e / 64) as usize] &= !(1 << (e % 64));
    }
    Ok(())
}

/// Enumerate antichains of size at most `max_gen` and close each one.
fn enumerate_antichains(n: usize, max_gen: usize) -> Result<Vec<InformationSet>> {
    let len = 1usize << n;
    let mut out = vec![InformationSet::empty(n)];
    let mut chain: Vec<u16> = Vec::new();
    fn extend(
        n: usize,
        len: usize,
        start: u16,
        max_gen: usize,
        chain: &mut Vec<u16>,
        out: &mut Vec<InformationSet>,
    ) -> Result<()> {
        if chain.len() == max_gen {
            return Ok(());
        }
        for e in start..len as u16 {
            if chain
                .iter()
                .any(|&g| upo_leq(g, e, n) || upo_leq(e, g, n))
            {
                continue;
            }
            chain.push(e);
            if out.len() >= ENUMERATION_CEILING {
                return Err(Error::Resource(format!(
                    "enumeration exceeds ceiling of {ENUMERATION_CEILING} sets"
                )));
            }
            out.push(closure_of(n, chain));
            extend(n, len, e + 1, max_gen, chain, out)?;
            chain.pop();
        }
        Ok(())
    }
    extend(n, len, 0, max_gen, &mut chain, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Brute-force oracle: transitive closure of the two generating rules.
    fn brute_leq_table(n: usize) -> Vec<Vec<bool>> {
        let len = 1usize << n;
        let mut leq = vec![vec![false; len]; len];
        for i in 0..len {
            leq[i][i] = true;
            for j in 0..len {
                // Binary domination: j has all of i's bits.
                if i & !j == 0 {
                    leq[i][j] = true;
                }
                // Left swap of one bit into the next position.
                for l in 0..n - 1 {
                    let pat = 0b01 << l;
                    if i >> l & 0b11 == 0b01 && (i ^ pat ^ (pat << 1)) == j {
                        leq[i][j] = true;
                    }
                }
            }
        }
        // Warshall closure.
        for k in 0..len {
            for i in 0..len {
                if leq[i][k] {
                    for j in 0..len {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        leq
    }

    #[test]
    fn matches_brute_force_closure_up_to_n4() {
        for n in 1..=4 {
            let oracle = brute_leq_table(n);
            for i in 0..(1u16 << n) {
                for j in 0..(1u16 << n) {
                    assert_eq!(
                        upo_leq(i, j, n),
                        oracle[i as usize][j as usize],
                        "n={n} i={i} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn single_rule_examples() {
        assert!(upo_leq(2, 4, 3)); // left swap of the lone 1 bit
        assert!(upo_leq(1, 3, 3)); // binary domination
        assert!(!upo_leq(3, 4, 3)); // 011 and 100 are incomparable
        assert!(!upo_leq(4, 3, 3));
    }

    #[test]
    fn is_a_partial_order_exhaustively() {
        for n in 1..=4 {
            let len = 1u16 << n;
            for i in 0..len {
                assert!(upo_leq(i, i, n));
                for j in 0..len {
                    if i != j && upo_leq(i, j, n) {
                        assert!(!upo_leq(j, i, n), "antisymmetry n={n} {i} {j}");
                    }
                    for k in 0..len {
                        if upo_leq(i, j, n) && upo_leq(j, k, n) {
                            assert!(upo_leq(i, k, n), "transitivity n={n} {i} {j} {k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn closure_examples() {
        let gens = MinInfoSet::new(3, vec![3]).unwrap();
        assert_eq!(upo_closure(&gens).indices(), vec![3, 5, 6, 7]);

        let top = MinInfoSet::new(4, vec![15]).unwrap();
        assert_eq!(upo_closure(&top).indices(), vec![15]);

        let bottom = MinInfoSet::new(3, vec![0]).unwrap();
        assert_eq!(upo_closure(&bottom).len(), 8);
    }

    #[test]
    fn min_set_inverts_closure() {
        let set = InformationSet::from_indices(3, &[3, 5, 6, 7]).unwrap();
        let gens = min_info_set(&set).unwrap();
        assert_eq!(gens.generators, vec![3]);
        assert_eq!(upo_closure(&gens), set);

        assert_eq!(min_info_set(&InformationSet::full(4)).unwrap().generators, vec![0]);
        assert!(min_info_set(&InformationSet::empty(3)).unwrap().generators.is_empty());

        let bad = InformationSet::from_indices(3, &[3, 5]).unwrap();
        assert!(min_info_set(&bad).is_err());
    }

    /// Brute-force up-set oracle for small n: filter all subsets.
    fn brute_upsets(n: usize) -> HashSet<Vec<u16>> {
        let len = 1usize << n;
        let mut out = HashSet::new();
        for bits in 0u32..(1 << len) {
            let idx: Vec<u16> = (0..len as u16).filter(|&i| bits >> i & 1 == 1).collect();
            let set = InformationSet::from_indices(n, &idx).unwrap();
            if is_upo_compliant(&set) {
                out.insert(idx);
            }
        }
        out
    }

    #[test]
    fn enumeration_matches_subset_brute_force() {
        for n in 1..=4 {
            let fast: HashSet<Vec<u16>> = enumerate_upo_codes(n, None)
                .unwrap()
                .iter()
                .map(|s| s.indices())
                .collect();
            assert_eq!(fast, brute_upsets(n), "n={n}");
        }
    }

    #[test]
    fn enumeration_counts_and_canonical_order() {
        let codes = enumerate_upo_codes(2, None).unwrap();
        assert_eq!(codes.len(), 5); // the chain 0<1<2<3 has 5 up-sets
        assert_eq!(codes.first().unwrap().len(), 0);
        assert_eq!(codes.last().unwrap().len(), 4);
        for w in codes.windows(2) {
            assert!(
                (w[0].len(), w[0].indices()) < (w[1].len(), w[1].indices()),
                "canonical order violated"
            );
        }
        assert_eq!(enumerate_upo_codes(3, None).unwrap().len(), 10);
    }

    #[test]
    fn generator_restriction_filters_enumeration() {
        for n in 2..=5 {
            let all = enumerate_upo_codes(n, None).unwrap();
            for g in 0..=2usize {
                let restricted = enumerate_upo_codes(n, Some(g)).unwrap();
                let expected: Vec<_> = all
                    .iter()
                    .copied()
                    .filter(|s| min_info_set(s).unwrap().generators.len() <= g)
                    .collect();
                assert_eq!(restricted, expected, "n={n} g={g}");
            }
        }
    }

    #[test]
    fn unrestricted_enumeration_guarded() {
        assert!(enumerate_upo_codes(8, None).is_err());
        assert!(enumerate_upo_codes(8, Some(1)).is_ok());
    }
}
