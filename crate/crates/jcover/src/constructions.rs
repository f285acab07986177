//! Deterministic block-family constructions over `[60]` and `[2m]`, plus the
//! constructive cover-finder used by the O(1)-per-subset verification path.
//!
//! The shipped families all arise from one recipe: partition the ground set
//! into parts, partition each part into disjoint pairs, and take every union
//! of three pairs inside one part. Which parts exist — two halves of 30, or
//! groups of 18/18/24 — is captured by [`PartitionScheme`].

use std::collections::HashSet;

use thiserror::Error;

use crate::core::{binomial, Block, CoreError, Family, Params};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("need at least 3 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("pair {0:#x} overlaps an earlier pair")]
    OverlappingPairs(u64),
    #[error("mask {0:#x} does not have exactly 2 elements")]
    InvalidPair(u64),
    #[error("m={0} must be even with m/2 >= 3")]
    InvalidM(u32),
    #[error("grouping does not fit the ground set: {0}")]
    InvalidGrouping(String),
    #[error("constructive lookup needs exactly two parts, each with at least 3 pairs")]
    SchemeNotBipartite,
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// One part of a scheme: its element mask and its pair partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    mask: u64,
    pairs: Vec<u64>,
}

impl Part {
    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn pairs(&self) -> &[u64] {
        &self.pairs
    }

    pub fn size(&self) -> u32 {
        self.mask.count_ones()
    }
}

/// The structural recipe behind every construction: disjoint base blocks
/// (when the ground set splits into 6-element blocks), the grouping of base
/// blocks into parts, and each part's pair partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionScheme {
    params: Params,
    base_blocks: Vec<Block>,
    group_sizes: Vec<usize>,
    parts: Vec<Part>,
    // element bit -> owning part / pair index inside that part
    part_of: [u8; 64],
    pair_of: [u8; 64],
}

const NO_PART: u8 = u8::MAX;

impl PartitionScheme {
    fn assemble(
        params: Params,
        base_blocks: Vec<Block>,
        group_sizes: Vec<usize>,
        parts: Vec<Part>,
    ) -> Self {
        let mut part_of = [NO_PART; 64];
        let mut pair_of = [NO_PART; 64];
        let mut seen = 0u64;
        for (pi, part) in parts.iter().enumerate() {
            let mut part_mask = 0u64;
            for (qi, &pair) in part.pairs.iter().enumerate() {
                assert_eq!(pair.count_ones(), 2, "pair must have two elements");
                assert_eq!(pair & seen, 0, "pairs must be disjoint");
                seen |= pair;
                part_mask |= pair;
                let mut m = pair;
                while m != 0 {
                    let bit = m.trailing_zeros() as usize;
                    part_of[bit] = pi as u8;
                    pair_of[bit] = qi as u8;
                    m &= m - 1;
                }
            }
            assert_eq!(part_mask, part.mask, "pairs must partition the part");
        }
        assert_eq!(seen, params.full_mask(), "parts must partition the ground set");
        Self { params, base_blocks, group_sizes, parts, part_of, pair_of }
    }

    /// Scheme over `[6 * Σ group_sizes]` whose base blocks are the consecutive
    /// 6-element blocks, grouped left to right into `group_sizes` parts.
    pub fn from_base_groups(
        params: Params,
        group_sizes: &[usize],
    ) -> Result<Self, ConstructionError> {
        if params.k() != 6 || !params.n().is_multiple_of(6) {
            return Err(ConstructionError::InvalidGrouping(format!(
                "need k=6 and 6 | n, got n={} k={}",
                params.n(),
                params.k()
            )));
        }
        let blocks_total = (params.n() / 6) as usize;
        if group_sizes.iter().sum::<usize>() != blocks_total || group_sizes.contains(&0) {
            return Err(ConstructionError::InvalidGrouping(format!(
                "group sizes {group_sizes:?} must be positive and sum to {blocks_total}"
            )));
        }
        let base_blocks: Vec<Block> = (0..blocks_total)
            .map(|i| Block::from_mask_unchecked(0b111111u64 << (6 * i)))
            .collect();
        let mut parts = Vec::with_capacity(group_sizes.len());
        let mut next = 0usize;
        for &g in group_sizes {
            let mut pairs = Vec::with_capacity(3 * g);
            for b in next..next + g {
                for q in 0..3 {
                    pairs.push(0b11u64 << (6 * b + 2 * q));
                }
            }
            let mask = pairs.iter().fold(0u64, |acc, p| acc | p);
            parts.push(Part { mask, pairs });
            next += g;
        }
        Ok(Self::assemble(params, base_blocks, group_sizes.to_vec(), parts))
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn base_blocks(&self) -> &[Block] {
        &self.base_blocks
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    /// 0-based part index owning the given 1-indexed element.
    pub fn part_of_element(&self, element: u32) -> Option<usize> {
        if element == 0 || element > self.params.n() {
            return None;
        }
        let p = self.part_of[(element - 1) as usize];
        (p != NO_PART).then_some(p as usize)
    }

    /// Composition profile of a subset across the parts: `|S ∩ U_t|` per part.
    pub fn profile(&self, subset: Block) -> Vec<u32> {
        self.parts.iter().map(|p| (p.mask & subset.mask()).count_ones()).collect()
    }

    /// Relabel the ground set; pair and part list order is preserved.
    pub fn permuted(&self, perm: &[u32]) -> Result<Self, ConstructionError> {
        crate::core::validate_permutation(perm, self.params.n())?;
        let map_mask = |mask: u64| -> u64 {
            let mut out = 0u64;
            let mut m = mask;
            while m != 0 {
                let pos = m.trailing_zeros() as usize;
                out |= 1u64 << (perm[pos] - 1);
                m &= m - 1;
            }
            out
        };
        let base_blocks =
            self.base_blocks.iter().map(|b| Block::from_mask_unchecked(map_mask(b.mask()))).collect();
        let parts = self
            .parts
            .iter()
            .map(|p| Part {
                mask: map_mask(p.mask),
                pairs: p.pairs.iter().map(|&q| map_mask(q)).collect(),
            })
            .collect();
        Ok(Self::assemble(self.params, base_blocks, self.group_sizes.clone(), parts))
    }

    /// True when the constructive cover-finder applies.
    pub fn supports_constructive(&self) -> bool {
        self.parts.len() == 2 && self.parts.iter().all(|p| p.pairs.len() >= 3)
    }
}

/// The paper-scale scheme: `[60]` split into halves `{1..30}` and `{31..60}`,
/// 15 pairs each (`P_i = {2i-1, 2i}`, `Q_i = {30+2i-1, 30+2i}`).
pub fn scheme_two_halves() -> PartitionScheme {
    PartitionScheme::from_base_groups(Params::standard(), &[5, 5])
        .expect("two-halves scheme is well formed")
}

/// `[60]` split into groups of 3, 3, and 4 base blocks: parts of sizes
/// 18, 18, 24 with 9, 9, 12 pairs.
pub fn scheme_grouped_334() -> PartitionScheme {
    PartitionScheme::from_base_groups(Params::standard(), &[3, 3, 4])
        .expect("3-3-4 scheme is well formed")
}

/// Halves-of-`[2m]` scheme with m/2 pairs per half; base blocks are present
/// exactly when they exist (6 | 2m).
pub fn scheme_generalized(m: u32) -> Result<PartitionScheme, ConstructionError> {
    if !m.is_multiple_of(2) || m / 2 < 3 {
        return Err(ConstructionError::InvalidM(m));
    }
    let params = Params::new(2 * m, 6, 3)?;
    if m.is_multiple_of(3) {
        return PartitionScheme::from_base_groups(params, &[(m / 6) as usize, (m / 6) as usize]);
    }
    let half = |offset: u32| -> Part {
        let pairs: Vec<u64> = (0..m / 2).map(|i| 0b11u64 << (offset + 2 * i)).collect();
        let mask = pairs.iter().fold(0u64, |acc, p| acc | p);
        Part { mask, pairs }
    };
    Ok(PartitionScheme::assemble(params, Vec::new(), Vec::new(), vec![half(0), half(m)]))
}

/// All unions of three distinct pairs, in ascending index order (i < j < k).
pub fn recombine_triples(pairs: &[u64], params: &Params) -> Result<Vec<Block>, ConstructionError> {
    if pairs.len() < 3 {
        return Err(ConstructionError::TooFewPairs(pairs.len()));
    }
    let mut seen = 0u64;
    for &p in pairs {
        if p.count_ones() != 2 || p & !params.full_mask() != 0 {
            return Err(ConstructionError::InvalidPair(p));
        }
        if p & seen != 0 {
            return Err(ConstructionError::OverlappingPairs(p));
        }
        seen |= p;
    }
    let count = binomial(pairs.len() as u32, 3) as usize;
    let mut out = Vec::with_capacity(count);
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let ij = pairs[i] | pairs[j];
            for &third in &pairs[j + 1..] {
                out.push(Block::from_mask_unchecked(ij | third));
            }
        }
    }
    Ok(out)
}

/// The 910-block family: all pair-triples of each half of `[60]`.
pub fn family_910() -> Family {
    let scheme = scheme_two_halves();
    let params = *scheme.params();
    let mut blocks = Vec::with_capacity(910);
    for part in scheme.parts() {
        blocks.extend(recombine_triples(part.pairs(), &params).expect("half has 15 pairs"));
    }
    Family::new(params, blocks, "two-halves-910").expect("construction yields distinct blocks")
}

/// Halved-ground-set generalization: `2 * C(m/2, 3)` blocks over `[2m]`.
pub fn family_generalized(m: u32) -> Result<Family, ConstructionError> {
    let scheme = scheme_generalized(m)?;
    let params = *scheme.params();
    let mut blocks = Vec::new();
    for part in scheme.parts() {
        blocks.extend(recombine_triples(part.pairs(), &params)?);
    }
    Ok(Family::new(params, blocks, format!("generalized-2m({m})"))?)
}

/// The grouped (3,3,4) family: 84 + 84 + 220 = 388 blocks, each inside one part.
pub fn family_388() -> Family {
    let scheme = scheme_grouped_334();
    let params = *scheme.params();
    let mut blocks = Vec::with_capacity(388);
    for part in scheme.parts() {
        blocks.extend(recombine_triples(part.pairs(), &params).expect("parts have >= 9 pairs"));
    }
    Family::new(params, blocks, "grouped-334-388").expect("construction yields distinct blocks")
}

/// Pair masks of the 1-indexed consecutive base block `G_g` of `[60]`.
fn base_block_pairs(g: usize) -> [u64; 3] {
    let off = 6 * (g - 1);
    [0b11u64 << off, 0b11u64 << (off + 2), 0b11u64 << (off + 4)]
}

/// The augmented grouped family: `family_388` plus two 12-pair recombination
/// pools, pool A over `G4 ∪ G7 ∪ G8 ∪ G9` and pool B over `G5 ∪ G7 ∪ G8 ∪ G10`.
///
/// The pools overlap the 388 base family (every pair-triple inside G7/G8/G9,
/// resp. G7/G8/G10, already appears in the third group, and the transferred
/// base block itself appears in the second group), so blocks are kept once:
/// each pool contributes 220 - 84 - 1 = 135 new blocks, 658 distinct total.
pub fn family_828() -> Family {
    let base = family_388();
    let params = *base.params();
    let mut blocks = base.blocks().to_vec();
    let mut seen: HashSet<u64> = blocks.iter().map(|b| b.mask()).collect();
    for (transfer, keep) in [(4usize, [7usize, 8, 9]), (5, [7, 8, 10])] {
        let mut pairs = Vec::with_capacity(12);
        pairs.extend(base_block_pairs(transfer));
        for g in keep {
            pairs.extend(base_block_pairs(g));
        }
        for b in recombine_triples(&pairs, &params).expect("pool has 12 pairs") {
            if seen.insert(b.mask()) {
                blocks.push(b);
            }
        }
    }
    Family::new(params, blocks, "grouped-334-828(aug=G4+G7G8G9,G5+G7G8G10)")
        .expect("deduplicated construction yields distinct blocks")
}

/// Find a family block meeting `s` in at least 3 elements, by the two-part
/// pigeonhole argument. Returns the block and the 0-based part it lives in.
///
/// Deterministic rule: pick the part holding more of `s` (ties go to part 0);
/// walk that part's elements of `s` in ascending order collecting the pairs
/// they fall in, stopping at three distinct pairs; if the elements occupy only
/// two pairs, pad with the lowest-index unused pair of the part.
pub fn find_covering_block(
    s: Block,
    scheme: &PartitionScheme,
) -> Result<(Block, usize), ConstructionError> {
    if !scheme.supports_constructive() {
        return Err(ConstructionError::SchemeNotBipartite);
    }
    let parts = scheme.parts();
    let in0 = (s.mask() & parts[0].mask).count_ones();
    let in1 = (s.mask() & parts[1].mask).count_ones();
    let t = usize::from(in1 > in0);
    let part = &parts[t];

    let mut chosen = [usize::MAX; 3];
    let mut found = 0usize;
    let mut m = s.mask() & part.mask;
    while m != 0 && found < 3 {
        let bit = m.trailing_zeros() as usize;
        let q = scheme.pair_of[bit] as usize;
        if !chosen[..found].contains(&q) {
            chosen[found] = q;
            found += 1;
        }
        m &= m - 1;
    }
    debug_assert!(found >= 2, "three elements occupy at least two pairs");
    if found == 2 {
        let pad = (0..part.pairs.len())
            .find(|q| !chosen[..2].contains(q))
            .expect("part has at least 3 pairs");
        chosen[2] = pad;
    }
    let mask = part.pairs[chosen[0]] | part.pairs[chosen[1]] | part.pairs[chosen[2]];
    Ok((Block::from_mask_unchecked(mask), t))
}

/// A way to distribute the k chosen elements across the scheme's parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionProfile {
    /// `x_t = |S ∩ U_t|` per part, summing to k.
    pub counts: Vec<u32>,
    /// Number of k-subsets realizing this profile: `Π C(|U_t|, x_t)`.
    pub subset_count: u64,
    /// True when some `x_t` reaches the covering threshold.
    pub guaranteed: bool,
}

/// All nonnegative integer tuples summing to `k`, ordered by increasing
/// `x_1`, then `x_2`, and so on.
pub fn enumerate_compositions(k: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for x in 0..=remaining {
            prefix.push(x);
            rec(remaining - x, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    assert!(parts >= 1);
    let mut out = Vec::new();
    rec(k, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Compositions of `k` over parts of the given sizes, with subset counts and
/// the guaranteed-coverage flag (`some x_t >= threshold`).
pub fn composition_profiles(
    k: u32,
    part_sizes: &[u32],
    threshold: u32,
) -> Vec<CompositionProfile> {
    enumerate_compositions(k, part_sizes.len())
        .into_iter()
        .map(|counts| {
            let subset_count = counts
                .iter()
                .zip(part_sizes)
                .map(|(&x, &size)| binomial(size, x))
                .product();
            let guaranteed = counts.iter().any(|&x| x >= threshold);
            CompositionProfile { counts, subset_count, guaranteed }
        })
        .collect()
}
