//! Ground-set parameters, bitmask blocks, families, and k-subset enumeration.
//!
//! Elements are 1-indexed on every public surface (element `e` lives in bit
//! `e - 1`); masks are plain `u64`, which caps the ground set at 64 elements.
//! Enumeration yields masks in strictly increasing numeric order, which is
//! colexicographic order on the element sets; ranks come from the
//! combinatorial number system so that enumeration ranges can be split into
//! disjoint chunks and reassembled deterministically.

use std::fmt;

use thiserror::Error;

/// Largest supported ground set. Anything bigger is rejected outright.
pub const MAX_GROUND_SET: u32 = 64;

/// Errors from parameter validation, block construction, and enumeration.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("invalid parameters n={n} k={k} radius={radius}: need 1 <= k <= n and radius <= k")]
    InvalidParams { n: u32, k: u32, radius: u32 },
    #[error("ground set size {0} exceeds the supported maximum of 64")]
    GroundSetTooLarge(u32),
    #[error("duplicate element {0}")]
    DuplicateElement(u32),
    #[error("element {element} out of range 1..={n}")]
    OutOfRange { element: u32, n: u32 },
    #[error("expected {expected} elements, got {got}")]
    WrongCardinality { expected: u32, got: usize },
    #[error("mask {mask:#x} is not a {k}-subset of [{n}]")]
    InvalidMask { mask: u64, n: u32, k: u32 },
    #[error("rank range {start}..{end} not contained in 0..{total}")]
    RangeOutOfBounds { start: u64, end: u64, total: u64 },
    #[error("duplicate block {0} in family")]
    DuplicateBlock(String),
    #[error("permutation is not a bijection on 1..={0}")]
    InvalidPermutation(u32),
}

/// Problem parameters: ground set `[n]`, subset size `k`, covering radius.
///
/// A block `B` covers a subset `S` when `|S ∩ B| >= threshold` where
/// `threshold = k - radius`; equivalently the Johnson distance
/// `k - |S ∩ B|` is at most `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Params {
    n: u32,
    k: u32,
    radius: u32,
}

impl Params {
    pub fn new(n: u32, k: u32, radius: u32) -> Result<Self, CoreError> {
        if n > MAX_GROUND_SET {
            return Err(CoreError::GroundSetTooLarge(n));
        }
        if k == 0 || k > n || radius > k {
            return Err(CoreError::InvalidParams { n, k, radius });
        }
        Ok(Self { n, k, radius })
    }

    /// The (60, 6, 3) instance that every shipped construction targets.
    pub fn standard() -> Self {
        Self { n: 60, k: 6, radius: 3 }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Required intersection size `k - radius`.
    pub fn threshold(&self) -> u32 {
        self.k - self.radius
    }

    /// C(n, k), the number of k-subsets of the ground set.
    pub fn total_subsets(&self) -> u64 {
        binomial(self.n, self.k)
    }

    /// Mask with the low n bits set.
    pub fn full_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// Johnson distance `k - |a ∩ b|` between two k-subsets.
    pub fn johnson_distance(&self, a: Block, b: Block) -> u32 {
        self.k - a.intersection_size(b)
    }
}

/// Pascal triangle up to n = 64, used by ranking and the hot enumeration paths.
static CHOOSE: [[u64; 65]; 65] = build_choose();

const fn build_choose() -> [[u64; 65]; 65] {
    let mut t = [[0u64; 65]; 65];
    let mut n = 0;
    while n <= 64 {
        t[n][0] = 1;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
            k += 1;
        }
        n += 1;
    }
    t
}

/// Table lookup for the hot paths; `n`, `k` must both be at most 64.
#[inline]
pub(crate) fn choose_small(n: usize, k: usize) -> u64 {
    CHOOSE[n][k]
}

/// C(n, k) with the convention C(n, k) = 0 for k > n.
///
/// Exact for every n <= 64; intermediate products run in 128-bit arithmetic
/// so the n = 64 cases cannot overflow.
pub fn binomial(n: u32, k: u32) -> u64 {
    assert!(n <= MAX_GROUND_SET, "binomial: n={n} exceeds the 64-element scope");
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    let mut i: u128 = 1;
    while i <= k {
        acc = acc * (n - k + i) / i;
        i += 1;
    }
    acc as u64
}

/// Colexicographic rank of a subset mask among the masks of equal popcount.
///
/// Ranks increase exactly when masks increase as integers, so rank order and
/// enumeration order coincide.
pub fn rank_of_mask(mask: u64) -> u64 {
    let mut rank = 0u64;
    let mut m = mask;
    let mut j = 1usize;
    while m != 0 {
        let pos = m.trailing_zeros() as usize;
        rank += CHOOSE[pos][j];
        j += 1;
        m &= m - 1;
    }
    rank
}

/// Inverse of [`rank_of_mask`] for k-subsets over `[n]`.
pub fn mask_of_rank(rank: u64, params: &Params) -> u64 {
    debug_assert!(rank < params.total_subsets());
    let mut rank = rank;
    let mut mask = 0u64;
    let mut limit = params.n() as usize;
    let mut j = params.k() as usize;
    while j > 0 {
        let mut p = limit - 1;
        while CHOOSE[p][j] > rank {
            p -= 1;
        }
        rank -= CHOOSE[p][j];
        mask |= 1u64 << p;
        limit = p;
        j -= 1;
    }
    mask
}

/// Next larger integer with the same popcount (Gosper's hack).
///
/// Must not be called on the maximal mask of the enumeration window; the
/// cursor never does.
#[inline]
pub(crate) fn next_same_weight(mask: u64) -> u64 {
    debug_assert!(mask != 0);
    let low = mask & mask.wrapping_neg();
    let carry = mask + low;
    carry + (((carry ^ mask) / low) >> 2)
}

/// A k-subset of `[n]` stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block(u64);

impl Block {
    /// Build a block from exactly k distinct 1-indexed elements.
    pub fn from_elements(elements: &[u32], params: &Params) -> Result<Self, CoreError> {
        if elements.len() != params.k() as usize {
            return Err(CoreError::WrongCardinality {
                expected: params.k(),
                got: elements.len(),
            });
        }
        let mut mask = 0u64;
        for &e in elements {
            if e == 0 || e > params.n() {
                return Err(CoreError::OutOfRange { element: e, n: params.n() });
            }
            let bit = 1u64 << (e - 1);
            if mask & bit != 0 {
                return Err(CoreError::DuplicateElement(e));
            }
            mask |= bit;
        }
        Ok(Self(mask))
    }

    pub fn from_mask(mask: u64, params: &Params) -> Result<Self, CoreError> {
        if mask.count_ones() != params.k() || mask & !params.full_mask() != 0 {
            return Err(CoreError::InvalidMask { mask, n: params.n(), k: params.k() });
        }
        Ok(Self(mask))
    }

    /// Caller guarantees popcount and range; used on hot construction paths.
    #[inline]
    pub(crate) fn from_mask_unchecked(mask: u64) -> Self {
        Self(mask)
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.0
    }

    /// Elements in ascending order, 1-indexed.
    pub fn elements(self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.0.count_ones() as usize);
        let mut m = self.0;
        while m != 0 {
            out.push(m.trailing_zeros() + 1);
            m &= m - 1;
        }
        out
    }

    #[inline]
    pub fn intersection_size(self, other: Block) -> u32 {
        (self.0 & other.0).count_ones()
    }

    pub fn contains_element(self, element: u32) -> bool {
        (1..=64).contains(&element) && self.0 & (1u64 << (element - 1)) != 0
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for e in self.elements() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{e}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Block{{{self}}}")
    }
}

/// An ordered, duplicate-free list of blocks plus construction provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    params: Params,
    blocks: Vec<Block>,
    provenance: String,
}

impl Family {
    pub fn new(
        params: Params,
        blocks: Vec<Block>,
        provenance: impl Into<String>,
    ) -> Result<Self, CoreError> {
        let mut seen = std::collections::HashSet::with_capacity(blocks.len());
        for b in &blocks {
            if b.mask().count_ones() != params.k() || b.mask() & !params.full_mask() != 0 {
                return Err(CoreError::InvalidMask {
                    mask: b.mask(),
                    n: params.n(),
                    k: params.k(),
                });
            }
            if !seen.insert(b.mask()) {
                return Err(CoreError::DuplicateBlock(b.to_string()));
            }
        }
        Ok(Self { params, blocks, provenance: provenance.into() })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Flat mask array in family order, the layout the verifier scans.
    pub fn masks(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.mask()).collect()
    }

    /// Relabel the ground set: `perm[i]` is the new label of element `i + 1`.
    pub fn permuted(&self, perm: &[u32], provenance: impl Into<String>) -> Result<Self, CoreError> {
        validate_permutation(perm, self.params.n())?;
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut mask = 0u64;
                let mut m = b.mask();
                while m != 0 {
                    let pos = m.trailing_zeros() as usize;
                    mask |= 1u64 << (perm[pos] - 1);
                    m &= m - 1;
                }
                Block::from_mask_unchecked(mask)
            })
            .collect();
        Family::new(self.params, blocks, provenance)
    }
}

pub(crate) fn validate_permutation(perm: &[u32], n: u32) -> Result<(), CoreError> {
    if perm.len() != n as usize {
        return Err(CoreError::InvalidPermutation(n));
    }
    let mut seen = 0u64;
    for &v in perm {
        if v == 0 || v > n {
            return Err(CoreError::InvalidPermutation(n));
        }
        let bit = 1u64 << (v - 1);
        if seen & bit != 0 {
            return Err(CoreError::InvalidPermutation(n));
        }
        seen |= bit;
    }
    Ok(())
}

/// Streaming enumeration of k-subsets over a rank range, in increasing mask
/// order. Disjoint ranges partition the full enumeration.
#[derive(Debug, Clone)]
pub struct SubsetCursor {
    next_rank: u64,
    end_rank: u64,
    mask: u64,
}

impl SubsetCursor {
    fn new(params: &Params, start: u64, end: u64) -> Self {
        let mask = if start < end { mask_of_rank(start, params) } else { 0 };
        Self { next_rank: start, end_rank: end, mask }
    }

    /// Rank of the subset the next `next()` call will yield.
    pub fn rank(&self) -> u64 {
        self.next_rank
    }
}

impl Iterator for SubsetCursor {
    type Item = Block;

    #[inline]
    fn next(&mut self) -> Option<Block> {
        if self.next_rank >= self.end_rank {
            return None;
        }
        let out = Block::from_mask_unchecked(self.mask);
        self.next_rank += 1;
        if self.next_rank < self.end_rank {
            self.mask = next_same_weight(self.mask);
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end_rank - self.next_rank) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for SubsetCursor {}

/// Every k-subset of `[n]`, rank 0 to C(n,k).
pub fn enumerate_k_subsets(params: &Params) -> SubsetCursor {
    SubsetCursor::new(params, 0, params.total_subsets())
}

/// The k-subsets with ranks in `start..end`.
pub fn enumerate_k_subsets_range(
    params: &Params,
    start: u64,
    end: u64,
) -> Result<SubsetCursor, CoreError> {
    let total = params.total_subsets();
    if start > end || end > total {
        return Err(CoreError::RangeOutOfBounds { start, end, total });
    }
    Ok(SubsetCursor::new(params, start, end))
}
