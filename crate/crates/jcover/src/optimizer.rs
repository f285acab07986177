//! Family reduction: exact redundancy pruning backed by a per-subset coverage
//! ledger, plus greedy set cover and a seeded local search over candidate
//! pools. Every output is a verified cover by construction — removals and
//! swaps are only accepted while the ledger shows no subset dropping to zero.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::constructions::PartitionScheme;
use crate::core::{Block, CoreError, Family, Params};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OptimizerError {
    #[error("coverage ledger needs {required_bytes} bytes of counters")]
    OutOfMemoryBudget { required_bytes: u128 },
    #[error("family of {size} blocks exceeds the 16-bit counter range")]
    FamilyTooLarge { size: usize },
    #[error("family does not cover; first uncovered subset {witness:?}")]
    NotACover { witness: Vec<u32> },
    #[error("pool does not cover; {uncovered} subsets unreachable")]
    PoolDoesNotCover { uncovered: u64 },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Visit order for redundancy pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneOrder {
    /// Construction order.
    Index,
    /// Seeded pseudorandom permutation of the construction order.
    Seeded(u64),
}

/// Enumerate the covering ball of a block — every k-subset meeting it in at
/// least `threshold` elements — invoking `visit` with each subset's rank.
/// Generation picks `i` elements inside the block and `k - i` outside for
/// each `i` in `threshold..=k`, so the work is the ball size, not C(n, k).
/// Returning `false` from `visit` aborts the walk.
pub(crate) fn walk_ball_ranks(
    params: &Params,
    block: Block,
    mut visit: impl FnMut(u64) -> bool,
) -> bool {
    let k = params.k() as usize;
    let inside: Vec<u32> = (0..64).filter(|&p| block.mask() & (1u64 << p) != 0).collect();
    let outside: Vec<u32> =
        (0..params.n()).filter(|&p| block.mask() & (1u64 << p) == 0).collect();
    let t = params.threshold() as usize;

    let mut in_combo = vec![0usize; k];
    let mut out_combo = vec![0usize; k];
    for i in t..=k {
        let take_out = k - i;
        if take_out > outside.len() {
            continue;
        }
        let go = for_each_combination(inside.len(), i, &mut in_combo, &mut |ic| {
            for_each_combination(outside.len(), take_out, &mut out_combo, &mut |oc| {
                let rank = merged_rank(&inside, ic, &outside, oc);
                visit(rank)
            })
        });
        if !go {
            return false;
        }
    }
    true
}

/// Iterate ascending index combinations `choose(m, take)` in place; the
/// callback returning `false` stops everything.
fn for_each_combination(
    m: usize,
    take: usize,
    scratch: &mut [usize],
    f: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if take == 0 {
        return f(&[]);
    }
    if take > m {
        return true;
    }
    let idx = &mut scratch[..take];
    for (i, v) in idx.iter_mut().enumerate() {
        *v = i;
    }
    loop {
        if !f(idx) {
            return false;
        }
        // rightmost index that can still move
        let mut j = take;
        loop {
            if j == 0 {
                return true;
            }
            j -= 1;
            if idx[j] < m - take + j {
                break;
            }
        }
        idx[j] += 1;
        for l in j + 1..take {
            idx[l] = idx[l - 1] + 1;
        }
    }
}

/// Combinatorial-number-system rank of the union of two ascending position
/// lists given by index selections into them.
fn merged_rank(a: &[u32], ai: &[usize], b: &[u32], bi: &[usize]) -> u64 {
    let mut rank = 0u64;
    let mut x = 0usize;
    let mut y = 0usize;
    let mut ordinal = 1usize;
    while x < ai.len() || y < bi.len() {
        let pos = if x < ai.len() && (y >= bi.len() || a[ai[x]] < b[bi[y]]) {
            let p = a[ai[x]];
            x += 1;
            p
        } else {
            let p = b[bi[y]];
            y += 1;
            p
        };
        rank += crate::core::choose_small(pos as usize, ordinal);
        ordinal += 1;
    }
    rank
}

/// Exact per-subset covering multiplicities for one family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageLedger {
    params: Params,
    counts: Vec<u16>,
    covered: u64,
}

impl CoverageLedger {
    /// Count, for every k-subset, how many family blocks cover it. Workers
    /// split the block list and fill private counter arrays merged by
    /// summation, so the result never depends on scheduling.
    pub fn build(family: &Family, workers: usize) -> Result<Self, OptimizerError> {
        if family.len() > u16::MAX as usize {
            return Err(OptimizerError::FamilyTooLarge { size: family.len() });
        }
        let params = *family.params();
        let total = params.total_subsets() as usize;
        let mut counts = try_alloc_counters(total)?;

        let blocks = family.blocks();
        let workers = workers.clamp(1, 8).min(blocks.len().max(1));
        if workers <= 1 || blocks.len() < 2 {
            for &b in blocks {
                walk_ball_ranks(&params, b, |rank| {
                    counts[rank as usize] += 1;
                    true
                });
            }
        } else {
            let chunk = blocks.len().div_ceil(workers);
            let partials: Vec<Result<Vec<u16>, OptimizerError>> = std::thread::scope(|scope| {
                let handles: Vec<_> = blocks
                    .chunks(chunk)
                    .map(|slice| {
                        scope.spawn(move || {
                            let mut part = try_alloc_counters(total)?;
                            for &b in slice {
                                walk_ball_ranks(&params, b, |rank| {
                                    part[rank as usize] += 1;
                                    true
                                });
                            }
                            Ok(part)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("ledger worker panicked")).collect()
            });
            for part in partials {
                let part = part?;
                for (acc, v) in counts.iter_mut().zip(part) {
                    *acc += v;
                }
            }
        }
        let covered = counts.iter().filter(|&&c| c > 0).count() as u64;
        Ok(Self { params, counts, covered })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    pub fn covered(&self) -> u64 {
        self.covered
    }

    pub fn uncovered(&self) -> u64 {
        self.params.total_subsets() - self.covered
    }

    pub fn is_cover(&self) -> bool {
        self.uncovered() == 0
    }

    /// Sum of all multiplicities, `Σ_B |ball(B)|`.
    pub fn multiplicity_sum(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn first_uncovered(&self) -> Option<u64> {
        self.counts.iter().position(|&c| c == 0).map(|r| r as u64)
    }

    /// True when every subset in the block's ball stays covered without it.
    pub fn block_redundant(&self, block: Block) -> bool {
        walk_ball_ranks(&self.params, block, |rank| self.counts[rank as usize] >= 2)
    }

    pub fn remove_block(&mut self, block: Block) {
        walk_ball_ranks(&self.params, block, |rank| {
            let c = &mut self.counts[rank as usize];
            *c -= 1;
            if *c == 0 {
                self.covered -= 1;
            }
            true
        });
    }

    pub fn add_block(&mut self, block: Block) {
        walk_ball_ranks(&self.params, block, |rank| {
            let c = &mut self.counts[rank as usize];
            if *c == 0 {
                self.covered += 1;
            }
            *c += 1;
            true
        });
    }

    fn witness(&self) -> Vec<u32> {
        let rank = self.first_uncovered().expect("caller checked uncovered > 0");
        Block::from_mask_unchecked(crate::core::mask_of_rank(rank, &self.params)).elements()
    }
}

fn try_alloc_counters(len: usize) -> Result<Vec<u16>, OptimizerError> {
    let mut v: Vec<u16> = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|_| OptimizerError::OutOfMemoryBudget { required_bytes: 2 * len as u128 })?;
    v.resize(len, 0);
    Ok(v)
}

/// Convenience wrapper matching the ledger-building operation by itself.
pub fn build_ledger(family: &Family, workers: usize) -> Result<CoverageLedger, OptimizerError> {
    CoverageLedger::build(family, workers)
}

/// Remove blocks whose entire ball stays covered without them, visiting in
/// the given order; the result still covers and is minimal with respect to
/// single-block removal in that order.
pub fn prune_redundant(
    family: &Family,
    order: PruneOrder,
    workers: usize,
) -> Result<Family, OptimizerError> {
    let mut ledger = CoverageLedger::build(family, workers)?;
    if !ledger.is_cover() {
        return Err(OptimizerError::NotACover { witness: ledger.witness() });
    }
    let blocks = family.blocks();
    let mut visit: Vec<usize> = (0..blocks.len()).collect();
    let order_tag = match order {
        PruneOrder::Index => "index".to_string(),
        PruneOrder::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            visit.shuffle(&mut rng);
            format!("random,seed={seed}")
        }
    };
    let mut alive = vec![true; blocks.len()];
    for idx in visit {
        if ledger.block_redundant(blocks[idx]) {
            ledger.remove_block(blocks[idx]);
            alive[idx] = false;
        }
    }
    let kept: Vec<Block> =
        blocks.iter().zip(&alive).filter_map(|(b, &a)| a.then_some(*b)).collect();
    let provenance = format!("{}+pruned(order={order_tag})", family.provenance());
    Ok(Family::new(*family.params(), kept, provenance)?)
}

/// Greedy set cover over a candidate pool: repeatedly take the block covering
/// the most still-uncovered subsets, ties to the lowest block mask. Uses lazy
/// gain re-evaluation — stored gains only overestimate, so a popped entry is
/// re-scored and either selected or pushed back.
pub fn greedy_cover(pool: &Family) -> Result<Family, OptimizerError> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let params = *pool.params();
    let total = params.total_subsets();
    let mut covered_bits = vec![0u64; (total as usize).div_ceil(64)];
    let mut covered = 0u64;
    let blocks = pool.blocks();

    let ball = crate::bounds::neighborhood_size(&params);
    let mut heap: BinaryHeap<(u64, Reverse<u64>, usize)> =
        blocks.iter().enumerate().map(|(i, b)| (ball, Reverse(b.mask()), i)).collect();

    let gain_of = |covered_bits: &[u64], b: Block| -> u64 {
        let mut gain = 0u64;
        walk_ball_ranks(&params, b, |rank| {
            if covered_bits[rank as usize / 64] & (1u64 << (rank % 64)) == 0 {
                gain += 1;
            }
            true
        });
        gain
    };

    let mut chosen = Vec::new();
    while covered < total {
        let Some((_, Reverse(mask), idx)) = heap.pop() else {
            return Err(OptimizerError::PoolDoesNotCover { uncovered: total - covered });
        };
        let b = blocks[idx];
        let gain = gain_of(&covered_bits, b);
        if gain == 0 {
            continue;
        }
        let select = match heap.peek() {
            None => true,
            Some(&(top_gain, Reverse(top_mask), _)) => {
                gain > top_gain || (gain == top_gain && mask < top_mask)
            }
        };
        if !select {
            heap.push((gain, Reverse(mask), idx));
            continue;
        }
        walk_ball_ranks(&params, b, |rank| {
            let w = &mut covered_bits[rank as usize / 64];
            let bit = 1u64 << (rank % 64);
            if *w & bit == 0 {
                *w |= bit;
                covered += 1;
            }
            true
        });
        chosen.push(b);
    }
    let provenance = format!("greedy({})", pool.provenance());
    Ok(Family::new(params, chosen, provenance)?)
}

/// Seeded swap search: replace one block with a random pair-union from the
/// scheme (when given) or a uniform random k-set, keep the swap only if the
/// family still covers, then sweep out redundant blocks. Never grows the
/// family; deterministic for a fixed seed. Sized for small ground sets —
/// every proposal costs two ball walks and every accepted swap a prune sweep.
pub fn local_search(
    start: &Family,
    scheme: Option<&PartitionScheme>,
    budget: u64,
    seed: u64,
    workers: usize,
) -> Result<Family, OptimizerError> {
    if budget == 0 {
        return Ok(start.clone());
    }
    let params = *start.params();
    if let Some(s) = scheme {
        assert_eq!(s.params(), &params, "scheme must match the family parameters");
    }
    let mut ledger = CoverageLedger::build(start, workers)?;
    if !ledger.is_cover() {
        return Err(OptimizerError::NotACover { witness: ledger.witness() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks: Vec<Block> = start.blocks().to_vec();
    let mut members: HashSet<u64> = blocks.iter().map(|b| b.mask()).collect();

    for _ in 0..budget {
        if blocks.len() <= 1 {
            break;
        }
        let victim_idx = rng.random_range(0..blocks.len());
        let proposal = propose_block(&params, scheme, &mut rng);
        if members.contains(&proposal.mask()) {
            continue;
        }
        let victim = blocks[victim_idx];
        ledger.remove_block(victim);
        ledger.add_block(proposal);
        if ledger.is_cover() {
            members.remove(&victim.mask());
            members.insert(proposal.mask());
            blocks[victim_idx] = proposal;
            // sweep out anything the swap made redundant
            let mut idx = 0;
            while idx < blocks.len() {
                if blocks.len() > 1 && ledger.block_redundant(blocks[idx]) {
                    ledger.remove_block(blocks[idx]);
                    members.remove(&blocks[idx].mask());
                    blocks.remove(idx);
                } else {
                    idx += 1;
                }
            }
        } else {
            ledger.remove_block(proposal);
            ledger.add_block(victim);
        }
    }
    let provenance = format!("{}+localsearch(seed={seed},budget={budget})", start.provenance());
    Ok(Family::new(params, blocks, provenance)?)
}

fn propose_block(params: &Params, scheme: Option<&PartitionScheme>, rng: &mut ChaCha8Rng) -> Block {
    if let Some(scheme) = scheme {
        if rng.random_bool(0.5) {
            let part = &scheme.parts()[rng.random_range(0..scheme.parts().len())];
            let picks = rand::seq::index::sample(rng, part.pairs().len(), 3);
            let mask = picks.iter().fold(0u64, |acc, i| acc | part.pairs()[i]);
            return Block::from_mask_unchecked(mask);
        }
    }
    let picks = rand::seq::index::sample(rng, params.n() as usize, params.k() as usize);
    let mask = picks.iter().fold(0u64, |acc, p| acc | (1u64 << p));
    Block::from_mask_unchecked(mask)
}
