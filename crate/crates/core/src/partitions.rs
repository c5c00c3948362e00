//! Set partitions, bipartitions and the integer coefficients that weight them.
//!
//! Partitions of `{0, …, n-1}` are streamed in lexicographic order of their
//! restricted-growth strings (RGS): `a[0] = 0` and `a[i] <= 1 + max(a[..i])`.
//! Element `i` belongs to block `a[i]`, so blocks come out sorted by their
//! smallest element. Nothing is ever materialised as a full list; callers fold
//! over the stream.

use crate::error::{invalid, Error, Result};

/// Largest `n` accepted by [`enumerate_partitions`]; Bell(15) is about 1.4e9.
pub const DEFAULT_PARTITION_LIMIT: usize = 15;

/// Largest argument of [`moebius_g`].
pub const MAX_MOEBIUS_ARG: u32 = 20;

/// Largest argument of [`stirling2`].
pub const MAX_STIRLING_ARG: u32 = 30;

/// A partition of `{0, …, n-1}` into nonempty disjoint blocks.
///
/// Blocks are ordered by their minimum element and each block is ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition from arbitrary blocks, validating and canonicalising.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return invalid("empty block in set partition");
            }
            for &e in block.iter() {
                if e >= n {
                    return invalid(format!("element {e} outside 0..{n}"));
                }
                if seen[e] {
                    return invalid(format!("element {e} appears in two blocks"));
                }
                seen[e] = true;
            }
            block.sort_unstable();
        }
        if seen.iter().any(|s| !s) {
            return invalid("blocks do not cover the ground set");
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    /// Builds the partition encoded by a restricted-growth string.
    pub fn from_rgs(labels: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, &label) in labels.iter().enumerate() {
            if label == blocks.len() {
                blocks.push(Vec::new());
            }
            blocks[label].push(i);
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Size of the ground set.
    pub fn ground_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Restricted-growth string of this partition.
    pub fn rgs(&self) -> Vec<usize> {
        let mut labels = vec![0; self.ground_size()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &e in block {
                labels[e] = b;
            }
        }
        labels
    }

    /// Blocks as bitmasks over the ground set (requires `n <= 64`).
    pub fn block_masks(&self) -> Vec<u64> {
        self.blocks
            .iter()
            .map(|b| b.iter().fold(0u64, |m, &e| m | (1 << e)))
            .collect()
    }
}

/// In-place cursor over restricted-growth strings of length `n`.
///
/// This is the allocation-free core of [`PartitionStream`]; hot loops that
/// fold over millions of partitions use it directly.
#[derive(Debug, Clone)]
pub struct RgsCursor {
    labels: Vec<usize>,
    // prefix_max[i] = max(labels[..=i])
    prefix_max: Vec<usize>,
    started: bool,
    done: bool,
}

impl RgsCursor {
    pub fn new(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            prefix_max: vec![0; n],
            started: false,
            done: n == 0,
        }
    }

    /// Moves to the next string; returns `false` once the stream is exhausted.
    /// The first call positions the cursor on `00…0`.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let n = self.labels.len();
        for i in (1..n).rev() {
            if self.labels[i] <= self.prefix_max[i - 1] {
                self.labels[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                return true;
            }
        }
        self.done = true;
        false
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn block_count(&self) -> usize {
        self.prefix_max.last().map_or(0, |m| m + 1)
    }

    /// Writes the block bitmasks into `out` and returns the block count.
    pub fn fill_block_masks(&self, out: &mut Vec<u64>) -> usize {
        let k = self.block_count();
        out.clear();
        out.resize(k, 0);
        for (i, &l) in self.labels.iter().enumerate() {
            out[l] |= 1 << i;
        }
        k
    }
}

/// Stream of all set partitions of `{0, …, n-1}` in RGS order.
#[derive(Debug, Clone)]
pub struct PartitionStream {
    cursor: RgsCursor,
}

impl Iterator for PartitionStream {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.cursor.advance() {
            Some(SetPartition::from_rgs(self.cursor.labels()))
        } else {
            None
        }
    }
}

/// Streams every partition of `{0, …, n-1}` exactly once.
pub fn enumerate_partitions(n: usize) -> Result<PartitionStream> {
    enumerate_partitions_with_limit(n, DEFAULT_PARTITION_LIMIT)
}

pub fn enumerate_partitions_with_limit(n: usize, limit: usize) -> Result<PartitionStream> {
    partition_cursor(n, limit).map(|cursor| PartitionStream { cursor })
}

/// Validated [`RgsCursor`] for `n` elements.
pub fn partition_cursor(n: usize, limit: usize) -> Result<RgsCursor> {
    if n == 0 {
        return invalid("cannot partition an empty set");
    }
    if n > limit {
        return invalid(format!("n = {n} exceeds the partition limit {limit}"));
    }
    if n > 64 {
        return invalid("partitions are tracked with 64-bit masks");
    }
    Ok(RgsCursor::new(n))
}

/// An unordered split of `{0, …, n-1}` into two nonempty parts; `first`
/// always holds element 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl Bipartition {
    /// Builds the bipartition whose `second` part is `mask` (bit 0 must be clear).
    pub fn from_second_mask(n: usize, mask: u64) -> Self {
        let (second, first): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| mask >> i & 1 == 1);
        Self { first, second }
    }

    pub fn second_mask(&self) -> u64 {
        self.second.iter().fold(0, |m, &e| m | (1 << e))
    }
}

/// Stream of the `2^(n-1) - 1` bipartitions, ordered by the bitmask of the
/// part that excludes element 0.
#[derive(Debug, Clone)]
pub struct BipartitionStream {
    n: usize,
    next_mask: u64,
    end: u64,
}

impl Iterator for BipartitionStream {
    type Item = Bipartition;

    fn next(&mut self) -> Option<Bipartition> {
        if self.next_mask >= self.end {
            return None;
        }
        let mask = self.next_mask << 1;
        self.next_mask += 1;
        Some(Bipartition::from_second_mask(self.n, mask))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next_mask) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for BipartitionStream {}

pub fn enumerate_bipartitions(n: usize) -> Result<BipartitionStream> {
    if n < 2 {
        return invalid(format!("bipartitions need at least 2 elements, got {n}"));
    }
    if n > 63 {
        return invalid("bipartitions are tracked with 64-bit masks");
    }
    Ok(BipartitionStream {
        n,
        next_mask: 1,
        end: 1u64 << (n - 1),
    })
}

/// Möbius weight `(-1)^(k-1) (k-1)!` of a partition with `k` blocks.
pub fn moebius_g(k: u32) -> Result<i128> {
    if k == 0 || k > MAX_MOEBIUS_ARG {
        return invalid(format!("moebius_g needs 1 <= k <= {MAX_MOEBIUS_ARG}, got {k}"));
    }
    let factorial: i128 = (1..k as i128).product();
    Ok(if k % 2 == 1 { factorial } else { -factorial })
}

/// Same weight as [`moebius_g`] as a float, for any block count.
pub(crate) fn moebius_g_f64(k: usize) -> f64 {
    let factorial: f64 = (1..k).map(|x| x as f64).product();
    if k % 2 == 1 {
        factorial
    } else {
        -factorial
    }
}

/// Stirling number of the second kind `S(v, a)`.
pub fn stirling2(v: u32, a: u32) -> Result<u128> {
    if v > MAX_STIRLING_ARG || a > MAX_STIRLING_ARG {
        return Err(Error::InvalidArgument(format!(
            "stirling2 arguments must be <= {MAX_STIRLING_ARG}"
        )));
    }
    if a > v {
        return Ok(0);
    }
    let (v, a) = (v as usize, a as usize);
    // row[k] = S(m, k), updated in place from m = 0 upwards
    let mut row = vec![0u128; a + 1];
    row[0] = 1;
    for _ in 0..v {
        for k in (1..=a).rev() {
            row[k] = k as u128 * row[k] + row[k - 1];
        }
        row[0] = 0;
    }
    Ok(row[a])
}

/// Bell number: total count of set partitions of an `n`-set.
pub fn bell_number(n: u32) -> Result<u128> {
    (0..=n).map(|a| stirling2(n, a)).sum()
}

/// Binomial coefficient (exact, `n <= 120`).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
