//! Non-crossing-partition combinatorics and moment/cumulant conversions.
//!
//! The free conversions sum block-size products over non-crossing
//! partitions; the classical analog sums over all set partitions. Partitions
//! are enumerated directly (never filtered from the full partition lattice),
//! so the cost is Catalan-bounded, and the enumeration order is
//! deterministic: blocks appear by ascending minimum, partitions in subset
//! order of the recursive construction.

use alloc::vec;
use alloc::vec::Vec;

use crate::triplets::CumulantVector;
use crate::{Error, Result};

/// Largest order for non-crossing enumeration (Catalan growth bound).
pub const MAX_NC_ORDER: usize = 14;
/// Largest order for all-set-partition sums (Bell growth bound).
pub const MAX_BELL_ORDER: usize = 12;

/// A set partition of `{1..p}`, stored as a restricted-growth assignment:
/// `assignment[i]` is the block index of element `i + 1`, blocks numbered by
/// first appearance. Blocks are disjoint, nonempty and cover `{1..p}` by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<u8>,
}

impl Partition {
    fn from_blocks(blocks: &[Vec<u8>], p: usize) -> Self {
        let mut assignment = vec![0u8; p];
        let mut order: Vec<(u8, usize)> = blocks.iter().enumerate().map(|(i, b)| (b[0], i)).collect();
        order.sort();
        for (idx, &(_, bi)) in order.iter().enumerate() {
            for &e in &blocks[bi] {
                assignment[(e - 1) as usize] = idx as u8;
            }
        }
        Partition { assignment }
    }

    pub fn order(&self) -> usize {
        self.assignment.len()
    }

    pub fn block_count(&self) -> usize {
        self.assignment.iter().map(|&b| b as usize + 1).max().unwrap_or(0)
    }

    /// Blocks as sorted element lists, ordered by minimum element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); self.block_count()];
        for (i, &b) in self.assignment.iter().enumerate() {
            blocks[b as usize].push(i + 1);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.block_count()];
        for &b in &self.assignment {
            sizes[b as usize] += 1;
        }
        sizes
    }

    /// Crossing test: some `i < j < k < l` with `{i, k}` and `{j, l}` in two
    /// different blocks.
    pub fn is_non_crossing(&self) -> bool {
        let p = self.order();
        for i in 0..p {
            for j in (i + 1)..p {
                if self.assignment[j] == self.assignment[i] {
                    continue;
                }
                for k in (j + 1)..p {
                    if self.assignment[k] != self.assignment[i] {
                        continue;
                    }
                    for l in (k + 1)..p {
                        if self.assignment[l] == self.assignment[j] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Visit every non-crossing partition of the segments on the stack,
/// invoking `visit` with the blocks accumulated so far. Segments are popped
/// leftmost-first, so blocks arrive by ascending minimum.
fn nc_visit_rec<F: FnMut(&[Vec<u8>])>(
    segments: &mut Vec<Vec<u8>>,
    blocks: &mut Vec<Vec<u8>>,
    visit: &mut F,
) {
    let seg = match segments.pop() {
        None => {
            visit(blocks);
            return;
        }
        Some(seg) => seg,
    };
    let first = seg[0];
    let rest = &seg[1..];
    let n = rest.len();
    for mask in 0u32..(1 << n) {
        let mut block = vec![first];
        let mut gaps: Vec<Vec<u8>> = vec![Vec::new()];
        for (i, &e) in rest.iter().enumerate() {
            if mask >> i & 1 == 1 {
                block.push(e);
                gaps.push(Vec::new());
            } else {
                gaps.last_mut().unwrap().push(e);
            }
        }
        // Push right-to-left so the leftmost gap is processed next.
        let pushed = gaps.iter().filter(|g| !g.is_empty()).count();
        for gap in gaps.into_iter().rev() {
            if !gap.is_empty() {
                segments.push(gap);
            }
        }
        blocks.push(block);
        nc_visit_rec(segments, blocks, visit);
        blocks.pop();
        for _ in 0..pushed {
            segments.pop();
        }
    }
    segments.push(seg);
}

fn nc_visit<F: FnMut(&[Vec<u8>])>(p: usize, visit: &mut F) {
    if p == 0 {
        return;
    }
    let mut segments = vec![(1..=p as u8).collect::<Vec<u8>>()];
    let mut blocks = Vec::new();
    nc_visit_rec(&mut segments, &mut blocks, visit);
}

/// Visit every set partition of `{1..p}` (restricted-growth recursion).
fn all_visit<F: FnMut(&[u8], usize)>(p: usize, visit: &mut F) {
    fn rec<F: FnMut(&[u8], usize)>(sizes: &mut Vec<u8>, remaining: usize, visit: &mut F) {
        if remaining == 0 {
            let count = sizes.len();
            visit(sizes, count);
            return;
        }
        for i in 0..sizes.len() {
            sizes[i] += 1;
            rec(sizes, remaining - 1, visit);
            sizes[i] -= 1;
        }
        sizes.push(1);
        rec(sizes, remaining - 1, visit);
        sizes.pop();
    }
    let mut sizes = Vec::new();
    rec(&mut sizes, p, visit);
}

/// All non-crossing partitions of `{1..p}` in deterministic order.
pub fn enumerate_nc(p: usize) -> Result<Vec<Partition>> {
    if p == 0 || p > MAX_NC_ORDER {
        return Err(Error::OrderTooLarge { order: p, max: MAX_NC_ORDER });
    }
    let mut out = Vec::new();
    nc_visit(p, &mut |blocks| out.push(Partition::from_blocks(blocks, p)));
    Ok(out)
}

/// Catalan number `C_p = |NC(p)|`.
pub fn catalan(p: usize) -> u64 {
    let mut c: u128 = 1;
    for i in 0..p as u128 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c as u64
}

/// Bell number `B_p`, the number of set partitions of `{1..p}`.
pub fn bell(p: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 1..p {
        let mut next = vec![*row.last().unwrap()];
        for &v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    *row.last().unwrap()
}

/// Moments of orders `1..=p`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentVector {
    pub values: Vec<f64>,
}

impl MomentVector {
    pub fn new(values: Vec<f64>) -> Self {
        MomentVector { values }
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }
}

/// Compensated (Kahan) accumulator; the partition sums run over up to
/// Catalan(14) terms and plain summation costs two digits.
#[derive(Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Sum over non-crossing partitions of `{1..p}` of the block-size products
/// `Π κ_{#V}`, with the single-block partition optionally excluded.
fn nc_product_sum(p: usize, kappa: &[f64], skip_single_block: bool) -> f64 {
    let mut total = Kahan::default();
    nc_visit(p, &mut |blocks| {
        if skip_single_block && blocks.len() < 2 {
            return;
        }
        let mut prod = 1.0;
        for b in blocks {
            prod *= kappa[b.len() - 1];
        }
        total.add(prod);
    });
    total.sum
}

/// Free cumulants from moments via the moment-cumulant formula, recursively
/// in the order: `κ_p = m_p − Σ_{π ∈ NC'(p)} Π κ_{#V}`.
pub fn moments_to_free_cumulants(m: &MomentVector) -> Result<CumulantVector> {
    let p = m.order();
    if p > MAX_NC_ORDER {
        return Err(Error::OrderTooLarge { order: p, max: MAX_NC_ORDER });
    }
    let mut kappa: Vec<f64> = Vec::with_capacity(p);
    for q in 1..=p {
        kappa.push(0.0);
        let correction = nc_product_sum(q, &kappa, true);
        kappa[q - 1] = m.values[q - 1] - correction;
    }
    Ok(CumulantVector::new(kappa))
}

/// Moments from free cumulants: `m_p = Σ_{π ∈ NC(p)} Π κ_{#V}`.
pub fn free_cumulants_to_moments(k: &CumulantVector) -> Result<MomentVector> {
    let p = k.order();
    if p > MAX_NC_ORDER {
        return Err(Error::OrderTooLarge { order: p, max: MAX_NC_ORDER });
    }
    let values = (1..=p).map(|q| nc_product_sum(q, &k.values, false)).collect();
    Ok(MomentVector::new(values))
}

/// Moments from classical cumulants: `m_p = Σ` over all set partitions of
/// `Π c_{#V}`.
pub fn classical_cumulants_to_moments(c: &CumulantVector) -> Result<MomentVector> {
    let p = c.order();
    if p > MAX_BELL_ORDER {
        return Err(Error::OrderTooLarge { order: p, max: MAX_BELL_ORDER });
    }
    let mut values = Vec::with_capacity(p);
    for q in 1..=p {
        let mut total = Kahan::default();
        all_visit(q, &mut |sizes, count| {
            let mut prod = 1.0;
            for &s in &sizes[..count] {
                prod *= c.values[s as usize - 1];
            }
            total.add(prod);
        });
        values.push(total.sum);
    }
    Ok(MomentVector::new(values))
}
