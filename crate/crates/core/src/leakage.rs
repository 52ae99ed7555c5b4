//! Mutual-information leakage of polar secrecy codes over a wiretap BEC.
//!
//! For a BEC the eavesdropper's observation is summarized by the erasure
//! pattern and the unerased codeword bits. Writing `G~` for the generator
//! restricted to the rows `A ∪ R`, the leakage of one pattern equals the
//! dimension of the intersection between the span of the unerased columns of
//! `G~` and the coordinate subspace of the message rows. Averaging that
//! dimension over patterns gives `I(U; Z)` in bits.
//!
//! Two independent routes are provided for checking: [`brute_force_mi`]
//! builds the joint distribution of message and observation by enumerating
//! every message, random vector and erasure pattern, and
//! [`conditional_mi_check`] does the same for conditional informations of
//! the raw polarization transform.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bec::{capacity_sum, evolve, BecParam, BitChannelTable};
use crate::error::{invalid, Error, Result};
use crate::gf2::{intersection_dim, BitMatrix, BitVector};
use crate::scheme::SecrecyPartition;

/// Largest block length accepted by [`exact_leakage_enumeration`].
pub const MAX_EXACT_N: usize = 16;
/// Largest block length accepted by the brute-force information oracles.
pub const MAX_BRUTE_FORCE_N: usize = 8;

/// Clamped leakage bounds in bits: `0 <= lower <= upper <= k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageBounds {
    pub lower: f64,
    pub upper: f64,
    pub k: usize,
}

impl LeakageBounds {
    /// Bounds divided by `k`; zero when there is no message.
    pub fn normalized(&self) -> (f64, f64) {
        if self.k == 0 {
            (0.0, 0.0)
        } else {
            let k = self.k as f64;
            (self.lower / k, self.upper / k)
        }
    }
}

/// The two rearranged bound expressions in terms of the wiretap capacity,
/// before clamping to `[0, k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryBounds {
    /// `n (C - r/n) - sum_B C_i`
    pub lower: f64,
    /// `n (C - r/n) + sum_R (1 - C_l)`
    pub upper: f64,
    pub k: usize,
}

impl CorollaryBounds {
    pub fn clamped(&self) -> LeakageBounds {
        let upper = self.upper.min(self.k as f64);
        let lower = self.lower.max(0.0).min(upper);
        LeakageBounds {
            lower,
            upper,
            k: self.k,
        }
    }
}

/// Monte Carlo leakage estimate in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

fn check_n(p: &SecrecyPartition, table: &BitChannelTable) -> Result<()> {
    if p.n() != table.n() {
        return Err(invalid(format!(
            "partition has n = {}, table has n = {}",
            p.n(),
            table.n()
        )));
    }
    Ok(())
}

/// `min(sum_{i not in R} C_i, k)`.
pub fn leakage_upper_bound(p: &SecrecyPartition, wiretap: &BitChannelTable) -> Result<f64> {
    check_n(p, wiretap)?;
    Ok(capacity_sum(wiretap, &p.non_random())?.min(p.k() as f64))
}

/// Unclamped `sum_A C_i + sum_R C_j - r`.
pub fn lower_bound_expression(p: &SecrecyPartition, wiretap: &BitChannelTable) -> Result<f64> {
    check_n(p, wiretap)?;
    Ok(capacity_sum(wiretap, p.message())? + capacity_sum(wiretap, p.random())? - p.r() as f64)
}

/// `max(sum_A C_i + sum_R C_j - r, 0)`; assumes a uniform message.
pub fn leakage_lower_bound(p: &SecrecyPartition, wiretap: &BitChannelTable) -> Result<f64> {
    Ok(lower_bound_expression(p, wiretap)?.max(0.0))
}

pub fn leakage_bounds(p: &SecrecyPartition, wiretap: &BitChannelTable) -> Result<LeakageBounds> {
    Ok(LeakageBounds {
        lower: leakage_lower_bound(p, wiretap)?,
        upper: leakage_upper_bound(p, wiretap)?,
        k: p.k(),
    })
}

/// Bounds rewritten around the gap `C - r/n` of the random-bit code.
///
/// `capacity` must agree with the table: the bit-channel capacities have to
/// sum to `n * capacity` within `1e-6`.
pub fn corollary_bounds(
    p: &SecrecyPartition,
    wiretap: &BitChannelTable,
    capacity: f64,
) -> Result<CorollaryBounds> {
    check_n(p, wiretap)?;
    let n = p.n() as f64;
    let total = wiretap.total_capacity();
    if (total - n * capacity).abs() > 1e-6 {
        return Err(Error::InconsistentTable(format!(
            "bit-channel capacities sum to {total}, expected n*C = {}",
            n * capacity
        )));
    }
    let gap_term = n * (capacity - p.r() as f64 / n);
    let frozen_cap = capacity_sum(wiretap, p.frozen())?;
    let random_erasure: f64 = p.random().iter().map(|&i| wiretap.erasure(i)).sum();
    Ok(CorollaryBounds {
        lower: gap_term - frozen_cap,
        upper: gap_term + random_erasure,
        k: p.k(),
    })
}

/// Column view of the generator restricted to `A ∪ R`, ready for
/// per-pattern leakage evaluation.
#[derive(Debug, Clone)]
pub struct LeakageModel {
    n: usize,
    k: usize,
    /// Column `j` of `G~` as a vector in GF(2)^(k+r).
    columns: Vec<BitVector>,
    /// Coordinate basis of the message rows inside GF(2)^(k+r).
    message_basis: BitMatrix,
}

impl LeakageModel {
    pub fn new(p: &SecrecyPartition) -> Self {
        let active = p.active();
        let dim = active.len();
        // G^{⊗m}[i][j] = 1 iff the bits of j are a subset of the bits of i
        let columns = (0..p.n())
            .map(|j| {
                BitVector::from_bits(active.iter().map(|&i| i & j == j))
            })
            .collect();
        let message_rows: Vec<BitVector> = active
            .iter()
            .enumerate()
            .filter(|(_, i)| p.message().binary_search(i).is_ok())
            .map(|(t, _)| BitVector::unit(dim, t))
            .collect();
        let message_basis =
            BitMatrix::from_rows(dim, &message_rows).expect("unit rows have the ambient length");
        Self {
            n: p.n(),
            k: p.k(),
            columns,
            message_basis,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Leakage in bits for one pattern; `erased[j]` marks erased positions.
    pub fn pattern_leakage(&self, erased: &[bool]) -> usize {
        debug_assert_eq!(erased.len(), self.n);
        if self.k == 0 {
            return 0;
        }
        let dim = self.message_basis.cols();
        let mut span = BitMatrix::zeros(0, dim);
        for (col, _) in self.columns.iter().zip(erased).filter(|(_, &e)| !e) {
            span.push_row(col).expect("columns have the ambient length");
        }
        intersection_dim(&span, &self.message_basis).expect("same ambient dimension")
    }
}

fn pattern_probability(erasure: f64, n: usize, erased: usize) -> f64 {
    erasure.powi(erased as i32) * (1.0 - erasure).powi((n - erased) as i32)
}

/// Exact `I(U; Z)` in bits, summing the per-pattern leakage over all `2^n`
/// erasure patterns.
pub fn exact_leakage_enumeration(p: &SecrecyPartition, wiretap: BecParam) -> Result<f64> {
    let n = p.n();
    if n > MAX_EXACT_N {
        return Err(Error::TooLarge(format!(
            "exact enumeration needs n <= {MAX_EXACT_N}, got {n}"
        )));
    }
    let model = LeakageModel::new(p);
    let e = wiretap.erasure();
    let mut total = 0.0;
    let mut erased = vec![false; n];
    for mask in 0u32..(1u32 << n) {
        let count = mask.count_ones() as usize;
        let prob = pattern_probability(e, n, count);
        if prob == 0.0 {
            continue;
        }
        for (j, slot) in erased.iter_mut().enumerate() {
            *slot = mask >> j & 1 == 1;
        }
        total += prob * model.pattern_leakage(&erased) as f64;
    }
    Ok(total)
}

/// Per-trial generator: a fixed-key ChaCha stream selected by the trial
/// index, so results do not depend on how trials are scheduled.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Monte Carlo estimate of `I(U; Z)` over i.i.d. wiretap erasure patterns.
///
/// Trials run in parallel on the current rayon pool; the result is
/// bit-identical for a given `(seed, trials)` regardless of thread count.
pub fn mc_leakage(
    p: &SecrecyPartition,
    wiretap: BecParam,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    let model = LeakageModel::new(p);
    let n = p.n();
    let e = wiretap.erasure();
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![false; n],
            |erased, t| {
                let mut rng = trial_rng(seed, t);
                for slot in erased.iter_mut() {
                    *slot = rng.gen::<f64>() < e;
                }
                let d = model.pattern_leakage(erased) as u64;
                (d, d * d)
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    // integer sums keep the result independent of reduction order
    let t = trials as f64;
    let mean = sum as f64 / t;
    let stderr = if trials > 1 {
        let var = (sum_sq as f64 - t * mean * mean) / (t - 1.0);
        (var.max(0.0) / t).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr,
        trials,
        seed,
    })
}

/// Explicit Kronecker power as 0/1 rows, built by repeated block products.
fn naive_generator(n: usize) -> Vec<Vec<u8>> {
    let mut g = vec![vec![1u8]];
    while g.len() < n {
        let h = g.len();
        let mut next = vec![vec![0u8; 2 * h]; 2 * h];
        for i in 0..h {
            for j in 0..h {
                next[i][j] = g[i][j];
                next[h + i][j] = g[i][j];
                next[h + i][h + j] = g[i][j];
            }
        }
        g = next;
    }
    g
}

/// Codeword bits of `v G` packed into an integer (bit `j` = position `j`).
fn naive_encode(g: &[Vec<u8>], v: &[u8]) -> u32 {
    let n = g.len();
    let mut x = 0u32;
    for j in 0..n {
        let bit = (0..n).fold(0u8, |acc, i| acc ^ (v[i] & g[i][j]));
        x |= u32::from(bit) << j;
    }
    x
}

/// Shannon entropy in bits of an empirical distribution given by counts.
fn entropy<'a, I>(counts: I, total: f64) -> f64
where
    I: IntoIterator<Item = &'a u64>,
{
    counts
        .into_iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

fn check_brute_force_size(n: usize) -> Result<()> {
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::TooLarge(format!(
            "brute-force enumeration needs n <= {MAX_BRUTE_FORCE_N}, got {n}"
        )));
    }
    Ok(())
}

/// `I(U; Z)` in bits from the full joint distribution of a uniform message,
/// uniform random bits and the wiretap erasures.
pub fn brute_force_mi(p: &SecrecyPartition, wiretap: BecParam) -> Result<f64> {
    let n = p.n();
    check_brute_force_size(n)?;
    let (k, r) = (p.k(), p.r());
    if k == 0 {
        return Ok(0.0);
    }
    let g = naive_generator(n);

    // codeword for every (u, e), indexed by u << r | e
    let mut codewords = Vec::with_capacity(1 << (k + r));
    for u in 0u32..(1 << k) {
        for e in 0u32..(1 << r) {
            let mut v = vec![0u8; n];
            for (t, &i) in p.message().iter().enumerate() {
                v[i] = (u >> t & 1) as u8;
            }
            for (t, &i) in p.random().iter().enumerate() {
                v[i] = (e >> t & 1) as u8;
            }
            codewords.push(naive_encode(&g, &v));
        }
    }

    let eps = wiretap.erasure();
    let total = (1u64 << (k + r)) as f64;
    let mut mi = 0.0;
    for unerased in 0u32..(1 << n) {
        let erased = n - unerased.count_ones() as usize;
        let prob = pattern_probability(eps, n, erased);
        if prob == 0.0 {
            continue;
        }
        // Z is the pattern plus the unerased bits; the pattern is fixed here
        let mut joint: HashMap<(u32, u32), u64> = HashMap::new();
        let mut z_marginal: HashMap<u32, u64> = HashMap::new();
        for (idx, &x) in codewords.iter().enumerate() {
            let u = (idx >> r) as u32;
            let z = x & unerased;
            *joint.entry((u, z)).or_default() += 1;
            *z_marginal.entry(z).or_default() += 1;
        }
        let h_u = k as f64;
        let h_z = entropy(z_marginal.values(), total);
        let h_uz = entropy(joint.values(), total);
        mi += prob * (h_u + h_z - h_uz);
    }
    Ok(mi)
}

/// Both sides of `I(V_D; Z | V_{D^c}) >= sum_{i in D} C_i` for the raw
/// polarization transform with uniform input over BEC(`wiretap`).
///
/// The left side is computed by enumeration; the right side from the
/// evolved bit-channel table.
pub fn conditional_mi_check(d: &[usize], wiretap: BecParam, n: usize) -> Result<(f64, f64)> {
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(format!("block length {n} is not a power of two")));
    }
    check_brute_force_size(n)?;
    if let Some(&i) = d.iter().find(|&&i| i >= n) {
        return Err(invalid(format!("index {i} out of range for n = {n}")));
    }
    let d_mask: u32 = d.iter().fold(0, |acc, &i| acc | 1 << i);
    let g = naive_generator(n);
    let codewords: Vec<u32> = (0u32..(1 << n))
        .map(|v| {
            let bits: Vec<u8> = (0..n).map(|i| (v >> i & 1) as u8).collect();
            naive_encode(&g, &bits)
        })
        .collect();

    let eps = wiretap.erasure();
    let total = (1u64 << n) as f64;
    let mut lhs = 0.0;
    for unerased in 0u32..(1 << n) {
        let erased = n - unerased.count_ones() as usize;
        let prob = pattern_probability(eps, n, erased);
        if prob == 0.0 {
            continue;
        }
        // I(X; Z | Y) = H(X,Y) + H(Y,Z) - H(X,Y,Z) - H(Y) with X = V_D, Y = V_{D^c}
        let mut xy: HashMap<u32, u64> = HashMap::new();
        let mut y: HashMap<u32, u64> = HashMap::new();
        let mut yz: HashMap<(u32, u32), u64> = HashMap::new();
        let mut xyz: HashMap<(u32, u32), u64> = HashMap::new();
        for (v, &x) in codewords.iter().enumerate() {
            let v = v as u32;
            let z = x & unerased;
            let yv = v & !d_mask;
            *xy.entry(v).or_default() += 1;
            *y.entry(yv).or_default() += 1;
            *yz.entry((yv, z)).or_default() += 1;
            *xyz.entry((v, z)).or_default() += 1;
        }
        let info = entropy(xy.values(), total) + entropy(yz.values(), total)
            - entropy(xyz.values(), total)
            - entropy(y.values(), total);
        lhs += prob * info;
    }

    let m = n.trailing_zeros();
    let table = evolve(wiretap, m);
    let rhs = capacity_sum(&table, d)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bec::evolve;
    use rand::seq::SliceRandom;

    fn bec(e: f64) -> BecParam {
        BecParam::new(e).unwrap()
    }

    fn random_partition(rng: &mut impl Rng, n: usize) -> SecrecyPartition {
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let a: Vec<usize> = (0..n).filter(|&i| labels[i] == 0).collect();
        let r: Vec<usize> = (0..n).filter(|&i| labels[i] == 1).collect();
        SecrecyPartition::new(n, &a, &r).unwrap()
    }

    #[test]
    fn upper_bound_examples() {
        let t = evolve(bec(0.4), 3);
        let all: Vec<usize> = (0..8).collect();
        let p = SecrecyPartition::new(8, &[], &all).unwrap();
        assert_eq!(leakage_upper_bound(&p, &t).unwrap(), 0.0);
        let p = SecrecyPartition::new(8, &[7, 6, 5, 3, 2, 1, 0], &[]).unwrap();
        let expected = (8.0 * 0.6f64).min(7.0);
        assert!((leakage_upper_bound(&p, &t).unwrap() - expected).abs() < 1e-12);
        let p = SecrecyPartition::new(8, &[7], &[]).unwrap();
        assert_eq!(leakage_upper_bound(&p, &t).unwrap(), 1.0);
    }

    #[test]
    fn bounds_from_m3_table() {
        // n = 8, BEC(0.5): per-index erasures follow from one more level on
        // [0.9375, 0.5625, 0.4375, 0.0625]
        let t = evolve(bec(0.5), 3);
        let expected = [
            0.99609375, 0.87890625, 0.80859375, 0.31640625, 0.68359375, 0.19140625, 0.12109375,
            0.00390625,
        ];
        for (a, b) in t.erasures().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        // A = best 2 {7, 6}, R = next 2 {5, 3}, B = rest
        let p = SecrecyPartition::new(8, &[7, 6], &[5, 3]).unwrap();
        let c = |i: usize| 1.0 - expected[i];
        let ub = (c(7) + c(6) + c(0) + c(1) + c(2) + c(4)).min(2.0);
        let lb = (c(7) + c(6) + c(5) + c(3) - 2.0).max(0.0);
        assert!((leakage_upper_bound(&p, &t).unwrap() - ub).abs() < 1e-12);
        assert!((leakage_lower_bound(&p, &t).unwrap() - lb).abs() < 1e-12);
        assert!((lb - 1.3671875).abs() < 1e-12);
        assert_eq!(ub, 2.0);
    }

    #[test]
    fn lower_bound_examples() {
        let t = evolve(bec(0.3), 3);
        let all: Vec<usize> = (0..8).collect();
        let p = SecrecyPartition::new(8, &all, &[]).unwrap();
        assert!((leakage_lower_bound(&p, &t).unwrap() - 8.0 * 0.7).abs() < 1e-12);

        let perfect = evolve(bec(0.0), 3);
        let p = SecrecyPartition::new(8, &[7, 5], &[6, 3, 1]).unwrap();
        assert_eq!(leakage_lower_bound(&p, &perfect).unwrap(), 2.0);
    }

    #[test]
    fn capacity_form_matches_bound_expressions() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let t = evolve(bec(0.4), 6);
        for _ in 0..100 {
            let p = random_partition(&mut rng, 64);
            let cor = corollary_bounds(&p, &t, 0.6).unwrap();
            let lower = lower_bound_expression(&p, &t).unwrap();
            assert!((cor.lower - lower).abs() < 1e-12);
            let sum_form = capacity_sum(&t, &p.non_random()).unwrap();
            assert!((cor.upper - sum_form).abs() < 1e-9);
            let clamped = cor.clamped();
            let direct = leakage_bounds(&p, &t).unwrap();
            assert!((clamped.lower - direct.lower).abs() < 1e-9);
            assert!((clamped.upper - direct.upper).abs() < 1e-9);
        }
    }

    #[test]
    fn capacity_form_all_random() {
        let t = evolve(bec(0.25), 4);
        let all: Vec<usize> = (0..16).collect();
        let p = SecrecyPartition::new(16, &[], &all).unwrap();
        let cor = corollary_bounds(&p, &t, 0.75).unwrap();
        assert!((cor.lower - 16.0 * (0.75 - 1.0)).abs() < 1e-12);
        assert_eq!(cor.clamped().lower, 0.0);
    }

    #[test]
    fn corollary_rejects_inconsistent_capacity() {
        let t = evolve(bec(0.25), 4);
        let p = SecrecyPartition::new(16, &[15], &[14]).unwrap();
        assert!(matches!(
            corollary_bounds(&p, &t, 0.5),
            Err(Error::InconsistentTable(_))
        ));
    }

    #[test]
    fn exact_enumeration_edge_cases() {
        let p = SecrecyPartition::new(8, &[7, 6, 5], &[3, 4]).unwrap();
        assert_eq!(exact_leakage_enumeration(&p, bec(1.0)).unwrap(), 0.0);
        let p = SecrecyPartition::new(8, &[7, 6, 5], &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(exact_leakage_enumeration(&p, bec(0.0)).unwrap(), 3.0);
        let p = SecrecyPartition::new(32, &[31], &[]).unwrap();
        assert!(matches!(
            exact_leakage_enumeration(&p, bec(0.5)),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn exact_equals_brute_force_n4_example() {
        let p = SecrecyPartition::new(4, &[3], &[2]).unwrap();
        let exact = exact_leakage_enumeration(&p, bec(0.5)).unwrap();
        let brute = brute_force_mi(&p, bec(0.5)).unwrap();
        assert!((exact - brute).abs() < 1e-9);
        // x = (u+e, u, u+e, u): u is revealed iff x2 or x4 survives
        assert!((brute - 0.75).abs() < 1e-12);
    }

    #[test]
    fn brute_force_edge_cases() {
        let p = SecrecyPartition::new(4, &[], &[1, 2]).unwrap();
        assert_eq!(brute_force_mi(&p, bec(0.3)).unwrap(), 0.0);
        let p = SecrecyPartition::new(4, &[3], &[1, 2]).unwrap();
        assert!(brute_force_mi(&p, bec(1.0)).unwrap().abs() < 1e-12);
        let p = SecrecyPartition::new(16, &[15], &[]).unwrap();
        assert!(matches!(brute_force_mi(&p, bec(0.5)), Err(Error::TooLarge(_))));
    }

    #[test]
    fn per_index_capacity_matches_sequential_information() {
        // I(V_i; Z | V_{<i}) with V_{>i} uniform equals the bit-channel
        // capacity C_i; evaluate it as a leakage with A = {i}, R = {j > i}.
        for eps in [0.2, 0.5, 0.8] {
            for m in 1..=3u32 {
                let n = 1usize << m;
                let t = evolve(bec(eps), m);
                for i in 0..n {
                    let later: Vec<usize> = (i + 1..n).collect();
                    let p = SecrecyPartition::new(n, &[i], &later).unwrap();
                    let brute = brute_force_mi(&p, bec(eps)).unwrap();
                    assert!(
                        (brute - t.capacity(i)).abs() < 1e-12,
                        "eps={eps} n={n} i={i}: {brute} vs {}",
                        t.capacity(i)
                    );
                }
            }
        }
    }

    #[test]
    fn conditional_information_edge_cases() {
        let (lhs, rhs) = conditional_mi_check(&[], bec(0.4), 4).unwrap();
        assert!(lhs.abs() < 1e-12 && rhs.abs() < 1e-12);
        let all: Vec<usize> = (0..4).collect();
        let (lhs, rhs) = conditional_mi_check(&all, bec(0.4), 4).unwrap();
        assert!((lhs - 4.0 * 0.6).abs() < 1e-9);
        assert!((rhs - 4.0 * 0.6).abs() < 1e-9);
        assert!(conditional_mi_check(&[0], bec(0.4), 16).is_err());
        assert!(conditional_mi_check(&[4], bec(0.4), 4).is_err());
        assert!(conditional_mi_check(&[0], bec(0.4), 6).is_err());
    }

    #[test]
    fn conditional_information_small_n() {
        for n in [2usize, 4] {
            for eps in [0.1, 0.5, 0.9] {
                for mask in 0u32..(1 << n) {
                    let d: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                    let (lhs, rhs) = conditional_mi_check(&d, bec(eps), n).unwrap();
                    assert!(lhs >= rhs - 1e-9, "n={n} eps={eps} D={d:?}: {lhs} < {rhs}");
                }
            }
        }
    }

    #[test]
    fn exact_leakage_monotone_in_erasure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let p = random_partition(&mut rng, 8);
            let mut prev = f64::INFINITY;
            for step in 0..=10 {
                let l = exact_leakage_enumeration(&p, bec(step as f64 / 10.0)).unwrap();
                assert!(l <= prev + 1e-9);
                prev = l;
            }
        }
    }

    #[test]
    fn sandwich_all_n4_partitions() {
        for labels in 0u32..81 {
            let mut a = Vec::new();
            let mut r = Vec::new();
            let mut code = labels;
            for i in 0..4 {
                match code % 3 {
                    0 => a.push(i),
                    1 => r.push(i),
                    _ => {}
                }
                code /= 3;
            }
            let p = SecrecyPartition::new(4, &a, &r).unwrap();
            for eps in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
                let t = evolve(bec(eps), 2);
                let b = leakage_bounds(&p, &t).unwrap();
                let exact = exact_leakage_enumeration(&p, bec(eps)).unwrap();
                let brute = brute_force_mi(&p, bec(eps)).unwrap();
                assert!((exact - brute).abs() < 1e-9);
                assert!(b.lower <= exact + 1e-9 && exact <= b.upper + 1e-9);
            }
        }
    }

    #[test]
    fn mc_noiseless_single_trial() {
        let p = SecrecyPartition::new(8, &[7, 6, 5], &[3, 4]).unwrap();
        let est = mc_leakage(&p, bec(0.0), 1, 42).unwrap();
        assert_eq!(est.mean, exact_leakage_enumeration(&p, bec(0.0)).unwrap());
        assert_eq!(est.stderr, 0.0);
        assert!(mc_leakage(&p, bec(0.0), 0, 42).is_err());
    }

    #[test]
    fn mc_close_to_exact_n8() {
        let p = SecrecyPartition::new(8, &[7, 6], &[5, 3]).unwrap();
        let exact = exact_leakage_enumeration(&p, bec(0.5)).unwrap();
        let est = mc_leakage(&p, bec(0.5), 10_000, 7).unwrap();
        assert!((est.mean - exact).abs() <= 3.0 * est.stderr);
    }

    #[test]
    fn mc_independent_of_thread_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut idx: Vec<usize> = (0..64).collect();
        idx.shuffle(&mut rng);
        let p = SecrecyPartition::new(64, &idx[..10], &idx[10..40]).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_leakage(&p, bec(0.45), 3000, 123).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.mean.to_bits(), four.mean.to_bits());
        assert_eq!(one.stderr.to_bits(), four.stderr.to_bits());
    }
}
