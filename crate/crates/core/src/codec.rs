//! Polar encoding and successive-cancellation decoding over erasure channels.

use rand::Rng;

use crate::bec::{erasure_sum, BitChannelTable};
use crate::error::{invalid, Result};
use crate::gf2::{polar_transform, BitVector};

/// One received symbol of an erasure channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Zero,
    One,
    Erased,
}

impl Symbol {
    fn from_bit(b: bool) -> Self {
        if b {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn bit(self) -> Option<bool> {
        match self {
            Symbol::Zero => Some(false),
            Symbol::One => Some(true),
            Symbol::Erased => None,
        }
    }
}

/// The set of erased codeword positions in one channel use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasurePattern {
    erased: Vec<bool>,
}

impl ErasurePattern {
    pub fn none(n: usize) -> Self {
        Self {
            erased: vec![false; n],
        }
    }

    pub fn all(n: usize) -> Self {
        Self {
            erased: vec![true; n],
        }
    }

    pub fn from_mask(erased: Vec<bool>) -> Self {
        Self { erased }
    }

    /// Pattern with the listed positions erased.
    pub fn from_indices(n: usize, erased: &[usize]) -> Result<Self> {
        let mut mask = vec![false; n];
        for &i in erased {
            if i >= n {
                return Err(invalid(format!("erased index {i} out of range for n = {n}")));
            }
            mask[i] = true;
        }
        Ok(Self { erased: mask })
    }

    /// I.i.d. erasures with probability `erasure` per position.
    pub fn sample<R: Rng + ?Sized>(n: usize, erasure: f64, rng: &mut R) -> Self {
        Self {
            erased: (0..n).map(|_| rng.gen::<f64>() < erasure).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.erased.len()
    }

    pub fn is_erased(&self, index: usize) -> bool {
        self.erased[index]
    }

    pub fn mask(&self) -> &[bool] {
        &self.erased
    }

    pub fn erased_count(&self) -> usize {
        self.erased.iter().filter(|&&e| e).count()
    }

    pub fn unerased(&self) -> impl Iterator<Item = usize> + '_ {
        self.erased
            .iter()
            .enumerate()
            .filter(|(_, &e)| !e)
            .map(|(i, _)| i)
    }
}

/// What a receiver sees: the codeword with some positions erased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelOutput {
    symbols: Vec<Symbol>,
}

impl ChannelOutput {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self { symbols }
    }

    /// Passes `codeword` through the erasure pattern.
    pub fn observe(codeword: &BitVector, pattern: &ErasurePattern) -> Result<Self> {
        if codeword.len() != pattern.n() {
            return Err(invalid(format!(
                "codeword length {} does not match pattern length {}",
                codeword.len(),
                pattern.n()
            )));
        }
        let symbols = codeword
            .iter()
            .zip(pattern.mask())
            .map(|(b, &e)| if e { Symbol::Erased } else { Symbol::from_bit(b) })
            .collect();
        Ok(Self { symbols })
    }

    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }
}

/// Polar encoder: `x = v G^{⊗m}`.
pub fn encode(v: &BitVector) -> Result<BitVector> {
    polar_transform(v)
}

/// Result of successive-cancellation erasure decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScOutcome {
    /// Every input bit was determined.
    Decoded(BitVector),
    /// The decision for this (0-based) non-frozen input index was an erasure.
    Failed { index: usize },
}

impl ScOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, ScOutcome::Decoded(_))
    }
}

// Symbols inside the decoder: 0, 1 or ERASED.
const ERASED: u8 = 2;

#[inline]
fn combine_check(a: u8, b: u8) -> u8 {
    if a == ERASED || b == ERASED {
        ERASED
    } else {
        a ^ b
    }
}

#[inline]
fn combine_repeat(a: u8, b: u8) -> u8 {
    if a != ERASED {
        a
    } else {
        b
    }
}

/// Recursive SC over `y`; `v` and `x` receive the decided inputs and their
/// re-encoding. Returns the offset of the first failed decision, if any.
fn sc_recurse(y: &[u8], frozen: &[Option<u8>], v: &mut [u8], x: &mut [u8]) -> Option<usize> {
    let n = y.len();
    if n == 1 {
        let bit = match frozen[0] {
            Some(b) => b,
            None if y[0] == ERASED => return Some(0),
            None => y[0],
        };
        v[0] = bit;
        x[0] = bit;
        return None;
    }
    let h = n / 2;
    let (y1, y2) = y.split_at(h);

    // first half of v sees y1 + y2
    let upper: Vec<u8> = y1.iter().zip(y2).map(|(&a, &b)| combine_check(a, b)).collect();
    let (v_lo, v_hi) = v.split_at_mut(h);
    let (x_lo, x_hi) = x.split_at_mut(h);
    if let Some(i) = sc_recurse(&upper, &frozen[..h], v_lo, x_lo) {
        return Some(i);
    }

    // second half sees y2 and y1 + (re-encoded first half)
    let lower: Vec<u8> = y1
        .iter()
        .zip(y2)
        .zip(x_lo.iter())
        .map(|((&a, &b), &c)| combine_repeat(combine_check(a, c), b))
        .collect();
    if let Some(i) = sc_recurse(&lower, &frozen[h..], v_hi, x_hi) {
        return Some(h + i);
    }
    for (a, b) in x_lo.iter_mut().zip(x_hi.iter()) {
        *a ^= b;
    }
    None
}

/// Successive-cancellation decoding over an erasure channel.
///
/// `frozen` lists the frozen input indices (0-based, any order) and
/// `frozen_values` carries one bit per entry of `frozen`, in the same order.
pub fn sc_decode_erasure(
    y: &ChannelOutput,
    frozen: &[usize],
    frozen_values: &BitVector,
) -> Result<ScOutcome> {
    let n = y.n();
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(format!("block length {n} is not a power of two")));
    }
    if frozen_values.len() != frozen.len() {
        return Err(invalid(format!(
            "{} frozen values for {} frozen indices",
            frozen_values.len(),
            frozen.len()
        )));
    }
    let mut frozen_map: Vec<Option<u8>> = vec![None; n];
    for (k, &i) in frozen.iter().enumerate() {
        if i >= n {
            return Err(invalid(format!("frozen index {i} out of range for n = {n}")));
        }
        if frozen_map[i].is_some() {
            return Err(invalid(format!("frozen index {i} listed twice")));
        }
        frozen_map[i] = Some(u8::from(frozen_values.get(k)));
    }
    let symbols: Vec<u8> = y
        .symbols()
        .iter()
        .map(|s| match s {
            Symbol::Zero => 0,
            Symbol::One => 1,
            Symbol::Erased => ERASED,
        })
        .collect();
    let mut v = vec![0u8; n];
    let mut x = vec![0u8; n];
    Ok(match sc_recurse(&symbols, &frozen_map, &mut v, &mut x) {
        Some(index) => ScOutcome::Failed { index },
        None => ScOutcome::Decoded(BitVector::from_u8s(&v)),
    })
}

/// Union bound on block error probability: sum of bit-channel erasures over
/// the active (non-frozen) set.
pub fn union_bound_pe(table: &BitChannelTable, active: &[usize]) -> Result<f64> {
    erasure_sum(table, active)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bec::{evolve, BecParam};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut impl Rng, n: usize) -> BitVector {
        BitVector::from_bits((0..n).map(|_| rng.gen::<bool>()))
    }

    fn complement(n: usize, set: &[usize]) -> Vec<usize> {
        (0..n).filter(|i| !set.contains(i)).collect()
    }

    #[test]
    fn encode_examples() {
        assert!(encode(&BitVector::zeros(8)).unwrap().is_zero());
        let x = encode(&BitVector::from_u8s(&[1, 0, 0, 0])).unwrap();
        assert_eq!(x.to_u8s(), vec![1, 0, 0, 0]);
        let v = BitVector::from_u8s(&[1, 0, 1, 1, 0, 0, 1, 0]);
        assert_eq!(encode(&encode(&v).unwrap()).unwrap(), v);
    }

    #[test]
    fn noiseless_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [8usize, 64, 256] {
            for _ in 0..1000 {
                let v = random_bits(&mut rng, n);
                let y = ChannelOutput::observe(&encode(&v).unwrap(), &ErasurePattern::none(n))
                    .unwrap();
                let out = sc_decode_erasure(&y, &[], &BitVector::zeros(0)).unwrap();
                assert_eq!(out, ScOutcome::Decoded(v));
            }
        }
    }

    #[test]
    fn all_erased_fails_at_first_information_index() {
        let n = 16;
        let frozen = vec![0, 1, 2, 4];
        let y = ChannelOutput::observe(&BitVector::zeros(n), &ErasurePattern::all(n)).unwrap();
        let out = sc_decode_erasure(&y, &frozen, &BitVector::zeros(4)).unwrap();
        assert_eq!(out, ScOutcome::Failed { index: 3 });
    }

    #[test]
    fn all_frozen_always_decodes() {
        let n = 8;
        let frozen: Vec<usize> = (0..n).collect();
        let vals = BitVector::from_u8s(&[1, 0, 1, 1, 0, 1, 0, 0]);
        let y = ChannelOutput::observe(&BitVector::zeros(n), &ErasurePattern::all(n)).unwrap();
        assert_eq!(
            sc_decode_erasure(&y, &frozen, &vals).unwrap(),
            ScOutcome::Decoded(vals)
        );
    }

    #[test]
    fn input_validation() {
        let y = ChannelOutput::new(vec![Symbol::Zero; 6]);
        assert!(sc_decode_erasure(&y, &[], &BitVector::zeros(0)).is_err());
        let y = ChannelOutput::new(vec![Symbol::Zero; 8]);
        assert!(sc_decode_erasure(&y, &[0, 1], &BitVector::zeros(1)).is_err());
        assert!(sc_decode_erasure(&y, &[9], &BitVector::zeros(1)).is_err());
        assert!(sc_decode_erasure(&y, &[1, 1], &BitVector::zeros(2)).is_err());
        assert!(ChannelOutput::observe(&BitVector::zeros(4), &ErasurePattern::none(8)).is_err());
    }

    /// All inputs `v` consistent with the frozen bits and the unerased
    /// positions, found by enumerating the whole codebook.
    fn consistent_inputs(
        n: usize,
        frozen: &[usize],
        y: &ChannelOutput,
    ) -> Vec<BitVector> {
        let free = complement(n, frozen);
        let mut out = Vec::new();
        for mask in 0u32..(1 << free.len()) {
            let mut v = BitVector::zeros(n);
            for (k, &i) in free.iter().enumerate() {
                v.set(i, mask >> k & 1 == 1);
            }
            let x = encode(&v).unwrap();
            let ok = y
                .symbols()
                .iter()
                .zip(x.iter())
                .all(|(s, b)| s.bit().is_none_or(|sb| sb == b));
            if ok {
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn matches_codebook_elimination_n8() {
        let n = 8;
        let table = evolve(BecParam::new(0.5).unwrap(), 3);
        let order = table.reliability_order();
        let mut frozen: Vec<usize> = order[4..].to_vec();
        frozen.sort_unstable();
        let mut rng = ChaCha8Rng::seed_from_u64(8);

        // erasing positions {1, 2} (1-based) leaves a unique consistent input
        let pattern = ErasurePattern::from_indices(n, &[0, 1]).unwrap();
        for _ in 0..32 {
            let mut v = random_bits(&mut rng, n);
            for &i in &frozen {
                v.set(i, false);
            }
            let y = ChannelOutput::observe(&encode(&v).unwrap(), &pattern).unwrap();
            let candidates = consistent_inputs(n, &frozen, &y);
            assert_eq!(candidates.len(), 1);
            let out = sc_decode_erasure(&y, &frozen, &BitVector::zeros(4)).unwrap();
            assert_eq!(out, ScOutcome::Decoded(candidates[0].clone()));
        }

        // every pattern: SC success implies a unique consistent input equal to v
        for mask in 0u32..256 {
            let pattern = ErasurePattern::from_mask((0..n).map(|i| mask >> i & 1 == 1).collect());
            let mut v = random_bits(&mut rng, n);
            for &i in &frozen {
                v.set(i, false);
            }
            let y = ChannelOutput::observe(&encode(&v).unwrap(), &pattern).unwrap();
            let candidates = consistent_inputs(n, &frozen, &y);
            match sc_decode_erasure(&y, &frozen, &BitVector::zeros(4)).unwrap() {
                ScOutcome::Decoded(d) => {
                    assert_eq!(candidates, vec![d.clone()]);
                    assert_eq!(d, v);
                }
                ScOutcome::Failed { index } => assert!(!frozen.contains(&index)),
            }
        }
    }

    #[test]
    fn failure_probability_per_index_matches_table() {
        // With only index i unfrozen past a fully-known prefix, the SC decision at
        // i is erased with probability e_i; check by enumerating all patterns.
        let e = 0.3;
        let m = 3;
        let n = 1usize << m;
        let table = evolve(BecParam::new(e).unwrap(), m);
        for i in 0..n {
            let frozen: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let mut p_fail = 0.0;
            for mask in 0u32..(1 << n) {
                let erased = mask.count_ones() as i32;
                let prob = e.powi(erased) * (1.0 - e).powi(n as i32 - erased);
                let pattern =
                    ErasurePattern::from_mask((0..n).map(|j| mask >> j & 1 == 1).collect());
                let y = ChannelOutput::observe(&BitVector::zeros(n), &pattern).unwrap();
                let out = sc_decode_erasure(&y, &frozen, &BitVector::zeros(n - 1)).unwrap();
                if !out.is_success() {
                    p_fail += prob;
                }
            }
            assert!((p_fail - table.erasure(i)).abs() < 1e-12, "index {i}");
        }
    }

    #[test]
    fn union_bound_examples() {
        let table = evolve(BecParam::new(0.5).unwrap(), 3);
        assert_eq!(union_bound_pe(&table, &[]).unwrap(), 0.0);

        let order = table.reliability_order();
        let best2 = &order[..2];
        let mut sorted = table.erasures().to_vec();
        sorted.sort_by(f64::total_cmp);
        // the best bit-channel at n = 8 is 0.5^8
        assert_eq!(sorted[0], 0.00390625);
        let ub = union_bound_pe(&table, best2).unwrap();
        assert!((ub - (sorted[0] + sorted[1])).abs() < 1e-15);

        let pe = 0.2;
        let good = table.good_set(pe / 8.0);
        assert!(union_bound_pe(&table, &good).unwrap() < pe);
    }

    #[test]
    fn sc_failure_rate_within_union_bound() {
        let n = 256;
        let e = 0.5;
        let table = evolve(BecParam::new(e).unwrap(), 8);
        let active = table.good_set(0.01 / n as f64);
        let frozen = complement(n, &active);
        let frozen_vals = BitVector::zeros(frozen.len());
        let bound = union_bound_pe(&table, &active).unwrap();
        let trials = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut failures = 0usize;
        for _ in 0..trials {
            let mut v = BitVector::zeros(n);
            for &i in &active {
                v.set(i, rng.gen());
            }
            let x = encode(&v).unwrap();
            let y = ChannelOutput::observe(&x, &ErasurePattern::sample(n, e, &mut rng)).unwrap();
            match sc_decode_erasure(&y, &frozen, &frozen_vals).unwrap() {
                ScOutcome::Decoded(d) => assert_eq!(d, v),
                ScOutcome::Failed { .. } => failures += 1,
            }
        }
        let rate = failures as f64 / trials as f64;
        let se = (bound * (1.0 - bound) / trials as f64).sqrt();
        assert!(rate <= bound + 3.0 * se, "rate {rate} bound {bound}");
    }
}
