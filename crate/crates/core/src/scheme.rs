//! Polar secrecy codes: the (message, random, frozen) index partition, the
//! randomized encoder and the legitimate receiver's decoder.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bec::{evolve, good_set, BecParam, BitChannelTable};
use crate::codec::{sc_decode_erasure, ChannelOutput, ErasurePattern, ScOutcome};
use crate::error::{invalid, Error, Result};
use crate::gf2::{polar_transform, BitVector};
use crate::leakage::trial_rng;

/// Disjoint message (`A`), random (`R`) and frozen (`B`) index sets covering
/// `0..n`. Indices are 0-based and kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecrecyPartition {
    n: usize,
    message: Vec<usize>,
    random: Vec<usize>,
    frozen: Vec<usize>,
}

impl SecrecyPartition {
    /// Builds a partition from the message and random sets; every remaining
    /// index is frozen.
    pub fn new(n: usize, message: &[usize], random: &[usize]) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(invalid(format!("block length {n} is not a power of two")));
        }
        let mut seen = vec![false; n];
        for (name, set) in [("message", message), ("random", random)] {
            for &i in set {
                if i >= n {
                    return Err(invalid(format!("{name} index {i} out of range for n = {n}")));
                }
                if seen[i] {
                    return Err(invalid(format!("index {i} appears more than once")));
                }
                seen[i] = true;
            }
        }
        let mut message = message.to_vec();
        let mut random = random.to_vec();
        message.sort_unstable();
        random.sort_unstable();
        let frozen = (0..n).filter(|&i| !seen[i]).collect();
        Ok(Self {
            n,
            message,
            random,
            frozen,
        })
    }

    /// Builds a partition from all three sets and checks they cover `0..n`.
    pub fn from_sets(n: usize, message: &[usize], random: &[usize], frozen: &[usize]) -> Result<Self> {
        let p = Self::new(n, message, random)?;
        let mut b = frozen.to_vec();
        b.sort_unstable();
        if b != p.frozen {
            return Err(invalid("sets do not partition 0..n"));
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn message(&self) -> &[usize] {
        &self.message
    }

    pub fn random(&self) -> &[usize] {
        &self.random
    }

    pub fn frozen(&self) -> &[usize] {
        &self.frozen
    }

    pub fn k(&self) -> usize {
        self.message.len()
    }

    pub fn r(&self) -> usize {
        self.random.len()
    }

    /// `A ∪ R`, sorted.
    pub fn active(&self) -> Vec<usize> {
        let mut a: Vec<usize> = self.message.iter().chain(&self.random).copied().collect();
        a.sort_unstable();
        a
    }

    /// `A ∪ B` (the complement of `R`), sorted.
    pub fn non_random(&self) -> Vec<usize> {
        let mut a: Vec<usize> = self.message.iter().chain(&self.frozen).copied().collect();
        a.sort_unstable();
        a
    }

    /// Secrecy rate `k / n`.
    pub fn secrecy_rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    pub fn to_json(&self) -> PartitionJson {
        let one_based = |s: &[usize]| s.iter().map(|i| i + 1).collect();
        PartitionJson {
            n: self.n,
            a: one_based(&self.message),
            r: one_based(&self.random),
            b: one_based(&self.frozen),
        }
    }

    pub fn from_json(json: &PartitionJson) -> Result<Self> {
        let zero_based = |s: &[usize], name: &str| -> Result<Vec<usize>> {
            s.iter()
                .map(|&i| {
                    i.checked_sub(1)
                        .ok_or_else(|| invalid(format!("{name} contains index 0; indices are 1-based")))
                })
                .collect()
        };
        Self::from_sets(
            json.n,
            &zero_based(&json.a, "A")?,
            &zero_based(&json.r, "R")?,
            &zero_based(&json.b, "B")?,
        )
    }
}

/// Serialized partition: 1-based sorted index arrays.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "R")]
    pub r: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
}

/// Main channel, wiretap channel, block length and reliability target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WiretapConfig {
    pub main: BecParam,
    pub wiretap: BecParam,
    pub m: u32,
    pub target_pe: f64,
}

impl WiretapConfig {
    pub fn new(main: BecParam, wiretap: BecParam, m: u32, target_pe: f64) -> Result<Self> {
        if !(target_pe > 0.0 && target_pe < 1.0) {
            return Err(invalid(format!("target error probability {target_pe} not in (0, 1)")));
        }
        if m > 30 {
            return Err(invalid(format!("m = {m} is too large")));
        }
        Ok(Self {
            main,
            wiretap,
            m,
            target_pe,
        })
    }

    pub fn n(&self) -> usize {
        1usize << self.m
    }

    /// Whether the wiretap channel is at least as noisy as the main channel.
    pub fn is_degraded(&self) -> bool {
        self.wiretap.erasure() >= self.main.erasure()
    }

    /// `C(W*) - C(W)`; negative for non-degraded pairs.
    pub fn secrecy_capacity(&self) -> f64 {
        self.main.capacity() - self.wiretap.capacity()
    }

    /// Good-set threshold `P_e / n`.
    pub fn threshold(&self) -> f64 {
        self.target_pe / self.n() as f64
    }

    pub fn main_table(&self) -> BitChannelTable {
        evolve(self.main, self.m)
    }

    pub fn wiretap_table(&self) -> BitChannelTable {
        evolve(self.wiretap, self.m)
    }
}

fn partition_from_tables(
    n: usize,
    main: &BitChannelTable,
    wiretap: &BitChannelTable,
    threshold: f64,
) -> SecrecyPartition {
    let random = good_set(wiretap, threshold);
    let random_set: BTreeSet<usize> = random.iter().copied().collect();
    let message: Vec<usize> = good_set(main, threshold)
        .into_iter()
        .filter(|i| !random_set.contains(i))
        .collect();
    SecrecyPartition::new(n, &message, &random).expect("good sets are in range and disjoint")
}

/// `R = G(W, P_e/n)`, `A = G(W*, P_e/n) \ R`, `B` = the rest.
pub fn build_partition(cfg: &WiretapConfig) -> SecrecyPartition {
    partition_from_tables(cfg.n(), &cfg.main_table(), &cfg.wiretap_table(), cfg.threshold())
}

/// Number of random indices moved to the message set when operating above
/// secrecy capacity: `ceil(n^(1 - 1/delta))`.
pub fn above_capacity_shift(n: usize, delta: f64) -> usize {
    let exp = 1.0 - 1.0 / delta;
    let raw = (n as f64).powf(exp);
    // guard against powf landing a hair above an exact integer
    let rounded = raw.round();
    if (raw - rounded).abs() < 1e-9 * raw.max(1.0) {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

/// Moves the `ceil(n^(1-1/delta))` least reliable random indices (largest
/// wiretap erasure, smaller index first on ties) into the message set.
pub fn build_partition_above_capacity(cfg: &WiretapConfig, delta: f64) -> Result<SecrecyPartition> {
    if !(delta > 0.0) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    let wiretap = cfg.wiretap_table();
    let base = partition_from_tables(cfg.n(), &cfg.main_table(), &wiretap, cfg.threshold());
    let shift = above_capacity_shift(cfg.n(), delta);
    if base.r() < shift {
        return Err(Error::Infeasible(format!(
            "random set has {} indices but {} must be removed (n = {}, delta = {})",
            base.r(),
            shift,
            cfg.n(),
            delta
        )));
    }
    let mut by_erasure = base.random().to_vec();
    by_erasure.sort_by(|&a, &b| {
        wiretap
            .erasure(b)
            .total_cmp(&wiretap.erasure(a))
            .then(a.cmp(&b))
    });
    let moved = &by_erasure[..shift];
    let random: Vec<usize> = by_erasure[shift..].to_vec();
    let message: Vec<usize> = base.message().iter().chain(moved).copied().collect();
    SecrecyPartition::new(cfg.n(), &message, &random)
}

/// Fixed-size design: `R` is the `r` most reliable indices of the wiretap
/// design table, `A` the `k` most reliable of the remaining indices under the
/// main design table.
pub fn ranked_partition(
    main: &BitChannelTable,
    wiretap: &BitChannelTable,
    k: usize,
    r: usize,
) -> Result<SecrecyPartition> {
    let n = main.n();
    if wiretap.n() != n {
        return Err(invalid("design tables have different block lengths"));
    }
    if k + r > n {
        return Err(Error::Infeasible(format!("k + r = {} exceeds n = {n}", k + r)));
    }
    let random: Vec<usize> = wiretap.reliability_order()[..r].to_vec();
    let taken: BTreeSet<usize> = random.iter().copied().collect();
    let message: Vec<usize> = main
        .reliability_order()
        .into_iter()
        .filter(|i| !taken.contains(i))
        .take(k)
        .collect();
    SecrecyPartition::new(n, &message, &random)
}

/// Randomized secrecy encoder: `v_A = u`, `v_R = e`, `v_B = 0`, output `v G^{⊗m}`.
pub fn secrecy_encode(u: &BitVector, e: &BitVector, p: &SecrecyPartition) -> Result<BitVector> {
    if u.len() != p.k() {
        return Err(invalid(format!("message has {} bits, partition expects {}", u.len(), p.k())));
    }
    if e.len() != p.r() {
        return Err(invalid(format!(
            "random vector has {} bits, partition expects {}",
            e.len(),
            p.r()
        )));
    }
    let mut v = BitVector::zeros(p.n());
    for (j, &i) in p.message().iter().enumerate() {
        v.set(i, u.get(j));
    }
    for (j, &i) in p.random().iter().enumerate() {
        v.set(i, e.get(j));
    }
    polar_transform(&v)
}

/// Uniform random bits for the random set.
pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitVector {
    BitVector::from_bits((0..len).map(|_| rng.gen::<bool>()))
}

/// Outcome of the legitimate receiver's decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BobOutcome {
    Message(BitVector),
    Failed { index: usize },
}

/// SC-decodes `A ∪ R` with `B` frozen to zero and keeps only the message bits.
pub fn bob_decode(y: &ChannelOutput, p: &SecrecyPartition) -> Result<BobOutcome> {
    if y.n() != p.n() {
        return Err(invalid(format!(
            "received {} symbols, partition has n = {}",
            y.n(),
            p.n()
        )));
    }
    let zeros = BitVector::zeros(p.frozen().len());
    Ok(match sc_decode_erasure(y, p.frozen(), &zeros)? {
        ScOutcome::Decoded(v) => {
            BobOutcome::Message(BitVector::from_bits(p.message().iter().map(|&i| v.get(i))))
        }
        ScOutcome::Failed { index } => BobOutcome::Failed { index },
    })
}

/// Block error rate of the legitimate receiver over a main BEC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityEstimate {
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    /// Binomial standard error `sqrt(rate (1 - rate) / trials)`.
    pub stderr: f64,
    pub seed: u64,
}

/// Sends random messages with fresh random bits through `main` and counts
/// trials where Bob does not recover the message. Trial `t` draws from its
/// own seeded stream, so the count does not depend on the thread count.
pub fn simulate_bob(
    p: &SecrecyPartition,
    main: BecParam,
    trials: u64,
    seed: u64,
) -> Result<ReliabilityEstimate> {
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let mut rng = trial_rng(seed, t);
            let u = random_bits(p.k(), &mut rng);
            let e = random_bits(p.r(), &mut rng);
            let x = secrecy_encode(&u, &e, p)?;
            let pattern = ErasurePattern::sample(p.n(), main.erasure(), &mut rng);
            let y = ChannelOutput::observe(&x, &pattern)?;
            Ok(match bob_decode(&y, p)? {
                BobOutcome::Message(got) if got == u => 0,
                _ => 1,
            })
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let rate = failures as f64 / trials as f64;
    Ok(ReliabilityEstimate {
        trials,
        failures,
        rate,
        stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
        seed,
    })
}
