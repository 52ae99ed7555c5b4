//! Binary erasure channels and exact bit-channel erasure evolution.
//!
//! Index convention: bit-channel `i` (0-based) is the channel seen by input
//! `v_i` of `x = v G^{⊗m}` in natural Kronecker order. With that ordering the
//! most significant bit of `i` selects the first combining step applied to
//! the raw channel and the least significant bit the last one.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A binary erasure channel, BEC(erasure).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BecParam {
    erasure: f64,
}

impl BecParam {
    pub fn new(erasure: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&erasure) {
            return Err(invalid(format!("erasure probability {erasure} not in [0, 1]")));
        }
        Ok(Self { erasure })
    }

    pub fn erasure(&self) -> f64 {
        self.erasure
    }

    pub fn capacity(&self) -> f64 {
        1.0 - self.erasure
    }

    /// For a BEC the Bhattacharyya parameter is the erasure probability.
    pub fn bhattacharyya(&self) -> f64 {
        self.erasure
    }
}

/// Per-index erasure probabilities of the `n` synthesized bit-channels.
#[derive(Debug, Clone, PartialEq)]
pub struct BitChannelTable {
    erasures: Vec<f64>,
}

impl BitChannelTable {
    /// Wraps raw erasure values; every entry must lie in [0, 1] and the
    /// length must be a power of two.
    pub fn from_erasures(erasures: Vec<f64>) -> Result<Self> {
        if erasures.is_empty() || !erasures.len().is_power_of_two() {
            return Err(invalid(format!(
                "table length {} is not a power of two",
                erasures.len()
            )));
        }
        if let Some((i, e)) = erasures
            .iter()
            .enumerate()
            .find(|(_, e)| !(0.0..=1.0).contains(*e))
        {
            return Err(invalid(format!("erasure {e} at index {i} not in [0, 1]")));
        }
        Ok(Self { erasures })
    }

    pub fn n(&self) -> usize {
        self.erasures.len()
    }

    pub fn erasures(&self) -> &[f64] {
        &self.erasures
    }

    pub fn erasure(&self, index: usize) -> f64 {
        self.erasures[index]
    }

    pub fn capacity(&self, index: usize) -> f64 {
        1.0 - self.erasures[index]
    }

    /// Sum of all bit-channel capacities; equals `n * C` for the source channel.
    pub fn total_capacity(&self) -> f64 {
        self.erasures.iter().map(|e| 1.0 - e).sum()
    }

    /// Bit-channels with erasure strictly below `threshold`, ascending.
    pub fn good_set(&self, threshold: f64) -> Vec<usize> {
        good_set(self, threshold)
    }

    /// Indices sorted from most to least reliable; ties keep index order.
    pub fn reliability_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| self.erasures[a].total_cmp(&self.erasures[b]).then(a.cmp(&b)));
        order
    }
}

/// Exact bit-channel erasure probabilities of BEC(`channel`) after `m` levels.
pub fn evolve(channel: BecParam, m: u32) -> BitChannelTable {
    let n = 1usize << m;
    let mut table = Vec::with_capacity(n);
    table.push(channel.erasure());
    let mut next = Vec::with_capacity(n);
    for _ in 0..m {
        next.clear();
        for &z in &table {
            next.push(2.0 * z - z * z);
            next.push(z * z);
        }
        std::mem::swap(&mut table, &mut next);
    }
    BitChannelTable { erasures: table }
}

/// `{ i : Z(W_i) < threshold }` with strict inequality.
pub fn good_set(table: &BitChannelTable, threshold: f64) -> Vec<usize> {
    table
        .erasures
        .iter()
        .enumerate()
        .filter(|(_, &e)| e < threshold)
        .map(|(i, _)| i)
        .collect()
}

/// Sum of bit-channel capacities over `indices`.
pub fn capacity_sum(table: &BitChannelTable, indices: &[usize]) -> Result<f64> {
    let n = table.n();
    let mut sum = 0.0;
    for &i in indices {
        if i >= n {
            return Err(invalid(format!("index {i} out of range for n = {n}")));
        }
        sum += 1.0 - table.erasures[i];
    }
    Ok(sum)
}

/// Sum of bit-channel erasure probabilities over `indices`.
pub fn erasure_sum(table: &BitChannelTable, indices: &[usize]) -> Result<f64> {
    let n = table.n();
    let mut sum = 0.0;
    for &i in indices {
        if i >= n {
            return Err(invalid(format!("index {i} out of range for n = {n}")));
        }
        sum += table.erasures[i];
    }
    Ok(sum)
}

/// True when the wiretap good set is contained in the main-channel good set.
pub fn check_degradation_nesting(
    main: &BitChannelTable,
    wiretap: &BitChannelTable,
    threshold: f64,
) -> Result<bool> {
    if main.n() != wiretap.n() {
        return Err(invalid(format!(
            "table sizes differ: {} vs {}",
            main.n(),
            wiretap.n()
        )));
    }
    let main_good = good_set(main, threshold);
    Ok(good_set(wiretap, threshold)
        .iter()
        .all(|i| main_good.binary_search(i).is_ok()))
}
