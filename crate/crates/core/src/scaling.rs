//! Finite-length scaling sweeps of polar secrecy codes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bec::{evolve, good_set, BecParam};
use crate::codec::union_bound_pe;
use crate::error::{invalid, Error, Result};
use crate::leakage::leakage_bounds;
use crate::scheme::{build_partition, build_partition_above_capacity, SecrecyPartition, WiretapConfig};

/// Values below this are dropped from power-law fits.
pub const FIT_FLOOR: f64 = 1e-12;

/// Largest exponent accepted by the sweeps (`n <= 2^22`).
pub const MAX_SWEEP_M: u32 = 22;

/// One sweep record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    /// `R_s = k / n`
    pub secrecy_rate: f64,
    /// `C_s - R_s`; negative when operating above secrecy capacity.
    pub capacity_gap: f64,
    pub leakage_lower_norm: f64,
    pub leakage_upper_norm: f64,
    /// Union bound on Bob's block error over `A ∪ R`.
    pub pe_bound: f64,
}

/// Which column of a sweep to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingField {
    /// `C_s - R_s`
    CapacityGap,
    /// `R_s - C_s`
    ExcessRate,
    LeakageUpperNorm,
    LeakageLowerNorm,
}

impl ScalingField {
    fn value(self, p: &ScalingPoint) -> f64 {
        match self {
            ScalingField::CapacityGap => p.capacity_gap,
            ScalingField::ExcessRate => -p.capacity_gap,
            ScalingField::LeakageUpperNorm => p.leakage_upper_norm,
            ScalingField::LeakageLowerNorm => p.leakage_lower_norm,
        }
    }
}

/// Fit of `value ≈ alpha * n^(-1/mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub mu: f64,
    pub alpha: f64,
    /// RMS residual in the log domain.
    pub residual: f64,
    pub points: usize,
}

impl ExponentFit {
    /// Slope of the fitted line in (log n, log value).
    pub fn slope(&self) -> f64 {
        -1.0 / self.mu
    }
}

fn point_for(cfg: &WiretapConfig, p: &SecrecyPartition) -> Result<ScalingPoint> {
    let wiretap = cfg.wiretap_table();
    let main = cfg.main_table();
    let (lower, upper) = leakage_bounds(p, &wiretap)?.normalized();
    Ok(ScalingPoint {
        n: p.n(),
        k: p.k(),
        r: p.r(),
        secrecy_rate: p.secrecy_rate(),
        capacity_gap: cfg.secrecy_capacity() - p.secrecy_rate(),
        leakage_lower_norm: lower,
        leakage_upper_norm: upper,
        pe_bound: union_bound_pe(&main, &p.active())?,
    })
}

fn check_m_list(m_list: &[u32]) -> Result<()> {
    if let Some(&m) = m_list.iter().find(|&&m| m > MAX_SWEEP_M) {
        return Err(invalid(format!("m = {m} exceeds the sweep limit {MAX_SWEEP_M}")));
    }
    Ok(())
}

fn run_sweep<F>(template: &WiretapConfig, m_list: &[u32], build: F) -> Result<Vec<ScalingPoint>>
where
    F: Fn(&WiretapConfig) -> Result<SecrecyPartition> + Sync,
{
    check_m_list(m_list)?;
    let mut points = m_list
        .par_iter()
        .map(|&m| {
            let cfg = WiretapConfig { m, ..*template };
            point_for(&cfg, &build(&cfg)?)
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by_key(|p| p.n);
    Ok(points)
}

/// Evaluates the good-set partition at every `n = 2^m` in `m_list`; the
/// template's own `m` is ignored. Output is sorted by `n`.
pub fn sweep(template: &WiretapConfig, m_list: &[u32]) -> Result<Vec<ScalingPoint>> {
    run_sweep(template, m_list, |cfg| Ok(build_partition(cfg)))
}

/// Like [`sweep`] but with `ceil(n^(1-1/delta))` random indices moved to the
/// message set.
pub fn above_capacity_sweep(
    template: &WiretapConfig,
    delta: f64,
    m_list: &[u32],
) -> Result<Vec<ScalingPoint>> {
    run_sweep(template, m_list, |cfg| build_partition_above_capacity(cfg, delta))
}

/// Gap to capacity `C - |G(W, P_e/n)| / n` of a plain polar code.
pub fn channel_capacity_gap(channel: BecParam, m: u32, target_pe: f64) -> f64 {
    let n = 1usize << m;
    let table = evolve(channel, m);
    let good = good_set(&table, target_pe / n as f64).len();
    channel.capacity() - good as f64 / n as f64
}

/// Least-squares fit of `log value = log alpha - (1/mu) log n`.
///
/// Values below [`FIT_FLOOR`] are skipped; non-positive values are rejected.
pub fn fit_power_law(samples: &[(usize, f64)]) -> Result<ExponentFit> {
    if let Some((n, v)) = samples.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::InvalidData(format!("non-positive value {v} at n = {n}")));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, v)| *v >= FIT_FLOOR)
        .map(|&(n, v)| ((n as f64).ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InvalidData(format!(
            "need at least 3 usable points, got {}",
            pts.len()
        )));
    }
    let count = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidData("all points share the same n".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::InvalidData(format!(
            "fitted slope {slope} is not decaying"
        )));
    }
    let intercept = mean_y - slope * mean_x;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum::<f64>()
        / count)
        .sqrt();
    Ok(ExponentFit {
        mu: -1.0 / slope,
        alpha: intercept.exp(),
        residual,
        points: pts.len(),
    })
}

/// Fits one column of a sweep against `n`.
pub fn fit_exponent(points: &[ScalingPoint], field: ScalingField) -> Result<ExponentFit> {
    let samples: Vec<(usize, f64)> = points.iter().map(|p| (p.n, field.value(p))).collect();
    fit_power_law(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bec(e: f64) -> BecParam {
        BecParam::new(e).unwrap()
    }

    fn synthetic(mu: f64, alpha: f64, ms: std::ops::RangeInclusive<u32>) -> Vec<ScalingPoint> {
        ms.map(|m| {
            let n = 1usize << m;
            ScalingPoint {
                n,
                k: 0,
                r: 0,
                secrecy_rate: 0.0,
                capacity_gap: alpha * (n as f64).powf(-1.0 / mu),
                leakage_lower_norm: 0.0,
                leakage_upper_norm: 0.0,
                pe_bound: 0.0,
            }
        })
        .collect()
    }

    #[test]
    fn equal_channels_have_zero_rate() {
        let cfg = WiretapConfig::new(bec(0.4), bec(0.4), 0, 1e-3).unwrap();
        let pts = sweep(&cfg, &[6, 8, 10]).unwrap();
        for p in pts {
            assert_eq!(p.secrecy_rate, 0.0);
            assert_eq!(p.capacity_gap, 0.0);
        }
    }

    #[test]
    fn sweep_is_sorted_and_budgeted() {
        let cfg = WiretapConfig::new(bec(0.3), bec(0.6), 0, 1e-3).unwrap();
        let pts = sweep(&cfg, &[12, 8, 10]).unwrap();
        assert_eq!(pts.iter().map(|p| p.n).collect::<Vec<_>>(), vec![256, 1024, 4096]);
        for p in &pts {
            assert!(p.pe_bound < 1e-3);
            assert!(p.leakage_lower_norm <= p.leakage_upper_norm);
            assert!(p.capacity_gap > 0.0);
        }
        assert!(sweep(&cfg, &[23]).is_err());
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = WiretapConfig::new(bec(0.25), bec(0.55), 0, 1e-2).unwrap();
        let a = sweep(&cfg, &[9, 11, 13]).unwrap();
        let b = sweep(&cfg, &[13, 9, 11]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fit_recovers_synthetic_model() {
        let fit = fit_exponent(&synthetic(3.627, 2.0, 8..=20), ScalingField::CapacityGap).unwrap();
        assert!((fit.mu - 3.627).abs() < 0.01);
        assert!((fit.alpha - 2.0).abs() < 0.05);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let pts = synthetic(3.0, 1.0, 10..=10);
        let twice = vec![pts[0], pts[0]];
        assert!(matches!(
            fit_exponent(&twice, ScalingField::CapacityGap),
            Err(Error::InvalidData(_))
        ));
        let same_n = vec![pts[0], pts[0], pts[0]];
        assert!(matches!(
            fit_exponent(&same_n, ScalingField::CapacityGap),
            Err(Error::InvalidData(_))
        ));
        assert!(fit_power_law(&[(8, 0.1), (16, -0.1), (32, 0.05)]).is_err());
        assert!(fit_power_law(&[(8, 0.1), (16, 0.2), (32, 0.4)]).is_err());
    }

    #[test]
    fn fit_skips_tiny_values() {
        let mut samples: Vec<(usize, f64)> =
            (8..=12).map(|m| (1usize << m, ((1u64 << m) as f64).powf(-0.25))).collect();
        samples.push((1 << 13, 1e-13));
        let fit = fit_power_law(&samples).unwrap();
        assert_eq!(fit.points, 5);
        assert!((fit.mu - 4.0).abs() < 1e-9);
    }

    #[test]
    fn above_capacity_gap_positive() {
        let cfg = WiretapConfig::new(bec(0.3), bec(0.6), 0, 1e-3).unwrap();
        let pts = above_capacity_sweep(&cfg, 5.0, &[12]).unwrap();
        assert!(-pts[0].capacity_gap > 0.0);
        assert!(matches!(
            above_capacity_sweep(&cfg, 5.0, &[4]),
            Err(Error::Infeasible(_))
        ));
    }

    proptest! {
        #[test]
        fn fit_recovers_any_power_law(mu in 2.0f64..8.0, alpha in 0.1f64..10.0) {
            let fit = fit_exponent(&synthetic(mu, alpha, 6..=18), ScalingField::CapacityGap).unwrap();
            prop_assert!((fit.mu - mu).abs() / mu < 0.01);
            prop_assert!((fit.alpha - alpha).abs() / alpha < 0.01);
        }
    }
}
