//! Critical values and their Monte Carlo calibration.
//!
//! The per-level critical value is `c(j) = cbar * sigma_n * 2^{j/2} *
//! sqrt(j)`; the pair value is `c(j) + c(j')`. The constant `cbar` is the
//! empirical quantile of the pure-noise statistic
//! `max_j sup_t |f_hat(t, j)| / (2^{j/2} sqrt(j))` at unit noise level.
//! The normalized estimator process is distribution-free in the signal and
//! the noise level, so one calibration serves every `(f, sigma_n)`.

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{Grid, GridFunction};
use crate::kernel::Kernel;
use crate::noise::{self, rng};

/// Contiguous dyadic level range `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelRange {
    pub lo: i32,
    pub hi: i32,
}

impl LevelRange {
    pub fn new(lo: i32, hi: i32) -> Result<LevelRange> {
        if lo < 1 || hi < lo {
            return Err(Error::InvalidParameter(format!(
                "level range needs 1 <= lo <= hi, got {lo}..{hi}"
            )));
        }
        Ok(LevelRange { lo, hi })
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.lo..=self.hi
    }

    pub fn contains(&self, j: i32) -> bool {
        self.lo <= j && j <= self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl std::fmt::Display for LevelRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// Calibrated critical-value rule for a level set.
#[derive(Debug, Clone, Copy)]
pub struct CriticalValueRule {
    cbar: f64,
    sigma_n: f64,
    levels: LevelRange,
}

impl CriticalValueRule {
    pub fn new(cbar: f64, sigma_n: f64, levels: LevelRange) -> Result<CriticalValueRule> {
        if !(cbar > 0.0) || !(sigma_n > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need cbar > 0 and sigma_n > 0, got {cbar}, {sigma_n}"
            )));
        }
        Ok(CriticalValueRule {
            cbar,
            sigma_n,
            levels,
        })
    }

    pub fn cbar(&self) -> f64 {
        self.cbar
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    pub fn levels(&self) -> LevelRange {
        self.levels
    }

    /// Same rule at a different noise level.
    pub fn with_sigma_n(&self, sigma_n: f64) -> Result<CriticalValueRule> {
        CriticalValueRule::new(self.cbar, sigma_n, self.levels)
    }

    /// `c(j) = cbar * sigma_n * 2^{j/2} * sqrt(j)`.
    pub fn critical_value(&self, j: i32) -> Result<f64> {
        if !self.levels.contains(j) {
            return Err(Error::LevelOutOfRange {
                j,
                lo: self.levels.lo,
                hi: self.levels.hi,
            });
        }
        Ok(self.cbar * self.sigma_n * (0.5 * j as f64).exp2() * (j as f64).sqrt())
    }

    /// `c(j) + c(j2)`.
    pub fn tilde_critical(&self, j: i32, j2: i32) -> Result<f64> {
        Ok(self.critical_value(j)? + self.critical_value(j2)?)
    }
}

/// Normalized pure-noise sup statistic for one replication.
fn noise_sup_statistic(
    kernel: &Kernel,
    levels: LevelRange,
    grid: &Grid,
    seed: u64,
) -> Result<f64> {
    let zero = GridFunction::zero(*grid);
    let obs = noise::synthesize(&zero, 1.0, 1.0, grid, seed)?;
    let mut stat = 0.0f64;
    for j in levels.iter() {
        let est = noise::kernel_estimate(&obs, kernel, j)?;
        let sup = est.sup_norm_on((0.0, 1.0))?;
        stat = stat.max(sup / ((0.5 * j as f64).exp2() * (j as f64).sqrt()));
    }
    Ok(stat)
}

/// Monte Carlo calibration of `cbar`: the empirical `target` quantile of
/// the pure-noise statistic over `reps` replications at unit noise level.
pub fn calibrate_cbar(
    kernel: &Kernel,
    levels: LevelRange,
    target: f64,
    reps: usize,
    grid: &Grid,
    seed: u64,
) -> Result<f64> {
    if reps < 100 {
        return Err(Error::InvalidParameter(format!(
            "calibration needs reps >= 100, got {reps}"
        )));
    }
    if !(target > 0.5 && target < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "calibration target must lie in (0.5, 1), got {target}"
        )));
    }
    for j in levels.iter() {
        kernel
            .apply_to_cell_masses(j, grid, &vec![0.0; grid.m()])
            .map_err(|e| Error::InvalidParameter(format!("level {j} unusable: {e}")))?;
    }
    let stats = exec::map_indexed(reps, |r| {
        noise_sup_statistic(kernel, levels, grid, rng::derive_seed(seed, r as u64))
            .expect("levels validated above")
    });
    let mut sorted = stats;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((target * reps as f64).ceil() as usize - 1).min(reps - 1);
    Ok(sorted[idx])
}

/// Default level set for sample size `n` on `grid`: the floor grows like
/// `log2 log2 n`, the ceiling like `log2(n) / (2 gamma_lo + 1)` plus
/// slack, truncated to the grid's resolvable levels.
pub fn default_levels(n: f64, gamma_lo: f64, kernel: &Kernel, grid: &Grid) -> Result<LevelRange> {
    if !(n > 2.0) {
        return Err(Error::InvalidParameter(format!("need n > 2, got {n}")));
    }
    let log2n = n.log2();
    let lo = (log2n.log2().ceil() as i32).max(2);
    let hi = (kernel.j_max(grid)).min((log2n / (2.0 * gamma_lo + 1.0)).ceil() as i32 + 4);
    LevelRange::new(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule() -> CriticalValueRule {
        CriticalValueRule::new(1.0, 0.1, LevelRange::new(1, 8).unwrap()).unwrap()
    }

    #[test]
    fn critical_value_hand_arithmetic() {
        let r = rule();
        assert!((r.critical_value(4).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn level_zero_is_not_allowed() {
        assert!(LevelRange::new(0, 8).is_err());
        assert!(rule().critical_value(0).is_err());
        assert!(rule().critical_value(9).is_err());
    }

    #[test]
    fn critical_value_is_linear_in_sigma_n() {
        let r = rule();
        let r2 = r.with_sigma_n(0.2).unwrap();
        for j in 1..=8 {
            assert_eq!(
                2.0 * r.critical_value(j).unwrap(),
                r2.critical_value(j).unwrap()
            );
        }
    }

    #[test]
    fn critical_value_strictly_increasing_and_normalized() {
        let r = rule();
        let mut prev = 0.0;
        for j in 1..=8 {
            let c = r.critical_value(j).unwrap();
            assert!(c > prev);
            prev = c;
            // c(j) / (2^{j/2} sqrt j) is the same constant at every level.
            let norm = c / ((0.5 * j as f64).exp2() * (j as f64).sqrt());
            assert!((norm - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn tilde_critical_symmetric_and_additive() {
        let r = rule();
        let c4 = r.critical_value(4).unwrap();
        assert_eq!(r.tilde_critical(4, 4).unwrap(), 2.0 * c4);
        let a = r.tilde_critical(4, 2).unwrap();
        let b = r.tilde_critical(2, 4).unwrap();
        assert_eq!(a, b);
        let expect = 0.8 + 1.0 * 0.1 * 2.0 * 2.0f64.sqrt();
        assert!((a - expect).abs() < 1e-12, "{a} vs {expect}");
    }

    #[test]
    fn calibration_quantiles_are_monotone_in_target() {
        let grid = Grid::estimation_with_cells(1 << 10).unwrap();
        let k = Kernel::conv_poly();
        let levels = LevelRange::new(3, 6).unwrap();
        let lo = calibrate_cbar(&k, levels, 0.6, 200, &grid, 1).unwrap();
        let hi = calibrate_cbar(&k, levels, 0.99, 200, &grid, 1).unwrap();
        assert!(lo < hi, "{lo} vs {hi}");
    }

    #[test]
    fn calibration_rejects_small_rep_counts_and_bad_targets() {
        let grid = Grid::estimation_with_cells(1 << 8).unwrap();
        let k = Kernel::conv_poly();
        let levels = LevelRange::new(3, 5).unwrap();
        assert!(calibrate_cbar(&k, levels, 0.9, 50, &grid, 1).is_err());
        assert!(calibrate_cbar(&k, levels, 0.4, 200, &grid, 1).is_err());
        assert!(calibrate_cbar(&k, levels, 1.0, 200, &grid, 1).is_err());
    }

    #[test]
    fn calibration_is_stable_across_seeds() {
        let grid = Grid::estimation_with_cells(1 << 11).unwrap();
        let k = Kernel::conv_uniform();
        let levels = LevelRange::new(3, 8).unwrap();
        let a = calibrate_cbar(&k, levels, 0.9, 2000, &grid, 10).unwrap();
        let b = calibrate_cbar(&k, levels, 0.9, 2000, &grid, 20).unwrap();
        assert!(
            (a - b).abs() < 0.05 * a.max(b),
            "calibrations {a} and {b} differ by more than 5%"
        );
    }

    #[test]
    fn default_levels_track_sample_size() {
        let grid = Grid::default_estimation();
        let k = Kernel::conv_poly();
        let small = default_levels((1 << 12) as f64, 0.75, &k, &grid).unwrap();
        let large = default_levels((1 << 18) as f64, 0.75, &k, &grid).unwrap();
        assert_eq!(small.lo, 4);
        assert!(large.hi >= small.hi);
        assert!(large.hi <= k.j_max(&grid));
    }
}
