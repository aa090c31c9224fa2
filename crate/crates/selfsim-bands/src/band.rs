//! Adaptive confidence band assembly.
//!
//! The band centers on a kernel estimate at a data-chosen level and widens
//! it by a critical value plus a bias bound obtained from a scale
//! comparison: `a_factor` converts the worst case of the comparison over
//! the exponent interval into a bias bound at the display level, and the
//! triple `(j, j1, j2)` minimizing the resulting width is selected by
//! exhaustive search over the calibrated level set.

use crate::calibrate::CriticalValueRule;
use crate::error::{Error, Result};
use crate::gamma::{self, GammaInterval, RegularityRanges};
use crate::grid::GridFunction;
use crate::kernel::Kernel;
use crate::noise::{LevelEstimates, Observation};

/// Worst-case conversion factor from a scale comparison at `(j1, j2)` to a
/// bias bound at level `j`, over exponents in `[gl, gu]`:
/// `max{ eps 2^{-max{(j1-j) gu, (j1-j) gl}} - 2^{-min{(j2-j) gu, (j2-j) gl}}, 0 }`.
pub fn a_factor(eps: f64, j1: i32, j2: i32, j: i32, gl: f64, gu: f64) -> Result<f64> {
    if !(0.0 < gl && gl <= gu) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < gl <= gu, got {gl}, {gu}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("need eps > 0, got {eps}")));
    }
    let d1 = (j1 - j) as f64;
    let d2 = (j2 - j) as f64;
    let e1 = (d1 * gu).max(d1 * gl);
    let e2 = (d2 * gu).min(d2 * gl);
    Ok((eps * (-e1).exp2() - (-e2).exp2()).max(0.0))
}

/// `delta_upper / a_val`, with the convention that a vanishing factor
/// yields an infinite bound.
pub fn bias_bound(delta_upper: f64, a_val: f64) -> Result<f64> {
    if delta_upper < 0.0 || a_val < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need nonnegative inputs, got {delta_upper}, {a_val}"
        )));
    }
    if a_val == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(delta_upper / a_val)
    }
}

/// Configuration of one band construction.
#[derive(Debug, Clone)]
pub struct BandConfig {
    /// Self-similarity constant as stated by the user-facing class.
    pub epsilon: f64,
    /// Bias constant relating the Hölder certificate to projection bias;
    /// floored at one. The band internally replaces `epsilon` by
    /// `epsilon / c_tilde` and scales the constant range by `c_tilde`.
    pub c_tilde: f64,
    pub ranges: RegularityRanges,
    pub rule: CriticalValueRule,
    /// Minimum `j2 - j1` for the exponent-interval pairs.
    pub gamma_pair_gap: i32,
}

impl BandConfig {
    pub fn new(
        epsilon: f64,
        c_tilde_raw: f64,
        ranges: RegularityRanges,
        rule: CriticalValueRule,
    ) -> Result<BandConfig> {
        if !(0.0 < epsilon && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need epsilon in (0, 1), got {epsilon}"
            )));
        }
        if !c_tilde_raw.is_finite() || c_tilde_raw < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bad bias constant {c_tilde_raw}"
            )));
        }
        Ok(BandConfig {
            epsilon,
            c_tilde: c_tilde_raw.max(1.0),
            ranges,
            rule,
            gamma_pair_gap: 2,
        })
    }

    /// `epsilon / c_tilde`, the constant actually used in the search.
    pub fn epsilon_tilde(&self) -> f64 {
        self.epsilon / self.c_tilde
    }

    /// Ranges in the form the scale-comparison bounds see: constants are
    /// inflated by `c_tilde` and the self-similarity constant deflated.
    pub fn effective_ranges(&self) -> Result<RegularityRanges> {
        RegularityRanges::new(
            self.ranges.gamma_lo,
            self.ranges.gamma_hi,
            self.c_tilde * self.ranges.b_lo,
            self.c_tilde * self.ranges.b_hi,
            self.epsilon_tilde(),
        )
    }
}

/// A constant-width band `center(x) +/- half_width` with its chosen scales.
#[derive(Debug, Clone)]
pub struct BandResult {
    pub center: GridFunction,
    pub half_width: f64,
    /// `(j, j1, j2)` attaining the minimum width; `None` when infeasible.
    pub chosen: Option<(i32, i32, i32)>,
    pub gamma_interval: GammaInterval,
    /// `false` when every searched triple had a vanishing factor; the
    /// half-width is then infinite, never silently replaced.
    pub feasible: bool,
}

impl BandResult {
    /// Whether the band contains `truth` at every grid node in `[0, 1]`.
    pub fn covers(&self, truth: &GridFunction) -> Result<bool> {
        if !self.feasible {
            return Ok(true);
        }
        let grid = truth.grid();
        let (first, last) = grid.node_range_in(0.0, 1.0)?;
        let c = self.center.values();
        let t = truth.values();
        for i in first..=last {
            if (c[i] - t[i]).abs() > self.half_width {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Build the band from precomputed level estimates.
pub fn build_band_from(est: &LevelEstimates, cfg: &BandConfig) -> Result<BandResult> {
    let levels = cfg.rule.levels();
    if est.levels() != (levels.lo, levels.hi) {
        return Err(Error::InvalidParameter(
            "estimates do not cover the rule's level range".into(),
        ));
    }
    let eff = cfg.effective_ranges()?;
    let ci_pairs = gamma::pairs_with_gap(levels, cfg.gamma_pair_gap);
    let gi = gamma::gamma_interval_from(est, &cfg.rule, &eff, &ci_pairs)?;

    let eps_t = cfg.epsilon_tilde();
    let mut best_width = f64::INFINITY;
    let mut best: Option<(i32, i32, i32)> = None;
    // Iteration order fixes tie-breaking: smaller j, then smaller j2 - j1,
    // then smaller j1; only strict improvements move the minimizer.
    for j in levels.iter() {
        let cj = cfg.rule.critical_value(j)?;
        for gap in 1..=(levels.hi - levels.lo) {
            for j1 in levels.lo..=(levels.hi - gap) {
                let j2 = j1 + gap;
                let a = a_factor(eps_t, j1, j2, j, gi.lo, gi.hi)?;
                if a <= 0.0 {
                    continue;
                }
                let numer = est.delta_hat(j1, j2) + cfg.rule.tilde_critical(j1, j2)?;
                let width = cj + numer / a;
                if width < best_width {
                    best_width = width;
                    best = Some((j, j1, j2));
                }
            }
        }
    }

    match best {
        Some((j, j1, j2)) => Ok(BandResult {
            center: est.at(j).clone(),
            half_width: best_width,
            chosen: Some((j, j1, j2)),
            gamma_interval: gi,
            feasible: true,
        }),
        None => Ok(BandResult {
            center: est.at(levels.lo).clone(),
            half_width: f64::INFINITY,
            chosen: None,
            gamma_interval: gi,
            feasible: false,
        }),
    }
}

/// Compute level estimates for the rule's range and build the band.
pub fn build_band(obs: &Observation, kernel: &Kernel, cfg: &BandConfig) -> Result<BandResult> {
    let levels = cfg.rule.levels();
    let est = LevelEstimates::compute(obs, kernel, (levels.lo, levels.hi))?;
    build_band_from(&est, cfg)
}

/// Display-level schedule `rho + log2(n / log2 n) / (2 gamma + 1)`,
/// floored.
pub fn schedule_center(gamma: f64, rho: f64, n: f64) -> Result<i32> {
    if !(n > 2.0) || !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need n > 2 and gamma > 0, got {n}, {gamma}"
        )));
    }
    Ok((rho + (n / n.log2()).log2() / (2.0 * gamma + 1.0)).floor() as i32)
}

/// Reference scale triple `(j, j - m1, j - m2)` around the schedule
/// center; `m1 > m2 >= 1` so that `j1 < j2 < j`.
pub fn j_schedule(gamma: f64, rho: f64, n: f64, m1: i32, m2: i32) -> Result<(i32, i32, i32)> {
    if !(m1 > m2 && m2 >= 1) {
        return Err(Error::InvalidParameter(format!(
            "need m1 > m2 >= 1, got {m1}, {m2}"
        )));
    }
    let j = schedule_center(gamma, rho, n)?;
    let j1 = j - m1;
    if j1 < 1 {
        return Err(Error::InvalidParameter(format!(
            "schedule leaves no room below the center: j={j}, m1={m1}"
        )));
    }
    Ok((j, j1, j - m2))
}

/// Offset `log2((B / (sigma eps))^{2 / (2 gamma + 1)})` used to center the
/// schedule.
pub fn rho_gamma(sigma: f64, b: f64, eps: f64, gamma: f64) -> f64 {
    (2.0 / (2.0 * gamma + 1.0)) * (b / (sigma * eps)).log2()
}

/// Width envelope `cstar (B / eps)^{1/(2 gamma + 1)}
/// (sigma_n^2 ln(1 / sigma_n^2))^{gamma/(2 gamma + 1)}`, a diagnostic with
/// an empirically fitted constant.
pub fn theoretical_width(
    gamma: f64,
    b: f64,
    eps: f64,
    sigma: f64,
    n: f64,
    cstar: f64,
) -> Result<f64> {
    if !(gamma > 0.0 && b > 0.0 && sigma > 0.0 && n > 0.0 && cstar > 0.0) {
        return Err(Error::InvalidParameter("all parameters must be positive".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("need eps in (0,1), got {eps}")));
    }
    let sn2 = sigma * sigma / n;
    if sn2 >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "noise variance {sn2} leaves no log factor"
        )));
    }
    let expo = gamma / (2.0 * gamma + 1.0);
    Ok(cstar * (b / eps).powf(1.0 / (2.0 * gamma + 1.0)) * (sn2 * (1.0 / sn2).ln()).powf(expo))
}
