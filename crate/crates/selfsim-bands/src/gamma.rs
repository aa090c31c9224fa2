//! Data-driven confidence interval for the smoothness exponent.
//!
//! For a scale pair `j1 < j2` the comparison `delta_hat(j1, j2)` brackets
//! the exponent between
//! `[log2 G_lower - log2(delta_hat + c_tilde)] / j1` and
//! `[log2 G_upper - log2(delta_hat - c_tilde)] / j1`,
//! where `G_lower` / `G_upper` are the worst-case class envelopes over the
//! regularity rectangle. The interval intersects these bounds over all
//! admissible pairs.

use crate::calibrate::{CriticalValueRule, LevelRange};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::noise::{LevelEstimates, Observation};

/// Regularity rectangle `[gamma_lo, gamma_hi] x [b_lo, b_hi]` together
/// with the self-similarity constant.
#[derive(Debug, Clone, Copy)]
pub struct RegularityRanges {
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub b_lo: f64,
    pub b_hi: f64,
    pub epsilon: f64,
}

impl RegularityRanges {
    pub fn new(gamma_lo: f64, gamma_hi: f64, b_lo: f64, b_hi: f64, epsilon: f64) -> Result<Self> {
        if !(0.0 < gamma_lo && gamma_lo < gamma_hi) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < gamma_lo < gamma_hi, got [{gamma_lo}, {gamma_hi}]"
            )));
        }
        if !(0.0 < b_lo && b_lo <= b_hi) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < b_lo <= b_hi, got [{b_lo}, {b_hi}]"
            )));
        }
        if !(0.0 < epsilon && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need epsilon in (0, 1), got {epsilon}"
            )));
        }
        Ok(RegularityRanges {
            gamma_lo,
            gamma_hi,
            b_lo,
            b_hi,
            epsilon,
        })
    }

    pub fn clamp_gamma(&self, g: f64) -> f64 {
        g.clamp(self.gamma_lo, self.gamma_hi)
    }
}

fn check_pair(j1: i32, j2: i32) -> Result<()> {
    if j2 <= j1 {
        return Err(Error::BadScalePair { j1, j2 });
    }
    Ok(())
}

/// Worst-case lower envelope `min over the rectangle of
/// B (epsilon - 2^{-(j2-j1) gamma})`.
///
/// The objective is monotone in each argument, so the minimum sits at one
/// of the four corners.
pub fn g_lower(r: &RegularityRanges, j1: i32, j2: i32) -> Result<f64> {
    check_pair(j1, j2)?;
    let d = (j2 - j1) as f64;
    let mut best = f64::INFINITY;
    for b in [r.b_lo, r.b_hi] {
        for g in [r.gamma_lo, r.gamma_hi] {
            best = best.min(b * (r.epsilon - (-d * g).exp2()));
        }
    }
    Ok(best)
}

/// Worst-case upper envelope `max over the rectangle of
/// B (1 + 2^{-(j2-j1) gamma})`, attained at `(b_hi, gamma_lo)`.
pub fn g_upper(r: &RegularityRanges, j1: i32, j2: i32) -> Result<f64> {
    check_pair(j1, j2)?;
    let d = (j2 - j1) as f64;
    Ok(r.b_hi * (1.0 + (-d * r.gamma_lo).exp2()))
}

/// Per-pair exponent bounds from an observed scale comparison.
///
/// Conventions: the lower bound falls back to `gamma_lo` when the class
/// envelope `G_lower` is not positive, the upper bound to `gamma_hi` when
/// `delta_hat - c_tilde` is not positive. Both are clamped to the range.
pub fn gamma_tilde_bounds(
    delta_hat_val: f64,
    c_tilde: f64,
    r: &RegularityRanges,
    j1: i32,
    j2: i32,
) -> Result<(f64, f64)> {
    if j1 <= 0 {
        return Err(Error::InvalidParameter(format!(
            "pair base level must be positive, got {j1}"
        )));
    }
    if delta_hat_val < 0.0 || !(c_tilde > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need delta_hat >= 0 and c_tilde > 0, got {delta_hat_val}, {c_tilde}"
        )));
    }
    let lower_env = g_lower(r, j1, j2)?;
    let upper_env = g_upper(r, j1, j2)?;
    let j1f = j1 as f64;
    let lo = if lower_env <= 0.0 {
        r.gamma_lo
    } else {
        r.clamp_gamma((lower_env.log2() - (delta_hat_val + c_tilde).log2()) / j1f)
    };
    let hi = if delta_hat_val - c_tilde <= 0.0 {
        r.gamma_hi
    } else {
        r.clamp_gamma((upper_env.log2() - (delta_hat_val - c_tilde).log2()) / j1f)
    };
    Ok((lo, hi))
}

/// Which side of the interval a witness pair achieved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy)]
pub struct Witness {
    pub j1: i32,
    pub j2: i32,
    pub kind: BoundKind,
}

/// Interval `[lo, hi]` for the smoothness exponent, with the scale pairs
/// that achieved the extremes.
#[derive(Debug, Clone)]
pub struct GammaInterval {
    pub lo: f64,
    pub hi: f64,
    /// Set when the raw bounds crossed; the interval is then the clamped
    /// degenerate hull rather than a certificate.
    pub crossed: bool,
    pub witnesses: Vec<Witness>,
}

impl GammaInterval {
    pub fn contains(&self, gamma: f64) -> bool {
        self.lo <= gamma && gamma <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// All pairs `(j1, j2)` in the level range with `j2 - j1 >= min_gap`.
pub fn pairs_with_gap(levels: LevelRange, min_gap: i32) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for j1 in levels.iter() {
        for j2 in levels.iter() {
            if j2 - j1 >= min_gap {
                out.push((j1, j2));
            }
        }
    }
    out
}

/// Intersect the per-pair bounds over cached level estimates.
pub fn gamma_interval_from(
    est: &LevelEstimates,
    rule: &CriticalValueRule,
    r: &RegularityRanges,
    pairs: &[(i32, i32)],
) -> Result<GammaInterval> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("scale pair list"));
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut wit_lo = None;
    let mut wit_hi = None;
    for &(j1, j2) in pairs {
        check_pair(j1, j2)?;
        let dh = est.delta_hat(j1, j2);
        let ct = rule.tilde_critical(j1, j2)?;
        let (l, u) = gamma_tilde_bounds(dh, ct, r, j1, j2)?;
        if l > lo {
            lo = l;
            wit_lo = Some(Witness {
                j1,
                j2,
                kind: BoundKind::Lower,
            });
        }
        if u < hi {
            hi = u;
            wit_hi = Some(Witness {
                j1,
                j2,
                kind: BoundKind::Upper,
            });
        }
    }
    let crossed = lo > hi;
    let (lo, hi) = if crossed { (hi, lo) } else { (lo, hi) };
    let witnesses = wit_lo.into_iter().chain(wit_hi).collect();
    Ok(GammaInterval {
        lo,
        hi,
        crossed,
        witnesses,
    })
}

/// Compute estimates at the rule's levels and intersect the pair bounds.
pub fn gamma_interval(
    obs: &Observation,
    kernel: &Kernel,
    rule: &CriticalValueRule,
    r: &RegularityRanges,
    pairs: &[(i32, i32)],
) -> Result<GammaInterval> {
    let levels = rule.levels();
    let est = LevelEstimates::compute(obs, kernel, (levels.lo, levels.hi))?;
    gamma_interval_from(&est, rule, r, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranges() -> RegularityRanges {
        RegularityRanges::new(1.0, 2.0, 1.0, 2.0, 0.5).unwrap()
    }

    #[test]
    fn ranges_validate() {
        assert!(RegularityRanges::new(1.0, 0.5, 1.0, 2.0, 0.5).is_err());
        assert!(RegularityRanges::new(0.5, 1.0, 2.0, 1.0, 0.5).is_err());
        assert!(RegularityRanges::new(0.5, 1.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn lower_envelope_corner_cases() {
        // epsilon=0.5, gap 2, B in [1,2], gamma in [1,2]: min at (1, gamma=1).
        let v = g_lower(&ranges(), 4, 6).unwrap();
        assert!((v - 0.25).abs() < 1e-15);

        // epsilon=0.1, gap 1, gamma_lo=1: negative, attained at b_hi.
        let r = RegularityRanges::new(1.0, 2.0, 1.0, 2.0, 0.1).unwrap();
        let v = g_lower(&r, 4, 5).unwrap();
        assert!((v - 2.0 * (0.1 - 0.5)).abs() < 1e-15);

        // Large gap: envelope approaches b_lo * epsilon.
        let r = RegularityRanges::new(1.0, 2.0, 1.0, 2.0, 0.9).unwrap();
        let v = g_lower(&r, 1, 40).unwrap();
        assert!((v - 0.9).abs() < 1e-9);

        assert!(g_lower(&ranges(), 5, 5).is_err());
    }

    #[test]
    fn lower_envelope_matches_dense_scan() {
        let r = RegularityRanges::new(0.7, 2.3, 0.8, 3.1, 0.3).unwrap();
        for (j1, j2) in [(3, 5), (3, 9), (6, 8)] {
            let corner = g_lower(&r, j1, j2).unwrap();
            let d = (j2 - j1) as f64;
            let mut dense = f64::INFINITY;
            for ib in 0..=50 {
                let b = r.b_lo + (r.b_hi - r.b_lo) * ib as f64 / 50.0;
                for ig in 0..=50 {
                    let g = r.gamma_lo + (r.gamma_hi - r.gamma_lo) * ig as f64 / 50.0;
                    dense = dense.min(b * (r.epsilon - (-d * g).exp2()));
                }
            }
            assert!((corner - dense).abs() < 1e-12, "({j1},{j2}): {corner} vs {dense}");
        }
    }

    #[test]
    fn upper_envelope_closed_form_and_limits() {
        let v = g_upper(&ranges(), 4, 6).unwrap();
        assert!((v - 2.5).abs() < 1e-15);
        let far = g_upper(&ranges(), 1, 40).unwrap();
        assert!((far - 2.0).abs() < 1e-9);
        for (j1, j2) in [(2, 4), (3, 8)] {
            assert!(g_upper(&ranges(), j1, j2).unwrap() > g_lower(&ranges(), j1, j2).unwrap());
        }
    }

    #[test]
    fn tilde_bounds_conventions() {
        let r = RegularityRanges::new(1.0, 2.0, 1.0, 2.0, 0.1).unwrap();
        // Negative lower envelope: lower bound falls back to gamma_lo.
        let (lo, _) = gamma_tilde_bounds(0.3, 0.05, &r, 4, 5).unwrap();
        assert_eq!(lo, r.gamma_lo);
        // delta_hat - c_tilde <= 0: upper bound falls back to gamma_hi.
        let (_, hi) = gamma_tilde_bounds(0.02, 0.05, &ranges(), 4, 6).unwrap();
        assert_eq!(hi, ranges().gamma_hi);
    }

    #[test]
    fn tilde_lower_bound_clamps_from_below() {
        // G_lower = 0.25, delta_hat + c_tilde = 0.5, j1 = 8:
        // raw bound (-2 + 1)/8 = -0.125, clamped to gamma_lo.
        let r = ranges();
        let (lo, _) = gamma_tilde_bounds(0.45, 0.05, &r, 8, 10).unwrap();
        assert_eq!(lo, r.gamma_lo);
    }

    #[test]
    fn tilde_bounds_validate_inputs() {
        assert!(gamma_tilde_bounds(-0.1, 0.05, &ranges(), 4, 6).is_err());
        assert!(gamma_tilde_bounds(0.1, 0.0, &ranges(), 4, 6).is_err());
        assert!(gamma_tilde_bounds(0.1, 0.05, &ranges(), 0, 2).is_err());
    }

    #[test]
    fn pair_enumeration_respects_gap() {
        let levels = LevelRange::new(3, 7).unwrap();
        let pairs = pairs_with_gap(levels, 2);
        assert!(pairs.iter().all(|&(a, b)| b - a >= 2));
        assert!(pairs.contains(&(3, 5)));
        assert!(!pairs.contains(&(3, 4)));
        assert_eq!(pairs.len(), 6);
    }
}
