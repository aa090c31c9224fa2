//! Discretized white-noise observations and the multiscale kernel
//! estimators built from them.
//!
//! An observation stores per-cell increments `dY_i = f(x_mid_i) h +
//! sigma_n sqrt(h) Z_i` at noise level `sigma_n = sigma / sqrt(n)`. The
//! normals come from a counter-based generator keyed by `(seed, cell)`, so
//! replications are reproducible under any work schedule.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernel::{midpoint_cell_masses, Kernel};

/// Counter-based random numbers (SplitMix64 stream + Box-Muller).
pub mod rng {
    /// SplitMix64 finalizer.
    #[inline]
    pub fn mix64(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

    /// `index`-th word of the stream keyed by `seed`.
    #[inline]
    pub fn word_at(seed: u64, index: u64) -> u64 {
        mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Derive an independent child seed (for replication `index`).
    #[inline]
    pub fn derive_seed(seed: u64, index: u64) -> u64 {
        word_at(seed ^ 0xd6e8_feb8_6659_fd93, index)
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    fn unit_open(w: u64) -> f64 {
        ((w >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal keyed by `(seed, counter)`, via Box-Muller.
    #[inline]
    pub fn normal_at(seed: u64, counter: u64) -> f64 {
        let u1 = unit_open(word_at(seed, 2 * counter));
        let u2 = unit_open(word_at(seed, 2 * counter + 1));
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Discretized white-noise path: per-cell increments at noise level
/// `sigma / sqrt(n)`.
#[derive(Debug, Clone)]
pub struct Observation {
    grid: Grid,
    increments: Vec<f64>,
    sigma: f64,
    n: f64,
    seed: u64,
}

impl Observation {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma / self.n.sqrt()
    }

    /// CSV serialization: header `x_mid,dy`, one row per cell.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::with_capacity(self.increments.len() * 24);
        out.push_str("x_mid,dy\n");
        for (i, dy) in self.increments.iter().enumerate() {
            let _ = writeln!(out, "{},{}", self.grid.cell_mid(i), dy);
        }
        out
    }

    /// Rebuild an observation from stored increments.
    pub fn from_parts(grid: Grid, increments: Vec<f64>, sigma: f64, n: f64, seed: u64) -> Result<Self> {
        if increments.len() != grid.m() {
            return Err(Error::GridMismatch);
        }
        if sigma < 0.0 || n <= 0.0 {
            return Err(Error::InvalidParameter(
                "need sigma >= 0 and n > 0".into(),
            ));
        }
        Ok(Observation {
            grid,
            increments,
            sigma,
            n,
            seed,
        })
    }
}

/// Draw an observation of `f` at noise level `sigma / sqrt(n)`.
///
/// `sigma == 0` is accepted as the exact noiseless case. Deterministic in
/// `(f, sigma, n, grid, seed)`.
pub fn synthesize(
    f: &GridFunction,
    sigma: f64,
    n: f64,
    grid: &Grid,
    seed: u64,
) -> Result<Observation> {
    if f.grid() != *grid {
        return Err(Error::GridMismatch);
    }
    if sigma < 0.0 {
        return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    if !(n > 0.0) {
        return Err(Error::InvalidParameter(format!("n must be > 0, got {n}")));
    }
    let masses = midpoint_cell_masses(f);
    let increments = if sigma == 0.0 {
        masses
    } else {
        let sigma_n = sigma / n.sqrt();
        let root_h = grid.step().sqrt();
        masses
            .iter()
            .enumerate()
            .map(|(i, &m)| m + sigma_n * root_h * rng::normal_at(seed, i as u64))
            .collect()
    };
    Observation::from_parts(*grid, increments, sigma, n, seed)
}

/// Kernel estimate `f_hat(t, j) = sum_i K_j(t, x_mid_i) dY_i`, sampled at
/// the grid nodes.
pub fn kernel_estimate(obs: &Observation, kernel: &Kernel, j: i32) -> Result<GridFunction> {
    kernel.apply_to_cell_masses(j, &obs.grid(), &obs.increments)
}

/// `sup over [0,1] of |f_hat(., j) - f_hat(., j2)|`.
pub fn delta_hat(obs: &Observation, kernel: &Kernel, j: i32, j2: i32) -> Result<f64> {
    if j == j2 {
        return Ok(0.0);
    }
    let a = kernel_estimate(obs, kernel, j)?;
    let b = kernel_estimate(obs, kernel, j2)?;
    a.sub(&b)?.sup_norm_on((0.0, 1.0))
}

/// Kernel estimates at a contiguous range of levels, with scale
/// comparisons read off the cached estimates.
#[derive(Debug, Clone)]
pub struct LevelEstimates {
    lo: i32,
    estimates: Vec<GridFunction>,
    unit_range: (usize, usize),
}

impl LevelEstimates {
    pub fn compute(obs: &Observation, kernel: &Kernel, levels: (i32, i32)) -> Result<Self> {
        let (lo, hi) = levels;
        if lo > hi {
            return Err(Error::EmptyInput("level range"));
        }
        let estimates = (lo..=hi)
            .map(|j| kernel_estimate(obs, kernel, j))
            .collect::<Result<Vec<_>>>()?;
        let unit_range = obs.grid().node_range_in(0.0, 1.0)?;
        Ok(LevelEstimates {
            lo,
            estimates,
            unit_range,
        })
    }

    pub fn levels(&self) -> (i32, i32) {
        (self.lo, self.lo + self.estimates.len() as i32 - 1)
    }

    pub fn at(&self, j: i32) -> &GridFunction {
        &self.estimates[(j - self.lo) as usize]
    }

    /// `sup over [0,1] of |f_hat(., j) - f_hat(., j2)|` from the cache.
    pub fn delta_hat(&self, j: i32, j2: i32) -> f64 {
        if j == j2 {
            return 0.0;
        }
        let a = self.at(j).values();
        let b = self.at(j2).values();
        let (first, last) = self.unit_range;
        let mut worst = 0.0f64;
        for i in first..=last {
            worst = worst.max((a[i] - b[i]).abs());
        }
        worst
    }

    /// `sup over [0,1] of |f_hat(., j) - g|` for a reference `g` on the
    /// same grid (used to check concentration against known projections).
    pub fn sup_deviation_from(&self, j: i32, g: &GridFunction) -> f64 {
        let a = self.at(j).values();
        let b = g.values();
        let (first, last) = self.unit_range;
        let mut worst = 0.0f64;
        for i in first..=last {
            worst = worst.max((a[i] - b[i]).abs());
        }
        worst
    }
}
