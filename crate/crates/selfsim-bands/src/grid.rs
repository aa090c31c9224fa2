//! Uniform grids and node-sampled functions: the shared numeric substrate.
//!
//! A [`GridFunction`] holds samples at the `m + 1` nodes of a uniform grid;
//! evaluation between nodes is linear interpolation, and every supremum in
//! the crate is a maximum over grid nodes. Refinement studies quantify the
//! discretization error of these conventions.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec;

/// Uniform grid over `[lo, hi]` with `m` cells and `m + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    lo: f64,
    hi: f64,
    m: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, m: usize) -> Result<Grid> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidGrid(format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if m < 2 {
            return Err(Error::InvalidGrid(format!("need m >= 2, got {m}")));
        }
        Ok(Grid { lo, hi, m })
    }

    /// Default estimation grid: `[-0.25, 1.25]` with `2^14` cells, so the
    /// unit interval carries a margin of 0.25 on each side.
    pub fn default_estimation() -> Grid {
        Grid::new(-0.25, 1.25, 1 << 14).expect("valid default grid")
    }

    /// Estimation grid `[-0.25, 1.25]` with a caller-chosen cell count.
    pub fn estimation_with_cells(m: usize) -> Result<Grid> {
        Grid::new(-0.25, 1.25, m)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Number of cells.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of nodes (`m + 1`).
    pub fn nodes(&self) -> usize {
        self.m + 1
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.m as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step()
    }

    /// Midpoint of cell `i` (cells are indexed `0..m`).
    pub fn cell_mid(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.step()
    }

    /// Margin by which the grid extends beyond `[0, 1]` (the smaller side).
    pub fn unit_margin(&self) -> f64 {
        (-self.lo).min(self.hi - 1.0)
    }

    /// Indices of the first and last node inside `[a, b]`.
    pub fn node_range_in(&self, a: f64, b: f64) -> Result<(usize, usize)> {
        if a < self.lo - 1e-12 || b > self.hi + 1e-12 || a > b {
            return Err(Error::IntervalOutsideGrid {
                lo: a,
                hi: b,
                grid_lo: self.lo,
                grid_hi: self.hi,
            });
        }
        let h = self.step();
        // Nudge by a relative epsilon so interval endpoints that coincide
        // with nodes are kept despite rounding.
        let eps = 1e-9 * (self.hi - self.lo);
        let first = ((a - self.lo - eps) / h).ceil().max(0.0) as usize;
        let last = (((b - self.lo + eps) / h).floor() as usize).min(self.m);
        Ok((first, last))
    }
}

/// Real-valued function sampled at grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != grid.nodes() {
            return Err(Error::InvalidGrid(format!(
                "value vector length {} does not match {} nodes",
                values.len(),
                grid.nodes()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(GridFunction { grid, values })
    }

    /// Sample an analytic function at the nodes.
    pub fn sample<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Result<GridFunction> {
        let values = (0..grid.nodes()).map(|i| f(grid.node(i))).collect();
        GridFunction::from_values(grid, values)
    }

    pub fn zero(grid: Grid) -> GridFunction {
        GridFunction {
            grid,
            values: vec![0.0; grid.nodes()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Linear interpolation between nodes. `x` must lie in the grid range.
    pub fn eval(&self, x: f64) -> f64 {
        let h = self.grid.step();
        let t = (x - self.grid.lo) / h;
        if t <= 0.0 {
            return self.values[0];
        }
        let i = (t.floor() as usize).min(self.grid.m - 1);
        let frac = t - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Value of the linear interpolant at the midpoint of cell `i`.
    pub fn cell_mid_value(&self, i: usize) -> f64 {
        0.5 * (self.values[i] + self.values[i + 1])
    }

    /// Maximum of `|f|` over grid nodes inside `interval` (no interpolation
    /// refinement).
    pub fn sup_norm_on(&self, interval: (f64, f64)) -> Result<f64> {
        let (first, last) = self.grid.node_range_in(interval.0, interval.1)?;
        Ok(self.values[first..=last]
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs())))
    }

    /// Trapezoid-rule approximation of the L2 norm over the grid range.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.step();
        let mut acc = 0.5 * (self.values[0] * self.values[0]
            + self.values[self.grid.m] * self.values[self.grid.m]);
        for v in &self.values[1..self.grid.m] {
            acc += v * v;
        }
        (acc * h).sqrt()
    }

    /// Pointwise sum; grids must match.
    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        GridFunction::from_values(self.grid, values)
    }

    /// Pointwise difference; grids must match.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        GridFunction::from_values(self.grid, values)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Estimate of the Hölder seminorm of order `gamma`.
    ///
    /// The integer part `d` is the greatest integer strictly below `gamma`;
    /// the `d`-th derivative is taken by iterated central differences and the
    /// ratio `|g(t) - g(t')| / |t - t'|^(gamma - d)` is maximized over node
    /// pairs separated by at least four cells (a separation floor keeps the
    /// differencing stable).
    pub fn holder_seminorm(&self, gamma: f64) -> Result<f64> {
        if gamma <= 0.0 {
            return Err(Error::NonPositiveGamma(gamma));
        }
        let d = holder_integer_part(gamma);
        if self.grid.m < 1usize << (d + 4) {
            return Err(Error::GridTooCoarse(format!(
                "need m >= 2^{} for order-{d} differences, got {}",
                d + 4,
                self.grid.m
            )));
        }
        let h = self.grid.step();
        let frac = gamma - d as f64;

        // d-th derivative at nodes via iterated central differences; the
        // valid index range shrinks by one node per application.
        let mut deriv = self.values.clone();
        for _ in 0..d {
            let mut next = vec![0.0; deriv.len()];
            for i in 1..deriv.len() - 1 {
                next[i] = (deriv[i + 1] - deriv[i - 1]) / (2.0 * h);
            }
            deriv = next[1..next.len() - 1].to_vec();
        }

        let n = deriv.len();
        // Separation weights indexed by node distance k: (k h)^(-frac).
        let weights: Vec<f64> = (0..n).map(|k| (k as f64 * h).powf(-frac)).collect();
        let best = exec::map_indexed(n, |i| {
            let gi = deriv[i];
            let mut local = 0.0f64;
            for k in 4..n - i {
                let r = (deriv[i + k] - gi).abs() * weights[k];
                if r > local {
                    local = r;
                }
            }
            local
        });
        Ok(best.into_iter().fold(0.0, f64::max))
    }

    /// Two-column CSV serialization with header `x,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24);
        out.push_str("x,value\n");
        for i in 0..self.grid.nodes() {
            let _ = writeln!(out, "{},{}", self.grid.node(i), self.values[i]);
        }
        out
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<GridFunction> {
        let text = std::fs::read_to_string(path)?;
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 {
                continue;
            }
            let mut parts = line.split(',');
            let x: f64 = parts
                .next()
                .ok_or_else(|| Error::Config(format!("line {}: missing x", lineno + 1)))?
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
            let v: f64 = parts
                .next()
                .ok_or_else(|| Error::Config(format!("line {}: missing value", lineno + 1)))?
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
            xs.push(x);
            vs.push(v);
        }
        if xs.len() < 3 {
            return Err(Error::Config("function CSV needs at least 3 nodes".into()));
        }
        let grid = Grid::new(xs[0], *xs.last().unwrap(), xs.len() - 1)?;
        GridFunction::from_values(grid, vs)
    }
}

/// Greatest integer strictly less than `gamma` (so 1.0 maps to 0, 1.5 to 1,
/// 2.0 to 1).
pub fn holder_integer_part(gamma: f64) -> usize {
    let f = gamma.floor();
    if f == gamma {
        (gamma as usize).saturating_sub(1)
    } else {
        f as usize
    }
}
