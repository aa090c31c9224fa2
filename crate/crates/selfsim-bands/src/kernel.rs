//! Bivariate kernels `K(y, x)` with compact support and integer-shift
//! invariance, their dyadic rescalings, and projections of grid functions.
//!
//! Three kernels ship:
//! - `conv_poly`: convolution with the smooth profile `(35/32)(1 - u^2)^3`
//!   on `[-1, 1]` (order two, twice continuously differentiable),
//! - `conv_uniform`: convolution with `1/2` on `[-1, 1]`, kept for
//!   closed-form quadrature checks,
//! - `wavelet_proj`: the projection kernel `sum_k phi(y-k) phi(x-k)` built
//!   from the cubic B-spline, whose integer shifts form a partition of
//!   unity.
//!
//! Projections use the midpoint rule on the signal grid so that a noiseless
//! kernel estimate reproduces the projection bit for bit.

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{Grid, GridFunction};

pub fn exp2i(j: i32) -> f64 {
    (j as f64).exp2()
}

/// Convolution profile shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvProfile {
    /// `(35/32)(1 - u^2)^3` on `[-1, 1]`; vanishes to third order at the
    /// support edges so midpoint quadrature keeps full accuracy.
    PolySmooth,
    /// `1/2` on `[-1, 1]`.
    Uniform,
}

impl ConvProfile {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            ConvProfile::PolySmooth => {
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    let w = 1.0 - u * u;
                    1.09375 * w * w * w
                }
            }
            ConvProfile::Uniform => {
                if u.abs() > 1.0 {
                    0.0
                } else {
                    0.5
                }
            }
        }
    }

    /// L2 norm of the profile, by fine midpoint quadrature.
    pub fn l2_norm(&self) -> f64 {
        let n = 200_000;
        let h = 2.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let u = -1.0 + (i as f64 + 0.5) * h;
            let v = self.eval(u);
            acc += v * v;
        }
        (acc * h).sqrt()
    }
}

/// Cubic B-spline, support `[-2, 2]`.
pub fn cubic_bspline(x: f64) -> f64 {
    let t = x.abs();
    if t < 1.0 {
        (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0
    } else if t < 2.0 {
        let w = 2.0 - t;
        w * w * w / 6.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Convolution(ConvProfile),
    WaveletProjection,
}

/// Bivariate kernel with compact support radius and integer-shift
/// invariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    kind: Kind,
    support_radius: f64,
    name: &'static str,
}

impl Kernel {
    pub fn conv_poly() -> Kernel {
        Kernel {
            kind: Kind::Convolution(ConvProfile::PolySmooth),
            support_radius: 1.0,
            name: "conv_poly",
        }
    }

    pub fn conv_uniform() -> Kernel {
        Kernel {
            kind: Kind::Convolution(ConvProfile::Uniform),
            support_radius: 1.0,
            name: "conv_uniform",
        }
    }

    pub fn wavelet_proj() -> Kernel {
        Kernel {
            kind: Kind::WaveletProjection,
            // phi(y-k) phi(x-k) needs |y-k| < 2 and |x-k| < 2.
            support_radius: 4.0,
            name: "wavelet_proj",
        }
    }

    pub fn by_name(name: &str) -> Result<Kernel> {
        match name {
            "conv_poly" => Ok(Kernel::conv_poly()),
            "conv_uniform" => Ok(Kernel::conv_uniform()),
            "wavelet_proj" => Ok(Kernel::wavelet_proj()),
            other => Err(Error::UnknownKernel(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Support radius: `K(y, x) = 0` whenever `|x - y| > support_radius`.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Convolution profile, when this is a convolution kernel.
    pub fn conv_profile(&self) -> Option<ConvProfile> {
        match self.kind {
            Kind::Convolution(p) => Some(p),
            Kind::WaveletProjection => None,
        }
    }

    pub fn eval(&self, y: f64, x: f64) -> f64 {
        match self.kind {
            Kind::Convolution(p) => p.eval(y - x),
            Kind::WaveletProjection => {
                if (x - y).abs() >= 4.0 {
                    return 0.0;
                }
                let k_lo = (y.max(x) - 2.0).floor() as i64 + 1;
                let k_hi = (y.min(x) + 2.0).ceil() as i64 - 1;
                let mut acc = 0.0;
                for k in k_lo..=k_hi {
                    acc += cubic_bspline(y - k as f64) * cubic_bspline(x - k as f64);
                }
                acc
            }
        }
    }

    /// Rescaled kernel `K_j(t, x) = 2^j K(2^j t, 2^j x)`.
    pub fn at_level(&self, j: i32) -> ScaledKernel<'_> {
        ScaledKernel { base: self, j }
    }

    /// Largest level at which every kernel window spans at least four grid
    /// cells on each side of its center.
    pub fn j_max(&self, grid: &Grid) -> i32 {
        (self.support_radius / (4.0 * grid.step())).log2().floor() as i32
    }

    /// Smallest level at which windows centered anywhere in `[0, 1]` stay
    /// inside the grid.
    pub fn j_min(&self, grid: &Grid) -> i32 {
        (self.support_radius / grid.unit_margin()).log2().ceil() as i32
    }

    /// Level range usable on `grid` for estimation over `[0, 1]`.
    pub fn valid_levels(&self, grid: &Grid) -> Result<(i32, i32)> {
        let lo = self.j_min(grid);
        let hi = self.j_max(grid);
        if lo > hi {
            return Err(Error::GridTooCoarse(format!(
                "no usable levels for kernel {} on this grid",
                self.name
            )));
        }
        Ok((lo, hi))
    }

    /// Largest level at which midpoint quadrature still resolves the
    /// profile to high relative accuracy: at least 64 cells per window for
    /// smooth profiles, and for the discontinuous uniform profile
    /// additionally `h 2^j` below the `2^{-2j}` bias scale (its window
    /// truncation error does not cancel).
    pub fn quadrature_j_max(&self, grid: &Grid) -> i32 {
        let cap = ((self.support_radius / (64.0 * grid.step())).log2().floor() as i32)
            .min(self.j_max(grid));
        match self.kind {
            Kind::Convolution(ConvProfile::Uniform) => {
                (((0.01 / grid.step()).log2() / 3.0).floor() as i32).min(cap)
            }
            _ => cap,
        }
    }

    fn check_level(&self, j: i32, grid: &Grid) -> Result<()> {
        let window = exp2i(-j) * self.support_radius;
        if window > grid.unit_margin() {
            return Err(Error::MarginTooNarrow {
                j,
                window,
                margin: grid.unit_margin(),
            });
        }
        if window < 2.0 * grid.step() {
            return Err(Error::UnderResolved {
                j,
                window,
                min: 2.0 * grid.step(),
            });
        }
        Ok(())
    }

    /// Apply `K_j` to per-cell masses `w_i` located at cell midpoints:
    /// returns the node samples of `t -> sum_i K_j(t, x_mid_i) w_i`.
    ///
    /// This is the one quadrature/estimation loop in the crate: projections
    /// pass `w_i = f(x_mid_i) h` and kernel estimates pass the observed
    /// increments, so the noiseless case agrees bit for bit.
    pub fn apply_to_cell_masses(
        &self,
        j: i32,
        grid: &Grid,
        masses: &[f64],
    ) -> Result<GridFunction> {
        if masses.len() != grid.m() {
            return Err(Error::GridMismatch);
        }
        self.check_level(j, grid)?;
        let h = grid.step();
        let half = exp2i(-j) * self.support_radius;
        let scale = exp2i(j);
        let values = exec::map_indexed(grid.nodes(), |i| {
            let t = grid.node(i);
            // Cells with |t - x_mid| <= half; midpoints sit at lo + (i+1/2)h.
            let lo_idx = ((t - half - grid.lo()) / h - 0.5).ceil().max(0.0) as usize;
            let hi_idx = (((t + half - grid.lo()) / h - 0.5).floor() as isize)
                .min(grid.m() as isize - 1);
            let ts = scale * t;
            let mut acc = 0.0;
            let mut idx = lo_idx;
            while (idx as isize) <= hi_idx {
                acc += self.eval(ts, scale * grid.cell_mid(idx)) * masses[idx];
                idx += 1;
            }
            scale * acc
        });
        GridFunction::from_values(*grid, values)
    }

    /// Projection `K_j f(t) = integral of K_j(t, x) f(x) dx`, by the
    /// midpoint rule over the kernel support window.
    pub fn project(&self, j: i32, f: &GridFunction) -> Result<GridFunction> {
        let grid = f.grid();
        let masses = midpoint_cell_masses(f);
        self.apply_to_cell_masses(j, &grid, &masses)
    }

    /// `sup over [0,1] of |K_j f - f|`.
    pub fn bias_sup(&self, j: i32, f: &GridFunction) -> Result<f64> {
        let proj = self.project(j, f)?;
        proj.sub(f)?.sup_norm_on((0.0, 1.0))
    }

    /// `sup over [0,1] of |K_j f - K_j2 f|`.
    pub fn delta_true(&self, j: i32, j2: i32, f: &GridFunction) -> Result<f64> {
        if j == j2 {
            return Ok(0.0);
        }
        let a = self.project(j, f)?;
        let b = self.project(j2, f)?;
        a.sub(&b)?.sup_norm_on((0.0, 1.0))
    }

    /// Numeric estimate of the constant relating projection bias to the
    /// Hölder certificate: the maximum over probes and levels of
    /// `bias_sup(j, f) / (B 2^{-j gamma})`, inflated by 1.5.
    ///
    /// Each probe carries a certified pair `(gamma, B)`; exponents above
    /// `gamma_range.1` are clipped to it. The caller enforces a floor of 1
    /// where the constant feeds a band.
    pub fn estimate_tilde_c(
        &self,
        gamma_range: (f64, f64),
        probes: &[(GridFunction, f64, f64)],
    ) -> Result<f64> {
        if probes.is_empty() {
            return Err(Error::EmptyInput("probe set"));
        }
        let mut max_ratio = 0.0f64;
        for (f, gamma, b) in probes {
            if *b <= 0.0 {
                return Err(Error::InvalidParameter("probe needs B > 0".into()));
            }
            let g_eff = gamma.min(gamma_range.1);
            let (j_lo, mut j_hi) = self.valid_levels(&f.grid())?;
            j_hi = j_hi.min(self.quadrature_j_max(&f.grid()));
            for j in j_lo..=j_hi {
                let ratio = self.bias_sup(j, f)? / (b * (-(j as f64) * g_eff).exp2());
                max_ratio = max_ratio.max(ratio);
            }
        }
        Ok(1.5 * max_ratio)
    }
}

/// Scaled kernel `K_j(t, x) = 2^j K(2^j t, 2^j x)`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledKernel<'a> {
    base: &'a Kernel,
    j: i32,
}

impl ScaledKernel<'_> {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let s = exp2i(self.j);
        s * self.base.eval(s * t, s * x)
    }

    pub fn level(&self) -> i32 {
        self.j
    }
}

/// Per-cell masses of the midpoint rule: `w_i = f(x_mid_i) h` with the
/// midpoint value taken from the linear interpolant.
pub fn midpoint_cell_masses(f: &GridFunction) -> Vec<f64> {
    let h = f.grid().step();
    (0..f.grid().m()).map(|i| f.cell_mid_value(i) * h).collect()
}
