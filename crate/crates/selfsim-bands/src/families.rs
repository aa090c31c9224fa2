//! Constructive families of self-similar test functions and the numerical
//! class-membership oracle.
//!
//! The sparse-series generators plant an exact bias profile: a smooth
//! compactly supported profile `psi` is rescaled to one dyadic level after
//! another at a fixed shift `k*`, far enough out that the rescaled copies
//! and their kernel projections have pairwise disjoint supports. The decay
//! of the series coefficients then controls both the Hölder seminorm and a
//! two-sided envelope on the projection bias, which is what the membership
//! oracle checks numerically.

use crate::error::{Error, Result};
use crate::grid::{holder_integer_part, Grid, GridFunction};
use crate::kernel::{exp2i, Kernel};

/// Smooth compactly supported profile `N (1 - x^2)^p cos(omega x)` on
/// `[-1, 1]`.
///
/// Derivatives stay in the family `A(x) cos(omega x) + B(x) sin(omega x)`
/// with polynomial `A`, `B`, so they are evaluated exactly. With `omega`
/// around the kernel bandwidth the projection at matching scale removes a
/// definite fraction of the profile, which keeps the bias floor positive
/// for both shipped kernels.
#[derive(Debug, Clone)]
pub struct PsiProfile {
    poly: Vec<f64>,
    omega: f64,
    c_psi: f64,
    smoothness: usize,
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derive(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &a)| i as f64 * a)
        .collect()
}

/// Coefficients of `(1 - x^2)^p`.
fn bump_poly(p: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for _ in 0..p {
        // Multiply by (1 - x^2).
        let mut next = vec![0.0; c.len() + 2];
        for (i, &a) in c.iter().enumerate() {
            next[i] += a;
            next[i + 2] -= a;
        }
        c = next;
    }
    c
}

impl PsiProfile {
    /// Modulated profile normalized to unit L2 norm.
    pub fn modulated(p: usize, omega: f64) -> PsiProfile {
        assert!(p >= 4, "need the profile to vanish to high order at the edges");
        let mut raw = PsiProfile {
            poly: bump_poly(p),
            omega,
            c_psi: 1.0,
            smoothness: p - 1,
        };
        let norm = raw.l2_norm_dense();
        for a in &mut raw.poly {
            *a /= norm;
        }
        raw
    }

    /// The profile used by the series generators.
    pub fn standard() -> PsiProfile {
        PsiProfile::modulated(4, 5.0)
    }

    /// Unmodulated bump scaled so its Hölder seminorms stay at most one
    /// over exponents up to `gamma_hi` (measured numerically). Not
    /// L2-normalized; `kappa(0) > 0`.
    pub fn bump_kappa(p: usize, gamma_hi: f64) -> PsiProfile {
        let mut kappa = PsiProfile {
            poly: bump_poly(p),
            omega: 0.0,
            c_psi: 1.0,
            smoothness: p - 1,
        };
        let grid = Grid::new(-1.25, 1.25, 1 << 12).expect("valid grid");
        let f = GridFunction::sample(grid, |x| kappa.eval(x)).expect("finite");
        let mut worst = 0.0f64;
        let mut g = 0.25;
        while g <= gamma_hi + 1e-9 {
            worst = worst.max(f.holder_seminorm(g).expect("resolvable"));
            g += 0.25;
        }
        let scale = 1.0 / (worst * 1.05);
        for a in &mut kappa.poly {
            *a *= scale;
        }
        kappa
    }

    pub fn support_radius(&self) -> f64 {
        self.c_psi
    }

    /// Number of continuous derivatives available.
    pub fn smoothness(&self) -> usize {
        self.smoothness
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() >= self.c_psi {
            return 0.0;
        }
        poly_eval(&self.poly, x) * (self.omega * x).cos()
    }

    /// Exact `d`-th derivative.
    pub fn eval_deriv(&self, d: usize, x: f64) -> f64 {
        if x.abs() >= self.c_psi {
            return 0.0;
        }
        let (a, b) = self.deriv_polys(d);
        poly_eval(&a, x) * (self.omega * x).cos() + poly_eval(&b, x) * (self.omega * x).sin()
    }

    fn deriv_polys(&self, d: usize) -> (Vec<f64>, Vec<f64>) {
        let mut a = self.poly.clone();
        let mut b = vec![0.0];
        for _ in 0..d {
            let na: Vec<f64> = {
                let da = poly_derive(&a);
                let mut v = vec![0.0; da.len().max(b.len())];
                for (i, &c) in da.iter().enumerate() {
                    v[i] += c;
                }
                for (i, &c) in b.iter().enumerate() {
                    v[i] += self.omega * c;
                }
                v
            };
            let nb: Vec<f64> = {
                let db = poly_derive(&b);
                let mut v = vec![0.0; db.len().max(a.len())];
                for (i, &c) in db.iter().enumerate() {
                    v[i] += c;
                }
                for (i, &c) in a.iter().enumerate() {
                    v[i] -= self.omega * c;
                }
                v
            };
            a = na;
            b = nb;
        }
        (a, b)
    }

    /// Sup norm of the `d`-th derivative, by dense scan.
    pub fn sup_deriv(&self, d: usize) -> f64 {
        let n = 100_001;
        let mut worst = 0.0f64;
        for i in 0..n {
            let x = -self.c_psi + 2.0 * self.c_psi * i as f64 / (n - 1) as f64;
            worst = worst.max(self.eval_deriv(d, x).abs());
        }
        worst
    }

    fn l2_norm_dense(&self) -> f64 {
        let n = 1 << 17;
        let h = 2.0 * self.c_psi / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = -self.c_psi + (i as f64 + 0.5) * h;
            let v = self.eval(x);
            acc += v * v;
        }
        (acc * h).sqrt()
    }

    pub fn value_at_zero(&self) -> f64 {
        self.eval(0.0)
    }

    /// Squared L2 norm, by dense quadrature.
    pub fn l2_sq(&self) -> f64 {
        let v = self.l2_norm_dense();
        v * v
    }
}

/// `psi_{ell, k}(x) = 2^{ell/2} psi(2^ell x - k)` sampled on `grid`.
pub fn psi_scaled(psi: &PsiProfile, ell: i32, k: i32, grid: &Grid) -> Result<GridFunction> {
    if exp2i(-ell) * psi.support_radius() < 4.0 * grid.step() {
        return Err(Error::GridTooCoarse(format!(
            "level {ell} not resolvable at step {}",
            grid.step()
        )));
    }
    let s = exp2i(ell);
    let amp = (0.5 * ell as f64).exp2();
    GridFunction::sample(*grid, |x| amp * psi.eval(s * x - k as f64))
}

/// Coefficient rules for the sparse series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefRule {
    /// `2^{-ell (gamma + 1/2)}`: bias ratio flat in the level.
    GTilde { gamma: f64 },
    /// `max{ 2^{-ell (gamma + 1/2)}, eps_tilde 2^{-ell (gamma - delta + 1/2)} }`:
    /// crosses over from exponent `gamma` to `gamma - delta`.
    FTilde { gamma: f64, delta: f64, eps_tilde: f64 },
}

/// Sparse-series specification: one rescaled profile per level at shift
/// `k_star`, levels `ell_lo ..= trunc`, scaled by `amplitude`.
#[derive(Debug, Clone)]
pub struct SeriesSpec {
    pub k_star: i32,
    pub ell_lo: i32,
    pub trunc: i32,
    pub amplitude: f64,
    pub rule: CoefRule,
}

impl SeriesSpec {
    pub fn new(k_star: i32, ell_lo: i32, trunc: i32, amplitude: f64, rule: CoefRule) -> Result<Self> {
        if ell_lo < 1 || trunc < ell_lo {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= ell_lo <= trunc, got {ell_lo}, {trunc}"
            )));
        }
        if !(amplitude > 0.0) {
            return Err(Error::InvalidParameter("amplitude must be positive".into()));
        }
        if let CoefRule::FTilde { gamma, delta, eps_tilde } = rule {
            if !(delta > 0.0 && delta < gamma) {
                return Err(Error::InvalidParameter(format!(
                    "need 0 < delta < gamma, got delta={delta}, gamma={gamma}"
                )));
            }
            if !(eps_tilde > 0.0 && eps_tilde < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "need eps_tilde in (0,1), got {eps_tilde}"
                )));
            }
        }
        Ok(SeriesSpec {
            k_star,
            ell_lo,
            trunc,
            amplitude,
            rule,
        })
    }

    /// Unscaled coefficient at level `ell`.
    pub fn coefficient(&self, ell: i32) -> f64 {
        let l = ell as f64;
        match self.rule {
            CoefRule::GTilde { gamma } => (-l * (gamma + 0.5)).exp2(),
            CoefRule::FTilde { gamma, delta, eps_tilde } => {
                (-l * (gamma + 0.5)).exp2().max(eps_tilde * (-l * (gamma - delta + 0.5)).exp2())
            }
        }
    }

    /// Geometry checks against a kernel: the shift clears four combined
    /// support radii and the coarsest copy stays left of `a_left`.
    pub fn validate_for(&self, psi: &PsiProfile, kernel: &Kernel, a_left: f64) -> Result<()> {
        let c_sum = psi.support_radius() + kernel.support_radius();
        if (self.k_star as f64) <= 4.0 * c_sum {
            return Err(Error::InvalidParameter(format!(
                "k_star must exceed 4 (C_psi + C_K) = {}, got {}",
                4.0 * c_sum,
                self.k_star
            )));
        }
        if exp2i(-self.ell_lo) * (self.k_star as f64 + c_sum) >= a_left {
            return Err(Error::InvalidParameter(format!(
                "coarsest copy reaches past {a_left}: lower ell_lo or move k_star"
            )));
        }
        Ok(())
    }

    /// Sup-norm bound on the truncated tail, from the coefficient decay.
    pub fn tail_sup_bound(&self, psi: &PsiProfile) -> f64 {
        let sup_psi = psi.sup_deriv(0);
        let mut acc = 0.0;
        for ell in (self.trunc + 1)..(self.trunc + 120) {
            acc += self.coefficient(ell) * (0.5 * ell as f64).exp2();
        }
        self.amplitude * sup_psi * acc
    }

    /// Sample the series on `grid`.
    pub fn generate(&self, psi: &PsiProfile, grid: &Grid) -> Result<GridFunction> {
        if exp2i(-self.trunc) * psi.support_radius() < 4.0 * grid.step() {
            return Err(Error::GridTooCoarse(format!(
                "truncation level {} not resolvable; lower it or refine the grid",
                self.trunc
            )));
        }
        let mut values = vec![0.0; grid.nodes()];
        let h = grid.step();
        for ell in self.ell_lo..=self.trunc {
            let beta = self.amplitude * self.coefficient(ell);
            let amp = beta * (0.5 * ell as f64).exp2();
            let s = exp2i(ell);
            let center = exp2i(-ell) * self.k_star as f64;
            let radius = exp2i(-ell) * psi.support_radius();
            let first = (((center - radius) - grid.lo()) / h).floor().max(0.0) as usize;
            let last = ((((center + radius) - grid.lo()) / h).ceil() as usize).min(grid.m());
            for (i, v) in values.iter_mut().enumerate().take(last + 1).skip(first) {
                *v += amp * psi.eval(s * grid.node(i) - self.k_star as f64);
            }
        }
        GridFunction::from_values(*grid, values)
    }
}

/// Series with flat bias ratio at exponent `gamma`.
pub fn g_tilde(
    psi: &PsiProfile,
    gamma: f64,
    amplitude: f64,
    k_star: i32,
    ell_lo: i32,
    trunc: i32,
    grid: &Grid,
) -> Result<GridFunction> {
    SeriesSpec::new(k_star, ell_lo, trunc, amplitude, CoefRule::GTilde { gamma })?.generate(psi, grid)
}

/// Series whose bias ratio crosses over to exponent `gamma - delta`.
#[allow(clippy::too_many_arguments)]
pub fn f_tilde(
    psi: &PsiProfile,
    gamma: f64,
    delta: f64,
    eps_tilde: f64,
    amplitude: f64,
    k_star: i32,
    ell_lo: i32,
    trunc: i32,
    grid: &Grid,
) -> Result<GridFunction> {
    SeriesSpec::new(
        k_star,
        ell_lo,
        trunc,
        amplitude,
        CoefRule::FTilde { gamma, delta, eps_tilde },
    )?
    .generate(psi, grid)
}

/// L2 distance between the crossover series and its flat counterpart,
/// together with the closed-form bound
/// `amplitude * sqrt(2) * eps_tilde^{(2 gamma + 1)/(2 delta)}`.
#[allow(clippy::too_many_arguments)]
pub fn l2_gap(
    psi: &PsiProfile,
    gamma: f64,
    delta: f64,
    eps_tilde: f64,
    amplitude: f64,
    k_star: i32,
    ell_lo: i32,
    trunc: i32,
    grid: &Grid,
) -> Result<(f64, f64)> {
    let f = f_tilde(psi, gamma, delta, eps_tilde, amplitude, k_star, ell_lo, trunc, grid)?;
    let g = g_tilde(psi, gamma, amplitude, k_star, ell_lo, trunc, grid)?;
    let computed = f.sub(&g)?.l2_norm();
    let bound = amplitude * 2f64.sqrt() * eps_tilde.powf((2.0 * gamma + 1.0) / (2.0 * delta));
    Ok((computed, bound))
}

/// Crossover amount `delta_n = C_n / ln n` with
/// `C_n = (1 - 1/sqrt(ln n)) (2 gamma + 1) ln(1 / eps_tilde)`.
pub fn delta_n_sequence(n: f64, gamma: f64, eps_tilde: f64) -> Result<f64> {
    if !(n > std::f64::consts::E) {
        return Err(Error::InvalidParameter(format!("need n > e, got {n}")));
    }
    if !(eps_tilde > 0.0 && eps_tilde < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need eps_tilde in (0,1), got {eps_tilde}"
        )));
    }
    let ln_n = n.ln();
    let b_n = 1.0 / ln_n.sqrt();
    let c_n = (1.0 - b_n) * (2.0 * gamma + 1.0) * (1.0 / eps_tilde).ln();
    Ok(c_n / ln_n)
}

/// Disjointly supported bumps at the detection scale: `M_n` copies of
/// `kappa` of height `B h_n^gamma kappa(0)` spread over `[a, b]`.
#[allow(clippy::too_many_arguments)]
pub fn bump_alternatives(
    gamma: f64,
    b_const: f64,
    a: f64,
    b: f64,
    eta: f64,
    kappa: &PsiProfile,
    n: f64,
    sigma: f64,
    grid: &Grid,
) -> Result<Vec<GridFunction>> {
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("need a < b, got {a}, {b}")));
    }
    if !(kappa.value_at_zero() > 0.0) {
        return Err(Error::InvalidParameter("kappa(0) must be positive".into()));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("need eta in (0,1), got {eta}")));
    }
    let sigma_n = sigma / n.sqrt();
    if sigma_n >= 1.0 {
        return Err(Error::InvalidParameter("noise level must be below one".into()));
    }
    let a_kappa = kappa.support_radius();
    let kappa0 = kappa.value_at_zero();
    let l2sq = kappa.l2_sq();
    let c_const = ((4.0 / (2.0 * gamma + 1.0)) * b_const.powf(1.0 / gamma) / l2sq)
        .powf(gamma / (2.0 * gamma + 1.0))
        * kappa0;
    let h_n = ((1.0 - eta) * c_const / (b_const * kappa0)).powf(1.0 / gamma)
        * (sigma_n * sigma_n * (1.0 / sigma_n).ln()).powf(1.0 / (2.0 * gamma + 1.0));
    let m_n = ((b - a) / (2.0 * a_kappa * h_n)).floor() as i64 - 1;
    if m_n < 1 {
        return Err(Error::InvalidParameter(format!(
            "interval [{a}, {b}] too short for bump scale {h_n}"
        )));
    }
    if a_kappa * h_n < 4.0 * grid.step() {
        return Err(Error::GridTooCoarse(format!(
            "bump scale {h_n} not resolvable at step {}",
            grid.step()
        )));
    }
    let height = b_const * h_n.powf(gamma);
    let mut bumps = Vec::with_capacity(m_n as usize);
    for k in 1..=m_n {
        let center = a + (2 * k - 1) as f64 * a_kappa * h_n;
        bumps.push(GridFunction::sample(*grid, |x| {
            height * kappa.eval((x - center) / h_n)
        })?);
    }
    Ok(bumps)
}

/// Which formulation fixes the lower bias bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassVariant {
    /// Lower bound `epsilon * B`: the constant is a bias ratio.
    Standard,
    /// Lower bound fixed at `b1` regardless of `B`.
    FixedLowerBound { b1: f64 },
}

/// Identifies a self-similarity class `(gamma, B, epsilon; kernel, ell_lo)`.
#[derive(Debug, Clone)]
pub struct SelfSimClassSpec {
    pub gamma: f64,
    pub b: f64,
    pub epsilon: f64,
    pub ell_lo: i32,
    pub kernel: String,
    pub variant: ClassVariant,
}

impl SelfSimClassSpec {
    /// The bias-ratio constant, across both formulations.
    pub fn effective_epsilon(&self) -> f64 {
        match self.variant {
            ClassVariant::Standard => self.epsilon,
            ClassVariant::FixedLowerBound { b1 } => b1 / self.b,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MembershipRow {
    pub j: i32,
    pub bias: f64,
    /// `bias / (B 2^{-j gamma})`.
    pub ratio: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Numerical membership report: per-level bias ratios and the Hölder
/// check, each with 5% relative slack for grid effects.
#[derive(Debug, Clone)]
pub struct MembershipReport {
    pub rows: Vec<MembershipRow>,
    pub holder_seminorm: f64,
    pub holder_bound: f64,
    pub holder_ok: bool,
    pub passed: bool,
    pub truncation_tail: Option<f64>,
}

pub const MEMBERSHIP_SLACK: f64 = 0.05;

impl MembershipReport {
    pub fn min_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min)
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("j,bias,ratio,lower_ok,upper_ok\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.j, r.bias, r.ratio, r.lower_ok, r.upper_ok);
        }
        let _ = writeln!(
            out,
            "# holder_seminorm={} bound={} ok={} passed={} truncation_tail={}",
            self.holder_seminorm,
            self.holder_bound,
            self.holder_ok,
            self.passed,
            self.truncation_tail.map_or("n/a".to_string(), |t| t.to_string()),
        );
        out
    }
}

/// Check the two-sided bias envelope `eps <= ratio_j <= c_tilde` for
/// levels `ell_lo ..= j_hi` and the Hölder bound, with 5% slack.
pub fn check_membership(
    f: &GridFunction,
    class: &SelfSimClassSpec,
    j_hi: i32,
    c_tilde: f64,
    truncation_tail: Option<f64>,
) -> Result<MembershipReport> {
    let kernel = Kernel::by_name(&class.kernel)?;
    if j_hi < class.ell_lo {
        return Err(Error::InvalidParameter(format!(
            "j_hi {} below ell_lo {}",
            j_hi, class.ell_lo
        )));
    }
    if j_hi > kernel.j_max(&f.grid()) {
        return Err(Error::GridTooCoarse(format!(
            "j_hi {} beyond resolvable level {}",
            j_hi,
            kernel.j_max(&f.grid())
        )));
    }
    let eps = class.effective_epsilon();
    let mut rows = Vec::new();
    let mut passed = true;
    for j in class.ell_lo..=j_hi {
        let bias = kernel.bias_sup(j, f)?;
        let ratio = bias / (class.b * (-(j as f64) * class.gamma).exp2());
        let lower_ok = ratio >= eps * (1.0 - MEMBERSHIP_SLACK);
        let upper_ok = ratio <= c_tilde * (1.0 + MEMBERSHIP_SLACK);
        passed &= lower_ok && upper_ok;
        rows.push(MembershipRow {
            j,
            bias,
            ratio,
            lower_ok,
            upper_ok,
        });
    }
    let holder_seminorm = f.holder_seminorm(class.gamma)?;
    let holder_ok = holder_seminorm <= class.b * (1.0 + MEMBERSHIP_SLACK);
    passed &= holder_ok;
    Ok(MembershipReport {
        rows,
        holder_seminorm,
        holder_bound: class.b,
        holder_ok,
        passed,
        truncation_tail,
    })
}

/// Measured two-sided bias envelope of `f` at exponent `gamma`: the
/// largest `B` and ratio floor `eps` such that
/// `eps B 2^{-j gamma} <= bias_j <= B 2^{-j gamma}` holds exactly on the
/// grid for `j` in `j_lo ..= j_hi`, with small safety margins.
#[derive(Debug, Clone, Copy)]
pub struct BiasEnvelope {
    pub b_hat: f64,
    pub eps_hat: f64,
}

pub fn fit_bias_envelope(
    f: &GridFunction,
    kernel: &Kernel,
    gamma: f64,
    j_lo: i32,
    j_hi: i32,
) -> Result<BiasEnvelope> {
    if j_hi < j_lo {
        return Err(Error::EmptyInput("level range"));
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    for j in j_lo..=j_hi {
        let ratio = kernel.bias_sup(j, f)? / (-(j as f64) * gamma).exp2();
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    if !(min_ratio > 0.0) {
        return Err(Error::InvalidParameter(
            "bias vanishes at some level; no envelope".into(),
        ));
    }
    let b_hat = 1.02 * max_ratio;
    let eps_hat = 0.98 * min_ratio / b_hat;
    Ok(BiasEnvelope { b_hat, eps_hat })
}

/// Bias floor constant `sup_x |K_0 psi(x) - psi(x)|`, by dense scan with
/// fine inner quadrature.
pub fn bias_floor_constant(kernel: &Kernel, psi: &PsiProfile) -> f64 {
    let reach = psi.support_radius() + kernel.support_radius();
    let scan = 4001;
    let inner = 4096;
    let mut worst = 0.0f64;
    for i in 0..scan {
        let x = -reach + 2.0 * reach * i as f64 / (scan - 1) as f64;
        // K_0 psi(x) = integral over the psi support of K(x, y) psi(y).
        let lo = (x - kernel.support_radius()).max(-psi.support_radius());
        let hi = (x + kernel.support_radius()).min(psi.support_radius());
        let mut proj = 0.0;
        if hi > lo {
            let h = (hi - lo) / inner as f64;
            for q in 0..inner {
                let y = lo + (q as f64 + 0.5) * h;
                proj += kernel.eval(x, y) * psi.eval(y);
            }
            proj *= h;
        }
        worst = worst.max((proj - psi.eval(x)).abs());
    }
    worst
}

/// Hölder envelope constant of the series generators:
/// `2 sup|psi^(d+1)| (2 C_psi)^{1 - (gamma - d)}` with `d` the integer
/// part of `gamma`.
pub fn holder_bound_constant(psi: &PsiProfile, gamma: f64) -> f64 {
    let d = holder_integer_part(gamma);
    2.0 * psi.sup_deriv(d + 1)
        * (2.0 * psi.support_radius()).powf(1.0 - (gamma - d as f64))
}

/// Support interval of the projection of the level-`ell` copy under the
/// level-`j` kernel: `2^{-ell} k* +/- (2^{-ell} C_psi + 2^{-j} C_K)`.
pub fn projected_support(
    psi: &PsiProfile,
    kernel: &Kernel,
    k_star: i32,
    j: i32,
    ell: i32,
) -> (f64, f64) {
    let center = exp2i(-ell) * k_star as f64;
    let radius = exp2i(-ell) * psi.support_radius() + exp2i(-j) * kernel.support_radius();
    (center - radius, center + radius)
}
