//! Monte Carlo experiment harness: coverage, width-rate scans, the
//! self-similarity-constant penalty, and exponent-interval studies.
//!
//! A study is described by a flat config (see the README for the schema),
//! runs replications in parallel with per-replication derived seeds, and
//! aggregates in replication order, so output files are byte-identical for
//! any worker count. Wall-clock timings are reported separately for the
//! same reason.
//!
//! Test functions are certified in scale-comparison form before use: the
//! measured per-level bias envelope `(b_hat, eps_hat)` of each generated
//! function is what the band construction is told about the class, making
//! the event-conditional coverage an exact (grid-level) statement rather
//! than an asymptotic hope.

use std::fmt::Write as _;
use std::path::Path;

use crate::band::{build_band_from, BandConfig};
use crate::calibrate::{calibrate_cbar, CriticalValueRule, LevelRange};
use crate::config::FlatConfig;
use crate::error::{Error, Result};
use crate::exec;
use crate::families::{fit_bias_envelope, CoefRule, PsiProfile, SeriesSpec};
use crate::gamma::RegularityRanges;
use crate::grid::{Grid, GridFunction};
use crate::kernel::Kernel;
use crate::noise::{rng, synthesize, LevelEstimates};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Coverage,
    RateScan,
    EpsScan,
    GammaCi,
}

impl StudyKind {
    pub fn parse(s: &str) -> Result<StudyKind> {
        match s {
            "coverage" => Ok(StudyKind::Coverage),
            "rate-scan" => Ok(StudyKind::RateScan),
            "eps-scan" => Ok(StudyKind::EpsScan),
            "gamma-ci" => Ok(StudyKind::GammaCi),
            other => Err(Error::Config(format!("unknown study `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StudyKind::Coverage => "coverage",
            StudyKind::RateScan => "rate-scan",
            StudyKind::EpsScan => "eps-scan",
            StudyKind::GammaCi => "gamma-ci",
        }
    }
}

/// A generated test function with its exponent and envelope certificate.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub id: String,
    pub gamma: f64,
    pub f: GridFunction,
    pub b_hat: f64,
    pub eps_hat: f64,
    pub certified: bool,
}

/// One aggregated cell of a study.
#[derive(Debug, Clone)]
pub struct CellRecord {
    pub f_id: String,
    pub gamma: f64,
    pub n: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub b_hat: f64,
    pub eps_hat: f64,
    pub certified: bool,
    pub reps: usize,
    pub coverage: f64,
    pub coverage_mcse: f64,
    pub width_q50: f64,
    pub width_qbeta: f64,
    pub beta: f64,
    pub mean_jhat: f64,
    pub gamma_lo_mean: f64,
    pub gamma_hi_mean: f64,
    pub gamma_ci_width_q50: f64,
    pub gamma_cover_frac: f64,
    pub event4_freq: f64,
    pub event5_freq: f64,
    pub conditional_coverage: f64,
    pub conditional_count: usize,
    pub feasible_frac: f64,
    /// Wall milliseconds; reported in the timing sidecar only.
    pub wall_ms: u128,
}

/// Log-log (or log-inverse) scan fit for one function across cells.
#[derive(Debug, Clone)]
pub struct ScanFit {
    pub f_id: String,
    pub slope: f64,
    pub stderr: f64,
    pub monotone: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub study: StudyKind,
    pub cells: Vec<CellRecord>,
    pub fits: Vec<ScanFit>,
}

/// Ordinary least squares slope of `ys` on `xs` with its standard error.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    (slope, (sse / dof / sxx).sqrt())
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

/// Parsed study settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub study: StudyKind,
    pub kernel: Kernel,
    pub grid: Grid,
    pub levels: Option<LevelRange>,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub b_span: f64,
    pub epsilon_override: Option<f64>,
    pub eps_list: Vec<f64>,
    pub n_list: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub reps: usize,
    pub seed: u64,
    pub sigma: f64,
    pub calib_reps: usize,
    pub cbar_override: Option<f64>,
    pub family: String,
    pub family_gammas: Vec<f64>,
    pub amplitude: f64,
    pub k_star: i32,
    pub ell_lo: i32,
    pub trunc: i32,
    pub delta: f64,
    pub f_eps_tilde: f64,
}

impl Settings {
    pub fn from_config(cfg: &FlatConfig) -> Result<Settings> {
        let study = StudyKind::parse(cfg.get_str("study")?)?;
        let kernel = Kernel::by_name(cfg.get_str_or("kernel", "conv_poly"))?;
        let grid = Grid::estimation_with_cells(cfg.get_usize_or("grid_m", 1 << 14)?)?;
        let levels = if cfg.contains("levels") {
            Some(cfg.get_levels("levels")?)
        } else {
            None
        };
        let alpha = cfg.get_f64_or("alpha", 0.05)?;
        let beta = cfg.get_f64_or("beta", 0.5)?;
        if !(0.0 < 2.0 * alpha && 2.0 * alpha < beta && beta < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < 2 alpha < beta < 1, got alpha={alpha}, beta={beta}"
            )));
        }
        let reps = cfg.get_usize_or("reps", 200)?;
        if reps < 50 {
            return Err(Error::Config(format!("need reps >= 50, got {reps}")));
        }
        let trunc_default = (kernel.j_max(&grid)).min(
            ((1.0 / (4.0 * grid.step())).log2().floor()) as i32 - 2,
        );
        Ok(Settings {
            study,
            kernel,
            grid,
            levels,
            gamma_lo: cfg.get_f64_or("gamma_lo", 0.6)?,
            gamma_hi: cfg.get_f64_or("gamma_hi", 2.5)?,
            b_span: cfg.get_f64_or("b_span", 2.0)?,
            epsilon_override: if cfg.contains("epsilon") {
                Some(cfg.get_f64("epsilon")?)
            } else {
                None
            },
            eps_list: if cfg.contains("eps_list") {
                cfg.get_f64_list("eps_list")?
            } else {
                vec![0.5, 0.25, 0.125, 0.0625]
            },
            n_list: if cfg.contains("n_list") {
                cfg.get_f64_list("n_list")?
            } else {
                vec![(1u64 << 14) as f64]
            },
            alpha,
            beta,
            reps,
            seed: cfg.get_u64_or("seed", 20_240_001)?,
            sigma: cfg.get_f64_or("sigma", 0.1)?,
            calib_reps: cfg.get_usize_or("calib_reps", 2000)?,
            cbar_override: if cfg.contains("cbar") {
                Some(cfg.get_f64("cbar")?)
            } else {
                None
            },
            family: cfg.get_str_or("family", "g_tilde").to_string(),
            family_gammas: if cfg.contains("family_gammas") {
                cfg.get_f64_list("family_gammas")?
            } else {
                vec![1.0]
            },
            amplitude: cfg.get_f64_or("amplitude", 1.0)?,
            k_star: cfg.get_i32_or("k_star", 9)?,
            ell_lo: cfg.get_i32_or("ell_lo", 4)?,
            trunc: cfg.get_i32_or("trunc", trunc_default)?,
            delta: cfg.get_f64_or("delta", 0.5)?,
            f_eps_tilde: cfg.get_f64_or("f_eps_tilde", 0.25)?,
        })
    }

    /// Level set for sample size `n`: explicit config, else the default
    /// schedule clamped to the family floor and the truncation level.
    pub fn levels_for(&self, n: f64) -> Result<LevelRange> {
        if let Some(levels) = self.levels {
            return Ok(levels);
        }
        let d = crate::calibrate::default_levels(n, self.gamma_lo, &self.kernel, &self.grid)?;
        LevelRange::new(d.lo.max(self.ell_lo), d.hi.min(self.trunc))
    }

    /// Generate and certify the study's test functions.
    pub fn build_family(&self, levels: LevelRange) -> Result<Vec<TestFunction>> {
        let psi = PsiProfile::standard();
        let mut out = Vec::new();
        for &g in &self.family_gammas {
            let (rule, id, cert_gamma) = match self.family.as_str() {
                "g_tilde" => (
                    CoefRule::GTilde { gamma: g },
                    format!("g_tilde(gamma={g})"),
                    g,
                ),
                "f_tilde" => (
                    CoefRule::FTilde {
                        gamma: g,
                        delta: self.delta,
                        eps_tilde: self.f_eps_tilde,
                    },
                    format!("f_tilde(gamma={g},delta={})", self.delta),
                    g - self.delta,
                ),
                other => return Err(Error::Config(format!("unknown family `{other}`"))),
            };
            let spec = SeriesSpec::new(self.k_star, self.ell_lo, self.trunc, self.amplitude, rule)?;
            spec.validate_for(&psi, &self.kernel, 1.0)?;
            let f = spec.generate(&psi, &self.grid)?;
            let env = fit_bias_envelope(&f, &self.kernel, cert_gamma, levels.lo, levels.hi)?;
            // Re-verify the envelope on the grid; it holds by construction.
            let mut certified = true;
            for j in levels.lo..=levels.hi {
                let ratio =
                    self.kernel.bias_sup(j, &f)? / (-(j as f64) * cert_gamma).exp2();
                certified &= ratio <= env.b_hat && ratio >= env.eps_hat * env.b_hat;
            }
            out.push(TestFunction {
                id,
                gamma: cert_gamma,
                f,
                b_hat: env.b_hat,
                eps_hat: env.eps_hat,
                certified,
            });
        }
        Ok(out)
    }
}

/// Per-replication outcome.
struct RepOutcome {
    covered: bool,
    width: f64,
    feasible: bool,
    ev4: bool,
    ev5: bool,
    gamma_in: bool,
    jhat: i32,
    gci_lo: f64,
    gci_hi: f64,
}

/// Truth quantities cached per cell: projections and scale comparisons of
/// the known signal.
struct CellTruth {
    projections: Vec<GridFunction>,
    deltas: Vec<Vec<f64>>,
    lo: i32,
}

impl CellTruth {
    fn compute(kernel: &Kernel, f: &GridFunction, levels: LevelRange) -> Result<CellTruth> {
        let projections: Vec<GridFunction> = levels
            .iter()
            .map(|j| kernel.project(j, f))
            .collect::<Result<_>>()?;
        let count = levels.len();
        let mut deltas = vec![vec![0.0; count]; count];
        for a in 0..count {
            for b in (a + 1)..count {
                let d = projections[a]
                    .sub(&projections[b])?
                    .sup_norm_on((0.0, 1.0))?;
                deltas[a][b] = d;
                deltas[b][a] = d;
            }
        }
        Ok(CellTruth {
            projections,
            deltas,
            lo: levels.lo,
        })
    }

    fn projection(&self, j: i32) -> &GridFunction {
        &self.projections[(j - self.lo) as usize]
    }

    fn delta(&self, j: i32, j2: i32) -> f64 {
        self.deltas[(j - self.lo) as usize][(j2 - self.lo) as usize]
    }
}

fn run_cell(
    settings: &Settings,
    tf: &TestFunction,
    n: f64,
    epsilon: f64,
    cbar: f64,
    levels: LevelRange,
    cell_seed: u64,
) -> Result<CellRecord> {
    let start = std::time::Instant::now();
    let sigma_n = settings.sigma / n.sqrt();
    let rule = CriticalValueRule::new(cbar, sigma_n.max(f64::MIN_POSITIVE), levels)?;
    let ranges = RegularityRanges::new(
        settings.gamma_lo,
        settings.gamma_hi,
        tf.b_hat / settings.b_span,
        tf.b_hat * settings.b_span,
        epsilon,
    )?;
    let cfg = BandConfig::new(epsilon, 1.0, ranges, rule)?;
    let truth = CellTruth::compute(&settings.kernel, &tf.f, levels)?;

    let outcomes: Vec<Result<RepOutcome>> = exec::map_indexed(settings.reps, |r| {
        let seed = rng::derive_seed(cell_seed, r as u64);
        let obs = synthesize(&tf.f, settings.sigma, n, &settings.grid, seed)?;
        let est = LevelEstimates::compute(&obs, &settings.kernel, (levels.lo, levels.hi))?;
        let band = build_band_from(&est, &cfg)?;

        let mut ev4 = true;
        for j in levels.iter() {
            let dev = est.sup_deviation_from(j, truth.projection(j));
            ev4 &= dev <= rule.critical_value(j)?;
        }
        let mut ev5 = true;
        for j in levels.iter() {
            for j2 in (j + 1)..=levels.hi {
                let diff = (est.delta_hat(j, j2) - truth.delta(j, j2)).abs();
                ev5 &= diff <= rule.tilde_critical(j, j2)?;
            }
        }
        let covered = band.covers(&tf.f)?;
        let gamma_in = band.gamma_interval.contains(tf.gamma);
        Ok(RepOutcome {
            covered,
            width: 2.0 * band.half_width,
            feasible: band.feasible,
            ev4,
            ev5,
            gamma_in,
            jhat: band.chosen.map_or(0, |(j, _, _)| j),
            gci_lo: band.gamma_interval.lo,
            gci_hi: band.gamma_interval.hi,
        })
    });
    let outcomes: Vec<RepOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let reps = outcomes.len();
    let repsf = reps as f64;
    let coverage = outcomes.iter().filter(|o| o.covered).count() as f64 / repsf;
    let mut widths: Vec<f64> = outcomes.iter().map(|o| o.width).collect();
    widths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut gci_widths: Vec<f64> = outcomes.iter().map(|o| o.gci_hi - o.gci_lo).collect();
    gci_widths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let feasible = outcomes.iter().filter(|o| o.feasible).count();
    let cond_n = outcomes.iter().filter(|o| o.ev4 && o.ev5).count();
    let cond_cov = if cond_n == 0 {
        1.0
    } else {
        outcomes
            .iter()
            .filter(|o| o.ev4 && o.ev5 && o.covered)
            .count() as f64
            / cond_n as f64
    };

    Ok(CellRecord {
        f_id: tf.id.clone(),
        gamma: tf.gamma,
        n,
        sigma: settings.sigma,
        epsilon,
        b_hat: tf.b_hat,
        eps_hat: tf.eps_hat,
        certified: tf.certified,
        reps,
        coverage,
        coverage_mcse: (coverage * (1.0 - coverage) / repsf).sqrt(),
        width_q50: quantile(&widths, 0.5),
        width_qbeta: quantile(&widths, settings.beta),
        beta: settings.beta,
        mean_jhat: outcomes
            .iter()
            .filter(|o| o.feasible)
            .map(|o| o.jhat as f64)
            .sum::<f64>()
            / (feasible.max(1)) as f64,
        gamma_lo_mean: outcomes.iter().map(|o| o.gci_lo).sum::<f64>() / repsf,
        gamma_hi_mean: outcomes.iter().map(|o| o.gci_hi).sum::<f64>() / repsf,
        gamma_ci_width_q50: quantile(&gci_widths, 0.5),
        gamma_cover_frac: outcomes.iter().filter(|o| o.gamma_in).count() as f64 / repsf,
        event4_freq: outcomes.iter().filter(|o| o.ev4).count() as f64 / repsf,
        event5_freq: outcomes.iter().filter(|o| o.ev5).count() as f64 / repsf,
        conditional_coverage: cond_cov,
        conditional_count: cond_n,
        feasible_frac: feasible as f64 / repsf,
        wall_ms: start.elapsed().as_millis(),
    })
}

/// Calibration store: `cbar` values keyed by kernel, level range, target
/// and grid size, persisted as CSV.
pub struct CalibrationStore {
    entries: Vec<(String, String, f64, usize, f64)>,
}

impl CalibrationStore {
    pub fn load<P: AsRef<Path>>(path: P) -> CalibrationStore {
        let mut entries = Vec::new();
        if let Ok(text) = std::fs::read_to_string(path) {
            for line in text.lines().skip(1) {
                let parts: Vec<&str> = line.split(',').collect();
                if parts.len() == 5 {
                    if let (Ok(t), Ok(m), Ok(c)) = (
                        parts[2].parse::<f64>(),
                        parts[3].parse::<usize>(),
                        parts[4].parse::<f64>(),
                    ) {
                        entries.push((parts[0].to_string(), parts[1].to_string(), t, m, c));
                    }
                }
            }
        }
        CalibrationStore { entries }
    }

    pub fn lookup(
        &self,
        kernel: &str,
        levels: LevelRange,
        target: f64,
        grid_m: usize,
    ) -> Option<f64> {
        let lv = levels.to_string();
        self.entries
            .iter()
            .find(|(k, l, t, m, _)| k == kernel && *l == lv && *t == target && *m == grid_m)
            .map(|e| e.4)
    }

    pub fn insert(
        &mut self,
        kernel: &str,
        levels: LevelRange,
        target: f64,
        grid_m: usize,
        cbar: f64,
    ) {
        self.entries
            .push((kernel.to_string(), levels.to_string(), target, grid_m, cbar));
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = String::from("kernel,levels,target,grid_m,cbar\n");
        for (k, l, t, m, c) in &self.entries {
            let _ = writeln!(out, "{k},{l},{t},{m},{c}");
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Run a study described by a flat config.
pub fn run_study(cfg: &FlatConfig) -> Result<ExperimentResult> {
    let settings = Settings::from_config(cfg)?;
    let target = 1.0 - settings.alpha;

    let mut cells = Vec::new();
    let mut calibrations: Vec<(LevelRange, f64)> = Vec::new();
    let cbar_for = |calibrations: &mut Vec<(LevelRange, f64)>,
                        levels: LevelRange|
     -> Result<f64> {
        if let Some(c) = settings.cbar_override {
            return Ok(c);
        }
        if let Some(&(_, c)) = calibrations.iter().find(|(l, _)| *l == levels) {
            return Ok(c);
        }
        let c = calibrate_cbar(
            &settings.kernel,
            levels,
            target,
            settings.calib_reps,
            &settings.grid,
            rng::derive_seed(settings.seed, 0xCA11),
        )?;
        calibrations.push((levels, c));
        Ok(c)
    };

    match settings.study {
        StudyKind::Coverage | StudyKind::GammaCi | StudyKind::RateScan => {
            let levels0 = settings.levels_for(settings.n_list[0])?;
            let family = settings.build_family(levels0)?;
            if settings.study == StudyKind::RateScan && settings.n_list.len() < 4 {
                return Err(Error::Config(
                    "rate scan needs at least 4 sample sizes".into(),
                ));
            }
            for (fi, tf) in family.iter().enumerate() {
                for (ni, &n) in settings.n_list.iter().enumerate() {
                    let levels = settings.levels_for(n)?;
                    let cbar = cbar_for(&mut calibrations, levels)?;
                    let eps = settings.epsilon_override.unwrap_or(tf.eps_hat);
                    let cell_seed = rng::derive_seed(settings.seed, 1 + (fi * 1000 + ni) as u64);
                    cells.push(run_cell(&settings, tf, n, eps, cbar, levels, cell_seed)?);
                }
            }
        }
        StudyKind::EpsScan => {
            if settings.eps_list.len() < 4 {
                return Err(Error::Config("eps scan needs at least 4 values".into()));
            }
            let n = settings.n_list[0];
            let levels = settings.levels_for(n)?;
            let family = settings.build_family(levels)?;
            let cbar = cbar_for(&mut calibrations, levels)?;
            for (fi, tf) in family.iter().enumerate() {
                // Shared seed across the scan: widths are then monotone in
                // the constant draw by draw, not just on average.
                let cell_seed = rng::derive_seed(settings.seed, 1 + fi as u64);
                for &eps in &settings.eps_list {
                    cells.push(run_cell(&settings, tf, n, eps, cbar, levels, cell_seed)?);
                }
            }
        }
    }

    // Scan fits: width medians against log n or log(1/eps).
    let mut fits = Vec::new();
    match settings.study {
        StudyKind::RateScan | StudyKind::EpsScan => {
            let ids: Vec<String> = {
                let mut v: Vec<String> = cells.iter().map(|c| c.f_id.clone()).collect();
                v.dedup();
                v
            };
            for id in ids {
                let sub: Vec<&CellRecord> = cells.iter().filter(|c| c.f_id == id).collect();
                let (xs, ys): (Vec<f64>, Vec<f64>) = match settings.study {
                    StudyKind::RateScan => {
                        sub.iter().map(|c| (c.n.ln(), c.width_q50.ln())).unzip()
                    }
                    _ => sub
                        .iter()
                        .map(|c| ((1.0 / c.epsilon).ln(), c.width_q50.ln()))
                        .unzip(),
                };
                if ys.iter().any(|y| !y.is_finite()) {
                    fits.push(ScanFit {
                        f_id: id,
                        slope: f64::NAN,
                        stderr: f64::NAN,
                        monotone: false,
                    });
                    continue;
                }
                let (slope, stderr) = fit_line(&xs, &ys);
                let monotone = ys.windows(2).all(|w| w[1] >= w[0] - 1e-12)
                    || ys.windows(2).all(|w| w[1] <= w[0] + 1e-12);
                fits.push(ScanFit {
                    f_id: id,
                    slope,
                    stderr,
                    monotone,
                });
            }
        }
        _ => {}
    }

    Ok(ExperimentResult {
        study: settings.study,
        cells,
        fits,
    })
}

impl ExperimentResult {
    /// Deterministic results CSV (timings excluded by design).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "f_id,gamma,n,sigma,epsilon,b_hat,eps_hat,certified,reps,coverage,coverage_mcse,\
             width_q50,width_qbeta,beta,mean_jhat,gamma_lo_mean,gamma_hi_mean,gamma_ci_width_q50,\
             gamma_cover_frac,event4_freq,event5_freq,conditional_coverage,conditional_count,feasible_frac\n",
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.f_id,
                c.gamma,
                c.n,
                c.sigma,
                c.epsilon,
                c.b_hat,
                c.eps_hat,
                c.certified,
                c.reps,
                c.coverage,
                c.coverage_mcse,
                c.width_q50,
                c.width_qbeta,
                c.beta,
                c.mean_jhat,
                c.gamma_lo_mean,
                c.gamma_hi_mean,
                c.gamma_ci_width_q50,
                c.gamma_cover_frac,
                c.event4_freq,
                c.event5_freq,
                c.conditional_coverage,
                c.conditional_count,
                c.feasible_frac,
            );
        }
        out
    }

    /// x/y series for external plotting.
    pub fn plotdata(&self) -> Option<String> {
        match self.study {
            StudyKind::RateScan => {
                let mut out = String::from("f_id,log2_n,log2_width_q50\n");
                for c in &self.cells {
                    let _ = writeln!(out, "{},{},{}", c.f_id, c.n.log2(), c.width_q50.log2());
                }
                Some(out)
            }
            StudyKind::EpsScan => {
                let mut out = String::from("f_id,log2_inv_eps,log2_width_q50\n");
                for c in &self.cells {
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        c.f_id,
                        (1.0 / c.epsilon).log2(),
                        c.width_q50.log2()
                    );
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn fits_csv(&self) -> Option<String> {
        if self.fits.is_empty() {
            return None;
        }
        let mut out = String::from("f_id,slope,stderr,monotone\n");
        for f in &self.fits {
            let _ = writeln!(out, "{},{},{},{}", f.f_id, f.slope, f.stderr, f.monotone);
        }
        Some(out)
    }

    pub fn timing_report(&self) -> String {
        let mut out = String::from("f_id,n,epsilon,wall_ms\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{}", c.f_id, c.n, c.epsilon, c.wall_ms);
        }
        out
    }
}

/// Run a study and write `results.csv`, `config_echo`, optional
/// `plotdata_*.csv` and `fits.csv`, plus a timing sidecar.
pub fn run_study_to_dir<P: AsRef<Path>>(cfg: &FlatConfig, out_dir: P) -> Result<ExperimentResult> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let result = run_study(cfg)?;
    std::fs::write(out_dir.join("results.csv"), result.to_csv())?;
    std::fs::write(out_dir.join("config_echo"), cfg.echo())?;
    if let Some(pd) = result.plotdata() {
        let name = format!("plotdata_{}.csv", result.study.name().replace('-', "_"));
        std::fs::write(out_dir.join(name), pd)?;
    }
    if let Some(fc) = result.fits_csv() {
        std::fs::write(out_dir.join("fits.csv"), fc)?;
    }
    std::fs::write(out_dir.join("timings.txt"), result.timing_report())?;
    Ok(result)
}
