//! Command-line front end: calibration, single bands, exponent intervals,
//! test-function generation, membership checks, and Monte Carlo studies.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use selfsim_bands::band::{build_band, BandConfig};
use selfsim_bands::calibrate::{calibrate_cbar, CriticalValueRule, LevelRange};
use selfsim_bands::config::FlatConfig;
use selfsim_bands::error::{Error, Result};
use selfsim_bands::exec;
use selfsim_bands::experiment::{self, CalibrationStore, Settings};
use selfsim_bands::families::{
    check_membership, ClassVariant, CoefRule, PsiProfile, SelfSimClassSpec, SeriesSpec,
};
use selfsim_bands::gamma::{self, RegularityRanges};
use selfsim_bands::grid::Grid;
use selfsim_bands::kernel::Kernel;
use selfsim_bands::noise::{rng, synthesize, Observation};

#[derive(Parser)]
#[command(
    name = "selfsim-bands",
    version,
    about = "Adaptive confidence bands under self-similarity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigArg {
    /// Flat key = value config file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo calibration of the critical-value constant.
    Calibrate {
        /// Config file (optional; flags below override its keys).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        kernel: Option<String>,
        /// Level range lo..hi.
        #[arg(long)]
        levels: Option<String>,
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid_m: Option<usize>,
    },
    /// Build one confidence band and write band.csv + band_meta.json.
    Band(ConfigArg),
    /// Exponent interval for one observation; writes gamma_ci.csv.
    GammaCi(ConfigArg),
    /// Generate test functions; writes function CSVs.
    Gen(ConfigArg),
    /// Class-membership check of a generated function; writes membership.csv.
    Check(ConfigArg),
    /// Coverage study.
    Coverage(ConfigArg),
    /// Width against sample size.
    RateScan(ConfigArg),
    /// Width against the self-similarity constant.
    EpsScan(ConfigArg),
}

fn load_config(arg: &ConfigArg) -> Result<FlatConfig> {
    let mut cfg = FlatConfig::from_file(&arg.config)?;
    if let Some(seed) = arg.seed {
        cfg.set("seed", seed);
    }
    Ok(cfg)
}

/// Build one observation from a config: read `observation = path` if
/// given, else synthesize from the configured family.
fn observation_from(
    cfg: &FlatConfig,
    settings: &Settings,
) -> Result<(Observation, Option<String>)> {
    let n = settings.n_list[0];
    if cfg.contains("observation") {
        let path = cfg.get_str("observation")?;
        let text = std::fs::read_to_string(path)?;
        let mut increments = Vec::new();
        for line in text.lines().skip(1) {
            let v = line
                .split(',')
                .nth(1)
                .ok_or_else(|| Error::Config("observation CSV needs x_mid,dy".into()))?;
            increments.push(
                v.trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("observation CSV: {e}")))?,
            );
        }
        let obs = Observation::from_parts(settings.grid, increments, settings.sigma, n, 0)?;
        return Ok((obs, None));
    }
    let levels = settings.levels_for(n)?;
    let family = settings.build_family(levels)?;
    let tf = &family[0];
    let obs = synthesize(&tf.f, settings.sigma, n, &settings.grid, settings.seed)?;
    Ok((obs, Some(tf.id.clone())))
}

fn band_setup(
    cfg: &FlatConfig,
    settings: &Settings,
    out: &PathBuf,
) -> Result<(CriticalValueRule, RegularityRanges, f64)> {
    let n = settings.n_list[0];
    let levels = settings.levels_for(n)?;
    let target = 1.0 - settings.alpha;
    let store_path = out.join("cbar_cache.csv");
    let mut store = CalibrationStore::load(&store_path);
    let cbar = match settings.cbar_override {
        Some(c) => c,
        None => match store.lookup(settings.kernel.name(), levels, target, settings.grid.m()) {
            Some(c) => c,
            None => {
                let c = calibrate_cbar(
                    &settings.kernel,
                    levels,
                    target,
                    settings.calib_reps,
                    &settings.grid,
                    rng::derive_seed(settings.seed, 0xCA11),
                )?;
                std::fs::create_dir_all(out)?;
                store.insert(settings.kernel.name(), levels, target, settings.grid.m(), c);
                store.save(&store_path)?;
                c
            }
        },
    };
    let sigma_n = settings.sigma / n.sqrt();
    let rule = CriticalValueRule::new(cbar, sigma_n, levels)?;
    let family = settings.build_family(levels)?;
    let tf = &family[0];
    let epsilon = settings.epsilon_override.unwrap_or(tf.eps_hat);
    let ranges = RegularityRanges::new(
        settings.gamma_lo,
        settings.gamma_hi,
        tf.b_hat / settings.b_span,
        tf.b_hat * settings.b_span,
        epsilon,
    )?;
    Ok((rule, ranges, cfg.get_f64_or("c_tilde", 1.0)?))
}

fn cmd_band(arg: &ConfigArg, out: &PathBuf) -> Result<()> {
    let cfg = load_config(arg)?;
    let settings = Settings::from_config(&cfg)?;
    let (rule, ranges, c_tilde) = band_setup(&cfg, &settings, out)?;
    let (obs, f_id) = observation_from(&cfg, &settings)?;
    let band_cfg = BandConfig::new(ranges.epsilon, c_tilde, ranges, rule)?;
    let band = build_band(&obs, &settings.kernel, &band_cfg)?;

    std::fs::create_dir_all(out)?;
    let grid = obs.grid();
    let (first, last) = grid.node_range_in(0.0, 1.0)?;
    let mut csv = String::from("x,lower,upper\n");
    for i in first..=last {
        use std::fmt::Write as _;
        let c = band.center.value(i);
        let _ = writeln!(
            csv,
            "{},{},{}",
            grid.node(i),
            c - band.half_width,
            c + band.half_width
        );
    }
    std::fs::write(out.join("band.csv"), csv)?;

    let meta = serde_json::json!({
        "feasible": band.feasible,
        "half_width": band.half_width,
        "chosen": band.chosen.map(|(j, j1, j2)| vec![j, j1, j2]),
        "gamma_interval": {
            "lo": band.gamma_interval.lo,
            "hi": band.gamma_interval.hi,
            "crossed": band.gamma_interval.crossed,
        },
        "epsilon": band_cfg.epsilon,
        "c_tilde": band_cfg.c_tilde,
        "cbar": rule.cbar(),
        "sigma_n": rule.sigma_n(),
        "levels": rule.levels().to_string(),
        "function": f_id,
    });
    std::fs::write(
        out.join("band_meta.json"),
        serde_json::to_string_pretty(&meta)
            .map_err(|e| Error::Config(format!("metadata: {e}")))?,
    )?;
    println!(
        "band: feasible={} half_width={} chosen={:?} gamma=[{}, {}]",
        band.feasible, band.half_width, band.chosen, band.gamma_interval.lo, band.gamma_interval.hi
    );
    Ok(())
}

fn cmd_gamma_ci(arg: &ConfigArg, out: &PathBuf) -> Result<()> {
    let cfg = load_config(arg)?;
    let settings = Settings::from_config(&cfg)?;
    let (rule, ranges, _) = band_setup(&cfg, &settings, out)?;
    let (obs, _) = observation_from(&cfg, &settings)?;
    let pairs = gamma::pairs_with_gap(rule.levels(), 2);
    let gi = gamma::gamma_interval(&obs, &settings.kernel, &rule, &ranges, &pairs)?;
    std::fs::create_dir_all(out)?;
    let mut csv = String::from("gamma_lo,gamma_hi,crossed\n");
    use std::fmt::Write as _;
    let _ = writeln!(csv, "{},{},{}", gi.lo, gi.hi, gi.crossed);
    csv.push_str("witness_j1,witness_j2,kind\n");
    for w in &gi.witnesses {
        let _ = writeln!(
            csv,
            "{},{},{}",
            w.j1,
            w.j2,
            match w.kind {
                gamma::BoundKind::Lower => "lower",
                gamma::BoundKind::Upper => "upper",
            }
        );
    }
    std::fs::write(out.join("gamma_ci.csv"), csv)?;
    println!("gamma interval: [{}, {}] crossed={}", gi.lo, gi.hi, gi.crossed);
    Ok(())
}

fn cmd_gen(arg: &ConfigArg, out: &PathBuf) -> Result<()> {
    let cfg = load_config(arg)?;
    let settings = Settings::from_config(&cfg)?;
    std::fs::create_dir_all(out)?;
    match settings.family.as_str() {
        "bumps" => {
            let kappa = PsiProfile::bump_kappa(4, settings.gamma_hi);
            let gamma = settings.family_gammas[0];
            let n = settings.n_list[0];
            let bumps = selfsim_bands::families::bump_alternatives(
                gamma,
                cfg.get_f64_or("b_const", 1.0)?,
                cfg.get_f64_or("interval_lo", 0.5)?,
                cfg.get_f64_or("interval_hi", 1.0)?,
                cfg.get_f64_or("eta", 0.1)?,
                &kappa,
                n,
                settings.sigma,
                &settings.grid,
            )?;
            for (k, b) in bumps.iter().enumerate() {
                b.write_csv(out.join(format!("function_bump{k}.csv")))?;
            }
            println!("wrote {} bump functions", bumps.len());
        }
        _ => {
            let levels = settings.levels_for(settings.n_list[0])?;
            let family = settings.build_family(levels)?;
            for tf in &family {
                let name = format!("function_{}.csv", tf.id.replace(['(', ')', '=', ','], "_"));
                tf.f.write_csv(out.join(&name))?;
                println!(
                    "wrote {name}: gamma={} b_hat={} eps_hat={}",
                    tf.gamma, tf.b_hat, tf.eps_hat
                );
            }
        }
    }
    Ok(())
}

fn cmd_check(arg: &ConfigArg, out: &PathBuf) -> Result<()> {
    let cfg = load_config(arg)?;
    let settings = Settings::from_config(&cfg)?;
    let psi = PsiProfile::standard();
    let gamma = settings.family_gammas[0];
    let rule = match settings.family.as_str() {
        "f_tilde" => CoefRule::FTilde {
            gamma,
            delta: settings.delta,
            eps_tilde: settings.f_eps_tilde,
        },
        _ => CoefRule::GTilde { gamma },
    };
    let spec = SeriesSpec::new(
        settings.k_star,
        settings.ell_lo,
        settings.trunc,
        settings.amplitude,
        rule,
    )?;
    let f = spec.generate(&psi, &settings.grid)?;
    let class = SelfSimClassSpec {
        gamma: cfg.get_f64_or("class_gamma", gamma)?,
        b: cfg.get_f64("class_b")?,
        epsilon: cfg.get_f64("class_epsilon")?,
        ell_lo: settings.ell_lo,
        kernel: settings.kernel.name().to_string(),
        variant: ClassVariant::Standard,
    };
    let j_hi = cfg.get_i32_or("j_hi", settings.trunc)?;
    let c_tilde = cfg.get_f64_or("c_tilde", 1.5)?;
    let report = check_membership(&f, &class, j_hi, c_tilde, Some(spec.tail_sup_bound(&psi)))?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("membership.csv"), report.to_csv())?;
    println!(
        "membership: passed={} min_ratio={:.4} max_ratio={:.4} holder={:.4}",
        report.passed,
        report.min_ratio(),
        report.max_ratio(),
        report.holder_seminorm
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_calibrate(
    config: &Option<PathBuf>,
    kernel: &Option<String>,
    levels: &Option<String>,
    target: Option<f64>,
    reps: Option<usize>,
    seed: Option<u64>,
    grid_m: Option<usize>,
    out: &PathBuf,
) -> Result<()> {
    let mut cfg = match config {
        Some(p) => FlatConfig::from_file(p)?,
        None => FlatConfig::default(),
    };
    if let Some(k) = kernel {
        cfg.set("kernel", k);
    }
    if let Some(l) = levels {
        cfg.set("levels", l);
    }
    let kernel = Kernel::by_name(cfg.get_str_or("kernel", "conv_poly"))?;
    let levels: LevelRange = cfg.get_levels("levels")?;
    let target = target.map_or_else(|| cfg.get_f64_or("target", 0.95), Ok)?;
    let reps = reps.map_or_else(|| cfg.get_usize_or("reps", 2000), Ok)?;
    let seed = seed.map_or_else(|| cfg.get_u64_or("seed", 20_240_001), Ok)?;
    let grid_m = grid_m.map_or_else(|| cfg.get_usize_or("grid_m", 1 << 14), Ok)?;
    let grid = Grid::estimation_with_cells(grid_m)?;

    let cbar = calibrate_cbar(&kernel, levels, target, reps, &grid, seed)?;
    std::fs::create_dir_all(out)?;
    let store_path = out.join("cbar_cache.csv");
    let mut store = CalibrationStore::load(&store_path);
    store.insert(kernel.name(), levels, target, grid_m, cbar);
    store.save(&store_path)?;

    // Diagnostics: quantile profile of the pure-noise statistic.
    let mut diag = String::from("quantile,cbar\n");
    use std::fmt::Write as _;
    for q in [0.5, 0.8, 0.9, 0.95, 0.975, 0.99] {
        let c = calibrate_cbar(&kernel, levels, q, reps, &grid, seed)?;
        let _ = writeln!(diag, "{q},{c}");
    }
    std::fs::write(out.join("calibration.csv"), diag)?;
    println!(
        "cbar = {cbar} (kernel={}, levels={}, target={target}, reps={reps}, grid_m={grid_m})",
        kernel.name(),
        levels
    );
    Ok(())
}

fn cmd_study(arg: &ConfigArg, out: &PathBuf) -> Result<()> {
    let cfg = load_config(arg)?;
    let result = experiment::run_study_to_dir(&cfg, out)?;
    for c in &result.cells {
        println!(
            "{} n={} eps={:.4}: coverage={:.3} width_q50={:.4} events=({:.3},{:.3}) feasible={:.2}",
            c.f_id,
            c.n,
            c.epsilon,
            c.coverage,
            c.width_q50,
            c.event4_freq,
            c.event5_freq,
            c.feasible_frac
        );
    }
    for f in &result.fits {
        println!(
            "{}: slope={:.3} (se {:.3}) monotone={}",
            f.f_id, f.slope, f.stderr, f.monotone
        );
    }
    println!("results in {}", out.display());
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let workers = cli.workers;
    let run = move || -> Result<()> {
        match &cli.command {
            Command::Calibrate {
                config,
                kernel,
                levels,
                target,
                reps,
                seed,
                grid_m,
            } => cmd_calibrate(config, kernel, levels, *target, *reps, *seed, *grid_m, &out),
            Command::Band(arg) => cmd_band(arg, &out),
            Command::GammaCi(arg) => cmd_gamma_ci(arg, &out),
            Command::Gen(arg) => cmd_gen(arg, &out),
            Command::Check(arg) => cmd_check(arg, &out),
            Command::Coverage(arg) | Command::RateScan(arg) | Command::EpsScan(arg) => {
                cmd_study(arg, &out)
            }
        }
    };
    if let Err(e) = exec::with_workers(workers, run) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
