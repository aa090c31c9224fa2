use selfsim_bands::band::{build_band_from, BandConfig};
use selfsim_bands::calibrate::{calibrate_cbar, CriticalValueRule, LevelRange};
use selfsim_bands::families::{fit_bias_envelope, g_tilde, PsiProfile};
use selfsim_bands::gamma::RegularityRanges;
use selfsim_bands::grid::Grid;
use selfsim_bands::kernel::Kernel;
use selfsim_bands::noise::{rng, synthesize, LevelEstimates};

fn median_width(
    kernel: &Kernel,
    f: &selfsim_bands::grid::GridFunction,
    cfg: &BandConfig,
    sigma: f64,
    n: f64,
    reps: u64,
    seed: u64,
) -> (f64, f64, f64) {
    let grid = f.grid();
    let levels = cfg.rule.levels();
    let mut widths = vec![];
    let mut jh = 0.0f64;
    let mut feas = 0.0f64;
    for r in 0..reps {
        let obs = synthesize(f, sigma, n, &grid, rng::derive_seed(seed, r)).unwrap();
        let est = LevelEstimates::compute(&obs, kernel, (levels.lo, levels.hi)).unwrap();
        let band = build_band_from(&est, cfg).unwrap();
        widths.push(band.half_width * 2.0);
        if let Some((j, _, _)) = band.chosen {
            jh += j as f64;
            feas += 1.0;
        }
    }
    widths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (widths[widths.len() / 2], jh / feas.max(1.0), feas / reps as f64)
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx: f64 = xs.iter().sum::<f64>() / n;
    let my: f64 = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn main() {
    let grid = Grid::default_estimation();
    let kernel = Kernel::conv_poly();
    let psi = PsiProfile::standard();
    let levels = LevelRange::new(4, 9).unwrap();
    let cbar = calibrate_cbar(&kernel, levels, 0.95, 500, &grid, 1).unwrap();

    // Rate scan over n for gamma in {1, 2}.
    for (gamma, sigma, glo, ghi) in [] as [(f64, f64, f64, f64); 0] {
        let f = g_tilde(&psi, gamma, 1.0, 9, 4, 9, &grid).unwrap();
        let env = fit_bias_envelope(&f, &kernel, gamma, levels.lo, levels.hi).unwrap();
        let ranges =
            RegularityRanges::new(glo, ghi, env.b_hat / 2.0, env.b_hat * 2.0, env.eps_hat)
                .unwrap();
        let mut xs = vec![];
        let mut ys = vec![];
        print!("gamma={gamma} sigma={sigma}: ");
        for e in (10..=18).step_by(2) {
            let n: f64 = (1u64 << e) as f64;
            let rule = CriticalValueRule::new(cbar, sigma / n.sqrt(), levels).unwrap();
            let cfg = BandConfig::new(env.eps_hat, 1.0, ranges, rule).unwrap();
            let (med, mj, feas) = median_width(&kernel, &f, &cfg, sigma, n, 40, 7 + e);
            print!("[n=2^{e} w={med:.4} j={mj:.1} f={feas:.2}] ");
            xs.push(n.ln());
            ys.push(med.ln());
        }
        let slope = fit_slope(&xs, &ys);
        println!("slope={slope:.3} target={:.3}", -gamma / (2.0 * gamma + 1.0));
    }

    // Eps scan at n = 2^14, gamma = 1, tall level set, tight gamma range.
    for (mexp, hi, sigma, seed) in [
        (15usize, 12, 0.0125, 99u64),
        (15, 12, 0.0125, 1234),
        (15, 12, 0.00625, 99),
        (16, 13, 0.0125, 99),
        (16, 13, 0.00625, 99),
    ] {
        let grid = Grid::estimation_with_cells(1 << mexp).unwrap();
        let tall = LevelRange::new(4, hi).unwrap();
        let cbar_tall = calibrate_cbar(&kernel, tall, 0.95, 300, &grid, 1).unwrap();
        let gamma = 1.0;
        let f = g_tilde(&psi, gamma, 1.0, 9, 4, 10, &grid).unwrap();
        let env = fit_bias_envelope(&f, &kernel, gamma, 4, 10).unwrap();
        let (glo, ghi) = (0.98, 1.05);
        let n: f64 = 16384.0;
        let rule = CriticalValueRule::new(cbar_tall, sigma / n.sqrt(), tall).unwrap();
        let mut xs = vec![];
        let mut ys = vec![];
        print!("eps-scan m=2^{mexp} hi={hi} sigma={sigma} seed={seed}: ");
        for eps in [0.5, 0.25, 0.125, 0.0625] {
            let ranges =
                RegularityRanges::new(glo, ghi, env.b_hat / 2.0, env.b_hat * 2.0, eps).unwrap();
            let cfg = BandConfig::new(eps, 1.0, ranges, rule).unwrap();
            let (med, mj, feas) = median_width(&kernel, &f, &cfg, sigma, n, 60, seed);
            print!("[e={eps} w={med:.4} j={mj:.1} f={feas:.2}] ");
            xs.push((1.0 / eps).ln());
            ys.push(med.ln());
        }
        let slope = fit_slope(&xs, &ys);
        println!("slope={slope:.3} target={:.3}", 1.0 / 3.0);
    }
}
