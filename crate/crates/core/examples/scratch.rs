use tipscan_core::ensemble::{detect_threshold, run_scan, FitAggregation, ScanConfig, ScanModel};
use tipscan_core::gev::FitOptions;
use tipscan_core::sde::CoupledShearSpec;

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() { r[i] = pos as f64; }
        r
    };
    let (rx, ry) = (rank(xs), rank(ys));
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn main() {
    let base = CoupledShearSpec::new(1.0, 0.2475, 0.0, 0.01, 0).unwrap();
    let grid: Vec<f64> = (0..7).map(|i| 0.02 + 0.01 * i as f64).collect();
    let step = 0.01;
    let t0 = std::time::Instant::now();
    for master in 0..10u64 {
        let cfg = ScanConfig {
            n_realizations: 10, bin_length: 10_000, n_bins: 100,
            burn_in_fraction: 0.1, master_seed: master,
            aggregation: FitAggregation::PerRealization, fit: FitOptions::default(),
        };
        let pts = run_scan(&ScanModel::Shear(base.clone()), &grid, &cfg).unwrap();
        let a_ok = pts.iter().all(|p| p.kappa_max_mean < 0.0);
        let signs: Vec<bool> = pts.iter().map(|p| p.kappa_min_mean > 0.0).collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        let neg_to_pos = !signs[0] && *signs.last().unwrap();
        let cross = detect_threshold(&pts).ok().map(|t| t.control_critical);
        let onset = pts.iter().find(|p| p.n_transitions_total > 0).map(|p| p.control_value);
        let c_ok = match (cross, onset) {
            (Some(c), Some(o)) => (c - o).abs() <= 2.0 * step + 1e-12,
            _ => false,
        };
        let vars: Vec<f64> = pts.iter().map(|p| p.variance_mean).collect();
        let skews: Vec<f64> = pts.iter().map(|p| p.skewness_mean.abs()).collect();
        let failed: usize = pts.iter().map(|p| p.fits_failed).sum();
        println!(
            "master {master}: a={a_ok} changes={changes} n2p={neg_to_pos} cross={:?} onset={:?} c_ok={c_ok} rho_var={:.3} rho_skew={:.3} failed={failed}",
            cross.map(|c| (c * 1e4).round() / 1e4), onset, spearman(&grid, &vars), spearman(&grid, &skews)
        );
    }
    println!("elapsed {:?}", t0.elapsed());
}
