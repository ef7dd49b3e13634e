//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs for roughly a quarter of an hour on one core.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use geosep::diagnostics::{
    build_lambda1, cluster_coherence, cross_coherence, scale_sparsity, separation_study, ClusterOptions,
    CoherenceOptions, ScaleReport, TargetFrame,
};
use geosep::generators::{chi, gamma, ConeTag};
use geosep::grid::{FreqGrid, GridImage, Spectrum};
use geosep::models::{energy_rates, filter_subband, scene_spectrum, Scene};
use geosep::separation::separate_subband_spectrum;
use geosep::shearlet::{AlphaParams, ShearletFrame, Variant};
use geosep::{SolverConfig, WaveletFrame};

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, what: &str, detail: String, t: Instant) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id:2} {what}: {detail} [{:.1}s]", t.elapsed().as_secs_f64());
        if !ok {
            self.failed.push(id);
        }
    }
}

fn random_field(grid: &FreqGrid, band: i64, seed: u64) -> GridImage<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = Spectrum::from_fn(grid, |a, b| {
        if a.abs() <= band && b.abs() <= band {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    // the real part of the synthesis keeps the field bandlimited
    let z = geosep::grid::inverse_ft_complex(&spec);
    GridImage::from_vec(grid, z.iter().map(|v| v.re).collect()).unwrap()
}

fn crit1(r: &mut Report) {
    let t = Instant::now();
    let grid = FreqGrid::new(512).unwrap();
    let agg = WaveletFrame::<f64>::new(&grid).aggregate();
    let band = grid.covered_band();
    let mut worst = 0.0f64;
    for (f, a, b) in grid.points() {
        if a.abs() <= band && b.abs() <= band {
            worst = worst.max((agg[f] - 1.0).abs());
        }
    }
    r.line(1, worst < 1e-12, "partition of unity", format!("max defect {worst:.2e} < 1e-12"), t);
}

fn crit2(r: &mut Report) {
    let t = Instant::now();
    let grid = FreqGrid::new(128).unwrap();
    let frame = WaveletFrame::<f64>::new(&grid);
    let (mut energy, mut trip) = (0.0f64, 0.0f64);
    for seed in 0..50 {
        let f = random_field(&grid, grid.covered_band(), seed);
        let c = frame.analyze(&f);
        let n2 = f.norm().powi(2);
        energy = energy.max((c.energy() - n2).abs() / n2);
        trip = trip.max(frame.synthesize(&c).sub(&f).norm() / f.norm());
    }
    let ok = energy < 1e-8 && trip < 1e-8;
    r.line(2, ok, "wavelet Parseval", format!("energy defect {energy:.2e}, round trip {trip:.2e} (< 1e-8)"), t);
}

fn crit3(r: &mut Report) {
    let t = Instant::now();
    let grid = FreqGrid::new(128).unwrap();
    let band = grid.covered_band();
    let mut ok = true;
    let mut notes = Vec::new();
    for alpha in [1.0, 1.5] {
        let frame = ShearletFrame::<f64>::new(&grid, alpha).unwrap();
        let f = random_field(&grid, band, 7);
        let back = frame.synthesize(&frame.analyze(&f, Variant::Primal), Variant::Dual);
        let trip = back.sub(&f).norm() / f.norm();
        let mult = frame.duality_multiplier();
        let mut defect = 0.0f64;
        let (mut sup_gamma, mut chi_sq) = (0.0f64, [0.0f64; 3]);
        for (i, a, b) in grid.points() {
            if a.abs() <= band && b.abs() <= band {
                defect = defect.max((mult[i] - 1.0).abs());
                for (k, cone) in [ConeTag::Low, ConeTag::H, ConeTag::V].into_iter().enumerate() {
                    let (x, y) = (a as f64, b as f64);
                    sup_gamma = sup_gamma.max(gamma(x, y, cone).abs());
                    chi_sq[k] = chi_sq[k].max(chi(x, y, cone).powi(2));
                }
            }
        }
        let lower = 1.0 / (3.0 * sup_gamma * sup_gamma) - 1e-9;
        let upper = chi_sq.iter().sum::<f64>() + 1e-9;
        let mut ratio_lo = f64::INFINITY;
        let mut ratio_hi = 0.0f64;
        for seed in 0..10 {
            let g = random_field(&grid, band, 100 + seed);
            let ratio = frame.analyze(&g, Variant::Primal).energy() / g.norm().powi(2);
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
        }
        let (a, b) = frame.frame_bounds(Variant::Primal);
        ok &= trip < 1e-8 && defect < 1e-10 && ratio_lo >= lower && ratio_hi <= upper && a >= lower && b <= upper;
        notes.push(format!(
            "alpha {alpha}: trip {trip:.1e}, multiplier {defect:.1e}, ratios [{ratio_lo:.3}, {ratio_hi:.3}] \
             bounds [{a:.3}, {b:.3}] in [{lower:.3}, {upper:.3}]"
        ));
    }
    r.line(3, ok, "shearlet duality", notes.join("; "), t);
}

fn crit4(r: &mut Report) {
    let t = Instant::now();
    let grid = FreqGrid::new(256).unwrap();
    let band = grid.covered_band();
    let mut worst = 0.0f64;
    for alpha in [1.0, 1.5] {
        let frame = ShearletFrame::<f64>::new(&grid, alpha).unwrap();
        let h = frame.cone_aggregate(ConeTag::H);
        let v = frame.cone_aggregate(ConeTag::V);
        for (f, a, b) in grid.points() {
            if a.abs() > band || b.abs() > band || (a, b) == (0, 0) {
                continue;
            }
            if b.abs() <= a.abs() {
                worst = worst.max((h[f] - 1.0).abs());
            }
            if a.abs() <= b.abs() {
                worst = worst.max((v[f] - 1.0).abs());
            }
        }
    }
    r.line(4, worst < 1e-10, "cone Parseval", format!("max defect {worst:.2e} < 1e-10"), t);
}

fn crit5(r: &mut Report) {
    let t = Instant::now();
    let grid = FreqGrid::new(256).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for alpha in [1.0, 1.5] {
        for variant in [Variant::Primal, Variant::Dual] {
            let scaled: Vec<f64> = (2..=grid.j_max())
                .map(|j| {
                    let m = cross_coherence(&grid, j, alpha, variant, 32).unwrap();
                    m * 2f64.powf((2.0 - alpha) * j as f64 / 2.0)
                })
                .collect();
            let hi = scaled.iter().cloned().fold(0.0, f64::max);
            let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
            ok &= lo > 0.0 && hi / lo <= 4.0;
            notes.push(format!("alpha {alpha} {variant:?}: spread {:.2}", hi / lo));
        }
    }
    r.line(5, ok, "cross-coherence decay", format!("{} (<= 4)", notes.join(", ")), t);
}

fn slope(js: &[f64], ys: &[f64]) -> f64 {
    let n = js.len() as f64;
    let (mx, my) = (js.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = js.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = js.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn crit6(r: &mut Report) {
    let t = Instant::now();
    let grid = FreqGrid::new(1024).unwrap();
    let (alpha, eps) = (1.0, 0.1);
    let params = AlphaParams::new(alpha, eps).unwrap();
    let point = Scene::default().points.points[0].x;
    let mut mus = Vec::new();
    let mut window_ok = true;
    for j in 2..=4u32 {
        let cluster = build_lambda1(j, &params, &[point]);
        let c = cluster_coherence(&cluster, &grid, TargetFrame::Shearlets(Variant::Dual), &CoherenceOptions::default())
            .unwrap();
        window_ok &= c.window_ok;
        mus.push(c.value);
    }
    let s = slope(&[2.0, 3.0, 4.0], &mus.iter().map(|m| m.log2()).collect::<Vec<_>>());
    let limit = -(2.0 - alpha - 4.0 * eps) / 2.0 + 0.5;
    let detail = format!(
        "mu = [{:.4e}, {:.4e}, {:.4e}], slope {s:.3} <= {limit:.3}, window converged {window_ok}",
        mus[0], mus[1], mus[2]
    );
    r.line(6, s <= limit && window_ok, "cluster-coherence rate", detail, t);
}

fn crit7(r: &mut Report) {
    let t = Instant::now();
    let grid = FreqGrid::new(1024).unwrap();
    let params = AlphaParams::new(1.0, 0.1).unwrap();
    let scene = Scene::default();
    let d3 = scale_sparsity(&grid, 3, &params, &scene, Some(1)).unwrap();
    let d4 = scale_sparsity(&grid, 4, &params, &scene, Some(1)).unwrap();
    let (r1, r2) = (d3.0 / d4.0, d3.1 / d4.1);
    let ok = r1 >= 8.0 && r2 >= 8.0;
    let detail = format!(
        "delta1 {:.3e} -> {:.3e} (drop {r1:.3}), delta2 {:.3e} -> {:.3e} (drop {r2:.3}), need >= 8",
        d3.0, d4.0, d3.1, d4.1
    );
    r.line(7, ok, "sparsity decay", detail, t);
}

fn crit8(r: &mut Report, study: &[ScaleReport]) {
    let t = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for s in study {
        if s.coherence.flag() && s.converged {
            let pass = s.abs_error <= s.bound + 1e-5;
            ok &= pass;
            notes.push(format!("j={} error {:.3e} <= bound {:.3e}: {pass}", s.j, s.abs_error, s.bound));
        } else {
            notes.push(format!("j={} not eligible (2mu<1 {}, converged {})", s.j, s.coherence.flag(), s.converged));
        }
    }
    r.line(8, ok, "error bound", notes.join("; "), t);
}

fn crit9(r: &mut Report, study: &[ScaleReport], sweep: &[(f64, f64)]) {
    let t = Instant::now();
    let totals: Vec<f64> = study.iter().map(|s| s.total_error()).collect();
    let decreasing = totals.windows(2).all(|w| w[1] < w[0]);
    let last = *totals.last().unwrap();
    let monotone = sweep.windows(2).all(|w| w[1].1 >= w[0].1);
    let detail = format!(
        "total error over j=2..4 {:?} strictly decreasing {decreasing}; j=4 error {last:.4} < 0.05 {}; \
         j=4 error over alpha {:?} nondecreasing {monotone}",
        totals.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
        last < 0.05,
        sweep.iter().map(|(a, e)| format!("{a}: {e:.4}")).collect::<Vec<_>>()
    );
    r.line(9, decreasing && last < 0.05 && monotone, "separation trend", detail, t);
}

fn crit10(r: &mut Report) {
    let t = Instant::now();
    let grid = FreqGrid::new(16).unwrap();
    let scene = Scene::default();
    let (p, c) = scene_spectrum(&scene, &grid);
    let cfg = SolverConfig::<f64>::default();
    let reference = SolverConfig::<f64> {
        tol_kkt: cfg.tol_kkt / 100.0,
        tol_change: cfg.tol_change / 100.0,
        step_scale: 0.5,
        max_iters: 400_000,
        ..cfg
    };
    let mut ok = true;
    let mut notes = Vec::new();
    for alpha in [1.0, 1.5] {
        for j in 1..=grid.j_max() {
            let f = filter_subband(&p, j).add(&filter_subband(&c, j));
            let a = separate_subband_spectrum(&f, j, alpha, &cfg).unwrap();
            let b = separate_subband_spectrum(&f, j, alpha, &reference).unwrap();
            let rel = (a.objective - b.objective).abs() / b.objective.abs().max(f64::MIN_POSITIVE);
            ok &= rel <= 1e-4 && a.kkt < 1e-5;
            notes.push(format!("alpha {alpha} j={j}: rel {rel:.1e}, kkt {:.1e}", a.kkt));
        }
    }
    r.line(10, ok, "solver vs reference", format!("{} (1e-4, 1e-5)", notes.join(", ")), t);
}

fn crit11(r: &mut Report) {
    let t = Instant::now();
    let grid = FreqGrid::new(512).unwrap();
    let scene = Scene::default();
    let lambda = scene.points.points[0].lambda;
    let want_p = 2.0 * (2.0 - 2.0 * lambda);
    let mut ok = true;
    let mut notes = Vec::new();
    for j in 2..=3u32 {
        let (rp, rc) = energy_rates(&scene, &grid, j);
        ok &= (rp - want_p).abs() <= 0.5 && (rc - 2.0).abs() <= 0.5;
        notes.push(format!("j={j}->{}: point {rp:.3} (want {want_p}), line {rc:.3} (want 2)", j + 1));
    }
    r.line(11, ok, "energy rates", format!("{} (+-0.5)", notes.join("; ")), t);
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    crit1(&mut r);
    crit2(&mut r);
    crit3(&mut r);
    crit4(&mut r);
    crit5(&mut r);
    crit10(&mut r);
    crit11(&mut r);
    crit7(&mut r);
    crit6(&mut r);

    // one separation study feeds criteria 8 and 9
    let t = Instant::now();
    let grid = FreqGrid::new(256).unwrap();
    let scene = Scene::default();
    let cfg = SolverConfig::<f64>::default();
    let opts = ClusterOptions::default();
    let params = AlphaParams::new(1.0, 0.1).unwrap();
    let study = separation_study(&grid, &params, 2..=4, &scene, &cfg, &opts).unwrap();
    for s in &study {
        println!(
            "  study j={} errP {:.4} errC {:.4} bound {:.3e} mu {:.3e} iters {} kkt {:.2e} converged {}",
            s.j,
            s.err_points,
            s.err_lines,
            s.bound,
            s.coherence.value(),
            s.iterations,
            s.kkt,
            s.converged
        );
    }
    let mut sweep = vec![(1.0, study.last().unwrap().total_error())];
    for alpha in [1.5, 1.9] {
        let (p, c) = scene_spectrum(&scene, &grid);
        let pj = filter_subband(&p, 4);
        let cj = filter_subband(&c, 4);
        let res = separate_subband_spectrum(&pj.add(&cj), 4, alpha, &cfg).unwrap();
        let err = res.points_spectrum.sub(&pj).norm() / pj.norm() + res.lines_spectrum.sub(&cj).norm() / cj.norm();
        println!("  sweep alpha {alpha} j=4 error {err:.4} iters {} converged {}", res.iterations, res.converged);
        sweep.push((alpha, err));
    }
    println!("  study and sweep took {:.1}s", t.elapsed().as_secs_f64());
    crit8(&mut r, &study);
    crit9(&mut r, &study, &sweep);

    if r.failed.is_empty() {
        println!("all criteria passed");
    } else {
        println!("failed criteria: {:?}", r.failed);
        std::process::exit(1);
    }
}
