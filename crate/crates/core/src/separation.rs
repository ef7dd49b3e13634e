//! l1-analysis separation of one subband and the multiscale driver.
//!
//! The subband problem
//!
//! ```text
//! min_X  sum_b |K_b X|_1 + sum_s |K_s (F - X)|_1     over X supported on supp W_j
//! ```
//!
//! is solved for the point part `X`; the line part is `F - X`, so the
//! constraint holds by construction. `K_b` are the wavelet multipliers of
//! scales `j-1..=j+1`, `K_s` the primal shearlet multipliers of the same
//! scales, each weighted by its lattice density and sampled on an `M x M`
//! working grid. Every `K^T K` is diagonal in frequency, which gives an exact
//! diagonal preconditioner for the primal-dual iteration.

use num_complex::Complex;

use crate::bank::SparseSymbol;
use crate::error::{Error, Result};
use crate::generators::{corona_outer, window_wj, ConeTag};
use crate::grid::{forward_ft, inverse_ft, Fft2, FreqGrid, GridImage, Spectrum};
use crate::shearlet::{check_alpha, density, shear_range, SubbandKey, Variant};
use crate::wavelet::square_points;
use crate::Real;

/// Which component receives the low-pass band in the multiscale driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowBand {
    Points,
    Lines,
}

#[derive(Debug, Clone)]
pub struct SolverConfig<T> {
    pub max_iters: usize,
    /// Objective and KKT evaluation period.
    pub check_every: usize,
    /// Stop when the relative iterate change falls below this ...
    pub tol_change: T,
    /// ... and the KKT residual below this.
    pub tol_kkt: T,
    /// `tau * sigma * L^2 = step_scale^2` with the preconditioned `L = 1`.
    pub step_scale: T,
    /// Primal/dual step balance relative to the automatic choice.
    pub balance: T,
    /// Working grid `M = min(N, oversample * 4^j / 2)`.
    pub oversample: usize,
    pub wavelet_weight: T,
    pub shearlet_weight: T,
    /// Coefficients below `zero_tol * max |K F|` count as zeros in
    /// [`kkt_residual`].
    pub zero_tol: T,
    pub low_band: LowBand,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            check_every: 25,
            tol_change: T::lit(1e-7),
            tol_kkt: T::lit(1e-5),
            step_scale: T::one(),
            balance: T::lit(0.3),
            oversample: 1,
            wavelet_weight: T::one(),
            shearlet_weight: T::one(),
            zero_tol: T::lit(1e-6),
            low_band: LowBand::Points,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v > T::zero() && v.is_finite();
        if self.max_iters == 0 || self.check_every == 0 || self.oversample == 0 {
            return Err(Error::Config("iteration counts and oversampling must be positive".into()));
        }
        if !self.oversample.is_power_of_two() {
            return Err(Error::Config("oversample must be a power of two".into()));
        }
        if !(pos(self.step_scale) && self.step_scale <= T::one()) {
            return Err(Error::Config("step_scale must lie in (0, 1]".into()));
        }
        for (v, name) in [
            (self.tol_change, "tol_change"),
            (self.tol_kkt, "tol_kkt"),
            (self.balance, "balance"),
            (self.wavelet_weight, "wavelet_weight"),
            (self.shearlet_weight, "shearlet_weight"),
            (self.zero_tol, "zero_tol"),
        ] {
            if !pos(v) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// Best objective seen so far.
    pub objective: f64,
    pub kkt: f64,
    pub change: f64,
}

#[derive(Debug, Clone)]
pub struct SeparationResult<T> {
    pub scale: u32,
    pub points: GridImage<T>,
    pub lines: GridImage<T>,
    pub points_spectrum: Spectrum<T>,
    pub lines_spectrum: Spectrum<T>,
    pub iterations: usize,
    pub objective: f64,
    pub kkt: f64,
    /// `||points + lines - f_j||_2`.
    pub feasibility: f64,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Soft thresholding of complex entries; `|c| <= tau` maps to 0.
pub fn soft_shrink<T: Real>(c: &[Complex<T>], tau: T) -> Vec<Complex<T>> {
    c.iter()
        .map(|&z| {
            let r = z.norm();
            if r <= tau {
                Complex::new(T::zero(), T::zero())
            } else {
                z * ((r - tau) / r)
            }
        })
        .collect()
}

/// Soft thresholding of real entries.
pub fn soft_shrink_real<T: Real>(c: &[T], tau: T) -> Vec<T> {
    c.iter()
        .map(|&v| if v.abs() <= tau { T::zero() } else { v - tau * v.signum() })
        .collect()
}

struct Op<T> {
    sym: SparseSymbol<T>,
    /// Acts on `X - F` instead of `X`.
    shifted: bool,
}

/// One subband problem on its working grid.
struct Problem<T: Real> {
    grid: FreqGrid,
    /// Band lattice points (working grid indices).
    band: Vec<usize>,
    data: Vec<Complex<T>>,
    ops: Vec<Op<T>>,
    /// `M^2 sum_b k_b^2` on the band.
    diag: Vec<T>,
    fft: Fft2<T>,
    buf: Vec<Complex<T>>,
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Working grid size for scale `j` on an `n`-grid.
pub fn working_size(n: usize, j: u32, oversample: usize) -> usize {
    let base = (1usize << (2 * j)) / 2;
    (base * oversample).clamp(2, n)
}

impl<T: Real> Problem<T> {
    fn new(spec: &Spectrum<T>, j: u32, alpha: f64, cfg: &SolverConfig<T>) -> Self {
        let n = spec.size();
        let m = working_size(n, j, cfg.oversample);
        let grid = FreqGrid::working(m);
        let r = corona_outer(j).ceil() as i64;
        let band_sym = SparseSymbol::<T>::from_points(&grid, square_points(&grid, r), |a, b| {
            window_wj(T::lit(a as f64), T::lit(b as f64), j)
        });
        let band: Vec<usize> = band_sym.iter().map(|(i, _)| i).collect();
        let band_pts: Vec<(i64, i64)> = band.iter().map(|&i| grid.freq(i)).collect();
        let in_band = |a: i64, b: i64| window_wj(a as f64, b as f64, j) != 0.0;
        let m2 = (m * m) as f64;

        let mut data = vec![zero(); m * m];
        let src = spec.grid();
        for (&i, &(a, b)) in band.iter().zip(&band_pts) {
            if let Some(s) = src.flat(a, b) {
                data[i] = spec.values()[s];
            }
        }

        let scales = j.saturating_sub(1)..=j + 1;
        let mut ops = Vec::new();
        for s in scales.clone() {
            let k = cfg.wavelet_weight.to_f64_lossy() * 4f64.powi(s as i32) / m2;
            let sym = SparseSymbol::from_points(&grid, band_pts.iter().copied(), |a, b| {
                T::lit(k * window_wj(a as f64, b as f64, s))
            });
            if !sym.is_empty() {
                ops.push(Op { sym, shifted: false });
            }
        }
        for s in scales {
            let k = -cfg.shearlet_weight.to_f64_lossy() * density(s, alpha).sqrt() / m2;
            let range = shear_range(s, alpha);
            for cone in [ConeTag::H, ConeTag::V] {
                for l in -range..=range {
                    let key = SubbandKey { j: s, l, cone };
                    let sym = SparseSymbol::from_points(&grid, key.points(alpha), |a, b| {
                        if in_band(a, b) {
                            T::lit(k * key.symbol(a as f64, b as f64, alpha, Variant::Primal))
                        } else {
                            T::zero()
                        }
                    });
                    if !sym.is_empty() {
                        ops.push(Op { sym, shifted: true });
                    }
                }
            }
        }

        let mut diag = vec![T::zero(); m * m];
        for op in &ops {
            for (i, v) in op.sym.iter() {
                diag[i] = diag[i] + v * v;
            }
        }
        let m2t = T::lit(m2);
        diag.iter_mut().for_each(|d| *d = *d * m2t);

        Self { grid, band, data, ops, diag, fft: Fft2::new(m), buf: vec![zero(); m * m] }
    }

    fn len(&self) -> usize {
        self.grid.len()
    }

    /// Packs `K_b x` for the ops of one pair into `buf` and transforms.
    fn forward_pair(&mut self, p: usize, x: &[Complex<T>]) {
        self.buf.iter_mut().for_each(|v| *v = zero());
        for (slot, op) in self.ops[p..(p + 2).min(self.ops.len())].iter().enumerate() {
            for (i, k) in op.sym.iter() {
                let v = if op.shifted { x[i] - self.data[i] } else { x[i] };
                let z = v * k;
                self.buf[i] += if slot == 0 { z } else { Complex::new(-z.im, z.re) };
            }
        }
        self.fft.inverse(&mut self.buf);
    }

    /// Transforms the packed dual pair in `buf` and adds `K_b^T y_b` to `g`.
    fn adjoint_pair(&mut self, p: usize, g: &mut [Complex<T>]) {
        self.fft.forward(&mut self.buf);
        let half = T::lit(0.5);
        for (slot, op) in self.ops[p..(p + 2).min(self.ops.len())].iter().enumerate() {
            for (i, k) in op.sym.iter() {
                let z = self.buf[i];
                let zm = self.buf[self.grid.mirror(i)].conj();
                let y = if slot == 0 {
                    (z + zm) * half
                } else {
                    let d = z - zm;
                    Complex::new(d.im, -d.re) * half
                };
                g[i] += y * k;
            }
        }
    }

    fn pairs(&self) -> impl Iterator<Item = usize> {
        (0..self.ops.len()).step_by(2)
    }

    /// `(||K(X, F)||_2, max |K(X, F)|)` over all fields.
    fn field_stats(&mut self, x: &[Complex<T>]) -> (f64, f64) {
        let (mut sq, mut mx) = (0.0f64, 0.0f64);
        let pairs: Vec<usize> = self.pairs().collect();
        for p in pairs {
            self.forward_pair(p, x);
            for z in &self.buf {
                for v in [z.re.to_f64_lossy(), z.im.to_f64_lossy()] {
                    sq += v * v;
                    mx = mx.max(v.abs());
                }
            }
        }
        (sq.sqrt(), mx)
    }

    /// Objective `sum |K(X, F)|_1` at `x`.
    fn objective(&mut self, x: &[Complex<T>]) -> f64 {
        let mut obj = 0.0f64;
        let pairs: Vec<usize> = self.pairs().collect();
        for p in pairs {
            self.forward_pair(p, x);
            let width = (self.ops.len() - p).min(2);
            for z in &self.buf {
                obj += z.re.abs().to_f64_lossy();
                if width == 2 {
                    obj += z.im.abs().to_f64_lossy();
                }
            }
        }
        obj
    }

    /// Objective at `x` and the KKT residual of the pair `(x, y)`: the larger
    /// of the preconditioned stationarity RMS `|D^{-1/2} K^T y|` and the
    /// relative complementarity gap `sum(|u| - y u) / sum |u|`.
    fn certify(&mut self, x: &[Complex<T>], y: &[Vec<T>]) -> (f64, f64) {
        let mut obj = 0.0f64;
        let mut gap = 0.0f64;
        let mut g = vec![zero(); self.len()];
        let pairs: Vec<usize> = self.pairs().collect();
        for p in pairs {
            self.forward_pair(p, x);
            let width = (self.ops.len() - p).min(2);
            for (f, z) in self.buf.iter_mut().enumerate() {
                let mut parts = [z.re, z.im];
                for (slot, u) in parts.iter_mut().enumerate() {
                    if slot < width {
                        let v = y[p + slot][f];
                        obj += u.abs().to_f64_lossy();
                        gap += (u.abs() - v * *u).to_f64_lossy();
                        *u = v;
                    } else {
                        *u = T::zero();
                    }
                }
                *z = Complex::new(parts[0], parts[1]);
            }
            self.adjoint_pair(p, &mut g);
        }
        let r: f64 = self.band.iter().map(|&i| (g[i].norm_sqr() / self.diag[i]).to_f64_lossy()).sum();
        let stationarity = (r / self.band.len().max(1) as f64).sqrt();
        let complementarity = if obj > 0.0 { gap / obj } else { 0.0 };
        (obj, stationarity.max(complementarity))
    }
}

struct Outcome<T> {
    x: Vec<Complex<T>>,
    iterations: usize,
    objective: f64,
    kkt: f64,
    converged: bool,
    trace: Vec<TraceRow>,
}

fn solve<T: Real>(pb: &mut Problem<T>, cfg: &SolverConfig<T>) -> Outcome<T> {
    let len = pb.len();
    let n_fields = pb.ops.len();
    let (norm_kf, _) = pb.field_stats(&vec![zero(); len]);
    if n_fields == 0 || norm_kf == 0.0 {
        return Outcome {
            x: vec![zero(); len],
            iterations: 0,
            objective: 0.0,
            kkt: 0.0,
            converged: true,
            trace: vec![TraceRow { iter: 0, objective: 0.0, kkt: 0.0, change: 0.0 }],
        };
    }
    let theta = cfg.balance.to_f64_lossy() * norm_kf / ((n_fields * len) as f64).sqrt();
    let tau = T::lit(cfg.step_scale.to_f64_lossy() * theta);
    let sigma = T::lit(cfg.step_scale.to_f64_lossy() / theta);
    let one = T::one();

    let mut x = vec![zero(); len];
    let mut x_bar = x.clone();
    let mut y = vec![vec![T::zero(); len]; n_fields];
    let mut g = vec![zero::<T>(); len];
    let mut trace = Vec::new();
    let mut best: Option<(f64, f64, Vec<Complex<T>>)> = None;
    let mut converged = false;
    let mut iter = 0;
    let pairs: Vec<usize> = pb.pairs().collect();

    while iter < cfg.max_iters {
        iter += 1;
        let checking = iter % cfg.check_every == 0 || iter == cfg.max_iters;
        g.iter_mut().for_each(|v| *v = zero());
        for &p in &pairs {
            pb.forward_pair(p, &x_bar);
            let width = (n_fields - p).min(2);
            let (head, tail) = y.split_at_mut(p + 1);
            let y0 = &mut head[p];
            let mut y1 = tail.first_mut().filter(|_| width == 2);
            for (f, z) in pb.buf.iter_mut().enumerate() {
                let a = (y0[f] + sigma * z.re).max(-one).min(one);
                y0[f] = a;
                let b = match y1.as_deref_mut() {
                    Some(y1) => {
                        let b = (y1[f] + sigma * z.im).max(-one).min(one);
                        y1[f] = b;
                        b
                    }
                    None => T::zero(),
                };
                *z = Complex::new(a, b);
            }
            pb.adjoint_pair(p, &mut g);
        }
        let mut d = 0.0f64;
        let mut s = 0.0f64;
        for &i in &pb.band {
            let old = x[i];
            let new = old - g[i] * (tau / pb.diag[i]);
            x[i] = new;
            x_bar[i] = new + (new - old);
            d += (new - old).norm_sqr().to_f64_lossy();
            s += new.norm_sqr().to_f64_lossy();
        }
        let change = if s > 0.0 { (d / s).sqrt() } else { 0.0 };

        if checking {
            let (obj, kkt) = pb.certify(&x, &y);
            let improved = best.as_ref().is_none_or(|b| obj <= b.0);
            if improved {
                best = Some((obj, kkt, x.clone()));
            }
            let (best_obj, _, _) = best.as_ref().expect("incumbent");
            trace.push(TraceRow { iter, objective: *best_obj, kkt, change });
            if change < cfg.tol_change.to_f64_lossy() && kkt < cfg.tol_kkt.to_f64_lossy() {
                converged = true;
                // the converged iterate wins unless it is measurably worse
                let b = best.as_mut().expect("incumbent");
                if obj <= b.0 * (1.0 + 1e-12) {
                    *b = (obj, kkt, x.clone());
                }
                break;
            }
        }
    }
    let (objective, kkt, x) = best.expect("at least one check");
    Outcome { x, iterations: iter, objective, kkt, converged, trace }
}

fn to_full<T: Real>(pb: &Problem<T>, x: &[Complex<T>], grid: &FreqGrid) -> Spectrum<T> {
    let mut out = Spectrum::zeros(grid);
    for &i in &pb.band {
        let (a, b) = pb.grid.freq(i);
        if let Some(f) = grid.flat(a, b) {
            out.values_mut()[f] = x[i];
        }
    }
    out
}

/// Restriction of a spectrum to `supp W_j`.
pub fn band_project<T: Real>(spec: &Spectrum<T>, j: u32) -> Spectrum<T> {
    spec.multiply(|a, b| {
        if window_wj(a as f64, b as f64, j) != 0.0 { T::one() } else { T::zero() }
    })
}

/// Separates the subband spectrum `f_j` (projected onto `supp W_j` first).
pub fn separate_subband_spectrum<T: Real>(
    f_j: &Spectrum<T>,
    j: u32,
    alpha: f64,
    cfg: &SolverConfig<T>,
) -> Result<SeparationResult<T>> {
    check_alpha(alpha)?;
    cfg.validate()?;
    let grid = f_j.grid();
    if j > grid.j_max() {
        return Err(Error::ScaleOutOfRange { j, j_max: grid.j_max() });
    }
    let f = band_project(f_j, j);
    let mut pb = Problem::new(&f, j, alpha, cfg);
    let out = solve(&mut pb, cfg);
    let points_spectrum = to_full(&pb, &out.x, &grid);
    let lines_spectrum = f.sub(&points_spectrum);
    let points = inverse_ft(&points_spectrum);
    let lines = inverse_ft(&lines_spectrum);
    let feasibility = points.add(&lines).sub(&inverse_ft(&f)).norm().to_f64_lossy();
    Ok(SeparationResult {
        scale: j,
        points,
        lines,
        points_spectrum,
        lines_spectrum,
        iterations: out.iterations,
        objective: out.objective,
        kkt: out.kkt,
        feasibility,
        converged: out.converged,
        trace: out.trace,
    })
}

pub fn separate_subband<T: Real>(
    f_j: &GridImage<T>,
    j: u32,
    alpha: f64,
    cfg: &SolverConfig<T>,
) -> Result<SeparationResult<T>> {
    separate_subband_spectrum(&forward_ft(f_j), j, alpha, cfg)
}

/// Objective of the split `(f_j - lines, lines)` as the solver measures it.
pub fn split_objective<T: Real>(
    f_j: &Spectrum<T>,
    points: &Spectrum<T>,
    j: u32,
    alpha: f64,
    cfg: &SolverConfig<T>,
) -> f64 {
    let mut pb = Problem::new(&band_project(f_j, j), j, alpha, cfg);
    let x = embed(&pb, &band_project(points, j));
    pb.objective(&x)
}

fn embed<T: Real>(pb: &Problem<T>, spec: &Spectrum<T>) -> Vec<Complex<T>> {
    let src = spec.grid();
    let mut x = vec![zero(); pb.len()];
    for &i in &pb.band {
        let (a, b) = pb.grid.freq(i);
        if let Some(f) = src.flat(a, b) {
            x[i] = spec.values()[f];
        }
    }
    x
}

/// KKT residual of a point part: RMS over the band of the preconditioned
/// subgradient `D^{-1/2} K^T z`, with `z` on the zero set chosen by
/// projected gradient steps towards the minimal-norm element.
pub fn kkt_residual<T: Real>(
    points: &Spectrum<T>,
    f_j: &Spectrum<T>,
    j: u32,
    alpha: f64,
    cfg: &SolverConfig<T>,
    steps: usize,
) -> f64 {
    let mut pb = Problem::new(&band_project(f_j, j), j, alpha, cfg);
    let (_, max_kf) = pb.field_stats(&vec![zero(); pb.len()]);
    if max_kf == 0.0 {
        return 0.0;
    }
    let eta = cfg.zero_tol.to_f64_lossy() * max_kf;
    let x = embed(&pb, &band_project(points, j));
    let len = pb.len();
    let nf = pb.ops.len();
    let pairs: Vec<usize> = pb.pairs().collect();

    // fixed signs and the free set
    let mut z = vec![vec![T::zero(); len]; nf];
    let mut free = vec![vec![false; len]; nf];
    for &p in &pairs {
        pb.forward_pair(p, &x);
        for (f, u) in pb.buf.iter().enumerate() {
            for (slot, v) in [u.re, u.im].into_iter().enumerate().take((nf - p).min(2)) {
                if v.abs() > T::lit(eta) {
                    z[p + slot][f] = v.signum();
                } else {
                    free[p + slot][f] = true;
                }
            }
        }
    }
    let gradient = |pb: &mut Problem<T>, z: &[Vec<T>]| -> Vec<Complex<T>> {
        let mut g = vec![zero(); len];
        for &p in &pairs {
            for (f, b) in pb.buf.iter_mut().enumerate() {
                let second = if p + 1 < nf { z[p + 1][f] } else { T::zero() };
                *b = Complex::new(z[p][f], second);
            }
            pb.adjoint_pair(p, &mut g);
        }
        g
    };
    // accelerated projected gradient on 1/2 |D^{-1/2} K^T z|^2 over the free set
    let mut prev = z.clone();
    let mut t = 1.0f64;
    for _ in 0..steps {
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let w = T::lit((t - 1.0) / t_next);
        let probe: Vec<Vec<T>> = z
            .iter()
            .zip(&prev)
            .zip(&free)
            .map(|((a, b), fr)| {
                a.iter().zip(b).zip(fr).map(|((&a, &b), &f)| if f { a + w * (a - b) } else { a }).collect()
            })
            .collect();
        let mut g = gradient(&mut pb, &probe);
        for &i in &pb.band {
            g[i] = g[i] / pb.diag[i];
        }
        let one = T::one();
        let next: Vec<Vec<T>> = {
            let mut next = probe;
            for &p in &pairs {
                pb.forward_pair_plain(p, &g);
                let width = (nf - p).min(2);
                for (f, u) in pb.buf.iter().enumerate() {
                    for slot in 0..width {
                        if free[p + slot][f] {
                            let v = if slot == 0 { u.re } else { u.im };
                            let c = &mut next[p + slot][f];
                            *c = (*c - v).max(-one).min(one);
                        }
                    }
                }
            }
            next
        };
        prev = std::mem::replace(&mut z, next);
        t = t_next;
    }
    let g = gradient(&mut pb, &z);
    let r: f64 = pb.band.iter().map(|&i| (g[i].norm_sqr() / pb.diag[i]).to_f64_lossy()).sum();
    (r / pb.band.len().max(1) as f64).sqrt()
}

impl<T: Real> Problem<T> {
    /// `K_b w` without the data shift.
    fn forward_pair_plain(&mut self, p: usize, w: &[Complex<T>]) {
        self.buf.iter_mut().for_each(|v| *v = zero());
        for (slot, op) in self.ops[p..(p + 2).min(self.ops.len())].iter().enumerate() {
            for (i, k) in op.sym.iter() {
                let z = w[i] * k;
                self.buf[i] += if slot == 0 { z } else { Complex::new(-z.im, z.re) };
            }
        }
        self.fft.inverse(&mut self.buf);
    }
}

/// Per-scale results and the recombined components.
#[derive(Debug, Clone)]
pub struct MultiscaleResult<T> {
    pub scales: Vec<SeparationResult<T>>,
    pub points: GridImage<T>,
    pub lines: GridImage<T>,
}

impl<T> MultiscaleResult<T> {
    pub fn converged(&self) -> bool {
        self.scales.iter().all(|r| r.converged)
    }
}

/// Separates every subband `f_j = F_j * f`, `j` in `scales`, and recombines
/// `F_low * F_low * f + sum_j F_j * (points_j, lines_j)`. Scales outside
/// the range contribute their whole subband to the point part.
pub fn separate_multiscale<T: Real>(
    f: &GridImage<T>,
    alpha: f64,
    cfg: &SolverConfig<T>,
    scales: Option<std::ops::RangeInclusive<u32>>,
) -> Result<MultiscaleResult<T>> {
    let spec = forward_ft(f);
    let grid = spec.grid();
    let scales = scales.unwrap_or(0..=grid.j_max());
    if *scales.end() > grid.j_max() {
        return Err(Error::ScaleOutOfRange { j: *scales.end(), j_max: grid.j_max() });
    }
    let low = spec.multiply(|a, b| {
        let o: f64 = crate::generators::omega_hat(a as f64, b as f64);
        T::lit(o * o)
    });
    let (mut p, mut c) = match cfg.low_band {
        LowBand::Points => (low, Spectrum::zeros(&grid)),
        LowBand::Lines => (Spectrum::zeros(&grid), low),
    };
    let mut results = Vec::new();
    for j in 0..=grid.j_max() {
        let wj = |a: i64, b: i64| T::lit(window_wj(a as f64, b as f64, j));
        let f_j = spec.multiply(wj);
        if scales.contains(&j) {
            let r = separate_subband_spectrum(&f_j, j, alpha, cfg)?;
            p = p.add(&r.points_spectrum.multiply(wj));
            c = c.add(&r.lines_spectrum.multiply(wj));
            results.push(r);
        } else {
            p = p.add(&f_j.multiply(wj));
        }
    }
    Ok(MultiscaleResult { scales: results, points: inverse_ft(&p), lines: inverse_ft(&c) })
}

/// Estimated norm of the preconditioned stacked operator `K D^{-1/2}` by
/// power iteration.
pub fn preconditioned_norm<T: Real>(grid: &FreqGrid, j: u32, alpha: f64, cfg: &SolverConfig<T>, iters: usize) -> f64 {
    let mut pb = Problem::<T>::new(&Spectrum::zeros(grid), j, alpha, cfg);
    let len = pb.len();
    let pairs: Vec<usize> = pb.pairs().collect();
    let mut v = vec![zero::<T>(); len];
    for (n, &i) in pb.band.iter().enumerate() {
        // deterministic start, then symmetrized
        v[i] = Complex::new(T::lit(1.0 + (n % 7) as f64), T::zero());
    }
    let sym = |v: &mut Vec<Complex<T>>, g: &FreqGrid| {
        let c = v.clone();
        for (f, z) in v.iter_mut().enumerate() {
            *z = (c[f] + c[g.mirror(f)].conj()) * T::lit(0.5);
        }
    };
    sym(&mut v, &pb.grid);
    let mut est = 0.0;
    for _ in 0..iters {
        let nv: f64 = v.iter().map(|z| z.norm_sqr().to_f64_lossy()).sum::<f64>().sqrt();
        if nv == 0.0 {
            return 0.0;
        }
        let mut w = v.clone();
        for &i in &pb.band {
            w[i] = v[i] / (pb.diag[i].sqrt() * T::lit(nv));
        }
        let mut g = vec![zero(); len];
        for &p in &pairs {
            pb.forward_pair_plain(p, &w);
            pb.adjoint_pair(p, &mut g);
        }
        for &i in &pb.band {
            g[i] = g[i] / pb.diag[i].sqrt();
        }
        est = g.iter().map(|z| z.norm_sqr().to_f64_lossy()).sum::<f64>().sqrt();
        v = g;
    }
    est.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrink_examples() {
        let c = [Complex::new(0.3, 0.4), Complex::new(0.0, 3.0), Complex::new(0.6, 0.8)];
        let s = soft_shrink(&c, 1.0);
        assert_eq!(s[0], Complex::new(0.0, 0.0));
        assert!((s[1] - Complex::new(0.0, 2.0)).norm() < 1e-15);
        // threshold equality maps to zero
        assert_eq!(s[2], Complex::new(0.0, 0.0));
        assert_eq!(soft_shrink(&c, 0.0), c.to_vec());
        assert_eq!(soft_shrink_real(&[-3.0, 0.5, 2.0], 1.0), vec![-2.0, 0.0, 1.0]);
        // clipping is the conjugate prox: v = clip(v) + shrink(v)
        for v in [-2.5f64, -0.3, 0.0, 0.7, 4.0] {
            assert_eq!(v.clamp(-1.0, 1.0) + soft_shrink_real(&[v], 1.0)[0], v);
        }
    }

    #[test]
    fn working_sizes() {
        assert_eq!(working_size(256, 4, 2), 256);
        assert_eq!(working_size(256, 4, 1), 128);
        assert_eq!(working_size(256, 2, 2), 16);
        assert_eq!(working_size(16, 2, 4), 16);
    }

    #[test]
    fn preconditioned_operator_has_unit_norm() {
        let g = FreqGrid::new(32).unwrap();
        let cfg = SolverConfig::<f64>::default();
        let l = preconditioned_norm(&g, 2, 1.0, &cfg, 30);
        assert!((l - 1.0).abs() < 1e-9, "L = {l}");
    }

    #[test]
    fn zero_input() {
        let g = FreqGrid::new(16).unwrap();
        let r = separate_subband(&GridImage::<f64>::zeros(&g), 2, 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.points.norm(), 0.0);
        assert_eq!(r.lines.norm(), 0.0);
        assert!(r.converged);
    }
}
