//! Radial wavelet Parseval frame: scale windows `W_j` plus the low-pass
//! window, realized as undecimated Fourier multipliers.
//!
//! Atom `(j, m)` has spectrum `2^{-2j} W_j(xi) e^{2 pi i xi.m/4^j}` and sits
//! at the torus position `-m/4^j`. The undecimated field of scale `j` is
//! indexed by atom position; its samples on the lattice `n/4^j` are the
//! decimated coefficients with `m = -n`.

use num_complex::{Complex, Complex64};

use crate::bank::{self, SparseSymbol};
use crate::error::Result;
use crate::generators::{corona_outer, omega_hat, window_wj};
use crate::grid::{Fft2, FreqGrid, GridImage, Spectrum};
use crate::lattice::{phase, Rational, TrigPoly};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveletIndex {
    pub j: u32,
    pub m: (i64, i64),
}

impl WaveletIndex {
    pub fn new(j: u32, m: (i64, i64)) -> Self {
        Self { j, m }
    }

    /// Translation lattice size `4^j` per axis.
    pub fn lattice(j: u32) -> i64 {
        1i64 << (2 * j)
    }

    /// Atom position `-m/4^j` as exact torus coordinates.
    pub fn position(&self) -> (Rational, Rational) {
        let d = Self::lattice(self.j);
        (Rational::new(-self.m.0, d), Rational::new(-self.m.1, d))
    }

    /// Index reduced modulo the torus lattice.
    pub fn reduced(&self) -> Self {
        let d = Self::lattice(self.j);
        Self { j: self.j, m: (self.m.0.rem_euclid(d), self.m.1.rem_euclid(d)) }
    }
}

/// Undecimated coefficient field of one subband.
#[derive(Debug, Clone)]
pub struct CoeffField<T> {
    /// Atoms per unit area of the decimated lattice.
    pub density: f64,
    pub values: Vec<T>,
}

impl<T: Real> CoeffField<T> {
    /// Weighted `l1` norm `(density/N^2) sum |c|`.
    pub fn l1(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.to_f64_lossy().abs()).sum();
        s * self.density / self.values.len() as f64
    }

    /// Weighted squared `l2` norm.
    pub fn energy(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.to_f64_lossy().powi(2)).sum();
        s * self.density / self.values.len() as f64
    }

    /// Samples at every `step`-th grid point per axis.
    pub fn subsample(&self, n: usize, step: usize) -> Vec<T> {
        let m = n / step;
        let mut out = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                out.push(self.values[a * step * n + b * step]);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct WaveletCoeffs<T> {
    pub n: usize,
    /// One field per scale `0..=j_max`.
    pub scales: Vec<CoeffField<T>>,
    pub low: CoeffField<T>,
}

impl<T: Real> WaveletCoeffs<T> {
    pub fn l1(&self) -> f64 {
        self.scales.iter().map(|c| c.l1()).sum::<f64>() + self.low.l1()
    }

    pub fn energy(&self) -> f64 {
        self.scales.iter().map(|c| c.energy()).sum::<f64>() + self.low.energy()
    }

    /// Decimated coefficients of scale `j` on the lattice `n/4^j`, when the
    /// lattice is a subgrid of the torus grid.
    pub fn decimated(&self, j: u32) -> Option<Vec<T>> {
        let d = WaveletIndex::lattice(j) as usize;
        (d <= self.n).then(|| self.scales[j as usize].subsample(self.n, self.n / d))
    }
}

/// Wavelet frame on one grid.
#[derive(Debug, Clone)]
pub struct WaveletFrame<T> {
    grid: FreqGrid,
    scales: Vec<SparseSymbol<T>>,
    low: SparseSymbol<T>,
}

/// `2^{-2j}` atom normalization.
pub fn atom_norm(j: u32) -> f64 {
    0.25f64.powi(j as i32)
}

/// Lattice points of the square `|xi|_inf <= r` clipped to the grid.
pub(crate) fn square_points(grid: &FreqGrid, r: i64) -> impl Iterator<Item = (i64, i64)> {
    let h = grid.size() as i64 / 2;
    let lo = (-r).max(-h);
    let hi = r.min(h - 1);
    (lo..=hi).flat_map(move |a| (lo..=hi).map(move |b| (a, b)))
}

impl<T: Real> WaveletFrame<T> {
    pub fn new(grid: &FreqGrid) -> Self {
        let scales = (0..=grid.j_max())
            .map(|j| {
                let r = corona_outer(j).ceil() as i64;
                SparseSymbol::from_points(grid, square_points(grid, r), |a, b| {
                    window_wj(T::lit(a as f64), T::lit(b as f64), j)
                })
            })
            .collect();
        let low = SparseSymbol::from_points(grid, square_points(grid, 1), |a, b| {
            omega_hat(T::lit(a as f64), T::lit(b as f64))
        });
        Self { grid: *grid, scales, low }
    }

    pub fn grid(&self) -> &FreqGrid {
        &self.grid
    }

    pub fn symbol(&self, j: u32) -> &SparseSymbol<T> {
        &self.scales[j as usize]
    }

    pub fn low_symbol(&self) -> &SparseSymbol<T> {
        &self.low
    }

    fn bank(&self, sign: i32) -> Vec<(&SparseSymbol<T>, T)> {
        let mut b: Vec<(&SparseSymbol<T>, T)> = self
            .scales
            .iter()
            .enumerate()
            .map(|(j, s)| (s, T::lit(atom_norm(j as u32).powi(sign))))
            .collect();
        b.push((&self.low, T::one()));
        b
    }

    pub fn analyze(&self, img: &GridImage<T>) -> WaveletCoeffs<T> {
        self.analyze_spectrum(&crate::grid::forward_ft(img))
    }

    pub fn analyze_spectrum(&self, spec: &Spectrum<T>) -> WaveletCoeffs<T> {
        let mut fft = Fft2::new(self.grid.size());
        let mut fields = bank::analyze(&mut fft, spec, &self.bank(1));
        let low = fields.pop().expect("low band");
        let scales = fields
            .into_iter()
            .enumerate()
            .map(|(j, values)| CoeffField { density: 16f64.powi(j as i32), values })
            .collect();
        WaveletCoeffs { n: self.grid.size(), scales, low: CoeffField { density: 1.0, values: low } }
    }

    pub fn synthesize(&self, coeffs: &WaveletCoeffs<T>) -> GridImage<T> {
        crate::grid::inverse_ft(&self.synthesize_spectrum(coeffs))
    }

    /// Adjoint of the analysis for the density-weighted inner products.
    pub fn synthesize_spectrum(&self, coeffs: &WaveletCoeffs<T>) -> Spectrum<T> {
        let mut fft = Fft2::new(self.grid.size());
        let mut fields: Vec<&[T]> = coeffs.scales.iter().map(|c| c.values.as_slice()).collect();
        fields.push(&coeffs.low.values);
        bank::synthesize(&mut fft, &self.grid, &fields, &self.bank(-1))
    }

    /// Aggregate squared symbol `omega^2 + sum_j W_j^2` at every lattice point.
    pub fn aggregate(&self) -> Vec<T> {
        let mut acc = vec![T::zero(); self.grid.len()];
        for s in self.scales.iter().chain(std::iter::once(&self.low)) {
            for (i, v) in s.iter() {
                acc[i] = acc[i] + v * v;
            }
        }
        acc
    }
}

/// Atom spectrum `2^{-2j} W_j(xi) e^{2 pi i xi.m/4^j}` with exact phases.
pub fn atom_spectrum(grid: &FreqGrid, idx: WaveletIndex) -> Result<Spectrum<f64>> {
    grid.check_scale(idx.j)?;
    let d = WaveletIndex::lattice(idx.j);
    let c = atom_norm(idx.j);
    Ok(Spectrum::from_fn(grid, |a, b| {
        let w = window_wj(a as f64, b as f64, idx.j);
        if w == 0.0 {
            return Complex::new(0.0, 0.0);
        }
        let ph = phase(a, Rational::new(idx.m.0, d)) * phase(b, Rational::new(idx.m.1, d));
        ph * (c * w)
    }))
}

/// Unmodulated atom symbol `2^{-2j} W_j` as a sparse polynomial over the
/// scale support, optionally restricted to the grid.
pub fn atom_poly(j: u32, grid: Option<&FreqGrid>) -> TrigPoly {
    let r = corona_outer(j).ceil() as i64;
    let c = atom_norm(j);
    let h = grid.map(|g| g.size() as i64 / 2);
    let inside = |a: i64| h.is_none_or(|h| a >= -h && a < h);
    TrigPoly::from_entries((-r..=r).filter(|&a| inside(a)).flat_map(|a| {
        (-r..=r).filter(move |&b| inside(b)).map(move |b| {
            (a, b, Complex64::new(c * window_wj(a as f64, b as f64, j), 0.0))
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{forward_ft, plancherel_inner};
    use crate::testutil::random_bandlimited;

    #[test]
    fn parseval_and_reconstruction() {
        let g = FreqGrid::new(64).unwrap();
        let frame = WaveletFrame::<f64>::new(&g);
        for seed in 0..10 {
            let f = random_bandlimited(&g, g.covered_band(), seed);
            let c = frame.analyze(&f);
            let e = c.energy();
            assert!((e / f.norm().powi(2) - 1.0).abs() < 1e-8);
            let back = frame.synthesize(&c);
            assert!(back.sub(&f).norm() / f.norm() < 1e-8);
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let g = FreqGrid::new(32).unwrap();
        let frame = WaveletFrame::<f64>::new(&g);
        let c = frame.analyze(&GridImage::zeros(&g));
        assert_eq!(c.l1(), 0.0);
        assert!(frame.synthesize(&c).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn corona_overlap_of_analysis() {
        let g = FreqGrid::new(256).unwrap();
        let frame = WaveletFrame::<f64>::new(&g);
        let base = forward_ft(&random_bandlimited(&g, 128, 3));
        let spec = base.multiply(|a, b| window_wj(a as f64, b as f64, 3));
        let c = frame.analyze_spectrum(&spec);
        for (j, field) in c.scales.iter().enumerate() {
            let active = field.energy() > 1e-20;
            assert_eq!(active, (2..=4).contains(&j), "scale {j}");
        }
    }

    #[test]
    fn atom_norm_independent_of_translation() {
        let g = FreqGrid::new(64).unwrap();
        let n0 = atom_spectrum(&g, WaveletIndex::new(3, (0, 0))).unwrap().norm();
        for k in 0..20i64 {
            let m = (k * 7 - 50, 13 - k * k);
            let n = atom_spectrum(&g, WaveletIndex::new(3, m)).unwrap().norm();
            assert!((n - n0).abs() < 1e-13);
        }
        assert!(atom_spectrum(&g, WaveletIndex::new(4, (0, 0))).is_err());
    }

    #[test]
    fn disjoint_coronas_are_orthogonal() {
        let g = FreqGrid::new(256).unwrap();
        let a = atom_spectrum(&g, WaveletIndex::new(2, (0, 0))).unwrap();
        let b = atom_spectrum(&g, WaveletIndex::new(4, (0, 0))).unwrap();
        assert_eq!(plancherel_inner(&a, &b).norm(), 0.0);
    }

    #[test]
    fn atom_analysis_hits_its_own_norm() {
        let g = FreqGrid::new(128).unwrap();
        let frame = WaveletFrame::<f64>::new(&g);
        let idx = WaveletIndex::new(3, (5, -2));
        let atom = atom_spectrum(&g, idx).unwrap();
        let c = frame.analyze_spectrum(&atom);
        // atom (3, m) sits at -m/64, i.e. grid point -2m for N = 128
        let n1 = (-2 * idx.m.0).rem_euclid(128) as usize;
        let n2 = (-2 * idx.m.1).rem_euclid(128) as usize;
        let v = c.scales[3].values[n1 * 128 + n2];
        assert!((v - atom.norm().powi(2)).abs() < 1e-12);
        let dec = c.decimated(3).unwrap();
        let n = WaveletIndex::new(3, (-idx.m.0, -idx.m.1)).reduced();
        assert_eq!(dec[(n.m.0 * 64 + n.m.1) as usize], v);
    }

    #[test]
    fn spatial_decay_envelope_uniform_in_scale() {
        // |psi_{j,0}(x)| <= C 2^{2j} prod <4^j x_i>^{-4} with one C for j = 2, 3, 4,
        // fitted where |4^j x| <= 8
        let g = FreqGrid::new(256).unwrap();
        let mut fitted = Vec::new();
        for j in [2u32, 3, 4] {
            let img = crate::grid::inverse_ft(&atom_spectrum(&g, WaveletIndex::new(j, (0, 0))).unwrap());
            let s = 4f64.powi(j as i32);
            let mut c = 0.0f64;
            for n1 in 0..256 {
                for n2 in 0..256 {
                    let wrap = |n: usize| {
                        let x = n as f64 / 256.0;
                        if x > 0.5 { x - 1.0 } else { x }
                    };
                    let bracket = |y: f64| (1.0 + (s * y).powi(2)).sqrt();
                    let env = s * (bracket(wrap(n1)) * bracket(wrap(n2))).powi(-4);
                    if s * wrap(n1).abs().max(wrap(n2).abs()) <= 8.0 {
                        c = c.max(img.get(n1, n2).abs() / env);
                    }
                }
            }
            fitted.push(c);
        }
        // scale 2 is sampled on a handful of lattice points, so only a loose match
        let (lo, hi) = fitted.iter().fold((f64::MAX, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(hi / lo < 4.0, "{fitted:?}");
        assert!((fitted[1] / fitted[2] - 1.0).abs() < 0.5, "{fitted:?}");
    }
}
