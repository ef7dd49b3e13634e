//! Bandlimited alpha-shearlet frame and its synthesis pseudo-dual.
//!
//! Subband `(j, l, cone)` has the real even symbol
//! `W_j(xi) v(2^{(2-alpha)j} slope - l)` windowed by `chi` (primal) or
//! `gamma` (dual), where the slope is `xi2/xi1` in the horizontal cone and
//! `xi1/xi2` in the vertical one. Atoms carry the normalization `d^{-1/2}`
//! with `d = n1 * 4^j` the density of the decimated lattice and
//! `n1 = round(2^{alpha j})`.

use num_complex::Complex64;

use crate::bank::{self, SparseSymbol};
use crate::error::{Error, Result};
use crate::generators::{chi, corona_outer, gamma, shear_factor, window_wj, ConeTag};
use crate::grid::{forward_ft, inverse_ft, Fft2, FreqGrid, GridImage, Spectrum};
use crate::lattice::{Rational, TrigPoly};
use crate::wavelet::{square_points, CoeffField};
use crate::Real;

/// Analysis window selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Primal,
    Dual,
}

/// Anisotropy and cluster exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParams {
    pub alpha: f64,
    pub eps: f64,
}

impl AlphaParams {
    pub fn new(alpha: f64, eps: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let bound = (2.0 - alpha) / 4.0;
        if !(eps > 0.0 && eps < bound) {
            return Err(Error::BadEps { eps, bound });
        }
        Ok(Self { alpha, eps })
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if !(1.0..2.0).contains(&alpha) {
        return Err(Error::BadAlpha(alpha));
    }
    Ok(())
}

/// `ceil(2 * 2^{(2-alpha)j})`.
pub fn shear_range(j: u32, alpha: f64) -> i64 {
    (2.0 * 2f64.powf((2.0 - alpha) * j as f64)).ceil() as i64
}

/// Coarse lattice size `round(2^{alpha j})` along the long atom axis.
pub fn lattice_size(j: u32, alpha: f64) -> i64 {
    (2f64.powf(alpha * j as f64).round() as i64).max(1)
}

/// Atoms per unit area at scale `j`: `round(2^{alpha j}) * 4^j`.
pub fn density(j: u32, alpha: f64) -> f64 {
    lattice_size(j, alpha) as f64 * 4f64.powi(j as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubbandKey {
    pub j: u32,
    pub l: i64,
    pub cone: ConeTag,
}

impl SubbandKey {
    pub fn new(j: u32, l: i64, cone: ConeTag, alpha: f64) -> Result<Self> {
        let range = shear_range(j, alpha);
        if l.abs() > range {
            return Err(Error::ShearOutOfRange { j, l, range });
        }
        if cone == ConeTag::Low {
            return Err(Error::Config("subbands live in the h or v cone".into()));
        }
        Ok(Self { j, l, cone })
    }

    /// Directional factor times the scale window, without cone window.
    pub fn base(&self, xi1: f64, xi2: f64, alpha: f64) -> f64 {
        let w = window_wj(xi1, xi2, self.j);
        if w == 0.0 {
            return 0.0;
        }
        w * shear_factor(xi1, xi2, self.cone, self.j, self.l, alpha)
    }

    /// Windowed symbol value without the atom normalization.
    pub fn symbol(&self, xi1: f64, xi2: f64, alpha: f64, variant: Variant) -> f64 {
        let b = self.base(xi1, xi2, alpha);
        if b == 0.0 {
            return 0.0;
        }
        b * window(xi1, xi2, self.cone, variant)
    }

    /// Candidate lattice points of the subband (a superset of its support).
    pub fn points(&self, alpha: f64) -> Vec<(i64, i64)> {
        let r = corona_outer(self.j).ceil() as i64;
        let s = 2f64.powf((2.0 - alpha) * self.j as f64);
        let lo = (self.l as f64 - 1.5) / s;
        let hi = (self.l as f64 + 1.5) / s;
        let mut out = Vec::new();
        for a in -r..=r {
            if a == 0 {
                continue;
            }
            let (u, v) = (a as f64 * lo, a as f64 * hi);
            let (u, v) = if u <= v { (u, v) } else { (v, u) };
            let b0 = (u.floor() as i64).max(-r);
            let b1 = (v.ceil() as i64).min(r);
            for b in b0..=b1 {
                // `a` runs along the cone axis, `b` across it
                out.push(match self.cone {
                    ConeTag::H => (a, b),
                    _ => (b, a),
                });
            }
        }
        out
    }
}

fn window(xi1: f64, xi2: f64, cone: ConeTag, variant: Variant) -> f64 {
    match variant {
        Variant::Primal => chi(xi1, xi2, cone),
        Variant::Dual => gamma(xi1, xi2, cone),
    }
}

/// Translation index of a single atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShearletIndex {
    pub key: SubbandKey,
    pub k: (i64, i64),
}

impl ShearletIndex {
    /// Atom position `-A^{-j} S^{-l} k`, with `2^{alpha j}` rounded to the
    /// lattice size.
    pub fn position(&self, alpha: f64) -> (Rational, Rational) {
        let n1 = lattice_size(self.key.j, alpha);
        let fine = 1i64 << (2 * self.key.j);
        let (k1, k2) = self.k;
        let l = self.key.l;
        match self.key.cone {
            ConeTag::H => (Rational::new(-(k1 - l * k2), fine), Rational::new(-k2, n1)),
            _ => (Rational::new(-k1, n1), Rational::new(-(k2 - l * k1), fine)),
        }
    }
}

/// Subband symbol with atom normalization as a sparse polynomial.
pub fn subband_poly(key: SubbandKey, alpha: f64, variant: Variant, grid: Option<&FreqGrid>) -> TrigPoly {
    let c = density(key.j, alpha).powf(-0.5);
    let h = grid.map(|g| g.size() as i64 / 2);
    TrigPoly::from_entries(key.points(alpha).into_iter().filter_map(|(a, b)| {
        if let Some(h) = h {
            if a < -h || a >= h || b < -h || b >= h {
                return None;
            }
        }
        let v = key.symbol(a as f64, b as f64, alpha, variant);
        (v != 0.0).then_some((a, b, Complex64::new(c * v, 0.0)))
    }))
}

#[derive(Debug, Clone)]
pub struct ShearletBand<T> {
    pub key: SubbandKey,
    pub primal: SparseSymbol<T>,
    pub dual: SparseSymbol<T>,
}

#[derive(Debug, Clone)]
pub struct ShearletCoeffs<T> {
    pub n: usize,
    pub keys: Vec<SubbandKey>,
    pub bands: Vec<CoeffField<T>>,
    pub low: CoeffField<T>,
}

impl<T: Real> ShearletCoeffs<T> {
    pub fn l1(&self) -> f64 {
        self.bands.iter().map(|c| c.l1()).sum::<f64>() + self.low.l1()
    }

    pub fn energy(&self) -> f64 {
        self.bands.iter().map(|c| c.energy()).sum::<f64>() + self.low.energy()
    }
}

/// Shearlet frame pair on one grid.
#[derive(Debug, Clone)]
pub struct ShearletFrame<T> {
    grid: FreqGrid,
    alpha: f64,
    bands: Vec<ShearletBand<T>>,
    low_primal: SparseSymbol<T>,
    low_dual: SparseSymbol<T>,
}

/// All subband keys up to scale `j_max`.
pub fn subband_keys(j_max: u32, alpha: f64) -> Vec<SubbandKey> {
    let mut keys = Vec::new();
    for j in 0..=j_max {
        let r = shear_range(j, alpha);
        for cone in [ConeTag::H, ConeTag::V] {
            for l in -r..=r {
                keys.push(SubbandKey { j, l, cone });
            }
        }
    }
    keys
}

/// Low square `|xi|_inf <= 1`.
fn in_low_square(a: i64, b: i64) -> bool {
    a.abs() <= 1 && b.abs() <= 1
}

impl<T: Real> ShearletFrame<T> {
    pub fn new(grid: &FreqGrid, alpha: f64) -> Result<Self> {
        Self::with_scales(grid, alpha, 0..=grid.j_max())
    }

    /// Frame restricted to the given scales (the low band is always kept).
    pub fn with_scales(grid: &FreqGrid, alpha: f64, scales: std::ops::RangeInclusive<u32>) -> Result<Self> {
        check_alpha(alpha)?;
        let bands = subband_keys(*scales.end(), alpha)
            .into_iter()
            .filter(|k| scales.contains(&k.j))
            .map(|key| {
                let pts = key.points(alpha);
                let base = SparseSymbol::<T>::from_points(grid, pts, |a, b| {
                    T::lit(key.base(a as f64, b as f64, alpha))
                });
                let primal = base.map(grid, |a, b, v| v * T::lit(window(a as f64, b as f64, key.cone, Variant::Primal)));
                let dual = base.map(grid, |a, b, v| v * T::lit(window(a as f64, b as f64, key.cone, Variant::Dual)));
                ShearletBand { key, primal, dual }
            })
            .collect();
        let low = |w: fn(f64, f64, ConeTag) -> f64| {
            SparseSymbol::from_points(grid, square_points(grid, 1), move |a, b| {
                if in_low_square(a, b) {
                    T::lit(w(a as f64, b as f64, ConeTag::Low))
                } else {
                    T::zero()
                }
            })
        };
        Ok(Self {
            grid: *grid,
            alpha,
            bands,
            low_primal: low(chi::<f64>),
            low_dual: low(gamma::<f64>),
        })
    }

    pub fn grid(&self) -> &FreqGrid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bands(&self) -> &[ShearletBand<T>] {
        &self.bands
    }

    pub fn band(&self, key: SubbandKey) -> Option<&ShearletBand<T>> {
        self.bands.iter().find(|b| b.key == key)
    }

    pub fn low_symbol(&self, variant: Variant) -> &SparseSymbol<T> {
        match variant {
            Variant::Primal => &self.low_primal,
            Variant::Dual => &self.low_dual,
        }
    }

    fn bank(&self, variant: Variant, sign: f64) -> Vec<(&SparseSymbol<T>, T)> {
        let mut b: Vec<(&SparseSymbol<T>, T)> = self
            .bands
            .iter()
            .map(|band| {
                let s = match variant {
                    Variant::Primal => &band.primal,
                    Variant::Dual => &band.dual,
                };
                (s, T::lit(density(band.key.j, self.alpha).powf(-0.5 * sign)))
            })
            .collect();
        b.push((self.low_symbol(variant), T::one()));
        b
    }

    pub fn analyze(&self, img: &GridImage<T>, variant: Variant) -> ShearletCoeffs<T> {
        self.analyze_spectrum(&forward_ft(img), variant)
    }

    pub fn analyze_spectrum(&self, spec: &Spectrum<T>, variant: Variant) -> ShearletCoeffs<T> {
        let mut fft = Fft2::new(self.grid.size());
        let mut fields = bank::analyze(&mut fft, spec, &self.bank(variant, 1.0));
        let low = fields.pop().expect("low band");
        let bands = fields
            .into_iter()
            .zip(&self.bands)
            .map(|(values, b)| CoeffField { density: density(b.key.j, self.alpha), values })
            .collect();
        ShearletCoeffs {
            n: self.grid.size(),
            keys: self.bands.iter().map(|b| b.key).collect(),
            bands,
            low: CoeffField { density: 1.0, values: low },
        }
    }

    /// Synthesis with the `variant` symbols (adjoint of that analysis).
    pub fn synthesize(&self, coeffs: &ShearletCoeffs<T>, variant: Variant) -> GridImage<T> {
        inverse_ft(&self.synthesize_spectrum(coeffs, variant))
    }

    pub fn synthesize_spectrum(&self, coeffs: &ShearletCoeffs<T>, variant: Variant) -> Spectrum<T> {
        let mut fft = Fft2::new(self.grid.size());
        let mut fields: Vec<&[T]> = coeffs.bands.iter().map(|c| c.values.as_slice()).collect();
        fields.push(&coeffs.low.values);
        bank::synthesize(&mut fft, &self.grid, &fields, &self.bank(variant, -1.0))
    }

    /// `sum_b |symbol_b|^2` (plus the low band) at every lattice point.
    pub fn aggregate(&self, variant: Variant) -> Vec<T> {
        let mut acc = vec![T::zero(); self.grid.len()];
        for (s, _) in self.bank(variant, 1.0) {
            for (i, v) in s.iter() {
                acc[i] = acc[i] + v * v;
            }
        }
        acc
    }

    /// `sum_b primal_b * dual_b` (plus the low band) at every lattice point.
    pub fn duality_multiplier(&self) -> Vec<T> {
        let mut acc = vec![T::zero(); self.grid.len()];
        let mut add = |p: &SparseSymbol<T>, d: &SparseSymbol<T>| {
            // both symbols share the sorted support of the base symbol
            let (mut x, mut y) = (0, 0);
            while x < p.idx.len() && y < d.idx.len() {
                match p.idx[x].cmp(&d.idx[y]) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        let i = p.idx[x] as usize;
                        acc[i] = acc[i] + p.val[x] * d.val[y];
                        x += 1;
                        y += 1;
                    }
                }
            }
        };
        for b in &self.bands {
            add(&b.primal, &b.dual);
        }
        add(&self.low_primal, &self.low_dual);
        acc
    }

    /// Un-windowed aggregate `sum_{j,l} (W_j v)^2` of one cone.
    pub fn cone_aggregate(&self, cone: ConeTag) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid.len()];
        for b in self.bands.iter().filter(|b| b.key.cone == cone) {
            for (a, c) in b.key.points(self.alpha) {
                if let Some(i) = self.grid.flat(a, c) {
                    acc[i] += b.key.base(a as f64, c as f64, self.alpha).powi(2);
                }
            }
        }
        acc
    }

    /// Min and max of the aggregate squared symbol over the covered band.
    pub fn frame_bounds(&self, variant: Variant) -> (f64, f64) {
        let agg = self.aggregate(variant);
        let band = self.grid.covered_band();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (f, a, b) in self.grid.points() {
            if a.abs() <= band && b.abs() <= band {
                let v = agg[f].to_f64_lossy();
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_bandlimited;

    #[test]
    fn shear_range_formula() {
        assert_eq!(shear_range(0, 1.0), 2);
        assert_eq!(shear_range(0, 1.7), 2);
        assert_eq!(shear_range(1, 1.0), 4);
        assert_eq!(shear_range(3, 1.5), 6);
    }

    #[test]
    fn lattice_sizes_and_density() {
        assert_eq!(lattice_size(3, 1.0), 8);
        assert_eq!(lattice_size(3, 1.5), 23);
        assert_eq!(density(2, 1.0), 64.0);
        assert!(AlphaParams::new(2.0, 0.1).is_err());
        assert!(AlphaParams::new(1.0, 0.25).is_err());
        assert!(AlphaParams::new(1.0, 0.0).is_err());
        assert!(AlphaParams::new(1.5, 0.1).is_ok());
    }

    #[test]
    fn candidate_points_cover_support() {
        for alpha in [1.0, 1.5, 1.9] {
            for j in 2..=3u32 {
                let r = shear_range(j, alpha);
                for cone in [ConeTag::H, ConeTag::V] {
                    for l in -r..=r {
                        let key = SubbandKey { j, l, cone };
                        let pts: std::collections::HashSet<_> = key.points(alpha).into_iter().collect();
                        let h = corona_outer(j) as i64 + 1;
                        for a in -h..=h {
                            for b in -h..=h {
                                if key.base(a as f64, b as f64, alpha) != 0.0 {
                                    assert!(pts.contains(&(a, b)), "{key:?} ({a},{b})");
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn symbol_support_examples() {
        let key = SubbandKey::new(2, 0, ConeTag::V, 1.0).unwrap();
        for a in -8..=8 {
            for b in -8..=8 {
                let v = key.symbol(a as f64, b as f64, 1.0, Variant::Primal);
                if (b as i64).abs() > 4 {
                    assert_eq!(v, 0.0);
                }
                if v != 0.0 {
                    assert!((a as f64 / b as f64).abs() < 1.5 / 4.0);
                }
            }
        }
        let h = SubbandKey::new(3, 2, ConeTag::H, 1.0).unwrap();
        for t in 1..20 {
            assert_eq!(h.symbol(0.0, t as f64, 1.0, Variant::Primal), 0.0);
            assert_eq!(h.symbol(0.0, -(t as f64), 1.0, Variant::Dual), 0.0);
        }
        assert!(SubbandKey::new(1, 5, ConeTag::H, 1.0).is_err());
    }

    #[test]
    fn duality_and_round_trip() {
        let g = FreqGrid::new(64).unwrap();
        for alpha in [1.0, 1.5] {
            let frame = ShearletFrame::<f64>::new(&g, alpha).unwrap();
            let mult = frame.duality_multiplier();
            let band = g.covered_band();
            for (f, a, b) in g.points() {
                if a.abs() <= band && b.abs() <= band {
                    assert!((mult[f] - 1.0).abs() < 1e-10, "({a},{b}) {}", mult[f]);
                }
            }
            let f = random_bandlimited(&g, band, 11);
            for (fwd, back) in [(Variant::Primal, Variant::Dual), (Variant::Dual, Variant::Primal)] {
                let c = frame.analyze(&f, fwd);
                let r = frame.synthesize(&c, back);
                assert!(r.sub(&f).norm() / f.norm() < 1e-8);
            }
        }
    }

    #[test]
    fn frame_bounds_within_theory() {
        let g = FreqGrid::new(64).unwrap();
        let frame = ShearletFrame::<f64>::new(&g, 1.0).unwrap();
        let (a, b) = frame.frame_bounds(Variant::Primal);
        assert!(a <= b);
        assert!(a >= 1.0 / 3.0 - 1e-9 && b <= 3.0 + 1e-9, "{a} {b}");
        let f = random_bandlimited(&g, g.covered_band(), 5);
        let ratio = frame.analyze(&f, Variant::Primal).energy() / f.norm().powi(2);
        assert!(ratio >= a - 1e-9 && ratio <= b + 1e-9);
    }

    #[test]
    fn cone_parseval_unwindowed() {
        let g = FreqGrid::new(64).unwrap();
        let frame = ShearletFrame::<f64>::new(&g, 1.0).unwrap();
        let h = frame.cone_aggregate(ConeTag::H);
        let band = g.covered_band();
        for (f, a, b) in g.points() {
            if a != 0 && a.abs() <= band && b.abs() <= band && (b as f64 / a as f64).abs() < 1.5 {
                assert!((h[f] - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_image() {
        let g = FreqGrid::new(32).unwrap();
        let frame = ShearletFrame::<f64>::new(&g, 1.0).unwrap();
        let c = frame.analyze(&GridImage::zeros(&g), Variant::Primal);
        assert_eq!(c.l1(), 0.0);
        assert_eq!(frame.synthesize(&c, Variant::Dual).norm(), 0.0);
    }
}
