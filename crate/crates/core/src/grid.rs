//! Discrete torus, integer frequency lattice and the normalized Fourier pair.
//!
//! Spatial samples sit at `x = (n1/N, n2/N)` with cell weight `1/N^2`;
//! spectra hold Fourier-series coefficients indexed by `xi` in
//! `[-N/2, N/2)^2` with weight 1, so Plancherel reads
//! `sum_xi a conj(b) = (1/N^2) sum_x a conj(b)`.
//! Storage is row-major with the first axis carrying `x1`/`xi1` and spectra
//! kept in FFT bin order (`xi mod N`).

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::Real;

/// Square frequency lattice of a power-of-two torus grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreqGrid {
    n: usize,
    j_max: u32,
}

impl FreqGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::BadGridSize(n));
        }
        // largest j with 2^(2j-2) <= N/2
        let mut j_max = 0u32;
        while (1usize << (2 * (j_max + 1)).saturating_sub(2)) <= n / 2 {
            j_max += 1;
        }
        Ok(Self { n, j_max })
    }

    /// Grid without the size floor, used for solver working grids.
    pub(crate) fn working(n: usize) -> Self {
        debug_assert!(n.is_power_of_two() && n >= 2);
        let mut j_max = 0u32;
        while (1usize << (2 * (j_max + 1)).saturating_sub(2)) <= n / 2 {
            j_max += 1;
        }
        Self { n, j_max }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    /// Half-width of the band on which the frame partitions of unity hold:
    /// `|xi|_inf <= 2^(2 j_max - 3)`.
    pub fn covered_band(&self) -> i64 {
        if self.j_max < 2 {
            return 0;
        }
        1i64 << (2 * self.j_max - 3)
    }

    pub fn check_scale(&self, j: u32) -> Result<()> {
        if j > self.j_max {
            return Err(Error::ScaleOutOfRange { j, j_max: self.j_max });
        }
        Ok(())
    }

    /// Lattice coordinate of FFT bin `b`.
    #[inline]
    pub fn freq_of_bin(&self, b: usize) -> i64 {
        if b < self.n / 2 {
            b as i64
        } else {
            b as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn bin_of_freq(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Lattice point of flat spectrum index.
    #[inline]
    pub fn freq(&self, flat: usize) -> (i64, i64) {
        (self.freq_of_bin(flat / self.n), self.freq_of_bin(flat % self.n))
    }

    /// Flat spectrum index of a lattice point, if representable.
    #[inline]
    pub fn flat(&self, xi1: i64, xi2: i64) -> Option<usize> {
        let h = (self.n / 2) as i64;
        if xi1 < -h || xi1 >= h || xi2 < -h || xi2 >= h {
            return None;
        }
        Some(self.bin_of_freq(xi1) * self.n + self.bin_of_freq(xi2))
    }

    /// Flat index of the frequency `-xi` (conjugate partner).
    #[inline]
    pub fn mirror(&self, flat: usize) -> usize {
        let (b1, b2) = (flat / self.n, flat % self.n);
        ((self.n - b1) % self.n) * self.n + (self.n - b2) % self.n
    }

    /// Iterate over `(flat, xi1, xi2)` for every lattice point.
    pub fn points(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        (0..self.len()).map(move |f| {
            let (a, b) = self.freq(f);
            (f, a, b)
        })
    }
}

/// Real field on the torus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridImage<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Real> GridImage<T> {
    pub fn zeros(grid: &FreqGrid) -> Self {
        Self { n: grid.size(), values: vec![T::zero(); grid.len()] }
    }

    pub fn from_vec(grid: &FreqGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite sample".into()));
        }
        Ok(Self { n: grid.size(), values })
    }

    /// Image sampled from a function of `(x1, x2)` in `[0,1)^2`.
    pub fn from_fn(grid: &FreqGrid, mut f: impl FnMut(f64, f64) -> T) -> Self {
        let n = grid.size();
        let h = 1.0 / n as f64;
        let values = (0..n * n).map(|i| f((i / n) as f64 * h, (i % n) as f64 * h)).collect();
        Self { n, values }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, n1: usize, n2: usize) -> T {
        self.values[n1 * self.n + n2]
    }

    /// `L2` norm with cell weight `1/N^2`.
    pub fn norm(&self) -> T {
        let s: f64 = self.values.iter().map(|v| v.to_f64_lossy().powi(2)).sum();
        T::lit((s / self.values.len() as f64).sqrt())
    }

    /// Weighted spatial inner product.
    pub fn inner(&self, other: &Self) -> T {
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.to_f64_lossy() * b.to_f64_lossy())
            .sum();
        T::lit(s / self.values.len() as f64)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { n: self.n, values: self.values.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect();
        Self { n: self.n, values }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        Self { n: self.n, values }
    }
}

/// Complex Fourier-series coefficients in FFT bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    n: usize,
    values: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn zeros(grid: &FreqGrid) -> Self {
        Self { n: grid.size(), values: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    pub fn from_vec(grid: &FreqGrid, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape { expected: grid.len(), got: values.len() });
        }
        Ok(Self { n: grid.size(), values })
    }

    /// Spectrum given pointwise on the lattice.
    pub fn from_fn(grid: &FreqGrid, mut f: impl FnMut(i64, i64) -> Complex<T>) -> Self {
        let values = grid.points().map(|(_, a, b)| f(a, b)).collect();
        Self { n: grid.size(), values }
    }

    pub fn grid(&self) -> FreqGrid {
        FreqGrid::working(self.n)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.values
    }

    /// Coefficient at lattice point `xi`, zero if not representable.
    pub fn at(&self, xi1: i64, xi2: i64) -> Complex<T> {
        match self.grid().flat(xi1, xi2) {
            Some(f) => self.values[f],
            None => Complex::new(T::zero(), T::zero()),
        }
    }

    /// Pointwise product with a real symbol given on the lattice.
    pub fn multiply(&self, symbol: impl Fn(i64, i64) -> T) -> Self {
        let g = self.grid();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(f, &v)| {
                let (a, b) = g.freq(f);
                v * symbol(a, b)
            })
            .collect();
        Self { n: self.n, values }
    }

    pub fn add(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect();
        Self { n: self.n, values }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        Self { n: self.n, values }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { n: self.n, values: self.values.iter().map(|&v| v * s).collect() }
    }

    /// `L2` norm (frequency weight 1), equal to the spatial norm.
    pub fn norm(&self) -> T {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr().to_f64_lossy()).sum();
        T::lit(s.sqrt())
    }

    /// Copy onto a grid of size `m`, keeping the lattice points both share.
    /// Exact for spectra supported in `[-m/2, m/2)^2`.
    pub fn resampled(&self, m: usize) -> Self {
        let src = self.grid();
        let dst = FreqGrid::working(m);
        let mut out = Self { n: m, values: vec![Complex::new(T::zero(), T::zero()); m * m] };
        for (f, a, b) in dst.points() {
            if let Some(s) = src.flat(a, b) {
                out.values[f] = self.values[s];
            }
        }
        out
    }

    /// Largest deviation from conjugate symmetry `F(-xi) = conj(F(xi))`.
    pub fn hermitian_defect(&self) -> T {
        let g = self.grid();
        let mut worst = T::zero();
        for f in 0..self.values.len() {
            let d = (self.values[f] - self.values[g.mirror(f)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
        worst
    }
}

/// Planned 2D transform of one square size.
pub struct Fft2<T: Real> {
    n: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> Fft2<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self { n, fwd, inv, scratch: vec![Complex::new(T::zero(), T::zero()); len] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Unnormalized forward DFT `sum_x a(x) e^{-2 pi i x.xi}` in place.
    pub fn forward(&mut self, buf: &mut [Complex<T>]) {
        let fft = Arc::clone(&self.fwd);
        self.apply(&*fft, buf);
    }

    /// Unnormalized inverse DFT `sum_xi a(xi) e^{2 pi i x.xi}` in place.
    pub fn inverse(&mut self, buf: &mut [Complex<T>]) {
        let fft = Arc::clone(&self.inv);
        self.apply(&*fft, buf);
    }

    fn apply(&mut self, fft: &dyn Fft<T>, buf: &mut [Complex<T>]) {
        assert_eq!(buf.len(), self.n * self.n);
        fft.process_with_scratch(buf, &mut self.scratch);
        transpose_in_place(buf, self.n);
        fft.process_with_scratch(buf, &mut self.scratch);
        transpose_in_place(buf, self.n);
    }
}

fn transpose_in_place<T: Copy>(buf: &mut [T], n: usize) {
    const B: usize = 32;
    let mut bi = 0;
    while bi < n {
        let mut bj = bi;
        while bj < n {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    buf.swap(i * n + j, j * n + i);
                }
            }
            bj += B;
        }
        bi += B;
    }
}

/// Normalized forward transform (Fourier-series coefficients).
pub fn forward_ft<T: Real>(img: &GridImage<T>) -> Spectrum<T> {
    let n = img.size();
    let mut buf: Vec<Complex<T>> =
        img.values().iter().map(|&v| Complex::new(v, T::zero())).collect();
    Fft2::new(n).forward(&mut buf);
    let s = T::one() / T::lit((n * n) as f64);
    for v in &mut buf {
        *v = *v * s;
    }
    Spectrum { n, values: buf }
}

/// Inverse transform returning the full complex field.
pub fn inverse_ft_complex<T: Real>(spec: &Spectrum<T>) -> Vec<Complex<T>> {
    let mut buf = spec.values().to_vec();
    Fft2::new(spec.size()).inverse(&mut buf);
    buf
}

/// Inverse transform keeping the real part. For conjugate-symmetric spectra
/// the discarded imaginary residue is roundoff.
pub fn inverse_ft<T: Real>(spec: &Spectrum<T>) -> GridImage<T> {
    let n = spec.size();
    let values = inverse_ft_complex(spec).into_iter().map(|c| c.re).collect();
    GridImage { n, values }
}

/// Frequency-side inner product `sum_xi a(xi) conj(b(xi))`.
pub fn plancherel_inner<T: Real>(a: &Spectrum<T>, b: &Spectrum<T>) -> Complex<T> {
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    for (x, y) in a.values().iter().zip(b.values()) {
        let p = *x * y.conj();
        re += p.re.to_f64_lossy();
        im += p.im.to_f64_lossy();
    }
    Complex::new(T::lit(re), T::lit(im))
}

/// Spatial inner product `(1/N^2) sum_x a(x) conj(b(x))` of complex fields.
pub fn spatial_inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let p = *x * y.conj();
        re += p.re.to_f64_lossy();
        im += p.im.to_f64_lossy();
    }
    let w = a.len() as f64;
    Complex::new(T::lit(re / w), T::lit(im / w))
}
