//! Banks of real, even Fourier multipliers applied to real fields.
//!
//! Every frame symbol in this crate is real and even, so each subband
//! field of a real image is real. Two subbands are packed into the real and
//! imaginary parts of one complex transform.

use num_complex::Complex;

use crate::grid::{Fft2, FreqGrid, Spectrum};
use crate::Real;

/// Real symbol stored on its nonzero lattice points.
#[derive(Debug, Clone, Default)]
pub struct SparseSymbol<T> {
    pub idx: Vec<u32>,
    pub val: Vec<T>,
}

impl<T: Real> SparseSymbol<T> {
    /// Symbol from candidate lattice points; zeros and points off the grid
    /// are skipped, duplicates must not occur.
    pub fn from_points(
        grid: &FreqGrid,
        points: impl IntoIterator<Item = (i64, i64)>,
        f: impl Fn(i64, i64) -> T,
    ) -> Self {
        let mut pairs: Vec<(u32, T)> = points
            .into_iter()
            .filter_map(|(a, b)| {
                let flat = grid.flat(a, b)?;
                let v = f(a, b);
                (v != T::zero()).then_some((flat as u32, v))
            })
            .collect();
        pairs.sort_by_key(|p| p.0);
        pairs.dedup_by_key(|p| p.0);
        let (idx, val) = pairs.into_iter().unzip();
        Self { idx, val }
    }

    /// Symbol scanned over the whole lattice.
    pub fn dense(grid: &FreqGrid, f: impl Fn(i64, i64) -> T) -> Self {
        Self::from_points(grid, grid.points().map(|(_, a, b)| (a, b)), f)
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.idx.iter().zip(&self.val).map(|(&i, &v)| (i as usize, v))
    }

    /// Pointwise product with another real factor.
    pub fn map(&self, grid: &FreqGrid, f: impl Fn(i64, i64, T) -> T) -> Self {
        let mut out = Self::default();
        for (i, v) in self.iter() {
            let (a, b) = grid.freq(i);
            let w = f(a, b, v);
            if w != T::zero() {
                out.idx.push(i as u32);
                out.val.push(w);
            }
        }
        out
    }

    pub fn to_spectrum(&self, grid: &FreqGrid) -> Spectrum<T> {
        let mut s = Spectrum::zeros(grid);
        for (i, v) in self.iter() {
            s.values_mut()[i] = Complex::new(v, T::zero());
        }
        s
    }
}

/// Fields `scale_b * IFFT(spec * symbol_b)` for every symbol of the bank.
pub(crate) fn analyze<T: Real>(
    fft: &mut Fft2<T>,
    spec: &Spectrum<T>,
    bank: &[(&SparseSymbol<T>, T)],
) -> Vec<Vec<T>> {
    let len = spec.values().len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut out: Vec<Vec<T>> = Vec::with_capacity(bank.len());
    let mut buf = vec![zero; len];
    for pair in bank.chunks(2) {
        if pair.iter().all(|(s, _)| s.is_empty()) {
            out.extend(pair.iter().map(|_| vec![T::zero(); len]));
            continue;
        }
        buf.iter_mut().for_each(|v| *v = zero);
        let (s0, c0) = pair[0];
        for (i, v) in s0.iter() {
            buf[i] = spec.values()[i] * (v * c0);
        }
        if let Some(&(s1, c1)) = pair.get(1) {
            for (i, v) in s1.iter() {
                let z = spec.values()[i] * (v * c1);
                buf[i] += Complex::new(-z.im, z.re);
            }
        }
        fft.inverse(&mut buf);
        out.push(buf.iter().map(|z| z.re).collect());
        if pair.len() == 2 {
            out.push(buf.iter().map(|z| z.im).collect());
        }
    }
    out
}

/// `sum_b scale_b * symbol_b * FT(field_b)` with the normalized forward
/// transform.
pub(crate) fn synthesize<T: Real>(
    fft: &mut Fft2<T>,
    grid: &FreqGrid,
    fields: &[&[T]],
    bank: &[(&SparseSymbol<T>, T)],
) -> Spectrum<T> {
    let len = grid.len();
    let zero = Complex::new(T::zero(), T::zero());
    let half = T::lit(0.5) / T::lit(len as f64);
    let mut acc = Spectrum::zeros(grid);
    let mut buf = vec![zero; len];
    let pairs: Vec<usize> = (0..fields.len()).step_by(2).collect();
    for p in pairs {
        let (s0, c0) = bank[p];
        let second = (p + 1 < fields.len()).then(|| (fields[p + 1], bank[p + 1]));
        if s0.is_empty() && second.is_none_or(|(_, (s, _))| s.is_empty()) {
            continue;
        }
        match second {
            Some((f1, _)) => {
                for ((b, &x), &y) in buf.iter_mut().zip(fields[p]).zip(f1) {
                    *b = Complex::new(x, y);
                }
            }
            None => {
                for (b, &x) in buf.iter_mut().zip(fields[p]) {
                    *b = Complex::new(x, T::zero());
                }
            }
        }
        fft.forward(&mut buf);
        let out = acc.values_mut();
        for (i, v) in s0.iter() {
            let z = buf[i];
            let zm = buf[grid.mirror(i)].conj();
            out[i] += (z + zm) * (half * v * c0);
        }
        if let Some((_, (s1, c1))) = second {
            for (i, v) in s1.iter() {
                let z = buf[i];
                let zm = buf[grid.mirror(i)].conj();
                let d = z - zm;
                // (z - conj z(-xi)) / (2i)
                out[i] += Complex::new(d.im, -d.re) * (half * v * c1);
            }
        }
    }
    acc
}
