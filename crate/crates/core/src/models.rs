//! Synthetic ground truth: point singularities `sum c_i |x - x_i|^{-lambda_i}`
//! and a smoothly weighted line distribution, plus the subband filters.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generators::{omega_hat, ramp, window_wj};
use crate::grid::{inverse_ft, FreqGrid, GridImage, Spectrum};
use crate::lattice::{phase, Rational};

/// One point singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSource {
    pub x: (f64, f64),
    pub lambda: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointModel {
    pub points: Vec<PointSource>,
}

impl PointModel {
    pub fn new(points: Vec<PointSource>) -> Result<Self> {
        for p in &points {
            if !(p.lambda > 0.0 && p.lambda < 2.0) {
                return Err(Error::Model(format!("exponent {} outside (0, 2)", p.lambda)));
            }
            if !(p.c > 0.0) || !p.c.is_finite() {
                return Err(Error::Model(format!("amplitude {} must be positive", p.c)));
            }
            if !(p.x.0.is_finite() && p.x.1.is_finite()) {
                return Err(Error::Model("non-finite position".into()));
            }
        }
        Ok(Self { points })
    }

    /// A single unit point at `(1/4, 1/4)` with exponent 3/2.
    pub fn single_default() -> Self {
        Self { points: vec![PointSource { x: (0.25, 0.25), lambda: 1.5, c: 1.0 }] }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Line `x2 = offset` weighted by `w(x1 - center)`, `supp w = [-rho, rho]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineModel {
    pub rho: f64,
    pub offset: f64,
    pub center: f64,
}

impl LineModel {
    pub fn new(rho: f64, offset: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 0.5) {
            return Err(Error::Model(format!("line half-width {rho} outside (0, 1/2)")));
        }
        if !offset.is_finite() {
            return Err(Error::Model("non-finite line offset".into()));
        }
        Ok(Self { rho, offset, center: 0.5 })
    }
}

impl Default for LineModel {
    fn default() -> Self {
        Self { rho: 0.25, offset: 0.5, center: 0.5 }
    }
}

/// Point and line components together.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub points: PointModel,
    pub line: Option<LineModel>,
}

impl Default for Scene {
    fn default() -> Self {
        Self { points: PointModel::single_default(), line: Some(LineModel::default()) }
    }
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() && self.line.is_none() {
            return Err(Error::Model("scene has neither points nor a line".into()));
        }
        Ok(())
    }
}

/// Line weight `theta((t + rho)/rho) theta((rho - t)/rho)`.
pub fn weight(t: f64, rho: f64) -> f64 {
    ramp((t + rho) / rho) * ramp((rho - t) / rho)
}

/// `w_hat(xi) = int_{-rho}^{rho} w(t) e^{-2 pi i xi t} dt` by the trapezoid
/// rule with `samples` intervals. The weight is even, so the transform is real.
pub fn weight_transform(xi: f64, rho: f64, samples: usize) -> f64 {
    let h = 2.0 * rho / samples as f64;
    // endpoints carry zero weight
    (1..samples)
        .map(|i| {
            let t = -rho + i as f64 * h;
            weight(t, rho) * (TAU * xi * t).cos()
        })
        .sum::<f64>()
        * h
}

fn torus_point(x: f64) -> Rational {
    // positions are snapped to a fine dyadic grid so phases stay exact
    const D: i64 = 1 << 30;
    Rational::new((x * D as f64).round() as i64, D)
}

/// Spectrum `sum_i c_i e^{-2 pi i xi.x_i} |xi|^{-(2 - lambda_i)}`, 0 at the origin.
pub fn point_spectrum(model: &PointModel, grid: &FreqGrid) -> Spectrum<f64> {
    Spectrum::from_fn(grid, |a, b| point_coefficient(model, a, b))
}

pub fn point_coefficient(model: &PointModel, a: i64, b: i64) -> Complex64 {
    if a == 0 && b == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = ((a * a + b * b) as f64).sqrt();
    model
        .points
        .iter()
        .map(|p| {
            let m = phase(-a, torus_point(p.x.0)) * phase(-b, torus_point(p.x.1));
            m * (p.c * r.powf(-(2.0 - p.lambda)))
        })
        .sum()
}

/// Spectrum `w_hat(xi1) e^{-2 pi i (xi1 center + xi2 offset)}` of the line.
pub fn line_spectrum(model: &LineModel, grid: &FreqGrid) -> Spectrum<f64> {
    let what = line_profile(model, grid);
    Spectrum::from_fn(grid, |a, b| {
        let w = what[grid.bin_of_freq(a)];
        phase(-a, torus_point(model.center)) * phase(-b, torus_point(model.offset)) * w
    })
}

/// `w_hat(xi1)` for every lattice coordinate, indexed by FFT bin.
pub fn line_profile(model: &LineModel, grid: &FreqGrid) -> Vec<f64> {
    let n = grid.size();
    (0..n).map(|b| weight_transform(grid.freq_of_bin(b) as f64, model.rho, 8 * n)).collect()
}

pub fn scene_spectrum(scene: &Scene, grid: &FreqGrid) -> (Spectrum<f64>, Spectrum<f64>) {
    let p = point_spectrum(&scene.points, grid);
    let c = match &scene.line {
        Some(l) => line_spectrum(l, grid),
        None => Spectrum::zeros(grid),
    };
    (p, c)
}

/// `F_j` applied to a spectrum: multiply by `W_j`.
pub fn filter_subband(spec: &Spectrum<f64>, j: u32) -> Spectrum<f64> {
    spec.multiply(|a, b| window_wj(a as f64, b as f64, j))
}

/// `F_low` applied to a spectrum: multiply by the low-pass window.
pub fn low_subband(spec: &Spectrum<f64>) -> Spectrum<f64> {
    spec.multiply(|a, b| omega_hat(a as f64, b as f64))
}

/// Filtered bands `f_j = F_j * f` for `j = 0..=j_max` plus `F_low * f`.
#[derive(Debug, Clone)]
pub struct SubbandStack {
    pub low: Spectrum<f64>,
    pub bands: Vec<(u32, Spectrum<f64>)>,
}

pub fn decompose(spec: &Spectrum<f64>) -> SubbandStack {
    let g = spec.grid();
    SubbandStack {
        low: low_subband(spec),
        bands: (0..=g.j_max()).map(|j| (j, filter_subband(spec, j))).collect(),
    }
}

/// `F_low * low + sum_j F_j * f_j`.
pub fn reconstruct_spectrum(stack: &SubbandStack) -> Spectrum<f64> {
    let mut acc = low_subband(&stack.low);
    for (j, band) in &stack.bands {
        acc = acc.add(&filter_subband(band, *j));
    }
    acc
}

pub fn reconstruct(stack: &SubbandStack) -> GridImage<f64> {
    inverse_ft(&reconstruct_spectrum(stack))
}

/// `(||P_j||_2, ||wL_j||_2)` as exact lattice sums over the scale support.
pub fn subband_energies(scene: &Scene, grid: &FreqGrid, j: u32) -> (f64, f64) {
    let (p, c) = scene_spectrum(scene, grid);
    (filter_subband(&p, j).norm(), filter_subband(&c, j).norm())
}

/// `log2` growth of the squared subband energies between `j` and `j + 1`.
pub fn energy_rates(scene: &Scene, grid: &FreqGrid, j: u32) -> (f64, f64) {
    let (p0, c0) = subband_energies(scene, grid, j);
    let (p1, c1) = subband_energies(scene, grid, j + 1);
    ((p1 * p1 / (p0 * p0)).log2(), (c1 * c1 / (c0 * c0)).log2())
}

pub fn render(spec: &Spectrum<f64>) -> GridImage<f64> {
    inverse_ft(spec)
}
