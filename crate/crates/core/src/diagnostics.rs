//! Clusters, cluster coherence, relative sparsity and the separation study.
//!
//! Coherences are exact lattice sums: the inner product of two atoms is the
//! product polynomial of their symbols evaluated at the difference of their
//! positions. Decimated coefficients of a component are exact too; the
//! spectrum is folded onto the translation lattice and transformed by a
//! (rectangular) DFT.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::generators::{corona_inner, corona_outer, window_wj, ConeTag};
use crate::grid::{FreqGrid, Spectrum};
use crate::io::{csv_number, write_csv};
use crate::lattice::{Rational, TrigPoly};
use crate::models::{filter_subband, scene_spectrum, Scene};
use crate::separation::{separate_subband_spectrum, SeparationResult, SolverConfig};
use crate::shearlet::{
    lattice_size, shear_range, subband_poly, AlphaParams, ShearletFrame, ShearletIndex,
    SubbandKey, Variant,
};
use crate::wavelet::{atom_norm, WaveletIndex};

/// Member of either frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameIndex {
    Wavelet(WaveletIndex),
    Shearlet(ShearletIndex),
}

/// Translation cell of a shearlet index: `(k1 mod n1, k2 - l k1 mod 4^j)`
/// in the vertical cone and `(k1 - l k2 mod 4^j, k2 mod n1)` in the
/// horizontal one. The atom position is `-(c1/s1, c2/s2)`.
pub fn shearlet_cell(idx: &ShearletIndex, alpha: f64) -> (i64, i64) {
    let (s1, s2) = cell_sizes(idx.key, alpha);
    let (k1, k2) = idx.k;
    let l = idx.key.l;
    match idx.key.cone {
        ConeTag::H => ((k1 - l * k2).rem_euclid(s1), k2.rem_euclid(s2)),
        _ => (k1.rem_euclid(s1), (k2 - l * k1).rem_euclid(s2)),
    }
}

/// Lattice sizes `(s1, s2)` of the translation cells of a subband.
pub fn cell_sizes(key: SubbandKey, alpha: f64) -> (i64, i64) {
    let n1 = lattice_size(key.j, alpha);
    let fine = 1i64 << (2 * key.j);
    match key.cone {
        ConeTag::H => (fine, n1),
        _ => (n1, fine),
    }
}

fn shearlet_from_cell(key: SubbandKey, c: (i64, i64)) -> ShearletIndex {
    let l = key.l;
    let k = match key.cone {
        ConeTag::H => (c.0 + l * c.1, c.1),
        _ => (c.0, c.1 + l * c.0),
    };
    ShearletIndex { key, k }
}

fn canonical(idx: FrameIndex, alpha: f64) -> FrameIndex {
    match idx {
        FrameIndex::Wavelet(w) => FrameIndex::Wavelet(w.reduced()),
        FrameIndex::Shearlet(s) => FrameIndex::Shearlet(shearlet_from_cell(s.key, shearlet_cell(&s, alpha))),
    }
}

/// Finite set of atoms attached to a scale and one or more torus centers.
/// Members are stored in canonical (torus-reduced) form.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub j: u32,
    pub alpha: f64,
    /// Singularity locations; coherence windows are placed around them.
    pub centers: Vec<(f64, f64)>,
    members: BTreeSet<FrameIndex>,
}

impl Cluster {
    pub fn new(j: u32, alpha: f64, centers: Vec<(f64, f64)>) -> Self {
        Self { j, alpha, centers, members: BTreeSet::new() }
    }

    pub fn insert(&mut self, idx: FrameIndex) -> bool {
        self.members.insert(canonical(idx, self.alpha))
    }

    pub fn contains(&self, idx: FrameIndex) -> bool {
        self.members.contains(&canonical(idx, self.alpha))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FrameIndex> {
        self.members.iter()
    }

    pub fn retain(&mut self, f: impl FnMut(&FrameIndex) -> bool) {
        self.members.retain(f)
    }

    /// Scales `j-1..=j+1`, clipped at 0.
    pub fn scales(&self) -> std::ops::RangeInclusive<u32> {
        self.j.saturating_sub(1)..=self.j + 1
    }
}

fn radius(j: u32, eps: f64) -> f64 {
    2f64.powf(eps * j as f64)
}

/// Nearest lattice index `k` with `-k/size` closest to `x`.
fn nearest(x: f64, size: i64) -> i64 {
    ((-x * size as f64).round() as i64).rem_euclid(size)
}

fn circ_dist(a: i64, b: i64, size: i64) -> i64 {
    let d = (a - b).rem_euclid(size);
    d.min(size - d)
}

/// Wavelets of scales `j-1..=j+1` within Euclidean distance `2^{eps j}` of
/// each point, in lattice units.
pub fn build_lambda1(j: u32, params: &AlphaParams, points: &[(f64, f64)]) -> Cluster {
    let mut c = Cluster::new(j, params.alpha, points.to_vec());
    let r = radius(j, params.eps);
    let ri = r.floor() as i64;
    for jp in c.scales() {
        let d = WaveletIndex::lattice(jp);
        for &(x1, x2) in points {
            let m0 = (nearest(x1, d), nearest(x2, d));
            for a in -ri..=ri {
                for b in -ri..=ri {
                    if ((a * a + b * b) as f64).sqrt() <= r {
                        c.insert(FrameIndex::Wavelet(WaveletIndex::new(jp, (m0.0 + a, m0.1 + b))));
                    }
                }
            }
        }
    }
    c
}

/// Vertical-cone shearlets of scales `j-1..=j+1` with `|k2 - l k1 - c| <=
/// 2^{eps j}` around the line `x2 = offset`, every `k1` on the torus.
/// `shear_cap` bounds `|l|`; `None` keeps every shear of the scale.
pub fn build_lambda2(j: u32, params: &AlphaParams, offset: f64, shear_cap: Option<i64>) -> Cluster {
    let mut c = Cluster::new(j, params.alpha, vec![(0.5, offset)]);
    let ri = radius(j, params.eps).floor() as i64;
    for jp in c.scales() {
        let range = shear_range(jp, params.alpha);
        let cap = shear_cap.map_or(range, |s| s.min(range));
        for l in -cap..=cap {
            let key = SubbandKey { j: jp, l, cone: ConeTag::V };
            let (s1, s2) = cell_sizes(key, params.alpha);
            let c2 = nearest(offset, s2);
            for k1 in 0..s1 {
                for r in -ri..=ri {
                    c.insert(FrameIndex::Shearlet(shearlet_from_cell(key, (k1, c2 + r))));
                }
            }
        }
    }
    c
}

/// Which system the coherence maximum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetFrame {
    Wavelets,
    Shearlets(Variant),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceOptions {
    /// Half-width of the target translation window, in lattice units.
    pub window: i64,
    /// Evaluate on the doubled window as well and compare.
    pub check_window: bool,
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        Self { window: 32, check_window: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence {
    pub value: f64,
    /// Value on the doubled window (equal to `value` when unchecked).
    pub doubled: f64,
    /// Doubling the window moved the value by at most `1e-6`.
    pub window_ok: bool,
}

impl Coherence {
    fn zero() -> Self {
        Self { value: 0.0, doubled: 0.0, window_ok: true }
    }
}

struct Axis {
    pos: Vec<Rational>,
    inner: Vec<bool>,
}

/// Target indices along one axis: windows around each center coordinate,
/// or the whole circle when the window wraps.
fn axis(centers: &[f64], size: i64, inner: i64, outer: i64) -> Axis {
    let cs: Vec<i64> = centers.iter().map(|&x| nearest(x, size)).collect();
    let idx: BTreeSet<i64> = if 2 * outer + 1 >= size {
        (0..size).collect()
    } else {
        cs.iter().flat_map(|&c| (c - outer..=c + outer).map(move |k| k.rem_euclid(size))).collect()
    };
    let inner = idx
        .iter()
        .map(|&k| 2 * inner + 1 >= size || cs.iter().any(|&c| circ_dist(k, c, size) <= inner))
        .collect();
    Axis { pos: idx.iter().map(|&k| Rational::new(-k, size)).collect(), inner }
}

/// Product of a shearlet subband polynomial with the wavelet atom symbol of
/// scale `jw`; the real cross symbol of every atom pair of the two bands.
fn cross_poly(key: SubbandKey, jw: u32, alpha: f64, variant: Variant, grid: &FreqGrid) -> TrigPoly {
    let c = atom_norm(jw);
    let shear = subband_poly(key, alpha, variant, Some(grid));
    TrigPoly::from_entries(
        shear.entries().map(|(a, b, v)| (a, b, v * (c * window_wj(a as f64, b as f64, jw)))),
    )
}

fn bands_overlap(j1: u32, j2: u32) -> bool {
    corona_inner(j1) < corona_outer(j2) && corona_inner(j2) < corona_outer(j1)
}

/// Running cluster sums over a tensor window of targets.
struct Accum {
    inner: f64,
    outer: f64,
}

impl Accum {
    fn add_band(&mut self, poly: &TrigPoly, sources: &[(Rational, Rational)], a1: &Axis, a2: &Axis) {
        if poly.is_empty() || sources.is_empty() {
            return;
        }
        let (n1, n2) = (a1.pos.len(), a2.pos.len());
        let mut sums = vec![0.0; n1 * n2];
        for &(p1, p2) in sources {
            let xs1: Vec<Rational> = a1.pos.iter().map(|x| x.sub(p1)).collect();
            let xs2: Vec<Rational> = a2.pos.iter().map(|x| x.sub(p2)).collect();
            for (s, v) in sums.iter_mut().zip(poly.eval_tensor(&xs1, &xs2)) {
                *s += v.norm();
            }
        }
        for t1 in 0..n1 {
            for t2 in 0..n2 {
                let s = sums[t1 * n2 + t2];
                self.outer = self.outer.max(s);
                if a1.inner[t1] && a2.inner[t2] {
                    self.inner = self.inner.max(s);
                }
            }
        }
    }
}

/// `max_t sum_{i in cluster} |<a_i, b_t>|` over targets `t` of scales
/// `j-1..=j+1` (all shears, both cones) in a translation window around the
/// cluster centers. Wavelet members pair with shearlet targets and shearlet
/// members (primal atoms) with wavelet targets.
pub fn cluster_coherence(
    cluster: &Cluster,
    grid: &FreqGrid,
    target: TargetFrame,
    opts: &CoherenceOptions,
) -> Result<Coherence> {
    if opts.window < 0 {
        return Err(Error::Config("coherence window must be nonnegative".into()));
    }
    if cluster.is_empty() {
        return Ok(Coherence::zero());
    }
    let alpha = cluster.alpha;
    let outer = if opts.check_window { 2 * opts.window } else { opts.window };
    let c1: Vec<f64> = cluster.centers.iter().map(|c| c.0).collect();
    let c2: Vec<f64> = cluster.centers.iter().map(|c| c.1).collect();
    let mut acc = Accum { inner: 0.0, outer: 0.0 };

    match target {
        TargetFrame::Shearlets(variant) => {
            let mut by_scale: BTreeMap<u32, Vec<(Rational, Rational)>> = BTreeMap::new();
            for m in cluster.iter() {
                if let FrameIndex::Wavelet(w) = m {
                    by_scale.entry(w.j).or_default().push(w.position());
                }
            }
            for jt in cluster.scales() {
                let range = shear_range(jt, alpha);
                for cone in [ConeTag::H, ConeTag::V] {
                    for l in -range..=range {
                        let key = SubbandKey { j: jt, l, cone };
                        let (s1, s2) = cell_sizes(key, alpha);
                        let a1 = axis(&c1, s1, opts.window, outer);
                        let a2 = axis(&c2, s2, opts.window, outer);
                        for (&jw, src) in &by_scale {
                            if bands_overlap(jw, jt) {
                                acc.add_band(&cross_poly(key, jw, alpha, variant, grid), src, &a1, &a2);
                            }
                        }
                    }
                }
            }
        }
        TargetFrame::Wavelets => {
            let mut by_band: BTreeMap<SubbandKey, Vec<(Rational, Rational)>> = BTreeMap::new();
            for m in cluster.iter() {
                if let FrameIndex::Shearlet(s) = m {
                    by_band.entry(s.key).or_default().push(s.position(alpha));
                }
            }
            for jt in cluster.scales() {
                let d = WaveletIndex::lattice(jt);
                let a1 = axis(&c1, d, opts.window, outer);
                let a2 = axis(&c2, d, opts.window, outer);
                for (&key, src) in &by_band {
                    if bands_overlap(key.j, jt) {
                        acc.add_band(&cross_poly(key, jt, alpha, Variant::Primal, grid), src, &a1, &a2);
                    }
                }
            }
        }
    }
    let doubled = if opts.check_window { acc.outer } else { acc.inner };
    Ok(Coherence { value: acc.inner, doubled, window_ok: (doubled - acc.inner).abs() <= 1e-6 })
}

/// `M(j) = max |<psi_{j,0}, phi_{j,l,k}>|` over every shear, both cones and
/// translations in the window; the cross-system decay proxy.
pub fn cross_coherence(grid: &FreqGrid, j: u32, alpha: f64, variant: Variant, window: i64) -> Result<f64> {
    grid.check_scale(j)?;
    let src = [WaveletIndex::new(j, (0, 0)).position()];
    let mut acc = Accum { inner: 0.0, outer: 0.0 };
    let range = shear_range(j, alpha);
    for cone in [ConeTag::H, ConeTag::V] {
        for l in -range..=range {
            let key = SubbandKey { j, l, cone };
            let (s1, s2) = cell_sizes(key, alpha);
            let a1 = axis(&[0.0], s1, window, window);
            let a2 = axis(&[0.0], s2, window, window);
            acc.add_band(&cross_poly(key, j, alpha, variant, grid), &src, &a1, &a2);
        }
    }
    Ok(acc.inner)
}

/// Forward DFT of a row-major `s1 x s2` array.
fn dft2(buf: &mut [Complex64], s1: usize, s2: usize, planner: &mut FftPlanner<f64>) {
    planner.plan_fft_forward(s2).process(buf);
    let col = planner.plan_fft_forward(s1);
    let mut tmp = vec![Complex64::new(0.0, 0.0); s1];
    for c in 0..s2 {
        for r in 0..s1 {
            tmp[r] = buf[r * s2 + c];
        }
        col.process(&mut tmp);
        for r in 0..s1 {
            buf[r * s2 + c] = tmp[r];
        }
    }
}

/// Folds `symbol * spectrum` onto the `s1 x s2` cell lattice and transforms:
/// entry `(c1, c2)` is the inner product with the atom at `-(c1/s1, c2/s2)`.
fn lattice_coefficients(
    spec: &Spectrum<f64>,
    s1: i64,
    s2: i64,
    entries: impl Iterator<Item = (i64, i64, f64)>,
    planner: &mut FftPlanner<f64>,
) -> Vec<Complex64> {
    let (u1, u2) = (s1 as usize, s2 as usize);
    let mut buf = vec![Complex64::new(0.0, 0.0); u1 * u2];
    for (a, b, w) in entries {
        let f = spec.at(a, b);
        if f != Complex64::new(0.0, 0.0) {
            buf[a.rem_euclid(s1) as usize * u2 + b.rem_euclid(s2) as usize] += f * w;
        }
    }
    dft2(&mut buf, u1, u2, planner);
    buf
}

/// Decimated wavelet coefficients `<f, psi_{j,m}>`, row-major in
/// `m in [0, 4^j)^2`.
pub fn wavelet_lattice_coefficients(spec: &Spectrum<f64>, j: u32) -> Vec<Complex64> {
    let d = WaveletIndex::lattice(j);
    let c = atom_norm(j);
    let grid = spec.grid();
    let entries = grid.points().filter_map(|(_, a, b)| {
        let w = window_wj(a as f64, b as f64, j);
        (w != 0.0).then_some((a, b, c * w))
    });
    lattice_coefficients(spec, d, d, entries, &mut FftPlanner::new())
}

/// Decimated coefficients of one subband, row-major over the cells of
/// [`cell_sizes`].
pub fn shearlet_lattice_coefficients(
    spec: &Spectrum<f64>,
    key: SubbandKey,
    alpha: f64,
    variant: Variant,
) -> Vec<Complex64> {
    shearlet_cells(spec, key, alpha, variant, &mut FftPlanner::new())
}

fn shearlet_cells(
    spec: &Spectrum<f64>,
    key: SubbandKey,
    alpha: f64,
    variant: Variant,
    planner: &mut FftPlanner<f64>,
) -> Vec<Complex64> {
    let (s1, s2) = cell_sizes(key, alpha);
    let grid = spec.grid();
    let poly = subband_poly(key, alpha, variant, Some(&grid));
    lattice_coefficients(spec, s1, s2, poly.entries().map(|(a, b, v)| (a, b, v.re)), planner)
}

/// Analysis system for [`relative_sparsity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsityFrame {
    Wavelets,
    /// Shearlet analysis with the given window; the line estimate uses the
    /// primal one.
    Shearlets(Variant),
}

/// `sum |<f, a_i>|` over atoms `a_i` of scales `j-1..=j+1` outside the
/// cluster. Every decimated coefficient is computed, so no tail truncation
/// is involved.
pub fn relative_sparsity(spec: &Spectrum<f64>, frame: SparsityFrame, cluster: &Cluster) -> Result<f64> {
    let alpha = cluster.alpha;
    let mut planner = FftPlanner::new();
    let mut total = 0.0;
    for jp in cluster.scales() {
        match frame {
            SparsityFrame::Wavelets => {
                let d = WaveletIndex::lattice(jp);
                let coeffs = wavelet_lattice_coefficients(spec, jp);
                for (i, c) in coeffs.iter().enumerate() {
                    let m = (i as i64 / d, i as i64 % d);
                    if !cluster.contains(FrameIndex::Wavelet(WaveletIndex::new(jp, m))) {
                        total += c.norm();
                    }
                }
            }
            SparsityFrame::Shearlets(variant) => {
                crate::shearlet::check_alpha(alpha)?;
                let range = shear_range(jp, alpha);
                for cone in [ConeTag::H, ConeTag::V] {
                    for l in -range..=range {
                        let key = SubbandKey { j: jp, l, cone };
                        let (_, s2) = cell_sizes(key, alpha);
                        let coeffs = shearlet_cells(spec, key, alpha, variant, &mut planner);
                        for (i, c) in coeffs.iter().enumerate() {
                            let cell = (i as i64 / s2, i as i64 % s2);
                            let idx = shearlet_from_cell(key, cell);
                            if !cluster.contains(FrameIndex::Shearlet(idx)) {
                                total += c.norm();
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(total)
}

/// `2 max(B1, B2) (delta1 + delta2) / (1 - 2 mu)`, or `+inf` once
/// `mu >= 1/2`.
pub fn error_bound(delta1: f64, delta2: f64, mu: f64, b1: f64, b2: f64) -> f64 {
    if mu >= 0.5 {
        return f64::INFINITY;
    }
    2.0 * b1.max(b2) * (delta1 + delta2) / (1.0 - 2.0 * mu)
}

/// Cluster centers of a scene: the point locations and the line offset.
fn scene_centers(scene: &Scene) -> (Vec<(f64, f64)>, Option<f64>) {
    (scene.points.points.iter().map(|p| p.x).collect(), scene.line.as_ref().map(|l| l.offset))
}

/// Options shared by the coherence check and the study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterOptions {
    pub coherence: CoherenceOptions,
    /// `|l|` bound for the line cluster, `None` for every shear.
    pub shear_cap: Option<i64>,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self { coherence: CoherenceOptions::default(), shear_cap: Some(1) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceReport {
    pub j: u32,
    pub alpha: f64,
    pub eps: f64,
    /// Point cluster against the dual shearlets.
    pub mu1: f64,
    /// Point cluster against the primal shearlets.
    pub mu1_primal: f64,
    /// Line cluster against the wavelets.
    pub mu2: f64,
    pub window_ok: bool,
}

impl CoherenceReport {
    /// `max(mu1, mu2)`, the coherence entering the error bound.
    pub fn value(&self) -> f64 {
        self.mu1.max(self.mu2)
    }

    /// `2 mu < 1`.
    pub fn flag(&self) -> bool {
        2.0 * self.value() < 1.0
    }
}

pub fn coherence_bound_check(
    grid: &FreqGrid,
    j: u32,
    params: &AlphaParams,
    scene: &Scene,
    opts: &ClusterOptions,
) -> Result<CoherenceReport> {
    grid.check_scale(j)?;
    let (points, offset) = scene_centers(scene);
    let l1 = build_lambda1(j, params, &points);
    let l2 = match offset {
        Some(o) => build_lambda2(j, params, o, opts.shear_cap),
        None => Cluster::new(j, params.alpha, vec![]),
    };
    let co = &opts.coherence;
    let mu1 = cluster_coherence(&l1, grid, TargetFrame::Shearlets(Variant::Dual), co)?;
    let mu1p = cluster_coherence(&l1, grid, TargetFrame::Shearlets(Variant::Primal), co)?;
    let mu2 = cluster_coherence(&l2, grid, TargetFrame::Wavelets, co)?;
    Ok(CoherenceReport {
        j,
        alpha: params.alpha,
        eps: params.eps,
        mu1: mu1.value,
        mu1_primal: mu1p.value,
        mu2: mu2.value,
        window_ok: mu1.window_ok && mu1p.window_ok && mu2.window_ok,
    })
}

/// Per-scale outcome of the study.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleReport {
    pub j: u32,
    pub coherence: CoherenceReport,
    pub delta1: f64,
    pub delta2: f64,
    /// Error bound; `+inf` unless `2 mu < 1`.
    pub bound: f64,
    /// `||P* - P_j|| / ||P_j||` (or `/ ||f_j||` when `P_j = 0`).
    pub err_points: f64,
    pub err_lines: f64,
    /// `||P* - P_j|| + ||C* - wL_j||`.
    pub abs_error: f64,
    pub energy_points: f64,
    pub energy_lines: f64,
    pub iterations: usize,
    pub kkt: f64,
    pub converged: bool,
}

impl ScaleReport {
    pub fn total_error(&self) -> f64 {
        self.err_points + self.err_lines
    }
}

/// Sparsity of the two ground-truth components at scale `j`.
pub fn scale_sparsity(
    grid: &FreqGrid,
    j: u32,
    params: &AlphaParams,
    scene: &Scene,
    shear_cap: Option<i64>,
) -> Result<(f64, f64)> {
    grid.check_scale(j)?;
    let (p, c) = scene_spectrum(scene, grid);
    let (points, offset) = scene_centers(scene);
    let l1 = build_lambda1(j, params, &points);
    let l2 = build_lambda2(j, params, offset.unwrap_or(0.5), shear_cap);
    let d1 = relative_sparsity(&filter_subband(&p, j), SparsityFrame::Wavelets, &l1)?;
    let d2 = relative_sparsity(&filter_subband(&c, j), SparsityFrame::Shearlets(Variant::Primal), &l2)?;
    Ok((d1, d2))
}

fn relative(err: f64, truth: f64, total: f64) -> f64 {
    if truth > 0.0 {
        err / truth
    } else if total > 0.0 {
        err / total
    } else {
        0.0
    }
}

/// Upper frame bound of the primal shearlet system on the grid, the `B2`
/// of the error bound (the wavelet system is Parseval, `B1 = 1`).
pub fn shearlet_upper_bound(grid: &FreqGrid, alpha: f64) -> Result<f64> {
    Ok(ShearletFrame::<f64>::new(grid, alpha)?.frame_bounds(Variant::Primal).1)
}

/// Scores a separation of scale `res.scale` against the scene's ground
/// truth and attaches coherence, sparsity and the error bound.
pub fn scale_report(
    grid: &FreqGrid,
    params: &AlphaParams,
    scene: &Scene,
    res: &SeparationResult<f64>,
    b2: f64,
    opts: &ClusterOptions,
) -> Result<ScaleReport> {
    let j = res.scale;
    let (p, c) = scene_spectrum(scene, grid);
    let (pj, cj) = (filter_subband(&p, j), filter_subband(&c, j));
    let fj = pj.add(&cj);
    let ep = res.points_spectrum.sub(&pj).norm();
    let ec = res.lines_spectrum.sub(&cj).norm();
    let coherence = coherence_bound_check(grid, j, params, scene, opts)?;
    let (delta1, delta2) = scale_sparsity(grid, j, params, scene, opts.shear_cap)?;
    Ok(ScaleReport {
        j,
        coherence,
        delta1,
        delta2,
        bound: error_bound(delta1, delta2, coherence.value(), 1.0, b2),
        err_points: relative(ep, pj.norm(), fj.norm()),
        err_lines: relative(ec, cj.norm(), fj.norm()),
        abs_error: ep + ec,
        energy_points: pj.norm(),
        energy_lines: cj.norm(),
        iterations: res.iterations,
        kkt: res.kkt,
        converged: res.converged,
    })
}

/// Separates `P_j + wL_j` at each scale and scores the result.
pub fn separation_study(
    grid: &FreqGrid,
    params: &AlphaParams,
    scales: std::ops::RangeInclusive<u32>,
    scene: &Scene,
    cfg: &SolverConfig<f64>,
    opts: &ClusterOptions,
) -> Result<Vec<ScaleReport>> {
    scene.validate()?;
    let b2 = shearlet_upper_bound(grid, params.alpha)?;
    let (p, c) = scene_spectrum(scene, grid);
    let mut out = Vec::new();
    for j in scales {
        grid.check_scale(j)?;
        let fj = filter_subband(&p, j).add(&filter_subband(&c, j));
        let res = separate_subband_spectrum(&fj, j, params.alpha, cfg)?;
        out.push(scale_report(grid, params, scene, &res, b2, opts)?);
    }
    Ok(out)
}

pub fn write_coherence_csv(path: impl AsRef<std::path::Path>, rows: &[CoherenceReport]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.j.to_string(),
                csv_number(r.alpha),
                csv_number(r.eps),
                csv_number(r.mu1),
                csv_number(r.mu2),
                r.flag().to_string(),
            ]
        })
        .collect();
    write_csv(path, &["j", "alpha", "eps", "mu1", "mu2", "flag"], &rows)
}

pub fn write_sparsity_csv(path: impl AsRef<std::path::Path>, rows: &[(u32, f64, f64)]) -> Result<()> {
    let rows: Vec<Vec<String>> =
        rows.iter().map(|&(j, d1, d2)| vec![j.to_string(), csv_number(d1), csv_number(d2)]).collect();
    write_csv(path, &["j", "delta1", "delta2"], &rows)
}

pub fn write_study_csv(path: impl AsRef<std::path::Path>, rows: &[ScaleReport]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.j.to_string(),
                csv_number(r.err_points),
                csv_number(r.err_lines),
                csv_number(r.bound),
                r.iterations.to_string(),
                csv_number(r.kkt),
            ]
        })
        .collect();
    write_csv(path, &["j", "errP", "errC", "bound", "iters", "kkt"], &rows)
}
