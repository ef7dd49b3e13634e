//! Scalar windows, bumps and cone functions evaluated at arbitrary
//! frequency coordinates. Every smooth profile is an affine reparametrization
//! of the single ramp [`ramp`].

use crate::Real;

/// Cone selector: horizontal cone, vertical cone, or the low square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConeTag {
    H,
    V,
    Low,
}

impl ConeTag {
    pub fn label(self) -> &'static str {
        match self {
            ConeTag::H => "h",
            ConeTag::V => "v",
            ConeTag::Low => "0",
        }
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, and `theta(t) + theta(1-t) = 1`.
///
/// Written as `1 / (1 + exp(1/t - 1/(1-t)))`, algebraically equal to
/// `e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})` but free of underflow.
#[inline]
pub fn ramp<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else if t >= T::one() {
        T::one()
    } else {
        let z = t.recip() - (T::one() - t).recip();
        (T::one() + z.exp()).recip()
    }
}

/// Even plateau bump: 1 on `|t| <= inner`, 0 on `|t| >= outer`.
#[inline]
fn plateau<T: Real>(t: T, inner: T, outer: T) -> T {
    ramp((outer - t.abs()) / (outer - inner))
}

/// One-dimensional generator: plateau on `[-1/32, 1/32]`, support `[-1/16, 1/16]`.
pub fn xi_hat<T: Real>(t: T) -> T {
    plateau(t, T::lit(1.0 / 32.0), T::lit(1.0 / 16.0))
}

/// Separable low-pass window.
pub fn omega_hat<T: Real>(xi1: T, xi2: T) -> T {
    xi_hat(xi1) * xi_hat(xi2)
}

/// Mother corona window `sqrt(omega^2(xi/4) - omega^2(xi))`, radicand clamped at 0.
pub fn window_w<T: Real>(xi1: T, xi2: T) -> T {
    let q = T::lit(0.25);
    let outer = omega_hat(xi1 * q, xi2 * q);
    let inner = omega_hat(xi1, xi2);
    (outer * outer - inner * inner).max(T::zero()).sqrt()
}

/// Scale-`j` window `W(xi / 4^j)`.
pub fn window_wj<T: Real>(xi1: T, xi2: T, j: u32) -> T {
    let s = T::lit(0.25f64.powi(j as i32));
    window_w(xi1 * s, xi2 * s)
}

/// Outer half-width `2^(2j-2)` of the scale-`j` corona.
pub fn corona_outer(j: u32) -> f64 {
    2f64.powi(2 * j as i32 - 2)
}

/// Inner half-width `2^(2j-5)` of the scale-`j` corona.
pub fn corona_inner(j: u32) -> f64 {
    2f64.powi(2 * j as i32 - 5)
}

/// Smooth bump with plateau `[-1/2, 1/2]` and support `[-3/2, 3/2]`.
fn bump_u<T: Real>(w: T) -> T {
    ramp(T::lit(1.5) - w.abs())
}

/// Periodized-normalized bump: support `[-3/2, 3/2]` and
/// `sum_l v(w - l)^2 = 1` for every `w`.
pub fn bump_v<T: Real>(w: T) -> T {
    let u = bump_u(w);
    if u == T::zero() {
        return T::zero();
    }
    let base = w.floor().to_i64().unwrap_or(0);
    let mut norm = T::zero();
    for l in base - 2..=base + 2 {
        let ul = bump_u(w - T::lit(l as f64));
        norm = norm + ul * ul;
    }
    u / norm.sqrt()
}

/// Slope `num/den` with the origin convention: `None` when both vanish.
#[inline]
fn slope<T: Real>(num: T, den: T) -> Option<T> {
    if den == T::zero() {
        if num == T::zero() {
            None
        } else {
            Some(num.signum() * T::infinity())
        }
    } else {
        Some(num / den)
    }
}

/// Unscaled cone bump `v(xi2/xi1)` (h) or `v(xi1/xi2)` (v); 0 on a zero denominator.
pub fn cone_v<T: Real>(xi1: T, xi2: T, cone: ConeTag) -> T {
    let (num, den) = match cone {
        ConeTag::H => (xi2, xi1),
        ConeTag::V => (xi1, xi2),
        ConeTag::Low => return T::zero(),
    };
    if den == T::zero() {
        return T::zero();
    }
    bump_v(num / den)
}

/// Directional factor of the `(j, l)` shearlet symbol:
/// `v(2^((2-alpha)j) * slope - l)` with the slope taken inside the cone.
pub fn shear_factor<T: Real>(xi1: T, xi2: T, cone: ConeTag, j: u32, l: i64, alpha: T) -> T {
    let (num, den) = match cone {
        ConeTag::H => (xi2, xi1),
        ConeTag::V => (xi1, xi2),
        ConeTag::Low => return T::zero(),
    };
    if den == T::zero() {
        return T::zero();
    }
    let s = (T::lit(2.0) - alpha) * T::lit(j as f64);
    let s = T::lit(2.0).powf(s);
    bump_v(s * num / den - T::lit(l as f64))
}

/// Radial profile of the primal cone windows: 0 below 1/8, 1 above 1/2.
pub fn g_h<T: Real>(t: T) -> T {
    ramp((t.abs() - T::lit(0.125)) / T::lit(0.375))
}

/// Slope profile of the primal cone windows: 1 on `[-4/3, 4/3]`, 0 beyond 3/2.
pub fn h_h<T: Real>(r: T) -> T {
    plateau(r, T::lit(4.0 / 3.0), T::lit(1.5))
}

/// Radial profile of the dual cone windows: 0 below 1/4, 1 above 1/2.
pub fn g_v<T: Real>(t: T) -> T {
    ramp((t.abs() - T::lit(0.25)) / T::lit(0.25))
}

/// Slope profile of the dual cone windows: 1 on `[-3/4, 3/4]`, 0 beyond 4/3.
pub fn h_v<T: Real>(r: T) -> T {
    plateau(r, T::lit(0.75), T::lit(4.0 / 3.0))
}

/// Primal cone window. The low window is 1 on `[-2/3, 2/3]^2` and
/// vanishes outside `[-1, 1]^2`.
pub fn chi<T: Real>(xi1: T, xi2: T, cone: ConeTag) -> T {
    match cone {
        ConeTag::H => match slope(xi2, xi1) {
            Some(r) => g_h(xi1) * h_h(r),
            None => T::zero(),
        },
        ConeTag::V => match slope(xi1, xi2) {
            Some(r) => g_h(xi2) * h_h(r),
            None => T::zero(),
        },
        ConeTag::Low => {
            let third = T::lit(1.0 / 3.0);
            ramp((T::one() - xi1.abs()) / third) * ramp((T::one() - xi2.abs()) / third)
        }
    }
}

/// Dual cone window; the low one absorbs the remainder so that
/// `sum over cones of chi * gamma = 1`.
pub fn gamma<T: Real>(xi1: T, xi2: T, cone: ConeTag) -> T {
    match cone {
        ConeTag::H => match slope(xi2, xi1) {
            Some(r) => g_v(xi1) * h_v(r),
            None => T::zero(),
        },
        ConeTag::V => match slope(xi2, xi1) {
            Some(r) => g_v(xi2) * (T::one() - h_v(r)),
            None => T::zero(),
        },
        ConeTag::Low => {
            let h = chi(xi1, xi2, ConeTag::H) * gamma(xi1, xi2, ConeTag::H);
            let v = chi(xi1, xi2, ConeTag::V) * gamma(xi1, xi2, ConeTag::V);
            T::one() - h - v
        }
    }
}

/// `sum over {h, v, 0} of chi * gamma`.
pub fn duality_sum<T: Real>(xi1: T, xi2: T) -> T {
    [ConeTag::H, ConeTag::V, ConeTag::Low]
        .iter()
        .map(|&c| chi(xi1, xi2, c) * gamma(xi1, xi2, c))
        .fold(T::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints_and_symmetry() {
        assert_eq!(ramp(-0.3f64), 0.0);
        assert_eq!(ramp(0.0f64), 0.0);
        assert_eq!(ramp(1.0f64), 1.0);
        assert_eq!(ramp(2.0f64), 1.0);
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            assert!((ramp(t) + ramp(1.0 - t) - 1.0).abs() < 1e-14);
            if i > 0 {
                assert!(ramp(t) >= ramp(t - 1e-3));
            }
        }
        assert!((ramp(0.5f64) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn xi_hat_plateau_support_evenness() {
        assert_eq!(xi_hat(0.0f64), 1.0);
        assert_eq!(xi_hat(0.07f64), 0.0);
        let v = xi_hat(3.0f64 / 64.0);
        assert!(v > 0.0 && v < 1.0);
        assert_eq!(v, xi_hat(-3.0f64 / 64.0));
    }

    #[test]
    fn omega_values() {
        assert_eq!(omega_hat(0.0f64, 0.0), 1.0);
        assert_eq!(omega_hat(1.0f64 / 32.0, 1.0 / 32.0), 1.0);
        assert_eq!(omega_hat(0.125f64, 0.0), 0.0);
    }

    #[test]
    fn corona_windows() {
        assert_eq!(window_wj(0.0f64, 0.0, 3), 0.0);
        // A_1 = [-1,1]^2 minus [-1/8,1/8]^2
        assert_eq!(window_wj(2.0f64, 0.0, 1), 0.0);
        assert!(window_wj(0.5f64, 0.0, 1) > 0.0);
        // integer lattice: scales 0 and 1 vanish, scale 2 is 1 at (1, 0)
        for &(a, b) in &[(1.0f64, 0.0), (1.0, 1.0), (0.0, -1.0)] {
            assert_eq!(window_wj(a, b, 0), 0.0);
            assert_eq!(window_wj(a, b, 1), 0.0);
        }
        assert!((window_wj(1.0f64, 0.0, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn corona_support_scan() {
        for j in 1..=4u32 {
            let outer = corona_outer(j);
            let inner = corona_inner(j);
            for a in -70..=70 {
                for b in -70..=70 {
                    let (x, y) = (a as f64 * 0.25, b as f64 * 0.25);
                    let w = window_wj(x, y, j);
                    let m = x.abs().max(y.abs());
                    if m >= outer || m <= inner {
                        assert_eq!(w, 0.0, "j={j} xi=({x},{y})");
                    }
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_small_lattice() {
        let j_max = 4u32;
        let band = 1i64 << (2 * j_max - 3);
        for a in -band..=band {
            for b in -band..=band {
                let (x, y) = (a as f64, b as f64);
                let mut s = omega_hat(x, y).powi(2);
                for j in 0..=j_max {
                    s += window_wj(x, y, j).powi(2);
                }
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bump_identity_and_support() {
        assert_eq!(bump_v(1.6f64), 0.0);
        assert_eq!(bump_v(-1.5f64), 0.0);
        let v0 = bump_v(0.0f64);
        let v1 = bump_v(1.0f64);
        assert!((v0 * v0 + 2.0 * v1 * v1 - 1.0).abs() < 1e-14);
        for i in 0..=3000 {
            let w = -1.5 + 3.0 * i as f64 / 3000.0;
            let s: f64 = (-2..=2).map(|l| bump_v(w - l as f64).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!((bump_v(w) - bump_v(-w)).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&bump_v(w)));
        }
        // scaled identity at alpha = 1, j = 2, w = 0.3
        let s = 4.0 * 0.3;
        let t: f64 = (-10..=10).map(|l| bump_v(s - l as f64).powi(2)).sum();
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cone_bump_cases() {
        let v0 = bump_v(0.0f64);
        assert_eq!(cone_v(1.0f64, 0.0, ConeTag::H), v0);
        assert_eq!(cone_v(1.0f64, 2.0, ConeTag::H), 0.0);
        assert_eq!(cone_v(0.0f64, 1.0, ConeTag::V), v0);
        assert_eq!(cone_v(0.0f64, 1.0, ConeTag::H), 0.0);
        assert_eq!(cone_v(0.0f64, 0.0, ConeTag::V), 0.0);
    }

    #[test]
    fn chi_gamma_cases() {
        let c = |x: f64, y: f64| {
            [ConeTag::H, ConeTag::V, ConeTag::Low].map(|t| (chi(x, y, t), gamma(x, y, t)))
        };
        let [h, v, o] = c(1.0, 0.0);
        assert_eq!(h, (1.0, 1.0));
        assert_eq!(v, (0.0, 0.0));
        assert_eq!(o.1, 0.0);
        let [h, v, o] = c(0.1, 0.1);
        assert_eq!(h.0 * h.1 + v.0 * v.1, 0.0);
        assert_eq!(o, (1.0, 1.0));
        let [h, v, o] = c(0.0, 1.0);
        assert_eq!(v.0 * v.1, 1.0);
        assert_eq!(h.0 * h.1, 0.0);
        assert_eq!(o.1, 0.0);
        assert_eq!(duality_sum(0.0f64, 0.0), 1.0);
    }

    #[test]
    fn duality_identity_dense() {
        for a in -80..=80 {
            for b in -80..=80 {
                let (x, y) = (a as f64 / 40.0, b as f64 / 40.0);
                assert!((duality_sum(x, y) - 1.0).abs() < 1e-12, "({x},{y})");
                let g0 = gamma(x, y, ConeTag::Low);
                assert!((-1e-12..=1.0 + 1e-12).contains(&g0));
            }
        }
    }

    #[test]
    fn cone_support_containment() {
        for a in -60..=60 {
            for b in -60..=60 {
                let (x, y) = (a as f64 / 20.0, b as f64 / 20.0);
                if chi(x, y, ConeTag::H) != 0.0 {
                    assert!(x.abs() >= 0.125 && y.abs() <= 1.5 * x.abs());
                }
                if chi(x, y, ConeTag::V) != 0.0 {
                    assert!(y.abs() >= 0.125 && x.abs() <= 1.5 * y.abs());
                }
                if gamma(x, y, ConeTag::H) != 0.0 {
                    assert!(x.abs() >= 0.25 && y.abs() <= 4.0 / 3.0 * x.abs());
                }
                if gamma(x, y, ConeTag::V) != 0.0 {
                    // dual vertical support sits inside the primal vertical cone
                    assert!(y.abs() >= 0.25 && x.abs() < 4.0 / 3.0 * y.abs());
                    assert!(chi(x, y, ConeTag::V) > 0.0);
                }
            }
        }
    }

    #[test]
    fn finite_difference_smoothness() {
        // second differences stay bounded across the transition bands
        for f in [xi_hat::<f64> as fn(f64) -> f64, bump_v, h_h, h_v, g_h, g_v] {
            let h = 1e-4;
            let mut worst = 0.0f64;
            for i in 0..40000 {
                let t = -2.0 + i as f64 * 1e-4;
                let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
                worst = worst.max(d2.abs());
            }
            assert!(worst.is_finite() && worst < 1e5);
        }
    }
}
