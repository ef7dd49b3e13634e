//! Exact evaluation of sparse trigonometric polynomials
//! `G(x) = sum_xi c(xi) e^{2 pi i xi.x}` at rational torus points.
//!
//! Phases are reduced with integer arithmetic, so `e^{2 pi i xi.x}` is exact
//! up to one rounding of `cos`/`sin`, whatever the size of `xi`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

/// Torus coordinate `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den > 0, "denominator must be positive");
        Self { num, den }
    }

    pub fn integer(k: i64) -> Self {
        Self { num: k, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self - other` on a common denominator.
    pub fn sub(self, other: Rational) -> Rational {
        let den = lcm(self.den, other.den);
        let num = self.num * (den / self.den) - other.num * (den / other.den);
        Rational { num, den }
    }

    pub fn neg(self) -> Rational {
        Rational { num: -self.num, den: self.den }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// `e^{2 pi i xi x}` with the phase reduced modulo 1 exactly.
#[inline]
pub fn phase(xi: i64, x: Rational) -> Complex64 {
    let r = (xi as i128 * x.num as i128).rem_euclid(x.den as i128);
    let a = TAU * (r as f64 / x.den as f64);
    Complex64::new(a.cos(), a.sin())
}

/// Sparse trigonometric polynomial grouped by the first frequency coordinate.
#[derive(Debug, Clone, Default)]
pub struct TrigPoly {
    rows: Vec<(i64, Vec<(i64, Complex64)>)>,
}

impl TrigPoly {
    /// Build from `(xi1, xi2, c)` triples; zero coefficients are dropped and
    /// duplicates summed.
    pub fn from_entries(entries: impl IntoIterator<Item = (i64, i64, Complex64)>) -> Self {
        let mut map: BTreeMap<i64, BTreeMap<i64, Complex64>> = BTreeMap::new();
        for (a, b, c) in entries {
            if c != Complex64::new(0.0, 0.0) {
                *map.entry(a).or_default().entry(b).or_default() += c;
            }
        }
        let rows = map
            .into_iter()
            .map(|(a, r)| (a, r.into_iter().collect::<Vec<_>>()))
            .filter(|(_, r)| !r.is_empty())
            .collect();
        Self { rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.rows.iter().map(|(_, r)| r.len()).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        self.rows.iter().flat_map(|(a, r)| r.iter().map(move |&(b, c)| (*a, b, c)))
    }

    /// `sum_xi |c(xi)|^2`.
    pub fn energy(&self) -> f64 {
        self.entries().map(|(_, _, c)| c.norm_sqr()).sum()
    }

    /// Value at a single point.
    pub fn eval(&self, x1: Rational, x2: Rational) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, row) in &self.rows {
            let mut h = Complex64::new(0.0, 0.0);
            for &(b, c) in row {
                h += c * phase(b, x2);
            }
            acc += h * phase(*a, x1);
        }
        acc
    }

    /// Values on the tensor grid `xs1 x xs2`, row-major in `xs1`.
    pub fn eval_tensor(&self, xs1: &[Rational], xs2: &[Rational]) -> Vec<Complex64> {
        let (n1, n2) = (xs1.len(), xs2.len());
        let mut out = vec![Complex64::new(0.0, 0.0); n1 * n2];
        if self.is_empty() || n1 == 0 || n2 == 0 {
            return out;
        }
        // phase tables for the distinct second coordinates
        let mut cols: BTreeMap<i64, usize> = BTreeMap::new();
        for (_, row) in &self.rows {
            for &(b, _) in row {
                let next = cols.len();
                cols.entry(b).or_insert(next);
            }
        }
        let mut e2 = vec![Complex64::new(0.0, 0.0); cols.len() * n2];
        for (&b, &ci) in &cols {
            for (t, &x) in xs2.iter().enumerate() {
                e2[ci * n2 + t] = phase(b, x);
            }
        }
        let mut h = vec![Complex64::new(0.0, 0.0); n2];
        let mut e1 = vec![Complex64::new(0.0, 0.0); n1];
        for (a, row) in &self.rows {
            h.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for &(b, c) in row {
                let base = cols[&b] * n2;
                for (t, hv) in h.iter_mut().enumerate() {
                    *hv += c * e2[base + t];
                }
            }
            for (s, &x) in xs1.iter().enumerate() {
                e1[s] = phase(*a, x);
            }
            for (s, &p) in e1.iter().enumerate() {
                let dst = &mut out[s * n2..(s + 1) * n2];
                for (o, &hv) in dst.iter_mut().zip(&h) {
                    *o += p * hv;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_reduction_is_exact() {
        let x = Rational::new(1, 3);
        let big = phase(3_000_000_001, x);
        let small = phase(1, x);
        assert!((big - small).norm() < 1e-15);
        assert!((phase(5, Rational::new(1, 10)) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tensor_matches_pointwise() {
        let p = TrigPoly::from_entries(vec![
            (1, 2, Complex64::new(1.0, 0.5)),
            (-3, 0, Complex64::new(0.25, 0.0)),
            (1, -5, Complex64::new(0.0, -2.0)),
            (0, 0, Complex64::new(0.0, 0.0)),
        ]);
        assert_eq!(p.support_len(), 3);
        let xs1 = [Rational::new(1, 7), Rational::new(-2, 5), Rational::integer(0)];
        let xs2 = [Rational::new(3, 16), Rational::new(1, 23)];
        let g = p.eval_tensor(&xs1, &xs2);
        for (s, &a) in xs1.iter().enumerate() {
            for (t, &b) in xs2.iter().enumerate() {
                let direct: Complex64 = p
                    .entries()
                    .map(|(u, v, c)| {
                        let ang = TAU * (u as f64 * a.to_f64() + v as f64 * b.to_f64());
                        c * Complex64::new(ang.cos(), ang.sin())
                    })
                    .sum();
                assert!((g[s * 2 + t] - direct).norm() < 1e-12);
                assert!((p.eval(a, b) - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rational_difference() {
        let d = Rational::new(1, 4).sub(Rational::new(1, 6));
        assert_eq!(d.num * 12, d.den);
    }
}
