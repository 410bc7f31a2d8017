//! Real polynomials in a scaled Chebyshev basis.

mod interp;
mod roots;

pub use interp::Interpolant;
pub use roots::{refine_root, Root};

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::realset::Interval;

/// Relative size below which a trailing coefficient counts as zero.
pub const DEGREE_DROP_THRESHOLD: f64 = 1e-10;

/// `p(x) = Σ c_i C_i(u)` with `u = (2x − lo − hi)/(hi − lo)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>, lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "basis interval must be nondegenerate");
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Polynomial { coeffs, lo, hi }
    }

    pub fn constant(c: f64, lo: f64, hi: f64) -> Self {
        Self::new(vec![c], lo, hi)
    }

    /// The identity map `x ↦ x`.
    pub fn identity(lo: f64, hi: f64) -> Self {
        Self::new(vec![0.5 * (lo + hi), 0.5 * (hi - lo)], lo, hi)
    }

    /// The basis function `φ_i`.
    pub fn basis(i: usize, lo: f64, hi: f64) -> Self {
        let mut c = vec![0.0; i + 1];
        c[i] = 1.0;
        Self::new(c, lo, hi)
    }

    /// Interpolates `f` at the `degree + 1` Chebyshev points of the first kind.
    pub fn interpolate(f: impl Fn(f64) -> f64, degree: usize, lo: f64, hi: f64) -> Self {
        let n = degree + 1;
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let vals: Vec<f64> = (0..n)
            .map(|j| f(c + h * (PI * (j as f64 + 0.5) / n as f64).cos()))
            .collect();
        let mut coeffs: Vec<f64> = (0..n)
            .map(|k| {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos())
                    .sum();
                2.0 * s / n as f64
            })
            .collect();
        coeffs[0] *= 0.5;
        Self::new(coeffs, lo, hi)
    }

    /// Converts `Σ m_k x^k` to the Chebyshev basis on `[lo, hi]`.
    pub fn from_monomial(m: &[f64], lo: f64, hi: f64) -> Self {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut acc: Vec<f64> = vec![0.0];
        for &mk in m.iter().rev() {
            // acc ← acc·(c + h·u) + mk
            let mut next = vec![0.0; acc.len() + 1];
            for (k, &a) in acc.iter().enumerate() {
                next[k] += c * a;
                if k == 0 {
                    next[1] += h * a;
                } else {
                    next[k + 1] += 0.5 * h * a;
                    next[k - 1] += 0.5 * h * a;
                }
            }
            next[0] += mk;
            acc = next;
        }
        acc.truncate(m.len().max(1));
        Self::new(acc, lo, hi)
    }

    /// Monomial coefficients `m_k` of `p(x) = Σ m_k x^k`.
    pub fn to_monomial(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        // Monomial form in u first.
        let mut in_u = vec![0.0; n];
        let (mut t_prev, mut t_cur) = (vec![1.0], vec![0.0, 1.0]);
        for (k, &ck) in self.coeffs.iter().enumerate() {
            let tk: &[f64] = match k {
                0 => &t_prev,
                _ => &t_cur,
            };
            for (i, &t) in tk.iter().enumerate() {
                in_u[i] += ck * t;
            }
            if k >= 1 {
                let mut t_next = vec![0.0; t_cur.len() + 1];
                for (i, &t) in t_cur.iter().enumerate() {
                    t_next[i + 1] += 2.0 * t;
                }
                for (i, &t) in t_prev.iter().enumerate() {
                    t_next[i] -= t;
                }
                t_prev = std::mem::replace(&mut t_cur, t_next);
            }
        }
        // Substitute u = a·x + b.
        let a = 2.0 / (self.hi - self.lo);
        let b = -(self.hi + self.lo) / (self.hi - self.lo);
        let mut out = vec![0.0; n];
        let mut power = vec![1.0];
        for &ui in in_u.iter() {
            for (i, &p) in power.iter().enumerate() {
                out[i] += ui * p;
            }
            let mut next = vec![0.0; power.len() + 1];
            for (i, &p) in power.iter().enumerate() {
                next[i] += b * p;
                next[i + 1] += a * p;
            }
            power = next;
        }
        out
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn basis_interval(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }

    pub fn to_local(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    pub fn from_local(&self, u: f64) -> f64 {
        0.5 * (self.lo + self.hi) + 0.5 * (self.hi - self.lo) * u
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.to_local(x))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let u = (2.0 * z - (self.lo + self.hi)) / (self.hi - self.lo);
        let (mut b1, mut b2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * u * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + u * b1 - b2
    }

    pub fn derivative(&self) -> Self {
        let dc = cheb_derivative(&self.coeffs);
        let s = 2.0 / (self.hi - self.lo);
        Self::new(dc.into_iter().map(|c| c * s).collect(), self.lo, self.hi)
    }

    /// Index of the last coefficient above the drop threshold.
    pub fn degree(&self) -> usize {
        let max = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        self.coeffs
            .iter()
            .rposition(|c| c.abs() > DEGREE_DROP_THRESHOLD * max)
            .unwrap_or(0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect(), self.lo, self.hi)
    }

    /// Coefficient of `x^deg` where `deg = coeffs.len() − 1`.
    pub fn leading_coefficient(&self) -> f64 {
        let n = self.coeffs.len() - 1;
        let c = self.coeffs[n];
        if n == 0 {
            c
        } else {
            c * 2f64.powi(n as i32 - 1) * (2.0 / (self.hi - self.lo)).powi(n as i32)
        }
    }

    /// Real roots in `window`, assumed simple. A root that cannot be
    /// separated from a neighbouring one is reported as an error.
    pub fn real_roots(&self, window: Interval) -> Result<Vec<f64>> {
        let roots = self.real_roots_with_multiplicity(window)?;
        if let Some(r) = roots.iter().find(|r| r.multiplicity > 1) {
            return Err(Error::numerical(format!(
                "roots not separated near x = {} at working resolution",
                r.x
            )));
        }
        Ok(roots.into_iter().map(|r| r.x).collect())
    }

    /// Real roots in `window`; near-multiple roots are reported once with
    /// their apparent multiplicity.
    pub fn real_roots_with_multiplicity(&self, window: Interval) -> Result<Vec<Root>> {
        if self.degree() == 0 {
            return Err(Error::invalid("root finding needs degree at least 1"));
        }
        let (ua, ub) = (self.to_local(window.lo), self.to_local(window.hi));
        let mut out = roots::local_roots(&self.coeffs, ua.min(ub), ua.max(ub))?;
        for r in out.iter_mut() {
            r.x = self.from_local(r.x);
        }
        out.sort_by(|a, b| a.x.total_cmp(&b.x));
        Ok(out)
    }
}

pub(crate) fn clenshaw(coeffs: &[f64], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * u * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + u * b1 - b2
}

/// Chebyshev coefficients of d/du of the series `c`.
pub(crate) fn cheb_derivative(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// The classical Chebyshev polynomial `C_n(x)` by its three-term recurrence.
pub fn cheb_classical(n: i64, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::invalid(format!("Chebyshev index {n} is negative")));
    }
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return Ok(prev);
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn eval_examples() {
        assert_eq!(Polynomial::constant(1.0, -1.0, 1.0).eval(123.0), 1.0);
        assert_eq!(Polynomial::identity(-1.0, 1.0).eval(0.5), 0.5);
        assert_eq!(Polynomial::basis(2, -1.0, 1.0).eval(2.0), 7.0);
        let id = Polynomial::identity(3.0, 7.0);
        assert_eq!(id.eval(4.25), 4.25);
        assert_eq!(id.eval(-1.0), -1.0);
    }

    #[test]
    fn cheb_classical_examples() {
        assert_eq!(cheb_classical(1, 2.0).unwrap(), 2.0);
        assert_eq!(cheb_classical(2, 2.0).unwrap(), 7.0);
        assert_eq!(cheb_classical(3, 2.0).unwrap(), 26.0);
        assert_eq!(cheb_classical(0, 5.0).unwrap(), 1.0);
        assert!(cheb_classical(-1, 0.0).is_err());
    }

    #[test]
    fn cheb_classical_matches_cosine() {
        for n in 0..=50 {
            for j in 0..100 {
                let th = PI * j as f64 / 99.0;
                let v = cheb_classical(n, th.cos()).unwrap();
                assert!((v - (n as f64 * th).cos()).abs() <= 1e-12, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn roots_examples() {
        let w = Interval::new(-1.0, 1.0);
        assert_eq!(Polynomial::identity(-1.0, 1.0).real_roots(w).unwrap(), vec![0.0]);
        let r = Polynomial::basis(2, -1.0, 1.0).real_roots(w).unwrap();
        assert_eq!(r.len(), 2);
        assert_relative_eq!(r[0], -0.5f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(r[1], 0.5f64.sqrt(), max_relative = 1e-13);
        let p = Polynomial::from_monomial(&[1.0, 0.0, 1.0], -3.0, 5.0);
        assert!(p.real_roots(Interval::new(-10.0, 10.0)).unwrap().is_empty());
        assert!(Polynomial::constant(2.0, 0.0, 1.0).real_roots(w).is_err());
    }

    #[test]
    fn double_root_is_diagnosed() {
        let p = Polynomial::from_monomial(&[0.0, 0.0, 1.0], -1.0, 1.0);
        let w = Interval::new(-1.0, 1.0);
        assert!(p.real_roots(w).is_err());
        let r = p.real_roots_with_multiplicity(w).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 2);
        assert!(r[0].x.abs() < 1e-12);
    }

    #[test]
    fn chebyshev_roots_all_found() {
        for n in 1..=60usize {
            let p = Polynomial::basis(n, -1.0, 1.0);
            let r = p.real_roots(Interval::new(-1.0, 1.0)).unwrap();
            assert_eq!(r.len(), n, "n = {n}");
            for (j, x) in r.iter().enumerate() {
                let exact = -(PI * (j as f64 + 0.5) / n as f64).cos();
                assert!((x - exact).abs() < 1e-13, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn derivative_matches_monomial() {
        let m = [0.3, -1.0, 2.0, 0.5, -0.25];
        let p = Polynomial::from_monomial(&m, -2.0, 3.0);
        let d = p.derivative().to_monomial();
        let expect = [-1.0, 4.0, 1.5, -1.0];
        for (a, b) in d.iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn degree_threshold() {
        let p = Polynomial::new(vec![1.0, 2.0, 1e-12], -1.0, 1.0);
        assert_eq!(p.degree(), 1);
        let q = Polynomial::new(vec![1.0, 2.0, 1e-9], -1.0, 1.0);
        assert_eq!(q.degree(), 2);
        assert_eq!(Polynomial::constant(0.0, 0.0, 1.0).degree(), 0);
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let p = Polynomial::from_monomial(&[1.0, -2.0, 0.0, 3.0], 0.0, 2.0);
        let q = Polynomial::interpolate(|x| p.eval(x), 3, 0.0, 2.0);
        for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-13);
        }
    }

    #[test]
    fn leading_coefficient_in_x() {
        let p = Polynomial::from_monomial(&[1.0, 0.0, -3.0, 2.5], -1.0, 4.0);
        assert_relative_eq!(p.leading_coefficient(), 2.5, max_relative = 1e-13);
    }

    #[test]
    fn complex_eval_agrees_on_real_axis() {
        let p = Polynomial::from_monomial(&[0.5, 1.0, -1.0, 0.25], -1.0, 2.0);
        for x in [-3.0, 0.1, 1.7, 5.0] {
            let z = p.eval_complex(Complex64::new(x, 0.0));
            assert_relative_eq!(z.re, p.eval(x), max_relative = 1e-13);
            assert_eq!(z.im, 0.0);
        }
        let z = Complex64::new(0.3, 1.2);
        let m = p.to_monomial();
        let direct = m.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
        assert!((p.eval_complex(z) - direct).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn monomial_round_trip(
            m in prop::collection::vec(-1.0f64..1.0, 1..=21),
            half in 0.5f64..=1.0,
        ) {
            let p = Polynomial::from_monomial(&m, -half, half);
            let back = p.to_monomial();
            let scale = m.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1e-300);
            for (a, b) in m.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-10 * scale, "{} vs {}", a, b);
            }
        }

        #[test]
        fn roots_are_zeros(
            zs in prop::collection::vec(-0.95f64..0.95, 1..8),
            lead in prop_oneof![-2.0f64..-0.5, 0.5f64..2.0],
        ) {
            let mut zs = zs;
            zs.sort_by(f64::total_cmp);
            zs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            // Build Π(x − z) by repeated multiplication in monomial form.
            let mut m = vec![lead];
            for &z in &zs {
                let mut next = vec![0.0; m.len() + 1];
                for (i, &c) in m.iter().enumerate() {
                    next[i + 1] += c;
                    next[i] -= z * c;
                }
                m = next;
            }
            let p = Polynomial::from_monomial(&m, -1.0, 1.0);
            let r = p.real_roots(Interval::new(-1.0, 1.0)).unwrap();
            prop_assert_eq!(r.len(), zs.len());
            let scale = p.coeffs().iter().map(|c| c.abs()).sum::<f64>();
            for w in r.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for x in r {
                prop_assert!(p.eval(x).abs() <= 1e-9 * scale);
            }
        }
    }
}
