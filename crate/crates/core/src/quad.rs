//! Adaptive Gauss–Kronrod (7/15) quadrature for real and complex integrands.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Accuracy targets. The relative tolerance is measured against `∫|f|`,
/// so integrals that cancel to zero still terminate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-300,
            rel_tol: 1e-14,
            max_intervals: 5000,
        }
    }
}

impl Quadrature {
    /// A stricter configuration, used for self-convergence checks.
    pub fn refined(&self) -> Self {
        Quadrature {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol * 1e-2,
            max_intervals: self.max_intervals * 4,
        }
    }
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
    l1: f64,
}

fn gk15<T: Integrand>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> Segment<T> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut l1 = fc.magnitude() * WGK[7];
    for i in 0..7 {
        let f1 = f(c - h * XGK[i]);
        let f2 = f(c + h * XGK[i]);
        let s = f1 + f2;
        k = k + s * WGK[i];
        l1 += (f1.magnitude() + f2.magnitude()) * WGK[i];
        if i % 2 == 1 {
            g = g + s * WG[i / 2];
        }
    }
    let value = k * h;
    let err = ((k - g) * h).magnitude();
    Segment {
        a,
        b,
        value,
        err,
        l1: l1 * h.abs(),
    }
}

/// `∫_a^b f`.
pub fn integrate<T: Integrand>(f: impl Fn(f64) -> T, a: f64, b: f64, q: &Quadrature) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let mut segs = vec![gk15(&f, a, b)];
    loop {
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        let l1: f64 = segs.iter().map(|s| s.l1).sum();
        let tol = q.abs_tol.max(q.rel_tol.max(100.0 * f64::EPSILON) * l1);
        if !total_err.is_finite() || !l1.is_finite() {
            return Err(Error::numerical(format!(
                "quadrature on [{a}, {b}] produced a non-finite value"
            )));
        }
        if total_err <= tol {
            break;
        }
        // Split the worst segment that is still above roundoff.
        let pick = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                let width_ok = (s.b - s.a).abs() > 1e-14 * (s.a.abs() + s.b.abs()).max(1e-300);
                width_ok && s.err > 50.0 * f64::EPSILON * s.l1
            })
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i);
        let Some(i) = pick else { break };
        if segs.len() >= q.max_intervals {
            return Err(Error::Numerical {
                message: format!("quadrature on [{a}, {b}] did not converge"),
                diagnostic: Some(serde_json::json!({
                    "error_estimate": total_err,
                    "tolerance": tol,
                    "intervals": segs.len(),
                })),
            });
        }
        let s = segs.swap_remove(i);
        let m = 0.5 * (s.a + s.b);
        segs.push(gk15(&f, s.a, m));
        segs.push(gk15(&f, m, s.b));
    }
    // Sum in position order so results do not depend on split history.
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(segs.iter().fold(T::zero(), |acc, s| acc + s.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn smooth_integrals() {
        let q = Quadrature::default();
        let v = integrate(|x: f64| x.sin(), 0.0, PI, &q).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
        let w = integrate(|x: f64| (-x * x).exp(), -8.0, 8.0, &q).unwrap();
        assert_relative_eq!(w, PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn cancelling_integral_terminates() {
        let q = Quadrature::default();
        let v = integrate(|x: f64| x.cos(), 0.0, PI, &q).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn complex_integrand() {
        let q = Quadrature::default();
        let v = integrate(|t: f64| Complex64::new(0.0, t).exp(), 0.0, PI, &q).unwrap();
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn reversed_limits() {
        let q = Quadrature::default();
        let v = integrate(|x: f64| x * x, 1.0, 0.0, &q).unwrap();
        assert_relative_eq!(v, -1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn peaked_integrand() {
        let q = Quadrature::default();
        let eps = 1e-6;
        let v = integrate(|x: f64| eps / (x * x + eps * eps), -1.0, 1.0, &q).unwrap();
        assert_relative_eq!(v, 2.0 * (1.0 / eps).atan(), max_relative = 1e-12);
    }
}
