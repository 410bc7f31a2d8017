//! Barycentric Lagrange interpolation through the reference points.

use num_complex::Complex64;

use super::Polynomial;
use crate::error::{Error, Result};

/// The polynomial of degree `< nodes.len()` through `(x_j, f_j)`.
///
/// Nodes are stored in the scaled variable `u = (x − center)/scale`; with
/// `scale` a quarter of the hull length the weights stay in floating-point
/// range for a few hundred nodes.
#[derive(Debug, Clone)]
pub struct Interpolant {
    center: f64,
    scale: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl Interpolant {
    pub fn new(nodes_x: &[f64], values: Vec<f64>, center: f64, scale: f64) -> Result<Self> {
        if nodes_x.is_empty() || nodes_x.len() != values.len() {
            return Err(Error::invalid("interpolant needs matching nonempty nodes and values"));
        }
        if !(scale > 0.0) {
            return Err(Error::invalid("interpolant scale must be positive"));
        }
        let nodes: Vec<f64> = nodes_x.iter().map(|x| (x - center) / scale).collect();
        let mut weights = Vec::with_capacity(nodes.len());
        for (j, &uj) in nodes.iter().enumerate() {
            let mut prod = 1.0;
            for (i, &ui) in nodes.iter().enumerate() {
                if i != j {
                    prod *= uj - ui;
                }
            }
            if prod == 0.0 || !prod.is_finite() {
                return Err(Error::numerical("coincident or badly scaled interpolation nodes"));
            }
            weights.push(1.0 / prod);
        }
        Ok(Interpolant {
            center,
            scale,
            nodes,
            weights,
            values,
        })
    }

    /// Number of nodes; the degree is at most one less.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes_x(&self) -> Vec<f64> {
        self.nodes.iter().map(|u| self.center + self.scale * u).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn local(&self, x: f64) -> f64 {
        (x - self.center) / self.scale
    }

    pub fn eval(&self, x: f64) -> f64 {
        if let [f] = self.values[..] {
            return f;
        }
        let u = self.local(x);
        let mut ell = 1.0;
        let mut s = 0.0;
        for ((&uj, &wj), &fj) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = u - uj;
            if d == 0.0 {
                return fj;
            }
            ell *= d;
            s += wj * fj / d;
        }
        ell * s
    }

    /// `(sign, ln|p(x)|)`, immune to overflow far from the nodes.
    pub fn eval_log(&self, x: f64) -> (f64, f64) {
        if let [f] = self.values[..] {
            return (f.signum(), f.abs().ln());
        }
        let u = self.local(x);
        let mut log_ell = 0.0;
        let mut sign = 1.0;
        let mut s = 0.0;
        for ((&uj, &wj), &fj) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = u - uj;
            if d == 0.0 {
                return (fj.signum(), fj.abs().ln());
            }
            log_ell += d.abs().ln();
            if d < 0.0 {
                sign = -sign;
            }
            s += wj * fj / d;
        }
        (sign * s.signum(), log_ell + s.abs().ln())
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        if let [f] = self.values[..] {
            return Complex64::new(f, 0.0);
        }
        let u = (z - self.center) / self.scale;
        let mut ell = Complex64::new(1.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for ((&uj, &wj), &fj) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = u - uj;
            if d == Complex64::new(0.0, 0.0) {
                return Complex64::new(fj, 0.0);
            }
            ell *= d;
            s += wj * fj / d;
        }
        ell * s
    }

    /// Lagrange basis values `ℓ_j(x)` at a point that is not a node.
    pub fn lagrange_at(&self, x: f64) -> Vec<f64> {
        let u = self.local(x);
        let ell: f64 = self.nodes.iter().map(|uj| u - uj).product();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(uj, wj)| ell * wj / (u - uj))
            .collect()
    }

    /// Barycentric weights with respect to `x` (not the scaled variable).
    pub fn weights_x(&self) -> Vec<f64> {
        let k = self.scale.powi(1 - self.nodes.len() as i32);
        self.weights.iter().map(|w| w * k).collect()
    }

    /// Coefficient of `x^(len − 1)`.
    pub fn leading_coefficient(&self) -> f64 {
        let s: f64 = self.weights.iter().zip(&self.values).map(|(w, f)| w * f).sum();
        s * self.scale.powi(1 - self.nodes.len() as i32)
    }

    /// `|Σ w_j f_j| / Σ |w_j f_j|`: how strongly the top coefficient cancels.
    pub fn leading_cancellation(&self) -> f64 {
        let (s, a) = self
            .weights
            .iter()
            .zip(&self.values)
            .fold((0.0, 0.0), |(s, a), (w, f)| (s + w * f, a + (w * f).abs()));
        if a == 0.0 {
            0.0
        } else {
            s.abs() / a
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Chebyshev form on `[lo, hi]` of degree `len − 1`.
    pub fn to_polynomial(&self, lo: f64, hi: f64) -> Polynomial {
        Polynomial::interpolate(|x| self.eval(x), self.len() - 1, lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cubic(x: f64) -> f64 {
        2.0 * x * x * x - x + 0.5
    }

    fn sample() -> Interpolant {
        let xs = [-1.0, -0.2, 0.4, 1.0];
        Interpolant::new(&xs, xs.iter().map(|&x| cubic(x)).collect(), 0.0, 0.5).unwrap()
    }

    #[test]
    fn reproduces_cubic() {
        let p = sample();
        for x in [-3.0, -0.7, 0.0, 0.33, 2.5] {
            assert_relative_eq!(p.eval(x), cubic(x), max_relative = 1e-13, epsilon = 1e-14);
            let (s, l) = p.eval_log(x);
            assert_relative_eq!(s * l.exp(), cubic(x), max_relative = 1e-12);
        }
        assert_relative_eq!(p.leading_coefficient(), 2.0, max_relative = 1e-13);
        let z = Complex64::new(0.3, -0.8);
        let exact = 2.0 * z * z * z - z + 0.5;
        assert!((p.eval_complex(z) - exact).norm() < 1e-13);
    }

    #[test]
    fn lagrange_basis_sums_to_one() {
        let p = sample();
        let l = p.lagrange_at(1.7);
        assert_relative_eq!(l.iter().sum::<f64>(), 1.0, max_relative = 1e-13);
        let v: f64 = l.iter().zip(p.values()).map(|(a, b)| a * b).sum();
        assert_relative_eq!(v, cubic(1.7), max_relative = 1e-13);
    }

    #[test]
    fn cancellation_detects_lower_degree() {
        let xs = [-1.0, 0.0, 0.5, 1.0];
        let p = Interpolant::new(&xs, xs.iter().map(|x| x * x).collect(), 0.0, 0.5).unwrap();
        assert!(p.leading_cancellation() < 1e-14);
        assert!(sample().leading_cancellation() > 0.1);
    }

    #[test]
    fn chebyshev_form() {
        let q = sample().to_polynomial(-1.0, 1.0);
        for x in [-0.9, 0.1, 0.8] {
            assert_relative_eq!(q.eval(x), cubic(x), max_relative = 1e-13);
        }
    }

    #[test]
    fn rejects_duplicate_nodes() {
        assert!(Interpolant::new(&[0.0, 0.0], vec![1.0, 2.0], 0.0, 1.0).is_err());
    }
}
