//! Equilibrium measure, capacity, Green's functions and Parreau–Widom
//! constants of finite unions of intervals.
//!
//! The equilibrium density is `|q(t)|/(π√|w(t)|)` with
//! `w(t) = Π(t − a_i)(t − b_i)` and `q` monic of degree `m − 1`, fixed by
//! requiring `∫ q/√|w| = 0` over every bounded gap. The Green's function is
//! `Re ∫_e^z q/√w`, integrated from the nearest endpoint `e`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::poly::{refine_root, Polynomial};
use crate::quad::{integrate, Quadrature};
use crate::realset::{Interval, RealSet};

#[derive(Debug, Clone)]
pub struct GreenData {
    set: RealSet,
    /// Endpoints as `ends[i] + ends_lo[i]`; the low parts carry detail below
    /// the float spacing, such as the width of a very narrow band.
    ends: Vec<f64>,
    ends_lo: Vec<f64>,
    q_roots: Vec<f64>,
    capacity: f64,
    band_masses: Vec<f64>,
    quadrature: Quadrature,
}

/// `g` at a point, with a flag for points of the set (where `g = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenValue {
    pub value: f64,
    pub on_set: bool,
}

pub fn equilibrium(set: &RealSet) -> Result<GreenData> {
    equilibrium_with(set, Quadrature::default())
}

pub fn equilibrium_with(set: &RealSet, quadrature: Quadrature) -> Result<GreenData> {
    let ends = set.endpoints().into_iter().map(|e| (e, 0.0)).collect();
    build(set, ends, quadrature)
}

/// Equilibrium of the set with endpoints `hi + lo`, for endpoints closer
/// together than floats can show. `set` must be a float enclosure of it,
/// each endpoint within a few ulps; it answers membership questions.
pub fn equilibrium_refined(set: &RealSet, ends: &[(f64, f64)]) -> Result<GreenData> {
    let plain = set.endpoints();
    if ends.len() != plain.len() {
        return Err(Error::invalid("need one refined endpoint per endpoint of the set"));
    }
    for (&(hi, lo), &e) in ends.iter().zip(&plain) {
        let slack = 8.0 * f64::EPSILON * e.abs().max(f64::MIN_POSITIVE);
        if !hi.is_finite() || !lo.is_finite() || ((hi - e) + lo).abs() > slack {
            return Err(Error::invalid(format!("refined endpoint {hi} + {lo} does not match {e}")));
        }
    }
    for w in ends.windows(2) {
        if !((w[1].0 - w[0].0) + (w[1].1 - w[0].1) > 0.0) {
            return Err(Error::invalid("refined endpoints must increase"));
        }
    }
    // Renormalize so every high part is the rounded endpoint.
    let ends = ends
        .iter()
        .map(|&(hi, lo)| {
            let s = hi + lo;
            (s, lo - (s - hi))
        })
        .collect();
    build(set, ends, Quadrature::default())
}

fn build(set: &RealSet, ends: Vec<(f64, f64)>, quadrature: Quadrature) -> Result<GreenData> {
    let mut gd = GreenData {
        set: set.clone(),
        ends: ends.iter().map(|e| e.0).collect(),
        ends_lo: ends.iter().map(|e| e.1).collect(),
        q_roots: Vec::new(),
        capacity: f64::NAN,
        band_masses: Vec::new(),
        quadrature,
    };
    gd.q_roots = gd.solve_gap_conditions()?;
    gd.band_masses = (0..set.components())
        .map(|j| gd.band_mass(j, set.intervals()[j].lo, set.intervals()[j].hi))
        .collect::<Result<_>>()?;
    let total: f64 = gd.band_masses.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Numerical {
            message: format!("equilibrium measure has total mass {total}"),
            diagnostic: Some(serde_json::json!({ "band_masses": gd.band_masses, "q_roots": gd.q_roots })),
        });
    }
    gd.capacity = gd.compute_capacity()?;
    Ok(gd)
}

impl GreenData {
    pub fn set(&self) -> &RealSet {
        &self.set
    }

    /// Zeros of the density numerator, one per bounded gap.
    pub fn q_roots(&self) -> &[f64] {
        &self.q_roots
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Equilibrium mass of each component.
    pub fn band_masses(&self) -> &[f64] {
        &self.band_masses
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    pub fn q(&self, t: f64) -> f64 {
        self.q_roots.iter().map(|y| t - y).product()
    }

    /// `e_i − e_k`, low parts included.
    fn diff(&self, i: usize, k: usize) -> f64 {
        (self.ends[i] - self.ends[k]) + (self.ends_lo[i] - self.ends_lo[k])
    }

    /// `Π |t − e_k|` over endpoints other than `skip = [i, i + 1]`, given the
    /// offsets `ta = t − e_i ≥ 0` and `tb = t − e_{i+1} ≤ 0`. Working from the
    /// offsets keeps full relative accuracy next to a nearby endpoint.
    fn w_rest(&self, ta: f64, tb: f64, skip: [usize; 2]) -> f64 {
        (0..self.ends.len())
            .filter(|k| *k != skip[0] && *k != skip[1])
            .map(|k| if k < skip[0] { ta + self.diff(skip[0], k) } else { self.diff(k, skip[1]) - tb })
            .product()
    }

    /// `Π |t − e_k|` over endpoints other than `skip`.
    fn w_rest_at(&self, t: f64, skip: [usize; 2]) -> f64 {
        self.ends
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip[0] && *k != skip[1])
            .map(|(_, e)| (t - e).abs())
            .product()
    }

    /// `∫_from^to f(t)/√|w(t)| dt` for a segment `[e_i, e_j]` between
    /// consecutive endpoints, after `t = mid − half·cos θ`. The half next to
    /// `e_j` runs in `φ = π − θ`, so both ends are resolved near zero.
    fn segment_integral(&self, i: usize, j: usize, from: f64, to: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        let (a, b) = (self.ends[i], self.ends[j]);
        let half = 0.5 * self.diff(j, i);
        let angle = |p: f64, q: f64| 2.0 * p.max(0.0).sqrt().atan2(q.max(0.0).sqrt());
        // Bounds at or past an endpoint mean the whole side; this also covers
        // segments whose endpoints share a high part.
        let th = |x: f64| if x <= a { 0.0 } else if x >= b { PI } else { angle(x - a, b - x) };
        let (th_from, th_to) = (th(from), th(to));
        let (ph_from, ph_to) = (PI - th_from, PI - th_to);
        let at = |ta: f64, tb: f64| {
            let t = if ta <= -tb { a + (self.ends_lo[i] + ta) } else { b + (self.ends_lo[j] + tb) };
            f(t) / self.w_rest(ta, tb, [i, j]).sqrt()
        };
        let lower = integrate(
            |th: f64| {
                let (sn, cs) = (0.5 * th).sin_cos();
                at(2.0 * half * sn * sn, -2.0 * half * cs * cs)
            },
            th_from.min(FRAC_PI_2),
            th_to.min(FRAC_PI_2),
            &self.quadrature,
        )?;
        let upper = integrate(
            |ph: f64| {
                let (sn, cs) = (0.5 * ph).sin_cos();
                at(2.0 * half * cs * cs, -2.0 * half * sn * sn)
            },
            ph_to.min(FRAC_PI_2),
            ph_from.min(FRAC_PI_2),
            &self.quadrature,
        )?;
        Ok(lower + upper)
    }

    fn solve_gap_conditions(&self) -> Result<Vec<f64>> {
        let m = self.set.components();
        if m == 1 {
            return Ok(Vec::new());
        }
        let hull = self.set.hull();
        let d = m - 1;
        let mut a = DMatrix::<f64>::zeros(d, d);
        let mut rhs = DVector::<f64>::zeros(d);
        for g in 0..d {
            let (i, j) = (2 * g + 1, 2 * g + 2);
            let (lo, hi) = (self.ends[i], self.ends[j]);
            for k in 0..=d {
                let phi = Polynomial::basis(k, hull.lo, hull.hi);
                let v = self.segment_integral(i, j, lo, hi, |t| phi.eval(t))?;
                if k < d {
                    a[(g, k)] = v;
                } else {
                    rhs[g] = -v;
                }
            }
        }
        let beta = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::numerical("singular gap-condition system"))?;
        let mut coeffs: Vec<f64> = beta.iter().copied().collect();
        coeffs.push(1.0);
        let q = Polynomial::new(coeffs, hull.lo, hull.hi);
        let mut roots = Vec::with_capacity(d);
        for g in 0..d {
            let (lo, hi) = (self.ends[2 * g + 1], self.ends[2 * g + 2]);
            if q.eval(lo) * q.eval(hi) > 0.0 {
                return Err(Error::Numerical {
                    message: format!("density numerator has no sign change in gap ({lo}, {hi})"),
                    diagnostic: None,
                });
            }
            roots.push(refine_root(|t| q.eval(t), lo, hi));
        }
        Ok(roots)
    }

    fn band_mass(&self, j: usize, from: f64, to: f64) -> Result<f64> {
        let v = self.segment_integral(2 * j, 2 * j + 1, from, to, |t| self.q(t).abs())?;
        Ok(v / PI)
    }

    /// Points of band `j` splitting its equilibrium mass into `c − 1` equal
    /// parts, endpoints included. Approximate: meant for seeding iterations.
    pub fn band_quantiles(&self, j: usize, c: usize) -> Vec<f64> {
        let (a, b) = (self.ends[2 * j], self.ends[2 * j + 1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        if c < 2 {
            return vec![mid; c];
        }
        // Cumulative mass against θ, where t = mid − half·cos θ.
        const GRID: usize = 1024;
        let dens = |th: f64| {
            let t = mid - half * th.cos();
            self.q(t).abs() / self.w_rest_at(t, [2 * j, 2 * j + 1]).sqrt()
        };
        let step = PI / GRID as f64;
        let mut cum = vec![0.0; GRID + 1];
        let mut prev = dens(0.0);
        for i in 1..=GRID {
            let cur = dens(i as f64 * step);
            cum[i] = cum[i - 1] + 0.5 * step * (prev + cur);
            prev = cur;
        }
        let total = cum[GRID];
        let mut out = Vec::with_capacity(c);
        let mut i = 0;
        for k in 0..c {
            let target = total * k as f64 / (c - 1) as f64;
            while i < GRID - 1 && cum[i + 1] < target {
                i += 1;
            }
            let span = cum[i + 1] - cum[i];
            let frac = if span > 0.0 { ((target - cum[i]) / span).clamp(0.0, 1.0) } else { 0.0 };
            let th = (i as f64 + frac) * step;
            out.push((mid - half * th.cos()).clamp(a, b));
        }
        out[0] = a;
        out[c - 1] = b;
        out
    }

    /// `∫_gap q/√|w|` for every bounded gap; zero for the true equilibrium.
    pub fn gap_condition_residuals(&self) -> Result<Vec<f64>> {
        (0..self.set.components() - 1)
            .map(|g| {
                let (i, j) = (2 * g + 1, 2 * g + 2);
                self.segment_integral(i, j, self.ends[i], self.ends[j], |t| self.q(t))
            })
            .collect()
    }

    /// Equilibrium density at a point of the set.
    pub fn density(&self, x: f64) -> f64 {
        if !self.set.contains(x) {
            return 0.0;
        }
        let w: f64 = self.ends.iter().map(|e| (x - e).abs()).product();
        self.q(x).abs() / (PI * w.sqrt())
    }

    /// Equilibrium mass of `band`, which must lie inside one component.
    pub fn harmonic_measure(&self, band: Interval) -> Result<f64> {
        let j = self
            .set
            .component_of(band.lo)
            .filter(|_| self.set.contains_interval(band.lo, band.hi))
            .ok_or_else(|| {
                Error::invalid(format!("[{}, {}] is not inside the set", band.lo, band.hi))
            })?;
        self.band_mass(j, band.lo, band.hi)
    }

    fn compute_capacity(&self) -> Result<f64> {
        let m = self.ends.len();
        let (bm, bm_lo) = (self.ends[m - 1], self.ends_lo[m - 1]);
        let diam = self.set.diameter();
        let c0 = self.set.lower() - diam;
        // ∫_{bm}^∞ (q/√w − 1/(t − c0)) dt with t = bm + D·v²/(1 − v)².
        let tail = integrate(
            |v: f64| {
                let s = v / (1.0 - v);
                let t = bm + (bm_lo + diam * s * s);
                let dt = 2.0 * diam * s / ((1.0 - v) * (1.0 - v));
                // q/√w with the (t − bm) factor written as √D·s.
                let off = diam * s * s;
                let rest: f64 = (0..m - 1).map(|k| off + self.diff(m - 1, k)).product::<f64>().sqrt();
                let main = 2.0 * diam.sqrt() * self.q(t) / rest / ((1.0 - v) * (1.0 - v));
                main - dt / (t - c0)
            },
            0.0,
            1.0,
            &self.quadrature,
        )?;
        Ok((((bm - c0) + bm_lo).ln() - tail).exp())
    }

    pub fn is_on_set(&self, z: Complex64) -> bool {
        z.im == 0.0 && self.set.contains(z.re)
    }

    pub fn evaluate(&self, z: Complex64) -> Result<GreenValue> {
        if self.is_on_set(z) {
            return Ok(GreenValue {
                value: 0.0,
                on_set: true,
            });
        }
        Ok(GreenValue {
            value: self.green_off_set(z)?,
            on_set: false,
        })
    }

    /// `g(z)`, zero on the set.
    pub fn green(&self, z: Complex64) -> Result<f64> {
        Ok(self.evaluate(z)?.value)
    }

    pub fn green_real(&self, x: f64) -> Result<f64> {
        self.green(Complex64::new(x, 0.0))
    }

    fn green_off_set(&self, z: Complex64) -> Result<f64> {
        let z = if z.im < 0.0 { z.conj() } else { z };
        let (ie, e) = self
            .ends
            .iter()
            .enumerate()
            .min_by(|a, b| (z - a.1).norm().total_cmp(&(z - b.1).norm()))
            .map(|(i, e)| (i, *e))
            .expect("nonempty endpoint list");
        let dz = z - e;
        let root = dz.sqrt();
        let v = integrate(
            |s: f64| {
                // Offsets from `e`, so nearby endpoints keep relative accuracy.
                let off = dz * (s * s);
                let mut den = Complex64::new(1.0, 0.0);
                for i in 0..self.ends.len() {
                    if i != ie {
                        den *= (off + self.diff(ie, i)).sqrt();
                    }
                }
                let q: Complex64 = self.q_roots.iter().map(|y| off + ((e - y) + self.ends_lo[ie])).product();
                2.0 * root * q / den
            },
            0.0,
            1.0,
            &self.quadrature,
        )?;
        Ok(v.re.max(0.0))
    }
}

/// Where a critical point of `g(·, x0)` sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Finite { x: f64 },
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub location: Location,
    /// `g(c, x0)`.
    pub value: f64,
    /// Image `1/(c − x0)` in the inverted set; near zero means `c = ∞`.
    pub inverted: f64,
    /// Whether the threshold test put the point at `∞`.
    pub infinity_by_threshold: bool,
    /// Whether the point lies in the unbounded gap of the original set,
    /// the one gap where the `∞` decision is made.
    pub in_unbounded_gap: bool,
}

/// `|ζ| ≤ INFINITY_THRESHOLD·diam(f)` puts a critical point at infinity.
pub const INFINITY_THRESHOLD: f64 = 1e-10;

/// Green's function with pole at `x0`, via the inverted set
/// `f = {1/(x − x0)}`.
#[derive(Debug, Clone)]
pub struct PoleData {
    base: GreenData,
    x0: f64,
    critical_points: Vec<CriticalPoint>,
    pw: f64,
}

impl PoleData {
    pub fn new(set: &RealSet, x0: f64) -> Result<Self> {
        Self::with_quadrature(set, x0, Quadrature::default())
    }

    pub fn with_quadrature(set: &RealSet, x0: f64, quadrature: Quadrature) -> Result<Self> {
        if set.contains(x0) || !x0.is_finite() {
            return Err(Error::invalid(format!("pole x0 = {x0} must lie off the set")));
        }
        let raw: Vec<(f64, f64)> = set
            .intervals()
            .iter()
            .map(|iv| (1.0 / (iv.hi - x0), 1.0 / (iv.lo - x0)))
            .collect();
        let inverted = RealSet::new(&raw)?;
        let base = equilibrium_with(&inverted, quadrature)?;
        let diam = inverted.diameter();
        let mut critical_points = Vec::with_capacity(base.q_roots.len());
        for &zeta in &base.q_roots {
            let value = base.green_real(zeta)?;
            let at_inf = zeta.abs() <= INFINITY_THRESHOLD * diam;
            let crosses_zero = base
                .set
                .gaps()
                .iter()
                .any(|g| matches!(*g, crate::realset::Gap::Bounded { lo, hi, .. } if lo < 0.0 && 0.0 < hi && lo < zeta && zeta < hi));
            critical_points.push(CriticalPoint {
                location: if at_inf {
                    Location::Infinity
                } else {
                    Location::Finite { x: x0 + 1.0 / zeta }
                },
                value,
                inverted: zeta,
                infinity_by_threshold: at_inf,
                in_unbounded_gap: crosses_zero,
            });
        }
        let pw = critical_points.iter().map(|c| c.value).sum();
        Ok(PoleData {
            base,
            x0,
            critical_points,
            pw,
        })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Equilibrium data of the inverted set.
    pub fn inverted(&self) -> &GreenData {
        &self.base
    }

    pub fn critical_points(&self) -> &[CriticalPoint] {
        &self.critical_points
    }

    /// The Parreau–Widom constant `Σ g(c_j, x0)`.
    pub fn pw(&self) -> f64 {
        self.pw
    }

    /// `g(z, x0)`; fails at the pole.
    pub fn green(&self, z: Complex64) -> Result<f64> {
        let d = z - self.x0;
        if d == Complex64::new(0.0, 0.0) {
            return Err(Error::invalid("Green's function evaluated at its pole"));
        }
        self.base.green(1.0 / d)
    }

    pub fn green_real(&self, x: f64) -> Result<f64> {
        self.green(Complex64::new(x, 0.0))
    }

    /// `g(∞, x0)`, which equals `g(x0)` for the pole at infinity.
    pub fn green_at_infinity(&self) -> Result<f64> {
        self.base.green_real(0.0)
    }
}

/// `g(z, x0)` for real arguments.
pub fn green_pole(set: &RealSet, z: f64, x0: f64) -> Result<f64> {
    if z == x0 {
        return Err(Error::invalid("Green's function evaluated at its pole"));
    }
    PoleData::new(set, x0)?.green_real(z)
}

pub fn critical_points(set: &RealSet, x0: f64) -> Result<Vec<CriticalPoint>> {
    Ok(PoleData::new(set, x0)?.critical_points)
}

pub fn pw_constant(set: &RealSet, x0: f64) -> Result<f64> {
    Ok(PoleData::new(set, x0)?.pw)
}
