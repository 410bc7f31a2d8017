//! Real root isolation for Chebyshev series on `[-1, 1]`-local coordinates.
//!
//! Eigenvalues of the colleague matrix seed a grid: the real parts of the
//! eigenvalues, the midpoints between them and a cosine-spaced safety grid.
//! Each sign change on that grid brackets one root, which is then polished
//! on the series itself, so eigenvalue error only affects where the grid lies.

use nalgebra::{DMatrix, Schur};

use super::{cheb_derivative, clenshaw};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub multiplicity: u32,
}

fn trimmed(c: &[f64]) -> &[f64] {
    let max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let last = c.iter().rposition(|v| v.abs() > 1e-15 * max).unwrap_or(0);
    &c[..=last]
}

/// Eigenvalues of the colleague matrix of `c` (degree ≥ 2).
fn colleague_eigenvalues(c: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = c.len() - 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    m[(0, 1)] = 1.0;
    for k in 1..n - 1 {
        m[(k, k - 1)] = 0.5;
        m[(k, k + 1)] = 0.5;
    }
    m[(n - 1, n - 2)] += 0.5;
    for j in 0..n {
        m[(n - 1, j)] -= c[j] / (2.0 * c[n]);
    }
    // The QR deflation test is relative to the diagonal, which is zero for
    // symmetric series; a shift keeps it away from zero.
    const SHIFT: f64 = 2.0;
    for k in 0..n {
        m[(k, k)] += SHIFT;
    }
    let schur = Schur::try_new(m, f64::EPSILON, 1000 * n)
        .ok_or_else(|| Error::numerical("colleague matrix eigenvalues did not converge"))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re - SHIFT, z.im))
        .collect())
}

pub(super) fn local_roots(c: &[f64], a: f64, b: f64) -> Result<Vec<Root>> {
    let c = trimmed(c);
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    if deg == 1 {
        let x = -c[0] / c[1];
        return Ok(if a <= x && x <= b {
            vec![Root { x, multiplicity: 1 }]
        } else {
            Vec::new()
        });
    }
    let mut seeds: Vec<f64> = colleague_eigenvalues(c)?
        .into_iter()
        .filter(|&(re, im)| im.abs() <= 1e-3 && a < re && re < b)
        .map(|(re, _)| re)
        .collect();
    seeds.sort_by(f64::total_cmp);

    // (position, is a seed). Eigenvalues lose accuracy when the top
    // coefficient is small, so a cosine-spaced safety grid is merged in.
    let mut grid: Vec<(f64, bool)> = Vec::with_capacity(2 * seeds.len() + 4 * deg + 2);
    let safety = 4 * deg;
    for i in 0..=safety {
        let t = std::f64::consts::PI * i as f64 / safety as f64;
        grid.push((a + 0.5 * (b - a) * (1.0 - t.cos()), false));
    }
    let mut prev = a;
    for &s in &seeds {
        grid.push((0.5 * (prev + s), false));
        grid.push((s, true));
        prev = s;
    }
    grid.push((0.5 * (prev + b), false));
    grid.sort_by(|p, q| p.0.total_cmp(&q.0));
    grid.dedup_by(|p, q| {
        if p.0 == q.0 {
            q.1 |= p.1;
            true
        } else {
            false
        }
    });
    grid[0].0 = a;
    grid.last_mut().unwrap().0 = b;

    let scale: f64 =
        c.iter().map(|v| v.abs()).sum::<f64>() * a.abs().max(b.abs()).max(1.0).powi(deg as i32);
    let noise = 1e-13 * scale;
    let vals: Vec<f64> = grid.iter().map(|g| clenshaw(c, g.0)).collect();
    let zero: Vec<bool> = vals.iter().map(|v| v.abs() <= noise).collect();

    let mut out = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        if zero[i] {
            // A run of grid points at noise level is one (possibly multiple) root.
            let mut j = i;
            while j + 1 < grid.len() && zero[j + 1] {
                j += 1;
            }
            let best = (i..=j)
                .min_by(|&p, &q| vals[p].abs().total_cmp(&vals[q].abs()))
                .unwrap();
            let seeds_in = (i..=j).filter(|&p| grid[p].1).count() as u32;
            let left = i.checked_sub(1).map(|p| vals[p].signum());
            let right = (j + 1 < grid.len()).then(|| vals[j + 1].signum());
            let crosses = matches!((left, right), (Some(l), Some(r)) if l != r);
            let at_end = i == 0 || j + 1 == grid.len();
            let multiplicity = if seeds_in >= 2 {
                seeds_in
            } else if crosses || at_end {
                1
            } else {
                2
            };
            out.push(Root {
                x: grid[best].0,
                multiplicity,
            });
            i = j + 1;
            continue;
        }
        if i + 1 < grid.len() && !zero[i + 1] && vals[i] * vals[i + 1] < 0.0 {
            let x = polish(c, grid[i].0, grid[i + 1].0, vals[i]);
            out.push(Root { x, multiplicity: 1 });
        }
        i += 1;
    }
    Ok(out)
}

/// Safeguarded Newton iteration on a bracket with a sign change.
fn polish(c: &[f64], mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let dc = cheb_derivative(c);
    let s_lo = f_lo.signum();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = clenshaw(c, x);
        if f == 0.0 {
            return x;
        }
        if f.signum() == s_lo {
            lo = x;
        } else {
            hi = x;
        }
        let d = clenshaw(&dc, x);
        let newton = x - f / d;
        let next = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let tol = 1e-15 * (1.0 + next.abs());
        if (next - x).abs() <= tol || hi - lo <= tol {
            return next;
        }
        x = next;
    }
    x
}

/// Bisection on a sign change of `f` in `[lo, hi]`, to a relative width of
/// about `1e-15`.
pub fn refine_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    let s_lo = f_lo.signum();
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
