//! Brute-force minimax on a dense grid, solved as a linear program.
//!
//! The discrete problem is `min t` over `(c, t)` subject to
//! `|Σ c_i T_i(x_g)| ≤ t` on the grid and `Σ c_i T_i(x0) = 1`, with `T_i` the
//! Chebyshev basis of the hull. Its dual has only `n + 2` equality rows and
//! two nonnegative columns per grid point, so a revised simplex on the dual
//! with an explicit `(n+2)×(n+2)` basis is cheap. The primal `(c, t)` is read
//! off the simplex multipliers at the optimum.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::realset::{Interval, NormalizedProblem};
use crate::solver::{sample_set, ResidualSolution};

pub const DEFAULT_PER_BAND: usize = 2000;

/// Tolerance of [`compare`].
pub const COMPARE_TOL: f64 = 5e-4;

/// Non-improving pivots before switching from Dantzig to Bland pricing.
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct GridProblem {
    pub grid: Vec<f64>,
    pub x0: f64,
    pub n: usize,
    hull: Interval,
}

impl GridProblem {
    /// Cosine-spaced points on every band, band endpoints included.
    pub fn new(prob: &NormalizedProblem, n: usize, per_band: usize) -> Result<Self> {
        if per_band < 2 {
            return Err(Error::invalid("grid needs at least 2 points per band"));
        }
        let gp = GridProblem {
            grid: sample_set(&prob.set, per_band),
            x0: prob.x0,
            n,
            hull: prob.set.hull(),
        };
        if n + 2 > gp.grid.len() {
            return Err(Error::invalid(format!(
                "grid of {} points is too small for degree {n}",
                gp.grid.len()
            )));
        }
        Ok(gp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    /// Minimizer in the Chebyshev basis of the hull, `n + 1` coefficients.
    pub poly: Polynomial,
    /// Grid maximum of `|poly|`, with `poly(x0) = 1`.
    pub t: f64,
    pub iterations: usize,
    /// Whether Bland's rule had to take over.
    pub bland_used: bool,
}

impl GridSolution {
    /// Degree after dropping a negligible top coefficient.
    pub fn effective_degree(&self) -> usize {
        let c = self.poly.coeffs();
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut d = c.len() - 1;
        while d > 0 && c[d].abs() <= 1e-6 * scale {
            d -= 1;
        }
        d
    }
}

/// Basis values `T_0..T_n` at `u ∈ [−1, 1]`.
fn cheb_row(n: usize, u: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(n + 1);
    row.push(1.0);
    if n >= 1 {
        row.push(u);
    }
    for i in 2..=n {
        row.push(2.0 * u * row[i - 1] - row[i - 2]);
    }
    row
}

/// Standard-form LP `min cᵀx, Ax = b, x ≥ 0` with `b ≥ 0`.
struct Lp {
    a: DMatrix<f64>,
    b: DVector<f64>,
    cost: Vec<f64>,
}

struct Vertex {
    basis: Vec<usize>,
    /// Simplex multipliers `π` with `B^T π = c_B`.
    pi: DVector<f64>,
    iterations: usize,
    bland_used: bool,
}

fn lu_solve(b: &DMatrix<f64>, rhs: &DVector<f64>, transpose: bool) -> Result<DVector<f64>> {
    let m = if transpose { b.transpose() } else { b.clone() };
    m.lu()
        .solve(rhs)
        .ok_or_else(|| Error::numerical("simplex basis became singular"))
}

impl Lp {
    fn basis_matrix(&self, basis: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.a.nrows(), basis.len(), |i, j| self.a[(i, basis[j])])
    }

    /// Runs the simplex from a feasible basis. Columns marked `false` in
    /// `allowed` never enter.
    fn optimize(&self, mut basis: Vec<usize>, cost: &[f64], allowed: &[bool]) -> Result<Vertex> {
        let m = self.a.nrows();
        let ncol = self.a.ncols();
        let scale = self.a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let eps = 1e-11 * scale;
        let mut x_b = lu_solve(&self.basis_matrix(&basis), &self.b, false)?;
        let mut stall = 0;
        let mut bland_used = false;
        let mut last_obj = f64::INFINITY;
        let max_iter = 50 * (m + ncol);
        for iter in 0..max_iter {
            let bm = self.basis_matrix(&basis);
            let c_b = DVector::from_iterator(m, basis.iter().map(|&j| cost[j]));
            let pi = lu_solve(&bm, &c_b, true)?;
            let bland = stall >= STALL_LIMIT;
            bland_used |= bland;
            let mut in_basis = vec![false; ncol];
            for &j in &basis {
                in_basis[j] = true;
            }

            // Pricing.
            let mut entering = None;
            let mut best = -eps;
            for j in 0..ncol {
                if in_basis[j] || !allowed[j] {
                    continue;
                }
                let d = cost[j] - self.a.column(j).dot(&pi);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return Ok(Vertex {
                    basis,
                    pi,
                    iterations: iter,
                    bland_used,
                });
            };

            // Ratio test; Bland breaks ties by smallest variable index.
            let u = lu_solve(&bm, &self.a.column(q).into_owned(), false)?;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if u[i] > eps {
                    let ratio = x_b[i].max(0.0) / u[i];
                    let better = match leave {
                        None => true,
                        Some((l, r)) => {
                            ratio < r - 1e-14 || (ratio <= r + 1e-14 && basis[i] < basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((l, _)) = leave else {
                return Err(Error::numerical("linear program is unbounded"));
            };
            basis[l] = q;
            x_b = lu_solve(&self.basis_matrix(&basis), &self.b, false)?;
            let obj: f64 = basis.iter().zip(x_b.iter()).map(|(&j, v)| cost[j] * v).sum();
            if obj < last_obj - 1e-14 * last_obj.abs().max(1.0) {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
        }
        Err(Error::Numerical {
            message: "simplex iteration limit reached".into(),
            diagnostic: Some(serde_json::json!({ "iterations": max_iter })),
        })
    }

    /// Two-phase simplex. Returns the optimal vertex of the original columns.
    fn solve(&self) -> Result<Vertex> {
        let m = self.a.nrows();
        let n0 = self.a.ncols();
        // Phase I on [A | I] with unit costs on the artificials.
        let mut ext = Lp {
            a: self.a.clone().insert_columns(n0, m, 0.0),
            b: self.b.clone(),
            cost: vec![0.0; n0 + m],
        };
        for i in 0..m {
            ext.a[(i, n0 + i)] = 1.0;
            ext.cost[n0 + i] = 1.0;
        }
        let allowed = vec![true; n0 + m];
        let p1 = ext.optimize((n0..n0 + m).collect(), &ext.cost, &allowed)?;
        let x_b = lu_solve(&ext.basis_matrix(&p1.basis), &ext.b, false)?;
        let infeas: f64 = p1
            .basis
            .iter()
            .zip(x_b.iter())
            .filter(|(&j, _)| j >= n0)
            .map(|(_, v)| *v)
            .sum();
        if infeas > 1e-9 {
            return Err(Error::invariant(format!(
                "oracle linear program infeasible (phase I residual {infeas:e})"
            )));
        }
        // Pivot zero-level artificials out of the basis.
        let mut basis = p1.basis;
        for pos in 0..m {
            if basis[pos] < n0 {
                continue;
            }
            let bm = ext.basis_matrix(&basis);
            let mut e = DVector::zeros(m);
            e[pos] = 1.0;
            let row = lu_solve(&bm, &e, true)?;
            let pick = (0..n0)
                .filter(|j| !basis.contains(j))
                .map(|j| (j, self.a.column(j).dot(&row).abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match pick {
                Some((j, v)) if v > 1e-9 => basis[pos] = j,
                _ => return Err(Error::invariant("oracle constraint rows are dependent")),
            }
        }
        let mut cost = self.cost.clone();
        cost.extend(std::iter::repeat_n(0.0, m));
        let mut allowed = vec![true; n0 + m];
        for a in allowed.iter_mut().skip(n0) {
            *a = false;
        }
        let mut v = ext.optimize(basis, &cost, &allowed)?;
        v.iterations += p1.iterations;
        v.bland_used |= p1.bland_used;
        Ok(v)
    }
}

/// Solves the discretized residual problem.
pub fn grid_minimax(gp: &GridProblem) -> Result<GridSolution> {
    let n = gp.n;
    let (lo, hi) = (gp.hull.lo, gp.hull.hi);
    let local = |x: f64| (2.0 * x - lo - hi) / (hi - lo);
    let b0 = cheb_row(n, local(gp.x0));
    if n == 0 {
        return Ok(GridSolution {
            poly: Polynomial::constant(1.0, lo, hi),
            t: 1.0,
            iterations: 0,
            bland_used: false,
        });
    }
    // Dual: maximize μ subject to Σ(y⁺ + y⁻) = 1 and
    // Σ(y⁻ − y⁺)φ(x_g) + μφ(x0) = 0, with μ = μ⁺ − μ⁻.
    let g = gp.grid.len();
    let rows = n + 2;
    let cols = 2 * g + 2;
    let mut a = DMatrix::zeros(rows, cols);
    for (k, &x) in gp.grid.iter().enumerate() {
        let phi = cheb_row(n, local(x));
        a[(0, 2 * k)] = 1.0;
        a[(0, 2 * k + 1)] = 1.0;
        for i in 0..=n {
            a[(i + 1, 2 * k)] = -phi[i];
            a[(i + 1, 2 * k + 1)] = phi[i];
        }
    }
    // Far from the hull φ(x0) is huge; unit-scale its column so the pricing
    // tolerance stays relative to the grid values.
    let b0_scale = b0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..=n {
        a[(i + 1, 2 * g)] = b0[i] / b0_scale;
        a[(i + 1, 2 * g + 1)] = -b0[i] / b0_scale;
    }
    let mut rhs = DVector::zeros(rows);
    rhs[0] = 1.0;
    let mut cost = vec![0.0; cols];
    cost[2 * g] = -1.0;
    cost[2 * g + 1] = 1.0;
    let lp = Lp { a, b: rhs, cost };
    let v = lp.solve()?;

    // Reduced costs give |p·φ(x_g)| ≤ −π₀ and p·φ(x0) < 0, so c = −p.
    let mut c: Vec<f64> = v.pi.iter().skip(1).map(|p| -p).collect();
    let at_x0: f64 = c.iter().zip(&b0).map(|(ci, bi)| ci * bi).sum();
    if !(at_x0.abs() > 0.0) || !at_x0.is_finite() {
        return Err(Error::numerical("oracle minimizer vanishes at x0"));
    }
    for ci in &mut c {
        *ci /= at_x0;
    }
    let poly = Polynomial::new(c, lo, hi);
    let t = gp.grid.iter().map(|&x| poly.eval(x).abs()).fold(0.0, f64::max);
    Ok(GridSolution {
        poly,
        t,
        iterations: v.iterations,
        bland_used: v.bland_used,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub r: f64,
    pub t: f64,
    pub norm_deviation: f64,
    pub coefficient_deviation: f64,
    pub oracle_degree: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Solver against oracle. Both polynomials are expressed in the Chebyshev
/// basis of the hull, padded to the longer length.
pub fn compare(sol: &ResidualSolution, oracle: &GridSolution) -> CompareReport {
    let a = sol.poly.coeffs();
    let b = oracle.poly.coeffs();
    let len = a.len().max(b.len());
    let coefficient_deviation = (0..len)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    let norm_deviation = (sol.r - oracle.t).abs();
    CompareReport {
        r: sol.r,
        t: oracle.t,
        norm_deviation,
        coefficient_deviation,
        oracle_degree: oracle.effective_degree(),
        tolerance: COMPARE_TOL,
        pass: norm_deviation <= COMPARE_TOL && coefficient_deviation <= COMPARE_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_residual, SolveOptions};
    use proptest::prelude::*;

    fn problem(iv: &[(f64, f64)], x0: f64) -> NormalizedProblem {
        NormalizedProblem::new(iv, x0).unwrap()
    }

    fn oracle(p: &NormalizedProblem, n: usize, per_band: usize) -> GridSolution {
        grid_minimax(&GridProblem::new(p, n, per_band).unwrap()).unwrap()
    }

    #[test]
    fn interval_n1() {
        let o = oracle(&problem(&[(-1.0, 1.0)], 2.0), 1, DEFAULT_PER_BAND);
        assert!(o.t >= 0.5 - 1e-15 && o.t <= 0.5 + 1e-5, "{}", o.t);
        assert!((o.poly.eval(2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_for_n0() {
        let o = oracle(&problem(&[(-1.0, 1.0)], 2.0), 0, DEFAULT_PER_BAND);
        assert_eq!(o.t, 1.0);
    }

    #[test]
    fn two_interval_n2() {
        let o = oracle(&problem(&[(-2.0, -1.0), (1.0, 2.0)], 0.0), 2, DEFAULT_PER_BAND);
        assert!(o.t >= 0.6 - 1e-15 && o.t <= 0.6 + 1e-5, "{}", o.t);
    }

    #[test]
    fn matched_instance_passes() {
        let p = problem(&[(-1.0, -0.3), (0.1, 0.5), (0.8, 1.3)], 0.65);
        let sol = solve_residual(&p, 6, &SolveOptions::default()).unwrap();
        let rep = compare(&sol, &oracle(&p, 6, DEFAULT_PER_BAND));
        assert!(rep.pass, "{rep:?}");
        assert!(sol.r >= rep.t - 1e-9);
    }

    #[test]
    fn loose_solver_is_detected() {
        let p = problem(&[(-1.0, 0.2), (0.6, 1.0)], 0.4);
        let sol = solve_residual(&p, 8, &SolveOptions::with_tol(1e-2)).unwrap();
        let rep = compare(&sol, &oracle(&p, 8, DEFAULT_PER_BAND));
        assert!(rep.norm_deviation.max(rep.coefficient_deviation) > 1e-3, "{rep:?}");
    }

    #[test]
    fn degenerate_instance_reports_lower_degree() {
        let p = problem(&[(-2.0, -1.0), (1.0, 2.0)], 0.0);
        let sol = solve_residual(&p, 3, &SolveOptions::default()).unwrap();
        let o = oracle(&p, 3, DEFAULT_PER_BAND);
        let rep = compare(&sol, &o);
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.oracle_degree, 2);
    }

    #[test]
    fn refinement_is_monotone_and_converges() {
        let p = problem(&[(-1.0, 0.2), (0.6, 1.0)], 0.4);
        let coarse = oracle(&p, 5, 250);
        let mid = oracle(&p, 5, 500);
        let fine = oracle(&p, 5, 1000);
        assert!(mid.t >= coarse.t - 1e-12 && fine.t >= mid.t - 1e-12);
        assert!(fine.t - mid.t <= 1e-5);
    }

    #[test]
    fn tiny_grid_rejected() {
        let p = problem(&[(-1.0, 1.0)], 2.0);
        assert!(GridProblem::new(&p, 3, 2).is_err());
        assert!(GridProblem::new(&p, 1, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn oracle_bounds_exchange(
            a in -2.0f64..-1.0, w1 in 0.2f64..1.0, g in 0.2f64..0.8, w2 in 0.2f64..1.0,
            frac in 0.2f64..0.8, n in 1usize..=6,
        ) {
            let b = a + w1;
            let c = b + g;
            let p = problem(&[(a, b), (c, c + w2)], b + frac * g);
            let sol = solve_residual(&p, n, &SolveOptions::default()).unwrap();
            let o = oracle(&p, n, 500);
            prop_assert!(sol.r >= o.t - 1e-9, "r {} t {}", sol.r, o.t);
            prop_assert!(sol.r <= o.t + 5e-4, "r {} t {}", sol.r, o.t);
        }
    }
}
