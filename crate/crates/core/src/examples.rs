//! Closed-form instances and their defects against the exchange solver.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::Result;
use crate::poly::cheb_classical;
use crate::realset::{NormalizedProblem, RealSet};
use crate::solver::{chebyshev, sample_set, solve_residual, SolveOptions};

/// Tolerance on both the relative norm defect and the shape defect.
pub const EXAMPLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleRow {
    pub name: String,
    pub intervals: Vec<[f64; 2]>,
    pub x0: f64,
    pub n: usize,
    pub r: f64,
    pub r_expected: f64,
    /// `|r − r_expected| / r_expected`.
    pub r_defect: f64,
    /// `max |R − R_expected|` on a sample of the set.
    pub shape_defect: f64,
    pub d_n: usize,
    pub d_expected: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExamplesReport {
    pub tolerance: f64,
    pub rows: Vec<ExampleRow>,
    pub all_pass: bool,
}

fn row(
    name: &str,
    prob: &NormalizedProblem,
    n: usize,
    opts: &SolveOptions,
    expected: impl Fn(f64) -> f64,
    d_expected: usize,
) -> Result<ExampleRow> {
    let sol = solve_residual(prob, n, opts)?;
    let r_expected = prob.set.endpoints().iter().map(|&x| expected(x).abs()).fold(0.0, f64::max);
    // The closed forms are levelled, so their norm is attained at an
    // endpoint or an interior extremum; sample densely to be safe.
    let sample = sample_set(&prob.set, 400);
    let r_expected = sample.iter().map(|&x| expected(x).abs()).fold(r_expected, f64::max);
    let shape_defect = sample.iter().map(|&x| (sol.eval(x) - expected(x)).abs()).fold(0.0, f64::max);
    let r_defect = (sol.r - r_expected).abs() / r_expected;
    Ok(ExampleRow {
        name: name.into(),
        intervals: prob.set.intervals().iter().map(|iv| [iv.lo, iv.hi]).collect(),
        x0: prob.x0,
        n,
        r: sol.r,
        r_expected,
        r_defect,
        shape_defect,
        d_n: sol.d_n,
        d_expected,
        pass: r_defect <= EXAMPLE_TOL && shape_defect <= EXAMPLE_TOL && sol.d_n == d_expected,
    })
}

fn c(n: usize, x: f64) -> f64 {
    cheb_classical(n as i64, x).expect("nonnegative index")
}

/// `Υ = κ·C_3` with `κ > 1`, whose preimage of `[−1, 1]` is three bands.
fn period_three() -> (f64, Vec<(f64, f64)>) {
    let kappa: f64 = 1.2;
    let alpha = (1.0 / kappa).acos();
    let bands = (0..3)
        .map(|j| {
            let t0 = (PI * j as f64 + alpha) / 3.0;
            let t1 = (PI * (j + 1) as f64 - alpha) / 3.0;
            let (a, b) = (t0.cos(), t1.cos());
            (a.min(b), a.max(b))
        })
        .collect();
    (kappa, bands)
}

/// Every closed-form instance, solved at default options.
pub fn run_examples(opts: &SolveOptions) -> Result<ExamplesReport> {
    let mut rows = Vec::new();

    // Single interval: C_n(x)/C_n(x0).
    for x0 in [2.0, -1.5] {
        let p = NormalizedProblem::new(&[(-1.0, 1.0)], x0)?;
        for n in 1..=10 {
            rows.push(row("interval", &p, n, opts, |x| c(n, x) / c(n, x0), n)?);
        }
    }

    // Degree drop at n = 1: constant 1.
    let two = NormalizedProblem::new(&[(-2.0, -1.0), (1.0, 2.0)], 0.0)?;
    rows.push(row("degree_drop", &two, 1, opts, |_| 1.0, 0)?);

    // Symmetric two intervals [−b,−a] ∪ [a,b]: C_k(q(x))/C_k(q(0)) at n = 2k, 2k+1.
    let (a, b) = (1.0, 2.0);
    let q = |x: f64| (2.0 * (x * x - a * a) - (b * b - a * a)) / (b * b - a * a);
    for k in 1..=6 {
        for n in [2 * k, 2 * k + 1] {
            rows.push(row("symmetric_two_interval", &two, n, opts, |x| c(k, q(x)) / c(k, q(0.0)), 2 * k)?);
        }
    }

    // Reflection-symmetric four bands: Chebyshev polynomial of even degree.
    let sym = NormalizedProblem::new(&[(-2.0, -1.4), (-0.9, -0.3), (0.3, 0.9), (1.4, 2.0)], 0.0)?;
    for n in 2..=9 {
        let m = n - n % 2;
        let t = chebyshev(&sym.set, m, opts)?;
        let t0 = t.eval(0.0);
        rows.push(row("reflection_symmetric", &sym, n, opts, |x| t.eval(x) / t0, m)?);
    }

    // Period-3 set with x0 in a bounded gap: C_j(Υ)/C_j(Υ(x0)) at m = 3j, 3j+1.
    let (kappa, bands) = period_three();
    let ups = |x: f64| kappa * c(3, x);
    let per = NormalizedProblem::new(&bands, 0.5)?;
    for j in 1..=3 {
        for m in [3 * j, 3 * j + 1] {
            rows.push(row("period_three", &per, m, opts, |x| c(j, ups(x)) / c(j, ups(0.5)), 3 * j)?);
        }
    }

    // The same set with its top band cut short, above and below the zero of Υ
    // in that band: Υ/Υ(x0) at n = 3.
    let top_index = (0..bands.len()).max_by(|&i, &j| bands[i].1.total_cmp(&bands[j].1)).expect("bands");
    let top = bands[top_index];
    let zero = (PI / 6.0).cos();
    for (name, cut) in [
        ("period_three_cut_above_zero", 0.5 * (zero + top.1)),
        ("period_three_cut_below_zero", 0.5 * (top.0 + zero)),
    ] {
        let mut shrunk = bands.clone();
        shrunk[top_index].1 = cut;
        let p = NormalizedProblem::new(&shrunk, 0.5)?;
        rows.push(row(name, &p, 3, opts, |x| ups(x) / ups(0.5), 3)?);
    }

    let all_pass = rows.iter().all(|r| r.pass);
    Ok(ExamplesReport {
        tolerance: EXAMPLE_TOL,
        rows,
        all_pass,
    })
}

/// The three-band set used by [`run_examples`].
pub fn period_three_set() -> Result<RealSet> {
    RealSet::new(&period_three().1)
}
