//! Exchange algorithm for residual polynomials and Chebyshev polynomials.
//!
//! With `q(x) = p(x)·sgn(x − x0)`, the sign pattern of an x0-alternating set
//! turns into plain alternation of `q`, so one exchange engine serves both
//! the residual problem and the monic Chebyshev problem.

use serde_json::json;

use crate::error::{Error, Result};
use crate::poly::{Interpolant, Polynomial};
use crate::realset::{GapIndex, Interval, NormalizedProblem, RealSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative levelling tolerance `(max|p| − h)/max|p|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Self::default()
        }
    }
}

/// Below this the exchange is at its rounding floor: a stalled iteration
/// whose defect is smaller is accepted.
const STALL_ACCEPT: f64 = 1e-10;

/// Leading-coefficient cancellation below which a degree drop is suspected.
const DEGENERACY_SUSPECT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    points: Vec<f64>,
    k: usize,
}

impl ReferenceSet {
    /// `k` counts the points left of `x0`.
    pub fn new(points: Vec<f64>, x0: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("reference set is empty"));
        }
        if points.iter().any(|x| !x.is_finite() || *x == x0) {
            return Err(Error::invalid("reference points must be finite and differ from x0"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("reference points must be strictly increasing"));
        }
        let k = points.partition_point(|&x| x < x0);
        Ok(ReferenceSet { points, k })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `σ_j = (−1)^{k+1−j}·sgn(x_j − x0)`, for `j = 1..=n+1`.
    pub fn residual_signs(&self) -> Vec<f64> {
        (1..=self.points.len())
            .map(|j| {
                let parity = if (self.k + 1 + j).is_multiple_of(2) { 1.0 } else { -1.0 };
                let side = if j > self.k { 1.0 } else { -1.0 };
                parity * side
            })
            .collect()
    }
}

fn monic_signs(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|j| if (n - j).is_multiple_of(2) { 1.0 } else { -1.0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Normalization {
    /// `p(x0) = 1`.
    At(f64),
    /// Leading coefficient 1.
    Monic,
}

impl Normalization {
    fn q(&self, x: f64, p: f64) -> f64 {
        match *self {
            Normalization::At(x0) if x < x0 => -p,
            _ => p,
        }
    }
}

fn scale_for(set: &RealSet) -> (f64, f64) {
    let hull = set.hull();
    (hull.mid(), 0.25 * hull.len())
}

/// The polynomial through the reference levelled at `±h`.
fn levelled_fit(
    points: &[f64],
    norm: Normalization,
    center: f64,
    scale: f64,
) -> Result<(Interpolant, f64)> {
    let signs = match norm {
        Normalization::At(x0) => ReferenceSet::new(points.to_vec(), x0)?.residual_signs(),
        Normalization::Monic => monic_signs(points.len()),
    };
    let base = Interpolant::new(points, signs.clone(), center, scale)?;
    let denom = match norm {
        Normalization::At(x0) => base
            .lagrange_at(x0)
            .iter()
            .zip(&signs)
            .map(|(l, s)| l * s)
            .sum::<f64>(),
        Normalization::Monic => base.leading_coefficient(),
    };
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::Numerical {
            message: "degenerate reference: levelled system is singular".into(),
            diagnostic: Some(json!({ "reference": points, "denominator": denom })),
        });
    }
    let h = 1.0 / denom;
    Ok((base.scaled(h), h))
}

/// Solves the levelled interpolation problem on `reference`: the polynomial
/// of degree `≤ n` with `p(x_j) = σ_j·h` and `p(x0) = 1`, returned in the
/// Chebyshev basis of `hull` together with `h`.
pub fn reference_solve(reference: &ReferenceSet, x0: f64, hull: Interval) -> Result<(Polynomial, f64)> {
    let center = hull.mid();
    let scale = 0.25 * hull.len().max(f64::MIN_POSITIVE);
    let (p, h) = levelled_fit(reference.points(), Normalization::At(x0), center, scale)?;
    Ok((p.to_polynomial(hull.lo, hull.hi), h))
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    x: f64,
    q: f64,
}

/// Local extrema of `|p|` on the set: band endpoints and interior critical
/// points. Returns the candidates in increasing order and `max |p|`.
fn extrema(set: &RealSet, p: &Interpolant, norm: Normalization) -> Result<(Vec<Candidate>, f64)> {
    let deg = p.len() - 1;
    let mut out = Vec::new();
    let mut max_abs = 0.0f64;
    for band in set.intervals() {
        let mut xs = vec![band.lo];
        if deg >= 2 {
            let local = Polynomial::interpolate(|x| p.eval(x), deg, band.lo, band.hi);
            let dp = local.derivative();
            if dp.degree() >= 1 {
                for r in dp.real_roots_with_multiplicity(*band)? {
                    if band.lo < r.x && r.x < band.hi {
                        xs.push(r.x);
                    }
                }
            }
        }
        xs.push(band.hi);
        for x in xs {
            let v = p.eval(x);
            max_abs = max_abs.max(v.abs());
            out.push(Candidate { x, q: norm.q(x, v) });
        }
    }
    Ok((out, max_abs))
}

/// Same-sign runs of `q` merged to their largest member (leftmost on ties),
/// ignoring candidates below `floor`.
fn alternating_runs(cands: &[Candidate], floor: f64) -> Vec<Candidate> {
    let mut runs: Vec<Candidate> = Vec::new();
    for c in cands.iter().filter(|c| c.q.abs() >= floor && c.q != 0.0) {
        match runs.last_mut() {
            Some(last) if last.q.signum() == c.q.signum() => {
                if c.q.abs() > last.q.abs() {
                    *last = *c;
                }
            }
            _ => runs.push(*c),
        }
    }
    runs
}

fn select(cands: &[Candidate], h: f64, n_points: usize) -> Result<Vec<f64>> {
    let mut runs = alternating_runs(cands, h * (1.0 - 1e-12));
    if runs.len() < n_points {
        return Err(Error::Numerical {
            message: format!(
                "only {} sign-consistent extrema found, {} needed",
                runs.len(),
                n_points
            ),
            diagnostic: Some(json!({ "h": h })),
        });
    }
    let mut lo = 0;
    let mut hi = runs.len();
    while hi - lo > n_points {
        if runs[lo].q.abs() < runs[hi - 1].q.abs() {
            lo += 1;
        } else {
            hi -= 1;
        }
    }
    runs.truncate(hi);
    Ok(runs.drain(lo..).map(|c| c.x).collect())
}

/// One exchange step: the new reference built from the extrema of `p`.
pub fn exchange(set: &RealSet, p: &Interpolant, reference: &ReferenceSet, x0: f64) -> Result<ReferenceSet> {
    let h = reference
        .points()
        .iter()
        .map(|&x| p.eval(x).abs())
        .fold(f64::INFINITY, f64::min);
    let (cands, _) = extrema(set, p, Normalization::At(x0))?;
    ReferenceSet::new(select(&cands, h, reference.len())?, x0)
}

/// Points allotted to bands in proportion to their equilibrium mass and
/// placed at equal-mass quantiles inside each band. Falls back to lengths
/// and cosine spacing if the equilibrium measure is unavailable.
fn initial_reference(set: &RealSet, n_points: usize) -> Vec<f64> {
    let m = set.components();
    let green = if m > 1 { crate::potential::equilibrium(set).ok() } else { None };
    let weights: Vec<f64> = match &green {
        Some(gd) => gd.band_masses().to_vec(),
        None => set.intervals().iter().map(|b| b.len()).collect(),
    };
    let total: f64 = weights.iter().sum();
    let shares: Vec<f64> = weights.iter().map(|w| n_points as f64 * w / total).collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        let (fi, fj) = (shares[i] - shares[i].floor(), shares[j] - shares[j].floor());
        fj.total_cmp(&fi).then(i.cmp(&j))
    });
    let mut missing = n_points - counts.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        counts[i] += 1;
        missing -= 1;
    }
    let mut pts = Vec::with_capacity(n_points);
    for (j, (band, &c)) in set.intervals().iter().zip(&counts).enumerate() {
        match (&green, c) {
            (_, 0) => {}
            (_, 1) => pts.push(band.mid()),
            (Some(gd), _) => pts.extend(gd.band_quantiles(j, c)),
            (None, _) => {
                for i in 0..c {
                    let t = std::f64::consts::PI * i as f64 / (c - 1) as f64;
                    pts.push(band.lo + band.len() * 0.5 * (1.0 - t.cos()));
                }
            }
        }
    }
    pts
}

struct ExchangeResult {
    interp: Interpolant,
    points: Vec<f64>,
    norm: f64,
    iterations: usize,
    defect: f64,
}

fn run_exchange(set: &RealSet, n_points: usize, norm: Normalization, opts: &SolveOptions) -> Result<ExchangeResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("levelling tolerance must be positive"));
    }
    let (center, scale) = scale_for(set);
    let mut points = initial_reference(set, n_points);
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    let mut last_defect = f64::INFINITY;
    for it in 1..=opts.max_iter.max(1) {
        let (p, h) = levelled_fit(&points, norm, center, scale)?;
        let (cands, max_abs) = extrema(set, &p, norm)?;
        let defect = ((max_abs - h) / max_abs).max(0.0);
        log::trace!("exchange iteration {it}: h = {h:e}, defect = {defect:e}");
        if best.as_ref().is_none_or(|b| defect < b.0) {
            best = Some((defect, h, points.clone()));
        }
        if defect <= opts.tol {
            return Ok(ExchangeResult {
                interp: p,
                points,
                norm: max_abs,
                iterations: it,
                defect,
            });
        }
        let next = select(&cands, h, n_points)?;
        let moved = next
            .iter()
            .zip(&points)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let stalled = moved <= 1e-14 * set.diameter() || (defect >= last_defect && defect <= STALL_ACCEPT);
        if stalled {
            if defect <= STALL_ACCEPT {
                return Ok(ExchangeResult {
                    interp: p,
                    points,
                    norm: max_abs,
                    iterations: it,
                    defect,
                });
            }
            break;
        }
        last_defect = defect;
        points = next;
    }
    let (defect, h, pts) = best.expect("at least one iteration");
    Err(Error::Numerical {
        message: format!("exchange did not converge (best levelling defect {defect:e})"),
        diagnostic: Some(json!({
            "best_defect": defect,
            "best_h": h,
            "best_reference": pts,
            "max_iter": opts.max_iter,
        })),
    })
}

/// Monic polynomial of least sup norm on a set.
#[derive(Debug, Clone)]
pub struct ChebyshevSolution {
    pub n: usize,
    /// Monic, in the Chebyshev basis of the hull.
    pub poly: Polynomial,
    interp: Interpolant,
    /// The Chebyshev norm `t_n`.
    pub t: f64,
    /// Alternation points, increasing; `T(x_{n+1}) = +t`.
    pub reference: Vec<f64>,
    pub iterations: usize,
    pub levelling_defect: f64,
}

impl ChebyshevSolution {
    pub fn eval(&self, x: f64) -> f64 {
        self.interp.eval(x)
    }

    pub fn interpolant(&self) -> &Interpolant {
        &self.interp
    }
}

/// The Chebyshev polynomial `T_n` of `set`. `n = 0` gives `T ≡ 1`.
pub fn chebyshev(set: &RealSet, n: usize, opts: &SolveOptions) -> Result<ChebyshevSolution> {
    let hull = set.hull();
    let (center, scale) = scale_for(set);
    if n == 0 {
        let interp = Interpolant::new(&[set.upper()], vec![1.0], center, scale)?;
        return Ok(ChebyshevSolution {
            n,
            poly: Polynomial::constant(1.0, hull.lo, hull.hi),
            interp,
            t: 1.0,
            reference: vec![set.upper()],
            iterations: 0,
            levelling_defect: 0.0,
        });
    }
    let ex = run_exchange(set, n + 1, Normalization::Monic, opts)?;
    Ok(ChebyshevSolution {
        n,
        poly: ex.interp.to_polynomial(hull.lo, hull.hi),
        interp: ex.interp,
        t: ex.norm,
        reference: ex.points,
        iterations: ex.iterations,
        levelling_defect: ex.defect,
    })
}

/// How a residual solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// `n = 0`: the constant 1.
    Constant,
    /// Exchange with the x0 split.
    Exchange,
    /// `x0` outside the hull: rescaled Chebyshev polynomial.
    RescaledChebyshev,
    /// Degree dropped to `n − 1`: rescaled `T_{n−1}`.
    DegenerateChebyshev,
}

#[derive(Debug, Clone)]
pub struct ResidualSolution {
    pub problem: NormalizedProblem,
    pub n: usize,
    /// Effective degree, `n` or `n − 1`.
    pub d_n: usize,
    /// `R` in the Chebyshev basis of the hull, with `d_n + 1` coefficients.
    pub poly: Polynomial,
    interp: Interpolant,
    /// The residual norm.
    pub r: f64,
    pub reference: ReferenceSet,
    /// Sign of `R` at the last reference point.
    pub sign_at_top: f64,
    pub iterations: usize,
    pub levelling_defect: f64,
    pub method: Method,
}

impl ResidualSolution {
    pub fn eval(&self, x: f64) -> f64 {
        self.interp.eval(x)
    }

    pub fn eval_complex(&self, z: crate::Complex64) -> crate::Complex64 {
        self.interp.eval_complex(z)
    }

    /// `(sign R(x), ln|R(x)|)`, safe far from the set.
    pub fn eval_log(&self, x: f64) -> (f64, f64) {
        self.interp.eval_log(x)
    }

    pub fn interpolant(&self) -> &Interpolant {
        &self.interp
    }

    pub fn x0(&self) -> f64 {
        self.problem.x0
    }

    pub fn set(&self) -> &RealSet {
        &self.problem.set
    }

    fn build(
        problem: &NormalizedProblem,
        n: usize,
        interp: Interpolant,
        r: f64,
        points: Vec<f64>,
        iterations: usize,
        defect: f64,
        method: Method,
    ) -> Result<Self> {
        let hull = problem.set.hull();
        let reference = ReferenceSet::new(points, problem.x0)?;
        let top = *reference.points().last().expect("nonempty reference");
        let d_n = interp.len() - 1;
        Ok(ResidualSolution {
            problem: problem.clone(),
            n,
            d_n,
            poly: interp.to_polynomial(hull.lo, hull.hi),
            sign_at_top: interp.eval(top).signum(),
            interp,
            r,
            reference,
            iterations,
            levelling_defect: defect,
            method,
        })
    }
}

fn rescaled_chebyshev(
    problem: &NormalizedProblem,
    n: usize,
    cheb: ChebyshevSolution,
    method: Method,
) -> Result<ResidualSolution> {
    let at_x0 = cheb.interp.eval(problem.x0);
    if at_x0 == 0.0 || !at_x0.is_finite() {
        return Err(Error::numerical("Chebyshev polynomial vanishes at x0"));
    }
    let interp = cheb.interp.scaled(1.0 / at_x0);
    ResidualSolution::build(
        problem,
        n,
        interp,
        cheb.t / at_x0.abs(),
        cheb.reference,
        cheb.iterations,
        cheb.levelling_defect,
        method,
    )
}

/// `R_{x0,n}`: degree `≤ n`, `R(x0) = 1`, least sup norm on the set.
pub fn solve_residual(problem: &NormalizedProblem, n: usize, opts: &SolveOptions) -> Result<ResidualSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("levelling tolerance must be positive"));
    }
    let set = &problem.set;
    let x0 = problem.x0;
    let (center, scale) = scale_for(set);
    if n == 0 {
        let top = set.upper();
        let interp = Interpolant::new(&[top], vec![1.0], center, scale)?;
        return ResidualSolution::build(problem, 0, interp, 1.0, vec![set.lower()], 0, 0.0, Method::Constant);
    }
    if problem.gap == GapIndex::Unbounded {
        let cheb = chebyshev(set, n, opts)?;
        return rescaled_chebyshev(problem, n, cheb, Method::RescaledChebyshev);
    }
    let ex = run_exchange(set, n + 1, Normalization::At(x0), opts)?;
    if ex.interp.leading_cancellation() < DEGENERACY_SUSPECT {
        if let Some(sol) = degenerate_candidate(problem, n, ex.norm, opts)? {
            return Ok(sol);
        }
    }
    ResidualSolution::build(problem, n, ex.interp, ex.norm, ex.points, ex.iterations, ex.defect, Method::Exchange)
}

/// Tries `T_{n−1}/T_{n−1}(x0)`; accepted when it has an x0-alternating set
/// of `n + 1` points and matches the norm found by the exchange.
fn degenerate_candidate(
    problem: &NormalizedProblem,
    n: usize,
    r_exchange: f64,
    opts: &SolveOptions,
) -> Result<Option<ResidualSolution>> {
    let set = &problem.set;
    let x0 = problem.x0;
    let cheb = chebyshev(set, n - 1, opts)?;
    let at_x0 = cheb.interp.eval(x0);
    let cand = cheb.interp.scaled(1.0 / at_x0);
    let r_c = cheb.t / at_x0.abs();
    if (r_c - r_exchange).abs() > 1e-8 * r_exchange {
        return Ok(None);
    }
    let (cands, max_abs) = extrema(set, &cand, Normalization::At(x0))?;
    let r_c = r_c.max(max_abs);
    let runs = alternating_runs(&cands, r_c * (1.0 - 1e-9));
    if runs.len() < n + 1 {
        return Ok(None);
    }
    let points = select(&cands, r_c * (1.0 - 1e-9), n + 1)?;
    let sol = ResidualSolution::build(
        problem,
        n,
        cand,
        r_c,
        points,
        cheb.iterations,
        cheb.levelling_defect,
        Method::DegenerateChebyshev,
    )?;
    Ok(Some(sol))
}

/// The dual maximizer `R/r` and its value `1/r` at `x0`.
pub fn dual_residual(sol: &ResidualSolution) -> (Polynomial, f64) {
    (sol.poly.scaled(1.0 / sol.r), 1.0 / sol.r)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DegreeReport {
    pub d_n: usize,
    /// Present when `d_n = n − 1`: whether `R = T_{n−1}/T_{n−1}(x0)`.
    pub matched_chebyshev: Option<bool>,
}

pub fn degree_report(sol: &ResidualSolution, opts: &SolveOptions) -> Result<DegreeReport> {
    if sol.d_n + 1 < sol.n || sol.d_n > sol.n {
        return Err(Error::invariant(format!(
            "effective degree {} outside {{n−1, n}} for n = {}",
            sol.d_n, sol.n
        )));
    }
    if sol.n >= 1 && sol.poly.degree() + 1 < sol.n {
        return Err(Error::invariant(format!(
            "residual polynomial has degree {} < n − 1 = {}",
            sol.poly.degree(),
            sol.n - 1
        )));
    }
    let matched = if sol.n >= 1 && sol.d_n == sol.n - 1 {
        let cheb = chebyshev(sol.set(), sol.n - 1, opts)?;
        let c0 = cheb.eval(sol.x0());
        let dev = sample_set(sol.set(), 200)
            .into_iter()
            .map(|x| (sol.eval(x) - cheb.eval(x) / c0).abs())
            .fold(0.0f64, f64::max);
        Some(dev <= 1e-9)
    } else {
        None
    };
    Ok(DegreeReport {
        d_n: sol.d_n,
        matched_chebyshev: matched,
    })
}

/// Cosine-spaced sample of every band, endpoints included.
pub fn sample_set(set: &RealSet, per_band: usize) -> Vec<f64> {
    let per_band = per_band.max(2);
    set.intervals()
        .iter()
        .flat_map(|b| {
            (0..per_band).map(move |j| {
                let t = std::f64::consts::PI * j as f64 / (per_band - 1) as f64;
                b.lo + b.len() * 0.5 * (1.0 - t.cos())
            })
        })
        .collect()
}

/// Checks the alternation certificate: exact sign pattern and levelled
/// magnitudes within `tol·r` (plus rounding) of `r`, `R(x0) = 1`.
pub fn certify(sol: &ResidualSolution, tol: f64) -> Result<()> {
    let tol = tol.max(sol.levelling_defect);
    let signs = sol.reference.residual_signs();
    for (x, s) in sol.reference.points().iter().zip(&signs) {
        let v = sol.eval(*x);
        if v.signum() != *s {
            return Err(Error::invariant(format!("sign pattern broken at x = {x}")));
        }
        if (v.abs() - sol.r).abs() > (tol + 1e-12) * sol.r {
            return Err(Error::invariant(format!(
                "reference value |R({x})| = {} not levelled at r = {}",
                v.abs(),
                sol.r
            )));
        }
    }
    if sol.reference.len() != sol.n + 1 {
        return Err(Error::invariant("reference does not have n + 1 points"));
    }
    let at_x0 = sol.poly.eval(sol.x0());
    if (at_x0 - 1.0).abs() > 1e-12 * (1.0 + sol.poly.coeffs().iter().map(|c| c.abs()).sum::<f64>()) {
        return Err(Error::invariant(format!("R(x0) = {at_x0} is not 1")));
    }
    Ok(())
}

/// Endpoint facts at the optimum: whether the gap endpoints around `x0`
/// belong to the reference, and whether a hull endpoint does.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AlternationDiagnostics {
    pub gap_endpoints_in_reference: Option<bool>,
    pub hull_endpoint_in_reference: bool,
}

pub fn alternation_diagnostics(sol: &ResidualSolution) -> AlternationDiagnostics {
    let pts = sol.reference.points();
    let tol = 1e-12 * sol.set().diameter();
    let has = |x: f64| pts.iter().any(|p| (p - x).abs() <= tol);
    let k = sol.reference.k();
    let n = sol.n;
    let gap = match sol.problem.gap() {
        crate::realset::Gap::Bounded { lo, hi, .. } if k > 1 && k < n => Some(has(lo) && has(hi)),
        _ => None,
    };
    AlternationDiagnostics {
        gap_endpoints_in_reference: gap,
        hull_endpoint_in_reference: has(sol.set().lower()) || has(sol.set().upper()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::cheb_classical;
    use crate::realset::locate;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn two_interval() -> NormalizedProblem {
        NormalizedProblem::new(&[(-2.0, -1.0), (1.0, 2.0)], 0.0).unwrap()
    }

    /// The spec'd linear system in the Chebyshev basis, solved by LU.
    fn reference_solve_lu(reference: &ReferenceSet, x0: f64, hull: Interval) -> (Vec<f64>, f64) {
        let pts = reference.points();
        let n = pts.len() - 1;
        let sig = reference.residual_signs();
        let mut a = DMatrix::<f64>::zeros(n + 2, n + 2);
        let mut b = DVector::<f64>::zeros(n + 2);
        for (j, &x) in pts.iter().enumerate() {
            for i in 0..=n {
                a[(j, i)] = Polynomial::basis(i, hull.lo, hull.hi).eval(x);
            }
            a[(j, n + 1)] = -sig[j];
        }
        for i in 0..=n {
            a[(n + 1, i)] = Polynomial::basis(i, hull.lo, hull.hi).eval(x0);
        }
        b[n + 1] = 1.0;
        let sol = a.lu().solve(&b).unwrap();
        (sol.iter().take(n + 1).copied().collect(), sol[n + 1])
    }

    #[test]
    fn reference_solve_examples() {
        let r = ReferenceSet::new(vec![0.0, 1.0], 2.0).unwrap();
        assert_eq!(r.k(), 2);
        let (p, h) = reference_solve(&r, 2.0, Interval::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(h, 1.0 / 3.0, max_relative = 1e-14);
        for x in [0.0, 0.3, 1.0, 2.0] {
            assert_relative_eq!(p.eval(x), (2.0 * x - 1.0) / 3.0, epsilon = 1e-14);
        }
        let r = ReferenceSet::new(vec![-1.0, 0.0, 1.0], 2.0).unwrap();
        let (p, h) = reference_solve(&r, 2.0, Interval::new(-1.0, 1.0)).unwrap();
        assert_relative_eq!(h, 1.0 / 7.0, max_relative = 1e-14);
        assert_relative_eq!(p.coeffs()[2], 1.0 / 7.0, max_relative = 1e-13);
        let r = ReferenceSet::new(vec![0.4], 2.0).unwrap();
        let (p, h) = reference_solve(&r, 2.0, Interval::new(0.0, 1.0)).unwrap();
        assert_eq!(h, 1.0);
        assert_relative_eq!(p.eval(0.77), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn closed_form_matches_linear_system() {
        let hull = Interval::new(-2.0, 3.0);
        let pts = vec![-2.0, -1.5, -0.3, 0.9, 1.1, 2.2, 3.0];
        for x0 in [0.5, 1.0, 4.0, -3.0] {
            let r = ReferenceSet::new(pts.clone(), x0).unwrap();
            let (p, h) = reference_solve(&r, x0, hull).unwrap();
            let (c, h_lu) = reference_solve_lu(&r, x0, hull);
            assert_relative_eq!(h, h_lu.abs(), max_relative = 1e-10);
            for (a, b) in p.coeffs().iter().zip(&c) {
                assert!((a - b * h_lu.signum()).abs() < 1e-9 * (1.0 + b.abs()), "x0={x0}");
            }
        }
    }

    #[test]
    fn residual_signs_follow_split() {
        let r = ReferenceSet::new(vec![-2.0, -1.0, 1.0, 2.0], 0.0).unwrap();
        assert_eq!(r.k(), 2);
        assert_eq!(r.residual_signs(), vec![-1.0, 1.0, 1.0, -1.0]);
        let r = ReferenceSet::new(vec![-1.0, 0.0, 1.0], 2.0).unwrap();
        assert_eq!(r.residual_signs(), vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn interval_closed_form() {
        let prob = NormalizedProblem::new(&[(-1.0, 1.0)], 2.0).unwrap();
        for n in 1..=12usize {
            let sol = solve_residual(&prob, n, &SolveOptions::default()).unwrap();
            let expect = 1.0 / cheb_classical(n as i64, 2.0).unwrap();
            assert_relative_eq!(sol.r, expect, max_relative = 1e-12);
            assert_eq!(sol.d_n, n);
            for (k, c) in sol.poly.coeffs().iter().enumerate() {
                let e = if k == n { expect } else { 0.0 };
                assert!((c - e).abs() < 1e-12, "n={n} k={k} c={c}");
            }
            certify(&sol, 1e-12).unwrap();
        }
    }

    #[test]
    fn exchange_on_interval_from_bad_start() {
        let set = RealSet::new(&[(-1.0, 1.0)]).unwrap();
        let r = ReferenceSet::new(vec![-1.0, -0.5, 0.5], 2.0).unwrap();
        let (p, _) = levelled_fit(r.points(), Normalization::At(2.0), 0.0, 0.5).unwrap();
        let mut cur = exchange(&set, &p, &r, 2.0).unwrap();
        for _ in 0..10 {
            let (p, _) = levelled_fit(cur.points(), Normalization::At(2.0), 0.0, 0.5).unwrap();
            let next = exchange(&set, &p, &cur, 2.0).unwrap();
            if next == cur {
                break;
            }
            cur = next;
        }
        for (a, b) in cur.points().iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_interval_values() {
        let prob = two_interval();
        let opts = SolveOptions::default();
        let s1 = solve_residual(&prob, 1, &opts).unwrap();
        assert_eq!(s1.d_n, 0);
        assert_eq!(s1.r, 1.0);
        assert!((s1.eval(1.7) - 1.0).abs() < 1e-15);
        let s2 = solve_residual(&prob, 2, &opts).unwrap();
        assert_relative_eq!(s2.r, 0.6, max_relative = 1e-12);
        assert_eq!(s2.d_n, 2);
        for x in [-1.5, 0.0, 0.7, 3.0] {
            let q = (2.0 * x * x - 5.0) / 3.0;
            assert_relative_eq!(s2.eval(x), q / (-5.0 / 3.0), epsilon = 1e-12);
        }
        let s3 = solve_residual(&prob, 3, &opts).unwrap();
        assert_eq!(s3.d_n, 2);
        assert_eq!(s3.method, Method::DegenerateChebyshev);
        assert_relative_eq!(s3.r, 0.6, max_relative = 1e-12);
        let rep = degree_report(&s3, &opts).unwrap();
        assert_eq!(rep.matched_chebyshev, Some(true));
        certify(&s3, 1e-12).unwrap();
    }

    #[test]
    fn dual_values() {
        let p = NormalizedProblem::new(&[(-1.0, 1.0)], 2.0).unwrap();
        let s = solve_residual(&p, 1, &SolveOptions::default()).unwrap();
        assert_relative_eq!(dual_residual(&s).1, 2.0, max_relative = 1e-13);
        let s = solve_residual(&two_interval(), 2, &SolveOptions::default()).unwrap();
        let (d, v) = dual_residual(&s);
        assert_relative_eq!(v, 5.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(d.eval(0.0), 5.0 / 3.0, max_relative = 1e-12);
        let s0 = solve_residual(&two_interval(), 1, &SolveOptions::default()).unwrap();
        assert_eq!(dual_residual(&s0).1, 1.0);
    }

    #[test]
    fn chebyshev_examples() {
        let opts = SolveOptions::default();
        let i = RealSet::new(&[(-1.0, 1.0)]).unwrap();
        let t3 = chebyshev(&i, 3, &opts).unwrap();
        assert_relative_eq!(t3.t, 0.25, max_relative = 1e-13);
        assert_relative_eq!(t3.poly.coeffs()[3], 0.25, max_relative = 1e-12);
        let u = RealSet::new(&[(0.0, 1.0)]).unwrap();
        let t1 = chebyshev(&u, 1, &opts).unwrap();
        assert_relative_eq!(t1.t, 0.5, max_relative = 1e-13);
        assert_relative_eq!(t1.eval(0.8), 0.3, max_relative = 1e-13);
        let two = RealSet::new(&[(-2.0, -1.0), (1.0, 2.0)]).unwrap();
        let t2 = chebyshev(&two, 2, &opts).unwrap();
        assert_relative_eq!(t2.t, 1.5, max_relative = 1e-13);
        for x in [-1.3, 0.0, 1.9] {
            assert_relative_eq!(t2.eval(x), x * x - 2.5, epsilon = 1e-12);
        }
        assert!(t2.poly.leading_coefficient() - 1.0 < 1e-12);
    }

    #[test]
    fn degree_report_examples() {
        let opts = SolveOptions::default();
        let p = NormalizedProblem::new(&[(-1.0, 1.0)], 2.0).unwrap();
        let s = solve_residual(&p, 5, &opts).unwrap();
        assert_eq!(degree_report(&s, &opts).unwrap(), DegreeReport { d_n: 5, matched_chebyshev: None });
        let s0 = solve_residual(&p, 0, &opts).unwrap();
        assert_eq!(degree_report(&s0, &opts).unwrap().d_n, 0);
    }

    #[test]
    fn x0_below_set_uses_chebyshev() {
        let p = NormalizedProblem::new(&[(-1.0, 1.0)], -2.0).unwrap();
        let s = solve_residual(&p, 4, &SolveOptions::default()).unwrap();
        assert_relative_eq!(s.r, 1.0 / 97.0, max_relative = 1e-12);
        assert_eq!(s.reference.k(), 0);
        certify(&s, 1e-12).unwrap();
    }

    #[test]
    fn gap_endpoints_pinned_at_optimum() {
        let p = NormalizedProblem::new(&[(-1.0, 0.2), (0.6, 1.0)], 0.4).unwrap();
        for n in 2..=12 {
            let s = solve_residual(&p, n, &SolveOptions::default()).unwrap();
            certify(&s, 1e-12).unwrap();
            let d = alternation_diagnostics(&s);
            if let Some(pinned) = d.gap_endpoints_in_reference {
                assert!(pinned, "n = {n}");
            }
            assert!(d.hull_endpoint_in_reference, "n = {n}");
        }
    }

    #[test]
    fn loose_tolerance_still_certifies() {
        let p = locate(&RealSet::new(&[(0.0, 1.0), (1.5, 3.0)]).unwrap(), 1.2).unwrap();
        let s = solve_residual(&p, 6, &SolveOptions::with_tol(1e-3)).unwrap();
        assert!(s.levelling_defect <= 1e-3);
        certify(&s, 1e-3).unwrap();
    }

    #[test]
    fn invalid_tolerance() {
        let p = two_interval();
        assert!(solve_residual(&p, 2, &SolveOptions::with_tol(0.0)).is_err());
    }
}
