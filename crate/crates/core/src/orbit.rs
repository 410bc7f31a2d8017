//! Character orbits through the harmonic-measure vector, Widom-factor sweeps
//! and magnitude-level asymptotics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bands::{band_set, green_period, widom_factor, WidomRecord};
use crate::error::{Error, Result};
use crate::output::csv_cell;
use crate::potential::{self, GreenData, PoleData};
use crate::realset::NormalizedProblem;
use crate::solver::{solve_residual, ResidualSolution, SolveOptions};

/// Harmonic measures of the first `m − 1` components; empty when `m = 1`.
pub fn character_vector(gd: &GreenData) -> Vec<f64> {
    let masses = gd.band_masses();
    masses[..masses.len().saturating_sub(1)].to_vec()
}

/// `|x − round(x)|`.
pub fn lattice_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// `max_i dist(n·ω_i, ℤ)`; zero for an empty vector.
pub fn orbit_distance(omega: &[f64], n: usize) -> f64 {
    omega
        .iter()
        .map(|w| lattice_distance(n as f64 * w))
        .fold(0.0, f64::max)
}

/// All `n ≤ n_max` whose orbit point is within `eps` of the identity.
pub fn near_returns(omega: &[f64], n_max: usize, eps: f64) -> Result<Vec<usize>> {
    if n_max < 1 || !(eps > 0.0 && eps < 0.5) {
        return Err(Error::invalid("near returns need n_max ≥ 1 and eps in (0, 1/2)"));
    }
    Ok((1..=n_max).filter(|&n| orbit_distance(omega, n) <= eps).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitData {
    pub omega: Vec<f64>,
    /// `(n, distance to the lattice)` for each near return.
    pub returns: Vec<(usize, f64)>,
}

pub fn orbit_data(gd: &GreenData, n_max: usize, eps: f64) -> Result<OrbitData> {
    let omega = character_vector(gd);
    let returns = near_returns(&omega, n_max, eps)?
        .into_iter()
        .map(|n| (n, orbit_distance(&omega, n)))
        .collect();
    Ok(OrbitData { omega, returns })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagnitudeRow {
    pub z: [f64; 2],
    /// `|M_n(z)| = exp(−n·g(z) + d_n·g_n(z))`.
    pub m_abs: f64,
    /// `exp(−Σ_k g(z, x_k))` over the gap zeros `x_k`.
    pub predicted: f64,
    pub defect: f64,
    /// For the symmetric two-interval set with `x0` at the centre and even
    /// `n`: `|e^{n g(x0)}·e^{−n g(z)}·|R(z)| − 1|`.
    pub symmetric_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagnitudeReport {
    pub n: usize,
    pub d_n: usize,
    pub rows: Vec<MagnitudeRow>,
    pub max_defect: f64,
    /// `|M_n| ≤ 1 + 1e−9` at every sample.
    pub bounded_by_one: bool,
}

fn is_symmetric_pair(prob: &NormalizedProblem) -> bool {
    let iv = prob.set.intervals();
    if iv.len() != 2 {
        return false;
    }
    let c = prob.x0;
    let tol = 1e-12 * prob.set.diameter();
    (iv[0].lo + iv[1].hi - 2.0 * c).abs() <= tol && (iv[0].hi + iv[1].lo - 2.0 * c).abs() <= tol
}

/// Like [`magnitude_asymptotic_check`] with the equilibrium data of the set
/// supplied by the caller.
pub fn magnitude_check_with(
    prob: &NormalizedProblem,
    green: &GreenData,
    sol: &ResidualSolution,
    pd: &PoleData,
    samples: &[Complex64],
) -> Result<MagnitudeReport> {
    let n = sol.n;
    let d = sol.d_n;
    let x0 = prob.x0;
    for z in samples {
        if z.im == 0.0 && (z.re == x0 || sol.eval(z.re).abs() <= sol.r) {
            return Err(Error::invalid(format!("sample {z} lies in the band set or at x0")));
        }
    }
    // Poles of the predicted Blaschke product: gap zeros, ∞ for a dropped degree.
    let bands = band_set(sol)?;
    let finite_zeros: Vec<f64> = bands.zeros.iter().copied().filter(|y| !prob.set.contains(*y)).collect();
    let zero_at_infinity = d < n;
    let poles: Vec<PoleData> = finite_zeros
        .iter()
        .map(|&y| PoleData::with_quadrature(&prob.set, y, *green.quadrature()))
        .collect::<Result<_>>()?;
    let symmetric = is_symmetric_pair(prob) && n.is_multiple_of(2);
    let g_x0 = pd.green_at_infinity()?;

    let mut rows = Vec::with_capacity(samples.len());
    for &z in samples {
        let g_z = green.green(z)?;
        let dg = if d == 0 { 0.0 } else { d as f64 * green_period(sol, z)? };
        let m_abs = (-(n as f64) * g_z + dg).exp();
        let mut log_pred = 0.0;
        for p in &poles {
            log_pred -= p.green(z)?;
        }
        if zero_at_infinity {
            log_pred -= g_z;
        }
        let predicted = log_pred.exp();
        let symmetric_defect = symmetric.then(|| {
            let ln_r = sol.eval_complex(z).norm().ln();
            ((n as f64 * (g_x0 - g_z) + ln_r).exp() - 1.0).abs()
        });
        rows.push(MagnitudeRow {
            z: [z.re, z.im],
            m_abs,
            predicted,
            defect: (m_abs - predicted).abs(),
            symmetric_defect,
        });
    }
    let max_defect = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
    let bounded_by_one = rows.iter().all(|r| r.m_abs <= 1.0 + 1e-9);
    Ok(MagnitudeReport {
        n,
        d_n: d,
        rows,
        max_defect,
        bounded_by_one,
    })
}

/// Compares `|M_n(z)|` with the magnitude of the Blaschke product built on
/// the current gap zeros.
pub fn magnitude_asymptotic_check(
    prob: &NormalizedProblem,
    sol: &ResidualSolution,
    pd: &PoleData,
    samples: &[Complex64],
) -> Result<MagnitudeReport> {
    let green = potential::equilibrium(&prob.set)?;
    magnitude_check_with(prob, &green, sol, pd, samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub solve: SolveOptions,
    /// Near-return radius.
    pub eps: f64,
    /// Bound on `min (W_n − 2)` over near returns.
    pub threshold: f64,
    /// Points where `|M_n|` is checked; empty to skip.
    pub samples: Vec<Complex64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solve: SolveOptions::default(),
            eps: 0.05,
            threshold: 0.1,
            samples: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub n: usize,
    pub w_n: Option<f64>,
    pub record: Option<WidomRecord>,
    pub error: Option<String>,
    pub near_return: bool,
    pub lattice_distance: f64,
    pub running_min: f64,
    pub running_max: f64,
    /// Per sample; `None` where the check could not be made.
    pub m_defects: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearReturnCheck {
    pub min_excess: f64,
    pub at_n: usize,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSummary {
    pub liminf_est: f64,
    pub limsup_est: f64,
    pub upper_bound: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub omega: Vec<f64>,
    pub entries: Vec<SweepEntry>,
    pub near_returns: Vec<usize>,
    pub summary: SweepSummary,
    pub near_return_check: Option<NearReturnCheck>,
    /// For a single interval: whether every `W_n` is `2 ± 1e−8`.
    pub constant_check: Option<bool>,
    pub failures: usize,
}

impl SweepResult {
    pub fn csv_header(&self, samples: usize) -> Vec<String> {
        let mut h = vec!["n".to_string(), "W_n".into(), "is_near_return".into()];
        h.extend((0..samples).map(|j| format!("M_defect_{j}")));
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|e| {
                let mut row = vec![e.n.to_string(), csv_cell(e.w_n), e.near_return.to_string()];
                row.extend(e.m_defects.iter().map(|d| csv_cell(*d)));
                row
            })
            .collect()
    }
}

/// `W_n` for `n = 1..=n_max`, solved in parallel; failures are recorded per
/// `n` and the sweep continues.
pub fn widom_sweep(prob: &NormalizedProblem, n_max: usize, opts: &SweepOptions) -> Result<SweepResult> {
    if n_max < 2 {
        return Err(Error::invalid("widom sweep needs n_max ≥ 2"));
    }
    let green = potential::equilibrium(&prob.set)?;
    let pd = PoleData::new(&prob.set, prob.x0)?;
    let omega = character_vector(&green);
    let returns = near_returns(&omega, n_max, opts.eps)?;

    let per_n: Vec<(Result<WidomRecord>, Vec<Option<f64>>)> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let sol = match solve_residual(prob, n, &opts.solve) {
                Ok(s) => s,
                Err(e) => return (Err(e), vec![None; opts.samples.len()]),
            };
            let rec = widom_factor(prob, &sol, &pd);
            let defects = if opts.samples.is_empty() {
                Vec::new()
            } else {
                match magnitude_check_with(prob, &green, &sol, &pd, &opts.samples) {
                    Ok(rep) => rep.rows.iter().map(|r| Some(r.defect)).collect(),
                    Err(_) => vec![None; opts.samples.len()],
                }
            };
            (rec, defects)
        })
        .collect();

    let mut entries = Vec::with_capacity(n_max);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut failures = 0;
    for (i, (rec, m_defects)) in per_n.into_iter().enumerate() {
        let n = i + 1;
        let (record, error) = match rec {
            Ok(r) => (Some(r), None),
            Err(e) => {
                log::warn!("widom sweep: n = {n} failed: {e}");
                failures += 1;
                (None, Some(e.to_string()))
            }
        };
        let w_n = record.as_ref().map(|r| r.w_n);
        if let Some(w) = w_n {
            lo = lo.min(w);
            hi = hi.max(w);
        }
        entries.push(SweepEntry {
            n,
            w_n,
            record,
            error,
            near_return: returns.binary_search(&n).is_ok(),
            lattice_distance: orbit_distance(&omega, n),
            running_min: lo,
            running_max: hi,
            m_defects,
        });
    }

    let near_return_check = entries
        .iter()
        .filter(|e| e.near_return)
        .filter_map(|e| e.w_n.map(|w| (e.n, w - 2.0)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(at_n, min_excess)| NearReturnCheck {
            min_excess,
            at_n,
            threshold: opts.threshold,
            passed: min_excess <= opts.threshold,
        });
    let constant_check = (prob.set.components() == 1).then(|| {
        entries
            .iter()
            .all(|e| e.w_n.is_some_and(|w| (w - 2.0).abs() <= 1e-8))
    });
    Ok(SweepResult {
        omega,
        entries,
        near_returns: returns,
        summary: SweepSummary {
            liminf_est: lo,
            limsup_est: hi,
            upper_bound: 2.0 * pd.pw().exp(),
            lower_bound: 2.0,
        },
        near_return_check,
        constant_check,
        failures,
    })
}
