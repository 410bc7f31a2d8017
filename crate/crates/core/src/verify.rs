//! Invariant suite behind `respoly verify`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bands::{band_set, widom_factor};
use crate::error::Result;
use crate::examples::run_examples;
use crate::oracle::{compare, grid_minimax, GridProblem};
use crate::potential::PoleData;
use crate::realset::NormalizedProblem;
use crate::solver::{certify, solve_residual, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub instance: String,
    pub n: usize,
    pub check: String,
    /// The measured quantity; `None` when the check could not be evaluated.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub failures: usize,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub problem: NormalizedProblem,
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub solve: SolveOptions,
    /// Oracle grid points per band.
    pub grid: usize,
    /// Largest `n` certified by the oracle.
    pub oracle_n_max: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            solve: SolveOptions::default(),
            grid: crate::oracle::DEFAULT_PER_BAND,
            oracle_n_max: 8,
        }
    }
}

/// The built-in instances of a suite.
pub fn suite_instances(suite: Suite) -> Result<Vec<Instance>> {
    let scale = match suite {
        Suite::Quick => 1,
        Suite::Full => 2,
    };
    let mk = |name: &str, iv: &[(f64, f64)], x0: f64, n_max: usize| -> Result<Instance> {
        Ok(Instance {
            name: name.into(),
            problem: NormalizedProblem::new(iv, x0)?,
            n_max: n_max * scale,
        })
    };
    Ok(vec![
        mk("interval", &[(-1.0, 1.0)], 2.0, 6)?,
        mk("symmetric_two_interval", &[(-2.0, -1.0), (1.0, 2.0)], 0.0, 8)?,
        mk("asymmetric_two_interval", &[(-1.0, 0.2), (0.6, 1.0)], 0.4, 8)?,
        mk("two_interval_outside_hull", &[(-2.0, -1.0), (1.0, 2.0)], 2.5, 6)?,
        mk("three_interval", &[(-1.0, -0.3), (0.1, 0.5), (0.8, 1.3)], 0.65, 6)?,
    ])
}

struct Ctx<'a> {
    instance: &'a str,
    checks: Vec<Check>,
}

impl Ctx<'_> {
    fn push(&mut self, n: usize, check: &str, value: f64, tolerance: f64, pass: bool) {
        self.checks.push(Check {
            instance: self.instance.into(),
            n,
            check: check.into(),
            value: Some(value),
            tolerance,
            pass,
            detail: None,
        });
    }

    fn fail(&mut self, n: usize, check: &str, detail: String) {
        self.checks.push(Check {
            instance: self.instance.into(),
            n,
            check: check.into(),
            value: None,
            tolerance: 0.0,
            pass: false,
            detail: Some(detail),
        });
    }
}

fn check_instance(inst: &Instance, opts: &VerifyOptions) -> Vec<Check> {
    let mut ctx = Ctx {
        instance: &inst.name,
        checks: Vec::new(),
    };
    let prob = &inst.problem;
    let pd = match PoleData::new(&prob.set, prob.x0) {
        Ok(pd) => pd,
        Err(e) => {
            ctx.fail(0, "potential", e.to_string());
            return ctx.checks;
        }
    };
    let mut prev_r: Option<f64> = None;
    for n in 1..=inst.n_max {
        let sol = match solve_residual(prob, n, &opts.solve) {
            Ok(s) => s,
            Err(e) => {
                ctx.fail(n, "solve", e.to_string());
                continue;
            }
        };
        match certify(&sol, 1e-9) {
            Ok(()) => ctx.push(n, "alternation", sol.levelling_defect, 1e-9, true),
            Err(e) => ctx.fail(n, "alternation", e.to_string()),
        }
        if let Some(p) = prev_r {
            let excess = sol.r - p;
            ctx.push(n, "monotone_norm", excess, 1e-12 * p, excess <= 1e-12 * p);
        }
        prev_r = Some(sol.r);

        match widom_factor(prob, &sol, &pd) {
            Ok(rec) => {
                ctx.push(n, "widom_bounds", rec.w_n, crate::bands::BOUND_SLACK, rec.within_bounds);
                let margin = sol.r.ln() + n as f64 * rec.g_at_x0;
                ctx.push(n, "exponential_lower_bound", margin, 1e-9, rec.exponential_bound_holds);
                if !rec.norm_identity.skipped {
                    let d = rec.norm_identity.defect;
                    ctx.push(n, "norm_identity", d, 1e-8, d <= 1e-8);
                }
            }
            Err(e) => ctx.fail(n, "widom_bounds", e.to_string()),
        }

        if sol.d_n > 0 {
            match band_set(&sol) {
                Ok(bs) => {
                    let count_ok = bs.bands.len() == sol.d_n;
                    ctx.push(n, "band_count", bs.bands.len() as f64, 0.0, count_ok);
                    let covers = bs.covers(&prob.set, 1e-9);
                    ctx.push(n, "band_cover", if covers { 0.0 } else { 1.0 }, 1e-9, covers);
                    match bs.harmonic_measures() {
                        Ok(w) => {
                            let target = 1.0 / sol.d_n as f64;
                            let dev = w.iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
                            ctx.push(n, "band_harmonic_measure", dev, 1e-6, dev <= 1e-6);
                        }
                        Err(e) => ctx.fail(n, "band_harmonic_measure", e.to_string()),
                    }
                }
                Err(e) => ctx.fail(n, "band_count", e.to_string()),
            }
        }

        if n <= opts.oracle_n_max {
            let oracle = GridProblem::new(prob, n, opts.grid).and_then(|gp| grid_minimax(&gp));
            match oracle {
                Ok(o) => {
                    let rep = compare(&sol, &o);
                    ctx.push(n, "oracle", rep.norm_deviation, rep.tolerance, rep.pass);
                }
                Err(e) => ctx.fail(n, "oracle", e.to_string()),
            }
        }
    }
    ctx.checks
}

/// Runs the invariant checks on `instances`; the full suite adds the
/// closed-form examples.
pub fn run_verify(suite: Suite, instances: &[Instance], opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks: Vec<Check> = instances
        .par_iter()
        .map(|inst| check_instance(inst, opts))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    if suite == Suite::Full {
        let rep = run_examples(&opts.solve)?;
        for row in rep.rows {
            checks.push(Check {
                instance: format!("example:{}", row.name),
                n: row.n,
                check: "closed_form".into(),
                value: Some(row.r_defect.max(row.shape_defect)),
                tolerance: rep.tolerance,
                pass: row.pass,
                detail: None,
            });
        }
    }
    let failures = checks.iter().filter(|c| !c.pass).count();
    Ok(VerifyReport {
        suite,
        checks,
        failures,
        pass: failures == 0,
    })
}
