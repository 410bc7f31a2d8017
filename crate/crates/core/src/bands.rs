//! Period-`d_n` band sets `R⁻¹([−r, r])`, the Green's function they carry in
//! closed form, and Widom factors with their bounds.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::output::csv_cell;
use crate::poly::refine_root;
use crate::potential::{self, Location, PoleData};
use crate::realset::{Gap, Interval, NormalizedProblem, RealSet};
use crate::solver::ResidualSolution;

/// A critical value below `r·(1 − TOUCH_SLACK)` would merge two bands; one
/// within `r·(1 ± TOUCH_SLACK)` is a touching point.
const TOUCH_SLACK: f64 = 1e-9;
/// Band edges closer than this (relative to the diameter) are one touching point.
const TOUCH_CLUSTER: f64 = 1e-9;
/// Bands narrower than this (relative to the diameter) get their edges from
/// the local expansion of `R` at the zero: bisection on `|R| − r` only
/// resolves them to the rounding noise of `R`, which can exceed `r` there.
const NARROW_BAND: f64 = 1e-6;
/// Slack on the Widom-factor bounds.
pub const BOUND_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSet {
    pub d_n: usize,
    /// `d_n` closed bands in increasing order; touching bands share an
    /// endpoint. Empty when `d_n = 0`, where the preimage is the whole line.
    pub bands: Vec<Interval>,
    /// The zero of `R` inside each band.
    pub zeros: Vec<f64>,
    pub touching: Vec<f64>,
    /// `|R(c)|/r` at the critical point between neighbouring bands.
    pub critical_ratios: Vec<f64>,
    /// Each band's edges as `hi + lo` pairs. They differ from `bands` only
    /// for narrow bands, whose width may be far below the float spacing at
    /// their position; `bands` then holds the floats around them.
    #[serde(skip)]
    pub fine_edges: Vec<[(f64, f64); 2]>,
}

impl BandSet {
    fn whole_line() -> Self {
        BandSet {
            d_n: 0,
            bands: Vec::new(),
            zeros: Vec::new(),
            touching: Vec::new(),
            critical_ratios: Vec::new(),
            fine_edges: Vec::new(),
        }
    }

    /// The bands as a set; touching bands merge into one component.
    pub fn as_set(&self) -> Result<RealSet> {
        if self.bands.is_empty() {
            return Err(Error::invalid("band set of a constant polynomial is the whole line"));
        }
        let raw: Vec<(f64, f64)> = self.bands.iter().map(|b| (b.lo, b.hi)).collect();
        RealSet::new(&raw)
    }

    /// Whether `set ⊆ bands` with endpoint slack `tol`.
    pub fn covers(&self, set: &RealSet, tol: f64) -> bool {
        match self.as_set() {
            Ok(own) => set.is_subset_of(&own, tol),
            Err(_) => self.d_n == 0,
        }
    }

    /// Total length of the bands inside `gap`.
    pub fn length_in(&self, gap: &Gap) -> f64 {
        self.bands
            .iter()
            .map(|b| match *gap {
                Gap::Bounded { lo, hi, .. } => (b.hi.min(hi) - b.lo.max(lo)).max(0.0),
                Gap::Unbounded { lower, upper } => {
                    (lower.min(b.hi) - b.lo).max(0.0) + (b.hi - upper.max(b.lo)).max(0.0)
                }
            })
            .sum()
    }

    /// Equilibrium data of the band set, narrow bands resolved below the
    /// float spacing.
    pub fn equilibrium(&self) -> Result<potential::GreenData> {
        let own = self.as_set()?;
        // Components start at a band whose left neighbour does not touch it.
        let mut ends = Vec::with_capacity(2 * own.components());
        for (k, b) in self.bands.iter().enumerate() {
            if k == 0 || self.bands[k - 1].hi < b.lo {
                ends.push(self.fine_edges[k][0]);
            }
            if k + 1 == self.bands.len() || b.hi < self.bands[k + 1].lo {
                ends.push(self.fine_edges[k][1]);
            }
        }
        potential::equilibrium_refined(&own, &ends)
    }

    /// Equilibrium mass of each band, computed on the band set itself.
    pub fn harmonic_measures(&self) -> Result<Vec<f64>> {
        let green = self.equilibrium()?;
        self.bands.iter().map(|b| green.harmonic_measure(*b)).collect()
    }
}

/// Zeros of `R`, increasing: one per sign change between consecutive
/// reference points on the same side of `x0`, and the outer zero when the
/// reference accounts for one fewer than `d_n`.
pub fn zeros(sol: &ResidualSolution) -> Result<Vec<f64>> {
    let d = sol.d_n;
    if d == 0 {
        return Ok(Vec::new());
    }
    let x0 = sol.x0();
    let pts = sol.reference.points();
    let f = |x: f64| sol.eval(x);
    let mut out = Vec::with_capacity(d);
    for w in pts.windows(2) {
        if w[0] < x0 && x0 < w[1] {
            continue;
        }
        if f(w[0]) * f(w[1]) < 0.0 {
            out.push(refine_root(f, w[0], w[1]));
        }
    }
    if out.len() + 1 == d {
        out.push(outer_zero(sol)?);
        out.sort_by(f64::total_cmp);
    }
    if out.len() != d {
        return Err(Error::Invariant(format!(
            "found {} zeros of R, expected d_n = {}",
            out.len(),
            d
        )));
    }
    Ok(out)
}

/// The zero of `R` outside the reference span, found by doubling outwards.
fn outer_zero(sol: &ResidualSolution) -> Result<f64> {
    let pts = sol.reference.points();
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    let plus = sol.interpolant().leading_coefficient().signum();
    let minus = if sol.d_n.is_multiple_of(2) { plus } else { -plus };
    let sign = |x: f64| sol.eval_log(x).0;
    let (start, dir) = if sign(last) != plus {
        (last, 1.0)
    } else if sign(first) != minus {
        (first, -1.0)
    } else {
        return Err(Error::Invariant("no sign change outside the reference".into()));
    };
    let s0 = sign(start);
    let mut step = 1e-3 * sol.set().diameter();
    let mut prev = start;
    for _ in 0..2100 {
        let x = start + dir * step;
        if !x.is_finite() {
            break;
        }
        if sign(x) != s0 {
            let (lo, hi) = if dir > 0.0 { (prev, x) } else { (x, prev) };
            return Ok(refine_root(sign, lo, hi));
        }
        prev = x;
        step *= 2.0;
    }
    Err(Error::numerical("outer zero of R not bracketed"))
}

/// The critical point of `R` between consecutive zeros `a < b`.
fn critical_between(sol: &ResidualSolution, dp: &crate::poly::Polynomial, a: f64, b: f64) -> f64 {
    let (fa, fb) = (dp.eval(a), dp.eval(b));
    if fa * fb < 0.0 {
        return refine_root(|x| dp.eval(x), a, b);
    }
    // Golden section on |R| as a fallback.
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if sol.eval(x1).abs() < sol.eval(x2).abs() {
            lo = x1;
        } else {
            hi = x2;
        }
        if hi - lo <= 1e-15 * (lo.abs() + hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `x` with `|R(x)| = r` beyond the outermost zero `z`, in direction `dir`.
fn outer_edge(sol: &ResidualSolution, z: f64, dir: f64) -> Result<f64> {
    let ln_r = sol.r.ln();
    let above = |x: f64| if sol.eval_log(x).1 > ln_r { 1.0 } else { -1.0 };
    let mut step = 1e-3 * sol.set().diameter();
    let mut prev = z;
    for _ in 0..2100 {
        let x = z + dir * step;
        if !x.is_finite() {
            break;
        }
        if above(x) > 0.0 {
            let (lo, hi) = if dir > 0.0 { (prev, x) } else { (x, prev) };
            return Ok(refine_root(above, lo, hi));
        }
        prev = x;
        step *= 2.0;
    }
    Err(Error::numerical("outer band edge not bracketed"))
}

/// `𝔢_n = R⁻¹([−r, r])`: `d_n` bands, each mapped by `R` onto `[−r, r]`.
pub fn band_set(sol: &ResidualSolution) -> Result<BandSet> {
    if sol.d_n == 0 {
        return Ok(BandSet::whole_line());
    }
    if !(sol.r > 0.0) || !sol.r.is_finite() {
        return Err(Error::invalid("band set needs a residual norm r > 0"));
    }
    let zs = zeros(sol)?;
    let r = sol.r;
    let diam = sol.set().diameter();
    let off = |x: f64| sol.eval(x).abs() - r;
    let dp = sol.poly.derivative();
    let ddp = dp.derivative();
    let narrow: Vec<Option<NarrowBand>> = zs.iter().map(|&z| narrow_band(sol, &dp, &ddp, z, diam)).collect();

    let mut lo_edges = vec![match narrow[0] {
        Some(_) => zs[0],
        None => outer_edge(sol, zs[0], -1.0)?,
    }];
    let mut hi_edges = Vec::with_capacity(zs.len());
    let mut touching = Vec::new();
    let mut ratios = Vec::with_capacity(zs.len().saturating_sub(1));
    for (k, w) in zs.windows(2).enumerate() {
        let c = critical_between(sol, &dp, w[0], w[1]);
        let v = sol.eval(c).abs();
        ratios.push(v / r);
        if v < r * (1.0 - TOUCH_SLACK) {
            return Err(Error::Numerical {
                message: format!("bands merge: |R| = {v:e} < r = {r:e} at critical point {c}"),
                diagnostic: Some(json!({ "critical_point": c, "value": v, "r": r, "zeros": zs })),
            });
        }
        // Near a double point |R| − r has a double root and bisection only
        // resolves the edges to √ε, so touching is decided on the value.
        let (right, left) = if v <= r * (1.0 + TOUCH_SLACK) {
            (c, c)
        } else {
            let right = if narrow[k].is_some() { w[0] } else { refine_root(off, w[0], c) };
            let left = if narrow[k + 1].is_some() { w[1] } else { refine_root(off, c, w[1]) };
            (right, left)
        };
        if left - right <= TOUCH_CLUSTER * diam && narrow[k].is_none() && narrow[k + 1].is_none() {
            touching.push(c);
            hi_edges.push(c);
            lo_edges.push(c);
        } else {
            hi_edges.push(right);
            lo_edges.push(left);
        }
    }
    let last = zs.len() - 1;
    hi_edges.push(match narrow[last] {
        Some(_) => zs[last],
        None => outer_edge(sol, zs[last], 1.0)?,
    });
    let mut bands = Vec::with_capacity(zs.len());
    let mut fine_edges = Vec::with_capacity(zs.len());
    for (k, (lo, hi)) in lo_edges.into_iter().zip(hi_edges).enumerate() {
        match narrow[k] {
            Some(nb) => {
                bands.push(nb.enclosure(zs[k]));
                fine_edges.push([(zs[k], nb.lo), (zs[k], nb.hi)]);
            }
            None => {
                bands.push(Interval::new(lo, hi));
                fine_edges.push([(lo, 0.0), (hi, 0.0)]);
            }
        }
    }
    Ok(BandSet {
        d_n: sol.d_n,
        bands,
        zeros: zs,
        touching,
        critical_ratios: ratios,
        fine_edges,
    })
}

/// A band `[z + lo, z + hi]` around the zero `z`, offsets from the local
/// quadratic expansion of `R`.
#[derive(Debug, Clone, Copy)]
struct NarrowBand {
    lo: f64,
    hi: f64,
}

impl NarrowBand {
    /// Nearest float edges, widened to the neighbouring floats when the
    /// band is too narrow to show.
    fn enclosure(&self, z: f64) -> Interval {
        let (a, b) = (z + self.lo, z + self.hi);
        if a < b {
            Interval::new(a, b)
        } else {
            Interval::new(z.next_down(), z.next_up())
        }
    }
}

fn narrow_band(
    sol: &ResidualSolution,
    dp: &crate::poly::Polynomial,
    ddp: &crate::poly::Polynomial,
    z: f64,
    diam: f64,
) -> Option<NarrowBand> {
    let r = sol.r;
    let d1 = dp.eval(z);
    let half = r / d1.abs();
    if !(half <= NARROW_BAND * diam) {
        return None;
    }
    // Solve R(z) + R'h + R''h²/2 = ±r to second order; R(z) only counts when
    // it is resolved, otherwise it is rounding noise.
    let r0 = sol.eval(z);
    let shift = if r0.abs() < r { -r0 / d1 } else { 0.0 };
    let bend = ddp.eval(z) / (2.0 * d1);
    let edge = |h: f64| h + shift - bend * h * h;
    let (a, b) = (edge(-half), edge(half));
    Some(NarrowBand { lo: a.min(b), hi: a.max(b) })
}

/// `acosh(e^l)` for `l ≥ 0` without forming `e^l` when it is large.
fn acosh_exp(l: f64) -> f64 {
    if l > 20.0 {
        l + (1.0 + (1.0 - (-2.0 * l).exp()).sqrt()).ln()
    } else {
        l.exp().acosh()
    }
}

/// `g_n(z) = (1/d_n)·log|Δ/2 + √((Δ/2)² − 1)|` with `Δ = 2R/r`, the Green's
/// function of the band set with pole at infinity.
pub fn green_period(sol: &ResidualSolution, z: Complex64) -> Result<f64> {
    let d = sol.d_n;
    if d == 0 {
        return Err(Error::invalid("R is constant; there is no period set"));
    }
    if z.im == 0.0 {
        let (_, ln_abs) = sol.eval_log(z.re);
        let l = ln_abs - sol.r.ln();
        return Ok(if l <= 0.0 { 0.0 } else { acosh_exp(l) / d as f64 });
    }
    let w = sol.eval_complex(z) / sol.r;
    if !w.is_finite() {
        return Err(Error::numerical(format!("R overflows at {z}")));
    }
    let g = if w.norm() < 1e150 {
        // The two branches multiply to 1; the larger is wanted, and taking
        // it directly avoids cancellation in the smaller one.
        let s = (w * w - 1.0).sqrt();
        (w + s).norm().max((w - s).norm()).ln()
    } else {
        {
            let v = 1.0 / w;
            w.norm().ln() + (1.0 + (1.0 - v * v).sqrt()).norm().ln()
        }
    };
    Ok(g / d as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormIdentity {
    /// `|r − 1/cosh(d_n·g_n(x0))|`.
    pub defect: f64,
    /// Set when `d_n = 0` and the identity does not apply.
    pub skipped: bool,
}

pub fn norm_identity(sol: &ResidualSolution) -> NormIdentity {
    if sol.d_n == 0 {
        return NormIdentity {
            defect: 0.0,
            skipped: true,
        };
    }
    let defect = match green_period(sol, Complex64::new(sol.x0(), 0.0)) {
        Ok(g) => (sol.r - 1.0 / (sol.d_n as f64 * g).cosh()).abs(),
        Err(_) => f64::INFINITY,
    };
    NormIdentity {
        defect,
        skipped: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapZero {
    pub gap: Gap,
    pub zero: Option<f64>,
    /// The unbounded gap holds the zero lost to a degree drop.
    pub at_infinity: bool,
}

fn gap_zeros_from(sol: &ResidualSolution, set: &RealSet, zs: &[f64]) -> Result<Vec<GapZero>> {
    let mut out: Vec<GapZero> = set
        .gaps()
        .into_iter()
        .map(|gap| GapZero {
            gap,
            zero: None,
            at_infinity: !gap.is_bounded() && sol.d_n < sol.n,
        })
        .collect();
    for &z in zs.iter().filter(|&&z| !set.contains(z)) {
        let slot = out
            .iter_mut()
            .find(|g| g.gap.contains(z))
            .expect("gaps tile the complement");
        if let Some(prev) = slot.zero {
            return Err(Error::Invariant(format!(
                "two zeros of R ({prev}, {z}) in one gap"
            )));
        }
        slot.zero = Some(z);
    }
    Ok(out)
}

/// The zero of `R` in each gap of `set`, if any.
pub fn gap_zeros(sol: &ResidualSolution, set: &RealSet) -> Result<Vec<GapZero>> {
    gap_zeros_from(sol, set, &zeros(sol)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidomRecord {
    pub n: usize,
    pub d_n: usize,
    pub r: f64,
    pub w_n: f64,
    pub lower: f64,
    /// `2·exp(PW)`.
    pub upper: f64,
    pub pw: f64,
    pub g_at_x0: f64,
    /// Equality in the lower bound: `d_n = n` and the band set is the set.
    pub lower_equality: bool,
    pub within_bounds: bool,
    /// `r ≥ exp(−n·g(x0))`.
    pub exponential_bound_holds: bool,
    pub gap_zeros: Vec<GapZero>,
    pub band_set: BandSet,
    pub norm_identity: NormIdentity,
}

/// `W_n = r·(e^{n g} + e^{−n g})` with `g = g(x0)` of the original set.
pub fn widom_factor(prob: &NormalizedProblem, sol: &ResidualSolution, pd: &PoleData) -> Result<WidomRecord> {
    if prob.x0 != sol.x0() || pd.x0() != prob.x0 {
        return Err(Error::invalid("problem, solution and pole data disagree on x0"));
    }
    let g = pd.green_at_infinity()?;
    let n = sol.n;
    let ln_r = sol.r.ln();
    let ng = n as f64 * g;
    let w_n = (ln_r + ng).exp() + (ln_r - ng).exp();
    let pw = pd.pw();
    let upper = 2.0 * pw.exp();
    let band_set = band_set(sol)?;
    let gap_zeros = gap_zeros_from(sol, &prob.set, &band_set.zeros)?;
    let diam = prob.set.diameter();
    let lower_equality = sol.d_n == n
        && band_set.as_set().is_ok_and(|own| {
            let (a, b) = (own.endpoints(), prob.set.endpoints());
            a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-9 * diam)
        });
    Ok(WidomRecord {
        n,
        d_n: sol.d_n,
        r: sol.r,
        w_n,
        lower: 2.0,
        upper,
        pw,
        g_at_x0: g,
        lower_equality,
        within_bounds: w_n >= 2.0 - BOUND_SLACK && w_n <= upper + BOUND_SLACK,
        exponential_bound_holds: ln_r >= -ng - 1e-9,
        gap_zeros,
        band_set,
        norm_identity: norm_identity(sol),
    })
}

impl WidomRecord {
    pub const CSV_HEADER: [&'static str; 8] = ["n", "d_n", "r", "W_n", "lower", "upper", "gap_zeros", "defect"];

    /// Gap zeros in gap order: a position, `inf`, or `none`.
    pub fn csv_row(&self) -> Vec<String> {
        let zeros: Vec<String> = self
            .gap_zeros
            .iter()
            .map(|g| match (g.zero, g.at_infinity) {
                (Some(z), _) => csv_cell(Some(z)),
                (None, true) => "inf".into(),
                (None, false) => "none".into(),
            })
            .collect();
        vec![
            self.n.to_string(),
            self.d_n.to_string(),
            csv_cell(Some(self.r)),
            csv_cell(Some(self.w_n)),
            csv_cell(Some(self.lower)),
            csv_cell(Some(self.upper)),
            zeros.join(";"),
            csv_cell(Some(self.norm_identity.defect)),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    TowardCritical,
    TowardEdge,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Gap zeros settle on the critical point: `W_n` approaches `2·exp(PW)`.
    Upper,
    /// Gap zeros leave or approach the edges: `W_n` approaches 2.
    Lower,
    Mixed,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSample {
    pub n: usize,
    pub signature: Signature,
    /// Distance from the zero to the critical point, in the coordinate
    /// `1/(x − x0)` and relative to the gap's length there.
    pub distance_to_critical: Option<f64>,
    pub band_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapTrend {
    pub gap: Gap,
    pub critical_point: Option<Location>,
    pub samples: Vec<GapSample>,
    pub classification: Classification,
    /// Least-squares slope of `ln(band length in the gap)` against `n`.
    pub band_shrink_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationReport {
    pub gaps: Vec<GapTrend>,
    /// Extremes of `W_n` over the later half of the records.
    pub liminf_estimate: f64,
    pub limsup_estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// `PW = 0`: both bounds equal 2.
    pub bounds_coincide: bool,
    pub classification: Classification,
}

fn classify(sigs: impl Iterator<Item = Signature>) -> Classification {
    let (mut up, mut down) = (0, 0);
    for s in sigs {
        match s {
            Signature::TowardCritical => up += 1,
            _ => down += 1,
        }
    }
    match (up, down) {
        (0, 0) => Classification::Undetermined,
        (_, 0) => Classification::Upper,
        (0, _) => Classification::Lower,
        _ => Classification::Mixed,
    }
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Per-gap behaviour of the zeros of `R` over a run of `n`, and the range
/// of `W_n` over the later half of the run.
pub fn saturation_diagnostics(records: &[WidomRecord], pd: &PoleData) -> SaturationReport {
    let x0 = pd.x0();
    let mut sorted: Vec<&WidomRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.n);
    let tail_from = sorted.get(sorted.len() / 2).map_or(0, |r| r.n);
    let upper = 2.0 * pd.pw().exp();
    let u = |x: f64| 1.0 / (x - x0);

    let mut gaps = Vec::new();
    if let Some(first) = sorted.first() {
        for (gi, gz) in first.gap_zeros.iter().enumerate() {
            let gap = gz.gap;
            if gap.contains(x0) {
                continue;
            }
            // The gap in the coordinate 1/(x − x0), where it is bounded.
            let (ulo, uhi) = match gap {
                Gap::Bounded { lo, hi, .. } => (u(hi), u(lo)),
                Gap::Unbounded { lower, upper } => (u(lower), u(upper)),
            };
            let (ulo, uhi) = (ulo.min(uhi), ulo.max(uhi));
            let len = uhi - ulo;
            let crit = pd.critical_points().iter().find(|c| match c.location {
                Location::Infinity => !gap.is_bounded(),
                Location::Finite { x } => gap.contains(x),
            });
            let samples: Vec<GapSample> = sorted
                .iter()
                .map(|rec| {
                    let z = rec.gap_zeros.get(gi).copied();
                    let pos = match z {
                        Some(GapZero { zero: Some(y), .. }) => Some(u(y)),
                        Some(GapZero { at_infinity: true, .. }) => Some(0.0),
                        _ => None,
                    };
                    let band_length = rec.band_set.length_in(&gap);
                    let (signature, distance_to_critical) = match (pos, crit) {
                        (None, _) => (Signature::Absent, None),
                        (Some(p), Some(c)) => {
                            let dc = (p - c.inverted).abs() / len;
                            let de = (p - ulo).min(uhi - p) / len;
                            let s = if dc < de {
                                Signature::TowardCritical
                            } else {
                                Signature::TowardEdge
                            };
                            (s, Some(dc))
                        }
                        (Some(_), None) => (Signature::TowardEdge, None),
                    };
                    GapSample {
                        n: rec.n,
                        signature,
                        distance_to_critical,
                        band_length,
                    }
                })
                .collect();
            let classification = classify(samples.iter().filter(|s| s.n >= tail_from).map(|s| s.signature));
            let widths: Vec<(f64, f64)> = samples
                .iter()
                .filter(|s| s.band_length > 0.0)
                .map(|s| (s.n as f64, s.band_length.ln()))
                .collect();
            gaps.push(GapTrend {
                gap,
                critical_point: crit.map(|c| c.location),
                samples,
                classification,
                band_shrink_rate: slope(&widths),
            });
        }
    }
    let tail: Vec<f64> = sorted.iter().filter(|r| r.n >= tail_from).map(|r| r.w_n).collect();
    let liminf_estimate = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let limsup_estimate = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let overall = gaps
        .iter()
        .map(|g| g.classification)
        .reduce(|a, b| if a == b { a } else { Classification::Mixed })
        .unwrap_or(Classification::Undetermined);
    SaturationReport {
        gaps,
        liminf_estimate,
        limsup_estimate,
        lower: 2.0,
        upper,
        bounds_coincide: pd.pw().abs() < 1e-12,
        classification: overall,
    }
}

/// Largest `|green_period − g_{𝔢_n}|` over `samples`, with the second path
/// computed by the general equilibrium solver on the band set.
pub fn green_paths_max_difference(sol: &ResidualSolution, bands: &BandSet, samples: &[Complex64]) -> Result<f64> {
    let green = bands.equilibrium()?;
    let mut worst = 0.0f64;
    for &z in samples {
        let a = green_period(sol, z)?;
        let b = green.green(z)?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}
