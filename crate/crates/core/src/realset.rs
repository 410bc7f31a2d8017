//! Compact sets given as finite unions of closed real intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Sorted, pairwise disjoint, nondegenerate closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSet {
    intervals: Vec<Interval>,
}

/// A component of the complement of a [`RealSet`] in the extended real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gap {
    /// The open interval between components `index` and `index + 1`.
    Bounded { index: usize, lo: f64, hi: f64 },
    /// `(upper, ∞) ∪ {∞} ∪ (−∞, lower)`.
    Unbounded { lower: f64, upper: f64 },
}

impl Gap {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Gap::Bounded { lo, hi, .. } => lo < x && x < hi,
            Gap::Unbounded { lower, upper } => x < lower || x > upper,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Gap::Bounded { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapIndex {
    Bounded(usize),
    Unbounded,
}

/// A set together with the normalization point `x0` outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedProblem {
    pub set: RealSet,
    pub x0: f64,
    pub gap: GapIndex,
}

/// The JSON form accepted on input: `{"intervals": [[a,b],...], "x0": number}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub intervals: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
}

impl SetSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("set spec: {e}")))
    }

    pub fn to_set(&self, tol: f64) -> Result<RealSet> {
        let raw: Vec<(f64, f64)> = self.intervals.iter().map(|p| (p[0], p[1])).collect();
        RealSet::with_tolerance(&raw, tol)
    }
}

impl RealSet {
    /// Validates and canonicalizes raw intervals. Overlapping or touching
    /// intervals are merged.
    pub fn new(raw: &[(f64, f64)]) -> Result<Self> {
        Self::with_tolerance(raw, 0.0)
    }

    /// Like [`RealSet::new`], but intervals separated by at most `tol` are
    /// merged as well.
    pub fn with_tolerance(raw: &[(f64, f64)], tol: f64) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::invalid("empty interval list"));
        }
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::invalid("merge tolerance must be finite and nonnegative"));
        }
        let mut ivs = Vec::with_capacity(raw.len());
        for &(a, b) in raw {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::invalid(format!("non-finite endpoint in [{a}, {b}]")));
            }
            if a > b {
                return Err(Error::invalid(format!("reversed interval [{a}, {b}]")));
            }
            ivs.push(Interval::new(a, b));
        }
        ivs.sort_by(|u, v| u.lo.total_cmp(&v.lo).then(u.hi.total_cmp(&v.hi)));
        let mut merged: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi + tol => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        if let Some(bad) = merged.iter().find(|iv| iv.lo >= iv.hi) {
            return Err(Error::invalid(format!(
                "degenerate interval [{}, {}]",
                bad.lo, bad.hi
            )));
        }
        Ok(RealSet { intervals: merged })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Number of components `m`.
    pub fn components(&self) -> usize {
        self.intervals.len()
    }

    pub fn lower(&self) -> f64 {
        self.intervals[0].lo
    }

    pub fn upper(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].hi
    }

    pub fn hull(&self) -> Interval {
        Interval::new(self.lower(), self.upper())
    }

    pub fn diameter(&self) -> f64 {
        self.upper() - self.lower()
    }

    /// Sorted list of all `2m` endpoints.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|iv| [iv.lo, iv.hi]).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.component_of(x).is_some()
    }

    pub fn component_of(&self, x: f64) -> Option<usize> {
        let i = self.intervals.partition_point(|iv| iv.hi < x);
        (i < self.intervals.len() && self.intervals[i].lo <= x).then_some(i)
    }

    /// Whether `[lo, hi]` lies inside a single component.
    pub fn contains_interval(&self, lo: f64, hi: f64) -> bool {
        match self.component_of(lo) {
            Some(i) => hi <= self.intervals[i].hi && lo <= hi,
            None => false,
        }
    }

    /// The `m − 1` bounded gaps in increasing order, then the unbounded gap.
    pub fn gaps(&self) -> Vec<Gap> {
        let mut out: Vec<Gap> = self
            .intervals
            .windows(2)
            .enumerate()
            .map(|(index, w)| Gap::Bounded {
                index,
                lo: w[0].hi,
                hi: w[1].lo,
            })
            .collect();
        out.push(Gap::Unbounded {
            lower: self.lower(),
            upper: self.upper(),
        });
        out
    }

    /// Image under `x ↦ s·x + c` with `s ≠ 0`.
    pub fn affine_image(&self, s: f64, c: f64) -> Result<Self> {
        if s == 0.0 || !s.is_finite() {
            return Err(Error::invalid("affine scale must be finite and nonzero"));
        }
        let raw: Vec<(f64, f64)> = self
            .intervals
            .iter()
            .map(|iv| {
                let (u, v) = (s * iv.lo + c, s * iv.hi + c);
                (u.min(v), u.max(v))
            })
            .collect();
        Self::new(&raw)
    }

    /// Whether every component of `self` lies in `other`, allowing endpoint
    /// slack `tol`.
    pub fn is_subset_of(&self, other: &RealSet, tol: f64) -> bool {
        self.intervals.iter().all(|iv| {
            other
                .intervals
                .iter()
                .any(|ov| ov.lo - tol <= iv.lo && iv.hi <= ov.hi + tol)
        })
    }

    pub fn to_spec(&self, x0: Option<f64>) -> SetSpec {
        SetSpec {
            intervals: self.intervals.iter().map(|iv| [iv.lo, iv.hi]).collect(),
            x0,
        }
    }
}

/// Attaches `x0` to `set`, failing if `x0` lies in the set or is not finite.
pub fn locate(set: &RealSet, x0: f64) -> Result<NormalizedProblem> {
    if !x0.is_finite() {
        return Err(Error::invalid(format!("x0 = {x0} is not finite")));
    }
    if let Some(i) = set.component_of(x0) {
        let iv = set.intervals[i];
        return Err(Error::invalid(format!(
            "x0 = {x0} lies in the set component [{}, {}]",
            iv.lo, iv.hi
        )));
    }
    let gap = if x0 < set.lower() || x0 > set.upper() {
        GapIndex::Unbounded
    } else {
        GapIndex::Bounded(set.intervals.partition_point(|iv| iv.hi < x0) - 1)
    };
    Ok(NormalizedProblem {
        set: set.clone(),
        x0,
        gap,
    })
}

impl NormalizedProblem {
    pub fn new(raw: &[(f64, f64)], x0: f64) -> Result<Self> {
        locate(&RealSet::new(raw)?, x0)
    }

    /// The gap containing `x0`.
    pub fn gap(&self) -> Gap {
        match self.gap {
            GapIndex::Bounded(i) => self.set.gaps()[i],
            GapIndex::Unbounded => *self.set.gaps().last().expect("unbounded gap"),
        }
    }

    pub fn in_bounded_gap(&self) -> bool {
        matches!(self.gap, GapIndex::Bounded(_))
    }

    /// The same problem transported by `x ↦ s·x + c`.
    pub fn affine_image(&self, s: f64, c: f64) -> Result<Self> {
        locate(&self.set.affine_image(s, c)?, s * self.x0 + c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sorts_and_merges() {
        let s = RealSet::new(&[(1.0, 2.0), (-2.0, -1.0)]).unwrap();
        assert_eq!(s.intervals(), &[Interval::new(-2.0, -1.0), Interval::new(1.0, 2.0)]);
        assert_eq!(s.components(), 2);
        let t = RealSet::new(&[(0.0, 0.5), (0.5, 1.0)]).unwrap();
        assert_eq!(t.intervals(), &[Interval::new(0.0, 1.0)]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RealSet::new(&[]).is_err());
        assert!(RealSet::new(&[(0.0, 0.0)]).is_err());
        assert!(RealSet::new(&[(1.0, 0.0)]).is_err());
        assert!(RealSet::new(&[(f64::NAN, 1.0)]).is_err());
        assert!(RealSet::new(&[(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn point_merged_into_interval_is_fine() {
        let s = RealSet::new(&[(0.0, 1.0), (0.5, 0.5)]).unwrap();
        assert_eq!(s.intervals(), &[Interval::new(0.0, 1.0)]);
    }

    #[test]
    fn tolerance_merges_near_touching() {
        let raw = [(0.0, 0.5), (0.5 + 1e-12, 1.0)];
        assert_eq!(RealSet::new(&raw).unwrap().components(), 2);
        assert_eq!(RealSet::with_tolerance(&raw, 1e-10).unwrap().components(), 1);
    }

    #[test]
    fn locate_examples() {
        let s = RealSet::new(&[(-2.0, -1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(locate(&s, 0.0).unwrap().gap, GapIndex::Bounded(0));
        let i = RealSet::new(&[(-1.0, 1.0)]).unwrap();
        assert_eq!(locate(&i, 2.0).unwrap().gap, GapIndex::Unbounded);
        assert!(locate(&i, 0.3).is_err());
        assert!(locate(&i, 1.0).is_err());
        assert!(locate(&i, f64::NAN).is_err());
    }

    #[test]
    fn gap_lists() {
        let s = RealSet::new(&[(-2.0, -1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(
            s.gaps(),
            vec![
                Gap::Bounded { index: 0, lo: -1.0, hi: 1.0 },
                Gap::Unbounded { lower: -2.0, upper: 2.0 }
            ]
        );
        assert_eq!(RealSet::new(&[(-1.0, 1.0)]).unwrap().gaps().len(), 1);
        let t = RealSet::new(&[(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]).unwrap();
        let g = t.gaps();
        assert_eq!(g.len(), 3);
        assert_eq!(g[0], Gap::Bounded { index: 0, lo: 1.0, hi: 2.0 });
        assert_eq!(g[1], Gap::Bounded { index: 1, lo: 3.0, hi: 4.0 });
    }

    #[test]
    fn spec_round_trip() {
        let spec = SetSpec::parse(r#"{"intervals": [[1,2],[-2,-1]], "x0": 0}"#).unwrap();
        let set = spec.to_set(0.0).unwrap();
        assert_eq!(set.to_spec(spec.x0).intervals, vec![[-2.0, -1.0], [1.0, 2.0]]);
        assert!(SetSpec::parse(r#"{"intervals": [[0,1]], "bogus": 1}"#).is_err());
    }

    fn raw_intervals() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-10.0f64..10.0, 0.01f64..3.0), 1..6)
            .prop_map(|v| v.into_iter().map(|(a, l)| (a, a + l)).collect())
    }

    proptest! {
        #[test]
        fn order_independent(mut raw in raw_intervals(), seed in any::<u64>()) {
            let a = RealSet::new(&raw).unwrap();
            let k = (seed as usize) % raw.len();
            raw.rotate_left(k);
            raw.reverse();
            let b = RealSet::new(&raw).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn sets_and_gaps_tile_the_line(raw in raw_intervals(), x in -20.0f64..20.0) {
            let s = RealSet::new(&raw).unwrap();
            for w in s.intervals().windows(2) {
                prop_assert!(w[0].hi < w[1].lo);
            }
            let hits = usize::from(s.contains(x))
                + s.gaps().iter().filter(|g| g.contains(x)).count();
            prop_assert_eq!(hits, 1);
            if !s.contains(x) {
                let p = locate(&s, x).unwrap();
                prop_assert!(p.gap().contains(x));
            }
        }
    }
}
