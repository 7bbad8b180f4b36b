//! Fuzzy variables stored as α-cut tables.
//!
//! A [`FuzzyVariable`] is a list of ascending membership levels starting at 0
//! and ending at 1, with one closed interval per level. Cuts shrink as the
//! level rises. Between stored levels the cut endpoints are interpolated
//! linearly, and the membership function is recovered by inverting the two
//! endpoint curves.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Levels used when nothing else is requested.
pub const DEFAULT_LEVELS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Slack allowed when ingesting computed cuts that should be nested.
pub const NESTING_TOLERANCE: f64 = 1e-12;

/// A bounded closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!("interval [{lo}, {hi}] is not finite")));
        }
        if lo > hi {
            return Err(Error::invalid(format!("interval [{lo}, {hi}] has lo > hi")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::new(x, x)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Exact set inclusion `other ⊆ self`.
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Point at fraction `t` of the way from `lo` to `hi`.
    pub fn lerp(&self, t: f64) -> f64 {
        self.lo + t * (self.hi - self.lo)
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// One point of a sampled membership function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipSample {
    pub abscissa: f64,
    pub degree: f64,
}

/// A problem found by [`validate_table`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Level list is not an ascending list from 0 to 1.
    Levels(String),
    /// Length of the cut list differs from the level list.
    Shape { levels: usize, cuts: usize },
    /// A cut has a non-finite endpoint.
    Unbounded { level: f64 },
    /// A cut below level 1 is empty.
    Empty { level: f64 },
    /// The cut at level 1 is empty.
    NotNormalized,
    /// The cut at `upper` sticks out of the cut at `lower`.
    Nesting { lower: f64, upper: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Levels(msg) => write!(f, "levels: {msg}"),
            Violation::Shape { levels, cuts } => {
                write!(f, "{levels} levels but {cuts} cuts")
            }
            Violation::Unbounded { level } => write!(f, "cut at level {level} is unbounded"),
            Violation::Empty { level } => write!(f, "cut at level {level} is empty"),
            Violation::NotNormalized => write!(f, "cut at level 1 is empty"),
            Violation::Nesting { lower, upper } => {
                write!(f, "cut at level {upper} not contained in cut at level {lower}")
            }
        }
    }
}

/// Audit a raw cut table. Each cut is `(lo, hi)`; `lo > hi` encodes an empty cut.
///
/// Returns every violation found; an empty list means the table describes a
/// normalized fuzzy variable with bounded, closed, nested cuts.
pub fn validate_table(levels: &[f64], cuts: &[(f64, f64)]) -> Vec<Violation> {
    let mut out = Vec::new();
    if levels.len() != cuts.len() {
        out.push(Violation::Shape { levels: levels.len(), cuts: cuts.len() });
        return out;
    }
    if levels.len() < 2 {
        out.push(Violation::Levels("need at least levels 0 and 1".into()));
        return out;
    }
    if levels[0] != 0.0 || levels[levels.len() - 1] != 1.0 {
        out.push(Violation::Levels("must start at 0 and end at 1".into()));
    }
    if levels.windows(2).any(|w| !(w[0] < w[1])) {
        out.push(Violation::Levels("must be strictly ascending".into()));
    }
    for (&level, &(lo, hi)) in levels.iter().zip(cuts) {
        if !lo.is_finite() || !hi.is_finite() {
            out.push(Violation::Unbounded { level });
        } else if lo > hi {
            if level == 1.0 {
                out.push(Violation::NotNormalized);
            } else {
                out.push(Violation::Empty { level });
            }
        }
    }
    for k in 0..levels.len() - 1 {
        let (lo0, hi0) = cuts[k];
        let (lo1, hi1) = cuts[k + 1];
        if lo1 > hi1 || lo0 > hi0 {
            continue;
        }
        if lo1 < lo0 - NESTING_TOLERANCE || hi1 > hi0 + NESTING_TOLERANCE {
            out.push(Violation::Nesting { lower: levels[k], upper: levels[k + 1] });
        }
    }
    out
}

/// A normalized fuzzy variable with piecewise-linear α-cut endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CutTable", into = "CutTable")]
pub struct FuzzyVariable {
    levels: Vec<f64>,
    cuts: Vec<Interval>,
}

/// Serialized form of a [`FuzzyVariable`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutTable {
    pub levels: Vec<f64>,
    pub cuts: Vec<Interval>,
}

impl TryFrom<CutTable> for FuzzyVariable {
    type Error = Error;

    fn try_from(t: CutTable) -> Result<Self> {
        FuzzyVariable::from_alpha_cuts(t.levels, t.cuts)
    }
}

impl From<FuzzyVariable> for CutTable {
    fn from(fv: FuzzyVariable) -> Self {
        CutTable { levels: fv.levels, cuts: fv.cuts }
    }
}

impl FuzzyVariable {
    /// Triangular variable `⟨l, m, r⟩`. Degenerate limbs are allowed; `l = m = r` is crisp.
    pub fn triangular(l: f64, m: f64, r: f64) -> Result<Self> {
        if !(l.is_finite() && m.is_finite() && r.is_finite()) {
            return Err(Error::invalid("triangular vertices must be finite"));
        }
        if l > m || m > r {
            return Err(Error::invalid(format!("triangular needs l <= m <= r, got <{l}, {m}, {r}>")));
        }
        Ok(Self {
            levels: vec![0.0, 1.0],
            cuts: vec![Interval { lo: l, hi: r }, Interval { lo: m, hi: m }],
        })
    }

    pub fn crisp(x: f64) -> Result<Self> {
        Self::triangular(x, x, x)
    }

    /// Polygonal variable from `2n` ascending vertices read from the outside in:
    /// the cut at `levels[j]` is `[v[j], v[2n-1-j]]`.
    pub fn polygonal(vertices: &[f64], levels: &[f64]) -> Result<Self> {
        let n = levels.len();
        if vertices.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: vertices.len() });
        }
        let level_of = |i: usize| i.min(2 * n - 1 - i);
        for (i, w) in vertices.windows(2).enumerate() {
            if !(w[0] <= w[1]) {
                let (a, b) = (level_of(i), level_of(i + 1));
                return Err(Error::NotNested { lower: levels[a.min(b)], upper: levels[a.max(b)] });
            }
        }
        let cuts = (0..n)
            .map(|j| Interval::new(vertices[j], vertices[2 * n - 1 - j]))
            .collect::<Result<Vec<_>>>()?;
        Self::from_alpha_cuts(levels.to_vec(), cuts)
    }

    /// Decagonal variable on [`DEFAULT_LEVELS`].
    pub fn decagonal(vertices: &[f64; 10]) -> Result<Self> {
        Self::polygonal(vertices, &DEFAULT_LEVELS)
    }

    /// Assemble a variable from computed cuts.
    ///
    /// Cuts nested up to [`NESTING_TOLERANCE`] are accepted and clipped into
    /// exact nesting.
    pub fn from_alpha_cuts(levels: Vec<f64>, mut cuts: Vec<Interval>) -> Result<Self> {
        if levels.len() != cuts.len() {
            return Err(Error::DimensionMismatch { expected: levels.len(), found: cuts.len() });
        }
        let raw: Vec<(f64, f64)> = cuts.iter().map(|c| (c.lo, c.hi)).collect();
        if let Some(v) = validate_table(&levels, &raw).into_iter().next() {
            return Err(match v {
                Violation::Nesting { lower, upper } => Error::NotNested { lower, upper },
                other => Error::invalid(other.to_string()),
            });
        }
        for k in 1..cuts.len() {
            let outer = cuts[k - 1];
            let c = &mut cuts[k];
            c.lo = c.lo.clamp(outer.lo, outer.hi);
            c.hi = c.hi.clamp(c.lo, outer.hi);
        }
        Ok(Self { levels, cuts })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn cuts(&self) -> &[Interval] {
        &self.cuts
    }

    /// Cut at level 0.
    pub fn support(&self) -> Interval {
        self.cuts[0]
    }

    /// Cut at level 1.
    pub fn core(&self) -> Interval {
        self.cuts[self.cuts.len() - 1]
    }

    pub fn is_crisp(&self) -> bool {
        self.support().is_degenerate()
    }

    /// The α-cut, interpolating linearly between stored levels.
    pub fn alpha_cut(&self, alpha: f64) -> Result<Interval> {
        check_alpha(alpha)?;
        let k = self.levels.partition_point(|&l| l < alpha);
        if self.levels[k] == alpha {
            return Ok(self.cuts[k]);
        }
        let (a0, a1) = (self.levels[k - 1], self.levels[k]);
        let t = (alpha - a0) / (a1 - a0);
        let (c0, c1) = (self.cuts[k - 1], self.cuts[k]);
        let lo = c0.lo + t * (c1.lo - c0.lo);
        let hi = c0.hi + t * (c1.hi - c0.hi);
        // keep the interpolated cut inside its stored neighbours despite rounding
        let lo = lo.clamp(c0.lo, c1.lo);
        let hi = hi.clamp(c1.hi, c0.hi);
        Ok(Interval { lo, hi })
    }

    /// Membership degree of `z`: the largest α whose cut contains `z`.
    pub fn membership(&self, z: f64) -> f64 {
        if !self.support().contains(z) {
            return 0.0;
        }
        let left = self.sup_level(z, |c| c.lo <= z, |c| c.lo);
        let right = self.sup_level(z, |c| c.hi >= z, |c| c.hi);
        left.min(right)
    }

    // Largest level at which `inside` holds for the interpolated cut; the
    // endpoint selected by `endpoint` is monotone in the level.
    fn sup_level(
        &self,
        z: f64,
        inside: impl Fn(&Interval) -> bool,
        endpoint: impl Fn(&Interval) -> f64,
    ) -> f64 {
        let n = self.levels.len();
        // highest stored level that still contains z on this side
        let mut k = n - 1;
        while !inside(&self.cuts[k]) {
            k -= 1;
        }
        if k == n - 1 {
            return 1.0;
        }
        let (e0, e1) = (endpoint(&self.cuts[k]), endpoint(&self.cuts[k + 1]));
        let (a0, a1) = (self.levels[k], self.levels[k + 1]);
        if e1 == e0 {
            return a0;
        }
        let t = ((z - e0) / (e1 - e0)).clamp(0.0, 1.0);
        a0 + t * (a1 - a0)
    }

    /// True iff the variable is greater than or equal to `a`: `a` does not exceed the 0-cut.
    pub fn geq_scalar(&self, a: f64) -> bool {
        a <= self.support().lo
    }

    /// True iff the 0-cut lies at or below `a`.
    pub fn leq_scalar(&self, a: f64) -> bool {
        self.support().hi <= a
    }

    pub fn validate(&self) -> Vec<Violation> {
        let raw: Vec<(f64, f64)> = self.cuts.iter().map(|c| (c.lo, c.hi)).collect();
        validate_table(&self.levels, &raw)
    }

    /// Membership sampled at `count` evenly spaced abscissae over the 0-cut
    /// plus every stored cut endpoint.
    pub fn sample_membership(&self, count: usize) -> Vec<MembershipSample> {
        let s = self.support();
        let mut xs: Vec<f64> = if count < 2 || s.is_degenerate() {
            vec![s.lo]
        } else {
            (0..count).map(|i| s.lerp(i as f64 / (count - 1) as f64)).collect()
        };
        xs.extend(self.cuts.iter().flat_map(|c| [c.lo, c.hi]));
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.into_iter()
            .map(|x| MembershipSample { abscissa: x, degree: self.membership(x) })
            .collect()
    }

    /// Cut table as CSV with columns `alpha,lo,hi`.
    pub fn to_cut_csv(&self) -> String {
        let mut out = String::from("alpha,lo,hi\n");
        for (a, c) in self.levels.iter().zip(&self.cuts) {
            out.push_str(&format!("{a},{},{}\n", c.lo, c.hi));
        }
        out
    }

    /// Parse the output of [`to_cut_csv`](Self::to_cut_csv). Lines starting with `#` are skipped.
    pub fn from_cut_csv(text: &str) -> Result<Self> {
        let mut levels = Vec::new();
        let mut cuts = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') || line.starts_with("alpha") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 3 {
                return Err(Error::Parse(format!("expected alpha,lo,hi in {line:?}")));
            }
            let n = cols.len();
            let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
            levels.push(num(cols[n - 3])?);
            cuts.push(Interval::new(num(cols[n - 2])?, num(cols[n - 1])?)?);
        }
        Self::from_alpha_cuts(levels, cuts)
    }
}

/// Membership samples as CSV with columns `abscissa,degree`.
pub fn membership_csv(samples: &[MembershipSample]) -> String {
    let mut out = String::from("abscissa,degree\n");
    for s in samples {
        out.push_str(&format!("{},{}\n", s.abscissa, s.degree));
    }
    out
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// Validate a list of requested α levels: non-empty, each in [0, 1], strictly ascending.
pub fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::invalid("level list is empty"));
    }
    for &a in levels {
        check_alpha(a)?;
    }
    if levels.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("levels must be strictly ascending"));
    }
    Ok(())
}
