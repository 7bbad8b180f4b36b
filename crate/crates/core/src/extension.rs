//! Propagation of fuzzy inputs through crisp and stochastic maps.
//!
//! Every output α-cut is the image of the joint input α-cut, so each cut is
//! obtained by evaluating the map densely over a discretization of the joint
//! cut and taking the extrema, optionally followed by a local refinement
//! around the incumbent extremum. Stochastic maps are reduced to crisp ones by
//! Monte Carlo averaging over one shared set of draws (common random
//! numbers), which keeps the sampled objective a smooth function of the fuzzy
//! parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::DrawSet;
use crate::fuzzy::{check_levels, FuzzyVariable, Interval, MembershipSample};
use crate::interaction::{FuzzyVector, JointAlphaCut};

/// Points per polygonal joint cut.
pub const DEFAULT_RESOLUTION: usize = 181;
/// Points per axis of a box-shaped joint cut (corners always included).
pub const DEFAULT_BOX_RESOLUTION: usize = 11;
/// Monte Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// How joint α-cuts are discretized for optimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSampling {
    /// Points along a polygonal (fully interactive) cut.
    pub resolution: usize,
    /// Points per axis of a box (non-interactive) cut.
    pub box_resolution: usize,
    /// Refine each extremum by a local search around the best grid point.
    pub refine: bool,
}

impl Default for CutSampling {
    fn default() -> Self {
        Self { resolution: DEFAULT_RESOLUTION, box_resolution: DEFAULT_BOX_RESOLUTION, refine: false }
    }
}

impl CutSampling {
    /// Same resolution for polygonal cuts and box axes.
    pub fn uniform(resolution: usize) -> Self {
        Self { resolution, box_resolution: resolution, refine: false }
    }

    pub fn with_refinement(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.resolution < 2 || self.box_resolution < 2 {
            return Err(Error::invalid(format!(
                "cut resolution must be at least 2 (got {} and {})",
                self.resolution, self.box_resolution
            )));
        }
        Ok(())
    }

    fn resolution_for(&self, cut: &JointAlphaCut) -> usize {
        match cut {
            JointAlphaCut::Box { .. } => self.box_resolution,
            JointAlphaCut::Polyline(_) => self.resolution,
        }
    }

    /// Discretization of `cut` used by the optimizers.
    pub fn points(&self, cut: &JointAlphaCut) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        cut.discretize(self.resolution_for(cut))
    }
}

/// A deterministic map `z ↦ g(z)`, assumed continuous on the zero-cut.
pub trait CrispMap: Sync {
    fn eval(&self, z: &[f64]) -> Result<f64>;
}

impl<F> CrispMap for F
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn eval(&self, z: &[f64]) -> Result<f64> {
        self(z)
    }
}

/// `q(y, ·)` with the fuzzy parameters already fixed.
pub type BoundMap<'a> = Box<dyn Fn(&[f64]) -> Result<f64> + 'a>;

/// A map `(y, z) ↦ q(y, z)` of random inputs `y` and fuzzy parameters `z`.
///
/// Binding `z` first lets implementations do per-parameter work (fits,
/// tables) once per joint-cut point instead of once per draw.
pub trait StochasticMap: Sync {
    fn bind<'a>(&'a self, z: &[f64]) -> Result<BoundMap<'a>>;
}

impl<F> StochasticMap for F
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    fn bind<'a>(&'a self, z: &[f64]) -> Result<BoundMap<'a>> {
        let z = z.to_vec();
        Ok(Box::new(move |y| self(y, &z)))
    }
}

/// `q(y, ·)` for vector-valued maps, writing into a caller buffer.
pub type BoundVectorMap<'a> = Box<dyn Fn(&[f64], &mut [f64]) -> Result<()> + 'a>;

/// Vector-valued counterpart of [`StochasticMap`], e.g. a solution sampled at many points.
pub trait StochasticVectorMap: Sync {
    fn outputs(&self) -> usize;
    fn bind<'a>(&'a self, z: &[f64]) -> Result<BoundVectorMap<'a>>;
}

fn wrap(z: &[f64], e: Error) -> Error {
    match e {
        e @ Error::Evaluation { .. } => e,
        e => Error::Evaluation { z: z.to_vec(), source: Box::new(e) },
    }
}

/// Extrema of several outputs over the joint cuts of a fuzzy vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CutSweep {
    levels: Vec<f64>,
    // [output][level]
    cuts: Vec<Vec<Interval>>,
}

impl CutSweep {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn outputs(&self) -> usize {
        self.cuts.len()
    }

    /// Extrema found at each level before nesting is enforced.
    pub fn raw_cuts(&self, output: usize) -> &[Interval] {
        &self.cuts[output]
    }

    /// Output `output` as a fuzzy variable.
    ///
    /// Joint cuts are nested, so exact extrema are nested too; discretized
    /// extrema may miss that by a grid effect. Each cut is therefore widened
    /// to the hull of itself and all higher cuts, from the top level down.
    pub fn variable(&self, output: usize) -> Result<FuzzyVariable> {
        FuzzyVariable::from_alpha_cuts(self.levels.clone(), self.nested_cuts(output))
    }

    /// Cuts of `output` after the top-down hull sweep described at [`variable`](Self::variable).
    pub fn nested_cuts(&self, output: usize) -> Vec<Interval> {
        let mut cuts = self.cuts[output].clone();
        for j in (0..cuts.len().saturating_sub(1)).rev() {
            cuts[j] = cuts[j].hull(&cuts[j + 1]);
        }
        cuts
    }

    pub fn variables(&self) -> Result<Vec<FuzzyVariable>> {
        (0..self.outputs()).map(|o| self.variable(o)).collect()
    }

    /// Outputs `range` read as CDF values on `grid`, one p-box per level.
    pub fn pbox(&self, range: std::ops::Range<usize>, grid: &[f64]) -> Result<PBoxFamily> {
        if range.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: range.len() });
        }
        let cuts: Vec<Vec<Interval>> = range.map(|o| self.nested_cuts(o)).collect();
        let left = (0..self.levels.len()).map(|j| cuts.iter().map(|c| c[j].hi()).collect()).collect();
        let right = (0..self.levels.len()).map(|j| cuts.iter().map(|c| c[j].lo()).collect()).collect();
        PBoxFamily::new(grid.to_vec(), self.levels.clone(), left, right)
    }
}

/// Evaluate `f` over the discretized joint cut at every level and record the
/// extrema of each of its `outputs` components.
///
/// Points are evaluated in parallel and reduced in index order, so results do
/// not depend on the number of worker threads. Ties go to the first point.
pub fn evaluate_over_cuts<F>(
    fvec: &FuzzyVector,
    levels: &[f64],
    sampling: &CutSampling,
    outputs: usize,
    f: F,
) -> Result<CutSweep>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    check_levels(levels)?;
    sampling.validate()?;
    let checked = |z: &[f64]| -> Result<Vec<f64>> {
        let v = f(z).map_err(|e| wrap(z, e))?;
        if v.len() != outputs {
            return Err(wrap(z, Error::DimensionMismatch { expected: outputs, found: v.len() }));
        }
        if let Some(&bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(wrap(z, Error::NonFinite(bad)));
        }
        Ok(v)
    };
    let mut cuts = vec![Vec::with_capacity(levels.len()); outputs];
    for &alpha in levels {
        let cut = fvec.joint_alpha_cut(alpha)?;
        let points = sampling.points(&cut)?;
        let values: Vec<Vec<f64>> = points.par_iter().map(|z| checked(z)).collect::<Result<_>>()?;
        for (o, out) in cuts.iter_mut().enumerate() {
            let (mut imin, mut imax) = (0, 0);
            for (k, v) in values.iter().enumerate() {
                if v[o] < values[imin][o] {
                    imin = k;
                }
                if v[o] > values[imax][o] {
                    imax = k;
                }
            }
            let (mut lo, mut hi) = (values[imin][o], values[imax][o]);
            if sampling.refine {
                let scalar = |z: &[f64]| checked(z).map(|v| v[o]);
                let step = 1.0 / (sampling.resolution_for(&cut) - 1) as f64;
                lo = lo.min(refine(&cut, &points[imin], step, 1.0, &scalar)?);
                hi = hi.max(-refine(&cut, &points[imax], step, -1.0, &scalar)?);
            }
            out.push(Interval::new(lo, hi)?);
        }
    }
    Ok(CutSweep { levels: levels.to_vec(), cuts })
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

// Golden-section minimum of `f` on [a, b]; returns (argmin, min).
fn golden(mut a: f64, mut b: f64, f: &mut dyn FnMut(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..40 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

// Local minimum of `sign * g` near `start`, searching one grid step (as a
// fraction `step` of the cut extent) to each side. Returns the minimum of
// `sign * g`, never worse than the starting value.
fn refine(
    cut: &JointAlphaCut,
    start: &[f64],
    step: f64,
    sign: f64,
    g: &dyn Fn(&[f64]) -> Result<f64>,
) -> Result<f64> {
    let mut best = sign * g(start)?;
    match cut {
        JointAlphaCut::Box { intervals } => {
            let mut z = start.to_vec();
            for _ in 0..3 {
                for (i, iv) in intervals.iter().enumerate() {
                    if iv.is_degenerate() {
                        continue;
                    }
                    let h = step * iv.width();
                    let (a, b) = ((z[i] - h).max(iv.lo()), (z[i] + h).min(iv.hi()));
                    let mut probe = z.clone();
                    let (t, v) = golden(a, b, &mut |t| {
                        probe[i] = t;
                        Ok(sign * g(&probe)?)
                    })?;
                    if v < best {
                        best = v;
                        z[i] = t;
                    }
                }
            }
        }
        JointAlphaCut::Polyline(chain) => {
            let total = chain.total_length();
            if total > 0.0 {
                let s0 = chain.arc_position(start);
                let h = step * total;
                let (a, b) = ((s0 - h).max(0.0), (s0 + h).min(total));
                let (_, v) = golden(a, b, &mut |s| Ok(sign * g(&chain.point_at(s.clamp(0.0, total))?)?))?;
                best = best.min(v);
            }
        }
    }
    Ok(best)
}

/// Fuzzy output `g(z̃)`: per level, the extrema of `g` over the joint cut.
pub fn extend(g: &impl CrispMap, fvec: &FuzzyVector, levels: &[f64], sampling: &CutSampling) -> Result<FuzzyVariable> {
    evaluate_over_cuts(fvec, levels, sampling, 1, |z| Ok(vec![g.eval(z)?]))?.variable(0)
}

/// Dense grid over the zero-cut with joint membership degrees, for [`extend_oracle`].
///
/// Box cuts get a tensor grid of `resolution` points per axis; polygonal cuts
/// get `resolution` points along the chain (joint membership vanishes off it).
pub fn oracle_grid(fvec: &FuzzyVector, resolution: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let cut = fvec.joint_alpha_cut(0.0)?;
    cut.discretize(resolution)?
        .into_iter()
        .map(|z| fvec.joint_membership(&z).map(|mu| (z, mu)))
        .collect()
}

/// Brute-force extension principle: for each output bin (between consecutive
/// `edges`), the largest joint membership among grid points mapped into it.
///
/// Values outside `[edges[0], edges[last]]` are ignored; the last bin is closed.
pub fn extend_oracle(g: &impl CrispMap, z_grid: &[(Vec<f64>, f64)], edges: &[f64]) -> Result<Vec<MembershipSample>> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("output bin edges must be strictly ascending with at least two entries"));
    }
    let bins = edges.len() - 1;
    let values: Vec<f64> = z_grid.par_iter().map(|(z, _)| g.eval(z).map_err(|e| wrap(z, e))).collect::<Result<_>>()?;
    let mut degree = vec![0.0f64; bins];
    for (v, (_, mu)) in values.iter().zip(z_grid) {
        if !(*v >= edges[0] && *v <= edges[bins]) {
            continue;
        }
        let k = (edges.partition_point(|&e| e <= *v) - 1).min(bins - 1);
        degree[k] = degree[k].max(*mu);
    }
    Ok(degree
        .into_iter()
        .enumerate()
        .map(|(k, d)| MembershipSample { abscissa: 0.5 * (edges[k] + edges[k + 1]), degree: d })
        .collect())
}

/// Cut at `alpha` of a sampled membership function: the range of abscissae
/// with degree at least `alpha`, or `None` if there are none.
pub fn sampled_cut(samples: &[MembershipSample], alpha: f64) -> Option<Interval> {
    let mut hits = samples.iter().filter(|s| s.degree >= alpha).map(|s| s.abscissa);
    let first = hits.next()?;
    let (lo, hi) = hits.fold((first, first), |(lo, hi), x| (lo.min(x), hi.max(x)));
    Interval::new(lo, hi).ok()
}

fn require_draws(draws: &DrawSet) -> Result<()> {
    if draws.is_empty() {
        return Err(Error::invalid("at least one Monte Carlo draw is required"));
    }
    Ok(())
}

fn sample_mean(q: &impl StochasticMap, z: &[f64], draws: &DrawSet) -> Result<f64> {
    let bound = q.bind(z)?;
    let mut sum = 0.0;
    for y in draws.rows() {
        sum += bound(y)?;
    }
    Ok(sum / draws.len() as f64)
}

/// Fuzzy expectation `E[q(y, z̃)]`, with the same draws at every joint-cut point.
pub fn fuzzy_expectation(
    q: &impl StochasticMap,
    fvec: &FuzzyVector,
    draws: &DrawSet,
    levels: &[f64],
    sampling: &CutSampling,
) -> Result<FuzzyVariable> {
    require_draws(draws)?;
    evaluate_over_cuts(fvec, levels, sampling, 1, |z| Ok(vec![sample_mean(q, z, draws)?]))?.variable(0)
}

/// Componentwise fuzzy expectation of a vector-valued map.
pub fn fuzzy_expectation_vector(
    q: &impl StochasticVectorMap,
    fvec: &FuzzyVector,
    draws: &DrawSet,
    levels: &[f64],
    sampling: &CutSampling,
) -> Result<Vec<FuzzyVariable>> {
    require_draws(draws)?;
    let n = q.outputs();
    evaluate_over_cuts(fvec, levels, sampling, n, |z| {
        let bound = q.bind(z)?;
        let mut sum = vec![0.0; n];
        let mut buf = vec![0.0; n];
        for y in draws.rows() {
            bound(y, &mut buf)?;
            sum.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
        }
        Ok(sum.into_iter().map(|s| s / draws.len() as f64).collect())
    })?
    .variables()
}

/// Empirical CDF `#{v ≤ u0} / n` of ascending `sorted` at each grid point.
pub fn ecdf_at(sorted: &[f64], grid: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    grid.iter().map(|&u0| sorted.partition_point(|&v| v <= u0) as f64 / n).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("evaluation grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("evaluation grid must be finite and strictly ascending"));
    }
    Ok(())
}

/// Sorted samples `q(y_i, z)` over all draws.
pub fn sorted_samples(q: &impl StochasticMap, z: &[f64], draws: &DrawSet) -> Result<Vec<f64>> {
    let bound = q.bind(z)?;
    let mut v: Vec<f64> = draws.rows().map(|y| bound(y)).collect::<Result<_>>()?;
    if let Some(&bad) = v.iter().find(|x| x.is_nan()) {
        return Err(Error::NonFinite(bad));
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Fuzzy CDF of a random variable whose distribution has fuzzy parameters:
/// `cdf_family(y0, θ)` is the CDF at `y0` for parameters `θ`.
pub fn fuzzy_cdf_type1<F>(
    cdf_family: F,
    fuzzy_theta: &FuzzyVector,
    y0_grid: &[f64],
    levels: &[f64],
    sampling: &CutSampling,
) -> Result<PBoxFamily>
where
    F: Fn(f64, &[f64]) -> Result<f64> + Sync,
{
    check_grid(y0_grid)?;
    let sweep = evaluate_over_cuts(fuzzy_theta, levels, sampling, y0_grid.len(), |theta| {
        y0_grid.iter().map(|&y0| cdf_family(y0, theta)).collect()
    })?;
    sweep.pbox(0..y0_grid.len(), y0_grid)
}

/// Fuzzy CDF of `q(y, z̃)`: per grid point `u0`, the fuzzy expectation of
/// `I[q ≤ u0]`, with one set of draws shared across points and the grid.
pub fn fuzzy_cdf_type2(
    q: &impl StochasticMap,
    fvec: &FuzzyVector,
    draws: &DrawSet,
    u0_grid: &[f64],
    levels: &[f64],
    sampling: &CutSampling,
) -> Result<PBoxFamily> {
    require_draws(draws)?;
    check_grid(u0_grid)?;
    let sweep = evaluate_over_cuts(fvec, levels, sampling, u0_grid.len(), |z| {
        Ok(ecdf_at(&sorted_samples(q, z, draws)?, u0_grid))
    })?;
    sweep.pbox(0..u0_grid.len(), u0_grid)
}

/// Fuzzy probability of failure `P(g(y, z̃) ≤ 0)` for a limit-state function `g`.
pub fn failure_probability(
    g: &impl StochasticMap,
    fvec: &FuzzyVector,
    draws: &DrawSet,
    levels: &[f64],
    sampling: &CutSampling,
) -> Result<FuzzyVariable> {
    require_draws(draws)?;
    evaluate_over_cuts(fvec, levels, sampling, 1, |z| {
        let bound = g.bind(z)?;
        let mut failures = 0usize;
        for y in draws.rows() {
            if bound(y)? <= 0.0 {
                failures += 1;
            }
        }
        Ok(vec![failures as f64 / draws.len() as f64])
    })?
    .variable(0)
}

/// A nested family of p-boxes: per level, left (upper) and right (lower)
/// CDF envelopes on a common grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PBoxFamily {
    grid: Vec<f64>,
    levels: Vec<f64>,
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
}

impl PBoxFamily {
    pub fn new(grid: Vec<f64>, levels: Vec<f64>, left: Vec<Vec<f64>>, right: Vec<Vec<f64>>) -> Result<Self> {
        check_grid(&grid)?;
        check_levels(&levels)?;
        for env in [&left, &right] {
            if env.len() != levels.len() {
                return Err(Error::DimensionMismatch { expected: levels.len(), found: env.len() });
            }
            for row in env.iter() {
                if row.len() != grid.len() {
                    return Err(Error::DimensionMismatch { expected: grid.len(), found: row.len() });
                }
                if let Some(&bad) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::invalid(format!("CDF value {bad} outside [0, 1]")));
                }
            }
        }
        Ok(Self { grid, levels, left, right })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Left (upper) envelope at level index `j`.
    pub fn left(&self, j: usize) -> &[f64] {
        &self.left[j]
    }

    /// Right (lower) envelope at level index `j`.
    pub fn right(&self, j: usize) -> &[f64] {
        &self.right[j]
    }

    /// Violated structural properties, empty when the family is well formed:
    /// right ≤ left, both envelopes nondecreasing, bands nested across levels.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for (j, a) in self.levels.iter().enumerate() {
            let (l, r) = (&self.left[j], &self.right[j]);
            for k in 0..self.grid.len() {
                if r[k] > l[k] {
                    problems.push(format!("alpha {a}, u0 {}: right {} above left {}", self.grid[k], r[k], l[k]));
                }
                if k > 0 && (l[k] < l[k - 1] || r[k] < r[k - 1]) {
                    problems.push(format!("alpha {a}: envelope decreases at u0 {}", self.grid[k]));
                }
                if j > 0 && (l[k] > self.left[j - 1][k] || r[k] < self.right[j - 1][k]) {
                    problems.push(format!(
                        "alpha {a}, u0 {}: band not inside the band at alpha {}",
                        self.grid[k],
                        self.levels[j - 1]
                    ));
                }
            }
        }
        problems
    }

    /// True if at every level and grid point the band of `other` lies inside this one.
    pub fn contains(&self, other: &PBoxFamily) -> bool {
        self.grid == other.grid
            && self.levels == other.levels
            && (0..self.levels.len()).all(|j| {
                (0..self.grid.len())
                    .all(|k| other.left[j][k] <= self.left[j][k] && other.right[j][k] >= self.right[j][k])
            })
    }

    /// CSV with columns `alpha,u0,F_left,F_right`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,u0,F_left,F_right\n");
        for (j, a) in self.levels.iter().enumerate() {
            for (k, u0) in self.grid.iter().enumerate() {
                out.push_str(&format!("{a},{u0},{},{}\n", self.left[j][k], self.right[j][k]));
            }
        }
        out
    }

    /// Parse [`to_csv`](Self::to_csv) output; `#` lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<[f64; 4]> = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') || line.starts_with("alpha") {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
                .collect::<Result<_>>()?;
            let n = cols.len();
            if n < 4 {
                return Err(Error::Parse(format!("expected alpha,u0,F_left,F_right in {line:?}")));
            }
            rows.push([cols[n - 4], cols[n - 3], cols[n - 2], cols[n - 1]]);
        }
        let mut levels: Vec<f64> = Vec::new();
        let mut grid: Vec<f64> = Vec::new();
        for r in &rows {
            if levels.last() != Some(&r[0]) {
                levels.push(r[0]);
            }
            if levels.len() == 1 {
                grid.push(r[1]);
            }
        }
        if rows.len() != levels.len() * grid.len() {
            return Err(Error::Parse("p-box rows do not form a level × grid table".into()));
        }
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for chunk in rows.chunks(grid.len()) {
            if chunk.iter().zip(&grid).any(|(r, g)| r[1] != *g) {
                return Err(Error::Parse("p-box grid differs between levels".into()));
            }
            left.push(chunk.iter().map(|r| r[2]).collect());
            right.push(chunk.iter().map(|r| r[3]).collect());
        }
        Self::new(grid, levels, left, right)
    }
}
