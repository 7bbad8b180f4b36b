//! Fuzzy vectors and their joint α-cuts.
//!
//! Non-interactive components have box-shaped joint cuts, the Cartesian
//! product of the marginal cuts. Fully interactive components have a joint
//! cut that is a monotone polygonal chain inside that box: starting from the
//! diagonal of the modal box, each lower stored level prepends the diagonal of
//! the left residual box and appends the diagonal of the right residual box.
//! The chain is parameterized by arc length, so optimizing over it is a
//! one-dimensional problem whatever the number of components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{check_alpha, FuzzyVariable, Interval};

/// How the components of a [`FuzzyVector`] relate to each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    NonInteractive,
    /// Polygonal, positively comonotone full interaction.
    FullyInteractive,
}

impl Interaction {
    pub fn label(&self) -> &'static str {
        match self {
            Interaction::NonInteractive => "non",
            Interaction::FullyInteractive => "full",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzyVector {
    components: Vec<FuzzyVariable>,
    mode: Interaction,
}

impl FuzzyVector {
    pub fn new(components: Vec<FuzzyVariable>, mode: Interaction) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("a fuzzy vector needs at least one component"));
        }
        Ok(Self { components, mode })
    }

    pub fn non_interactive(components: Vec<FuzzyVariable>) -> Result<Self> {
        Self::new(components, Interaction::NonInteractive)
    }

    pub fn fully_interactive(components: Vec<FuzzyVariable>) -> Result<Self> {
        Self::new(components, Interaction::FullyInteractive)
    }

    pub fn with_mode(&self, mode: Interaction) -> Self {
        Self { components: self.components.clone(), mode }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[FuzzyVariable] {
        &self.components
    }

    pub fn mode(&self) -> Interaction {
        self.mode
    }

    /// Union of the components' stored levels.
    pub fn stored_levels(&self) -> Vec<f64> {
        let mut levels: Vec<f64> =
            self.components.iter().flat_map(|c| c.levels().iter().copied()).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels
    }

    pub fn marginal_cuts(&self, alpha: f64) -> Result<Vec<Interval>> {
        self.components.iter().map(|c| c.alpha_cut(alpha)).collect()
    }

    pub fn joint_alpha_cut(&self, alpha: f64) -> Result<JointAlphaCut> {
        check_alpha(alpha)?;
        match self.mode {
            Interaction::NonInteractive => {
                Ok(JointAlphaCut::Box { intervals: self.marginal_cuts(alpha)? })
            }
            Interaction::FullyInteractive => Ok(JointAlphaCut::Polyline(self.chain(alpha)?)),
        }
    }

    fn chain(&self, alpha: f64) -> Result<Polyline> {
        let mut betas = vec![alpha];
        betas.extend(self.stored_levels().into_iter().filter(|&l| l > alpha));
        let cuts = betas.iter().map(|&b| self.marginal_cuts(b)).collect::<Result<Vec<_>>>()?;
        let mut vertices: Vec<Vec<f64>> =
            cuts.iter().map(|c| c.iter().map(Interval::lo).collect()).collect();
        vertices.extend(cuts.iter().rev().map(|c| c.iter().map(Interval::hi).collect()));
        Polyline::new(vertices)
    }

    /// Joint membership degree of `z`.
    ///
    /// Non-interactive: the minimum of the marginal degrees. Fully
    /// interactive: the same minimum on the 0-level chain, zero off it.
    pub fn joint_membership(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: z.len() });
        }
        let degree = self
            .components
            .iter()
            .zip(z)
            .map(|(c, &x)| c.membership(x))
            .fold(1.0, f64::min);
        match self.mode {
            Interaction::NonInteractive => Ok(degree),
            Interaction::FullyInteractive => {
                let JointAlphaCut::Polyline(chain) = self.joint_alpha_cut(0.0)? else {
                    unreachable!()
                };
                let scale = chain.total_length().max(1.0);
                Ok(if chain.distance_to(z) <= 1e-9 * scale { degree } else { 0.0 })
            }
        }
    }

    /// The point whose coordinates are the midpoints of the modal cuts.
    pub fn modal_point(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.core().midpoint()).collect()
    }
}

/// A joint α-cut.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JointAlphaCut {
    Box { intervals: Vec<Interval> },
    Polyline(Polyline),
}

impl JointAlphaCut {
    pub fn dim(&self) -> usize {
        match self {
            JointAlphaCut::Box { intervals } => intervals.len(),
            JointAlphaCut::Polyline(p) => p.dim(),
        }
    }

    /// Projection onto each coordinate.
    pub fn bounding_box(&self) -> Vec<Interval> {
        match self {
            JointAlphaCut::Box { intervals } => intervals.clone(),
            JointAlphaCut::Polyline(p) => (0..p.dim())
                .map(|i| {
                    let (lo, hi) = p.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v[i]), hi.max(v[i]))
                    });
                    Interval::new(lo, hi).expect("finite chain")
                })
                .collect(),
        }
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        match self {
            JointAlphaCut::Box { intervals } => intervals
                .iter()
                .zip(z)
                .all(|(c, &x)| c.lo() - tol <= x && x <= c.hi() + tol),
            JointAlphaCut::Polyline(p) => p.distance_to(z) <= tol,
        }
    }

    /// Finite point set covering the cut.
    ///
    /// Boxes give a tensor grid with `resolution` points per non-degenerate
    /// axis, corners included. Chains give `resolution` points evenly spaced
    /// in arc length, with every vertex snapped onto its nearest sample so
    /// the modal point is always evaluated.
    pub fn discretize(&self, resolution: usize) -> Result<Vec<Vec<f64>>> {
        if resolution < 2 {
            return Err(Error::invalid(format!("resolution {resolution} < 2")));
        }
        match self {
            JointAlphaCut::Box { intervals } => Ok(tensor_grid(intervals, resolution)),
            JointAlphaCut::Polyline(p) => Ok(p.discretize(resolution)),
        }
    }
}

fn tensor_grid(intervals: &[Interval], resolution: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = intervals
        .iter()
        .map(|c| {
            if c.is_degenerate() {
                vec![c.lo()]
            } else {
                (0..resolution)
                    .map(|k| match k {
                        0 => c.lo(),
                        k if k == resolution - 1 => c.hi(),
                        k => c.lerp(k as f64 / (resolution - 1) as f64),
                    })
                    .collect()
            }
        })
        .collect();
    let mut points = vec![Vec::with_capacity(intervals.len())];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points
}

/// A polygonal chain with its cumulative arc-length table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolylineRepr", into = "PolylineRepr")]
pub struct Polyline {
    vertices: Vec<Vec<f64>>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolylineRepr {
    vertices: Vec<Vec<f64>>,
    #[serde(default)]
    cumulative_arc_length: Vec<f64>,
    #[serde(default)]
    total_length: f64,
}

impl TryFrom<PolylineRepr> for Polyline {
    type Error = Error;

    fn try_from(r: PolylineRepr) -> Result<Self> {
        Polyline::new(r.vertices)
    }
}

impl From<Polyline> for PolylineRepr {
    fn from(p: Polyline) -> Self {
        let total_length = p.total_length();
        PolylineRepr { vertices: p.vertices, cumulative_arc_length: p.cumulative, total_length }
    }
}

impl Polyline {
    /// Build a chain; repeated consecutive vertices are merged so every
    /// stored segment has positive length.
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::invalid("polyline needs at least one vertex"));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::invalid("polyline vertices must have at least one coordinate"));
        }
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("polyline vertex is not finite"));
            }
            if kept.last().is_some_and(|last| distance(last, &v) == 0.0) {
                continue;
            }
            kept.push(v);
        }
        let mut cumulative = Vec::with_capacity(kept.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in kept.windows(2) {
            acc += distance(&w[0], &w[1]);
            cumulative.push(acc);
        }
        Ok(Self { vertices: kept, cumulative })
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn cumulative_arc_length(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    /// Point at arc length `s` from the first vertex.
    pub fn point_at(&self, s: f64) -> Result<Vec<f64>> {
        let total = self.total_length();
        if !(0.0..=total).contains(&s) {
            return Err(Error::ArcLengthOutOfRange { s, total });
        }
        Ok(self.point_unchecked(s))
    }

    fn point_unchecked(&self, s: f64) -> Vec<f64> {
        let n = self.vertices.len();
        if s >= self.total_length() {
            return self.vertices[n - 1].clone();
        }
        // segment k spans cumulative[k]..cumulative[k + 1]
        let k = self.cumulative.partition_point(|&c| c <= s).saturating_sub(1).min(n - 2);
        let (c0, c1) = (self.cumulative[k], self.cumulative[k + 1]);
        let t = (s - c0) / (c1 - c0);
        let (a, b) = (&self.vertices[k], &self.vertices[k + 1]);
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    }

    /// Euclidean distance from `z` to the chain.
    pub fn distance_to(&self, z: &[f64]) -> f64 {
        if self.vertices.len() == 1 {
            return distance(&self.vertices[0], z);
        }
        self.vertices
            .windows(2)
            .map(|w| segment_distance(&w[0], &w[1], z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Arc length of the chain point nearest to `z` (first one on ties).
    pub fn arc_position(&self, z: &[f64]) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for (k, w) in self.vertices.windows(2).enumerate() {
            let t = segment_parameter(&w[0], &w[1], z);
            let seg = self.cumulative[k + 1] - self.cumulative[k];
            let d = segment_distance(&w[0], &w[1], z);
            if d < best.0 {
                best = (d, self.cumulative[k] + t * seg);
            }
        }
        best.1
    }

    fn discretize(&self, count: usize) -> Vec<Vec<f64>> {
        let total = self.total_length();
        if total == 0.0 {
            return vec![self.vertices[0].clone()];
        }
        let step = total / (count - 1) as f64;
        // (arc length, vertex index if snapped)
        let mut samples: Vec<(f64, Option<usize>)> = (0..count)
            .map(|k| match k {
                0 => (0.0, Some(0)),
                k if k == count - 1 => (total, Some(self.vertices.len() - 1)),
                k => (k as f64 * step, None),
            })
            .collect();
        let mut extra = Vec::new();
        for v in 1..self.vertices.len() - 1 {
            let c = self.cumulative[v];
            let nearest = (c / step).round() as usize;
            let candidates = [nearest, nearest.saturating_sub(1), (nearest + 1).min(count - 1)];
            let free = candidates
                .into_iter()
                .filter(|&k| samples[k].1.is_none())
                .min_by(|&a, &b| (a as f64 * step - c).abs().total_cmp(&(b as f64 * step - c).abs()));
            match free {
                Some(k) => samples[k] = (c, Some(v)),
                None => extra.push((c, Some(v))),
            }
        }
        samples.extend(extra);
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        samples
            .into_iter()
            .map(|(s, v)| match v {
                Some(v) => self.vertices[v].clone(),
                None => self.point_unchecked(s),
            })
            .collect()
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

// Parameter in [0, 1] of the point of segment [a, b] nearest to z.
fn segment_parameter(a: &[f64], b: &[f64], z: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|d| d * d).sum();
    if len2 == 0.0 {
        0.0
    } else {
        (ab.iter().zip(a.iter().zip(z)).map(|(d, (x, p))| d * (p - x)).sum::<f64>() / len2).clamp(0.0, 1.0)
    }
}

fn segment_distance(a: &[f64], b: &[f64], z: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let t = segment_parameter(a, b, z);
    a.iter()
        .zip(&ab)
        .zip(z)
        .map(|((x, d), p)| {
            let q = x + t * d;
            (q - p) * (q - p)
        })
        .sum::<f64>()
        .sqrt()
}

/// Points as CSV with columns `z1,...,zn`.
pub fn points_csv(points: &[Vec<f64>]) -> String {
    let dim = points.first().map_or(0, Vec::len);
    let header: Vec<String> = (1..=dim).map(|i| format!("z{i}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    for p in points {
        let row: Vec<String> = p.iter().map(f64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_one(mode: Interaction) -> FuzzyVector {
        FuzzyVector::new(
            vec![
                FuzzyVariable::triangular(1.00, 1.06, 1.20).unwrap(),
                FuzzyVariable::triangular(0.10, 0.13, 0.20).unwrap(),
            ],
            mode,
        )
        .unwrap()
    }

    #[test]
    fn box_zero_cut() {
        let cut = example_one(Interaction::NonInteractive).joint_alpha_cut(0.0).unwrap();
        assert_eq!(
            cut,
            JointAlphaCut::Box {
                intervals: vec![Interval::new(1.00, 1.20).unwrap(), Interval::new(0.10, 0.20).unwrap()]
            }
        );
    }

    #[test]
    fn chain_zero_cut() {
        let JointAlphaCut::Polyline(p) = example_one(Interaction::FullyInteractive).joint_alpha_cut(0.0).unwrap()
        else {
            panic!("expected a chain")
        };
        assert_eq!(p.vertices(), &[vec![1.00, 0.10], vec![1.06, 0.13], vec![1.20, 0.20]]);
        let l1 = (0.06f64.powi(2) + 0.03f64.powi(2)).sqrt();
        let l2 = (0.14f64.powi(2) + 0.07f64.powi(2)).sqrt();
        assert!((p.total_length() - (l1 + l2)).abs() < 1e-12);
        assert!((p.total_length() - 0.22360).abs() < 1e-5);

        assert_eq!(p.point_at(0.0).unwrap(), vec![1.00, 0.10]);
        assert_eq!(p.point_at(p.total_length()).unwrap(), vec![1.20, 0.20]);
        let modal = p.point_at(p.cumulative_arc_length()[1]).unwrap();
        assert!((modal[0] - 1.06).abs() < 1e-12 && (modal[1] - 0.13).abs() < 1e-12);
        assert!(p.point_at(p.total_length() + 1e-3).is_err());
        assert!(p.point_at(-1e-3).is_err());
    }

    #[test]
    fn modal_chain_collapses() {
        let cut = example_one(Interaction::FullyInteractive).joint_alpha_cut(1.0).unwrap();
        let JointAlphaCut::Polyline(p) = cut else { panic!() };
        assert_eq!(p.vertices().len(), 1);
        assert_eq!(p.total_length(), 0.0);
        assert_eq!(JointAlphaCut::Polyline(p).discretize(181).unwrap(), vec![vec![1.06, 0.13]]);
    }

    #[test]
    fn alpha_checked() {
        assert!(example_one(Interaction::FullyInteractive).joint_alpha_cut(1.1).is_err());
    }

    #[test]
    fn discretize_box_corners() {
        let cut = example_one(Interaction::NonInteractive).joint_alpha_cut(0.0).unwrap();
        let pts = cut.discretize(2).unwrap();
        assert_eq!(pts, vec![vec![1.0, 0.1], vec![1.0, 0.2], vec![1.2, 0.1], vec![1.2, 0.2]]);
        assert_eq!(cut.discretize(11).unwrap().len(), 121);
        assert!(cut.discretize(1).is_err());
    }

    #[test]
    fn discretize_chain() {
        let two = JointAlphaCut::Polyline(Polyline::new(vec![vec![0.0, 0.0], vec![1.0, 2.0]]).unwrap());
        assert_eq!(two.discretize(2).unwrap(), vec![vec![0.0, 0.0], vec![1.0, 2.0]]);

        let cut = example_one(Interaction::FullyInteractive).joint_alpha_cut(0.0).unwrap();
        let pts = cut.discretize(181).unwrap();
        assert_eq!(pts.len(), 181);
        assert!(pts.contains(&vec![1.06, 0.13]));
        assert_eq!(pts[0], vec![1.00, 0.10]);
        assert_eq!(pts[180], vec![1.20, 0.20]);
    }

    #[test]
    fn membership_off_chain_is_zero() {
        let v = example_one(Interaction::FullyInteractive);
        assert_eq!(v.joint_membership(&[1.06, 0.13]).unwrap(), 1.0);
        assert!((v.joint_membership(&[1.03, 0.115]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(v.joint_membership(&[1.03, 0.17]).unwrap(), 0.0);
        let b = example_one(Interaction::NonInteractive);
        assert!((b.joint_membership(&[1.03, 0.165]).unwrap() - 0.5).abs() < 1e-12);
        assert!((b.joint_membership(&[1.03, 0.17]).unwrap() - 3.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn json_is_tagged() {
        let cut = example_one(Interaction::FullyInteractive).joint_alpha_cut(0.0).unwrap();
        let s = serde_json::to_string(&cut).unwrap();
        assert!(s.starts_with(r#"{"kind":"polyline","vertices""#), "{s}");
        assert!(s.contains("total_length"));
        let back: JointAlphaCut = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cut);
        let b = example_one(Interaction::NonInteractive).joint_alpha_cut(0.5).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        assert!(s.starts_with(r#"{"kind":"box","intervals""#), "{s}");
    }

    #[test]
    fn csv_dump() {
        let csv = points_csv(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(csv, "z1,z2\n1,2\n3,4\n");
    }
}
