//! From a binary fiber map to fuzzy moments of the compliance.
//!
//! The map is cut into square elements whose effective modulus is the
//! harmonic mean of the pixel moduli; rows of elements form bars, columns
//! form stations. Sample moments of the compliance `b = 1/a` are computed per
//! station across bars, and each moment's histogram over the stations is
//! turned into a polygonal membership function.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{check_levels, FuzzyVariable, Interval, DEFAULT_LEVELS};
use crate::interaction::FuzzyVector;
use crate::translation::MomentSet;

/// Fiber modulus in GPa.
pub const A_FIBER: f64 = 24.0;
/// Matrix modulus in GPa.
pub const A_MATRIX: f64 = 3.6;
/// Element edge in pixels (1 px = 1 μm).
pub const ELEMENT_PX: usize = 10;
/// Default histogram bin count for membership fitting.
pub const DEFAULT_BINS: usize = 20;

/// Decagonal vertices of the fuzzy mean, standard deviation, skewness and
/// excess kurtosis of the composite compliance (1/GPa for the first two).
pub const COMPOSITE_MOMENT_VERTICES: [[f64; 10]; 4] = [
    [0.1222, 0.1249, 0.1277, 0.1304, 0.1330, 0.1360, 0.1388, 0.1445, 0.1502, 0.1559],
    [0.0200, 0.0217, 0.0236, 0.0236, 0.0285, 0.0345, 0.0360, 0.0360, 0.0408, 0.0430],
    [0.0, 0.25, 0.50, 0.75, 1.00, 1.20, 1.25, 1.50, 1.75, 2.00],
    [-1.00, -0.55, -0.20, 0.0, 0.50, 1.00, 1.50, 2.00, 3.30, 4.50],
];

/// The four decagonal moment variables of the composite, fully interactive.
pub fn composite_moments() -> Result<FuzzyVector> {
    let vars = COMPOSITE_MOMENT_VERTICES.iter().map(FuzzyVariable::decagonal).collect::<Result<Vec<_>>>()?;
    build_moment_vector(&vars)
}

/// Binary occupancy map: 1 = fiber, 0 = matrix, row-major from the top row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelMap {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// Run-length form of a [`PixelMap`]: `runs` are `[value, length]` pairs in row-major order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLengthMap {
    pub width: usize,
    pub height: usize,
    pub runs: Vec<[usize; 2]>,
}

impl PixelMap {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("pixel map dimensions must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, found: data.len() });
        }
        if data.iter().any(|&v| v > 1) {
            return Err(Error::invalid("pixel occupancy must be 0 or 1"));
        }
        Ok(Self { width, height, data })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Fraction of fiber pixels.
    pub fn occupancy_fraction(&self) -> f64 {
        self.data.iter().map(|&v| v as usize).sum::<usize>() as f64 / self.data.len() as f64
    }

    /// Binary PGM (`P5`), fiber pixels 255 and matrix pixels 0.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.data.iter().map(|&v| if v == 1 { 255 } else { 0 }));
        out
    }

    /// Parse a binary PGM; gray levels above half the maximum count as fiber.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut token = || -> Result<String> {
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Parse("truncated PGM header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token()? != "P5" {
            return Err(Error::Parse("expected a binary PGM (P5)".into()));
        }
        let num = |s: String| s.parse::<usize>().map_err(|e| Error::Parse(format!("PGM header {s:?}: {e}")));
        let width = num(token()?)?;
        let height = num(token()?)?;
        let maxval = num(token()?)?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Parse(format!("unsupported PGM maximum {maxval}")));
        }
        // exactly one whitespace byte separates the header from the raster
        let start = pos + 1;
        let raster = bytes.get(start..start + width * height).ok_or_else(|| Error::Parse("truncated PGM raster".into()))?;
        let data = raster.iter().map(|&v| u8::from(2 * v as usize > maxval)).collect();
        Self::new(width, height, data)
    }

    pub fn to_run_length(&self) -> RunLengthMap {
        let mut runs: Vec<[usize; 2]> = Vec::new();
        for &v in &self.data {
            match runs.last_mut() {
                Some(r) if r[0] == v as usize => r[1] += 1,
                _ => runs.push([v as usize, 1]),
            }
        }
        RunLengthMap { width: self.width, height: self.height, runs }
    }

    pub fn from_run_length(rl: &RunLengthMap) -> Result<Self> {
        let mut data = Vec::with_capacity(rl.width * rl.height);
        for &[v, n] in &rl.runs {
            if v > 1 {
                return Err(Error::Parse(format!("run value {v} is not 0 or 1")));
            }
            data.extend(std::iter::repeat_n(v as u8, n));
        }
        Self::new(rl.width, rl.height, data)
    }
}

/// Moduli per (bar, station) element, in GPa.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleEnsemble {
    bars: usize,
    stations: usize,
    element_size: f64,
    // bar-major
    values: Vec<f64>,
}

impl SampleEnsemble {
    pub fn new(bars: usize, stations: usize, element_size: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != bars * stations {
            return Err(Error::DimensionMismatch { expected: bars * stations, found: values.len() });
        }
        if let Some(&bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("modulus {bad} must be positive")));
        }
        Ok(Self { bars, stations, element_size, values })
    }

    pub fn bars(&self) -> usize {
        self.bars
    }

    pub fn stations(&self) -> usize {
        self.stations
    }

    pub fn value(&self, bar: usize, station: usize) -> f64 {
        self.values[bar * self.stations + station]
    }

    /// Station midpoint `x_j` in μm.
    pub fn station_x(&self, station: usize) -> f64 {
        (station as f64 + 0.5) * self.element_size
    }

    /// Moduli of every bar at one station.
    pub fn column(&self, station: usize) -> Vec<f64> {
        (0..self.bars).map(|i| self.value(i, station)).collect()
    }

    /// Compliance samples of one bar along its length.
    pub fn bar_compliance(&self, bar: usize) -> Vec<f64> {
        self.values[bar * self.stations..(bar + 1) * self.stations].iter().map(|a| 1.0 / a).collect()
    }

    /// CSV with columns `bar,station,x_j,a,b`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bar,station,x_j,a,b\n");
        for i in 0..self.bars {
            for j in 0..self.stations {
                let a = self.value(i, j);
                out.push_str(&format!("{i},{j},{},{a},{}\n", self.station_x(j), 1.0 / a));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') || line.starts_with("bar") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(Error::Parse(format!("expected bar,station,x_j,a,b in {line:?}")));
            }
            let int = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
            rows.push((int(cols[0])?, int(cols[1])?, num(cols[2])?, num(cols[3])?));
        }
        let bars = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let stations = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        let mut values = vec![f64::NAN; bars * stations];
        let mut element_size = 0.0;
        for &(i, j, x, a) in &rows {
            values[i * stations + j] = a;
            if j == 0 {
                element_size = 2.0 * x;
            }
        }
        Self::new(bars, stations, element_size, values)
    }
}

/// Per-element harmonic mean of the pixel moduli.
///
/// Element rows become bars and element columns stations; `a = n / Σ 1/a_px`.
pub fn harmonic_coarsen(map: &PixelMap, element_px: usize, a_fiber: f64, a_matrix: f64) -> Result<SampleEnsemble> {
    if element_px == 0 {
        return Err(Error::invalid("element size must be positive"));
    }
    if !(a_fiber > 0.0 && a_matrix > 0.0) {
        return Err(Error::invalid("moduli must be positive"));
    }
    for dim in [map.width, map.height] {
        if dim % element_px != 0 {
            return Err(Error::DimensionMismatch { expected: dim - dim % element_px, found: dim });
        }
    }
    let (bars, stations) = (map.height / element_px, map.width / element_px);
    let n = (element_px * element_px) as f64;
    let mut values = Vec::with_capacity(bars * stations);
    for i in 0..bars {
        for j in 0..stations {
            let mut fibers = 0usize;
            for y in i * element_px..(i + 1) * element_px {
                for x in j * element_px..(j + 1) * element_px {
                    fibers += map.get(x, y) as usize;
                }
            }
            let matrix = element_px * element_px - fibers;
            values.push(n / (fibers as f64 / a_fiber + matrix as f64 / a_matrix));
        }
    }
    SampleEnsemble::new(bars, stations, element_px as f64, values)
}

/// Mean, standard deviation (n−1 divisor), skewness `m3/m2^1.5` and excess
/// kurtosis `m4/m2² − 3` with n-divisor central moments.
pub fn sample_moments(samples: &[f64]) -> Result<MomentSet> {
    if samples.len() < 4 {
        return Err(Error::invalid(format!("need at least 4 samples, got {}", samples.len())));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &s in samples {
        let d = s - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if m2 == 0.0 {
        return Err(Error::DegenerateSpread);
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    Ok(MomentSet {
        mean,
        std: (m2 * n / (n - 1.0)).sqrt(),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}

/// Compliance moments at every station of an ensemble.
pub fn station_moments(ensemble: &SampleEnsemble) -> Result<Vec<MomentSet>> {
    (0..ensemble.stations())
        .map(|j| sample_moments(&ensemble.column(j).iter().map(|a| 1.0 / a).collect::<Vec<_>>()))
        .collect()
}

/// A membership function fitted to a histogram, with the fit's provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedMembership {
    pub variable: FuzzyVariable,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Root-mean-square residuals of the rising and falling regression lines.
    pub residuals: [f64; 2],
}

// Least-squares line through (x, y); a single point gives a constant.
fn fit_line(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icept = my - slope * mx;
    let rms = (pts.iter().map(|p| (icept + slope * p.0 - p.1).powi(2)).sum::<f64>() / n).sqrt();
    (icept, slope, rms)
}

/// Least-squares nondecreasing fit (pool adjacent violators, equal weights).
pub fn isotonic_increasing(values: &[f64]) -> Vec<f64> {
    // blocks of (mean, size)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 && blocks[blocks.len() - 2].0 > blocks[blocks.len() - 1].0 {
            let (m2, n2) = blocks.pop().unwrap();
            let (m1, n1) = blocks.pop().unwrap();
            blocks.push(((m1 * n1 as f64 + m2 * n2 as f64) / (n1 + n2) as f64, n1 + n2));
        }
    }
    blocks.into_iter().flat_map(|(m, n)| std::iter::repeat_n(m, n)).collect()
}

/// Polygonal membership function from a histogram of `values`.
///
/// Least-squares lines are fitted to the bin heights on each side of the
/// peak bin; the piecewise draft is scaled to peak 1, clipped to [0, 1] and
/// made quasi-concave by isotonic regression (nondecreasing up to the peak,
/// nonincreasing after). The curve through the bin centers, anchored at zero
/// at the smallest and largest value, is then cut at `levels`. All values
/// equal gives a crisp variable; two distinct values are too few to fit.
pub fn fit_membership(values: &[f64], bins: usize, levels: &[f64]) -> Result<FittedMembership> {
    check_levels(levels)?;
    if bins < 2 {
        return Err(Error::invalid("at least two histogram bins are required"));
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return Err(Error::invalid("no values to fit"));
    }
    if lo == hi {
        let variable = FuzzyVariable::from_alpha_cuts(levels.to_vec(), vec![Interval::point(lo)?; levels.len()])?;
        return Ok(FittedMembership { variable, bin_edges: vec![lo, hi], counts: vec![values.len()], residuals: [0.0; 2] });
    }
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 distinct values, got {}", distinct.len())));
    }

    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let centers: Vec<f64> = (0..bins).map(|k| 0.5 * (edges[k] + edges[k + 1])).collect();
    let peak = (0..bins).fold(0, |best, k| if counts[k] > counts[best] { k } else { best });
    let pts = |r: std::ops::RangeInclusive<usize>| r.map(|k| (centers[k], counts[k] as f64)).collect::<Vec<_>>();
    let (ri, rs, rres) = fit_line(&pts(0..=peak));
    let (fi, fs, fres) = fit_line(&pts(peak..=bins - 1));
    let mut draft: Vec<f64> = (0..bins)
        .map(|k| {
            let (rise, fall) = (ri + rs * centers[k], fi + fs * centers[k]);
            match k.cmp(&peak) {
                std::cmp::Ordering::Less => rise,
                std::cmp::Ordering::Greater => fall,
                std::cmp::Ordering::Equal => rise.max(fall),
            }
        })
        .collect();
    let top = draft.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(Error::invalid("regression lines never rise above zero"));
    }
    draft.iter_mut().for_each(|d| *d = (*d / top).clamp(0.0, 1.0));
    let mode = (0..bins).fold(0, |best, k| if draft[k] > draft[best] { k } else { best });
    let mut degree = isotonic_increasing(&draft[..=mode]);
    let mut tail: Vec<f64> = draft[mode..].iter().rev().copied().collect();
    tail = isotonic_increasing(&tail);
    degree.extend(tail.into_iter().rev().skip(1));
    let peak_degree = degree[mode];
    degree.iter_mut().for_each(|d| *d /= peak_degree);

    // curve (x, μ): anchored at (lo, 0) and (hi, 0)
    let mut curve = vec![(lo, 0.0)];
    curve.extend(centers.iter().copied().zip(degree.iter().copied()));
    curve.push((hi, 0.0));
    let cuts = levels
        .iter()
        .map(|&a| {
            if a == 0.0 {
                return Interval::new(lo, hi);
            }
            let up = crossing(&curve, a);
            let rev: Vec<(f64, f64)> = curve.iter().rev().copied().collect();
            let down = crossing(&rev, a);
            Interval::new(up, down.max(up))
        })
        .collect::<Result<Vec<_>>>()?;
    let variable = FuzzyVariable::from_alpha_cuts(levels.to_vec(), cuts)?;
    Ok(FittedMembership { variable, bin_edges: edges, counts, residuals: [rres, fres] })
}

// First abscissa where the piecewise-linear curve reaches `level`.
fn crossing(curve: &[(f64, f64)], level: f64) -> f64 {
    for w in curve.windows(2) {
        let ((x0, m0), (x1, m1)) = (w[0], w[1]);
        if m1 >= level && m0 < level {
            return x0 + (level - m0) / (m1 - m0) * (x1 - x0);
        }
        if m0 >= level {
            return x0;
        }
    }
    curve.last().map_or(f64::NAN, |p| p.0)
}

/// Fit each of the four moments of `moments` over the stations.
pub fn fit_moment_memberships(moments: &[MomentSet], bins: usize) -> Result<Vec<FittedMembership>> {
    (0..4)
        .map(|i| fit_membership(&moments.iter().map(|m| m.to_array()[i]).collect::<Vec<_>>(), bins, &DEFAULT_LEVELS))
        .collect()
}

/// The four fitted moment variables as one fully interactive vector.
pub fn build_moment_vector(fitted: &[FuzzyVariable]) -> Result<FuzzyVector> {
    if fitted.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: fitted.len() });
    }
    FuzzyVector::fully_interactive(fitted.to_vec())
}

/// Fiber radius in pixels for 7 μm fibers.
pub const DEFAULT_FIBER_RADIUS_PX: f64 = 3.5;

const PACKING_ATTEMPTS: usize = 8;
const SHAKE_SWEEPS: usize = 20;

/// Random non-overlapping discs on a `width × height` pixel grid.
///
/// Disc centers start on a perturbed hexagonal lattice dense enough for the
/// requested count; a random subset is kept and the rest removed, then hard-
/// disc Monte Carlo moves randomize positions. A pixel is fiber when its center
/// lies within `radius_px` of a disc center. The disc count is corrected from
/// the measured fraction until the map is within 0.01 of the target.
pub fn synthesize_fiber_map(
    seed: u64,
    width: usize,
    height: usize,
    volume_fraction: f64,
    radius_px: f64,
) -> Result<PixelMap> {
    if !(0.0..1.0).contains(&volume_fraction) {
        return Err(Error::invalid(format!("volume fraction {volume_fraction} outside [0, 1)")));
    }
    if !(radius_px > 0.5) {
        return Err(Error::invalid(format!("fiber radius {radius_px} px is too small to rasterize")));
    }
    let mut map = PixelMap::empty(width, height)?;
    if volume_fraction == 0.0 {
        return Ok(map);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = (width * height) as f64;
    let mut count = (volume_fraction * area / (std::f64::consts::PI * radius_px * radius_px)).round() as usize;
    let mut achieved = 0.0;
    for _ in 0..PACKING_ATTEMPTS {
        let centers = pack_discs(&mut rng, width as f64, height as f64, radius_px, count)?;
        map = rasterize(width, height, radius_px, &centers);
        achieved = map.occupancy_fraction();
        if (achieved - volume_fraction).abs() <= 0.01 {
            return Ok(map);
        }
        if achieved == 0.0 {
            break;
        }
        count = ((count as f64) * volume_fraction / achieved).round().max(1.0) as usize;
    }
    Err(Error::PackingFailure { target: volume_fraction, achieved })
}

fn pack_discs(rng: &mut ChaCha8Rng, w: f64, h: f64, r: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    let min_dist = 2.0 * r + 1e-6;
    // lattice with about 8% spare sites, so removal leaves room to move
    let sites = (count as f64 * 1.08).ceil();
    let spacing = (w * h / (sites * 3f64.sqrt() / 2.0)).sqrt();
    if spacing < min_dist {
        return Err(Error::PackingFailure {
            target: count as f64 * std::f64::consts::PI * r * r / (w * h),
            achieved: 0.0,
        });
    }
    let row_h = spacing * 3f64.sqrt() / 2.0;
    let (ox, oy) = (rng.random::<f64>() * spacing, rng.random::<f64>() * row_h);
    let mut centers = Vec::new();
    let mut row = 0usize;
    let mut y = oy - row_h;
    while y < h + row_h {
        let shift = if row % 2 == 1 { 0.5 * spacing } else { 0.0 };
        let mut x = ox + shift - spacing;
        while x < w + spacing {
            if (0.0..w).contains(&x) && (0.0..h).contains(&y) {
                centers.push((x, y));
            }
            x += spacing;
        }
        y += row_h;
        row += 1;
    }
    if centers.len() < count {
        return Err(Error::PackingFailure {
            target: count as f64 * std::f64::consts::PI * r * r / (w * h),
            achieved: centers.len() as f64 * std::f64::consts::PI * r * r / (w * h),
        });
    }
    centers.shuffle(rng);
    centers.truncate(count);

    // uniform cell grid for neighbor queries, cell edge ≥ min_dist
    let cell = min_dist;
    let (nx, ny) = ((w / cell).ceil() as usize + 1, (h / cell).ceil() as usize + 1);
    let cell_of = |p: (f64, f64)| ((p.0 / cell).floor() as usize, (p.1 / cell).floor() as usize);
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
    for (i, &p) in centers.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        grid[cy * nx + cx].push(i);
    }
    let step = (spacing - 2.0 * r).max(0.1 * r);
    for _ in 0..SHAKE_SWEEPS {
        for i in 0..centers.len() {
            let old = centers[i];
            let cand = (old.0 + (rng.random::<f64>() - 0.5) * 2.0 * step, old.1 + (rng.random::<f64>() - 0.5) * 2.0 * step);
            if !(0.0..w).contains(&cand.0) || !(0.0..h).contains(&cand.1) {
                continue;
            }
            let (cx, cy) = cell_of(cand);
            let mut free = true;
            'scan: for gy in cy.saturating_sub(1)..=(cy + 1).min(ny - 1) {
                for gx in cx.saturating_sub(1)..=(cx + 1).min(nx - 1) {
                    for &j in &grid[gy * nx + gx] {
                        if j != i {
                            let q = centers[j];
                            if (q.0 - cand.0).hypot(q.1 - cand.1) < min_dist {
                                free = false;
                                break 'scan;
                            }
                        }
                    }
                }
            }
            if free {
                let (ocx, ocy) = cell_of(old);
                let bucket = &mut grid[ocy * nx + ocx];
                bucket.retain(|&j| j != i);
                grid[cy * nx + cx].push(i);
                centers[i] = cand;
            }
        }
    }
    Ok(centers)
}

fn rasterize(width: usize, height: usize, r: f64, centers: &[(f64, f64)]) -> PixelMap {
    let mut data = vec![0u8; width * height];
    let r2 = r * r;
    for &(cx, cy) in centers {
        let (x0, x1) = ((cx - r).floor().max(0.0) as usize, ((cx + r).ceil() as usize).min(width));
        let (y0, y1) = ((cy - r).floor().max(0.0) as usize, ((cy + r).ceil() as usize).min(height));
        for y in y0..y1 {
            for x in x0..x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r2 {
                    data[y * width + x] = 1;
                }
            }
        }
    }
    PixelMap { width, height, data }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(fiber_pixels: usize) -> PixelMap {
        let mut data = vec![0u8; 100];
        data[..fiber_pixels].iter_mut().for_each(|v| *v = 1);
        PixelMap::new(10, 10, data).unwrap()
    }

    #[test]
    fn harmonic_element_values() {
        let a = |n| harmonic_coarsen(&block(n), 10, A_FIBER, A_MATRIX).unwrap().value(0, 0);
        assert!((a(100) - 24.0).abs() < 1e-12);
        assert!((a(0) - 3.6).abs() < 1e-12);
        assert!((a(50) - 2.0 / (1.0 / 24.0 + 1.0 / 3.6)).abs() < 1e-10);
        assert!((a(50) - 6.260_869_565).abs() < 1e-8);
        // harmonic mean never exceeds the arithmetic mean
        for n in 0..=100 {
            let arith = (n as f64 * 24.0 + (100 - n) as f64 * 3.6) / 100.0;
            assert!(a(n) <= arith + 1e-12 && a(n) >= 3.6 - 1e-12 && a(n) <= 24.0 + 1e-12);
        }
    }

    #[test]
    fn coarsen_shape_and_errors() {
        let map = PixelMap::empty(40, 20).unwrap();
        let e = harmonic_coarsen(&map, 10, A_FIBER, A_MATRIX).unwrap();
        assert_eq!((e.bars(), e.stations()), (2, 4));
        assert_eq!(e.station_x(3), 35.0);
        assert!(matches!(
            harmonic_coarsen(&PixelMap::empty(45, 20).unwrap(), 10, A_FIBER, A_MATRIX),
            Err(Error::DimensionMismatch { expected: 40, found: 45 })
        ));
    }

    #[test]
    fn pgm_and_run_length_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<u8> = (0..37 * 23).map(|_| rng.random_range(0..2)).collect();
        let map = PixelMap::new(37, 23, data).unwrap();
        assert_eq!(PixelMap::from_pgm(&map.to_pgm()).unwrap(), map);
        let rl = map.to_run_length();
        let json = serde_json::to_string(&rl).unwrap();
        let back: RunLengthMap = serde_json::from_str(&json).unwrap();
        assert_eq!(PixelMap::from_run_length(&back).unwrap(), map);
        let mut commented = b"P5\n# made by hand\n37 23\n255\n".to_vec();
        commented.extend_from_slice(&map.to_pgm()[b"P5\n37 23\n255\n".len()..]);
        assert_eq!(PixelMap::from_pgm(&commented).unwrap(), map);
        assert!(PixelMap::from_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(PixelMap::from_pgm(b"P5\n4 4\n255\n\0\0").is_err());
    }

    #[test]
    fn ensemble_csv_roundtrip() {
        let e = SampleEnsemble::new(2, 3, 10.0, vec![3.6, 5.0, 24.0, 7.5, 10.0, 12.0]).unwrap();
        let back = SampleEnsemble::from_csv(&e.to_csv()).unwrap();
        assert_eq!(back, e);
        assert_eq!(e.column(1), vec![5.0, 10.0]);
        assert!(SampleEnsemble::new(1, 2, 10.0, vec![1.0, -1.0]).is_err());
    }

    fn brute_moments(v: &[f64]) -> [f64; 4] {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let c = |k: i32| v.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / n;
        [mean, (c(2) * n / (n - 1.0)).sqrt(), c(3) / c(2).powf(1.5), c(4) / c(2).powi(2) - 3.0]
    }

    #[test]
    fn moment_estimators() {
        assert!(matches!(sample_moments(&[2.0; 6]), Err(Error::DegenerateSpread)));
        assert!(sample_moments(&[1.0, 2.0, 3.0]).is_err());
        let m = sample_moments(&[-1.0, 1.0, -1.0, 1.0, -1.0, 1.0]).unwrap();
        assert_eq!((m.mean, m.skewness), (0.0, 0.0));
        assert!((m.excess_kurtosis + 2.0).abs() < 1e-14);
        let seq: Vec<f64> = (0..10).map(f64::from).collect();
        let m = sample_moments(&seq).unwrap();
        assert!((m.mean - 4.5).abs() < 1e-15 && m.skewness.abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.random_range(4..60);
            let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3) * 5.0 - 1.0).collect();
            let got = sample_moments(&v).unwrap().to_array();
            for (g, b) in got.iter().zip(brute_moments(&v)) {
                assert!((g - b).abs() <= 1e-12 * b.abs().max(1.0), "{g} vs {b}");
            }
        }
    }

    #[test]
    fn pava() {
        assert_eq!(isotonic_increasing(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic_increasing(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(isotonic_increasing(&[0.0, 1.0]), vec![0.0, 1.0]);
    }

    fn triangle_sample(n: usize, seed: u64, (a, c, b): (f64, f64, f64)) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fc = (c - a) / (b - a);
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                if u < fc {
                    a + (u * (b - a) * (c - a)).sqrt()
                } else {
                    b - ((1.0 - u) * (b - a) * (b - c)).sqrt()
                }
            })
            .collect()
    }

    #[test]
    fn fit_symmetric_triangle() {
        let v = triangle_sample(20_000, 3, (0.0, 1.0, 2.0));
        let f = fit_membership(&v, DEFAULT_BINS, &DEFAULT_LEVELS).unwrap();
        assert!(f.variable.validate().is_empty());
        let width = f.bin_edges[1] - f.bin_edges[0];
        assert!((f.variable.core().midpoint() - 1.0).abs() <= width);
        for c in f.variable.cuts() {
            assert!((c.midpoint() - 1.0).abs() <= width, "{c}");
        }
        assert_eq!(f.counts.iter().sum::<usize>(), v.len());
    }

    #[test]
    fn fit_is_stable_across_bin_counts() {
        let v = triangle_sample(5_000, 9, (0.12, 0.135, 0.16));
        let fits: Vec<FuzzyVariable> =
            [10, 20, 30].iter().map(|&b| fit_membership(&v, b, &DEFAULT_LEVELS).unwrap().variable).collect();
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        let coarse = (hi - lo) / 10.0;
        for f in &fits[1..] {
            for (a, b) in f.cuts().iter().zip(fits[0].cuts()) {
                assert!((a.lo() - b.lo()).abs() <= coarse && (a.hi() - b.hi()).abs() <= coarse, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn fit_degenerate_inputs() {
        let f = fit_membership(&[0.3; 12], DEFAULT_BINS, &DEFAULT_LEVELS).unwrap();
        assert!(f.variable.is_crisp());
        assert_eq!(f.variable.core().lo(), 0.3);
        assert!(fit_membership(&[0.1, 0.2, 0.1, 0.2], DEFAULT_BINS, &DEFAULT_LEVELS).is_err());
        let skew: Vec<f64> = (0..200).map(|k| (k as f64 / 200.0).powi(3)).collect();
        assert!(fit_membership(&skew, DEFAULT_BINS, &DEFAULT_LEVELS).unwrap().variable.validate().is_empty());
    }

    #[test]
    fn fixture_moment_vector() {
        let v = composite_moments().unwrap();
        let crate::interaction::JointAlphaCut::Polyline(chain) = v.joint_alpha_cut(0.0).unwrap() else { panic!() };
        assert_eq!(chain.vertices()[0], vec![0.1222, 0.0200, 0.0, -1.00]);
        assert_eq!(chain.vertices().last().unwrap(), &vec![0.1559, 0.0430, 2.00, 4.50]);
        let crisp = build_moment_vector(&vec![FuzzyVariable::crisp(1.0).unwrap(); 4]).unwrap();
        let cut = crisp.joint_alpha_cut(0.0).unwrap();
        assert_eq!(cut.discretize(5).unwrap(), vec![vec![1.0; 4]]);
        assert!(build_moment_vector(&[FuzzyVariable::crisp(1.0).unwrap()]).is_err());
    }

    #[test]
    fn fixture_chain_is_beta_feasible() {
        let v = composite_moments().unwrap();
        for a in DEFAULT_LEVELS {
            for z in v.joint_alpha_cut(a).unwrap().discretize(181).unwrap() {
                let (kmin, kmax) = MomentSet::beta_kurtosis_range(z[2]);
                assert!(z[3] > kmin && z[3] < kmax, "{z:?}");
            }
        }
    }

    #[test]
    fn synthetic_map() {
        let empty = synthesize_fiber_map(1, 100, 50, 0.0, 3.5).unwrap();
        assert_eq!(empty.occupancy_fraction(), 0.0);
        let a = synthesize_fiber_map(7, 400, 200, 0.63, 3.5).unwrap();
        assert!((a.occupancy_fraction() - 0.63).abs() <= 0.01, "{}", a.occupancy_fraction());
        assert_eq!(synthesize_fiber_map(7, 400, 200, 0.63, 3.5).unwrap(), a);
        assert_ne!(synthesize_fiber_map(8, 400, 200, 0.63, 3.5).unwrap(), a);
        assert!(matches!(synthesize_fiber_map(1, 100, 100, 0.95, 3.5), Err(Error::PackingFailure { .. })));
    }
}
