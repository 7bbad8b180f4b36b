//! Four-parameter beta marginals and the translation map `b = Ψ⁻¹(Φ(g))`.
//!
//! Applied pointwise to a standard Gaussian field, the translation map yields
//! a non-Gaussian field whose marginal law is the beta law `Ψ`, while the
//! correlation structure is inherited from the Gaussian field.

use serde::{Deserialize, Serialize};
use libm::{erfc, lgamma};

use crate::error::{Error, Result};
use crate::field::KlExpansion;

/// Mean, standard deviation, skewness and excess kurtosis of a law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl MomentSet {
    pub fn new(mean: f64, std: f64, skewness: f64, excess_kurtosis: f64) -> Self {
        Self { mean, std, skewness, excess_kurtosis }
    }

    /// Read `[mean, std, skewness, excess kurtosis]`.
    pub fn from_slice(z: &[f64]) -> Result<Self> {
        match z {
            &[mean, std, skewness, excess_kurtosis] => Ok(Self { mean, std, skewness, excess_kurtosis }),
            _ => Err(Error::DimensionMismatch { expected: 4, found: z.len() }),
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.mean, self.std, self.skewness, self.excess_kurtosis]
    }

    /// Open interval of excess kurtosis values a beta law can reach at this skewness.
    pub fn beta_kurtosis_range(skewness: f64) -> (f64, f64) {
        let g2 = skewness * skewness;
        (g2 - 2.0, 1.5 * g2)
    }
}

/// Standard normal CDF.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Regularized incomplete beta function `I_x(a, b)` with the log-beta constant cached.
#[derive(Clone, Copy, Debug)]
struct IncompleteBeta {
    a: f64,
    b: f64,
    ln_beta: f64,
}

impl IncompleteBeta {
    fn new(a: f64, b: f64) -> Self {
        Self { a, b, ln_beta: lgamma(a) + lgamma(b) - lgamma(a + b) }
    }

    fn swapped(&self) -> Self {
        Self { a: self.b, b: self.a, ln_beta: self.ln_beta }
    }

    fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        ((self.a - 1.0) * x.ln() + (self.b - 1.0) * (-x).ln_1p() - self.ln_beta).exp()
    }

    fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let (a, b) = (self.a, self.b);
        let front = (a * x.ln() + b * (-x).ln_1p() - self.ln_beta).exp();
        if x < (a + 1.0) / (a + b + 2.0) {
            front * continued_fraction(a, b, x) / a
        } else {
            1.0 - front * continued_fraction(b, a, 1.0 - x) / b
        }
    }

    /// Solve `I_x = u` given both `u` and its complement `c = 1 - u`.
    ///
    /// The smaller of the two tails is solved directly so neither tail loses
    /// precision. `bracket` narrows the search when a good one is known.
    fn quantile(&self, u: f64, c: f64, bracket: Option<(f64, f64, f64)>) -> f64 {
        if u <= c {
            solve_increasing(|x| self.eval(x) - u, |x| self.pdf(x), bracket.unwrap_or((0.0, 1.0, self.a / (self.a + self.b))))
        } else {
            let s = self.swapped();
            let br = bracket.map(|(lo, hi, g)| (1.0 - hi, 1.0 - lo, 1.0 - g));
            1.0 - solve_increasing(|y| s.eval(y) - c, |y| s.pdf(y), br.unwrap_or((0.0, 1.0, s.a / (s.a + s.b))))
        }
    }
}

// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=1000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

// Root of an increasing function on [lo, hi]: Newton steps that stay inside
// the shrinking bracket, bisection otherwise.
fn solve_increasing(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, (mut lo, mut hi, guess): (f64, f64, f64)) -> f64 {
    // brackets read from tables of rounded tail quantiles can be out of
    // order or miss the root; the full range always brackets it
    if !(lo <= hi && f(lo) <= 0.0 && f(hi) >= 0.0) {
        (lo, hi) = (0.0, 1.0);
    }
    let mut x = guess.clamp(lo, hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

/// Beta law with shapes `(p, q)` on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub shape_p: f64,
    pub shape_q: f64,
    pub lo: f64,
    pub hi: f64,
}

impl BetaParams {
    pub fn new(shape_p: f64, shape_q: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(shape_p > 0.0 && shape_q > 0.0 && shape_p.is_finite() && shape_q.is_finite()) {
            return Err(Error::invalid(format!("beta shapes ({shape_p}, {shape_q}) must be positive")));
        }
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::invalid(format!("beta support [{lo}, {hi}] must have lo < hi")));
        }
        Ok(Self { shape_p, shape_q, lo, hi })
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }

    /// Mean, standard deviation, skewness and excess kurtosis in closed form.
    pub fn moments(&self) -> MomentSet {
        let (p, q) = (self.shape_p, self.shape_q);
        let s = p + q;
        let mean = self.lo + self.span() * p / s;
        let std = self.span() * (p * q / (s * s * (s + 1.0))).sqrt();
        let skewness = 2.0 * (q - p) * (s + 1.0).sqrt() / ((s + 2.0) * (p * q).sqrt());
        let excess_kurtosis =
            6.0 * ((p - q).powi(2) * (s + 1.0) - p * q * (s + 2.0)) / (p * q * (s + 2.0) * (s + 3.0));
        MomentSet { mean, std, skewness, excess_kurtosis }
    }

    fn standard(&self) -> IncompleteBeta {
        IncompleteBeta::new(self.shape_p, self.shape_q)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.standard().eval((x - self.lo) / self.span())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.standard().pdf((x - self.lo) / self.span()) / self.span()
    }

    /// Quantile function; `u` must lie strictly inside (0, 1).
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::invalid(format!("beta quantile level {u} outside (0, 1)")));
        }
        Ok(self.lo + self.span() * self.standard().quantile(u, 1.0 - u, None))
    }

    /// Quantile with `u` clamped into [0, 1]; the endpoints map to the support ends.
    pub fn inverse_cdf_clamped(&self, u: f64) -> f64 {
        match u {
            u if u.is_nan() => f64::NAN,
            u if u <= 0.0 => self.lo,
            u if u >= 1.0 => self.hi,
            u => self.lo + self.span() * self.standard().quantile(u, 1.0 - u, None),
        }
    }

    /// `Ψ⁻¹(Φ(g))`, computed from whichever normal tail is smaller.
    pub fn translate(&self, g: f64) -> f64 {
        let u = standard_normal_cdf(g);
        let c = standard_normal_cdf(-g);
        self.lo + self.span() * self.standard().quantile(u, c, None)
    }

    /// Precomputed quantile tables for repeated translation with one law.
    pub fn translator(&self) -> Translator {
        Translator::new(*self)
    }
}

/// Fast repeated evaluation of [`BetaParams::translate`].
///
/// On `|g| ≤ 8` the map `g ↦ Ψ⁻¹(Φ(g))` is tabulated with its exact
/// derivative `φ(g) / ψ(b)` and evaluated by cubic Hermite interpolation.
/// Every table interval is checked against the exact quantile at its
/// midpoint when the table is built; intervals that miss the tolerance, and
/// all arguments outside the table, use the exact bracketed solver instead.
#[derive(Clone, Debug)]
pub struct Translator {
    params: BetaParams,
    lower: IncompleteBeta,
    // tail levels t_k and standardized quantiles of the lower and upper tails
    levels: Vec<f64>,
    lower_x: Vec<f64>,
    upper_y: Vec<f64>,
    // standardized values and g-derivatives at the table nodes
    values: Vec<f64>,
    slopes: Vec<f64>,
    verified: Vec<bool>,
}

const TABLE_NODES: usize = 64;
const HERMITE_RANGE: f64 = 8.0;
const HERMITE_CELLS: usize = 4096;
/// Largest accepted interpolation error, as a fraction of the support span.
pub const TRANSLATOR_TOLERANCE: f64 = 1e-11;

impl Translator {
    fn new(params: BetaParams) -> Self {
        let lower = params.standard();
        let upper = lower.swapped();
        let levels: Vec<f64> =
            (1..=TABLE_NODES).map(|k| 0.5 * (k as f64 / TABLE_NODES as f64).powi(3)).collect();
        let lower_x = levels.iter().map(|&t| lower.quantile(t, 1.0 - t, None)).collect();
        let upper_y = levels.iter().map(|&t| upper.quantile(t, 1.0 - t, None)).collect();
        let mut t = Self {
            params,
            lower,
            levels,
            lower_x,
            upper_y,
            values: Vec::new(),
            slopes: Vec::new(),
            verified: Vec::new(),
        };
        let step = Self::step();
        let nodes: Vec<f64> = (0..=HERMITE_CELLS).map(|k| -HERMITE_RANGE + k as f64 * step).collect();
        t.values = nodes.iter().map(|&g| t.exact_standard(g)).collect();
        t.slopes = nodes
            .iter()
            .zip(&t.values)
            .map(|(&g, &x)| normal_pdf(g) / lower.pdf(x))
            .collect();
        t.verified = (0..HERMITE_CELLS)
            .map(|k| {
                if !(t.slopes[k].is_finite() && t.slopes[k + 1].is_finite()) {
                    return false;
                }
                let g = nodes[k] + 0.5 * step;
                (t.hermite(k, 0.5) - t.exact_standard(g)).abs() <= TRANSLATOR_TOLERANCE
            })
            .collect();
        t
    }

    fn step() -> f64 {
        2.0 * HERMITE_RANGE / HERMITE_CELLS as f64
    }

    pub fn params(&self) -> &BetaParams {
        &self.params
    }

    /// Fraction of table intervals that passed verification.
    pub fn coverage(&self) -> f64 {
        self.verified.iter().filter(|&&v| v).count() as f64 / HERMITE_CELLS as f64
    }

    fn hermite(&self, k: usize, s: f64) -> f64 {
        let h = Self::step();
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1
    }

    fn bracket(levels: &[f64], xs: &[f64], t: f64) -> (f64, f64, f64) {
        let k = levels.partition_point(|&l| l < t);
        if k == 0 {
            return (0.0, xs[0], 0.5 * xs[0]);
        }
        if k >= levels.len() {
            return (xs[xs.len() - 1], 1.0, xs[xs.len() - 1]);
        }
        let (t0, t1) = (levels[k - 1], levels[k]);
        let (x0, x1) = (xs[k - 1], xs[k]);
        (x0, x1, x0 + (t - t0) / (t1 - t0) * (x1 - x0))
    }

    fn exact_standard(&self, g: f64) -> f64 {
        let u = standard_normal_cdf(g);
        let c = standard_normal_cdf(-g);
        if u <= c {
            let br = Self::bracket(&self.levels, &self.lower_x, u);
            solve_increasing(|x| self.lower.eval(x) - u, |x| self.lower.pdf(x), br)
        } else {
            let upper = self.lower.swapped();
            let br = Self::bracket(&self.levels, &self.upper_y, c);
            1.0 - solve_increasing(|y| upper.eval(y) - c, |y| upper.pdf(y), br)
        }
    }

    /// `Ψ⁻¹(Φ(g))` by the exact solver, bypassing the interpolation table.
    pub fn translate_exact(&self, g: f64) -> f64 {
        self.params.lo + self.params.span() * self.exact_standard(g)
    }

    /// `Ψ⁻¹(Φ(g))`.
    pub fn translate(&self, g: f64) -> f64 {
        let pos = (g + HERMITE_RANGE) / Self::step();
        if pos >= 0.0 && pos < HERMITE_CELLS as f64 {
            let k = pos as usize;
            if self.verified[k] {
                return self.params.lo + self.params.span() * self.hermite(k, pos - k as f64);
            }
        }
        self.translate_exact(g)
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Relative tolerance for the moment round trip of a fit.
pub const FIT_TOLERANCE: f64 = 1e-8;

/// Beta law matching all four moments.
///
/// The shapes come from the closed-form inversion of the skewness/kurtosis
/// system and are polished by damped Newton on that system; the support is
/// then scaled and shifted to the requested mean and standard deviation. The
/// result is checked against the analytic moments before it is returned.
pub fn fit_beta_from_moments(moments: &MomentSet) -> Result<BetaParams> {
    let MomentSet { mean, std, skewness: g, excess_kurtosis: k } = *moments;
    if !(mean.is_finite() && std.is_finite() && g.is_finite() && k.is_finite()) {
        return Err(Error::invalid(format!("moments {moments:?} must be finite")));
    }
    if !(std > 0.0) {
        return Err(Error::invalid(format!("standard deviation {std} must be positive")));
    }
    let (k_min, k_max) = MomentSet::beta_kurtosis_range(g);
    if !(k > k_min && k < k_max) {
        let margin = 1e-3 * (k_max - k_min);
        return Err(Error::Infeasible {
            moments: *moments,
            suggested_excess_kurtosis: k.clamp(k_min + margin, k_max - margin),
        });
    }
    let nu = 3.0 * (k - g * g + 2.0) / (1.5 * g * g - k);
    let (mut p, mut q) = if g == 0.0 {
        (0.5 * nu, 0.5 * nu)
    } else {
        let d = 1.0 / (1.0 + 16.0 * (nu + 1.0) / ((nu + 2.0).powi(2) * g * g)).sqrt();
        let s = g.signum();
        (0.5 * nu * (1.0 - s * d), 0.5 * nu * (1.0 + s * d))
    };
    polish_shapes(&mut p, &mut q, g, k);
    let s = p + q;
    let span = std * s * ((s + 1.0) / (p * q)).sqrt();
    let lo = mean - span * p / s;
    let params = BetaParams::new(p, q, lo, lo + span)?;

    let got = params.moments();
    let ok = |a: f64, b: f64, scale: f64| (a - b).abs() <= FIT_TOLERANCE * b.abs().max(scale);
    if !(ok(got.mean, mean, std) && ok(got.std, std, std) && ok(got.skewness, g, 1e-6) && ok(got.excess_kurtosis, k, 1e-6)) {
        return Err(Error::Infeasible { moments: *moments, suggested_excess_kurtosis: k });
    }
    Ok(params)
}

fn shape_residual(p: f64, q: f64, g: f64, k: f64) -> [f64; 2] {
    let m = BetaParams { shape_p: p, shape_q: q, lo: 0.0, hi: 1.0 }.moments();
    [m.skewness - g, m.excess_kurtosis - k]
}

fn polish_shapes(p: &mut f64, q: &mut f64, g: f64, k: f64) {
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut r = shape_residual(*p, *q, g, k);
    for _ in 0..50 {
        if norm(r) < 1e-15 {
            return;
        }
        let (hp, hq) = (1e-7 * *p, 1e-7 * *q);
        let rp = shape_residual(*p + hp, *q, g, k);
        let rq = shape_residual(*p, *q + hq, g, k);
        let j = [[(rp[0] - r[0]) / hp, (rq[0] - r[0]) / hq], [(rp[1] - r[1]) / hp, (rq[1] - r[1]) / hq]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return;
        }
        let dp = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dq = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut step = 1.0;
        loop {
            let (np, nq) = (*p - step * dp, *q - step * dq);
            if np > 0.0 && nq > 0.0 {
                let nr = shape_residual(np, nq, g, k);
                if norm(nr) < norm(r) {
                    *p = np;
                    *q = nq;
                    r = nr;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-6 {
                return;
            }
        }
    }
}

/// Translation field on the KL grid: `Ψ⁻¹(Φ(G(x, y)))` with `Ψ` fitted to `moments`.
pub fn compliance_field(kl: &KlExpansion, m: usize, y: &[f64], moments: &MomentSet) -> Result<Vec<f64>> {
    let params = fit_beta_from_moments(moments)?;
    let g = kl.evaluate_truncated(m, y)?;
    let t = params.translator();
    Ok(g.into_iter().map(|v| t.translate(v)).collect())
}
