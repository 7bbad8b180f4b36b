//! The 1D boundary-value problem `-(a u')' = 0` on `(0, L)` with `u(0) = 0`
//! and unit flux `a u'(L) = 1`.
//!
//! Its solution is `u(x) = ∫₀^x a⁻¹`, evaluated by the midpoint rule on `N_h`
//! uniform cells. A point `x` inside a cell picks up the fraction of that
//! cell lying left of `x` times the cell's midpoint value, so node-aligned
//! points get the plain composite rule.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{
    evaluate_over_cuts, fuzzy_expectation, fuzzy_expectation_vector, BoundMap, BoundVectorMap, CutSampling,
    StochasticMap, StochasticVectorMap,
};
use crate::field::DrawSet;
use crate::fuzzy::{FuzzyVariable, Interval};
use crate::interaction::FuzzyVector;
use crate::translation::{fit_beta_from_moments, MomentSet, Translator};

/// Domain length and number of quadrature cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub length: f64,
    pub cells: usize,
}

impl SolveConfig {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(format!("domain length {length} must be positive")));
        }
        if cells == 0 {
            return Err(Error::invalid("at least one quadrature cell is required"));
        }
        Ok(Self { length, cells })
    }

    /// Lognormal-coefficient study: `L = 2`, 200 cells.
    pub fn example1() -> Self {
        Self { length: 2.0, cells: 200 }
    }

    /// Fiber-composite study: `L = 1.7 mm` in metres, one cell per 10 μm element.
    pub fn example2() -> Self {
        Self { length: 1.7e-3, cells: 170 }
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Cell midpoints `(j - 1/2) h`.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.cells).map(|j| (j as f64 + 0.5) * h).collect()
    }

    // (number of full cells left of x, fraction of the next cell)
    fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let slack = 1e-12 * self.length;
        if !(x >= -slack && x <= self.length + slack) {
            return Err(Error::invalid(format!("x = {x} outside [0, {}]", self.length)));
        }
        let t = (x / self.spacing()).clamp(0.0, self.cells as f64);
        let k = t.floor() as usize;
        if k >= self.cells {
            return Ok((self.cells, 0.0));
        }
        // node-aligned points within rounding of a cell boundary are taken as aligned
        let frac = t - k as f64;
        if frac > 1.0 - 1e-9 {
            Ok((k + 1, 0.0))
        } else if frac < 1e-9 {
            Ok((k, 0.0))
        } else {
            Ok((k, frac))
        }
    }

    fn cells_needed(&self, x: f64) -> Result<usize> {
        let (k, frac) = self.locate(x)?;
        Ok(if frac > 0.0 { k + 1 } else { k })
    }
}

/// The inverse coefficient `a⁻¹(x_j, y, z)` with the fuzzy parameters `z` fixed.
pub trait BoundCoefficient {
    fn config(&self) -> &SolveConfig;

    /// `a⁻¹` at the first `out.len()` cell midpoints for the draw `y`.
    fn compliance(&self, y: &[f64], out: &mut [f64]) -> Result<()>;

    /// `u(x)` for the draw `y`.
    fn displacement(&self, y: &[f64], x: f64) -> Result<f64> {
        let mut u = [0.0];
        self.profile(y, &[x], &mut u)?;
        Ok(u[0])
    }

    /// `u` at every point of `xs` for the draw `y`.
    fn profile(&self, y: &[f64], xs: &[f64], out: &mut [f64]) -> Result<()> {
        let config = *self.config();
        let needed = xs.iter().map(|&x| config.cells_needed(x)).collect::<Result<Vec<_>>>()?;
        let n = needed.iter().copied().max().unwrap_or(0);
        let mut b = vec![0.0; n];
        self.compliance(y, &mut b)?;
        let h = config.spacing();
        for (j, &v) in b.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveCoefficient { x: (j as f64 + 0.5) * h });
            }
        }
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        for &v in &b {
            prefix.push(prefix.last().unwrap() + v);
        }
        for (o, &x) in out.iter_mut().zip(xs) {
            let (k, frac) = config.locate(x)?;
            let partial = if frac > 0.0 { frac * b[k] } else { 0.0 };
            *o = h * (prefix[k] + partial);
        }
        Ok(())
    }
}

/// A family of coefficients `a(x, y, z)`.
pub trait CoefficientModel: Sync {
    fn bind(&self, z: &[f64], config: &SolveConfig) -> Result<Box<dyn BoundCoefficient + '_>>;
}

/// `a(x, y, z) = (2 + sin(2πx/L)) · exp(z1 + y z2)` with scalar `y`: a
/// lognormal coefficient whose log-mean and log-deviation are the fuzzy
/// parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LognormalCoefficient;

struct BoundLognormal {
    config: SolveConfig,
    z1: f64,
    z2: f64,
    // 1 / (2 + sin) at the nodes, and its running sums
    base: Vec<f64>,
    prefix: Vec<f64>,
}

impl CoefficientModel for LognormalCoefficient {
    fn bind(&self, z: &[f64], config: &SolveConfig) -> Result<Box<dyn BoundCoefficient + '_>> {
        if z.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: z.len() });
        }
        let base: Vec<f64> =
            config.nodes().iter().map(|&x| 1.0 / (2.0 + (2.0 * PI * x / config.length).sin())).collect();
        let mut prefix = vec![0.0];
        for &v in &base {
            prefix.push(prefix.last().unwrap() + v);
        }
        Ok(Box::new(BoundLognormal { config: *config, z1: z[0], z2: z[1], base, prefix }))
    }
}

impl BoundLognormal {
    fn factor(&self, y: &[f64]) -> Result<f64> {
        let y0 = *y.first().ok_or(Error::DimensionMismatch { expected: 1, found: 0 })?;
        let f = (-self.z1 - y0 * self.z2).exp();
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::NonFinite(f));
        }
        Ok(f)
    }
}

impl BoundCoefficient for BoundLognormal {
    fn config(&self) -> &SolveConfig {
        &self.config
    }

    fn compliance(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let f = self.factor(y)?;
        for (o, b) in out.iter_mut().zip(&self.base) {
            *o = b * f;
        }
        Ok(())
    }

    fn profile(&self, y: &[f64], xs: &[f64], out: &mut [f64]) -> Result<()> {
        let f = self.factor(y)?;
        let h = self.config.spacing();
        for (o, &x) in out.iter_mut().zip(xs) {
            let (k, frac) = self.config.locate(x)?;
            let partial = if frac > 0.0 { frac * self.base[k] } else { 0.0 };
            *o = f * h * (self.prefix[k] + partial);
        }
        Ok(())
    }
}

/// Translation-field compliance `b = Ψ⁻¹(Φ(G))` with `Ψ` the beta law of the
/// fuzzy moments `z = (mean, std, skewness, excess kurtosis)`.
///
/// The draw `y` is the standard Gaussian field `G` sampled at the cell
/// midpoints (see [`KlExpansion::sample_fields`](crate::field::KlExpansion::sample_fields)),
/// so the compliance is evaluated directly without forming `a`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TranslationCoefficient;

struct BoundTranslation {
    config: SolveConfig,
    translator: Translator,
}

impl CoefficientModel for TranslationCoefficient {
    fn bind(&self, z: &[f64], config: &SolveConfig) -> Result<Box<dyn BoundCoefficient + '_>> {
        let params = fit_beta_from_moments(&MomentSet::from_slice(z)?)?;
        Ok(Box::new(BoundTranslation { config: *config, translator: params.translator() }))
    }
}

impl BoundCoefficient for BoundTranslation {
    fn config(&self) -> &SolveConfig {
        &self.config
    }

    fn compliance(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        if y.len() < out.len() {
            return Err(Error::DimensionMismatch { expected: out.len(), found: y.len() });
        }
        for (o, &g) in out.iter_mut().zip(y) {
            *o = self.translator.translate(g);
        }
        Ok(())
    }
}

/// A coefficient given pointwise by `a(x, y, z)`.
pub struct ModulusFn<F>(pub F);

struct BoundModulus<'a, F> {
    config: SolveConfig,
    f: &'a F,
    z: Vec<f64>,
    nodes: Vec<f64>,
}

impl<F> CoefficientModel for ModulusFn<F>
where
    F: Fn(f64, &[f64], &[f64]) -> f64 + Sync,
{
    fn bind(&self, z: &[f64], config: &SolveConfig) -> Result<Box<dyn BoundCoefficient + '_>> {
        Ok(Box::new(BoundModulus { config: *config, f: &self.0, z: z.to_vec(), nodes: config.nodes() }))
    }
}

impl<F> BoundCoefficient for BoundModulus<'_, F>
where
    F: Fn(f64, &[f64], &[f64]) -> f64,
{
    fn config(&self) -> &SolveConfig {
        &self.config
    }

    fn compliance(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, &x) in out.iter_mut().zip(&self.nodes) {
            let a = (self.f)(x, y, &self.z);
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::NonPositiveCoefficient { x });
            }
            *o = 1.0 / a;
        }
        Ok(())
    }
}

/// `u(x, y, z)`.
pub fn solve_displacement(coef: &impl CoefficientModel, x: f64, y: &[f64], z: &[f64], config: &SolveConfig) -> Result<f64> {
    coef.bind(z, config)?.displacement(y, x)
}

/// `q(y, z) = u(x, y, z)` at a fixed point, as a stochastic map.
pub struct Displacement<'a, C> {
    pub coef: &'a C,
    pub x: f64,
    pub config: SolveConfig,
}

impl<C: CoefficientModel> StochasticMap for Displacement<'_, C> {
    fn bind<'a>(&'a self, z: &[f64]) -> Result<BoundMap<'a>> {
        let bound = self.coef.bind(z, &self.config)?;
        let x = self.x;
        Ok(Box::new(move |y| bound.displacement(y, x)))
    }
}

/// `q(y, z) = (u(x_1, y, z), ..., u(x_k, y, z))`, as a vector-valued stochastic map.
pub struct DisplacementProfile<'a, C> {
    pub coef: &'a C,
    pub xs: Vec<f64>,
    pub config: SolveConfig,
}

impl<C: CoefficientModel> StochasticVectorMap for DisplacementProfile<'_, C> {
    fn outputs(&self) -> usize {
        self.xs.len()
    }

    fn bind<'a>(&'a self, z: &[f64]) -> Result<BoundVectorMap<'a>> {
        let bound = self.coef.bind(z, &self.config)?;
        Ok(Box::new(move |y, out| bound.profile(y, &self.xs, out)))
    }
}

/// Range of `u(x, y, ·)` over the joint α-cut of `fvec`, at a fixed draw `y`.
pub fn solution_alpha_cut(
    coef: &impl CoefficientModel,
    x: f64,
    y: &[f64],
    fvec: &FuzzyVector,
    alpha: f64,
    sampling: &CutSampling,
    config: &SolveConfig,
) -> Result<Interval> {
    let sweep = evaluate_over_cuts(fvec, &[alpha], sampling, 1, |z| Ok(vec![solve_displacement(coef, x, y, z, config)?]))?;
    Ok(sweep.raw_cuts(0)[0])
}

/// Fuzzy mean displacement `E[u(x, y, z̃)]`.
pub fn expected_displacement(
    coef: &impl CoefficientModel,
    x: f64,
    fvec: &FuzzyVector,
    draws: &DrawSet,
    levels: &[f64],
    sampling: &CutSampling,
    config: &SolveConfig,
) -> Result<FuzzyVariable> {
    fuzzy_expectation(&Displacement { coef, x, config: *config }, fvec, draws, levels, sampling)
}

/// Fuzzy mean displacement field `E[u(x, y, z̃)]` at every point of `xs`.
pub fn expected_displacement_field(
    coef: &impl CoefficientModel,
    xs: &[f64],
    fvec: &FuzzyVector,
    draws: &DrawSet,
    levels: &[f64],
    sampling: &CutSampling,
    config: &SolveConfig,
) -> Result<Vec<FuzzyVariable>> {
    fuzzy_expectation_vector(&DisplacementProfile { coef, xs: xs.to_vec(), config: *config }, fvec, draws, levels, sampling)
}
