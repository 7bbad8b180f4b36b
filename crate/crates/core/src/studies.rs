//! The two reference studies.
//!
//! *Lognormal bar*: `a(x, y, z) = (2 + sin(2πx/L)) e^{z1 + y z2}` on `L = 2`
//! with triangular fuzzy `z1, z2` and `y ~ N(0, 1)`. Quantities: the fuzzy
//! mean end displacement (Q1), the fuzzy mean field near the loaded end
//! (Q2) and the fuzzy CDF of the end displacement (Q3).
//!
//! *Fiber composite*: the compliance is a translation field with fuzzy
//! (fully interactive) mean, deviation, skewness and excess kurtosis, on a
//! 1.7 mm bar. Quantities: the fuzzy mean field over the first millimetre
//! (Q4), the fuzzy CDF of `u(L/4)` (Q5) and the fuzzy probability that
//! `u(L/4)` reaches a critical value (Q6).
//!
//! Each study makes one pass over the joint cuts: every cut point draws the
//! same Monte Carlo sample (common random numbers) and yields all quantities
//! at once, so every output shares one set of optimizers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{ecdf_at, evaluate_over_cuts, CutSampling, PBoxFamily, DEFAULT_SAMPLES};
use crate::field::{midpoint_grid, CovarianceSpec, DrawSet, KlExpansion, Sampler};
use crate::fuzzy::{FuzzyVariable, DEFAULT_LEVELS};
use crate::interaction::{FuzzyVector, Interaction};
use crate::solver::{CoefficientModel, LognormalCoefficient, SolveConfig, TranslationCoefficient};
use crate::translation::{fit_beta_from_moments, MomentSet};

/// `count` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|k| if k + 1 == count { hi } else { lo + (hi - lo) * k as f64 / (count - 1) as f64 }).collect(),
    }
}

/// Inclusive range sampled at `count` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Span {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.count == 0 || (self.count > 1 && !(self.lo < self.hi)) {
            return Err(Error::invalid(format!("bad range [{}, {}] with {} points", self.lo, self.hi, self.count)));
        }
        Ok(linspace(self.lo, self.hi, self.count))
    }
}

/// Parameters of the lognormal-bar study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LognormalStudy {
    pub length: f64,
    pub cells: usize,
    pub samples: usize,
    pub levels: Vec<f64>,
    pub seed: u64,
    /// Triangular `⟨left, mode, right⟩` for the log-mean and log-deviation.
    pub inputs: [[f64; 3]; 2],
    pub sampling: CutSampling,
    /// Points of the field quantity.
    pub field: Span,
    /// Grid of the fuzzy CDF.
    pub cdf: Span,
}

impl Default for LognormalStudy {
    fn default() -> Self {
        Self {
            length: 2.0,
            cells: 200,
            samples: DEFAULT_SAMPLES,
            levels: DEFAULT_LEVELS.to_vec(),
            seed: 2024,
            inputs: [[1.00, 1.06, 1.20], [0.10, 0.13, 0.20]],
            sampling: CutSampling::default(),
            field: Span { lo: 1.8, hi: 2.0, count: 21 },
            cdf: Span { lo: 0.2, hi: 0.6, count: 41 },
        }
    }
}

/// Outputs of the lognormal-bar study for one interaction mode.
#[derive(Clone, Debug, PartialEq)]
pub struct LognormalOutcome {
    pub mode: Interaction,
    pub q1: FuzzyVariable,
    pub q2: Vec<(f64, FuzzyVariable)>,
    pub q3: PBoxFamily,
    /// Sample standard deviation of `u(L)` at the modal parameters.
    pub q1_modal_std: f64,
}

impl LognormalStudy {
    pub fn fuzzy_inputs(&self, mode: Interaction) -> Result<FuzzyVector> {
        let [a, b] = self.inputs;
        FuzzyVector::new(
            vec![FuzzyVariable::triangular(a[0], a[1], a[2])?, FuzzyVariable::triangular(b[0], b[1], b[2])?],
            mode,
        )
    }

    pub fn solve_config(&self) -> Result<SolveConfig> {
        SolveConfig::new(self.length, self.cells)
    }

    /// Standard normal draws shared by both interaction modes.
    pub fn draws(&self) -> Result<DrawSet> {
        if self.samples == 0 {
            return Err(Error::invalid("at least one Monte Carlo sample is required"));
        }
        Ok(DrawSet::standard_normal(&mut Sampler::new(self.seed), self.samples, 1))
    }

    pub fn run(&self, mode: Interaction, draws: &DrawSet) -> Result<LognormalOutcome> {
        let fvec = self.fuzzy_inputs(mode)?;
        let config = self.solve_config()?;
        let xs_field = self.field.points()?;
        let grid = self.cdf.points()?;
        let mut xs = xs_field.clone();
        xs.push(self.length);
        let (nf, nx, ng) = (xs_field.len(), xs.len(), grid.len());
        let coef = LognormalCoefficient;
        let sweep = evaluate_over_cuts(&fvec, &self.levels, &self.sampling, nx + ng, |z| {
            let bound = coef.bind(z, &config)?;
            let mut sum = vec![0.0; nx];
            let mut buf = vec![0.0; nx];
            let mut ends = Vec::with_capacity(draws.len());
            for y in draws.rows() {
                bound.profile(y, &xs, &mut buf)?;
                sum.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
                ends.push(buf[nx - 1]);
            }
            ends.sort_by(f64::total_cmp);
            let mut out: Vec<f64> = sum.into_iter().map(|s| s / draws.len() as f64).collect();
            out.extend(ecdf_at(&ends, &grid));
            Ok(out)
        })?;
        let q2 = xs_field.iter().enumerate().map(|(k, &x)| Ok((x, sweep.variable(k)?))).collect::<Result<_>>()?;
        let modal = fvec.modal_point();
        let bound = coef.bind(&modal, &config)?;
        let ends: Vec<f64> = draws.rows().map(|y| bound.displacement(y, self.length)).collect::<Result<_>>()?;
        Ok(LognormalOutcome {
            mode,
            q1: sweep.variable(nf)?,
            q2,
            q3: sweep.pbox(nx..nx + ng, &grid)?,
            q1_modal_std: sample_std(&ends),
        })
    }
}

fn sample_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Parameters of the fiber-composite study. Lengths in μm, displacements in
/// the units of compliance × metres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeStudy {
    pub length_um: f64,
    pub cells: usize,
    pub samples: usize,
    pub levels: Vec<f64>,
    pub seed: u64,
    pub covariance: CovarianceSpec,
    /// Retained-variance fraction that sets the KL truncation...
    pub kl_fraction: f64,
    /// ...unless the number of terms is given explicitly.
    pub kl_terms: Option<usize>,
    pub sampling: CutSampling,
    /// Points of the mean field, in μm.
    pub field_um: Span,
    /// Where the CDF and failure probability are evaluated, in μm.
    pub probe_um: f64,
    /// Grid of the fuzzy CDF.
    pub cdf: Span,
    /// Critical displacements; failure is `u(probe) ≥ u_cr`.
    pub critical: Vec<f64>,
}

impl Default for CompositeStudy {
    fn default() -> Self {
        Self {
            length_um: 1700.0,
            cells: 170,
            samples: DEFAULT_SAMPLES,
            levels: DEFAULT_LEVELS.to_vec(),
            seed: 2024,
            covariance: CovarianceSpec::fiber_composite(),
            kl_fraction: 0.9,
            kl_terms: None,
            sampling: CutSampling::default(),
            field_um: Span { lo: 0.0, hi: 1000.0, count: 101 },
            probe_um: 425.0,
            cdf: Span { lo: 4.0e-5, hi: 8.0e-5, count: 81 },
            critical: vec![6.9e-5],
        }
    }
}

/// Outputs of the fiber-composite study.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeOutcome {
    pub kl_terms: usize,
    pub retained_variance: f64,
    /// `(x in m, fuzzy mean displacement)`.
    pub q4: Vec<(f64, FuzzyVariable)>,
    pub q5: PBoxFamily,
    /// `(u_cr, fuzzy failure probability)`.
    pub q6: Vec<(f64, FuzzyVariable)>,
}

/// A discretized joint-cut point whose moments no beta law can match.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfeasiblePoint {
    pub alpha: f64,
    pub moments: MomentSet,
    pub suggested_excess_kurtosis: f64,
}

impl CompositeStudy {
    pub fn solve_config(&self) -> Result<SolveConfig> {
        SolveConfig::new(self.length_um * 1e-6, self.cells)
    }

    pub fn expansion(&self) -> Result<KlExpansion> {
        KlExpansion::decompose(&midpoint_grid(self.length_um, self.cells), &self.covariance)
    }

    pub fn truncation(&self, kl: &KlExpansion) -> Result<usize> {
        match self.kl_terms {
            Some(0) => Err(Error::invalid("at least one KL term is required")),
            Some(m) if m > kl.modes() => Err(Error::DimensionMismatch { expected: kl.modes(), found: m }),
            Some(m) => Ok(m),
            None => kl.truncation_order(self.kl_fraction),
        }
    }

    /// Gaussian field realizations at the cell midpoints.
    pub fn draws(&self, kl: &KlExpansion, m: usize) -> Result<DrawSet> {
        if self.samples == 0 {
            return Err(Error::invalid("at least one Monte Carlo sample is required"));
        }
        kl.sample_fields(&mut Sampler::new(self.seed), m, self.samples)
    }

    /// Cut points whose moments are outside the beta-feasible region.
    pub fn infeasible_points(&self, moments: &FuzzyVector) -> Result<Vec<InfeasiblePoint>> {
        let mut out = Vec::new();
        for &alpha in &self.levels {
            for z in self.sampling.points(&moments.joint_alpha_cut(alpha)?)? {
                match fit_beta_from_moments(&MomentSet::from_slice(&z)?) {
                    Err(Error::Infeasible { moments, suggested_excess_kurtosis }) => {
                        out.push(InfeasiblePoint { alpha, moments, suggested_excess_kurtosis })
                    }
                    Err(e) => return Err(e),
                    Ok(_) => {}
                }
            }
        }
        Ok(out)
    }

    pub fn run(&self, moments: &FuzzyVector, kl: &KlExpansion, draws: &DrawSet) -> Result<CompositeOutcome> {
        if moments.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: moments.dim() });
        }
        let config = self.solve_config()?;
        let xs_field: Vec<f64> = self.field_um.points()?.iter().map(|x| x * 1e-6).collect();
        let grid = self.cdf.points()?;
        if self.critical.is_empty() {
            return Err(Error::invalid("no critical displacement given"));
        }
        let mut xs = xs_field.clone();
        xs.push(self.probe_um * 1e-6);
        let (nf, ng, nc) = (xs_field.len(), grid.len(), self.critical.len());
        let coef = TranslationCoefficient;
        let sweep = evaluate_over_cuts(moments, &self.levels, &self.sampling, nf + ng + nc, |z| {
            let bound = coef.bind(z, &config)?;
            let mut sum = vec![0.0; nf];
            let mut buf = vec![0.0; nf + 1];
            let mut probe = Vec::with_capacity(draws.len());
            for y in draws.rows() {
                bound.profile(y, &xs, &mut buf)?;
                sum.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
                probe.push(buf[nf]);
            }
            probe.sort_by(f64::total_cmp);
            let n = draws.len() as f64;
            let mut out: Vec<f64> = sum.into_iter().map(|s| s / n).collect();
            out.extend(ecdf_at(&probe, &grid));
            out.extend(self.critical.iter().map(|&c| (probe.len() - probe.partition_point(|&v| v < c)) as f64 / n));
            Ok(out)
        })?;
        let m = self.truncation(kl)?;
        Ok(CompositeOutcome {
            kl_terms: m,
            retained_variance: kl.eigenvalues()[..m].iter().sum::<f64>() / kl.trace(),
            q4: xs_field.iter().enumerate().map(|(k, &x)| Ok((x, sweep.variable(k)?))).collect::<Result<_>>()?,
            q5: sweep.pbox(nf..nf + ng, &grid)?,
            q6: self.critical.iter().enumerate().map(|(k, &c)| Ok((c, sweep.variable(nf + ng + k)?))).collect::<Result<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::composite_moments;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(1.8, 2.0, 21).last(), Some(&2.0));
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert!(Span { lo: 1.0, hi: 0.0, count: 3 }.points().is_err());
    }

    #[test]
    fn small_lognormal_run() {
        let study = LognormalStudy { samples: 200, cdf: Span { lo: 0.2, hi: 0.6, count: 5 }, ..Default::default() };
        let draws = study.draws().unwrap();
        let non = study.run(Interaction::NonInteractive, &draws).unwrap();
        let full = study.run(Interaction::FullyInteractive, &draws).unwrap();
        for (a, b) in non.q1.cuts().iter().zip(full.q1.cuts()) {
            assert!(a.contains_interval(b));
        }
        assert!(non.q3.contains(&full.q3));
        assert!(non.q3.validate().is_empty());
        assert_eq!(non.q2.len(), 21);
        assert!(non.q1_modal_std > 0.0);
    }

    #[test]
    fn small_composite_run() {
        let study = CompositeStudy {
            samples: 40,
            sampling: CutSampling::uniform(11),
            critical: vec![6.0e-5, 6.9e-5],
            ..Default::default()
        };
        let moments = composite_moments().unwrap();
        assert!(study.infeasible_points(&moments).unwrap().is_empty());
        let kl = study.expansion().unwrap();
        let m = study.truncation(&kl).unwrap();
        let out = study.run(&moments, &kl, &study.draws(&kl, m).unwrap()).unwrap();
        assert_eq!(out.q4.len(), 101);
        assert!(out.q4[0].1.cuts().iter().all(|c| c.lo() == 0.0 && c.hi() == 0.0));
        for (a, b) in out.q6[1].1.cuts().iter().zip(out.q6[0].1.cuts()) {
            assert!(a.lo() <= b.lo() && a.hi() <= b.hi());
        }
        assert!(out.q5.validate().is_empty());
        assert!(out.retained_variance >= 0.9);
    }

    #[test]
    fn infeasible_moments_are_listed() {
        let study = CompositeStudy { sampling: CutSampling::uniform(5), levels: vec![0.0, 1.0], ..Default::default() };
        let bad = FuzzyVector::fully_interactive(vec![
            FuzzyVariable::crisp(0.13).unwrap(),
            FuzzyVariable::crisp(0.02).unwrap(),
            FuzzyVariable::crisp(1.0).unwrap(),
            FuzzyVariable::triangular(-2.0, 2.0, 2.5).unwrap(),
        ])
        .unwrap();
        let pts = study.infeasible_points(&bad).unwrap();
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|p| {
            let (lo, hi) = MomentSet::beta_kurtosis_range(p.moments.skewness);
            p.moments.excess_kurtosis <= lo || p.moments.excess_kurtosis >= hi
        }));
    }
}
