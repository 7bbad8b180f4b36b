//! Command-line front end.
//!
//! Every command writes CSV tables (each opened by a `# fsuq <table> v1`
//! schema line) and a `report.json` with the fully resolved configuration
//! into the output directory. Exit codes: 0 success, 2 usage or
//! configuration error, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::data::{
    build_moment_vector, composite_moments, fit_membership, fit_moment_memberships, harmonic_coarsen,
    station_moments, synthesize_fiber_map, FittedMembership, PixelMap, RunLengthMap, A_FIBER, A_MATRIX,
    DEFAULT_BINS, DEFAULT_FIBER_RADIUS_PX, ELEMENT_PX,
};
use crate::error::{Error, Result};
use crate::extension::{extend, CutSampling, PBoxFamily};
use crate::field::{midpoint_grid, CovarianceSpec, KlExpansion};
use crate::fuzzy::{FuzzyVariable, DEFAULT_LEVELS};
use crate::interaction::{FuzzyVector, Interaction};
use crate::studies::{CompositeStudy, LognormalStudy, Span};
use crate::translation::{fit_beta_from_moments, MomentSet};

/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fsuq", version, about = "Fuzzy-stochastic uncertainty quantification")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Default)]
pub struct CommonArgs {
    /// Seed of the Monte Carlo sample.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated α levels, ascending, including 0 and 1.
    #[arg(long, global = true, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Monte Carlo sample size.
    #[arg(long, global = true)]
    pub ms: Option<usize>,
    /// Points along a polygonal joint cut.
    #[arg(long, global = true)]
    pub mf: Option<usize>,
    /// Number of quadrature cells.
    #[arg(long, global = true)]
    pub nh: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub interaction: Option<InteractionArg>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionArg {
    Non,
    Full,
    Both,
}

impl InteractionArg {
    fn modes(self) -> Vec<Interaction> {
        match self {
            InteractionArg::Non => vec![Interaction::NonInteractive],
            InteractionArg::Full => vec![Interaction::FullyInteractive],
            InteractionArg::Both => vec![Interaction::NonInteractive, Interaction::FullyInteractive],
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lognormal bar: fuzzy mean end displacement, mean field near the end, CDF of the end displacement.
    Example1,
    /// Fiber composite: fuzzy mean field, CDF and failure probability at L/4.
    Example2 {
        /// Fitted moments written by `ingest` (fitted_moments.json) instead of the built-in decagons.
        #[arg(long)]
        moments: Option<PathBuf>,
        /// Comma-separated critical displacements.
        #[arg(long, value_delimiter = ',')]
        ucr: Option<Vec<f64>>,
    },
    /// Extend a crisp map to fuzzy inputs given as cut tables (alpha,lo,hi).
    Extend {
        /// Cut table of one input; repeat for each input in order.
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = MapArg::Identity)]
        map: MapArg,
    },
    /// Fit a membership function to one CSV column of values.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Column name; defaults to the first column.
        #[arg(long)]
        column: Option<String>,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
    },
    /// Coarsen a fiber map into element moduli and fit fuzzy compliance moments.
    Ingest {
        /// Map as binary PGM or run-length JSON; omit to synthesize one.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 1700)]
        width: usize,
        #[arg(long, default_value_t = 500)]
        height: usize,
        #[arg(long, default_value_t = 0.63)]
        volume_fraction: f64,
        #[arg(long, default_value_t = DEFAULT_FIBER_RADIUS_PX)]
        radius: f64,
        #[arg(long, default_value_t = ELEMENT_PX)]
        element: usize,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
    },
    /// Karhunen–Loève truncation for a midpoint grid (cells from --nh).
    KlInfo {
        #[arg(long, default_value_t = 1700.0)]
        length_um: f64,
        #[arg(long, default_value_t = 0.9)]
        fraction: f64,
        #[arg(long, default_value_t = 2.0)]
        exponent: f64,
        #[arg(long, default_value_t = 20.0)]
        correlation: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapArg {
    /// z1
    Identity,
    /// z1 + z2 + ...
    Sum,
    /// z1 · z2 · ...
    Product,
    /// z1 − z2
    Difference,
    /// z1² − z2
    SquareMinus,
    Min,
    Max,
}

impl MapArg {
    fn eval(self, z: &[f64]) -> Result<f64> {
        let need = |n: usize| {
            if z.len() < n {
                Err(Error::DimensionMismatch { expected: n, found: z.len() })
            } else {
                Ok(())
            }
        };
        Ok(match self {
            MapArg::Identity => {
                need(1)?;
                z[0]
            }
            MapArg::Sum => z.iter().sum(),
            MapArg::Product => z.iter().product(),
            MapArg::Difference => {
                need(2)?;
                z[0] - z[1]
            }
            MapArg::SquareMinus => {
                need(2)?;
                z[0] * z[0] - z[1]
            }
            MapArg::Min => z.iter().copied().fold(f64::INFINITY, f64::min),
            MapArg::Max => z.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Settings read from `--config`; every field is optional and flags win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub alphas: Option<Vec<f64>>,
    pub ms: Option<usize>,
    pub mf: Option<usize>,
    pub nh: Option<usize>,
    pub interaction: Option<InteractionArg>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub box_resolution: Option<usize>,
    pub refine: Option<bool>,
    /// Bar length of the lognormal study.
    pub length: Option<f64>,
    /// Triangular inputs of the lognormal study.
    pub inputs: Option<[[f64; 3]; 2]>,
    pub field: Option<Span>,
    pub cdf: Option<Span>,
    pub length_um: Option<f64>,
    pub covariance: Option<CovarianceSpec>,
    pub kl_fraction: Option<f64>,
    pub kl_terms: Option<usize>,
    pub probe_um: Option<f64>,
    pub critical: Option<Vec<f64>>,
    pub moments: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Overlay the command-line flags.
    pub fn with_flags(mut self, flags: &CommonArgs) -> Self {
        macro_rules! overlay {
            ($($f:ident),*) => { $( if flags.$f.is_some() { self.$f = flags.$f.clone(); } )* };
        }
        overlay!(seed, alphas, ms, mf, nh, interaction, out, workers);
        self
    }

    fn sampling(&self) -> CutSampling {
        let d = CutSampling::default();
        CutSampling {
            resolution: self.mf.unwrap_or(d.resolution),
            box_resolution: self.box_resolution.unwrap_or(d.box_resolution),
            refine: self.refine.unwrap_or(d.refine),
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn lognormal_study(&self) -> LognormalStudy {
        let d = LognormalStudy::default();
        LognormalStudy {
            length: self.length.unwrap_or(d.length),
            cells: self.nh.unwrap_or(d.cells),
            samples: self.ms.unwrap_or(d.samples),
            levels: self.alphas.clone().unwrap_or(d.levels),
            seed: self.seed.unwrap_or(d.seed),
            inputs: self.inputs.unwrap_or(d.inputs),
            sampling: self.sampling(),
            field: self.field.unwrap_or(d.field),
            cdf: self.cdf.unwrap_or(d.cdf),
        }
    }

    pub fn composite_study(&self) -> CompositeStudy {
        let d = CompositeStudy::default();
        CompositeStudy {
            length_um: self.length_um.unwrap_or(d.length_um),
            cells: self.nh.unwrap_or(d.cells),
            samples: self.ms.unwrap_or(d.samples),
            levels: self.alphas.clone().unwrap_or(d.levels),
            seed: self.seed.unwrap_or(d.seed),
            covariance: self.covariance.unwrap_or(d.covariance),
            kl_fraction: self.kl_fraction.unwrap_or(d.kl_fraction),
            kl_terms: self.kl_terms.or(d.kl_terms),
            sampling: self.sampling(),
            field_um: self.field.unwrap_or(d.field_um),
            probe_um: self.probe_um.unwrap_or(d.probe_um),
            cdf: self.cdf.unwrap_or(d.cdf),
            critical: self.critical.clone().unwrap_or(d.critical),
        }
    }
}

/// Parse `args` (including the program name), run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Run a parsed command.
pub fn execute(cli: &Cli) -> Result<()> {
    let file = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let config = file.with_flags(&cli.common);
    let job = || match &cli.command {
        Command::Example1 => cmd_example1(&config),
        Command::Example2 { moments, ucr } => {
            let mut config = config.clone();
            if moments.is_some() {
                config.moments = moments.clone();
            }
            if ucr.is_some() {
                config.critical = ucr.clone();
            }
            cmd_example2(&config)
        }
        Command::Extend { inputs, map } => cmd_extend(&config, inputs, *map),
        Command::Fit { input, column, bins } => cmd_fit(&config, input, column.as_deref(), *bins),
        Command::Ingest { map, width, height, volume_fraction, radius, element, bins } => cmd_ingest(
            &config,
            &IngestArgs {
                map: map.clone(),
                width: *width,
                height: *height,
                volume_fraction: *volume_fraction,
                radius: *radius,
                element: *element,
                bins: *bins,
            },
        ),
        Command::KlInfo { length_um, fraction, exponent, correlation } => {
            cmd_kl_info(&config, *length_um, *fraction, *exponent, *correlation)
        }
    };
    match config.workers {
        Some(0) => Err(Error::invalid("--workers must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("worker pool: {e}")))?
            .install(job),
        None => job(),
    }
}

fn schema(table: &str, columns: &str) -> String {
    format!("# fsuq {table} v1\n{columns}\n")
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_report(dir: &Path, report: serde_json::Value) -> Result<()> {
    write(dir, "report.json", &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn cut_rows(out: &mut String, prefix: &str, var: &FuzzyVariable) {
    for (a, c) in var.levels().iter().zip(var.cuts()) {
        out.push_str(&format!("{prefix}{a},{},{}\n", c.lo(), c.hi()));
    }
}

fn pbox_rows(out: &mut String, prefix: &str, pbox: &PBoxFamily) {
    for line in pbox.to_csv().lines().skip(1) {
        out.push_str(prefix);
        out.push_str(line);
        out.push('\n');
    }
}

/// Split a cut table with leading key columns into one variable per key.
///
/// Rows are grouped by every column before the trailing `alpha,lo,hi`, in
/// order of first appearance; schema and header lines are skipped.
pub fn split_cut_table(text: &str) -> Result<Vec<(String, FuzzyVariable)>> {
    let mut groups: Vec<(String, String)> = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') || line.split(',').any(|c| c.trim() == "alpha") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            return Err(Error::Parse(format!("expected at least alpha,lo,hi in {line:?}")));
        }
        let key = cols[..cols.len() - 3].join(",");
        let row = cols[cols.len() - 3..].join(",") + "\n";
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, body)) => body.push_str(&row),
            None => groups.push((key, row)),
        }
    }
    groups.into_iter().map(|(k, body)| Ok((k, FuzzyVariable::from_cut_csv(&body)?))).collect()
}

fn cmd_example1(config: &RunConfig) -> Result<()> {
    let study = config.lognormal_study();
    let modes = config.interaction.unwrap_or(InteractionArg::Both).modes();
    let dir = config.out_dir();
    let started = Instant::now();
    let draws = study.draws()?;
    let mut q1 = schema("q1_membership", "interaction,alpha,lo,hi");
    let mut q2 = schema("q2_field", "interaction,x,alpha,lo,hi");
    let mut q3 = schema("q3_pbox", "interaction,alpha,u0,F_left,F_right");
    let mut timings = serde_json::Map::new();
    let mut summary = serde_json::Map::new();
    for mode in modes {
        let t = Instant::now();
        let res = study.run(mode, &draws)?;
        let label = mode.label();
        cut_rows(&mut q1, &format!("{label},"), &res.q1);
        for (x, v) in &res.q2 {
            cut_rows(&mut q2, &format!("{label},{x},"), v);
        }
        pbox_rows(&mut q3, &format!("{label},"), &res.q3);
        timings.insert(label.into(), json!(t.elapsed().as_secs_f64()));
        summary.insert(
            label.into(),
            json!({
                "q1_cuts": res.q1.cuts().iter().map(|c| [c.lo(), c.hi()]).collect::<Vec<_>>(),
                "q1_mc_std_error": res.q1_modal_std / (study.samples as f64).sqrt(),
            }),
        );
    }
    write(&dir, "q1_membership.csv", &q1)?;
    write(&dir, "q2_field.csv", &q2)?;
    write(&dir, "q3_pbox.csv", &q3)?;
    timings.insert("total".into(), json!(started.elapsed().as_secs_f64()));
    write_report(
        &dir,
        json!({
            "command": "example1",
            "version": env!("CARGO_PKG_VERSION"),
            "config": study,
            "interaction": config.interaction.unwrap_or(InteractionArg::Both),
            "workers": rayon::current_num_threads(),
            "results": summary,
            "timings_s": timings,
        }),
    )
}

fn load_moments(path: &Path) -> Result<FuzzyVector> {
    let fitted: Vec<FittedMembership> = serde_json::from_str(&fs::read_to_string(path)?)?;
    build_moment_vector(&fitted.into_iter().map(|f| f.variable).collect::<Vec<_>>())
}

fn cmd_example2(config: &RunConfig) -> Result<()> {
    let study = config.composite_study();
    let dir = config.out_dir();
    let started = Instant::now();
    let moments = match &config.moments {
        Some(path) => load_moments(path)?,
        None => composite_moments()?,
    };
    let infeasible = study.infeasible_points(&moments)?;
    if let Some(first) = infeasible.first() {
        let mut table = schema("infeasible", "alpha,mean,std,skewness,excess_kurtosis,suggested_excess_kurtosis");
        for p in &infeasible {
            let m = p.moments;
            table.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.alpha, m.mean, m.std, m.skewness, m.excess_kurtosis, p.suggested_excess_kurtosis
            ));
        }
        write(&dir, "infeasible.csv", &table)?;
        eprintln!("{} cut points have moments no beta law can match; see infeasible.csv", infeasible.len());
        return Err(Error::Infeasible { moments: first.moments, suggested_excess_kurtosis: first.suggested_excess_kurtosis });
    }
    let t = Instant::now();
    let kl = study.expansion()?;
    let m = study.truncation(&kl)?;
    let draws = study.draws(&kl, m)?;
    let setup = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let res = study.run(&moments, &kl, &draws)?;
    let sweep = t.elapsed().as_secs_f64();

    let mut q4 = schema("q4_field", "x,alpha,lo,hi");
    for (x, v) in &res.q4 {
        cut_rows(&mut q4, &format!("{x},"), v);
    }
    let mut q5 = schema("q5_pbox", "alpha,u0,F_left,F_right");
    pbox_rows(&mut q5, "", &res.q5);
    let mut q6 = schema("q6_membership", "u_cr,alpha,lo,hi");
    for (c, v) in &res.q6 {
        cut_rows(&mut q6, &format!("{c},"), v);
    }
    write(&dir, "q4_field.csv", &q4)?;
    write(&dir, "q5_pbox.csv", &q5)?;
    write(&dir, "q6_membership.csv", &q6)?;
    let modal = moments.modal_point();
    let beta = fit_beta_from_moments(&MomentSet::from_slice(&modal)?)?;
    write_report(
        &dir,
        json!({
            "command": "example2",
            "version": env!("CARGO_PKG_VERSION"),
            "config": study,
            "moments_source": config.moments.as_ref().map_or("built-in decagons".to_string(), |p| p.display().to_string()),
            "workers": rayon::current_num_threads(),
            "kl_terms": res.kl_terms,
            "retained_variance": res.retained_variance,
            "modal_moments": modal,
            "modal_beta": beta,
            "q6_cuts": res.q6.iter().map(|(c, v)| json!({
                "u_cr": c,
                "cuts": v.cuts().iter().map(|i| [i.lo(), i.hi()]).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "timings_s": { "setup": setup, "sweep": sweep, "total": started.elapsed().as_secs_f64() },
        }),
    )
}

fn cmd_extend(config: &RunConfig, inputs: &[PathBuf], map: MapArg) -> Result<()> {
    let vars = inputs
        .iter()
        .map(|p| FuzzyVariable::from_cut_csv(&fs::read_to_string(p)?))
        .collect::<Result<Vec<_>>>()?;
    let levels = config.alphas.clone().unwrap_or_else(|| vars[0].levels().to_vec());
    let modes = config.interaction.unwrap_or(InteractionArg::Non);
    let sampling = config.sampling();
    let dir = config.out_dir();
    let g = |z: &[f64]| map.eval(z);
    let mut table = if modes == InteractionArg::Both {
        schema("extend", "interaction,alpha,lo,hi")
    } else {
        schema("extend", "alpha,lo,hi")
    };
    for mode in modes.modes() {
        let out = extend(&g, &FuzzyVector::new(vars.clone(), mode)?, &levels, &sampling)?;
        let prefix = if modes == InteractionArg::Both { format!("{},", mode.label()) } else { String::new() };
        cut_rows(&mut table, &prefix, &out);
    }
    write(&dir, "extend.csv", &table)?;
    write_report(
        &dir,
        json!({
            "command": "extend",
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": inputs,
            "map": format!("{map:?}"),
            "levels": levels,
            "interaction": modes,
            "sampling": sampling,
        }),
    )
}

fn read_column(text: &str, column: Option<&str>) -> Result<Vec<f64>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).peekable();
    let first = lines.peek().copied().ok_or_else(|| Error::Parse("no data rows".into()))?;
    let has_header = first.split(',').any(|c| c.trim().parse::<f64>().is_err());
    let index = if has_header {
        let header: Vec<&str> = first.split(',').map(str::trim).collect();
        lines.next();
        match column {
            Some(name) => header
                .iter()
                .position(|h| *h == name)
                .ok_or_else(|| Error::invalid(format!("no column {name:?} in {header:?}")))?,
            None => 0,
        }
    } else {
        match column {
            Some(name) => name.parse().map_err(|_| Error::invalid(format!("no header row to look up {name:?}")))?,
            None => 0,
        }
    };
    lines
        .map(|l| {
            let cell = l.split(',').nth(index).ok_or_else(|| Error::Parse(format!("row {l:?} has no column {index}")))?;
            cell.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{cell:?}: {e}")))
        })
        .collect()
}

fn cmd_fit(config: &RunConfig, input: &Path, column: Option<&str>, bins: usize) -> Result<()> {
    let values = read_column(&fs::read_to_string(input)?, column)?;
    let levels = config.alphas.clone().unwrap_or_else(|| DEFAULT_LEVELS.to_vec());
    let fitted = fit_membership(&values, bins, &levels)?;
    let dir = config.out_dir();
    let mut table = schema("fit", "alpha,lo,hi");
    cut_rows(&mut table, "", &fitted.variable);
    write(&dir, "fit.csv", &table)?;
    write(&dir, "fit.json", &(serde_json::to_string_pretty(&fitted)? + "\n"))?;
    write_report(
        &dir,
        json!({
            "command": "fit",
            "version": env!("CARGO_PKG_VERSION"),
            "input": input,
            "column": column,
            "values": values.len(),
            "bins": bins,
            "levels": levels,
            "residuals": fitted.residuals,
        }),
    )
}

struct IngestArgs {
    map: Option<PathBuf>,
    width: usize,
    height: usize,
    volume_fraction: f64,
    radius: f64,
    element: usize,
    bins: usize,
}

fn cmd_ingest(config: &RunConfig, args: &IngestArgs) -> Result<()> {
    let dir = config.out_dir();
    let seed = config.seed.unwrap_or(2024);
    let map = match &args.map {
        Some(path) if path.extension().is_some_and(|e| e == "json") => {
            let rl: RunLengthMap = serde_json::from_str(&fs::read_to_string(path)?)?;
            PixelMap::from_run_length(&rl)?
        }
        Some(path) => PixelMap::from_pgm(&fs::read(path)?)?,
        None => {
            let map = synthesize_fiber_map(seed, args.width, args.height, args.volume_fraction, args.radius)?;
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("map.pgm"), map.to_pgm())?;
            map
        }
    };
    let ensemble = harmonic_coarsen(&map, args.element, A_FIBER, A_MATRIX)?;
    let moments = station_moments(&ensemble)?;
    let fitted = fit_moment_memberships(&moments, args.bins)?;
    write(&dir, "ensemble.csv", &format!("# fsuq ensemble v1\n{}", ensemble.to_csv()))?;
    let mut table = schema("station_moments", "station,x_j,mean,std,skewness,excess_kurtosis");
    for (j, m) in moments.iter().enumerate() {
        table.push_str(&format!(
            "{j},{},{},{},{},{}\n",
            ensemble.station_x(j),
            m.mean,
            m.std,
            m.skewness,
            m.excess_kurtosis
        ));
    }
    write(&dir, "station_moments.csv", &table)?;
    let names = ["mean", "std", "skewness", "excess_kurtosis"];
    let mut table = schema("fitted_moments", "moment,alpha,lo,hi");
    for (name, f) in names.iter().zip(&fitted) {
        cut_rows(&mut table, &format!("{name},"), &f.variable);
    }
    write(&dir, "fitted_moments.csv", &table)?;
    write(&dir, "fitted_moments.json", &(serde_json::to_string_pretty(&fitted)? + "\n"))?;
    write_report(
        &dir,
        json!({
            "command": "ingest",
            "version": env!("CARGO_PKG_VERSION"),
            "map": args.map.as_ref().map_or("synthesized".to_string(), |p| p.display().to_string()),
            "seed": seed,
            "width": map.width(),
            "height": map.height(),
            "volume_fraction": map.occupancy_fraction(),
            "element_px": args.element,
            "bars": ensemble.bars(),
            "stations": ensemble.stations(),
            "bins": args.bins,
            "residuals": fitted.iter().map(|f| f.residuals).collect::<Vec<_>>(),
        }),
    )
}

fn cmd_kl_info(config: &RunConfig, length_um: f64, fraction: f64, exponent: f64, correlation: f64) -> Result<()> {
    let cells = config.nh.unwrap_or(170);
    let spec = CovarianceSpec::new(exponent, correlation)?;
    let kl = KlExpansion::decompose(&midpoint_grid(length_um, cells), &spec)?;
    let m = kl.truncation_order(fraction)?;
    let retained = kl.eigenvalues()[..m].iter().sum::<f64>() / kl.trace();
    println!(
        "m = {m} terms retain {:.4} of the variance (target {fraction}) on {cells} midpoints over {length_um} um",
        retained
    );
    let dir = config.out_dir();
    write(&dir, "kl_eigen.csv", &format!("# fsuq kl_eigen v1\n{}", kl.to_csv()))?;
    write_report(
        &dir,
        json!({
            "command": "kl-info",
            "version": env!("CARGO_PKG_VERSION"),
            "length_um": length_um,
            "cells": cells,
            "covariance": spec,
            "fraction": fraction,
            "terms": m,
            "retained_variance": retained,
            "trace": kl.trace(),
            "leading_eigenvalues": &kl.eigenvalues()[..m.min(kl.modes())],
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = RunConfig { seed: Some(1), ms: Some(10), ..Default::default() };
        let flags = CommonArgs { seed: Some(7), ..Default::default() };
        let merged = file.with_flags(&flags);
        assert_eq!((merged.seed, merged.ms), (Some(7), Some(10)));
        assert_eq!(merged.lognormal_study().samples, 10);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 3}"#).is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["fsuq", "no-such-command"]), EXIT_USAGE);
        assert_eq!(run(["fsuq", "example1", "--interaction", "sideways"]), EXIT_USAGE);
        assert_eq!(run(["fsuq", "--help"]), 0);
    }

    #[test]
    fn maps() {
        assert_eq!(MapArg::SquareMinus.eval(&[3.0, 1.0]).unwrap(), 8.0);
        assert_eq!(MapArg::Product.eval(&[3.0, 2.0]).unwrap(), 6.0);
        assert!(MapArg::Difference.eval(&[1.0]).is_err());
    }

    #[test]
    fn column_reading() {
        assert_eq!(read_column("a,b\n1,2\n3,4\n", Some("b")).unwrap(), vec![2.0, 4.0]);
        assert_eq!(read_column("# note\n5\n6\n", None).unwrap(), vec![5.0, 6.0]);
        assert!(read_column("a\n1\n", Some("z")).is_err());
    }

    #[test]
    fn grouped_tables() {
        let text = "# fsuq q1 v1\ninteraction,alpha,lo,hi\nnon,0,1,3\nnon,1,2,2\nfull,0,1.5,2.5\nfull,1,2,2\n";
        let groups = split_cut_table(text).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[1].0, "full");
        assert_eq!(groups[1].1.support().lo(), 1.5);
    }

    #[test]
    fn numerical_errors_exit_three() {
        assert_eq!(exit_code(&Error::DegenerateSpread), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::invalid("x")), EXIT_USAGE);
    }
}
