//! Parameter sweeps, power-law fits, and deterministic reporting.
//!
//! This is the driver layer: it wires the computational modules into grid
//! sweeps over `(μ, h)`, fits the measured quantities to power laws
//! `y = C·xᵖ`, runs the cross-module self-test battery, and serialises
//! everything as CSV / gnuplot `.dat` / JSON-manifest triples.
//!
//! Conventions shared by every sweep:
//!
//! * **Relative gaps.** The headline column is `|main − reference| /
//!   |reference|`; absolute gaps drift across `(μ, h)` cells for trivial
//!   scaling reasons and would hide the asymptotic order.
//! * **17 significant digits.** Every float is printed with `{:.16e}`, the
//!   shortest fixed width that round-trips an `f64` exactly, so reruns with
//!   the same configuration and seed produce byte-identical CSV files.
//!   Manifests store numbers as decimal strings for the same reason: JSON
//!   serialisers are free to reformat native numbers.
//! * **Sorted aggregation.** Cells run in parallel, but rows are emitted in
//!   grid order (`index = i_mu · n_h + i_h`), so thread scheduling never
//!   leaks into the output.
//! * **Failed cells are recorded, not fatal.** A cell whose computation
//!   errors produces a row with `NaN` values and the error text in the
//!   status column; the sweep carries on and the manifest lists the
//!   failures.  Only configuration errors abort a sweep.
//!
//! The worker count is read from the single environment variable
//! [`WORKER_ENV`]; when unset, all available parallelism is used.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::dirac_energy::{
    dirac_energy, radial_dirac_energy, weyl_reference, CutoffPair, KernelInput, QuadratureSpec,
    SingularWeight,
};
use crate::dynamics::{
    drift_velocity, hamiltonian, integrate_flow, self_intersections, FlowState, ModelField,
};
use crate::error::{Error, Result};
use crate::kernels::{model_kernel, radial_kernel, weyl_kernel, ModelParams};
use crate::landau::{level_count, magnetic_weyl_density, ModelScalars};
use crate::perturbation::{
    build_ladder, duhamel_series, propagator, remainder_check, BasisKind, OperatorMatrix,
    OperatorMeta,
};
use crate::regimes;

/// Environment variable naming the worker count for parallel sweeps.
pub const WORKER_ENV: &str = "MAGSPEC_WORKERS";

/// The flat Euclidean metric used by all reference kernels.
const FLAT: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

// =====================================================================
// Worker configuration
// =====================================================================

/// Reads the configured worker count: `None` when [`WORKER_ENV`] is unset.
///
/// # Errors
/// [`Error::Config`] when the variable is set but is not a positive
/// integer.
pub fn configured_workers() -> Result<Option<usize>> {
    match std::env::var(WORKER_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{WORKER_ENV}: {e}"))),
        Ok(raw) => {
            let n: usize = raw.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "{WORKER_ENV} = {raw:?} is not a positive integer"
                ))
            })?;
            if n == 0 {
                return Err(Error::Config(format!("{WORKER_ENV} must be at least 1")));
            }
            Ok(Some(n))
        }
    }
}

/// Installs the configured worker count into the global thread pool and
/// returns the count in effect.  A pool that is already initialised keeps
/// its size (first installation wins); the default is all available
/// parallelism.
///
/// # Errors
/// [`Error::Config`] when [`WORKER_ENV`] holds garbage.
pub fn install_workers() -> Result<usize> {
    if let Some(n) = configured_workers()? {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(rayon::current_num_threads())
}

// =====================================================================
// Number formatting
// =====================================================================

/// Formats a float with 17 significant digits (`{:.16e}`), the shortest
/// fixed width that round-trips every `f64` exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON value holding `x` as a decimal string with 17 significant
/// digits.  Manifests never store floats as native JSON numbers.
pub fn json_number(x: f64) -> serde_json::Value {
    serde_json::Value::String(fmt17(x))
}

/// Replaces the CSV field separator inside free-text columns.
fn sanitize(text: &str) -> String {
    text.replace(',', ";")
}

// =====================================================================
// Sweep configuration
// =====================================================================

/// What a sweep measures in each grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepQuantity {
    /// Pair-energy gap: the degenerate-model functional against the
    /// non-magnetic reference, per `(μ, h)` cell.
    DiracGap,
    /// Projector-kernel diagonal against the closed-form magnetic density.
    KernelTrace,
    /// Relative guiding-center drift error of an integrated orbit, per `μ`.
    DriftError,
    /// Self-intersections per winding of a drifting orbit, per `μ`.
    IntersectionCount,
    /// Measured series-truncation residual against its certified bound.
    DuhamelResidual,
}

impl SweepQuantity {
    /// Configuration-file spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            SweepQuantity::DiracGap => "dirac_gap",
            SweepQuantity::KernelTrace => "kernel_trace",
            SweepQuantity::DriftError => "drift_error",
            SweepQuantity::IntersectionCount => "intersection_count",
            SweepQuantity::DuhamelResidual => "duhamel_residual",
        }
    }

    /// Parses the configuration-file spelling.
    ///
    /// # Errors
    /// [`Error::Config`] for an unknown name.
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "dirac_gap" => Ok(SweepQuantity::DiracGap),
            "kernel_trace" => Ok(SweepQuantity::KernelTrace),
            "drift_error" => Ok(SweepQuantity::DriftError),
            "intersection_count" => Ok(SweepQuantity::IntersectionCount),
            "duhamel_residual" => Ok(SweepQuantity::DuhamelResidual),
            other => Err(Error::Config(format!(
                "unknown sweep quantity {other:?}; expected one of dirac_gap, \
                 kernel_trace, drift_error, intersection_count, duhamel_residual"
            ))),
        }
    }
}

/// Declarative description of one sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Measured quantity.
    pub quantity: SweepQuantity,
    /// Magnetic-coupling grid (outer loop of the row order).
    pub mu_values: Vec<f64>,
    /// Semiclassical grid (inner loop; ignored by the trajectory sweeps,
    /// whose observable is `h`-independent).
    pub h_values: Vec<f64>,
    /// Weight-singularity exponent `κ ∈ (0, 2)` of the pair functional.
    pub kappa: f64,
    /// Potential value `W` of the degenerate model.
    pub w: f64,
    /// Support radius `ρ` of the localisation pair.
    pub cutoff_radius: f64,
    /// Far-zone Gauss–Legendre order; raised automatically per cell when
    /// the reference kernel oscillates faster than this order resolves.
    pub outer_order: usize,
    /// tanh–sinh order for the singular radial direction.
    pub radial_order: usize,
    /// Gauss–Legendre order for the angular direction of the polar patch.
    pub angular_order: usize,
    /// Zone-split cap: each cell uses `γ = min(split_cap·ρ, 8√(h/μ))`.
    pub split_cap: f64,
    /// Seed for every randomised cell.
    pub seed: u64,
    /// Output stem; `.csv`, `.dat` and `.manifest.json` are derived.
    pub output: PathBuf,
}

impl SweepConfig {
    /// A sweep over the given grids with the shipped defaults for the
    /// remaining knobs: `κ = 0.5`, `W = 1`, `ρ = 1`, orders `32/64/16`,
    /// `split_cap = 0.25`, seed 42.  The radial order is sized for model
    /// profiles with a handful of active levels, whose squared kernel
    /// oscillates on the magnetic length scale.
    pub fn new(
        quantity: SweepQuantity,
        mu_values: Vec<f64>,
        h_values: Vec<f64>,
        output: impl Into<PathBuf>,
    ) -> Self {
        SweepConfig {
            quantity,
            mu_values,
            h_values,
            kappa: 0.5,
            w: 1.0,
            cutoff_radius: 1.0,
            outer_order: 32,
            radial_order: 64,
            angular_order: 16,
            split_cap: 0.25,
            seed: 42,
            output: output.into(),
        }
    }

    /// Checks the configuration-level domain; cell-level domain violations
    /// (such as `μh > 1`) surface later as recorded cell failures.
    ///
    /// # Errors
    /// [`Error::Config`] describing the first violated constraint.
    pub fn validate(&self) -> Result<()> {
        if self.mu_values.is_empty() {
            return Err(Error::Config("mu grid must not be empty".into()));
        }
        if self.h_values.is_empty() {
            return Err(Error::Config("h grid must not be empty".into()));
        }
        for &mu in &self.mu_values {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::Config(format!("mu = {mu} must be positive")));
            }
        }
        for &h in &self.h_values {
            if !(h > 0.0 && h <= 1.0) {
                return Err(Error::Config(format!("h = {h} must lie in (0, 1]")));
            }
        }
        if has_duplicates(&self.mu_values) {
            return Err(Error::Config("mu grid holds a repeated value".into()));
        }
        if has_duplicates(&self.h_values) {
            return Err(Error::Config("h grid holds a repeated value".into()));
        }
        if !(self.kappa > 0.0 && self.kappa < 2.0) {
            return Err(Error::Config(format!(
                "kappa = {} must lie in (0, 2)",
                self.kappa
            )));
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(Error::Config(format!("w = {} must be positive", self.w)));
        }
        if !(self.cutoff_radius > 0.0 && self.cutoff_radius.is_finite()) {
            return Err(Error::Config(format!(
                "cutoff_radius = {} must be positive",
                self.cutoff_radius
            )));
        }
        if !(self.split_cap > 0.0 && self.split_cap < 1.0) {
            return Err(Error::Config(format!(
                "split_cap = {} must lie in (0, 1) so the polar patch stays \
                 inside the cutoff support",
                self.split_cap
            )));
        }
        for (name, order) in [
            ("outer_order", self.outer_order),
            ("radial_order", self.radial_order),
            ("angular_order", self.angular_order),
        ] {
            if order < 2 {
                return Err(Error::Config(format!("{name} = {order} must be at least 2")));
            }
        }
        if self.output.as_os_str().is_empty() {
            return Err(Error::Config("output path must not be empty".into()));
        }
        Ok(())
    }

    /// Parses the `key = value` configuration dialect.
    ///
    /// Lines hold one `key = value` pair; `#` starts a comment; an optional
    /// `[sweep]` section header may scope the keys.  Lists are
    /// comma-separated.  Recognised keys: `quantity`, `mu`, `h` (required),
    /// `kappa`, `w`, `cutoff_radius`, `outer_order`, `radial_order`,
    /// `angular_order`, `split_cap`, `seed`, `output` (`output` required).
    ///
    /// # Errors
    /// [`Error::Config`] for syntax errors, unknown or missing keys, and
    /// domain violations.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut map = parse_key_values(text)?;
        let quantity = SweepQuantity::parse(&require(&mut map, "quantity")?)?;
        let mu_values = parse_list("mu", &require(&mut map, "mu")?)?;
        let h_values = parse_list("h", &require(&mut map, "h")?)?;
        let output = PathBuf::from(require(&mut map, "output")?);
        let mut cfg = SweepConfig::new(quantity, mu_values, h_values, output);
        if let Some(v) = take(&mut map, "kappa") {
            cfg.kappa = parse_scalar("kappa", &v)?;
        }
        if let Some(v) = take(&mut map, "w") {
            cfg.w = parse_scalar("w", &v)?;
        }
        if let Some(v) = take(&mut map, "cutoff_radius") {
            cfg.cutoff_radius = parse_scalar("cutoff_radius", &v)?;
        }
        if let Some(v) = take(&mut map, "split_cap") {
            cfg.split_cap = parse_scalar("split_cap", &v)?;
        }
        if let Some(v) = take(&mut map, "outer_order") {
            cfg.outer_order = parse_count("outer_order", &v)?;
        }
        if let Some(v) = take(&mut map, "radial_order") {
            cfg.radial_order = parse_count("radial_order", &v)?;
        }
        if let Some(v) = take(&mut map, "angular_order") {
            cfg.angular_order = parse_count("angular_order", &v)?;
        }
        if let Some(v) = take(&mut map, "seed") {
            cfg.seed = v.parse().map_err(|_| {
                Error::Config(format!("seed = {v:?} is not an unsigned integer"))
            })?;
        }
        if !map.is_empty() {
            let keys: Vec<&str> = map.keys().map(String::as_str).collect();
            return Err(Error::Config(format!(
                "unknown configuration keys: {}",
                keys.join(", ")
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a configuration file.
    ///
    /// # Errors
    /// [`Error::Io`] on read failure, otherwise as [`Self::parse_str`].
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }
}

fn has_duplicates(values: &[f64]) -> bool {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Splits `key = value` lines into a map, prefixing keys with their
/// `[section]` name when one is open.
fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| {
                Error::Config(format!("line {}: unterminated section header", idx + 1))
            })?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got {line:?}", idx + 1))
        })?;
        let key = if section.is_empty() {
            key.trim().to_string()
        } else {
            format!("{section}.{}", key.trim())
        };
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Removes a key, accepting both the bare and the `sweep.`-scoped spelling.
fn take(map: &mut BTreeMap<String, String>, key: &str) -> Option<String> {
    map.remove(&format!("sweep.{key}")).or_else(|| map.remove(key))
}

fn require(map: &mut BTreeMap<String, String>, key: &str) -> Result<String> {
    take(map, key).ok_or_else(|| Error::Config(format!("missing configuration key: {key}")))
}

fn parse_scalar(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key} = {value:?} is not a number")))
}

fn parse_count(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key} = {value:?} is not a non-negative integer")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|item| parse_scalar(key, item.trim()))
        .collect()
}

// =====================================================================
// Power-law fitting
// =====================================================================

/// Least-squares fit of `y = C·xᵖ` on logarithmic axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    /// Fitted exponent `p`.
    pub exponent: f64,
    /// Fitted `ln C`.
    pub log_intercept: f64,
    /// Coefficient of determination on the log axes, in `[0, 1]`.
    pub r_squared: f64,
    /// Number of fitted points.
    pub n_points: usize,
}

/// Fits `y = C·xᵖ` by least squares on `(ln x, ln y)`.
///
/// A constant data set fits exactly with exponent zero (`r² = 1`: there is
/// no variance left to explain).
///
/// # Errors
/// * [`Error::InsufficientData`] for fewer than three points;
/// * [`Error::InvalidInput`] for non-positive or non-finite coordinates,
///   or repeated abscissae (the slope would be ill-posed).
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for &(x, y) in points {
        if !(x > 0.0 && x.is_finite() && y > 0.0 && y.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "power-law fit needs positive finite points, got ({x}, {y})"
            )));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    if has_duplicates(&xs) {
        return Err(Error::InvalidInput(
            "power-law fit needs distinct abscissae".into(),
        ));
    }
    let n = points.len() as f64;
    let (ts, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let t_bar = ts.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let s_tt: f64 = ts.iter().map(|t| (t - t_bar).powi(2)).sum();
    let s_ty: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - t_bar) * (y - y_bar)).sum();
    let exponent = s_ty / s_tt;
    let log_intercept = y_bar - exponent * t_bar;
    let ss_tot: f64 = ys.iter().map(|y| (y - y_bar).powi(2)).sum();
    let ss_res: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - (log_intercept + exponent * t)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(PowerFit {
        exponent,
        log_intercept,
        r_squared,
        n_points: points.len(),
    })
}

// =====================================================================
// Sweep rows and outcomes
// =====================================================================

/// One grid cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    /// Grid index `i_mu · n_h + i_h` (plain `i_mu` for trajectory sweeps).
    pub index: usize,
    /// Magnetic coupling of the cell.
    pub mu: f64,
    /// Semiclassical parameter of the cell; `NaN` for trajectory sweeps.
    pub h: f64,
    /// Measured quantity (`NaN` on failure).
    pub value_main: f64,
    /// Reference quantity — closed form or certified bound (`NaN` when the
    /// sweep has none).
    pub value_reference: f64,
    /// Signed gap, usually `value_main − value_reference`.
    pub gap: f64,
    /// Relative gap; for residual sweeps, the bound-consumption ratio.
    pub rel_gap: f64,
    /// Remainder-estimate overlay from [`regimes`] (`NaN` where the
    /// estimate does not apply).
    pub overlay: f64,
    /// Free-text annotation (logarithmic-factor flags and similar).
    pub note: String,
    /// `"ok"`, or the error text of the failed cell.
    pub status: String,
}

impl SweepRow {
    /// Whether the cell computed successfully.
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// A labelled power-law fit attached to a sweep.
#[derive(Debug, Clone)]
pub struct FitRecord {
    /// What was fitted, e.g. `"rel_gap vs h at mu=2"`.
    pub label: String,
    /// The fit, when at least three valid points existed.
    pub fit: Option<PowerFit>,
}

/// Everything a sweep produced, before serialisation.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// The measured quantity.
    pub quantity: SweepQuantity,
    /// Rows in grid order.
    pub rows: Vec<SweepRow>,
    /// Power-law fits: per-`μ` over `h` for grid sweeps, one fit over `μ`
    /// for trajectory sweeps.
    pub fits: Vec<FitRecord>,
}

/// The sweep-specific numbers a cell hands back to the row assembler.
struct CellValue {
    main: f64,
    reference: f64,
    gap: f64,
    rel_gap: f64,
    overlay: f64,
    note: String,
}

impl CellValue {
    /// Standard gap semantics: signed difference and relative magnitude.
    fn gapped(main: f64, reference: f64, overlay: f64, note: String) -> Self {
        let gap = main - reference;
        CellValue {
            main,
            reference,
            gap,
            rel_gap: gap.abs() / reference.abs(),
            overlay,
            note,
        }
    }
}

fn finish_row(index: usize, mu: f64, h: f64, computed: Result<CellValue>) -> SweepRow {
    match computed {
        Ok(cell) => SweepRow {
            index,
            mu,
            h,
            value_main: cell.main,
            value_reference: cell.reference,
            gap: cell.gap,
            rel_gap: cell.rel_gap,
            overlay: cell.overlay,
            note: cell.note,
            status: "ok".into(),
        },
        Err(e) => SweepRow {
            index,
            mu,
            h,
            value_main: f64::NAN,
            value_reference: f64::NAN,
            gap: f64::NAN,
            rel_gap: f64::NAN,
            overlay: f64::NAN,
            note: String::new(),
            status: e.to_string(),
        },
    }
}

// =====================================================================
// Sweep execution
// =====================================================================

/// Runs the configured sweep: validates, evaluates every grid cell in
/// parallel, and aggregates rows in grid order together with the sweep's
/// power-law fits.  Cell-level failures are recorded in their rows; only
/// configuration errors abort.
///
/// # Errors
/// [`Error::Config`] from [`SweepConfig::validate`].
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    match cfg.quantity {
        SweepQuantity::DiracGap | SweepQuantity::KernelTrace | SweepQuantity::DuhamelResidual => {
            grid_sweep(cfg)
        }
        SweepQuantity::DriftError | SweepQuantity::IntersectionCount => trajectory_sweep(cfg),
    }
}

/// Pair-energy gap sweep; a typed wrapper over [`run_sweep`].
///
/// # Errors
/// [`Error::Config`] when the configured quantity is not `dirac_gap`.
pub fn sweep_dirac_gap(cfg: &SweepConfig) -> Result<SweepOutcome> {
    if cfg.quantity != SweepQuantity::DiracGap {
        return Err(Error::Config(format!(
            "sweep_dirac_gap got quantity {:?}",
            cfg.quantity.as_str()
        )));
    }
    run_sweep(cfg)
}

/// Trajectory-geometry sweep (drift error or intersection counts); a typed
/// wrapper over [`run_sweep`].
///
/// # Errors
/// [`Error::Config`] when the configured quantity is not one of the
/// trajectory observables.
pub fn sweep_geometry(cfg: &SweepConfig) -> Result<SweepOutcome> {
    match cfg.quantity {
        SweepQuantity::DriftError | SweepQuantity::IntersectionCount => run_sweep(cfg),
        other => Err(Error::Config(format!(
            "sweep_geometry got quantity {:?}",
            other.as_str()
        ))),
    }
}

/// Evaluates a single pair-energy cell with the sweep semantics and
/// returns its row.  Unlike [`run_sweep`], cell failures propagate as
/// typed errors — this is the entry point for one-shot evaluations where
/// the caller needs the error class, not a recorded failure.
///
/// # Errors
/// As the cell: parameter-domain violations and accuracy-gate failures.
pub fn dirac_gap_value(cfg: &SweepConfig, mu: f64, h: f64) -> Result<SweepRow> {
    let cell = dirac_gap_cell(cfg, mu, h)?;
    Ok(finish_row(0, mu, h, Ok(cell)))
}

fn grid_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    let n_h = cfg.h_values.len();
    let cells: Vec<(usize, f64, f64)> = cfg
        .mu_values
        .iter()
        .enumerate()
        .flat_map(|(i_mu, &mu)| {
            cfg.h_values
                .iter()
                .enumerate()
                .map(move |(i_h, &h)| (i_mu * n_h + i_h, mu, h))
        })
        .collect();
    let rows: Vec<SweepRow> = cells
        .into_par_iter()
        .map(|(index, mu, h)| {
            let computed = match cfg.quantity {
                SweepQuantity::DiracGap => dirac_gap_cell(cfg, mu, h),
                SweepQuantity::KernelTrace => kernel_trace_cell(cfg, mu, h),
                SweepQuantity::DuhamelResidual => duhamel_cell(cfg, index, mu, h),
                _ => unreachable!("trajectory quantities take the other path"),
            };
            finish_row(index, mu, h, computed)
        })
        .collect();
    let ordinate = match cfg.quantity {
        SweepQuantity::DuhamelResidual => "residual",
        _ => "rel_gap",
    };
    let mut fits = Vec::with_capacity(cfg.mu_values.len());
    for (i_mu, &mu) in cfg.mu_values.iter().enumerate() {
        let points: Vec<(f64, f64)> = rows[i_mu * n_h..(i_mu + 1) * n_h]
            .iter()
            .filter(|r| r.is_ok())
            .map(|r| {
                let y = match cfg.quantity {
                    SweepQuantity::DuhamelResidual => r.value_main,
                    _ => r.rel_gap,
                };
                (r.h, y)
            })
            .filter(|&(_, y)| y > 0.0 && y.is_finite())
            .collect();
        fits.push(FitRecord {
            label: format!("{ordinate} vs h at mu={mu}"),
            fit: fit_power_law(&points).ok(),
        });
    }
    Ok(SweepOutcome {
        quantity: cfg.quantity,
        rows,
        fits,
    })
}

fn trajectory_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    let rows: Vec<SweepRow> = cfg
        .mu_values
        .par_iter()
        .enumerate()
        .map(|(index, &mu)| {
            let computed = match cfg.quantity {
                SweepQuantity::DriftError => drift_cell(mu),
                SweepQuantity::IntersectionCount => intersection_cell(mu),
                _ => unreachable!("grid quantities take the other path"),
            };
            finish_row(index, mu, f64::NAN, computed)
        })
        .collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.is_ok() && r.value_main > 0.0 && r.value_main.is_finite())
        .map(|r| (r.mu, r.value_main))
        .collect();
    let fits = vec![FitRecord {
        label: format!("{} vs mu", cfg.quantity.as_str()),
        fit: fit_power_law(&points).ok(),
    }];
    Ok(SweepOutcome {
        quantity: cfg.quantity,
        rows,
        fits,
    })
}

// =====================================================================
// Cell computations
// =====================================================================

/// Far-zone Gauss–Legendre order that resolves the `J₁(r·s/h)` oscillation
/// of the non-magnetic kernel across the cutoff support: about seven nodes
/// per oscillation wavelength, calibrated on refinement studies of the
/// reference functional.
fn weyl_outer_order(r: f64, rho: f64, h: f64) -> usize {
    ((3.25 * r * rho / h).ceil() as usize).clamp(2, 320)
}

/// Remainder-estimate overlay; `NaN` when the estimate has no applicable
/// branch or the scalars fall outside its domain.
fn overlay_estimate(mu: f64, h: f64, kappa: f64) -> f64 {
    regimes::remainder_estimate(mu, h, kappa)
        .map(|e| e.value.unwrap_or(e.general))
        .unwrap_or(f64::NAN)
}

fn log_factor_note(kappa: f64) -> String {
    if kappa == 1.0 {
        "kappa=1 boundary exponent; the remainder bound carries an extra \
         logarithmic factor"
            .into()
    } else {
        String::new()
    }
}

/// Pair-energy cell: closed-form radial route for the degenerate model
/// against the non-magnetic reference, with the remainder overlay.
fn dirac_gap_cell(cfg: &SweepConfig, mu: f64, h: f64) -> Result<CellValue> {
    let weight = SingularWeight::power_law(cfg.kappa)?;
    let cutoffs = CutoffPair::bump(cfg.cutoff_radius)?;
    let gamma = (cfg.split_cap * cfg.cutoff_radius).min(8.0 * (h / mu).sqrt());
    let q_model = QuadratureSpec::new(cfg.outer_order, cfg.radial_order, gamma, cfg.angular_order)?;
    let p = ModelParams::new(mu, h, cfg.w, 0.0, 1)?;
    let exact = radial_dirac_energy(&p, &weight, &cutoffs, &q_model)?;
    let outer = cfg
        .outer_order
        .max(weyl_outer_order(cfg.w.sqrt(), cfg.cutoff_radius, h));
    let q_weyl = QuadratureSpec::new(outer, cfg.radial_order, gamma, cfg.angular_order)?;
    let reference = weyl_reference(cfg.w, h, 0.0, FLAT, &weight, &cutoffs, &q_weyl)?;
    Ok(CellValue::gapped(
        exact,
        reference,
        overlay_estimate(mu, h, cfg.kappa),
        log_factor_note(cfg.kappa),
    ))
}

/// Kernel-trace cell: the quadrature-route projector diagonal against the
/// closed-form magnetic density.
fn kernel_trace_cell(cfg: &SweepConfig, mu: f64, h: f64) -> Result<CellValue> {
    let scalars = ModelScalars::new(mu, h, 1.0, cfg.w, 1.0, 0.0)?;
    let reference = magnetic_weyl_density(&scalars);
    let probe = ModelParams::new(mu, h, cfg.w, 0.0, 1)?;
    let p = ModelParams::new(mu, h, cfg.w, 0.0, probe.suggest_n_max(0.0))?;
    let diag = model_kernel(&p, [0.0, 0.0], [0.0, 0.0])?.re;
    Ok(CellValue::gapped(
        diag,
        reference,
        overlay_estimate(mu, h, cfg.kappa),
        format!("levels={}", level_count(&scalars)),
    ))
}

/// Spectral norm via the Hermitian Gram matrix.
fn op_norm(m: &DMatrix<Complex64>) -> f64 {
    let gram = m.adjoint() * m;
    gram.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, &l| acc.max(l.max(0.0)))
        .sqrt()
}

/// A random Hermitian matrix with entries on the `scale` of the given
/// magnitude, drawn deterministically from the supplied generator.
fn random_hermitian(
    dim: usize,
    scale: f64,
    meta: OperatorMeta,
    rng: &mut ChaCha8Rng,
) -> Result<OperatorMatrix> {
    let raw = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let sym = (&raw + raw.adjoint()).map(|z| z * scale);
    OperatorMatrix::new(sym, true, BasisKind::OscillatorTensor, meta)
}

/// Measured truncation residual of the order-2 series on a seeded random
/// pair, with its certified bound.
fn duhamel_margin(seed: u64, mu: f64, h: f64) -> Result<(f64, f64)> {
    const DIM: usize = 6;
    const SERIES_ORDER: usize = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let meta = OperatorMeta { mu, h, grid: None };
    let a0 = random_hermitian(DIM, 1.0, meta, &mut rng)?;
    let b = random_hermitian(DIM, 0.05, meta, &mut rng)?;
    let t = 0.5;
    let (series, _) = duhamel_series(&a0, &b, t, h, SERIES_ORDER)?;
    let full = OperatorMatrix::new(
        &a0.entries + &b.entries,
        true,
        BasisKind::OscillatorTensor,
        meta,
    )?;
    let u = propagator(&full, t, h)?;
    let residual = op_norm(&(&u.entries - &series.entries));
    let nu = op_norm(&b.entries);
    let bound = remainder_check(nu, t, h, SERIES_ORDER, 0.0)?.bound;
    Ok((residual, bound))
}

/// Residual cell: the measured truncation defect against its bound; the
/// relative column reports how much of the bound the defect consumes.
fn duhamel_cell(cfg: &SweepConfig, index: usize, mu: f64, h: f64) -> Result<CellValue> {
    let cell_seed = cfg
        .seed
        .wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let (residual, bound) = duhamel_margin(cell_seed, mu, h)?;
    Ok(CellValue {
        main: residual,
        reference: bound,
        gap: residual - bound,
        rel_gap: residual / bound,
        overlay: f64::NAN,
        note: String::new(),
    })
}

/// The on-shell launch state shared by the trajectory cells: unit speed at
/// the origin of the affine-potential model field.
fn launch_state() -> FlowState {
    FlowState {
        x: [0.0, 0.0],
        xi: [1.0, 0.0],
        t: 0.0,
    }
}

/// Drift cell: relative error of the measured guiding-center velocity
/// against the closed-form drift over twenty cyclotron periods.
fn drift_cell(mu: f64) -> Result<CellValue> {
    const SLOPE: f64 = 0.1;
    const PERIODS: f64 = 20.0;
    let field = ModelField::euclidean_linear(mu, 1.0, [0.0, SLOPE])?;
    let traj = integrate_flow(&field, &launch_state(), PERIODS * 2.0 * PI / mu, 1e-10)?;
    let first = traj
        .guiding_center
        .first()
        .copied()
        .ok_or_else(|| Error::Accuracy("integration produced no states".into()))?;
    let last = traj.guiding_center.last().copied().unwrap_or(first);
    let elapsed = traj.states.last().map(|s| s.t).unwrap_or(0.0)
        - traj.states.first().map(|s| s.t).unwrap_or(0.0);
    if elapsed <= 0.0 {
        return Err(Error::Accuracy("degenerate trajectory time span".into()));
    }
    let measured = [
        (last[0] - first[0]) / elapsed,
        (last[1] - first[1]) / elapsed,
    ];
    let predicted = drift_velocity(&field, [0.0, 0.0]);
    let speed = predicted[0].hypot(predicted[1]);
    let err = (measured[0] - predicted[0]).hypot(measured[1] - predicted[1]);
    Ok(CellValue {
        main: err / speed,
        reference: speed,
        gap: err,
        rel_gap: err / speed,
        overlay: f64::NAN,
        note: String::new(),
    })
}

/// Intersection cell: transversal self-crossings per winding over
/// `round(μ/2)` windings of the drifting orbit.
fn intersection_cell(mu: f64) -> Result<CellValue> {
    const SLOPE: f64 = 0.2;
    let windings = (mu / 2.0).round().max(1.0);
    let field = ModelField::euclidean_linear(mu, 1.0, [0.0, SLOPE])?;
    let traj = integrate_flow(&field, &launch_state(), windings * 2.0 * PI / mu, 1e-10)?;
    let events = self_intersections(&traj)?;
    Ok(CellValue {
        main: events.len() as f64 / windings,
        reference: f64::NAN,
        gap: f64::NAN,
        rel_gap: f64::NAN,
        overlay: f64::NAN,
        note: format!("events={} windings={windings}", events.len()),
    })
}

// =====================================================================
// Reports: CSV, gnuplot .dat, JSON manifest
// =====================================================================

/// Header of the sweep CSV.
pub const CSV_HEADER: &str =
    "index,quantity,mu,h,value_main,value_reference,gap,rel_gap,overlay,note,status";

/// Renders the rows as CSV with 17-significant-digit floats.  The output
/// depends only on the outcome, so identical configurations and seeds give
/// byte-identical reports.
pub fn csv_report(out: &SweepOutcome) -> String {
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for r in &out.rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            out.quantity.as_str(),
            fmt17(r.mu),
            fmt17(r.h),
            fmt17(r.value_main),
            fmt17(r.value_reference),
            fmt17(r.gap),
            fmt17(r.rel_gap),
            fmt17(r.overlay),
            sanitize(&r.note),
            sanitize(&r.status),
        );
    }
    text
}

/// Renders the numeric columns as a gnuplot-friendly whitespace table with
/// a `#` header line; failed cells keep their row (as `NaN`) so the row
/// count is grid-stable.
pub fn dat_report(out: &SweepOutcome) -> String {
    let mut text =
        String::from("# index mu h value_main value_reference gap rel_gap overlay\n");
    for r in &out.rows {
        let _ = writeln!(
            text,
            "{} {} {} {} {} {} {} {}",
            r.index,
            fmt17(r.mu),
            fmt17(r.h),
            fmt17(r.value_main),
            fmt17(r.value_reference),
            fmt17(r.gap),
            fmt17(r.rel_gap),
            fmt17(r.overlay),
        );
    }
    text
}

fn fit_to_json(record: &FitRecord) -> serde_json::Value {
    match record.fit {
        Some(f) => json!({
            "label": record.label,
            "fit": {
                "exponent": json_number(f.exponent),
                "log_intercept": json_number(f.log_intercept),
                "r_squared": json_number(f.r_squared),
                "n_points": f.n_points.to_string(),
            },
        }),
        None => json!({ "label": record.label, "fit": serde_json::Value::Null }),
    }
}

/// Builds the run manifest: every configuration parameter, the tool
/// version, the seed, the worker count, the wall time, the fits, and the
/// failed cells.  All numbers are decimal strings.
pub fn manifest(
    cfg: &SweepConfig,
    out: &SweepOutcome,
    wall_seconds: f64,
    outputs: &[String],
) -> serde_json::Value {
    let failed: Vec<serde_json::Value> = out
        .rows
        .iter()
        .filter(|r| !r.is_ok())
        .map(|r| json!({ "index": r.index.to_string(), "status": r.status }))
        .collect();
    json!({
        "tool": "magspec",
        "version": env!("CARGO_PKG_VERSION"),
        "quantity": cfg.quantity.as_str(),
        "parameters": {
            "mu": cfg.mu_values.iter().map(|&x| json_number(x)).collect::<Vec<_>>(),
            "h": cfg.h_values.iter().map(|&x| json_number(x)).collect::<Vec<_>>(),
            "kappa": json_number(cfg.kappa),
            "w": json_number(cfg.w),
            "cutoff_radius": json_number(cfg.cutoff_radius),
            "outer_order": cfg.outer_order.to_string(),
            "radial_order": cfg.radial_order.to_string(),
            "angular_order": cfg.angular_order.to_string(),
            "split_cap": json_number(cfg.split_cap),
        },
        "seed": cfg.seed.to_string(),
        "workers": rayon::current_num_threads().to_string(),
        "wall_time_seconds": json_number(wall_seconds),
        "rows": out.rows.len().to_string(),
        "failed_cells": failed,
        "fits": out.fits.iter().map(fit_to_json).collect::<Vec<_>>(),
        "outputs": outputs,
    })
}

fn output_stem(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "csv") {
        path.with_extension("")
    } else {
        path.to_path_buf()
    }
}

/// Writes the CSV, `.dat` and manifest next to the configured output stem
/// and returns the written paths (CSV, dat, manifest).
///
/// # Errors
/// [`Error::Io`] on directory or file creation failure.
pub fn write_outputs(
    cfg: &SweepConfig,
    out: &SweepOutcome,
    wall_seconds: f64,
) -> Result<Vec<PathBuf>> {
    let stem = output_stem(&cfg.output);
    if let Some(dir) = stem.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let csv_path = stem.with_extension("csv");
    let dat_path = stem.with_extension("dat");
    let manifest_path = stem.with_extension("manifest.json");
    std::fs::write(&csv_path, csv_report(out))?;
    std::fs::write(&dat_path, dat_report(out))?;
    let names: Vec<String> = [&csv_path, &dat_path]
        .iter()
        .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    let doc = manifest(cfg, out, wall_seconds, &names);
    let rendered = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Config(format!("manifest serialisation failed: {e}")))?;
    std::fs::write(&manifest_path, rendered + "\n")?;
    Ok(vec![csv_path, dat_path, manifest_path])
}

// =====================================================================
// Self-test battery
// =====================================================================

/// One check of the self-test battery.
#[derive(Debug, Clone)]
pub struct SelftestRow {
    /// Stable check name.
    pub name: &'static str,
    /// Measured defect (smaller is better).
    pub measured: f64,
    /// Gate the defect must stay below.
    pub gate: f64,
    /// Whether `measured ≤ gate`.
    pub passed: bool,
}

/// Outcome of [`selftest`].
#[derive(Debug, Clone)]
pub struct SelftestReport {
    /// One row per check, in battery order.
    pub rows: Vec<SelftestRow>,
}

impl SelftestReport {
    /// Whether every check passed its gate.
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    /// CSV rendering `name,measured,gate,status`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut text = String::from("name,measured,gate,status\n");
        for r in &self.rows {
            let _ = writeln!(
                text,
                "{},{},{},{}",
                r.name,
                fmt17(r.measured),
                fmt17(r.gate),
                if r.passed { "pass" } else { "FAIL" },
            );
        }
        text
    }

    /// JSON rendering with numbers as decimal strings.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "all_passed": self.all_passed(),
            "checks": self.rows.iter().map(|r| json!({
                "name": r.name,
                "measured": json_number(r.measured),
                "gate": json_number(r.gate),
                "passed": r.passed,
            })).collect::<Vec<_>>(),
        })
    }
}

fn check(name: &'static str, measured: f64, gate: f64) -> SelftestRow {
    SelftestRow {
        name,
        measured,
        gate,
        passed: measured.is_finite() && measured <= gate,
    }
}

fn trace_identity_check() -> Result<SelftestRow> {
    let mut worst = 0.0_f64;
    for (mu, h) in [(2.0, 0.1), (5.0, 0.1), (10.0, 0.02), (4.0, 0.25)] {
        let scalars = ModelScalars::new(mu, h, 1.0, 1.0, 1.0, 0.0)?;
        let reference = magnetic_weyl_density(&scalars);
        let probe = ModelParams::new(mu, h, 1.0, 0.0, 1)?;
        let p = ModelParams::new(mu, h, 1.0, 0.0, probe.suggest_n_max(0.0))?;
        let diag = model_kernel(&p, [0.0, 0.0], [0.0, 0.0])?.re;
        worst = worst.max((diag - reference).abs() / reference);
    }
    Ok(check("trace_identity", worst, 1e-8))
}

fn ladder_commutator_check() -> Result<SelftestRow> {
    let (mu, h) = (3.0, 0.05);
    let (z, z_star) = build_ladder(6, 1, mu, h)?;
    let comm = &z_star.entries * &z.entries - &z.entries * &z_star.entries;
    let target = 2.0 * mu * h;
    let worst = (0..5).fold(0.0_f64, |acc, j| {
        acc.max((comm[(j, j)].re - target).abs() / target)
    });
    Ok(check("ladder_commutator", worst, 1e-12))
}

fn propagator_unitarity_check(seed: u64) -> Result<SelftestRow> {
    const DIM: usize = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let meta = OperatorMeta {
        mu: 1.0,
        h: 0.1,
        grid: None,
    };
    let a = random_hermitian(DIM, 1.0, meta, &mut rng)?;
    let u = propagator(&a, 0.7, 0.1)?;
    let defect = &u.entries.adjoint() * &u.entries - DMatrix::<Complex64>::identity(DIM, DIM);
    Ok(check("propagator_unitarity", op_norm(&defect), 1e-10))
}

fn duhamel_margin_check(seed: u64) -> Result<SelftestRow> {
    let (residual, bound) = duhamel_margin(seed, 1.0, 0.1)?;
    Ok(check("duhamel_margin", residual / bound, 1.0))
}

fn regime_worked_values_check() -> Result<SelftestRow> {
    let r = regimes::report(10.0, 1e-4, 2, 1.0, 0.0)?;
    let t2_expected = (10.0 * 1e-4 * (1e-4_f64).ln().abs()).powf(1.0 / 3.0);
    let d1 = (r.t_star - 0.01).abs() / 0.01;
    let d2 = (r.t2_star - t2_expected).abs() / t2_expected;
    Ok(check("regime_worked_values", d1.max(d2), 1e-12))
}

fn regime_classification_check() -> Result<SelftestRow> {
    let weak = regimes::regime_classify(3.0, 1e-4)? == regimes::Regime::Weak;
    let mid = regimes::regime_classify(10.0, 1e-4)? == regimes::Regime::Intermediate;
    let strong = regimes::regime_classify(100.0, 1e-4)? == regimes::Regime::Strong;
    let measured = if weak && mid && strong { 0.0 } else { 1.0 };
    Ok(check("regime_classification", measured, 0.5))
}

fn power_fit_exactness_check() -> Result<SelftestRow> {
    let points: Vec<(f64, f64)> = (1..=6)
        .map(|i| {
            let x = i as f64;
            (x, 3.0 * x.powf(1.5))
        })
        .collect();
    let fit = fit_power_law(&points)?;
    let measured = (fit.exponent - 1.5)
        .abs()
        .max((fit.r_squared - 1.0).abs())
        .max((fit.log_intercept - 3.0_f64.ln()).abs());
    Ok(check("power_fit_exactness", measured, 1e-10))
}

fn weyl_self_gap_check() -> Result<SelftestRow> {
    let weight = SingularWeight::power_law(0.5)?;
    let cutoffs = CutoffPair::bump(0.6)?;
    let q = QuadratureSpec::new(28, 40, 0.2, 16)?;
    let direct = weyl_reference(1.0, 0.1, 0.0, FLAT, &weight, &cutoffs, &q)?;
    let cb = |x: [f64; 2], y: [f64; 2]| {
        Complex64::new(
            weyl_kernel(1.0, 0.1, 0.0, FLAT, x, y).unwrap_or(f64::NAN),
            0.0,
        )
    };
    let wrapped = dirac_energy(&KernelInput::Callback(&cb), &weight, &cutoffs, &q)?;
    Ok(check(
        "weyl_self_gap",
        (direct - wrapped).abs() / wrapped.abs(),
        1e-12,
    ))
}

fn pair_energy_cross_path_check() -> Result<SelftestRow> {
    let probe = ModelParams::new(4.0, 0.1, 1.0, 0.0, 1)?;
    let p = ModelParams::new(4.0, 0.1, 1.0, 0.0, probe.suggest_n_max(1.0))?;
    let weight = SingularWeight::power_law(1.0)?;
    let cutoffs = CutoffPair::bump(0.6)?;
    let q = QuadratureSpec::model_default(0.6, p.mu, p.h)?;
    let radial = radial_dirac_energy(&p, &weight, &cutoffs, &q)?;
    let cb = |x: [f64; 2], y: [f64; 2]| {
        let s = (x[0] - y[0]).hypot(x[1] - y[1]);
        let k = radial_kernel(&p, s).unwrap_or(f64::NAN);
        let phase = p.mu * (x[1] + y[1]) * (x[0] - y[0]) / (2.0 * p.h);
        k * Complex64::from_polar(1.0, phase)
    };
    let generic = dirac_energy(&KernelInput::Callback(&cb), &weight, &cutoffs, &q)?;
    Ok(check(
        "pair_energy_cross_path",
        (generic - radial).abs() / radial.abs(),
        1e-3,
    ))
}

fn flow_energy_drift_check() -> Result<SelftestRow> {
    let mu = 10.0;
    let field = ModelField::euclidean_constant(mu, 1.0)?;
    let traj = integrate_flow(&field, &launch_state(), 10.0 * 2.0 * PI / mu, 1e-10)?;
    let worst = traj
        .states
        .iter()
        .fold(0.0_f64, |acc, s| acc.max((hamiltonian(&field, s) - traj.energy0).abs()));
    Ok(check("flow_energy_drift", worst, 1e-9))
}

fn guiding_center_drift_check() -> Result<SelftestRow> {
    let cell = drift_cell(40.0)?;
    Ok(check("guiding_center_drift", cell.main, 2e-2))
}

/// Runs the cross-module consistency battery.  Every check reduces to a
/// scalar defect and a gate; the battery is deterministic for a fixed
/// seed, so its CSV is byte-stable across reruns.
///
/// # Errors
/// Propagates hard computation failures (a broken build); a check merely
/// exceeding its gate is reported in its row, not as an error.
pub fn selftest(seed: u64) -> Result<SelftestReport> {
    let rows = vec![
        trace_identity_check()?,
        ladder_commutator_check()?,
        propagator_unitarity_check(seed)?,
        duhamel_margin_check(seed)?,
        regime_worked_values_check()?,
        regime_classification_check()?,
        power_fit_exactness_check()?,
        weyl_self_gap_check()?,
        pair_energy_cross_path_check()?,
        flow_energy_drift_check()?,
        guiding_center_drift_check()?,
    ];
    Ok(SelftestReport { rows })
}

// =====================================================================
// Tests
// =====================================================================
