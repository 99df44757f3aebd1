//! Two-axis parameter sweeps over `ModelConfig`, one-dimensional slices of
//! them, and table summaries.
//!
//! Grid point (i, j) sets axis 1 to its i-th value and axis 2 to its j-th;
//! rows are ordered with i outer. Every point is evaluated independently, so
//! tables do not depend on the worker count.

mod output;
mod presets;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use output::{columns, read_sidecar, sidecar_path, write_table, OutputFormat, Sidecar, SweepWriter};
pub use presets::{preset, Panel, Preset, DEFAULT_STEPS, PRESET_NAMES};

use crate::error::{Error, Result};
use crate::evolution::Evolver;
use crate::metrics::{OptimizerSettings, ReportOptions, SbsCandidate};
use crate::model::{HamiltonianVariant, ModelConfig};

/// A continuous `ModelConfig` field that can serve as a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Theta,
    Alpha1,
    Alpha2,
    Alpha3,
    P,
    T,
}

impl Param {
    pub const ALL: [Param; 6] = [Param::Theta, Param::Alpha1, Param::Alpha2, Param::Alpha3, Param::P, Param::T];

    pub fn name(self) -> &'static str {
        match self {
            Param::Theta => "theta",
            Param::Alpha1 => "alpha1",
            Param::Alpha2 => "alpha2",
            Param::Alpha3 => "alpha3",
            Param::P => "p",
            Param::T => "t",
        }
    }

    /// Range used when a sweep names an axis without bounds.
    pub fn default_range(self) -> (f64, f64) {
        match self {
            Param::Theta => (0.0, std::f64::consts::FRAC_PI_2),
            Param::Alpha1 | Param::Alpha2 | Param::Alpha3 => (0.0, 3.0),
            Param::P => (0.0, 0.5),
            Param::T => (0.0, 2.0),
        }
    }

    pub fn get(self, cfg: &ModelConfig) -> f64 {
        match self {
            Param::Theta => cfg.theta,
            Param::Alpha1 => cfg.alpha1,
            Param::Alpha2 => cfg.alpha2,
            Param::Alpha3 => cfg.alpha3,
            Param::P => cfg.p,
            Param::T => cfg.t,
        }
    }

    pub fn set(self, cfg: &mut ModelConfig, v: f64) {
        match self {
            Param::Theta => cfg.theta = v,
            Param::Alpha1 => cfg.alpha1 = v,
            Param::Alpha2 => cfg.alpha2 = v,
            Param::Alpha3 => cfg.alpha3 = v,
            Param::P => cfg.p = v,
            Param::T => cfg.t = v,
        }
    }
}

impl std::str::FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            Error::arg(format!(
                "unknown sweep parameter {s:?} (expected theta, alpha1, alpha2, alpha3, p or t)"
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(param: Param, min: f64, max: f64, steps: usize) -> Self {
        Self { param, min, max, steps }
    }

    /// Axis over the parameter's default range.
    pub fn default_for(param: Param, steps: usize) -> Self {
        let (min, max) = param.default_range();
        Self::new(param, min, max, steps)
    }

    /// k-th grid value; the last one is `max` exactly.
    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            self.max
        } else {
            self.min + (self.max - self.min) * k as f64 / (self.steps - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.value(k)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::arg(format!("axis {} needs at least 2 steps, got {}", self.param.name(), self.steps)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(Error::arg(format!(
                "axis {} has an invalid range [{}, {}]",
                self.param.name(),
                self.min,
                self.max
            )));
        }
        Ok(())
    }
}

/// What each grid point reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Exact minimal distance to the SBS family (one observed qubit).
    SbsDistance,
    /// 2(Γ + √(c₀c₁)F).
    UpperBound,
    /// Hadamard-basis minus computational-basis fixed-basis distance (one observed qubit).
    Delta,
    Gamma,
    Fidelity,
    /// Distance of the fragment marginal from its diagonal (one observed qubit).
    ThermalDistance,
    /// Basis alignment max(cos(x_ψ/2), sin(x_ψ/2)) of the optimum (one observed qubit).
    OptimalBasisParams,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::SbsDistance,
        Quantity::UpperBound,
        Quantity::Delta,
        Quantity::Gamma,
        Quantity::Fidelity,
        Quantity::ThermalDistance,
        Quantity::OptimalBasisParams,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::SbsDistance => "sbs_distance",
            Quantity::UpperBound => "upper_bound",
            Quantity::Delta => "delta",
            Quantity::Gamma => "gamma",
            Quantity::Fidelity => "fidelity",
            Quantity::ThermalDistance => "thermal_distance",
            Quantity::OptimalBasisParams => "optimal_basis_params",
        }
    }

    fn needs_qubit_fragment(self) -> bool {
        matches!(
            self,
            Quantity::SbsDistance | Quantity::Delta | Quantity::ThermalDistance | Quantity::OptimalBasisParams
        )
    }

    fn optimizes(self) -> bool {
        matches!(self, Quantity::SbsDistance | Quantity::OptimalBasisParams)
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL.into_iter().find(|q| q.name() == s).ok_or_else(|| {
            let names: Vec<_> = Quantity::ALL.iter().map(|q| q.name()).collect();
            Error::arg(format!("unknown quantity {s:?} (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ModelConfig,
    pub axis1: Axis,
    pub axis2: Axis,
    pub quantity: Quantity,
    #[serde(default)]
    pub seed: u64,
    /// Overrides `base.variant`.
    pub hamiltonian_variant: HamiltonianVariant,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        self.axis2.validate()?;
        if self.axis1.param == self.axis2.param {
            return Err(Error::arg(format!("both axes sweep {}", self.axis1.param.name())));
        }
        if self.quantity.needs_qubit_fragment() && self.base.observed != 1 {
            return Err(Error::arg(format!(
                "{} needs exactly one observed environment qubit, got {}",
                self.quantity.name(),
                self.base.observed
            )));
        }
        // every constraint on a swept field is an interval, so the corners cover the grid
        for a in [self.axis1.min, self.axis1.max] {
            for b in [self.axis2.min, self.axis2.max] {
                let mut cfg = self.base_config();
                self.axis1.param.set(&mut cfg, a);
                self.axis2.param.set(&mut cfg, b);
                cfg.validate()?;
                crate::model::hamiltonian_is_defined(&cfg)?;
            }
        }
        Ok(())
    }

    fn base_config(&self) -> ModelConfig {
        ModelConfig {
            variant: Some(self.hamiltonian_variant),
            ..self.base.clone()
        }
    }

    pub fn config_at(&self, i: usize, j: usize) -> ModelConfig {
        let mut cfg = self.base_config();
        self.axis1.param.set(&mut cfg, self.axis1.value(i));
        self.axis2.param.set(&mut cfg, self.axis2.value(j));
        cfg
    }

    pub fn len(&self) -> usize {
        self.axis1.steps * self.axis2.steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn options(&self) -> ReportOptions {
        ReportOptions {
            optimize: self.quantity.optimizes(),
            delta: self.quantity == Quantity::Delta,
            optimizer: OptimizerSettings {
                seed: self.seed,
                ..OptimizerSettings::default()
            },
        }
    }
}

/// A fixed value for one axis of a sweep, turning it into a one-dimensional slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceAt {
    pub param: Param,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub i: usize,
    pub j: usize,
    pub x1: f64,
    pub x2: f64,
    pub value: Option<f64>,
    pub optimum: Option<SbsCandidate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub axis1: Axis,
    pub axis2: Axis,
    pub quantity: Quantity,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// Values in row order; failed points are `None`.
    pub fn values(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.value).collect()
    }
}

/// The grid (i, j) indices a spec or slice covers, in row order.
pub fn grid_indices(spec: &SweepSpec, slice: Option<&SliceAt>) -> Result<Vec<(usize, usize)>> {
    let Some(s) = slice else {
        return Ok((0..spec.axis1.steps).flat_map(|i| (0..spec.axis2.steps).map(move |j| (i, j))).collect());
    };
    let (axis, points): (&Axis, Vec<(usize, usize)>) = if s.param == spec.axis1.param {
        (&spec.axis1, (0..spec.axis2.steps).map(|j| (0, j)).collect())
    } else if s.param == spec.axis2.param {
        (&spec.axis2, (0..spec.axis1.steps).map(|i| (i, 0)).collect())
    } else {
        return Err(Error::arg(format!("slice parameter {} is not a sweep axis", s.param.name())));
    };
    if !(axis.min..=axis.max).contains(&s.value) {
        return Err(Error::arg(format!(
            "slice value {} lies outside the {} range [{}, {}]",
            s.value,
            s.param.name(),
            axis.min,
            axis.max
        )));
    }
    Ok(points)
}

/// The configuration of a grid point, with the slice value substituted.
fn point_config(spec: &SweepSpec, slice: Option<&SliceAt>, i: usize, j: usize) -> ModelConfig {
    let mut cfg = spec.config_at(i, j);
    if let Some(s) = slice {
        s.param.set(&mut cfg, s.value);
    }
    cfg
}

fn axis_values(spec: &SweepSpec, slice: Option<&SliceAt>, i: usize, j: usize) -> (f64, f64) {
    let cfg = point_config(spec, slice, i, j);
    (spec.axis1.param.get(&cfg), spec.axis2.param.get(&cfg))
}

fn evaluate(evolver: &mut Evolver, spec: &SweepSpec, slice: Option<&SliceAt>, options: &ReportOptions, i: usize, j: usize) -> Row {
    let cfg = point_config(spec, slice, i, j);
    let (x1, x2) = axis_values(spec, slice, i, j);
    let row = |value, optimum, error| Row { i, j, x1, x2, value, optimum, error };
    let report = match evolver.report(&cfg, options) {
        Ok(r) => r,
        Err(e) => return row(None, None, Some(e.to_string())),
    };
    let value = match spec.quantity {
        Quantity::SbsDistance => report.sbs_distance,
        Quantity::UpperBound => Some(report.upper_bound),
        Quantity::Delta => report.delta,
        Quantity::Gamma => Some(report.gamma),
        Quantity::Fidelity => Some(report.fid),
        Quantity::ThermalDistance => report.thermal_dist,
        Quantity::OptimalBasisParams => report.optimal.map(|o| o.basis_alignment()),
    };
    match value {
        Some(v) if v.is_finite() => row(Some(v), report.optimal, None),
        Some(v) => row(None, report.optimal, Some(format!("non-finite {} ({v})", spec.quantity.name()))),
        None => row(None, None, Some(format!("{} was not computed", spec.quantity.name()))),
    }
}

/// Evaluates the given grid points on `workers` threads (0 = available
/// parallelism), returning rows in the order given.
pub fn run_points(spec: &SweepSpec, slice: Option<&SliceAt>, points: &[(usize, usize)], workers: usize) -> Result<Vec<Row>> {
    let options = spec.options();
    let work = || {
        points
            .par_iter()
            .map_init(Evolver::new, |ev, &(i, j)| evaluate(ev, spec, slice, &options, i, j))
            .collect()
    };
    if workers == 0 {
        return Ok(work());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::arg(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(work))
}

pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Table> {
    spec.validate()?;
    let points = grid_indices(spec, None)?;
    Ok(Table {
        axis1: spec.axis1,
        axis2: spec.axis2,
        quantity: spec.quantity,
        rows: run_points(spec, None, &points, workers)?,
    })
}

/// One-dimensional table along the axis that `fixed` does not pin.
pub fn marginal_slice(spec: &SweepSpec, fixed: &SliceAt, workers: usize) -> Result<Table> {
    spec.validate()?;
    let points = grid_indices(spec, Some(fixed))?;
    Ok(Table {
        axis1: spec.axis1,
        axis2: spec.axis2,
        quantity: spec.quantity,
        rows: run_points(spec, Some(fixed), &points, workers)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub column: String,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    /// (i, j) of the first minimum in row order.
    pub argmin: (usize, usize),
    pub argmax: (usize, usize),
}

/// A grid line whose interior minimum lies strictly below both of its end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorMinimum {
    /// The axis the line runs along (1 or 2).
    pub along: u8,
    /// Index of the line on the other axis.
    pub line: usize,
    /// Index of the minimum along the line.
    pub at: usize,
    /// Axis value at the minimum.
    pub position: f64,
    pub value: f64,
    pub endpoints: (f64, f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCounts {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: usize,
    pub failures: usize,
    pub columns: Vec<ColumnSummary>,
    /// Lines of the quantity column with an interior minimum.
    pub interior_minima: Vec<InteriorMinimum>,
    pub signs: SignCounts,
}

impl Summary {
    pub fn column(&self, name: &str) -> Option<&ColumnSummary> {
        self.columns.iter().find(|c| c.column == name)
    }

    pub fn has_interior_minimum(&self, along: u8, line: usize) -> bool {
        self.interior_minima.iter().any(|m| m.along == along && m.line == line)
    }
}

fn column_summary(name: &str, rows: &[Row], f: impl Fn(&Row) -> Option<f64>) -> Option<ColumnSummary> {
    let mut out: Option<ColumnSummary> = None;
    for r in rows {
        let Some(v) = f(r) else { continue };
        let s = out.get_or_insert(ColumnSummary {
            column: name.to_string(),
            count: 0,
            min: v,
            max: v,
            argmin: (r.i, r.j),
            argmax: (r.i, r.j),
        });
        s.count += 1;
        if v < s.min {
            s.min = v;
            s.argmin = (r.i, r.j);
        }
        if v > s.max {
            s.max = v;
            s.argmax = (r.i, r.j);
        }
    }
    out
}

fn line_minimum(along: u8, line: usize, points: &[(usize, f64, f64)]) -> Option<InteriorMinimum> {
    // points: (index along the line, axis value, quantity), sorted by index
    if points.len() < 3 {
        return None;
    }
    let first = points[0].2;
    let last = points[points.len() - 1].2;
    let interior = &points[1..points.len() - 1];
    let (at, position, value) = interior
        .iter()
        .copied()
        .fold(None::<(usize, f64, f64)>, |best, p| match best {
            Some(b) if b.2 <= p.2 => Some(b),
            _ => Some(p),
        })?;
    (value < first && value < last).then_some(InteriorMinimum {
        along,
        line,
        at,
        position,
        value,
        endpoints: (first, last),
    })
}

/// Lines are only examined when every point on them succeeded.
pub fn summarize(table: &Table) -> Result<Summary> {
    if table.rows.is_empty() {
        return Err(Error::arg("cannot summarize an empty table"));
    }
    let rows = &table.rows;
    let mut columns = Vec::new();
    let opt = |f: fn(&SbsCandidate) -> f64| move |r: &Row| r.optimum.as_ref().map(f);
    type Extractor<'a> = Box<dyn Fn(&Row) -> Option<f64> + 'a>;
    let extractors: [(&str, Extractor); 7] = [
        (table.quantity.name(), Box::new(|r: &Row| r.value)),
        ("p_tilde", Box::new(opt(|o| o.p_tilde))),
        ("x_psi", Box::new(opt(|o| o.x_psi))),
        ("y_psi", Box::new(opt(|o| o.y_psi))),
        ("x_chi", Box::new(opt(|o| o.x_chi))),
        ("y_chi", Box::new(opt(|o| o.y_chi))),
        ("basis_alignment", Box::new(opt(|o| o.basis_alignment()))),
    ];
    for (name, f) in extractors.iter() {
        if let Some(s) = column_summary(name, rows, f) {
            columns.push(s);
        }
    }

    let mut interior_minima = Vec::new();
    let mut by_i: std::collections::BTreeMap<usize, Vec<&Row>> = Default::default();
    let mut by_j: std::collections::BTreeMap<usize, Vec<&Row>> = Default::default();
    for r in rows {
        by_i.entry(r.i).or_default().push(r);
        by_j.entry(r.j).or_default().push(r);
    }
    for (along, lines) in [(1u8, &by_j), (2u8, &by_i)] {
        for (&line, members) in lines {
            let pts: Option<Vec<_>> = members
                .iter()
                .map(|r| {
                    let (k, x) = if along == 1 { (r.i, r.x1) } else { (r.j, r.x2) };
                    r.value.map(|v| (k, x, v))
                })
                .collect();
            let Some(mut pts) = pts else { continue };
            pts.sort_by_key(|p| p.0);
            interior_minima.extend(line_minimum(along, line, &pts));
        }
    }

    let mut signs = SignCounts::default();
    for v in rows.iter().filter_map(|r| r.value) {
        if v > 0.0 {
            signs.positive += 1;
        } else if v < 0.0 {
            signs.negative += 1;
        } else {
            signs.zero += 1;
        }
    }
    Ok(Summary {
        rows: rows.len(),
        failures: table.failures(),
        columns,
        interior_minima,
        signs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(quantity: Quantity) -> SweepSpec {
        SweepSpec {
            base: ModelConfig { theta: 0.3, ..ModelConfig::default() },
            axis1: Axis::new(Param::Alpha2, 0.0, 1.0, 3),
            axis2: Axis::new(Param::P, 0.0, 0.5, 4),
            quantity,
            seed: 0,
            hamiltonian_variant: HamiltonianVariant::Eq6Full,
        }
    }

    fn synthetic(values: &[f64]) -> Table {
        let axis = Axis::new(Param::Alpha2, 0.0, 1.0, values.len());
        Table {
            axis1: Axis::new(Param::Theta, 0.0, 0.0, 2),
            axis2: axis,
            quantity: Quantity::Gamma,
            rows: values
                .iter()
                .enumerate()
                .map(|(j, &v)| Row { i: 0, j, x1: 0.0, x2: axis.value(j), value: Some(v), optimum: None, error: None })
                .collect(),
        }
    }

    #[test]
    fn axis_values_hit_both_ends() {
        let a = Axis::new(Param::P, 0.0, 0.5, 41);
        let v = a.values();
        assert_eq!((v[0], v[40]), (0.0, 0.5));
        assert_eq!(v[20], 0.25);
        assert!(Axis::new(Param::P, 0.0, 0.5, 1).validate().is_err());
        assert!(Axis::new(Param::P, 0.5, 0.0, 3).validate().is_err());
    }

    #[test]
    fn names_round_trip() {
        for p in Param::ALL {
            assert_eq!(p.name().parse::<Param>().unwrap(), p);
        }
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
        }
        assert!("n_env".parse::<Param>().unwrap_err().is_argument());
    }

    #[test]
    fn spec_validation() {
        assert!(small(Quantity::Gamma).validate().is_ok());
        let mut same = small(Quantity::Gamma);
        same.axis2.param = Param::Alpha2;
        assert!(same.validate().unwrap_err().is_argument());
        let mut wide = small(Quantity::Gamma);
        wide.axis2.max = 0.6;
        assert!(wide.validate().unwrap_err().is_argument());
        let mut big = small(Quantity::SbsDistance);
        big.base.n_env = 8;
        big.base.observed = 7;
        big.hamiltonian_variant = HamiltonianVariant::CentralOnly;
        assert!(big.validate().unwrap_err().is_argument());
        big.quantity = Quantity::UpperBound;
        assert!(big.validate().is_ok());
        big.axis1.param = Param::Alpha3;
        assert!(big.validate().unwrap_err().is_argument());
    }

    #[test]
    fn rows_follow_grid_order_and_ignore_workers() {
        let spec = small(Quantity::UpperBound);
        let a = run_sweep(&spec, 1).unwrap();
        let b = run_sweep(&spec, 3).unwrap();
        assert_eq!(a, b);
        let order: Vec<_> = a.rows.iter().map(|r| (r.i, r.j)).collect();
        assert_eq!(order[..5], [(0, 0), (0, 1), (0, 2), (0, 3), (1, 0)]);
        assert_eq!(a.rows[5].x1, 0.5);
        assert_eq!(a.rows[5].x2, spec.axis2.value(1));
        assert_eq!(a.failures(), 0);
    }

    #[test]
    fn optimizing_quantities_carry_the_optimum() {
        let t = run_sweep(&small(Quantity::OptimalBasisParams), 1).unwrap();
        for r in &t.rows {
            let o = r.optimum.unwrap();
            assert_eq!(r.value, Some(o.basis_alignment()));
        }
        assert!(run_sweep(&small(Quantity::Gamma), 1).unwrap().rows.iter().all(|r| r.optimum.is_none()));
    }

    #[test]
    fn constant_region_slice_is_constant() {
        // the system phase term only rotates the coherence block
        let spec = SweepSpec {
            axis1: Axis::new(Param::Alpha1, 0.0, 3.0, 7),
            ..small(Quantity::Gamma)
        };
        let t = marginal_slice(&spec, &SliceAt { param: Param::P, value: 0.2 }, 1).unwrap();
        assert_eq!(t.rows.len(), 7);
        let first = t.rows[0].value.unwrap();
        for r in &t.rows {
            assert_eq!(r.x2, 0.2);
            assert!((r.value.unwrap() - first).abs() < 1e-12);
        }
        assert!(marginal_slice(&spec, &SliceAt { param: Param::Theta, value: 0.2 }, 1).is_err());
        assert!(marginal_slice(&spec, &SliceAt { param: Param::P, value: 0.7 }, 1).is_err());
    }

    #[test]
    fn summary_flags_interior_minima_only() {
        let monotone = summarize(&synthetic(&[3.0, 2.0, 1.0, 0.5])).unwrap();
        assert!(monotone.interior_minima.is_empty());
        let dip = summarize(&synthetic(&[3.0, 1.0, 0.5, 2.0])).unwrap();
        assert_eq!(dip.interior_minima.len(), 1);
        let m = &dip.interior_minima[0];
        assert_eq!((m.along, m.line, m.at, m.value), (2, 0, 2, 0.5));
        let col = dip.column("gamma").unwrap();
        assert_eq!((col.min, col.argmin, col.max, col.argmax), (0.5, (0, 2), 3.0, (0, 0)));
        assert_eq!(dip.signs, SignCounts { positive: 4, negative: 0, zero: 0 });
        let flat = summarize(&synthetic(&[1.0, 1.0, 1.0])).unwrap();
        assert!(flat.interior_minima.is_empty());
    }

    #[test]
    fn summary_counts_failures_and_signs() {
        let mut t = synthetic(&[-1.0, 0.0, 2.0]);
        t.rows[1].value = None;
        t.rows[1].error = Some("boom".into());
        let s = summarize(&t).unwrap();
        assert_eq!(s.failures, 1);
        assert_eq!(s.signs, SignCounts { positive: 1, negative: 1, zero: 0 });
        assert!(s.interior_minima.is_empty());
        t.rows.clear();
        assert!(summarize(&t).unwrap_err().is_argument());
    }

    #[test]
    fn spec_rejects_unknown_keys() {
        let json = serde_json::to_value(small(Quantity::Gamma)).unwrap();
        let back: SweepSpec = serde_json::from_value(json.clone()).unwrap();
        assert_eq!(back, small(Quantity::Gamma));
        let mut extra = json;
        extra["colour"] = serde_json::json!(1);
        assert!(serde_json::from_value::<SweepSpec>(extra).is_err());
    }
}
