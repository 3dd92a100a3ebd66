//! Parameter-grid scans: configuration, grid evaluation, and CSV/JSON
//! serialization.
//!
//! Rows are emitted in deterministic row-major order (β outer, h inner)
//! regardless of how many threads evaluate the grid, and numbers are
//! written with 17 significant digits so files are byte-stable and
//! re-parse to the exact values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::closed_form::closed_form_for;
use crate::metrics::{bures_metric_thermal, sjoqvist_metric, MetricTensor};
use crate::models::{GenericModel, ModelSpec};
use crate::{Error, Result};

/// Uniform grid `start..=stop` with `count` points (`count = 1` is the
/// single point `start`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl RangeSpec {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        let range = RangeSpec { start, stop, count };
        range.validate()?;
        Ok(range)
    }

    /// Parses the CLI form `start:stop:count`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "range '{text}' must have the form start:stop:count"
            )));
        }
        let start: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad range start '{}'", parts[0])))?;
        let stop: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad range stop '{}'", parts[1])))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad range count '{}'", parts[2])))?;
        RangeSpec::new(start, stop, count)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite()
            || !self.stop.is_finite()
            || !(self.stop - self.start).is_finite()
        {
            return Err(Error::Config(format!(
                "range bounds must be finite with a finite span, got {}:{}",
                self.start, self.stop
            )));
        }
        if self.count < 1 {
            return Err(Error::Config("range count must be >= 1".into()));
        }
        if self.start > self.stop {
            return Err(Error::Config(format!(
                "range start {} exceeds stop {}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    /// Grid values; endpoints are reproduced exactly and the sequence is
    /// non-decreasing (interior points clamp at `stop` against roundoff
    /// overshoot).
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == self.count - 1 {
                    self.stop
                } else {
                    (self.start + (self.stop - self.start) * i as f64 / n).min(self.stop)
                }
            })
            .collect()
    }
}

impl FromStr for RangeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RangeSpec::parse(s)
    }
}

/// Metric selection entries as they appear in configs; `both` expands to
/// Bures plus Sjöqvist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricSelection {
    Bures,
    Sjoqvist,
    FisherRao,
    Both,
}

impl FromStr for MetricSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bures" => Ok(MetricSelection::Bures),
            "sjoqvist" => Ok(MetricSelection::Sjoqvist),
            "fisher-rao" => Ok(MetricSelection::FisherRao),
            "both" => Ok(MetricSelection::Both),
            other => Err(Error::Config(format!(
                "unknown metric '{other}' (expected bures, sjoqvist, fisher-rao, or both)"
            ))),
        }
    }
}

/// Concrete metrics to emit, in fixed column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MetricKind {
    Bures,
    Sjoqvist,
    FisherRao,
}

impl MetricKind {
    pub fn column_prefix(self) -> &'static str {
        match self {
            MetricKind::Bures => "bures",
            MetricKind::Sjoqvist => "sjoqvist",
            MetricKind::FisherRao => "fisher_rao",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    ClosedForm,
    General,
    Both,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(Engine::ClosedForm),
            "general" => Ok(Engine::General),
            "both" => Ok(Engine::Both),
            other => Err(Error::Config(format!(
                "unknown engine '{other}' (expected closed-form, general, or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// Worker-thread selection: a fixed count or rayon's default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Threads {
    #[default]
    Auto,
    Count(usize),
}

impl FromStr for Threads {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        let count: usize = s
            .parse()
            .map_err(|_| Error::Config(format!("threads must be a count or 'auto', got '{s}'")))?;
        if count == 0 {
            return Err(Error::Config("thread count must be >= 1".into()));
        }
        Ok(Threads::Count(count))
    }
}

impl Serialize for Threads {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threads::Auto => serializer.serialize_str("auto"),
            Threads::Count(n) => serializer.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(usize),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Count(0) => Err(serde::de::Error::custom("thread count must be >= 1")),
            Repr::Count(n) => Ok(Threads::Count(n)),
            Repr::Text(s) if s == "auto" => Ok(Threads::Auto),
            Repr::Text(s) => Err(serde::de::Error::custom(format!(
                "threads must be a count or 'auto', got '{s}'"
            ))),
        }
    }
}

fn default_metrics() -> Vec<MetricSelection> {
    vec![MetricSelection::Both]
}

fn default_engine() -> Engine {
    Engine::General
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

fn default_fd_step() -> f64 {
    crate::metrics::DEFAULT_FD_STEP
}

/// Full scan configuration; the JSON config file mirrors this struct and
/// CLI flags override individual fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub model: String,
    #[serde(default)]
    pub fixed_params: BTreeMap<String, f64>,
    pub beta_range: RangeSpec,
    pub h_range: RangeSpec,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricSelection>,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default)]
    pub threads: Threads,
    /// Tabulated-Hamiltonian file, required for the generic model.
    #[serde(default)]
    pub model_file: Option<PathBuf>,
}

impl ScanConfig {
    pub fn from_json_str(text: &str) -> Result<ScanConfig> {
        let config: ScanConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("scan config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Concrete metric kinds in fixed output order.
    pub fn resolved_metrics(&self) -> Vec<MetricKind> {
        let mut out = Vec::new();
        let mut push = |kind: MetricKind| {
            if !out.contains(&kind) {
                out.push(kind);
            }
        };
        for selection in &self.metrics {
            match selection {
                MetricSelection::Bures => push(MetricKind::Bures),
                MetricSelection::Sjoqvist => push(MetricKind::Sjoqvist),
                MetricSelection::FisherRao => push(MetricKind::FisherRao),
                MetricSelection::Both => {
                    push(MetricKind::Bures);
                    push(MetricKind::Sjoqvist);
                }
            }
        }
        out.sort();
        out
    }

    /// The nonclassical discrepancy column is emitted whenever both quantum
    /// metrics are requested (it is identically zero for spin-z).
    pub fn emits_delta_nc(&self) -> bool {
        let kinds = self.resolved_metrics();
        kinds.contains(&MetricKind::Bures) && kinds.contains(&MetricKind::Sjoqvist)
    }

    pub fn emits_disagreement(&self) -> bool {
        self.engine == Engine::Both
    }

    pub fn validate(&self) -> Result<()> {
        self.beta_range.validate()?;
        self.h_range.validate()?;
        if self.metrics.is_empty() {
            return Err(Error::Config("at least one metric must be selected".into()));
        }
        if !(self.fd_step > 0.0 && self.fd_step <= 1e-1) {
            return Err(Error::Config(format!(
                "fd_step must lie in (0, 1e-1], got {}",
                self.fd_step
            )));
        }
        if self.beta_range.start < 0.0 {
            return Err(Error::Config("beta range must be nonnegative".into()));
        }
        if self.beta_range.start == 0.0 && self.engine != Engine::ClosedForm {
            return Err(Error::Config(
                "beta = 0 is only defined for the closed-form engine; start the range above 0"
                    .into(),
            ));
        }
        if self.model == "generic" {
            if self.model_file.is_none() {
                return Err(Error::Config("generic model requires model_file".into()));
            }
            if self.engine != Engine::General {
                return Err(Error::Config(
                    "generic model has no closed form; use engine = general".into(),
                ));
            }
        }
        Ok(())
    }

    /// Instantiates the model named by this config.
    pub fn build_model(&self) -> Result<ModelSpec> {
        if self.model == "generic" {
            let path = self
                .model_file
                .as_ref()
                .ok_or_else(|| Error::Config("generic model requires model_file".into()))?;
            let text = std::fs::read_to_string(path)?;
            Ok(ModelSpec::generic(GenericModel::from_json_str(&text)?))
        } else {
            ModelSpec::from_params(&self.model, &self.fixed_params)
        }
    }
}

/// The five numbers emitted per metric per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValues {
    pub g_bb: f64,
    pub g_bh: f64,
    pub g_hh: f64,
    pub g_hh_classical: f64,
    pub g_hh_nonclassical: f64,
}

impl MetricValues {
    fn from_tensor(tensor: &MetricTensor) -> Self {
        MetricValues {
            g_bb: tensor.g_bb(),
            g_bh: tensor.g_bh(),
            g_hh: tensor.g_hh(),
            g_hh_classical: tensor.hh.classical,
            g_hh_nonclassical: tensor.hh.nonclassical,
        }
    }

    fn fields(&self) -> [f64; 5] {
        [
            self.g_bb,
            self.g_bh,
            self.g_hh,
            self.g_hh_classical,
            self.g_hh_nonclassical,
        ]
    }
}

/// One grid point. Degenerate points carry `status = "degenerate"` and no
/// metric values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub beta: f64,
    pub h: f64,
    pub status: String,
    pub bures: Option<MetricValues>,
    pub sjoqvist: Option<MetricValues>,
    pub fisher_rao: Option<MetricValues>,
    pub delta_nc: Option<f64>,
    pub engine_disagreement: Option<f64>,
}

impl ScanRow {
    fn degenerate(beta: f64, h: f64) -> Self {
        ScanRow {
            beta,
            h,
            status: "degenerate".into(),
            bures: None,
            sjoqvist: None,
            fisher_rao: None,
            delta_nc: None,
            engine_disagreement: None,
        }
    }

    pub fn metric(&self, kind: MetricKind) -> Option<&MetricValues> {
        match kind {
            MetricKind::Bures => self.bures.as_ref(),
            MetricKind::Sjoqvist => self.sjoqvist.as_ref(),
            MetricKind::FisherRao => self.fisher_rao.as_ref(),
        }
    }
}

/// Bures and Sjöqvist tensors from one engine at one point.
struct TensorPair {
    bures: MetricTensor,
    sjoqvist: MetricTensor,
}

fn tensors_closed_form(model: &ModelSpec, beta: f64, h: f64) -> Result<TensorPair> {
    let cf = closed_form_for(model, beta, h)?;
    Ok(TensorPair {
        bures: cf.tensor_bures,
        sjoqvist: cf.tensor_sjoqvist,
    })
}

fn tensors_general(model: &ModelSpec, beta: f64, h: f64) -> Result<TensorPair> {
    Ok(TensorPair {
        bures: bures_metric_thermal(model, beta, h)?,
        sjoqvist: sjoqvist_metric(model, beta, h)?,
    })
}

fn compute_row(config: &ScanConfig, model: &ModelSpec, beta: f64, h: f64) -> Result<ScanRow> {
    let primary = match config.engine {
        Engine::ClosedForm | Engine::Both => tensors_closed_form(model, beta, h),
        Engine::General => tensors_general(model, beta, h),
    };
    let primary = match primary {
        Ok(pair) => pair,
        Err(e) if e.is_degeneracy() => return Ok(ScanRow::degenerate(beta, h)),
        Err(e) => return Err(e),
    };

    let disagreement = if config.engine == Engine::Both {
        match tensors_general(model, beta, h) {
            Ok(general) => Some(
                primary
                    .bures
                    .max_abs_diff(&general.bures)
                    .max(primary.sjoqvist.max_abs_diff(&general.sjoqvist)),
            ),
            Err(e) if e.is_degeneracy() => return Ok(ScanRow::degenerate(beta, h)),
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let kinds = config.resolved_metrics();
    let wants = |k: MetricKind| kinds.contains(&k);
    let bures = wants(MetricKind::Bures).then(|| MetricValues::from_tensor(&primary.bures));
    let sjoqvist =
        wants(MetricKind::Sjoqvist).then(|| MetricValues::from_tensor(&primary.sjoqvist));
    let fisher_rao = wants(MetricKind::FisherRao)
        .then(|| MetricValues::from_tensor(&primary.bures.classical_part()));
    let delta_nc = config
        .emits_delta_nc()
        .then(|| primary.sjoqvist.g_hh() - primary.bures.g_hh());

    Ok(ScanRow {
        beta,
        h,
        status: "ok".into(),
        bures,
        sjoqvist,
        fisher_rao,
        delta_nc,
        engine_disagreement: disagreement,
    })
}

/// Evaluates the grid. Rows come back in row-major order (β outer, h inner)
/// independent of the worker-thread count; degenerate points are flagged
/// rows, any other evaluation error aborts the scan.
pub fn run_scan(config: &ScanConfig) -> Result<Vec<ScanRow>> {
    config.validate()?;
    let model = config.build_model()?;
    let betas = config.beta_range.values();
    let hs = config.h_range.values();
    let points: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| hs.iter().map(move |&h| (b, h)))
        .collect();

    let evaluate = || -> Result<Vec<ScanRow>> {
        points
            .par_iter()
            .map(|&(beta, h)| compute_row(config, &model, beta, h))
            .collect()
    };

    match config.threads {
        Threads::Auto => evaluate(),
        Threads::Count(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(evaluate),
    }
}

/// 17-significant-digit serialization; round-trips `f64` exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header row for the CSV layout implied by `config`.
pub fn csv_header(config: &ScanConfig) -> Vec<String> {
    let mut columns = vec!["beta".to_string(), "h".to_string(), "status".to_string()];
    for kind in config.resolved_metrics() {
        let prefix = kind.column_prefix();
        for field in [
            "g_bb",
            "g_bh",
            "g_hh",
            "g_hh_classical",
            "g_hh_nonclassical",
        ] {
            columns.push(format!("{prefix}_{field}"));
        }
    }
    if config.emits_delta_nc() {
        columns.push("delta_nc".to_string());
    }
    if config.emits_disagreement() {
        columns.push("engine_disagreement".to_string());
    }
    columns
}

/// Renders the whole output file (header plus rows) as one string.
pub fn render(config: &ScanConfig, rows: &[ScanRow]) -> Result<String> {
    match config.format {
        OutputFormat::Csv => render_csv(config, rows),
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(rows)
                .map_err(|e| Error::Config(format!("json serialization: {e}")))?;
            text.push('\n');
            Ok(text)
        }
    }
}

fn render_csv(config: &ScanConfig, rows: &[ScanRow]) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{}", csv_header(config).join(","));
    let kinds = config.resolved_metrics();
    for row in rows {
        let mut fields = vec![
            format_float(row.beta),
            format_float(row.h),
            row.status.clone(),
        ];
        for &kind in &kinds {
            match row.metric(kind) {
                Some(values) => fields.extend(values.fields().iter().map(|&x| format_float(x))),
                None => fields.extend(std::iter::repeat_n(String::new(), 5)),
            }
        }
        if config.emits_delta_nc() {
            fields.push(row.delta_nc.map(format_float).unwrap_or_default());
        }
        if config.emits_disagreement() {
            fields.push(
                row.engine_disagreement
                    .map(format_float)
                    .unwrap_or_default(),
            );
        }
        let _ = writeln!(out, "{}", fields.join(","));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flux_config() -> ScanConfig {
        ScanConfig {
            model: "flux-qubit".into(),
            fixed_params: [("delta".to_string(), 1.0)].into_iter().collect(),
            beta_range: RangeSpec::new(0.1, 5.0, 10).unwrap(),
            h_range: RangeSpec::new(-2.0, 2.0, 5).unwrap(),
            metrics: vec![MetricSelection::Both],
            engine: Engine::ClosedForm,
            output_path: None,
            format: OutputFormat::Csv,
            fd_step: default_fd_step(),
            threads: Threads::Auto,
            model_file: None,
        }
    }

    #[test]
    fn range_parse_and_values() {
        let range = RangeSpec::parse("0:10:201").unwrap();
        assert_eq!(range.count, 201);
        let values = range.values();
        assert_eq!(values[0], 0.0);
        assert_eq!(values[200], 10.0);
        assert_eq!(values.len(), 201);

        assert_eq!(RangeSpec::parse("2:2:1").unwrap().values(), vec![2.0]);
        assert!(RangeSpec::parse("1:0:5").is_err());
        assert!(RangeSpec::parse("0:1:0").is_err());
        assert!(RangeSpec::parse("0:1").is_err());
        assert!(RangeSpec::parse("a:1:5").is_err());
        assert!(RangeSpec::parse("inf:1:5").is_err());
    }

    #[test]
    fn config_parsing_defaults_and_unknown_fields() {
        let config = ScanConfig::from_json_str(
            r#"{
                "model": "flux-qubit",
                "fixed_params": {"delta": 1.0},
                "beta_range": {"start": 0.5, "stop": 2.0, "count": 4},
                "h_range": {"start": -1.0, "stop": 1.0, "count": 3}
            }"#,
        )
        .unwrap();
        assert_eq!(config.engine, Engine::General);
        assert_eq!(config.format, OutputFormat::Csv);
        assert_eq!(config.threads, Threads::Auto);
        assert_eq!(config.fd_step, default_fd_step());
        assert_eq!(
            config.resolved_metrics(),
            vec![MetricKind::Bures, MetricKind::Sjoqvist]
        );

        assert!(ScanConfig::from_json_str(r#"{"model": "flux-qubit", "beta_range": {"start": 1, "stop": 2, "count": 2}, "h_range": {"start": 0, "stop": 1, "count": 2}, "typo_field": 3}"#).is_err());
    }

    #[test]
    fn config_validation_errors() {
        let mut config = flux_config();
        config.beta_range = RangeSpec {
            start: -1.0,
            stop: 1.0,
            count: 3,
        };
        assert!(config.validate().is_err());

        let mut config = flux_config();
        config.engine = Engine::General;
        config.beta_range = RangeSpec {
            start: 0.0,
            stop: 1.0,
            count: 3,
        };
        assert!(config.validate().is_err());
        config.engine = Engine::ClosedForm;
        assert!(config.validate().is_ok());

        let mut config = flux_config();
        config.fd_step = 0.5;
        assert!(config.validate().is_err());

        let mut config = flux_config();
        config.metrics.clear();
        assert!(config.validate().is_err());

        let mut config = flux_config();
        config.model = "generic".into();
        assert!(config.validate().is_err(), "generic needs model_file");
    }

    #[test]
    fn flux_scan_has_nonnegative_delta_column() {
        let config = flux_config();
        let rows = run_scan(&config).unwrap();
        assert_eq!(rows.len(), 50);
        for row in &rows {
            assert_eq!(row.status, "ok");
            let delta = row.delta_nc.expect("both metrics selected");
            assert!(delta >= 0.0, "delta_nc = {delta}");
        }
        // Row-major: β outer, h inner.
        assert_eq!(rows[0].beta, 0.1);
        assert_eq!(rows[0].h, -2.0);
        assert_eq!(rows[1].beta, 0.1);
        assert_eq!(rows[1].h, -1.0);
        assert_eq!(rows[5].beta, 0.1 + (5.0 - 0.1) / 9.0);
    }

    #[test]
    fn spin_z_scan_delta_column_is_identically_zero() {
        let mut config = flux_config();
        config.model = "spin-z".into();
        config.fixed_params.clear();
        config.h_range = RangeSpec::new(0.5, 2.0, 4).unwrap();
        let rows = run_scan(&config).unwrap();
        for row in &rows {
            assert_eq!(row.delta_nc, Some(0.0));
        }
    }

    #[test]
    fn single_point_scan_matches_closed_form_value() {
        let mut config = flux_config();
        config.beta_range = RangeSpec::new(2.0, 2.0, 1).unwrap();
        config.h_range = RangeSpec::new(0.0, 0.0, 1).unwrap();
        let rows = run_scan(&config).unwrap();
        assert_eq!(rows.len(), 1);
        let sjoqvist = rows[0].sjoqvist.as_ref().unwrap();
        assert!((sjoqvist.g_hh - 0.25).abs() <= 1e-14);
    }

    #[test]
    fn degenerate_grid_point_is_flagged_not_fatal() {
        let mut config = flux_config();
        config.fixed_params.insert("delta".into(), 0.0);
        config.beta_range = RangeSpec::new(1.0, 1.0, 1).unwrap();
        config.h_range = RangeSpec::new(-1.0, 1.0, 3).unwrap();
        let rows = run_scan(&config).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].status, "ok");
        assert_eq!(rows[1].status, "degenerate");
        assert!(rows[1].bures.is_none());
        assert!(rows[1].delta_nc.is_none());
        assert_eq!(rows[2].status, "ok");
    }

    #[test]
    fn engine_both_reports_small_disagreement() {
        let mut config = flux_config();
        config.engine = Engine::Both;
        let rows = run_scan(&config).unwrap();
        for row in &rows {
            let disagreement = row.engine_disagreement.expect("engine = both");
            assert!(disagreement <= 1e-8, "engines disagree by {disagreement:e}");
        }
    }

    #[test]
    fn output_is_deterministic_across_thread_counts() {
        let mut config = flux_config();
        config.engine = Engine::Both;
        let baseline = render(&config, &run_scan(&config).unwrap()).unwrap();
        for threads in [Threads::Count(1), Threads::Count(4), Threads::Auto] {
            config.threads = threads;
            let rendered = render(&config, &run_scan(&config).unwrap()).unwrap();
            assert_eq!(rendered, baseline);
        }
    }

    #[test]
    fn csv_floats_roundtrip_exactly() {
        let config = flux_config();
        let rows = run_scan(&config).unwrap();
        let text = render(&config, &rows).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), 3 + 2 * 5 + 1);
        assert_eq!(header[0], "beta");
        assert_eq!(header[3], "bures_g_bb");
        assert_eq!(*header.last().unwrap(), "delta_nc");
        for (row, line) in rows.iter().zip(lines) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), header.len());
            assert_eq!(fields[0].parse::<f64>().unwrap(), row.beta);
            assert_eq!(
                fields[3].parse::<f64>().unwrap(),
                row.bures.as_ref().unwrap().g_bb
            );
            assert_eq!(
                fields.last().unwrap().parse::<f64>().unwrap(),
                row.delta_nc.unwrap()
            );
        }
    }

    #[test]
    fn json_rows_roundtrip_exactly() {
        let mut config = flux_config();
        config.format = OutputFormat::Json;
        let rows = run_scan(&config).unwrap();
        let text = render(&config, &rows).unwrap();
        let parsed: Vec<ScanRow> = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, rows);
    }

    #[test]
    fn threads_field_accepts_count_or_auto() {
        let auto: Threads = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(auto, Threads::Auto);
        let four: Threads = serde_json::from_str("4").unwrap();
        assert_eq!(four, Threads::Count(4));
        assert!(serde_json::from_str::<Threads>("0").is_err());
        assert!(serde_json::from_str::<Threads>("\"many\"").is_err());
        assert_eq!("auto".parse::<Threads>().unwrap(), Threads::Auto);
        assert_eq!("3".parse::<Threads>().unwrap(), Threads::Count(3));
    }

    proptest! {
        #[test]
        fn range_values_hit_endpoints_and_stay_sorted(
            start in -100.0f64..100.0,
            span in 0.0f64..100.0,
            count in 1usize..200,
        ) {
            let range = RangeSpec::new(start, start + span, count).unwrap();
            let values = range.values();
            prop_assert_eq!(values.len(), count);
            prop_assert_eq!(values[0], start);
            if count > 1 {
                prop_assert_eq!(*values.last().unwrap(), start + span);
                for w in values.windows(2) {
                    prop_assert!(w[0] <= w[1]);
                }
            }
        }

        #[test]
        fn format_float_roundtrips(x in proptest::num::f64::NORMAL) {
            let text = format_float(x);
            prop_assert_eq!(text.parse::<f64>().unwrap(), x);
        }
    }
}
