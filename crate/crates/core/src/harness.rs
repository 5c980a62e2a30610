//! Experiment configuration, run reports and output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::driver::{self, FctConfig, Mode, WinnerRef, WinnerSwitch};
use crate::error::{Error, Result};
use crate::forest::{ESTIMATOR_BYTES, NODE_BYTES};
use crate::repository::{Repository, ENTRY_OVERHEAD_BYTES};
use crate::spectrum::{COEFFICIENT_VALUE_BYTES, INDEX_ATTRIBUTE_BYTES, SPECTRUM_HEADER_BYTES};
use crate::stream::{
    file_stream, hyperplane_stream, rbf_stream, sea_stream, ConceptParams, ConceptSchedule,
    FileOptions, Instance, DEFAULT_CALIBRATION_LEN,
};

/// Instances per row of `metrics.csv`.
pub const METRICS_WINDOW: usize = 1_000;

pub const METRICS_HEADER: &str =
    "window_end,windowed_acc,overall_acc,forest_bytes,repo_bytes,winner_source,winner_id";

/// Learner state captured at the end of a metrics window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSnapshot {
    pub window_end: u64,
    pub forest_bytes: usize,
    pub repo_bytes: usize,
    pub winner: WinnerRef,
}

/// One `metrics.csv` row. Accuracies are NaN when no instance of the window
/// (or prefix) has been scored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRow {
    pub window_end: u64,
    pub windowed_accuracy: f64,
    pub overall_accuracy: f64,
    pub forest_bytes: usize,
    pub repo_bytes: usize,
    pub winner: WinnerRef,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    mode: Mode,
    predictions: Vec<u8>,
    labels: Vec<u8>,
    /// `Some(correct)` once scored; the final delay-sized suffix stays `None`.
    outcomes: Vec<Option<bool>>,
    snapshots: Vec<WindowSnapshot>,
    drifts: Vec<u64>,
    switches: Vec<WinnerSwitch>,
    true_boundaries: Vec<u64>,
    inserts: usize,
    elapsed: Duration,
    repository: Option<Repository<f64>>,
}

impl RunReport {
    pub(crate) fn new(mode: Mode) -> Self {
        RunReport {
            mode,
            predictions: Vec::new(),
            labels: Vec::new(),
            outcomes: Vec::new(),
            snapshots: Vec::new(),
            drifts: Vec::new(),
            switches: Vec::new(),
            true_boundaries: Vec::new(),
            inserts: 0,
            elapsed: Duration::ZERO,
            repository: None,
        }
    }

    pub(crate) fn record_prediction(&mut self, prediction: u8, label: u8) {
        self.predictions.push(prediction);
        self.labels.push(label);
        self.outcomes.push(None);
    }

    pub(crate) fn record_score(&mut self, position: u64, correct: bool) {
        let slot = &mut self.outcomes[position as usize];
        debug_assert!(slot.is_none(), "instance scored twice");
        *slot = Some(correct);
    }

    pub(crate) fn push_snapshot(&mut self, snapshot: WindowSnapshot) {
        self.snapshots.push(snapshot);
    }

    pub(crate) fn finish(
        &mut self,
        elapsed: Duration,
        drifts: Vec<u64>,
        switches: Vec<WinnerSwitch>,
        inserts: usize,
        repository: Repository<f64>,
    ) {
        self.elapsed = elapsed;
        self.drifts = drifts;
        self.switches = switches;
        self.inserts = inserts;
        self.repository = Some(repository);
    }

    pub fn with_true_boundaries(mut self, boundaries: Vec<u64>) -> Self {
        self.true_boundaries = boundaries;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    pub fn predictions(&self) -> &[u8] {
        &self.predictions
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn outcomes(&self) -> &[Option<bool>] {
        &self.outcomes
    }

    pub fn drifts(&self) -> &[u64] {
        &self.drifts
    }

    pub fn switches(&self) -> &[WinnerSwitch] {
        &self.switches
    }

    pub fn true_boundaries(&self) -> &[u64] {
        &self.true_boundaries
    }

    /// Spectra stored during the run.
    pub fn repository_inserts(&self) -> usize {
        self.inserts
    }

    pub fn repository(&self) -> Option<&Repository<f64>> {
        self.repository.as_ref()
    }

    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }

    /// Instances per second of the stepping loop; output writing is excluded.
    pub fn throughput(&self) -> f64 {
        let secs = self.elapsed.as_secs_f64();
        if self.is_empty() {
            0.0
        } else {
            self.len() as f64 / secs.max(1e-9)
        }
    }

    pub fn scored(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_some()).count()
    }

    /// Accuracy over every scored instance; NaN when nothing was scored.
    pub fn overall_accuracy(&self) -> f64 {
        let (hits, n) = tally(&self.outcomes);
        ratio(hits, n)
    }

    pub fn windows(&self) -> Vec<WindowRow> {
        let mut rows = Vec::with_capacity(self.snapshots.len());
        let (mut total_hits, mut total_n) = (0usize, 0usize);
        let mut start = 0usize;
        for s in &self.snapshots {
            let end = s.window_end as usize;
            let (hits, n) = tally(&self.outcomes[start..end]);
            total_hits += hits;
            total_n += n;
            rows.push(WindowRow {
                window_end: s.window_end,
                windowed_accuracy: ratio(hits, n),
                overall_accuracy: ratio(total_hits, total_n),
                forest_bytes: s.forest_bytes,
                repo_bytes: s.repo_bytes,
                winner: s.winner,
            });
            start = end;
        }
        rows
    }

    pub fn average_forest_bytes(&self) -> f64 {
        mean(self.snapshots.iter().map(|s| s.forest_bytes as f64))
    }

    pub fn average_repo_bytes(&self) -> f64 {
        mean(self.snapshots.iter().map(|s| s.repo_bytes as f64))
    }
}

fn tally(outcomes: &[Option<bool>]) -> (usize, usize) {
    outcomes.iter().fold((0, 0), |(h, n), o| match o {
        Some(true) => (h + 1, n + 1),
        Some(false) => (h, n + 1),
        None => (h, n),
    })
}

fn ratio(hits: usize, n: usize) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        hits as f64 / n as f64
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dataset {
    Sea,
    Rbf,
    Hyperplane,
    File,
}

impl Dataset {
    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::Sea => "sea",
            Dataset::Rbf => "rbf",
            Dataset::Hyperplane => "hyperplane",
            Dataset::File => "file",
        }
    }

    /// Concept parameters, recurrences and segment length used when no
    /// segment specification is given.
    pub fn default_segments(self) -> SegmentSpec {
        let params = match self {
            Dataset::Sea => vec![8.0, 7.0, 9.0, 9.5],
            Dataset::Rbf => vec![5.0, 15.0, 25.0, 35.0],
            Dataset::Hyperplane | Dataset::File => vec![2.0, 4.0, 6.0, 8.0],
        };
        SegmentSpec {
            params,
            recurrences: 25,
            length: 5_000,
        }
    }
}

impl std::str::FromStr for Dataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sea" => Ok(Dataset::Sea),
            "rbf" => Ok(Dataset::Rbf),
            "hyperplane" => Ok(Dataset::Hyperplane),
            "file" => Ok(Dataset::File),
            other => Err(Error::config(
                "dataset",
                format!("expected sea, rbf, hyperplane or file, got `{other}`"),
            )),
        }
    }
}

/// `P1,P2,...[xR][@L]`: concept parameters cycled `R` times, each segment `L`
/// instances long.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpec {
    pub params: Vec<f64>,
    pub recurrences: usize,
    pub length: usize,
}

impl SegmentSpec {
    pub fn parse(text: &str, defaults: &SegmentSpec) -> Result<Self> {
        let bad = |msg: String| Error::config("segments", msg);
        let (rest, length) = match text.split_once('@') {
            Some((r, l)) => (
                r,
                l.trim()
                    .parse::<usize>()
                    .map_err(|_| bad(format!("segment length `{l}` is not a positive integer")))?,
            ),
            None => (text, defaults.length),
        };
        let (list, recurrences) = match rest.split_once('x') {
            Some((p, r)) => (
                p,
                r.trim().parse::<usize>().map_err(|_| {
                    bad(format!("recurrence count `{r}` is not a positive integer"))
                })?,
            ),
            None => (rest, defaults.recurrences),
        };
        let params = if list.trim().is_empty() {
            defaults.params.clone()
        } else {
            list.split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("concept parameter `{p}` is not a number")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        if params.is_empty() || recurrences == 0 || length == 0 {
            return Err(bad(
                "need at least one concept, one recurrence and a positive length".into(),
            ));
        }
        Ok(SegmentSpec {
            params,
            recurrences,
            length,
        })
    }

    fn concepts(&self, dataset: Dataset) -> Result<Vec<ConceptParams>> {
        let count = |p: f64| -> Result<usize> {
            if p >= 0.0 && p.fract() == 0.0 {
                Ok(p as usize)
            } else {
                Err(Error::config(
                    "segments",
                    format!(
                        "{} concepts need integer parameters, got {p}",
                        dataset.as_str()
                    ),
                ))
            }
        };
        self.params
            .iter()
            .map(|&p| match dataset {
                Dataset::Sea => Ok(ConceptParams::Sea { threshold: p }),
                Dataset::Rbf => Ok(ConceptParams::Rbf {
                    centroids: count(p)?,
                }),
                Dataset::Hyperplane => Ok(ConceptParams::Hyperplane {
                    drifting_attributes: count(p)?,
                }),
                Dataset::File => Err(Error::config("segments", "file datasets take no segments")),
            })
            .collect()
    }
}

/// Everything one experiment needs. Keys of [`RunConfig::set`] mirror the CLI
/// flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: Dataset,
    pub file: Option<PathBuf>,
    pub noise: f64,
    pub seed: u64,
    pub segments: Option<String>,
    pub bits_per_attribute: u32,
    pub calibration_len: usize,
    pub out: PathBuf,
    pub learner: FctConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: Dataset::Sea,
            file: None,
            noise: 0.1,
            seed: 1,
            segments: None,
            bits_per_attribute: 1,
            calibration_len: DEFAULT_CALIBRATION_LEN,
            out: PathBuf::from("results"),
            learner: FctConfig::default(),
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "dataset",
    "file",
    "noise",
    "energy",
    "tau",
    "delay",
    "repo-cap",
    "adwin-delta",
    "seed",
    "segments",
    "mode",
    "out",
    "bits-per-attr",
    "calibration-len",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, what: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("expected {what}, got `{value}`")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "dataset" => self.dataset = v.parse()?,
            "file" => self.file = Some(PathBuf::from(v)),
            "noise" => self.noise = parse_value(key, v, "a probability")?,
            "energy" => self.learner.energy_threshold = parse_value(key, v, "a number")?,
            "tau" => self.learner.tie_threshold = parse_value(key, v, "a number")?,
            "delay" => self.learner.label_delay = parse_value(key, v, "a count")?,
            "repo-cap" => self.learner.repository_capacity = parse_value(key, v, "a count")?,
            "adwin-delta" => self.learner.adwin_delta = parse_value(key, v, "a number")?,
            "seed" => self.seed = parse_value(key, v, "an unsigned integer")?,
            "segments" => self.segments = Some(v.to_string()),
            "mode" => self.learner.mode = v.parse()?,
            "out" => self.out = PathBuf::from(v),
            "bits-per-attr" => self.bits_per_attribute = parse_value(key, v, "a count")?,
            "calibration-len" => self.calibration_len = parse_value(key, v, "a count")?,
            other => return Err(Error::config(other, "unknown configuration key")),
        }
        Ok(())
    }

    /// Applies a flat `key=value` file; blank lines and `#` comments are
    /// skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(
                    format!("line {}", n + 1),
                    format!("expected key=value, got `{line}`"),
                ));
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.learner.validate()?;
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::config(
                "noise",
                format!("noise must be in [0, 1], got {}", self.noise),
            ));
        }
        if !(1..=16).contains(&self.bits_per_attribute) {
            return Err(Error::config(
                "bits-per-attr",
                format!(
                    "bits per attribute must be in 1..=16, got {}",
                    self.bits_per_attribute
                ),
            ));
        }
        if self.dataset == Dataset::File && self.file.is_none() {
            return Err(Error::config("file", "dataset file needs --file PATH"));
        }
        if self.dataset != Dataset::File {
            self.schedule()?;
        }
        Ok(())
    }

    pub fn segment_spec(&self) -> Result<SegmentSpec> {
        let defaults = self.dataset.default_segments();
        match &self.segments {
            Some(text) => SegmentSpec::parse(text, &defaults),
            None => Ok(defaults),
        }
    }

    /// Concept schedule of a generator dataset.
    pub fn schedule(&self) -> Result<ConceptSchedule> {
        let spec = self.segment_spec()?;
        let concepts = spec.concepts(self.dataset)?;
        Ok(ConceptSchedule::recurring(
            &concepts,
            spec.recurrences,
            spec.length,
            self.noise,
            self.seed,
        ))
    }
}

/// Builds the configured stream and runs the learner over it.
pub fn execute(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let bits = config.bits_per_attribute;
    let cal = config.calibration_len;
    match config.dataset {
        Dataset::File => {
            let path = config.file.as_ref().expect("validated");
            let options = FileOptions {
                bits_per_attribute: bits,
                calibration_len: cal,
                delimiter: None,
            };
            let stream = file_stream(path, &options)?;
            let dim = stream.schema().dim();
            driver::run(&config.learner, dim, stream, cal)
        }
        generator => {
            let schedule = config.schedule()?;
            let boundaries = schedule.boundaries();
            let stream = match generator {
                Dataset::Sea => sea_stream(schedule, cal, bits)?,
                Dataset::Rbf => rbf_stream(schedule, cal, bits)?,
                _ => hyperplane_stream(schedule, cal, bits)?,
            };
            let dim = stream.schema().dim();
            let report = driver::run(&config.learner, dim, stream, cal)?;
            Ok(report.with_true_boundaries(boundaries))
        }
    }
}

/// Runs the learner over an in-memory instance sequence.
pub fn execute_instances(
    learner: &FctConfig,
    dim: usize,
    instances: Vec<Instance>,
) -> Result<RunReport> {
    driver::run(learner, dim, instances, DEFAULT_CALIBRATION_LEN)
}

fn fmt_acc(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.6}")
    }
}

pub fn metrics_csv(report: &RunReport) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in report.windows() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.window_end,
            fmt_acc(r.windowed_accuracy),
            fmt_acc(r.overall_accuracy),
            r.forest_bytes,
            r.repo_bytes,
            r.winner.source,
            r.winner.id
        );
    }
    out
}

/// Detected drifts (`true_boundary = 0`) and ground-truth boundaries
/// (`true_boundary = 1`), ordered by position.
pub fn drifts_csv(report: &RunReport) -> String {
    let mut rows: Vec<(u64, u8)> = report
        .drifts
        .iter()
        .map(|&p| (p, 0))
        .chain(report.true_boundaries.iter().map(|&p| (p, 1)))
        .collect();
    rows.sort_unstable();
    let mut out = String::from("position,true_boundary\n");
    for (p, t) in rows {
        let _ = writeln!(out, "{p},{t}");
    }
    out
}

pub fn plotdata_csv(report: &RunReport) -> String {
    let mut out = String::from("mode,window_end,windowed_acc,overall_acc\n");
    push_plot_rows(&mut out, "", report);
    out
}

fn push_plot_rows(out: &mut String, prefix: &str, report: &RunReport) {
    for r in report.windows() {
        let _ = writeln!(
            out,
            "{prefix}{},{},{},{}",
            report.mode.as_str(),
            r.window_end,
            fmt_acc(r.windowed_accuracy),
            fmt_acc(r.overall_accuracy)
        );
    }
}

pub fn summary_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode: {}", report.mode.as_str());
    let _ = writeln!(out, "instances: {}", report.len());
    let _ = writeln!(out, "scored_instances: {}", report.scored());
    let _ = writeln!(
        out,
        "overall_accuracy: {}",
        fmt_acc(report.overall_accuracy())
    );
    let _ = writeln!(out, "detected_drifts: {}", report.drifts.len());
    let _ = writeln!(out, "true_boundaries: {}", report.true_boundaries.len());
    let _ = writeln!(out, "winner_switches: {}", report.switches.len());
    let _ = writeln!(out, "repository_inserts: {}", report.inserts);
    let _ = writeln!(
        out,
        "repository_entries: {}",
        report.repository.as_ref().map_or(0, Repository::len)
    );
    let _ = writeln!(
        out,
        "average_forest_bytes: {:.1}",
        report.average_forest_bytes()
    );
    let _ = writeln!(
        out,
        "average_repo_bytes: {:.1}",
        report.average_repo_bytes()
    );
    let _ = writeln!(
        out,
        "throughput_instances_per_second: {:.1}",
        report.throughput()
    );
    let _ = writeln!(
        out,
        "wall_clock_seconds: {:.3}",
        report.elapsed.as_secs_f64()
    );
    out.push_str("# cost model (bytes)\n");
    let _ = writeln!(out, "tree_node_bytes: {NODE_BYTES}");
    let _ = writeln!(out, "tree_estimator_bytes: {ESTIMATOR_BYTES}");
    let _ = writeln!(out, "coefficient_value_bytes: {COEFFICIENT_VALUE_BYTES}");
    let _ = writeln!(
        out,
        "coefficient_index_attribute_bytes: {INDEX_ATTRIBUTE_BYTES}"
    );
    let _ = writeln!(out, "spectrum_header_bytes: {SPECTRUM_HEADER_BYTES}");
    let _ = writeln!(
        out,
        "repository_entry_overhead_bytes: {ENTRY_OVERHEAD_BYTES}"
    );
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `metrics.csv`, `drifts.csv`, `summary.txt`, `plotdata.csv` and the
/// repository snapshot under `repo/`.
pub fn emit_metrics(report: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join("metrics.csv"), &metrics_csv(report))?;
    write_file(&dir.join("drifts.csv"), &drifts_csv(report))?;
    write_file(&dir.join("summary.txt"), &summary_text(report))?;
    write_file(&dir.join("plotdata.csv"), &plotdata_csv(report))?;
    let repo_dir = dir.join("repo");
    match &report.repository {
        Some(repo) => repo.export(&repo_dir),
        None => Repository::<f64>::new(1, 1, 0.0).export(&repo_dir),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Energy,
    Noise,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::Energy => "energy",
            SweepParameter::Noise => "noise",
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(SweepParameter::Energy),
            "noise" => Ok(SweepParameter::Noise),
            other => Err(Error::config(
                "param",
                format!("expected energy or noise, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub value: f64,
    pub report: RunReport,
}

/// One sub-run per value and per mode (fct and the baseline), all with the
/// configured seed. Sub-runs execute in parallel.
pub fn sensitivity_sweep(
    config: &RunConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Vec<SweepRun>> {
    if values.is_empty() {
        return Err(Error::config("values", "sweep needs at least one value"));
    }
    let mut configs = Vec::new();
    for &value in values {
        for mode in [Mode::Fct, Mode::Cbdt] {
            let mut c = config.clone();
            match parameter {
                SweepParameter::Energy => c.learner.energy_threshold = value,
                SweepParameter::Noise => c.noise = value,
            }
            c.learner.mode = mode;
            c.validate()?;
            configs.push((value, c));
        }
    }
    let results: Vec<Result<SweepRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(value, c)| {
                scope.spawn(move || {
                    execute(c).map(|report| SweepRun {
                        value: *value,
                        report,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    results.into_iter().collect()
}

/// Writes every sub-run under `<param>_<value>/<mode>/` plus `sweep.csv`
/// (per-window trajectories) and `sweep_summary.csv`.
pub fn emit_sweep(parameter: SweepParameter, runs: &[SweepRun], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = parameter.as_str();
    let mut trajectories = format!("{name},mode,window_end,windowed_acc,overall_acc\n");
    let mut summary = format!(
        "{name},mode,overall_acc,average_forest_bytes,average_repo_bytes,detected_drifts,repository_inserts\n"
    );
    for run in runs {
        let sub = dir
            .join(format!("{name}_{}", run.value))
            .join(run.report.mode.as_str());
        emit_metrics(&run.report, &sub)?;
        push_plot_rows(&mut trajectories, &format!("{},", run.value), &run.report);
        let _ = writeln!(
            summary,
            "{},{},{},{:.1},{:.1},{},{}",
            run.value,
            run.report.mode.as_str(),
            fmt_acc(run.report.overall_accuracy()),
            run.report.average_forest_bytes(),
            run.report.average_repo_bytes(),
            run.report.drifts.len(),
            run.report.inserts
        );
    }
    write_file(&dir.join("sweep.csv"), &trajectories)?;
    write_file(&dir.join("sweep_summary.csv"), &summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> RunConfig {
        let mut c = RunConfig {
            segments: Some("8,9.5x2@2500".into()),
            ..RunConfig::default()
        };
        c.learner.mode = mode;
        c.seed = 3;
        c
    }

    #[test]
    fn segment_spec_grammar() {
        let d = Dataset::Sea.default_segments();
        let s = SegmentSpec::parse("8,7,9,9.5x25@5000", &d).unwrap();
        assert_eq!(s.params, vec![8.0, 7.0, 9.0, 9.5]);
        assert_eq!((s.recurrences, s.length), (25, 5000));
        let s = SegmentSpec::parse("8,9", &d).unwrap();
        assert_eq!((s.recurrences, s.length), (25, 5000));
        let s = SegmentSpec::parse("x5@100", &d).unwrap();
        assert_eq!(s.params, d.params);
        assert_eq!((s.recurrences, s.length), (5, 100));
        for bad in ["8,a", "8x0", "8@0", "8@-1"] {
            assert!(SegmentSpec::parse(bad, &d).is_err(), "{bad}");
        }
    }

    #[test]
    fn rbf_parameters_must_be_integers() {
        let c = RunConfig {
            dataset: Dataset::Rbf,
            segments: Some("5.5,15".into()),
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "segments"));
    }

    #[test]
    fn config_text_and_errors() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nenergy = 0.8\nmode=cbdt\n\nrepo-cap=7\n")
            .unwrap();
        assert_eq!(c.learner.energy_threshold, 0.8);
        assert_eq!(c.learner.mode, Mode::Cbdt);
        assert_eq!(c.learner.repository_capacity, 7);

        let err = c.apply_text("bogus=1").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "bogus"));
        let err = c.apply_text("delay=soon").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "delay"));

        c.set("energy", "1.5").unwrap();
        let err = c.validate().unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "energy"));
        assert!(err.to_string().contains("(0, 1]"));
    }

    #[test]
    fn file_dataset_needs_path() {
        let c = RunConfig {
            dataset: Dataset::File,
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "file"));
    }

    #[test]
    fn ten_thousand_instances_give_ten_rows() {
        let mut c = small(Mode::Fct);
        c.segments = Some("8,9.5x1@5000".into());
        let r = execute(&c).unwrap();
        assert_eq!(r.len(), 10_000);
        let csv = metrics_csv(&r);
        assert_eq!(csv.lines().count(), 11);
        assert_eq!(csv.lines().next().unwrap(), METRICS_HEADER);
        assert_eq!(r.scored(), 10_000 - c.learner.label_delay);
        assert_eq!(r.true_boundaries(), &[0, 5_000]);
        assert!(r.throughput() > 0.0);
    }

    #[test]
    fn partial_final_window_gets_a_row() {
        let mut c = small(Mode::Fct);
        c.segments = Some("8x1@2500".into());
        let r = execute(&c).unwrap();
        let ends: Vec<u64> = r.windows().iter().map(|w| w.window_end).collect();
        assert_eq!(ends, vec![1000, 2000, 2500]);
    }

    #[test]
    fn empty_report_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let r = execute_instances(&FctConfig::default(), 2, Vec::new()).unwrap();
        emit_metrics(&r, dir.path()).unwrap();
        let m = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
        assert_eq!(m, format!("{METRICS_HEADER}\n"));
        let d = fs::read_to_string(dir.path().join("drifts.csv")).unwrap();
        assert_eq!(d, "position,true_boundary\n");
        assert!(dir.path().join("repo/index.csv").exists());
    }

    #[test]
    fn identical_seeds_identical_metrics() {
        let a = metrics_csv(&execute(&small(Mode::Fct)).unwrap());
        let b = metrics_csv(&execute(&small(Mode::Fct)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn baseline_keeps_repository_empty() {
        let r = execute(&small(Mode::Cbdt)).unwrap();
        assert_eq!(r.repository().unwrap().len(), 0);
        assert!(r.windows().iter().all(|w| w.repo_bytes == 0));
    }

    #[test]
    fn single_value_sweep_matches_plain_run() {
        let c = small(Mode::Fct);
        let runs = sensitivity_sweep(&c, SweepParameter::Energy, &[0.95]).unwrap();
        assert_eq!(runs.len(), 2);
        let plain = execute(&c).unwrap();
        let fct = runs.iter().find(|r| r.report.mode() == Mode::Fct).unwrap();
        assert_eq!(metrics_csv(&fct.report), metrics_csv(&plain));
    }

    #[test]
    fn sweep_writes_combined_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small(Mode::Fct);
        c.segments = Some("8x1@1500".into());
        let runs = sensitivity_sweep(&c, SweepParameter::Noise, &[0.1, 0.3]).unwrap();
        emit_sweep(SweepParameter::Noise, &runs, dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
        assert!(csv.starts_with("noise,mode,window_end"));
        // 2 values x 2 modes x 2 windows
        assert_eq!(csv.lines().count(), 1 + 8);
        assert!(dir.path().join("noise_0.3/cbdt/metrics.csv").exists());
        let bad = sensitivity_sweep(&c, SweepParameter::Energy, &[0.0]);
        assert!(matches!(bad, Err(Error::Config { key, .. }) if key == "energy"));
    }
}
