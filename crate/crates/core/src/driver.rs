//! Recurring-concept driver.
//!
//! The current winner (a forest tree, or a repository spectrum) classifies
//! every arriving instance. Labels arrive `label_delay` instances later; on
//! arrival the stored prediction is scored, ADWIN receives the error bit, the
//! forest and repository estimators are updated and the forest trains. When
//! ADWIN signals a change:
//!
//! * at the first change the best forest tree is converted to a spectrum and
//!   stored;
//! * later, if the winner came from the forest and the best tree beats the best
//!   stored spectrum by more than the tie threshold, the best tree is converted
//!   and stored unless an equal spectrum is already present;
//! * the new winner is the most accurate of the best tree and the best stored
//!   spectrum. ADWIN restarts when the winner changes and otherwise keeps
//!   its post-cut window.

use std::collections::VecDeque;
use std::fmt;
use std::time::Instant;

use crate::adwin::{Adwin, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig};
use crate::harness::{RunReport, WindowSnapshot, METRICS_WINDOW};
use crate::repository::{self, InsertOutcome, Repository};
use crate::spectrum::dft;
use crate::stream::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Forest plus spectrum repository.
    Fct,
    /// Forest only; the repository is never used.
    Cbdt,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Fct => "fct",
            Mode::Cbdt => "cbdt",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fct" => Ok(Mode::Fct),
            "cbdt" | "cbdt-baseline" => Ok(Mode::Cbdt),
            other => Err(Error::config(
                "mode",
                format!("expected fct or cbdt, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FctConfig {
    pub energy_threshold: f64,
    /// Accuracy margin the best tree needs over the best spectrum before it is
    /// converted.
    pub tie_threshold: f64,
    pub repository_capacity: usize,
    pub equality_tolerance: f64,
    pub adwin_delta: f64,
    pub label_delay: usize,
    pub mode: Mode,
    /// Tree parameters, node budget and the shared accuracy window.
    pub forest: ForestConfig,
}

impl Default for FctConfig {
    fn default() -> Self {
        FctConfig {
            energy_threshold: 0.95,
            tie_threshold: 0.01,
            repository_capacity: repository::DEFAULT_CAPACITY,
            equality_tolerance: repository::DEFAULT_EQUALITY_TOLERANCE,
            adwin_delta: DEFAULT_DELTA,
            label_delay: 200,
            mode: Mode::Fct,
            forest: ForestConfig::default(),
        }
    }
}

impl FctConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_threshold > 0.0 && self.energy_threshold <= 1.0) {
            return Err(Error::config(
                "energy",
                format!(
                    "energy threshold must be in (0, 1], got {}",
                    self.energy_threshold
                ),
            ));
        }
        if self.tie_threshold.is_nan() || self.tie_threshold < 0.0 {
            return Err(Error::config(
                "tau",
                format!("tie threshold must be >= 0, got {}", self.tie_threshold),
            ));
        }
        if self.repository_capacity == 0 {
            return Err(Error::config(
                "repo-cap",
                "repository capacity must be positive",
            ));
        }
        if !(self.adwin_delta > 0.0 && self.adwin_delta < 1.0) {
            return Err(Error::config(
                "adwin-delta",
                format!("delta must be in (0, 1), got {}", self.adwin_delta),
            ));
        }
        if self.forest.accuracy_window == 0 {
            return Err(Error::config("accuracy-window", "window must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WinnerSource {
    Forest,
    Repository,
}

impl fmt::Display for WinnerSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WinnerSource::Forest => "forest",
            WinnerSource::Repository => "repository",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinnerRef {
    pub source: WinnerSource,
    /// Tree index or repository entry id.
    pub id: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinnerSwitch {
    pub position: u64,
    pub winner: WinnerRef,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub prediction: u8,
    /// `(index, correct)` of the instance whose label arrived this step.
    pub scored: Option<(u64, bool)>,
    pub drift: bool,
}

/// Driver state for one stream.
#[derive(Debug, Clone)]
pub struct FctLearner {
    config: FctConfig,
    forest: Forest,
    repository: Repository<f64>,
    adwin: Adwin,
    winner: WinnerRef,
    pending: VecDeque<(Instance, u8)>,
    drift_count: u64,
    drifts: Vec<u64>,
    switches: Vec<WinnerSwitch>,
    insert_positions: Vec<u64>,
}

impl FctLearner {
    pub fn new(dim: usize, config: FctConfig, calibration: &[Instance]) -> Result<Self> {
        config.validate()?;
        if dim == 0 {
            return Err(Error::Schema("stream has no attributes".into()));
        }
        let forest = Forest::new(dim, config.forest, calibration);
        Ok(FctLearner {
            forest,
            repository: Repository::new(
                config.repository_capacity,
                config.forest.accuracy_window,
                config.equality_tolerance,
            ),
            adwin: Adwin::new(config.adwin_delta),
            winner: WinnerRef {
                source: WinnerSource::Forest,
                id: 0,
                accuracy: 0.0,
            },
            pending: VecDeque::with_capacity(config.label_delay + 1),
            drift_count: 0,
            drifts: Vec::new(),
            switches: Vec::new(),
            insert_positions: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &FctConfig {
        &self.config
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn repository(&self) -> &Repository<f64> {
        &self.repository
    }

    pub fn adwin(&self) -> &Adwin {
        &self.adwin
    }

    pub fn winner(&self) -> WinnerRef {
        self.winner
    }

    /// Positions (arrival index of the triggering step) of detected changes.
    pub fn drifts(&self) -> &[u64] {
        &self.drifts
    }

    pub fn switches(&self) -> &[WinnerSwitch] {
        &self.switches
    }

    /// Positions at which a spectrum was stored.
    pub fn insert_positions(&self) -> &[u64] {
        &self.insert_positions
    }

    pub fn classify(&self, inst: &Instance) -> u8 {
        match self.winner.source {
            WinnerSource::Forest => self
                .forest
                .tree(self.winner.id as usize)
                .classify(&inst.features),
            WinnerSource::Repository => self
                .repository
                .get(self.winner.id)
                .expect("winning entry is live")
                .classify(&inst.features),
        }
    }

    pub fn step(&mut self, inst: Instance) -> StepOutcome {
        let position = inst.index;
        let prediction = self.classify(&inst);
        self.pending.push_back((inst, prediction));
        if self.pending.len() <= self.config.label_delay {
            return StepOutcome {
                prediction,
                scored: None,
                drift: false,
            };
        }
        let (labeled, predicted) = self.pending.pop_front().expect("pending non-empty");
        let correct = predicted == labeled.label;
        let drift = self.adwin.add(!correct);
        self.forest.train(&labeled);
        if self.config.mode == Mode::Fct {
            self.repository.observe(&labeled);
        }
        if drift {
            self.on_drift(position);
        }
        StepOutcome {
            prediction,
            scored: Some((labeled.index, correct)),
            drift,
        }
    }

    fn on_drift(&mut self, position: u64) {
        self.drifts.push(position);
        let first = self.drift_count == 0;
        self.drift_count += 1;
        let Ok((tree_id, tree_acc)) = self.forest.best_tree() else {
            return;
        };

        if self.config.mode == Mode::Fct {
            let repo_acc = self
                .repository
                .best()
                .map_or(f64::NEG_INFINITY, |(_, acc)| acc);
            let convert = first
                || (self.winner.source == WinnerSource::Forest
                    && tree_acc - repo_acc > self.config.tie_threshold);
            if convert {
                let spectrum = dft(self.forest.tree(tree_id), &self.config.energy_threshold)
                    .expect("validated threshold and non-empty tree");
                if let Ok(InsertOutcome::Inserted { .. }) = self.repository.insert(spectrum) {
                    self.insert_positions.push(position);
                }
            }
        }

        let mut winner = WinnerRef {
            source: WinnerSource::Forest,
            id: tree_id as u64,
            accuracy: tree_acc,
        };
        if self.config.mode == Mode::Fct {
            if let Some((entry, acc)) = self.repository.best() {
                if acc > tree_acc {
                    winner = WinnerRef {
                        source: WinnerSource::Repository,
                        id: entry.id(),
                        accuracy: acc,
                    };
                }
            }
            if winner.source == WinnerSource::Repository {
                self.repository.record_win(winner.id);
            }
        }
        log::debug!(
            "drift at {position}: best tree {tree_id} acc {tree_acc:.4}, repository size {}, winner {} {} acc {:.4}",
            self.repository.len(),
            winner.source,
            winner.id,
            winner.accuracy
        );
        if winner.source != self.winner.source || winner.id != self.winner.id {
            self.switches.push(WinnerSwitch { position, winner });
            self.adwin.reset();
        }
        self.winner = winner;
    }
}

/// Runs the driver over `stream` (instances over `dim` attributes) and
/// collects the report. When the forest must choose root attributes, the
/// first `calibration_len` instances rank them.
pub fn run(
    config: &FctConfig,
    dim: usize,
    stream: impl IntoIterator<Item = Instance>,
    calibration_len: usize,
) -> Result<RunReport> {
    let mut stream = stream.into_iter().peekable();
    let mut head: Vec<Instance> = Vec::new();
    if dim > config.forest.tree_cap {
        while head.len() < calibration_len {
            match stream.next() {
                Some(i) => head.push(i),
                None => break,
            }
        }
    }
    let mut learner = FctLearner::new(dim, *config, &head)?;
    let mut report = RunReport::new(config.mode);
    let started = Instant::now();
    for (position, mut inst) in head.into_iter().chain(stream).enumerate() {
        if inst.features.len() != dim {
            return Err(Error::Schema(format!(
                "instance {position} has {} features, expected {dim}",
                inst.features.len()
            )));
        }
        inst.index = position as u64;
        let label = inst.label;
        let out = learner.step(inst);
        report.record_prediction(out.prediction, label);
        if let Some((scored, correct)) = out.scored {
            report.record_score(scored, correct);
        }
        let n = report.len();
        if n.is_multiple_of(METRICS_WINDOW) {
            report.push_snapshot(WindowSnapshot {
                window_end: n as u64,
                forest_bytes: learner.forest().memory_bytes(),
                repo_bytes: learner.repository().memory_bytes(),
                winner: learner.winner(),
            });
        }
    }
    let elapsed = started.elapsed();
    let n = report.len();
    if !n.is_multiple_of(METRICS_WINDOW) {
        report.push_snapshot(WindowSnapshot {
            window_end: n as u64,
            forest_bytes: learner.forest().memory_bytes(),
            repo_bytes: learner.repository().memory_bytes(),
            winner: learner.winner(),
        });
    }
    report.finish(
        elapsed,
        learner.drifts().to_vec(),
        learner.switches().to_vec(),
        learner.insert_positions().len(),
        learner.repository().clone(),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVector;
    use crate::spectrum::{CoefficientIndex, FourierSpectrum};

    fn inst(bits: &[bool], label: u8, index: u64) -> Instance {
        Instance::new(BitVector::from_bools(bits), label, index)
    }

    fn config(delay: usize, mode: Mode) -> FctConfig {
        FctConfig {
            label_delay: delay,
            mode,
            ..FctConfig::default()
        }
    }

    #[test]
    fn zero_delay_scores_immediately() {
        let mut l = FctLearner::new(2, config(0, Mode::Fct), &[]).unwrap();
        // empty trees predict 0
        let out = l.step(inst(&[false, true], 0, 0));
        assert_eq!(out.prediction, 0);
        assert_eq!(out.scored, Some((0, true)));
        assert_eq!(l.adwin().width(), 1);
        assert_eq!(l.adwin().mean(), 0.0);
        let out = l.step(inst(&[false, true], 1, 1));
        assert_eq!(out.scored, Some((1, false)));
        assert_eq!(l.adwin().mean(), 0.5);
    }

    #[test]
    fn delayed_labels_score_later() {
        let mut l = FctLearner::new(2, config(200, Mode::Fct), &[]).unwrap();
        for i in 0..200 {
            let out = l.step(inst(&[true, false], 1, i));
            assert_eq!(out.scored, None);
        }
        assert_eq!(l.forest().estimator(0).observations(), 0);
        let out = l.step(inst(&[true, false], 1, 200));
        assert_eq!(out.scored.map(|s| s.0), Some(0));
        assert_eq!(l.forest().estimator(0).observations(), 1);
    }

    fn seeded_learner(mode: Mode) -> FctLearner {
        let mut l = FctLearner::new(2, config(0, mode), &[]).unwrap();
        for i in 0..20 {
            l.step(inst(&[i % 2 == 0, false], u8::from(i % 2 == 0), i));
        }
        l
    }

    #[test]
    fn first_drift_converts_best_tree() {
        let mut l = seeded_learner(Mode::Fct);
        assert!(l.repository().is_empty());
        l.on_drift(20);
        assert_eq!(l.repository().len(), 1);
        assert_eq!(l.insert_positions(), &[20]);
        assert_eq!(l.winner().source, WinnerSource::Forest);
    }

    #[test]
    fn tie_threshold_blocks_conversion() {
        let mut l = seeded_learner(Mode::Fct);
        l.on_drift(20);
        assert_eq!(l.repository().len(), 1);
        // second drift: the stored spectrum is as accurate as the best tree
        let before = l.repository().len();
        for i in 20..40 {
            l.step(inst(&[i % 2 == 0, false], u8::from(i % 2 == 0), i));
        }
        let (_, tree_acc) = l.forest().best_tree().unwrap();
        let (_, repo_acc) = l.repository().best().unwrap();
        assert!(tree_acc - repo_acc <= l.config().tie_threshold);
        l.on_drift(40);
        assert_eq!(l.repository().len(), before);
    }

    #[test]
    fn repository_winner_skips_conversion_and_counts_win() {
        let mut l = seeded_learner(Mode::Fct);
        // a stored spectrum that is always right for this stream
        let perfect = FourierSpectrum::from_coefficients(
            2,
            [
                (CoefficientIndex::zero(), 0.5),
                (CoefficientIndex::new(vec![0]), -0.5),
            ],
        )
        .unwrap();
        l.drift_count = 1;
        l.repository.insert(perfect).unwrap();
        for i in 40..60 {
            l.step(inst(&[i % 2 == 0, false], u8::from(i % 2 == 0), i));
        }
        // force the trees below the spectrum
        let mut forest = l.forest.clone();
        for i in 0..500 {
            forest.train(&inst(&[true, true], u8::from(i % 3 == 0), 1_000 + i));
        }
        l.forest = forest;
        for i in 60..70 {
            l.step(inst(&[i % 2 == 0, false], u8::from(i % 2 == 0), i));
        }
        let (_, repo_acc) = l.repository().best().unwrap();
        let (_, tree_acc) = l.forest().best_tree().unwrap();
        assert!(repo_acc > tree_acc);
        l.on_drift(70);
        assert_eq!(l.winner().source, WinnerSource::Repository);
        assert_eq!(l.repository().entries()[0].winner_tally(), 1);
        // next drift while the winner is a spectrum: no conversion
        let size = l.repository().len();
        l.on_drift(71);
        assert_eq!(l.repository().len(), size);
    }

    #[test]
    fn baseline_never_uses_repository() {
        let mut l = seeded_learner(Mode::Cbdt);
        l.on_drift(20);
        l.on_drift(21);
        assert!(l.repository().is_empty());
        assert_eq!(l.winner().source, WinnerSource::Forest);
    }

    #[test]
    fn invalid_energy_rejected() {
        let c = FctConfig {
            energy_threshold: 1.5,
            ..FctConfig::default()
        };
        match FctLearner::new(2, c, &[]).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "energy"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_stream_gives_empty_report() {
        let r = run(&FctConfig::default(), 3, Vec::new(), 1_000).unwrap();
        assert_eq!(r.len(), 0);
        assert!(r.windows().is_empty());
        assert!(r.drifts().is_empty());
    }
}
