use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::binarize::BinarizedStream;
use super::{ConceptParams, ConceptSchedule, RawInstance, Segment};
use crate::error::{Error, Result};

const SEA_ATTRIBUTES: usize = 3;
const RBF_ATTRIBUTES: usize = 10;
const HYPERPLANE_ATTRIBUTES: usize = 10;

/// Binarized generator output.
pub type GeneratedStream = BinarizedStream<RawStream>;

/// Pre-noise SEA label: 1 iff `feature1 + feature2 > threshold`.
pub fn sea_label(values: &[f64], threshold: f64) -> u8 {
    u8::from(values[0] + values[1] > threshold)
}

/// A concept draws one raw point and its pre-noise label.
trait Concept: Send {
    fn sample(&mut self, rng: &mut ChaCha8Rng) -> (Vec<f64>, u8);
}

#[derive(Debug, Clone)]
pub struct SeaConcept {
    pub threshold: f64,
}

impl Concept for SeaConcept {
    fn sample(&mut self, rng: &mut ChaCha8Rng) -> (Vec<f64>, u8) {
        let values: Vec<f64> = (0..SEA_ATTRIBUTES)
            .map(|_| rng.random_range(0.0..10.0))
            .collect();
        let label = sea_label(&values, self.threshold);
        (values, label)
    }
}

#[derive(Debug, Clone)]
struct Centroid {
    centre: Vec<f64>,
    label: u8,
    std_dev: f64,
}

/// Random radial-basis-function concept: weighted centroids with a class label
/// and spread each.
#[derive(Debug, Clone)]
pub struct RbfConcept {
    centroids: Vec<Centroid>,
    cumulative_weights: Vec<f64>,
}

impl RbfConcept {
    pub fn random(count: usize, dim: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidParams(format!(
                "rbf needs at least 2 centroids, got {count}"
            )));
        }
        let mut centroids = Vec::with_capacity(count);
        let mut cumulative_weights = Vec::with_capacity(count);
        let mut total = 0.0;
        for _ in 0..count {
            let centre = (0..dim).map(|_| rng.random::<f64>()).collect();
            let label = u8::from(rng.random::<bool>());
            let std_dev = rng.random::<f64>();
            total += rng.random::<f64>();
            centroids.push(Centroid {
                centre,
                label,
                std_dev,
            });
            cumulative_weights.push(total);
        }
        // both classes must be reachable
        if centroids.iter().all(|c| c.label == centroids[0].label) {
            let last = centroids.len() - 1;
            centroids[last].label ^= 1;
        }
        Ok(RbfConcept {
            centroids,
            cumulative_weights,
        })
    }

    pub fn centroid_count(&self) -> usize {
        self.centroids.len()
    }
}

impl Concept for RbfConcept {
    fn sample(&mut self, rng: &mut ChaCha8Rng) -> (Vec<f64>, u8) {
        let total = *self.cumulative_weights.last().unwrap();
        let pick = rng.random::<f64>() * total;
        let k = self
            .cumulative_weights
            .partition_point(|&w| w <= pick)
            .min(self.centroids.len() - 1);
        let c = &self.centroids[k];
        let mut direction: Vec<f64> = (0..c.centre.len())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = direction
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let magnitude = rng.sample::<f64, _>(StandardNormal) * c.std_dev;
        for (v, centre) in direction.iter_mut().zip(&c.centre) {
            *v = centre + *v / norm * magnitude;
        }
        (direction, c.label)
    }
}

/// Rotating hyperplane: label 1 iff `Σ w_i x_i >= ½ Σ w_i`; the first
/// `drifting` weights move by `mag_change` per instance, reversing direction
/// with probability `sigma_reverse`.
#[derive(Debug, Clone)]
pub struct HyperplaneConcept {
    weights: Vec<f64>,
    directions: Vec<f64>,
    drifting: usize,
    pub mag_change: f64,
    pub sigma_reverse: f64,
}

impl HyperplaneConcept {
    pub const DEFAULT_MAG_CHANGE: f64 = 0.001;
    pub const DEFAULT_SIGMA_REVERSE: f64 = 0.1;

    pub fn random(drifting: usize, dim: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        let weights = (0..dim).map(|_| rng.random::<f64>()).collect();
        let directions = (0..dim)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Self::with_weights(weights, directions, drifting)
    }

    pub fn with_weights(weights: Vec<f64>, directions: Vec<f64>, drifting: usize) -> Result<Self> {
        if drifting > weights.len() {
            return Err(Error::InvalidParams(format!(
                "{drifting} drifting attributes exceed dimension {}",
                weights.len()
            )));
        }
        Ok(HyperplaneConcept {
            weights,
            directions,
            drifting,
            mag_change: Self::DEFAULT_MAG_CHANGE,
            sigma_reverse: Self::DEFAULT_SIGMA_REVERSE,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self, values: &[f64]) -> u8 {
        let sum: f64 = self.weights.iter().zip(values).map(|(w, x)| w * x).sum();
        let half: f64 = self.weights.iter().sum::<f64>() * 0.5;
        u8::from(sum >= half)
    }
}

impl Concept for HyperplaneConcept {
    fn sample(&mut self, rng: &mut ChaCha8Rng) -> (Vec<f64>, u8) {
        let values: Vec<f64> = (0..self.weights.len())
            .map(|_| rng.random::<f64>())
            .collect();
        let label = self.label(&values);
        for i in 0..self.drifting {
            self.weights[i] += self.directions[i] * self.mag_change;
            if rng.random::<f64>() < self.sigma_reverse {
                self.directions[i] = -self.directions[i];
            }
        }
        (values, label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Sea,
    Rbf,
    Hyperplane,
}

impl Kind {
    fn dim(self) -> usize {
        match self {
            Kind::Sea => SEA_ATTRIBUTES,
            Kind::Rbf => RBF_ATTRIBUTES,
            Kind::Hyperplane => HYPERPLANE_ATTRIBUTES,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Sea => "sea",
            Kind::Rbf => "rbf",
            Kind::Hyperplane => "hyperplane",
        }
    }
}

fn build_concept(kind: Kind, seg: &Segment, rng: &mut ChaCha8Rng) -> Result<Box<dyn Concept>> {
    match (kind, seg.params) {
        (Kind::Sea, ConceptParams::Sea { threshold }) => {
            if !(threshold.is_finite() && threshold > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "sea threshold must be positive, got {threshold}"
                )));
            }
            Ok(Box::new(SeaConcept { threshold }))
        }
        (Kind::Rbf, ConceptParams::Rbf { centroids }) => Ok(Box::new(RbfConcept::random(
            centroids,
            RBF_ATTRIBUTES,
            rng,
        )?)),
        (
            Kind::Hyperplane,
            ConceptParams::Hyperplane {
                drifting_attributes,
            },
        ) => Ok(Box::new(HyperplaneConcept::random(
            drifting_attributes,
            HYPERPLANE_ATTRIBUTES,
            rng,
        )?)),
        (kind, params) => Err(Error::InvalidParams(format!(
            "{} generator cannot use parameters {params:?}",
            kind.name()
        ))),
    }
}

/// Numeric records for a schedule, segment by segment, each segment driven by
/// its own seeded RNG.
pub struct RawStream {
    kind: Kind,
    schedule: ConceptSchedule,
    segment: usize,
    remaining: usize,
    concept: Option<Box<dyn Concept>>,
    rng: ChaCha8Rng,
    index: u64,
}

impl RawStream {
    fn new(kind: Kind, schedule: ConceptSchedule) -> Result<Self> {
        schedule.validate()?;
        // fail fast on bad parameters anywhere in the schedule
        for seg in &schedule.segments {
            let mut rng = ChaCha8Rng::seed_from_u64(seg.seed);
            build_concept(kind, seg, &mut rng)?;
        }
        Ok(RawStream {
            kind,
            schedule,
            segment: 0,
            remaining: 0,
            concept: None,
            rng: ChaCha8Rng::seed_from_u64(0),
            index: 0,
        })
    }

    pub fn schedule(&self) -> &ConceptSchedule {
        &self.schedule
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn attribute_names(&self) -> Vec<String> {
        (1..=self.dim()).map(|i| format!("a{i}")).collect()
    }
}

impl Iterator for RawStream {
    type Item = RawInstance;

    fn next(&mut self) -> Option<RawInstance> {
        while self.remaining == 0 {
            let seg = self.schedule.segments.get(self.segment)?;
            self.rng = ChaCha8Rng::seed_from_u64(seg.seed);
            self.concept = Some(
                build_concept(self.kind, seg, &mut self.rng).expect("validated at construction"),
            );
            self.remaining = seg.length;
            self.segment += 1;
        }
        let concept = self.concept.as_mut().expect("concept set");
        let (values, clean_label) = concept.sample(&mut self.rng);
        let flip = self.schedule.noise > 0.0 && self.rng.random::<f64>() < self.schedule.noise;
        let label = if flip { clean_label ^ 1 } else { clean_label };
        self.remaining -= 1;
        let index = self.index;
        self.index += 1;
        Some(RawInstance {
            values,
            label,
            clean_label,
            index,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest: usize = self.schedule.segments[self.segment.min(self.schedule.segments.len())..]
            .iter()
            .map(|s| s.length)
            .sum::<usize>()
            + self.remaining;
        (rest, Some(rest))
    }
}

fn generated(
    kind: Kind,
    schedule: ConceptSchedule,
    calibration_len: usize,
    bits_per_attribute: u32,
) -> Result<GeneratedStream> {
    let raw = RawStream::new(kind, schedule)?;
    let names = raw.attribute_names();
    BinarizedStream::new(raw, names, calibration_len, bits_per_attribute)
}

/// SEA concepts: three attributes uniform on `[0, 10]`, label
/// `feature1 + feature2 > threshold`.
pub fn sea_raw(schedule: ConceptSchedule) -> Result<RawStream> {
    RawStream::new(Kind::Sea, schedule)
}

pub fn sea_stream(
    schedule: ConceptSchedule,
    calibration_len: usize,
    bits_per_attribute: u32,
) -> Result<GeneratedStream> {
    generated(Kind::Sea, schedule, calibration_len, bits_per_attribute)
}

pub fn rbf_raw(schedule: ConceptSchedule) -> Result<RawStream> {
    RawStream::new(Kind::Rbf, schedule)
}

/// Random RBF concepts over ten attributes; the centroid count is kept across
/// reappearances and everything else is re-seeded.
pub fn rbf_stream(
    schedule: ConceptSchedule,
    calibration_len: usize,
    bits_per_attribute: u32,
) -> Result<GeneratedStream> {
    generated(Kind::Rbf, schedule, calibration_len, bits_per_attribute)
}

pub fn hyperplane_raw(schedule: ConceptSchedule) -> Result<RawStream> {
    RawStream::new(Kind::Hyperplane, schedule)
}

/// Rotating hyperplane concepts over ten attributes in `[0, 1]`.
pub fn hyperplane_stream(
    schedule: ConceptSchedule,
    calibration_len: usize,
    bits_per_attribute: u32,
) -> Result<GeneratedStream> {
    generated(
        Kind::Hyperplane,
        schedule,
        calibration_len,
        bits_per_attribute,
    )
}
