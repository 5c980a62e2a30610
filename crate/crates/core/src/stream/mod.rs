//! Labeled instance streams: synthetic recurring-concept generators and
//! delimited-file ingestion, both reduced to binary features.

mod binarize;
mod file;
mod generators;

pub use binarize::{AttributeCoding, BinarizedStream, Binarizer};
pub use file::{file_stream, FileOptions, FileStream};
pub use generators::{
    hyperplane_raw, hyperplane_stream, rbf_raw, rbf_stream, sea_label, sea_raw, sea_stream,
    GeneratedStream, HyperplaneConcept, RawStream, RbfConcept, SeaConcept,
};

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Default number of leading instances used to calibrate the binarizer.
pub const DEFAULT_CALIBRATION_LEN: usize = 1_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    attribute_names: Vec<String>,
    class_labels: [String; 2],
}

impl Schema {
    pub fn new(attribute_names: Vec<String>, class_labels: [String; 2]) -> Result<Self> {
        if attribute_names.is_empty() {
            return Err(Error::Schema("schema needs at least one attribute".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &attribute_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute name `{name}`")));
            }
        }
        if class_labels[0] == class_labels[1] {
            return Err(Error::Schema("class labels must differ".into()));
        }
        Ok(Schema {
            attribute_names,
            class_labels,
        })
    }

    /// Schema with attributes `x1..xd` and classes `class1`/`class2`.
    pub fn anonymous(d: usize) -> Result<Self> {
        Self::new(
            (1..=d).map(|i| format!("x{i}")).collect(),
            ["class1".to_string(), "class2".to_string()],
        )
    }

    /// Attribute count `d`.
    pub fn dim(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    /// `class_labels[0]` is class1 (f = 1), `class_labels[1]` is class2 (f = 0).
    pub fn class_labels(&self) -> &[String; 2] {
        &self.class_labels
    }
}

/// One binary stream record. `label` is f(x): 1 for class1, 0 for class2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub features: BitVector,
    pub label: u8,
    pub index: u64,
}

impl Instance {
    pub fn new(features: BitVector, label: u8, index: u64) -> Self {
        debug_assert!(label <= 1);
        Instance {
            features,
            label,
            index,
        }
    }
}

/// Numeric record produced by a generator before binarization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub values: Vec<f64>,
    pub label: u8,
    /// Label before noise was applied.
    pub clean_label: u8,
    pub index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConceptParams {
    Sea { threshold: f64 },
    Rbf { centroids: usize },
    Hyperplane { drifting_attributes: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub concept_id: usize,
    pub params: ConceptParams,
    pub length: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptSchedule {
    pub segments: Vec<Segment>,
    pub noise: f64,
}

impl ConceptSchedule {
    /// Cycles `concepts` in order `recurrences` times, every segment `length`
    /// long. Each segment (every reappearance included) gets its own seed.
    pub fn recurring(
        concepts: &[ConceptParams],
        recurrences: usize,
        length: usize,
        noise: f64,
        seed: u64,
    ) -> Self {
        let mut segments = Vec::with_capacity(concepts.len() * recurrences);
        for _ in 0..recurrences {
            for (concept_id, params) in concepts.iter().enumerate() {
                let n = segments.len() as u64;
                segments.push(Segment {
                    concept_id,
                    params: *params,
                    length,
                    seed: mix_seed(seed, n),
                });
            }
        }
        ConceptSchedule { segments, noise }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidSchedule("schedule has no segments".into()));
        }
        if let Some(s) = self.segments.iter().position(|s| s.length == 0) {
            return Err(Error::InvalidSchedule(format!("segment {s} has length 0")));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::InvalidSchedule(format!(
                "noise probability {} outside [0, 1]",
                self.noise
            )));
        }
        Ok(())
    }

    pub fn total_len(&self) -> usize {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Ground-truth concept starts: one per segment, the first at 0.
    pub fn boundaries(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.segments.len());
        let mut acc = 0u64;
        for s in &self.segments {
            out.push(acc);
            acc += s.length as u64;
        }
        out
    }

    /// Segment index covering stream position `index`.
    pub fn segment_at(&self, index: u64) -> Option<usize> {
        let mut acc = 0u64;
        for (i, s) in self.segments.iter().enumerate() {
            acc += s.length as u64;
            if index < acc {
                return Some(i);
            }
        }
        None
    }
}

/// SplitMix64 step; derives independent per-segment seeds.
pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed.wrapping_add(salt.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
