use std::collections::VecDeque;

use super::{Instance, RawInstance, Schema};
use crate::bits::BitVector;
use crate::error::{Error, Result};

/// How one raw attribute maps onto binary features.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeCoding {
    /// Attribute is already 0/1; one bit, set iff the value is above 0.5.
    Binary,
    /// `bits`-bit code of the number of thresholds the value exceeds.
    Quantile { thresholds: Vec<f64>, bits: u32 },
}

impl AttributeCoding {
    pub fn width(&self) -> usize {
        match self {
            AttributeCoding::Binary => 1,
            AttributeCoding::Quantile { bits, .. } => *bits as usize,
        }
    }

    /// Unsigned code for `value`; monotone non-decreasing in `value`.
    pub fn code(&self, value: f64) -> u64 {
        match self {
            AttributeCoding::Binary => u64::from(value > 0.5),
            AttributeCoding::Quantile { thresholds, .. } => {
                thresholds.partition_point(|&t| value > t) as u64
            }
        }
    }
}

/// Equal-frequency quantile binarizer fitted on a calibration window.
#[derive(Debug, Clone, PartialEq)]
pub struct Binarizer {
    codings: Vec<AttributeCoding>,
    schema: Schema,
}

impl Binarizer {
    pub fn fit(
        calibration: &[Vec<f64>],
        attribute_names: &[String],
        class_labels: [String; 2],
        bits_per_attribute: u32,
    ) -> Result<Self> {
        if calibration.is_empty() {
            return Err(Error::InvalidParams("empty calibration window".into()));
        }
        if bits_per_attribute == 0 || bits_per_attribute > 16 {
            return Err(Error::InvalidParams(format!(
                "bits per attribute must be in 1..=16, got {bits_per_attribute}"
            )));
        }
        let dim = attribute_names.len();
        if let Some(row) = calibration.iter().find(|r| r.len() != dim) {
            return Err(Error::Schema(format!(
                "calibration row has {} values, expected {dim}",
                row.len()
            )));
        }
        let codings = (0..dim)
            .map(|a| {
                let column: Vec<f64> = calibration.iter().map(|r| r[a]).collect();
                fit_attribute(&attribute_names[a], column, bits_per_attribute)
            })
            .collect();
        Self::from_codings(codings, attribute_names, class_labels)
    }

    pub fn from_codings(
        codings: Vec<AttributeCoding>,
        attribute_names: &[String],
        class_labels: [String; 2],
    ) -> Result<Self> {
        let mut names = Vec::new();
        for (coding, name) in codings.iter().zip(attribute_names) {
            match coding {
                AttributeCoding::Binary => names.push(name.clone()),
                AttributeCoding::Quantile { bits, .. } => {
                    for k in (0..*bits).rev() {
                        names.push(format!("{name}.b{k}"));
                    }
                }
            }
        }
        let schema = Schema::new(names, class_labels)?;
        Ok(Binarizer { codings, schema })
    }

    pub fn codings(&self) -> &[AttributeCoding] {
        &self.codings
    }

    /// Binary schema: `Σ width_i` attributes.
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn encode(&self, values: &[f64]) -> BitVector {
        debug_assert_eq!(values.len(), self.codings.len());
        let mut out = BitVector::zeros(self.schema.dim());
        let mut pos = 0;
        for (coding, &v) in self.codings.iter().zip(values) {
            let width = coding.width();
            let code = coding.code(v);
            for k in 0..width {
                // most significant bit first
                out.set(pos + k, (code >> (width - 1 - k)) & 1 == 1);
            }
            pos += width;
        }
        out
    }
}

fn fit_attribute(name: &str, mut column: Vec<f64>, bits: u32) -> AttributeCoding {
    if column.iter().all(|&v| v == 0.0 || v == 1.0) {
        return AttributeCoding::Binary;
    }
    column.sort_by(f64::total_cmp);
    let first = column[0];
    if column.iter().all(|&v| v == first) {
        log::warn!("attribute `{name}` is constant in the calibration window; coding degenerates");
        return AttributeCoding::Quantile {
            thresholds: vec![first],
            bits,
        };
    }
    let levels = 1usize << bits;
    let thresholds = (1..levels)
        .map(|k| quantile(&column, k as f64 / levels as f64))
        .collect();
    AttributeCoding::Quantile { thresholds, bits }
}

/// Linear-interpolated quantile of a sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Adapter that calibrates a [`Binarizer`] on the leading window of a raw
/// stream and then yields binary instances for the whole stream.
pub struct BinarizedStream<I> {
    inner: I,
    buffered: VecDeque<RawInstance>,
    binarizer: Binarizer,
}

impl<I: Iterator<Item = RawInstance>> BinarizedStream<I> {
    pub fn new(
        mut inner: I,
        attribute_names: Vec<String>,
        calibration_len: usize,
        bits_per_attribute: u32,
    ) -> Result<Self> {
        let buffered: VecDeque<RawInstance> = inner.by_ref().take(calibration_len.max(1)).collect();
        let classes = ["class1".to_string(), "class2".to_string()];
        let binarizer = if buffered.is_empty() {
            let codings = vec![AttributeCoding::Binary; attribute_names.len()];
            Binarizer::from_codings(codings, &attribute_names, classes)?
        } else {
            let rows: Vec<Vec<f64>> = buffered.iter().map(|r| r.values.clone()).collect();
            Binarizer::fit(&rows, &attribute_names, classes, bits_per_attribute)?
        };
        Ok(BinarizedStream {
            inner,
            buffered,
            binarizer,
        })
    }

    pub fn binarizer(&self) -> &Binarizer {
        &self.binarizer
    }

    pub fn schema(&self) -> &Schema {
        self.binarizer.schema()
    }

    pub fn inner(&self) -> &I {
        &self.inner
    }
}

impl<I: Iterator<Item = RawInstance>> Iterator for BinarizedStream<I> {
    type Item = Instance;

    fn next(&mut self) -> Option<Instance> {
        let raw = match self.buffered.pop_front() {
            Some(r) => r,
            None => self.inner.next()?,
        };
        Some(Instance::new(
            self.binarizer.encode(&raw.values),
            raw.label,
            raw.index,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("a{i}")).collect()
    }

    fn classes() -> [String; 2] {
        ["c1".into(), "c2".into()]
    }

    #[test]
    fn one_bit_is_a_median_split() {
        let cal: Vec<Vec<f64>> = [1.0, 2.0, 3.0, 4.0].iter().map(|&v| vec![v]).collect();
        let b = Binarizer::fit(&cal, &names(1), classes(), 1).unwrap();
        match &b.codings()[0] {
            AttributeCoding::Quantile { thresholds, .. } => assert_eq!(thresholds, &vec![2.5]),
            other => panic!("unexpected coding {other:?}"),
        }
        assert!(!b.encode(&[1.0]).get(0));
        assert!(b.encode(&[4.0]).get(0));
    }

    #[test]
    fn binary_attribute_passes_through() {
        let cal = vec![vec![0.0, 3.0], vec![1.0, 5.0], vec![1.0, 7.0]];
        let b = Binarizer::fit(&cal, &names(2), classes(), 2).unwrap();
        assert_eq!(b.codings()[0], AttributeCoding::Binary);
        assert_eq!(b.schema().dim(), 1 + 2);
        assert!(b.encode(&[1.0, 0.0]).get(0));
        assert!(!b.encode(&[0.0, 0.0]).get(0));
    }

    #[test]
    fn two_bit_uniform_codes() {
        // sorted calibration sample on [0, 1]
        let n = 10_001;
        let cal: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect();
        let b = Binarizer::fit(&cal, &names(1), classes(), 2).unwrap();
        let AttributeCoding::Quantile { thresholds, .. } = &b.codings()[0] else {
            panic!()
        };
        for (t, want) in thresholds.iter().zip([0.25, 0.5, 0.75]) {
            assert!((t - want).abs() < 1e-3, "{t} vs {want}");
        }
        assert_eq!(b.encode(&[0.6]).to_string(), "10");
        assert_eq!(b.encode(&[0.1]).to_string(), "00");
        assert_eq!(b.encode(&[0.9]).to_string(), "11");
    }

    #[test]
    fn constant_attribute_degenerates() {
        let cal = vec![vec![2.0]; 10];
        let b = Binarizer::fit(&cal, &names(1), classes(), 2).unwrap();
        assert_eq!(b.encode(&[2.0]).to_string(), "00");
        assert_eq!(b.schema().dim(), 2);
    }

    #[test]
    fn empty_calibration_rejected() {
        assert!(Binarizer::fit(&[], &names(1), classes(), 1).is_err());
    }

    proptest! {
        #[test]
        fn codes_are_monotone(seed in any::<u64>(), bits in 1u32..5, v1 in -1.0f64..12.0, v2 in -1.0f64..12.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cal: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random_range(0.0..10.0)]).collect();
            let b = Binarizer::fit(&cal, &names(1), classes(), bits).unwrap();
            let (lo, hi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
            prop_assert!(b.codings()[0].code(lo) <= b.codings()[0].code(hi));
            let bits_of = |v: f64| {
                let e = b.encode(&[v]);
                e.iter().fold(0u64, |acc, bit| (acc << 1) | u64::from(bit))
            };
            prop_assert!(bits_of(lo) <= bits_of(hi));
        }
    }
}
