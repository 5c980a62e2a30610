//! ADWIN change detector (exponential-histogram variant).
//!
//! The window is summarised by buckets whose sizes are powers of two, at most
//! `max_buckets + 1` of each size. After every insertion all bucket boundaries
//! are tested as cut points; while some split of the window into an older part
//! `W0` and a newer part `W1` satisfies `|μ0 - μ1| >= ε_cut`, the oldest bucket
//! is dropped.
//!
//! `ε_cut = sqrt(2/m · σ² · ln(2/δ')) + 2/(3m) · ln(2/δ')` where `m` is the
//! harmonic mean `1 / (1/n0 + 1/n1)`, `σ²` the window variance and
//! `δ' = δ / ln(n)`.

use std::collections::VecDeque;

pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_MAX_BUCKETS: usize = 5;
/// Smallest sub-window either side of a tested cut.
pub const MIN_SUBWINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bucket {
    sum: f64,
    sum_sq: f64,
}

#[derive(Debug, Clone)]
pub struct Adwin {
    delta: f64,
    max_buckets: usize,
    /// `rows[k]` holds buckets of `2^k` elements, oldest at the front.
    rows: Vec<VecDeque<Bucket>>,
    width: usize,
    sum: f64,
    sum_sq: f64,
    detections: u64,
}

impl Default for Adwin {
    fn default() -> Self {
        Adwin::new(DEFAULT_DELTA)
    }
}

impl Adwin {
    pub fn new(delta: f64) -> Self {
        Self::with_max_buckets(delta, DEFAULT_MAX_BUCKETS)
    }

    pub fn with_max_buckets(delta: f64, max_buckets: usize) -> Self {
        assert!(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
        assert!(max_buckets >= 2);
        Adwin {
            delta,
            max_buckets,
            rows: Vec::new(),
            width: 0,
            sum: 0.0,
            sum_sq: 0.0,
            detections: 0,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Window mean; 0 for an empty window.
    pub fn mean(&self) -> f64 {
        if self.width == 0 {
            0.0
        } else {
            self.sum / self.width as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.width == 0 {
            return 0.0;
        }
        let n = self.width as f64;
        let mean = self.sum / n;
        (self.sum_sq / n - mean * mean).max(0.0)
    }

    pub fn bucket_count(&self) -> usize {
        self.rows.iter().map(VecDeque::len).sum()
    }

    /// Number of insertions that reported a change since construction/reset.
    pub fn detections(&self) -> u64 {
        self.detections
    }

    pub fn reset(&mut self) {
        self.rows.clear();
        self.width = 0;
        self.sum = 0.0;
        self.sum_sq = 0.0;
        self.detections = 0;
    }

    /// Appends an error bit (1 = misclassified). Returns whether the window
    /// was cut.
    pub fn add(&mut self, error: bool) -> bool {
        self.add_value(if error { 1.0 } else { 0.0 })
    }

    /// Appends a value in `[0, 1]`.
    pub fn add_value(&mut self, value: f64) -> bool {
        debug_assert!((0.0..=1.0).contains(&value));
        self.insert(value);
        let mut cut = false;
        while self.find_cut() {
            self.drop_oldest();
            cut = true;
        }
        if cut {
            self.detections += 1;
        }
        cut
    }

    fn insert(&mut self, value: f64) {
        if self.rows.is_empty() {
            self.rows.push(VecDeque::new());
        }
        self.rows[0].push_back(Bucket {
            sum: value,
            sum_sq: value * value,
        });
        self.width += 1;
        self.sum += value;
        self.sum_sq += value * value;
        let mut k = 0;
        while self.rows[k].len() > self.max_buckets + 1 {
            let a = self.rows[k].pop_front().expect("row has buckets");
            let b = self.rows[k].pop_front().expect("row has buckets");
            if self.rows.len() == k + 1 {
                self.rows.push(VecDeque::new());
            }
            self.rows[k + 1].push_back(Bucket {
                sum: a.sum + b.sum,
                sum_sq: a.sum_sq + b.sum_sq,
            });
            k += 1;
        }
    }

    fn drop_oldest(&mut self) {
        while let Some(row) = self.rows.last() {
            if row.is_empty() {
                self.rows.pop();
            } else {
                break;
            }
        }
        let k = self.rows.len() - 1;
        let b = self.rows[k].pop_front().expect("non-empty row");
        self.width -= 1 << k;
        self.sum -= b.sum;
        self.sum_sq -= b.sum_sq;
        if self.rows[k].is_empty() {
            self.rows.pop();
        }
        if self.width == 0 {
            self.sum = 0.0;
            self.sum_sq = 0.0;
        }
    }

    fn find_cut(&self) -> bool {
        if self.width < 2 * MIN_SUBWINDOW {
            return false;
        }
        let n = self.width as f64;
        let variance = self.variance();
        let ln_term = (2.0 * n.ln() / self.delta).ln();
        let mut n0 = 0usize;
        let mut s0 = 0.0;
        for k in (0..self.rows.len()).rev() {
            for b in &self.rows[k] {
                n0 += 1 << k;
                s0 += b.sum;
                let n1 = self.width - n0;
                if n1 < MIN_SUBWINDOW {
                    return false;
                }
                if n0 < MIN_SUBWINDOW {
                    continue;
                }
                let mu0 = s0 / n0 as f64;
                let mu1 = (self.sum - s0) / n1 as f64;
                if (mu0 - mu1).abs() >= cut_threshold(n0, n1, variance, ln_term) {
                    return true;
                }
            }
        }
        false
    }
}

/// `ε_cut` for sub-window sizes `n0`, `n1`; `ln_term = ln(2/δ')`.
fn cut_threshold(n0: usize, n1: usize, variance: f64, ln_term: f64) -> f64 {
    let inv_m = 1.0 / n0 as f64 + 1.0 / n1 as f64;
    (2.0 * inv_m * variance * ln_term).sqrt() + 2.0 / 3.0 * inv_m * ln_term
}
