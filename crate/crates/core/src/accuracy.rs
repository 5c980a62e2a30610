use std::collections::VecDeque;

/// Hit/miss accuracy over the most recent `window` observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlidingAccuracy {
    window: usize,
    outcomes: VecDeque<bool>,
    hits: usize,
}

impl SlidingAccuracy {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "accuracy window must be positive");
        SlidingAccuracy {
            window,
            outcomes: VecDeque::with_capacity(window),
            hits: 0,
        }
    }

    pub fn record(&mut self, hit: bool) {
        if self.outcomes.len() == self.window && self.outcomes.pop_front() == Some(true) {
            self.hits -= 1;
        }
        self.outcomes.push_back(hit);
        self.hits += usize::from(hit);
    }

    pub fn observations(&self) -> usize {
        self.outcomes.len()
    }

    /// `None` before the first observation.
    pub fn accuracy(&self) -> Option<f64> {
        (!self.outcomes.is_empty()).then(|| self.hits as f64 / self.outcomes.len() as f64)
    }

    /// Accuracy with unobserved estimators counted as 0.
    pub fn accuracy_or_zero(&self) -> f64 {
        self.accuracy().unwrap_or(0.0)
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn clear(&mut self) {
        self.outcomes.clear();
        self.hits = 0;
    }
}
