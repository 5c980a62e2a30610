//! Bounded pool of fixed spectra with per-entry accuracy and winner tallies.
//!
//! When full, the entry with the lowest `winner_tally × accuracy` is evicted
//! (oldest first on ties). Entries that were never observed count as
//! accuracy 0.

use std::io::Write;
use std::path::Path;

use crate::accuracy::SlidingAccuracy;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectrum::FourierSpectrum;
use crate::stream::Instance;

pub const DEFAULT_CAPACITY: usize = 50;
pub const DEFAULT_EQUALITY_TOLERANCE: f64 = 0.01;
/// Cost model: per-entry bookkeeping (tally, ids, accuracy window summary).
pub const ENTRY_OVERHEAD_BYTES: usize = 96;

#[derive(Debug, Clone)]
pub struct RepositoryEntry<S> {
    id: u64,
    spectrum: FourierSpectrum<S>,
    winner_tally: u64,
    accuracy: SlidingAccuracy,
    insertion_index: u64,
}

impl<S: Scalar> RepositoryEntry<S> {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn spectrum(&self) -> &FourierSpectrum<S> {
        &self.spectrum
    }

    pub fn winner_tally(&self) -> u64 {
        self.winner_tally
    }

    pub fn insertion_index(&self) -> u64 {
        self.insertion_index
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy.accuracy_or_zero()
    }

    pub fn observations(&self) -> usize {
        self.accuracy.observations()
    }

    /// `winner_tally × accuracy`.
    pub fn weight(&self) -> f64 {
        self.winner_tally as f64 * self.accuracy()
    }

    pub fn classify(&self, x: &crate::bits::BitVector) -> u8 {
        self.spectrum.classify(x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertOutcome {
    /// Equal (within tolerance) to the entry with this id; nothing stored.
    Duplicate(u64),
    Inserted {
        id: u64,
        evicted: Option<u64>,
    },
}

impl InsertOutcome {
    pub fn inserted(&self) -> bool {
        matches!(self, InsertOutcome::Inserted { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Repository<S> {
    entries: Vec<RepositoryEntry<S>>,
    capacity: usize,
    accuracy_window: usize,
    tolerance: S,
    inserted: u64,
}

impl<S: Scalar> Repository<S> {
    pub fn new(capacity: usize, accuracy_window: usize, tolerance: S) -> Self {
        assert!(capacity > 0, "repository capacity must be positive");
        Repository {
            entries: Vec::new(),
            capacity,
            accuracy_window,
            tolerance,
            inserted: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> &[RepositoryEntry<S>] {
        &self.entries
    }

    pub fn get(&self, id: u64) -> Option<&RepositoryEntry<S>> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Inserts unless an equal spectrum is stored; evicts the lowest-weight
    /// entry when full.
    pub fn insert(&mut self, spectrum: FourierSpectrum<S>) -> Result<InsertOutcome> {
        for e in &self.entries {
            if e.spectrum.approx_eq(&spectrum, &self.tolerance)? {
                return Ok(InsertOutcome::Duplicate(e.id));
            }
        }
        let evicted = if self.entries.len() >= self.capacity {
            let victim = self
                .entries
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    a.weight()
                        .total_cmp(&b.weight())
                        .then(a.insertion_index.cmp(&b.insertion_index))
                })
                .map(|(i, _)| i)
                .expect("full repository has entries");
            Some(self.entries.remove(victim).id)
        } else {
            None
        };
        let id = self.inserted;
        self.entries.push(RepositoryEntry {
            id,
            spectrum,
            winner_tally: 0,
            accuracy: SlidingAccuracy::new(self.accuracy_window),
            insertion_index: self.inserted,
        });
        self.inserted += 1;
        Ok(InsertOutcome::Inserted { id, evicted })
    }

    /// Every entry classifies `inst` and records a hit or miss. Returns the
    /// predictions in entry order.
    pub fn observe(&mut self, inst: &Instance) -> Vec<u8> {
        self.entries
            .iter_mut()
            .map(|e| {
                let p = e.spectrum.classify(&inst.features);
                e.accuracy.record(p == inst.label);
                p
            })
            .collect()
    }

    /// Highest accuracy; ties by higher tally, then older entry.
    pub fn best(&self) -> Option<(&RepositoryEntry<S>, f64)> {
        self.entries
            .iter()
            .max_by(|a, b| {
                a.accuracy()
                    .total_cmp(&b.accuracy())
                    .then(a.winner_tally.cmp(&b.winner_tally))
                    .then(b.insertion_index.cmp(&a.insertion_index))
            })
            .map(|e| (e, e.accuracy()))
    }

    /// Increments the winner tally of `id`.
    pub fn record_win(&mut self, id: u64) -> bool {
        match self.entries.iter_mut().find(|e| e.id == id) {
            Some(e) => {
                e.winner_tally += 1;
                true
            }
            None => false,
        }
    }

    pub fn coefficient_count(&self) -> usize {
        self.entries.iter().map(|e| e.spectrum.len()).sum()
    }

    /// Bytes under the documented cost model.
    pub fn memory_bytes(&self) -> usize {
        self.entries
            .iter()
            .map(|e| ENTRY_OVERHEAD_BYTES + e.spectrum.memory_bytes())
            .sum()
    }

    /// Writes `entry_<id>.spectrum` per entry and an `index.csv`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let index_path = dir.join("index.csv");
        let mut index =
            std::fs::File::create(&index_path).map_err(|e| Error::io(&index_path, e))?;
        let mut lines = String::from("entry_id,winner_tally,accuracy,insertion_index\n");
        for e in &self.entries {
            lines.push_str(&format!(
                "{},{},{:.6},{}\n",
                e.id,
                e.winner_tally,
                e.accuracy(),
                e.insertion_index
            ));
            let path = dir.join(format!("entry_{}.spectrum", e.id));
            let file = std::fs::File::create(&path).map_err(|err| Error::io(&path, err))?;
            e.spectrum
                .write_to(std::io::BufWriter::new(file))
                .map_err(|err| Error::io(&path, err))?;
        }
        index
            .write_all(lines.as_bytes())
            .map_err(|e| Error::io(&index_path, e))
    }
}
