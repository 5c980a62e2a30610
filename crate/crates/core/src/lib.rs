//! Recurring-concept capture for binary data streams: a forest of Hoeffding
//! trees adapts to the current concept, and each captured concept is stored
//! as a compact Fourier spectrum that can be reused when the concept returns.

pub mod accuracy;
pub mod adwin;
pub mod bits;
pub mod driver;
pub mod error;
pub mod forest;
pub mod harness;
pub mod hoeffding_tree;
pub mod repository;
pub mod scalar;
pub mod spectrum;
pub mod stream;

pub use accuracy::SlidingAccuracy;
pub use adwin::Adwin;
pub use bits::BitVector;
pub use driver::{FctConfig, FctLearner, Mode, WinnerRef, WinnerSource};
pub use error::{Error, Result};
pub use forest::{Forest, ForestConfig};
pub use harness::{RunConfig, RunReport};
pub use hoeffding_tree::{HoeffdingTree, TreeConfig, TreePath};
pub use repository::{InsertOutcome, Repository, RepositoryEntry};
pub use scalar::Scalar;
pub use spectrum::{dft, inverse_classify, CoefficientIndex, FourierSpectrum};
pub use stream::{Instance, Schema};

pub use num_rational::Rational64;

pub type Spectrum = FourierSpectrum<f64>;
pub type Spectrum32 = FourierSpectrum<f32>;
pub type ExactSpectrum = FourierSpectrum<Rational64>;
pub type SpectrumRepository = Repository<f64>;
