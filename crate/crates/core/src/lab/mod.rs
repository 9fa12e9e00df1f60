//! Correlation measurements and weak-limit diagnostics on a truncated tower.
//!
//! Two exact counting paths are available behind the [`Correlate`] trait:
//! [`TowerCorrelator`] builds the position bit vectors of both sets and
//! shift-and-popcounts them, while [`StageCorrelator`] reduces every pair of
//! level sets of one tower to the autocorrelation of that tower's occurrence
//! offsets, which is what the batch analyses use.

mod correlation;
mod fit;
mod kernel;
mod mixing;
mod pairs;
mod probe;
mod tensor;

pub use correlation::{
    correlation, correlation_profile, Correlate, Correlation, CorrelationQuery, CorrelationRow,
    StageCorrelator, TowerCorrelator,
};
pub use fit::{fit_samples, fit_weak_limit, FitSample, WeakLimitFit};
pub use kernel::{kernel_smoothed_prediction, TriangularKernel};
pub use mixing::{mixing_profile, MixingRow};
pub use pairs::{block_pairs, single_level_pairs, LevelPair, DEFAULT_PAIR_CAP};
pub use probe::{cyclicity_probe, GramProbe, RANK_TOLERANCE};
pub use tensor::{centered_product, tensor_correlation, TensorQuery, TensorValue};
