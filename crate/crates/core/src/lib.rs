//! Kernel-width selection for radial-basis classifiers.
//!
//! The crate implements a general regression neural network (GRNN), a radial
//! basis function network trained with or without Kohonen clustering, learning
//! vector quantizers, a sequential-minimal-optimization SVM and a sigmoid
//! multilayer perceptron, all from scratch. On top of these sits a search
//! harness that looks for the Gaussian width `sigma` maximizing F1 and the one
//! maximizing accuracy (by grid sweep and by a steady-state genetic
//! algorithm), and a benchmark runner that prints one metrics row per model.

pub mod bench;
pub mod data;
pub mod error;
pub mod ffnn;
pub mod gradcheck;
pub mod grnn;
pub mod kernel;
pub mod lvq;
pub mod metrics;
pub mod rbfnn;
pub mod sigma_search;
pub mod ssga;
pub mod svm;
pub mod textfmt;

pub use data::{Dataset, LabelSpace, SplitSpec, Standardizer, SynthKind};
pub use error::{Error, Result};
pub use kernel::GaussianKernelParams;
pub use metrics::{ConfusionCounts, EvalReport};

/// Uniform seeded generator used everywhere randomness is needed.
pub type Rng = rand_chacha::ChaCha8Rng;

pub(crate) fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

/// Signed class of a target under the relabeling rule: `> 0.5` and ties are
/// positive, `< 0.5` negative. Signed targets map to themselves.
pub fn sign_class(target: f64, space: LabelSpace) -> f64 {
    match space {
        LabelSpace::SignedBinary => target,
        LabelSpace::Continuous => {
            if target >= 0.5 {
                1.0
            } else {
                -1.0
            }
        }
    }
}
