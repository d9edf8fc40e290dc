//! Coherence and quantum-correlation measures for small density matrices.
//!
//! * [`coherence`]: l1-norm coherence, dephasing, maximal-coherence-loss certificate.
//! * [`correlated`]: correlated coherence and the discord-zero classifiers.
//! * [`extension`]: extensions, unitary symmetry, entanglement-of-coherence upper bounds.
//! * [`protocol`]: measurement dilation, classical copying and one-round LOCC probes.
//! * [`stategen`]: seeded state families.
//!
//! Every optimizer-backed quantity is an upper bound on the minimum it
//! approximates; nothing here claims to have found a global minimum.

pub mod basis;
pub mod coherence;
pub mod correlated;
pub mod error;
pub mod extension;
pub mod linalg;
pub mod optim;
pub mod par;
pub mod protocol;
pub mod rng;
pub mod state;
pub mod stategen;

pub use basis::{LocalBasis, ProductBasisChoice};
pub use error::{QccError, Result, Violation};
pub use optim::{OptimizerConfig, OptimizerReport};
pub use par::Execution;
pub use state::{DensityMatrix, Side};
