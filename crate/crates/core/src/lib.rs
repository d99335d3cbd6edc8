//! Conditional dynamics of two two-level atoms coupled to one leaky cavity mode.
//!
//! The excitation starts on atom `a`. While no photon is registered, the
//! system evolves under a non-Hermitian generator and relaxes into the
//! cavity-decoupled ("dark") superposition of the two atoms, which for equal
//! couplings is the singlet. The crate provides
//!
//! * [`model`]: parameters, the lossless coupling matrix, the conditional
//!   generator and both eigensystems in closed form,
//! * [`propagator`]: `exp(-M t)` and the analytic no-click, cavity and
//!   spontaneous emission probabilities,
//! * [`montecarlo`]: a reproducible parallel quantum-jump ensemble,
//! * [`entanglement`]: the conditioned singlet/ground mixture, its fidelity,
//!   relative entropy of entanglement and repump purification,
//! * [`csv`]: the tabular datasets emitted by the `darkstate-sim` binary,
//! * [`cli`]: argument handling for that binary.
//!
//! Rates share one arbitrary unit and times are in its inverse. `gamma` is an
//! amplitude decay rate: atomic populations decay at `2 * gamma` and the
//! cavity population at `2 * kappa`.

pub mod cli;
pub mod csv;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod propagator;

pub use error::{Error, Result};
pub use model::{ConditionalGenerator, Parameters, StateVector};
pub use propagator::{ProbabilityTriple, Propagator};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
