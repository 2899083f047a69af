//! Output purity of a correlated two-qubit depolarizing channel.
//!
//! The channel mixes two independent depolarizing channels with a
//! replacement by a fixed maximally entangled state `|beta>`:
//!
//! ```text
//! Phi(R) = (1 - mu) (Psi_lambda ⊗ Psi_lambda)(R) + mu Tr(R) |beta><beta|
//! ```
//!
//! The crate computes output spectra and Schatten `p`-norms, the exact
//! maximal output 2-norm and its optimal inputs, numerical searches at other
//! orders, and checks of the supporting eigenvalue identities.

pub mod analysis;
pub mod channels;
pub mod error;
pub mod exec;
pub mod io;
pub mod linalg;
pub mod optimize;
pub mod purity;
pub mod states;
pub mod verify;

pub use channels::{apply_channel, output_spectrum, ChannelParams, DensityMatrix4};
pub use error::{Error, Result};
pub use exec::Exec;
pub use linalg::{CMatrix, Spectrum, C64};
pub use optimize::{
    conjectured_optimum, mu_critical, numeric_optimize, theta_optimal, two_norm_optimum, Budget,
    Optimum, Regime,
};
pub use purity::{p_norm, renyi_entropy, PurityOrder, ReducedParams};
pub use states::{beta0, psi_theta, MaxEntangled, PureState4};
