//! Bayesian model choice for the balanced one-way random effects model
//!
//! The model is `y_ij = mu + a_i + eps_ij` with `p >= 2` units, `r >= 2`
//! observations per unit, `a_i ~ N(0, sigma_a^2)` and `eps_ij ~ N(0, sigma^2)`.
//! This crate tests `M0: sigma_a^2 = 0` against `M1: sigma_a^2 != 0` via the
//! Bayes factor `BF_10` under a Pearson type VI prior on the variance ratio
//! `tau = sigma_a^2 / sigma^2`.
//!
//! The pieces:
//!
//! * [`core_math`] — log-domain special functions and an adaptive quadrature
//!   engine on the unit interval.
//! * [`data_model`] — balanced designs, data containers, sufficient statistics
//!   and CSV ingestion.
//! * [`bayes_factor`] — the closed-form Bayes factor (for the `kappa = r`,
//!   `beta = (n-p)/2 - alpha - 2` prior) and the quadrature Bayes factor for
//!   arbitrary Pearson type VI hyperparameters.
//! * [`asymptotics`] — the consistency theory as executable checks: the
//!   inconsistency boundary `h(r)`, probability limits of sums-of-squares
//!   ratios, and large-sample Bayes factor approximations.
//! * [`montecarlo`] — a deterministic, parallelizable simulation harness that
//!   tabulates how often the Bayes factor picks the true model.

pub mod asymptotics;
pub mod bayes_factor;
pub mod core_math;
pub mod data_model;
mod error;
pub mod montecarlo;
mod text;

pub use error::{Error, Result};
pub use text::format_sig;
