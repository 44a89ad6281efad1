// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pattern recovery for blocky signals.
//!
//! The crate fits piecewise-constant means to noisy sequences and asks
//! whether the fit gets the *pattern* right: the sign of every successive
//! difference. Two estimators are provided:
//!
//! * the fused lasso signal approximator, through its exact fusion path in
//!   λ₂ ([`flsa_solver`]);
//! * a preconditioned lasso on the differences, whose path is plain soft
//!   thresholding of the successive differences ([`puffer_lasso`]).
//!
//! [`ic_checker`] diagnoses when the plain lasso formulation cannot recover
//! the pattern, and [`experiments`] estimates recovery probabilities by
//! simulation.
//!
//! ```
//! use fused_pattern::{benchmark_signal, sample_noisy, ThresholdPath};
//! use fused_pattern::experiments::threshold_path_min_loss;
//!
//! let signal = benchmark_signal();
//! let y = sample_noisy(&signal, 0.1, 7).unwrap();
//! let path = ThresholdPath::new(&y.values).unwrap();
//! let (loss, _lambda) = threshold_path_min_loss(&path, &signal.pattern()).unwrap();
//! assert_eq!(loss, 0);
//! ```

pub mod cli;
pub mod design_transform;
pub mod error;
pub mod experiments;
pub mod flsa_solver;
pub mod ic_checker;
pub mod io;
pub mod puffer_lasso;
pub mod signal_model;

pub use error::{FusedError, Result};
pub use experiments::{
    compare_methods, ic_necessity_experiment, recovery_probability, sigma_sweep, ExperimentConfig,
    Method, RecoveryResult,
};
pub use flsa_solver::{apply_lambda1, flsa_fit, flsa_path, flsa_solve, qp_oracle, FusionPath};
pub use ic_checker::{
    ic_magnitudes, kkt_sign_recovery, lasso_recovery_bound, structural_ic, support_from_signal,
    tridiag_inverse, ICReport, JumpSet,
};
pub use puffer_lasso::{
    preconditioned_fit, preconditioned_recovery_bound, svd_centered_design, PufferDecomposition,
    ThresholdPath,
};
pub use signal_model::{
    benchmark_signal, jump_pattern, pattern_loss, sample_noisy, JumpPattern, NoisySequence,
    StepwiseSignal,
};
