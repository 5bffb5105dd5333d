//! Fidelity measurement backends: the swap test and classical shadows.

mod shadow;
mod swap;

pub use shadow::{
    channel_average, estimate_observable, estimate_observable_direct, estimate_with_error, sample_shadow,
    snapshot_factor, snapshot_matrix, PauliBasis, ShadowEstimate, ShadowSet, ShadowSnapshot,
};
pub use swap::{sample_swap_test, swap_operator_expectation, swap_test_probabilities, SwapTestResult};
