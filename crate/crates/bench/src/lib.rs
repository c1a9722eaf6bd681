//! Shared fixtures for the benchmarks.

use fhtskew_core::{horizontal_derivative, synth_document, GrayImage};

/// A synthetic page skewed by 3 degrees, the same input the timing report uses.
pub fn page(side: usize) -> GrayImage {
    synth_document(side, 3.0, 0)
        .expect("valid synthetic page")
        .0
}

/// Horizontal derivative of [`page`], the input of the horizontal passes.
pub fn edges(side: usize) -> GrayImage {
    horizontal_derivative(&page(side)).expect("page is large enough")
}
