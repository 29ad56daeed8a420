//! Order-fixed summation helpers. Pairwise summation keeps roundoff at
//! O(log n) ulps and is deterministic for a given term order, which the
//! trace/reproducibility contracts rely on.

use nalgebra::DVector;

/// Pairwise sum of a scalar slice (0.0 for an empty slice).
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Pairwise sum of a slice of vectors. Panics on an empty slice.
pub(crate) fn pairwise_sum_vectors(terms: &[DVector<f64>]) -> DVector<f64> {
    match terms.len() {
        0 => panic!("pairwise_sum_vectors: empty slice"),
        1 => terms[0].clone(),
        2 => &terms[0] + &terms[1],
        n => {
            let mid = n / 2;
            pairwise_sum_vectors(&terms[..mid]) + pairwise_sum_vectors(&terms[mid..])
        }
    }
}
