//! Shared inputs for the criterion benchmarks.

use embedconst_core::kernel::GreenKernelParams;
use embedconst_core::spectral::{SpectralField, TrialFamily, TrialKind};
use embedconst_core::ExponentPair;

/// Kernel parameters at `alpha = 1`, `d = 3`, `a = b = 1`.
pub fn unit_kernel() -> GreenKernelParams {
    GreenKernelParams::new(1.0, 3, 1.0, 1.0).expect("valid kernel parameters")
}

/// A unit-width Gaussian on an `n`-point grid in `dim` dimensions.
pub fn gaussian_field(dim: u32, n: usize) -> SpectralField {
    TrialFamily::new(TrialKind::Gaussian, vec![1.0])
        .and_then(|f| f.member(1.0, dim, n))
        .expect("valid trial field")
}

/// `(p, q) = (2, 4)` in dimension `d`.
pub fn sample_pair(d: u32) -> ExponentPair {
    ExponentPair::from_pq(2.0, 4.0, d).expect("valid pair")
}
