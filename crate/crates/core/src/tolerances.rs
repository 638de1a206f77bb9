//! Numerical tolerances used throughout the crate.
//!
//! Every threshold lives here so the sampled statements made by the
//! classifier and the validators can be audited in one place.

/// Tolerance and size configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max |a_ij − conj(a_ji)| accepted for a Hermitian matrix.
    pub hermitian: f64,
    /// Max |Tr ρ − 1| for a density matrix.
    pub trace: f64,
    /// Most negative eigenvalue accepted for a PSD operator.
    pub psd: f64,
    /// Max |‖v‖² − 1| for a pure state.
    pub normalization: f64,
    /// Max deviation of a probability vector's sum from 1.
    pub probability: f64,
    /// Jacobi sweeps stop once the off-diagonal Frobenius norm drops below this.
    pub jacobi_off_diagonal: f64,
    /// Eigenvalues below this are treated as zero inside `x log x`.
    pub eigenvalue_clip: f64,
    /// Largest dense matrix dimension we are willing to build.
    pub dim_cap: usize,
    /// Band around zero for the more-capable style flags.
    pub zero_band: f64,
    /// Band on numeric second derivatives for the convexity flags.
    pub convexity_band: f64,
    /// Slack on fidelity comparisons in the degradability criterion.
    pub fidelity_slack: f64,
    /// An output counts as pure when its top eigenvalue is within this of 1.
    pub purity: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-12,
        trace: 1e-10,
        psd: 1e-10,
        normalization: 1e-12,
        probability: 1e-12,
        jacobi_off_diagonal: 1e-13,
        eigenvalue_clip: 1e-14,
        dim_cap: 4096,
        zero_band: 1e-9,
        convexity_band: 1e-7,
        fidelity_slack: 1e-12,
        purity: 1e-10,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
