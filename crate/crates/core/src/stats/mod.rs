//! Spectral statistics: mean eigenvalue distances, local Weyl laws,
//! heat-kernel sums, coupling-path integrals and isospectrality checks.

use std::sync::Arc;

use crate::conditions::VertexConditionSet;
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::potential::Potential;
use crate::secular::{SecularSystem, Spectrum, SpectrumRequest};

pub mod cesaro;
pub mod comparison;
pub mod hadamard;
pub mod heat;
pub mod isospectral;
pub mod weyl;

pub use cesaro::{cesaro_at, cesaro_means, fit_limit, LimitFit};
pub use comparison::{
    corollary_bipartite, divergence_experiment, mean_difference, mean_distance_experiment,
    theorem1_rhs, ComparisonReport, CorollaryReport, DivergenceReport,
};
pub use hadamard::{hadamard_identity_check, HadamardReport};
pub use heat::{
    bracketing_check, heat_kernel, heat_kernel_diag, heat_kernel_vertex, BracketingReport,
    HeatReport,
};
pub use isospectral::{interlacing_violation, isospectrality_check, IsospectralPair, IsospectralReport};
pub use weyl::{local_weyl, local_weyl_dummy, DummyWeylReport, WeylReport, WeylTarget};

pub fn operator(
    g: &Arc<MetricGraph>,
    conditions: VertexConditionSet,
    q: Potential,
) -> Result<SecularSystem> {
    SecularSystem::new(g.clone(), conditions, q)
}

/// The lowest `n` eigenvalues with a passing certificate.
pub fn certified_first(system: &SecularSystem, n: usize) -> Result<Spectrum> {
    let s = system.find_spectrum(SpectrumRequest::FirstN(n))?;
    s.require_prefix(n)?;
    Ok(s)
}

/// Every eigenvalue below `top`, with a passing certificate.
pub fn certified_below(system: &SecularSystem, top: f64) -> Result<Spectrum> {
    let lo = system.spectral_floor()?;
    if lo >= top {
        return Err(Error::Precondition(format!("level {top} below the spectrum")));
    }
    // a level sitting on an eigenvalue is moved just above it
    let mut hi = top;
    for _ in 0..4 {
        match system.find_spectrum(SpectrumRequest::Window { lo, hi }) {
            Err(Error::SingularShift(_)) => hi += 1e-9 * (1.0 + hi.abs()),
            other => {
                let s = other?;
                s.require_certified()?;
                return Ok(s);
            }
        }
    }
    Err(Error::SingularShift(top))
}
