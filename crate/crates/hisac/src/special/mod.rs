//! Special functions and the series behind every closed form.
//!
//! The distribution of X = Σ λ_n|h_n|² (h_n i.i.d. CN(0, 1)) is evaluated with
//! the Moschopoulos δ-series when its mass converges within [`K_MAX`] terms.
//! Spectra spread too widely for that (a strong rank-one echo on top of the
//! correlation eigenvalues is the usual cause) go through the transform routes
//! in [`laplace`], which compute the same quantities.

mod functions;
pub mod laplace;
mod series;

pub use functions::{
    digamma, exp_integral_ei, exp_scaled_en, exponential_ecr, ln_gamma_p, lower_incomplete_gamma, EULER_GAMMA,
};
pub use series::{
    moschopoulos_deltas, upsilon_series, weighted_expsum_cdf, weighted_expsum_ln_cdf, weighted_expsum_pdf, zeta_series,
    SpectralStats, DEFAULT_TOL, K_MAX,
};

use crate::error::{domain, Error, Result};
use series::{predicted_terms, prepare_eigs};

fn series_stats(eigs: &[f64]) -> Result<Option<SpectralStats>> {
    let eigs = prepare_eigs(eigs)?;
    if predicted_terms(&eigs, DEFAULT_TOL) > K_MAX as f64 {
        return Ok(None);
    }
    let stats = SpectralStats::new(&eigs, DEFAULT_TOL)?;
    Ok(stats.converged().then_some(stats))
}

/// ζ(eigs, a) = E{log₂(1 + a·Σ λ_n|h_n|²)}.
pub fn zeta_ecr(eigs: &[f64], a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("ζ needs finite a > 0, got {a}"));
    }
    match series_stats(eigs)? {
        Some(stats) => zeta_series(&stats, a),
        None => laplace::zeta_laplace(eigs, a),
    }
}

/// υ(eigs) = E{log₂ Σ λ_n|h_n|²}.
pub fn upsilon(eigs: &[f64]) -> Result<f64> {
    match series_stats(eigs)? {
        Some(stats) => upsilon_series(&stats),
        None => laplace::upsilon_laplace(eigs),
    }
}

/// ln of the CDF of Σ λ_n|h_n|² at x, falling back to Laplace inversion when
/// the series cannot converge.
pub fn expsum_ln_cdf(eigs: &[f64], x: f64) -> Result<f64> {
    let stats = SpectralStats::new(eigs, DEFAULT_TOL)?;
    match weighted_expsum_ln_cdf(&stats, x) {
        Err(Error::Convergence { .. }) => {
            let v = laplace::cdf_talbot(eigs, x)?;
            Ok(v.ln())
        }
        other => other,
    }
}

/// CDF of Σ λ_n|h_n|² at x.
pub fn expsum_cdf(eigs: &[f64], x: f64) -> Result<f64> {
    expsum_ln_cdf(eigs, x).map(f64::exp)
}

/// Density of Σ λ_n|h_n|² at x.
pub fn expsum_pdf(eigs: &[f64], x: f64) -> Result<f64> {
    let stats = SpectralStats::new(eigs, DEFAULT_TOL)?;
    match weighted_expsum_pdf(&stats, x) {
        Err(Error::Convergence { .. }) => laplace::pdf_talbot(eigs, x),
        other => other,
    }
}
