use statrs::function::gamma::ln_gamma;

use super::functions::{exp_scaled_en, ln_gamma_p, EULER_GAMMA};
use crate::error::{domain, Error, Result};

/// Default series tail tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Largest δ index the recursion will reach.
pub const K_MAX: usize = 5000;

const MERGE_RTOL: f64 = 1e-9;
const SMALL_RUN: usize = 5;

/// Eigenvalue list plus the Moschopoulos δ-series of Σ λ_n|h_n|².
///
/// The law of the weighted sum is the Gamma mixture
/// Σ_k w_k·Gamma(r + k, λ_min) with w_k = δ_k·Π(λ_min/λ_n).
/// δ_k is kept in log form because it overflows long before w_k does.
#[derive(Debug, Clone)]
pub struct SpectralStats {
    eigs: Vec<f64>,
    ln_deltas: Vec<f64>,
    ln_weight0: f64,
    tol: f64,
    tail: f64,
}

pub(crate) fn prepare_eigs(eigs: &[f64]) -> Result<Vec<f64>> {
    if eigs.is_empty() {
        return domain("empty eigenvalue list");
    }
    if let Some(bad) = eigs.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
        return domain(format!("eigenvalues must be positive and finite, got {bad}"));
    }
    let mut v = eigs.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let lmin = *v.last().unwrap();
    for l in &mut v {
        if (*l - lmin) <= MERGE_RTOL * lmin {
            *l = lmin;
        }
    }
    Ok(v)
}

/// Terms needed for the δ-mass tail to fall below `tol`, from the geometric
/// decay rate max_n(1 − λ_min/λ_n).
pub(crate) fn predicted_terms(eigs: &[f64], tol: f64) -> f64 {
    let lmax = eigs.iter().cloned().fold(f64::MIN, f64::max);
    let lmin = eigs.iter().cloned().fold(f64::MAX, f64::min);
    let q = 1.0 - lmin / lmax;
    if q <= 0.0 {
        0.0
    } else {
        tol.ln() / q.ln()
    }
}

impl SpectralStats {
    /// Builds the series until the δ-mass tail drops below `tol` or [`K_MAX`]
    /// terms are reached. Check [`converged`](Self::converged) afterwards.
    pub fn new(eigs: &[f64], tol: f64) -> Result<Self> {
        Self::with_budget(eigs, tol, K_MAX)
    }

    pub fn with_budget(eigs: &[f64], tol: f64, k_max: usize) -> Result<Self> {
        if !(tol > 0.0) {
            return domain(format!("tolerance must be positive, got {tol}"));
        }
        let eigs = prepare_eigs(eigs)?;
        let lmin = *eigs.last().unwrap();
        let ln_weight0: f64 = eigs.iter().map(|l| (lmin / l).ln()).sum();
        let q: Vec<f64> = eigs.iter().map(|l| 1.0 - lmin / l).filter(|q| *q > 0.0).collect();

        let mut scaled = vec![1.0f64];
        let mut shift = 0.0f64;
        let mut ln_deltas = vec![0.0f64];
        let mut gammas = vec![0.0f64];
        let mut pows = q.clone();
        let mut cum = ln_weight0.exp();
        let mut k = 0;
        while !q.is_empty() && 1.0 - cum > tol && k < k_max {
            k += 1;
            gammas.push(pows.iter().sum());
            for (p, qi) in pows.iter_mut().zip(&q) {
                *p *= qi;
            }
            let acc: f64 = (1..=k).map(|i| gammas[i] * scaled[k - i]).sum();
            let v = acc / k as f64;
            scaled.push(v);
            ln_deltas.push(v.ln() + shift);
            if v > 1e250 {
                scaled.iter_mut().for_each(|s| *s *= 1e-250);
                shift += 250.0 * std::f64::consts::LN_10;
            }
            cum += (ln_weight0 + ln_deltas[k]).exp();
        }
        Ok(Self { eigs, ln_deltas, ln_weight0, tol, tail: (1.0 - cum).max(0.0) })
    }

    /// Eigenvalues, sorted descending after clustering near λ_min.
    pub fn eigs(&self) -> &[f64] {
        &self.eigs
    }

    pub fn rank(&self) -> usize {
        self.eigs.len()
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigs.last().unwrap()
    }

    /// δ_0..δ_K. Entries overflow to infinity for badly spread spectra; use
    /// [`ln_deltas`](Self::ln_deltas) there.
    pub fn deltas(&self) -> Vec<f64> {
        self.ln_deltas.iter().map(|l| l.exp()).collect()
    }

    pub fn ln_deltas(&self) -> &[f64] {
        &self.ln_deltas
    }

    /// ln Π_n(λ_min/λ_n), the log prefactor of every series term.
    pub fn ln_prefactor(&self) -> f64 {
        self.ln_weight0
    }

    pub fn trunc_k(&self) -> usize {
        self.ln_deltas.len() - 1
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Mixture mass not covered by δ_0..δ_K; bounds every CDF truncation error.
    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    pub fn converged(&self) -> bool {
        self.tail <= self.tol
    }

    fn ln_weight(&self, k: usize) -> f64 {
        self.ln_weight0 + self.ln_deltas[k]
    }

    fn not_converged(&self, last_term: f64, accumulated: f64) -> Error {
        Error::Convergence { terms: self.ln_deltas.len(), last_term, accumulated }
    }
}

/// δ-coefficients of the weighted exponential sum and the truncation index.
pub fn moschopoulos_deltas(eigs: &[f64], tol: f64) -> Result<(Vec<f64>, usize)> {
    let stats = SpectralStats::new(eigs, tol)?;
    if !stats.converged() {
        let k = stats.trunc_k();
        return Err(stats.not_converged(stats.ln_weight(k).exp(), 1.0 - stats.tail));
    }
    Ok((stats.deltas(), stats.trunc_k()))
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// ln F(x) for F the CDF of Σ λ_n|h_n|² with h_n ~ CN(0, 1).
///
/// Stays accurate when F underflows double precision.
pub fn weighted_expsum_ln_cdf(stats: &SpectralStats, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("CDF argument must be nonnegative, got {x}"));
    }
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let y = x / stats.lambda_min();
    let r = stats.rank() as f64;
    let ln_tol = stats.tol.ln();
    let mut lse = f64::NEG_INFINITY;
    let mut run = 0;
    let mut cum_w = 0.0;
    let mut last = f64::NEG_INFINITY;
    for k in 0..stats.ln_deltas.len() {
        let lw = stats.ln_weight(k);
        cum_w += lw.exp();
        if stats.ln_deltas[k].is_finite() {
            last = lw + ln_gamma_p(r + k as f64, y);
            lse = log_add_exp(lse, last);
            run = if last < ln_tol + lse { run + 1 } else { 0 };
        } else {
            run += 1;
        }
        let remaining = (1.0 - cum_w).max(0.0);
        if run >= SMALL_RUN || remaining <= stats.tol * lse.exp() {
            return Ok(lse.min(0.0));
        }
    }
    if stats.tail <= stats.tol * lse.exp() {
        Ok(lse.min(0.0))
    } else {
        Err(stats.not_converged(last.exp(), lse.exp()))
    }
}

/// CDF of Σ λ_n|h_n|², h_n ~ CN(0, 1), via the Moschopoulos series.
pub fn weighted_expsum_cdf(stats: &SpectralStats, x: f64) -> Result<f64> {
    weighted_expsum_ln_cdf(stats, x).map(f64::exp)
}

/// Density of Σ λ_n|h_n|² as a Gamma(r + k, λ_min) mixture.
pub fn weighted_expsum_pdf(stats: &SpectralStats, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("PDF argument must be nonnegative, got {x}"));
    }
    let lmin = stats.lambda_min();
    let r = stats.rank();
    if x == 0.0 {
        return Ok(if r == 1 { 1.0 / lmin } else { 0.0 });
    }
    let ln_tol = stats.tol.ln();
    let (lx, llmin) = (x.ln(), lmin.ln());
    let mut lse = f64::NEG_INFINITY;
    let mut run = 0;
    let mut last = f64::NEG_INFINITY;
    for k in 0..stats.ln_deltas.len() {
        if stats.ln_deltas[k].is_finite() {
            let s = (r + k) as f64;
            last = stats.ln_weight(k) + (s - 1.0) * lx - x / lmin - s * llmin - ln_gamma(s);
            lse = log_add_exp(lse, last);
            run = if last < ln_tol + lse { run + 1 } else { 0 };
        } else {
            run += 1;
        }
        if run >= SMALL_RUN {
            return Ok(lse.exp());
        }
    }
    if stats.converged() {
        Ok(lse.exp())
    } else {
        Err(stats.not_converged(last.exp(), lse.exp()))
    }
}

/// r_m = e^b·E_{m+1}(b) for m < len; the bracket of the closed-form ζ series.
///
/// For b ≤ 1 the forward recurrence reproduces the Ei term plus the finite
/// u-sum exactly. For b > 1 that recurrence cancels catastrophically, so the
/// low orders come from the continued fraction and the recurrence takes over
/// once it contracts (m > 2b).
fn zeta_brackets(b: f64, len: usize) -> Vec<f64> {
    let mut r = Vec::with_capacity(len);
    let switch = if b <= 1.0 { 0 } else { ((2.0 * b).ceil() as usize).min(len.saturating_sub(1)) };
    for m in 0..len {
        let v = if m <= switch { exp_scaled_en(m as u32 + 1, b) } else { (1.0 - b * r[m - 1]) / m as f64 };
        r.push(v);
    }
    r
}

/// ζ(eigs, a) = E{log₂(1 + a·Σ λ_n|h_n|²)} from the closed series.
pub fn zeta_series(stats: &SpectralStats, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return domain(format!("ζ needs a > 0, got {a}"));
    }
    if !stats.converged() {
        return Err(stats.not_converged(stats.ln_weight(stats.trunc_k()).exp(), 1.0 - stats.tail));
    }
    let r = stats.rank();
    let b = 1.0 / (a * stats.lambda_min());
    let brackets = zeta_brackets(b, r + stats.trunc_k());
    let mut prefix = Vec::with_capacity(brackets.len() + 1);
    prefix.push(0.0);
    for v in &brackets {
        prefix.push(prefix.last().unwrap() + v);
    }
    let total: f64 = (0..stats.ln_deltas.len()).map(|k| stats.ln_weight(k).exp() * prefix[r + k]).sum();
    Ok(total * std::f64::consts::LOG2_E)
}

/// υ(eigs) = E{log₂ Σ λ_n|h_n|²} from the digamma series.
pub fn upsilon_series(stats: &SpectralStats) -> Result<f64> {
    if !stats.converged() {
        return Err(stats.not_converged(stats.ln_weight(stats.trunc_k()).exp(), 1.0 - stats.tail));
    }
    let r = stats.rank();
    let ln_lmin = stats.lambda_min().ln();
    // ψ(r + k) by running harmonic sum.
    let mut psi = -EULER_GAMMA + (1..r).map(|j| 1.0 / j as f64).sum::<f64>();
    let mut total = 0.0;
    for k in 0..stats.ln_deltas.len() {
        if k > 0 {
            psi += 1.0 / (r + k - 1) as f64;
        }
        total += stats.ln_weight(k).exp() * (psi + ln_lmin);
    }
    Ok(total * std::f64::consts::LOG2_E)
}
