//! Sensing and communication channels.
//!
//! The sensing link is a deterministic spherical wave. The communication link
//! is correlated Rayleigh fading expanded over a Fourier plane-wave basis,
//! h_c = U·diag(√λ)·h̄ with h̄ ~ CN(0, I).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::{positions, ArrayConfig};
use crate::error::{domain, Error, Result};
use crate::linalg::{cn, CMatrix, CVector};
use crate::params::ScenarioParams;
use crate::quad::integrate;

/// Line-of-sight BS-target channel.
#[derive(Debug, Clone)]
pub struct SensingChannel {
    pub h_s: CVector,
    /// Unit-modulus phase vector, [b]_n = exp(−j·k0·‖r_s − p_n‖).
    pub b: CVector,
    /// Distance from the array centre to the target.
    pub r_s: f64,
    /// Common entry magnitude √(α₀/(4π r_s²)).
    pub amplitude: f64,
    pub norm_sq: f64,
}

impl SensingChannel {
    pub fn n(&self) -> usize {
        self.h_s.len()
    }
}

pub fn sensing_channel(cfg: &ArrayConfig, params: &ScenarioParams) -> Result<SensingChannel> {
    cfg.validate()?;
    let r = params.r_target;
    if !(r[2] > 0.0) {
        return domain("the target must lie in front of the array");
    }
    let c = cfg.center();
    let r_s = dist(&r, &c);
    let k0 = cfg.k0();
    let amplitude = (params.alpha0 / (4.0 * PI * r_s * r_s)).sqrt();
    let mut b = Vec::with_capacity(cfg.n_total());
    for p in positions(cfg) {
        let d = dist(&r, &p);
        if d == 0.0 {
            return domain("target coincides with an antenna");
        }
        b.push(Complex64::from_polar(1.0, -k0 * d));
    }
    let b = CVector::from_vec(b);
    let h_s = &b * Complex64::from(amplitude);
    let norm_sq = cfg.n_total() as f64 * amplitude * amplitude;
    Ok(SensingChannel { h_s, b, r_s, amplitude, norm_sq })
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Target amplitude β ~ CN(0, α_s).
pub fn sample_target_amplitude<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> Complex64 {
    if params.alpha_s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    cn(rng) * params.alpha_s.sqrt()
}

/// Integer pairs (m_x, m_y) with (m_x λ/L_x)² + (m_y λ/L_y)² ≤ 1, in
/// lexicographic order.
pub fn wavenumber_support(cfg: &ArrayConfig) -> Vec<(i32, i32)> {
    let (sx, sy) = (cfg.lambda / cfg.l_x(), cfg.lambda / cfg.l_y());
    let mx_max = (1.0 / sx + 1e-9).floor() as i32;
    let my_max = (1.0 / sy + 1e-9).floor() as i32;
    let mut out = Vec::new();
    for mx in -mx_max..=mx_max {
        for my in -my_max..=my_max {
            let r2 = (f64::from(mx) * sx).powi(2) + (f64::from(my) * sy).powi(2);
            if r2 <= 1.0 + 1e-12 {
                out.push((mx, my));
            }
        }
    }
    out
}

/// Spectral density used for σ_i²(m_x, m_y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceProfile {
    /// Isotropic scattering, density ∝ 1/√(k0² − k_x² − k_y²) over the disk.
    #[default]
    Isotropic,
    /// Equal weight on every support point.
    Uniform,
    /// R = A·μ_i·I over the antenna basis (i.i.d. Rayleigh baseline).
    Iid,
}

const PRUNE_REL: f64 = 1e-12;

/// Normalized σ_i² per support entry, summing to one.
///
/// Entries whose cell weight falls below 1e−12 of the largest come back as
/// zero; [`correlation_model_with`] drops them.
pub fn variance_profile(cfg: &ArrayConfig, support: &[(i32, i32)], profile: VarianceProfile) -> Result<Vec<f64>> {
    if support.is_empty() {
        return Err(Error::Model("empty wavenumber support".into()));
    }
    let raw: Vec<f64> = match profile {
        VarianceProfile::Uniform | VarianceProfile::Iid => vec![1.0; support.len()],
        VarianceProfile::Isotropic => {
            let (sx, sy) = (cfg.lambda / cfg.l_x(), cfg.lambda / cfg.l_y());
            // Mirrored cells share one integral.
            let mut cache = std::collections::HashMap::new();
            support
                .iter()
                .map(|&(mx, my)| {
                    let (mut a, mut b) = (mx.abs(), my.abs());
                    if sx == sy && a > b {
                        std::mem::swap(&mut a, &mut b);
                    }
                    *cache.entry((a, b)).or_insert_with(|| isotropic_cell(f64::from(a) * sx, sx, f64::from(b) * sy, sy))
                })
                .collect()
        }
    };
    let max = raw.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::Model("variance profile is identically zero".into()));
    }
    let kept: Vec<f64> = raw.iter().map(|&v| if v < PRUNE_REL * max { 0.0 } else { v }).collect();
    let total: f64 = kept.iter().sum();
    Ok(kept.into_iter().map(|v| v / total).collect())
}

/// ∫∫ du dv /√(1 − u² − v²) over the cell [u0 ± wu/2] × [v0 ± wv/2] cut to
/// the unit disk, in units normalized by k0.
fn isotropic_cell(u0: f64, wu: f64, v0: f64, wv: f64) -> f64 {
    let ua = (u0 - 0.5 * wu).max(-1.0);
    let ub = (u0 + 0.5 * wu).min(1.0);
    if ua >= ub {
        return 0.0;
    }
    let (va, vb) = (v0 - 0.5 * wv, v0 + 0.5 * wv);
    let inner = |u: f64| {
        let a = (1.0 - u * u).max(0.0).sqrt();
        if a == 0.0 {
            return 0.0;
        }
        let s = |v: f64| (v / a).clamp(-1.0, 1.0).asin();
        s(vb) - s(va)
    };
    let q = integrate(inner, ua, ub, 1e-15, 1e-10);
    q.value.max(0.0)
}

/// Semi-unitary Fourier basis, one column per support entry.
pub fn fourier_basis(cfg: &ArrayConfig, params: &ScenarioParams, support: &[(i32, i32)]) -> Result<CMatrix> {
    let mut seen = std::collections::HashSet::new();
    for &(mx, my) in support {
        let class = (mx.rem_euclid(cfg.n_x as i32), my.rem_euclid(cfg.n_y as i32));
        if !seen.insert(class) {
            return Err(Error::Model(format!(
                "support entry ({mx}, {my}) aliases another column on a {}x{} array",
                cfg.n_x, cfg.n_y
            )));
        }
    }
    let pos = positions(cfg);
    let n = cfg.n_total();
    let scale = 1.0 / (n as f64).sqrt();
    let common = Complex64::from_polar(scale, cfg.k0() * params.r_user[2]);
    let (lx, ly) = (cfg.l_x(), cfg.l_y());
    let u = CMatrix::from_fn(n, support.len(), |row, col| {
        let (mx, my) = support[col];
        let p = pos[row];
        let phase = -2.0 * PI * (f64::from(mx) * p[0] / lx + f64::from(my) * p[1] / ly);
        common * Complex64::from_polar(1.0, phase)
    });
    let gram = u.adjoint() * &u;
    let mut worst = 0.0f64;
    for (i, j) in (0..gram.nrows()).flat_map(|i| (0..gram.ncols()).map(move |j| (i, j))) {
        let target = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((gram[(i, j)] - target).norm());
    }
    if worst > 1e-10 {
        return Err(Error::Model(format!("basis is not semi-unitary (max deviation {worst:e})")));
    }
    Ok(u)
}

/// R = U·diag(λ)·Uᴴ held in factored form.
#[derive(Debug, Clone)]
pub struct CorrelatedChannelModel {
    /// Support entry of each column, aligned with `eigs`. Empty for the
    /// i.i.d. baseline, whose basis is the identity.
    pub support: Vec<(i32, i32)>,
    /// σ²(m) = A·μ_i·σ_i²(m), aligned with `eigs`.
    pub variances: Vec<f64>,
    /// N × n semi-unitary basis.
    pub basis: CMatrix,
    /// λ_1 ≥ … ≥ λ_n > 0.
    pub eigs: Vec<f64>,
    pub profile: VarianceProfile,
}

impl CorrelatedChannelModel {
    /// Rank n.
    pub fn rank(&self) -> usize {
        self.eigs.len()
    }

    /// Antenna count N.
    pub fn n_total(&self) -> usize {
        self.basis.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.eigs.iter().sum()
    }

    pub fn lambda1(&self) -> f64 {
        self.eigs[0]
    }

    /// Dense R, for checks on small arrays.
    pub fn correlation_matrix(&self) -> CMatrix {
        let d = CVector::from_iterator(self.rank(), self.eigs.iter().map(|&l| Complex64::from(l)));
        let scaled = CMatrix::from_fn(self.n_total(), self.rank(), |r, c| self.basis[(r, c)] * d[c]);
        scaled * self.basis.adjoint()
    }

    /// Uᴴx.
    pub fn project(&self, x: &CVector) -> CVector {
        self.basis.adjoint() * x
    }

    /// xᴴRx.
    pub fn quad_form(&self, x: &CVector) -> f64 {
        self.project(x).iter().zip(&self.eigs).map(|(g, l)| l * g.norm_sqr()).sum()
    }

    /// Column of U with the largest variance; ties go to the first column,
    /// which is the lexicographically smallest support entry.
    pub fn principal_column(&self) -> CVector {
        self.basis.column(0).into_owned()
    }

    /// U·diag(√λ)·h̄ for coordinates h̄.
    pub fn synthesize(&self, coords: &[Complex64]) -> CVector {
        let w = CVector::from_iterator(self.rank(), coords.iter().zip(&self.eigs).map(|(h, l)| h * l.sqrt()));
        &self.basis * w
    }
}

/// The sensing channel seen from the scattering subspace: h_s = U·g + h⊥.
#[derive(Debug, Clone)]
pub struct SensingProjection {
    /// g = Uᴴh_s.
    pub g: Vec<Complex64>,
    /// ‖h_s‖².
    pub norm_sq: f64,
    /// ‖h⊥‖² = ‖h_s‖² − ‖g‖², clamped at zero.
    pub orth_sq: f64,
}

impl SensingProjection {
    pub fn new(model: &CorrelatedChannelModel, hs: &SensingChannel) -> Self {
        let g: Vec<Complex64> = model.project(&hs.h_s).iter().copied().collect();
        let in_span: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        let orth_sq = (hs.norm_sq - in_span).max(0.0);
        Self { g, norm_sq: hs.norm_sq, orth_sq }
    }

    /// h_sᴴh_c for h_c = U·c, i.e. gᴴc.
    pub fn inner(&self, c: &[Complex64]) -> Complex64 {
        self.g.iter().zip(c).map(|(g, c)| g.conj() * c).sum()
    }

    /// √λ ∘ g.
    pub fn whitened(&self, eigs: &[f64]) -> Vec<Complex64> {
        self.g.iter().zip(eigs).map(|(g, l)| g * l.sqrt()).collect()
    }
}

/// Model for the config: isotropic Fourier model on a holographic array,
/// i.i.d. on a conventional one.
pub fn correlation_model(cfg: &ArrayConfig, params: &ScenarioParams) -> Result<CorrelatedChannelModel> {
    let profile = if cfg.conventional { VarianceProfile::Iid } else { VarianceProfile::Isotropic };
    correlation_model_with(cfg, params, profile)
}

pub fn correlation_model_with(
    cfg: &ArrayConfig,
    params: &ScenarioParams,
    profile: VarianceProfile,
) -> Result<CorrelatedChannelModel> {
    cfg.validate()?;
    params.validate()?;
    if cfg.is_non_square() {
        log_non_square(cfg);
    }
    let n = cfg.n_total();
    if profile == VarianceProfile::Iid {
        return Ok(CorrelatedChannelModel {
            support: Vec::new(),
            variances: vec![params.a_mu_i; n],
            basis: CMatrix::identity(n, n),
            eigs: vec![params.a_mu_i; n],
            profile,
        });
    }
    let support = wavenumber_support(cfg);
    let sigma_i = variance_profile(cfg, &support, profile)?;
    let kept: Vec<usize> = (0..support.len()).filter(|&i| sigma_i[i] > 0.0).collect();
    let support: Vec<(i32, i32)> = kept.iter().map(|&i| support[i]).collect();
    let variances: Vec<f64> = kept.iter().map(|&i| params.a_mu_i * sigma_i[i]).collect();
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_by(|&a, &b| variances[b].total_cmp(&variances[a]));
    let support: Vec<(i32, i32)> = order.iter().map(|&i| support[i]).collect();
    let variances: Vec<f64> = order.iter().map(|&i| variances[i]).collect();
    let basis = fourier_basis(cfg, params, &support)?;
    let eigs = variances.iter().map(|v| n as f64 * v).collect();
    Ok(CorrelatedChannelModel { support, variances, basis, eigs, profile })
}

fn log_non_square(cfg: &ArrayConfig) {
    eprintln!("warning: {}x{} array is not square; element positions use the n_y divisor as written", cfg.n_x, cfg.n_y);
}

/// h̄ ~ CN(0, I_n).
pub fn sample_coords<R: Rng + ?Sized>(model: &CorrelatedChannelModel, rng: &mut R) -> Vec<Complex64> {
    (0..model.rank()).map(|_| cn(rng)).collect()
}

/// h_c = U·diag(√λ)·h̄.
pub fn sample_comm_channel<R: Rng + ?Sized>(model: &CorrelatedChannelModel, rng: &mut R) -> CVector {
    let coords = sample_coords(model, rng);
    model.synthesize(&coords)
}
