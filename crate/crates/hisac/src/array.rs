//! Planar holographic array geometry.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Planar array on the z = 0 plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    /// Elements along x.
    pub n_x: usize,
    /// Elements along y.
    pub n_y: usize,
    /// Inter-element spacing (m).
    pub d: f64,
    /// Radiating area of one element (m²).
    pub a_elem: f64,
    /// Wavelength (m).
    pub lambda: f64,
    /// Allows d ≥ λ/2 and switches the channel to i.i.d. Rayleigh.
    pub conventional: bool,
}

impl ArrayConfig {
    /// 20×20 elements at λ/4 spacing, λ = 0.125 m, A = λ²/64.
    pub fn holographic_default() -> Self {
        let lambda = 0.125;
        Self { n_x: 20, n_y: 20, d: lambda / 4.0, a_elem: lambda * lambda / 64.0, lambda, conventional: false }
    }

    /// 8×8 elements at 5λ/8 spacing over the same 5λ aperture.
    pub fn conventional_default() -> Self {
        let lambda = 0.125;
        Self { n_x: 8, n_y: 8, d: 5.0 * lambda / 8.0, a_elem: lambda * lambda / 64.0, lambda, conventional: true }
    }

    /// Array with `n_x`, `n_y` derived from the aperture and spacing.
    pub fn from_aperture(
        aperture_x: f64,
        aperture_y: f64,
        d: f64,
        a_elem: f64,
        lambda: f64,
        conventional: bool,
    ) -> Result<Self> {
        let count = |l: f64| {
            let n = (l / d).round();
            if n < 1.0 || ((n * d - l).abs() > 1e-9 * l) {
                Err(Error::Config(format!("aperture {l} m is not a whole number of {d} m spacings")))
            } else {
                Ok(n as usize)
            }
        };
        let cfg = Self { n_x: count(aperture_x)?, n_y: count(aperture_y)?, d, a_elem, lambda, conventional };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 || self.n_y == 0 {
            return domain("array needs at least one element per axis");
        }
        if !(self.d > 0.0 && self.a_elem > 0.0 && self.lambda > 0.0) {
            return domain("spacing, element area and wavelength must be positive");
        }
        if self.a_elem.sqrt() > self.d * (1.0 + 1e-12) {
            return domain(format!("element side {} exceeds spacing {}", self.a_elem.sqrt(), self.d));
        }
        if !self.conventional && self.d >= self.lambda / 2.0 {
            return domain(format!("holographic mode needs d < λ/2, got d = {} with λ = {}", self.d, self.lambda));
        }
        Ok(())
    }

    pub fn n_total(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lambda
    }

    pub fn l_x(&self) -> f64 {
        self.n_x as f64 * self.d
    }

    pub fn l_y(&self) -> f64 {
        self.n_y as f64 * self.d
    }

    /// Reference point c = [L_x/2, L_y/2, 0].
    pub fn center(&self) -> [f64; 3] {
        [self.l_x() / 2.0, self.l_y() / 2.0, 0.0]
    }

    /// True when the floor divisor n_y in [`antenna_position`] differs from
    /// the row length n_x.
    pub fn is_non_square(&self) -> bool {
        self.n_x != self.n_y
    }
}

/// Position of element `n` (1-based): [mod(n−1, n_x)·d, ⌊(n−1)/n_y⌋·d, 0].
pub fn antenna_position(cfg: &ArrayConfig, n: usize) -> Result<[f64; 3]> {
    if n == 0 || n > cfg.n_total() {
        return domain(format!("antenna index {n} outside 1..={}", cfg.n_total()));
    }
    let i = n - 1;
    Ok([(i % cfg.n_x) as f64 * cfg.d, (i / cfg.n_y) as f64 * cfg.d, 0.0])
}

/// All element positions in index order.
pub fn positions(cfg: &ArrayConfig) -> Vec<[f64; 3]> {
    (1..=cfg.n_total()).map(|n| antenna_position(cfg, n).expect("index in range")).collect()
}

/// Array occupation ratio η = A/d².
pub fn array_occupation_ratio(cfg: &ArrayConfig) -> f64 {
    cfg.a_elem / (cfg.d * cfg.d)
}
