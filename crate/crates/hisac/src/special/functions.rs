use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};

/// Euler–Mascheroni constant 𝒞.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const FPMIN: f64 = 1e-300;

/// Exponential integral Ei(x) for x < 0.
///
/// Series below |x| = 8, Lentz continued fraction above.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) || !x.is_finite() {
        return domain(format!("Ei needs a finite negative argument, got {x}"));
    }
    let z = -x;
    Ok(if z < 8.0 { -e1_series(z) } else { -en_scaled_cf(1, z) * (-z).exp() })
}

fn e1_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..400 {
        let kf = k as f64;
        term *= -z / kf;
        let c = term / kf;
        sum += c;
        if c.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

/// e^x·E_n(x) by continued fraction; accurate for x > 1.
fn en_scaled_cf(n: u32, x: f64) -> f64 {
    let nm1 = f64::from(n) - 1.0;
    let mut b = x + f64::from(n);
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let i = i as f64;
        let a = -i * (nm1 + i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// e^x·E_n(x), the scaled generalized exponential integral, for x > 0, n ≥ 1.
///
/// Below x = 1 it runs the forward recurrence
/// e^x E_{k+1}(x) = (1 − x·e^x E_k(x))/k, which is stable there.
pub fn exp_scaled_en(n: u32, x: f64) -> f64 {
    assert!(n >= 1 && x > 0.0);
    if x > 1.0 {
        return en_scaled_cf(n, x);
    }
    let mut r = x.exp() * e1_series(x);
    for k in 1..n {
        r = (1.0 - x * r) / f64::from(k);
    }
    r
}

/// Ergodic rate E{log₂(1 + s·X)} for X ~ Exp(1), i.e. −e^{1/s}Ei(−1/s)·log₂e.
///
/// Shared kernel of every exponential-SNR closed form.
pub fn exponential_ecr(mean_snr: f64) -> f64 {
    if mean_snr <= 0.0 {
        return 0.0;
    }
    if mean_snr.is_infinite() {
        return f64::INFINITY;
    }
    let b = 1.0 / mean_snr;
    let scaled = if b > 1.0 { en_scaled_cf(1, b) } else { b.exp() * e1_series(b) };
    scaled * std::f64::consts::LOG2_E
}

/// Lower incomplete gamma function Υ(s, x).
pub fn lower_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) || !(x >= 0.0) {
        return domain(format!("Υ(s, x) needs s > 0 and x ≥ 0, got s={s}, x={x}"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let lead = s * x.ln() - x;
    Ok(if x < s + 1.0 { lead.exp() * gamma_series(s, x) } else { ln_gamma(s).exp() - lead.exp() * gamma_cf(s, x) })
}

/// Σ_k x^k / (s(s+1)…(s+k)).
fn gamma_series(s: f64, x: f64) -> f64 {
    let mut ap = s;
    let mut term = 1.0 / s;
    let mut sum = term;
    for _ in 0..100_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Continued fraction with Γ(s, x) = x^s e^{−x}·cf.
fn gamma_cf(s: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let i = i as f64;
        let an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// ln P(s, x) where P = Υ(s, x)/Γ(s) is the regularized lower incomplete gamma.
pub fn ln_gamma_p(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let lead = s * x.ln() - x - ln_gamma(s);
    if x < s + 1.0 {
        lead + gamma_series(s, x).ln()
    } else {
        (-(lead.exp() * gamma_cf(s, x))).ln_1p()
    }
}

/// Digamma at a positive integer: ψ(k) = −𝒞 + Σ_{j<k} 1/j.
pub fn digamma(k: u64) -> f64 {
    assert!(k >= 1, "digamma needs k ≥ 1");
    -EULER_GAMMA + (1..k).map(|j| 1.0 / j as f64).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ei_at_minus_one() {
        assert_relative_eq!(exp_integral_ei(-1.0).unwrap(), -0.219_383_934_395_520_3, epsilon = 1e-14);
        assert!(exp_integral_ei(0.0).is_err());
        assert!(exp_integral_ei(2.0).is_err());
    }

    #[test]
    fn regimes_agree_at_switch() {
        let below = -e1_series(8.0);
        let above = -en_scaled_cf(1, 8.0) * (-8.0f64).exp();
        assert_relative_eq!(below, above, epsilon = 1e-13);
    }

    #[test]
    fn scaled_en_branches_meet() {
        for n in [1, 2, 5, 40] {
            let lo = {
                let x = 1.0f64;
                let mut r = x.exp() * e1_series(x);
                for k in 1..n {
                    r = (1.0 - x * r) / f64::from(k);
                }
                r
            };
            assert_relative_eq!(lo, en_scaled_cf(n, 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn upsilon_small_x_asymptote() {
        let (s, x) = (3.0, 1e-6);
        let v = lower_incomplete_gamma(s, x).unwrap();
        assert_relative_eq!(v / (x.powf(s) / s), 1.0, epsilon = 1e-5);
    }

    #[test]
    fn ln_gamma_p_matches_exponential() {
        for x in [0.1, 1.0, 3.0, 30.0] {
            assert_relative_eq!(ln_gamma_p(1.0, x).exp(), 1.0 - (-x).exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn digamma_values() {
        assert_relative_eq!(digamma(1), -EULER_GAMMA);
        assert_relative_eq!(digamma(2), 1.0 - EULER_GAMMA);
        assert_relative_eq!(digamma(10), 2.251_752_589_066_721, epsilon = 1e-13);
    }
}
