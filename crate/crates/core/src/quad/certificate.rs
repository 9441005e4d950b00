//! Gaussian tail certificates and their closed-form tail mass.

use super::QuadError;
use crate::envelope::log_add;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

/// Certifies `|integrand(z)| <= exp(log_a) (1+|z|)^k exp(b|z| - c|z|^2)` for
/// `|z| >= r0`. The constant is kept in log space; kernel-translated
/// integrands produce constants far beyond f64 range while their actual
/// values stay moderate.
///
/// Certificates are supplied analytically by callers from symbol-class data,
/// never inferred from samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate {
    /// `ln A`, `A >= 0` (`-inf` encodes the zero bound).
    pub log_a: f64,
    /// Power of `(1 + |z|)`, `k >= 0`.
    pub k: f64,
    /// Linear exponent coefficient, `b >= 0`.
    pub b: f64,
    /// Gaussian decay rate, strictly positive.
    pub c: f64,
    /// Radius beyond which the bound is asserted.
    pub r0: f64,
}

impl TailCertificate {
    pub fn new(log_a: f64, k: f64, b: f64, c: f64, r0: f64) -> Result<Self, QuadError> {
        if !(c > 0.0) {
            return Err(QuadError::UnboundedTail { c });
        }
        Ok(TailCertificate { log_a, k: k.max(0.0), b: b.max(0.0), c, r0: r0.max(0.0) })
    }

    /// Plain Gaussian bound `A e^{-c|z|^2}` (no polynomial or linear part).
    pub fn gaussian(a: f64, c: f64) -> Self {
        TailCertificate { log_a: a.ln(), k: 0.0, b: 0.0, c, r0: 0.0 }
    }

    pub fn bound_log(&self, r: f64) -> f64 {
        self.log_a + self.k * r.ln_1p() + self.b * r - self.c * r * r
    }

    pub fn bound(&self, r: f64) -> f64 {
        self.bound_log(r).exp()
    }

    /// Radius of the bound's peak; the bound decreases beyond it.
    pub fn peak_radius(&self) -> f64 {
        // d/dr [k ln(1+r) + b r - c r^2] = k/(1+r) + b - 2cr, strictly
        // decreasing, so one sign change at most.
        let slope = |r: f64| self.k / (1.0 + r) + self.b - 2.0 * self.c * r;
        if slope(0.0) <= 0.0 {
            return 0.0;
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while slope(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return hi;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Upper bound on the plane mass of the certificate beyond radius `R`:
    /// `2 pi * int_R^inf (1+r)^k e^{br - cr^2} r dr`, computed in closed form
    /// through upper incomplete gamma functions (term arithmetic in log
    /// space).
    pub fn tail_mass(&self, r: f64) -> f64 {
        if self.log_a == f64::NEG_INFINITY {
            return 0.0;
        }
        let mu = self.b / (2.0 * self.c);
        if r < mu {
            // Everything in the integrand increases on [r, mu], so the strip
            // is at most its width times the value at mu; the rest is exact.
            let strip_log = std::f64::consts::TAU.ln()
                + (mu - r).ln()
                + mu.ln()
                + self.bound_log(mu);
            return strip_log.exp() + self.tail_mass_beyond_peak(mu, mu);
        }
        self.tail_mass_beyond_peak(r, mu)
    }

    /// Tail for `R >= mu`. Completing the square `br - cr^2 =
    /// c mu^2 - c (r-mu)^2` and substituting `s = r - mu` turns the integral
    /// into gamma-tail pieces `int_S^inf s^l e^{-c s^2} ds`:
    ///
    /// `(1+r)^k r <= (shift + s)^kc (mu + s)` with `shift = 1 + mu` and
    /// `kc = ceil(k)`, expanded binomially.
    fn tail_mass_beyond_peak(&self, r: f64, mu: f64) -> f64 {
        let c = self.c;
        let s = r - mu;
        let kc = self.k.ceil() as i64;
        let shift = 1.0 + mu;
        let mut total_log = f64::NEG_INFINITY;
        for j in 0..=kc {
            let base = ln_binom(kc, j) + (kc - j) as f64 * shift.ln();
            if mu > 0.0 {
                total_log = log_add(total_log, base + mu.ln() + log_half_gamma_tail(j, c, s));
            }
            total_log = log_add(total_log, base + log_half_gamma_tail(j + 1, c, s));
        }
        let log_mass =
            self.log_a + std::f64::consts::TAU.ln() + c * mu * mu + total_log;
        log_mass.exp()
    }

    /// Checks the bound against samples on the circles `|z| = r0, 1.25 r0,
    /// 1.5 r0` (64 points each). A sanity check on the analytic construction,
    /// not a proof.
    pub fn verify<F: Fn(num_complex::Complex64) -> f64>(&self, field: F) -> Result<(), QuadError> {
        for scale in [1.0, 1.25, 1.5] {
            let radius = self.r0 * scale;
            let bound = self.bound(radius) * (1.0 + 1e-9) + 1e-300;
            for j in 0..64 {
                let theta = std::f64::consts::TAU * (j as f64) / 64.0;
                let z = num_complex::Complex64::from_polar(radius, theta);
                let sample = field(z);
                if !sample.is_finite() {
                    return Err(QuadError::NonFiniteSample { at: z, value: sample });
                }
                if sample > bound {
                    return Err(QuadError::CertificateViolation { radius, sample, bound });
                }
            }
        }
        Ok(())
    }
}

/// `ln int_S^inf s^l e^{-c s^2} ds = ln( Gamma((l+1)/2, c S^2) / (2 c^((l+1)/2)) )`.
fn log_half_gamma_tail(l: i64, c: f64, s: f64) -> f64 {
    let a = (l as f64 + 1.0) / 2.0;
    let x = c * s * s;
    // Gamma(a, 0) is the complete gamma; statrs rejects x = 0.
    let log_q = if x > 0.0 { gamma_ur(a, x).ln() } else { 0.0 };
    ln_gamma(a) + log_q - a * c.ln() - std::f64::consts::LN_2
}

fn ln_binom(n: i64, k: i64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}
