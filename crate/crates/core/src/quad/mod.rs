//! Deterministic quadrature over the complex plane and along segments.
//!
//! Plane integration uses a polar product rule — composite Gauss–Legendre
//! radially, uniform trapezoid angularly — truncated at a radius where the
//! caller-supplied Gaussian tail certificate pushes the neglected mass below
//! tolerance. No Monte Carlo anywhere; every result is reproducible
//! bit-for-bit for a fixed configuration.

mod certificate;
mod legendre;
mod path;
mod plane;
mod sup;

pub use certificate::TailCertificate;
pub use legendre::gauss_legendre;
pub use path::path_integrate;
pub use plane::{plane_integrate, plane_integrate_rays, Estimate, PolarGrid, RayField};
pub use sup::{refine_local_max, sup_field, SupResult};

use num_complex::Complex64;

/// Quadrature failure modes. Divergence of a *norm* is not an error — the
/// norm layer signals that separately — these are hard numeric failures.
#[derive(Debug, Clone, thiserror::Error)]
pub enum QuadError {
    #[error("quadrature did not converge after {refinements} refinements (last delta {last_delta:.3e})")]
    NoConvergence { refinements: u32, last_delta: f64 },
    #[error("tail certificate violated at |z| = {radius:.6}: sample {sample:.6e} exceeds bound {bound:.6e}")]
    CertificateViolation { radius: f64, sample: f64, bound: f64 },
    #[error("no usable Gaussian tail (certificate decay c = {c:.3e} is not positive)")]
    UnboundedTail { c: f64 },
    #[error("non-finite sample {value} at z = {at}")]
    NonFiniteSample { at: Complex64, value: f64 },
}

/// Tolerances and refinement schedule shared by the integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Relative tolerance; accepted range (1e-12, 1e-2).
    pub tol: f64,
    /// Starting Gauss–Legendre order per radial panel.
    pub base_order: usize,
    /// Starting angular node count (kept even).
    pub base_theta: usize,
    /// Maximum number of refinement doublings.
    pub max_refine: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-7,
            base_order: 16,
            base_theta: 64,
            max_refine: 12,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions { tol, ..Default::default() }
    }

    /// The same schedule with one extra grid-refinement doubling built in,
    /// used by the stability checks.
    pub fn refined_once(&self) -> Self {
        QuadOptions {
            base_order: self.base_order * 2,
            base_theta: self.base_theta * 2,
            ..*self
        }
    }

    pub(crate) fn validate(&self) {
        assert!(
            self.tol > 1e-12 && self.tol < 1e-2,
            "tolerance {} outside accepted range (1e-12, 1e-2)",
            self.tol
        );
        assert!(self.base_order >= 2 && self.base_theta >= 16 && self.base_theta % 2 == 0);
    }
}

/// Compensated (Kahan–Babuska) accumulator; summation order is fixed by the
/// callers so results do not depend on thread scheduling.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
