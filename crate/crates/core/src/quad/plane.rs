//! Certified plane integration on polar grids.

use super::certificate::TailCertificate;
use super::legendre::gauss_legendre;
use super::{Kahan, QuadError, QuadOptions};
use num_complex::Complex64;
use rayon::prelude::*;

/// Fields evaluated one ray at a time. Pointwise closures get a blanket
/// wrapper; cumulative integrands (operator images) implement this directly
/// so a whole ray costs one sweep.
pub trait RayField: Sync {
    /// Writes field values at `radii[j] * exp(i theta)` into `out`
    /// (cleared first). Radii arrive in ascending order.
    fn eval_ray(&self, theta: f64, radii: &[f64], out: &mut Vec<f64>);

    /// Single-point evaluation; default goes through `eval_ray`.
    fn eval_at(&self, z: Complex64) -> f64 {
        let mut out = Vec::with_capacity(1);
        self.eval_ray(z.arg(), &[z.norm()], &mut out);
        out[0]
    }
}

/// Pointwise closure adaptor.
pub struct Pointwise<F>(pub F);

impl<F: Fn(Complex64) -> f64 + Sync> RayField for Pointwise<F> {
    fn eval_ray(&self, theta: f64, radii: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let dir = Complex64::from_polar(1.0, theta);
        out.extend(radii.iter().map(|&r| (self.0)(r * dir)));
    }

    fn eval_at(&self, z: Complex64) -> f64 {
        (self.0)(z)
    }
}

/// Radial panel layout for one refinement level.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    /// Node radii across all panels, ascending.
    pub radii: Vec<f64>,
    /// Matching radial quadrature weights including the Jacobian factor `r`.
    pub weights: Vec<f64>,
    /// Angular node count.
    pub n_theta: usize,
    /// Truncation radius.
    pub r_trunc: f64,
}

impl PolarGrid {
    /// Panels of width at most one, each carrying a Gauss–Legendre rule of
    /// the given order.
    pub fn build(r_trunc: f64, order: usize, n_theta: usize) -> Self {
        let n_panels = (r_trunc.ceil() as usize).max(1);
        let rule = gauss_legendre(order);
        let mut radii = Vec::with_capacity(n_panels * order);
        let mut weights = Vec::with_capacity(n_panels * order);
        for p in 0..n_panels {
            let lo = r_trunc * (p as f64) / (n_panels as f64);
            let hi = r_trunc * ((p + 1) as f64) / (n_panels as f64);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (&x, &w) in rule.0.iter().zip(rule.1.iter()) {
                let r = mid + half * x;
                radii.push(r);
                weights.push(w * half * r);
            }
        }
        PolarGrid { radii, weights, n_theta, r_trunc }
    }

    /// Integrates the field over the disc of radius `r_trunc`. Rays are
    /// evaluated in parallel; the cross-ray reduction runs in a fixed order
    /// so the result is independent of scheduling.
    pub fn integrate<R: RayField>(&self, field: &R) -> Result<f64, QuadError> {
        let ray_sums: Result<Vec<f64>, QuadError> = (0..self.n_theta)
            .into_par_iter()
            .map(|j| {
                let theta = std::f64::consts::TAU * (j as f64) / (self.n_theta as f64);
                let mut samples = Vec::with_capacity(self.radii.len());
                field.eval_ray(theta, &self.radii, &mut samples);
                let mut acc = Kahan::default();
                for (s, w) in samples.iter().zip(self.weights.iter()) {
                    if !s.is_finite() {
                        return Err(QuadError::NonFiniteSample {
                            at: Complex64::from_polar(1.0, theta),
                            value: *s,
                        });
                    }
                    acc.add(s * w);
                }
                Ok(acc.value())
            })
            .collect();
        let ray_sums = ray_sums?;
        let mut total = Kahan::default();
        for s in ray_sums {
            total.add(s);
        }
        Ok(total.value() * std::f64::consts::TAU / (self.n_theta as f64))
    }
}

/// A certified integral value.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    /// Successive-refinement delta plus the certified tail mass.
    pub error: f64,
    pub r_trunc: f64,
    pub refinements: u32,
}

/// Integrates a nonnegative field over the plane. The truncation radius is
/// pushed out until the certificate tail drops below `tol` times the current
/// estimate, then panel order and angular count double until two successive
/// estimates agree to `tol`.
pub fn plane_integrate<F>(
    field: F,
    cert: &TailCertificate,
    opts: &QuadOptions,
) -> Result<Estimate, QuadError>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    plane_integrate_rays(&Pointwise(field), cert, opts)
}

pub fn plane_integrate_rays<R: RayField>(
    field: &R,
    cert: &TailCertificate,
    opts: &QuadOptions,
) -> Result<Estimate, QuadError> {
    opts.validate();
    if !(cert.c > 0.0) {
        return Err(QuadError::UnboundedTail { c: cert.c });
    }
    if cert.r0 > 0.0 {
        cert.verify(|z| field.eval_at(z))?;
    }

    let mu = cert.b / (2.0 * cert.c);
    let init_theta = initial_theta(opts.base_theta, mu, cert.c);

    // Truncation radius: grow until the certified tail is below tolerance
    // relative to a coarse estimate at that radius. Start where the bound
    // has already dropped by a factor of tol past its peak.
    let peak = cert.peak_radius();
    let drop = ((-opts.tol.ln() + 5.0) / cert.c).sqrt();
    let mut r_trunc = (peak + drop).max(cert.r0).max(1.0);
    let mut coarse = 0.0;
    for _ in 0..200 {
        let grid = PolarGrid::build(r_trunc, opts.base_order, init_theta);
        coarse = grid.integrate(field)?;
        let tail = cert.tail_mass(r_trunc);
        if tail <= opts.tol * coarse.abs().max(1e-300) {
            break;
        }
        r_trunc *= 1.3;
        if r_trunc > 1e5 {
            return Err(QuadError::NoConvergence { refinements: 0, last_delta: tail });
        }
    }
    let tail = cert.tail_mass(r_trunc);

    let mut prev = coarse;
    let mut order = opts.base_order;
    let mut n_theta = init_theta;
    for refinement in 1..=opts.max_refine {
        order *= 2;
        n_theta *= 2;
        let grid = PolarGrid::build(r_trunc, order, n_theta);
        let value = grid.integrate(field)?;
        let delta = (value - prev).abs();
        if delta <= opts.tol * value.abs().max(1e-300) {
            return Ok(Estimate {
                value,
                error: delta + tail,
                r_trunc,
                refinements: refinement,
            });
        }
        prev = value;
    }
    Err(QuadError::NoConvergence {
        refinements: opts.max_refine,
        last_delta: (prev - coarse).abs(),
    })
}

/// Off-center Gaussian bumps need the angular step to resolve a feature of
/// width ~ 1/sqrt(c) sitting at radius mu.
fn initial_theta(base: usize, mu: f64, c: f64) -> usize {
    let needed = (16.0 * mu * c.sqrt()).ceil() as usize + 16;
    let mut n = base.max(needed.next_multiple_of(2));
    if n > 16384 {
        n = 16384;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(tol: f64) -> QuadOptions {
        QuadOptions::with_tol(tol)
    }

    #[test]
    fn gaussian_integrates_to_pi() {
        let cert = TailCertificate::gaussian(1.0, 1.0);
        let est = plane_integrate(|z: Complex64| (-z.norm_sqr()).exp(), &cert, &opts(1e-8))
            .unwrap();
        let err = (est.value - std::f64::consts::PI).abs() / std::f64::consts::PI;
        assert!(err < 1e-8, "relative error {err}");
    }

    #[test]
    fn second_moment_matches_closed_form() {
        // int |z|^2 e^{-|z|^2} dm = pi * 1! / 1^2 = pi
        let cert = TailCertificate::new(0.5f64.ln(), 2.0, 0.0, 1.0, 0.0).unwrap();
        let est = plane_integrate(
            |z: Complex64| z.norm_sqr() * (-z.norm_sqr()).exp(),
            &cert,
            &opts(1e-8),
        )
        .unwrap();
        let err = (est.value - std::f64::consts::PI).abs() / std::f64::consts::PI;
        assert!(err < 1e-8, "relative error {err}");
    }

    /// Independent 1-D adaptive Simpson oracle for radial integrands.
    pub fn radial_oracle<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> f64 {
        fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth > 40 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                recurse(f, a, m, left, tol / 2.0, depth + 1)
                    + recurse(f, m, b, right, tol / 2.0, depth + 1)
            }
        }
        recurse(f, lo, hi, simpson(f, lo, hi), tol, 0)
    }

    #[test]
    fn damped_gaussian_matches_radial_oracle() {
        let cert = TailCertificate::gaussian(1.0, 1.0);
        let est = plane_integrate(
            |z: Complex64| (-z.norm_sqr()).exp() / (1.0 + z.norm()).powi(2),
            &cert,
            &opts(1e-9),
        )
        .unwrap();
        let oracle = std::f64::consts::TAU
            * radial_oracle(
                &|r: f64| r * (-r * r).exp() / (1.0 + r).powi(2),
                0.0,
                14.0,
                1e-13,
            );
        let err = (est.value - oracle).abs() / oracle;
        assert!(err < 1e-9, "relative error {err}: {} vs {oracle}", est.value);
    }

    #[test]
    fn rotation_invariance() {
        let cert = TailCertificate::new(2.0f64.ln(), 3.0, 0.0, 0.5, 0.0).unwrap();
        let base = |z: Complex64| {
            (z.re - 0.7).powi(2) * (1.0 + z.im.powi(2)).sqrt() * (-0.5 * z.norm_sqr()).exp()
        };
        let tol = 1e-7;
        let plain = plane_integrate(base, &cert, &opts(tol)).unwrap().value;
        for theta in [std::f64::consts::PI / 7.0, std::f64::consts::PI / 3.0] {
            let rot = Complex64::from_polar(1.0, theta);
            let rotated = plane_integrate(move |z: Complex64| base(rot * z), &cert, &opts(tol))
                .unwrap()
                .value;
            let err = (plain - rotated).abs() / plain.abs();
            assert!(err < 2.0 * tol, "rotation {theta}: {err}");
        }
    }

    #[test]
    fn doubling_stays_within_reported_error() {
        let cert = TailCertificate::gaussian(1.0, 1.0);
        let integrands: Vec<(Box<dyn Fn(Complex64) -> f64 + Sync>, &str)> = vec![
            (Box::new(|z: Complex64| (-z.norm_sqr()).exp()), "gaussian"),
            (
                Box::new(|z: Complex64| z.norm_sqr() * (-z.norm_sqr()).exp()),
                "moment",
            ),
            (
                Box::new(|z: Complex64| (-z.norm_sqr()).exp() / (1.0 + z.norm()).powi(2)),
                "damped",
            ),
        ];
        for (f, name) in integrands {
            let base = plane_integrate(&f, &cert, &opts(1e-7)).unwrap();
            let refined_opts = QuadOptions { tol: 1e-7, ..Default::default() }.refined_once();
            let refined = plane_integrate(&f, &cert, &refined_opts).unwrap();
            assert!(
                (refined.value - base.value).abs() <= base.error.max(1e-14),
                "{name}: delta {} vs reported {}",
                (refined.value - base.value).abs(),
                base.error
            );
        }
    }

    #[test]
    fn certificate_violation_is_detected() {
        let cert = TailCertificate::new(0.0, 0.0, 0.0, 2.0, 1.0).unwrap();
        // field decays like e^{-|z|^2} but the certificate claims e^{-2|z|^2}
        let result = plane_integrate(|z: Complex64| (-z.norm_sqr()).exp(), &cert, &opts(1e-6));
        assert!(matches!(result, Err(QuadError::CertificateViolation { .. })));
    }

    #[test]
    fn off_center_bump_with_linear_term() {
        // e^{-|z - w|^2} with |w| = 6: certificate carries b = 2|w|.
        let w = Complex64::new(6.0, 0.0);
        let cert =
            TailCertificate::new(-w.norm_sqr(), 0.0, 2.0 * w.norm(), 1.0, 0.0).unwrap();
        let est = plane_integrate(
            move |z: Complex64| (-(z - w).norm_sqr()).exp(),
            &cert,
            &opts(1e-8),
        )
        .unwrap();
        let err = (est.value - std::f64::consts::PI).abs() / std::f64::consts::PI;
        assert!(err < 1e-8, "relative error {err}");
    }
}
