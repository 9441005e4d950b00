//! Composite Gauss–Legendre integration along the straight segment from the
//! origin. Integrands here are entire, so the value is path-independent and
//! the segment is the canonical choice.

use super::legendre::gauss_legendre;
use super::{Kahan, QuadError, QuadOptions};
use num_complex::Complex64;

const PATH_ORDER: usize = 16;

/// `int_0^endpoint h(w) dw` along the straight segment, panel count doubled
/// until two successive estimates agree to `opts.tol`.
pub fn path_integrate<F>(
    h: F,
    endpoint: Complex64,
    opts: &QuadOptions,
) -> Result<Complex64, QuadError>
where
    F: Fn(Complex64) -> Complex64,
{
    opts.validate();
    if endpoint == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut panels = 1usize;
    let mut prev = segment_sum(&h, endpoint, panels)?;
    for refinement in 1..=opts.max_refine {
        panels *= 2;
        let value = segment_sum(&h, endpoint, panels)?;
        let delta = (value - prev).norm();
        if delta <= opts.tol * value.norm().max(1e-300) {
            return Ok(value);
        }
        prev = value;
        let _ = refinement;
    }
    Err(QuadError::NoConvergence {
        refinements: opts.max_refine,
        last_delta: (prev - segment_sum(&h, endpoint, panels)?).norm(),
    })
}

fn segment_sum<F>(h: &F, endpoint: Complex64, panels: usize) -> Result<Complex64, QuadError>
where
    F: Fn(Complex64) -> Complex64,
{
    let rule = gauss_legendre(PATH_ORDER);
    let mut re = Kahan::default();
    let mut im = Kahan::default();
    for p in 0..panels {
        let lo = p as f64 / panels as f64;
        let hi = (p + 1) as f64 / panels as f64;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (&x, &w) in rule.0.iter().zip(rule.1.iter()) {
            let t = mid + half * x;
            let value = h(endpoint * t);
            if !value.re.is_finite() || !value.im.is_finite() {
                return Err(QuadError::NonFiniteSample { at: endpoint * t, value: value.re });
            }
            re.add(w * half * value.re);
            im.add(w * half * value.im);
        }
    }
    Ok(endpoint * Complex64::new(re.value(), im.value()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> QuadOptions {
        QuadOptions::with_tol(1e-11)
    }

    #[test]
    fn constant_integrand_gives_endpoint() {
        let z = Complex64::new(1.3, -2.1);
        let got = path_integrate(|_| Complex64::new(1.0, 0.0), z, &opts()).unwrap();
        assert!((got - z).norm() < 1e-12);
    }

    #[test]
    fn identity_integrand_gives_half_square() {
        let z = Complex64::new(0.4, 2.2);
        let got = path_integrate(|w| w, z, &opts()).unwrap();
        assert!((got - z * z / 2.0).norm() < 1e-12);
    }

    #[test]
    fn exponential_matches_antiderivative() {
        let z = Complex64::new(1.0, 1.0);
        let got = path_integrate(|w| w.exp(), z, &opts()).unwrap();
        let expect = z.exp() - 1.0;
        assert!((got - expect).norm() < 1e-10 * expect.norm());
    }

    #[test]
    fn zero_endpoint_short_circuits() {
        let got = path_integrate(|w| w.exp(), Complex64::new(0.0, 0.0), &opts()).unwrap();
        assert_eq!(got, Complex64::new(0.0, 0.0));
    }
}
