//! Certified suprema of decaying nonnegative fields.

use super::certificate::TailCertificate;
use super::{QuadError, QuadOptions};
use num_complex::Complex64;

/// Result of a supremum scan. The reported value is a lower bound on the
/// true supremum (grid + local refinement); `attained_inside` records
/// whether the certificate guarantees nothing larger hides beyond the scan
/// radius.
#[derive(Debug, Clone, Copy)]
pub struct SupResult {
    pub sup: f64,
    pub argmax: Complex64,
    pub attained_inside: bool,
    pub scan_radius: f64,
}

/// Maximizes a nonnegative field over the plane. Rings of spacing
/// `grid_step` are scanned outward until the certificate bound falls below
/// the running maximum (and past the bound's peak), then the argmax is
/// polished by shrinking local grids.
pub fn sup_field<F>(
    field: F,
    cert: &TailCertificate,
    grid_step: f64,
    opts: &QuadOptions,
) -> Result<SupResult, QuadError>
where
    F: Fn(Complex64) -> f64,
{
    opts.validate();
    assert!(grid_step > 0.0);
    if !(cert.c > 0.0) {
        return Err(QuadError::UnboundedTail { c: cert.c });
    }
    if cert.r0 > 0.0 {
        cert.verify(&field)?;
    }

    let peak = cert.peak_radius().max(cert.r0);
    let mut best = f64::NEG_INFINITY;
    let mut arg = Complex64::new(0.0, 0.0);
    let mut ring = 0usize;
    let scan_radius;
    loop {
        let r = ring as f64 * grid_step;
        let n_angles = if ring == 0 {
            1
        } else {
            (((std::f64::consts::TAU * r) / grid_step).ceil() as usize).max(16)
        };
        for j in 0..n_angles {
            let theta = std::f64::consts::TAU * (j as f64) / (n_angles as f64);
            let z = Complex64::from_polar(r, theta);
            let v = field(z);
            if !v.is_finite() {
                if v == f64::INFINITY {
                    // An honest infinity: the sup is unbounded.
                    return Ok(SupResult {
                        sup: f64::INFINITY,
                        argmax: z,
                        attained_inside: false,
                        scan_radius: r,
                    });
                }
                return Err(QuadError::NonFiniteSample { at: z, value: v });
            }
            if v > best {
                best = v;
                arg = z;
            }
        }
        if r > peak && (cert.bound(r) < best || cert.bound(r) < 1e-300) {
            scan_radius = r;
            break;
        }
        if r > 1e4 {
            scan_radius = r;
            break;
        }
        ring += 1;
    }

    // Local polish around the grid argmax.
    let (sup, argmax) = refine_local_max(&field, arg, grid_step, 12);
    let best = sup.max(best);
    let attained_inside = best > cert.bound(scan_radius);
    Ok(SupResult { sup: best, argmax, attained_inside, scan_radius })
}

/// Repeated 9x9 local grids, each a third the previous half-width, around a
/// starting point. Returns the refined maximum and its location.
pub fn refine_local_max<F>(
    field: &F,
    start: Complex64,
    half_width: f64,
    rounds: u32,
) -> (f64, Complex64)
where
    F: Fn(Complex64) -> f64,
{
    let mut center = start;
    let mut h = half_width;
    let mut best = field(start);
    for _ in 0..rounds {
        let mut round_best = best;
        let mut round_arg = center;
        for a in -4i32..=4 {
            for b in -4i32..=4 {
                let z = center + Complex64::new(a as f64 * h / 4.0, b as f64 * h / 4.0);
                let v = field(z);
                if v > round_best {
                    round_best = v;
                    round_arg = z;
                }
            }
        }
        best = round_best;
        center = round_arg;
        h /= 3.0;
    }
    (best, center)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_bump_found_at_center() {
        let w = Complex64::new(2.0, 0.0);
        let cert = TailCertificate::new(-w.norm_sqr(), 0.0, 2.0 * w.norm(), 1.0, 0.0).unwrap();
        let res = sup_field(
            move |z: Complex64| (-(z - w).norm_sqr()).exp(),
            &cert,
            0.25,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!(res.attained_inside);
        assert!((res.sup - 1.0).abs() < 1e-9, "sup {}", res.sup);
        assert!((res.argmax - w).norm() < 1e-4);
    }

    #[test]
    fn zero_field_is_not_attained() {
        let cert = TailCertificate::gaussian(1.0, 0.5);
        let res = sup_field(|_| 0.0, &cert, 0.5, &QuadOptions::default()).unwrap();
        assert_eq!(res.sup, 0.0);
        assert!(!res.attained_inside);
    }

    #[test]
    fn rejects_nonpositive_decay() {
        let cert = TailCertificate { log_a: 0.0, k: 0.0, b: 0.0, c: 0.0, r0: 0.0 };
        let err = sup_field(|_| 1.0, &cert, 0.5, &QuadOptions::default());
        assert!(matches!(err, Err(QuadError::UnboundedTail { .. })));
    }
}
