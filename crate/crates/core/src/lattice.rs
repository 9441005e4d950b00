//! r/2-lattices, disc measures for densities and pushforwards, the
//! Berezin-type measure transform, and the three-way norm equivalence
//! report.

use crate::fock::Exponent;
use crate::quad::{plane_integrate, sup_field, Kahan, QuadError, QuadOptions, TailCertificate};
use crate::symbol::{EntireExpr, SymbolClass};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Square lattice whose radius-`r` discs cover the plane while the
/// radius-`r/2` discs stay disjoint (spacing `r sqrt(2)`: covering radius
/// exactly `r`, minimum node distance `r sqrt(2) >= r`).
#[derive(Debug, Clone)]
pub struct Lattice {
    pub r: f64,
    pub spacing: f64,
    pub points: Vec<Complex64>,
    pub r_lattice: f64,
}

pub fn make_lattice(r: f64, r_lattice: f64) -> Lattice {
    assert!(r > 0.0 && r_lattice >= 0.0);
    let spacing = r * std::f64::consts::SQRT_2;
    let n = (r_lattice / spacing).ceil() as i64;
    let mut points = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            let z = Complex64::new(a as f64 * spacing, b as f64 * spacing);
            if z.norm() <= r_lattice {
                points.push(z);
            }
        }
    }
    Lattice { r, spacing, points, r_lattice }
}

impl Lattice {
    /// Nearest-node distance from `z` (brute force; lattices here are small).
    pub fn nearest_distance(&self, z: Complex64) -> f64 {
        self.points
            .iter()
            .map(|p| (z - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of discs `D(z_j, 2r)` containing `z`.
    pub fn overlap_count(&self, z: Complex64) -> usize {
        self.points.iter().filter(|p| (z - *p).norm() < 2.0 * self.r).count()
    }

    /// Minimum pairwise node distance (for the r/2-disjointness invariant).
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }
}

/// A nonnegative plane measure: either a density `h dm` or the pushforward
/// `(h dm) o psi^{-1}` of one by an entire symbol.
#[derive(Clone)]
pub struct PlaneMeasure {
    pub h: Arc<dyn Fn(Complex64) -> f64 + Send + Sync>,
    pub cert: TailCertificate,
    /// `None` for a plain density; `Some(psi)` for the pushforward by `psi`.
    pub pushforward: Option<EntireExpr>,
}

impl std::fmt::Debug for PlaneMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlaneMeasure")
            .field("cert", &self.cert)
            .field("pushforward", &self.pushforward.as_ref().map(|p| p.to_text()))
            .finish()
    }
}

impl PlaneMeasure {
    pub fn density<F>(h: F, cert: TailCertificate) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        PlaneMeasure { h: Arc::new(h), cert, pushforward: None }
    }

    pub fn pushforward<F>(h: F, cert: TailCertificate, psi: EntireExpr) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        PlaneMeasure { h: Arc::new(h), cert, pushforward: Some(psi) }
    }

    /// Total mass, `int h dm` (pushforwards preserve mass).
    pub fn total_mass(&self, opts: &QuadOptions) -> Result<f64, QuadError> {
        let h = Arc::clone(&self.h);
        Ok(plane_integrate(move |z| h(z), &self.cert, opts)?.value)
    }

    /// Converts a pushforward by an affine symbol into the equivalent
    /// density (`h((u-b)/a) / |a|^2 dm(u)`); identity on plain densities.
    /// `None` when `psi` is not affine with nonzero slope.
    pub fn as_density(&self) -> Option<PlaneMeasure> {
        let Some(psi) = &self.pushforward else {
            return Some(self.clone());
        };
        let (a, b) = affine_parts(psi)?;
        if a.norm() == 0.0 {
            return None;
        }
        let h = Arc::clone(&self.h);
        let jac = 1.0 / a.norm_sqr();
        let new_h = move |u: Complex64| h((u - b) / a) * jac;
        // |z| = |u-b|/|a| >= (|u| - |b|)/|a|: rewrite the certificate in u.
        let inv_a = 1.0 / a.norm();
        let c = self.cert.c * inv_a * inv_a;
        let shift = b.norm();
        let cert = TailCertificate {
            log_a: self.cert.log_a
                + jac.ln()
                + self.cert.k * (1.0 + shift * inv_a).ln()
                + self.cert.b * shift * inv_a
                + c * shift * shift,
            k: self.cert.k,
            b: self.cert.b * inv_a + 2.0 * c * shift,
            c,
            r0: self.cert.r0 * a.norm() + shift,
        };
        Some(PlaneMeasure { h: Arc::new(new_h), cert, pushforward: None })
    }
}

/// Affine coefficients `(a, b)` of `psi(z) = a z + b` when `psi` classifies
/// as constant or degree-one polynomial.
pub fn affine_parts(psi: &EntireExpr) -> Option<(Complex64, Complex64)> {
    match psi.class() {
        SymbolClass::Zero => Some((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))),
        SymbolClass::Constant(c) => Some((Complex64::new(0.0, 0.0), *c)),
        SymbolClass::Polynomial(coeffs) if coeffs.len() == 2 => Some((coeffs[1], coeffs[0])),
        _ => None,
    }
}

/// `mu(D(center, radius))`. The disc indicator is resolved by recursive
/// cell subdivision at the boundary (depth 8); cells certified fully inside
/// integrate the density with a fixed Gauss–Legendre product rule.
pub fn disc_measure(
    mu: &PlaneMeasure,
    center: Complex64,
    radius: f64,
    _opts: &QuadOptions,
) -> Result<f64, QuadError> {
    assert!(radius > 0.0);
    match &mu.pushforward {
        None => {
            let region = DiscRegion { psi: None, center, radius };
            Ok(cell_integrate(&*mu.h, &region, region_box(center, radius)))
        }
        Some(psi) => {
            let region_bx = preimage_box(psi, center, radius)?;
            let h = &*mu.h;
            match region_bx {
                Preimage::Empty => Ok(0.0),
                Preimage::WholePlane => {
                    // Pushforwards preserve mass.
                    let hh = Arc::clone(&mu.h);
                    Ok(plane_integrate(move |z| hh(z), &mu.cert, _opts)?.value)
                }
                Preimage::Box(bx) => {
                    let deriv = psi.differentiate();
                    let lip = crate::envelope::GrowthEnvelope::of(&deriv).ok_or(
                        QuadError::NoConvergence { refinements: 0, last_delta: f64::NAN },
                    )?;
                    let region =
                        DiscRegion { psi: Some((psi.clone(), lip)), center, radius };
                    Ok(cell_integrate(h, &region, bx))
                }
            }
        }
    }
}

/// Certified inside/outside/boundary classification of cells against the
/// (pre-image of the) disc. For a pushforward, the symbol's derivative
/// envelope gives a Lipschitz constant on the cell, so classifications are
/// sound rather than sampled.
struct DiscRegion {
    psi: Option<(EntireExpr, crate::envelope::GrowthEnvelope)>,
    center: Complex64,
    radius: f64,
}

#[derive(PartialEq, Clone, Copy)]
enum CellClass {
    Inside,
    Outside,
    Boundary,
}

impl DiscRegion {
    fn classify(&self, cell: Box2) -> CellClass {
        let mid = 0.5 * (cell.lo + cell.hi);
        let half_diag = 0.5 * (cell.hi - cell.lo).norm();
        let (image_mid, slack) = match &self.psi {
            None => (mid, half_diag),
            Some((psi, lip_env)) => {
                let far = mid.norm() + half_diag;
                let lip = lip_env.bound_log(far).exp();
                (psi.eval(mid), lip * half_diag)
            }
        };
        let d = (image_mid - self.center).norm();
        if d + slack <= self.radius {
            CellClass::Inside
        } else if d - slack > self.radius {
            CellClass::Outside
        } else {
            CellClass::Boundary
        }
    }

    fn contains(&self, z: Complex64) -> bool {
        let image = match &self.psi {
            None => z,
            Some((psi, _)) => psi.eval(z),
        };
        (image - self.center).norm() <= self.radius
    }
}

#[derive(Debug, Clone, Copy)]
struct Box2 {
    lo: Complex64,
    hi: Complex64,
}

fn region_box(center: Complex64, radius: f64) -> Box2 {
    Box2 {
        lo: center - Complex64::new(radius, radius),
        hi: center + Complex64::new(radius, radius),
    }
}

enum Preimage {
    Empty,
    WholePlane,
    Box(Box2),
}

/// Bounding box of `psi^{-1}(D(center, radius))`: exact disc for affine
/// `psi`, a growth-bound search box for higher-degree polynomials.
fn preimage_box(psi: &EntireExpr, center: Complex64, radius: f64) -> Result<Preimage, QuadError> {
    if let Some((a, b)) = affine_parts(psi) {
        if a.norm() == 0.0 {
            return Ok(if (b - center).norm() <= radius {
                Preimage::WholePlane
            } else {
                Preimage::Empty
            });
        }
        let pre_center = (center - b) / a;
        let pre_radius = radius / a.norm();
        return Ok(Preimage::Box(region_box(pre_center, pre_radius)));
    }
    let SymbolClass::Polynomial(coeffs) = psi.class() else {
        // Entire non-polynomial pushforwards have unbounded preimages of
        // discs in general; outside this artifact's scope.
        return Err(QuadError::NoConvergence { refinements: 0, last_delta: f64::NAN });
    };
    // |psi(z)| >= |lead| R^d - sum |a_j| R^j -> target reachable radius.
    let target = center.norm() + radius;
    let lead = coeffs.last().unwrap().norm();
    let rest: f64 = coeffs[..coeffs.len() - 1].iter().map(|c| c.norm()).sum();
    let d = (coeffs.len() - 1) as i32;
    let mut rad = 1.0f64;
    while lead * rad.powi(d) - rest * rad.powi(d - 1).max(1.0) <= target {
        rad *= 2.0;
        if rad > 1e6 {
            return Err(QuadError::NoConvergence { refinements: 0, last_delta: f64::NAN });
        }
    }
    Ok(Preimage::Box(region_box(Complex64::new(0.0, 0.0), rad)))
}

const SUBDIVIDE_DEPTH: u32 = 8;
const CELL_RULE: usize = 4;

/// Integral of `h` over the region within the box; boundary cells
/// subdivided recursively.
fn cell_integrate<F>(h: &F, region: &DiscRegion, bx: Box2) -> f64
where
    F: Fn(Complex64) -> f64 + ?Sized,
{
    let width = (bx.hi.re - bx.lo.re).max(bx.hi.im - bx.lo.im);
    let n = 8usize;
    let step = width / n as f64;
    let mut acc = Kahan::default();
    for i in 0..n {
        for j in 0..n {
            let lo = bx.lo + Complex64::new(i as f64 * step, j as f64 * step);
            let cell = Box2 { lo, hi: lo + Complex64::new(step, step) };
            acc.add(cell_recurse(h, region, cell, 0));
        }
    }
    acc.value()
}

fn cell_recurse<F>(h: &F, region: &DiscRegion, cell: Box2, depth: u32) -> f64
where
    F: Fn(Complex64) -> f64 + ?Sized,
{
    match region.classify(cell) {
        CellClass::Outside => 0.0,
        // Deep interior cells are tiny; midpoint times area is already
        // below the subdivision error floor.
        CellClass::Inside if depth >= 3 => cell_midpoint(h, cell),
        CellClass::Inside => cell_gauss(h, cell),
        CellClass::Boundary => {
            if depth >= SUBDIVIDE_DEPTH {
                // Resolution floor: weight by a sampled inside fraction.
                let mut inside = 0;
                for i in 0..4 {
                    for j in 0..4 {
                        let z = cell.lo
                            + Complex64::new(
                                (i as f64 + 0.5) / 4.0 * (cell.hi.re - cell.lo.re),
                                (j as f64 + 0.5) / 4.0 * (cell.hi.im - cell.lo.im),
                            );
                        if region.contains(z) {
                            inside += 1;
                        }
                    }
                }
                return cell_midpoint(h, cell) * inside as f64 / 16.0;
            }
            let mid = 0.5 * (cell.lo + cell.hi);
            let quads = [
                Box2 { lo: cell.lo, hi: mid },
                Box2 {
                    lo: Complex64::new(mid.re, cell.lo.im),
                    hi: Complex64::new(cell.hi.re, mid.im),
                },
                Box2 {
                    lo: Complex64::new(cell.lo.re, mid.im),
                    hi: Complex64::new(mid.re, cell.hi.im),
                },
                Box2 { lo: mid, hi: cell.hi },
            ];
            quads.iter().map(|q| cell_recurse(h, region, *q, depth + 1)).sum()
        }
    }
}

fn cell_midpoint<F>(h: &F, cell: Box2) -> f64
where
    F: Fn(Complex64) -> f64 + ?Sized,
{
    let mid = 0.5 * (cell.lo + cell.hi);
    h(mid) * (cell.hi.re - cell.lo.re) * (cell.hi.im - cell.lo.im)
}

fn cell_gauss<F>(h: &F, cell: Box2) -> f64
where
    F: Fn(Complex64) -> f64 + ?Sized,
{
    let rule = crate::quad::gauss_legendre(CELL_RULE);
    let hx = 0.5 * (cell.hi.re - cell.lo.re);
    let hy = 0.5 * (cell.hi.im - cell.lo.im);
    let cx = 0.5 * (cell.hi.re + cell.lo.re);
    let cy = 0.5 * (cell.hi.im + cell.lo.im);
    let mut acc = 0.0;
    for (&x, &wx) in rule.0.iter().zip(rule.1.iter()) {
        for (&y, &wy) in rule.0.iter().zip(rule.1.iter()) {
            acc += wx * wy * h(Complex64::new(cx + hx * x, cy + hy * y));
        }
    }
    acc * hx * hy
}

/// The Berezin-type transform of a measure:
/// `mu~_q(w) = int (1+|w|)^q |k_w(zeta)|^q e^{-alpha q |zeta|^2/2} dmu(zeta)`.
/// Pushforwards are pulled back to the base density.
pub fn mu_tilde(
    mu: &PlaneMeasure,
    q: f64,
    alpha: f64,
    w: Complex64,
    opts: &QuadOptions,
) -> Result<f64, QuadError> {
    assert!(q >= 0.0);
    let log_pref = q * w.norm().ln_1p();
    let kernel_log = move |zeta: Complex64| {
        // |k_w(zeta)|^q e^{-alpha q |zeta|^2 / 2} = e^{-alpha q |zeta - w|^2 / 2}
        -0.5 * alpha * q * (zeta - w).norm_sqr()
    };
    match &mu.pushforward {
        None => {
            let h = Arc::clone(&mu.h);
            let integrand =
                move |zeta: Complex64| (log_pref + kernel_log(zeta)).exp() * h(zeta);
            // kernel factor <= 1; certificate of h lifted by the prefactor
            let cert = TailCertificate {
                log_a: mu.cert.log_a + log_pref,
                ..mu.cert
            };
            Ok(plane_integrate(integrand, &cert, opts)?.value)
        }
        Some(psi) => {
            let h = Arc::clone(&mu.h);
            let psi = psi.clone();
            let integrand =
                move |z: Complex64| (log_pref + kernel_log(psi.eval(z))).exp() * h(z);
            let cert = TailCertificate {
                log_a: mu.cert.log_a + log_pref,
                ..mu.cert
            };
            Ok(plane_integrate(integrand, &cert, opts)?.value)
        }
    }
}

/// `D_{r q mu}(z) = (1+|z|)^q mu(D(z, r))`.
pub fn d_rq(
    mu: &PlaneMeasure,
    q: f64,
    r: f64,
    z: Complex64,
    opts: &QuadOptions,
) -> Result<f64, QuadError> {
    Ok((1.0 + z.norm()).powf(q) * disc_measure(mu, z, r, opts)?)
}

/// The three norms of the basic equivalence and their pairwise ratios.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EquivalenceReport {
    pub mu_tilde_norm: f64,
    pub d_rq_norm: f64,
    pub sequence_norm: f64,
    /// (mu~/D, mu~/seq, D/seq)
    pub ratios: [f64; 3],
}

/// Lattice truncation radius where the measure's certificate bound drops
/// below `1e-12` of its peak.
pub fn default_lattice_radius(cert: &TailCertificate) -> f64 {
    let peak = cert.peak_radius();
    let peak_log = cert.bound_log(peak);
    let target = peak_log - 12.0 * std::f64::consts::LN_10;
    let mut r = peak.max(1.0);
    while cert.bound_log(r) > target && r < 1e4 {
        r += 0.25;
    }
    r
}

/// Certificate in `w` for `mu~_q(w)` of a density with certificate `hc`:
/// completing the square in the Gaussian convolution leaves decay
/// `kappa = gamma c / (gamma + c)` with `gamma = alpha q / 2`; the shifted
/// moment integral is folded in through the certificate's own tail mass at
/// zero radius.
fn mu_tilde_w_certificate(hc: &TailCertificate, q: f64, alpha: f64) -> TailCertificate {
    let gamma = 0.5 * alpha * q;
    let kappa = gamma * hc.c / (gamma + hc.c);
    let moment = TailCertificate {
        log_a: 0.0,
        k: hc.k,
        b: hc.b,
        c: gamma + hc.c,
        r0: 0.0,
    }
    .tail_mass(0.0);
    TailCertificate {
        log_a: hc.log_a + moment.ln(),
        k: hc.k + q,
        b: hc.b,
        c: kappa,
        r0: 0.0,
    }
}

/// Certificate in `z` for `D_{r q mu}(z)`: the disc mass is at most
/// `pi r^2` times the sup of the density bound over the disc.
fn d_rq_z_certificate(hc: &TailCertificate, q: f64, r: f64) -> TailCertificate {
    TailCertificate {
        log_a: hc.log_a
            + (std::f64::consts::PI * r * r).ln()
            + hc.k * (1.0 + r).ln()
            + hc.b * r,
        k: hc.k + q,
        b: hc.b + 2.0 * hc.c * r,
        c: hc.c,
        r0: hc.r0 + r,
    }
}

/// `L^p` norm of a nonnegative field under a certificate: integral of the
/// `p`-th power for finite `p` (no triangle inequality needed, so `p < 1`
/// is handled identically), supremum scan for `p = inf`.
fn field_lp_norm<F>(
    field: F,
    cert: &TailCertificate,
    p: Exponent,
    opts: &QuadOptions,
) -> Result<f64, QuadError>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    match p {
        Exponent::Finite(p) => {
            let powered = |z: Complex64| field(z).powf(p);
            let cert_p = TailCertificate {
                log_a: cert.log_a * p,
                k: cert.k * p,
                b: cert.b * p,
                c: cert.c * p,
                r0: cert.r0,
            };
            Ok(plane_integrate(powered, &cert_p, opts)?.value.powf(1.0 / p))
        }
        Exponent::Infinity => Ok(sup_field(field, cert, 0.5, opts)?.sup),
    }
}

/// Computes `||mu~_q||_{L^p}`, `||D_{r q mu}||_{L^p}`, and the lattice
/// sequence norm `||((1+|z_j|)^q mu(D(z_j,r)))_j||_{l^p}`, plus their
/// pairwise ratios.
///
/// Pushforward measures must be affine with nonzero slope (they fold back
/// to densities, keeping the outer-variable tail certificates analytic).
/// Field evaluations run at a relaxed inner tolerance; the equivalence
/// windows under scrutiny are order-of-magnitude, not high-precision.
pub fn equivalence_report(
    mu: &PlaneMeasure,
    q: f64,
    p: Exponent,
    r: f64,
    alpha: f64,
    lattice: &Lattice,
    opts: &QuadOptions,
) -> Result<EquivalenceReport, QuadError> {
    let mu = mu.as_density().ok_or(QuadError::NoConvergence {
        refinements: 0,
        last_delta: f64::NAN,
    })?;
    let inner = QuadOptions {
        tol: opts.tol.max(1e-4),
        base_order: 8,
        base_theta: 32,
        ..*opts
    };
    let outer = QuadOptions {
        tol: opts.tol.max(1e-3),
        base_order: 8,
        base_theta: 32,
        ..*opts
    };

    let mu_cert = mu_tilde_w_certificate(&mu.cert, q, alpha);
    let mu_ref = &mu;
    let mu_norm = field_lp_norm(
        |w| mu_tilde(mu_ref, q, alpha, w, &inner).unwrap_or(f64::NAN),
        &mu_cert,
        p,
        &outer,
    )?;

    let d_cert = d_rq_z_certificate(&mu.cert, q, r);
    let d_norm = field_lp_norm(
        |z| d_rq(mu_ref, q, r, z, &inner).unwrap_or(f64::NAN),
        &d_cert,
        p,
        &outer,
    )?;

    let node_values: Result<Vec<f64>, QuadError> = lattice
        .points
        .par_iter()
        .map(|&zj| d_rq(mu_ref, q, r, zj, &inner))
        .collect();
    let node_values = node_values?;
    let sequence_norm = match p {
        Exponent::Finite(p) => {
            let mut acc = Kahan::default();
            for v in &node_values {
                acc.add(v.powf(p));
            }
            acc.value().powf(1.0 / p)
        }
        Exponent::Infinity => node_values.iter().copied().fold(0.0, f64::max),
    };

    Ok(EquivalenceReport {
        mu_tilde_norm: mu_norm,
        d_rq_norm: d_norm,
        sequence_norm,
        ratios: [mu_norm / d_norm, mu_norm / sequence_norm, d_norm / sequence_norm],
    })
}

/// `||f||_{L^p_{phi_q}}`: the `L^p` norm of `|f| (1+|z|)^q` (plain Lebesgue
/// measure), used by the weighted-to-plain boundedness checks.
pub fn weighted_lp_norm<F>(
    field: F,
    cert: &TailCertificate,
    q: f64,
    p: Exponent,
    opts: &QuadOptions,
) -> Result<f64, QuadError>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    let lifted_cert = TailCertificate { k: cert.k + q, ..*cert };
    field_lp_norm(
        move |z| field(z) * (1.0 + z.norm()).powf(q),
        &lifted_cert,
        p,
        opts,
    )
}
