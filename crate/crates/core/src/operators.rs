//! The eight multiplication/integral/composition-type operators, empirical
//! operator-norm lower bounds on kernel/monomial test families, and
//! compactness probes.
//!
//! Every integral operator here is `Tf(z) = Tf(0) + int_0^z D(w) dw` for an
//! entire density `D` built symbolically from the symbols (for the
//! `C`-variants the chain rule turns the moving endpoint `psi(z)` into the
//! density `(f' o psi)(g o psi) psi'`). Image norms walk rays cumulatively
//! in mantissa/log-scale arithmetic, so kernel images that grow like
//! `e^{alpha |w| r}` stay representable far beyond f64 range.

use crate::envelope::GrowthEnvelope;
use crate::fock::{fock_norm, FockFunction, FockParams, Norm, Exponent};
use crate::quad::{
    gauss_legendre, path_integrate, plane_integrate_rays, refine_local_max, Kahan, QuadError,
    QuadOptions, RayField,
};
use crate::symbol::EntireExpr;
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

/// Operator selector. `JgPair`/`CgPair` are the companion operators induced
/// by the pair `(g, psi)`; `VgPsi`/`CgPsi` are the Volterra-side
/// generalizations; `Vg`/`Jg`/`Mg` are the single-symbol classics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `V_g f(z) = int_0^z f g' dw`
    Vg,
    /// `J_g f(z) = int_0^z f' g dw`
    Jg,
    /// `M_g f = g f`
    Mg,
    /// `V_g^psi f(z) = int_0^z (f o psi) g' dw`
    VgPsi,
    /// `C_g^psi f(z) = int_0^{psi(z)} f g' dw`
    CgPsi,
    /// `J_{(g,psi)} f(z) = int_0^z (f' o psi) g dw`
    JgPair,
    /// `C_{(g,psi)} f(z) = int_0^{psi(z)} f' g dw`
    CgPair,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 7] = [
        OperatorKind::Vg,
        OperatorKind::Jg,
        OperatorKind::Mg,
        OperatorKind::VgPsi,
        OperatorKind::CgPsi,
        OperatorKind::JgPair,
        OperatorKind::CgPair,
    ];

    /// Wire tag used in configs and reports.
    pub fn tag(&self) -> &'static str {
        match self {
            OperatorKind::Vg => "Vg",
            OperatorKind::Jg => "Jg",
            OperatorKind::Mg => "Mg",
            OperatorKind::VgPsi => "Vg_psi",
            OperatorKind::CgPsi => "Cg_psi",
            OperatorKind::JgPair => "J_g_psi",
            OperatorKind::CgPair => "C_g_psi",
        }
    }

    pub fn parse_tag(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.tag() == s)
    }
}

impl std::fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// The inducing pair of entire symbols.
#[derive(Debug, Clone)]
pub struct SymbolPair {
    pub g: EntireExpr,
    pub psi: EntireExpr,
}

impl SymbolPair {
    pub fn new(g: EntireExpr, psi: EntireExpr) -> Self {
        SymbolPair { g, psi }
    }

    /// Pair with `psi = z` for the single-symbol operators.
    pub fn with_identity(g: EntireExpr) -> Self {
        SymbolPair { g, psi: EntireExpr::variable() }
    }
}

/// Applies the operator at a single point, following the literal endpoint
/// recipes (straight segment from the origin).
pub fn apply(
    op: OperatorKind,
    pair: &SymbolPair,
    f: &FockFunction,
    z: Complex64,
    opts: &QuadOptions,
) -> Result<Complex64, QuadError> {
    let fe = &f.expr;
    let fp = fe.differentiate();
    let gp = pair.g.differentiate();
    let g = &pair.g;
    let psi = &pair.psi;
    match op {
        OperatorKind::Mg => Ok(g.eval(z) * fe.eval(z)),
        OperatorKind::Vg => path_integrate(|w| fe.eval(w) * gp.eval(w), z, opts),
        OperatorKind::Jg => path_integrate(|w| fp.eval(w) * g.eval(w), z, opts),
        OperatorKind::VgPsi => path_integrate(|w| fe.eval(psi.eval(w)) * gp.eval(w), z, opts),
        OperatorKind::CgPsi => {
            path_integrate(|w| fe.eval(w) * gp.eval(w), psi.eval(z), opts)
        }
        OperatorKind::JgPair => path_integrate(|w| fp.eval(psi.eval(w)) * g.eval(w), z, opts),
        OperatorKind::CgPair => {
            path_integrate(|w| fp.eval(w) * g.eval(w), psi.eval(z), opts)
        }
    }
}

// ---------------------------------------------------------------------------
// operator images
// ---------------------------------------------------------------------------

/// The image `Tf` in a form norms can consume.
#[derive(Debug, Clone)]
pub enum OperatorImage {
    /// Multiplication image, an entire symbol outright.
    Pointwise(EntireExpr),
    /// `Tf(z) = base + int_0^z density(w) dw`.
    Antiderivative { base: Complex64, density: EntireExpr },
}

impl OperatorImage {
    pub fn build(
        op: OperatorKind,
        pair: &SymbolPair,
        f_expr: &EntireExpr,
        opts: &QuadOptions,
    ) -> Result<Self, QuadError> {
        let fp = f_expr.differentiate();
        let gp = pair.g.differentiate();
        let g = &pair.g;
        let psi = &pair.psi;
        let zero = Complex64::new(0.0, 0.0);
        Ok(match op {
            OperatorKind::Mg => OperatorImage::Pointwise(g.product(f_expr)),
            OperatorKind::Vg => {
                OperatorImage::Antiderivative { base: zero, density: f_expr.product(&gp) }
            }
            OperatorKind::Jg => {
                OperatorImage::Antiderivative { base: zero, density: fp.product(g) }
            }
            OperatorKind::VgPsi => OperatorImage::Antiderivative {
                base: zero,
                density: f_expr.compose(psi).product(&gp),
            },
            OperatorKind::JgPair => OperatorImage::Antiderivative {
                base: zero,
                density: fp.compose(psi).product(g),
            },
            OperatorKind::CgPsi => {
                let base =
                    path_integrate(|w| f_expr.eval(w) * gp.eval(w), psi.eval(zero), opts)?;
                let psip = psi.differentiate();
                OperatorImage::Antiderivative {
                    base,
                    density: f_expr.compose(psi).product(&gp.compose(psi)).product(&psip),
                }
            }
            OperatorKind::CgPair => {
                let base = path_integrate(|w| fp.eval(w) * g.eval(w), psi.eval(zero), opts)?;
                let psip = psi.differentiate();
                OperatorImage::Antiderivative {
                    base,
                    density: fp.compose(psi).product(&g.compose(psi)).product(&psip),
                }
            }
        })
    }

    /// Growth envelope of `|Tf|`; `None` when the density is unclassified.
    pub fn envelope(&self) -> Option<GrowthEnvelope> {
        match self {
            OperatorImage::Pointwise(expr) => GrowthEnvelope::of(expr),
            OperatorImage::Antiderivative { base, density } => {
                let env = GrowthEnvelope::of(density)?;
                Some(env.integral_along_segment().add_constant(base.norm().ln()))
            }
        }
    }

    /// `ln |Tf(z)|` by cumulative walking (overflow-safe); `None` when the
    /// density is unclassified.
    pub fn log_abs_at(&self, z: Complex64) -> Option<f64> {
        match self {
            OperatorImage::Pointwise(expr) => Some(expr.log_abs(z)),
            OperatorImage::Antiderivative { base, density } => {
                let env = GrowthEnvelope::of(density)?;
                Some(image_log_abs(*base, density, env, z))
            }
        }
    }
}

/// Complex value in mantissa/log form: `value = m * e^{l}`.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    m: Complex64,
    l: f64,
}

impl Scaled {
    fn zero() -> Self {
        Scaled { m: Complex64::new(0.0, 0.0), l: f64::NEG_INFINITY }
    }

    fn from_plain(v: Complex64) -> Self {
        if v == Complex64::new(0.0, 0.0) {
            Scaled::zero()
        } else {
            Scaled { m: v, l: 0.0 }.normalized()
        }
    }

    fn normalized(self) -> Self {
        let n = self.m.norm();
        if n == 0.0 || !n.is_finite() {
            return if n == 0.0 { Scaled::zero() } else { self };
        }
        if !(1e-50..=1e50).contains(&n) {
            Scaled { m: self.m / n, l: self.l + n.ln() }
        } else {
            self
        }
    }

    fn add(self, other: Scaled) -> Self {
        if other.l == f64::NEG_INFINITY {
            return self;
        }
        if self.l == f64::NEG_INFINITY {
            return other;
        }
        let l = self.l.max(other.l);
        Scaled {
            m: self.m * (self.l - l).exp() + other.m * (other.l - l).exp(),
            l,
        }
        .normalized()
    }

    fn log_abs(&self) -> f64 {
        self.l + self.m.norm().ln()
    }
}

/// Gauss–Legendre integral of the density over one short segment, in
/// scaled arithmetic.
fn scaled_segment(
    density: &EntireExpr,
    from: Complex64,
    to: Complex64,
    order: usize,
) -> Scaled {
    let rule = gauss_legendre(order);
    let half = 0.5 * (to - from);
    let mid = 0.5 * (to + from);
    let mut node_vals: Vec<(Complex64, f64)> = Vec::with_capacity(order);
    let mut l_max = f64::NEG_INFINITY;
    for &x in rule.0.iter() {
        let (m, l) = density.eval_scaled(mid + half * x);
        if m != Complex64::new(0.0, 0.0) {
            l_max = l_max.max(l);
        }
        node_vals.push((m, l));
    }
    if l_max == f64::NEG_INFINITY {
        return Scaled::zero();
    }
    let mut re = Kahan::default();
    let mut im = Kahan::default();
    for ((m, l), &w) in node_vals.into_iter().zip(rule.1.iter()) {
        let v = m * (l - l_max).exp() * w;
        re.add(v.re);
        im.add(v.im);
    }
    Scaled { m: Complex64::new(re.value(), im.value()) * half, l: l_max }.normalized()
}

/// Walks the segment `[0, z]` accumulating the antiderivative. Subdivision
/// is driven by the density's envelope: the local frequency scale of an
/// entire function below `A(1+r)^k e^{br + rho r^2}` is at most
/// `k/(1+r) + b + 2 rho r`.
#[derive(Debug)]
struct Cursor<'a> {
    density: &'a EntireExpr,
    env: GrowthEnvelope,
    point: Complex64,
    value: Scaled,
}

const SEGMENT_ORDER: usize = 12;
const MAX_PHASE_PER_SEGMENT: f64 = 1.5;

impl<'a> Cursor<'a> {
    fn start(density: &'a EntireExpr, env: GrowthEnvelope, base: Complex64) -> Self {
        Cursor {
            density,
            env,
            point: Complex64::new(0.0, 0.0),
            value: Scaled::from_plain(base),
        }
    }

    fn frequency_scale(&self, r: f64) -> f64 {
        self.env.k / (1.0 + r) + self.env.b + 2.0 * self.env.rho.abs() * r
    }

    fn advance(&mut self, to: Complex64) {
        let len = (to - self.point).norm();
        if len == 0.0 {
            return;
        }
        let scale = self.frequency_scale(to.norm().max(self.point.norm()));
        let pieces = ((len * scale / MAX_PHASE_PER_SEGMENT).ceil() as usize).max(1);
        let step = (to - self.point) / pieces as f64;
        for j in 0..pieces {
            let a = self.point + step * j as f64;
            let b = if j + 1 == pieces { to } else { self.point + step * (j + 1) as f64 };
            let seg = scaled_segment(self.density, a, b, SEGMENT_ORDER);
            self.value = self.value.add(seg);
        }
        self.point = to;
    }
}

/// `|Tf|^q e^{-(alpha q / 2)|z|^2}` as a ray field via cumulative walking.
struct ImagePowerField<'a> {
    base: Complex64,
    density: &'a EntireExpr,
    env: GrowthEnvelope,
    q: f64,
    half_weight: f64,
}

impl RayField for ImagePowerField<'_> {
    fn eval_ray(&self, theta: f64, radii: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let dir = Complex64::from_polar(1.0, theta);
        let mut cursor = Cursor::start(self.density, self.env, self.base);
        for &r in radii {
            cursor.advance(r * dir);
            let log_tf = cursor.value.log_abs();
            let value = if log_tf == f64::NEG_INFINITY {
                0.0
            } else {
                (self.q * log_tf - self.half_weight * self.q * r * r).exp()
            };
            out.push(value);
        }
    }
}

/// `ln |Tf(z)|` by a fresh cumulative walk along `[0, z]`.
fn image_log_abs(
    base: Complex64,
    density: &EntireExpr,
    env: GrowthEnvelope,
    z: Complex64,
) -> f64 {
    let mut cursor = Cursor::start(density, env, base);
    // march in radius steps of at most 1/4 so the walk stays well resolved
    let n = ((4.0 * z.norm()).ceil() as usize).max(1);
    for j in 1..=n {
        cursor.advance(z * (j as f64 / n as f64));
    }
    cursor.value.log_abs()
}

/// Fock norm of an operator image. Divergence (including "no certificate,
/// growth unknown") comes back as `Norm::Diverges`.
pub fn image_norm(
    image: &OperatorImage,
    q: Exponent,
    alpha: f64,
    opts: &QuadOptions,
) -> Result<Norm, QuadError> {
    match image {
        OperatorImage::Pointwise(expr) => {
            fock_norm(&FockFunction::new(expr.clone(), alpha), q, opts)
        }
        OperatorImage::Antiderivative { base, density } => {
            if density.is_zero() {
                let value = base.norm();
                return Ok(Norm::Finite { value, attained: true });
            }
            let Some(density_env) = GrowthEnvelope::of(density) else {
                return Ok(Norm::Diverges);
            };
            let env = density_env
                .integral_along_segment()
                .add_constant(base.norm().ln());
            match q {
                Exponent::Finite(q) => {
                    let Some(cert) = env.power(q).certificate(0.5 * alpha * q) else {
                        return Ok(Norm::Diverges);
                    };
                    let field = ImagePowerField {
                        base: *base,
                        density,
                        env: density_env,
                        q,
                        half_weight: 0.5 * alpha,
                    };
                    let est = plane_integrate_rays(&field, &cert, opts)?;
                    let prefactor = alpha * q / (2.0 * std::f64::consts::PI);
                    Ok(Norm::Finite {
                        value: (prefactor * est.value).powf(1.0 / q),
                        attained: true,
                    })
                }
                Exponent::Infinity => {
                    let Some(cert) = env.certificate(0.5 * alpha) else {
                        return Ok(Norm::Diverges);
                    };
                    sup_image_weighted(*base, density, density_env, &cert, alpha, opts)
                }
            }
        }
    }
}

/// Supremum of `|Tf(z)| e^{-alpha |z|^2 / 2}` via a cumulative ray sweep
/// plus local refinement in log space.
fn sup_image_weighted(
    base: Complex64,
    density: &EntireExpr,
    density_env: GrowthEnvelope,
    cert: &crate::quad::TailCertificate,
    alpha: f64,
    opts: &QuadOptions,
) -> Result<Norm, QuadError> {
    opts.validate();
    let peak = cert.peak_radius();
    let r_scan = peak + (80.0 / cert.c).sqrt();
    let mu = cert.b / (2.0 * cert.c);
    let n_theta = ((16.0 * mu * cert.c.sqrt()).ceil() as usize + 64).min(2048);
    let step = 0.125;
    let n_r = ((r_scan / step).ceil() as usize).max(4);
    let radii: Vec<f64> = (1..=n_r).map(|j| j as f64 * step).collect();

    let per_ray: Vec<(f64, Complex64)> = (0..n_theta)
        .into_par_iter()
        .map(|j| {
            let theta = std::f64::consts::TAU * (j as f64) / (n_theta as f64);
            let dir = Complex64::from_polar(1.0, theta);
            let mut cursor = Cursor::start(density, density_env, base);
            let mut best = base.norm().ln();
            let mut arg = Complex64::new(0.0, 0.0);
            for &r in &radii {
                cursor.advance(r * dir);
                let log_weighted = cursor.value.log_abs() - 0.5 * alpha * r * r;
                if log_weighted > best {
                    best = log_weighted;
                    arg = r * dir;
                }
            }
            (best, arg)
        })
        .collect();
    let (mut best_log, mut best_arg) = (base.norm().ln(), Complex64::new(0.0, 0.0));
    for (log, arg) in per_ray {
        if log > best_log {
            best_log = log;
            best_arg = arg;
        }
    }
    let log_field = |z: Complex64| {
        image_log_abs(base, density, density_env, z) - 0.5 * alpha * z.norm_sqr()
    };
    let (refined_log, _argmax) = refine_local_max(&log_field, best_arg, 2.0 * step, 10);
    let best = refined_log.max(best_log);
    let attained = best > cert.bound_log(r_scan);
    Ok(Norm::Finite { value: best.exp(), attained })
}

// ---------------------------------------------------------------------------
// test families, empirical norms, compactness probes
// ---------------------------------------------------------------------------

/// Kernel/monomial test family: normalized kernels `k_w` for `w` on a polar
/// grid of `n_radii x n_angles` points with `|w| <= w_radius`, plus the
/// normalized monomials `z^n / ||z^n||_p` for `n <= max_monomial`.
#[derive(Debug, Clone, Copy)]
pub struct FamilySpec {
    pub w_radius: f64,
    pub n_radii: usize,
    pub n_angles: usize,
    pub max_monomial: u32,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec { w_radius: 8.0, n_radii: 12, n_angles: 16, max_monomial: 12 }
    }
}

/// Closed-form Fock norm of the monomial `z^n`.
pub fn monomial_norm(n: u32, p: Exponent, alpha: f64) -> f64 {
    match p {
        Exponent::Finite(p) => {
            let half = n as f64 * p / 2.0;
            ((2.0 / (alpha * p)).powf(half) * gamma(half + 1.0)).powf(1.0 / p)
        }
        Exponent::Infinity => {
            if n == 0 {
                1.0
            } else {
                let nf = n as f64;
                ((nf / alpha).ln() * 0.5 * nf - 0.5 * nf).exp()
            }
        }
    }
}

fn family_members(spec: &FamilySpec, params: &FockParams) -> Vec<(String, EntireExpr)> {
    let mut members = Vec::new();
    for i in 0..spec.n_radii {
        let r = spec.w_radius * (i + 1) as f64 / spec.n_radii as f64;
        for j in 0..spec.n_angles {
            let theta = std::f64::consts::TAU * (j as f64) / (spec.n_angles as f64);
            let w = Complex64::from_polar(r, theta);
            let label = format!("kernel[w=({:.4},{:.4})]", w.re, w.im);
            members.push((
                label,
                crate::fock::normalized_kernel(w, params.alpha).expr,
            ));
        }
    }
    for n in 0..=spec.max_monomial {
        let norm = monomial_norm(n, params.p, params.alpha);
        let scale = Complex64::new(1.0 / norm, 0.0);
        members.push((format!("monomial[n={n}]"), EntireExpr::monomial(n).scale(scale)));
    }
    members
}

/// A certified lower bound on the operator norm, or divergence evidence.
#[derive(Debug, Clone)]
pub enum NormLowerBound {
    Finite {
        bound: f64,
        witness: String,
        /// Per-member image norms (family order).
        table: Vec<(String, f64)>,
    },
    Diverges { witness: String },
}

/// Max over the family of `||Tf||_q / ||f||_p`; members are normalized
/// analytically so each ratio is just the image norm. A lower bound on the
/// operator norm, never an upper bound. Ties break toward the earliest
/// family member.
pub fn empirical_norm(
    op: OperatorKind,
    pair: &SymbolPair,
    params: &FockParams,
    spec: &FamilySpec,
    opts: &QuadOptions,
) -> Result<NormLowerBound, QuadError> {
    let members = family_members(spec, params);
    let norms: Result<Vec<Norm>, QuadError> = members
        .par_iter()
        .map(|(_, expr)| {
            let image = OperatorImage::build(op, pair, expr, opts)?;
            image_norm(&image, params.q, params.alpha, opts)
        })
        .collect();
    let norms = norms?;
    let mut table = Vec::with_capacity(members.len());
    for ((label, _), norm) in members.iter().zip(norms.iter()) {
        match norm {
            Norm::Diverges => {
                return Ok(NormLowerBound::Diverges { witness: label.clone() })
            }
            Norm::Finite { value, .. } => table.push((label.clone(), *value)),
        }
    }
    let (witness, bound) = table
        .iter()
        .fold(("<none>".to_string(), f64::NEG_INFINITY), |acc, (l, v)| {
            if *v > acc.1 {
                (l.clone(), *v)
            } else {
                acc
            }
        });
    Ok(NormLowerBound::Finite { bound, witness, table })
}

/// Image norms of escaping kernels `k_w`, `|w|` doubling along the radii
/// sequence; each entry is the max over four probe directions.
#[derive(Debug, Clone)]
pub enum ProbeOutcome {
    Decay {
        radii: Vec<f64>,
        norms: Vec<f64>,
        /// True when the sequence drops by at least 10x start to end (or is
        /// identically zero). Evidence, not proof.
        decaying: bool,
    },
    Diverges { radius: f64 },
}

pub fn compactness_probe(
    op: OperatorKind,
    pair: &SymbolPair,
    params: &FockParams,
    radii: &[f64],
    opts: &QuadOptions,
) -> Result<ProbeOutcome, QuadError> {
    let mut norms = Vec::with_capacity(radii.len());
    for &radius in radii {
        let four: Result<Vec<Norm>, QuadError> = [0.0, 0.25, 0.5, 0.75]
            .par_iter()
            .map(|&frac| {
                let w = Complex64::from_polar(radius, std::f64::consts::TAU * frac);
                let member = crate::fock::normalized_kernel(w, params.alpha).expr;
                let image = OperatorImage::build(op, pair, &member, opts)?;
                image_norm(&image, params.q, params.alpha, opts)
            })
            .collect();
        let mut worst = 0.0f64;
        for n in four? {
            match n {
                Norm::Diverges => return Ok(ProbeOutcome::Diverges { radius }),
                Norm::Finite { value, .. } => worst = worst.max(value),
            }
        }
        norms.push(worst);
    }
    let first = norms.first().copied().unwrap_or(0.0);
    let last = norms.last().copied().unwrap_or(0.0);
    let all_zero = norms.iter().all(|v| *v < 1e-30);
    let decaying = all_zero || (last > 0.0 || first > 0.0) && first >= 10.0 * last;
    Ok(ProbeOutcome::Decay { radii: radii.to_vec(), norms, decaying })
}

/// Default probe radii `r0 * 2^n`, `n = 0..steps`.
pub fn doubling_radii(r0: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|n| r0 * (1u64 << n) as f64).collect()
}

#[cfg(test)]
mod tests;
