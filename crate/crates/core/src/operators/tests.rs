use super::*;
use crate::fock::normalized_kernel;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn opts() -> QuadOptions {
    QuadOptions::with_tol(1e-10)
}

fn fock(text: &str, alpha: f64) -> FockFunction {
    FockFunction::new(EntireExpr::parse(text).unwrap(), alpha)
}

fn small_family() -> FamilySpec {
    FamilySpec { w_radius: 6.0, n_radii: 4, n_angles: 8, max_monomial: 6 }
}

#[test]
fn jg_with_unit_symbol_is_f_minus_f0() {
    let pair = SymbolPair::with_identity(EntireExpr::parse("1").unwrap());
    let f = fock("exp(z)", 1.0);
    let z = c(1.0, 1.0);
    let got = apply(OperatorKind::Jg, &pair, &f, z, &opts()).unwrap();
    let expect = z.exp() - 1.0;
    assert!((got - expect).norm() < 1e-10, "{got} vs {expect}");
}

#[test]
fn integration_by_parts_identity() {
    // V_g f + J_g f = M_g f - f(0) g(0)
    let cases = [("exp(0.3*z)", "z^2 + 1"), ("z^3", "exp(0.1*z)")];
    let mut rng = StdRng::seed_from_u64(7);
    for (ftext, gtext) in cases {
        let f = fock(ftext, 1.0);
        let pair = SymbolPair::with_identity(EntireExpr::parse(gtext).unwrap());
        let f0g0 = f.eval(c(0.0, 0.0)) * pair.g.eval(c(0.0, 0.0));
        for _ in 0..20 {
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let v = apply(OperatorKind::Vg, &pair, &f, z, &opts()).unwrap();
            let j = apply(OperatorKind::Jg, &pair, &f, z, &opts()).unwrap();
            let m = apply(OperatorKind::Mg, &pair, &f, z, &opts()).unwrap();
            let residual = (v + j - (m - f0g0)).norm();
            assert!(residual <= 1e-8, "identity residual {residual} at {z} for {ftext}");
        }
    }
}

#[test]
fn cgpair_with_unit_g_is_composition_up_to_constant() {
    let pair = SymbolPair::new(
        EntireExpr::parse("1").unwrap(),
        EntireExpr::parse("0.5*z + (0.3-0.2i)").unwrap(),
    );
    let f = fock("exp(0.4*z) + z^2", 1.0);
    for k in 0..10 {
        let z = Complex64::from_polar(2.5 * k as f64 / 9.0, 0.8 * k as f64);
        let got = apply(OperatorKind::CgPair, &pair, &f, z, &opts()).unwrap();
        let expect = f.eval(pair.psi.eval(z)) - f.eval(c(0.0, 0.0));
        assert!((got - expect).norm() < 1e-9, "at {z}: {got} vs {expect}");
    }
}

#[test]
fn identity_psi_collapses_pair_operators() {
    let g = EntireExpr::parse("z^2 - 1i").unwrap();
    let with_psi = SymbolPair::new(g.clone(), EntireExpr::variable());
    let plain = SymbolPair::with_identity(g);
    let f = fock("exp(0.2*z^2) + z", 1.0);
    for k in 0..10 {
        let z = Complex64::from_polar(0.3 + 2.2 * k as f64 / 9.0, 1.1 * k as f64);
        let a = apply(OperatorKind::JgPair, &with_psi, &f, z, &opts()).unwrap();
        let b = apply(OperatorKind::Jg, &plain, &f, z, &opts()).unwrap();
        assert!((a - b).norm() < 1e-9, "JgPair vs Jg at {z}");
        let a2 = apply(OperatorKind::CgPair, &with_psi, &f, z, &opts()).unwrap();
        assert!((a2 - b).norm() < 1e-9, "CgPair vs Jg at {z}");
    }
}

#[test]
fn g_equal_psi_prime_gives_composition() {
    // J_{(psi', psi)} f = f o psi - f(psi(0))
    let psi = EntireExpr::parse("0.5*z + 1").unwrap();
    let pair = SymbolPair::new(psi.differentiate(), psi.clone());
    let f = fock("z^3 + exp(0.3*z)", 1.0);
    for k in 0..10 {
        let z = Complex64::from_polar(2.0 * k as f64 / 9.0, 0.7 * k as f64);
        let got = apply(OperatorKind::JgPair, &pair, &f, z, &opts()).unwrap();
        let expect = f.eval(psi.eval(z)) - f.eval(psi.eval(c(0.0, 0.0)));
        assert!((got - expect).norm() < 1e-9, "at {z}");
    }
}

#[test]
fn apply_is_linear() {
    let pair = SymbolPair::new(
        EntireExpr::parse("z + 1i").unwrap(),
        EntireExpr::parse("0.7*z").unwrap(),
    );
    let f = fock("exp(0.2*z)", 1.0);
    let h = fock("z^2", 1.0);
    let (a, b) = (c(1.5, -0.5), c(0.25, 2.0));
    let combo = FockFunction::new(
        f.expr.scale(a).sum(&h.expr.scale(b)),
        1.0,
    );
    for op in [OperatorKind::Vg, OperatorKind::JgPair, OperatorKind::CgPair, OperatorKind::Mg] {
        for k in 0..5 {
            let z = Complex64::from_polar(0.4 + 1.8 * k as f64 / 4.0, 2.2 * k as f64);
            let lhs = apply(op, &pair, &combo, z, &opts()).unwrap();
            let rhs = a * apply(op, &pair, &f, z, &opts()).unwrap()
                + b * apply(op, &pair, &h, z, &opts()).unwrap();
            assert!((lhs - rhs).norm() < 1e-9, "{op} not linear at {z}");
        }
    }
}

#[test]
fn image_matches_apply_pointwise() {
    let pair = SymbolPair::new(
        EntireExpr::parse("z^2 + 1").unwrap(),
        EntireExpr::parse("0.5*z + 0.2i").unwrap(),
    );
    let f = fock("exp(0.3*z) + z", 1.0);
    for op in [OperatorKind::Jg, OperatorKind::JgPair, OperatorKind::CgPair, OperatorKind::CgPsi] {
        let image = OperatorImage::build(op, &pair, &f.expr, &opts()).unwrap();
        for k in 1..8 {
            let z = Complex64::from_polar(0.5 + 2.0 * k as f64 / 7.0, 1.9 * k as f64);
            let direct = apply(op, &pair, &f, z, &opts()).unwrap();
            let log_direct = direct.norm().ln();
            let log_image = image.log_abs_at(z).unwrap();
            assert!(
                (log_direct - log_image).abs() < 1e-8 * log_direct.abs().max(1.0),
                "{op} at {z}: {log_direct} vs {log_image}"
            );
        }
    }
}

#[test]
fn empirical_norm_of_jg_unit_symbol_sits_in_window() {
    // J_1 f = f - f(0); on normalized kernels the image norm tends to 1
    // from below as |w| grows and never exceeds 2.
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::finite(2.0));
    let pair = SymbolPair::with_identity(EntireExpr::parse("1").unwrap());
    let got = empirical_norm(
        OperatorKind::Jg,
        &pair,
        &params,
        &small_family(),
        &QuadOptions::with_tol(1e-7),
    )
    .unwrap();
    let NormLowerBound::Finite { bound, .. } = got else {
        panic!("expected finite lower bound");
    };
    assert!((1.0..=2.0).contains(&bound), "bound {bound}");
}

#[test]
fn zero_multiplier_has_zero_ratios() {
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::finite(2.0));
    let pair = SymbolPair::with_identity(EntireExpr::parse("0").unwrap());
    let got = empirical_norm(
        OperatorKind::Mg,
        &pair,
        &params,
        &small_family(),
        &QuadOptions::with_tol(1e-7),
    )
    .unwrap();
    let NormLowerBound::Finite { bound, table, .. } = got else {
        panic!("expected finite bound");
    };
    assert_eq!(bound, 0.0);
    assert!(table.iter().all(|(_, v)| *v == 0.0));
}

#[test]
fn jg_with_linear_symbol_grows_along_kernels() {
    // Corollary-style unboundedness evidence: ||J_z k_w||_2 grows in |w|.
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::finite(2.0));
    let pair = SymbolPair::with_identity(EntireExpr::variable());
    let radii = [1.0, 2.0, 4.0, 8.0];
    let out = compactness_probe(
        OperatorKind::Jg,
        &pair,
        &params,
        &radii,
        &QuadOptions::with_tol(1e-6),
    )
    .unwrap();
    let ProbeOutcome::Decay { norms, decaying, .. } = out else {
        panic!("expected a table");
    };
    assert!(!decaying);
    for pair in norms.windows(2) {
        assert!(pair[1] > pair[0], "not monotone: {norms:?}");
    }
}

#[test]
fn zero_symbol_probe_is_identically_zero_and_decaying() {
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::finite(2.0));
    let pair = SymbolPair::with_identity(EntireExpr::parse("0").unwrap());
    let out = compactness_probe(
        OperatorKind::Jg,
        &pair,
        &params,
        &doubling_radii(2.0, 4),
        &QuadOptions::with_tol(1e-6),
    )
    .unwrap();
    let ProbeOutcome::Decay { norms, decaying, .. } = out else {
        panic!("expected a table");
    };
    assert!(decaying);
    assert!(norms.iter().all(|v| *v == 0.0));
}

#[test]
fn identity_multiplier_probe_is_flat() {
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::finite(2.0));
    let pair = SymbolPair::with_identity(EntireExpr::parse("1").unwrap());
    let out = compactness_probe(
        OperatorKind::Mg,
        &pair,
        &params,
        &doubling_radii(2.0, 4),
        &QuadOptions::with_tol(1e-6),
    )
    .unwrap();
    let ProbeOutcome::Decay { norms, decaying, .. } = out else {
        panic!("expected a table");
    };
    assert!(!decaying);
    for v in &norms {
        assert!((v - 1.0).abs() < 1e-5, "M_1 k_w norm {v} != 1");
    }
}

#[test]
fn scaling_example_probe_decays_at_sup_norm() {
    // g = exp(z^2/4), psi = z/2, alpha = 1, q = inf: |beta|^2 + gamma < 1.
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::Infinity);
    let pair = SymbolPair::new(
        EntireExpr::parse("exp(0.25*z^2)").unwrap(),
        EntireExpr::parse("0.5*z").unwrap(),
    );
    let out = compactness_probe(
        OperatorKind::JgPair,
        &pair,
        &params,
        &doubling_radii(2.0, 4),
        &QuadOptions::with_tol(1e-5),
    )
    .unwrap();
    let ProbeOutcome::Decay { norms, decaying, .. } = out else {
        panic!("expected a table");
    };
    assert!(decaying, "expected decay, got {norms:?}");
}

#[test]
fn normalized_kernel_images_match_closed_form_for_jg_unit() {
    // J_1 k_w = k_w - k_w(0), whose norm is computable directly:
    // ||k_w - e^{-alpha|w|^2/2}||_2^2 = 1 - e^{-alpha |w|^2}  (alpha = 1, p = 2)
    let alpha = 1.0;
    let pair = SymbolPair::with_identity(EntireExpr::parse("1").unwrap());
    for radius in [0.5, 1.0, 2.0, 4.0] {
        let w = Complex64::from_polar(radius, 0.9);
        let member = normalized_kernel(w, alpha);
        let image = OperatorImage::build(OperatorKind::Jg, &pair, &member.expr, &opts()).unwrap();
        let got = image_norm(&image, Exponent::finite(2.0), alpha, &QuadOptions::with_tol(1e-8))
            .unwrap()
            .value()
            .unwrap();
        let expect = (1.0 - (-alpha * w.norm_sqr()).exp()).sqrt();
        assert!(
            (got - expect).abs() < 1e-6 * expect.max(0.1),
            "|w|={radius}: {got} vs {expect}"
        );
    }
}
