use super::*;
use crate::fock::FockParams;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pair(g: &str, psi: &str) -> SymbolPair {
    SymbolPair::new(EntireExpr::parse(g).unwrap(), EntireExpr::parse(psi).unwrap())
}

fn opts() -> QuadOptions {
    QuadOptions::with_tol(1e-5)
}

#[test]
fn p_psi_with_identity_symbol() {
    let pr = pair("1", "z");
    for z in [c(0.0, 0.0), c(1.0, -2.0), c(3.0, 0.5)] {
        let got = eval_p_psi(&pr, 1.3, z);
        let want = 1.0 / (1.0 + z.norm());
        assert!((got - want).abs() < 1e-14 * want);
    }
}

#[test]
fn p_psi_halving_substitution() {
    let pr = pair("1", "0.5*z");
    let got = eval_p_psi(&pr, 1.0, c(2.0, 0.0));
    let want = (0.5f64 * (1.0 - 4.0)).exp() / 3.0;
    assert!((got - want).abs() < 1e-14 * want, "{got} vs {want}");
}

#[test]
fn q_g_at_origin_is_one() {
    let pr = pair("1", "z");
    assert_eq!(eval_q_g(&pr, 2.0, c(0.0, 0.0)), 1.0);
}

#[test]
fn m_with_unit_symbol_and_identity_psi_is_one() {
    let pr = pair("1", "z");
    for z in [c(0.5, 0.5), c(-3.0, 1.0), c(0.0, 0.0)] {
        let got = eval_m(&pr, 1.0, z, SymbolSide::Plain);
        assert!((got - 1.0).abs() < 1e-14, "M = {got} at {z}");
    }
}

#[test]
fn m_with_linear_symbol_is_modulus() {
    let pr = pair("z", "z");
    for z in [c(1.0, 1.0), c(-2.5, 0.3)] {
        let got = eval_m(&pr, 0.7, z, SymbolSide::Plain);
        assert!((got - z.norm()).abs() < 1e-13 * z.norm());
    }
}

#[test]
fn m_scaling_example_decays_with_analytic_exponent() {
    // g = exp(z^2/4), psi = z/2, alpha = 1: exponent bounded by -|z|^2/8.
    let pr = pair("exp(0.25*z^2)", "0.5*z");
    for radius in [2.0, 6.0, 10.0] {
        for j in 0..32 {
            let z = Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / 32.0);
            let m = eval_m(&pr, 1.0, z, SymbolSide::Plain);
            let envelope =
                (0.5 * z.norm() + 1.0) / (1.0 + z.norm()) * (-z.norm_sqr() / 8.0).exp();
            assert!(m <= envelope * (1.0 + 1e-12), "Mylim {m} > {envelope} at {z}");
        }
    }
}

#[test]
fn berezin_matches_radial_oracle_at_origin() {
    // g = 1, psi = z, q = 2, alpha = 1, w = 0:
    // B(0) = int e^{-|z|^2} / (1+|z|)^2 dm
    let pr = pair("1", "z");
    let got = berezin_b(&pr, 2.0, 1.0, c(0.0, 0.0), SymbolSide::Plain, &opts())
        .unwrap()
        .value()
        .unwrap();
    let mut oracle = 0.0;
    let n = 2_000_000;
    let h = 14.0 / n as f64;
    let f = |r: f64| r * (-r * r).exp() / (1.0 + r).powi(2);
    for k in 0..n {
        let a = k as f64 * h;
        oracle += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
    }
    oracle *= std::f64::consts::TAU;
    assert!(
        (got - oracle).abs() < 1e-6 * oracle,
        "B(0) = {got} vs oracle {oracle}"
    );
}

#[test]
fn berezin_of_zero_symbol_vanishes() {
    let pr = pair("0", "z");
    let got = berezin_b(&pr, 2.0, 1.0, c(1.0, 1.0), SymbolSide::Plain, &opts()).unwrap();
    assert_eq!(got.value().unwrap(), 0.0);
}

#[test]
fn berezin_plateaus_for_unit_symbol() {
    let pr = pair("1", "z");
    let mut values = Vec::new();
    for radius in [2.0, 4.0, 8.0] {
        let v = berezin_b(&pr, 2.0, 1.0, c(radius, 0.0), SymbolSide::Plain, &opts())
            .unwrap()
            .value()
            .unwrap();
        values.push(v);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    assert!(hi / lo < 2.0, "no plateau: {values:?}");
}

#[test]
fn berezin_refuses_fast_growth() {
    // psi = z^2 sends the kernel factor into super-Gaussian growth.
    let pr = pair("1", "z^2");
    let got = berezin_b(&pr, 2.0, 1.0, c(2.0, 0.0), SymbolSide::Plain, &opts()).unwrap();
    assert_eq!(got, BValue::DivergesOrUnknown);
}

#[test]
fn theorem1_scaling_example_bounded_and_compact() {
    let pr = pair("exp(0.25*z^2)", "0.5*z");
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::Infinity);
    let v = verdict_theorem1(OperatorKind::JgPair, &pr, &params, &opts()).unwrap();
    assert!(v.bounded.positive(), "bounded: {:?}", v.bounded);
    assert!(v.compact.positive(), "compact: {:?}", v.compact);
    let table = &v.diagnostics.tables["m_probe_max"];
    let first = table.first().unwrap().1;
    let last = table.last().unwrap().1;
    assert!(first >= 10.0 * last, "decay table {table:?}");
}

#[test]
fn theorem1_berezin_growth_is_negative_evidence() {
    let pr = pair("z", "z");
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::finite(2.0));
    let v = verdict_theorem1(OperatorKind::JgPair, &pr, &params, &opts()).unwrap();
    assert!(v.bounded.negative(), "bounded: {:?}", v.bounded);
    assert!(v.compact.negative());
    let table = &v.diagnostics.tables["b_probe_max"];
    for w in table.windows(2) {
        assert!(w[1].1 > w[0].1, "not monotone: {table:?}");
    }
}

#[test]
fn theorem1_diagnostics_do_not_depend_on_p() {
    let pr = pair("exp(0.25*z^2)", "0.5*z");
    let mut serialized = Vec::new();
    for p in [0.5, 1.0, 2.0] {
        let params = FockParams::new(1.0, Exponent::finite(p), Exponent::finite(2.0));
        let v = verdict_theorem1(OperatorKind::JgPair, &pr, &params, &opts()).unwrap();
        serialized.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(serialized[0], serialized[1]);
    assert_eq!(serialized[1], serialized[2]);
}

#[test]
fn theorem2_plateau_is_negative() {
    let pr = pair("1", "z");
    let params = FockParams::new(1.0, Exponent::finite(4.0), Exponent::finite(2.0));
    let v = verdict_theorem2(OperatorKind::JgPair, &pr, &params, &opts()).unwrap();
    assert!(v.bounded.negative(), "bounded: {:?}", v.bounded);
    assert_eq!(v.bounded, v.compact);
}

#[test]
fn theorem2_zero_symbol_is_exact_positive() {
    let pr = pair("0", "0.5*z");
    let params = FockParams::new(1.0, Exponent::Infinity, Exponent::finite(2.0));
    let v = verdict_theorem2(OperatorKind::CgPair, &pr, &params, &opts()).unwrap();
    assert_eq!(v.bounded, Outcome::ExactPositive);
    assert_eq!(v.compact, Outcome::ExactPositive);
    assert_eq!(v.diagnostics.named["b_integral"], 0.0);
}

#[test]
fn special_vg_quadratic_bounded_not_compact() {
    let pr = pair("z^2", "z");
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::finite(2.0));
    let v = classify_special(OperatorKind::Vg, &pr, &params).unwrap();
    assert_eq!(v.route, Route::VgDegreeRule);
    assert_eq!(v.bounded, Outcome::ExactPositive);
    assert_eq!(v.compact, Outcome::ExactNegative);
}

#[test]
fn special_jg_constant_bounded_not_compact() {
    let pr = pair("3", "z");
    let params = FockParams::new(1.0, Exponent::finite(1.0), Exponent::finite(2.0));
    let v = classify_special(OperatorKind::Jg, &pr, &params).unwrap();
    assert_eq!(v.route, Route::Corollary1);
    assert_eq!(v.bounded, Outcome::ExactPositive);
    assert_eq!(v.compact, Outcome::ExactNegative);
}

#[test]
fn special_large_into_small_needs_zero_symbol() {
    let params = FockParams::new(1.0, Exponent::finite(4.0), Exponent::finite(2.0));
    let nonzero = classify_special(OperatorKind::Jg, &pair("1", "z"), &params).unwrap();
    assert_eq!(nonzero.bounded, Outcome::ExactNegative);
    let zero = classify_special(OperatorKind::Jg, &pair("0", "z"), &params).unwrap();
    assert_eq!(zero.bounded, Outcome::ExactPositive);
    assert_eq!(zero.compact, Outcome::ExactPositive);
}

#[test]
fn special_nonlinear_psi_is_inadmissible_at_sup_norm() {
    let pr = pair("1", "z^2");
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::Infinity);
    let v = classify_special(OperatorKind::JgPair, &pr, &params).unwrap();
    assert_eq!(v.route, Route::PsiInadmissible);
    assert_eq!(v.bounded, Outcome::ExactNegative);
    assert_eq!(v.compact, Outcome::ExactNegative);
}

#[test]
fn special_admissible_psi_falls_through() {
    let pr = pair("exp(0.25*z^2)", "0.5*z");
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::Infinity);
    assert!(classify_special(OperatorKind::JgPair, &pr, &params).is_none());
}

#[test]
fn special_expanding_affine_psi_is_inadmissible() {
    let pr = pair("1", "2*z");
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::Infinity);
    let v = classify_special(OperatorKind::JgPair, &pr, &params).unwrap();
    assert_eq!(v.route, Route::PsiInadmissible);
    // |a| = 1 with a shift is inadmissible too
    let pr2 = pair("1", "z + 1");
    let v2 = classify_special(OperatorKind::JgPair, &pr2, &params).unwrap();
    assert_eq!(v2.bounded, Outcome::ExactNegative);
}

#[test]
fn sampled_m_field_carries_certificate() {
    let pr = pair("exp(0.25*z^2)", "0.5*z");
    let params = FockParams::new(1.0, Exponent::finite(2.0), Exponent::Infinity);
    let field = sample_criterion_field(
        TransformKind::MGPsi,
        &pr,
        &params,
        6.0,
        6,
        8,
        1.0,
        &opts(),
    )
    .unwrap();
    assert_eq!(field.field.samples.len(), 48);
    assert!(field.field.tail.is_some());
    for (re, im, v) in &field.field.samples {
        let z = c(*re, *im);
        let direct = eval_m(&pr, 1.0, z, SymbolSide::Plain);
        assert!((v - direct).abs() <= 1e-12 * direct.max(1e-12));
    }
}
