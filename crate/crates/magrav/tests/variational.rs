//! Integration checks for the variational module: full reports for the
//! quadratic curvature density, consistency of formal and explicit
//! translations, and property tests of the total-derivative and
//! Euler-Lagrange machinery on random jet polynomials.

use std::collections::HashMap;

use proptest::prelude::*;

use magrav::symexpr::zerotest::{is_zero, ZeroCfg};
use magrav::symexpr::Expr;
use magrav::variational::{
    energy_momentum_current, energy_momentum_report, euler_lagrange, field_equations_he,
    hilbert_einstein, invariance_identities, komar_report, noether_identities, yang_mills,
    JetContext, LagrangianDensity, OnShellSampler,
};

fn cfg() -> ZeroCfg {
    ZeroCfg::with_samples(8).seed(11)
}

fn cfg_pos(ctx: &JetContext) -> ZeroCfg {
    cfg().positive_var(ctx.volume_symbol())
}

#[test]
fn quadratic_density_satisfies_the_invariance_identities() {
    let ctx = JetContext::new(2).unwrap();
    let l = yang_mills(&ctx);
    let report = invariance_identities(&l, &cfg()).unwrap();
    assert!(report.passed(), "{report}");
    assert!(
        report
            .find("failing residual is a pure total divergence")
            .is_none(),
        "{report}"
    );
}

#[test]
fn quadratic_density_satisfies_the_noether_identities() {
    let ctx = JetContext::new(2).unwrap();
    let l = yang_mills(&ctx);
    let report = noether_identities(&l, &cfg()).unwrap();
    assert!(report.passed(), "{report}");
    assert!(report.all_proven(), "{report}");
}

#[test]
fn quadratic_density_superpotential_is_antisymmetric_and_conserved() {
    let ctx = JetContext::new(2).unwrap();
    let l = yang_mills(&ctx);
    let report = komar_report(&l, false, &cfg()).unwrap();
    assert!(report.passed(), "{report}");
    assert!(
        report
            .find("antisymmetry of the superpotential")
            .unwrap()
            .verdict
            .is_proven(),
        "{report}"
    );
}

#[test]
fn quadratic_density_current_is_weakly_conserved() {
    let ctx = JetContext::new(2).unwrap();
    let l = yang_mills(&ctx);
    let report = energy_momentum_report(&l, OnShellSampler::ZeroCurvature, &cfg()).unwrap();
    assert!(report.passed(), "{report}");
    assert!(
        report
            .find("variational balance of the current")
            .unwrap()
            .verdict
            .is_proven(),
        "{report}"
    );
}

#[test]
fn field_equation_report_is_fully_proven_in_dim_three() {
    let report = field_equations_he(3, &cfg()).unwrap();
    assert!(report.passed(), "{report}");
    assert!(report.all_proven(), "{report}");
}

#[test]
fn explicit_translations_agree_with_substituted_formal_ones() {
    // A rotation-like coordinate translation τ = (x¹, −x⁰).  Building the
    // current directly from the explicit components must agree with taking
    // the formal current and substituting values for the τ symbols and all
    // their formal derivatives.
    let n = 2;
    let ctx = JetContext::new(n).unwrap();
    let l = hilbert_einstein(&ctx);
    let x0 = Expr::var(ctx.chart().coord(0).unwrap());
    let x1 = Expr::var(ctx.chart().coord(1).unwrap());
    let explicit = vec![x1.clone(), x0.neg()];

    let formal: Vec<Expr> = (0..n).map(|a| ctx.translation(a)).collect();
    let j_formal = energy_momentum_current(&l, &formal).unwrap();
    let j_explicit = energy_momentum_current(&l, &explicit).unwrap();

    let mut map = HashMap::new();
    for a in 0..n {
        for ders in [
            vec![],
            vec![0],
            vec![1],
            vec![0, 0],
            vec![0, 1],
            vec![1, 1],
            vec![0, 0, 0],
            vec![0, 0, 1],
            vec![0, 1, 1],
            vec![1, 1, 1],
        ] {
            let mut val = explicit[a].clone();
            for &lam in &ders {
                val = ctx.total_derivative(&val, lam).unwrap();
            }
            let sym = ctx
                .translation_jet(a, &ders)
                .unwrap();
            if let Some(s) = sym.as_var() {
                map.insert(s.clone(), val);
            }
        }
    }
    for lam in 0..n {
        let diff = j_formal[lam].subst(&map).sub(&j_explicit[lam]);
        let v = is_zero(&diff, &cfg_pos(&ctx)).unwrap();
        assert!(v.is_proven(), "component {lam}: {v}");
    }
}

/// Leaves for random jet polynomials over a fixed two-dimensional context.
fn jet_leaves(ctx: &JetContext) -> Vec<Expr> {
    vec![
        ctx.sigma(0, 0),
        ctx.sigma(0, 1),
        ctx.sigma(1, 1),
        ctx.connection(0, 0, 1),
        ctx.connection(1, 1, 0),
        ctx.volume(),
        ctx.sigma_jet(1, 1, &[0]).unwrap(),
        ctx.connection_jet(0, 1, 1, &[1]).unwrap(),
        ctx.translation_jet(0, &[1]).unwrap(),
        Expr::var(ctx.chart().coord(0).unwrap()),
    ]
}

/// Leaves without any jets, for densities that must stay first order after
/// one total derivative.
fn order_zero_leaves(ctx: &JetContext) -> Vec<Expr> {
    vec![
        ctx.sigma(0, 0),
        ctx.sigma(0, 1),
        ctx.sigma(1, 1),
        ctx.connection(0, 0, 1),
        ctx.connection(1, 0, 0),
        ctx.volume(),
    ]
}

fn expr_strategy(leaves: Vec<Expr>) -> impl Strategy<Value = Expr> {
    let leaf = (0..leaves.len()).prop_map(move |i| leaves[i].clone());
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (inner.clone(), -3..4i64).prop_map(|(a, c)| a.mul(&Expr::int(c))),
            inner.prop_map(|a| a.pow(2)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn total_derivatives_commute(e in expr_strategy(jet_leaves(&JetContext::new(2).unwrap()))) {
        // Two derivatives on first-order leaves need third-order connection
        // jets, one past the default.
        let ctx = JetContext::new(2).unwrap().upgraded(3, 3).unwrap();
        let d01 = ctx
            .total_derivative(&ctx.total_derivative(&e, 0).unwrap(), 1)
            .unwrap();
        let d10 = ctx
            .total_derivative(&ctx.total_derivative(&e, 1).unwrap(), 0)
            .unwrap();
        let v = is_zero(&d01.sub(&d10), &cfg_pos(&ctx)).unwrap();
        prop_assert!(v.is_proven(), "{v}");
    }

    #[test]
    fn total_derivative_satisfies_leibniz(
        f in expr_strategy(jet_leaves(&JetContext::new(2).unwrap())),
        g in expr_strategy(jet_leaves(&JetContext::new(2).unwrap())),
    ) {
        let ctx = JetContext::new(2).unwrap();
        for lam in 0..2 {
            let lhs = ctx.total_derivative(&f.mul(&g), lam).unwrap();
            let rhs = ctx
                .total_derivative(&f, lam)
                .unwrap()
                .mul(&g)
                .add(&f.mul(&ctx.total_derivative(&g, lam).unwrap()));
            let v = is_zero(&lhs.sub(&rhs), &cfg_pos(&ctx)).unwrap();
            prop_assert!(v.is_proven(), "direction {lam}: {v}");
        }
    }

    #[test]
    fn euler_lagrange_annihilates_random_divergences(
        w0 in expr_strategy(order_zero_leaves(&JetContext::new(2).unwrap())),
        w1 in expr_strategy(order_zero_leaves(&JetContext::new(2).unwrap())),
    ) {
        let ctx = JetContext::new(2).unwrap();
        let div = ctx
            .total_derivative(&w0, 0)
            .unwrap()
            .add(&ctx.total_derivative(&w1, 1).unwrap());
        let l = LagrangianDensity::new(&ctx, div).unwrap();
        let el = euler_lagrange(&l).unwrap();
        let zcfg = cfg_pos(&ctx);
        for a in 0..2 {
            for b in a..2 {
                let v = is_zero(el.metric(a, b), &zcfg).unwrap();
                prop_assert!(v.is_proven(), "metric ({a},{b}): {v}");
            }
        }
        for mu in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let v = is_zero(el.connection(mu, a, b), &zcfg).unwrap();
                    prop_assert!(v.is_proven(), "connection ({mu},{a},{b}): {v}");
                }
            }
        }
    }
}
