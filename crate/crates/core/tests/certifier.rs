use mdht_core::certifier::{
    certify, certify_affine, certify_slice, certify_split, replay_3dgen_step, replay_algebraic_recursion,
    replay_curve_recursion, replay_product_recursion, replay_thm3d_constants, soundness_audit, verify_certificate,
    BoundCertificate, Provenance, Rule, Strategy,
};
use mdht_core::directions::{boustrophedon_curve_samples, lacunary_uniform, product, uniform, DirectionSet};
use mdht_core::probe::{report_from, ProbeResult};
use mdht_core::rational::{int, rat};
use mdht_core::spectral::{apply_maximal, NaiveDft, SampledField};
use mdht_core::Error;
use proptest::prelude::*;

fn grid(m: u64) -> DirectionSet {
    let u = uniform(m).unwrap();
    product(&[u.clone(), u]).unwrap()
}

/// Real-valued recomputation of a tree, rounding to nearest. Upward rounding
/// can only make the certified value larger.
fn nearest_value(c: &BoundCertificate) -> f64 {
    let kids: Vec<f64> = c.children.iter().map(nearest_value).collect();
    match c.rule {
        Rule::Single => 1.0,
        Rule::Trivial => c.size as f64,
        Rule::Ortho => {
            let e = c.e_sup.as_ref().unwrap().value as f64;
            let m = kids[1..].iter().cloned().fold(0.0, f64::max);
            kids[0] + e.sqrt() * (m + 1.0)
        }
        Rule::Split => kids.iter().sum(),
        Rule::Affine | Rule::Slice => kids[0],
    }
}

#[test]
fn curve_replay_against_closed_form() {
    for (n, d) in [(1u64, 1u64), (2, 1), (64, 1), (1 << 10, 3), (1 << 16, 16), (1 << 20, 5)] {
        let k = n.trailing_zeros() as f64;
        let want = 1.0 + 3.0 * (d as f64).sqrt() * k;
        let got = replay_curve_recursion(n, d).unwrap();
        assert!(got >= want * (1.0 - 1e-15) && got - want < 1e-9 * want, "{n} {d}: {got} vs {want}");
    }
    assert!(replay_curve_recursion(0, 1).is_err());
    assert!(replay_curve_recursion(8, 0).is_err());
}

#[test]
fn product_replay_against_closed_form() {
    let c = 5.0 / (1.0 - 0.5f64.sqrt());
    for r in 0..=30u32 {
        let want: f64 = 1.0 + (1..=r).map(|k| 5.0 * 2f64.powf(k as f64 / 2.0)).sum::<f64>();
        let got = replay_product_recursion(r).unwrap();
        assert!(got.value >= want * (1.0 - 1e-15) && got.value - want < 1e-10 * want);
        assert!((got.constant - c).abs() < 1e-12);
        assert!(got.within_closed_form, "R = {r}");
    }
    assert!(replay_product_recursion(61).is_err());
}

#[test]
fn algebraic_replay_against_recursion() {
    fn bound(n: u64, d: u64, c: f64) -> f64 {
        if n > 1 && (d * d) as f64 <= c * n as f64 {
            bound(n / 2, d, c) + 5.0 * (d as f64).sqrt()
        } else {
            n as f64
        }
    }
    for (n, d, c) in [(1u64 << 12, 2u64, 0.5), (1 << 20, 7, 0.01), (64, 100, 1.0), (1 << 30, 1, 1e-3)] {
        let r = replay_algebraic_recursion(n, d, c).unwrap();
        let want = bound(n, d, c);
        assert!(r.value >= want * (1.0 - 1e-15) && r.value - want < 1e-9 * want, "{n} {d} {c}");
        assert_eq!(r.c, c);
        assert!(r.note.contains(&c.to_string()));
    }
    assert!(replay_algebraic_recursion(16, 1, 0.0).is_err());
    assert!(replay_algebraic_recursion(12, 1, 1.0).is_err());
}

#[test]
fn thm3d_constants_resubstitute() {
    for (a1, a2) in [(1.0, 1.0), (3.5, 0.25), (100.0, 40.0)] {
        let k = replay_thm3d_constants(a1, a2).unwrap();
        assert!(2.0 * a2 * k.c < 0.25);
        let lhs = 8f64.powi(4) * a1 * k.c0 * k.c0;
        assert!((lhs - k.c).abs() <= 1e-14 * k.c);
        assert!((k.big_c0 - 2.0 * (a1 / (k.c0 * k.c0) + 1.0)).abs() <= 1e-12 * k.big_c0);
        assert!(k.a_min >= 5.0 / std::f64::consts::LN_2);
        assert!(k.a_min >= 2.0 * a1 / (k.c0 * k.c0));
        assert!(k.a_min >= k.big_c0);
        assert!(k.lower_bounds().contains(&k.a_min));
    }
    assert!(replay_thm3d_constants(0.0, 1.0).is_err());
}

#[test]
fn gen3d_step_contracts() {
    let a1: f64 = 1e-4;
    let eps = 1.0 / (20.0 * a1.powf(0.25));
    let h = |l: f64| l.sqrt();
    let ln_n = 600.0;
    let s = replay_3dgen_step(ln_n, &h, a1, 2.0, eps).unwrap();
    assert!(s.contraction < 0.5 && s.contraction <= s.contraction_bound);
    assert!((s.omega - h(ln_n) / ln_n).abs() < 1e-15);
    // A √d₀ ln N = A N^{1/4} h(N), compared in logs.
    let want = 2f64.ln() + ln_n / 4.0 + h(ln_n).ln();
    assert!((s.zero_set_bound.ln() - want).abs() < 1e-9);
    assert!((s.components / (a1 * s.d0 * s.d0) - 1.0).abs() < 1e-12);
    assert!((s.per_cell * s.omega.powi(4) - a1).abs() < 1e-12 * a1);

    let named = |ln_n: f64, h: &dyn Fn(f64) -> f64, eps: f64| match replay_3dgen_step(ln_n, h, a1, 2.0, eps) {
        Err(Error::Infeasible(m)) => m,
        other => panic!("expected a failed condition, got {other:?}"),
    };
    assert!(named(600.0, &|l: f64| l * 0.9, eps).contains("h(N)/ln N"));
    assert!(named(600.0, &|_| 1.5, eps).contains("h(N) > 1/eps"));
    assert!(named(20.0, &h, eps).contains("h((ln N)^4)"));
    let big_a1 = replay_3dgen_step(600.0, &h, 1.0, 2.0, 0.4).unwrap_err();
    assert!(format!("{big_a1}").contains("10 A1^(1/4) eps"));
}

#[test]
fn strategies_round_upward() {
    let cases: Vec<(DirectionSet, Strategy)> = vec![
        (uniform(64).unwrap(), Strategy::Dyadic1d),
        (uniform(32).unwrap(), Strategy::CurvePairs { curve: None }),
        (grid(8), Strategy::ProductGrid),
        (grid(4), Strategy::HamSandwich2d { rounds: 2 }),
        (lacunary_uniform(4, 8).unwrap(), Strategy::LacunaryMixed),
    ];
    for (omega, s) in cases {
        let c = certify(&omega, &s).unwrap();
        assert!(verify_certificate(&c).is_empty(), "{}", s.name());
        assert!(c.value >= nearest_value(&c), "{}", s.name());
        assert_eq!(c.omega_label, omega.label());
        assert_eq!(c.size, omega.len());
    }
}

#[test]
fn explicit_curve_replays() {
    let b = boustrophedon_curve_samples(8).unwrap();
    let default = certify(&b.samples, &Strategy::CurvePairs { curve: None }).unwrap();
    assert_eq!(default.value, replay_curve_recursion(64, 8).unwrap());
    let explicit = certify(&b.samples, &Strategy::CurvePairs { curve: Some(b.curve) }).unwrap();
    assert!(verify_certificate(&explicit).is_empty());
    assert!(explicit.value <= default.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_line_sets_certify(nums in prop::collection::btree_set(-200i64..200, 1..40), den in 1i64..13) {
        let pts = nums.iter().map(|&p| vec![rat(p, den)]).collect();
        let omega = DirectionSet::new(1, pts, "random").unwrap();
        for s in [Strategy::Dyadic1d, Strategy::CurvePairs { curve: None }, Strategy::Trivial] {
            let c = certify(&omega, &s).unwrap();
            prop_assert!(verify_certificate(&c).is_empty());
            prop_assert!(c.value >= 1.0);
        }
        let t = certify(&omega, &Strategy::Trivial).unwrap();
        prop_assert_eq!(t.value, omega.len() as f64);
    }

    #[test]
    fn random_planar_sets_certify(pts in prop::collection::btree_set((0i64..40, 0i64..40), 2..48)) {
        let pts = pts.iter().map(|&(a, b)| vec![rat(a, 7), rat(b, 11)]).collect();
        let omega = DirectionSet::new(2, pts, "planar").unwrap();
        let c = certify(&omega, &Strategy::HamSandwich2d { rounds: 2 }).unwrap();
        prop_assert!(verify_certificate(&c).is_empty());
        prop_assert!(c.value <= omega.len() as f64);
    }
}

fn first_ortho(c: &mut BoundCertificate) -> Option<&mut BoundCertificate> {
    if c.rule == Rule::Ortho {
        return Some(c);
    }
    c.children.iter_mut().find_map(first_ortho)
}

#[test]
fn tampering_is_detected() {
    let base = certify(&uniform(32).unwrap(), &Strategy::Dyadic1d).unwrap();

    let mut bumped = base.clone();
    bumped.value = bumped.value * 0.5;
    assert!(!verify_certificate(&bumped).is_empty());

    let mut deep = base.clone();
    deep.children[1].value -= 1.0;
    let issues = verify_certificate(&deep);
    assert!(issues.iter().any(|i| i.path == vec![1]), "{issues:?}");
    let mut top = base.clone();
    for k in top.children[1..].iter_mut() {
        k.value += 1.0;
    }
    assert!(verify_certificate(&top).iter().any(|i| i.path.is_empty()));

    let mut sampled = base.clone();
    first_ortho(&mut sampled).unwrap().e_sup.as_mut().unwrap().provenance = Provenance::Sampled;
    assert!(verify_certificate(&sampled).iter().any(|i| i.message.contains("sampled")));

    let mut lost = base.clone();
    lost.children.pop();
    assert!(!verify_certificate(&lost).is_empty());

    let trivial = BoundCertificate { value: 3.0, ..BoundCertificate::trivial("t", 4) };
    assert!(!verify_certificate(&trivial).is_empty());
}

#[test]
fn wrappers_and_split() {
    let u = uniform(16).unwrap();
    let base = certify(&u, &Strategy::Dyadic1d).unwrap();
    let a = certify_affine(&u, &[rat(3, 2)], &[int(-7)], &Strategy::Dyadic1d).unwrap();
    assert_eq!((a.rule, a.value), (Rule::Affine, base.value));
    let s = certify_slice(&u, &[rat(1, 3), int(2)], &Strategy::Dyadic1d).unwrap();
    assert_eq!((s.rule, s.value, s.size), (Rule::Slice, base.value, 16));
    let parts = vec![base.clone(), BoundCertificate::single("x")];
    let sp = certify_split("both", 17, parts).unwrap();
    assert_eq!(sp.value, base.value + 1.0);
    assert!(verify_certificate(&sp).is_empty());
    assert!(certify_split("none", 1, vec![]).is_err());
}

#[test]
fn audit_against_measured_probe() {
    let omega = uniform(8).unwrap();
    let f = SampledField::from_fn(vec![64, 64], vec![8.0, 8.0], vec![-4.0, -4.0], |x| {
        if x[0].abs() < 0.5 && x[1].abs() < 2.0 { 1.0 } else { 0.0 }
    })
    .unwrap();
    let m = apply_maximal(&f, &omega, &NaiveDft).unwrap().norm() / f.norm();
    let rep = report_from(&omega, &f, vec![ProbeResult { name: "box".into(), rayleigh: m, seed: None }]);
    for s in [Strategy::Dyadic1d, Strategy::CurvePairs { curve: None }, Strategy::Trivial] {
        let cert = certify(&omega, &s).unwrap();
        let out = soundness_audit(&cert, &rep).unwrap();
        assert!(out.sound, "{}: {out:?}", s.name());
        assert_eq!(out.measured, m);
    }
    let mut low = certify(&omega, &Strategy::Trivial).unwrap();
    low.value = 1.0;
    low.rule = Rule::Single;
    low.size = 1;
    let mut big = rep.clone();
    big.max_rayleigh = 1.5;
    assert!(!soundness_audit(&low, &big).unwrap().sound);
    let other = certify(&uniform(4).unwrap(), &Strategy::Trivial).unwrap();
    assert!(soundness_audit(&other, &rep).is_err());
}

#[test]
fn inapplicable_is_an_error_not_a_bound() {
    let scattered = DirectionSet::new(2, vec![vec![int(0), int(1)], vec![int(1), int(3)], vec![int(2), int(0)]], "s").unwrap();
    let e = certify(&scattered, &Strategy::ProductGrid).unwrap_err();
    assert!(matches!(e, Error::Inapplicable { .. }));
    let e = certify(&uniform(5).unwrap(), &Strategy::HamSandwich2d { rounds: 1 }).unwrap_err();
    assert!(matches!(e, Error::Inapplicable { .. }));
    assert!(Strategy::parse("lacunary-mixed").is_ok());
    for name in ["trivial", "dyadic-1d", "curve-pairs", "product-grid", "hamsandwich-2d:4", "lacunary-mixed"] {
        assert_eq!(Strategy::parse(name).unwrap().name(), name);
    }
}

#[test]
fn audit_allows_only_rounding_slack() {
    let one = DirectionSet::new(1, vec![vec![rat(1, 3)]], "one").unwrap();
    let cert = certify(&one, &Strategy::Trivial).unwrap();
    assert_eq!(cert.value, 1.0);
    let f = SampledField::from_fn(vec![4, 4], vec![1.0, 1.0], vec![0.0, 0.0], |x| x[0] + 2.0 * x[1]).unwrap();
    let audit = |m: f64| {
        let r = report_from(&one, &f, vec![ProbeResult { name: "p".into(), rayleigh: m, seed: None }]);
        soundness_audit(&cert, &r).unwrap().sound
    };
    assert!(audit(1.0));
    assert!(audit(1.0 + 4e-14));
    assert!(!audit(1.0 + 1e-11));
    assert!(!audit(1.5));
}
