use std::collections::BTreeMap;

use mdht::check::{check_all, AuditFixture};
use mdht::families::{build, format_params, natural_strategy, parse_params, spec_of, FAMILIES};
use mdht::fit::{fit_growth, points_from_rows, Model};
use mdht::suite::{choose_grid, probe_seeds, run_suite, BoxChoice, Suite};
use mdht::sweep::{read_sweep_csv, run_sweep, SweepPlan, COLUMNS};
use mdht::RustFft;
use mdht_core::certifier::{certify, Strategy};
use mdht_core::directions::{lacunary_uniform, product, uniform};
use mdht_core::probe::{ProbeGrid, ProbeReport};
use proptest::prelude::*;

fn plan(family: &str, values: &[&str]) -> SweepPlan {
    SweepPlan {
        family: family.into(),
        key: None,
        values: values.iter().map(|s| s.to_string()).collect(),
        fixed: BTreeMap::new(),
        suite: "random:3".into(),
        strategy: None,
        grid: vec![32],
        box_choice: "auto".into(),
        seed: 5,
    }
}

#[test]
fn exact_log_data_gives_unit_slope() {
    let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0f64].iter().map(|&n| (n, 3.0 + n.ln())).collect();
    let f = fit_growth(&pts, Model::LogN).unwrap();
    assert!((f.slope - 1.0).abs() <= 1e-9);
    assert!((f.intercept - 3.0).abs() <= 1e-9);
    assert!(f.residual < 1e-20);
    assert!(f.slope_ci95.0 <= f.slope && f.slope <= f.slope_ci95.1);
}

#[test]
fn each_model_recovers_its_own_data() {
    let ns = [3.0, 5.0, 9.0, 17.0, 40.0f64];
    let sq: Vec<_> = ns.iter().map(|&n| (n, 0.5 + 2.0 * n.ln().sqrt())).collect();
    let f = fit_growth(&sq, Model::SqrtLogN).unwrap();
    assert!((f.slope - 2.0).abs() < 1e-9 && (f.intercept - 0.5).abs() < 1e-9);
    let pw: Vec<_> = ns.iter().map(|&n| (n, 1.5 * n.powf(0.25))).collect();
    let f = fit_growth(&pw, Model::Power).unwrap();
    assert!((f.slope - 0.25).abs() < 1e-9 && (f.intercept - 1.5).abs() < 1e-9);
    assert!((f.predict(100.0) - 1.5 * 100f64.powf(0.25)).abs() < 1e-9);
    let c = fit_growth(&[(1.0, 2.0), (2.0, 4.0), (3.0, 2.0), (4.0, 4.0)], Model::Constant).unwrap();
    assert_eq!((c.intercept, c.residual), (3.0, 4.0));
}

#[test]
fn ci_uses_student_t() {
    // Residuals (+e, -e, -e, +e) about a line; slope stderr is sqrt(rss / 2 / sxx).
    let e = 0.1;
    let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 3.0, 4.0]
        .iter()
        .zip([e, -e, -e, e])
        .map(|(&x, r)| (x.exp(), 2.0 * x + r))
        .collect();
    let f = fit_growth(&pts, Model::LogN).unwrap();
    let se = (4.0 * e * e / 2.0 / 5.0f64).sqrt();
    assert!((f.slope_stderr - se).abs() < 1e-12);
    // t quantile 0.975 with 2 degrees of freedom.
    let t = 4.302652729911275;
    assert!((f.slope_ci95.1 - f.slope - t * se).abs() < 1e-9);
}

#[test]
fn fit_preconditions() {
    assert!(fit_growth(&[(2.0, 1.0), (3.0, 1.0), (4.0, 1.0)], Model::LogN).is_err());
    assert!(fit_growth(&[(4.0, 1.0), (4.0, 2.0), (4.0, 3.0), (4.0, 4.0)], Model::LogN).is_err());
    assert!(fit_growth(&[(2.0, 1.0), (3.0, -1.0), (4.0, 1.0), (5.0, 1.0)], Model::Power).is_err());
    assert!(fit_growth(&[(2.0, f64::NAN), (3.0, 1.0), (4.0, 1.0), (5.0, 1.0)], Model::LogN).is_err());
    assert!(Model::parse("cubic").is_err());
    for m in [Model::LogN, Model::SqrtLogN, Model::Power, Model::Constant] {
        assert_eq!(Model::parse(m.name()).unwrap(), m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fitted_line_reproduces_any_affine_data(a in -5.0f64..5.0, b in -3.0f64..3.0, k in 4usize..10) {
        let pts: Vec<_> = (0..k).map(|i| {
            let n = 2f64.powi(i as i32 + 1);
            (n, a + b * n.ln())
        }).collect();
        let f = fit_growth(&pts, Model::LogN).unwrap();
        prop_assert!((f.slope - b).abs() < 1e-9 && (f.intercept - a).abs() < 1e-9);
    }
}

#[test]
fn families_build_expected_sets() {
    let p = |s: &[&str]| parse_params(s).unwrap();
    let u = build("uniform", &p(&["M=8"])).unwrap();
    assert!(u.omega.same_points(&uniform(8).unwrap()));
    assert_eq!(u.spec.unwrap().sizes(), &[8]);
    let g = build("grid", &p(&["M=3"])).unwrap();
    assert_eq!(g.omega.len(), 9);
    assert_eq!(g.strategy, Strategy::ProductGrid);
    let l = build("lacunary", &p(&["R=3", "M=4"])).unwrap();
    assert!(l.omega.same_points(&lacunary_uniform(3, 4).unwrap()));
    let b = build("boustrophedon", &p(&["M=4"])).unwrap();
    assert_eq!(b.omega.len(), 16);
    let t = build("theta", &p(&["index=2"])).unwrap();
    assert!(t.omega.len() > 1 && t.spec.is_none());
    let pr = build("product", &p(&["sizes=4x2"])).unwrap();
    assert_eq!(pr.spec.unwrap().sizes(), &[4, 2]);
    assert!(build("product", &p(&["sizes=2x4"])).unwrap().spec.is_none());
    assert!(build("uniform", &p(&["M=8", "R=2"])).is_err());
    assert!(build("nothing", &p(&[])).is_err());
    assert!(parse_params(&["M"]).is_err());
    assert!(parse_params(&["M=1", "M=2"]).is_err());
    assert_eq!(format_params(&p(&["b=2", "a=1"])), "a=1;b=2");
    assert_eq!(FAMILIES.len(), 7);
}

#[test]
fn spec_detection_and_natural_strategy() {
    let g = product(&[uniform(4).unwrap(), uniform(2).unwrap()]).unwrap();
    assert_eq!(spec_of(&g).unwrap().sizes(), &[4, 2]);
    assert!(spec_of(&lacunary_uniform(2, 3).unwrap()).is_none());
    assert!(spec_of(&product(&[uniform(2).unwrap(), uniform(4).unwrap()]).unwrap()).is_none());
    assert_eq!(natural_strategy(&uniform(4).unwrap()), Strategy::Dyadic1d);
    assert_eq!(natural_strategy(&g), Strategy::ProductGrid);
}

#[test]
fn suite_parsing_and_grids() {
    let s = Suite::parse("sharpness+random:4+refined:2+cutoff:0.25").unwrap();
    assert!(s.sharpness && s.random == 4 && s.refined == Some(2) && s.cutoff == 0.25);
    assert_eq!(Suite::parse("random").unwrap().random, 32);
    for bad in ["", "refined", "random:x", "cutoff", "blue"] {
        assert!(Suite::parse(bad).is_err(), "{bad}");
    }
    assert!(choose_grid(None, 2, &[48], &BoxChoice::Auto).is_err());
    let g = choose_grid(None, 2, &[16, 8], &BoxChoice::Lengths(vec![4.0])).unwrap();
    assert_eq!((g.box_len, g.origin), (vec![4.0, 4.0], vec![-2.0, -2.0]));
    assert_eq!(probe_seeds(3, 4), probe_seeds(3, 4));
    assert_ne!(probe_seeds(3, 2), probe_seeds(4, 2));
}

#[test]
fn suite_reports_every_probe_in_order() {
    let omega = uniform(4).unwrap();
    let spec = spec_of(&omega);
    let grid = choose_grid(spec.as_ref(), 2, &[64], &BoxChoice::Auto).unwrap();
    let suite = Suite::parse("sharpness+random:2+refined:2").unwrap();
    let r = run_suite(&omega, spec.as_ref(), &suite, &grid, 1, true, &RustFft::new()).unwrap();
    let names: Vec<_> = r.probes.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names, ["sharpness", "random0", "random1", "refined(sharpness,2)"]);
    assert!(r.probes[3].rayleigh >= r.probes[0].rayleigh);
    assert_eq!(r.max_rayleigh, r.probes.iter().map(|p| p.rayleigh).fold(0.0, f64::max));
    assert!(!r.regions.unwrap().is_empty());
    assert!(run_suite(&lacunary_uniform(2, 2).unwrap(), None, &suite, &grid, 1, false, &RustFft::new()).is_err());
}

#[test]
fn sweep_is_deterministic_and_ordered() {
    let p = plan("uniform", &["8", "2", "4"]);
    let a = run_sweep(&p, &RustFft::new()).unwrap();
    let b = run_sweep(&p, &RustFft::new()).unwrap();
    assert_eq!(a.csv, b.csv);
    let text = String::from_utf8(a.csv.clone()).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with(&format!("# mdht {} plan-sha256=", mdht::formats::VERSION)));
    assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
    let rows = read_sweep_csv(&a.csv).unwrap();
    assert_eq!(rows, a.rows);
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), [8, 2, 4]);
    assert!(rows.iter().all(|r| r.ok() && r.seed == 5));
    assert_eq!(rows[0].certified_upper, Some(certify(&uniform(8).unwrap(), &Strategy::Dyadic1d).unwrap().value));
    let mut other = p.clone();
    other.seed = 6;
    assert_ne!(run_sweep(&other, &RustFft::new()).unwrap().csv, a.csv);
}

#[test]
fn sweep_errors_and_partial_failures() {
    assert!(run_sweep(&plan("uniform", &[]), &RustFft::new()).is_err());
    assert!(run_sweep(&plan("nothing", &["1"]), &RustFft::new()).is_err());
    let mut bad_suite = plan("uniform", &["2"]);
    bad_suite.suite = "wobble".into();
    assert!(run_sweep(&bad_suite, &RustFft::new()).is_err());
    let out = run_sweep(&plan("uniform", &["4", "0", "x"]), &RustFft::new()).unwrap();
    assert!(out.rows[0].ok());
    for r in &out.rows[1..] {
        assert!(r.status.starts_with("error: ") && r.rayleigh_lower.is_none() && r.certified_upper.is_none());
    }
    let mut clash = plan("lacunary", &["2"]);
    clash.fixed.insert("R".into(), "3".into());
    assert!(run_sweep(&clash, &RustFft::new()).is_err());
}

#[test]
fn shared_box_is_common_to_all_rows() {
    let mut p = plan("uniform", &["2", "4", "8"]);
    p.box_choice = "shared".into();
    let out = run_sweep(&p, &RustFft::new()).unwrap();
    assert!(out.rows.iter().all(|r| r.ok() && r.grid_meta == out.rows[0].grid_meta));
    let mut keyed = plan("lacunary", &["2", "3"]);
    keyed.fixed.insert("M".into(), "2".into());
    keyed.box_choice = "shared".into();
    assert!(run_sweep(&keyed, &RustFft::new()).is_err());
    keyed.box_choice = "auto".into();
    assert!(run_sweep(&keyed, &RustFft::new()).unwrap().rows.iter().all(|r| r.ok()));
}

#[test]
fn plans_serialise_with_defaults() {
    let p: SweepPlan =
        serde_json::from_str(r#"{"family":"uniform","values":["2","4"],"suite":"random:2","grid":[32],"seed":1}"#).unwrap();
    assert_eq!(p.box_choice, "auto");
    assert!(p.key.is_none() && p.fixed.is_empty());
    assert_eq!(p.digest(), p.clone().digest());
}

#[test]
fn points_skip_failed_rows() {
    let out = run_sweep(&plan("uniform", &["2", "0", "4"]), &RustFft::new()).unwrap();
    let pts = points_from_rows(&out.rows);
    assert_eq!(pts.iter().map(|p| p.0).collect::<Vec<_>>(), [2.0, 4.0]);
}

#[test]
fn check_suite_passes_and_flags_bad_fixtures() {
    let omega = uniform(8).unwrap();
    let cert = certify(&omega, &Strategy::Dyadic1d).unwrap();
    let report = |m: f64| ProbeReport {
        omega_label: omega.label().into(),
        grid: ProbeGrid { shape: vec![4, 4], box_len: vec![1.0; 2], origin: vec![0.0; 2] },
        probes: vec![],
        max_rayleigh: m,
        regions: None,
    };
    let mut tampered = cert.clone();
    tampered.children[0].value = 0.25;
    let fixtures = vec![
        AuditFixture { name: "good".into(), cert: cert.clone(), report: report(1.5) },
        AuditFixture { name: "tampered".into(), cert: tampered, report: report(1.5) },
        AuditFixture { name: "low".into(), cert, report: report(100.0) },
    ];
    let s = check_all(&RustFft::new(), &fixtures);
    let failed: Vec<_> = s.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["audit tampered", "audit low"]);
    assert_eq!((s.failed, s.all_passed), (2, false));
    assert_eq!(s.passed + s.failed, s.checks.len());
    let json = serde_json::to_value(&s).unwrap();
    assert_eq!(json["checks"].as_array().unwrap().len(), s.checks.len());
    let clean = check_all(&RustFft::new(), &[]);
    assert!(clean.all_passed, "{:?}", clean.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
}
