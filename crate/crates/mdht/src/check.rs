//! Quick invariant suite over every module, with a machine-readable summary.

use anyhow::{ensure, Context};
use mdht_core::certifier::{
    certify, certify_affine, certify_slice, replay_curve_recursion, replay_product_recursion, replay_thm3d_constants,
    soundness_audit, verify_certificate, BoundCertificate, Strategy,
};
use mdht_core::directions::{
    boustrophedon_curve_samples, embed_slice, lacunary_uniform, product, uniform, DirectionSet,
};
use mdht_core::geometry::{
    grid_cover_for_product, ham_sandwich_line, is_ham_sandwich, partition_points_2d, stab_count, stab_sup, StabMode,
};
use mdht_core::probe::{
    region_membership, required_box, sv_disjointness_check, ProbeReport, RegionKind, RegionSpec, SharpnessSpec,
};
use mdht_core::rational::{int, rat};
use mdht_core::spectral::{
    apply_hv, apply_maximal, null_projection, shear_transport, wedge_energy_outside, SampledField,
};
use mdht_core::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fft::RustFft;
use crate::formats::VERSION;
use crate::maximal::apply_maximal_par;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub module: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub tool: String,
    pub version: String,
    pub passed: usize,
    pub failed: usize,
    pub all_passed: bool,
    pub checks: Vec<CheckResult>,
}

/// A certificate and report pair audited as part of the run.
pub struct AuditFixture {
    pub name: String,
    pub cert: BoundCertificate,
    pub report: ProbeReport,
}

fn random_field(rng: &mut ChaCha8Rng, shape: &[usize]) -> SampledField {
    let total: usize = shape.iter().product();
    let vals = (0..total).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SampledField::new(shape.to_vec(), vec![1.0; shape.len()], vec![0.0; shape.len()], vals).expect("valid grid")
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Rational> {
    (0..dim).map(|_| rat(rng.gen_range(-12..=12), rng.gen_range(1..=6))).collect()
}

fn spectral_checks(dft: &RustFft, out: &mut Vec<CheckResult>) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    run(out, "spectral_transform", "energy identity", || {
        let mut worst: f64 = 0.0;
        for shape in [vec![64, 64], vec![16, 16, 16]] {
            for _ in 0..5 {
                let f = random_field(&mut rng, &shape);
                let v = random_direction(&mut rng, shape.len() - 1);
                let h = apply_hv(&f, &v, dft)?.norm_sq();
                let p = null_projection(&f, &v, dft)?.norm_sq();
                worst = worst.max((h + p - f.norm_sq()).abs() / f.norm_sq());
            }
        }
        ensure!(worst <= 1e-10, "relative defect {worst:e}");
        Ok(format!("max relative defect {worst:.2e}"))
    });
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    run(out, "spectral_transform", "wedge support", || {
        let mut worst: f64 = 0.0;
        for shape in [vec![128, 128], vec![32, 32, 32]] {
            for _ in 0..3 {
                let f = random_field(&mut rng, &shape);
                let v1 = random_direction(&mut rng, shape.len() - 1);
                let mut v2 = random_direction(&mut rng, shape.len() - 1);
                if v1 == v2 {
                    v2[0] += int(1);
                }
                worst = worst.max(wedge_energy_outside(&f, &v1, &v2, dft)? / f.norm_sq());
            }
        }
        ensure!(worst <= 1e-12, "energy outside the wedge {worst:e}");
        Ok(format!("max outside/‖f‖² {worst:.2e}"))
    });
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    run(out, "spectral_transform", "parallel maximal matches sequential", || {
        let f = random_field(&mut rng, &[32, 32]);
        let omega = uniform(9)?;
        let a = apply_maximal_par(&f, &omega, dft)?;
        let b = apply_maximal(&f, &omega, dft)?;
        ensure!(a.values() == b.values(), "results differ");
        let mut pts = omega.points().to_vec();
        pts.reverse();
        let rev = DirectionSet::new(1, pts, "reversed")?;
        ensure!(apply_maximal_par(&f, &rev, dft)?.values() == a.values(), "depends on point order");
        Ok("bit-identical, permutation invariant".into())
    });
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    run(out, "spectral_transform", "shear transport", || {
        // Band-limited in the last axis so the shear does not alias.
        let f = SampledField::from_fn(vec![32, 32], vec![1.0, 1.0], vec![0.0, 0.0], |x| {
            (std::f64::consts::TAU * (2.0 * x[0] + x[1])).cos() + 0.5 * (std::f64::consts::TAU * x[1]).sin()
        })?;
        let v = vec![rat(rng.gen_range(-5..5), 7)];
        let w = vec![int(1)];
        let lhs = apply_hv(&f, &[v[0].clone() + int(1)], dft)?.norm();
        let rhs = apply_hv(&shear_transport(&f, &w)?, &v, dft)?.norm();
        ensure!((lhs - rhs).abs() <= 1e-10 * lhs.max(1.0), "{lhs} vs {rhs}");
        Ok(format!("‖H f‖ = {lhs:.6}"))
    });
}

fn probe_checks(out: &mut Vec<CheckResult>) {
    run(out, "norm_probe", "region containment", || {
        let spec = SharpnessSpec::new(vec![8, 4])?;
        let omega = spec.omega()?;
        let (lo, hi) = required_box(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut hits = 0;
        for _ in 0..20_000 {
            let v = omega.point(rng.gen_range(0..omega.len())).to_vec();
            let x: Vec<f64> = lo.iter().zip(&hi).map(|(&l, &h)| rng.gen_range(l..h)).collect();
            let m = |k| region_membership(&x, &RegionSpec::new(k, v.clone(), spec.clone()).expect("dims"));
            let (w, xv, sv) = (m(RegionKind::Wv)?, m(RegionKind::Xv)?, m(RegionKind::Sv)?);
            ensure!((!sv || xv) && (!xv || w), "containment fails at {x:?}");
            hits += sv as usize;
        }
        Ok(format!("20000 samples, {hits} in S_v"))
    });
    run(out, "norm_probe", "S_v disjointness", || {
        let spec = SharpnessSpec::new(vec![4, 4])?;
        let pts = spec.omega()?.points().to_vec();
        let mut pairs = 0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                ensure!(sv_disjointness_check(&spec, &pts[i], &pts[j], 8, (i * 97 + j) as u64)?, "overlap");
                pairs += 1;
            }
        }
        Ok(format!("{pairs} pairs of U4xU4"))
    });
}

fn geometry_checks(out: &mut Vec<CheckResult>) {
    run(out, "cell_geometry", "grid lemma", || {
        for n1 in [4u64, 8] {
            let u = uniform(n1)?;
            let cover = grid_cover_for_product(&product(&[u.clone(), u])?, &[2, 2])?;
            let s = stab_sup(&cover, StabMode::Exact)?;
            ensure!(s.e_sup as u64 <= n1 - 1, "E_sup {} > {}", s.e_sup, n1 - 1);
            ensure!(stab_count(&cover, &s.witness) == s.e_sup, "witness does not reproduce");
        }
        Ok("N1 = 4, 8".into())
    });
    run(out, "cell_geometry", "ham-sandwich balance", || {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let (na, nb) = (rng.gen_range(1..20), rng.gen_range(1..20));
            let mut pts = |k: usize| -> Vec<Vec<Rational>> {
                (0..k).map(|_| vec![rat(rng.gen_range(-50..50), 3), rat(rng.gen_range(-50..50), 5)]).collect()
            };
            let (a, b) = (pts(na), pts(nb));
            let cut = ham_sandwich_line(&a, &b)?;
            ensure!(is_ham_sandwich(&cut.line, &a, &b), "unbalanced cut");
        }
        Ok("50 instances".into())
    });
    run(out, "cell_geometry", "partition stabbing", || {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let pts: Vec<Vec<Rational>> = (0..32).map(|_| vec![rat(rng.gen_range(0..1000), 997), rat(rng.gen_range(0..1000), 991)]).collect();
        let omega = DirectionSet::from_points_merging(2, pts, "random")?;
        let part = partition_points_2d(&omega, 2)?;
        let s = stab_sup(&part.cover, StabMode::ExactGeneric)?;
        ensure!(s.e_sup <= part.degree + 1, "E_sup {} > degree + 1", s.e_sup);
        Ok(format!("{} cells, degree {}, E_sup {}", part.cover.cells.len(), part.degree, s.e_sup))
    });
}

fn certifier_checks(dft: &RustFft, fixtures: &[AuditFixture], out: &mut Vec<CheckResult>) {
    run(out, "bound_certifier", "certificates verify", || {
        let cases: Vec<(DirectionSet, Strategy)> = vec![
            (uniform(64)?, Strategy::Dyadic1d),
            (product(&[uniform(8)?, uniform(8)?])?, Strategy::ProductGrid),
            (lacunary_uniform(3, 4)?, Strategy::LacunaryMixed),
            (boustrophedon_curve_samples(4)?.samples, Strategy::CurvePairs { curve: None }),
            (product(&[uniform(4)?, uniform(4)?])?, Strategy::HamSandwich2d { rounds: 2 }),
        ];
        for (omega, s) in &cases {
            let c = certify(omega, s)?;
            let issues = verify_certificate(&c);
            ensure!(issues.is_empty(), "{}: {}", s.name(), issues[0]);
        }
        Ok(format!("{} strategies", cases.len()))
    });
    run(out, "bound_certifier", "replay agreement", || {
        let dy = certify(&uniform(16)?, &Strategy::Dyadic1d)?.value;
        ensure!(dy == 13.0, "dyadic U16 gave {dy}");
        ensure!(replay_curve_recursion(16, 4)? == 25.0, "curve replay");
        let b = boustrophedon_curve_samples(4)?;
        let c = certify(&b.samples, &Strategy::CurvePairs { curve: None })?.value;
        ensure!(c == replay_curve_recursion(16, 4)?, "curve engine {c}");
        let u = uniform(4)?;
        let p = certify(&product(&[u.clone(), u])?, &Strategy::ProductGrid)?.value;
        ensure!(p == replay_product_recursion(2)?.value, "product engine {p}");
        let k = replay_thm3d_constants(1.0, 1.0)?;
        ensure!(k.lower_bounds().iter().all(|&b| k.a_min >= b), "A_min below a bound");
        Ok("dyadic, curve, product, thm3d".into())
    });
    run(out, "bound_certifier", "affine and slice keep values", || {
        let u = uniform(8)?;
        let base = certify(&u, &Strategy::Dyadic1d)?.value;
        let a = certify_affine(&u, &[rat(2, 3)], &[rat(-1, 5)], &Strategy::Dyadic1d)?.value;
        let s = certify_slice(&u, &[rat(3, 4)], &Strategy::Dyadic1d)?.value;
        let auto = certify(&embed_slice(&u, &[int(2)]), &Strategy::Dyadic1d)?.value;
        ensure!(a == base && s == base && auto == base, "{base} {a} {s} {auto}");
        Ok(format!("value {base}"))
    });
    run(out, "bound_certifier", "soundness on U16", || {
        let omega = uniform(16)?;
        let spec = SharpnessSpec::new(vec![16])?;
        let grid = crate::suite::choose_grid(Some(&spec), 2, &[128], &crate::suite::BoxChoice::Auto)?;
        let suite = crate::suite::Suite::parse("sharpness+random:4")?;
        let report = crate::suite::run_suite(&omega, Some(&spec), &suite, &grid, 5, false, dft)?;
        let cert = certify(&omega, &Strategy::Dyadic1d)?;
        let a = soundness_audit(&cert, &report)?;
        ensure!(a.sound, "certified {} below measured {}", a.certified, a.measured);
        Ok(format!("certified {} >= measured {:.4}", a.certified, a.measured))
    });
    run(out, "bound_certifier", "corrupted certificate is caught", || {
        let omega = uniform(16)?;
        let mut cert = certify(&omega, &Strategy::Dyadic1d)?;
        cert.value = 0.5;
        let report = mdht_core::probe::ProbeReport {
            omega_label: omega.label().into(),
            grid: mdht_core::probe::ProbeGrid { shape: vec![1, 1], box_len: vec![1.0; 2], origin: vec![0.0; 2] },
            probes: vec![],
            max_rayleigh: 1.0,
            regions: None,
        };
        let a = soundness_audit(&cert, &report)?;
        ensure!(!a.sound, "corrupted certificate passed the audit");
        Ok(format!("{} issue(s) reported", a.issues.len()))
    });
    for fx in fixtures {
        run(out, "bound_certifier", &format!("audit {}", fx.name), || {
            let a = soundness_audit(&fx.cert, &fx.report)?;
            let detail = a.issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ");
            ensure!(a.sound, "unsound: {detail}");
            Ok(format!("certified {} >= measured {}", a.certified, a.measured))
        });
    }
}

fn run(out: &mut Vec<CheckResult>, module: &str, name: &str, f: impl FnOnce() -> anyhow::Result<String>) {
    let (passed, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(d)) => (true, d),
        Ok(Err(e)) => (false, format!("{e:#}")),
        Err(_) => (false, "panicked".into()),
    };
    out.push(CheckResult { module: module.into(), name: name.into(), passed, detail });
}

/// Runs every check, plus an audit per fixture.
pub fn check_all(dft: &RustFft, fixtures: &[AuditFixture]) -> CheckSummary {
    let mut checks = Vec::new();
    run(&mut checks, "direction_sets", "constructions", || {
        ensure!(uniform(3)?.is_subset_of(&uniform(6)?), "U3 not inside U6");
        ensure!(lacunary_uniform(2, 2)?.is_subset_of(&lacunary_uniform(3, 4)?), "lacunary nesting");
        ensure!(product(&[uniform(3)?, uniform(2)?])?.len() == 6, "product size");
        let b = boustrophedon_curve_samples(4).context("boustrophedon")?;
        b.curve.validate(&b.samples)?;
        Ok("uniform, lacunary, product, boustrophedon".into())
    });
    spectral_checks(dft, &mut checks);
    probe_checks(&mut checks);
    geometry_checks(&mut checks);
    certifier_checks(dft, fixtures, &mut checks);
    let passed = checks.iter().filter(|c| c.passed).count();
    let failed = checks.len() - passed;
    CheckSummary { tool: "mdht".into(), version: VERSION.into(), passed, failed, all_passed: failed == 0, checks }
}
