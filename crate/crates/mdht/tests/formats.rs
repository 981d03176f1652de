use mdht::formats::{
    certificate_from_json, certificate_to_json, cover_from_json, cover_to_json, direction_set_from_json,
    direction_set_to_json, field_from_bytes, field_to_bytes, read_field, report_from_json, report_to_json, sha256_hex,
    write_field, Meta,
};
use mdht_core::certifier::{certify, Strategy};
use mdht_core::directions::{boustrophedon_curve_samples, lacunary_uniform, product, uniform, DirectionSet};
use mdht_core::geometry::{curve_cover, grid_cover_for_product, partition_points_2d};
use mdht_core::probe::{ProbeGrid, ProbeReport, ProbeResult, RegionEnergy, SvEnergy};
use mdht_core::rational::rat;
use mdht_core::spectral::SampledField;
use proptest::prelude::*;

fn meta() -> Meta {
    Meta::new(vec![mdht::formats::digest("in.json", b"abc")])
}

#[test]
fn sha256_of_known_strings() {
    assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

#[test]
fn direction_sets_round_trip_exactly() {
    let sets = [
        uniform(12).unwrap(),
        lacunary_uniform(3, 5).unwrap(),
        product(&[uniform(3).unwrap(), uniform(2).unwrap()]).unwrap(),
        DirectionSet::new(2, vec![vec![rat(-7, 3), rat(1, 1_000_003)], vec![rat(5, 1), rat(0, 1)]], "odd").unwrap(),
    ];
    for s in sets {
        let bytes = direction_set_to_json(&s, meta()).unwrap();
        let back = direction_set_from_json(&bytes).unwrap();
        assert_eq!(back.points(), s.points());
        assert_eq!(back.label(), s.label());
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("\"version\"") && text.contains("\"sha256\""));
    }
}

#[test]
fn rejects_malformed_direction_sets() {
    let bad = [
        r#"{"dim":1,"label":"x","points":[["1/0"]]}"#,
        r#"{"dim":2,"label":"x","points":[["1/2"]]}"#,
        r#"{"dim":1,"label":"x","points":[["1/2"],["2/4"]]}"#,
        r#"{"dim":1,"label":"x","points":[["a"]]}"#,
    ];
    for b in bad {
        assert!(direction_set_from_json(b.as_bytes()).is_err(), "{b}");
    }
}

#[test]
fn covers_round_trip() {
    let g = product(&[uniform(4).unwrap(), uniform(4).unwrap()]).unwrap();
    let b = boustrophedon_curve_samples(4).unwrap();
    let covers = [
        grid_cover_for_product(&g, &[2, 2]).unwrap(),
        grid_cover_for_product(&uniform(8).unwrap(), &[2]).unwrap(),
        curve_cover(&b.samples, &b.curve, 2).unwrap(),
        partition_points_2d(&g, 2).unwrap().cover,
    ];
    for c in covers {
        let back = cover_from_json(&cover_to_json(&c, meta()).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}

#[test]
fn cover_with_wrong_members_is_rejected() {
    let g = uniform(4).unwrap();
    let c = grid_cover_for_product(&g, &[2]).unwrap();
    let text = String::from_utf8(cover_to_json(&c, meta()).unwrap()).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["cells"][0]["members"] = serde_json::json!([0, 3]);
    assert!(cover_from_json(v.to_string().as_bytes()).is_err());
}

#[test]
fn certificates_round_trip() {
    let cases = [
        (uniform(16).unwrap(), Strategy::Dyadic1d),
        (product(&[uniform(4).unwrap(), uniform(4).unwrap()]).unwrap(), Strategy::ProductGrid),
        (lacunary_uniform(3, 4).unwrap(), Strategy::LacunaryMixed),
        (boustrophedon_curve_samples(4).unwrap().samples, Strategy::CurvePairs { curve: None }),
        (uniform(5).unwrap(), Strategy::Trivial),
    ];
    for (omega, s) in cases {
        let c = certify(&omega, &s).unwrap();
        let back = certificate_from_json(&certificate_to_json(&c, meta()).unwrap()).unwrap();
        assert_eq!(back, c, "{}", s.name());
    }
}

fn report() -> ProbeReport {
    ProbeReport {
        omega_label: "U4".into(),
        grid: ProbeGrid { shape: vec![8, 16], box_len: vec![64.0, 32.0], origin: vec![-32.5, -31.5] },
        probes: vec![
            ProbeResult { name: "sharpness".into(), rayleigh: 1.234_567_890_123_456_7, seed: None },
            ProbeResult { name: "random0".into(), rayleigh: 0.1 + 0.2, seed: Some(u64::MAX) },
        ],
        max_rayleigh: 1.234_567_890_123_456_7,
        regions: Some(vec![RegionEnergy {
            v: vec![rat(1, 4)],
            energy: SvEnergy { energy: 5e-324, c_hat: f64::MAX, c_prime_min: 1.0 / 3.0, points: 17 },
        }]),
    }
}

#[test]
fn reports_round_trip_bit_for_bit() {
    let r = report();
    let back = report_from_json(&report_to_json(&r, meta()).unwrap()).unwrap();
    assert_eq!(back, r);
    let bare = ProbeReport { regions: None, ..r };
    assert_eq!(report_from_json(&report_to_json(&bare, meta()).unwrap()).unwrap(), bare);
}

#[test]
fn fields_round_trip_and_reject_damage() {
    let f = SampledField::from_fn(vec![4, 8], vec![2.0, 3.5], vec![-1.0, 0.25], |x| (x[0] * 3.1).sin() / (1.0 + x[1] * x[1]))
        .unwrap();
    let bytes = field_to_bytes(&f, meta()).unwrap();
    assert_eq!(field_from_bytes(&bytes).unwrap(), f);
    let mut buf = Vec::new();
    write_field(&mut buf, &f, meta()).unwrap();
    assert_eq!(buf, bytes);
    assert_eq!(read_field(&mut buf.as_slice()).unwrap(), f);
    assert!(field_from_bytes(&bytes[..bytes.len() - 1]).is_err());
    let mut wrong = bytes.clone();
    wrong[0] = b'X';
    assert!(field_from_bytes(&wrong).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_finite_field_round_trips(
        shape in prop::collection::vec(prop::sample::select(vec![1usize, 2, 4, 8]), 1..4),
        seed in any::<u64>(),
    ) {
        let total: usize = shape.iter().product();
        let mut s = seed;
        let vals: Vec<f64> = (0..total).map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            f64::from_bits(s >> 2) * if s & 1 == 0 { 1.0 } else { -1.0 }
        }).map(|v| if v.is_finite() { v } else { 0.0 }).collect();
        let d = shape.len();
        let f = SampledField::new(shape, vec![1.5; d], vec![-0.75; d], vals).unwrap();
        let back = field_from_bytes(&field_to_bytes(&f, meta()).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn report_floats_survive_json(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, y in 0.0f64..1e300) {
        let mut r = report();
        r.probes[0].rayleigh = x;
        r.max_rayleigh = y;
        let back = report_from_json(&report_to_json(&r, meta()).unwrap()).unwrap();
        prop_assert_eq!(back.probes[0].rayleigh.to_bits(), x.to_bits());
        prop_assert_eq!(back.max_rayleigh.to_bits(), y.to_bits());
    }
}
