use mdht_core::directions::{product, uniform, DirectionSet};
use mdht_core::rational::{int, rat};
use mdht_core::spectral::{
    apply_hv, apply_maximal, null_projection, shear_transport, slice_apply, wedge_energy_outside, NaiveDft, SampledField,
};
use mdht_core::Rational;
use num_traits::Signed;
use proptest::prelude::*;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A random trigonometric polynomial with no Nyquist content, stored as its
/// modes so the oracle can evaluate `H_v` mode by mode.
#[derive(Debug, Clone)]
struct Modes {
    shape: Vec<usize>,
    box_len: Vec<f64>,
    terms: Vec<(Vec<i64>, f64, f64)>,
}

impl Modes {
    fn field(&self) -> SampledField {
        let t = self.terms.clone();
        let b = self.box_len.clone();
        SampledField::from_fn(self.shape.clone(), self.box_len.clone(), vec![0.0; self.shape.len()], move |x| {
            t.iter().map(|(k, a, p)| a * (phase(k, &b, x) + p).cos()).sum()
        })
        .unwrap()
    }

    /// `H_v` of `a cos(θ + p)` is `a sgn(ξ·⟨v,1⟩) sin(θ + p)`.
    fn hv(&self, v: &[Rational]) -> SampledField {
        let t = self.terms.clone();
        let b = self.box_len.clone();
        let signs: Vec<f64> = t.iter().map(|(k, _, _)| exact_sign(k, &self.box_len, v)).collect();
        SampledField::from_fn(self.shape.clone(), self.box_len.clone(), vec![0.0; self.shape.len()], move |x| {
            t.iter().zip(&signs).map(|((k, a, p), s)| s * a * (phase(k, &b, x) + p).sin()).sum()
        })
        .unwrap()
    }
}

fn phase(k: &[i64], b: &[f64], x: &[f64]) -> f64 {
    k.iter().zip(b).zip(x).map(|((k, b), x)| TAU * *k as f64 * x / b).sum()
}

/// Box lengths are integers in these tests, so the sign is exact in rationals.
fn exact_sign(k: &[i64], b: &[f64], v: &[Rational]) -> f64 {
    let n = v.len();
    let mut dot = rat(k[n], b[n] as i64);
    for j in 0..n {
        dot += rat(k[j], b[j] as i64) * &v[j];
    }
    if dot.is_positive() {
        1.0
    } else if dot.is_negative() {
        -1.0
    } else {
        0.0
    }
}

fn modes_strategy(shape: Vec<usize>) -> impl Strategy<Value = Modes> {
    let limits = shape.iter().map(|&n| n as i64 / 2 - 1).collect();
    banded_modes(shape, limits)
}

/// Modes with `|k_j| ≤ limits[j]`.
fn banded_modes(shape: Vec<usize>, limits: Vec<i64>) -> impl Strategy<Value = Modes> {
    let dims = shape.len();
    let term = (
        limits.iter().map(|&l| -l..=l).collect::<Vec<_>>(),
        -1.0f64..1.0,
        0.0f64..TAU,
    );
    (proptest::collection::vec(term, 1..6), proptest::collection::vec(1i64..4, dims)).prop_map(move |(terms, b)| Modes {
        shape: shape.clone(),
        box_len: b.iter().map(|&x| x as f64).collect(),
        terms,
    })
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
}

fn max_diff(a: &SampledField, b: &SampledField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hv_matches_mode_oracle_1d(m in modes_strategy(vec![8, 8]), v in small_rational()) {
        let got = apply_hv(&m.field(), &[v.clone()], &NaiveDft).unwrap();
        prop_assert!(max_diff(&got, &m.hv(&[v])) < 1e-10);
    }

    #[test]
    fn hv_matches_mode_oracle_2d(m in modes_strategy(vec![4, 8, 4]), v1 in small_rational(), v2 in small_rational()) {
        let v = [v1, v2];
        let got = apply_hv(&m.field(), &v, &NaiveDft).unwrap();
        prop_assert!(max_diff(&got, &m.hv(&v)) < 1e-10);
    }

    #[test]
    fn energy_identity_and_contraction(m in modes_strategy(vec![8, 8]), v in small_rational()) {
        let f = m.field();
        let h = apply_hv(&f, &[v.clone()], &NaiveDft).unwrap();
        let p = null_projection(&f, &[v], &NaiveDft).unwrap();
        let lhs = h.norm_sq() + p.norm_sq();
        prop_assert!((lhs - f.norm_sq()).abs() <= 1e-10 * f.norm_sq().max(1e-300));
        prop_assert!(h.norm() <= f.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn twice_is_minus_nonnull_part(m in modes_strategy(vec![8, 8]), v in small_rational()) {
        let f = m.field();
        let hh = apply_hv(&apply_hv(&f, &[v.clone()], &NaiveDft).unwrap(), &[v.clone()], &NaiveDft).unwrap();
        let p = null_projection(&f, &[v], &NaiveDft).unwrap();
        let want: Vec<f64> = f.values().iter().zip(p.values()).map(|(a, b)| b - a).collect();
        prop_assert!(max_diff(&hh, &f.with_values(want).unwrap()) < 1e-10);
    }

    #[test]
    fn wedge_support_is_exact(m in modes_strategy(vec![8, 8]), a in small_rational(), b in small_rational()) {
        prop_assume!(a != b);
        let f = m.field();
        let out = wedge_energy_outside(&f, &[a], &[b], &NaiveDft).unwrap();
        prop_assert!(out <= 1e-12 * f.norm_sq());
    }

    #[test]
    fn maximal_is_sublinear_and_order_free(f in modes_strategy(vec![8, 8]), g in modes_strategy(vec![8, 8])) {
        let g = Modes { box_len: f.box_len.clone(), ..g };
        let (ff, gf) = (f.field(), g.field());
        let sum = ff.with_values(ff.values().iter().zip(gf.values()).map(|(a, b)| a + b).collect()).unwrap();
        let omega = uniform(3).unwrap();
        let ms = apply_maximal(&sum, &omega, &NaiveDft).unwrap();
        let mf = apply_maximal(&ff, &omega, &NaiveDft).unwrap();
        let mg = apply_maximal(&gf, &omega, &NaiveDft).unwrap();
        for i in 0..ms.len() {
            prop_assert!(ms.values()[i] <= mf.values()[i] + mg.values()[i] + 1e-12);
        }
        let rev: Vec<Vec<Rational>> = omega.points().iter().rev().cloned().collect();
        let rev = DirectionSet::new(1, rev, "reversed").unwrap();
        let mr = apply_maximal(&ff, &rev, &NaiveDft).unwrap();
        prop_assert_eq!(mr.values(), mf.values());
    }

    #[test]
    fn shear_moves_the_direction(m in banded_modes(vec![32, 32], vec![2, 3]), v in small_rational(), w in -3i64..=3) {
        // Unit boxes make every integer shear grid-preserving; the band keeps
        // sheared modes below the last axis' Nyquist index.
        let m = Modes { box_len: vec![1.0, 1.0], ..m };
        let f = m.field();
        let g = shear_transport(&f, &[int(w)]).unwrap();
        prop_assert!((g.norm() - f.norm()).abs() < 1e-12);
        let lhs = apply_hv(&f, &[&v + int(w)], &NaiveDft).unwrap().norm();
        let rhs = apply_hv(&g, &[v], &NaiveDft).unwrap().norm();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }
}

#[test]
fn cosine_eigenmode_and_constant() {
    let f = SampledField::from_fn(vec![32, 32], vec![1.0, 1.0], vec![0.0, 0.0], |x| (TAU * (3.0 * x[0] + x[1])).cos()).unwrap();
    let h = apply_hv(&f, &[rat(1, 2)], &NaiveDft).unwrap();
    let want = SampledField::from_fn(vec![32, 32], vec![1.0, 1.0], vec![0.0, 0.0], |x| (TAU * (3.0 * x[0] + x[1])).sin()).unwrap();
    assert!(max_diff(&h, &want) <= 1e-12);
    let c = SampledField::from_fn(vec![8, 8], vec![2.0, 2.0], vec![0.0, 0.0], |_| 3.5).unwrap();
    assert!(apply_hv(&c, &[rat(1, 3)], &NaiveDft).unwrap().max_abs() < 1e-14);
}

#[test]
fn maximal_of_singleton_and_product_brute_force() {
    let m = Modes {
        shape: vec![4, 4, 8],
        box_len: vec![2.0, 2.0, 4.0],
        terms: vec![(vec![1, 0, 1], 1.0, 0.3), (vec![-1, 1, 2], 0.5, 1.0), (vec![0, 1, -3], 0.25, 2.0)],
    };
    let f = m.field();
    let omega = product(&[uniform(2).unwrap(), uniform(2).unwrap()]).unwrap();
    let max = apply_maximal(&f, &omega, &NaiveDft).unwrap();
    let brute: Vec<f64> = (0..f.len())
        .map(|i| omega.points().iter().map(|v| m.hv(v).values()[i].abs()).fold(0.0, f64::max))
        .collect();
    assert!(max.values().iter().zip(&brute).all(|(a, b)| (a - b).abs() < 1e-10));
    let one = DirectionSet::new(2, vec![vec![rat(1, 2), rat(1, 1)]], "one").unwrap();
    let single = apply_maximal(&f, &one, &NaiveDft).unwrap();
    let direct = apply_hv(&f, one.point(0), &NaiveDft).unwrap();
    assert!(single.values().iter().zip(direct.values()).all(|(a, b)| *a == b.abs()));
}

#[test]
fn slice_extension_matches_tensor() {
    let m = Modes { shape: vec![8, 16], box_len: vec![1.0, 1.0], terms: vec![(vec![1, 2], 1.0, 0.1), (vec![3, -1], 0.7, 0.4)] };
    let f = m.field();
    let chi = SampledField::from_fn(vec![8], vec![1.0], vec![0.0], |x| 2f64.sqrt() * (TAU * x[0]).cos()).unwrap();
    let zero = slice_apply(&f, &chi, &[rat(1, 3)], &[int(0)], &NaiveDft).unwrap();
    assert!((zero.norm() - apply_hv(&f, &[rat(1, 3)], &NaiveDft).unwrap().norm()).abs() < 1e-10);
    let shifted = slice_apply(&f, &chi, &[rat(1, 3)], &[int(2)], &NaiveDft).unwrap();
    assert!((shifted.norm() - zero.norm()).abs() < 1e-10);
    let bad = SampledField::from_fn(vec![4], vec![1.0], vec![0.0], |_| 3.0).unwrap();
    assert!(slice_apply(&f, &bad, &[rat(1, 3)], &[int(0)], &NaiveDft).is_err());
}

#[test]
fn direction_dimension_is_checked() {
    let f = SampledField::zeros(vec![4, 4], vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
    assert!(apply_hv(&f, &[rat(1, 2), rat(1, 2)], &NaiveDft).is_err());
    assert!(shear_transport(&f, &[rat(1, 2)]).is_err());
}
