use mdht::maximal::{apply_maximal_par, rayleigh_par};
use mdht::RustFft;
use mdht_core::directions::{lacunary_uniform, product, uniform};
use mdht_core::probe::rayleigh;
use mdht_core::spectral::{apply_maximal, Direction, Dft, NaiveDft, SampledField};
use num_complex::Complex64;
use proptest::prelude::*;

fn noise(shape: &[usize], seed: u64) -> Vec<Complex64> {
    let total: usize = shape.iter().product();
    let mut s = seed | 1;
    let mut next = || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..total).map(|_| Complex64::new(next(), next())).collect()
}

fn field(shape: &[usize], seed: u64) -> SampledField {
    let vals = noise(shape, seed).iter().map(|c| c.re).collect();
    SampledField::new(shape.to_vec(), vec![2.0; shape.len()], vec![-1.0; shape.len()], vals).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rustfft_matches_naive(shape in prop::collection::vec(1usize..9, 1..4), seed in any::<u64>(), inverse in any::<bool>()) {
        let dir = if inverse { Direction::Inverse } else { Direction::Forward };
        let mut a = noise(&shape, seed);
        let mut b = a.clone();
        RustFft::new().transform(&mut a, &shape, dir);
        NaiveDft.transform(&mut b, &shape, dir);
        let scale = b.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn parallel_maximal_is_bit_identical(m in 1u64..12, seed in any::<u64>()) {
        let f = field(&[16, 32], seed);
        let omega = uniform(m).unwrap();
        let fft = RustFft::new();
        let par = apply_maximal_par(&f, &omega, &fft).unwrap();
        let seq = apply_maximal(&f, &omega, &fft).unwrap();
        prop_assert_eq!(par.values(), seq.values());
    }
}

#[test]
fn forward_then_inverse_scales_by_length() {
    let shape = [8, 5, 4];
    let orig = noise(&shape, 7);
    let mut z = orig.clone();
    let fft = RustFft::new();
    fft.transform(&mut z, &shape, Direction::Forward);
    fft.transform(&mut z, &shape, Direction::Inverse);
    let n = orig.len() as f64;
    for (a, b) in z.iter().zip(&orig) {
        assert!((a / n - b).norm() < 1e-13);
    }
}

#[test]
fn larger_grids_agree_with_naive_in_3d() {
    let f = field(&[8, 8, 16], 3);
    let omega = product(&[uniform(3).unwrap(), uniform(2).unwrap()]).unwrap();
    let a = apply_maximal_par(&f, &omega, &RustFft::new()).unwrap();
    let b = apply_maximal(&f, &omega, &NaiveDft).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).abs() < 1e-12);
    }
    let r1 = rayleigh_par(&f, &omega, &RustFft::new()).unwrap();
    let r2 = rayleigh(&f, &omega, &NaiveDft).unwrap();
    assert!((r1 - r2).abs() < 1e-12);
}

#[test]
fn parallel_maximal_handles_lacunary_sets_and_bad_input() {
    let f = field(&[8, 32], 9);
    let omega = lacunary_uniform(3, 3).unwrap();
    let fft = RustFft::new();
    assert_eq!(apply_maximal_par(&f, &omega, &fft).unwrap().values(), apply_maximal(&f, &omega, &fft).unwrap().values());
    let zero = SampledField::zeros(vec![4, 4], vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
    assert!(rayleigh_par(&zero, &omega, &fft).is_err());
    let wrong = field(&[4, 4, 4], 1);
    assert!(apply_maximal_par(&wrong, &omega, &fft).is_err());
}
