use lorenz_reservoir::lorenz::State;
use lorenz_reservoir::metrics::{self, ClassifyParams};
use proptest::prelude::*;
use rustfft::num_complex::Complex;

fn naive_dft_power(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let s: Complex<f64> = x
                .iter()
                .enumerate()
                .map(|(t, &v)| {
                    let a = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                    Complex::new(v * a.cos(), v * a.sin())
                })
                .sum();
            s.norm_sqr()
        })
        .collect()
}

fn chirp(len: usize) -> Vec<f64> {
    (0..len)
        .map(|t| (0.3 * t as f64 + 0.002 * (t * t) as f64).sin() + 0.1 * (t as f64 * 1.7).cos())
        .collect()
}

#[test]
fn fft_matches_naive_dft_and_parseval() {
    let z = chirp(128);
    let w = metrics::hamming(z.len());
    let windowed: Vec<f64> = z.iter().zip(&w).map(|(a, b)| a * b).collect();
    let fast = metrics::windowed_spectrum(&z);
    let slow = naive_dft_power(&windowed);
    for (a, b) in fast.iter().zip(&slow) {
        assert!((a - b).abs() < 1e-9 * (1.0 + b));
    }
    let energy: f64 = windowed.iter().map(|v| v * v).sum();
    let spectral: f64 = fast.iter().sum::<f64>() / z.len() as f64;
    assert!((energy - spectral).abs() < 1e-10 * energy);
}

#[test]
fn psd_shape_depends_only_on_length() {
    for len in [64, 65, 128, 501] {
        let a = metrics::psd(&chirp(len), 0.1).unwrap();
        let b = metrics::psd(&vec![0.25; len], 0.1).unwrap();
        assert_eq!(a.frequencies, b.frequencies);
        assert_eq!(a.power.len(), len / 2 + 1);
        assert_eq!(*a.frequencies.last().unwrap(), (len / 2) as f64 / (len as f64 * 0.1));
    }
    assert!(metrics::psd(&chirp(63), 0.1).is_err());
}

#[test]
fn psd_csv_has_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psd.csv");
    let p = metrics::psd(&chirp(100), 0.1).unwrap();
    metrics::write_psd_csv(&path, &p).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("f,S"));
    assert_eq!(lines.count(), 51);
}

#[test]
fn nrmse_of_mean_predictor_is_exactly_one() {
    let y = chirp(257);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    assert_eq!(metrics::nrmse(&y, &vec![mean; y.len()]).unwrap(), 1.0);
}

#[test]
fn vpt_fixture_crosses_at_ten_steps() {
    let target: Vec<State> = (0..50).map(|k| [(k as f64 * 0.3).sin(), 0.0, 0.0]).collect();
    let mut pred = target.clone();
    for p in pred.iter_mut().skip(10) {
        p[0] += 5.0;
    }
    let r = metrics::vpt(&target, &pred, 0.1, 0.4);
    assert!(r.crossed);
    assert!((r.t_vpt - 10.0 * 0.1).abs() < 1e-12);
}

/// Every pair of trajectories of length 2 over cells {0,1}³, mapped to
/// cube-centre coordinates.
fn small_fixtures() -> Vec<Vec<State>> {
    let corner = |i: usize| -> State {
        [
            (i & 1) as f64 * 0.1 + 0.05,
            (i >> 1 & 1) as f64 * 0.1 + 0.05,
            (i >> 2 & 1) as f64 * 0.1 + 0.05,
        ]
    };
    let mut out = Vec::new();
    for a in 0..8 {
        for b in 0..8 {
            out.push(vec![corner(a), corner(b)]);
        }
    }
    out
}

#[test]
fn adev_identity_symmetry_and_triangle_exhaustive() {
    let fx = small_fixtures();
    for a in &fx {
        assert_eq!(metrics::adev(a, a, 0.1), 0);
        for b in &fx {
            let ab = metrics::adev(a, b, 0.1);
            assert_eq!(ab, metrics::adev(b, a, 0.1));
            for c in fx.iter().step_by(3) {
                assert!(metrics::adev(a, c, 0.1) <= ab + metrics::adev(b, c, 0.1));
            }
        }
    }
}

#[test]
fn classify_rejects_non_finite() {
    let mut t: Vec<State> = (0..300).map(|k| [(k as f64 * 0.5).sin() * 0.4, 0.1, 0.2]).collect();
    let p = ClassifyParams::default();
    assert!(metrics::classify(&t, 300, &p).bounded);
    t[150][1] = f64::NAN;
    let r = metrics::classify(&t, 300, &p);
    assert!(!r.bounded);
    assert_eq!(r.diverged_at, Some(150));
    assert_eq!(r.oscillatory_steps, 150);
}

fn trajectory() -> impl Strategy<Value = Vec<State>> {
    prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 8..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nrmse_is_affine_invariant(
        y in prop::collection::vec(-5.0f64..5.0, 4..60),
        noise in prop::collection::vec(-0.5f64..0.5, 60),
        a in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
        c in -10.0f64..10.0,
    ) {
        prop_assume!(y.iter().any(|v| (v - y[0]).abs() > 1e-3));
        let yh: Vec<f64> = y.iter().zip(&noise).map(|(v, n)| v + n).collect();
        let base = metrics::nrmse(&y, &yh).unwrap();
        let ty: Vec<f64> = y.iter().map(|v| a * v + c).collect();
        let tyh: Vec<f64> = yh.iter().map(|v| a * v + c).collect();
        prop_assert!((metrics::nrmse(&ty, &tyh).unwrap() - base).abs() < 1e-10);
    }

    #[test]
    fn vpt_is_monotone_in_threshold(y in trajectory(), p in trajectory(), t1 in 0.01f64..2.0, dt in 0.0f64..2.0) {
        let n = y.len().min(p.len());
        let (y, p) = (&y[..n], &p[..n]);
        let a = metrics::vpt(y, p, 0.1, t1);
        let b = metrics::vpt(y, p, 0.1, t1 + dt);
        prop_assert!(a.t_vpt <= b.t_vpt);
    }

    #[test]
    fn adev_properties_on_random_trajectories(a in trajectory(), b in trajectory(), c in trajectory()) {
        let ab = metrics::adev(&a, &b, 0.1);
        prop_assert_eq!(ab, metrics::adev(&b, &a, 0.1));
        prop_assert_eq!(metrics::adev(&a, &a, 0.1), 0);
        prop_assert!(metrics::adev(&a, &c, 0.1) <= ab + metrics::adev(&b, &c, 0.1));
    }
}
