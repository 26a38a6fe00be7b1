mod common;

use common::*;
use pmme_core::kernels::MemoryKernel;
use pmme_core::linalg::c;
use pmme_core::Error;
use proptest::prelude::*;
use rand::Rng;

fn builtins() -> Vec<MemoryKernel> {
    vec![
        MemoryKernel::exponential(6.0, 1.1).unwrap(),
        MemoryKernel::damped_oscillatory(6.0, 1.1, 1.0, std::f64::consts::PI).unwrap(),
        MemoryKernel::appendix(2.0).unwrap(),
    ]
}

#[test]
fn rational_form_matches_transform() {
    let mut r = rng(3);
    for k in builtins() {
        let form = k.rational_form().unwrap().clone();
        for _ in 0..100 {
            let s = c(k.abscissa() + r.gen_range(0.01..10.0), r.gen_range(-10.0..10.0));
            let a = k.laplace(s).unwrap();
            let b = form.numerator.eval(s) / form.denominator.eval(s);
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "{}: {a} vs {b}", k.name());
        }
    }
}

#[test]
fn quadrature_matches_transform_on_real_axis() {
    for k in builtins() {
        for s in [k.abscissa() + 0.5, 0.0, 1.0, 4.0] {
            let s = c(s, 0.0);
            let exact = k.laplace(s).unwrap();
            let numeric = k.laplace_by_quadrature(s).unwrap();
            assert!((exact - numeric).norm() <= 1e-8, "{} at {s}: {exact} vs {numeric}", k.name());
        }
    }
}

#[test]
fn transform_is_linear() {
    let (ka, kb) = (MemoryKernel::exponential(6.0, 1.1).unwrap(), MemoryKernel::appendix(2.0).unwrap());
    let combo = MemoryKernel::linear_combination(0.3, &ka, -1.7, &kb);
    let form = combo.rational_form().unwrap().clone();
    let mut r = rng(5);
    for _ in 0..100 {
        let s = c(r.gen_range(0.0..5.0), r.gen_range(-5.0..5.0));
        let expected = ka.laplace(s).unwrap() * 0.3 - kb.laplace(s).unwrap() * 1.7;
        assert!((combo.laplace(s).unwrap() - expected).norm() <= 1e-12);
        assert!((form.numerator.eval(s) / form.denominator.eval(s) - expected).norm() <= 1e-12);
        let t = r.gen_range(0.0..5.0);
        let tv = 0.3 * ka.time_value(t).unwrap() - 1.7 * kb.time_value(t).unwrap();
        assert!((combo.time_value(t).unwrap() - tv).abs() <= 1e-12);
    }
}

#[test]
fn time_only_kernel_uses_quadrature() {
    let k = MemoryKernel::from_time_fn("gaussian", |t| (-t * t).exp(), f64::NEG_INFINITY);
    let v = k.laplace(c(0.0, 0.0)).unwrap();
    assert!((v.re - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
    let bounded = MemoryKernel::from_time_fn("decay", |t| (-t).exp(), -1.0);
    assert!(matches!(bounded.laplace(c(-2.0, 0.0)), Err(Error::OutsideAbscissa { .. })));
}

proptest! {
    #[test]
    fn appendix_kernel_equals_normalized_exponential(gamma in 0.01f64..20.0, t in 0.0f64..10.0) {
        let a = MemoryKernel::appendix(gamma).unwrap();
        let e = MemoryKernel::exponential(gamma, gamma).unwrap();
        prop_assert_eq!(a.time_value(t).unwrap(), e.time_value(t).unwrap());
        prop_assert!((a.laplace(c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
    }
}
