use approx::assert_relative_eq;
use nmwalk::kernel::{memory_kernel, self_energy_laplace, CosineTransform, SpectralLaw};
use nmwalk::quad::{integrate, QuadOptions};
use num_complex::Complex64;
use proptest::prelude::*;

/// Elementary antiderivatives of `ε^n cos(εt)` on `[0, Δ]` for n = 0, 1, 2.
fn cosine_closed_form(n: u32, d: f64, t: f64) -> f64 {
    let (s, c) = (d * t).sin_cos();
    match n {
        0 => s / t,
        1 => d * s / t + (c - 1.0) / (t * t),
        2 => d * d * s / t + 2.0 * d * c / (t * t) - 2.0 * s / (t * t * t),
        _ => unreachable!(),
    }
}

#[test]
fn cosine_transform_matches_elementary_forms_across_the_switch() {
    let d = 5.0;
    for n in 0..3u32 {
        let ct = CosineTransform::new(n as f64, d);
        for &t in &[1e-3, 0.2, 1.7, 3.99, 4.0, 4.01, 9.3, 40.0, 400.0, 4000.0] {
            let want = cosine_closed_form(n, d, t);
            let scale = d.powi(n as i32 + 1);
            let got = ct.eval(t);
            assert!(
                (got - want).abs() < 1e-11 * scale,
                "n={n} t={t}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn cosine_transform_matches_adaptive_quadrature_for_fractional_exponents() {
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        ..QuadOptions::default()
    };
    for &a in &[0.25, 0.5, 1.5, 2.7] {
        let d = 3.0;
        let ct = CosineTransform::new(a, d);
        for &t in &[0.5, 6.0, 6.8, 25.0, 90.0] {
            let mut pts = vec![0.0];
            let cycles = (d * t / std::f64::consts::PI).ceil() as usize;
            pts.extend((1..cycles).map(|i| i as f64 * d / cycles as f64));
            pts.push(d);
            let reference: f64 = integrate(|e: f64| e.powf(a) * (e * t).cos(), &pts, opts)
                .unwrap()
                .value;
            assert!(
                (ct.eval(t) - reference).abs() < 1e-10,
                "a={a} t={t}: {} vs {reference}",
                ct.eval(t)
            );
        }
    }
}

#[test]
fn kernel_at_origin_is_omega_plus() {
    let law = SpectralLaw::new(0.5, 0.01, 5.0).unwrap();
    assert_relative_eq!(
        memory_kernel(&law, 9.0, 1e-9),
        law.omega_plus(9.0),
        max_relative = 1e-9
    );
}

/// `iΣ̃(s)` for `α = 0, 1, 2` in elementary functions.
fn i_sigma_closed(alpha: u32, c: f64, d: f64, s: Complex64) -> Complex64 {
    let at = (Complex64::new(d, 0.0) / s).atan();
    match alpha {
        0 => 2.0 * c * at,
        1 => c * s * (1.0 + d * d / (s * s)).ln(),
        2 => 2.0 * c * s * (d - s * at),
        _ => unreachable!(),
    }
}

/// Large-`|s|` series `(2c/s) Σ (-1)^n Δ^{α+2n+1} / ((α+2n+1) s^{2n})`.
fn i_sigma_series(alpha: f64, c: f64, d: f64, s: Complex64) -> Complex64 {
    let z = -(d * d) / (s * s);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..400 {
        let add = term / (alpha + 2.0 * n as f64 + 1.0);
        sum += add;
        if add.norm() < 1e-18 * sum.norm() {
            break;
        }
        term *= z;
    }
    2.0 * c * d.powf(alpha + 1.0) / s * sum
}

fn i_sigma(law: &SpectralLaw, vk2: f64, s: Complex64) -> Complex64 {
    Complex64::i() * self_energy_laplace(law, vk2, s).unwrap()
}

#[test]
fn self_energy_matches_elementary_forms() {
    let (j, vk2, d) = (0.01, 9.0, 5.0);
    let samples = [
        Complex64::new(0.1, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(0.05, 3.0),
        Complex64::new(0.5, -4.5),
        Complex64::new(1.0, 40.0),
    ];
    for alpha in 0..3u32 {
        let law = SpectralLaw::new(alpha as f64, j, d).unwrap();
        for &s in &samples {
            let want = i_sigma_closed(alpha, j * vk2, d, s);
            let got = i_sigma(&law, vk2, s);
            assert!(
                (got - want).norm() < 1e-11 * want.norm().max(1e-3),
                "alpha={alpha} s={s}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn self_energy_matches_hypergeometric_series_outside_the_band() {
    for &a in &[0.3, 0.5, 1.5, 2.5] {
        let law = SpectralLaw::new(a, 0.02, 2.0).unwrap();
        for &s in &[
            Complex64::new(3.0, 0.0),
            Complex64::new(1.0, 2.5),
            Complex64::new(0.2, -6.0),
        ] {
            let want = i_sigma_series(a, 0.02 * 4.0, 2.0, s);
            let got = i_sigma(&law, 4.0, s);
            assert!((got - want).norm() < 1e-12 * want.norm(), "a={a} s={s}");
        }
    }
}

#[test]
fn laplace_transform_of_kernel_is_the_self_energy() {
    let law = SpectralLaw::new(1.5, 0.01, 2.0).unwrap();
    let vk2 = 4.0;
    let s = 0.7;
    let opts = QuadOptions {
        rel_tol: 1e-12,
        ..QuadOptions::default()
    };
    let pts: Vec<f64> = (0..=120).map(|i| i as f64 * 0.5).collect();
    let transform = integrate(
        |t: f64| (-s * t).exp() * memory_kernel(&law, vk2, t),
        &pts,
        opts,
    )
    .unwrap()
    .value;
    let want = i_sigma(&law, vk2, Complex64::new(s, 0.0));
    assert!(want.im.abs() < 1e-15);
    assert_relative_eq!(transform, want.re, max_relative = 1e-9);
}

proptest! {
    #[test]
    fn self_energy_is_real_on_the_positive_axis_and_conjugate_symmetric(
        a in 0.0f64..3.0,
        re in 0.01f64..5.0,
        im in -10.0f64..10.0,
    ) {
        let law = SpectralLaw::new(a, 0.01, 5.0).unwrap();
        let s = Complex64::new(re, im);
        let up = i_sigma(&law, 2.0, s);
        let down = i_sigma(&law, 2.0, s.conj());
        prop_assert!((up - down.conj()).norm() <= 1e-12 * up.norm().max(1e-12));
        prop_assert!(up.re > 0.0);
        let real = i_sigma(&law, 2.0, Complex64::new(re, 0.0));
        prop_assert!(real.im.abs() <= 1e-15 * real.re);
    }

    #[test]
    fn kernel_scales_with_hopping_modulus(t in 0.0f64..200.0, vk2 in 0.0f64..9.0) {
        let law = SpectralLaw::new(0.5, 0.01, 5.0).unwrap();
        let unit = memory_kernel(&law, 1.0, t);
        prop_assert!((memory_kernel(&law, vk2, t) - vk2 * unit).abs() <= 1e-14 * (1.0 + vk2 * unit.abs()));
        prop_assert!(memory_kernel(&law, 1.0, t).abs() <= law.omega_plus(1.0) * (1.0 + 1e-12));
    }
}
