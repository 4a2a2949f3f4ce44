//! Memory kernel and self-energy of the power-law reservoir.
//!
//! For the hard-cutoff law `J(k, ε) = J_α |v(k)|² ε^α` on `0 ≤ ε ≤ Δ` the
//! master equation kernel is
//!
//! ```text
//! K(t) = 2 ∫_0^Δ dε J(k, ε) cos(ε t)
//! ```
//!
//! and its Laplace-domain counterpart is
//!
//! ```text
//! Σ̃(s) = -2i ∫_0^Δ dε J(k, ε) s / (s² + ε²).
//! ```
//!
//! `K(t)` is evaluated with a Gauss–Jacobi rule carrying the `ε^α` weight
//! when `Δ t` is small, and by deforming the integration path into the
//! upper half plane (steepest descent, Gauss–Laguerre along the vertical
//! legs) once the integrand oscillates more than a few times.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions, Rule};

/// `Δ t` above which the oscillatory path is used.
pub const OSCILLATORY_SWITCH: f64 = 20.0;
/// Excluded neighbourhood of the band-edge branch points `s = ±iΔ`.
pub const BRANCH_POINT_GUARD: f64 = 1e-6;

const JACOBI_NODES: usize = 48;
const LAGUERRE_NODES: usize = 64;

/// Power-law spectral density with a sharp cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLaw {
    pub alpha: f64,
    pub j_alpha: f64,
    pub delta: f64,
}

impl SpectralLaw {
    pub fn new(alpha: f64, j_alpha: f64, delta: f64) -> Result<Self> {
        let law = Self {
            alpha,
            j_alpha,
            delta,
        };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spectral exponent must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.j_alpha > 0.0) || !self.j_alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "J_alpha must be > 0, got {}",
                self.j_alpha
            )));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be > 0, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// `J(k, ε)` for a given `|v(k)|²`.
    pub fn density(&self, vk2: f64, eps: f64) -> f64 {
        if (0.0..=self.delta).contains(&eps) {
            self.j_alpha * vk2 * eps.powf(self.alpha)
        } else {
            0.0
        }
    }

    /// `Ω⁺_α(k) = 2 J_α |v(k)|² Δ^{α+1} / (α+1)`, equal to `K(0)`.
    pub fn omega_plus(&self, vk2: f64) -> f64 {
        2.0 * self.j_alpha * vk2 * self.delta.powf(self.alpha + 1.0) / (self.alpha + 1.0)
    }

    /// `Ω⁻_α(k) = 2 J_α |v(k)|² Δ^{α-1} / (α-1)`, finite only for `α > 1`.
    pub fn omega_minus(&self, vk2: f64) -> Option<f64> {
        (self.alpha > 1.0).then(|| {
            2.0 * self.j_alpha * vk2 * self.delta.powf(self.alpha - 1.0) / (self.alpha - 1.0)
        })
    }

    /// Second moment `2 ∫ J ε² dε`; the `1/s³` coefficient of `iΣ̃`.
    pub fn second_moment(&self, vk2: f64) -> f64 {
        2.0 * self.j_alpha * vk2 * self.delta.powf(self.alpha + 3.0) / (self.alpha + 3.0)
    }
}

/// Residue data of the self-energy at `s → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfEnergyData {
    /// `iΣ'_A(k) = lim iΣ̃/s`; `None` when the limit diverges (`α ≤ 1`).
    pub i_sigma_prime: Option<f64>,
    pub omega_minus: Option<f64>,
    pub omega_plus: f64,
}

impl SelfEnergyData {
    pub fn is_divergent(&self) -> bool {
        self.i_sigma_prime.is_none()
    }
}

fn laguerre_rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| quad::gauss_laguerre(LAGUERRE_NODES))
}

/// `I(t) = ∫_0^Δ ε^α cos(ε t) dε` for a fixed exponent and bandwidth.
#[derive(Debug, Clone)]
pub struct CosineTransform {
    alpha: f64,
    delta: f64,
    jacobi: Rule,
    gamma_factor: f64,
}

impl CosineTransform {
    pub fn new(alpha: f64, delta: f64) -> Self {
        Self {
            alpha,
            delta,
            jacobi: quad::gauss_jacobi_power(JACOBI_NODES, alpha),
            gamma_factor: gamma(alpha + 1.0),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (a, d) = (self.alpha, self.delta);
        let t = t.abs();
        if t == 0.0 {
            return d.powf(a + 1.0) / (a + 1.0);
        }
        let x = d * t;
        if x <= OSCILLATORY_SWITCH {
            return d.powf(a + 1.0) * self.jacobi.apply(|y| (x * y).cos());
        }
        // ∫_0^Δ = ∫_0^{i∞} - ∫_Δ^{Δ+i∞} for the analytic integrand ε^α e^{iεt}.
        let i = Complex64::i();
        let origin_leg = Complex64::from_polar(1.0, FRAC_PI_2 * (a + 1.0))
            * (self.gamma_factor / t.powf(a + 1.0));
        let edge = laguerre_rule().apply(|s| Complex64::new(d, s / t).powf(a));
        let edge_leg = i / t * Complex64::from_polar(1.0, x) * edge;
        (origin_leg - edge_leg).re
    }
}

/// Memory kernel `K(t)`; `-iΣ_A(k, t) = -K(t)`.
pub fn memory_kernel(law: &SpectralLaw, vk2: f64, t: f64) -> f64 {
    if t == 0.0 {
        return law.omega_plus(vk2);
    }
    2.0 * law.j_alpha * vk2 * CosineTransform::new(law.alpha, law.delta).eval(t)
}

/// Laplace-domain self-energy `Σ̃_A(k, s)` by adaptive quadrature.
pub fn self_energy_laplace(law: &SpectralLaw, vk2: f64, s: Complex64) -> Result<Complex64> {
    let i_sigma = i_self_energy(law, vk2, s)?;
    Ok(-Complex64::i() * i_sigma)
}

/// `iΣ̃(s) = 2 J_α |v|² ∫_0^Δ ε^α s / (s² + ε²) dε`.
pub(crate) fn i_self_energy(law: &SpectralLaw, vk2: f64, s: Complex64) -> Result<Complex64> {
    let d = law.delta;
    let on_axis = s.re.abs() <= 1e-14 * s.norm().max(1.0);
    if (on_axis && s.im.abs() <= d * (1.0 + 1e-12))
        || (s - Complex64::new(0.0, d)).norm() < BRANCH_POINT_GUARD
        || (s + Complex64::new(0.0, d)).norm() < BRANCH_POINT_GUARD
    {
        return Err(Error::BranchCut { re: s.re, im: s.im });
    }
    let c = law.j_alpha * vk2;
    if c == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut points = vec![0.0, d];
    for b in [s.im.abs(), s.norm()] {
        if b > 0.0 && b < d {
            points.push(b);
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let a = law.alpha;
    let s2 = s * s;
    let integrand = |e: f64| s / (s2 + e * e) * e.powf(a);
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_intervals: 20_000,
    };
    let r = quad::integrate(integrand, &points, opts)?;
    Ok(r.value * (2.0 * c))
}

/// `Σ'_A(k)` and the `Ω±` constants.
pub fn sigma_prime(law: &SpectralLaw, vk2: f64) -> SelfEnergyData {
    let omega_minus = law.omega_minus(vk2);
    SelfEnergyData {
        i_sigma_prime: omega_minus,
        omega_minus,
        omega_plus: law.omega_plus(vk2),
    }
}
