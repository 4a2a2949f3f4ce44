//! Lattice parameters and k-space kinematics of the SSH walk.
//!
//! Energies are measured in units of the intracell hopping `v`, which is
//! fixed to one. The Bloch hopping `v(k) = v (1 + u e^{ik})` couples the
//! `A` sublattice to the reservoir; its phase winds once around the origin
//! when `u > 1` and not at all when `u < 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|v(k)|` below this is treated as the gap-closing point.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    /// Intracell hopping; sets the energy unit.
    pub v: f64,
    /// Ratio `v'/v` of intercell to intracell hopping.
    pub u: f64,
    /// Detuning of the `B` site above `A`.
    pub omega: f64,
    /// On-site energy of `A`.
    pub eps_a: f64,
}

impl WalkParams {
    pub fn new(u: f64, omega: f64) -> Result<Self> {
        let p = Self {
            v: 1.0,
            u,
            omega,
            eps_a: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_ratio(u: f64) -> Result<Self> {
        Self::new(u, 50.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v > 0.0) || !self.v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "v must be positive, got {}",
                self.v
            )));
        }
        if !(self.u >= 0.0) || !self.u.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "u must be >= 0, got {}",
                self.u
            )));
        }
        if !self.omega.is_finite() || !self.eps_a.is_finite() {
            return Err(Error::InvalidParameter(
                "omega and eps_A must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Whether `u` sits on the transition point where `v(π)` vanishes.
    pub fn is_degenerate(&self) -> bool {
        (self.u - 1.0).abs() < DEGENERACY_TOL
    }

    /// `|v(k)|² = v²(1 + u² + 2u cos k)`.
    pub fn vk2(&self, k: f64) -> f64 {
        self.v * self.v * (1.0 + self.u * self.u + 2.0 * self.u * k.cos())
    }
}

/// `v(k) = v (1 + u e^{ik})`.
pub fn hopping_amplitude(params: &WalkParams, k: f64) -> Complex64 {
    params.v * (Complex64::new(1.0, 0.0) + params.u * Complex64::from_polar(1.0, k))
}

/// Phase `φ(k) = arg v(k)` and its derivative `dφ/dk`.
pub fn phase_and_derivative(params: &WalkParams, k: f64) -> Result<(f64, f64)> {
    let vk = hopping_amplitude(params, k);
    let modulus = vk.norm();
    if modulus < DEGENERACY_TOL * params.v {
        return Err(Error::DegenerateHopping { k, modulus });
    }
    Ok((vk.arg(), phase_derivative_unchecked(params.u, k)))
}

/// `dφ/dk = (u cos k + u²) / (1 + 2u cos k + u²)`.
pub(crate) fn phase_derivative_unchecked(u: f64, k: f64) -> f64 {
    let c = k.cos();
    (u * c + u * u) / (1.0 + 2.0 * u * c + u * u)
}

/// Number of times `φ(k)` winds as `k` crosses the zone.
///
/// The zone integral of `dφ/dk` is evaluated with the periodic trapezoid
/// rule, refined until the sample count resolves the `|ln u|` width of the
/// derivative peak at `k = π`. The result must land within `1e-9` of an
/// integer.
pub fn winding_number(params: &WalkParams) -> Result<i64> {
    let value = winding_integral(params)?;
    let rounded = value.round();
    if (value - rounded).abs() > 1e-9 {
        return Err(Error::Quadrature(format!(
            "winding integral {value} not within 1e-9 of an integer"
        )));
    }
    Ok(rounded as i64)
}

/// `(1/2π) ∮ dk dφ/dk` as a real number.
pub fn winding_integral(params: &WalkParams) -> Result<f64> {
    params.validate()?;
    if params.is_degenerate() {
        return Err(Error::DegenerateRatio);
    }
    let u = params.u;
    if u == 0.0 {
        return Ok(0.0);
    }
    // Trapezoid error on this rational integrand decays like min(u, 1/u)^n.
    let decay = u.ln().abs();
    let n = ((45.0 / decay).ceil() as usize).clamp(256, 50_000_000);
    let h = 2.0 * PI / n as f64;
    let sum = kahan_sum((0..n).map(|i| phase_derivative_unchecked(u, -PI + h * i as f64)));
    Ok(sum * h / (2.0 * PI))
}

pub(crate) fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Uniform Brillouin-zone grid, symmetric under `k -> -k`.
///
/// `k_i = 2π (i - ⌊n/2⌋) / n`, so `k = 0` is always a point; for even `n`
/// the grid contains `-π` (identified with `π`).
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    points: Vec<f64>,
}

impl KGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "k grid needs at least one point".into(),
            ));
        }
        let half = (n / 2) as i64;
        let points = (0..n as i64)
            .map(|i| 2.0 * PI * (i - half) as f64 / n as f64)
            .collect();
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Quadrature weight of each point, `2π/n`.
    pub fn weight(&self) -> f64 {
        2.0 * PI / self.points.len() as f64
    }

    /// Index of the partner point `-k` (modulo the zone).
    pub fn mirror_index(&self, i: usize) -> usize {
        let n = self.points.len();
        let half = n / 2;
        // k_i ∝ i - half; mirror is half - (i - half) = 2 half - i (mod n)
        (2 * half + n - i) % n
    }
}
