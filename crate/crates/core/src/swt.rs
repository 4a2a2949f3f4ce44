//! Discrete reservoirs and Schrieffer–Wolff elimination of the `B` site.
//!
//! After eliminating `B` at second order the walker level `A` couples
//! directly to every reservoir level with `η̃_j(k) = v(k) · b_j`, where the
//! k-independent factor is
//!
//! ```text
//! b_j = -(g_j / 2) (1/ω + 1/(ε_A + ω - ε_j)).
//! ```
//!
//! Level energies shift to `ε̃_j = ε_j - g_j² / (ε_A + ω - ε_j)` and the
//! levels acquire a direct coupling
//! `-(g_j g_j' / 2)(1/D_j + 1/D_j')` with `D_j = ε_A + ω - ε_j`.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::SpectralLaw;
use crate::model::{hopping_amplitude, WalkParams};

/// Perturbative ratios above this trigger a warning.
pub const PERTURBATIVE_WARN: f64 = 0.2;
const RESONANCE_TOL: f64 = 1e-12;

/// Bare reservoir levels `ε_j` coupled to `B` with real amplitudes `g_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteReservoir {
    pub eps: Vec<f64>,
    pub g: Vec<f64>,
}

impl DiscreteReservoir {
    pub fn new(eps: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if eps.len() != g.len() {
            return Err(Error::InvalidParameter(format!(
                "{} level energies but {} couplings",
                eps.len(),
                g.len()
            )));
        }
        if eps.iter().chain(&g).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "reservoir entries must be finite".into(),
            ));
        }
        Ok(Self { eps, g })
    }

    pub fn n_levels(&self) -> usize {
        self.eps.len()
    }
}

/// Walker level plus reservoir after elimination of `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    /// Walker energy used by the dynamics (zero after reduction).
    pub eps_a_tilde: f64,
    pub eps_tilde: Vec<f64>,
    /// `η̃_j(k) / v(k)`.
    pub eta_base: Vec<f64>,
    /// Hermitian level-level couplings (zero diagonal).
    pub t_cross: DMatrix<f64>,
    /// Bare `(ε_A, ω)` when the model came from [`reduce`].
    pub origin: Option<(f64, f64)>,
}

impl ReducedModel {
    pub fn n_levels(&self) -> usize {
        self.eps_tilde.len()
    }

    /// `η̃_j(k)`.
    pub fn eta(&self, params: &WalkParams, k: f64, j: usize) -> Complex64 {
        hopping_amplitude(params, k) * self.eta_base[j]
    }

    /// `|η̃_j(k)|²` given `|v(k)|²`.
    pub fn eta_abs2(&self, vk2: f64, j: usize) -> f64 {
        vk2 * self.eta_base[j] * self.eta_base[j]
    }

    /// k-resolved walker energy `ε_A - |v(k)|²/ω` before it is set to zero.
    pub fn eps_a_tilde_at(&self, params: &WalkParams, k: f64) -> Option<f64> {
        self.origin
            .map(|(eps_a, omega)| eps_a - params.vk2(k) / omega)
    }

    /// Heuristic horizon `ω/|v(k)|²` beyond which dropping the walker shift fails.
    pub fn validity_horizon(&self, params: &WalkParams, k: f64) -> Option<f64> {
        self.origin.map(|(_, omega)| omega / params.vk2(k))
    }

    pub fn has_cross_couplings(&self) -> bool {
        self.t_cross.iter().any(|&x| x != 0.0)
    }
}

/// Midpoint discretization of a power law, directly in reduced variables.
///
/// `ε̃_j = (j - 1/2) Δ/N` and `|η̃_j(k)|² = J_α |v(k)|² ε̃_j^α Δ/N`.
pub fn discretize_spectral_law(law: &SpectralLaw, n_levels: usize) -> Result<ReducedModel> {
    law.validate()?;
    if n_levels == 0 {
        return Err(Error::InvalidParameter(
            "need at least one reservoir level".into(),
        ));
    }
    let width = law.delta / n_levels as f64;
    let eps_tilde: Vec<f64> = (0..n_levels).map(|j| (j as f64 + 0.5) * width).collect();
    let eta_base = eps_tilde
        .iter()
        .map(|&e| (law.j_alpha * e.powf(law.alpha) * width).sqrt())
        .collect();
    Ok(ReducedModel {
        eps_a_tilde: 0.0,
        eps_tilde,
        eta_base,
        t_cross: DMatrix::zeros(n_levels, n_levels),
        origin: None,
    })
}

/// Bare reservoir whose reduction reproduces the discretized law.
///
/// Inverts the reduction level by level: `g_j` from the effective coupling
/// and `ε_j` from the level shift, by fixed-point iteration on `D_j`.
pub fn raw_reservoir_for_law(
    params: &WalkParams,
    law: &SpectralLaw,
    n_levels: usize,
) -> Result<DiscreteReservoir> {
    params.validate()?;
    if !(params.omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "B-site detuning must be > 0, got {}",
            params.omega
        )));
    }
    let target = discretize_spectral_law(law, n_levels)?;
    let omega = params.omega;
    let mut eps = Vec::with_capacity(n_levels);
    let mut g = Vec::with_capacity(n_levels);
    for (&e_t, &b) in target.eps_tilde.iter().zip(&target.eta_base) {
        let mut e = e_t;
        let mut gj;
        for _ in 0..200 {
            let d = params.eps_a + omega - e;
            if d <= RESONANCE_TOL {
                return Err(Error::Resonance {
                    level: eps.len(),
                    denominator: d,
                });
            }
            gj = 2.0 * b / (1.0 / omega + 1.0 / d);
            let next = e_t + gj * gj / d;
            let done = (next - e).abs() <= 1e-15 * next.abs().max(1.0);
            e = next;
            if done {
                break;
            }
        }
        let d = params.eps_a + omega - e;
        gj = 2.0 * b / (1.0 / omega + 1.0 / d);
        eps.push(e);
        g.push(gj);
    }
    DiscreteReservoir::new(eps, g)
}

/// Second-order elimination of the `B` site.
pub fn reduce(params: &WalkParams, raw: &DiscreteReservoir) -> Result<ReducedModel> {
    params.validate()?;
    let omega = params.omega;
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "B-site detuning must be > 0, got {omega}"
        )));
    }
    let n = raw.n_levels();
    let mut denom = Vec::with_capacity(n);
    for (j, &e) in raw.eps.iter().enumerate() {
        let d = params.eps_a + omega - e;
        if d.abs() < RESONANCE_TOL * omega.max(1.0) {
            return Err(Error::Resonance {
                level: j,
                denominator: d,
            });
        }
        denom.push(d);
    }

    let v_max = params.v * (1.0 + params.u);
    let g_max = raw.g.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    if v_max / omega > PERTURBATIVE_WARN || g_max / omega > PERTURBATIVE_WARN {
        warn!(
            "Schrieffer-Wolff outside perturbative regime: max|v(k)|/omega = {:.3}, max|g|/omega = {:.3}",
            v_max / omega,
            g_max / omega
        );
    }

    let eps_tilde = raw
        .eps
        .iter()
        .zip(&raw.g)
        .zip(&denom)
        .map(|((&e, &g), &d)| e - g * g / d)
        .collect();
    let eta_base = raw
        .g
        .iter()
        .zip(&denom)
        .map(|(&g, &d)| -0.5 * g * (1.0 / omega + 1.0 / d))
        .collect();
    let t_cross = DMatrix::from_fn(n, n, |j, jp| {
        if j == jp {
            0.0
        } else {
            -0.5 * raw.g[j] * raw.g[jp] * (1.0 / denom[j] + 1.0 / denom[jp])
        }
    });
    Ok(ReducedModel {
        eps_a_tilde: 0.0,
        eps_tilde,
        eta_base,
        t_cross,
        origin: Some((params.eps_a, omega)),
    })
}

/// Histogram of `|η̃_j(k)|²` over energy bins, normalized by bin width.
///
/// `edges` must be strictly increasing; a level on an interior edge falls
/// into the bin to its right, the last bin is closed.
pub fn effective_spectral_density(
    model: &ReducedModel,
    params: &WalkParams,
    k: f64,
    edges: &[f64],
) -> Result<Vec<f64>> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "bin edges must be strictly increasing".into(),
        ));
    }
    let vk2 = params.vk2(k);
    let nb = edges.len() - 1;
    let mut out = vec![0.0; nb];
    for (j, &e) in model.eps_tilde.iter().enumerate() {
        if e < edges[0] || e > edges[nb] {
            continue;
        }
        let bin = edges[1..].partition_point(|&x| x <= e).min(nb - 1);
        out[bin] += model.eta_abs2(vk2, j);
    }
    for (b, w) in out.iter_mut().zip(edges.windows(2)) {
        *b /= w[1] - w[0];
    }
    Ok(out)
}
