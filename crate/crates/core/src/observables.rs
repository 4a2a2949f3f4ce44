//! Displacement, survival probability and the non-Markovianity witness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::gme::{evolve_k_sweep, KTrace, TimeGrid, RHO0};
use crate::kernel::SpectralLaw;
use crate::model::{phase_derivative_unchecked, winding_number, KGrid, WalkParams};

/// One point `(u, α)` of the phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub u: f64,
    pub alpha: f64,
    pub mean_displacement: f64,
}

/// Diagonal two-state density matrix `p_A |A⟩⟨A| + (1 - p_A) |C⟩⟨C|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensity2 {
    p_a: f64,
}

impl ReducedDensity2 {
    pub fn new(p_a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_a) {
            return Err(Error::InvalidParameter(format!(
                "p_A must lie in [0, 1], got {p_a}"
            )));
        }
        Ok(Self { p_a })
    }

    pub fn p_a(&self) -> f64 {
        self.p_a
    }

    pub fn p_c(&self) -> f64 {
        1.0 - self.p_a
    }
}

/// `σ(t) = dp_A/dt` and the accumulated positive part.
///
/// `n_lower` is a lower bound on the Breuer measure: it uses the fixed
/// orthogonal pair `|A⟩, |C⟩` rather than maximizing over initial states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessTrace {
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
    pub n_lower: f64,
}

fn check_traces(kgrid: &KGrid, traces: &[KTrace], t_index: usize) -> Result<()> {
    if traces.len() != kgrid.len() {
        return Err(Error::GridMismatch(format!(
            "{} traces for a {}-point k grid",
            traces.len(),
            kgrid.len()
        )));
    }
    for (tr, &k) in traces.iter().zip(kgrid.points()) {
        if let Some(tk) = tr.k {
            if (tk - k).abs() > 1e-12 {
                return Err(Error::GridMismatch(format!(
                    "trace at k = {tk}, grid point {k}"
                )));
            }
        }
        if t_index >= tr.len() {
            return Err(Error::GridMismatch(format!(
                "time index {t_index} beyond trace of length {}",
                tr.len()
            )));
        }
    }
    Ok(())
}

/// `⟨m(t_i)⟩ = ∮ dk φ'(k) ρ_Ā(k, t_i)` by the periodic trapezoid rule.
pub fn mean_displacement(
    params: &WalkParams,
    kgrid: &KGrid,
    traces: &[KTrace],
    t_index: usize,
) -> Result<f64> {
    params.validate()?;
    if params.is_degenerate() {
        return Err(Error::DegenerateRatio);
    }
    check_traces(kgrid, traces, t_index)?;
    let w = kgrid.weight();
    Ok(kgrid
        .points()
        .iter()
        .zip(traces)
        .map(|(&k, tr)| w * phase_derivative_unchecked(params.u, k) * tr.rho_bar(t_index))
        .sum())
}

/// [`mean_displacement`] at every time of the traces.
pub fn mean_displacement_series(
    params: &WalkParams,
    kgrid: &KGrid,
    traces: &[KTrace],
) -> Result<Vec<f64>> {
    let n = traces.first().map_or(0, KTrace::len);
    (0..n)
        .map(|i| mean_displacement(params, kgrid, traces, i))
        .collect()
}

/// Long-time average of `⟨m⟩` from the steady populations.
///
/// For `α ≤ 1` the reservoir absorbs every k-mode and the result is the
/// winding number itself. For `α > 1` the integrand is rewritten as
/// `(u cos k + u²) a / (1 + a|v(k)|²) / 2π` with `a = Ω⁻/|v(k)|²`, which
/// stays smooth across the zone.
pub fn mean_displacement_longtime(
    params: &WalkParams,
    law: &SpectralLaw,
    kgrid: &KGrid,
) -> Result<f64> {
    params.validate()?;
    law.validate()?;
    if params.is_degenerate() {
        return Err(Error::DegenerateRatio);
    }
    let a = match law.omega_minus(1.0) {
        None => return Ok(winding_number(params)? as f64),
        Some(a) => a,
    };
    let u = params.u;
    let w = kgrid.weight();
    Ok(kgrid
        .points()
        .iter()
        .map(|&k| {
            let num = u * k.cos() + u * u;
            w * RHO0 * num * a / (1.0 + a * params.vk2(k))
        })
        .sum())
}

/// Shifts a uniform `u` grid by half a step if it hits the transition.
pub fn avoid_transition(u_grid: &[f64]) -> Vec<f64> {
    let hits = u_grid
        .iter()
        .any(|&u| (u - 1.0).abs() < crate::model::DEGENERACY_TOL * 1e3);
    if !hits || u_grid.len() < 2 {
        return u_grid.to_vec();
    }
    let step = (u_grid[u_grid.len() - 1] - u_grid[0]) / (u_grid.len() - 1) as f64;
    u_grid.iter().map(|u| u + 0.5 * step).collect()
}

/// Long-time `⟨m⟩` over a `(u, α)` grid, `u` major.
///
/// `law` supplies `J_α` and `Δ`; its exponent is replaced per cell.
pub fn phase_diagram(
    u_grid: &[f64],
    alpha_grid: &[f64],
    law: &SpectralLaw,
    kgrid: &KGrid,
    exec: Execution,
) -> Result<Vec<PhaseCell>> {
    let points: Vec<(f64, f64)> = u_grid
        .iter()
        .flat_map(|&u| alpha_grid.iter().map(move |&a| (u, a)))
        .collect();
    exec::try_map_ordered(exec, &points, |&(u, alpha)| {
        let params = WalkParams::with_ratio(u)?;
        let cell_law = SpectralLaw::new(alpha, law.j_alpha, law.delta)?;
        Ok(PhaseCell {
            u,
            alpha,
            mean_displacement: mean_displacement_longtime(&params, &cell_law, kgrid)?,
        })
    })
}

/// `p_A(t_i) = ∮ dk ρ_A(k, t_i)`.
pub fn survival_probability(kgrid: &KGrid, traces: &[KTrace], t_index: usize) -> Result<f64> {
    check_traces(kgrid, traces, t_index)?;
    let w = kgrid.weight();
    Ok(traces.iter().map(|tr| w * tr.rho_a[t_index]).sum())
}

pub fn survival_series(kgrid: &KGrid, traces: &[KTrace]) -> Result<Vec<f64>> {
    let n = traces.first().map_or(0, KTrace::len);
    (0..n)
        .map(|i| survival_probability(kgrid, traces, i))
        .collect()
}

/// `½ Tr|ρ₁ - ρ₂|`, which for commuting diagonal states is `|p₁ - p₂|`.
pub fn trace_distance(r1: &ReducedDensity2, r2: &ReducedDensity2) -> f64 {
    (r1.p_a - r2.p_a).abs()
}

/// Finite-difference witness on a uniform time grid.
pub fn witness(p_a: &[f64], times: &[f64]) -> Result<WitnessTrace> {
    if p_a.len() != times.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples for {} times",
            p_a.len(),
            times.len()
        )));
    }
    let n = times.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "witness needs at least two samples".into(),
        ));
    }
    let h = times[1] - times[0];
    if !(h > 0.0)
        || times
            .windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0))
    {
        return Err(Error::InvalidParameter(
            "witness needs a uniform increasing time grid".into(),
        ));
    }
    let sigma: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                (p_a[1] - p_a[0]) / h
            } else if i == n - 1 {
                (p_a[n - 1] - p_a[n - 2]) / h
            } else {
                (p_a[i + 1] - p_a[i - 1]) / (2.0 * h)
            }
        })
        .collect();
    let n_lower = sigma
        .windows(2)
        .map(|w| 0.5 * h * (w[0].max(0.0) + w[1].max(0.0)))
        .sum();
    Ok(WitnessTrace {
        times: times.to_vec(),
        sigma,
        n_lower,
    })
}

/// Witness traces for a sweep of bandwidths `Δ`.
///
/// Each `Δ` runs a full Volterra k sweep on the common time grid; the grid
/// step must satisfy the stability bound for the largest `Δ`.
pub fn witness_map(
    params: &WalkParams,
    law: &SpectralLaw,
    deltas: &[f64],
    kgrid: &KGrid,
    grid: TimeGrid,
    exec: Execution,
) -> Result<Vec<(f64, WitnessTrace)>> {
    exec::try_map_ordered(exec, deltas, |&delta| {
        let l = SpectralLaw::new(law.alpha, law.j_alpha, delta)?;
        let traces = evolve_k_sweep(&l, params, kgrid, grid, exec)?;
        let p = survival_series(kgrid, &traces)?;
        Ok((delta, witness(&p, &grid.times())?))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat_traces(kgrid: &KGrid, value: f64) -> Vec<KTrace> {
        kgrid
            .points()
            .iter()
            .map(|&k| KTrace::new(Some(k), vec![0.0], vec![value]))
            .collect()
    }

    #[test]
    fn displacement_limits() {
        let g = KGrid::new(256).unwrap();
        let p2 = WalkParams::with_ratio(2.0).unwrap();
        let p05 = WalkParams::with_ratio(0.5).unwrap();
        let full = flat_traces(&g, RHO0);
        let empty = flat_traces(&g, 0.0);
        assert!(mean_displacement(&p2, &g, &full, 0).unwrap().abs() < 1e-15);
        assert_relative_eq!(
            mean_displacement(&p2, &g, &empty, 0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert!(mean_displacement(&p05, &g, &empty, 0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn displacement_checks_grid() {
        let g = KGrid::new(16).unwrap();
        let p = WalkParams::with_ratio(2.0).unwrap();
        let short = flat_traces(&KGrid::new(15).unwrap(), 0.0);
        assert!(matches!(
            mean_displacement(&p, &g, &short, 0),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            mean_displacement(&p, &g, &flat_traces(&g, 0.0), 1),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn longtime_examples() {
        let g = KGrid::new(256).unwrap();
        let law = SpectralLaw::new(0.5, 0.01, 5.0).unwrap();
        let m = mean_displacement_longtime(&WalkParams::with_ratio(2.0).unwrap(), &law, &g);
        assert_eq!(m.unwrap(), 1.0);
        let m = mean_displacement_longtime(&WalkParams::with_ratio(0.5).unwrap(), &law, &g);
        assert_eq!(m.unwrap(), 0.0);
        let law = SpectralLaw::new(1.5, 0.01, 5.0).unwrap();
        let m =
            mean_displacement_longtime(&WalkParams::with_ratio(2.0).unwrap(), &law, &g).unwrap();
        assert!(m > 0.0 && m < 1.0, "{m}");
        assert_eq!(
            mean_displacement_longtime(&WalkParams::with_ratio(1.0).unwrap(), &law, &g),
            Err(Error::DegenerateRatio)
        );
    }

    #[test]
    fn phase_row_at_zero_u() {
        let g = KGrid::new(64).unwrap();
        let law = SpectralLaw::new(0.0, 0.01, 5.0).unwrap();
        let cells = phase_diagram(
            &[0.0],
            &[0.0, 0.5, 1.5, 2.0],
            &law,
            &g,
            Execution::Sequential,
        )
        .unwrap();
        assert!(cells.iter().all(|c| c.mean_displacement == 0.0));
    }

    #[test]
    fn transition_avoidance() {
        let g: Vec<f64> = (0..5).map(|i| 0.5 + 0.25 * i as f64).collect();
        let s = avoid_transition(&g);
        assert_relative_eq!(s[0], 0.625, max_relative = 1e-14);
        assert!(s.iter().all(|&u| (u - 1.0).abs() > 0.1));
        let h = [0.1, 0.3];
        assert_eq!(avoid_transition(&h), h.to_vec());
    }

    #[test]
    fn trace_distance_examples() {
        let one = ReducedDensity2::new(1.0).unwrap();
        let zero = ReducedDensity2::new(0.0).unwrap();
        let p = ReducedDensity2::new(0.37).unwrap();
        assert_eq!(trace_distance(&one, &zero), 1.0);
        assert_eq!(trace_distance(&p, &p), 0.0);
        assert_eq!(trace_distance(&p, &zero), 0.37);
        assert!(ReducedDensity2::new(1.5).is_err());
    }

    #[test]
    fn markovian_decay_has_no_backflow() {
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let p: Vec<f64> = times.iter().map(|t| (-0.3 * t).exp()).collect();
        let w = witness(&p, &times).unwrap();
        assert!(w.sigma.iter().all(|&s| s < 0.0));
        assert_eq!(w.n_lower, 0.0);
    }

    #[test]
    fn witness_integrates_positive_part() {
        let times: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.005).collect();
        let p: Vec<f64> = times.iter().map(|t| 0.5 + 0.1 * t.sin()).collect();
        let w = witness(&p, &times).unwrap();
        // positive lobes of 0.1 cos t inside [0, 10]: [0, π/2] and [3π/2, 5π/2]
        let exact = 0.1 * 3.0;
        assert!((w.n_lower - exact).abs() < 2e-3, "{} vs {exact}", w.n_lower);
        assert!(witness(&p[..3], &[0.0, 1.0, 3.0]).is_err());
    }
}
