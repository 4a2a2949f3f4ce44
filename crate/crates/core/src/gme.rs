//! Born-order generalized master equation for `ρ_A(k, t)`.
//!
//! The population obeys the Volterra integro-differential equation
//!
//! ```text
//! dρ_A/dt = -∫_0^t K(t - t') ρ_A(t') dt',     ρ_A(0) = 1/2π,
//! ```
//!
//! whose Laplace transform is `ρ̃_A(s) = ρ_A(0) / (s + iΣ̃(s))`. The time
//! domain solver is the primary engine; Bromwich inversion of the Laplace
//! form is kept as an independent cross-check, and the long-time average is
//! the residue of `ρ̃_A` at `s = 0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::kernel::{i_self_energy, CosineTransform, SpectralLaw};
use crate::model::{KGrid, WalkParams};

/// `ρ_A(k, 0)`: the walker starts uniformly spread over the zone.
pub const RHO0: f64 = 1.0 / (2.0 * PI);
/// Upper bound on `dt·Δ` for the time-domain solver.
pub const MAX_STEP_BANDWIDTH: f64 = 0.2;
/// Allowed excursion of `2πρ_A` outside `[0, 1]` before a trace is flagged.
pub const BOUND_SLACK: f64 = 1e-3;

/// Uniform time grid `t_i = i·dt`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be > 0, got {dt}"
            )));
        }
        Ok(Self { dt, steps })
    }

    /// Grid reaching at least `t_max` with step `dt`.
    pub fn covering(t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be >= 0, got {t_max}"
            )));
        }
        Self::new(dt, (t_max / dt - 1e-9).ceil().max(0.0) as usize)
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.steps)
    }
}

/// Time series of `ρ_A(k, t)` at one quasi-momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct KTrace {
    pub k: Option<f64>,
    pub times: Vec<f64>,
    pub rho_a: Vec<f64>,
    /// Set when `2πρ_A` leaves `[0, 1]` by more than [`BOUND_SLACK`].
    pub bounds_exceeded: bool,
}

impl KTrace {
    pub fn new(k: Option<f64>, times: Vec<f64>, rho_a: Vec<f64>) -> Self {
        let bounds_exceeded = rho_a
            .iter()
            .any(|&r| 2.0 * PI * r > 1.0 + BOUND_SLACK || 2.0 * PI * r < -BOUND_SLACK);
        Self {
            k,
            times,
            rho_a,
            bounds_exceeded,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn two_pi_rho_a(&self) -> Vec<f64> {
        self.rho_a.iter().map(|r| 2.0 * PI * r).collect()
    }

    /// `ρ_Ā(k, t_i) = 1/2π - ρ_A(k, t_i)`.
    pub fn rho_bar(&self, i: usize) -> f64 {
        RHO0 - self.rho_a[i]
    }

    /// Trapezoidal `(1/t_i) ∫_0^{t_i} ρ_A dt` on a uniform grid.
    pub fn running_average(&self, i: usize) -> f64 {
        if i == 0 {
            return self.rho_a[0];
        }
        let h = self.times[1] - self.times[0];
        let inner: f64 = self.rho_a[1..i].iter().sum();
        let integral = h * (0.5 * (self.rho_a[0] + self.rho_a[i]) + inner);
        integral / self.times[i]
    }
}

fn check_step(law: &SpectralLaw, dt: f64) -> Result<()> {
    let product = dt * law.delta;
    if product > MAX_STEP_BANDWIDTH * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge {
            dt,
            delta: law.delta,
            product,
        });
    }
    Ok(())
}

/// Memory kernel sampled on a time grid, per unit `|v(k)|²`.
///
/// The kernel depends on k only through the `|v(k)|²` prefactor, so one
/// table serves a whole k sweep.
#[derive(Debug, Clone)]
pub struct KernelTable {
    law: SpectralLaw,
    grid: TimeGrid,
    unit: Vec<f64>,
}

impl KernelTable {
    pub fn new(law: &SpectralLaw, grid: TimeGrid) -> Result<Self> {
        law.validate()?;
        check_step(law, grid.dt)?;
        let ct = CosineTransform::new(law.alpha, law.delta);
        let unit = (0..grid.len())
            .map(|i| {
                if i == 0 {
                    law.omega_plus(1.0)
                } else {
                    2.0 * law.j_alpha * ct.eval(grid.time(i))
                }
            })
            .collect();
        Ok(Self {
            law: *law,
            grid,
            unit,
        })
    }

    pub fn law(&self) -> &SpectralLaw {
        &self.law
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// `K(t_i)` for unit `|v(k)|²`.
    pub fn unit_values(&self) -> &[f64] {
        &self.unit
    }

    /// Trapezoidal product integration of the master equation.
    ///
    /// Both the convolution and the time stepping use the trapezoid rule,
    /// with the `t' = t` endpoint weighted by one half; the implicit term is
    /// solved for exactly, so the scheme is second order and unconditionally
    /// stable for the positive kernel at `t = 0`.
    pub fn evolve(&self, k: Option<f64>, vk2: f64) -> KTrace {
        let n = self.grid.len();
        let h = self.grid.dt;
        let kern: Vec<f64> = self.unit.iter().map(|x| x * vk2).collect();
        let mut y = vec![0.0; n];
        y[0] = RHO0;
        if n > 1 {
            // F_m = ∫_0^{t_m} K(t_m - t') y(t') dt'
            let mut f_prev = 0.0;
            let denom = 1.0 + 0.25 * h * h * kern[0];
            for m in 0..n - 1 {
                let nxt = m + 1;
                // Known part of F_{m+1}: half-weight on t'=0, full weights on 1..=m.
                let history = 0.5 * kern[nxt] * y[0] + reversed_dot(&kern[1..=m], &y[1..=m]);
                let partial = h * history;
                y[nxt] = (y[m] - 0.5 * h * (f_prev + partial)) / denom;
                f_prev = partial + 0.5 * h * kern[0] * y[nxt];
            }
        }
        KTrace::new(k, self.grid.times(), y)
    }
}

/// `Σ_j a[m-1-j] * b[j]` with four independent accumulators.
fn reversed_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let m = a.len();
    let mut acc = [0.0; 4];
    let chunks = m / 4;
    for c in 0..chunks {
        let j = 4 * c;
        acc[0] += a[m - 1 - j] * b[j];
        acc[1] += a[m - 2 - j] * b[j + 1];
        acc[2] += a[m - 3 - j] * b[j + 2];
        acc[3] += a[m - 4 - j] * b[j + 3];
    }
    for j in 4 * chunks..m {
        acc[0] += a[m - 1 - j] * b[j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// Volterra solution of the master equation at one `|v(k)|²`.
pub fn evolve_volterra(law: &SpectralLaw, vk2: f64, grid: TimeGrid) -> Result<KTrace> {
    Ok(KernelTable::new(law, grid)?.evolve(None, vk2))
}

/// Volterra traces for every point of a k grid, in grid order.
pub fn evolve_k_sweep(
    law: &SpectralLaw,
    params: &WalkParams,
    kgrid: &KGrid,
    grid: TimeGrid,
    exec: Execution,
) -> Result<Vec<KTrace>> {
    params.validate()?;
    let table = KernelTable::new(law, grid)?;
    Ok(exec::map_ordered(exec, kgrid.points(), |&k| {
        table.evolve(Some(k), params.vk2(k))
    }))
}

/// Contour parameters for the Bromwich integral along `Re s = γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BromwichConfig {
    pub gamma: f64,
    /// Node budget on the half line `Im s ≥ 0`; exceeding it is an error.
    pub n_nodes: usize,
    pub t_max: f64,
}

/// Absolute truncation target for the contour tail.
pub const BROMWICH_TAIL_TOL: f64 = 1e-6;

impl BromwichConfig {
    /// `γ = 1/t_max` with a generous node budget.
    pub fn for_horizon(t_max: f64) -> Self {
        Self {
            gamma: 1.0 / t_max.max(1.0),
            n_nodes: 400_000,
            t_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !(self.t_max > 0.0) {
            return Err(Error::InvalidParameter(
                "Bromwich abscissa and horizon must be positive".into(),
            ));
        }
        if self.gamma * self.t_max > 30.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma*t_max = {} exceeds 30",
                self.gamma * self.t_max
            )));
        }
        if self.n_nodes == 0 || !self.n_nodes.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "n_nodes must be even and positive".into(),
            ));
        }
        Ok(())
    }
}

/// Inverse Laplace transform of `ρ̃_A` on the line `Re s = γ`.
///
/// The exactly invertible part `ρ_A(0) s/(s² + Ω⁺)` (inverse
/// `ρ_A(0) cos(√Ω⁺ t)`) is subtracted first, leaving a remainder decaying
/// like `|s|⁻⁵`; the remainder is integrated by the trapezoid rule with a
/// step small enough that periodic images are suppressed by `e^{-25}`.
pub fn invert_bromwich(
    law: &SpectralLaw,
    vk2: f64,
    config: &BromwichConfig,
    times: &[f64],
) -> Result<KTrace> {
    law.validate()?;
    config.validate()?;
    if let Some(&t) = times
        .iter()
        .find(|&&t| t < 0.0 || t > config.t_max * (1.0 + 1e-12))
    {
        return Err(Error::InvalidParameter(format!(
            "time {t} outside [0, t_max = {}]",
            config.t_max
        )));
    }
    let gamma = config.gamma;
    let w0 = law.omega_plus(vk2);
    let freq = w0.sqrt();
    let base = |t: f64| RHO0 * (freq * t).cos();
    if w0 == 0.0 {
        return Ok(KTrace::new(
            None,
            times.to_vec(),
            times.iter().map(|&t| base(t)).collect(),
        ));
    }

    let period = (2.0 * config.t_max).max(25.0 / gamma);
    let step = 2.0 * PI / period;
    let amp = 4.0 * RHO0 * law.second_moment(vk2);
    let growth = (gamma * config.t_max).exp();
    let tail_cut = (growth * amp / (4.0 * PI * 0.1 * BROMWICH_TAIL_TOL)).powf(0.25);
    let cutoff = tail_cut.max(3.0 * law.delta).max(3.0 * freq);
    let mut nodes = (cutoff / step).ceil() as usize;
    nodes += nodes % 2;
    if nodes > config.n_nodes {
        return Err(Error::TailBound {
            nodes: config.n_nodes,
            needed: cutoff,
            cap: config.n_nodes as f64 * step,
        });
    }

    let remainder = (0..=nodes)
        .map(|n| {
            let s = Complex64::new(gamma, n as f64 * step);
            let sig = i_self_energy(law, vk2, s)?;
            Ok(RHO0 * (1.0 / (s + sig) - s / (s * s + w0)))
        })
        .collect::<Result<Vec<Complex64>>>()?;

    let rho = times
        .iter()
        .map(|&t| {
            let mut acc = 0.5 * remainder[0].re;
            let rot = Complex64::from_polar(1.0, step * t);
            let mut phase = rot;
            for r in &remainder[1..] {
                acc += (r * phase).re;
                phase *= rot;
            }
            base(t) + (gamma * t).exp() / PI * step * acc
        })
        .collect();
    Ok(KTrace::new(None, times.to_vec(), rho))
}

/// Long-time average `lim s ρ̃_A(k, s)`: zero for `α ≤ 1`, otherwise
/// `(1/2π) / (1 + Ω⁻_α(k))`.
pub fn steady_average(law: &SpectralLaw, vk2: f64) -> f64 {
    if vk2 == 0.0 {
        return RHO0;
    }
    match law.omega_minus(vk2) {
        Some(w) => RHO0 / (1.0 + w),
        None => 0.0,
    }
}

/// Sample points used by [`numeric_residue`].
pub const RESIDUE_SAMPLES: [f64; 4] = [1e-4, 1e-5, 1e-6, 1e-7];

/// Numerical `lim_{s→0} s ρ̃_A(k, s)` by Richardson extrapolation.
///
/// With `f(s) = iΣ̃(s)/s` the residue is `ρ_A(0)/(1 + f(0))`. For `α > 1`
/// `f` converges and carries powers `s^{α-1}`, `s²`, `s^{α+1}`. Otherwise
/// `f` diverges and `1/f` is extrapolated to zero instead: it is a series in
/// `s^{1-α}` below the Ohmic point and linear in `1/ln(Δ/s)` at it.
/// Accuracy degrades as `α` approaches 1 from either side.
pub fn numeric_residue(law: &SpectralLaw, vk2: f64) -> Result<f64> {
    law.validate()?;
    if vk2 == 0.0 {
        return Ok(RHO0);
    }
    let f = |s: f64| -> Result<f64> { Ok(i_self_energy(law, vk2, Complex64::new(s, 0.0))?.re / s) };
    let a = law.alpha;
    let samples = |g: &dyn Fn(f64) -> Result<f64>| -> Result<Vec<f64>> {
        RESIDUE_SAMPLES.iter().map(|&s| g(s)).collect()
    };
    if (a - 1.0).abs() < 1e-12 {
        let xs: Vec<f64> = RESIDUE_SAMPLES
            .iter()
            .map(|&s| 1.0 / (law.delta / s).ln())
            .collect();
        let ys = samples(&|s| Ok(1.0 / f(s)?))?;
        let h0 = richardson(&xs[2..], &ys[2..], &[1.0]);
        return Ok(RHO0 * h0 / (1.0 + h0));
    }
    if a > 1.0 {
        let exps = separated_exponents(&[a - 1.0, 2.0, a + 1.0]);
        let ys = samples(&|s| f(s))?;
        let f0 = richardson(&RESIDUE_SAMPLES, &ys, &exps);
        Ok(RHO0 / (1.0 + f0))
    } else {
        let p = 1.0 - a;
        let exps = separated_exponents(&[p, 2.0 * p, 3.0 * p]);
        let ys = samples(&|s| Ok(1.0 / f(s)?))?;
        let h0 = richardson(&RESIDUE_SAMPLES, &ys, &exps);
        Ok(RHO0 * h0 / (1.0 + h0))
    }
}

/// Exponents below 2.5, dropping any closer than 0.25 to a kept one.
fn separated_exponents(candidates: &[f64]) -> Vec<f64> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for p in sorted {
        if p < 2.5 && out.last().is_none_or(|&q| p - q >= 0.25) {
            out.push(p);
        }
    }
    out
}

/// Value at zero of `y(x) = a0 + Σ a_i x^{p_i}` through the last samples.
fn richardson(x: &[f64], y: &[f64], exps: &[f64]) -> f64 {
    let m = exps.len() + 1;
    let off = x.len() - m;
    let a = DMatrix::from_fn(m, m, |r, c| {
        if c == 0 {
            1.0
        } else {
            x[off + r].powf(exps[c - 1])
        }
    });
    let b = DVector::from_column_slice(&y[off..]);
    a.lu().solve(&b).map(|sol| sol[0]).unwrap_or(y[x.len() - 1])
}
