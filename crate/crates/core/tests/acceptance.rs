//! End-to-end acceptance checks, one PASS/FAIL line each.
//!
//! Run with `cargo test -p nmwalk --test acceptance`. Exits non-zero if any
//! check fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nmwalk::exec::Execution;
use nmwalk::gme::{
    evolve_k_sweep, evolve_volterra, numeric_residue, steady_average, TimeGrid, RHO0,
};
use nmwalk::kernel::SpectralLaw;
use nmwalk::model::{winding_integral, winding_number, KGrid, WalkParams};
use nmwalk::observables::{
    avoid_transition, mean_displacement_series, phase_diagram, survival_series, witness,
    witness_map,
};
use nmwalk::oracle::{
    exact_evolve_chain, exact_evolve_full, exact_evolve_reduced, kspace_displacement_full,
    ChainModel,
};
use nmwalk::swt::{discretize_spectral_law, raw_reservoir_for_law};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Check = fn() -> Outcome;

fn run(name: &str, budget: Duration, check: Check) -> bool {
    let start = Instant::now();
    let out = check();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "{} {name}: {} [{:.2}s / {}s budget]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    pass
}

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

fn winding_quantization() -> Outcome {
    let us: Vec<f64> = (0..10)
        .map(|i| 0.05 + 0.1 * i as f64)
        .chain((0..10).map(|i| 1.05 + 0.1 * i as f64))
        .collect();
    let mut worst = 0.0_f64;
    let mut ok = true;
    for &u in &us {
        let p = WalkParams::with_ratio(u).unwrap();
        let n = winding_number(&p).unwrap();
        let w = winding_integral(&p).unwrap();
        worst = worst.max((w - w.round()).abs());
        ok &= n == i64::from(u > 1.0);
    }
    outcome(
        ok && worst < 1e-9,
        format!(
            "{} u values, max |integral - integer| = {worst:.1e}",
            us.len()
        ),
    )
}

fn localization_dichotomy() -> Outcome {
    let vk2 = WalkParams::with_ratio(2.0).unwrap().vk2(0.0);
    let mut ok = true;
    let mut worst = 0.0_f64;
    for &a in &[0.0, 0.5, 1.0] {
        let law = SpectralLaw::new(a, 0.01, 5.0).unwrap();
        ok &= steady_average(&law, vk2) == 0.0;
        let r = numeric_residue(&law, vk2).unwrap();
        worst = worst.max(r.abs());
    }
    for &a in &[1.5, 2.0, 3.0] {
        let law = SpectralLaw::new(a, 0.01, 5.0).unwrap();
        let closed = RHO0 / (1.0 + law.omega_minus(vk2).unwrap());
        ok &= steady_average(&law, vk2) == closed;
        let r = numeric_residue(&law, vk2).unwrap();
        worst = worst.max((r - closed).abs());
    }
    outcome(
        ok && worst < 1e-6,
        format!("closed forms exact, max |numeric residue - closed form| = {worst:.1e}"),
    )
}

fn ohmic_displacement() -> Outcome {
    let p = WalkParams::with_ratio(2.0).unwrap();
    let law = SpectralLaw::new(0.0, 0.01, 5.0).unwrap();
    let g = KGrid::new(129).unwrap();
    let grid = TimeGrid::covering(200.0, 0.04).unwrap();
    let traces = evolve_k_sweep(&law, &p, &g, grid, Execution::Parallel).unwrap();
    let m = mean_displacement_series(&p, &g, &traces).unwrap();
    let m_end = *m.last().unwrap();
    let k0 = &traces[g.len() / 2];
    let r = k0.two_pi_rho_a();
    let r_end = *r.last().unwrap();
    outcome(
        (m_end - 1.0).abs() < 0.02 && r_end < 0.05 && r_end < r[r.len() / 20],
        format!("<m(t=200)> = {m_end:.4}, 2pi rho_A(0, t=200) = {r_end:.2e}"),
    )
}

fn super_ohmic_average() -> Outcome {
    let p = WalkParams::with_ratio(2.0).unwrap();
    let law = SpectralLaw::new(2.0, 0.01, 5.0).unwrap();
    let grid = TimeGrid::covering(500.0, 0.04).unwrap();
    let tr = evolve_volterra(&law, p.vk2(0.0), grid).unwrap();
    let avg = 2.0 * PI * tr.running_average(tr.len() - 1);
    let target = 1.0 / 1.9;
    let r = tr.two_pi_rho_a();
    let tail = &r[r.len() / 2..];
    let swing = tail.iter().cloned().fold(f64::MIN, f64::max)
        - tail.iter().cloned().fold(f64::MAX, f64::min);
    outcome(
        (avg - target).abs() < 0.02 && swing > 0.01,
        format!(
            "running average at T=500: {avg:.4} (target {target:.4}), late-time swing {swing:.3}"
        ),
    )
}

fn phase_diagram_grid() -> Outcome {
    let us = avoid_transition(&range(0.05, 2.0, 0.05));
    let alphas = range(0.0, 2.0, 0.05);
    let law = SpectralLaw::new(0.0, 0.01, 5.0).unwrap();
    let g = KGrid::new(256).unwrap();
    let cells = phase_diagram(&us, &alphas, &law, &g, Execution::Parallel).unwrap();
    let quantized = cells
        .iter()
        .filter(|c| c.alpha <= 1.0)
        .all(|c| (c.mean_displacement - c.mean_displacement.round()).abs() < 1e-3);
    let column = |a: f64| -> Vec<(f64, f64)> {
        cells
            .iter()
            .filter(|c| (c.alpha - a).abs() < 1e-9)
            .map(|c| (c.u, c.mean_displacement))
            .collect()
    };
    let step = column(0.5)
        .iter()
        .all(|&(u, m)| m == if u > 1.0 { 1.0 } else { 0.0 });
    let smooth = column(1.5);
    let max_jump = smooth
        .windows(2)
        .map(|w| (w[1].1 - w[0].1).abs())
        .fold(0.0, f64::max);
    let interior = smooth
        .iter()
        .filter(|c| c.0 > 0.5)
        .all(|c| c.1 > 0.0 && c.1 < 1.0);
    let increasing = smooth.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    outcome(
        cells.len() == 40 * 41 && quantized && step && interior && increasing && max_jump < 0.2,
        format!(
            "{} cells, alpha<=1 quantized: {quantized}, alpha=0.5 step: {step}, alpha=1.5 max jump {max_jump:.3}",
            cells.len()
        ),
    )
}

fn markovian_limit() -> Outcome {
    let p = WalkParams::with_ratio(2.0).unwrap();
    let law = SpectralLaw::new(0.0, 0.01, 100.0).unwrap();
    let grid = TimeGrid::covering(100.0, 0.002).unwrap();
    let ks = [0.0, PI / 2.0, PI];
    let errs = nmwalk::exec::map_ordered(Execution::Parallel, &ks, |&k| {
        let vk2 = p.vk2(k);
        let tr = evolve_volterra(&law, vk2, grid).unwrap();
        tr.times
            .iter()
            .zip(tr.two_pi_rho_a())
            .map(|(&t, r)| (r - (-PI * 0.01 * vk2 * t).exp()).abs())
            .fold(0.0, f64::max)
    });
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst < 0.02,
        format!("max |2pi rho_A - exp(-pi J |v|^2 t)| over t in [0,100] = {worst:.2e}"),
    )
}

/// Max deviation between the master equation and the exact discretized
/// model over `t <= 0.9 * 2πN/Δ`, stopping short of the first recurrence.
fn born_gap(alpha: f64, j: f64, delta: f64, n: usize, vk2: f64) -> f64 {
    let law = SpectralLaw::new(alpha, j, delta).unwrap();
    let t_end = 0.9 * 2.0 * PI * n as f64 / delta;
    let dt = 0.2 / delta;
    let grid = TimeGrid::covering(t_end, dt).unwrap();
    let gme = evolve_volterra(&law, vk2, grid).unwrap();
    let model = discretize_spectral_law(&law, n).unwrap();
    let exact = exact_evolve_reduced(&model, vk2, &gme.times).unwrap();
    gme.two_pi_rho_a()
        .iter()
        .zip(exact.two_pi_rho_a())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn born_order() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for &alpha in &[0.5, 2.0] {
        let e1 = born_gap(alpha, BORN_J, BORN_DELTA, 400, 1.0);
        let e2 = born_gap(alpha, BORN_J / 2.0, BORN_DELTA, 400, 1.0);
        let ratio = e1 / e2;
        ok &= (3.0..=5.0).contains(&ratio);
        notes.push(format!("alpha={alpha}: {e1:.2e} -> {e2:.2e} (x{ratio:.2})"));
    }
    outcome(ok, notes.join(", "))
}

const BORN_J: f64 = 0.002;
const BORN_DELTA: f64 = 10.0;

fn chain_identity() -> Outcome {
    let p = WalkParams::new(2.0, 50.0).unwrap();
    let law = SpectralLaw::new(0.0, 0.05, 5.0).unwrap();
    let raw = raw_reservoir_for_law(&p, &law, 30).unwrap();
    let chain = ChainModel::new(41, p, raw.clone()).unwrap();
    let times = range(0.0, 40.0, 0.5);
    let real = exact_evolve_chain(&chain, &times).unwrap();
    let g = KGrid::new(256).unwrap();
    let kspace = kspace_displacement_full(&p, &raw, &g, &times, Execution::Parallel).unwrap();
    let worst = real
        .mean_m
        .iter()
        .zip(&kspace)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(
        worst < 1e-3,
        format!(
            "M=41, max |<m>_chain - <m>_k| = {worst:.1e} over t<=40, <m(40)> = {:.3}",
            real.mean_m.last().unwrap()
        ),
    )
}

/// Full three-band versus reduced model at `|v(k)| = 1`.
fn sw_gap(omega: f64) -> f64 {
    let p = WalkParams::new(2.0, omega).unwrap();
    let law = SpectralLaw::new(0.5, 0.001, 5.0).unwrap();
    let n = 100;
    let k = PI;
    let times = range(0.0, 20.0, 0.05);
    let raw = raw_reservoir_for_law(&p, &law, n).unwrap();
    let full = exact_evolve_full(&p, &raw, k, &times).unwrap();
    let model = discretize_spectral_law(&law, n).unwrap();
    let reduced = exact_evolve_reduced(&model, p.vk2(k), &times).unwrap();
    full.two_pi_rho_a()
        .iter()
        .zip(reduced.two_pi_rho_a())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn sw_validation() -> Outcome {
    let e50 = sw_gap(50.0);
    let e10 = sw_gap(10.0);
    outcome(
        e50 < 0.03 && e10 > e50,
        format!("max gap t<=20: omega=50 {e50:.2e}, omega=10 {e10:.2e}"),
    )
}

fn witness_sign_map() -> Outcome {
    let p = WalkParams::with_ratio(2.0).unwrap();
    let law = SpectralLaw::new(0.5, 0.01, 5.0).unwrap();
    let deltas = range(0.5, 5.0, 0.1);
    let g = KGrid::new(64).unwrap();
    let grid = TimeGrid::covering(WITNESS_T, 0.04).unwrap();
    let map = witness_map(&p, &law, &deltas, &g, grid, Execution::Parallel).unwrap();
    let positive =
        |w: &nmwalk::observables::WitnessTrace| w.sigma.iter().filter(|&&s| s > 0.0).count();
    let small_lobes = positive(&map[0].1);
    let large = &map.last().unwrap().1;
    let large_pos = positive(large);
    let max_large = large.sigma.iter().cloned().fold(f64::MIN, f64::max);

    let markov = SpectralLaw::new(0.0, 0.01, 100.0).unwrap();
    let mgrid = TimeGrid::covering(20.0, 0.002).unwrap();
    let traces = evolve_k_sweep(&markov, &p, &g, mgrid, Execution::Parallel).unwrap();
    let pa = survival_series(&g, &traces).unwrap();
    let mw = witness(&pa, &mgrid.times()).unwrap();
    let per_delta: Vec<String> = map
        .iter()
        .step_by(5)
        .map(|(d, w)| format!("{d:.1}:{}", positive(w)))
        .collect();
    outcome(
        small_lobes > 0 && large_pos == 0 && mw.n_lower < 1e-6,
        format!(
            "sigma>0 samples at Delta=0.5: {small_lobes}, at Delta=5: {large_pos} (max sigma {max_large:.1e}); markovian n_lower = {:.1e}; [{}]",
            mw.n_lower,
            per_delta.join(" ")
        ),
    )
}

const WITNESS_T: f64 = 60.0;

fn main() {
    let checks: [(&str, u64, Check); 10] = [
        ("winding quantization", 1, winding_quantization),
        ("localization dichotomy", 10, localization_dichotomy),
        ("ohmic displacement", 120, ohmic_displacement),
        ("super-ohmic steady state", 120, super_ohmic_average),
        ("phase diagram", 600, phase_diagram_grid),
        ("markovian limit", 600, markovian_limit),
        ("born-order oracle equivalence", 600, born_order),
        ("real-space displacement identity", 600, chain_identity),
        ("schrieffer-wolff validation", 600, sw_validation),
        ("witness map", 300, witness_sign_map),
    ];
    let mut failed = 0;
    for (name, secs, f) in checks {
        if !run(name, Duration::from_secs(secs), f) {
            failed += 1;
        }
    }
    println!(
        "{} of {} acceptance checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
