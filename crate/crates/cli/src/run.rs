//! Command dispatch: resolved config in, table out.

use std::f64::consts::PI;

use log::{info, warn};
use serde_json::{json, Value};

use nmwalk::exec::with_workers;
use nmwalk::gme::{evolve_k_sweep, evolve_volterra, steady_average, TimeGrid};
use nmwalk::model::winding_number;
use nmwalk::observables::{
    avoid_transition, mean_displacement_series, phase_diagram, survival_series, witness,
    witness_map,
};
use nmwalk::oracle::{
    exact_evolve_chain, exact_evolve_reduced, kspace_displacement_full, ChainModel,
};
use nmwalk::swt::{discretize_spectral_law, raw_reservoir_for_law};
use nmwalk::{Execution, KGrid, SpectralLaw, WalkParams};

use crate::config::{Command, RunConfig};
use crate::error::CliResult;
use crate::table::Table;

struct Setup {
    params: WalkParams,
    law: SpectralLaw,
}

fn setup(cfg: &RunConfig) -> CliResult<Setup> {
    let p = &cfg.physics;
    let mut params = WalkParams::new(p.u.scalar("u")?, p.omega)?;
    params.eps_a = p.eps_a;
    let law = SpectralLaw::new(p.alpha.scalar("alpha")?, p.j, p.delta.values()[0])?;
    Ok(Setup { params, law })
}

fn grid(cfg: &RunConfig) -> CliResult<TimeGrid> {
    Ok(TimeGrid::covering(cfg.numerics.t_max, cfg.numerics.dt)?)
}

fn kgrid(cfg: &RunConfig) -> CliResult<KGrid> {
    Ok(KGrid::new(cfg.numerics.k_points)?)
}

/// Runs the configured command on the configured worker pool.
pub fn execute(cfg: &RunConfig) -> CliResult<Table> {
    with_workers(cfg.numerics.workers, |exec| dispatch(cfg, exec))?
}

fn dispatch(cfg: &RunConfig, exec: Execution) -> CliResult<Table> {
    match cfg.command {
        Command::Evolve => evolve(cfg, exec),
        Command::Steady => steady(cfg),
        Command::PhaseDiagram => phase(cfg, exec),
        Command::Witness => witness_cmd(cfg, exec),
        Command::Winding => winding(cfg),
        Command::OracleCompare => oracle_compare(cfg),
        Command::ChainCheck => chain_check(cfg, exec),
    }
}

fn evolve(cfg: &RunConfig, exec: Execution) -> CliResult<Table> {
    let Setup { params, law } = setup(cfg)?;
    let grid = grid(cfg)?;
    if cfg.numerics.displacement {
        let kg = kgrid(cfg)?;
        let traces = evolve_k_sweep(&law, &params, &kg, grid, exec)?;
        let flagged = traces.iter().filter(|t| t.bounds_exceeded).count();
        if flagged > 0 {
            warn!(
                "{flagged} of {} k traces left [0, 1] beyond the bound slack",
                kg.len()
            );
        }
        let m = mean_displacement_series(&params, &kg, &traces)?;
        let mut t = Table::new(vec!["t", "mean_m"]);
        for (time, m) in grid.times().into_iter().zip(m) {
            t.push(vec![time, m]);
        }
        return Ok(t);
    }
    let k = cfg.numerics.k;
    let tr = evolve_volterra(&law, params.vk2(k), grid)?;
    if tr.bounds_exceeded {
        warn!("2πρ_A left [0, 1] beyond the bound slack; coupling is outside the Born regime");
    }
    let mut t = Table::new(vec!["t", "two_pi_rho_A"]);
    for (time, r) in tr.times.iter().zip(tr.two_pi_rho_a()) {
        t.push(vec![*time, r]);
    }
    t.extra.insert(
        "two_pi_rho_A_bar".into(),
        json!(2.0 * PI * steady_average(&law, params.vk2(k))),
    );
    Ok(t)
}

fn steady(cfg: &RunConfig) -> CliResult<Table> {
    let Setup { params, law } = setup(cfg)?;
    let mut t = Table::new(vec!["k", "two_pi_rho_A_bar"]);
    for &k in kgrid(cfg)?.points() {
        t.push(vec![k, 2.0 * PI * steady_average(&law, params.vk2(k))]);
    }
    Ok(t)
}

fn phase(cfg: &RunConfig, exec: Execution) -> CliResult<Table> {
    let p = &cfg.physics;
    let requested = p.u.values();
    let u = avoid_transition(&requested);
    if u != requested {
        info!("u grid hits the transition point; shifted by half a step");
    }
    let alpha = p.alpha.values();
    let law = SpectralLaw::new(alpha[0], p.j, p.delta.scalar("Delta")?)?;
    let cells = phase_diagram(&u, &alpha, &law, &kgrid(cfg)?, exec)?;
    let mut t = Table::new(vec!["u", "alpha", "mean_displacement"]);
    for c in cells {
        t.push(vec![c.u, c.alpha, c.mean_displacement]);
    }
    Ok(t)
}

fn witness_cmd(cfg: &RunConfig, exec: Execution) -> CliResult<Table> {
    let Setup { params, law } = setup(cfg)?;
    let grid = grid(cfg)?;
    let kg = kgrid(cfg)?;
    if cfg.physics.delta.is_range() {
        let map = witness_map(&params, &law, &cfg.physics.delta.values(), &kg, grid, exec)?;
        let mut t = Table::new(vec!["Delta", "t", "sigma"]);
        let mut lower = Vec::with_capacity(map.len());
        for (delta, w) in &map {
            for (time, s) in w.times.iter().zip(&w.sigma) {
                t.push(vec![*delta, *time, *s]);
            }
            lower.push(w.n_lower);
        }
        t.extra.insert("n_lower".into(), json!(lower));
        return Ok(t);
    }
    let traces = evolve_k_sweep(&law, &params, &kg, grid, exec)?;
    let w = witness(&survival_series(&kg, &traces)?, &grid.times())?;
    let mut t = Table::new(vec!["t", "sigma"]);
    for (time, s) in w.times.iter().zip(&w.sigma) {
        t.push(vec![*time, *s]);
    }
    t.extra.insert("n_lower".into(), json!(w.n_lower));
    Ok(t)
}

fn winding(cfg: &RunConfig) -> CliResult<Table> {
    let mut t = Table::new(vec!["u", "winding"]);
    let mut w = Vec::new();
    for u in cfg.physics.u.values() {
        let n = winding_number(&WalkParams::new(u, cfg.physics.omega)?)?;
        t.push(vec![u, n as f64]);
        w.push(n);
    }
    let value = match w.as_slice() {
        [one] => json!(one),
        many => Value::from(many.to_vec()),
    };
    t.extra.insert("winding".into(), value);
    Ok(t)
}

fn oracle_compare(cfg: &RunConfig) -> CliResult<Table> {
    let Setup { params, law } = setup(cfg)?;
    let grid = grid(cfg)?;
    let n = cfg.numerics.n_levels;
    let t_rec = 2.0 * PI * n as f64 / law.delta;
    if grid.t_max() > t_rec {
        warn!(
            "t_max = {} is past the recurrence time {t_rec} of the {n}-level reservoir",
            grid.t_max()
        );
    }
    let vk2 = params.vk2(cfg.numerics.k);
    let model = discretize_spectral_law(&law, n)?;
    let gme = evolve_volterra(&law, vk2, grid)?;
    let exact = exact_evolve_reduced(&model, vk2, &gme.times)?;
    let mut t = Table::new(vec!["t", "gme", "exact", "abs_err"]);
    for ((time, g), e) in gme
        .times
        .iter()
        .zip(gme.two_pi_rho_a())
        .zip(exact.two_pi_rho_a())
    {
        t.push(vec![*time, g, e, (g - e).abs()]);
    }
    t.extra.insert("recurrence_time".into(), json!(t_rec));
    Ok(t)
}

fn chain_check(cfg: &RunConfig, exec: Execution) -> CliResult<Table> {
    let Setup { params, law } = setup(cfg)?;
    let times = grid(cfg)?.times();
    let raw = raw_reservoir_for_law(&params, &law, cfg.numerics.n_levels)?;
    let chain = ChainModel::new(cfg.numerics.m_cells, params, raw.clone())?;
    let real = exact_evolve_chain(&chain, &times)?;
    let kspace = kspace_displacement_full(&params, &raw, &kgrid(cfg)?, &times, exec)?;
    let mut t = Table::new(vec!["t", "chain", "kspace", "abs_err"]);
    for ((time, c), k) in times.iter().zip(&real.mean_m).zip(&kspace) {
        t.push(vec![*time, *c, *k, (c - k).abs()]);
    }
    Ok(t)
}
