//! Run configuration: JSON file schema, command-line flags and their merge.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use nmwalk::gme::MAX_STEP_BANDWIDTH;

use crate::axis::Axis;
use crate::error::{CliError, CliResult};

/// Environment variable that overrides the worker count of a config file.
pub const WORKERS_ENV: &str = "NMWALK_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Population 2πρ_A(k,t) at one k, or ⟨m(t)⟩ with --displacement.
    Evolve,
    /// Long-time average 2πρ̄_A(k) over the k grid.
    Steady,
    /// Long-time ⟨m⟩ over a (u, α) grid. A grid hitting u = 1 is shifted by half a step.
    PhaseDiagram,
    /// Trace-distance witness σ(t); a Delta range gives the (Delta, t) map.
    Witness,
    /// Winding number of v(k) = 1 + u e^{ik}.
    Winding,
    /// Memory-kernel solution against exact diagonalization of the discretized model.
    OracleCompare,
    /// Finite chain ⟨m(t)⟩ against the k-space formula on the same reservoir.
    ChainCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    pub u: Axis,
    pub alpha: Axis,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "Delta")]
    pub delta: Axis,
    pub omega: f64,
    #[serde(rename = "eps_A")]
    pub eps_a: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            u: Axis::Value(2.0),
            alpha: Axis::Value(0.0),
            j: 0.01,
            delta: Axis::Value(5.0),
            omega: 50.0,
            eps_a: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub k: f64,
    pub k_points: usize,
    pub t_max: f64,
    pub dt: f64,
    pub n_levels: usize,
    pub m_cells: usize,
    pub workers: Option<usize>,
    pub displacement: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            k: 0.0,
            k_points: 129,
            t_max: 200.0,
            dt: 0.04,
            n_levels: 400,
            m_cells: 41,
            workers: None,
            displacement: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub path: Option<PathBuf>,
    /// Defaults to JSON for `winding` and CSV otherwise.
    pub format: Option<Format>,
}

/// Fully resolved run description; also the `--config` file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: Output,
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Hopping ratio v'/v (value or start:stop:step, stop inclusive).
    #[arg(long, global = true, value_parser = parse_axis, allow_hyphen_values = true)]
    pub u: Option<Axis>,
    /// Spectral exponent α (value or range).
    #[arg(long, global = true, value_parser = parse_axis)]
    pub alpha: Option<Axis>,
    /// Coupling prefactor J_α.
    #[arg(long = "J", global = true)]
    pub j: Option<f64>,
    /// Reservoir cutoff Δ (value or range).
    #[arg(long = "Delta", global = true, value_parser = parse_axis)]
    pub delta: Option<Axis>,
    /// Detuning ω of the B site.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// On-site energy of the A site.
    #[arg(long = "eps-A", global = true, allow_hyphen_values = true)]
    pub eps_a: Option<f64>,
    /// Quasimomentum for single-k commands.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Number of k points on the Brillouin zone grid.
    #[arg(long, global = true)]
    pub k_points: Option<usize>,
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Time step; dt·Δ must not exceed 0.2.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Reservoir levels for the exact oracles.
    #[arg(long, global = true)]
    pub n_levels: Option<usize>,
    /// Odd number of cells in the finite chain.
    #[arg(long, global = true)]
    pub m_cells: Option<usize>,
    /// Worker threads (overrides NMWALK_WORKERS and the config file).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// evolve: emit ⟨m(t)⟩ over the k grid instead of one population trace.
    #[arg(long, global = true)]
    pub displacement: bool,
    /// Output file (stdout when absent).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file mirroring the run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

pub fn load_file(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            physics: Physics::default(),
            numerics: Numerics::default(),
            output: Output::default(),
        }
    }

    /// Merges flags over an optional file and validates the result.
    ///
    /// `env_workers` is the raw value of [`WORKERS_ENV`], if set.
    pub fn resolve(
        command: Option<Command>,
        flags: &Flags,
        file: Option<RunConfig>,
        env_workers: Option<&str>,
    ) -> CliResult<Self> {
        let mut cfg = match (file, command) {
            (Some(mut f), Some(c)) => {
                f.command = c;
                f
            }
            (Some(f), None) => f,
            (None, Some(c)) => RunConfig::new(c),
            (None, None) => {
                return Err(CliError::Usage(
                    "no subcommand given and no --config file to take it from".into(),
                ))
            }
        };
        let p = &mut cfg.physics;
        if let Some(x) = flags.u {
            p.u = x;
        }
        if let Some(x) = flags.alpha {
            p.alpha = x;
        }
        if let Some(x) = flags.j {
            p.j = x;
        }
        if let Some(x) = flags.delta {
            p.delta = x;
        }
        if let Some(x) = flags.omega {
            p.omega = x;
        }
        if let Some(x) = flags.eps_a {
            p.eps_a = x;
        }
        let n = &mut cfg.numerics;
        if let Some(x) = flags.k {
            n.k = x;
        }
        if let Some(x) = flags.k_points {
            n.k_points = x;
        }
        if let Some(x) = flags.t_max {
            n.t_max = x;
        }
        if let Some(x) = flags.dt {
            n.dt = x;
        }
        if let Some(x) = flags.n_levels {
            n.n_levels = x;
        }
        if let Some(x) = flags.m_cells {
            n.m_cells = x;
        }
        if let Some(raw) = env_workers {
            let w = raw.trim().parse::<usize>().map_err(|_| {
                CliError::Config(format!(
                    "{WORKERS_ENV} must be a positive integer, got {raw:?}"
                ))
            })?;
            n.workers = Some(w);
        }
        if let Some(x) = flags.workers {
            n.workers = Some(x);
        }
        n.displacement |= flags.displacement;
        if let Some(x) = &flags.output {
            cfg.output.path = Some(x.clone());
        }
        if let Some(x) = flags.format {
            cfg.output.format = Some(x);
        }
        cfg.output.format = Some(cfg.format());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or(match self.command {
            Command::Winding => Format::Json,
            _ => Format::Csv,
        })
    }

    fn steps_in_time(&self) -> bool {
        match self.command {
            Command::Evolve | Command::Witness | Command::OracleCompare | Command::ChainCheck => {
                true
            }
            Command::Steady | Command::PhaseDiagram | Command::Winding => false,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        let p = &self.physics;
        let n = &self.numerics;
        if p.u.values().iter().any(|&u| u < 0.0) {
            return bad(format!("u must be >= 0, got {}", p.u));
        }
        if p.alpha.values().iter().any(|&a| a < 0.0) {
            return bad(format!("alpha must be >= 0, got {}", p.alpha));
        }
        if !(p.j > 0.0) || !p.j.is_finite() {
            return bad(format!("J must be > 0, got {}", p.j));
        }
        if p.delta.values().iter().any(|&d| !(d > 0.0)) {
            return bad(format!("Delta must be > 0, got {}", p.delta));
        }
        if !p.omega.is_finite() || !p.eps_a.is_finite() || !n.k.is_finite() {
            return bad("omega, eps_A and k must be finite".into());
        }
        if n.k_points == 0 {
            return bad("k_points must be >= 1".into());
        }
        if n.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        if self.steps_in_time() {
            if !(n.dt > 0.0) || !(n.t_max > 0.0) || !n.t_max.is_finite() {
                return bad(format!(
                    "need dt > 0 and t_max > 0, got {} and {}",
                    n.dt, n.t_max
                ));
            }
            let product = n.dt * p.delta.max();
            if product > MAX_STEP_BANDWIDTH {
                return bad(format!(
                    "dt*Delta = {product} exceeds {MAX_STEP_BANDWIDTH}; reduce dt"
                ));
            }
        }
        match self.command {
            Command::Winding => {}
            Command::PhaseDiagram => {
                p.delta.scalar("Delta")?;
            }
            Command::Witness => {
                p.u.scalar("u")?;
                p.alpha.scalar("alpha")?;
            }
            _ => {
                p.u.scalar("u")?;
                p.alpha.scalar("alpha")?;
                p.delta.scalar("Delta")?;
            }
        }
        Ok(())
    }
}
