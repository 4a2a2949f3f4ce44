//! Exact single-excitation references by dense diagonalization.
//!
//! All Hamiltonians here are real symmetric: at fixed k the phase of `v(k)`
//! is absorbed into the `A` (or `B`) basis state, leaving `|v(k)|`. Only
//! `|ψ_A|²` and occupations are reported, which are gauge invariant.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::gme::{KTrace, RHO0};
use crate::model::{phase_derivative_unchecked, KGrid, WalkParams};
use crate::swt::{DiscreteReservoir, ReducedModel};

/// Largest dense eigenproblem the oracles will attempt.
pub const DIMENSION_BUDGET: usize = 4000;
/// Minimum level spacing for the long-time average formula.
pub const DEGENERACY_GAP: f64 = 1e-10;
/// Boundary-cell occupation that invalidates a chain run.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Eigenvalues and the overlaps `c_n = |⟨A|n⟩|²` of the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSpectrum {
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ExactSpectrum {
    /// Diagonalizes `h`; the initial state is basis vector 0.
    pub fn from_hamiltonian(h: DMatrix<f64>) -> Result<Self> {
        check_budget(h.nrows())?;
        let eig = SymmetricEigen::new(h);
        let mut pairs: Vec<(f64, f64)> = eig
            .eigenvalues
            .iter()
            .zip(eig.eigenvectors.row(0).iter())
            .map(|(&e, &c)| (e, c * c))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (energies, weights) = pairs.into_iter().unzip();
        Ok(Self { energies, weights })
    }

    /// `ψ_A(t) = Σ_n c_n e^{-i E_n t}`.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(&e, &c)| c * Complex64::from_polar(1.0, -e * t))
            .sum()
    }

    pub fn rho_a(&self, t: f64) -> f64 {
        RHO0 * self.amplitude(t).norm_sqr()
    }

    pub fn evolve(&self, k: Option<f64>, times: &[f64]) -> KTrace {
        KTrace::new(
            k,
            times.to_vec(),
            times.iter().map(|&t| self.rho_a(t)).collect(),
        )
    }

    pub fn min_gap(&self) -> f64 {
        self.energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_budget(dim: usize) -> Result<()> {
    if dim > DIMENSION_BUDGET {
        return Err(Error::DimensionBudget {
            dim,
            budget: DIMENSION_BUDGET,
        });
    }
    Ok(())
}

/// Reduced `(N+1)`-level Hamiltonian at `|v(k)|²`; `A` is index 0.
pub fn reduced_hamiltonian(model: &ReducedModel, vk2: f64, include_cross: bool) -> DMatrix<f64> {
    let n = model.n_levels();
    let vk = vk2.sqrt();
    let mut h = DMatrix::zeros(n + 1, n + 1);
    h[(0, 0)] = model.eps_a_tilde;
    for j in 0..n {
        let eta = vk * model.eta_base[j];
        h[(0, j + 1)] = eta;
        h[(j + 1, 0)] = eta;
        h[(j + 1, j + 1)] = model.eps_tilde[j];
    }
    if include_cross {
        for j in 0..n {
            for jp in 0..n {
                if j != jp {
                    h[(j + 1, jp + 1)] = model.t_cross[(j, jp)];
                }
            }
        }
    }
    h
}

pub fn spectrum_reduced(
    model: &ReducedModel,
    vk2: f64,
    include_cross: bool,
) -> Result<ExactSpectrum> {
    check_budget(model.n_levels() + 1)?;
    ExactSpectrum::from_hamiltonian(reduced_hamiltonian(model, vk2, include_cross))
}

/// Exact `ρ_A(k, t)` of the reduced model without level-level couplings.
pub fn exact_evolve_reduced(model: &ReducedModel, vk2: f64, times: &[f64]) -> Result<KTrace> {
    Ok(spectrum_reduced(model, vk2, false)?.evolve(None, times))
}

/// `(1/2π) Σ_n c_n²`, the infinite-time average of the exact trace.
pub fn exact_longtime_average(spectrum: &ExactSpectrum) -> Result<f64> {
    let gap = spectrum.min_gap();
    if gap < DEGENERACY_GAP {
        return Err(Error::DegenerateSpectrum { gap });
    }
    Ok(RHO0 * spectrum.weights.iter().map(|c| c * c).sum::<f64>())
}

/// Three-band Hamiltonian at k: `A` (0), `B` (1), reservoir levels (2..).
pub fn full_hamiltonian(params: &WalkParams, raw: &DiscreteReservoir, k: f64) -> DMatrix<f64> {
    let n = raw.n_levels();
    let mut h = DMatrix::zeros(n + 2, n + 2);
    let vk = params.vk2(k).max(0.0).sqrt();
    h[(0, 0)] = params.eps_a;
    h[(1, 1)] = params.eps_a + params.omega;
    h[(0, 1)] = vk;
    h[(1, 0)] = vk;
    for j in 0..n {
        h[(1, j + 2)] = raw.g[j];
        h[(j + 2, 1)] = raw.g[j];
        h[(j + 2, j + 2)] = raw.eps[j];
    }
    h
}

pub fn spectrum_full(
    params: &WalkParams,
    raw: &DiscreteReservoir,
    k: f64,
) -> Result<ExactSpectrum> {
    params.validate()?;
    check_budget(raw.n_levels() + 2)?;
    ExactSpectrum::from_hamiltonian(full_hamiltonian(params, raw, k))
}

/// Exact `ρ_A(k, t)` with the `B` site kept explicitly.
pub fn exact_evolve_full(
    params: &WalkParams,
    raw: &DiscreteReservoir,
    k: f64,
    times: &[f64],
) -> Result<KTrace> {
    Ok(spectrum_full(params, raw, k)?.evolve(Some(k), times))
}

/// Open chain of `m_cells` unit cells, each with `A`, `B` and a copy of
/// the reservoir. Cell index `m` runs over `-(M-1)/2 ..= (M-1)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    pub m_cells: usize,
    pub params: WalkParams,
    pub reservoir: DiscreteReservoir,
}

/// Real-space evolution of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub times: Vec<f64>,
    /// Cell labels `m`, in storage order.
    pub cells: Vec<i64>,
    /// `ρ_Ām(t)`: occupation of `B_m` plus reservoir `m`, indexed `[t][cell]`.
    pub rho_bar: Vec<Vec<f64>>,
    /// `⟨m(t)⟩ = Σ_m m ρ_Ām(t)`.
    pub mean_m: Vec<f64>,
    /// Total probability, for unitarity checks.
    pub norm: Vec<f64>,
}

impl ChainModel {
    pub fn new(m_cells: usize, params: WalkParams, reservoir: DiscreteReservoir) -> Result<Self> {
        params.validate()?;
        if m_cells == 0 || m_cells.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "chain needs an odd number of cells, got {m_cells}"
            )));
        }
        let chain = Self {
            m_cells,
            params,
            reservoir,
        };
        check_budget(chain.dim())?;
        Ok(chain)
    }

    pub fn cell_size(&self) -> usize {
        2 + self.reservoir.n_levels()
    }

    pub fn dim(&self) -> usize {
        self.m_cells * self.cell_size()
    }

    /// Storage index of the cell with label 0.
    pub fn center(&self) -> usize {
        self.m_cells / 2
    }

    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let p = &self.params;
        let cs = self.cell_size();
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        let mut link = |a: usize, b: usize, x: f64| {
            h[(a, b)] = x;
            h[(b, a)] = x;
        };
        for c in 0..self.m_cells {
            let a = c * cs;
            let b = a + 1;
            link(a, b, p.v);
            if c + 1 < self.m_cells {
                link(a, b + cs, p.u * p.v);
            }
            for (j, &g) in self.reservoir.g.iter().enumerate() {
                link(b, b + 1 + j, g);
            }
        }
        for c in 0..self.m_cells {
            let a = c * cs;
            h[(a, a)] = p.eps_a;
            h[(a + 1, a + 1)] = p.eps_a + p.omega;
            for (j, &e) in self.reservoir.eps.iter().enumerate() {
                h[(a + 2 + j, a + 2 + j)] = e;
            }
        }
        h
    }
}

/// Exact evolution of the chain from `|A, m = 0⟩`.
///
/// Fails with [`Error::BoundaryReached`] if either end cell holds more than
/// [`BOUNDARY_TOL`] at any requested time.
pub fn exact_evolve_chain(chain: &ChainModel, times: &[f64]) -> Result<ChainTrace> {
    check_budget(chain.dim())?;
    let cs = chain.cell_size();
    let eig = SymmetricEigen::new(chain.hamiltonian());
    let start = chain.center() * cs;
    let overlap: DVector<f64> = eig.eigenvectors.row(start).transpose();
    let half = chain.center() as i64;
    let cells: Vec<i64> = (0..chain.m_cells as i64).map(|c| c - half).collect();
    let d = chain.dim();

    let mut rho_bar = Vec::with_capacity(times.len());
    let mut mean_m = Vec::with_capacity(times.len());
    let mut norm = Vec::with_capacity(times.len());
    let mut coeff_re = DVector::zeros(d);
    let mut coeff_im = DVector::zeros(d);
    for &t in times {
        for n in 0..d {
            let (s, c) = (-eig.eigenvalues[n] * t).sin_cos();
            coeff_re[n] = overlap[n] * c;
            coeff_im[n] = overlap[n] * s;
        }
        let psi_re = &eig.eigenvectors * &coeff_re;
        let psi_im = &eig.eigenvectors * &coeff_im;
        let prob: Vec<f64> = (0..d)
            .map(|i| psi_re[i] * psi_re[i] + psi_im[i] * psi_im[i])
            .collect();

        let cell_total = |c: usize| prob[c * cs..(c + 1) * cs].iter().sum::<f64>();
        let edge = cell_total(0).max(cell_total(chain.m_cells - 1));
        if chain.m_cells > 1 && edge > BOUNDARY_TOL {
            return Err(Error::BoundaryReached {
                time: t,
                occupation: edge,
            });
        }
        let row: Vec<f64> = (0..chain.m_cells)
            .map(|c| prob[c * cs + 1..(c + 1) * cs].iter().sum())
            .collect();
        mean_m.push(cells.iter().zip(&row).map(|(&m, &r)| m as f64 * r).sum());
        norm.push(prob.iter().sum());
        rho_bar.push(row);
    }
    Ok(ChainTrace {
        times: times.to_vec(),
        cells,
        rho_bar,
        mean_m,
        norm,
    })
}

/// `⟨m(t)⟩` from the zone formula with exact full-model traces per k.
///
/// This is the k-space counterpart of [`exact_evolve_chain`] on the same
/// discrete reservoir.
pub fn kspace_displacement_full(
    params: &WalkParams,
    raw: &DiscreteReservoir,
    kgrid: &KGrid,
    times: &[f64],
    exec: Execution,
) -> Result<Vec<f64>> {
    if params.is_degenerate() {
        return Err(Error::DegenerateRatio);
    }
    let traces = exec::try_map_ordered(exec, kgrid.points(), |&k| {
        exact_evolve_full(params, raw, k, times)
    })?;
    let w = kgrid.weight();
    Ok((0..times.len())
        .map(|i| {
            kgrid
                .points()
                .iter()
                .zip(&traces)
                .map(|(&k, tr)| w * phase_derivative_unchecked(params.u, k) * tr.rho_bar(i))
                .sum()
        })
        .collect())
}
