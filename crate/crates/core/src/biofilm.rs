//! The coupled biomass/nutrient system
//!
//! ```text
//! M_t = d2 ∇·(M^b/(1-M)^a ∇M) - K2 M + K3 C M/(K4 + C)
//! C_t = d1 ΔC - K1 C M/(K4 + C)
//! ```
//!
//! advanced by first-order splitting: each species takes an implicit
//! diffusion step with the reaction evaluated at the previous state.

use crate::error::{Error, Result};
use crate::grid::{Field, RunMonitor, Snapshot, Trajectory};
use crate::nonlinearity::Nonlinearity;
use crate::reaction::ReactionTerm;
use crate::solver::{self, BoundaryCondition, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiofilmParams {
    /// Nutrient diffusivity.
    pub d1: f64,
    /// Biomass diffusivity.
    pub d2: f64,
    /// Nutrient consumption rate.
    pub k1: f64,
    /// Biomass decay rate.
    pub k2: f64,
    /// Biomass growth rate.
    pub k3: f64,
    /// Monod half-saturation concentration.
    pub k4: f64,
    pub a: f64,
    pub b: f64,
}

impl BiofilmParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("d1", self.d1), ("d2", self.d2), ("K4", self.k4)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        let nonneg = [("K1", self.k1), ("K2", self.k2), ("K3", self.k3)];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.a >= 1.0) || !(self.b > 0.0) {
            return Err(Error::Validation(format!(
                "diffusion exponents need a >= 1 and b > 0, got a={}, b={}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// The biomass nonlinearity `d2 ∫₀^z s^b/(1-s)^a ds`.
    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        Nonlinearity::biofilm(self.a, self.b)?.with_scale(self.d2)
    }

    /// The biomass reaction `-K2 M + K3 C M/(K4 + C)`.
    pub fn biomass_reaction(&self) -> Result<ReactionTerm> {
        ReactionTerm::monod(self.k2, self.k3, self.k4)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiofilmState {
    pub biomass: Field,
    pub nutrient: Field,
    pub t: f64,
}

impl BiofilmState {
    pub fn new(biomass: Field, nutrient: Field, t: f64) -> Result<Self> {
        if biomass.grid() != nutrient.grid() {
            return Err(Error::domain("biomass and nutrient must share a grid"));
        }
        biomass.check_unit_range()?;
        if nutrient.values().iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(Error::domain("nutrient must be non-negative"));
        }
        Ok(BiofilmState {
            biomass,
            nutrient,
            t,
        })
    }
}

/// Per-step outcome of the coupled solver.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledStep {
    pub state: BiofilmState,
    pub newton_iterations: usize,
    pub clipped_upper: bool,
}

fn consumption(p: &BiofilmParams, m: &Field, c: &Field) -> Vec<f64> {
    m.values()
        .iter()
        .zip(c.values())
        .map(|(&mi, &ci)| {
            let ci = ci.max(0.0);
            -p.k1 * ci * mi / (p.k4 + ci)
        })
        .collect()
}

fn nutrient_step(
    s: &BiofilmState,
    p: &BiofilmParams,
    nutrient_bc: &[BoundaryCondition; 4],
    dt: f64,
) -> Result<Field> {
    let source = consumption(p, &s.biomass, &s.nutrient);
    let mut next = solver::implicit_heat_step(&s.nutrient, p.d1, nutrient_bc, dt, &source)?;
    for v in next.values_mut() {
        *v = v.max(0.0);
    }
    Ok(next)
}

/// One split step of length `cfg.dt`; both reactions read the pre-step state.
pub fn advance_coupled_step(
    s: &BiofilmState,
    p: &BiofilmParams,
    cfg: &SolverConfig,
    nutrient_bc: &[BoundaryCondition; 4],
) -> Result<CoupledStep> {
    p.validate()?;
    let nl = p.nonlinearity()?;
    let rt = p.biomass_reaction()?;
    let m_step =
        solver::advance_step_coupled(&s.biomass, &nl, &rt, cfg, s.t, cfg.dt, Some(&s.nutrient))?;
    let nutrient = nutrient_step(s, p, nutrient_bc, cfg.dt)?;
    Ok(CoupledStep {
        state: BiofilmState {
            biomass: m_step.field,
            nutrient,
            t: s.t + cfg.dt,
        },
        newton_iterations: m_step.iterations,
        clipped_upper: m_step.clipped_upper,
    })
}

/// Paired biomass and nutrient trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct BiofilmRun {
    pub biomass: Trajectory,
    pub nutrient: Trajectory,
}

impl BiofilmRun {
    pub fn monitor(&self) -> &RunMonitor {
        &self.biomass.monitor
    }
}

/// Integrate the coupled system over `[cfg.t_start, cfg.t_end]`.
pub fn run_biofilm(
    initial: &BiofilmState,
    p: &BiofilmParams,
    cfg: &SolverConfig,
    nutrient_bc: &[BoundaryCondition; 4],
) -> Result<BiofilmRun> {
    p.validate()?;
    cfg.validate()?;
    let nl = p.nonlinearity()?;
    let rt = p.biomass_reaction()?;
    let start = |f: &Field| {
        Trajectory::new(vec![Snapshot {
            t: cfg.t_start,
            field: f.clone(),
        }])
    };
    let mut m_traj = start(&initial.biomass)?;
    let mut c_traj = start(&initial.nutrient)?;
    let mut state = BiofilmState {
        t: cfg.t_start,
        ..initial.clone()
    };
    let mut monitor = RunMonitor::default();
    let schedule = solver::step_schedule(cfg);
    for (k, &(t, dt)) in schedule.iter().enumerate() {
        let biomass = solver::step_with_retry(
            &state.biomass,
            &nl,
            &rt,
            cfg,
            t,
            dt,
            Some(&state.nutrient),
            &mut monitor,
        )?;
        let nutrient = nutrient_step(&state, p, nutrient_bc, dt)?;
        state = BiofilmState {
            biomass,
            nutrient,
            t: t + dt,
        };
        m_traj.dt_history.push(dt);
        c_traj.dt_history.push(dt);
        if k + 1 == schedule.len() || (k + 1) % cfg.snapshot_every == 0 {
            m_traj.push(state.t, state.biomass.clone());
            c_traj.push(state.t, state.nutrient.clone());
        }
    }
    m_traj.monitor = monitor;
    Ok(BiofilmRun {
        biomass: m_traj,
        nutrient: c_traj,
    })
}

/// Cells where the biomass exceeds a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct BiofilmRegion {
    pub cells: Vec<usize>,
    pub measure: f64,
    /// Region cells with at least one grid neighbour outside the region.
    pub boundary: Vec<usize>,
}

impl BiofilmRegion {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// The set `{M > tol}` with its measure and its 4-neighbour boundary.
/// Cells on the domain edge are not boundary cells by virtue of the edge.
pub fn extract_biofilm_region(m: &Field, tol: f64) -> BiofilmRegion {
    let grid = m.grid();
    let (nx, ny) = grid.shape();
    let inside = |i: usize, j: usize| m.values()[j * nx + i] > tol;
    let mut cells = Vec::new();
    let mut boundary = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !inside(i, j) {
                continue;
            }
            let idx = j * nx + i;
            cells.push(idx);
            let mut neighbours = Vec::with_capacity(4);
            if i > 0 {
                neighbours.push((i - 1, j));
            }
            if i + 1 < nx {
                neighbours.push((i + 1, j));
            }
            if grid.dim() == 2 {
                if j > 0 {
                    neighbours.push((i, j - 1));
                }
                if j + 1 < ny {
                    neighbours.push((i, j + 1));
                }
            }
            if neighbours.iter().any(|&(a, b)| !inside(a, b)) {
                boundary.push(idx);
            }
        }
    }
    let measure = cells.len() as f64 * grid.cell_volume();
    BiofilmRegion {
        cells,
        measure,
        boundary,
    }
}
