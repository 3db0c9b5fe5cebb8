//! Backward-Euler solver for `u_t = Δφ(u) + f(·, u)` on cell-centred grids.
//!
//! Diffusion is the five-point (three-point in 1D) Laplacian of the cell
//! values of `φ(u)`, solved implicitly by damped Newton iteration; the
//! reaction is taken from the previous time level.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, RunMonitor, Trajectory};
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{self, max_abs};
use crate::reaction::{ReactionContext, ReactionTerm};

const MAX_HALVINGS: usize = 20;
const POLISH_STEPS: usize = 2;
const CG_REL_TOL: f64 = 1e-13;
const D_FLOOR: f64 = 1e-200;

/// Boundary condition on one side of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// Ghost value fixed to the given state.
    Dirichlet(f64),
    /// Zero flux (mirror ghost).
    Neumann,
}

/// Side order used by `SolverConfig::bc`.
pub const SIDE_NAMES: [&str; 4] = ["x_lo", "x_hi", "y_lo", "y_hi"];

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub t_start: f64,
    /// Per side, ordered `x_lo, x_hi, y_lo, y_hi`; the `y` entries are ignored in 1D.
    pub bc: [BoundaryCondition; 4],
    /// Bound on the max norm of the step residual.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Newton iterates are clipped to `[0, 1 - clip_delta]`.
    pub clip_delta: f64,
    pub snapshot_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            t_end: 1.0,
            t_start: 0.0,
            bc: [BoundaryCondition::Neumann; 4],
            newton_tol: 1e-10,
            newton_max_iter: 50,
            clip_delta: 1e-9,
            snapshot_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn with_bc(mut self, bc: BoundaryCondition) -> Self {
        self.bc = [bc; 4];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::Validation("t_end must exceed t_start".into()));
        }
        if self.dt > self.t_end - self.t_start + 1e-12 * self.t_end.abs() {
            return Err(Error::Validation("dt exceeds the simulated interval".into()));
        }
        if !(self.clip_delta > 0.0 && self.clip_delta < 1.0) {
            return Err(Error::Validation("clip_delta must lie in (0, 1)".into()));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(Error::Validation("Newton tolerance and iteration cap must be positive".into()));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Validation("snapshot_every must be at least 1".into()));
        }
        for (side, bc) in SIDE_NAMES.iter().zip(&self.bc) {
            if let BoundaryCondition::Dirichlet(g) = bc {
                if !(*g >= 0.0 && *g < 1.0) {
                    return Err(Error::Validation(format!(
                        "Dirichlet value on {side} must lie in [0, 1), got {g}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest state reachable inside Newton for a given nonlinearity.
    pub fn upper_clip(&self, nl: &Nonlinearity) -> f64 {
        (1.0 - self.clip_delta).min(nl.domain_cap())
    }
}

/// Outcome of one accepted time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub field: Field,
    pub iterations: usize,
    /// Residual max norm after each accepted Newton update, starting with the initial guess.
    pub residual_history: Vec<f64>,
    /// The accepted state touches the upper clipping bound somewhere.
    pub clipped_upper: bool,
}

impl StepReport {
    pub fn residual(&self) -> f64 {
        *self.residual_history.last().unwrap()
    }
}

/// `Σ_k (v_nb - v_i) / h_k²`, with Dirichlet ghosts taking `boundary[side]`
/// and Neumann ghosts mirroring the cell.
pub(crate) fn apply_laplacian(
    grid: &Grid,
    bc: &[BoundaryCondition; 4],
    boundary: &[f64; 4],
    v: &[f64],
    out: &mut [f64],
) {
    let (nx, ny) = grid.shape();
    let rx = 1.0 / (grid.h(0) * grid.h(0));
    let ry = if grid.dim() == 2 {
        1.0 / (grid.h(1) * grid.h(1))
    } else {
        0.0
    };
    let side = |s: usize, c: f64, r: f64| match bc[s] {
        BoundaryCondition::Dirichlet(_) => r * (boundary[s] - c),
        BoundaryCondition::Neumann => 0.0,
    };
    for j in 0..ny {
        for i in 0..nx {
            let idx = j * nx + i;
            let c = v[idx];
            let mut acc = if i > 0 { rx * (v[idx - 1] - c) } else { side(0, c, rx) };
            acc += if i + 1 < nx { rx * (v[idx + 1] - c) } else { side(1, c, rx) };
            if grid.dim() == 2 {
                acc += if j > 0 { ry * (v[idx - nx] - c) } else { side(2, c, ry) };
                acc += if j + 1 < ny { ry * (v[idx + nx] - c) } else { side(3, c, ry) };
            }
            out[idx] = acc;
        }
    }
}

/// Diagonal of the homogeneous Laplacian (non-positive).
fn laplacian_diagonal(grid: &Grid, bc: &[BoundaryCondition; 4]) -> Vec<f64> {
    let (nx, ny) = grid.shape();
    let rx = 1.0 / (grid.h(0) * grid.h(0));
    let ry = if grid.dim() == 2 {
        1.0 / (grid.h(1) * grid.h(1))
    } else {
        0.0
    };
    let dir = |s: usize| matches!(bc[s], BoundaryCondition::Dirichlet(_));
    let mut out = vec![0.0; grid.len()];
    for j in 0..ny {
        for i in 0..nx {
            let mut d = 0.0;
            d += if i > 0 || dir(0) { rx } else { 0.0 };
            d += if i + 1 < nx || dir(1) { rx } else { 0.0 };
            if grid.dim() == 2 {
                d += if j > 0 || dir(2) { ry } else { 0.0 };
                d += if j + 1 < ny || dir(3) { ry } else { 0.0 };
            }
            out[j * nx + i] = -d;
        }
    }
    out
}

/// Solve `(I - dt·A·diag(d)) x = b`, `A` the homogeneous Laplacian.
fn solve_scaled_diffusion(
    grid: &Grid,
    bc: &[BoundaryCondition; 4],
    d: &[f64],
    dt: f64,
    b: &[f64],
) -> Vec<f64> {
    if grid.dim() == 1 {
        let n = grid.len();
        let r = dt / (grid.h(0) * grid.h(0));
        let lap_diag = laplacian_diagonal(grid, bc);
        let diag: Vec<f64> = (0..n).map(|i| 1.0 - dt * lap_diag[i] * d[i]).collect();
        let lower: Vec<f64> = (0..n).map(|i| if i > 0 { -r * d[i - 1] } else { 0.0 }).collect();
        let upper: Vec<f64> = (0..n)
            .map(|i| if i + 1 < n { -r * d[i + 1] } else { 0.0 })
            .collect();
        return numerics::solve_tridiagonal(&lower, &diag, &upper, b);
    }
    // Non-symmetric in δ; symmetric positive definite in q = diag(d)·δ.
    let inv_d: Vec<f64> = d.iter().map(|&x| 1.0 / x.max(D_FLOOR)).collect();
    let lap_diag = laplacian_diagonal(grid, bc);
    let precond: Vec<f64> = inv_d.iter().zip(&lap_diag).map(|(a, l)| a - dt * l).collect();
    let zero = [0.0; 4];
    let n = grid.len();
    let apply = |q: &[f64], out: &mut [f64]| {
        apply_laplacian(grid, bc, &zero, q, out);
        for i in 0..n {
            out[i] = inv_d[i] * q[i] - dt * out[i];
        }
    };
    let (q, _) = numerics::conjugate_gradient(apply, &precond, b, CG_REL_TOL, 20 * n + 100);
    let mut lap_q = vec![0.0; n];
    apply_laplacian(grid, bc, &zero, &q, &mut lap_q);
    b.iter().zip(&lap_q).map(|(bi, lq)| bi + dt * lq).collect()
}

/// One implicit step of the linear equation `c_t = κΔc + source`.
pub fn implicit_heat_step(
    c: &Field,
    diffusivity: f64,
    bc: &[BoundaryCondition; 4],
    dt: f64,
    source: &[f64],
) -> Result<Field> {
    if !(diffusivity > 0.0) {
        return Err(Error::domain("diffusivity must be positive"));
    }
    let grid = c.grid();
    let n = grid.len();
    // Boundary data enters the right-hand side: A_full c = A c + boundary terms.
    let mut boundary = [0.0; 4];
    for (s, b) in bc.iter().enumerate() {
        if let BoundaryCondition::Dirichlet(g) = b {
            boundary[s] = *g;
        }
    }
    let zeros = vec![0.0; n];
    let mut lifted = vec![0.0; n];
    apply_laplacian(grid, bc, &boundary, &zeros, &mut lifted);
    let rhs: Vec<f64> = (0..n)
        .map(|i| c.values()[i] + dt * source[i] + dt * diffusivity * lifted[i])
        .collect();
    let d = vec![diffusivity; n];
    let next = solve_scaled_diffusion(grid, bc, &d, dt, &rhs);
    Field::new(grid.clone(), next)
}

struct StepProblem<'a> {
    grid: &'a Grid,
    nl: &'a Nonlinearity,
    bc: [BoundaryCondition; 4],
    ghost_phi: [f64; 4],
    old: &'a [f64],
    reaction: Vec<f64>,
    dt: f64,
    cap: f64,
}

impl StepProblem<'_> {
    fn residual(&self, w: &[f64], phi: &mut [f64], out: &mut [f64]) {
        for (p, &x) in phi.iter_mut().zip(w) {
            *p = self.nl.phi_unchecked(x);
        }
        apply_laplacian(self.grid, &self.bc, &self.ghost_phi, phi, out);
        for i in 0..w.len() {
            out[i] = w[i] - self.old[i] - self.dt * out[i] - self.dt * self.reaction[i];
        }
    }

    fn newton_direction(&self, w: &[f64], f: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = w.iter().map(|&x| self.nl.phi_prime_unchecked(x)).collect();
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        solve_scaled_diffusion(self.grid, &self.bc, &d, self.dt, &rhs)
    }

    fn clip(&self, x: f64) -> f64 {
        x.clamp(0.0, self.cap)
    }
}

fn check_input(u: &Field, nl: &Nonlinearity, cfg: &SolverConfig) -> Result<f64> {
    u.check_unit_range()?;
    let cap = cfg.upper_clip(nl);
    if u.max() > nl.domain_cap() {
        return Err(Error::domain(format!(
            "state {} exceeds the nonlinearity's domain cap {}",
            u.max(),
            nl.domain_cap()
        )));
    }
    for bc in &cfg.bc[..2 * u.grid().dim()] {
        if let BoundaryCondition::Dirichlet(g) = bc {
            if *g > cap {
                return Err(Error::domain(format!("Dirichlet value {g} exceeds the clip bound {cap}")));
            }
        }
    }
    Ok(cap)
}

/// Advance `u` from `t` to `t + cfg.dt`.
pub fn advance_step(
    u: &Field,
    nl: &Nonlinearity,
    rt: &ReactionTerm,
    cfg: &SolverConfig,
    t: f64,
) -> Result<StepReport> {
    advance_step_coupled(u, nl, rt, cfg, t, cfg.dt, None)
}

/// Like [`advance_step`] with an explicit step size and an optional companion
/// concentration field read by the Monod reaction.
pub fn advance_step_coupled(
    u: &Field,
    nl: &Nonlinearity,
    rt: &ReactionTerm,
    cfg: &SolverConfig,
    t: f64,
    dt: f64,
    concentration: Option<&Field>,
) -> Result<StepReport> {
    let cap = check_input(u, nl, cfg)?;
    let grid = u.grid();
    if let Some(c) = concentration {
        if c.grid() != grid {
            return Err(Error::domain("concentration field lives on a different grid"));
        }
    }
    let n = grid.len();
    let dim = grid.dim();
    let old = u.values();
    let reaction: Vec<f64> = (0..n)
        .map(|idx| {
            let center = grid.center(idx);
            let ctx = ReactionContext {
                x: &center[..dim],
                t,
                concentration: concentration.map(|c| c.values()[idx]),
            };
            rt.eval_unchecked(ctx, old[idx])
        })
        .collect();
    let mut ghost_phi = [0.0; 4];
    for (s, b) in cfg.bc.iter().enumerate() {
        if let BoundaryCondition::Dirichlet(g) = b {
            ghost_phi[s] = nl.phi_unchecked(*g);
        }
    }
    let problem = StepProblem {
        grid,
        nl,
        bc: cfg.bc,
        ghost_phi,
        old,
        reaction,
        dt,
        cap,
    };

    let mut w: Vec<f64> = old.iter().map(|&x| problem.clip(x)).collect();
    let mut phi = vec![0.0; n];
    let mut f = vec![0.0; n];
    problem.residual(&w, &mut phi, &mut f);
    let mut norm = max_abs(&f);
    let mut history = vec![norm];
    let mut iterations = 0;
    let mut trial = vec![0.0; n];
    let mut f_trial = vec![0.0; n];

    while norm > cfg.newton_tol {
        if iterations >= cfg.newton_max_iter {
            return Err(Error::NewtonDivergence {
                iterations,
                residual: norm,
            });
        }
        let delta = problem.newton_direction(&w, &f);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            for i in 0..n {
                trial[i] = problem.clip(w[i] + lambda * delta[i]);
            }
            problem.residual(&trial, &mut phi, &mut f_trial);
            let trial_norm = max_abs(&f_trial);
            if trial_norm < norm {
                std::mem::swap(&mut w, &mut trial);
                std::mem::swap(&mut f, &mut f_trial);
                norm = trial_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        iterations += 1;
        if !accepted {
            return Err(Error::NewtonDivergence {
                iterations,
                residual: norm,
            });
        }
        history.push(norm);
    }

    // A few undamped updates past the tolerance drive the residual to
    // round-off, which keeps long runs conservative.
    for _ in 0..POLISH_STEPS {
        if norm == 0.0 {
            break;
        }
        let delta = problem.newton_direction(&w, &f);
        for i in 0..n {
            trial[i] = problem.clip(w[i] + delta[i]);
        }
        problem.residual(&trial, &mut phi, &mut f_trial);
        let trial_norm = max_abs(&f_trial);
        if trial_norm >= norm {
            break;
        }
        std::mem::swap(&mut w, &mut trial);
        std::mem::swap(&mut f, &mut f_trial);
        norm = trial_norm;
        history.push(norm);
    }

    let clipped_upper = w.iter().any(|&x| x >= cap);
    Ok(StepReport {
        field: Field::new(grid.clone(), w)?,
        iterations,
        residual_history: history,
        clipped_upper,
    })
}

/// Step times `t_start + k·dt`, with the last step shortened to land on `t_end`.
pub(crate) fn step_schedule(cfg: &SolverConfig) -> Vec<(f64, f64)> {
    let span = cfg.t_end - cfg.t_start;
    let steps = ((span / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    (0..steps)
        .map(|k| {
            let t0 = cfg.t_start + k as f64 * cfg.dt;
            let t1 = if k + 1 == steps {
                cfg.t_end
            } else {
                cfg.t_start + (k + 1) as f64 * cfg.dt
            };
            (t0, t1 - t0)
        })
        .collect()
}

/// Advance with one retry as two half steps when Newton fails.
pub(crate) fn step_with_retry(
    u: &Field,
    nl: &Nonlinearity,
    rt: &ReactionTerm,
    cfg: &SolverConfig,
    t: f64,
    dt: f64,
    concentration: Option<&Field>,
    monitor: &mut RunMonitor,
) -> Result<Field> {
    let record = |r: &StepReport, monitor: &mut RunMonitor| {
        monitor.newton_iterations += r.iterations;
        monitor.max_newton_iterations = monitor.max_newton_iterations.max(r.iterations);
    };
    match advance_step_coupled(u, nl, rt, cfg, t, dt, concentration) {
        Ok(r) => {
            record(&r, monitor);
            monitor.steps += 1;
            if r.clipped_upper {
                monitor.upper_clip_steps += 1;
            }
            Ok(r.field)
        }
        Err(Error::NewtonDivergence { .. }) => {
            monitor.retries += 1;
            let half = 0.5 * dt;
            let first = advance_step_coupled(u, nl, rt, cfg, t, half, concentration)?;
            record(&first, monitor);
            let second =
                advance_step_coupled(&first.field, nl, rt, cfg, t + half, half, concentration)?;
            record(&second, monitor);
            monitor.steps += 1;
            if second.clipped_upper {
                monitor.upper_clip_steps += 1;
            }
            Ok(second.field)
        }
        Err(e) => Err(e),
    }
}

/// Integrate from `cfg.t_start` to `cfg.t_end`, keeping every
/// `snapshot_every`-th state, the initial and the final one.
pub fn run_simulation(
    u0: &Field,
    nl: &Nonlinearity,
    rt: &ReactionTerm,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_input(u0, nl, cfg)?;
    let mut traj = Trajectory::new(vec![crate::grid::Snapshot {
        t: cfg.t_start,
        field: u0.clone(),
    }])?;
    let schedule = step_schedule(cfg);
    let mut u = u0.clone();
    let mut monitor = RunMonitor::default();
    for (k, &(t, dt)) in schedule.iter().enumerate() {
        u = step_with_retry(&u, nl, rt, cfg, t, dt, None, &mut monitor)?;
        traj.dt_history.push(dt);
        let last = k + 1 == schedule.len();
        if last || (k + 1) % cfg.snapshot_every == 0 {
            traj.push(t + dt, u.clone());
        }
    }
    traj.monitor = monitor;
    Ok(traj)
}

/// `Σ u_i · |cell|`.
pub fn total_mass(u: &Field) -> f64 {
    u.values().iter().sum::<f64>() * u.grid().cell_volume()
}
