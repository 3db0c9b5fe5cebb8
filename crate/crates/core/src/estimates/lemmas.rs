//! The parabolic embedding, the truncated Poincaré inequality and fast
//! geometric convergence, evaluated on discrete data.

use super::energy::{ball_cells, cell_gradient};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Trajectory};

/// Squared forward-difference gradient of `w`, summed over interior faces
/// and weighted by the cell volume.
fn dirichlet_energy(grid: &Grid, w: &[f64]) -> f64 {
    let (nx, ny) = grid.shape();
    let vol = grid.cell_volume();
    let mut sum = 0.0;
    let hx = grid.h(0);
    for j in 0..ny {
        for i in 0..nx - 1 {
            let d = (w[grid.index(i + 1, j)] - w[grid.index(i, j)]) / hx;
            sum += d * d * vol;
        }
    }
    if grid.dim() == 2 {
        let hy = grid.h(1);
        for j in 0..ny - 1 {
            for i in 0..nx {
                let d = (w[grid.index(i, j + 1)] - w[grid.index(i, j)]) / hy;
                sum += d * d * vol;
            }
        }
    }
    sum
}

/// `‖w‖_{L²} / (|[w ≠ 0]|^{1/(N+2)} ‖w‖_V)` with
/// `‖w‖_V = sup_t ‖w(t)‖_{L²} + ‖∇w‖_{L²}`.
///
/// Time integrals weight each snapshot after the first with the step that
/// ends at it.
pub fn v2_embedding_ratio(w: &Trajectory) -> Result<f64> {
    let grid = w.grid();
    let vol = grid.cell_volume();
    let snaps = w.snapshots();
    let mut l2 = 0.0;
    let mut grad = 0.0;
    let mut sup: f64 = 0.0;
    let mut support = 0.0;
    for (k, s) in snaps.iter().enumerate() {
        let v = s.field.values();
        let slice: f64 = v.iter().map(|x| x * x * vol).sum();
        sup = sup.max(slice.sqrt());
        if k == 0 {
            continue;
        }
        let dt = s.t - snaps[k - 1].t;
        l2 += slice * dt;
        grad += dirichlet_energy(grid, v) * dt;
        support += v.iter().filter(|x| **x != 0.0).count() as f64 * vol * dt;
    }
    if l2 == 0.0 || sup == 0.0 {
        return Err(Error::ZeroField);
    }
    let n = grid.dim() as f64;
    Ok(l2.sqrt() / (support.powf(1.0 / (n + 2.0)) * (sup + grad.sqrt())))
}

/// `(l - k) |B ∩ [w > l]|^{1 - 1/N}` over `(R^N / |B ∩ [w <= k]|) ∫_{B ∩ [k <= w < l]} |∇w|`.
pub fn poincare_ratio(w: &Field, center: &[f64], radius: f64, k: f64, l: f64) -> Result<f64> {
    if !(l > k) {
        return Err(Error::domain(format!("need l > k, got k={k}, l={l}")));
    }
    let grid = w.grid();
    if center.len() != grid.dim() || !(radius > 0.0) {
        return Err(Error::domain("ball does not match the field"));
    }
    let cells = ball_cells(grid, center, radius);
    let vol = grid.cell_volume();
    let v = w.values();
    let (mut above, mut below, mut grad) = (0.0, 0.0, 0.0);
    for &idx in &cells {
        let x = v[idx];
        if x > l {
            above += vol;
        }
        if x <= k {
            below += vol;
        }
        if x >= k && x < l {
            let g = cell_gradient(grid, v, idx);
            grad += g[0].hypot(g[1]) * vol;
        }
    }
    if below == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    if above == 0.0 {
        return Ok(0.0);
    }
    let n = grid.dim() as f64;
    let lhs = (l - k) * above.powf(1.0 - 1.0 / n);
    let rhs = radius.powf(n) / below * grad;
    Ok(if rhs > 0.0 { lhs / rhs } else { f64::INFINITY })
}

/// The extremal sequence `y_{n+1} = C b^n y_n^{1+a}` against the bound
/// `theta b^{-n/a}`, `theta = C^{-1/a} b^{-1/a²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricSequence {
    pub theta: f64,
    pub values: Vec<f64>,
    pub bounds: Vec<f64>,
    /// `y0 <= theta`.
    pub hypothesis_holds: bool,
    /// The hypothesis fails or every term respects its bound.
    pub verdict: bool,
}

pub fn fast_geometric_bound(c: f64, b: f64, a: f64, y0: f64, n_max: usize) -> Result<GeometricSequence> {
    if !(c > 0.0) || !(b > 1.0) || !(a > 0.0 && a < 1.0) || !(y0 >= 0.0) || n_max < 1 {
        return Err(Error::domain(format!(
            "need C > 0, b > 1, 0 < a < 1, y0 >= 0 and n_max >= 1, got C={c}, b={b}, a={a}, y0={y0}, n_max={n_max}"
        )));
    }
    let theta = c.powf(-1.0 / a) * b.powf(-1.0 / (a * a));
    let mut values = Vec::with_capacity(n_max + 1);
    let mut bounds = Vec::with_capacity(n_max + 1);
    let mut y = y0;
    for n in 0..=n_max {
        values.push(y);
        bounds.push(theta * b.powf(-(n as f64) / a));
        y = c * b.powi(n as i32) * y.powf(1.0 + a);
    }
    let hypothesis_holds = y0 <= theta;
    let within = values.iter().zip(&bounds).all(|(y, bd)| *y <= bd * (1.0 + 1e-12));
    Ok(GeometricSequence {
        theta,
        values,
        bounds,
        hypothesis_holds,
        verdict: !hypothesis_holds || within,
    })
}
