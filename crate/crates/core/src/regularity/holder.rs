//! Empirical Hölder exponents and constants of computed solutions.

use super::cylinder::{oscillation, Cylinder};
use crate::error::{Error, Result};
use crate::grid::Trajectory;
use crate::numerics::fit_line;

/// Oscillations below this are treated as zero.
const FLAT_OSCILLATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HolderMode {
    Intrinsic { omega: f64, m: f64 },
    Classical { theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolderStatus {
    Fitted,
    /// Every oscillation vanished; there is nothing to fit.
    Flat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    /// Fitted exponent, clamped to `[0, 1]`.
    pub alpha_hat: f64,
    pub c_hat: f64,
    /// Largest deviation from the fitted line in log scale.
    pub fit_residual: f64,
    pub radii_used: Vec<f64>,
    /// Oscillation for every requested radius, in input order.
    pub oscillations: Vec<f64>,
    pub status: HolderStatus,
}

/// Fit `log osc(r) = log C + alpha log r` over the cylinders ending at
/// `(center, t0)`.
pub fn fit_holder_exponent(
    traj: &Trajectory,
    center: &[f64],
    t0: f64,
    radii: &[f64],
    mode: HolderMode,
) -> Result<HolderReport> {
    if radii.len() < 4 {
        return Err(Error::Precondition(format!("need at least 4 radii, got {}", radii.len())));
    }
    let mut oscillations = Vec::with_capacity(radii.len());
    for &r in radii {
        let cyl = match mode {
            HolderMode::Intrinsic { omega, m } => Cylinder::intrinsic(center, t0, r, omega, m)?,
            HolderMode::Classical { theta } => Cylinder::classical(center, t0, r, theta)?,
        };
        if !cyl.fits_in(traj) {
            return Err(Error::Precondition(format!("cylinder of radius {r} leaves the domain")));
        }
        oscillations.push(oscillation(traj, &cyl)?.essosc);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(&oscillations)
        .filter(|(_, &o)| o > FLAT_OSCILLATION)
        .map(|(&r, &o)| (r.ln(), o.ln()))
        .unzip();
    if xs.is_empty() {
        return Ok(HolderReport {
            alpha_hat: 0.0,
            c_hat: 0.0,
            fit_residual: 0.0,
            radii_used: Vec::new(),
            oscillations,
            status: HolderStatus::Flat,
        });
    }
    if xs.len() < 2 {
        return Err(Error::Fit("fewer than two radii with a non-zero oscillation".into()));
    }
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::Fit("degenerate radii".into()))?;
    Ok(HolderReport {
        alpha_hat: fit.slope.clamp(0.0, 1.0),
        c_hat: fit.intercept.exp(),
        fit_residual: fit.max_residual,
        radii_used: xs.iter().map(|x| x.exp()).collect(),
        oscillations,
        status: HolderStatus::Fitted,
    })
}

/// A compact box in space-time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl SpaceTimeBox {
    fn validate(&self, dim: usize) -> Result<()> {
        if self.lo.len() != dim || self.hi.len() != dim {
            return Err(Error::domain(format!("box needs {dim} spatial bounds")));
        }
        if self.lo.iter().zip(&self.hi).any(|(a, b)| !(a <= b)) || !(self.t_lo <= self.t_hi) {
            return Err(Error::domain("box bounds are not ordered"));
        }
        Ok(())
    }
}

/// `min(parabolic distance from the box to the lateral boundary and the
/// initial time, 1)`.
pub fn parabolic_distance(traj: &Trajectory, k: &SpaceTimeBox) -> Result<f64> {
    let grid = traj.grid();
    k.validate(grid.dim())?;
    let mut d = (k.t_lo - traj.t_start()).max(0.0).sqrt();
    for (axis, (&lo, &hi)) in k.lo.iter().zip(&k.hi).enumerate() {
        let a = grid.axis(axis);
        d = d.min(lo - a.lo).min(a.hi - hi);
    }
    if k.t_hi > traj.t_end() * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::domain("box extends past the end of the trajectory"));
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Largest sampled ratio `|u(p) - u(q)| / ((|x_p - x_q| + |t_p - t_q|^{1/2}) / d)^alpha`
/// over sample pairs in `k`, with `d` the clipped parabolic distance.
///
/// Pairs join every lattice point to its neighbours at dyadic index offsets
/// along each axis; base points are thinned with a fixed stride so that at
/// most about `pair_budget` pairs are compared.
pub fn holder_seminorm(traj: &Trajectory, k: &SpaceTimeBox, alpha: f64, pair_budget: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let d = parabolic_distance(traj, k)?;
    if d <= 0.0 {
        return Err(Error::domain("box touches the parabolic boundary"));
    }
    let grid = traj.grid();
    let dim = grid.dim();
    let axis_cells = |axis: usize| -> Vec<usize> {
        let a = grid.axis(axis);
        (0..a.cells)
            .filter(|&i| {
                let c = a.center(i);
                c >= k.lo[axis] && c <= k.hi[axis]
            })
            .collect()
    };
    let xs = axis_cells(0);
    let ys = if dim == 2 { axis_cells(1) } else { vec![0] };
    let snaps: Vec<usize> = traj
        .snapshots()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.t >= k.t_lo && s.t <= k.t_hi)
        .map(|(i, _)| i)
        .collect();
    if xs.is_empty() || ys.is_empty() || snaps.is_empty() {
        return Err(Error::EmptyCylinder);
    }
    let extents = [xs.len(), ys.len(), snaps.len()];
    let dyadic = |n: usize| -> Vec<isize> {
        let mut v = vec![0isize];
        let mut s = 1usize;
        while s < n {
            v.push(s as isize);
            s *= 2;
        }
        v
    };
    let signed = |n: usize| -> Vec<isize> {
        dyadic(n).into_iter().flat_map(|s| if s == 0 { vec![0] } else { vec![s, -s] }).collect()
    };
    let mut offsets = Vec::new();
    for &dx in &signed(extents[0]) {
        for &dy in &signed(extents[1]) {
            for &dt in &dyadic(extents[2]) {
                // each unordered pair once
                let key = (dt, dy, dx);
                if key > (0, 0, 0) {
                    offsets.push([dx, dy, dt]);
                }
            }
        }
    }
    let base_count = extents[0] * extents[1] * extents[2];
    let total = base_count * offsets.len().max(1);
    let stride = total.div_ceil(pair_budget.max(1)).max(1);
    let value = |p: [usize; 3]| {
        let snap = &traj.snapshots()[snaps[p[2]]];
        let idx = grid.index(xs[p[0]], ys[p[1]]);
        (snap.t, grid.center(idx), snap.field.values()[idx])
    };
    let mut best: f64 = 0.0;
    for b in (0..base_count).step_by(stride) {
        let p = [b % extents[0], (b / extents[0]) % extents[1], b / (extents[0] * extents[1])];
        let (tp, xp, up) = value(p);
        for off in &offsets {
            let mut q = [0usize; 3];
            let mut ok = true;
            for a in 0..3 {
                let v = p[a] as isize + off[a];
                if v < 0 || v >= extents[a] as isize {
                    ok = false;
                    break;
                }
                q[a] = v as usize;
            }
            if !ok {
                continue;
            }
            let (tq, xq, uq) = value(q);
            let dist = ((xp[0] - xq[0]).powi(2) + (xp[1] - xq[1]).powi(2)).sqrt() + (tp - tq).abs().sqrt();
            if dist <= 0.0 {
                continue;
            }
            best = best.max((up - uq).abs() / (dist / d).powf(alpha));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid};

    fn stationary(cells: usize, f: impl Fn(f64) -> f64) -> Trajectory {
        let g = Grid::line(0.0, 1.0, cells).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
        Trajectory::stationary(Field::from_fn(g, |x| f(x[0])), &times).unwrap()
    }

    fn radii() -> Vec<f64> {
        (0..9).map(|j| 1e-3 * 10f64.powf(j as f64 / 4.0)).collect()
    }

    #[test]
    fn square_root_cusp() {
        let traj = stationary(4001, |x| (x - 0.5).abs().sqrt().min(0.9));
        let r = fit_holder_exponent(&traj, &[0.5], 1.0, &radii(), HolderMode::Classical { theta: 1.0 }).unwrap();
        assert_eq!(r.status, HolderStatus::Fitted);
        assert!((0.45..=0.55).contains(&r.alpha_hat), "{}", r.alpha_hat);
    }

    #[test]
    fn smooth_profile_is_lipschitz() {
        let traj = stationary(4000, |x| 0.5 + 0.1 * x.sin());
        let r = fit_holder_exponent(&traj, &[0.5], 1.0, &radii(), HolderMode::Classical { theta: 1.0 }).unwrap();
        assert!(r.alpha_hat >= 0.95);
    }

    #[test]
    fn constant_profile_is_flat() {
        let traj = stationary(2001, |_| 0.3);
        let r = fit_holder_exponent(&traj, &[0.5], 1.0, &radii(), HolderMode::Intrinsic { omega: 0.5, m: 2.0 }).unwrap();
        assert_eq!(r.status, HolderStatus::Flat);
        assert_eq!((r.alpha_hat, r.c_hat), (0.0, 0.0));
        assert!(fit_holder_exponent(&traj, &[0.5], 1.0, &radii()[..3], HolderMode::Classical { theta: 1.0 }).is_err());
    }

    fn inner_box() -> SpaceTimeBox {
        SpaceTimeBox {
            lo: vec![0.25],
            hi: vec![0.75],
            t_lo: 0.5,
            t_hi: 1.0,
        }
    }

    #[test]
    fn ramp_seminorm() {
        let h = 1.0 / 200.0;
        let traj = stationary(200, |x| x);
        let s = holder_seminorm(&traj, &inner_box(), 1.0, 100_000).unwrap();
        assert!((s - 0.25).abs() <= 2.0 * h, "{s}");
    }

    #[test]
    fn constant_seminorm_vanishes() {
        let traj = stationary(50, |_| 0.4);
        assert_eq!(holder_seminorm(&traj, &inner_box(), 0.5, 1000).unwrap(), 0.0);
    }

    #[test]
    fn boundary_box_rejected() {
        let traj = stationary(50, |x| x);
        let k = SpaceTimeBox {
            lo: vec![0.0],
            ..inner_box()
        };
        assert!(holder_seminorm(&traj, &k, 0.5, 1000).is_err());
    }
}
