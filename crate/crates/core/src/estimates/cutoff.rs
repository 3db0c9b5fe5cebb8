//! Smooth cut-off functions supported in a cylinder.

use crate::error::{Error, Result};
use crate::grid::Trajectory;
use crate::regularity::Cylinder;

/// Quintic smoothstep `x³(10 - 15x + 6x²)` and its first two derivatives.
fn smoothstep(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
    let ds = 30.0 * x * x * (1.0 - x) * (1.0 - x);
    let dds = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    (s, ds, dds)
}

/// Sup-norms of the cut-off derivatives over the sampled points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CutoffBounds {
    pub gradient: f64,
    pub laplacian: f64,
    pub time: f64,
}

/// Values of a cut-off and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSample {
    pub value: f64,
    pub gradient: [f64; 2],
    pub laplacian: f64,
    pub time: f64,
}

/// `zeta(x, t) = g(|x - x0|) h(t)`: `g` is one on the ball of radius
/// `p R` and vanishes outside `B_R`; `h` rises from zero at the bottom of
/// the cylinder to one after the fraction `1 - p` of its depth.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSpec {
    pub support: Cylinder,
    pub plateau: f64,
    /// False for a cut-off that does not depend on time.
    pub temporal: bool,
    pub bounds: CutoffBounds,
}

impl CutoffSpec {
    pub const DEFAULT_PLATEAU: f64 = 0.5;

    /// Space-time cut-off, with derivative bounds taken over the samples of `traj`.
    pub fn new(support: Cylinder, plateau: f64, traj: &Trajectory) -> Result<Self> {
        Self::build(support, plateau, true, traj)
    }

    /// Time-independent cut-off.
    pub fn spatial(support: Cylinder, plateau: f64, traj: &Trajectory) -> Result<Self> {
        Self::build(support, plateau, false, traj)
    }

    fn build(support: Cylinder, plateau: f64, temporal: bool, traj: &Trajectory) -> Result<Self> {
        if !(plateau > 0.0 && plateau < 1.0) {
            return Err(Error::domain(format!("plateau fraction must lie in (0, 1), got {plateau}")));
        }
        if support.center.len() != traj.grid().dim() {
            return Err(Error::domain("cut-off and trajectory dimensions differ"));
        }
        let mut spec = CutoffSpec {
            support,
            plateau,
            temporal,
            bounds: CutoffBounds::default(),
        };
        let grid = traj.grid();
        let mut b = CutoffBounds::default();
        for snap in traj.snapshots() {
            for idx in 0..grid.len() {
                let c = grid.center(idx);
                let s = spec.sample(&c[..grid.dim()], snap.t);
                b.gradient = b.gradient.max(s.gradient[0].hypot(s.gradient[1]));
                b.laplacian = b.laplacian.max(s.laplacian.abs());
                b.time = b.time.max(s.time.abs());
            }
        }
        spec.bounds = b;
        Ok(spec)
    }

    fn radial(&self, r: f64) -> (f64, f64, f64) {
        let big_r = self.support.radius;
        let width = (1.0 - self.plateau) * big_r;
        let (s, ds, dds) = smoothstep((big_r - r) / width);
        (s, -ds / width, dds / (width * width))
    }

    fn temporal_factor(&self, t: f64) -> (f64, f64) {
        if !self.temporal {
            return (1.0, 0.0);
        }
        let width = (1.0 - self.plateau) * self.support.depth;
        let (s, ds, _) = smoothstep((t - self.support.t_lo()) / width);
        (s, ds / width)
    }

    pub fn sample(&self, x: &[f64], t: f64) -> CutoffSample {
        let dim = x.len();
        let mut d = [0.0; 2];
        for (k, v) in x.iter().enumerate() {
            d[k] = v - self.support.center[k];
        }
        let r = d[0].hypot(d[1]);
        let (g, dg, ddg) = self.radial(r);
        let (h, dh) = self.temporal_factor(t);
        let (gradient, laplacian) = if r > 0.0 && dg != 0.0 {
            (
                [dg * d[0] / r * h, dg * d[1] / r * h],
                (ddg + (dim as f64 - 1.0) * dg / r) * h,
            )
        } else {
            ([0.0; 2], ddg * h)
        };
        CutoffSample {
            value: g * h,
            gradient,
            laplacian,
            time: g * dh,
        }
    }
}
