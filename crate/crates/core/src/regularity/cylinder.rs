//! Backward space-time cylinders `B_R(x0) × (t0 - depth, t0]` and sample
//! statistics over them.

use crate::error::{Error, Result};
use crate::grid::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CylinderKind {
    /// Depth `omega^{1-m} R²`.
    Intrinsic { omega: f64, m: f64 },
    /// Depth `theta R²`.
    Classical { theta: f64 },
    /// Any other prescribed depth.
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub center: Vec<f64>,
    pub t0: f64,
    pub radius: f64,
    pub kind: CylinderKind,
    pub depth: f64,
}

impl Cylinder {
    fn check(center: &[f64], radius: f64) -> Result<()> {
        if center.is_empty() || center.len() > 2 {
            return Err(Error::domain("cylinder centres are 1D or 2D points"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain(format!("cylinder radius must be positive, got {radius}")));
        }
        Ok(())
    }

    pub fn intrinsic(center: &[f64], t0: f64, radius: f64, omega: f64, m: f64) -> Result<Self> {
        Self::check(center, radius)?;
        if !(omega > 0.0) || !(m > 1.0) {
            return Err(Error::domain("intrinsic cylinders need omega > 0 and m > 1"));
        }
        Ok(Cylinder {
            center: center.to_vec(),
            t0,
            radius,
            kind: CylinderKind::Intrinsic { omega, m },
            depth: omega.powf(1.0 - m) * radius * radius,
        })
    }

    pub fn classical(center: &[f64], t0: f64, radius: f64, theta: f64) -> Result<Self> {
        Self::check(center, radius)?;
        if !(theta > 0.0) {
            return Err(Error::domain("classical cylinders need theta > 0"));
        }
        Ok(Cylinder {
            center: center.to_vec(),
            t0,
            radius,
            kind: CylinderKind::Classical { theta },
            depth: theta * radius * radius,
        })
    }

    pub fn explicit(center: &[f64], t0: f64, radius: f64, depth: f64) -> Result<Self> {
        Self::check(center, radius)?;
        if !(depth > 0.0) {
            return Err(Error::domain("cylinder depth must be positive"));
        }
        Ok(Cylinder {
            center: center.to_vec(),
            t0,
            radius,
            kind: CylinderKind::Explicit,
            depth,
        })
    }

    /// Same kind and centre, radius multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let r = self.radius * factor;
        match self.kind {
            CylinderKind::Intrinsic { omega, m } => Cylinder::intrinsic(&self.center, self.t0, r, omega, m),
            CylinderKind::Classical { theta } => Cylinder::classical(&self.center, self.t0, r, theta),
            CylinderKind::Explicit => {
                Cylinder::explicit(&self.center, self.t0, r, self.depth * factor * factor)
            }
        }
    }

    pub fn t_lo(&self) -> f64 {
        self.t0 - self.depth
    }

    pub fn contains(&self, x: &[f64], t: f64) -> bool {
        let r2: f64 = self.center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum();
        let slack = 1e-12 * self.depth.max(self.t0.abs());
        r2 <= self.radius * self.radius * (1.0 + 1e-12)
            && t > self.t0 - self.depth + slack
            && t <= self.t0 + slack
    }

    /// `self ⊆ other` as sets.
    pub fn is_inside(&self, other: &Cylinder) -> bool {
        let dist: f64 = self
            .center
            .iter()
            .zip(&other.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let tol = 1e-12;
        dist + self.radius <= other.radius * (1.0 + tol)
            && self.t0 <= other.t0 + tol
            && self.t_lo() >= other.t_lo() - tol * other.depth.max(1.0)
    }

    /// The cylinder lies in the closure of the trajectory's space-time domain.
    pub fn fits_in(&self, traj: &Trajectory) -> bool {
        let tol = 1e-12 * traj.t_end().abs().max(1.0);
        traj.grid().contains_ball(&self.center, self.radius)
            && self.t_lo() >= traj.t_start() - tol
            && self.t0 <= traj.t_end() + tol
    }
}

/// Visit every `(value, snapshot index, cell index)` sampled inside `cyl`.
pub(crate) fn for_each_sample(traj: &Trajectory, cyl: &Cylinder, mut visit: impl FnMut(f64)) -> usize {
    let grid = traj.grid();
    let dim = grid.dim();
    if cyl.center.len() != dim {
        return 0;
    }
    // index window of the bounding box
    let window = |k: usize| {
        let a = grid.axis(k);
        let h = a.h();
        let lo = ((cyl.center[k] - cyl.radius - a.lo) / h - 0.5).floor().max(0.0) as usize;
        let hi = (((cyl.center[k] + cyl.radius - a.lo) / h - 0.5).ceil().max(0.0) as usize).min(a.cells - 1);
        (lo, hi)
    };
    let (i_lo, i_hi) = window(0);
    let (j_lo, j_hi) = if dim == 2 { window(1) } else { (0, 0) };
    let mut count = 0;
    for snap in traj.snapshots() {
        if !cyl.contains(&cyl.center, snap.t) {
            continue;
        }
        let values = snap.field.values();
        for j in j_lo..=j_hi {
            for i in i_lo..=i_hi {
                let idx = grid.index(i, j);
                let c = grid.center(idx);
                if cyl.contains(&c[..dim], snap.t) {
                    visit(values[idx]);
                    count += 1;
                }
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationReport {
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub essosc: f64,
    pub sample_count: usize,
}

/// Minimum, maximum and their difference over the in-cylinder samples.
pub fn oscillation(traj: &Trajectory, cyl: &Cylinder) -> Result<OscillationReport> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let count = for_each_sample(traj, cyl, |v| {
        lo = lo.min(v);
        hi = hi.max(v);
    });
    if count == 0 {
        return Err(Error::EmptyCylinder);
    }
    Ok(OscillationReport {
        mu_minus: lo,
        mu_plus: hi,
        essosc: hi - lo,
        sample_count: count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSense {
    Below,
    AtOrAbove,
}

/// Fraction of in-cylinder samples with `u < k` (or `u >= k`).
pub fn level_set_fraction(traj: &Trajectory, cyl: &Cylinder, k: f64, sense: LevelSense) -> Result<f64> {
    let mut below = 0usize;
    let count = for_each_sample(traj, cyl, |v| {
        if v < k {
            below += 1;
        }
    });
    if count == 0 {
        return Err(Error::EmptyCylinder);
    }
    let frac = below as f64 / count as f64;
    Ok(match sense {
        LevelSense::Below => frac,
        // written as a complement so the two senses add up to one exactly
        LevelSense::AtOrAbove => 1.0 - frac,
    })
}

/// One inequality with its signed slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub passed: bool,
    pub margin: f64,
}

impl ConditionCheck {
    fn from_margin(margin: f64) -> Self {
        ConditionCheck {
            passed: margin >= 0.0,
            margin,
        }
    }
}

/// Admissibility of an intrinsic cylinder for the De Giorgi dichotomy.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// The doubled cylinder lies in the space-time domain.
    pub c8: ConditionCheck,
    /// Oscillation at most `omega`.
    pub c9: ConditionCheck,
    /// Infimum at most `omega / 4`.
    pub c10: ConditionCheck,
    /// `omega >= R^{1/m}`.
    pub c11: ConditionCheck,
    /// Supremum at most `1 - mu`.
    pub below_cap: ConditionCheck,
    pub oscillation: Option<OscillationReport>,
    pub omega: f64,
    pub m: f64,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.c8.passed && self.c9.passed && self.c10.passed && self.c11.passed
    }
}

pub fn check_cylinder_conditions(traj: &Trajectory, cyl: &Cylinder, mu: f64) -> Result<ConditionReport> {
    let CylinderKind::Intrinsic { omega, m } = cyl.kind else {
        return Err(Error::Precondition("cylinder conditions apply to intrinsic cylinders".into()));
    };
    let doubled = cyl.rescaled(2.0)?;
    let grid = traj.grid();
    let spatial = grid.boundary_distance(&cyl.center) - doubled.radius;
    let temporal = (doubled.t_lo() - traj.t_start()).min(traj.t_end() - cyl.t0);
    let c8 = ConditionCheck::from_margin(spatial.min(temporal));
    let osc = oscillation(traj, cyl).ok();
    let (c9, c10, below_cap) = match &osc {
        Some(o) => (
            ConditionCheck::from_margin(omega - o.essosc),
            ConditionCheck::from_margin(omega / 4.0 - o.mu_minus),
            ConditionCheck::from_margin(1.0 - mu - o.mu_plus),
        ),
        None => {
            let fail = ConditionCheck {
                passed: false,
                margin: f64::NEG_INFINITY,
            };
            (fail, fail, fail)
        }
    };
    let c11 = ConditionCheck::from_margin(omega - cyl.radius.powf(1.0 / m));
    Ok(ConditionReport {
        c8,
        c9,
        c10,
        c11,
        below_cap,
        oscillation: osc,
        omega,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid};

    fn ramp(cells: usize) -> Trajectory {
        let g = Grid::line(0.0, 1.0, cells).unwrap();
        let f = Field::from_fn(g, |x| x[0]);
        Trajectory::stationary(f, &[0.0, 0.5, 1.0]).unwrap()
    }

    #[test]
    fn constant_field_has_no_oscillation() {
        let g = Grid::line(0.0, 1.0, 20).unwrap();
        let traj = Trajectory::stationary(Field::constant(g, 0.3), &[0.0, 1.0]).unwrap();
        let cyl = Cylinder::classical(&[0.5], 1.0, 0.2, 1.0).unwrap();
        let o = oscillation(&traj, &cyl).unwrap();
        assert_eq!((o.essosc, o.mu_minus, o.mu_plus), (0.0, 0.3, 0.3));
        assert_eq!(level_set_fraction(&traj, &cyl, 0.5, LevelSense::Below).unwrap(), 1.0);
    }

    #[test]
    fn ramp_oscillation_and_fraction() {
        let h = 1.0 / 200.0;
        let traj = ramp(200);
        let cyl = Cylinder::classical(&[0.5], 1.0, 0.25, 1.0).unwrap();
        let o = oscillation(&traj, &cyl).unwrap();
        assert!((o.essosc - 0.5).abs() <= h);
        let full = Cylinder::classical(&[0.5], 1.0, 0.5, 1.0).unwrap();
        let below = level_set_fraction(&traj, &full, 0.5, LevelSense::Below).unwrap();
        assert!((below - 0.5).abs() <= h);
        let above = level_set_fraction(&traj, &full, 0.5, LevelSense::AtOrAbove).unwrap();
        assert_eq!(below + above, 1.0);
    }

    #[test]
    fn empty_cylinder_is_an_error() {
        let traj = ramp(10);
        let cyl = Cylinder::classical(&[0.5], 0.75, 0.01, 1.0).unwrap();
        assert!(matches!(oscillation(&traj, &cyl), Err(Error::EmptyCylinder)));
    }

    #[test]
    fn condition_examples() {
        let g = Grid::line(0.0, 1.0, 100).unwrap();
        let traj = Trajectory::stationary(Field::constant(g, 0.1), &[0.0, 0.5, 1.0]).unwrap();
        let cyl = Cylinder::intrinsic(&[0.5], 1.0, 0.04, 0.5, 2.0).unwrap();
        let r = check_cylinder_conditions(&traj, &cyl, 0.1).unwrap();
        assert!((r.c11.margin - 0.3).abs() < 1e-12);
        assert!(r.c9.passed && r.c10.passed && r.c8.passed);
        assert!((r.c10.margin - 0.025).abs() < 1e-12);
        let edge = Cylinder::intrinsic(&[0.05], 1.0, 0.04, 0.5, 2.0).unwrap();
        assert!(!check_cylinder_conditions(&traj, &edge, 0.1).unwrap().c8.passed);
    }

    #[test]
    fn nesting_test() {
        let big = Cylinder::intrinsic(&[0.5], 1.0, 0.2, 0.5, 2.0).unwrap();
        let small = Cylinder::intrinsic(&[0.5], 1.0, 0.1, 0.5, 2.0).unwrap();
        assert!(small.is_inside(&big));
        assert!(!big.is_inside(&small));
    }
}
