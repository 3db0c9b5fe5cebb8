//! Empirical check of the De Giorgi alternatives on a computed trajectory.

use super::constants::DeGiorgiConstants;
use super::cylinder::{
    check_cylinder_conditions, for_each_sample, level_set_fraction, oscillation, Cylinder, CylinderKind,
    LevelSense,
};
use crate::error::{Error, Result};
use crate::grid::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Few samples below the mid level: expect `u > mu_- + omega/4` on the half cylinder.
    I,
    /// Otherwise: expect `u < mu_- + (1 - 2^{-n0}) omega` on the shortened half cylinder.
    II,
}

/// Grid tolerances for deciding whether a conclusion holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DichotomyTolerance {
    /// Samples within this distance of the conclusion level do not count as violations.
    pub level_slack: f64,
    /// Largest violating sample fraction still accepted.
    pub max_violating_fraction: f64,
}

impl DichotomyTolerance {
    /// Level slack of two cell widths, no violating samples allowed.
    pub fn grid(h: f64) -> Self {
        DichotomyTolerance {
            level_slack: 2.0 * h,
            max_violating_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyReport {
    pub branch: Branch,
    /// Fraction of samples below `mu_- + omega/2`.
    pub hypothesis_fraction: f64,
    pub conclusion_holds: bool,
    pub violating_fraction: f64,
    /// Level that the conclusion compares against.
    pub conclusion_level: f64,
    pub conclusion_samples: usize,
    pub mu_minus: f64,
    pub omega: f64,
}

pub fn degiorgi_dichotomy_check(
    traj: &Trajectory,
    cyl: &Cylinder,
    dgc: &DeGiorgiConstants,
    mu: f64,
    tol: &DichotomyTolerance,
) -> Result<DichotomyReport> {
    let CylinderKind::Intrinsic { omega, m } = cyl.kind else {
        return Err(Error::Precondition("the dichotomy needs an intrinsic cylinder".into()));
    };
    let cond = check_cylinder_conditions(traj, cyl, mu)?;
    if !cond.all_passed() {
        return Err(Error::Precondition(format!(
            "cylinder conditions failed: c8 {:.3e}, c9 {:.3e}, c10 {:.3e}, c11 {:.3e}",
            cond.c8.margin, cond.c9.margin, cond.c10.margin, cond.c11.margin
        )));
    }
    if cyl.radius > dgc.r_max {
        return Err(Error::Precondition(format!(
            "radius {} exceeds R_max = {}",
            cyl.radius, dgc.r_max
        )));
    }
    let mu_minus = oscillation(traj, cyl)?.mu_minus;
    let fraction = level_set_fraction(traj, cyl, mu_minus + omega / 2.0, LevelSense::Below)?;
    let half = cyl.radius / 2.0;
    let (branch, target, level) = if fraction < dgc.nu0 {
        let target = Cylinder::intrinsic(&cyl.center, cyl.t0, half, omega, m)?;
        (Branch::I, target, mu_minus + omega / 4.0)
    } else {
        let depth = dgc.nu0 / 2.0 * omega.powf(1.0 - m) * half * half;
        let target = Cylinder::explicit(&cyl.center, cyl.t0, half, depth)?;
        (Branch::II, target, mu_minus + (1.0 - 2f64.powi(-(dgc.n0 as i32))) * omega)
    };
    let mut violating = 0usize;
    let count = for_each_sample(traj, &target, |v| {
        let bad = match branch {
            Branch::I => v <= level - tol.level_slack,
            Branch::II => v >= level + tol.level_slack,
        };
        if bad {
            violating += 1;
        }
    });
    if count == 0 {
        return Err(Error::EmptyCylinder);
    }
    let violating_fraction = violating as f64 / count as f64;
    Ok(DichotomyReport {
        branch,
        hypothesis_fraction: fraction,
        conclusion_holds: violating_fraction <= tol.max_violating_fraction,
        violating_fraction,
        conclusion_level: level,
        conclusion_samples: count,
        mu_minus,
        omega,
    })
}
