//! The De Giorgi constant chain and the shrinking-cylinder scheme built from it.

use crate::error::{Error, Result};
use crate::nonlinearity::StructuralConstants;
use crate::reaction::ReactionTerm;

#[derive(Debug, Clone, PartialEq)]
pub struct DeGiorgiConstants {
    /// Measure threshold of the dichotomy.
    pub nu0: f64,
    pub n0: u32,
    /// Oscillation reduction factor per step.
    pub eta0: f64,
    /// Radius reduction factor per step.
    pub a: f64,
    /// Hölder exponent `ln eta0 / ln a`.
    pub alpha: f64,
    pub r_max: f64,
    pub n_star: u32,
    pub c_struct: f64,
    /// Depth factor of the classical cylinders used after the switch.
    pub theta: f64,
    /// Oscillation reduction factor after the switch.
    pub eta: f64,
    pub m: f64,
    pub m0: f64,
    pub dim: usize,
}

/// Default `theta = 4^{1-m}`.
pub fn default_theta(m: f64) -> f64 {
    4f64.powf(1.0 - m)
}

pub const DEFAULT_ETA: f64 = 0.9;

/// Compute `nu0`, `eta0`, `a`, `alpha` and `R_max` from the structural data.
///
/// `eta0 = max(3/4, 1 - 2^{-n0})`, consistent with the level
/// `mu_- + (1 - 2^{-n0}) omega` of the second alternative.
#[allow(clippy::too_many_arguments)]
pub fn compute_degiorgi_constants(
    sc: &StructuralConstants,
    rt: &ReactionTerm,
    dim: usize,
    c_struct: f64,
    n0: u32,
    n_star: u32,
    theta: f64,
    eta: f64,
) -> Result<DeGiorgiConstants> {
    if dim == 0 || dim > 3 {
        return Err(Error::domain(format!("dimension must be 1, 2 or 3, got {dim}")));
    }
    if !(c_struct > 0.0) || !c_struct.is_finite() {
        return Err(Error::domain(format!("structural constant must be positive, got {c_struct}")));
    }
    if n0 < 2 {
        return Err(Error::domain(format!("n0 must be at least 2, got {n0}")));
    }
    if n_star < 3 {
        return Err(Error::domain(format!("n_star must be at least 3, got {n_star}")));
    }
    let m = sc.m;
    let m0 = rt.exponent_m0;
    if !(m > 1.0) || !(m0 >= 0.0 && m0 < m) {
        return Err(Error::domain(format!("need m > 1 and 0 <= m0 < m, got m={m}, m0={m0}")));
    }
    if !(theta > 0.0 && theta <= default_theta(m) * (1.0 + 1e-12)) {
        return Err(Error::domain(format!("theta must lie in (0, 4^(1-m)], got {theta}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    let n = dim as f64;
    let nu0 = c_struct.powf(-(n + 2.0) / 2.0) * 2f64.powf(-(n + 2.0) * (n + 2.0));
    if !(nu0 > 0.0 && nu0 < 1.0) {
        return Err(Error::domain(format!("nu0 = {nu0} outside (0, 1); increase the structural constant")));
    }
    let eta0 = f64::max(0.75, 1.0 - 2f64.powi(-(n0 as i32)));
    let a = 0.5 * (nu0 / 2.0).sqrt() * eta0.powf(m);
    let alpha = eta0.ln() / a.ln();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("Hölder exponent {alpha} outside (0, 1)")));
    }
    let l = n_star as f64;
    let base = nu0 * nu0 / (4.0 * c_struct) * (l - 2.0).powi(2) / 2f64.powf(l);
    let r_max = base.powf(m / (m - m0));
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::domain(format!("R_max = {r_max} outside (0, 1)")));
    }
    Ok(DeGiorgiConstants {
        nu0,
        n0,
        eta0,
        a,
        alpha,
        r_max,
        n_star,
        c_struct,
        theta,
        eta,
        m,
        m0,
        dim,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemePhase {
    /// `R ← a R`, `omega ← eta0 omega`, intrinsic cylinders.
    Intrinsic,
    /// `R ← R/4`, `omega ← eta omega`, classical cylinders.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeStep {
    pub n: usize,
    pub radius: f64,
    pub omega: f64,
    /// Temporal depth of this step's cylinder.
    pub depth: f64,
    pub phase: SchemePhase,
    /// `omega^m - R`.
    pub condition11_slack: f64,
    /// This cylinder sits inside the previous step's shortened half cylinder
    /// (inside the previous cylinder after the switch). True at `n = 0`.
    pub nested: bool,
}

/// Radii and oscillation bounds `(R_n, omega_n)` of the iteration, switching
/// to the classical rule after index `switch_at` when given.
pub fn generate_iterative_scheme(
    r0: f64,
    omega0: f64,
    dgc: &DeGiorgiConstants,
    n_max: usize,
    switch_at: Option<usize>,
) -> Result<Vec<SchemeStep>> {
    if !(r0 > 0.0) || !(omega0 > 0.0) {
        return Err(Error::Precondition("R0 and omega0 must be positive".into()));
    }
    if r0 > dgc.r_max {
        return Err(Error::Precondition(format!("R0 = {r0} exceeds R_max = {}", dgc.r_max)));
    }
    let m = dgc.m;
    if omega0 < r0.powf(1.0 / m) {
        return Err(Error::Precondition(format!(
            "omega0 = {omega0} is below R0^(1/m) = {}",
            r0.powf(1.0 / m)
        )));
    }
    let intrinsic_depth = |r: f64, w: f64| w.powf(1.0 - m) * r * r;
    let mut steps = vec![SchemeStep {
        n: 0,
        radius: r0,
        omega: omega0,
        depth: intrinsic_depth(r0, omega0),
        phase: SchemePhase::Intrinsic,
        condition11_slack: omega0.powf(m) - r0,
        nested: true,
    }];
    for n in 1..=n_max {
        let prev = steps[n - 1];
        let classical = switch_at.is_some_and(|s| n > s);
        let step = if classical {
            let radius = prev.radius / 4.0;
            let depth = dgc.theta * radius * radius;
            SchemeStep {
                n,
                radius,
                omega: dgc.eta * prev.omega,
                depth,
                phase: SchemePhase::Classical,
                condition11_slack: (dgc.eta * prev.omega).powf(m) - radius,
                nested: depth <= prev.depth * (1.0 + 1e-12),
            }
        } else {
            let radius = dgc.a * prev.radius;
            let omega = dgc.eta0 * prev.omega;
            let depth = intrinsic_depth(radius, omega);
            let half = prev.radius / 2.0;
            let shortened = dgc.nu0 / 2.0 * intrinsic_depth(half, prev.omega);
            SchemeStep {
                n,
                radius,
                omega,
                depth,
                phase: SchemePhase::Intrinsic,
                condition11_slack: omega.powf(m) - radius,
                nested: radius <= half && depth <= shortened * (1.0 + 1e-12) && shortened <= prev.depth,
            }
        };
        steps.push(step);
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{fit_structural_constants, Nonlinearity};

    fn pme_sc(m: f64) -> StructuralConstants {
        fit_structural_constants(&Nonlinearity::power_law(m).unwrap(), 0.5, 0.25, 64).unwrap()
    }

    #[test]
    fn chain_for_unit_constant() {
        let dgc = compute_degiorgi_constants(&pme_sc(2.0), &ReactionTerm::zero(), 1, 1.0, 3, 3, 0.25, 0.9).unwrap();
        assert_eq!(dgc.nu0, 2f64.powi(-9));
        assert_eq!(dgc.eta0, 0.875);
        assert!((dgc.a - 49.0 / 4096.0).abs() < 1e-12);
        assert!((dgc.alpha - 0.030_17).abs() < 1e-4);
    }

    #[test]
    fn eta0_has_floor_three_quarters() {
        let dgc = compute_degiorgi_constants(&pme_sc(2.0), &ReactionTerm::zero(), 1, 1.0, 2, 3, 0.25, 0.9).unwrap();
        assert_eq!(dgc.eta0, 0.75);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sc = pme_sc(2.0);
        let z = ReactionTerm::zero();
        assert!(compute_degiorgi_constants(&sc, &z, 1, 1.0, 1, 3, 0.25, 0.9).is_err());
        assert!(compute_degiorgi_constants(&sc, &z, 1, 1.0, 3, 2, 0.25, 0.9).is_err());
        assert!(compute_degiorgi_constants(&sc, &z, 1, 1.0, 3, 3, 0.5, 0.9).is_err());
        assert!(compute_degiorgi_constants(&sc, &z, 1, 1e-6, 3, 3, 0.25, 0.9).is_err());
    }

    fn relaxed() -> DeGiorgiConstants {
        let mut dgc = compute_degiorgi_constants(&pme_sc(2.0), &ReactionTerm::zero(), 1, 1.0, 3, 3, 0.25, 0.9).unwrap();
        dgc.m = 2.0;
        dgc.a = 0.01196;
        dgc.r_max = 0.5;
        dgc
    }

    #[test]
    fn geometric_example() {
        let steps = generate_iterative_scheme(0.01, 0.5, &relaxed(), 3, None).unwrap();
        let radii: Vec<f64> = steps.iter().map(|s| s.radius).collect();
        let omegas: Vec<f64> = steps.iter().map(|s| s.omega).collect();
        let expect_r = [0.01, 1.196e-4, 1.430_416e-6, 1.710_777_5e-8];
        let expect_w = [0.5, 0.4375, 0.382_812_5, 0.334_960_937_5];
        for i in 0..4 {
            assert!((radii[i] - expect_r[i]).abs() <= 1e-6 * expect_r[i]);
            assert!((omegas[i] - expect_w[i]).abs() < 1e-15);
            assert!(steps[i].condition11_slack > 0.0);
            assert!(steps[i].nested);
        }
    }

    #[test]
    fn zero_steps_is_singleton() {
        let steps = generate_iterative_scheme(0.01, 0.5, &relaxed(), 0, None).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!((steps[0].radius, steps[0].omega), (0.01, 0.5));
    }

    #[test]
    fn switch_changes_rule() {
        let dgc = relaxed();
        let steps = generate_iterative_scheme(0.01, 0.5, &dgc, 4, Some(1)).unwrap();
        assert_eq!(steps[2].phase, SchemePhase::Classical);
        assert!((steps[2].radius - steps[1].radius / 4.0).abs() < 1e-20);
        assert!((steps[2].omega - 0.9 * steps[1].omega).abs() < 1e-15);
    }

    #[test]
    fn preconditions() {
        let dgc = relaxed();
        assert!(generate_iterative_scheme(0.6, 0.9, &dgc, 2, None).is_err());
        assert!(generate_iterative_scheme(0.01, 0.05, &dgc, 2, None).is_err());
    }
}
