//! Discrete evaluation of the interior energy and logarithmic estimates.

use super::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::grid::{Grid, Trajectory};
use crate::nonlinearity::StructuralConstants;
use crate::reaction::ReactionTerm;
use crate::regularity::{oscillation, CylinderKind};

/// The growth bound `|f(x, t, z)| <= L z^{-m0}` used by the reaction terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    pub l: f64,
    pub m0: f64,
}

impl GrowthBound {
    pub fn none() -> Self {
        GrowthBound { l: 0.0, m0: 0.0 }
    }
}

impl From<&ReactionTerm> for GrowthBound {
    fn from(rt: &ReactionTerm) -> Self {
        GrowthBound {
            l: rt.bound_l,
            m0: rt.exponent_m0,
        }
    }
}

/// Both sides of one inequality, term by term.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub lhs_terms: Vec<(String, f64)>,
    pub rhs_terms: Vec<(String, f64)>,
    /// Left over right, with the gradient term read as `(∇w) zeta`.
    pub ratio: f64,
    /// Left over right, with the gradient term read as `∇(w zeta)`.
    pub ratio_product: f64,
    /// The truncation vanishes on every sample, so both sides are trivially zero.
    pub vacuous: bool,
    /// A coefficient on the left vanishes identically.
    pub degenerate: bool,
    pub refinement_tag: String,
}

impl EstimateReport {
    pub fn lhs(&self, name: &str) -> Option<f64> {
        self.lhs_terms.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn rhs(&self, name: &str) -> Option<f64> {
        self.rhs_terms.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn rhs_total(&self) -> f64 {
        self.rhs_terms.iter().map(|(_, v)| v).sum()
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    }
}

fn refinement_tag(traj: &Trajectory) -> String {
    let (nx, ny) = traj.grid().shape();
    format!("{nx}x{ny}:h={:.3e}:snapshots={}", traj.grid().h_max(), traj.len())
}

/// Cell gradient: centred differences inside, one-sided at the grid edge.
pub(crate) fn cell_gradient(grid: &Grid, w: &[f64], idx: usize) -> [f64; 2] {
    let (nx, ny) = grid.shape();
    let (i, j) = grid.unravel(idx);
    let diff = |n: usize, pos: usize, at: &dyn Fn(usize) -> f64, h: f64| {
        if pos == 0 {
            (at(1) - at(0)) / h
        } else if pos + 1 == n {
            (at(n - 1) - at(n - 2)) / h
        } else {
            (at(pos + 1) - at(pos - 1)) / (2.0 * h)
        }
    };
    let gx = diff(nx, i, &|k| w[grid.index(k, j)], grid.h(0));
    let gy = if grid.dim() == 2 {
        diff(ny, j, &|k| w[grid.index(i, k)], grid.h(1))
    } else {
        0.0
    };
    [gx, gy]
}

/// Snapshot indices inside `(t_lo, t_hi]` with the length of the time step
/// ending at each of them, clipped to the window.
pub(crate) fn time_weights(traj: &Trajectory, t_lo: f64, t_hi: f64) -> Vec<(usize, f64)> {
    let snaps = traj.snapshots();
    let slack = 1e-12 * t_hi.abs().max(1.0);
    let mut out = Vec::new();
    for (k, s) in snaps.iter().enumerate() {
        if s.t <= t_lo + slack || s.t > t_hi + slack {
            continue;
        }
        let prev = if k == 0 { s.t } else { snaps[k - 1].t };
        let w = s.t - prev.max(t_lo);
        if w > 0.0 {
            out.push((k, w));
        }
    }
    out
}

/// Cells whose centres lie in the closed ball.
pub(crate) fn ball_cells(grid: &Grid, center: &[f64], radius: f64) -> Vec<usize> {
    (0..grid.len())
        .filter(|&idx| {
            let c = grid.center(idx);
            let r2: f64 = center.iter().zip(c).map(|(a, b)| (b - a) * (b - a)).sum();
            r2 <= radius * radius * (1.0 + 1e-12)
        })
        .collect()
}

/// Accumulated integrals of a truncation `w = trunc(u)` against the cut-off.
#[derive(Default)]
struct Sums {
    sup_energy: f64,
    grad: f64,
    grad_product: f64,
    any_nonzero: bool,
}

fn truncation_sums(traj: &Trajectory, cut: &CutoffSpec, trunc: impl Fn(f64) -> f64, mut extra: impl FnMut(f64, f64, &super::cutoff::CutoffSample)) -> Result<Sums> {
    let grid = traj.grid();
    let dim = grid.dim();
    let cyl = &cut.support;
    if !cyl.fits_in(traj) {
        return Err(Error::Precondition("cut-off support leaves the trajectory domain".into()));
    }
    let cells = ball_cells(grid, &cyl.center, cyl.radius);
    let vol = grid.cell_volume();
    let mut sums = Sums::default();
    let mut w = vec![0.0; grid.len()];
    for (k, dt) in time_weights(traj, cyl.t_lo(), cyl.t0) {
        let snap = &traj.snapshots()[k];
        for (wi, &u) in w.iter_mut().zip(snap.field.values()) {
            *wi = trunc(u);
        }
        let mut slice = 0.0;
        for &idx in &cells {
            let c = grid.center(idx);
            let z = cut.sample(&c[..dim], snap.t);
            let wv = w[idx];
            if wv != 0.0 {
                sums.any_nonzero = true;
            }
            slice += wv * wv * z.value * z.value * vol;
            let g = cell_gradient(grid, &w, idx);
            let g2 = g[0] * g[0] + g[1] * g[1];
            sums.grad += g2 * z.value * z.value * vol * dt;
            let p = [g[0] * z.value + wv * z.gradient[0], g[1] * z.value + wv * z.gradient[1]];
            sums.grad_product += (p[0] * p[0] + p[1] * p[1]) * vol * dt;
            extra(snap.field.values()[idx], vol * dt, &z);
        }
        sums.sup_energy = sums.sup_energy.max(slice);
    }
    Ok(sums)
}

fn finish(lhs: Vec<(String, f64)>, rhs: Vec<(String, f64)>, vacuous: bool, degenerate: bool, traj: &Trajectory) -> EstimateReport {
    let sup = lhs[0].1;
    let total_rhs: f64 = rhs.iter().map(|(_, v)| v).sum();
    EstimateReport {
        ratio: ratio(sup + lhs[1].1, total_rhs),
        ratio_product: ratio(sup + lhs[2].1, total_rhs),
        lhs_terms: lhs,
        rhs_terms: rhs,
        vacuous,
        degenerate,
        refinement_tag: refinement_tag(traj),
    }
}

/// Lower truncation `w = (max(u, l) - k)_-` with `k >= l > 0`.
pub fn verify_lower_energy(
    traj: &Trajectory,
    sc: &StructuralConstants,
    growth: GrowthBound,
    cut: &CutoffSpec,
    k: f64,
    l: f64,
) -> Result<EstimateReport> {
    if !(l > 0.0) || !(k >= l) {
        return Err(Error::domain(format!("need k >= l > 0, got k={k}, l={l}")));
    }
    let m = sc.m;
    let (mut time_term, mut grad_term, mut lap_term, mut reaction) = (0.0, 0.0, 0.0, 0.0);
    let sums = truncation_sums(
        traj,
        cut,
        |u| (k - u.max(l)).max(0.0),
        |u, dv, z| {
            if u < k {
                time_term += z.time.abs() * dv;
                reaction += dv;
            }
            if u > l && u < k {
                grad_term += (z.gradient[0].powi(2) + z.gradient[1].powi(2)) * dv;
            }
            if u < l {
                lap_term += z.laplacian.abs() * dv;
            }
        },
    )?;
    let coeff = sc.c1 * l.powf(m - 1.0);
    let lhs = vec![
        ("sup_energy".to_string(), sums.sup_energy),
        ("gradient_energy".to_string(), coeff * sums.grad),
        ("gradient_energy_product".to_string(), coeff * sums.grad_product),
    ];
    let rhs = vec![
        ("time_cutoff".to_string(), (k - l) * (k + l) * time_term),
        ("gradient_cutoff".to_string(), sc.c2 * (k - l).powi(2) * k.powf(m - 1.0) * grad_term),
        ("laplacian_cutoff".to_string(), (k - l) * l.powf(m) / m * lap_term),
        ("reaction".to_string(), growth.l * l.powf(-growth.m0) * (k - l) * reaction),
    ];
    Ok(finish(lhs, rhs, !sums.any_nonzero, k == l, traj))
}

/// Upper truncation `w = (u - k)_+` with `k > 0`.
pub fn verify_upper_energy(
    traj: &Trajectory,
    sc: &StructuralConstants,
    growth: GrowthBound,
    cut: &CutoffSpec,
    k: f64,
) -> Result<EstimateReport> {
    if !(k > 0.0) {
        return Err(Error::domain(format!("need k > 0, got {k}")));
    }
    let m = sc.m;
    let mu_plus = oscillation(traj, &cut.support)?.mu_plus;
    let (mut time_term, mut grad_term, mut reaction) = (0.0, 0.0, 0.0);
    let sums = truncation_sums(
        traj,
        cut,
        |u| (u - k).max(0.0),
        |u, dv, z| {
            if u > k {
                time_term += z.time.abs() * dv;
                grad_term += (z.gradient[0].powi(2) + z.gradient[1].powi(2)) * dv;
                reaction += dv;
            }
        },
    )?;
    let gap = (mu_plus - k).max(0.0);
    let coeff = sc.c1 * k.powf(m - 1.0);
    let lhs = vec![
        ("sup_energy".to_string(), sums.sup_energy),
        ("gradient_energy".to_string(), coeff * sums.grad),
        ("gradient_energy_product".to_string(), coeff * sums.grad_product),
    ];
    let rhs = vec![
        ("time_cutoff".to_string(), gap * gap * time_term),
        ("gradient_cutoff".to_string(), sc.c2 * gap * gap * mu_plus.powf(m - 1.0) * grad_term),
        ("reaction".to_string(), growth.l * k.powf(-growth.m0) * gap * reaction),
    ];
    Ok(finish(lhs, rhs, !sums.any_nonzero, false, traj))
}

/// Logarithmic estimate between the slices at `t <= tau` for integer
/// levels `1 <= k < l`, with `omega` taken from the intrinsic support.
#[allow(clippy::too_many_arguments)]
pub fn verify_log_estimate(
    traj: &Trajectory,
    sc: &StructuralConstants,
    growth: GrowthBound,
    cut: &CutoffSpec,
    k: u32,
    l: u32,
    t: f64,
    tau: f64,
) -> Result<EstimateReport> {
    if k < 1 || l <= k {
        return Err(Error::domain(format!("need integers 1 <= k < l, got k={k}, l={l}")));
    }
    if cut.temporal {
        return Err(Error::domain("the logarithmic estimate needs a time-independent cut-off"));
    }
    let CylinderKind::Intrinsic { omega, .. } = cut.support.kind else {
        return Err(Error::Precondition("the logarithmic estimate needs an intrinsic support".into()));
    };
    let tol = 1e-12 * traj.t_end().abs().max(1.0);
    if !(t <= tau) || t < traj.t_start() - tol || tau > traj.t_end() + tol {
        return Err(Error::domain(format!("need t <= tau inside the trajectory, got t={t}, tau={tau}")));
    }
    let osc = oscillation(traj, &cut.support)?;
    let (mu_minus, mu_plus) = (osc.mu_minus, osc.mu_plus);
    let m = sc.m;
    let grid = traj.grid();
    let dim = grid.dim();
    let cyl = &cut.support;
    let cells = ball_cells(grid, &cyl.center, cyl.radius);
    let vol = grid.cell_volume();
    let level = |j: u32| mu_minus + omega - omega / 2f64.powi(j as i32);
    let slice = |time: f64, j: u32| {
        let snap = traj.nearest(time);
        let lv = level(j);
        cells
            .iter()
            .filter(|&&idx| snap.field.values()[idx] > lv)
            .map(|&idx| {
                let c = grid.center(idx);
                cut.sample(&c[..dim], time).value.powi(2) * vol
            })
            .fold(0.0, |acc, v| acc + v)
    };
    let grad_int: f64 = cells
        .iter()
        .map(|&idx| {
            let c = grid.center(idx);
            let g = cut.sample(&c[..dim], tau).gradient;
            (g[0] * g[0] + g[1] * g[1]) * vol
        })
        .fold(0.0, |acc, v| acc + v);
    let ball = cells.len() as f64 * vol;
    let (kf, lf) = (k as f64, l as f64);
    let r = cyl.radius;
    let upper = slice(tau, l);
    let initial = slice(t, k);
    let lhs_value = (lf - kf - 1.0).powi(2) * upper;
    let lhs = vec![
        ("slice_upper".to_string(), lhs_value),
        ("gradient_energy".to_string(), 0.0),
        ("gradient_energy_product".to_string(), 0.0),
    ];
    let rhs = vec![
        ("slice_initial".to_string(), (lf - kf).powi(2) * initial),
        (
            "gradient_cutoff".to_string(),
            sc.c2 * (lf - kf) * mu_plus.powf(m - 1.0) * r * r / omega.powf(m - 1.0) * grad_int,
        ),
        (
            "reaction".to_string(),
            growth.l * (omega / 2.0).powf(-growth.m0) * 2f64.powi(l as i32) * r * r / omega.powf(m) * ball,
        ),
    ];
    Ok(finish(lhs, rhs, upper == 0.0 && initial == 0.0, l == k + 1, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;
    use crate::nonlinearity::{fit_structural_constants, Nonlinearity};
    use crate::regularity::Cylinder;

    fn sc() -> StructuralConstants {
        fit_structural_constants(&Nonlinearity::power_law(2.0).unwrap(), 0.5, 0.25, 64).unwrap()
    }

    fn constant(c: f64) -> Trajectory {
        let g = Grid::line(0.0, 1.0, 100).unwrap();
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
        Trajectory::stationary(Field::constant(g, c), &times).unwrap()
    }

    fn cutoff(traj: &Trajectory) -> CutoffSpec {
        let cyl = Cylinder::intrinsic(&[0.5], 1.0, 0.2, 0.5, 2.0).unwrap();
        CutoffSpec::new(cyl, 0.5, traj).unwrap()
    }

    #[test]
    fn lower_truncation_of_high_constant_is_vacuous() {
        let traj = constant(0.4);
        let r = verify_lower_energy(&traj, &sc(), GrowthBound { l: 1.0, m0: 0.0 }, &cutoff(&traj), 0.3, 0.1).unwrap();
        assert!(r.vacuous);
        assert_eq!(r.lhs_terms.iter().map(|t| t.1).sum::<f64>(), 0.0);
        assert_eq!(r.rhs_total(), 0.0);
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn equal_levels_are_degenerate() {
        let traj = constant(0.05);
        let r = verify_lower_energy(&traj, &sc(), GrowthBound { l: 1.0, m0: 0.5 }, &cutoff(&traj), 0.1, 0.1).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.lhs("sup_energy"), Some(0.0));
        assert_eq!(r.rhs_total(), 0.0);
        assert!(verify_lower_energy(&traj, &sc(), GrowthBound::none(), &cutoff(&traj), 0.05, 0.1).is_err());
    }

    #[test]
    fn upper_truncation_of_constant() {
        let traj = constant(0.4);
        let cut = cutoff(&traj);
        let r = verify_upper_energy(&traj, &sc(), GrowthBound { l: 0.5, m0: 0.0 }, &cut, 0.25).unwrap();
        assert_eq!(r.lhs("gradient_energy"), Some(0.0));
        assert_eq!(r.rhs("gradient_cutoff").map(|v| v > 0.0), Some(true));
        assert!(r.ratio > 0.0 && r.ratio <= 1.0, "{}", r.ratio);
        // sup of (c-k)² ∫ zeta(t0)² against (c-k)² ∫ zeta ∫|zeta_t| dt
        let time = r.rhs("time_cutoff").unwrap();
        assert!(r.lhs("sup_energy").unwrap() <= time);
        let above = verify_upper_energy(&traj, &sc(), GrowthBound::none(), &cut, 0.5).unwrap();
        assert!(above.vacuous);
        assert_eq!(above.ratio, 0.0);
    }

    #[test]
    fn log_estimate_flags() {
        let traj = constant(0.1);
        let cyl = Cylinder::intrinsic(&[0.5], 1.0, 0.2, 0.5, 2.0).unwrap();
        let cut = CutoffSpec::spatial(cyl, 0.5, &traj).unwrap();
        let r = verify_log_estimate(&traj, &sc(), GrowthBound::none(), &cut, 1, 2, 0.95, 1.0).unwrap();
        assert!(r.vacuous && r.degenerate);
        assert_eq!(r.lhs("slice_upper"), Some(0.0));
        assert_eq!(r.rhs("slice_initial"), Some(0.0));
        assert!(verify_log_estimate(&traj, &sc(), GrowthBound::none(), &cut, 2, 2, 0.95, 1.0).is_err());
        assert!(verify_log_estimate(&traj, &sc(), GrowthBound::none(), &cut, 1, 3, 1.0, 0.95).is_err());
    }

    #[test]
    fn gradient_stencil() {
        let g = Grid::line(0.0, 1.0, 10).unwrap();
        let w: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        assert!((cell_gradient(&g, &w, 0)[0] - 10.0).abs() < 1e-12);
        assert!((cell_gradient(&g, &w, 5)[0] - 100.0).abs() < 1e-12);
        assert!((cell_gradient(&g, &w, 9)[0] - 170.0).abs() < 1e-12);
    }
}
