//! The diffusion nonlinearity `phi` of `u_t = Δφ(u) + f(·, u)`.
//!
//! Three families are supported: pure power laws `z^m`, the biofilm primitive
//! `∫₀^z s^b / (1 - s)^a ds`, and tabulated data interpolated by a monotone
//! cubic. Values are only defined on `[0, domain_cap]`, which keeps evaluation
//! away from the singularity at `z = 1`.

use crate::error::{Error, Result};
use crate::numerics::{self, Pchip};

/// Default upper evaluation limit for all kinds.
pub const DEFAULT_DOMAIN_CAP: f64 = 1.0 - 1e-6;

// Below this the biofilm primitive is summed as a power series.
const SERIES_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityKind {
    PowerLaw { m: f64 },
    BiofilmIntegral { a: f64, b: f64 },
    Tabulated(Pchip),
}

/// A diffusion nonlinearity, optionally multiplied by a constant `scale`
/// (the biomass diffusivity in the coupled model).
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    domain_cap: f64,
    scale: f64,
}

impl Nonlinearity {
    pub fn power_law(m: f64) -> Result<Self> {
        if !(m > 1.0) || !m.is_finite() {
            return Err(Error::domain(format!("power-law exponent must exceed 1, got {m}")));
        }
        Ok(Nonlinearity {
            kind: NonlinearityKind::PowerLaw { m },
            domain_cap: DEFAULT_DOMAIN_CAP,
            scale: 1.0,
        })
    }

    pub fn biofilm(a: f64, b: f64) -> Result<Self> {
        if !(a >= 1.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain(format!(
                "biofilm primitive needs a >= 1 and b > 0, got a={a}, b={b}"
            )));
        }
        Ok(Nonlinearity {
            kind: NonlinearityKind::BiofilmIntegral { a, b },
            domain_cap: DEFAULT_DOMAIN_CAP,
            scale: 1.0,
        })
    }

    /// Tabulated `(z, phi(z))` nodes. The first node must sit at `z = 0`; the
    /// last node fixes the domain cap. Values are not required to increase so
    /// that broken tables can still be inspected by [`validate_hypotheses`].
    pub fn tabulated(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::domain("a table needs at least three nodes"));
        }
        if nodes[0].0 != 0.0 {
            return Err(Error::domain("the first table node must be at z = 0"));
        }
        let cap = nodes[nodes.len() - 1].0;
        if !(cap > 0.0 && cap < 1.0) {
            return Err(Error::domain(format!("last table node must lie in (0, 1), got {cap}")));
        }
        let (zs, vs): (Vec<f64>, Vec<f64>) = nodes.into_iter().unzip();
        let interp = Pchip::new(zs, vs)
            .ok_or_else(|| Error::domain("table abscissae must be strictly increasing"))?;
        Ok(Nonlinearity {
            kind: NonlinearityKind::Tabulated(interp),
            domain_cap: cap,
            scale: 1.0,
        })
    }

    pub fn with_domain_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0 && cap < 1.0) {
            return Err(Error::domain(format!("domain cap must lie in (0, 1), got {cap}")));
        }
        if let NonlinearityKind::Tabulated(t) = &self.kind {
            let last = *t.nodes().0.last().unwrap();
            if cap > last {
                return Err(Error::domain("domain cap exceeds the last table node"));
            }
        }
        self.domain_cap = cap;
        Ok(self)
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::domain(format!("scale must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn domain_cap(&self) -> f64 {
        self.domain_cap
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// True when `phi` is meant to blow up at 1 (the singular primitive).
    pub fn is_singular(&self) -> bool {
        matches!(self.kind, NonlinearityKind::BiofilmIntegral { .. })
    }

    fn check_domain(&self, z: f64) -> Result<()> {
        if !(0.0..=self.domain_cap).contains(&z) {
            return Err(Error::domain(format!(
                "z = {z} outside [0, {}]",
                self.domain_cap
            )));
        }
        Ok(())
    }

    /// `phi(z)` on `[0, domain_cap]`.
    pub fn phi(&self, z: f64) -> Result<f64> {
        self.check_domain(z)?;
        Ok(self.phi_unchecked(z))
    }

    /// `phi'(z)`; at `z = 0` the one-sided limit.
    pub fn phi_prime(&self, z: f64) -> Result<f64> {
        self.check_domain(z)?;
        Ok(self.phi_prime_unchecked(z))
    }

    /// The inverse `beta = phi^{-1}` on `[0, phi(domain_cap)]`.
    pub fn beta(&self, v: f64) -> Result<f64> {
        let top = self.phi_unchecked(self.domain_cap);
        if !(v >= 0.0) || v > top {
            return Err(Error::domain(format!("v = {v} outside [0, phi(cap) = {top}]")));
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        if v == top {
            return Ok(self.domain_cap);
        }
        Ok(numerics::invert_increasing(
            |z| self.phi_unchecked(z),
            |z| self.phi_prime_unchecked(z),
            v,
            0.0,
            self.domain_cap,
        ))
    }

    pub(crate) fn phi_unchecked(&self, z: f64) -> f64 {
        let raw = match &self.kind {
            NonlinearityKind::PowerLaw { m } => z.powf(*m),
            NonlinearityKind::BiofilmIntegral { a, b } => biofilm_primitive(*a, *b, z),
            NonlinearityKind::Tabulated(t) => t.value(z),
        };
        self.scale * raw
    }

    pub(crate) fn phi_prime_unchecked(&self, z: f64) -> f64 {
        let raw = match &self.kind {
            NonlinearityKind::PowerLaw { m } => m * z.powf(m - 1.0),
            NonlinearityKind::BiofilmIntegral { a, b } => z.powf(*b) / (1.0 - z).powf(*a),
            NonlinearityKind::Tabulated(t) => t.derivative(z),
        };
        self.scale * raw
    }

    /// Smallest positive abscissa at which a fit may sample `phi'`.
    fn sampling_floor(&self) -> f64 {
        match &self.kind {
            NonlinearityKind::Tabulated(t) => t.nodes().0[1].max(FIT_FLOOR),
            _ => FIT_FLOOR,
        }
    }
}

/// `∫₀^z s^b (1-s)^{-a} ds`.
fn biofilm_primitive(a: f64, b: f64, z: f64) -> f64 {
    if z <= SERIES_LIMIT {
        return biofilm_series(a, b, z);
    }
    let head = biofilm_series(a, b, SERIES_LIMIT);
    let tail = if b.fract() == 0.0 && b <= 8.0 {
        biofilm_tail_closed(a, b as u32, z)
    } else {
        biofilm_tail_quadrature(a, b, z)
    };
    head + tail
}

// Binomial expansion of (1-s)^{-a}: sum_n (a)_n/n! z^{n+b+1}/(n+b+1).
fn biofilm_series(a: f64, b: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let mut coeff = 1.0;
    let mut zn = 1.0;
    let mut sum = 0.0;
    for n in 0..2000 {
        let term = coeff * zn / (n as f64 + b + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        coeff *= (a + n as f64) / (n as f64 + 1.0);
        zn *= z;
    }
    z.powf(b + 1.0) * sum
}

// ∫_{1/2}^{z} s^b (1-s)^{-a} ds for integer b via w = 1 - s.
fn biofilm_tail_closed(a: f64, b: u32, z: f64) -> f64 {
    let lo = 1.0 - z;
    let hi = 1.0 - SERIES_LIMIT;
    let mut sum = 0.0;
    let mut binom = 1.0;
    for k in 0..=b {
        let p = k as f64 - a;
        let piece = if (p + 1.0).abs() < 1e-14 {
            (hi / lo).ln()
        } else {
            (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / (p + 1.0)
        };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * piece;
        binom *= (b - k) as f64 / (k + 1) as f64;
    }
    sum
}

// Same integral by adaptive quadrature after w = 1 - s = e^y, which removes
// the steep growth near s = 1.
pub(crate) fn biofilm_tail_quadrature(a: f64, b: f64, z: f64) -> f64 {
    let y_lo = (1.0 - z).ln();
    let y_hi = (1.0 - SERIES_LIMIT).ln();
    numerics::integrate(
        |y| {
            let w = y.exp();
            (1.0 - w).powf(b) * (y * (1.0 - a)).exp()
        },
        y_lo,
        y_hi,
        1e-15,
        1e-14,
    )
}

/// Lower end of the geometric sample used when fitting `phi'` near zero.
pub const FIT_FLOOR: f64 = 1e-9;

/// Constants of the porous-medium degeneracy hypothesis, fitted from samples.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralConstants {
    pub c1: f64,
    pub c2: f64,
    pub m: f64,
    pub eps: f64,
    /// Minimum of `phi'` on `[eps, 1 - mu]`.
    pub lambda: f64,
    /// Maximum of `phi'` on `[0, 1 - mu]`.
    pub m_cap: f64,
    pub mu: f64,
    /// RMS residual of the log-log regression that produced `m`.
    pub fit_residual: f64,
    /// Points per decade of the geometric sample on `(0, eps]`.
    pub per_decade: usize,
    /// Lower end of that sample.
    pub z_floor: f64,
    /// Number of points in the uniform samples on `[eps, 1 - mu]` and `[0, 1 - mu]`.
    pub uniform_count: usize,
}

impl StructuralConstants {
    /// The geometric sample of `(0, eps]` the constants were fitted on.
    pub fn degeneracy_samples(&self) -> Vec<f64> {
        geometric_lattice(self.eps, self.z_floor, self.per_decade)
    }
}

/// Options for [`fit_structural_constants_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Largest admissible RMS residual (natural-log units) of the log-log fit.
    pub max_rms_residual: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_rms_residual: 0.5,
        }
    }
}

/// Points `eps · 10^{-j/per_decade}`, `j = 0, 1, ...`, down to `floor`.
///
/// Replacing `eps` by one of these points yields a subset.
pub fn geometric_lattice(eps: f64, floor: f64, per_decade: usize) -> Vec<f64> {
    let d = per_decade as f64;
    (0..)
        .map(|j| eps * 10f64.powf(-(j as f64) / d))
        .take_while(|&z| z >= floor)
        .collect()
}

/// Lattice density used by the fit for a given sample budget.
pub fn lattice_density(sample_count: usize) -> usize {
    sample_count.div_ceil(9).max(2)
}

fn uniform_points(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let n = count.max(2);
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

pub fn fit_structural_constants(
    nl: &Nonlinearity,
    eps: f64,
    mu: f64,
    sample_count: usize,
) -> Result<StructuralConstants> {
    fit_structural_constants_with(nl, eps, mu, sample_count, &FitOptions::default())
}

/// Fit `m`, `c1`, `c2`, `lambda` and `M` from samples of `phi'`.
///
/// `m` is one plus the slope of the least-squares line through
/// `(log z, log phi'(z))` over a geometric sample of `(0, eps]`; `c1`/`c2`
/// are the extreme values of `phi'(z) / z^{m-1}` on the same sample.
pub fn fit_structural_constants_with(
    nl: &Nonlinearity,
    eps: f64,
    mu: f64,
    sample_count: usize,
    options: &FitOptions,
) -> Result<StructuralConstants> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain(format!("mu must lie in (0, 1), got {mu}")));
    }
    if !(eps > 0.0 && eps <= 1.0 - mu) {
        return Err(Error::domain(format!("eps must lie in (0, 1 - mu], got {eps}")));
    }
    if 1.0 - mu > nl.domain_cap() {
        return Err(Error::domain("1 - mu exceeds the nonlinearity's domain cap"));
    }
    if sample_count < 16 {
        return Err(Error::domain("sample_count must be at least 16"));
    }
    let floor = nl.sampling_floor();
    let per_decade = lattice_density(sample_count);
    let zs = geometric_lattice(eps, floor, per_decade);
    if zs.len() < 4 {
        return Err(Error::Fit(format!(
            "too few sample points in [{floor:e}, {eps}] for a log-log fit"
        )));
    }
    let mut xs = Vec::with_capacity(zs.len());
    let mut ys = Vec::with_capacity(zs.len());
    for &z in &zs {
        let d = nl.phi_prime_unchecked(z);
        if !(d > 0.0) {
            return Err(Error::Fit(format!("phi'({z:e}) = {d} is not positive")));
        }
        xs.push(z.ln());
        ys.push(d.ln());
    }
    let line = numerics::fit_line(&xs, &ys)
        .ok_or_else(|| Error::Fit("degenerate regression".into()))?;
    if line.rms_residual > options.max_rms_residual {
        return Err(Error::Fit(format!(
            "log-log residual {:.3e} exceeds {:.3e}: phi is not of porous-medium type near 0",
            line.rms_residual, options.max_rms_residual
        )));
    }
    let m = 1.0 + line.slope;
    if !(m > 1.0) {
        return Err(Error::Fit(format!("fitted exponent m = {m} is not above 1")));
    }
    let (c1, c2) = degeneracy_bounds(nl, m, &zs);
    let uniform_count = sample_count.max(64);
    let top = 1.0 - mu;
    let lambda = uniform_points(eps, top, uniform_count)
        .map(|z| nl.phi_prime_unchecked(z))
        .fold(f64::INFINITY, f64::min);
    let m_cap = uniform_points(0.0, top, uniform_count)
        .map(|z| nl.phi_prime_unchecked(z))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(StructuralConstants {
        c1,
        c2,
        m,
        eps,
        lambda,
        m_cap,
        mu,
        fit_residual: line.rms_residual,
        per_decade,
        z_floor: floor,
        uniform_count,
    })
}

/// Extreme values of `phi'(z) / z^{m-1}` over `zs` for a fixed exponent.
pub fn degeneracy_bounds(nl: &Nonlinearity, m: f64, zs: &[f64]) -> (f64, f64) {
    zs.iter()
        .map(|&z| nl.phi_prime_unchecked(z) / z.powf(m - 1.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        })
}

/// One named inequality check with its worst-case signed slack.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    /// Minimum slack over the sample; negative means violated.
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.check(name).is_some_and(|c| c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub(crate) fn push(&mut self, name: &str, passed: bool, margin: f64, detail: String) {
        self.checks.push(HypothesisCheck {
            name: name.to_string(),
            passed,
            margin,
            detail,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Points in the uniform monotonicity sample on `[0, domain_cap]`.
    pub dense_samples: usize,
    /// `phi(domain_cap)` must exceed this for the surjectivity proxy.
    pub divergence_threshold: f64,
    /// Relative tolerance applied to the fitted-constant inequalities.
    pub rel_tol: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            dense_samples: 1024,
            divergence_threshold: 10.0,
            rel_tol: 1e-9,
        }
    }
}

pub fn validate_hypotheses(nl: &Nonlinearity, sc: &StructuralConstants) -> ValidationReport {
    validate_hypotheses_with(nl, sc, &ValidationOptions::default())
}

/// Check monotonicity, the divergence proxy for surjectivity, the two-sided
/// degeneracy bound, its integrated form `c1 z^m <= m phi(z) <= c2 z^m` and
/// the lower bound `lambda` away from zero. Failures are reported, not raised.
pub fn validate_hypotheses_with(
    nl: &Nonlinearity,
    sc: &StructuralConstants,
    options: &ValidationOptions,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let cap = nl.domain_cap();

    let phi0 = nl.phi_unchecked(0.0);
    report.push(
        "phi_zero",
        phi0.abs() <= 1e-14,
        -phi0.abs(),
        format!("phi(0) = {phi0:e}"),
    );

    // H1: strict monotonicity. Table nodes are checked pairwise first so a
    // broken table names the offending interval exactly.
    let mut worst = (f64::INFINITY, 0.0, 0.0);
    if let NonlinearityKind::Tabulated(t) = nl.kind() {
        let (zs, vs) = t.nodes();
        for i in 0..zs.len() - 1 {
            let inc = vs[i + 1] - vs[i];
            if inc < worst.0 {
                worst = (inc, zs[i], zs[i + 1]);
            }
        }
    }
    let dense: Vec<f64> = uniform_points(0.0, cap, options.dense_samples).collect();
    for w in dense.windows(2) {
        let inc = nl.phi_unchecked(w[1]) - nl.phi_unchecked(w[0]);
        if inc < worst.0 && !(worst.0 <= 0.0) {
            worst = (inc, w[0], w[1]);
        }
    }
    report.push(
        "H1_monotone",
        worst.0 > 0.0,
        worst.0,
        format!("smallest increment on [{}, {}]", worst.1, worst.2),
    );

    let top = nl.phi_unchecked(cap);
    report.push(
        "H2_divergence",
        top > options.divergence_threshold,
        top - options.divergence_threshold,
        format!("phi({cap}) = {top:e} vs threshold {}", options.divergence_threshold),
    );

    let zs = sc.degeneracy_samples();
    let tol_lo = options.rel_tol * sc.c1.abs();
    let tol_hi = options.rel_tol * sc.c2.abs();
    let mut h3 = (f64::INFINITY, f64::INFINITY);
    let mut eq7 = (f64::INFINITY, f64::INFINITY);
    for &z in &zs {
        let ratio = nl.phi_prime_unchecked(z) / z.powf(sc.m - 1.0);
        h3 = (h3.0.min(ratio - sc.c1), h3.1.min(sc.c2 - ratio));
        let integrated = sc.m * nl.phi_unchecked(z) / z.powf(sc.m);
        eq7 = (eq7.0.min(integrated - sc.c1), eq7.1.min(sc.c2 - integrated));
    }
    report.push(
        "H3_lower",
        h3.0 >= -tol_lo,
        h3.0,
        format!("min phi'(z)/z^(m-1) - c1 over {} points", zs.len()),
    );
    report.push(
        "H3_upper",
        h3.1 >= -tol_hi,
        h3.1,
        format!("min c2 - phi'(z)/z^(m-1) over {} points", zs.len()),
    );
    report.push(
        "integrated_lower",
        eq7.0 >= -tol_lo,
        eq7.0,
        "min m phi(z)/z^m - c1".into(),
    );
    report.push(
        "integrated_upper",
        eq7.1 >= -tol_hi,
        eq7.1,
        "min c2 - m phi(z)/z^m".into(),
    );

    let lam = uniform_points(sc.eps, 1.0 - sc.mu, sc.uniform_count)
        .map(|z| nl.phi_prime_unchecked(z) - sc.lambda)
        .fold(f64::INFINITY, f64::min);
    report.push(
        "lambda_lower",
        lam >= -options.rel_tol * sc.lambda.abs() && sc.lambda > 0.0,
        lam,
        format!("lambda = {:e}", sc.lambda),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_values() {
        let nl = Nonlinearity::power_law(2.0).unwrap();
        assert!((nl.phi(0.3).unwrap() - 0.09).abs() < 1e-15);
        assert_eq!(nl.phi(0.0).unwrap(), 0.0);
        assert_eq!(nl.phi_prime(0.0).unwrap(), 0.0);
        let nl3 = Nonlinearity::power_law(3.0).unwrap();
        assert!((nl3.phi_prime(0.5).unwrap() - 0.75).abs() < 1e-15);
        assert!((nl.beta(0.25).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(nl.beta(0.0).unwrap(), 0.0);
    }

    #[test]
    fn biofilm_matches_antiderivative() {
        let nl = Nonlinearity::biofilm(1.0, 1.0).unwrap();
        for &z in &[1e-8, 1e-3, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999_999] {
            let exact = -z - (-z as f64).ln_1p();
            let got = nl.phi(z).unwrap();
            assert!((got - exact).abs() <= 1e-12, "z={z}: {got} vs {exact}");
        }
        let v = nl.phi(0.5).unwrap();
        assert!((v - 0.193_147_180_559_945_3).abs() < 1e-15);
        assert!((nl.phi_prime(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((nl.beta(0.193_147).unwrap() - 0.5).abs() < 1e-5);
        assert!((nl.beta(v).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quadrature_tail_agrees_with_closed_form() {
        for &(a, b) in &[(1.0, 1.0), (1.5, 2.0), (2.0, 3.0), (3.0, 1.0)] {
            for &z in &[0.6, 0.9, 0.999, 0.999_999] {
                let closed = biofilm_tail_closed(a, b as u32, z);
                let quad = biofilm_tail_quadrature(a, b, z);
                assert!(
                    (closed - quad).abs() <= 1e-12 * closed.abs().max(1.0),
                    "a={a} b={b} z={z}: {closed} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn non_integer_exponent_uses_quadrature_consistently() {
        // b = 1.5 has no closed form; compare the two evaluation routes at the seam
        let nl = Nonlinearity::biofilm(1.2, 1.5).unwrap();
        let below = nl.phi(0.5).unwrap();
        let above = nl.phi(0.5 + 1e-12).unwrap();
        assert!((above - below).abs() < 1e-11);
    }

    #[test]
    fn domain_errors() {
        let nl = Nonlinearity::power_law(2.0).unwrap();
        assert!(matches!(nl.phi(-0.1), Err(Error::Domain(_))));
        assert!(matches!(nl.phi(1.0), Err(Error::Domain(_))));
        assert!(matches!(nl.beta(2.0), Err(Error::Domain(_))));
        assert!(Nonlinearity::power_law(1.0).is_err());
        assert!(Nonlinearity::biofilm(0.5, 1.0).is_err());
    }

    #[test]
    fn fit_exact_power_law() {
        let nl = Nonlinearity::power_law(2.5).unwrap();
        let sc = fit_structural_constants(&nl, 0.5, 0.25, 64).unwrap();
        assert!((sc.m - 2.5).abs() < 1e-6);
        assert!((sc.c1 - 2.5).abs() < 1e-6);
        assert!((sc.c2 - 2.5).abs() < 1e-6);
    }

    #[test]
    fn fit_biofilm_unit_exponents() {
        // phi'(z)/z = 1/(1-z) ranges over [1, 2] on (0, 1/2]
        let nl = Nonlinearity::biofilm(1.0, 1.0).unwrap();
        let sc = fit_structural_constants(&nl, 0.5, 0.25, 64).unwrap();
        assert!((sc.m - 2.0).abs() < 0.05, "m = {}", sc.m);
        assert!(sc.c1 > 0.9 && sc.c1 < 1.2, "c1 = {}", sc.c1);
        assert!(sc.c2 > 1.9 && sc.c2 < 2.1, "c2 = {}", sc.c2);
        // at the exact exponent the bounds are 1/(1 - z) at the lattice ends
        let (lo, hi) = degeneracy_bounds(&nl, 2.0, &sc.degeneracy_samples());
        assert!((hi - 2.0).abs() < 1e-12);
        assert!((lo - 1.0).abs() < 1e-8);
        // direct evaluation of the ratio at the sample ends
        let zs = sc.degeneracy_samples();
        let top = *zs.first().unwrap();
        let direct = nl.phi_prime(top).unwrap() / top;
        assert!((direct - 1.0 / (1.0 - top)).abs() < 1e-12);
    }

    #[test]
    fn fit_tabulated_cube() {
        let mut nodes = vec![(0.0, 0.0)];
        let n = 400;
        for i in 0..n {
            let z = 1e-6 * (0.9f64 / 1e-6).powf(i as f64 / (n - 1) as f64);
            nodes.push((z, z * z * z));
        }
        let nl = Nonlinearity::tabulated(nodes).unwrap();
        let sc = fit_structural_constants(&nl, 0.5, 0.25, 64).unwrap();
        assert!((sc.m - 3.0).abs() < 0.01, "m = {}", sc.m);
    }

    #[test]
    fn fit_rejects_non_porous_medium_shape() {
        // phi'(z) ~ exp(-1/z) is flatter than any power at 0
        let mut nodes = vec![(0.0, 0.0)];
        for i in 1..=400 {
            let z = 0.9 * i as f64 / 400.0;
            nodes.push((z, z * z * (-1.0 / z).exp()));
        }
        let nl = Nonlinearity::tabulated(nodes).unwrap();
        assert!(matches!(
            fit_structural_constants(&nl, 0.5, 0.25, 64),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn validation_power_law_fails_only_divergence() {
        let nl = Nonlinearity::power_law(2.0).unwrap();
        let sc = fit_structural_constants(&nl, 0.5, 0.25, 64).unwrap();
        let report = validate_hypotheses(&nl, &sc);
        assert!(report.passed("H1_monotone"));
        assert!(report.passed("H3_lower") && report.passed("H3_upper"));
        assert!(report.passed("integrated_lower") && report.passed("integrated_upper"));
        assert!(!report.passed("H2_divergence"));
    }

    #[test]
    fn validation_biofilm_all_pass() {
        let nl = Nonlinearity::biofilm(1.5, 2.0).unwrap();
        let sc = fit_structural_constants(&nl, 0.5, 0.25, 1024).unwrap();
        let report = validate_hypotheses(&nl, &sc);
        assert!(report.all_passed(), "{report:#?}");
    }

    #[test]
    fn validation_names_decreasing_table_interval() {
        let mut nodes: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let z = 0.9 * i as f64 / 20.0;
                (z, z * z)
            })
            .collect();
        nodes[11].1 = nodes[10].1 - 0.01;
        let z10 = nodes[10].0;
        let z11 = nodes[11].0;
        let nl = Nonlinearity::tabulated(nodes).unwrap();
        let sc = fit_structural_constants(&nl, 0.3, 0.1, 64).unwrap();
        let report = validate_hypotheses(&nl, &sc);
        let h1 = report.check("H1_monotone").unwrap();
        assert!(!h1.passed);
        assert!(h1.detail.contains(&format!("[{z10}, {z11}]")), "{}", h1.detail);
    }

    #[test]
    fn lattice_is_nested_under_shrinking_eps() {
        let big = geometric_lattice(0.5, 1e-9, 8);
        let small = geometric_lattice(big[5], 1e-9, 8);
        assert!(small.iter().all(|z| big.iter().any(|b| (b - z).abs() <= 1e-15 * z)));
    }
}
