//! TOML run configuration.
//!
//! Every section has defaults, so a minimal document only names what
//! differs from them. [`RunConfig::to_toml`] echoes the resolved values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::barenblatt::Barenblatt;
use crate::biofilm::BiofilmParams;
use crate::error::{Error, Result};
use crate::grid::{Axis, Field, Grid};
use crate::nonlinearity::{fit_structural_constants, Nonlinearity, StructuralConstants, DEFAULT_DOMAIN_CAP};
use crate::reaction::{ReactionKind, ReactionTerm, SpaceTimeFn};
use crate::regularity::{compute_degiorgi_constants, default_theta, DeGiorgiConstants, DEFAULT_ETA};
use crate::solver::{BoundaryCondition, SolverConfig, SIDE_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    #[default]
    Scalar,
    Biofilm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lo: vec![0.0],
            hi: vec![1.0],
            cells: vec![128],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityChoice {
    #[default]
    PowerLaw,
    Biofilm,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityChoice,
    pub m: f64,
    pub a: f64,
    pub b: f64,
    /// `(z, phi(z))` nodes for the tabulated kind.
    pub table: Vec<[f64; 2]>,
    pub domain_cap: f64,
    pub scale: f64,
}

impl Default for NonlinearitySpec {
    fn default() -> Self {
        NonlinearitySpec {
            kind: NonlinearityChoice::PowerLaw,
            m: 2.0,
            a: 1.0,
            b: 1.0,
            table: Vec::new(),
            domain_cap: DEFAULT_DOMAIN_CAP,
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReactionChoice {
    #[default]
    Zero,
    Linear,
    Monod,
    PorousFisher,
    SingularPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReactionSpec {
    pub kind: ReactionChoice,
    /// Coefficient of the linear kind.
    pub g: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub p: f64,
    pub q: f64,
    pub c: f64,
    pub coeff: f64,
    pub exponent: f64,
    /// Declared growth constant `L`; derived from the coefficients when absent.
    pub bound: Option<f64>,
    pub m0: f64,
}

impl Default for ReactionSpec {
    fn default() -> Self {
        ReactionSpec {
            kind: ReactionChoice::Zero,
            g: 0.0,
            k2: 0.0,
            k3: 0.0,
            k4: 1.0,
            p: 1.0,
            q: 1.0,
            c: 0.0,
            coeff: 0.0,
            exponent: 0.0,
            bound: None,
            m0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialChoice {
    #[default]
    Constant,
    Barenblatt,
    Bump,
    Disc,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub kind: InitialChoice,
    pub value: f64,
    /// Barenblatt peak at `time` (used when `mass` is absent).
    pub peak: f64,
    pub mass: Option<f64>,
    /// Barenblatt time of the initial profile.
    pub time: f64,
    pub center: Vec<f64>,
    pub width: f64,
    pub radius: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec {
            kind: InitialChoice::Constant,
            value: 0.0,
            peak: 0.25,
            mass: None,
            time: 1.0,
            center: Vec::new(),
            width: 0.1,
            radius: 0.1,
            lo: 0.1,
            hi: 0.8,
        }
    }
}

/// `"neumann"`, or a number for a Dirichlet value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SideSpec {
    Dirichlet(f64),
    Named(String),
}

impl SideSpec {
    fn resolve(&self, side: &str) -> Result<BoundaryCondition> {
        match self {
            SideSpec::Dirichlet(g) => Ok(BoundaryCondition::Dirichlet(*g)),
            SideSpec::Named(s) if s == "neumann" => Ok(BoundaryCondition::Neumann),
            SideSpec::Named(s) => Err(Error::Validation(format!(
                "boundary `{side}` must be \"neumann\" or a number, got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySpec {
    pub x_lo: SideSpec,
    pub x_hi: SideSpec,
    pub y_lo: SideSpec,
    pub y_hi: SideSpec,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        let n = || SideSpec::Named("neumann".into());
        BoundarySpec {
            x_lo: n(),
            x_hi: n(),
            y_lo: n(),
            y_hi: n(),
        }
    }
}

impl BoundarySpec {
    pub fn resolve(&self) -> Result<[BoundaryCondition; 4]> {
        let sides = [&self.x_lo, &self.x_hi, &self.y_lo, &self.y_hi];
        let mut out = [BoundaryCondition::Neumann; 4];
        for (k, s) in sides.iter().enumerate() {
            out[k] = s.resolve(SIDE_NAMES[k])?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub clip_delta: f64,
    pub snapshot_every: usize,
    pub bc: BoundarySpec,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSpec {
            dt: d.dt,
            t_start: d.t_start,
            t_end: d.t_end,
            newton_tol: d.newton_tol,
            newton_max_iter: d.newton_max_iter,
            clip_delta: d.clip_delta,
            snapshot_every: d.snapshot_every,
            bc: BoundarySpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiofilmSpec {
    pub d1: f64,
    pub d2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub a: f64,
    pub b: f64,
    /// Initial nutrient concentration, uniform.
    pub nutrient: f64,
    pub nutrient_bc: BoundarySpec,
    /// Threshold defining the biofilm region `{M > region_tol}`.
    pub region_tol: f64,
}

impl Default for BiofilmSpec {
    fn default() -> Self {
        BiofilmSpec {
            d1: 1.0,
            d2: 0.01,
            k1: 1.0,
            k2: 0.0,
            k3: 1.0,
            k4: 0.5,
            a: 1.0,
            b: 1.0,
            nutrient: 1.0,
            nutrient_bc: BoundarySpec::default(),
            region_tol: 1e-6,
        }
    }
}

impl BiofilmSpec {
    pub fn params(&self) -> BiofilmParams {
        BiofilmParams {
            d1: self.d1,
            d2: self.d2,
            k1: self.k1,
            k2: self.k2,
            k3: self.k3,
            k4: self.k4,
            a: self.a,
            b: self.b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructureSpec {
    pub eps: f64,
    pub mu: f64,
    pub samples: usize,
    pub c_struct: f64,
    pub n0: u32,
    pub n_star: u32,
    /// Defaults to `4^{1-m}`.
    pub theta: Option<f64>,
    pub eta: f64,
}

impl Default for StructureSpec {
    fn default() -> Self {
        StructureSpec {
            eps: 0.5,
            mu: 0.01,
            samples: 64,
            c_struct: 1.0,
            n0: 3,
            n_star: 3,
            theta: None,
            eta: DEFAULT_ETA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CylinderScan {
    pub center: Vec<f64>,
    pub t0: f64,
    pub radius: f64,
    /// Defaults to the measured oscillation over the cylinder.
    pub omega: Option<f64>,
}

impl Default for CylinderScan {
    fn default() -> Self {
        CylinderScan {
            center: Vec::new(),
            t0: 1.0,
            radius: 0.01,
            omega: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HolderModeChoice {
    #[default]
    Classical,
    Intrinsic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderFit {
    pub center: Vec<f64>,
    pub t0: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
    pub mode: HolderModeChoice,
    pub theta: f64,
    pub omega: f64,
}

impl Default for HolderFit {
    fn default() -> Self {
        HolderFit {
            center: Vec::new(),
            t0: 1.0,
            r_min: 1e-3,
            r_max: 1e-1,
            count: 9,
            mode: HolderModeChoice::Classical,
            theta: 1.0,
            omega: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSpec {
    pub r0: f64,
    pub omega0: f64,
    pub n_max: usize,
    pub switch_at: Option<usize>,
}

impl Default for SchemeSpec {
    fn default() -> Self {
        SchemeSpec {
            r0: 0.01,
            omega0: 0.5,
            n_max: 4,
            switch_at: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EstimateChoice {
    #[default]
    Lower,
    Upper,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSpec {
    pub kind: EstimateChoice,
    pub center: Vec<f64>,
    pub t0: f64,
    pub radius: f64,
    pub omega: f64,
    pub plateau: f64,
    /// Levels; integers for the logarithmic estimate.
    pub k: f64,
    pub l: f64,
    /// Slice times of the logarithmic estimate.
    pub t: f64,
    pub tau: f64,
}

impl Default for EstimateSpec {
    fn default() -> Self {
        EstimateSpec {
            kind: EstimateChoice::Lower,
            center: Vec::new(),
            t0: 1.0,
            radius: 0.05,
            omega: 0.5,
            plateau: 0.5,
            k: 0.2,
            l: 0.1,
            t: 0.9,
            tau: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSpec {
    pub cylinders: Vec<CylinderScan>,
    pub holder: Vec<HolderFit>,
    pub schemes: Vec<SchemeSpec>,
    pub estimates: Vec<EstimateSpec>,
    /// Upper bound on compared pairs for the Hölder seminorm (0 skips it).
    pub seminorm_pairs: usize,
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub equation: Equation,
    pub seed: u64,
    pub output: Option<String>,
    pub grid: GridSpec,
    pub nonlinearity: NonlinearitySpec,
    pub reaction: ReactionSpec,
    pub initial: InitialSpec,
    pub solver: SolverSpec,
    pub biofilm: BiofilmSpec,
    pub structure: StructureSpec,
    pub diagnostics: DiagnosticsSpec,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Key named in a serde message such as "unknown field `x`", or the key
/// written on the offending line.
fn field_of(message: &str, line: &str) -> String {
    if let Some(start) = message.find('`') {
        if let Some(len) = message[start + 1..].find('`') {
            return message[start + 1..start + 1 + len].to_string();
        }
    }
    let line = line.trim();
    if let Some(eq) = line.find('=') {
        return line[..eq].trim().to_string();
    }
    line.trim_matches(|c| c == '[' || c == ']').to_string()
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, field) = match e.span() {
            Some(span) => {
                let line = line_of(text, span.start);
                let src = text.lines().nth(line - 1).unwrap_or("");
                (line, field_of(e.message(), src))
            }
            None => (0, field_of(e.message(), "")),
        };
        Error::Parse {
            line,
            field,
            message: e.message().trim().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

/// Re-tag domain errors from constructors as validation failures.
fn as_validation<T>(r: Result<T>, what: &str) -> Result<T> {
    r.map_err(|e| match e {
        Error::Domain(m) => invalid(format!("{what}: {m}")),
        other => other,
    })
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn dim(&self) -> usize {
        self.grid.cells.len()
    }

    /// Check every cross-field invariant.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.cells.is_empty() || g.cells.len() > 2 || g.lo.len() != g.cells.len() || g.hi.len() != g.cells.len() {
            return Err(invalid("grid needs matching lo, hi and cells lists of length 1 or 2"));
        }
        let grid = self.grid()?;
        let nl = self.nonlinearity()?;
        let m = self.exponent(&nl)?;
        let r = &self.reaction;
        if !(r.m0 >= 0.0 && r.m0 < m) {
            return Err(invalid(format!(
                "reaction exponent m0 = {} must lie in [0, m) with m = {m}",
                r.m0
            )));
        }
        self.reaction_term()?;
        let solver = self.solver_config()?;
        as_validation(solver.validate(), "solver")?;
        let mut bcs = solver.bc.to_vec();
        if self.equation == Equation::Biofilm {
            as_validation(self.biofilm.params().validate(), "biofilm")?;
            if !(self.biofilm.nutrient >= 0.0) {
                return Err(invalid("initial nutrient must be non-negative"));
            }
            self.biofilm.nutrient_bc.resolve()?;
        }
        bcs.truncate(2 * grid.dim());
        for (side, bc) in SIDE_NAMES.iter().zip(&bcs) {
            if let BoundaryCondition::Dirichlet(v) = bc {
                if *v >= nl.domain_cap() {
                    return Err(invalid(format!(
                        "domain_cap {} must exceed the Dirichlet value {v} on {side}",
                        nl.domain_cap()
                    )));
                }
            }
        }
        let s = &self.structure;
        if !(s.eps > 0.0 && s.eps < 1.0) || !(s.mu > 0.0 && s.mu < 1.0) || s.samples < 16 {
            return Err(invalid("structure needs eps, mu in (0, 1) and at least 16 samples"));
        }
        for c in &self.diagnostics.cylinders {
            self.check_point(&c.center, "cylinder centre")?;
        }
        for h in &self.diagnostics.holder {
            self.check_point(&h.center, "Hölder centre")?;
            if h.count < 4 || !(h.r_min > 0.0 && h.r_max > h.r_min) {
                return Err(invalid("Hölder fits need count >= 4 and 0 < r_min < r_max"));
            }
        }
        for e in &self.diagnostics.estimates {
            self.check_point(&e.center, "estimate centre")?;
            if e.kind == EstimateChoice::Log && (e.k.fract() != 0.0 || e.l.fract() != 0.0 || e.k < 1.0 || e.l <= e.k) {
                return Err(invalid("logarithmic estimates need integer levels 1 <= k < l"));
            }
        }
        self.initial_field()?;
        Ok(())
    }

    fn check_point(&self, p: &[f64], what: &str) -> Result<()> {
        if !p.is_empty() && p.len() != self.dim() {
            return Err(invalid(format!("{what} has {} coordinates, grid has {}", p.len(), self.dim())));
        }
        Ok(())
    }

    /// A point, defaulting to the domain centre when left empty.
    pub fn point_or_center(&self, p: &[f64]) -> Vec<f64> {
        if p.is_empty() {
            self.grid.lo.iter().zip(&self.grid.hi).map(|(a, b)| 0.5 * (a + b)).collect()
        } else {
            p.to_vec()
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        let axes = (0..self.grid.cells.len())
            .map(|k| Axis::new(self.grid.lo[k], self.grid.hi[k], self.grid.cells[k]))
            .collect::<Result<Vec<_>>>();
        as_validation(axes.and_then(Grid::new), "grid")
    }

    /// The scalar-equation nonlinearity, or `d2` times the biofilm one.
    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        if self.equation == Equation::Biofilm {
            return as_validation(self.biofilm.params().nonlinearity(), "biofilm");
        }
        let s = &self.nonlinearity;
        let base = match s.kind {
            NonlinearityChoice::PowerLaw => Nonlinearity::power_law(s.m),
            NonlinearityChoice::Biofilm => Nonlinearity::biofilm(s.a, s.b),
            NonlinearityChoice::Tabulated => Nonlinearity::tabulated(s.table.iter().map(|p| (p[0], p[1])).collect()),
        };
        let nl = base.and_then(|n| n.with_domain_cap(s.domain_cap)).and_then(|n| n.with_scale(s.scale));
        as_validation(nl, "nonlinearity")
    }

    /// Degeneracy exponent: exact for the closed-form kinds, fitted otherwise.
    pub fn exponent(&self, nl: &Nonlinearity) -> Result<f64> {
        match (self.equation, self.nonlinearity.kind) {
            (Equation::Biofilm, _) => Ok(self.biofilm.b + 1.0),
            (_, NonlinearityChoice::PowerLaw) => Ok(self.nonlinearity.m),
            (_, NonlinearityChoice::Biofilm) => Ok(self.nonlinearity.b + 1.0),
            (_, NonlinearityChoice::Tabulated) => Ok(self.structural_constants(nl)?.m),
        }
    }

    pub fn structural_constants(&self, nl: &Nonlinearity) -> Result<StructuralConstants> {
        let s = &self.structure;
        fit_structural_constants(nl, s.eps, s.mu, s.samples)
    }

    pub fn degiorgi_constants(&self, sc: &StructuralConstants, rt: &ReactionTerm) -> Result<DeGiorgiConstants> {
        let s = &self.structure;
        let theta = s.theta.unwrap_or_else(|| default_theta(sc.m));
        compute_degiorgi_constants(sc, rt, self.dim(), s.c_struct, s.n0, s.n_star, theta, s.eta)
    }

    /// The scalar reaction, or the biomass reaction of the coupled system.
    pub fn reaction_term(&self) -> Result<ReactionTerm> {
        if self.equation == Equation::Biofilm {
            return as_validation(self.biofilm.params().biomass_reaction(), "biofilm");
        }
        let r = &self.reaction;
        let rt = match r.kind {
            ReactionChoice::Zero => Ok(ReactionTerm::zero()),
            ReactionChoice::Linear => ReactionTerm::new(
                ReactionKind::LinearInU {
                    g: SpaceTimeFn::Constant(r.g),
                    g_bound: r.g.abs(),
                },
                r.bound.unwrap_or(r.g.abs()),
                r.m0,
            ),
            ReactionChoice::Monod => ReactionTerm::new(
                ReactionKind::MonodBiomass {
                    k2: r.k2,
                    k3: r.k3,
                    k4: r.k4,
                },
                r.bound.unwrap_or(r.k2.abs() + r.k3.abs()),
                r.m0,
            ),
            ReactionChoice::PorousFisher => ReactionTerm::new(
                ReactionKind::PorousFisher { p: r.p, q: r.q, c: r.c },
                r.bound.unwrap_or(1.0 + r.c.abs()),
                r.m0,
            ),
            ReactionChoice::SingularPower => ReactionTerm::new(
                ReactionKind::SingularPower {
                    coeff: r.coeff,
                    exponent: r.exponent,
                },
                r.bound.unwrap_or(r.coeff.abs()),
                r.m0,
            ),
        };
        as_validation(rt, "reaction")
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        Ok(SolverConfig {
            dt: s.dt,
            t_end: s.t_end,
            t_start: s.t_start,
            bc: s.bc.resolve()?,
            newton_tol: s.newton_tol,
            newton_max_iter: s.newton_max_iter,
            clip_delta: s.clip_delta,
            snapshot_every: s.snapshot_every,
        })
    }

    /// The initial state; the random kind draws from a generator seeded with `seed`.
    pub fn initial_field(&self) -> Result<Field> {
        let grid = self.grid()?;
        let i = &self.initial;
        let center = self.point_or_center(&i.center);
        let dist = |x: &[f64]| center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum::<f64>().sqrt();
        let field = match i.kind {
            InitialChoice::Constant => Field::constant(grid, i.value),
            InitialChoice::Barenblatt => {
                let m = match self.nonlinearity.kind {
                    NonlinearityChoice::PowerLaw if self.equation == Equation::Scalar => self.nonlinearity.m,
                    _ => return Err(invalid("Barenblatt data needs a scalar power-law nonlinearity")),
                };
                let dim = grid.dim();
                let b = match i.mass {
                    Some(mass) => Barenblatt::new(m, mass, dim),
                    None => Barenblatt::with_peak(m, i.peak, i.time, dim),
                };
                let b = as_validation(b, "initial")?;
                let values = (0..grid.len())
                    .map(|idx| {
                        let c = grid.center(idx);
                        let x: Vec<f64> = c[..dim].iter().zip(&center).map(|(a, o)| a - o).collect();
                        b.value(&x, i.time)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Field::new(grid, values)?
            }
            InitialChoice::Bump => Field::from_fn(grid, |x| {
                let s = dist(x) / i.width;
                if s < 1.0 {
                    i.value * (1.0 - s * s).powi(2)
                } else {
                    0.0
                }
            }),
            InitialChoice::Disc => Field::from_fn(grid, |x| if dist(x) <= i.radius { i.value } else { 0.0 }),
            InitialChoice::Random => {
                if !(i.lo <= i.hi) {
                    return Err(invalid("random initial data needs lo <= hi"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let values = (0..grid.len()).map(|_| rng.gen_range(i.lo..=i.hi)).collect();
                Field::new(grid, values)?
            }
        };
        as_validation(field.check_unit_range(), "initial")?;
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scalar_config() {
        let cfg = parse_config("[nonlinearity]\nm = 2.0\n").unwrap();
        assert_eq!(cfg.equation, Equation::Scalar);
        assert_eq!(cfg.grid.cells, vec![128]);
        assert_eq!(cfg.solver_config().unwrap(), SolverConfig::default());
        let echoed = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(echoed, cfg);
    }

    #[test]
    fn exponent_violation_is_validation_error() {
        let err = parse_config("[nonlinearity]\nm = 2.0\n[reaction]\nkind = \"zero\"\nm0 = 2.0\n").unwrap_err();
        assert!(matches!(&err, Error::Validation(m) if m.contains("m0")), "{err}");
    }

    #[test]
    fn biofilm_config() {
        let text = "equation = \"biofilm\"\n[grid]\nlo = [0.0, 0.0]\nhi = [1.0, 1.0]\ncells = [16, 16]\n[biofilm]\na = 1.0\nb = 1.0\nk1 = 0.5\nk3 = 1.0\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.equation, Equation::Biofilm);
        assert!(cfg.nonlinearity().unwrap().is_singular());
    }

    #[test]
    fn parse_errors_carry_line_and_field() {
        let err = parse_config("seed = 1\n[solver]\ndt = \"fast\"\n").unwrap_err();
        match err {
            Error::Parse { line, field, .. } => {
                assert_eq!(line, 3);
                assert_eq!(field, "dt");
            }
            other => panic!("{other}"),
        }
        let err = parse_config("[grid]\nspacing = 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, ref field, .. } if field == "spacing"), "{err}");
    }

    #[test]
    fn dirichlet_must_sit_below_cap() {
        let text = "[nonlinearity]\nkind = \"biofilm\"\ndomain_cap = 0.9\n[solver.bc]\nx_lo = 0.95\n";
        assert!(matches!(parse_config(text), Err(Error::Validation(_))));
    }

    #[test]
    fn random_data_is_seeded() {
        let text = "seed = 11\n[initial]\nkind = \"random\"\nlo = 0.1\nhi = 0.8\n";
        let a = parse_config(text).unwrap().initial_field().unwrap();
        let b = parse_config(text).unwrap().initial_field().unwrap();
        assert_eq!(a, b);
        assert!(a.min() >= 0.1 && a.max() <= 0.8);
    }
}
