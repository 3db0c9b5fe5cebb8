//! Reaction terms `f(x, t, z)` and the growth bound `|f(·, z)| <= L z^{-m0}`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::nonlinearity::StructuralConstants;

/// Evaluation floor for kinds that are singular at `z = 0`.
pub const DEFAULT_Z_FLOOR: f64 = 1e-12;

/// A coefficient depending on position and time.
#[derive(Clone)]
pub enum SpaceTimeFn {
    Constant(f64),
    Custom(Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>),
}

impl SpaceTimeFn {
    pub fn custom(f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        SpaceTimeFn::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        match self {
            SpaceTimeFn::Constant(c) => *c,
            SpaceTimeFn::Custom(f) => f(x, t),
        }
    }
}

impl fmt::Debug for SpaceTimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceTimeFn::Constant(c) => write!(f, "Constant({c})"),
            SpaceTimeFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ReactionKind {
    Zero,
    /// `g(x, t) z` with `|g| <= g_bound`.
    LinearInU { g: SpaceTimeFn, g_bound: f64 },
    /// `-k2 z + k3 C z / (k4 + C)` with `C` the companion nutrient value.
    MonodBiomass { k2: f64, k3: f64, k4: f64 },
    /// `z^p (1 - z)^q + c`.
    PorousFisher { p: f64, q: f64, c: f64 },
    /// `coeff z^{-exponent}`.
    SingularPower { coeff: f64, exponent: f64 },
}

/// Where and when a reaction is evaluated.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReactionContext<'a> {
    pub x: &'a [f64],
    pub t: f64,
    /// Companion nutrient value for the Monod kind; bulk value 1 when absent.
    pub concentration: Option<f64>,
}

impl<'a> ReactionContext<'a> {
    pub fn new(x: &'a [f64], t: f64) -> Self {
        ReactionContext {
            x,
            t,
            concentration: None,
        }
    }

    pub fn with_concentration(mut self, c: f64) -> Self {
        self.concentration = Some(c);
        self
    }
}

/// A reaction term together with its declared growth bound.
#[derive(Debug, Clone)]
pub struct ReactionTerm {
    pub kind: ReactionKind,
    pub bound_l: f64,
    pub exponent_m0: f64,
    pub z_floor: f64,
}

impl ReactionTerm {
    pub fn new(kind: ReactionKind, bound_l: f64, exponent_m0: f64) -> Result<Self> {
        if !(bound_l >= 0.0) || !bound_l.is_finite() {
            return Err(Error::domain(format!("bound L must be non-negative, got {bound_l}")));
        }
        if !(exponent_m0 >= 0.0) || !exponent_m0.is_finite() {
            return Err(Error::domain(format!("exponent m0 must be non-negative, got {exponent_m0}")));
        }
        match &kind {
            ReactionKind::MonodBiomass { k2, k3, k4 } => {
                if !(*k2 >= 0.0 && *k3 >= 0.0 && *k4 > 0.0) {
                    return Err(Error::domain("Monod constants need k2, k3 >= 0 and k4 > 0"));
                }
            }
            ReactionKind::PorousFisher { q, .. } if !(*q >= 0.0) => {
                return Err(Error::domain("Fisher exponent q must be non-negative"));
            }
            ReactionKind::LinearInU { g_bound, .. } if !(*g_bound >= 0.0) => {
                return Err(Error::domain("bound on g must be non-negative"));
            }
            _ => {}
        }
        Ok(ReactionTerm {
            kind,
            bound_l,
            exponent_m0,
            z_floor: DEFAULT_Z_FLOOR,
        })
    }

    pub fn zero() -> Self {
        ReactionTerm {
            kind: ReactionKind::Zero,
            bound_l: 0.0,
            exponent_m0: 0.0,
            z_floor: DEFAULT_Z_FLOOR,
        }
    }

    /// Monod biomass growth, declared with its natural bound `L = k2 + k3`, `m0 = 0`.
    pub fn monod(k2: f64, k3: f64, k4: f64) -> Result<Self> {
        Self::new(ReactionKind::MonodBiomass { k2, k3, k4 }, k2 + k3, 0.0)
    }

    /// `g z` with constant `g`, declared with `L = |g|`, `m0 = 0`.
    pub fn linear(g: f64) -> Result<Self> {
        Self::new(
            ReactionKind::LinearInU {
                g: SpaceTimeFn::Constant(g),
                g_bound: g.abs(),
            },
            g.abs(),
            0.0,
        )
    }

    pub fn with_z_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor < 1.0) {
            return Err(Error::domain("z floor must lie in (0, 1)"));
        }
        self.z_floor = floor;
        Ok(self)
    }

    fn is_singular_at_zero(&self) -> bool {
        match &self.kind {
            ReactionKind::SingularPower { exponent, .. } => *exponent > 0.0,
            ReactionKind::PorousFisher { p, .. } => *p < 0.0,
            _ => false,
        }
    }

    /// True when `f(·, 0) = 0` for every point and time.
    pub fn vanishes_at_zero(&self) -> bool {
        match &self.kind {
            ReactionKind::Zero | ReactionKind::LinearInU { .. } | ReactionKind::MonodBiomass { .. } => true,
            ReactionKind::PorousFisher { p, c, .. } => *p > 0.0 && *c == 0.0,
            ReactionKind::SingularPower { coeff, .. } => *coeff == 0.0,
        }
    }

    /// `f(x, t, z)` for `z` in `[0, 1)`.
    pub fn eval(&self, ctx: ReactionContext<'_>, z: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(Error::domain(format!("reaction evaluated at negative z = {z}")));
        }
        if z >= 1.0 {
            return Err(Error::domain(format!("reaction evaluated at z = {z} >= 1")));
        }
        Ok(self.eval_unchecked(ctx, z))
    }

    pub(crate) fn eval_unchecked(&self, ctx: ReactionContext<'_>, z: f64) -> f64 {
        let z = if self.is_singular_at_zero() {
            z.max(self.z_floor)
        } else {
            z
        };
        match &self.kind {
            ReactionKind::Zero => 0.0,
            ReactionKind::LinearInU { g, .. } => g.eval(ctx.x, ctx.t) * z,
            ReactionKind::MonodBiomass { k2, k3, k4 } => {
                let c = ctx.concentration.unwrap_or(1.0).max(0.0);
                -k2 * z + k3 * c * z / (k4 + c)
            }
            ReactionKind::PorousFisher { p, q, c } => {
                let growth = if *p == 0.0 { 1.0 } else { z.powf(*p) };
                let decay = if *q == 0.0 { 1.0 } else { (1.0 - z).powf(*q) };
                growth * decay + c
            }
            ReactionKind::SingularPower { coeff, exponent } => coeff * z.powf(-exponent),
        }
    }
}

/// Region of `(x, t, C)` sampled by [`validate_growth_bound_on`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Range of the companion concentration for the Monod kind.
    pub concentration: (f64, f64),
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox {
            lo: vec![0.0],
            hi: vec![1.0],
            t_lo: 0.0,
            t_hi: 1.0,
            concentration: (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthBoundReport {
    /// Smallest `L` with `|f| z^{m0} <= L` over the sample.
    pub minimal_l: f64,
    pub declared_l: f64,
    pub exponent_m0: f64,
    /// Exponent of the paired nonlinearity.
    pub m: f64,
    pub bound_holds: bool,
    /// `m0 < m`.
    pub exponent_admissible: bool,
    pub samples: usize,
}

impl GrowthBoundReport {
    pub fn passed(&self) -> bool {
        self.bound_holds && self.exponent_admissible
    }
}

pub fn validate_growth_bound(
    rt: &ReactionTerm,
    sc: &StructuralConstants,
    sample_count: usize,
) -> Result<GrowthBoundReport> {
    validate_growth_bound_on(rt, sc, sample_count, &SampleBox::default())
}

/// Sample `z` geometrically in `(0, 1)` and `(x, t)` on a lattice of `region`,
/// then report the smallest admissible `L` at the declared exponent.
pub fn validate_growth_bound_on(
    rt: &ReactionTerm,
    sc: &StructuralConstants,
    sample_count: usize,
    region: &SampleBox,
) -> Result<GrowthBoundReport> {
    if sample_count < 64 {
        return Err(Error::domain("sample_count must be at least 64"));
    }
    if region.lo.len() != region.hi.len() || region.lo.is_empty() {
        return Err(Error::domain("sample box bounds have mismatched dimensions"));
    }
    const LATTICE: usize = 5;
    let lerp = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (LATTICE - 1) as f64;
    let z_lo: f64 = 1e-12;
    let z_hi: f64 = 1.0 - 1e-6;
    let zs: Vec<f64> = (0..sample_count)
        .map(|j| {
            let s = j as f64 / (sample_count - 1) as f64;
            // geometric towards 0, then mirrored towards 1
            if s <= 0.5 {
                z_lo * (0.5 / z_lo).powf(2.0 * s)
            } else {
                1.0 - (1.0 - z_hi) * (0.5 / (1.0 - z_hi)).powf(2.0 * (1.0 - s))
            }
        })
        .collect();
    let dim = region.lo.len();
    let spatial: Vec<Vec<f64>> = if dim == 1 {
        (0..LATTICE).map(|i| vec![lerp(region.lo[0], region.hi[0], i)]).collect()
    } else {
        let mut pts = Vec::new();
        for i in 0..LATTICE {
            for j in 0..LATTICE {
                pts.push(vec![
                    lerp(region.lo[0], region.hi[0], i),
                    lerp(region.lo[1], region.hi[1], j),
                ]);
            }
        }
        pts
    };
    let concentrations: Vec<Option<f64>> = match rt.kind {
        ReactionKind::MonodBiomass { .. } => (0..LATTICE)
            .map(|i| Some(lerp(region.concentration.0, region.concentration.1, i)))
            .collect(),
        _ => vec![None],
    };
    let mut minimal = 0.0f64;
    let mut samples = 0;
    for x in &spatial {
        for it in 0..LATTICE {
            let t = lerp(region.t_lo, region.t_hi, it);
            for &c in &concentrations {
                let ctx = ReactionContext {
                    x,
                    t,
                    concentration: c,
                };
                for &z in &zs {
                    let v = rt.eval_unchecked(ctx, z).abs() * z.powf(rt.exponent_m0);
                    minimal = minimal.max(v);
                    samples += 1;
                }
            }
        }
    }
    Ok(GrowthBoundReport {
        minimal_l: minimal,
        declared_l: rt.bound_l,
        exponent_m0: rt.exponent_m0,
        m: sc.m,
        bound_holds: minimal <= rt.bound_l * (1.0 + 1e-12) + 1e-15,
        exponent_admissible: rt.exponent_m0 < sc.m,
        samples,
    })
}
