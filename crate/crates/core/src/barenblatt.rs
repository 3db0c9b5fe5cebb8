//! Self-similar source solutions of `u_t = Δu^m`.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Source-type solution `t^{-α}(C - k|x|² t^{-2β})₊^{1/(m-1)}` with given total mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    pub m: f64,
    pub dim: usize,
    pub mass: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
    pub c: f64,
}

impl Barenblatt {
    pub fn new(m: f64, mass: f64, dim: usize) -> Result<Self> {
        if !(m > 1.0) {
            return Err(Error::domain(format!("exponent must exceed 1, got {m}")));
        }
        if !(mass > 0.0) {
            return Err(Error::domain(format!("mass must be positive, got {mass}")));
        }
        if dim == 0 || dim > 3 {
            return Err(Error::domain(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        let n = dim as f64;
        let alpha = n / (n * (m - 1.0) + 2.0);
        let beta = alpha / n;
        let k = alpha * (m - 1.0) / (2.0 * m * n);
        let p = 1.0 / (m - 1.0);
        let ball_integral =
            std::f64::consts::PI.powf(n / 2.0) * gamma(p + 1.0) / gamma(p + 1.0 + n / 2.0);
        let c = (mass * k.powf(n / 2.0) / ball_integral).powf(1.0 / (p + n / 2.0));
        Ok(Barenblatt {
            m,
            dim,
            mass,
            alpha,
            beta,
            k,
            c,
        })
    }

    /// Profile with the given peak value at time `t`.
    pub fn with_peak(m: f64, peak: f64, t: f64, dim: usize) -> Result<Self> {
        let unit = Barenblatt::new(m, 1.0, dim)?;
        let unit_peak = unit.value(&vec![0.0; dim], t)?;
        // the peak scales like mass^{p / (p + N/2)}
        let n = dim as f64;
        let p = 1.0 / (m - 1.0);
        let exponent = p / (p + n / 2.0);
        let mass = (peak / unit_peak).powf(1.0 / exponent);
        Barenblatt::new(m, mass, dim)
    }

    pub fn value(&self, x: &[f64], t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("time must be positive, got {t}")));
        }
        let r2: f64 = x.iter().take(self.dim).map(|v| v * v).sum();
        let inner = self.c - self.k * r2 * t.powf(-2.0 * self.beta);
        if inner <= 0.0 {
            return Ok(0.0);
        }
        Ok(t.powf(-self.alpha) * inner.powf(1.0 / (self.m - 1.0)))
    }

    /// Radius of the support at time `t`.
    pub fn support_radius(&self, t: f64) -> f64 {
        (self.c / self.k).sqrt() * t.powf(self.beta)
    }

    pub fn peak(&self, t: f64) -> f64 {
        t.powf(-self.alpha) * self.c.powf(1.0 / (self.m - 1.0))
    }
}

/// Value of the source solution with exponent `m` and total `mass` at `(x, t)`.
pub fn barenblatt_exact(m: f64, mass: f64, x: &[f64], t: f64, dim: usize) -> Result<f64> {
    if x.len() < dim {
        return Err(Error::domain("point has fewer coordinates than the dimension"));
    }
    Barenblatt::new(m, mass, dim)?.value(x, t)
}
