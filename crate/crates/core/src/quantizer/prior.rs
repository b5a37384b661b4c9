use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math::{exp, ln, ln_gamma};
use crate::stats::{find_root_monotone, integrate_pieces};
use crate::{Error, Result};

const QUAD_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-8;

/// Density of the random prior `P0` on `[0, 1]`.
#[derive(Clone)]
pub struct PriorDensity {
    kind: Kind,
    description: String,
}

#[derive(Clone)]
enum Kind {
    Uniform,
    Beta { alpha: f64, beta: f64, ln_norm: f64 },
    // knots strictly increasing from 0 to 1, values normalized
    Tabulated { knots: Vec<f64>, values: Vec<f64> },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for PriorDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PriorDensity")
            .field("description", &self.description)
            .finish()
    }
}

impl PriorDensity {
    pub fn uniform() -> Self {
        Self {
            kind: Kind::Uniform,
            description: "uniform".into(),
        }
    }

    /// Beta(α, β). Both parameters must be at least 1 so the density stays bounded.
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha >= 1.0 && beta >= 1.0) {
            return Err(Error::invalid(
                "beta prior",
                format!("need alpha >= 1 and beta >= 1, got ({alpha}, {beta})"),
            ));
        }
        let ln_norm = ln_gamma(alpha + beta) - ln_gamma(alpha) - ln_gamma(beta);
        Ok(Self {
            kind: Kind::Beta {
                alpha,
                beta,
                ln_norm,
            },
            description: format!("beta({alpha}, {beta})"),
        })
    }

    /// Piecewise linear density through `(knots[i], values[i])`, rescaled to
    /// integrate to 1. Knots must run strictly from 0 to 1.
    pub fn tabulated(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::invalid(
                "tabulated prior",
                "need at least two knots and one value per knot",
            ));
        }
        if knots[0] != 0.0
            || knots[knots.len() - 1] != 1.0
            || knots.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(Error::invalid(
                "tabulated prior",
                "knots must increase strictly from 0 to 1",
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid(
                "tabulated prior",
                "values must be finite and nonnegative",
            ));
        }
        let area: f64 = knots
            .windows(2)
            .zip(values.windows(2))
            .map(|(k, v)| 0.5 * (k[1] - k[0]) * (v[0] + v[1]))
            .sum();
        if !(area > 0.0) {
            return Err(Error::invalid("tabulated prior", "density has zero mass"));
        }
        let values = values.into_iter().map(|v| v / area).collect();
        Ok(Self {
            kind: Kind::Tabulated { knots, values },
            description: "tabulated".into(),
        })
    }

    /// Any bounded, nonnegative density on `[0, 1]`, smooth inside the
    /// interval. It must already integrate to 1 (checked to `1e-8`).
    pub fn custom<F>(pdf: F, description: impl Into<String>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let prior = Self {
            kind: Kind::Custom(Arc::new(pdf)),
            description: description.into(),
        };
        let total = integrate_pieces(|p| prior.pdf(p), &[0.0, 1.0], QUAD_TOL)?;
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(
                "custom prior",
                format!("integrates to {total}, not 1"),
            ));
        }
        Ok(prior)
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, Kind::Uniform)
    }

    /// `f(p)`, zero outside `[0, 1]`.
    pub fn pdf(&self, p: f64) -> f64 {
        if !(0.0..=1.0).contains(&p) {
            return 0.0;
        }
        match &self.kind {
            Kind::Uniform => 1.0,
            Kind::Beta {
                alpha,
                beta,
                ln_norm,
            } => {
                let mut ln_f = *ln_norm;
                if *alpha != 1.0 {
                    if p == 0.0 {
                        return 0.0;
                    }
                    ln_f += (alpha - 1.0) * ln(p);
                }
                if *beta != 1.0 {
                    if p == 1.0 {
                        return 0.0;
                    }
                    ln_f += (beta - 1.0) * ln(1.0 - p);
                }
                exp(ln_f)
            }
            Kind::Tabulated { knots, values } => {
                let i = knots.partition_point(|&k| k <= p).clamp(1, knots.len() - 1);
                let (k0, k1) = (knots[i - 1], knots[i]);
                let t = (p - k0) / (k1 - k0);
                values[i - 1] + t * (values[i] - values[i - 1])
            }
            Kind::Custom(f) => f(p),
        }
    }

    /// Points in `[0, 1]`, ends included, between which the density is smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Tabulated { knots, .. } => knots.clone(),
            _ => vec![0.0, 1.0],
        }
    }

    /// `∫_lo^hi f`.
    pub fn mass(&self, lo: f64, hi: f64) -> Result<f64> {
        if let Kind::Uniform = self.kind {
            let (lo, hi) = (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0));
            return Ok((hi - lo).max(0.0));
        }
        self.integrate(|_| 1.0, lo, hi)
    }

    /// `∫_lo^hi p f(p) dp`.
    pub fn first_moment(&self, lo: f64, hi: f64) -> Result<f64> {
        if let Kind::Uniform = self.kind {
            let (lo, hi) = (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0));
            return Ok((0.5 * (hi - lo) * (hi + lo)).max(0.0));
        }
        self.integrate(|p| p, lo, hi)
    }

    /// `∫_lo^hi g(p) f(p) dp`, split at the density's breakpoints.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G, lo: f64, hi: f64) -> Result<f64> {
        self.integrate_split(g, lo, hi, &[], QUAD_TOL)
    }

    /// Like [`integrate`](Self::integrate) with extra split points and tolerance.
    pub fn integrate_split<G: Fn(f64) -> f64>(
        &self,
        g: G,
        lo: f64,
        hi: f64,
        extra: &[f64],
        rel_tol: f64,
    ) -> Result<f64> {
        let (lo, hi) = (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0));
        if hi <= lo {
            return Ok(0.0);
        }
        let mut points: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .chain(extra.iter().copied())
            .filter(|&b| b > lo && b < hi)
            .collect();
        points.push(lo);
        points.push(hi);
        points.sort_by(f64::total_cmp);
        points.dedup();
        integrate_pieces(|p| g(p) * self.pdf(p), &points, rel_tol)
    }

    pub fn cdf(&self, p: f64) -> Result<f64> {
        Ok(self.mass(0.0, p)?.clamp(0.0, 1.0))
    }

    /// Smallest `p` with `F(p) = u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::invalid(
                "quantile level",
                format!("{u} is not in [0, 1]"),
            ));
        }
        if let Kind::Uniform = self.kind {
            return Ok(u);
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        if u == 1.0 {
            return Ok(1.0);
        }
        let mut err = None;
        let p = find_root_monotone(
            |p| match self.cdf(p) {
                Ok(c) => c - u,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            0.0,
            1.0,
            1e-13,
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(p),
        }
    }
}
