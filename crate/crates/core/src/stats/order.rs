use alloc::vec::Vec;

use super::dist::{BaseDistribution, StandardNormal};
use super::quad::Integrator;
use crate::math::{exp, ln_choose, ln_gamma, powi};
use crate::{Error, Result};

/// The `l`-th largest of `n` iid draws from a base distribution.
///
/// With `F`, `f` the base cdf and pdf the density is
/// `n!/((n-l)!(l-1)!) · F(v)^(n-l) · (1-F(v))^(l-1) · f(v)`, and the cdf is the
/// binomial tail "fewer than `l` of the `n` draws exceed `v`".
#[derive(Debug, Clone)]
pub struct OrderStatistic<D> {
    base: D,
    n: u32,
    l: u32,
    ln_coef: f64,
    binom: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    /// `E[V] / σ`
    pub mean_factor: f64,
    /// `var(V) / σ²`
    pub variance_factor: f64,
}

impl<D: BaseDistribution> OrderStatistic<D> {
    pub fn new(base: D, n: u32, l: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("team size", "n must be at least 1"));
        }
        if l == 0 || l > n {
            return Err(Error::invalid(
                "order",
                alloc::format!("l = {l} must lie in [1, {n}]"),
            ));
        }
        let ln_coef = ln_gamma(f64::from(n) + 1.0)
            - ln_gamma(f64::from(n - l) + 1.0)
            - ln_gamma(f64::from(l));
        Ok(Self {
            base,
            n,
            l,
            ln_coef,
            binom: crate::math::binomial_row(n),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn base(&self) -> &D {
        &self.base
    }

    pub fn ln_pdf(&self, v: f64) -> f64 {
        let ln_f = self.base.ln_pdf(v);
        if ln_f == f64::NEG_INFINITY {
            return ln_f;
        }
        let mut acc = self.ln_coef + ln_f;
        if self.n > self.l {
            acc += f64::from(self.n - self.l) * self.base.ln_cdf(v);
        }
        if self.l > 1 {
            acc += f64::from(self.l - 1) * self.base.ln_sf(v);
        }
        acc
    }

    pub fn pdf(&self, v: f64) -> f64 {
        exp(self.ln_pdf(v))
    }

    /// `P(V ≤ v)`.
    pub fn cdf(&self, v: f64) -> f64 {
        let (f, s) = (self.base.cdf(v), self.base.sf(v));
        (0..self.l).map(|j| self.term(j, f, s)).sum()
    }

    /// `P(V > v)`.
    pub fn sf(&self, v: f64) -> f64 {
        let (f, s) = (self.base.cdf(v), self.base.sf(v));
        (self.l..=self.n).map(|j| self.term(j, f, s)).sum()
    }

    // C(n, j) s^j f^(n-j): probability that exactly j draws exceed v
    fn term(&self, j: u32, f: f64, s: f64) -> f64 {
        if self.n <= 60 {
            self.binom[j as usize] * powi(s, j) * powi(f, self.n - j)
        } else {
            // large n: avoid overflow of the coefficient
            if (s == 0.0 && j > 0) || (f == 0.0 && j < self.n) {
                return 0.0;
            }
            let mut ln_t = ln_choose(self.n, j);
            if j > 0 {
                ln_t += f64::from(j) * crate::math::ln(s);
            }
            if j < self.n {
                ln_t += f64::from(self.n - j) * crate::math::ln(f);
            }
            exp(ln_t)
        }
    }

    /// Mean and variance by quadrature over the support.
    pub fn moments(&self, rel_tol: f64) -> Result<MomentPair> {
        let quad = Integrator {
            rel_tol,
            ..Integrator::default()
        };
        let (lo, hi) = self.base.support();
        let mean = quad.integrate(|v| v * self.pdf(v), lo, hi)?.value;
        let variance = quad
            .integrate(|v| (v - mean) * (v - mean) * self.pdf(v), lo, hi)?
            .value;
        Ok(MomentPair {
            mean_factor: mean,
            variance_factor: variance,
        })
    }
}

/// Density of the `l`-th largest of `n` draws at `v`.
pub fn order_statistic_pdf<D: BaseDistribution>(noise: &OrderStatistic<D>, v: f64) -> f64 {
    noise.pdf(v)
}

/// Mean and variance of the `l`-th largest of `n` iid standard normals, i.e.
/// the factors `μ` and `ζ` with `E[V] = μσ`, `var(V) = ζσ²` for `N(0, σ²)` noise.
pub fn order_statistic_moments(n: u32, l: u32, quad_tol: f64) -> Result<MomentPair> {
    OrderStatistic::new(StandardNormal, n, l)?.moments(quad_tol)
}
