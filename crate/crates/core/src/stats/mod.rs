//! Numerical substrate: base distributions, order statistics, quadrature and
//! one-dimensional root finding / minimization.

mod dist;
mod order;
mod quad;
mod root;

pub use dist::{ln_normal_cdf, normal_cdf, BaseDistribution, Exponential, StandardNormal};
pub use order::{order_statistic_moments, order_statistic_pdf, MomentPair, OrderStatistic};
pub use quad::{integrate, integrate_pieces, Integral, Integrator};
pub use root::{find_root_expanding, find_root_monotone, minimize_golden};
