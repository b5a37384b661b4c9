//! Quantizers of prior probabilities for teams of Bayesian detectors.
//!
//! A team of `N` agents observes the same object through iid noise, each
//! agent votes with a common threshold, and an `L`-out-of-`N` rule fuses the
//! votes. The agents only know a quantized version of the prior probability
//! `p0 = P(H = h0)`. This crate provides:
//!
//! * [`stats`]: normal/exponential distributions, order-statistic densities
//!   and moments, adaptive quadrature and monotone root finding.
//! * [`detection`]: the equivalent single-agent reduction (the team behaves
//!   like one agent whose noise is the `L`-th largest of the `N` noises),
//!   optimal thresholds, global error probabilities and Bayes risk error.
//! * [`quantizer`]: scalar quantizers on `[0, 1]` and Lloyd-Max design under
//!   mean Bayes risk error (MBRE) or maximum Bayes risk error.
//! * [`diverse`]: banks of diverse quantizers tied by a perceived common risk
//!   and the disassembly of an identical `N(K-1)+1`-level quantizer into `N`
//!   diverse `K`-level quantizers with the same risk at every prior.
//! * [`montecarlo`]: a seeded, block-parallel simulator of the full protocol.
//!
//! The crate is `no_std` (it needs `alloc`). Enable `parallel` for rayon
//! powered simulation.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod detection;
pub mod diverse;
mod error;
pub(crate) mod math;
pub mod montecarlo;
pub mod quantizer;
pub mod stats;
pub use detection::{
    bayes_risk, global_errors, optimal_threshold, risk_report, CostPair, DecisionRule, Detector,
    ErrorPair, FusionRule, LikelihoodModel, RiskReport,
};
pub use diverse::{disassemble, verify_equivalence, Disassembly, EquivalenceReport, QuantizerBank};
pub use error::{Error, Result};
pub use montecarlo::{PriorMode, SimConfig, SimResult, TeamPolicy};
pub use quantizer::{
    Cell, Criterion, Design, DesignOptions, Designer, Diagnostic, PriorDensity, Quantization,
    ScalarQuantizer,
};
