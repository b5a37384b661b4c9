//! Hypothesis testing for a team fused by an `L`-out-of-`N` vote.
//!
//! All agents share one threshold `λ` and declare `h1` when their observation
//! is at least `λ`. With identical thresholds the fused decision equals the
//! decision of the agent holding the `L`-th largest observation, so the team
//! behaves like a single agent whose noise is the `L`-th largest of the `N`
//! noises ([`OrderStatistic`]). Thresholds, error probabilities and risks
//! are all computed in that equivalent model.

use alloc::format;
use alloc::vec;

use crate::math::{ln, ln_1p};
use crate::stats::{
    find_root_expanding, minimize_golden, BaseDistribution, Exponential, OrderStatistic,
    StandardNormal,
};
use crate::{Error, Result};

/// Priors this close outside `[0, 1]` are rounding noise and get clamped.
const PRIOR_SLACK: f64 = 1e-9;

/// Observation model per hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LikelihoodModel {
    /// `Y = s_m + W` with `W ~ N(0, σ²)`; requires `s1 > s0`.
    Gaussian { s0: f64, s1: f64, sigma: f64 },
    /// Lifetime `Y ~ Exp(rate s_m)`; requires `s0 > s1 > 0`.
    Exponential { s0: f64, s1: f64 },
}

impl LikelihoodModel {
    pub fn gaussian(s0: f64, s1: f64, sigma: f64) -> Result<Self> {
        let m = LikelihoodModel::Gaussian { s0, s1, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn exponential(s0: f64, s1: f64) -> Result<Self> {
        let m = LikelihoodModel::Exponential { s0, s1 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LikelihoodModel::Gaussian { s0, s1, sigma } => {
                if !(s0.is_finite() && s1.is_finite()) || s1 <= s0 {
                    return Err(Error::invalid(
                        "gaussian signals",
                        format!("need s1 > s0, got s0 = {s0}, s1 = {s1}"),
                    ));
                }
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::invalid(
                        "sigma",
                        format!("must be positive, got {sigma}"),
                    ));
                }
            }
            LikelihoodModel::Exponential { s0, s1 } => {
                if !(s0.is_finite() && s1.is_finite()) || !(s0 > s1 && s1 > 0.0) {
                    return Err(Error::invalid(
                        "exponential rates",
                        format!("need s0 > s1 > 0, got s0 = {s0}, s1 = {s1}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// `L`-out-of-`N` fusion: the team declares `h1` iff at least `l` of `n` agents do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FusionRule {
    n: u32,
    l: u32,
}

impl FusionRule {
    pub fn new(n: u32, l: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("fusion rule", "n must be at least 1"));
        }
        if l == 0 || l > n {
            return Err(Error::invalid(
                "fusion rule",
                format!("l = {l} must lie in [1, {n}]"),
            ));
        }
        Ok(Self { n, l })
    }

    /// `l = ⌈(n + 1) / 2⌉`
    pub fn majority(n: u32) -> Result<Self> {
        Self::new(n, n / 2 + 1)
    }

    pub fn or(n: u32) -> Result<Self> {
        Self::new(n, 1)
    }

    pub fn single() -> Self {
        Self { n: 1, l: 1 }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }
}

/// Bayes costs: `c10` for a false alarm, `c01` for a missed detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostPair {
    pub c10: f64,
    pub c01: f64,
}

impl CostPair {
    pub fn new(c10: f64, c01: f64) -> Result<Self> {
        if !(c10.is_finite() && c10 > 0.0 && c01.is_finite() && c01 > 0.0) {
            return Err(Error::invalid(
                "costs",
                format!("both must be positive, got c10 = {c10}, c01 = {c01}"),
            ));
        }
        Ok(Self { c10, c01 })
    }
}

impl Default for CostPair {
    fn default() -> Self {
        Self { c10: 1.0, c01: 1.0 }
    }
}

/// Global error probabilities: `p1 = P(decide h1 | h0)`, `p2 = P(decide h0 | h1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    pub p1: f64,
    pub p2: f64,
}

/// A decision rule shared by every agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    /// Perceived prior 1: never declare `h1`.
    AlwaysH0,
    /// Perceived prior 0: always declare `h1`.
    AlwaysH1,
    /// Declare `h1` iff the observation is at least the threshold.
    Threshold(f64),
}

impl DecisionRule {
    pub fn declares_h1(&self, y: f64) -> bool {
        match *self {
            DecisionRule::AlwaysH0 => false,
            DecisionRule::AlwaysH1 => true,
            DecisionRule::Threshold(t) => y >= t,
        }
    }

    /// The threshold, with the degenerate rules at `±∞`.
    pub fn threshold(&self) -> f64 {
        match *self {
            DecisionRule::AlwaysH0 => f64::INFINITY,
            DecisionRule::AlwaysH1 => f64::NEG_INFINITY,
            DecisionRule::Threshold(t) => t,
        }
    }
}

/// Risk quantities for one true prior and one perceived prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub prior: f64,
    pub perceived_prior: f64,
    /// Rule designed at the perceived prior.
    pub rule: DecisionRule,
    /// Errors of that rule.
    pub errors: ErrorPair,
    /// Risk at the true prior with the rule designed at the true prior.
    pub true_risk: f64,
    /// Risk at the true prior with the rule designed at the perceived prior.
    pub mismatched_risk: f64,
    /// Bayes risk error, `mismatched_risk - true_risk`.
    pub bre: f64,
}

impl RiskReport {
    pub fn threshold(&self) -> f64 {
        self.rule.threshold()
    }
}

/// `p0·c10·p1 + (1 - p0)·c01·p2`
pub fn bayes_risk(prior: f64, errors: ErrorPair, costs: CostPair) -> f64 {
    prior * costs.c10 * errors.p1 + (1.0 - prior) * costs.c01 * errors.p2
}

/// Global errors from per-agent errors under `L`-out-of-`N` fusion, for agents
/// that need not be identical: `p1` is the probability that at least `l`
/// agents raise a false alarm, `p2` that at least `n - l + 1` miss.
pub fn fusion_errors(local: &[ErrorPair], l: u32) -> ErrorPair {
    let n = local.len();
    let l = l as usize;
    let at_least = |k: usize, probs: &mut dyn Iterator<Item = f64>| -> f64 {
        // dist[j] = P(exactly j successes so far)
        let mut dist = vec![0.0; n + 1];
        dist[0] = 1.0;
        for (seen, p) in probs.enumerate() {
            for j in (0..=seen + 1).rev() {
                let stay = dist[j] * (1.0 - p);
                let step = if j > 0 { dist[j - 1] * p } else { 0.0 };
                dist[j] = stay + step;
            }
        }
        dist[k.min(n + 1)..].iter().sum()
    };
    ErrorPair {
        p1: at_least(l, &mut local.iter().map(|e| e.p1)),
        p2: at_least(n + 1 - l, &mut local.iter().map(|e| e.p2)),
    }
}

#[derive(Debug, Clone)]
enum Noise {
    Gaussian(OrderStatistic<StandardNormal>),
    Exponential {
        h0: OrderStatistic<Exponential>,
        h1: OrderStatistic<Exponential>,
    },
}

/// A validated (model, fusion, costs) triple with the order-statistic noise
/// of its equivalent single agent precomputed.
#[derive(Debug, Clone)]
pub struct Detector {
    model: LikelihoodModel,
    fusion: FusionRule,
    costs: CostPair,
    noise: Noise,
}

impl Detector {
    pub fn new(model: LikelihoodModel, fusion: FusionRule, costs: CostPair) -> Result<Self> {
        model.validate()?;
        CostPair::new(costs.c10, costs.c01)?;
        let (n, l) = (fusion.n, fusion.l);
        let noise = match model {
            LikelihoodModel::Gaussian { .. } => {
                Noise::Gaussian(OrderStatistic::new(StandardNormal, n, l)?)
            }
            LikelihoodModel::Exponential { s0, s1 } => Noise::Exponential {
                h0: OrderStatistic::new(Exponential { rate: s0 }, n, l)?,
                h1: OrderStatistic::new(Exponential { rate: s1 }, n, l)?,
            },
        };
        Ok(Self {
            model,
            fusion,
            costs,
            noise,
        })
    }

    pub fn model(&self) -> LikelihoodModel {
        self.model
    }

    pub fn fusion(&self) -> FusionRule {
        self.fusion
    }

    pub fn costs(&self) -> CostPair {
        self.costs
    }

    /// The same model and costs seen by an agent that ignores the team.
    pub fn lone_agent(&self) -> Detector {
        Detector::new(self.model, FusionRule::single(), self.costs).expect("already validated")
    }

    /// Same model and costs under another fusion rule.
    pub fn with_fusion(&self, fusion: FusionRule) -> Detector {
        Detector::new(self.model, fusion, self.costs).expect("already validated")
    }

    /// The rule minimizing the perceived risk
    /// `p'·c10·P1(λ) + (1 - p')·c01·P2(λ)`.
    pub fn rule(&self, perceived_prior: f64) -> Result<DecisionRule> {
        let p = check_prior(perceived_prior, "perceived prior")?;
        Ok(self.rule_unchecked(p))
    }

    pub(crate) fn rule_unchecked(&self, p: f64) -> DecisionRule {
        let p = p.clamp(0.0, 1.0);
        if p == 0.0 {
            return DecisionRule::AlwaysH1;
        }
        if p == 1.0 {
            return DecisionRule::AlwaysH0;
        }
        // ln of the likelihood-ratio threshold p'c10 / ((1-p')c01)
        let ln_eta = ln(p) - ln_1p(-p) + ln(self.costs.c10) - ln(self.costs.c01);
        match (&self.noise, self.model) {
            (Noise::Gaussian(os), LikelihoodModel::Gaussian { s0, s1, sigma }) => {
                gaussian_threshold(os, s0, s1, sigma, ln_eta)
                    .unwrap_or_else(|| self.golden_fallback(p, ln_eta))
            }
            (Noise::Exponential { h0, h1 }, LikelihoodModel::Exponential { s0, s1 }) => {
                exponential_threshold(h0, h1, s0, s1, ln_eta)
                    .unwrap_or_else(|| self.golden_fallback(p, ln_eta))
            }
            _ => unreachable!("noise always matches the model"),
        }
    }

    // Direct minimization of the perceived risk when the likelihood-ratio
    // condition cannot be bracketed as a monotone function.
    fn golden_fallback(&self, p: f64, ln_eta: f64) -> DecisionRule {
        let (center, scale, floor) = match self.model {
            LikelihoodModel::Gaussian { s0, s1, sigma } => (
                0.5 * (s0 + s1) + sigma * sigma * ln_eta / (s1 - s0),
                sigma + (s1 - s0),
                f64::NEG_INFINITY,
            ),
            LikelihoodModel::Exponential { s1, .. } => (0.0, 50.0 / s1, 0.0),
        };
        let lo = (center - 60.0 * scale).max(floor);
        let hi = center + 60.0 * scale;
        let risk = |t: f64| bayes_risk(p, self.errors(DecisionRule::Threshold(t)), self.costs);
        let (t, _) = minimize_golden(risk, lo, hi, 1e-12 * (1.0 + center.abs()));
        DecisionRule::Threshold(t)
    }

    /// Team error probabilities of a rule (the tail probabilities of the
    /// equivalent single agent's observation).
    pub fn errors(&self, rule: DecisionRule) -> ErrorPair {
        let t = match rule {
            DecisionRule::AlwaysH0 => return ErrorPair { p1: 0.0, p2: 1.0 },
            DecisionRule::AlwaysH1 => return ErrorPair { p1: 1.0, p2: 0.0 },
            DecisionRule::Threshold(t) => t,
        };
        match (&self.noise, self.model) {
            (Noise::Gaussian(os), LikelihoodModel::Gaussian { s0, s1, sigma }) => ErrorPair {
                p1: os.sf((t - s0) / sigma),
                p2: os.cdf((t - s1) / sigma),
            },
            (Noise::Exponential { h0, h1 }, _) => ErrorPair {
                p1: h0.sf(t),
                p2: h1.cdf(t),
            },
            _ => unreachable!("noise always matches the model"),
        }
    }

    /// Errors of one agent applying the rule to its own observation.
    pub fn local_errors(&self, rule: DecisionRule) -> ErrorPair {
        let t = match rule {
            DecisionRule::AlwaysH0 => return ErrorPair { p1: 0.0, p2: 1.0 },
            DecisionRule::AlwaysH1 => return ErrorPair { p1: 1.0, p2: 0.0 },
            DecisionRule::Threshold(t) => t,
        };
        match self.model {
            LikelihoodModel::Gaussian { s0, s1, sigma } => ErrorPair {
                p1: StandardNormal.sf((t - s0) / sigma),
                p2: StandardNormal.cdf((t - s1) / sigma),
            },
            LikelihoodModel::Exponential { s0, s1 } => ErrorPair {
                p1: Exponential { rate: s0 }.sf(t),
                p2: Exponential { rate: s1 }.cdf(t),
            },
        }
    }

    /// Errors of the optimal rule at `perceived_prior`.
    pub fn errors_at(&self, perceived_prior: f64) -> Result<ErrorPair> {
        Ok(self.errors(self.rule(perceived_prior)?))
    }

    pub(crate) fn errors_at_unchecked(&self, p: f64) -> ErrorPair {
        self.errors(self.rule_unchecked(p))
    }

    pub fn bayes_risk(&self, prior: f64, errors: ErrorPair) -> f64 {
        bayes_risk(prior, errors, self.costs)
    }

    /// `R(p0)`: risk when the rule is designed at the true prior.
    pub fn true_risk(&self, prior: f64) -> Result<f64> {
        let p = check_prior(prior, "prior")?;
        Ok(self.true_risk_unchecked(p))
    }

    pub(crate) fn true_risk_unchecked(&self, p: f64) -> f64 {
        bayes_risk(p, self.errors_at_unchecked(p), self.costs)
    }

    /// `R_M`: risk at `prior` of the rule designed at `perceived_prior`.
    pub fn mismatched_risk(&self, prior: f64, perceived_prior: f64) -> Result<f64> {
        let p = check_prior(prior, "prior")?;
        Ok(bayes_risk(p, self.errors_at(perceived_prior)?, self.costs))
    }

    /// Bayes risk error `d(p0, a) = R_M(p0; a) - R(p0)`.
    pub fn bre(&self, prior: f64, perceived_prior: f64) -> Result<f64> {
        let p = check_prior(prior, "prior")?;
        let a = check_prior(perceived_prior, "perceived prior")?;
        Ok(self.bre_unchecked(p, a))
    }

    pub(crate) fn bre_unchecked(&self, p: f64, a: f64) -> f64 {
        self.bre_with_errors(p, self.errors_at_unchecked(a))
    }

    /// BRE at `prior` for a rule whose errors are already known.
    pub(crate) fn bre_with_errors(&self, p: f64, errors: ErrorPair) -> f64 {
        bayes_risk(p, errors, self.costs) - self.true_risk_unchecked(p)
    }

    pub fn report(&self, prior: f64, perceived_prior: f64) -> Result<RiskReport> {
        let p = check_prior(prior, "prior")?;
        let a = check_prior(perceived_prior, "perceived prior")?;
        let rule = self.rule_unchecked(a);
        let errors = self.errors(rule);
        let mismatched_risk = bayes_risk(p, errors, self.costs);
        let true_risk = self.true_risk_unchecked(p);
        Ok(RiskReport {
            prior: p,
            perceived_prior: a,
            rule,
            errors,
            true_risk,
            mismatched_risk,
            bre: mismatched_risk - true_risk,
        })
    }
}

fn check_prior(p: f64, name: &'static str) -> Result<f64> {
    if !(-PRIOR_SLACK..=1.0 + PRIOR_SLACK).contains(&p) {
        return Err(Error::invalid(name, format!("{p} is not a probability")));
    }
    Ok(p.clamp(0.0, 1.0))
}

// Root of ln f_V(λ - s1) - ln f_V(λ - s0) = ln η. Order statistics of a
// log-concave density are log-concave, so the left side increases in λ.
fn gaussian_threshold(
    os: &OrderStatistic<StandardNormal>,
    s0: f64,
    s1: f64,
    sigma: f64,
    ln_eta: f64,
) -> Option<DecisionRule> {
    let g = |t: f64| os.ln_pdf((t - s1) / sigma) - os.ln_pdf((t - s0) / sigma) - ln_eta;
    // exact for a single agent; a starting bracket otherwise
    let guess = 0.5 * (s0 + s1) + sigma * sigma * ln_eta / (s1 - s0);
    let half = sigma + (s1 - s0);
    let tol = 1e-14 * (1.0 + guess.abs());
    let limits = (guess - 1e4 * half, guess + 1e4 * half);
    let (lo, hi) = (guess - half, guess + half);
    let t = find_root_expanding(g, lo, hi, tol, limits).ok()?;
    // reject brackets where g decreases: the condition is then not a minimum
    let probe = half * 1e-3;
    if g(t - probe) > g(t + probe) {
        return None;
    }
    Some(DecisionRule::Threshold(t))
}

// The lifetime likelihood ratio of the l-th longest of n lifetimes increases
// in y, from (s1/s0)^(n-l+1) at y = 0 to infinity, so the rule is a threshold
// on [0, ∞). For n = 1 it is ln((s0/s1)·η) / (s0 - s1).
fn exponential_threshold(
    h0: &OrderStatistic<Exponential>,
    h1: &OrderStatistic<Exponential>,
    s0: f64,
    s1: f64,
    ln_eta: f64,
) -> Option<DecisionRule> {
    let single = (ln(s0 / s1) + ln_eta) / (s0 - s1);
    if h0.n() == 1 {
        return Some(DecisionRule::Threshold(single.max(0.0)));
    }
    let g = |t: f64| h1.ln_pdf(t) - h0.ln_pdf(t) - ln_eta;
    let tiny = 1e-300;
    if g(tiny) >= 0.0 {
        return Some(DecisionRule::Threshold(0.0));
    }
    let start = single.max(1.0 / s0);
    let tol = 1e-14 * (1.0 + start);
    let t = find_root_expanding(g, tiny, start, tol, (tiny, 1e6 / s1)).ok()?;
    Some(DecisionRule::Threshold(t))
}

/// Threshold minimizing the perceived risk at `perceived_prior`.
pub fn optimal_threshold(
    model: LikelihoodModel,
    fusion: FusionRule,
    perceived_prior: f64,
    costs: CostPair,
) -> Result<DecisionRule> {
    Detector::new(model, fusion, costs)?.rule(perceived_prior)
}

/// Team errors of `rule`: `p1 = P(V + s0 ≥ λ)`, `p2 = P(V + s1 < λ)`.
pub fn global_errors(
    model: LikelihoodModel,
    fusion: FusionRule,
    rule: DecisionRule,
) -> Result<ErrorPair> {
    Ok(Detector::new(model, fusion, CostPair::default())?.errors(rule))
}

pub fn risk_report(
    model: LikelihoodModel,
    fusion: FusionRule,
    costs: CostPair,
    prior: f64,
    perceived_prior: f64,
) -> Result<RiskReport> {
    Detector::new(model, fusion, costs)?.report(prior, perceived_prior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::normal_cdf;

    fn gaussian(n: u32, l: u32) -> Detector {
        Detector::new(
            LikelihoodModel::gaussian(0.0, 1.0, 1.0).unwrap(),
            FusionRule::new(n, l).unwrap(),
            CostPair::default(),
        )
        .unwrap()
    }

    fn exponential(n: u32, l: u32) -> Detector {
        Detector::new(
            LikelihoodModel::exponential(2.0, 1.0).unwrap(),
            FusionRule::new(n, l).unwrap(),
            CostPair::default(),
        )
        .unwrap()
    }

    #[test]
    fn model_validation() {
        assert!(LikelihoodModel::gaussian(1.0, 0.0, 1.0).is_err());
        assert!(LikelihoodModel::gaussian(0.0, 1.0, 0.0).is_err());
        assert!(LikelihoodModel::exponential(1.0, 2.0).is_err());
        assert!(LikelihoodModel::exponential(2.0, 0.0).is_err());
        assert!(FusionRule::new(3, 4).is_err());
        assert!(CostPair::new(0.0, 1.0).is_err());
        assert_eq!(FusionRule::majority(5).unwrap().l(), 3);
        assert_eq!(FusionRule::majority(4).unwrap().l(), 3);
    }

    #[test]
    fn symmetric_single_agent_threshold() {
        let rule = gaussian(1, 1).rule(0.5).unwrap();
        assert!((rule.threshold() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn exponential_single_agent_threshold() {
        let rule = exponential(1, 1).rule(0.5).unwrap();
        assert!((rule.threshold() - core::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn or_rule_needs_stronger_evidence() {
        assert!(gaussian(5, 1).rule(0.5).unwrap().threshold() > 0.5);
    }

    #[test]
    fn degenerate_priors_give_marker_rules() {
        let d = gaussian(3, 2);
        assert_eq!(d.rule(0.0).unwrap(), DecisionRule::AlwaysH1);
        assert_eq!(d.rule(1.0).unwrap(), DecisionRule::AlwaysH0);
        assert_eq!(
            d.errors(DecisionRule::AlwaysH1),
            ErrorPair { p1: 1.0, p2: 0.0 }
        );
        assert_eq!(
            d.errors(DecisionRule::AlwaysH0),
            ErrorPair { p1: 0.0, p2: 1.0 }
        );
        assert!(d.rule(1.5).is_err());
        assert!(d.rule(f64::NAN).is_err());
    }

    #[test]
    fn single_agent_errors() {
        let e = gaussian(1, 1).errors(DecisionRule::Threshold(0.5));
        let expected = 1.0 - normal_cdf(0.5);
        assert!((e.p1 - expected).abs() < 1e-15 && (e.p2 - expected).abs() < 1e-15);
        assert!((expected - 0.3085).abs() < 1e-4);
    }

    #[test]
    fn majority_of_three_matches_binomial_sum() {
        let p = 1.0 - normal_cdf(0.5);
        let e = gaussian(3, 2).errors(DecisionRule::Threshold(0.5));
        assert!((e.p1 - (3.0 * p * p * (1.0 - p) + p * p * p)).abs() < 1e-12);
        assert!((e.p1 - 0.2269).abs() < 1e-4);
    }

    #[test]
    fn exponential_errors_closed_form() {
        let e = exponential(1, 1).errors(DecisionRule::Threshold(core::f64::consts::LN_2));
        assert!((e.p1 - 0.25).abs() < 1e-15);
        assert!((e.p2 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bayes_risk_arithmetic() {
        let c = CostPair::default();
        assert_eq!(bayes_risk(0.0, ErrorPair { p1: 0.3, p2: 0.7 }, c), 0.7);
        assert!(
            (bayes_risk(
                0.5,
                ErrorPair {
                    p1: 0.3085,
                    p2: 0.3085
                },
                c
            ) - 0.3085)
                .abs()
                < 1e-15
        );
        assert_eq!(bayes_risk(1.0, ErrorPair { p1: 0.0, p2: 1.0 }, c), 0.0);
    }

    #[test]
    fn matched_report_has_zero_bre() {
        let r = gaussian(5, 3).report(0.3, 0.3).unwrap();
        assert!(r.bre.abs() < 1e-10);
        let r = gaussian(1, 1).report(0.5, 0.6).unwrap();
        assert!(r.bre > 0.0);
        assert!((r.bre - (r.mismatched_risk - r.true_risk)).abs() < 1e-16);
    }

    #[test]
    fn fusion_errors_reduce_to_team_errors() {
        for &(n, l) in &[(1, 1), (3, 2), (5, 1), (5, 3), (5, 5)] {
            let d = gaussian(n, l);
            let rule = DecisionRule::Threshold(0.37);
            let local = d.local_errors(rule);
            let via_votes = fusion_errors(&vec![local; n as usize], l);
            let via_order = d.errors(rule);
            assert!((via_votes.p1 - via_order.p1).abs() < 1e-14, "({n},{l})");
            assert!((via_votes.p2 - via_order.p2).abs() < 1e-14, "({n},{l})");
        }
    }

    #[test]
    fn exponential_team_threshold_is_stationary() {
        for l in 1..=5 {
            let d = exponential(5, l);
            let t = d.rule(0.4).unwrap().threshold();
            let r = |t: f64| d.bayes_risk(0.4, d.errors(DecisionRule::Threshold(t)));
            let h = 1e-5;
            if t > h {
                let slope = (r(t + h) - r(t - h)) / (2.0 * h);
                assert!(slope.abs() < 1e-8, "l={l} t={t} slope={slope}");
            }
        }
    }

    #[test]
    fn extreme_priors_still_solve() {
        let d = gaussian(5, 3);
        for &p in &[1e-12, 1e-6, 0.999_999, 1.0 - 1e-12] {
            let t = d.rule(p).unwrap().threshold();
            assert!(t.is_finite(), "{p}");
        }
        let d = exponential(5, 2);
        for &p in &[1e-12, 0.5, 1.0 - 1e-12] {
            assert!(d.rule(p).unwrap().threshold().is_finite());
        }
    }
}
