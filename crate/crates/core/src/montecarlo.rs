//! Seeded simulation of the team protocol.
//!
//! Each trial draws a prior (fixed or from a density), a state, and one
//! observation per agent; every agent thresholds its own observation with
//! the common rule and the votes are fused `L`-out-of-`N`. Trials run in
//! fixed blocks of [`BLOCK_TRIALS`]; block `b` uses ChaCha8 seeded from the
//! config seed on stream `b`, and blocks only return integer counts, so a
//! run is bit-identical whether the blocks run serially or on rayon.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::detection::{CostPair, DecisionRule, Detector, LikelihoodModel};
use crate::diverse::{disassemble, QuantizerBank};
use crate::math::sqrt;
use crate::quantizer::{DesignOptions, Designer, PriorDensity, Quantization, ScalarQuantizer};
use crate::{Error, Result};

/// Trials per random stream.
pub const BLOCK_TRIALS: u64 = 1 << 16;
/// Cells of the inverse-cdf table used to sample non-uniform priors.
const PRIOR_TABLE_CELLS: usize = 4096;

#[derive(Debug, Clone)]
pub enum PriorMode {
    Fixed(f64),
    /// A fresh `p0` per trial.
    Sampled(PriorDensity),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub prior_mode: PriorMode,
}

impl SimConfig {
    pub fn fixed(p0: f64, trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            prior_mode: PriorMode::Fixed(p0),
        }
    }
}

/// How the team picks its common rule from the true prior.
#[derive(Debug, Clone)]
pub enum TeamPolicy {
    /// The same rule whatever the prior.
    Rule(DecisionRule),
    /// The optimal rule at the exact prior.
    Matched,
    /// Every agent quantizes with this quantizer.
    Identical(ScalarQuantizer),
    /// Agent `i` quantizes with quantizer `i`; the rule is optimal at the effective prior.
    Bank(QuantizerBank),
}

/// A proportion (or mean) and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trials_run: u64,
    pub h0_trials: u64,
    pub h1_trials: u64,
    pub false_alarms: u64,
    pub misses: u64,
    /// `P(decide h1 | h0)`; `None` without any `h0` trial.
    pub p1: Option<Estimate>,
    /// `P(decide h0 | h1)`; `None` without any `h1` trial.
    pub p2: Option<Estimate>,
    /// Mean cost per trial.
    pub risk: Estimate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    h0: u64,
    h1: u64,
    false_alarms: u64,
    misses: u64,
}

impl core::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            h0: self.h0 + o.h0,
            h1: self.h1 + o.h1,
            false_alarms: self.false_alarms + o.false_alarms,
            misses: self.misses + o.misses,
        }
    }
}

impl Counts {
    fn into_result(self, costs: CostPair) -> SimResult {
        let trials = self.h0 + self.h1;
        let proportion = |hits: u64, n: u64| {
            (n > 0).then(|| {
                let p = hits as f64 / n as f64;
                Estimate {
                    value: p,
                    std_err: sqrt(p * (1.0 - p) / n as f64),
                }
            })
        };
        let t = trials as f64;
        let (fa, mi) = (self.false_alarms as f64, self.misses as f64);
        let mean = (costs.c10 * fa + costs.c01 * mi) / t;
        let second = (costs.c10 * costs.c10 * fa + costs.c01 * costs.c01 * mi) / t;
        SimResult {
            trials_run: trials,
            h0_trials: self.h0,
            h1_trials: self.h1,
            false_alarms: self.false_alarms,
            misses: self.misses,
            p1: proportion(self.false_alarms, self.h0),
            p2: proportion(self.misses, self.h1),
            risk: Estimate {
                value: mean,
                std_err: sqrt((second - mean * mean).max(0.0) / t),
            },
        }
    }
}

// Inverse cdf of the prior, exact for the uniform density and piecewise
// linear in the cdf otherwise.
#[derive(Debug, Clone)]
enum PriorSampler {
    Fixed(f64),
    Uniform,
    Table(Vec<f64>),
}

impl PriorSampler {
    fn new(mode: &PriorMode) -> Result<Self> {
        match mode {
            PriorMode::Fixed(p) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::invalid(
                        "prior",
                        alloc::format!("{p} is not a probability"),
                    ));
                }
                Ok(PriorSampler::Fixed(*p))
            }
            PriorMode::Sampled(d) if d.is_uniform() => Ok(PriorSampler::Uniform),
            PriorMode::Sampled(d) => {
                let mut cdf = Vec::with_capacity(PRIOR_TABLE_CELLS + 1);
                let mut acc = 0.0;
                cdf.push(0.0);
                for i in 0..PRIOR_TABLE_CELLS {
                    let lo = i as f64 / PRIOR_TABLE_CELLS as f64;
                    let hi = (i + 1) as f64 / PRIOR_TABLE_CELLS as f64;
                    acc += d.mass(lo, hi)?;
                    cdf.push(acc);
                }
                for c in &mut cdf {
                    *c /= acc;
                }
                Ok(PriorSampler::Table(cdf))
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            PriorSampler::Fixed(p) => *p,
            PriorSampler::Uniform => rng.random::<f64>(),
            PriorSampler::Table(cdf) => {
                let u: f64 = rng.random();
                let i = cdf.partition_point(|&c| c <= u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[i - 1], cdf[i]);
                let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                ((i - 1) as f64 + t) / PRIOR_TABLE_CELLS as f64
            }
        }
    }
}

// The rule as a function of the true prior, with rules precomputed wherever
// they are constant.
#[derive(Debug, Clone)]
enum RuleTable {
    Constant(DecisionRule),
    Matched,
    Cells {
        uppers: Vec<f64>,
        rules: Vec<DecisionRule>,
    },
}

impl RuleTable {
    fn new(det: &Detector, policy: &TeamPolicy, sampler: &PriorSampler) -> Result<Self> {
        let cells = match policy {
            TeamPolicy::Rule(r) => return Ok(RuleTable::Constant(*r)),
            TeamPolicy::Matched => match sampler {
                PriorSampler::Fixed(p) => return Ok(RuleTable::Constant(det.rule(*p)?)),
                _ => return Ok(RuleTable::Matched),
            },
            TeamPolicy::Identical(q) => q.cells(),
            TeamPolicy::Bank(b) => b.cells(),
        };
        let mut uppers = Vec::with_capacity(cells.len());
        let mut rules = Vec::with_capacity(cells.len());
        for c in cells {
            uppers.push(c.hi);
            rules.push(det.rule(c.rep)?);
        }
        if let PriorSampler::Fixed(p) = sampler {
            let i = uppers[..uppers.len() - 1].partition_point(|&u| u <= *p);
            return Ok(RuleTable::Constant(rules[i]));
        }
        Ok(RuleTable::Cells { uppers, rules })
    }

    fn rule(&self, det: &Detector, p0: f64) -> DecisionRule {
        match self {
            RuleTable::Constant(r) => *r,
            RuleTable::Matched => det.rule_unchecked(p0),
            RuleTable::Cells { uppers, rules } => {
                rules[uppers[..uppers.len() - 1].partition_point(|&u| u <= p0)]
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Protocol {
    // N agents vote, L-out-of-N fusion
    Team,
    // one agent observing the L-th largest of N draws
    Equivalent,
}

struct Simulation<'a> {
    det: &'a Detector,
    rules: RuleTable,
    sampler: PriorSampler,
    protocol: Protocol,
    seed: u64,
}

impl Simulation<'_> {
    fn block(&self, index: u64, trials: u64) -> Counts {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let (n, l) = (
            self.det.fusion().n() as usize,
            self.det.fusion().l() as usize,
        );
        let model = self.det.model();
        let mut draws = vec![0.0; n];
        let mut counts = Counts::default();
        for _ in 0..trials {
            let p0 = self.sampler.draw(&mut rng);
            let rule = self.rules.rule(self.det, p0);
            let h0 = rng.random::<f64>() < p0;
            let decide_h1 = match self.protocol {
                Protocol::Team => {
                    let mut votes = 0;
                    for _ in 0..n {
                        if rule.declares_h1(observe(model, h0, &mut rng)) {
                            votes += 1;
                        }
                    }
                    votes >= l
                }
                Protocol::Equivalent => {
                    for d in draws.iter_mut() {
                        *d = observe(model, h0, &mut rng);
                    }
                    let (_, v, _) = draws.select_nth_unstable_by(n - l, f64::total_cmp);
                    rule.declares_h1(*v)
                }
            };
            if h0 {
                counts.h0 += 1;
                counts.false_alarms += u64::from(decide_h1);
            } else {
                counts.h1 += 1;
                counts.misses += u64::from(!decide_h1);
            }
        }
        counts
    }

    fn run(&self, trials: u64) -> Counts {
        let blocks = trials.div_ceil(BLOCK_TRIALS);
        let size = |b: u64| BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..blocks)
                .into_par_iter()
                .map(|b| self.block(b, size(b)))
                .reduce(Counts::default, |a, b| a + b)
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..blocks)
                .map(|b| self.block(b, size(b)))
                .fold(Counts::default(), |a, b| a + b)
        }
    }
}

fn observe(model: LikelihoodModel, h0: bool, rng: &mut ChaCha8Rng) -> f64 {
    match model {
        LikelihoodModel::Gaussian { s0, s1, sigma } => {
            let z: f64 = rng.sample(StandardNormal);
            (if h0 { s0 } else { s1 }) + sigma * z
        }
        LikelihoodModel::Exponential { s0, s1 } => {
            let e: f64 = rng.sample(Exp1);
            e / if h0 { s0 } else { s1 }
        }
    }
}

fn simulate(
    det: &Detector,
    policy: &TeamPolicy,
    cfg: &SimConfig,
    protocol: Protocol,
) -> Result<SimResult> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let sampler = PriorSampler::new(&cfg.prior_mode)?;
    let sim = Simulation {
        det,
        rules: RuleTable::new(det, policy, &sampler)?,
        sampler,
        protocol,
        seed: cfg.seed,
    };
    Ok(sim.run(cfg.trials).into_result(det.costs()))
}

/// Run the full `N`-agent protocol.
pub fn simulate_team(det: &Detector, policy: &TeamPolicy, cfg: &SimConfig) -> Result<SimResult> {
    simulate(det, policy, cfg, Protocol::Team)
}

/// Run a single agent whose noise is the `L`-th largest of `N` base draws.
pub fn simulate_equivalent_agent(
    det: &Detector,
    policy: &TeamPolicy,
    cfg: &SimConfig,
) -> Result<SimResult> {
    simulate(det, policy, cfg, Protocol::Equivalent)
}

/// One strategy in [`ObliviousReport`].
#[derive(Debug, Clone)]
pub struct Arm {
    pub bank: QuantizerBank,
    /// Analytic MBRE against the team.
    pub mbre: f64,
    /// Analytic `∫ R_M f`.
    pub mean_risk: f64,
    /// Simulated with `p0` drawn from the prior.
    pub sim: SimResult,
}

impl Arm {
    /// Simulated MBRE: empirical mean risk minus the exact `∫ R f`.
    pub fn empirical_mbre(&self, mean_true_risk: f64) -> Estimate {
        Estimate {
            value: self.sim.risk.value - mean_true_risk,
            std_err: self.sim.risk.std_err,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ObliviousReport {
    pub levels: usize,
    /// `∫ R f`, the mean risk with an unquantized prior.
    pub mean_true_risk: f64,
    /// Identical quantizers designed by agents that think they are alone.
    pub oblivious: Arm,
    /// Identical quantizers designed for the equivalent single agent.
    pub identical: Arm,
    /// Diverse `K`-level quantizers from the optimal `N(K-1)+1`-level design.
    pub diverse: Arm,
}

/// Compare team-oblivious, optimal identical and optimal diverse `K`-level
/// quantizers. The oblivious agents design against the base noise (as if
/// `N = 1`); all three teams then use the team-optimal rule for the prior
/// their quantizers report. Every arm is simulated with the same seed and
/// `p0` drawn from `prior`.
pub fn simulate_oblivious(
    det: &Detector,
    prior: &PriorDensity,
    k: usize,
    opts: &DesignOptions,
    cfg: &SimConfig,
) -> Result<ObliviousReport> {
    let n = det.fusion().n() as usize;
    let team = Designer::new(det.clone(), prior.clone()).with_quad_tol(opts.quad_tol);
    let lone = Designer::new(det.lone_agent(), prior.clone()).with_quad_tol(opts.quad_tol);
    let cfg = SimConfig {
        prior_mode: PriorMode::Sampled(prior.clone()),
        ..cfg.clone()
    };
    let oblivious = QuantizerBank::identical(lone.design(k, opts)?.quantizer, n)?;
    let identical = QuantizerBank::identical(team.design(k, opts)?.quantizer, n)?;
    let source = team.design(n * (k - 1) + 1, opts)?.quantizer;
    let diverse = disassemble(&source, n, None)?.bank;
    let mean_true_risk = team.mean_true_risk()?;
    let arm = |bank: QuantizerBank| -> Result<Arm> {
        let mbre = team.mbre(&bank)?;
        let sim = simulate_team(det, &TeamPolicy::Bank(bank.clone()), &cfg)?;
        Ok(Arm {
            bank,
            mbre,
            mean_risk: mbre + mean_true_risk,
            sim,
        })
    };
    Ok(ObliviousReport {
        levels: k,
        mean_true_risk,
        oblivious: arm(oblivious)?,
        identical: arm(identical)?,
        diverse: arm(diverse)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::FusionRule;

    fn gaussian(n: u32, l: u32) -> Detector {
        Detector::new(
            LikelihoodModel::gaussian(0.0, 1.0, 1.0).unwrap(),
            FusionRule::new(n, l).unwrap(),
            CostPair::default(),
        )
        .unwrap()
    }

    #[test]
    fn seeded_runs_repeat() {
        let det = gaussian(3, 2);
        let cfg = SimConfig::fixed(0.4, 100_000, 7);
        let a = simulate_team(&det, &TeamPolicy::Matched, &cfg).unwrap();
        let b = simulate_team(&det, &TeamPolicy::Matched, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_team(&det, &TeamPolicy::Matched, &SimConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn always_h0_under_certain_h0_costs_nothing() {
        let det = gaussian(5, 3);
        let r = simulate_team(
            &det,
            &TeamPolicy::Rule(DecisionRule::AlwaysH0),
            &SimConfig::fixed(1.0, 5000, 1),
        )
        .unwrap();
        assert_eq!(r.risk.value, 0.0);
        assert_eq!(r.p2, None);
    }

    #[test]
    fn majority_of_three_error_rate() {
        let det = gaussian(3, 2);
        let rule = DecisionRule::Threshold(0.5);
        let r = simulate_team(
            &det,
            &TeamPolicy::Rule(rule),
            &SimConfig::fixed(0.5, 400_000, 3),
        )
        .unwrap();
        let p1 = r.p1.unwrap();
        let exact = det.errors(rule).p1;
        assert!(
            (p1.value - exact).abs() < 4.0 * p1.std_err,
            "{p1:?} vs {exact}"
        );
        let e = simulate_equivalent_agent(
            &det,
            &TeamPolicy::Rule(rule),
            &SimConfig::fixed(0.5, 400_000, 4),
        )
        .unwrap();
        let p1 = e.p1.unwrap();
        assert!(
            (p1.value - exact).abs() < 4.0 * p1.std_err,
            "{p1:?} vs {exact}"
        );
    }

    #[test]
    fn single_trial_has_one_sided_estimates() {
        let det = gaussian(1, 1);
        let r = simulate_team(&det, &TeamPolicy::Matched, &SimConfig::fixed(0.5, 1, 0)).unwrap();
        assert_eq!(r.trials_run, 1);
        assert!(r.p1.is_none() != r.p2.is_none());
    }

    #[test]
    fn sampled_prior_table_matches_density() {
        let prior = PriorDensity::beta(2.0, 1.0).unwrap();
        let sampler = PriorSampler::new(&PriorMode::Sampled(prior)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 200_000;
        let mean = (0..m).map(|_| sampler.draw(&mut rng)).sum::<f64>() / m as f64;
        // sd of beta(2,1) is sqrt(1/18)
        assert!(
            (mean - 2.0 / 3.0).abs() < 4.0 * sqrt(1.0 / 18.0 / m as f64),
            "{mean}"
        );
    }
}
