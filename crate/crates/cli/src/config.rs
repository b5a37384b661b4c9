//! Run configuration: a TOML file whose sections are all optional.
//!
//! Every value is validated on load; errors carry the line of the offending
//! key, or of its table when the key is absent.

use std::ops::Range;
use std::path::{Path, PathBuf};

use priorquant::{
    CostPair, Criterion, DesignOptions, Detector, FusionRule, LikelihoodModel, PriorDensity,
};
use serde::Deserialize;
use toml::Spanned;

use crate::error::CliError;

type Field<T> = Option<Spanned<T>>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<Spanned<RawModel>>,
    fusion: Option<Spanned<RawFusion>>,
    costs: Option<Spanned<RawCosts>>,
    prior: Option<Spanned<RawPrior>>,
    design: Option<Spanned<RawDesign>>,
    simulation: Option<Spanned<RawSimulation>>,
    sweep: Option<Spanned<RawSweep>>,
    output: Option<Spanned<RawOutput>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: Field<String>,
    s0: Field<f64>,
    s1: Field<f64>,
    sigma: Field<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFusion {
    n: Field<i64>,
    l: Field<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCosts {
    c10: Field<f64>,
    c01: Field<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrior {
    kind: Field<String>,
    alpha: Field<f64>,
    beta: Field<f64>,
    knots: Field<Vec<f64>>,
    values: Field<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Levels {
    One(i64),
    Many(Vec<i64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    levels: Field<Levels>,
    criterion: Field<String>,
    weights: Field<Vec<f64>>,
    max_iter: Field<i64>,
    tol: Field<f64>,
    restarts: Field<i64>,
    seed: Field<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    trials: Field<i64>,
    seed: Field<i64>,
    priors: Field<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    max_levels: Field<i64>,
    threshold_agents: Field<Vec<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Field<String>,
}

#[derive(Debug, Clone)]
pub struct SimulationSettings {
    pub trials: u64,
    pub seed: u64,
    /// Fixed true priors, one simulated row set each.
    pub priors: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepSettings {
    /// Levels `1..=max_levels` in the MBRE table.
    pub max_levels: usize,
    /// Team sizes of the threshold curves.
    pub threshold_agents: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub detector: Detector,
    pub prior: PriorDensity,
    /// Agent weights, `1/n` each unless given.
    pub weights: Vec<f64>,
    pub levels: Vec<usize>,
    pub design: DesignOptions,
    pub simulation: SimulationSettings,
    pub sweep: SweepSettings,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn agents(&self) -> usize {
        self.detector.fusion().n() as usize
    }

    /// Replace both the design and the simulation seed.
    pub fn override_seed(&mut self, seed: u64) {
        self.design.seed = seed;
        self.simulation.seed = seed;
    }

    pub fn defaults() -> Self {
        Loader::new("<defaults>", "")
            .resolve(RawConfig::default())
            .expect("defaults are valid")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let name = path.display().to_string();
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&name, &src)
    }

    pub fn parse(name: &str, src: &str) -> Result<Self, CliError> {
        let loader = Loader::new(name, src);
        let raw: RawConfig = toml::from_str(src).map_err(|e| loader.toml_error(&e))?;
        loader.resolve(raw)
    }
}

/// Maps byte spans to line numbers for error messages.
pub(crate) struct Loader<'a> {
    name: &'a str,
    src: &'a str,
}

impl<'a> Loader<'a> {
    pub(crate) fn new(name: &'a str, src: &'a str) -> Self {
        Self { name, src }
    }

    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.src.len());
        self.src[..end].matches('\n').count() + 1
    }

    pub(crate) fn toml_error(&self, e: &toml::de::Error) -> CliError {
        CliError::Config {
            file: self.name.to_owned(),
            line: e.span().map(|s| self.line(s)),
            message: e.message().to_owned(),
        }
    }

    pub(crate) fn error(&self, span: Option<Range<usize>>, message: impl Into<String>) -> CliError {
        CliError::Config {
            file: self.name.to_owned(),
            line: span.map(|s| self.line(s)),
            message: message.into(),
        }
    }

    fn resolve(&self, raw: RawConfig) -> Result<RunConfig, CliError> {
        let model = self.model(raw.model)?;
        let fusion = self.fusion(raw.fusion)?;
        let costs = self.costs(raw.costs)?;
        let detector =
            Detector::new(model, fusion, costs).map_err(|e| self.error(None, e.to_string()))?;
        let prior = self.prior(raw.prior)?;
        let (levels, weights, design) = self.design(raw.design, fusion.n() as usize)?;
        let simulation = self.simulation(raw.simulation)?;
        let sweep = self.sweep(raw.sweep)?;
        let out_dir = raw
            .output
            .and_then(|o| o.into_inner().dir)
            .map(|d| PathBuf::from(d.into_inner()))
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(RunConfig {
            detector,
            prior,
            weights,
            levels,
            design,
            simulation,
            sweep,
            out_dir,
        })
    }

    fn model(&self, raw: Option<Spanned<RawModel>>) -> Result<LikelihoodModel, CliError> {
        let (table, m) = split(raw);
        let kind = m
            .kind
            .as_ref()
            .map(|k| k.get_ref().as_str())
            .unwrap_or("gaussian");
        let kind_span = span_or(&m.kind, &table);
        let value =
            |f: &Field<f64>, default: f64| f.as_ref().map(|v| *v.get_ref()).unwrap_or(default);
        let model = match kind {
            "gaussian" => LikelihoodModel::gaussian(
                value(&m.s0, 0.0),
                value(&m.s1, 1.0),
                value(&m.sigma, 1.0),
            )
            .map_err(|e| {
                let at = if e.to_string().starts_with("invalid sigma") {
                    span_or(&m.sigma, &table)
                } else {
                    first_span(&[&m.s1, &m.s0]).or(table.clone())
                };
                self.error(at, e.to_string())
            })?,
            "exponential" => {
                if let Some(s) = &m.sigma {
                    return Err(self.error(
                        Some(s.span()),
                        "sigma is not a parameter of the exponential model",
                    ));
                }
                LikelihoodModel::exponential(value(&m.s0, 2.0), value(&m.s1, 1.0)).map_err(|e| {
                    self.error(first_span(&[&m.s0, &m.s1]).or(table.clone()), e.to_string())
                })?
            }
            other => {
                return Err(self.error(
                    kind_span,
                    format!(
                        "unknown model kind {other:?}, expected \"gaussian\" or \"exponential\""
                    ),
                ))
            }
        };
        Ok(model)
    }

    fn fusion(&self, raw: Option<Spanned<RawFusion>>) -> Result<FusionRule, CliError> {
        let (table, f) = split(raw);
        let n = self.count(&f.n, 5, "n")?;
        let l = match &f.l {
            Some(_) => self.count(&f.l, 1, "l")?,
            None => n / 2 + 1,
        };
        let n =
            u32::try_from(n).map_err(|_| self.error(span_or(&f.n, &table), "n is too large"))?;
        let l =
            u32::try_from(l).map_err(|_| self.error(span_or(&f.l, &table), "l is too large"))?;
        FusionRule::new(n, l)
            .map_err(|e| self.error(first_span(&[&f.l, &f.n]).or(table), e.to_string()))
    }

    fn costs(&self, raw: Option<Spanned<RawCosts>>) -> Result<CostPair, CliError> {
        let (table, c) = split(raw);
        let c10 = c.c10.as_ref().map(|v| *v.get_ref()).unwrap_or(1.0);
        let c01 = c.c01.as_ref().map(|v| *v.get_ref()).unwrap_or(1.0);
        CostPair::new(c10, c01).map_err(|e| {
            let at = if !(c10 > 0.0 && c10.is_finite()) {
                span_or(&c.c10, &table)
            } else {
                span_or(&c.c01, &table)
            };
            self.error(at, e.to_string())
        })
    }

    fn prior(&self, raw: Option<Spanned<RawPrior>>) -> Result<PriorDensity, CliError> {
        let (table, p) = split(raw);
        let kind = p
            .kind
            .as_ref()
            .map(|k| k.get_ref().as_str())
            .unwrap_or("uniform");
        let unused = |fields: &[(&str, Option<Range<usize>>)]| -> Result<(), CliError> {
            match fields.iter().find(|(_, s)| s.is_some()) {
                Some((name, span)) => Err(self.error(
                    span.clone(),
                    format!("{name} does not apply to a {kind} prior"),
                )),
                None => Ok(()),
            }
        };
        match kind {
            "uniform" => {
                unused(&[
                    ("alpha", p.alpha.as_ref().map(Spanned::span)),
                    ("beta", p.beta.as_ref().map(Spanned::span)),
                    ("knots", p.knots.as_ref().map(Spanned::span)),
                    ("values", p.values.as_ref().map(Spanned::span)),
                ])?;
                Ok(PriorDensity::uniform())
            }
            "beta" => {
                unused(&[
                    ("knots", p.knots.as_ref().map(Spanned::span)),
                    ("values", p.values.as_ref().map(Spanned::span)),
                ])?;
                let alpha = p.alpha.as_ref().map(|v| *v.get_ref()).unwrap_or(1.0);
                let beta = p.beta.as_ref().map(|v| *v.get_ref()).unwrap_or(1.0);
                PriorDensity::beta(alpha, beta).map_err(|e| {
                    let at = if alpha >= 1.0 {
                        span_or(&p.beta, &table)
                    } else {
                        span_or(&p.alpha, &table)
                    };
                    self.error(at, e.to_string())
                })
            }
            "tabulated" => {
                unused(&[
                    ("alpha", p.alpha.as_ref().map(Spanned::span)),
                    ("beta", p.beta.as_ref().map(Spanned::span)),
                ])?;
                let (Some(knots), Some(values)) = (&p.knots, &p.values) else {
                    return Err(self.error(table, "a tabulated prior needs both knots and values"));
                };
                PriorDensity::tabulated(knots.get_ref().clone(), values.get_ref().clone()).map_err(
                    |e| {
                        let at = if e.to_string().contains("values") {
                            values.span()
                        } else {
                            knots.span()
                        };
                        self.error(Some(at), e.to_string())
                    },
                )
            }
            other => Err(self.error(
                span_or(&p.kind, &table),
                format!(
                    "unknown prior kind {other:?}, expected \"uniform\", \"beta\" or \"tabulated\""
                ),
            )),
        }
    }

    fn design(
        &self,
        raw: Option<Spanned<RawDesign>>,
        agents: usize,
    ) -> Result<(Vec<usize>, Vec<f64>, DesignOptions), CliError> {
        let (table, d) = split(raw);
        let mut opts = DesignOptions::default();
        let levels = match &d.levels {
            None => vec![1, 2, 3, 4],
            Some(l) => {
                let values = match l.get_ref() {
                    Levels::One(k) => vec![*k],
                    Levels::Many(ks) => ks.clone(),
                };
                if values.is_empty() || values.iter().any(|&k| k < 1) {
                    return Err(self.error(Some(l.span()), "levels must be positive integers"));
                }
                values.into_iter().map(|k| k as usize).collect()
            }
        };
        if let Some(c) = &d.criterion {
            opts.criterion = match c.get_ref().as_str() {
                "mbre" => Criterion::Mbre,
                "minimax" => Criterion::Minimax,
                other => {
                    return Err(self.error(
                        Some(c.span()),
                        format!("unknown criterion {other:?}, expected \"mbre\" or \"minimax\""),
                    ))
                }
            };
        }
        opts.max_iter = self.count(&d.max_iter, opts.max_iter as i64, "max_iter")? as usize;
        opts.restarts = self.nonnegative(&d.restarts, opts.restarts as i64, "restarts")? as usize;
        opts.seed = self.nonnegative(&d.seed, 0, "seed")? as u64;
        if let Some(t) = &d.tol {
            if !(*t.get_ref() > 0.0 && t.get_ref().is_finite()) {
                return Err(self.error(Some(t.span()), "tol must be positive"));
            }
            opts.tol = *t.get_ref();
        }
        let weights = match &d.weights {
            None => vec![1.0 / agents as f64; agents],
            Some(w) => {
                let values = w.get_ref();
                if values.len() != agents {
                    return Err(self.error(
                        Some(w.span()),
                        format!("{} weights given for {agents} agents", values.len()),
                    ));
                }
                if values.iter().any(|u| !(u.is_finite() && *u > 0.0)) {
                    return Err(self.error(Some(w.span()), "weights must be positive"));
                }
                let sum: f64 = values.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(
                        self.error(Some(w.span()), format!("weights must sum to 1, got {sum}"))
                    );
                }
                values.clone()
            }
        };
        let _ = table;
        Ok((levels, weights, opts))
    }

    fn simulation(
        &self,
        raw: Option<Spanned<RawSimulation>>,
    ) -> Result<SimulationSettings, CliError> {
        let (_, s) = split(raw);
        let trials = self.count(&s.trials, 1_000_000, "trials")? as u64;
        let seed = self.nonnegative(&s.seed, 0, "seed")? as u64;
        let priors = match &s.priors {
            None => vec![0.1, 0.3, 0.5, 0.7, 0.9],
            Some(p) => {
                if p.get_ref().is_empty() || p.get_ref().iter().any(|x| !(0.0..=1.0).contains(x)) {
                    return Err(self.error(
                        Some(p.span()),
                        "priors must be a non-empty list of values in [0, 1]",
                    ));
                }
                p.get_ref().clone()
            }
        };
        Ok(SimulationSettings {
            trials,
            seed,
            priors,
        })
    }

    fn sweep(&self, raw: Option<Spanned<RawSweep>>) -> Result<SweepSettings, CliError> {
        let (_, s) = split(raw);
        let max_levels = self.count(&s.max_levels, 4, "max_levels")? as usize;
        let threshold_agents = match &s.threshold_agents {
            None => vec![1, 3, 5, 7, 9],
            Some(a) => {
                if a.get_ref().is_empty() || a.get_ref().iter().any(|&n| !(1..=1000).contains(&n)) {
                    return Err(self.error(
                        Some(a.span()),
                        "threshold_agents must be team sizes in [1, 1000]",
                    ));
                }
                a.get_ref().iter().map(|&n| n as u32).collect()
            }
        };
        Ok(SweepSettings {
            max_levels,
            threshold_agents,
        })
    }

    /// A positive integer, or `default` when absent.
    fn count(&self, f: &Field<i64>, default: i64, name: &str) -> Result<i64, CliError> {
        match f {
            None => Ok(default),
            Some(v) if *v.get_ref() >= 1 => Ok(*v.get_ref()),
            Some(v) => Err(self.error(
                Some(v.span()),
                format!("{name} must be at least 1, got {}", v.get_ref()),
            )),
        }
    }

    fn nonnegative(&self, f: &Field<i64>, default: i64, name: &str) -> Result<i64, CliError> {
        match f {
            None => Ok(default),
            Some(v) if *v.get_ref() >= 0 => Ok(*v.get_ref()),
            Some(v) => Err(self.error(
                Some(v.span()),
                format!("{name} must be nonnegative, got {}", v.get_ref()),
            )),
        }
    }
}

fn split<T: Default>(raw: Option<Spanned<T>>) -> (Option<Range<usize>>, T) {
    match raw {
        Some(s) => (Some(s.span()), s.into_inner()),
        None => (None, T::default()),
    }
}

fn span_or<T>(f: &Field<T>, table: &Option<Range<usize>>) -> Option<Range<usize>> {
    f.as_ref().map(Spanned::span).or_else(|| table.clone())
}

fn first_span<T>(fields: &[&Field<T>]) -> Option<Range<usize>> {
    fields.iter().find_map(|f| f.as_ref().map(Spanned::span))
}
