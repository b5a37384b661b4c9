//! Quantizer files: the identical source quantizer and/or one quantizer per
//! agent with its weight, as TOML.

use std::path::Path;

use priorquant::{QuantizerBank, ScalarQuantizer};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::config::Loader;
use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    levels: Option<Spanned<i64>>,
    criterion: Option<String>,
    weights: Option<Spanned<Vec<f64>>>,
    source: Option<Spanned<RawQuantizer>>,
    #[serde(default)]
    agent: Vec<Spanned<RawQuantizer>>,
    summary: Option<Summary>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuantizer {
    boundaries: Vec<f64>,
    reps: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub mbre: f64,
    pub max_bre: f64,
}

#[derive(Serialize)]
struct OutFile<'a> {
    levels: usize,
    criterion: &'a str,
    weights: &'a [f64],
    summary: Summary,
    source: OutQuantizer<'a>,
    agent: Vec<OutQuantizer<'a>>,
}

#[derive(Serialize)]
struct OutQuantizer<'a> {
    boundaries: &'a [f64],
    reps: &'a [f64],
}

/// Contents of a quantizer file.
#[derive(Debug, Clone)]
pub struct QuantizerFile {
    pub source: Option<ScalarQuantizer>,
    /// Present when the file lists agents.
    pub bank: Option<QuantizerBank>,
    pub summary: Option<Summary>,
}

impl QuantizerFile {
    /// The bank the team runs: the listed agents, or `agents` copies of the source.
    pub fn team(&self, agents: usize) -> Result<QuantizerBank, CliError> {
        match (&self.bank, &self.source) {
            (Some(bank), _) => Ok(bank.clone()),
            (None, Some(q)) => Ok(QuantizerBank::identical(q.clone(), agents)?),
            (None, None) => unreachable!("load rejects files without quantizers"),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&path.display().to_string(), &src)
    }

    pub fn parse(name: &str, src: &str) -> Result<Self, CliError> {
        let loader = Loader::new(name, src);
        let raw: RawFile = toml::from_str(src).map_err(|e| loader.toml_error(&e))?;
        let build = |q: &Spanned<RawQuantizer>| {
            ScalarQuantizer::new(q.get_ref().boundaries.clone(), q.get_ref().reps.clone())
                .map_err(|e| loader.error(Some(q.span()), e.to_string()))
        };
        let source = raw.source.as_ref().map(build).transpose()?;
        if source.is_none() && raw.agent.is_empty() {
            return Err(loader.error(
                None,
                "needs a [source] table or at least one [[agent]] table",
            ));
        }
        let bank = if raw.agent.is_empty() {
            if let Some(w) = &raw.weights {
                return Err(loader.error(Some(w.span()), "weights need [[agent]] tables"));
            }
            None
        } else {
            let quantizers = raw.agent.iter().map(build).collect::<Result<Vec<_>, _>>()?;
            if let Some(levels) = &raw.levels {
                if let Some((i, q)) = quantizers
                    .iter()
                    .enumerate()
                    .find(|(_, q)| q.levels() as i64 != *levels.get_ref())
                {
                    return Err(loader.error(
                        Some(raw.agent[i].span()),
                        format!(
                            "agent {i} has {} levels, file declares {}",
                            q.levels(),
                            levels.get_ref()
                        ),
                    ));
                }
            }
            let n = quantizers.len();
            let (weights, span) = match &raw.weights {
                Some(w) => (w.get_ref().clone(), Some(w.span())),
                None => (vec![1.0 / n as f64; n], None),
            };
            Some(
                QuantizerBank::new(quantizers, weights)
                    .map_err(|e| loader.error(span, e.to_string()))?,
            )
        };
        let _ = raw.criterion;
        Ok(Self {
            source,
            bank,
            summary: raw.summary,
        })
    }

    /// Serialize a designed bank together with its source quantizer.
    pub fn render(
        source: &ScalarQuantizer,
        bank: &QuantizerBank,
        criterion: &str,
        summary: Summary,
    ) -> Result<String, CliError> {
        let file = OutFile {
            levels: bank.quantizers()[0].levels(),
            criterion,
            weights: bank.weights(),
            summary,
            source: OutQuantizer {
                boundaries: source.boundaries(),
                reps: source.reps(),
            },
            agent: bank
                .quantizers()
                .iter()
                .map(|q| OutQuantizer {
                    boundaries: q.boundaries(),
                    reps: q.reps(),
                })
                .collect(),
        };
        toml::to_string(&file).map_err(|e| CliError::Config {
            file: "<quantizer>".into(),
            line: None,
            message: e.to_string(),
        })
    }
}
