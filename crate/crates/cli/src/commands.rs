use std::path::{Path, PathBuf};

use priorquant::montecarlo::{simulate_equivalent_agent, simulate_team};
use priorquant::{
    disassemble, Criterion, DecisionRule, Design, Designer, Detector, FusionRule, QuantizerBank,
    SimConfig, SimResult, TeamPolicy,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, write_csv, write_text};
use crate::qfile::{QuantizerFile, Summary};

fn criterion_name(c: Criterion) -> &'static str {
    match c {
        Criterion::Mbre => "mbre",
        Criterion::Minimax => "minimax",
    }
}

fn designer(cfg: &RunConfig, det: &Detector) -> Designer {
    Designer::new(det.clone(), cfg.prior.clone()).with_quad_tol(cfg.design.quad_tol)
}

fn not_converged(what: &str, d: &Design) -> String {
    format!(
        "{what}: {} levels stopped after {} sweeps with change {:e} ({:?})",
        d.quantizer.levels(),
        d.iterations,
        d.final_change,
        d.diagnostics
    )
}

fn grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5],
        g => (0..g).map(|i| i as f64 / (g - 1) as f64).collect(),
    }
}

struct Designed {
    k: usize,
    source: Design,
    bank: QuantizerBank,
    out_of_range: usize,
    summary: Summary,
    boundary_spread: f64,
}

fn design_one(cfg: &RunConfig, k: usize) -> Result<Designed, CliError> {
    let n = cfg.agents();
    let d = designer(cfg, &cfg.detector);
    let source = d.design(n * (k - 1) + 1, &cfg.design)?;
    let dis = disassemble(&source.quantizer, n, Some(&cfg.weights))?;
    let summary = Summary {
        mbre: d.mbre(&dis.bank)?,
        max_bre: d.max_bre(&dis.bank)?,
    };
    let bres = d.boundary_bres(&source.quantizer);
    let boundary_spread = bres.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - bres.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Designed {
        k,
        source,
        bank: dis.bank,
        out_of_range: dis.diagnostics.len(),
        summary,
        boundary_spread,
    })
}

/// Design the `n(K-1)+1`-level identical quantizer for every requested `K`,
/// split it into a diverse bank and write one quantizer file per `K`.
pub fn design(cfg: &RunConfig) -> Result<(), CliError> {
    let results: Vec<Designed> = cfg
        .levels
        .par_iter()
        .map(|&k| design_one(cfg, k))
        .collect::<Result<_, _>>()?;
    let criterion = criterion_name(cfg.design.criterion);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    println!(
        "{:>3} {:>7} {:>14} {:>14} {:>14} {:>9}",
        "K", "source", "mbre", "max_bre", "bre_spread", "converged"
    );
    for r in &results {
        let file = cfg.out_dir.join(format!("quantizer_k{}.toml", r.k));
        write_text(
            &file,
            &QuantizerFile::render(&r.source.quantizer, &r.bank, criterion, r.summary)?,
        )?;
        println!(
            "{:>3} {:>7} {:>14.6e} {:>14.6e} {:>14.3e} {:>9}",
            r.k,
            r.source.quantizer.levels(),
            r.summary.mbre,
            r.summary.max_bre,
            r.boundary_spread,
            r.source.converged
        );
        if r.out_of_range > 0 {
            eprintln!(
                "K={}: {} agent reps lie outside [0, 1]",
                r.k, r.out_of_range
            );
        }
        if !r.source.converged {
            failures.push(not_converged(&format!("K={}", r.k), &r.source));
        }
        rows.push(vec![
            r.k.to_string(),
            r.source.quantizer.levels().to_string(),
            criterion.to_string(),
            num(r.summary.mbre),
            num(r.summary.max_bre),
            num(r.boundary_spread),
            r.source.iterations.to_string(),
            r.source.converged.to_string(),
            r.out_of_range.to_string(),
            file.display().to_string(),
        ]);
    }
    write_csv(
        &cfg.out_dir,
        "design.csv",
        &[
            "levels",
            "source_levels",
            "criterion",
            "mbre",
            "max_bre",
            "boundary_bre_spread",
            "iterations",
            "converged",
            "reps_out_of_range",
            "file",
        ],
        &rows,
    )?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(failures.join("; ")))
    }
}

/// Risk curves of a quantizer file over a `p0` grid.
pub fn evaluate(cfg: &RunConfig, quantizer: &Path, points: usize) -> Result<PathBuf, CliError> {
    let file = QuantizerFile::load(quantizer)?;
    let bank = file.team(cfg.agents())?;
    let det = &cfg.detector;
    let rows = grid(points)
        .into_iter()
        .map(|p0| {
            let a = bank.effective_prior(p0);
            let r = det.report(p0, a)?;
            Ok(vec![
                num(p0),
                num(a),
                num(r.threshold()),
                num(r.true_risk),
                num(r.mismatched_risk),
                num(r.bre),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let path = write_csv(
        &cfg.out_dir,
        "evaluate.csv",
        &[
            "p0",
            "effective_prior",
            "threshold",
            "true_risk",
            "mismatched_risk",
            "bre",
        ],
        &rows,
    )?;
    let d = designer(cfg, det);
    let summary = Summary {
        mbre: d.mbre(&bank)?,
        max_bre: d.max_bre(&bank)?,
    };
    println!("mbre {:.12e}", summary.mbre);
    println!("max_bre {:.12e}", summary.max_bre);
    if let Some(stored) = file.summary {
        let verdict = if stored == summary {
            "matches"
        } else {
            "differs from"
        };
        println!(
            "summary {verdict} the one stored in {}",
            quantizer.display()
        );
    }
    Ok(path)
}

/// Verdict on one simulated quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Too few conditioning trials to make a claim.
    NoClaim,
}

impl Verdict {
    fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NoClaim => "n/a",
        }
    }
}

const MIN_COUNT: u64 = 100;

/// Compare an empirical proportion or mean with its exact value at 4σ,
/// using the larger of the empirical and exact standard errors.
fn judge(
    empirical: f64,
    emp_se: f64,
    exact: f64,
    exact_se: f64,
    count: u64,
) -> (f64, f64, Verdict) {
    let se = emp_se.max(exact_se);
    let z = if se > 0.0 {
        (empirical - exact) / se
    } else if empirical == exact {
        0.0
    } else {
        f64::INFINITY
    };
    let verdict = if count < MIN_COUNT {
        Verdict::NoClaim
    } else if z.abs() <= 4.0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    (se, z, verdict)
}

fn simulated_rows(
    det: &Detector,
    protocol: &str,
    p0: f64,
    rule: DecisionRule,
    r: &SimResult,
) -> Vec<(Vec<String>, Verdict)> {
    let e = det.errors(rule);
    let c = det.costs();
    let risk = det.bayes_risk(p0, e);
    let second = p0 * c.c10 * c.c10 * e.p1 + (1.0 - p0) * c.c01 * c.c01 * e.p2;
    let risk_se = ((second - risk * risk).max(0.0) / r.trials_run as f64).sqrt();
    let binomial_se = |p: f64, n: u64| {
        if n > 0 {
            (p * (1.0 - p) / n as f64).sqrt()
        } else {
            f64::NAN
        }
    };
    let mut out = Vec::new();
    let mut push =
        |quantity: &str, exact: f64, est: Option<(f64, f64)>, exact_se: f64, count: u64| {
            let row = match est {
                Some((value, se)) => {
                    let (se, z, v) = judge(value, se, exact, exact_se, count);
                    (vec![num(value), num(se), num(z)], v)
                }
                None => (
                    vec!["nan".into(), "nan".into(), "nan".into()],
                    Verdict::NoClaim,
                ),
            };
            let mut cells = vec![
                protocol.to_string(),
                num(p0),
                quantity.to_string(),
                num(exact),
            ];
            cells.extend(row.0);
            cells.push(count.to_string());
            cells.push(row.1.label().to_string());
            out.push((cells, row.1));
        };
    push(
        "p1",
        e.p1,
        r.p1.map(|x| (x.value, x.std_err)),
        binomial_se(e.p1, r.h0_trials),
        r.h0_trials,
    );
    push(
        "p2",
        e.p2,
        r.p2.map(|x| (x.value, x.std_err)),
        binomial_se(e.p2, r.h1_trials),
        r.h1_trials,
    );
    push(
        "risk",
        risk,
        Some((r.risk.value, r.risk.std_err)),
        risk_se,
        r.trials_run,
    );
    out
}

/// Simulate the team (and the equivalent single agent) at each configured
/// prior and compare with the exact error probabilities and risk.
pub fn simulate(cfg: &RunConfig, quantizer: Option<&Path>) -> Result<PathBuf, CliError> {
    let det = &cfg.detector;
    let bank = quantizer
        .map(|q| QuantizerFile::load(q).and_then(|f| f.team(cfg.agents())))
        .transpose()?;
    let policy = match &bank {
        Some(b) => TeamPolicy::Bank(b.clone()),
        None => TeamPolicy::Matched,
    };
    let sim = &cfg.simulation;
    let mut rows = Vec::new();
    let mut tally = [0usize; 3];
    for (protocol, run) in [
        (
            "team",
            simulate_team
                as fn(&Detector, &TeamPolicy, &SimConfig) -> priorquant::Result<SimResult>,
        ),
        ("equivalent", simulate_equivalent_agent),
    ] {
        for (i, &p0) in sim.priors.iter().enumerate() {
            let perceived = bank.as_ref().map_or(p0, |b| b.effective_prior(p0));
            let rule = det.rule(perceived)?;
            let sim_cfg = SimConfig::fixed(p0, sim.trials, sim.seed.wrapping_add(i as u64));
            let r = run(det, &policy, &sim_cfg)?;
            for (row, verdict) in simulated_rows(det, protocol, p0, rule, &r) {
                tally[verdict as usize] += 1;
                rows.push(row);
            }
        }
    }
    let path = write_csv(
        &cfg.out_dir,
        "simulate.csv",
        &[
            "protocol",
            "p0",
            "quantity",
            "analytic",
            "empirical",
            "std_err",
            "z",
            "count",
            "verdict",
        ],
        &rows,
    )?;
    println!(
        "{} trials per row: {} pass, {} fail at 4 standard errors, {} without a claim",
        sim.trials,
        tally[Verdict::Pass as usize],
        tally[Verdict::Fail as usize],
        tally[Verdict::NoClaim as usize]
    );
    Ok(path)
}

struct LevelRow {
    fusion: FusionRule,
    k: usize,
    identical: f64,
    diverse: f64,
    fine_levels: usize,
    fine: f64,
    oblivious: f64,
    converged: bool,
}

fn level_row(cfg: &RunConfig, fusion: FusionRule, k: usize) -> Result<LevelRow, CliError> {
    let det = cfg.detector.with_fusion(fusion);
    let n = fusion.n() as usize;
    let team = designer(cfg, &det);
    let lone = designer(cfg, &det.lone_agent());
    let identical = team.design(k, &cfg.design)?;
    let fine = team.design(n * (k - 1) + 1, &cfg.design)?;
    let oblivious = lone.design(k, &cfg.design)?;
    let weights = if n == cfg.agents() {
        Some(cfg.weights.as_slice())
    } else {
        None
    };
    let bank = disassemble(&fine.quantizer, n, weights)?.bank;
    Ok(LevelRow {
        fusion,
        k,
        identical: identical.distortion,
        diverse: team.mbre(&bank)?,
        fine_levels: fine.quantizer.levels(),
        fine: fine.distortion,
        oblivious: team.mbre(&QuantizerBank::identical(oblivious.quantizer.clone(), n)?)?,
        converged: identical.converged && fine.converged && oblivious.converged,
    })
}

fn rule_name(f: FusionRule) -> String {
    if f.n() == 1 {
        "single".into()
    } else if f.l() == 1 {
        "or".into()
    } else if f.l() == f.n() / 2 + 1 {
        "majority".into()
    } else {
        format!("{}-of-{}", f.l(), f.n())
    }
}

/// MBRE against the number of levels, optimal thresholds against `p0`,
/// and unquantized mean risk against the fusion rule.
pub fn sweep(cfg: &RunConfig, points: usize) -> Result<Vec<PathBuf>, CliError> {
    let n = cfg.detector.fusion().n();
    let mut rules = vec![
        cfg.detector.fusion(),
        FusionRule::majority(n)?,
        FusionRule::or(n)?,
    ];
    rules.dedup();
    rules.sort_by_key(|f| std::cmp::Reverse(f.l()));
    rules.dedup();
    let cells: Vec<(FusionRule, usize)> = rules
        .iter()
        .flat_map(|&f| (1..=cfg.sweep.max_levels).map(move |k| (f, k)))
        .collect();
    let levels: Vec<LevelRow> = cells
        .par_iter()
        .map(|&(f, k)| level_row(cfg, f, k))
        .collect::<Result<_, _>>()?;
    let mut paths = Vec::new();
    let level_rows: Vec<Vec<String>> = levels
        .iter()
        .map(|r| {
            vec![
                rule_name(r.fusion),
                r.fusion.n().to_string(),
                r.fusion.l().to_string(),
                r.k.to_string(),
                num(r.identical),
                num(r.diverse),
                r.fine_levels.to_string(),
                num(r.fine),
                num(r.oblivious),
                r.converged.to_string(),
            ]
        })
        .collect();
    paths.push(write_csv(
        &cfg.out_dir,
        "mbre_vs_levels.csv",
        &[
            "rule",
            "n",
            "l",
            "levels",
            "identical_mbre",
            "diverse_mbre",
            "identical_fine_levels",
            "identical_fine_mbre",
            "oblivious_mbre",
            "converged",
        ],
        &level_rows,
    )?);

    let teams: Vec<(&str, FusionRule)> = cfg
        .sweep
        .threshold_agents
        .iter()
        .flat_map(|&m| {
            [
                ("majority", FusionRule::majority(m)),
                ("or", FusionRule::or(m)),
            ]
        })
        .map(|(name, f)| f.map(|f| (name, f)))
        .collect::<Result<_, _>>()?;
    let p_grid = grid(points);
    let curves: Vec<Vec<Vec<String>>> = teams
        .par_iter()
        .map(|&(name, f)| {
            let det = cfg.detector.with_fusion(f);
            p_grid
                .iter()
                .map(|&p0| {
                    Ok(vec![
                        name.to_string(),
                        f.n().to_string(),
                        num(p0),
                        num(det.rule(p0)?.threshold()),
                    ])
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    paths.push(write_csv(
        &cfg.out_dir,
        "thresholds.csv",
        &["rule", "n", "p0", "threshold"],
        &curves.concat(),
    )?);

    let risks: Vec<Vec<String>> = (1..=n)
        .into_par_iter()
        .map(|l| {
            let det = cfg.detector.with_fusion(FusionRule::new(n, l)?);
            let risk = designer(cfg, &det).mean_true_risk()?;
            Ok(vec![n.to_string(), l.to_string(), num(risk)])
        })
        .collect::<Result<_, CliError>>()?;
    paths.push(write_csv(
        &cfg.out_dir,
        "risk_vs_fusion.csv",
        &["n", "l", "mean_true_risk"],
        &risks,
    )?);

    for r in &levels {
        println!(
            "{:>9} K={:<2} identical {:.6e}  diverse {:.6e}  identical-{} {:.6e}  oblivious {:.6e}",
            rule_name(r.fusion),
            r.k,
            r.identical,
            r.diverse,
            r.fine_levels,
            r.fine,
            r.oblivious
        );
    }
    let stalled: Vec<String> = levels
        .iter()
        .filter(|r| !r.converged)
        .map(|r| format!("{} K={}", rule_name(r.fusion), r.k))
        .collect();
    if stalled.is_empty() {
        Ok(paths)
    } else {
        Err(CliError::NotConverged(stalled.join(", ")))
    }
}
