//! Diverse quantizers and the perceived common risk.
//!
//! Agent `i` quantizes the prior with its own `q_i` and the team minimizes
//! the weighted sum of the agents' perceived risks. That sum is affine in the
//! perceived prior, so the team acts as one agent holding the effective prior
//! `Σ u_i q_i(p0)`. Two banks with the same effective quantizer therefore
//! have the same risk at every `p0`.
//!
//! [`disassemble`] goes the other way: it splits the `N(K-1)+1` cells of an
//! identical quantizer `q_S` into `N` quantizers with `K` cells each whose
//! effective quantizer is `q_S`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::detection::{bayes_risk, CostPair, ErrorPair};
use crate::quantizer::{Cell, Diagnostic, Quantization, ScalarQuantizer};
use crate::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;
const EQUIVALENCE_TOL: f64 = 1e-10;

/// `N` quantizers, one per agent, and the weights of the perceived common risk.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerBank {
    quantizers: Vec<ScalarQuantizer>,
    weights: Vec<f64>,
}

impl QuantizerBank {
    pub fn new(quantizers: Vec<ScalarQuantizer>, weights: Vec<f64>) -> Result<Self> {
        if quantizers.is_empty() {
            return Err(Error::invalid("bank", "needs at least one quantizer"));
        }
        check_weights(&weights, quantizers.len())?;
        Ok(Self {
            quantizers,
            weights,
        })
    }

    /// Equal weights `1/N`.
    pub fn equal_weights(quantizers: Vec<ScalarQuantizer>) -> Result<Self> {
        let n = quantizers.len();
        Self::new(quantizers, vec![1.0 / n as f64; n])
    }

    /// Every agent uses `q`.
    pub fn identical(q: ScalarQuantizer, n: usize) -> Result<Self> {
        Self::equal_weights(vec![q; n])
    }

    pub fn agents(&self) -> usize {
        self.quantizers.len()
    }

    pub fn quantizers(&self) -> &[ScalarQuantizer] {
        &self.quantizers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Each agent's perceived prior at `p0`.
    pub fn perceived_priors(&self, p0: f64) -> Vec<f64> {
        self.quantizers.iter().map(|q| q.quantize(p0)).collect()
    }

    /// `Σ u_i q_i(p0)`.
    pub fn effective_prior(&self, p0: f64) -> f64 {
        self.quantizers
            .iter()
            .zip(&self.weights)
            .map(|(q, u)| u * q.quantize(p0))
            .sum()
    }

    /// `Σ u_i R_P^(i)`, the team objective for a rule with the given errors.
    /// Equal to the Bayes risk at the effective prior.
    pub fn perceived_common_risk(&self, p0: f64, errors: ErrorPair, costs: CostPair) -> f64 {
        let via_prior = bayes_risk(self.effective_prior(p0), errors, costs);
        debug_assert!({
            let direct: f64 = self
                .quantizers
                .iter()
                .zip(&self.weights)
                .map(|(q, u)| {
                    let a = q.quantize(p0);
                    u * (a * costs.c10 * errors.p1 + (1.0 - a) * costs.c01 * errors.p2)
                })
                .sum();
            (direct - via_prior).abs() <= 1e-12 * (1.0 + direct.abs())
        });
        via_prior
    }

    /// The single quantizer `p0 ↦ Σ u_i q_i(p0)`, with cells cut at every
    /// boundary of every agent.
    pub fn effective_quantizer(&self) -> ScalarQuantizer {
        let cells = self.cells();
        let mut boundaries: Vec<f64> = cells.iter().map(|c| c.lo).collect();
        boundaries.push(1.0);
        let reps = cells.iter().map(|c| c.rep).collect();
        ScalarQuantizer::new(boundaries, reps).expect("union of valid boundary sets")
    }
}

impl Quantization for QuantizerBank {
    fn cells(&self) -> Vec<Cell> {
        let mut cuts: Vec<f64> = self
            .quantizers
            .iter()
            .flat_map(|q| q.interior_boundaries().iter().copied())
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(0.0);
        edges.extend(cuts);
        edges.push(1.0);
        edges
            .windows(2)
            .map(|w| Cell {
                lo: w[0],
                hi: w[1],
                rep: self.effective_prior(w[0]),
            })
            .collect()
    }
}

fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::invalid(
            "weights",
            format!("{} weights for {n} agents", weights.len()),
        ));
    }
    if let Some(u) = weights.iter().find(|u| !(u.is_finite() && **u > 0.0)) {
        return Err(Error::invalid(
            "weights",
            format!("must be positive, got {u}"),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::invalid(
            "weights",
            format!("must sum to 1, got {sum}"),
        ));
    }
    Ok(())
}

/// A bank built from an identical quantizer.
#[derive(Debug, Clone)]
pub struct Disassembly {
    pub bank: QuantizerBank,
    /// Agent owning each interior boundary of the source quantizer.
    pub owners: Vec<usize>,
    /// One [`Diagnostic::RepOutOfRange`] per rep outside `[0, 1]`.
    pub diagnostics: Vec<Diagnostic>,
}

/// Split `q_s` (with `n(K-1)+1` cells) into `n` diverse `K`-cell quantizers
/// whose weighted reps reproduce `q_s` everywhere. `weights` defaults to `1/n`.
///
/// Interior boundaries go round-robin to the agents. Every agent starts at
/// `x_1`, the first rep of `q_s`; crossing a boundary owned by agent `i`
/// moves only that agent's rep, by `(x_{k+1} - x_k) / u_i`, so the weighted
/// sum tracks `q_s` cell by cell. Individual reps can leave `[0, 1]`; they
/// are kept (clamping would break the equivalence) and reported.
pub fn disassemble(
    q_s: &ScalarQuantizer,
    n: usize,
    weights: Option<&[f64]>,
) -> Result<Disassembly> {
    if n == 0 {
        return Err(Error::invalid("agents", "n must be at least 1"));
    }
    let weights = match weights {
        Some(w) => w.to_vec(),
        None => vec![1.0 / n as f64; n],
    };
    check_weights(&weights, n)?;
    let k_s = q_s.levels();
    if !(k_s - 1).is_multiple_of(n) {
        return Err(Error::Shape {
            levels: k_s,
            agents: n,
        });
    }
    let k = (k_s - 1) / n + 1;
    let x = q_s.reps();
    let interior = q_s.interior_boundaries();

    let mut bounds: Vec<Vec<f64>> = vec![vec![0.0]; n];
    let mut reps: Vec<Vec<f64>> = vec![vec![x[0]]; n];
    let mut current = vec![x[0]; n];
    let mut owners = Vec::with_capacity(interior.len());
    for (j, &b) in interior.iter().enumerate() {
        let i = j % n;
        owners.push(i);
        // solve for the owner's rep so the weighted sum lands on x_{j+1};
        // algebraically the telescoping update above, with no drift
        let others: f64 = (0..n)
            .filter(|&m| m != i)
            .map(|m| weights[m] * current[m])
            .sum();
        current[i] = (x[j + 1] - others) / weights[i];
        bounds[i].push(b);
        reps[i].push(current[i]);
    }

    let mut diagnostics = Vec::new();
    let mut quantizers = Vec::with_capacity(n);
    for (agent, (mut b, a)) in bounds.into_iter().zip(reps).enumerate() {
        b.push(1.0);
        debug_assert_eq!(a.len(), k);
        for (cell, &rep) in a.iter().enumerate() {
            if !(0.0..=1.0).contains(&rep) {
                diagnostics.push(Diagnostic::RepOutOfRange { agent, cell, rep });
            }
        }
        quantizers.push(ScalarQuantizer::new(b, a)?);
    }
    Ok(Disassembly {
        bank: QuantizerBank::new(quantizers, weights)?,
        owners,
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    /// `max |Σ u_i q_i(p0) - q_S(p0)|` over the checked points.
    pub max_deviation: f64,
    pub worst_p0: f64,
    pub points_checked: usize,
    /// `max_deviation ≤ 1e-10`.
    pub passed: bool,
}

/// Compare a bank's effective prior with `q_s` on a uniform grid of
/// `grid_points` points plus every boundary of every quantizer and its
/// floating-point neighbors.
pub fn verify_equivalence(
    bank: &QuantizerBank,
    q_s: &ScalarQuantizer,
    grid_points: usize,
) -> EquivalenceReport {
    let mut points: Vec<f64> = match grid_points {
        0 => Vec::new(),
        1 => vec![0.5],
        g => (0..g).map(|i| i as f64 / (g - 1) as f64).collect(),
    };
    let edges = bank
        .quantizers()
        .iter()
        .chain(core::iter::once(q_s))
        .flat_map(|q| q.boundaries().iter().copied());
    for b in edges {
        points.push(b);
        if b > 0.0 {
            points.push(f64::from_bits(b.to_bits() - 1));
        }
        if b < 1.0 {
            points.push(f64::from_bits(b.to_bits() + 1));
        }
    }
    let mut report = EquivalenceReport {
        max_deviation: 0.0,
        worst_p0: 0.0,
        points_checked: points.len(),
        passed: true,
    };
    for p in points {
        let dev = (bank.effective_prior(p) - q_s.quantize(p)).abs();
        if dev > report.max_deviation || dev.is_nan() {
            report.max_deviation = dev;
            report.worst_p0 = p;
        }
    }
    report.passed = report.max_deviation <= EQUIVALENCE_TOL;
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(b: &[f64], a: &[f64]) -> ScalarQuantizer {
        ScalarQuantizer::new(b.to_vec(), a.to_vec()).unwrap()
    }

    #[test]
    fn weights_are_validated() {
        let one = ScalarQuantizer::constant(0.5).unwrap();
        assert!(QuantizerBank::new(vec![one.clone(); 2], vec![1.0, 0.0]).is_err());
        assert!(QuantizerBank::new(vec![one.clone(); 2], vec![0.5, 0.6]).is_err());
        assert!(QuantizerBank::new(vec![one.clone(); 2], vec![0.5]).is_err());
        assert!(QuantizerBank::new(vec![one; 2], vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn effective_prior_arithmetic() {
        let bank = QuantizerBank::equal_weights(vec![
            ScalarQuantizer::constant(0.2).unwrap(),
            ScalarQuantizer::constant(0.6).unwrap(),
        ])
        .unwrap();
        assert!((bank.effective_prior(0.9) - 0.4).abs() < 1e-15);
        let same = QuantizerBank::identical(q(&[0.0, 0.3, 1.0], &[0.1, 0.7]), 4).unwrap();
        assert!((same.effective_prior(0.5) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn common_risk_forms_agree() {
        let bank = QuantizerBank::new(
            vec![
                q(&[0.0, 0.4, 1.0], &[0.2, 0.8]),
                q(&[0.0, 0.7, 1.0], &[0.3, 0.9]),
            ],
            vec![0.3, 0.7],
        )
        .unwrap();
        let e = ErrorPair { p1: 0.2, p2: 0.35 };
        let c = CostPair::new(1.0, 2.0).unwrap();
        let eff = 0.3 * 0.8 + 0.7 * 0.3;
        let expected = eff * 0.2 + (1.0 - eff) * 2.0 * 0.35;
        assert!((bank.perceived_common_risk(0.5, e, c) - expected).abs() < 1e-15);
    }

    #[test]
    fn single_cell_source() {
        let d = disassemble(&ScalarQuantizer::constant(0.37).unwrap(), 5, None).unwrap();
        assert!(d.bank.quantizers().iter().all(|q| q.reps() == [0.37]));
    }

    #[test]
    fn one_agent_gets_the_source() {
        let src = q(&[0.0, 0.3, 0.6, 1.0], &[0.1, 0.45, 0.8]);
        let d = disassemble(&src, 1, None).unwrap();
        assert_eq!(d.bank.quantizers()[0], src);
    }

    #[test]
    fn shape_is_checked() {
        let src = ScalarQuantizer::uniform_midpoints(4).unwrap();
        assert_eq!(
            disassemble(&src, 2, None).unwrap_err(),
            Error::Shape {
                levels: 4,
                agents: 2
            }
        );
    }

    #[test]
    fn split_reproduces_source() {
        let src = ScalarQuantizer::uniform_midpoints(7).unwrap();
        let d = disassemble(&src, 3, Some(&[0.5, 0.3, 0.2])).unwrap();
        assert_eq!(d.owners, vec![0, 1, 2, 0, 1, 2]);
        assert!(d.bank.quantizers().iter().all(|q| q.levels() == 3));
        let report = verify_equivalence(&d.bank, &src, 1000);
        assert!(report.passed, "{report:?}");
        let eff = d.bank.effective_quantizer();
        assert_eq!(eff.boundaries(), src.boundaries());
        assert!(
            !d.diagnostics.is_empty(),
            "agent 1 leaves [0, 1] on its last cell"
        );
    }

    #[test]
    fn perturbation_shows_up() {
        let src = ScalarQuantizer::uniform_midpoints(3).unwrap();
        let d = disassemble(&src, 2, None).unwrap();
        let mut qs = d.bank.quantizers().to_vec();
        let (b, mut a) = (qs[1].boundaries().to_vec(), qs[1].reps().to_vec());
        a[0] += 1e-3;
        qs[1] = ScalarQuantizer::new(b, a).unwrap();
        let bank = QuantizerBank::equal_weights(qs).unwrap();
        let report = verify_equivalence(&bank, &src, 100);
        assert!(!report.passed);
        assert!((report.max_deviation - 0.5e-3).abs() < 1e-12);
    }
}
