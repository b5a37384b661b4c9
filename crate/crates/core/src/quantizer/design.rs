//! Lloyd-Max design of prior quantizers.
//!
//! The Bayes risk error `d(p0, a)` is a Bregman divergence in `p0`, so for
//! the mean criterion the best representation point of a cell is the
//! conditional mean of the prior over it. The nearest-neighbor boundary
//! between reps `a_k < a_{k+1}` is where the two affine mismatched-risk lines
//! cross:
//!
//! ```text
//! b* = c01·ΔP2 / (c01·ΔP2 - c10·ΔP1),   ΔPj = Pj(a_k) - Pj(a_{k+1})
//! ```
//!
//! For the minimax criterion the rep of `[lo, hi]` equalizes `d(lo, a)` and
//! `d(hi, a)`, and at the fixed point every boundary (0 and 1 included) has
//! the same BRE. Nothing in that criterion depends on the prior, so minimax
//! designs only see the prior through their starting point.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::OnceCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PriorDensity, Quantization, ScalarQuantizer};
use crate::detection::{CostPair, Detector, ErrorPair, FusionRule, LikelihoodModel};
use crate::stats::find_root_monotone;
use crate::{Error, Result};

/// Cells with less prior mass than this are treated as empty.
const EMPTY_MASS: f64 = 1e-15;
/// Reps this far outside `[0, 1]` are rejected by the risk integrals.
const REP_SLACK: f64 = 1e-9;
/// Extra evaluation points used by [`Designer::max_bre`].
const SAFETY_GRID: usize = 1000;
/// Lloyd sweeps hand over to Newton steps once parameters move less than this.
const NEWTON_SWITCH: f64 = 1e-4;
const NEWTON_STEPS: usize = 30;
/// Newton stops at this fraction of the sweep tolerance.
const NEWTON_TARGET: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Mean Bayes risk error under the prior density.
    Mbre,
    /// Maximum Bayes risk error over `p0 ∈ [0, 1]`.
    Minimax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub criterion: Criterion,
    pub max_iter: usize,
    /// Stop once no boundary or rep moves more than this in a sweep.
    pub tol: f64,
    /// Random starts tried in addition to the prior-quantile start.
    pub restarts: usize,
    pub seed: u64,
    /// Relative tolerance of the risk integrals.
    pub quad_tol: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            criterion: Criterion::Mbre,
            max_iter: 500,
            tol: 1e-9,
            restarts: 8,
            seed: 0,
            quad_tol: 1e-10,
        }
    }
}

impl DesignOptions {
    pub fn with_criterion(criterion: Criterion) -> Self {
        Self {
            criterion,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// The iteration limit was hit; the best iterate was returned.
    NotConverged {
        iterations: usize,
        final_change: f64,
    },
    /// A cell lost all prior mass and was merged, and the widest cell split.
    EmptyCellResplit { cell: usize, iteration: usize },
    /// Two neighboring reps produce the same rule; the boundary fell back to their midpoint.
    DegenerateBoundary { boundary: usize },
    /// A rep of a disassembled quantizer lies outside `[0, 1]`.
    RepOutOfRange { agent: usize, cell: usize, rep: f64 },
}

/// Outcome of a Lloyd-Max run.
#[derive(Debug, Clone)]
pub struct Design {
    pub quantizer: ScalarQuantizer,
    pub criterion: Criterion,
    /// MBRE or maximum BRE of `quantizer`, per `criterion`.
    pub distortion: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest parameter change in the last sweep.
    pub final_change: f64,
    /// Which start produced the result (0 is the prior-quantile start).
    pub start: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Designs and evaluates quantizers for one detector and prior.
///
/// Everything runs against the equivalent single agent of the detector, so
/// a team design is just a design for a different noise law.
#[derive(Debug, Clone)]
pub struct Designer {
    detector: Detector,
    prior: PriorDensity,
    quad_tol: f64,
    mean_risk: OnceCell<f64>,
}

impl Designer {
    pub fn new(detector: Detector, prior: PriorDensity) -> Self {
        Self {
            detector,
            prior,
            quad_tol: DesignOptions::default().quad_tol,
            mean_risk: OnceCell::new(),
        }
    }

    pub fn with_quad_tol(mut self, quad_tol: f64) -> Self {
        self.quad_tol = quad_tol;
        self.mean_risk = OnceCell::new();
        self
    }

    pub fn detector(&self) -> &Detector {
        &self.detector
    }

    pub fn prior(&self) -> &PriorDensity {
        &self.prior
    }

    /// `∫ R(p0) f(p0) dp0`, the mean risk with the prior known exactly.
    pub fn mean_true_risk(&self) -> Result<f64> {
        if let Some(&v) = self.mean_risk.get() {
            return Ok(v);
        }
        let v = self.prior.integrate_split(
            |p| self.detector.true_risk_unchecked(p),
            0.0,
            1.0,
            &[],
            self.quad_tol,
        )?;
        Ok(*self.mean_risk.get_or_init(|| v))
    }

    /// Nearest-neighbor boundary between two reps. The flag is set when the
    /// reps give identical error pairs and the midpoint was used instead.
    pub fn nn_boundary(&self, a_k: f64, a_next: f64) -> Result<(f64, bool)> {
        check_rep_pair(a_k, a_next)?;
        let e_k = self.detector.errors_at_unchecked(a_k);
        let e_n = self.detector.errors_at_unchecked(a_next);
        Ok(self.nn_from_errors(a_k, a_next, e_k, e_n))
    }

    fn nn_from_errors(&self, a_k: f64, a_next: f64, e_k: ErrorPair, e_n: ErrorPair) -> (f64, bool) {
        let CostPair { c10, c01 } = self.detector.costs();
        let dp1 = c10 * (e_k.p1 - e_n.p1);
        let dp2 = c01 * (e_k.p2 - e_n.p2);
        let denom = dp2 - dp1;
        let b = dp2 / denom;
        if (dp1 == 0.0 && dp2 == 0.0) || !b.is_finite() {
            return (0.5 * (a_k + a_next), true);
        }
        (b.clamp(a_k, a_next), false)
    }

    /// Conditional mean of the prior over `[lo, hi]`; `None` for an empty cell.
    pub fn centroid_mbre(&self, lo: f64, hi: f64) -> Result<Option<f64>> {
        centroid_mbre(lo, hi, &self.prior)
    }

    /// The `a ∈ [lo, hi]` with `d(lo, a) = d(hi, a)`.
    pub fn centroid_minimax(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::invalid(
                "cell",
                alloc::format!("[{lo}, {hi}] is not a cell of [0, 1]"),
            ));
        }
        let det = &self.detector;
        let (r_lo, r_hi) = (det.true_risk_unchecked(lo), det.true_risk_unchecked(hi));
        let g = |a: f64| {
            let e = det.errors_at_unchecked(a);
            (det.bayes_risk(lo, e) - r_lo) - (det.bayes_risk(hi, e) - r_hi)
        };
        find_root_monotone(g, lo, hi, 1e-15)
    }

    /// One nearest-neighbor step followed by one centroid step.
    pub fn sweep(
        &self,
        q: &ScalarQuantizer,
        criterion: Criterion,
    ) -> Result<(ScalarQuantizer, Vec<Diagnostic>)> {
        let mut diagnostics = Vec::new();
        let errors: Vec<ErrorPair> = q
            .reps()
            .iter()
            .map(|&a| self.detector.errors_at_unchecked(a))
            .collect();
        let bounds = self.nn_step(q.reps(), &errors, &mut diagnostics)?;
        let (bounds, reps) = self.centroid_step(criterion, bounds, 0, &mut diagnostics)?;
        Ok((ScalarQuantizer::new(bounds, reps)?, diagnostics))
    }

    fn nn_step(
        &self,
        reps: &[f64],
        errors: &[ErrorPair],
        diagnostics: &mut Vec<Diagnostic>,
    ) -> Result<Vec<f64>> {
        let mut bounds = Vec::with_capacity(reps.len() + 1);
        bounds.push(0.0);
        for k in 0..reps.len() - 1 {
            check_rep_pair(reps[k], reps[k + 1])?;
            let (b, degenerate) =
                self.nn_from_errors(reps[k], reps[k + 1], errors[k], errors[k + 1]);
            if degenerate {
                diagnostics.push(Diagnostic::DegenerateBoundary { boundary: k + 1 });
            }
            bounds.push(b);
        }
        bounds.push(1.0);
        // clamped boundaries may tie when reps nearly coincide
        for k in 1..bounds.len() - 1 {
            if bounds[k] <= bounds[k - 1] {
                bounds[k] = next_up(bounds[k - 1]);
            }
        }
        if bounds[bounds.len() - 2] >= 1.0 {
            return Err(Error::invalid(
                "quantizer",
                "representation points collapsed onto 1",
            ));
        }
        Ok(bounds)
    }

    // Reps for the given boundaries. Under the mean criterion, cells without
    // prior mass are merged into a neighbor and the widest cell is split at
    // its prior median until the level count is restored.
    fn centroid_step(
        &self,
        criterion: Criterion,
        mut bounds: Vec<f64>,
        iteration: usize,
        diagnostics: &mut Vec<Diagnostic>,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if criterion == Criterion::Minimax {
            let reps = bounds
                .windows(2)
                .map(|w| self.centroid_minimax(w[0], w[1]))
                .collect::<Result<Vec<_>>>()?;
            return Ok((bounds, reps));
        }
        let k = bounds.len() - 1;
        let mut masses = self.cell_masses(&bounds)?;
        let mut cell = 0;
        while cell < masses.len() {
            if masses[cell] > EMPTY_MASS {
                cell += 1;
                continue;
            }
            if masses.len() == 1 {
                return Err(Error::invalid("prior", "density has no mass on [0, 1]"));
            }
            diagnostics.push(Diagnostic::EmptyCellResplit { cell, iteration });
            // merge with the right neighbor, or the left one for the last cell
            let (drop, keep) = if cell + 1 < masses.len() {
                (cell + 1, cell)
            } else {
                (cell, cell - 1)
            };
            bounds.remove(drop);
            masses.remove(keep + 1);
            masses[keep] = self.prior.mass(bounds[keep], bounds[keep + 1])?;
            cell = 0;
        }
        while bounds.len() - 1 < k {
            let widest = (0..masses.len())
                .max_by(|&x, &y| {
                    (bounds[x + 1] - bounds[x]).total_cmp(&(bounds[y + 1] - bounds[y]))
                })
                .expect("at least one cell");
            let (lo, hi) = (bounds[widest], bounds[widest + 1]);
            let target = 0.5 * masses[widest];
            let mid = find_root_monotone(
                |p| self.prior.mass(lo, p).unwrap_or(f64::NAN) - target,
                lo,
                hi,
                1e-14,
            )?;
            if !(lo < mid && mid < hi) {
                return Err(Error::invalid(
                    "prior",
                    "could not place every cell on prior mass",
                ));
            }
            bounds.insert(widest + 1, mid);
            masses[widest] = self.prior.mass(lo, mid)?;
            masses.insert(widest + 1, self.prior.mass(mid, hi)?);
        }
        let mut reps = Vec::with_capacity(k);
        for w in bounds.windows(2) {
            match self.centroid_mbre(w[0], w[1])? {
                Some(a) => reps.push(a),
                None => {
                    return Err(Error::invalid(
                        "prior",
                        "could not place every cell on prior mass",
                    ))
                }
            }
        }
        Ok((bounds, reps))
    }

    fn cell_masses(&self, bounds: &[f64]) -> Result<Vec<f64>> {
        bounds
            .windows(2)
            .map(|w| self.prior.mass(w[0], w[1]))
            .collect()
    }

    /// Lloyd-Max design of a `k`-level quantizer.
    pub fn design(&self, k: usize, opts: &DesignOptions) -> Result<Design> {
        if k == 0 {
            return Err(Error::invalid("levels", "K must be at least 1"));
        }
        if !(opts.tol > 0.0) || opts.max_iter == 0 {
            return Err(Error::invalid(
                "design options",
                "need tol > 0 and max_iter >= 1",
            ));
        }
        let mut best = self.run(self.quantile_start(k)?, 0, opts)?;
        if k > 1 {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            for start in 1..=opts.restarts {
                rng.set_stream(start as u64);
                let Some(init) = self.random_start(k, &mut rng)? else {
                    continue;
                };
                let candidate = self.run(init, start, opts)?;
                if candidate.distortion < best.distortion {
                    best = candidate;
                }
            }
        }
        Ok(best)
    }

    fn quantile_start(&self, k: usize) -> Result<Vec<f64>> {
        let mut bounds = Vec::with_capacity(k + 1);
        bounds.push(0.0);
        for i in 1..k {
            bounds.push(self.prior.quantile(i as f64 / k as f64)?);
        }
        bounds.push(1.0);
        Ok(bounds)
    }

    fn random_start(&self, k: usize, rng: &mut ChaCha8Rng) -> Result<Option<Vec<f64>>> {
        let mut levels: Vec<f64> = (1..k).map(|_| rng.random::<f64>()).collect();
        levels.sort_by(f64::total_cmp);
        let mut bounds = vec![0.0];
        for u in levels {
            bounds.push(self.prior.quantile(u)?);
        }
        bounds.push(1.0);
        if bounds.windows(2).any(|w| !(w[0] < w[1])) {
            return Ok(None);
        }
        Ok(Some(bounds))
    }

    fn run(&self, init: Vec<f64>, start: usize, opts: &DesignOptions) -> Result<Design> {
        let criterion = opts.criterion;
        let mut diagnostics = Vec::new();
        let (mut bounds, mut reps) = self.centroid_step(criterion, init, 0, &mut diagnostics)?;
        let mut errors: Vec<ErrorPair> = reps
            .iter()
            .map(|&a| self.detector.errors_at_unchecked(a))
            .collect();
        let mut distortion = self.distortion(criterion, &bounds, &reps, &errors)?;
        let mut best = (distortion, bounds.clone(), reps.clone());
        let mut change = f64::INFINITY;
        let mut iterations = 0;
        let mut try_newton = true;
        while iterations < opts.max_iter && !(change < opts.tol) {
            iterations += 1;
            if try_newton && change < NEWTON_SWITCH {
                try_newton = false;
                if let Some((b, a)) = self.newton_polish(criterion, &bounds, opts.tol)? {
                    bounds = b;
                    reps = a;
                    errors = reps
                        .iter()
                        .map(|&a| self.detector.errors_at_unchecked(a))
                        .collect();
                }
            }
            let nn = self.nn_step(&reps, &errors, &mut diagnostics)?;
            let (new_bounds, new_reps) =
                self.centroid_step(criterion, nn, iterations, &mut diagnostics)?;
            change = max_change(&bounds, &new_bounds).max(max_change(&reps, &new_reps));
            bounds = new_bounds;
            reps = new_reps;
            errors = reps
                .iter()
                .map(|&a| self.detector.errors_at_unchecked(a))
                .collect();
            distortion = self.distortion(criterion, &bounds, &reps, &errors)?;
            if distortion <= best.0 {
                best = (distortion, bounds.clone(), reps.clone());
            }
        }
        let converged = change < opts.tol;
        let (distortion, bounds, reps) = if converged {
            (distortion, bounds, reps)
        } else {
            diagnostics.push(Diagnostic::NotConverged {
                iterations,
                final_change: change,
            });
            best
        };
        Ok(Design {
            quantizer: ScalarQuantizer::new(bounds, reps)?,
            criterion,
            distortion,
            iterations,
            converged,
            final_change: change,
            start,
            diagnostics,
        })
    }

    // One Lloyd sweep seen as a map on the interior boundaries. `None` when
    // the sweep leaves the regime where that map is smooth (a cell loses its
    // mass, two reps give the same rule, or the ordering breaks).
    fn boundary_map(&self, criterion: Criterion, interior: &[f64]) -> Result<Option<SweepImage>> {
        let mut bounds = Vec::with_capacity(interior.len() + 2);
        bounds.push(0.0);
        bounds.extend_from_slice(interior);
        bounds.push(1.0);
        if bounds.windows(2).any(|w| !(w[0] < w[1])) {
            return Ok(None);
        }
        let mut diagnostics = Vec::new();
        let (bounds, reps) = self.centroid_step(criterion, bounds, 0, &mut diagnostics)?;
        if !diagnostics.is_empty() || reps.windows(2).any(|w| !(w[0] < w[1])) {
            return Ok(None);
        }
        let errors: Vec<ErrorPair> = reps
            .iter()
            .map(|&a| self.detector.errors_at_unchecked(a))
            .collect();
        let next = self.nn_step(&reps, &errors, &mut diagnostics)?;
        if !diagnostics.is_empty() {
            return Ok(None);
        }
        Ok(Some((bounds, reps, next)))
    }

    // Newton's method on `G(b) - b = 0`, where `G` is one Lloyd sweep. Cell
    // k's rep only depends on b_{k-1} and b_k, and boundary k only on the
    // reps on either side, so the Jacobian is tridiagonal and three
    // perturbed sweeps (every third boundary at once) recover it.
    fn newton_polish(
        &self,
        criterion: Criterion,
        bounds: &[f64],
        tol: f64,
    ) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        let m = bounds.len().saturating_sub(2);
        if m == 0 {
            return Ok(None);
        }
        let residual = |x: &[f64]| -> Result<Option<SweepImage>> {
            Ok(self.boundary_map(criterion, x)?.map(|(b, a, next)| {
                let r = (0..m).map(|i| next[i + 1] - x[i]).collect();
                (b, a, r)
            }))
        };
        let mut x = bounds[1..=m].to_vec();
        let Some(mut current) = residual(&x)? else {
            return Ok(None);
        };
        for _ in 0..NEWTON_STEPS {
            let norm = current.2.iter().fold(0.0_f64, |acc, r| acc.max(r.abs()));
            if norm < NEWTON_TARGET * tol {
                return Ok(Some((current.0, current.1)));
            }
            let gap = bounds_gap(&x);
            let h = (1e-7_f64).min(0.1 * gap);
            let (mut lower, mut diag, mut upper) = (vec![0.0; m], vec![-1.0; m], vec![0.0; m]);
            for color in 0..3 {
                let mut xp = x.clone();
                for j in (color..m).step_by(3) {
                    xp[j] += h;
                }
                let Some((_, _, rp)) = residual(&xp)? else {
                    return Ok(None);
                };
                for j in (color..m).step_by(3) {
                    // residual = G(x) - x, so the identity is already included
                    let col = |i: usize| (rp[i] - current.2[i]) / h;
                    diag[j] = col(j);
                    if j > 0 {
                        upper[j - 1] = col(j - 1);
                    }
                    if j + 1 < m {
                        lower[j + 1] = col(j + 1);
                    }
                }
            }
            let rhs: Vec<f64> = current.2.iter().map(|r| -r).collect();
            let Some(dx) = solve_tridiagonal(&lower, &diag, &upper, &rhs) else {
                return Ok(None);
            };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi + t * di).collect();
                if let Some(next) = residual(&trial)? {
                    if next.2.iter().fold(0.0_f64, |acc, r| acc.max(r.abs())) < norm {
                        x = trial;
                        current = next;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                return Ok(None);
            }
        }
        Ok(None)
    }

    fn distortion(
        &self,
        criterion: Criterion,
        bounds: &[f64],
        reps: &[f64],
        errors: &[ErrorPair],
    ) -> Result<f64> {
        match criterion {
            Criterion::Mbre => {
                let mut total = 0.0;
                for ((w, _), &e) in bounds.windows(2).zip(reps).zip(errors) {
                    total += self.cell_mismatched_risk(w[0], w[1], e)?;
                }
                Ok(total - self.mean_true_risk()?)
            }
            Criterion::Minimax => Ok(self
                .boundary_bre_parts(bounds, errors)
                .into_iter()
                .fold(0.0, f64::max)),
        }
    }

    // ∫_cell R_M(p; rule) f(p) dp, which is affine in the two prior moments.
    fn cell_mismatched_risk(&self, lo: f64, hi: f64, e: ErrorPair) -> Result<f64> {
        let CostPair { c10, c01 } = self.detector.costs();
        let m0 = self.prior.mass(lo, hi)?;
        let m1 = self.prior.first_moment(lo, hi)?;
        Ok(c10 * e.p1 * m1 + c01 * e.p2 * (m0 - m1))
    }

    fn boundary_bre_parts(&self, bounds: &[f64], errors: &[ErrorPair]) -> Vec<f64> {
        let k = errors.len();
        (0..=k)
            .map(|j| {
                let b = bounds[j];
                let left = if j > 0 {
                    self.detector.bre_with_errors(b, errors[j - 1])
                } else {
                    0.0
                };
                let right = if j < k {
                    self.detector.bre_with_errors(b, errors[j])
                } else {
                    0.0
                };
                left.max(right)
            })
            .collect()
    }

    /// BRE at every boundary `b_0 = 0, ..., b_K = 1`, taking the larger of
    /// the two adjacent cells at interior boundaries.
    pub fn boundary_bres(&self, q: &ScalarQuantizer) -> Vec<f64> {
        let errors: Vec<ErrorPair> = q
            .reps()
            .iter()
            .map(|&a| self.detector.errors_at_unchecked(a))
            .collect();
        self.boundary_bre_parts(q.boundaries(), &errors)
    }

    /// `∫ d(p0, q(p0)) f(p0) dp0`. Cells come from [`Quantization::cells`],
    /// so a bank is integrated over the union of all its boundaries.
    pub fn mbre(&self, q: &dyn Quantization) -> Result<f64> {
        let mut total = 0.0;
        for cell in q.cells() {
            check_rep(cell.rep)?;
            let e = self.detector.errors_at_unchecked(cell.rep);
            total += self.cell_mismatched_risk(cell.lo, cell.hi, e)?;
        }
        Ok(total - self.mean_true_risk()?)
    }

    /// `max_{p0} d(p0, q(p0))`. The BRE is convex on each cell, so the
    /// maximum sits at a cell end; a uniform grid is checked as well.
    pub fn max_bre(&self, q: &dyn Quantization) -> Result<f64> {
        let det = &self.detector;
        let mut worst: f64 = 0.0;
        for cell in q.cells() {
            check_rep(cell.rep)?;
            let e = det.errors_at_unchecked(cell.rep);
            worst = worst
                .max(det.bre_with_errors(cell.lo, e))
                .max(det.bre_with_errors(cell.hi, e));
        }
        let cells = q.cells();
        let mut k = 0;
        for i in 0..=SAFETY_GRID {
            let p = i as f64 / SAFETY_GRID as f64;
            while k + 1 < cells.len() && p >= cells[k].hi {
                k += 1;
            }
            worst = worst.max(det.bre_unchecked(p, cells[k].rep));
        }
        Ok(worst)
    }
}

// (boundaries, reps, next boundaries) of one sweep, or the residual in place of the last
type SweepImage = (Vec<f64>, Vec<f64>, Vec<f64>);

fn check_rep(a: f64) -> Result<()> {
    if !(-REP_SLACK..=1.0 + REP_SLACK).contains(&a) {
        return Err(Error::invalid(
            "representation point",
            alloc::format!("{a} is not a probability"),
        ));
    }
    Ok(())
}

fn check_rep_pair(a_k: f64, a_next: f64) -> Result<()> {
    check_rep(a_k)?;
    check_rep(a_next)?;
    if !(a_k < a_next) {
        return Err(Error::invalid(
            "representation points",
            alloc::format!("need a_k < a_next, got {a_k} and {a_next}"),
        ));
    }
    Ok(())
}

fn bounds_gap(interior: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    let mut prev = 0.0;
    for &b in interior.iter().chain([1.0].iter()) {
        gap = gap.min(b - prev);
        prev = b;
    }
    gap
}

// Thomas algorithm; `lower[0]` and `upper[m-1]` are ignored.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut denom = diag[0];
    if denom == 0.0 {
        return None;
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..m {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    for i in (0..m - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

fn max_change(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

/// Nearest-neighbor boundary between reps `a_k < a_next` (midpoint if both
/// reps yield the same rule).
pub fn nn_boundary(
    a_k: f64,
    a_next: f64,
    model: LikelihoodModel,
    fusion: FusionRule,
    costs: CostPair,
) -> Result<f64> {
    let d = Designer::new(
        Detector::new(model, fusion, costs)?,
        PriorDensity::uniform(),
    );
    d.nn_boundary(a_k, a_next).map(|(b, _)| b)
}

/// Conditional mean of the prior over `[lo, hi]`, or `None` if the cell has no mass.
pub fn centroid_mbre(lo: f64, hi: f64, prior: &PriorDensity) -> Result<Option<f64>> {
    if !(lo < hi) {
        return Err(Error::invalid(
            "cell",
            alloc::format!("[{lo}, {hi}] is empty"),
        ));
    }
    let m0 = prior.mass(lo, hi)?;
    if !(m0 > EMPTY_MASS) {
        return Ok(None);
    }
    let m1 = prior.first_moment(lo, hi)?;
    Ok(Some((m1 / m0).clamp(lo, hi)))
}

/// The rep of `[lo, hi]` with equal BRE at both ends.
pub fn centroid_minimax(
    lo: f64,
    hi: f64,
    model: LikelihoodModel,
    fusion: FusionRule,
    costs: CostPair,
) -> Result<f64> {
    Designer::new(
        Detector::new(model, fusion, costs)?,
        PriorDensity::uniform(),
    )
    .centroid_minimax(lo, hi)
}

/// Lloyd-Max design with default options for the given criterion.
pub fn lloyd_max(
    k: usize,
    model: LikelihoodModel,
    fusion: FusionRule,
    costs: CostPair,
    prior: &PriorDensity,
    criterion: Criterion,
) -> Result<Design> {
    Designer::new(Detector::new(model, fusion, costs)?, prior.clone())
        .design(k, &DesignOptions::with_criterion(criterion))
}

pub fn mbre(
    q: &dyn Quantization,
    model: LikelihoodModel,
    fusion: FusionRule,
    costs: CostPair,
    prior: &PriorDensity,
) -> Result<f64> {
    Designer::new(Detector::new(model, fusion, costs)?, prior.clone()).mbre(q)
}

pub fn max_bre(
    q: &dyn Quantization,
    model: LikelihoodModel,
    fusion: FusionRule,
    costs: CostPair,
) -> Result<f64> {
    Designer::new(
        Detector::new(model, fusion, costs)?,
        PriorDensity::uniform(),
    )
    .max_bre(q)
}
