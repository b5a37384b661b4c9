//! Reference computations that share no code with the library: team errors
//! from binomial sums over per-agent errors, thresholds from the sign of an
//! independently derived risk derivative, and plain Riemann sums.

#![allow(dead_code)]

use num_complex::Complex64;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

pub fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

pub fn choose(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `P(at least l of n agents vote h1)` when each does so with probability `q`.
pub fn at_least(q: f64, n: u32, l: u32) -> f64 {
    (l..=n)
        .map(|j| choose(n, j) * q.powi(j as i32) * (1.0 - q).powi((n - j) as i32))
        .sum()
}

/// d/dq of [`at_least`].
pub fn at_least_slope(q: f64, n: u32, l: u32) -> f64 {
    f64::from(n) * choose(n - 1, l - 1) * q.powi(l as i32 - 1) * (1.0 - q).powi((n - l) as i32)
}

#[derive(Debug, Clone, Copy)]
pub enum Model {
    Gaussian { s0: f64, s1: f64, sigma: f64 },
    Exponential { s0: f64, s1: f64 },
}

pub const GAUSS: Model = Model::Gaussian {
    s0: 0.0,
    s1: 1.0,
    sigma: 1.0,
};
pub const EXPO: Model = Model::Exponential { s0: 2.0, s1: 1.0 };

impl Model {
    /// Per-agent probabilities of voting h1 under h0 and under h1.
    pub fn local_votes(self, t: f64) -> (f64, f64) {
        match self {
            Model::Gaussian { s0, s1, sigma } => {
                let z = std_normal();
                (z.sf((t - s0) / sigma), z.sf((t - s1) / sigma))
            }
            Model::Exponential { s0, s1 } => {
                let t = t.max(0.0);
                ((-s0 * t).exp(), (-s1 * t).exp())
            }
        }
    }

    fn local_vote_slopes(self, t: f64) -> (f64, f64) {
        match self {
            Model::Gaussian { s0, s1, sigma } => {
                let z = std_normal();
                (
                    -z.pdf((t - s0) / sigma) / sigma,
                    -z.pdf((t - s1) / sigma) / sigma,
                )
            }
            Model::Exponential { s0, s1 } => (-s0 * (-s0 * t).exp(), -s1 * (-s1 * t).exp()),
        }
    }

    /// Team `(P1, P2)` from the binomial sums.
    pub fn team_errors(self, n: u32, l: u32, t: f64) -> (f64, f64) {
        let (q0, q1) = self.local_votes(t);
        (at_least(q0, n, l), 1.0 - at_least(q1, n, l))
    }

    /// d/dλ of the perceived risk at prior `p`.
    pub fn risk_slope(self, n: u32, l: u32, p: f64, c10: f64, c01: f64, t: f64) -> f64 {
        let (q0, q1) = self.local_votes(t);
        let (d0, d1) = self.local_vote_slopes(t);
        p * c10 * at_least_slope(q0, n, l) * d0 - (1.0 - p) * c01 * at_least_slope(q1, n, l) * d1
    }

    /// Risk-minimizing threshold: every minus-to-plus crossing of the risk
    /// slope on a coarse grid is bisected, then the lowest-risk candidate wins
    /// (λ = 0 is also a candidate in the exponential model). The gaussian
    /// bracket stays within 10σ so both slope terms stay nonzero.
    /// Returns `None` at degenerate priors.
    pub fn threshold(self, n: u32, l: u32, p: f64, c10: f64, c01: f64) -> Option<f64> {
        if p <= 0.0 || p >= 1.0 {
            return None;
        }
        let (lo, hi) = match self {
            Model::Gaussian { s0, s1, sigma } => (s0 - 10.0 * sigma, s1 + 10.0 * sigma),
            Model::Exponential { s1, .. } => (0.0, 40.0 / s1),
        };
        let g = |t: f64| self.risk_slope(n, l, p, c10, c01, t);
        let risk = |t: f64| {
            let (p1, p2) = self.team_errors(n, l, t);
            p * c10 * p1 + (1.0 - p) * c01 * p2
        };
        let mut candidates = Vec::new();
        if let Model::Exponential { .. } = self {
            candidates.push(0.0);
        }
        let steps = 400;
        let at = |i: usize| lo + (hi - lo) * i as f64 / steps as f64;
        for i in 0..steps {
            let (mut a, mut b) = (at(i), at(i + 1));
            if !(g(a) <= 0.0 && g(b) > 0.0) {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if g(mid) <= 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            candidates.push(0.5 * (a + b));
        }
        candidates
            .into_iter()
            .min_by(|x, y| risk(*x).total_cmp(&risk(*y)))
    }

    pub fn errors_at(self, n: u32, l: u32, a: f64, c10: f64, c01: f64) -> (f64, f64) {
        match self.threshold(n, l, a, c10, c01) {
            Some(t) => self.team_errors(n, l, t),
            None if a <= 0.0 => (1.0, 0.0),
            None => (0.0, 1.0),
        }
    }

    pub fn bre(self, n: u32, l: u32, p: f64, a: f64) -> f64 {
        let risk = |e: (f64, f64)| p * e.0 + (1.0 - p) * e.1;
        risk(self.errors_at(n, l, a, 1.0, 1.0)) - risk(self.errors_at(n, l, p, 1.0, 1.0))
    }
}

/// Exponential-model risk slope by complex-step differentiation of the
/// binomial-sum risk, `Im r(t + ih) / h`.
pub fn exponential_slope_complex_step(s0: f64, s1: f64, n: u32, l: u32, p: f64, t: f64) -> f64 {
    let h = 1e-30;
    let z = Complex64::new(t, h);
    let tail = |q: Complex64| -> Complex64 {
        (l..=n)
            .map(|j| choose(n, j) * q.powu(j) * (Complex64::new(1.0, 0.0) - q).powu(n - j))
            .sum()
    };
    let r =
        p * tail((-s0 * z).exp()) + (1.0 - p) * (Complex64::new(1.0, 0.0) - tail((-s1 * z).exp()));
    r.im / h
}

/// Midpoint-rule `∫_0^1 g`.
pub fn riemann(g: impl Fn(f64) -> f64, cells: usize) -> f64 {
    (0..cells)
        .map(|i| g((i as f64 + 0.5) / cells as f64))
        .sum::<f64>()
        / cells as f64
}

/// Order-statistic moments by brute midpoint summation over `[-12, 12]`,
/// with the density built from the binomial form.
pub fn order_moments(n: u32, l: u32) -> (f64, f64) {
    let z = std_normal();
    let coef = f64::from(n) * choose(n - 1, l - 1);
    let m = 400_000;
    let (a, b) = (-12.0, 12.0);
    let h = (b - a) / m as f64;
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..m {
        let v = a + (i as f64 + 0.5) * h;
        let f = z.cdf(v);
        let d = coef * f.powi((n - l) as i32) * (1.0 - f).powi(l as i32 - 1) * z.pdf(v) * h;
        m0 += d;
        m1 += v * d;
        m2 += v * v * d;
    }
    let mean = m1 / m0;
    (mean, m2 / m0 - mean * mean)
}

/// Golden-section minimum of a unimodal `g` on `[lo, hi]`.
pub fn golden_min(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..iters {
        if g1 <= g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - r * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + r * (hi - lo);
            g2 = g(x2);
        }
    }
    0.5 * (lo + hi)
}

pub const FUSIONS: [(u32, u32); 4] = [(5, 3), (5, 1), (3, 2), (1, 1)];

pub fn lib_model(m: Model) -> priorquant::LikelihoodModel {
    match m {
        Model::Gaussian { s0, s1, sigma } => {
            priorquant::LikelihoodModel::gaussian(s0, s1, sigma).unwrap()
        }
        Model::Exponential { s0, s1 } => priorquant::LikelihoodModel::exponential(s0, s1).unwrap(),
    }
}

pub fn detector(m: Model, n: u32, l: u32) -> priorquant::Detector {
    priorquant::Detector::new(
        lib_model(m),
        priorquant::FusionRule::new(n, l).unwrap(),
        priorquant::CostPair::default(),
    )
    .unwrap()
}

/// Grid failures of convexity and nonnegativity of `p0 ↦ d(p0, a)`, for
/// `a` in `{0.1, ..., 0.9}` on 200 points of `[0, 1]`.
pub fn convexity_failures(det: &priorquant::Detector) -> Vec<String> {
    let grid: Vec<f64> = (0..200).map(|i| f64::from(i) / 199.0).collect();
    let mut out = Vec::new();
    for j in 1..=9 {
        let a = f64::from(j) / 10.0;
        let at_a = det.bre(a, a).unwrap();
        if at_a.abs() > 1e-10 {
            out.push(format!("d({a},{a}) = {at_a}"));
        }
        let d: Vec<f64> = grid.iter().map(|&p| det.bre(p, a).unwrap()).collect();
        if let Some(x) = d.iter().find(|&&x| x < -1e-12) {
            out.push(format!("a={a}: negative BRE {x}"));
        }
        if let Some(w) = d.windows(3).find(|w| w[0] - 2.0 * w[1] + w[2] < -1e-8) {
            out.push(format!(
                "a={a}: second difference {}",
                w[0] - 2.0 * w[1] + w[2]
            ));
        }
    }
    out
}

/// Signs of the first differences, zeros dropped, with consecutive repeats merged.
pub fn sign_pattern(values: &[f64]) -> Vec<i8> {
    let mut out: Vec<i8> = Vec::new();
    for w in values.windows(2) {
        let s = match w[1] - w[0] {
            x if x > 0.0 => 1,
            x if x < 0.0 => -1,
            _ => continue,
        };
        if out.last() != Some(&s) {
            out.push(s);
        }
    }
    out
}

/// Grid failures of the single-minimum shape of `a ↦ d(p0, a)` for `p0` in
/// `{0.1, ..., 0.9}` on 200 points of `[0, 1]`. A flat start only happens
/// where the rule is pinned at λ = 0 and coincides with the optimal rule,
/// so it must sit at zero.
pub fn stationary_failures(det: &priorquant::Detector) -> Vec<String> {
    let grid: Vec<f64> = (0..200).map(|i| f64::from(i) / 199.0).collect();
    let mut out = Vec::new();
    for j in 1..=9 {
        let p = f64::from(j) / 10.0;
        let d: Vec<f64> = grid.iter().map(|&a| det.bre(p, a).unwrap()).collect();
        let pattern = sign_pattern(&d);
        if !matches!(pattern.as_slice(), [-1, 1] | [1] | [-1]) {
            out.push(format!("p0={p}: difference signs {pattern:?}"));
        } else if pattern == [1] && d[0] > 1e-12 {
            out.push(format!("p0={p}: flat start at {}", d[0]));
        }
    }
    out
}
