//! Globally adaptive Simpson quadrature.
//!
//! The interval is split into a few initial panels; the panel with the
//! largest Richardson error estimate is bisected until the summed estimate
//! drops below `rel_tol` times the integral of `|f|`. Infinite endpoints are
//! handled by the substitution `x = atanh(t)` (`dx = dt / (1 - t²)`), so
//! `(-∞, ∞)` maps to `(-1, 1)` and a half line `[a, ∞)` maps to `[0, 1)`.
//! Integrands are expected to be smooth inside the interval; callers split at
//! known kinks or jumps with [`integrate_pieces`].

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::math::atanh;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub rel_tol: f64,
    /// Integrals whose `∫|f|` stays below this are accepted as is.
    pub abs_floor: f64,
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_floor: 1e-300,
            initial_panels: 8,
            max_panels: 100_000,
        }
    }
}

/// Integrate `f` over `[lo, hi]` to relative tolerance `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    Integrator {
        rel_tol,
        ..Integrator::default()
    }
    .integrate(f, lo, hi)
    .map(|i| i.value)
}

/// Integrate over consecutive pieces `[points[0], points[1]], [points[1], points[2]], ...`,
/// skipping empty pieces.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], rel_tol: f64) -> Result<f64> {
    let quad = Integrator {
        rel_tol,
        ..Integrator::default()
    };
    let mut total = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            total += quad.integrate(&f, w[0], w[1])?.value;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    // f at a, a+h/4, a+h/2, a+3h/4, b
    f: [f64; 5],
    value: f64,
    abs_value: f64,
    error: f64,
}

impl Panel {
    fn new(a: f64, b: f64, f: [f64; 5]) -> Self {
        let h = b - a;
        let coarse = h / 6.0 * (f[0] + 4.0 * f[2] + f[4]);
        let fine = h / 12.0 * (f[0] + 4.0 * f[1] + 2.0 * f[2] + 4.0 * f[3] + f[4]);
        let abs_value = h / 12.0
            * (f[0].abs() + 4.0 * f[1].abs() + 2.0 * f[2].abs() + 4.0 * f[3].abs() + f[4].abs());
        Self {
            a,
            b,
            f,
            value: fine + (fine - coarse) / 15.0,
            abs_value,
            error: (fine - coarse).abs() / 15.0,
        }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

enum Map {
    Identity,
    /// x = atanh(t) on (-1, 1)
    Both,
    /// x = lo + atanh(t) on [0, 1)
    Upper(f64),
    /// x = hi - atanh(t) on [0, 1)
    Lower(f64),
}

impl Map {
    fn eval<F: Fn(f64) -> f64>(&self, f: &F, t: f64) -> f64 {
        let (x, jac) = match *self {
            Map::Identity => return f(t),
            Map::Both => (atanh(t), 1.0 / (1.0 - t * t)),
            Map::Upper(lo) => (lo + atanh(t), 1.0 / (1.0 - t * t)),
            Map::Lower(hi) => (hi - atanh(t), 1.0 / (1.0 - t * t)),
        };
        if !x.is_finite() || !jac.is_finite() {
            return 0.0;
        }
        let y = f(x) * jac;
        // far-tail underflow of f against an overflowing Jacobian
        if y.is_nan() && f(x) == 0.0 {
            0.0
        } else {
            y
        }
    }
}

impl Integrator {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<Integral> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::invalid(
                "integration bounds",
                alloc::format!("[{lo}, {hi}]"),
            ));
        }
        if lo == hi {
            return Ok(Integral {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }
        let (map, a, b) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (Map::Identity, lo, hi),
            (false, false) => (Map::Both, -1.0, 1.0),
            (true, false) => (Map::Upper(lo), 0.0, 1.0),
            (false, true) => (Map::Lower(hi), 0.0, 1.0),
        };
        // Lower: the sign of dx = -dt/(1-t²) cancels against the swapped limits.

        let mut evaluations = 0usize;
        let mut eval = |t: f64| -> Result<f64> {
            evaluations += 1;
            let y = map.eval(&f, t);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::invalid(
                    "integrand",
                    alloc::format!("non-finite value {y} at t = {t}"),
                ))
            }
        };

        let n0 = self.initial_panels.max(1);
        let h0 = (b - a) / n0 as f64;
        let mut heap = BinaryHeap::with_capacity(4 * n0);
        let mut left = eval(a)?;
        for i in 0..n0 {
            let pa = a + h0 * i as f64;
            let pb = if i + 1 == n0 {
                b
            } else {
                a + h0 * (i + 1) as f64
            };
            let h = pb - pa;
            let f = [
                left,
                eval(pa + 0.25 * h)?,
                eval(pa + 0.5 * h)?,
                eval(pa + 0.75 * h)?,
                eval(pb)?,
            ];
            left = f[4];
            heap.push(Panel::new(pa, pb, f));
        }

        loop {
            let (value, abs_value, error) = heap.iter().fold((0.0, 0.0, 0.0), |(v, av, e), p| {
                (v + p.value, av + p.abs_value, e + p.error)
            });
            let target = self.rel_tol * abs_value.max(value.abs());
            if error <= target || abs_value <= self.abs_floor {
                return Ok(Integral {
                    value,
                    error,
                    evaluations,
                });
            }
            let worst = heap.pop().expect("at least one panel");
            let m = 0.5 * (worst.a + worst.b);
            let too_narrow = !(worst.a < m && m < worst.b)
                || (worst.b - worst.a) <= 8.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs());
            if heap.len() + 2 > self.max_panels || too_narrow {
                return Err(Error::Quadrature {
                    lo,
                    hi,
                    achieved: error / abs_value.max(value.abs()),
                    intervals: heap.len() + 1,
                });
            }
            let (pa, pb) = (worst.a, worst.b);
            let hq = 0.25 * (pb - pa);
            let lf = [
                worst.f[0],
                eval(pa + 0.5 * hq)?,
                worst.f[1],
                eval(pa + 1.5 * hq)?,
                worst.f[2],
            ];
            let rf = [
                worst.f[2],
                eval(m + 0.5 * hq)?,
                worst.f[3],
                eval(m + 1.5 * hq)?,
                worst.f[4],
            ];
            heap.push(Panel::new(pa, m, lf));
            heap.push(Panel::new(m, pb, rf));
        }
    }
}
