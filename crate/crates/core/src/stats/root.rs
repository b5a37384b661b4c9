use crate::{Error, Result};

const MAX_ITER: usize = 400;
const MAX_EXPANSIONS: usize = 200;

/// Root of a continuous monotone `g` on `[lo, hi]`.
///
/// Illinois-style false position with a forced bisection every third step,
/// so the bracket at least halves every three evaluations. Stops when the
/// bracket is narrower than `tol` or can no longer be split.
pub fn find_root_monotone<G: FnMut(f64) -> f64>(
    mut g: G,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let g_lo = g(lo);
    let g_hi = g(hi);
    solve_bracketed(g, lo, hi, g_lo, g_hi, tol)
}

/// Like [`find_root_monotone`], but first widens `[lo, hi]` towards the side
/// with the smaller `|g|` (doubling the width each time, never past `limits`)
/// until a sign change appears.
pub fn find_root_expanding<G: FnMut(f64) -> f64>(
    mut g: G,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    limits: (f64, f64),
) -> Result<f64> {
    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    for _ in 0..MAX_EXPANSIONS {
        if g_lo.is_nan() || g_hi.is_nan() || opposite_or_zero(g_lo, g_hi) {
            break;
        }
        let width = hi - lo;
        if g_lo.abs() < g_hi.abs() {
            if lo <= limits.0 {
                break;
            }
            lo = (lo - width).max(limits.0);
            g_lo = g(lo);
        } else {
            if hi >= limits.1 {
                break;
            }
            hi = (hi + width).min(limits.1);
            g_hi = g(hi);
        }
    }
    solve_bracketed(g, lo, hi, g_lo, g_hi, tol)
}

fn opposite_or_zero(a: f64, b: f64) -> bool {
    a == 0.0 || b == 0.0 || (a < 0.0) != (b < 0.0)
}

fn solve_bracketed<G: FnMut(f64) -> f64>(
    mut g: G,
    lo: f64,
    hi: f64,
    g_lo: f64,
    g_hi: f64,
    tol: f64,
) -> Result<f64> {
    if !(lo <= hi) || g_lo.is_nan() || g_hi.is_nan() || !opposite_or_zero(g_lo, g_hi) {
        return Err(Error::RootNotBracketed { lo, hi, g_lo, g_hi });
    }
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, g_lo, g_hi);
    // which end was replaced last: -1 left, +1 right
    let mut side = 0i8;
    for iter in 0..MAX_ITER {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let mut x = (a * fb - b * fa) / (fb - fa);
        if iter % 3 == 2 || !(x > a && x < b) {
            x = mid;
        }
        if !(x > a && x < b) {
            // a and b are adjacent floats
            break;
        }
        let fx = g(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.is_nan() {
            return Err(Error::RootNotBracketed {
                lo: a,
                hi: b,
                g_lo: fa,
                g_hi: fb,
            });
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn minimize_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..MAX_ITER {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
