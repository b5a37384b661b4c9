//! Thin wrappers over `libm` so the crate stays `no_std`.

#[cfg(test)]
pub(crate) use core::f64::consts::LN_2;
pub(crate) use core::f64::consts::SQRT_2;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[inline]
pub(crate) fn atanh(x: f64) -> f64 {
    libm::atanh(x)
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub(crate) fn powi(mut base: f64, mut exp: u32) -> f64 {
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

/// `ln(C(n, k))`.
pub(crate) fn ln_choose(n: u32, k: u32) -> f64 {
    ln_gamma(f64::from(n) + 1.0) - ln_gamma(f64::from(k) + 1.0) - ln_gamma(f64::from(n - k) + 1.0)
}

/// Binomial coefficients `C(n, 0..=n)` by the multiplicative recurrence.
pub(crate) fn binomial_row(n: u32) -> alloc::vec::Vec<f64> {
    let mut row = alloc::vec::Vec::with_capacity(n as usize + 1);
    let mut c = 1.0_f64;
    row.push(c);
    for j in 1..=n {
        c = c * f64::from(n - j + 1) / f64::from(j);
        // exact integers below 2^53; snap away accumulated rounding
        if c < 9.007_199_254_740_992e15 {
            c = libm::round(c);
        }
        row.push(c);
    }
    row
}
