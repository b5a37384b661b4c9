use crate::math::{erfc, exp, exp_m1, ln, ln_1p, SQRT_2};

/// A continuous distribution on the real line, evaluated with log-domain
/// variants so tails far beyond `f64` underflow stay usable.
pub trait BaseDistribution {
    fn ln_pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    /// `P(X > x)`, computed without cancellation.
    fn sf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64 {
        exp(self.ln_pdf(x))
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        ln(self.cdf(x))
    }

    fn ln_sf(&self, x: f64) -> f64 {
        ln(self.sf(x))
    }

    /// Closed support interval; infinite ends are allowed.
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

impl<D: BaseDistribution + ?Sized> BaseDistribution for &D {
    fn ln_pdf(&self, x: f64) -> f64 {
        (**self).ln_pdf(x)
    }
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        (**self).sf(x)
    }
    fn pdf(&self, x: f64) -> f64 {
        (**self).pdf(x)
    }
    fn ln_cdf(&self, x: f64) -> f64 {
        (**self).ln_cdf(x)
    }
    fn ln_sf(&self, x: f64) -> f64 {
        (**self).ln_sf(x)
    }
    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StandardNormal;

/// `ln √(2π)`
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal cdf `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `ln Φ(z)`, accurate for any finite `z`.
pub fn ln_normal_cdf(z: f64) -> f64 {
    if z < -30.0 {
        // asymptotic expansion of the Mills ratio
        let z2 = z * z;
        let inv = 1.0 / z2;
        let series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
        -0.5 * z2 - ln(-z) - LN_SQRT_2PI + ln(series)
    } else if z < 5.0 {
        ln(normal_cdf(z))
    } else {
        ln_1p(-normal_cdf(-z))
    }
}

impl BaseDistribution for StandardNormal {
    fn ln_pdf(&self, x: f64) -> f64 {
        -0.5 * x * x - LN_SQRT_2PI
    }

    fn cdf(&self, x: f64) -> f64 {
        normal_cdf(x)
    }

    fn sf(&self, x: f64) -> f64 {
        normal_cdf(-x)
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        ln_normal_cdf(x)
    }

    fn ln_sf(&self, x: f64) -> f64 {
        ln_normal_cdf(-x)
    }
}

/// Exponential distribution with the given rate (lifetime model).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    pub rate: f64,
}

impl BaseDistribution for Exponential {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            f64::NEG_INFINITY
        } else {
            ln(self.rate) - self.rate * x
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -exp_m1(-self.rate * x)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            exp(-self.rate * x)
        }
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            ln(-exp_m1(-self.rate * x))
        }
    }

    fn ln_sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -self.rate * x
        }
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}
