//! Scalar helpers. Everything goes through `libm` so results do not depend on
//! the platform's libm.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn atanh(x: f64) -> f64 {
    libm::atanh(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}

/// Smallest probability handed to `ln`.
pub const LOG_FLOOR: f64 = 1e-300;

/// `p ln p` with `0 ln 0 = 0`; nonpositive inputs contribute zero.
#[inline]
pub fn xlogx(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * ln(p.max(LOG_FLOOR))
    }
}

/// `log(sum(exp(x)))`, `-inf` for an empty slice or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| exp(x - max)).sum();
    max + ln(sum)
}

/// Running log-sum-exp stored as `max + ln(scaled_sum)`.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub const fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += exp(x - self.max);
        } else {
            self.sum = self.sum * exp(self.max - x) + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.sum += other.sum * exp(other.max - self.max);
        } else {
            self.sum = self.sum * exp(self.max - other.max) + other.sum;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + ln(self.sum)
        }
    }
}

/// Shift a log-table so that `sum(exp(t)) = 1`.
pub fn log_normalize(t: &mut [f64]) -> f64 {
    let z = log_sum_exp(t);
    for v in t.iter_mut() {
        *v -= z;
    }
    z
}
