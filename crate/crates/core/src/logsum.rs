//! Log-domain arithmetic helpers.
//!
//! Everything here works on natural logarithms of nonnegative quantities,
//! with `f64::NEG_INFINITY` standing for zero.

/// `log(e^a + e^b)`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `log(Σ e^{x_i})`, two-pass (max then shifted sum).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let mut acc = Neumaier::default();
    for &x in xs {
        acc.add((x - max).exp());
    }
    max + acc.value().ln()
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn scale(&mut self, f: f64) {
        self.sum *= f;
        self.comp *= f;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Streaming log-sum-exp over terms spanning many orders of magnitude.
///
/// Terms are aligned to the running maximum exponent and accumulated with
/// compensated summation; when a larger exponent arrives the partial sum is
/// rescaled.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    max: f64,
    acc: Neumaier,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            acc: Neumaier::default(),
        }
    }
}

impl LogAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.max {
            if self.max > f64::NEG_INFINITY {
                self.acc.scale((self.max - log_term).exp());
            }
            self.max = log_term;
        }
        self.acc.add((log_term - self.max).exp());
    }

    /// Log of the accumulated sum.
    pub fn log_value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.acc.value().ln()
        }
    }
}

impl FromIterator<f64> for LogAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = LogAccumulator::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// `log(1 - e^{-z})` for `z > 0`, accurate for tiny and large `z`.
#[inline]
pub fn log_one_minus_exp_neg(z: f64) -> f64 {
    if z < std::f64::consts::LN_2 {
        (-(-z).exp_m1()).ln()
    } else {
        (-(-z).exp()).ln_1p()
    }
}

/// `log(log1p(e^x))`: the log of `log(1 + y)` given `x = log y`.
#[inline]
pub fn log_log1p_exp(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if x < -20.0 {
        // log1p(y) = y (1 - y/2 + y²/3 - ...)
        let y = x.exp();
        x + (-y / 2.0 + y * y / 3.0).ln_1p()
    } else {
        x.exp().ln_1p().ln()
    }
}
