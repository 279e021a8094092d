//! Gamma, log-Gamma and Beta.
//!
//! The Lanczos sum (g = 7, nine terms) is only evaluated on `[1, 2)`; other
//! arguments are shifted there with the recurrence `Gamma(x+1) = x Gamma(x)`,
//! which keeps the relative error near 2e-15 on `(0, 50]`. Arguments below
//! one half go through the reflection formula.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

// Largest argument for which the product recurrence is used directly.
const RECURRENCE_LIMIT: f64 = 120.0;

fn lanczos_sum(xm1: f64) -> f64 {
    let mut t = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        t += c / (xm1 + i as f64);
    }
    t
}

/// Lanczos evaluation of Gamma(x) for x in [1, 2).
fn gamma_core(x: f64) -> f64 {
    let xm1 = x - 1.0;
    let w = xm1 + LANCZOS_G + 0.5;
    // split the power so w^(x-1/2) cannot overflow before exp(-w) damps it
    let half = w.powf((xm1 + 0.5) / 2.0);
    (2.0 * PI).sqrt() * half * (-w).exp() * half * lanczos_sum(xm1)
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma function.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("Gamma of NaN"));
    }
    if is_pole(x) {
        return Err(Error::domain(format!("Gamma has a pole at {x}")));
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma_fn(1.0 - x)?));
    }
    if x > RECURRENCE_LIMIT {
        return Ok(ln_gamma(x)?.exp());
    }
    let mut y = x;
    let mut acc = 1.0;
    while y >= 2.0 {
        y -= 1.0;
        acc *= y;
    }
    while y < 1.0 {
        acc /= y;
        y += 1.0;
    }
    Ok(acc * gamma_core(y))
}

/// Natural log of `|Gamma(x)|`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("log-Gamma of NaN"));
    }
    if is_pole(x) {
        return Err(Error::domain(format!("Gamma has a pole at {x}")));
    }
    if x < 0.5 {
        let s = (PI * x).sin().abs();
        return Ok(PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    if x <= RECURRENCE_LIMIT {
        return Ok(gamma_fn(x)?.abs().ln());
    }
    let xm1 = x - 1.0;
    let w = xm1 + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (xm1 + 0.5) * w.ln() - w + lanczos_sum(xm1).ln())
}

/// Beta function `Gamma(a) Gamma(b) / Gamma(a + b)` for `a, b > 0`.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::domain(format!(
            "Beta needs positive arguments, got ({a}, {b})"
        )));
    }
    if a + b <= RECURRENCE_LIMIT {
        return Ok(gamma_fn(a)? * gamma_fn(b)? / gamma_fn(a + b)?);
    }
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}
