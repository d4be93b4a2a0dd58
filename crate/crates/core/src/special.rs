//! Gamma-type special functions and exact rational helpers.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use statrs::function::gamma::{gamma, ln_gamma};

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Rising factorial (x)_n = x (x+1) ... (x+n-1).
pub fn pochhammer(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (x + k as f64))
}

/// Falling factorial x (x-1) ... (x-n+1).
pub fn falling(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (x - k as f64))
}

pub fn factorial(n: usize) -> f64 {
    pochhammer(1.0, n)
}

/// ln |Γ(re + i·im)| by upward shift and the Stirling series.
pub fn ln_abs_gamma_complex(re: f64, im: f64) -> f64 {
    const SHIFT_TO: f64 = 16.0;
    let mut z = Complex64::new(re, im);
    let mut acc = 0.0;
    while z.re < SHIFT_TO {
        acc -= z.norm().ln();
        z += 1.0;
    }
    // Bernoulli numbers B_2..B_16 over 2k(2k-1)
    const COEFFS: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
    ];
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut term = inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in COEFFS {
        series += term * c;
        term *= inv2;
    }
    let stirling = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series;
    stirling.re + acc
}

pub fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite parameter")
}

pub fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back to a scaled division when the quotient overflows a direct conversion
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn poch_exact(x: &BigRational, n: usize) -> BigRational {
    let mut acc = BigRational::one();
    for k in 0..n {
        acc *= x + rat_int(k as i64);
    }
    acc
}

pub fn binomial_exact(n: usize, k: usize) -> BigRational {
    if k > n {
        return BigRational::zero();
    }
    let mut acc = BigRational::one();
    for j in 0..k {
        acc = acc * rat_int((n - j) as i64) / rat_int((j + 1) as i64);
    }
    acc
}

/// Square root of a nonnegative rational, rounded to double precision.
pub fn sqrt_rat(r: &BigRational) -> f64 {
    debug_assert!(!r.is_negative());
    // sqrt(n/d) computed as sqrt(n) / sqrt(d) in floating point after balancing exponents
    let n = r.numer();
    let d = r.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = ((nb - db) / 2) * 2;
    let scaled = if shift >= 0 {
        BigRational::new(n.clone(), d.clone() << (shift as usize))
    } else {
        BigRational::new(n.clone() << ((-shift) as usize), d.clone())
    };
    to_f64(&scaled).sqrt() * 2f64.powi((shift / 2) as i32)
}
