//! Double-exponential quadrature on finite intervals, half-lines and the line.
//!
//! Used wherever an integral has to be computed independently of the
//! orthogonal-polynomial machinery (normalizations, mixtures, Gram checks).

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interval {
    Finite(f64, f64),
    /// `[lower, ∞)` with a length scale for the transform.
    Lower { lower: f64, scale: f64 },
    /// `(-∞, upper]`.
    Upper { upper: f64, scale: f64 },
    Line { center: f64, scale: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const MAX_LEVEL: usize = 11;
const T_MAX: f64 = 6.5;

/// Integrates `f` over `interval` to relative tolerance `tol` (absolute below
/// `abs_floor`).
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    interval: Interval,
    tol: f64,
    abs_floor: f64,
) -> Result<Integral> {
    integrate_with_gaps(|x, _, _| f(x), interval, tol, abs_floor)
}

/// Like [`integrate`], but `f(x, x - a, b - x)` also receives the distances
/// to the endpoints of a finite interval, computed without cancellation.
/// Endpoint singularities must be evaluated from these distances.
pub fn integrate_with_gaps<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    interval: Interval,
    tol: f64,
    abs_floor: f64,
) -> Result<Integral> {
    let mut prev: Option<f64> = None;
    let mut evaluations = 0;
    for level in 0..=MAX_LEVEL {
        let h = 0.5f64.powi(level as i32);
        let (sum, n) = level_sum(&f, interval, h)?;
        evaluations += n;
        if let Some(p) = prev {
            let err = (sum - p).abs();
            if level >= 3 && err <= tol * sum.abs().max(abs_floor) {
                return Ok(Integral {
                    value: sum,
                    error: err,
                    evaluations,
                });
            }
        }
        prev = Some(sum);
    }
    Err(Error::DivergentIntegral(format!(
        "no convergence on {:?} after {} levels",
        interval, MAX_LEVEL
    )))
}

struct Node {
    x: f64,
    w: f64,
    from_lower: f64,
    from_upper: f64,
}

fn node(interval: Interval, t: f64) -> Option<Node> {
    let u = FRAC_PI_2 * t.sinh();
    let du = FRAC_PI_2 * t.cosh();
    match interval {
        Interval::Finite(a, b) => {
            let half = 0.5 * (b - a);
            let cu = u.cosh();
            let gap = 2.0 * half / (1.0 + (2.0 * u.abs()).exp());
            if !(gap > 0.0) || !cu.is_finite() {
                return None;
            }
            let (x, from_lower, from_upper) = if t >= 0.0 {
                (b - gap, b - a - gap, gap)
            } else {
                (a + gap, gap, b - a - gap)
            };
            Some(Node {
                x,
                w: half * du / (cu * cu),
                from_lower,
                from_upper,
            })
        }
        Interval::Lower { lower, scale } => {
            let e = u.exp();
            let x = lower + scale * e;
            if !(x > lower) || !e.is_finite() {
                return None;
            }
            Some(Node {
                x,
                w: scale * du * e,
                from_lower: x - lower,
                from_upper: f64::INFINITY,
            })
        }
        Interval::Upper { upper, scale } => {
            let e = u.exp();
            let x = upper - scale * e;
            if !(x < upper) || !e.is_finite() {
                return None;
            }
            Some(Node {
                x,
                w: scale * du * e,
                from_lower: f64::INFINITY,
                from_upper: upper - x,
            })
        }
        Interval::Line { center, scale } => {
            let x = center + scale * u.sinh();
            let w = scale * du * u.cosh();
            if !x.is_finite() || !w.is_finite() {
                return None;
            }
            Some(Node {
                x,
                w,
                from_lower: f64::INFINITY,
                from_upper: f64::INFINITY,
            })
        }
    }
}

fn level_sum<F: Fn(f64, f64, f64) -> f64>(
    f: &F,
    interval: Interval,
    h: f64,
) -> Result<(f64, usize)> {
    let mut sum = 0.0;
    let mut evals = 0;
    if let Some(nd) = node(interval, 0.0) {
        sum += nd.w * f(nd.x, nd.from_lower, nd.from_upper);
        evals += 1;
    }
    for dir in [1.0, -1.0] {
        let mut k = 1usize;
        let mut small = 0;
        loop {
            let t = dir * k as f64 * h;
            if t.abs() > T_MAX {
                break;
            }
            let Some(nd) = node(interval, t) else {
                break;
            };
            let c = nd.w * f(nd.x, nd.from_lower, nd.from_upper);
            evals += 1;
            if !c.is_finite() {
                // overflow of a polynomial factor where the weight has already vanished
                if small > 0 {
                    break;
                }
                return Err(Error::QuadratureFailure(format!(
                    "non-finite integrand contribution at x = {}",
                    nd.x
                )));
            }
            sum += c;
            if c.abs() <= 1e-19 * sum.abs() || c == 0.0 {
                small += 1;
                if small >= 4 && t.abs() > 1.0 {
                    break;
                }
            } else {
                small = 0;
            }
            k += 1;
        }
    }
    Ok((sum * h, evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finite_with_endpoint_singularities() {
        // ∫_0^1 x^{-1/2} (1-x)^{-1/2} dx = π
        let r = integrate_with_gaps(
            |_, u, v| (u * v).powf(-0.5),
            Interval::Finite(0.0, 1.0),
            1e-12,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI, max_relative = 1e-9);
    }

    #[test]
    fn half_line_gamma_integral() {
        // ∫_0^∞ x^{2.5} e^{-x} dx = Γ(3.5)
        let r = integrate(
            |x| x.powf(2.5) * (-x).exp(),
            Interval::Lower {
                lower: 0.0,
                scale: 1.0,
            },
            1e-12,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(r.value, crate::special::gamma(3.5), max_relative = 1e-11);
    }

    #[test]
    fn line_gaussian_fourth_moment() {
        let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let r = integrate(
            |x| c * x.powi(4) * (-0.5 * x * x).exp(),
            Interval::Line {
                center: 0.0,
                scale: 1.0,
            },
            1e-12,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(r.value, 3.0, max_relative = 1e-11);
    }
}
