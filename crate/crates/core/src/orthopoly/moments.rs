use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::measure::MeasureSpec;
use super::recurrence::MAX_DEGREE;
use crate::error::{Error, Result};
use crate::real;
use crate::special::{binomial_exact, rat, rat_int, to_f64};

/// Highest moment order served; the recurrence oracle at the degree cap needs
/// moments up to 2N + 1.
pub const MAX_MOMENT_ORDER: usize = 2 * MAX_DEGREE + 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentSequence {
    #[serde(with = "real::vec")]
    pub values: Vec<f64>,
    /// True when every value was produced in rational arithmetic.
    pub exact: bool,
    /// Largest quadrature error estimate, absent for exact sequences.
    pub error_estimate: Option<f64>,
    #[serde(skip)]
    pub rational: Option<Vec<BigRational>>,
}

impl MomentSequence {
    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }
}

/// Moments m_0..m_{max_order} of `measure`, exact whenever the family allows.
pub fn moments(measure: &MeasureSpec, max_order: usize) -> Result<MomentSequence> {
    if max_order > MAX_MOMENT_ORDER {
        return Err(Error::OrderTooLarge {
            requested: max_order,
            max: MAX_MOMENT_ORDER,
        });
    }
    match exact_moments(measure, max_order) {
        Some(r) => Ok(MomentSequence {
            values: r.iter().map(to_f64).collect(),
            exact: true,
            error_estimate: None,
            rational: Some(r),
        }),
        None => moments_by_quadrature(measure, max_order, 1e-13),
    }
}

/// Moments by direct integration against the density or atom list.
pub fn moments_by_quadrature(
    measure: &MeasureSpec,
    max_order: usize,
    tol: f64,
) -> Result<MomentSequence> {
    if max_order > MAX_MOMENT_ORDER {
        return Err(Error::OrderTooLarge {
            requested: max_order,
            max: MAX_MOMENT_ORDER,
        });
    }
    let mut values = Vec::with_capacity(max_order + 1);
    let mut err: f64 = 0.0;
    for k in 0..=max_order {
        let r = measure.expect(|x| x.powi(k as i32), tol)?;
        err = err.max(r.error);
        values.push(r.value);
    }
    Ok(MomentSequence {
        values,
        exact: measure.is_discrete(),
        error_estimate: Some(err),
        rational: None,
    })
}

/// Rational moments for every family whose parameters are exact dyadic
/// rationals (every finite double is one).
pub fn exact_moments(measure: &MeasureSpec, max_order: usize) -> Option<Vec<BigRational>> {
    let m = max_order;
    Some(match measure {
        MeasureSpec::Gaussian { mean, var } => {
            let mut kappa = vec![BigRational::zero(); m + 1];
            if m >= 1 {
                kappa[1] = rat(*mean);
            }
            if m >= 2 {
                kappa[2] = rat(*var);
            }
            from_cumulants(&kappa)
        }
        MeasureSpec::Hyperbolic { q, theta } => {
            let t = rat(theta.tan());
            let q = rat(*q);
            // d^k/dθ^k tan θ as a polynomial in T = tan θ: P_{k+1} = P_k' (1 + T²)
            let mut poly = vec![BigRational::zero(), BigRational::one()];
            let mut kappa = vec![BigRational::zero(); m + 1];
            for k in 1..=m {
                kappa[k] = &q * eval_poly(&poly, &t);
                poly = tan_derivative(&poly);
            }
            from_cumulants(&kappa)
        }
        MeasureSpec::Poisson { mean } => {
            let l = rat(*mean);
            let mut f = vec![BigRational::one(); m + 1];
            for k in 1..=m {
                f[k] = &f[k - 1] * &l;
            }
            from_factorial_moments(&f)
        }
        MeasureSpec::Binomial { n, p } => {
            let p = rat(*p);
            let mut f = vec![BigRational::one(); m + 1];
            for k in 1..=m {
                f[k] = &f[k - 1] * &p * rat_int(*n as i64 - k as i64 + 1);
            }
            from_factorial_moments(&f)
        }
        MeasureSpec::NegativeBinomial { shape, prob } => {
            let s = rat(*shape);
            let a = rat(*prob);
            let odds = &a / (BigRational::one() - &a);
            let mut f = vec![BigRational::one(); m + 1];
            for k in 1..=m {
                f[k] = &f[k - 1] * (&s + rat_int(k as i64 - 1)) * &odds;
            }
            from_factorial_moments(&f)
        }
        MeasureSpec::BetaBinomial { n, a, b } => {
            let a = rat(*a);
            let ab = &a + rat(*b);
            let mut f = vec![BigRational::one(); m + 1];
            for k in 1..=m {
                let j = rat_int(k as i64 - 1);
                f[k] = &f[k - 1] * rat_int(*n as i64 - k as i64 + 1) * (&a + &j) / (&ab + &j);
            }
            from_factorial_moments(&f)
        }
        MeasureSpec::Gamma { shape, scale } => {
            let q = rat(*shape);
            let s = rat(*scale);
            let mut out = vec![BigRational::one(); m + 1];
            for k in 1..=m {
                out[k] = &out[k - 1] * (&q + rat_int(k as i64 - 1)) * &s;
            }
            out
        }
        MeasureSpec::Beta { a, b, lower, upper } => {
            let a = rat(*a);
            let ab = &a + rat(*b);
            let mut unit = vec![BigRational::one(); m + 1];
            for k in 1..=m {
                let j = rat_int(k as i64 - 1);
                unit[k] = &unit[k - 1] * (&a + &j) / (&ab + &j);
            }
            let lo = rat(*lower);
            let w = rat(*upper) - &lo;
            affine_moments(&unit, &lo, &w)
        }
        MeasureSpec::CartierDunau { q } => tree_return_probabilities(&rat(*q), m),
        MeasureSpec::Discrete { atoms, .. } => {
            let mut out = vec![BigRational::zero(); m + 1];
            for &(x, w) in atoms {
                let x = rat(x);
                let mut term = rat(w);
                for slot in out.iter_mut() {
                    *slot += &term;
                    term *= &x;
                }
            }
            out
        }
    })
}

/// Raw moments from cumulants κ_1..κ_m.
fn from_cumulants(kappa: &[BigRational]) -> Vec<BigRational> {
    let m = kappa.len() - 1;
    let mut out = vec![BigRational::one(); m + 1];
    for n in 1..=m {
        let mut acc = BigRational::zero();
        for k in 1..=n {
            if kappa[k].is_zero() {
                continue;
            }
            acc += binomial_exact(n - 1, k - 1) * &kappa[k] * &out[n - k];
        }
        out[n] = acc;
    }
    out
}

/// Raw moments from factorial moments E[(X)_k] via Stirling numbers of the
/// second kind.
fn from_factorial_moments(f: &[BigRational]) -> Vec<BigRational> {
    let m = f.len() - 1;
    let mut stirling = vec![vec![BigInt::zero(); m + 1]; m + 1];
    stirling[0][0] = BigInt::one();
    for j in 1..=m {
        for k in 1..=j {
            stirling[j][k] = BigInt::from(k) * &stirling[j - 1][k] + &stirling[j - 1][k - 1];
        }
    }
    (0..=m)
        .map(|j| {
            (0..=j).fold(BigRational::zero(), |acc, k| {
                acc + BigRational::from_integer(stirling[j][k].clone()) * &f[k]
            })
        })
        .collect()
}

fn affine_moments(unit: &[BigRational], lo: &BigRational, w: &BigRational) -> Vec<BigRational> {
    let m = unit.len() - 1;
    (0..=m)
        .map(|k| {
            let mut acc = BigRational::zero();
            for i in 0..=k {
                let term = binomial_exact(k, i)
                    * pow(lo, k - i)
                    * pow(w, i)
                    * &unit[i];
                acc += term;
            }
            acc
        })
        .collect()
}

fn pow(x: &BigRational, k: usize) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * x)
}

fn eval_poly(coeffs: &[BigRational], t: &BigRational) -> BigRational {
    coeffs
        .iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * t + c)
}

/// Coefficients of P'(T)(1 + T²).
fn tan_derivative(p: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); p.len() + 1];
    for (k, c) in p.iter().enumerate().skip(1) {
        let d = c * rat_int(k as i64);
        out[k - 1] += &d;
        out[k + 1] += d;
    }
    while out.len() > 1 && out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

/// Return probabilities of the simple random walk on the (q+1)-regular tree,
/// which are the moments of its spectral measure.
fn tree_return_probabilities(q: &BigRational, m: usize) -> Vec<BigRational> {
    let down = BigRational::one() / (q + BigRational::one());
    let up = q * &down;
    let mut dist = vec![BigRational::zero(); m + 2];
    dist[0] = BigRational::one();
    let mut out = vec![BigRational::one(); m + 1];
    for k in 1..=m {
        let mut next = vec![BigRational::zero(); m + 2];
        for j in 0..=k.min(m) {
            if dist[j].is_zero() {
                continue;
            }
            if j == 0 {
                next[1] += &dist[0];
            } else {
                next[j - 1] += &dist[j] * &down;
                if j + 1 <= m + 1 {
                    next[j + 1] += &dist[j] * &up;
                }
            }
        }
        dist = next;
        out[k] = dist[0].clone();
    }
    out
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_pair_of_atoms() {
        let m = MeasureSpec::discrete("bernoulli", vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let s = moments(&m, 2).unwrap();
        assert_eq!(s.values, vec![1.0, 0.5, 0.5]);
        assert!(s.exact);
    }

    #[test]
    fn standard_gaussian_moments() {
        let s = moments(&MeasureSpec::standard_gaussian(), 4).unwrap();
        assert_eq!(s.values, vec![1.0, 0.0, 1.0, 0.0, 3.0]);
    }

    #[test]
    fn zeroth_moment_is_one() {
        for m in [
            MeasureSpec::gamma(2.5, 0.3).unwrap(),
            MeasureSpec::cartier_dunau(2.0).unwrap(),
            MeasureSpec::hyperbolic_tilted(1.5, -0.3).unwrap(),
        ] {
            assert_eq!(moments(&m, 0).unwrap().values, vec![1.0]);
        }
    }

    #[test]
    fn hyperbolic_secant_fourth_moment() {
        // E X^4 = 5 for the hyperbolic secant law with q = 1
        let s = moments(&MeasureSpec::hyperbolic(1.0).unwrap(), 4).unwrap();
        assert_eq!(s.values, vec![1.0, 0.0, 1.0, 0.0, 5.0]);
    }

    #[test]
    fn exact_moments_match_quadrature() {
        for m in [
            MeasureSpec::gaussian(0.3, 1.7).unwrap(),
            MeasureSpec::gamma(1.7, 0.8).unwrap(),
            MeasureSpec::hyperbolic_tilted(2.0, 0.35).unwrap(),
            MeasureSpec::beta_on(0.6, 2.5, -1.0, 2.0).unwrap(),
            MeasureSpec::cartier_dunau(2.0).unwrap(),
            MeasureSpec::poisson(2.2).unwrap(),
            MeasureSpec::negative_binomial(1.5, 0.35).unwrap(),
            MeasureSpec::binomial(6, 0.3).unwrap(),
            MeasureSpec::beta_binomial(5, 0.7, 1.8).unwrap(),
        ] {
            let e = moments(&m, 8).unwrap();
            let q = moments_by_quadrature(&m, 8, 1e-13).unwrap();
            for k in 0..=8 {
                assert_relative_eq!(
                    e.values[k],
                    q.values[k],
                    epsilon = 1e-9,
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn cartier_dunau_second_moment() {
        let s = moments(&MeasureSpec::cartier_dunau(3.0).unwrap(), 4).unwrap();
        let r = s.rational.unwrap();
        assert_eq!(r[1], BigRational::zero());
        assert_eq!(r[2], rat(0.25));
        // two-step loops plus excursions of depth two: 1/4 · (1/4 + 3/4 · 1/4)
        assert_eq!(r[4], rat(0.25) * (rat(0.25) + rat(0.75) * rat(0.25)));
    }

    #[test]
    fn order_cap() {
        let m = MeasureSpec::standard_gaussian();
        assert!(matches!(
            moments(&m, MAX_MOMENT_ORDER + 1),
            Err(Error::OrderTooLarge { .. })
        ));
    }
}
