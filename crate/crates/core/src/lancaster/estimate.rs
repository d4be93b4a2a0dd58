use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma};
use serde::Serialize;

use super::{basis_for, exact_rho_from_joint, rat_f, rat_i};
use crate::error::{require_positive, Error, Result};
use crate::nef::NefSpec;
use crate::orthopoly::{extended_recurrence, sample_poisson, GaussRule, MeasureSpec, RecurrenceCoeffs};
use crate::real;
use crate::special::{ln_gamma, poch_exact, sqrt_rat};

/// A joint law σ with known margins that can be sampled, and possibly
/// integrated exactly against p_n ⊗ q_n.
pub trait JointLaw {
    fn name(&self) -> String;
    fn margins(&self) -> Result<(MeasureSpec, MeasureSpec)>;
    fn exact_rho(&self, _n: usize) -> Option<Result<f64>> {
        None
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Result<(f64, f64)>;

    /// Unbiased draws of p_n(X) q_n(Y). Laws with a tractable conditional
    /// structure integrate part of the randomness out.
    fn term_sampler<'a>(
        &'a self,
        n: usize,
        p: &'a RecurrenceCoeffs,
        q: &'a RecurrenceCoeffs,
    ) -> Result<TermSampler<'a>> {
        let mut pv = vec![0.0; n + 1];
        let mut qv = vec![0.0; n + 1];
        Ok(Box::new(move |rng| {
            let (x, y) = self.sample_pair(rng)?;
            p.eval_into(x, &mut pv);
            q.eval_into(y, &mut qv);
            Ok(pv[n] * qv[n])
        }))
    }
}

/// Defensive importance sampling for integrands growing like a degree-k
/// polynomial: half the draws come from the law size-biased by y^k (or the
/// falling factorial on lattices), so the weighted integrand stays bounded in
/// the tail. Returns the draw and its likelihood ratio.
fn draw_tilted(law: &MeasureSpec, k: usize, rng: &mut dyn RngCore) -> Result<(f64, f64)> {
    let kf = k as f64;
    let ln_moment = match *law {
        _ if k == 0 => return Ok((law.sample(rng)?, 1.0)),
        MeasureSpec::Gamma { shape, scale } => ln_gamma(shape + kf) - ln_gamma(shape) + kf * scale.ln(),
        MeasureSpec::Poisson { mean } => kf * mean.ln(),
        MeasureSpec::NegativeBinomial { shape, prob } => {
            ln_gamma(shape + kf) - ln_gamma(shape) + kf * (prob / (1.0 - prob)).ln()
        }
        _ => return Ok((law.sample(rng)?, 1.0)),
    };
    let y = if rng.random::<bool>() {
        law.sample(rng)?
    } else {
        match *law {
            MeasureSpec::Gamma { shape, scale } => gamma_draw(shape + kf, scale, rng)?,
            MeasureSpec::Poisson { mean } => kf + sample_poisson(mean, rng)?,
            MeasureSpec::NegativeBinomial { shape, prob } => {
                kf + MeasureSpec::negative_binomial(shape + kf, prob)?.sample(rng)?
            }
            _ => unreachable!(),
        }
    };
    let ln_poly = match *law {
        MeasureSpec::Gamma { .. } => kf * y.ln(),
        _ if y < kf => f64::NEG_INFINITY,
        _ => ln_gamma(y + 1.0) - ln_gamma(y - kf + 1.0),
    };
    Ok((y, 1.0 / (0.5 + 0.5 * (ln_poly - ln_moment).exp())))
}

pub type TermSampler<'a> = Box<dyn FnMut(&mut dyn RngCore) -> Result<f64> + 'a>;

/// Gauss rule integrating polynomials of degree ≤ 2n+1 exactly against `m`.
fn gauss_rule(m: &MeasureSpec, n: usize) -> Result<GaussRule> {
    let k = m.atom_count().map_or(n, |a| n.min(a - 1));
    extended_recurrence(m, k)?.quadrature(k + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoEstimate {
    pub degree: usize,
    #[serde(with = "real")]
    pub value: f64,
    #[serde(with = "real")]
    pub std_err: f64,
    pub exact: bool,
    pub samples: usize,
}

/// ρ_n = E[p_n(X) q_n(Y)]: exact when the law provides it, otherwise a
/// Monte Carlo mean over `budget` draws from a ChaCha20 stream.
pub fn estimate_rho(
    law: &dyn JointLaw,
    n: usize,
    budget: usize,
    seed: u64,
    tol: Option<f64>,
) -> Result<RhoEstimate> {
    if n == 0 {
        return Ok(RhoEstimate {
            degree: 0,
            value: 1.0,
            std_err: 0.0,
            exact: true,
            samples: 0,
        });
    }
    if let Some(exact) = law.exact_rho(n) {
        return Ok(RhoEstimate {
            degree: n,
            value: exact?,
            std_err: 0.0,
            exact: true,
            samples: 0,
        });
    }
    estimate_rho_mc(law, n, budget, seed, tol)
}

/// Monte Carlo path only, ignoring any exact oracle.
pub fn estimate_rho_mc(
    law: &dyn JointLaw,
    n: usize,
    budget: usize,
    seed: u64,
    tol: Option<f64>,
) -> Result<RhoEstimate> {
    if budget < 2 {
        return Err(Error::InvalidParameter {
            name: "budget",
            reason: "need at least two draws".into(),
        });
    }
    let (mu, nu) = law.margins()?;
    let p = basis_for(&mu, n)?;
    let q = basis_for(&nu, n)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut draw = law.term_sampler(n, &p, &q)?;
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..budget {
        let z = draw(&mut rng)?;
        let d = z - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (z - mean);
    }
    let std_err = (m2 / (budget - 1) as f64 / budget as f64).sqrt();
    if let Some(tol) = tol {
        if std_err > tol {
            return Err(Error::BudgetTooSmall { std_err, tol });
        }
    }
    Ok(RhoEstimate {
        degree: n,
        value: mean,
        std_err,
        exact: false,
        samples: budget,
    })
}

/// Hides a law's exact oracle so that only sampling is used.
pub struct MonteCarloOnly<L>(pub L);

impl<L: JointLaw> JointLaw for MonteCarloOnly<L> {
    fn name(&self) -> String {
        self.0.name()
    }
    fn margins(&self) -> Result<(MeasureSpec, MeasureSpec)> {
        self.0.margins()
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Result<(f64, f64)> {
        self.0.sample_pair(rng)
    }
    fn term_sampler<'a>(
        &'a self,
        n: usize,
        p: &'a RecurrenceCoeffs,
        q: &'a RecurrenceCoeffs,
    ) -> Result<TermSampler<'a>> {
        self.0.term_sampler(n, p, q)
    }
}

fn sampler_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter {
        name: "sampler",
        reason: e.to_string(),
    }
}

fn gamma_draw(shape: f64, scale: f64, rng: &mut dyn RngCore) -> Result<f64> {
    Ok(Gamma::new(shape, scale).map_err(sampler_err)?.sample(rng))
}

/// Uniform density (a+b)/B(a,b) x^{a−1} y^{b−1} on the simplex x+y < 1,
/// i.e. Dirichlet(a, b, 1).
#[derive(Clone, Copy, Debug)]
pub struct BujaLaw {
    pub a: f64,
    pub b: f64,
}

impl BujaLaw {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        require_positive("a", a)?;
        require_positive("b", b)?;
        Ok(Self { a, b })
    }
}

impl JointLaw for BujaLaw {
    fn name(&self) -> String {
        format!("buja(a={}, b={})", self.a, self.b)
    }
    fn margins(&self) -> Result<(MeasureSpec, MeasureSpec)> {
        Ok((
            MeasureSpec::beta(self.a, self.b + 1.0)?,
            MeasureSpec::beta(self.b, self.a + 1.0)?,
        ))
    }
    fn exact_rho(&self, n: usize) -> Option<Result<f64>> {
        let run = || {
            let (mu, nu) = self.margins()?;
            let (a, b) = (rat_f(self.a), rat_f(self.b));
            let ab1 = &a + &b + rat_i(1);
            let (sq, signs) = exact_rho_from_joint(&mu, &nu, n, |i, k| {
                poch_exact(&a, i) * poch_exact(&b, k) / poch_exact(&ab1, i + k)
            })?;
            Ok(signs[n] * sqrt_rat(&sq[n]))
        };
        Some(run())
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Result<(f64, f64)> {
        let g1 = gamma_draw(self.a, 1.0, rng)?;
        let g2 = gamma_draw(self.b, 1.0, rng)?;
        let g3 = gamma_draw(1.0, 1.0, rng)?;
        let s = g1 + g2 + g3;
        Ok((g1 / s, g2 / s))
    }
}

/// X | θ ~ Binomial(n, θ), θ ~ Beta(a, b); pairs are (X, θ).
#[derive(Clone, Copy, Debug)]
pub struct BetaBinomialLaw {
    pub n: u32,
    pub a: f64,
    pub b: f64,
}

impl BetaBinomialLaw {
    pub fn new(n: u32, a: f64, b: f64) -> Result<Self> {
        require_positive("a", a)?;
        require_positive("b", b)?;
        Ok(Self { n, a, b })
    }
}

impl JointLaw for BetaBinomialLaw {
    fn name(&self) -> String {
        format!("beta-binomial(n={}, a={}, b={})", self.n, self.a, self.b)
    }
    fn margins(&self) -> Result<(MeasureSpec, MeasureSpec)> {
        Ok((
            MeasureSpec::beta_binomial(self.n, self.a, self.b)?,
            MeasureSpec::beta(self.a, self.b)?,
        ))
    }
    fn exact_rho(&self, n: usize) -> Option<Result<f64>> {
        if n > self.n as usize {
            return Some(Ok(0.0));
        }
        Some(beta_binomial_exact(self.n, self.a, self.b).map(|(sq, s)| s[n] * sqrt_rat(&sq[n])))
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Result<(f64, f64)> {
        let t = Beta::new(self.a, self.b).map_err(sampler_err)?.sample(rng);
        let x = Binomial::new(self.n as u64, t).map_err(sampler_err)?.sample(rng);
        Ok((x as f64, t))
    }
}

/// Exact squared canonical values (E[p_j(X) q_j(θ)])², j = 0..n.
pub fn beta_binomial_rho_squared_exact(n: u32, a: f64, b: f64) -> Result<Vec<BigRational>> {
    Ok(beta_binomial_exact(n, a, b)?.0)
}

pub(crate) fn beta_binomial_exact(n: u32, a: f64, b: f64) -> Result<(Vec<BigRational>, Vec<f64>)> {
    require_positive("a", a)?;
    require_positive("b", b)?;
    let law = BetaBinomialLaw { n, a, b };
    let (mu, nu) = law.margins()?;
    let deg = n as usize;
    let (ra, rb) = (rat_f(a), rat_f(b));
    let rab = &ra + &rb;
    // E[X^i | θ] = Σ_l S(i, l) (n)_l↓ θ^l
    let mut stirling = vec![vec![BigInt::zero(); deg + 1]; deg + 1];
    stirling[0][0] = BigInt::one();
    for i in 1..=deg {
        for l in 1..=i {
            stirling[i][l] = BigInt::from(l) * &stirling[i - 1][l] + &stirling[i - 1][l - 1];
        }
    }
    let mut falling = vec![BigRational::one()];
    for l in 0..deg {
        let next = falling[l].clone() * rat_i((deg - l) as i64);
        falling.push(next);
    }
    let theta_moment = |m: usize| poch_exact(&ra, m) / poch_exact(&rab, m);
    exact_rho_from_joint(&mu, &nu, deg, |i, k| {
        (0..=i).fold(BigRational::zero(), |acc, l| {
            acc + BigRational::from_integer(stirling[i][l].clone()) * &falling[l] * theta_moment(l + k)
        })
    })
}

/// S = X+Y, T = Y+Z with X, Y, Z independent Jorgensen laws of parameters λ, η, ξ.
#[derive(Clone, Copy, Debug)]
pub struct EaglesonLaw {
    pub nef: NefSpec,
    pub lambda: f64,
    pub eta: f64,
    pub xi: f64,
    pub theta: f64,
}

impl EaglesonLaw {
    fn draw(&self, lambda: f64, rng: &mut dyn RngCore) -> Result<f64> {
        if lambda == 0.0 {
            return Ok(0.0);
        }
        self.nef.jorgensen_measure(lambda, self.theta)?.sample(rng)
    }
}

impl JointLaw for EaglesonLaw {
    fn name(&self) -> String {
        format!(
            "eagleson({}, lambda={}, eta={}, xi={})",
            self.nef.name(),
            self.lambda,
            self.eta,
            self.xi
        )
    }
    fn margins(&self) -> Result<(MeasureSpec, MeasureSpec)> {
        Ok((
            self.nef.jorgensen_measure(self.lambda + self.eta, self.theta)?,
            self.nef.jorgensen_measure(self.eta + self.xi, self.theta)?,
        ))
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Result<(f64, f64)> {
        let x = self.draw(self.lambda, rng)?;
        let y = self.draw(self.eta, rng)?;
        let z = self.draw(self.xi, rng)?;
        Ok((x + y, y + z))
    }

    /// Draws Y only; X and Z are integrated out by Gauss rules.
    fn term_sampler<'a>(
        &'a self,
        n: usize,
        p: &'a RecurrenceCoeffs,
        q: &'a RecurrenceCoeffs,
    ) -> Result<TermSampler<'a>> {
        let rule = |lambda: f64| -> Result<GaussRule> {
            if lambda == 0.0 {
                return Ok(GaussRule {
                    nodes: vec![0.0],
                    weights: vec![1.0],
                });
            }
            gauss_rule(&self.nef.jorgensen_measure(lambda, self.theta)?, n)
        };
        let (rx, rz) = (rule(self.lambda)?, rule(self.xi)?);
        let ylaw = self.nef.jorgensen_measure(self.eta, self.theta)?;
        let mut buf = vec![0.0; n + 1];
        Ok(Box::new(move |rng| {
            let (y, weight) = draw_tilted(&ylaw, 2 * n, rng)?;
            let mut side = |rule: &GaussRule, basis: &RecurrenceCoeffs| {
                rule.nodes.iter().zip(&rule.weights).fold(0.0, |acc, (&x, &w)| {
                    basis.eval_into(x + y, &mut buf);
                    acc + w * buf[n]
                })
            };
            Ok(weight * side(&rx, p) * side(&rz, q))
        }))
    }
}

/// Kibble–Moran law on Gamma(q, 1) margins with correlation parameter r:
/// N ~ NB(q, r), then X, Y independent Gamma(q + N, 1 − r).
#[derive(Clone, Copy, Debug)]
pub struct KibbleLaw {
    pub q: f64,
    pub r: f64,
}

impl KibbleLaw {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        require_positive("q", q)?;
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain {
                what: "r",
                value: r,
                domain: "[0, 1]".into(),
            });
        }
        Ok(Self { q, r })
    }

    /// Latent count N of the mixture representation.
    pub fn sample_latent(&self, rng: &mut dyn RngCore) -> Result<f64> {
        if self.r == 0.0 {
            return Ok(0.0);
        }
        let rate = gamma_draw(self.q, self.r / (1.0 - self.r), rng)?;
        sample_poisson(rate, rng)
    }

    /// Y given X = x: N | x ~ Poisson(r x/(1 − r)), then Y ~ Gamma(q + N, 1 − r).
    pub fn sample_conditional(&self, x: f64, rng: &mut dyn RngCore) -> Result<f64> {
        if self.r == 1.0 {
            return Ok(x);
        }
        let n = sample_poisson(self.r * x / (1.0 - self.r), rng)?;
        gamma_draw(self.q + n, 1.0 - self.r, rng)
    }
}

impl JointLaw for KibbleLaw {
    fn name(&self) -> String {
        format!("kibble(q={}, r={})", self.q, self.r)
    }
    fn margins(&self) -> Result<(MeasureSpec, MeasureSpec)> {
        let g = MeasureSpec::gamma(self.q, 1.0)?;
        Ok((g.clone(), g))
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Result<(f64, f64)> {
        if self.r == 1.0 {
            let x = gamma_draw(self.q, 1.0, rng)?;
            return Ok((x, x));
        }
        let n = self.sample_latent(rng)?;
        let x = gamma_draw(self.q + n, 1.0 - self.r, rng)?;
        let y = gamma_draw(self.q + n, 1.0 - self.r, rng)?;
        Ok((x, y))
    }

    /// Draws the latent count only; X and Y are integrated out given it.
    fn term_sampler<'a>(
        &'a self,
        n: usize,
        p: &'a RecurrenceCoeffs,
        q: &'a RecurrenceCoeffs,
    ) -> Result<TermSampler<'a>> {
        if self.r == 1.0 {
            let mut pv = vec![0.0; n + 1];
            let mut qv = vec![0.0; n + 1];
            return Ok(Box::new(move |rng| {
                let x = gamma_draw(self.q, 1.0, rng)?;
                p.eval_into(x, &mut pv);
                q.eval_into(x, &mut qv);
                Ok(pv[n] * qv[n])
            }));
        }
        let latent_law = if self.r == 0.0 {
            None
        } else {
            Some(MeasureSpec::negative_binomial(self.q, self.r)?)
        };
        let mut cache: HashMap<u64, f64> = HashMap::new();
        let mut buf = vec![0.0; n + 1];
        Ok(Box::new(move |rng| {
            let (latent, weight) = match &latent_law {
                Some(law) => draw_tilted(law, 2 * n, rng)?,
                None => (0.0, 1.0),
            };
            let key = latent as u64;
            if let Some(&v) = cache.get(&key) {
                return Ok(weight * v);
            }
            let law = MeasureSpec::gamma(self.q + latent, 1.0 - self.r)?;
            let rule = gauss_rule(&law, n)?;
            let mut side = |basis: &RecurrenceCoeffs| {
                rule.nodes.iter().zip(&rule.weights).fold(0.0, |acc, (&x, &w)| {
                    basis.eval_into(x, &mut buf);
                    acc + w * buf[n]
                })
            };
            let v = side(p) * side(q);
            cache.insert(key, v);
            Ok(weight * v)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn degree_zero_is_one() {
        let law = KibbleLaw::new(2.0, 0.5).unwrap();
        let e = estimate_rho(&law, 0, 10, 1, None).unwrap();
        assert_eq!(e.value, 1.0);
        assert!(e.exact);
    }

    #[test]
    fn beta_binomial_exact_value() {
        let law = BetaBinomialLaw::new(1, 1.0, 1.0).unwrap();
        let e = estimate_rho(&law, 1, 0, 0, None).unwrap();
        assert!(e.exact);
        assert_relative_eq!(e.value, 3f64.powf(-0.5), max_relative = 1e-15);
        let sq = beta_binomial_rho_squared_exact(1, 1.0, 1.0).unwrap();
        assert_eq!(sq[1], BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn buja_exact_matches_printed_formula() {
        for (a, b) in [(1.0, 1.0), (1.0, 2.0), (0.5, 1.5)] {
            let law = BujaLaw::new(a, b).unwrap();
            for n in 1..=5 {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let printed = sign * (a * b as f64).sqrt() / ((a + n as f64) * (b + n as f64)).sqrt();
                let e = estimate_rho(&law, n, 0, 0, None).unwrap();
                assert_relative_eq!(e.value, printed, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn buja_monte_carlo() {
        let law = MonteCarloOnly(BujaLaw::new(1.0, 1.0).unwrap());
        let e = estimate_rho(&law, 1, 200_000, 7, Some(0.01)).unwrap();
        assert!(!e.exact);
        assert!((e.value + 0.5).abs() < 4.0 * e.std_err, "{e:?}");
    }

    #[test]
    fn budget_too_small() {
        let law = KibbleLaw::new(2.0, 0.5).unwrap();
        let e = estimate_rho(&law, 3, 100, 3, Some(1e-6));
        assert!(matches!(e, Err(Error::BudgetTooSmall { .. })));
    }

    #[test]
    fn kibble_conditional_preserves_the_joint() {
        // E[XY] = q² + q r under Gamma(q, 1) margins
        let law = KibbleLaw::new(2.0, 0.5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let m = 200_000;
        let mut acc = 0.0;
        for _ in 0..m {
            let x = gamma_draw(2.0, 1.0, &mut rng).unwrap();
            acc += x * law.sample_conditional(x, &mut rng).unwrap();
        }
        assert!((acc / m as f64 - 5.0).abs() < 0.1);
    }
}
