//! Natural exponential families, Diaconis–Ylvisaker priors and their mixtures.
//!
//! Cumulant conventions, one per family:
//!
//! | family | base measure | k(θ) | Θ |
//! |---|---|---|---|
//! | gaussian | N(0, 1) | θ²/2 | ℝ |
//! | poisson | Poisson(1) | e^θ − 1 | ℝ |
//! | binomial(n) | Σ C(n,k) δ_k | n log(1 + e^θ) | ℝ |
//! | negative binomial(r) | Σ (r)_k/k! δ_k | −r log(1 − e^θ) | (−∞, 0) |
//! | gamma(q) | x^{q−1}/Γ(q) dx | −q log(−θ) | (−∞, 0) |
//! | hyperbolic(q) | hyperbolic law at θ = 0 | −q log cos θ | (−π/2, π/2) |

use std::f64::consts::{FRAC_PI_2, PI};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::orthopoly::{recurrence, MeasureSpec, RecurrenceMode};
use crate::quad::{self, Interval};
use crate::real;
use crate::special::{binomial_exact, ln_beta, ln_gamma, poch_exact};

const PSI_TOL: f64 = 1e-12;
const PSI_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum NefSpec {
    Gaussian,
    Poisson,
    Binomial {
        n: u32,
    },
    NegativeBinomial {
        #[serde(with = "real")]
        shape: f64,
    },
    Gamma {
        #[serde(with = "real")]
        shape: f64,
    },
    Hyperbolic {
        #[serde(with = "real")]
        q: f64,
    },
}

/// Open interval (lower, upper), either end possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpenInterval {
    pub lower: f64,
    pub upper: f64,
}

impl OpenInterval {
    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    fn quadrature_interval(&self, center: f64, scale: f64) -> Interval {
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => Interval::Finite(self.lower, self.upper),
            (true, false) => Interval::Lower {
                lower: self.lower,
                scale: (center - self.lower).max(scale),
            },
            (false, true) => Interval::Upper {
                upper: self.upper,
                scale: (self.upper - center).max(scale),
            },
            (false, false) => Interval::Line { center, scale },
        }
    }
}

impl NefSpec {
    pub fn bernoulli() -> Self {
        Self::Binomial { n: 1 }
    }

    pub fn binomial(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::NonpositiveParameter {
                name: "n",
                value: 0.0,
            });
        }
        Ok(Self::Binomial { n })
    }

    pub fn negative_binomial(shape: f64) -> Result<Self> {
        require_positive("shape", shape)?;
        Ok(Self::NegativeBinomial { shape })
    }

    pub fn gamma(shape: f64) -> Result<Self> {
        require_positive("shape", shape)?;
        Ok(Self::Gamma { shape })
    }

    pub fn hyperbolic(q: f64) -> Result<Self> {
        require_positive("q", q)?;
        Ok(Self::Hyperbolic { q })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Poisson => "poisson",
            Self::Binomial { .. } => "binomial",
            Self::NegativeBinomial { .. } => "negative-binomial",
            Self::Gamma { .. } => "gamma",
            Self::Hyperbolic { .. } => "hyperbolic",
        }
    }

    pub fn theta_domain(&self) -> OpenInterval {
        let (lower, upper) = match self {
            Self::Gaussian | Self::Poisson | Self::Binomial { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Self::NegativeBinomial { .. } | Self::Gamma { .. } => (f64::NEG_INFINITY, 0.0),
            Self::Hyperbolic { .. } => (-FRAC_PI_2, FRAC_PI_2),
        };
        OpenInterval { lower, upper }
    }

    /// Domain of means M_F.
    pub fn mean_domain(&self) -> OpenInterval {
        let (lower, upper) = match self {
            Self::Gaussian | Self::Hyperbolic { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Poisson | Self::NegativeBinomial { .. } | Self::Gamma { .. } => {
                (0.0, f64::INFINITY)
            }
            Self::Binomial { n } => (0.0, *n as f64),
        };
        OpenInterval { lower, upper }
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        let d = self.theta_domain();
        if d.contains(theta) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "theta",
                value: theta,
                domain: format!("({}, {})", d.lower, d.upper),
            })
        }
    }

    pub fn cumulant(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(match *self {
            Self::Gaussian => 0.5 * theta * theta,
            Self::Poisson => theta.exp_m1(),
            Self::Binomial { n } => n as f64 * softplus(theta),
            Self::NegativeBinomial { shape } => -shape * (-theta.exp()).ln_1p(),
            Self::Gamma { shape } => -shape * (-theta).ln(),
            Self::Hyperbolic { q } => -q * theta.cos().ln(),
        })
    }

    /// k'(θ).
    pub fn mean_map(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(match *self {
            Self::Gaussian => theta,
            Self::Poisson => theta.exp(),
            Self::Binomial { n } => n as f64 * logistic(theta),
            Self::NegativeBinomial { shape } => {
                let e = theta.exp();
                shape * e / (1.0 - e)
            }
            Self::Gamma { shape } => -shape / theta,
            Self::Hyperbolic { q } => q * theta.tan(),
        })
    }

    /// k''(θ), the variance of P(μ, θ).
    pub fn variance_at(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(match *self {
            Self::Gaussian => 1.0,
            Self::Poisson => theta.exp(),
            Self::Binomial { n } => {
                let p = logistic(theta);
                n as f64 * p * (1.0 - p)
            }
            Self::NegativeBinomial { shape } => {
                let e = theta.exp();
                shape * e / ((1.0 - e) * (1.0 - e))
            }
            Self::Gamma { shape } => shape / (theta * theta),
            Self::Hyperbolic { q } => q / (theta.cos() * theta.cos()),
        })
    }

    /// ψ(m), the inverse of the mean map, by safeguarded bisection.
    pub fn psi(&self, m: f64) -> Result<f64> {
        let md = self.mean_domain();
        if !md.contains(m) {
            return Err(Error::Domain {
                what: "m",
                value: m,
                domain: format!("({}, {})", md.lower, md.upper),
            });
        }
        let d = self.theta_domain();
        let start = match (d.lower.is_finite(), d.upper.is_finite()) {
            (true, true) => 0.5 * (d.lower + d.upper),
            (false, true) => d.upper - 1.0,
            _ => 0.0,
        };
        let mut lo = start;
        let mut hi = start;
        let mut step = 1.0;
        // grow the bracket towards the domain ends until it straddles m
        let mut guard = 0;
        while self.mean_map(lo)? > m {
            lo = if d.lower.is_finite() {
                0.5 * (lo + d.lower)
            } else {
                lo - step
            };
            step *= 2.0;
            guard += 1;
            if guard > 2000 {
                return Err(Error::Domain {
                    what: "m",
                    value: m,
                    domain: "reachable means".into(),
                });
            }
        }
        step = 1.0;
        while self.mean_map(hi)? < m {
            hi = if d.upper.is_finite() {
                0.5 * (hi + d.upper)
            } else {
                hi + step
            };
            step *= 2.0;
            guard += 1;
            if guard > 2000 {
                return Err(Error::Domain {
                    what: "m",
                    value: m,
                    domain: "reachable means".into(),
                });
            }
        }
        for _ in 0..PSI_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= PSI_TOL * mid.abs().max(1.0) || mid == lo || mid == hi {
                break;
            }
            if self.mean_map(mid)? < m {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The member P(μ, θ) of the family, normalized.
    pub fn member(&self, theta: f64) -> Result<MeasureSpec> {
        self.jorgensen_measure(1.0, theta)
    }

    /// P(μ^{*λ}, θ): the law with Laplace transform e^{λ(k(θ+s) − k(θ))}.
    pub fn jorgensen_measure(&self, lambda: f64, theta: f64) -> Result<MeasureSpec> {
        self.check_theta(theta)?;
        if !self.jorgensen_contains(lambda) {
            return Err(Error::JorgensenViolation {
                family: self.name().into(),
                value: lambda,
            });
        }
        require_positive("lambda", lambda)?;
        match *self {
            Self::Gaussian => MeasureSpec::gaussian(lambda * theta, lambda),
            Self::Poisson => MeasureSpec::poisson(lambda * theta.exp()),
            Self::Binomial { n } => {
                MeasureSpec::binomial((n as f64 * lambda).round() as u32, logistic(theta))
            }
            Self::NegativeBinomial { shape } => {
                MeasureSpec::negative_binomial(lambda * shape, theta.exp())
            }
            Self::Gamma { shape } => MeasureSpec::gamma(lambda * shape, -1.0 / theta),
            Self::Hyperbolic { q } => MeasureSpec::hyperbolic_tilted(lambda * q, theta),
        }
    }

    /// λ ∈ Λ(μ).
    pub fn jorgensen_contains(&self, lambda: f64) -> bool {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return false;
        }
        match *self {
            Self::Binomial { n } => {
                let v = n as f64 * lambda;
                v.fract() == 0.0
            }
            _ => true,
        }
    }

    /// c_n(λ) = (β_1 ⋯ β_n)/(n!)² for the orthogonal polynomials of
    /// P(μ^{*λ}, θ); zero past the support of a finite law.
    pub fn c_n(&self, lambda: f64, theta: f64, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        if lambda == 0.0 {
            return Ok(0.0);
        }
        let m = self.jorgensen_measure(lambda, theta)?;
        if let Some(atoms) = m.atom_count() {
            if n >= atoms {
                return Ok(0.0);
            }
        }
        Ok(recurrence(&m, n, RecurrenceMode::FastPath)?
            .leading_coeff(n)?
            .c_n)
    }

    /// A convenient interior θ for building margins.
    pub fn reference_theta(&self) -> f64 {
        match self {
            Self::NegativeBinomial { .. } => -(2f64.ln()),
            Self::Gamma { .. } => -1.0,
            _ => 0.0,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        true
    }

    pub fn dy_prior(&self, x0: f64, lambda: f64) -> Result<DyPrior> {
        DyPrior::new(*self, x0, lambda)
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Closed form of a conjugate prior, on the scale named by the variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum ConjugateForm {
    /// Beta(a, b) on the success probability e^θ/(1 + e^θ).
    BetaOnProbability {
        #[serde(with = "real")]
        a: f64,
        #[serde(with = "real")]
        b: f64,
    },
    /// Gamma(shape, rate) on the Poisson mean e^θ.
    GammaOnMean {
        #[serde(with = "real")]
        shape: f64,
        #[serde(with = "real")]
        rate: f64,
    },
    /// N(mean, var) on θ.
    GaussianOnTheta {
        #[serde(with = "real")]
        mean: f64,
        #[serde(with = "real")]
        var: f64,
    },
    /// Beta(a, b) on e^θ.
    BetaOnExpTheta {
        #[serde(with = "real")]
        a: f64,
        #[serde(with = "real")]
        b: f64,
    },
    /// Gamma(shape, rate) on −θ.
    GammaOnNegTheta {
        #[serde(with = "real")]
        shape: f64,
        #[serde(with = "real")]
        rate: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    CanonicalTheta,
    MeanM,
}

/// π_{x0,λ}(dθ) = C e^{λ(θ x0 − k(θ))} dθ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyPrior {
    #[serde(flatten)]
    pub nef: NefSpec,
    #[serde(with = "real")]
    pub x0: f64,
    #[serde(with = "real", rename = "lambda")]
    pub lambda: f64,
    /// Normalizing constant C(x0, λ).
    #[serde(with = "real", rename = "C")]
    pub c: f64,
    #[serde(skip)]
    ln_c: f64,
    pub parameterization: Parameterization,
    pub closed_form: Option<ConjugateForm>,
}

impl DyPrior {
    pub fn new(nef: NefSpec, x0: f64, lambda: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        if !nef.mean_domain().contains(x0) {
            return Err(Error::NonIntegrable(format!(
                "x0 = {x0} is not an interior mean of the {} family",
                nef.name()
            )));
        }
        let mode = nef.psi(x0)?;
        let peak = lambda * (mode * x0 - nef.cumulant(mode)?);
        let scale = 1.0 / (lambda * nef.variance_at(mode)?).sqrt();
        let interval = nef.theta_domain().quadrature_interval(mode, scale);
        let r = quad::integrate(
            |t| match nef.cumulant(t) {
                Ok(k) => (lambda * (t * x0 - k) - peak).exp(),
                Err(_) => 0.0,
            },
            interval,
            1e-13,
            0.0,
        )
        .map_err(|e| Error::NonIntegrable(e.to_string()))?;
        if !(r.value > 0.0 && r.value.is_finite()) {
            return Err(Error::NonIntegrable(format!("integral {}", r.value)));
        }
        let ln_c = -(r.value.ln() + peak);
        Ok(Self {
            nef,
            x0,
            lambda,
            c: ln_c.exp(),
            ln_c,
            parameterization: Parameterization::CanonicalTheta,
            closed_form: conjugate_form(nef, x0, lambda),
        })
    }

    pub fn ln_normalizer(&self) -> f64 {
        self.ln_c
    }

    /// Density of π_{x0,λ} in θ.
    pub fn density(&self, theta: f64) -> f64 {
        match self.nef.cumulant(theta) {
            Ok(k) => (self.ln_c + self.lambda * (theta * self.x0 - k)).exp(),
            Err(_) => 0.0,
        }
    }

    pub fn total_mass(&self, tol: f64) -> Result<f64> {
        let mode = self.nef.psi(self.x0)?;
        let scale = 1.0 / (self.lambda * self.nef.variance_at(mode)?).sqrt();
        let interval = self.nef.theta_domain().quadrature_interval(mode, scale);
        Ok(quad::integrate(|t| self.density(t), interval, tol, 1.0)?.value)
    }

    /// ν_{x0,λ}(dm), the image of the prior under θ ↦ k'(θ).
    pub fn mean_reparam(&self) -> Result<MeanPrior> {
        if self.parameterization != Parameterization::CanonicalTheta {
            return Err(Error::InvalidParameter {
                name: "parameterization",
                reason: "prior is already in the mean parameterization".into(),
            });
        }
        let mut p = self.clone();
        p.parameterization = Parameterization::MeanM;
        Ok(MeanPrior { prior: p })
    }

    /// Closed-form density of the conjugate law at θ, when one exists.
    pub fn closed_form_density(&self, theta: f64) -> Option<f64> {
        let form = self.closed_form?;
        let v = match form {
            ConjugateForm::BetaOnProbability { a, b } => {
                let p = logistic(theta);
                // dp/dθ = p(1 - p)
                (a * p.ln() + b * (1.0 - p).ln() - ln_beta(a, b)).exp()
            }
            ConjugateForm::GammaOnMean { shape, rate } => {
                let m = theta.exp();
                (shape * rate.ln() - ln_gamma(shape) + shape * m.ln() - rate * m).exp()
            }
            ConjugateForm::GaussianOnTheta { mean, var } => {
                let z = theta - mean;
                (-0.5 * z * z / var).exp() / (2.0 * PI * var).sqrt()
            }
            ConjugateForm::BetaOnExpTheta { a, b } => {
                if theta >= 0.0 {
                    return Some(0.0);
                }
                let e = theta.exp();
                (a * theta + (b - 1.0) * (-e).ln_1p() - ln_beta(a, b)).exp()
            }
            ConjugateForm::GammaOnNegTheta { shape, rate } => {
                if theta >= 0.0 {
                    return Some(0.0);
                }
                let u = -theta;
                (shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * u.ln() - rate * u).exp()
            }
        };
        Some(v)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("prior serializes")
    }
}

fn conjugate_form(nef: NefSpec, x0: f64, lambda: f64) -> Option<ConjugateForm> {
    Some(match nef {
        NefSpec::Binomial { n } => ConjugateForm::BetaOnProbability {
            a: lambda * x0,
            b: lambda * (n as f64 - x0),
        },
        NefSpec::Poisson => ConjugateForm::GammaOnMean {
            shape: lambda * x0,
            rate: lambda,
        },
        NefSpec::Gaussian => ConjugateForm::GaussianOnTheta {
            mean: x0,
            var: 1.0 / lambda,
        },
        NefSpec::NegativeBinomial { shape } => ConjugateForm::BetaOnExpTheta {
            a: lambda * x0,
            b: lambda * shape + 1.0,
        },
        NefSpec::Gamma { shape } => ConjugateForm::GammaOnNegTheta {
            shape: lambda * shape + 1.0,
            rate: lambda * x0,
        },
        NefSpec::Hyperbolic { .. } => return None,
    })
}

/// A Diaconis–Ylvisaker prior expressed on the domain of means.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanPrior {
    pub prior: DyPrior,
}

impl MeanPrior {
    /// π(ψ(m)) ψ'(m), with ψ'(m) = 1 / k''(ψ(m)).
    pub fn density(&self, m: f64) -> Result<f64> {
        let nef = self.prior.nef;
        let theta = nef.psi(m)?;
        Ok(self.prior.density(theta) / nef.variance_at(theta)?)
    }

    pub fn total_mass(&self, tol: f64) -> Result<f64> {
        let nef = self.prior.nef;
        let md = nef.mean_domain();
        let center = self.prior.x0;
        let scale = (nef.variance_at(nef.psi(center)?)? / self.prior.lambda).sqrt();
        let r = quad::integrate(
            |m| self.density(m).unwrap_or(0.0),
            md.quadrature_interval(center, scale),
            tol,
            1.0,
        )?;
        Ok(r.value)
    }
}

/// Masses C(n,k) (a)_k (b)_{n-k} / (a+b)_n of the beta-binomial law.
pub fn beta_binomial_masses(n: usize, a: &BigRational, b: &BigRational) -> Vec<BigRational> {
    let total = poch_exact(&(a + b), n);
    (0..=n)
        .map(|k| binomial_exact(n, k) * poch_exact(a, k) * poch_exact(b, n - k) / &total)
        .collect()
}

/// Marginal ∫ P(μ, θ)(dx) π(dθ) for the conjugate pairs with a closed form.
pub fn mixture_marginal(prior: &DyPrior) -> Result<MeasureSpec> {
    match (prior.nef, prior.closed_form) {
        (NefSpec::Binomial { n }, Some(ConjugateForm::BetaOnProbability { a, b })) => {
            MeasureSpec::beta_binomial(n, a, b)
        }
        (NefSpec::Poisson, Some(ConjugateForm::GammaOnMean { shape, rate })) => {
            MeasureSpec::negative_binomial(shape, 1.0 / (1.0 + rate))
        }
        (NefSpec::Gaussian, Some(ConjugateForm::GaussianOnTheta { mean, var })) => {
            MeasureSpec::gaussian(mean, 1.0 + var)
        }
        (nef, _) => Err(Error::UnsupportedFamily(format!(
            "no closed-form marginal for the {} family",
            nef.name()
        ))),
    }
}

/// Mixture density (or mass) at x by quadrature over θ.
pub fn mixture_density_by_quadrature(prior: &DyPrior, x: f64, tol: f64) -> Result<f64> {
    let nef = prior.nef;
    let mode = nef.psi(prior.x0)?;
    let scale = 1.0 / (prior.lambda * nef.variance_at(mode)?).sqrt();
    let interval = nef.theta_domain().quadrature_interval(mode, scale);
    let r = quad::integrate(
        |t| {
            let Ok(member) = nef.member(t) else {
                return 0.0;
            };
            let px = if member.is_discrete() {
                member.ln_pmf(x as u64).map_or(0.0, f64::exp)
            } else {
                member.density(x).unwrap_or(0.0)
            };
            px * prior.density(t)
        },
        interval,
        tol,
        0.0,
    )?;
    Ok(r.value)
}
