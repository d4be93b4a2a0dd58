//! Two-component Gibbs samplers for conjugate Lancaster models.
//!
//! The x-chain alternates y ~ K(x, ·) and x' ~ L(y, ·). Its kernel
//! k(x, dx') = ∫ K(x, dy) L(y, dx') has the orthonormal polynomials of the
//! x-margin as eigenfunctions, with eigenvalues ρ_n².

mod exact;
mod spectral;

pub use exact::{exact_transition_matrix, TransitionMatrix};
pub use spectral::{
    autocorrelation_vs_spectrum, chisq_decay_bound, spectral_eigencheck, AutocorrFit, Eigencheck,
    DEFAULT_RESOLUTION,
};

use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::lancaster::{seq_beta_binomial, KibbleLaw, LancasterSequence};
use crate::orthopoly::{sample_poisson, GaussRule, MeasureSpec};
use crate::real;

/// Identifier of the random generator written into trace metadata.
pub const GENERATOR: &str = "chacha20";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConjugateModel {
    /// θ ~ Beta(a, b), X | θ ~ Binomial(n, θ).
    BetaBinomial {
        n: u32,
        #[serde(with = "real")]
        a: f64,
        #[serde(with = "real")]
        b: f64,
    },
    /// m ~ Gamma(λ x0, rate λ), X | m ~ Poisson(m).
    GammaPoisson {
        #[serde(with = "real")]
        x0: f64,
        #[serde(with = "real")]
        lambda: f64,
    },
    /// θ ~ N(x0, 1/λ), X | θ ~ N(θ, 1).
    GaussGauss {
        #[serde(with = "real")]
        x0: f64,
        #[serde(with = "real")]
        lambda: f64,
    },
    /// Kibble–Moran pair on Gamma(q, 1) margins.
    KibbleGamma {
        #[serde(with = "real")]
        q: f64,
        #[serde(with = "real")]
        r: f64,
    },
}

fn sampler_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter {
        name: "sampler",
        reason: e.to_string(),
    }
}

impl ConjugateModel {
    pub fn beta_binomial(n: u32, a: f64, b: f64) -> Result<Self> {
        require_positive("a", a)?;
        require_positive("b", b)?;
        Ok(Self::BetaBinomial { n, a, b })
    }

    pub fn gamma_poisson(x0: f64, lambda: f64) -> Result<Self> {
        require_positive("x0", x0)?;
        require_positive("lambda", lambda)?;
        Ok(Self::GammaPoisson { x0, lambda })
    }

    pub fn gauss_gauss(x0: f64, lambda: f64) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::Domain {
                what: "x0",
                value: x0,
                domain: "R".into(),
            });
        }
        require_positive("lambda", lambda)?;
        Ok(Self::GaussGauss { x0, lambda })
    }

    pub fn kibble_gamma(q: f64, r: f64) -> Result<Self> {
        KibbleLaw::new(q, r)?;
        Ok(Self::KibbleGamma { q, r })
    }

    /// Re-runs the constructor checks, e.g. after deserialization.
    pub fn validated(self) -> Result<Self> {
        match self {
            Self::BetaBinomial { n, a, b } => Self::beta_binomial(n, a, b),
            Self::GammaPoisson { x0, lambda } => Self::gamma_poisson(x0, lambda),
            Self::GaussGauss { x0, lambda } => Self::gauss_gauss(x0, lambda),
            Self::KibbleGamma { q, r } => Self::kibble_gamma(q, r),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::BetaBinomial { n, a, b } => format!("beta_binomial({n},{a},{b})"),
            Self::GammaPoisson { x0, lambda } => format!("gamma_poisson({x0},{lambda})"),
            Self::GaussGauss { x0, lambda } => format!("gauss_gauss({x0},{lambda})"),
            Self::KibbleGamma { q, r } => format!("kibble_gamma({q},{r})"),
        }
    }

    /// Stationary law μ of the x-chain.
    pub fn margin_x(&self) -> Result<MeasureSpec> {
        match *self {
            Self::BetaBinomial { n, a, b } => MeasureSpec::beta_binomial(n, a, b),
            Self::GammaPoisson { x0, lambda } => {
                MeasureSpec::negative_binomial(lambda * x0, 1.0 / (1.0 + lambda))
            }
            Self::GaussGauss { x0, lambda } => MeasureSpec::gaussian(x0, 1.0 + 1.0 / lambda),
            Self::KibbleGamma { q, .. } => MeasureSpec::gamma(q, 1.0),
        }
    }

    /// Law ν of the latent component.
    pub fn margin_y(&self) -> Result<MeasureSpec> {
        match *self {
            Self::BetaBinomial { a, b, .. } => MeasureSpec::beta(a, b),
            Self::GammaPoisson { x0, lambda } => MeasureSpec::gamma(lambda * x0, 1.0 / lambda),
            Self::GaussGauss { x0, lambda } => MeasureSpec::gaussian(x0, 1.0 / lambda),
            Self::KibbleGamma { q, .. } => MeasureSpec::gamma(q, 1.0),
        }
    }

    /// Canonical Lancaster sequence of (X, Y) up to degree `n`.
    pub fn sequence(&self, n: usize) -> Result<LancasterSequence> {
        let geometric = |t: f64| -> Result<LancasterSequence> {
            LancasterSequence::new(
                (0..=n).map(|k| t.powi(k as i32)).collect(),
                (self.margin_x()?, self.margin_y()?),
                self.name(),
            )
        };
        match *self {
            Self::BetaBinomial { n: m, a, b } => {
                let mut s = seq_beta_binomial(m, a, b)?;
                s.rho.resize(n + 1, 0.0);
                if let Some(p) = s.printed_variant.as_mut() {
                    p.resize(n + 1, 0.0);
                }
                Ok(s)
            }
            Self::GammaPoisson { lambda, .. } | Self::GaussGauss { lambda, .. } => {
                geometric((1.0 + lambda).powf(-0.5))
            }
            Self::KibbleGamma { r, .. } => geometric(r),
        }
    }

    /// ρ_n², the eigenvalue of the x-chain on p_n.
    pub fn eigenvalue(&self, n: usize) -> Result<f64> {
        let rho = self.sequence(n)?.rho[n];
        Ok(rho * rho)
    }

    pub fn in_support(&self, x: f64) -> bool {
        let m = match self.margin_x() {
            Ok(m) => m,
            Err(_) => return false,
        };
        let s = m.support();
        if !x.is_finite() || !s.contains(x) {
            return false;
        }
        !m.is_discrete() || x.fract() == 0.0
    }

    /// y ~ K(x, ·).
    pub fn sample_forward(&self, x: f64, rng: &mut dyn RngCore) -> Result<f64> {
        match *self {
            Self::BetaBinomial { n, a, b } => Ok(Beta::new(a + x, b + n as f64 - x)
                .map_err(sampler_err)?
                .sample(rng)),
            Self::GammaPoisson { x0, lambda } => Ok(Gamma::new(lambda * x0 + x, 1.0 / (lambda + 1.0))
                .map_err(sampler_err)?
                .sample(rng)),
            Self::GaussGauss { x0, lambda } => {
                Ok(Normal::new((lambda * x0 + x) / (lambda + 1.0), (lambda + 1.0).powf(-0.5))
                    .map_err(sampler_err)?
                    .sample(rng))
            }
            Self::KibbleGamma { q, r } => KibbleLaw { q, r }.sample_conditional(x, rng),
        }
    }

    /// x ~ L(y, ·).
    pub fn sample_backward(&self, y: f64, rng: &mut dyn RngCore) -> Result<f64> {
        match *self {
            Self::BetaBinomial { n, .. } => Ok(Binomial::new(n as u64, y)
                .map_err(sampler_err)?
                .sample(rng) as f64),
            Self::GammaPoisson { .. } => sample_poisson(y, rng),
            Self::GaussGauss { .. } => Ok(Normal::new(y, 1.0).map_err(sampler_err)?.sample(rng)),
            Self::KibbleGamma { q, r } => KibbleLaw { q, r }.sample_conditional(y, rng),
        }
    }

    /// Gauss rule for K(x, ·) exact on polynomials of degree ≤ `degree`.
    pub(crate) fn forward_rule(&self, x: f64, degree: usize) -> Result<GaussRule> {
        match *self {
            Self::BetaBinomial { n, a, b } => {
                rule_for(&MeasureSpec::beta(a + x, b + n as f64 - x)?, degree)
            }
            Self::GammaPoisson { x0, lambda } => {
                rule_for(&MeasureSpec::gamma(lambda * x0 + x, 1.0 / (lambda + 1.0))?, degree)
            }
            Self::GaussGauss { x0, lambda } => rule_for(
                &MeasureSpec::gaussian((lambda * x0 + x) / (lambda + 1.0), 1.0 / (lambda + 1.0))?,
                degree,
            ),
            Self::KibbleGamma { q, r } => kibble_rule(q, r, x, degree),
        }
    }

    /// Gauss rule for L(y, ·) exact on polynomials of degree ≤ `degree`.
    pub(crate) fn backward_rule(&self, y: f64, degree: usize) -> Result<GaussRule> {
        match *self {
            Self::BetaBinomial { n, .. } => rule_for(&MeasureSpec::binomial(n, y)?, degree),
            Self::GammaPoisson { .. } => {
                if y <= 0.0 {
                    return Ok(point(0.0));
                }
                rule_for(&MeasureSpec::poisson(y)?, degree)
            }
            Self::GaussGauss { .. } => rule_for(&MeasureSpec::gaussian(y, 1.0)?, degree),
            Self::KibbleGamma { q, r } => kibble_rule(q, r, y, degree),
        }
    }
}

fn point(x: f64) -> GaussRule {
    GaussRule {
        nodes: vec![x],
        weights: vec![1.0],
    }
}

fn rule_for(m: &MeasureSpec, degree: usize) -> Result<GaussRule> {
    let nodes = degree / 2 + 1;
    let k = m.atom_count().map_or(nodes, |a| nodes.min(a));
    crate::orthopoly::extended_recurrence(m, k - 1)?.quadrature(k)
}

/// Y | x is Gamma(q + N, 1 − r) with N ~ Poisson(r x/(1 − r)); conditional
/// moments are polynomial in N, so a Gauss rule in N is exact even at
/// non-integer nodes.
fn kibble_rule(q: f64, r: f64, x: f64, degree: usize) -> Result<GaussRule> {
    if r == 1.0 {
        return Ok(point(x));
    }
    let latent = if r == 0.0 || x <= 0.0 {
        point(0.0)
    } else {
        rule_for(&MeasureSpec::poisson(r * x / (1.0 - r))?, degree)?
    };
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (&nu, &w) in latent.nodes.iter().zip(&latent.weights) {
        let inner = rule_for(&MeasureSpec::gamma(q + nu.max(0.0), 1.0 - r)?, degree)?;
        nodes.extend(&inner.nodes);
        weights.extend(inner.weights.iter().map(|v| v * w));
    }
    Ok(GaussRule { nodes, weights })
}

/// Recorded x-states x_0..x_T of one chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub model: ConjugateModel,
    pub seed: u64,
    pub generator: String,
    pub steps: usize,
    #[serde(with = "real::vec")]
    pub states: Vec<f64>,
}

impl ChainTrace {
    /// Model, seed, generator and length, without the states.
    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "model": self.model,
            "model_name": self.model.name(),
            "seed": self.seed,
            "generator": self.generator,
            "steps": self.steps,
            "x0": real::format17(self.states[0]),
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,x")?;
        for (t, x) in self.states.iter().enumerate() {
            writeln!(w, "{t},{}", real::format17(*x))?;
        }
        Ok(())
    }
}

/// Runs `steps` x-chain transitions from `start` on a ChaCha20 stream
/// seeded with `seed`.
pub fn run_x_chain(model: &ConjugateModel, start: f64, steps: usize, seed: u64) -> Result<ChainTrace> {
    let model = model.validated()?;
    if !model.in_support(start) {
        return Err(Error::Domain {
            what: "x0",
            value: start,
            domain: format!("support of {}", model.margin_x()?.label()),
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = start;
    states.push(x);
    for _ in 0..steps {
        let y = model.sample_forward(x, &mut rng)?;
        x = model.sample_backward(y, &mut rng)?;
        states.push(x);
    }
    Ok(ChainTrace {
        model,
        seed,
        generator: GENERATOR.into(),
        steps,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traces_are_reproducible() {
        let m = ConjugateModel::beta_binomial(1, 1.0, 1.0).unwrap();
        let a = run_x_chain(&m, 0.0, 10, 42).unwrap();
        let b = run_x_chain(&m, 0.0, 10, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.states.len(), 11);
        assert!(a.states.iter().all(|&x| x == 0.0 || x == 1.0));
        assert_ne!(a.states, run_x_chain(&m, 0.0, 10, 43).unwrap().states);
    }

    #[test]
    fn comonotone_kibble_is_frozen() {
        let m = ConjugateModel::kibble_gamma(2.0, 1.0).unwrap();
        let t = run_x_chain(&m, 1.7, 50, 1).unwrap();
        assert!(t.states.iter().all(|&x| x == 1.7));
    }

    #[test]
    fn start_must_be_in_support() {
        let m = ConjugateModel::beta_binomial(3, 1.0, 1.0).unwrap();
        assert!(run_x_chain(&m, 4.0, 5, 0).is_err());
        assert!(run_x_chain(&m, 1.5, 5, 0).is_err());
        let g = ConjugateModel::gamma_poisson(2.0, 1.0).unwrap();
        assert!(run_x_chain(&g, -1.0, 5, 0).is_err());
    }

    #[test]
    fn model_sequences() {
        let m = ConjugateModel::gauss_gauss(0.0, 1.0).unwrap();
        assert!((m.eigenvalue(1).unwrap() - 0.5).abs() < 1e-15);
        let b = ConjugateModel::beta_binomial(1, 1.0, 1.0).unwrap();
        assert!((b.eigenvalue(1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(b.eigenvalue(2).unwrap(), 0.0);
        let k = ConjugateModel::kibble_gamma(2.0, 0.5).unwrap();
        assert!((k.eigenvalue(2).unwrap() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn csv_and_metadata() {
        let m = ConjugateModel::gamma_poisson(2.0, 1.0).unwrap();
        let t = run_x_chain(&m, 3.0, 3, 9).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,x\n0,3.0000000000000000e0\n"));
        assert_eq!(text.lines().count(), 5);
        let meta = t.metadata();
        assert_eq!(meta["generator"], "chacha20");
        assert_eq!(meta["model"]["kind"], "gamma-poisson");
    }

    #[test]
    fn model_json_is_strict() {
        let ok: ConjugateModel =
            serde_json::from_str(r#"{"kind":"kibble-gamma","q":"2","r":"0.5"}"#).unwrap();
        assert_eq!(ok, ConjugateModel::KibbleGamma { q: 2.0, r: 0.5 });
        assert!(serde_json::from_str::<ConjugateModel>(r#"{"kind":"kibble-gamma","q":"2","r":"0.5","z":1}"#).is_err());
    }
}
