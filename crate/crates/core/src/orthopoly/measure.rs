use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::quad::{self, Integral, Interval};
use crate::real;
use crate::special::{ln_abs_gamma_complex, ln_beta, ln_gamma};

/// A univariate probability measure from one of the families used by the
/// Lancaster constructions, or a generic finite atom list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum MeasureSpec {
    Gaussian {
        #[serde(with = "real")]
        mean: f64,
        #[serde(with = "real")]
        var: f64,
    },
    Poisson {
        #[serde(with = "real")]
        mean: f64,
    },
    Binomial {
        n: u32,
        #[serde(with = "real")]
        p: f64,
    },
    /// (1-prob)^shape Σ (shape)_k / k! prob^k δ_k.
    NegativeBinomial {
        #[serde(with = "real")]
        shape: f64,
        #[serde(with = "real")]
        prob: f64,
    },
    Gamma {
        #[serde(with = "real")]
        shape: f64,
        #[serde(with = "real")]
        scale: f64,
    },
    /// Law with Laplace transform (cos(theta + s) / cos theta)^{-q}.
    Hyperbolic {
        #[serde(with = "real")]
        q: f64,
        #[serde(with = "real")]
        theta: f64,
    },
    /// Beta(a, b) moved affinely onto [lower, upper].
    Beta {
        #[serde(with = "real")]
        a: f64,
        #[serde(with = "real")]
        b: f64,
        #[serde(with = "real")]
        lower: f64,
        #[serde(with = "real")]
        upper: f64,
    },
    /// Mixture of Binomial(n, θ) over θ ~ Beta(a, b) (Hahn weights).
    BetaBinomial {
        n: u32,
        #[serde(with = "real")]
        a: f64,
        #[serde(with = "real")]
        b: f64,
    },
    /// Plancherel measure of the homogeneous tree with q + 1 neighbours.
    CartierDunau {
        #[serde(with = "real")]
        q: f64,
    },
    Discrete {
        name: String,
        #[serde(with = "real::pairs")]
        atoms: Vec<(f64, f64)>,
    },
}

/// Polynomial system orthogonal for a measure family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolyFamily {
    Hermite,
    Charlier,
    Krawtchouk,
    Meixner,
    Laguerre,
    MeixnerPollaczek,
    Jacobi,
    Hahn,
    CartierDunau,
    Generic,
}

impl PolyFamily {
    pub const ALL_NAMED: [PolyFamily; 9] = [
        PolyFamily::Hermite,
        PolyFamily::Charlier,
        PolyFamily::Krawtchouk,
        PolyFamily::Meixner,
        PolyFamily::Laguerre,
        PolyFamily::MeixnerPollaczek,
        PolyFamily::Jacobi,
        PolyFamily::Hahn,
        PolyFamily::CartierDunau,
    ];

    pub fn has_fast_path(self) -> bool {
        !matches!(self, PolyFamily::CartierDunau | PolyFamily::Generic)
    }
}

/// Shape of the smallest closed interval carrying the measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportKind {
    Bounded,
    LowerHalfLine,
    UpperHalfLine,
    Line,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn kind(&self) -> SupportKind {
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => SupportKind::Bounded,
            (true, false) => SupportKind::LowerHalfLine,
            (false, true) => SupportKind::UpperHalfLine,
            (false, false) => SupportKind::Line,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

const MASS_FLOOR: f64 = 1e-300;

impl MeasureSpec {
    pub fn gaussian(mean: f64, var: f64) -> Result<Self> {
        require_positive("var", var)?;
        Ok(Self::Gaussian { mean, var })
    }

    pub fn standard_gaussian() -> Self {
        Self::Gaussian {
            mean: 0.0,
            var: 1.0,
        }
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        require_positive("mean", mean)?;
        Ok(Self::Poisson { mean })
    }

    pub fn binomial(n: u32, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::NonpositiveParameter {
                name: "n",
                value: 0.0,
            });
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain {
                what: "p",
                value: p,
                domain: "(0, 1)".into(),
            });
        }
        Ok(Self::Binomial { n, p })
    }

    pub fn negative_binomial(shape: f64, prob: f64) -> Result<Self> {
        require_positive("shape", shape)?;
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::Domain {
                what: "prob",
                value: prob,
                domain: "(0, 1)".into(),
            });
        }
        Ok(Self::NegativeBinomial { shape, prob })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        require_positive("shape", shape)?;
        require_positive("scale", scale)?;
        Ok(Self::Gamma { shape, scale })
    }

    pub fn hyperbolic(q: f64) -> Result<Self> {
        Self::hyperbolic_tilted(q, 0.0)
    }

    pub fn hyperbolic_tilted(q: f64, theta: f64) -> Result<Self> {
        require_positive("q", q)?;
        if theta.abs() >= PI / 2.0 {
            return Err(Error::Domain {
                what: "theta",
                value: theta,
                domain: "(-pi/2, pi/2)".into(),
            });
        }
        Ok(Self::Hyperbolic { q, theta })
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Self::beta_on(a, b, 0.0, 1.0)
    }

    pub fn beta_on(a: f64, b: f64, lower: f64, upper: f64) -> Result<Self> {
        require_positive("a", a)?;
        require_positive("b", b)?;
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidParameter {
                name: "interval",
                reason: format!("[{lower}, {upper}] is not a proper interval"),
            });
        }
        Ok(Self::Beta { a, b, lower, upper })
    }

    /// μ_a(dx) ∝ (1 - x²)^{a-1} on (-1, 1).
    pub fn symmetric_jacobi(a: f64) -> Result<Self> {
        Self::beta_on(a, a, -1.0, 1.0)
    }

    pub fn beta_binomial(n: u32, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::NonpositiveParameter {
                name: "n",
                value: 0.0,
            });
        }
        require_positive("a", a)?;
        require_positive("b", b)?;
        Ok(Self::BetaBinomial { n, a, b })
    }

    /// Requires q ≥ 1: below that the density alone carries less than unit mass.
    pub fn cartier_dunau(q: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::Domain {
                what: "q",
                value: q,
                domain: "[1, ∞)".into(),
            });
        }
        Ok(Self::CartierDunau { q })
    }

    pub fn discrete(name: impl Into<String>, atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter {
                name: "atoms",
                reason: "empty atom list".into(),
            });
        }
        if atoms.iter().any(|&(x, m)| !(m > 0.0 && m <= 1.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "atoms",
                reason: "masses must lie in (0, 1]".into(),
            });
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "atoms",
                reason: format!("masses sum to {total}"),
            });
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::Discrete {
            name: name.into(),
            atoms,
        })
    }

    /// Family identifier with parameters, e.g. `gamma(shape=2, scale=1)`.
    pub fn label(&self) -> String {
        match self {
            Self::Gaussian { mean, var } => format!("gaussian(mean={mean}, var={var})"),
            Self::Poisson { mean } => format!("poisson(mean={mean})"),
            Self::Binomial { n, p } => format!("binomial(n={n}, p={p})"),
            Self::NegativeBinomial { shape, prob } => {
                format!("negative-binomial(shape={shape}, prob={prob})")
            }
            Self::Gamma { shape, scale } => format!("gamma(shape={shape}, scale={scale})"),
            Self::Hyperbolic { q, theta } => format!("hyperbolic(q={q}, theta={theta})"),
            Self::Beta { a, b, lower, upper } => {
                format!("beta(a={a}, b={b}, on=[{lower}, {upper}])")
            }
            Self::BetaBinomial { n, a, b } => format!("beta-binomial(n={n}, a={a}, b={b})"),
            Self::CartierDunau { q } => format!("cartier-dunau(q={q})"),
            Self::Discrete { name, atoms } => format!("discrete({name}, {} atoms)", atoms.len()),
        }
    }

    pub fn poly_family(&self) -> PolyFamily {
        match self {
            Self::Gaussian { .. } => PolyFamily::Hermite,
            Self::Poisson { .. } => PolyFamily::Charlier,
            Self::Binomial { .. } => PolyFamily::Krawtchouk,
            Self::NegativeBinomial { .. } => PolyFamily::Meixner,
            Self::Gamma { .. } => PolyFamily::Laguerre,
            Self::Hyperbolic { .. } => PolyFamily::MeixnerPollaczek,
            Self::Beta { .. } => PolyFamily::Jacobi,
            Self::BetaBinomial { .. } => PolyFamily::Hahn,
            Self::CartierDunau { .. } => PolyFamily::CartierDunau,
            Self::Discrete { .. } => PolyFamily::Generic,
        }
    }

    pub fn cartier_dunau_edge(q: f64) -> f64 {
        2.0 * q.sqrt() / (1.0 + q)
    }

    pub fn support(&self) -> Support {
        let (lower, upper) = match self {
            Self::Gaussian { .. } | Self::Hyperbolic { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Poisson { .. } | Self::NegativeBinomial { .. } | Self::Gamma { .. } => {
                (0.0, f64::INFINITY)
            }
            Self::Binomial { n, .. } | Self::BetaBinomial { n, .. } => (0.0, *n as f64),
            Self::Beta { lower, upper, .. } => (*lower, *upper),
            Self::CartierDunau { q } => {
                let p = Self::cartier_dunau_edge(*q);
                (-p, p)
            }
            Self::Discrete { atoms, .. } => (atoms[0].0, atoms[atoms.len() - 1].0),
        };
        Support { lower, upper }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            Self::Poisson { .. }
                | Self::Binomial { .. }
                | Self::NegativeBinomial { .. }
                | Self::BetaBinomial { .. }
                | Self::Discrete { .. }
        )
    }

    /// Number of atoms when finite.
    pub fn atom_count(&self) -> Option<usize> {
        match self {
            Self::Binomial { n, .. } | Self::BetaBinomial { n, .. } => Some(*n as usize + 1),
            Self::Discrete { atoms, .. } => Some(atoms.len()),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Gaussian { mean, .. } | Self::Poisson { mean } => *mean,
            Self::Binomial { n, p } => *n as f64 * p,
            Self::NegativeBinomial { shape, prob } => shape * prob / (1.0 - prob),
            Self::Gamma { shape, scale } => shape * scale,
            Self::Hyperbolic { q, theta } => q * theta.tan(),
            Self::Beta { a, b, lower, upper } => lower + (upper - lower) * a / (a + b),
            Self::BetaBinomial { n, a, b } => *n as f64 * a / (a + b),
            Self::CartierDunau { .. } => 0.0,
            Self::Discrete { atoms, .. } => atoms.iter().map(|(x, m)| x * m).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Gaussian { var, .. } => *var,
            Self::Poisson { mean } => *mean,
            Self::Binomial { n, p } => *n as f64 * p * (1.0 - p),
            Self::NegativeBinomial { shape, prob } => shape * prob / ((1.0 - prob) * (1.0 - prob)),
            Self::Gamma { shape, scale } => shape * scale * scale,
            Self::Hyperbolic { q, theta } => q / (theta.cos() * theta.cos()),
            Self::Beta { a, b, lower, upper } => {
                let w = upper - lower;
                w * w * a * b / ((a + b) * (a + b) * (a + b + 1.0))
            }
            Self::BetaBinomial { n, a, b } => {
                let n = *n as f64;
                n * a * b * (a + b + n) / ((a + b) * (a + b) * (a + b + 1.0))
            }
            Self::CartierDunau { q } => 1.0 / (q + 1.0),
            Self::Discrete { atoms, .. } => {
                let m = self.mean();
                atoms.iter().map(|(x, w)| w * (x - m) * (x - m)).sum()
            }
        }
    }

    /// Log of the probability mass at integer point `k` for lattice families.
    pub fn ln_pmf(&self, k: u64) -> Option<f64> {
        let kf = k as f64;
        match self {
            Self::Poisson { mean } => Some(-mean + kf * mean.ln() - ln_gamma(kf + 1.0)),
            Self::Binomial { n, p } => (k <= *n as u64).then(|| {
                ln_choose(*n as f64, kf) + kf * p.ln() + (*n as f64 - kf) * (1.0 - p).ln()
            }),
            Self::NegativeBinomial { shape, prob } => Some(
                ln_gamma(shape + kf) - ln_gamma(*shape) - ln_gamma(kf + 1.0)
                    + shape * (1.0 - prob).ln()
                    + kf * prob.ln(),
            ),
            Self::BetaBinomial { n, a, b } => (k <= *n as u64).then(|| {
                let n = *n as f64;
                ln_choose(n, kf) + ln_beta(kf + a, n - kf + b) - ln_beta(*a, *b)
            }),
            _ => None,
        }
    }

    /// Atoms of a discrete measure. Infinite lattices are cut where the mass
    /// falls below `floor` beyond the mean.
    pub fn atoms(&self, floor: f64) -> Result<Vec<(f64, f64)>> {
        match self {
            Self::Discrete { atoms, .. } => Ok(atoms.clone()),
            Self::Binomial { n, .. } | Self::BetaBinomial { n, .. } => Ok((0..=*n as u64)
                .map(|k| (k as f64, self.ln_pmf(k).unwrap().exp()))
                .collect()),
            Self::Poisson { .. } | Self::NegativeBinomial { .. } => {
                let mean = self.mean();
                let mut out = Vec::new();
                for k in 0u64.. {
                    let m = self.ln_pmf(k).unwrap().exp();
                    out.push((k as f64, m));
                    if (k as f64) > mean && m < floor {
                        break;
                    }
                    if k > 10_000_000 {
                        return Err(Error::ResourceBudget("atom enumeration".into()));
                    }
                }
                Ok(out)
            }
            _ => Err(Error::UnsupportedFamily(format!(
                "{} is not discrete",
                self.label()
            ))),
        }
    }

    /// Lebesgue density of a continuous measure.
    pub fn density(&self, x: f64) -> Option<f64> {
        let v = match self {
            Self::Gaussian { mean, var } => {
                let z = x - mean;
                (-0.5 * z * z / var).exp() / (2.0 * PI * var).sqrt()
            }
            Self::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    ((shape - 1.0) * x.ln() - x / scale - ln_gamma(*shape) - shape * scale.ln())
                        .exp()
                }
            }
            Self::Hyperbolic { q, theta } => {
                let ln = q * theta.cos().ln() + theta * x + (q - 2.0) * 2f64.ln()
                    - PI.ln()
                    - ln_gamma(*q)
                    + 2.0 * ln_abs_gamma_complex(0.5 * q, 0.5 * x);
                ln.exp()
            }
            Self::Beta { a, b, lower, upper } => {
                if x <= *lower || x >= *upper {
                    0.0
                } else {
                    let w = upper - lower;
                    let u = (x - lower) / w;
                    let v = (upper - x) / w;
                    ((a - 1.0) * u.ln() + (b - 1.0) * v.ln() - ln_beta(*a, *b)).exp() / w
                }
            }
            Self::CartierDunau { q } => {
                let p = Self::cartier_dunau_edge(*q);
                if x.abs() >= p {
                    0.0
                } else {
                    (q + 1.0) / (2.0 * PI) * (p * p - x * x).sqrt() / (1.0 - x * x)
                }
            }
            _ => return None,
        };
        Some(v)
    }

    /// ∫ f dμ computed directly from atoms or the density, independently of
    /// any orthogonal-polynomial machinery.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F, tol: f64) -> Result<Integral> {
        if self.is_discrete() {
            let atoms = self.atoms(MASS_FLOOR)?;
            let value = atoms.iter().map(|&(x, m)| m * f(x)).sum();
            return Ok(Integral {
                value,
                error: 0.0,
                evaluations: atoms.len(),
            });
        }
        match self {
            Self::CartierDunau { q } => cartier_dunau_expect(*q, f, tol),
            Self::Beta { a, b, lower, upper } => {
                let w = upper - lower;
                let ln_norm = ln_beta(*a, *b) + w.ln();
                quad::integrate_with_gaps(
                    |x, u, v| {
                        let ln = (a - 1.0) * (u / w).ln() + (b - 1.0) * (v / w).ln() - ln_norm;
                        ln.exp() * f(x)
                    },
                    Interval::Finite(*lower, *upper),
                    tol,
                    1.0,
                )
            }
            _ => {
                let interval = match self {
                    Self::Gaussian { mean, var } => Interval::Line {
                        center: *mean,
                        scale: var.sqrt(),
                    },
                    Self::Hyperbolic { .. } => Interval::Line {
                        center: self.mean(),
                        scale: self.variance().sqrt(),
                    },
                    Self::Gamma { shape, scale } => Interval::Lower {
                        lower: 0.0,
                        scale: scale * shape.max(1.0),
                    },
                    _ => unreachable!("discrete and bounded cases handled above"),
                };
                quad::integrate(|x| self.density(x).unwrap() * f(x), interval, tol, 1.0)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let bad = |e: &dyn std::fmt::Display| Error::InvalidParameter {
            name: "sampler",
            reason: e.to_string(),
        };
        Ok(match self {
            Self::Gaussian { mean, var } => Normal::new(*mean, var.sqrt())
                .map_err(|e| bad(&e))?
                .sample(rng),
            Self::Poisson { mean } => Poisson::new(*mean).map_err(|e| bad(&e))?.sample(rng),
            Self::Binomial { n, p } => Binomial::new(*n as u64, *p)
                .map_err(|e| bad(&e))?
                .sample(rng) as f64,
            Self::NegativeBinomial { shape, prob } => {
                let rate = Gamma::new(*shape, prob / (1.0 - prob))
                    .map_err(|e| bad(&e))?
                    .sample(rng);
                sample_poisson(rate, rng)?
            }
            Self::Gamma { shape, scale } => Gamma::new(*shape, *scale)
                .map_err(|e| bad(&e))?
                .sample(rng),
            Self::Beta { a, b, lower, upper } => {
                let u = Beta::new(*a, *b).map_err(|e| bad(&e))?.sample(rng);
                lower + (upper - lower) * u
            }
            Self::BetaBinomial { n, a, b } => {
                let t = Beta::new(*a, *b).map_err(|e| bad(&e))?.sample(rng);
                Binomial::new(*n as u64, t).map_err(|e| bad(&e))?.sample(rng) as f64
            }
            Self::Discrete { atoms, .. } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut out = atoms[atoms.len() - 1].0;
                for &(x, m) in atoms {
                    acc += m;
                    if u < acc {
                        out = x;
                        break;
                    }
                }
                out
            }
            Self::Hyperbolic { .. } | Self::CartierDunau { .. } => {
                return Err(Error::UnsupportedFamily(format!(
                    "no sampler for {}",
                    self.label()
                )))
            }
        })
    }
}

/// Poisson draw that tolerates a zero rate.
pub fn sample_poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<f64> {
    if rate <= 0.0 {
        return Ok(0.0);
    }
    Poisson::new(rate)
        .map(|d| d.sample(rng))
        .map_err(|e| Error::InvalidParameter {
            name: "rate",
            reason: e.to_string(),
        })
}

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// x = p cos φ turns the density into a smooth periodic integrand in φ, so the
/// trapezoid rule converges geometrically.
fn cartier_dunau_expect<F: Fn(f64) -> f64>(q: f64, f: F, tol: f64) -> Result<Integral> {
    let p = MeasureSpec::cartier_dunau_edge(q);
    let c = (q + 1.0) / (2.0 * PI) * p * p;
    let g = |phi: f64| {
        let (s, co) = phi.sin_cos();
        let x = p * co;
        // sin²φ / (1 - p² cos²φ); at p = 1 this is identically 1
        let jac = if (p - 1.0).abs() < 1e-15 {
            1.0
        } else {
            s * s / (1.0 - x * x)
        };
        c * jac * f(x)
    };
    let mut m = 16usize;
    let mut prev = f64::NAN;
    let mut evaluations = 0;
    while m <= 1 << 16 {
        let h = PI / m as f64;
        // midpoint rule on [0, π] for the even periodic integrand
        let sum: f64 = (0..m).map(|k| g((k as f64 + 0.5) * h)).sum::<f64>() * h;
        evaluations += m;
        if (sum - prev).abs() <= tol * sum.abs().max(1.0) {
            return Ok(Integral {
                value: sum,
                error: (sum - prev).abs(),
                evaluations,
            });
        }
        prev = sum;
        m *= 2;
    }
    Err(Error::DivergentIntegral("Cartier–Dunau trapezoid rule".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn continuous_examples() -> Vec<MeasureSpec> {
        vec![
            MeasureSpec::gaussian(0.5, 2.0).unwrap(),
            MeasureSpec::gamma(0.6, 1.5).unwrap(),
            MeasureSpec::gamma(3.0, 1.0).unwrap(),
            MeasureSpec::hyperbolic(1.0).unwrap(),
            MeasureSpec::hyperbolic_tilted(2.5, 0.4).unwrap(),
            MeasureSpec::beta(0.7, 0.6).unwrap(),
            MeasureSpec::symmetric_jacobi(1.5).unwrap(),
            MeasureSpec::cartier_dunau(1.0).unwrap(),
            MeasureSpec::cartier_dunau(3.0).unwrap(),
        ]
    }

    #[test]
    fn densities_integrate_to_one() {
        for m in continuous_examples() {
            let total = m.expect(|_| 1.0, 1e-12).unwrap().value;
            assert!((total - 1.0).abs() < 1e-8, "{}: {}", m.label(), total);
        }
    }

    #[test]
    fn densities_reproduce_mean_and_variance() {
        for m in continuous_examples() {
            let mean = m.expect(|x| x, 1e-12).unwrap().value;
            let var = m.expect(|x| (x - mean) * (x - mean), 1e-12).unwrap().value;
            assert_relative_eq!(mean, m.mean(), epsilon = 1e-9);
            assert_relative_eq!(var, m.variance(), epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn lattice_masses_sum_to_one() {
        for m in [
            MeasureSpec::poisson(3.5).unwrap(),
            MeasureSpec::binomial(7, 0.3).unwrap(),
            MeasureSpec::negative_binomial(2.5, 0.4).unwrap(),
            MeasureSpec::beta_binomial(6, 0.5, 2.0).unwrap(),
        ] {
            let total: f64 = m.atoms(1e-300).unwrap().iter().map(|a| a.1).sum();
            assert!((total - 1.0).abs() < 1e-12, "{}", m.label());
        }
    }

    #[test]
    fn hyperbolic_secant_density() {
        let m = MeasureSpec::hyperbolic(1.0).unwrap();
        for x in [0.0, 0.7, 3.0] {
            let expected = 1.0 / (2.0 * (PI * x / 2.0).cosh());
            assert_relative_eq!(m.density(x).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(MeasureSpec::gamma(-1.0, 1.0).is_err());
        assert!(MeasureSpec::binomial(3, 1.0).is_err());
        assert!(MeasureSpec::cartier_dunau(0.5).is_err());
        assert!(MeasureSpec::discrete("x", vec![(0.0, 0.5), (1.0, 0.4)]).is_err());
    }

    #[test]
    fn serializes_with_family_tag() {
        let m = MeasureSpec::gamma(2.0, 1.0).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["family"], "gamma");
        assert_eq!(v["params"]["shape"], "2.0000000000000000e0");
        let back: MeasureSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }
}
