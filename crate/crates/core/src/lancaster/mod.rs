//! Lancaster sequences and bivariate Lancaster probabilities.
//!
//! A Lancaster probability with margins (μ, ν) has density
//! Σ ρ_n p_n(x) q_n(y) with respect to μ ⊗ ν, where p_n and q_n are the
//! orthonormal polynomials of the margins. The canonical ρ_n is always
//! E[p_n(X) q_n(Y)].

mod estimate;
mod kibble;
mod verify;

pub use estimate::{
    beta_binomial_rho_squared_exact, estimate_rho, estimate_rho_mc, BetaBinomialLaw, BujaLaw,
    EaglesonLaw, JointLaw, KibbleLaw, MonteCarloOnly, RhoEstimate,
};
pub use kibble::{eagleson_gamma_laplace, kibble_laplace, Mixing};
pub use verify::{verify_moment_representation, Case, HankelCheck, Verdict, VerifyReport};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::nef::NefSpec;
use crate::orthopoly::{
    oracle_exact, recurrence, MeasureSpec, RecurrenceCoeffs, RecurrenceMode, MAX_DEGREE,
};
use crate::real;
use crate::series::PartialSums;
use crate::special::{factorial, pochhammer, rat, rat_int, sqrt_rat};

/// Relative band for declaring a density expansion stabilized.
pub const DENSITY_BAND: f64 = 1e-6;
/// Default truncation for density expansions.
pub const DEFAULT_TRUNCATION: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LancasterSequence {
    #[serde(with = "real::vec")]
    pub rho: Vec<f64>,
    pub margins: (MeasureSpec, MeasureSpec),
    pub provenance: String,
    #[serde(with = "real::opt_vec", default)]
    pub printed_variant: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LancasterSequence {
    pub fn new(
        rho: Vec<f64>,
        margins: (MeasureSpec, MeasureSpec),
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if rho.is_empty() || rho[0] != 1.0 {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: "a Lancaster sequence starts with rho_0 = 1".into(),
            });
        }
        Ok(Self {
            rho,
            margins,
            provenance: provenance.into(),
            printed_variant: None,
            note: None,
        })
    }

    /// ρ_n = 1: the diagonal coupling of μ with itself.
    pub fn identity(margin: MeasureSpec, n: usize) -> Self {
        Self::new(vec![1.0; n + 1], (margin.clone(), margin), "identity").unwrap()
    }

    /// ρ_n = 0 for n ≥ 1: the product measure.
    pub fn independence(mu: MeasureSpec, nu: MeasureSpec, n: usize) -> Self {
        let mut rho = vec![0.0; n + 1];
        rho[0] = 1.0;
        Self::new(rho, (mu, nu), "independence").unwrap()
    }

    /// Highest stored index N.
    pub fn order(&self) -> usize {
        self.rho.len() - 1
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("sequence serializes")
    }
}

/// ρ_n = (−1)^n √(ab)/√((a+n)(b+n)) on margins Beta(a, b+1), Beta(b, a+1).
pub fn seq_buja(a: f64, b: f64, n: usize) -> Result<LancasterSequence> {
    require_positive("a", a)?;
    require_positive("b", b)?;
    let rho = (0..=n)
        .map(|k| {
            let k = k as f64;
            let sign = if k as usize % 2 == 0 { 1.0 } else { -1.0 };
            sign * (a * b).sqrt() / ((a + k) * (b + k)).sqrt()
        })
        .collect();
    LancasterSequence::new(
        rho,
        (MeasureSpec::beta(a, b + 1.0)?, MeasureSpec::beta(b, a + 1.0)?),
        format!("buja(a={a}, b={b})"),
    )
}

/// Beta-binomial pair: X | θ ~ Binomial(n, θ), θ ~ Beta(a, b).
///
/// `rho` holds the canonical E[p_j(X) q_j(θ)], computed exactly; the
/// closed form n!/((a+b+n)_j (n−j)!) is kept as `printed_variant` and equals
/// the squared canonical value, i.e. the x-chain eigenvalue.
pub fn seq_beta_binomial(n: u32, a: f64, b: f64) -> Result<LancasterSequence> {
    require_positive("a", a)?;
    require_positive("b", b)?;
    let (squared, signs) = estimate::beta_binomial_exact(n, a, b)?;
    let rho: Vec<f64> = squared
        .iter()
        .zip(&signs)
        .map(|(s, &sign)| sign * sqrt_rat(s))
        .collect();
    let printed = (0..=n as usize)
        .map(|j| factorial(n as usize) / (pochhammer(a + b + n as f64, j) * factorial(n as usize - j)))
        .collect();
    let mut seq = LancasterSequence::new(
        rho,
        (
            MeasureSpec::beta_binomial(n, a, b)?,
            MeasureSpec::beta(a, b)?,
        ),
        format!("beta-binomial(n={n}, a={a}, b={b})"),
    )?;
    seq.printed_variant = Some(printed);
    seq.note = Some(
        "printed_variant is the closed-form sequence n!/((a+b+n)_j (n-j)!); it equals rho_j^2, \
         the x-chain eigenvalue, not the correlation E[p_j(X) q_j(theta)]; rho_j = 0 for j > n"
            .into(),
    );
    Ok(seq)
}

/// ρ_n = c_n(η)/√(c_n(λ+η) c_n(η+ξ)) for S = X+Y, T = Y+Z with independent
/// X, Y, Z of Jorgensen parameters λ, η, ξ.
pub fn seq_eagleson(
    nef: NefSpec,
    lambda: f64,
    eta: f64,
    xi: f64,
    theta: f64,
    n: usize,
) -> Result<LancasterSequence> {
    for (v, _) in [(lambda, "lambda"), (eta, "eta"), (xi, "xi")] {
        if !nef.jorgensen_contains(v) {
            return Err(Error::JorgensenViolation {
                family: nef.name().into(),
                value: v,
            });
        }
    }
    if !nef.is_quadratic() {
        return Err(Error::UnsupportedFamily(format!("{} is not quadratic", nef.name())));
    }
    require_positive("eta", eta)?;
    let mu = nef.jorgensen_measure(lambda + eta, theta)?;
    let nu = nef.jorgensen_measure(eta + xi, theta)?;
    let limit = [mu.atom_count(), nu.atom_count()]
        .into_iter()
        .flatten()
        .map(|a| a - 1)
        .fold(n.min(MAX_DEGREE), usize::min);
    let mut rho = Vec::with_capacity(limit + 1);
    for k in 0..=limit {
        let num = nef.c_n(eta, theta, k)?;
        let den = (nef.c_n(lambda + eta, theta, k)? * nef.c_n(eta + xi, theta, k)?).sqrt();
        rho.push(if k == 0 { 1.0 } else { num / den });
    }
    LancasterSequence::new(
        rho,
        (mu, nu),
        format!(
            "eagleson({}, lambda={lambda}, eta={eta}, xi={xi}, theta={theta})",
            nef.name()
        ),
    )
}

/// ρ_n = c_n(η)/c_n(q) on hyperbolic margins, with the Beta(η, q−η) moment
/// representation returned alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicBeta {
    pub sequence: LancasterSequence,
    /// ∫ t^n β_{η,q−η}(dt), by quadrature.
    pub beta_moments: Vec<f64>,
}

pub fn seq_hyperbolic_beta(q: f64, eta: f64, n: usize) -> Result<HyperbolicBeta> {
    require_positive("q", q)?;
    if !(0.0..=q).contains(&eta) {
        return Err(Error::EtaOutOfRange { eta, q });
    }
    let nef = NefSpec::hyperbolic(1.0)?;
    let n = n.min(MAX_DEGREE);
    let mut rho = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let ratio = if k == 0 {
            1.0
        } else {
            nef.c_n(eta, 0.0, k)? / nef.c_n(q, 0.0, k)?
        };
        rho.push(ratio);
    }
    let beta_moments = beta_moments(eta, q - eta, n)?;
    for (k, (r, m)) in rho.iter().zip(&beta_moments).enumerate() {
        if (r - m).abs() > 1e-12 * r.abs().max(1e-300) && (r - m).abs() > 1e-15 {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("Beta-mixture identity fails at n = {k}: {r} vs {m}"),
            });
        }
    }
    let margin = MeasureSpec::hyperbolic(q)?;
    let sequence = LancasterSequence::new(
        rho,
        (margin.clone(), margin),
        format!("hyperbolic-beta(q={q}, eta={eta})"),
    )?;
    Ok(HyperbolicBeta {
        sequence,
        beta_moments,
    })
}

/// ∫ t^k β_{a,b}(dt) for k ≤ n by a Gauss rule of β_{a,b}, degenerate at
/// the ends of the range.
fn beta_moments(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if a == 0.0 {
        return Ok((0..=n).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect());
    }
    if b == 0.0 {
        return Ok(vec![1.0; n + 1]);
    }
    let law = MeasureSpec::beta(a, b)?;
    let nodes = n / 2 + 1;
    let rule = crate::orthopoly::extended_recurrence(&law, nodes)?.quadrature(nodes)?;
    Ok((0..=n).map(|k| rule.integrate(|t| t.powi(k as i32))).collect())
}

/// Cross-margin sequences ρ_n = t^n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CrossKind {
    /// Poisson means a ≤ b.
    Poisson {
        #[serde(with = "real")]
        a: f64,
        #[serde(with = "real")]
        b: f64,
    },
    /// NB(λ, a) and NB(λ, b) with a ≤ b.
    Negbin {
        #[serde(with = "real")]
        a: f64,
        #[serde(with = "real")]
        b: f64,
        #[serde(with = "real")]
        lambda: f64,
    },
    /// NB(λ, a) and Gamma(λ, 1).
    NegbinGamma {
        #[serde(with = "real")]
        a: f64,
        #[serde(with = "real")]
        lambda: f64,
    },
}

impl CrossKind {
    pub fn margins(&self) -> Result<(MeasureSpec, MeasureSpec)> {
        match *self {
            Self::Poisson { a, b } => Ok((MeasureSpec::poisson(a)?, MeasureSpec::poisson(b)?)),
            Self::Negbin { a, b, lambda } => Ok((
                MeasureSpec::negative_binomial(lambda, a)?,
                MeasureSpec::negative_binomial(lambda, b)?,
            )),
            Self::NegbinGamma { a, lambda } => Ok((
                MeasureSpec::negative_binomial(lambda, a)?,
                MeasureSpec::gamma(lambda, 1.0)?,
            )),
        }
    }

    /// Largest admissible t (closed endpoint).
    pub fn t_max(&self) -> Result<f64> {
        match *self {
            Self::Poisson { a, b } | Self::Negbin { a, b, .. } => {
                if a > b {
                    return Err(Error::InvalidParameter {
                        name: "a",
                        reason: format!("requires a <= b, got a = {a}, b = {b}"),
                    });
                }
                Ok((a / b).sqrt())
            }
            Self::NegbinGamma { a, .. } => Ok(a.sqrt()),
        }
    }
}

pub fn seq_geometric_cross(kind: CrossKind, t: f64, n: usize) -> Result<LancasterSequence> {
    let margins = kind.margins()?;
    let max = kind.t_max()?;
    if !(t >= 0.0 && t <= max) {
        return Err(Error::TOutOfRange { t, max });
    }
    let rho = (0..=n).map(|k| t.powi(k as i32)).collect();
    LancasterSequence::new(rho, margins, format!("geometric-cross({kind:?}, t={t})"))
}

/// ρ_n = t^n on arbitrary margins; a candidate, not necessarily Lancaster.
pub fn seq_geometric(mu: MeasureSpec, nu: MeasureSpec, t: f64, n: usize) -> Result<LancasterSequence> {
    let rho = (0..=n).map(|k| t.powi(k as i32)).collect();
    LancasterSequence::new(rho, (mu, nu), format!("geometric(t={t})"))
}

/// (a_n ρ_n b_n) for a ∈ S(μ, μ), ρ ∈ S(μ, ν), b ∈ S(ν, ν).
pub fn seq_product(
    a_seq: &LancasterSequence,
    rho: &LancasterSequence,
    b_seq: &LancasterSequence,
) -> Result<LancasterSequence> {
    let (mu, nu) = &rho.margins;
    if &a_seq.margins.0 != mu || &a_seq.margins.1 != mu {
        return Err(Error::MarginMismatch(format!(
            "left factor must live on ({0}, {0})",
            mu.label()
        )));
    }
    if &b_seq.margins.0 != nu || &b_seq.margins.1 != nu {
        return Err(Error::MarginMismatch(format!(
            "right factor must live on ({0}, {0})",
            nu.label()
        )));
    }
    let len = a_seq.rho.len().min(rho.rho.len()).min(b_seq.rho.len());
    let out = (0..len)
        .map(|k| a_seq.rho[k] * rho.rho[k] * b_seq.rho[k])
        .collect();
    LancasterSequence::new(
        out,
        rho.margins.clone(),
        format!(
            "product({} * {} * {})",
            a_seq.provenance, rho.provenance, b_seq.provenance
        ),
    )
}

/// σ(dx, dy) = [Σ ρ_n p_n(x) q_n(y)] μ(dx) ν(dy), truncated.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariateLancaster {
    pub sequence: LancasterSequence,
    pub bases: (RecurrenceCoeffs, RecurrenceCoeffs),
    pub truncation: usize,
}

pub(crate) fn basis_for(m: &MeasureSpec, n: usize) -> Result<RecurrenceCoeffs> {
    let mode = if m.poly_family().has_fast_path() {
        RecurrenceMode::FastPath
    } else {
        RecurrenceMode::Oracle
    };
    recurrence(m, n, mode)
}

impl BivariateLancaster {
    pub fn new(sequence: LancasterSequence, truncation: usize) -> Result<Self> {
        let mut n = truncation.min(sequence.order()).min(MAX_DEGREE);
        for m in [&sequence.margins.0, &sequence.margins.1] {
            if let Some(atoms) = m.atom_count() {
                n = n.min(atoms - 1);
            }
        }
        let bases = (
            basis_for(&sequence.margins.0, n)?,
            basis_for(&sequence.margins.1, n)?,
        );
        Ok(Self {
            sequence,
            bases,
            truncation: n,
        })
    }

    /// Partial sums S_0..S_N of the density with respect to μ ⊗ ν.
    pub fn density_truncated(&self, x: f64, y: f64, n: usize) -> Result<PartialSums> {
        if n > self.truncation {
            return Err(Error::DegreeOutOfRange {
                degree: n,
                max: self.truncation,
            });
        }
        let p = self.bases.0.eval_all(n, x)?;
        let q = self.bases.1.eval_all(n, y)?;
        let terms = (0..=n).map(|k| self.sequence.rho[k] * p[k] * q[k]);
        Ok(PartialSums::from_terms(terms, DENSITY_BAND, f64::MIN_POSITIVE))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "sequence": self.sequence.to_json(),
            "bases": [self.bases.0.to_json(), self.bases.1.to_json()],
            "truncation": self.truncation,
        })
    }
}

/// Monomial coefficients of the monic polynomials P_0..P_n.
pub(crate) fn monic_monomials(alpha: &[BigRational], beta: &[BigRational], n: usize) -> Vec<Vec<BigRational>> {
    let mut polys: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]];
    for k in 0..n {
        let cur = &polys[k];
        let mut next = vec![BigRational::zero(); k + 2];
        for (d, c) in cur.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= &alpha[k] * c;
        }
        if k >= 1 {
            for (d, c) in polys[k - 1].iter().enumerate() {
                next[d] -= &beta[k - 1] * c;
            }
        }
        polys.push(next);
    }
    polys
}

/// Exact monic recurrence and norms from rational moments.
pub(crate) fn exact_basis(m: &MeasureSpec, n: usize) -> Result<(Vec<Vec<BigRational>>, Vec<BigRational>)> {
    let (alpha, beta) = oracle_exact(m, n)?;
    let polys = monic_monomials(&alpha, &beta, n);
    let mut norms = vec![BigRational::one()];
    for b in &beta {
        let next = norms.last().unwrap() * b;
        norms.push(next);
    }
    Ok((polys, norms))
}

/// ρ_j² = num_j² / (h_j h'_j) and the sign of num_j, from exact joint moments.
pub(crate) fn exact_rho_from_joint<F>(
    mu: &MeasureSpec,
    nu: &MeasureSpec,
    n: usize,
    joint: F,
) -> Result<(Vec<BigRational>, Vec<f64>)>
where
    F: Fn(usize, usize) -> BigRational,
{
    let (pu, hu) = exact_basis(mu, n)?;
    let (pv, hv) = exact_basis(nu, n)?;
    let mut table = vec![vec![BigRational::zero(); n + 1]; n + 1];
    for (i, row) in table.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            *cell = joint(i, k);
        }
    }
    let mut squared = Vec::with_capacity(n + 1);
    let mut signs = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut num = BigRational::zero();
        for (i, ci) in pu[j].iter().enumerate() {
            for (k, dk) in pv[j].iter().enumerate() {
                num += ci * dk * &table[i][k];
            }
        }
        signs.push(if num.is_negative() { -1.0 } else { 1.0 });
        squared.push(&num * &num / (&hu[j] * &hv[j]));
    }
    Ok((squared, signs))
}

pub(crate) fn rat_f(v: f64) -> BigRational {
    rat(v)
}

pub(crate) fn rat_i(v: i64) -> BigRational {
    rat_int(v)
}
