use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{exact_transition_matrix, ChainTrace, ConjugateModel};
use crate::error::{Error, Result};
use crate::lancaster::{beta_binomial_rho_squared_exact, exact_basis, LancasterSequence};
use crate::orthopoly::{extended_recurrence, RecurrenceCoeffs};
use crate::real;
use crate::special::{sqrt_rat, to_f64};

/// Default number of Gauss nodes in the eigencheck grid.
pub const DEFAULT_RESOLUTION: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigencheck {
    pub degree: usize,
    #[serde(with = "real")]
    pub eigenvalue: f64,
    /// max over the grid of |T p_n − ρ_n² p_n| / max(1, |p_n|).
    #[serde(with = "real")]
    pub residual: f64,
    /// The same maximum without scaling.
    #[serde(with = "real")]
    pub absolute_residual: f64,
    pub grid_size: usize,
    pub exact: bool,
}

/// Checks (T p_n)(x) = ρ_n² p_n(x) on a grid of Gauss nodes of μ. Finite
/// models use the exact matrix; otherwise both conditional integrals are
/// Gauss rules, which are exact on the polynomial integrands.
pub fn spectral_eigencheck(model: &ConjugateModel, n: usize, resolution: usize) -> Result<Eigencheck> {
    if let ConjugateModel::BetaBinomial { n: m, a, b } = *model {
        let t = exact_transition_matrix(model)?;
        let lambda = beta_binomial_rho_squared_exact(m, a, b)?
            .get(n)
            .cloned()
            .ok_or(Error::DegreeExceedsSupport {
                degree: n,
                atoms: m as usize + 1,
            })?;
        let v = t.monic_vector(n)?;
        let kv = t.apply(&v);
        let worst = kv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - &lambda * b).abs())
            .fold(BigRational::zero(), |acc, d| if d > acc { d } else { acc });
        let (_, norms) = exact_basis(&model.margin_x()?, n)?;
        let residual = if worst.is_zero() {
            0.0
        } else {
            to_f64(&worst) / sqrt_rat(&norms[n])
        };
        return Ok(Eigencheck {
            degree: n,
            eigenvalue: to_f64(&lambda),
            residual,
            absolute_residual: residual,
            grid_size: t.size(),
            exact: true,
        });
    }
    if resolution == 0 {
        return Err(Error::InvalidParameter {
            name: "resolution",
            reason: "need at least one grid point".into(),
        });
    }
    let lambda = model.eigenvalue(n)?;
    let mu = model.margin_x()?;
    let basis = extended_recurrence(&mu, n.max(resolution - 1))?;
    let grid = basis.quadrature(resolution)?;
    let mut buf = vec![0.0; basis.degree() + 1];
    let mut pn = |x: f64| {
        basis.eval_into(x, &mut buf);
        buf[n]
    };
    let (mut residual, mut absolute): (f64, f64) = (0.0, 0.0);
    for &x in &grid.nodes {
        let fw = model.forward_rule(x, n)?;
        let mut tp = 0.0;
        for (&y, &wy) in fw.nodes.iter().zip(&fw.weights) {
            let bw = model.backward_rule(y, n)?;
            let inner: f64 = bw.nodes.iter().zip(&bw.weights).map(|(&xp, &w)| w * pn(xp)).sum();
            tp += wy * inner;
        }
        let p = pn(x);
        let d = (tp - lambda * p).abs();
        if !d.is_finite() {
            return Err(Error::QuadratureFailure(format!("non-finite T p_{n} at x = {x}")));
        }
        absolute = absolute.max(d);
        residual = residual.max(d / p.abs().max(1.0));
    }
    Ok(Eigencheck {
        degree: n,
        eigenvalue: lambda,
        residual,
        absolute_residual: absolute,
        grid_size: grid.nodes.len(),
        exact: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AutocorrFit {
    pub degree: usize,
    /// Empirical autocorrelation of p_n(X_t) by lag.
    #[serde(serialize_with = "lag_map")]
    pub lags: BTreeMap<usize, f64>,
    #[serde(with = "real")]
    pub rate: f64,
    #[serde(with = "real")]
    pub ci_low: f64,
    #[serde(with = "real")]
    pub ci_high: f64,
    /// Lags whose autocorrelation cleared the noise floor and entered the fit.
    pub lags_used: Vec<usize>,
}

fn lag_map<S: serde::Serializer>(m: &BTreeMap<usize, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(&k.to_string(), &real::format17(*v))?;
    }
    map.end()
}

/// Noise floor, in units of 1/√T, below which a lag is left out of the fit.
const SIGNIFICANCE: f64 = 4.0;

/// Fits c_k ≈ r^k to the autocorrelations of p_n(X_t), anchored at c_0 = 1,
/// by weighted least squares on ln c_k with weights T c_k².
pub fn autocorrelation_vs_spectrum(
    trace: &ChainTrace,
    basis: &RecurrenceCoeffs,
    n: usize,
    max_lag: usize,
) -> Result<AutocorrFit> {
    let len = trace.states.len();
    let needed = 100 * max_lag;
    if max_lag == 0 || len < needed {
        return Err(Error::InsufficientLength {
            len,
            max_lag,
            needed,
        });
    }
    if n > basis.degree() {
        return Err(Error::DegreeOutOfRange {
            degree: n,
            max: basis.degree(),
        });
    }
    let mut buf = vec![0.0; basis.degree() + 1];
    let z: Vec<f64> = trace
        .states
        .iter()
        .map(|&x| {
            basis.eval_into(x, &mut buf);
            buf[n]
        })
        .collect();
    let mean = z.iter().sum::<f64>() / len as f64;
    let c: Vec<f64> = z.iter().map(|v| v - mean).collect();
    let var: f64 = c.iter().map(|v| v * v).sum();
    let mut lags = BTreeMap::new();
    for k in 1..=max_lag {
        let cov: f64 = c[..len - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum();
        lags.insert(k, if var > 0.0 { cov / var } else { 0.0 });
    }
    let t = len as f64;
    let floor = SIGNIFICANCE / t.sqrt();
    let mut used = Vec::new();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&k, &ck) in &lags {
        if ck <= floor {
            break;
        }
        let w = t * ck * ck;
        let kf = k as f64;
        sxy += w * kf * ck.ln();
        sxx += w * kf * kf;
        used.push(k);
    }
    let (rate, lo, hi) = if used.is_empty() {
        let c1 = lags[&1];
        (c1, c1 - 2.0 / t.sqrt(), c1 + 2.0 / t.sqrt())
    } else {
        let slope = sxy / sxx;
        let sd = sxx.powf(-0.5);
        (slope.exp(), (slope - 1.96 * sd).exp(), (slope + 1.96 * sd).exp())
    };
    Ok(AutocorrFit {
        degree: n,
        lags,
        rate,
        ci_low: lo,
        ci_high: hi,
        lags_used: used,
    })
}

/// Σ_{n=1}^{N} ρ_n^{4ℓ} p_n(x)². The ℓ-step kernel has density
/// Σ ρ_n^{2ℓ} p_n(x) p_n(·) with respect to μ, so this is its truncated χ²
/// distance to μ.
pub fn chisq_decay_bound(
    seq: &LancasterSequence,
    basis: &RecurrenceCoeffs,
    x: f64,
    ell: usize,
    n: usize,
) -> Result<f64> {
    if ell == 0 {
        return Err(Error::InvalidParameter {
            name: "ell",
            reason: "needs at least one step".into(),
        });
    }
    let n = n.min(seq.order()).min(basis.degree());
    let p = basis.eval_all(n, x)?;
    Ok((1..=n)
        .map(|k| seq.rho[k].abs().powi(4 * ell as i32) * p[k] * p[k])
        .sum())
}
