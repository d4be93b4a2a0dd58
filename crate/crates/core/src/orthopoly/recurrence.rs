use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::measure::MeasureSpec;
use super::moments::exact_moments;
use crate::error::{Error, Result};
use crate::real;
use crate::special::{binomial_exact, rat, rat_int, to_f64};

/// Global cap on stored polynomial degree for verified recurrences.
pub const MAX_DEGREE: usize = 40;
/// Cap for closed-form recurrences used internally by long kernel series.
pub const MAX_EXTENDED_DEGREE: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecurrenceMode {
    Oracle,
    FastPath,
}

/// Monic recurrence P_{k+1} = (x - α_k) P_k - β_k P_{k-1}; the orthonormal
/// polynomials are p_n = P_n / (β_1 ⋯ β_n)^{1/2}.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceCoeffs {
    measure: MeasureSpec,
    mode: RecurrenceMode,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    sqrt_beta: Vec<f64>,
}

/// Coefficient of x^n in p_n together with c_n = (β_1 ⋯ β_n) / (n!)².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeadingCoeff {
    pub coefficient: f64,
    pub c_n: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Orthonormal recurrence for `measure` up to degree `n`.
pub fn recurrence(measure: &MeasureSpec, n: usize, mode: RecurrenceMode) -> Result<RecurrenceCoeffs> {
    if n > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange {
            degree: n,
            max: MAX_DEGREE,
        });
    }
    check_support(measure, n)?;
    let (alpha, beta) = match mode {
        RecurrenceMode::FastPath => fast_path(measure, n)?,
        RecurrenceMode::Oracle => {
            let (a, b) = oracle_exact(measure, n)?;
            (a.iter().map(to_f64).collect(), b.iter().map(to_f64).collect())
        }
    };
    Ok(RecurrenceCoeffs::from_parts(measure.clone(), mode, alpha, beta))
}

/// Closed-form recurrence beyond the verification cap, for long kernel series
/// and fine Gauss rules.
pub fn extended_recurrence(measure: &MeasureSpec, n: usize) -> Result<RecurrenceCoeffs> {
    if n > MAX_EXTENDED_DEGREE {
        return Err(Error::DegreeOutOfRange {
            degree: n,
            max: MAX_EXTENDED_DEGREE,
        });
    }
    check_support(measure, n)?;
    let (alpha, beta) = match fast_path(measure, n) {
        Ok(ab) => ab,
        Err(Error::UnsupportedFamily(_)) if n <= MAX_DEGREE => {
            let (a, b) = oracle_exact(measure, n)?;
            (a.iter().map(to_f64).collect(), b.iter().map(to_f64).collect())
        }
        Err(Error::UnsupportedFamily(_)) if matches!(measure, MeasureSpec::CartierDunau { .. }) => {
            let MeasureSpec::CartierDunau { q } = *measure else { unreachable!() };
            let mut beta = vec![q / ((q + 1.0) * (q + 1.0)); n];
            if n > 0 {
                beta[0] = 1.0 / (q + 1.0);
            }
            (vec![0.0; n + 1], beta)
        }
        Err(e) => return Err(e),
    };
    let mode = if measure.poly_family().has_fast_path() {
        RecurrenceMode::FastPath
    } else {
        RecurrenceMode::Oracle
    };
    Ok(RecurrenceCoeffs::from_parts(measure.clone(), mode, alpha, beta))
}

fn check_support(measure: &MeasureSpec, n: usize) -> Result<()> {
    match measure.atom_count() {
        Some(atoms) if n >= atoms => Err(Error::DegreeExceedsSupport { degree: n, atoms }),
        _ => Ok(()),
    }
}

/// Closed-form (α_0..α_n, β_1..β_n) in double precision.
pub fn fast_path(measure: &MeasureSpec, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut alpha = Vec::with_capacity(n + 1);
    let mut beta = Vec::with_capacity(n);
    match *measure {
        MeasureSpec::Gaussian { mean, var } => {
            for k in 0..=n {
                alpha.push(mean);
                if k >= 1 {
                    beta.push(k as f64 * var);
                }
            }
        }
        MeasureSpec::Poisson { mean } => {
            for k in 0..=n {
                let kf = k as f64;
                alpha.push(kf + mean);
                if k >= 1 {
                    beta.push(kf * mean);
                }
            }
        }
        MeasureSpec::Binomial { n: m, p } => {
            let m = m as f64;
            for k in 0..=n {
                let kf = k as f64;
                alpha.push(kf * (1.0 - p) + (m - kf) * p);
                if k >= 1 {
                    beta.push(kf * (m - kf + 1.0) * p * (1.0 - p));
                }
            }
        }
        MeasureSpec::NegativeBinomial { shape, prob } => {
            let d = 1.0 - prob;
            for k in 0..=n {
                let kf = k as f64;
                alpha.push((kf + (kf + shape) * prob) / d);
                if k >= 1 {
                    beta.push(kf * (kf + shape - 1.0) * prob / (d * d));
                }
            }
        }
        MeasureSpec::Gamma { shape, scale } => {
            for k in 0..=n {
                let kf = k as f64;
                alpha.push(scale * (2.0 * kf + shape));
                if k >= 1 {
                    beta.push(scale * scale * kf * (kf + shape - 1.0));
                }
            }
        }
        MeasureSpec::Hyperbolic { q, theta } => {
            let t = theta.tan();
            let c2 = theta.cos() * theta.cos();
            for k in 0..=n {
                let kf = k as f64;
                alpha.push((2.0 * kf + q) * t);
                if k >= 1 {
                    beta.push(kf * (kf + q - 1.0) / c2);
                }
            }
        }
        MeasureSpec::Beta { a, b, lower, upper } => {
            let (ja, jb) = (b - 1.0, a - 1.0);
            let s = ja + jb;
            let half = 0.5 * (upper - lower);
            for k in 0..=n {
                let kf = k as f64;
                let al = if k == 0 {
                    (jb - ja) / (s + 2.0)
                } else {
                    (jb * jb - ja * ja) / ((2.0 * kf + s) * (2.0 * kf + s + 2.0))
                };
                alpha.push(lower + half * (1.0 + al));
                if k == 1 {
                    let b1 = 4.0 * (ja + 1.0) * (jb + 1.0) / ((s + 2.0) * (s + 2.0) * (s + 3.0));
                    beta.push(half * half * b1);
                } else if k >= 2 {
                    let t = 2.0 * kf + s;
                    let bk = 4.0 * kf * (kf + ja) * (kf + jb) * (kf + s)
                        / (t * t * (t + 1.0) * (t - 1.0));
                    beta.push(half * half * bk);
                }
            }
        }
        MeasureSpec::BetaBinomial { n: m, a, b } => {
            let m = m as f64;
            let big_a = |k: f64| {
                if k == 0.0 {
                    a * m / (a + b)
                } else {
                    (k + a + b - 1.0) * (k + a) * (m - k)
                        / ((2.0 * k + a + b - 1.0) * (2.0 * k + a + b))
                }
            };
            let big_c = |k: f64| {
                k * (k + a + b + m - 1.0) * (k + b - 1.0)
                    / ((2.0 * k + a + b - 2.0) * (2.0 * k + a + b - 1.0))
            };
            for k in 0..=n {
                let kf = k as f64;
                let c = if k == 0 { 0.0 } else { big_c(kf) };
                alpha.push(big_a(kf) + c);
                if k >= 1 {
                    beta.push(big_a(kf - 1.0) * c);
                }
            }
        }
        MeasureSpec::CartierDunau { .. } | MeasureSpec::Discrete { .. } => {
            return Err(Error::UnsupportedFamily(format!(
                "no closed-form recurrence for {}",
                measure.label()
            )))
        }
    }
    Ok((alpha, beta))
}

/// Closed-form recurrence in rational arithmetic for the finite lattice
/// families.
pub fn fast_path_exact(
    measure: &MeasureSpec,
    n: usize,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    check_support(measure, n)?;
    let one = BigRational::one;
    let mut alpha = Vec::with_capacity(n + 1);
    let mut beta = Vec::with_capacity(n);
    match *measure {
        MeasureSpec::Binomial { n: m, p } => {
            let p = rat(p);
            let q = one() - &p;
            for k in 0..=n {
                let kf = rat_int(k as i64);
                let rest = rat_int(m as i64 - k as i64);
                alpha.push(&kf * &q + &rest * &p);
                if k >= 1 {
                    beta.push(&kf * (rest + one()) * &p * &q);
                }
            }
        }
        MeasureSpec::BetaBinomial { n: m, a, b } => {
            let (a, b) = (rat(a), rat(b));
            let m = rat_int(m as i64);
            let two = rat_int(2);
            let big_a = |k: &BigRational| {
                if k.is_zero() {
                    &a * &m / (&a + &b)
                } else {
                    (k + &a + &b - one()) * (k + &a) * (&m - k)
                        / ((&two * k + &a + &b - one()) * (&two * k + &a + &b))
                }
            };
            let big_c = |k: &BigRational| {
                k * (k + &a + &b + &m - one()) * (k + &b - one())
                    / ((&two * k + &a + &b - &two) * (&two * k + &a + &b - one()))
            };
            for k in 0..=n {
                let kf = rat_int(k as i64);
                let c = if k == 0 { BigRational::zero() } else { big_c(&kf) };
                alpha.push(big_a(&kf) + &c);
                if k >= 1 {
                    beta.push(big_a(&(kf - one())) * c);
                }
            }
        }
        _ => {
            return Err(Error::UnsupportedFamily(format!(
                "no exact recurrence for {}",
                measure.label()
            )))
        }
    }
    Ok((alpha, beta))
}

/// Chebyshev's algorithm on exact rational moments: successive
/// orthogonalization of the monomials without rounding.
pub fn oracle_exact(
    measure: &MeasureSpec,
    n: usize,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let order = 2 * n + 1;
    let m = exact_moments(measure, order).ok_or_else(|| {
        Error::UnsupportedFamily(format!("no exact moments for {}", measure.label()))
    })?;
    chebyshev(&m, n + 1, measure.atom_count())
}

/// From moments m_0..m_{2K-1}, returns α_0..α_{K-1} and β_1..β_{K-1}.
pub(crate) fn chebyshev(
    m: &[BigRational],
    k_max: usize,
    atoms: Option<usize>,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let len = 2 * k_max;
    assert!(m.len() >= len);
    if !m[0].is_positive() {
        return Err(Error::IndefiniteHankel { degree: 0 });
    }
    let mut alpha = vec![&m[1] / &m[0]];
    let mut beta_all = vec![m[0].clone()];
    let mut prev: Vec<BigRational> = vec![BigRational::zero(); len];
    let mut cur: Vec<BigRational> = m[..len].to_vec();
    for k in 1..k_max {
        let mut next = vec![BigRational::zero(); len];
        for l in k..(len - k) {
            next[l] = &cur[l + 1] - &alpha[k - 1] * &cur[l] - &beta_all[k - 1] * &prev[l];
        }
        if !next[k].is_positive() {
            if next[k].is_zero() {
                if let Some(a) = atoms {
                    return Err(Error::DegreeExceedsSupport { degree: k, atoms: a });
                }
            }
            return Err(Error::IndefiniteHankel { degree: k });
        }
        alpha.push(&next[k + 1] / &next[k] - &cur[k] / &cur[k - 1]);
        beta_all.push(&next[k] / &cur[k - 1]);
        prev = cur;
        cur = next;
    }
    beta_all.remove(0);
    Ok((alpha, beta_all))
}

/// Exact Gram matrix ∫ P_i P_j dμ of the monic polynomials of a finite
/// lattice family, together with the norms β_1 ⋯ β_i.
pub fn exact_monic_gram(
    measure: &MeasureSpec,
    n: usize,
) -> Result<(Vec<Vec<BigRational>>, Vec<BigRational>)> {
    let (alpha, beta) = fast_path_exact(measure, n)?;
    let masses = exact_masses(measure)?;
    let mut gram = vec![vec![BigRational::zero(); n + 1]; n + 1];
    for (x, w) in masses {
        let mut vals = Vec::with_capacity(n + 1);
        vals.push(BigRational::one());
        if n >= 1 {
            vals.push(&x - &alpha[0]);
        }
        for k in 1..n {
            let v = (&x - &alpha[k]) * &vals[k] - &beta[k - 1] * &vals[k - 1];
            vals.push(v);
        }
        for i in 0..=n {
            let wi = &w * &vals[i];
            for j in 0..=i {
                gram[i][j] += &wi * &vals[j];
            }
        }
    }
    for i in 0..=n {
        for j in (i + 1)..=n {
            gram[i][j] = gram[j][i].clone();
        }
    }
    let mut norms = vec![BigRational::one()];
    for b in &beta {
        let last = norms.last().unwrap() * b;
        norms.push(last);
    }
    Ok((gram, norms))
}

/// True when the orthonormal Gram matrix is exactly the identity.
pub fn exact_gram_is_identity(measure: &MeasureSpec, n: usize) -> Result<bool> {
    let (gram, norms) = exact_monic_gram(measure, n)?;
    Ok((0..=n).all(|i| {
        (0..=n).all(|j| {
            if i == j {
                gram[i][j] == norms[i]
            } else {
                gram[i][j].is_zero()
            }
        })
    }))
}

/// Atom locations and masses in rational arithmetic.
pub fn exact_masses(measure: &MeasureSpec) -> Result<Vec<(BigRational, BigRational)>> {
    match *measure {
        MeasureSpec::Binomial { n, p } => {
            let p = rat(p);
            let q = BigRational::one() - &p;
            Ok((0..=n as usize)
                .map(|k| {
                    let m = binomial_exact(n as usize, k)
                        * pow(&p, k)
                        * pow(&q, n as usize - k);
                    (rat_int(k as i64), m)
                })
                .collect())
        }
        MeasureSpec::BetaBinomial { n, a, b } => Ok(crate::nef::beta_binomial_masses(
            n as usize,
            &rat(a),
            &rat(b),
        )
        .into_iter()
        .enumerate()
        .map(|(k, m)| (rat_int(k as i64), m))
        .collect()),
        MeasureSpec::Discrete { ref atoms, .. } => {
            Ok(atoms.iter().map(|&(x, m)| (rat(x), rat(m))).collect())
        }
        _ => Err(Error::InfiniteSupport),
    }
}

fn pow(x: &BigRational, k: usize) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * x)
}

impl RecurrenceCoeffs {
    pub(crate) fn from_parts(
        measure: MeasureSpec,
        mode: RecurrenceMode,
        alpha: Vec<f64>,
        beta: Vec<f64>,
    ) -> Self {
        let sqrt_beta = beta.iter().map(|b| b.sqrt()).collect();
        Self {
            measure,
            mode,
            alpha,
            beta,
            sqrt_beta,
        }
    }

    pub fn measure(&self) -> &MeasureSpec {
        &self.measure
    }

    pub fn mode(&self) -> RecurrenceMode {
        self.mode
    }

    /// Highest stored degree N.
    pub fn degree(&self) -> usize {
        self.beta.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    /// β_1..β_N.
    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha(&self, k: usize) -> f64 {
        self.alpha[k]
    }

    /// β_k for 1 ≤ k ≤ N.
    pub fn beta(&self, k: usize) -> f64 {
        self.beta[k - 1]
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.degree() {
            Err(Error::DegreeOutOfRange {
                degree: n,
                max: self.degree(),
            })
        } else {
            Ok(())
        }
    }

    /// p_n(x) by forward recurrence.
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        self.check_degree(n)?;
        let mut prev = 0.0;
        let mut cur = 1.0;
        for k in 0..n {
            let next = ((x - self.alpha[k]) * cur - self.sqrt_beta_at(k) * prev)
                / self.sqrt_beta[k];
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    fn sqrt_beta_at(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.sqrt_beta[k - 1]
        }
    }

    /// p_0(x)..p_n(x) written into `out` (length n + 1).
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        let n = out.len() - 1;
        debug_assert!(n <= self.degree());
        out[0] = 1.0;
        if n == 0 {
            return;
        }
        out[1] = (x - self.alpha[0]) / self.sqrt_beta[0];
        for k in 1..n {
            out[k + 1] = ((x - self.alpha[k]) * out[k] - self.sqrt_beta[k - 1] * out[k - 1])
                / self.sqrt_beta[k];
        }
    }

    /// p_0(x)..p_n(x).
    pub fn eval_all(&self, n: usize, x: f64) -> Result<Vec<f64>> {
        self.check_degree(n)?;
        let mut out = vec![0.0; n + 1];
        self.eval_into(x, &mut out);
        Ok(out)
    }

    pub fn leading_coeff(&self, n: usize) -> Result<LeadingCoeff> {
        self.check_degree(n)?;
        let mut ln_h = 0.0;
        let mut ln_fact = 0.0;
        for k in 1..=n {
            ln_h += self.beta[k - 1].ln();
            ln_fact += (k as f64).ln();
        }
        Ok(LeadingCoeff {
            coefficient: (-0.5 * ln_h).exp(),
            c_n: (ln_h - 2.0 * ln_fact).exp(),
        })
    }

    /// Gauss rule with `n_nodes` ≤ N + 1 nodes from the Jacobi matrix.
    pub fn quadrature(&self, n_nodes: usize) -> Result<GaussRule> {
        if n_nodes == 0 || n_nodes > self.degree() + 1 {
            return Err(Error::DegreeOutOfRange {
                degree: n_nodes,
                max: self.degree() + 1,
            });
        }
        let mut j = DMatrix::<f64>::zeros(n_nodes, n_nodes);
        for k in 0..n_nodes {
            j[(k, k)] = self.alpha[k];
            if k + 1 < n_nodes {
                j[(k, k + 1)] = self.sqrt_beta[k];
                j[(k + 1, k)] = self.sqrt_beta[k];
            }
        }
        let eig = SymmetricEigen::try_new(j, 1e-15, 10_000).ok_or(Error::EigenNonConvergence)?;
        let mut pairs: Vec<(f64, f64)> = (0..n_nodes)
            .map(|i| {
                let v = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], v * v)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(GaussRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    /// Copy restricted to degrees ≤ n.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        self.check_degree(n)?;
        Ok(Self::from_parts(
            self.measure.clone(),
            self.mode,
            self.alpha[..=n].to_vec(),
            self.beta[..n].to_vec(),
        ))
    }

    pub fn to_json(&self) -> Value {
        #[derive(Serialize)]
        struct Coeffs<'a> {
            mode: RecurrenceMode,
            #[serde(with = "real::vec")]
            alpha: &'a [f64],
            #[serde(with = "real::vec")]
            beta: &'a [f64],
        }
        let mut v = serde_json::to_value(&self.measure).expect("measure serializes");
        let extra = serde_json::to_value(Coeffs {
            mode: self.mode,
            alpha: &self.alpha,
            beta: &self.beta,
        })
        .expect("coefficients serialize");
        if let (Value::Object(map), Value::Object(more)) = (&mut v, extra) {
            map.extend(more);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Coeffs {
            mode: RecurrenceMode,
            #[serde(with = "real::vec")]
            alpha: Vec<f64>,
            #[serde(with = "real::vec")]
            beta: Vec<f64>,
        }
        let bad = |e: serde_json::Error| Error::InvalidParameter {
            name: "recurrence",
            reason: e.to_string(),
        };
        let coeffs: Coeffs = serde_json::from_value(v.clone()).map_err(bad)?;
        let mut rest = v.clone();
        if let Value::Object(map) = &mut rest {
            for key in ["mode", "alpha", "beta"] {
                map.remove(key);
            }
        }
        let measure: MeasureSpec = serde_json::from_value(rest).map_err(bad)?;
        if coeffs.alpha.len() != coeffs.beta.len() + 1 || coeffs.beta.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "recurrence",
                reason: "need N + 1 alphas and N positive betas".into(),
            });
        }
        Ok(Self::from_parts(measure, coeffs.mode, coeffs.alpha, coeffs.beta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::MeasureSpec as M;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn bernoulli() -> M {
        M::discrete("bernoulli", vec![(0.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn gaussian_oracle_two_steps() {
        let r = recurrence(&M::standard_gaussian(), 2, RecurrenceMode::Oracle).unwrap();
        assert_eq!(r.alphas(), &[0.0, 0.0, 0.0]);
        assert_eq!(&r.betas()[..2], &[1.0, 2.0]);
        assert_eq!(r.eval(1, 0.7).unwrap(), 0.7);
        assert_relative_eq!(r.eval(2, 3.0).unwrap(), 8.0 / 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(r.eval(2, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn bernoulli_first_polynomial() {
        let r = recurrence(&bernoulli(), 1, RecurrenceMode::Oracle).unwrap();
        assert_eq!(r.eval(1, 1.0).unwrap(), 1.0);
        assert_eq!(r.eval(1, 0.0).unwrap(), -1.0);
        assert_eq!(r.eval(0, 0.3).unwrap(), 1.0);
        assert!(matches!(
            recurrence(&bernoulli(), 2, RecurrenceMode::Oracle),
            Err(Error::DegreeExceedsSupport { .. })
        ));
    }

    #[test]
    fn degree_out_of_range() {
        let r = recurrence(&M::standard_gaussian(), 3, RecurrenceMode::FastPath).unwrap();
        assert!(matches!(r.eval(4, 0.0), Err(Error::DegreeOutOfRange { .. })));
        assert!(recurrence(&M::standard_gaussian(), 41, RecurrenceMode::FastPath).is_err());
    }

    #[test]
    fn hyperbolic_c_convention() {
        let r = recurrence(&M::hyperbolic(2.0).unwrap(), 5, RecurrenceMode::FastPath).unwrap();
        assert_relative_eq!(r.leading_coeff(1).unwrap().c_n, 2.0, max_relative = 1e-14);
        assert_relative_eq!(r.leading_coeff(3).unwrap().c_n, 4.0, max_relative = 1e-14);
        let l0 = r.leading_coeff(0).unwrap();
        assert_eq!((l0.coefficient, l0.c_n), (1.0, 1.0));
    }

    #[test]
    fn gauss_rules() {
        let r = recurrence(&M::standard_gaussian(), 3, RecurrenceMode::FastPath).unwrap();
        let g = r.quadrature(2).unwrap();
        assert_relative_eq!(g.nodes[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(g.nodes[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.weights[0], 0.5, epsilon = 1e-15);
        let m = M::gamma(2.5, 1.0).unwrap();
        let one = recurrence(&m, 2, RecurrenceMode::FastPath).unwrap().quadrature(1).unwrap();
        assert_eq!((one.nodes[0], one.weights[0]), (2.5, 1.0));
        let j = recurrence(&M::symmetric_jacobi(1.0).unwrap(), 3, RecurrenceMode::FastPath).unwrap();
        let g = j.quadrature(3).unwrap();
        assert!((g.integrate(|x| x.powi(4)) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let r = recurrence(&M::negative_binomial(2.0, 0.3).unwrap(), 4, RecurrenceMode::FastPath)
            .unwrap();
        let v = r.to_json();
        assert_eq!(v["family"], "negative-binomial");
        assert!(v["alpha"].is_array() && v["beta"].is_array());
        assert_eq!(RecurrenceCoeffs::from_json(&v).unwrap(), r);
    }

    #[test]
    fn krawtchouk_and_hahn_gram_exact() {
        assert!(exact_gram_is_identity(&M::binomial(12, 0.375).unwrap(), 12).unwrap());
        assert!(exact_gram_is_identity(&M::beta_binomial(9, 0.5, 2.25).unwrap(), 9).unwrap());
    }

    #[test]
    fn cartier_dunau_oracle_closed_form() {
        for q in [1.0, 2.0, 3.5] {
            let r = recurrence(&M::cartier_dunau(q).unwrap(), 8, RecurrenceMode::Oracle).unwrap();
            assert_relative_eq!(r.beta(1), 1.0 / (q + 1.0), max_relative = 1e-15);
            for k in 2..=8 {
                assert_relative_eq!(r.beta(k), q / ((q + 1.0) * (q + 1.0)), max_relative = 1e-14);
                assert_eq!(r.alpha(k), 0.0);
            }
        }
    }

    #[test]
    fn cartier_dunau_extends_past_cap() {
        let m = M::cartier_dunau(2.0).unwrap();
        let short = recurrence(&m, 20, RecurrenceMode::Oracle).unwrap();
        let long = extended_recurrence(&m, 500).unwrap();
        for k in 1..=20 {
            assert_relative_eq!(long.beta(k), short.beta(k), max_relative = 1e-14);
        }
        assert_eq!(long.beta(500), 2.0 / 9.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn leading_coefficient_matches_product(shape in 0.2f64..5.0, n in 0usize..20) {
            let r = recurrence(&M::gamma(shape, 1.0).unwrap(), 20, RecurrenceMode::FastPath).unwrap();
            let prod: f64 = (1..=n).map(|k| r.beta(k).powf(-0.5)).product();
            prop_assert!((r.leading_coeff(n).unwrap().coefficient / prod - 1.0).abs() < 1e-10);
        }

        #[test]
        fn gauss_weights_positive(a in 0.55f64..4.0, b in 0.55f64..4.0, n in 1usize..20) {
            let r = recurrence(&M::beta(a, b).unwrap(), 20, RecurrenceMode::FastPath).unwrap();
            let g = r.quadrature(n).unwrap();
            prop_assert!(g.weights.iter().all(|&w| w > 0.0));
            prop_assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }
}
