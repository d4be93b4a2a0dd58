use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::ConjugateModel;
use crate::error::{Error, Result};
use crate::lancaster::exact_basis;
use crate::nef::beta_binomial_masses;
use crate::special::{binomial_exact, poch_exact, rat, rat_int, to_f64};

/// Exact x-chain kernel on a finite state space.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    pub model: ConjugateModel,
    pub states: Vec<u32>,
    pub entries: Vec<Vec<BigRational>>,
    pub stationary: Vec<BigRational>,
}

/// k(x, x') = C(n, x') (a+x)_{x'} (b+n−x)_{n−x'} / (a+b+n)_n, the Beta
/// integral of the binomial over the posterior Beta(a+x, b+n−x).
pub fn exact_transition_matrix(model: &ConjugateModel) -> Result<TransitionMatrix> {
    let (n, a, b) = match *model {
        ConjugateModel::BetaBinomial { n, a, b } => (n as usize, rat(a), rat(b)),
        _ => return Err(Error::InfiniteSupport),
    };
    let total = poch_exact(&(&a + &b + rat_int(n as i64)), n);
    let entries = (0..=n)
        .map(|x| {
            let ax = &a + rat_int(x as i64);
            let bx = &b + rat_int((n - x) as i64);
            (0..=n)
                .map(|xp| binomial_exact(n, xp) * poch_exact(&ax, xp) * poch_exact(&bx, n - xp) / &total)
                .collect()
        })
        .collect();
    Ok(TransitionMatrix {
        model: *model,
        states: (0..=n as u32).collect(),
        entries,
        stationary: beta_binomial_masses(n, &a, &b),
    })
}

#[derive(Serialize)]
struct MatrixJson<'a> {
    model: &'a ConjugateModel,
    states: &'a [u32],
    entries: Vec<Vec<String>>,
    stationary: Vec<String>,
    eigenvalues: Vec<String>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn apply(&self, f: &[BigRational]) -> Vec<BigRational> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(f).fold(BigRational::zero(), |acc, (k, v)| acc + k * v))
            .collect()
    }

    pub fn rows_sum_to_one(&self) -> bool {
        self.entries
            .iter()
            .all(|row| row.iter().fold(BigRational::zero(), |acc, v| acc + v).is_one())
    }

    /// μ K = μ.
    pub fn is_stationary(&self) -> bool {
        (0..self.size()).all(|j| {
            let v = (0..self.size()).fold(BigRational::zero(), |acc, i| {
                acc + &self.stationary[i] * &self.entries[i][j]
            });
            v == self.stationary[j]
        })
    }

    /// μ(x) k(x, x') = μ(x') k(x', x).
    pub fn is_reversible(&self) -> bool {
        (0..self.size()).all(|i| {
            (0..i).all(|j| {
                &self.stationary[i] * &self.entries[i][j] == &self.stationary[j] * &self.entries[j][i]
            })
        })
    }

    pub fn all_nonnegative(&self) -> bool {
        self.entries.iter().flatten().all(|v| !v.is_negative())
    }

    /// λ with K P_j = λ P_j for the monic orthogonal polynomial P_j of the
    /// stationary law, or None if P_j is not an exact eigenvector.
    pub fn monic_eigenvalue(&self, j: usize) -> Result<Option<BigRational>> {
        let v = self.monic_vector(j)?;
        let kv = self.apply(&v);
        let pivot = v
            .iter()
            .position(|x| !x.is_zero())
            .expect("monic polynomial is nonzero on its support");
        let lambda = &kv[pivot] / &v[pivot];
        Ok(kv.iter().zip(&v).all(|(a, b)| *a == &lambda * b).then_some(lambda))
    }

    /// Values of the monic P_j at the states.
    pub fn monic_vector(&self, j: usize) -> Result<Vec<BigRational>> {
        if j >= self.size() {
            return Err(Error::DegreeExceedsSupport {
                degree: j,
                atoms: self.size(),
            });
        }
        let (polys, _) = exact_basis(&self.model.margin_x()?, j)?;
        Ok(self
            .states
            .iter()
            .map(|&x| {
                let x = rat_int(x as i64);
                polys[j]
                    .iter()
                    .rev()
                    .fold(BigRational::zero(), |acc, c| acc * &x + c)
            })
            .collect())
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size(), self.size(), |i, j| to_f64(&self.entries[i][j]))
    }

    /// Spectrum of D^{1/2} K D^{−1/2}, symmetric by reversibility, in
    /// decreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let d: Vec<f64> = self.stationary.iter().map(|m| to_f64(m).sqrt()).collect();
        let k = self.to_f64();
        let s = DMatrix::from_fn(self.size(), self.size(), |i, j| {
            let v = d[i] * k[(i, j)] / d[j];
            let w = d[j] * k[(j, i)] / d[i];
            0.5 * (v + w)
        });
        let eig = nalgebra::SymmetricEigen::try_new(s, f64::EPSILON, 10_000)
            .ok_or(Error::EigenNonConvergence)?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        Ok(vals)
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        let show = |v: &BigRational| v.to_string();
        let json = MatrixJson {
            model: &self.model,
            states: &self.states,
            entries: self.entries.iter().map(|r| r.iter().map(show).collect()).collect(),
            stationary: self.stationary.iter().map(show).collect(),
            eigenvalues: self.eigenvalues()?.into_iter().map(crate::real::format17).collect(),
        };
        Ok(serde_json::to_value(json).expect("matrix serializes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bernoulli_uniform_matrix() {
        let m = ConjugateModel::beta_binomial(1, 1.0, 1.0).unwrap();
        let t = exact_transition_matrix(&m).unwrap();
        assert_eq!(t.entries, vec![vec![q(2, 3), q(1, 3)], vec![q(1, 3), q(2, 3)]]);
        assert_eq!(t.monic_eigenvalue(0).unwrap(), Some(q(1, 1)));
        assert_eq!(t.monic_eigenvalue(1).unwrap(), Some(q(1, 3)));
        let ev = t.eigenvalues().unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_invariants() {
        for (n, a, b) in [(5, 0.5, 2.0), (8, 3.0, 1.25), (12, 1.0, 1.0)] {
            let m = ConjugateModel::beta_binomial(n, a, b).unwrap();
            let t = exact_transition_matrix(&m).unwrap();
            assert!(t.rows_sum_to_one());
            assert!(t.is_stationary());
            assert!(t.is_reversible());
            assert!(t.all_nonnegative());
        }
    }

    #[test]
    fn infinite_support_rejected() {
        let m = ConjugateModel::gamma_poisson(1.0, 1.0).unwrap();
        assert!(matches!(exact_transition_matrix(&m), Err(Error::InfiniteSupport)));
    }

    #[test]
    fn json_has_rational_entries() {
        let m = ConjugateModel::beta_binomial(1, 1.0, 1.0).unwrap();
        let v = exact_transition_matrix(&m).unwrap().to_json().unwrap();
        assert_eq!(v["entries"][0][0], "2/3");
        assert_eq!(v["stationary"][1], "1/2");
    }
}
