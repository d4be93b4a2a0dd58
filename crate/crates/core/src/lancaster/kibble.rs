use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::orthopoly::MeasureSpec;
use crate::real;

/// Mixing law α(dr) on [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mixing {
    Point {
        #[serde(with = "real")]
        r: f64,
    },
    /// β_{η, q−η}.
    Beta {
        #[serde(with = "real")]
        eta: f64,
    },
    /// Atoms (r_i, w_i), weights summing to one.
    Histogram {
        #[serde(with = "real::pairs")]
        atoms: Vec<(f64, f64)>,
    },
}

fn kernel(q: f64, r: f64, s: f64, t: f64) -> f64 {
    (1.0 + s + t + (1.0 - r) * s * t).powf(-q)
}

/// ∫_0^1 (1 + s + t + (1 − r)st)^{−q} α(dr).
pub fn kibble_laplace(q: f64, mixing: &Mixing, s: f64, t: f64) -> Result<f64> {
    require_positive("q", q)?;
    for (name, v) in [("s", s), ("t", t)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain {
                what: name,
                value: v,
                domain: "[0, inf)".into(),
            });
        }
    }
    match mixing {
        Mixing::Point { r } => {
            if !(0.0..=1.0).contains(r) {
                return Err(Error::InvalidMixingSupport(format!("point mass at {r}")));
            }
            Ok(kernel(q, *r, s, t))
        }
        Mixing::Beta { eta } => {
            if !(0.0..=q).contains(eta) {
                return Err(Error::InvalidMixingSupport(format!(
                    "beta({eta}, q - eta) needs 0 <= eta <= q = {q}"
                )));
            }
            if *eta == 0.0 {
                return Ok(kernel(q, 0.0, s, t));
            }
            if *eta == q {
                return Ok(kernel(q, 1.0, s, t));
            }
            let law = MeasureSpec::beta(*eta, q - eta)?;
            Ok(law.expect(|r| kernel(q, r, s, t), 1e-14)?.value)
        }
        Mixing::Histogram { atoms } => {
            let mut total = 0.0;
            let mut acc = 0.0;
            for &(r, w) in atoms {
                if !(0.0..=1.0).contains(&r) || !(w >= 0.0) {
                    return Err(Error::InvalidMixingSupport(format!("atom ({r}, {w})")));
                }
                total += w;
                acc += w * kernel(q, r, s, t);
            }
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMixingSupport(format!("weights sum to {total}")));
            }
            Ok(acc)
        }
    }
}

/// E[e^{−sS − tT}] for the gamma pair S = X+Y, T = Y+Z with shapes
/// q−η, η, q−η and unit scale.
pub fn eagleson_gamma_laplace(q: f64, eta: f64, s: f64, t: f64) -> f64 {
    (1.0 + s).powf(-(q - eta)) * (1.0 + t).powf(-(q - eta)) * (1.0 + s + t).powf(-eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn endpoints() {
        let (q, s, t) = (2.0, 0.5, 1.5);
        let v = kibble_laplace(q, &Mixing::Point { r: 0.0 }, s, t).unwrap();
        assert_relative_eq!(v, (1.0f64 + s).powf(-q) * (1.0f64 + t).powf(-q), max_relative = 1e-15);
        let v = kibble_laplace(q, &Mixing::Point { r: 1.0 }, s, t).unwrap();
        assert_relative_eq!(v, (1.0 + s + t).powf(-q), max_relative = 1e-15);
    }

    #[test]
    fn beta_mixing_reproduces_the_gamma_sequence_transform() {
        for (q, eta) in [(2.0, 1.0), (3.0, 0.5), (1.5, 1.2)] {
            for (s, t) in [(0.5, 0.5), (1.0, 2.0), (3.0, 0.1)] {
                let v = kibble_laplace(q, &Mixing::Beta { eta }, s, t).unwrap();
                assert_relative_eq!(v, eagleson_gamma_laplace(q, eta, s, t), max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn histogram_and_errors() {
        let h = Mixing::Histogram {
            atoms: vec![(0.0, 0.5), (1.0, 0.5)],
        };
        let v = kibble_laplace(1.0, &h, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, 0.5 / 4.0 + 0.5 / 3.0, max_relative = 1e-15);
        assert!(matches!(
            kibble_laplace(1.0, &Mixing::Point { r: 1.2 }, 1.0, 1.0),
            Err(Error::InvalidMixingSupport(_))
        ));
        let bad = Mixing::Histogram {
            atoms: vec![(0.5, 0.7)],
        };
        assert!(kibble_laplace(1.0, &bad, 1.0, 1.0).is_err());
    }
}
