use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{basis_for, BivariateLancaster, LancasterSequence};
use crate::error::{Error, Result};
use crate::orthopoly::{extended_recurrence, MeasureSpec, SupportKind, MAX_DEGREE};
use crate::real;

/// C: both margins carried by ℝ. D: both carried by half-lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    C,
    D,
}

impl Case {
    fn letter(self) -> char {
        match self {
            Case::C => 'C',
            Case::D => 'D',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Refuted,
    Consistent,
    GammaUnstable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HankelCheck {
    pub name: String,
    pub size: usize,
    #[serde(with = "real")]
    pub min_eigenvalue: f64,
    #[serde(with = "real")]
    pub norm1: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub verdict: Verdict,
    pub case: Case,
    pub degree: usize,
    #[serde(with = "real")]
    pub gamma_estimate: f64,
    #[serde(with = "real::vec")]
    pub gamma_trend: Vec<f64>,
    /// Rescaled candidate moments m_0..m_N.
    #[serde(with = "real::vec")]
    pub moments: Vec<f64>,
    #[serde(with = "real::vec")]
    pub hankel_min_eigenvalues: Vec<f64>,
    pub checks: Vec<HankelCheck>,
    #[serde(with = "real::opt_vec")]
    pub witness: Option<Vec<f64>>,
    /// Consistency is necessary, never sufficient.
    pub one_sided: bool,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Relative Hankel tolerance.
pub const HANKEL_TOL: f64 = 1e-8;
const TREND_WINDOW: usize = 5;
const TREND_SPREAD: f64 = 0.1;
const EXTRAPOLATION_DEGREE: usize = 16000;
const WITNESS_NODES: usize = 8;
const WITNESS_TOL: f64 = 1e-8;

fn check_case(m: &MeasureSpec, case: Case) -> Result<()> {
    let kind = m.support().kind();
    let ok = match case {
        Case::C => kind == SupportKind::Line,
        Case::D => kind == SupportKind::LowerHalfLine,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::WrongCase {
            case: case.letter(),
            reason: format!("{} has support kind {kind:?}", m.label()),
        })
    }
}

fn hankel(seq: &[f64]) -> Option<DMatrix<f64>> {
    if seq.is_empty() {
        return None;
    }
    let k = (seq.len() - 1) / 2 + 1;
    Some(DMatrix::from_fn(k, k, |i, j| seq[i + j]))
}

fn run_check(name: &str, seq: &[f64]) -> Option<HankelCheck> {
    let h = hankel(seq)?;
    let norm1 = (0..h.ncols())
        .map(|j| h.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let min_eigenvalue = h.clone().symmetric_eigenvalues().min();
    Some(HankelCheck {
        name: name.into(),
        size: h.nrows(),
        min_eigenvalue,
        norm1,
        passed: min_eigenvalue >= -HANKEL_TOL * norm1,
    })
}

/// lim (a_n/b_n)^{1/n} = lim √(β'_k/β_k) when the ratio converges; the
/// ratio is read far out on the closed-form recurrence and Richardson
/// extrapolated in 1/k.
fn extrapolated_gamma(mu: &MeasureSpec, nu: &MeasureSpec) -> Option<f64> {
    let ks = [EXTRAPOLATION_DEGREE / 4, EXTRAPOLATION_DEGREE / 2, EXTRAPOLATION_DEGREE];
    let ra = extended_recurrence(mu, EXTRAPOLATION_DEGREE).ok()?;
    let rb = extended_recurrence(nu, EXTRAPOLATION_DEGREE).ok()?;
    let r: Vec<f64> = ks.iter().map(|&k| rb.beta(k) / ra.beta(k)).collect();
    let a = Matrix3::from_fn(|i, j| (ks[i] as f64).powi(-(j as i32)));
    let sol = a.lu().solve(&Vector3::new(r[0], r[1], r[2]))?;
    (sol[0] > 0.0 && sol[0].is_finite()).then(|| sol[0].sqrt())
}

fn is_geometric(rho: &[f64]) -> Option<f64> {
    let t = *rho.get(1)?;
    rho.iter()
        .enumerate()
        .all(|(k, r)| (r - t.powi(k as i32)).abs() <= 1e-12 * r.abs().max(1e-300))
        .then_some(t)
}

/// Truncated Hausdorff/Hamburger test of the moment representation of a
/// candidate sequence after rescaling by leading coefficients.
pub fn verify_moment_representation(
    rho: &LancasterSequence,
    case: Case,
    n: usize,
) -> Result<VerifyReport> {
    let (mu, nu) = &rho.margins;
    check_case(mu, case)?;
    check_case(nu, case)?;
    let n = n.min(rho.order()).min(MAX_DEGREE);
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "N",
            reason: "need at least two coefficients beyond rho_0".into(),
        });
    }
    let pa = basis_for(mu, n)?;
    let pb = basis_for(nu, n)?;
    // ln(a_k/b_k) = ½ Σ (ln β'_j − ln β_j)
    let mut ln_ratio = vec![0.0; n + 1];
    for k in 1..=n {
        ln_ratio[k] = ln_ratio[k - 1] + 0.5 * (pb.beta(k).ln() - pa.beta(k).ln());
    }
    let step = match case {
        Case::C => 2,
        Case::D => 1,
    };
    let gamma_trend: Vec<f64> = (1..=n / step)
        .map(|j| (ln_ratio[j * step] / (j * step) as f64).exp())
        .collect();
    let direct = *gamma_trend.last().expect("n >= 2");
    let gamma = extrapolated_gamma(mu, nu).unwrap_or(direct);
    let mut notes = Vec::new();

    let tail = &gamma_trend[gamma_trend.len().saturating_sub(TREND_WINDOW)..];
    let monotone = tail.windows(2).all(|w| w[1] >= w[0]) || tail.windows(2).all(|w| w[1] <= w[0]);
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &g| (l.min(g), h.max(g)));
    let unstable = !gamma.is_finite()
        || gamma <= 0.0
        || (!monotone && hi - lo > TREND_SPREAD * direct.abs());

    let moments: Vec<f64> = (0..=n)
        .map(|k| (ln_ratio[k] - k as f64 * gamma.ln()).exp() * rho.rho[k])
        .collect();

    let shifted = |off: usize| -> Vec<f64> { moments[off..].to_vec() };
    let diff = |o1: usize, o2: usize| -> Vec<f64> {
        let len = moments.len() - o2;
        (0..len).map(|k| moments[k + o1] - moments[k + o2]).collect()
    };
    let mut checks = Vec::new();
    let mut push = |name: &str, seq: Vec<f64>| {
        if let Some(c) = run_check(name, &seq) {
            checks.push(c);
        }
    };
    push("H[m]", moments.clone());
    match case {
        Case::D => {
            push("H[m_{k+1}]", shifted(1));
            push("H[m_k - m_{k+1}]", diff(0, 1));
            push("H[m_{k+1} - m_{k+2}]", diff(1, 2));
        }
        Case::C => {
            push("H[m_k - m_{k+2}]", diff(0, 2));
        }
    }
    let hankel_min_eigenvalues = checks.iter().map(|c| c.min_eigenvalue).collect();
    let hankel_failed = checks.iter().any(|c| !c.passed);

    let witness = if hankel_failed || unstable {
        None
    } else {
        find_witness(rho, n)?
    };

    let verdict = if hankel_failed {
        for c in checks.iter().filter(|c| !c.passed) {
            notes.push(format!(
                "{} has eigenvalue {:e} below -{HANKEL_TOL:e} * {:e}",
                c.name, c.min_eigenvalue, c.norm1
            ));
        }
        Verdict::Refuted
    } else if let Some(w) = &witness {
        notes.push(format!(
            "truncated density is stabilized at {:e} < 0 at ({}, {})",
            w[2], w[0], w[1]
        ));
        Verdict::Refuted
    } else if unstable {
        notes.push("gamma proxy is not settled over the last indices; no verdict".into());
        Verdict::GammaUnstable
    } else {
        Verdict::Consistent
    };
    if verdict != Verdict::Refuted {
        notes.push(
            "one-sided: consistency with the moment conditions does not prove membership".into(),
        );
    }
    let hyperbolic = |m: &MeasureSpec| matches!(m, MeasureSpec::Hyperbolic { .. });
    if hyperbolic(mu) && hyperbolic(nu) {
        if let Some(t) = is_geometric(&rho.rho) {
            if t != 0.0 && t != 1.0 {
                notes.push(format!(
                    "known non-Lancaster: (t^n) with t = {t} is never a Lancaster sequence for hyperbolic margins"
                ));
            }
        }
    }
    Ok(VerifyReport {
        verdict,
        case,
        degree: n,
        gamma_estimate: gamma,
        gamma_trend,
        moments,
        hankel_min_eigenvalues,
        checks,
        witness,
        one_sided: verdict != Verdict::Refuted,
        notes,
    })
}

/// A Gauss-node grid point where the truncated density is stabilized and negative.
fn find_witness(rho: &LancasterSequence, n: usize) -> Result<Option<Vec<f64>>> {
    let biv = BivariateLancaster::new(rho.clone(), n)?;
    let n = biv.truncation;
    let k = WITNESS_NODES.min(n + 1);
    let xs = biv.bases.0.quadrature(k)?.nodes;
    let ys = biv.bases.1.quadrature(k)?.nodes;
    for &x in &xs {
        for &y in &ys {
            let s = biv.density_truncated(x, y, n)?;
            if s.stabilized && s.last() < -WITNESS_TOL {
                return Ok(Some(vec![x, y, s.last()]));
            }
        }
    }
    Ok(None)
}
