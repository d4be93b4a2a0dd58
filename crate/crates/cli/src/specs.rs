use lancaster_core::gibbs::ConjugateModel;
use lancaster_core::lancaster::{
    seq_beta_binomial, seq_buja, seq_eagleson, seq_geometric, seq_geometric_cross, seq_hyperbolic_beta,
    CrossKind, LancasterSequence, DEFAULT_TRUNCATION,
};
use lancaster_core::nef::NefSpec;
use lancaster_core::orthopoly::MeasureSpec;
use lancaster_core::triplekernel::extremal_sigma_z;

use crate::params::{CliError, CliResult, Params};

pub const MEASURES: &str =
    "gaussian, poisson, binomial, negative-binomial, gamma, hyperbolic, beta, jacobi, hahn, cartier-dunau";

/// A margin named by `key`, with its parameters read from the same params.
pub fn measure(p: &mut Params, key: &str) -> CliResult<MeasureSpec> {
    let name = p.str(key)?;
    let m = match name.as_str() {
        "gaussian" => MeasureSpec::gaussian(p.f64_or("mean", 0.0)?, p.f64_or("var", 1.0)?),
        "poisson" => MeasureSpec::poisson(p.f64("mean")?),
        "binomial" => MeasureSpec::binomial(p.u32("n")?, p.f64("p")?),
        "negative-binomial" => MeasureSpec::negative_binomial(p.f64("shape")?, p.f64("p")?),
        "gamma" => MeasureSpec::gamma(p.f64("shape")?, p.f64_or("scale", 1.0)?),
        "hyperbolic" => MeasureSpec::hyperbolic_tilted(p.f64("q")?, p.f64_or("theta", 0.0)?),
        "beta" => MeasureSpec::beta(p.f64("a")?, p.f64("b")?),
        "jacobi" => {
            let a = p.f64("a")?;
            let b = p.f64_or("b", a)?;
            MeasureSpec::beta_on(a, b, -1.0, 1.0)
        }
        "hahn" => MeasureSpec::beta_binomial(p.u32("n")?, p.f64("a")?, p.f64("b")?),
        "cartier-dunau" => MeasureSpec::cartier_dunau(p.f64("q")?),
        other => {
            return Err(CliError::validation(
                key,
                format!("unknown measure {other:?}; expected one of {MEASURES}"),
            ))
        }
    };
    Ok(m?)
}

fn nef(p: &mut Params) -> CliResult<NefSpec> {
    let name = p.str("nef")?;
    let n = match name.as_str() {
        "gaussian" => NefSpec::Gaussian,
        "poisson" => NefSpec::Poisson,
        "binomial" => NefSpec::binomial(p.u32("n")?)?,
        "negative-binomial" => NefSpec::negative_binomial(p.f64("shape")?)?,
        "gamma" => NefSpec::gamma(p.f64("shape")?)?,
        "hyperbolic" => NefSpec::hyperbolic(p.f64("q")?)?,
        other => return Err(CliError::validation("nef", format!("unknown family {other:?}"))),
    };
    Ok(n)
}

pub const FAMILIES: &str =
    "beta-binomial, buja, eagleson, hyperbolic-beta, kibble, geometric, geometric-cross, sigma-z, explicit";

/// The Lancaster sequence selected by `family`, truncated at `N`.
pub fn sequence(p: &mut Params) -> CliResult<LancasterSequence> {
    let family = p.str("family")?;
    let n = p.usize_or("N", DEFAULT_TRUNCATION)?;
    let seq = match family.as_str() {
        "beta-binomial" => seq_beta_binomial(p.u32("n")?, p.f64("a")?, p.f64("b")?)?,
        "buja" => seq_buja(p.f64("a")?, p.f64("b")?, n)?,
        "eagleson" => {
            let nef = nef(p)?;
            let (lambda, eta, xi) = (p.f64("lambda")?, p.f64("eta")?, p.f64("xi")?);
            let theta = p.f64_or("theta", nef.reference_theta())?;
            seq_eagleson(nef, lambda, eta, xi, theta, n)?
        }
        "hyperbolic-beta" => seq_hyperbolic_beta(p.f64("q")?, p.f64("eta")?, n)?.sequence,
        "kibble" => {
            let g = MeasureSpec::gamma(p.f64("q")?, 1.0)?;
            seq_geometric(g.clone(), g, p.f64("r")?, n)?
        }
        "geometric" => {
            let m = measure(p, "margin")?;
            seq_geometric(m.clone(), m, p.f64("t")?, n)?
        }
        "geometric-cross" => {
            let kind = match p.str("kind")?.as_str() {
                "poisson" => CrossKind::Poisson {
                    a: p.f64("a")?,
                    b: p.f64("b")?,
                },
                "negbin" => CrossKind::Negbin {
                    a: p.f64("a")?,
                    b: p.f64("b")?,
                    lambda: p.f64("lambda")?,
                },
                "negbin-gamma" => CrossKind::NegbinGamma {
                    a: p.f64("a")?,
                    lambda: p.f64("lambda")?,
                },
                other => {
                    return Err(CliError::validation(
                        "kind",
                        format!("unknown kind {other:?}; expected poisson, negbin or negbin-gamma"),
                    ))
                }
            };
            seq_geometric_cross(kind, p.f64("t")?, n)?
        }
        "sigma-z" => extremal_sigma_z(p.f64("a")?, p.f64("z")?, n)?.sequence,
        "explicit" => {
            let rho = p
                .opt_f64_list("rho")?
                .ok_or_else(|| CliError::validation("rho", "explicit family needs parameter \"rho\""))?;
            let m = measure(p, "margin")?;
            LancasterSequence::new(rho, (m.clone(), m), "explicit")?
        }
        other => {
            return Err(CliError::validation(
                "family",
                format!("unknown family {other:?}; expected one of {FAMILIES}"),
            ))
        }
    };
    Ok(seq)
}

pub const MODELS: &str = "beta-binomial, gamma-poisson, gauss-gauss, kibble-gamma";

pub fn model(p: &mut Params) -> CliResult<ConjugateModel> {
    let name = p.str("model")?;
    let m = match name.as_str() {
        "beta-binomial" => ConjugateModel::beta_binomial(p.u32("n")?, p.f64("a")?, p.f64("b")?),
        "gamma-poisson" => ConjugateModel::gamma_poisson(p.f64("x0")?, p.f64("lambda")?),
        "gauss-gauss" => ConjugateModel::gauss_gauss(p.f64("x0")?, p.f64("lambda")?),
        "kibble-gamma" => ConjugateModel::kibble_gamma(p.f64("q")?, p.f64("r")?),
        other => {
            return Err(CliError::validation(
                "model",
                format!("unknown model {other:?}; expected one of {MODELS}"),
            ))
        }
    };
    Ok(m?)
}
