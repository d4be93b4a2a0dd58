use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::lancaster::{BivariateLancaster, JointLaw, LancasterSequence};
use crate::orthopoly::{extended_recurrence, GaussRule, MeasureSpec, MAX_DEGREE};
use crate::special::ln_beta;

/// Points with Δ below this margin are too close to the ellipse to compare.
pub const DELTA_MARGIN: f64 = 0.05;
/// Reference z used to calibrate C(a).
pub const CALIBRATION_Z: f64 = 0.3;
const CALIBRATION_NODES: usize = 40;

/// Δ(x, y, z) = 1 − x² − y² − z² + 2xyz.
pub fn jacobi_delta(x: f64, y: f64, z: f64) -> f64 {
    1.0 - x * x - y * y - z * z + 2.0 * x * y * z
}

fn check_a(a: f64) -> Result<()> {
    if !(a >= 0.5) || !a.is_finite() {
        return Err(Error::ParameterBelowHalf(a));
    }
    Ok(())
}

fn check_open(what: &'static str, v: f64) -> Result<()> {
    if v.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: v,
            domain: "(-1, 1)".into(),
        })
    }
}

/// C(a) = 1 / (c_a B(1/2, a − 1/2)) where c_a = 2^{1−2a} / B(a, a) is the
/// density constant of μ_a.
pub fn kernel_constant_closed_form(a: f64) -> Result<f64> {
    check_a(a)?;
    singular_at_half(a)?;
    let ln_ca = (1.0 - 2.0 * a) * std::f64::consts::LN_2 - ln_beta(a, a);
    Ok((-ln_ca - ln_beta(0.5, a - 0.5)).exp())
}

fn singular_at_half(a: f64) -> Result<()> {
    if a == 0.5 {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: "at a = 1/2 the kernel is carried by the ellipse and has no density".into(),
        });
    }
    Ok(())
}

/// The closed-form kernel K_a of the symmetric Jacobi family, with its
/// normalizing constant calibrated by quadrature.
#[derive(Clone, Debug)]
pub struct JacobiKernel {
    pub a: f64,
    pub constant: f64,
    margin: MeasureSpec,
    x_rule: GaussRule,
    u_rule: GaussRule,
    u_law: MeasureSpec,
}

impl JacobiKernel {
    pub fn new(a: f64) -> Result<Self> {
        check_a(a)?;
        singular_at_half(a)?;
        let margin = MeasureSpec::symmetric_jacobi(a)?;
        let u_law = MeasureSpec::symmetric_jacobi(a - 0.5)?;
        let x_rule = extended_recurrence(&margin, CALIBRATION_NODES)?.quadrature(CALIBRATION_NODES)?;
        let u_rule = extended_recurrence(&u_law, CALIBRATION_NODES)?.quadrature(CALIBRATION_NODES)?;
        let mut k = Self {
            a,
            constant: 1.0,
            margin,
            x_rule,
            u_rule,
            u_law,
        };
        let mass = k.sigma_z_expect(CALIBRATION_Z, |_, _| 1.0)?;
        k.constant = 1.0 / mass;
        Ok(k)
    }

    pub fn margin(&self) -> &MeasureSpec {
        &self.margin
    }

    /// K_a(x, y, z), zero outside the ellipse Δ > 0.
    pub fn eval(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        check_open("x", x)?;
        check_open("y", y)?;
        check_open("z", z)?;
        let d = jacobi_delta(x, y, z);
        if d <= 0.0 {
            return Ok(0.0);
        }
        let prod = (1.0 - x * x) * (1.0 - y * y) * (1.0 - z * z);
        Ok(self.constant * prod.powf(1.0 - self.a) * d.powf(self.a - 1.5))
    }

    fn margin_density(&self, x: f64) -> f64 {
        self.margin.density(x).unwrap_or(0.0)
    }

    /// Lebesgue density of σ_z at (x, y).
    pub fn sigma_z_density(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        Ok(self.eval(x, y, z)? * self.margin_density(x) * self.margin_density(y))
    }

    /// ∬ f(x, y) K_a(x, y, z) μ_a(dx) μ_a(dy) by a tensor Gauss rule: μ_a in x
    /// and, along the chord y = xz + s u with s² = (1−x²)(1−z²), the
    /// Beta(a−1/2, a−1/2) rule in u. The kernel is evaluated at the nodes and
    /// divided by the u-weight.
    pub fn sigma_z_expect<F: Fn(f64, f64) -> f64>(&self, z: f64, f: F) -> Result<f64> {
        check_open("z", z)?;
        let mut total = 0.0;
        for (&x, &wx) in self.x_rule.nodes.iter().zip(&self.x_rule.weights) {
            let s = ((1.0 - x * x) * (1.0 - z * z)).sqrt();
            let mut inner = 0.0;
            for (&u, &wu) in self.u_rule.nodes.iter().zip(&self.u_rule.weights) {
                let y = x * z + s * u;
                let weight_u = self.u_law.density(u).unwrap_or(0.0);
                let k = self.eval(x, y, z)? * self.margin_density(y) * s / weight_u;
                inner += wu * k * f(x, y);
            }
            total += wx * inner;
        }
        if !total.is_finite() {
            return Err(Error::QuadratureFailure(format!("kernel integral at z = {z}")));
        }
        Ok(total)
    }
}

/// K_a(x, y, z) for a single point. Builds and calibrates the kernel each
/// call; hold a [`JacobiKernel`] for repeated use.
pub fn jacobi_ka(a: f64, x: f64, y: f64, z: f64) -> Result<f64> {
    JacobiKernel::new(a)?.eval(x, y, z)
}

/// σ_z on μ_a ⊗ μ_a with ρ_n = p_n(z) / p_n(1).
pub fn extremal_sigma_z(a: f64, z: f64, n: usize) -> Result<BivariateLancaster> {
    check_a(a)?;
    check_open("z", z)?;
    let margin = MeasureSpec::symmetric_jacobi(a)?;
    let n = n.min(MAX_DEGREE);
    let basis = extended_recurrence(&margin, n)?;
    let pz = basis.eval_all(n, z)?;
    let p1 = basis.eval_all(n, 1.0)?;
    let rho = pz.iter().zip(&p1).map(|(a, b)| a / b).collect();
    let seq = LancasterSequence::new(rho, (margin.clone(), margin), format!("sigma_z(a={a}, z={z})"))?;
    BivariateLancaster::new(seq, n)
}

/// σ_z as a joint law: X ~ μ_a, then Y = Xz + s U along the chord with
/// U ~ Beta(a−1/2, a−1/2) on [−1, 1]. Exact ρ_n come from the tensor rule of
/// [`JacobiKernel::sigma_z_expect`], which integrates the closed-form density.
#[derive(Clone, Debug)]
pub struct SigmaZLaw {
    pub kernel: JacobiKernel,
    pub z: f64,
}

impl SigmaZLaw {
    pub fn new(a: f64, z: f64) -> Result<Self> {
        check_open("z", z)?;
        Ok(Self {
            kernel: JacobiKernel::new(a)?,
            z,
        })
    }
}

impl JointLaw for SigmaZLaw {
    fn name(&self) -> String {
        format!("sigma_z(a={}, z={})", self.kernel.a, self.z)
    }
    fn margins(&self) -> Result<(MeasureSpec, MeasureSpec)> {
        Ok((self.kernel.margin.clone(), self.kernel.margin.clone()))
    }
    fn exact_rho(&self, n: usize) -> Option<Result<f64>> {
        let run = || {
            if 2 * n + 2 > 2 * CALIBRATION_NODES {
                return Err(Error::DegreeOutOfRange {
                    degree: n,
                    max: CALIBRATION_NODES - 1,
                });
            }
            let basis = extended_recurrence(&self.kernel.margin, n)?;
            self.kernel.sigma_z_expect(self.z, |x, y| {
                basis.eval(n, x).unwrap_or(f64::NAN) * basis.eval(n, y).unwrap_or(f64::NAN)
            })
        };
        Some(run())
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Result<(f64, f64)> {
        let x = self.kernel.margin.sample(rng)?;
        let u = self.kernel.u_law.sample(rng)?;
        let s = ((1.0 - x * x) * (1.0 - self.z * self.z)).sqrt();
        Ok((x, x * self.z + s * u))
    }
}

/// Draws `pairs` pairs of points of U_z with equal Δ and returns the largest
/// relative difference of the σ_z Lebesgue densities. In the coordinates
/// u = (x+y)/√2, v = (x−y)/√2 the level set Δ = δ is the ellipse
/// (1−z) u² + (1+z) v² = 1 − z² − δ.
pub fn elliptical_contour_check(a: f64, z: f64, pairs: usize, seed: u64) -> Result<f64> {
    let kernel = JacobiKernel::new(a)?;
    check_open("z", z)?;
    let top = 1.0 - z * z;
    if top <= DELTA_MARGIN {
        return Err(Error::DegenerateDelta(top));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let point = |delta: f64, phi: f64| {
        let r = top - delta;
        let u = (r / (1.0 - z)).sqrt() * phi.cos();
        let v = (r / (1.0 + z)).sqrt() * phi.sin();
        ((u + v) / std::f64::consts::SQRT_2, (u - v) / std::f64::consts::SQRT_2)
    };
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let delta = rng.random_range(DELTA_MARGIN..=top);
        let (x1, y1) = point(delta, rng.random_range(0.0..std::f64::consts::TAU));
        let (x2, y2) = point(delta, rng.random_range(0.0..std::f64::consts::TAU));
        for d in [jacobi_delta(x1, y1, z), jacobi_delta(x2, y2, z)] {
            if d < DELTA_MARGIN * (1.0 - 1e-9) {
                return Err(Error::DegenerateDelta(d));
            }
        }
        let f1 = kernel.sigma_z_density(x1, y1, z)?;
        let f2 = kernel.sigma_z_density(x2, y2, z)?;
        worst = worst.max((f1 - f2).abs() / f1.max(f2));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lancaster::estimate_rho;

    #[test]
    fn delta_examples() {
        assert_eq!(jacobi_delta(0.0, 0.0, 0.0), 1.0);
        assert_eq!(jacobi_delta(1.0, 1.0, 1.0), 0.0);
        for x in [-0.7, 0.2, 0.9] {
            assert!(jacobi_delta(x, x, 1.0).abs() < 1e-15);
        }
        let (x, y, z) = (0.3, -0.5, 0.8);
        let d = jacobi_delta(x, y, z);
        for p in [(y, x, z), (z, y, x), (x, z, y)] {
            assert!((jacobi_delta(p.0, p.1, p.2) - d).abs() < 1e-15);
        }
    }

    #[test]
    fn calibrated_constant_matches_closed_form() {
        for a in [0.75, 1.0, 1.5, 2.0, 3.25] {
            let k = JacobiKernel::new(a).unwrap();
            let c = kernel_constant_closed_form(a).unwrap();
            assert!((k.constant / c - 1.0).abs() < 1e-12, "a={a}: {} vs {c}", k.constant);
            for z in [-0.6, 0.0, 0.9] {
                let m = k.sigma_z_expect(z, |_, _| 1.0).unwrap();
                assert!((m - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_values() {
        let k = JacobiKernel::new(1.0).unwrap();
        assert_eq!(k.eval(0.9, -0.9, 0.9).unwrap(), 0.0);
        let v = k.eval(0.1, 0.2, 0.3).unwrap();
        for p in [(0.2, 0.1, 0.3), (0.3, 0.2, 0.1)] {
            assert!((k.eval(p.0, p.1, p.2).unwrap() - v).abs() < 1e-14);
        }
        let k = JacobiKernel::new(1.5).unwrap();
        let prod = |x: f64, y: f64, z: f64| ((1.0 - x * x) * (1.0 - y * y) * (1.0 - z * z)).sqrt();
        let v1 = k.eval(0.1, 0.2, 0.3).unwrap() * prod(0.1, 0.2, 0.3);
        let v2 = k.eval(-0.5, 0.4, 0.3).unwrap() * prod(-0.5, 0.4, 0.3);
        assert!((v1 - v2).abs() < 1e-13);
        assert!(matches!(jacobi_ka(0.3, 0.0, 0.0, 0.0), Err(Error::ParameterBelowHalf(_))));
    }

    #[test]
    fn sigma_z_sequence() {
        let s = extremal_sigma_z(1.0, 0.3, 12).unwrap();
        assert!((s.sequence.rho[1] - 0.3).abs() < 1e-15);
        let s0 = extremal_sigma_z(2.0, 0.0, 12).unwrap();
        for n in (1..=12).step_by(2) {
            assert!(s0.sequence.rho[n].abs() < 1e-15);
        }
        let law = SigmaZLaw::new(1.0, 0.3).unwrap();
        for n in 0..=6 {
            let e = estimate_rho(&law, n, 0, 0, None).unwrap();
            assert!((e.value - s.sequence.rho[n]).abs() < 1e-6, "n={n}");
        }
        assert!(extremal_sigma_z(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn elliptical_contours() {
        assert!(elliptical_contour_check(1.0, 0.5, 1000, 3).unwrap() < 1e-10);
        assert!(elliptical_contour_check(1.5, -0.2, 200, 4).unwrap() < 1e-12);
        assert!(matches!(
            elliptical_contour_check(1.0, 0.99, 10, 1),
            Err(Error::DegenerateDelta(_))
        ));
    }
}
