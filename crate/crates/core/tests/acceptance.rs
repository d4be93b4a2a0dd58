//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use lancaster_core::gibbs::{
    autocorrelation_vs_spectrum, exact_transition_matrix, run_x_chain, spectral_eigencheck, ConjugateModel,
};
use lancaster_core::lancaster::{
    estimate_rho, kibble_laplace, seq_beta_binomial, seq_eagleson, seq_geometric, seq_geometric_cross,
    seq_hyperbolic_beta, seq_product, verify_moment_representation, BetaBinomialLaw, Case, CrossKind, JointLaw,
    LancasterSequence, Mixing, Verdict,
};
use lancaster_core::nef::{beta_binomial_masses, mixture_density_by_quadrature, mixture_marginal, DyPrior, NefSpec};
use lancaster_core::orthopoly::{
    exact_gram_is_identity, extended_recurrence, recurrence, MeasureSpec, PolyFamily, RecurrenceMode,
};
use lancaster_core::quad::{integrate, Interval};
use lancaster_core::triplekernel::{
    elliptical_contour_check, filtered_k, jacobi_delta, positivity_scan, JacobiKernel, KernelSpec, Summation,
    DELTA_MARGIN,
};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn mode_for(m: &MeasureSpec) -> RecurrenceMode {
    if m.poly_family().has_fast_path() {
        RecurrenceMode::FastPath
    } else {
        RecurrenceMode::Oracle
    }
}

fn representatives() -> Vec<MeasureSpec> {
    vec![
        MeasureSpec::gaussian(0.5, 2.0).unwrap(),
        MeasureSpec::poisson(3.0).unwrap(),
        MeasureSpec::binomial(30, 0.3).unwrap(),
        MeasureSpec::negative_binomial(2.5, 0.4).unwrap(),
        MeasureSpec::gamma(1.5, 1.0).unwrap(),
        MeasureSpec::hyperbolic_tilted(2.0, 0.25).unwrap(),
        MeasureSpec::beta(0.75, 0.625).unwrap(),
        MeasureSpec::beta_binomial(25, 0.5, 2.25).unwrap(),
        MeasureSpec::cartier_dunau(2.0).unwrap(),
    ]
}

fn orthonormality() -> Outcome {
    let reps = representatives();
    let covered: Vec<PolyFamily> = reps.iter().map(|m| m.poly_family()).collect();
    for f in PolyFamily::ALL_NAMED {
        ensure!(covered.contains(&f), "{f:?} not covered");
    }
    let n = 20;
    let mut worst: f64 = 0.0;
    for m in &reps {
        let rec = recurrence(m, n, mode_for(m)).map_err(|e| e.to_string())?;
        let mut dev: f64 = 0.0;
        for i in 0..=n {
            for j in 0..=i {
                let g = m
                    .expect(
                        |x| {
                            let p = rec.eval_all(n, x).unwrap();
                            p[i] * p[j]
                        },
                        1e-13,
                    )
                    .map_err(|e| e.to_string())?
                    .value;
                dev = dev.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        ensure!(dev < 1e-8, "{}: max|G-I| = {dev:e}", m.label());
        worst = worst.max(dev);
    }
    for m in [
        MeasureSpec::binomial(30, 0.3).unwrap(),
        MeasureSpec::beta_binomial(25, 0.5, 2.25).unwrap(),
    ] {
        ensure!(exact_gram_is_identity(&m, n).map_err(|e| e.to_string())?, "{}: exact Gram is not I", m.label());
    }
    Ok(format!("9 families, max|G-I| = {worst:.1e}; Krawtchouk and Hahn exact"))
}

fn oracle_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for m in representatives().into_iter().filter(|m| m.poly_family().has_fast_path()) {
        let fast = recurrence(&m, 15, RecurrenceMode::FastPath).map_err(|e| e.to_string())?;
        let oracle = recurrence(&m, 15, RecurrenceMode::Oracle).map_err(|e| e.to_string())?;
        for k in 0..=15 {
            let da = (fast.alpha(k) - oracle.alpha(k)).abs() / fast.alpha(k).abs().max(1.0);
            ensure!(da < 1e-9, "{} alpha_{k}: {da:e}", m.label());
            worst = worst.max(da);
            if k >= 1 {
                let db = (fast.beta(k) - oracle.beta(k)).abs() / fast.beta(k).max(1.0);
                ensure!(db < 1e-9, "{} beta_{k}: {db:e}", m.label());
                worst = worst.max(db);
            }
        }
        count += 1;
    }
    Ok(format!("{count} fast-path families, max deviation {worst:.1e}"))
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn beta_binomial_exact_case() -> Outcome {
    let model = ConjugateModel::beta_binomial(1, 1.0, 1.0).unwrap();
    let t = exact_transition_matrix(&model).map_err(|e| e.to_string())?;
    let want = vec![vec![ratio(2, 3), ratio(1, 3)], vec![ratio(1, 3), ratio(2, 3)]];
    ensure!(t.entries == want, "transition matrix {:?}", t.entries);
    let l0 = t.monic_eigenvalue(0).map_err(|e| e.to_string())?;
    let l1 = t.monic_eigenvalue(1).map_err(|e| e.to_string())?;
    ensure!(l0 == Some(BigRational::one()) && l1 == Some(ratio(1, 3)), "eigenvalues {l0:?} {l1:?}");
    let ev = t.eigenvalues().map_err(|e| e.to_string())?;
    ensure!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] - 1.0 / 3.0).abs() < 1e-15, "float spectrum {ev:?}");

    // E[(2X−1)(θ−½)]·√12 with X | θ ~ Bernoulli(θ), θ ~ U(0,1): 2 Var(θ) √12.
    let oracle = 2.0 / 12.0 * 12f64.sqrt();
    let canonical = 3f64.sqrt().recip();
    ensure!((oracle - canonical).abs() < 1e-15, "oracle {oracle}");
    let est = estimate_rho(&BetaBinomialLaw::new(1, 1.0, 1.0).unwrap(), 1, 0, 0, None).map_err(|e| e.to_string())?;
    ensure!(est.exact && (est.value - oracle).abs() < 1e-15, "estimated rho_1 = {}", est.value);

    let seq = seq_beta_binomial(1, 1.0, 1.0).map_err(|e| e.to_string())?;
    ensure!((seq.rho[1] - oracle).abs() < 1e-15, "sequence rho_1 = {}", seq.rho[1]);
    let eig = model.eigenvalue(1).map_err(|e| e.to_string())?;
    ensure!((eig - seq.rho[1].powi(2)).abs() <= 2.0 * f64::EPSILON, "eigenvalue {eig} vs rho_1^2");
    let printed = seq.printed_variant.as_ref().ok_or("printed variant missing")?;
    ensure!((printed[1] - 1.0 / 3.0).abs() < 1e-16, "printed rho_1 = {}", printed[1]);
    ensure!(
        seq.note.as_deref().is_some_and(|n| n.contains("eigenvalue")),
        "printed variant is not flagged"
    );
    Ok(format!("K = [[2/3,1/3],[1/3,2/3]], spectrum {{1, 1/3}}, rho_1 = {:.15}, printed 1/3 flagged", seq.rho[1]))
}

fn eigenfunctions() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [
        ConjugateModel::gamma_poisson(2.0, 1.0).unwrap(),
        ConjugateModel::gamma_poisson(0.7, 3.0).unwrap(),
        ConjugateModel::gauss_gauss(0.0, 1.0).unwrap(),
        ConjugateModel::gauss_gauss(-1.0, 0.5).unwrap(),
    ] {
        for n in 0..=8 {
            let e = spectral_eigencheck(&m, n, 64).map_err(|e| e.to_string())?;
            ensure!(e.residual < 1e-6, "{} n={n}: residual {:e}", m.name(), e.residual);
            worst = worst.max(e.residual);
        }
    }
    let finite = ConjugateModel::beta_binomial(8, 1.5, 2.0).unwrap();
    for n in 0..=8 {
        let e = spectral_eigencheck(&finite, n, 64).map_err(|e| e.to_string())?;
        ensure!(e.exact && e.residual == 0.0, "finite model n={n}: residual {:e}", e.residual);
    }
    Ok(format!("max residual {worst:.1e}; finite model exactly 0"))
}

fn chain_decay() -> Outcome {
    let mut parts = Vec::new();
    for (m, start) in [
        (ConjugateModel::beta_binomial(1, 1.0, 1.0).unwrap(), 0.0),
        (ConjugateModel::beta_binomial(10, 2.0, 3.0).unwrap(), 4.0),
        (ConjugateModel::gauss_gauss(0.0, 1.0).unwrap(), 0.0),
    ] {
        let trace = run_x_chain(&m, start, 1_000_000, 2024).map_err(|e| e.to_string())?;
        let basis = recurrence(&m.margin_x().unwrap(), 1, RecurrenceMode::FastPath).map_err(|e| e.to_string())?;
        let fit = autocorrelation_vs_spectrum(&trace, &basis, 1, 20).map_err(|e| e.to_string())?;
        let want = m.eigenvalue(1).map_err(|e| e.to_string())?;
        ensure!((fit.rate - want).abs() <= 0.02, "{}: fitted {} vs {want}", m.name(), fit.rate);
        parts.push(format!("{} {:.4}/{:.4}", m.name(), fit.rate, want));
    }
    Ok(parts.join(", "))
}

fn kibble_transform() -> Outcome {
    let draws = 1_000_000;
    let mut worst: f64 = 0.0;
    for (q, r) in [(2.0, 0.5), (1.0, 0.9)] {
        let m = ConjugateModel::kibble_gamma(q, r).unwrap();
        let g = MeasureSpec::gamma(q, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(606);
        let pairs: Vec<(f64, f64)> = (0..draws)
            .map(|_| {
                let x = g.sample(&mut rng).unwrap();
                (x, m.sample_forward(x, &mut rng).unwrap())
            })
            .collect();
        for (s, t) in [(0.5, 0.5), (1.0, 2.0)] {
            let vals: Vec<f64> = pairs.iter().map(|(x, y)| (-s * x - t * y).exp()).collect();
            let mean = vals.iter().sum::<f64>() / draws as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let se = (var / draws as f64).sqrt();
            let want = (1.0 + s + t + (1.0 - r) * s * t).powf(-q);
            let z = (mean - want).abs() / se;
            ensure!(z < 3.0, "q={q} r={r} (s,t)=({s},{t}): {mean} vs {want}, {z:.2} SE");
            let lib = kibble_laplace(q, &Mixing::Point { r }, s, t).map_err(|e| e.to_string())?;
            ensure!((lib - want).abs() < 1e-14, "closed form {lib} vs {want}");
            worst = worst.max(z);
        }
    }
    for (q, s, t) in [(2.0, 0.5, 0.5), (1.0, 1.0, 2.0), (3.5, 0.2, 4.0)] {
        let joint = kibble_laplace(q, &Mixing::Point { r: 0.0 }, s, t).map_err(|e| e.to_string())?;
        let product = (1.0 + s).powf(-q) * (1.0 + t).powf(-q);
        ensure!((joint - product).abs() <= 1e-15 * product, "r=0 at ({s},{t}): {joint} vs {product}");
    }
    Ok(format!("worst deviation {worst:.2} SE; r=0 factorizes"))
}

fn hyperbolic_beta_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (q, eta) in [(2.0, 1.0), (3.0, 0.5)] {
        let h = seq_hyperbolic_beta(q, eta, 10).map_err(|e| e.to_string())?;
        let mut moment = 1.0;
        for n in 0..=10 {
            if n > 0 {
                moment *= (eta + (n - 1) as f64) / (q + (n - 1) as f64);
            }
            let d = (h.sequence.rho[n] - moment).abs();
            ensure!(d < 1e-12, "(q,eta)=({q},{eta}) n={n}: {} vs {moment}", h.sequence.rho[n]);
            worst = worst.max(d);
        }
    }
    Ok(format!("max deviation {worst:.1e}"))
}

fn constructors() -> Vec<(LancasterSequence, Case)> {
    let g2 = MeasureSpec::gamma(2.0, 1.0).unwrap();
    let id = LancasterSequence::identity(g2.clone(), 20);
    let geo = seq_geometric(g2.clone(), g2.clone(), 0.6, 20).unwrap();
    let gamma_nef = NefSpec::gamma(1.0).unwrap();
    let nb_nef = NefSpec::negative_binomial(1.0).unwrap();
    vec![
        (seq_eagleson(gamma_nef, 1.0, 2.0, 0.5, -1.0, 20).unwrap(), Case::D),
        (seq_eagleson(NefSpec::Poisson, 1.0, 2.0, 3.0, 0.0, 20).unwrap(), Case::D),
        (seq_eagleson(nb_nef, 0.5, 1.5, 1.0, -0.7, 20).unwrap(), Case::D),
        (seq_eagleson(NefSpec::Gaussian, 1.0, 1.0, 2.0, 0.0, 20).unwrap(), Case::C),
        (seq_eagleson(NefSpec::hyperbolic(1.0).unwrap(), 1.0, 1.0, 1.0, 0.0, 20).unwrap(), Case::C),
        (seq_hyperbolic_beta(3.0, 0.5, 20).unwrap().sequence, Case::C),
        (seq_geometric_cross(CrossKind::Poisson { a: 1.0, b: 4.0 }, 0.5, 20).unwrap(), Case::D),
        (
            seq_geometric_cross(CrossKind::Negbin { a: 0.2, b: 0.5, lambda: 2.0 }, 0.6, 20).unwrap(),
            Case::D,
        ),
        (seq_geometric_cross(CrossKind::NegbinGamma { a: 0.25, lambda: 1.5 }, 0.5, 20).unwrap(), Case::D),
        (seq_product(&id, &geo, &geo).unwrap(), Case::D),
        (seq_geometric(g2.clone(), g2, 0.3, 20).unwrap(), Case::D),
    ]
}

fn verifier() -> Outcome {
    let list = constructors();
    for (s, case) in &list {
        let r = verify_moment_representation(s, *case, 20).map_err(|e| e.to_string())?;
        ensure!(r.verdict != Verdict::Refuted, "{} refuted: {:?}", s.provenance, r.notes);
    }
    let g = MeasureSpec::gamma(1.0, 1.0).unwrap();
    let bad = LancasterSequence::new(vec![1.0, 0.2, 0.9], (g.clone(), g), "explicit").map_err(|e| e.to_string())?;
    let r = verify_moment_representation(&bad, Case::D, 2).map_err(|e| e.to_string())?;
    ensure!(r.verdict == Verdict::Refuted, "[1, 0.2, 0.9] gave {:?}", r.verdict);

    let h = MeasureSpec::hyperbolic_tilted(1.0, 0.0).unwrap();
    let geo = seq_geometric(h.clone(), h, 0.9, 20).map_err(|e| e.to_string())?;
    let r = verify_moment_representation(&geo, Case::C, 20).map_err(|e| e.to_string())?;
    ensure!(
        r.verdict == Verdict::Consistent && r.one_sided,
        "hyperbolic 0.9^n gave {:?}, one_sided {}",
        r.verdict,
        r.one_sided
    );
    ensure!(r.notes.iter().any(|n| n.contains("known non-Lancaster")), "annotation missing: {:?}", r.notes);
    Ok(format!("{} constructors accepted, [1, 0.2, 0.9] refuted, 0.9^n flagged", list.len()))
}

/// ∬ K_a(x, y, z) μ_a(dx) μ_a(dy): double exponential quadrature in x and an
/// 80-node Gauss–Legendre rule in θ along the chord y = xz + s sin θ.
fn kernel_mass(k: &JacobiKernel, z: f64) -> f64 {
    let legendre = extended_recurrence(&MeasureSpec::symmetric_jacobi(1.0).unwrap(), 80)
        .unwrap()
        .quadrature(80)
        .unwrap();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let inner = |x: f64| {
        let s = ((1.0 - x * x) * (1.0 - z * z)).sqrt();
        let f = |u: f64| {
            let t = half_pi * u;
            s * t.cos() * k.sigma_z_density(x, x * z + s * t.sin(), z).unwrap()
        };
        2.0 * half_pi * legendre.integrate(f)
    };
    integrate(inner, Interval::Finite(-1.0 + 1e-6, 1.0 - 1e-6), 1e-8, 1e-12)
        .unwrap()
        .value
}

fn jacobi_kernel() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let (mut min_seen, mut worst_pt, mut worst_mass, mut worst_ell) = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
    for a in [1.0, 1.5, 2.0] {
        let spec = KernelSpec::new(MeasureSpec::symmetric_jacobi(a).unwrap(), 4000, Summation::Filtered)
            .map_err(|e| e.to_string())?;
        let r = positivity_scan(&spec, 50).map_err(|e| e.to_string())?;
        let min = r.min_stabilized.as_ref().ok_or("no stabilized cell")?.value;
        ensure!(min >= -1e-6, "a={a}: stabilized min {min:e}");
        ensure!(r.witness_count == 0, "a={a}: {} negative witnesses", r.witness_count);
        min_seen = min_seen.min(min);

        let k = JacobiKernel::new(a).map_err(|e| e.to_string())?;
        let mut checked = 0;
        while checked < 100 {
            let (x, y, z) = (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if jacobi_delta(x, y, z) < DELTA_MARGIN {
                continue;
            }
            checked += 1;
            let s = filtered_k(&spec, x, y, z).map_err(|e| e.to_string())?;
            ensure!(s.stabilized, "a={a}: series not stabilized at ({x},{y},{z})");
            let d = (s.last() - k.eval(x, y, z).map_err(|e| e.to_string())?).abs();
            ensure!(d < 1e-4, "a={a}: closed form off by {d:e} at ({x},{y},{z})");
            worst_pt = worst_pt.max(d);
        }

        for z in [-0.5, 0.1, 0.8] {
            let m = kernel_mass(&k, z);
            ensure!((m - 1.0).abs() < 1e-4, "a={a} z={z}: mass {m}");
            worst_mass = worst_mass.max((m - 1.0).abs());
        }
        let e = elliptical_contour_check(a, 0.5, 1000, 5).map_err(|e| e.to_string())?;
        ensure!(e < 1e-10, "a={a}: elliptical deviation {e:e}");
        worst_ell = worst_ell.max(e);
    }
    Ok(format!(
        "min {min_seen:.1e}, closed form {worst_pt:.1e}, mass {worst_mass:.1e}, elliptical {worst_ell:.1e}"
    ))
}

/// P(X = k) = C(n,k) E[θ^k (1−θ)^{n−k}] with (1−θ)^{n−k} expanded and
/// E[θ^m] = Π_{i<m} (a+i)/(a+b+i).
fn mass_oracle(n: usize, a: &BigRational, b: &BigRational) -> Vec<BigRational> {
    let theta_moment = |m: usize| {
        (0..m).fold(BigRational::one(), |acc, i| {
            let i = BigRational::from_integer(i.into());
            acc * (a + &i) / (a + b + &i)
        })
    };
    let choose = |n: usize, k: usize| {
        (0..k).fold(BigRational::one(), |acc, i| {
            acc * BigRational::from_integer((n - i).into()) / BigRational::from_integer((i + 1).into())
        })
    };
    (0..=n)
        .map(|k| {
            let inner = (0..=n - k).fold(BigRational::zero(), |acc, j| {
                let term = choose(n - k, j) * theta_moment(k + j);
                if j % 2 == 0 {
                    acc + term
                } else {
                    acc - term
                }
            });
            choose(n, k) * inner
        })
        .collect()
}

fn mixture_marginal_masses() -> Outcome {
    for (a, b) in [(ratio(1, 1), ratio(1, 1)), (ratio(3, 2), ratio(5, 2)), (ratio(1, 3), ratio(7, 4))] {
        for n in 1..=20usize {
            let masses = beta_binomial_masses(n, &a, &b);
            ensure!(masses.iter().all(|m| !m.is_negative()), "negative mass at n={n}");
            let total = masses.iter().fold(BigRational::zero(), |acc, m| acc + m);
            ensure!(total.is_one(), "n={n}: masses sum to {total}");
            ensure!(masses == mass_oracle(n, &a, &b), "n={n}: masses differ from the expansion oracle");
        }
    }

    // The Diaconis–Ylvisaker mixture of Binomial(5) over Beta(3/2, 5/2).
    let prior = DyPrior::new(NefSpec::binomial(5).unwrap(), 1.875, 0.8).map_err(|e| e.to_string())?;
    let marginal = mixture_marginal(&prior).map_err(|e| e.to_string())?;
    let exact: Vec<f64> = mass_oracle(5, &ratio(3, 2), &ratio(5, 2))
        .iter()
        .map(|m| m.to_f64().unwrap())
        .collect();
    for (k, &p) in exact.iter().enumerate() {
        let lib = marginal.ln_pmf(k as u64).ok_or("no pmf")?.exp();
        ensure!((lib - p).abs() < 1e-13, "marginal pmf at {k}: {lib} vs {p}");
        let quad = mixture_density_by_quadrature(&prior, k as f64, 1e-12).map_err(|e| e.to_string())?;
        ensure!((quad - p).abs() < 1e-9, "mixture quadrature at {k}: {quad} vs {p}");
    }

    let law = BetaBinomialLaw::new(5, 1.5, 2.5).map_err(|e| e.to_string())?;
    let mut rng = ChaCha20Rng::seed_from_u64(31);
    let draws = 1_000_000;
    let mut counts = [0usize; 6];
    for _ in 0..draws {
        let (x, _) = law.sample_pair(&mut rng).map_err(|e| e.to_string())?;
        counts[x as usize] += 1;
    }
    let mut worst: f64 = 0.0;
    for (k, &p) in exact.iter().enumerate() {
        let freq = counts[k] as f64 / draws as f64;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        let z = (freq - p).abs() / sigma;
        ensure!(z < 3.0, "k={k}: frequency {freq} vs {p} ({z:.2} sigma)");
        worst = worst.max(z);
    }
    Ok(format!("exact for n <= 20; Monte Carlo worst {worst:.2} sigma"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("orthonormality", orthonormality),
        ("oracle agreement", oracle_agreement),
        ("beta-binomial exact case", beta_binomial_exact_case),
        ("eigenfunction property", eigenfunctions),
        ("chain spectral decay", chain_decay),
        ("Kibble-Moran Laplace transform", kibble_transform),
        ("hyperbolic Beta-mixture identity", hyperbolic_beta_identity),
        ("moment-representation verifier", verifier),
        ("Jacobi kernel", jacobi_kernel),
        ("mixture marginal", mixture_marginal_masses),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
