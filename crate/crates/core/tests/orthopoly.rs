use lancaster_core::orthopoly::{
    exact_gram_is_identity, moments, recurrence, MeasureSpec, PolyFamily, RecurrenceMode,
};

pub fn family_representatives() -> Vec<MeasureSpec> {
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

fn gram_deviation(m: &MeasureSpec, n: usize) -> f64 {
    let mode = if m.poly_family().has_fast_path() {
        RecurrenceMode::FastPath
    } else {
        RecurrenceMode::Oracle
    };
    let rec = recurrence(m, n, mode).unwrap();
    let mut worst: f64 = 0.0;
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
                .unwrap()
                .value;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

#[test]
fn gram_matrices_are_identity_for_every_family() {
    let reps = family_representatives();
    let covered: Vec<PolyFamily> = reps.iter().map(|m| m.poly_family()).collect();
    for f in PolyFamily::ALL_NAMED {
        assert!(covered.contains(&f), "{f:?} not covered");
    }
    for m in &reps {
        let dev = gram_deviation(m, 20);
        assert!(dev < 1e-8, "{}: max |G - I| = {dev:e}", m.label());
    }
}

#[test]
fn lattice_gram_matrices_are_exact() {
    assert!(exact_gram_is_identity(&MeasureSpec::binomial(30, 0.3).unwrap(), 20).unwrap());
    assert!(exact_gram_is_identity(&MeasureSpec::beta_binomial(25, 0.5, 2.25).unwrap(), 20).unwrap());
    assert!(exact_gram_is_identity(&MeasureSpec::beta_binomial(20, 3.0, 7.0).unwrap(), 20).unwrap());
}

#[test]
fn oracle_agrees_with_closed_forms() {
    for m in family_representatives()
        .into_iter()
        .filter(|m| m.poly_family().has_fast_path())
    {
        let fast = recurrence(&m, 15, RecurrenceMode::FastPath).unwrap();
        let oracle = recurrence(&m, 15, RecurrenceMode::Oracle).unwrap();
        for k in 0..=15 {
            let da = (fast.alpha(k) - oracle.alpha(k)).abs();
            assert!(da < 1e-9 * fast.alpha(k).abs().max(1.0), "{} alpha_{k}", m.label());
            if k >= 1 {
                let db = (fast.beta(k) - oracle.beta(k)).abs();
                assert!(db < 1e-9 * fast.beta(k).max(1.0), "{} beta_{k}", m.label());
            }
        }
    }
}

/// Coefficients of p_n in the monomial basis, expanded from the recurrence.
fn monomial_coefficients(rec: &lancaster_core::orthopoly::RecurrenceCoeffs, n: usize) -> Vec<f64> {
    let mut prev = vec![0.0; n + 2];
    let mut cur = vec![0.0; n + 2];
    cur[0] = 1.0;
    for k in 0..n {
        let sb = rec.beta(k + 1).sqrt();
        let sp = if k == 0 { 0.0 } else { rec.beta(k).sqrt() };
        let mut next = vec![0.0; n + 2];
        for d in 0..=k {
            next[d + 1] += cur[d] / sb;
            next[d] += (-rec.alpha(k) * cur[d] - sp * prev[d]) / sb;
        }
        prev = cur;
        cur = next;
    }
    cur.truncate(n + 1);
    cur
}

#[test]
fn leading_coefficient_identity() {
    for m in family_representatives() {
        let mode = if m.poly_family().has_fast_path() {
            RecurrenceMode::FastPath
        } else {
            RecurrenceMode::Oracle
        };
        let rec = recurrence(&m, 20, mode).unwrap();
        for n in 0..=20 {
            let c = monomial_coefficients(&rec, n)[n];
            let prod: f64 = (1..=n).map(|k| rec.beta(k).powf(-0.5)).product();
            let lead = rec.leading_coeff(n).unwrap().coefficient;
            assert!((c / prod - 1.0).abs() < 1e-10, "{} n={n}", m.label());
            assert!((lead / prod - 1.0).abs() < 1e-10);
            assert!(lead > 0.0);
        }
    }
}

#[test]
fn gauss_rules_are_exact_to_twice_the_nodes() {
    for m in family_representatives() {
        let mode = if m.poly_family().has_fast_path() {
            RecurrenceMode::FastPath
        } else {
            RecurrenceMode::Oracle
        };
        let rec = recurrence(&m, 10, mode).unwrap();
        let rule = rec.quadrature(6).unwrap();
        let mom = moments(&m, 11).unwrap();
        for k in 0..=11 {
            let q = rule.integrate(|x| x.powi(k as i32));
            let exact = mom.values[k];
            assert!(
                (q - exact).abs() < 1e-10 * exact.abs().max(1.0),
                "{} k={k}: {q} vs {exact}",
                m.label()
            );
        }
    }
}

#[test]
fn hankel_matrices_of_moments_are_positive() {
    use nalgebra::DMatrix;
    for m in family_representatives() {
        let mom = moments(&m, 12).unwrap();
        let h = DMatrix::from_fn(7, 7, |i, j| mom.values[i + j]);
        let scale = h.abs().max();
        let min = h.symmetric_eigenvalues().min();
        assert!(min > -1e-12 * scale, "{}", m.label());
    }
}
