//! Property tests: jet arithmetic identities, homogeneity of the family's
//! objects, and agreement of the two Jacobi endomorphism routes.

use proptest::prelude::*;
use spraylab::jets::{euler_defect, Jet, SampleBox, Sampler, TangentSample};
use spraylab::metrics::family_metric;
use spraylab::metrizability::rho_of_p;
use spraylab::oneform::{deformation_spray, family_b, OneFormCoefficients};
use spraylab::spray::{coefficient_euler_defect, homogeneity_defect, jacobi, jacobi_alt};

const NVARS: usize = 3;
const ORDER: usize = 3;
const NCOEF: usize = 20; // C(3 + 3, 3)

fn jet_strategy(lo: f64, hi: f64) -> impl Strategy<Value = Jet> {
    (lo..hi, prop::collection::vec(-1.0f64..1.0, NCOEF - 1)).prop_map(|(v, rest)| {
        let mut c = vec![v];
        c.extend(rest);
        Jet::from_taylor_coefficients(NVARS, ORDER, c).unwrap()
    })
}

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.taylor_coefficients()
        .iter()
        .zip(b.taylor_coefficients())
        .all(|(u, v)| (u - v).abs() <= tol * u.abs().max(v.abs()).max(1.0))
}

/// Coefficients with `C = AA^T + I/2`, plus one sample inside the domain.
fn family_case(n: usize) -> impl Strategy<Value = (OneFormCoefficients, TangentSample)> {
    (
        prop::collection::vec(-0.6f64..0.6, n * n),
        prop::collection::vec(-0.3f64..0.3, n),
        0.8f64..1.5,
        any::<u64>(),
    )
        .prop_map(move |(a, cv, c0, seed)| {
            let c: Vec<f64> = (0..n * n)
                .map(|ij| {
                    let (i, j) = (ij / n, ij % n);
                    (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum::<f64>()
                        + if i == j { 0.5 } else { 0.0 }
                })
                .collect();
            let coeffs = OneFormCoefficients::new(&c, &cv, c0).unwrap();
            let m = family_metric(&coeffs);
            let set = Sampler::new(SampleBox::cube(n, 0.5), seed).draw_valid(1, |p| m.in_domain(p));
            (coeffs, set.samples[0].clone())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_identities(a in jet_strategy(-2.0, 2.0), b in jet_strategy(-2.0, 2.0), c in jet_strategy(-2.0, 2.0)) {
        prop_assert!(close(&((&a + &b) * &c), &(&a * &c + &b * &c), 1e-12));
        prop_assert!(close(&(&a * &b), &(&b * &a), 1e-15));
        prop_assert!(close(&((&a * &b) * &c), &(&a * (&b * &c)), 1e-12));
        prop_assert!(close(&(&a - &a), &Jet::constant(0.0, NVARS, ORDER).unwrap(), 0.0));
    }

    #[test]
    fn inverse_functions(a in jet_strategy(0.5, 3.0)) {
        let one = Jet::constant(1.0, NVARS, ORDER).unwrap();
        prop_assert!(close(&(&a * &a.recip().unwrap()), &one, 1e-12));
        prop_assert!(close(&a.sqrt().unwrap().square(), &a, 1e-12));
        prop_assert!(close(&a.ln().unwrap().exp(), &a, 1e-12));
        prop_assert!(close(&a.powi(3), &(&a * &a * &a), 1e-12));
    }

    #[test]
    fn euler_relations_n2((c, p) in family_case(2)) {
        euler_checks(&c, &p)?;
    }

    #[test]
    fn euler_relations_n3((c, p) in family_case(3)) {
        euler_checks(&c, &p)?;
    }

    #[test]
    fn jacobi_routes_agree((c, p) in family_case(3)) {
        let s = deformation_spray(&c);
        let (a, b) = (jacobi(&s, &p).unwrap(), jacobi_alt(&s, &p).unwrap());
        prop_assert!((&a.r - &b.r).amax() <= 1e-9 * a.r.amax().max(1.0));
    }

    #[test]
    fn sampler_is_deterministic(seed in any::<u64>()) {
        let draw = || {
            let mut s = Sampler::new(SampleBox::cube(3, 0.5), seed);
            (0..5).map(|_| s.draw()).collect::<Vec<_>>()
        };
        prop_assert_eq!(draw(), draw());
    }
}

fn euler_checks(c: &OneFormCoefficients, p: &TangentSample) -> Result<(), TestCaseError> {
    let m = family_metric(c);
    let f = m.value(p).unwrap();
    let beta = family_b(c).beta().clone();
    let s = deformation_spray(c);
    prop_assert!(euler_defect(m.field(), p, 1.0).unwrap().abs() <= 1e-10 * f.max(1.0));
    prop_assert!(euler_defect(&beta, p, 1.0).unwrap().abs() <= 1e-10);
    prop_assert!(euler_defect(&rho_of_p(&beta), p, 2.0).unwrap().abs() <= 1e-10 * (f * f).max(1.0));
    for i in 0..p.dim() {
        prop_assert!(coefficient_euler_defect(&s, i, p).unwrap().abs() <= 1e-10);
    }
    prop_assert!(homogeneity_defect(&s, p).unwrap() <= 1e-10);
    Ok(())
}
