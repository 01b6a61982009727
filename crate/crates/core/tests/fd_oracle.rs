//! Jets against central finite differences for every built-in field, on all
//! multi-indices of degree at most 2.

mod common;

use common::sample;
use spraylab::jets::{fd_oracle, Field, ScalarField, TangentSample};
use spraylab::metrics::{
    euclidean_metric, family_metric, funk_metric, klein_metric, klein_pullback_metric,
    projective_factor_field, randers_example, AffineMap, LambdaParams,
};
use spraylab::metrizability::{alpha_fields, rho_of_p};
use spraylab::oneform::{family_b, potential, OneFormCoefficients};
use spraylab::spray::{flat_spray, ricci_field, samples, Spray};

const REL_TOL: f64 = 1e-6;

fn multi_indices(m: usize, max_degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for a in 0..m {
        out.push(vec![a]);
    }
    if max_degree >= 2 {
        for a in 0..m {
            for b in a..m {
                out.push(vec![a, b]);
            }
        }
    }
    out
}

fn agree(name: &str, f: &dyn ScalarField, p: &TangentSample, max_degree: usize) {
    let m = 2 * p.dim();
    let jet = f.jet(p, max_degree).unwrap();
    for idx in multi_indices(m, max_degree) {
        let exact = jet.derivative(&idx);
        let approx = fd_oracle(f, p, &idx).unwrap();
        let err = (exact - approx).abs() / exact.abs().max(1.0);
        assert!(
            err <= REL_TOL,
            "{name} at {p:?}, index {idx:?}: jet {exact}, fd {approx}, rel err {err:e}"
        );
    }
}

fn coeffs() -> OneFormCoefficients {
    OneFormCoefficients::new(&[1.1, 0.2, 0.2, 0.7], &[0.3, -0.2], 1.2).unwrap()
}

fn coeffs3() -> OneFormCoefficients {
    OneFormCoefficients::new(
        &[1.0, 0.1, -0.2, 0.1, 0.9, 0.0, -0.2, 0.0, 1.3],
        &[0.1, 0.2, -0.1],
        0.9,
    )
    .unwrap()
}

fn points2() -> Vec<TangentSample> {
    vec![
        sample(&[0.1, -0.2], &[1.0, 0.3]),
        sample(&[-0.35, 0.4], &[-0.6, 1.1]),
        sample(&[0.25, 0.05], &[0.2, -0.9]),
    ]
}

fn spray_coefficients(name: &str, s: &Spray, pts: &[TangentSample]) {
    for i in 0..s.dim() {
        let gi = s.coefficient_field(i);
        for p in pts {
            agree(&format!("{name} G^{i}"), &gi, p, 2);
        }
    }
}

#[test]
fn metrics_agree_with_finite_differences() {
    let lp = LambdaParams::new(1.0, vec![0.3, -0.2], 1.0).unwrap();
    let map = AffineMap::new(
        nalgebra::DMatrix::from_row_slice(2, 2, &[1.5, 0.3, -0.2, 0.8]),
        nalgebra::DVector::from_column_slice(&[0.4, -0.1]),
    )
    .unwrap();
    let metrics = [
        ("family", family_metric(&coeffs())),
        ("klein", klein_metric(2, 1.0)),
        ("klein mu=2.5", klein_metric(2, 2.5)),
        ("euclidean", euclidean_metric(2)),
        ("randers", randers_example(&lp)),
        ("funk", funk_metric(&lp).unwrap()),
        ("klein pullback", klein_pullback_metric(&map)),
    ];
    for (name, m) in &metrics {
        for p in points2() {
            agree(name, m.field(), &p, 2);
            agree(&format!("{name} energy"), &m.energy(), &p, 2);
            agree(&format!("{name} P"), &projective_factor_field(m), &p, 2);
        }
    }
    let fam3 = family_metric(&coeffs3());
    let p3 = sample(&[0.1, -0.3, 0.2], &[0.7, 0.4, -0.5]);
    agree("family n=3", fam3.field(), &p3, 2);
}

#[test]
fn one_forms_and_scalars_agree() {
    let b = family_b(&coeffs());
    let fields: Vec<(String, Field)> = vec![
        ("beta".into(), b.beta().clone()),
        ("b_1".into(), b.components()[0].clone()),
        ("b_2".into(), b.components()[1].clone()),
        ("potential".into(), potential(&coeffs())),
        ("rho".into(), rho_of_p(b.beta())),
        ("sum one-form".into(), samples::sum_one_form()),
        ("example2 energy".into(), samples::example2_energy()),
    ];
    for (name, f) in &fields {
        for p in points2() {
            agree(name, f, &p, 2);
        }
    }
    // α needs P two orders up, so its jets stop at order 1.
    for (i, a) in alpha_fields(b.beta()).iter().enumerate() {
        for p in points2() {
            agree(&format!("alpha_{i}"), a, &p, 1);
        }
    }
}

#[test]
fn spray_coefficients_agree() {
    let pts = points2();
    spray_coefficients("flat", &flat_spray(2).unwrap(), &pts);
    spray_coefficients(
        "family",
        &spraylab::oneform::deformation_spray(&coeffs()),
        &pts,
    );
    let upper: Vec<TangentSample> = pts
        .iter()
        .map(|p| sample(&[p.x()[0], p.x()[1] + 3.0], p.y()))
        .collect();
    spray_coefficients("example1", &samples::example1(), &upper);
    spray_coefficients("example2", &samples::example2(), &upper);
}

#[test]
fn ricci_field_agrees_to_first_order() {
    let ric = ricci_field(&spraylab::oneform::deformation_spray(&coeffs()));
    for p in points2() {
        agree("Ric", &ric, &p, 1);
    }
}
